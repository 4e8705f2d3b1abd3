//! Finite commutative base rings and homomorphisms between them.
//!
//! A ring is shared as [`Ring`] (an `Arc<BaseRing>`); elements are plain
//! coordinate vectors that only make sense together with their ring.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_COORDS: usize = 16;

pub type Ring = Arc<BaseRing>;

/// Canonical coordinates of an element. Unused trailing slots are zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RingElement {
    c: [u32; MAX_COORDS],
}

impl RingElement {
    pub fn raw(&self) -> &[u32; MAX_COORDS] {
        &self.c
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.c.iter().rposition(|&v| v != 0).map_or(1, |i| i + 1);
        write!(f, "{:?}", &self.c[..last])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Prime,
    IntegersMod {
        a: u32,
    },
    /// F_p[x]/(modulus), modulus monic, coefficients low to high.
    Galois {
        f: u32,
        modulus: Vec<u32>,
    },
    /// base[t_1..t_vars] / (t_1..t_vars)^ell.
    Truncated {
        base: Ring,
        vars: u32,
        ell: u32,
        monomials: Vec<Vec<u32>>,
        table: Vec<Vec<Option<u16>>>,
    },
    Product {
        factors: Vec<Ring>,
        offsets: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseRing {
    p: u32,
    kind: Kind,
    moduli: Vec<u32>,
    char_exp: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingDescriptor {
    pub kind: String,
    pub p: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub modulus: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ell: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub vars: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub base: Option<Box<RingDescriptor>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub factors: Option<Vec<RingDescriptor>>,
}

impl RingDescriptor {
    pub fn prime(p: u32) -> Self {
        RingDescriptor {
            kind: "prime".into(),
            p,
            a: None,
            f: None,
            modulus: None,
            ell: None,
            vars: None,
            base: None,
            factors: None,
        }
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn check_p(p: u32) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::CompositeP(p));
    }
    if p == 2 {
        return Err(Error::UnsupportedPrime(p));
    }
    Ok(())
}

// Polynomials over F_p, coefficients low to high.
fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&x| x as u64).collect();
    let b = poly_trim(b.to_vec());
    let db = b.len() - 1;
    let lead_inv = mod_pow(b[db] as u64, (p - 2) as u64, p as u64);
    let p = p as u64;
    while r.len() > db {
        let top = r.len() - 1;
        let c = r[top] * lead_inv % p;
        if c != 0 {
            for (i, &bi) in b.iter().enumerate() {
                let k = top - db + i;
                r[k] = (r[k] + p * p - c * bi as u64 % p) % p;
            }
        }
        r.pop();
        while r.last() == Some(&0) {
            r.pop();
        }
    }
    r.into_iter().map(|x| x as u32).collect()
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn mod_inv(x: u64, m: u64) -> Option<u64> {
    let (mut a, mut b) = (x as i128 % m as i128, m as i128);
    let (mut u, mut v) = (1i128, 0i128);
    while b != 0 {
        let q = a / b;
        (a, b) = (b, a - q * b);
        (u, v) = (v, u - q * v);
    }
    if a != 1 {
        return None;
    }
    Some(u.rem_euclid(m as i128) as u64)
}

/// Irreducibility over F_p by trial division with every monic polynomial of
/// degree at most deg/2.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let m = poly_trim(modulus.to_vec());
    if m.len() < 2 {
        return false;
    }
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for k in 0..count {
            let mut g = vec![0u32; d + 1];
            let mut t = k;
            for gi in g.iter_mut().take(d) {
                *gi = (t % p as u64) as u32;
                t /= p as u64;
            }
            g[d] = 1;
            if poly_rem(&m, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// The monic irreducible polynomial of degree f whose coefficient vector
/// (c_0, ..., c_{f-1}) is least when read as the integer sum c_i p^i.
pub fn smallest_irreducible(p: u32, f: u32) -> Vec<u32> {
    let count = (p as u64).pow(f);
    for k in 0..count {
        let mut m = vec![0u32; f as usize + 1];
        let mut t = k;
        for mi in m.iter_mut().take(f as usize) {
            *mi = (t % p as u64) as u32;
            t /= p as u64;
        }
        m[f as usize] = 1;
        if is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl BaseRing {
    pub fn prime(p: u32) -> Result<Ring> {
        check_p(p)?;
        Ok(Arc::new(BaseRing { p, kind: Kind::Prime, moduli: vec![p], char_exp: 1 }))
    }

    pub fn integers_mod(p: u32, a: u32) -> Result<Ring> {
        check_p(p)?;
        if a == 0 {
            return Err(Error::ZeroPrecision("a must be at least 1"));
        }
        let m = (p as u64)
            .checked_pow(a)
            .filter(|&m| m < (1u64 << 31))
            .ok_or_else(|| Error::TooLarge(format!("{p}^{a}")))?;
        Ok(Arc::new(BaseRing { p, kind: Kind::IntegersMod { a }, moduli: vec![m as u32], char_exp: a }))
    }

    pub fn galois(p: u32, f: u32) -> Result<Ring> {
        check_p(p)?;
        if f == 0 {
            return Err(Error::ZeroPrecision("f must be at least 1"));
        }
        if f == 1 {
            return Self::prime(p);
        }
        Self::galois_with_modulus(p, smallest_irreducible(p, f))
    }

    pub fn galois_with_modulus(p: u32, modulus: Vec<u32>) -> Result<Ring> {
        check_p(p)?;
        let modulus = poly_trim(modulus.into_iter().map(|c| c % p).collect());
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::BadDescriptor("modulus must be monic of degree >= 1".into()));
        }
        let f = modulus.len() as u32 - 1;
        if f as usize > MAX_COORDS {
            return Err(Error::TooLarge(format!("degree {f}")));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::ReducibleModulus(modulus));
        }
        if f == 1 {
            return Self::prime(p);
        }
        Ok(Arc::new(BaseRing { p, kind: Kind::Galois { f, modulus }, moduli: vec![p; f as usize], char_exp: 1 }))
    }

    /// base[t]/t^ell.
    pub fn truncated(base: Ring, ell: u32) -> Result<Ring> {
        Self::truncated_multi(base, 1, ell)
    }

    /// base[t_1..t_vars] modulo all monomials of total degree ell.
    pub fn truncated_multi(base: Ring, vars: u32, ell: u32) -> Result<Ring> {
        if ell == 0 {
            return Err(Error::ZeroPrecision("ell must be at least 1"));
        }
        if vars == 0 {
            return Err(Error::BadDescriptor("vars must be at least 1".into()));
        }
        let mut monomials: Vec<Vec<u32>> = Vec::new();
        for deg in 0..ell {
            let mut layer = Vec::new();
            exponent_vectors(vars as usize, deg, &mut vec![], &mut layer);
            layer.sort_by(|a, b| b.cmp(a));
            monomials.extend(layer);
        }
        let dim = monomials.len() * base.dim();
        if dim > MAX_COORDS {
            return Err(Error::TooLarge(format!("{dim} coordinates")));
        }
        let table = monomials
            .iter()
            .map(|a| {
                monomials
                    .iter()
                    .map(|b| {
                        let s: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                        monomials.iter().position(|m| *m == s).map(|k| k as u16)
                    })
                    .collect()
            })
            .collect();
        let moduli = (0..monomials.len()).flat_map(|_| base.moduli.clone()).collect();
        Ok(Arc::new(BaseRing {
            p: base.p,
            char_exp: base.char_exp,
            kind: Kind::Truncated { base, vars, ell, monomials, table },
            moduli,
        }))
    }

    pub fn product(factors: Vec<Ring>) -> Result<Ring> {
        let Some(first) = factors.first() else {
            return Err(Error::BadDescriptor("empty product".into()));
        };
        let p = first.p;
        if factors.iter().any(|r| r.p != p) {
            return Err(Error::RingMismatch("factors over different primes".into()));
        }
        let mut offsets = Vec::new();
        let mut moduli = Vec::new();
        for r in &factors {
            offsets.push(moduli.len());
            moduli.extend(r.moduli.iter().copied());
        }
        if moduli.len() > MAX_COORDS {
            return Err(Error::TooLarge(format!("{} coordinates", moduli.len())));
        }
        let char_exp = factors.iter().map(|r| r.char_exp).max().unwrap_or(1);
        Ok(Arc::new(BaseRing { p, kind: Kind::Product { factors, offsets }, moduli, char_exp }))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.moduli.len()
    }

    /// The characteristic is p^char_exp.
    pub fn char_exp(&self) -> u32 {
        self.char_exp
    }

    pub fn characteristic(&self) -> u64 {
        (self.p as u64).pow(self.char_exp)
    }

    pub fn is_char_p(&self) -> bool {
        self.char_exp == 1
    }

    pub fn is_field(&self) -> bool {
        matches!(self.kind, Kind::Prime | Kind::Galois { .. }) || matches!(self.kind, Kind::IntegersMod { a: 1 })
    }

    pub fn size(&self) -> u128 {
        self.moduli.iter().map(|&m| m as u128).product()
    }

    pub fn zero(&self) -> RingElement {
        RingElement::default()
    }

    pub fn one(&self) -> RingElement {
        let mut x = RingElement::default();
        self.write_one(&mut x.c);
        x
    }

    fn write_one(&self, out: &mut [u32]) {
        match &self.kind {
            Kind::Product { factors, offsets } => {
                for (r, &o) in factors.iter().zip(offsets) {
                    r.write_one(&mut out[o..]);
                }
            }
            _ => out[0] = 1 % self.moduli[0],
        }
    }

    pub fn from_i64(&self, k: i64) -> RingElement {
        let mut x = RingElement::default();
        self.write_int(k, &mut x.c);
        x
    }

    fn write_int(&self, k: i64, out: &mut [u32]) {
        match &self.kind {
            Kind::Product { factors, offsets } => {
                for (r, &o) in factors.iter().zip(offsets) {
                    r.write_int(k, &mut out[o..]);
                }
            }
            _ => out[0] = k.rem_euclid(self.moduli[0] as i64) as u32,
        }
    }

    /// Builds an element from (possibly unreduced) integer coordinates.
    pub fn from_coords(&self, coords: &[i64]) -> Result<RingElement> {
        if coords.len() > self.dim() {
            return Err(Error::RingMismatch(format!(
                "{} coordinates for a ring of dimension {}",
                coords.len(),
                self.dim()
            )));
        }
        let mut x = RingElement::default();
        for (i, &v) in coords.iter().enumerate() {
            x.c[i] = v.rem_euclid(self.moduli[i] as i64) as u32;
        }
        Ok(x)
    }

    pub fn coords(&self, x: &RingElement) -> Vec<u32> {
        x.c[..self.dim()].to_vec()
    }

    pub fn canon(&self, x: &RingElement) -> RingElement {
        let mut y = RingElement::default();
        for i in 0..self.dim() {
            y.c[i] = x.c[i] % self.moduli[i];
        }
        y
    }

    /// True when x is in canonical form for this ring.
    pub fn contains(&self, x: &RingElement) -> bool {
        let d = self.dim();
        x.c[..d].iter().zip(&self.moduli).all(|(v, m)| v < m) && x.c[d..].iter().all(|&v| v == 0)
    }

    pub fn is_zero(&self, x: &RingElement) -> bool {
        x.c.iter().all(|&v| v == 0)
    }

    pub fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let mut r = RingElement::default();
        for i in 0..self.dim() {
            let m = self.moduli[i];
            let s = a.c[i] + b.c[i];
            r.c[i] = if s >= m { s - m } else { s };
        }
        r
    }

    pub fn sub(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let mut r = RingElement::default();
        for i in 0..self.dim() {
            let m = self.moduli[i];
            r.c[i] = if a.c[i] >= b.c[i] { a.c[i] - b.c[i] } else { a.c[i] + m - b.c[i] };
        }
        r
    }

    pub fn neg(&self, a: &RingElement) -> RingElement {
        self.sub(&RingElement::default(), a)
    }

    pub fn mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let mut r = RingElement::default();
        self.mul_into(&a.c, &b.c, &mut r.c);
        r
    }

    fn mul_into(&self, a: &[u32], b: &[u32], out: &mut [u32]) {
        match &self.kind {
            Kind::Prime | Kind::IntegersMod { .. } => {
                out[0] = ((a[0] as u64 * b[0] as u64) % self.moduli[0] as u64) as u32;
            }
            Kind::Galois { f, modulus } => {
                let f = *f as usize;
                let p = self.p as u64;
                let mut prod = [0u64; 2 * MAX_COORDS];
                for i in 0..f {
                    if a[i] == 0 {
                        continue;
                    }
                    for j in 0..f {
                        prod[i + j] += a[i] as u64 * b[j] as u64;
                    }
                }
                for k in (f..2 * f - 1).rev() {
                    let c = prod[k] % p;
                    if c != 0 {
                        for i in 0..f {
                            prod[k - f + i] += (p - c) * modulus[i] as u64;
                        }
                    }
                }
                for i in 0..f {
                    out[i] = (prod[i] % p) as u32;
                }
            }
            Kind::Truncated { base, table, .. } => {
                let bd = base.dim();
                let nm = table.len();
                for v in out[..bd * nm].iter_mut() {
                    *v = 0;
                }
                let mut tmp = [0u32; MAX_COORDS];
                for i in 0..nm {
                    let ai = &a[i * bd..(i + 1) * bd];
                    if ai.iter().all(|&v| v == 0) {
                        continue;
                    }
                    for j in 0..nm {
                        if let Some(k) = table[i][j] {
                            let bj = &b[j * bd..(j + 1) * bd];
                            base.mul_into(ai, bj, &mut tmp);
                            let k = k as usize;
                            for t in 0..bd {
                                let m = base.moduli[t];
                                let s = out[k * bd + t] + tmp[t];
                                out[k * bd + t] = if s >= m { s - m } else { s };
                            }
                        }
                    }
                }
            }
            Kind::Product { factors, offsets } => {
                for (r, &o) in factors.iter().zip(offsets) {
                    r.mul_into(&a[o..], &b[o..], &mut out[o..]);
                }
            }
        }
    }

    pub fn pow(&self, a: &RingElement, mut e: u64) -> RingElement {
        let mut r = self.one();
        let mut b = *a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        r
    }

    /// k·x for an integer k.
    pub fn scale(&self, x: &RingElement, k: i64) -> RingElement {
        self.mul(&self.from_i64(k), x)
    }

    pub fn inv(&self, a: &RingElement) -> Option<RingElement> {
        match &self.kind {
            Kind::Prime | Kind::IntegersMod { .. } => {
                let m = self.moduli[0] as u64;
                mod_inv(a.c[0] as u64, m).map(|v| {
                    let mut r = RingElement::default();
                    r.c[0] = v as u32;
                    r
                })
            }
            Kind::Galois { .. } => {
                if self.is_zero(a) {
                    None
                } else {
                    Some(self.pow(a, self.size() as u64 - 2))
                }
            }
            Kind::Truncated { base, .. } => {
                let bd = base.dim();
                let mut c0 = RingElement::default();
                c0.c[..bd].copy_from_slice(&a.c[..bd]);
                let c0inv = base.inv(&c0)?;
                let mut y = RingElement::default();
                y.c[..bd].copy_from_slice(&c0inv.c[..bd]);
                let two = self.from_i64(2);
                let one = self.one();
                for _ in 0..64 {
                    let xy = self.mul(a, &y);
                    if xy == one {
                        return Some(y);
                    }
                    y = self.mul(&y, &self.sub(&two, &xy));
                }
                None
            }
            Kind::Product { factors, offsets } => {
                let mut r = RingElement::default();
                for (f, &o) in factors.iter().zip(offsets) {
                    let mut part = RingElement::default();
                    part.c[..f.dim()].copy_from_slice(&a.c[o..o + f.dim()]);
                    let inv = f.inv(&part)?;
                    r.c[o..o + f.dim()].copy_from_slice(&inv.c[..f.dim()]);
                }
                Some(r)
            }
        }
    }

    pub fn is_unit(&self, a: &RingElement) -> bool {
        self.inv(a).is_some()
    }

    pub fn random<G: Rng + ?Sized>(&self, rng: &mut G) -> RingElement {
        let mut x = RingElement::default();
        for i in 0..self.dim() {
            x.c[i] = rng.gen_range(0..self.moduli[i]);
        }
        x
    }

    /// All elements in increasing coordinate order (last coordinate slowest).
    pub fn elements(&self) -> impl Iterator<Item = RingElement> + '_ {
        let total = self.size();
        (0..total).map(move |mut k| {
            let mut x = RingElement::default();
            for i in 0..self.dim() {
                let m = self.moduli[i] as u128;
                x.c[i] = (k % m) as u32;
                k /= m;
            }
            x
        })
    }

    pub fn units(&self) -> Vec<RingElement> {
        self.elements().filter(|x| self.is_unit(x)).collect()
    }

    /// The residue field of a local ring; None for products.
    pub fn residue_field(self: &Arc<Self>) -> Option<Ring> {
        match &self.kind {
            Kind::Prime | Kind::Galois { .. } => Some(self.clone()),
            Kind::IntegersMod { .. } => BaseRing::prime(self.p).ok(),
            Kind::Truncated { base, .. } => base.residue_field(),
            Kind::Product { .. } => None,
        }
    }

    /// Image in the residue field (identity on fields).
    pub fn to_residue(&self, x: &RingElement) -> Result<RingElement> {
        match &self.kind {
            Kind::Prime | Kind::Galois { .. } => Ok(*x),
            Kind::IntegersMod { .. } => {
                let mut r = RingElement::default();
                r.c[0] = x.c[0] % self.p;
                Ok(r)
            }
            Kind::Truncated { base, .. } => {
                let mut c0 = RingElement::default();
                c0.c[..base.dim()].copy_from_slice(&x.c[..base.dim()]);
                base.to_residue(&c0)
            }
            Kind::Product { .. } => Err(Error::RingMismatch("product rings are not local".into())),
        }
    }

    pub fn in_max_ideal(&self, x: &RingElement) -> bool {
        self.to_residue(x).map(|r| r.c.iter().all(|&v| v == 0)).unwrap_or(false)
    }

    /// A ring section of the residue map, available in characteristic p.
    pub fn section(&self, k: &RingElement) -> Result<RingElement> {
        match &self.kind {
            Kind::Prime | Kind::Galois { .. } => Ok(*k),
            Kind::IntegersMod { a: 1 } => Ok(*k),
            Kind::IntegersMod { .. } => {
                Err(Error::NoSection(format!("Z/{} has no ring section of its residue field", self.moduli[0])))
            }
            Kind::Truncated { base, .. } => base.section(k),
            Kind::Product { .. } => Err(Error::NoSection("product rings are not local".into())),
        }
    }

    /// x^p; a ring endomorphism when the characteristic is p.
    pub fn frob(&self, x: &RingElement) -> RingElement {
        self.pow(x, self.p as u64)
    }

    /// Inverse of x ↦ x^p on a finite field.
    pub fn frob_inv(&self, x: &RingElement) -> Result<RingElement> {
        match &self.kind {
            Kind::Prime => Ok(*x),
            Kind::IntegersMod { a: 1 } => Ok(*x),
            Kind::Galois { f, .. } => Ok(self.pow(x, (self.p as u64).pow(f - 1))),
            _ => Err(Error::RingMismatch("Frobenius is only inverted on finite fields".into())),
        }
    }

    /// Truncated-ring structure: (base, vars, ell, monomials).
    pub fn truncated_parts(&self) -> Option<(&Ring, u32, u32, &[Vec<u32>])> {
        match &self.kind {
            Kind::Truncated { base, vars, ell, monomials, .. } => Some((base, *vars, *ell, monomials)),
            _ => None,
        }
    }

    /// The coefficient of monomial index k of a truncated-ring element.
    pub fn coefficient(&self, x: &RingElement, k: usize) -> RingElement {
        let (base, ..) = self.truncated_parts().expect("truncated ring");
        let bd = base.dim();
        let mut r = RingElement::default();
        r.c[..bd].copy_from_slice(&x.c[k * bd..(k + 1) * bd]);
        r
    }

    /// Σ coeffs[k] · monomial_k in a truncated ring.
    pub fn from_coefficients(&self, coeffs: &[RingElement]) -> RingElement {
        let (base, ..) = self.truncated_parts().expect("truncated ring");
        let bd = base.dim();
        let mut r = RingElement::default();
        for (k, c) in coeffs.iter().enumerate() {
            r.c[k * bd..(k + 1) * bd].copy_from_slice(&c.c[..bd]);
        }
        r
    }

    /// The variable t_i (0-based) of a truncated ring.
    pub fn variable(&self, i: usize) -> RingElement {
        let (base, vars, _, monomials) = self.truncated_parts().expect("truncated ring");
        let mut e = vec![0u32; vars as usize];
        e[i] = 1;
        match monomials.iter().position(|m| *m == e) {
            Some(k) => {
                let mut coeffs = vec![RingElement::default(); k + 1];
                coeffs[k] = base.one();
                self.from_coefficients(&coeffs)
            }
            None => RingElement::default(),
        }
    }

    pub fn embed_constant(&self, c: &RingElement) -> RingElement {
        self.from_coefficients(&[*c])
    }

    pub fn fmt_elem(&self, x: &RingElement) -> String {
        format!("{:?}", self.coords(x))
    }

    pub fn descriptor(&self) -> RingDescriptor {
        let mut d = RingDescriptor::prime(self.p);
        match &self.kind {
            Kind::Prime => {}
            Kind::IntegersMod { a } => {
                d.kind = "integers_mod".into();
                d.a = Some(*a);
            }
            Kind::Galois { f, modulus } => {
                d.kind = "galois".into();
                d.f = Some(*f);
                d.modulus = Some(modulus.clone());
            }
            Kind::Truncated { base, vars, ell, .. } => {
                d.kind = "truncated".into();
                d.ell = Some(*ell);
                if *vars != 1 {
                    d.vars = Some(*vars);
                }
                d.base = Some(Box::new(base.descriptor()));
            }
            Kind::Product { factors, .. } => {
                d.kind = "product".into();
                d.factors = Some(factors.iter().map(|r| r.descriptor()).collect());
            }
        }
        d
    }

    pub fn label(&self) -> String {
        match &self.kind {
            Kind::Prime => format!("F{}", self.p),
            Kind::IntegersMod { .. } => format!("Z/{}", self.moduli[0]),
            Kind::Galois { .. } => format!("F{}", self.size()),
            Kind::Truncated { base, vars, ell, .. } => {
                if *vars == 1 {
                    format!("{}[t]/t^{}", base.label(), ell)
                } else {
                    format!("{}[t1..t{}]/m^{}", base.label(), vars, ell)
                }
            }
            Kind::Product { factors, .. } => factors.iter().map(|r| r.label()).collect::<Vec<_>>().join(" x "),
        }
    }
}

fn exponent_vectors(vars: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == vars {
        let mut v = prefix.clone();
        v.push(deg);
        out.push(v);
        return;
    }
    for e in 0..=deg {
        prefix.push(e);
        exponent_vectors(vars, deg - e, prefix, out);
        prefix.pop();
    }
}

/// Constructs a ring from its JSON-facing descriptor.
pub fn make_ring(d: &RingDescriptor) -> Result<Ring> {
    match d.kind.as_str() {
        "prime" => BaseRing::prime(d.p),
        "integers_mod" => BaseRing::integers_mod(d.p, d.a.unwrap_or(1)),
        "galois" => match &d.modulus {
            Some(m) => {
                let r = BaseRing::galois_with_modulus(d.p, m.clone())?;
                match d.f {
                    Some(f) if f as usize != r.dim() => {
                        Err(Error::BadDescriptor(format!("f = {f} but the modulus has degree {}", r.dim())))
                    }
                    _ => Ok(r),
                }
            }
            None => BaseRing::galois(d.p, d.f.unwrap_or(1)),
        },
        "truncated" => {
            let base = match &d.base {
                Some(b) => make_ring(b)?,
                None => BaseRing::prime(d.p)?,
            };
            if base.p != d.p {
                return Err(Error::RingMismatch("base ring over a different prime".into()));
            }
            BaseRing::truncated_multi(base, d.vars.unwrap_or(1), d.ell.unwrap_or(0))
        }
        "product" => {
            let factors = d
                .factors
                .as_ref()
                .ok_or_else(|| Error::BadDescriptor("product without factors".into()))?
                .iter()
                .map(make_ring)
                .collect::<Result<Vec<_>>>()?;
            BaseRing::product(factors)
        }
        other => Err(Error::BadDescriptor(format!("unknown ring kind {other:?}"))),
    }
}

/// A homomorphism between base rings.
#[derive(Debug, Clone)]
pub enum RingHom {
    Identity(Ring),
    /// Z/p^a → Z/p^b (b ≤ a) or → F_p.
    Reduction {
        source: Ring,
        target: Ring,
    },
    /// x ↦ x^p on a ring of characteristic p.
    Frobenius(Ring),
    /// The structure map from a prime-like ring: k ↦ k·1.
    Structure {
        source: Ring,
        target: Ring,
    },
    /// base → base[t..]/m^ell.
    ConstantInclusion {
        source: Ring,
        target: Ring,
    },
    /// Σ c_m t^m ↦ Σ coeff(c_m) · Π images_i^{m_i}.
    Substitution {
        source: Ring,
        target: Ring,
        coeff: Box<RingHom>,
        images: Vec<RingElement>,
    },
    Projection {
        source: Ring,
        index: usize,
    },
    Compose(Vec<RingHom>),
}

impl RingHom {
    pub fn source(&self) -> Ring {
        match self {
            RingHom::Identity(r) | RingHom::Frobenius(r) => r.clone(),
            RingHom::Reduction { source, .. }
            | RingHom::Structure { source, .. }
            | RingHom::ConstantInclusion { source, .. }
            | RingHom::Substitution { source, .. }
            | RingHom::Projection { source, .. } => source.clone(),
            RingHom::Compose(hs) => hs[0].source(),
        }
    }

    pub fn target(&self) -> Ring {
        match self {
            RingHom::Identity(r) | RingHom::Frobenius(r) => r.clone(),
            RingHom::Reduction { target, .. }
            | RingHom::Structure { target, .. }
            | RingHom::ConstantInclusion { target, .. }
            | RingHom::Substitution { target, .. } => target.clone(),
            RingHom::Projection { source, index } => match &source.kind {
                Kind::Product { factors, .. } => factors[*index].clone(),
                _ => unreachable!("validated at construction"),
            },
            RingHom::Compose(hs) => hs[hs.len() - 1].target(),
        }
    }

    pub fn reduction(source: Ring, target: Ring) -> Result<Self> {
        let ok = source.p == target.p
            && matches!(source.kind, Kind::IntegersMod { .. } | Kind::Prime)
            && matches!(target.kind, Kind::IntegersMod { .. } | Kind::Prime)
            && target.char_exp <= source.char_exp;
        if !ok {
            return Err(Error::RingMismatch(format!("no reduction {} -> {}", source.label(), target.label())));
        }
        Ok(RingHom::Reduction { source, target })
    }

    pub fn frobenius(ring: Ring) -> Result<Self> {
        if !ring.is_char_p() {
            return Err(Error::RingMismatch(format!("x -> x^p is not additive on {}", ring.label())));
        }
        Ok(RingHom::Frobenius(ring))
    }

    pub fn structure(source: Ring, target: Ring) -> Result<Self> {
        let ok = source.p == target.p
            && matches!(source.kind, Kind::IntegersMod { .. } | Kind::Prime)
            && target.char_exp <= source.char_exp;
        if !ok {
            return Err(Error::RingMismatch(format!("no structure map {} -> {}", source.label(), target.label())));
        }
        Ok(RingHom::Structure { source, target })
    }

    pub fn constant_inclusion(source: Ring, target: Ring) -> Result<Self> {
        match target.truncated_parts() {
            Some((base, ..)) if **base == *source => Ok(RingHom::ConstantInclusion { source, target }),
            _ => {
                Err(Error::RingMismatch(format!("{} is not a truncated ring over {}", target.label(), source.label())))
            }
        }
    }

    /// t_i ↦ images[i], coefficients through `coeff`. Images must be nilpotent
    /// of high enough order for the map to be well defined; this is checked.
    pub fn substitution(source: Ring, coeff: RingHom, images: Vec<RingElement>) -> Result<Self> {
        let (base, vars, ell, _) = source
            .truncated_parts()
            .ok_or_else(|| Error::RingMismatch(format!("{} is not truncated", source.label())))?;
        if **base != *coeff.source() || images.len() != vars as usize {
            return Err(Error::RingMismatch("substitution data does not match the source".into()));
        }
        let target = coeff.target();
        if images.iter().any(|x| !target.contains(x)) {
            return Err(Error::RingMismatch("substitution image outside the target".into()));
        }
        // Every monomial of degree ell in the images must vanish.
        let mut layer = Vec::new();
        exponent_vectors(vars as usize, ell, &mut vec![], &mut layer);
        for e in layer {
            let mut v = target.one();
            for (x, &k) in images.iter().zip(&e) {
                v = target.mul(&v, &target.pow(x, k as u64));
            }
            if !target.is_zero(&v) {
                return Err(Error::RingMismatch("substitution does not respect the truncation".into()));
            }
        }
        Ok(RingHom::Substitution { source, target, coeff: Box::new(coeff), images })
    }

    /// base[t..]/m^ell → base, t ↦ 0.
    pub fn quotient_t(source: Ring) -> Result<Self> {
        let (base, vars, ..) = source
            .truncated_parts()
            .ok_or_else(|| Error::RingMismatch(format!("{} is not truncated", source.label())))?;
        let base = base.clone();
        let images = vec![base.zero(); vars as usize];
        Self::substitution(source, RingHom::Identity(base), images)
    }

    /// base[t..]/m^ell → base[t..]/m^ell' for ell' ≤ ell, t ↦ t.
    pub fn truncate_order(source: Ring, target: Ring) -> Result<Self> {
        let (base, vars, ..) = source
            .truncated_parts()
            .ok_or_else(|| Error::RingMismatch(format!("{} is not truncated", source.label())))?;
        let images = (0..vars as usize).map(|i| target.variable(i)).collect();
        let coeff = RingHom::constant_inclusion(base.clone(), target)?;
        Self::substitution(source, coeff, images)
    }

    pub fn projection(source: Ring, index: usize) -> Result<Self> {
        match &source.kind {
            Kind::Product { factors, .. } if index < factors.len() => Ok(RingHom::Projection { source, index }),
            _ => Err(Error::RingMismatch("not a product factor".into())),
        }
    }

    pub fn compose(homs: Vec<RingHom>) -> Result<Self> {
        if homs.is_empty() {
            return Err(Error::RingMismatch("empty composition".into()));
        }
        for w in homs.windows(2) {
            if *w[0].target() != *w[1].source() {
                return Err(Error::RingMismatch("composition endpoints differ".into()));
            }
        }
        Ok(RingHom::Compose(homs))
    }

    pub fn apply(&self, x: &RingElement) -> Result<RingElement> {
        let src = self.source();
        if !src.contains(x) {
            return Err(Error::RingMismatch(format!("{x:?} is not an element of {}", src.label())));
        }
        Ok(self.apply_unchecked(x))
    }

    fn apply_unchecked(&self, x: &RingElement) -> RingElement {
        match self {
            RingHom::Identity(_) => *x,
            RingHom::Reduction { target, .. } => target.canon(x),
            RingHom::Frobenius(r) => r.frob(x),
            RingHom::Structure { target, .. } => target.from_i64(x.c[0] as i64),
            RingHom::ConstantInclusion { target, .. } => target.embed_constant(x),
            RingHom::Substitution { source, target, coeff, images } => {
                let (_, _, _, monomials) = source.truncated_parts().expect("truncated");
                let mut acc = target.zero();
                for (k, m) in monomials.iter().enumerate() {
                    let c = source.coefficient(x, k);
                    if c.c.iter().all(|&v| v == 0) {
                        continue;
                    }
                    let mut term = coeff.apply_unchecked(&c);
                    for (img, &e) in images.iter().zip(m) {
                        if e > 0 {
                            term = target.mul(&term, &target.pow(img, e as u64));
                        }
                    }
                    acc = target.add(&acc, &term);
                }
                acc
            }
            RingHom::Projection { source, index } => match &source.kind {
                Kind::Product { factors, offsets } => {
                    let o = offsets[*index];
                    let d = factors[*index].dim();
                    let mut r = RingElement::default();
                    r.c[..d].copy_from_slice(&x.c[o..o + d]);
                    r
                }
                _ => unreachable!(),
            },
            RingHom::Compose(hs) => hs.iter().fold(*x, |acc, h| h.apply_unchecked(&acc)),
        }
    }

    /// Sampled check of the homomorphism laws; returns violation messages.
    pub fn check<G: Rng + ?Sized>(&self, samples: usize, rng: &mut G) -> Vec<String> {
        let (s, t) = (self.source(), self.target());
        let mut bad = Vec::new();
        if self.apply_unchecked(&s.zero()) != t.zero() {
            bad.push("h(0) != 0".to_string());
        }
        if self.apply_unchecked(&s.one()) != t.one() {
            bad.push("h(1) != 1".to_string());
        }
        for _ in 0..samples {
            let (a, b) = (s.random(rng), s.random(rng));
            let (ha, hb) = (self.apply_unchecked(&a), self.apply_unchecked(&b));
            if self.apply_unchecked(&s.add(&a, &b)) != t.add(&ha, &hb) {
                bad.push(format!("h(a+b) != h(a)+h(b) at {a:?}, {b:?}"));
            }
            if self.apply_unchecked(&s.mul(&a, &b)) != t.mul(&ha, &hb) {
                bad.push(format!("h(ab) != h(a)h(b) at {a:?}, {b:?}"));
            }
        }
        bad
    }
}

/// Minimal ring interface used by the axiom checker.
pub trait RingOps {
    type Elem: Clone + PartialEq + fmt::Debug;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn sample(&self, rng: &mut dyn RngCore) -> Self::Elem;
}

impl RingOps for BaseRing {
    type Elem = RingElement;
    fn zero(&self) -> RingElement {
        BaseRing::zero(self)
    }
    fn one(&self) -> RingElement {
        BaseRing::one(self)
    }
    fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        BaseRing::add(self, a, b)
    }
    fn mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        BaseRing::mul(self, a, b)
    }
    fn neg(&self, a: &RingElement) -> RingElement {
        BaseRing::neg(self, a)
    }
    fn sample(&self, rng: &mut dyn RngCore) -> RingElement {
        self.random(rng)
    }
}

/// A ring given by explicit addition and multiplication tables.
#[derive(Debug, Clone)]
pub struct TableRing {
    pub add: Vec<Vec<usize>>,
    pub mul: Vec<Vec<usize>>,
    pub neg: Vec<usize>,
    pub zero: usize,
    pub one: usize,
}

impl TableRing {
    pub fn from_ring(r: &BaseRing) -> Result<Self> {
        if r.size() > 4096 {
            return Err(Error::TooLarge(format!("{} elements", r.size())));
        }
        let elems: Vec<RingElement> = r.elements().collect();
        let index = |x: &RingElement| elems.binary_search_by(|e| cmp_rev(e, x)).expect("element");
        let add = elems.iter().map(|a| elems.iter().map(|b| index(&r.add(a, b))).collect()).collect();
        let mul = elems.iter().map(|a| elems.iter().map(|b| index(&r.mul(a, b))).collect()).collect();
        let neg = elems.iter().map(|a| index(&r.neg(a))).collect();
        Ok(TableRing { add, mul, neg, zero: index(&r.zero()), one: index(&r.one()) })
    }

    pub fn size(&self) -> usize {
        self.add.len()
    }
}

// Order matching BaseRing::elements (last coordinate most significant).
fn cmp_rev(a: &RingElement, b: &RingElement) -> std::cmp::Ordering {
    a.c.iter().rev().cmp(b.c.iter().rev())
}

impl RingOps for TableRing {
    type Elem = usize;
    fn zero(&self) -> usize {
        self.zero
    }
    fn one(&self) -> usize {
        self.one
    }
    fn add(&self, a: &usize, b: &usize) -> usize {
        self.add[*a][*b]
    }
    fn mul(&self, a: &usize, b: &usize) -> usize {
        self.mul[*a][*b]
    }
    fn neg(&self, a: &usize) -> usize {
        self.neg[*a]
    }
    fn sample(&self, rng: &mut dyn RngCore) -> usize {
        rng.gen_range(0..self.size())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomViolation {
    pub axiom: &'static str,
    pub witness: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the commutative ring axioms on `samples` random triples.
pub fn ring_axiom_check<R: RingOps + ?Sized>(ring: &R, samples: usize, rng: &mut dyn RngCore) -> AxiomReport {
    let mut violations = Vec::new();
    let mut flag = |axiom: &'static str, w: &[&R::Elem]| {
        violations.push(AxiomViolation { axiom, witness: w.iter().map(|x| format!("{x:?}")).collect() })
    };
    let (zero, one) = (ring.zero(), ring.one());
    for _ in 0..samples {
        let a = ring.sample(rng);
        let b = ring.sample(rng);
        let c = ring.sample(rng);
        let ab = ring.add(&a, &b);
        if ring.add(&ab, &c) != ring.add(&a, &ring.add(&b, &c)) {
            flag("additive associativity", &[&a, &b, &c]);
        }
        if ab != ring.add(&b, &a) {
            flag("additive commutativity", &[&a, &b]);
        }
        let m = ring.mul(&a, &b);
        if ring.mul(&m, &c) != ring.mul(&a, &ring.mul(&b, &c)) {
            flag("multiplicative associativity", &[&a, &b, &c]);
        }
        if m != ring.mul(&b, &a) {
            flag("multiplicative commutativity", &[&a, &b]);
        }
        if ring.mul(&a, &ring.add(&b, &c)) != ring.add(&m, &ring.mul(&a, &c)) {
            flag("distributivity", &[&a, &b, &c]);
        }
        if ring.add(&a, &zero) != a {
            flag("additive identity", &[&a]);
        }
        if ring.add(&a, &ring.neg(&a)) != zero {
            flag("additive inverse", &[&a]);
        }
        if ring.mul(&a, &one) != a {
            flag("multiplicative identity", &[&a]);
        }
    }
    AxiomReport { samples, violations }
}
