//! Truncated p-typical Witt vectors over a finite base ring.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{ReducedPoly, ReducedTables};
use crate::ring::{Ring, RingDescriptor, RingElement};

pub const MAX_LEN: usize = 6;

/// Witt coordinates (a_0, ..., a_{n-1}); slots past the length are zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct WittVector {
    c: [RingElement; MAX_LEN],
}

impl WittVector {
    pub fn comp(&self, i: usize) -> &RingElement {
        &self.c[i]
    }

    /// (r, 0, 0, ...) in any length.
    pub fn lift(r: RingElement) -> Self {
        let mut x = WittVector::default();
        x.c[0] = r;
        x
    }
}

impl fmt::Debug for WittVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.c.iter().rposition(|v| *v != RingElement::default()).map_or(1, |i| i + 1);
        f.debug_list().entries(&self.c[..last]).finish()
    }
}

/// Coefficient (None for 1) and (variable, exponent) factors.
type EvalTerm = (Option<RingElement>, Vec<(u8, u32)>);

#[derive(Debug)]
struct EvalPoly {
    terms: Vec<EvalTerm>,
}

#[derive(Debug)]
struct Prepared {
    polys: Vec<EvalPoly>,
    max_exp: Vec<u32>,
}

impl Prepared {
    fn new(base: &Ring, polys: &[ReducedPoly], nvars: usize) -> Self {
        let mut max_exp = vec![0u32; nvars];
        let polys = polys
            .iter()
            .map(|q| {
                for (v, m) in q.max_exponents(nvars).into_iter().enumerate() {
                    max_exp[v] = max_exp[v].max(m);
                }
                EvalPoly {
                    terms: q
                        .terms
                        .iter()
                        .map(|(c, vars)| {
                            let coeff = if *c == 1 { None } else { Some(base.from_i64(*c as i64)) };
                            (coeff, vars.clone())
                        })
                        .collect(),
                }
            })
            .collect();
        Prepared { polys, max_exp }
    }

    fn powers(&self, base: &Ring, vals: &[RingElement]) -> Vec<Vec<RingElement>> {
        vals.iter()
            .zip(&self.max_exp)
            .map(|(x, &m)| {
                let mut pw = Vec::with_capacity(m as usize + 1);
                pw.push(base.one());
                for k in 1..=m as usize {
                    let next = if k == 1 { *x } else { base.mul(&pw[k - 1], x) };
                    pw.push(next);
                }
                pw
            })
            .collect()
    }

    fn eval(&self, base: &Ring, i: usize, pw: &[Vec<RingElement>]) -> RingElement {
        let mut acc = base.zero();
        for (coeff, vars) in &self.polys[i].terms {
            let mut t = match coeff {
                Some(c) => *c,
                None => base.one(),
            };
            for &(v, e) in vars {
                t = base.mul(&t, &pw[v as usize][e as usize]);
            }
            acc = base.add(&acc, &t);
        }
        acc
    }
}

#[derive(Debug)]
struct Inner {
    base: Ring,
    n: usize,
    sum: Prepared,
    prod: Prepared,
    frob: Prepared,
}

/// W_n(R). Cheap to clone.
#[derive(Clone)]
pub struct WittRing {
    inner: Arc<Inner>,
}

impl fmt::Debug for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W_{}({})", self.inner.n, self.inner.base.label())
    }
}

impl PartialEq for WittRing {
    fn eq(&self, other: &Self) -> bool {
        self.inner.n == other.inner.n && self.inner.base == other.inner.base
    }
}

impl Eq for WittRing {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WittJson {
    pub ring: RingDescriptor,
    pub comps: Vec<Vec<u32>>,
}

impl WittRing {
    pub fn new(base: Ring, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroPrecision("Witt length must be at least 1"));
        }
        if n > MAX_LEN {
            return Err(Error::TooLarge(format!("Witt length {n} exceeds {MAX_LEN}")));
        }
        let tables = ReducedTables::cached(base.p(), n, base.char_exp())?;
        let sum = Prepared::new(&base, &tables.sum, 2 * n);
        let prod = Prepared::new(&base, &tables.prod, 2 * n);
        let frob = if base.is_char_p() { Prepared::new(&base, &[], 0) } else { Prepared::new(&base, &tables.frob, n) };
        Ok(WittRing { inner: Arc::new(Inner { base, n, sum, prod, frob }) })
    }

    pub fn base(&self) -> &Ring {
        &self.inner.base
    }

    pub fn len(&self) -> usize {
        self.inner.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn p(&self) -> u32 {
        self.inner.base.p()
    }

    /// The same base with a different length.
    pub fn with_len(&self, n: usize) -> Result<WittRing> {
        WittRing::new(self.inner.base.clone(), n)
    }

    pub fn size(&self) -> u128 {
        self.inner.base.size().pow(self.inner.n as u32)
    }

    pub fn zero(&self) -> WittVector {
        WittVector::default()
    }

    pub fn one(&self) -> WittVector {
        self.teichmuller(&self.inner.base.one())
    }

    pub fn teichmuller(&self, r: &RingElement) -> WittVector {
        let mut x = WittVector::default();
        x.c[0] = *r;
        x
    }

    pub fn from_comps(&self, comps: &[RingElement]) -> Result<WittVector> {
        if comps.len() != self.inner.n {
            return Err(Error::RingMismatch(format!("{} components for length {}", comps.len(), self.inner.n)));
        }
        let mut x = WittVector::default();
        for (i, c) in comps.iter().enumerate() {
            if !self.inner.base.contains(c) {
                return Err(Error::RingMismatch(format!("{c:?} not in {}", self.inner.base.label())));
            }
            x.c[i] = *c;
        }
        Ok(x)
    }

    pub fn from_coords(&self, comps: &[Vec<i64>]) -> Result<WittVector> {
        let elems = comps.iter().map(|c| self.inner.base.from_coords(c)).collect::<Result<Vec<_>>>()?;
        self.from_comps(&elems)
    }

    pub fn comps<'a>(&self, x: &'a WittVector) -> &'a [RingElement] {
        &x.c[..self.inner.n]
    }

    pub fn contains(&self, x: &WittVector) -> bool {
        let n = self.inner.n;
        x.c[..n].iter().all(|c| self.inner.base.contains(c)) && x.c[n..].iter().all(|c| *c == RingElement::default())
    }

    pub fn check(&self, x: &WittVector) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::RingMismatch(format!("{x:?} is not in {self:?}")))
        }
    }

    pub fn is_zero(&self, x: &WittVector) -> bool {
        *x == WittVector::default()
    }

    fn interleave(&self, x: &WittVector, y: &WittVector) -> Vec<RingElement> {
        let n = self.inner.n;
        let mut v = Vec::with_capacity(2 * n);
        for i in 0..n {
            v.push(x.c[i]);
            v.push(y.c[i]);
        }
        v
    }

    pub fn add(&self, x: &WittVector, y: &WittVector) -> WittVector {
        let base = &self.inner.base;
        let n = self.inner.n;
        if n == 1 || self.is_zero(y) {
            let mut r = *x;
            if n == 1 || !self.is_zero(y) {
                r.c[0] = base.add(&x.c[0], &y.c[0]);
            }
            return r;
        }
        if self.is_zero(x) {
            return *y;
        }
        let pw = self.inner.sum.powers(base, &self.interleave(x, y));
        let mut r = WittVector::default();
        for i in 0..n {
            r.c[i] = self.inner.sum.eval(base, i, &pw);
        }
        r
    }

    /// Componentwise negation, valid since p is odd.
    pub fn neg(&self, x: &WittVector) -> WittVector {
        let mut r = WittVector::default();
        for i in 0..self.inner.n {
            r.c[i] = self.inner.base.neg(&x.c[i]);
        }
        r
    }

    pub fn sub(&self, x: &WittVector, y: &WittVector) -> WittVector {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, x: &WittVector, y: &WittVector) -> WittVector {
        let base = &self.inner.base;
        let n = self.inner.n;
        if self.is_zero(x) || self.is_zero(y) {
            return WittVector::default();
        }
        if n == 1 {
            return self.teichmuller(&base.mul(&x.c[0], &y.c[0]));
        }
        let one = self.one();
        if *x == one {
            return *y;
        }
        if *y == one {
            return *x;
        }
        // [r]·y = (r y_0, r^p y_1, r^{p^2} y_2, ...)
        let teich = |t: &WittVector, other: &WittVector| -> Option<WittVector> {
            if t.c[1..n].iter().all(|c| *c == RingElement::default()) {
                let mut r = WittVector::default();
                let mut rp = t.c[0];
                for i in 0..n {
                    r.c[i] = base.mul(&rp, &other.c[i]);
                    rp = base.frob(&rp);
                }
                Some(r)
            } else {
                None
            }
        };
        if let Some(r) = teich(x, y) {
            return r;
        }
        if let Some(r) = teich(y, x) {
            return r;
        }
        let pw = self.inner.prod.powers(base, &self.interleave(x, y));
        let mut r = WittVector::default();
        for i in 0..n {
            r.c[i] = self.inner.prod.eval(base, i, &pw);
        }
        r
    }

    pub fn pow(&self, x: &WittVector, mut e: u64) -> WittVector {
        let mut r = self.one();
        let mut b = *x;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        r
    }

    /// The image of the integer k.
    pub fn from_int(&self, k: i64) -> WittVector {
        let mut r = self.zero();
        let mut b = self.one();
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                r = self.add(&r, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.add(&b, &b);
            }
        }
        if k < 0 {
            self.neg(&r)
        } else {
            r
        }
    }

    /// p·x. In characteristic p this is V(σ x).
    pub fn times_p(&self, x: &WittVector) -> WittVector {
        if self.inner.base.is_char_p() {
            let base = &self.inner.base;
            let mut r = WittVector::default();
            for i in 1..self.inner.n {
                r.c[i] = base.frob(&x.c[i - 1]);
            }
            r
        } else {
            self.mul(&self.from_int(self.p() as i64), x)
        }
    }

    pub fn is_unit(&self, x: &WittVector) -> bool {
        self.inner.base.is_unit(&x.c[0])
    }

    pub fn inv(&self, x: &WittVector) -> Option<WittVector> {
        let t = self.inner.base.inv(&x.c[0])?;
        let mut y = self.teichmuller(&t);
        let one = self.one();
        let two = self.from_int(2);
        for _ in 0..64 {
            let xy = self.mul(x, &y);
            if xy == one {
                return Some(y);
            }
            y = self.mul(&y, &self.sub(&two, &xy));
        }
        None
    }

    /// Ghost components w_i = Σ_{j≤i} p^j a_j^{p^{i-j}}.
    pub fn ghost(&self, x: &WittVector) -> Vec<RingElement> {
        let base = &self.inner.base;
        let p = self.p() as u64;
        (0..self.inner.n)
            .map(|i| {
                let mut w = base.zero();
                for j in 0..=i {
                    let t = base.pow(&x.c[j], p.pow((i - j) as u32));
                    w = base.add(&w, &base.scale(&t, (p as i64).pow(j as u32)));
                }
                w
            })
            .collect()
    }

    /// Restriction to a shorter length.
    pub fn truncate(&self, x: &WittVector, target: &WittRing) -> Result<WittVector> {
        if target.len() > self.len() || target.base() != self.base() {
            return Err(Error::LengthTooShort { needed: target.len(), have: self.len() });
        }
        let mut r = WittVector::default();
        r.c[..target.len()].copy_from_slice(&x.c[..target.len()]);
        Ok(r)
    }

    /// σ: W_m(R) → W_n(R) for n < m (self is W_m).
    pub fn frobenius(&self, x: &WittVector, target: &WittRing) -> Result<WittVector> {
        let n = target.len();
        if self.len() < n + 1 {
            return Err(Error::LengthTooShort { needed: n + 1, have: self.len() });
        }
        if target.base() != self.base() {
            return Err(Error::RingMismatch("Frobenius target over another base".into()));
        }
        Ok(self.frob_raw(x, n))
    }

    fn frob_raw(&self, x: &WittVector, n: usize) -> WittVector {
        let base = &self.inner.base;
        let mut r = WittVector::default();
        if base.is_char_p() {
            for i in 0..n {
                r.c[i] = base.frob(&x.c[i]);
            }
        } else {
            let vals: Vec<RingElement> = x.c[..self.len()].to_vec();
            let pw = self.inner.frob.powers(base, &vals);
            for i in 0..n {
                r.c[i] = self.inner.frob.eval(base, i, &pw);
            }
        }
        r
    }

    /// σ on W_n(R) itself; only defined in characteristic p.
    pub fn frob_endo(&self, x: &WittVector) -> Result<WittVector> {
        if !self.inner.base.is_char_p() {
            return Err(Error::LengthTooShort { needed: self.len() + 1, have: self.len() });
        }
        Ok(self.frob_raw(x, self.len()))
    }

    /// σ^{-1} on W_n(k) for a finite field k.
    pub fn frob_inv(&self, x: &WittVector) -> Result<WittVector> {
        let mut r = WittVector::default();
        for i in 0..self.len() {
            r.c[i] = self.inner.base.frob_inv(&x.c[i])?;
        }
        Ok(r)
    }

    /// V: W_{n-1}(R) → W_n(R) (self is the target). Excess input is dropped.
    pub fn verschiebung(&self, y: &WittVector) -> WittVector {
        let mut r = WittVector::default();
        for i in 1..self.len() {
            r.c[i] = y.c[i - 1];
        }
        r
    }

    pub fn in_augmentation(&self, x: &WittVector) -> bool {
        x.c[0] == RingElement::default()
    }

    /// σ^div(1 ⊗ V(y)) = y restricted to the target length. Self is W_m.
    pub fn divided_frobenius(&self, x: &WittVector, target: &WittRing) -> Result<WittVector> {
        if !self.in_augmentation(x) {
            return Err(Error::NotInAugmentationIdeal);
        }
        let n = target.len();
        if self.len() < n + 1 {
            return Err(Error::LengthTooShort { needed: n + 1, have: self.len() });
        }
        let mut r = WittVector::default();
        r.c[..n].copy_from_slice(&x.c[1..=n]);
        Ok(r)
    }

    /// σ^div on Σ z_k ⊗ x_k in W_n ⊗_{σ, W_m} I_m.
    pub fn divided_frobenius_tensor(
        &self,
        terms: &[(WittVector, WittVector)],
        target: &WittRing,
    ) -> Result<WittVector> {
        let mut acc = target.zero();
        for (z, x) in terms {
            let d = self.divided_frobenius(x, target)?;
            acc = target.add(&acc, &target.mul(z, &d));
        }
        Ok(acc)
    }

    pub fn random<G: Rng + ?Sized>(&self, rng: &mut G) -> WittVector {
        let mut x = WittVector::default();
        for i in 0..self.len() {
            x.c[i] = self.inner.base.random(rng);
        }
        x
    }

    pub fn random_unit<G: Rng + ?Sized>(&self, rng: &mut G) -> WittVector {
        loop {
            let x = self.random(rng);
            if self.is_unit(&x) {
                return x;
            }
        }
    }

    /// Every element, first component varying slowest.
    pub fn elements(&self) -> Vec<WittVector> {
        let elems: Vec<RingElement> = self.inner.base.elements().collect();
        let n = self.len();
        let total = elems.len().pow(n as u32);
        (0..total)
            .map(|mut k| {
                let mut x = WittVector::default();
                for i in (0..n).rev() {
                    x.c[i] = elems[k % elems.len()];
                    k /= elems.len();
                }
                x
            })
            .collect()
    }

    pub fn units(&self) -> Vec<WittVector> {
        self.elements().into_iter().filter(|x| self.is_unit(x)).collect()
    }

    /// Index of the first nonzero component; len() for zero.
    pub fn valuation(&self, x: &WittVector) -> usize {
        (0..self.len()).find(|&i| !self.inner.base.is_zero(&x.c[i])).unwrap_or(self.len())
    }

    /// Some y with p^k·y = x over a perfect field of characteristic p.
    pub fn div_p_power(&self, x: &WittVector, k: usize) -> Result<WittVector> {
        if self.valuation(x) < k {
            return Err(Error::NonUnit);
        }
        let mut shifted = WittVector::default();
        for i in k..self.len() {
            shifted.c[i - k] = x.c[i];
        }
        let mut r = shifted;
        for _ in 0..k {
            r = self.frob_inv(&r)?;
        }
        Ok(r)
    }

    /// Base change along a ring map applied componentwise.
    pub fn map(&self, x: &WittVector, f: impl Fn(&RingElement) -> Result<RingElement>) -> Result<WittVector> {
        let mut r = WittVector::default();
        for i in 0..self.len() {
            r.c[i] = f(&x.c[i])?;
        }
        Ok(r)
    }

    pub fn to_json(&self, x: &WittVector) -> WittJson {
        WittJson {
            ring: self.inner.base.descriptor(),
            comps: self.comps(x).iter().map(|c| self.inner.base.coords(c)).collect(),
        }
    }

    pub fn fmt_elem(&self, x: &WittVector) -> String {
        let parts: Vec<String> = self.comps(x).iter().map(|c| self.inner.base.fmt_elem(c)).collect();
        format!("({})", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::BaseRing;

    #[test]
    fn small_identities() {
        let f3 = BaseRing::prime(3).unwrap();
        let w = WittRing::new(f3.clone(), 2).unwrap();
        let one = w.one();
        assert_eq!(w.comps(&w.add(&one, &one)), &[f3.from_i64(2), f3.from_i64(1)]);
        assert_eq!(w.from_int(3), w.verschiebung(&one));
        let z9 = BaseRing::integers_mod(3, 2).unwrap();
        let w9 = WittRing::new(z9.clone(), 2).unwrap();
        let x = w9.from_coords(&[vec![1], vec![1]]).unwrap();
        let w1 = WittRing::new(z9.clone(), 1).unwrap();
        let fx = w9.frobenius(&x, &w1).unwrap();
        assert_eq!(w1.comps(&fx), &[z9.from_i64(4)]);
        assert_eq!(w9.ghost(&w9.verschiebung(&one)), vec![z9.zero(), z9.from_i64(3)]);
    }

    #[test]
    fn inverse() {
        let r = BaseRing::truncated(BaseRing::integers_mod(3, 2).unwrap(), 2).unwrap();
        let w = WittRing::new(r, 2).unwrap();
        for x in w.elements().into_iter().step_by(97) {
            match w.inv(&x) {
                Some(y) => assert_eq!(w.mul(&x, &y), w.one()),
                None => assert!(!w.is_unit(&x)),
            }
        }
    }
}
