//! Integral Witt structure polynomials from the ghost recursion.
//!
//! In the sum and product polynomials the variables are interleaved: a_i has
//! index 2i and b_i has index 2i+1. Frobenius polynomials only involve the a's
//! and use index i.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

const BITS: u32 = 10;
const MASK: u128 = (1 << BITS) - 1;
pub const MAX_VARS: usize = 128 / BITS as usize;

/// Largest p^{depth-1} generated; the next cases (p=3 depth 6, p=5 depth 5) do not finish in minutes.
pub const MAX_TOP_DEGREE: u64 = 125;

/// Packed exponent vector, 10 bits per variable.
pub type Monomial = u128;

pub fn unpack(m: Monomial, nvars: usize) -> Vec<u32> {
    (0..nvars).map(|i| ((m >> (BITS * i as u32)) & MASK) as u32).collect()
}

pub fn var_mono(i: usize, e: u32) -> Monomial {
    (e as u128) << (BITS * i as u32)
}

/// A sparse polynomial with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntPoly {
    pub terms: HashMap<Monomial, BigInt>,
}

impl IntPoly {
    pub fn var(i: usize) -> Self {
        let mut terms = HashMap::new();
        terms.insert(var_mono(i, 1), BigInt::one());
        IntPoly { terms }
    }

    pub fn constant(c: BigInt) -> Self {
        let mut terms = HashMap::new();
        if !c.is_zero() {
            terms.insert(0, c);
        }
        IntPoly { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_assign(&mut self, other: &IntPoly, sign: i32) {
        for (m, c) in &other.terms {
            let e = self.terms.entry(*m).or_default();
            if sign >= 0 {
                *e += c;
            } else {
                *e -= c;
            }
            if e.is_zero() {
                self.terms.remove(m);
            }
        }
    }

    pub fn scale(&self, k: &BigInt) -> IntPoly {
        if k.is_zero() {
            return IntPoly::default();
        }
        IntPoly { terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect() }
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        let mut terms: HashMap<Monomial, BigInt> = HashMap::with_capacity(big.len() * 2);
        for (m1, c1) in &small.terms {
            for (m2, c2) in &big.terms {
                *terms.entry(m1 + m2).or_default() += c1 * c2;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        IntPoly { terms }
    }

    pub fn pow(&self, mut e: u64) -> IntPoly {
        let mut r = IntPoly::constant(BigInt::one());
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        r
    }

    /// Exact division by d; fails if any coefficient is not divisible.
    pub fn div_exact(&self, d: &BigInt, name: &str) -> Result<IntPoly> {
        let mut terms = HashMap::with_capacity(self.len());
        for (m, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return Err(Error::NonIntegralDivision {
                    poly: name.to_string(),
                    coeff: c.to_string(),
                    divisor: d.to_string(),
                });
            }
            terms.insert(*m, q);
        }
        Ok(IntPoly { terms })
    }

    /// Terms sorted by packed monomial.
    pub fn sorted_terms(&self) -> Vec<(Monomial, &BigInt)> {
        let mut v: Vec<_> = self.terms.iter().map(|(m, c)| (*m, c)).collect();
        v.sort_by_key(|t| t.0);
        v
    }
}

/// S_i, P_i (sum and product) and F_i (Frobenius) for i < depth.
#[derive(Debug)]
pub struct StructurePolys {
    pub p: u32,
    pub depth: usize,
    pub sum: Vec<IntPoly>,
    pub prod: Vec<IntPoly>,
    /// F_i involves a_0..a_{i+1} (index i for a_i); present for i < depth - 1.
    pub frob: Vec<IntPoly>,
}

fn ghost_poly(p: u32, n: usize, var: impl Fn(usize) -> usize) -> IntPoly {
    let mut w = IntPoly::default();
    for i in 0..=n {
        let e = (p as u64).pow((n - i) as u32);
        let mut t = IntPoly::default();
        t.terms.insert(var_mono(var(i), e as u32), BigInt::from(p).pow(i as u32));
        w.add_assign(&t, 1);
    }
    w
}

/// Solves w_n(X) = target for X_n given X_0..X_{n-1}.
fn recurse(p: u32, n: usize, target: IntPoly, lower: &[IntPoly], name: &str) -> Result<IntPoly> {
    let mut num = target;
    for (i, xi) in lower.iter().enumerate().take(n) {
        let e = (p as u64).pow((n - i) as u32);
        let t = xi.pow(e).scale(&BigInt::from(p).pow(i as u32));
        num.add_assign(&t, -1);
    }
    num.div_exact(&BigInt::from(p).pow(n as u32), name)
}

impl StructurePolys {
    pub fn generate(p: u32, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::ZeroPrecision("depth must be at least 1"));
        }
        if 2 * depth > MAX_VARS || (p as u64).pow(depth as u32 - 1) > MAX_TOP_DEGREE {
            return Err(Error::TooLarge(format!("depth {depth} at p = {p}")));
        }
        let a = |i: usize| 2 * i;
        let b = |i: usize| 2 * i + 1;
        let mut sum = Vec::with_capacity(depth);
        let mut prod = Vec::with_capacity(depth);
        let mut frob = Vec::with_capacity(depth.saturating_sub(1));
        for n in 0..depth {
            let wa = ghost_poly(p, n, a);
            let wb = ghost_poly(p, n, b);
            let mut ws = wa.clone();
            ws.add_assign(&wb, 1);
            let s = recurse(p, n, ws, &sum, &format!("S_{n}"))?;
            sum.push(s);
            let pr = recurse(p, n, wa.mul(&wb), &prod, &format!("P_{n}"))?;
            prod.push(pr);
            if n + 1 < depth {
                let f = recurse(p, n, ghost_poly(p, n + 1, |i| i), &frob, &format!("F_{n}"))?;
                frob.push(f);
            }
        }
        Ok(StructurePolys { p, depth, sum, prod, frob })
    }

    /// Shared, lazily generated tables.
    pub fn cached(p: u32, depth: usize) -> Result<Arc<Self>> {
        type Cache = Mutex<HashMap<(u32, usize), Arc<StructurePolys>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(s) = cache.lock().expect("poly cache").get(&(p, depth)) {
            return Ok(s.clone());
        }
        let s = Arc::new(Self::generate(p, depth)?);
        cache.lock().expect("poly cache").insert((p, depth), s.clone());
        Ok(s)
    }

    pub fn export(&self) -> PolyExport {
        let n = self.depth;
        let conv = |poly: &IntPoly, with_b: bool| -> Vec<ExportTerm> {
            poly.sorted_terms()
                .into_iter()
                .map(|(m, c)| {
                    let e = if with_b {
                        let inter = unpack(m, 2 * n);
                        (0..n).map(|i| inter[2 * i]).chain((0..n).map(|i| inter[2 * i + 1])).collect()
                    } else {
                        unpack(m, n)
                    };
                    ExportTerm { c: ExportCoeff::from(c), e }
                })
                .collect()
        };
        let mut exp = PolyExport {
            p: self.p,
            depth: n,
            variables: (0..n).map(|i| format!("a{i}")).chain((0..n).map(|i| format!("b{i}"))).collect(),
            sum: self.sum.iter().map(|s| conv(s, true)).collect(),
            prod: self.prod.iter().map(|s| conv(s, true)).collect(),
            frob: self.frob.iter().map(|s| conv(s, false)).collect(),
        };
        for table in [&mut exp.sum, &mut exp.prod, &mut exp.frob] {
            for poly in table.iter_mut() {
                poly.sort_by(|x, y| x.e.cmp(&y.e));
            }
        }
        exp
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum ExportCoeff {
    Small(i64),
    Big(String),
}

impl From<&BigInt> for ExportCoeff {
    fn from(c: &BigInt) -> Self {
        match c.to_i64() {
            Some(v) => ExportCoeff::Small(v),
            None => ExportCoeff::Big(c.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExportTerm {
    pub c: ExportCoeff,
    pub e: Vec<u32>,
}

/// Sparse-term export. Sum and product terms list exponents of
/// (a_0..a_{n-1}, b_0..b_{n-1}); Frobenius terms list only the a's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolyExport {
    pub p: u32,
    pub depth: usize,
    pub variables: Vec<String>,
    pub sum: Vec<Vec<ExportTerm>>,
    pub prod: Vec<Vec<ExportTerm>>,
    pub frob: Vec<Vec<ExportTerm>>,
}

/// A polynomial with coefficients reduced modulo some p^a, flattened for
/// evaluation. Each term is (coeff, [(var, exp)]).
#[derive(Debug, Clone)]
pub struct ReducedPoly {
    pub terms: Vec<(u64, Vec<(u8, u32)>)>,
}

impl ReducedPoly {
    pub fn from_int(poly: &IntPoly, modulus: u64) -> Self {
        let m = BigInt::from(modulus);
        let mut terms: Vec<(u64, Vec<(u8, u32)>)> = poly
            .sorted_terms()
            .into_iter()
            .filter_map(|(mono, c)| {
                let r = c.mod_floor(&m);
                if r.is_zero() {
                    return None;
                }
                let r = if r.is_negative() { &r + &m } else { r };
                let vars = unpack(mono, MAX_VARS)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, e)| *e > 0)
                    .map(|(i, e)| (i as u8, e))
                    .collect();
                Some((r.to_u64().expect("reduced"), vars))
            })
            .collect();
        terms.sort_by(|x, y| x.1.cmp(&y.1));
        ReducedPoly { terms }
    }

    /// Largest exponent of each variable.
    pub fn max_exponents(&self, nvars: usize) -> Vec<u32> {
        let mut mx = vec![0u32; nvars];
        for (_, vars) in &self.terms {
            for &(v, e) in vars {
                let v = v as usize;
                if v < nvars {
                    mx[v] = mx[v].max(e);
                }
            }
        }
        mx
    }
}

/// Structure polynomials reduced modulo p^a for evaluation in rings of that
/// characteristic.
#[derive(Debug)]
pub struct ReducedTables {
    pub p: u32,
    pub depth: usize,
    pub modulus: u64,
    pub sum: Vec<ReducedPoly>,
    pub prod: Vec<ReducedPoly>,
    pub frob: Vec<ReducedPoly>,
}

impl ReducedTables {
    pub fn cached(p: u32, depth: usize, char_exp: u32) -> Result<Arc<Self>> {
        type Key = (u32, usize, u32);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<ReducedTables>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let key = (p, depth, char_exp);
        if let Some(t) = cache.lock().expect("table cache").get(&key) {
            return Ok(t.clone());
        }
        let full = StructurePolys::cached(p, depth)?;
        let modulus = (p as u64).pow(char_exp);
        let red = |v: &[IntPoly]| v.iter().map(|q| ReducedPoly::from_int(q, modulus)).collect();
        let t = Arc::new(ReducedTables {
            p,
            depth,
            modulus,
            sum: red(&full.sum),
            prod: red(&full.prod),
            frob: red(&full.frob),
        });
        cache.lock().expect("table cache").insert(key, t.clone());
        Ok(t)
    }
}
