//! The extended affine Weyl group of GL_h as affine permutations, its Bruhat
//! order, and the admissible sets Adm(μ_d).

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest rank handled by the exhaustive routines.
pub const MAX_RANK: usize = 4;

/// Indices of the affine simple reflections; the affine Weyl group of GL_1 has none.
pub fn simple_reflections(h: usize) -> std::ops::Range<usize> {
    if h < 2 {
        0..0
    } else {
        0..h
    }
}

/// w = t^λ·σ, stored as the window (f(1), …, f(h)) of the affine permutation
/// f(i) = σ(i) + h·λ_{σ(i)}, extended by f(i + h) = f(i) + h.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineWeylElement {
    window: Vec<i64>,
}

impl AffineWeylElement {
    pub fn new(translation: &[i64], permutation: &[usize]) -> Result<Self> {
        let h = translation.len();
        let mut seen = vec![false; h];
        if permutation.len() != h || permutation.iter().any(|&s| s >= h || std::mem::replace(&mut seen[s], true)) {
            return Err(Error::BadRank(format!("{permutation:?} is not a permutation of 0..{h}")));
        }
        let hh = h as i64;
        let window = (0..h).map(|i| permutation[i] as i64 + 1 + hh * translation[permutation[i]]).collect();
        Ok(AffineWeylElement { window })
    }

    pub fn from_window(window: Vec<i64>) -> Result<Self> {
        let h = window.len() as i64;
        let residues: BTreeSet<i64> = window.iter().map(|x| (x - 1).rem_euclid(h)).collect();
        if h == 0 || residues.len() != window.len() {
            return Err(Error::BadRank(format!("{window:?} is not an affine permutation window")));
        }
        Ok(AffineWeylElement { window })
    }

    pub fn identity(h: usize) -> Self {
        AffineWeylElement { window: (1..=h as i64).collect() }
    }

    pub fn translation_by(lambda: &[i64]) -> Self {
        let perm: Vec<usize> = (0..lambda.len()).collect();
        Self::new(lambda, &perm).expect("identity permutation")
    }

    /// The length-zero generator i ↦ i + 1.
    pub fn tau(h: usize) -> Self {
        AffineWeylElement { window: (2..=h as i64 + 1).collect() }
    }

    /// s_i for i in `simple_reflections(h)`; s_0 is the affine reflection.
    pub fn simple(h: usize, i: usize) -> Self {
        assert!(simple_reflections(h).contains(&i), "no simple reflection s_{i} in rank {h}");
        let mut w = Self::identity(h);
        w.swap_positions(i);
        w
    }

    pub fn rank(&self) -> usize {
        self.window.len()
    }

    pub fn window(&self) -> &[i64] {
        &self.window
    }

    /// f(i) for any integer i.
    pub fn eval(&self, i: i64) -> i64 {
        let h = self.window.len() as i64;
        let r = (i - 1).rem_euclid(h);
        self.window[r as usize] + (i - 1 - r)
    }

    pub fn permutation(&self) -> Vec<usize> {
        let h = self.window.len() as i64;
        self.window.iter().map(|x| (x - 1).rem_euclid(h) as usize).collect()
    }

    pub fn translation(&self) -> Vec<i64> {
        let h = self.window.len() as i64;
        let mut lambda = vec![0; self.window.len()];
        for x in &self.window {
            let s = (x - 1).rem_euclid(h);
            lambda[s as usize] = (x - 1 - s) / h;
        }
        lambda
    }

    /// The component in π₁ = Z, namely Σλ.
    pub fn component(&self) -> i64 {
        self.translation().iter().sum()
    }

    /// Composition f∘g.
    pub fn compose(&self, g: &Self) -> Self {
        AffineWeylElement { window: g.window.iter().map(|&x| self.eval(x)).collect() }
    }

    pub fn inverse(&self) -> Self {
        let h = self.window.len() as i64;
        let mut window = vec![0; self.window.len()];
        for (i, &x) in self.window.iter().enumerate() {
            let r = (x - 1).rem_euclid(h);
            window[r as usize] = i as i64 + 1 - (x - 1 - r);
        }
        AffineWeylElement { window }
    }

    /// Number of affine inversions.
    pub fn length(&self) -> usize {
        let h = self.window.len();
        let hh = h as i64;
        let mut total = 0;
        for i in 0..h {
            for j in (i + 1)..h {
                total += (self.window[j] - self.window[i]).div_euclid(hh).unsigned_abs() as usize;
            }
        }
        total
    }

    fn swap_positions(&mut self, i: usize) {
        let h = self.window.len();
        if i == 0 {
            let hh = h as i64;
            let (a, b) = (self.window[0], self.window[h - 1]);
            self.window[0] = b - hh;
            self.window[h - 1] = a + hh;
        } else {
            self.window.swap(i - 1, i);
        }
    }

    /// w·s_i.
    pub fn times_simple(&self, i: usize) -> Self {
        assert!(simple_reflections(self.rank()).contains(&i), "no simple reflection s_{i} in rank {}", self.rank());
        let mut w = self.clone();
        w.swap_positions(i);
        w
    }

    pub fn has_right_descent(&self, i: usize) -> bool {
        match i {
            _ if !simple_reflections(self.rank()).contains(&i) => false,
            0 => self.eval(0) > self.eval(1),
            i => self.window[i - 1] > self.window[i],
        }
    }

    /// Lexicographically least reduced word of the Coxeter part w·τ^{−k}, read left to right.
    pub fn reduced_word(&self) -> Vec<usize> {
        let h = self.rank();
        let k = self.component();
        let mut w = self.compose(&Self::tau(h).power(-k));
        let mut word = Vec::new();
        loop {
            let inv = w.inverse();
            match simple_reflections(h).find(|&i| inv.has_right_descent(i)) {
                Some(i) => {
                    word.push(i);
                    w = inv.times_simple(i).inverse();
                }
                None => return word,
            }
        }
    }

    pub fn power(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Self::identity(self.rank());
        for _ in 0..k.unsigned_abs() {
            out = out.compose(&base);
        }
        out
    }

    pub fn to_json(&self) -> ElementJson {
        ElementJson {
            translation: self.translation(),
            permutation: self.permutation(),
            window: self.window.clone(),
            length: self.length(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElementJson {
    pub translation: Vec<i64>,
    pub permutation: Vec<usize>,
    pub window: Vec<i64>,
    pub length: usize,
}

/// Products of all subwords of a reduced word of y, times its length-zero part.
pub fn lower_interval(y: &AffineWeylElement) -> BTreeSet<AffineWeylElement> {
    let h = y.rank();
    let tau_k = AffineWeylElement::tau(h).power(y.component());
    let mut products: BTreeSet<AffineWeylElement> = BTreeSet::from([AffineWeylElement::identity(h)]);
    for &s in &y.reduced_word() {
        let next: Vec<AffineWeylElement> = products.iter().map(|p| p.times_simple(s)).collect();
        products.extend(next);
    }
    products.into_iter().map(|p| p.compose(&tau_k)).collect()
}

/// Bruhat order by the subword criterion; elements of different components are incomparable.
pub fn bruhat_leq(x: &AffineWeylElement, y: &AffineWeylElement) -> bool {
    if x.rank() != y.rank() || x.component() != y.component() {
        return false;
    }
    if x.length() > y.length() {
        return false;
    }
    x == y || lower_interval(y).contains(x)
}

#[derive(Debug, Clone)]
pub struct AdmissibleSet {
    pub h: usize,
    pub d: usize,
    pub elements: Vec<AffineWeylElement>,
    /// leq[i][j] iff elements[i] ≤ elements[j].
    pub leq: Vec<Vec<bool>>,
}

/// Distinct permutations of (1^d, 0^{h−d}), lexicographically sorted.
pub fn minuscule_orbit(h: usize, d: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    for mask in 0u32..(1 << h) {
        if mask.count_ones() as usize == d {
            out.push((0..h).map(|i| ((mask >> (h - 1 - i)) & 1) as i64).collect());
        }
    }
    out.sort();
    out
}

pub fn admissible_set(h: usize, d: usize) -> Result<AdmissibleSet> {
    if d > h || h == 0 {
        return Err(Error::BadRank(format!("type ({h}, {d})")));
    }
    if h > MAX_RANK {
        return Err(Error::BudgetExceeded { needed: h as u128, budget: MAX_RANK as u128 });
    }
    let mut all: BTreeSet<AffineWeylElement> = BTreeSet::new();
    for lambda in minuscule_orbit(h, d) {
        all.extend(lower_interval(&AffineWeylElement::translation_by(&lambda)));
    }
    let mut elements: Vec<AffineWeylElement> = all.into_iter().collect();
    elements.sort_by_key(|w| (w.length(), w.clone()));
    let intervals: Vec<BTreeSet<AffineWeylElement>> = elements.iter().map(lower_interval).collect();
    let leq = (0..elements.len())
        .map(|i| (0..elements.len()).map(|j| intervals[j].contains(&elements[i])).collect())
        .collect();
    Ok(AdmissibleSet { h, d, elements, leq })
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibleJson {
    pub h: usize,
    pub d: usize,
    pub elements: Vec<ElementJson>,
    /// Covering relations (lower, upper) as indices into `elements`.
    pub edges: Vec<(usize, usize)>,
}

impl AdmissibleSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, w: &AffineWeylElement) -> Option<usize> {
        self.elements.iter().position(|x| x == w)
    }

    /// Pairs (i, j) with elements[i] < elements[j] and nothing strictly between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.elements.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j || !self.leq[i][j] {
                    continue;
                }
                if !(0..n).any(|k| k != i && k != j && self.leq[i][k] && self.leq[k][j]) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn maximal(&self) -> Vec<usize> {
        let n = self.elements.len();
        (0..n).filter(|&i| !(0..n).any(|j| j != i && self.leq[i][j])).collect()
    }

    pub fn to_json(&self) -> AdmissibleJson {
        AdmissibleJson {
            h: self.h,
            d: self.d,
            elements: self.elements.iter().map(|w| w.to_json()).collect(),
            edges: self.covers(),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut s = format!("digraph adm_{}_{} {{\n  rankdir=BT;\n", self.h, self.d);
        for (i, w) in self.elements.iter().enumerate() {
            s.push_str(&format!("  n{i} [label=\"{:?} l={}\"];\n", w.window(), w.length()));
        }
        for (i, j) in self.covers() {
            s.push_str(&format!("  n{i} -> n{j};\n"));
        }
        s.push_str("}\n");
        s
    }

    /// Elements grouped by length.
    pub fn by_length(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for w in &self.elements {
            *out.entry(w.length()).or_insert(0) += 1;
        }
        out
    }
}

/// w ↦ τ^h·w⁻¹, carrying Adm(μ_d) onto Adm(μ_{h−d}).
pub fn duality(w: &AffineWeylElement) -> AffineWeylElement {
    AffineWeylElement::tau(w.rank()).power(w.rank() as i64).compose(&w.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_roundtrip() {
        let w = AffineWeylElement::new(&[2, -1, 0], &[1, 2, 0]).unwrap();
        assert_eq!(w.translation(), vec![2, -1, 0]);
        assert_eq!(w.permutation(), vec![1, 2, 0]);
        assert_eq!(w.compose(&w.inverse()), AffineWeylElement::identity(3));
    }

    #[test]
    fn tau_has_length_zero() {
        for h in 1..5 {
            assert_eq!(AffineWeylElement::tau(h).length(), 0);
            assert_eq!(AffineWeylElement::tau(h).component(), 1);
        }
    }
}
