//! Dense matrices over a Witt ring and spans over W_n(F_q).

use std::fmt;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::witt::{WittRing, WittVector};
use crate::zink::ZinkRing;

/// Coefficient rings whose elements are stored as Witt vectors.
pub trait Arith {
    fn zero(&self) -> WittVector;
    fn one(&self) -> WittVector;
    fn add(&self, a: &WittVector, b: &WittVector) -> WittVector;
    fn sub(&self, a: &WittVector, b: &WittVector) -> WittVector;
    fn neg(&self, a: &WittVector) -> WittVector;
    fn mul(&self, a: &WittVector, b: &WittVector) -> WittVector;
    fn inv(&self, a: &WittVector) -> Option<WittVector>;
    fn is_unit(&self, a: &WittVector) -> bool;
    fn contains(&self, a: &WittVector) -> bool;
    fn sample(&self, rng: &mut dyn RngCore) -> WittVector;
    fn is_zero(&self, a: &WittVector) -> bool {
        *a == WittVector::default()
    }
}

macro_rules! delegate_arith {
    ($t:ty) => {
        impl Arith for $t {
            fn zero(&self) -> WittVector {
                <$t>::zero(self)
            }
            fn one(&self) -> WittVector {
                <$t>::one(self)
            }
            fn add(&self, a: &WittVector, b: &WittVector) -> WittVector {
                <$t>::add(self, a, b)
            }
            fn sub(&self, a: &WittVector, b: &WittVector) -> WittVector {
                <$t>::sub(self, a, b)
            }
            fn neg(&self, a: &WittVector) -> WittVector {
                <$t>::neg(self, a)
            }
            fn mul(&self, a: &WittVector, b: &WittVector) -> WittVector {
                <$t>::mul(self, a, b)
            }
            fn inv(&self, a: &WittVector) -> Option<WittVector> {
                <$t>::inv(self, a)
            }
            fn is_unit(&self, a: &WittVector) -> bool {
                <$t>::is_unit(self, a)
            }
            fn contains(&self, a: &WittVector) -> bool {
                <$t>::contains(self, a)
            }
            fn sample(&self, rng: &mut dyn RngCore) -> WittVector {
                <$t>::random(self, rng)
            }
        }
    };
}

delegate_arith!(WittRing);
delegate_arith!(ZinkRing);

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<WittVector>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[WittVector]> = (0..self.rows).map(|i| self.row(i)).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![WittVector::default(); rows * cols] }
    }

    pub fn identity<A: Arith + ?Sized>(w: &A, h: usize) -> Self {
        Self::scalar(w, h, &w.one())
    }

    pub fn scalar<A: Arith + ?Sized>(_w: &A, h: usize, c: &WittVector) -> Self {
        let mut m = Self::zeros(h, h);
        for i in 0..h {
            m[(i, i)] = *c;
        }
        m
    }

    pub fn diag(entries: &[WittVector]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = *e;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> WittVector) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<WittVector>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::BadRank("ragged matrix".into()));
        }
        Ok(Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[WittVector] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<WittVector> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn entries(&self) -> &[WittVector] {
        &self.data
    }

    pub fn check<A: Arith + ?Sized>(&self, w: &A) -> Result<()> {
        if self.data.iter().all(|x| w.contains(x)) {
            Ok(())
        } else {
            Err(Error::RingMismatch("matrix entry outside the coefficient ring".into()))
        }
    }

    pub fn mul<A: Arith + ?Sized>(&self, w: &A, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix shapes");
        let mut r = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if w.is_zero(&a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other[(k, j)];
                    if w.is_zero(&b) {
                        continue;
                    }
                    r[(i, j)] = w.add(&r[(i, j)], &w.mul(&a, &b));
                }
            }
        }
        r
    }

    pub fn mul_vec<A: Arith + ?Sized>(&self, w: &A, v: &[WittVector]) -> Vec<WittVector> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(w.zero(), |acc, (a, b)| w.add(&acc, &w.mul(a, b))))
            .collect()
    }

    pub fn add<A: Arith + ?Sized>(&self, w: &A, other: &Mat) -> Mat {
        self.zip_with(other, |a, b| w.add(a, b))
    }

    pub fn sub<A: Arith + ?Sized>(&self, w: &A, other: &Mat) -> Mat {
        self.zip_with(other, |a, b| w.sub(a, b))
    }

    fn zip_with(&self, other: &Mat, f: impl Fn(&WittVector, &WittVector) -> WittVector) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix shapes");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn scale<A: Arith + ?Sized>(&self, w: &A, c: &WittVector) -> Mat {
        self.map(|x| w.mul(c, x))
    }

    pub fn map(&self, f: impl Fn(&WittVector) -> WittVector) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&WittVector) -> Result<WittVector>) -> Result<Mat> {
        Ok(Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn is_zero<A: Arith + ?Sized>(&self, w: &A) -> bool {
        self.data.iter().all(|x| w.is_zero(x))
    }

    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Mat {
        Mat::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    /// [[a, b], [c, d]].
    pub fn from_blocks(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Mat {
        let (r0, c0) = (a.rows, a.cols);
        Mat::from_fn(a.rows + c.rows, a.cols + b.cols, |i, j| match (i < r0, j < c0) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - c0)],
            (false, true) => c[(i - r0, j)],
            (false, false) => d[(i - r0, j - c0)],
        })
    }

    pub fn select_cols(&self, cols: &[usize]) -> Mat {
        Mat::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])])
    }

    pub fn select_rows(&self, rows: &[usize]) -> Mat {
        Mat::from_fn(rows.len(), self.cols, |i, j| self[(rows[i], j)])
    }

    pub fn det<A: Arith + ?Sized>(&self, w: &A) -> WittVector {
        assert!(self.is_square(), "det of a non-square matrix");
        let n = self.rows;
        match n {
            0 => w.one(),
            1 => self[(0, 0)],
            2 => w.sub(&w.mul(&self[(0, 0)], &self[(1, 1)]), &w.mul(&self[(0, 1)], &self[(1, 0)])),
            _ => {
                // Laplace expansion along the first row.
                let mut acc = w.zero();
                for j in 0..n {
                    let a = self[(0, j)];
                    if w.is_zero(&a) {
                        continue;
                    }
                    let minor = self.minor(0, j);
                    let t = w.mul(&a, &minor.det(w));
                    acc = if j % 2 == 0 { w.add(&acc, &t) } else { w.sub(&acc, &t) };
                }
                acc
            }
        }
    }

    pub fn minor(&self, r: usize, c: usize) -> Mat {
        Mat::from_fn(self.rows - 1, self.cols - 1, |i, j| {
            self[(if i < r { i } else { i + 1 }, if j < c { j } else { j + 1 })]
        })
    }

    pub fn is_invertible<A: Arith + ?Sized>(&self, w: &A) -> bool {
        self.is_square() && w.is_unit(&self.det(w))
    }

    /// Inverse over an arbitrary commutative ring via the adjugate.
    pub fn inv<A: Arith + ?Sized>(&self, w: &A) -> Option<Mat> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let dinv = w.inv(&self.det(w))?;
        if n == 1 {
            return Some(Mat::diag(&[dinv]));
        }
        Some(Mat::from_fn(n, n, |i, j| {
            let c = self.minor(j, i).det(w);
            let c = if (i + j) % 2 == 0 { c } else { w.neg(&c) };
            w.mul(&c, &dinv)
        }))
    }

    pub fn random<A: Arith + ?Sized, G: Rng>(w: &A, rows: usize, cols: usize, rng: &mut G) -> Mat {
        Mat::from_fn(rows, cols, |_, _| w.sample(rng))
    }

    pub fn random_invertible<A: Arith + ?Sized, G: Rng>(w: &A, h: usize, rng: &mut G) -> Mat {
        loop {
            let m = Mat::random(w, h, h, rng);
            if m.is_invertible(w) {
                return m;
            }
        }
    }

    /// Entrywise σ: W_m → W_n.
    pub fn frobenius(&self, wm: &WittRing, wn: &WittRing) -> Result<Mat> {
        self.try_map(|x| wm.frobenius(x, wn))
    }

    pub fn truncate(&self, wm: &WittRing, wn: &WittRing) -> Result<Mat> {
        self.try_map(|x| wm.truncate(x, wn))
    }

    /// Entrywise zeroth component, as a matrix over W_1.
    pub fn residue(&self) -> Mat {
        self.map(|x| WittVector::lift(*x.comp(0)))
    }

    pub fn to_json(&self, w: &WittRing) -> Vec<Vec<Vec<Vec<u32>>>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|x| w.to_json(x).comps).collect()).collect()
    }

    pub fn from_json(w: &WittRing, rows: &[Vec<Vec<Vec<i64>>>]) -> Result<Mat> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|x| w.from_coords(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Mat::from_rows(rows)
    }

    pub fn fmt_with(&self, w: &WittRing) -> String {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| {
                let e: Vec<String> = self.row(i).iter().map(|x| w.fmt_elem(x)).collect();
                format!("[{}]", e.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = WittVector;
    fn index(&self, (i, j): (usize, usize)) -> &WittVector {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut WittVector {
        &mut self.data[i * self.cols + j]
    }
}

/// Row reduced echelon form over a field W_1(k); returns (matrix, pivots).
/// Zero rows are dropped.
pub fn rref<A: Arith + ?Sized>(w: &A, m: &Mat) -> (Mat, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(pr) = (r..a.rows).find(|&i| !w.is_zero(&a[(i, c)])) else {
            continue;
        };
        if pr != r {
            for j in 0..a.cols {
                let t = a[(r, j)];
                a[(r, j)] = a[(pr, j)];
                a[(pr, j)] = t;
            }
        }
        let inv = w.inv(&a[(r, c)]).expect("nonzero element of a field");
        for j in 0..a.cols {
            a[(r, j)] = w.mul(&a[(r, j)], &inv);
        }
        for i in 0..a.rows {
            if i != r && !w.is_zero(&a[(i, c)]) {
                let f = a[(i, c)];
                for j in 0..a.cols {
                    a[(i, j)] = w.sub(&a[(i, j)], &w.mul(&f, &a[(r, j)]));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let rank = pivots.len();
    (a.block(0, rank, 0, a.cols), pivots)
}

/// A submodule of W_n(k)^h for a perfect field k, stored in Howell form:
/// rows in echelon shape whose pivots are exact powers of p, closed under
/// the annihilator trick so membership reduces greedily.
#[derive(Debug, Clone)]
pub struct Span {
    h: usize,
    pivots: Vec<(usize, usize, Vec<WittVector>)>,
}

impl Span {
    /// The span of the given row vectors.
    pub fn new(w: &WittRing, gens: &[Vec<WittVector>], h: usize) -> Result<Self> {
        if !w.base().is_field() {
            return Err(Error::RingMismatch("spans are only computed over W_n of a field".into()));
        }
        let n = w.len();
        let p_pow: Vec<WittVector> = (0..=n).map(|k| w.from_int((w.p() as i64).pow(k as u32))).collect();
        let mut rows: Vec<Vec<WittVector>> = gens.iter().filter(|r| r.iter().any(|x| !w.is_zero(x))).cloned().collect();
        let mut pivots = Vec::new();
        for c in 0..h {
            let Some((pi, k)) = rows
                .iter()
                .enumerate()
                .map(|(i, r)| (i, w.valuation(&r[c])))
                .filter(|&(_, v)| v < n)
                .min_by_key(|&(i, v)| (v, i))
            else {
                continue;
            };
            let mut pr = rows.remove(pi);
            // pr[c] = p^k · u with u a unit.
            let u = w.div_p_power(&pr[c], k)?;
            let uinv = w.inv(&u).ok_or(Error::NonUnit)?;
            for x in pr.iter_mut() {
                *x = w.mul(x, &uinv);
            }
            for r in rows.iter_mut() {
                if w.is_zero(&r[c]) {
                    continue;
                }
                let f = w.div_p_power(&r[c], k)?;
                for j in 0..h {
                    r[j] = w.sub(&r[j], &w.mul(&f, &pr[j]));
                }
            }
            if k > 0 {
                let extra: Vec<WittVector> = pr.iter().map(|x| w.mul(&p_pow[n - k], x)).collect();
                rows.push(extra);
            }
            rows.retain(|r| r.iter().any(|x| !w.is_zero(x)));
            pivots.push((c, k, pr));
        }
        Ok(Span { h, pivots })
    }

    pub fn contains(&self, w: &WittRing, v: &[WittVector]) -> bool {
        let mut x = v.to_vec();
        for (c, k, row) in &self.pivots {
            if w.is_zero(&x[*c]) {
                continue;
            }
            if w.valuation(&x[*c]) < *k {
                return false;
            }
            let Ok(f) = w.div_p_power(&x[*c], *k) else {
                return false;
            };
            for j in 0..self.h {
                x[j] = w.sub(&x[j], &w.mul(&f, &row[j]));
            }
        }
        x.iter().all(|e| w.is_zero(e))
    }

    pub fn generators(&self) -> Vec<Vec<WittVector>> {
        self.pivots.iter().map(|(_, _, r)| r.clone()).collect()
    }

    pub fn contains_span(&self, w: &WittRing, other: &Span) -> bool {
        other.generators().iter().all(|g| self.contains(w, g))
    }

    pub fn equals(&self, w: &WittRing, other: &Span) -> bool {
        self.contains_span(w, other) && other.contains_span(w, self)
    }

    /// log_q of the cardinality: Σ (n - k) over pivots.
    pub fn length(&self, w: &WittRing) -> usize {
        self.pivots.iter().map(|(_, k, _)| w.len() - k).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::BaseRing;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = WittRing::new(BaseRing::integers_mod(3, 2).unwrap(), 2).unwrap();
        for h in 1..=4 {
            let m = Mat::random_invertible(&w, h, &mut rng);
            let mi = m.inv(&w).unwrap();
            assert_eq!(m.mul(&w, &mi), Mat::identity(&w, h));
        }
    }

    #[test]
    fn span_counts() {
        let w = WittRing::new(BaseRing::prime(3).unwrap(), 2).unwrap();
        let p = w.from_int(3);
        let one = w.one();
        let s = Span::new(&w, &[vec![p, one], vec![one, w.zero()]], 2).unwrap();
        assert_eq!(s.length(&w), 4);
        let t = Span::new(&w, &[vec![p, w.zero()]], 2).unwrap();
        assert_eq!(t.length(&w), 1);
        assert!(s.contains_span(&w, &t));
        assert!(!t.contains(&w, &[one, w.zero()]));
    }
}
