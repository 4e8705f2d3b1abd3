//! Pairs (M, M₁) with a normal decomposition, and the functor M₁ ↦ M̃₁.

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Arith, Mat};
use crate::ring::{Ring, RingHom};
use crate::witt::{WittRing, WittVector};
use crate::zink::{ArtinLocal, ZinkRing};

/// Coefficients of a pair: a truncated Witt ring W_m(R) or a Zink ring Ŵ(R).
#[derive(Debug, Clone, PartialEq)]
pub enum Coeff {
    Witt(WittRing),
    Zink(ZinkRing),
}

impl From<WittRing> for Coeff {
    fn from(w: WittRing) -> Self {
        Coeff::Witt(w)
    }
}

impl From<ZinkRing> for Coeff {
    fn from(z: ZinkRing) -> Self {
        Coeff::Zink(z)
    }
}

macro_rules! both {
    ($s:expr, $r:ident => $e:expr) => {
        match $s {
            Coeff::Witt($r) => $e,
            Coeff::Zink($r) => $e,
        }
    };
}

impl Arith for Coeff {
    fn zero(&self) -> WittVector {
        both!(self, r => r.zero())
    }
    fn one(&self) -> WittVector {
        both!(self, r => r.one())
    }
    fn add(&self, a: &WittVector, b: &WittVector) -> WittVector {
        both!(self, r => r.add(a, b))
    }
    fn sub(&self, a: &WittVector, b: &WittVector) -> WittVector {
        both!(self, r => r.sub(a, b))
    }
    fn neg(&self, a: &WittVector) -> WittVector {
        both!(self, r => r.neg(a))
    }
    fn mul(&self, a: &WittVector, b: &WittVector) -> WittVector {
        both!(self, r => r.mul(a, b))
    }
    fn inv(&self, a: &WittVector) -> Option<WittVector> {
        both!(self, r => r.inv(a))
    }
    fn is_unit(&self, a: &WittVector) -> bool {
        both!(self, r => r.is_unit(a))
    }
    fn contains(&self, a: &WittVector) -> bool {
        both!(self, r => r.contains(a))
    }
    fn sample(&self, rng: &mut dyn RngCore) -> WittVector {
        both!(self, r => r.random(rng))
    }
}

impl Coeff {
    /// The ambient W_N(R) in which elements are stored.
    pub fn witt(&self) -> &WittRing {
        match self {
            Coeff::Witt(w) => w,
            Coeff::Zink(z) => z.witt(),
        }
    }

    pub fn base(&self) -> &Ring {
        self.witt().base()
    }

    pub fn p(&self) -> u32 {
        self.witt().p()
    }

    pub fn len(&self) -> usize {
        self.witt().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_zink(&self) -> bool {
        matches!(self, Coeff::Zink(_))
    }

    pub fn from_int(&self, k: i64) -> WittVector {
        let x = self.witt().from_int(k);
        self.reduce(&x)
    }

    pub fn reduce(&self, x: &WittVector) -> WittVector {
        match self {
            Coeff::Witt(_) => *x,
            Coeff::Zink(z) => z.reduce(x),
        }
    }

    pub fn teichmuller(&self, r: &crate::ring::RingElement) -> WittVector {
        both!(self, w => w.teichmuller(r))
    }

    /// Membership in I_R (or Î_R, Î_{S/R}).
    pub fn in_ideal(&self, x: &WittVector) -> bool {
        match self {
            Coeff::Witt(w) => w.in_augmentation(x),
            Coeff::Zink(z) => z.in_ideal(x),
        }
    }

    /// The coefficient ring receiving σ and σ^div at level n.
    pub fn tilde_ring(&self, n: usize) -> Result<Coeff> {
        match self {
            Coeff::Witt(w) => {
                if w.len() < n + 1 {
                    return Err(Error::LengthTooShort { needed: n + 1, have: w.len() });
                }
                Ok(Coeff::Witt(w.with_len(n)?))
            }
            Coeff::Zink(z) => {
                if n == 0 || z.precision() < n + 1 {
                    return Err(Error::LengthTooShort { needed: n + 1, have: z.precision() });
                }
                let mut low = z.lower()?;
                while low.precision() > n {
                    low = low.lower()?;
                }
                Ok(Coeff::Zink(low))
            }
        }
    }

    /// The same kind of ring at smaller precision (no drop requirement).
    pub fn truncated(&self, n: usize) -> Result<Coeff> {
        match self {
            Coeff::Witt(w) => {
                if n == 0 || n > w.len() {
                    return Err(Error::BadTruncation { m: w.len(), n });
                }
                Ok(Coeff::Witt(w.with_len(n)?))
            }
            Coeff::Zink(z) => {
                if n == 0 || n > z.precision() {
                    return Err(Error::BadTruncation { m: z.precision(), n });
                }
                let mut low = z.clone();
                while low.precision() > n {
                    low = low.lower()?;
                }
                Ok(Coeff::Zink(low))
            }
        }
    }

    fn check_small(&self, small: &Coeff) -> Result<()> {
        if small.base() != self.base() || small.is_zink() != self.is_zink() {
            return Err(Error::RingMismatch("target coefficient ring differs".into()));
        }
        Ok(())
    }

    pub fn frobenius_to(&self, x: &WittVector, small: &Coeff) -> Result<WittVector> {
        self.check_small(small)?;
        match (self, small) {
            (Coeff::Witt(w), Coeff::Witt(t)) => w.frobenius(x, t),
            (Coeff::Zink(z), Coeff::Zink(t)) => z.frobenius(x, t),
            _ => unreachable!(),
        }
    }

    pub fn divided_frobenius_to(&self, x: &WittVector, small: &Coeff) -> Result<WittVector> {
        self.check_small(small)?;
        match (self, small) {
            (Coeff::Witt(w), Coeff::Witt(t)) => w.divided_frobenius(x, t),
            (Coeff::Zink(z), Coeff::Zink(t)) => z.divided_frobenius(x, t),
            _ => unreachable!(),
        }
    }

    pub fn truncate_to(&self, x: &WittVector, small: &Coeff) -> Result<WittVector> {
        self.check_small(small)?;
        let t = self.witt().truncate(x, small.witt())?;
        Ok(small.reduce(&t))
    }

    pub fn mat_frobenius(&self, m: &Mat, small: &Coeff) -> Result<Mat> {
        m.try_map(|x| self.frobenius_to(x, small))
    }

    pub fn mat_truncate(&self, m: &Mat, small: &Coeff) -> Result<Mat> {
        m.try_map(|x| self.truncate_to(x, small))
    }

    /// The same construction over the target of a ring homomorphism.
    pub fn base_change(&self, hom: &RingHom) -> Result<Coeff> {
        if &hom.source() != self.base() {
            return Err(Error::RingMismatch("hom source is not the coefficient base".into()));
        }
        match self {
            Coeff::Witt(w) => Ok(Coeff::Witt(WittRing::new(hom.target(), w.len())?)),
            Coeff::Zink(z) => {
                if z.relative_hom().is_some() {
                    return Err(Error::RingMismatch("base change of a relative Zink ring".into()));
                }
                let art = ArtinLocal::new(hom.target())?;
                Ok(Coeff::Zink(ZinkRing::with_bound(art, z.precision(), z.bound())?))
            }
        }
    }

    pub fn map_elem(&self, x: &WittVector, hom: &RingHom, target: &Coeff) -> Result<WittVector> {
        let y = target.witt().map(x, |c| hom.apply(c))?;
        Ok(target.reduce(&y))
    }

    /// Every element, in a fixed order.
    pub fn elements(&self) -> Vec<WittVector> {
        both!(self, r => r.elements())
    }

    pub fn size(&self) -> u128 {
        match self {
            Coeff::Witt(w) => w.size(),
            Coeff::Zink(z) => {
                let m = z.artin().max_ideal().len() as u128;
                z.residue_witt().size().saturating_mul(m.saturating_pow(z.bound() as u32))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Coeff::Witt(w) => format!("W_{}({})", w.len(), w.base().label()),
            Coeff::Zink(z) => format!("Zink_{}({})", z.precision(), z.base().label()),
        }
    }
}

/// diag(1_d, p·1_{h-d}) if `p_on_t`, else diag(p·1_d, 1_{h-d}).
pub fn p_diag(r: &Coeff, h: usize, d: usize, p_on_t: bool) -> Mat {
    let p = r.from_int(r.p() as i64);
    let one = r.one();
    let entries: Vec<WittVector> = (0..h).map(|i| if (i >= d) == p_on_t { p } else { one }).collect();
    Mat::diag(&entries)
}

/// The block permutation sending (X | Y) with X of width `first` to (Y | X).
pub fn block_swap(r: &Coeff, h: usize, first: usize) -> Mat {
    let zero = r.zero();
    let one = r.one();
    // column k of the result is column (k + first) mod h of the input
    Mat::from_fn(h, h, |i, k| if i == (k + first) % h { one } else { zero })
}

/// A pair (M, M₁) of type (h, d), M = L ⊕ T the basis columns, M₁ = L ⊕ I·T.
#[derive(Debug, Clone)]
pub struct Pair {
    ring: Coeff,
    h: usize,
    d: usize,
    basis: Mat,
    basis_inv: Mat,
}

impl PartialEq for Pair {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.h == other.h && self.d == other.d && self.basis == other.basis
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairJson {
    pub ring: String,
    pub h: usize,
    pub d: usize,
    pub basis: Vec<Vec<Vec<Vec<u32>>>>,
}

pub fn pair_make(ring: impl Into<Coeff>, h: usize, d: usize, basis: Mat) -> Result<Pair> {
    let ring = ring.into();
    if d > h || h == 0 {
        return Err(Error::BadRank(format!("type ({h}, {d})")));
    }
    if basis.rows() != h || basis.cols() != h {
        return Err(Error::BadRank(format!("basis is {}x{}, expected {h}x{h}", basis.rows(), basis.cols())));
    }
    basis.check(&ring)?;
    let basis_inv = basis.inv(&ring).ok_or(Error::SingularBasis)?;
    Ok(Pair { ring, h, d, basis, basis_inv })
}

impl Pair {
    pub fn standard(ring: impl Into<Coeff>, h: usize, d: usize) -> Result<Pair> {
        let ring = ring.into();
        let id = Mat::identity(&ring, h);
        pair_make(ring, h, d, id)
    }

    pub fn ring(&self) -> &Coeff {
        &self.ring
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn basis_inv(&self) -> &Mat {
        &self.basis_inv
    }

    pub fn l_part(&self) -> Mat {
        self.basis.block(0, self.h, 0, self.d)
    }

    pub fn t_part(&self) -> Mat {
        self.basis.block(0, self.h, self.d, self.h)
    }

    /// Coordinates of x (standard coordinates) in the adapted basis.
    pub fn coords(&self, x: &[WittVector]) -> Vec<WittVector> {
        self.basis_inv.mul_vec(&self.ring, x)
    }

    pub fn in_m1(&self, x: &[WittVector]) -> bool {
        self.coords(x)[self.d..].iter().all(|c| self.ring.in_ideal(c))
    }

    /// Generators of M₁ over the coefficient ring: L, and V(y)·T for y in `ys`.
    pub fn m1_generators(&self, ys: &[WittVector]) -> Vec<Vec<WittVector>> {
        let r = &self.ring;
        let mut out: Vec<Vec<WittVector>> = (0..self.d).map(|j| self.basis.col(j)).collect();
        for j in self.d..self.h {
            let t = self.basis.col(j);
            for y in ys {
                out.push(t.iter().map(|x| r.mul(y, x)).collect());
            }
        }
        out
    }

    fn same_shape(&self, other: &Pair) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(format!("{} vs {}", self.ring.label(), other.ring.label())));
        }
        Ok(())
    }

    /// The identity of M from a new decomposition to this one; its adapted
    /// matrix expresses the new basis in the old one.
    pub fn change_decomposition(&self, new_basis: Mat) -> Result<PairMorphism> {
        let other = pair_make(self.ring.clone(), self.h, self.d, new_basis)?;
        let id = Mat::identity(&self.ring, self.h);
        let forward = PairMorphism::new(&other, self, id.clone());
        let backward = PairMorphism::new(self, &other, id);
        match (forward, backward) {
            (Ok(f), Ok(_)) => Ok(f),
            (Err(Error::NotAPairMorphism), _) | (_, Err(Error::NotAPairMorphism)) => Err(Error::FiltrationChanged),
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    }

    pub fn base_change(&self, hom: &RingHom) -> Result<Pair> {
        let target = self.ring.base_change(hom)?;
        let basis = self.basis.try_map(|x| self.ring.map_elem(x, hom, &target))?;
        pair_make(target, self.h, self.d, basis).map_err(|e| match e {
            Error::SingularBasis => Error::RingMismatch("base change is not local".into()),
            e => e,
        })
    }

    /// M^∨ with normal decomposition (T^∨, L^∨), type (h, h - d).
    pub fn dual(&self) -> Pair {
        let r = &self.ring;
        let basis = self.basis_inv.transpose().mul(r, &block_swap(r, self.h, self.d));
        let basis_inv = basis.inv(r).expect("dual basis is invertible");
        Pair { ring: self.ring.clone(), h: self.h, d: self.h - self.d, basis, basis_inv }
    }

    /// (W·e) ⊗ M presented through e ⊗ m ↦ c·m.
    pub fn twist(&self, c: &WittVector) -> Result<Pair> {
        let r = &self.ring;
        let ci = r.inv(c).ok_or(Error::NonUnit)?;
        Ok(Pair {
            ring: self.ring.clone(),
            h: self.h,
            d: self.d,
            basis: self.basis.scale(r, c),
            basis_inv: self.basis_inv.scale(r, &ci),
        })
    }

    /// M̃₁ over the level-n ring.
    pub fn tilde(&self, n: usize) -> Result<TildeModule> {
        let small = self.ring.tilde_ring(n)?;
        let sb = self.ring.mat_frobenius(&self.basis, &small)?;
        let sb_inv = self.ring.mat_frobenius(&self.basis_inv, &small)?;
        let comparison = sb.mul(&small, &p_diag(&small, self.h, self.d, true));
        let section = p_diag(&small, self.h, self.d, false).mul(&small, &sb_inv);
        Ok(TildeModule { ring: small, h: self.h, d: self.d, comparison, section })
    }

    /// (M₁^∨)~ → (M̃₁)^∨ in the tilde basis of the dual and the dual tilde basis.
    pub fn tilde_dual_iso(&self, n: usize) -> Result<Mat> {
        let small = self.ring.tilde_ring(n)?;
        Ok(block_swap(&small, self.h, self.d))
    }

    /// (c ⊗ M₁)~ → σ(c) ⊗ M̃₁.
    pub fn tilde_twist_iso(&self, c: &WittVector, n: usize) -> Result<Mat> {
        if !self.ring.is_unit(c) {
            return Err(Error::NonUnit);
        }
        let small = self.ring.tilde_ring(n)?;
        let sc = self.ring.frobenius_to(c, &small)?;
        Ok(Mat::scalar(&small, self.h, &sc))
    }

    pub fn to_json(&self) -> PairJson {
        PairJson { ring: self.ring.label(), h: self.h, d: self.d, basis: self.basis.to_json(self.ring.witt()) }
    }
}

/// M̃₁ with its tilde basis (L^σ, T^σ).
#[derive(Debug, Clone)]
pub struct TildeModule {
    pub ring: Coeff,
    pub h: usize,
    pub d: usize,
    /// M̃₁ → W_n ⊗ M^σ, l + t ↦ l + p t; standard coordinates of M^σ.
    pub comparison: Mat,
    /// W_n ⊗ M^σ → M̃₁, l + t ↦ p l + t.
    pub section: Mat,
}

/// A morphism of pairs in standard coordinates, with its adapted blocks.
#[derive(Debug, Clone)]
pub struct PairMorphism {
    pub source: Pair,
    pub target: Pair,
    pub matrix: Mat,
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
}

#[derive(Debug, Clone, Serialize)]
pub struct MorphismJson {
    pub a: Vec<Vec<Vec<Vec<u32>>>>,
    pub b: Vec<Vec<Vec<Vec<u32>>>>,
    pub c: Vec<Vec<Vec<Vec<u32>>>>,
    pub d: Vec<Vec<Vec<Vec<u32>>>>,
}

impl PairMorphism {
    pub fn new(source: &Pair, target: &Pair, matrix: Mat) -> Result<Self> {
        source.same_shape(target)?;
        let r = &source.ring;
        if matrix.rows() != target.h || matrix.cols() != source.h {
            return Err(Error::BadRank("morphism matrix shape".into()));
        }
        matrix.check(r)?;
        let x = target.basis_inv.mul(r, &matrix).mul(r, &source.basis);
        let (h, d, h2, d2) = (source.h, source.d, target.h, target.d);
        let c = x.block(d2, h2, 0, d);
        if !c.entries().iter().all(|e| r.in_ideal(e)) {
            return Err(Error::NotAPairMorphism);
        }
        Ok(PairMorphism {
            source: source.clone(),
            target: target.clone(),
            matrix,
            a: x.block(0, d2, 0, d),
            b: x.block(0, d2, d, h),
            c,
            d: x.block(d2, h2, d, h),
        })
    }

    /// Build from adapted blocks.
    pub fn from_blocks(source: &Pair, target: &Pair, a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Result<Self> {
        let r = &source.ring;
        let x = Mat::from_blocks(a, b, c, d);
        let m = target.basis.mul(r, &x).mul(r, &source.basis_inv);
        Self::new(source, target, m)
    }

    pub fn adapted(&self) -> Mat {
        Mat::from_blocks(&self.a, &self.b, &self.c, &self.d)
    }

    pub fn compose(&self, first: &PairMorphism) -> Result<PairMorphism> {
        if first.target != self.source {
            return Err(Error::RingMismatch("morphisms are not composable".into()));
        }
        let m = self.matrix.mul(&self.source.ring, &first.matrix);
        PairMorphism::new(&first.source, &self.target, m)
    }

    pub fn is_invertible(&self) -> bool {
        self.matrix.is_invertible(&self.source.ring)
    }

    /// f^∨ : M'^∨ → M^∨, the transpose.
    pub fn dual(&self) -> Result<PairMorphism> {
        PairMorphism::new(&self.target.dual(), &self.source.dual(), self.matrix.transpose())
    }

    /// f̃ = (σa, p σb; ċ, σd) over the level-n ring.
    pub fn tilde(&self, n: usize) -> Result<Mat> {
        let r = &self.source.ring;
        let small = r.tilde_ring(n)?;
        let sa = r.mat_frobenius(&self.a, &small)?;
        let p = small.from_int(small.p() as i64);
        let sb = r.mat_frobenius(&self.b, &small)?.scale(&small, &p);
        let cd = self.c.try_map(|x| r.divided_frobenius_to(x, &small))?;
        let sd = r.mat_frobenius(&self.d, &small)?;
        Ok(Mat::from_blocks(&sa, &sb, &cd, &sd))
    }

    pub fn to_json(&self) -> MorphismJson {
        let w = self.source.ring.witt();
        MorphismJson { a: self.a.to_json(w), b: self.b.to_json(w), c: self.c.to_json(w), d: self.d.to_json(w) }
    }
}

pub fn base_change_pair(p: &Pair, hom: &RingHom) -> Result<Pair> {
    p.base_change(hom)
}

pub fn dual_pair(p: &Pair) -> Pair {
    p.dual()
}

pub fn twist_pair(p: &Pair, c: &WittVector) -> Result<Pair> {
    p.twist(c)
}

pub fn tilde_morphism(f: &PairMorphism, n: usize) -> Result<Mat> {
    f.tilde(n)
}
