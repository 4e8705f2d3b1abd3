//! Truncated and Dieudonné displays: a pair together with Ψ: M̃₁ ≅ W_n ⊗ M.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Arith, Mat};
use crate::pair::{Coeff, Pair, PairJson, PairMorphism};
use crate::ring::RingHom;
use crate::witt::WittVector;

/// Default bound on exhaustive isomorphism searches.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Display {
    pair: Pair,
    small: Coeff,
    psi: Mat,
}

#[derive(Debug, Clone, Serialize)]
pub struct DisplayJson {
    pub pair: PairJson,
    pub psi: Vec<Vec<Vec<Vec<u32>>>>,
    pub m: usize,
    pub n: usize,
}

pub fn display_make(pair: Pair, n: usize, psi: Mat) -> Result<Display> {
    let small = pair.ring().tilde_ring(n)?;
    if psi.rows() != pair.h() || psi.cols() != pair.h() {
        return Err(Error::BadRank("psi must be h x h".into()));
    }
    psi.check(&small)?;
    if !psi.is_invertible(&small) {
        return Err(Error::SingularPsi);
    }
    Ok(Display { pair, small, psi })
}

impl Display {
    pub fn pair(&self) -> &Pair {
        &self.pair
    }

    pub fn psi(&self) -> &Mat {
        &self.psi
    }

    /// The level-n coefficient ring carrying Ψ.
    pub fn small(&self) -> &Coeff {
        &self.small
    }

    pub fn h(&self) -> usize {
        self.pair.h()
    }

    pub fn d(&self) -> usize {
        self.pair.d()
    }

    pub fn m(&self) -> usize {
        self.pair.ring().len()
    }

    pub fn n(&self) -> usize {
        self.small.len()
    }

    /// Φ = Ψ ∘ j from standard coordinates of M^σ to those of W_n ⊗ M.
    pub fn frobenius_phi(&self) -> Result<Mat> {
        let t = self.pair.tilde(self.n())?;
        Ok(self.psi.mul(&self.small, &t.section))
    }

    /// Index of the first nonzero Witt component of det Φ.
    pub fn phi_det_valuation(&self) -> Result<usize> {
        let phi = self.frobenius_phi()?;
        let det = phi.det(&self.small);
        Ok(self.small.witt().valuation(&det))
    }

    pub fn dual(&self) -> Result<Display> {
        let s = &self.small;
        let iso = self.pair.tilde_dual_iso(self.n())?;
        let inv_t = self.psi.inv(s).ok_or(Error::SingularPsi)?.transpose();
        Ok(Display { pair: self.pair.dual(), small: s.clone(), psi: inv_t.mul(s, &iso) })
    }

    /// Twist by the rank-one display (W·e, ι) presented through c.
    pub fn twist(&self, c: &WittVector, iota: &WittVector) -> Result<Display> {
        let s = &self.small;
        if !s.is_unit(iota) {
            return Err(Error::NonUnit);
        }
        let pair = self.pair.twist(c)?;
        let iso = self.pair.tilde_twist_iso(c, self.n())?;
        let psi = self.psi.mul(s, &iso).scale(s, iota);
        Ok(Display { pair, small: s.clone(), psi })
    }

    pub fn truncate(&self, m2: usize, n2: usize) -> Result<Display> {
        if m2 < n2 + 1 || m2 > self.m() || n2 > self.n() || n2 == 0 {
            return Err(Error::BadTruncation { m: m2, n: n2 });
        }
        let r = self.pair.ring();
        let big = r.truncated(m2)?;
        let small = self.small.truncated(n2)?;
        let basis = r.mat_truncate(self.pair.basis(), &big)?;
        let pair = crate::pair::pair_make(big, self.h(), self.d(), basis)?;
        let psi = self.small.mat_truncate(&self.psi, &small)?;
        display_make(pair, n2, psi)
    }

    pub fn base_change(&self, hom: &RingHom) -> Result<Display> {
        let pair = self.pair.base_change(hom)?;
        let small = self.small.base_change(hom)?;
        let psi = self.psi.try_map(|x| self.small.map_elem(x, hom, &small))?;
        display_make(pair, self.n(), psi)
    }

    /// The same display presented through a different normal decomposition.
    pub fn rebase(&self, new_basis: Mat) -> Result<Display> {
        let f = self.pair.change_decomposition(new_basis)?;
        let ft = f.tilde(self.n())?;
        Ok(Display { pair: f.source.clone(), small: self.small.clone(), psi: self.psi.mul(&self.small, &ft) })
    }

    /// g·D: the display whose pair has basis gB and whose Ψ is ḡ Ψ.
    pub fn transport(&self, g: &Mat) -> Result<Display> {
        let r = self.pair.ring();
        let basis = g.mul(r, self.pair.basis());
        let pair = crate::pair::pair_make(r.clone(), self.h(), self.d(), basis)?;
        let gn = r.mat_truncate(g, &self.small)?;
        Ok(Display { pair, small: self.small.clone(), psi: gn.mul(&self.small, &self.psi) })
    }

    /// Whether g ∈ GL_h(W_m) is an isomorphism self → other.
    pub fn is_isomorphism(&self, g: &Mat, other: &Display) -> bool {
        self.iso_residual(g, other).map(|m| m.is_zero(&self.small)).unwrap_or(false)
    }

    /// Ψ'·g̃ − ḡ_n·Ψ, or an error if g does not respect the filtrations.
    pub fn iso_residual(&self, g: &Mat, other: &Display) -> Result<Mat> {
        let r = self.pair.ring();
        if !g.is_invertible(r) {
            return Err(Error::NonUnit);
        }
        let f = PairMorphism::new(&self.pair, &other.pair, g.clone())?;
        let gt = f.tilde(self.n())?;
        let gn = r.mat_truncate(g, &self.small)?;
        let s = &self.small;
        Ok(other.psi.mul(s, &gt).sub(s, &gn.mul(s, &self.psi)))
    }

    /// The lexicographically least isomorphism self → other, by exhaustive search.
    pub fn isomorphic(&self, other: &Display, budget: u128) -> Result<Option<Mat>> {
        if self.h() != other.h()
            || self.d() != other.d()
            || self.pair.ring() != other.pair.ring()
            || self.small != other.small
        {
            return Ok(None);
        }
        let r = self.pair.ring();
        let elems = r.elements();
        let h = self.h();
        let q = elems.len() as u128;
        let needed = q.checked_pow((h * h) as u32).unwrap_or(u128::MAX);
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        let decode = |mut idx: u64| -> Mat {
            let mut entries = vec![elems[0]; h * h];
            for k in (0..h * h).rev() {
                entries[k] = elems[(idx % q as u64) as usize];
                idx /= q as u64;
            }
            Mat::from_fn(h, h, |i, j| entries[i * h + j])
        };
        let hit = (0..needed as u64).into_par_iter().find_first(|&idx| self.is_isomorphism(&decode(idx), other));
        Ok(hit.map(decode))
    }

    pub fn polarization_check(&self, pairing: &Mat, c: &WittVector, iota: &WittVector) -> Result<PolarizationReport> {
        let h = self.h();
        if h % 2 == 1 {
            return Err(Error::OddRank(h));
        }
        let r = self.pair.ring();
        let alternating = pairing.rows() == h
            && pairing.cols() == h
            && pairing.transpose() == pairing.map(|x| r.neg(x))
            && (0..h).all(|i| r.is_zero(&pairing[(i, i)]))
            && pairing.is_invertible(r);
        if !alternating {
            return Err(Error::NotAlternating);
        }
        let target = self.dual()?.twist(c, iota)?;
        match self.iso_residual(pairing, &target) {
            Ok(residual) => {
                let passed = residual.is_zero(&self.small);
                Ok(PolarizationReport { filtration_ok: true, residual: Some(residual), passed })
            }
            Err(Error::NotAPairMorphism) => {
                Ok(PolarizationReport { filtration_ok: false, residual: None, passed: false })
            }
            Err(e) => Err(e),
        }
    }

    pub fn to_json(&self) -> DisplayJson {
        DisplayJson { pair: self.pair.to_json(), psi: self.psi.to_json(self.small.witt()), m: self.m(), n: self.n() }
    }
}

/// Outcome of checking a pairing against a display.
#[derive(Debug, Clone)]
pub struct PolarizationReport {
    /// The pairing carries M₁ onto the filtration of the twisted dual.
    pub filtration_ok: bool,
    pub residual: Option<Mat>,
    pub passed: bool,
}

pub fn frobenius_phi(d: &Display) -> Result<Mat> {
    d.frobenius_phi()
}

pub fn dual_display(d: &Display) -> Result<Display> {
    d.dual()
}

pub fn twist_display(d: &Display, c: &WittVector, iota: &WittVector) -> Result<Display> {
    d.twist(c, iota)
}

pub fn truncate_display(d: &Display, m: usize, n: usize) -> Result<Display> {
    d.truncate(m, n)
}

pub fn polarization_check(d: &Display, pairing: &Mat, c: &WittVector, iota: &WittVector) -> Result<PolarizationReport> {
    d.polarization_check(pairing, c, iota)
}

pub fn display_isomorphic(a: &Display, b: &Display, budget: u128) -> Result<Option<Mat>> {
    a.isomorphic(b, budget)
}
