//! Lifting displays along square-zero extensions, the universal deformation
//! at finite order, and the rigidity series.

use std::collections::HashMap;

use serde::Serialize;

use crate::display::{display_make, Display};
use crate::error::{Error, Result};
use crate::matrix::{Arith, Mat};
use crate::pair::{pair_make, Coeff, PairMorphism};
use crate::ring::{BaseRing, Ring, RingElement, RingHom};
use crate::witt::{WittRing, WittVector};
use crate::zink::{ArtinLocal, PDExtension, ZinkRing};

/// Set-theoretic lifts along S → R, first preimage in element order.
#[derive(Debug, Clone)]
pub struct Lifter {
    table: HashMap<RingElement, RingElement>,
}

impl Lifter {
    pub fn new(ext: &PDExtension) -> Result<Self> {
        let s = ext.s.ring();
        let mut table = HashMap::new();
        for x in s.elements() {
            table.entry(ext.proj.apply(&x)?).or_insert(x);
        }
        Ok(Lifter { table })
    }

    pub fn lift(&self, x: &RingElement) -> Result<RingElement> {
        self.table.get(x).copied().ok_or_else(|| Error::RingMismatch("element outside the quotient".into()))
    }

    pub fn lift_vec(&self, from: &Coeff, to: &Coeff, v: &WittVector) -> Result<WittVector> {
        let comps: Vec<RingElement> = from.witt().comps(v).iter().map(|c| self.lift(c)).collect::<Result<_>>()?;
        let w = to.witt().from_comps(&comps)?;
        Ok(to.reduce(&w))
    }

    pub fn lift_mat(&self, from: &Coeff, to: &Coeff, m: &Mat) -> Result<Mat> {
        m.try_map(|x| self.lift_vec(from, to, x))
    }
}

/// A Dieudonné display for S/R together with its lift to S along a chosen filtration.
#[derive(Debug, Clone)]
pub struct GmLift {
    pub relative: Display,
    pub lifted: Display,
}

fn zink_of(d: &Display) -> Result<&ZinkRing> {
    match d.pair().ring() {
        Coeff::Zink(z) if z.relative_hom().is_none() => Ok(z),
        _ => Err(Error::RingMismatch("expected a Dieudonné display over a Zink ring".into())),
    }
}

/// The Dieudonné display for S/R lifting d, from set-theoretic lifts of its matrices.
pub fn relative_lift(d: &Display, ext: &PDExtension) -> Result<Display> {
    let z = zink_of(d)?;
    if z.base() != ext.r.ring() {
        return Err(Error::RingMismatch("display is not over the target of the extension".into()));
    }
    let rel = Coeff::Zink(ZinkRing::relative(ext, z.precision())?);
    let lifter = Lifter::new(ext)?;
    let basis = lifter.lift_mat(d.pair().ring(), &rel, d.pair().basis())?;
    let pair = pair_make(rel.clone(), d.h(), d.d(), basis)?;
    let small = rel.tilde_ring(d.n())?;
    let psi = lifter.lift_mat(d.small(), &small, d.psi())?;
    display_make(pair, d.n(), psi)
}

/// Lift d to S with the filtration given by a normal decomposition over Ŵ(S).
pub fn gm_lift(d: &Display, ext: &PDExtension, filtration: &Mat) -> Result<GmLift> {
    let relative = relative_lift(d, ext)?;
    let rel = relative.pair().ring().clone();
    let as_rel = pair_make(rel.clone(), d.h(), d.d(), filtration.clone())
        .map_err(|e| Error::InvalidFiltrationLift(e.to_string()))?;
    let f = relative
        .pair()
        .change_decomposition(filtration.clone())
        .map_err(|e| Error::InvalidFiltrationLift(e.to_string()))?;
    debug_assert!(f.source == as_rel);
    let ft = f.tilde(d.n())?;
    let psi = relative.psi().mul(relative.small(), &ft);
    let Coeff::Zink(zrel) = &rel else { unreachable!() };
    let abs = Coeff::Zink(ZinkRing::new(ext.s.clone(), zrel.precision())?);
    let pair = pair_make(abs, d.h(), d.d(), filtration.clone())?;
    let lifted = display_make(pair, d.n(), psi)?;
    Ok(GmLift { relative, lifted })
}

/// Every filtration lift in normal form B_S·(1, 0; [Y], 1) with Y over the kernel.
pub fn filtration_lifts(d: &Display, ext: &PDExtension) -> Result<Vec<Mat>> {
    let relative = relative_lift(d, ext)?;
    let rel = relative.pair().ring().clone();
    let (h, dd) = (d.h(), d.d());
    let k = (h - dd) * dd;
    let kernel = ext.kernel();
    let total = (kernel.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if total > crate::display::DEFAULT_BUDGET {
        return Err(Error::BudgetExceeded { needed: total, budget: crate::display::DEFAULT_BUDGET });
    }
    let mut out = Vec::new();
    for mut idx in 0..total as usize {
        let mut y = Vec::with_capacity(k);
        for _ in 0..k {
            y.push(kernel[idx % kernel.len()]);
            idx /= kernel.len();
        }
        let shear = Mat::from_fn(h, h, |i, j| {
            if i == j {
                rel.one()
            } else if i >= dd && j < dd {
                rel.teichmuller(&y[(i - dd) * dd + j])
            } else {
                rel.zero()
            }
        });
        out.push(relative.pair().basis().mul(&rel, &shear));
    }
    Ok(out)
}

/// The coordinate ring of the Grassmannian chart at a point, truncated at order N.
#[derive(Debug, Clone)]
pub struct DeformationRing {
    pub ring: Ring,
    /// (i, j): coordinate t_k sits in row d + i, column j of the shear.
    pub coords: Vec<(usize, usize)>,
    pub order: usize,
    pub coefficient_precision: Option<u32>,
}

impl DeformationRing {
    pub fn new(residue: &Ring, h: usize, d: usize, order: usize, mixed: Option<u32>) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroPrecision("deformation order must be at least 1"));
        }
        let coords: Vec<(usize, usize)> = (0..h - d).flat_map(|i| (0..d).map(move |j| (i, j))).collect();
        let base = match mixed {
            None => residue.clone(),
            Some(a) => {
                if !matches!(residue.kind(), crate::ring::Kind::Prime) {
                    return Err(Error::RingMismatch("mixed characteristic needs a prime residue field".into()));
                }
                BaseRing::integers_mod(residue.p(), a)?
            }
        };
        let ring = if coords.is_empty() {
            base
        } else {
            BaseRing::truncated_multi(base, coords.len() as u32, order as u32 + 1)?
        };
        Ok(DeformationRing { ring, coords, order, coefficient_precision: mixed })
    }

    /// Tangent dimension dim m/(m² + p).
    pub fn tangent_dimension(&self) -> usize {
        self.coords.len()
    }
}

#[derive(Debug, Clone)]
pub struct UniversalDeformation {
    pub ring: DeformationRing,
    pub display: Display,
    /// The display we deform, over the residue field.
    pub special: Display,
}

/// Inclusion of W(k) coefficients into the deformation coefficients.
fn constant_map(d0: &Display, target: &Coeff, x: &WittVector, small: bool) -> Result<WittVector> {
    let src = if small { d0.small() } else { d0.pair().ring() };
    match target {
        Coeff::Zink(z) => {
            let k = z.residue_witt();
            let trunc = src.witt().with_len(z.precision())?;
            let y = src.witt().truncate(x, &trunc)?;
            let wk = k.from_comps(trunc.comps(&y))?;
            Ok(z.section_vec(&wk))
        }
        Coeff::Witt(w) => {
            // only prime residue fields: W_m(F_p) = Z/p^m through integers
            let v = src.witt();
            let p = v.p() as i64;
            let modulus = p.pow(v.len() as u32);
            for k in 0..modulus {
                if v.from_int(k) == *x {
                    return Ok(w.from_int(k));
                }
            }
            Err(Error::RingMismatch("coefficient outside W(F_p)".into()))
        }
    }
}

/// The universal deformation of d0 at order N. With `mixed = Some(a)` the
/// coefficients are (Z/p^a)[t]/m^(N+1) and the display is truncated.
pub fn universal_deformation(d0: &Display, order: usize, mixed: Option<u32>) -> Result<UniversalDeformation> {
    let residue = d0.pair().ring().base().clone();
    if !residue.is_field() {
        return Err(Error::RingMismatch("the special fiber must be over a finite field".into()));
    }
    let (h, d) = (d0.h(), d0.d());
    let ring = DeformationRing::new(&residue, h, d, order, mixed)?;
    let coeff = match mixed {
        None => Coeff::Zink(ZinkRing::new(ArtinLocal::new(ring.ring.clone())?, d0.m())?),
        Some(_) => Coeff::Witt(WittRing::new(ring.ring.clone(), d0.m())?),
    };
    let small = coeff.tilde_ring(d0.n())?;
    let b0 = d0.pair().basis().try_map(|x| constant_map(d0, &coeff, x, false))?;
    let shear = Mat::from_fn(h, h, |i, j| {
        if i == j {
            coeff.one()
        } else if i >= d && j < d {
            let k = ring.coords.iter().position(|&c| c == (i - d, j)).expect("chart coordinate");
            coeff.teichmuller(&ring.ring.variable(k))
        } else {
            coeff.zero()
        }
    });
    let basis = b0.mul(&coeff, &shear);
    let pair = pair_make(coeff.clone(), h, d, basis)?;
    let psi = d0.psi().try_map(|x| constant_map(d0, &small, x, true))?;
    let display = display_make(pair, d0.n(), psi)?;
    Ok(UniversalDeformation { ring, display, special: d0.clone() })
}

/// Report of the first-order rigidity check.
#[derive(Debug, Clone, Serialize)]
pub struct RigidityCheck {
    pub passed: bool,
    pub residual_zero: bool,
}

impl UniversalDeformation {
    /// R^univ → R^univ/𝔞 with 𝔞 = m² + p·R.
    pub fn first_order_quotient(&self) -> Result<RingHom> {
        let r = &self.ring.ring;
        let k = self.special.pair().ring().base().clone();
        let target = if self.ring.coords.is_empty() {
            k.clone()
        } else {
            BaseRing::truncated_multi(k.clone(), self.ring.coords.len() as u32, 2)?
        };
        let images: Vec<RingElement> = (0..self.ring.coords.len()).map(|i| target.variable(i)).collect();
        if self.ring.coords.is_empty() {
            return match self.ring.coefficient_precision {
                None => Ok(RingHom::Identity(r.clone())),
                Some(_) => RingHom::reduction(r.clone(), k),
            };
        }
        let (base, ..) = r.truncated_parts().expect("truncated");
        let coeff = if self.ring.coefficient_precision.is_some() {
            RingHom::compose(vec![
                RingHom::reduction(base.clone(), k.clone())?,
                RingHom::constant_inclusion(k, target.clone())?,
            ])?
        } else {
            RingHom::constant_inclusion(base.clone(), target.clone())?
        };
        RingHom::substitution(r.clone(), coeff, images)
    }

    /// Ψ^univ mod 𝔞 against Ψ₀ transported through the relative tilde of the
    /// identity from the universal pair to the constant pair.
    pub fn rigidity_check(&self) -> Result<RigidityCheck> {
        let q = self.first_order_quotient()?;
        let reduced = self.display.base_change(&q)?;
        let target = q.target();
        let k = self.special.pair().ring().base().clone();
        let ext = PDExtension::new(self.reduction_to_residue(&target, &k)?)?;
        let (rel, rel_small) = match reduced.pair().ring() {
            Coeff::Zink(z) => {
                let r = Coeff::Zink(ZinkRing::relative(&ext, z.precision())?);
                let s = r.tilde_ring(reduced.n())?;
                (r, s)
            }
            Coeff::Witt(_) => (reduced.pair().ring().clone(), reduced.small().clone()),
        };
        let recast = |m: &Mat, c: &Coeff| -> Mat { m.map(|x| c.reduce(x)) };
        let univ = pair_make(rel.clone(), reduced.h(), reduced.d(), recast(reduced.pair().basis(), &rel))?;
        let constant_basis =
            self.special.pair().basis().try_map(|x| constant_map(&self.special, reduced.pair().ring(), x, false))?;
        let constant = pair_make(rel.clone(), reduced.h(), reduced.d(), recast(&constant_basis, &rel))?;
        let psi0 = self.special.psi().try_map(|x| constant_map(&self.special, reduced.small(), x, true))?;
        let passed = match (&rel, PairMorphism::new(&univ, &constant, Mat::identity(&rel, reduced.h()))) {
            (Coeff::Zink(_), Ok(f)) => {
                let ft = f.tilde(reduced.n())?;
                let transported = recast(&psi0, &rel_small).mul(&rel_small, &ft);
                transported == recast(reduced.psi(), &rel_small)
            }
            (Coeff::Witt(_), _) => psi0 == *reduced.psi(),
            (_, Err(_)) => false,
        };
        Ok(RigidityCheck { passed, residual_zero: passed })
    }

    fn reduction_to_residue(&self, source: &Ring, k: &Ring) -> Result<RingHom> {
        if source == k {
            return Ok(RingHom::Identity(k.clone()));
        }
        let (base, ..) = source.truncated_parts().expect("truncated");
        let zero = vec![k.zero(); self.ring.coords.len()];
        let coeff = if base == k { RingHom::Identity(k.clone()) } else { RingHom::reduction(base.clone(), k.clone())? };
        RingHom::substitution(source.clone(), coeff, zero)
    }

    /// t_k ↦ values[k]·ε into k[ε].
    pub fn specialize(&self, values: &[RingElement]) -> Result<Display> {
        let k = self.special.pair().ring().base().clone();
        let target = BaseRing::truncated(k.clone(), 2)?;
        let eps = target.variable(0);
        let images: Vec<RingElement> = values.iter().map(|v| target.mul(&target.embed_constant(v), &eps)).collect();
        if self.ring.coords.is_empty() {
            let inc = RingHom::constant_inclusion(k, target)?;
            return self.display.base_change(&inc);
        }
        let (base, ..) = self.ring.ring.truncated_parts().expect("truncated");
        let coeff = if self.ring.coefficient_precision.is_some() {
            RingHom::compose(vec![
                RingHom::reduction(base.clone(), k.clone())?,
                RingHom::constant_inclusion(k, target.clone())?,
            ])?
        } else {
            RingHom::constant_inclusion(base.clone(), target.clone())?
        };
        let hom = RingHom::substitution(self.ring.ring.clone(), coeff, images)?;
        self.display.base_change(&hom)
    }
}

/// T = 1 + Σ T_m with T_0 = A A₀⁻¹ − 1 and T_m = A σ(T_{m−1}) A₀⁻¹.
pub fn rigidity_series(a0: &Mat, a: &Mat, coeff: &ZinkRing) -> Result<Mat> {
    let r = Coeff::Zink(coeff.clone());
    let h = a.rows();
    let a0 = a0.map(|x| coeff.reduce(x));
    let a0_inv = a0.inv(&r).ok_or(Error::NonUnit)?;
    let (k_a, _) = split_mat(coeff, a);
    let (k_a0, nil0) = split_mat(coeff, &a0);
    if k_a != k_a0 || !nil0.is_zero(&r) {
        return Err(Error::RingMismatch("A does not reduce to A0".into()));
    }
    let id = Mat::identity(&r, h);
    let mut term = a.mul(&r, &a0_inv).sub(&r, &id);
    let mut total = id.clone();
    for _ in 0..64 {
        if term.is_zero(&r) {
            return Ok(total);
        }
        total = total.add(&r, &term);
        let st = term.try_map(|x| coeff.frobenius(x, coeff))?;
        term = a.mul(&r, &st).mul(&r, &a0_inv);
    }
    Err(Error::NonConvergent(64))
}

fn split_mat(z: &ZinkRing, m: &Mat) -> (Mat, Mat) {
    (m.map(|x| z.split(x).0), m.map(|x| z.split(x).1))
}

/// Whether T solves T = A σ(T) A₀⁻¹.
pub fn rigidity_residual(a0: &Mat, a: &Mat, t: &Mat, coeff: &ZinkRing) -> Result<Mat> {
    let r = Coeff::Zink(coeff.clone());
    let a0_inv = a0.inv(&r).ok_or(Error::NonUnit)?;
    let st = t.try_map(|x| coeff.frobenius(x, coeff))?;
    Ok(a.mul(&r, &st).mul(&r, &a0_inv).sub(&r, t))
}

/// How the F_q[ε]-points of the chart meet the lifts of the special fiber.
#[derive(Debug, Clone, Serialize)]
pub struct FiberCount {
    pub specializations: usize,
    pub filtration_lifts: usize,
    /// For each specialization, the index of the matching lift.
    pub matches: Vec<Option<usize>>,
    pub bijective: bool,
}

impl UniversalDeformation {
    /// Specialize at every F_q-point of the tangent space and match each
    /// result against the lifts of the special fiber to F_q[ε].
    pub fn first_order_fibers(&self) -> Result<FiberCount> {
        let k = self.special.pair().ring().base().clone();
        let dim = self.ring.tangent_dimension();
        let elems: Vec<RingElement> = k.elements().collect();
        let total = elems.len().checked_pow(dim as u32).unwrap_or(usize::MAX);
        if total as u128 > crate::display::DEFAULT_BUDGET {
            return Err(Error::BudgetExceeded { needed: total as u128, budget: crate::display::DEFAULT_BUDGET });
        }
        let ext = PDExtension::dual_numbers(k)?;
        let lifts: Vec<Display> = filtration_lifts(&self.special, &ext)?
            .into_iter()
            .map(|b| gm_lift(&self.special, &ext, &b).map(|g| g.lifted))
            .collect::<Result<_>>()?;
        let mut matches = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut values = Vec::with_capacity(dim);
            for _ in 0..dim {
                values.push(elems[idx % elems.len()]);
                idx /= elems.len();
            }
            let e = self.specialize(&values)?;
            let hit: Vec<usize> = lifts
                .iter()
                .enumerate()
                .filter(|(_, l)| l.pair().basis() == e.pair().basis() && l.psi() == e.psi())
                .map(|(i, _)| i)
                .collect();
            matches.push(if hit.len() == 1 { Some(hit[0]) } else { None });
        }
        let mut seen: Vec<usize> = matches.iter().flatten().copied().collect();
        seen.sort_unstable();
        seen.dedup();
        let bijective = matches.iter().all(Option::is_some) && seen.len() == lifts.len() && total == lifts.len();
        Ok(FiberCount { specializations: total, filtration_lifts: lifts.len(), matches, bijective })
    }

    pub fn report(&self) -> Result<DeformationReport> {
        let fibers = self.first_order_fibers()?;
        let rigidity = self.rigidity_check()?;
        Ok(DeformationReport {
            instance: DeformationInstance {
                ring: self.ring.ring.label(),
                h: self.special.h(),
                d: self.special.d(),
                order: self.ring.order,
                coefficient_precision: self.ring.coefficient_precision,
            },
            fiber_counts: fibers,
            tangent_dim: self.ring.tangent_dimension(),
            rigidity_residual: if rigidity.passed { 0 } else { 1 },
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeformationInstance {
    pub ring: String,
    pub h: usize,
    pub d: usize,
    pub order: usize,
    pub coefficient_precision: Option<u32>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DeformationReport {
    pub instance: DeformationInstance,
    pub fiber_counts: FiberCount,
    pub tangent_dim: usize,
    /// Zero when Ψ^univ reduces to the transported Ψ₀ exactly.
    pub rigidity_residual: usize,
}
