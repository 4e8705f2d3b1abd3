//! Isomorphism classes of (m, n)-truncated displays over F_q through the
//! presentation as pairs (U, Ψ) modulo GL_h(W_m), plus zips and shtukas.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::display::{display_make, Display};
use crate::error::{Error, Result};
use crate::matrix::{rref, Mat};
use crate::pair::{pair_make, Coeff, Pair, PairMorphism};
use crate::ring::{BaseRing, Ring};
use crate::witt::WittRing;

/// Gaussian binomial [h choose d]_q.
pub fn gaussian_binomial(q: u128, h: usize, d: usize) -> u128 {
    if d > h {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..d {
        num *= q.pow((h - i) as u32) - 1;
        den *= q.pow((i + 1) as u32) - 1;
    }
    num / den
}

/// Every d-dimensional subspace of k^h as a d×h reduced echelon matrix over W_1(k), sorted.
pub fn enumerate_grassmannian(field: &WittRing, h: usize, d: usize, budget: u128) -> Result<Vec<Mat>> {
    if d > h {
        return Err(Error::BadRank(format!("d = {d} exceeds h = {h}")));
    }
    if field.len() != 1 || !field.base().is_field() {
        return Err(Error::RingMismatch("subspaces live over W_1 of a field".into()));
    }
    let q = field.base().size();
    let needed = q.checked_pow(h as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let elems = field.elements();
    let mut out = Vec::new();
    for pivots in combinations(h, d) {
        let free: Vec<(usize, usize)> =
            (0..d).flat_map(|i| ((pivots[i] + 1)..h).filter(|j| !pivots.contains(j)).map(move |j| (i, j))).collect();
        let total = elems.len().pow(free.len() as u32);
        for mut idx in 0..total {
            let mut m = Mat::from_fn(d, h, |i, j| if pivots[i] == j { field.one() } else { field.zero() });
            for &(i, j) in &free {
                m[(i, j)] = elems[idx % elems.len()];
                idx /= elems.len();
            }
            out.push(m);
        }
    }
    out.sort();
    Ok(out)
}

fn combinations(h: usize, d: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, h: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..h {
            cur.push(i);
            go(i + 1, h, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, h, d, &mut Vec::new(), &mut out);
    out
}

/// Every invertible h×h matrix over a finite Witt ring, sorted.
pub fn general_linear(w: &WittRing, h: usize, budget: u128) -> Result<Vec<Mat>> {
    let elems = w.elements();
    let q = elems.len() as u128;
    let needed = q.checked_pow((h * h) as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut out = Vec::new();
    for mut idx in 0..needed as usize {
        let m = Mat::from_fn(h, h, |_, _| {
            let e = elems[idx % elems.len()];
            idx /= elems.len();
            e
        });
        if m.is_invertible(w) {
            out.push(m);
        }
    }
    out.sort();
    Ok(out)
}

/// Order of GL_h(W_m(F_q)).
pub fn gl_order(q: u128, h: usize, m: usize) -> u128 {
    let mut field: u128 = 1;
    for i in 0..h {
        field *= q.pow(h as u32) - q.pow(i as u32);
    }
    field * q.pow(((m - 1) * h * h) as u32)
}

/// The normal decomposition attached to an echelon U: pivot columns give L, the rest T.
pub fn canonical_basis(u: &Mat, big: &WittRing) -> Mat {
    let (d, h) = (u.rows(), u.cols());
    let pivots: Vec<usize> =
        (0..d).map(|i| (0..h).find(|&j| !big.base().is_zero(u[(i, j)].comp(0))).expect("echelon row")).collect();
    let rest: Vec<usize> = (0..h).filter(|j| !pivots.contains(j)).collect();
    Mat::from_fn(h, h, |i, k| {
        if k < d {
            big.teichmuller(u[(k, i)].comp(0))
        } else if i == rest[k - d] {
            big.one()
        } else {
            big.zero()
        }
    })
}

/// A point of the local model torsor: an echelon subspace and Ψ ∈ GL_h(W_n).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StackPoint {
    pub u: Mat,
    pub psi: Mat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusParams {
    pub h: usize,
    pub d: usize,
    pub p: u32,
    pub f: u32,
    pub m: usize,
    pub n: usize,
}

/// Rings and canonical pairs shared by every point with given parameters.
#[derive(Debug, Clone)]
pub struct StackContext {
    pub params: CensusParams,
    pub field: WittRing,
    pub big: WittRing,
    pub small: WittRing,
}

impl StackContext {
    pub fn new(params: CensusParams) -> Result<Self> {
        let CensusParams { h, d, p, f, m, n } = params;
        if d > h || h == 0 {
            return Err(Error::BadRank(format!("type ({h}, {d})")));
        }
        if n == 0 || m < n + 1 {
            return Err(Error::BadTruncation { m, n });
        }
        let k: Ring = if f == 1 { BaseRing::prime(p)? } else { BaseRing::galois(p, f)? };
        Ok(StackContext {
            params,
            field: WittRing::new(k.clone(), 1)?,
            big: WittRing::new(k.clone(), m)?,
            small: WittRing::new(k, n)?,
        })
    }

    pub fn pair(&self, u: &Mat) -> Result<Pair> {
        pair_make(self.big.clone(), self.params.h, self.params.d, canonical_basis(u, &self.big))
    }

    pub fn to_display(&self, x: &StackPoint) -> Result<Display> {
        display_make(self.pair(&x.u)?, self.params.n, x.psi.clone())
    }

    /// The point of a display presented through the canonical basis of its Hodge filtration.
    pub fn from_display(&self, disp: &Display) -> Result<StackPoint> {
        let u = hodge_subspace(disp);
        let rebased = disp.rebase(canonical_basis(&u, &self.big))?;
        Ok(StackPoint { u, psi: rebased.psi().clone() })
    }

    /// g·x with U' = echelon(ḡU) and Ψ' = ḡ_n Ψ g̃⁻¹.
    pub fn act(&self, g: &Mat, x: &StackPoint) -> Result<StackPoint> {
        let (u2, gn, gt_inv) = self.action_data(g, &x.u)?;
        Ok(StackPoint { u: u2, psi: gn.mul(&self.small, &x.psi).mul(&self.small, &gt_inv) })
    }

    fn action_data(&self, g: &Mat, u: &Mat) -> Result<(Mat, Mat, Mat)> {
        let u2 = self.image(g, u);
        self.action_data_with(g, &self.pair(u)?, &self.pair(&u2)?).map(|(gn, gt)| (u2, gn, gt))
    }

    fn image(&self, g: &Mat, u: &Mat) -> Mat {
        rref(&self.field, &u.mul(&self.field, &g.residue().transpose())).0
    }

    fn action_data_with(&self, g: &Mat, source: &Pair, target: &Pair) -> Result<(Mat, Mat)> {
        let f = PairMorphism::new(source, target, g.clone())?;
        let small = Coeff::Witt(self.small.clone());
        let gt_inv = f.tilde(self.params.n)?.inv(&small).ok_or(Error::NonUnit)?;
        let gn = g.truncate(&self.big, &self.small)?;
        Ok((gn, gt_inv))
    }

    /// The dual point, of type (h, h − d).
    pub fn dual(&self, x: &StackPoint) -> Result<(StackContext, StackPoint)> {
        let dual_ctx = StackContext::new(CensusParams { d: self.params.h - self.params.d, ..self.params })?;
        let disp = self.to_display(x)?.dual()?;
        let y = dual_ctx.from_display(&disp)?;
        Ok((dual_ctx, y))
    }

    /// Reduction to (m2, n2).
    pub fn truncate(&self, x: &StackPoint, m2: usize, n2: usize) -> Result<(StackContext, StackPoint)> {
        let ctx = StackContext::new(CensusParams { m: m2, n: n2, ..self.params })?;
        let disp = self.to_display(x)?.truncate(m2, n2)?;
        let y = ctx.from_display(&disp)?;
        Ok((ctx, y))
    }
}

fn hodge_subspace(disp: &Display) -> Mat {
    let l = disp.pair().l_part().residue();
    let field = disp.pair().ring().witt().with_len(1).expect("length one");
    rref(&field, &l.transpose()).0
}

#[derive(Debug, Clone)]
pub struct CensusClass {
    pub rep: StackPoint,
    pub aut_order: u128,
    pub orbit_size: u128,
}

#[derive(Debug, Clone)]
pub struct Census {
    pub params: CensusParams,
    pub classes: Vec<CensusClass>,
    pub total_points: u128,
    pub group_order: u128,
    /// Σ 1/|Aut| over classes.
    pub mass: BigRational,
    pub orbit_stabilizer_ok: bool,
}

impl Census {
    pub fn mass_ok(&self) -> bool {
        self.mass == BigRational::new(BigInt::from(self.total_points), BigInt::from(self.group_order))
    }

    /// Class index of every point, in the enumeration order of X.
    pub fn to_json(&self, ctx: &StackContext) -> CensusJson {
        let expected = BigRational::new(BigInt::from(self.total_points), BigInt::from(self.group_order));
        CensusJson {
            params: self.params,
            classes: self
                .classes
                .iter()
                .map(|c| ClassJson {
                    rep: PointJson { u: c.rep.u.to_json(&ctx.field), psi: c.rep.psi.to_json(&ctx.small) },
                    aut_order: c.aut_order as u64,
                    orbit_size: c.orbit_size as u64,
                })
                .collect(),
            totals: Totals {
                points: self.total_points as u64,
                group: self.group_order as u64,
                classes: self.classes.len(),
            },
            mass_check: MassCheck {
                mass: self.mass.to_string(),
                expected: expected.to_string(),
                ok: self.mass_ok(),
                orbit_stabilizer: self.orbit_stabilizer_ok,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub u: Vec<Vec<Vec<Vec<u32>>>>,
    pub psi: Vec<Vec<Vec<Vec<u32>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassJson {
    pub rep: PointJson,
    pub aut_order: u64,
    pub orbit_size: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub points: u64,
    pub group: u64,
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MassCheck {
    pub mass: String,
    pub expected: String,
    pub ok: bool,
    pub orbit_stabilizer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CensusJson {
    pub params: CensusParams,
    pub classes: Vec<ClassJson>,
    pub totals: Totals,
    pub mass_check: MassCheck,
}

/// All points of X = Grass × GL_h(W_n), sorted.
pub fn stack_points(ctx: &StackContext, budget: u128) -> Result<Vec<StackPoint>> {
    let CensusParams { h, d, .. } = ctx.params;
    let q = ctx.field.base().size();
    let needed = gaussian_binomial(q, h, d).saturating_mul(gl_order(q, h, ctx.params.n));
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let grass = enumerate_grassmannian(&ctx.field, h, d, budget)?;
    let psis = general_linear(&ctx.small, h, budget)?;
    Ok(grass.iter().flat_map(|u| psis.iter().map(move |psi| StackPoint { u: u.clone(), psi: psi.clone() })).collect())
}

/// Orbit decomposition of X under GL_h(W_m) with representatives the lexicographic minima.
pub fn run_census(params: CensusParams, budget: u128) -> Result<Census> {
    let ctx = StackContext::new(params)?;
    let CensusParams { h, d, .. } = params;
    let q = ctx.field.base().size();
    let group_order = gl_order(q, h, params.m);
    let grass_count = gaussian_binomial(q, h, d);
    let work = grass_count.saturating_mul(group_order);
    if work > budget {
        return Err(Error::BudgetExceeded { needed: work, budget });
    }
    let points = stack_points(&ctx, budget)?;
    let group = general_linear(&ctx.big, h, budget)?;
    debug_assert_eq!(group.len() as u128, group_order);
    let grass = enumerate_grassmannian(&ctx.field, h, d, budget)?;
    let index: HashMap<&Mat, usize> = grass.iter().enumerate().map(|(i, u)| (u, i)).collect();
    // action data per (U, g), independent of Ψ
    let pairs = grass.iter().map(|u| ctx.pair(u)).collect::<Result<Vec<_>>>()?;
    let mut table: Vec<Vec<(usize, Mat, Mat)>> = Vec::with_capacity(grass.len());
    for (ui, u) in grass.iter().enumerate() {
        let row = group
            .iter()
            .map(|g| {
                let uj = index[&ctx.image(g, u)];
                let (gn, gt) = ctx.action_data_with(g, &pairs[ui], &pairs[uj])?;
                Ok((uj, gn, gt))
            })
            .collect::<Result<Vec<_>>>()?;
        table.push(row);
    }
    let mut seen: HashSet<StackPoint> = HashSet::with_capacity(points.len());
    let mut classes = Vec::new();
    let mut evaluations: u128 = 0;
    let mut orbit_stabilizer_ok = true;
    for x in &points {
        if seen.contains(x) {
            continue;
        }
        evaluations += group_order;
        if evaluations > budget {
            return Err(Error::BudgetExceeded { needed: evaluations, budget });
        }
        let ui = index[&x.u];
        let mut orbit: HashSet<StackPoint> = HashSet::new();
        let mut stabilizer: u128 = 0;
        for (uj, gn, gt) in &table[ui] {
            let y = StackPoint { u: grass[*uj].clone(), psi: gn.mul(&ctx.small, &x.psi).mul(&ctx.small, gt) };
            if y == *x {
                stabilizer += 1;
            }
            orbit.insert(y);
        }
        let size = orbit.len() as u128;
        orbit_stabilizer_ok &= size * stabilizer == group_order;
        seen.extend(orbit);
        classes.push(CensusClass { rep: x.clone(), aut_order: stabilizer, orbit_size: size });
    }
    let mass = classes
        .iter()
        .map(|c| BigRational::new(BigInt::from(1), BigInt::from(c.aut_order)))
        .fold(BigRational::zero(), |a, b| a + b);
    orbit_stabilizer_ok &= classes.iter().map(|c| c.orbit_size).sum::<u128>() == points.len() as u128;
    Ok(Census { params, classes, total_points: points.len() as u128, group_order, mass, orbit_stabilizer_ok })
}

/// Outcome of re-checking a stored census.
#[derive(Debug, Clone, Serialize)]
pub struct CensusVerification {
    pub partition: bool,
    pub orbit_stabilizer: bool,
    pub mass: bool,
    pub matches_recomputation: bool,
}

impl CensusVerification {
    pub fn passed(&self) -> bool {
        self.partition && self.orbit_stabilizer && self.mass && self.matches_recomputation
    }
}

pub fn verify_census(stored: &CensusJson, budget: u128) -> Result<CensusVerification> {
    let total: u64 = stored.classes.iter().map(|c| c.orbit_size).sum();
    let partition = total == stored.totals.points;
    let orbit_stabilizer = stored.classes.iter().all(|c| c.orbit_size * c.aut_order == stored.totals.group);
    let mass_sum = stored
        .classes
        .iter()
        .map(|c| BigRational::new(BigInt::from(1), BigInt::from(c.aut_order)))
        .fold(BigRational::zero(), |a, b| a + b);
    let mass = mass_sum == BigRational::new(BigInt::from(stored.totals.points), BigInt::from(stored.totals.group));
    let ctx = StackContext::new(stored.params)?;
    let fresh = run_census(stored.params, budget)?.to_json(&ctx);
    Ok(CensusVerification { partition, orbit_stabilizer, mass, matches_recomputation: fresh == *stored })
}

/// Hodge and conjugate filtrations of a display over a finite field.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipData {
    /// d×h echelon rows spanning M₁/IM.
    pub hodge: Mat,
    /// (h−d)×h echelon rows spanning the image of Φ mod p.
    pub conjugate: Mat,
    /// Φ mod p in standard coordinates.
    pub frobenius_mod_p: Mat,
}

pub fn zip_extract(disp: &Display) -> Result<ZipData> {
    let r = disp.pair().ring();
    if r.is_zink() || !r.base().is_field() {
        return Err(Error::RingMismatch("zips need a display over W(F_q)".into()));
    }
    let phi = disp.frobenius_phi()?.residue();
    let field = r.witt().with_len(1)?;
    let (conjugate, _) = rref(&field, &phi.transpose());
    Ok(ZipData { hodge: hodge_subspace(disp), conjugate, frobenius_mod_p: phi })
}

/// g = left · diag(p^{−v}) · right with integral invertible left and right.
#[derive(Debug, Clone)]
pub struct ShtukaDatum {
    pub left: Mat,
    pub valuations: Vec<u32>,
    pub right: Mat,
}

/// The display with M₁ = p·g·Λ and Ψ induced by p⁻¹σ(g)⁻¹, truncated to (m, n)
/// and presented through the canonical basis of its Hodge filtration.
pub fn shtuka_to_display(g: &ShtukaDatum, w: &WittRing, m: usize, n: usize) -> Result<Display> {
    let h = g.valuations.len();
    if g.valuations.iter().any(|&v| v > 1) {
        return Err(Error::ValuationMismatch(format!("valuations {:?} are not minuscule", g.valuations)));
    }
    if g.left.rows() != h || g.right.rows() != h || !g.left.is_square() || !g.right.is_square() {
        return Err(Error::ValuationMismatch("valuation data does not match the matrix size".into()));
    }
    if !g.left.is_invertible(w) || !g.right.is_invertible(w) {
        return Err(Error::NonUnit);
    }
    if n == 0 || m < n + 1 || m > w.len() {
        return Err(Error::BadTruncation { m, n });
    }
    let order: Vec<usize> =
        (0..h).filter(|&j| g.valuations[j] == 1).chain((0..h).filter(|&j| g.valuations[j] == 0)).collect();
    let d = g.valuations.iter().filter(|&&v| v == 1).count();
    let big = w.with_len(m)?;
    let small = w.with_len(n)?;
    let perm = |r: &WittRing| Mat::from_fn(h, h, |i, k| if order[k] == i { r.one() } else { r.zero() });
    let basis = g.left.mul(w, &perm(w)).truncate(w, &big)?;
    let sigma_right = g.right.try_map(|x| w.frob_endo(x))?;
    let psi = sigma_right.inv(w).ok_or(Error::NonUnit)?.truncate(w, &small)?.mul(&small, &perm(&small));
    let disp = display_make(pair_make(big.clone(), h, d, basis)?, n, psi)?;
    let u = hodge_subspace(&disp);
    disp.rebase(canonical_basis(&u, &big))
}
