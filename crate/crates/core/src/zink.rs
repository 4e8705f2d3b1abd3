//! A finite-precision model of the Zink ring of an Artinian local ring of
//! characteristic p, and square-zero extensions with trivial divided powers.
//!
//! An element is s(w) + u with w ∈ W_N(k), s the section k → R, and u a Witt
//! vector with entries in the maximal ideal. The model is the quotient of
//! W_N(R) by the ideal of those u that vanish below level `bound`, so the
//! W(k)-part is kept modulo p^N and the nilpotent part exactly at levels
//! below the bound.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ring::{BaseRing, Ring, RingElement, RingHom};
use crate::witt::{WittRing, WittVector};

/// A local ring R with nilpotent maximal ideal m and residue field k.
#[derive(Debug, Clone)]
pub struct ArtinLocal {
    ring: Ring,
    residue: Ring,
    generators: Vec<RingElement>,
    nu: u32,
}

impl ArtinLocal {
    pub fn new(ring: Ring) -> Result<Self> {
        let residue =
            ring.residue_field().ok_or_else(|| Error::RingMismatch(format!("{} is not local", ring.label())))?;
        let mut generators = Vec::new();
        if let Some((_, vars, ..)) = ring.truncated_parts() {
            generators.extend((0..vars as usize).map(|i| ring.variable(i)));
        }
        if !ring.is_char_p() {
            generators.push(ring.from_i64(ring.p() as i64));
        }
        let nu = nilpotency(&ring, &generators)?;
        Ok(ArtinLocal { ring, residue, generators, nu })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn residue(&self) -> &Ring {
        &self.residue
    }

    /// Ideal generators of the maximal ideal.
    pub fn generators(&self) -> &[RingElement] {
        &self.generators
    }

    /// Least ν with m^ν = 0.
    pub fn nilpotency(&self) -> u32 {
        self.nu
    }

    pub fn max_ideal(&self) -> Vec<RingElement> {
        self.ring.elements().filter(|x| self.ring.in_max_ideal(x)).collect()
    }
}

fn nilpotency(ring: &Ring, gens: &[RingElement]) -> Result<u32> {
    if gens.is_empty() {
        return Ok(1);
    }
    // Products of ν generators, as a set, grown one factor at a time.
    let mut layer: Vec<RingElement> = vec![ring.one()];
    for nu in 1..=64u32 {
        let mut next: Vec<RingElement> =
            layer.iter().flat_map(|x| gens.iter().map(move |g| ring.mul(x, g))).filter(|x| !ring.is_zero(x)).collect();
        next.sort();
        next.dedup();
        if next.is_empty() {
            return Ok(nu);
        }
        layer = next;
    }
    Err(Error::TooLarge("maximal ideal is not nilpotent within 64 steps".into()))
}

#[derive(Debug, Clone)]
struct ZinkInner {
    art: ArtinLocal,
    w: WittRing,
    wk: WittRing,
    bound: usize,
    relative: Option<RingHom>,
}

/// Ŵ(R) at precision N. Elements are canonical representatives in W_N(R).
#[derive(Debug, Clone)]
pub struct ZinkRing {
    inner: Arc<ZinkInner>,
}

impl PartialEq for ZinkRing {
    fn eq(&self, other: &Self) -> bool {
        self.inner.w == other.inner.w && self.inner.bound == other.inner.bound
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZinkJson {
    pub wk: Vec<Vec<u32>>,
    pub nilpart: Vec<(usize, Vec<u32>)>,
    pub precision: usize,
}

impl ZinkRing {
    /// Precision N ≥ 2 with the nilpotent part kept below level N - 1.
    pub fn new(art: ArtinLocal, precision: usize) -> Result<Self> {
        if precision < 2 {
            return Err(Error::ZeroPrecision("Zink precision must be at least 2"));
        }
        Self::with_bound(art, precision, precision - 1)
    }

    pub fn with_bound(art: ArtinLocal, precision: usize, bound: usize) -> Result<Self> {
        if precision == 0 {
            return Err(Error::ZeroPrecision("Zink precision must be at least 1"));
        }
        if !art.ring.is_char_p() {
            return Err(Error::NoSection(format!(
                "{} has characteristic {}",
                art.ring.label(),
                art.ring.characteristic()
            )));
        }
        art.ring.section(&art.residue.one())?;
        let w = WittRing::new(art.ring.clone(), precision)?;
        let wk = WittRing::new(art.residue.clone(), precision)?;
        Ok(ZinkRing { inner: Arc::new(ZinkInner { art, w, wk, bound: bound.min(precision), relative: None }) })
    }

    /// Ŵ(S) for the source of a square-zero extension, with the relative
    /// ideal Î_{S/R} as its distinguished ideal.
    pub fn relative(ext: &PDExtension, precision: usize) -> Result<Self> {
        let z = Self::new(ext.s.clone(), precision)?;
        Ok(z.with_relative(Some(ext.proj.clone())))
    }

    fn with_relative(&self, relative: Option<RingHom>) -> Self {
        let mut inner = (*self.inner).clone();
        inner.relative = relative;
        ZinkRing { inner: Arc::new(inner) }
    }

    pub fn precision(&self) -> usize {
        self.inner.w.len()
    }

    pub fn bound(&self) -> usize {
        self.inner.bound
    }

    pub fn base(&self) -> &Ring {
        self.inner.w.base()
    }

    pub fn artin(&self) -> &ArtinLocal {
        &self.inner.art
    }

    pub fn witt(&self) -> &WittRing {
        &self.inner.w
    }

    pub fn residue_witt(&self) -> &WittRing {
        &self.inner.wk
    }

    pub fn relative_hom(&self) -> Option<&RingHom> {
        self.inner.relative.as_ref()
    }

    /// The same ring one level lower (precision and bound both drop by one).
    pub fn lower(&self) -> Result<ZinkRing> {
        let z = Self::with_bound(self.inner.art.clone(), self.precision() - 1, self.inner.bound.saturating_sub(1))?;
        Ok(z.with_relative(self.inner.relative.clone()))
    }

    pub fn section_vec(&self, wk: &WittVector) -> WittVector {
        let art = &self.inner.art;
        self.inner.w.map(wk, |c| art.ring.section(c)).expect("section exists by construction")
    }

    /// (W(k)-part, nilpotent part) of a value.
    pub fn split(&self, v: &WittVector) -> (WittVector, WittVector) {
        let art = &self.inner.art;
        let wk = self.inner.wk.map(v, |c| art.ring.to_residue(c)).expect("local ring");
        let nil = self.inner.w.sub(v, &self.section_vec(&wk));
        (wk, nil)
    }

    pub fn from_parts(&self, wk: &WittVector, nil: &WittVector) -> Result<WittVector> {
        let w = &self.inner.w;
        if w.comps(nil).iter().any(|c| !self.inner.art.ring.in_max_ideal(c)) {
            return Err(Error::RingMismatch("nilpotent part outside the maximal ideal".into()));
        }
        let cut = self.cut(nil);
        Ok(w.add(&self.section_vec(wk), &cut))
    }

    fn cut(&self, nil: &WittVector) -> WittVector {
        let w = &self.inner.w;
        let comps: Vec<RingElement> = w
            .comps(nil)
            .iter()
            .enumerate()
            .map(|(i, c)| if i < self.inner.bound { *c } else { RingElement::default() })
            .collect();
        w.from_comps(&comps).expect("same ring")
    }

    /// Canonical representative of the class of v ∈ W_N(R).
    pub fn reduce(&self, v: &WittVector) -> WittVector {
        let w = &self.inner.w;
        let (wk, nil) = self.split(v);
        let b = self.inner.bound;
        if w.comps(&nil)[b..].iter().all(|c| self.base().is_zero(c)) {
            return *v;
        }
        w.add(&self.section_vec(&wk), &self.cut(&nil))
    }

    pub fn contains(&self, v: &WittVector) -> bool {
        self.inner.w.contains(v) && self.reduce(v) == *v
    }

    pub fn zero(&self) -> WittVector {
        self.inner.w.zero()
    }

    pub fn one(&self) -> WittVector {
        self.inner.w.one()
    }

    pub fn add(&self, a: &WittVector, b: &WittVector) -> WittVector {
        self.reduce(&self.inner.w.add(a, b))
    }

    pub fn sub(&self, a: &WittVector, b: &WittVector) -> WittVector {
        self.reduce(&self.inner.w.sub(a, b))
    }

    pub fn neg(&self, a: &WittVector) -> WittVector {
        self.reduce(&self.inner.w.neg(a))
    }

    pub fn mul(&self, a: &WittVector, b: &WittVector) -> WittVector {
        self.reduce(&self.inner.w.mul(a, b))
    }

    pub fn inv(&self, a: &WittVector) -> Option<WittVector> {
        self.inner.w.inv(a).map(|x| self.reduce(&x))
    }

    pub fn is_unit(&self, a: &WittVector) -> bool {
        self.inner.w.is_unit(a)
    }

    pub fn teichmuller(&self, r: &RingElement) -> WittVector {
        self.reduce(&self.inner.w.teichmuller(r))
    }

    pub fn random<G: Rng + ?Sized>(&self, rng: &mut G) -> WittVector {
        let wk = self.inner.wk.random(rng);
        let ring = &self.inner.art.ring;
        let comps: Vec<RingElement> = (0..self.precision())
            .map(|i| {
                if i < self.inner.bound {
                    let x = ring.random(rng);
                    let s = ring.section(&ring.to_residue(&x).expect("local")).expect("section");
                    ring.sub(&x, &s)
                } else {
                    RingElement::default()
                }
            })
            .collect();
        let nil = self.inner.w.from_comps(&comps).expect("length");
        self.from_parts(&wk, &nil).expect("nilpotent by construction")
    }

    /// Every element: |W_N(k)| · |m|^bound of them.
    pub fn elements(&self) -> Vec<WittVector> {
        let m = self.inner.art.max_ideal();
        let b = self.inner.bound;
        let n = self.precision();
        let mut nils = vec![vec![RingElement::default(); n]];
        for level in 0..b {
            nils = nils
                .into_iter()
                .flat_map(|v| {
                    m.iter().map(move |x| {
                        let mut v = v.clone();
                        v[level] = *x;
                        v
                    })
                })
                .collect();
        }
        let mut out = Vec::new();
        for wk in self.inner.wk.elements() {
            for nil in &nils {
                let nil = self.inner.w.from_comps(nil).expect("length");
                out.push(self.from_parts(&wk, &nil).expect("nilpotent"));
            }
        }
        out.sort();
        out
    }

    /// Membership in the distinguished ideal: Î_R, or Î_{S/R} for a relative ring.
    pub fn in_ideal(&self, x: &WittVector) -> bool {
        let c0 = self.inner.w.comps(x)[0];
        match &self.inner.relative {
            None => self.base().is_zero(&c0),
            Some(h) => h.apply(&c0).map(|y| h.target().is_zero(&y)).unwrap_or(false),
        }
    }

    fn check_target(&self, target: &ZinkRing, drop: usize) -> Result<()> {
        if target.base() != self.base() {
            return Err(Error::RingMismatch("Zink rings over different bases".into()));
        }
        if target.precision() + drop > self.precision() {
            return Err(Error::LengthTooShort { needed: target.precision() + drop, have: self.precision() });
        }
        Ok(())
    }

    /// σ into a ring of precision at most N.
    pub fn frobenius(&self, x: &WittVector, target: &ZinkRing) -> Result<WittVector> {
        self.check_target(target, 0)?;
        let w = &self.inner.w;
        let f = w.frob_endo(x)?;
        let t = w.truncate(&f, target.witt())?;
        Ok(target.reduce(&t))
    }

    /// V: a ring of precision N - 1 (or less) into this one.
    pub fn verschiebung(&self, y: &WittVector) -> WittVector {
        self.reduce(&self.inner.w.verschiebung(y))
    }

    /// x = x_a + x_I with x_a ∈ a embedded as (x_a, 0, 0, ...) and x_I ∈ Î_S.
    pub fn relative_augmentation_split(&self, x: &WittVector) -> Result<(WittVector, RingElement)> {
        if !self.in_ideal(x) {
            return Err(Error::NotInRelativeIdeal);
        }
        let w = &self.inner.w;
        let kern = w.comps(x)[0];
        let aug = self.sub(x, &w.teichmuller(&kern));
        Ok((aug, kern))
    }

    /// σ^div on Î_S, extended by zero on a for a relative ring.
    pub fn divided_frobenius(&self, x: &WittVector, target: &ZinkRing) -> Result<WittVector> {
        self.check_target(target, 1)?;
        let aug = match &self.inner.relative {
            None => {
                if !self.in_ideal(x) {
                    return Err(Error::NotInAugmentationIdeal);
                }
                *x
            }
            Some(_) => self.relative_augmentation_split(x)?.0,
        };
        let w = &self.inner.w;
        let shifted: Vec<RingElement> = (0..target.precision()).map(|i| w.comps(&aug)[i + 1]).collect();
        let y = target.witt().from_comps(&shifted)?;
        Ok(target.reduce(&y))
    }

    pub fn to_json(&self, x: &WittVector) -> ZinkJson {
        let (wk, nil) = self.split(x);
        let ring = self.base();
        ZinkJson {
            wk: self.inner.wk.to_json(&wk).comps,
            nilpart: self
                .inner
                .w
                .comps(&nil)
                .iter()
                .enumerate()
                .filter(|(_, c)| !ring.is_zero(c))
                .map(|(i, c)| (i, ring.coords(c)))
                .collect(),
            precision: self.precision(),
        }
    }
}

/// A surjection S → R of local rings whose kernel a satisfies a² = 0, with
/// the trivial divided powers on a.
#[derive(Debug, Clone)]
pub struct PDExtension {
    pub s: ArtinLocal,
    pub r: ArtinLocal,
    pub proj: RingHom,
    kernel: Vec<RingElement>,
}

impl PDExtension {
    pub fn new(proj: RingHom) -> Result<Self> {
        let (src, tgt) = (proj.source(), proj.target());
        if src.size() > 1 << 20 {
            return Err(Error::TooLarge(format!("{} elements", src.size())));
        }
        let s = ArtinLocal::new(src.clone())?;
        let r = ArtinLocal::new(tgt.clone())?;
        let mut kernel = Vec::new();
        let mut image = std::collections::HashSet::new();
        for x in src.elements() {
            let y = proj.apply(&x)?;
            if tgt.is_zero(&y) {
                kernel.push(x);
            }
            image.insert(y);
        }
        if image.len() as u128 != tgt.size() {
            return Err(Error::RingMismatch("the map is not surjective".into()));
        }
        kernel.sort();
        for a in &kernel {
            for b in &kernel {
                if !src.is_zero(&src.mul(a, b)) {
                    return Err(Error::NotSquareZero);
                }
            }
        }
        Ok(PDExtension { s, r, proj, kernel })
    }

    /// R[t]/t² → R.
    pub fn dual_numbers(r: Ring) -> Result<Self> {
        let s = BaseRing::truncated(r, 2)?;
        Self::new(RingHom::quotient_t(s)?)
    }

    /// The identity extension R → R (kernel 0).
    pub fn identity(r: Ring) -> Result<Self> {
        Self::new(RingHom::Identity(r))
    }

    pub fn kernel(&self) -> &[RingElement] {
        &self.kernel
    }

    pub fn in_kernel(&self, x: &RingElement) -> bool {
        self.kernel.binary_search(x).is_ok()
    }
}
