mod common;

use common::*;
use rand::Rng;
use wd_core::display::{display_make, Display};
use wd_core::matrix::{Arith, Mat};
use wd_core::pair::{Coeff, Pair};
use wd_core::ring::{BaseRing, RingHom};
use wd_core::zink::{ArtinLocal, ZinkRing};
use wd_core::Error;

fn random_display<R: Rng>(r: &Coeff, n: usize, h: usize, d: usize, rng: &mut R) -> Display {
    let p = random_pair(r, h, d, rng);
    let small = r.tilde_ring(n).unwrap();
    let psi = Mat::random_invertible(&small, h, rng);
    display_make(p, n, psi).unwrap()
}

fn symplectic(r: &Coeff) -> Mat {
    Mat::from_rows(vec![vec![r.zero(), r.one()], vec![r.neg(&r.one()), r.zero()]]).unwrap()
}

#[test]
fn display_make_examples() {
    let r = Coeff::Witt(witt(f3(), 2));
    let s = r.tilde_ring(1).unwrap();
    let unit = display_make(Pair::standard(r.clone(), 1, 0).unwrap(), 1, Mat::identity(&s, 1)).unwrap();
    assert_eq!((unit.h(), unit.d(), unit.m(), unit.n()), (1, 0, 2, 1));
    let d = display_make(Pair::standard(r.clone(), 2, 1).unwrap(), 1, Mat::identity(&s, 2)).unwrap();
    assert_eq!((d.h(), d.d()), (2, 1));
    let p_id = Mat::scalar(&s, 2, &s.from_int(3));
    let err = display_make(Pair::standard(r.clone(), 2, 1).unwrap(), 1, p_id);
    assert!(matches!(err, Err(Error::SingularPsi)));
    let err = display_make(Pair::standard(r, 2, 1).unwrap(), 2, Mat::identity(&s, 2));
    assert!(matches!(err, Err(Error::LengthTooShort { .. })));
}

#[test]
fn frobenius_examples() {
    let r = Coeff::Witt(witt(f9(), 3));
    let s = r.tilde_ring(2).unwrap();
    let mut rng = rng(20);
    let psi = Mat::random_invertible(&s, 2, &mut rng);
    let d0 = display_make(Pair::standard(r.clone(), 2, 0).unwrap(), 2, psi.clone()).unwrap();
    assert_eq!(d0.frobenius_phi().unwrap(), psi);
    let d2 = display_make(Pair::standard(r.clone(), 2, 2).unwrap(), 2, psi.clone()).unwrap();
    assert_eq!(d2.frobenius_phi().unwrap(), psi.scale(&s, &s.from_int(3)));
    let d1 = display_make(Pair::standard(r.clone(), 2, 1).unwrap(), 2, Mat::identity(&s, 2)).unwrap();
    assert_eq!(d1.frobenius_phi().unwrap(), Mat::diag(&[s.from_int(3), s.one()]));
}

#[test]
fn frobenius_determinant_valuation() {
    let mut rng = rng(21);
    for base in [f3(), f9()] {
        for (m, n) in [(2, 1), (3, 2), (4, 3)] {
            let r = Coeff::Witt(witt(base.clone(), m));
            for h in 1..=3 {
                for d in 0..=h {
                    let disp = random_display(&r, n, h, d, &mut rng);
                    assert_eq!(disp.phi_det_valuation().unwrap(), d.min(n));
                }
            }
        }
    }
}

#[test]
fn dual_properties() {
    let r = Coeff::Witt(witt(f3(), 3));
    let s = r.tilde_ring(2).unwrap();
    let unit = display_make(Pair::standard(r.clone(), 1, 0).unwrap(), 2, Mat::identity(&s, 1)).unwrap();
    let du = unit.dual().unwrap();
    assert_eq!((du.h(), du.d()), (1, 1));
    assert_eq!(du.psi(), &Mat::identity(&s, 1));
    assert_eq!(du.dual().unwrap(), unit);

    let mut rng = rng(22);
    for _ in 0..50 {
        let d = random_display(&r, 2, 2, rng.gen_range(0..=2), &mut rng);
        let dd = d.dual().unwrap();
        assert_eq!(dd.d(), 2 - d.d());
        assert!(dd.psi().det(&s) != s.zero() && s.is_unit(&dd.psi().det(&s)));
        assert_eq!(dd.dual().unwrap(), d);
    }
    let r4 = Coeff::Witt(witt(f9(), 2));
    for h in 1..=4 {
        for dim in 0..=h {
            let d = random_display(&r4, 1, h, dim, &mut rng);
            assert_eq!(d.dual().unwrap().dual().unwrap(), d);
        }
    }
}

#[test]
fn twist_properties() {
    let r = Coeff::Witt(witt(f9(), 3));
    let s = r.tilde_ring(2).unwrap();
    let mut rng = rng(23);
    for _ in 0..30 {
        let d = random_display(&r, 2, 2, rng.gen_range(0..=2), &mut rng);
        assert_eq!(d.twist(&r.one(), &s.one()).unwrap(), d);
        let (c1, c2) = (random_unit(&r, &mut rng), random_unit(&r, &mut rng));
        let (i1, i2) = (random_unit(&s, &mut rng), random_unit(&s, &mut rng));
        let seq = d.twist(&c1, &i1).unwrap().twist(&c2, &i2).unwrap();
        let prod = d.twist(&r.mul(&c1, &c2), &s.mul(&i1, &i2)).unwrap();
        assert_eq!(seq, prod);

        let lhs = d.twist(&c1, &i1).unwrap().dual().unwrap();
        let rhs = d.dual().unwrap().twist(&r.inv(&c1).unwrap(), &s.inv(&i1).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
    let d = random_display(&r, 2, 2, 1, &mut rng);
    assert!(matches!(d.twist(&r.from_int(3), &s.one()), Err(Error::NonUnit)));
    assert!(matches!(d.twist(&r.one(), &s.from_int(3)), Err(Error::NonUnit)));
}

#[test]
fn truncation() {
    let r = Coeff::Witt(witt(f3(), 3));
    let mut rng = rng(24);
    let d = random_display(&r, 2, 2, 1, &mut rng);
    assert_eq!(d.truncate(3, 2).unwrap(), d);
    let t = d.truncate(2, 1).unwrap();
    assert_eq!((t.m(), t.n()), (2, 1));
    assert_eq!(t.pair().basis(), &r.mat_truncate(d.pair().basis(), t.pair().ring()).unwrap());
    assert_eq!(t.psi(), &d.small().mat_truncate(d.psi(), t.small()).unwrap());
    assert!(matches!(d.truncate(2, 2), Err(Error::BadTruncation { .. })));
    assert!(matches!(d.truncate(4, 2), Err(Error::BadTruncation { .. })));

    for _ in 0..50 {
        let d = random_display(&r, 2, 2, rng.gen_range(0..=2), &mut rng);
        let c = random_unit(&r, &mut rng);
        let i = random_unit(d.small(), &mut rng);
        let t = d.truncate(2, 1).unwrap();
        assert_eq!(d.dual().unwrap().truncate(2, 1).unwrap(), t.dual().unwrap());
        let small1 = t.small().clone();
        let c1 = d.pair().ring().truncate_to(&c, t.pair().ring()).unwrap();
        let i1 = d.small().truncate_to(&i, &small1).unwrap();
        assert_eq!(d.twist(&c, &i).unwrap().truncate(2, 1).unwrap(), t.twist(&c1, &i1).unwrap());
    }
}

#[test]
fn base_change_preserves_validity() {
    let mut rng = rng(25);
    let z9 = BaseRing::integers_mod(3, 2).unwrap();
    for hom in [
        RingHom::reduction(z9, f3()).unwrap(),
        RingHom::structure(f3(), f9()).unwrap(),
        RingHom::frobenius(f9()).unwrap(),
    ] {
        let r = Coeff::Witt(witt(hom.source(), 3));
        for _ in 0..10 {
            let d = random_display(&r, 2, 2, rng.gen_range(0..=2), &mut rng);
            let e = d.base_change(&hom).unwrap();
            assert!(e.small().is_unit(&e.psi().det(e.small())));
            assert_eq!(e.dual().unwrap(), d.dual().unwrap().base_change(&hom).unwrap());
        }
    }
}

/// p·⟨Ψx, Ψy⟩ = ι·σ⟨Cx, Cy⟩, from the comparison map alone.
fn pairing_oracle(d: &Display, j: &Mat, iota: &wd_core::witt::WittVector) -> bool {
    let s = d.small();
    let r = d.pair().ring();
    let c = d.pair().tilde(d.n()).unwrap().comparison;
    let sj = r.mat_frobenius(j, s).unwrap();
    let jn = r.mat_truncate(j, s).unwrap();
    let p = s.from_int(s.p() as i64);
    let lhs = d.psi().transpose().mul(s, &jn).mul(s, d.psi()).scale(s, &p);
    let rhs = c.transpose().mul(s, &sj).mul(s, &c).scale(s, iota);
    lhs == rhs
}

#[test]
fn polarization_examples() {
    let r = Coeff::Witt(witt(f3(), 2));
    let s = r.tilde_ring(1).unwrap();
    let d = display_make(Pair::standard(r.clone(), 2, 1).unwrap(), 1, Mat::identity(&s, 2)).unwrap();
    let j = symplectic(&r);
    let rep = d.polarization_check(&j, &r.one(), &s.one()).unwrap();
    assert!(rep.passed && rep.filtration_ok);
    assert!(pairing_oracle(&d, &j, &s.one()));

    let sym = Mat::from_rows(vec![vec![r.zero(), r.one()], vec![r.one(), r.zero()]]).unwrap();
    assert!(matches!(d.polarization_check(&sym, &r.one(), &s.one()), Err(Error::NotAlternating)));
    let odd = display_make(Pair::standard(r.clone(), 1, 0).unwrap(), 1, Mat::identity(&s, 1)).unwrap();
    assert!(matches!(odd.polarization_check(&Mat::identity(&r, 1), &r.one(), &s.one()), Err(Error::OddRank(1))));
}

#[test]
fn polarization_scaling() {
    let r = Coeff::Witt(witt(f3(), 3));
    let s = r.tilde_ring(2).unwrap();
    let j = symplectic(&r);
    let base = display_make(Pair::standard(r.clone(), 2, 1).unwrap(), 2, Mat::identity(&s, 2)).unwrap();
    assert!(base.polarization_check(&j, &r.one(), &s.one()).unwrap().passed);
    for u in s.witt().units() {
        let d = display_make(base.pair().clone(), 2, Mat::scalar(&s, 2, &u)).unwrap();
        let u2 = s.mul(&u, &u);
        let adjusted = d.polarization_check(&j, &r.one(), &u2).unwrap();
        assert!(adjusted.passed);
        assert!(pairing_oracle(&d, &j, &u2));
        let plain = d.polarization_check(&j, &r.one(), &s.one()).unwrap();
        assert_eq!(plain.passed, u2 == s.one());
    }
}

#[test]
fn polarization_random_symplectic_bases() {
    // a symplectic basis with Lagrangian L gives a polarized display for Ψ in Sp
    let r = Coeff::Witt(witt(f9(), 3));
    let s = r.tilde_ring(2).unwrap();
    let j = symplectic(&r);
    let mut rng = rng(26);
    for _ in 0..100 {
        let b = sl2(&r, &mut rng);
        let psi = sl2(&s, &mut rng);
        let d = display_make(wd_core::pair::pair_make(r.clone(), 2, 1, b).unwrap(), 2, psi).unwrap();
        let rep = d.polarization_check(&j, &r.one(), &s.one()).unwrap();
        assert!(rep.passed);
        assert!(pairing_oracle(&d, &j, &s.one()));
    }
}

fn sl2<R: Rng>(r: &Coeff, rng: &mut R) -> Mat {
    let a = random_unit(r, rng);
    let b = r.sample(rng);
    let c = r.sample(rng);
    let d = r.mul(&r.add(&r.one(), &r.mul(&b, &c)), &r.inv(&a).unwrap());
    Mat::from_rows(vec![vec![a, b], vec![c, d]]).unwrap()
}

#[test]
fn isomorphism_search() {
    let r = Coeff::Witt(witt(f3(), 2));
    let mut rng = rng(27);
    let d = random_display(&r, 1, 2, 1, &mut rng);
    let g = d.isomorphic(&d, 10_000_000).unwrap().expect("D is isomorphic to itself");
    assert!(d.is_isomorphism(&g, &d));
    assert!(d.is_isomorphism(&Mat::identity(&r, 2), &d));

    let h = Mat::random_invertible(&r, 2, &mut rng);
    let e = d.transport(&h).unwrap();
    assert!(d.is_isomorphism(&h, &e));
    let w = d.isomorphic(&e, 10_000_000).unwrap().unwrap();
    assert!(d.is_isomorphism(&w, &e));

    let big = Coeff::Witt(witt(f9(), 3));
    let d9 = random_display(&big, 2, 2, 1, &mut rng);
    assert!(matches!(d9.isomorphic(&d9, 1_000), Err(Error::BudgetExceeded { .. })));
}

#[test]
fn rank_one_twists_exhaustive() {
    // twist by (c, ι) is isomorphic to D iff ι = u / σ(u) for a unit u
    for (base, m, n) in [(f3(), 2, 1), (f9(), 2, 1), (f3(), 3, 2)] {
        let r = Coeff::Witt(witt(base, m));
        let s = r.tilde_ring(n).unwrap();
        let units_m = r.witt().units();
        let ratios: Vec<_> = units_m
            .iter()
            .map(|u| {
                let su = r.frobenius_to(u, &s).unwrap();
                let un = r.truncate_to(u, &s).unwrap();
                s.mul(&un, &s.inv(&su).unwrap())
            })
            .collect();
        for d in 0..=1 {
            let disp = display_make(Pair::standard(r.clone(), 1, d).unwrap(), n, Mat::identity(&s, 1)).unwrap();
            for c in units_m.iter().take(4) {
                for iota in s.witt().units() {
                    let t = disp.twist(c, &iota).unwrap();
                    let found = disp.isomorphic(&t, 10_000_000).unwrap().is_some();
                    assert_eq!(found, ratios.contains(&iota), "d={d} iota={iota:?}");
                }
            }
        }
    }
}

#[test]
fn dieudonne_displays() {
    let art = ArtinLocal::new(BaseRing::truncated(f3(), 2).unwrap()).unwrap();
    let r = Coeff::Zink(ZinkRing::new(art, 3).unwrap());
    let mut rng = rng(28);
    for _ in 0..20 {
        let d = random_display(&r, 2, 2, rng.gen_range(0..=2), &mut rng);
        assert_eq!(d.dual().unwrap().dual().unwrap(), d);
        let c = random_unit(&r, &mut rng);
        let i = random_unit(d.small(), &mut rng);
        let lhs = d.twist(&c, &i).unwrap().dual().unwrap();
        let rhs = d.dual().unwrap().twist(&r.inv(&c).unwrap(), &d.small().inv(&i).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}
