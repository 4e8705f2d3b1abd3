mod common;

use common::rng;
use wd_core::ring::{
    is_irreducible, make_ring, ring_axiom_check, smallest_irreducible, BaseRing, Ring, RingDescriptor, RingHom,
    TableRing,
};
use wd_core::Error;

fn test_rings() -> Vec<Ring> {
    let f3 = BaseRing::prime(3).unwrap();
    let f5 = BaseRing::prime(5).unwrap();
    vec![
        f3.clone(),
        f5.clone(),
        BaseRing::galois(3, 2).unwrap(),
        BaseRing::galois(5, 2).unwrap(),
        BaseRing::galois(3, 3).unwrap(),
        BaseRing::integers_mod(3, 3).unwrap(),
        BaseRing::integers_mod(5, 2).unwrap(),
        BaseRing::truncated(f3.clone(), 2).unwrap(),
        BaseRing::truncated(BaseRing::galois(3, 2).unwrap(), 3).unwrap(),
        BaseRing::truncated(BaseRing::integers_mod(3, 2).unwrap(), 2).unwrap(),
        BaseRing::truncated_multi(f3.clone(), 2, 3).unwrap(),
        BaseRing::product(vec![f3, BaseRing::integers_mod(3, 2).unwrap()]).unwrap(),
        BaseRing::product(vec![f5.clone(), BaseRing::truncated(f5, 2).unwrap()]).unwrap(),
    ]
}

/// Polynomials over F_p of degree ≤ 3 are irreducible iff they have no root.
fn has_root(m: &[u32], p: u32) -> bool {
    (0..p).any(|x| {
        let v = m.iter().rev().fold(0u64, |acc, &c| (acc * x as u64 + c as u64) % p as u64);
        v == 0
    })
}

#[test]
fn descriptors_build_the_expected_rings() {
    let f3: RingDescriptor = serde_json::from_str(r#"{"kind":"prime","p":3}"#).unwrap();
    assert_eq!(make_ring(&f3).unwrap().size(), 3);
    let z9: RingDescriptor = serde_json::from_str(r#"{"kind":"integers_mod","p":3,"a":2}"#).unwrap();
    let z9 = make_ring(&z9).unwrap();
    assert_eq!(z9.size(), 9);
    assert_eq!(z9.characteristic(), 9);
    let t = make_ring(&BaseRing::truncated(BaseRing::prime(3).unwrap(), 2).unwrap().descriptor()).unwrap();
    assert_eq!(t.size(), 9);
    assert!(t.is_char_p());
    for r in test_rings() {
        let back: RingDescriptor = serde_json::from_str(&serde_json::to_string(&r.descriptor()).unwrap()).unwrap();
        assert_eq!(*make_ring(&back).unwrap(), *r, "{}", r.label());
    }
}

#[test]
fn descriptor_errors() {
    assert!(matches!(make_ring(&RingDescriptor::prime(15)), Err(Error::CompositeP(15))));
    assert!(matches!(make_ring(&RingDescriptor::prime(2)), Err(Error::UnsupportedPrime(2))));
    let bad: RingDescriptor = serde_json::from_str(r#"{"kind":"galois","p":3,"f":3,"modulus":[1,0,1]}"#).unwrap();
    assert!(matches!(make_ring(&bad), Err(Error::BadDescriptor(_))));
    let unknown: RingDescriptor = serde_json::from_str(r#"{"kind":"adic","p":3}"#).unwrap();
    assert!(matches!(make_ring(&unknown), Err(Error::BadDescriptor(_))));
    let red: RingDescriptor = serde_json::from_str(r#"{"kind":"galois","p":5,"f":2,"modulus":[4,0,1]}"#).unwrap();
    assert!(matches!(make_ring(&red), Err(Error::ReducibleModulus(_))));
    assert!(matches!(BaseRing::truncated(BaseRing::prime(3).unwrap(), 0), Err(Error::ZeroPrecision(_))));
}

#[test]
fn chosen_moduli_are_the_least_irreducible_ones() {
    for p in [3u32, 5, 7] {
        for f in [2u32, 3] {
            let m = smallest_irreducible(p, f);
            assert!(!has_root(&m, p));
            for k in 0..(p as u64).pow(f) {
                let mut cand: Vec<u32> = (0..f).map(|i| ((k / (p as u64).pow(i)) % p as u64) as u32).collect();
                cand.push(1);
                if cand == m {
                    break;
                }
                assert!(has_root(&cand, p), "{cand:?} precedes {m:?} but is irreducible");
                assert!(!is_irreducible(&cand, p));
            }
        }
    }
}

#[test]
fn axioms_hold_on_every_test_ring() {
    let mut g = rng(11);
    for r in test_rings() {
        let rep = ring_axiom_check(&*r, 500, &mut g);
        assert!(rep.passed(), "{}: {:?}", r.label(), rep.violations.first());
    }
}

#[test]
fn corrupted_table_is_caught_with_a_witness() {
    let mut g = rng(12);
    let r = BaseRing::prime(3).unwrap();
    let mut t = TableRing::from_ring(&r).unwrap();
    t.mul[2][2] = 2;
    let rep = ring_axiom_check(&t, 100, &mut g);
    assert!(!rep.passed());
    assert!(rep.violations.iter().all(|v| !v.witness.is_empty()));
}

#[test]
fn galois_multiplication_matches_polynomial_oracle() {
    for (p, f) in [(3u32, 2u32), (5, 2), (3, 3)] {
        let r = BaseRing::galois(p, f).unwrap();
        let m = smallest_irreducible(p, f);
        let f = f as usize;
        let elems: Vec<_> = r.elements().collect();
        for a in elems.iter().step_by(3) {
            for b in &elems {
                let (ca, cb) = (r.coords(a), r.coords(b));
                let mut prod = vec![0u64; 2 * f - 1];
                for i in 0..f {
                    for j in 0..f {
                        prod[i + j] += ca[i] as u64 * cb[j] as u64;
                    }
                }
                for k in (f..2 * f - 1).rev() {
                    let c = prod[k] % p as u64;
                    for i in 0..f {
                        prod[k - f + i] += (p as u64 - m[i] as u64) * c;
                    }
                    prod[k] = 0;
                }
                let expect: Vec<u32> = prod[..f].iter().map(|&c| (c % p as u64) as u32).collect();
                assert_eq!(r.coords(&r.mul(a, b)), expect);
            }
        }
    }
}

#[test]
fn inverses_and_units() {
    for r in test_rings() {
        if r.size() > 2000 {
            continue;
        }
        let mut units = 0;
        for x in r.elements() {
            if let Some(y) = r.inv(&x) {
                assert_eq!(r.mul(&x, &y), r.one());
                units += 1;
            } else {
                assert!(r.elements().all(|y| r.mul(&x, &y) != r.one()));
            }
        }
        assert_eq!(units, r.units().len());
    }
}

#[test]
fn canonicalization_is_idempotent() {
    for r in test_rings() {
        if r.size() > 10_000 {
            continue;
        }
        for x in r.elements() {
            assert_eq!(r.canon(&x), x);
            assert_eq!(r.canon(&r.canon(&x)), r.canon(&x));
            let raw = r.coords(&x).iter().map(|&c| c as i64 + r.characteristic() as i64 * 7).collect::<Vec<_>>();
            assert_eq!(r.from_coords(&raw).unwrap(), x);
        }
    }
}

#[test]
fn homomorphism_examples() {
    let z9 = BaseRing::integers_mod(3, 2).unwrap();
    let f3 = BaseRing::prime(3).unwrap();
    let red = RingHom::reduction(z9.clone(), f3.clone()).unwrap();
    assert_eq!(red.apply(&z9.from_i64(4)).unwrap(), f3.from_i64(1));

    let s = BaseRing::truncated(f3.clone(), 2).unwrap();
    let q = RingHom::quotient_t(s.clone()).unwrap();
    let one_plus_t = s.add(&s.one(), &s.variable(0));
    assert_eq!(q.apply(&one_plus_t).unwrap(), f3.one());

    let f9 = BaseRing::galois(3, 2).unwrap();
    let frob = RingHom::frobenius(f9.clone()).unwrap();
    let g = f9.from_coords(&[0, 1]).unwrap();
    let g3 = frob.apply(&g).unwrap();
    assert_eq!(g3, f9.pow(&g, 3));
    assert_ne!(g3, g);
    for a in f9.elements() {
        for b in f9.elements() {
            assert_eq!(frob.apply(&f9.add(&a, &b)).unwrap(), f9.add(&f9.pow(&a, 3), &f9.pow(&b, 3)));
            assert_eq!(frob.apply(&f9.mul(&a, &b)).unwrap(), f9.mul(&f9.pow(&a, 3), &f9.pow(&b, 3)));
        }
    }
    assert!(matches!(RingHom::frobenius(z9.clone()), Err(Error::RingMismatch(_))));
    assert!(matches!(red.apply(&g), Err(Error::RingMismatch(_))));
}

#[test]
fn homomorphisms_preserve_operations() {
    let mut g = rng(13);
    let f3 = BaseRing::prime(3).unwrap();
    let f9 = BaseRing::galois(3, 2).unwrap();
    let z27 = BaseRing::integers_mod(3, 3).unwrap();
    let z9 = BaseRing::integers_mod(3, 2).unwrap();
    let s = BaseRing::truncated(f9.clone(), 3).unwrap();
    let s2 = BaseRing::truncated(f9.clone(), 2).unwrap();
    let prod = BaseRing::product(vec![f3.clone(), z9.clone()]).unwrap();
    let homs = vec![
        RingHom::reduction(z27.clone(), z9.clone()).unwrap(),
        RingHom::reduction(z27.clone(), f3.clone()).unwrap(),
        RingHom::frobenius(f9.clone()).unwrap(),
        RingHom::frobenius(s.clone()).unwrap(),
        RingHom::structure(z27.clone(), BaseRing::truncated(z9.clone(), 2).unwrap()).unwrap(),
        RingHom::constant_inclusion(f9.clone(), s.clone()).unwrap(),
        RingHom::quotient_t(s.clone()).unwrap(),
        RingHom::truncate_order(s.clone(), s2.clone()).unwrap(),
        RingHom::projection(prod.clone(), 1).unwrap(),
        RingHom::compose(vec![
            RingHom::truncate_order(s.clone(), s2.clone()).unwrap(),
            RingHom::frobenius(s2.clone()).unwrap(),
        ])
        .unwrap(),
    ];
    for h in homs {
        let bad = h.check(500, &mut g);
        assert!(bad.is_empty(), "{} -> {}: {:?}", h.source().label(), h.target().label(), bad.first());
    }
}
