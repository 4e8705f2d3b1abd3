#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wd_core::matrix::{Arith, Mat};
use wd_core::pair::{pair_make, Coeff, Pair, PairMorphism};
use wd_core::ring::{BaseRing, Ring};
use wd_core::witt::{WittRing, WittVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn f3() -> Ring {
    BaseRing::prime(3).unwrap()
}

pub fn f9() -> Ring {
    BaseRing::galois(3, 2).unwrap()
}

pub fn witt(base: Ring, n: usize) -> WittRing {
    WittRing::new(base, n).unwrap()
}

/// A random element of the augmentation ideal: zero first component.
pub fn random_ideal<R: Rng>(r: &Coeff, rng: &mut R) -> WittVector {
    loop {
        let x = r.sample(rng);
        if r.in_ideal(&x) {
            return x;
        }
        let lead = r.teichmuller(r.witt().comps(&x).first().unwrap());
        let y = r.sub(&x, &lead);
        if r.in_ideal(&y) && r.contains(&y) {
            return y;
        }
    }
}

pub fn random_pair<R: Rng>(r: &Coeff, h: usize, d: usize, rng: &mut R) -> Pair {
    let b = Mat::random_invertible(r, h, rng);
    pair_make(r.clone(), h, d, b).unwrap()
}

/// A random morphism of pairs built from adapted blocks.
pub fn random_morphism<R: Rng>(src: &Pair, tgt: &Pair, rng: &mut R) -> PairMorphism {
    let r = src.ring();
    let (h, d, d2) = (src.h(), src.d(), tgt.d());
    let a = Mat::random(r, d2, d, rng);
    let b = Mat::random(r, d2, h - d, rng);
    let c = Mat::from_fn(tgt.h() - d2, d, |_, _| random_ideal(r, rng));
    let dd = Mat::random(r, tgt.h() - d2, h - d, rng);
    PairMorphism::from_blocks(src, tgt, &a, &b, &c, &dd).unwrap()
}

/// Every h×h matrix over the ring, in lexicographic order.
pub fn all_matrices(r: &Coeff, h: usize) -> Vec<Mat> {
    let elems = r.elements();
    let q = elems.len();
    let total = q.pow((h * h) as u32);
    (0..total)
        .map(|mut idx| {
            let mut entries = vec![elems[0]; h * h];
            for k in (0..h * h).rev() {
                entries[k] = elems[idx % q];
                idx /= q;
            }
            Mat::from_fn(h, h, |i, j| entries[i * h + j])
        })
        .collect()
}

/// Every vector of length h over the ring.
pub fn all_vectors(r: &Coeff, h: usize) -> Vec<Vec<WittVector>> {
    let elems = r.elements();
    let mut out: Vec<Vec<WittVector>> = vec![vec![]];
    for _ in 0..h {
        out = out
            .into_iter()
            .flat_map(|v| {
                elems.iter().map(move |e| {
                    let mut v = v.clone();
                    v.push(*e);
                    v
                })
            })
            .collect();
    }
    out
}

pub fn random_unit<R: Rng>(r: &Coeff, rng: &mut R) -> WittVector {
    loop {
        let c = r.sample(rng);
        if r.is_unit(&c) {
            return c;
        }
    }
}
