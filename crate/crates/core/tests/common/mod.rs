#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tropun::connections::TropConnection;
use tropun::forms::WedgeTable;
use tropun::linalg::{rat, Rat, RatMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small(rng: &mut ChaCha8Rng, bound: i64) -> Rat {
    rat(rng.gen_range(-bound..=bound))
}

/// Unit lower times unit upper triangular, so always invertible.
pub fn random_invertible(rng: &mut ChaCha8Rng, r: usize) -> RatMatrix {
    let mut l = RatMatrix::identity(r);
    let mut u = RatMatrix::identity(r);
    for i in 0..r {
        for j in 0..i {
            l.set(i, j, small(rng, 1));
            u.set(j, i, small(rng, 2));
        }
    }
    &l * &u
}

pub fn strictly_upper(rng: &mut ChaCha8Rng, r: usize, bound: i64) -> RatMatrix {
    RatMatrix::from_fn(r, r, |i, j| if i < j { small(rng, bound) } else { Rat::from_integer(0.into()) })
}

pub fn conjugate(p: &RatMatrix, a: &RatMatrix) -> RatMatrix {
    &(p * a) * &p.inverse().expect("invertible")
}

/// Polynomials without constant term in one nilpotent matrix, conjugated: integrable over any base.
pub fn commuting_unipotent(rng: &mut ChaCha8Rng, base: Arc<WedgeTable>, r: usize) -> TropConnection {
    let n = strictly_upper(rng, r, 2);
    let p = random_invertible(rng, r);
    let mut powers = vec![n.clone()];
    for _ in 1..r {
        let next = powers.last().unwrap() * &n;
        powers.push(next);
    }
    let theta = (0..base.one_forms_dim())
        .map(|_| {
            let a = powers.iter().fold(RatMatrix::zeros(r, r), |acc, q| &acc + &q.scale(&small(rng, 2)));
            conjugate(&p, &a)
        })
        .collect();
    TropConnection::new(base, theta).expect("shapes")
}

/// Independent strictly upper triangular matrices in a common random basis; integrable when `Ω² = 0`.
pub fn triangular_unipotent(rng: &mut ChaCha8Rng, base: Arc<WedgeTable>, r: usize) -> TropConnection {
    let p = random_invertible(rng, r);
    let theta = (0..base.one_forms_dim()).map(|_| conjugate(&p, &strictly_upper(rng, r, 2))).collect();
    TropConnection::new(base, theta).expect("shapes")
}
