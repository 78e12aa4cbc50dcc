#![allow(dead_code)]

use epsense_core::circuit::StateVector;
use epsense_core::linalg::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn matrix(rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::mat2(c64(rng), c64(rng), c64(rng), c64(rng))
}

pub fn state(rng: &mut ChaCha8Rng) -> StateVector {
    StateVector::normalized(vec![c64(rng), c64(rng)]).unwrap()
}

pub type M2 = [[C64; 2]; 2];

pub fn to_arr(m: &CMatrix) -> M2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// exp(a) from 40 Taylor terms after halving until every entry is below 1/4.
pub fn expm_taylor40(a: &M2) -> M2 {
    let big = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let mut s = 0;
    while big / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let k = 2f64.powi(s);
    let b = a.map(|row| row.map(|z| z / k));
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut sum = [[one, zero], [zero, one]];
    let mut term = sum;
    for n in 1..=40 {
        term = mul(&term, &b).map(|row| row.map(|z| z / n as f64));
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        sum = mul(&sum, &sum);
    }
    sum
}

pub fn max_diff(a: &M2, b: &CMatrix) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a[i][j] - b[(i, j)]).norm());
        }
    }
    d
}

/// Roots of z² − tr·z + det, in no particular order.
pub fn char_roots(m: &CMatrix) -> [C64; 2] {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let r = (tr * tr - 4.0 * det).sqrt();
    [(tr + r) / 2.0, (tr - r) / 2.0]
}

/// Matches two unordered pairs and returns the larger mismatch.
pub fn pair_distance(a: [C64; 2], b: [C64; 2]) -> f64 {
    let straight = (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let crossed = (a[0] - b[1]).norm().max((a[1] - b[0]).norm());
    straight.min(crossed)
}

/// 1 − |⟨a|b⟩|² for unit vectors.
pub fn infidelity(a: &[C64], b: &[C64]) -> f64 {
    let ov: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    1.0 - ov.norm_sqr() / (na * nb)
}
