use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Polynomial;
use crate::report::rational_vec;

/// Deterministic sampler: unit vectors `±e_i`, then lattice points of
/// `[-3, 3]^n`, then seeded random rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SamplerConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            samples: 10_000,
            seed: 0x5eed,
        }
    }
}

const LATTICE_RADIUS: i64 = 3;
const MAX_DENOMINATOR: i64 = 16;

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// The sample sequence used by every sampling-based check, origin excluded.
pub fn sample_points(n: usize, config: SamplerConfig) -> Vec<Vec<BigRational>> {
    let mut out = Vec::with_capacity(config.samples);
    'units: for i in 0..n {
        for s in [1, -1] {
            if out.len() >= config.samples {
                break 'units;
            }
            let mut v = vec![int(0); n];
            v[i] = int(s);
            out.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let side = (2 * LATTICE_RADIUS + 1) as u64;
    let lattice_budget = (config.samples.saturating_sub(out.len())) / 2;
    let full_lattice = side
        .checked_pow(n as u32)
        .filter(|&c| c <= lattice_budget as u64);
    match full_lattice {
        Some(count) => {
            for idx in 0..count {
                let mut rest = idx;
                let v: Vec<i64> = (0..n)
                    .map(|_| {
                        let d = (rest % side) as i64 - LATTICE_RADIUS;
                        rest /= side;
                        d
                    })
                    .collect();
                if v.iter().all(|&d| d == 0) {
                    continue;
                }
                out.push(v.into_iter().map(int).collect());
            }
        }
        None => {
            for _ in 0..lattice_budget {
                let v: Vec<i64> = (0..n)
                    .map(|_| rng.gen_range(-LATTICE_RADIUS..=LATTICE_RADIUS))
                    .collect();
                if v.iter().all(|&d| d == 0) {
                    continue;
                }
                out.push(v.into_iter().map(int).collect());
            }
        }
    }
    while out.len() < config.samples {
        let v: Vec<BigRational> = (0..n)
            .map(|_| {
                let q = rng.gen_range(1..=MAX_DENOMINATOR);
                let p = rng.gen_range(-LATTICE_RADIUS * q..=LATTICE_RADIUS * q);
                BigRational::new(BigInt::from(p), BigInt::from(q))
            })
            .collect();
        out.push(v);
    }
    out
}

/// Exact points where a polynomial is positive and negative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignChange {
    #[serde(with = "rational_vec")]
    pub positive: Vec<BigRational>,
    #[serde(with = "rational_vec")]
    pub negative: Vec<BigRational>,
}

/// Searches the sampler sequence for a sign change. `None` means no witness
/// among the samples, which is evidence of nonnegativity or nonpositivity,
/// not a proof.
pub fn sign_change_witness(p: &Polynomial, config: SamplerConfig) -> Option<SignChange> {
    let mut pos = None;
    let mut neg = None;
    for x in sample_points(p.n(), config) {
        let v = p.evaluate(&x).expect("sample has the right length");
        match v.signum() {
            Ordering::Greater if pos.is_none() => pos = Some(x),
            Ordering::Less if neg.is_none() => neg = Some(x),
            _ => {}
        }
        if pos.is_some() && neg.is_some() {
            break;
        }
    }
    Some(SignChange {
        positive: pos?,
        negative: neg?,
    })
}
