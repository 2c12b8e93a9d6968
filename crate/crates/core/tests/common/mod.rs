#![allow(dead_code)]

use dfrc_core::latency::payload_coef;
use dfrc_core::pcrb::ComplexMatrix4;
use dfrc_core::{alg1_delay_bisection, LinkCoefficients, SolverParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const BANDWIDTH_HZ: f64 = 400e6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Effective SNR slope of a 16x16 link at distance `d` with beam loss `loss`.
fn slope<R: Rng>(rng: &mut R) -> f64 {
    let d: f64 = rng.random_range(4.0..60.0);
    let loss: f64 = rng.random_range(0.3..1.0);
    256.0 * loss / (d * d * 0.0025)
}

/// Random links with zero floors. Payloads are 4000 bits when `equal`, else
/// drawn from 1000..8000 bits.
pub fn random_links<R: Rng>(rng: &mut R, k: usize, equal: bool) -> Vec<LinkCoefficients> {
    (0..k)
        .map(|i| {
            let bits = if equal {
                4000.0
            } else {
                rng.random_range(1000.0..8000.0)
            };
            LinkCoefficients::new(i, payload_coef(bits, BANDWIDTH_HZ), slope(rng), 0.0).unwrap()
        })
        .collect()
}

/// Random links whose floors sit below the unconstrained optimum, at a
/// random fraction of at most `max_frac` of it.
pub fn nonbinding_instance<R: Rng>(
    rng: &mut R,
    k: usize,
    max_frac: f64,
) -> (Vec<LinkCoefficients>, f64) {
    let p_max = rng.random_range(0.2..2.0);
    let mut links = random_links(rng, k, false);
    let free = alg1_delay_bisection(&links, p_max, &SolverParams::default()).unwrap();
    for (l, p) in links.iter_mut().zip(&free.powers) {
        l.power_floor = rng.random_range(0.0..max_frac) * p;
    }
    (links, p_max)
}

fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Random Hermitian positive-definite prior and positive-semidefinite
/// observed information of random rank.
pub fn random_fisher_pair<R: Rng>(rng: &mut R) -> (ComplexMatrix4, ComplexMatrix4) {
    let a = ComplexMatrix4::from_fn(|_, _| complex_normal(rng));
    let prior_scale = 10f64.powf(rng.random_range(-1.0..2.0));
    let prior = (a * a.adjoint() + ComplexMatrix4::identity().scale(0.5)).scale(prior_scale);

    let rank = rng.random_range(1..=4);
    let g = ComplexMatrix4::from_fn(|r, _| {
        if r < rank {
            complex_normal(rng)
        } else {
            Complex64::ZERO
        }
    });
    let obs_scale = 10f64.powf(rng.random_range(-1.0..3.0));
    let observed = (g.adjoint() * g).scale(obs_scale);
    (prior, observed)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
