//! Shared between the differential suite and the acceptance gate: a
//! randomized sweep comparing every structured closed form and the
//! meet-in-the-middle count against the naive 2^n enumeration.
#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use signsum::enumerate::{prob_ball_mitm, prob_ball_naive};
use signsum::structured::{
    make_counterexample, make_mixed, make_orthogonal, make_triangle, prob_mixed_exact,
    prob_orthogonal_exact, prob_perturbed_exact, prob_simplicial_exact, MixedConfig,
    OrthogonalConfig, PerturbedBasisConfig, SimplicialConfig,
};
use signsum::vectors::{BallQuery, ExactProbability, UnitVectorConfig};

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0ac1e)
}

/// Asserts `got` equals the naive count on `config` at squared radius
/// `r_sq`, and that the meet-in-the-middle path agrees too.
pub fn check_against_naive(
    label: &str,
    config: &UnitVectorConfig,
    r_sq: f64,
    got: Option<&ExactProbability>,
) {
    let query = BallQuery::new(r_sq).unwrap();
    let naive = prob_ball_naive(config, &query).unwrap();
    if let Some(p) = got {
        assert_eq!(
            (p.count(), p.exponent()),
            (naive.count(), naive.exponent()),
            "{label}: closed form {p} vs naive {naive} at r² = {r_sq}"
        );
    }
    let mitm = prob_ball_mitm(config, &query).unwrap();
    assert_eq!(
        (mitm.count(), mitm.exponent()),
        (naive.count(), naive.exponent()),
        "{label}: mitm {mitm} vs naive {naive} at r² = {r_sq}"
    );
}

/// A uniformly random direction, via normalized Gaussian coordinates
/// (Box–Muller from two uniforms).
pub fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d)
            .map(|_| {
                let u1: f64 = rng.random::<f64>().max(1e-12);
                let u2: f64 = rng.random();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for x in &mut v {
                *x /= norm;
            }
            return v;
        }
    }
}

/// Runs the full differential sweep (panicking on any mismatch) and
/// returns how many instances were exercised.
pub fn oracle_sweep() -> usize {
    let mut rng = rng();
    let mut instances = 0usize;

    // Orthogonal: random multiplicities in d ≤ 4, assorted radii.
    for _ in 0..70 {
        let d = rng.random_range(1..=4usize);
        let m: Vec<u64> = (0..d).map(|_| rng.random_range(0..=4)).collect();
        if m.iter().sum::<u64>() == 0 {
            continue;
        }
        let cfg = OrthogonalConfig::new(m).unwrap();
        let n = cfg.n();
        let r = rng.random_range(0..=n + 2);
        let p = prob_orthogonal_exact(&cfg, r).unwrap();
        let config = cfg.to_config().unwrap();
        check_against_naive("orthogonal", &config, r as f64, Some(&p));
        instances += 1;
    }

    // Simplicial: d + 1 vertex multiplicities, d ≤ 4.
    for _ in 0..70 {
        let d = rng.random_range(1..=4usize);
        let m: Vec<u64> = (0..=d).map(|_| rng.random_range(0..=3)).collect();
        if m.iter().sum::<u64>() == 0 {
            continue;
        }
        let cfg = SimplicialConfig::new(m).unwrap();
        let n = cfg.n();
        let r = rng.random_range(0..=n + 1);
        let p = prob_simplicial_exact(&cfg, r).unwrap();
        let config = cfg.to_config().unwrap();
        check_against_naive("simplicial", &config, r as f64, Some(&p));
        instances += 1;
    }

    // Mixed: triangle part plus axis parts, d ∈ {3, 4}; the closed form is
    // tied to squared radius d.
    for _ in 0..55 {
        let p = rng.random_range(0..=1u64);
        let a = [
            p + 2 * rng.random_range(0..=1u64),
            p + 2 * rng.random_range(0..=1u64),
            p + 2 * rng.random_range(0..=1u64),
        ];
        let mut b = vec![2 * rng.random_range(0..=2u64)];
        if rng.random_bool(0.5) {
            b.push(1 + 2 * rng.random_range(0..=1u64));
        }
        let Ok(cfg) = MixedConfig::new(a, b) else {
            continue; // n = 0 roll
        };
        let d = cfg.dim();
        let prob = prob_mixed_exact(&cfg).unwrap();
        let config = cfg.to_config().unwrap();
        check_against_naive("mixed", &config, d as f64, Some(&prob));
        instances += 1;
    }

    // Perturbed basis: the closed form holds for any β with sin β < 1/n,
    // not just the canonical arcsin(1/(2n)); sample β across that range.
    // Squared radius d − 1.
    for _ in 0..55 {
        let d = rng.random_range(2..=4usize);
        let k1_plus = 2 * rng.random_range(0..=2u64);
        let k1_minus = 1 + 2 * rng.random_range(0..=1u64);
        let mut k = vec![2 * rng.random_range(0..=2u64)];
        for _ in 2..d {
            k.push(1 + 2 * rng.random_range(0..=1u64));
        }
        let n = k1_plus + k1_minus + k.iter().sum::<u64>();
        let beta = (1.0 / n as f64).asin() * rng.random_range(0.05..0.95);
        let cfg = PerturbedBasisConfig::new(k1_plus, k1_minus, k, beta).unwrap();
        let prob = prob_perturbed_exact(&cfg).unwrap();
        let config = cfg.to_config().unwrap();
        check_against_naive("perturbed", &config, (d - 1) as f64, Some(&prob));
        instances += 1;
    }

    // Arbitrary random unit vectors: no closed form, naive vs mitm only.
    // Mostly small, with a tail reaching the n = 18 end of the range.
    for i in 0..60 {
        let d = rng.random_range(1..=4usize);
        let n = if i < 50 {
            rng.random_range(1..=12usize)
        } else {
            rng.random_range(13..=18usize)
        };
        let vectors: Vec<Vec<f64>> = (0..n).map(|_| random_unit(&mut rng, d)).collect();
        let config = UnitVectorConfig::new(d, vectors).unwrap();
        let r_sq = rng.random_range(0.0..(n as f64 / 2.0 + 1.0)).powi(2);
        check_against_naive("random", &config, r_sq, None);
        instances += 1;
    }

    // The balanced constructors, at enumerable sizes.
    for n in [7u64, 9, 11, 13] {
        let cfg = make_counterexample(2, n).unwrap();
        let prob = prob_perturbed_exact(&cfg).unwrap();
        check_against_naive(
            "make_counterexample",
            &cfg.to_config().unwrap(),
            1.0,
            Some(&prob),
        );
        instances += 1;
    }
    for n in [8u64, 12, 14] {
        let cfg = make_counterexample(3, n).unwrap();
        let prob = prob_perturbed_exact(&cfg).unwrap();
        check_against_naive(
            "make_counterexample",
            &cfg.to_config().unwrap(),
            2.0,
            Some(&prob),
        );
        instances += 1;
    }
    for n in [5u64, 9, 14, 16] {
        let cfg = make_triangle(n).unwrap();
        let prob = prob_simplicial_exact(&cfg, 2).unwrap();
        check_against_naive("make_triangle", &cfg.to_config().unwrap(), 2.0, Some(&prob));
        instances += 1;
    }
    for (d, n) in [(2usize, 9u64), (3, 12), (4, 14), (2, 16)] {
        let cfg = make_orthogonal(d, n, None).unwrap();
        let r = rng.random_range(0..=4u64);
        let prob = prob_orthogonal_exact(&cfg, r).unwrap();
        check_against_naive(
            "make_orthogonal",
            &cfg.to_config().unwrap(),
            r as f64,
            Some(&prob),
        );
        instances += 1;
    }
    for (d, n) in [(3usize, 12u64), (3, 15), (4, 16)] {
        let cfg = make_mixed(d, n).unwrap();
        let prob = prob_mixed_exact(&cfg).unwrap();
        check_against_naive(
            "make_mixed",
            &cfg.to_config().unwrap(),
            d as f64,
            Some(&prob),
        );
        instances += 1;
    }

    instances
}
