//! Exact evaluation of P(‖ε₁v₁+⋯+εₙvₙ‖₂ ≤ r) for arbitrary configurations:
//! a Gray-code exhaustive path, a meet-in-the-middle path with grid
//! bucketing, a seeded Monte Carlo estimator over random planar directions,
//! and a coordinate-descent probe searching for low-probability
//! configurations.

use std::collections::HashMap;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::vectors::{norm_sq_point, BallQuery, ExactProbability, UnitVectorConfig};
use crate::{Error, Result};

/// Hard cap for the exhaustive 2^n path.
pub const MAX_NAIVE_N: usize = 30;
/// Hard cap for the meet-in-the-middle path.
pub const MAX_MITM_N: usize = 48;
/// Hard cap on n for the Monte Carlo estimator (each sample enumerates 2^n).
pub const MAX_MC_N: usize = 24;

// ─────────────────────────── Gray-code enumeration ─────────────────────────

/// Visits (s, Σεᵢvᵢ) for every signing index s in [start, end): index s
/// encodes εᵢ = −1 iff bit i of s ^ (s >> 1) is set, so consecutive indices
/// differ in exactly one sign and the running sum moves by ±2vᵢ per step.
/// The sum is recomputed from scratch periodically to keep float drift far
/// below any sane boundary tolerance.
fn gray_scan(
    vectors: &[Vec<f64>],
    dim: usize,
    start: u64,
    end: u64,
    mut visit: impl FnMut(u64, &[f64]),
) {
    const REFRESH: u64 = 4096;
    if start >= end {
        return;
    }
    let n = vectors.len();
    let mut signs = vec![1i8; n];
    let gray = start ^ (start >> 1);
    for (i, s) in signs.iter_mut().enumerate() {
        if i < 64 && (gray >> i) & 1 == 1 {
            *s = -1;
        }
    }
    let mut sum = vec![0.0f64; dim];
    let resync = |signs: &[i8], sum: &mut [f64]| {
        for x in sum.iter_mut() {
            *x = 0.0;
        }
        for (v, &s) in vectors.iter().zip(signs) {
            let s = f64::from(s);
            for (acc, x) in sum.iter_mut().zip(v) {
                *acc += s * x;
            }
        }
    };
    resync(&signs, &mut sum);
    visit(start, &sum);
    for s in start + 1..end {
        let flip = s.trailing_zeros() as usize;
        signs[flip] = -signs[flip];
        if (s - start) % REFRESH == 0 {
            resync(&signs, &mut sum);
        } else {
            let step = 2.0 * f64::from(signs[flip]);
            for (acc, x) in sum.iter_mut().zip(&vectors[flip]) {
                *acc += step * x;
            }
        }
        visit(s, &sum);
    }
}

/// Counts signings inside the ball by visiting all 2^n of them.
pub fn prob_ball_naive(config: &UnitVectorConfig, query: &BallQuery) -> Result<ExactProbability> {
    let n = config.n();
    if n > MAX_NAIVE_N {
        return Err(Error::Resource(format!(
            "exhaustive enumeration capped at n = {MAX_NAIVE_N}, got {n}"
        )));
    }
    let mut count = 0u64;
    gray_scan(config.vectors(), config.dim(), 0, 1u64 << n, |_, sum| {
        if query.contains(norm_sq_point(sum)) {
            count += 1;
        }
    });
    ExactProbability::new(BigUint::from(count), n as u32)
}

// ───────────────────────────── meet in the middle ──────────────────────────

/// Counts signings inside the ball by splitting the indices in half,
/// bucketing the 2^{⌊n/2⌋} right-half sums into a uniform grid of cell side
/// √(r² + tol), and scanning the ≤ 3^d cells neighboring −left for every
/// left-half sum. Cell side √(r² + tol) (rather than r) guarantees that any
/// right point within the membership distance of −left lies in a
/// neighboring cell even when the tolerance pushes past r. When r and tol
/// are both zero the grid degenerates; an exact coordinate hash is used
/// instead. Every candidate is re-tested with the true squared norm, so
/// bucketing only ever filters, never decides.
pub fn prob_ball_mitm(config: &UnitVectorConfig, query: &BallQuery) -> Result<ExactProbability> {
    let n = config.n();
    if n > MAX_MITM_N {
        return Err(Error::Resource(format!(
            "meet-in-the-middle enumeration capped at n = {MAX_MITM_N}, got {n}"
        )));
    }
    let d = config.dim();
    let nl = n / 2;
    let nr = n - nl;
    let (left_vecs, right_vecs) = config.vectors().split_at(nl);
    let threshold = query.radius_sq() + query.boundary_tol();
    let cell = threshold.sqrt();
    let exact_hash = cell == 0.0;

    // All right-half sums, flat, indexed by signing index.
    let right_total = 1u64 << nr;
    let mut right_sums = vec![0.0f64; (right_total as usize) * d];
    gray_scan(right_vecs, d, 0, right_total, |s, sum| {
        right_sums[(s as usize) * d..(s as usize + 1) * d].copy_from_slice(sum);
    });

    // Bucket them by grid cell (or by exact coordinate bits at radius 0).
    let key_of = |point: &[f64], buf: &mut Vec<i64>| {
        buf.clear();
        for &c in point {
            if exact_hash {
                // Normalize −0.0 so that exact negation round-trips.
                let c = if c == 0.0 { 0.0 } else { c };
                buf.push(c.to_bits() as i64);
            } else {
                buf.push((c / cell).floor() as i64);
            }
        }
    };
    let mut buckets: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
    {
        let mut key = Vec::with_capacity(d);
        for s in 0..right_total as usize {
            key_of(&right_sums[s * d..(s + 1) * d], &mut key);
            buckets.entry(key.clone()).or_default().push(s as u32);
        }
    }

    // Scan left sums in parallel chunks; exact u64 addition keeps the result
    // independent of worker count and scheduling.
    let left_total = 1u64 << nl;
    const CHUNK: u64 = 1 << 14;
    let chunks: Vec<(u64, u64)> = (0..left_total)
        .step_by(CHUNK as usize)
        .map(|s| (s, (s + CHUNK).min(left_total)))
        .collect();
    let count: u64 = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut local = 0u64;
            let mut key = Vec::with_capacity(d);
            let mut neg_left = vec![0.0f64; d];
            let mut probe = vec![0i64; d];
            let mut offs = vec![0i64; d];
            gray_scan(left_vecs, d, start, end, |_, left_sum| {
                for (t, &c) in neg_left.iter_mut().zip(left_sum) {
                    *t = -c;
                }
                key_of(&neg_left, &mut key);
                let mut tally = |cands: &[u32]| {
                    for &ri in cands {
                        let r = &right_sums[(ri as usize) * d..(ri as usize + 1) * d];
                        let mut nsq = 0.0;
                        for (l, rr) in left_sum.iter().zip(r) {
                            let t = l + rr;
                            nsq += t * t;
                        }
                        if nsq <= threshold {
                            local += 1;
                        }
                    }
                };
                if exact_hash {
                    if let Some(cands) = buckets.get(key.as_slice()) {
                        tally(cands);
                    }
                    return;
                }
                // Odometer over the 3^d cells neighboring −left.
                for o in offs.iter_mut() {
                    *o = -1;
                }
                'cells: loop {
                    for j in 0..d {
                        probe[j] = key[j] + offs[j];
                    }
                    if let Some(cands) = buckets.get(probe.as_slice()) {
                        tally(cands);
                    }
                    for j in 0..d {
                        offs[j] += 1;
                        if offs[j] <= 1 {
                            continue 'cells;
                        }
                        offs[j] = -1;
                    }
                    break;
                }
            });
            local
        })
        .sum();

    ExactProbability::new(BigUint::from(count), n as u32)
}

// ─────────────────────────────── random flights ────────────────────────────

/// Result of a Monte Carlo run over random directions on the circle.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct RayleighEstimate {
    pub n: usize,
    pub samples: u64,
    /// Mean of the per-sample exact probabilities P(‖σ‖₂ ≤ 1).
    pub mean: f64,
    /// Standard error of the mean (0 when samples = 1).
    pub std_err: f64,
    /// The closed-form value 1/(n+1) this estimates.
    pub expected: f64,
}

/// Draws `samples` configurations of n i.i.d. uniform directions on S¹,
/// computes P(‖σ‖₂ ≤ 1) exactly for each, and averages. Each sample uses
/// its own counter-derived stream of a seeded ChaCha generator, so the
/// result depends only on (n, samples, seed), not on scheduling.
pub fn rayleigh_mc(n: usize, samples: u64, seed: u64) -> Result<RayleighEstimate> {
    if n < 2 {
        return Err(Error::Domain(format!("need n ≥ 2, got {n}")));
    }
    if n > MAX_MC_N {
        return Err(Error::Resource(format!(
            "Monte Carlo estimator capped at n = {MAX_MC_N}, got {n}"
        )));
    }
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let query = BallQuery::new(1.0)?;
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let vectors: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                    vec![theta.cos(), theta.sin()]
                })
                .collect();
            let mut count = 0u64;
            gray_scan(&vectors, 2, 0, 1u64 << n, |_, sum| {
                if query.contains(norm_sq_point(sum)) {
                    count += 1;
                }
            });
            count as f64 / (1u64 << n) as f64
        })
        .collect();
    let mean = values.iter().sum::<f64>() / samples as f64;
    let std_err = if samples > 1 {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / ((samples - 1) as f64 * samples as f64);
        var.sqrt()
    } else {
        0.0
    };
    Ok(RayleighEstimate {
        n,
        samples,
        mean,
        std_err,
        expected: 1.0 / (n as f64 + 1.0),
    })
}

// ─────────────────────────────── local search ──────────────────────────────

/// Coordinate descent over spherical angles minimizing the exact ball
/// probability. Restart 0 starts from a round-robin assignment of the
/// coordinate axes (the balanced orthogonal heuristic); further restarts
/// start from seeded random angles. Candidate values for each angle
/// coordinate are a uniform grid plus the other vectors' values of that
/// coordinate, so two vectors can align (or anti-align) in one move. Moves
/// are accepted only on strict decrease of the exact probability, so the
/// result never exceeds the best starting value.
pub fn local_search_minimize(
    n: usize,
    d: usize,
    radius_sq: f64,
    restarts: u32,
    seed: u64,
) -> Result<(UnitVectorConfig, ExactProbability)> {
    if d < 2 {
        return Err(Error::Domain("local search needs d ≥ 2".into()));
    }
    if n == 0 || n > MAX_MITM_N {
        return Err(Error::Resource(format!(
            "local search needs 1 ≤ n ≤ {MAX_MITM_N}, got {n}"
        )));
    }
    let query = BallQuery::new(radius_sq)?;
    const GRID: usize = 24;
    const MAX_PASSES: usize = 40;
    let span_of = |c: usize| {
        if c == d - 2 {
            std::f64::consts::TAU
        } else {
            std::f64::consts::PI
        }
    };

    let to_config = |angles: &[Vec<f64>]| -> UnitVectorConfig {
        let vectors = angles.iter().map(|row| spherical_point(row, d)).collect();
        UnitVectorConfig::new(d, vectors).expect("spherical points are unit vectors")
    };
    let evaluate = |angles: &[Vec<f64>]| -> ExactProbability {
        prob_ball_mitm(&to_config(angles), &query).expect("n within cap")
    };

    let mut best: Option<(Vec<Vec<f64>>, ExactProbability)> = None;
    for restart in 0..restarts.max(1) {
        let mut angles: Vec<Vec<f64>> = if restart == 0 {
            (0..n).map(|i| axis_angles(i % d, d)).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::from(restart));
            (0..n)
                .map(|_| (0..d - 1).map(|c| rng.random::<f64>() * span_of(c)).collect())
                .collect()
        };
        let mut current = evaluate(&angles);
        for _ in 0..MAX_PASSES {
            let mut improved = false;
            for i in 0..n {
                for c in 0..d - 1 {
                    let span = span_of(c);
                    let mut candidates: Vec<f64> =
                        (0..GRID).map(|g| g as f64 / GRID as f64 * span).collect();
                    for (j, row) in angles.iter().enumerate() {
                        if j != i {
                            candidates.push(row[c]);
                        }
                    }
                    let original = angles[i][c];
                    let mut best_here = current.clone();
                    let mut best_angle = original;
                    for cand in candidates {
                        angles[i][c] = cand;
                        let p = evaluate(&angles);
                        if p < best_here {
                            best_here = p;
                            best_angle = cand;
                        }
                    }
                    angles[i][c] = best_angle;
                    if best_here < current {
                        current = best_here;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        match &best {
            Some((_, b)) if *b <= current => {}
            _ => best = Some((angles, current)),
        }
    }
    let (angles, prob) = best.expect("at least one restart");
    Ok((to_config(&angles), prob))
}

/// Unit vector from spherical angles (φ₁,…,φ_{d−1}).
fn spherical_point(phi: &[f64], d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    let mut sin_prod = 1.0;
    for (j, &p) in phi.iter().enumerate() {
        v[j] = sin_prod * p.cos();
        sin_prod *= p.sin();
    }
    v[d - 1] = sin_prod;
    v
}

/// Spherical angles of the standard basis vector e_axis.
fn axis_angles(axis: usize, d: usize) -> Vec<f64> {
    let mut phi = vec![0.0; d - 1];
    for p in phi.iter_mut().take(axis) {
        *p = std::f64::consts::FRAC_PI_2;
    }
    phi
}

// ─────────────────────────────────── tests ─────────────────────────────────
