//! Big-integer combinatorics and the analytic toolkit behind the structured
//! probabilities: Franel-type power sums, shifted binomial product sums,
//! their leading-order approximations (evaluated in the log₂ domain so that
//! scales like 2^3000 never touch floating-point range limits), and
//! finite-n checkers for the associated lower-bound inequalities.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

/// Multiplicity threshold below which the strengthened (extra n^{1/8})
/// lower bound applies when at least two multiplicities are this small.
pub const SMALL_MULTIPLICITY: u64 = 2;

/// Default slack for evaluating asymptotic lower bounds at finite n.
pub const DEFAULT_SLACK: f64 = 0.05;

// ────────────────────────────── exact primitives ───────────────────────────

/// C(n, k) as a big integer; zero when k is out of range.
///
/// Incremental product over the short side: every prefix equals
/// C(n−k+i, i), so each small division is exact and each step costs one
/// word-sized multiply and divide on the accumulator.
pub fn binomial(n: u64, k: i64) -> BigUint {
    if k < 0 || (k as u64) > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut r = BigUint::one();
    for i in 1..=k {
        r *= n - k + i;
        r /= i;
    }
    r
}

/// log₂ of a positive big integer with ~1 ulp accuracy (−∞ for zero).
pub fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 53 {
        return (x.to_u64().expect("fits in u64") as f64).log2();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_u64().expect("53 bits fit in u64");
    (top as f64).log2() + shift as f64
}

/// Binary entropy H(p) = −p log₂ p − (1−p) log₂(1−p), with 0·log 0 = 0.
pub fn entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("entropy argument {p} outside [0,1]")));
    }
    let term = |x: f64| if x == 0.0 { 0.0 } else { -x * x.log2() };
    Ok(term(p) + term(1.0 - p))
}

/// Ternary entropy H₃(p,q,r) = −Σ pᵢ log₂ pᵢ for p+q+r = 1.
pub fn entropy3(p: f64, q: f64, r: f64) -> Result<f64> {
    for x in [p, q, r] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("entropy argument {x} outside [0,1]")));
        }
    }
    if (p + q + r - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "ternary entropy arguments sum to {} ≠ 1",
            p + q + r
        )));
    }
    let term = |x: f64| if x == 0.0 { 0.0 } else { -x * x.log2() };
    Ok(term(p) + term(q) + term(r))
}

/// log₂ of the Stirling approximation to C(n, t):
/// n·H(t/n) + ½·log₂(n / (2π·t·(n−t))).
pub fn stirling_binomial_log2(n: u64, t: u64) -> f64 {
    assert!(t <= n);
    if t == 0 || t == n {
        return 0.0;
    }
    let (n, t) = (n as f64, t as f64);
    n * entropy(t / n).expect("ratio in [0,1]")
        + 0.5 * (n / (2.0 * std::f64::consts::PI * t * (n - t))).log2()
}

// ─────────────────────────────── Franel-type sums ──────────────────────────

/// Σ_{k=0}^{m} C(m,k)^q exactly.
pub fn franel_sum_exact(m: u64, q: u32) -> BigUint {
    assert!(q >= 1, "power must be positive");
    let mut sum = BigUint::zero();
    let mut c = BigUint::one(); // C(m, 0)
    for k in 0..=m {
        sum += c.pow(q);
        if k < m {
            c = c * (m - k) / (k + 1); // exact: advances C(m,k) to C(m,k+1)
        }
    }
    sum
}

/// log₂ of the leading-order approximation
/// 2^{mq}/√q · (2/(πm))^{(q−1)/2} to the Franel-type sum.
pub fn franel_asymptotic_log2(m: u64, q: u32) -> f64 {
    assert!(m >= 1 && q >= 1);
    let (mf, qf) = (m as f64, f64::from(q));
    mf * qf - 0.5 * qf.log2() + 0.5 * (qf - 1.0) * (2.0 / (std::f64::consts::PI * mf)).log2()
}

/// The Franel approximation as a plain float (∞ if it exceeds f64 range;
/// prefer [`franel_asymptotic_log2`] at large m·q).
pub fn franel_asymptotic(m: u64, q: u32) -> f64 {
    franel_asymptotic_log2(m, q).exp2()
}

// ─────────────────────────── shifted product sums ──────────────────────────

/// Parameters of a shifted binomial product sum
/// Σ_{k∈ℤ} Π_i C(mᵢ, (mᵢ+xᵢ)/2 + k).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftedSumSpec {
    m: Vec<u64>,
    x: Vec<i64>,
}

impl ShiftedSumSpec {
    /// Validates mᵢ ≡ xᵢ (mod 2) and mᵢ ≥ |xᵢ| for every index.
    pub fn new(m: Vec<u64>, x: Vec<i64>) -> Result<Self> {
        if m.is_empty() || m.len() != x.len() {
            return Err(Error::Dimension {
                expected: m.len().max(1),
                got: x.len(),
            });
        }
        for (i, (&mi, &xi)) in m.iter().zip(&x).enumerate() {
            if (mi as i64 - xi).rem_euclid(2) != 0 {
                return Err(Error::Domain(format!(
                    "index {i}: m = {mi} and x = {xi} have different parities"
                )));
            }
            if (mi as i64) < xi.abs() {
                return Err(Error::Domain(format!(
                    "index {i}: |x| = {} exceeds m = {mi}",
                    xi.abs()
                )));
            }
        }
        Ok(Self { m, x })
    }

    pub fn q(&self) -> usize {
        self.m.len()
    }

    pub fn m(&self) -> &[u64] {
        &self.m
    }

    pub fn x(&self) -> &[i64] {
        &self.x
    }

    /// n = Σ mᵢ.
    pub fn n(&self) -> u64 {
        self.m.iter().sum()
    }
}

/// Σ_{k∈ℤ} Π_i C(mᵢ, (mᵢ+xᵢ)/2 + k) for a validated spec.
pub fn shifted_product_sum_exact(spec: &ShiftedSumSpec) -> BigUint {
    raw_shifted_product_sum(&spec.m, &spec.x)
}

/// The same sum without the mᵢ ≥ |xᵢ| requirement: shifts with any binomial
/// argument out of range contribute zero, so the sum is finite regardless.
/// Zero if some mᵢ + xᵢ is odd.
pub(crate) fn raw_shifted_product_sum(m: &[u64], x: &[i64]) -> BigUint {
    debug_assert_eq!(m.len(), x.len());
    // Shift range keeping every argument (mᵢ+xᵢ)/2 + k inside [0, mᵢ].
    let mut k_lo = i64::MIN;
    let mut k_hi = i64::MAX;
    for (&mi, &xi) in m.iter().zip(x) {
        let s = mi as i64 + xi;
        if s.rem_euclid(2) != 0 {
            return BigUint::zero();
        }
        k_lo = k_lo.max(-s / 2);
        k_hi = k_hi.min((mi as i64 - xi) / 2);
    }
    if k_lo > k_hi {
        return BigUint::zero();
    }
    // One running binomial per factor, advanced multiplicatively in k.
    let mut current: Vec<BigUint> = m
        .iter()
        .zip(x)
        .map(|(&mi, &xi)| binomial(mi, (mi as i64 + xi) / 2 + k_lo))
        .collect();
    let mut sum = BigUint::zero();
    for k in k_lo..=k_hi {
        let mut term = BigUint::one();
        for c in &current {
            if c.is_zero() {
                term = BigUint::zero();
                break;
            }
            term *= c;
        }
        sum += term;
        if k < k_hi {
            for ((c, &mi), &xi) in current.iter_mut().zip(m).zip(x) {
                let a = (mi as i64 + xi) / 2 + k; // argument at shift k
                if a < 0 || a as u64 >= mi {
                    // Entering or staying out of range; recompute from scratch.
                    *c = binomial(mi, a + 1);
                } else {
                    *c = &*c * (mi - a as u64) / (a as u64 + 1);
                }
            }
        }
    }
    sum
}

/// log₂ of the leading-order approximation
/// 2^{Σmᵢ} · √((2/π)^{q−1} / (Πmᵢ · Σ 1/mᵢ)) to the shifted product sum.
pub fn shifted_product_sum_asymptotic_log2(spec: &ShiftedSumSpec) -> Result<f64> {
    if spec.m.iter().any(|&mi| mi == 0) {
        return Err(Error::Domain(
            "asymptotic approximation needs every m ≥ 1".into(),
        ));
    }
    let q = spec.q() as f64;
    let n: u64 = spec.n();
    let log_prod: f64 = spec.m.iter().map(|&mi| (mi as f64).log2()).sum();
    let inv_sum: f64 = spec.m.iter().map(|&mi| 1.0 / mi as f64).sum();
    Ok(n as f64
        + 0.5 * ((q - 1.0) * (2.0 / std::f64::consts::PI).log2() - log_prod - inv_sum.log2()))
}

/// The shifted-sum approximation as a plain float (∞ past f64 range).
pub fn shifted_product_sum_asymptotic(spec: &ShiftedSumSpec) -> Result<f64> {
    Ok(shifted_product_sum_asymptotic_log2(spec)?.exp2())
}

// ─────────────────────────── lower-bound checkers ──────────────────────────

/// Outcome of comparing an exact shifted product sum against the closed-form
/// lower bound 2^{n−1}·(2/(πn))^{(q−1)/2}·q^{(q−2)/2}, and against the
/// n^{1/8}-strengthened variant that applies when at least two
/// multiplicities are ≤ [`SMALL_MULTIPLICITY`].
#[derive(Clone, Debug, serde::Serialize)]
pub struct ShiftedLowerBoundReport {
    pub exact_log2: f64,
    pub bound_log2: f64,
    /// exact / bound.
    pub ratio: f64,
    pub holds: bool,
    pub strengthened_applies: bool,
    pub strengthened_bound_log2: f64,
    pub strengthened_ratio: f64,
    pub strengthened_holds: bool,
}

/// Checks Σ_k Π C(mᵢ,(mᵢ+xᵢ)/2+k) ≥ 2^{n−1}(2/(πn))^{(q−1)/2} q^{(q−2)/2}.
pub fn check_shifted_lower_bound(spec: &ShiftedSumSpec) -> ShiftedLowerBoundReport {
    let exact = shifted_product_sum_exact(spec);
    let exact_log2 = log2_biguint(&exact);
    let n = spec.n() as f64;
    let q = spec.q() as f64;
    let bound_log2 = (n - 1.0)
        + 0.5 * (q - 1.0) * (2.0 / (std::f64::consts::PI * n)).log2()
        + 0.5 * (q - 2.0) * q.log2();
    let small = spec
        .m
        .iter()
        .filter(|&&mi| mi <= SMALL_MULTIPLICITY)
        .count();
    let strengthened_applies = small >= 2;
    let strengthened_bound_log2 = bound_log2 + n.log2() / 8.0;
    ShiftedLowerBoundReport {
        exact_log2,
        bound_log2,
        ratio: (exact_log2 - bound_log2).exp2(),
        holds: exact_log2 >= bound_log2,
        strengthened_applies,
        strengthened_bound_log2,
        strengthened_ratio: (exact_log2 - strengthened_bound_log2).exp2(),
        strengthened_holds: exact_log2 >= strengthened_bound_log2,
    }
}

/// Outcome of comparing a normalized binomial product against
/// (2q/(πn))^{q/2}.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ProductLowerBoundReport {
    pub value_log2: f64,
    pub bound_log2: f64,
    /// value / bound.
    pub ratio: f64,
    pub slack: f64,
    /// value ≥ (1 − slack) · bound.
    pub holds: bool,
}

/// Checks 2^{−n} Π C(mᵢ,(mᵢ+xᵢ)/2) ≥ (1−slack)·(2q/(πn))^{q/2} at n = Σmᵢ.
pub fn check_product_binom_lower(m: &[u64], x: &[i64], slack: f64) -> Result<ProductLowerBoundReport> {
    let spec = ShiftedSumSpec::new(m.to_vec(), x.to_vec())?;
    let n: u64 = spec.n();
    let q = spec.q() as f64;
    let value_log2: f64 = spec
        .m
        .iter()
        .zip(&spec.x)
        .map(|(&mi, &xi)| log2_biguint(&binomial(mi, (mi as i64 + xi) / 2)))
        .sum::<f64>()
        - n as f64;
    let bound_log2 = 0.5 * q * (2.0 * q / (std::f64::consts::PI * n as f64)).log2();
    Ok(ProductLowerBoundReport {
        value_log2,
        bound_log2,
        ratio: (value_log2 - bound_log2).exp2(),
        slack,
        holds: value_log2 >= bound_log2 + (1.0 - slack).log2(),
    })
}

/// Checks (Πyᵢ)(Σ1/yᵢ) ≤ n^{q−1}/q^{q−2} + 1e−9 with n = Σyᵢ, the
/// inequality that is tight exactly when all yᵢ are equal.
pub fn check_product_sum_inequality(y: &[f64]) -> bool {
    assert!(!y.is_empty() && y.iter().all(|&v| v > 0.0));
    let q = y.len() as f64;
    let n: f64 = y.iter().sum();
    let prod: f64 = y.iter().product();
    let inv: f64 = y.iter().map(|v| 1.0 / v).sum();
    prod * inv <= n.powf(q - 1.0) / q.powf(q - 2.0) + 1e-9
}

// ─────────────────────────────────── tests ─────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomial_basics() {
        assert_eq!(binomial(4, 2), BigUint::from(6u8));
        assert_eq!(binomial(3, -1), BigUint::zero());
        assert_eq!(binomial(3, 4), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
    }

    #[test]
    fn binomial_matches_stirling_at_2000() {
        let exact = log2_biguint(&binomial(2000, 1000));
        let approx = stirling_binomial_log2(2000, 1000);
        let ratio = (exact - approx).exp2();
        assert!((ratio - 1.0).abs() <= 1e-3, "ratio {ratio}");
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(0.5).unwrap(), 1.0);
        assert_eq!(entropy(0.0).unwrap(), 0.0);
        assert_eq!(entropy(1.0).unwrap(), 0.0);
        assert!(entropy(1.5).is_err());
        let h3 = entropy3(0.02, 0.68, 0.3).unwrap();
        assert!(h3 > 1.012, "H3 = {h3}");
        assert!((h3 - 1.01231).abs() < 1e-4);
    }

    #[test]
    fn franel_small_values() {
        assert_eq!(franel_sum_exact(3, 3), BigUint::from(56u8));
        assert_eq!(franel_sum_exact(4, 1), BigUint::from(16u8));
        assert_eq!(franel_sum_exact(2, 2), BigUint::from(6u8));
    }

    #[test]
    fn franel_identities_up_to_100() {
        for m in 0..=100u64 {
            assert_eq!(franel_sum_exact(m, 1), BigUint::one() << m);
            assert_eq!(franel_sum_exact(m, 2), binomial(2 * m, m as i64));
        }
    }

    #[test]
    fn franel_asymptotic_exact_at_q1() {
        for m in [1u64, 5, 17] {
            assert_eq!(franel_asymptotic(m, 1), (m as f64).exp2());
        }
    }

    #[test]
    fn franel_asymptotic_accuracy() {
        // Vandermonde oracle at q = 2.
        let exact = log2_biguint(&binomial(400, 200));
        let ratio = (franel_asymptotic_log2(200, 2) - exact).exp2();
        assert!((ratio - 1.0).abs() <= 0.02, "q=2 ratio {ratio}");

        let exact = log2_biguint(&franel_sum_exact(1000, 3));
        let ratio = (franel_asymptotic_log2(1000, 3) - exact).exp2();
        assert!((ratio - 1.0).abs() <= 0.02, "q=3 ratio {ratio}");

        // Accuracy improves with m.
        for q in [2u32, 3, 4] {
            let at = |m: u64| {
                (franel_asymptotic_log2(m, q) - log2_biguint(&franel_sum_exact(m, q)))
                    .exp2()
            };
            assert!((at(1000) - 1.0).abs() < (at(100) - 1.0).abs());
            assert!((at(1000) - 1.0).abs() <= 0.02);
        }
    }

    #[test]
    fn shifted_sum_small_values() {
        let s = ShiftedSumSpec::new(vec![3, 3, 3], vec![1, 1, 1]).unwrap();
        assert_eq!(shifted_product_sum_exact(&s), BigUint::from(56u8));
        let s = ShiftedSumSpec::new(vec![2], vec![0]).unwrap();
        assert_eq!(shifted_product_sum_exact(&s), BigUint::from(4u8));
        let s = ShiftedSumSpec::new(vec![2, 2], vec![0, 0]).unwrap();
        assert_eq!(shifted_product_sum_exact(&s), BigUint::from(6u8));
    }

    #[test]
    fn shifted_sum_q1_is_power_of_two() {
        for m in [0u64, 1, 2, 7, 50, 200] {
            let x = (m % 2) as i64;
            let s = ShiftedSumSpec::new(vec![m], vec![x]).unwrap();
            assert_eq!(shifted_product_sum_exact(&s), BigUint::one() << m);
        }
    }

    #[test]
    fn shifted_spec_validation() {
        assert!(ShiftedSumSpec::new(vec![3], vec![0]).is_err()); // parity
        assert!(ShiftedSumSpec::new(vec![3], vec![5]).is_err()); // |x| > m
        assert!(ShiftedSumSpec::new(vec![3, 3], vec![1]).is_err()); // length
    }

    #[test]
    fn shifted_asymptotic_accuracy() {
        let s = ShiftedSumSpec::new(vec![1], vec![1]).unwrap();
        assert_eq!(shifted_product_sum_asymptotic(&s).unwrap(), 2.0);

        for (m, x) in [
            (vec![1000, 1000, 1000], vec![0, 0, 0]),
            (vec![500, 1500], vec![0, 0]),
        ] {
            let s = ShiftedSumSpec::new(m, x).unwrap();
            let exact = log2_biguint(&shifted_product_sum_exact(&s));
            let ratio = (shifted_product_sum_asymptotic_log2(&s).unwrap() - exact).exp2();
            assert!((ratio - 1.0).abs() <= 0.02, "ratio {ratio}");
        }
    }

    #[test]
    fn shifted_lower_bound_examples() {
        let s = ShiftedSumSpec::new(vec![400, 400, 400], vec![0, 0, 0]).unwrap();
        let r = check_shifted_lower_bound(&s);
        assert!(r.holds && !r.strengthened_applies);

        let s = ShiftedSumSpec::new(vec![1, 1, 998], vec![1, 1, 0]).unwrap();
        let r = check_shifted_lower_bound(&s);
        assert!(r.strengthened_applies);
        assert!(r.strengthened_holds, "ratio {}", r.strengthened_ratio);

        let s = ShiftedSumSpec::new(vec![10], vec![0]).unwrap();
        let r = check_shifted_lower_bound(&s);
        assert!(r.holds); // 2^10 ≥ 2^9
    }

    #[test]
    fn product_binom_lower_examples() {
        for (m, x) in [
            (vec![500u64, 500], vec![0i64, 0]),
            (vec![1000], vec![0]),
            (vec![333, 333, 334], vec![1, 1, 0]),
        ] {
            let r = check_product_binom_lower(&m, &x, DEFAULT_SLACK).unwrap();
            assert!(r.holds, "m={m:?} ratio {}", r.ratio);
        }
    }

    #[test]
    fn product_sum_inequality_examples() {
        assert!(check_product_sum_inequality(&[1.0, 1.0, 1.0]));
        // Equality case: value 3, bound 3²/3 = 3.
        let y = [1.0, 1.0, 1.0];
        let value: f64 = y.iter().product::<f64>() * y.iter().map(|v| 1.0 / v).sum::<f64>();
        assert!((value - 3.0).abs() <= 1e-12);
        assert!(check_product_sum_inequality(&[1.0, 2.0]));
    }

    proptest! {
        #[test]
        fn product_sum_inequality_random(y in proptest::collection::vec(0.01f64..100.0, 1..7)) {
            prop_assert!(check_product_sum_inequality(&y));
        }

        #[test]
        fn product_sum_equality_only_when_all_equal(
            base in 0.1f64..10.0,
            bump in 0.05f64..2.0,
            q in 3usize..6,
        ) {
            // For q = 2 the two sides agree identically (both equal y₁ + y₂),
            // so strictness under a perturbed entry only kicks in at q ≥ 3.
            let mut y = vec![base; q];
            y[0] = base + bump;
            let q_f = q as f64;
            let n: f64 = y.iter().sum();
            let value: f64 = y.iter().product::<f64>() * y.iter().map(|v| 1.0 / v).sum::<f64>();
            let bound = n.powf(q_f - 1.0) / q_f.powf(q_f - 2.0);
            prop_assert!(value < bound - 1e-9 * bound.max(1.0));
        }
    }
}
