//! Core domain types: unit-vector configurations, sign vectors, ball
//! queries, and exact dyadic probabilities, together with CSV ingestion and
//! the regular-simplex materialization shared by the structured families.

use std::cmp::Ordering;
use std::fmt;
use std::io;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::{binom, Error, Result};

/// Largest accepted deviation of an input vector's norm from 1. Rows within
/// this tolerance are rescaled to exact unit norm; anything farther is
/// rejected.
pub const DEFAULT_UNIT_TOL: f64 = 1e-12;

/// Absolute tolerance added to r² in ball-membership tests, so that sums
/// landing exactly on the boundary count as inside despite float rounding.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

// ─────────────────────────────── UnitVectorConfig ──────────────────────────

/// An ordered list of n unit vectors in ℝ^d.
///
/// Immutable after construction; the constructor validates that every row
/// has Euclidean norm within `unit_tol` of 1 and rescales it to unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVectorConfig {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl UnitVectorConfig {
    /// Builds a configuration with the default unit-norm tolerance.
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_unit_tol(dim, vectors, DEFAULT_UNIT_TOL)
    }

    /// Builds a configuration, accepting norm deviations up to `unit_tol`.
    pub fn with_unit_tol(dim: usize, mut vectors: Vec<Vec<f64>>, unit_tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if vectors.is_empty() {
            return Err(Error::Domain("need at least one vector".into()));
        }
        for (index, v) in vectors.iter_mut().enumerate() {
            if v.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Domain(format!("vector {index} has a non-finite entry")));
            }
            let norm = norm_sq_point(v).sqrt();
            if (norm - 1.0).abs() > unit_tol {
                return Err(Error::NotUnit {
                    index,
                    norm,
                    tol: unit_tol,
                });
            }
            if norm != 1.0 {
                for x in v.iter_mut() {
                    *x /= norm;
                }
            }
        }
        Ok(Self { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vectors n.
    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    /// Σ εᵢvᵢ for a full signing.
    pub fn signed_sum(&self, signing: &Signing) -> Result<Vec<f64>> {
        if signing.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: signing.len(),
            });
        }
        let mut sum = vec![0.0; self.dim];
        for (v, &s) in self.vectors.iter().zip(signing.signs()) {
            let s = f64::from(s);
            for (acc, x) in sum.iter_mut().zip(v) {
                *acc += s * x;
            }
        }
        Ok(sum)
    }

    /// Reads a configuration from headerless CSV, one vector per row.
    pub fn from_csv_reader(reader: impl io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut vectors = Vec::new();
        let mut dim = 0usize;
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let v: Vec<f64> = record
                .iter()
                .map(|field| {
                    field.parse::<f64>().map_err(|_| {
                        Error::Domain(format!("row {row}: cannot parse '{field}' as a real"))
                    })
                })
                .collect::<Result<_>>()?;
            if row == 0 {
                dim = v.len();
            }
            vectors.push(v);
        }
        Self::new(dim, vectors)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    /// Writes the configuration as headerless CSV with 17 significant digits
    /// per entry, enough for exact f64 round-trips.
    pub fn write_csv(&self, writer: impl io::Write) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for v in &self.vectors {
            let row: Vec<String> = v.iter().map(|x| format_real(*x)).collect();
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Formats a real with 17 significant digits (f64 round-trip safe).
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

// ─────────────────────────────────── Signing ───────────────────────────────

/// A vector of n signs in {−1, +1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct Signing(Vec<i8>);

impl Signing {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Domain("signing must be nonempty".into()));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain("signing entries must be ±1".into()));
        }
        Ok(Self(signs))
    }

    pub fn all_plus(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    /// The signing with every entry negated.
    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

/// ‖Σ εᵢvᵢ‖₂², computed in floating point.
pub fn norm_sq(config: &UnitVectorConfig, signing: &Signing) -> Result<f64> {
    Ok(norm_sq_point(&config.signed_sum(signing)?))
}

/// Squared Euclidean norm of a point.
pub fn norm_sq_point(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

// ────────────────────────────────── BallQuery ──────────────────────────────

/// A closed-ball membership test on squared norms: inside iff
/// ‖·‖² ≤ radius_sq + boundary_tol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallQuery {
    radius_sq: f64,
    boundary_tol: f64,
}

impl BallQuery {
    /// Ball of squared radius `radius_sq` with the default boundary tolerance.
    pub fn new(radius_sq: f64) -> Result<Self> {
        Self::with_tol(radius_sq, DEFAULT_BOUNDARY_TOL)
    }

    pub fn with_tol(radius_sq: f64, boundary_tol: f64) -> Result<Self> {
        if !radius_sq.is_finite() || radius_sq < 0.0 {
            return Err(Error::Domain(format!(
                "radius_sq must be finite and nonnegative, got {radius_sq}"
            )));
        }
        if !boundary_tol.is_finite() || boundary_tol < 0.0 {
            return Err(Error::Domain(format!(
                "boundary_tol must be finite and nonnegative, got {boundary_tol}"
            )));
        }
        Ok(Self {
            radius_sq,
            boundary_tol,
        })
    }

    pub fn radius_sq(&self) -> f64 {
        self.radius_sq
    }

    pub fn boundary_tol(&self) -> f64 {
        self.boundary_tol
    }

    /// Membership test on a squared norm.
    pub fn contains(&self, norm_sq: f64) -> bool {
        norm_sq <= self.radius_sq + self.boundary_tol
    }
}

// ─────────────────────────────── ExactProbability ──────────────────────────

/// A probability of the form count / 2^exponent with the count held exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactProbability {
    count: BigUint,
    exponent: u32,
}

impl ExactProbability {
    pub fn new(count: BigUint, exponent: u32) -> Result<Self> {
        if count.bits() > u64::from(exponent) + 1 || (count.bits() == u64::from(exponent) + 1 && count != BigUint::from(1u8) << exponent) {
            return Err(Error::Domain(format!(
                "count {count} exceeds 2^{exponent}"
            )));
        }
        Ok(Self { count, exponent })
    }

    pub fn count(&self) -> &BigUint {
        &self.count
    }

    /// The n in count / 2^n.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.count.is_zero()
    }

    /// The probability as f64 (may underflow to 0 below ~2^−1074).
    pub fn value(&self) -> f64 {
        if self.count.is_zero() {
            0.0
        } else {
            (binom::log2_biguint(&self.count) - f64::from(self.exponent)).exp2()
        }
    }

    /// log₂ of the probability; −∞ for a zero count.
    pub fn log2(&self) -> f64 {
        if self.count.is_zero() {
            f64::NEG_INFINITY
        } else {
            binom::log2_biguint(&self.count) - f64::from(self.exponent)
        }
    }
}

impl fmt::Display for ExactProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.count, self.exponent)
    }
}

impl PartialOrd for ExactProbability {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactProbability {
    /// Exact comparison by cross-multiplication: a/2^p ≤ b/2^q iff
    /// a·2^q ≤ b·2^p.
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = &self.count << other.exponent;
        let rhs = &other.count << self.exponent;
        lhs.cmp(&rhs)
    }
}

// ────────────────────────────── simplex vertices ───────────────────────────

/// The d+1 vertices of a regular d-simplex as unit vectors in ℝ^d, with
/// pairwise inner products −1/d: the standard basis vectors of ℝ^{d+1} are
/// centered at their centroid, rescaled to unit norm, and expressed in the
/// Helmert orthonormal basis of the hyperplane Σx = 0.
pub fn simplex_vertices(d: usize) -> Vec<Vec<f64>> {
    assert!(d >= 1, "simplex dimension must be at least 1");
    let scale = ((d as f64 + 1.0) / d as f64).sqrt();
    (0..=d)
        .map(|i| {
            (1..=d)
                .map(|k| {
                    // k-th Helmert vector: k ones, then −k, then zeros,
                    // normalized by √(k(k+1)).
                    let norm = (k as f64 * (k as f64 + 1.0)).sqrt();
                    let coord = match i.cmp(&k) {
                        Ordering::Less => 1.0 / norm,
                        Ordering::Equal => -(k as f64) / norm,
                        Ordering::Greater => 0.0,
                    };
                    coord * scale
                })
                .collect()
        })
        .collect()
}

// ─────────────────────────────────── tests ─────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dim: usize, axis: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        v
    }

    #[test]
    fn norm_sq_orthogonal_pair() {
        let cfg = UnitVectorConfig::new(2, vec![e(2, 0), e(2, 1)]).unwrap();
        let s = Signing::new(vec![1, 1]).unwrap();
        assert_eq!(norm_sq(&cfg, &s).unwrap(), 2.0);
    }

    #[test]
    fn norm_sq_cancellation() {
        let cfg = UnitVectorConfig::new(2, vec![e(2, 0), e(2, 0)]).unwrap();
        let s = Signing::new(vec![1, -1]).unwrap();
        assert_eq!(norm_sq(&cfg, &s).unwrap(), 0.0);
    }

    #[test]
    fn norm_sq_single_negative() {
        let cfg = UnitVectorConfig::new(1, vec![vec![1.0]]).unwrap();
        let s = Signing::new(vec![-1]).unwrap();
        assert_eq!(norm_sq(&cfg, &s).unwrap(), 1.0);
    }

    #[test]
    fn norm_sq_invariant_under_global_flip_and_permutation() {
        let cfg = UnitVectorConfig::new(
            2,
            vec![
                vec![0.6, 0.8],
                vec![-0.8, 0.6],
                vec![1.0, 0.0],
            ],
        )
        .unwrap();
        let s = Signing::new(vec![1, -1, 1]).unwrap();
        let flipped = s.negated();
        assert_eq!(norm_sq(&cfg, &s).unwrap(), norm_sq(&cfg, &flipped).unwrap());

        let perm_cfg = UnitVectorConfig::new(
            2,
            vec![
                vec![1.0, 0.0],
                vec![0.6, 0.8],
                vec![-0.8, 0.6],
            ],
        )
        .unwrap();
        let perm_s = Signing::new(vec![1, 1, -1]).unwrap();
        let a = norm_sq(&cfg, &s).unwrap();
        let b = norm_sq(&perm_cfg, &perm_s).unwrap();
        assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn rejects_non_unit_rows() {
        let err = UnitVectorConfig::new(2, vec![vec![0.5, 0.5]]);
        assert!(matches!(err, Err(Error::NotUnit { .. })));
    }

    #[test]
    fn normalizes_tiny_deviations() {
        let almost = vec![1.0 + 5e-13, 0.0];
        let cfg = UnitVectorConfig::new(2, vec![almost]).unwrap();
        assert_eq!(cfg.vector(0)[0], 1.0);
    }

    #[test]
    fn simplex_one_dimensional() {
        let u = simplex_vertices(1);
        assert_eq!(u.len(), 2);
        assert!((u[0][0] - 1.0).abs() <= 1e-12);
        assert!((u[1][0] + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn simplex_inner_products() {
        for d in [2usize, 3, 7] {
            let u = simplex_vertices(d);
            assert_eq!(u.len(), d + 1);
            let target = -1.0 / d as f64;
            for i in 0..=d {
                assert!((norm_sq_point(&u[i]).sqrt() - 1.0).abs() <= 1e-12);
                for j in 0..i {
                    let dot: f64 = u[i].iter().zip(&u[j]).map(|(a, b)| a * b).sum();
                    assert!(
                        (dot - target).abs() <= 1e-10,
                        "d={d}: <u{i},u{j}> = {dot}, want {target}"
                    );
                }
            }
        }
    }

    #[test]
    fn exact_probability_value_and_order() {
        let half = ExactProbability::new(BigUint::from(2u8), 2).unwrap();
        assert_eq!(half.value(), 0.5);
        assert_eq!(half.to_string(), "2/2^2");

        let quarter = ExactProbability::new(BigUint::from(1u8), 2).unwrap();
        assert!(quarter < half);

        // Equal values with different exponents compare equal under cmp.
        let half4 = ExactProbability::new(BigUint::from(8u8), 4).unwrap();
        assert_eq!(half.cmp(&half4), Ordering::Equal);

        // A huge exponent must not overflow value().
        let tiny = ExactProbability::new(BigUint::from(3u8), 6000).unwrap();
        assert!(tiny.value() == 0.0 || tiny.value() > 0.0);
        assert!((tiny.log2() - (3f64.log2() - 6000.0)).abs() < 1e-9);
    }

    #[test]
    fn exact_probability_rejects_count_above_one() {
        assert!(ExactProbability::new(BigUint::from(5u8), 2).is_err());
        assert!(ExactProbability::new(BigUint::from(4u8), 2).is_ok());
    }

    #[test]
    fn csv_round_trip() {
        let cfg = UnitVectorConfig::new(
            2,
            vec![vec![1.0, 0.0], vec![-0.8, 0.6], vec![std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2]],
        )
        .unwrap();
        let mut buf = Vec::new();
        cfg.write_csv(&mut buf).unwrap();
        let back = UnitVectorConfig::from_csv_reader(buf.as_slice()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        let data = "0.5,0.5\n";
        assert!(UnitVectorConfig::from_csv_reader(data.as_bytes()).is_err());
        let data = "1.0,abc\n";
        assert!(UnitVectorConfig::from_csv_reader(data.as_bytes()).is_err());
    }

    #[test]
    fn ball_query_boundary() {
        let q = BallQuery::new(2.0).unwrap();
        assert!(q.contains(2.0));
        assert!(q.contains(2.0 + 0.5e-9));
        assert!(!q.contains(2.0 + 1e-6));
        assert!(BallQuery::new(-1.0).is_err());
    }
}
