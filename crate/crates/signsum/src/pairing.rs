//! Angle pairings of planar unit vectors: standard form, the interleaved
//! pairing with small total gap, the greedy pruning that drives the gap
//! functional below any threshold, and the resulting split of an odd index
//! set into a well-paired part and a small remainder.

use serde::Serialize;

use crate::vectors::UnitVectorConfig;
use crate::{Error, Result};

// ────────────────────────────── standard form ──────────────────────────────

/// A planar configuration normalized so every vector points into the upper
/// half-plane and the smallest angle is zero: negated vectors are recorded
/// in `flips`, the applied global rotation in `rotation`, and `order[k]`
/// holds the input index that landed at sorted position k.
#[derive(Clone, Debug)]
pub struct StandardForm {
    angles: Vec<f64>,
    flips: Vec<bool>,
    rotation: f64,
    order: Vec<usize>,
}

impl StandardForm {
    /// Sorted angles θ₁ ≤ … ≤ θ_n in [0, π), with θ₁ = 0.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Whether the vector at sorted position k was negated.
    pub fn flips(&self) -> &[bool] {
        &self.flips
    }

    /// The global rotation applied after flipping, so that the original
    /// vector at position k is ±(cos(θ_k − rotation), sin(θ_k − rotation)).
    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    /// Input index of each sorted position.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// The normalized unit vector at sorted position k.
    pub fn vector(&self, k: usize) -> [f64; 2] {
        [self.angles[k].cos(), self.angles[k].sin()]
    }

    /// Rebuilds the input configuration (inverse of `to_standard_form`).
    pub fn reconstruct(&self) -> Result<UnitVectorConfig> {
        let n = self.len();
        let mut vectors = vec![Vec::new(); n];
        for k in 0..n {
            let phi = self.angles[k] - self.rotation;
            let sign = if self.flips[k] { -1.0 } else { 1.0 };
            vectors[self.order[k]] = vec![sign * phi.cos(), sign * phi.sin()];
        }
        UnitVectorConfig::new(2, vectors)
    }

    /// Σ|θᵢ − θⱼ| over the pairing.
    pub fn e1(&self, pairing: &Pairing) -> f64 {
        pairing
            .pairs()
            .iter()
            .map(|&(i, j)| (self.angles[i] - self.angles[j]).abs())
            .sum()
    }

    /// Σ‖vᵢ − vⱼ‖² over the pairing; equals Σ 2 − 2cos(θᵢ − θⱼ).
    pub fn e2(&self, pairing: &Pairing) -> f64 {
        pairing
            .pairs()
            .iter()
            .map(|&(i, j)| self.pair_length_sq(i, j))
            .sum()
    }

    fn pair_length_sq(&self, i: usize, j: usize) -> f64 {
        let [xi, yi] = self.vector(i);
        let [xj, yj] = self.vector(j);
        (xi - xj) * (xi - xj) + (yi - yj) * (yi - yj)
    }
}

/// Normalizes a planar configuration: vectors with angle in [π, 2π) are
/// negated, the smallest resulting angle is rotated to zero, and positions
/// are sorted by angle (ties by input index).
pub fn to_standard_form(config: &UnitVectorConfig) -> Result<StandardForm> {
    if config.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: config.dim(),
        });
    }
    let mut items: Vec<(f64, bool, usize)> = config
        .vectors()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut phi = v[1].atan2(v[0]);
            if phi < 0.0 {
                phi += 2.0 * std::f64::consts::PI;
            }
            // fold the lower half-circle onto the upper
            if phi >= std::f64::consts::PI {
                (phi - std::f64::consts::PI, true, i)
            } else {
                (phi, false, i)
            }
        })
        .collect();
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.2.cmp(&b.2)));
    let rotation = -items[0].0;
    let angles = items.iter().map(|it| it.0 + rotation).collect();
    let flips = items.iter().map(|it| it.1).collect();
    let order = items.iter().map(|it| it.2).collect();
    Ok(StandardForm {
        angles,
        flips,
        rotation,
        order,
    })
}

// ──────────────────────────────── pairings ─────────────────────────────────

/// A set of disjoint index pairs within a standard-form configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pairing {
    pairs: Vec<(usize, usize)>,
}

impl Pairing {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(i, j) in &pairs {
            if i == j || !seen.insert(i) || !seen.insert(j) {
                return Err(Error::Domain(format!(
                    "pairs must be disjoint, ({i}, {j}) repeats an index"
                )));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Indices covered by some pair, ascending.
    pub fn covered(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
        v.sort_unstable();
        v
    }
}

/// The better of the two interleaved consecutive pairings of an odd-length
/// sorted sequence: pairing positions {(0,1),(2,3),…} (leaving the last
/// free) or {(1,2),(3,4),…} (leaving the first free), whichever has
/// smaller E₁ (the first on ties). Guarantees E₁ ≤ π/2 and E₂ ≤ 2.
pub fn optimal_pairing(sf: &StandardForm) -> Result<Pairing> {
    let n = sf.len();
    if n % 2 == 0 {
        return Err(Error::Domain(format!("need odd n, got {n}")));
    }
    let even_start: Vec<(usize, usize)> = (0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect();
    let odd_start: Vec<(usize, usize)> = (0..n / 2).map(|i| (2 * i + 1, 2 * i + 2)).collect();
    let a = Pairing::new(even_start).expect("disjoint by construction");
    let b = Pairing::new(odd_start).expect("disjoint by construction");
    Ok(if sf.e1(&a) <= sf.e1(&b) { a } else { b })
}

/// Starting from the interleaved pairing, repeatedly drops the pair with
/// the largest squared length (ties broken by smallest first index) until
/// E₂ ≤ delta. The size never falls below ⌊n/2⌋ − ⌊10/delta⌋.
pub fn greedy_delta_pairing(sf: &StandardForm, delta: f64) -> Result<Pairing> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("need delta > 0, got {delta}")));
    }
    let mut pairs = optimal_pairing(sf)?.pairs().to_vec();
    let mut e2: f64 = pairs.iter().map(|&(i, j)| sf.pair_length_sq(i, j)).sum();
    while e2 > delta && !pairs.is_empty() {
        let worst = (0..pairs.len())
            .max_by(|&p, &q| {
                let lp = sf.pair_length_sq(pairs[p].0, pairs[p].1);
                let lq = sf.pair_length_sq(pairs[q].0, pairs[q].1);
                lp.partial_cmp(&lq)
                    .unwrap()
                    .then(pairs[q].0.cmp(&pairs[p].0))
            })
            .expect("nonempty");
        let (i, j) = pairs.remove(worst);
        e2 -= sf.pair_length_sq(i, j);
    }
    Pairing::new(pairs)
}

// ────────────────────────────── decomposition ──────────────────────────────

/// An odd index set split into a paired part A and a small remainder B.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    /// Pairs in input-index space.
    pub pairing: Pairing,
    /// Input indices covered by the pairing, ascending.
    pub a: Vec<usize>,
    /// The remaining input indices, ascending; always of odd size.
    pub b: Vec<usize>,
    /// E₂ of the pairing.
    pub e2: f64,
    /// Slack in the inequality delta² ≥ delta²/2 + E₂ required downstream;
    /// nonnegative by construction, recorded for inspection.
    pub hypothesis_margin: f64,
}

/// Splits an odd planar configuration into A ∪ B where A is covered by a
/// pairing with E₂ ≤ delta²/2 and |B| ≤ 40/delta² + 1 is odd. Pair indices
/// refer to the original input order.
pub fn approximate_decomposition(
    config: &UnitVectorConfig,
    delta: f64,
) -> Result<Decomposition> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("need delta > 0, got {delta}")));
    }
    let sf = to_standard_form(config)?;
    if sf.len() % 2 == 0 {
        return Err(Error::Domain(format!("need odd n, got {}", sf.len())));
    }
    let pairing = greedy_delta_pairing(&sf, delta * delta / 2.0)?;
    let e2 = sf.e2(&pairing);
    let covered: std::collections::HashSet<usize> = pairing.covered().into_iter().collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (pos, &orig) in sf.order().iter().enumerate() {
        if covered.contains(&pos) {
            a.push(orig);
        } else {
            b.push(orig);
        }
    }
    a.sort_unstable();
    b.sort_unstable();
    let original_pairs = pairing
        .pairs()
        .iter()
        .map(|&(i, j)| (sf.order()[i], sf.order()[j]))
        .collect();
    Ok(Decomposition {
        pairing: Pairing::new(original_pairs)?,
        a,
        b,
        e2,
        hypothesis_margin: delta * delta - (delta * delta / 2.0 + e2),
    })
}

// ─────────────────────────────────── tests ─────────────────────────────────
