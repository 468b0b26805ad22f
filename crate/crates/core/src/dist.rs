//! Points on finite probability simplexes and row-stochastic local policies.

use crate::error::{Error, Result};
use crate::rng::SimRng;
use rand::Rng;

/// Absolute tolerance on the total mass of a distribution.
pub const MASS_TOL: f64 = 1e-9;

/// Below this drift the mass sum is accepted as exactly one; between this
/// and [`MASS_TOL`] the weights are renormalized (floating-point drift from
/// repeated flow applications); above [`MASS_TOL`] construction fails.
pub const DRIFT_TOL: f64 = 1e-12;

/// A probability distribution over a finite ground set, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    /// Validates and wraps a weight vector: nonnegative entries summing to
    /// one within [`MASS_TOL`].
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty ground set".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "weight {w} at index {i} is negative or non-finite"
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(Self { weights })
    }

    /// Point mass on element `index` of a ground set of size `dim`.
    pub fn dirac(index: usize, dim: usize) -> Self {
        assert!(index < dim, "dirac index {index} out of range {dim}");
        let mut weights = vec![0.0; dim];
        weights[index] = 1.0;
        Self { weights }
    }

    /// Uniform distribution over `dim` elements.
    pub fn uniform(dim: usize) -> Self {
        assert!(dim > 0);
        Self { weights: vec![1.0 / dim as f64; dim] }
    }

    /// Wraps weights produced by an operation that preserves total mass,
    /// renormalizing drift within ([`DRIFT_TOL`], [`MASS_TOL`]] and rejecting
    /// anything larger.
    pub(crate) fn from_flow(mut weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        let drift = (sum - 1.0).abs();
        if drift > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "mass drift {drift:e} exceeds tolerance"
            )));
        }
        if drift > DRIFT_TOL {
            for w in &mut weights {
                *w /= sum;
            }
        }
        for w in &mut weights {
            if *w < 0.0 {
                // kernel sums of nonnegative terms can only go negative by
                // rounding; clamp the epsilon
                if *w < -DRIFT_TOL {
                    return Err(Error::InvalidDistribution(format!(
                        "negative weight {w} after flow"
                    )));
                }
                *w = 0.0;
            }
        }
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.weights[index]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// L1 distance to another distribution on the same ground set; on a
    /// finite set with the discrete metric this equals twice the total
    /// variation distance and coincides with the order-1 transport distance.
    pub fn l1_distance(&self, other: &Distribution) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        Ok(self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    /// Draws one index distributed according to the weights.
    pub fn sample(&self, rng: &mut SimRng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.weights.len() - 1
    }

    /// Expected value of `f` over the ground set.
    pub fn expect(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.weights.iter().enumerate().map(|(i, &w)| w * f(i)).sum()
    }
}

/// L1 distance between two distributions on the same ground set.
pub fn l1_distance(a: &Distribution, b: &Distribution) -> Result<f64> {
    a.l1_distance(b)
}

/// A local policy: one action distribution per state, `h(s, ·)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPolicy {
    rows: Vec<Distribution>,
}

impl LocalPolicy {
    /// Builds a policy from per-state rows; all rows must share one action set.
    pub fn new(rows: Vec<Distribution>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidDistribution("policy with no states".into()));
        }
        let na = rows[0].len();
        for row in &rows {
            if row.len() != na {
                return Err(Error::DimensionMismatch { expected: na, got: row.len() });
            }
        }
        Ok(Self { rows })
    }

    /// The same action distribution in every state.
    pub fn constant(row: Distribution, num_states: usize) -> Self {
        assert!(num_states > 0);
        Self { rows: vec![row; num_states] }
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn num_actions(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, state: usize) -> &Distribution {
        &self.rows[state]
    }

    pub fn prob(&self, state: usize, action: usize) -> f64 {
        self.rows[state].weight(action)
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }
}

/// Action marginal `ν(μ, h)(a) = Σ_s μ(s) h(s, a)`.
pub fn action_marginal(mu: &Distribution, policy: &LocalPolicy) -> Result<Distribution> {
    if mu.len() != policy.num_states() {
        return Err(Error::DimensionMismatch { expected: policy.num_states(), got: mu.len() });
    }
    let na = policy.num_actions();
    let mut weights = vec![0.0; na];
    for s in 0..mu.len() {
        let ms = mu.weight(s);
        if ms == 0.0 {
            continue;
        }
        for (a, w) in weights.iter_mut().enumerate() {
            *w += ms * policy.prob(s, a);
        }
    }
    Distribution::from_flow(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(w: &[f64]) -> Distribution {
        Distribution::new(w.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_mass_and_negative_weights() {
        assert!(matches!(
            Distribution::new(vec![0.5, 0.6]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(matches!(
            Distribution::new(vec![1.2, -0.2]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(Distribution::new(vec![0.5, 0.5 + 5e-10]).is_ok());
    }

    #[test]
    fn l1_examples() {
        let a = dist(&[0.6, 0.4]);
        let b = dist(&[0.5, 0.5]);
        assert_eq!(a.l1_distance(&a).unwrap(), 0.0);
        assert!((a.l1_distance(&b).unwrap() - 0.2).abs() < 1e-15);
        let d0 = Distribution::dirac(0, 2);
        let d1 = Distribution::dirac(1, 2);
        assert_eq!(d0.l1_distance(&d1).unwrap(), 2.0);
    }

    #[test]
    fn l1_dimension_mismatch() {
        let a = dist(&[0.6, 0.4]);
        let b = Distribution::uniform(3);
        assert!(matches!(a.l1_distance(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn marginal_of_constant_rows_is_the_row() {
        let row = dist(&[0.3, 0.7]);
        let h = LocalPolicy::constant(row.clone(), 2);
        for mu in [dist(&[0.6, 0.4]), dist(&[0.1, 0.9]), Distribution::dirac(0, 2)] {
            let nu = action_marginal(&mu, &h).unwrap();
            assert!(nu.l1_distance(&row).unwrap() < 1e-12);
        }
    }

    #[test]
    fn dirac_state_selects_one_row() {
        let h = LocalPolicy::new(vec![dist(&[0.2, 0.8]), dist(&[0.9, 0.1])]).unwrap();
        let nu = action_marginal(&Distribution::dirac(0, 2), &h).unwrap();
        assert!(nu.l1_distance(h.row(0)).unwrap() < 1e-12);
    }

    #[test]
    fn marginal_weighted_row_sum() {
        let mu = dist(&[0.6, 0.4]);
        let h = LocalPolicy::new(vec![dist(&[0.2, 0.8]), dist(&[0.25, 0.75])]).unwrap();
        let nu = action_marginal(&mu, &h).unwrap();
        assert!((nu.weight(0) - 0.22).abs() < 1e-12);
        assert!((nu.weight(1) - 0.78).abs() < 1e-12);
    }

    #[test]
    fn marginal_dimension_mismatch_is_contract_violation() {
        let mu = Distribution::uniform(3);
        let h = LocalPolicy::constant(dist(&[0.5, 0.5]), 2);
        assert!(matches!(action_marginal(&mu, &h), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sampling_respects_support() {
        let mut rng = crate::rng::seeded(11);
        let d = Distribution::dirac(2, 4);
        for _ in 0..50 {
            assert_eq!(d.sample(&mut rng), 2);
        }
    }
}
