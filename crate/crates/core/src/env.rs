//! The mean-field environment interface and particle ensembles.

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// A finite mean-field environment: transition kernel and reward both see the
/// individual state/action and the population state/action marginals.
pub trait MeanFieldEnv {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;

    /// Discount factor in (0, 1).
    fn gamma(&self) -> f64;

    /// Almost-sure bound on |reward|, when one is declared.
    fn reward_bound(&self) -> Option<f64> {
        None
    }

    /// Next-state distribution `P(s, μ, a, ν, ·)`.
    fn transition(
        &self,
        state: usize,
        mu: &Distribution,
        action: usize,
        nu: &Distribution,
    ) -> Distribution;

    /// Mean of the reward distribution `R(s, μ, a, ν, ·)`.
    fn reward_expectation(
        &self,
        state: usize,
        mu: &Distribution,
        action: usize,
        nu: &Distribution,
    ) -> f64;

    /// One draw from the reward distribution. Defaults to the expectation,
    /// which is exact for environments with deterministic rewards.
    fn reward_sample(
        &self,
        state: usize,
        mu: &Distribution,
        action: usize,
        nu: &Distribution,
        _rng: &mut SimRng,
    ) -> f64 {
        self.reward_expectation(state, mu, action, nu)
    }
}

/// Checks that `mu` and `h` are sized for `env`.
pub(crate) fn check_dims(
    env: &(impl MeanFieldEnv + ?Sized),
    mu: &Distribution,
    policy: &crate::dist::LocalPolicy,
) -> Result<()> {
    if mu.len() != env.num_states() {
        return Err(Error::DimensionMismatch { expected: env.num_states(), got: mu.len() });
    }
    if policy.num_states() != env.num_states() {
        return Err(Error::DimensionMismatch {
            expected: env.num_states(),
            got: policy.num_states(),
        });
    }
    if policy.num_actions() != env.num_actions() {
        return Err(Error::DimensionMismatch {
            expected: env.num_actions(),
            got: policy.num_actions(),
        });
    }
    Ok(())
}

/// A finite sample of agent states drawn from a population distribution.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    states: Vec<usize>,
    num_states: usize,
}

impl ParticleEnsemble {
    /// Draws `n` i.i.d. states from `mu`.
    pub fn sample(mu: &Distribution, n: usize, rng: &mut SimRng) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("ensemble needs at least one particle".into()));
        }
        let states = (0..n).map(|_| mu.sample(rng)).collect();
        Ok(Self { states, num_states: mu.len() })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    /// Empirical distribution of the particle states.
    pub fn empirical(&self) -> Distribution {
        let mut weights = vec![0.0; self.num_states];
        let w = 1.0 / self.states.len() as f64;
        for &s in &self.states {
            weights[s] += w;
        }
        Distribution::new(weights).expect("empirical weights form a distribution")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn empirical_distribution_is_valid_and_close_to_law() {
        let mu = Distribution::new(vec![0.3, 0.7]).unwrap();
        let mut rng = seeded(5);
        let ens = ParticleEnsemble::sample(&mu, 20_000, &mut rng).unwrap();
        let emp = ens.empirical();
        assert_eq!(emp.len(), 2);
        assert!(emp.l1_distance(&mu).unwrap() < 0.03);
    }

    #[test]
    fn zero_particles_rejected() {
        let mu = Distribution::uniform(2);
        let mut rng = seeded(5);
        assert!(ParticleEnsemble::sample(&mu, 0, &mut rng).is_err());
    }
}
