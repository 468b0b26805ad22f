//! Deterministic measure-flow dynamics and discounted value evaluation.
//!
//! Once a local policy is fixed, the population state distribution evolves
//! deterministically; the flow operator, the integrated one-step reward and
//! the two value evaluators (deterministic-flow and particle Monte-Carlo)
//! live here.

use crate::dist::{action_marginal, Distribution, LocalPolicy};
use crate::env::{check_dims, MeanFieldEnv};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Flow operator: `Φ(μ, h)(s') = Σ_s μ(s) Σ_a h(s,a) P(s, μ, a, ν(μ,h))(s')`.
pub fn flow(env: &impl MeanFieldEnv, mu: &Distribution, policy: &LocalPolicy) -> Result<Distribution> {
    check_dims(env, mu, policy)?;
    let nu = action_marginal(mu, policy)?;
    let mut weights = vec![0.0; env.num_states()];
    for s in 0..env.num_states() {
        let ms = mu.weight(s);
        if ms == 0.0 {
            continue;
        }
        for a in 0..env.num_actions() {
            let p = ms * policy.prob(s, a);
            if p == 0.0 {
                continue;
            }
            let next = env.transition(s, mu, a, &nu);
            for (sp, w) in weights.iter_mut().enumerate() {
                *w += p * next.weight(sp);
            }
        }
    }
    Distribution::from_flow(weights)
}

/// Integrated one-step reward `r̂(μ, h) = Σ_s μ(s) Σ_a h(s,a) E[R(s, μ, a, ν)]`.
pub fn integrated_reward(
    env: &impl MeanFieldEnv,
    mu: &Distribution,
    policy: &LocalPolicy,
) -> Result<f64> {
    check_dims(env, mu, policy)?;
    let nu = action_marginal(mu, policy)?;
    let mut total = 0.0;
    for s in 0..env.num_states() {
        let ms = mu.weight(s);
        if ms == 0.0 {
            continue;
        }
        for a in 0..env.num_actions() {
            let p = ms * policy.prob(s, a);
            if p == 0.0 {
                continue;
            }
            total += p * env.reward_expectation(s, mu, a, &nu);
        }
    }
    Ok(total)
}

/// Monte-Carlo estimate of the integrated reward from `num_particles`
/// sampled (state, action, reward) triples; unbiased for
/// [`integrated_reward`], with the mean-field arguments held at their exact
/// population values.
pub fn sample_integrated_reward(
    env: &impl MeanFieldEnv,
    mu: &Distribution,
    policy: &LocalPolicy,
    num_particles: usize,
    rng: &mut SimRng,
) -> Result<f64> {
    check_dims(env, mu, policy)?;
    if num_particles == 0 {
        return Err(Error::Domain("need at least one particle".into()));
    }
    let nu = action_marginal(mu, policy)?;
    let mut total = 0.0;
    for _ in 0..num_particles {
        let s = mu.sample(rng);
        let a = policy.row(s).sample(rng);
        total += env.reward_sample(s, mu, a, &nu, rng);
    }
    Ok(total / num_particles as f64)
}

/// A stationary feedback control: maps the population state distribution to
/// a local policy.
pub trait StationaryControl {
    fn policy(&self, mu: &Distribution) -> LocalPolicy;
}

/// A fixed local policy used at every distribution.
impl StationaryControl for LocalPolicy {
    fn policy(&self, _mu: &Distribution) -> LocalPolicy {
        self.clone()
    }
}

impl<F: Fn(&Distribution) -> LocalPolicy> StationaryControl for F {
    fn policy(&self, mu: &Distribution) -> LocalPolicy {
        self(mu)
    }
}

/// One trajectory of the lifted deterministic system.
#[derive(Debug, Clone)]
pub struct Rollout {
    /// `μ_0, …, μ_T` (one more entry than rewards).
    pub states: Vec<Distribution>,
    /// `h_0, …, h_{T-1}`.
    pub policies: Vec<LocalPolicy>,
    /// `r̂(μ_t, h_t)` for `t < T`.
    pub rewards: Vec<f64>,
}

impl Rollout {
    /// Discounted sum of the recorded rewards.
    pub fn discounted_return(&self, gamma: f64) -> f64 {
        let mut acc = 0.0;
        let mut g = 1.0;
        for &r in &self.rewards {
            acc += g * r;
            g *= gamma;
        }
        acc
    }
}

/// Rolls the deterministic flow forward for `horizon` steps under a
/// stationary control.
pub fn rollout(
    env: &impl MeanFieldEnv,
    control: &(impl StationaryControl + ?Sized),
    mu0: &Distribution,
    horizon: usize,
) -> Result<Rollout> {
    let mut states = Vec::with_capacity(horizon + 1);
    let mut policies = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    let mut mu = mu0.clone();
    states.push(mu.clone());
    for _ in 0..horizon {
        let h = control.policy(&mu);
        rewards.push(integrated_reward(env, &mu, &h)?);
        let next = flow(env, &mu, &h)?;
        policies.push(h);
        states.push(next.clone());
        mu = next;
    }
    Ok(Rollout { states, policies, rewards })
}

/// Rolls forward under a time-dependent policy sequence (horizon = its length).
pub fn rollout_seq(
    env: &impl MeanFieldEnv,
    policies: &[LocalPolicy],
    mu0: &Distribution,
) -> Result<Rollout> {
    let mut states = Vec::with_capacity(policies.len() + 1);
    let mut rewards = Vec::with_capacity(policies.len());
    let mut mu = mu0.clone();
    states.push(mu.clone());
    for h in policies {
        rewards.push(integrated_reward(env, &mu, h)?);
        let next = flow(env, &mu, h)?;
        states.push(next.clone());
        mu = next;
    }
    Ok(Rollout { states, policies: policies.to_vec(), rewards })
}

/// Truncation horizon for which the discarded geometric tail is below `tol`:
/// smallest `T` with `γ^T r_max / (1-γ) < tol`.
pub fn truncation_horizon(gamma: f64, reward_bound: f64, tol: f64) -> usize {
    if reward_bound == 0.0 {
        return 0;
    }
    let t = ((tol * (1.0 - gamma) / reward_bound).ln() / gamma.ln()).ceil();
    t.max(0.0) as usize
}

/// Discounted value of a stationary control from `mu0`, truncated so the
/// result is within `tol` of the infinite sum. Requires a declared reward
/// bound.
pub fn policy_value(
    env: &impl MeanFieldEnv,
    control: &(impl StationaryControl + ?Sized),
    mu0: &Distribution,
    tol: f64,
) -> Result<f64> {
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let r_max = env.reward_bound().ok_or(Error::UnboundedReward)?;
    let horizon = truncation_horizon(env.gamma(), r_max, tol);
    policy_value_horizon(env, control, mu0, horizon)
}

/// Discounted value truncated at an explicit horizon (for callers without a
/// reward bound).
pub fn policy_value_horizon(
    env: &impl MeanFieldEnv,
    control: &(impl StationaryControl + ?Sized),
    mu0: &Distribution,
    horizon: usize,
) -> Result<f64> {
    let gamma = env.gamma();
    let mut mu = mu0.clone();
    let mut acc = 0.0;
    let mut g = 1.0;
    for _ in 0..horizon {
        let h = control.policy(&mu);
        acc += g * integrated_reward(env, &mu, &h)?;
        mu = flow(env, &mu, &h)?;
        g *= gamma;
    }
    Ok(acc)
}

/// A particle Monte-Carlo value estimate with its sampling uncertainty.
#[derive(Debug, Clone, Copy)]
pub struct ParticleEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub num_particles: usize,
    pub horizon: usize,
}

/// Estimates the discounted value by simulating `num_particles` independent
/// agents for `horizon` steps. The mean-field arguments follow the
/// deterministic flow (infinite-population limit), so each particle return is
/// an i.i.d. unbiased sample of the truncated value.
pub fn particle_estimate(
    env: &impl MeanFieldEnv,
    control: &(impl StationaryControl + ?Sized),
    mu0: &Distribution,
    num_particles: usize,
    horizon: usize,
    rng: &mut SimRng,
) -> Result<ParticleEstimate> {
    if num_particles == 0 {
        return Err(Error::Domain("need at least one particle".into()));
    }
    let gamma = env.gamma();
    // deterministic flow and per-step policies, shared by all particles
    let mut mus = Vec::with_capacity(horizon);
    let mut policies = Vec::with_capacity(horizon);
    let mut nus = Vec::with_capacity(horizon);
    let mut mu = mu0.clone();
    for _ in 0..horizon {
        let h = control.policy(&mu);
        nus.push(action_marginal(&mu, &h)?);
        let next = flow(env, &mu, &h)?;
        mus.push(mu);
        policies.push(h);
        mu = next;
    }

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..num_particles {
        let mut s = mu0.sample(rng);
        let mut ret = 0.0;
        let mut g = 1.0;
        for t in 0..horizon {
            let a = policies[t].row(s).sample(rng);
            ret += g * env.reward_sample(s, &mus[t], a, &nus[t], rng);
            s = env.transition(s, &mus[t], a, &nus[t]).sample(rng);
            g *= gamma;
        }
        sum += ret;
        sum_sq += ret * ret;
    }
    let n = num_particles as f64;
    let mean = sum / n;
    let var = if num_particles > 1 { (sum_sq - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
    Ok(ParticleEstimate {
        mean,
        std_error: (var / n).sqrt(),
        num_particles,
        horizon,
    })
}

/// Convenience wrapper returning only the estimate mean.
pub fn particle_value(
    env: &impl MeanFieldEnv,
    control: &(impl StationaryControl + ?Sized),
    mu0: &Distribution,
    num_particles: usize,
    horizon: usize,
    rng: &mut SimRng,
) -> Result<f64> {
    Ok(particle_estimate(env, control, mu0, num_particles, horizon, rng)?.mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    /// Identity-kernel environment with zero reward.
    struct Frozen {
        states: usize,
        actions: usize,
    }

    impl MeanFieldEnv for Frozen {
        fn num_states(&self) -> usize {
            self.states
        }
        fn num_actions(&self) -> usize {
            self.actions
        }
        fn gamma(&self) -> f64 {
            0.5
        }
        fn reward_bound(&self) -> Option<f64> {
            Some(0.0)
        }
        fn transition(&self, s: usize, _: &Distribution, _: usize, _: &Distribution) -> Distribution {
            Distribution::dirac(s, self.states)
        }
        fn reward_expectation(&self, _: usize, _: &Distribution, _: usize, _: &Distribution) -> f64 {
            0.0
        }
    }

    fn dist(w: &[f64]) -> Distribution {
        Distribution::new(w.to_vec()).unwrap()
    }

    #[test]
    fn identity_kernel_is_flow_fixed_point() {
        let env = Frozen { states: 3, actions: 2 };
        let h = LocalPolicy::constant(dist(&[0.4, 0.6]), 3);
        for mu in [dist(&[0.2, 0.3, 0.5]), Distribution::dirac(1, 3)] {
            let next = flow(&env, &mu, &h).unwrap();
            assert!(next.l1_distance(&mu).unwrap() < 1e-15);
        }
    }

    #[test]
    fn zero_reward_env_evaluates_to_zero() {
        let env = Frozen { states: 2, actions: 2 };
        let h = LocalPolicy::constant(dist(&[0.5, 0.5]), 2);
        let mu = dist(&[0.7, 0.3]);
        assert_eq!(integrated_reward(&env, &mu, &h).unwrap(), 0.0);
        assert_eq!(policy_value(&env, &h, &mu, 1e-9).unwrap(), 0.0);
        let mut rng = seeded(1);
        assert_eq!(sample_integrated_reward(&env, &mu, &h, 1, &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn rollout_horizon_zero_is_initial_state_only() {
        let env = Frozen { states: 2, actions: 2 };
        let h = LocalPolicy::constant(dist(&[1.0, 0.0]), 2);
        let mu = dist(&[0.7, 0.3]);
        let r = rollout(&env, &h, &mu, 0).unwrap();
        assert!(r.rewards.is_empty());
        assert_eq!(r.states.len(), 1);
        assert!(r.states[0].l1_distance(&mu).unwrap() < 1e-15);
    }

    #[test]
    fn identity_env_rollout_is_constant() {
        let env = Frozen { states: 2, actions: 2 };
        let h = LocalPolicy::constant(dist(&[0.3, 0.7]), 2);
        let mu = dist(&[0.25, 0.75]);
        let r = rollout(&env, &h, &mu, 5).unwrap();
        for state in &r.states {
            assert!(state.l1_distance(&mu).unwrap() < 1e-12);
        }
    }

    #[test]
    fn mismatched_policy_is_rejected() {
        let env = Frozen { states: 2, actions: 2 };
        let h = LocalPolicy::constant(dist(&[0.5, 0.5]), 3);
        let mu = dist(&[0.5, 0.5]);
        assert!(flow(&env, &mu, &h).is_err());
    }

    #[test]
    fn truncation_horizon_tail_bound() {
        let t = truncation_horizon(0.5, 12.0, 1e-6);
        // tail after t must be below tol, one step earlier must not
        let tail = |k: u32| 0.5f64.powi(k as i32) * 12.0 / 0.5;
        assert!(tail(t as u32) < 1e-6);
        assert!(tail(t as u32 - 1) >= 1e-6);
    }

    #[test]
    fn particle_value_on_deterministic_env_matches_truncated_value() {
        let env = Frozen { states: 2, actions: 2 };
        let h = LocalPolicy::constant(dist(&[1.0, 0.0]), 2);
        let mu = Distribution::dirac(0, 2);
        let mut rng = seeded(3);
        let est = particle_estimate(&env, &h, &mu, 10, 7, &mut rng).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_error, 0.0);
    }
}
