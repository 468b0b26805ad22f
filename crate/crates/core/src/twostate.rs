//! The two-state/two-action benchmark with a distribution-tracking reward
//! and a closed-form optimal policy and value, used as the test oracle.
//!
//! States are {0, 1}; action 0 stays put, action 1 switches state with
//! probability `lambda_s`. The population reward tracks a target two-point
//! distribution `B = (p, 1-p)` through an L1 penalty.

use crate::dist::{Distribution, LocalPolicy};
use crate::env::MeanFieldEnv;
use crate::error::{Error, Result};

/// Parameters of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStateParams {
    /// Switch probability out of state 0 under action 1.
    pub lambda0: f64,
    /// Switch probability out of state 1 under action 1.
    pub lambda1: f64,
    /// Target mass on state 0.
    pub p: f64,
    /// Weight of the distance-to-target penalty.
    pub lambda: f64,
    /// Discount factor.
    pub gamma: f64,
}

impl TwoStateParams {
    pub fn new(lambda0: f64, lambda1: f64, p: f64, lambda: f64, gamma: f64) -> Result<Self> {
        let params = Self { lambda0, lambda1, p, lambda, gamma };
        params.validate()?;
        Ok(params)
    }

    /// The benchmark configuration used throughout the experiments:
    /// `lambda0 = 0.5, lambda1 = 0.8, p = 0.6, lambda = 5, gamma = 0.5`.
    pub fn benchmark() -> Self {
        Self { lambda0: 0.5, lambda1: 0.8, p: 0.6, lambda: 5.0, gamma: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda0) || !(0.0..=1.0).contains(&self.lambda1) {
            return Err(Error::Domain("switch probabilities must lie in [0,1]".into()));
        }
        if self.lambda <= 0.0 {
            return Err(Error::Domain("penalty weight must be positive".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Domain(format!("gamma {} outside (0,1)", self.gamma)));
        }
        // feasibility of holding the target fixed: 1 - lambda0 <= p <= lambda1
        if !(1.0 - self.lambda0 <= self.p && self.p <= self.lambda1) {
            return Err(Error::Domain(format!(
                "target mass {} outside feasible range [{}, {}]",
                self.p,
                1.0 - self.lambda0,
                self.lambda1
            )));
        }
        Ok(())
    }

    /// The target distribution `B = (p, 1-p)`.
    pub fn target(&self) -> Distribution {
        Distribution::new(vec![self.p, 1.0 - self.p]).expect("target is a distribution")
    }
}

/// The benchmark environment. The kernel ignores the population; the reward
/// sees only the state and the state distribution.
#[derive(Debug, Clone)]
pub struct TwoStateEnv {
    params: TwoStateParams,
    mean_field_terms: bool,
}

/// Builds the benchmark environment from validated parameters.
pub fn build_env(params: TwoStateParams) -> Result<TwoStateEnv> {
    params.validate()?;
    Ok(TwoStateEnv { params, mean_field_terms: true })
}

impl TwoStateEnv {
    /// Control variant with the distribution-dependent reward terms removed:
    /// the reward is the raw state value. Isolates what the population
    /// coupling contributes to any observed effect.
    pub fn without_mean_field(params: TwoStateParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, mean_field_terms: false })
    }

    pub fn params(&self) -> &TwoStateParams {
        &self.params
    }

    pub fn has_mean_field_terms(&self) -> bool {
        self.mean_field_terms
    }
}

impl MeanFieldEnv for TwoStateEnv {
    fn num_states(&self) -> usize {
        2
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn gamma(&self) -> f64 {
        self.params.gamma
    }

    fn reward_bound(&self) -> Option<f64> {
        if self.mean_field_terms {
            // |s| <= 1, (mu(1))^2 <= 1, lambda * l1 <= 2 lambda
            Some(2.0 + 2.0 * self.params.lambda)
        } else {
            Some(1.0)
        }
    }

    fn transition(&self, s: usize, _: &Distribution, a: usize, _: &Distribution) -> Distribution {
        if a == 0 {
            return Distribution::dirac(s, 2);
        }
        let switch = if s == 0 { self.params.lambda0 } else { self.params.lambda1 };
        let mut w = vec![0.0; 2];
        w[s] = 1.0 - switch;
        w[1 - s] = switch;
        Distribution::new(w).expect("kernel row is a distribution")
    }

    fn reward_expectation(&self, s: usize, mu: &Distribution, _: usize, _: &Distribution) -> f64 {
        if !self.mean_field_terms {
            return s as f64;
        }
        let m1 = mu.weight(1);
        let dist = mu
            .l1_distance(&self.params.target())
            .expect("reward queried with mismatched distribution");
        s as f64 - m1 * m1 - self.params.lambda * dist
    }
}

/// Guard for the closed-form oracle: it is derived in the regime where the
/// distance penalty dominates, so it is refused below this weight.
const ORACLE_MIN_LAMBDA: f64 = 1.0;

/// The stationary policy holding the population at the target from any
/// starting distribution: state 0 stays with probability `1-(1-p)/lambda0`,
/// state 1 with probability `1-p/lambda1`.
pub fn optimal_policy(params: &TwoStateParams) -> Result<LocalPolicy> {
    params.validate()?;
    if params.lambda < ORACLE_MIN_LAMBDA {
        return Err(Error::Domain(format!(
            "closed-form optimum requires penalty weight >= {ORACLE_MIN_LAMBDA} (got {})",
            params.lambda
        )));
    }
    let stay0 = 1.0 - (1.0 - params.p) / params.lambda0;
    let stay1 = 1.0 - params.p / params.lambda1;
    LocalPolicy::new(vec![
        Distribution::new(vec![stay0, 1.0 - stay0])?,
        Distribution::new(vec![stay1, 1.0 - stay1])?,
    ])
}

/// Closed-form optimal value from the initial mass `p0` on state 0:
/// one transient step, then the stationary reward at the target forever.
pub fn optimal_value(params: &TwoStateParams, p0: f64) -> Result<f64> {
    params.validate()?;
    if params.lambda < ORACLE_MIN_LAMBDA {
        return Err(Error::Domain(format!(
            "closed-form optimum requires penalty weight >= {ORACLE_MIN_LAMBDA} (got {})",
            params.lambda
        )));
    }
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::Domain(format!("initial mass {p0} outside [0,1]")));
    }
    let p = params.p;
    let stationary = 1.0 - p - (1.0 - p) * (1.0 - p);
    Ok(1.0 - p0 - (1.0 - p0) * (1.0 - p0) - 2.0 * params.lambda * (p0 - p).abs()
        + params.gamma / (1.0 - params.gamma) * stationary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::l1_distance;
    use crate::dynamics::{flow, integrated_reward, policy_value, rollout};

    fn dist(w: &[f64]) -> Distribution {
        Distribution::new(w.to_vec()).unwrap()
    }

    #[test]
    fn parameter_feasibility_is_enforced() {
        assert!(TwoStateParams::new(0.5, 0.8, 0.6, 5.0, 0.5).is_ok());
        // p above lambda1
        assert!(TwoStateParams::new(0.5, 0.8, 0.9, 5.0, 0.5).is_err());
        // p below 1 - lambda0
        assert!(TwoStateParams::new(0.5, 0.8, 0.4, 5.0, 0.5).is_err());
        assert!(TwoStateParams::new(0.5, 0.8, 0.6, 5.0, 1.5).is_err());
    }

    #[test]
    fn kernel_rows() {
        let env = build_env(TwoStateParams::benchmark()).unwrap();
        let mu = dist(&[0.5, 0.5]);
        let nu = dist(&[0.5, 0.5]);
        // action 0 stays
        assert!(env.transition(0, &mu, 0, &nu).l1_distance(&Distribution::dirac(0, 2)).unwrap() < 1e-15);
        // action 1 switches with probability lambda0 = 0.5
        let t = env.transition(0, &mu, 1, &nu);
        assert!((t.weight(0) - 0.5).abs() < 1e-15);
        assert!((t.weight(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reward_at_target() {
        let env = build_env(TwoStateParams::benchmark()).unwrap();
        let b = env.params().target();
        let nu = dist(&[0.5, 0.5]);
        // s = 1 at the target: 1 - (0.4)^2 - 0
        assert!((env.reward_expectation(1, &b, 0, &nu) - 0.84).abs() < 1e-12);
    }

    #[test]
    fn optimal_policy_rows_and_boundary() {
        let params = TwoStateParams::benchmark();
        let pi = optimal_policy(&params).unwrap();
        assert!((pi.prob(0, 0) - 0.2).abs() < 1e-12);
        assert!((pi.prob(0, 1) - 0.8).abs() < 1e-12);
        assert!((pi.prob(1, 0) - 0.25).abs() < 1e-12);
        assert!((pi.prob(1, 1) - 0.75).abs() < 1e-12);
        // boundary p = 1 - lambda0: state 0 always switches
        let boundary = TwoStateParams::new(0.5, 0.8, 0.5, 5.0, 0.5).unwrap();
        let pi = optimal_policy(&boundary).unwrap();
        assert!(pi.prob(0, 0).abs() < 1e-12);
        assert!((pi.prob(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_guard_refuses_small_penalty() {
        let params = TwoStateParams::new(0.5, 0.8, 0.6, 0.5, 0.5).unwrap();
        assert!(optimal_policy(&params).is_err());
        assert!(optimal_value(&params, 0.5).is_err());
    }

    #[test]
    fn optimal_value_examples() {
        let params = TwoStateParams::benchmark();
        assert!((optimal_value(&params, 0.6).unwrap() - 0.48).abs() < 1e-12);
        assert!((optimal_value(&params, 0.5).unwrap() + 0.51).abs() < 1e-12);
    }

    #[test]
    fn flow_under_optimal_policy_reaches_target_from_anywhere() {
        let params = TwoStateParams::benchmark();
        let env = build_env(params).unwrap();
        let pi = optimal_policy(&params).unwrap();
        let b = params.target();
        for mu in [b.clone(), dist(&[1.0, 0.0]), dist(&[0.15, 0.85]), dist(&[0.5, 0.5])] {
            let next = flow(&env, &mu, &pi).unwrap();
            assert!(l1_distance(&next, &b).unwrap() < 1e-12);
        }
    }

    #[test]
    fn flow_of_always_switch_from_point_mass() {
        let params = TwoStateParams::benchmark();
        let env = build_env(params).unwrap();
        let switch = LocalPolicy::constant(Distribution::dirac(1, 2), 2);
        let next = flow(&env, &Distribution::dirac(0, 2), &switch).unwrap();
        assert!((next.weight(0) - 0.5).abs() < 1e-12);
        assert!((next.weight(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn integrated_reward_examples() {
        let params = TwoStateParams::benchmark();
        let env = build_env(params).unwrap();
        let any_h = LocalPolicy::constant(dist(&[0.5, 0.5]), 2);
        let at_target = integrated_reward(&env, &params.target(), &any_h).unwrap();
        assert!((at_target - 0.24).abs() < 1e-12);
        let at_zero = integrated_reward(&env, &dist(&[1.0, 0.0]), &any_h).unwrap();
        assert!((at_zero + 4.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_rollout_stays_at_target() {
        let params = TwoStateParams::benchmark();
        let env = build_env(params).unwrap();
        let pi = optimal_policy(&params).unwrap();
        let b = params.target();
        let r = rollout(&env, &pi, &b, 12).unwrap();
        for state in &r.states {
            assert!(l1_distance(state, &b).unwrap() < 1e-12);
        }
    }

    #[test]
    fn policy_value_matches_closed_form() {
        let params = TwoStateParams::benchmark();
        let env = build_env(params).unwrap();
        let pi = optimal_policy(&params).unwrap();
        for p0 in [0.6, 0.5, 0.15, 0.95] {
            let mu0 = dist(&[p0, 1.0 - p0]);
            let v = policy_value(&env, &pi, &mu0, 1e-6).unwrap();
            let oracle = optimal_value(&params, p0).unwrap();
            assert!((v - oracle).abs() < 1e-6, "p0={p0}: {v} vs {oracle}");
        }
    }
}
