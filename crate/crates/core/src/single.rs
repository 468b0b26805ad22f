//! Classical per-(state, action) Q solving and its lift to distribution
//! space, which coincides with the lifted table when neither the kernel nor
//! the reward sees the population.

use crate::dist::{Distribution, LocalPolicy};
use crate::env::MeanFieldEnv;
use crate::error::{Error, Result};

/// A finite MDP with mean rewards, kernel `P(s, a, ·)` stored row by row.
#[derive(Debug, Clone)]
pub struct SingleAgentMdp {
    num_states: usize,
    num_actions: usize,
    /// `transitions[s * num_actions + a]`.
    transitions: Vec<Distribution>,
    /// `rewards[s * num_actions + a]` = E[r(s, a)].
    rewards: Vec<f64>,
}

impl SingleAgentMdp {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        transitions: Vec<Distribution>,
        rewards: Vec<f64>,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(Error::Domain("empty state or action set".into()));
        }
        if transitions.len() != num_states * num_actions || rewards.len() != transitions.len() {
            return Err(Error::DimensionMismatch {
                expected: num_states * num_actions,
                got: transitions.len().min(rewards.len()),
            });
        }
        for t in &transitions {
            if t.len() != num_states {
                return Err(Error::DimensionMismatch { expected: num_states, got: t.len() });
            }
        }
        Ok(Self { num_states, num_actions, transitions, rewards })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn transition(&self, s: usize, a: usize) -> &Distribution {
        &self.transitions[s * self.num_actions + a]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s * self.num_actions + a]
    }

    pub fn max_abs_reward(&self) -> f64 {
        self.rewards.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }
}

/// Q values over (state, action).
#[derive(Debug, Clone)]
pub struct SingleQTable {
    num_states: usize,
    num_actions: usize,
    values: Vec<f64>,
}

impl SingleQTable {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self { num_states, num_actions, values: vec![0.0; num_states * num_actions] }
    }

    pub fn value(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.num_actions + a]
    }

    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.values[s * self.num_actions + a] = v;
    }

    pub fn max_over_actions(&self, s: usize) -> f64 {
        self.values[s * self.num_actions..(s + 1) * self.num_actions]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }
}

/// Solves `Q(s,a) = E[r(s,a)] + γ Σ_{s'} P(s,a)(s') max_{a'} Q(s',a')` by
/// synchronous fixed-point sweeps to within `tol`.
pub fn solve_single_agent_q(
    mdp: &SingleAgentMdp,
    gamma: f64,
    tol: f64,
    max_iters: usize,
) -> Result<SingleQTable> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma {gamma} outside [0,1)")));
    }
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let mut q = SingleQTable::zeros(mdp.num_states, mdp.num_actions);
    for it in 0..max_iters {
        let mut change = 0.0f64;
        let mut next = q.clone();
        for s in 0..mdp.num_states {
            for a in 0..mdp.num_actions {
                let cont: f64 = mdp
                    .transition(s, a)
                    .weights()
                    .iter()
                    .enumerate()
                    .map(|(sp, &p)| p * q.max_over_actions(sp))
                    .sum();
                let v = mdp.reward(s, a) + gamma * cont;
                change = change.max((v - q.value(s, a)).abs());
                next.set(s, a, v);
            }
        }
        q = next;
        if change < tol {
            return Ok(q);
        }
        if it + 1 == max_iters {
            return Err(Error::NonConvergence { iterations: max_iters, residual: change });
        }
    }
    Ok(q)
}

/// Lift of a per-(state, action) table to distribution space:
/// `Σ_s μ(s) Σ_a q(s,a) h(s,a)`.
pub fn lifted_from_single(q: &SingleQTable, mu: &Distribution, policy: &LocalPolicy) -> Result<f64> {
    if mu.len() != q.num_states || policy.num_states() != q.num_states {
        return Err(Error::DimensionMismatch { expected: q.num_states, got: mu.len() });
    }
    if policy.num_actions() != q.num_actions {
        return Err(Error::DimensionMismatch { expected: q.num_actions, got: policy.num_actions() });
    }
    let mut total = 0.0;
    for s in 0..q.num_states {
        let ms = mu.weight(s);
        if ms == 0.0 {
            continue;
        }
        for a in 0..q.num_actions {
            total += ms * policy.prob(s, a) * q.value(s, a);
        }
    }
    Ok(total)
}

/// A mean-field environment that ignores the population: kernel and reward
/// come from a plain MDP. The lifted machinery on such environments agrees
/// with the single-agent solution.
pub struct MeanFieldFree<'a> {
    pub mdp: &'a SingleAgentMdp,
    pub gamma: f64,
}

impl MeanFieldEnv for MeanFieldFree<'_> {
    fn num_states(&self) -> usize {
        self.mdp.num_states()
    }
    fn num_actions(&self) -> usize {
        self.mdp.num_actions()
    }
    fn gamma(&self) -> f64 {
        self.gamma
    }
    fn reward_bound(&self) -> Option<f64> {
        Some(self.mdp.max_abs_reward())
    }
    fn transition(&self, s: usize, _: &Distribution, a: usize, _: &Distribution) -> Distribution {
        self.mdp.transition(s, a).clone()
    }
    fn reward_expectation(&self, s: usize, _: &Distribution, a: usize, _: &Distribution) -> f64 {
        self.mdp.reward(s, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_reward_solves_to_zero_table() {
        let mdp = SingleAgentMdp::new(
            2,
            2,
            vec![Distribution::dirac(0, 2); 4],
            vec![0.0; 4],
        )
        .unwrap();
        let q = solve_single_agent_q(&mdp, 0.9, 1e-12, 500).unwrap();
        for s in 0..2 {
            for a in 0..2 {
                assert_eq!(q.value(s, a), 0.0);
            }
        }
    }

    #[test]
    fn single_state_closed_form() {
        // one state, rewards r(a): Q(a) = r(a) + gamma * max_a r(a) / (1 - gamma)
        let rewards = vec![1.0, 3.0, 2.0];
        let mdp = SingleAgentMdp::new(1, 3, vec![Distribution::dirac(0, 1); 3], rewards.clone())
            .unwrap();
        let gamma = 0.5;
        let q = solve_single_agent_q(&mdp, gamma, 1e-12, 500).unwrap();
        for (a, &r) in rewards.iter().enumerate() {
            let expected = r + gamma / (1.0 - gamma) * 3.0;
            assert!((q.value(0, a) - expected).abs() < 1e-9, "action {a}");
        }
    }

    #[test]
    fn absorbing_chain_matches_geometric_sums() {
        // state 1 absorbs with reward 1; state 0: action 0 stays (reward 0),
        // action 1 jumps to state 1 (reward 0)
        let transitions = vec![
            Distribution::dirac(0, 2), // (0, stay)
            Distribution::dirac(1, 2), // (0, jump)
            Distribution::dirac(1, 2), // (1, a0)
            Distribution::dirac(1, 2), // (1, a1)
        ];
        let rewards = vec![0.0, 0.0, 1.0, 1.0];
        let mdp = SingleAgentMdp::new(2, 2, transitions, rewards).unwrap();
        let gamma = 0.5;
        let q = solve_single_agent_q(&mdp, gamma, 1e-13, 500).unwrap();
        // V(1) = 1/(1-gamma) = 2; Q(0, jump) = gamma * V(1) = 1
        assert!((q.value(1, 0) - 2.0).abs() < 1e-9);
        assert!((q.value(0, 1) - 1.0).abs() < 1e-9);
        // Q(0, stay) = gamma * V(0), V(0) = max(Q(0,stay), 1) = 1
        assert!((q.value(0, 0) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn lift_of_constant_table_is_the_constant() {
        let mut q = SingleQTable::zeros(2, 2);
        for s in 0..2 {
            for a in 0..2 {
                q.set(s, a, 2.5);
            }
        }
        let mu = Distribution::new(vec![0.3, 0.7]).unwrap();
        let h = LocalPolicy::constant(Distribution::new(vec![0.6, 0.4]).unwrap(), 2);
        assert!((lifted_from_single(&q, &mu, &h).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn lift_at_point_masses_reads_one_entry() {
        let mut q = SingleQTable::zeros(2, 2);
        q.set(1, 0, -3.25);
        let mu = Distribution::dirac(1, 2);
        let h = LocalPolicy::constant(Distribution::dirac(0, 2), 2);
        assert_eq!(lifted_from_single(&q, &mu, &h).unwrap(), -3.25);
    }
}
