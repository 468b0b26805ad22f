//! Lifted tabular Q-learning for mean-field control.
//!
//! A population of interchangeable agents is summarized by its state
//! distribution; fixing a local policy makes that distribution evolve
//! deterministically. Treating (state distribution, local policy) as the
//! state-action pair of an auxiliary control problem restores dynamic
//! programming, and this crate implements that lifted problem end to end on
//! uniformly discretized probability simplexes:
//!
//! - [`dist`], [`env`], [`dynamics`]: distributions, local policies, the
//!   flow operator, integrated rewards, rollouts and value evaluation
//!   (deterministic-flow and particle Monte-Carlo).
//! - [`grid`], [`iq`]: simplex/policy grids with deterministic projection,
//!   the projected Bellman operator, value iteration and sweep-based
//!   learning on the lifted table.
//! - [`single`]: the per-(state, action) solution and its lift, which agree
//!   with the lifted table when nothing depends on the population.
//! - [`naive`]: the negative control — per-(state, action) learning whose
//!   converged values depend on the initial population distribution.
//! - [`twostate`]: the two-state benchmark with closed-form optimum.
//! - [`supply`]: the common-price supply game, its competitive softmax
//!   baseline, and the cooperative-vs-competitive head-to-head.

pub mod dist;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod grid;
pub mod iq;
pub mod naive;
pub mod rng;
pub mod single;
pub mod supply;
pub mod twostate;

pub use dist::{action_marginal, l1_distance, Distribution, LocalPolicy};
pub use dynamics::{
    flow, integrated_reward, particle_estimate, particle_value, policy_value,
    policy_value_horizon, rollout, rollout_seq, sample_integrated_reward, truncation_horizon,
    ParticleEstimate, Rollout, StationaryControl,
};
pub use env::{MeanFieldEnv, ParticleEnsemble};
pub use error::{Error, Result};
pub use grid::{simplex_cell_count, PolicyGrid, SimplexGrid};
pub use iq::{
    bellman_backup, error_metric, greedy_policy, iq_learning_step, run_sweep_learning,
    value_iteration, AggregateSimulator, ConvergenceReport, ErrorMetric, IqGrids, IqTable,
    PopulationSimulator, SweepOptions, TableControl,
};
pub use rng::{seeded, stream_seed, substream, SimRng};
pub use single::{lifted_from_single, solve_single_agent_q, MeanFieldFree, SingleAgentMdp, SingleQTable};
pub use twostate::{build_env, optimal_policy, optimal_value, TwoStateEnv, TwoStateParams};
