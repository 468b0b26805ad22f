//! Negative control: per-(state, action) Q-learning run on the two-state
//! benchmark. Because the table ignores the population distribution, its
//! converged values depend on where the population started.

use crate::dist::{Distribution, LocalPolicy};
use crate::dynamics::flow;
use crate::env::MeanFieldEnv;
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::twostate::{TwoStateEnv, TwoStateParams};
use rand::Rng;

/// Plain Q table over (state, action) with visit counts.
#[derive(Debug, Clone)]
pub struct NaiveQTable {
    num_actions: usize,
    values: Vec<f64>,
    visits: Vec<u64>,
}

impl NaiveQTable {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_actions,
            values: vec![0.0; num_states * num_actions],
            visits: vec![0; num_states * num_actions],
        }
    }

    pub fn num_states(&self) -> usize {
        self.values.len() / self.num_actions
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn value(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.num_actions + a]
    }

    pub fn visit_count(&self, s: usize, a: usize) -> u64 {
        self.visits[s * self.num_actions + a]
    }

    pub fn max_over_actions(&self, s: usize) -> f64 {
        self.values[s * self.num_actions..(s + 1) * self.num_actions]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action, lowest index on ties.
    pub fn greedy_action(&self, s: usize) -> usize {
        let row = &self.values[s * self.num_actions..(s + 1) * self.num_actions];
        let mut best = f64::NEG_INFINITY;
        let mut best_a = 0;
        for (a, &v) in row.iter().enumerate() {
            if v > best {
                best = v;
                best_a = a;
            }
        }
        best_a
    }
}

/// One tabular update `Q(s,a) ← (1−l) Q(s,a) + l (r + γ max_{a'} Q(s',a'))`.
/// Returns the new cell value.
pub fn naive_update(
    table: &mut NaiveQTable,
    s: usize,
    a: usize,
    reward: f64,
    next_state: usize,
    gamma: f64,
    learning_rate: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&learning_rate) {
        return Err(Error::Domain(format!("learning rate {learning_rate} outside [0,1]")));
    }
    let target = reward + gamma * table.max_over_actions(next_state);
    let idx = s * table.num_actions + a;
    table.values[idx] = (1.0 - learning_rate) * table.values[idx] + learning_rate * target;
    table.visits[idx] += 1;
    Ok(table.values[idx])
}

/// Fixed exploration rate with the visit-count learning-rate rule
/// `l_t = 1 / (visits(s,a) + 1)`.
#[derive(Debug, Clone, Copy)]
pub struct EpsilonGreedySchedule {
    pub epsilon: f64,
}

impl EpsilonGreedySchedule {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Domain(format!("epsilon {epsilon} outside [0,1]")));
        }
        Ok(Self { epsilon })
    }

    /// Learning rate before the `n`-th visit (zero-based count so far).
    pub fn learning_rate(visits_so_far: u64) -> f64 {
        1.0 / (visits_so_far as f64 + 1.0)
    }

    fn choose(&self, table: &NaiveQTable, s: usize, rng: &mut SimRng) -> usize {
        if rng.random::<f64>() < self.epsilon {
            rng.random_range(0..table.num_actions())
        } else {
            table.greedy_action(s)
        }
    }

    /// The mixed policy actually played: `1-ε` on the greedy action plus
    /// `ε` spread uniformly.
    fn played_policy(&self, table: &NaiveQTable) -> LocalPolicy {
        let na = table.num_actions();
        let rows = (0..table.num_states())
            .map(|s| {
                let mut w = vec![self.epsilon / na as f64; na];
                w[table.greedy_action(s)] += 1.0 - self.epsilon;
                Distribution::new(w).expect("exploration mix is a distribution")
            })
            .collect();
        LocalPolicy::new(rows).expect("rows share the action set")
    }
}

/// Configuration of the start-dependence experiment.
#[derive(Debug, Clone)]
pub struct InconsistencyConfig {
    pub iterations: usize,
    pub epsilon: f64,
    /// When false, the reward is the raw state value (population terms
    /// removed); the control condition.
    pub mean_field_terms: bool,
}

impl Default for InconsistencyConfig {
    fn default() -> Self {
        Self { iterations: 10_000, epsilon: 0.01, mean_field_terms: true }
    }
}

/// Runs the start-dependence experiment: for each initial mass `p0`, a fresh
/// zero table is trained for `iterations` rounds. Each round, one
/// representative agent per state acts ε-greedily, observes the reward at
/// the current population distribution, draws its next state, and the two
/// cells are updated synchronously with the `1/(visits+1)` rate; the
/// population then advances by the flow of the played mixed policy.
///
/// Returns `(p0, converged table)` per entry of `p0_list`, each trained on
/// its own sub-stream of `rng`.
pub fn run_time_inconsistency_experiment(
    params: &TwoStateParams,
    p0_list: &[f64],
    config: &InconsistencyConfig,
    rng: &mut SimRng,
) -> Result<Vec<(f64, NaiveQTable)>> {
    let schedule = EpsilonGreedySchedule::new(config.epsilon)?;
    let env = if config.mean_field_terms {
        crate::twostate::build_env(*params)?
    } else {
        TwoStateEnv::without_mean_field(*params)?
    };
    let mut out = Vec::with_capacity(p0_list.len());
    for &p0 in p0_list {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::Domain(format!("initial mass {p0} outside [0,1]")));
        }
        let seed: u64 = rng.random();
        let mut run_rng = crate::rng::seeded(seed);
        out.push((p0, run_single(&env, p0, config, schedule, &mut run_rng)?));
    }
    Ok(out)
}

fn run_single(
    env: &TwoStateEnv,
    p0: f64,
    config: &InconsistencyConfig,
    schedule: EpsilonGreedySchedule,
    rng: &mut SimRng,
) -> Result<NaiveQTable> {
    let gamma = env.gamma();
    let mut table = NaiveQTable::zeros(2, 2);
    let mut mu = Distribution::new(vec![p0, 1.0 - p0])?;
    let nu_placeholder = Distribution::uniform(2);
    for _ in 0..config.iterations {
        // one representative per state: pick actions, observe, draw next states
        let mut steps = [(0usize, 0.0f64, 0usize); 2];
        for s in 0..2 {
            let a = schedule.choose(&table, s, rng);
            let r = env.reward_expectation(s, &mu, a, &nu_placeholder);
            let next = env.transition(s, &mu, a, &nu_placeholder).sample(rng);
            steps[s] = (a, r, next);
        }
        // synchronous: both targets read the pre-update table
        let targets = [
            steps[0].1 + gamma * table.max_over_actions(steps[0].2),
            steps[1].1 + gamma * table.max_over_actions(steps[1].2),
        ];
        for s in 0..2 {
            let a = steps[s].0;
            let l = EpsilonGreedySchedule::learning_rate(table.visit_count(s, a));
            let idx = s * table.num_actions + a;
            table.values[idx] = (1.0 - l) * table.values[idx] + l * targets[s];
            table.visits[idx] += 1;
        }
        mu = flow(env, &mu, &schedule.played_policy(&table))?;
    }
    Ok(table)
}
