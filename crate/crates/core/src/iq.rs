//! The lifted solver: tabular Q values on (state-distribution, local-policy)
//! grid cells, the Bellman operator with grid projection, synchronous value
//! iteration, and the sweep-based learning loop with a population simulator.

use crate::dist::{action_marginal, Distribution, LocalPolicy};
use crate::dynamics::{flow, integrated_reward, StationaryControl};
use crate::env::MeanFieldEnv;
use crate::error::{Error, Result};
use crate::grid::{PolicyGrid, SimplexGrid};
use crate::rng::SimRng;
use rand::Rng;
use std::io::{BufRead, Write};
use std::time::Instant;

/// State-distribution grid paired with a local-policy grid.
#[derive(Debug, Clone)]
pub struct IqGrids {
    pub state: SimplexGrid,
    pub policy: PolicyGrid,
}

impl IqGrids {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        state_resolution: u32,
        action_resolution: u32,
    ) -> Result<Self> {
        Ok(Self {
            state: SimplexGrid::new(num_states, state_resolution)?,
            policy: PolicyGrid::new(num_states, num_actions, action_resolution)?,
        })
    }
}

/// Real-valued table over (state-distribution cell, policy cell) with visit
/// counts of identical shape.
#[derive(Debug, Clone)]
pub struct IqTable {
    num_mu: usize,
    num_h: usize,
    values: Vec<f64>,
    visits: Vec<u64>,
}

impl IqTable {
    pub fn zeros(num_mu: usize, num_h: usize) -> Self {
        Self { num_mu, num_h, values: vec![0.0; num_mu * num_h], visits: vec![0; num_mu * num_h] }
    }

    pub fn constant(num_mu: usize, num_h: usize, value: f64) -> Self {
        Self { num_mu, num_h, values: vec![value; num_mu * num_h], visits: vec![0; num_mu * num_h] }
    }

    /// Every cell drawn independently from the uniform distribution on [0,1].
    pub fn random_uniform(num_mu: usize, num_h: usize, rng: &mut SimRng) -> Self {
        let values = (0..num_mu * num_h).map(|_| rng.random::<f64>()).collect();
        Self { num_mu, num_h, values, visits: vec![0; num_mu * num_h] }
    }

    pub fn num_mu_cells(&self) -> usize {
        self.num_mu
    }

    pub fn num_policy_cells(&self) -> usize {
        self.num_h
    }

    #[inline]
    fn idx(&self, mu_cell: usize, h_cell: usize) -> usize {
        debug_assert!(mu_cell < self.num_mu && h_cell < self.num_h);
        mu_cell * self.num_h + h_cell
    }

    pub fn value(&self, mu_cell: usize, h_cell: usize) -> f64 {
        self.values[self.idx(mu_cell, h_cell)]
    }

    pub fn set(&mut self, mu_cell: usize, h_cell: usize, value: f64) {
        let i = self.idx(mu_cell, h_cell);
        self.values[i] = value;
    }

    pub fn visit_count(&self, mu_cell: usize, h_cell: usize) -> u64 {
        self.visits[self.idx(mu_cell, h_cell)]
    }

    pub fn record_visit(&mut self, mu_cell: usize, h_cell: usize) {
        let i = self.idx(mu_cell, h_cell);
        self.visits[i] += 1;
    }

    /// Maximum value over policy cells at one state cell.
    pub fn max_over_policies(&self, mu_cell: usize) -> f64 {
        let row = &self.values[mu_cell * self.num_h..(mu_cell + 1) * self.num_h];
        row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Argmax over policy cells; ties resolve to the lowest index.
    pub fn argmax_over_policies(&self, mu_cell: usize) -> usize {
        let row = &self.values[mu_cell * self.num_h..(mu_cell + 1) * self.num_h];
        let mut best = f64::NEG_INFINITY;
        let mut best_idx = 0;
        for (j, &v) in row.iter().enumerate() {
            if v > best {
                best = v;
                best_idx = j;
            }
        }
        best_idx
    }

    /// Sup-norm distance to another table of the same shape.
    pub fn sup_distance(&self, other: &IqTable) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Greedy policy cell at a state cell (lowest index on ties).
pub fn greedy_policy(table: &IqTable, mu_cell: usize) -> usize {
    table.argmax_over_policies(mu_cell)
}

/// One Bellman backup at a grid cell:
/// `r̂(μ, h) + γ · max_{h'} Q(proj(Φ(μ, h)), h')`. Pure read of `table`.
pub fn bellman_backup(
    env: &impl MeanFieldEnv,
    table: &IqTable,
    grids: &IqGrids,
    mu_cell: usize,
    h_cell: usize,
) -> Result<f64> {
    let mu = grids.state.distribution(mu_cell);
    let h = grids.policy.policy(h_cell);
    let r = integrated_reward(env, &mu, &h)?;
    let next = grids.state.project(&flow(env, &mu, &h)?)?;
    Ok(r + env.gamma() * table.max_over_policies(next))
}

/// Per-iteration progress of a solver run.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Mean absolute deviation from the oracle at the projected optimal
    /// policy, when an oracle was supplied.
    pub error_metric: Option<f64>,
    /// Sup-norm change of the table produced by this iteration.
    pub sup_change: f64,
    /// Wall-clock seconds spent in this iteration.
    pub seconds: f64,
}

/// Iteration trace of a solver run plus its termination status.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
}

impl ConvergenceReport {
    /// Writes the trace as CSV with columns `iteration,E,supnorm_change,seconds`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "iteration,E,supnorm_change,seconds")?;
        for rec in &self.iterations {
            let e = rec.error_metric.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{}", rec.iteration, e, rec.sup_change, rec.seconds)?;
        }
        Ok(())
    }

    pub fn last_sup_change(&self) -> Option<f64> {
        self.iterations.last().map(|r| r.sup_change)
    }

    /// Error-metric sequence (entries only where an oracle was supplied).
    pub fn error_series(&self) -> Vec<f64> {
        self.iterations.iter().filter_map(|r| r.error_metric).collect()
    }

    pub fn sup_change_series(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.sup_change).collect()
    }
}

/// Convergence metric against a closed-form value oracle: mean absolute
/// deviation of the table at the projected optimal policy cell, averaged over
/// all state cells (divided by the number of summands).
#[derive(Debug, Clone)]
pub struct ErrorMetric {
    /// Policy-grid cell of the projected optimal policy.
    pub policy_cell: usize,
    /// Oracle value per state cell.
    pub oracle: Vec<f64>,
}

impl ErrorMetric {
    pub fn new(policy_cell: usize, oracle: Vec<f64>) -> Self {
        Self { policy_cell, oracle }
    }

    pub fn evaluate(&self, table: &IqTable) -> f64 {
        let n = self.oracle.len();
        assert_eq!(n, table.num_mu_cells());
        let sum: f64 = (0..n)
            .map(|i| (table.value(i, self.policy_cell) - self.oracle[i]).abs())
            .sum();
        sum / n as f64
    }
}

/// Mean absolute deviation of `table` from the oracle at the projected
/// optimal policy.
pub fn error_metric(table: &IqTable, metric: &ErrorMetric) -> f64 {
    metric.evaluate(table)
}

fn precompute_cells(
    env: &impl MeanFieldEnv,
    grids: &IqGrids,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let n_mu = grids.state.len();
    let n_h = grids.policy.len();
    let mut proj = Vec::with_capacity(n_mu * n_h);
    let mut rewards = Vec::with_capacity(n_mu * n_h);
    for i in 0..n_mu {
        let mu = grids.state.distribution(i);
        for j in 0..n_h {
            let h = grids.policy.policy(j);
            rewards.push(integrated_reward(env, &mu, &h)?);
            proj.push(grids.state.project(&flow(env, &mu, &h)?)?);
        }
    }
    Ok((proj, rewards))
}

/// Synchronous value iteration from the zero table: `Q_{n+1} = B Q_n` swept
/// over every grid cell until the sup-norm change drops below `tol`.
///
/// Non-convergence within `max_iters` is reported through the `converged`
/// flag, not an error (the operator is a `γ`-contraction, so that flag only
/// trips on a bug or `γ ≥ 1`).
pub fn value_iteration(
    env: &impl MeanFieldEnv,
    grids: &IqGrids,
    tol: f64,
    max_iters: usize,
    metric: Option<&ErrorMetric>,
) -> Result<(IqTable, ConvergenceReport)> {
    if env.reward_bound().is_none() {
        return Err(Error::UnboundedReward);
    }
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let n_mu = grids.state.len();
    let n_h = grids.policy.len();
    let (proj, rewards) = precompute_cells(env, grids)?;
    let gamma = env.gamma();

    let mut table = IqTable::zeros(n_mu, n_h);
    let mut report = ConvergenceReport { iterations: Vec::new(), converged: false };
    report.iterations.push(IterationRecord {
        iteration: 0,
        error_metric: metric.map(|m| m.evaluate(&table)),
        sup_change: 0.0,
        seconds: 0.0,
    });

    let mut best = vec![0.0f64; n_mu];
    for n in 1..=max_iters {
        let start = Instant::now();
        for (i, b) in best.iter_mut().enumerate() {
            *b = table.max_over_policies(i);
        }
        let mut sup_change = 0.0f64;
        for i in 0..n_mu {
            for j in 0..n_h {
                let cell = i * n_h + j;
                let target = rewards[cell] + gamma * best[proj[cell]];
                sup_change = sup_change.max((target - table.value(i, j)).abs());
                table.set(i, j, target);
            }
        }
        report.iterations.push(IterationRecord {
            iteration: n,
            error_metric: metric.map(|m| m.evaluate(&table)),
            sup_change,
            seconds: start.elapsed().as_secs_f64(),
        });
        if sup_change < tol {
            report.converged = true;
            break;
        }
    }
    Ok((table, report))
}

/// A population simulator: given `(μ, h)` it returns the next state
/// distribution and a sampled aggregate one-step reward.
pub trait PopulationSimulator {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn gamma(&self) -> f64;
    fn sample(
        &self,
        mu: &Distribution,
        policy: &LocalPolicy,
        rng: &mut SimRng,
    ) -> Result<(Distribution, f64)>;
}

/// Simulator backed by an environment: the next distribution is the exact
/// flow and the aggregate reward integrates one reward draw per
/// (state, action) pair over `μ ⊗ h`. For environments whose rewards are
/// deterministic given the population this equals the integrated reward.
pub struct AggregateSimulator<'a, E: MeanFieldEnv> {
    pub env: &'a E,
}

impl<'a, E: MeanFieldEnv> AggregateSimulator<'a, E> {
    pub fn new(env: &'a E) -> Self {
        Self { env }
    }
}

impl<E: MeanFieldEnv> PopulationSimulator for AggregateSimulator<'_, E> {
    fn num_states(&self) -> usize {
        self.env.num_states()
    }
    fn num_actions(&self) -> usize {
        self.env.num_actions()
    }
    fn gamma(&self) -> f64 {
        self.env.gamma()
    }
    fn sample(
        &self,
        mu: &Distribution,
        policy: &LocalPolicy,
        rng: &mut SimRng,
    ) -> Result<(Distribution, f64)> {
        let nu = action_marginal(mu, policy)?;
        let mut reward = 0.0;
        for s in 0..self.env.num_states() {
            let ms = mu.weight(s);
            if ms == 0.0 {
                continue;
            }
            for a in 0..self.env.num_actions() {
                let p = ms * policy.prob(s, a);
                if p == 0.0 {
                    continue;
                }
                reward += p * self.env.reward_sample(s, mu, a, &nu, rng);
            }
        }
        Ok((flow(self.env, mu, policy)?, reward))
    }
}

/// One learning update at a single cell:
/// `Q(μ,h) ← (1−l)·Q(μ,h) + l·(r̂ + γ·max_{h'} Q(proj(μ'), h'))`,
/// with `(μ', r̂)` drawn from the simulator. Only this cell changes; its
/// visit count is incremented. Returns the new cell value.
pub fn iq_learning_step(
    sim: &impl PopulationSimulator,
    table: &mut IqTable,
    grids: &IqGrids,
    mu_cell: usize,
    h_cell: usize,
    learning_rate: f64,
    rng: &mut SimRng,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&learning_rate) {
        return Err(Error::Domain(format!("learning rate {learning_rate} outside [0,1]")));
    }
    let mu = grids.state.distribution(mu_cell);
    let h = grids.policy.policy(h_cell);
    let (next_mu, reward) = sim.sample(&mu, &h, rng)?;
    let next_cell = grids.state.project(&next_mu)?;
    let target = reward + sim.gamma() * table.max_over_policies(next_cell);
    let updated = (1.0 - learning_rate) * table.value(mu_cell, h_cell) + learning_rate * target;
    table.set(mu_cell, h_cell, updated);
    table.record_visit(mu_cell, h_cell);
    Ok(updated)
}

/// Options for the sweep-based learning loop.
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub outer_iterations: usize,
    pub learning_rate: f64,
}

/// The sweep-based tabular learning loop on the lifted grids.
///
/// The table starts uniform on [0,1] per cell. Each outer iteration performs
/// one full synchronous sweep: the per-state-cell best values are frozen from
/// the previous table, every cell is updated against that cache with the
/// simulator's sampled reward, and visit counts are incremented. The report
/// carries the error metric per iteration when an oracle is supplied.
pub fn run_sweep_learning(
    sim: &impl PopulationSimulator,
    grids: &IqGrids,
    opts: SweepOptions,
    metric: Option<&ErrorMetric>,
    rng: &mut SimRng,
) -> Result<(IqTable, ConvergenceReport)> {
    if !(0.0..=1.0).contains(&opts.learning_rate) {
        return Err(Error::Domain(format!("learning rate {} outside [0,1]", opts.learning_rate)));
    }
    let n_mu = grids.state.len();
    let n_h = grids.policy.len();
    let gamma = sim.gamma();
    let l = opts.learning_rate;

    let mut table = IqTable::random_uniform(n_mu, n_h, rng);
    let mut report = ConvergenceReport { iterations: Vec::new(), converged: false };
    report.iterations.push(IterationRecord {
        iteration: 0,
        error_metric: metric.map(|m| m.evaluate(&table)),
        sup_change: 0.0,
        seconds: 0.0,
    });

    // the flow is deterministic, so the projected next cell per (mu, h) is
    // fixed across sweeps; only the reward is re-sampled
    let mut proj = vec![0usize; n_mu * n_h];
    let mut mus = Vec::with_capacity(n_mu);
    let mut policies = Vec::with_capacity(n_h);
    for i in 0..n_mu {
        mus.push(grids.state.distribution(i));
    }
    for j in 0..n_h {
        policies.push(grids.policy.policy(j));
    }

    let mut best = vec![0.0f64; n_mu];
    for t in 1..=opts.outer_iterations {
        let start = Instant::now();
        for (i, b) in best.iter_mut().enumerate() {
            *b = table.max_over_policies(i);
        }
        let mut sup_change = 0.0f64;
        for i in 0..n_mu {
            for j in 0..n_h {
                let (next_mu, reward) = sim.sample(&mus[i], &policies[j], rng)?;
                let cell = i * n_h + j;
                if t == 1 {
                    proj[cell] = grids.state.project(&next_mu)?;
                }
                let target = reward + gamma * best[proj[cell]];
                let old = table.value(i, j);
                let updated = (1.0 - l) * old + l * target;
                sup_change = sup_change.max((updated - old).abs());
                table.set(i, j, updated);
                table.record_visit(i, j);
            }
        }
        report.iterations.push(IterationRecord {
            iteration: t,
            error_metric: metric.map(|m| m.evaluate(&table)),
            sup_change,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    report.converged = true;
    Ok((table, report))
}

/// Stationary control reading greedily from a converged table: projects the
/// queried distribution to its grid cell and returns the argmax grid policy.
pub struct TableControl<'a> {
    pub table: &'a IqTable,
    pub grids: &'a IqGrids,
}

impl StationaryControl for TableControl<'_> {
    fn policy(&self, mu: &Distribution) -> LocalPolicy {
        let cell = self.grids.state.project(mu).expect("control queried off its grid");
        self.grids.policy.policy(greedy_policy(self.table, cell))
    }
}

/// Writes a table in the plain-text interchange format: a header line
/// `num_states num_actions state_resolution action_resolution gamma`,
/// then one line per cell holding the integer state-grid composition, the
/// per-state row compositions, and the value with 17 significant digits.
pub fn write_table<W: Write>(
    out: &mut W,
    table: &IqTable,
    grids: &IqGrids,
    gamma: f64,
) -> std::io::Result<()> {
    writeln!(
        out,
        "{} {} {} {} {}",
        grids.state.dim(),
        grids.policy.row_grid().dim(),
        grids.state.resolution(),
        grids.policy.row_grid().resolution(),
        gamma
    )?;
    let mut line = String::new();
    for i in 0..table.num_mu_cells() {
        for j in 0..table.num_policy_cells() {
            line.clear();
            for &c in grids.state.composition(i) {
                line.push_str(&c.to_string());
                line.push(' ');
            }
            for r in grids.policy.row_indices(j) {
                for &c in grids.policy.row_grid().composition(r) {
                    line.push_str(&c.to_string());
                    line.push(' ');
                }
            }
            line.push_str(&format!("{:.16e}", table.value(i, j)));
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

/// Header of a persisted table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableHeader {
    pub num_states: usize,
    pub num_actions: usize,
    pub state_resolution: u32,
    pub action_resolution: u32,
    pub gamma: f64,
}

/// One parsed cell line: compositions as written, plus the value.
#[derive(Debug, Clone)]
pub struct TableLine {
    pub state_composition: Vec<u32>,
    pub row_compositions: Vec<Vec<u32>>,
    pub value: f64,
}

/// Reads a persisted table back as header plus raw lines. The caller decides
/// how to index them (full simplex grid or point-mass reduction).
pub fn read_table<R: BufRead>(input: R) -> Result<(TableHeader, Vec<TableLine>)> {
    let mut lines = input.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Domain("empty table file".into()))?
        .map_err(|e| Error::Domain(format!("read error: {e}")))?;
    let parts: Vec<&str> = header_line.split_whitespace().collect();
    if parts.len() != 5 {
        return Err(Error::Domain(format!(
            "header has {} fields, expected 5",
            parts.len()
        )));
    }
    let parse_usize = |s: &str, what: &str| {
        s.parse::<usize>().map_err(|_| Error::Domain(format!("bad {what}: {s}")))
    };
    let header = TableHeader {
        num_states: parse_usize(parts[0], "state count")?,
        num_actions: parse_usize(parts[1], "action count")?,
        state_resolution: parts[2]
            .parse()
            .map_err(|_| Error::Domain(format!("bad state resolution: {}", parts[2])))?,
        action_resolution: parts[3]
            .parse()
            .map_err(|_| Error::Domain(format!("bad action resolution: {}", parts[3])))?,
        gamma: parts[4]
            .parse()
            .map_err(|_| Error::Domain(format!("bad gamma: {}", parts[4])))?,
    };
    let ints_per_line = header.num_states + header.num_states * header.num_actions;
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Domain(format!("read error: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != ints_per_line + 1 {
            return Err(Error::Domain(format!(
                "line {}: {} fields, expected {}",
                lineno + 2,
                fields.len(),
                ints_per_line + 1
            )));
        }
        let mut ints = Vec::with_capacity(ints_per_line);
        for f in &fields[..ints_per_line] {
            ints.push(
                f.parse::<u32>()
                    .map_err(|_| Error::Domain(format!("line {}: bad coordinate {f}", lineno + 2)))?,
            );
        }
        let value = fields[ints_per_line]
            .parse::<f64>()
            .map_err(|_| Error::Domain(format!("line {}: bad value", lineno + 2)))?;
        let state_composition = ints[..header.num_states].to_vec();
        let row_compositions = ints[header.num_states..]
            .chunks(header.num_actions)
            .map(|c| c.to_vec())
            .collect();
        out.push(TableLine { state_composition, row_compositions, value });
    }
    Ok((header, out))
}
