//! The equilibrium-pricing supply game: a continuum of firms share one
//! price, which drifts with the demand/supply imbalance. The lifted learner
//! runs on (price, supply-mix) cells; a best-response softmax baseline and a
//! head-to-head simulation compare the cooperative and competitive solutions.
//!
//! All firms see the same price, so the population state distribution is a
//! point mass at the current price and the state side of the table collapses
//! to the price set itself.

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::grid::SimplexGrid;
use crate::iq::{ConvergenceReport, IqTable, IterationRecord};
use crate::rng::SimRng;
use rand::Rng;
use rand_distr::{Distribution as RandDistribution, Normal};
use std::io::Write;
use std::time::Instant;

/// Market parameters. Defaults: demand `N(2, 0.25)`, unit cost 1, supplies
/// {0..4}, prices {0..19}, unit price impact, discount 0.6, ±1 symmetric
/// price noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupplyParams {
    pub demand_mean: f64,
    pub demand_var: f64,
    pub cost: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub num_prices: usize,
    pub num_actions: usize,
}

impl Default for SupplyParams {
    fn default() -> Self {
        Self {
            demand_mean: 2.0,
            demand_var: 0.25,
            cost: 1.0,
            kappa: 1.0,
            gamma: 0.6,
            num_prices: 20,
            num_actions: 5,
        }
    }
}

impl SupplyParams {
    pub fn validate(&self) -> Result<()> {
        if self.kappa <= 0.0 {
            return Err(Error::Domain("price impact must be positive".into()));
        }
        if self.cost < 0.0 {
            return Err(Error::Domain("cost must be nonnegative".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Domain(format!("gamma {} outside (0,1)", self.gamma)));
        }
        if self.demand_var < 0.0 {
            return Err(Error::Domain("demand variance must be nonnegative".into()));
        }
        if self.num_prices == 0 || self.num_actions == 0 {
            return Err(Error::Domain("empty price or action set".into()));
        }
        Ok(())
    }

    /// Bound on |Q|: max margin times max supply over `1-γ`.
    pub fn value_bound(&self) -> f64 {
        let max_margin = (self.num_prices as f64 - 1.0 - self.cost).abs().max(self.cost);
        max_margin * (self.num_actions as f64 - 1.0) / (1.0 - self.gamma)
    }
}

/// Mean supply `E_ν[a]` of an action distribution.
pub fn mean_action(nu: &Distribution) -> f64 {
    nu.expect(|a| a as f64)
}

/// Deterministic part of the price update: round half away from zero, then
/// clamp into the price set.
pub fn price_step(params: &SupplyParams, price: usize, mean_supply: f64, demand: f64, noise: f64) -> usize {
    let x = price as f64 + params.kappa * (demand - mean_supply) + noise;
    let rounded = if x >= 0.0 { (x + 0.5).floor() } else { (x - 0.5).ceil() };
    rounded.clamp(0.0, params.num_prices as f64 - 1.0) as usize
}

/// Samples the next price: one demand draw, one ±1 noise draw.
pub fn price_transition(
    params: &SupplyParams,
    price: usize,
    nu: &Distribution,
    rng: &mut SimRng,
) -> Result<usize> {
    if price >= params.num_prices {
        return Err(Error::Domain(format!("price {price} outside the price set")));
    }
    if nu.len() != params.num_actions {
        return Err(Error::DimensionMismatch { expected: params.num_actions, got: nu.len() });
    }
    let normal = Normal::new(params.demand_mean, params.demand_var.sqrt())
        .map_err(|e| Error::Domain(format!("demand distribution: {e}")))?;
    let d = normal.sample(rng);
    let w = if rng.random::<bool>() { 1.0 } else { -1.0 };
    Ok(price_step(params, price, mean_action(nu), d, w))
}

/// Population-aggregated margin at the quoted price: `(s - c) · E_ν[a]`.
pub fn supply_reward(params: &SupplyParams, price: usize, nu: &Distribution) -> f64 {
    (price as f64 - params.cost) * mean_action(nu)
}

// 5-point Gauss-Hermite rule (physicists' weights divided by sqrt(pi)),
// used to integrate the Gaussian demand exactly enough for oracle tests.
const GH_NODES: [f64; 5] = [
    -2.0201828704560856,
    -0.9585724646138185,
    0.0,
    0.9585724646138185,
    2.0201828704560856,
];
const GH_WEIGHTS: [f64; 5] = [
    0.011257411327720682,
    0.2220759220056126,
    0.5333333333333333,
    0.2220759220056126,
    0.011257411327720682,
];

/// Exact next-price distribution for a (price, mean-supply) pair: both noise
/// signs enumerated, the demand integrated on a 5-node Gauss-Hermite rule.
/// Returned as (price, probability) atoms with probabilities summing to one.
pub fn next_price_atoms(params: &SupplyParams, price: usize, mean_supply: f64) -> Vec<(usize, f64)> {
    let sigma = params.demand_var.sqrt();
    let mut mass = vec![0.0f64; params.num_prices];
    for (xi, wt) in GH_NODES.iter().zip(GH_WEIGHTS) {
        let d = params.demand_mean + sigma * std::f64::consts::SQRT_2 * xi;
        for w in [-1.0, 1.0] {
            mass[price_step(params, price, mean_supply, d, w)] += 0.5 * wt;
        }
    }
    mass.iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(s, &m)| (s, m))
        .collect()
}

/// The uniform grid over supply-mix distributions at resolution `1/n_a`.
pub fn action_grid(params: &SupplyParams, resolution: u32) -> Result<SimplexGrid> {
    SimplexGrid::new(params.num_actions, resolution)
}

/// Whether sweep backups draw the shocks or integrate them out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackupMode {
    /// One (demand, noise) draw per cell per sweep.
    Sampled,
    /// Expectation over both shocks; the deterministic reference.
    Exact,
}

impl std::str::FromStr for BackupMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sampled" => Ok(BackupMode::Sampled),
            "exact" => Ok(BackupMode::Exact),
            other => Err(Error::Domain(format!("unknown backup mode '{other}'"))),
        }
    }
}

/// Sweep-based learning on (price, supply-mix) cells.
///
/// Each outer iteration freezes the per-price best values, then updates every
/// cell: the next price is realized from the cell's mean supply (sampled or
/// integrated per `mode`), the reward is the margin at that realized price,
/// and the cell moves by the learning rate toward
/// `reward + γ · max_ν' Q(next price, ν')`. The table starts at zero.
pub fn run_supply_sweeps(
    params: &SupplyParams,
    grid: &SimplexGrid,
    outer_iterations: usize,
    learning_rate: f64,
    mode: BackupMode,
    rng: &mut SimRng,
) -> Result<(IqTable, ConvergenceReport)> {
    params.validate()?;
    if grid.dim() != params.num_actions {
        return Err(Error::DimensionMismatch { expected: params.num_actions, got: grid.dim() });
    }
    if !(0.0..=1.0).contains(&learning_rate) {
        return Err(Error::Domain(format!("learning rate {learning_rate} outside [0,1]")));
    }
    let n_prices = params.num_prices;
    let n_cells = grid.len();
    let means: Vec<f64> = (0..n_cells).map(|j| mean_action(&grid.distribution(j))).collect();
    let normal = Normal::new(params.demand_mean, params.demand_var.sqrt())
        .map_err(|e| Error::Domain(format!("demand distribution: {e}")))?;

    // in exact mode, (price, mean) has few distinct means: cache atoms per class
    let mean_class: Vec<usize> = grid
        .iter()
        .map(|comp| comp.iter().enumerate().map(|(a, &c)| a * c as usize).sum())
        .collect();
    let num_classes = mean_class.iter().max().copied().unwrap_or(0) + 1;
    let atoms: Vec<Vec<(usize, f64)>> = if mode == BackupMode::Exact {
        (0..n_prices * num_classes)
            .map(|k| {
                let s = k / num_classes;
                let cls = k % num_classes;
                next_price_atoms(params, s, cls as f64 / grid.resolution() as f64)
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut table = IqTable::zeros(n_prices, n_cells);
    let mut report = ConvergenceReport { iterations: Vec::new(), converged: false };
    report.iterations.push(IterationRecord {
        iteration: 0,
        error_metric: None,
        sup_change: 0.0,
        seconds: 0.0,
    });

    let mut best = vec![0.0f64; n_prices];
    for t in 1..=outer_iterations {
        let start = Instant::now();
        for (s, b) in best.iter_mut().enumerate() {
            *b = table.max_over_policies(s);
        }
        let mut sup_change = 0.0f64;
        for s in 0..n_prices {
            for j in 0..n_cells {
                let target = match mode {
                    BackupMode::Sampled => {
                        let d = normal.sample(rng);
                        let w = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        let sp = price_step(params, s, means[j], d, w);
                        (sp as f64 - params.cost) * means[j] + params.gamma * best[sp]
                    }
                    BackupMode::Exact => {
                        let mut acc = 0.0;
                        for &(sp, pr) in &atoms[s * num_classes + mean_class[j]] {
                            acc += pr
                                * ((sp as f64 - params.cost) * means[j] + params.gamma * best[sp]);
                        }
                        acc
                    }
                };
                let old = table.value(s, j);
                let updated = (1.0 - learning_rate) * old + learning_rate * target;
                sup_change = sup_change.max((updated - old).abs());
                table.set(s, j, updated);
                table.record_visit(s, j);
            }
        }
        report.iterations.push(IterationRecord {
            iteration: t,
            error_metric: None,
            sup_change,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    report.converged = true;
    Ok((table, report))
}

/// A supply policy: one action distribution per price.
#[derive(Debug, Clone)]
pub struct PricePolicy {
    rows: Vec<Distribution>,
}

impl PricePolicy {
    pub fn new(rows: Vec<Distribution>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Domain("price policy needs at least one price".into()));
        }
        let na = rows[0].len();
        for r in &rows {
            if r.len() != na {
                return Err(Error::DimensionMismatch { expected: na, got: r.len() });
            }
        }
        Ok(Self { rows })
    }

    pub fn num_prices(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, price: usize) -> &Distribution {
        &self.rows[price]
    }

    /// Mean supply per price.
    pub fn mean_actions(&self) -> Vec<f64> {
        self.rows.iter().map(mean_action).collect()
    }
}

/// Greedy supply mix per price from a converged table.
pub fn greedy_price_policy(table: &IqTable, grid: &SimplexGrid) -> Result<PricePolicy> {
    let rows = (0..table.num_mu_cells())
        .map(|s| grid.distribution(table.argmax_over_policies(s)))
        .collect();
    PricePolicy::new(rows)
}

/// Mean greedy supply per price, `E[a*(s)]`.
pub fn mean_action_table(table: &IqTable, grid: &SimplexGrid) -> Vec<f64> {
    (0..table.num_mu_cells())
        .map(|s| mean_action(&grid.distribution(table.argmax_over_policies(s))))
        .collect()
}

/// Output of the best-response softmax baseline.
#[derive(Debug, Clone)]
pub struct MfgSolution {
    /// Per-(price, action) values of the single-firm problem against the
    /// frozen population mean supplies.
    pub q: Vec<f64>,
    pub policy: PricePolicy,
    pub outer_iterations: usize,
    pub converged: bool,
}

impl MfgSolution {
    pub fn q_value(&self, price: usize, action: usize) -> f64 {
        self.q[price * self.policy.row(0).len() + action]
    }
}

const MFG_INNER_SWEEPS: usize = 200;
/// Damping on the mean-supply refresh; an undamped best-response iteration
/// limit-cycles at low prices.
const MFG_FIELD_DAMPING: f64 = 0.2;

/// Competitive baseline: alternates (i) mean supply per price from the
/// current softmax policy, (ii) single-firm Q sweeps against that frozen
/// field (the individual firm's supply does not move the common price), and
/// (iii) a damped mean-field refresh, until the outer Q change drops below
/// `tol`. Failure to converge within `max_outer` is reported in the result,
/// not as an error.
pub fn mfg_solve(
    params: &SupplyParams,
    beta: f64,
    tol: f64,
    max_outer: usize,
) -> Result<MfgSolution> {
    params.validate()?;
    if beta <= 0.0 {
        return Err(Error::Domain("softmax temperature parameter must be positive".into()));
    }
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let np = params.num_prices;
    let na = params.num_actions;
    let mut q = vec![0.0f64; np * na];
    let mut field: Vec<f64> = vec![(na as f64 - 1.0) / 2.0; np];
    let mut converged = false;
    let mut outer_done = max_outer;

    for outer in 0..max_outer {
        let atoms: Vec<Vec<(usize, f64)>> =
            (0..np).map(|s| next_price_atoms(params, s, field[s])).collect();
        let q_before = q.clone();
        for _ in 0..MFG_INNER_SWEEPS {
            let values: Vec<f64> = (0..np)
                .map(|s| q[s * na..(s + 1) * na].iter().copied().fold(f64::NEG_INFINITY, f64::max))
                .collect();
            let mut change = 0.0f64;
            for s in 0..np {
                let mut cont = 0.0;
                let mut margin = 0.0;
                for &(sp, pr) in &atoms[s] {
                    cont += pr * values[sp];
                    margin += pr * (sp as f64 - params.cost);
                }
                for a in 0..na {
                    let v = margin * a as f64 + params.gamma * cont;
                    change = change.max((v - q[s * na + a]).abs());
                    q[s * na + a] = v;
                }
            }
            if change < 1e-12 {
                break;
            }
        }
        let softmax_means = softmax_mean_actions(&q, np, na, beta);
        for s in 0..np {
            field[s] = (1.0 - MFG_FIELD_DAMPING) * field[s] + MFG_FIELD_DAMPING * softmax_means[s];
        }
        let outer_change = q
            .iter()
            .zip(&q_before)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if outer > 0 && outer_change < tol {
            converged = true;
            outer_done = outer + 1;
            break;
        }
    }

    let rows = softmax_rows(&q, np, na, beta);
    Ok(MfgSolution {
        q,
        policy: PricePolicy::new(rows)?,
        outer_iterations: outer_done,
        converged,
    })
}

fn softmax_rows(q: &[f64], np: usize, na: usize, beta: f64) -> Vec<Distribution> {
    (0..np)
        .map(|s| {
            let row = &q[s * na..(s + 1) * na];
            let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut w: Vec<f64> = row.iter().map(|&v| (beta * (v - m)).exp()).collect();
            let z: f64 = w.iter().sum();
            for x in &mut w {
                *x /= z;
            }
            Distribution::new(w).expect("softmax weights form a distribution")
        })
        .collect()
}

fn softmax_mean_actions(q: &[f64], np: usize, na: usize, beta: f64) -> Vec<f64> {
    softmax_rows(q, np, na, beta).iter().map(mean_action).collect()
}

/// Simulates two independent price processes for `rounds` steps, one per
/// policy, accumulating the population margin at each realized price.
/// Returns the running cumulative-reward sequences.
pub fn head_to_head(
    params: &SupplyParams,
    first: &PricePolicy,
    second: &PricePolicy,
    rounds: usize,
    initial_price: usize,
    rng: &mut SimRng,
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate()?;
    if initial_price >= params.num_prices {
        return Err(Error::Domain(format!("initial price {initial_price} outside the price set")));
    }
    for policy in [first, second] {
        if policy.num_prices() != params.num_prices {
            return Err(Error::DimensionMismatch {
                expected: params.num_prices,
                got: policy.num_prices(),
            });
        }
    }
    let seed_a: u64 = rng.random();
    let seed_b: u64 = rng.random();
    Ok((
        simulate_policy(params, first, rounds, initial_price, &mut crate::rng::seeded(seed_a))?,
        simulate_policy(params, second, rounds, initial_price, &mut crate::rng::seeded(seed_b))?,
    ))
}

fn simulate_policy(
    params: &SupplyParams,
    policy: &PricePolicy,
    rounds: usize,
    initial_price: usize,
    rng: &mut SimRng,
) -> Result<Vec<f64>> {
    let mut cum = Vec::with_capacity(rounds);
    let mut acc = 0.0;
    let mut price = initial_price;
    for _ in 0..rounds {
        let m = mean_action(policy.row(price));
        let next = price_transition(params, price, policy.row(price), rng)?;
        acc += (next as f64 - params.cost) * m;
        cum.push(acc);
        price = next;
    }
    Ok(cum)
}

/// Persists a (price, supply-mix) table in the shared text format: the state
/// side is written as point-mass compositions over the price set.
pub fn write_supply_table<W: Write>(
    out: &mut W,
    params: &SupplyParams,
    table: &IqTable,
    grid: &SimplexGrid,
) -> std::io::Result<()> {
    let np = params.num_prices;
    writeln!(
        out,
        "{} {} {} {} {}",
        np,
        params.num_actions,
        grid.resolution(),
        grid.resolution(),
        params.gamma
    )?;
    let res = grid.resolution();
    let mut line = String::new();
    for s in 0..np {
        for j in 0..table.num_policy_cells() {
            line.clear();
            for k in 0..np {
                line.push_str(&(if k == s { res } else { 0 }).to_string());
                line.push(' ');
            }
            for &c in grid.composition(j) {
                line.push_str(&c.to_string());
                line.push(' ');
            }
            line.push_str(&format!("{:.16e}", table.value(s, j)));
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn price_step_zero_drift_unit_noise() {
        let p = SupplyParams::default();
        // demand exactly at the mean supply, +1 noise
        assert_eq!(price_step(&p, 10, 2.0, 2.0, 1.0), 11);
        assert_eq!(price_step(&p, 10, 2.0, 2.0, -1.0), 9);
    }

    #[test]
    fn price_step_clamps_at_boundaries() {
        let p = SupplyParams::default();
        assert_eq!(price_step(&p, 19, 0.0, 3.0, 1.0), 19);
        assert_eq!(price_step(&p, 0, 4.0, 1.0, -1.0), 0);
    }

    #[test]
    fn price_transition_stays_in_range_and_matches_drift() {
        let p = SupplyParams::default();
        let nu = Distribution::dirac(0, 5); // mean supply 0
        let mut rng = seeded(17);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let sp = price_transition(&p, 10, &nu, &mut rng).unwrap();
            assert!(sp < 20);
            sum += sp as f64;
        }
        let mean = sum / n as f64;
        // analytic mean 10 + (2 - 0) = 12; sd of one draw ~ sqrt(0.25 + 1)
        let se = (0.25f64 + 1.0).sqrt() / (n as f64).sqrt();
        assert!((mean - 12.0).abs() < 3.0 * se + 0.01, "mean {mean}");
    }

    #[test]
    fn reward_examples() {
        let p = SupplyParams::default();
        let uniform = Distribution::uniform(5); // mean 2
        assert_eq!(supply_reward(&p, 1, &uniform), 0.0);
        assert!((supply_reward(&p, 3, &uniform) - 4.0).abs() < 1e-12);
        assert!((supply_reward(&p, 0, &uniform) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn reward_is_linear_in_the_mix() {
        let p = SupplyParams::default();
        let a = Distribution::new(vec![0.5, 0.5, 0.0, 0.0, 0.0]).unwrap();
        let b = Distribution::new(vec![0.0, 0.0, 0.0, 0.5, 0.5]).unwrap();
        for alpha in [0.0, 0.3, 0.7, 1.0] {
            let mix = Distribution::new(
                (0..5)
                    .map(|i| alpha * a.weight(i) + (1.0 - alpha) * b.weight(i))
                    .collect(),
            )
            .unwrap();
            let lhs = supply_reward(&p, 7, &mix);
            let rhs = alpha * supply_reward(&p, 7, &a) + (1.0 - alpha) * supply_reward(&p, 7, &b);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn next_price_atoms_form_a_distribution() {
        let p = SupplyParams::default();
        for s in [0, 10, 19] {
            for m in [0.0, 2.0, 4.0] {
                let atoms = next_price_atoms(&p, s, m);
                let total: f64 = atoms.iter().map(|&(_, pr)| pr).sum();
                assert!((total - 1.0).abs() < 1e-12, "s={s} m={m} total={total}");
                assert!(atoms.iter().all(|&(sp, _)| sp < 20));
            }
        }
    }

    #[test]
    fn zero_margin_game_converges_to_zero_table() {
        // single price 0 with zero cost: every margin vanishes
        let p = SupplyParams { num_prices: 1, cost: 0.0, ..SupplyParams::default() };
        let grid = action_grid(&p, 4).unwrap();
        let mut rng = seeded(3);
        let (table, report) =
            run_supply_sweeps(&p, &grid, 50, 0.1, BackupMode::Sampled, &mut rng).unwrap();
        assert!(table.max_abs() < 1e-12);
        assert!(report.last_sup_change().unwrap() < 1e-12);
    }

    #[test]
    fn table_values_respect_the_discounted_bound() {
        let p = SupplyParams::default();
        let grid = action_grid(&p, 5).unwrap();
        let mut rng = seeded(4);
        let (table, _) =
            run_supply_sweeps(&p, &grid, 60, 0.1, BackupMode::Sampled, &mut rng).unwrap();
        assert!(table.max_abs() <= p.value_bound());
    }

    #[test]
    fn mean_action_table_trivia() {
        let p = SupplyParams { num_prices: 3, ..SupplyParams::default() };
        let grid = action_grid(&p, 4).unwrap();
        let mut table = IqTable::zeros(3, grid.len());
        // constant table: argmax is cell 0 = (0,0,0,0,4), all mass on the
        // last action under the lexicographic enumeration
        let ma = mean_action_table(&table, &grid);
        assert!(ma.iter().all(|&m| (m - 4.0).abs() < 1e-12));
        // reward a point mass on action 0 at price 1
        let target = grid.position(&[4, 0, 0, 0, 0]).unwrap();
        table.set(1, target, 1.0);
        let ma = mean_action_table(&table, &grid);
        assert_eq!(ma[1], 0.0);
    }

    #[test]
    fn tiny_softmax_parameter_flattens_the_baseline_policy() {
        let p = SupplyParams::default();
        let sol = mfg_solve(&p, 1e-12, 1e-2, 200).unwrap();
        for m in sol.policy.mean_actions() {
            assert!((m - 2.0).abs() < 1e-6, "mean {m}");
        }
    }

    #[test]
    fn head_to_head_zero_rounds() {
        let p = SupplyParams::default();
        let uniform = PricePolicy::new(vec![Distribution::uniform(5); 20]).unwrap();
        let mut rng = seeded(9);
        let (a, b) = head_to_head(&p, &uniform, &uniform, 0, 10, &mut rng).unwrap();
        assert!(a.is_empty() && b.is_empty());
    }

    #[test]
    fn head_to_head_identical_policies_statistically_indistinguishable() {
        let p = SupplyParams::default();
        let uniform = PricePolicy::new(vec![Distribution::uniform(5); 20]).unwrap();
        let mut diffs = Vec::new();
        for seed in 0..20 {
            let mut rng = seeded(1000 + seed);
            let (a, b) = head_to_head(&p, &uniform, &uniform, 500, 10, &mut rng).unwrap();
            diffs.push(a.last().unwrap() - b.last().unwrap());
        }
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!(mean.abs() < 4.0 * se + 1e-9, "mean diff {mean}, se {se}");
    }
}
