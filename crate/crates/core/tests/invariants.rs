//! Solver-level invariants: boundedness, fixed-point residuals, the
//! value/table relation, agreement across initializations, grid optimality
//! of the closed-form policy, and statistical agreement of the two value
//! evaluators.

use liftq_core::iq::{bellman_backup, SweepOptions};
use liftq_core::naive::{run_time_inconsistency_experiment, InconsistencyConfig};
use liftq_core::twostate::{build_env, optimal_policy, optimal_value, TwoStateParams};
use liftq_core::{
    particle_estimate, policy_value, run_sweep_learning, seeded, substream, truncation_horizon,
    value_iteration, AggregateSimulator, Distribution, IqGrids, IqTable, LocalPolicy,
    MeanFieldEnv, StationaryControl,
};
use rand::Rng;

fn benchmark_grids(resolution: u32) -> IqGrids {
    IqGrids::new(2, 2, resolution, resolution).unwrap()
}

#[test]
fn value_iteration_respects_the_discounted_bound_and_residual() {
    let params = TwoStateParams::benchmark();
    let env = build_env(params).unwrap();
    let grids = benchmark_grids(10);
    let tol = 1e-9;
    let (table, report) = value_iteration(&env, &grids, tol, 500, None).unwrap();
    assert!(report.converged);

    let v_max = env.reward_bound().unwrap() / (1.0 - params.gamma);
    assert!(table.max_abs() <= v_max, "table exceeds bound {v_max}");

    // directly testable fixed-point residual: sup |Q - BQ| < 2 tol
    let mut residual = 0.0f64;
    for i in 0..grids.state.len() {
        for j in 0..grids.policy.len() {
            let b = bellman_backup(&env, &table, &grids, i, j).unwrap();
            residual = residual.max((b - table.value(i, j)).abs());
        }
    }
    assert!(residual < 2.0 * tol, "residual {residual}");

    // the per-cell best value agrees with the best one-step backup
    for i in 0..grids.state.len() {
        let v = table.max_over_policies(i);
        let mut backup_best = f64::NEG_INFINITY;
        for j in 0..grids.policy.len() {
            backup_best = backup_best.max(bellman_backup(&env, &table, &grids, i, j).unwrap());
        }
        assert!((v - backup_best).abs() < tol, "cell {i}: {v} vs {backup_best}");
    }
}

#[test]
fn sweep_learning_agrees_across_initializations() {
    let params = TwoStateParams::benchmark();
    let env = build_env(params).unwrap();
    let grids = benchmark_grids(20);
    let sim = AggregateSimulator::new(&env);
    let opts = SweepOptions { outer_iterations: 20, learning_rate: 0.4 };
    let v_max = env.reward_bound().unwrap() / (1.0 - params.gamma);

    // fixed probe cell: the target distribution and the projected optimum
    let b_cell = grids.state.project(&params.target()).unwrap();
    let pi_cell = grids.policy.project(&optimal_policy(&params).unwrap()).unwrap();

    let mut values = Vec::new();
    for seed in 0..20 {
        let mut rng = seeded(7000 + seed);
        let (table, _) = run_sweep_learning(&sim, &grids, opts, None, &mut rng).unwrap();
        values.push(table.value(b_cell, pi_cell));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std =
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(
        std < 0.1 * v_max,
        "start-dependence of the lifted table: std {std} vs bound {}",
        0.1 * v_max
    );
}

/// Stationary control mapping each grid cell to a fixed random grid policy.
struct RandomGridControl {
    grids: IqGrids,
    cells: Vec<usize>,
}

impl StationaryControl for RandomGridControl {
    fn policy(&self, mu: &Distribution) -> LocalPolicy {
        let cell = self.grids.state.project(mu).expect("on-grid query");
        self.grids.policy.policy(self.cells[cell])
    }
}

#[test]
fn closed_form_value_dominates_random_grid_controls() {
    let params = TwoStateParams::benchmark();
    let env = build_env(params).unwrap();
    let grids = benchmark_grids(20);
    let mut rng = seeded(0xBEEF);
    let tol = 1e-6;
    for p0 in [0.1, 0.5, 0.9] {
        let mu0 = Distribution::new(vec![p0, 1.0 - p0]).unwrap();
        let oracle = optimal_value(&params, p0).unwrap();
        let mut best = f64::NEG_INFINITY;
        for _ in 0..500 {
            let control = RandomGridControl {
                grids: benchmark_grids(20),
                cells: (0..grids.state.len())
                    .map(|_| rng.random_range(0..grids.policy.len()))
                    .collect(),
            };
            best = best.max(policy_value(&env, &control, &mu0, tol).unwrap());
        }
        assert!(
            oracle >= best - 0.1,
            "p0={p0}: random control reached {best}, oracle {oracle}"
        );
    }
}

#[test]
fn particle_and_deterministic_values_agree_statistically() {
    let params = TwoStateParams::benchmark();
    let env = build_env(params).unwrap();
    let pi = optimal_policy(&params).unwrap();
    let mu0 = Distribution::new(vec![0.35, 0.65]).unwrap();
    let tol = 1e-6;
    let horizon = truncation_horizon(params.gamma, env.reward_bound().unwrap(), tol);
    let reference = policy_value(&env, &pi, &mu0, tol).unwrap();
    for seed in 0..20 {
        let mut rng = substream(0xACE, seed);
        let est = particle_estimate(&env, &pi, &mu0, 10_000, horizon, &mut rng).unwrap();
        assert!(
            (est.mean - reference).abs() < 4.0 * est.std_error,
            "seed {seed}: {} vs {reference} (se {})",
            est.mean,
            est.std_error
        );
    }
}

#[test]
fn particle_value_is_law_invariant_across_equal_law_ensembles() {
    // two different samplings of the same initial law give estimates within
    // joint statistical tolerance
    let params = TwoStateParams::benchmark();
    let env = build_env(params).unwrap();
    let pi = optimal_policy(&params).unwrap();
    let mu0 = Distribution::new(vec![0.5, 0.5]).unwrap();
    let a = particle_estimate(&env, &pi, &mu0, 20_000, 25, &mut seeded(100)).unwrap();
    let b = particle_estimate(&env, &pi, &mu0, 20_000, 25, &mut seeded(200)).unwrap();
    let joint = (a.std_error * a.std_error + b.std_error * b.std_error).sqrt();
    assert!((a.mean - b.mean).abs() < 4.0 * joint);
}

#[test]
fn removing_population_terms_removes_start_dependence() {
    let params = TwoStateParams::new(0.5, 0.8, 0.6, 10.0, 0.5).unwrap();
    let config = InconsistencyConfig {
        iterations: 4000,
        epsilon: 0.01,
        mean_field_terms: false,
    };
    let mut rng = seeded(555);
    let runs =
        run_time_inconsistency_experiment(&params, &[0.01, 0.5, 0.99], &config, &mut rng).unwrap();
    let q00: Vec<f64> = runs.iter().map(|(_, t)| t.value(0, 0)).collect();
    let spread = q00.iter().cloned().fold(f64::MIN, f64::max)
        - q00.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 0.1, "control spread {spread}");
}

#[test]
fn random_bounded_tables_stay_bounded_under_backup() {
    let params = TwoStateParams::benchmark();
    let env = build_env(params).unwrap();
    let grids = benchmark_grids(6);
    let v_max = env.reward_bound().unwrap() / (1.0 - params.gamma);
    let mut rng = seeded(31);
    for _ in 0..20 {
        let mut table = IqTable::zeros(grids.state.len(), grids.policy.len());
        for i in 0..grids.state.len() {
            for j in 0..grids.policy.len() {
                table.set(i, j, (rng.random::<f64>() * 2.0 - 1.0) * v_max);
            }
        }
        for i in 0..grids.state.len() {
            for j in 0..grids.policy.len() {
                let b = bellman_backup(&env, &table, &grids, i, j).unwrap();
                assert!(b.abs() <= v_max + 1e-9);
            }
        }
    }
}
