//! Executes a configured experiment: derives per-repeat seeds, runs repeats
//! in parallel, writes plot-ready CSVs and persisted tables, and records
//! everything in the manifest.

use crate::config::{Experiment, ExperimentConfig};
use crate::manifest::RunManifest;
use anyhow::{anyhow, bail, Context, Result};
use liftq_core::iq::{write_table, ConvergenceReport, ErrorMetric, SweepOptions};
use liftq_core::supply::{
    action_grid, greedy_price_policy, head_to_head, mean_action_table, mfg_solve,
    run_supply_sweeps, write_supply_table, SupplyParams,
};
use liftq_core::twostate::{self, TwoStateParams};
use liftq_core::{
    lifted_from_single, run_sweep_learning, solve_single_agent_q, stream_seed, substream,
    value_iteration, AggregateSimulator, Distribution, IqGrids, LocalPolicy, MeanFieldFree,
    SingleAgentMdp,
};
use rand::Rng;
use rayon::prelude::*;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Runs the configured experiment and writes its manifest. The manifest is
/// written (with failure status) even when the experiment itself fails.
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest> {
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("cannot create output dir {}", cfg.out_dir.display()))?;
    let start = Instant::now();
    let mut manifest = RunManifest::new(cfg, &cfg.out_dir);
    manifest.repeat_seeds =
        (0..cfg.repeats).map(|k| stream_seed(cfg.seed, k as u64)).collect();

    let outcome = dispatch(cfg, &manifest.repeat_seeds);
    manifest.elapsed_seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(artifacts) => manifest.artifacts = artifacts,
        Err(e) => manifest.failure = Some(format!("{e:#}")),
    }
    manifest.write()?;
    Ok(manifest)
}

fn dispatch(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<PathBuf>> {
    match cfg.experiment {
        Experiment::NaiveInconsistency => parallel_repeats(cfg, seeds, naive_repeat),
        Experiment::IqTwoState => iq_twostate(cfg, seeds),
        Experiment::ValueIteration => value_iteration_run(cfg),
        Experiment::SupplyMkv => parallel_repeats(cfg, seeds, supply_mkv_repeat),
        Experiment::SupplyMfg => supply_mfg_run(cfg),
        Experiment::HeadToHead => parallel_repeats(cfg, seeds, head_to_head_repeat),
        Experiment::IdentityCheck => parallel_repeats(cfg, seeds, identity_check_repeat),
    }
}

fn parallel_repeats(
    cfg: &ExperimentConfig,
    seeds: &[u64],
    repeat_fn: fn(&ExperimentConfig, usize, u64) -> Result<Vec<PathBuf>>,
) -> Result<Vec<PathBuf>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.min(seeds.len().max(1)))
        .build()
        .context("cannot build worker pool")?;
    let nested: Vec<Vec<PathBuf>> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(k, &seed)| repeat_fn(cfg, k, seed))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(nested.into_iter().flatten().collect())
}

fn twostate_params(cfg: &ExperimentConfig) -> Result<TwoStateParams> {
    TwoStateParams::new(cfg.lambda0, cfg.lambda1, cfg.p, cfg.lambda, cfg.gamma)
        .map_err(|e| anyhow!("{e}"))
}

fn supply_params(cfg: &ExperimentConfig) -> SupplyParams {
    SupplyParams { gamma: cfg.gamma, ..SupplyParams::default() }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

// ---------------------------------------------------------------- naive

fn naive_repeat(cfg: &ExperimentConfig, k: usize, seed: u64) -> Result<Vec<PathBuf>> {
    let params = twostate_params(cfg)?;
    let config = liftq_core::naive::InconsistencyConfig {
        iterations: cfg.iterations,
        epsilon: cfg.epsilon,
        mean_field_terms: true,
    };
    let mut rng = liftq_core::seeded(seed);
    let runs =
        liftq_core::naive::run_time_inconsistency_experiment(&params, &cfg.p0_list, &config, &mut rng)
            .map_err(|e| anyhow!("{e}"))?;
    let path = cfg.out_dir.join(format!("naive_table1_rep{k}.csv"));
    let mut f = create(&path)?;
    writeln!(f, "p0,Q00,Q01,Q10,Q11")?;
    for (p0, table) in &runs {
        writeln!(
            f,
            "{},{},{},{},{}",
            p0,
            table.value(0, 0),
            table.value(0, 1),
            table.value(1, 0),
            table.value(1, 1)
        )?;
    }
    Ok(vec![path])
}

// ---------------------------------------------------------------- iq-twostate

/// Oracle metric on the state grid: closed-form value per cell at the
/// grid-projected optimal policy.
fn two_state_metric(params: &TwoStateParams, grids: &IqGrids) -> Result<ErrorMetric> {
    let pi = twostate::optimal_policy(params).map_err(|e| anyhow!("{e}"))?;
    let cell = grids.policy.project(&pi).map_err(|e| anyhow!("{e}"))?;
    let oracle = (0..grids.state.len())
        .map(|i| {
            let mu = grids.state.distribution(i);
            twostate::optimal_value(params, mu.weight(0)).map_err(|e| anyhow!("{e}"))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ErrorMetric::new(cell, oracle))
}

fn iq_twostate(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<PathBuf>> {
    let params = twostate_params(cfg)?;
    let env = twostate::build_env(params).map_err(|e| anyhow!("{e}"))?;
    let grids = IqGrids::new(2, 2, cfg.n_s, cfg.n_a).map_err(|e| anyhow!("{e}"))?;
    let metric = two_state_metric(&params, &grids)?;
    let opts = SweepOptions { outer_iterations: cfg.outer_iters, learning_rate: cfg.learning_rate };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.min(seeds.len().max(1)))
        .build()
        .context("cannot build worker pool")?;
    let runs: Vec<(Vec<PathBuf>, Vec<f64>)> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(k, &seed)| -> Result<(Vec<PathBuf>, Vec<f64>)> {
                let mut rng = liftq_core::seeded(seed);
                let sim = AggregateSimulator::new(&env);
                let (table, report) = run_sweep_learning(&sim, &grids, opts, Some(&metric), &mut rng)
                    .map_err(|e| anyhow!("{e}"))?;
                let mut artifacts = Vec::new();
                let conv = cfg.out_dir.join(format!("iq_convergence_rep{k}.csv"));
                report.write_csv(&mut create(&conv)?)?;
                artifacts.push(conv);
                if k == 0 {
                    let tab = cfg.out_dir.join("iq_table_rep0.txt");
                    write_table(&mut create(&tab)?, &table, &grids, params.gamma)?;
                    artifacts.push(tab);
                }
                Ok((artifacts, report.error_series()))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut artifacts: Vec<PathBuf> = Vec::new();
    let mut series: Vec<Vec<f64>> = Vec::new();
    for (a, s) in runs {
        artifacts.extend(a);
        series.push(s);
    }
    let summary = cfg.out_dir.join("iq_convergence_summary.csv");
    write_error_summary(&summary, &series)?;
    artifacts.push(summary);
    Ok(artifacts)
}

/// Across-repeat mean and standard deviation of the error metric, per
/// iteration (for re-plotting convergence curves).
fn write_error_summary(path: &Path, series: &[Vec<f64>]) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "iteration,E_mean,E_std")?;
    let len = series.iter().map(Vec::len).min().unwrap_or(0);
    let n = series.len() as f64;
    for t in 0..len {
        let mean = series.iter().map(|s| s[t]).sum::<f64>() / n;
        let std = if series.len() > 1 {
            (series.iter().map(|s| (s[t] - mean) * (s[t] - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        writeln!(f, "{t},{mean},{std}")?;
    }
    Ok(())
}

// ---------------------------------------------------------------- value iteration

fn value_iteration_run(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let params = twostate_params(cfg)?;
    let env = twostate::build_env(params).map_err(|e| anyhow!("{e}"))?;
    let grids = IqGrids::new(2, 2, cfg.n_s, cfg.n_a).map_err(|e| anyhow!("{e}"))?;
    let metric = two_state_metric(&params, &grids)?;
    let (table, report) = value_iteration(&env, &grids, cfg.tol, cfg.outer_iters, Some(&metric))
        .map_err(|e| anyhow!("{e}"))?;
    if !report.converged {
        bail!(
            "value iteration did not converge within {} sweeps (last change {:?})",
            cfg.outer_iters,
            report.last_sup_change()
        );
    }
    let conv = cfg.out_dir.join("vi_convergence.csv");
    report.write_csv(&mut create(&conv)?)?;
    let tab = cfg.out_dir.join("vi_table.txt");
    write_table(&mut create(&tab)?, &table, &grids, params.gamma)?;
    Ok(vec![conv, tab])
}

// ---------------------------------------------------------------- supply

fn write_mean_actions(path: &Path, rows: &[(&str, Vec<f64>)]) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "price,mean_action,solver")?;
    for (solver, means) in rows {
        for (price, m) in means.iter().enumerate() {
            writeln!(f, "{price},{m},{solver}")?;
        }
    }
    Ok(())
}

fn write_convergence(path: &Path, report: &ConvergenceReport) -> Result<()> {
    report.write_csv(&mut create(path)?)?;
    Ok(())
}

fn supply_mkv_repeat(cfg: &ExperimentConfig, k: usize, seed: u64) -> Result<Vec<PathBuf>> {
    let params = supply_params(cfg);
    let grid = action_grid(&params, cfg.n_a).map_err(|e| anyhow!("{e}"))?;
    let mut rng = liftq_core::seeded(seed);
    let (table, report) =
        run_supply_sweeps(&params, &grid, cfg.outer_iters, cfg.learning_rate, cfg.mode, &mut rng)
            .map_err(|e| anyhow!("{e}"))?;
    let mut artifacts = Vec::new();
    let conv = cfg.out_dir.join(format!("supply_convergence_rep{k}.csv"));
    write_convergence(&conv, &report)?;
    artifacts.push(conv);
    let ma = cfg.out_dir.join(format!("mean_actions_rep{k}.csv"));
    write_mean_actions(&ma, &[("mkv", mean_action_table(&table, &grid))])?;
    artifacts.push(ma);
    if k == 0 {
        let tab = cfg.out_dir.join("supply_table_rep0.txt");
        write_supply_table(&mut create(&tab)?, &params, &table, &grid)?;
        artifacts.push(tab);
    }
    Ok(artifacts)
}

fn supply_mfg_run(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let params = supply_params(cfg);
    let sol = mfg_solve(&params, cfg.beta, cfg.tol, cfg.max_outer).map_err(|e| anyhow!("{e}"))?;
    if !sol.converged {
        bail!(
            "best-response iteration did not settle within {} outer refreshes",
            cfg.max_outer
        );
    }
    let ma = cfg.out_dir.join("mfg_mean_actions.csv");
    write_mean_actions(&ma, &[("mfg", sol.policy.mean_actions())])?;
    let q = cfg.out_dir.join("mfg_q_table.csv");
    let mut f = create(&q)?;
    writeln!(f, "price,action,q")?;
    for s in 0..params.num_prices {
        for a in 0..params.num_actions {
            writeln!(f, "{s},{a},{}", sol.q_value(s, a))?;
        }
    }
    Ok(vec![ma, q])
}

fn head_to_head_repeat(cfg: &ExperimentConfig, k: usize, seed: u64) -> Result<Vec<PathBuf>> {
    let params = supply_params(cfg);
    let grid = action_grid(&params, cfg.n_a).map_err(|e| anyhow!("{e}"))?;
    // sub-streams: 0 trains the cooperative table, 1 drives the simulation
    let mut train_rng = substream(seed, 0);
    let (table, _) =
        run_supply_sweeps(&params, &grid, cfg.outer_iters, cfg.learning_rate, cfg.mode, &mut train_rng)
            .map_err(|e| anyhow!("{e}"))?;
    let mkv = greedy_price_policy(&table, &grid).map_err(|e| anyhow!("{e}"))?;
    let sol = mfg_solve(&params, cfg.beta, 1e-2, cfg.max_outer).map_err(|e| anyhow!("{e}"))?;
    if !sol.converged {
        bail!("best-response baseline did not settle");
    }
    let mut sim_rng = substream(seed, 1);
    let (cum_mkv, cum_mfg) =
        head_to_head(&params, &mkv, &sol.policy, cfg.rounds, cfg.initial_price, &mut sim_rng)
            .map_err(|e| anyhow!("{e}"))?;

    let mut artifacts = Vec::new();
    let path = cfg.out_dir.join(format!("head_to_head_rep{k}.csv"));
    let mut f = create(&path)?;
    writeln!(f, "round,cum_reward_mkv,cum_reward_mfg")?;
    for (i, (a, b)) in cum_mkv.iter().zip(&cum_mfg).enumerate() {
        writeln!(f, "{},{},{}", i + 1, a, b)?;
    }
    artifacts.push(path);
    let ma = cfg.out_dir.join(format!("head_to_head_mean_actions_rep{k}.csv"));
    write_mean_actions(&ma, &[("mkv", mkv.mean_actions()), ("mfg", sol.policy.mean_actions())])?;
    artifacts.push(ma);
    Ok(artifacts)
}

// ---------------------------------------------------------------- identity check

/// Draws a random population-blind 2x2 environment, solves the
/// per-(state,action) table, and checks the fixed-point residual of its lift
/// at random (distribution, policy) pairs.
fn identity_check_repeat(cfg: &ExperimentConfig, k: usize, seed: u64) -> Result<Vec<PathBuf>> {
    let mut rng = liftq_core::seeded(seed);
    let path = cfg.out_dir.join(format!("identity_check_rep{k}.csv"));
    let mut f = create(&path)?;
    writeln!(f, "mdp,gamma,max_residual")?;
    let mut worst: f64 = 0.0;
    for m in 0..cfg.num_mdps {
        let gamma = 0.3 + 0.6 * rng.random::<f64>();
        let mdp = random_mdp(&mut rng)?;
        let q = solve_single_agent_q(&mdp, gamma, 1e-13, 20_000).map_err(|e| anyhow!("{e}"))?;
        let env = MeanFieldFree { mdp: &mdp, gamma };
        let mut max_res: f64 = 0.0;
        for _ in 0..cfg.iterations {
            let mu = random_distribution(2, &mut rng)?;
            let h = LocalPolicy::new(vec![
                random_distribution(2, &mut rng)?,
                random_distribution(2, &mut rng)?,
            ])
            .map_err(|e| anyhow!("{e}"))?;
            let lifted = lifted_from_single(&q, &mu, &h).map_err(|e| anyhow!("{e}"))?;
            let r = liftq_core::integrated_reward(&env, &mu, &h).map_err(|e| anyhow!("{e}"))?;
            let next = liftq_core::flow(&env, &mu, &h).map_err(|e| anyhow!("{e}"))?;
            // the exact supremum over policies of the lift at the next
            // distribution: greedy mass on the per-state argmax
            let sup: f64 = (0..2).map(|s| next.weight(s) * q.max_over_actions(s)).sum();
            max_res = max_res.max((lifted - (r + gamma * sup)).abs());
        }
        writeln!(f, "{m},{gamma},{max_res}")?;
        worst = worst.max(max_res);
    }
    drop(f);
    if worst > cfg.tol {
        bail!("lift residual {worst:e} exceeds tolerance {:e}", cfg.tol);
    }
    Ok(vec![path])
}

fn random_distribution(dim: usize, rng: &mut liftq_core::SimRng) -> Result<Distribution> {
    let mut w: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() + 1e-9).collect();
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    Distribution::new(w).map_err(|e| anyhow!("{e}"))
}

fn random_mdp(rng: &mut liftq_core::SimRng) -> Result<SingleAgentMdp> {
    let mut transitions = Vec::with_capacity(4);
    let mut rewards = Vec::with_capacity(4);
    for _ in 0..4 {
        transitions.push(random_distribution(2, rng)?);
        rewards.push(rng.random::<f64>() * 2.0 - 1.0);
    }
    SingleAgentMdp::new(2, 2, transitions, rewards).map_err(|e| anyhow!("{e}"))
}
