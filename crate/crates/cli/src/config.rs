//! Experiment configuration: flat `key=value` files with `#` comments,
//! per-experiment defaults, strict unknown-key rejection and range checks.

use anyhow::{anyhow, bail, Result};
use liftq_core::supply::BackupMode;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    NaiveInconsistency,
    IqTwoState,
    ValueIteration,
    SupplyMkv,
    SupplyMfg,
    HeadToHead,
    IdentityCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::NaiveInconsistency,
        Experiment::IqTwoState,
        Experiment::ValueIteration,
        Experiment::SupplyMkv,
        Experiment::SupplyMfg,
        Experiment::HeadToHead,
        Experiment::IdentityCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::NaiveInconsistency => "naive-inconsistency",
            Experiment::IqTwoState => "iq-twostate",
            Experiment::ValueIteration => "value-iteration",
            Experiment::SupplyMkv => "supply-mkv",
            Experiment::SupplyMfg => "supply-mfg",
            Experiment::HeadToHead => "head-to-head",
            Experiment::IdentityCheck => "identity-check",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == name)
            .ok_or_else(|| anyhow!("unknown experiment '{name}'"))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Full configuration of one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub repeats: usize,
    pub out_dir: PathBuf,
    pub workers: usize,
    // two-state environment
    pub gamma: f64,
    pub p: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda: f64,
    // learning
    pub epsilon: f64,
    pub beta: f64,
    pub learning_rate: f64,
    pub outer_iters: usize,
    pub n_s: u32,
    pub n_a: u32,
    pub iterations: usize,
    pub rounds: usize,
    pub tol: f64,
    pub initial_price: usize,
    pub p0_list: Vec<f64>,
    pub mode: BackupMode,
    pub max_outer: usize,
    pub num_mdps: usize,
}

impl ExperimentConfig {
    /// Baseline parameter set for an experiment. The two-state family uses
    /// the benchmark parameters; the supply family uses the market defaults.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut cfg = Self {
            experiment,
            seed: 0,
            repeats: 1,
            out_dir: PathBuf::from("liftq-out"),
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            gamma: 0.5,
            p: 0.6,
            lambda0: 0.5,
            lambda1: 0.8,
            lambda: 5.0,
            epsilon: 0.01,
            beta: 1.0,
            learning_rate: 0.4,
            outer_iters: 20,
            n_s: 20,
            n_a: 20,
            iterations: 10_000,
            rounds: 1000,
            tol: 1e-10,
            initial_price: 10,
            p0_list: vec![0.01, 0.5, 0.99],
            mode: BackupMode::Sampled,
            max_outer: 500,
            num_mdps: 20,
        };
        match experiment {
            Experiment::NaiveInconsistency => {
                cfg.lambda = 10.0;
            }
            Experiment::IqTwoState => {
                cfg.repeats = 20;
            }
            Experiment::ValueIteration => {
                cfg.outer_iters = 500;
            }
            Experiment::SupplyMkv | Experiment::HeadToHead => {
                cfg.gamma = 0.6;
                cfg.learning_rate = 0.1;
                cfg.outer_iters = 100;
                cfg.tol = 1e-2;
            }
            Experiment::SupplyMfg => {
                cfg.gamma = 0.6;
                cfg.tol = 1e-2;
            }
            Experiment::IdentityCheck => {
                cfg.iterations = 100;
                cfg.tol = 1e-8;
            }
        }
        cfg
    }

    /// Applies one `key=value` pair; `line` is used in error messages.
    pub fn apply_kv(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        fn parse<T: std::str::FromStr>(value: &str, key: &str, line: usize) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            value
                .parse::<T>()
                .map_err(|e| anyhow!("line {line}: bad value for {key}: {e}"))
        }
        match key {
            "experiment" => {
                let exp = Experiment::from_name(value).map_err(|e| anyhow!("line {line}: {e}"))?;
                if exp != self.experiment {
                    bail!(
                        "line {line}: config names experiment '{}' but '{}' was requested",
                        exp.name(),
                        self.experiment.name()
                    );
                }
            }
            "seed" => self.seed = parse(value, key, line)?,
            "repeats" => self.repeats = parse(value, key, line)?,
            "out" => self.out_dir = PathBuf::from(value),
            "workers" => self.workers = parse(value, key, line)?,
            "gamma" => self.gamma = parse(value, key, line)?,
            "p" => self.p = parse(value, key, line)?,
            "lambda0" => self.lambda0 = parse(value, key, line)?,
            "lambda1" => self.lambda1 = parse(value, key, line)?,
            "lambda" => self.lambda = parse(value, key, line)?,
            "epsilon" => self.epsilon = parse(value, key, line)?,
            "beta" => self.beta = parse(value, key, line)?,
            "learning_rate" => self.learning_rate = parse(value, key, line)?,
            "outer_iters" => self.outer_iters = parse(value, key, line)?,
            "n_s" => self.n_s = parse(value, key, line)?,
            "n_a" => self.n_a = parse(value, key, line)?,
            "iterations" => self.iterations = parse(value, key, line)?,
            "rounds" => self.rounds = parse(value, key, line)?,
            "tol" => self.tol = parse(value, key, line)?,
            "initial_price" => self.initial_price = parse(value, key, line)?,
            "p0_list" => {
                let mut list = Vec::new();
                for part in value.split(',') {
                    list.push(parse::<f64>(part.trim(), key, line)?);
                }
                self.p0_list = list;
            }
            "mode" => {
                self.mode = value
                    .parse::<BackupMode>()
                    .map_err(|e| anyhow!("line {line}: bad value for mode: {e}"))?;
            }
            "max_outer" => self.max_outer = parse(value, key, line)?,
            "num_mdps" => self.num_mdps = parse(value, key, line)?,
            other => bail!("line {line}: unknown key '{other}'"),
        }
        Ok(())
    }

    /// Range checks; every violation names the offending field.
    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, field: &str, detail: String) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(anyhow!("{field}: {detail}"))
            }
        }
        check(self.repeats >= 1, "repeats", format!("must be >= 1, got {}", self.repeats))?;
        check(self.workers >= 1, "workers", format!("must be >= 1, got {}", self.workers))?;
        check(
            self.gamma > 0.0 && self.gamma < 1.0,
            "gamma",
            format!("must lie in (0,1), got {}", self.gamma),
        )?;
        check((0.0..=1.0).contains(&self.p), "p", format!("must lie in [0,1], got {}", self.p))?;
        check(
            (0.0..=1.0).contains(&self.lambda0),
            "lambda0",
            format!("must lie in [0,1], got {}", self.lambda0),
        )?;
        check(
            (0.0..=1.0).contains(&self.lambda1),
            "lambda1",
            format!("must lie in [0,1], got {}", self.lambda1),
        )?;
        check(self.lambda > 0.0, "lambda", format!("must be > 0, got {}", self.lambda))?;
        check(
            (0.0..=1.0).contains(&self.epsilon),
            "epsilon",
            format!("must lie in [0,1], got {}", self.epsilon),
        )?;
        check(self.beta > 0.0, "beta", format!("must be > 0, got {}", self.beta))?;
        check(
            self.learning_rate > 0.0 && self.learning_rate <= 1.0,
            "learning_rate",
            format!("must lie in (0,1], got {}", self.learning_rate),
        )?;
        check(self.n_s >= 1, "n_s", format!("must be >= 1, got {}", self.n_s))?;
        check(self.n_a >= 1, "n_a", format!("must be >= 1, got {}", self.n_a))?;
        check(self.tol > 0.0, "tol", format!("must be > 0, got {}", self.tol))?;
        check(
            self.initial_price < 20,
            "initial_price",
            format!("must lie in the price set {{0..19}}, got {}", self.initial_price),
        )?;
        check(!self.p0_list.is_empty(), "p0_list", "must not be empty".into())?;
        for &p0 in &self.p0_list {
            check(
                (0.0..=1.0).contains(&p0),
                "p0_list",
                format!("entries must lie in [0,1], got {p0}"),
            )?;
        }
        check(self.max_outer >= 1, "max_outer", format!("must be >= 1, got {}", self.max_outer))?;
        check(self.num_mdps >= 1, "num_mdps", format!("must be >= 1, got {}", self.num_mdps))?;
        // the two-state family additionally needs a holdable target
        if matches!(
            self.experiment,
            Experiment::NaiveInconsistency | Experiment::IqTwoState | Experiment::ValueIteration
        ) {
            check(
                1.0 - self.lambda0 <= self.p && self.p <= self.lambda1,
                "p",
                format!(
                    "must lie in [1-lambda0, lambda1] = [{}, {}], got {}",
                    1.0 - self.lambda0,
                    self.lambda1,
                    self.p
                ),
            )?;
        }
        Ok(())
    }

    /// Loads a config file on top of the defaults for `experiment`. When
    /// `experiment` is `None` the file must name one itself.
    pub fn load(path: &Path, experiment: Option<Experiment>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text, experiment)
    }

    /// Parses config text (see [`ExperimentConfig::load`]).
    pub fn parse(text: &str, experiment: Option<Experiment>) -> Result<Self> {
        let experiment = match experiment {
            Some(e) => e,
            None => {
                let named = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .filter_map(|l| l.split_once('='))
                    .find(|(k, _)| k.trim() == "experiment")
                    .map(|(_, v)| v.trim().to_string());
                match named {
                    Some(name) => Experiment::from_name(&name)?,
                    None => bail!("config does not name an experiment"),
                }
            }
        };
        let mut cfg = Self::defaults(experiment);
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| anyhow!("line {line}: expected key=value, got '{content}'"))?;
            cfg.apply_kv(key.trim(), value.trim(), line)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Key/value snapshot in a fixed order, as written into the manifest.
    pub fn snapshot(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = vec![
            ("experiment".into(), self.experiment.name().into()),
            ("seed".into(), self.seed.to_string()),
            ("repeats".into(), self.repeats.to_string()),
            ("out".into(), self.out_dir.display().to_string()),
            ("workers".into(), self.workers.to_string()),
            ("gamma".into(), self.gamma.to_string()),
            ("p".into(), self.p.to_string()),
            ("lambda0".into(), self.lambda0.to_string()),
            ("lambda1".into(), self.lambda1.to_string()),
            ("lambda".into(), self.lambda.to_string()),
            ("epsilon".into(), self.epsilon.to_string()),
            ("beta".into(), self.beta.to_string()),
            ("learning_rate".into(), self.learning_rate.to_string()),
            ("outer_iters".into(), self.outer_iters.to_string()),
            ("n_s".into(), self.n_s.to_string()),
            ("n_a".into(), self.n_a.to_string()),
            ("iterations".into(), self.iterations.to_string()),
            ("rounds".into(), self.rounds.to_string()),
            ("tol".into(), self.tol.to_string()),
            ("initial_price".into(), self.initial_price.to_string()),
            (
                "p0_list".into(),
                self.p0_list.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            ),
            (
                "mode".into(),
                match self.mode {
                    BackupMode::Sampled => "sampled".into(),
                    BackupMode::Exact => "exact".into(),
                },
            ),
            ("max_outer".into(), self.max_outer.to_string()),
            ("num_mdps".into(), self.num_mdps.to_string()),
        ];
        out.shrink_to_fit();
        out
    }
}
