//! Experiment configuration.
//!
//! A configuration is a flat set of `key=value` pairs whose keys are the
//! long flag names (`K`, `E-grid`, ...). Flags and config files go through
//! the same parser; flags win over file entries.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use bethe_strip::model::parse_onsite;
use bethe_strip::recursion::{DEFAULT_BURN_IN, DEFAULT_CHUNKS, DEFAULT_POOL_SIZE};
use bethe_strip::susy::MAX_DEGREE;
use bethe_strip::{BetheStripModel, DisorderEnsemble};

/// Every key a configuration may carry.
pub const KEYS: [&str; 18] = [
    "K",
    "m",
    "A",
    "lambda",
    "ensemble",
    "E-grid",
    "eta-schedule",
    "pool",
    "sweeps",
    "burnin",
    "samples",
    "depth",
    "degree",
    "seed",
    "ed-seed",
    "chunks",
    "workers",
    "out",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    FreeProfile,
    DosScan,
    AcIndicator,
    GapScan,
    CeSpectrum,
    Crosscheck,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::FreeProfile,
        Command::DosScan,
        Command::AcIndicator,
        Command::GapScan,
        Command::CeSpectrum,
        Command::Crosscheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::FreeProfile => "free-profile",
            Command::DosScan => "dos-scan",
            Command::AcIndicator => "ac-indicator",
            Command::GapScan => "gap-scan",
            Command::CeSpectrum => "ce-spectrum",
            Command::Crosscheck => "crosscheck",
        }
    }

    fn default_grid(self) -> &'static str {
        match self {
            Command::Crosscheck => "0.2:0.2:1",
            Command::CeSpectrum => "0:0:1",
            _ => "-1:1:11",
        }
    }

    fn default_etas(self) -> &'static str {
        match self {
            Command::FreeProfile | Command::GapScan | Command::CeSpectrum => "0",
            Command::DosScan | Command::Crosscheck => "0.05",
            Command::AcIndicator => "0.1,0.01,0.001",
        }
    }

    fn default_out(self) -> String {
        match self {
            Command::Crosscheck => "crosscheck.json".into(),
            c => format!("{}.csv", c.name()),
        }
    }
}

impl FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ConfigError(format!("unknown command {s:?}")))
    }
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// An inclusive, evenly spaced energy grid written `lo:hi:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.lo],
            n => (0..n)
                .map(|i| {
                    if i + 1 == n {
                        self.hi
                    } else {
                        self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

impl FromStr for Grid {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return err(format!("grid {s:?} is not lo:hi:count"));
        };
        let lo: f64 = parse_num("E-grid", lo)?;
        let hi: f64 = parse_num("E-grid", hi)?;
        let count: usize = parse_num("E-grid", count)?;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return err(format!("grid {s:?} needs finite lo <= hi"));
        }
        if count == 0 {
            return err("grid is empty");
        }
        if count == 1 && lo != hi {
            return err(format!("a one-point grid needs lo == hi, got {s:?}"));
        }
        Ok(Grid { lo, hi, count })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", fmt_f64(self.lo), fmt_f64(self.hi), self.count)
    }
}

fn parse_num<T: FromStr>(key: &str, s: &str) -> Result<T, ConfigError> {
    s.trim().parse().map_err(|_| ConfigError(format!("{key}: cannot parse {s:?}")))
}

fn parse_etas(s: &str) -> Result<Vec<f64>, ConfigError> {
    let etas = s.split(',').map(|x| parse_num::<f64>("eta-schedule", x)).collect::<Result<Vec<_>, _>>()?;
    if etas.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return err("eta values must be finite and non-negative");
    }
    Ok(etas)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub k: usize,
    pub onsite: Vec<f64>,
    pub lambda: f64,
    pub ensemble: DisorderEnsemble,
    pub energies: Grid,
    pub eta_schedule: Vec<f64>,
    pub pool: usize,
    pub sweeps: usize,
    pub burn_in: usize,
    pub samples: usize,
    pub depth: usize,
    pub degree: usize,
    pub seed: u64,
    /// Seed of the direct solves in `crosscheck`; differs from `seed` only in self-tests.
    pub ed_seed: u64,
    pub chunks: usize,
    pub workers: Option<usize>,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// Builds and validates a configuration; absent keys take defaults.
    pub fn from_pairs(command: Command, pairs: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        if let Some(bad) = pairs.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return err(format!("unknown key {bad:?}"));
        }
        let get = |key: &str| pairs.get(key).map(|s| s.trim().to_string());

        let k: usize = get("K").map_or(Ok(2), |s| parse_num("K", &s))?;
        let m: Option<usize> = get("m").map(|s| parse_num("m", &s)).transpose()?;
        let onsite = match get("A") {
            Some(spec) => parse_onsite(&spec).map_err(|e| ConfigError(e.to_string()))?,
            None => vec![0.0; m.unwrap_or(1)],
        };
        if let Some(m) = m {
            if m != onsite.len() {
                return err(format!("m = {m} but A has {} entries", onsite.len()));
            }
        }
        let lambda: f64 = get("lambda").map_or(Ok(0.0), |s| parse_num("lambda", &s))?;
        let ensemble = match get("ensemble") {
            Some(spec) => DisorderEnsemble::parse(&spec).map_err(|e| ConfigError(e.to_string()))?,
            None => DisorderEnsemble::Goe,
        };
        let energies: Grid = get("E-grid").unwrap_or_else(|| command.default_grid().into()).parse()?;
        let eta_schedule = parse_etas(&get("eta-schedule").unwrap_or_else(|| command.default_etas().into()))?;
        let pool: usize = get("pool").map_or(Ok(DEFAULT_POOL_SIZE), |s| parse_num("pool", &s))?;
        let default_samples = if command == Command::Crosscheck { 20 } else { pool };
        let cfg = Self {
            command,
            k,
            onsite,
            lambda,
            ensemble,
            energies,
            eta_schedule,
            pool,
            sweeps: get("sweeps").map_or(Ok(1), |s| parse_num("sweeps", &s))?,
            burn_in: get("burnin").map_or(Ok(DEFAULT_BURN_IN), |s| parse_num("burnin", &s))?,
            samples: get("samples").map_or(Ok(default_samples), |s| parse_num("samples", &s))?,
            depth: get("depth").map_or(Ok(4), |s| parse_num("depth", &s))?,
            degree: get("degree").map_or(Ok(2), |s| parse_num("degree", &s))?,
            seed: get("seed").map_or(Ok(0), |s| parse_num("seed", &s))?,
            ed_seed: 0,
            chunks: get("chunks").map_or(Ok(DEFAULT_CHUNKS), |s| parse_num("chunks", &s))?,
            workers: get("workers").map(|s| parse_num("workers", &s)).transpose()?,
            out: PathBuf::from(get("out").unwrap_or_else(|| command.default_out())),
        };
        let ed_seed = get("ed-seed").map_or(Ok(cfg.seed), |s| parse_num("ed-seed", &s))?;
        let cfg = Self { ed_seed, ..cfg };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.model()?;
        if self.pool < 2 {
            return err("pool must hold at least 2 samples");
        }
        if self.sweeps == 0 || self.samples == 0 || self.chunks == 0 {
            return err("sweeps, samples and chunks must be positive");
        }
        if self.workers == Some(0) {
            return err("workers must be positive");
        }
        if self.degree > MAX_DEGREE {
            return err(format!("degree {} exceeds {MAX_DEGREE}", self.degree));
        }
        if self.out.as_os_str().is_empty() {
            return err("empty output path");
        }
        let etas = &self.eta_schedule;
        match self.command {
            Command::DosScan | Command::AcIndicator => {
                if !(etas[0] > 0.0) || etas.windows(2).any(|w| !(w[1] < w[0])) {
                    return err("eta schedule must be strictly decreasing with a positive first entry");
                }
                if self.command == Command::AcIndicator && etas.len() < 3 {
                    return err("ac-indicator needs at least 3 eta levels");
                }
            }
            Command::Crosscheck => {
                if etas.iter().any(|e| !(*e > 0.0)) {
                    return err("crosscheck needs eta > 0");
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.onsite.len()
    }

    pub fn model(&self) -> Result<BetheStripModel, ConfigError> {
        BetheStripModel::new(self.k, self.onsite.clone(), self.lambda, self.ensemble.clone())
            .map_err(|e| ConfigError(e.to_string()))
    }

    /// The model at zero disorder, used by the closed-form commands.
    pub fn free_model(&self) -> Result<BetheStripModel, ConfigError> {
        BetheStripModel::free(self.k, self.onsite.clone()).map_err(|e| ConfigError(e.to_string()))
    }

    /// Every key with its value; [`ExperimentConfig::from_pairs`] inverts this.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let onsite: Vec<String> = self.onsite.iter().map(|&a| fmt_f64(a)).collect();
        let etas: Vec<String> = self.eta_schedule.iter().map(|&e| fmt_f64(e)).collect();
        let mut out = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            out.insert(k.to_string(), v);
        };
        put("K", self.k.to_string());
        put("m", self.m().to_string());
        put("A", format!("diag:{}", onsite.join(",")));
        put("lambda", fmt_f64(self.lambda));
        put("ensemble", self.ensemble.to_string());
        put("E-grid", self.energies.to_string());
        put("eta-schedule", etas.join(","));
        put("pool", self.pool.to_string());
        put("sweeps", self.sweeps.to_string());
        put("burnin", self.burn_in.to_string());
        put("samples", self.samples.to_string());
        put("depth", self.depth.to_string());
        put("degree", self.degree.to_string());
        put("seed", self.seed.to_string());
        put("ed-seed", self.ed_seed.to_string());
        put("chunks", self.chunks.to_string());
        if let Some(w) = self.workers {
            put("workers", w.to_string());
        }
        put("out", self.out.display().to_string());
        out
    }

    /// `key=value` lines in key order.
    pub fn to_config_text(&self) -> String {
        self.to_pairs().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("line {}: expected key=value", n + 1));
        };
        let k = k.trim().trim_start_matches("--");
        if !KEYS.contains(&k) {
            return err(format!("line {}: unknown key {k:?}", n + 1));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}
