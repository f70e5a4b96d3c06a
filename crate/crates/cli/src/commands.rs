//! The six subcommands. Each turns a validated config into in-memory
//! artifacts; writing and the manifest are handled by the caller.

use bethe_strip::ed::crosscheck;
use bethe_strip::recursion::{eta_continuation, EtaEstimate};
use bethe_strip::streams::{derive_seed, Domain};
use bethe_strip::susy::{build_ce_matrix, gap_kce, gap_tensor, lambda_spectrum, verify_modulus};
use bethe_strip::{
    a_e_matrix, free_forward_green, free_full_green, BetheStripModel, Error, PoolParams, SpectralPoint, C64,
};
use serde_json::{json, Value};

use crate::config::{Command, ConfigError, ExperimentConfig};
use crate::output::{cell, opt_cell, sibling, Artifact, Table};

/// Indicator band for the stabilization ratio.
pub const BOUNDED_BAND: (f64, f64) = (0.9, 1.1);
/// Tolerances checked by `ce-spectrum` before it reports success.
pub const TRIANGULARITY_TOL: f64 = 1e-10;
pub const DIAGONAL_TOL: f64 = 1e-8;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Core(Error),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 2,
            RunError::Core(e) if e.is_domain() => 3,
            RunError::Core(Error::ModulusViolation { .. }) => 4,
            RunError::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => e.fmt(f),
            RunError::Core(e) => e.fmt(f),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Core(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    /// The primary output comes first.
    pub artifacts: Vec<Artifact>,
    pub columns: Vec<String>,
    pub warnings: Vec<String>,
    /// `false` when a built-in verification failed (exit 4).
    pub verified: bool,
}

impl Outcome {
    fn table(config: &ExperimentConfig, table: &Table, warnings: Vec<String>) -> Result<Self, RunError> {
        Ok(Self {
            artifacts: vec![Artifact { path: config.out.clone(), bytes: table.to_bytes()? }],
            columns: table.columns.clone(),
            warnings,
            verified: true,
        })
    }
}

pub fn execute(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    match config.command {
        Command::FreeProfile => free_profile(config),
        Command::DosScan => dos_scan(config),
        Command::AcIndicator => ac_indicator(config),
        Command::GapScan => gap_scan(config),
        Command::CeSpectrum => ce_spectrum(config),
        Command::Crosscheck => crosscheck_cmd(config),
    }
}

/// `Ok(None)` for out-of-band points, other errors pass through.
fn defined<T>(r: bethe_strip::Result<T>) -> Result<Option<T>, RunError> {
    match r {
        Ok(x) => Ok(Some(x)),
        Err(Error::OutOfBand { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn complex_cells(z: Option<C64>) -> [String; 2] {
    [opt_cell(z.map(|z| z.re)), opt_cell(z.map(|z| z.im))]
}

fn free_profile(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let m = config.m();
    let mut columns = vec!["E".to_string(), "eta".to_string()];
    for name in ["G0", "Gfull", "AE"] {
        for j in 1..=m {
            columns.push(format!("{name}_re_{j}"));
            columns.push(format!("{name}_im_{j}"));
        }
    }
    let mut table = Table::new(columns);
    // At zero disorder the orbitals decouple, so each one is solved alone and
    // a point outside one band leaves only that orbital's cells empty.
    let orbitals = config
        .onsite
        .iter()
        .map(|&a| BetheStripModel::free(config.k, vec![a]))
        .collect::<bethe_strip::Result<Vec<_>>>()?;
    let mut any_defined = false;
    for energy in config.energies.points() {
        for &eta in &config.eta_schedule {
            let point = SpectralPoint::new(energy, eta)?;
            let mut forward = Vec::with_capacity(m);
            let mut full = Vec::with_capacity(m);
            let mut ae = Vec::with_capacity(m);
            for model in &orbitals {
                forward.push(defined(free_forward_green(point, model))?.map(|g| g.get(0, 0)));
                full.push(defined(free_full_green(point, model))?.map(|g| g.get(0, 0)));
                ae.push(defined(a_e_matrix(energy, model))?.map(|g| g.get(0, 0)));
            }
            any_defined |= forward.iter().chain(&full).chain(&ae).any(Option::is_some);
            let mut row = vec![cell(energy), cell(eta)];
            for z in forward.into_iter().chain(full).chain(ae) {
                row.extend(complex_cells(z));
            }
            table.push(row);
        }
    }
    if !any_defined {
        return Err(Error::OutOfBand { energy: config.energies.lo, orbital: 0 }.into());
    }
    Outcome::table(config, &table, Vec::new())
}

fn pool_params(config: &ExperimentConfig, energy_index: usize) -> PoolParams {
    PoolParams {
        size: config.pool,
        burn_in: config.burn_in,
        sweeps: config.sweeps,
        samples: config.samples,
        chunks: config.chunks,
        seed: derive_seed(config.seed, Domain::EnergyPoint, &[energy_index as u64]),
    }
}

/// One continuation per energy, in grid order.
fn continuations(config: &ExperimentConfig) -> Result<Vec<(f64, Vec<EtaEstimate>)>, RunError> {
    let model = config.model()?;
    config
        .energies
        .points()
        .into_iter()
        .enumerate()
        .map(|(i, energy)| {
            let steps = eta_continuation(&model, energy, &config.eta_schedule, &pool_params(config, i))?;
            Ok((energy, steps))
        })
        .collect()
}

fn dos_scan(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let mut table = Table::new(["E", "eta", "dos", "dos_stderr", "ETrG2", "ETrG2_stderr"]);
    for (energy, steps) in continuations(config)? {
        for s in steps {
            let (dos, g2) = (&s.moments.dos, &s.moments.trace_abs2);
            table.push(vec![
                cell(energy),
                cell(s.eta),
                cell(dos.mean),
                cell(dos.std_error),
                cell(g2.mean),
                cell(g2.std_error),
            ]);
        }
    }
    Outcome::table(config, &table, Vec::new())
}

/// Ratio of the last two levels with its propagated standard error.
pub fn stabilization_ratio(previous: (f64, f64), last: (f64, f64)) -> (f64, f64) {
    let ratio = last.0 / previous.0;
    let rel = ((previous.1 / previous.0).powi(2) + (last.1 / last.0).powi(2)).sqrt();
    (ratio, ratio.abs() * rel)
}

pub fn is_bounded(ratio: f64) -> bool {
    (BOUNDED_BAND.0..=BOUNDED_BAND.1).contains(&ratio)
}

fn ac_indicator(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let mut columns = vec!["E".to_string()];
    for eta in &config.eta_schedule {
        columns.push(format!("ETrG2@{}", cell(*eta)));
        columns.push(format!("ETrG2_stderr@{}", cell(*eta)));
    }
    columns.extend(["ratio", "ratio_stderr", "bounded"].map(String::from));
    let mut table = Table::new(columns);
    let mut points = Vec::new();
    for (energy, steps) in continuations(config)? {
        let levels: Vec<(f64, f64)> =
            steps.iter().map(|s| (s.moments.trace_abs2.mean, s.moments.trace_abs2.std_error)).collect();
        let n = levels.len();
        let (ratio, ratio_se) = stabilization_ratio(levels[n - 2], levels[n - 1]);
        let bounded = is_bounded(ratio);
        let mut row = vec![cell(energy)];
        for (mean, se) in &levels {
            row.push(cell(*mean));
            row.push(cell(*se));
        }
        row.extend([cell(ratio), cell(ratio_se), bounded.to_string()]);
        table.push(row);
        points.push(json!({ "E": energy, "ratio": ratio, "ratio_stderr": ratio_se, "bounded": bounded }));
    }
    let all_bounded = points.iter().all(|p| p["bounded"] == Value::Bool(true));
    let verdict = json!({
        "indicator": "stabilization ratio of E Tr|G|^2 between the last two eta levels",
        "band": [BOUNDED_BAND.0, BOUNDED_BAND.1],
        "eta_schedule": config.eta_schedule,
        "points": points,
        "bounded_everywhere": all_bounded,
        "note": "A numerical indicator only: a finite schedule cannot prove boundedness as eta -> 0, and the disorder threshold for absolutely continuous spectrum is not constructive.",
    });
    let mut outcome = Outcome::table(config, &table, Vec::new())?;
    outcome.artifacts.push(Artifact::json(sibling(&config.out, "verdict.json"), &verdict));
    Ok(outcome)
}

fn skipped_warning(skipped: &[f64]) -> Vec<String> {
    if skipped.is_empty() {
        Vec::new()
    } else {
        vec![format!("{} out-of-band grid points skipped", skipped.len())]
    }
}

fn gap_scan(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let model = config.free_model()?;
    let mut table = Table::new(["E", "gap_kce", "gap_tensor", "min_dist_inverse_k"]);
    let mut skipped = Vec::new();
    for energy in config.energies.points() {
        let Some(kce) = defined(gap_kce(energy, &model, config.degree))? else {
            skipped.push(energy);
            continue;
        };
        let tensor = gap_tensor(energy, &model, config.degree)?;
        let modulus = verify_modulus(energy, &model, config.degree)?;
        table.push(vec![cell(energy), cell(kce), cell(tensor), cell(modulus.min_distance_to_inverse_k)]);
    }
    if table.rows.is_empty() {
        return Err(Error::OutOfBand { energy: config.energies.lo, orbital: 0 }.into());
    }
    Outcome::table(config, &table, skipped_warning(&skipped))
}

fn ce_spectrum(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let model = config.free_model()?;
    let k = config.k as f64;
    let mut table = Table::new([
        "E",
        "J",
        "degree",
        "lambda_re",
        "lambda_im",
        "modulus",
        "k_pow",
        "diag_re",
        "diag_im",
        "triangularity_residual",
    ]);
    let mut skipped = Vec::new();
    let mut warnings = Vec::new();
    let mut verified = true;
    for energy in config.energies.points() {
        let Some(spectrum) = defined(lambda_spectrum(energy, &model, config.degree))? else {
            skipped.push(energy);
            continue;
        };
        let matrix = build_ce_matrix(energy, &model, config.degree)?;
        let diagonal = matrix.diagonal();
        let residual = matrix.triangularity_residual();
        if residual >= TRIANGULARITY_TOL {
            verified = false;
            warnings.push(format!("E = {energy}: triangularity residual {residual:e}"));
        }
        for ((j, lambda), diag) in spectrum.iter().zip(&diagonal) {
            let k_pow = k.powi(-(j.degree() as i32));
            if (lambda.norm() - k_pow).abs() > bethe_strip::susy::MODULUS_TOL || (diag - lambda).norm() > DIAGONAL_TOL
            {
                verified = false;
                warnings.push(format!("E = {energy}, J = {j}: eigenvalue check failed"));
            }
            table.push(vec![
                cell(energy),
                j.to_string(),
                j.degree().to_string(),
                cell(lambda.re),
                cell(lambda.im),
                cell(lambda.norm()),
                cell(k_pow),
                cell(diag.re),
                cell(diag.im),
                cell(residual),
            ]);
        }
    }
    if table.rows.is_empty() {
        return Err(Error::OutOfBand { energy: config.energies.lo, orbital: 0 }.into());
    }
    warnings.extend(skipped_warning(&skipped));
    let mut outcome = Outcome::table(config, &table, warnings)?;
    outcome.verified = verified;
    Ok(outcome)
}

fn crosscheck_cmd(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let model = config.model()?;
    let mut reports = Vec::new();
    let mut passed = true;
    for energy in config.energies.points() {
        for &eta in &config.eta_schedule {
            let point = SpectralPoint::new(energy, eta)?;
            let r = crosscheck(&model, config.depth, point, config.samples, config.seed, config.ed_seed)?;
            passed &= r.passed;
            reports.push(json!({
                "E": energy,
                "eta": eta,
                "K": r.connectivity,
                "m": r.width,
                "depth": r.depth,
                "realizations": r.realizations,
                "max_deviation": r.max_deviation,
                "max_residual": r.max_residual,
                "max_asymmetry": r.max_asymmetry,
                "tolerance": r.tolerance,
                "passed": r.passed,
            }));
        }
    }
    let report = json!({ "passed": passed, "seed": config.seed, "ed_seed": config.ed_seed, "checks": reports });
    Ok(Outcome {
        artifacts: vec![Artifact::json(config.out.clone(), &report)],
        columns: Vec::new(),
        warnings: Vec::new(),
        verified: passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::Config(ConfigError("x".into())).exit_code(), 2);
        assert_eq!(RunError::Core(Error::OutOfBand { energy: 3.0, orbital: 0 }).exit_code(), 3);
        assert_eq!(RunError::Core(Error::SizeOverflow { dim: 1, limit: 0 }).exit_code(), 2);
        assert_eq!(RunError::Core(Error::TruncationOverflow { degree: 9, max: 8 }).exit_code(), 2);
        assert_eq!(RunError::Core(Error::ModulusViolation { index: "1".into(), deviation: 1.0 }).exit_code(), 4);
    }

    #[test]
    fn ratio_and_band() {
        let (r, se) = stabilization_ratio((2.0, 0.02), (2.0, 0.02));
        assert_eq!(r, 1.0);
        assert!((se - 2f64.sqrt() * 0.01).abs() < 1e-15);
        assert!(is_bounded(0.9) && is_bounded(1.1) && !is_bounded(2.5));
    }
}
