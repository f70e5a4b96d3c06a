//! Population dynamics for the stationary law of the forward Green's matrix.

use rand::Rng;
use rayon::prelude::*;

use super::estimate::{
    batch_ranges, batch_statistics, complex_at, matrix_at, push_complex, Batch, ComplexEstimate,
    MatrixEstimate, RealEstimate,
};
use super::resolvent_step;
use crate::error::{Error, Result};
use crate::free::free_forward_green;
use crate::linalg::{min_imag_eigenvalue, HERGLOTZ_TOL, ComplexSymMatrix, RealSymMatrix, SpectralPoint, C64};
use crate::model::BetheStripModel;
use crate::streams::{stream, Domain, Stream};

pub const DEFAULT_POOL_SIZE: usize = 10_000;
pub const DEFAULT_BURN_IN: usize = 100;
pub const DEFAULT_CHUNKS: usize = 64;
/// Number of batches behind every standard error.
pub const BATCHES: usize = 20;
/// The `eta` used when reporting "boundary" values.
pub const BOUNDARY_ETA: f64 = 1e-6;

/// `N` forward Green's matrices at a common spectral point.
///
/// The pool is a value: a sweep returns a new pool. Its contents depend only
/// on `(model, point history, seed, N, sweeps_done, chunks)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationPool {
    samples: Vec<ComplexSymMatrix>,
    point: SpectralPoint,
    sweeps_done: u64,
    seed: u64,
    chunks: usize,
}

impl PopulationPool {
    /// `N` copies of the free forward Green's matrix at `point`.
    pub fn new(point: SpectralPoint, model: &BetheStripModel, size: usize, seed: u64) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidArgument(format!("pool size must be at least 2, got {size}")));
        }
        let g0 = free_forward_green(point, model)?;
        Ok(Self { samples: vec![g0; size], point, sweeps_done: 0, seed, chunks: DEFAULT_CHUNKS })
    }

    pub fn with_chunks(mut self, chunks: usize) -> Result<Self> {
        if chunks == 0 {
            return Err(Error::InvalidArgument("chunk count must be positive".into()));
        }
        self.chunks = chunks;
        Ok(self)
    }

    pub fn samples(&self) -> &[ComplexSymMatrix] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn point(&self) -> SpectralPoint {
        self.point
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweeps_done
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn chunks(&self) -> usize {
        self.chunks
    }

    pub fn dim(&self) -> usize {
        self.samples[0].dim()
    }

    /// The same samples, used as a warm start at another spectral point.
    pub fn retarget(&self, point: SpectralPoint) -> Self {
        Self { point, ..self.clone() }
    }

    /// A warm start at another spectral point: every sample is moved by the
    /// change of the free forward Green's matrix, unless that would break
    /// `Im g >= 0`. At zero disorder this lands exactly on the new fixed point.
    pub fn warm_start(&self, point: SpectralPoint, model: &BetheStripModel) -> Self {
        let shift = match (free_forward_green(self.point, model), free_forward_green(point, model)) {
            (Ok(old), Ok(new)) => &new - &old,
            _ => return self.retarget(point),
        };
        let samples = self
            .samples
            .iter()
            .map(|g| {
                let moved = g + &shift;
                if moved.as_matrix().is_finite() && min_imag_eigenvalue(&moved) >= -HERGLOTZ_TOL {
                    moved
                } else {
                    g.clone()
                }
            })
            .collect();
        Self { samples, point, ..self.clone() }
    }

    /// Smallest eigenvalue of `Im g` over the pool.
    pub fn min_imag_eigenvalue(&self) -> f64 {
        self.samples.iter().map(min_imag_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    /// Largest max-norm distance of any sample from `target`.
    pub fn max_deviation(&self, target: &ComplexSymMatrix) -> f64 {
        self.samples.iter().map(|g| g.distance(target)).fold(0.0, f64::max)
    }

    /// Pool mean of `Im Tr g`.
    pub fn mean_imag_trace(&self) -> f64 {
        self.samples.iter().map(|g| g.trace().im).sum::<f64>() / self.len() as f64
    }

    fn pick<'a>(&'a self, rng: &mut Stream) -> &'a ComplexSymMatrix {
        &self.samples[rng.random_range(0..self.samples.len())]
    }

    /// A fresh potential and `count` uniform picks, pushed through the resolvent step.
    fn draw_step(&self, model: &BetheStripModel, count: usize, rng: &mut Stream) -> Result<ComplexSymMatrix> {
        let v = model.sample_potential(rng);
        let picks: Vec<&ComplexSymMatrix> = (0..count).map(|_| self.pick(rng)).collect();
        resolvent_step(self.point, model, &v, picks)
    }

    /// One generation of population dynamics.
    pub fn sweep(&self, model: &BetheStripModel) -> Result<Self> {
        let n = self.len();
        let chunk_len = n.div_ceil(self.chunks);
        let mut next = vec![ComplexSymMatrix::zeros(self.dim()); n];
        next.par_chunks_mut(chunk_len).enumerate().try_for_each(|(c, slots)| {
            let mut rng = stream(self.seed, Domain::PoolSweep, &[self.sweeps_done, c as u64]);
            for slot in slots {
                *slot = self.draw_step(model, model.k(), &mut rng)?;
            }
            Ok::<_, Error>(())
        })?;
        Ok(Self { samples: next, sweeps_done: self.sweeps_done + 1, ..self.clone() })
    }

    pub fn sweep_n(&self, model: &BetheStripModel, sweeps: usize) -> Result<Self> {
        let mut pool = self.clone();
        for _ in 0..sweeps {
            pool = pool.sweep(model)?;
        }
        Ok(pool)
    }

    /// Per-batch sums of root features, for `samples` fresh root draws.
    fn root_batches(&self, model: &BetheStripModel, samples: usize) -> Result<Vec<Batch>> {
        let m = self.dim();
        let features = 4 * m * m + 2;
        batch_ranges(samples, BATCHES)
            .into_par_iter()
            .enumerate()
            .map(|(b, range)| {
                let mut rng = stream(self.seed, Domain::RootEstimate, &[self.sweeps_done, b as u64]);
                let mut batch = Batch::new(features);
                let mut row = Vec::with_capacity(features);
                for _ in range {
                    let g = self.draw_step(model, model.k() + 1, &mut rng)?;
                    let abs2 = g.abs_square();
                    row.clear();
                    g.as_matrix().as_slice().iter().for_each(|&v| push_complex(&mut row, v));
                    abs2.as_slice().iter().for_each(|&v| push_complex(&mut row, v));
                    row.push(abs2.trace().re);
                    row.push(g.trace().im);
                    batch.push(&row);
                }
                Ok(batch)
            })
            .collect()
    }
}

/// Root-level estimates from one pool.
#[derive(Debug, Clone, PartialEq)]
pub struct RootMoments {
    pub green: MatrixEstimate,
    pub green_abs2: MatrixEstimate,
    pub trace_abs2: RealEstimate,
    /// `(1 / (m pi)) Im E Tr G`.
    pub dos: RealEstimate,
}

impl RootMoments {
    fn from_batches(batches: &[Batch], m: usize) -> Self {
        let (mean, se, count) = batch_statistics(batches);
        let off = 2 * m * m;
        let scale = 1.0 / (m as f64 * std::f64::consts::PI);
        Self {
            green: matrix_at(&mean, &se, 0, m, count),
            green_abs2: matrix_at(&mean, &se, off, m, count),
            trace_abs2: RealEstimate { mean: mean[2 * off], std_error: se[2 * off], count },
            dos: RealEstimate { mean: scale * mean[2 * off + 1], std_error: scale * se[2 * off + 1], count },
        }
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    Ok(())
}

/// `S` root draws (fresh `V`, `K + 1` pool picks each).
pub fn root_moments(pool: &PopulationPool, model: &BetheStripModel, samples: usize) -> Result<RootMoments> {
    check_samples(samples)?;
    Ok(RootMoments::from_batches(&pool.root_batches(model, samples)?, pool.dim()))
}

pub fn population_init(
    point: SpectralPoint,
    model: &BetheStripModel,
    size: usize,
    seed: u64,
) -> Result<PopulationPool> {
    PopulationPool::new(point, model, size, seed)
}

pub fn population_sweep(pool: &PopulationPool, model: &BetheStripModel) -> Result<PopulationPool> {
    pool.sweep(model)
}

/// Estimates of `E G` and `E conj(G) G` at the root.
pub fn estimate_green_moments(
    pool: &PopulationPool,
    model: &BetheStripModel,
    samples: usize,
) -> Result<(MatrixEstimate, MatrixEstimate)> {
    let r = root_moments(pool, model, samples)?;
    Ok((r.green, r.green_abs2))
}

/// Density of states per orbital.
pub fn dos_density(pool: &PopulationPool, model: &BetheStripModel, samples: usize) -> Result<RealEstimate> {
    Ok(root_moments(pool, model, samples)?.dos)
}

fn pool_mean(pool: &PopulationPool, f: impl Fn(&ComplexSymMatrix) -> C64 + Sync) -> ComplexEstimate {
    let batches: Vec<Batch> = batch_ranges(pool.len(), BATCHES)
        .into_iter()
        .map(|range| {
            let mut b = Batch::new(2);
            for g in &pool.samples[range] {
                let v = f(g);
                b.push(&[v.re, v.im]);
            }
            b
        })
        .collect();
    let (mean, se, count) = batch_statistics(&batches);
    complex_at(&mean, &se, 0, count)
}

fn gaussian_weight(g: &ComplexSymMatrix, m: &RealSymMatrix) -> C64 {
    (C64::new(0.0, 0.25) * g.trace_product(m)).exp()
}

fn check_test_matrix(pool: &PopulationPool, m: &RealSymMatrix) -> Result<()> {
    if m.dim() != pool.dim() {
        return Err(Error::InvalidArgument(format!(
            "test matrix has dimension {}, pool has {}",
            m.dim(),
            pool.dim()
        )));
    }
    if !m.is_psd() {
        return Err(Error::InvalidArgument("test matrix must be positive semidefinite".into()));
    }
    Ok(())
}

/// Pool mean of `exp((i/4) Tr(g M))`.
pub fn zeta_estimate(pool: &PopulationPool, m: &RealSymMatrix) -> Result<ComplexEstimate> {
    check_test_matrix(pool, m)?;
    Ok(pool_mean(pool, |g| gaussian_weight(g, m)))
}

/// Pool mean of `exp((i/4)(Tr(g M+) - Tr(conj(g) M-)))`.
pub fn xi_estimate(pool: &PopulationPool, mp: &RealSymMatrix, mm: &RealSymMatrix) -> Result<ComplexEstimate> {
    check_test_matrix(pool, mp)?;
    check_test_matrix(pool, mm)?;
    Ok(pool_mean(pool, |g| {
        (C64::new(0.0, 0.25) * (g.trace_product(mp) - g.conj().trace_product(mm))).exp()
    }))
}

/// One test matrix of a residual report.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEntry {
    pub pool: ComplexEstimate,
    pub pushed: ComplexEstimate,
    pub difference: f64,
    pub combined_std_error: f64,
}

impl ResidualEntry {
    /// `difference / combined_std_error`; zero when both vanish.
    pub fn sigma_ratio(&self) -> f64 {
        if self.difference == 0.0 {
            0.0
        } else if self.combined_std_error == 0.0 {
            f64::INFINITY
        } else {
            self.difference / self.combined_std_error
        }
    }
}

/// Weak stationarity check of a pool.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn max_difference(&self) -> f64 {
        self.entries.iter().map(|e| e.difference).fold(0.0, f64::max)
    }

    pub fn max_sigma_ratio(&self) -> f64 {
        self.entries.iter().map(ResidualEntry::sigma_ratio).fold(0.0, f64::max)
    }

    /// Every difference is below `sigmas` combined standard errors, or below `floor`.
    pub fn within(&self, sigmas: f64, floor: f64) -> bool {
        self.entries
            .iter()
            .all(|e| e.difference <= floor || e.difference < sigmas * e.combined_std_error)
    }
}

/// Compares `zeta` over the pool with `zeta` over one more recursion step.
pub fn fixed_point_residual(
    pool: &PopulationPool,
    model: &BetheStripModel,
    tests: &[RealSymMatrix],
    samples: usize,
) -> Result<ResidualReport> {
    check_samples(samples)?;
    for t in tests {
        check_test_matrix(pool, t)?;
    }
    let batches: Vec<Batch> = batch_ranges(samples, BATCHES)
        .into_par_iter()
        .enumerate()
        .map(|(b, range)| {
            let mut rng = stream(pool.seed, Domain::FreshStep, &[pool.sweeps_done, b as u64]);
            let mut batch = Batch::new(2 * tests.len());
            let mut row = Vec::with_capacity(2 * tests.len());
            for _ in range {
                let g = pool.draw_step(model, model.k(), &mut rng)?;
                row.clear();
                tests.iter().for_each(|t| push_complex(&mut row, gaussian_weight(&g, t)));
                batch.push(&row);
            }
            Ok(batch)
        })
        .collect::<Result<_>>()?;
    let (mean, se, count) = batch_statistics(&batches);
    let entries = tests
        .iter()
        .enumerate()
        .map(|(t, m)| {
            let on_pool = pool_mean(pool, |g| gaussian_weight(g, m));
            let pushed = complex_at(&mean, &se, 2 * t, count);
            ResidualEntry {
                difference: (on_pool.mean - pushed.mean).norm(),
                combined_std_error: on_pool.std_error.hypot(pushed.std_error),
                pool: on_pool,
                pushed,
            }
        })
        .collect();
    Ok(ResidualReport { entries })
}

/// [`fixed_point_residual`] averaged over `generations` consecutive sweeps,
/// starting with `pool` itself. Returns the last pool and the report.
///
/// Successive pools are correlated; at small `eta` the degree-one mode
/// nearly flips sign every generation. Standard errors therefore come from
/// batch means over the generation series, and the combined error is that of
/// the per-generation difference itself.
pub fn averaged_fixed_point_residual(
    pool: &PopulationPool,
    model: &BetheStripModel,
    tests: &[RealSymMatrix],
    samples: usize,
    generations: usize,
) -> Result<(PopulationPool, ResidualReport)> {
    if generations < 2 {
        return Err(Error::InvalidArgument("averaging needs at least 2 generations".into()));
    }
    let mut pool = pool.clone();
    let mut rows = Vec::with_capacity(generations);
    for gen in 0..generations {
        if gen > 0 {
            pool = pool.sweep(model)?;
        }
        let report = fixed_point_residual(&pool, model, tests, samples)?;
        let mut row = Vec::with_capacity(6 * tests.len());
        for e in &report.entries {
            push_complex(&mut row, e.pool.mean);
            push_complex(&mut row, e.pushed.mean);
            push_complex(&mut row, e.pool.mean - e.pushed.mean);
        }
        rows.push(row);
    }
    let batches: Vec<Batch> = batch_ranges(generations, BATCHES)
        .into_iter()
        .map(|range| {
            let mut b = Batch::new(6 * tests.len());
            rows[range].iter().for_each(|r| b.push(r));
            b
        })
        .collect();
    let (mean, se, count) = batch_statistics(&batches);
    let entries = (0..tests.len())
        .map(|t| {
            let diff = complex_at(&mean, &se, 6 * t + 4, count);
            ResidualEntry {
                pool: complex_at(&mean, &se, 6 * t, count),
                pushed: complex_at(&mean, &se, 6 * t + 2, count),
                difference: diff.mean.norm(),
                combined_std_error: diff.std_error,
            }
        })
        .collect();
    Ok((pool, ResidualReport { entries }))
}

/// Population parameters shared by every step of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolParams {
    pub size: usize,
    /// Sweeps run at each spectral point before measuring.
    pub burn_in: usize,
    /// Measurement generations; root samples are spread over them.
    pub sweeps: usize,
    /// Root samples per spectral point.
    pub samples: usize,
    pub chunks: usize,
    pub seed: u64,
}

impl Default for PoolParams {
    fn default() -> Self {
        Self {
            size: DEFAULT_POOL_SIZE,
            burn_in: DEFAULT_BURN_IN,
            sweeps: 1,
            samples: DEFAULT_POOL_SIZE,
            chunks: DEFAULT_CHUNKS,
            seed: 0,
        }
    }
}

impl PoolParams {
    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::InvalidArgument("pool size must be at least 2".into()));
        }
        if self.sweeps == 0 || self.samples == 0 || self.chunks == 0 {
            return Err(Error::InvalidArgument("sweeps, samples and chunks must be positive".into()));
        }
        Ok(())
    }

    /// Burns `pool` in, then measures over `sweeps` generations.
    /// Returns the last pool and the pooled root estimates.
    pub fn measure(&self, pool: PopulationPool, model: &BetheStripModel) -> Result<(PopulationPool, RootMoments)> {
        let mut pool = pool.sweep_n(model, self.burn_in)?;
        let per_sweep = self.samples.div_ceil(self.sweeps).max(1);
        let mut merged: Vec<Batch> = Vec::new();
        for gen in 0..self.sweeps {
            if gen > 0 {
                pool = pool.sweep(model)?;
            }
            let batches = pool.root_batches(model, per_sweep)?;
            if merged.is_empty() {
                merged = batches;
            } else {
                for (acc, b) in merged.iter_mut().zip(batches) {
                    acc.count += b.count;
                    acc.sums.iter_mut().zip(&b.sums).for_each(|(s, x)| *s += x);
                }
            }
        }
        let m = pool.dim();
        Ok((pool, RootMoments::from_batches(&merged, m)))
    }
}

/// Estimates at one step of a continuation.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaEstimate {
    pub eta: f64,
    pub moments: RootMoments,
    pub min_imag: f64,
}

/// Runs population dynamics down a decreasing `eta` schedule at fixed energy,
/// warm-starting each step from the previous pool.
///
/// The schedule must be strictly decreasing. Its last entry may be `0`,
/// which is only reached from a warm pool.
pub fn eta_continuation(
    model: &BetheStripModel,
    energy: f64,
    schedule: &[f64],
    params: &PoolParams,
) -> Result<Vec<EtaEstimate>> {
    params.validate()?;
    let Some(&first) = schedule.first() else {
        return Err(Error::InvalidArgument("eta schedule is empty".into()));
    };
    if !(first > 0.0) {
        return Err(Error::InvalidArgument("the first eta must be positive".into()));
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) || schedule.iter().any(|e| !(*e >= 0.0)) {
        return Err(Error::InvalidArgument("eta schedule must be strictly decreasing and non-negative".into()));
    }
    let mut pool = PopulationPool::new(SpectralPoint::new(energy, first)?, model, params.size, params.seed)?
        .with_chunks(params.chunks)?;
    let mut out = Vec::with_capacity(schedule.len());
    for &eta in schedule {
        let point = SpectralPoint::new(energy, eta)?;
        let (next, moments) = params.measure(pool.warm_start(point, model), model)?;
        out.push(EtaEstimate { eta, moments, min_imag: next.min_imag_eigenvalue() });
        pool = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free::{free_full_green, xi_free, zeta_free};
    use crate::model::DisorderEnsemble;

    fn pt(e: f64, eta: f64) -> SpectralPoint {
        SpectralPoint::new(e, eta).unwrap()
    }

    fn free1() -> BetheStripModel {
        BetheStripModel::free(2, vec![0.0]).unwrap()
    }

    fn point_mass(lambda: f64) -> BetheStripModel {
        let v = RealSymMatrix::from_diagonal(&[1.0]);
        BetheStripModel::new(2, vec![0.0], lambda, DisorderEnsemble::PointMass(v)).unwrap()
    }

    #[test]
    fn init_examples() {
        let pool = population_init(pt(0.0, 1.0), &free1(), 3, 0).unwrap();
        assert_eq!(pool.len(), 3);
        for g in pool.samples() {
            assert!((g.get(0, 0) - C64::new(0.0, 3f64.sqrt() - 1.0)).norm() < 1e-15);
        }
        assert!(population_init(pt(0.0, 1.0), &free1(), 1, 0).is_err());
    }

    #[test]
    fn free_pool_is_stationary() {
        let model = BetheStripModel::free(2, vec![-0.5, 0.5]).unwrap();
        let pool = population_init(pt(0.2, 0.05), &model, 50, 1).unwrap();
        let swept = pool.sweep_n(&model, 5).unwrap();
        assert!(swept.max_deviation(&pool.samples()[0]) < 1e-12);
        assert_eq!(swept.sweeps_done(), 5);
    }

    #[test]
    fn point_mass_pool_collapses() {
        let model = point_mass(1.0);
        let pool = population_init(pt(0.0, 1.0), &model, 20, 3).unwrap().sweep_n(&model, 100).unwrap();
        // the scalar fixed point of (K/4) g^2 + (z - 1) g + 1 = 0 with Im g > 0
        let z = C64::new(0.0, 1.0);
        let b = z - 1.0;
        let disc = (b * b - 2.0).sqrt();
        let g = [-b + disc, -b - disc].into_iter().find(|r| r.im > 0.0).unwrap();
        let expected = ComplexSymMatrix::from_diagonal(&[g]);
        assert!(pool.max_deviation(&expected) < 1e-10, "{:?}", pool.samples()[0]);
    }

    #[test]
    fn sweeps_do_not_depend_on_thread_count() {
        let model = BetheStripModel::new(2, vec![-0.5, 0.5], 0.4, DisorderEnsemble::Goe).unwrap();
        let pool = population_init(pt(0.2, 0.05), &model, 300, 11).unwrap().with_chunks(7).unwrap();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| pool.sweep_n(&model, 3).unwrap())
        };
        assert_eq!(run(1), run(3));
        let other = population_init(pt(0.2, 0.05), &model, 300, 12).unwrap().with_chunks(7).unwrap();
        assert_ne!(run(1), other.sweep_n(&model, 3).unwrap());
    }

    #[test]
    fn free_estimates_are_exact() {
        let model = BetheStripModel::free(2, vec![-0.5, 0.5]).unwrap();
        let p = pt(0.3, 0.1);
        let pool = population_init(p, &model, 10, 0).unwrap();
        let (g, g2) = estimate_green_moments(&pool, &model, 40).unwrap();
        let full = free_full_green(p, &model).unwrap();
        assert!((&g.mean - full.as_matrix()).max_abs() < 1e-14);
        assert!(g.max_std_error() < 1e-14);
        assert!((&g2.mean - &full.abs_square()).max_abs() < 1e-14);
        assert!(g2.mean.get(0, 1).norm() < 1e-15);

        let m = RealSymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 2.0]]).unwrap();
        let z = zeta_estimate(&pool, &m).unwrap();
        let fwd_model = &model;
        assert!((z.mean - zeta_free(p, fwd_model, &m).unwrap()).norm() < 1e-14);
        let mm = RealSymMatrix::identity(2);
        let xi = xi_estimate(&pool, &m, &mm).unwrap();
        assert!((xi.mean - xi_free(p, &model, &m, &mm).unwrap()).norm() < 1e-14);
        let report = fixed_point_residual(&pool, &model, &[m, mm], 30).unwrap();
        assert!(report.max_difference() < 1e-12);
    }

    #[test]
    fn averaged_residual() {
        let model = BetheStripModel::free(2, vec![-0.5, 0.5]).unwrap();
        let pool = population_init(pt(0.3, 0.1), &model, 10, 0).unwrap();
        let tests = [RealSymMatrix::identity(2)];
        let (last, report) = averaged_fixed_point_residual(&pool, &model, &tests, 20, 5).unwrap();
        assert_eq!(last.sweeps_done(), 4);
        assert!(report.max_difference() < 1e-12);
        assert!(averaged_fixed_point_residual(&pool, &model, &tests, 20, 1).is_err());

        // the averaged difference is the mean of the per-generation differences
        let goe = BetheStripModel::new(2, vec![0.0], 0.5, DisorderEnsemble::Goe).unwrap();
        let pool = population_init(pt(0.0, 0.2), &goe, 200, 9).unwrap().sweep_n(&goe, 20).unwrap();
        let m = RealSymMatrix::from_diagonal(&[0.7]);
        let (_, report) = averaged_fixed_point_residual(&pool, &goe, &[m.clone()], 200, 3).unwrap();
        let mut acc = C64::new(0.0, 0.0);
        let mut p = pool.clone();
        for gen in 0..3 {
            if gen > 0 {
                p = p.sweep(&goe).unwrap();
            }
            let e = &fixed_point_residual(&p, &goe, &[m.clone()], 200).unwrap().entries[0];
            acc += e.pool.mean - e.pushed.mean;
        }
        assert!((report.entries[0].difference - (acc / 3.0).norm()).abs() < 1e-14);
        assert!(report.entries[0].combined_std_error > 0.0);
    }

    #[test]
    fn dos_examples() {
        let p = pt(0.0, 1e-6);
        let pool = population_init(p, &free1(), 4, 0).unwrap();
        let d = dos_density(&pool, &free1(), 20).unwrap();
        assert!((d.mean - 4.0 / (3.0 * 2f64.sqrt()) / std::f64::consts::PI).abs() < 1e-5);

        let model = BetheStripModel::free(2, vec![-0.5, 0.5]).unwrap();
        let p = pt(0.7, 0.01);
        let pool = population_init(p, &model, 4, 0).unwrap();
        let d2 = dos_density(&pool, &model, 10).unwrap().mean;
        let single = |a: f64| {
            let m = BetheStripModel::free(2, vec![a]).unwrap();
            free_full_green(p, &m).unwrap().trace().im / std::f64::consts::PI
        };
        assert!((d2 - 0.5 * (single(-0.5) + single(0.5))).abs() < 1e-12);
    }

    #[test]
    fn zeta_reductions() {
        let model = BetheStripModel::new(2, vec![0.0], 0.8, DisorderEnsemble::Goe).unwrap();
        let pool = population_init(pt(0.1, 0.1), &model, 200, 5).unwrap().sweep_n(&model, 10).unwrap();
        let zero = RealSymMatrix::zeros(1);
        let one = zeta_estimate(&pool, &zero).unwrap();
        assert_eq!(one.mean, C64::new(1.0, 0.0));
        assert_eq!(one.std_error, 0.0);
        let m = RealSymMatrix::from_diagonal(&[2.0]);
        let z = zeta_estimate(&pool, &m).unwrap();
        assert!(z.mean.norm() <= 1.0 + 3.0 * z.std_error);
        let xi = xi_estimate(&pool, &m, &zero).unwrap();
        assert_eq!(xi.mean, z.mean);
        let bad = RealSymMatrix::from_diagonal(&[-1.0]);
        assert!(zeta_estimate(&pool, &bad).is_err());
    }

    #[test]
    fn continuation_free_tracks_closed_form() {
        let model = BetheStripModel::free(2, vec![-0.5, 0.5]).unwrap();
        let params = PoolParams { size: 8, burn_in: 2, sweeps: 2, samples: 40, chunks: 3, seed: 1 };
        let out = eta_continuation(&model, 0.1, &[1.0, 0.1, 0.01, 0.0], &params).unwrap();
        assert_eq!(out.len(), 4);
        for step in &out {
            let full = free_full_green(pt(0.1, step.eta), &model).unwrap();
            assert!((&step.moments.green.mean - full.as_matrix()).max_abs() < 1e-10);
        }
    }

    #[test]
    fn continuation_rejects_bad_schedules() {
        let model = free1();
        let params = PoolParams { size: 4, burn_in: 0, samples: 4, ..PoolParams::default() };
        for bad in [&[][..], &[0.0][..], &[0.1, 0.1][..], &[0.1, 0.2][..], &[0.1, -0.1][..]] {
            assert!(eta_continuation(&model, 0.0, bad, &params).is_err(), "{bad:?}");
        }
    }
}
