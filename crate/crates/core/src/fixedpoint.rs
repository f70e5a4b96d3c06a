//! Deterministic self-consistency `G = [A + lambda V0 - z - (K/4) G]^{-1}`.
//!
//! For point-mass disorder (and at `lambda = 0`) every forward Green's matrix
//! equals the same `G`, so the recursion collapses to this matrix equation.

use crate::error::{Error, Result};
use crate::free::free_forward_green;
use crate::linalg::{lu_solve, min_imag_eigenvalue, CMatrix, ComplexSymMatrix, RealSymMatrix, SpectralPoint, C64};
use crate::model::{BetheStripModel, DisorderEnsemble};
use crate::recursion::resolvent_step;

pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_DAMPING: f64 = 0.5;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const NEWTON_MAX_ITER: usize = 50;
/// Residual below which the hybrid solver hands over to Newton.
pub const NEWTON_SWITCH: f64 = 1e-3;
pub const DEFAULT_ETA_FACTOR: f64 = 0.5;
pub const DEFAULT_ETA_MIN: f64 = 1e-8;
/// Tolerated negative part of `Im G` along a continuation.
pub const BRANCH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointProblem {
    model: BetheStripModel,
    point: SpectralPoint,
    potential: RealSymMatrix,
    initial: ComplexSymMatrix,
}

impl FixedPointProblem {
    /// Starts from the zero matrix. Needs point-mass disorder or `lambda = 0`.
    pub fn new(model: &BetheStripModel, point: SpectralPoint) -> Result<Self> {
        let potential = match model.ensemble() {
            DisorderEnsemble::PointMass(v) => v.clone(),
            _ if model.lambda() == 0.0 => RealSymMatrix::zeros(model.m()),
            _ => {
                return Err(Error::UnsupportedEnsemble(
                    "the deterministic fixed point needs point-mass disorder or lambda = 0",
                ))
            }
        };
        Ok(Self { model: model.clone(), point, potential, initial: ComplexSymMatrix::zeros(model.m()) })
    }

    pub fn with_initial(mut self, initial: ComplexSymMatrix) -> Result<Self> {
        if initial.dim() != self.model.m() {
            return Err(Error::InvalidArgument("initial guess has the wrong dimension".into()));
        }
        self.initial = initial;
        Ok(self)
    }

    pub fn model(&self) -> &BetheStripModel {
        &self.model
    }

    pub fn point(&self) -> SpectralPoint {
        self.point
    }

    pub fn initial(&self) -> &ComplexSymMatrix {
        &self.initial
    }

    /// `[A + lambda V0 - z - (K/4) G]^{-1}`.
    pub fn map(&self, g: &ComplexSymMatrix) -> Result<ComplexSymMatrix> {
        resolvent_step(self.point, &self.model, &self.potential, std::iter::repeat_n(g, self.model.k()))
    }

    /// `G - map(G)`.
    pub fn residual_matrix(&self, g: &ComplexSymMatrix) -> Result<ComplexSymMatrix> {
        Ok(g - &self.map(g)?)
    }

    /// Max-norm of `G - map(G)`.
    pub fn residual(&self, g: &ComplexSymMatrix) -> Result<f64> {
        Ok(self.residual_matrix(g)?.max_abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Picard,
    Newton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: ComplexSymMatrix,
    pub residual: f64,
    pub iterations: usize,
    pub method: SolveMethod,
    pub converged: bool,
    pub eta: f64,
    /// Residual after each iteration, starting with the initial guess.
    pub history: Vec<f64>,
}

impl SolveReport {
    pub fn min_imag(&self) -> f64 {
        min_imag_eigenvalue(&self.solution)
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Damped iteration `G <- (1 - theta) G + theta map(G)`.
pub fn picard_solve(problem: &FixedPointProblem, damping: f64, tol: f64, max_iter: usize) -> Result<SolveReport> {
    check_tol(tol)?;
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::InvalidArgument(format!("damping must lie in (0, 1], got {damping}")));
    }
    let mut g = problem.initial.clone();
    let mut history = Vec::new();
    for it in 0..=max_iter {
        let mapped = problem.map(&g)?;
        let residual = (&g - &mapped).max_abs();
        history.push(residual);
        if residual <= tol {
            return Ok(SolveReport {
                solution: g,
                residual,
                iterations: it,
                method: SolveMethod::Picard,
                converged: true,
                eta: problem.point.eta,
                history,
            });
        }
        if it == max_iter {
            return Err(Error::NoConvergence { iterations: max_iter, residual });
        }
        g = &g.scale(C64::new(1.0 - damping, 0.0)) + &mapped.scale(C64::new(damping, 0.0));
    }
    unreachable!()
}

/// Upper-triangle coordinates `(j, k)` with `j <= k`, row by row.
pub fn upper_slots(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|j| (j..m).map(move |k| (j, k))).collect()
}

fn to_coords(g: &ComplexSymMatrix, slots: &[(usize, usize)]) -> Vec<C64> {
    slots.iter().map(|&(j, k)| g.get(j, k)).collect()
}

fn from_coords(m: usize, slots: &[(usize, usize)], x: &[C64]) -> ComplexSymMatrix {
    let mut lookup = vec![C64::new(0.0, 0.0); m * m];
    for (&(j, k), &v) in slots.iter().zip(x) {
        lookup[j * m + k] = v;
    }
    ComplexSymMatrix::from_upper(m, |j, k| lookup[j * m + k])
}

/// Jacobian of `R(G) = G - map(G)` in upper-triangle coordinates.
///
/// With `F = map(G)`, the derivative along the symmetric unit direction `E`
/// is `E - (K/4) F E F`.
pub fn residual_jacobian(problem: &FixedPointProblem, g: &ComplexSymMatrix) -> Result<CMatrix> {
    let f = problem.map(g)?.into_matrix();
    let m = g.dim();
    let slots = upper_slots(m);
    let p = slots.len();
    let quarter_k = C64::new(problem.model.k() as f64 / 4.0, 0.0);
    let mut jac = CMatrix::zeros(p);
    for (col, &(a, b)) in slots.iter().enumerate() {
        let e = ComplexSymMatrix::from_upper(m, |j, k| {
            if (j, k) == (a, b) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let fef = f.matmul(e.as_matrix()).matmul(&f);
        for (row, &(j, k)) in slots.iter().enumerate() {
            jac.set(row, col, e.get(j, k) - quarter_k * fef.get(j, k));
        }
    }
    Ok(jac)
}

/// Newton's method on `R(G) = 0`, from the problem's initial guess.
pub fn newton_solve(problem: &FixedPointProblem, tol: f64, max_iter: usize) -> Result<SolveReport> {
    check_tol(tol)?;
    let m = problem.model.m();
    let slots = upper_slots(m);
    let mut g = problem.initial.clone();
    let mut history = Vec::new();
    for it in 0..=max_iter {
        let r = problem.residual_matrix(&g)?;
        let residual = r.max_abs();
        history.push(residual);
        if residual <= tol {
            return Ok(SolveReport {
                solution: g,
                residual,
                iterations: it,
                method: SolveMethod::Newton,
                converged: true,
                eta: problem.point.eta,
                history,
            });
        }
        if it == max_iter || !residual.is_finite() {
            return Err(Error::NoConvergence { iterations: it, residual });
        }
        let jac = residual_jacobian(problem, &g)?;
        let rhs: Vec<C64> = to_coords(&r, &slots).into_iter().map(|v| -v).collect();
        let step = lu_solve(&jac, &rhs).map_err(|_| Error::SingularJacobian { residual })?;
        g = &g + &from_coords(m, &slots, &step);
    }
    unreachable!()
}

/// Damped iteration until the residual drops below [`NEWTON_SWITCH`], then Newton.
pub fn hybrid_solve(problem: &FixedPointProblem, tol: f64) -> Result<SolveReport> {
    let switch = NEWTON_SWITCH.max(tol);
    let coarse = picard_solve(problem, DEFAULT_DAMPING, switch, DEFAULT_MAX_ITER)?;
    let fine = newton_solve(&problem.clone().with_initial(coarse.solution)?, tol, NEWTON_MAX_ITER)?;
    let mut history = coarse.history;
    history.extend_from_slice(&fine.history[1..]);
    Ok(SolveReport { iterations: coarse.iterations + fine.iterations, history, ..fine })
}

/// Geometric schedule `eta_start * factor^k` while it stays at or above `eta_min`.
pub fn eta_schedule(eta_start: f64, eta_factor: f64, eta_min: f64) -> Result<Vec<f64>> {
    if !(eta_factor > 0.0 && eta_factor < 1.0) {
        return Err(Error::InvalidArgument(format!("eta factor must lie in (0, 1), got {eta_factor}")));
    }
    if !(eta_min > 0.0 && eta_start >= eta_min && eta_start.is_finite()) {
        return Err(Error::InvalidArgument("need eta_start >= eta_min > 0".into()));
    }
    let mut out = Vec::new();
    let mut eta = eta_start;
    while eta >= eta_min * (1.0 - 1e-12) {
        out.push(eta);
        eta *= eta_factor;
    }
    Ok(out)
}

/// Follows the Herglotz branch from `eta_start` down to `eta_min`, then solves at `eta = 0`.
///
/// The first point is solved with [`hybrid_solve`] from the free forward
/// matrix; every later point runs Newton from the previous solution. The run
/// stops with `ContinuationBreakdown` at the first `eta` where Newton fails,
/// `Im G` acquires a negative eigenvalue, or (at `eta = 0`) `Im Tr G` vanishes.
pub fn continuation_to_boundary(
    model: &BetheStripModel,
    energy: f64,
    eta_start: f64,
    eta_factor: f64,
    eta_min: f64,
) -> Result<Vec<SolveReport>> {
    let mut etas = eta_schedule(eta_start, eta_factor, eta_min)?;
    etas.push(0.0);
    let mut reports: Vec<SolveReport> = Vec::with_capacity(etas.len());
    for (step, &eta) in etas.iter().enumerate() {
        let point = SpectralPoint::new(energy, eta)?;
        let problem = FixedPointProblem::new(model, point)?;
        let solved = if step == 0 {
            let start = free_forward_green(point, model)?;
            hybrid_solve(&problem.with_initial(start)?, DEFAULT_TOL)
        } else {
            let warm = reports[step - 1].solution.clone();
            newton_solve(&problem.with_initial(warm)?, DEFAULT_TOL, NEWTON_MAX_ITER)
        };
        let report = match solved {
            Ok(r) => r,
            Err(e) if e.is_domain() => return Err(Error::ContinuationBreakdown { eta }),
            Err(e) => return Err(e),
        };
        let lost_branch = report.min_imag() < -BRANCH_TOL || (eta == 0.0 && report.solution.trace().im <= BRANCH_TOL);
        if lost_branch {
            return Err(Error::ContinuationBreakdown { eta });
        }
        reports.push(report);
    }
    Ok(reports)
}
