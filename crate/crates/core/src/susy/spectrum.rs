use super::index::{enumerate_indices, MonomialIndex};
use crate::error::{Error, Result};
use crate::free::a_e_matrix;
use crate::linalg::{ComplexSymMatrix, C64};
use crate::model::BetheStripModel;

/// Largest allowed `| |lambda_J| - K^{-|J|} |`.
pub const MODULUS_TOL: f64 = 1e-12;

/// `A_E`, demanding that `E` lie strictly inside every shifted band.
pub(crate) fn interior_a_e(energy: f64, model: &BetheStripModel) -> Result<ComplexSymMatrix> {
    let root_k = model.sqrt_k();
    if let Some(orbital) = model.onsite().iter().position(|&a| !((energy - a).abs() < root_k)) {
        return Err(Error::OutOfBand { energy, orbital });
    }
    a_e_matrix(energy, model)
}

fn lambda_from(a_e: &ComplexSymMatrix, j: &MonomialIndex) -> C64 {
    let m = a_e.dim();
    let mut out = C64::new(1.0, 0.0);
    for r in 0..m {
        for c in r..m {
            let e = j.get(r, c);
            if e > 0 {
                out *= (4.0 * a_e.get(r, r) * a_e.get(c, c)).powu(e);
            }
        }
    }
    out
}

/// `lambda_J = prod_{j <= k} [4 (A_E)_jj (A_E)_kk]^{J_jk}`.
pub fn lambda_j(energy: f64, model: &BetheStripModel, j: &MonomialIndex) -> Result<C64> {
    if j.dim() != model.m() {
        return Err(Error::InvalidArgument("index width differs from the model".into()));
    }
    Ok(lambda_from(&interior_a_e(energy, model)?, j))
}

/// Every `lambda_J` with `|J| <= d`, in basis order.
pub fn lambda_spectrum(energy: f64, model: &BetheStripModel, d: usize) -> Result<Vec<(MonomialIndex, C64)>> {
    let a_e = interior_a_e(energy, model)?;
    Ok(enumerate_indices(model.m(), d)?
        .into_iter()
        .map(|j| {
            let l = lambda_from(&a_e, &j);
            (j, l)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusReport {
    pub checked: usize,
    /// Largest `| |lambda_J| - K^{-|J|} |`.
    pub max_deviation: f64,
    /// Smallest `|lambda_J - 1/K|`.
    pub min_distance_to_inverse_k: f64,
}

/// Checks `|lambda_J| = K^{-|J|}` and `lambda_J != 1/K` for `|J| <= d`.
pub fn verify_modulus(energy: f64, model: &BetheStripModel, d: usize) -> Result<ModulusReport> {
    let k = model.k() as f64;
    let mut report = ModulusReport { checked: 0, max_deviation: 0.0, min_distance_to_inverse_k: f64::INFINITY };
    for (j, l) in lambda_spectrum(energy, model, d)? {
        let deviation = (l.norm() - k.powi(-(j.degree() as i32))).abs();
        if deviation > MODULUS_TOL {
            return Err(Error::ModulusViolation { index: j.to_string(), deviation });
        }
        let distance = (l - 1.0 / k).norm();
        if distance <= MODULUS_TOL {
            return Err(Error::ModulusViolation { index: j.to_string(), deviation: distance });
        }
        report.checked += 1;
        report.max_deviation = report.max_deviation.max(deviation);
        report.min_distance_to_inverse_k = report.min_distance_to_inverse_k.min(distance);
    }
    Ok(report)
}

/// `1 - 1/K`, a lower bound on `|K lambda - 1|` once `|lambda| <= K^{-2}`.
pub fn analytic_floor(model: &BetheStripModel) -> f64 {
    1.0 - 1.0 / model.k() as f64
}

/// Distance from `0` to the spectrum `{K lambda_J - 1} U {-1}`.
///
/// Indices with `|J| <= max(d, 1)` are enumerated; all higher ones are
/// covered by [`analytic_floor`].
pub fn gap_kce(energy: f64, model: &BetheStripModel, d: usize) -> Result<f64> {
    let k = model.k() as f64;
    let direct = lambda_spectrum(energy, model, d.max(1))?
        .into_iter()
        .map(|(_, l)| (k * l - 1.0).norm())
        .fold(1.0, f64::min);
    Ok(direct.min(analytic_floor(model)))
}

/// As [`gap_kce`] for the products `lambda_J conj(lambda_J')`, over
/// `|J| + |J'| <= max(d, 1)`.
pub fn gap_tensor(energy: f64, model: &BetheStripModel, d: usize) -> Result<f64> {
    let k = model.k() as f64;
    let top = d.max(1);
    let spectrum = lambda_spectrum(energy, model, top)?;
    let mut gap = analytic_floor(model);
    for (j, l) in &spectrum {
        for (jp, lp) in &spectrum {
            if (j.degree() + jp.degree()) as usize <= top {
                gap = gap.min((k * l * lp.conj() - 1.0).norm());
            }
        }
    }
    Ok(gap)
}
