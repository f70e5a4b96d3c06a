//! Closed-form objects of the disorder-free strip.
//!
//! At `lambda = 0` the strip decouples into `m` Bethe lattices shifted by
//! `a_k`, so every matrix here is diagonal. Each forward entry `g` solves
//! `(K/4) g^2 + (z - a_k) g + 1 = 0` with `Im g > 0`.

use crate::error::{Error, Result};
use crate::linalg::{sqrt_upper, ComplexSymMatrix, RealSymMatrix, SpectralPoint, C64};
use crate::model::BetheStripModel;

const I: C64 = C64::new(0.0, 1.0);

/// The free forward and root Green's matrices at `z`, plus `A_E` when
/// `E` lies in every band.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeSolution {
    pub point: SpectralPoint,
    pub forward: ComplexSymMatrix,
    pub full: ComplexSymMatrix,
    pub ae: Option<ComplexSymMatrix>,
}

impl FreeSolution {
    pub fn new(point: SpectralPoint, model: &BetheStripModel) -> Result<Self> {
        let forward = free_forward_green(point, model)?;
        let full = full_from_forward(point, model, &forward);
        Ok(Self {
            point,
            forward,
            full,
            ae: a_e_matrix(point.energy, model).ok(),
        })
    }
}

/// `(A_E)_kk = ((E - a_k) - i sqrt(K - (E - a_k)^2)) / 2K`.
///
/// Band edges `|E - a_k| = sqrt K` are admitted and give the real value
/// `1 / (2 sqrt K)` (times the sign of `E - a_k`).
pub fn a_e_matrix(energy: f64, model: &BetheStripModel) -> Result<ComplexSymMatrix> {
    let k = model.k() as f64;
    let diag = model
        .onsite()
        .iter()
        .enumerate()
        .map(|(orbital, &a)| {
            let x = energy - a;
            let disc = k - x * x;
            if disc < 0.0 {
                return Err(Error::OutOfBand { energy, orbital });
            }
            Ok(C64::new(x, -disc.sqrt()) / (2.0 * k))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexSymMatrix::from_diagonal(&diag))
}

fn check_boundary(point: SpectralPoint, model: &BetheStripModel) -> Result<()> {
    if point.is_boundary() {
        let s = model.sqrt_k();
        for (orbital, &a) in model.onsite().iter().enumerate() {
            if (point.energy - a).abs() >= s {
                return Err(Error::OutOfBand {
                    energy: point.energy,
                    orbital,
                });
            }
        }
    }
    Ok(())
}

/// `G_0^{(0)}(z)_kk = (2/K) (-(z - a_k) + sqrt((z - a_k)^2 - K))`, `Im sqrt > 0`.
///
/// At `eta = 0` every orbital must be strictly inside its band.
pub fn free_forward_green(point: SpectralPoint, model: &BetheStripModel) -> Result<ComplexSymMatrix> {
    check_boundary(point, model)?;
    let k = model.k() as f64;
    let z = point.z();
    let diag: Vec<C64> = model
        .onsite()
        .iter()
        .map(|&a| {
            let w = z - a;
            (-w + sqrt_upper(w * w - k)) * (2.0 / k)
        })
        .collect();
    Ok(ComplexSymMatrix::from_diagonal(&diag))
}

fn full_from_forward(
    point: SpectralPoint,
    model: &BetheStripModel,
    forward: &ComplexSymMatrix,
) -> ComplexSymMatrix {
    let weight = (model.k() + 1) as f64 / 4.0;
    let z = point.z();
    let diag: Vec<C64> = model
        .onsite()
        .iter()
        .zip(forward.diagonal())
        .map(|(&a, g)| (a - z - weight * g).inv())
        .collect();
    ComplexSymMatrix::from_diagonal(&diag)
}

/// Root Green's matrix `G_0(z) = [A - z - ((K+1)/4) G_0^{(0)}(z)]^{-1}`.
pub fn free_full_green(point: SpectralPoint, model: &BetheStripModel) -> Result<ComplexSymMatrix> {
    let forward = free_forward_green(point, model)?;
    Ok(full_from_forward(point, model, &forward))
}

fn check_psd(m: &RealSymMatrix, dim: usize) -> Result<()> {
    if m.dim() != dim {
        return Err(Error::InvalidArgument(format!(
            "test matrix is {}x{}, width is {dim}",
            m.dim(),
            m.dim()
        )));
    }
    if !m.is_psd() {
        return Err(Error::InvalidArgument("test matrix is not positive semidefinite".into()));
    }
    Ok(())
}

/// `zeta_{0,z}(M) = exp((i/4) Tr(G_0^{(0)}(z) M))`.
pub fn zeta_free(point: SpectralPoint, model: &BetheStripModel, m: &RealSymMatrix) -> Result<C64> {
    check_psd(m, model.m())?;
    let g = free_forward_green(point, model)?;
    Ok((I * 0.25 * g.trace_product(m)).exp())
}

/// `xi_{0,z}(M+, M-) = zeta_{0,z}(M+) conj(zeta_{0,z}(M-))`.
pub fn xi_free(
    point: SpectralPoint,
    model: &BetheStripModel,
    m_plus: &RealSymMatrix,
    m_minus: &RealSymMatrix,
) -> Result<C64> {
    Ok(zeta_free(point, model, m_plus)? * zeta_free(point, model, m_minus)?.conj())
}
