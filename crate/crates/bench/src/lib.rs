//! Fixed workloads shared by the benchmarks.

use bethe_strip::streams::{stream, Domain};
use bethe_strip::{sample_tree, BetheStripModel, ComplexSymMatrix, DisorderEnsemble, RealSymMatrix, SpectralPoint};

pub fn goe_model(k: usize, m: usize) -> BetheStripModel {
    let onsite = (0..m).map(|j| 0.2 * j as f64 - 0.1 * (m - 1) as f64).collect();
    BetheStripModel::new(k, onsite, 0.5, DisorderEnsemble::Goe).expect("valid benchmark model")
}

pub fn point() -> SpectralPoint {
    SpectralPoint::new(0.2, 0.05).expect("valid point")
}

/// `K` child matrices and a site potential for a single forward step.
pub fn step_inputs(model: &BetheStripModel) -> (RealSymMatrix, Vec<ComplexSymMatrix>) {
    let mut rng = stream(1, Domain::TestMatrix, &[0]);
    let children = (0..model.k() as u64)
        .map(|r| sample_tree(point(), model, 2, &mut stream(1, Domain::Realization, &[r])).expect("tree"))
        .collect();
    (model.sample_potential(&mut rng), children)
}
