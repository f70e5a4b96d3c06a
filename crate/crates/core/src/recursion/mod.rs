//! Green's-matrix recursion on the Bethe strip.
//!
//! Removing a site `x` splits the tree into branches, and the Schur
//! complement of the hopping `1/2` gives
//! `G^(x) = [A + lambda V(x) - z - (1/4) sum_children G^(child)]^{-1}`.
//! The same formula with `K + 1` neighbours gives the root Green's matrix.

pub(crate) mod estimate;
mod population;

pub use estimate::{ComplexEstimate, MatrixEstimate, MomentEstimate, RealEstimate};
pub use population::{
    averaged_fixed_point_residual, dos_density, estimate_green_moments, eta_continuation, fixed_point_residual, population_init,
    population_sweep, root_moments, xi_estimate, zeta_estimate, EtaEstimate, PoolParams,
    PopulationPool, ResidualEntry, ResidualReport, RootMoments, BATCHES, BOUNDARY_ETA,
    DEFAULT_BURN_IN, DEFAULT_CHUNKS, DEFAULT_POOL_SIZE,
};

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{sym_inverse, CMatrix, ComplexSymMatrix, RealSymMatrix, SpectralPoint, C64};
use crate::model::BetheStripModel;
use crate::tree::TruncatedTree;

/// `[A + lambda V - z - (1/4) sum neighbours]^{-1}`.
pub(crate) fn resolvent_step<'a>(
    point: SpectralPoint,
    model: &BetheStripModel,
    v: &RealSymMatrix,
    neighbours: impl IntoIterator<Item = &'a ComplexSymMatrix>,
) -> Result<ComplexSymMatrix> {
    let m = model.m();
    let z = point.z();
    let lambda = model.lambda();
    let onsite = model.onsite();
    let mut acc = CMatrix::from_fn(m, |j, k| {
        let diag = if j == k { onsite[j] - z } else { C64::new(0.0, 0.0) };
        diag + lambda * v.get(j, k)
    });
    for g in neighbours {
        debug_assert_eq!(g.dim(), m);
        for j in 0..m {
            for k in 0..m {
                let upd = acc.get(j, k) - 0.25 * g.get(j, k);
                acc.set(j, k, upd);
            }
        }
    }
    // acc is symmetric by construction
    sym_inverse(&ComplexSymMatrix::symmetrized(&acc))
}

fn check_inputs(
    model: &BetheStripModel,
    v: &RealSymMatrix,
    neighbours: &[ComplexSymMatrix],
    expected: usize,
) -> Result<()> {
    if neighbours.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "expected {expected} neighbour matrices, got {}",
            neighbours.len()
        )));
    }
    let m = model.m();
    if v.dim() != m || neighbours.iter().any(|g| g.dim() != m) {
        return Err(Error::InvalidArgument(format!("matrix dimension differs from width {m}")));
    }
    Ok(())
}

/// One forward step from `K` child Green's matrices.
pub fn forward_step(
    point: SpectralPoint,
    model: &BetheStripModel,
    v: &RealSymMatrix,
    children: &[ComplexSymMatrix],
) -> Result<ComplexSymMatrix> {
    check_inputs(model, v, children, model.k())?;
    resolvent_step(point, model, v, children)
}

/// Root Green's matrix from its `K + 1` forward neighbours.
pub fn root_assemble(
    point: SpectralPoint,
    model: &BetheStripModel,
    v: &RealSymMatrix,
    neighbours: &[ComplexSymMatrix],
) -> Result<ComplexSymMatrix> {
    check_inputs(model, v, neighbours, model.k() + 1)?;
    resolvent_step(point, model, v, neighbours)
}

/// Draws one potential per site, in site-index order.
pub fn draw_realization<R: Rng + ?Sized>(
    model: &BetheStripModel,
    sites: usize,
    rng: &mut R,
) -> Vec<RealSymMatrix> {
    (0..sites).map(|_| model.sample_potential(rng)).collect()
}

/// Exact `G_{lambda,L}(0, 0; z)` for a given realization, by recursion from
/// the leaves (Dirichlet boundary) to the root.
pub fn tree_green(
    tree: &TruncatedTree,
    model: &BetheStripModel,
    realization: &[RealSymMatrix],
    point: SpectralPoint,
) -> Result<ComplexSymMatrix> {
    if tree.k() != model.k() {
        return Err(Error::InvalidArgument("tree and model connectivity differ".into()));
    }
    if realization.len() != tree.len() {
        return Err(Error::InvalidArgument(format!(
            "realization has {} sites, tree has {}",
            realization.len(),
            tree.len()
        )));
    }
    let m = model.m();
    let zero = ComplexSymMatrix::zeros(m);
    let mut greens = vec![zero.clone(); tree.len()];
    for site in (1..tree.len()).rev() {
        let children = tree.children(site);
        greens[site] = if children.is_empty() {
            resolvent_step(point, model, &realization[site], std::iter::repeat_n(&zero, model.k()))?
        } else {
            resolvent_step(point, model, &realization[site], &greens[children])?
        };
    }
    let root_children = tree.children(0);
    if root_children.is_empty() {
        resolvent_step(point, model, &realization[0], std::iter::repeat_n(&zero, model.k() + 1))
    } else {
        resolvent_step(point, model, &realization[0], &greens[root_children])
    }
}

/// Samples a realization on `B_L` and returns its root Green's matrix.
/// Consumes exactly `|B_L|` potential draws.
pub fn sample_tree<R: Rng + ?Sized>(
    point: SpectralPoint,
    model: &BetheStripModel,
    depth: usize,
    rng: &mut R,
) -> Result<ComplexSymMatrix> {
    if point.eta <= 0.0 {
        return Err(Error::InvalidArgument("sample_tree needs eta > 0".into()));
    }
    let tree = TruncatedTree::new(model.k(), depth, model.m())?;
    let realization = draw_realization(model, tree.len(), rng);
    tree_green(&tree, model, &realization, point)
}
