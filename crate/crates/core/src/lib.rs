//! Random Schrödinger operators on the Bethe strip.
//!
//! The operator is `H = (1/2) Laplacian (x) 1 + 1 (x) A + lambda V` on a
//! rooted tree of connectivity `K`, with an `m x m` block per site. The crate
//! computes matrix Green's functions through the tree recursion, densities of
//! states, absolute-continuity indicators, the spectrum of the linearized
//! fixed-point operator, and exact finite-volume checks.

pub mod ed;
pub mod error;
pub mod fixedpoint;
pub mod free;
pub mod linalg;
pub mod model;
pub mod recursion;
pub mod streams;
pub mod susy;
pub mod tree;

pub use error::{Error, Result};
pub use fixedpoint::{continuation_to_boundary, hybrid_solve, newton_solve, picard_solve, FixedPointProblem, SolveReport};
pub use free::{a_e_matrix, free_forward_green, free_full_green, xi_free, zeta_free, FreeSolution};
pub use linalg::{
    is_herglotz, min_imag_eigenvalue, sqrt_upper, sym_inverse, CMatrix, ComplexSymMatrix, RealSymMatrix,
    SpectralPoint, C64,
};
pub use model::{
    characteristic_fn, deterministic_spectrum, interval_iak, sample_potential, spectral_envelope,
    BetheStripModel, DiagonalLaw, DisorderEnsemble, RealInterval,
};
pub use recursion::{
    draw_realization, forward_step, root_assemble, sample_tree, tree_green, MomentEstimate, PoolParams, PopulationPool,
};
pub use tree::{build_tree, TruncatedTree};
