//! Spectrum of the linearized fixed-point operator `C_E` at zero disorder.

mod index;
mod jet;
mod operator;
mod spectrum;

pub use index::{enumerate_indices, index_count, slot_count, MonomialIndex};
pub use jet::{Jet, JetLayout};
pub use operator::{build_ce_matrix, ce_apply_symbol, OperatorMatrix, PolyGaussSymbol, MAX_BASIS, MAX_DEGREE};
pub use spectrum::{
    analytic_floor, gap_kce, gap_tensor, lambda_j, lambda_spectrum, verify_modulus, ModulusReport, MODULUS_TOL,
};
