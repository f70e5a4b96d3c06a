//! The matrix of `C_E` on monomial-times-Gaussian symbols.
//!
//! Everything is expressed through the symmetric matrix variable `X`. With
//! `B = A - E + K A_E`, `D = B^{-1} = -4 A_E` and a real symmetric `N`,
//!
//! ```text
//! C_E exp(i Tr(N X)) zeta = exp((i/4) Tr((B - N)^{-1} X))
//!                         = zeta * exp((i/4) Tr(Q X)),   Q = sum_{k>=1} D (N D)^k.
//! ```
//!
//! Taking one formal parameter `s_p` per upper-triangular slot, with
//! `N_jj = s_jj` and `N_jk = N_kj = s_jk / 2`, gives `Tr(N X) = sum_p s_p X_p`,
//! so the coefficient of `s^J` on the left is `i^|J| X^J zeta / J!`. Reading
//! off the same coefficient on the right gives `C_E(X^J zeta)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, Schur};

use super::index::{enumerate_indices, slot_count, MonomialIndex};
use super::jet::{Jet, JetLayout};
use super::spectrum::interior_a_e;
use crate::error::{Error, Result};
use crate::fixedpoint::upper_slots;
use crate::linalg::{CMatrix, ComplexSymMatrix, C64};
use crate::model::BetheStripModel;

/// Largest supported basis.
pub const MAX_BASIS: usize = 500;
/// Largest supported truncation degree.
pub const MAX_DEGREE: usize = 8;
/// Tolerance used when comparing a symbol's Gaussian with `-A_E`.
pub const GAUSS_TOL: f64 = 1e-12;

/// `sum_J c_J X^J exp(i Tr(C X))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyGaussSymbol {
    pub coeffs: BTreeMap<MonomialIndex, C64>,
    pub gauss: ComplexSymMatrix,
}

impl PolyGaussSymbol {
    /// `c X^J zeta_{0,E}`, i.e. over the Gaussian `-A_E`.
    pub fn monomial(energy: f64, model: &BetheStripModel, j: MonomialIndex, c: C64) -> Result<Self> {
        let gauss = interior_a_e(energy, model)?.scale(C64::new(-1.0, 0.0));
        Ok(Self { coeffs: BTreeMap::from([(j, c)]), gauss })
    }

    /// Highest degree carrying a nonzero coefficient.
    pub fn degree(&self) -> u32 {
        self.coeffs.iter().filter(|(_, c)| c.norm() > 0.0).map(|(j, _)| j.degree()).max().unwrap_or(0)
    }

    pub fn coeff(&self, j: &MonomialIndex) -> C64 {
        self.coeffs.get(j).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Drops coefficients with modulus at most `tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.coeffs.retain(|_, c| c.norm() > tol);
        self
    }
}

/// Dense matrix of `C_E` in the basis `{X^J zeta : |J| <= d}`.
///
/// Column `c` holds the coefficients of `C_E(X^{basis[c]} zeta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub basis: Vec<MonomialIndex>,
    pub entries: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.len()).map(|i| self.entries[(i, i)]).collect()
    }

    /// Largest entry that would raise the degree; zero for an exact filtration.
    pub fn triangularity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (r, jr) in self.basis.iter().enumerate() {
            for (c, jc) in self.basis.iter().enumerate() {
                if jr.degree() > jc.degree() {
                    worst = worst.max(self.entries[(r, c)].norm());
                }
            }
        }
        worst
    }

    /// Numerical eigenvalues, from a complex Schur decomposition.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let schur = Schur::try_new(self.entries.clone(), f64::EPSILON, 10_000)
            .ok_or(Error::NoConvergence { iterations: 10_000, residual: f64::NAN })?;
        let (_, t) = schur.unpack();
        Ok((0..self.len()).map(|i| t[(i, i)]).collect())
    }

    /// Applies the matrix to a symbol's coefficients.
    pub fn apply(&self, symbol: &PolyGaussSymbol) -> Result<PolyGaussSymbol> {
        for j in symbol.coeffs.keys() {
            if !self.basis.contains(j) {
                return Err(Error::TruncationOverflow {
                    degree: j.degree() as usize,
                    max: self.basis.last().map_or(0, |b| b.degree() as usize),
                });
            }
        }
        let x: Vec<C64> = self.basis.iter().map(|j| symbol.coeff(j)).collect();
        let mut coeffs = BTreeMap::new();
        for (r, j) in self.basis.iter().enumerate() {
            let v: C64 = (0..self.len()).map(|c| self.entries[(r, c)] * x[c]).sum();
            if v != C64::new(0.0, 0.0) {
                coeffs.insert(j.clone(), v);
            }
        }
        Ok(PolyGaussSymbol { coeffs, gauss: symbol.gauss.clone() })
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        CMatrix::from_fn(self.len(), |r, c| self.entries[(r, c)])
    }
}

fn i_pow(n: u32) -> C64 {
    [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][(n % 4) as usize]
}

/// Builds the matrix of `C_E` on `{X^J zeta : |J| <= d}`.
pub fn build_ce_matrix(energy: f64, model: &BetheStripModel, d: usize) -> Result<OperatorMatrix> {
    if d > MAX_DEGREE {
        return Err(Error::TruncationOverflow { degree: d, max: MAX_DEGREE });
    }
    let m = model.m();
    let basis = enumerate_indices(m, d)?;
    if basis.len() > MAX_BASIS {
        return Err(Error::SizeOverflow { dim: basis.len(), limit: MAX_BASIS });
    }
    let a_e = interior_a_e(energy, model)?;
    let slots = upper_slots(m);
    let p = slot_count(m);
    let layout: Arc<JetLayout> = JetLayout::new(p, d as u32);

    let zero = || Jet::zero(&layout);
    // D is diagonal: D_jj = -4 (A_E)_jj
    let dd: Vec<C64> = (0..m).map(|j| -4.0 * a_e.get(j, j)).collect();
    // N D as a matrix of degree-one jets
    let mut nd: Vec<Vec<Jet>> = vec![vec![zero(); m]; m];
    for (v, &(j, k)) in slots.iter().enumerate() {
        if j == k {
            nd[j][j] = Jet::variable(&layout, v, dd[j]);
        } else {
            nd[j][k] = Jet::variable(&layout, v, 0.5 * dd[k]);
            nd[k][j] = Jet::variable(&layout, v, 0.5 * dd[j]);
        }
    }
    // W_k = D (N D)^k, Q = sum_{k=1}^{d} W_k
    let mut w: Vec<Vec<Jet>> = (0..m)
        .map(|j| (0..m).map(|k| if j == k { Jet::constant(&layout, dd[j]) } else { zero() }).collect())
        .collect();
    let mut q: Vec<Vec<Jet>> = vec![vec![zero(); m]; m];
    for _ in 0..d {
        let mut next = vec![vec![zero(); m]; m];
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    if !w[j][l].is_zero() && !nd[l][k].is_zero() {
                        next[j][k].add_assign(&w[j][l].mul(&nd[l][k]));
                    }
                }
            }
        }
        w = next;
        for j in 0..m {
            for k in 0..m {
                q[j][k].add_assign(&w[j][k]);
            }
        }
    }
    // (i/4) Tr(Q X) = sum_p L_p X_p, off-diagonal slots counted twice
    let quarter_i = C64::new(0.0, 0.25);
    let l: Vec<Jet> = slots
        .iter()
        .map(|&(j, k)| if j == k { q[j][j].scale(quarter_i) } else { q[j][k].scale(2.0 * quarter_i) })
        .collect();
    // powers L_p^n / n! for n <= d
    let powers: Vec<Vec<Jet>> = l.iter().map(|lp| (0..=d as u32).map(|n| lp.power_over_factorial(n)).collect()).collect();

    let n = basis.len();
    let mut entries = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (r, jr) in basis.iter().enumerate() {
        // coefficient jet of X^{jr} in exp(sum_p L_p X_p)
        let mut t = Jet::constant(&layout, C64::new(1.0, 0.0));
        for (v, &e) in jr.exponents().iter().enumerate() {
            if e > 0 {
                t = t.mul(&powers[v][e as usize]);
            }
        }
        for (c, jc) in basis.iter().enumerate() {
            let factor = jc.factorial() / i_pow(jc.degree());
            entries[(r, c)] = factor * t.coeff(jc.exponents());
        }
    }
    Ok(OperatorMatrix { basis, entries })
}

/// `C_E` applied to a symbol over the Gaussian `-A_E`, truncated at degree `d`.
pub fn ce_apply_symbol(
    energy: f64,
    model: &BetheStripModel,
    symbol: &PolyGaussSymbol,
    d: usize,
) -> Result<PolyGaussSymbol> {
    let degree = symbol.degree() as usize;
    if degree > d {
        return Err(Error::TruncationOverflow { degree, max: d });
    }
    let expected = interior_a_e(energy, model)?.scale(C64::new(-1.0, 0.0));
    if symbol.gauss.dim() != model.m() || symbol.gauss.distance(&expected) > GAUSS_TOL {
        return Err(Error::InvalidArgument("symbol is not over the Gaussian -A_E".into()));
    }
    build_ce_matrix(energy, model, d)?.apply(symbol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::susy::spectrum::lambda_j;

    fn free(k: usize, a: Vec<f64>) -> BetheStripModel {
        BetheStripModel::free(k, a).unwrap()
    }

    fn idx1(e: u32) -> MonomialIndex {
        MonomialIndex::from_exponents(1, vec![e]).unwrap()
    }

    fn close(a: C64, b: C64) {
        assert!((a - b).norm() < 1e-13, "{a} vs {b}");
    }

    #[test]
    fn apply_examples() {
        let model = free(2, vec![0.0]);
        let one = C64::new(1.0, 0.0);
        let z = PolyGaussSymbol::monomial(0.0, &model, idx1(0), one).unwrap();
        let out = ce_apply_symbol(0.0, &model, &z, 2).unwrap().pruned(1e-14);
        assert_eq!(out.coeffs.len(), 1);
        close(out.coeff(&idx1(0)), one);

        let x = PolyGaussSymbol::monomial(0.0, &model, idx1(1), one).unwrap();
        let out = ce_apply_symbol(0.0, &model, &x, 1).unwrap();
        close(out.coeff(&idx1(1)), C64::new(-0.5, 0.0));
        close(out.coeff(&idx1(0)), C64::new(0.0, 0.0));

        let x2 = PolyGaussSymbol::monomial(0.0, &model, idx1(2), one).unwrap();
        let out = ce_apply_symbol(0.0, &model, &x2, 2).unwrap();
        close(out.coeff(&idx1(2)), C64::new(0.25, 0.0));
        close(out.coeff(&idx1(1)), C64::new(-(2f64.sqrt()), 0.0));
        close(out.coeff(&idx1(0)), C64::new(0.0, 0.0));

        assert!(matches!(ce_apply_symbol(0.0, &model, &x2, 1), Err(Error::TruncationOverflow { .. })));
    }

    #[test]
    fn matrix_examples() {
        let model = free(2, vec![0.0]);
        let op = build_ce_matrix(0.0, &model, 2).unwrap();
        let expected = [[1.0, 0.0, 0.0], [0.0, -0.5, -(2f64.sqrt())], [0.0, 0.0, 0.25]];
        for r in 0..3 {
            for c in 0..3 {
                close(op.entries[(r, c)], C64::new(expected[r][c], 0.0));
            }
        }

        let model = free(2, vec![-0.5, 0.5]);
        let op = build_ce_matrix(0.1, &model, 1).unwrap();
        assert_eq!(op.len(), 4);
        let a_e = crate::free::a_e_matrix(0.1, &model).unwrap();
        let want = [
            C64::new(1.0, 0.0),
            4.0 * a_e.get(0, 0) * a_e.get(0, 0),
            4.0 * a_e.get(0, 0) * a_e.get(1, 1),
            4.0 * a_e.get(1, 1) * a_e.get(1, 1),
        ];
        for (got, want) in op.diagonal().into_iter().zip(want) {
            close(got, want);
        }
        assert!(op.triangularity_residual() < 1e-14);
    }

    #[test]
    fn diagonal_is_lambda_and_eigenvalues_match() {
        let model = free(3, vec![-0.3, 0.2]);
        let op = build_ce_matrix(0.05, &model, 3).unwrap();
        assert!(op.triangularity_residual() < 1e-10);
        for (j, d) in op.basis.iter().zip(op.diagonal()) {
            assert!((d - lambda_j(0.05, &model, j).unwrap()).norm() < 1e-8);
        }
        let mut eig = op.eigenvalues().unwrap();
        let mut want = op.diagonal();
        let key = |z: &C64| (z.re, z.im);
        eig.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        want.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (a, b) in eig.iter().zip(&want) {
            assert!((a - b).norm() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_foreign_gaussian() {
        let model = free(2, vec![0.0]);
        let mut s = PolyGaussSymbol::monomial(0.0, &model, idx1(1), C64::new(1.0, 0.0)).unwrap();
        s.gauss = ComplexSymMatrix::zeros(1);
        assert!(ce_apply_symbol(0.0, &model, &s, 2).is_err());
    }
}
