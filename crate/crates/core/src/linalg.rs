//! Small dense complex-symmetric matrices.
//!
//! Green's matrices of a real Hamiltonian are complex *symmetric*
//! (`G[j][k] == G[k][j]`), not Hermitian. Everything here is sized for the
//! strip width `m <= MAX_DIM`, so storage is dense and inline for `m <= 3`.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest supported strip width.
pub const MAX_DIM: usize = 16;
/// Solve residual bound `||M N - I||_max <= SOLVE_RESIDUAL_TOL * ||M||_max`.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;
/// Pivots below `PIVOT_FLOOR * ||M||_max` are treated as singular.
pub const PIVOT_FLOOR: f64 = 1e-14;
/// Slack allowed on `Im G >= 0` before a matrix stops counting as Herglotz.
pub const HERGLOTZ_TOL: f64 = 1e-10;

const I: C64 = C64::new(0.0, 1.0);

type Store<T> = SmallVec<[T; 9]>;

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Store<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: smallvec::smallvec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut out = Self::zeros(dim);
        for k in 0..dim {
            out.data[k * dim + k] = C64::new(1.0, 0.0);
        }
        out
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Store::with_capacity(dim * dim);
        for j in 0..dim {
            for k in 0..dim {
                data.push(f(j, k));
            }
        }
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.data[j * self.dim + k]
    }

    #[inline]
    pub fn set(&mut self, j: usize, k: usize, value: C64) {
        self.data[j * self.dim + k] = value;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |j, k| self.get(k, j))
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    /// `max_{jk} |M_jk|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest `|M_jk - M_kj|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.dim {
            for k in j + 1..self.dim {
                worst = worst.max((self.get(j, k) - self.get(k, j)).norm());
            }
        }
        worst
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for j in 0..n {
            for l in 0..n {
                let a = self.get(j, l);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..n {
                    out.data[j * n + k] += a * rhs.data[l * n + k];
                }
            }
        }
        out
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |j, k| self.get(j, k))
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        if self.dim == 1 {
            return self.data[0].norm();
        }
        self.to_nalgebra()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (j, k): (usize, usize)) -> &C64 {
        &self.data[j * self.dim + k]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<C64>> = (0..self.dim)
            .map(|j| (0..self.dim).map(|k| self.get(j, k)).collect())
            .collect();
        f.debug_struct("CMatrix").field("rows", &rows).finish()
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

/// Dense real symmetric matrix: potentials `V(x)`, test matrices `M`.
#[derive(Clone, PartialEq)]
pub struct RealSymMatrix {
    dim: usize,
    data: Store<f64>,
}

impl RealSymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: smallvec::smallvec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut out = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            out.data[k * diag.len() + k] = d;
        }
        out
    }

    /// Builds from the upper triangle; `f(j, k)` is only called for `j <= k`.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(dim);
        for j in 0..dim {
            for k in j..dim {
                out.set(j, k, f(j, k));
            }
        }
        out
    }

    /// Builds from full rows, rejecting non-square, non-symmetric or
    /// non-finite input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "matrix dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("matrix is not square".into()));
        }
        for (j, row) in rows.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidArgument("non-finite matrix entry".into()));
                }
                if *v != rows[k][j] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix not symmetric at ({j}, {k})"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.dim + k]
    }

    /// Sets both `(j, k)` and `(k, j)`.
    #[inline]
    pub fn set(&mut self, j: usize, k: usize, value: f64) {
        self.data[j * self.dim + k] = value;
        self.data[k * self.dim + j] = value;
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|j| (0..j).all(|k| self.get(j, k) == self.get(k, j)))
    }

    /// `Tr(self * other)`.
    pub fn trace_product(&self, other: &RealSymMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = if self.dim == 1 {
            vec![self.data[0]]
        } else {
            let mat = DMatrix::from_fn(self.dim, self.dim, |j, k| self.get(j, k));
            mat.symmetric_eigenvalues().iter().copied().collect()
        };
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn is_psd(&self) -> bool {
        let floor = -1e-12 * self.max_abs().max(1.0);
        self.eigenvalues()[0] >= floor
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|k| self.get(j, k)).collect())
            .collect()
    }
}

impl fmt::Debug for RealSymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealSymMatrix")
            .field("rows", &self.to_rows())
            .finish()
    }
}

/// Complex symmetric `m x m` matrix. Entries are exactly symmetric and finite.
#[derive(Clone, PartialEq)]
pub struct ComplexSymMatrix(CMatrix);

impl ComplexSymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut out = CMatrix::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            out.set(k, k, d);
        }
        Self(out)
    }

    pub fn from_real(m: &RealSymMatrix) -> Self {
        Self(CMatrix::from_fn(m.dim(), |j, k| C64::new(m.get(j, k), 0.0)))
    }

    /// Builds from the upper triangle; `f(j, k)` is only called for `j <= k`.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut out = CMatrix::zeros(dim);
        for j in 0..dim {
            for k in j..dim {
                let v = f(j, k);
                out.set(j, k, v);
                out.set(k, j, v);
            }
        }
        Self(out)
    }

    /// Accepts `m` only if it is exactly symmetric and finite.
    pub fn try_from_matrix(m: CMatrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        if m.asymmetry() != 0.0 {
            return Err(Error::InvalidArgument("matrix is not symmetric".into()));
        }
        Ok(Self(m))
    }

    /// `(m + m^T) / 2`.
    pub fn symmetrized(m: &CMatrix) -> Self {
        let n = m.dim();
        let mut out = m.clone();
        for j in 0..n {
            for k in j + 1..n {
                let avg = (m.get(j, k) + m.get(k, j)) * 0.5;
                out.set(j, k, avg);
                out.set(k, j, avg);
            }
        }
        Self(out)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.0.get(j, k)
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|k| self.get(k, k)).collect()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|k| j == k || self.get(j, k).norm() <= tol))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    pub fn conj(&self) -> Self {
        Self(self.0.conj())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(self.0.scale(factor))
    }

    /// Entrywise imaginary part, `(M - conj M) / 2i`.
    pub fn imag_part(&self) -> RealSymMatrix {
        RealSymMatrix::from_upper(self.dim(), |j, k| self.get(j, k).im)
    }

    pub fn real_part(&self) -> RealSymMatrix {
        RealSymMatrix::from_upper(self.dim(), |j, k| self.get(j, k).re)
    }

    /// `Tr(self * m)` for real symmetric `m`.
    pub fn trace_product(&self, m: &RealSymMatrix) -> C64 {
        assert_eq!(self.dim(), m.dim(), "dimension mismatch");
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                acc += self.get(j, k) * m.get(k, j);
            }
        }
        acc
    }

    /// `conj(G) * G`, the matrix absolute square `G^* G` of a symmetric `G`.
    pub fn abs_square(&self) -> CMatrix {
        self.0.conj().matmul(&self.0)
    }

    /// Max-norm distance.
    pub fn distance(&self, other: &ComplexSymMatrix) -> f64 {
        (&self.0 - &other.0).max_abs()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.0.spectral_norm()
    }
}

impl fmt::Debug for ComplexSymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Add for &ComplexSymMatrix {
    type Output = ComplexSymMatrix;

    fn add(self, rhs: &ComplexSymMatrix) -> ComplexSymMatrix {
        ComplexSymMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexSymMatrix {
    type Output = ComplexSymMatrix;

    fn sub(self, rhs: &ComplexSymMatrix) -> ComplexSymMatrix {
        ComplexSymMatrix(&self.0 - &rhs.0)
    }
}

/// A point `z = E + i eta` with `eta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub energy: f64,
    pub eta: f64,
}

impl SpectralPoint {
    pub fn new(energy: f64, eta: f64) -> Result<Self> {
        if !energy.is_finite() || !eta.is_finite() || eta < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "spectral point needs finite E and eta >= 0, got ({energy}, {eta})"
            )));
        }
        Ok(Self { energy, eta })
    }

    /// Point on the real axis.
    pub fn real(energy: f64) -> Result<Self> {
        Self::new(energy, 0.0)
    }

    #[inline]
    pub fn z(&self) -> C64 {
        C64::new(self.energy, self.eta)
    }

    #[inline]
    pub fn is_boundary(&self) -> bool {
        self.eta == 0.0
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.energy, eta)
    }
}

/// In-place LU factorization with partial pivoting of a row-major `n x n`
/// matrix. Returns the row permutation.
fn lu_factor(a: &mut [C64], n: usize, scale: f64) -> Result<Vec<usize>> {
    let floor = PIVOT_FLOOR * scale;
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let (piv_row, piv_abs) = (col..n)
            .map(|r| (r, a[r * n + col].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(piv_abs >= floor) || piv_abs == 0.0 {
            return Err(Error::SingularMatrix {
                pivot: piv_abs,
                floor,
            });
        }
        if piv_row != col {
            for k in 0..n {
                a.swap(col * n + k, piv_row * n + k);
            }
            perm.swap(col, piv_row);
        }
        let inv_piv = a[col * n + col].inv();
        for r in col + 1..n {
            let factor = a[r * n + col] * inv_piv;
            a[r * n + col] = factor;
            if factor != C64::new(0.0, 0.0) {
                for k in col + 1..n {
                    let upd = factor * a[col * n + k];
                    a[r * n + k] -= upd;
                }
            }
        }
    }
    Ok(perm)
}

fn lu_solve_in_place(lu: &[C64], n: usize, perm: &[usize], rhs: &[C64], out: &mut [C64]) {
    for (i, &p) in perm.iter().enumerate() {
        out[i] = rhs[p];
    }
    for i in 0..n {
        let mut acc = out[i];
        for k in 0..i {
            acc -= lu[i * n + k] * out[k];
        }
        out[i] = acc;
    }
    for i in (0..n).rev() {
        let mut acc = out[i];
        for k in i + 1..n {
            acc -= lu[i * n + k] * out[k];
        }
        out[i] = acc / lu[i * n + i];
    }
}

/// Solves the general system `a x = b` by LU with partial pivoting.
pub fn lu_solve(a: &CMatrix, b: &[C64]) -> Result<Vec<C64>> {
    let n = a.dim();
    assert_eq!(b.len(), n, "right-hand side length mismatch");
    let mut lu: Vec<C64> = a.as_slice().to_vec();
    let perm = lu_factor(&mut lu, n, a.max_abs())?;
    let mut out = vec![C64::new(0.0, 0.0); n];
    lu_solve_in_place(&lu, n, &perm, b, &mut out);
    Ok(out)
}

fn general_inverse(m: &CMatrix) -> Result<CMatrix> {
    let n = m.dim();
    if n == 1 {
        let v = m.get(0, 0);
        let floor = PIVOT_FLOOR * v.norm();
        if v.norm() == 0.0 || v.norm() < floor {
            return Err(Error::SingularMatrix {
                pivot: v.norm(),
                floor,
            });
        }
        return Ok(CMatrix::from_fn(1, |_, _| v.inv()));
    }
    let mut lu: Store<C64> = m.as_slice().iter().copied().collect();
    let perm = lu_factor(&mut lu, n, m.max_abs())?;
    let mut inv = CMatrix::zeros(n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut col = vec![C64::new(0.0, 0.0); n];
    for c in 0..n {
        e.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        e[c] = C64::new(1.0, 0.0);
        lu_solve_in_place(&lu, n, &perm, &e, &mut col);
        for (r, v) in col.iter().enumerate() {
            inv.set(r, c, *v);
        }
    }
    Ok(inv)
}

/// Inverse of a complex symmetric matrix, symmetrized after the solve.
pub fn sym_inverse(m: &ComplexSymMatrix) -> Result<ComplexSymMatrix> {
    sym_inverse_with_drift(m).map(|(inv, _)| inv)
}

/// Like [`sym_inverse`], also returning the asymmetry of the raw LU inverse
/// before symmetrization.
pub fn sym_inverse_with_drift(m: &ComplexSymMatrix) -> Result<(ComplexSymMatrix, f64)> {
    let raw = general_inverse(m.as_matrix())?;
    let drift = raw.asymmetry();
    Ok((ComplexSymMatrix::symmetrized(&raw), drift))
}

/// Square root on the branch with `Im r > 0`; on `[0, inf)` the limit from
/// the upper half plane, `+sqrt(w)`.
pub fn sqrt_upper(w: C64) -> C64 {
    let r = w.sqrt();
    if r.im < 0.0 {
        -r
    } else if r.im == 0.0 && w.re < 0.0 {
        // sqrt of a negative real with a signed-zero imaginary part
        I * (-w.re).sqrt()
    } else {
        r
    }
}

/// Smallest eigenvalue of the real symmetric matrix `Im M`.
pub fn min_imag_eigenvalue(m: &ComplexSymMatrix) -> f64 {
    m.imag_part().eigenvalues()[0]
}

/// `Im M >= -HERGLOTZ_TOL`.
pub fn is_herglotz(m: &ComplexSymMatrix) -> bool {
    min_imag_eigenvalue(m) >= -HERGLOTZ_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn inverse_identity() {
        let inv = sym_inverse(&ComplexSymMatrix::identity(2)).unwrap();
        assert_eq!(inv, ComplexSymMatrix::identity(2));
    }

    #[test]
    fn inverse_diagonal() {
        let m = ComplexSymMatrix::from_diagonal(&[c(0.0, 2.0), c(0.0, -1.0)]);
        let inv = sym_inverse(&m).unwrap();
        assert_abs_diff_eq!((inv.get(0, 0) - c(0.0, -0.5)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((inv.get(1, 1) - c(0.0, 1.0)).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(inv.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn inverse_two_by_two_closed_form() {
        // det = 1 - i^2 = 2
        let m = ComplexSymMatrix::from_upper(2, |j, k| if j == k { c(1.0, 0.0) } else { c(0.0, 1.0) });
        let inv = sym_inverse(&m).unwrap();
        let expected =
            ComplexSymMatrix::from_upper(2, |j, k| if j == k { c(0.5, 0.0) } else { c(0.0, -0.5) });
        assert!(inv.distance(&expected) < 1e-15);
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = ComplexSymMatrix::from_upper(2, |_, _| c(1.0, 1.0));
        assert!(matches!(sym_inverse(&m), Err(Error::SingularMatrix { .. })));
        assert!(matches!(
            sym_inverse(&ComplexSymMatrix::zeros(3)),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn sqrt_upper_examples() {
        assert_abs_diff_eq!((sqrt_upper(c(-2.0, 0.0)) - c(0.0, 2f64.sqrt())).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((sqrt_upper(c(-2.0, -0.0)) - c(0.0, 2f64.sqrt())).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(sqrt_upper(c(4.0, 0.0)), c(2.0, 0.0));
        let r = sqrt_upper(c(-1.0, -2.0));
        assert!(r.im > 0.0);
        assert!((r * r - c(-1.0, -2.0)).norm() < 1e-14);
        assert_abs_diff_eq!(r.re, -0.786_151_377_757_423_3, epsilon = 1e-12);
        assert_abs_diff_eq!(r.im, 1.272_019_649_514_069, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_upper_continuous_across_negative_axis() {
        for w in [-0.5, -1.0, -4.0, -100.0] {
            let above = sqrt_upper(c(w, 1e-12));
            let below = sqrt_upper(c(w, -1e-12));
            assert!((above - below).norm() < 1e-9, "jump at {w}");
        }
    }

    #[test]
    fn min_imag_eigenvalue_examples() {
        let d = ComplexSymMatrix::from_diagonal(&[c(0.0, 1.0), c(0.0, 2.0)]);
        assert_abs_diff_eq!(min_imag_eigenvalue(&d), 1.0, epsilon = 1e-14);
        let real = ComplexSymMatrix::from_upper(2, |j, k| c((j + 2 * k) as f64, 0.0));
        assert_eq!(min_imag_eigenvalue(&real), 0.0);
        let m = ComplexSymMatrix::from_upper(2, |j, k| if j == k { c(0.0, 1.0) } else { c(1.0, 0.0) });
        assert_abs_diff_eq!(min_imag_eigenvalue(&m), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn general_solve_matches_product() {
        let a = CMatrix::from_fn(3, |j, k| c((j * 3 + k) as f64 + 1.0 + if j == k { 4.0 } else { 0.0 }, (j as f64) - (k as f64) * 0.5));
        let b = vec![c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.5)];
        let x = lu_solve(&a, &b).unwrap();
        for j in 0..3 {
            let row: C64 = (0..3).map(|k| a.get(j, k) * x[k]).sum();
            assert!((row - b[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn abs_square_of_symmetric_is_hermitian() {
        let g = ComplexSymMatrix::from_upper(2, |j, k| c(1.0 + j as f64, 0.3 * k as f64 - 0.1));
        let sq = g.abs_square();
        for j in 0..2 {
            for k in 0..2 {
                assert!((sq.get(j, k) - sq.get(k, j).conj()).norm() < 1e-15);
            }
        }
        let tr: f64 = (0..2).flat_map(|j| (0..2).map(move |k| (j, k))).map(|(j, k)| g.get(j, k).norm_sqr()).sum();
        assert_abs_diff_eq!(sq.trace().re, tr, epsilon = 1e-14);
    }
}
