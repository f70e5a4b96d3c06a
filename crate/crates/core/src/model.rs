//! The Bethe strip Hamiltonian `H = (1/2) Delta (x) 1 + 1 (x) A + lambda V`.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{RealSymMatrix, C64, MAX_DIM};

/// Law of the i.i.d. entries of a diagonal potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagonalLaw {
    /// Uniform on `[-1, 1]`.
    Uniform,
    /// Standard normal.
    Gaussian,
    /// `+1` or `-1` with probability one half.
    Bernoulli,
}

impl DiagonalLaw {
    fn name(self) -> &'static str {
        match self {
            DiagonalLaw::Uniform => "uniform",
            DiagonalLaw::Gaussian => "gauss",
            DiagonalLaw::Bernoulli => "bernoulli",
        }
    }

    fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            DiagonalLaw::Uniform => rng.random_range(-1.0..=1.0),
            DiagonalLaw::Gaussian => StandardNormal.sample(rng),
            DiagonalLaw::Bernoulli => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// `E exp(-i t v)`.
    fn characteristic(self, t: f64) -> f64 {
        match self {
            DiagonalLaw::Uniform => {
                if t == 0.0 {
                    1.0
                } else {
                    t.sin() / t
                }
            }
            DiagonalLaw::Gaussian => (-0.5 * t * t).exp(),
            DiagonalLaw::Bernoulli => t.cos(),
        }
    }
}

/// Distribution `mu` of the single-site potential `V(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DisorderEnsemble {
    PointMass(RealSymMatrix),
    DiagonalIid(DiagonalLaw),
    /// Gaussian orthogonal ensemble: diagonal variance 1, off-diagonal 1/2.
    Goe,
}

impl DisorderEnsemble {
    /// Draws one potential. `PointMass` returns its matrix unchanged.
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> RealSymMatrix {
        match self {
            DisorderEnsemble::PointMass(v) => v.clone(),
            DisorderEnsemble::DiagonalIid(law) => {
                let diag: Vec<f64> = (0..dim).map(|_| law.sample(rng)).collect();
                RealSymMatrix::from_diagonal(&diag)
            }
            DisorderEnsemble::Goe => RealSymMatrix::from_upper(dim, |j, k| {
                let g: f64 = StandardNormal.sample(rng);
                if j == k {
                    g
                } else {
                    g / SQRT_2
                }
            }),
        }
    }

    /// `h(M) = E exp(-i Tr(M V))`.
    pub fn characteristic_fn(&self, m: &RealSymMatrix) -> C64 {
        match self {
            DisorderEnsemble::PointMass(v) => {
                let phase = -m.trace_product(v);
                C64::new(0.0, phase).exp()
            }
            DisorderEnsemble::DiagonalIid(law) => {
                let prod: f64 = (0..m.dim()).map(|k| law.characteristic(m.get(k, k))).product();
                C64::new(prod, 0.0)
            }
            DisorderEnsemble::Goe => C64::new((-0.5 * m.trace_product(m)).exp(), 0.0),
        }
    }

    pub fn has_bounded_support(&self) -> bool {
        !matches!(
            self,
            DisorderEnsemble::Goe | DisorderEnsemble::DiagonalIid(DiagonalLaw::Gaussian)
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            DisorderEnsemble::PointMass(_) => "point",
            DisorderEnsemble::DiagonalIid(DiagonalLaw::Uniform) => "diag:uniform",
            DisorderEnsemble::DiagonalIid(DiagonalLaw::Gaussian) => "diag:gauss",
            DisorderEnsemble::DiagonalIid(DiagonalLaw::Bernoulli) => "diag:bernoulli",
            DisorderEnsemble::Goe => "goe",
        }
    }

    /// Parses `point:<path-or-inline>`, `diag:uniform`, `diag:gauss`,
    /// `diag:bernoulli` or `goe`. Inline matrices separate rows with `;` and
    /// entries with `,` or whitespace, e.g. `point:1,0;0,2`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        match spec {
            "goe" => return Ok(DisorderEnsemble::Goe),
            "diag:uniform" => return Ok(DisorderEnsemble::DiagonalIid(DiagonalLaw::Uniform)),
            "diag:gauss" => return Ok(DisorderEnsemble::DiagonalIid(DiagonalLaw::Gaussian)),
            "diag:bernoulli" => return Ok(DisorderEnsemble::DiagonalIid(DiagonalLaw::Bernoulli)),
            _ => {}
        }
        let Some(body) = spec.strip_prefix("point:") else {
            return Err(Error::Parse(format!("unknown ensemble `{spec}`")));
        };
        let matrix = match parse_matrix(body) {
            Ok(m) => m,
            Err(inline_err) => {
                let path = Path::new(body);
                if !path.is_file() {
                    return Err(inline_err);
                }
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("reading {body}: {e}")))?;
                parse_matrix(&text.lines().collect::<Vec<_>>().join(";"))?
            }
        };
        Ok(DisorderEnsemble::PointMass(matrix))
    }
}

/// Inline form, accepted back by [`DisorderEnsemble::parse`].
impl fmt::Display for DisorderEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisorderEnsemble::PointMass(v) => {
                let rows: Vec<String> = v
                    .to_rows()
                    .iter()
                    .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
                    .collect();
                write!(f, "point:{}", rows.join(";"))
            }
            DisorderEnsemble::DiagonalIid(law) => write!(f, "diag:{}", law.name()),
            DisorderEnsemble::Goe => f.write_str("goe"),
        }
    }
}

fn parse_matrix(text: &str) -> Result<RealSymMatrix> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|r| {
            r.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad matrix entry `{t}`")))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix".into()));
    }
    RealSymMatrix::from_rows(&rows).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses the on-site spec `diag:a1,a2,...`.
pub fn parse_onsite(spec: &str) -> Result<Vec<f64>> {
    let body = spec
        .trim()
        .strip_prefix("diag:")
        .ok_or_else(|| Error::Parse(format!("on-site matrix must be `diag:...`, got `{spec}`")))?;
    body.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad on-site entry `{t}`")))
        })
        .collect()
}

/// Open interval `(lo, hi)`; empty when `lo >= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealInterval {
    pub lo: f64,
    pub hi: f64,
}

impl RealInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    /// `n` equispaced points strictly inside the interval.
    pub fn interior_grid(&self, n: usize) -> Vec<f64> {
        let h = self.width() / (n + 1) as f64;
        (1..=n).map(|i| self.lo + h * i as f64).collect()
    }
}

/// Model parameters: connectivity `K`, width `m`, diagonal `A`, disorder
/// strength `lambda` and ensemble `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetheStripModel {
    connectivity: usize,
    onsite: Vec<f64>,
    lambda: f64,
    ensemble: DisorderEnsemble,
}

impl BetheStripModel {
    /// `onsite` is the diagonal of `A` and must be ascending.
    pub fn new(
        connectivity: usize,
        onsite: Vec<f64>,
        lambda: f64,
        ensemble: DisorderEnsemble,
    ) -> Result<Self> {
        if connectivity < 2 {
            return Err(Error::InvalidModel(format!(
                "connectivity K = {connectivity} must be at least 2"
            )));
        }
        let m = onsite.len();
        if m == 0 || m > MAX_DIM {
            return Err(Error::InvalidModel(format!("width m = {m} outside 1..={MAX_DIM}")));
        }
        if onsite.iter().any(|a| !a.is_finite()) || !lambda.is_finite() {
            return Err(Error::InvalidModel("non-finite parameter".into()));
        }
        if onsite.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidModel("diagonal of A must be ascending".into()));
        }
        if let DisorderEnsemble::PointMass(v) = &ensemble {
            if v.dim() != m {
                return Err(Error::InvalidModel(format!(
                    "point-mass potential is {}x{}, width is {m}",
                    v.dim(),
                    v.dim()
                )));
            }
            if !v.is_symmetric() {
                return Err(Error::InvalidModel("point-mass potential not symmetric".into()));
            }
        }
        Ok(Self {
            connectivity,
            onsite,
            lambda,
            ensemble,
        })
    }

    /// Disorder-free model with `A = diag(onsite)`.
    pub fn free(connectivity: usize, onsite: Vec<f64>) -> Result<Self> {
        let m = onsite.len();
        Self::new(
            connectivity,
            onsite,
            0.0,
            DisorderEnsemble::PointMass(RealSymMatrix::zeros(m.max(1))),
        )
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.connectivity
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.onsite.len()
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn ensemble(&self) -> &DisorderEnsemble {
        &self.ensemble
    }

    pub fn a_min(&self) -> f64 {
        self.onsite[0]
    }

    pub fn a_max(&self) -> f64 {
        self.onsite[self.m() - 1]
    }

    pub fn sqrt_k(&self) -> f64 {
        (self.connectivity as f64).sqrt()
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    /// Whether `a_max - a_min < 2 sqrt(K)`, i.e. `I_{A,K}` is nonempty.
    pub fn bands_overlap(&self) -> bool {
        !interval_iak(self).is_empty()
    }

    /// `A + lambda V` as a real symmetric matrix.
    pub fn onsite_matrix(&self, v: &RealSymMatrix) -> RealSymMatrix {
        RealSymMatrix::from_upper(self.m(), |j, k| {
            let a = if j == k { self.onsite[j] } else { 0.0 };
            a + self.lambda * v.get(j, k)
        })
    }

    pub fn sample_potential<R: Rng + ?Sized>(&self, rng: &mut R) -> RealSymMatrix {
        self.ensemble.sample(self.m(), rng)
    }
}

/// `I_{A,K} = (-sqrt K + a_max, sqrt K + a_min)`.
pub fn interval_iak(model: &BetheStripModel) -> RealInterval {
    let s = model.sqrt_k();
    RealInterval::new(-s + model.a_max(), s + model.a_min())
}

pub fn sample_potential<R: Rng + ?Sized>(
    ensemble: &DisorderEnsemble,
    dim: usize,
    rng: &mut R,
) -> RealSymMatrix {
    ensemble.sample(dim, rng)
}

pub fn characteristic_fn(ensemble: &DisorderEnsemble, m: &RealSymMatrix) -> C64 {
    ensemble.characteristic_fn(m)
}

/// Sorted union of closed intervals.
fn merge(mut intervals: Vec<RealInterval>) -> Vec<RealInterval> {
    intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<RealInterval> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

fn bands_around(centres: impl IntoIterator<Item = (f64, f64)>, half_band: f64) -> Vec<RealInterval> {
    merge(
        centres
            .into_iter()
            .map(|(lo, hi)| RealInterval::new(lo - half_band, hi + half_band))
            .collect(),
    )
}

/// Almost-sure spectrum `[-sqrt K, sqrt K] + U_{V in supp mu} sigma(A + lambda V)`.
///
/// Exact for point masses and diagonal ensembles; unbounded ensembles are
/// rejected.
pub fn deterministic_spectrum(model: &BetheStripModel) -> Result<Vec<RealInterval>> {
    let s = model.sqrt_k();
    let lam = model.lambda().abs();
    let a = model.onsite();
    let spectrum = match model.ensemble() {
        DisorderEnsemble::PointMass(v) => {
            let ev = model.onsite_matrix(v).eigenvalues();
            bands_around(ev.into_iter().map(|e| (e, e)), s)
        }
        DisorderEnsemble::DiagonalIid(DiagonalLaw::Uniform) => {
            bands_around(a.iter().map(|&ak| (ak - lam, ak + lam)), s)
        }
        DisorderEnsemble::DiagonalIid(DiagonalLaw::Bernoulli) => bands_around(
            a.iter()
                .flat_map(|&ak| [(ak - lam, ak - lam), (ak + lam, ak + lam)]),
            s,
        ),
        DisorderEnsemble::DiagonalIid(DiagonalLaw::Gaussian) => {
            return Err(Error::UnsupportedEnsemble("diag:gauss"))
        }
        DisorderEnsemble::Goe => return Err(Error::UnsupportedEnsemble("goe")),
    };
    Ok(spectrum)
}

/// Outer envelope of the spectrum that also covers unbounded ensembles.
///
/// For bounded ensembles this is [`deterministic_spectrum`]. For Gaussian
/// ensembles the potential is cut at a radius `r` with
/// `P(||V|| > r) <= tail` per site, and every eigenvalue of `A + lambda V`
/// lies within `|lambda| r` of some `a_k`.
pub fn spectral_envelope(model: &BetheStripModel, tail: f64) -> Vec<RealInterval> {
    if let Ok(exact) = deterministic_spectrum(model) {
        return exact;
    }
    let m = model.m();
    let radius = match model.ensemble() {
        // max_k |v_k| with P(|N| > r) <= exp(-r^2 / 2)
        DisorderEnsemble::DiagonalIid(DiagonalLaw::Gaussian) => (2.0 * (m as f64 / tail).ln()).sqrt(),
        // ||V||_2 <= ||V||_F and ||V||_F^2 is chi-square with m(m+1)/2 dof
        _ => chi_square_tail_quantile(m * (m + 1) / 2, tail).sqrt(),
    };
    let spread = model.lambda().abs() * radius;
    bands_around(
        model.onsite().iter().map(|&ak| (ak - spread, ak + spread)),
        model.sqrt_k(),
    )
}

/// Smallest `x` with the Chernoff bound `(x/p)^{p/2} exp((p - x)/2) <= tail`.
fn chi_square_tail_quantile(dof: usize, tail: f64) -> f64 {
    let p = dof as f64;
    let log_bound = |x: f64| 0.5 * p * (x / p).ln() + 0.5 * (p - x);
    let target = tail.ln();
    let (mut lo, mut hi) = (p, p + 10.0);
    while log_bound(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_bound(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Whether `x` lies outside every interval by more than `margin`.
pub fn outside_by(intervals: &[RealInterval], x: f64, margin: f64) -> bool {
    intervals
        .iter()
        .all(|iv| x < iv.lo - margin || x > iv.hi + margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::{stream, Domain};
    use approx::assert_abs_diff_eq;

    fn model(k: usize, a: Vec<f64>) -> BetheStripModel {
        BetheStripModel::free(k, a).unwrap()
    }

    #[test]
    fn iak_examples() {
        let iv = interval_iak(&model(2, vec![-0.5, 0.5]));
        assert_abs_diff_eq!(iv.lo, -(2f64.sqrt()) + 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(iv.hi, 2f64.sqrt() - 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(iv.hi, 0.91421, epsilon = 1e-5);

        let iv = interval_iak(&model(4, vec![0.0]));
        assert_eq!((iv.lo, iv.hi), (-2.0, 2.0));

        let m = model(2, vec![-2.0, 2.0]);
        assert!(interval_iak(&m).is_empty());
        assert!(!m.bands_overlap());
    }

    #[test]
    fn iak_inside_every_shifted_band() {
        for (k, a) in [(2, vec![-0.5, 0.5]), (3, vec![-1.0, 0.0, 0.7]), (5, vec![0.3])] {
            let m = model(k, a.clone());
            let iv = interval_iak(&m);
            let s = (k as f64).sqrt();
            for ak in a {
                assert!(iv.lo >= ak - s && iv.hi <= ak + s);
            }
        }
    }

    #[test]
    fn model_validation() {
        assert!(BetheStripModel::free(1, vec![0.0]).is_err());
        assert!(BetheStripModel::free(2, vec![]).is_err());
        assert!(BetheStripModel::free(2, vec![1.0, 0.0]).is_err());
        let v = RealSymMatrix::identity(3);
        assert!(BetheStripModel::new(2, vec![0.0, 1.0], 1.0, DisorderEnsemble::PointMass(v)).is_err());
    }

    #[test]
    fn point_mass_sample_is_exact() {
        let v = RealSymMatrix::from_diagonal(&[1.0, 2.0]);
        let ens = DisorderEnsemble::PointMass(v.clone());
        let mut rng = stream(1, Domain::Realization, &[0]);
        for _ in 0..5 {
            assert_eq!(ens.sample(2, &mut rng), v);
        }
    }

    #[test]
    fn goe_moments() {
        let n = 100_000;
        let mut rng = stream(11, Domain::Realization, &[0]);
        let (mut s_diag, mut s_off, mut s_off2) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let v = DisorderEnsemble::Goe.sample(2, &mut rng);
            assert!(v.is_symmetric());
            s_diag += v.get(0, 0);
            s_off += v.get(0, 1);
            s_off2 += v.get(0, 1).powi(2);
        }
        let nf = n as f64;
        let se_mean_diag = (1.0 / nf).sqrt();
        let se_mean_off = (0.5 / nf).sqrt();
        assert!((s_diag / nf).abs() < 3.0 * se_mean_diag);
        assert!((s_off / nf).abs() < 3.0 * se_mean_off);
        // Var of x^2 for x ~ N(0, 1/2) is 2 * (1/2)^2
        let var = s_off2 / nf - (s_off / nf).powi(2);
        assert!((var - 0.5).abs() < 3.0 * (0.5 / nf).sqrt());
    }

    #[test]
    fn characteristic_fn_closed_forms() {
        let zero = RealSymMatrix::zeros(2);
        let v0 = RealSymMatrix::from_upper(2, |j, k| [[0.3, -0.7], [0.0, 1.1]][j][k]);
        for ens in [
            DisorderEnsemble::Goe,
            DisorderEnsemble::PointMass(v0.clone()),
            DisorderEnsemble::DiagonalIid(DiagonalLaw::Uniform),
        ] {
            assert_eq!(ens.characteristic_fn(&zero), C64::new(1.0, 0.0));
        }
        let m = RealSymMatrix::from_upper(2, |j, k| [[0.5, 0.25], [0.0, -0.4]][j][k]);
        let got = DisorderEnsemble::PointMass(v0.clone()).characteristic_fn(&m);
        let phase: f64 = -(0.5 * 0.3 + 2.0 * 0.25 * -0.7 + -0.4 * 1.1);
        assert_abs_diff_eq!((got - C64::new(phase.cos(), phase.sin())).norm(), 0.0, epsilon = 1e-15);
        let got = DisorderEnsemble::Goe.characteristic_fn(&m);
        let tr_m2: f64 = 0.25 + 2.0 * 0.0625 + 0.16;
        assert_abs_diff_eq!(got.re, (-tr_m2 / 2.0).exp(), epsilon = 1e-15);
    }

    /// Monte-Carlo mean of `exp(-i Tr(M V))` against the closed forms.
    #[test]
    fn characteristic_fn_matches_monte_carlo() {
        let ensembles = [
            DisorderEnsemble::Goe,
            DisorderEnsemble::DiagonalIid(DiagonalLaw::Uniform),
            DisorderEnsemble::DiagonalIid(DiagonalLaw::Gaussian),
            DisorderEnsemble::DiagonalIid(DiagonalLaw::Bernoulli),
            DisorderEnsemble::PointMass(RealSymMatrix::from_upper(2, |j, k| (j + k) as f64 - 0.5)),
        ];
        let n = 100_000;
        // 200 real comparisons at 3 s.e. would raise a false alarm about 40%
        // of the time, so count the 3 s.e. exceedances instead (expected 0.5)
        // and reject anything beyond 4.5 s.e. outright.
        let mut exceed = Vec::new();
        for (e, ens) in ensembles.iter().enumerate() {
            let mut mrng = stream(5, Domain::TestMatrix, &[e as u64]);
            for t in 0..20 {
                let m = RealSymMatrix::from_upper(2, |_, _| mrng.random_range(-1.5..1.5));
                let mut rng = stream(5, Domain::Realization, &[e as u64, t]);
                let (mut sum, mut sum2) = (C64::new(0.0, 0.0), (0.0, 0.0));
                for _ in 0..n {
                    let v = ens.sample(2, &mut rng);
                    let x = C64::new(0.0, -m.trace_product(&v)).exp();
                    sum += x;
                    sum2.0 += x.re * x.re;
                    sum2.1 += x.im * x.im;
                }
                let mean = sum / n as f64;
                let se_re = ((sum2.0 / n as f64 - mean.re * mean.re).max(0.0) / n as f64).sqrt();
                let se_im = ((sum2.1 / n as f64 - mean.im * mean.im).max(0.0) / n as f64).sqrt();
                let exact = ens.characteristic_fn(&m);
                for (d, se) in [(mean.re - exact.re, se_re), (mean.im - exact.im, se_im)] {
                    let z = if se > 0.0 { d.abs() / se } else if d.abs() < 1e-9 { 0.0 } else { f64::INFINITY };
                    assert!(z < 4.5, "{} test {t}: {mean} vs {exact} ({z} s.e.)", ens.label());
                    if z > 3.0 {
                        exceed.push((ens.label(), t, z));
                    }
                }
            }
        }
        assert!(exceed.len() <= 2, "{exceed:?}");
    }

    #[test]
    fn deterministic_spectrum_examples() {
        let s = deterministic_spectrum(&model(4, vec![0.0])).unwrap();
        assert_eq!(s, vec![RealInterval::new(-2.0, 2.0)]);

        let s = deterministic_spectrum(&model(2, vec![-0.5, 0.5])).unwrap();
        assert_eq!(s.len(), 1);
        assert_abs_diff_eq!(s[0].lo, -(2f64.sqrt()) - 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s[0].hi, 2f64.sqrt() + 0.5, epsilon = 1e-14);

        let m = BetheStripModel::new(
            4,
            vec![0.0],
            1.0,
            DisorderEnsemble::PointMass(RealSymMatrix::from_diagonal(&[1.0])),
        )
        .unwrap();
        let s = deterministic_spectrum(&m).unwrap();
        assert_eq!(s.len(), 1);
        assert_abs_diff_eq!(s[0].lo, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[0].hi, 3.0, epsilon = 1e-14);

        let goe = BetheStripModel::new(2, vec![0.0], 0.1, DisorderEnsemble::Goe).unwrap();
        assert!(matches!(deterministic_spectrum(&goe), Err(Error::UnsupportedEnsemble(_))));
    }

    #[test]
    fn bernoulli_spectrum_can_split() {
        let m = BetheStripModel::new(
            2,
            vec![0.0],
            3.0,
            DisorderEnsemble::DiagonalIid(DiagonalLaw::Bernoulli),
        )
        .unwrap();
        let s = deterministic_spectrum(&m).unwrap();
        assert_eq!(s.len(), 2);
        assert!(outside_by(&s, 0.0, 0.1));
    }

    #[test]
    fn envelope_widens_with_disorder() {
        let m = BetheStripModel::new(2, vec![-0.5, 0.5], 0.1, DisorderEnsemble::Goe).unwrap();
        let env = spectral_envelope(&m, 1e-6);
        assert_eq!(env.len(), 1);
        let free_hi = 2f64.sqrt() + 0.5;
        assert!(env[0].hi > free_hi + 0.3 && env[0].hi < free_hi + 1.0);
        assert_abs_diff_eq!(env[0].lo, -env[0].hi, epsilon = 1e-12);
    }

    #[test]
    fn ensemble_grammar_round_trip() {
        for s in ["goe", "diag:uniform", "diag:gauss", "diag:bernoulli", "point:1,0;0,2", "point:-0.5"] {
            let e = DisorderEnsemble::parse(s).unwrap();
            assert_eq!(DisorderEnsemble::parse(&e.to_string()).unwrap(), e);
        }
        assert!(DisorderEnsemble::parse("point:1,2;3,4").is_err());
        assert!(DisorderEnsemble::parse("cauchy").is_err());
        assert_eq!(parse_onsite("diag:-0.5, 0.5").unwrap(), vec![-0.5, 0.5]);
        assert!(parse_onsite("-0.5,0.5").is_err());
    }
}
