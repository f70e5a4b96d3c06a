//! Exact finite-volume resolvents on `B_L`.
//!
//! The operator `H_{lambda,L}` is assembled as a sparse real symmetric
//! matrix and `(H - z) u = delta` is solved by a generic sparse `L D L^T`
//! factorization with a minimum-degree ordering. Nothing here uses the tree
//! recursion, so it serves as an independent check of it.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{ComplexSymMatrix, RealSymMatrix, SpectralPoint, C64, PIVOT_FLOOR, SOLVE_RESIDUAL_TOL};
use crate::model::BetheStripModel;
use crate::recursion::estimate::{batch_ranges, batch_statistics, Batch, RealEstimate};
use crate::recursion::{draw_realization, BATCHES};
use crate::streams::{stream, Domain};
use crate::tree::TruncatedTree;

/// Hopping between neighbouring sites, per orbital.
pub const HOPPING: f64 = 0.5;
/// Default agreement threshold of [`crosscheck`].
pub const CROSSCHECK_TOL: f64 = 1e-8;

/// `H_{lambda,L}` for one realization, as sparse symmetric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledOperator {
    width: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl AssembledOperator {
    pub fn assemble(tree: &TruncatedTree, model: &BetheStripModel, realization: &[RealSymMatrix]) -> Result<Self> {
        if realization.len() != tree.len() {
            return Err(Error::InvalidArgument("realization length differs from the site count".into()));
        }
        let m = model.m();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m * tree.len()];
        for (site, v) in realization.iter().enumerate() {
            let block = model.onsite_matrix(v);
            for j in 0..m {
                for k in 0..m {
                    let x = block.get(j, k);
                    if x != 0.0 || j == k {
                        rows[site * m + j].push((site * m + k, x));
                    }
                }
            }
        }
        for (a, b) in tree.edges() {
            for j in 0..m {
                rows[a * m + j].push((b * m + j, HOPPING));
                rows[b * m + j].push((a * m + j, HOPPING));
            }
        }
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
        }
        Ok(Self { width: m, rows })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.rows[r].iter().find(|&&(j, _)| j == c).map_or(0.0, |&(_, x)| x)
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(r, row)| row.iter().all(|&(c, x)| self.entry(c, r) == x))
    }

    /// `(H - z) u`.
    pub fn apply_shifted(&self, z: C64, u: &[C64]) -> Vec<C64> {
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| row.iter().map(|&(c, x)| x * u[c]).sum::<C64>() - z * u[r])
            .collect()
    }

    /// Factorizes `H - z`.
    pub fn factor(&self, z: C64) -> Result<SparseLdlt> {
        SparseLdlt::new(self, z)
    }
}

/// `P (H - z) P^T = L D L^T` for complex symmetric `H - z`, without pivoting.
///
/// For `Im z > 0` the imaginary part of every Schur complement is `Im z` times
/// a positive definite matrix, so no pivot can vanish.
#[derive(Debug, Clone)]
pub struct SparseLdlt {
    order: Vec<usize>,
    /// `columns[v]`: the entries `(u, L_uv)` below the pivot of `v`.
    columns: Vec<Vec<(usize, C64)>>,
    pivots: Vec<C64>,
}

impl SparseLdlt {
    fn new(op: &AssembledOperator, z: C64) -> Result<Self> {
        let n = op.dim();
        let mut work: Vec<BTreeMap<usize, C64>> = op
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let mut map: BTreeMap<usize, C64> = row.iter().map(|&(c, x)| (c, C64::new(x, 0.0))).collect();
                *map.entry(r).or_insert(C64::new(0.0, 0.0)) -= z;
                map
            })
            .collect();
        let scale = work.iter().flat_map(|r| r.values()).map(|x| x.norm()).fold(0.0, f64::max);
        let floor = PIVOT_FLOOR * scale.max(1.0);
        let degree = |map: &BTreeMap<usize, C64>| map.len() - 1;
        let mut queue: BTreeSet<(usize, usize)> = work.iter().enumerate().map(|(v, r)| (degree(r), v)).collect();
        let mut order = Vec::with_capacity(n);
        let mut columns = vec![Vec::new(); n];
        let mut pivots = vec![C64::new(0.0, 0.0); n];
        while let Some((_, v)) = queue.pop_first() {
            let mut row = std::mem::take(&mut work[v]);
            let d = row.remove(&v).unwrap_or(C64::new(0.0, 0.0));
            if d.norm() < floor {
                return Err(Error::SingularMatrix { pivot: d.norm(), floor });
            }
            let neighbours: Vec<(usize, C64)> = row.into_iter().collect();
            for &(u, _) in &neighbours {
                queue.remove(&(degree(&work[u]), u));
            }
            for &(u, a_uv) in &neighbours {
                work[u].remove(&v);
                for &(w, a_vw) in &neighbours {
                    *work[u].entry(w).or_insert(C64::new(0.0, 0.0)) -= a_uv * a_vw / d;
                }
            }
            for &(u, _) in &neighbours {
                queue.insert((degree(&work[u]), u));
            }
            columns[v] = neighbours.into_iter().map(|(u, a)| (u, a / d)).collect();
            pivots[v] = d;
            order.push(v);
        }
        Ok(Self { order, columns, pivots })
    }

    pub fn solve(&self, rhs: &[C64]) -> Vec<C64> {
        let mut x = rhs.to_vec();
        for &v in &self.order {
            let xv = x[v];
            for &(u, l) in &self.columns[v] {
                x[u] -= l * xv;
            }
        }
        for &v in &self.order {
            x[v] /= self.pivots[v];
        }
        for &v in self.order.iter().rev() {
            let s: C64 = self.columns[v].iter().map(|&(u, l)| l * x[u]).sum();
            x[v] -= s;
        }
        x
    }

    /// Number of stored off-diagonal factor entries.
    pub fn fill(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }
}

fn unit(n: usize, i: usize) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); n];
    e[i] = C64::new(1.0, 0.0);
    e
}

fn residual(op: &AssembledOperator, z: C64, u: &[C64], col: usize) -> f64 {
    op.apply_shifted(z, u)
        .iter()
        .enumerate()
        .map(|(i, v)| (v - if i == col { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max)
}

/// A resolvent column with its solve residual `max |(H - z) u - delta|`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenColumn {
    pub values: Vec<C64>,
    pub residual: f64,
}

fn check_point(point: SpectralPoint) -> Result<()> {
    if point.eta <= 0.0 {
        return Err(Error::InvalidArgument("finite-volume resolvents need eta > 0".into()));
    }
    Ok(())
}

/// Column `(site, orbital)` of `(H_{lambda,L} - z)^{-1}`.
pub fn green_column(
    tree: &TruncatedTree,
    model: &BetheStripModel,
    realization: &[RealSymMatrix],
    point: SpectralPoint,
    site: usize,
    orbital: usize,
) -> Result<GreenColumn> {
    check_point(point)?;
    if site >= tree.len() || orbital >= model.m() {
        return Err(Error::InvalidArgument("site or orbital out of range".into()));
    }
    let op = AssembledOperator::assemble(tree, model, realization)?;
    let col = site * model.m() + orbital;
    let values = op.factor(point.z())?.solve(&unit(op.dim(), col));
    let residual = residual(&op, point.z(), &values, col);
    Ok(GreenColumn { values, residual })
}

/// The `m x m` block `G_{lambda,L}(0, 0; z)` from `m` solves.
#[derive(Debug, Clone, PartialEq)]
pub struct RootBlock {
    pub green: ComplexSymMatrix,
    /// Largest solve residual.
    pub residual: f64,
    /// `max |G_jk - G_kj|` before symmetrization.
    pub asymmetry: f64,
}

pub fn root_block(
    tree: &TruncatedTree,
    model: &BetheStripModel,
    realization: &[RealSymMatrix],
    point: SpectralPoint,
) -> Result<RootBlock> {
    check_point(point)?;
    let op = AssembledOperator::assemble(tree, model, realization)?;
    root_block_of(&op, point)
}

fn root_block_of(op: &AssembledOperator, point: SpectralPoint) -> Result<RootBlock> {
    let m = op.width();
    let factor = op.factor(point.z())?;
    let mut raw = vec![C64::new(0.0, 0.0); m * m];
    let mut worst = 0.0f64;
    for k in 0..m {
        let u = factor.solve(&unit(op.dim(), k));
        worst = worst.max(residual(op, point.z(), &u, k));
        for j in 0..m {
            raw[j * m + k] = u[j];
        }
    }
    let mut asymmetry = 0.0f64;
    for j in 0..m {
        for k in 0..m {
            asymmetry = asymmetry.max((raw[j * m + k] - raw[k * m + j]).norm());
        }
    }
    let green = ComplexSymMatrix::from_upper(m, |j, k| 0.5 * (raw[j * m + k] + raw[k * m + j]));
    if worst > SOLVE_RESIDUAL_TOL {
        return Err(Error::NoConvergence { iterations: 1, residual: worst });
    }
    Ok(RootBlock { green, residual: worst, asymmetry })
}

/// The realization with index `r` of a run seeded by `seed`.
pub fn shared_realization(model: &BetheStripModel, tree: &TruncatedTree, seed: u64, r: u64) -> Vec<RealSymMatrix> {
    draw_realization(model, tree.len(), &mut stream(seed, Domain::Realization, &[r]))
}

/// One grid row of [`dos_histogram`].
#[derive(Debug, Clone, PartialEq)]
pub struct DosRow {
    pub energy: f64,
    pub dos: RealEstimate,
}

/// Realization mean of `(1 / (m pi)) Im Tr G_{lambda,L}(0, 0; E + i eta)` on a grid.
pub fn dos_histogram(
    tree: &TruncatedTree,
    model: &BetheStripModel,
    energies: &[f64],
    eta: f64,
    realizations: usize,
    seed: u64,
) -> Result<Vec<DosRow>> {
    if realizations == 0 {
        return Err(Error::InvalidArgument("need at least one realization".into()));
    }
    let points = energies.iter().map(|&e| SpectralPoint::new(e, eta)).collect::<Result<Vec<_>>>()?;
    points.first().map_or(Ok(()), |p| check_point(*p))?;
    let scale = 1.0 / (model.m() as f64 * std::f64::consts::PI);
    let batches: Vec<Batch> = batch_ranges(realizations, BATCHES)
        .into_par_iter()
        .map(|range| {
            let mut batch = Batch::new(points.len());
            for r in range {
                let realization = shared_realization(model, tree, seed, r as u64);
                let op = AssembledOperator::assemble(tree, model, &realization)?;
                let row = points
                    .iter()
                    .map(|&p| Ok(scale * root_block_of(&op, p)?.green.trace().im))
                    .collect::<Result<Vec<f64>>>()?;
                batch.push(&row);
            }
            Ok(batch)
        })
        .collect::<Result<_>>()?;
    let (mean, se, count) = batch_statistics(&batches);
    Ok(energies
        .iter()
        .enumerate()
        .map(|(i, &energy)| DosRow { energy, dos: RealEstimate { mean: mean[i], std_error: se[i], count } })
        .collect())
}

/// Outcome of comparing the recursion with the direct solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckReport {
    pub connectivity: usize,
    pub width: usize,
    pub depth: usize,
    pub realizations: usize,
    pub max_deviation: f64,
    pub max_residual: f64,
    pub max_asymmetry: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Runs `realizations` comparisons of `sample_tree` with [`root_block`].
///
/// The recursion draws realization `r` from `stream(seed, Realization, [r])`;
/// the direct solve draws it from `ed_seed`. Equal seeds share realizations;
/// distinct seeds make the check fail, which exercises the harness itself.
pub fn crosscheck(
    model: &BetheStripModel,
    depth: usize,
    point: SpectralPoint,
    realizations: usize,
    seed: u64,
    ed_seed: u64,
) -> Result<CrosscheckReport> {
    check_point(point)?;
    let tree = TruncatedTree::new(model.k(), depth, model.m())?;
    let results = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let recursion =
                crate::recursion::sample_tree(point, model, depth, &mut stream(seed, Domain::Realization, &[r]))?;
            let direct = root_block(&tree, model, &shared_realization(model, &tree, ed_seed, r), point)?;
            Ok((recursion.distance(&direct.green), direct.residual, direct.asymmetry))
        })
        .collect::<Result<Vec<_>>>()?;
    let fold = |f: fn(&(f64, f64, f64)) -> f64| results.iter().map(f).fold(0.0, f64::max);
    let max_deviation = fold(|r| r.0);
    Ok(CrosscheckReport {
        connectivity: model.k(),
        width: model.m(),
        depth,
        realizations,
        max_deviation,
        max_residual: fold(|r| r.1),
        max_asymmetry: fold(|r| r.2),
        tolerance: CROSSCHECK_TOL,
        passed: max_deviation <= CROSSCHECK_TOL,
    })
}
