use std::fmt;

use crate::error::{Error, Result};
use crate::fixedpoint::upper_slots;

/// An upper-triangular matrix `J` of non-negative integers, stored as its
/// exponents over the slots `(j, k)`, `j <= k`, taken row by row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonomialIndex {
    m: usize,
    exps: Vec<u32>,
}

/// Number of upper-triangular slots of an `m x m` matrix.
pub fn slot_count(m: usize) -> usize {
    m * (m + 1) / 2
}

impl MonomialIndex {
    pub fn zero(m: usize) -> Self {
        Self { m, exps: vec![0; slot_count(m)] }
    }

    pub fn from_exponents(m: usize, exps: Vec<u32>) -> Result<Self> {
        if exps.len() != slot_count(m) {
            return Err(Error::InvalidArgument(format!(
                "width {m} has {} slots, got {} exponents",
                slot_count(m),
                exps.len()
            )));
        }
        Ok(Self { m, exps })
    }

    /// From a full matrix; entries below the diagonal must vanish.
    pub fn from_matrix(rows: &[Vec<u32>]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidArgument("index matrix must be square".into()));
        }
        let mut exps = Vec::with_capacity(slot_count(m));
        for (j, row) in rows.iter().enumerate() {
            if row[..j].iter().any(|&x| x != 0) {
                return Err(Error::InvalidArgument("index matrix must be upper triangular".into()));
            }
            exps.extend_from_slice(&row[j..]);
        }
        Ok(Self { m, exps })
    }

    /// The unit index at slot `(j, k)`.
    pub fn unit(m: usize, j: usize, k: usize) -> Self {
        let (j, k) = if j <= k { (j, k) } else { (k, j) };
        let mut out = Self::zero(m);
        let pos = upper_slots(m).iter().position(|&s| s == (j, k)).expect("slot inside the matrix");
        out.exps[pos] = 1;
        out
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    /// `|J|`, the sum of all entries.
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    /// `J_jk`; zero below the diagonal.
    pub fn get(&self, j: usize, k: usize) -> u32 {
        if j > k {
            return 0;
        }
        // slot position of (j, k) in row-by-row order
        let pos = j * self.m - j * (j + 1) / 2 + k;
        self.exps[pos]
    }

    /// `J! = prod J_jk!`.
    pub fn factorial(&self) -> f64 {
        self.exps.iter().map(|&e| (1..=e).map(f64::from).product::<f64>()).product()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { m: self.m, exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect() }
    }

    /// Sort key: ascending degree, then descending exponents.
    pub fn basis_key(&self) -> (u32, std::cmp::Reverse<Vec<u32>>) {
        (self.degree(), std::cmp::Reverse(self.exps.clone()))
    }
}

impl fmt::Display for MonomialIndex {
    /// Rows of the upper triangle separated by `;`, e.g. `1,0;2` for `m = 2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.m)
            .map(|j| (j..self.m).map(|k| self.get(j, k).to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of indices of degree at most `d`: `C(p + d, d)` with `p = m(m+1)/2`.
pub fn index_count(m: usize, d: usize) -> usize {
    binomial(slot_count(m) + d, d)
}

fn compositions(slots: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == slots {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(slots, total - first, prefix, out);
        prefix.pop();
    }
}

/// All `J` with `|J| <= d`, by ascending degree and, within a degree, by
/// descending exponent vector (so `e11` precedes `e12` precedes `e22`).
pub fn enumerate_indices(m: usize, d: usize) -> Result<Vec<MonomialIndex>> {
    if m == 0 {
        return Err(Error::InvalidArgument("width must be positive".into()));
    }
    let p = slot_count(m);
    let mut out = Vec::with_capacity(index_count(m, d));
    for deg in 0..=d as u32 {
        let mut block = Vec::new();
        compositions(p, deg, &mut Vec::with_capacity(p), &mut block);
        out.extend(block.into_iter().map(|exps| MonomialIndex { m, exps }));
    }
    assert_eq!(out.len(), index_count(m, d), "index enumeration count");
    Ok(out)
}
