//! Breadth-first layout of the truncated Bethe lattice `B_L`.
//!
//! Site 0 is the root with `K + 1` children; every other site above depth
//! `L` has `K` children. Children of a site occupy a contiguous index range,
//! and sites of one depth form a contiguous block.

use crate::error::{Error, Result};

/// Cap on the dimension `m |B_L|` of finite-volume operators.
pub const MAX_OPERATOR_DIM: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedTree {
    k: usize,
    depth: usize,
    parent: Vec<Option<usize>>,
    first_child: Vec<usize>,
    child_count: Vec<usize>,
    level_start: Vec<usize>,
}

/// `|B_L| = 1 + (K+1)(K^L - 1)/(K - 1)`.
pub fn site_count(k: usize, depth: usize) -> Option<usize> {
    let mut total: usize = 1;
    let mut layer: usize = k + 1;
    for _ in 0..depth {
        total = total.checked_add(layer)?;
        layer = layer.checked_mul(k)?;
    }
    Some(total)
}

impl TruncatedTree {
    /// Builds `B_L` for connectivity `k`; `width` only enters the size cap.
    pub fn new(k: usize, depth: usize, width: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("connectivity {k} < 2")));
        }
        let n = site_count(k, depth)
            .filter(|n| n.checked_mul(width).is_some_and(|d| d <= MAX_OPERATOR_DIM))
            .ok_or(Error::SizeOverflow {
                dim: site_count(k, depth).and_then(|n| n.checked_mul(width)).unwrap_or(usize::MAX),
                limit: MAX_OPERATOR_DIM,
            })?;

        let mut parent = vec![None; n];
        let mut first_child = vec![0; n];
        let mut child_count = vec![0; n];
        let mut level_start = vec![0, 1];
        let mut next = 1;
        for level in 0..depth {
            let (lo, hi) = (level_start[level], level_start[level + 1]);
            for site in lo..hi {
                let kids = if site == 0 { k + 1 } else { k };
                first_child[site] = next;
                child_count[site] = kids;
                for c in next..next + kids {
                    parent[c] = Some(site);
                }
                next += kids;
            }
            level_start.push(next);
        }
        debug_assert_eq!(next, n);
        for site in level_start[depth]..n {
            first_child[site] = n;
        }
        Ok(Self {
            k,
            depth,
            parent,
            first_child,
            child_count,
            level_start,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, site: usize) -> Option<usize> {
        self.parent[site]
    }

    pub fn children(&self, site: usize) -> std::ops::Range<usize> {
        self.first_child[site]..self.first_child[site] + self.child_count[site]
    }

    /// Sites at distance `level` from the root.
    pub fn level(&self, level: usize) -> std::ops::Range<usize> {
        self.level_start[level]..self.level_start[level + 1]
    }

    /// Undirected edges `(parent, child)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (p, c)))
    }
}

pub fn build_tree(k: usize, depth: usize, width: usize) -> Result<TruncatedTree> {
    TruncatedTree::new(k, depth, width)
}
