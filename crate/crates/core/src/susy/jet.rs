//! Truncated multivariate power series ("jets") with complex coefficients.

use std::collections::HashMap;
use std::sync::Arc;

use crate::linalg::C64;

/// Monomials in `vars` variables of total degree at most `degree`.
#[derive(Debug)]
pub struct JetLayout {
    vars: usize,
    degree: u32,
    monomials: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl JetLayout {
    pub fn new(vars: usize, degree: u32) -> Arc<Self> {
        let mut monomials = vec![vec![0; vars]];
        for d in 1..=degree {
            let mut next = Vec::new();
            for mono in monomials.iter().filter(|m| m.iter().sum::<u32>() == d - 1) {
                // raise the last nonzero variable or any later one, so each monomial appears once
                let start = mono.iter().rposition(|&e| e > 0).unwrap_or(0);
                for v in start..vars {
                    let mut raised = mono.clone();
                    raised[v] += 1;
                    next.push(raised);
                }
            }
            monomials.extend(next);
        }
        let lookup = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Arc::new(Self { vars, degree, monomials, lookup })
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn position(&self, exps: &[u32]) -> Option<usize> {
        self.lookup.get(exps).copied()
    }

    fn total(&self, i: usize) -> u32 {
        self.monomials[i].iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct Jet {
    layout: Arc<JetLayout>,
    coeffs: Vec<C64>,
}

impl Jet {
    pub fn zero(layout: &Arc<JetLayout>) -> Self {
        Self { layout: layout.clone(), coeffs: vec![C64::new(0.0, 0.0); layout.len()] }
    }

    pub fn constant(layout: &Arc<JetLayout>, c: C64) -> Self {
        let mut out = Self::zero(layout);
        out.coeffs[0] = c;
        out
    }

    /// `c * s_var`.
    pub fn variable(layout: &Arc<JetLayout>, var: usize, c: C64) -> Self {
        let mut out = Self::zero(layout);
        if layout.degree >= 1 {
            let mut exps = vec![0; layout.vars];
            exps[var] = 1;
            out.coeffs[layout.position(&exps).expect("degree-one monomial")] = c;
        }
        out
    }

    pub fn coeff(&self, exps: &[u32]) -> C64 {
        self.layout.position(exps).map_or(C64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { layout: self.layout.clone(), coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn add_assign(&mut self, other: &Jet) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == C64::new(0.0, 0.0))
    }

    /// Truncated product.
    pub fn mul(&self, other: &Jet) -> Jet {
        let layout = &self.layout;
        let mut out = Jet::zero(layout);
        let mut exps = vec![0u32; layout.vars];
        for (i, a) in self.coeffs.iter().enumerate().filter(|(_, a)| **a != C64::new(0.0, 0.0)) {
            let di = layout.total(i);
            for (j, b) in other.coeffs.iter().enumerate().filter(|(_, b)| **b != C64::new(0.0, 0.0)) {
                if di + layout.total(j) > layout.degree {
                    continue;
                }
                for ((e, x), y) in exps.iter_mut().zip(&layout.monomials[i]).zip(&layout.monomials[j]) {
                    *e = x + y;
                }
                out.coeffs[layout.lookup[&exps]] += a * b;
            }
        }
        out
    }

    /// `self^n / n!`, truncated.
    pub fn power_over_factorial(&self, n: u32) -> Jet {
        let mut out = Jet::constant(&self.layout, C64::new(1.0, 0.0));
        for k in 1..=n {
            out = out.mul(self).scale(C64::new(1.0 / f64::from(k), 0.0));
        }
        out
    }
}
