//! Thin wrappers over `faer` for the dense eigensolves and LU solves.
//!
//! faer is built without its rayon backend, so every call is single-threaded
//! and bitwise reproducible.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{c64, Mat, MatRef};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Full eigendecomposition of a dense complex matrix.
pub struct Eigensystem {
    values: Vec<C64>,
    vectors: Mat<c64>,
}

impl Eigensystem {
    pub fn new(a: MatRef<'_, c64>) -> Result<Self> {
        let evd = a.eigen().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let values = evd.S().column_vector().iter().copied().collect();
        Ok(Self { values, vectors: evd.U().to_owned() })
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.vectors.col(i).iter().copied().collect()
    }

    /// Index of the eigenvalue nearest `target`, with its distance and the gap
    /// to the nearest other eigenvalue. Ties resolve to the smallest index.
    pub fn nearest(&self, target: C64) -> (usize, f64, f64) {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, v) in self.values.iter().enumerate() {
            let d = (v - target).norm();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        let chosen = self.values[best];
        let gap = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != best)
            .map(|(_, v)| (v - chosen).norm())
            .fold(f64::INFINITY, f64::min);
        (best, best_d, gap)
    }

    /// Selects the simple eigenvalue nearest `target`.
    pub fn select(&self, target: C64, tol: f64, min_gap: f64) -> Result<(usize, C64)> {
        let (i, d, gap) = self.nearest(target);
        if d > tol {
            return Err(Error::EigenvalueNotFound { target, tol });
        }
        if gap <= min_gap {
            return Err(Error::NonSimpleEigenvalue { value: self.values[i], gap });
        }
        Ok((i, self.values[i]))
    }
}

pub fn eigenvalues(a: MatRef<'_, c64>) -> Result<Vec<C64>> {
    a.eigenvalues().map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

pub fn real_eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<C64>> {
    a.eigenvalues().map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// A reusable LU factorisation.
pub struct Lu {
    lu: PartialPivLu<c64>,
    n: usize,
}

impl Lu {
    pub fn new(a: MatRef<'_, c64>) -> Self {
        Self { lu: a.partial_piv_lu(), n: a.nrows() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[C64]) -> Vec<C64> {
        let b = Mat::<c64>::from_fn(self.n, 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}
