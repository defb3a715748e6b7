//! The transfer operator in the Fourier basis, its spectrum, invariant density
//! and resolvent, plus the finite indicator-basis matrix of a Markov map.

use std::io::Write;

use faer::{c64, Mat};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::circle_map::{CircleMap, PiecewiseLinearMap};
use crate::error::{Error, Result};
use crate::fourier::{forward_dft, inverse_dft, FourierVector, GridSamples, TWO_PI};
use crate::linalg::{Eigensystem, Lu};

/// Default ratio between the assembly grid and the number of modes.
pub const DEFAULT_FINE_FACTOR: usize = 8;
/// Distance within which a requested eigenvalue must be found.
pub const EIGEN_TARGET_TOL: f64 = 1e-2;
/// Minimum separation from the rest of the spectrum for a simple eigenvalue.
pub const EIGEN_GAP_TOL: f64 = 1e-6;
/// Eigenvalues whose imaginary part is below this are treated as real.
pub const REAL_EIGENVALUE_TOL: f64 = 1e-8;
/// Largest admissible mean of a resolvent right-hand side.
pub const MEAN_ZERO_TOL: f64 = 1e-8;

/// `L̂_{nm} = ∫ L(e_m) ē_n` for `n, m ∈ {−N/2+1, …, N/2}`, stored row-major.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    size: usize,
    fine_factor: usize,
    entries: Vec<C64>,
}

impl TransferMatrix {
    /// Assembles `L̂_N` by sampling `e_n∘T` on `fine_factor·N` points and
    /// reading off the DFT coefficients; rows are computed in parallel.
    ///
    /// The frequency-`N/2` slot stands for `cos(πNx)`, as in
    /// [`FourierVector`] evaluation: its column is the average of the images of
    /// `e_{±N/2}` and its row collects the `±N/2` coefficients of each image.
    /// This keeps the truncated operator exactly real.
    pub fn assemble(map: &CircleMap, size: usize, fine_factor: usize) -> Result<Self> {
        if size < 16 || !size.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("mode count must be even and >= 16, got {size}")));
        }
        if fine_factor == 0 {
            return Err(Error::InvalidArgument("fine-grid factor must be positive".into()));
        }
        let m = fine_factor * size;
        let lift = map.sample_lift(m)?;
        let half = (size / 2) as i64;
        let fine_half = (m / 2) as i64;
        // raw[i][k] = conj(ĥ_n[k − N/2]) for n = i − N/2 + 1, columns −N/2..=N/2.
        let raw: Vec<Vec<C64>> = (0..size)
            .into_par_iter()
            .map(|i| {
                let n = i as i64 - half + 1;
                let h = GridSamples::new(lift.iter().map(|t| C64::from_polar(1.0, TWO_PI * n as f64 * t)).collect());
                let hh = forward_dft(&h)?;
                let at = |k: i64| hh.get(if k <= -fine_half { k + m as i64 } else { k });
                Ok((-half..=half).map(|k| at(k).conj()).collect())
            })
            .collect::<Result<_>>()?;
        // e_{−N/2}∘T is the conjugate of e_{N/2}∘T.
        let top = &raw[size - 1];
        let bottom: Vec<C64> = (0..=size).map(|k| top[size - k].conj()).collect();
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in raw.iter().enumerate() {
            let row: Vec<C64> = if i + 1 == size { row.iter().zip(&bottom).map(|(a, b)| a + b).collect() } else { row.clone() };
            entries.extend_from_slice(&row[1..size]);
            entries.push((row[0] + row[size]) * 0.5);
        }
        Ok(Self { size, fine_factor, entries })
    }

    /// Builds a matrix from explicit row-major entries.
    pub fn from_entries(size: usize, entries: Vec<C64>) -> Result<Self> {
        if !size.is_multiple_of(2) || size == 0 {
            return Err(Error::OddSize(size));
        }
        if entries.len() != size * size {
            return Err(Error::SizeMismatch { left: entries.len(), right: size * size });
        }
        Ok(Self { size, fine_factor: 0, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn fine_factor(&self) -> usize {
        self.fine_factor
    }

    fn idx(&self, n: i64) -> usize {
        let half = (self.size / 2) as i64;
        assert!(n > -half && n <= half, "frequency {n} out of range");
        (n + half - 1) as usize
    }

    /// Entry `L̂_{nm}` addressed by frequencies.
    pub fn entry(&self, n: i64, m: i64) -> C64 {
        self.entries[self.idx(n) * self.size + self.idx(m)]
    }

    /// Row-major entries in frequency order.
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn to_mat(&self) -> Mat<c64> {
        Mat::from_fn(self.size, self.size, |i, j| self.entries[i * self.size + j])
    }

    /// `(L̂v)_n = Σ_m L̂_{nm} v_m`.
    pub fn apply(&self, v: &FourierVector) -> Result<FourierVector> {
        if v.size() != self.size {
            return Err(Error::SizeMismatch { left: self.size, right: v.size() });
        }
        let x = v.coeffs();
        let out = self
            .entries
            .chunks_exact(self.size)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect();
        FourierVector::from_coeffs(out)
    }

    /// Dense eigendecomposition.
    pub fn eigensystem(&self) -> Result<Eigensystem> {
        Eigensystem::new(self.to_mat().as_ref())
    }

    /// The `top_k` eigenvalues of largest modulus, in decreasing modulus.
    pub fn spectrum(&self, top_k: usize) -> Result<Vec<C64>> {
        if top_k > self.size {
            return Err(Error::InvalidArgument(format!("top_k {top_k} exceeds matrix size {}", self.size)));
        }
        let mut values = crate::linalg::eigenvalues(self.to_mat().as_ref())?;
        sort_by_modulus(&mut values);
        values.truncate(top_k);
        Ok(values)
    }

    /// The simple eigenvalue nearest `target` and its right eigenvector.
    ///
    /// Real eigenvalues get a real-valued eigenvector, scaled to unit `ℓ²` norm
    /// with the largest coefficient having positive real part.
    pub fn eigenpair(&self, target: C64) -> Result<(C64, FourierVector)> {
        let es = self.eigensystem()?;
        let (i, lambda) = es.select(target, EIGEN_TARGET_TOL, EIGEN_GAP_TOL)?;
        let mut v = FourierVector::from_coeffs(es.vector(i))?;
        if lambda.im.abs() <= REAL_EIGENVALUE_TOL {
            v = v.align_real_phase();
            let norm = v.norm_l2();
            let pivot = v.coeffs().iter().copied().fold(C64::new(0.0, 0.0), |p, c| if c.norm() > p.norm() * (1.0 + 1e-12) { c } else { p });
            let sign = if pivot.re < 0.0 { -1.0 } else { 1.0 };
            v = v * (sign / norm);
            return Ok((C64::new(lambda.re, 0.0), v));
        }
        Ok((lambda, v))
    }

    /// Leading eigenvector normalised to unit mass and checked for positivity on a `4N` grid.
    pub fn invariant_density(&self) -> Result<FourierVector> {
        let (_, v) = self.eigenpair(C64::new(1.0, 0.0))?;
        let a0 = v.get(0);
        if a0.norm() < 1e-14 {
            return Err(Error::Singular("leading eigenvector has zero mean".into()));
        }
        let mut f = v.scale(1.0 / a0).symmetrize_real();
        f.set(0, C64::new(1.0, 0.0));
        let min = inverse_dft(&f, 4 * self.size)?.values().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        if min < -1e-6 {
            return Err(Error::NegativeDensity(min));
        }
        Ok(f)
    }

    /// Factorises `I − L̂` restricted to mean-zero functions.
    pub fn resolvent(&self) -> Result<Resolvent> {
        Resolvent::new(self)
    }

    /// One-shot `(I − L̂)⁻¹ rhs` on the mean-zero subspace.
    pub fn resolvent_solve(&self, rhs: &FourierVector) -> Result<FourierVector> {
        self.resolvent()?.solve(rhs)
    }

    /// Writes `n,m,re,im` rows in frequency order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,m,re,im")?;
        let half = (self.size / 2) as i64;
        for (i, row) in self.entries.chunks_exact(self.size).enumerate() {
            for (j, a) in row.iter().enumerate() {
                writeln!(w, "{},{},{},{}", i as i64 - half + 1, j as i64 - half + 1, a.re, a.im)?;
            }
        }
        Ok(())
    }
}

/// Sorts by decreasing modulus, then decreasing real and imaginary part.
pub fn sort_by_modulus(values: &mut [C64]) {
    values.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
}

/// Writes `re,im,modulus` rows.
pub fn write_spectrum_csv<W: Write>(values: &[C64], mut w: W) -> Result<()> {
    writeln!(w, "re,im,modulus")?;
    for v in values {
        writeln!(w, "{},{},{}", v.re, v.im, v.norm())?;
    }
    Ok(())
}

/// `1 / inf T'`, the bound on the essential spectral radius.
pub fn essential_bound(map: &CircleMap) -> Result<f64> {
    Ok(1.0 / map.min_derivative(crate::circle_map::EXPANSIVITY_GRID)?)
}

/// A reusable LU factorisation of `I − L̂` with the zero mode removed.
pub struct Resolvent {
    op: TransferMatrix,
    lu: Lu,
}

impl Resolvent {
    fn new(op: &TransferMatrix) -> Result<Self> {
        let n = op.size;
        let zero = op.idx(0);
        let keep: Vec<usize> = (0..n).filter(|&i| i != zero).collect();
        let a = Mat::<c64>::from_fn(n - 1, n - 1, |r, c| {
            let (i, j) = (keep[r], keep[c]);
            let id = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            id - op.entries[i * n + j]
        });
        Ok(Self { op: op.clone(), lu: Lu::new(a.as_ref()) })
    }

    pub fn operator(&self) -> &TransferMatrix {
        &self.op
    }

    /// Solves `(I − L̂) y = rhs` with `y_0 = 0`. The right-hand side must be mean-zero.
    pub fn solve(&self, rhs: &FourierVector) -> Result<FourierVector> {
        let n = self.op.size;
        if rhs.size() != n {
            return Err(Error::SizeMismatch { left: n, right: rhs.size() });
        }
        let mean = rhs.get(0).norm();
        if mean > MEAN_ZERO_TOL {
            return Err(Error::NotMeanZero(mean));
        }
        let zero = self.op.idx(0);
        let b: Vec<C64> = rhs.coeffs().iter().enumerate().filter(|(i, _)| *i != zero).map(|(_, v)| *v).collect();
        let x = self.lu.solve(&b);
        let mut y = Vec::with_capacity(n);
        y.extend_from_slice(&x[..zero]);
        y.push(C64::new(0.0, 0.0));
        y.extend_from_slice(&x[zero..]);
        let y = FourierVector::from_coeffs(y)?;
        let residual = self.residual(&y, rhs)?;
        if !residual.is_finite() || residual > 1e-8 * (1.0 + rhs.norm_l2()) {
            return Err(Error::Singular(format!("resolvent residual {residual:e}")));
        }
        Ok(y)
    }

    /// `‖(I − L̂) y − rhs‖₂`.
    pub fn residual(&self, y: &FourierVector, rhs: &FourierVector) -> Result<f64> {
        let ly = self.op.apply(y)?;
        Ok((&(y - &ly) - rhs).norm_l2())
    }
}

/// The transfer operator of a piecewise-linear Markov map on the span of the
/// partition indicators: `M_{ij} = 1/slope_j` when `I_i ⊆ T(I_j)` (mod 1).
#[derive(Clone, Debug)]
pub struct MarkovMatrix {
    entries: Vec<f64>,
    lengths: Vec<f64>,
    slopes: Vec<f64>,
}

impl MarkovMatrix {
    pub fn new(map: &PiecewiseLinearMap) -> Result<Self> {
        map.validate_markov(1e-9)?;
        let x = map.breakpoints();
        let y = map.images();
        let k = map.intervals();
        let slopes = map.slopes();
        let tol = 1e-9;
        let mut entries = vec![0.0; k * k];
        for j in 0..k {
            let (lo, hi) = (y[j], y[j + 1]);
            for i in 0..k {
                let shift = (lo - x[i]).ceil() - 1.0;
                let covered = (0..3).any(|s| {
                    let off = shift + s as f64;
                    x[i] + off >= lo - tol && x[i + 1] + off <= hi + tol
                });
                if covered {
                    entries[i * k + j] = 1.0 / slopes[j];
                }
            }
        }
        let lengths = x.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self { entries, lengths, slopes })
    }

    /// Builds the matrix for a piecewise-linear [`CircleMap`].
    pub fn from_map(map: &CircleMap) -> Result<Self> {
        match map {
            CircleMap::PiecewiseLinearMarkov(pl) => Self::new(pl),
            _ => Err(Error::InvalidArgument("Markov matrix requires a piecewise-linear map".into())),
        }
    }

    pub fn size(&self) -> usize {
        self.lengths.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size() + j]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    fn to_mat(&self) -> Mat<f64> {
        let k = self.size();
        Mat::from_fn(k, k, |i, j| self.entries[i * k + j])
    }

    /// Eigenvalues sorted by decreasing modulus.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let mut v = crate::linalg::real_eigenvalues(self.to_mat().as_ref())?;
        sort_by_modulus(&mut v);
        Ok(v)
    }

    /// The largest real eigenvalue strictly below the leading one.
    pub fn second_real_eigenvalue(&self) -> Result<f64> {
        let mut reals: Vec<f64> =
            self.eigenvalues()?.into_iter().filter(|z| z.im.abs() < 1e-10).map(|z| z.re).collect();
        reals.sort_by(|a, b| b.total_cmp(a));
        reals
            .into_iter()
            .find(|r| *r < 1.0 - 1e-9)
            .ok_or_else(|| Error::Eigensolver("no real subdominant eigenvalue".into()))
    }

    /// `1 / min slope`.
    pub fn essential_bound(&self) -> f64 {
        1.0 / self.slopes.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest violation of `Σ_i |I_i| M_{ij} = |I_j|`.
    pub fn mass_defect(&self) -> f64 {
        let k = self.size();
        (0..k)
            .map(|j| {
                let s: f64 = (0..k).map(|i| self.lengths[i] * self.entry(i, j)).sum();
                (s - self.lengths[j]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Density values on each interval of the fixed point, normalised to unit mass.
    pub fn stationary_density(&self) -> Result<Vec<f64>> {
        let k = self.size();
        let m = Mat::<c64>::from_fn(k, k, |i, j| C64::new(self.entries[i * k + j], 0.0));
        let es = Eigensystem::new(m.as_ref())?;
        let (i, _) = es.select(C64::new(1.0, 0.0), EIGEN_TARGET_TOL, EIGEN_GAP_TOL)?;
        let v: Vec<f64> = es.vector(i).into_iter().map(|z| z.re).collect();
        let mass: f64 = v.iter().zip(&self.lengths).map(|(a, l)| a * l).sum();
        Ok(v.into_iter().map(|a| a / mass).collect())
    }
}
