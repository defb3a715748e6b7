//! Periodic grids, discrete Fourier transforms and Sobolev weights on the circle.
//!
//! A [`FourierVector`] of even size `N` stores the coefficients `a_n` of
//! `f(x) = Σ a_n e_n(x)`, `e_n(x) = exp(2πinx)`, for `n = -N/2+1 ..= N/2`.
//! The forward transform carries the `1/M` factor, so coefficients are
//! rectangle-rule approximations of `∫ f ē_n`.
//!
//! The Nyquist coefficient `a_{N/2}` is shared between `±N/2`: zero-padding to
//! a finer grid splits it in half across both frequencies, truncation folds
//! `±N/2` back together. On the native `N`-grid both readings coincide.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub(crate) const TWO_PI: f64 = 2.0 * PI;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

fn check_even(size: usize) -> Result<()> {
    if size == 0 || !size.is_multiple_of(2) {
        return Err(Error::OddSize(size));
    }
    Ok(())
}

/// Fourier coefficients of a periodic function, indexed by frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierVector {
    coeffs: Vec<C64>,
}

impl FourierVector {
    /// Zero vector. Panics on odd or zero `size`.
    pub fn zeros(size: usize) -> Self {
        assert!(size > 0 && size.is_multiple_of(2), "FourierVector size must be even, got {size}");
        Self { coeffs: vec![C64::new(0.0, 0.0); size] }
    }

    /// Wraps coefficients stored in frequency order `-N/2+1 ..= N/2`.
    pub fn from_coeffs(coeffs: Vec<C64>) -> Result<Self> {
        check_even(coeffs.len())?;
        Ok(Self { coeffs })
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(i64) -> C64) -> Self {
        let mut v = Self::zeros(size);
        for i in 0..size {
            v.coeffs[i] = f(v.freq(i));
        }
        v
    }

    /// The single mode `e_n`.
    pub fn mode(size: usize, n: i64) -> Self {
        let mut v = Self::zeros(size);
        v.set(n, C64::new(1.0, 0.0));
        v
    }

    pub fn constant(size: usize, value: f64) -> Self {
        Self::mode(size, 0) * value
    }

    /// `cos(2πkx)` for `0 < k < N/2`.
    pub fn cosine(size: usize, k: i64) -> Self {
        let mut v = Self::zeros(size);
        v.set(k, C64::new(0.5, 0.0));
        v.set(-k, C64::new(0.5, 0.0));
        v
    }

    /// `sin(2πkx)` for `0 < k < N/2`.
    pub fn sine(size: usize, k: i64) -> Self {
        let mut v = Self::zeros(size);
        v.set(k, C64::new(0.0, -0.5));
        v.set(-k, C64::new(0.0, 0.5));
        v
    }

    pub fn size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn nyquist(&self) -> i64 {
        (self.coeffs.len() / 2) as i64
    }

    pub fn min_freq(&self) -> i64 {
        1 - self.nyquist()
    }

    /// Frequency stored at position `i`.
    pub fn freq(&self, i: usize) -> i64 {
        i as i64 + self.min_freq()
    }

    /// Storage position of frequency `n`, if it is in range.
    pub fn index(&self, n: i64) -> Option<usize> {
        if n < self.min_freq() || n > self.nyquist() {
            None
        } else {
            Some((n - self.min_freq()) as usize)
        }
    }

    pub fn frequencies(&self) -> impl Iterator<Item = i64> {
        self.min_freq()..=self.nyquist()
    }

    /// Coefficient at frequency `n`; zero outside the stored band.
    pub fn get(&self, n: i64) -> C64 {
        self.index(n).map_or(C64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// Panics if `n` is outside the stored band.
    pub fn set(&mut self, n: i64, value: C64) {
        let i = self.index(n).unwrap_or_else(|| panic!("frequency {n} out of band"));
        self.coeffs[i] = value;
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Iterates `(n, a_n)` in frequency order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let lo = self.min_freq();
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 + lo, *c))
    }

    /// The mean `a_0`.
    pub fn mean(&self) -> C64 {
        self.get(0)
    }

    pub fn norm_l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.size(), other.size());
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// `a_n ↦ conj(a_{-n})`, the coefficient image of complex conjugation.
    pub fn conj_reflect(&self) -> Self {
        let nyq = self.nyquist();
        Self::from_fn(self.size(), |n| {
            if n == nyq {
                self.get(n).conj()
            } else {
                self.get(-n).conj()
            }
        })
    }

    /// Largest violation of `a_{-n} = conj(a_n)` (and real `a_0`, `a_{N/2}`).
    pub fn real_defect(&self) -> f64 {
        self.max_abs_diff(&self.conj_reflect())
    }

    pub fn is_real_valued(&self, tol: f64) -> bool {
        self.real_defect() <= tol
    }

    /// Projects onto real-valued functions by averaging with the conjugate reflection.
    pub fn symmetrize_real(&self) -> Self {
        let r = self.conj_reflect();
        let coeffs = self.coeffs.iter().zip(&r.coeffs).map(|(a, b)| (a + b) * 0.5).collect();
        Self { coeffs }
    }

    /// Rotates the global phase so that a vector satisfying `J v = c v` with
    /// `|c| = 1` (J the conjugate reflection) becomes real-valued, then symmetrizes.
    pub fn align_real_phase(&self) -> Self {
        let r = self.conj_reflect();
        let num: C64 = self.coeffs.iter().zip(&r.coeffs).map(|(a, b)| a.conj() * b).sum();
        let half_angle = if num.norm() > 0.0 { 0.5 * num.arg() } else { 0.0 };
        self.scale(C64::from_polar(1.0, -half_angle)).symmetrize_real()
    }

    /// Zero-pads or truncates to `size` frequencies with the shared-Nyquist convention.
    pub fn resize(&self, size: usize) -> Result<Self> {
        check_even(size)?;
        let (old, new) = (self.nyquist(), (size / 2) as i64);
        let mut out = Self::zeros(size);
        if size >= self.size() {
            for n in self.min_freq()..old {
                out.set(n, self.get(n));
            }
            if size == self.size() {
                out.set(old, self.get(old));
            } else {
                let half = self.get(old) * 0.5;
                out.set(old, half);
                out.set(-old, half);
            }
        } else {
            for n in (1 - new)..new {
                out.set(n, self.get(n));
            }
            out.set(new, self.get(new) + self.get(-new));
        }
        Ok(out)
    }

    /// Direct trigonometric evaluation at an arbitrary point.
    pub fn eval(&self, x: f64) -> C64 {
        let nyq = self.nyquist();
        let mut acc = C64::new(0.0, 0.0);
        for (n, a) in self.iter() {
            if n == nyq {
                acc += a * (PI * self.size() as f64 * x).cos();
            } else {
                acc += a * C64::from_polar(1.0, TWO_PI * n as f64 * x);
            }
        }
        acc
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }
}

impl Add for &FourierVector {
    type Output = FourierVector;
    fn add(self, rhs: &FourierVector) -> FourierVector {
        assert_eq!(self.size(), rhs.size());
        FourierVector { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &FourierVector {
    type Output = FourierVector;
    fn sub(self, rhs: &FourierVector) -> FourierVector {
        assert_eq!(self.size(), rhs.size());
        FourierVector { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for FourierVector {
    type Output = FourierVector;
    fn neg(self) -> FourierVector {
        FourierVector { coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl Mul<f64> for FourierVector {
    type Output = FourierVector;
    fn mul(self, s: f64) -> FourierVector {
        FourierVector { coeffs: self.coeffs.into_iter().map(|c| c * s).collect() }
    }
}

impl Mul<f64> for &FourierVector {
    type Output = FourierVector;
    fn mul(self, s: f64) -> FourierVector {
        FourierVector { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }
}

/// Values of a periodic function at `x_j = j/M`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSamples {
    values: Vec<C64>,
}

impl GridSamples {
    pub fn new(values: Vec<C64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self { values: values.iter().map(|&v| C64::new(v, 0.0)).collect() }
    }

    /// Samples `f(j/M)`.
    pub fn from_fn(len: usize, f: impl Fn(f64) -> C64) -> Self {
        let h = 1.0 / len as f64;
        Self { values: (0..len).map(|j| f(j as f64 * h)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.values.len() as f64
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Real parts of the samples.
    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Periodic index access (`j` taken modulo `M`).
    pub fn at(&self, j: isize) -> C64 {
        let m = self.values.len() as isize;
        self.values[j.rem_euclid(m) as usize]
    }
}

/// `a_n = (1/M) Σ_j values[j] exp(-2πi n j/M)` for `n = -M/2+1 ..= M/2`.
pub fn forward_dft(samples: &GridSamples) -> Result<FourierVector> {
    let m = samples.len();
    check_even(m)?;
    let mut buf = samples.values.clone();
    plan(m, false).process(&mut buf);
    let scale = 1.0 / m as f64;
    let half = (m / 2) as i64;
    let coeffs = ((1 - half)..=half)
        .map(|n| buf[n.rem_euclid(m as i64) as usize] * scale)
        .collect();
    Ok(FourierVector { coeffs })
}

/// `values[j] = Σ_n a_n exp(2πi n j/M)` on an `M ≥ N` grid.
pub fn inverse_dft(v: &FourierVector, m: usize) -> Result<GridSamples> {
    check_even(m)?;
    if m < v.size() {
        return Err(Error::InvalidArgument(format!(
            "inverse grid {m} is coarser than the {} stored frequencies",
            v.size()
        )));
    }
    let padded = v.resize(m)?;
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for (n, a) in padded.iter() {
        buf[n.rem_euclid(m as i64) as usize] = a;
    }
    plan(m, true).process(&mut buf);
    Ok(GridSamples { values: buf })
}

/// Multiplies coefficient `n` by `2πin`. The Nyquist coefficient is dropped,
/// since the derivative of the shared `±N/2` mode vanishes on the grid.
pub fn spectral_derivative(v: &FourierVector) -> FourierVector {
    let nyq = v.nyquist();
    FourierVector::from_fn(v.size(), |n| {
        if n == nyq {
            C64::new(0.0, 0.0)
        } else {
            v.get(n) * C64::new(0.0, TWO_PI * n as f64)
        }
    })
}

/// `out[j] = (values[j+1] - values[j-1]) M/2` with periodic wraparound.
pub fn circular_central_difference(samples: &GridSamples) -> Result<GridSamples> {
    let m = samples.len();
    if m < 3 {
        return Err(Error::InvalidArgument(format!("central difference needs M >= 3, got {m}")));
    }
    let s = m as f64 / 2.0;
    let values = (0..m)
        .map(|j| (samples.values[(j + 1) % m] - samples.values[(j + m - 1) % m]) * s)
        .collect();
    Ok(GridSamples { values })
}

/// Pointwise product on a 2N-point grid, truncated back to `N` frequencies.
pub fn pointwise_multiply(u: &FourierVector, v: &FourierVector) -> Result<FourierVector> {
    if u.size() != v.size() {
        return Err(Error::SizeMismatch { left: u.size(), right: v.size() });
    }
    let m = 2 * u.size();
    let a = inverse_dft(u, m)?;
    let b = inverse_dft(v, m)?;
    let prod = GridSamples::new(a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect());
    forward_dft(&prod)?.resize(u.size())
}

/// `Σ_n u_n conj(v_n)`, i.e. `∫ u v̄` by Parseval.
pub fn l2_inner(u: &FourierVector, v: &FourierVector) -> Result<C64> {
    if u.size() != v.size() {
        return Err(Error::SizeMismatch { left: u.size(), right: v.size() });
    }
    Ok(u.coeffs.iter().zip(&v.coeffs).fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a * b.conj()))
}

/// `w_n = Σ_{i=0}^{k} (4π²n²/γ²)^i`, the Fourier weight of the γ-weighted `H^k` norm.
pub fn sobolev_weight(n: i64, k: u32, gamma: f64) -> Result<f64> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let r = (TWO_PI * n as f64 / gamma).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    for _ in 0..k {
        term *= r;
        sum += term;
    }
    Ok(sum)
}

/// `sqrt(Σ_n w_n(γ) |a_n|²)`.
pub fn sobolev_norm(v: &FourierVector, k: u32, gamma: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (n, a) in v.iter() {
        acc += sobolev_weight(n, k, gamma)? * a.norm_sqr();
    }
    Ok(acc.sqrt())
}

/// `1 + 4π²n²`, the H¹ pairing weight.
pub fn h1_weight(n: i64) -> f64 {
    1.0 + (TWO_PI * n as f64).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn forward_of_constant_is_mean_only() {
        let s = GridSamples::from_fn(8, |_| c(1.0, 0.0));
        let v = forward_dft(&s).unwrap();
        assert!((v.get(0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(v.iter().filter(|(n, _)| *n != 0).all(|(_, a)| a.norm() < 1e-15));
    }

    #[test]
    fn forward_of_cosine() {
        let s = GridSamples::from_fn(8, |x| c((TWO_PI * x).cos(), 0.0));
        let v = forward_dft(&s).unwrap();
        assert!((v.get(1) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((v.get(-1) - c(0.5, 0.0)).norm() < 1e-15);
        for (n, a) in v.iter() {
            if n.abs() != 1 {
                assert!(a.norm() < 1e-15, "n={n} a={a}");
            }
        }
    }

    #[test]
    fn odd_grid_rejected() {
        let s = GridSamples::from_fn(7, |_| c(1.0, 0.0));
        assert!(matches!(forward_dft(&s), Err(Error::OddSize(7))));
    }

    #[test]
    fn inverse_of_modes_at_quarter_points() {
        let g = inverse_dft(&FourierVector::mode(4, 0), 4).unwrap();
        assert!(g.values().iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-15));
        let g = inverse_dft(&FourierVector::mode(4, 1), 4).unwrap();
        let want = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (v, w) in g.values().iter().zip(want) {
            assert!((v - w).norm() < 1e-15);
        }
    }

    #[test]
    fn inverse_rejects_coarse_grid() {
        assert!(inverse_dft(&FourierVector::zeros(16), 8).is_err());
    }

    #[test]
    fn zero_padding_keeps_nyquist_real() {
        let mut v = FourierVector::zeros(8);
        v.set(4, c(1.0, 0.0));
        let g = inverse_dft(&v, 32).unwrap();
        for (j, s) in g.values().iter().enumerate() {
            let x = j as f64 / 32.0;
            assert!((s.re - (PI * 8.0 * x).cos()).abs() < 1e-13);
            assert!(s.im.abs() < 1e-13);
        }
        let back = forward_dft(&g).unwrap().resize(8).unwrap();
        assert!(back.max_abs_diff(&v) < 1e-14);
    }

    #[test]
    fn spectral_derivative_examples() {
        let d = spectral_derivative(&FourierVector::mode(16, 1));
        assert!((d.get(1) - c(0.0, TWO_PI)).norm() < 1e-14);
        assert!(spectral_derivative(&FourierVector::constant(16, 3.0)).max_abs() == 0.0);
        let d = spectral_derivative(&FourierVector::sine(16, 1));
        assert!(d.max_abs_diff(&(FourierVector::cosine(16, 1) * TWO_PI)) < 1e-14);
    }

    #[test]
    fn central_difference_examples() {
        let s = GridSamples::from_fn(16, |_| c(2.5, 0.0));
        let d = circular_central_difference(&s).unwrap();
        assert!(d.values().iter().all(|v| v.norm() == 0.0));

        let m = 512;
        let s = GridSamples::from_fn(m, |x| c((TWO_PI * x).sin(), 0.0));
        let d = circular_central_difference(&s).unwrap();
        let bound = TWO_PI.powi(3) / (6.0 * (m * m) as f64);
        let err = (0..m)
            .map(|j| (d.values()[j].re - TWO_PI * (TWO_PI * d.node(j)).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err <= bound, "err {err} > bound {bound}");

        // sawtooth j: slope M everywhere except the wrap pair
        let m = 10;
        let s = GridSamples::new((0..m).map(|j| c(j as f64, 0.0)).collect());
        let d = circular_central_difference(&s).unwrap();
        for j in 1..m - 1 {
            assert_eq!(d.values()[j].re, m as f64);
        }
        assert_ne!(d.values()[0].re, m as f64);
        assert_ne!(d.values()[m - 1].re, m as f64);
        assert!(circular_central_difference(&GridSamples::from_fn(2, |_| c(0.0, 0.0))).is_err());
    }

    #[test]
    fn products() {
        let n = 16;
        let p = pointwise_multiply(&FourierVector::mode(n, 1), &FourierVector::mode(n, 2)).unwrap();
        assert!(p.max_abs_diff(&FourierVector::mode(n, 3)) < 1e-14);
        let u = FourierVector::sine(n, 3);
        let p = pointwise_multiply(&u, &FourierVector::constant(n, 1.0)).unwrap();
        assert!(p.max_abs_diff(&u) < 1e-14);
        // e_{N/2-1}^2 = e_{N-2} is out of band and lost
        let e = FourierVector::mode(n, 7);
        assert!(pointwise_multiply(&e, &e).unwrap().max_abs() < 1e-14);
        assert!(pointwise_multiply(&e, &FourierVector::zeros(8)).is_err());
    }

    #[test]
    fn inner_products() {
        let e1 = FourierVector::mode(16, 1);
        let e2 = FourierVector::mode(16, 2);
        assert!((l2_inner(&e1, &e1).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(l2_inner(&e1, &e2).unwrap().norm() < 1e-15);
        let cs = FourierVector::cosine(16, 1);
        assert!((l2_inner(&cs, &cs).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        assert!(l2_inner(&e1, &FourierVector::zeros(8)).is_err());
    }

    #[test]
    fn weights_and_norms() {
        assert_eq!(sobolev_weight(0, 4, 3.7).unwrap(), 1.0);
        // Σ_{i=0}^4 (4π²)^i, evaluated independently at 30 digits
        let w = sobolev_weight(1, 4, 1.0).unwrap();
        assert!((w - 2_492_191.872_377_034_8).abs() / w < 1e-14);
        assert!((sobolev_weight(1, 4, TWO_PI).unwrap() - 5.0).abs() < 1e-12);
        assert!(sobolev_weight(1, 4, 0.0).is_err());
        assert!(sobolev_weight(1, 4, -1.0).is_err());

        assert!((sobolev_norm(&FourierVector::constant(16, 1.0), 4, 9.0).unwrap() - 1.0).abs() < 1e-15);
        let e1 = sobolev_norm(&FourierVector::mode(16, 1), 4, 1.0).unwrap();
        assert!((e1 - 1578.6677523712945).abs() < 1e-9);
        assert_eq!(sobolev_norm(&FourierVector::zeros(16), 4, 1.0).unwrap(), 0.0);
    }

    fn real_vector(size: usize, seed: &[f64]) -> FourierVector {
        let mut v = FourierVector::zeros(size);
        let nyq = v.nyquist();
        v.set(0, c(seed[0], 0.0));
        for n in 1..nyq {
            let a = c(seed[(2 * n as usize) % seed.len()], seed[(2 * n as usize + 1) % seed.len()]);
            let a = a / (1.0 + n as f64);
            v.set(n, a);
            v.set(-n, a.conj());
        }
        v.set(nyq, c(seed[1], 0.0) * 0.01);
        v
    }

    proptest! {
        #[test]
        fn round_trip_identity(seed in proptest::collection::vec(-1.0f64..1.0, 8..40), pick in 0usize..3) {
            let size = [16, 64, 512][pick];
            let v = real_vector(size, &seed);
            let back = forward_dft(&inverse_dft(&v, size).unwrap()).unwrap();
            prop_assert!(back.max_abs_diff(&v) <= 1e-12);
            let s = inverse_dft(&v, size).unwrap();
            let again = inverse_dft(&forward_dft(&s).unwrap(), size).unwrap();
            let err = s.values().iter().zip(again.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            prop_assert!(err <= 1e-12);
        }

        #[test]
        fn parseval_on_band_limited(seed in proptest::collection::vec(-1.0f64..1.0, 8..24)) {
            let size = 64;
            let mut u = real_vector(size, &seed);
            let mut v = real_vector(size, &seed.iter().rev().cloned().collect::<Vec<_>>());
            for n in [-31, 31, 32, -30, 30] {
                if let Some(i) = u.index(n) {
                    u.coeffs_mut()[i] = c(0.0, 0.0);
                    v.coeffs_mut()[i] = c(0.0, 0.0);
                }
            }
            let gu = inverse_dft(&u, size).unwrap();
            let gv = inverse_dft(&v, size).unwrap();
            let grid = gu.values().iter().zip(gv.values()).fold(c(0.0, 0.0), |a, (x, y)| a + x * y.conj()) / size as f64;
            prop_assert!((l2_inner(&u, &v).unwrap() - grid).norm() <= 1e-10);
        }

        #[test]
        fn derivative_preserves_realness(seed in proptest::collection::vec(-1.0f64..1.0, 8..24)) {
            let v = real_vector(32, &seed);
            prop_assert!(spectral_derivative(&v).is_real_valued(1e-12));
        }

        #[test]
        fn h0_norm_is_l2(seed in proptest::collection::vec(-1.0f64..1.0, 8..24)) {
            let v = real_vector(32, &seed);
            prop_assert!((sobolev_norm(&v, 0, 1.0).unwrap() - v.norm_l2()).abs() <= 1e-14);
        }
    }
}
