//! The `H¹` representative of the left eigenfunctional at an isolated real
//! eigenvalue, and the joint normalisation of the eigenvector pair.
//!
//! A function `φ ∈ H¹` acts on `f` through
//! `φ(f) = ∫ φ f̄ + ∫ φ' f̄' = Σ_m φ_m conj(f_m) (1 + 4π²m²)`.

use faer::{c64, Mat};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fourier::{h1_weight, FourierVector};
use crate::linalg::Eigensystem;
use crate::transfer::{TransferMatrix, EIGEN_GAP_TOL, REAL_EIGENVALUE_TOL};

/// Tolerance for locating `λ₀` in the spectrum of the scaled transpose; the
/// caller passes the real part, so this covers what [`REAL_EIGENVALUE_TOL`] allows.
pub const ADJOINT_TARGET_TOL: f64 = 1e-6 + REAL_EIGENVALUE_TOL;

/// `φ(f) = Σ_m φ_m conj(f_m)(1 + 4π²m²)`.
pub fn h1_pairing(phi: &FourierVector, f: &FourierVector) -> Result<C64> {
    if phi.size() != f.size() {
        return Err(Error::SizeMismatch { left: phi.size(), right: f.size() });
    }
    Ok(phi.iter().zip(f.coeffs()).map(|((m, p), q)| p * q.conj() * h1_weight(m)).sum())
}

/// An isolated real eigenvalue with its right eigenvector and adjoint
/// representative, normalised so that `φ₀(1) = 1` and `φ₀(v₀) = 1`.
#[derive(Clone, Debug)]
pub struct EigenData {
    pub lambda0: f64,
    pub v0: FourierVector,
    pub phi0: FourierVector,
}

impl EigenData {
    /// Finds the eigenvalue of `op` nearest `target` and builds the normalised pair.
    pub fn compute(op: &TransferMatrix, target: f64) -> Result<Self> {
        let (lambda, v) = op.eigenpair(C64::new(target, 0.0))?;
        if lambda.im != 0.0 {
            return Err(Error::ComplexEigenvalue(lambda));
        }
        let phi = adjoint_representative(op, lambda.re)?;
        normalize_pair(lambda.re, &v, &phi)
    }

    /// `‖L̂v₀ − λ₀v₀‖₂`.
    pub fn eigen_residual(&self, op: &TransferMatrix) -> Result<f64> {
        let lv = op.apply(&self.v0)?;
        Ok((&lv - &(&self.v0 * self.lambda0)).norm_l2())
    }

    /// `max_n |φ₀(L̂e_n) − λ₀ φ₀(e_n)|`.
    pub fn adjoint_residual(&self, op: &TransferMatrix) -> Result<f64> {
        let n = op.size();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let e = FourierVector::mode(n, self.phi0.freq(i));
            let lhs = h1_pairing(&self.phi0, &op.apply(&e)?)?;
            let rhs = h1_pairing(&self.phi0, &e)? * self.lambda0;
            worst = worst.max((lhs - rhs).norm());
        }
        Ok(worst)
    }

    /// `φ₀(v₀)`, equal to 1 after normalisation.
    pub fn pairing(&self) -> Result<C64> {
        h1_pairing(&self.phi0, &self.v0)
    }
}

/// Solves `λ₀ ā_n = Σ_p L̂_{pn} (1+4π²p²)/(1+4π²n²) ā_p` for the coefficients
/// of `φ₀`, returned real-valued with `a₀ = 1`.
pub fn adjoint_representative(op: &TransferMatrix, lambda0: f64) -> Result<FourierVector> {
    let n = op.size();
    let freq = |i: usize| i as i64 - (n / 2) as i64 + 1;
    let l = op.entries();
    let m = Mat::<c64>::from_fn(n, n, |r, c| l[c * n + r] * (h1_weight(freq(c)) / h1_weight(freq(r))));
    let es = Eigensystem::new(m.as_ref())?;
    let (i, _) = es.select(C64::new(lambda0, 0.0), ADJOINT_TARGET_TOL, EIGEN_GAP_TOL)?;
    let u = FourierVector::from_coeffs(es.vector(i))?;
    let phi = FourierVector::from_coeffs(u.coeffs().iter().map(|z| z.conj()).collect())?.align_real_phase();
    let a0 = phi.get(0);
    if a0.norm() < 1e-12 * phi.max_abs() {
        return Err(Error::DegeneratePairing(a0.norm()));
    }
    let mut phi = phi.scale(1.0 / a0).symmetrize_real();
    phi.set(0, C64::new(1.0, 0.0));
    Ok(phi)
}

/// Scales `φ₀` so that `φ₀(1) = 1`, then `v₀` so that `φ₀(v₀) = 1`.
pub fn normalize_pair(lambda0: f64, v0_raw: &FourierVector, phi0_raw: &FourierVector) -> Result<EigenData> {
    if v0_raw.size() != phi0_raw.size() {
        return Err(Error::SizeMismatch { left: v0_raw.size(), right: phi0_raw.size() });
    }
    let a0 = phi0_raw.get(0);
    if a0.norm() < 1e-12 {
        return Err(Error::DegeneratePairing(a0.norm()));
    }
    let phi0 = phi0_raw.scale(1.0 / a0);
    let p = h1_pairing(&phi0, v0_raw)?;
    if p.norm() < 1e-12 {
        return Err(Error::DegeneratePairing(p.norm()));
    }
    let v0 = v0_raw.scale(1.0 / p.conj());
    Ok(EigenData { lambda0, v0, phi0 })
}
