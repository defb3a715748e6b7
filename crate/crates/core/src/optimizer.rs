//! Closed-form optimal perturbations.
//!
//! Both responses are linear functionals of `Ṫ = Σ a_n e_n`, written as
//! `Σ_n conj(a_n)·num_n`. Maximising over the unit ball of the γ-weighted
//! `H⁴` norm `Σ w_n(γ)|a_n|²` gives `a_n = num_n / (2ν w_n(γ))` with
//! `ν = ½ (Σ |num_n|²/w_n(γ))^{1/2}` and optimal value `2ν`.

use std::io::Write;

use num_complex::Complex64 as C64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjoint::h1_pairing;
use crate::circle_map::{coefficient_table_to_vector, vector_to_coefficient_table};
use crate::error::{Error, Result};
use crate::fourier::{inverse_dft, l2_inner, sobolev_norm, sobolev_weight, FourierVector};
use crate::response::ResponseContext;

/// Sobolev order of the constraint set.
pub const CONSTRAINT_ORDER: u32 = 4;
/// Numerators below this are treated as a uniformly vanishing objective.
pub const DEGENERATE_TOL: f64 = 1e-14;

/// Which response is maximised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    Expectation,
    Eigenvalue,
}

/// The maximiser, its multiplier and the raw per-frequency numerators.
#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub objective_kind: Objective,
    pub tdot: FourierVector,
    pub nu: f64,
    pub gamma: f64,
    pub objective: f64,
    pub numerators: FourierVector,
    /// Relative conjugate-symmetry defect of the raw numerators.
    pub asymmetry: f64,
    pub observable: Option<FourierVector>,
}

#[derive(Serialize, Deserialize)]
struct ResultDoc {
    gamma: f64,
    nu: f64,
    objective: f64,
    coefficients: Vec<(i64, f64, f64)>,
}

/// `w_n(γ) = Σ_{i=0}^{4} (4π²n²/γ²)^i`.
pub fn constraint_weight(n: i64, gamma: f64) -> Result<f64> {
    sobolev_weight(n, CONSTRAINT_ORDER, gamma)
}

/// `‖v‖_{H⁴,γ}`.
pub fn constraint_norm(v: &FourierVector, gamma: f64) -> Result<f64> {
    sobolev_norm(v, CONSTRAINT_ORDER, gamma)
}

/// Solves the coefficient-level Lagrange conditions for given numerators.
fn solve_from_numerators(numerators: &FourierVector, gamma: f64) -> Result<(FourierVector, f64)> {
    let max = numerators.max_abs();
    if max.is_nan() || max < DEGENERATE_TOL {
        return Err(Error::DegenerateObjective { max_numerator: max });
    }
    let weights: Vec<f64> = numerators.frequencies().map(|n| constraint_weight(n, gamma)).collect::<Result<_>>()?;
    let s: f64 = numerators.coeffs().iter().zip(&weights).map(|(a, w)| a.norm_sqr() / w).sum();
    let nu = 0.5 * s.sqrt();
    let coeffs = numerators.coeffs().iter().zip(&weights).map(|(a, w)| a / (2.0 * nu * w)).collect();
    Ok((FourierVector::from_coeffs(coeffs)?, nu))
}

/// Largest tolerated `max|num_n − conj(num_{−n})| / max|num_n|`; the
/// numerators of a real operator are conjugate-symmetric up to round-off.
pub const NUMERATOR_ASYMMETRY_TOL: f64 = 1e-10;

/// Returns the symmetrized numerators and their relative asymmetry.
fn symmetrize_numerators(num: &FourierVector) -> Result<(FourierVector, f64)> {
    let scale = num.max_abs();
    let rel = if scale > 0.0 { num.real_defect() / scale } else { 0.0 };
    if rel > NUMERATOR_ASYMMETRY_TOL {
        return Err(Error::ImaginaryResidue { context: "optimizer numerators", residue: rel });
    }
    Ok((num.symmetrize_real(), rel))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

/// Maximises `∫ c·R(Ṫ)` over the unit ball of `H⁴_γ`.
///
/// The numerators are `∫ c·conj((I−L₀)⁻¹L₀([e_n f₀/T₀']'))` up to one global
/// sign, which is fixed so that the returned response is positive.
pub fn optimal_expectation_perturbation(
    ctx: &ResponseContext,
    c: &FourierVector,
    gamma: f64,
) -> Result<OptimizationResult> {
    check_gamma(gamma)?;
    if c.size() != ctx.size() {
        return Err(Error::SizeMismatch { left: ctx.size(), right: c.size() });
    }
    if !c.is_real_valued(1e-9 * c.max_abs().max(1.0)) {
        return Err(Error::InvalidArgument("observable must be real-valued".into()));
    }
    let n = ctx.size();
    let q = ctx.over_derivative(ctx.density())?;
    let nums: Vec<C64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let e = FourierVector::mode(n, c.freq(i));
            let mut lb = ctx.transported_derivative(&q, &e)?;
            lb.set(0, C64::new(0.0, 0.0));
            let y = ctx.resolvent().solve(&lb)?;
            l2_inner(c, &y)
        })
        .collect::<Result<_>>()?;
    let (mut numerators, asymmetry) = symmetrize_numerators(&FourierVector::from_coeffs(nums)?)?;
    let (mut tdot, nu) = solve_from_numerators(&numerators, gamma)?;
    let mut objective = ctx.expectation_response(c, &tdot)?;
    if objective < 0.0 {
        tdot = -tdot;
        numerators = -numerators;
        objective = -objective;
    }
    Ok(OptimizationResult {
        objective_kind: Objective::Expectation,
        tdot,
        nu,
        gamma,
        objective,
        numerators,
        asymmetry,
        observable: Some(c.clone()),
    })
}

/// Maximises `λ̇(Ṫ) = φ₀(L̇v₀)` over the unit ball of `H⁴_γ`.
pub fn optimal_eigenvalue_perturbation(ctx: &ResponseContext, gamma: f64) -> Result<OptimizationResult> {
    check_gamma(gamma)?;
    let ed = ctx.eigen().ok_or(Error::MissingEigenData)?;
    let n = ctx.size();
    let q = ctx.over_derivative(&ed.v0)?;
    let nums: Vec<C64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let e = FourierVector::mode(n, ed.v0.freq(i));
            let g = ctx.transported_derivative(&q, &e)?;
            Ok(-h1_pairing(&ed.phi0, &g)?)
        })
        .collect::<Result<_>>()?;
    let (numerators, asymmetry) = symmetrize_numerators(&FourierVector::from_coeffs(nums)?)?;
    let (tdot, nu) = solve_from_numerators(&numerators, gamma)?;
    let objective = ctx.eigenvalue_response(&tdot)?;
    Ok(OptimizationResult {
        objective_kind: Objective::Eigenvalue,
        tdot,
        nu,
        gamma,
        objective,
        numerators,
        asymmetry,
        observable: None,
    })
}

impl OptimizationResult {
    /// The response of an arbitrary perturbation under the same functional.
    pub fn response(&self, ctx: &ResponseContext, tdot: &FourierVector) -> Result<f64> {
        match self.objective_kind {
            Objective::Expectation => {
                let c = self.observable.as_ref().ok_or_else(|| Error::InvalidArgument("missing observable".into()))?;
                ctx.expectation_response(c, tdot)
            }
            Objective::Eigenvalue => ctx.eigenvalue_response(tdot),
        }
    }

    /// Largest relative violation of `num_n = 2ν w_n(γ) a_n`.
    pub fn stationarity_residual(&self) -> Result<f64> {
        let scale = self.numerators.max_abs();
        let mut worst: f64 = 0.0;
        for ((n, a), num) in self.tdot.iter().zip(self.numerators.coeffs()) {
            let r = (num - a * (2.0 * self.nu * constraint_weight(n, self.gamma)?)).norm();
            worst = worst.max(r / scale);
        }
        Ok(worst)
    }

    /// `‖Ṫ‖_{H⁴,γ}`, equal to 1 by construction.
    pub fn constraint_norm(&self) -> Result<f64> {
        constraint_norm(&self.tdot, self.gamma)
    }

    /// `{"gamma", "nu", "objective", "coefficients": [[n, re, im], ...]}`.
    pub fn to_json(&self) -> Result<String> {
        let doc = ResultDoc {
            gamma: self.gamma,
            nu: self.nu,
            objective: self.objective,
            coefficients: vector_to_coefficient_table(&self.tdot),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Reads back `(gamma, nu, objective, tdot)` from [`OptimizationResult::to_json`] output.
    pub fn parse_json(text: &str, size: usize) -> Result<(f64, f64, f64, FourierVector)> {
        let doc: ResultDoc = serde_json::from_str(text)?;
        Ok((doc.gamma, doc.nu, doc.objective, coefficient_table_to_vector(size, &doc.coefficients)?))
    }

    /// Writes `x,tdot` rows at `resolution` uniform points.
    pub fn write_profile_csv<W: Write>(&self, resolution: usize, mut w: W) -> Result<()> {
        let s = inverse_dft(&self.tdot, resolution)?;
        writeln!(w, "x,tdot")?;
        for (j, v) in s.values().iter().enumerate() {
            writeln!(w, "{},{}", j as f64 / resolution as f64, v.re)?;
        }
        Ok(())
    }
}

/// Outcome of testing the maximiser against random feasible directions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateReport {
    pub trials: usize,
    pub seed: u64,
    pub objective: f64,
    /// Largest `response(u) / objective` over the random directions.
    pub max_ratio: f64,
    /// `response(Ṫ_opt) / objective`.
    pub self_ratio: f64,
    /// `response(−Ṫ_opt) / objective`.
    pub negated_ratio: f64,
}

/// A random real direction of unit `H⁴_γ` norm with coefficients scaled like `w_n^{-1/2}`.
pub fn random_unit_direction(rng: &mut ChaCha8Rng, size: usize, gamma: f64) -> Result<FourierVector> {
    let mut v = FourierVector::zeros(size);
    let nyq = v.nyquist();
    for n in 0..=nyq {
        let w = constraint_weight(n, gamma)?.sqrt();
        let re = rng.random_range(-1.0..1.0) / w;
        let im = if n == 0 || n == nyq { 0.0 } else { rng.random_range(-1.0..1.0) / w };
        v.set(n, C64::new(re, im));
        if n != 0 && n != nyq {
            v.set(-n, C64::new(re, -im));
        }
    }
    let norm = constraint_norm(&v, gamma)?;
    Ok(v * (1.0 / norm))
}

/// Checks `response(u) ≤ objective + 1e−9` for `trials` random unit directions.
pub fn objective_certificate(
    ctx: &ResponseContext,
    result: &OptimizationResult,
    trials: usize,
    seed: u64,
) -> Result<CertificateReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("certificate needs at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<FourierVector> =
        (0..trials).map(|_| random_unit_direction(&mut rng, ctx.size(), result.gamma)).collect::<Result<_>>()?;
    let responses: Vec<f64> = dirs.par_iter().map(|u| result.response(ctx, u)).collect::<Result<_>>()?;
    let obj = result.objective;
    let mut max_ratio = f64::NEG_INFINITY;
    for r in responses {
        if r > obj + 1e-9 {
            return Err(Error::CertificateViolation { response: r, objective: obj });
        }
        max_ratio = max_ratio.max(r / obj);
    }
    let self_ratio = result.response(ctx, &result.tdot)? / obj;
    let negated_ratio = result.response(ctx, &-result.tdot.clone())? / obj;
    Ok(CertificateReport { trials, seed, objective: obj, max_ratio, self_ratio, negated_ratio })
}
