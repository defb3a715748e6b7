//! The derivative operator `L̇(f) = −L₀([f·Ṫ/T₀']')` and the linear responses
//! of the invariant density, of expectations and of an isolated eigenvalue.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::adjoint::{h1_pairing, EigenData};
use crate::circle_map::CircleMap;
use crate::error::{Error, Result};
use crate::fourier::{
    circular_central_difference, forward_dft, inverse_dft, l2_inner, spectral_derivative, FourierVector, GridSamples,
};
use crate::transfer::{Resolvent, TransferMatrix};

/// Tolerance on the imaginary part of real-valued density/expectation responses.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-9;
/// Tolerance on the imaginary part of an eigenvalue response.
pub const EIGEN_IMAG_TOL: f64 = 1e-8;

/// How derivatives are taken on the `N`-point grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeScheme {
    /// Circular central differences of grid samples, for both `T₀'` and the
    /// outer derivative in `L̇`.
    #[default]
    CentralDifference,
    /// Exact `T₀'` and spectral differentiation.
    Spectral,
}

/// Everything the response formulas need about one unperturbed map.
pub struct ResponseContext {
    map: CircleMap,
    op: TransferMatrix,
    resolvent: Resolvent,
    f0: FourierVector,
    dmap: Vec<f64>,
    scheme: DerivativeScheme,
    eigen: Option<EigenData>,
}

impl ResponseContext {
    /// Assembles `L̂_N`, its invariant density and the mean-zero resolvent.
    pub fn new(map: CircleMap, size: usize, fine_factor: usize, scheme: DerivativeScheme) -> Result<Self> {
        let op = TransferMatrix::assemble(&map, size, fine_factor)?;
        let f0 = op.invariant_density()?;
        let resolvent = op.resolvent()?;
        let dmap = grid_derivative(&map, size, scheme)?;
        Ok(Self { map, op, resolvent, f0, dmap, scheme, eigen: None })
    }

    /// Attaches the normalised eigen data for the real eigenvalue nearest `target`.
    pub fn with_eigenvalue(mut self, target: f64) -> Result<Self> {
        self.set_eigenvalue(target)?;
        Ok(self)
    }

    /// In-place form of [`ResponseContext::with_eigenvalue`]; on error the
    /// previous eigen data is kept.
    pub fn set_eigenvalue(&mut self, target: f64) -> Result<&EigenData> {
        Ok(self.eigen.insert(EigenData::compute(&self.op, target)?))
    }

    pub fn with_eigen_data(mut self, eigen: EigenData) -> Result<Self> {
        if eigen.v0.size() != self.size() {
            return Err(Error::SizeMismatch { left: self.size(), right: eigen.v0.size() });
        }
        self.eigen = Some(eigen);
        Ok(self)
    }

    pub fn map(&self) -> &CircleMap {
        &self.map
    }

    pub fn operator(&self) -> &TransferMatrix {
        &self.op
    }

    pub fn resolvent(&self) -> &Resolvent {
        &self.resolvent
    }

    pub fn density(&self) -> &FourierVector {
        &self.f0
    }

    pub fn size(&self) -> usize {
        self.op.size()
    }

    pub fn scheme(&self) -> DerivativeScheme {
        self.scheme
    }

    pub fn eigen(&self) -> Option<&EigenData> {
        self.eigen.as_ref()
    }

    /// `T₀'` on the `N`-point grid, as used by the response formulas.
    pub fn map_derivative_samples(&self) -> &[f64] {
        &self.dmap
    }

    fn check_real(&self, v: &FourierVector, what: &str) -> Result<()> {
        if v.size() != self.size() {
            return Err(Error::SizeMismatch { left: self.size(), right: v.size() });
        }
        if !v.is_real_valued(1e-9 * v.max_abs().max(1.0)) {
            return Err(Error::InvalidArgument(format!("{what} must be real-valued")));
        }
        Ok(())
    }

    /// Samples of `u/T₀'` on the `N`-grid.
    pub(crate) fn over_derivative(&self, u: &FourierVector) -> Result<Vec<C64>> {
        Ok(inverse_dft(u, self.size())?.values().iter().zip(&self.dmap).map(|(v, d)| v / d).collect())
    }

    /// Coefficients of `(g)'` for grid samples `g`, using the configured scheme.
    pub(crate) fn differentiate(&self, g: Vec<C64>) -> Result<FourierVector> {
        let g = GridSamples::new(g);
        match self.scheme {
            DerivativeScheme::CentralDifference => forward_dft(&circular_central_difference(&g)?),
            DerivativeScheme::Spectral => Ok(spectral_derivative(&forward_dft(&g)?)),
        }
    }

    /// `L̂([q·Ṫ]')` where `q` are grid samples (typically `f/T₀'`); `Ṫ` may be complex.
    pub(crate) fn transported_derivative(&self, q: &[C64], tdot: &FourierVector) -> Result<FourierVector> {
        let t = inverse_dft(tdot, self.size())?;
        let g = q.iter().zip(t.values()).map(|(a, b)| a * b).collect();
        self.op.apply(&self.differentiate(g)?)
    }

    /// `L̇(f) = −L̂([f·Ṫ/T₀']')` on the grid.
    pub fn derivative_op_apply(&self, f: &FourierVector, tdot: &FourierVector) -> Result<FourierVector> {
        self.check_real(f, "density")?;
        self.check_real(tdot, "perturbation")?;
        let q = self.over_derivative(f)?;
        Ok(-self.transported_derivative(&q, tdot)?)
    }

    /// `L̇(w) = −L₀(wṪ'/T₀') − L₀(Ṫw'/T₀') + L₀(ṪT₀''w/T₀'²)`, with spectral
    /// derivatives of `w` and `Ṫ` and exact `T₀''`.
    pub fn derivative_op_apply_expanded(&self, w: &FourierVector, tdot: &FourierVector) -> Result<FourierVector> {
        self.check_real(w, "density")?;
        self.check_real(tdot, "perturbation")?;
        let n = self.size();
        let ws = inverse_dft(w, n)?;
        let dws = inverse_dft(&spectral_derivative(w), n)?;
        let ts = inverse_dft(tdot, n)?;
        let dts = inverse_dft(&spectral_derivative(tdot), n)?;
        let d2 = self.map.sample_derivative(n, 2)?;
        let u = (0..n)
            .map(|j| {
                let (w, dw, t, dt) = (ws.values()[j], dws.values()[j], ts.values()[j], dts.values()[j]);
                let d1 = self.dmap[j];
                (w * dt + t * dw) / d1 - t * w * d2[j] / (d1 * d1)
            })
            .collect();
        Ok(-self.op.apply(&forward_dft(&GridSamples::new(u))?)?)
    }

    /// `R(Ṫ) = (I − L₀)⁻¹ L̇f₀`, the derivative of the invariant density.
    pub fn density_response(&self, tdot: &FourierVector) -> Result<FourierVector> {
        let lf = self.derivative_op_apply(&self.f0, tdot)?;
        Ok(self.resolvent.solve(&lf)?.symmetrize_real())
    }

    /// `∫ c·R(Ṫ)`, the derivative of the expectation of `c`.
    pub fn expectation_response(&self, c: &FourierVector, tdot: &FourierVector) -> Result<f64> {
        self.check_real(c, "observable")?;
        let r = self.density_response(tdot)?;
        let z = l2_inner(c, &r)?;
        real_part(z, EXPECTATION_IMAG_TOL, "expectation response")
    }

    /// `λ̇ = φ₀(L̇v₀)`, the derivative of the isolated eigenvalue.
    pub fn eigenvalue_response(&self, tdot: &FourierVector) -> Result<f64> {
        let ed = self.eigen.as_ref().ok_or(Error::MissingEigenData)?;
        let g = self.derivative_op_apply(&ed.v0, tdot)?;
        let z = h1_pairing(&ed.phi0, &g)?;
        real_part(z, EIGEN_IMAG_TOL, "eigenvalue response")
    }
}

/// `T₀'` on the `N`-point grid: central differences of the periodic part plus
/// the degree, or exact samples.
pub fn grid_derivative(map: &CircleMap, size: usize, scheme: DerivativeScheme) -> Result<Vec<f64>> {
    match scheme {
        DerivativeScheme::CentralDifference => {
            let p = map.sample_periodic(size)?;
            let d = map.degree() as f64;
            Ok(circular_central_difference(&GridSamples::from_real(&p))?.values().iter().map(|v| v.re + d).collect())
        }
        DerivativeScheme::Spectral => map.sample_derivative(size, 1),
    }
}

pub(crate) fn real_part(z: C64, tol: f64, context: &'static str) -> Result<f64> {
    if z.im.abs() > tol * z.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidue { context, residue: z.im.abs() });
    }
    Ok(z.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::TWO_PI;

    fn doubling(scheme: DerivativeScheme) -> ResponseContext {
        ResponseContext::new(CircleMap::doubling(), 32, 8, scheme).unwrap()
    }

    #[test]
    fn zero_perturbation_gives_zero() {
        let ctx = doubling(DerivativeScheme::CentralDifference);
        let z = FourierVector::zeros(32);
        assert_eq!(ctx.derivative_op_apply(ctx.density(), &z).unwrap().max_abs(), 0.0);
        assert_eq!(ctx.density_response(&z).unwrap().max_abs(), 0.0);
        assert_eq!(ctx.expectation_response(&FourierVector::cosine(32, 1), &z).unwrap(), 0.0);
    }

    #[test]
    fn odd_harmonic_is_annihilated() {
        for scheme in [DerivativeScheme::CentralDifference, DerivativeScheme::Spectral] {
            let ctx = doubling(scheme);
            let tdot = FourierVector::sine(32, 1) * (1.0 / TWO_PI);
            let out = ctx.derivative_op_apply(&FourierVector::constant(32, 1.0), &tdot).unwrap();
            assert!(out.max_abs() < 1e-12);
        }
    }

    #[test]
    fn second_harmonic_closed_form() {
        // f = 1, Ṫ = sin 4πx: (Ṫ/2)' = 2π cos 4πx and L e_{±2} = e_{±1},
        // so L̇1 = −2π cos 2πx under spectral differentiation.
        let ctx = doubling(DerivativeScheme::Spectral);
        let tdot = FourierVector::sine(32, 2);
        let out = ctx.derivative_op_apply(&FourierVector::constant(32, 1.0), &tdot).unwrap();
        let want = FourierVector::cosine(32, 1) * -TWO_PI;
        assert!(out.max_abs_diff(&want) < 1e-12);
        let exp = ctx.derivative_op_apply_expanded(&FourierVector::constant(32, 1.0), &tdot).unwrap();
        assert!(exp.max_abs_diff(&out) < 1e-10);
        // Central differences shrink the derivative by sin(4π/N)/(4π/N).
        let ctx = doubling(DerivativeScheme::CentralDifference);
        let out = ctx.derivative_op_apply(&FourierVector::constant(32, 1.0), &tdot).unwrap();
        let h = 4.0 * std::f64::consts::PI / 32.0;
        assert!(out.max_abs_diff(&(&want * (h.sin() / h))) < 1e-12);
    }

    #[test]
    fn constant_perturbation_drops_terms() {
        let ctx = doubling(DerivativeScheme::Spectral);
        let f = &FourierVector::constant(32, 1.0) + &(FourierVector::cosine(32, 2) * 0.3);
        let out = ctx.derivative_op_apply_expanded(&f, &FourierVector::constant(32, 1.0)).unwrap();
        let half_df = spectral_derivative(&f) * 0.5;
        let want = -ctx.operator().apply(&half_df).unwrap();
        assert!(out.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn constant_observable_has_no_response() {
        let ctx = ResponseContext::new(CircleMap::sticky2x(), 64, 8, DerivativeScheme::CentralDifference).unwrap();
        let v = ctx.expectation_response(&FourierVector::constant(64, 1.0), &FourierVector::cosine(64, 3)).unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn eigen_response_needs_eigen_data() {
        let ctx = doubling(DerivativeScheme::CentralDifference);
        assert!(matches!(ctx.eigenvalue_response(&FourierVector::cosine(32, 1)), Err(Error::MissingEigenData)));
    }

    #[test]
    fn complex_inputs_rejected() {
        let ctx = doubling(DerivativeScheme::CentralDifference);
        assert!(ctx.density_response(&FourierVector::mode(32, 1)).is_err());
        assert!(ctx.density_response(&FourierVector::cosine(16, 1)).is_err());
    }
}
