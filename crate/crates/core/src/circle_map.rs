//! Expanding maps of the circle: trigonometric-polynomial lifts,
//! piecewise-linear Markov maps and their mollified (smoothed) versions.
//!
//! Every map is described by its lift `T: R → R`, `T(x + 1) = T(x) + d`, written
//! as `T(x) = d·x + p(x)` with `p` periodic. Evaluation on the circle reduces
//! the lift modulo 1.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{forward_dft, inverse_dft, spectral_derivative, FourierVector, GridSamples, TWO_PI};

/// Grid used for expansivity checks.
pub const EXPANSIVITY_GRID: usize = 1 << 14;
/// Default sample resolution for mollified maps.
pub const DEFAULT_MOLLIFY_SAMPLES: usize = 8192;

/// One cosine/sine pair `c·cos(2πkx) + s·sin(2πkx)` of a periodic part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub k: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Lift `T(x) = d·x + offset + Σ_k (c_k cos 2πkx + s_k sin 2πkx)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomialMap {
    pub degree: i64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default, rename = "coefficients")]
    pub terms: Vec<TrigTerm>,
}

impl TrigPolynomialMap {
    pub fn new(degree: i64, offset: f64, terms: Vec<TrigTerm>) -> Self {
        Self { degree, offset, terms }
    }

    fn periodic_derivative(&self, x: f64, order: u32) -> f64 {
        let mut acc = if order == 0 { self.offset } else { 0.0 };
        let shift = order as f64 * FRAC_PI_2;
        for t in &self.terms {
            let w = TWO_PI * t.k as f64;
            let scale = w.powi(order as i32);
            acc += scale * (t.cos * (w * x + shift).cos() + t.sin * (w * x + shift).sin());
        }
        acc
    }

    fn add_fourier(&mut self, tdot: &FourierVector, delta: f64) {
        self.offset += delta * tdot.get(0).re;
        let nyq = tdot.nyquist();
        for n in 1..=nyq {
            let a = tdot.get(n);
            // 2 Re(a e_n) = 2 Re(a) cos - 2 Im(a) sin; the Nyquist mode is shared, a·cos.
            let (dc, ds) = if n == nyq { (a.re, 0.0) } else { (2.0 * a.re, -2.0 * a.im) };
            if dc == 0.0 && ds == 0.0 {
                continue;
            }
            let k = n as u32;
            match self.terms.iter_mut().find(|t| t.k == k) {
                Some(t) => {
                    t.cos += delta * dc;
                    t.sin += delta * ds;
                }
                None => self.terms.push(TrigTerm { k, cos: delta * dc, sin: delta * ds }),
            }
        }
        self.terms.sort_by_key(|t| t.k);
    }
}

/// Piecewise-linear lift through `(x_i, y_i)`, `x_K = x_0 + 1`, `y_K = y_0 + d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseLinearDoc", into = "PiecewiseLinearDoc")]
pub struct PiecewiseLinearMap {
    breakpoints: Vec<f64>,
    images: Vec<f64>,
    degree: i64,
}

#[derive(Serialize, Deserialize)]
struct PiecewiseLinearDoc {
    breakpoints: Vec<f64>,
    images: Vec<f64>,
}

impl TryFrom<PiecewiseLinearDoc> for PiecewiseLinearMap {
    type Error = Error;
    fn try_from(doc: PiecewiseLinearDoc) -> Result<Self> {
        PiecewiseLinearMap::new(doc.breakpoints, doc.images)
    }
}

impl From<PiecewiseLinearMap> for PiecewiseLinearDoc {
    fn from(m: PiecewiseLinearMap) -> Self {
        PiecewiseLinearDoc { breakpoints: m.breakpoints, images: m.images }
    }
}

impl PiecewiseLinearMap {
    pub fn new(breakpoints: Vec<f64>, images: Vec<f64>) -> Result<Self> {
        let k = breakpoints.len();
        if k < 2 || images.len() != k {
            return Err(Error::InvalidArgument(
                "piecewise-linear map needs matching breakpoint and image lists of length >= 2".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("breakpoints must be strictly increasing".into()));
        }
        if ((breakpoints[k - 1] - breakpoints[0]) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument("breakpoints must span exactly one period".into()));
        }
        let span = images[k - 1] - images[0];
        let degree = span.round() as i64;
        if (span - degree as f64).abs() > 1e-12 || degree < 2 {
            return Err(Error::InvalidArgument(format!("lift must wind an integer d >= 2 times, got {span}")));
        }
        let map = Self { breakpoints, images, degree };
        let min = map.slopes().into_iter().fold(f64::INFINITY, f64::min);
        if min <= 1.0 {
            return Err(Error::NotExpanding { inf_derivative: min });
        }
        Ok(map)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn images(&self) -> &[f64] {
        &self.images
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.breakpoints
            .windows(2)
            .zip(self.images.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .collect()
    }

    pub fn min_gap(&self) -> f64 {
        self.breakpoints.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Interval containing `x` (reduced into `[x_0, x_0 + 1)`), with the number of whole turns removed.
    fn locate(&self, x: f64) -> (usize, f64, f64) {
        let x0 = self.breakpoints[0];
        let turns = (x - x0).floor();
        let mut t = x - turns;
        if t >= x0 + 1.0 {
            t = x0;
        }
        let i = self.breakpoints.partition_point(|b| *b <= t).clamp(1, self.intervals()) - 1;
        (i, t, turns)
    }

    pub fn lift(&self, x: f64) -> f64 {
        let (i, t, turns) = self.locate(x);
        let slope = (self.images[i + 1] - self.images[i]) / (self.breakpoints[i + 1] - self.breakpoints[i]);
        self.images[i] + slope * (t - self.breakpoints[i]) + self.degree as f64 * turns
    }

    /// Right derivative of the lift.
    pub fn slope_at(&self, x: f64) -> f64 {
        let (i, _, _) = self.locate(x);
        (self.images[i + 1] - self.images[i]) / (self.breakpoints[i + 1] - self.breakpoints[i])
    }

    /// Checks that every image `y_i mod 1` is a breakpoint to within `tol`.
    pub fn validate_markov(&self, tol: f64) -> Result<()> {
        for (i, y) in self.images.iter().enumerate() {
            let r = y.rem_euclid(1.0);
            let hit = self.breakpoints.iter().any(|b| {
                let d = (b.rem_euclid(1.0) - r).abs();
                d.min(1.0 - d) <= tol
            });
            if !hit {
                return Err(Error::NotMarkov(format!("image {y} of breakpoint {i} is not a breakpoint")));
            }
        }
        Ok(())
    }
}

/// `b(x) = exp(-1/(1-(x/ε)²)) / (κε)` on `|x| < ε`, zero outside; `∫ b = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpKernel {
    epsilon: f64,
    kappa: f64,
}

impl BumpKernel {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidArgument(format!("bump width must lie in (0, 1/2), got {epsilon}")));
        }
        Ok(Self { epsilon, kappa: bump_mass(1 << 14) })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn value(&self, x: f64) -> f64 {
        let u = x / self.epsilon;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - u * u)).exp() / (self.kappa * self.epsilon)
        }
    }
}

/// `∫_{-1}^{1} exp(-1/(1-u²)) du` by the trapezoid rule, spectrally accurate for this flat bump.
fn bump_mass(panels: usize) -> f64 {
    let h = 2.0 / panels as f64;
    (1..panels)
        .map(|i| {
            let u: f64 = -1.0 + i as f64 * h;
            (-1.0 / (1.0 - u * u)).exp()
        })
        .sum::<f64>()
        * h
}

/// A piecewise-linear map whose periodic part has been convolved with a bump,
/// stored as dense samples plus their spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MollifiedDoc", into = "MollifiedDoc")]
pub struct MollifiedMap {
    base: PiecewiseLinearMap,
    epsilon: f64,
    resolution: usize,
    additive: Vec<AdditiveTerm>,
    samples: Vec<f64>,
    spectrum: FourierVector,
}

/// A perturbation `δ·Ṫ` added on top of the smoothed lift.
#[derive(Clone, Debug, PartialEq)]
struct AdditiveTerm {
    delta: f64,
    tdot: FourierVector,
}

#[derive(Serialize, Deserialize)]
struct MollifiedDoc {
    base: PiecewiseLinearMap,
    epsilon: f64,
    samples: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    perturbations: Vec<PerturbationDoc>,
}

#[derive(Serialize, Deserialize)]
struct PerturbationDoc {
    delta: f64,
    size: usize,
    coefficients: Vec<(i64, f64, f64)>,
}

impl TryFrom<MollifiedDoc> for MollifiedMap {
    type Error = Error;
    fn try_from(doc: MollifiedDoc) -> Result<Self> {
        let mut map = MollifiedMap::build(doc.base, doc.epsilon, doc.samples)?;
        for p in doc.perturbations {
            let tdot = coefficient_table_to_vector(p.size, &p.coefficients)?;
            map.additive.push(AdditiveTerm { delta: p.delta, tdot });
        }
        map.refresh()?;
        Ok(map)
    }
}

impl From<MollifiedMap> for MollifiedDoc {
    fn from(m: MollifiedMap) -> Self {
        MollifiedDoc {
            perturbations: m
                .additive
                .iter()
                .map(|a| PerturbationDoc {
                    delta: a.delta,
                    size: a.tdot.size(),
                    coefficients: vector_to_coefficient_table(&a.tdot),
                })
                .collect(),
            base: m.base,
            epsilon: m.epsilon,
            samples: m.resolution,
        }
    }
}

/// `[(n, re, im)]` rows for the nonzero coefficients.
pub fn vector_to_coefficient_table(v: &FourierVector) -> Vec<(i64, f64, f64)> {
    v.iter().map(|(n, a)| (n, a.re, a.im)).collect()
}

pub fn coefficient_table_to_vector(size: usize, rows: &[(i64, f64, f64)]) -> Result<FourierVector> {
    let mut v = FourierVector::from_coeffs(vec![C64::new(0.0, 0.0); size])?;
    for &(n, re, im) in rows {
        if v.index(n).is_none() {
            return Err(Error::InvalidArgument(format!("frequency {n} outside a size-{size} vector")));
        }
        v.set(n, C64::new(re, im));
    }
    Ok(v)
}

impl MollifiedMap {
    fn build(base: PiecewiseLinearMap, epsilon: f64, resolution: usize) -> Result<Self> {
        if resolution < 4096 || !resolution.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "mollification needs an even sample resolution >= 4096, got {resolution}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < base.min_gap()) {
            return Err(Error::InvalidArgument(format!(
                "bump width {epsilon} must lie in (0, {}) (smallest breakpoint gap)",
                base.min_gap()
            )));
        }
        let kernel = BumpKernel::new(epsilon)?;
        let d = base.degree() as f64;
        let periodic = GridSamples::from_fn(resolution, |x| C64::new(base.lift(x) - d * x, 0.0));
        let bump = GridSamples::from_fn(resolution, |x| {
            let s = if x > 0.5 { x - 1.0 } else { x };
            C64::new(kernel.value(s), 0.0)
        });
        let p_hat = forward_dft(&periodic)?;
        let b_hat = forward_dft(&bump)?;
        let coeffs = p_hat.coeffs().iter().zip(b_hat.coeffs()).map(|(p, b)| p * b).collect();
        let spectrum = FourierVector::from_coeffs(coeffs)?.symmetrize_real();
        let samples = inverse_dft(&spectrum, resolution)?.re();
        Ok(Self { base, epsilon, resolution, additive: Vec::new(), samples, spectrum })
    }

    fn refresh(&mut self) -> Result<()> {
        let smooth = MollifiedMap::build(self.base.clone(), self.epsilon, self.resolution)?;
        let mut samples = smooth.samples;
        for term in &self.additive {
            let g = inverse_dft(&term.tdot, self.resolution)?;
            for (s, v) in samples.iter_mut().zip(g.values()) {
                *s += term.delta * v.re;
            }
        }
        self.spectrum = forward_dft(&GridSamples::from_real(&samples))?.symmetrize_real();
        self.samples = samples;
        Ok(())
    }

    pub fn base(&self) -> &PiecewiseLinearMap {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Samples of the smoothed periodic part at `j / resolution`.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn spectrum(&self) -> &FourierVector {
        &self.spectrum
    }
}

/// Samples `Re Σ a_n e_n(j/M)` for any `M`.
fn sample_spectrum(spec: &FourierVector, m: usize) -> Result<Vec<f64>> {
    let s = spec.size();
    if m >= s && m.is_multiple_of(2) {
        Ok(inverse_dft(spec, m)?.re())
    } else if s.is_multiple_of(m) {
        let fine = inverse_dft(spec, s)?.re();
        Ok(fine.into_iter().step_by(s / m).collect())
    } else {
        Ok((0..m).map(|j| spec.eval(j as f64 / m as f64).re).collect())
    }
}

/// An expanding circle map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum CircleMap {
    TrigPolynomial(TrigPolynomialMap),
    PiecewiseLinearMarkov(PiecewiseLinearMap),
    Mollified(MollifiedMap),
}

impl CircleMap {
    /// `x ↦ 2x mod 1`.
    pub fn doubling() -> Self {
        CircleMap::TrigPolynomial(TrigPolynomialMap::new(2, 0.0, Vec::new()))
    }

    /// `x ↦ 2x − (0.9/2π) sin(2πx)`, with a slightly sticky fixed point at 0.
    pub fn sticky2x() -> Self {
        CircleMap::TrigPolynomial(TrigPolynomialMap::new(
            2,
            0.0,
            vec![TrigTerm { k: 1, cos: 0.0, sin: -0.9 / TWO_PI }],
        ))
    }

    /// Two-branch, 12-piece piecewise-linear Markov map with an isolated
    /// eigenvalue near 0.8231. Breakpoints are the 4-decimal values; breakpoint
    /// `x_k` maps to `x_{2k mod 12}` on the lift.
    pub fn gapmap12() -> Self {
        CircleMap::PiecewiseLinearMarkov(gapmap12_base())
    }

    /// [`CircleMap::gapmap12`] mollified with `ε = 1/40` at the default resolution.
    pub fn gapmap12_smooth() -> Self {
        CircleMap::mollify(&gapmap12_base(), 1.0 / 40.0, DEFAULT_MOLLIFY_SAMPLES)
            .expect("built-in mollification is valid")
    }

    /// Built-in presets: `doubling`, `sticky2x`, `gapmap12`, `gapmap12-smooth`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "doubling" => Ok(Self::doubling()),
            "sticky2x" => Ok(Self::sticky2x()),
            "gapmap12" => Ok(Self::gapmap12()),
            "gapmap12-smooth" | "gapmap12_smooth" => Ok(Self::gapmap12_smooth()),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn degree(&self) -> i64 {
        match self {
            CircleMap::TrigPolynomial(m) => m.degree,
            CircleMap::PiecewiseLinearMarkov(m) => m.degree,
            CircleMap::Mollified(m) => m.base.degree,
        }
    }

    /// Periodic part `p(x) = T(x) − d·x`.
    pub fn periodic_part(&self, x: f64) -> f64 {
        match self {
            CircleMap::TrigPolynomial(m) => m.periodic_derivative(x, 0),
            CircleMap::PiecewiseLinearMarkov(m) => m.lift(x) - m.degree as f64 * x,
            CircleMap::Mollified(m) => m.spectrum.eval(x).re,
        }
    }

    pub fn lift(&self, x: f64) -> f64 {
        self.degree() as f64 * x + self.periodic_part(x)
    }

    /// `T(x) mod 1`.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.lift(x).rem_euclid(1.0)
    }

    /// Derivative of the lift of order 1, 2 or 3.
    pub fn derivative(&self, x: f64, order: u32) -> Result<f64> {
        if !(1..=3).contains(&order) {
            return Err(Error::InvalidArgument(format!("derivative order must be 1..=3, got {order}")));
        }
        let lin = if order == 1 { self.degree() as f64 } else { 0.0 };
        Ok(match self {
            CircleMap::TrigPolynomial(m) => lin + m.periodic_derivative(x, order),
            CircleMap::PiecewiseLinearMarkov(m) => {
                if order == 1 {
                    m.slope_at(x)
                } else {
                    0.0
                }
            }
            CircleMap::Mollified(m) => {
                let mut d = m.spectrum.clone();
                for _ in 0..order {
                    d = spectral_derivative(&d);
                }
                lin + d.eval(x).re
            }
        })
    }

    /// Lift values at `x_j = j/M`.
    pub fn sample_lift(&self, m: usize) -> Result<Vec<f64>> {
        let d = self.degree() as f64;
        let h = 1.0 / m as f64;
        let periodic = match self {
            CircleMap::Mollified(mm) => sample_spectrum(&mm.spectrum, m)?,
            _ => (0..m).map(|j| self.periodic_part(j as f64 * h)).collect(),
        };
        Ok(periodic.into_iter().enumerate().map(|(j, p)| d * j as f64 * h + p).collect())
    }

    /// Samples of the periodic part at `x_j = j/M`.
    pub fn sample_periodic(&self, m: usize) -> Result<Vec<f64>> {
        let d = self.degree() as f64;
        Ok(self
            .sample_lift(m)?
            .into_iter()
            .enumerate()
            .map(|(j, t)| t - d * j as f64 / m as f64)
            .collect())
    }

    /// Derivative samples of order 1..=3 at `x_j = j/M`.
    pub fn sample_derivative(&self, m: usize, order: u32) -> Result<Vec<f64>> {
        if !(1..=3).contains(&order) {
            return Err(Error::InvalidArgument(format!("derivative order must be 1..=3, got {order}")));
        }
        match self {
            CircleMap::Mollified(mm) => {
                let mut d = mm.spectrum.clone();
                for _ in 0..order {
                    d = spectral_derivative(&d);
                }
                let lin = if order == 1 { self.degree() as f64 } else { 0.0 };
                Ok(sample_spectrum(&d, m)?.into_iter().map(|v| v + lin).collect())
            }
            _ => (0..m).map(|j| self.derivative(j as f64 / m as f64, order)).collect(),
        }
    }

    /// Minimum of `T'` over a uniform grid.
    pub fn min_derivative(&self, resolution: usize) -> Result<f64> {
        if resolution < 1024 {
            return Err(Error::InvalidArgument(format!("resolution must be >= 1024, got {resolution}")));
        }
        Ok(self.sample_derivative(resolution, 1)?.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// Checks `inf T' > 1` on a 2¹⁴-point grid, less a Lipschitz margin
    /// `sup|T''|·h/2`. Returns the grid minimum of `T'`.
    pub fn check_expanding(&self) -> Result<f64> {
        let m = EXPANSIVITY_GRID;
        let inf = self.sample_derivative(m, 1)?.into_iter().fold(f64::INFINITY, f64::min);
        let margin = match self {
            CircleMap::PiecewiseLinearMarkov(_) => 0.0,
            _ => {
                let sup2 = self.sample_derivative(m, 2)?.into_iter().fold(0.0, |a: f64, v| a.max(v.abs()));
                sup2 * 0.5 / m as f64
            }
        };
        if inf - margin <= 1.0 {
            return Err(Error::NotExpanding { inf_derivative: inf });
        }
        Ok(inf)
    }

    /// Convolves the periodic part of `base` with [`BumpKernel`] of width `epsilon`
    /// by quadrature on `samples` points.
    pub fn mollify(base: &PiecewiseLinearMap, epsilon: f64, samples: usize) -> Result<Self> {
        let map = CircleMap::Mollified(MollifiedMap::build(base.clone(), epsilon, samples)?);
        map.check_expanding()?;
        Ok(map)
    }

    /// The map with lift `T(x) + δ·Ṫ(x)`; `Ṫ` must be real-valued.
    pub fn perturb(&self, tdot: &FourierVector, delta: f64) -> Result<Self> {
        if !tdot.is_real_valued(1e-9 * tdot.max_abs().max(1.0)) {
            return Err(Error::InvalidArgument("perturbation must be real-valued".into()));
        }
        if delta == 0.0 || tdot.max_abs() == 0.0 {
            return Ok(self.clone());
        }
        let tdot = tdot.symmetrize_real();
        let out = match self {
            CircleMap::TrigPolynomial(m) => {
                let mut m = m.clone();
                m.add_fourier(&tdot, delta);
                CircleMap::TrigPolynomial(m)
            }
            CircleMap::Mollified(m) => {
                if tdot.size() > m.resolution {
                    return Err(Error::InvalidArgument(format!(
                        "perturbation with {} modes exceeds the {}-point sample grid",
                        tdot.size(),
                        m.resolution
                    )));
                }
                let mut m = m.clone();
                m.additive.push(AdditiveTerm { delta, tdot });
                m.refresh()?;
                CircleMap::Mollified(m)
            }
            CircleMap::PiecewiseLinearMarkov(_) => {
                return Err(Error::InvalidArgument(
                    "smooth perturbations of piecewise-linear maps are not representable; mollify first".into(),
                ))
            }
        };
        out.check_expanding()?;
        Ok(out)
    }
}

/// Breakpoints of the 12-piece gap map, rounded to 4 decimals.
pub const GAPMAP12_BREAKPOINTS: [f64; 13] = [
    0.0, 0.1197, 0.2045, 0.2453, 0.3369, 0.3874, 0.49, 0.5875, 0.6336, 0.7343, 0.7695, 0.8523, 1.0,
];

fn gapmap12_base() -> PiecewiseLinearMap {
    let x = GAPMAP12_BREAKPOINTS;
    let images = (0..13)
        .map(|k| {
            let j = 2 * k;
            x[j % 12] + (j / 12) as f64
        })
        .collect();
    PiecewiseLinearMap::new(x.to_vec(), images).expect("gapmap12 data is a valid expanding map")
}
