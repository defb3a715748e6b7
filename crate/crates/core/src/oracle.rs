//! Independent checks of the response formulas: finite differences of the
//! perturbed map's invariant density and eigenvalue, and Ulam's method for
//! invariant densities.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle_map::{CircleMap, PiecewiseLinearMap};
use crate::error::{Error, Result};
use crate::fourier::{inverse_dft, FourierVector};
use crate::response::ResponseContext;
use crate::transfer::TransferMatrix;

/// Default step ladder.
pub const DEFAULT_DELTAS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
/// Accepted range for the last-step convergence order.
pub const ORDER_RANGE: (f64, f64) = (0.8, 2.2);
/// Two candidate eigenvalues closer than this (in distance to the reference) make tracking ambiguous.
pub const TRACKING_TOL: f64 = 1e-4;

/// Finite-difference comparison of a response formula against difference quotients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    pub kind: String,
    pub deltas: Vec<f64>,
    /// Discrepancy between quotient and formula at each step.
    pub errors: Vec<f64>,
    /// Convergence orders between consecutive steps.
    pub orders: Vec<f64>,
    pub estimated_order: Option<f64>,
    /// Scalar formula value, when the response is a number.
    pub formula_value: Option<f64>,
    /// Forward quotients (eigenvalue) or their `L¹` norms (density).
    pub quotient_values: Vec<f64>,
    /// Symmetric quotients `(λ_δ − λ_{−δ})/2δ`, eigenvalue reports only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub central_quotients: Vec<f64>,
    pub passed: bool,
}

impl FdReport {
    fn finish(kind: &str, deltas: &[f64], errors: Vec<f64>, formula_value: Option<f64>, quotient_values: Vec<f64>) -> Self {
        let orders: Vec<f64> = deltas
            .windows(2)
            .zip(errors.windows(2))
            .map(|(d, e)| (e[0] / e[1]).ln() / (d[0] / d[1]).ln())
            .collect();
        let estimated_order = orders.last().copied().filter(|o| o.is_finite());
        let trivial = errors.iter().all(|e| *e == 0.0);
        let decreasing = errors.windows(2).all(|e| e[1] < e[0]);
        let in_range = estimated_order.is_some_and(|o| o >= ORDER_RANGE.0 && o <= ORDER_RANGE.1);
        Self {
            kind: kind.to_string(),
            deltas: deltas.to_vec(),
            errors,
            orders,
            estimated_order,
            formula_value,
            quotient_values,
            central_quotients: Vec::new(),
            passed: trivial || (decreasing && in_range),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_deltas(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() || deltas.iter().any(|d| d.is_nan() || *d <= 0.0) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("step ladder must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// `∫|f|` by the rectangle rule on `8N` points.
pub fn l1_norm(f: &FourierVector) -> Result<f64> {
    let m = 8 * f.size();
    let s = inverse_dft(f, m)?;
    Ok(s.values().iter().map(|v| v.norm()).sum::<f64>() / m as f64)
}

/// `‖(f_δ − f₀)/δ − R(Ṫ)‖_{L¹}` for each step of the ladder.
pub fn fd_density_response(ctx: &ResponseContext, tdot: &FourierVector, deltas: &[f64]) -> Result<FdReport> {
    fd_density_report(ctx, tdot, deltas, 1.0)
}

/// As [`fd_density_response`], comparing against `sign·R(Ṫ)`.
pub(crate) fn fd_density_report(
    ctx: &ResponseContext,
    tdot: &FourierVector,
    deltas: &[f64],
    sign: f64,
) -> Result<FdReport> {
    check_deltas(deltas)?;
    let r = ctx.density_response(tdot)? * sign;
    let f0 = ctx.density();
    let size = ctx.size();
    let fine = ctx.operator().fine_factor();
    let rows: Vec<(f64, f64)> = deltas
        .par_iter()
        .map(|&delta| {
            let map = ctx.map().perturb(tdot, delta)?;
            let fd = TransferMatrix::assemble(&map, size, fine)?.invariant_density()?;
            let q = &(&fd - f0) * (1.0 / delta);
            Ok((l1_norm(&(&q - &r))?, l1_norm(&q)?))
        })
        .collect::<Result<_>>()?;
    let (errors, norms) = rows.into_iter().unzip();
    Ok(FdReport::finish("density", deltas, errors, None, norms))
}

/// Nearest eigenvalue of `op` to `reference`, failing if the runner-up is within [`TRACKING_TOL`].
pub fn track_eigenvalue(op: &TransferMatrix, reference: f64, delta: f64) -> Result<f64> {
    let values = crate::linalg::eigenvalues(op.to_mat().as_ref())?;
    let target = C64::new(reference, 0.0);
    let mut dist: Vec<(f64, C64)> = values.iter().map(|v| ((v - target).norm(), *v)).collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (d1, best) = dist[0];
    // A conjugate partner of a real eigenvalue is the eigenvalue itself.
    if let Some(&(d2, _)) = dist[1..].iter().find(|(_, v)| (v - best.conj()).norm() > 1e-12) {
        if d2 - d1 < TRACKING_TOL {
            return Err(Error::TrackingAmbiguous { delta });
        }
    }
    Ok(best.re)
}

/// Difference quotients `(λ_δ − λ₀)/δ` against `λ̇(Ṫ)`.
pub fn fd_eigenvalue_response(ctx: &ResponseContext, tdot: &FourierVector, deltas: &[f64]) -> Result<FdReport> {
    fd_eigenvalue_report(ctx, tdot, deltas, 1.0)
}

/// As [`fd_eigenvalue_response`], comparing against `sign·λ̇(Ṫ)`.
pub(crate) fn fd_eigenvalue_report(
    ctx: &ResponseContext,
    tdot: &FourierVector,
    deltas: &[f64],
    sign: f64,
) -> Result<FdReport> {
    check_deltas(deltas)?;
    let ed = ctx.eigen().ok_or(Error::MissingEigenData)?;
    let formula = sign * ctx.eigenvalue_response(tdot)?;
    let size = ctx.size();
    let fine = ctx.operator().fine_factor();
    // Re-derived with the same routine as the perturbed values, so that a zero
    // perturbation gives quotients of exactly zero.
    let lambda0 = track_eigenvalue(ctx.operator(), ed.lambda0, 0.0)?;
    let eig_at = |delta: f64| -> Result<f64> {
        if delta == 0.0 {
            return Ok(lambda0);
        }
        let map = ctx.map().perturb(tdot, delta)?;
        track_eigenvalue(&TransferMatrix::assemble(&map, size, fine)?, lambda0, delta)
    };
    let rows: Vec<(f64, f64)> = deltas
        .par_iter()
        .map(|&d| {
            let (up, down) = (eig_at(d)?, eig_at(-d)?);
            Ok(((up - lambda0) / d, (up - down) / (2.0 * d)))
        })
        .collect::<Result<_>>()?;
    let (quotients, central): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let errors = quotients.iter().map(|q| (q - formula).abs()).collect();
    let mut report = FdReport::finish("eigenvalue", deltas, errors, Some(formula), quotients);
    report.central_quotients = central;
    Ok(report)
}

/// Stationary density of the Ulam matrix on `bins` equal bins.
///
/// Each bin is split into 64 sub-intervals on which the lift is replaced by its
/// chord; the exact overlap of each chord image with the target bins gives the
/// transition probabilities.
pub fn ulam_density(map: &CircleMap, bins: usize) -> Result<Vec<f64>> {
    if bins < 1 << 12 {
        return Err(Error::InvalidArgument(format!("Ulam oracle needs at least 4096 bins, got {bins}")));
    }
    const POINTS: usize = 64;
    let samples = map.sample_lift(bins * POINTS)?;
    let degree = map.degree() as f64;
    // Lift at (i + k/64)/bins, continued past x = 1 by the degree.
    let lift_at = |j: usize| if j == samples.len() { samples[0] + degree } else { samples[j] };
    let rows: Vec<Vec<(usize, f64)>> = (0..bins)
        .into_par_iter()
        .map(|i| {
            let mut row: Vec<(usize, f64)> = Vec::new();
            let mut add = |j: usize, w: f64| match row.iter_mut().find(|(c, _)| *c == j) {
                Some(e) => e.1 += w,
                None => row.push((j, w)),
            };
            for k in 0..POINTS {
                let j = i * POINTS + k;
                let (a, b) = (lift_at(j) * bins as f64, lift_at(j + 1) * bins as f64);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let len = hi - lo;
                if len == 0.0 {
                    add((lo.floor() as i64).rem_euclid(bins as i64) as usize, 1.0 / POINTS as f64);
                    continue;
                }
                let mut cell = lo.floor();
                while cell < hi {
                    let overlap = hi.min(cell + 1.0) - lo.max(cell);
                    if overlap > 0.0 {
                        add((cell as i64).rem_euclid(bins as i64) as usize, overlap / len / POINTS as f64);
                    }
                    cell += 1.0;
                }
            }
            row
        })
        .collect();
    let p = stationary_vector(&rows)?;
    Ok(p.into_iter().map(|v| v * bins as f64).collect())
}

/// Exact Ulam matrix of a piecewise-linear map on an arbitrary partition of
/// `[x_0, x_0 + 1)`; returns the density value on each cell.
pub fn ulam_density_on_partition(map: &PiecewiseLinearMap, partition: &[f64]) -> Result<Vec<f64>> {
    let k = partition.len().saturating_sub(1);
    if k < 1 || partition.windows(2).any(|w| w[1] <= w[0]) || ((partition[k] - partition[0]) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("partition must be increasing and span one period".into()));
    }
    let bx = map.breakpoints();
    let slopes = map.slopes();
    let rows: Vec<Vec<(usize, f64)>> = (0..k)
        .map(|i| {
            let (a, b) = (partition[i], partition[i + 1]);
            let mut row: Vec<(usize, f64)> = Vec::new();
            // Split [a, b] at the breakpoints of the map (shifted by whole turns).
            let mut cuts = vec![a, b];
            for s in [-1.0, 0.0, 1.0] {
                cuts.extend(bx.iter().map(|x| x + s).filter(|x| *x > a && *x < b));
            }
            cuts.sort_by(f64::total_cmp);
            for w in cuts.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let slope = slopes[breakpoint_piece(bx, 0.5 * (lo + hi))];
                let (y_lo, y_hi) = (map.lift(lo), map.lift(lo) + slope * (hi - lo));
                let first = (y_lo - partition[0]).floor() as i64 - 1;
                let last = (y_hi - partition[0]).ceil() as i64;
                for turn in first..=last {
                    for j in 0..k {
                        let c_lo = partition[j] + turn as f64;
                        let c_hi = partition[j + 1] + turn as f64;
                        let overlap = y_hi.min(c_hi) - y_lo.max(c_lo);
                        if overlap > 0.0 {
                            let mass = overlap / slope / (b - a);
                            match row.iter_mut().find(|(c, _)| *c == j) {
                                Some(e) => e.1 += mass,
                                None => row.push((j, mass)),
                            }
                        }
                    }
                }
            }
            row
        })
        .collect();
    let p = stationary_vector(&rows)?;
    Ok(p.iter().zip(partition.windows(2)).map(|(v, w)| v / (w[1] - w[0])).collect())
}

fn breakpoint_piece(bx: &[f64], x: f64) -> usize {
    let x0 = bx[0];
    let t = x - (x - x0).floor();
    bx.partition_point(|b| *b <= t).clamp(1, bx.len() - 1) - 1
}

/// Left fixed vector of a sparse row-stochastic matrix by power iteration.
fn stationary_vector(rows: &[Vec<(usize, f64)>]) -> Result<Vec<f64>> {
    let n = rows.len();
    let mut p = vec![1.0 / n as f64; n];
    for _ in 0..1_000_000 {
        let mut next = vec![0.0; n];
        for (i, row) in rows.iter().enumerate() {
            for &(j, w) in row {
                next[j] += p[i] * w;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let change: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if change < 1e-12 {
            return Ok(p);
        }
    }
    Err(Error::Eigensolver("Ulam power iteration did not converge".into()))
}

/// `∫|f₀ − u|` between a Fourier density and a step density on equal bins.
pub fn l1_distance_to_steps(f0: &FourierVector, steps: &[f64]) -> Result<f64> {
    let per = 4;
    let m = per * steps.len();
    let s = inverse_dft(f0, m)?;
    Ok(s
        .values()
        .chunks(per)
        .zip(steps)
        .map(|(chunk, u)| chunk.iter().map(|v| (v.re - u).abs()).sum::<f64>())
        .sum::<f64>()
        / m as f64)
}
