//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p circle-response --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use circle_response::fourier::{inverse_dft, spectral_derivative};
use circle_response::optimizer::{constraint_norm, OptimizationResult};
use circle_response::transfer::{essential_bound, MarkovMatrix, REAL_EIGENVALUE_TOL};
use circle_response::{
    fd_density_response, fd_eigenvalue_response, objective_certificate, optimal_eigenvalue_perturbation,
    optimal_expectation_perturbation, CircleMap, DerivativeScheme, FourierVector, ResponseContext, Result,
    TransferMatrix,
};
use num_complex::Complex64 as C64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 512;
const FINE: usize = 8;
const REFERENCE_RATES: [(f64, f64); 4] = [(1.0, 0.5758), (25.0, 3.1427), (50.0, 11.1590), (200.0, 125.51)];

struct Shared {
    gap: ResponseContext,
    sticky: ResponseContext,
    sticky_spectral: ResponseContext,
}

fn shared() -> Result<Shared> {
    let gap = ResponseContext::new(CircleMap::gapmap12_smooth(), N, FINE, DerivativeScheme::CentralDifference)?
        .with_eigenvalue(0.7)?;
    let sticky = ResponseContext::new(CircleMap::sticky2x(), N, FINE, DerivativeScheme::CentralDifference)?;
    let sticky_spectral = ResponseContext::new(CircleMap::sticky2x(), N, FINE, DerivativeScheme::Spectral)?;
    Ok(Shared { gap, sticky, sticky_spectral })
}

type Check = Result<(bool, String)>;

fn markov_eigenvalue() -> Check {
    let m = MarkovMatrix::from_map(&CircleMap::gapmap12())?;
    let l2 = m.second_real_eigenvalue()?;
    let bound = m.essential_bound();
    let ok = (l2 - 0.8231).abs() <= 5e-4 && (bound - 0.6579).abs() <= 5e-4;
    Ok((ok, format!("lambda_2 = {l2:.6} (0.8231 ± 5e-4), 1/inf T' = {bound:.6} (0.6579 ± 5e-4)")))
}

fn smoothed_eigenvalue(s: &Shared) -> Check {
    let spec = s.gap.operator().spectrum(4)?;
    let l = spec[1];
    let ok = l.im.abs() < REAL_EIGENVALUE_TOL && (l.re - 0.6992).abs() <= 5e-3;
    let bound = essential_bound(s.gap.map())?;
    Ok((ok, format!("second eigenvalue = {:.6}{:+.1e}i (0.6992 ± 5e-3), essential bound {bound:.4}", l.re, l.im)))
}

fn eigen_rates(s: &Shared) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (gamma, want) in REFERENCE_RATES {
        let r = optimal_eigenvalue_perturbation(&s.gap, gamma)?;
        let rel = (r.objective - want).abs() / want;
        ok &= rel <= 0.05 && r.objective > last;
        last = r.objective;
        parts.push(format!("γ={gamma}: {:.4} vs {want} ({:.2}%)", r.objective, 100.0 * rel));
    }
    Ok((ok, parts.join(", ")))
}

fn doubling_closed_forms() -> Check {
    let map = CircleMap::doubling();
    let op = TransferMatrix::assemble(&map, 16, FINE)?;
    let mut worst: f64 = 0.0;
    for m in -7..=7i64 {
        let image = op.apply(&FourierVector::mode(16, m))?;
        let want = if m % 2 == 0 { FourierVector::mode(16, m / 2) } else { FourierVector::zeros(16) };
        worst = worst.max(image.max_abs_diff(&want));
    }
    // The Nyquist slot holds cos(16πx), whose image is cos(8πx).
    let image = op.apply(&FourierVector::mode(16, 8))?;
    worst = worst.max(image.max_abs_diff(&FourierVector::cosine(16, 4)));
    let y = op.resolvent_solve(&FourierVector::mode(16, 2))?;
    let res = y.max_abs_diff(&(&FourierVector::mode(16, 2) + &FourierVector::mode(16, 1)));
    let f = op.invariant_density()?;
    let fd = f.max_abs_diff(&FourierVector::constant(16, 1.0));
    let phi = circle_response::adjoint_representative(&op, 1.0)?;
    let pd = phi.max_abs_diff(&FourierVector::constant(16, 1.0));
    let ok = worst <= 1e-12 && res <= 1e-10 && fd <= 1e-10 && pd <= 1e-8;
    Ok((ok, format!("matrix {worst:.1e}, resolvent {res:.1e}, density {fd:.1e}, adjoint {pd:.1e}")))
}

fn fd_density(s: &Shared) -> Check {
    let r = optimal_expectation_perturbation(&s.sticky_spectral, &FourierVector::cosine(N, 1), 1.0)?;
    let rep = fd_density_response(&s.sticky_spectral, &r.tdot, &[1e-2, 5e-3, 2.5e-3])?;
    let order = rep.estimated_order.unwrap_or(f64::NAN);
    let decreasing = rep.errors.windows(2).all(|w| w[1] < w[0]);
    let ok = decreasing && (0.8..=2.2).contains(&order);
    Ok((ok, format!("L1 errors {:.3e} {:.3e} {:.3e}, last-step order {order:.3}", rep.errors[0], rep.errors[1], rep.errors[2])))
}

fn fd_eigenvalue(s: &Shared) -> Check {
    let r = optimal_eigenvalue_perturbation(&s.gap, 1.0)?;
    let rep = fd_eigenvalue_response(&s.gap, &r.tdot, &[1e-3])?;
    let formula = rep.formula_value.unwrap_or(f64::NAN);
    let q = rep.quotient_values[0];
    let rel = (q - formula).abs() / formula.abs();
    Ok((
        rel <= 0.05,
        format!(
            "forward quotient {q:.4} vs formula {formula:.4} ({:.1}% off; tolerance 5%), symmetric quotient {:.4}",
            100.0 * rel,
            rep.central_quotients[0]
        ),
    ))
}

fn certificates(s: &Shared) -> Check {
    let e = optimal_expectation_perturbation(&s.sticky, &FourierVector::cosine(N, 1), 1.0)?;
    let ce = objective_certificate(&s.sticky, &e, 100, 2024)?;
    let g = optimal_eigenvalue_perturbation(&s.gap, 1.0)?;
    let cg = objective_certificate(&s.gap, &g, 100, 2024)?;
    let ok = ce.max_ratio <= 1.0 + 1e-9 / e.objective && cg.max_ratio <= 1.0 + 1e-9 / g.objective;
    Ok((ok, format!("expectation max ratio {:.4}, eigenvalue max ratio {:.4} (100 trials each)", ce.max_ratio, cg.max_ratio)))
}

fn profile_at_zero(r: &OptimizationResult) -> Result<(f64, f64, f64)> {
    let v = r.tdot.get(0).re + r.tdot.iter().filter(|(n, _)| *n != 0).map(|(_, a)| a.re).sum::<f64>();
    let dv: f64 = spectral_derivative(&r.tdot).coeffs().iter().map(|a| a.re).sum();
    let max = inverse_dft(&r.tdot, 8 * r.tdot.size())?.values().iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    Ok((v, dv, max))
}

fn qualitative(s: &Shared) -> Check {
    let rc = optimal_expectation_perturbation(&s.sticky, &FourierVector::cosine(N, 1), 1.0)?;
    let (v, dv, max) = profile_at_zero(&rc)?;
    let rs = optimal_expectation_perturbation(&s.sticky, &FourierVector::sine(N, 1), 1.0)?;
    let (w, _, _) = profile_at_zero(&rs)?;
    let ok = v.abs() <= 0.05 * max && dv < 0.0 && w > 0.0;
    Ok((ok, format!("cos: Ṫ(0) = {v:.2e} (max |Ṫ| {max:.3e}), Ṫ′(0) = {dv:.4e}; sin: Ṫ(0) = {w:.4}")))
}

fn random_real(rng: &mut ChaCha8Rng, size: usize, band: i64) -> FourierVector {
    let mut v = FourierVector::zeros(size);
    v.set(0, C64::new(rng.random_range(-1.0..1.0), 0.0));
    for n in 1..=band {
        let decay = 1.0 / (1.0 + (n * n) as f64);
        let a = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * decay;
        v.set(n, a);
        v.set(-n, a.conj());
    }
    v
}

fn invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut notes = Vec::new();
    let mut ok = true;
    for size in [64usize, 256, 512] {
        let ctx = ResponseContext::new(CircleMap::sticky2x(), size, FINE, DerivativeScheme::Spectral)?;
        let op = ctx.operator();
        let half = (size / 2) as i64;
        let mut sym: f64 = 0.0;
        let mut row0: f64 = 0.0;
        for n in (1 - half)..half {
            for m in (1 - half)..half {
                sym = sym.max((op.entry(-n, -m) - op.entry(n, m).conj()).norm());
            }
        }
        for m in (1 - half)..=half {
            let want = if m == 0 { 1.0 } else { 0.0 };
            row0 = row0.max((op.entry(0, m) - C64::new(want, 0.0)).norm());
        }
        let mut apply_sym: f64 = 0.0;
        let mut lin: f64 = 0.0;
        let mut mean: f64 = 0.0;
        for _ in 0..20 {
            let f = random_real(&mut rng, size, 8);
            let t = random_real(&mut rng, size, 8);
            let out = op.apply(&f)?;
            for n in 1..half {
                apply_sym = apply_sym.max((out.get(-n) - out.get(n).conj()).norm());
            }
            let compact = ctx.derivative_op_apply(&f, &t)?;
            let expanded = ctx.derivative_op_apply_expanded(&f, &t)?;
            lin = lin.max(compact.max_abs_diff(&expanded));
            mean = mean.max(compact.get(0).norm());
        }
        let c = FourierVector::cosine(size, 1);
        let r = optimal_expectation_perturbation(&ctx, &c, 1.0)?;
        let stat = r.stationarity_residual()?;
        let unit = (constraint_norm(&r.tdot, 1.0)? - 1.0).abs();
        let pass = sym <= 1e-10 && row0 <= 1e-10 && apply_sym <= 1e-10 && lin <= 1e-9 && mean <= 1e-9 && stat <= 1e-9 && unit <= 1e-10;
        ok &= pass;
        notes.push(format!(
            "N={size}: sym {sym:.0e}, row0 {row0:.0e}, apply {apply_sym:.0e}, L̇ forms {lin:.0e}, mean {mean:.0e}, stationarity {stat:.0e}, norm {unit:.0e}"
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let shared = shared();
    let mut failures = 0;
    let mut report = |id: u32, name: &str, f: &dyn Fn() -> Check| {
        let t = Instant::now();
        let (pass, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "[{}] criterion {id}: {name}: {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    };
    let s = match &shared {
        Ok(s) => s,
        Err(e) => {
            println!("[FAIL] setup: {e}");
            return ExitCode::FAILURE;
        }
    };
    report(1, "Markov matrix eigenvalue", &markov_eigenvalue);
    report(2, "smoothed-map eigenvalue", &|| smoothed_eigenvalue(s));
    report(3, "optimal eigenvalue responses", &|| eigen_rates(s));
    report(4, "doubling-map closed forms", &doubling_closed_forms);
    report(5, "finite-difference density response", &|| fd_density(s));
    report(6, "finite-difference eigenvalue response", &|| fd_eigenvalue(s));
    report(7, "optimality certificate", &|| certificates(s));
    report(8, "qualitative fixed-point behaviour", &|| qualitative(s));
    report(9, "invariant suites", &invariants);
    println!("{} of 9 criteria failed ({:.1}s total)", failures, start.elapsed().as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
