//! Command-line driver: reads a JSON run configuration and writes CSV/JSON artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::circle_map::{coefficient_table_to_vector, CircleMap};
use crate::error::{Error, ErrorClass, Result};
use crate::fourier::{inverse_dft, FourierVector};
use crate::optimizer::{
    objective_certificate, optimal_eigenvalue_perturbation, optimal_expectation_perturbation, OptimizationResult,
};
use crate::oracle::{fd_density_report, fd_eigenvalue_report, DEFAULT_DELTAS};
use crate::response::{DerivativeScheme, ResponseContext};
use crate::transfer::{essential_bound, write_spectrum_csv, TransferMatrix, DEFAULT_FINE_FACTOR};

/// A map given either by preset name or in full.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Preset(String),
    Map(CircleMap),
}

impl MapSpec {
    pub fn resolve(&self) -> Result<CircleMap> {
        match self {
            MapSpec::Preset(name) => CircleMap::preset(name),
            MapSpec::Map(m) => Ok(m.clone()),
        }
    }
}

/// An observable: `cos`, `sin` (first harmonic), `cosK`/`sinK`, `constant`,
/// or explicit `[n, re, im]` coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Named(String),
    Coefficients { coefficients: Vec<(i64, f64, f64)> },
}

impl ObservableSpec {
    pub fn resolve(&self, size: usize) -> Result<FourierVector> {
        match self {
            ObservableSpec::Coefficients { coefficients } => coefficient_table_to_vector(size, coefficients),
            ObservableSpec::Named(name) => {
                let bad = || Error::InvalidArgument(format!("unknown observable `{name}`"));
                if name == "constant" {
                    return Ok(FourierVector::constant(size, 1.0));
                }
                let (cosine, rest) = match (name.strip_prefix("cos"), name.strip_prefix("sin")) {
                    (Some(rest), _) => (true, rest),
                    (_, Some(rest)) => (false, rest),
                    _ => return Err(bad()),
                };
                let k: i64 = if rest.is_empty() { 1 } else { rest.parse().map_err(|_| bad())? };
                if k < 1 || k >= (size / 2) as i64 {
                    return Err(Error::InvalidArgument(format!("harmonic {k} not representable on {size} modes")));
                }
                Ok(if cosine { FourierVector::cosine(size, k) } else { FourierVector::sine(size, k) })
            }
        }
    }
}

/// Perturbation used by `validate`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerturbationSpec {
    /// `"optimal"` or `"zero"`.
    Named(String),
    Coefficients { coefficients: Vec<(i64, f64, f64)> },
    #[default]
    #[serde(skip)]
    Optimal,
}

fn default_map() -> MapSpec {
    MapSpec::Preset("sticky2x".into())
}
fn default_grid() -> usize {
    512
}
fn default_fine() -> usize {
    DEFAULT_FINE_FACTOR
}
fn default_gammas() -> Vec<f64> {
    vec![1.0]
}
fn default_deltas() -> Vec<f64> {
    DEFAULT_DELTAS.to_vec()
}
fn default_trials() -> usize {
    100
}
fn default_resolution() -> usize {
    1024
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// The JSON run configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_map")]
    pub map: MapSpec,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default = "default_fine")]
    pub fine_factor: usize,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
    #[serde(default)]
    pub target_eigenvalue: Option<f64>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    /// Differentiation scheme; unset means central differences for the
    /// optimizers and spectral differentiation for `validate`.
    #[serde(default)]
    pub scheme: Option<DerivativeScheme>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub certificate_trials: usize,
    #[serde(default = "default_resolution")]
    pub profile_resolution: usize,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 16 || !self.grid_size.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("grid_size must be even and >= 16, got {}", self.grid_size)));
        }
        if self.gammas.is_empty() || self.gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidArgument("gammas must be a non-empty list of positive numbers".into()));
        }
        if self.profile_resolution < self.grid_size || !self.profile_resolution.is_multiple_of(2) {
            return Err(Error::InvalidArgument("profile_resolution must be even and >= grid_size".into()));
        }
        Ok(())
    }
}

#[derive(Parser, Debug)]
#[command(name = "circle-response", version, about = "Transfer operators and optimal linear response for expanding circle maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Map preset: doubling, sticky2x, gapmap12, gapmap12-smooth.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Comma-separated constraint weights.
    #[arg(long, global = true, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,
    /// Number of Fourier modes N.
    #[arg(long = "grid-size", global = true)]
    pub grid_size: Option<usize>,
    /// Seed for the optimality certificate.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Flips the sign of the response formula inside `validate` (negative control).
    #[arg(long = "corrupt-sign", global = true, hide = true)]
    pub corrupt_sign: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Spectrum, essential bound and invariant density.
    Spectrum,
    /// Invariant density only.
    Density,
    /// Optimal perturbation for the expectation of the observable.
    OptimizeExpect,
    /// Optimal perturbation for the target eigenvalue.
    OptimizeEig,
    /// Finite-difference validation of the response formulas.
    Validate,
}

/// Process exit code for an error class.
pub fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Degenerate => 4,
        ErrorClass::Validation => 5,
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e.class())
        }
    }
}

/// Loads the configuration with command-line overrides applied.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_json(&fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &cli.preset {
        cfg.map = MapSpec::Preset(p.clone());
    }
    if let Some(g) = &cli.gamma {
        cfg.gammas = g.clone();
    }
    if let Some(n) = cli.grid_size {
        cfg.grid_size = n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let map = cfg.map.resolve()?;
    fs::create_dir_all(&cfg.output_dir)?;
    match cli.command {
        Command::Spectrum => cmd_spectrum(&cfg, &map),
        Command::Density => cmd_density(&cfg, &map),
        Command::OptimizeExpect => cmd_optimize_expectation(&cfg, map),
        Command::OptimizeEig => cmd_optimize_eigenvalue(&cfg, map),
        Command::Validate => cmd_validate(&cfg, map, cli.corrupt_sign),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn write_samples(dir: &Path, name: &str, column: &str, f: &FourierVector, resolution: usize) -> Result<()> {
    let s = inverse_dft(f, resolution)?;
    let mut w = create(dir, name)?;
    writeln!(w, "x,{column}")?;
    for (j, v) in s.values().iter().enumerate() {
        writeln!(w, "{},{}", j as f64 / resolution as f64, v.re)?;
    }
    Ok(())
}

fn gamma_tag(g: f64) -> String {
    format!("{g}")
}

/// `spectrum.csv`, `spectrum.json`, `density.csv`.
pub fn cmd_spectrum(cfg: &RunConfig, map: &CircleMap) -> Result<()> {
    let dir = &cfg.output_dir;
    let op = TransferMatrix::assemble(map, cfg.grid_size, cfg.fine_factor)?;
    let values = op.spectrum(op.size())?;
    write_spectrum_csv(&values, create(dir, "spectrum.csv")?)?;
    let bound = essential_bound(map)?;
    let density = op.invariant_density()?;
    write_samples(dir, "density.csv", "density", &density, cfg.profile_resolution)?;
    let top: Vec<[f64; 2]> = values.iter().take(10).map(|z| [z.re, z.im]).collect();
    write_json(
        dir,
        "spectrum.json",
        &json!({
            "grid_size": cfg.grid_size,
            "fine_factor": cfg.fine_factor,
            "essential_bound": bound,
            "leading": top,
            "second_modulus": values.get(1).map(|z| z.norm()),
        }),
    )
}

/// `density.csv`.
pub fn cmd_density(cfg: &RunConfig, map: &CircleMap) -> Result<()> {
    let op = TransferMatrix::assemble(map, cfg.grid_size, cfg.fine_factor)?;
    let density = op.invariant_density()?;
    write_samples(&cfg.output_dir, "density.csv", "density", &density, cfg.profile_resolution)
}

fn write_result(cfg: &RunConfig, r: &OptimizationResult) -> Result<()> {
    let tag = gamma_tag(r.gamma);
    r.write_profile_csv(cfg.profile_resolution, create(&cfg.output_dir, &format!("tdot_gamma{tag}.csv"))?)?;
    let mut w = create(&cfg.output_dir, &format!("result_gamma{tag}.json"))?;
    writeln!(w, "{}", r.to_json()?)?;
    Ok(())
}

/// Per γ: `tdot_gamma*.csv`, `result_gamma*.json`; plus `summary.json`.
pub fn cmd_optimize_expectation(cfg: &RunConfig, map: CircleMap) -> Result<()> {
    let obs = cfg
        .observable
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("optimize-expect needs an observable".into()))?;
    let c = obs.resolve(cfg.grid_size)?;
    let ctx = ResponseContext::new(map, cfg.grid_size, cfg.fine_factor, cfg.scheme.unwrap_or_default())?;
    let mut rows = Vec::new();
    for &g in &cfg.gammas {
        let r = optimal_expectation_perturbation(&ctx, &c, g)?;
        write_result(cfg, &r)?;
        let cert = objective_certificate(&ctx, &r, cfg.certificate_trials, cfg.seed)?;
        rows.push(json!({"gamma": g, "nu": r.nu, "objective": r.objective, "certificate_max_ratio": cert.max_ratio}));
    }
    write_json(&cfg.output_dir, "summary.json", &json!({"kind": "expectation", "results": rows}))
}

/// Per γ: `tdot_gamma*.csv`, `result_gamma*.json`; plus `v0.csv`, `phi0.csv`, `summary.json`.
pub fn cmd_optimize_eigenvalue(cfg: &RunConfig, map: CircleMap) -> Result<()> {
    let target = cfg
        .target_eigenvalue
        .ok_or_else(|| Error::InvalidArgument("optimize-eig needs target_eigenvalue".into()))?;
    let bound = essential_bound(&map)?;
    if target.abs() <= bound || target >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "target eigenvalue {target} must lie between the essential bound {bound:.6} and 1"
        )));
    }
    let ctx = ResponseContext::new(map, cfg.grid_size, cfg.fine_factor, cfg.scheme.unwrap_or_default())?.with_eigenvalue(target)?;
    let ed = ctx.eigen().ok_or(Error::MissingEigenData)?;
    if ed.lambda0.abs() <= bound {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue {} is not above the essential bound {bound:.6}",
            ed.lambda0
        )));
    }
    write_samples(&cfg.output_dir, "v0.csv", "v0", &ed.v0, cfg.profile_resolution)?;
    write_samples(&cfg.output_dir, "phi0.csv", "phi0", &ed.phi0, cfg.profile_resolution)?;
    let mut rows = Vec::new();
    let mut last = f64::NEG_INFINITY;
    let mut increasing = true;
    for &g in &cfg.gammas {
        let r = optimal_eigenvalue_perturbation(&ctx, g)?;
        write_result(cfg, &r)?;
        let cert = objective_certificate(&ctx, &r, cfg.certificate_trials, cfg.seed)?;
        increasing &= r.objective > last;
        last = r.objective;
        rows.push(json!({"gamma": g, "nu": r.nu, "objective": r.objective, "certificate_max_ratio": cert.max_ratio}));
    }
    write_json(
        &cfg.output_dir,
        "summary.json",
        &json!({
            "kind": "eigenvalue",
            "lambda0": ed.lambda0,
            "essential_bound": bound,
            "increasing_in_gamma": increasing,
            "results": rows,
        }),
    )
}

fn validation_perturbation(cfg: &RunConfig, ctx: &ResponseContext) -> Result<FourierVector> {
    match &cfg.perturbation {
        PerturbationSpec::Coefficients { coefficients } => coefficient_table_to_vector(cfg.grid_size, coefficients),
        PerturbationSpec::Named(s) if s == "zero" => Ok(FourierVector::zeros(cfg.grid_size)),
        PerturbationSpec::Named(s) if s != "optimal" => {
            Err(Error::InvalidArgument(format!("unknown perturbation `{s}`")))
        }
        _ => {
            let c = match &cfg.observable {
                Some(o) => o.resolve(cfg.grid_size)?,
                None => FourierVector::cosine(cfg.grid_size, 1),
            };
            Ok(optimal_expectation_perturbation(ctx, &c, cfg.gammas[0])?.tdot)
        }
    }
}

/// `fd_density.json` and, with a target eigenvalue, `fd_eigenvalue.json`.
pub fn cmd_validate(cfg: &RunConfig, map: CircleMap, corrupt_sign: bool) -> Result<()> {
    let sign = if corrupt_sign { -1.0 } else { 1.0 };
    // The finite-difference quotients differentiate the exactly perturbed
    // operator; central differences would leave an O(h²) floor under the ladder.
    let scheme = cfg.scheme.unwrap_or(DerivativeScheme::Spectral);
    let mut ctx = ResponseContext::new(map, cfg.grid_size, cfg.fine_factor, scheme)?;
    let tdot = validation_perturbation(cfg, &ctx)?;
    let density = fd_density_report(&ctx, &tdot, &cfg.deltas, sign)?;
    let mut failures = Vec::new();
    if !density.passed {
        failures.push("density");
    }
    let mut w = create(&cfg.output_dir, "fd_density.json")?;
    writeln!(w, "{}", density.to_json()?)?;
    if let Some(target) = cfg.target_eigenvalue {
        ctx = ctx.with_eigenvalue(target)?;
        let tdot = match cfg.perturbation {
            PerturbationSpec::Named(ref s) if s == "zero" => FourierVector::zeros(cfg.grid_size),
            _ => optimal_eigenvalue_perturbation(&ctx, cfg.gammas[0])?.tdot,
        };
        let eig = fd_eigenvalue_report(&ctx, &tdot, &cfg.deltas, sign)?;
        if !eig.passed {
            failures.push("eigenvalue");
        }
        let mut w = create(&cfg.output_dir, "fd_eigenvalue.json")?;
        writeln!(w, "{}", eig.to_json()?)?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(format!("finite-difference check failed for: {}", failures.join(", "))))
    }
}
