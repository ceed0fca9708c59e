//! Command line front end. Every command writes one CSV table.
//!
//! Parameters come from flags, from an optional JSON file given with
//! `--config`, or from built-in defaults, in that order of precedence.
//! A numeric parameter can be replaced by a grid with `--sweep var:lo:hi:n`
//! (inclusive, `n` points; repeat for a Cartesian grid).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::channel::MeasurementSpec;
use crate::exec::Execution;
use crate::fidelity::{estimation_fidelity, transmission_fidelity};
use crate::gaussian::{make_probe, SignalEnsemble};
use crate::montecarlo::{simulate_f, simulate_g, McConfig};
use crate::oracle::{
    self, argmax_kappa, discrepancy_report, oracle_f, oracle_g, QuadratureConfig, ReportGrid,
};
use crate::tradeoff::{
    self, common_g_grid, compare_b_c, kappa_opt, sample_curve, CurveKind, ProbeConfig,
    DEFAULT_CURVE_POINTS,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("config file: {0}")]
    Json(#[from] serde_json::Error),
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// F and G from the closed forms on a parameter grid.
    Fidelity,
    /// Trade-off curves G versus F for the probe configurations and bounds.
    Curve,
    /// F(σ, θ) and G(σ, θ) surfaces at fixed τ, κ, Δ.
    Surface,
    /// Closed-form against numerically optimized gain.
    Optimize,
    /// Monte Carlo estimates of F and G.
    Mc,
    /// Closed forms against the quadrature oracle.
    Check,
}

#[derive(Debug, Parser)]
#[command(
    name = "qnd-tradeoff",
    version,
    about = "Fidelity trade-off for indirect measurements on Gaussian signals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub args: Flags,
}

#[derive(Debug, Default, clap::Args)]
pub struct Flags {
    /// JSON file with any of the flag values; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Δ²/τ².
    #[arg(long, global = true)]
    pub y: Option<f64>,
    /// σ²/τ².
    #[arg(long, global = true)]
    pub z: Option<f64>,
    /// Qudit dimension.
    #[arg(long, global = true)]
    pub d: Option<u32>,
    /// A, B, C, cv-bound, qudit or compare.
    #[arg(long = "config-id", global = true)]
    pub config_id: Option<String>,
    #[arg(long = "sweep", global = true, value_name = "VAR:LO:HI:N")]
    pub sweep: Vec<String>,
    /// Add quadrature-oracle columns.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Also emit the uniform-alphabet and qudit bounds (curve).
    #[arg(long, global = true)]
    pub bounds: bool,
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long = "chunk-size", global = true)]
    pub chunk_size: Option<u64>,
    /// Fidelity tolerance for check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Fully merged run description; also the schema of the `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    pub theta: Option<f64>,
    pub delta: Option<f64>,
    pub kappa: Option<f64>,
    pub y: Option<f64>,
    pub z: Option<f64>,
    pub d: Option<u32>,
    pub config_id: Option<String>,
    pub sweep: Vec<String>,
    pub oracle: bool,
    pub bounds: bool,
    pub points: Option<usize>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub chunk_size: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub quadrature: QuadratureConfig,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Overlays command line values on `self`.
    pub fn merge(mut self, command: Option<Command>, f: Flags) -> Self {
        macro_rules! over {
            ($($field:ident),*) => { $( if f.$field.is_some() { self.$field = f.$field; } )* };
        }
        over!(
            tau, sigma, theta, delta, kappa, y, z, d, config_id, points, trials, seed, chunk_size,
            tol, out
        );
        if command.is_some() {
            self.command = command;
        }
        if !f.sweep.is_empty() {
            self.sweep = f.sweep;
        }
        self.oracle |= f.oracle;
        self.bounds |= f.bounds;
        self
    }

    fn mc_config(&self) -> McConfig {
        let d = McConfig::default();
        McConfig {
            trials: self.trials.unwrap_or(d.trials),
            seed: self.seed.unwrap_or(d.seed),
            chunk_size: self.chunk_size.unwrap_or(d.chunk_size),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub var: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for Sweep {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [var, lo, hi, n] = parts.as_slice() else {
            return usage(format!("sweep '{s}' is not VAR:LO:HI:N"));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("sweep '{s}': bad number '{t}'")))
        };
        let n: usize = n.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
            CliError::Usage(format!("sweep '{s}': point count must be an integer >= 1"))
        })?;
        Ok(Sweep {
            var: var.trim().to_ascii_lowercase(),
            lo: num(lo)?,
            hi: num(hi)?,
            n,
        })
    }
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
                }
            })
            .collect()
    }
}

fn parse_sweeps(cfg: &RunConfig, allowed: &[&str]) -> CliResult<Vec<Sweep>> {
    let sweeps = cfg
        .sweep
        .iter()
        .map(|s| s.parse::<Sweep>())
        .collect::<CliResult<Vec<_>>>()?;
    for (i, s) in sweeps.iter().enumerate() {
        if !allowed.contains(&s.var.as_str()) {
            return usage(format!(
                "cannot sweep '{}' here (allowed: {})",
                s.var,
                if allowed.is_empty() {
                    "none".to_string()
                } else {
                    allowed.join(", ")
                }
            ));
        }
        if sweeps[..i].iter().any(|o| o.var == s.var) {
            return usage(format!("'{}' swept twice", s.var));
        }
    }
    Ok(sweeps)
}

/// Values for one grid axis: the sweep, else the fixed value, else the default.
fn axis(sweeps: &[Sweep], var: &str, fixed: Option<f64>, default: &[f64]) -> CliResult<Vec<f64>> {
    match (sweeps.iter().find(|s| s.var == var), fixed) {
        (Some(_), Some(_)) => usage(format!("'{var}' given both as a value and as a sweep")),
        (Some(s), None) => Ok(s.values()),
        (None, Some(v)) => Ok(vec![v]),
        (None, None) => Ok(default.to_vec()),
    }
}

/// Width axis that may instead be given as a ratio to `τ`.
#[derive(Debug, Clone)]
enum Scaled {
    Values(Vec<f64>),
    /// `x = τ √ratio`.
    Ratio(f64),
}

impl Scaled {
    fn resolve(&self, tau: f64) -> Vec<f64> {
        match self {
            Scaled::Values(v) => v.clone(),
            Scaled::Ratio(r) => vec![tau * r.sqrt()],
        }
    }
}

fn scaled_axis(
    sweeps: &[Sweep],
    var: &str,
    fixed: Option<f64>,
    ratio_name: &str,
    ratio: Option<f64>,
    default: &[f64],
) -> CliResult<Scaled> {
    match ratio {
        Some(r) => {
            if fixed.is_some() || sweeps.iter().any(|s| s.var == var) {
                return usage(format!("'{var}' and '{ratio_name}' are mutually exclusive"));
            }
            if !(r.is_finite() && r >= 0.0) {
                return usage(format!("'{ratio_name}' must be finite and non-negative"));
            }
            Ok(Scaled::Ratio(r))
        }
        None => Ok(Scaled::Values(axis(sweeps, var, fixed, default)?)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    theta: f64,
    sigma: f64,
    tau: f64,
    delta: f64,
    kappa: f64,
}

/// Cartesian grid over θ, σ, τ, Δ, κ, with σ and Δ optionally tied to τ
/// through `z` and `y`.
fn point_grid(cfg: &RunConfig, default_delta: f64) -> CliResult<Vec<Point>> {
    let sw = parse_sweeps(cfg, &["theta", "sigma", "tau", "delta", "kappa"])?;
    let thetas = axis(&sw, "theta", cfg.theta, &[0.0])?;
    let taus = axis(&sw, "tau", cfg.tau, &[FRAC_1_SQRT_2])?;
    let sigmas = scaled_axis(&sw, "sigma", cfg.sigma, "z", cfg.z, &[FRAC_1_SQRT_2])?;
    let deltas = scaled_axis(&sw, "delta", cfg.delta, "y", cfg.y, &[default_delta])?;
    let kappas = axis(&sw, "kappa", cfg.kappa, &[1.0])?;
    let mut out = Vec::new();
    for &theta in &thetas {
        let sigma_outer = match &sigmas {
            Scaled::Values(v) => v.clone(),
            Scaled::Ratio(_) => vec![f64::NAN],
        };
        for &s_outer in &sigma_outer {
            for &tau in &taus {
                let ss = if s_outer.is_nan() {
                    sigmas.resolve(tau)
                } else {
                    vec![s_outer]
                };
                for &sigma in &ss {
                    for &delta in &deltas.resolve(tau) {
                        for &kappa in &kappas {
                            out.push(Point {
                                theta,
                                sigma,
                                tau,
                                delta,
                                kappa,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `%.9g`-style rendering; NaN becomes an empty field.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.8e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-5..9).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

struct Table<W: Write> {
    w: csv::Writer<W>,
}

impl<W: Write> Table<W> {
    fn new(out: W, header: &[&str]) -> CliResult<Self> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header)?;
        Ok(Self { w })
    }

    fn row(&mut self, fields: &[Field]) -> CliResult<()> {
        self.w.write_record(fields.iter().map(Field::render))?;
        Ok(())
    }

    fn finish(mut self) -> CliResult<()> {
        self.w.flush()?;
        Ok(())
    }
}

enum Field {
    Num(f64),
    Text(String),
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Num(x) => fmt_num(*x),
            Field::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(s.to_string())
    }
}

impl From<u64> for Field {
    fn from(x: u64) -> Self {
        Field::Text(x.to_string())
    }
}

macro_rules! fields {
    ($($e:expr),* $(,)?) => { [$(Field::from($e)),*] };
}

/// Result of a successful run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    CheckFailed,
}

/// Runs a merged configuration, writing CSV to `out`.
pub fn execute<W: Write>(cfg: &RunConfig, out: W) -> CliResult<Outcome> {
    cfg.quadrature.validate()?;
    let Some(command) = cfg.command else {
        return usage("no command given (fidelity, curve, surface, optimize, mc, check)");
    };
    if command != Command::Curve && (cfg.bounds || cfg.points.is_some()) {
        return usage("--bounds and --points only apply to curve");
    }
    match command {
        Command::Fidelity => cmd_fidelity(cfg, out).map(|_| Outcome::Success),
        Command::Curve => cmd_curve(cfg, out).map(|_| Outcome::Success),
        Command::Surface => cmd_surface(cfg, out).map(|_| Outcome::Success),
        Command::Optimize => cmd_optimize(cfg, out).map(|_| Outcome::Success),
        Command::Mc => cmd_mc(cfg, out).map(|_| Outcome::Success),
        Command::Check => cmd_check(cfg, out),
    }
}

pub fn cmd_fidelity<W: Write>(cfg: &RunConfig, out: W) -> CliResult<()> {
    let points = point_grid(cfg, 1.0)?;
    let mut header = vec!["theta", "sigma", "tau", "delta", "kappa", "F", "G"];
    if cfg.oracle {
        header.extend(["F_oracle", "G_oracle"]);
    }
    let q = cfg.quadrature;
    let with_oracle = cfg.oracle;
    let rows = Execution::default().map(&points, |pt| -> CliResult<Vec<Field>> {
        let p = make_probe(pt.theta, pt.sigma)?;
        let ens = SignalEnsemble::new(pt.tau, pt.delta)?;
        let m = MeasurementSpec::new(pt.kappa)?;
        let f = transmission_fidelity(&p, pt.tau)?;
        let g = estimation_fidelity(&p, &ens, &m);
        let mut row = Vec::from(fields![
            pt.theta, pt.sigma, pt.tau, pt.delta, pt.kappa, f, g
        ]);
        if with_oracle {
            row.push(oracle_f(&p, pt.tau, &q)?.into());
            row.push(oracle_g(&p, &ens, &m, &q)?.into());
        }
        Ok(row)
    });
    let mut t = Table::new(out, &header)?;
    for r in rows {
        t.row(&r?)?;
    }
    t.finish()
}

const FIG_A_Y: [f64; 4] = [0.5, 3.0, 7.0, 1e4];
const FIG_B_Y: [f64; 5] = [0.1, 1.0, 3.0, 7.0, 1e4];
const FIG_C_DELTA: [f64; 5] = [0.1, 0.2, 2.0, 5.0, 1e4];
const FIG_COMPARE_DELTA: [f64; 5] = [0.2, 1.0, 2.0, 5.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CurveSel {
    A,
    B,
    C,
    CvBound,
    Qudit,
    Compare,
}

fn parse_curve_sel(s: &str) -> CliResult<CurveSel> {
    Ok(match s.to_ascii_lowercase().replace('_', "-").as_str() {
        "a" => CurveSel::A,
        "b" => CurveSel::B,
        "c" => CurveSel::C,
        "cv-bound" | "bound" => CurveSel::CvBound,
        "qudit" => CurveSel::Qudit,
        "compare" => CurveSel::Compare,
        _ => {
            return usage(format!(
                "unknown curve '{s}' (A, B, C, cv-bound, qudit, compare)"
            ))
        }
    })
}

pub fn cmd_curve<W: Write>(cfg: &RunConfig, out: W) -> CliResult<()> {
    parse_sweeps(cfg, &[])?;
    let n = cfg.points.unwrap_or(DEFAULT_CURVE_POINTS);
    if n < 2 {
        return usage("--points must be at least 2");
    }
    let mut sels = match &cfg.config_id {
        Some(id) => vec![parse_curve_sel(id)?],
        None => vec![CurveSel::A, CurveSel::B, CurveSel::C, CurveSel::Compare],
    };
    if cfg.bounds {
        for b in [CurveSel::CvBound, CurveSel::Qudit] {
            if !sels.contains(&b) {
                sels.push(b);
            }
        }
    }
    let y_list = |defaults: &[f64]| -> Vec<f64> {
        match (cfg.y, cfg.delta, cfg.tau) {
            (Some(y), _, _) => vec![y],
            (None, Some(d), Some(t)) => vec![(d / t).powi(2)],
            _ => defaults.to_vec(),
        }
    };
    let delta_list = |defaults: &[f64]| {
        cfg.delta
            .map(|d| vec![d])
            .unwrap_or_else(|| defaults.to_vec())
    };

    let mut t = Table::new(out, &["config", "param", "sweep_value", "G", "F"])?;
    for sel in sels {
        let (kind, params) = match sel {
            CurveSel::A => (CurveKind::A, y_list(&FIG_A_Y)),
            CurveSel::B => (CurveKind::B, y_list(&FIG_B_Y)),
            CurveSel::C => (CurveKind::C, delta_list(&FIG_C_DELTA)),
            CurveSel::CvBound => (CurveKind::CvBound, vec![f64::NAN]),
            CurveSel::Qudit => (CurveKind::Qudit, vec![cfg.d.unwrap_or(2) as f64]),
            CurveSel::Compare => {
                for delta in delta_list(&FIG_COMPARE_DELTA) {
                    let grid = common_g_grid(delta, n);
                    for r in compare_b_c(delta, &grid) {
                        if let (Some(fb), Some(fc)) = (r.f_b, r.f_c) {
                            t.row(&fields!["compare_B", delta, r.g, r.g, fb])?;
                            t.row(&fields!["compare_C", delta, r.g, r.g, fc])?;
                        }
                    }
                }
                continue;
            }
        };
        for param in params {
            let arg = if param.is_nan() { 0.0 } else { param };
            let curve = sample_curve(kind, arg, n)?;
            for s in &curve.samples {
                t.row(&fields![kind.label(), param, s.sweep, s.g, s.f])?;
            }
        }
    }
    t.finish()
}

pub fn cmd_surface<W: Write>(cfg: &RunConfig, out: W) -> CliResult<()> {
    let sw = parse_sweeps(cfg, &["sigma", "theta", "tau"])?;
    let default_sigma = Sweep {
        var: "sigma".into(),
        lo: FRAC_1_SQRT_2 - 0.5,
        hi: FRAC_1_SQRT_2 + 0.5,
        n: 21,
    }
    .values();
    let default_theta = Sweep {
        var: "theta".into(),
        lo: 0.0,
        hi: FRAC_PI_2,
        n: 21,
    }
    .values();
    let taus = axis(&sw, "tau", cfg.tau, &[0.4, FRAC_1_SQRT_2, 2.0])?;
    let sigmas = axis(&sw, "sigma", cfg.sigma, &default_sigma)?;
    let thetas = axis(&sw, "theta", cfg.theta, &default_theta)?;
    let kappa = cfg.kappa.unwrap_or(1.0);
    let delta = cfg.delta.unwrap_or(FRAC_1_SQRT_2);
    let m = MeasurementSpec::new(kappa)?;
    let mut t = Table::new(out, &["tau", "kappa", "delta", "sigma", "theta", "F", "G"])?;
    for &tau in &taus {
        let ens = SignalEnsemble::new(tau, delta)?;
        for &sigma in &sigmas {
            for &theta in &thetas {
                let p = make_probe(theta, sigma)?;
                let f = transmission_fidelity(&p, tau)?;
                let g = estimation_fidelity(&p, &ens, &m);
                t.row(&fields![tau, kappa, delta, sigma, theta, f, g])?;
            }
        }
    }
    t.finish()
}

pub fn cmd_optimize<W: Write>(cfg: &RunConfig, out: W) -> CliResult<()> {
    let sw = parse_sweeps(cfg, &["tau", "delta", "sigma", "theta"])?;
    let configs = match &cfg.config_id {
        Some(id) => vec![ProbeConfig::from_str(id).map_err(|e| CliError::Usage(e.to_string()))?],
        None => vec![ProbeConfig::A, ProbeConfig::B, ProbeConfig::C],
    };
    let taus = axis(&sw, "tau", cfg.tau, &[1.0])?;
    let deltas = scaled_axis(&sw, "delta", cfg.delta, "y", cfg.y, &[1.0])?;
    let sigmas = scaled_axis(&sw, "sigma", cfg.sigma, "z", cfg.z, &[FRAC_1_SQRT_2])?;
    let thetas = axis(&sw, "theta", cfg.theta, &[0.0])?;

    let mut jobs = Vec::new();
    for &config in &configs {
        for &tau in &taus {
            for &delta in &deltas.resolve(tau) {
                let (ss, ts) = match config {
                    ProbeConfig::A => (vec![oracle::CONFIG_A_PROXY_SIGMA], thetas.clone()),
                    ProbeConfig::B => (sigmas.resolve(tau), vec![0.0]),
                    ProbeConfig::C => (vec![FRAC_1_SQRT_2], vec![0.0]),
                };
                for &sigma in &ss {
                    for &theta in &ts {
                        jobs.push((config, theta, sigma, tau, delta));
                    }
                }
            }
        }
    }
    let q = cfg.quadrature;
    let rows = Execution::default().map(
        &jobs,
        |&(config, theta, sigma, tau, delta)| -> CliResult<Vec<Field>> {
            let ens = SignalEnsemble::new(tau, delta)?;
            let p = make_probe(theta, sigma)?;
            let closed = kappa_opt(config, &ens, Some(sigma))?;
            let g_closed = tradeoff::optimal_point(config, &ens, theta, Some(sigma))?.g;
            let (k_num, g_num) = if delta == 0.0 {
                (0.0, 1.0)
            } else {
                let r = argmax_kappa(&p, &ens, &q, 0.0, 2.0, 1e-10)?;
                (r.x, r.value)
            };
            let label = match config {
                ProbeConfig::A => "A",
                ProbeConfig::B => "B",
                ProbeConfig::C => "C",
            };
            Ok(Vec::from(fields![
                label,
                theta,
                sigma,
                tau,
                delta,
                closed,
                k_num,
                (closed - k_num).abs(),
                g_closed,
                g_num
            ]))
        },
    );
    let mut t = Table::new(
        out,
        &[
            "config",
            "theta",
            "sigma",
            "tau",
            "delta",
            "kappa_closed",
            "kappa_numeric",
            "kappa_gap",
            "G_closed",
            "G_numeric",
        ],
    )?;
    for r in rows {
        t.row(&r?)?;
    }
    t.finish()
}

pub fn cmd_mc<W: Write>(cfg: &RunConfig, out: W) -> CliResult<()> {
    let points = point_grid(cfg, 1.0)?;
    let mc = cfg.mc_config();
    mc.validate()?;
    let mut header = vec![
        "quantity", "theta", "sigma", "tau", "delta", "kappa", "trials", "seed", "mean", "stderr",
    ];
    if cfg.oracle {
        header.extend(["oracle", "z_score"]);
    }
    let mut t = Table::new(out, &header)?;
    for pt in points {
        let p = make_probe(pt.theta, pt.sigma)?;
        let ens = SignalEnsemble::new(pt.tau, pt.delta)?;
        let m = MeasurementSpec::new(pt.kappa)?;
        let f = simulate_f(&p, pt.tau, &m, &mc)?;
        let g = simulate_g(&ens, &p, &m, &mc)?;
        for (name, est) in [("F", f), ("G", g)] {
            let mut row = Vec::from(fields![
                name, pt.theta, pt.sigma, pt.tau, pt.delta, pt.kappa, est.trials, mc.seed,
                est.mean, est.stderr
            ]);
            if cfg.oracle {
                let reference = if name == "F" {
                    oracle_f(&p, pt.tau, &cfg.quadrature)?
                } else {
                    oracle_g(&p, &ens, &m, &cfg.quadrature)?
                };
                row.push(reference.into());
                row.push(est.z_score(reference).into());
            }
            t.row(&row)?;
        }
    }
    t.finish()
}

pub fn cmd_check<W: Write>(cfg: &RunConfig, out: W) -> CliResult<Outcome> {
    let sw = parse_sweeps(cfg, &["theta", "sigma", "tau", "delta", "kappa"])?;
    let mut grid = ReportGrid::default();
    grid.thetas = axis(&sw, "theta", cfg.theta, &grid.thetas)?;
    grid.sigmas = axis(&sw, "sigma", cfg.sigma, &grid.sigmas)?;
    grid.taus = axis(&sw, "tau", cfg.tau, &grid.taus)?;
    grid.deltas = axis(&sw, "delta", cfg.delta, &grid.deltas)?;
    grid.kappas = axis(&sw, "kappa", cfg.kappa, &grid.kappas)?;
    if let Some(tol) = cfg.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return usage("--tol must be positive");
        }
        grid.tolerance = tol;
    }
    let report = discrepancy_report(&grid, &cfg.quadrature, Execution::default())?;
    let mut t = Table::new(
        out,
        &[
            "quantity",
            "theta",
            "sigma",
            "tau",
            "delta",
            "kappa",
            "analytic",
            "reference",
            "gap",
            "tolerance",
            "status",
        ],
    )?;
    for r in &report.rows {
        t.row(&fields![
            r.quantity,
            r.theta,
            r.sigma,
            r.tau,
            r.delta,
            r.kappa,
            r.analytic,
            r.reference,
            r.gap(),
            r.tolerance,
            r.status.as_str(),
        ])?;
    }
    t.finish()?;
    Ok(if report.has_failures() {
        Outcome::CheckFailed
    } else {
        Outcome::Success
    })
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 on success, 1 on usage or runtime errors, 2 when `check` finds a gap.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::CheckFailed) => {
            eprintln!("check: closed form and oracle disagree beyond tolerance");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(cli: Cli) -> CliResult<Outcome> {
    let base = match &cli.args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let cfg = base.merge(cli.command, cli.args);
    match &cfg.out {
        Some(path) => {
            let file = BufWriter::new(File::create(path)?);
            execute(&cfg, file)
        }
        None => execute(&cfg, io::stdout().lock()),
    }
}
