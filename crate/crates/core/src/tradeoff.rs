//! Optimal gains, closed-form fidelities and trade-off curves for the three
//! probe configurations.
//!
//! * **A**: ideal probe, `σ → 0`, tuned by `θ`.
//! * **B**: localized probe, `θ = 0`, tuned by `σ`.
//! * **C**: minimum-energy probe, `σ² = 1/2`, tuned by the signal width `τ`.
//!
//! Two printed forms are known to be wrong and are replaced by corrected ones:
//! the denominator of the configuration-C estimation fidelity
//! (`2τ²(1+3Δ²)`, printed as `τ²(1+3Δ²)`) and the sign in the denominator of
//! the configuration-C curve (`+G²(5Δ²−2)`). The printed versions stay
//! available through [`config_c_g_verbatim`] and [`CurveVariant::Verbatim`].

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::fidelity::FidelityPoint;
use crate::gaussian::SignalEnsemble;

/// Slack allowed at domain endpoints for rounding in the caller's `G`.
const EDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProbeConfig {
    A,
    B,
    C,
}

impl std::str::FromStr for ProbeConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(ProbeConfig::A),
            "B" => Ok(ProbeConfig::B),
            "C" => Ok(ProbeConfig::C),
            _ => Err(Error::Config(format!("unknown probe configuration '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveVariant {
    Corrected,
    /// The printed form, kept for comparison against the oracle.
    Verbatim,
}

/// `y = Δ²/τ²` and `z = σ²/τ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthRatios {
    pub y: f64,
    pub z: f64,
}

impl WidthRatios {
    pub fn new(y: f64, z: f64) -> Result<Self> {
        require_non_negative("y", y)?;
        require_positive("z", z)?;
        Ok(Self { y, z })
    }

    pub fn from_widths(tau: f64, delta: f64, sigma: f64) -> Result<Self> {
        require_positive("tau", tau)?;
        let t2 = tau * tau;
        Self::new(delta * delta / t2, sigma * sigma / t2)
    }
}

/// Gain that maximizes `G` for the configuration. `Δ = 0` yields 0: the
/// degenerate measurement that always infers the symbol 0.
pub fn kappa_opt(config: ProbeConfig, ens: &SignalEnsemble, sigma: Option<f64>) -> Result<f64> {
    let d2 = ens.delta * ens.delta;
    let t2 = ens.tau * ens.tau;
    Ok(match config {
        ProbeConfig::A => d2 / (d2 + t2),
        ProbeConfig::B => {
            let s = sigma.ok_or(Error::MissingParameter("sigma (configuration B)"))?;
            require_positive("sigma", s)?;
            d2 / (d2 + t2 + s * s)
        }
        ProbeConfig::C => 2.0 * d2 / (1.0 + 2.0 * d2 + 2.0 * t2),
    })
}

/// `G`-axis intercept `√((1+y)/(1+3y/2))` of configuration A.
pub fn config_a_intercept(y: f64) -> f64 {
    ((1.0 + y) / (1.0 + 1.5 * y)).sqrt()
}

/// Configuration A at the optimal gain: `F = sin²θ`, `G = cos²θ · intercept(y)`.
pub fn config_a(theta: f64, y: f64) -> Result<FidelityPoint> {
    if !(theta.is_finite() && (0.0..=FRAC_PI_2 + EDGE).contains(&theta)) {
        return Err(Error::domain("theta", theta, "[0, π/2]"));
    }
    require_non_negative("y", y)?;
    let s = theta.min(FRAC_PI_2).sin();
    let c2 = 1.0 - s * s;
    Ok(FidelityPoint::new(s * s, c2 * config_a_intercept(y)))
}

/// `F_A(G, y) = 1 − G √((1+3y/2)/(1+y))`.
pub fn curve_a(g: f64, y: f64) -> Result<f64> {
    require_non_negative("y", y)?;
    let top = config_a_intercept(y);
    if !(g.is_finite() && g >= -EDGE && g <= top + EDGE) {
        return Err(Error::domain("G", g, "[0, √((1+y)/(1+3y/2))]"));
    }
    Ok((1.0 - g / top).clamp(0.0, 1.0))
}

/// Configuration B at the optimal gain.
pub fn config_b(r: WidthRatios) -> FidelityPoint {
    let WidthRatios { y, z } = r;
    let f = (2.0 * z / (1.0 + 2.0 * z)).sqrt();
    let g = ((1.0 + z + y) / (1.0 + z + 0.5 * y * (3.0 + z))).sqrt();
    FidelityPoint::new(f, g)
}

/// Range of `G` swept by configuration B as `z` runs over `(0, ∞)`:
/// from `√(2/(2+y))` (`F = 1`) to the configuration-A intercept (`F = 0`).
pub fn curve_b_domain(y: f64) -> (f64, f64) {
    ((2.0 / (2.0 + y)).sqrt(), config_a_intercept(y))
}

/// `F_B(G, y)`.
pub fn curve_b(g: f64, y: f64) -> Result<f64> {
    require_non_negative("y", y)?;
    let (lo, hi) = curve_b_domain(y);
    if !(g.is_finite() && g >= lo - EDGE && g <= hi + EDGE) {
        return Err(Error::domain(
            "G",
            g,
            "configuration-B range [√(2/(2+y)), √((1+y)/(1+3y/2))]",
        ));
    }
    let g2 = g * g;
    let num = g2 * (4.0 + 6.0 * y) - 4.0 * (1.0 + y);
    let den = g2 * (2.0 + 5.0 * y) - 4.0 * (0.5 + y);
    Ok((num / den).max(0.0).sqrt().min(1.0))
}

/// Configuration C at the optimal gain, with the corrected `G`.
pub fn config_c(tau: f64, delta: f64) -> Result<FidelityPoint> {
    require_positive("tau", tau)?;
    require_non_negative("delta", delta)?;
    let t2 = tau * tau;
    let d2 = delta * delta;
    let f = (1.0 / (1.0 + t2)).sqrt();
    let g = tau
        * (2.0 * (1.0 + 2.0 * d2 + 2.0 * t2) / (4.0 * t2 * t2 + d2 + 2.0 * t2 * (1.0 + 3.0 * d2)))
            .sqrt();
    Ok(FidelityPoint::new(f, g))
}

/// Configuration-C `G` exactly as printed (denominator `τ²(1+3Δ²)`). Exceeds
/// one at e.g. `Δ = 1`, `τ = 1`; do not use except for auditing.
pub fn config_c_g_verbatim(tau: f64, delta: f64) -> Result<f64> {
    require_positive("tau", tau)?;
    require_non_negative("delta", delta)?;
    let t2 = tau * tau;
    let d2 = delta * delta;
    Ok(tau
        * (2.0 * (1.0 + 2.0 * d2 + 2.0 * t2) / (4.0 * t2 * t2 + d2 + t2 * (1.0 + 3.0 * d2))).sqrt())
}

/// `F_C(G, Δ)` with the corrected denominator sign.
pub fn curve_c(g: f64, delta: f64) -> Result<f64> {
    curve_c_variant(g, delta, CurveVariant::Corrected)
}

pub fn curve_c_variant(g: f64, delta: f64, variant: CurveVariant) -> Result<f64> {
    require_non_negative("delta", delta)?;
    if !(-EDGE..=1.0 + EDGE).contains(&g) {
        return Err(Error::domain("G", g, "[0, 1]"));
    }
    let g2 = (g * g).min(1.0);
    let d2 = delta * delta;
    let a = 3.0 - 2.0 * d2 + 3.0 * g2 * (d2 - 1.0);
    let radicand = (1.0 + 2.0 * d2).powi(2) - 2.0 * g2 * (1.0 + 3.0 * d2 + 6.0 * d2 * d2)
        + g2 * g2 * (1.0 + 2.0 * d2 + 9.0 * d2 * d2);
    let s = radicand.max(0.0).sqrt();
    let f2 = match variant {
        CurveVariant::Corrected => {
            // (A − S)/den = 4(1 − G²)/(A + S); use whichever side does not cancel.
            if a >= 0.0 {
                4.0 * (1.0 - g2) / (a + s)
            } else {
                (a - s) / (2.0 - 4.0 * d2 + g2 * (5.0 * d2 - 2.0))
            }
        }
        CurveVariant::Verbatim => (a - s) / (2.0 - 4.0 * d2 - g2 * (5.0 * d2 - 2.0)),
    };
    if f2.is_nan() || f2 < -EDGE || f2.is_infinite() {
        return Err(Error::domain(
            "G",
            g,
            "point where the configuration-C curve is real",
        ));
    }
    Ok(f2.max(0.0).sqrt().min(1.0))
}

/// Second-order small-alphabet expansion `1 + G²Δ²/(4(G²−1))`.
pub fn curve_c_small_delta(g: f64, delta: f64) -> f64 {
    let g2 = g * g;
    1.0 + g2 * delta * delta / (4.0 * (g2 - 1.0))
}

/// Uniform-alphabet bound `F = √((4 − 6G²)/(4 − 5G²))` for `G ∈ [0, √(2/3)]`.
pub fn cv_bound(g: f64) -> Result<f64> {
    let top = (2.0f64 / 3.0).sqrt();
    if !(g.is_finite() && g >= -EDGE && g <= top + EDGE) {
        return Err(Error::domain("G", g, "[0, √(2/3)]"));
    }
    let g2 = g * g;
    Ok(((4.0 - 6.0 * g2) / (4.0 - 5.0 * g2)).max(0.0).sqrt())
}

/// Fidelity balance for uniformly distributed `d`-level states,
/// `F = 1/(d+1) + (√(G − 1/(d+1)) + √((d−1)(2/(d+1) − G)))²`.
pub fn qudit_bound(g: f64, d: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::domain("d", d as f64, ">= 2"));
    }
    let inv = 1.0 / (d as f64 + 1.0);
    if !(g.is_finite() && g >= inv - EDGE && g <= 2.0 * inv + EDGE) {
        return Err(Error::domain("G", g, "[1/(d+1), 2/(d+1)]"));
    }
    let r1 = (g - inv).max(0.0).sqrt();
    let r2 = ((d as f64 - 1.0) * (2.0 * inv - g)).max(0.0).sqrt();
    Ok(inv + (r1 + r2).powi(2))
}

/// `(F, G)` at the optimal gain, with the `Δ = 0` convention `G = 1`.
///
/// `theta` is used by configuration A, `sigma` by configuration B.
pub fn optimal_point(
    config: ProbeConfig,
    ens: &SignalEnsemble,
    theta: f64,
    sigma: Option<f64>,
) -> Result<FidelityPoint> {
    let mut fp = match config {
        ProbeConfig::A => config_a(theta, (ens.delta / ens.tau).powi(2))?,
        ProbeConfig::B => {
            let s = sigma.ok_or(Error::MissingParameter("sigma (configuration B)"))?;
            config_b(WidthRatios::from_widths(ens.tau, ens.delta, s)?)
        }
        ProbeConfig::C => config_c(ens.tau, ens.delta)?,
    };
    if ens.delta == 0.0 {
        fp.g = 1.0;
    }
    Ok(fp)
}

/// One row of the B-versus-C comparison at `τ² = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub g: f64,
    /// `F_B(G, 2Δ²)`, `None` outside configuration B's range.
    pub f_b: Option<f64>,
    pub f_c: Option<f64>,
}

/// Interior `G` samples of the range shared by both configurations at
/// `τ² = 1/2` (configuration C covers all of `(0, 1)`).
pub fn common_g_grid(delta: f64, n: usize) -> Vec<f64> {
    let (lo, hi) = curve_b_domain(2.0 * delta * delta);
    (1..=n)
        .map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64)
        .collect()
}

/// `F_B(G, 2Δ²)` and `F_C(G, Δ)` side by side.
pub fn compare_b_c(delta: f64, grid: &[f64]) -> Vec<ComparisonRow> {
    let y = 2.0 * delta * delta;
    grid.iter()
        .map(|&g| ComparisonRow {
            g,
            f_b: curve_b(g, y).ok(),
            f_c: curve_c(g, delta).ok(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    A,
    B,
    C,
    CvBound,
    Qudit,
}

impl CurveKind {
    pub fn label(&self) -> &'static str {
        match self {
            CurveKind::A => "A",
            CurveKind::B => "B",
            CurveKind::C => "C",
            CurveKind::CvBound => "CV_BOUND",
            CurveKind::Qudit => "QUDIT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    Theta,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub sweep: f64,
    pub g: f64,
    pub f: f64,
}

/// Ordered `(G, F)` samples along one trade-off curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    pub kind: CurveKind,
    /// `y` for A and B, `Δ` for C, `d` for the qudit bound, unused for the CV bound.
    pub param: f64,
    pub sweep_var: SweepVar,
    pub samples: Vec<CurveSample>,
}

/// Default number of samples per curve.
pub const DEFAULT_CURVE_POINTS: usize = 201;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Samples a curve with `n ≥ 2` uniformly spaced sweep values, endpoints at
/// the analytic intercepts.
///
/// Configuration A sweeps `θ` over `[0, π/2]`; every other curve sweeps `G`
/// over its full range.
pub fn sample_curve(kind: CurveKind, param: f64, n: usize) -> Result<TradeoffCurve> {
    if n < 2 {
        return Err(Error::domain("points", n as f64, ">= 2"));
    }
    let (sweep_var, samples) = match kind {
        CurveKind::A => {
            let samples = linspace(0.0, FRAC_PI_2, n)
                .into_iter()
                .map(|t| {
                    config_a(t, param).map(|fp| CurveSample {
                        sweep: t,
                        g: fp.g,
                        f: fp.f,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            (SweepVar::Theta, samples)
        }
        CurveKind::B => {
            require_positive("y", param)?;
            let (lo, hi) = curve_b_domain(param);
            (SweepVar::G, sweep_g(lo, hi, n, |g| curve_b(g, param))?)
        }
        CurveKind::C => {
            require_non_negative("delta", param)?;
            (SweepVar::G, sweep_g(0.0, 1.0, n, |g| curve_c(g, param))?)
        }
        CurveKind::CvBound => (
            SweepVar::G,
            sweep_g(0.0, (2.0f64 / 3.0).sqrt(), n, cv_bound)?,
        ),
        CurveKind::Qudit => {
            if !(param >= 2.0 && param.fract() == 0.0 && param <= u32::MAX as f64) {
                return Err(Error::domain("d", param, "integer >= 2"));
            }
            let d = param as u32;
            let inv = 1.0 / (param + 1.0);
            (
                SweepVar::G,
                sweep_g(inv, 2.0 * inv, n, |g| qudit_bound(g, d))?,
            )
        }
    };
    Ok(TradeoffCurve {
        kind,
        param,
        sweep_var,
        samples,
    })
}

fn sweep_g(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> Result<f64>) -> Result<Vec<CurveSample>> {
    linspace(lo, hi, n)
        .into_iter()
        .map(|g| f(g).map(|v| CurveSample { sweep: g, g, f: v }))
        .collect()
}
