//! The C-sum coupling followed by a gained position measurement on the probe.
//!
//! The joint signal/probe state is never built. For an input symbol `a` and
//! outcome `b` everything downstream follows from two closed forms:
//!
//! * the outcome density `q(b|a)`, an exact three-component Gaussian mixture;
//! * the unnormalized conditional signal amplitude
//!   `φ̃_b(y) = κ^{-1/2} g_{a,τ}(y) [cosθ g_{b/κ,σ}(y) + γ sinθ g_{b/κ,1/(2σ)}(y)]`,
//!   a sum of two square-root Gaussians.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{require_positive, Result};
use crate::gaussian::{ProbeSpec, SignalEnsemble, SqrtGaussian};

/// Gained position measurement `Π(b) = κ⁻¹ |b/κ⟩⟨b/κ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSpec {
    pub kappa: f64,
}

impl MeasurementSpec {
    pub fn new(kappa: f64) -> Result<Self> {
        require_positive("kappa", kappa)?;
        Ok(Self { kappa })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

impl MixtureComponent {
    pub fn pdf(&self, x: f64) -> f64 {
        let d = x - self.mean;
        self.weight * (-d * d / (2.0 * self.variance)).exp() / (2.0 * PI * self.variance).sqrt()
    }
}

/// A finite mixture of normal densities on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture1D {
    pub components: Vec<MixtureComponent>,
}

impl GaussianMixture1D {
    pub fn pdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.pdf(x)).sum()
    }

    /// Sum of weights; one for every outcome density built here.
    pub fn mass(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn mean(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * c.mean)
            .sum::<f64>()
            / self.mass()
    }

    /// Draws one value: pick a component by weight, then one normal variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random::<f64>() * self.mass();
        let mut acc = 0.0;
        let mut chosen = self.components.last().expect("mixture has components");
        for c in &self.components {
            acc += c.weight;
            if u < acc {
                chosen = c;
                break;
            }
        }
        let z: f64 = rng.sample(StandardNormal);
        chosen.mean + chosen.variance.sqrt() * z
    }
}

/// Exact outcome density `q(b|a)`.
///
/// Expanding the squared probe bracket gives three terms, each a normal
/// density in `b` centred on `κa`:
///
/// | weight          | variance                   |
/// |-----------------|----------------------------|
/// | `cos²θ`         | `κ²(τ² + σ²)`              |
/// | `2γ sinθ cosθ/β`| `κ²(τ² + 1/(2β²))`         |
/// | `γ² sin²θ`      | `κ²(τ² + 1/(4σ²))`         |
///
/// Zero-weight terms are dropped.
pub fn outcome_density(
    a: f64,
    ens: &SignalEnsemble,
    p: &ProbeSpec,
    m: &MeasurementSpec,
) -> GaussianMixture1D {
    let c = p.localized_weight();
    let d = p.delocalized_weight();
    let t2 = ens.tau * ens.tau;
    let k2 = m.kappa * m.kappa;
    let s2 = p.sigma * p.sigma;
    let raw = [
        (c * c, t2 + s2),
        (2.0 * c * d / p.beta, t2 + 0.5 / (p.beta * p.beta)),
        (d * d, t2 + 0.25 / s2),
    ];
    let components = raw
        .into_iter()
        .filter(|&(w, _)| w > 0.0)
        .map(|(weight, v)| MixtureComponent {
            weight,
            mean: m.kappa * a,
            variance: k2 * v,
        })
        .collect();
    GaussianMixture1D { components }
}

/// One term `coef · packet(y)` of a conditional amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeTerm {
    pub coef: f64,
    pub packet: SqrtGaussian,
}

/// Unnormalized conditional signal state `φ̃_b`, stored as
/// `exp(log_scale) · Σ coef_k packet_k(y)` so that far-tail outcomes do not
/// underflow.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalState {
    pub outcome: f64,
    pub log_scale: f64,
    pub terms: Vec<AmplitudeTerm>,
}

impl ConditionalState {
    fn relative_norm_squared(&self) -> f64 {
        let mut s = 0.0;
        for ti in &self.terms {
            for tj in &self.terms {
                s += ti.coef * tj.coef * ti.packet.overlap(&tj.packet);
            }
        }
        s
    }

    /// `‖φ̃_b‖²`, which equals `q(b|a)`.
    pub fn norm_squared(&self) -> f64 {
        (2.0 * self.log_scale).exp() * self.relative_norm_squared()
    }

    /// Unnormalized amplitude `φ̃_b(y)`.
    pub fn amplitude(&self, y: f64) -> f64 {
        self.log_scale.exp() * self.relative_amplitude(y)
    }

    fn relative_amplitude(&self, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * t.packet.amplitude(y))
            .sum()
    }

    /// Normalized amplitude `φ_b(y)`.
    pub fn normalized_amplitude(&self, y: f64) -> f64 {
        self.relative_amplitude(y) / self.relative_norm_squared().sqrt()
    }

    /// Norm of the normalized state; one up to rounding.
    pub fn normalized_norm(&self) -> f64 {
        let scale = self.relative_norm_squared().sqrt().recip();
        let mut s = 0.0;
        for ti in &self.terms {
            for tj in &self.terms {
                s += (scale * ti.coef) * (scale * tj.coef) * ti.packet.overlap(&tj.packet);
            }
        }
        s.sqrt()
    }

    /// `|⟨φ_b|target⟩|²` for the normalized state.
    pub fn fidelity_with(&self, target: &SqrtGaussian) -> f64 {
        let logs: Vec<f64> = self
            .terms
            .iter()
            .map(|t| t.packet.log_overlap(target))
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let amp: f64 = self
            .terms
            .iter()
            .zip(&logs)
            .map(|(t, l)| t.coef * (l - top).exp())
            .sum();
        let v = amp * amp * (2.0 * top).exp() / self.relative_norm_squared();
        v.min(1.0)
    }
}

/// Conditional signal state after outcome `b` for input symbol `a`.
pub fn conditional_state(
    b: f64,
    a: f64,
    ens: &SignalEnsemble,
    p: &ProbeSpec,
    m: &MeasurementSpec,
) -> ConditionalState {
    let u = b / m.kappa;
    let signal = ens.packet(a);
    let branches = [
        (p.localized_weight(), p.sigma),
        (p.delocalized_weight(), p.delocalized_width()),
    ];
    let products: Vec<(f64, f64, SqrtGaussian)> = branches
        .into_iter()
        .filter(|&(w, _)| w > 0.0)
        .map(|(w, width)| {
            let (ls, g) = signal.product(&SqrtGaussian::new_unchecked(u, width));
            (w, ls, g)
        })
        .collect();
    let top = products
        .iter()
        .map(|&(_, ls, _)| ls)
        .fold(f64::NEG_INFINITY, f64::max);
    let terms = products
        .into_iter()
        .map(|(w, ls, packet)| AmplitudeTerm {
            coef: w * (ls - top).exp(),
            packet,
        })
        .collect();
    ConditionalState {
        outcome: b,
        log_scale: top - 0.5 * m.kappa.ln(),
        terms,
    }
}

/// `|⟨φ_b|ψ_{target,τ}⟩|²`: overlap of the normalized conditional state with
/// the signal packet centred on `target`.
pub fn conditional_overlap(
    b: f64,
    a: f64,
    target: f64,
    ens: &SignalEnsemble,
    p: &ProbeSpec,
    m: &MeasurementSpec,
) -> f64 {
    conditional_state(b, a, ens, p, m).fidelity_with(&ens.packet(target))
}
