//! Gaussian wavepacket calculus.
//!
//! Widths are standard deviations of the *squared* amplitude: a packet of
//! width `s` has `|g(x)|²` equal to the normal density with variance `s²`,
//! so the amplitude itself carries `4 s²` in the exponent.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{require_non_negative, require_positive, Error, Result};

/// Real square-root Gaussian amplitude `(2π w²)^(-1/4) exp(-(x-m)²/(4w²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtGaussian {
    pub mean: f64,
    pub width: f64,
}

impl SqrtGaussian {
    pub fn new(mean: f64, width: f64) -> Result<Self> {
        require_positive("width", width)?;
        if !mean.is_finite() {
            return Err(Error::domain("mean", mean, "finite"));
        }
        Ok(Self { mean, width })
    }

    pub(crate) fn new_unchecked(mean: f64, width: f64) -> Self {
        Self { mean, width }
    }

    pub fn amplitude(&self, x: f64) -> f64 {
        let w2 = self.width * self.width;
        let dx = x - self.mean;
        (2.0 * PI * w2).powf(-0.25) * (-dx * dx / (4.0 * w2)).exp()
    }

    /// `∫ g₁(x) g₂(x) dx`.
    pub fn overlap(&self, other: &SqrtGaussian) -> f64 {
        self.log_overlap(other).exp()
    }

    /// Natural log of [`SqrtGaussian::overlap`], finite even when the overlap underflows.
    pub fn log_overlap(&self, other: &SqrtGaussian) -> f64 {
        let s1 = self.width * self.width;
        let s2 = other.width * other.width;
        let sum = s1 + s2;
        let dm = self.mean - other.mean;
        0.5 * (2.0 * self.width * other.width / sum).ln() - dm * dm / (4.0 * sum)
    }

    /// Pointwise product `g₁(x) g₂(x) = exp(log_scale) · g(x)`, returned as
    /// `(log_scale, g)`.
    pub fn product(&self, other: &SqrtGaussian) -> (f64, SqrtGaussian) {
        let s1 = self.width * self.width;
        let s2 = other.width * other.width;
        let sum = s1 + s2;
        let var = s1 * s2 / sum;
        let mean = (self.mean * s2 + other.mean * s1) / sum;
        let dm = self.mean - other.mean;
        let log_scale = -0.25 * (2.0 * PI * sum).ln() - dm * dm / (4.0 * sum);
        (log_scale, SqrtGaussian::new_unchecked(mean, var.sqrt()))
    }
}

/// The transmitted code: packets of width `tau` centred on symbols drawn from
/// a zero-mean normal prior of standard deviation `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalEnsemble {
    pub tau: f64,
    pub delta: f64,
}

impl SignalEnsemble {
    pub fn new(tau: f64, delta: f64) -> Result<Self> {
        require_positive("tau", tau)?;
        require_non_negative("delta", delta)?;
        Ok(Self { tau, delta })
    }

    /// Signal packet for symbol `a`.
    pub fn packet(&self, a: f64) -> SqrtGaussian {
        SqrtGaussian::new_unchecked(a, self.tau)
    }

    /// Prior density of symbol `a`.
    pub fn prior_density(&self, a: f64) -> f64 {
        let d2 = self.delta * self.delta;
        (-a * a / (2.0 * d2)).exp() / (2.0 * PI * d2).sqrt()
    }
}

/// Probe state `cosθ·g_{0,σ} + γ sinθ·g_{0,1/(2σ)}`: a superposition of an
/// almost-localized packet and its Fourier-conjugate, almost-delocalized one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSpec {
    pub theta: f64,
    pub sigma: f64,
    /// `√(σ² + 1/(4σ²))`, at least 1.
    pub beta: f64,
    /// Normalization factor in `[0, 1]`.
    pub gamma: f64,
    cos_theta: f64,
    sin_theta: f64,
}

impl ProbeSpec {
    /// Validates `θ ∈ [0, π/2]` and `σ > 0` and fills in `β` and `γ`.
    pub fn new(theta: f64, sigma: f64) -> Result<Self> {
        require_positive("sigma", sigma)?;
        if !(theta.is_finite() && (0.0..=FRAC_PI_2 + 1e-12).contains(&theta)) {
            return Err(Error::domain("theta", theta, "[0, π/2]"));
        }
        let theta = theta.min(FRAC_PI_2);
        let beta = beta_of(sigma);
        let cos_theta = if theta == FRAC_PI_2 { 0.0 } else { theta.cos() };
        let sin_theta = theta.sin();
        // γ = (√(1+β²tan²θ) − 1)/(β tanθ), rationalized so that θ → 0 and
        // θ → π/2 need no special casing.
        let root = (cos_theta * cos_theta + beta * beta * sin_theta * sin_theta).sqrt();
        let gamma = beta * sin_theta / (root + cos_theta);
        Ok(Self {
            theta,
            sigma,
            beta,
            gamma,
            cos_theta,
            sin_theta,
        })
    }

    /// Amplitude weight of the localized branch, `cosθ`.
    pub fn localized_weight(&self) -> f64 {
        self.cos_theta
    }

    /// Amplitude weight of the delocalized branch, `γ sinθ`.
    pub fn delocalized_weight(&self) -> f64 {
        self.gamma * self.sin_theta
    }

    /// Width of the delocalized branch, `1/(2σ)`.
    pub fn delocalized_width(&self) -> f64 {
        0.5 / self.sigma
    }

    pub fn cos_theta(&self) -> f64 {
        self.cos_theta
    }

    pub fn sin_theta(&self) -> f64 {
        self.sin_theta
    }

    /// `cos²θ + γ² sin²θ + 2γ sinθ cosθ / β`, which equals one.
    pub fn normalization(&self) -> f64 {
        let c = self.localized_weight();
        let d = self.delocalized_weight();
        c * c + d * d + 2.0 * c * d / self.beta
    }

    /// Probe amplitude in position space.
    pub fn amplitude(&self, x: f64) -> f64 {
        let loc = SqrtGaussian::new_unchecked(0.0, self.sigma);
        let deloc = SqrtGaussian::new_unchecked(0.0, self.delocalized_width());
        self.localized_weight() * loc.amplitude(x) + self.delocalized_weight() * deloc.amplitude(x)
    }
}

/// Shorthand for [`ProbeSpec::new`].
pub fn make_probe(theta: f64, sigma: f64) -> Result<ProbeSpec> {
    ProbeSpec::new(theta, sigma)
}

pub(crate) fn beta_of(sigma: f64) -> f64 {
    (sigma * sigma + 0.25 / (sigma * sigma)).sqrt()
}

/// Squared overlap `|⟨ψ_{b,τ′}|ψ_{a,τ}⟩|²` between two signal packets.
pub fn signal_overlap(a: f64, tau: f64, b: f64, tau2: f64) -> Result<f64> {
    require_positive("tau", tau)?;
    require_positive("tau2", tau2)?;
    let sum = tau * tau + tau2 * tau2;
    let d = a - b;
    Ok(2.0 * tau * tau2 / sum * (-d * d / (2.0 * sum)).exp())
}

/// Mean energy `⟨(X²+P²)/2⟩` of the packet centred on `a`.
pub fn signal_energy(a: f64, tau: f64) -> Result<f64> {
    require_positive("tau", tau)?;
    Ok(0.5 * (a * a + tau * tau + 0.25 / (tau * tau)))
}

/// Prior-averaged signal energy per channel use.
pub fn mean_signal_energy(ens: &SignalEnsemble) -> f64 {
    let t2 = ens.tau * ens.tau;
    0.5 * (ens.delta * ens.delta + t2 + 0.25 / t2)
}

/// Mean probe energy `N_p(β, θ)`.
pub fn probe_energy(p: &ProbeSpec) -> f64 {
    let c = p.localized_weight();
    let d = p.delocalized_weight();
    let b = p.beta;
    0.5 * (b * b * (c * c + d * d) + 2.0 * c * d / (b * b * b))
}

/// The `θ` that minimizes the probe energy at fixed `σ`.
pub fn min_energy_theta(sigma: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    let b = beta_of(sigma);
    // tan²(θ/2) = 1 + 2(β − √(2β(1+β)))/(2+β), in a cancellation-free form.
    let t2 = (b + 2.0) / (2.0 + 3.0 * b + 2.0 * (2.0 * b * (1.0 + b)).sqrt());
    Ok(2.0 * t2.sqrt().atan())
}

/// Probe energy at [`min_energy_theta`].
pub fn min_probe_energy(sigma: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    let b = beta_of(sigma);
    Ok((1.0 + b * (b - 1.0) * (b * b + 1.0)) / (2.0 * b * b))
}

/// Squeezing parameter from `sinh² r = (τ² + 1/(4τ²))/2`.
///
/// This relation is applied exactly as stated for the optical realization.
/// Note that it gives `r ≠ 0` at `τ² = 1/2`, where the packet is a coherent
/// state, so it should not be read as the usual squeezing/width mapping.
pub fn squeezing_for_width(tau: f64) -> Result<f64> {
    require_positive("tau", tau)?;
    let t2 = tau * tau;
    Ok((0.5 * (t2 + 0.25 / t2)).sqrt().asinh())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub signal_mean_energy: f64,
    pub probe_energy: f64,
}

pub fn energy_report(ens: &SignalEnsemble, probe: &ProbeSpec) -> EnergyReport {
    EnergyReport {
        signal_mean_energy: mean_signal_energy(ens),
        probe_energy: probe_energy(probe),
    }
}
