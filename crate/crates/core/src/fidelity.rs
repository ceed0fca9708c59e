//! Closed-form prior-averaged fidelities.
//!
//! Both fidelities are sums over the three probe-bracket terms (localized,
//! cross, delocalized). The recurring factor
//! `T = −2σ cosθ + √(1 + 4σ⁴ − (1 − 2σ²)² cos²θ)` vanishes at `θ = 0`, so it is
//! evaluated as `(1 + 4σ⁴) sin²θ / (2σ cosθ + √(…))`.

use crate::channel::MeasurementSpec;
use crate::error::{require_positive, Result};
use crate::gaussian::{ProbeSpec, SignalEnsemble};

/// Transmission fidelity `F` and estimation fidelity `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityPoint {
    pub f: f64,
    pub g: f64,
}

impl FidelityPoint {
    pub fn new(f: f64, g: f64) -> Self {
        Self { f, g }
    }

    /// Clamps both values into `[0, 1]`.
    pub fn clamped(self) -> Self {
        Self {
            f: self.f.clamp(0.0, 1.0),
            g: self.g.clamp(0.0, 1.0),
        }
    }
}

struct Terms {
    cos: f64,
    /// `T` above.
    t: f64,
    /// `1 + 4σ⁴`.
    q: f64,
}

fn terms(p: &ProbeSpec) -> Terms {
    let s = p.sigma;
    let s2 = s * s;
    let c = p.cos_theta();
    let sn = p.sin_theta();
    let q = 1.0 + 4.0 * s2 * s2;
    let r = (q - (1.0 - 2.0 * s2).powi(2) * c * c).sqrt();
    Terms {
        cos: c,
        t: q * sn * sn / (2.0 * s * c + r),
        q,
    }
}

/// Averaged transmission fidelity `F`. It depends on neither the symbol, the
/// gain nor the alphabet size.
pub fn transmission_fidelity(p: &ProbeSpec, tau: f64) -> Result<f64> {
    require_positive("tau", tau)?;
    let s = p.sigma;
    let s2 = s * s;
    let t2 = tau * tau;
    let Terms { cos: c, t, q } = terms(p);
    let localized = std::f64::consts::SQRT_2 * s * c * c / (2.0 * s2 + t2).sqrt();
    let cross = 4.0 * s * c * t / (q * (q + 4.0 * s2 * t2)).sqrt();
    let delocalized = t * t / (q * (1.0 + 2.0 * s2 * t2).sqrt());
    Ok(localized + cross + delocalized)
}

/// Averaged estimation fidelity `G` for the inference rule `b → ψ_{b,τ}`.
pub fn estimation_fidelity(p: &ProbeSpec, ens: &SignalEnsemble, m: &MeasurementSpec) -> f64 {
    let s = p.sigma;
    let s2 = s * s;
    let s4 = s2 * s2;
    let tau = ens.tau;
    let t2 = tau * tau;
    let d2 = ens.delta * ens.delta;
    let k = m.kappa;
    let k2 = k * k;
    let Terms { cos: c, t, q } = terms(p);
    let bias = d2 * (k - 1.0) * (k - 1.0);
    let pref = std::f64::consts::SQRT_2 * tau;

    let localized = pref * c * c / (bias + 2.0 * t2 + k2 * (s2 + t2)).sqrt();
    let cross = pref * 4.0 * s * c * t
        / (q * (bias * q + 2.0 * q * t2 + k2 * (2.0 * s2 + t2 + 4.0 * s4 * t2))).sqrt();
    let delocalized = pref * 2.0 * s * t * t
        / (q * (4.0 * s2 * (d2 + 2.0 * t2) + k2 * (1.0 + 4.0 * d2 * s2 + 4.0 * s2 * t2)
            - 8.0 * k * d2 * s2)
            .sqrt());
    localized + cross + delocalized
}

/// Both fidelities at one parameter point.
pub fn fidelity_point(
    p: &ProbeSpec,
    ens: &SignalEnsemble,
    m: &MeasurementSpec,
) -> Result<FidelityPoint> {
    Ok(FidelityPoint::new(
        transmission_fidelity(p, ens.tau)?,
        estimation_fidelity(p, ens, m),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::make_probe;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn ens(tau: f64, delta: f64) -> SignalEnsemble {
        SignalEnsemble::new(tau, delta).unwrap()
    }

    /// The three-term sum written directly from the outcome mixture:
    /// each normal component contributes `√2τ / √(Δ²(κ−1)² + 2τ² + κ²V)`.
    fn g_from_components(p: &ProbeSpec, e: &SignalEnsemble, k: f64) -> f64 {
        let c = p.localized_weight();
        let d = p.delocalized_weight();
        let t2 = e.tau * e.tau;
        let s2 = p.sigma * p.sigma;
        let parts = [
            (c * c, t2 + s2),
            (2.0 * c * d / p.beta, t2 + 0.5 / (p.beta * p.beta)),
            (d * d, t2 + 0.25 / s2),
        ];
        parts
            .iter()
            .map(|&(w, v)| {
                w * (2.0f64).sqrt() * e.tau
                    / (e.delta.powi(2) * (k - 1.0).powi(2) + 2.0 * t2 + k * k * v).sqrt()
            })
            .sum()
    }

    #[test]
    fn f_localized_probe_reduction() {
        let p = make_probe(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(
            transmission_fidelity(&p, 1.0).unwrap(),
            (2.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn f_delocalized_probe_reduction() {
        let p = make_probe(FRAC_PI_2, 0.01).unwrap();
        let want = 1.0 / (1.0 + 2.0 * 0.01f64.powi(2)).sqrt();
        assert_abs_diff_eq!(
            transmission_fidelity(&p, 1.0).unwrap(),
            want,
            epsilon = 1e-14
        );
    }

    #[test]
    fn f_printed_form_agrees_away_from_zero_angle() {
        for &(theta, s, tau) in &[(0.4, 0.3, 1.0), (1.0, 1.7, 0.5), (1.5, 0.9, 2.0)] {
            let c = f64::cos(theta);
            let s2: f64 = s * s;
            let t2: f64 = tau * tau;
            let tt = -2.0 * s * c + (1.0 + 4.0 * s2 * s2 - (1.0 - 2.0 * s2).powi(2) * c * c).sqrt();
            let q = 1.0 + 4.0 * s2 * s2;
            let printed = (2.0f64).sqrt() * s * c * c / (2.0 * s2 + t2).sqrt()
                + 4.0 * s * c * tt / (q * (1.0 + 4.0 * s2 * s2 + 4.0 * s2 * t2)).sqrt()
                + tt * tt / (q * (1.0 + 2.0 * s2 * t2).sqrt());
            let p = make_probe(theta, s).unwrap();
            assert_abs_diff_eq!(
                transmission_fidelity(&p, tau).unwrap(),
                printed,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn g_localized_probe_example() {
        let p = make_probe(0.0, FRAC_1_SQRT_2).unwrap();
        let m = MeasurementSpec::new(1.0).unwrap();
        let g = estimation_fidelity(&p, &ens(FRAC_1_SQRT_2, 1.0), &m);
        assert_abs_diff_eq!(g, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn g_matches_component_sum() {
        for theta in [0.0, 0.3, 0.9, 1.3, FRAC_PI_2] {
            for sigma in [0.2, 0.6, 1.0, 2.5] {
                for &(tau, delta, k) in &[(0.4, 0.5, 0.5), (1.0, 1.0, 1.0), (2.0, 2.0, 1.5)] {
                    let p = make_probe(theta, sigma).unwrap();
                    let e = ens(tau, delta);
                    let m = MeasurementSpec::new(k).unwrap();
                    assert_abs_diff_eq!(
                        estimation_fidelity(&p, &e, &m),
                        g_from_components(&p, &e, k),
                        epsilon = 1e-13
                    );
                }
            }
        }
    }

    #[test]
    fn g_single_symbol_limit() {
        let p = make_probe(0.8, 0.6).unwrap();
        let m = MeasurementSpec::new(1e-9).unwrap();
        let g = estimation_fidelity(&p, &ens(0.9, 0.0), &m);
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn f_independent_of_gain_and_alphabet() {
        let p = make_probe(0.6, 0.45).unwrap();
        let f0 = transmission_fidelity(&p, 0.8).unwrap();
        for (k, d) in [(0.3, 0.1), (1.0, 1.0), (2.7, 5.0)] {
            let e = ens(0.8, d);
            let fp = fidelity_point(&p, &e, &MeasurementSpec::new(k).unwrap()).unwrap();
            assert_eq!(fp.f, f0);
        }
    }

    #[test]
    fn theta_independent_at_minimum_width() {
        let e = ens(0.9, 0.7);
        let m = MeasurementSpec::new(0.8).unwrap();
        let base = fidelity_point(&make_probe(0.0, FRAC_1_SQRT_2).unwrap(), &e, &m).unwrap();
        for k in 1..=20 {
            let p = make_probe(k as f64 * FRAC_PI_2 / 20.0, FRAC_1_SQRT_2).unwrap();
            let fp = fidelity_point(&p, &e, &m).unwrap();
            assert_abs_diff_eq!(fp.f, base.f, epsilon = 1e-10);
            assert_abs_diff_eq!(fp.g, base.g, epsilon = 1e-10);
        }
    }

    #[test]
    fn fidelities_in_unit_interval() {
        for theta in [0.0, 0.5, 1.0, FRAC_PI_2] {
            for sigma in [1e-3, 0.1, 0.7, 3.0, 30.0] {
                for tau in [0.1, 1.0, 5.0] {
                    let p = make_probe(theta, sigma).unwrap();
                    let fp =
                        fidelity_point(&p, &ens(tau, 1.0), &MeasurementSpec::new(0.7).unwrap())
                            .unwrap();
                    assert!((0.0..=1.0 + 1e-15).contains(&fp.f), "{fp:?}");
                    assert!((0.0..=1.0 + 1e-15).contains(&fp.g), "{fp:?}");
                }
            }
        }
    }

    #[test]
    fn clamped_point() {
        let fp = FidelityPoint::new(1.0 + 1e-15, -1e-17).clamped();
        assert_eq!((fp.f, fp.g), (1.0, 0.0));
    }
}
