//! Monte Carlo estimates of `F` and `G` from sampled outcomes.
//!
//! Trials are split into fixed-size chunks. Chunk `i` draws from a ChaCha8
//! stream keyed by `(seed, i)` and the per-chunk moments are merged in chunk
//! order, so sequential and parallel runs return bit-identical estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::{conditional_overlap, outcome_density, MeasurementSpec};
use crate::error::{require_positive, Error, Result};
use crate::exec::Execution;
use crate::gaussian::{ProbeSpec, SignalEnsemble};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub chunk_size: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 0,
            chunk_size: 8_192,
        }
    }
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("trials", 0.0, ">= 1"));
        }
        if self.chunk_size == 0 {
            return Err(Error::domain("chunk_size", 0.0, ">= 1"));
        }
        Ok(())
    }

    fn chunks(&self) -> Vec<(u64, u64)> {
        let n = self.trials.div_ceil(self.chunk_size);
        (0..n)
            .map(|i| (i, self.chunk_size.min(self.trials - i * self.chunk_size)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub stderr: f64,
    pub trials: u64,
}

impl McEstimate {
    /// `|mean − reference| / stderr`; infinite when the estimate has no spread
    /// but misses the reference.
    pub fn z_score(&self, reference: f64) -> f64 {
        let gap = (self.mean - reference).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.stderr
        }
    }

    /// True when the reference lies within `k` standard errors.
    pub fn agrees_with(&self, reference: f64, k: f64) -> bool {
        (self.mean - reference).abs() <= k * self.stderr + 1e-12
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let (na, nb) = (self.n as f64, o.n as f64);
        Moments {
            n,
            mean: self.mean + d * nb / n as f64,
            m2: self.m2 + o.m2 + d * d * na * nb / n as f64,
        }
    }

    fn estimate(self) -> McEstimate {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            stderr: (var.max(0.0) / self.n as f64).sqrt(),
            trials: self.n,
        }
    }
}

fn run<F>(cfg: &McConfig, exec: Execution, trial: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    cfg.validate()?;
    let parts = exec.map(&cfg.chunks(), |&(idx, len)| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(idx);
        let mut m = Moments::default();
        for _ in 0..len {
            m.push(trial(&mut rng));
        }
        m
    });
    Ok(parts
        .into_iter()
        .fold(Moments::default(), Moments::merge)
        .estimate())
}

/// Estimate of `G`: draw `a ~ N(0, Δ²)`, `b ~ q(b|a)`, score
/// `exp(−(a−b)²/(4τ²))`.
pub fn simulate_g(
    ens: &SignalEnsemble,
    p: &ProbeSpec,
    m: &MeasurementSpec,
    cfg: &McConfig,
) -> Result<McEstimate> {
    simulate_g_with(ens, p, m, cfg, Execution::default())
}

pub fn simulate_g_with(
    ens: &SignalEnsemble,
    p: &ProbeSpec,
    m: &MeasurementSpec,
    cfg: &McConfig,
    exec: Execution,
) -> Result<McEstimate> {
    let four_t2 = 4.0 * ens.tau * ens.tau;
    run(cfg, exec, |rng| {
        let z: f64 = rng.sample(StandardNormal);
        let a = ens.delta * z;
        let b = outcome_density(a, ens, p, m).sample(rng);
        (-(a - b).powi(2) / four_t2).exp()
    })
}

/// Estimate of `F` at the symbol `a = 0`: draw `b ~ q(b|0)`, score the overlap
/// of the conditional state with the input packet.
pub fn simulate_f(
    p: &ProbeSpec,
    tau: f64,
    m: &MeasurementSpec,
    cfg: &McConfig,
) -> Result<McEstimate> {
    simulate_f_with(p, tau, m, cfg, Execution::default())
}

pub fn simulate_f_with(
    p: &ProbeSpec,
    tau: f64,
    m: &MeasurementSpec,
    cfg: &McConfig,
    exec: Execution,
) -> Result<McEstimate> {
    require_positive("tau", tau)?;
    let ens = SignalEnsemble::new(tau, 0.0)?;
    let mix = outcome_density(0.0, &ens, p, m);
    run(cfg, exec, |rng| {
        let b = mix.sample(rng);
        conditional_overlap(b, 0.0, 0.0, &ens, p, m)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::make_probe;
    use std::f64::consts::FRAC_1_SQRT_2;

    const SQRT_2_3: f64 = 0.816_496_580_927_726;

    fn cfg(trials: u64, seed: u64) -> McConfig {
        McConfig::new(trials, seed)
    }

    #[test]
    fn g_example() {
        let ens = SignalEnsemble::new(FRAC_1_SQRT_2, 1.0).unwrap();
        let p = make_probe(0.0, FRAC_1_SQRT_2).unwrap();
        let m = MeasurementSpec::new(0.5).unwrap();
        let est = simulate_g(&ens, &p, &m, &cfg(100_000, 7)).unwrap();
        assert!(est.agrees_with(SQRT_2_3, 3.0), "{est:?}");
        assert_eq!(est.trials, 100_000);
    }

    #[test]
    fn g_single_symbol_limit() {
        let ens = SignalEnsemble::new(1.0, 1e-6).unwrap();
        let p = make_probe(0.4, 0.5).unwrap();
        let m = MeasurementSpec::new(1e-6).unwrap();
        let est = simulate_g(&ens, &p, &m, &cfg(20_000, 3)).unwrap();
        assert!(
            est.agrees_with(1.0, 3.0) || (est.mean - 1.0).abs() < 1e-9,
            "{est:?}"
        );
    }

    #[test]
    fn f_examples() {
        let m = MeasurementSpec::new(1.0).unwrap();
        let p = make_probe(0.0, 1.0).unwrap();
        let est = simulate_f(&p, 1.0, &m, &cfg(100_000, 11)).unwrap();
        assert!(est.agrees_with(SQRT_2_3, 3.0), "{est:?}");

        let p = make_probe(0.9, FRAC_1_SQRT_2).unwrap();
        let est = simulate_f(&p, 1.0, &m, &cfg(100_000, 12)).unwrap();
        assert!(est.agrees_with(FRAC_1_SQRT_2, 3.0), "{est:?}");
    }

    #[test]
    fn f_independent_of_gain() {
        let p = make_probe(0.6, 0.4).unwrap();
        let a = simulate_f(
            &p,
            0.9,
            &MeasurementSpec::new(0.5).unwrap(),
            &cfg(50_000, 1),
        )
        .unwrap();
        let b = simulate_f(
            &p,
            0.9,
            &MeasurementSpec::new(2.0).unwrap(),
            &cfg(50_000, 2),
        )
        .unwrap();
        let combined = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() < 3.0 * combined);
    }

    #[test]
    fn deterministic_and_split_independent() {
        let ens = SignalEnsemble::new(0.8, 1.3).unwrap();
        let p = make_probe(0.7, 0.3).unwrap();
        let m = MeasurementSpec::new(0.6).unwrap();
        let c = McConfig {
            trials: 10_001,
            seed: 42,
            chunk_size: 1_000,
        };
        let a = simulate_g_with(&ens, &p, &m, &c, Execution::Sequential).unwrap();
        let b = simulate_g_with(&ens, &p, &m, &c, Execution::Sequential).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        #[cfg(feature = "parallel")]
        {
            let par = simulate_g_with(&ens, &p, &m, &c, Execution::Parallel).unwrap();
            assert_eq!(a.mean.to_bits(), par.mean.to_bits());
            assert_eq!(a.stderr.to_bits(), par.stderr.to_bits());
            let fs = simulate_f_with(&p, 0.8, &m, &c, Execution::Sequential).unwrap();
            let fp = simulate_f_with(&p, 0.8, &m, &c, Execution::Parallel).unwrap();
            assert_eq!(fs, fp);
        }
        let other = simulate_g_with(
            &ens,
            &p,
            &m,
            &McConfig { seed: 43, ..c },
            Execution::Sequential,
        )
        .unwrap();
        assert_ne!(a.mean, other.mean);
    }

    #[test]
    fn stderr_shrinks_like_inverse_sqrt() {
        let ens = SignalEnsemble::new(1.0, 1.0).unwrap();
        let p = make_probe(0.5, 0.6).unwrap();
        let m = MeasurementSpec::new(0.5).unwrap();
        let small = simulate_g(&ens, &p, &m, &cfg(10_000, 5)).unwrap();
        let big = simulate_g(&ens, &p, &m, &cfg(40_000, 5)).unwrap();
        let ratio = small.stderr / big.stderr;
        assert!((1.8..2.2).contains(&ratio), "{ratio}");
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 * 0.3).collect();
        let mut one = Moments::default();
        xs.iter().for_each(|&x| one.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..40].iter().for_each(|&x| a.push(x));
        xs[40..].iter().for_each(|&x| b.push(x));
        let two = a.merge(b);
        assert!((one.mean - two.mean).abs() < 1e-14);
        assert!((one.m2 - two.m2).abs() < 1e-11);
    }

    #[test]
    fn rejects_empty_runs() {
        let p = make_probe(0.0, 1.0).unwrap();
        let m = MeasurementSpec::new(1.0).unwrap();
        assert!(simulate_f(&p, 1.0, &m, &cfg(0, 1)).is_err());
        let c = McConfig {
            chunk_size: 0,
            ..cfg(10, 1)
        };
        assert!(simulate_f(&p, 1.0, &m, &c).is_err());
    }

    #[test]
    fn chunk_layout() {
        let c = McConfig {
            trials: 25,
            seed: 0,
            chunk_size: 10,
        };
        assert_eq!(c.chunks(), vec![(0, 10), (1, 10), (2, 5)]);
    }
}
