//! Information/disturbance trade-off for indirect measurements on
//! continuous-variable Gaussian signals.
//!
//! A symbol `a` drawn from a Gaussian prior of width `Δ` is encoded in a
//! Gaussian wavepacket of width `τ`, coupled to a probe by a C-sum gate and
//! read out by a gained position measurement on the probe. The crate computes
//! the averaged transmission fidelity `F` (how much of the signal survives)
//! and estimation fidelity `G` (how well the symbol is inferred), both in
//! closed form and from first principles by quadrature, and simulates the
//! whole pipeline by Monte Carlo.
//!
//! Module map:
//!
//! * [`gaussian`]: wavepacket calculus, probe construction, energies.
//! * [`channel`]: outcome density `q(b|a)` and conditional signal states.
//! * [`fidelity`]: closed-form averaged `F` and `G`.
//! * [`oracle`]: quadrature recomputation of `F` and `G`, discrepancy report.
//! * [`tradeoff`]: optimal gains, trade-off curves and bounds per configuration.
//! * [`montecarlo`]: stochastic end-to-end estimates with standard errors.
//! * [`cli`]: CSV-emitting command line front end.

pub mod channel;
pub mod cli;
pub mod error;
pub mod exec;
pub mod fidelity;
pub mod gaussian;
pub mod montecarlo;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod tradeoff;

pub use channel::{
    conditional_overlap, conditional_state, outcome_density, ConditionalState, GaussianMixture1D,
    MeasurementSpec, MixtureComponent,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use fidelity::{estimation_fidelity, transmission_fidelity, FidelityPoint};
pub use gaussian::{ProbeSpec, SignalEnsemble, SqrtGaussian};
pub use montecarlo::{simulate_f, simulate_g, McConfig, McEstimate};
pub use oracle::{oracle_f, oracle_g, QuadratureConfig};
