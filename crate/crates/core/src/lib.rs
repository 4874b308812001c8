//! HARQ over an underlay spectrum-sharing link.
//!
//! A secondary user (SU) transmits under a peak-power cap and an interference
//! cap at a primary receiver, with only an imperfect estimate of its channel
//! toward that receiver. This crate evaluates the closed-form outage and
//! throughput of repetition time diversity (RTD) and incremental redundancy
//! (INR) HARQ for continuous and bursting traffic, and checks every closed
//! form against a brute-force Monte Carlo simulator.
//!
//! Module map:
//!
//! - [`specfun`]: `E1 = Γ(0, x)`, `I0`, first-order Marcum Q, and adaptive quadrature.
//! - [`channel`]: Rayleigh gains and the correlated (true, estimated) SU-PU pair.
//! - [`analytics`]: CDFs of the SU SINR and of the interference seen by the primary.
//! - [`power`]: the SU power rule and the confidence-threshold solver.
//! - [`harq`]: per-round decode probabilities, outage and throughput.
//! - [`montecarlo`]: the independent simulator.
//! - [`experiments`]: sweeps, validation suite and config files behind the CLI.

pub mod analytics;
pub mod channel;
mod error;
pub mod experiments;
pub mod harq;
pub mod montecarlo;
pub mod power;
pub mod specfun;

pub use error::{Error, Result};
