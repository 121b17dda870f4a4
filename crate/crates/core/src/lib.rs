//! Simulation and verification engine for a trend-cycle compartmental model.
//!
//! Potential adopters `S`, adopters `I` and rejecters `R` evolve under a
//! logistic adoption rate and a rejection rate that switches to a power law
//! `C* I^p` at the first peak of `I`. The exponent `p` decides how a trend
//! dies out: finite-time extinction (Fad, Fast-fashion), exponential decline
//! (Fashion) or polynomial decline (Classic). A positive recurrence rate
//! produces periodic cycles.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the CLI uses.

// negated comparisons are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod integrator;
pub mod model;
pub mod scalar;
pub mod scenarios;

pub use error::{Result, TrendError};
pub use scalar::Scalar;

pub type Params = model::ModelParams<f64>;
pub type Recurrence = model::RecurrenceSpec<f64>;
pub type State = model::State<f64>;
pub type Phase = model::Phase<f64>;
pub type Grid = integrator::GridSpec<f64>;
pub type Trajectory = integrator::Trajectory<f64>;
pub type Envelope = analysis::BoundEnvelope<f64>;
pub type Report = analysis::EnvelopeReport<f64>;
pub type Scenario = scenarios::ScenarioSpec<f64>;
