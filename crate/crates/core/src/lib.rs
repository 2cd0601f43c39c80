//! A CPU data-parallel engine for the radio interferometer measurement
//! equation (RIME).
//!
//! Parametric sky models ([`sky`]) are combined with an observation
//! ([`obs`]) in two stages: a per-antenna stage that forms the product of
//! the primary beam and the geometric phase, and a per-baseline stage that
//! combines antenna terms with source brightness matrices, sums over sources
//! and reduces model-versus-observed residuals to χ² terms ([`rime`]). The
//! χ² feeds a Gaussian log-likelihood ([`likelihood`]) which drives a
//! Metropolis-Hastings sampler and grid-quadrature evidence ([`sampler`]).
//!
//! Large problems are subdivided along time to fit a memory budget
//! ([`budget`]), and [`perf`] carries the analytic arithmetic-intensity and
//! roofline model of both stages.

pub mod budget;
pub mod cli;
mod error;
pub mod jones;
pub mod likelihood;
pub mod obs;
pub mod perf;
pub mod real;
pub mod rime;
pub mod sampler;
pub mod sky;

pub use error::{Error, ErrorKind, Result};
pub use jones::Jones;
pub use real::{Precision, Real};
