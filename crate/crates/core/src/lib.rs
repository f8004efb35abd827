//! Location-invariant Hill-type tail-index estimation.
//!
//! * [`estimators`]: order statistics, Hill, moment, the `M^(alpha)` statistic,
//!   the Fraga Alves estimator and the `gamma_hat^(alpha)` family.
//! * [`asymptotics`]: variance and bias constants, `alpha0`, efficiency and
//!   MSE-optimal `k0`.
//! * [`inference`]: asymptotic confidence intervals.
//! * [`sampling`]: benchmark models and a portable seeded generator.
//! * [`montecarlo`]: the replication engine behind the simulation studies.
//! * [`cli`]: the `tailfrac` command-line front end.

// Numerical code deliberately writes `!(x > 0.0)` to reject NaN alongside bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::wrong_self_convention)]

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod inference;
pub mod montecarlo;
pub mod sampling;
pub mod special;

pub use error::{Error, Result};
pub use estimators::{Estimate, FractionPair, Method, Sample};
pub use inference::{CiMethod, ConfidenceInterval};
pub use sampling::{RandomStream, SecondOrderTriple, TailModel};
