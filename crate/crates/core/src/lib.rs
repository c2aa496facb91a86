//! Generalized Khinchine inequalities on normed spaces of Hanner type and
//! cotype, and the Banach-Mazur distance bounds they imply.
//!
//! The crate works with odd functions through their laws only
//! ([`SymmetricAtoms`]), evaluates the moment functional
//! `I_p(v, f) = (E ‖Σ f(x_i) v_i‖^p)^{1/p}` exactly by enumeration or by
//! seeded Monte Carlo, and assembles lower and upper bounds on
//! `d(l^p, l^q)` into sandwich reports.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acceptance;
pub mod banach_mazur;
pub mod combinatorics;
pub mod constants;
pub mod distributions;
pub mod error;
pub mod functional;
pub mod hanner;
pub mod norms;
pub mod parse;
pub mod report;
mod rng;
mod sum;

pub use constants::{gamma, khinchine_constants, KhinchineConstants};
pub use distributions::{Atom, StepFunction, SymmetricAtoms};
pub use error::{Error, Result};
pub use functional::{IpMethod, IpResult, VectorTuple};
pub use norms::{ComparisonConstants, Exponent, NormSpec};

/// Default cap on the number of weighted terms an exact enumeration may visit.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Relative slack used by every inequality assertion.
pub const REL_SLACK: f64 = 1e-9;
/// Absolute floor for the slack.
pub const ABS_SLACK: f64 = 1e-12;

/// `a <= b` up to the crate-wide slack.
pub fn le_slack(a: f64, b: f64, rel: f64) -> bool {
    a <= b + slack(a, b, rel)
}

pub(crate) fn slack(a: f64, b: f64, rel: f64) -> f64 {
    (rel * a.abs().max(b.abs())).max(ABS_SLACK)
}
