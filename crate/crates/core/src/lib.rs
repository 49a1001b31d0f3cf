//! Hitting-time calculus for discrete-time birth-and-death chains with drift
//! toward zero.
//!
//! The crate is organized around five layers:
//!
//! - [`chain`] / [`zoo`] — chain definitions, validation, the model zoo
//!   (simple and varying-rate walks, Ehrenfest urn, half wells) and
//!   parameterized families indexed by the right endpoint `a`.
//! - [`measure`] — reversible invariant measures built in log space, with
//!   compensated prefix/suffix tail masses.
//! - [`exact`] — closed-form hitting-time moments, drift constants, energy
//!   profiles, and the half-well/full-well comparison identities.
//! - [`oracle`] — independent brute-force ground truth for small chains:
//!   absorbing linear systems, absorption-time laws by kernel powers, and the
//!   exact law of the last one-way excursion by taboo-path enumeration.
//! - [`mc`] / [`diag`] — reproducible parallel Monte Carlo sampling and the
//!   statistical verdicts (cut-off profiles, variance criterion, exponential
//!   escape tests, trajectory-reversal tests).
//!
//! File formats (model documents, CSV/JSON reports) live in [`io`].

pub mod chain;
pub mod diag;
pub mod error;
pub mod exact;
pub mod io;
pub mod mc;
pub mod measure;
pub mod numerics;
pub mod oracle;
pub mod verify;
pub mod zoo;

pub use chain::{ChainSpec, Violation};
pub use error::Error;
pub use measure::InvariantMeasure;

pub type Result<T> = std::result::Result<T, Error>;
