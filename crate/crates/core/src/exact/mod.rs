//! Closed-form hitting-time analysis: first and second moments of one- and
//! two-sided hitting times, per-step variances, drift constants, energy
//! profiles, strong-drift sweeps, and the half-well/full-well comparison
//! identities.
//!
//! Everything here is a pure function of an immutable [`ChainSpec`] and its
//! [`InvariantMeasure`]; queries are independent and freely parallelizable.

mod compare;
mod drift;
mod moments;

pub use compare::{comparison_checks, ComparisonReport, IdentityCheck, TwoSidedBounds};
pub use drift::{
    drift_report, energy_profile, sd_condition_sweep, DriftReport, EnergyProfile, SdSweepRow,
};
pub use moments::{
    commute_identity, fall_moments, log_mean_hit_down, log_mean_hit_up, mean_hit_down,
    mean_hit_two_sided, mean_hit_up, second_moment_down, second_moment_up, step_variance,
    step_variance_up, Side,
};

use crate::chain::ChainSpec;
use crate::error::Error;
use crate::measure::InvariantMeasure;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Target of a hitting query: one boundary state, or a two-sided pair
/// sandwiching the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    One(i64),
    Two { lower: i64, upper: i64 },
}

/// A hitting-time query `T_{source -> target}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingQuery {
    pub source: i64,
    pub target: Target,
}

impl HittingQuery {
    pub fn one_sided(source: i64, target: i64) -> Self {
        HittingQuery { source, target: Target::One(target) }
    }

    pub fn two_sided(source: i64, lower: i64, upper: i64) -> Self {
        HittingQuery { source, target: Target::Two { lower, upper } }
    }

    pub fn validate(&self, spec: &ChainSpec) -> Result<()> {
        let inside = |x: i64, what: &str| {
            if spec.contains(x) {
                Ok(())
            } else {
                Err(Error::domain(format!("{what} {x} outside [{}, {}]", spec.b(), spec.a())))
            }
        };
        inside(self.source, "source")?;
        match self.target {
            Target::One(t) => inside(t, "target"),
            Target::Two { lower, upper } => {
                inside(lower, "lower target")?;
                inside(upper, "upper target")?;
                if lower < self.source && self.source < upper {
                    Ok(())
                } else {
                    Err(Error::domain(format!(
                        "two-sided query needs lower < source < upper, got {lower} < {} < {upper}",
                        self.source
                    )))
                }
            }
        }
    }

    pub fn targets(&self) -> Vec<i64> {
        match self.target {
            Target::One(t) => vec![t],
            Target::Two { lower, upper } => vec![lower, upper],
        }
    }
}

/// Exact moments of a hitting time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingMoments {
    pub mean: f64,
    /// Second moment; `None` for two-sided queries, which have no closed
    /// form (the oracle covers them at small sizes).
    pub second_moment: Option<f64>,
}

impl HittingMoments {
    pub fn variance(&self) -> Option<f64> {
        self.second_moment.map(|m2| (m2 - self.mean * self.mean).max(0.0))
    }
}

/// Exact moments for an arbitrary hitting query.
pub fn hitting_moments(
    spec: &ChainSpec,
    measure: &InvariantMeasure,
    query: &HittingQuery,
) -> Result<HittingMoments> {
    query.validate(spec)?;
    let j = query.source;
    match query.target {
        Target::One(n) if n == j => Ok(HittingMoments { mean: 0.0, second_moment: Some(0.0) }),
        Target::One(n) if n < j => Ok(HittingMoments {
            mean: mean_hit_down(spec, measure, j, n)?,
            second_moment: Some(second_moment_down(spec, measure, j, n)?),
        }),
        Target::One(n) => Ok(HittingMoments {
            mean: mean_hit_up(spec, measure, j, n)?,
            second_moment: Some(second_moment_up(spec, measure, j, n)?),
        }),
        Target::Two { lower, upper } => Ok(HittingMoments {
            mean: mean_hit_two_sided(spec, measure, j, lower, upper)?,
            second_moment: None,
        }),
    }
}
