//! Half-well/full-well comparison identities.
//!
//! A full well and its half-well versions share hitting laws for descents
//! (the trajectories never cross 0), and climbs decompose into a half-well
//! climb plus excursions into the other half. The identities checked here
//! are exact; the two-sided exit mean is additionally bracketed whenever the
//! fall/climb ratio `C_a` leaves the bracket non-vacuous.

use super::moments::{fall_moments, mean_hit_down, mean_hit_two_sided, mean_hit_up, Side};
use crate::chain::ChainSpec;
use crate::error::Error;
use crate::measure::invariant_measure;
use crate::numerics::rel_err;
use crate::Result;
use serde::{Deserialize, Serialize};

/// One verified identity: both sides and their relative gap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let e = rel_err(lhs, rhs);
        IdentityCheck { name: name.to_string(), lhs, rhs, rel_err: e, pass: e <= tol }
    }
}

/// Bracket for the two-sided exit mean (only asserted when `C_a < 1/2`;
/// the lower bound is vacuous otherwise).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoSidedBounds {
    pub c_a: f64,
    pub applicable: bool,
    pub lower: Option<f64>,
    pub upper: f64,
    pub two_sided_mean: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub checks: Vec<IdentityCheck>,
    pub bounds: TwoSidedBounds,
    /// Strictness of the climb comparison: full-well climbs strictly exceed
    /// half-well climbs when the other half carries mass.
    pub climb_strictly_larger: bool,
    pub all_pass: bool,
}

const TOL: f64 = 1e-10;

/// Verify the fall/climb comparison identities between a full well and its
/// half-well versions.
pub fn comparison_checks(spec: &ChainSpec) -> Result<ComparisonReport> {
    if spec.b() >= 0 {
        return Err(Error::domain("comparison_checks requires a full well (b < 0 < a)".to_string()));
    }
    let (b, a) = (spec.b(), spec.a());
    let m = invariant_measure(spec)?;
    let (left, right) = spec.half_well_versions()?;
    let ml = invariant_measure(&left)?;
    let mr = invariant_measure(&right)?;

    let (fall_r, var_r) = fall_moments(spec, &m, Side::Right)?;
    let (fall_r_half, var_r_half) = fall_moments(&right, &mr, Side::Right)?;
    let (fall_l, var_l) = fall_moments(spec, &m, Side::Left)?;
    let (fall_l_half, var_l_half) = fall_moments(&left, &ml, Side::Left)?;

    let climb_r = mean_hit_up(spec, &m, 0, a)?;
    let climb_r_half = mean_hit_up(&right, &mr, 0, a)?;
    let climb_l = mean_hit_down(spec, &m, 0, b)?;
    let climb_l_half = mean_hit_down(&left, &ml, 0, b)?;

    let mut checks = vec![
        IdentityCheck::new("fall_mean_right", fall_r, fall_r_half, TOL),
        IdentityCheck::new(
            "fall_normalized_variance_right",
            var_r / (fall_r * fall_r),
            var_r_half / (fall_r_half * fall_r_half),
            TOL,
        ),
        IdentityCheck::new("fall_mean_left", fall_l, fall_l_half, TOL),
        IdentityCheck::new(
            "fall_normalized_variance_left",
            var_l / (fall_l * fall_l),
            var_l_half / (fall_l_half * fall_l_half),
            TOL,
        ),
        IdentityCheck::new(
            "climb_mean_right",
            climb_r,
            (m.prefix(-1) * fall_r_half + climb_r_half) / m.suffix(0),
            TOL,
        ),
        IdentityCheck::new(
            "climb_mean_left",
            climb_l,
            (m.suffix(1) * fall_l_half + climb_l_half) / m.prefix(0),
            TOL,
        ),
    ];

    let two_sided = mean_hit_two_sided(spec, &m, 0, b, a)?;
    let c_a = (fall_r / climb_r).max(fall_l / climb_l);
    let min_climb = climb_r.min(climb_l);
    let applicable = c_a < 0.5;
    let lower = applicable.then(|| 0.5 * (1.0 - 2.0 * c_a) * min_climb);
    let upper_ok = two_sided <= min_climb * (1.0 + TOL);
    let lower_ok = lower.map_or(true, |lo| two_sided >= lo * (1.0 - TOL));
    let bounds = TwoSidedBounds {
        c_a,
        applicable,
        lower,
        upper: min_climb,
        two_sided_mean: two_sided,
        pass: upper_ok && lower_ok,
    };

    let climb_strictly_larger = climb_r > climb_r_half && climb_l > climb_l_half;
    checks.push(IdentityCheck {
        name: "climb_exceeds_half_well".to_string(),
        lhs: climb_r,
        rhs: climb_r_half,
        rel_err: 0.0,
        pass: climb_strictly_larger,
    });

    let all_pass = checks.iter().all(|c| c.pass) && bounds.pass;
    Ok(ComparisonReport { checks, bounds, climb_strictly_larger, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn ehrenfest_identities() {
        let report = comparison_checks(&zoo::ehrenfest(6).unwrap()).unwrap();
        assert!(report.all_pass, "{:#?}", report);
        assert!(report.climb_strictly_larger);
    }

    #[test]
    fn asymmetric_well_identities() {
        let spec = zoo::simple_rw(0.15, 0.35, 0.3, 0.1, -5, 9).unwrap();
        let report = comparison_checks(&spec).unwrap();
        assert!(report.all_pass, "{:#?}", report);
        assert!(report.bounds.applicable);
    }

    #[test]
    fn random_wells_pass_identities() {
        let mut rng = crate::mc::derive_rng(2024, 3, 0);
        for _ in 0..10 {
            let spec = zoo::random_spec(&mut rng, -6, 8);
            let report = comparison_checks(&spec).unwrap();
            assert!(report.checks.iter().all(|c| c.pass), "{:#?}", report);
        }
    }

    #[test]
    fn rejects_half_well() {
        assert!(comparison_checks(&zoo::half_well(0.2, 0.4, 5).unwrap()).is_err());
    }
}
