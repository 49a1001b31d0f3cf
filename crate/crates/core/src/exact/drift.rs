//! Drift constants, tail exponents, energy profiles, and the strong-drift
//! condition sweep.

use super::moments::{fall_moments, log_mean_hit_down, log_mean_hit_up, Side};
use crate::chain::ChainSpec;
use crate::error::Error;
use crate::measure::InvariantMeasure;
use crate::numerics::log_add_exp;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Drift constants and strong-drift diagnostics of a single chain.
///
/// Right-side quantities are always present; left-side quantities are
/// `None` for half wells (`b = 0`), where every condition involving `b` is
/// vacuous.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftReport {
    /// Infimum of the down-rates on `[1, a]`.
    pub k_q: f64,
    /// Infimum of the up-rates on `[b, -1]`.
    pub k_p: Option<f64>,
    /// `K_a = sup_{x in [0,a]} π([x,a])/π(x)`, equivalently the sup of
    /// `q_x E[T_{x->x-1}]`.
    pub k_right: f64,
    /// Smallest state attaining `k_right`.
    pub k_right_arg: i64,
    /// `K_b = sup_{x in [b,-1]} π([b,x])/π(x)`.
    pub k_left: Option<f64>,
    pub k_left_arg: Option<i64>,
    /// Tail exponent `α_a = -ln(1 - 1/K_a)`.
    pub alpha_right: f64,
    pub alpha_left: Option<f64>,
    /// `1/π(0)`: the closed-form drift constant the Ehrenfest family is
    /// known by (`~ sqrt(π a)`); an upper bound for `k_right` in general.
    pub pi0_inverse: f64,
    /// `Q(x)` for `x in [1, a]`, the range where every `q_c` in the sum is
    /// a genuine down-rate.
    pub q_of_x: Vec<(i64, f64)>,
    /// `sup_x Q(x)` over the same range.
    pub q_sup: f64,
    pub q_sup_arg: i64,
    /// `E[T_{a->0}]`.
    pub mean_fall_right: f64,
    /// `E[T_{b->0}]`.
    pub mean_fall_left: Option<f64>,
    /// `E[T_{0->a}]`, absent when it overflows doubles.
    pub mean_climb_right: Option<f64>,
    pub mean_climb_left: Option<f64>,
    /// `ln E[T_{0->a}]`, always finite.
    pub log_mean_climb_right: f64,
    pub log_mean_climb_left: Option<f64>,
    /// `K_a^2 / E[T_{a->0}]`: the right strong-drift ratio.
    pub sd_ratio_right: f64,
    pub sd_ratio_left: Option<f64>,
    /// `E[T_{b->0}] / E[T_{0->a}]`.
    pub cross_left: Option<f64>,
    /// `E[T_{a->0}] / E[T_{0->b}]`.
    pub cross_right: Option<f64>,
    /// `Q / E[T_{a->0}]` (cut-off sufficient-condition ratio).
    pub q_ratio: f64,
    /// `π([1,a]) Q(1) / E[T_{a->0}]` (escape sufficient-condition ratio).
    pub q1_ratio: f64,
}

fn exp_checked(log_v: f64) -> Option<f64> {
    let v = log_v.exp();
    v.is_finite().then_some(v)
}

/// Compute every drift constant of a valid chain with `b <= 0 < a`.
pub fn drift_report(spec: &ChainSpec, m: &InvariantMeasure) -> Result<DriftReport> {
    let (b, a) = (spec.b(), spec.a());
    if a < 1 {
        return Err(Error::domain("drift report needs a >= 1 (left halves have no right side)".to_string()));
    }
    let full = b < 0;

    let k_q = (1..=a).map(|x| spec.q(x)).fold(f64::INFINITY, f64::min);
    let k_p = full.then(|| (b..0).map(|x| spec.p(x)).fold(f64::INFINITY, f64::min));

    let (mut k_right, mut k_right_arg) = (f64::NEG_INFINITY, 0i64);
    for x in 0..=a {
        let v = m.tail_over_pi(x);
        if v > k_right {
            k_right = v;
            k_right_arg = x;
        }
    }
    let (k_left, k_left_arg) = if full {
        let (mut k, mut arg) = (f64::NEG_INFINITY, b);
        for x in b..0 {
            let v = m.head_over_pi(x);
            if v > k {
                k = v;
                arg = x;
            }
        }
        (Some(k), Some(arg))
    } else {
        (None, None)
    };

    let alpha = |k: f64| -(1.0 - 1.0 / k).ln();
    let alpha_right = alpha(k_right);
    let alpha_left = k_left.map(alpha);

    // Q(x) in one downward sweep: a running log-sum of
    // 2 ln π([c,a]) − ln π(c) − ln q_c, divided by π([x,a]).
    let q_low = 1;
    let mut q_pairs: Vec<(i64, f64)> = Vec::with_capacity(a as usize);
    let mut run = f64::NEG_INFINITY;
    for x in (q_low..=a).rev() {
        run = log_add_exp(run, 2.0 * m.log_suffix(x) - m.log_pi(x) - spec.q(x).ln());
        q_pairs.push((x, (run - m.log_suffix(x)).exp()));
    }
    q_pairs.reverse();
    let (mut q_sup, mut q_sup_arg) = (f64::NEG_INFINITY, q_low);
    for &(x, v) in &q_pairs {
        if v > q_sup {
            q_sup = v;
            q_sup_arg = x;
        }
    }
    let q_at_1 = q_pairs.iter().find(|&&(x, _)| x == 1).map(|&(_, v)| v).unwrap_or(0.0);

    let (mean_fall_right, _) = fall_moments(spec, m, Side::Right)?;
    let mean_fall_left = if full { Some(fall_moments(spec, m, Side::Left)?.0) } else { None };

    let log_climb_right = log_mean_hit_up(spec, m, 0, a)?;
    let log_climb_left = if full { Some(log_mean_hit_down(spec, m, 0, b)?) } else { None };

    let cross_left = match (mean_fall_left, log_climb_right) {
        (Some(fall_l), lcr) => Some((fall_l.ln() - lcr).exp()),
        _ => None,
    };
    let cross_right = log_climb_left.map(|lcl| (mean_fall_right.ln() - lcl).exp());

    Ok(DriftReport {
        k_q,
        k_p,
        k_right,
        k_right_arg,
        k_left,
        k_left_arg,
        alpha_right,
        alpha_left,
        pi0_inverse: (-m.log_pi(0)).exp(),
        q_of_x: q_pairs,
        q_sup,
        q_sup_arg,
        mean_fall_right,
        mean_fall_left,
        mean_climb_right: exp_checked(log_climb_right),
        mean_climb_left: log_climb_left.and_then(exp_checked),
        log_mean_climb_right: log_climb_right,
        log_mean_climb_left: log_climb_left,
        sd_ratio_right: k_right * k_right / mean_fall_right,
        sd_ratio_left: k_left.zip(mean_fall_left).map(|(k, e)| k * k / e),
        cross_left,
        cross_right,
        q_ratio: q_sup / mean_fall_right,
        q1_ratio: m.suffix(1) * q_at_1 / mean_fall_right,
    })
}

/// Energy profile `H(x) − H(0)` with increments
/// `H(x) − H(x−1) = −(1/2) ln(p_{x−1}/q_x)`, so that
/// `π(x)/π(0) = exp(−2 [H(x) − H(0)])` on the whole interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyProfile {
    pub b: i64,
    pub a: i64,
    /// `H(x) − H(0)`, indexed by `x - b`.
    pub h: Vec<f64>,
}

impl EnergyProfile {
    pub fn h(&self, x: i64) -> f64 {
        self.h[(x - self.b) as usize]
    }
}

pub fn energy_profile(spec: &ChainSpec) -> Result<EnergyProfile> {
    let violations = spec.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidSpec(violations));
    }
    let (b, a) = (spec.b(), spec.a());
    let mut h = vec![0.0; spec.len()];
    for x in 1..=a {
        let inc = -0.5 * (spec.p(x - 1) / spec.q(x)).ln();
        h[spec.ix(x)] = h[spec.ix(x - 1)] + inc;
    }
    for x in (b..0).rev() {
        let inc = -0.5 * (spec.p(x) / spec.q(x + 1)).ln();
        h[spec.ix(x)] = h[spec.ix(x + 1)] - inc;
    }
    Ok(EnergyProfile { b, a, h })
}

/// One row of the strong-drift condition sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdSweepRow {
    pub a: i64,
    pub k_right: f64,
    pub k_left: Option<f64>,
    pub sd_ratio_right: f64,
    pub sd_ratio_left: Option<f64>,
    pub cross_left: Option<f64>,
    pub cross_right: Option<f64>,
    pub q_ratio: f64,
    pub q1_ratio: f64,
}

/// Evaluate the strong-drift ratios of a family along `a_list`.
///
/// The table reports finite-size evidence only (values trending to zero);
/// no asymptotic claim is made here.
pub fn sd_condition_sweep(family: &crate::zoo::ChainFamily, a_list: &[i64]) -> Result<Vec<SdSweepRow>> {
    a_list
        .iter()
        .map(|&a| {
            let spec = family.spec(a)?;
            let m = crate::measure::invariant_measure(&spec)?;
            let r = drift_report(&spec, &m)?;
            Ok(SdSweepRow {
                a,
                k_right: r.k_right,
                k_left: r.k_left,
                sd_ratio_right: r.sd_ratio_right,
                sd_ratio_left: r.sd_ratio_left,
                cross_left: r.cross_left,
                cross_right: r.cross_right,
                q_ratio: r.q_ratio,
                q1_ratio: r.q1_ratio,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::invariant_measure;
    use crate::numerics::rel_err;
    use crate::zoo;

    #[test]
    fn simple_rw_drift_constant() {
        // K_a -> q+/(q+ - p+) = 2; at a = 48 the truncation error is ~2^-48.
        let spec = zoo::half_well(0.2, 0.4, 48).unwrap();
        let m = invariant_measure(&spec).unwrap();
        let r = drift_report(&spec, &m).unwrap();
        assert!(rel_err(r.k_right, 2.0) < 1e-12, "{}", r.k_right);
        assert!(r.k_left.is_none() && r.sd_ratio_left.is_none() && r.cross_left.is_none());
        assert!((r.alpha_right - std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn flat_bottom_k_bound() {
        // K_a <= d+ + q+/(q+-p+), K_b <= -d- + p-/(p--q-).
        for (dm, dp, a) in [(-3i64, 5i64, 40i64), (-8, 8, 100), (0, 3, 60)] {
            let spec = zoo::varying_rw(0.2, 0.4, 0.4, 0.2, dm, dp, -a, a).unwrap();
            let m = invariant_measure(&spec).unwrap();
            let r = drift_report(&spec, &m).unwrap();
            let bound_r = dp as f64 + 2.0;
            let bound_l = -dm as f64 + 2.0;
            assert!(r.k_right <= bound_r * (1.0 + 1e-9), "{} vs {bound_r}", r.k_right);
            assert!(r.k_left.unwrap() <= bound_l * (1.0 + 1e-9));
        }
    }

    #[test]
    fn ehrenfest_pi0_inverse_dominates_sup() {
        let spec = zoo::ehrenfest(64).unwrap();
        let m = invariant_measure(&spec).unwrap();
        let r = drift_report(&spec, &m).unwrap();
        assert!(r.pi0_inverse > r.k_right);
        assert!(r.k_right > 1.0);
        // symmetric model: falls coincide, and k_left mirrors the sup taken
        // over [1, a] (the left range in the K definitions excludes 0)
        assert!(rel_err(r.mean_fall_right, r.mean_fall_left.unwrap()) < 1e-12);
        let sup_right_excl0 =
            (1..=spec.a()).map(|x| m.tail_over_pi(x)).fold(f64::NEG_INFINITY, f64::max);
        assert!(rel_err(r.k_left.unwrap(), sup_right_excl0) < 1e-12);
    }

    #[test]
    fn driftless_k_grows_linearly_and_sd_ratio_stalls() {
        for a in [32i64, 64, 128] {
            let spec = zoo::driftless(a).unwrap();
            let m = invariant_measure(&spec).unwrap();
            let r = drift_report(&spec, &m).unwrap();
            // uniform π: K = π([0,a])/π(0) = a + 1
            assert!(rel_err(r.k_right, (a + 1) as f64) < 1e-10);
            assert!(r.sd_ratio_right > 0.9, "sd ratio should not vanish: {}", r.sd_ratio_right);
        }
    }

    #[test]
    fn q_bound_and_tail_bound() {
        for spec in [
            zoo::half_well(0.2, 0.4, 30).unwrap(),
            zoo::ehrenfest(20).unwrap(),
            zoo::simple_rw(0.15, 0.35, 0.3, 0.1, -14, 22).unwrap(),
        ] {
            let m = invariant_measure(&spec).unwrap();
            let r = drift_report(&spec, &m).unwrap();
            // Q <= K^2 / K_q
            assert!(r.q_sup <= r.k_right * r.k_right / r.k_q * (1.0 + 1e-12));
            // π([x,a]) <= exp(-α_a x) on [0, a]
            for x in 0..=spec.a() {
                assert!(m.suffix(x) <= (-r.alpha_right * x as f64).exp() + 1e-12);
            }
            if let (Some(alpha_l), true) = (r.alpha_left, spec.b() < 0) {
                for x in spec.b()..=0 {
                    assert!(m.prefix(x) <= (alpha_l * x as f64).exp() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn energy_profile_slope_and_measure_relation() {
        let spec = zoo::half_well(0.2, 0.4, 24).unwrap();
        let prof = energy_profile(&spec).unwrap();
        let slope = 0.5 * std::f64::consts::LN_2;
        for x in 1..=24 {
            // constant increments on the right: H(x) − H(0) = x (1/2) ln 2
            assert!((prof.h(x) - slope * x as f64).abs() < 1e-12);
        }
        let m = invariant_measure(&spec).unwrap();
        for x in 0..=24 {
            let lhs = m.log_pi(x) - m.log_pi(0);
            assert!((lhs + 2.0 * prof.h(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_profile_tail_bound_form() {
        // decexp transcription: 2[H(x)−H(0)] >= α_a x + ln π(0) on [0,a]
        // (and its mirror), which is the finite-size content of the wall
        // steepness bound.
        for spec in [
            zoo::ehrenfest(24).unwrap(),
            zoo::simple_rw(0.2, 0.4, 0.4, 0.2, -16, 16).unwrap(),
        ] {
            let m = invariant_measure(&spec).unwrap();
            let r = drift_report(&spec, &m).unwrap();
            let prof = energy_profile(&spec).unwrap();
            let lp0 = m.log_pi(0);
            for x in 0..=spec.a() {
                assert!(2.0 * prof.h(x) >= r.alpha_right * x as f64 + lp0 - 1e-9);
            }
            let alpha_l = r.alpha_left.unwrap();
            for x in spec.b()..=0 {
                assert!(2.0 * prof.h(x) >= -alpha_l * x as f64 + lp0 - 1e-9);
            }
        }
    }

    #[test]
    fn half_well_profile_domain() {
        let spec = zoo::half_well(0.3, 0.45, 8).unwrap();
        let prof = energy_profile(&spec).unwrap();
        assert_eq!(prof.b, 0);
        assert_eq!(prof.h.len(), 9);
    }

    #[test]
    fn sweep_rows_trend_for_simple_rw() {
        let fam = crate::zoo::ChainFamily::half_well(0.2, 0.4);
        let rows = sd_condition_sweep(&fam, &[16, 32, 64, 128]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].sd_ratio_right < w[0].sd_ratio_right);
            assert!(w[1].q_ratio < w[0].q_ratio);
        }
    }
}
