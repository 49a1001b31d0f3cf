//! Statistical verdicts: cut-off profiles, the normalized-variance
//! criterion, exponential escape tests, two-time-scale reports, and the
//! uphill/downhill reversal test.
//!
//! Kolmogorov–Smirnov distances against Exp(1) use the exact survival
//! `e^{-t}` and the empirical (or exact discrete) CDF evaluated at its
//! atoms, with no binning. Trend verdicts are finite-sample statements:
//! strict decrease across the last three sweep points plus a configurable
//! ceiling on the final value.

use crate::chain::ChainSpec;
use crate::error::Error;
use crate::exact;
use crate::measure::InvariantMeasure;
use crate::mc::{SampleKind, SampleSet};
use crate::oracle::{oracle_second_moment, ExactLaw, OracleBudget};
use crate::zoo::ChainFamily;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Input to a distribution-level diagnostic: an exactly computed law or a
/// Monte Carlo sample.
#[derive(Debug, Clone, Copy)]
pub enum LawSource<'a> {
    Exact(&'a ExactLaw),
    Samples(&'a [u64]),
}

/// Survival probabilities `P(U > c E[U])` over a grid of ratios `c`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub c: Vec<f64>,
    pub prob: Vec<f64>,
    pub source: String,
}

/// Evaluate the cut-off profile of a law with the given (true) mean.
///
/// Exact laws are interpolated linearly between integer steps; samples use
/// the empirical survival function.
pub fn cutoff_profile(source: LawSource, mean: f64, c_grid: &[f64]) -> Result<CutoffProfile> {
    if !(mean > 0.0) {
        return Err(Error::domain(format!("mean must be positive, got {mean}")));
    }
    if c_grid.windows(2).any(|w| w[0] > w[1]) || c_grid.iter().any(|&c| c < 0.0) {
        return Err(Error::domain("c grid must be sorted and nonnegative".to_string()));
    }
    let prob: Vec<f64> = match source {
        LawSource::Exact(law) => {
            let survival = law.survival();
            c_grid
                .iter()
                .map(|&c| {
                    let s = c * mean;
                    let lo = s.floor() as usize;
                    let w = s - s.floor();
                    let at = |t: usize| -> f64 {
                        if t < survival.len() {
                            survival[t]
                        } else {
                            law.tail_mass
                        }
                    };
                    (1.0 - w) * at(lo) + w * at(lo + 1)
                })
                .collect()
        }
        LawSource::Samples(values) => {
            if values.is_empty() {
                return Err(Error::domain("empty sample set".to_string()));
            }
            let mut sorted = values.to_vec();
            sorted.sort_unstable();
            let n = sorted.len() as f64;
            c_grid
                .iter()
                .map(|&c| {
                    let s = c * mean;
                    let idx = sorted.partition_point(|&v| (v as f64) <= s);
                    (sorted.len() - idx) as f64 / n
                })
                .collect()
        }
    };
    let source = match source {
        LawSource::Exact(_) => "exact-law".to_string(),
        LawSource::Samples(_) => "empirical".to_string(),
    };
    Ok(CutoffProfile { c: c_grid.to_vec(), prob, source })
}

/// KS distance between the law of `T / mean` and Exp(1), for an exactly
/// computed discrete law. The law's tail mass must be negligible at the
/// distances of interest; it is folded into the result as a floor.
pub fn ks_exp_law(law: &ExactLaw, mean: f64) -> f64 {
    let mut d: f64 = 0.0;
    let mut cdf = 0.0;
    for (t, &p) in law.pmf.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let g = 1.0 - (-(t as f64) / mean).exp();
        d = d.max((cdf - g).abs());
        cdf += p;
        d = d.max((cdf - g).abs());
    }
    d.max(law.tail_mass)
}

/// KS distance between the empirical law of `values / mean` and Exp(1).
pub fn ks_exp_samples(values: &[u64], mean: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0usize;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let g = 1.0 - (-(v as f64) / mean).exp();
        d = d.max((i as f64 / n - g).abs());
        d = d.max((j as f64 / n - g).abs());
        i = j;
    }
    d
}

/// Two-sample KS distance between integer samples.
pub fn two_sample_ks(xs: &[u64], ys: &[u64]) -> f64 {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Result of an exponential-law escape test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EscapeTest {
    pub ks_distance: f64,
    /// Sample size, when the input was empirical.
    pub n: Option<usize>,
    pub threshold: f64,
    pub accepted: bool,
}

/// Asymptotic one-sample KS critical value at level `alpha`.
pub fn ks_one_sample_threshold(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Asymptotic two-sample KS critical value at level `alpha`.
pub fn ks_two_sample_threshold(n: usize, m: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / 2.0).sqrt() * (((n + m) as f64) / ((n * m) as f64)).sqrt()
}

/// Test `V / mean` against Exp(1).
///
/// `mean` should be the exact expectation whenever one is available; the
/// caller records which normalization was used. The default threshold is
/// the 1% one-sample KS critical value for samples and a configured bound
/// for exact laws.
pub fn escape_test(source: LawSource, mean: f64, threshold: Option<f64>) -> Result<EscapeTest> {
    if !(mean > 0.0) {
        return Err(Error::domain(format!("mean must be positive, got {mean}")));
    }
    match source {
        LawSource::Exact(law) => {
            if law.pmf.is_empty() {
                return Err(Error::domain("empty law".to_string()));
            }
            let d = ks_exp_law(law, mean);
            let thr = threshold.unwrap_or(0.05);
            Ok(EscapeTest { ks_distance: d, n: None, threshold: thr, accepted: d <= thr })
        }
        LawSource::Samples(values) => {
            if values.is_empty() {
                return Err(Error::domain("empty sample set".to_string()));
            }
            let d = ks_exp_samples(values, mean);
            let thr = threshold.unwrap_or_else(|| ks_one_sample_threshold(values.len(), 0.01));
            Ok(EscapeTest { ks_distance: d, n: Some(values.len()), threshold: thr, accepted: d <= thr })
        }
    }
}

/// One row of the normalized-variance (cut-off sufficient condition) sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceRow {
    pub a: i64,
    /// `Var(T_{a->0}) / E[T_{a->0}]^2`
    pub nv_right: f64,
    /// `Var(T_{b->0}) / E[T_{b->0}]^2`
    pub nv_left: Option<f64>,
}

/// Exact normalized variances of the edge falls along a family sweep.
pub fn variance_criterion_sweep(family: &ChainFamily, a_list: &[i64]) -> Result<Vec<VarianceRow>> {
    a_list
        .iter()
        .map(|&a| {
            let spec = family.spec(a)?;
            let m = crate::measure::invariant_measure(&spec)?;
            let (mean_r, var_r) = exact::fall_moments(&spec, &m, exact::Side::Right)?;
            let nv_left = if spec.b() < 0 {
                let (mean_l, var_l) = exact::fall_moments(&spec, &m, exact::Side::Left)?;
                Some(var_l / (mean_l * mean_l))
            } else {
                None
            };
            Ok(VarianceRow { a, nv_right: var_r / (mean_r * mean_r), nv_left })
        })
        .collect()
}

/// Log-log slope of `nv_right` against `a`.
pub fn variance_sweep_slope(rows: &[VarianceRow]) -> Option<f64> {
    crate::numerics::loglog_slope(
        &rows.iter().map(|r| (r.a as f64, r.nv_right)).collect::<Vec<_>>(),
    )
}

pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Finite-sample "tends to zero" verdict: strict decrease across the last
/// three points and a final value below `final_max`.
pub fn trend_to_zero(values: &[f64], final_max: f64) -> bool {
    if values.len() < 3 {
        return false;
    }
    let tail = &values[values.len() - 3..];
    strictly_decreasing(tail) && *values.last().unwrap() <= final_max
}

/// High region for the two-time-scale report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HighSet {
    RightEdge,
    LeftEdge,
    BothEdges,
}

/// Two-time-scale diagnostics for escapes from the origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoScaleReport {
    /// `sup_x E[T_{x->0}] / E[T_{0->H}]`
    pub ratio_sup: f64,
    /// `E[S^2]` for `S = T_{0->H}/E[T_{0->H}]`; `None` when no exact route
    /// exists (two-sided climbs beyond the oracle budget).
    pub m2_ratio: Option<f64>,
    /// `E[T_{0->H}]`
    pub climb_mean: f64,
}

pub fn two_scale_report(
    spec: &ChainSpec,
    m: &InvariantMeasure,
    high: HighSet,
) -> Result<TwoScaleReport> {
    let (b, a) = (spec.b(), spec.a());
    if high != HighSet::RightEdge && b == 0 {
        return Err(Error::domain("left/two-sided high set needs a full well".to_string()));
    }
    // falls to the origin are monotone in the start, so the sup over all x
    // is attained at an edge
    let (fall_r, _) = exact::fall_moments(spec, m, exact::Side::Right)?;
    let sup_fall = if b < 0 {
        let (fall_l, _) = exact::fall_moments(spec, m, exact::Side::Left)?;
        fall_r.max(fall_l)
    } else {
        fall_r
    };
    let (climb_mean, m2) = match high {
        HighSet::RightEdge => {
            let mean = exact::mean_hit_up(spec, m, 0, a)?;
            let m2 = exact::second_moment_up(spec, m, 0, a)?;
            (mean, Some(m2))
        }
        HighSet::LeftEdge => {
            let mean = exact::mean_hit_down(spec, m, 0, b)?;
            let m2 = exact::second_moment_down(spec, m, 0, b)?;
            (mean, Some(m2))
        }
        HighSet::BothEdges => {
            let mean = exact::mean_hit_two_sided(spec, m, 0, b, a)?;
            let budget = OracleBudget::default();
            let m2 = oracle_second_moment(spec, 0, &[b, a], &budget).ok();
            (mean, m2)
        }
    };
    Ok(TwoScaleReport {
        ratio_sup: sup_fall / climb_mean,
        m2_ratio: m2.map(|v| v / (climb_mean * climb_mean)),
        climb_mean,
    })
}

/// Verdict of the uphill/downhill reversal comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReversalVerdict {
    pub n_forward: usize,
    pub n_backward: usize,
    pub ks_distance: f64,
    pub threshold: f64,
    pub rejected: bool,
    /// Difference of sample means in standard-error units.
    pub mean_diff_se: f64,
}

/// Two-sample KS comparison of the `T̃` components of two last-exit sample
/// sets at significance level `alpha`.
pub fn reversal_test(xy: &SampleSet, yx: &SampleSet, alpha: f64) -> Result<ReversalVerdict> {
    if xy.kind != SampleKind::LastExit || yx.kind != SampleKind::LastExit {
        return Err(Error::domain("reversal test needs last-exit sample sets".to_string()));
    }
    let tx = xy.ttilde().expect("last-exit sets carry companions");
    let ty = yx.ttilde().expect("last-exit sets carry companions");
    let d = two_sample_ks(&tx, &ty);
    let threshold = ks_two_sample_threshold(tx.len(), ty.len(), alpha);
    let mean = |v: &[u64]| v.iter().map(|&x| x as f64).sum::<f64>() / v.len() as f64;
    let var = |v: &[u64], mu: f64| {
        v.iter().map(|&x| (x as f64 - mu).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    };
    let (mx, my) = (mean(&tx), mean(&ty));
    let se = (var(&tx, mx) / tx.len() as f64 + var(&ty, my) / ty.len() as f64).sqrt();
    Ok(ReversalVerdict {
        n_forward: tx.len(),
        n_backward: ty.len(),
        ks_distance: d,
        threshold,
        rejected: d > threshold,
        mean_diff_se: if se > 0.0 { (mx - my) / se } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{sample_hit, sample_last_exit, RngPolicy, SampleOptions};
    use crate::measure::invariant_measure;
    use crate::oracle::oracle_law;
    use crate::zoo;

    #[test]
    fn profile_of_degenerate_law_is_unit_step() {
        // point mass at 10
        let mut pmf = vec![0.0; 11];
        pmf[10] = 1.0;
        let law = ExactLaw { pmf, tail_mass: 0.0 };
        let grid = [0.0, 0.5, 0.9, 1.1, 2.0];
        let p = cutoff_profile(LawSource::Exact(&law), 10.0, &grid).unwrap();
        assert_eq!(&p.prob[..3], &[1.0, 1.0, 1.0]);
        assert_eq!(&p.prob[3..], &[0.0, 0.0]);
    }

    #[test]
    fn profile_of_exponential_samples_tracks_exp_survival() {
        // geometric with small q is exponential on the relevant scale
        let spec = ChainSpec::new(0, 1, vec![0.5], vec![0.01]).unwrap();
        let set = sample_hit(&spec, 1, 0, 200_000, &RngPolicy::new(31, 0), &SampleOptions::default())
            .unwrap();
        let grid: Vec<f64> = (0..=12).map(|i| i as f64 * 0.25).collect();
        let p = cutoff_profile(LawSource::Samples(&set.values), 100.0, &grid).unwrap();
        for (c, pr) in p.c.iter().zip(&p.prob) {
            assert!((pr - (-c).exp()).abs() < 0.01, "c={c}: {pr}");
        }
        assert!(p.prob.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn profile_rejects_bad_inputs() {
        let law = ExactLaw { pmf: vec![1.0], tail_mass: 0.0 };
        assert!(cutoff_profile(LawSource::Exact(&law), 0.0, &[0.5]).is_err());
        assert!(cutoff_profile(LawSource::Exact(&law), 1.0, &[0.5, 0.2]).is_err());
        assert!(cutoff_profile(LawSource::Samples(&[]), 1.0, &[0.5]).is_err());
    }

    #[test]
    fn ks_calibration_on_synthetic_exponential() {
        // Exp(1) * mean samples drawn directly; the KS machinery itself is
        // under test, at the 1% critical distance.
        use rand::Rng;
        let mut rng = crate::mc::derive_rng(77, 0, 0);
        let mean = 1000.0;
        let n = 100_000;
        let values: Vec<u64> =
            (0..n).map(|_| (-rng.gen::<f64>().ln() * mean).round() as u64).collect();
        let t = escape_test(LawSource::Samples(&values), mean, None).unwrap();
        // discretization adds ~1/(2 mean) on top of sampling noise
        assert!(t.ks_distance <= t.threshold + 0.5 / mean, "{t:?}");
        assert!((t.threshold - 1.6276 / (n as f64).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn geometric_laws_approach_exponential_as_q_shrinks() {
        let mut last = f64::INFINITY;
        for q in [0.2, 0.02, 0.002] {
            let spec = ChainSpec::new(0, 1, vec![0.5], vec![q]).unwrap();
            let m = invariant_measure(&spec).unwrap();
            let mean = exact::mean_hit_down(&spec, &m, 1, 0).unwrap();
            let budget = crate::oracle::OracleBudget::default().with_steps(20_000_000);
            let law = oracle_law(&spec, 1, &[0], Some((25.0 * mean) as usize), &budget).unwrap();
            let d = ks_exp_law(&law, mean);
            assert!(d < last, "q={q}: {d} !< {last}");
            last = d;
        }
        assert!(last < 2e-3);
    }

    #[test]
    fn half_well_law_is_near_exponential_at_a_10() {
        let spec = zoo::half_well(0.2, 0.4, 10).unwrap();
        let m = invariant_measure(&spec).unwrap();
        let mean = exact::mean_hit_up(&spec, &m, 0, 10).unwrap();
        let budget = crate::oracle::OracleBudget::default().with_steps(2_000_000);
        let law = oracle_law(&spec, 0, &[10], Some((25.0 * mean) as usize), &budget).unwrap();
        let d = ks_exp_law(&law, mean);
        assert!(d < 0.05, "KS {d}");
    }

    #[test]
    fn variance_sweep_slopes() {
        let rows = variance_criterion_sweep(&zoo::ChainFamily::half_well(0.2, 0.4), &[32, 64, 128, 256])
            .unwrap();
        let slope = variance_sweep_slope(&rows).unwrap();
        assert!((slope + 1.0).abs() < 0.1, "slope {slope}");
        assert!(strictly_decreasing(&rows.iter().map(|r| r.nv_right).collect::<Vec<_>>()));

        let rows =
            variance_criterion_sweep(&zoo::ChainFamily::driftless(), &[32, 64, 128, 256]).unwrap();
        let slope = variance_sweep_slope(&rows).unwrap();
        assert!(slope > -0.1, "driftless control must not decay, slope {slope}");
        let vals: Vec<f64> = rows.iter().map(|r| r.nv_right).collect();
        assert!(!trend_to_zero(&vals, 0.1));
    }

    #[test]
    fn two_scale_half_well() {
        let spec = zoo::half_well(0.2, 0.4, 12).unwrap();
        let m = invariant_measure(&spec).unwrap();
        let r = two_scale_report(&spec, &m, HighSet::RightEdge).unwrap();
        assert!(r.ratio_sup < 2e-3, "{}", r.ratio_sup);
        let m2 = r.m2_ratio.unwrap();
        assert!(m2 >= 1.0 && m2 <= 2.0, "{m2}");
    }

    #[test]
    fn two_scale_m2_bound_full_well() {
        // E[S^2] <= 2 + 2 E[T_{b->0}]/E[T_{0->a}]
        let spec = zoo::simple_rw(0.2, 0.4, 0.4, 0.2, -10, 10).unwrap();
        let m = invariant_measure(&spec).unwrap();
        let r = two_scale_report(&spec, &m, HighSet::RightEdge).unwrap();
        let (fall_l, _) = exact::fall_moments(&spec, &m, exact::Side::Left).unwrap();
        let bound = 2.0 + 2.0 * fall_l / r.climb_mean;
        assert!(r.m2_ratio.unwrap() <= bound + 1e-12);
        // symmetric well: two-sided ratio within the comparison bracket of
        // the one-sided one
        let both = two_scale_report(&spec, &m, HighSet::BothEdges).unwrap();
        assert!(both.ratio_sup >= r.ratio_sup);
        assert!(both.ratio_sup <= 2.5 * r.ratio_sup);
    }

    #[test]
    fn reversal_same_seed_is_identical() {
        let spec = zoo::ehrenfest(4).unwrap();
        let s1 = sample_last_exit(&spec, 4, 0, 5_000, &RngPolicy::new(8, 0), &SampleOptions::default())
            .unwrap();
        let s2 = sample_last_exit(&spec, 4, 0, 5_000, &RngPolicy::new(8, 0), &SampleOptions::default())
            .unwrap();
        let v = reversal_test(&s1, &s2, 0.01).unwrap();
        assert_eq!(v.ks_distance, 0.0);
        assert!(!v.rejected);
    }

    #[test]
    fn reversal_negative_control_rejects() {
        // plain T_{0->a} includes the excursions back to 0, so it is
        // stochastically larger than the final excursion T̃.
        let spec = zoo::ehrenfest(6).unwrap();
        let policy = RngPolicy::new(17, 0);
        let fall = sample_last_exit(&spec, 6, 0, 30_000, &policy, &SampleOptions::default()).unwrap();
        let climb =
            sample_last_exit(&spec, 0, 6, 30_000, &policy.substream(1), &SampleOptions::default())
                .unwrap();
        // genuine comparison passes
        let honest = reversal_test(&fall, &climb, 0.01).unwrap();
        assert!(!honest.rejected, "{honest:?}");
        // corrupt one side: compare T̃ against the full hitting time
        let mut corrupted = climb.clone();
        corrupted.companion =
            Some(climb.values.iter().map(|&t| (0, t)).collect::<Vec<_>>());
        let v = reversal_test(&fall, &corrupted, 0.01).unwrap();
        assert!(v.rejected);
        assert!(v.mean_diff_se < -10.0);
    }

    #[test]
    fn reversal_requires_last_exit_kind() {
        let spec = zoo::ehrenfest(3).unwrap();
        let hits =
            sample_hit(&spec, 3, 0, 100, &RngPolicy::new(1, 0), &SampleOptions::default()).unwrap();
        let le = sample_last_exit(&spec, 3, 0, 100, &RngPolicy::new(1, 1), &SampleOptions::default())
            .unwrap();
        assert!(reversal_test(&hits, &le, 0.01).is_err());
    }
}
