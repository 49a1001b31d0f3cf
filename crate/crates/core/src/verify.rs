//! The formula-vs-oracle verification suite.
//!
//! Every closed-form quantity is rechecked against the brute-force oracle on
//! seeded random chains, together with the identity suite (commute relation,
//! two-sided route agreement, variance decomposition, comparison identities,
//! tail and second-moment bounds) and the disambiguation of the two printed
//! variants of the per-step second-moment formula and of the `Q` bound.

use crate::chain::ChainSpec;
use crate::error::Error;
use crate::exact;
use crate::measure::{invariant_measure, InvariantMeasure};
use crate::numerics::{log_add_exp, rel_err};
use crate::oracle::{self, OracleBudget};
use crate::zoo;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Outcome of one named check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub worst_rel_err: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    fn new(name: &str, worst: f64, tol: f64) -> Self {
        CheckResult { name: name.to_string(), worst_rel_err: worst, tol, pass: worst <= tol, detail: None }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }
}

/// Full verification report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub chains: usize,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

/// Which side of a printed-formula ambiguity the oracle supports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantFinding {
    pub name: String,
    pub adopted: String,
    pub adopted_worst_rel_err: f64,
    pub rejected: String,
    pub rejected_worst_rel_err: f64,
    pub decisive: bool,
}

/// Stationary law by power iteration of the half-lazy kernel `(I + P)/2`
/// (same fixed point, aperiodic even for hold-free chains like the
/// Ehrenfest urn). Independent of the detailed-balance construction.
pub fn stationary_by_power_iteration(spec: &ChainSpec, tol: f64) -> Result<Vec<f64>> {
    let n = spec.len();
    let mut v = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..5_000_000 {
        for item in next.iter_mut() {
            *item = 0.0;
        }
        for (i, x) in (spec.b()..=spec.a()).enumerate() {
            let stay = 0.5 + 0.5 * spec.r(x);
            next[i] += v[i] * stay;
            if x < spec.a() {
                next[i + 1] += v[i] * 0.5 * spec.p(x);
            }
            if x > spec.b() {
                next[i - 1] += v[i] * 0.5 * spec.q(x);
            }
        }
        let delta = v.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if delta < tol {
            let total: f64 = v.iter().sum();
            for item in v.iter_mut() {
                *item /= total;
            }
            return Ok(v);
        }
    }
    Err(Error::Numerical("power iteration did not converge".into()))
}

/// The printed per-step second-moment variant with the frozen tail mass
/// `π([x,a])^2` (instead of the summation variable `c`); kept only so the
/// verification can demonstrate which variant the oracle supports.
fn step_second_moment_frozen_tail(spec: &ChainSpec, m: &InvariantMeasure, x: i64) -> f64 {
    let mut run = f64::NEG_INFINITY;
    for c in x..=spec.a() {
        run = log_add_exp(run, 2.0 * m.log_suffix(x) - m.log_pi(c) - spec.q(c).ln());
    }
    let m1 = m.tail_over_pi(x) / spec.q(x);
    2.0 * (run - m.log_pi(x)).exp() / spec.q(x) - m1
}

fn step_second_moment_adopted(spec: &ChainSpec, m: &InvariantMeasure, x: i64) -> Result<f64> {
    let m1 = m.tail_over_pi(x) / spec.q(x);
    let var = exact::step_variance(spec, m, x)?;
    Ok(var + m1 * m1)
}

fn random_full_well(rng: &mut rand_chacha::ChaCha8Rng, max_span: i64) -> ChainSpec {
    use rand::Rng;
    let a = rng.gen_range(1..=max_span - 1);
    let b = -rng.gen_range(1..=(max_span - a).max(1));
    zoo::random_spec(rng, b, a)
}

/// Disambiguate the per-step second-moment formula against the oracle.
pub fn rl74_disambiguation(seed: u64) -> Result<VariantFinding> {
    let mut rng = crate::mc::derive_rng(seed, 740, 0);
    let budget = OracleBudget::default();
    let (mut worst_adopted, mut worst_frozen) = (0.0f64, 0.0f64);
    for _ in 0..40 {
        use rand::Rng;
        let spec = random_full_well(&mut rng, 14);
        let m = invariant_measure(&spec)?;
        let x = rng.gen_range(spec.b() + 1..=spec.a());
        let reference = oracle::oracle_second_moment(&spec, x, &[x - 1], &budget)?;
        worst_adopted = worst_adopted.max(rel_err(step_second_moment_adopted(&spec, &m, x)?, reference));
        worst_frozen = worst_frozen.max(rel_err(step_second_moment_frozen_tail(&spec, &m, x), reference));
    }
    Ok(VariantFinding {
        name: "rl74".to_string(),
        adopted: "tail mass squared at the summation variable: π([c,a])^2".to_string(),
        adopted_worst_rel_err: worst_adopted,
        rejected: "tail mass squared frozen at the start state: π([x,a])^2".to_string(),
        rejected_worst_rel_err: worst_frozen,
        decisive: worst_adopted <= 1e-9 && worst_frozen > 1e-3,
    })
}

/// Disambiguate the direction of the `Q` bound against computed values.
pub fn rl81_disambiguation(seed: u64) -> Result<VariantFinding> {
    let mut rng = crate::mc::derive_rng(seed, 810, 0);
    let (mut worst_div, mut worst_mul) = (0.0f64, 0.0f64);
    for _ in 0..40 {
        let spec = random_full_well(&mut rng, 20);
        let m = invariant_measure(&spec)?;
        let r = exact::drift_report(&spec, &m)?;
        let k2 = r.k_right * r.k_right;
        // positive excess means the bound is violated
        worst_div = worst_div.max(r.q_sup / (k2 / r.k_q) - 1.0);
        worst_mul = worst_mul.max(r.q_sup / (k2 * r.k_q) - 1.0);
    }
    Ok(VariantFinding {
        name: "rl81".to_string(),
        adopted: "Q <= K^2 / K_q".to_string(),
        adopted_worst_rel_err: worst_div.max(0.0),
        rejected: "Q <= K^2 * K_q".to_string(),
        rejected_worst_rel_err: worst_mul.max(0.0),
        decisive: worst_div <= 1e-12 && worst_mul > 1e-3,
    })
}

/// Run the whole oracle-vs-formula suite on `chains` seeded random wells.
///
/// `perturb` flips one rate on the formula side of the first mean check, to
/// demonstrate that the suite catches mismatches (the report then fails and
/// names the location).
pub fn run_verification(seed: u64, chains: usize, perturb: bool) -> Result<VerifyReport> {
    use rand::Rng;
    let mut rng = crate::mc::derive_rng(seed, 0xFE11, 0);
    let budget = OracleBudget::default();

    let mut w_pi = 0.0f64;
    let mut w_mean_down = 0.0f64;
    let mut w_mean_up = 0.0f64;
    let mut w_m2_down = 0.0f64;
    let mut w_m2_up = 0.0f64;
    let mut w_two_sided = 0.0f64;
    let mut w_step_var = 0.0f64;
    let mut w_commute = 0.0f64;
    let mut w_var_decomp = 0.0f64;
    let mut w_tail = 0.0f64;
    let mut w_rlgl = 0.0f64;
    let mut w_compare = 0.0f64;
    let mut w_reversal = 0.0f64;
    let mut perturb_detail = None;

    for i in 0..chains {
        let spec = random_full_well(&mut rng, 20);
        let m = invariant_measure(&spec)?;
        let (b, a) = (spec.b(), spec.a());

        // stationary law against power iteration, in total variation
        let power = stationary_by_power_iteration(&spec, 1e-15)?;
        let tv: f64 = 0.5
            * (b..=a)
                .map(|x| (m.pi(x) - power[spec.ix(x)]).abs())
                .sum::<f64>();
        w_pi = w_pi.max(tv);

        let j = rng.gen_range(b + 1..=a);
        let n = rng.gen_range(b..j);

        // one perturbed comparison demonstrates mismatch detection
        let formula_spec = if perturb && i == 0 {
            let p = spec.with_perturbed_rate(j, false, (spec.q(j) * 1.07).min(0.99));
            perturb_detail = Some(format!("perturbed q_{j} by 7% on the formula side"));
            p
        } else {
            spec.clone()
        };
        let formula_m = if perturb && i == 0 { invariant_measure(&formula_spec)? } else { m.clone() };

        w_mean_down = w_mean_down.max(rel_err(
            exact::mean_hit_down(&formula_spec, &formula_m, j, n)?,
            oracle::oracle_mean(&spec, j, &[n], &budget)?,
        ));
        w_mean_up = w_mean_up.max(rel_err(
            exact::mean_hit_up(&spec, &m, n, j)?,
            oracle::oracle_mean(&spec, n, &[j], &budget)?,
        ));
        w_m2_down = w_m2_down.max(rel_err(
            exact::second_moment_down(&spec, &m, j, n)?,
            oracle::oracle_second_moment(&spec, j, &[n], &budget)?,
        ));
        w_m2_up = w_m2_up.max(rel_err(
            exact::second_moment_up(&spec, &m, n, j)?,
            oracle::oracle_second_moment(&spec, n, &[j], &budget)?,
        ));

        if b < 0 {
            let src = 0;
            w_two_sided = w_two_sided.max(rel_err(
                exact::mean_hit_two_sided(&spec, &m, src, b, a)?,
                oracle::oracle_mean(&spec, src, &[b, a], &budget)?,
            ));
        }

        let x = rng.gen_range(b + 1..=a);
        let oracle_var = oracle::oracle_second_moment(&spec, x, &[x - 1], &budget)?
            - oracle::oracle_mean(&spec, x, &[x - 1], &budget)?.powi(2);
        w_step_var = w_step_var.max(rel_err(
            exact::step_variance(&spec, &m, x)?,
            oracle_var.max(0.0),
        ));

        // identity suite
        let (lo, hi) = (n, j);
        let rhs = exact::commute_identity(&spec, &m, lo, hi)?;
        let sum = exact::mean_hit_up(&spec, &m, lo, hi)? + exact::mean_hit_down(&spec, &m, hi, lo)?;
        w_commute = w_commute.max(rel_err(rhs, sum));

        let (fall_mean, fall_var) = exact::fall_moments(&spec, &m, exact::Side::Right)?;
        let m2_full = exact::second_moment_down(&spec, &m, a, 0)?;
        w_var_decomp = w_var_decomp.max(rel_err(fall_var, m2_full - fall_mean * fall_mean));

        let report = exact::drift_report(&spec, &m)?;
        for x in 0..=a {
            w_tail = w_tail.max(m.suffix(x) - (-report.alpha_right * x as f64).exp());
        }

        // E[T^2] <= 2 E[T]^2 + 2 E[T_{b->j}] E[T] − E[T]
        let jj = rng.gen_range(b..a);
        let nn = rng.gen_range(jj + 1..=a);
        let t = exact::mean_hit_up(&spec, &m, jj, nn)?;
        let t2 = exact::second_moment_up(&spec, &m, jj, nn)?;
        let tb = exact::mean_hit_up(&spec, &m, b, jj)?;
        let bound = 2.0 * t * t + 2.0 * tb * t - t;
        w_rlgl = w_rlgl.max((t2 - bound) / bound.abs().max(1.0));

        if b < 0 {
            let rep = exact::comparison_checks(&spec)?;
            for c in &rep.checks {
                if c.name != "climb_exceeds_half_well" {
                    w_compare = w_compare.max(c.rel_err);
                }
            }
        }

        // reversal: the exact excursion law is direction-symmetric
        if i < 6 {
            let x = rng.gen_range(b..a);
            let y = rng.gen_range(x + 1..=a);
            let fwd = oracle::oracle_last_exit_law(&spec, x, y, Some(400), &budget)?;
            let rev = oracle::oracle_last_exit_law(&spec, y, x, Some(400), &budget)?;
            for t in 0..fwd.pmf.len().max(rev.pmf.len()) {
                let pf = fwd.pmf.get(t).copied().unwrap_or(0.0);
                let pr = rev.pmf.get(t).copied().unwrap_or(0.0);
                w_reversal = w_reversal.max((pf - pr).abs());
            }
        }
    }

    let mut checks = vec![
        CheckResult::new("stationary_vs_power_iteration_tv", w_pi, 1e-9),
        {
            let mut c = CheckResult::new("mean_fall_vs_oracle", w_mean_down, 1e-10);
            if let Some(d) = perturb_detail {
                c = c.with_detail(d);
            }
            c
        },
        CheckResult::new("mean_climb_vs_oracle", w_mean_up, 1e-10),
        CheckResult::new("second_moment_fall_vs_oracle", w_m2_down, 1e-9),
        CheckResult::new("second_moment_climb_vs_oracle", w_m2_up, 1e-9),
        CheckResult::new("two_sided_mean_vs_oracle", w_two_sided, 1e-10),
        CheckResult::new("step_variance_vs_oracle", w_step_var, 1e-9),
        CheckResult::new("commute_identity", w_commute, 1e-10),
        CheckResult::new("variance_decomposition", w_var_decomp, 1e-9),
        CheckResult::new("tail_bound_excess", w_tail, 1e-12),
        CheckResult::new("second_moment_bound_excess", w_rlgl.max(0.0), 1e-10),
        CheckResult::new("half_full_comparisons", w_compare, 1e-10),
        CheckResult::new("excursion_reversal_pointwise", w_reversal, 1e-10),
    ];

    let rl74 = rl74_disambiguation(seed)?;
    checks.push(
        CheckResult::new("rl74_adopted_variant_vs_oracle", rl74.adopted_worst_rel_err, 1e-9)
            .with_detail(format!(
                "adopted {}; rejected {} (worst rel err {:.3e})",
                rl74.adopted, rl74.rejected, rl74.rejected_worst_rel_err
            )),
    );
    let rl81 = rl81_disambiguation(seed)?;
    checks.push(
        CheckResult::new("rl81_bound_direction", rl81.adopted_worst_rel_err, 1e-12).with_detail(
            format!(
                "holds as {}; printed {} violated by up to {:.3e}",
                rl81.adopted, rl81.rejected, rl81.rejected_worst_rel_err
            ),
        ),
    );

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { seed, chains, checks, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_default_seed() {
        let report = run_verification(1234, 12, false).unwrap();
        assert!(report.all_pass, "{report:#?}");
    }

    #[test]
    fn perturbation_is_caught_with_location() {
        let report = run_verification(1234, 4, true).unwrap();
        assert!(!report.all_pass);
        let failed = report.checks.iter().find(|c| !c.pass).unwrap();
        assert_eq!(failed.name, "mean_fall_vs_oracle");
        assert!(failed.detail.as_ref().unwrap().contains("perturbed q_"));
    }

    #[test]
    fn variant_findings_are_decisive() {
        let rl74 = rl74_disambiguation(7).unwrap();
        assert!(rl74.decisive, "{rl74:?}");
        let rl81 = rl81_disambiguation(7).unwrap();
        assert!(rl81.decisive, "{rl81:?}");
    }
}
