//! First and second hitting-time moments.
//!
//! Downhill sums run over tail-mass ratios `π([k,a]) / (q_k π(k))`, uphill
//! sums over head-mass ratios `π([b,k]) / (p_k π(k))`. Ratios are routed
//! through logs when the linear masses are out of range, so the formulas
//! stay usable for wells deep enough that `π` underflows doubles. Inner
//! sums of the second-moment formulas are carried as running log-space
//! suffix/prefix accumulators, giving `O(a)` work per query.

use crate::chain::ChainSpec;
use crate::error::Error;
use crate::measure::InvariantMeasure;
use crate::numerics::{log_add_exp, rel_err, Kahan};
use crate::Result;

fn check_state(spec: &ChainSpec, x: i64, what: &str) -> Result<()> {
    if spec.contains(x) {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} {x} outside [{}, {}]", spec.b(), spec.a())))
    }
}

/// Mean one-step fall `E[T_{k -> k-1}] = π([k,a]) / (q_k π(k))`.
fn step_down_mean(spec: &ChainSpec, m: &InvariantMeasure, k: i64) -> f64 {
    m.tail_over_pi(k) / spec.q(k)
}

/// Mean one-step climb `E[T_{k -> k+1}] = π([b,k]) / (p_k π(k))`.
fn step_up_mean(spec: &ChainSpec, m: &InvariantMeasure, k: i64) -> f64 {
    m.head_over_pi(k) / spec.p(k)
}

/// `E[T_{j -> n}]` for `n <= j` (descent toward the well bottom).
pub fn mean_hit_down(spec: &ChainSpec, m: &InvariantMeasure, j: i64, n: i64) -> Result<f64> {
    check_state(spec, j, "source")?;
    check_state(spec, n, "target")?;
    if n > j {
        return Err(Error::domain(format!("mean_hit_down needs n <= j, got j={j}, n={n}")));
    }
    let mut sum = Kahan::new();
    for k in n + 1..=j {
        sum.add(step_down_mean(spec, m, k));
    }
    Ok(sum.value())
}

/// `E[T_{j -> n}]` for `j <= n` (climb against the drift).
///
/// Overflows to `inf` once the well is deep enough that the mean exceeds
/// doubles; [`log_mean_hit_up`] stays finite there.
pub fn mean_hit_up(spec: &ChainSpec, m: &InvariantMeasure, j: i64, n: i64) -> Result<f64> {
    check_state(spec, j, "source")?;
    check_state(spec, n, "target")?;
    if j > n {
        return Err(Error::domain(format!("mean_hit_up needs j <= n, got j={j}, n={n}")));
    }
    let mut sum = Kahan::new();
    for k in j..n {
        sum.add(step_up_mean(spec, m, k));
    }
    Ok(sum.value())
}

/// `ln E[T_{j -> n}]` for `j < n`, finite even when the mean itself is not
/// representable.
pub fn log_mean_hit_up(spec: &ChainSpec, m: &InvariantMeasure, j: i64, n: i64) -> Result<f64> {
    check_state(spec, j, "source")?;
    check_state(spec, n, "target")?;
    if j >= n {
        return Err(Error::domain(format!("log_mean_hit_up needs j < n, got j={j}, n={n}")));
    }
    let mut run = f64::NEG_INFINITY;
    for k in j..n {
        run = log_add_exp(run, m.log_prefix(k) - m.log_pi(k) - spec.p(k).ln());
    }
    Ok(run)
}

/// `ln E[T_{j -> n}]` for `n < j`.
pub fn log_mean_hit_down(spec: &ChainSpec, m: &InvariantMeasure, j: i64, n: i64) -> Result<f64> {
    check_state(spec, j, "source")?;
    check_state(spec, n, "target")?;
    if n >= j {
        return Err(Error::domain(format!("log_mean_hit_down needs n < j, got j={j}, n={n}")));
    }
    let mut run = f64::NEG_INFINITY;
    for k in n + 1..=j {
        run = log_add_exp(run, m.log_suffix(k) - m.log_pi(k) - spec.q(k).ln());
    }
    Ok(run)
}

/// Commute identity: `E[T_{j->n}] + E[T_{n->j}] = Σ_{k=j+1}^{n} 1/(q_k π(k))`
/// for `j < n`. Returns the right-hand side.
pub fn commute_identity(spec: &ChainSpec, m: &InvariantMeasure, j: i64, n: i64) -> Result<f64> {
    check_state(spec, j, "source")?;
    check_state(spec, n, "target")?;
    if j >= n {
        return Err(Error::domain(format!("commute_identity needs j < n, got j={j}, n={n}")));
    }
    let mut sum = Kahan::new();
    for k in j + 1..=n {
        sum.add(1.0 / (spec.q(k) * m.pi(k)));
    }
    Ok(sum.value())
}

/// `E[T_{j -> n}^2]` for `n <= j`.
pub fn second_moment_down(spec: &ChainSpec, m: &InvariantMeasure, j: i64, n: i64) -> Result<f64> {
    check_state(spec, j, "source")?;
    check_state(spec, n, "target")?;
    if n > j {
        return Err(Error::domain(format!("second_moment_down needs n <= j, got j={j}, n={n}")));
    }
    if n == j {
        return Ok(0.0);
    }
    let a = spec.a();
    let size = (a - n + 1) as usize;
    // E[T_{l->n}] for every l in [n, a]; the inner sum runs past j up to a.
    let mut m1 = vec![0.0; size];
    for l in n + 1..=a {
        let i = (l - n) as usize;
        m1[i] = m1[i - 1] + step_down_mean(spec, m, l);
    }
    // log W[k] = ln Σ_{l=k}^{a} E[T_{l->n}] π(l), accumulated from the top.
    let mut log_w = vec![f64::NEG_INFINITY; size];
    let mut run = f64::NEG_INFINITY;
    for l in (n..=a).rev() {
        let i = (l - n) as usize;
        if m1[i] > 0.0 {
            run = log_add_exp(run, m1[i].ln() + m.log_pi(l));
        }
        log_w[i] = run;
    }
    let mut total = Kahan::new();
    for k in n + 1..=j {
        let i = (k - n) as usize;
        total.add(2.0 * (log_w[i] - m.log_pi(k)).exp() / spec.q(k));
    }
    Ok(total.value() - m1[(j - n) as usize])
}

/// `E[T_{j -> n}^2]` for `j <= n`.
pub fn second_moment_up(spec: &ChainSpec, m: &InvariantMeasure, j: i64, n: i64) -> Result<f64> {
    check_state(spec, j, "source")?;
    check_state(spec, n, "target")?;
    if j > n {
        return Err(Error::domain(format!("second_moment_up needs j <= n, got j={j}, n={n}")));
    }
    if j == n {
        return Ok(0.0);
    }
    let b = spec.b();
    let size = (n - b + 1) as usize;
    let mut m1 = vec![0.0; size];
    for l in (b..n).rev() {
        let i = (l - b) as usize;
        m1[i] = m1[i + 1] + step_up_mean(spec, m, l);
    }
    let mut total = Kahan::new();
    let mut run = f64::NEG_INFINITY; // ln Σ_{l=b}^{k} E[T_{l->n}] π(l)
    for k in b..n {
        let i = (k - b) as usize;
        if m1[i] > 0.0 {
            run = log_add_exp(run, m1[i].ln() + m.log_pi(k));
        }
        if k >= j {
            total.add(2.0 * (run - m.log_pi(k)).exp() / spec.p(k));
        }
    }
    Ok(total.value() - m1[(j - b) as usize])
}

/// Variance of the one-step fall `T_{x -> x-1}`, `b+1 <= x <= a`.
///
/// The second moment is `(2/(q_x π(x))) Σ_{c=x}^{a} π([c,a])^2/(q_c π(c))
/// − E[T_{x->x-1}]`, with the summation variable inside the squared tail
/// mass (the variant that agrees with the absorbed-chain oracle; see the
/// verification suite's `rl74` check).
pub fn step_variance(spec: &ChainSpec, m: &InvariantMeasure, x: i64) -> Result<f64> {
    check_state(spec, x, "state")?;
    if x <= spec.b() {
        return Err(Error::domain(format!("step_variance needs x > b = {}", spec.b())));
    }
    let mut run = f64::NEG_INFINITY;
    for c in (x..=spec.a()).rev() {
        run = log_add_exp(run, 2.0 * m.log_suffix(c) - m.log_pi(c) - spec.q(c).ln());
    }
    let m1 = step_down_mean(spec, m, x);
    let m2 = 2.0 * (run - m.log_pi(x)).exp() / spec.q(x) - m1;
    Ok((m2 - m1 * m1).max(0.0))
}

/// Variance of the one-step climb `T_{x -> x+1}`, `b <= x <= -1`; the left
/// mirror of [`step_variance`].
pub fn step_variance_up(spec: &ChainSpec, m: &InvariantMeasure, x: i64) -> Result<f64> {
    check_state(spec, x, "state")?;
    if x >= spec.a() {
        return Err(Error::domain(format!("step_variance_up needs x < a = {}", spec.a())));
    }
    let mut run = f64::NEG_INFINITY;
    for c in spec.b()..=x {
        run = log_add_exp(run, 2.0 * m.log_prefix(c) - m.log_pi(c) - spec.p(c).ln());
    }
    let m1 = step_up_mean(spec, m, x);
    let m2 = 2.0 * (run - m.log_pi(x)).exp() / spec.p(x) - m1;
    Ok((m2 - m1 * m1).max(0.0))
}

/// Which edge of the well a full descent starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `T_{a -> 0}`
    Right,
    /// `T_{b -> 0}`
    Left,
}

/// Mean and variance of the full fall to the origin from the chosen edge.
///
/// The falls decompose into independent one-step passages, so the variance
/// is the sum of the per-step variances; a single running log-accumulator
/// makes the whole computation `O(a)`.
pub fn fall_moments(spec: &ChainSpec, m: &InvariantMeasure, side: Side) -> Result<(f64, f64)> {
    let mut mean = Kahan::new();
    let mut var = Kahan::new();
    match side {
        Side::Right => {
            let mut run = f64::NEG_INFINITY;
            for x in (1..=spec.a()).rev() {
                run = log_add_exp(run, 2.0 * m.log_suffix(x) - m.log_pi(x) - spec.q(x).ln());
                let m1 = step_down_mean(spec, m, x);
                let m2 = 2.0 * (run - m.log_pi(x)).exp() / spec.q(x) - m1;
                mean.add(m1);
                var.add((m2 - m1 * m1).max(0.0));
            }
        }
        Side::Left => {
            let mut run = f64::NEG_INFINITY;
            for x in spec.b()..0 {
                run = log_add_exp(run, 2.0 * m.log_prefix(x) - m.log_pi(x) - spec.p(x).ln());
                let m1 = step_up_mean(spec, m, x);
                let m2 = 2.0 * (run - m.log_pi(x)).exp() / spec.p(x) - m1;
                mean.add(m1);
                var.add((m2 - m1 * m1).max(0.0));
            }
        }
    }
    Ok((mean.value(), var.value()))
}

/// Mean two-sided hitting time `E[T_{j -> {m, n}}]` for `m < j < n`.
///
/// Both algebraic routes (eliminating toward `n` or toward `m`) are
/// evaluated and must agree to 1e-10 relative; their common value is
/// returned.
pub fn mean_hit_two_sided(
    spec: &ChainSpec,
    meas: &InvariantMeasure,
    j: i64,
    m: i64,
    n: i64,
) -> Result<f64> {
    if !(m < j && j < n) {
        return Err(Error::domain(format!("two-sided query needs m < j < n, got {m}, {j}, {n}")));
    }
    check_state(spec, m, "lower target")?;
    check_state(spec, n, "upper target")?;
    let t_nm = mean_hit_down(spec, meas, n, m)?;
    let t_mn = mean_hit_up(spec, meas, m, n)?;
    let t_jn = mean_hit_up(spec, meas, j, n)?;
    let t_nj = mean_hit_down(spec, meas, n, j)?;
    let t_jm = mean_hit_down(spec, meas, j, m)?;
    let t_mj = mean_hit_up(spec, meas, m, j)?;
    let denom = t_mn + t_nm;
    let via_upper = (t_nm * t_jn - t_mn * t_nj) / denom;
    let via_lower = (t_mn * t_jm - t_nm * t_mj) / denom;
    if rel_err(via_upper, via_lower) > 1e-10 {
        return Err(Error::Numerical(format!(
            "two-sided mean routes disagree: {via_upper} vs {via_lower}"
        )));
    }
    Ok(via_upper)
}
