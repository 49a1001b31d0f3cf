//! Reversible invariant measures.
//!
//! The measure is assembled in log space relative to `π(0)` as cumulative
//! sums of `log(p_{x-1}/q_x)`, then normalized with a log-sum-exp pass, so
//! deep wells (`a ~ 10^4`) never overflow. Tail masses `π([x,a])` and head
//! masses `π([b,x])` are accumulated from the small end with compensated
//! summation and are also kept in log form: downstream formulas divide them
//! by `π(x)` at points where both factors underflow doubles.

use crate::chain::ChainSpec;
use crate::error::Error;
use crate::numerics::{log_add_exp, log_sum_exp, Kahan};
use crate::Result;

#[derive(Debug, Clone)]
pub struct InvariantMeasure {
    b: i64,
    a: i64,
    log_pi: Vec<f64>,
    pi: Vec<f64>,
    /// `π([x, a])`, indexed by `x - b`.
    suffix: Vec<f64>,
    /// `π([b, x])`, indexed by `x - b`.
    prefix: Vec<f64>,
    log_suffix: Vec<f64>,
    log_prefix: Vec<f64>,
}

/// Compute the reversible invariant measure of a valid chain.
pub fn invariant_measure(spec: &ChainSpec) -> Result<InvariantMeasure> {
    let violations = spec.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidSpec(violations));
    }
    let (b, a) = (spec.b(), spec.a());
    let n = spec.len();
    let i0 = spec.ix(0);

    // log π(x) − log π(0) via detailed balance π(x) q_x = π(x−1) p_{x−1}
    let mut log_rel = vec![0.0; n];
    for x in 1..=a {
        let step = spec.p(x - 1).ln() - spec.q(x).ln();
        log_rel[i0 + x as usize] = log_rel[i0 + x as usize - 1] + step;
    }
    for x in (b..0).rev() {
        let step = spec.q(x + 1).ln() - spec.p(x).ln();
        log_rel[spec.ix(x)] = log_rel[spec.ix(x + 1)] + step;
    }
    if log_rel.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite log rate ratio".into()));
    }

    let log_z = log_sum_exp(&log_rel);
    let log_pi: Vec<f64> = log_rel.iter().map(|v| v - log_z).collect();
    let pi: Vec<f64> = log_pi.iter().map(|v| v.exp()).collect();

    let mut suffix = vec![0.0; n];
    let mut acc = Kahan::new();
    for i in (0..n).rev() {
        acc.add(pi[i]);
        suffix[i] = acc.value();
    }
    let mut prefix = vec![0.0; n];
    let mut acc = Kahan::new();
    for i in 0..n {
        acc.add(pi[i]);
        prefix[i] = acc.value();
    }

    let mut log_suffix = vec![f64::NEG_INFINITY; n];
    let mut run = f64::NEG_INFINITY;
    for i in (0..n).rev() {
        run = log_add_exp(run, log_pi[i]);
        log_suffix[i] = run;
    }
    let mut log_prefix = vec![f64::NEG_INFINITY; n];
    let mut run = f64::NEG_INFINITY;
    for i in 0..n {
        run = log_add_exp(run, log_pi[i]);
        log_prefix[i] = run;
    }

    Ok(InvariantMeasure { b, a, log_pi, pi, suffix, prefix, log_suffix, log_prefix })
}

impl InvariantMeasure {
    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    fn ix(&self, x: i64) -> usize {
        debug_assert!(self.b <= x && x <= self.a);
        (x - self.b) as usize
    }

    pub fn pi(&self, x: i64) -> f64 {
        self.pi[self.ix(x)]
    }

    pub fn log_pi(&self, x: i64) -> f64 {
        self.log_pi[self.ix(x)]
    }

    /// Tail mass `π([x, a])`; zero for `x > a`.
    pub fn suffix(&self, x: i64) -> f64 {
        if x > self.a {
            0.0
        } else {
            self.suffix[self.ix(x)]
        }
    }

    /// Head mass `π([b, x])`; zero for `x < b`.
    pub fn prefix(&self, x: i64) -> f64 {
        if x < self.b {
            0.0
        } else {
            self.prefix[self.ix(x)]
        }
    }

    pub fn log_suffix(&self, x: i64) -> f64 {
        if x > self.a {
            f64::NEG_INFINITY
        } else {
            self.log_suffix[self.ix(x)]
        }
    }

    pub fn log_prefix(&self, x: i64) -> f64 {
        if x < self.b {
            f64::NEG_INFINITY
        } else {
            self.log_prefix[self.ix(x)]
        }
    }

    /// `π([x, a]) / π(x)`, evaluated through logs when the linear values are
    /// unusable (deep tails underflow doubles long before their ratio does).
    pub fn tail_over_pi(&self, x: i64) -> f64 {
        let i = self.ix(x);
        crate::numerics::stable_ratio(self.suffix[i], self.pi[i], self.log_suffix[i], self.log_pi[i])
    }

    /// `π([b, x]) / π(x)`, log-routed like [`InvariantMeasure::tail_over_pi`].
    pub fn head_over_pi(&self, x: i64) -> f64 {
        let i = self.ix(x);
        crate::numerics::stable_ratio(self.prefix[i], self.pi[i], self.log_prefix[i], self.log_pi[i])
    }

    /// Largest relative detailed-balance residual
    /// `|1 − π(x−1) p_{x−1} / (π(x) q_x)|`, computed in log space so deep
    /// tails do not degenerate to 0/0.
    pub fn detailed_balance_residual(&self, spec: &ChainSpec) -> f64 {
        let mut worst: f64 = 0.0;
        for x in self.b + 1..=self.a {
            let lhs = self.log_pi(x) + spec.q(x).ln();
            let rhs = self.log_pi(x - 1) + spec.p(x - 1).ln();
            worst = worst.max((rhs - lhs).exp_m1().abs());
        }
        worst
    }
}
