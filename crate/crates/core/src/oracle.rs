//! Independent brute-force ground truth for small chains.
//!
//! Everything in this module works directly on the transition kernel
//! restricted to an absorbing/taboo pattern: first-step linear systems for
//! moments (solved by a Thomas sweep — the restricted matrix stays
//! tridiagonal), absorption-time laws by iterated kernel application, and
//! the exact law of the last one-way excursion by taboo-path enumeration.
//! Nothing here touches the closed-form machinery in [`crate::exact`]; the
//! two paths are compared against each other by the verification suite.

use crate::chain::ChainSpec;
use crate::error::Error;
use crate::numerics::Kahan;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Resource limits for dense-oracle computations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OracleBudget {
    /// Maximum number of chain states (`a - b + 1`) for dense solves.
    pub max_states: usize,
    /// Hard cap on law-iteration steps.
    pub max_steps: usize,
    /// Stop iterating a law once the unabsorbed mass drops below this.
    pub tail_eps: f64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        // 64 states and 10^6 steps cover every desk-scale verification; the
        // acceptance experiments pass wider budgets explicitly.
        OracleBudget { max_states: 65, max_steps: 1_000_000, tail_eps: 1e-13 }
    }
}

impl OracleBudget {
    pub fn with_states(mut self, n: usize) -> Self {
        self.max_states = n;
        self
    }

    pub fn with_steps(mut self, n: usize) -> Self {
        self.max_steps = n;
        self
    }
}

/// The transition kernel restricted to the complement of a taboo/absorbing
/// set, stored as three diagonals over the kept states.
#[derive(Debug, Clone)]
pub struct DenseKernel {
    states: Vec<i64>,
    /// hold probability of each kept state
    diag: Vec<f64>,
    /// `up[i]`: mass from `states[i]` to `states[i+1]` (zero across gaps)
    up: Vec<f64>,
    /// `down[i]`: mass from `states[i]` to `states[i-1]` (zero across gaps)
    down: Vec<f64>,
    /// mass leaking from each kept state into the removed set
    leak: Vec<f64>,
}

impl DenseKernel {
    /// Restrict the kernel of `spec` to the states outside `removed`.
    pub fn taboo(spec: &ChainSpec, removed: &[i64]) -> DenseKernel {
        let states: Vec<i64> =
            (spec.b()..=spec.a()).filter(|x| !removed.contains(x)).collect();
        let n = states.len();
        let mut diag = vec![0.0; n];
        let mut up = vec![0.0; n];
        let mut down = vec![0.0; n];
        let mut leak = vec![0.0; n];
        for (i, &s) in states.iter().enumerate() {
            diag[i] = spec.r(s);
            let p = spec.p(s);
            let q = spec.q(s);
            if i + 1 < n && states[i + 1] == s + 1 {
                up[i] = p;
            } else if s < spec.a() {
                leak[i] += p;
            }
            if i > 0 && states[i - 1] == s - 1 {
                down[i] = q;
            } else if s > spec.b() {
                leak[i] += q;
            }
        }
        DenseKernel { states, diag, up, down, leak }
    }

    pub fn states(&self) -> &[i64] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: i64) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }

    /// Row sum of kept mass plus leak (1 for interior rows).
    pub fn row_mass(&self, i: usize) -> f64 {
        self.diag[i] + self.up[i] + self.down[i] + self.leak[i]
    }

    /// One step of the row-vector evolution `v <- v G`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = v[i] * self.diag[i];
            if i > 0 {
                acc += v[i - 1] * self.up[i - 1];
            }
            if i + 1 < n {
                acc += v[i + 1] * self.down[i + 1];
            }
            out[i] = acc;
        }
    }

    /// Solve `(I - G) m = rhs` by a Thomas sweep. The system is tridiagonal
    /// and diagonally dominant (strictly so in every row adjacent to the
    /// removed set), so no pivoting is needed.
    pub fn solve_absorbing(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::Numerical("rhs length mismatch".into()));
        }
        let mut diag: Vec<f64> = (0..n).map(|i| 1.0 - self.diag[i]).collect();
        let mut b = rhs.to_vec();
        // forward elimination on sub-diagonal -down[i]
        for i in 1..n {
            let sub = -self.down[i];
            if sub != 0.0 {
                let w = sub / diag[i - 1];
                diag[i] -= w * (-self.up[i - 1]);
                b[i] -= w * b[i - 1];
            }
        }
        let mut x = vec![0.0; n];
        if n > 0 {
            x[n - 1] = b[n - 1] / diag[n - 1];
            for i in (0..n - 1).rev() {
                x[i] = (b[i] - (-self.up[i]) * x[i + 1]) / diag[i];
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("singular absorbing system".into()));
        }
        Ok(x)
    }
}

/// An exactly computed discrete law on step counts `0..pmf.len()`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactLaw {
    /// `pmf[t] = P(T = t)`
    pub pmf: Vec<f64>,
    /// probability mass beyond the computed support
    pub tail_mass: f64,
}

impl ExactLaw {
    /// Mean of the truncated law (exact once `tail_mass` is negligible).
    pub fn mean(&self) -> f64 {
        let mut s = Kahan::new();
        for (t, &p) in self.pmf.iter().enumerate() {
            s.add(t as f64 * p);
        }
        s.value()
    }

    /// Survival values `S[t] = P(T > t) = Σ_{s>t} pmf[s] + tail_mass`,
    /// accumulated from the far tail so small masses add first.
    pub fn survival(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.pmf.len()];
        let mut rest = self.tail_mass;
        for t in (0..self.pmf.len()).rev() {
            out[t] = rest;
            rest += self.pmf[t];
        }
        out
    }

    pub fn total_mass(&self) -> f64 {
        let mut s = Kahan::new();
        for &p in &self.pmf {
            s.add(p);
        }
        s.value() + self.tail_mass
    }
}

fn check_budget(spec: &ChainSpec, budget: &OracleBudget) -> Result<()> {
    if spec.len() > budget.max_states {
        return Err(Error::Budget(format!(
            "{} states exceed the dense-oracle budget of {}",
            spec.len(),
            budget.max_states
        )));
    }
    Ok(())
}

fn check_targets(spec: &ChainSpec, j: i64, targets: &[i64]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::domain("empty target set".to_string()));
    }
    for &t in targets {
        if !spec.contains(t) {
            return Err(Error::domain(format!("target {t} outside [{}, {}]", spec.b(), spec.a())));
        }
    }
    if !spec.contains(j) {
        return Err(Error::domain(format!("source {j} outside [{}, {}]", spec.b(), spec.a())));
    }
    Ok(())
}

/// First-step linear system for `E[T_{j -> targets}]` with the target set
/// absorbing.
pub fn oracle_mean(spec: &ChainSpec, j: i64, targets: &[i64], budget: &OracleBudget) -> Result<f64> {
    check_targets(spec, j, targets)?;
    check_budget(spec, budget)?;
    if targets.contains(&j) {
        return Ok(0.0);
    }
    let kernel = DenseKernel::taboo(spec, targets);
    let m = kernel.solve_absorbing(&vec![1.0; kernel.len()])?;
    Ok(m[kernel.index_of(j).expect("source is kept")])
}

/// First-step linear system for `E[T_{j -> targets}^2]`:
/// `(I - G) m2 = 2 m1 - 1` with `m1` the mean vector.
pub fn oracle_second_moment(
    spec: &ChainSpec,
    j: i64,
    targets: &[i64],
    budget: &OracleBudget,
) -> Result<f64> {
    check_targets(spec, j, targets)?;
    check_budget(spec, budget)?;
    if targets.contains(&j) {
        return Ok(0.0);
    }
    let kernel = DenseKernel::taboo(spec, targets);
    let m1 = kernel.solve_absorbing(&vec![1.0; kernel.len()])?;
    let rhs: Vec<f64> = m1.iter().map(|&m| 2.0 * m - 1.0).collect();
    let m2 = kernel.solve_absorbing(&rhs)?;
    Ok(m2[kernel.index_of(j).expect("source is kept")])
}

/// Exact law of `T_{j -> targets}` by iterated application of the
/// substochastic kernel.
///
/// `t_max` defaults to `50 E[T]` (from the oracle's own mean solve), capped
/// by the budget; iteration stops early once the unabsorbed mass falls
/// below `budget.tail_eps`.
pub fn oracle_law(
    spec: &ChainSpec,
    j: i64,
    targets: &[i64],
    t_max: Option<usize>,
    budget: &OracleBudget,
) -> Result<ExactLaw> {
    check_targets(spec, j, targets)?;
    check_budget(spec, budget)?;
    if targets.contains(&j) {
        return Ok(ExactLaw { pmf: vec![1.0], tail_mass: 0.0 });
    }
    let t_max = match t_max {
        Some(t) => t.min(budget.max_steps),
        None => {
            let mean = oracle_mean(spec, j, targets, budget)?;
            ((50.0 * mean).ceil() as usize).clamp(1, budget.max_steps)
        }
    };
    let kernel = DenseKernel::taboo(spec, targets);
    let mut v = vec![0.0; kernel.len()];
    v[kernel.index_of(j).expect("source is kept")] = 1.0;
    let mut next = vec![0.0; kernel.len()];
    let mut pmf = vec![0.0];
    let mut alive = 1.0;
    for _ in 1..=t_max {
        kernel.apply(&v, &mut next);
        std::mem::swap(&mut v, &mut next);
        let now: f64 = v.iter().sum();
        pmf.push((alive - now).max(0.0));
        alive = now;
        if alive < budget.tail_eps {
            break;
        }
    }
    Ok(ExactLaw { pmf, tail_mass: alive })
}

/// Exact law (in steps) of the last one-way excursion from `x` to `y`.
///
/// A trajectory of `k` states `(v_1 = x, v_2, .., v_k = y)` avoiding both
/// `x` and `y` in between takes `k - 1` time steps, and the excursion law
/// conditions on eventually reaching `y` before returning to `x`:
/// `P(T̃ = s)` is proportional to the probability that the chain started at
/// `x` begins with such a path of `s` steps. Step counting (rather than
/// state counting) is what matches sampled `T̃ = T - τ` values.
pub fn oracle_last_exit_law(
    spec: &ChainSpec,
    x: i64,
    y: i64,
    k_max: Option<usize>,
    budget: &OracleBudget,
) -> Result<ExactLaw> {
    check_targets(spec, x, &[y])?;
    check_budget(spec, budget)?;
    if x == y {
        return Err(Error::domain("last exit requires x != y".to_string()));
    }
    let k_max = match k_max {
        Some(k) => k.min(budget.max_steps),
        None => {
            let mean = oracle_mean(spec, x, &[y], budget)?;
            ((50.0 * mean).ceil() as usize).clamp(1, budget.max_steps)
        }
    };
    let dist = x.abs_diff(y) as usize;
    if k_max < dist {
        return Err(Error::domain(format!(
            "k_max = {k_max} below the lattice distance {dist}"
        )));
    }
    let kernel = DenseKernel::taboo(spec, &[x, y]);

    // mass entering y from its kept neighbours
    let leak_y: Vec<f64> = kernel
        .states()
        .iter()
        .map(|&s| {
            if s + 1 == y {
                spec.p(s)
            } else if s - 1 == y {
                spec.q(s)
            } else {
                0.0
            }
        })
        .collect();

    // normalizer: probability of hitting y before returning to x
    let h = kernel.solve_absorbing(&leak_y)?;
    let direct = if (x - y).abs() == 1 {
        if y > x {
            spec.p(x)
        } else {
            spec.q(x)
        }
    } else {
        0.0
    };
    let mut p_u = direct;
    for (i, &s) in kernel.states().iter().enumerate() {
        if s == x + 1 {
            p_u += spec.p(x) * h[i];
        } else if s == x - 1 {
            p_u += spec.q(x) * h[i];
        }
    }
    if p_u <= 0.0 {
        return Err(Error::Numerical("no path from x to y avoids returning to x".into()));
    }

    // first-step distribution off {x, y}
    let mut v = vec![0.0; kernel.len()];
    for (i, &s) in kernel.states().iter().enumerate() {
        if s == x + 1 {
            v[i] = spec.p(x);
        } else if s == x - 1 {
            v[i] = spec.q(x);
        }
    }
    let mut pmf = vec![0.0; k_max + 1];
    if dist == 1 {
        pmf[1] = direct;
    }
    let mut next = vec![0.0; kernel.len()];
    let mut seen = Kahan::new();
    seen.add(pmf.get(1).copied().unwrap_or(0.0));
    for s in 2..=k_max {
        let mut arriving = 0.0;
        for (i, &l) in leak_y.iter().enumerate() {
            if l != 0.0 {
                arriving += v[i] * l;
            }
        }
        pmf[s] = arriving;
        seen.add(arriving);
        if p_u - seen.value() < budget.tail_eps * p_u {
            pmf.truncate(s + 1);
            break;
        }
        kernel.apply(&v, &mut next);
        std::mem::swap(&mut v, &mut next);
    }
    for p in pmf.iter_mut() {
        *p /= p_u;
    }
    let mass: f64 = {
        let mut k = Kahan::new();
        for &p in &pmf {
            k.add(p);
        }
        k.value()
    };
    Ok(ExactLaw { pmf, tail_mass: (1.0 - mass).max(0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn geometric_chain() -> ChainSpec {
        ChainSpec::new(0, 1, vec![0.5], vec![0.5]).unwrap()
    }

    #[test]
    fn geometric_mean_and_second_moment() {
        let spec = geometric_chain();
        let budget = OracleBudget::default();
        assert!((oracle_mean(&spec, 1, &[0], &budget).unwrap() - 2.0).abs() < 1e-12);
        assert!((oracle_second_moment(&spec, 1, &[0], &budget).unwrap() - 6.0).abs() < 1e-11);
    }

    #[test]
    fn source_in_targets_is_zero() {
        let spec = zoo::ehrenfest(3).unwrap();
        let budget = OracleBudget::default();
        assert_eq!(oracle_mean(&spec, 0, &[0, 3], &budget).unwrap(), 0.0);
        assert_eq!(oracle_second_moment(&spec, -3, &[-3], &budget).unwrap(), 0.0);
    }

    #[test]
    fn geometric_law_pmf() {
        let spec = geometric_chain();
        let law = oracle_law(&spec, 1, &[0], Some(60), &OracleBudget::default()).unwrap();
        for t in 1..20 {
            assert!((law.pmf[t] - 0.5f64.powi(t as i32)).abs() < 1e-15);
        }
        assert!((law.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn law_mean_consistent_with_solve() {
        let spec = zoo::ehrenfest(5).unwrap();
        let budget = OracleBudget::default();
        let mean = oracle_mean(&spec, 5, &[0], &budget).unwrap();
        let law = oracle_law(&spec, 5, &[0], None, &budget).unwrap();
        let slack = law.tail_mass * law.pmf.len() as f64 + 1e-9;
        assert!((law.mean() - mean).abs() <= slack, "{} vs {mean}", law.mean());
    }

    #[test]
    fn law_tail_decays_geometrically() {
        let spec = zoo::half_well(0.2, 0.4, 10).unwrap();
        let budget = OracleBudget { tail_eps: 0.0, ..OracleBudget::default() };
        let law_t = oracle_law(&spec, 10, &[0], Some(200), &budget).unwrap();
        let law_2t = oracle_law(&spec, 10, &[0], Some(400), &budget).unwrap();
        assert!(law_2t.tail_mass < law_t.tail_mass);
        assert!(law_2t.tail_mass < law_t.tail_mass * law_t.tail_mass * 1e6); // roughly squared
    }

    #[test]
    fn budget_guard() {
        let spec = zoo::half_well(0.2, 0.4, 200).unwrap();
        assert!(matches!(
            oracle_mean(&spec, 5, &[0], &OracleBudget::default()),
            Err(Error::Budget(_))
        ));
        assert!(oracle_mean(&spec, 5, &[0], &OracleBudget::default().with_states(201)).is_ok());
    }

    #[test]
    fn last_exit_floor_and_direct_path() {
        // Ehrenfest a=2, from 2 to 0: the only x-avoiding path is 2 -> 1 -> 0,
        // so the law is a point mass at 2 steps.
        let spec = zoo::ehrenfest(2).unwrap();
        let law = oracle_last_exit_law(&spec, 2, 0, Some(60), &OracleBudget::default()).unwrap();
        assert_eq!(law.pmf[0], 0.0);
        assert_eq!(law.pmf[1], 0.0);
        assert!((law.pmf[2] - 1.0).abs() < 1e-12);
        assert!(law.tail_mass < 1e-12);
    }

    #[test]
    fn last_exit_reversal_symmetry() {
        let spec = zoo::ehrenfest(2).unwrap();
        let budget = OracleBudget::default();
        let fwd = oracle_last_exit_law(&spec, 2, 0, Some(100), &budget).unwrap();
        let rev = oracle_last_exit_law(&spec, 0, 2, Some(100), &budget).unwrap();
        for t in 0..=100 {
            let a = fwd.pmf.get(t).copied().unwrap_or(0.0);
            let b = rev.pmf.get(t).copied().unwrap_or(0.0);
            assert!((a - b).abs() < 1e-10, "t={t}: {a} vs {b}");
        }
        // mirrored pair agrees by the left-right symmetry of the model too
        let mir = oracle_last_exit_law(&spec, -2, 0, Some(100), &budget).unwrap();
        for t in 0..fwd.pmf.len() {
            assert!((fwd.pmf[t] - mir.pmf[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn last_exit_rejects_equal_endpoints() {
        let spec = zoo::ehrenfest(2).unwrap();
        assert!(oracle_last_exit_law(&spec, 1, 1, Some(10), &OracleBudget::default()).is_err());
    }

    #[test]
    fn kernel_rows_are_substochastic_and_tridiagonal() {
        let spec = zoo::ehrenfest(6).unwrap();
        let kernel = DenseKernel::taboo(&spec, &[2, -1]);
        for i in 0..kernel.len() {
            let mass = kernel.row_mass(i);
            assert!(mass <= 1.0 + 1e-12 && mass >= 1.0 - 1e-12);
        }
    }
}
