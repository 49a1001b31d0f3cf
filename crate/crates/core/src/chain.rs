//! Birth-and-death chain definitions on an integer interval `[b, a]`.
//!
//! A chain is characterized by up-rates `p_x` (defined for `b <= x <= a-1`)
//! and down-rates `q_x` (defined for `b+1 <= x <= a`); the hold probability
//! `r_x = 1 - p_x - q_x` is implicit. Endpoints hold with the leftover mass.

use crate::error::Error;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A single invariant violation found while validating a chain definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// Interval must satisfy `b <= 0 <= a` and `a - b >= 1`.
    BadInterval { b: i64, a: i64 },
    /// Rate table has the wrong length for the interval.
    TableLength { which: char, expected: usize, got: usize },
    /// `p_x = 0` (or negative / non-finite) breaks irreducibility.
    UpRate { x: i64, value: f64 },
    /// `q_x = 0` (or negative / non-finite) breaks irreducibility.
    DownRate { x: i64, value: f64 },
    /// `p_x + q_x > 1` leaves no room for the hold probability.
    MassOverflow { x: i64, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadInterval { b, a } => {
                write!(f, "interval [{b},{a}] must satisfy b <= 0 <= a and a - b >= 1")
            }
            Violation::TableLength { which, expected, got } => {
                write!(f, "{which}-table has length {got}, expected {expected}")
            }
            Violation::UpRate { x, value } => {
                write!(f, "p_{x} = {value} breaks irreducibility")
            }
            Violation::DownRate { x, value } => {
                write!(f, "q_{x} = {value} breaks irreducibility")
            }
            Violation::MassOverflow { x, sum } => {
                write!(f, "p_{x} + q_{x} = {sum} exceeds 1")
            }
        }
    }
}

/// A validated birth-and-death chain on `[b, a]`.
///
/// Immutable after construction; cheap to share across workers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    b: i64,
    a: i64,
    /// `p_x` for `x = b ..= a-1`, indexed by `x - b`.
    up: Vec<f64>,
    /// `q_x` for `x = b+1 ..= a`, indexed by `x - b - 1`.
    down: Vec<f64>,
}

/// Check candidate rate tables against every chain invariant.
///
/// Violations are data, not errors: the result is empty iff the parts form a
/// valid irreducible chain.
pub fn validate_parts(b: i64, a: i64, up: &[f64], down: &[f64]) -> Vec<Violation> {
    let mut out = Vec::new();
    // a = 0 admits the left half wells produced by splitting a full well
    if !(b <= 0 && a >= 0 && a - b >= 1) {
        out.push(Violation::BadInterval { b, a });
        return out;
    }
    let n = (a - b) as usize;
    if up.len() != n {
        out.push(Violation::TableLength { which: 'p', expected: n, got: up.len() });
    }
    if down.len() != n {
        out.push(Violation::TableLength { which: 'q', expected: n, got: down.len() });
    }
    if !out.is_empty() {
        return out;
    }
    for (i, &p) in up.iter().enumerate() {
        let x = b + i as i64;
        if !(p > 0.0) || !p.is_finite() {
            out.push(Violation::UpRate { x, value: p });
        }
    }
    for (i, &q) in down.iter().enumerate() {
        let x = b + 1 + i as i64;
        if !(q > 0.0) || !q.is_finite() {
            out.push(Violation::DownRate { x, value: q });
        }
    }
    for x in b..=a {
        let p = if x < a { up[(x - b) as usize] } else { 0.0 };
        let q = if x > b { down[(x - b - 1) as usize] } else { 0.0 };
        let sum = p + q;
        if sum > 1.0 + 1e-12 {
            out.push(Violation::MassOverflow { x, sum });
        }
    }
    out
}

impl ChainSpec {
    /// Build a chain from rate tables; fails with the full violation list if
    /// any invariant is broken.
    pub fn new(b: i64, a: i64, up: Vec<f64>, down: Vec<f64>) -> Result<Self> {
        let violations = validate_parts(b, a, &up, &down);
        if violations.is_empty() {
            Ok(ChainSpec { b, a, up, down })
        } else {
            Err(Error::InvalidSpec(violations))
        }
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    /// Number of states `a - b + 1`.
    pub fn len(&self) -> usize {
        (self.a - self.b + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: i64) -> bool {
        self.b <= x && x <= self.a
    }

    /// Index of state `x` into dense arrays over `[b, a]`.
    pub fn ix(&self, x: i64) -> usize {
        debug_assert!(self.contains(x));
        (x - self.b) as usize
    }

    /// Up-rate `p_x`; zero at the right endpoint where no up-move exists.
    pub fn p(&self, x: i64) -> f64 {
        debug_assert!(self.contains(x));
        if x < self.a {
            self.up[(x - self.b) as usize]
        } else {
            0.0
        }
    }

    /// Down-rate `q_x`; zero at the left endpoint where no down-move exists.
    pub fn q(&self, x: i64) -> f64 {
        debug_assert!(self.contains(x));
        if x > self.b {
            self.down[(x - self.b - 1) as usize]
        } else {
            0.0
        }
    }

    /// Hold probability `r_x = 1 - p_x - q_x`.
    pub fn r(&self, x: i64) -> f64 {
        (1.0 - self.p(x) - self.q(x)).max(0.0)
    }

    /// `true` when `b = 0`, i.e. the wedge-shaped well with a vertical wall
    /// at the origin.
    pub fn is_half_well(&self) -> bool {
        self.b == 0
    }

    /// Re-run validation on the stored tables.
    pub fn validate(&self) -> Vec<Violation> {
        validate_parts(self.b, self.a, &self.up, &self.down)
    }

    /// Stable 64-bit digest of the interval and rate tables, used to tag
    /// sample sets with their provenance.
    pub fn digest(&self) -> u64 {
        // FNV-1a over the raw bit patterns.
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |v: u64| {
            for byte in v.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.b as u64);
        eat(self.a as u64);
        for &p in &self.up {
            eat(p.to_bits());
        }
        for &q in &self.down {
            eat(q.to_bits());
        }
        h
    }

    /// Split a full well into its left (`[b, 0]`) and right (`[0, a]`)
    /// half-well versions.
    ///
    /// Rates are copied verbatim except at 0, where the cross-boundary rate
    /// is folded into the hold probability: the right half has
    /// `(p̂_0, q̂_0, r̂_0) = (p_0, 0, q_0 + r_0)` and the left half mirrors it.
    pub fn half_well_versions(&self) -> Result<(ChainSpec, ChainSpec)> {
        if self.b >= 0 || self.a <= 0 {
            return Err(Error::domain(format!(
                "half wells require b < 0 < a, got [{}, {}]",
                self.b, self.a
            )));
        }
        let left = ChainSpec::new(
            self.b,
            0,
            (self.b..0).map(|x| self.p(x)).collect(),
            (self.b + 1..=0).map(|x| self.q(x)).collect(),
        )?;
        let right = ChainSpec::new(
            0,
            self.a,
            (0..self.a).map(|x| self.p(x)).collect(),
            (1..=self.a).map(|x| self.q(x)).collect(),
        )?;
        Ok((left, right))
    }

    /// Copy with a single rate replaced, bypassing validation.
    ///
    /// Test hook for the self-test of the verification suite; not for
    /// ordinary construction.
    pub fn with_perturbed_rate(&self, x: i64, up_side: bool, value: f64) -> ChainSpec {
        let mut c = self.clone();
        if up_side {
            c.up[(x - c.b) as usize] = value;
        } else {
            c.down[(x - c.b - 1) as usize] = value;
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn zero_up_rate_reported_with_location() {
        let mut up = vec![0.3; 5];
        up[3] = 0.0; // p_3 with b = 0
        let v = validate_parts(0, 5, &up, &vec![0.3; 5]);
        assert_eq!(v, vec![Violation::UpRate { x: 3, value: 0.0 }]);
        assert_eq!(v[0].to_string(), "p_3 = 0 breaks irreducibility");
    }

    #[test]
    fn valid_ehrenfest_has_no_violations() {
        let spec = zoo::ehrenfest(4).unwrap();
        assert!(spec.validate().is_empty());
    }

    #[test]
    fn probability_overflow_located() {
        let mut up = vec![0.4; 4];
        let mut down = vec![0.4; 4];
        up[2] = 0.7;
        down[1] = 0.5; // q_2 with b = 0
        let v = validate_parts(0, 4, &up, &down);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::MassOverflow { x: 2, .. }));
    }

    #[test]
    fn interval_must_contain_zero_and_be_nondegenerate() {
        assert!(!validate_parts(1, 3, &[0.1; 2], &[0.1; 2]).is_empty());
        assert!(!validate_parts(0, 0, &[], &[]).is_empty());
        assert!(!validate_parts(-1, -1, &[], &[]).is_empty());
        // a left half well is a legal chain
        assert!(validate_parts(-2, 0, &[0.1; 2], &[0.1; 2]).is_empty());
    }

    #[test]
    fn half_well_fold_rule() {
        // Ehrenfest a=1: right half on [0,1] keeps p_0 = 1/2, q_1 = 1.
        let spec = zoo::ehrenfest(1).unwrap();
        let (left, right) = spec.half_well_versions().unwrap();
        assert_eq!(right.b(), 0);
        assert_eq!(right.a(), 1);
        assert_eq!(right.p(0), 0.5);
        assert_eq!(right.q(0), 0.0);
        assert_eq!(right.r(0), 0.5);
        assert_eq!(right.q(1), 1.0);
        // mirrored left half of the symmetric well
        assert_eq!(left.q(0), 0.5);
        assert_eq!(left.p(0), 0.0);
        assert_eq!(left.p(-1), 1.0);
    }

    #[test]
    fn half_well_rejects_degenerate_interval() {
        let spec = zoo::half_well(0.2, 0.4, 4).unwrap();
        assert!(spec.half_well_versions().is_err());
    }
}
