//! Model zoo: the chain families used throughout the experiments.
//!
//! - `simple_rw` — rates depending only on the sign of `x` (`p⁺, q⁺` to the
//!   right, `p⁻, q⁻` to the left, with `p_0 = p⁺`, `q_0 = q⁻`).
//! - `varying_rw` — sign-dependent rates with an optional flat bottom
//!   `p_x = q_x = 1/2` on `[d⁻, d⁺]`, drift rates taking over at the first
//!   step leaving the flat region.
//! - `ehrenfest` — `p_x = (a-x)/(2a)`, `q_x = (a+x)/(2a)` on `[-a, a]`.
//! - `half_well` — constant-rate wedge on `[0, a]`.
//! - `driftless` — `p = q = 1/2` wedge on `[0, a]`, the negative control.

use crate::chain::ChainSpec;
use crate::error::Error;
use crate::Result;
use rand::Rng;

fn check_prob(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter { name, reason: format!("{v} is not in (0, 1)") })
    }
}

/// Simple (non-symmetric) random walk on `[b, a]` with sign-dependent rates.
pub fn simple_rw(p_plus: f64, q_plus: f64, p_minus: f64, q_minus: f64, b: i64, a: i64) -> Result<ChainSpec> {
    varying_rw(p_plus, q_plus, p_minus, q_minus, 0, 0, b, a)
}

/// Random walk with varying rates and a flat bottom on `[d_minus, d_plus]`.
///
/// Up-steps use `1/2` for `x < d_plus` inside the bottom and `p⁺` from
/// `d_plus` on; down-steps use `1/2` through `d_plus` and `q⁺` above it, so
/// the drift pair `(p⁺, q⁺)` governs exactly the excursions beyond the flat
/// region (mirrored on the left). With `d_minus = d_plus = 0` this is the
/// simple random walk.
#[allow(clippy::too_many_arguments)]
pub fn varying_rw(
    p_plus: f64,
    q_plus: f64,
    p_minus: f64,
    q_minus: f64,
    d_minus: i64,
    d_plus: i64,
    b: i64,
    a: i64,
) -> Result<ChainSpec> {
    check_prob("p_plus", p_plus)?;
    check_prob("q_plus", q_plus)?;
    if b < 0 {
        check_prob("p_minus", p_minus)?;
        check_prob("q_minus", q_minus)?;
    }
    if !(d_minus <= 0 && d_plus >= 0) {
        return Err(Error::Parameter {
            name: "d_minus/d_plus",
            reason: format!("flat bottom [{d_minus}, {d_plus}] must contain 0"),
        });
    }
    if d_plus > 0 || d_minus < 0 {
        if d_plus >= a || d_minus <= b {
            return Err(Error::Parameter {
                name: "d_minus/d_plus",
                reason: "flat bottom must be strictly inside [b, a]".into(),
            });
        }
        if p_plus > 0.5 || q_minus > 0.5 {
            return Err(Error::Parameter {
                name: "p_plus/q_minus",
                reason: "flat-bottom junction needs p_plus <= 1/2 and q_minus <= 1/2".into(),
            });
        }
    }
    let up = (b..a)
        .map(|x| {
            if x >= d_plus {
                p_plus
            } else if x >= d_minus {
                0.5
            } else {
                p_minus
            }
        })
        .collect();
    let down = (b + 1..=a)
        .map(|x| {
            if x > d_plus {
                q_plus
            } else if x > d_minus {
                0.5
            } else {
                q_minus
            }
        })
        .collect();
    ChainSpec::new(b, a, up, down)
}

/// Discrete-time Ehrenfest urn on `[-a, a]`.
pub fn ehrenfest(a: i64) -> Result<ChainSpec> {
    if a < 1 {
        return Err(Error::Parameter { name: "a", reason: format!("a = {a} must be >= 1") });
    }
    let two_a = (2 * a) as f64;
    let up = (-a..a).map(|x| (a - x) as f64 / two_a).collect();
    let down = (-a + 1..=a).map(|x| (a + x) as f64 / two_a).collect();
    ChainSpec::new(-a, a, up, down)
}

/// Constant-rate half well on `[0, a]` (the cross rate at 0 is held mass).
pub fn half_well(p_plus: f64, q_plus: f64, a: i64) -> Result<ChainSpec> {
    check_prob("p_plus", p_plus)?;
    check_prob("q_plus", q_plus)?;
    ChainSpec::new(0, a, vec![p_plus; a as usize], vec![q_plus; a as usize])
}

/// Symmetric driftless walk on `[0, a]`; the negative control for every
/// strong-drift diagnostic.
pub fn driftless(a: i64) -> Result<ChainSpec> {
    half_well(0.5, 0.5, a)
}

/// Rule mapping the diverging parameter `a` to the left endpoint.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum BRule {
    /// `b = -ceil(rho * a)`; the default is `rho = 1` (`b = -a`).
    Proportional(f64),
    Fixed(i64),
    HalfWell,
}

impl BRule {
    pub fn b_of(&self, a: i64) -> i64 {
        match *self {
            BRule::Proportional(rho) => -((rho * a as f64).ceil() as i64).max(1),
            BRule::Fixed(b) => b,
            BRule::HalfWell => 0,
        }
    }
}

/// A family `{X^(a)}` of chains indexed by the right endpoint.
pub struct ChainFamily {
    name: String,
    generator: Box<dyn Fn(i64) -> Result<ChainSpec> + Send + Sync>,
}

impl ChainFamily {
    pub fn new(
        name: impl Into<String>,
        generator: impl Fn(i64) -> Result<ChainSpec> + Send + Sync + 'static,
    ) -> Self {
        ChainFamily { name: name.into(), generator: Box::new(generator) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self, a: i64) -> Result<ChainSpec> {
        (self.generator)(a)
    }

    pub fn simple_rw(p_plus: f64, q_plus: f64, p_minus: f64, q_minus: f64, b_rule: BRule) -> Self {
        ChainFamily::new("simple_rw", move |a| {
            simple_rw(p_plus, q_plus, p_minus, q_minus, b_rule.b_of(a), a)
        })
    }

    pub fn ehrenfest() -> Self {
        ChainFamily::new("ehrenfest", ehrenfest)
    }

    pub fn half_well(p_plus: f64, q_plus: f64) -> Self {
        ChainFamily::new("half_well", move |a| half_well(p_plus, q_plus, a))
    }

    pub fn driftless() -> Self {
        ChainFamily::new("driftless", driftless)
    }
}

/// Parameters for [`make_model`], deserialized from the `params` field of a
/// model document. Missing fields fall back to model-specific defaults.
#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub p_plus: Option<f64>,
    pub q_plus: Option<f64>,
    pub p_minus: Option<f64>,
    pub q_minus: Option<f64>,
    pub d_plus: Option<i64>,
    pub d_minus: Option<i64>,
}

/// Build a zoo model by name.
///
/// `b` defaults to `-a` for full-well models (the families let it diverge
/// proportionally with `a`) and is ignored by `half_well`/`driftless`.
pub fn make_model(name: &str, params: &ModelParams, a: i64, b: Option<i64>) -> Result<ChainSpec> {
    let pp = params.p_plus.unwrap_or(0.2);
    let qp = params.q_plus.unwrap_or(0.4);
    let pm = params.p_minus.unwrap_or(qp);
    let qm = params.q_minus.unwrap_or(pp);
    match name {
        "simple_rw" => simple_rw(pp, qp, pm, qm, b.unwrap_or(-a), a),
        "varying_rw" => varying_rw(
            pp,
            qp,
            pm,
            qm,
            params.d_minus.unwrap_or(0),
            params.d_plus.unwrap_or(0),
            b.unwrap_or(-a),
            a,
        ),
        "ehrenfest" => ehrenfest(a),
        "half_well" => half_well(pp, qp, a),
        "driftless" => driftless(a),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// Family counterpart of [`make_model`]; `b` follows `rule` for full wells.
pub fn make_family(name: &str, params: &ModelParams, rule: BRule) -> Result<ChainFamily> {
    // probe once so bad names/parameters fail eagerly
    make_model(name, params, 4, Some(rule.b_of(4)))?;
    let name_owned = name.to_string();
    let params = params.clone();
    let fam_name = name.to_string();
    Ok(ChainFamily::new(fam_name, move |a| {
        make_model(&name_owned, &params, a, Some(rule.b_of(a)))
    }))
}

/// Random valid chain with uniform rates, renormalized where `p + q` leaves
/// no hold mass. Used by the verification suite and the randomized tests.
pub fn random_spec(rng: &mut impl Rng, b: i64, a: i64) -> ChainSpec {
    let n = (a - b) as usize;
    let mut up: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.6)).collect();
    let mut down: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.6)).collect();
    for x in b..=a {
        let p = if x < a { up[(x - b) as usize] } else { 0.0 };
        let q = if x > b { down[(x - b - 1) as usize] } else { 0.0 };
        let sum = p + q;
        if sum > 0.95 {
            let scale = 0.95 / sum;
            if x < a {
                up[(x - b) as usize] *= scale;
            }
            if x > b {
                down[(x - b - 1) as usize] *= scale;
            }
        }
    }
    ChainSpec::new(b, a, up, down).expect("random spec construction is valid by design")
}
