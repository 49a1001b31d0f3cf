//! File formats: model documents, CSV tables, and JSON reports.
//!
//! A model document is a JSON object in one of two shapes:
//!
//! ```json
//! {"model": "simple_rw", "a": 12, "b": -12,
//!  "params": {"p_plus": 0.2, "q_plus": 0.4, "p_minus": 0.4, "q_minus": 0.2}}
//! ```
//!
//! or, with explicit rate tables indexed from `b` (`p[i] = p_{b+i}`,
//! `q[i] = q_{b+1+i}`, both of length `a - b`):
//!
//! ```json
//! {"a": 2, "b": 0, "p": [0.333, 0.333], "q": [0.667, 0.667]}
//! ```
//!
//! All writers are deterministic (shortest round-trip float formatting, `\n`
//! newlines) and atomic (temp file + rename), so identical runs produce
//! byte-identical outputs.

use crate::chain::ChainSpec;
use crate::error::Error;
use crate::mc::SampleSet;
use crate::oracle::ExactLaw;
use crate::zoo::{self, ModelParams};
use crate::Result;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// On-disk model description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub a: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ModelParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
}

impl ModelDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Materialize the chain this document describes.
    pub fn build(&self) -> Result<ChainSpec> {
        match (&self.model, &self.p, &self.q) {
            (Some(name), None, None) => zoo::make_model(
                name,
                self.params.as_ref().unwrap_or(&ModelParams::default()),
                self.a,
                self.b,
            ),
            (None, Some(p), Some(q)) => {
                let b = self.b.ok_or_else(|| {
                    Error::Document("explicit rate tables need the `b` field".to_string())
                })?;
                ChainSpec::new(b, self.a, p.clone(), q.clone())
            }
            _ => Err(Error::Document(
                "need either `model` (+ optional `params`) or explicit `p`/`q` tables".to_string(),
            )),
        }
    }
}

/// Write `content` to `path` atomically (temp file in the same directory,
/// then rename).
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Serialize a report as pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Document(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, &to_json_string(value)?)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV rendering of a sample set: `value` rows for hits, `tau,ttilde` rows
/// for last-exit samples.
pub fn samples_csv(set: &SampleSet) -> String {
    let mut out = String::new();
    match &set.companion {
        Some(pairs) => {
            out.push_str("tau,ttilde\n");
            for &(tau, tt) in pairs {
                let _ = writeln!(out, "{tau},{tt}");
            }
        }
        None => {
            out.push_str("value\n");
            for &v in &set.values {
                let _ = writeln!(out, "{v}");
            }
        }
    }
    out
}

/// CSV rendering of an exact law: `step,pmf` rows plus a trailing comment
/// carrying the tail mass.
pub fn law_csv(law: &ExactLaw) -> String {
    let mut out = String::from("step,pmf\n");
    for (t, &p) in law.pmf.iter().enumerate() {
        let _ = writeln!(out, "{t},{p}");
    }
    let _ = writeln!(out, "# tail_mass,{}", law.tail_mass);
    out
}

/// CSV rendering of a cut-off profile.
pub fn profile_csv(profile: &crate::diag::CutoffProfile) -> String {
    let mut out = String::from("c,prob\n");
    for (c, p) in profile.c.iter().zip(&profile.prob) {
        let _ = writeln!(out, "{c},{p}");
    }
    out
}

/// CSV rendering of the strong-drift sweep table.
pub fn sweep_csv(rows: &[crate::exact::SdSweepRow]) -> String {
    let mut out = String::from(
        "a,K_a,K_b,sd_ratio_right,sd_ratio_left,cross_left,cross_right,Q_ratio\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.a,
            r.k_right,
            fmt_opt(r.k_left),
            r.sd_ratio_right,
            fmt_opt(r.sd_ratio_left),
            fmt_opt(r.cross_left),
            fmt_opt(r.cross_right),
            r.q_ratio
        );
    }
    out
}

/// One row of a moments table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentsRow {
    pub from: i64,
    pub to: String,
    pub mean: f64,
    pub second_moment: Option<f64>,
    pub variance: Option<f64>,
}

pub fn moments_csv(rows: &[MomentsRow]) -> String {
    let mut out = String::from("from,to,mean,second_moment,variance\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.from,
            r.to,
            r.mean,
            fmt_opt(r.second_moment),
            fmt_opt(r.variance)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_zoo_document() {
        let doc = ModelDocument::parse(
            r#"{"model": "ehrenfest", "a": 3}"#,
        )
        .unwrap();
        let spec = doc.build().unwrap();
        assert_eq!(spec.b(), -3);
        assert_eq!(spec.a(), 3);
    }

    #[test]
    fn parse_explicit_tables() {
        let doc = ModelDocument::parse(
            r#"{"a": 2, "b": 0, "p": [0.5, 0.5], "q": [0.5, 0.5]}"#,
        )
        .unwrap();
        let spec = doc.build().unwrap();
        assert_eq!(spec.p(0), 0.5);
        assert_eq!(spec.q(2), 0.5);
    }

    #[test]
    fn reject_ambiguous_documents() {
        assert!(ModelDocument::parse(r#"{"a": 2}"#).unwrap().build().is_err());
        assert!(ModelDocument::parse(r#"{"a": 2, "unknown_field": 1}"#).is_err());
        let doc = ModelDocument::parse(r#"{"a": 2, "p": [0.5, 0.5], "q": [0.5, 0.5]}"#).unwrap();
        assert!(doc.build().is_err(), "missing b must be rejected");
    }

    #[test]
    fn atomic_write_round_trip() {
        let dir = std::env::temp_dir().join(format!("bdwell-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("x.json");
        write_atomic(&path, "{}\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "{}\n");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
