//! Command implementations: each resolves its configuration, echoes it to
//! `resolved_config.json`, writes its artifacts atomically, and returns the
//! process exit code.

use crate::config::{resolve_out_dir, ConfigFile, ResolvedConfig, Thresholds};
use crate::{CommonArgs, ModelArgs};
use anyhow::{anyhow, bail, Context, Result};
use bdwell::diag::{self, LawSource};
use bdwell::exact::{self, HittingQuery, Target};
use bdwell::io::{self, ModelDocument, MomentsRow};
use bdwell::mc::{self, Endpoint, RngPolicy, SampleOptions, SampleSet, StepMode};
use bdwell::measure::invariant_measure;
use bdwell::oracle::{self, OracleBudget};
use bdwell::zoo::{self, BRule, ModelParams};
use bdwell::ChainSpec;
use serde::Serialize;
use std::path::{Path, PathBuf};

fn load_config(common: &CommonArgs) -> Result<ConfigFile> {
    match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading --config {path}"))?;
            Ok(serde_json::from_str(&text).with_context(|| format!("parsing --config {path}"))?)
        }
        None => Ok(ConfigFile::default()),
    }
}

fn merged_params(args: &ModelArgs, file: &ConfigFile) -> ModelParams {
    let base = file.params.clone().unwrap_or_default();
    ModelParams {
        p_plus: args.p_plus.or(base.p_plus),
        q_plus: args.q_plus.or(base.q_plus),
        p_minus: args.p_minus.or(base.p_minus),
        q_minus: args.q_minus.or(base.q_minus),
        d_plus: args.d_plus.or(base.d_plus),
        d_minus: args.d_minus.or(base.d_minus),
    }
}

/// Fill in the defaults a zoo model would apply, so the resolved config
/// records the rates actually used.
fn materialize_params(name: &str, p: &ModelParams) -> Option<ModelParams> {
    let pp = p.p_plus.unwrap_or(0.2);
    let qp = p.q_plus.unwrap_or(0.4);
    match name {
        "simple_rw" | "half_well" | "varying_rw" => Some(ModelParams {
            p_plus: Some(pp),
            q_plus: Some(qp),
            p_minus: Some(p.p_minus.unwrap_or(qp)),
            q_minus: Some(p.q_minus.unwrap_or(pp)),
            d_plus: (name == "varying_rw").then(|| p.d_plus.unwrap_or(0)),
            d_minus: (name == "varying_rw").then(|| p.d_minus.unwrap_or(0)),
        }),
        _ => None,
    }
}

fn model_document(args: &ModelArgs, file: &ConfigFile) -> Result<ModelDocument> {
    if let Some(path) = args.spec.clone().or_else(|| file.spec.clone()) {
        let mut doc = ModelDocument::load(Path::new(&path))
            .with_context(|| format!("loading model document {path}"))?;
        if let Some(a) = args.a {
            doc.a = a;
        }
        if let Some(b) = args.b {
            doc.b = Some(b);
        }
        return Ok(doc);
    }
    let name = args
        .model
        .clone()
        .or_else(|| file.model.clone())
        .ok_or_else(|| anyhow!("no model: pass --model NAME or --spec FILE"))?;
    let a = args.a.or(file.a).ok_or_else(|| anyhow!("--a is required with --model"))?;
    let params = merged_params(args, file);
    Ok(ModelDocument {
        model: Some(name.clone()),
        a,
        b: args.b.or(file.b),
        params: materialize_params(&name, &params),
        p: None,
        q: None,
    })
}

fn parse_endpoint(s: &str) -> Result<Endpoint> {
    match s {
        "a" => Ok(Endpoint::RightEdge),
        "b" => Ok(Endpoint::LeftEdge),
        _ => s
            .parse::<i64>()
            .map(Endpoint::State)
            .map_err(|_| anyhow!("bad endpoint `{s}` (expected a, b, or an integer)")),
    }
}

#[derive(Debug, Clone)]
enum CliQuery {
    Hit { from: Endpoint, targets: Vec<Endpoint> },
    LastExit { from: Endpoint, to: Endpoint },
}

impl CliQuery {
    fn parse_hit(s: &str) -> Result<CliQuery> {
        let (from, rest) =
            s.split_once(':').ok_or_else(|| anyhow!("bad query `{s}` (expected FROM:TO)"))?;
        let targets = rest.split(',').map(parse_endpoint).collect::<Result<Vec<_>>>()?;
        if targets.is_empty() || targets.len() > 2 {
            bail!("bad query `{s}`: need one target or a two-sided pair");
        }
        Ok(CliQuery::Hit { from: parse_endpoint(from)?, targets })
    }

    fn parse_last_exit(s: &str) -> Result<CliQuery> {
        let (from, to) =
            s.split_once(':').ok_or_else(|| anyhow!("bad query `{s}` (expected FROM:TO)"))?;
        Ok(CliQuery::LastExit { from: parse_endpoint(from)?, to: parse_endpoint(to)? })
    }

    fn describe(&self, spec: &ChainSpec) -> String {
        match self {
            CliQuery::Hit { from, targets } => {
                let t: Vec<String> =
                    targets.iter().map(|e| e.resolve(spec).to_string()).collect();
                if t.len() == 1 {
                    format!("hit {}:{}", from.resolve(spec), t[0])
                } else {
                    format!("hit {}:{{{},{}}}", from.resolve(spec), t[0], t[1])
                }
            }
            CliQuery::LastExit { from, to } => {
                format!("last-exit {}:{}", from.resolve(spec), to.resolve(spec))
            }
        }
    }

    fn to_hitting_query(&self, spec: &ChainSpec) -> Result<HittingQuery> {
        match self {
            CliQuery::Hit { from, targets } => {
                let source = from.resolve(spec);
                let q = if targets.len() == 1 {
                    HittingQuery::one_sided(source, targets[0].resolve(spec))
                } else {
                    let (mut lo, mut hi) = (targets[0].resolve(spec), targets[1].resolve(spec));
                    if lo > hi {
                        std::mem::swap(&mut lo, &mut hi);
                    }
                    HittingQuery::two_sided(source, lo, hi)
                };
                q.validate(spec).map_err(anyhow::Error::from)?;
                Ok(q)
            }
            CliQuery::LastExit { .. } => bail!("last-exit queries have no moment formulas"),
        }
    }
}

fn ensure_out_dir(dir: &str) -> Result<PathBuf> {
    let path = PathBuf::from(dir);
    std::fs::create_dir_all(&path).with_context(|| format!("creating output dir {dir}"))?;
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    io::write_json(&dir.join(name), value)?;
    Ok(())
}

fn c_grid(th: &Thresholds) -> Vec<f64> {
    let n = (th.c_max / th.c_step).round() as usize;
    (0..=n).map(|i| i as f64 * th.c_step).collect()
}

fn budget(th: &Thresholds) -> OracleBudget {
    OracleBudget::default().with_states(th.oracle_states).with_steps(th.oracle_steps)
}

// ---------------------------------------------------------------- analyze

#[derive(Serialize)]
struct AnalyzeReport {
    drift: exact::DriftReport,
    /// `[x, H(x) - H(0)]` pairs
    energy_profile: Vec<(i64, f64)>,
    /// `[x, ln π(x)]` pairs
    log_pi: Vec<(i64, f64)>,
}

pub fn analyze(model: ModelArgs, common: CommonArgs, hit: Vec<String>) -> Result<i32> {
    let file = load_config(&common)?;
    let doc = model_document(&model, &file)?;
    let spec = doc.build()?;
    let m = invariant_measure(&spec)?;
    let thresholds = file.thresholds.clone().unwrap_or_default();
    let out = ensure_out_dir(&resolve_out_dir(common.out.clone(), file.out.clone()))?;

    let queries: Vec<CliQuery> = if hit.is_empty() {
        file.queries
            .clone()
            .unwrap_or_default()
            .iter()
            .filter_map(|q| q.strip_prefix("hit "))
            .map(CliQuery::parse_hit)
            .collect::<Result<Vec<_>>>()?
    } else {
        hit.iter().map(|s| CliQuery::parse_hit(s)).collect::<Result<Vec<_>>>()?
    };
    let queries = if queries.is_empty() {
        let mut qs = vec![
            CliQuery::Hit { from: Endpoint::RightEdge, targets: vec![Endpoint::State(0)] },
            CliQuery::Hit { from: Endpoint::State(0), targets: vec![Endpoint::RightEdge] },
        ];
        if spec.b() < 0 {
            qs.push(CliQuery::Hit { from: Endpoint::LeftEdge, targets: vec![Endpoint::State(0)] });
            qs.push(CliQuery::Hit { from: Endpoint::State(0), targets: vec![Endpoint::LeftEdge] });
        }
        qs
    } else {
        queries
    };

    let resolved = ResolvedConfig {
        command: "analyze".to_string(),
        model: doc.clone(),
        a_list: vec![spec.a()],
        queries: queries.iter().map(|q| q.describe(&spec)).collect(),
        samples: None,
        seed: 0,
        stream: 0,
        workers: None,
        step_mode: "exact".to_string(),
        allow_censoring: false,
        escape: false,
        thresholds: thresholds.clone(),
        out_dir: out.display().to_string(),
    };
    write_json(&out, "resolved_config.json", &resolved)?;

    let report = AnalyzeReport {
        drift: exact::drift_report(&spec, &m)?,
        energy_profile: {
            let prof = exact::energy_profile(&spec)?;
            (spec.b()..=spec.a()).map(|x| (x, prof.h(x))).collect()
        },
        log_pi: (spec.b()..=spec.a()).map(|x| (x, m.log_pi(x))).collect(),
    };
    write_json(&out, "drift_report.json", &report)?;

    let oracle_budget = budget(&thresholds);
    let mut rows = Vec::new();
    for q in &queries {
        let hq = q.to_hitting_query(&spec)?;
        let moments = exact::hitting_moments(&spec, &m, &hq)?;
        let (second, to) = match hq.target {
            Target::One(t) => (moments.second_moment, t.to_string()),
            Target::Two { lower, upper } => {
                let m2 = oracle::oracle_second_moment(&spec, hq.source, &[lower, upper], &oracle_budget)
                    .ok();
                (m2, format!("{{{lower},{upper}}}"))
            }
        };
        let variance = second.map(|m2| (m2 - moments.mean * moments.mean).max(0.0));
        rows.push(MomentsRow { from: hq.source, to, mean: moments.mean, second_moment: second, variance });
    }
    io::write_atomic(&out.join("moments.csv"), &io::moments_csv(&rows))?;

    // cut-off profile of the first query, exact law permitting
    let first = queries[0].to_hitting_query(&spec)?;
    if spec.len() <= oracle_budget.max_states {
        let law = oracle::oracle_law(&spec, first.source, &first.targets(), None, &oracle_budget)?;
        let mean = exact::hitting_moments(&spec, &m, &first)?.mean;
        if mean > 0.0 {
            let profile = diag::cutoff_profile(LawSource::Exact(&law), mean, &c_grid(&thresholds))?;
            io::write_atomic(&out.join("profile.csv"), &io::profile_csv(&profile))?;
        }
    }
    Ok(0)
}

// --------------------------------------------------------------- simulate

#[derive(Serialize)]
struct QueryVerdict {
    query: String,
    file: String,
    n: usize,
    censored: usize,
    sample_mean: f64,
    sample_std_err: f64,
    exact_mean: Option<f64>,
    /// which normalization the escape test used: "exact" or "sample"
    mean_source: String,
    escape: Option<diag::EscapeTest>,
}

#[derive(Serialize)]
struct Verdicts {
    queries: Vec<QueryVerdict>,
    reversal: Option<diag::ReversalVerdict>,
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    model: ModelArgs,
    common: CommonArgs,
    hit: Vec<String>,
    last_exit: Vec<String>,
    n: Option<usize>,
    seed: Option<u64>,
    stream: Option<u64>,
    workers: Option<usize>,
    skip_holds: bool,
    allow_censoring: bool,
) -> Result<i32> {
    let file = load_config(&common)?;
    let doc = model_document(&model, &file)?;
    let spec = doc.build()?;
    let m = invariant_measure(&spec)?;
    let thresholds = file.thresholds.clone().unwrap_or_default();
    let out = ensure_out_dir(&resolve_out_dir(common.out.clone(), file.out.clone()))?;

    let mut queries: Vec<CliQuery> =
        hit.iter().map(|s| CliQuery::parse_hit(s)).collect::<Result<Vec<_>>>()?;
    for s in &last_exit {
        queries.push(CliQuery::parse_last_exit(s)?);
    }
    if queries.is_empty() {
        for q in file.queries.clone().unwrap_or_default() {
            if let Some(rest) = q.strip_prefix("hit ") {
                queries.push(CliQuery::parse_hit(rest)?);
            } else if let Some(rest) = q.strip_prefix("last-exit ") {
                queries.push(CliQuery::parse_last_exit(rest)?);
            } else {
                bail!("bad query `{q}` in config (expected `hit ..` or `last-exit ..`)");
            }
        }
    }
    if queries.is_empty() {
        bail!("no queries: pass --hit and/or --last-exit");
    }
    let count = n.or(file.samples).ok_or_else(|| anyhow!("--n is required"))?;
    let seed = seed.or(file.seed).unwrap_or(0);
    let base_stream = stream.or(file.stream).unwrap_or(0);
    let workers = workers.or(file.workers);
    let mode = if skip_holds || file.step_mode.as_deref() == Some("skip_holds") {
        StepMode::SkipHolds
    } else {
        StepMode::Exact
    };
    let opts = SampleOptions {
        mode,
        censor: if allow_censoring.then_some(()).or(file.allow_censoring.filter(|&c| c).map(|_| ())).is_some() {
            mc::CensorPolicy::Allow
        } else {
            mc::CensorPolicy::Fail
        },
    };

    let resolved = ResolvedConfig {
        command: "simulate".to_string(),
        model: doc.clone(),
        a_list: vec![spec.a()],
        queries: queries.iter().map(|q| q.describe(&spec)).collect(),
        samples: Some(count),
        seed,
        stream: base_stream,
        workers,
        step_mode: match mode {
            StepMode::Exact => "exact".to_string(),
            StepMode::SkipHolds => "skip_holds".to_string(),
        },
        allow_censoring: opts.censor == mc::CensorPolicy::Allow,
        escape: false,
        thresholds: thresholds.clone(),
        out_dir: out.display().to_string(),
    };
    write_json(&out, "resolved_config.json", &resolved)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .context("building worker pool")?;

    let mut verdicts = Vec::new();
    let mut last_exit_sets: Vec<SampleSet> = Vec::new();
    for (i, q) in queries.iter().enumerate() {
        let policy = RngPolicy::new(seed, base_stream + i as u64);
        let set = pool.install(|| -> bdwell::Result<SampleSet> {
            match q {
                CliQuery::Hit { from, targets } => {
                    let from = from.resolve(&spec);
                    if targets.len() == 1 {
                        mc::sample_hit(&spec, from, targets[0].resolve(&spec), count, &policy, &opts)
                    } else {
                        let (mut lo, mut hi) =
                            (targets[0].resolve(&spec), targets[1].resolve(&spec));
                        if lo > hi {
                            std::mem::swap(&mut lo, &mut hi);
                        }
                        mc::sample_hit_two_sided(&spec, from, lo, hi, count, &policy, &opts)
                    }
                }
                CliQuery::LastExit { from, to } => mc::sample_last_exit(
                    &spec,
                    from.resolve(&spec),
                    to.resolve(&spec),
                    count,
                    &policy,
                    &opts,
                ),
            }
        })?;

        let file_name = if i == 0 { "samples.csv".to_string() } else { format!("samples_{i}.csv") };
        io::write_atomic(&out.join(&file_name), &io::samples_csv(&set))?;
        let meta_name =
            if i == 0 { "samples.meta.json".to_string() } else { format!("samples_{i}.meta.json") };
        write_json(&out, &meta_name, &set.meta)?;

        let (exact_mean, escape) = match q {
            CliQuery::Hit { .. } => {
                let hq = q.to_hitting_query(&spec)?;
                let exact_mean =
                    exact::hitting_moments(&spec, &m, &hq).ok().map(|mm| mm.mean).filter(|v| v.is_finite());
                let mean_used = exact_mean.unwrap_or_else(|| set.mean());
                let escape = (mean_used > 0.0)
                    .then(|| {
                        diag::escape_test(
                            LawSource::Samples(&set.values),
                            mean_used,
                            Some(diag::ks_one_sample_threshold(set.values.len(), thresholds.alpha)),
                        )
                    })
                    .transpose()?;
                (exact_mean, escape)
            }
            CliQuery::LastExit { .. } => {
                last_exit_sets.push(set.clone());
                (None, None)
            }
        };
        verdicts.push(QueryVerdict {
            query: q.describe(&spec),
            file: file_name,
            n: set.meta.count,
            censored: set.meta.censored,
            sample_mean: set.mean(),
            sample_std_err: set.std_err(),
            exact_mean,
            mean_source: if exact_mean.is_some() { "exact".into() } else { "sample".into() },
            escape,
        });
    }

    let reversal = if last_exit_sets.len() >= 2 {
        Some(diag::reversal_test(&last_exit_sets[0], &last_exit_sets[1], thresholds.alpha)?)
    } else {
        None
    };
    write_json(&out, "verdicts.json", &Verdicts { queries: verdicts, reversal })?;
    Ok(0)
}

// ------------------------------------------------------------------ sweep

#[derive(Serialize)]
struct EscapePoint {
    a: i64,
    ks_distance: Option<f64>,
    note: Option<String>,
}

#[derive(Serialize)]
struct TrendReport {
    family: String,
    a_list: Vec<i64>,
    sd_ratio_right: Vec<f64>,
    sd_ratio_left: Vec<Option<f64>>,
    q1_ratio: Vec<f64>,
    nv_right: Vec<f64>,
    nv_left: Vec<Option<f64>>,
    nv_loglog_slope: Option<f64>,
    escape: Option<Vec<EscapePoint>>,
    verdict_sd_right: String,
    verdict_sd_left: Option<String>,
    trend_final_max: f64,
}

pub fn sweep(
    model: ModelArgs,
    common: CommonArgs,
    a_list: Vec<i64>,
    b_rho: Option<f64>,
    escape: bool,
) -> Result<i32> {
    let file = load_config(&common)?;
    let a_list = if a_list.is_empty() { file.a_list.clone().unwrap_or_default() } else { a_list };
    if a_list.is_empty() {
        bail!("--a-list is required");
    }
    if model.b.is_some() {
        bail!("sweeps scale b with a; use --b-rho instead of --b");
    }
    let name = model
        .model
        .clone()
        .or_else(|| file.model.clone())
        .ok_or_else(|| anyhow!("sweeps need a zoo family: pass --model NAME"))?;
    let params = merged_params(&model, &file);
    let rule = match name.as_str() {
        "half_well" | "driftless" => BRule::HalfWell,
        _ => BRule::Proportional(b_rho.unwrap_or(1.0)),
    };
    let family = zoo::make_family(&name, &params, rule)?;
    let escape = escape || file.escape.unwrap_or(false);
    let thresholds = file.thresholds.clone().unwrap_or_default();
    let out = ensure_out_dir(&resolve_out_dir(common.out.clone(), file.out.clone()))?;

    let resolved = ResolvedConfig {
        command: "sweep".to_string(),
        model: ModelDocument {
            model: Some(name.clone()),
            a: a_list[0],
            b: None,
            params: materialize_params(&name, &params),
            p: None,
            q: None,
        },
        a_list: a_list.clone(),
        queries: vec![],
        samples: None,
        seed: 0,
        stream: 0,
        workers: None,
        step_mode: "exact".to_string(),
        allow_censoring: false,
        escape,
        thresholds: thresholds.clone(),
        out_dir: out.display().to_string(),
    };
    write_json(&out, "resolved_config.json", &resolved)?;

    let rows = exact::sd_condition_sweep(&family, &a_list)?;
    io::write_atomic(&out.join("sweep.csv"), &io::sweep_csv(&rows))?;

    let nv_rows = diag::variance_criterion_sweep(&family, &a_list)?;
    let escape_points = if escape {
        let oracle_budget = budget(&thresholds);
        let points = a_list
            .iter()
            .map(|&a| {
                let spec = family.spec(a)?;
                if spec.len() > oracle_budget.max_states {
                    return Ok(EscapePoint {
                        a,
                        ks_distance: None,
                        note: Some("beyond oracle state budget".to_string()),
                    });
                }
                let m = invariant_measure(&spec)?;
                let mean = exact::mean_hit_up(&spec, &m, 0, spec.a())?;
                let t_needed = (25.0 * mean).ceil() as usize;
                if t_needed > oracle_budget.max_steps {
                    return Ok(EscapePoint {
                        a,
                        ks_distance: None,
                        note: Some("beyond oracle step budget".to_string()),
                    });
                }
                let law = oracle::oracle_law(&spec, 0, &[spec.a()], Some(t_needed), &oracle_budget)?;
                Ok(EscapePoint {
                    a,
                    ks_distance: Some(diag::ks_exp_law(&law, mean)),
                    note: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Some(points)
    } else {
        None
    };

    let sd_right: Vec<f64> = rows.iter().map(|r| r.sd_ratio_right).collect();
    let sd_left: Vec<Option<f64>> = rows.iter().map(|r| r.sd_ratio_left).collect();
    let verdict = |vals: &[f64]| {
        if diag::trend_to_zero(vals, thresholds.trend_final_max) {
            "0-SD evidence".to_string()
        } else {
            "no-SD".to_string()
        }
    };
    let left_all: Option<Vec<f64>> = sd_left.iter().copied().collect();
    let trend = TrendReport {
        family: name,
        a_list: a_list.clone(),
        sd_ratio_right: sd_right.clone(),
        sd_ratio_left: sd_left,
        q1_ratio: rows.iter().map(|r| r.q1_ratio).collect(),
        nv_right: nv_rows.iter().map(|r| r.nv_right).collect(),
        nv_left: nv_rows.iter().map(|r| r.nv_left).collect(),
        nv_loglog_slope: diag::variance_sweep_slope(&nv_rows),
        escape: escape_points,
        verdict_sd_right: verdict(&sd_right),
        verdict_sd_left: left_all.map(|v| verdict(&v)),
        trend_final_max: thresholds.trend_final_max,
    };
    write_json(&out, "trend.json", &trend)?;
    Ok(0)
}

// ----------------------------------------------------------------- verify

pub fn verify(
    common: CommonArgs,
    seed: Option<u64>,
    chains: Option<usize>,
    eq: Option<String>,
    perturb: bool,
) -> Result<i32> {
    let file = load_config(&common)?;
    let seed = seed.or(file.seed).unwrap_or(20100713);
    let chains = chains.unwrap_or(40);
    let out = ensure_out_dir(&resolve_out_dir(common.out.clone(), file.out.clone()))?;

    if let Some(which) = eq {
        let finding = match which.as_str() {
            "rl74" => bdwell::verify::rl74_disambiguation(seed)?,
            "rl81" => bdwell::verify::rl81_disambiguation(seed)?,
            other => bail!("unknown disambiguation `{other}` (expected rl74 or rl81)"),
        };
        println!(
            "{}: adopted `{}` (worst rel err {:.3e}); rejected `{}` (worst rel err {:.3e}); decisive: {}",
            finding.name,
            finding.adopted,
            finding.adopted_worst_rel_err,
            finding.rejected,
            finding.rejected_worst_rel_err,
            finding.decisive
        );
        write_json(&out, &format!("verify_{}.json", finding.name), &finding)?;
        return Ok(if finding.decisive { 0 } else { 2 });
    }

    let resolved = ResolvedConfig {
        command: "verify".to_string(),
        model: ModelDocument { model: None, a: 0, b: None, params: None, p: None, q: None },
        a_list: vec![],
        queries: vec![],
        samples: Some(chains),
        seed,
        stream: 0,
        workers: None,
        step_mode: "exact".to_string(),
        allow_censoring: false,
        escape: false,
        thresholds: file.thresholds.clone().unwrap_or_default(),
        out_dir: out.display().to_string(),
    };
    write_json(&out, "resolved_config.json", &resolved)?;

    let report = bdwell::verify::run_verification(seed, chains, perturb)?;
    for check in &report.checks {
        let status = if check.pass { "PASS" } else { "FAIL" };
        match &check.detail {
            Some(d) => println!(
                "{status} {} (worst {:.3e} <= {:.1e}) — {d}",
                check.name, check.worst_rel_err, check.tol
            ),
            None => println!(
                "{status} {} (worst {:.3e} <= {:.1e})",
                check.name, check.worst_rel_err, check.tol
            ),
        }
    }
    write_json(&out, "verify.json", &report)?;
    Ok(if report.all_pass { 0 } else { 2 })
}
