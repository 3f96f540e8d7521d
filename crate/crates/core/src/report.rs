//! Suite runner and report rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::chart::{MetricChart, CATALOG};
use crate::geometry::{curvature_at, CurvatureRequest, GeometryError};
use crate::identities::{
    checkable, evaluate, measure, registry, Identity, IdentityCheckResult, Scope, Status, CONTROL_FRACTION,
};

/// Environment variable capping the worker count (0 or unset: automatic).
pub const THREADS_VAR: &str = "WEYL_FORGE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Catalog names, or `["all"]`.
    pub manifolds: Vec<String>,
    /// Identity ids or id prefixes, or `["all"]`.
    pub identities: Vec<String>,
    pub points_per_manifold: usize,
    pub seed: u64,
    pub tolerance_overrides: BTreeMap<String, f64>,
    /// Fixed metric jet order; `None` is automatic.
    pub jet_order: Option<usize>,
    /// Constant `c²` multiplying every metric.
    pub metric_scale: f64,
    pub output_format: Format,
    /// Where the report goes; not part of its content.
    #[serde(skip)]
    pub output_path: Option<String>,
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifolds: vec!["all".into()],
            identities: vec!["all".into()],
            points_per_manifold: 20,
            seed: 42,
            tolerance_overrides: BTreeMap::new(),
            jet_order: None,
            metric_scale: 1.0,
            output_format: Format::Json,
            output_path: None,
            deterministic: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown manifold `{name}`; valid names: {}", valid.join(", "))]
    UnknownManifold { name: String, valid: Vec<String> },
    #[error("unknown identity `{name}`; valid ids: {}", valid.join(", "))]
    UnknownIdentity { name: String, valid: Vec<String> },
    #[error("tolerance override for unknown identity `{0}`")]
    UnknownTolerance(String),
    #[error("tolerance for `{0}` must be a positive finite number")]
    BadTolerance(String),
    #[error("points per manifold must be at least 1")]
    NoPoints,
    #[error("jet order {order} is outside 2..=8")]
    JetOrderRange { order: usize },
    #[error("`{id}` needs metric jets of order {needed}, but --jet-order is {order}")]
    JetOrderTooLow { id: String, needed: usize, order: usize },
    #[error("metric scale must be positive and finite")]
    MetricScale,
    #[error("invalid {var}: {value}")]
    Threads { var: &'static str, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub version: &'static str,
    pub os: &'static str,
    pub arch: &'static str,
    /// Unix seconds; omitted under `--deterministic`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlSummary {
    pub points: usize,
    pub failing: usize,
    pub fraction: f64,
    pub expectation_met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitySummary {
    pub identity_id: String,
    pub tolerance: f64,
    pub pass: usize,
    pub fail: usize,
    pub not_applicable: usize,
    pub expected_fail: usize,
    /// Largest `residual_rel` over evaluated, non-control points.
    pub max_residual_rel: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub identities: Vec<IdentitySummary>,
    pub evaluated: usize,
    pub unexpected_failures: usize,
    pub unmet_controls: Vec<String>,
    pub errors: Vec<String>,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub environment: Environment,
    pub results: Vec<IdentityCheckResult>,
    pub summary: Summary,
}

fn resolve_manifolds(names: &[String], scale: f64) -> Result<Vec<MetricChart>, ConfigError> {
    let mut out: Vec<MetricChart> = Vec::new();
    for name in names {
        if name == "all" {
            for n in CATALOG {
                if !out.iter().any(|c| c.name == n) {
                    out.push(MetricChart::by_name(n).unwrap());
                }
            }
            continue;
        }
        let chart = MetricChart::by_name(name).map_err(|_| ConfigError::UnknownManifold {
            name: name.clone(),
            valid: CATALOG.iter().map(|s| s.to_string()).collect(),
        })?;
        if !out.iter().any(|c| c.name == chart.name) {
            out.push(chart);
        }
    }
    Ok(out.into_iter().map(|c| if scale == 1.0 { c } else { c.scaled(scale) }).collect())
}

fn resolve_identities(names: &[String]) -> Result<Vec<&'static Identity>, ConfigError> {
    let mut out: Vec<&'static Identity> = Vec::new();
    let mut push = |i: &'static Identity| {
        if !out.iter().any(|x| x.id == i.id) {
            out.push(i);
        }
    };
    for name in names {
        if name == "all" {
            checkable().for_each(&mut push);
            continue;
        }
        let prefix = format!("{name}.");
        let hits: Vec<_> = registry().iter().filter(|i| i.id == name || i.id.starts_with(&prefix)).collect();
        if hits.is_empty() {
            return Err(ConfigError::UnknownIdentity {
                name: name.clone(),
                valid: registry().iter().map(|i| i.id.to_string()).collect(),
            });
        }
        hits.into_iter().filter(|i| i.scope != Scope::Global).for_each(&mut push);
    }
    Ok(out)
}

/// Thread count from [`THREADS_VAR`]; `None` means automatic.
pub fn threads_from_env() -> Result<Option<usize>, ConfigError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(ConfigError::Threads { var: THREADS_VAR, value: v }),
        },
    }
}

/// Validates the configuration without evaluating anything.
pub fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    plan(cfg).map(|_| ())
}

struct Plan {
    charts: Vec<MetricChart>,
    identities: Vec<&'static Identity>,
    request: CurvatureRequest,
}

fn plan(cfg: &RunConfig) -> Result<Plan, ConfigError> {
    if cfg.points_per_manifold == 0 {
        return Err(ConfigError::NoPoints);
    }
    if !(cfg.metric_scale.is_finite() && cfg.metric_scale > 0.0) {
        return Err(ConfigError::MetricScale);
    }
    let charts = resolve_manifolds(&cfg.manifolds, cfg.metric_scale)?;
    let identities = resolve_identities(&cfg.identities)?;
    for (id, tol) in &cfg.tolerance_overrides {
        if crate::identities::by_id(id).is_none() {
            return Err(ConfigError::UnknownTolerance(id.clone()));
        }
        if !(tol.is_finite() && *tol > 0.0) {
            return Err(ConfigError::BadTolerance(id.clone()));
        }
    }
    // ∇W is always computed so the gates can be measured.
    let mut request = CurvatureRequest::depth(1);
    for i in &identities {
        let r = i.request();
        request.depth = request.depth.max(r.depth);
        request.laplacian = request.laplacian.max(r.laplacian);
        request.cotton_derivative |= r.cotton_derivative;
    }
    if let Some(order) = cfg.jet_order {
        if !(2..=8).contains(&order) {
            return Err(ConfigError::JetOrderRange { order });
        }
        let gate_needed = CurvatureRequest::depth(1).required_jet_order();
        if order < gate_needed {
            return Err(ConfigError::JetOrderTooLow { id: "hypotheses.declared".into(), needed: gate_needed, order });
        }
        if let Some(i) = identities.iter().find(|i| i.jets() > order) {
            return Err(ConfigError::JetOrderTooLow { id: i.id.into(), needed: i.jets(), order });
        }
        request.jet_order = Some(order);
    }
    Ok(Plan { charts, identities, request })
}

fn evaluate_point(
    plan: &Plan,
    cfg: &RunConfig,
    chart: &MetricChart,
    index: usize,
) -> Result<Vec<IdentityCheckResult>, GeometryError> {
    let p = chart.sample_point(cfg.seed, index as u64);
    let cp = curvature_at(chart, &p, &plan.request)?;
    let hyp = measure(&cp);
    Ok(plan
        .identities
        .iter()
        .map(|i| evaluate(i, chart, index, &cp, &hyp, cfg.tolerance_overrides.get(i.id).copied()))
        .collect())
}

/// Runs the suite. Configuration errors are returned before any evaluation.
pub fn run_suite(cfg: &RunConfig) -> Result<Report, ConfigError> {
    let plan = plan(cfg)?;
    let threads = threads_from_env()?;
    let jobs: Vec<(usize, usize)> =
        (0..plan.charts.len()).flat_map(|c| (0..cfg.points_per_manifold).map(move |p| (c, p))).collect();
    let work = || -> Vec<_> {
        jobs.par_iter()
            .map(|&(c, p)| (c, p, evaluate_point(&plan, cfg, &plan.charts[c], p)))
            .collect()
    };
    let outcomes = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ConfigError::Threads { var: THREADS_VAR, value: e.to_string() })?
            .install(work),
        None => work(),
    };

    let mut results = Vec::new();
    let mut errors = Vec::new();
    for (c, p, out) in outcomes {
        match out {
            Ok(r) => results.extend(r),
            Err(e) => errors.push(format!("{} point {p}: {e}", plan.charts[c].name)),
        }
    }
    results.sort_by(|a, b| {
        (a.identity_id.as_str(), a.manifold.as_str(), a.point_index).cmp(&(
            b.identity_id.as_str(),
            b.manifold.as_str(),
            b.point_index,
        ))
    });
    for r in &results {
        let nums = [r.residual_abs, r.scale, r.residual_rel];
        if nums.iter().chain(&r.point).any(|x| !x.is_finite()) {
            errors.push(format!(
                "non-finite value in {} on {} point {}: abs={} scale={} rel={}",
                r.identity_id, r.manifold, r.point_index, r.residual_abs, r.scale, r.residual_rel
            ));
        }
    }

    let summary = summarize(cfg, &plan.identities, &results, errors);
    let environment = Environment {
        version: env!("CARGO_PKG_VERSION"),
        os: std::env::consts::OS,
        arch: std::env::consts::ARCH,
        timestamp: (!cfg.deterministic).then(|| {
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
        }),
    };
    Ok(Report { config: cfg.clone(), environment, results, summary })
}

fn summarize(
    cfg: &RunConfig,
    identities: &[&'static Identity],
    results: &[IdentityCheckResult],
    errors: Vec<String>,
) -> Summary {
    let mut by_id: BTreeMap<&str, Vec<&IdentityCheckResult>> = BTreeMap::new();
    for r in results {
        by_id.entry(r.identity_id.as_str()).or_default().push(r);
    }
    let mut out = Vec::new();
    let mut unmet = Vec::new();
    let mut unexpected = 0;
    let mut evaluated = 0;
    for (id, rs) in &by_id {
        let ident = identities.iter().find(|i| i.id == *id).expect("selected identity");
        let count = |s: Status| rs.iter().filter(|r| r.status == s).count();
        let ctrl: Vec<_> = rs.iter().filter(|r| r.control).collect();
        let control = (!ctrl.is_empty()).then(|| {
            let failing = ctrl.iter().filter(|r| r.status == Status::ExpectedFail).count();
            let fraction = failing as f64 / ctrl.len() as f64;
            ControlSummary { points: ctrl.len(), failing, fraction, expectation_met: fraction >= CONTROL_FRACTION }
        });
        if control.as_ref().is_some_and(|c| !c.expectation_met) {
            unmet.push(id.to_string());
        }
        let fail = count(Status::Fail);
        unexpected += fail;
        evaluated += rs.iter().filter(|r| r.status != Status::NotApplicable).count();
        out.push(IdentitySummary {
            identity_id: id.to_string(),
            tolerance: cfg.tolerance_overrides.get(*id).copied().unwrap_or_else(|| ident.tolerance()),
            pass: count(Status::Pass) - ctrl.iter().filter(|r| r.status == Status::Pass).count(),
            fail,
            not_applicable: count(Status::NotApplicable),
            expected_fail: count(Status::ExpectedFail),
            max_residual_rel: rs
                .iter()
                .filter(|r| !r.control && r.status != Status::NotApplicable)
                .map(|r| r.residual_rel)
                .fold(0.0, f64::max),
            control,
        });
    }
    let exit_code = if unexpected == 0 && unmet.is_empty() && errors.is_empty() { 0 } else { 1 };
    Summary { identities: out, evaluated, unexpected_failures: unexpected, unmet_controls: unmet, errors, exit_code }
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "identity_id",
            "manifold",
            "x1",
            "x2",
            "x3",
            "x4",
            "residual_abs",
            "scale",
            "residual_rel",
            "status",
            "jet_order",
        ])
        .expect("in-memory write");
        for r in &self.results {
            let mut rec = vec![r.identity_id.clone(), r.manifold.clone()];
            rec.extend(r.point.iter().map(|x| x.to_string()));
            rec.extend([r.residual_abs, r.scale, r.residual_rel].iter().map(|x| format!("{x:e}")));
            rec.push(r.status.as_str().to_string());
            rec.push(r.jet_order_used.to_string());
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let s_ = &self.summary;
        for i in &s_.identities {
            let _ = write!(
                s,
                "{:<36} pass {:>4}  fail {:>4}  n/a {:>4}  max_rel {:.3e}  tol {:.0e}",
                i.identity_id, i.pass, i.fail, i.not_applicable, i.max_residual_rel, i.tolerance
            );
            if let Some(c) = &i.control {
                let verdict = if c.expectation_met { "met" } else { "NOT MET" };
                let _ = write!(s, "  control {}/{} failing ({verdict})", c.failing, c.points);
            }
            s.push('\n');
        }
        for r in self.results.iter().filter(|r| r.status == Status::Fail) {
            let _ = writeln!(
                s,
                "FAIL {} on {} point {} {:?}: rel {:.3e}",
                r.identity_id, r.manifold, r.point_index, r.point, r.residual_rel
            );
        }
        for e in &s_.errors {
            let _ = writeln!(s, "ERROR {e}");
        }
        for id in &s_.unmet_controls {
            let _ = writeln!(s, "CONTROL NOT MET {id}");
        }
        let _ = writeln!(
            s,
            "evaluated {}  unexpected failures {}  exit {}",
            s_.evaluated, s_.unexpected_failures, s_.exit_code
        );
        s
    }
}

/// `list manifolds` output.
pub fn list_manifolds() -> String {
    MetricChart::catalog().iter().map(|c| format!("{}  {}\n", c.name, c.summary)).collect()
}

/// `list identities` output.
pub fn list_identities() -> String {
    registry().iter().map(|i| i.listing() + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(manifolds: &[&str], identities: &[&str], points: usize) -> RunConfig {
        RunConfig {
            manifolds: manifolds.iter().map(|s| s.to_string()).collect(),
            identities: identities.iter().map(|s| s.to_string()).collect(),
            points_per_manifold: points,
            deterministic: true,
            ..Default::default()
        }
    }

    #[test]
    fn unknown_names_are_config_errors() {
        assert!(matches!(run_suite(&cfg(&["s5"], &["all"], 1)), Err(ConfigError::UnknownManifold { .. })));
        let err = run_suite(&cfg(&["s4"], &["nope"], 1)).unwrap_err();
        assert!(err.to_string().contains("bochner2.teo-sbf"));
    }

    #[test]
    fn low_jet_order_is_rejected() {
        let mut c = cfg(&["s4"], &["bochner2.teo-sbf"], 1);
        c.jet_order = Some(4);
        assert!(matches!(run_suite(&c), Err(ConfigError::JetOrderTooLow { .. })));
    }

    #[test]
    fn prefix_selects_family() {
        let ids = resolve_identities(&["key1".to_string()]).unwrap();
        assert_eq!(ids.len(), 3);
    }

    #[test]
    fn small_run_passes_and_orders_results() {
        let r = run_suite(&cfg(&["s4", "cp2"], &["algebra.www", "weyl.trace-free"], 2)).unwrap();
        assert_eq!(r.exit_code(), 0, "{}", r.to_text());
        assert_eq!(r.results.len(), 2 * 2 * 4);
        assert!(r.results.windows(2).all(|w| w[0].identity_id <= w[1].identity_id));
        assert!(r.render(Format::Csv).starts_with("identity_id,manifold,x1,x2,x3,x4,"));
    }
}
