//! JSON run configuration: build a test loop, optionally minimize, audit the
//! invariant and export.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{self, analytic_test_action, ActionBreakdown, ActionError};
use crate::archimedean::{ArchError, ArchimedeanPolyhedron, NuViolation};
use crate::catalog::{self, CatalogError};
use crate::chambers::{ChamberComplex, ChamberError, SigmaSequence, SigmaViolation};
use crate::io::{self, Format, IoError, TrajectoryMeta};
use crate::loops::{compatible_grid, loop_from_nu, loop_from_sigma, ConeDescriptor, ConeKind, GeneratingLoop, LoopError, Topology};
use crate::optimizer::{gradient_flow, FlowError, FlowParams, Termination};
use crate::symmetry::GroupKind;
use crate::topology::{self, CrossingAudit, TopologyError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// A catalog id or an explicit closed path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConeSpec {
    Id(String),
    Nu {
        nu: Vec<usize>,
    },
    Sigma {
        sigma: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Action,
    Minimize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    pub group: Option<GroupKind>,
    pub cone: ConeSpec,
    #[serde(default = "one")]
    pub n: usize,
    /// Lower bound on the grid size m; rounded up to a compatible size.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "unit")]
    pub period: f64,
    /// Overrides `flow.alpha`.
    #[serde(default = "unit")]
    pub alpha: f64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub flow: FlowParams,
    #[serde(default)]
    pub output: Outputs,
}

fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}
fn default_grid() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FlowSummary {
    pub initial_action: f64,
    pub final_action: f64,
    pub steps: usize,
    pub termination: Termination,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub group: GroupKind,
    pub cone: String,
    pub n: usize,
    pub m: usize,
    pub period: f64,
    pub alpha: f64,
    /// Closed-form min_λ A(λv), when the cone has a ν-path and α = 1.
    pub analytic_action: Option<f64>,
    /// Discrete action of the λ*-scaled test loop.
    pub test_action: ActionBreakdown,
    pub flow: Option<FlowSummary>,
    pub final_action: ActionBreakdown,
    /// σ-invariant and crossing audit; absent for groups without chambers.
    pub invariant: Option<SigmaSequence>,
    pub invariant_preserved: bool,
    pub crossings: Option<CrossingAudit>,
    pub written: Vec<PathBuf>,
}

/// 1-based line of the first occurrence of `"key"`, or 1.
fn line_of_key(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    let invalid = |key: &str, message: String| ConfigError::Invalid { line: line_of_key(text, key), message };
    if cfg.n == 0 {
        return Err(invalid("n", "n must be at least 1".into()));
    }
    if !(cfg.period > 0.0 && cfg.period.is_finite()) {
        return Err(invalid("period", format!("period must be positive, got {}", cfg.period)));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha.is_finite()) {
        return Err(invalid("alpha", format!("alpha must be positive, got {}", cfg.alpha)));
    }
    let mut flow = cfg.flow;
    flow.alpha = cfg.alpha;
    flow.validate().map_err(|e| invalid("flow", e.to_string()))?;
    match &cfg.cone {
        ConeSpec::Id(id) if id.eq_ignore_ascii_case("K4") => {
            if cfg.group.is_some_and(|g| g != GroupKind::Klein4) {
                return Err(invalid("group", "cone K4 belongs to group K4".into()));
            }
            if cfg.n != 1 {
                return Err(invalid("n", "cone K4 is only defined for n = 1".into()));
            }
        }
        ConeSpec::Id(id) => {
            let e = catalog::entry(id).map_err(|e| invalid("cone", e.to_string()))?;
            if cfg.group.is_some_and(|g| g != e.group) {
                return Err(invalid("group", format!("group {} does not match cone {id} (group {})", cfg.group.unwrap().symbol(), e.group.symbol())));
            }
        }
        ConeSpec::Nu { .. } | ConeSpec::Sigma { .. } => {
            if !cfg.group.is_some_and(|g| g.is_polyhedral()) {
                return Err(invalid("group", "an explicit ν or σ needs a polyhedral group T, O or I".into()));
            }
        }
    }
    Ok(cfg)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Test loop, cone and closed-form action for the configured cone.
fn build(cfg: &RunConfig, text: &str) -> Result<(GeneratingLoop, ConeDescriptor, String, Option<f64>), ConfigError> {
    let invalid = |key: &str, message: String| ConfigError::Invalid { line: line_of_key(text, key), message };
    let closed = |poly: &ArchimedeanPolyhedron, nu| -> Result<Option<f64>, ConfigError> {
        Ok(if cfg.alpha == 1.0 { Some(analytic_test_action(poly, nu, cfg.period)?) } else { None })
    };
    match &cfg.cone {
        ConeSpec::Id(id) if id.eq_ignore_ascii_case("K4") => {
            let (lp, cone) = resolve_cone(id, cfg.n, cfg.period, cfg.grid, cfg.alpha)?;
            Ok((lp, cone, "K4".into(), None))
        }
        ConeSpec::Id(id) => {
            let e = catalog::entry(id)?;
            let analytic = closed(e.polyhedron(), &e.nu(cfg.n)?)?;
            let (lp, cone) = resolve_cone(id, cfg.n, cfg.period, cfg.grid, cfg.alpha)?;
            Ok((lp, cone, id.clone(), analytic))
        }
        ConeSpec::Nu { nu } => {
            let g = cfg.group.expect("validated");
            let poly = ArchimedeanPolyhedron::get(g).map_err(|e| invalid("group", e.to_string()))?;
            let seq = poly.validate_nu(nu, cfg.n).map_err(|e: NuViolation| invalid("nu", e.to_string()))?;
            let analytic = closed(poly, &seq)?;
            let m = compatible_grid(cfg.grid, &[2 * seq.unrolled().len()]);
            let lp = loop_from_nu(poly, &seq, cfg.period, m)?;
            let cone = ConeDescriptor { group: g, kind: ConeKind::Free, topology: Some(Topology::Nu(seq)), symmetry: None };
            Ok((lp, cone, format!("{}.nu{:?}", g.symbol(), nu), analytic))
        }
        ConeSpec::Sigma { sigma } => {
            let g = cfg.group.expect("validated");
            let complex = ChamberComplex::get(g).map_err(|e: ChamberError| invalid("group", e.to_string()))?;
            let seq = complex.validate_sigma(sigma, cfg.n).map_err(|e: SigmaViolation| invalid("sigma", e.to_string()))?;
            let poly = ArchimedeanPolyhedron::get(g).map_err(|e: ArchError| invalid("group", e.to_string()))?;
            let analytic = match poly.nu_from_sigma(&seq) {
                Ok(nu) => closed(poly, &nu)?,
                Err(_) => None,
            };
            let m = compatible_grid(cfg.grid, &[2 * seq.unrolled().len()]);
            let lp = loop_from_sigma(complex, &seq, cfg.period, m)?;
            let cone = ConeDescriptor { group: g, kind: ConeKind::Free, topology: Some(Topology::Sigma(seq)), symmetry: None };
            Ok((lp, cone, format!("{}.sigma{:?}", g.symbol(), sigma), analytic))
        }
    }
}

/// Runs a parsed configuration; relative output paths resolve against `base`.
pub fn execute(cfg: &RunConfig, text: &str, base: &Path) -> Result<RunReport, ConfigError> {
    let (lp0, cone, label, analytic_action) = build(cfg, text)?;
    let b0 = action::action(&lp0, cfg.alpha)?;
    let lp0 = lp0.scaled(b0.lambda_star);
    let test_action = action::action(&lp0, cfg.alpha)?;
    let has_chambers = lp0.group.is_polyhedral();
    let expected = if has_chambers { Some(topology::invariant(&lp0)?) } else { None };
    let (lp, flow) = match cfg.mode {
        Mode::Action => (lp0, None),
        Mode::Minimize => {
            let params = FlowParams { alpha: cfg.alpha, ..cfg.flow };
            let tr = gradient_flow(&lp0, Some(&cone), &params)?;
            let summary = FlowSummary {
                initial_action: tr.records.first().map_or(test_action.total, |r| r.action),
                final_action: tr.final_action,
                steps: tr.steps,
                termination: tr.termination.clone(),
                monotone: tr.monotone(),
            };
            (tr.final_loop, Some(summary))
        }
    };
    let final_action = action::action(&lp, cfg.alpha)?;
    let invariant = if has_chambers { Some(topology::invariant(&lp)?) } else { None };
    let crossings = match &invariant {
        Some(s) => Some(topology::crossing_count_audit(&lp, s)?),
        None => None,
    };
    let mut report = RunReport {
        group: lp.group,
        cone: label.clone(),
        n: cfg.n,
        m: lp.m(),
        period: cfg.period,
        alpha: cfg.alpha,
        analytic_action,
        test_action,
        flow,
        final_action,
        invariant_preserved: invariant == expected,
        invariant,
        crossings,
        written: Vec::new(),
    };
    let meta = TrajectoryMeta { cone: Some(label), action: Some(final_action), ..TrajectoryMeta::for_loop(&lp, cfg.alpha) };
    for (path, format) in [(&cfg.output.csv, Format::Csv), (&cfg.output.json, Format::Json)] {
        if let Some(p) = path {
            let p = base.join(p);
            io::export_trajectory(&lp, &meta, &p, format)?;
            report.written.push(p);
        }
    }
    if let Some(p) = &cfg.output.report {
        let p = base.join(p);
        report.written.push(p.clone());
        let text = serde_json::to_string_pretty(&report).map_err(IoError::from)? + "\n";
        std::fs::write(&p, text).map_err(|source| IoError::Io { path: p.clone(), source })?;
    }
    Ok(report)
}

/// Reads, validates and executes a configuration file.
pub fn run_config(path: &Path) -> Result<RunReport, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    let cfg = parse_config(&text)?;
    execute(&cfg, &text, path.parent().unwrap_or(Path::new(".")))
}

/// λ*-scaled test loop and cone for a catalog id or `K4`.
pub fn resolve_cone(id: &str, n: usize, period: f64, min_m: usize, alpha: f64) -> Result<(GeneratingLoop, ConeDescriptor), ConfigError> {
    let (lp, cone) = if id.eq_ignore_ascii_case("K4") {
        let cone = ConeDescriptor::k4();
        let div = cone.symmetry.as_ref().map_or(1, |s| s.grid_divisor());
        let m = compatible_grid(min_m, &[8 * n, div]);
        (crate::loops::k4_test_loop(crate::loops::k4_optimal_radius(period), period, m)?, cone)
    } else {
        let e = catalog::entry(id)?;
        if n == 1 {
            (e.test_loop(1, period, min_m)?, e.descriptor(1)?)
        } else {
            let nu = e.nu(n)?;
            let cone = ConeDescriptor { topology: Some(Topology::Nu(nu.clone())), symmetry: None, ..e.descriptor(1)? };
            (loop_from_nu(e.polyhedron(), &nu, period, e.grid(n, min_m))?, cone)
        }
    };
    let b = action::action(&lp, alpha)?;
    Ok((lp.scaled(b.lambda_star), cone))
}
