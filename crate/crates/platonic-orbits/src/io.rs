//! Trajectory files. CSV lists every particle (`t,particle,x,y,z`); JSON keeps
//! the generating particle plus run metadata. Both round-trip bit-exactly,
//! except that CSV times pin down T/m and hence T only to within a few ulps.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::ActionBreakdown;
use crate::loops::{GeneratingLoop, LoopError};
use crate::symmetry::{to_array, to_vec3, GroupKind, Vec3};

pub const CSV_HEADER: &str = "t,particle,x,y,z";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error("{0}")]
    Mismatch(String),
    #[error("no group has {0} elements")]
    GroupSize(usize),
    #[error("unknown trajectory format {0:?} (expected csv or json)")]
    Format(String),
}

fn csv_err(line: u64, message: impl Into<String>) -> IoError {
    IoError::Csv { line, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Self, IoError> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            other => Err(IoError::Format(other.unwrap_or("").to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrajectoryMeta {
    pub group: GroupKind,
    pub period: f64,
    pub m: usize,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionBreakdown>,
}

impl TrajectoryMeta {
    pub fn for_loop(lp: &GeneratingLoop, alpha: f64) -> Self {
        TrajectoryMeta { group: lp.group, period: lp.period, m: lp.m(), alpha, cone: None, action: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct JsonTrajectory {
    #[serde(flatten)]
    meta: TrajectoryMeta,
    samples: Vec<[f64; 3]>,
}

/// Group with `n` elements.
pub fn group_of_size(n: usize) -> Result<GroupKind, IoError> {
    [GroupKind::Tetrahedral, GroupKind::Octahedral, GroupKind::Icosahedral, GroupKind::Klein4, GroupKind::Binary]
        .into_iter()
        .find(|g| g.order() == n)
        .ok_or(IoError::GroupSize(n))
}

/// 17 significant digits, enough to recover every f64.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_string(lp: &GeneratingLoop) -> String {
    let mats: Vec<_> = lp.group.group().matrices().collect();
    let mut out = String::with_capacity(lp.m() * mats.len() * 80);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (j, u) in lp.samples.iter().enumerate() {
        let t = num(lp.time(j));
        for (p, r) in mats.iter().enumerate() {
            let x = *r * u;
            let _ = writeln!(out, "{t},{},{},{},{}", p + 1, num(x.x), num(x.y), num(x.z));
        }
    }
    out
}

/// Reads a CSV trajectory; `group` defaults to the one with N particles.
pub fn parse_csv(text: &str, group: Option<GroupKind>) -> Result<GeneratingLoop, IoError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| csv_err(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER.split(',').collect::<Vec<_>>() {
        return Err(csv_err(1, format!("header must be `{CSV_HEADER}`")));
    }
    let mut rows: Vec<(u64, f64, usize, Vec3)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<f64, IoError> {
            let s = rec.get(i).ok_or_else(|| csv_err(line, "expected 5 fields"))?;
            s.trim().parse::<f64>().map_err(|e| csv_err(line, format!("column {}: {e}", i + 1)))
        };
        let particle: usize = rec
            .get(1)
            .ok_or_else(|| csv_err(line, "expected 5 fields"))?
            .trim()
            .parse()
            .map_err(|e| csv_err(line, format!("particle: {e}")))?;
        rows.push((line, field(0)?, particle, Vec3::new(field(2)?, field(3)?, field(4)?)));
    }
    let n = rows.iter().skip(1).position(|r| r.2 == 1).map_or(rows.len(), |i| i + 1);
    let group = match group {
        Some(g) => g,
        None => group_of_size(n)?,
    };
    let n = group.order();
    if rows.is_empty() || rows.len() % n != 0 {
        return Err(csv_err(rows.last().map_or(1, |r| r.0), format!("row count {} is not a multiple of N = {n}", rows.len())));
    }
    let mats: Vec<_> = group.group().matrices().copied().collect();
    let m = rows.len() / n;
    let mut samples = Vec::with_capacity(m);
    for chunk in rows.chunks(n) {
        let u = chunk[0].3;
        for (p, (line, t, id, x)) in chunk.iter().enumerate() {
            if *id != p + 1 {
                return Err(csv_err(*line, format!("expected particle {}, found {id}", p + 1)));
            }
            if *t != chunk[0].1 {
                return Err(csv_err(*line, "time differs within one sample block"));
            }
            let dev = (mats[p] * u - x).norm();
            if dev > 1e-12 * u.norm().max(1.0) {
                return Err(csv_err(*line, format!("particle {id} is not R_{id} applied to particle 1 (off by {dev:e})")));
            }
        }
        samples.push(u);
    }
    let dt = if m > 1 { rows[n].1 } else { 0.0 };
    let period = recover_period(dt, m).ok_or_else(|| csv_err(rows[n.min(rows.len() - 1)].0, "times do not form a uniform grid from 0"))?;
    let lp = GeneratingLoop::new(group, period, samples)?;
    for (j, chunk) in rows.chunks(n).enumerate() {
        if lp.time(j) != chunk[0].1 {
            return Err(csv_err(chunk[0].0, format!("time {} breaks the uniform grid", chunk[0].1)));
        }
    }
    Ok(lp)
}

/// A period T with T/m == dt exactly.
fn recover_period(dt: f64, m: usize) -> Option<f64> {
    if !(dt > 0.0) {
        return None;
    }
    let guess = dt * m as f64;
    let mut lo = guess;
    let mut hi = guess;
    for _ in 0..8 {
        for c in [lo, hi] {
            if c / m as f64 == dt {
                return Some(c);
            }
        }
        lo = lo.next_down();
        hi = hi.next_up();
    }
    None
}

pub fn json_string(lp: &GeneratingLoop, meta: &TrajectoryMeta) -> Result<String, IoError> {
    let mut meta = meta.clone();
    meta.group = lp.group;
    meta.period = lp.period;
    meta.m = lp.m();
    if meta.action.as_ref().is_some_and(|a| !a.lambda_star.is_finite()) {
        meta.action = None;
    }
    let doc = JsonTrajectory { meta, samples: lp.samples.iter().map(to_array).collect() };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(text: &str) -> Result<(GeneratingLoop, TrajectoryMeta), IoError> {
    let doc: JsonTrajectory = serde_json::from_str(text)?;
    if doc.samples.len() != doc.meta.m {
        return Err(IoError::Mismatch(format!("m = {} but {} samples", doc.meta.m, doc.samples.len())));
    }
    let lp = GeneratingLoop::new(doc.meta.group, doc.meta.period, doc.samples.iter().map(to_vec3).collect())?;
    Ok((lp, doc.meta))
}

pub fn render(lp: &GeneratingLoop, meta: &TrajectoryMeta, format: Format) -> Result<String, IoError> {
    match format {
        Format::Csv => Ok(csv_string(lp)),
        Format::Json => json_string(lp, meta),
    }
}

pub fn export_trajectory(lp: &GeneratingLoop, meta: &TrajectoryMeta, path: &Path, format: Format) -> Result<(), IoError> {
    let text = render(lp, meta, format)?;
    std::fs::write(path, text).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

/// Reads a trajectory; CSV files carry no metadata.
pub fn import_trajectory(path: &Path, format: Format, group: Option<GroupKind>) -> Result<(GeneratingLoop, Option<TrajectoryMeta>), IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })?;
    match format {
        Format::Csv => Ok((parse_csv(&text, group)?, None)),
        Format::Json => {
            let (lp, meta) = parse_json(&text)?;
            Ok((lp, Some(meta)))
        }
    }
}
