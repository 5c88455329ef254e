//! Homotopy invariant (σ_u, n_u) of sampled loops, cone comparison and the
//! partial-collision loci r_k.

use serde::Serialize;
use thiserror::Error;

use crate::archimedean::reduce_cyclic;
use crate::chambers::{ChamberComplex, ChamberError, SigmaSequence, SigmaViolation, OPPOSITE_VERTEX};
use crate::loops::GeneratingLoop;
use crate::symmetry::{GroupKind, Vec3};

/// Relative band inside which a sample counts as lying on a mirror.
const PLANE_EPS: f64 = 1e-12;
/// Transversality threshold on |n·v| / |v|.
pub const TRANSVERSAL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error(transparent)]
    Chambers(#[from] ChamberError),
    #[error("loop meets axis {axis} of Γ near t = {time}")]
    OnGamma { time: f64, axis: usize },
    #[error("grid segment {index} lies in mirror plane {mirror}")]
    SegmentInMirror { index: usize, mirror: usize },
    #[error("loop is contractible inside a pair of chambers (trivial class)")]
    Trivial,
    #[error("chambers of the reduced sequence share pole {pole}, violating condition (C)")]
    ConditionC { pole: usize },
    #[error("reduced sequence rejected: {0}")]
    Sigma(SigmaViolation),
    #[error("loops belong to different groups ({0} and {1})")]
    GroupMismatch(GroupKind, GroupKind),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub time: f64,
    pub face: usize,
    pub from: usize,
    pub to: usize,
    pub transversal: bool,
    /// Smallest |n·v| / |v| over the grid segments meeting the crossing.
    pub normal_speed: f64,
}

/// Touch of a mirror without changing chamber.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contact {
    pub time: f64,
    pub chamber: usize,
    pub mirror: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingSequence {
    pub start_chamber: usize,
    pub crossings: Vec<Crossing>,
    pub contacts: Vec<Contact>,
}

impl CrossingSequence {
    /// Chamber itinerary, one entry per crossing (the chamber entered).
    pub fn itinerary(&self) -> Vec<usize> {
        self.crossings.iter().map(|c| c.to).collect()
    }
}

fn complex_of(lp: &GeneratingLoop) -> Result<&'static ChamberComplex, TopologyError> {
    Ok(ChamberComplex::get(lp.group)?)
}

/// Face crossings of the piecewise-linear interpolant over one period.
pub fn crossing_sequence(lp: &GeneratingLoop) -> Result<CrossingSequence, TopologyError> {
    let complex = complex_of(lp)?;
    let axes = complex.group.axes();
    let m = lp.m();
    let h = lp.dt();
    let scale = lp.sup_norm().max(1e-300);
    for j in 0..m {
        let (a, b) = (lp.sample(j as i64), lp.sample(j as i64 + 1));
        if axes.segment_gamma_distance(&a, &b) <= PLANE_EPS * scale {
            let (axis, _) = axes.nearest(&a).unwrap_or((0, 0.0));
            return Err(TopologyError::OnGamma { time: lp.time(j), axis });
        }
    }
    let normals: Vec<Vec3> = complex.mirrors.iter().map(|mi| mi.normal).collect();
    // pieces (start time, chamber) and mirror touches (time, mirror)
    let mut pieces: Vec<(f64, usize)> = Vec::new();
    let mut touches: Vec<(f64, usize)> = Vec::new();
    for j in 0..m {
        let a = lp.sample(j as i64);
        let b = lp.sample(j as i64 + 1);
        let mut cuts = vec![0.0, 1.0];
        for (i, n) in normals.iter().enumerate() {
            let da = n.dot(&a);
            let db = n.dot(&b);
            let za = da.abs() <= PLANE_EPS * a.norm();
            let zb = db.abs() <= PLANE_EPS * b.norm();
            if za && zb {
                return Err(TopologyError::SegmentInMirror { index: j, mirror: i });
            }
            if za {
                touches.push((lp.time(j), i));
            } else if !zb && da * db < 0.0 {
                let s = da / (da - db);
                cuts.push(s);
                touches.push((lp.time(j) + s * h, i));
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() <= PLANE_EPS);
        for w in cuts.windows(2) {
            let mid = a + (b - a) * (0.5 * (w[0] + w[1]));
            let c = complex.chamber_of(&mid).ok_or_else(|| {
                let (axis, _) = axes.nearest(&mid).unwrap_or((0, 0.0));
                TopologyError::OnGamma { time: lp.time(j) + w[0] * h, axis }
            })?;
            if pieces.last().map(|p| p.1) != Some(c) {
                pieces.push((lp.time(j) + w[0] * h, c));
            }
        }
    }
    if pieces.len() > 1 && pieces.first().map(|p| p.1) == pieces.last().map(|p| p.1) {
        pieces.pop();
    }
    let start_chamber = complex.chamber_of(&lp.samples[0]).unwrap_or(pieces[0].1);
    let mut crossings = Vec::new();
    if pieces.len() > 1 {
        for k in 0..pieces.len() {
            let (time, to) = pieces[k];
            let from = pieces[(k + pieces.len() - 1) % pieces.len()].1;
            let Some(face) = complex.face_between(from, to) else {
                let (axis, _) = axes.nearest(&lp.at(time)).unwrap_or((0, 0.0));
                return Err(TopologyError::OnGamma { time, axis });
            };
            let n = complex.mirrors[complex.faces[face].mirror].normal;
            let normal_speed = crossing_normal_speed(lp, time, &n);
            crossings.push(Crossing { time, face, from, to, transversal: normal_speed > TRANSVERSAL_TOL, normal_speed });
        }
    }
    crossings.sort_by(|a, b| a.time.total_cmp(&b.time));
    let tol = 1e-9 * h;
    let mut contacts = Vec::new();
    for (time, mirror) in touches {
        let crossed = crossings.iter().any(|c| (c.time - time).abs() <= tol && complex.faces[c.face].mirror == mirror);
        if !crossed {
            let chamber = complex.chamber_of(&lp.at(time + 0.5 * h)).unwrap_or(start_chamber);
            contacts.push(Contact { time, chamber, mirror });
        }
    }
    Ok(CrossingSequence { start_chamber, crossings, contacts })
}

/// min |n·v|/|v| over the segments touching time `t`.
fn crossing_normal_speed(lp: &GeneratingLoop, t: f64, n: &Vec3) -> f64 {
    let h = lp.dt();
    let s = t / h;
    let j = s.round();
    let segs: Vec<i64> = if (s - j).abs() <= 1e-9 { vec![j as i64 - 1, j as i64] } else { vec![s.floor() as i64] };
    let mut signs = Vec::new();
    let mut best = f64::INFINITY;
    for k in segs {
        let v = lp.sample(k + 1) - lp.sample(k);
        let r = n.dot(&v) / v.norm().max(1e-300);
        signs.push(r.signum());
        best = best.min(r.abs());
    }
    if signs.windows(2).any(|w| w[0] != w[1]) {
        0.0
    } else {
        best
    }
}

/// Reduced periodic chamber sequence (σ, n) of a chamber itinerary.
pub fn reduce_to_invariant(complex: &ChamberComplex, itinerary: &[usize]) -> Result<SigmaSequence, TopologyError> {
    let reduced = reduce_cyclic(itinerary);
    if reduced.len() < 3 {
        return Err(TopologyError::Trivial);
    }
    complex.validate_sigma(&reduced, 1).map_err(|e| match e {
        SigmaViolation::CommonAxis { pole } => TopologyError::ConditionC { pole },
        other => TopologyError::Sigma(other),
    })
}

/// Homotopy invariant of a loop.
pub fn invariant(lp: &GeneratingLoop) -> Result<SigmaSequence, TopologyError> {
    let complex = complex_of(lp)?;
    reduce_to_invariant(complex, &crossing_sequence(lp)?.itinerary())
}

/// Whether two loops lie in the same cone (equal invariants up to translation).
pub fn same_cone(a: &GeneratingLoop, b: &GeneratingLoop) -> Result<bool, TopologyError> {
    if a.group != b.group {
        return Err(TopologyError::GroupMismatch(a.group, b.group));
    }
    Ok(invariant(a)? == invariant(b)?)
}

/// Condition (C) in its (III) form: the closed chambers meet only at 0.
pub fn condition_c_check(complex: &ChamberComplex, chambers: &[usize]) -> bool {
    !chambers.is_empty() && complex.common_poles(chambers).is_empty()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Locus {
    pub k: usize,
    pub chamber: usize,
    pub entry_face: usize,
    pub exit_face: usize,
    pub third_face: usize,
    /// Pole spanning r_k.
    pub pole: usize,
    pub axis: usize,
    pub fold: usize,
    /// k̃ − k, when some later third face contains r_k.
    pub next_offset: Option<usize>,
    /// S^k̃ ≠ S^k.
    pub star: bool,
}

/// The sequence k → r_k over one period of σ.
pub fn collision_loci(complex: &ChamberComplex, sigma: &SigmaSequence) -> Vec<Locus> {
    let seq = sigma.unrolled();
    let l = seq.len();
    let kinds = |k: usize| {
        let d = seq[k % l];
        let e = complex.face_kind_between(d, seq[(k + l - 1) % l]).expect("validated σ");
        let x = complex.face_kind_between(d, seq[(k + 1) % l]).expect("validated σ");
        (e, x, 3 - e - x)
    };
    (0..l)
        .map(|k| {
            let d = seq[k];
            let ch = &complex.chambers[d];
            let (e, x, t) = kinds(k);
            let pole = ch.poles[OPPOSITE_VERTEX[e]];
            let third = ch.faces[t];
            let next_offset = (1..=l).find(|&h| {
                let dh = &complex.chambers[seq[(k + h) % l]];
                let (_, _, th) = kinds(k + h);
                dh.poles.contains(&pole) && dh.poles[OPPOSITE_VERTEX[th]] != pole
            });
            let star = next_offset.is_some_and(|h| {
                let (_, _, th) = kinds(k + h);
                complex.chambers[seq[(k + h) % l]].faces[th] != third
            });
            let p = &complex.poles[pole];
            Locus {
                k,
                chamber: d,
                entry_face: ch.faces[e],
                exit_face: ch.faces[x],
                third_face: third,
                pole,
                axis: p.axis,
                fold: p.fold,
                next_offset,
                star,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingAudit {
    pub count: usize,
    pub expected: usize,
    pub all_transversal: bool,
    pub min_normal_speed: f64,
    pub contacts: usize,
    pub matches: bool,
}

/// Compares the transversal crossing count with nK_σ.
pub fn crossing_count_audit(lp: &GeneratingLoop, sigma: &SigmaSequence) -> Result<CrossingAudit, TopologyError> {
    let seq = crossing_sequence(lp)?;
    let expected = sigma.period * sigma.multiplicity;
    let all_transversal = seq.crossings.iter().all(|c| c.transversal);
    let min_normal_speed = seq.crossings.iter().map(|c| c.normal_speed).fold(f64::INFINITY, f64::min);
    let count = seq.crossings.len();
    Ok(CrossingAudit {
        count,
        expected,
        all_transversal,
        min_normal_speed,
        contacts: seq.contacts.len(),
        matches: count == expected && all_transversal,
    })
}
