//! The Archimedean polyhedron 𝒬_ℛ: convex hull of the orbit of the seed
//! vertex q, with edges in the two orbits of [q, q₁] and [q, q₂].

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::chambers::{least_rotation, minimal_period, ChamberComplex, ChamberError, SigmaSequence, SigmaViolation};
use crate::quadrature::bisect;
use crate::symmetry::{lex_key, GroupKind, Vec3, ELEMENT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArchError {
    #[error(transparent)]
    Chamber(#[from] ChamberError),
    #[error("mirrors Π₁ and Π₂ are not orthogonal; the seed square does not exist")]
    NotOrthogonal,
    #[error("no seed vertex on the S₃ arc")]
    NoSeed,
    #[error("[{0}, {1}] is not an edge of the polyhedron")]
    EdgeNotFound(usize, usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
pub enum NuViolation {
    #[error("the vertex sequence is empty")]
    Empty,
    #[error("vertex index {value} at position {index} is out of range")]
    OutOfRange { index: usize, value: usize },
    #[error("[i] positions {index} and {next} are not joined by an edge")]
    NotAnEdge { index: usize, next: usize },
    #[error("[ii] the sequence stays in the closure of face {face}")]
    InsideFace { face: usize },
    #[error("multiplicity must be at least 1")]
    ZeroMultiplicity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FaceKind {
    Square,
    /// Orbit of the polygon about ξ₁.
    F1,
    /// Orbit of the polygon about OV.
    F2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QrFace {
    pub kind: FaceKind,
    /// Cyclic order.
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct QrEdge {
    pub a: usize,
    pub b: usize,
    pub orbit: u8,
}

#[derive(Debug, Clone)]
pub struct ArchimedeanPolyhedron {
    pub kind: GroupKind,
    pub vertices: Vec<Vec3>,
    pub edges: Vec<QrEdge>,
    pub faces: Vec<QrFace>,
    pub q: Vec3,
    pub q1: Vec3,
    pub q2: Vec3,
    pub edge_length: f64,
    /// Vertex index of g·q for each reflection-group element g.
    pub element_vertex: Vec<usize>,
    edge_index: HashMap<(usize, usize), usize>,
}

/// Unique point of the arc S₃ ∩ S² equidistant from Π₁ and Π₂.
pub fn seed_vertex(complex: &ChamberComplex) -> Result<Vec3, ArchError> {
    let [n1, n2, _] = complex.normals;
    if n1.dot(&n2).abs() > 1e-12 {
        return Err(ArchError::NotOrthogonal);
    }
    let arc = |s: f64| (complex.e1 + (complex.e_v - complex.e1) * s).normalize();
    let s = bisect(|s| n1.dot(&arc(s)).abs() - n2.dot(&arc(s)).abs(), 0.0, 1.0, 1e-16).ok_or(ArchError::NoSeed)?;
    Ok(arc(s))
}

impl ArchimedeanPolyhedron {
    pub fn get(kind: GroupKind) -> Result<&'static ArchimedeanPolyhedron, ArchError> {
        static CELLS: [OnceLock<ArchimedeanPolyhedron>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        let complex = ChamberComplex::get(kind)?;
        let slot = match kind {
            GroupKind::Tetrahedral => 0,
            GroupKind::Octahedral => 1,
            _ => 2,
        };
        Ok(CELLS[slot].get_or_init(|| build_qr(complex).expect("seed exists")))
    }

    pub fn complex(&self) -> &'static ChamberComplex {
        ChamberComplex::get(self.kind).expect("polyhedral")
    }

    pub fn vertex_index(&self, p: &Vec3) -> Option<usize> {
        self.vertices.iter().position(|v| (v - p).amax() < ELEMENT_TOL)
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&QrEdge> {
        self.edge_index.get(&(a.min(b), a.max(b))).map(|&i| &self.edges[i])
    }

    /// Orbit label of the edge [a, b]: it is a side of some R·F_i.
    pub fn edge_orbit_class(&self, a: usize, b: usize) -> Result<u8, ArchError> {
        self.edge(a, b).ok_or(ArchError::EdgeNotFound(a, b))?;
        for f in &self.faces {
            let kind = match f.kind {
                FaceKind::F1 => 1,
                FaceKind::F2 => 2,
                FaceKind::Square => continue,
            };
            let k = f.vertices.len();
            for i in 0..k {
                let (x, y) = (f.vertices[i], f.vertices[(i + 1) % k]);
                if (x, y) == (a, b) || (y, x) == (a, b) {
                    return Ok(kind);
                }
            }
        }
        Err(ArchError::EdgeNotFound(a, b))
    }

    /// Image of vertex `v` under reflection-group element `g`.
    pub fn act_vertex(&self, g: usize, v: usize) -> usize {
        let p = self.complex().element(g) * self.vertices[v];
        self.vertex_index(&p).expect("orbit is invariant")
    }

    /// Cyclic face-size pattern around vertex `v`, normalized.
    pub fn vertex_configuration(&self, v: usize) -> Vec<usize> {
        let p = self.vertices[v];
        let t1 = {
            let a = if p.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            (a - p * a.dot(&p)).normalize()
        };
        let t2 = p.cross(&t1);
        let mut around: Vec<(f64, usize)> = self
            .faces
            .iter()
            .filter(|f| f.vertices.contains(&v))
            .map(|f| {
                let c = f.vertices.iter().map(|&i| self.vertices[i]).sum::<Vec3>() / f.vertices.len() as f64;
                let d = c - p;
                (d.dot(&t2).atan2(d.dot(&t1)), f.vertices.len())
            })
            .collect();
        around.sort_by(|a, b| a.0.total_cmp(&b.0));
        let sizes: Vec<usize> = around.into_iter().map(|x| x.1).collect();
        let mut rev = sizes.clone();
        rev.reverse();
        least_rotation(&sizes).min(least_rotation(&rev))
    }

    /// Minimum distance from the edge skeleton ℒ_ℛ to Γ.
    pub fn gamma_clearance(&self) -> f64 {
        let axes = self.complex().group.axes();
        self.edges
            .iter()
            .map(|e| axes.segment_gamma_distance(&self.vertices[e.a], &self.vertices[e.b]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks [i] and [ii]; keeps the starting vertex of the input.
    pub fn validate_nu(&self, nu: &[usize], n: usize) -> Result<NuSequence, NuViolation> {
        if nu.is_empty() {
            return Err(NuViolation::Empty);
        }
        if n == 0 {
            return Err(NuViolation::ZeroMultiplicity);
        }
        if let Some((index, &value)) = nu.iter().enumerate().find(|(_, &v)| v >= self.vertices.len()) {
            return Err(NuViolation::OutOfRange { index, value });
        }
        let l = nu.len();
        for k in 0..l {
            let next = (k + 1) % l;
            if self.edge(nu[k], nu[next]).is_none() {
                return Err(NuViolation::NotAnEdge { index: k, next });
            }
        }
        if let Some(face) = self.faces.iter().position(|f| nu.iter().all(|v| f.vertices.contains(v))) {
            return Err(NuViolation::InsideFace { face });
        }
        let period = minimal_period(nu);
        Ok(NuSequence { vertices: nu[..period].to_vec(), period, multiplicity: n * (l / period) })
    }

    /// (N₁, N₂) edge-orbit counts over the nK_ν edges of one period.
    pub fn edge_counts(&self, nu: &NuSequence) -> (usize, usize) {
        let seq = nu.unrolled();
        let l = seq.len();
        let mut counts = (0, 0);
        for k in 0..l {
            match self.edge(seq[k], seq[(k + 1) % l]).map(|e| e.orbit) {
                Some(1) => counts.0 += 1,
                Some(2) => counts.1 += 1,
                _ => {}
            }
        }
        counts
    }

    /// Chamber pair (h, h') whose shared face is crossed by the edge a → b.
    pub fn edge_chambers(&self, a: usize, b: usize) -> Option<(usize, usize)> {
        let complex = self.complex();
        for h in (0..self.element_vertex.len()).filter(|&h| self.element_vertex[h] == a) {
            for j in 0..2 {
                let h2 = complex.neighbor(h, j);
                if self.element_vertex[h2] == b {
                    return Some((h, h2));
                }
            }
        }
        None
    }

    /// σ of the homotopy c_R̃(s) = (1−s)R̃c + sR̃q, read backwards from ν.
    pub fn sigma_from_nu(&self, nu: &NuSequence) -> Result<SigmaSequence, SigmaViolation> {
        let seq = nu.unrolled();
        let l = seq.len();
        let mut out: Vec<usize> = Vec::with_capacity(2 * l);
        for k in 0..l {
            let (h, h2) = self.edge_chambers(seq[k], seq[(k + 1) % l]).expect("validated edge path");
            if out.last() != Some(&h) {
                out.push(h);
            }
            out.push(h2);
        }
        if out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        let reduced = reduce_cyclic(&out);
        self.complex().validate_sigma(&reduced, 1)
    }

    /// ν visited by the homotopy image of u^(σ,n).
    pub fn nu_from_sigma(&self, sigma: &SigmaSequence) -> Result<NuSequence, NuViolation> {
        let seq = sigma.unrolled();
        let mut out: Vec<usize> = Vec::with_capacity(seq.len());
        for &c in &seq {
            let v = self.element_vertex[c];
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
        while out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        self.validate_nu(&out, 1)
    }
}

/// Cyclic erasure of repeats D_h = D_(h+1) and backtracks D_(h−1) = D_(h+1).
pub fn reduce_cyclic(seq: &[usize]) -> Vec<usize> {
    let mut s: Vec<usize> = seq.to_vec();
    loop {
        let l = s.len();
        if l == 0 {
            return s;
        }
        if l == 1 {
            return s;
        }
        let mut changed = false;
        // repeats
        if let Some(i) = (0..l).find(|&i| s[i] == s[(i + 1) % l]) {
            s.remove((i + 1) % l);
            changed = true;
        } else if l == 2 {
            // D, D' cyclic: each entry has equal neighbours
            s.clear();
            changed = true;
        } else if let Some(h) = (0..l).find(|&h| s[(h + l - 1) % l] == s[(h + 1) % l]) {
            // D_(h-1), D_h, D_(h+1)=D_(h-1): drop D_h and D_(h+1)
            let a = h;
            let b = (h + 1) % l;
            let (hi, lo) = if a > b { (a, b) } else { (b, a) };
            s.remove(hi);
            s.remove(lo);
            changed = true;
        }
        if !changed {
            return s;
        }
    }
}

/// Periodic vertex sequence; `vertices` holds one minimal period in its given phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct NuSequence {
    pub vertices: Vec<usize>,
    pub period: usize,
    pub multiplicity: usize,
}

impl NuSequence {
    pub fn unrolled(&self) -> Vec<usize> {
        self.vertices.iter().cycle().take(self.period * self.multiplicity).copied().collect()
    }

    /// Translation-normalized form used for comparisons.
    pub fn canonical(&self) -> NuSequence {
        NuSequence { vertices: least_rotation(&self.vertices), ..self.clone() }
    }

    pub fn with_multiplicity(&self, n: usize) -> NuSequence {
        NuSequence { multiplicity: n, ..self.clone() }
    }
}

/// Builds 𝒬_ℛ for the complex's group.
pub fn build_qr(complex: &ChamberComplex) -> Result<ArchimedeanPolyhedron, ArchError> {
    let group = complex.group;
    let q = seed_vertex(complex)?;
    let q1 = complex.generators[0] * q;
    let q2 = complex.generators[1] * q;
    let mut vertices: Vec<Vec3> = Vec::new();
    for m in group.matrices() {
        let p = m * q;
        if !vertices.iter().any(|v| (v - p).amax() < ELEMENT_TOL) {
            vertices.push(p);
        }
    }
    vertices.sort_by(|a, b| lex_key(b).cmp(&lex_key(a)));
    let index = |p: &Vec3| vertices.iter().position(|v| (v - p).amax() < ELEMENT_TOL).expect("orbit point");
    let element_vertex: Vec<usize> = complex.chambers.iter().map(|c| index(&(c.element * q))).collect();

    let mut edges: Vec<QrEdge> = Vec::new();
    let mut edge_index = HashMap::new();
    for (orbit, qi) in [(1u8, q1), (2u8, q2)] {
        for m in group.matrices() {
            let a = index(&(m * q));
            let b = index(&(m * qi));
            let key = (a.min(b), a.max(b));
            if let std::collections::hash_map::Entry::Vacant(e) = edge_index.entry(key) {
                e.insert(edges.len());
                edges.push(QrEdge { a: key.0, b: key.1, orbit });
            }
        }
    }
    edges.sort_by_key(|e| (e.a, e.b));
    let edge_index: HashMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, e)| ((e.a, e.b), i)).collect();

    let mut faces: Vec<QrFace> = Vec::new();
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let axes = group.axes();
    let cyclic = |d: &Vec3| -> Vec<usize> { axes.axes[axes.find(d).expect("face axis")].elements.clone() };
    let square = [q, q1, complex.generators[1] * q1, q2];
    let f1: Vec<Vec3> = cyclic(&complex.e1).iter().map(|&g| group.matrix(g) * q).collect();
    let f2: Vec<Vec3> = cyclic(&complex.e_v).iter().map(|&g| group.matrix(g) * q).collect();
    for (kind, poly) in [(FaceKind::Square, square.to_vec()), (FaceKind::F1, f1), (FaceKind::F2, f2)] {
        for m in group.matrices() {
            let vs: Vec<usize> = poly.iter().map(|p| index(&(m * p))).collect();
            let mut key = vs.clone();
            key.sort_unstable();
            if !seen.contains(&key) {
                seen.push(key);
                faces.push(QrFace { kind, vertices: vs });
            }
        }
    }
    let edge_length = (q - q1).norm();
    Ok(ArchimedeanPolyhedron { kind: group.kind, vertices, edges, faces, q, q1, q2, edge_length, element_vertex, edge_index })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_configuration() {
        for (k, nv, ne, conf) in [
            (GroupKind::Tetrahedral, 12, 24, vec![3, 4, 3, 4]),
            (GroupKind::Octahedral, 24, 48, vec![3, 4, 4, 4]),
            (GroupKind::Icosahedral, 60, 120, vec![3, 4, 5, 4]),
        ] {
            let p = ArchimedeanPolyhedron::get(k).unwrap();
            assert_eq!(p.vertices.len(), nv);
            assert_eq!(p.edges.len(), ne);
            for v in 0..nv {
                assert_eq!(p.vertex_configuration(v), conf);
            }
        }
    }

    #[test]
    fn tetrahedral_edge_is_unit() {
        let p = ArchimedeanPolyhedron::get(GroupKind::Tetrahedral).unwrap();
        assert!((p.edge_length - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seed_edge_orbits() {
        let p = ArchimedeanPolyhedron::get(GroupKind::Octahedral).unwrap();
        let q = p.vertex_index(&p.q).unwrap();
        let q1 = p.vertex_index(&p.q1).unwrap();
        let q2 = p.vertex_index(&p.q2).unwrap();
        assert_eq!(p.edge_orbit_class(q, q1).unwrap(), 1);
        assert_eq!(p.edge_orbit_class(q, q2).unwrap(), 2);
        assert!(p.edge_orbit_class(q, q).is_err());
    }

    #[test]
    fn reduction_rules() {
        assert_eq!(reduce_cyclic(&[1, 2, 1, 3, 4]), vec![1, 3, 4]);
        assert_eq!(reduce_cyclic(&[1, 1, 2, 3]), vec![1, 2, 3]);
        assert!(reduce_cyclic(&[1, 2]).is_empty());
        let r = reduce_cyclic(&[5, 1, 2, 3, 2, 1]);
        assert_eq!(reduce_cyclic(&r), r);
    }

    #[test]
    fn square_face_walk_violates_ii() {
        let p = ArchimedeanPolyhedron::get(GroupKind::Tetrahedral).unwrap();
        let sq = p.faces.iter().find(|f| f.kind == FaceKind::Square).unwrap();
        let walk: Vec<usize> = sq.vertices.iter().chain(sq.vertices.iter()).copied().collect();
        assert!(matches!(p.validate_nu(&walk, 1), Err(NuViolation::InsideFace { .. })));
    }
}
