//! The reflection group ℛ̃ generated by the three mirrors bounding the
//! fundamental cone D = cone(e1, e_M, e_V), and its chamber decomposition.
//!
//! Chamber `i` is `g_i D` where `g_i` is reflection-group element `i`:
//! indices below N are the rotations (same order as the [`RotationGroup`]),
//! index `N + i` is `R_i R̃₁`.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::symmetry::{group_frame_vectors, matrix_distance, reflection, to_array, GroupKind, Mat3, RotationGroup, Vec3, ELEMENT_TOL};

/// Default half-width of the band around a mirror classified as "on the face".
pub const FACE_TOL: f64 = 1e-9;

/// Which vertex of the chamber each face type S₁, S₂, S₃ omits.
pub const OPPOSITE_VERTEX: [usize; 3] = [2, 0, 1];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChamberError {
    #[error("group {0} has no chamber complex")]
    Unsupported(GroupKind),
    #[error("cannot locate the zero vector")]
    ZeroVector,
    #[error("mirrors Π₁ and Π₂ are not orthogonal (cos = {0:.3e})")]
    NotOrthogonal(f64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
pub enum SigmaViolation {
    #[error("(I) the sequence is empty")]
    Empty,
    #[error("(I) chamber index {value} at position {index} is out of range")]
    OutOfRange { index: usize, value: usize },
    #[error("(II) chambers at positions {index} and {next} are not mirror images across a shared face")]
    NotAdjacent { index: usize, next: usize },
    #[error("(II) D_(k+1) = D_(k-1) at position {index}")]
    Backtrack { index: usize },
    #[error("(III) all chamber closures share the semiaxis of pole {pole}")]
    CommonAxis { pole: usize },
    #[error("multiplicity must be at least 1")]
    ZeroMultiplicity,
}

/// A semiaxis of Γ: vertex direction of the spherical triangulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pole {
    pub direction: [f64; 3],
    pub axis: usize,
    pub fold: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chamber {
    pub index: usize,
    pub element: Mat3,
    /// g·e1, g·e_M, g·e_V.
    pub vertices: [Vec3; 3],
    pub poles: [usize; 3],
    pub center: Vec3,
    /// Neighbour across face type S₁, S₂, S₃.
    pub neighbors: [usize; 3],
    pub faces: [usize; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub index: usize,
    /// Unit normal pointing into `chambers[0]`.
    pub normal: Vec3,
    /// 0, 1, 2 for the orbit of S₁, S₂, S₃.
    pub kind: usize,
    pub chambers: [usize; 2],
    pub mirror: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mirror {
    pub normal: Vec3,
    pub matrix: Mat3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Location {
    Chamber(usize),
    Face(usize),
    OnGamma { axis: usize },
}

#[derive(Debug, Clone)]
pub struct ChamberComplex {
    pub group: &'static RotationGroup,
    /// R̃₁, R̃₂, R̃₃.
    pub generators: [Mat3; 3],
    /// Unit normals of Π₁, Π₂, Π₃ oriented into D.
    pub normals: [Vec3; 3],
    pub e1: Vec3,
    pub e_m: Vec3,
    pub e_v: Vec3,
    pub chambers: Vec<Chamber>,
    pub faces: Vec<Face>,
    pub mirrors: Vec<Mirror>,
    pub poles: Vec<Pole>,
    signatures: HashMap<u32, usize>,
}

impl ChamberComplex {
    pub fn get(kind: GroupKind) -> Result<&'static ChamberComplex, ChamberError> {
        static CELLS: [OnceLock<ChamberComplex>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        let slot = match kind {
            GroupKind::Tetrahedral => 0,
            GroupKind::Octahedral => 1,
            GroupKind::Icosahedral => 2,
            GroupKind::Klein4 | GroupKind::Binary => return Err(ChamberError::Unsupported(kind)),
        };
        Ok(CELLS[slot].get_or_init(|| build_chamber_complex(kind.group()).expect("polyhedral group")))
    }

    pub fn len(&self) -> usize {
        self.chambers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chambers.is_empty()
    }

    /// Index of a reflection-group element.
    pub fn element_index(&self, m: &Mat3) -> Option<usize> {
        let n = self.group.order();
        if m.determinant() > 0.0 {
            self.group.find(m)
        } else {
            self.group.find(&(m * self.generators[0])).map(|i| n + i)
        }
    }

    pub fn element(&self, i: usize) -> &Mat3 {
        &self.chambers[i].element
    }

    /// Chamber reached from `c` through its face of type `kind`.
    pub fn neighbor(&self, c: usize, kind: usize) -> usize {
        self.chambers[c].neighbors[kind]
    }

    pub fn face_between(&self, a: usize, b: usize) -> Option<usize> {
        let ch = &self.chambers[a];
        (0..3).find(|&j| ch.neighbors[j] == b).map(|j| ch.faces[j])
    }

    /// Face type (0, 1, 2) shared by adjacent chambers.
    pub fn face_kind_between(&self, a: usize, b: usize) -> Option<usize> {
        (0..3).find(|&j| self.chambers[a].neighbors[j] == b)
    }

    pub fn face_mirror(&self, f: usize) -> &Mat3 {
        &self.mirrors[self.faces[f].mirror].matrix
    }

    /// Action of element `g` on chamber `c` (left multiplication).
    pub fn act(&self, g: usize, c: usize) -> usize {
        let m = self.element(g) * self.element(c);
        self.element_index(&m).expect("closed")
    }

    fn signature(&self, x: &Vec3) -> u32 {
        self.mirrors
            .iter()
            .enumerate()
            .fold(0u32, |s, (i, m)| if m.normal.dot(x) > 0.0 { s | (1 << i) } else { s })
    }

    /// Classify a nonzero point with the default face band.
    pub fn locate(&self, x: &Vec3) -> Result<Location, ChamberError> {
        self.locate_with(x, FACE_TOL)
    }

    pub fn locate_with(&self, x: &Vec3, tol: f64) -> Result<Location, ChamberError> {
        let r = x.norm();
        if r == 0.0 {
            return Err(ChamberError::ZeroVector);
        }
        let u = x / r;
        let near: Vec<usize> = (0..self.mirrors.len()).filter(|&i| self.mirrors[i].normal.dot(&u).abs() < tol).collect();
        if near.len() >= 2 {
            let (axis, _) = self.group.axes().nearest(&u).expect("axes");
            return Ok(Location::OnGamma { axis });
        }
        let mut sig = self.signature(&u);
        if let Some(&m) = near.first() {
            sig |= 1 << m;
            let a = self.signatures.get(&sig).copied();
            let b = self.signatures.get(&(sig & !(1 << m))).copied();
            if let (Some(a), Some(b)) = (a, b) {
                if let Some(f) = self.face_between(a, b) {
                    return Ok(Location::Face(f));
                }
            }
            let (axis, _) = self.group.axes().nearest(&u).expect("axes");
            return Ok(Location::OnGamma { axis });
        }
        match self.signatures.get(&sig) {
            Some(&c) => Ok(Location::Chamber(c)),
            None => {
                let (axis, _) = self.group.axes().nearest(&u).expect("axes");
                Ok(Location::OnGamma { axis })
            }
        }
    }

    /// Chamber containing `x`, ignoring the face band (exact sign test).
    pub fn chamber_of(&self, x: &Vec3) -> Option<usize> {
        self.signatures.get(&self.signature(x)).copied()
    }

    /// Poles shared by every chamber in the list.
    pub fn common_poles(&self, chambers: &[usize]) -> Vec<usize> {
        let Some(&first) = chambers.first() else { return Vec::new() };
        self.chambers[first]
            .poles
            .iter()
            .copied()
            .filter(|p| chambers.iter().all(|&c| self.chambers[c].poles.contains(p)))
            .collect()
    }

    /// Checks (I), (II), (III) and returns the normalized sequence.
    pub fn validate_sigma(&self, seq: &[usize], n: usize) -> Result<SigmaSequence, SigmaViolation> {
        if seq.is_empty() {
            return Err(SigmaViolation::Empty);
        }
        if n == 0 {
            return Err(SigmaViolation::ZeroMultiplicity);
        }
        if let Some((index, &value)) = seq.iter().enumerate().find(|(_, &c)| c >= self.len()) {
            return Err(SigmaViolation::OutOfRange { index, value });
        }
        let l = seq.len();
        for k in 0..l {
            let next = (k + 1) % l;
            if self.face_between(seq[k], seq[next]).is_none() {
                return Err(SigmaViolation::NotAdjacent { index: k, next });
            }
        }
        for k in 0..l {
            if seq[(k + l - 1) % l] == seq[(k + 1) % l] {
                return Err(SigmaViolation::Backtrack { index: k });
            }
        }
        if let Some(&pole) = self.common_poles(seq).first() {
            return Err(SigmaViolation::CommonAxis { pole });
        }
        let period = minimal_period(seq);
        Ok(SigmaSequence { chambers: least_rotation(&seq[..period]), period, multiplicity: n * (l / period) })
    }

    /// Definition 2: no run of 2|𝒞|+1 consecutive chambers around one semiaxis.
    pub fn is_simple(&self, sigma: &SigmaSequence) -> bool {
        self.wrapped_poles(&sigma.chambers).is_empty()
    }

    /// Poles around which the periodic sequence wraps completely.
    pub fn wrapped_poles(&self, period: &[usize]) -> Vec<usize> {
        let k = period.len();
        let mut out = Vec::new();
        for p in 0..self.poles.len() {
            let inside: Vec<bool> = period.iter().map(|&c| self.chambers[c].poles.contains(&p)).collect();
            if inside.iter().all(|&b| b) {
                // violates (III); treat as wrapping
                out.push(p);
                continue;
            }
            let need = 2 * self.poles[p].fold + 1;
            let mut run = 0usize;
            let mut best = 0usize;
            for i in 0..2 * k {
                if inside[i % k] {
                    run += 1;
                    best = best.max(run);
                } else {
                    run = 0;
                }
            }
            if best >= need {
                out.push(p);
            }
        }
        out
    }
}

/// Smallest K dividing `seq.len()` with `seq[i] = seq[i + K]`.
pub fn minimal_period<T: PartialEq>(seq: &[T]) -> usize {
    let l = seq.len();
    (1..=l).find(|&k| l % k == 0 && (0..l).all(|i| seq[i] == seq[(i + k) % l])).unwrap_or(l)
}

/// Lexicographically smallest cyclic rotation.
pub fn least_rotation<T: Ord + Clone>(seq: &[T]) -> Vec<T> {
    let l = seq.len();
    (0..l)
        .map(|s| seq[s..].iter().chain(seq[..s].iter()).cloned().collect::<Vec<T>>())
        .min()
        .unwrap_or_default()
}

/// A validated periodic chamber sequence; `chambers` holds one minimal period.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SigmaSequence {
    pub chambers: Vec<usize>,
    pub period: usize,
    pub multiplicity: usize,
}

impl SigmaSequence {
    /// The chambers of one full loop period (multiplicity times the minimal period).
    pub fn unrolled(&self) -> Vec<usize> {
        self.chambers.iter().cycle().take(self.period * self.multiplicity).copied().collect()
    }
}

/// Builds ℛ̃, D and the 2N chambers for a polyhedral group.
pub fn build_chamber_complex(group: &'static RotationGroup) -> Result<ChamberComplex, ChamberError> {
    if !group.kind.is_polyhedral() {
        return Err(ChamberError::Unsupported(group.kind));
    }
    let (e1, e_m, e_v) = group_frame_vectors(group.kind);
    let raw = [e1.cross(&e_m), e_m.cross(&e_v), e1.cross(&e_v)];
    let inward = [e_v, e1, e_m];
    let normals: [Vec3; 3] = std::array::from_fn(|j| {
        let n = raw[j].normalize();
        if n.dot(&inward[j]) > 0.0 {
            n
        } else {
            -n
        }
    });
    let cos12 = normals[0].dot(&normals[1]);
    if cos12.abs() > 1e-12 {
        return Err(ChamberError::NotOrthogonal(cos12));
    }
    let generators: [Mat3; 3] = std::array::from_fn(|j| reflection(&normals[j]));
    let n = group.order();
    let elements: Vec<Mat3> =
        group.matrices().copied().chain(group.matrices().map(|m| m * generators[0])).collect();
    let find = |m: &Mat3| -> usize {
        if m.determinant() > 0.0 {
            group.find(m).expect("closed")
        } else {
            n + group.find(&(m * generators[0])).expect("closed")
        }
    };

    // poles: distinct vertex directions
    let mut poles: Vec<Pole> = Vec::new();
    let mut pole_of = |d: &Vec3| -> usize {
        if let Some(i) = poles.iter().position(|p| (Vec3::from(p.direction) - d).norm() < ELEMENT_TOL) {
            return i;
        }
        let axis = group.axes().find(d).expect("chamber vertices lie on axes");
        poles.push(Pole { direction: to_array(d), axis, fold: group.axes().axes[axis].fold });
        poles.len() - 1
    };

    let mut chambers = Vec::with_capacity(2 * n);
    for (i, g) in elements.iter().enumerate() {
        let vertices = [g * e1, g * e_m, g * e_v];
        let poles_i = [pole_of(&vertices[0]), pole_of(&vertices[1]), pole_of(&vertices[2])];
        let center = (vertices[0] + vertices[1] + vertices[2]).normalize();
        let neighbors = std::array::from_fn(|j| find(&(g * generators[j])));
        chambers.push(Chamber { index: i, element: *g, vertices, poles: poles_i, center, neighbors, faces: [usize::MAX; 3] });
    }

    let mut mirrors: Vec<Mirror> = Vec::new();
    let mut faces: Vec<Face> = Vec::new();
    for a in 0..chambers.len() {
        for j in 0..3 {
            let b = chambers[a].neighbors[j];
            if chambers[a].faces[j] != usize::MAX {
                continue;
            }
            let normal = chambers[a].element * normals[j];
            let matrix = reflection(&normal);
            let mirror = match mirrors.iter().position(|m| matrix_distance(&m.matrix, &matrix) < ELEMENT_TOL) {
                Some(i) => i,
                None => {
                    mirrors.push(Mirror { normal: crate::symmetry::canonical_direction(&normal), matrix });
                    mirrors.len() - 1
                }
            };
            let index = faces.len();
            faces.push(Face { index, normal, kind: j, chambers: [a, b], mirror });
            chambers[a].faces[j] = index;
            let back = (0..3).find(|&k| chambers[b].neighbors[k] == a).expect("symmetric adjacency");
            chambers[b].faces[back] = index;
        }
    }

    let mut complex = ChamberComplex {
        group,
        generators,
        normals,
        e1,
        e_m,
        e_v,
        chambers,
        faces,
        mirrors,
        poles,
        signatures: HashMap::new(),
    };
    let sigs: Vec<(u32, usize)> = complex.chambers.iter().map(|c| (complex.signature(&c.center), c.index)).collect();
    complex.signatures = sigs.into_iter().collect();
    debug_assert_eq!(complex.signatures.len(), complex.chambers.len());
    Ok(complex)
}

/// Canonical interior point of a chamber.
pub fn chamber_center(complex: &ChamberComplex, c: usize) -> Vec3 {
    complex.chambers[c].center
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        for (k, n) in [(GroupKind::Tetrahedral, 24), (GroupKind::Octahedral, 48), (GroupKind::Icosahedral, 120)] {
            let c = ChamberComplex::get(k).unwrap();
            assert_eq!(c.len(), n);
            assert_eq!(c.faces.len(), 3 * n / 2);
        }
        assert_eq!(ChamberComplex::get(GroupKind::Tetrahedral).unwrap().mirrors.len(), 6);
        assert_eq!(ChamberComplex::get(GroupKind::Octahedral).unwrap().mirrors.len(), 9);
        assert_eq!(ChamberComplex::get(GroupKind::Icosahedral).unwrap().mirrors.len(), 15);
    }

    #[test]
    fn klein_has_no_complex() {
        assert!(ChamberComplex::get(GroupKind::Klein4).is_err());
    }

    #[test]
    fn fundamental_domain_neighbors_distinct() {
        let c = ChamberComplex::get(GroupKind::Octahedral).unwrap();
        let nb = c.chambers[0].neighbors;
        assert!(nb[0] != nb[1] && nb[1] != nb[2] && nb[0] != nb[2]);
        assert!(nb.iter().all(|&b| b != 0));
    }

    #[test]
    fn locate_basic() {
        let c = ChamberComplex::get(GroupKind::Tetrahedral).unwrap();
        assert_eq!(c.locate(&c.chambers[5].center).unwrap(), Location::Chamber(5));
        assert!(matches!(c.locate(&c.e1).unwrap(), Location::OnGamma { .. }));
        let f = &c.faces[7];
        let [a, b] = f.chambers;
        let mid = (c.chambers[a].center + c.chambers[b].center) * 0.5;
        assert_eq!(c.locate(&mid).unwrap(), Location::Face(7));
        assert_eq!(c.locate(&Vec3::zeros()), Err(ChamberError::ZeroVector));
    }

    #[test]
    fn sigma_checks() {
        let c = ChamberComplex::get(GroupKind::Tetrahedral).unwrap();
        let d = 0;
        let e = c.neighbor(d, 0);
        assert!(matches!(c.validate_sigma(&[d, e, d, e], 1), Err(SigmaViolation::Backtrack { .. })));
        // fan around e1: alternate S1 and S3 crossings
        let mut fan = vec![0usize];
        for i in 0..5 {
            let last = *fan.last().unwrap();
            fan.push(c.neighbor(last, if i % 2 == 0 { 0 } else { 2 }));
        }
        assert_eq!(c.neighbor(*fan.last().unwrap(), 2), 0);
        assert!(matches!(c.validate_sigma(&fan, 1), Err(SigmaViolation::CommonAxis { .. })));
    }

    #[test]
    fn rotation_normalization() {
        assert_eq!(least_rotation(&[3, 1, 2, 1, 0]), vec![0, 3, 1, 2, 1]);
        assert_eq!(minimal_period(&[1, 2, 1, 2]), 2);
        assert_eq!(minimal_period(&[1, 2, 3]), 3);
    }
}
