//! Rotation groups of the Platonic solids, their axes and the reference
//! frames used to define the cones of symmetric loops.
//!
//! Every group is expressed in the frame of its defining solid (tetrahedron,
//! cube, dodecahedron): `e1` points to a face centre, the midpoint `M` of one
//! side of that face lies in `{x3 = 0, x2 > 0}` and the endpoint `V` of the
//! side with `x3 > 0` is the reference vertex.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Max-abs distance below which two matrices are the same element.
pub const ELEMENT_TOL: f64 = 1e-9;

const PHI: f64 = 1.618_033_988_749_895;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("unknown group `{0}` (expected T, O, I, K4 or C2)")]
    UnknownGroup(String),
    #[error("unknown solid `{0}` (expected T, C, O, D or I)")]
    UnknownSolid(String),
    #[error("conjugation of the identity is not part of the bijection on R \\ {{I}}")]
    IdentityConjugation,
    #[error("matrix is not a reflection (det {det:.3e}, involution defect {defect:.3e})")]
    NotAReflection { det: f64, defect: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupKind {
    #[serde(rename = "T")]
    Tetrahedral,
    #[serde(rename = "O")]
    Octahedral,
    #[serde(rename = "I")]
    Icosahedral,
    /// Half-turns about the three coordinate axes (the four-body problem).
    #[serde(rename = "K4")]
    Klein4,
    /// A single half-turn about ξ₃ (the two-body problem).
    #[serde(rename = "C2")]
    Binary,
}

impl GroupKind {
    pub const POLYHEDRAL: [GroupKind; 3] = [GroupKind::Tetrahedral, GroupKind::Octahedral, GroupKind::Icosahedral];

    pub fn symbol(self) -> &'static str {
        match self {
            GroupKind::Tetrahedral => "T",
            GroupKind::Octahedral => "O",
            GroupKind::Icosahedral => "I",
            GroupKind::Klein4 => "K4",
            GroupKind::Binary => "C2",
        }
    }

    pub fn order(self) -> usize {
        match self {
            GroupKind::Tetrahedral => 12,
            GroupKind::Octahedral => 24,
            GroupKind::Icosahedral => 60,
            GroupKind::Klein4 => 4,
            GroupKind::Binary => 2,
        }
    }

    pub fn defining_solid(self) -> Option<Solid> {
        match self {
            GroupKind::Tetrahedral => Some(Solid::Tetrahedron),
            GroupKind::Octahedral => Some(Solid::Cube),
            GroupKind::Icosahedral => Some(Solid::Dodecahedron),
            GroupKind::Klein4 | GroupKind::Binary => None,
        }
    }

    pub fn is_polyhedral(self) -> bool {
        self.defining_solid().is_some()
    }

    /// Shared, lazily built instance.
    pub fn group(self) -> &'static RotationGroup {
        static CELLS: [OnceLock<RotationGroup>; 5] = [const { OnceLock::new() }; 5];
        let slot = match self {
            GroupKind::Tetrahedral => 0,
            GroupKind::Octahedral => 1,
            GroupKind::Icosahedral => 2,
            GroupKind::Klein4 => 3,
            GroupKind::Binary => 4,
        };
        CELLS[slot].get_or_init(|| build_rotation_group(self))
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for GroupKind {
    type Err = GroupError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "T" | "t" => Ok(GroupKind::Tetrahedral),
            "O" | "o" | "C" => Ok(GroupKind::Octahedral),
            "I" | "i" | "D" => Ok(GroupKind::Icosahedral),
            "K4" | "k4" => Ok(GroupKind::Klein4),
            "C2" | "c2" => Ok(GroupKind::Binary),
            other => Err(GroupError::UnknownGroup(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Solid {
    #[serde(rename = "T")]
    Tetrahedron,
    #[serde(rename = "C")]
    Cube,
    #[serde(rename = "O")]
    Octahedron,
    #[serde(rename = "D")]
    Dodecahedron,
    #[serde(rename = "I")]
    Icosahedron,
}

impl Solid {
    pub const ALL: [Solid; 5] = [Solid::Tetrahedron, Solid::Cube, Solid::Octahedron, Solid::Dodecahedron, Solid::Icosahedron];

    pub fn symbol(self) -> &'static str {
        match self {
            Solid::Tetrahedron => "T",
            Solid::Cube => "C",
            Solid::Octahedron => "O",
            Solid::Dodecahedron => "D",
            Solid::Icosahedron => "I",
        }
    }

    pub fn group(self) -> GroupKind {
        match self {
            Solid::Tetrahedron => GroupKind::Tetrahedral,
            Solid::Cube | Solid::Octahedron => GroupKind::Octahedral,
            Solid::Dodecahedron | Solid::Icosahedron => GroupKind::Icosahedral,
        }
    }

    /// Vertices per face.
    pub fn h(self) -> usize {
        match self {
            Solid::Cube => 4,
            Solid::Dodecahedron => 5,
            _ => 3,
        }
    }

    /// Number of faces.
    pub fn k(self) -> usize {
        match self {
            Solid::Tetrahedron => 4,
            Solid::Cube => 6,
            Solid::Octahedron => 8,
            Solid::Dodecahedron => 12,
            Solid::Icosahedron => 20,
        }
    }

    fn dual(self) -> Solid {
        match self {
            Solid::Tetrahedron => Solid::Tetrahedron,
            Solid::Cube => Solid::Octahedron,
            Solid::Octahedron => Solid::Cube,
            Solid::Dodecahedron => Solid::Icosahedron,
            Solid::Icosahedron => Solid::Dodecahedron,
        }
    }
}

impl fmt::Display for Solid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Solid {
    type Err = GroupError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "T" => Ok(Solid::Tetrahedron),
            "C" => Ok(Solid::Cube),
            "O" => Ok(Solid::Octahedron),
            "D" => Ok(Solid::Dodecahedron),
            "I" => Ok(Solid::Icosahedron),
            other => Err(GroupError::UnknownSolid(other.to_string())),
        }
    }
}

/// Rodrigues rotation about `axis` (any length) by `angle`.
pub fn axis_angle(axis: &Vec3, angle: f64) -> Mat3 {
    let d = axis.normalize();
    let k = Mat3::new(0.0, -d.z, d.y, d.z, 0.0, -d.x, -d.y, d.x, 0.0);
    Mat3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos())
}

/// Householder reflection in the plane with normal `n`.
pub fn reflection(n: &Vec3) -> Mat3 {
    let u = n.normalize();
    Mat3::identity() - 2.0 * u * u.transpose()
}

pub fn matrix_distance(a: &Mat3, b: &Mat3) -> f64 {
    (a - b).amax()
}

/// Sign convention for axis directions: the lexicographically larger of `±d`.
pub fn canonical_direction(d: &Vec3) -> Vec3 {
    let u = d.normalize();
    for i in 0..3 {
        if u[i] > 1e-12 {
            return u;
        }
        if u[i] < -1e-12 {
            return -u;
        }
    }
    u
}

/// Key used for deterministic lexicographic choices: coordinates rounded to 1e-9.
pub fn lex_key(v: &Vec3) -> [i64; 3] {
    [(v.x * 1e9).round() as i64, (v.y * 1e9).round() as i64, (v.z * 1e9).round() as i64]
}

/// `x` lies in the open angle `{a e_r + b e_s : a, b > 0}`.
pub fn in_open_angle(x: &Vec3, er: &Vec3, es: &Vec3, tol: f64) -> bool {
    match angle_coordinates(x, er, es) {
        Some((a, b, residual)) => residual <= 1e-9 * x.norm().max(1.0) && a > tol && b > tol,
        None => false,
    }
}

/// Least-squares coordinates of `x` in span(e_r, e_s) and the out-of-plane residual.
pub fn angle_coordinates(x: &Vec3, er: &Vec3, es: &Vec3) -> Option<(f64, f64, f64)> {
    let g11 = er.dot(er);
    let g12 = er.dot(es);
    let g22 = es.dot(es);
    let det = g11 * g22 - g12 * g12;
    if det.abs() < 1e-14 {
        return None;
    }
    let r1 = er.dot(x);
    let r2 = es.dot(x);
    let a = (g22 * r1 - g12 * r2) / det;
    let b = (g11 * r2 - g12 * r1) / det;
    let residual = (x - er * a - es * b).norm();
    Some((a, b, residual))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rotation3 {
    pub matrix: Mat3,
    /// Canonical unit axis; `None` for the identity.
    pub axis: Option<Vec3>,
    /// Rotation angle about `axis`, in (0, 2π).
    pub angle: f64,
}

impl Rotation3 {
    pub fn identity() -> Self {
        Rotation3 { matrix: Mat3::identity(), axis: None, angle: 0.0 }
    }

    pub fn from_matrix(matrix: Mat3) -> Self {
        if matrix_distance(&matrix, &Mat3::identity()) < ELEMENT_TOL {
            return Rotation3::identity();
        }
        let w = Vec3::new(
            matrix[(2, 1)] - matrix[(1, 2)],
            matrix[(0, 2)] - matrix[(2, 0)],
            matrix[(1, 0)] - matrix[(0, 1)],
        ) * 0.5;
        let cos = ((matrix.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        let raw = if w.norm() > 1e-7 {
            w
        } else {
            // half-turn: R + I = 2 d d^T
            let s = matrix + Mat3::identity();
            let mut best = s.column(0).into_owned();
            for j in 1..3 {
                if s.column(j).norm() > best.norm() {
                    best = s.column(j).into_owned();
                }
            }
            best
        };
        let axis = canonical_direction(&raw);
        let sin = w.dot(&axis);
        let mut angle = sin.atan2(cos);
        if angle <= 0.0 {
            angle += std::f64::consts::TAU;
        }
        Rotation3 { matrix, axis: Some(axis), angle }
    }

    pub fn is_identity(&self) -> bool {
        self.axis.is_none()
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.matrix * x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    /// Canonical unit direction.
    pub direction: Vec3,
    pub fold: usize,
    /// The maximal cyclic subgroup, identity first, then `g, g², …` with
    /// `g` the rotation by 2π/fold about `direction`.
    pub elements: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisSet {
    pub axes: Vec<Axis>,
}

impl AxisSet {
    /// Distance from `x` to the union Γ of the axis lines.
    pub fn gamma_distance(&self, x: &Vec3) -> f64 {
        self.nearest(x).map(|(_, d)| d).unwrap_or(f64::INFINITY)
    }

    /// Nearest axis line and the distance to it.
    pub fn nearest(&self, x: &Vec3) -> Option<(usize, f64)> {
        self.axes
            .iter()
            .enumerate()
            .map(|(i, a)| (i, (x - a.direction * a.direction.dot(x)).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Distance from the segment `[a, b]` to Γ.
    pub fn segment_gamma_distance(&self, a: &Vec3, b: &Vec3) -> f64 {
        self.axes
            .iter()
            .map(|ax| segment_line_distance(a, b, &ax.direction))
            .fold(f64::INFINITY, f64::min)
    }

    /// Axis containing the direction `d` (either sign).
    pub fn find(&self, d: &Vec3) -> Option<usize> {
        let u = d.normalize();
        self.axes.iter().position(|a| (a.direction.dot(&u).abs() - 1.0).abs() < 1e-9)
    }

    pub fn census(&self) -> Vec<(usize, usize)> {
        let mut folds: Vec<usize> = self.axes.iter().map(|a| a.fold).collect();
        folds.sort_unstable_by(|a, b| b.cmp(a));
        folds.dedup();
        folds.iter().map(|&k| (k, self.axes.iter().filter(|a| a.fold == k).count())).collect()
    }
}

/// Distance between the segment `[a, b]` and the line through the origin with unit direction `d`.
pub fn segment_line_distance(a: &Vec3, b: &Vec3, d: &Vec3) -> f64 {
    // perpendicular components relative to the line
    let pa = a - d * d.dot(a);
    let pb = b - d * d.dot(b);
    let e = pb - pa;
    let ee = e.dot(&e);
    let s = if ee > 0.0 { (-pa.dot(&e) / ee).clamp(0.0, 1.0) } else { 0.0 };
    (pa + e * s).norm()
}

/// Vertices, edges and faces of a convex polyhedron inscribed in the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    pub vertices: Vec<Vec3>,
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<Vec<usize>>,
}

impl Polyhedron {
    /// Convex hull data for points that are all vertices of a regular polyhedron.
    pub fn from_vertices(points: Vec<Vec3>) -> Self {
        let n = points.len();
        let mut shortest = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                shortest = shortest.min((points[i] - points[j]).norm());
            }
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if ((points[i] - points[j]).norm() - shortest).abs() < 1e-9 {
                    edges.push([i, j]);
                }
            }
        }
        let mut faces: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let nrm = (points[j] - points[i]).cross(&(points[k] - points[i]));
                    if nrm.norm() < 1e-9 {
                        continue;
                    }
                    let mut nrm = nrm.normalize();
                    let mut c = nrm.dot(&points[i]);
                    if c < 0.0 {
                        nrm = -nrm;
                        c = -c;
                    }
                    let support = points.iter().all(|p| nrm.dot(p) - c < 1e-9);
                    if !support {
                        continue;
                    }
                    let face: Vec<usize> = (0..n).filter(|&m| (nrm.dot(&points[m]) - c).abs() < 1e-9).collect();
                    if !faces.contains(&face) {
                        faces.push(face);
                    }
                }
            }
        }
        Polyhedron { vertices: points, edges, faces }
    }

    /// Standard coordinates, scaled to unit circumradius.
    pub fn standard(solid: Solid) -> Self {
        let signs = [-1.0, 1.0];
        let mut v: Vec<Vec3> = Vec::new();
        match solid {
            Solid::Tetrahedron => {
                v.extend([
                    Vec3::new(1.0, 1.0, 1.0),
                    Vec3::new(1.0, -1.0, -1.0),
                    Vec3::new(-1.0, 1.0, -1.0),
                    Vec3::new(-1.0, -1.0, 1.0),
                ]);
            }
            Solid::Cube => {
                for &a in &signs {
                    for &b in &signs {
                        for &c in &signs {
                            v.push(Vec3::new(a, b, c));
                        }
                    }
                }
            }
            Solid::Octahedron => {
                for i in 0..3 {
                    for &s in &[1.0, -1.0] {
                        let mut p = Vec3::zeros();
                        p[i] = s;
                        v.push(p);
                    }
                }
            }
            Solid::Dodecahedron => {
                for &a in &signs {
                    for &b in &signs {
                        for &c in &signs {
                            v.push(Vec3::new(a, b, c));
                        }
                    }
                }
                for &a in &signs {
                    for &b in &signs {
                        v.push(Vec3::new(0.0, a / PHI, b * PHI));
                        v.push(Vec3::new(a / PHI, b * PHI, 0.0));
                        v.push(Vec3::new(a * PHI, 0.0, b / PHI));
                    }
                }
            }
            Solid::Icosahedron => {
                for &a in &signs {
                    for &b in &signs {
                        v.push(Vec3::new(0.0, a, b * PHI));
                        v.push(Vec3::new(a, b * PHI, 0.0));
                        v.push(Vec3::new(a * PHI, 0.0, b));
                    }
                }
            }
        }
        let r = v[0].norm();
        Polyhedron::from_vertices(v.into_iter().map(|p| p / r).collect())
    }

    pub fn face_center(&self, f: usize) -> Vec3 {
        let face = &self.faces[f];
        face.iter().map(|&i| self.vertices[i]).sum::<Vec3>() / face.len() as f64
    }

    pub fn vertex_degree(&self, v: usize) -> usize {
        self.faces.iter().filter(|f| f.contains(&v)).count()
    }

    pub fn transformed(&self, m: &Mat3) -> Polyhedron {
        Polyhedron {
            vertices: self.vertices.iter().map(|p| m * p).collect(),
            edges: self.edges.clone(),
            faces: self.faces.clone(),
        }
    }

    /// Polyhedron whose vertices are the normalized face centres.
    pub fn dual(&self) -> Polyhedron {
        Polyhedron::from_vertices((0..self.faces.len()).map(|f| self.face_center(f).normalize()).collect())
    }

    /// Face with the lexicographically largest centre, its side with the
    /// largest midpoint, and the resulting frame `(B, M, V)`; `B` has columns e1, e2, e3.
    fn placement(&self) -> (Mat3, Vec3, Vec3) {
        let fi = (0..self.faces.len()).max_by_key(|&f| lex_key(&self.face_center(f))).expect("faces");
        let face = &self.faces[fi];
        let e1 = self.face_center(fi).normalize();
        let side = self
            .edges
            .iter()
            .filter(|e| face.contains(&e[0]) && face.contains(&e[1]))
            .max_by_key(|e| lex_key(&((self.vertices[e[0]] + self.vertices[e[1]]) * 0.5)))
            .expect("face sides");
        let m = (self.vertices[side[0]] + self.vertices[side[1]]) * 0.5;
        let e2 = (m - e1 * m.dot(&e1)).normalize();
        let e3 = e1.cross(&e2);
        let v = if self.vertices[side[0]].dot(&e3) > 0.0 { self.vertices[side[0]] } else { self.vertices[side[1]] };
        (Mat3::from_columns(&[e1, e2, e3]), m, v)
    }
}

#[derive(Debug, Clone)]
pub struct RotationGroup {
    pub kind: GroupKind,
    pub elements: Vec<Rotation3>,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    axes: AxisSet,
    /// Defining solid in frame coordinates.
    solid: Option<Polyhedron>,
}

impl RotationGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn matrix(&self, i: usize) -> &Mat3 {
        &self.elements[i].matrix
    }

    pub fn matrices(&self) -> impl Iterator<Item = &Mat3> {
        self.elements.iter().map(|r| &r.matrix)
    }

    /// Index of `a · b`.
    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn find(&self, m: &Mat3) -> Option<usize> {
        self.elements.iter().position(|r| matrix_distance(&r.matrix, m) < ELEMENT_TOL)
    }

    pub fn axes(&self) -> &AxisSet {
        &self.axes
    }

    pub fn solid(&self) -> Option<&Polyhedron> {
        self.solid.as_ref()
    }

    /// Σ_{R≠I} |(R − I)x|^{−α}.
    pub fn potential_sum(&self, x: &Vec3, alpha: f64) -> f64 {
        self.elements[1..]
            .iter()
            .map(|r| {
                let d = (r.matrix * x - x).norm();
                if alpha == 1.0 {
                    1.0 / d
                } else {
                    d.powf(-alpha)
                }
            })
            .sum()
    }
}

fn with_tables(kind: GroupKind, elements: Vec<Rotation3>, solid: Option<Polyhedron>) -> RotationGroup {
    let n = elements.len();
    let find = |m: &Mat3| {
        elements
            .iter()
            .position(|r| matrix_distance(&r.matrix, m) < ELEMENT_TOL)
            .expect("group is closed under composition")
    };
    let table: Vec<Vec<usize>> = (0..n)
        .map(|a| (0..n).map(|b| find(&(elements[a].matrix * elements[b].matrix))).collect())
        .collect();
    let inverse: Vec<usize> = (0..n).map(|a| find(&elements[a].matrix.transpose())).collect();
    let axes = axes_of_elements(&elements, &table);
    RotationGroup { kind, elements, table, inverse, axes, solid }
}

fn orthonormalize(m: &Mat3) -> Mat3 {
    let c0 = m.column(0).normalize();
    let c1 = (m.column(1) - c0 * c0.dot(&m.column(1))).normalize();
    let c2 = c0.cross(&c1);
    Mat3::from_columns(&[c0, c1, c2])
}

/// Full rotation group of `kind` in the reference frame of its defining solid.
pub fn build_rotation_group(kind: GroupKind) -> RotationGroup {
    let Some(solid) = kind.defining_solid() else {
        let turns = if kind == GroupKind::Binary { 2..3 } else { 0..3 };
        let elements = std::iter::once(Mat3::identity())
            .chain(turns.map(|i| {
                let mut d = Mat3::from_diagonal_element(-1.0);
                d[(i, i)] = 1.0;
                d
            }))
            .map(Rotation3::from_matrix)
            .collect();
        return with_tables(kind, elements, None);
    };
    let poly = Polyhedron::standard(solid);
    let tau = std::f64::consts::TAU;
    let mut raw = vec![Mat3::identity()];
    for f in 0..poly.faces.len() {
        let k = poly.faces[f].len();
        let c = poly.face_center(f);
        raw.extend((1..k).map(|j| axis_angle(&c, tau * j as f64 / k as f64)));
    }
    for v in 0..poly.vertices.len() {
        let k = poly.vertex_degree(v);
        raw.extend((1..k).map(|j| axis_angle(&poly.vertices[v], tau * j as f64 / k as f64)));
    }
    for e in &poly.edges {
        raw.push(axis_angle(&(poly.vertices[e[0]] + poly.vertices[e[1]]), std::f64::consts::PI));
    }
    let mut unique: Vec<Mat3> = Vec::new();
    for m in raw {
        if !unique.iter().any(|u| matrix_distance(u, &m) < ELEMENT_TOL) {
            unique.push(m);
        }
    }
    let (b, _, _) = poly.placement();
    let bt = b.transpose();
    let elements = unique.iter().map(|m| Rotation3::from_matrix(orthonormalize(&(bt * m * b)))).collect();
    with_tables(kind, elements, Some(poly.transformed(&bt)))
}

fn axes_of_elements(elements: &[Rotation3], table: &[Vec<usize>]) -> AxisSet {
    let mut axes: Vec<Axis> = Vec::new();
    for (i, r) in elements.iter().enumerate().skip(1) {
        let d = r.axis.expect("non-identity");
        match axes.iter_mut().find(|a| (a.direction.dot(&d).abs() - 1.0).abs() < 1e-9) {
            Some(a) => a.elements.push(i),
            None => axes.push(Axis { direction: d, fold: 0, elements: vec![i] }),
        }
    }
    for a in &mut axes {
        a.fold = a.elements.len() + 1;
        let k = a.fold as f64;
        // generator: rotation by 2π/k about the canonical direction
        let gen = *a
            .elements
            .iter()
            .find(|&&i| {
                let r = &elements[i];
                let ang = if r.axis.unwrap().dot(&a.direction) > 0.0 { r.angle } else { std::f64::consts::TAU - r.angle };
                (ang - std::f64::consts::TAU / k).abs() < 1e-9
            })
            .expect("cyclic generator");
        let mut cyc = vec![0usize];
        let mut cur = gen;
        while cur != 0 {
            cyc.push(cur);
            cur = table[cur][gen];
        }
        a.elements = cyc;
    }
    AxisSet { axes }
}

/// Partition of the non-identity elements into maximal cyclic subgroups.
pub fn axes_of(group: &RotationGroup) -> &AxisSet {
    group.axes()
}

/// `R^S = R̃_S R R̃_S`, the bijection of ℛ∖{I} induced by a mirror.
pub fn conjugate_across_face(r: &Rotation3, mirror: &Mat3) -> Result<Rotation3, GroupError> {
    if r.is_identity() {
        return Err(GroupError::IdentityConjugation);
    }
    let det = mirror.determinant();
    let defect = matrix_distance(&(mirror * mirror), &Mat3::identity());
    if (det + 1.0).abs() > 1e-9 || defect > 1e-9 || (mirror.trace() - 1.0).abs() > 1e-9 {
        return Err(GroupError::NotAReflection { det, defect });
    }
    Ok(Rotation3::from_matrix(mirror * r.matrix * mirror))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceFrame {
    pub solid: Solid,
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub e3: [f64; 3],
    pub e_m: [f64; 3],
    pub e_v: [f64; 3],
    pub e_alpha: [f64; 3],
    pub e_beta: [f64; 3],
    pub phi_m: f64,
    pub phi_v: f64,
    pub psi_alpha: f64,
    pub psi_beta: f64,
    pub h: usize,
    pub k: usize,
}

pub fn to_array(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

pub fn to_vec3(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl ReferenceFrame {
    pub fn e1(&self) -> Vec3 {
        to_vec3(&self.e1)
    }
    pub fn e2(&self) -> Vec3 {
        to_vec3(&self.e2)
    }
    pub fn e3(&self) -> Vec3 {
        to_vec3(&self.e3)
    }
    pub fn e_m(&self) -> Vec3 {
        to_vec3(&self.e_m)
    }
    pub fn e_v(&self) -> Vec3 {
        to_vec3(&self.e_v)
    }
    pub fn e_alpha(&self) -> Vec3 {
        to_vec3(&self.e_alpha)
    }
    pub fn e_beta(&self) -> Vec3 {
        to_vec3(&self.e_beta)
    }

    /// Reflection S₃ in the plane ξ₃ = 0 of this frame.
    pub fn s3(&self) -> Mat3 {
        reflection(&self.e3())
    }

    /// Rotation by 2π/H about ξ₁.
    pub fn face_rotation(&self) -> Mat3 {
        axis_angle(&self.e1(), std::f64::consts::TAU / self.h as f64)
    }

    /// Basis matrix with columns e1, e2, e3 (group coordinates of the frame).
    pub fn basis(&self) -> Mat3 {
        Mat3::from_columns(&[self.e1(), self.e2(), self.e3()])
    }
}

/// Axis direction `d` in the plane span(e1, target), other than those two
/// lines, with `target` inside the angle (e1, d) and that angle minimal.
fn auxiliary_axis(axes: &AxisSet, e1: &Vec3, target: &Vec3) -> (Vec3, f64) {
    let normal = e1.cross(target).normalize();
    let mut best: Option<(Vec3, f64)> = None;
    for a in &axes.axes {
        if a.direction.dot(&normal).abs() > 1e-9 {
            continue;
        }
        if (a.direction.dot(e1).abs() - 1.0).abs() < 1e-9 || (a.direction.dot(target).abs() - 1.0).abs() < 1e-9 {
            continue;
        }
        for d in [a.direction, -a.direction] {
            if !in_open_angle(target, e1, &d, 1e-12) {
                continue;
            }
            let psi = d.dot(e1).clamp(-1.0, 1.0).acos();
            if best.as_ref().map_or(true, |b| psi < b.1 - 1e-12) {
                best = Some((d, psi));
            }
        }
    }
    best.expect("the plane contains another axis")
}

/// Reference frame of solid `P`, expressed in the coordinates of its rotation group.
pub fn reference_frame(solid: Solid) -> ReferenceFrame {
    let group = solid.group().group();
    let base = group.solid().expect("polyhedral group");
    let poly = if group.kind.defining_solid() == Some(solid) { base.clone() } else { base.dual() };
    debug_assert_eq!(solid.dual().k(), poly.vertices.len());
    let (b, m, v) = poly.placement();
    let e1 = b.column(0).into_owned();
    let e2 = b.column(1).into_owned();
    let e3 = b.column(2).into_owned();
    let e_m = m.normalize();
    let e_v = v.normalize();
    let (e_alpha, psi_alpha) = auxiliary_axis(group.axes(), &e1, &e_m);
    let (e_beta, psi_beta) = auxiliary_axis(group.axes(), &e1, &e_v);
    ReferenceFrame {
        solid,
        e1: to_array(&e1),
        e2: to_array(&e2),
        e3: to_array(&e3),
        e_m: to_array(&e_m),
        e_v: to_array(&e_v),
        e_alpha: to_array(&e_alpha),
        e_beta: to_array(&e_beta),
        phi_m: e1.dot(&e_m).clamp(-1.0, 1.0).acos(),
        phi_v: e1.dot(&e_v).clamp(-1.0, 1.0).acos(),
        psi_alpha,
        psi_beta,
        h: poly.faces[0].len(),
        k: poly.faces.len(),
    }
}

/// Unit vectors (e1, e_M, e_V) of the group's own frame (the defining solid).
pub fn group_frame_vectors(kind: GroupKind) -> (Vec3, Vec3, Vec3) {
    let solid = kind.defining_solid().expect("polyhedral group");
    let f = reference_frame(solid);
    (f.e1(), f.e_m(), f.e_v())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        for (k, n) in [(GroupKind::Tetrahedral, 12), (GroupKind::Octahedral, 24), (GroupKind::Icosahedral, 60), (GroupKind::Klein4, 4), (GroupKind::Binary, 2)] {
            assert_eq!(k.group().order(), n);
        }
    }

    #[test]
    fn identity_first_and_neutral() {
        for k in GroupKind::POLYHEDRAL {
            let g = k.group();
            assert!(g.elements[0].is_identity());
            for i in 0..g.order() {
                assert_eq!(g.compose(0, i), i);
                assert_eq!(g.compose(i, g.inverse(i)), 0);
            }
        }
    }

    #[test]
    fn axis_census() {
        assert_eq!(GroupKind::Tetrahedral.group().axes().census(), vec![(3, 4), (2, 3)]);
        assert_eq!(GroupKind::Octahedral.group().axes().census(), vec![(4, 3), (3, 4), (2, 6)]);
        assert_eq!(GroupKind::Icosahedral.group().axes().census(), vec![(5, 6), (3, 10), (2, 15)]);
    }

    #[test]
    fn frame_is_placed() {
        for s in Solid::ALL {
            let f = reference_frame(s);
            assert!(f.e_m().dot(&f.e3()).abs() < 1e-12);
            assert!(f.e_m().dot(&f.e2()) > 0.0);
            assert!(f.e_v().dot(&f.e3()) > 0.0);
            assert!(f.phi_m > 0.0 && f.phi_m < std::f64::consts::FRAC_PI_2);
            assert_eq!((f.h, f.k), (s.h(), s.k()));
        }
    }

    #[test]
    fn group_frame_is_identity_for_defining_solids() {
        for k in GroupKind::POLYHEDRAL {
            let f = reference_frame(k.defining_solid().unwrap());
            assert!((f.basis() - Mat3::identity()).amax() < 1e-12);
        }
    }

    #[test]
    fn conjugation_rejects_identity() {
        let m = reflection(&Vec3::z());
        assert_eq!(conjugate_across_face(&Rotation3::identity(), &m), Err(GroupError::IdentityConjugation));
        let r = Rotation3::from_matrix(axis_angle(&Vec3::x(), 1.0));
        assert!(conjugate_across_face(&r, &Mat3::identity()).is_err());
    }
}
