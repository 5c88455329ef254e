//! Built-in ν paths: the symmetric cone sequences and the minimal sequences
//! of each 𝒦ᵢᴾ, in canonical 𝒬_ℛ numbering.

use thiserror::Error;

use crate::archimedean::{ArchimedeanPolyhedron, NuSequence, NuViolation};
use crate::chambers::ChamberComplex;
use crate::loops::{
    compatible_grid, loop_from_nu_with_offset, ConeDescriptor, ConeKind, GeneratingLoop, LoopError, SymmetryConstraint, Topology,
};
use crate::symmetry::{axis_angle, reference_frame, GroupKind, Mat3, Solid, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown cone id `{id}`; known ids: {}", known.join(", "))]
    UnknownId { id: String, known: Vec<&'static str> },
    #[error("catalog path {id} is invalid: {source}")]
    Path { id: &'static str, source: NuViolation },
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error("no symmetry of {id} matches its cone")]
    NoSymmetry { id: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    /// A ν whose cone carries extra symmetry.
    Symmetric,
    /// The minimal sequence of 𝒦ᵢᴾ.
    Minimal { solid: Solid, cone: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub group: GroupKind,
    pub kind: EntryKind,
    /// One period of ν, canonical vertex indices.
    pub path: &'static [usize],
    /// t = 0 sits at the midpoint of the edge (path[0], path[1]).
    pub half_edge_start: bool,
    /// The sequence as printed (1-based, closing vertex dropped).
    pub printed_path: &'static [usize],
    pub printed_action: f64,
    /// Printed symmetry order M.
    pub printed_m: Option<usize>,
}

/// Tilde symmetry found on the half-edge grid of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeSymmetry {
    /// Reflection-group element index of R̃_Π.
    pub mirror: usize,
    /// Time origin in half-edge steps from path[0].
    pub phase: usize,
    pub m: usize,
    /// Rotation with u(t + T/M) = R u(t).
    pub rotation: Mat3,
}

static ENTRIES: [CatalogEntry; 27] = [
    CatalogEntry {
        id: "T.nu1",
        group: GroupKind::Tetrahedral,
        kind: EntryKind::Symmetric,
        path: &[0, 1, 6, 4, 3, 5],
        half_edge_start: false,
        printed_path: &[1, 8, 3, 12, 9, 7],
        printed_action: 168.0445,
        printed_m: Some(2),
    },
    CatalogEntry {
        id: "T.nu2",
        group: GroupKind::Tetrahedral,
        kind: EntryKind::Symmetric,
        path: &[0, 1, 6, 11, 10, 5],
        half_edge_start: false,
        printed_path: &[1, 8, 3, 11, 6, 7],
        printed_action: 168.0445,
        printed_m: Some(3),
    },
    CatalogEntry {
        id: "T.nu3",
        group: GroupKind::Tetrahedral,
        kind: EntryKind::Symmetric,
        path: &[3, 0, 1, 4, 9, 10, 5, 3, 4, 6, 11, 9],
        half_edge_start: false,
        printed_path: &[9, 1, 8, 12, 4, 6, 7, 9, 12, 3, 11, 4],
        printed_action: 266.7542,
        printed_m: Some(3),
    },
    CatalogEntry {
        id: "T.min1",
        group: GroupKind::Tetrahedral,
        kind: EntryKind::Minimal { solid: Solid::Tetrahedron, cone: 1 },
        path: &[4, 3, 0, 5, 7, 2, 8, 6, 1],
        half_edge_start: true,
        printed_path: &[2, 7, 1, 9, 12, 8, 3, 10, 5],
        printed_action: 220.2007,
        printed_m: None,
    },
    CatalogEntry {
        id: "T.min2",
        group: GroupKind::Tetrahedral,
        kind: EntryKind::Minimal { solid: Solid::Tetrahedron, cone: 2 },
        path: &[4, 3, 5, 7, 8, 6],
        half_edge_start: true,
        printed_path: &[2, 10, 3, 12, 9, 7],
        printed_action: 168.0446,
        printed_m: None,
    },
    CatalogEntry {
        id: "T.min3",
        group: GroupKind::Tetrahedral,
        kind: EntryKind::Minimal { solid: Solid::Tetrahedron, cone: 3 },
        path: &[1, 0, 3, 5, 0, 2, 7, 8, 2, 1, 6, 4],
        half_edge_start: true,
        printed_path: &[2, 10, 5, 8, 3, 12, 8, 1, 9, 7, 1, 5],
        printed_action: 266.7542,
        printed_m: None,
    },
    CatalogEntry {
        id: "O.nu1",
        group: GroupKind::Octahedral,
        kind: EntryKind::Symmetric,
        path: &[0, 4, 12, 14, 20, 22, 18, 10, 8, 2],
        half_edge_start: false,
        printed_path: &[16, 5, 11, 14, 23, 20, 18, 8, 3, 10],
        printed_action: 647.2635,
        printed_m: Some(2),
    },
    CatalogEntry {
        id: "O.nu2",
        group: GroupKind::Octahedral,
        kind: EntryKind::Symmetric,
        path: &[6, 0, 2, 8, 16, 22, 20, 14],
        half_edge_start: false,
        printed_path: &[1, 16, 10, 3, 7, 20, 23, 14],
        printed_action: 553.1632,
        printed_m: Some(2),
    },
    CatalogEntry {
        id: "O.nu3",
        group: GroupKind::Octahedral,
        kind: EntryKind::Symmetric,
        path: &[6, 14, 20, 12, 4, 0],
        half_edge_start: false,
        printed_path: &[1, 14, 23, 11, 5, 16],
        printed_action: 462.9895,
        printed_m: Some(2),
    },
    CatalogEntry {
        id: "O.nu4",
        group: GroupKind::Octahedral,
        kind: EntryKind::Symmetric,
        path: &[6, 4, 0, 6, 8, 16, 18, 22, 16, 14],
        half_edge_start: false,
        printed_path: &[1, 5, 16, 1, 3, 7, 18, 20, 7, 14],
        printed_action: 647.2635,
        printed_m: Some(2),
    },
    CatalogEntry {
        id: "O.nu5",
        group: GroupKind::Octahedral,
        kind: EntryKind::Symmetric,
        path: &[6, 0, 2, 10, 18, 16, 8, 2, 3, 11, 10, 8],
        half_edge_start: false,
        printed_path: &[1, 16, 10, 8, 18, 7, 3, 10, 6, 15, 8, 3],
        printed_action: 724.8489,
        printed_m: Some(3),
    },
    CatalogEntry {
        id: "O.nu6",
        group: GroupKind::Octahedral,
        kind: EntryKind::Symmetric,
        path: &[12, 4, 5, 1, 0, 2, 3, 11, 10, 18, 19, 23, 22, 20, 21, 13],
        half_edge_start: false,
        printed_path: &[11, 5, 2, 22, 16, 10, 6, 15, 8, 18, 13, 24, 20, 23, 21, 19],
        printed_action: 859.5748,
        printed_m: Some(4),
    },
    CatalogEntry {
        id: "C.min1",
        group: GroupKind::Octahedral,
        kind: EntryKind::Minimal { solid: Solid::Cube, cone: 1 },
        path: &[5, 4, 0, 6, 8, 2, 10, 11, 3, 9, 7, 1],
        half_edge_start: true,
        printed_path: &[5, 1, 16, 10, 3, 8, 18, 7, 20, 23, 14, 11],
        printed_action: 734.9502,
        printed_m: None,
    },
    CatalogEntry {
        id: "C.min2",
        group: GroupKind::Octahedral,
        kind: EntryKind::Minimal { solid: Solid::Cube, cone: 2 },
        path: &[5, 4, 6, 8, 10, 11, 9, 7],
        half_edge_start: true,
        printed_path: &[5, 16, 10, 8, 18, 20, 23, 11],
        printed_action: 553.1633,
        printed_m: None,
    },
    CatalogEntry {
        id: "C.min3",
        group: GroupKind::Octahedral,
        kind: EntryKind::Minimal { solid: Solid::Cube, cone: 3 },
        path: &[1, 0, 4, 6, 0, 2, 8, 10, 2, 3, 11, 9, 3, 1, 7, 5],
        half_edge_start: true,
        printed_path: &[1, 5, 16, 1, 3, 10, 8, 3, 7, 18, 20, 7, 14, 23, 11, 14],
        printed_action: 896.4157,
        printed_m: None,
    },
    CatalogEntry {
        id: "O.min1",
        group: GroupKind::Octahedral,
        kind: EntryKind::Minimal { solid: Solid::Octahedron, cone: 1 },
        path: &[1, 5, 4, 12, 14, 6, 8, 2, 0],
        half_edge_start: true,
        printed_path: &[3, 1, 16, 10, 6, 15, 8, 18, 7],
        printed_action: 589.9526,
        printed_m: None,
    },
    CatalogEntry {
        id: "O.min2",
        group: GroupKind::Octahedral,
        kind: EntryKind::Minimal { solid: Solid::Octahedron, cone: 2 },
        path: &[1, 5, 13, 12, 14, 16, 8, 2, 3],
        half_edge_start: true,
        printed_path: &[1, 16, 22, 6, 15, 13, 18, 7, 14],
        printed_action: 589.9526,
        printed_m: None,
    },
    CatalogEntry {
        id: "O.min3",
        group: GroupKind::Octahedral,
        kind: EntryKind::Minimal { solid: Solid::Octahedron, cone: 3 },
        path: &[0, 4, 5, 13, 12, 4, 6, 14, 16, 8, 6, 0, 2, 3, 1],
        half_edge_start: true,
        printed_path: &[3, 10, 16, 22, 6, 10, 8, 15, 13, 18, 8, 3, 7, 14, 1],
        printed_action: 819.805,
        printed_m: None,
    },
    CatalogEntry {
        id: "I.nu1",
        group: GroupKind::Icosahedral,
        kind: EntryKind::Symmetric,
        path: &[0, 5, 15, 30, 17, 7],
        half_edge_start: false,
        printed_path: &[11, 48, 34, 14, 42, 28],
        printed_action: 1556.2362,
        printed_m: Some(2),
    },
    CatalogEntry {
        id: "I.nu2",
        group: GroupKind::Icosahedral,
        kind: EntryKind::Symmetric,
        path: &[0, 5, 15, 17, 7, 0, 1, 6, 5, 7, 9, 2],
        half_edge_start: false,
        printed_path: &[11, 48, 34, 42, 28, 11, 6, 15, 48, 28, 45, 19],
        printed_action: 2463.1128,
        printed_m: Some(3),
    },
    CatalogEntry {
        id: "I.nu3",
        group: GroupKind::Icosahedral,
        kind: EntryKind::Symmetric,
        path: &[6, 5, 15, 17, 7, 9, 19, 21, 11, 13, 23, 24, 14, 12, 22, 20, 10, 8, 18, 16],
        half_edge_start: false,
        printed_path: &[15, 48, 34, 42, 28, 45, 31, 32, 43, 50, 36, 51, 54, 59, 52, 12, 7, 47, 33, 25],
        printed_action: 3447.1168,
        printed_m: Some(5),
    },
    CatalogEntry {
        id: "D.min1",
        group: GroupKind::Icosahedral,
        kind: EntryKind::Minimal { solid: Solid::Dodecahedron, cone: 1 },
        path: &[6, 5, 0, 7, 9, 2, 11, 13, 4, 14, 12, 3, 10, 8, 1],
        half_edge_start: true,
        printed_path: &[1, 54, 59, 3, 7, 47, 6, 15, 48, 11, 28, 45, 19, 43, 50],
        printed_action: 2866.6116,
        printed_m: None,
    },
    CatalogEntry {
        id: "D.min2",
        group: GroupKind::Icosahedral,
        kind: EntryKind::Minimal { solid: Solid::Dodecahedron, cone: 2 },
        path: &[6, 5, 7, 9, 11, 13, 14, 12, 10, 8],
        half_edge_start: true,
        printed_path: &[54, 59, 7, 47, 15, 48, 28, 45, 43, 50],
        printed_action: 2181.2066,
        printed_m: None,
    },
    CatalogEntry {
        id: "D.min3",
        group: GroupKind::Icosahedral,
        kind: EntryKind::Minimal { solid: Solid::Dodecahedron, cone: 3 },
        path: &[1, 0, 5, 7, 0, 2, 9, 11, 2, 4, 13, 14, 4, 3, 12, 10, 3, 1, 8, 6],
        half_edge_start: true,
        printed_path: &[54, 1, 3, 59, 7, 3, 6, 47, 15, 6, 11, 48, 28, 11, 19, 45, 43, 19, 1, 50],
        printed_action: 3477.7486,
        printed_m: None,
    },
    CatalogEntry {
        id: "I.min1",
        group: GroupKind::Icosahedral,
        kind: EntryKind::Minimal { solid: Solid::Icosahedron, cone: 1 },
        path: &[1, 6, 5, 15, 17, 7, 9, 2, 0],
        half_edge_start: true,
        printed_path: &[28, 45, 19, 11, 6, 15, 48, 34, 42],
        printed_action: 2027.2544,
        printed_m: None,
    },
    CatalogEntry {
        id: "I.min2",
        group: GroupKind::Icosahedral,
        kind: EntryKind::Minimal { solid: Solid::Icosahedron, cone: 2 },
        path: &[1, 6, 16, 25, 15, 17, 26, 19, 9, 2, 4, 3],
        half_edge_start: true,
        printed_path: &[45, 19, 1, 3, 6, 15, 25, 38, 34, 42, 20, 31],
        printed_action: 2452.2053,
        printed_m: None,
    },
    CatalogEntry {
        id: "I.min3",
        group: GroupKind::Icosahedral,
        kind: EntryKind::Minimal { solid: Solid::Icosahedron, cone: 3 },
        path: &[0, 5, 6, 16, 25, 15, 5, 7, 17, 26, 19, 9, 7, 0, 2, 4, 3, 1],
        half_edge_start: true,
        printed_path: &[45, 28, 11, 19, 1, 3, 6, 11, 48, 15, 25, 38, 34, 48, 28, 42, 20, 31],
        printed_action: 3208.5266,
        printed_m: None,
    },
];
static PRINTED_MAP_T: [Option<usize>; 12] = [Some(0), Some(7), Some(6), Some(9), Some(2), Some(10), Some(5), Some(1), Some(3), Some(8), Some(11), Some(4)];
static PRINTED_MAP_O: [Option<usize>; 24] = [Some(6), Some(5), Some(8), None, Some(4), Some(3), Some(16), Some(10), None, Some(2), Some(12), None, Some(19), Some(14), Some(11), Some(0), None, Some(18), Some(13), Some(22), Some(21), Some(1), Some(20), Some(23)];
static PRINTED_MAP_I: [Option<usize>; 59] = [Some(4), None, Some(3), None, None, Some(1), Some(10), None, None, None, Some(0), Some(20), None, Some(30), Some(6), None, None, None, Some(2), Some(26), None, None, None, None, Some(16), None, None, Some(7), None, None, Some(19), Some(21), Some(18), Some(15), None, Some(23), None, Some(25), None, None, None, Some(17), Some(11), None, Some(9), None, Some(8), Some(5), None, Some(13), Some(24), Some(22), None, Some(14), None, None, None, None, Some(12)];

pub fn entries() -> &'static [CatalogEntry] {
    &ENTRIES
}

pub fn ids() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.id).collect()
}

pub fn entry(id: &str) -> Result<&'static CatalogEntry, CatalogError> {
    ENTRIES
        .iter()
        .find(|e| e.id == id.trim())
        .ok_or_else(|| CatalogError::UnknownId { id: id.to_string(), known: ids() })
}

/// Canonical index of a printed vertex number, when the printed paths use it.
pub fn printed_vertex(group: GroupKind, printed: usize) -> Option<usize> {
    let map: &[Option<usize>] = match group {
        GroupKind::Tetrahedral => &PRINTED_MAP_T,
        GroupKind::Octahedral => &PRINTED_MAP_O,
        GroupKind::Icosahedral => &PRINTED_MAP_I,
        _ => return None,
    };
    map.get(printed.checked_sub(1)?).copied().flatten()
}

/// Points of the path at vertices (even) and edge midpoints (odd).
fn half_edge_points(poly: &ArchimedeanPolyhedron, path: &[usize]) -> Vec<Vec3> {
    let k = path.len();
    (0..2 * k)
        .map(|j| {
            let a = poly.vertices[path[(j / 2) % k]];
            if j % 2 == 0 {
                a
            } else {
                (a + poly.vertices[path[(j / 2 + 1) % k]]) * 0.5
            }
        })
        .collect()
}

fn close(a: &Vec3, b: &Vec3) -> bool {
    (a - b).amax() < 1e-9
}

/// Largest shift symmetry u(t + T/M) = R u(t) of a closed path, with R.
pub fn shift_symmetry(poly: &ArchimedeanPolyhedron, path: &[usize]) -> (usize, Mat3) {
    let pts = half_edge_points(poly, path);
    let l = pts.len();
    let k = path.len();
    let group = poly.complex().group;
    let mut best = (1, Mat3::identity());
    for m in (2..=k).filter(|m| k % m == 0) {
        let step = l / m;
        for r in group.matrices() {
            if (0..l).all(|j| close(&pts[(j + step) % l], &(r * pts[j]))) {
                best = (m, *r);
                break;
            }
        }
    }
    best
}

/// Symmetries u(t) = R̃_Π u(−t) and u(t + T/M) = R u(t) of a path (first mirror and phase found).
pub fn detect_tilde(poly: &ArchimedeanPolyhedron, path: &[usize]) -> Option<TildeSymmetry> {
    let complex: &ChamberComplex = poly.complex();
    let pts = half_edge_points(poly, path);
    let l = pts.len();
    let (m, rotation) = shift_symmetry(poly, path);
    for g in 0..complex.len() {
        let a = complex.element(g);
        if a.determinant() > 0.0 || (a.trace() - 1.0).abs() > 1e-9 {
            continue;
        }
        for p in 0..l {
            if (0..l).all(|j| close(&pts[(p + j) % l], &(a * pts[(p + l - j) % l]))) {
                return Some(TildeSymmetry { mirror: g, phase: p, m, rotation });
            }
        }
    }
    None
}

impl CatalogEntry {
    pub fn polyhedron(&self) -> &'static ArchimedeanPolyhedron {
        ArchimedeanPolyhedron::get(self.group).expect("polyhedral group")
    }

    pub fn nu(&self, n: usize) -> Result<NuSequence, CatalogError> {
        self.polyhedron().validate_nu(self.path, n).map_err(|source| CatalogError::Path { id: self.id, source })
    }

    /// Number of edges K_ν of one period.
    pub fn edges(&self) -> usize {
        self.path.len()
    }

    /// Symmetry constraint of the entry's cone, with the time origin (in edges) it needs.
    pub fn symmetry(&self) -> Result<(SymmetryConstraint, f64), CatalogError> {
        let poly = self.polyhedron();
        match self.kind {
            EntryKind::Minimal { solid, .. } => {
                let f = reference_frame(solid);
                let offset = if self.half_edge_start { 0.5 } else { 0.0 };
                let pts = half_edge_points(poly, self.path);
                let l = pts.len();
                let p0 = usize::from(self.half_edge_start);
                let step = l / solid.h();
                for sign in [1.0, -1.0] {
                    let r = axis_angle(&f.e1(), sign * std::f64::consts::TAU / solid.h() as f64);
                    if (0..l).all(|j| close(&pts[(p0 + j + step) % l], &(r * pts[(p0 + j) % l]))) {
                        return Ok((SymmetryConstraint::Abc { solid, s3: f.s3(), rotation: r }, offset));
                    }
                }
                Err(CatalogError::NoSymmetry { id: self.id })
            }
            EntryKind::Symmetric => {
                let t = detect_tilde(poly, self.path).ok_or(CatalogError::NoSymmetry { id: self.id })?;
                let complex = poly.complex();
                let mirror = *complex.element(t.mirror);
                Ok((SymmetryConstraint::Tilde { mirror, m: t.m, rotation: t.rotation }, t.phase as f64 * 0.5))
            }
        }
    }

    /// Detected symmetry order M (H for minimal entries).
    pub fn symmetry_order(&self) -> usize {
        match self.kind {
            EntryKind::Minimal { solid, .. } => solid.h(),
            EntryKind::Symmetric => shift_symmetry(self.polyhedron(), self.path).0,
        }
    }

    pub fn descriptor(&self, n: usize) -> Result<ConeDescriptor, CatalogError> {
        let nu = self.nu(n)?;
        let (sym, _) = self.symmetry()?;
        let kind = match self.kind {
            EntryKind::Minimal { solid, cone } => ConeKind::KPi { solid, i: cone },
            EntryKind::Symmetric => ConeKind::Knu { id: self.id.to_string() },
        };
        Ok(ConeDescriptor { group: self.group, kind, topology: Some(Topology::Nu(nu)), symmetry: Some(sym) })
    }

    /// Grid size ≥ `min_m` resolving vertices, midpoints and the symmetry shifts.
    pub fn grid(&self, n: usize, min_m: usize) -> usize {
        compatible_grid(min_m, &[2 * n * self.edges(), 2 * self.symmetry_order()])
    }

    /// The test loop v^(ν,n) with the cone's time origin.
    pub fn test_loop(&self, n: usize, period: f64, min_m: usize) -> Result<GeneratingLoop, CatalogError> {
        let nu = self.nu(n)?;
        let (_, offset) = self.symmetry()?;
        Ok(loop_from_nu_with_offset(self.polyhedron(), &nu, period, self.grid(n, min_m), offset)?)
    }
}

/// Whether `b` is the image of `a` under an element of ℛ̃ followed by a cyclic shift.
pub fn equivalent_paths(complex: &ChamberComplex, poly: &ArchimedeanPolyhedron, a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let l = a.len();
    (0..complex.len()).any(|g| {
        let img: Vec<usize> = a.iter().map(|&v| poly.act_vertex(g, v)).collect();
        (0..l).any(|s| (0..l).all(|i| img[(i + s) % l] == b[i]))
    })
}
