//! Sampled T-periodic loops of the generating particle, the polygonal test
//! loops, symmetry projections and cone membership checks.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;
use thiserror::Error;

use crate::archimedean::{ArchimedeanPolyhedron, NuSequence};
use crate::chambers::{chamber_center, ChamberComplex, SigmaSequence};
use crate::symmetry::{in_open_angle, matrix_distance, reference_frame, GroupKind, Mat3, Solid, Vec3};
use crate::topology;

pub const MIN_GRID: usize = 16;
/// Tolerance of the open-angle tests.
pub const ANGLE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error("grid of {m} samples is too small (need at least {MIN_GRID})")]
    GridTooSmall { m: usize },
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("sample {index} is not finite")]
    NonFinite { index: usize },
    #[error("grid of {m} samples is not divisible by {divisor}")]
    IncompatibleGrid { m: usize, divisor: u64 },
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("loop belongs to group {found}, expected {expected}")]
    GroupMismatch { expected: GroupKind, found: GroupKind },
}

/// Positions of the generating particle on the uniform grid `t_j = jT/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingLoop {
    pub group: GroupKind,
    pub period: f64,
    pub samples: Vec<Vec3>,
}

impl GeneratingLoop {
    pub fn new(group: GroupKind, period: f64, samples: Vec<Vec3>) -> Result<Self, LoopError> {
        if samples.len() < MIN_GRID {
            return Err(LoopError::GridTooSmall { m: samples.len() });
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(LoopError::BadPeriod(period));
        }
        if let Some(index) = samples.iter().position(|x| !x.iter().all(|c| c.is_finite())) {
            return Err(LoopError::NonFinite { index });
        }
        Ok(GeneratingLoop { group, period, samples })
    }

    /// Samples `f(t_j)` on a grid of size `m`.
    pub fn from_fn<F: FnMut(f64) -> Vec3>(group: GroupKind, period: f64, m: usize, mut f: F) -> Result<Self, LoopError> {
        let h = period / m as f64;
        Self::new(group, period, (0..m).map(|j| f(j as f64 * h)).collect())
    }

    pub fn m(&self) -> usize {
        self.samples.len()
    }

    pub fn dt(&self) -> f64 {
        self.period / self.m() as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt()
    }

    /// Sample with periodic index arithmetic.
    pub fn sample(&self, j: i64) -> Vec3 {
        let m = self.m() as i64;
        self.samples[j.rem_euclid(m) as usize]
    }

    /// Piecewise-linear interpolant at time `t` (any real).
    pub fn at(&self, t: f64) -> Vec3 {
        let s = (t / self.dt()).rem_euclid(self.m() as f64);
        let j = s.floor();
        let f = s - j;
        let j = j as i64;
        self.sample(j) * (1.0 - f) + self.sample(j + 1) * f
    }

    pub fn with_samples(&self, samples: Vec<Vec3>) -> Self {
        GeneratingLoop { group: self.group, period: self.period, samples }
    }

    /// Homothety `λu`.
    pub fn scaled(&self, lambda: f64) -> Self {
        self.with_samples(self.samples.iter().map(|x| x * lambda).collect())
    }

    /// `A u(t)` for a fixed matrix.
    pub fn mapped(&self, a: &Mat3) -> Self {
        self.with_samples(self.samples.iter().map(|x| a * x).collect())
    }

    /// `u(−t)`.
    pub fn reversed(&self) -> Self {
        let m = self.m();
        self.with_samples((0..m).map(|j| self.samples[(m - j) % m]).collect())
    }

    /// `u(t + k h)`.
    pub fn shifted(&self, k: i64) -> Self {
        self.with_samples((0..self.m() as i64).map(|j| self.sample(j + k)).collect())
    }

    /// Resamples the piecewise-linear interpolant on a grid of size `m`.
    pub fn resampled(&self, m: usize) -> Result<Self, LoopError> {
        Self::from_fn(self.group, self.period, m, |t| self.at(t))
    }

    pub fn path_length(&self) -> f64 {
        let m = self.m() as i64;
        (0..m).map(|j| (self.sample(j + 1) - self.sample(j)).norm()).sum()
    }

    /// Speed on each grid segment `[t_j, t_{j+1}]`.
    pub fn speeds(&self) -> Vec<f64> {
        let h = self.dt();
        let m = self.m() as i64;
        (0..m).map(|j| (self.sample(j + 1) - self.sample(j)).norm() / h).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Largest distance between two samples.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.samples.iter().enumerate() {
            for b in &self.samples[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    /// Distance from the piecewise-linear interpolant to Γ.
    pub fn min_gamma_distance(&self) -> f64 {
        let axes = self.group.group().axes();
        let m = self.m() as i64;
        (0..m)
            .map(|j| axes.segment_gamma_distance(&self.sample(j), &self.sample(j + 1)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest coordinate difference to another loop on the same grid.
    pub fn max_difference(&self, other: &GeneratingLoop) -> f64 {
        self.samples.iter().zip(&other.samples).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max)
    }
}

/// Smallest multiple of every divisor that is at least `min_m`.
pub fn compatible_grid(min_m: usize, divisors: &[usize]) -> usize {
    let l = divisors.iter().fold(1usize, |acc, &d| lcm(acc, d.max(1)));
    min_m.max(MIN_GRID).div_ceil(l) * l
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a as u64, b as u64) as usize * b
}

/// Constant-speed traversal of the nK_ν edges of ν, started `offset` edges
/// into the path.
pub fn loop_from_nu_with_offset(
    poly: &ArchimedeanPolyhedron,
    nu: &NuSequence,
    period: f64,
    m: usize,
    offset: f64,
) -> Result<GeneratingLoop, LoopError> {
    let path = nu.unrolled();
    let l = path.len() as f64;
    GeneratingLoop::from_fn(poly.kind, period, m, |t| {
        let s = (offset + t / period * l).rem_euclid(l);
        let k = (s.floor() as usize).min(path.len() - 1);
        let f = s - k as f64;
        let a = poly.vertices[path[k]];
        let b = poly.vertices[path[(k + 1) % path.len()]];
        a * (1.0 - f) + b * f
    })
}

/// The test loop v^(ν,n), starting at the first vertex of ν.
pub fn loop_from_nu(poly: &ArchimedeanPolyhedron, nu: &NuSequence, period: f64, m: usize) -> Result<GeneratingLoop, LoopError> {
    loop_from_nu_with_offset(poly, nu, period, m, 0.0)
}

/// The test loop u^(σ,n): constant-speed polyline through the chamber centres.
pub fn loop_from_sigma(complex: &ChamberComplex, sigma: &SigmaSequence, period: f64, m: usize) -> Result<GeneratingLoop, LoopError> {
    let centers: Vec<Vec3> = sigma.unrolled().iter().map(|&c| chamber_center(complex, c)).collect();
    let l = centers.len();
    let mut cum = vec![0.0];
    for k in 0..l {
        let d = (centers[(k + 1) % l] - centers[k]).norm();
        cum.push(cum[k] + d);
    }
    let total = cum[l];
    GeneratingLoop::from_fn(complex.group.kind, period, m, |t| {
        let s = (t / period * total).rem_euclid(total);
        let k = cum.partition_point(|&c| c <= s).saturating_sub(1).min(l - 1);
        let seg = cum[k + 1] - cum[k];
        let f = if seg > 0.0 { (s - cum[k]) / seg } else { 0.0 };
        centers[k] * (1.0 - f) + centers[(k + 1) % l] * f
    })
}

/// The N trajectories `u_j = R_j u_1`, indexed `[particle][sample]`.
pub fn expand_orbit(lp: &GeneratingLoop) -> Vec<Vec<Vec3>> {
    lp.group.group().matrices().map(|r| lp.samples.iter().map(|x| r * x).collect()).collect()
}

/// Radius minimizing the circular-loop action estimate, `(3T²/64π²)^{1/3}`.
pub fn k4_optimal_radius(period: f64) -> f64 {
    (3.0 * period * period / (64.0 * PI * PI)).cbrt()
}

/// Four half circles of radius ρ: C₂⁺, C₁⁺, C₂⁻, C₁⁻ (centres on the ξ₂ and
/// ξ₃ axes), traversed at constant speed 4πρ/T.
pub fn k4_test_loop(rho: f64, period: f64, m: usize) -> Result<GeneratingLoop, LoopError> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(LoopError::BadRadius(rho));
    }
    let v = |x: f64, y: f64, z: f64| Vec3::new(x, y, z) * rho;
    // quarter arcs: centre, start, end (unit radius)
    let first: [(Vec3, Vec3, Vec3); 4] = [
        (v(0.0, 1.0, 0.0), v(1.0, 1.0, 0.0), v(0.0, 1.0, 1.0)),
        (v(0.0, 0.0, 1.0), v(0.0, 1.0, 1.0), v(-1.0, 0.0, 1.0)),
        (v(0.0, 0.0, 1.0), v(-1.0, 0.0, 1.0), v(0.0, -1.0, 1.0)),
        (v(0.0, -1.0, 0.0), v(0.0, -1.0, 1.0), v(1.0, -1.0, 0.0)),
    ];
    let r1 = Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0));
    let arcs: Vec<(Vec3, Vec3, Vec3)> = first.iter().copied().chain(first.iter().map(|&(c, a, b)| (r1 * c, r1 * a, r1 * b))).collect();
    GeneratingLoop::from_fn(GroupKind::Klein4, period, m, |t| {
        let s = (t / period).rem_euclid(1.0) * 8.0;
        let q = (s.floor() as usize).min(7);
        let phi = (s - q as f64) * FRAC_PI_2;
        let (c, a, b) = arcs[q];
        c + (a - c) * phi.cos() + (b - c) * phi.sin()
    })
}

/// Time shift as a reduced fraction of the period, kept in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Shift {
    pub num: i64,
    pub den: u64,
}

impl Shift {
    pub fn new(num: i64, den: u64) -> Self {
        let d = den.max(1) as i64;
        let n = num.rem_euclid(d);
        let g = gcd(n.unsigned_abs(), d as u64).max(1);
        Shift { num: n / g as i64, den: d as u64 / g }
    }

    pub fn zero() -> Self {
        Shift { num: 0, den: 1 }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Operator `(ρu)(t) = A u(εt + τ)` on loop space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopOp {
    pub matrix: Mat3,
    pub reverse: bool,
    pub shift: Shift,
}

impl LoopOp {
    pub fn identity() -> Self {
        LoopOp { matrix: Mat3::identity(), reverse: false, shift: Shift::zero() }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LoopOp) -> LoopOp {
        let e2: i64 = if other.reverse { -1 } else { 1 };
        let (a, b) = (self.shift, other.shift);
        let den = a.den * b.den;
        let num = e2 * a.num * b.den as i64 + b.num * a.den as i64;
        LoopOp { matrix: self.matrix * other.matrix, reverse: self.reverse != other.reverse, shift: Shift::new(num, den) }
    }

    fn same(&self, other: &LoopOp) -> bool {
        self.reverse == other.reverse && self.shift == other.shift && matrix_distance(&self.matrix, &other.matrix) < 1e-9
    }

    /// Grid offset `τm`; the grid must resolve the shift.
    pub fn grid_shift(&self, m: usize) -> Result<i64, LoopError> {
        let prod = self.shift.num as u128 * m as u128;
        if prod % self.shift.den as u128 != 0 {
            return Err(LoopError::IncompatibleGrid { m, divisor: self.shift.den });
        }
        Ok((prod / self.shift.den as u128) as i64)
    }

    /// Applies the operator to a field sampled on the grid (loops and gradients alike).
    pub fn apply_samples(&self, xs: &[Vec3]) -> Result<Vec<Vec3>, LoopError> {
        let m = xs.len() as i64;
        let k = self.grid_shift(xs.len())?;
        let e = if self.reverse { -1 } else { 1 };
        Ok((0..m).map(|j| self.matrix * xs[(e * j + k).rem_euclid(m) as usize]).collect())
    }

    pub fn apply(&self, lp: &GeneratingLoop) -> Result<GeneratingLoop, LoopError> {
        Ok(lp.with_samples(self.apply_samples(&lp.samples)?))
    }
}

/// Symmetry conditions imposed on the generating particle.
#[derive(Debug, Clone, PartialEq)]
pub enum SymmetryConstraint {
    /// (b) u(t + T/H) = R u(t) and (c) u(t) = S₃ u(−t) in the frame of `solid`.
    Abc { solid: Solid, s3: Mat3, rotation: Mat3 },
    /// u(t) = R̃_Π u(−t) and u(t + T/M) = R u(t).
    Tilde { mirror: Mat3, m: usize, rotation: Mat3 },
    /// u(t) = S₃u(−t), u(T/4 + t) = S₂u(T/4 − t).
    K4,
}

impl SymmetryConstraint {
    /// Conditions of 𝒦ᵢᴾ with the rotation by +2π/H about ξ₁ of `solid`'s frame.
    pub fn abc(solid: Solid) -> Self {
        let f = reference_frame(solid);
        SymmetryConstraint::Abc { solid, s3: f.s3(), rotation: f.face_rotation() }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SymmetryConstraint::Abc { .. } => "abc",
            SymmetryConstraint::Tilde { .. } => "tilde",
            SymmetryConstraint::K4 => "k4",
        }
    }

    pub fn generators(&self) -> Vec<LoopOp> {
        match self {
            SymmetryConstraint::Abc { solid, s3, rotation } => vec![
                LoopOp { matrix: *s3, reverse: true, shift: Shift::zero() },
                LoopOp { matrix: *rotation, reverse: false, shift: Shift::new(-1, solid.h() as u64) },
            ],
            SymmetryConstraint::Tilde { mirror, m, rotation } => vec![
                LoopOp { matrix: *mirror, reverse: true, shift: Shift::zero() },
                LoopOp { matrix: *rotation, reverse: false, shift: Shift::new(-1, *m as u64) },
            ],
            SymmetryConstraint::K4 => vec![
                LoopOp { matrix: Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0)), reverse: true, shift: Shift::zero() },
                LoopOp { matrix: Mat3::from_diagonal(&Vec3::new(1.0, -1.0, 1.0)), reverse: true, shift: Shift::new(1, 2) },
            ],
        }
    }

    /// The finite group generated on loop space.
    pub fn group_ops(&self) -> Vec<LoopOp> {
        let gens = self.generators();
        let mut ops = vec![LoopOp::identity()];
        let mut i = 0;
        while i < ops.len() {
            for g in &gens {
                let c = ops[i].compose(g);
                if !ops.iter().any(|o| o.same(&c)) {
                    ops.push(c);
                }
            }
            i += 1;
            assert!(ops.len() <= 4096, "constraint operators do not generate a finite group");
        }
        ops
    }

    /// Every grid size compatible with the constraint is a multiple of this.
    pub fn grid_divisor(&self) -> usize {
        self.group_ops().iter().fold(1, |acc, o| lcm(acc, o.shift.den as usize))
    }

    /// Largest deviation `|g·u − u|` over the generators.
    pub fn residual(&self, lp: &GeneratingLoop) -> Result<f64, LoopError> {
        let mut worst: f64 = 0.0;
        for g in self.generators() {
            worst = worst.max(g.apply(lp)?.max_difference(lp));
        }
        Ok(worst)
    }

    /// Group average of a sampled field.
    pub fn project_samples(&self, xs: &[Vec3]) -> Result<Vec<Vec3>, LoopError> {
        let ops = self.group_ops();
        let mut acc = vec![Vec3::zeros(); xs.len()];
        for o in &ops {
            for (a, y) in acc.iter_mut().zip(o.apply_samples(xs)?) {
                *a += y;
            }
        }
        let w = 1.0 / ops.len() as f64;
        Ok(acc.into_iter().map(|a| a * w).collect())
    }
}

/// Orthogonal projection onto the loops fixed by the constraint.
pub fn symmetrize(lp: &GeneratingLoop, constraint: &SymmetryConstraint) -> Result<GeneratingLoop, LoopError> {
    Ok(lp.with_samples(constraint.project_samples(&lp.samples)?))
}

/// Homotopy data of a cone.
#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    Sigma(SigmaSequence),
    Nu(NuSequence),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum ConeKind {
    K4,
    KPi { solid: Solid, i: usize },
    Knu { id: String },
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeDescriptor {
    pub group: GroupKind,
    pub kind: ConeKind,
    pub topology: Option<Topology>,
    pub symmetry: Option<SymmetryConstraint>,
}

impl ConeDescriptor {
    pub fn k4() -> Self {
        ConeDescriptor { group: GroupKind::Klein4, kind: ConeKind::K4, topology: None, symmetry: Some(SymmetryConstraint::K4) }
    }

    /// Expected reduced σ, when the cone carries a topology.
    pub fn sigma(&self) -> Option<SigmaSequence> {
        match self.topology.as_ref()? {
            Topology::Sigma(s) => Some(s.clone()),
            Topology::Nu(nu) => ArchimedeanPolyhedron::get(self.group).ok()?.sigma_from_nu(nu).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport {
    pub min_gamma_distance: f64,
    pub on_boundary: bool,
    /// (u₁₁(0), u₁₁(T/4)) for 𝒦₄.
    pub sign_test: Option<(f64, f64)>,
    /// u(0) and u(T/2H) inside their open angles, for 𝒦ᵢᴾ.
    pub angles: Option<(bool, bool)>,
    pub invariant_matches: Option<bool>,
    pub symmetry_residual: Option<f64>,
    pub member: bool,
}

/// Open angles (u(0), u(T/2H)) defining 𝒦ᵢᴾ.
pub fn kpi_angles(solid: Solid, i: usize) -> Option<((Vec3, Vec3), (Vec3, Vec3))> {
    let f = reference_frame(solid);
    let (e1, em, ev, ea, eb) = (f.e1(), f.e_m(), f.e_v(), f.e_alpha(), f.e_beta());
    match i {
        1 => Some(((em, ea), (e1, ev))),
        2 => Some(((em, ea), (ev, eb))),
        3 => Some(((e1, em), (ev, eb))),
        _ => None,
    }
}

pub fn cone_membership_report(lp: &GeneratingLoop, cone: &ConeDescriptor) -> Result<ConeReport, LoopError> {
    if lp.group != cone.group {
        return Err(LoopError::GroupMismatch { expected: cone.group, found: lp.group });
    }
    let dist = lp.min_gamma_distance();
    let on_boundary = dist <= 1e-12 * lp.sup_norm().max(1.0);
    let mut member = !on_boundary;
    let mut report = ConeReport {
        min_gamma_distance: dist,
        on_boundary,
        sign_test: None,
        angles: None,
        invariant_matches: None,
        symmetry_residual: None,
        member,
    };
    if let Some(sym) = &cone.symmetry {
        let r = sym.residual(lp)?;
        report.symmetry_residual = Some(r);
        member &= r <= 1e-9 * lp.sup_norm().max(1.0);
    }
    match &cone.kind {
        ConeKind::K4 => {
            let a = lp.at(0.0).x;
            let b = lp.at(lp.period / 4.0).x;
            report.sign_test = Some((a, b));
            member &= a * b < 0.0;
        }
        ConeKind::KPi { solid, i } => {
            if let Some(((a0, b0), (a1, b1))) = kpi_angles(*solid, *i) {
                let u0 = lp.at(0.0);
                let uh = lp.at(lp.period / (2.0 * solid.h() as f64));
                let ok = (in_open_angle(&u0, &a0, &b0, ANGLE_TOL), in_open_angle(&uh, &a1, &b1, ANGLE_TOL));
                member &= ok.0 && ok.1;
                report.angles = Some(ok);
            }
        }
        ConeKind::Knu { .. } | ConeKind::Free => {}
    }
    if let (Some(expected), false) = (cone.sigma(), on_boundary) {
        let ok = topology::invariant(lp).map(|s| s == expected).unwrap_or(false);
        report.invariant_matches = Some(ok);
        if matches!(cone.kind, ConeKind::Knu { .. } | ConeKind::Free) {
            member &= ok;
        }
    }
    report.member = member;
    Ok(report)
}
