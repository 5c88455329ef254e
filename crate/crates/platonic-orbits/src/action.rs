//! The reduced action with 1/r^α potential on the discrete loop model, the
//! optimal homothety and the υ integrals of the test-loop estimate.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archimedean::{ArchError, ArchimedeanPolyhedron, NuSequence};
use crate::loops::GeneratingLoop;
use crate::quadrature::{integrate, QuadError};
use crate::symmetry::{GroupKind, Mat3, Vec3};

/// Relative distance to Γ below which a sample counts as a collision.
pub const COLLISION_TOL: f64 = 1e-12;
/// Absolute tolerance of the υ quadrature.
pub const UPSILON_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error("collision at t = {time} (sample {index}) with the image under element {element}: |(R−I)u| = {distance:e}")]
    Collision { index: usize, time: f64, element: usize, distance: f64 },
    #[error("kinetic part vanishes; the optimal scaling is undefined")]
    ZeroKinetic,
    #[error("potential part vanishes; the optimal scaling is undefined")]
    ZeroPotential,
    #[error("exponent α must be positive, got {0}")]
    BadAlpha(f64),
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("edge index {0} outside 1..=2")]
    BadEdge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
    pub alpha: f64,
    pub lambda_star: f64,
    pub scaled_min: f64,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), ActionError> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(ActionError::BadAlpha(alpha))
    }
}

/// |x|^{−α}, exact reciprocal for α = 1.
pub(crate) fn inv_pow(d: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        1.0 / d
    } else {
        d.powf(-alpha)
    }
}

/// Images `R − I` for the non-identity elements.
pub(crate) fn differences(group: GroupKind) -> Vec<Mat3> {
    group.group().matrices().skip(1).map(|r| r - Mat3::identity()).collect()
}

/// (N/2) Σ_j |u_{j+1} − u_j|² / h.
pub fn kinetic(lp: &GeneratingLoop) -> f64 {
    let n = lp.group.order() as f64;
    let m = lp.m() as i64;
    let h = lp.dt();
    let s: f64 = (0..m).map(|j| (lp.sample(j + 1) - lp.sample(j)).norm_squared()).sum();
    0.5 * n * s / h
}

/// (N/2) h Σ_j Σ_{R≠I} |(R − I)u_j|^{−α}.
pub fn potential(lp: &GeneratingLoop, alpha: f64) -> Result<f64, ActionError> {
    check_alpha(alpha)?;
    let n = lp.group.order() as f64;
    let diffs = differences(lp.group);
    let mut s = 0.0;
    for (j, x) in lp.samples.iter().enumerate() {
        let floor = COLLISION_TOL * x.norm().max(1e-300);
        for (e, d) in diffs.iter().enumerate() {
            let r = (d * x).norm();
            if r <= floor {
                return Err(ActionError::Collision { index: j, time: lp.time(j), element: e + 1, distance: r });
            }
            s += inv_pow(r, alpha);
        }
    }
    let value = 0.5 * n * lp.dt() * s;
    if !value.is_finite() {
        let (index, element, distance) = closest_approach(lp);
        return Err(ActionError::Collision { index, time: lp.time(index), element, distance });
    }
    Ok(value)
}

/// Sample, element and distance of the smallest |(R − I)u_j|.
pub fn closest_approach(lp: &GeneratingLoop) -> (usize, usize, f64) {
    let diffs = differences(lp.group);
    let mut best = (0, 1, f64::INFINITY);
    for (j, x) in lp.samples.iter().enumerate() {
        for (e, d) in diffs.iter().enumerate() {
            let r = (d * x).norm();
            if r < best.2 {
                best = (j, e + 1, r);
            }
        }
    }
    best
}

/// Minimum over λ > 0 of λ²A_K + λ^{−α}A_U, and its argument.
pub fn scaling_for(kinetic: f64, potential: f64, alpha: f64) -> Result<(f64, f64), ActionError> {
    check_alpha(alpha)?;
    if !(kinetic > 0.0) {
        return Err(ActionError::ZeroKinetic);
    }
    if !(potential > 0.0) {
        return Err(ActionError::ZeroPotential);
    }
    let lambda = (alpha * potential / (2.0 * kinetic)).powf(1.0 / (alpha + 2.0));
    let min = if alpha == 1.0 {
        3.0 * (kinetic * potential * potential / 4.0).cbrt()
    } else {
        lambda * lambda * kinetic + inv_pow(lambda, alpha) * potential
    };
    Ok((lambda, min))
}

pub fn action(lp: &GeneratingLoop, alpha: f64) -> Result<ActionBreakdown, ActionError> {
    let k = kinetic(lp);
    let u = potential(lp, alpha)?;
    let (lambda_star, scaled_min) = match scaling_for(k, u, alpha) {
        Ok(v) => v,
        Err(ActionError::ZeroKinetic) => (f64::INFINITY, u),
        Err(e) => return Err(e),
    };
    Ok(ActionBreakdown { kinetic: k, potential: u, total: k + u, alpha, lambda_star, scaled_min })
}

/// (λ*, min_λ A(λu)) of a breakdown.
pub fn optimal_scaling(b: &ActionBreakdown) -> Result<(f64, f64), ActionError> {
    scaling_for(b.kinetic, b.potential, b.alpha)
}

/// ∫₀¹ Σ_{R≠I} |(R − I) R′[(1−s)q + s q_i]|^{−1} ds.
pub fn upsilon_conjugated(poly: &ArchimedeanPolyhedron, i: usize, r_prime: &Mat3) -> Result<f64, ActionError> {
    let end = match i {
        1 => poly.q1,
        2 => poly.q2,
        other => return Err(ActionError::BadEdge(other)),
    };
    let diffs = differences(poly.kind);
    let (a, b) = (r_prime * poly.q, r_prime * end);
    let f = |s: f64| {
        let x: Vec3 = a * (1.0 - s) + b * s;
        diffs.iter().map(|d| 1.0 / (d * x).norm()).sum::<f64>()
    };
    Ok(integrate(f, 0.0, 1.0, UPSILON_TOL)?.value)
}

/// υ_i of the group, computed once.
pub fn upsilon(group: GroupKind, i: usize) -> Result<f64, ActionError> {
    static CACHE: OnceLock<Vec<[f64; 2]>> = OnceLock::new();
    if !(1..=2).contains(&i) {
        return Err(ActionError::BadEdge(i));
    }
    let slot = match group {
        GroupKind::Tetrahedral => 0,
        GroupKind::Octahedral => 1,
        GroupKind::Icosahedral => 2,
        _ => return Err(ArchError::from(crate::chambers::ChamberError::Unsupported(group)).into()),
    };
    let table = CACHE.get_or_init(|| {
        GroupKind::POLYHEDRAL
            .iter()
            .map(|&g| {
                let poly = ArchimedeanPolyhedron::get(g).expect("polyhedral group");
                let id = Mat3::identity();
                [1, 2].map(|k| upsilon_conjugated(poly, k, &id).expect("integrand is bounded on the edges"))
            })
            .collect()
    });
    Ok(table[slot][i - 1])
}

/// Closed-form minimum of λ ↦ A(λ v^(ν,n)).
pub fn analytic_test_action(poly: &ArchimedeanPolyhedron, nu: &NuSequence, period: f64) -> Result<f64, ActionError> {
    let (n1, n2) = poly.edge_counts(nu);
    let s = n1 as f64 * upsilon(poly.kind, 1)? + n2 as f64 * upsilon(poly.kind, 2)?;
    let n = poly.kind.order() as f64;
    Ok(3.0 / (2.0 * 4f64.cbrt()) * n * poly.edge_length.powf(2.0 / 3.0) * s.powf(2.0 / 3.0) * period.cbrt())
}
