//! Descent on the discrete action inside a cone, with cone audits and an
//! a-posteriori check against Newton's equations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{action, check_alpha, differences, inv_pow, scaling_for, ActionError};
use crate::chambers::SigmaSequence;
use crate::loops::{cone_membership_report, ConeDescriptor, ConeKind, GeneratingLoop, LoopError};
use crate::symmetry::Vec3;
use crate::topology::{self, CrossingAudit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error("invalid flow parameter: {0}")]
    Params(String),
    #[error("initial loop is not in the cone: {0}")]
    NotInCone(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Plain L² gradient.
    L2,
    /// L² gradient preconditioned by the discrete (−d²/dt² + (2π/T)²) operator.
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct FlowParams {
    /// Initial trial step.
    pub step: f64,
    pub max_steps: usize,
    /// Stop when the gradient norm falls below this fraction of its initial value.
    pub grad_tol: f64,
    pub backtrack: f64,
    pub armijo: f64,
    /// Abort threshold on the distance to Γ, relative to the loop diameter.
    pub min_dist_floor: f64,
    pub alpha: f64,
    pub audit_every: usize,
    pub metric: Metric,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            step: 1.0,
            max_steps: 20_000,
            grad_tol: 1e-8,
            backtrack: 0.5,
            armijo: 1e-4,
            min_dist_floor: 1e-4,
            alpha: 1.0,
            audit_every: 50,
            metric: Metric::H1,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |what: &str| Err(FlowError::Params(what.to_string()));
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be positive");
        }
        if self.max_steps == 0 {
            return bad("maxSteps must be positive");
        }
        if !(self.grad_tol > 0.0) {
            return bad("gradTol must be positive");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtracking factor must lie in (0, 1)");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo constant must lie in (0, 1)");
        }
        if !(self.min_dist_floor > 0.0) {
            return bad("minDistFloor must be positive");
        }
        if self.audit_every == 0 {
            return bad("auditEvery must be positive");
        }
        check_alpha(self.alpha).map_err(|e| FlowError::Params(e.to_string()))
    }
}

/// Exact partial derivatives of the discrete action with respect to every sample.
pub fn discrete_gradient(lp: &GeneratingLoop, alpha: f64) -> Result<Vec<Vec3>, ActionError> {
    check_alpha(alpha)?;
    // surfaces collisions with their location
    crate::action::potential(lp, alpha)?;
    let n = lp.group.order() as f64;
    let h = lp.dt();
    let m = lp.m() as i64;
    let diffs = differences(lp.group);
    let kin = n / h;
    let pot = 0.5 * n * h * alpha;
    Ok((0..m)
        .map(|j| {
            let x = lp.sample(j);
            let mut g = (x * 2.0 - lp.sample(j - 1) - lp.sample(j + 1)) * kin;
            for d in &diffs {
                let y = d * x;
                let r2 = y.norm_squared();
                g -= d.transpose() * y * (pot * inv_pow(r2, 0.5 * alpha + 1.0));
            }
            g
        })
        .collect())
}

/// Gradient projected onto the constraint subspace when one is given.
pub fn projected_gradient(lp: &GeneratingLoop, alpha: f64, cone: Option<&ConeDescriptor>) -> Result<Vec<Vec3>, FlowError> {
    let g = discrete_gradient(lp, alpha)?;
    match cone.and_then(|c| c.symmetry.as_ref()) {
        Some(sym) => Ok(sym.project_samples(&g)?),
        None => Ok(g),
    }
}

/// Solves (N/h)(2w_j − w_{j−1} − w_{j+1}) + μ w_j = g_j on the periodic grid,
/// μ = N h (2π/T)².
fn precondition(g: &[Vec3], n: f64, h: f64, period: f64) -> Vec<Vec3> {
    let off = -n / h;
    let diag = 2.0 * n / h + n * h * (std::f64::consts::TAU / period).powi(2);
    let cols: Vec<Vec<f64>> = (0..3).map(|k| cyclic_solve(diag, off, &g.iter().map(|x| x[k]).collect::<Vec<_>>())).collect();
    (0..g.len()).map(|j| Vec3::new(cols[0][j], cols[1][j], cols[2][j])).collect()
}

/// Symmetric circulant tridiagonal solve (Sherman-Morrison on the Thomas algorithm).
fn cyclic_solve(diag: f64, off: f64, rhs: &[f64]) -> Vec<f64> {
    let m = rhs.len();
    let gamma = -diag;
    let mut b = vec![diag; m];
    b[0] -= gamma;
    b[m - 1] -= off * off / gamma;
    let thomas = |r: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        c[0] = off / b[0];
        d[0] = r[0] / b[0];
        for i in 1..m {
            let den = b[i] - off * c[i - 1];
            c[i] = off / den;
            d[i] = (r[i] - off * d[i - 1]) / den;
        }
        for i in (0..m - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        d
    };
    let x = thomas(rhs);
    let mut u = vec![0.0; m];
    u[0] = gamma;
    u[m - 1] = off;
    let z = thomas(&u);
    let fact = (x[0] + off * x[m - 1] / gamma) / (1.0 + z[0] + off * z[m - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn dot(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// L² norm of the L² gradient: (Σ_j |g_j|² / h)^{1/2}.
pub fn gradient_norm(g: &[Vec3], h: f64) -> f64 {
    (dot(g, g) / h).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowRecord {
    pub iteration: usize,
    pub action: f64,
    pub grad_norm: f64,
    pub min_distance: f64,
    pub step: f64,
    /// Cone audit result on audit iterations.
    pub cone_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason")]
pub enum Termination {
    Converged,
    MaxSteps,
    /// No step satisfied the Armijo condition (gradient at round-off level).
    Stalled,
    /// Possible boundary minimizer: distance to Γ fell below the floor.
    BoundaryApproach { distance: f64, floor: f64 },
    ConeChanged { iteration: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowTrace {
    pub records: Vec<FlowRecord>,
    #[serde(skip)]
    pub final_loop: GeneratingLoop,
    pub termination: Termination,
    pub initial_action: f64,
    pub final_action: f64,
    pub initial_grad_norm: f64,
    pub final_grad_norm: f64,
    pub steps: usize,
}

impl FlowTrace {
    /// Whether recorded actions never increase.
    pub fn monotone(&self) -> bool {
        self.records.windows(2).all(|w| w[1].action <= w[0].action)
    }

    pub fn converged(&self) -> bool {
        matches!(self.termination, Termination::Converged | Termination::Stalled)
    }
}

/// Cone check used after every step: same invariant, or the 𝒦₄ sign test.
fn in_cone(lp: &GeneratingLoop, cone: Option<&ConeDescriptor>, expected: &Option<SigmaSequence>) -> bool {
    let Some(cone) = cone else { return true };
    if let Some(s) = expected {
        return topology::invariant(lp).is_ok_and(|x| &x == s);
    }
    if cone.kind == ConeKind::K4 {
        let (a, b) = (lp.at(0.0).x, lp.at(lp.period / 4.0).x);
        return a * b < 0.0 && lp.min_gamma_distance() > 0.0;
    }
    lp.min_gamma_distance() > 0.0
}

/// Full membership audit.
fn audit(lp: &GeneratingLoop, cone: Option<&ConeDescriptor>, expected: &Option<SigmaSequence>) -> bool {
    let Some(c) = cone else { return true };
    in_cone(lp, cone, expected) && cone_membership_report(lp, c).is_ok_and(|r| r.member || (expected.is_some() && !r.on_boundary && r.angles.is_none_or(|a| a.0 && a.1)))
}

/// Armijo descent from `loop0` inside the cone.
pub fn gradient_flow(loop0: &GeneratingLoop, cone: Option<&ConeDescriptor>, params: &FlowParams) -> Result<FlowTrace, FlowError> {
    params.validate()?;
    let alpha = params.alpha;
    let sym = cone.and_then(|c| c.symmetry.as_ref());
    let mut u = match sym {
        Some(s) => crate::loops::symmetrize(loop0, s)?,
        None => loop0.clone(),
    };
    let expected = if u.group.is_polyhedral() { topology::invariant(&u).ok() } else { None };
    if !audit(&u, cone, &expected) {
        return Err(FlowError::NotInCone(format!("{:?}", cone.map(|c| &c.kind))));
    }
    let floor = params.min_dist_floor * u.diameter();
    let n = u.group.order() as f64;
    let h = u.dt();
    let mut value = action(&u, alpha)?.total;
    let mut grad = projected_gradient(&u, alpha, cone)?;
    let g0 = gradient_norm(&grad, h);
    let mut gnorm = g0;
    let mut step = params.step;
    let mut records = vec![FlowRecord {
        iteration: 0,
        action: value,
        grad_norm: gnorm,
        min_distance: u.min_gamma_distance(),
        step: 0.0,
        cone_ok: Some(true),
    }];
    let initial_action = value;
    let mut termination = Termination::MaxSteps;
    let mut steps = 0;
    for it in 1..=params.max_steps {
        if gnorm <= params.grad_tol * g0.max(f64::MIN_POSITIVE) || gnorm == 0.0 {
            termination = Termination::Converged;
            break;
        }
        let dir: Vec<Vec3> = match params.metric {
            Metric::L2 => grad.iter().map(|g| -g / h).collect(),
            Metric::H1 => {
                let w = precondition(&grad, n, h, u.period);
                let w = match sym {
                    Some(s) => s.project_samples(&w)?,
                    None => w,
                };
                w.into_iter().map(|x| -x).collect()
            }
        };
        let slope = dot(&grad, &dir);
        if !(slope < 0.0) {
            termination = Termination::Stalled;
            break;
        }
        let mut s = (step * 2.0).min(params.step * 16.0);
        let mut accepted = None;
        while s > 1e-18 {
            let trial: Vec<Vec3> = u.samples.iter().zip(&dir).map(|(x, d)| x + d * s).collect();
            let trial = match sym {
                Some(sy) => sy.project_samples(&trial)?,
                None => trial,
            };
            let cand = u.with_samples(trial);
            if let Ok(b) = action(&cand, alpha) {
                // a large step can carry a grid segment across an axis without
                // any sample coming near it, so the cone is re-checked here
                if b.total <= value + params.armijo * s * slope && in_cone(&cand, cone, &expected) {
                    accepted = Some((cand, b.total));
                    break;
                }
            }
            s *= params.backtrack;
        }
        let Some((cand, v)) = accepted else {
            termination = Termination::Stalled;
            break;
        };
        step = s;
        u = cand;
        value = v;
        steps = it;
        grad = projected_gradient(&u, alpha, cone)?;
        gnorm = gradient_norm(&grad, h);
        let dist = u.min_gamma_distance();
        let cone_ok = if it % params.audit_every == 0 { Some(audit(&u, cone, &expected)) } else { None };
        records.push(FlowRecord { iteration: it, action: value, grad_norm: gnorm, min_distance: dist, step: s, cone_ok });
        if dist < floor {
            termination = Termination::BoundaryApproach { distance: dist, floor };
            break;
        }
        if cone_ok == Some(false) {
            termination = Termination::ConeChanged { iteration: it };
            break;
        }
    }
    if matches!(termination, Termination::Converged | Termination::Stalled | Termination::MaxSteps) && !audit(&u, cone, &expected) {
        termination = Termination::ConeChanged { iteration: steps };
    }
    Ok(FlowTrace {
        records,
        final_loop: u,
        termination,
        initial_action,
        final_action: value,
        initial_grad_norm: g0,
        final_grad_norm: gnorm,
        steps,
    })
}

/// α Σ_{R≠I} (R − I)x / |(R − I)x|^{α+2}.
pub fn newton_force(diffs: &[crate::symmetry::Mat3], x: &Vec3, alpha: f64) -> Vec3 {
    diffs.iter().fold(Vec3::zeros(), |acc, d| {
        let y = d * x;
        acc + y * (alpha * inv_pow(y.norm_squared(), 0.5 * alpha + 1.0))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionReport {
    pub m: usize,
    pub alpha: f64,
    /// max_j |ü_j − F(u_j)| with a fourth-order second difference.
    pub newton_residual: f64,
    /// Same, divided by max_j |F(u_j)|.
    pub relative_residual: f64,
    /// Residual of the discrete Euler-Lagrange equations (three-point stencil).
    pub discrete_residual: f64,
    pub energy_mean: f64,
    /// (max − min)/|mean| of the per-particle energy over one period.
    pub energy_drift: f64,
    pub crossings: Option<CrossingAudit>,
}

/// Residual of Newton's equations and energy conservation along a loop.
pub fn verify_solution(lp: &GeneratingLoop, alpha: f64) -> Result<SolutionReport, FlowError> {
    check_alpha(alpha)?;
    crate::action::potential(lp, alpha)?;
    let diffs = differences(lp.group);
    let h = lp.dt();
    let m = lp.m() as i64;
    let mut res: f64 = 0.0;
    let mut dres: f64 = 0.0;
    let mut fmax: f64 = 0.0;
    let mut energies = Vec::with_capacity(lp.m());
    for j in 0..m {
        let u = |k: i64| lp.sample(j + k);
        let f = newton_force(&diffs, &u(0), alpha);
        let acc4 = (-u(2) + u(1) * 16.0 - u(0) * 30.0 + u(-1) * 16.0 - u(-2)) / (12.0 * h * h);
        let acc2 = (u(1) - u(0) * 2.0 + u(-1)) / (h * h);
        res = res.max((acc4 - f).norm());
        dres = dres.max((acc2 - f).norm());
        fmax = fmax.max(f.norm());
        let v = (-u(2) + u(1) * 8.0 - u(-1) * 8.0 + u(-2)) / (12.0 * h);
        let pot: f64 = diffs.iter().map(|d| inv_pow((d * u(0)).norm(), alpha)).sum();
        energies.push(0.5 * v.norm_squared() - 0.5 * pot);
    }
    let mean = energies.iter().sum::<f64>() / energies.len() as f64;
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let crossings = if lp.group.is_polyhedral() {
        topology::invariant(lp).ok().and_then(|s| topology::crossing_count_audit(lp, &s).ok())
    } else {
        None
    };
    Ok(SolutionReport {
        m: lp.m(),
        alpha,
        newton_residual: res,
        relative_residual: res / fmax.max(f64::MIN_POSITIVE),
        discrete_residual: dres,
        energy_mean: mean,
        energy_drift: (hi - lo) / mean.abs().max(f64::MIN_POSITIVE),
        crossings,
    })
}

/// Distance to one axis of Γ against the cylinder radius 1/(2 sin(π/|C_p|)).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderCheck {
    pub axis: usize,
    pub fold: usize,
    pub predicted_radius: f64,
    pub min_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSummary {
    pub alpha: f64,
    pub sup_norm: f64,
    /// ∫|u̇| over one period.
    pub speed_l1: f64,
    pub mean_speed: f64,
    pub min_speed: f64,
    pub max_speed: f64,
    pub action: f64,
    pub kinetic: f64,
    pub termination: Option<Termination>,
    pub steps: usize,
    pub cylinders: Vec<CylinderCheck>,
    pub error: Option<String>,
}

pub fn cylinder_checks(lp: &GeneratingLoop) -> Vec<CylinderCheck> {
    let axes = lp.group.group().axes();
    axes.axes
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let d = lp
                .samples
                .iter()
                .map(|x| (x - a.direction * a.direction.dot(x)).norm())
                .fold(f64::INFINITY, f64::min);
            CylinderCheck {
                axis: i,
                fold: a.fold,
                predicted_radius: 1.0 / (2.0 * (std::f64::consts::PI / a.fold as f64).sin()),
                min_distance: d,
            }
        })
        .collect()
}

fn summarize(alpha: f64, lp: &GeneratingLoop) -> AlphaSummary {
    let speeds = lp.speeds();
    let (kinetic, total) = match action(lp, alpha) {
        Ok(b) => (b.kinetic, b.total),
        Err(_) => (crate::action::kinetic(lp), f64::INFINITY),
    };
    AlphaSummary {
        alpha,
        sup_norm: lp.sup_norm(),
        speed_l1: lp.path_length(),
        mean_speed: lp.path_length() / lp.period,
        min_speed: speeds.iter().copied().fold(f64::INFINITY, f64::min),
        max_speed: speeds.iter().copied().fold(0.0, f64::max),
        action: total,
        kinetic,
        termination: None,
        steps: 0,
        cylinders: cylinder_checks(lp),
        error: None,
    }
}

/// Minimizes for each α in turn, warm-starting from the previous minimizer
/// rescaled by the optimal homothety for the new exponent.
pub fn alpha_sweep(loop0: &GeneratingLoop, cone: Option<&ConeDescriptor>, alphas: &[f64], params: &FlowParams) -> Vec<AlphaSummary> {
    let mut current = loop0.clone();
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let p = FlowParams { alpha, ..*params };
        let start = match action(&current, alpha).and_then(|b| scaling_for(b.kinetic, b.potential, alpha)) {
            Ok((lambda, _)) => current.scaled(lambda),
            Err(_) => current.clone(),
        };
        match gradient_flow(&start, cone, &p) {
            Ok(trace) => {
                let mut s = summarize(alpha, &trace.final_loop);
                s.steps = trace.steps;
                s.termination = Some(trace.termination.clone());
                current = trace.final_loop;
                out.push(s);
            }
            Err(e) => {
                let mut s = summarize(alpha, &start);
                s.error = Some(e.to_string());
                out.push(s);
            }
        }
    }
    out
}
