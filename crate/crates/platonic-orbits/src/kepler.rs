//! Symmetric Keplerian arcs against the parabolic ejection–collision pair.
//!
//! A unit mass attracted by a fixed mass μ = α/4 leaves ρn⁻ and reaches ρn⁺,
//! n± = (cos θ, ±sin θ), in the parabolic travel time 2τ. The arc crosses the
//! polar axis at ρ₀ (apocenter below θ* = √2/3, pericenter above).

use serde::Serialize;
use thiserror::Error;

use crate::quadrature::{bisect, integrate, integrate_limited, QuadError};

/// θ* = √2/3, where the solving arc is the circle.
pub fn threshold_angle() -> f64 {
    2f64.sqrt() / 3.0
}

/// Largest residual accepted from the eccentricity solve.
pub const ECC_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KeplerError {
    #[error("θ = {0} outside (0, π)")]
    BadAngle(f64),
    #[error("μ and ρ must be positive (μ = {mu}, ρ = {rho})")]
    BadScale { mu: f64, rho: f64 },
    #[error("no eccentricity in the admissible window for θ = {0}")]
    NoRoot(f64),
    #[error("eccentricity residual {residual:e} at θ = {theta}")]
    Residual { theta: f64, residual: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Which apse lies on the polar axis; selects the sign in 1 ∓ e cos φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Apocenter,
    Pericenter,
}

impl Branch {
    pub fn for_angle(theta: f64) -> Self {
        if theta <= threshold_angle() {
            Branch::Apocenter
        } else {
            Branch::Pericenter
        }
    }

    /// s in 1 + s e cos φ.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Apocenter => -1.0,
            Branch::Pericenter => 1.0,
        }
    }

    /// Open upper end of the eccentricity window at θ.
    pub fn window_end(self, theta: f64) -> f64 {
        match self {
            Branch::Apocenter => 1.0,
            Branch::Pericenter if theta <= std::f64::consts::FRAC_PI_2 => f64::INFINITY,
            Branch::Pericenter => -1.0 / theta.cos(),
        }
    }
}

/// An eccentricity together with 1 − e, kept separately near the radial limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eccentricity {
    pub e: f64,
    pub one_minus_e: f64,
    pub branch: Branch,
}

impl Eccentricity {
    pub fn new(e: f64, branch: Branch) -> Self {
        Self { e, one_minus_e: 1.0 - e, branch }
    }

    /// Apocenter-branch value from q = 1 − e.
    pub fn from_gap(q: f64) -> Self {
        Self { e: 1.0 - q, one_minus_e: q, branch: Branch::Apocenter }
    }

    /// 1 + s e cos φ, written to avoid cancellation near e = 1.
    pub fn denom(&self, phi: f64) -> f64 {
        match self.branch {
            Branch::Apocenter => self.one_minus_e + 2.0 * self.e * (0.5 * phi).sin().powi(2),
            Branch::Pericenter => self.one_minus_e + 2.0 * self.e * (0.5 * phi).cos().powi(2),
        }
    }

    /// 1 − e².
    pub fn one_minus_e2(&self) -> f64 {
        self.one_minus_e * (1.0 + self.e)
    }
}

/// ∫₀^θ dφ / (1 + s e cos φ)², to a tolerance relative to its size.
pub fn i2(ecc: &Eccentricity, theta: f64) -> Result<f64, QuadError> {
    let f = |p: f64| ecc.denom(p).powi(-2);
    let peak = f(0.0).max(f(theta));
    let rough = integrate_limited(&mut { f }, 0.0, theta, 1e-6 * theta * peak, 20_000)?.value;
    Ok(integrate_limited(&mut { f }, 0.0, theta, 1e-13 * rough, 20_000)?.value)
}

/// (1 + s e cos θ)^{3/2} I₂ − √2/3: zero exactly at e(θ).
pub fn eccentricity_residual(ecc: &Eccentricity, theta: f64) -> Result<f64, QuadError> {
    Ok(ecc.denom(theta).powf(1.5) * i2(ecc, theta)? - threshold_angle())
}

/// Root e(θ) of the travel-time equation, by bisection inside the window.
/// The apocenter branch bisects on 1 − e.
pub fn solve_eccentricity(theta: f64) -> Result<Eccentricity, KeplerError> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(KeplerError::BadAngle(theta));
    }
    let branch = Branch::for_angle(theta);
    if theta == threshold_angle() {
        return Ok(Eccentricity::new(0.0, branch));
    }
    let make = |x: f64| match branch {
        Branch::Apocenter => Eccentricity::from_gap(x),
        Branch::Pericenter => Eccentricity::new(x, branch),
    };
    let g = |x: f64| eccentricity_residual(&make(x), theta);
    // x runs from the circle towards the open end of the window
    let (start, end) = match branch {
        Branch::Apocenter => (1.0, 0.0),
        Branch::Pericenter => (0.0, branch.window_end(theta)),
    };
    let g0 = g(start)?;
    let mut last = start;
    let mut hit = None;
    for k in 1..1100 {
        let x = if end.is_finite() { end + (start - end) * 0.5f64.powi(k) } else { 2f64.powi(k - 3) };
        if x == last || x == end {
            break;
        }
        if g(x)?.signum() != g0.signum() {
            hit = Some(x);
            break;
        }
        last = x;
    }
    let far = hit.ok_or(KeplerError::NoRoot(theta))?;
    let mut err = None;
    let root = bisect(
        |x| {
            g(x).unwrap_or_else(|q| {
                err.get_or_insert(q);
                f64::NAN
            })
        },
        last.min(far),
        last.max(far),
        4.0 * f64::EPSILON * last.abs().min(far.abs()),
    );
    if let Some(q) = err {
        return Err(q.into());
    }
    let ecc = make(root.ok_or(KeplerError::NoRoot(theta))?);
    let residual = eccentricity_residual(&ecc, theta)?.abs();
    if residual > ECC_RESIDUAL_TOL {
        return Err(KeplerError::Residual { theta, residual });
    }
    Ok(ecc)
}

/// a = ¼(1−e²)/(1+s e cos θ) + s e sin θ / (√2 (1+s e cos θ)^{1/2}).
pub fn action_ratio_at(ecc: &Eccentricity, theta: f64) -> f64 {
    let c = ecc.denom(theta);
    0.25 * ecc.one_minus_e2() / c + ecc.branch.sign() * ecc.e * theta.sin() / (2f64.sqrt() * c.sqrt())
}

/// κ = lim (1 − e)/θ² as θ → 0⁺, from ∫₀¹ dx/(κ + x²/2)² = (√2/3)(κ + ½)^{−3/2}.
pub fn radial_gap_coefficient() -> Result<f64, KeplerError> {
    let g = |k: f64| {
        integrate(|x: f64| (k + 0.5 * x * x).powi(-2), 0.0, 1.0, 1e-14 * (k + 0.5).powf(-1.5))
            .map(|q| (k + 0.5).powf(1.5) * q.value - threshold_angle())
    };
    let mut err = None;
    let root = bisect(
        |k| {
            g(k).unwrap_or_else(|q| {
                err.get_or_insert(q);
                f64::NAN
            })
        },
        1e-2,
        1e2,
        1e-14,
    );
    if let Some(q) = err {
        return Err(q.into());
    }
    root.ok_or(KeplerError::NoRoot(0.0))
}

/// a(θ) = A/A₀ along the solved arcs. θ = 0 is the radial out-and-back
/// arc, the continuous limit κ/(2κ+1) − (2κ+1)^{−1/2}.
pub fn action_ratio(theta: f64) -> Result<f64, KeplerError> {
    if theta == 0.0 {
        let k = radial_gap_coefficient()?;
        return Ok(k / (2.0 * k + 1.0) - (2.0 * k + 1.0).sqrt().recip());
    }
    Ok(action_ratio_at(&solve_eccentricity(theta)?, theta))
}

/// Eccentricity on the curve ℓ where a is stationary along e cos θ = const.
pub fn ell_eccentricity(theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    (c + (c * c + 2.0 * s * s).sqrt()) / (s * s)
}

/// 1 − (1 + e cos θ)/4, the value of a on ℓ.
pub fn ell_action_ratio(e: f64, theta: f64) -> f64 {
    1.0 - 0.25 * (1.0 + e * theta.cos())
}

/// s(t) = (3^{2/3}/2) α^{1/3} t^{2/3}.
pub fn parabolic_motion(alpha: f64, t: f64) -> f64 {
    0.5 * 9f64.cbrt() * alpha.cbrt() * t.powf(2.0 / 3.0)
}

/// ṡ(t) = (α/3)^{1/3} t^{−1/3}.
pub fn parabolic_speed(alpha: f64, t: f64) -> f64 {
    (alpha / 3.0).cbrt() / t.cbrt()
}

/// A₀ = 2^{3/2}(ρμ)^{1/2}.
pub fn parabolic_action(mu: f64, rho: f64) -> f64 {
    2f64.powf(1.5) * (rho * mu).sqrt()
}

/// τ = (√2/3) ρ^{3/2} / μ^{1/2}.
pub fn parabolic_time(mu: f64, rho: f64) -> f64 {
    threshold_angle() * rho.powf(1.5) / mu.sqrt()
}

/// Action of the ejection arc 0 → ρ along s^α, by quadrature in s.
pub fn ejection_action_quadrature(alpha: f64, rho: f64) -> Result<f64, QuadError> {
    let mu = alpha / 4.0;
    // ½ṡ² + μ/s = 2μ/s on the zero-energy motion; dt = ds/ṡ, with s = w²
    let f = |w: f64| 2.0 * mu / (w * w) / (2.0 * mu / (w * w)).sqrt() * 2.0 * w;
    Ok(integrate(f, 0.0, rho.sqrt(), 1e-12)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcProblem {
    pub mu: f64,
    pub rho: f64,
    pub theta: f64,
    pub tau: f64,
    pub e: f64,
    pub one_minus_e: f64,
    pub branch: Branch,
    /// Polar-axis crossing (ρ₀, 0).
    pub rho0: f64,
    pub angular_momentum: f64,
    pub energy: f64,
}

impl ArcProblem {
    pub fn new(mu: f64, rho: f64, theta: f64) -> Result<Self, KeplerError> {
        if !(mu > 0.0 && rho > 0.0) {
            return Err(KeplerError::BadScale { mu, rho });
        }
        let ecc = solve_eccentricity(theta)?;
        let (e, branch) = (ecc.e, ecc.branch);
        // 1 ∓ e and −1 ∓ e
        let (gap, level) = match branch {
            Branch::Apocenter => (ecc.one_minus_e, -(2.0 - ecc.one_minus_e)),
            Branch::Pericenter => (1.0 + e, e - 1.0),
        };
        let rho0 = rho * ecc.denom(theta) / gap;
        Ok(Self {
            mu,
            rho,
            theta,
            tau: parabolic_time(mu, rho),
            e,
            one_minus_e: ecc.one_minus_e,
            branch,
            rho0,
            angular_momentum: (rho0 * mu * gap).sqrt(),
            energy: mu / (2.0 * rho0) * level,
        })
    }

    /// Position and velocity at the polar-axis crossing (t = 0).
    pub fn axis_state(&self) -> ([f64; 2], [f64; 2]) {
        ([self.rho0, 0.0], [0.0, self.angular_momentum / self.rho0])
    }

    /// Endpoint ρn⁺ reached at t = τ.
    pub fn endpoint(&self) -> [f64; 2] {
        [self.rho * self.theta.cos(), self.rho * self.theta.sin()]
    }

    /// Half-arc action A = a A₀.
    pub fn half_action(&self) -> f64 {
        let ecc = Eccentricity { e: self.e, one_minus_e: self.one_minus_e, branch: self.branch };
        action_ratio_at(&ecc, self.theta) * parabolic_action(self.mu, self.rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioSample {
    pub theta: f64,
    pub e: f64,
    pub branch: Branch,
    pub a: f64,
}

/// a(θ) on `n` equispaced angles of [0, θ_max].
pub fn ratio_grid(n: usize, theta_max: f64) -> Result<Vec<RatioSample>, KeplerError> {
    (0..n)
        .map(|k| {
            let theta = if n > 1 { theta_max * k as f64 / (n - 1) as f64 } else { 0.0 };
            if theta == 0.0 {
                return Ok(RatioSample { theta, e: 1.0, branch: Branch::Apocenter, a: action_ratio(0.0)? });
            }
            let ecc = solve_eccentricity(theta)?;
            Ok(RatioSample { theta, e: ecc.e, branch: ecc.branch, a: action_ratio_at(&ecc, theta) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_at_threshold() {
        let t = threshold_angle();
        let c = Eccentricity::new(0.0, Branch::Apocenter);
        assert!(eccentricity_residual(&c, t).unwrap().abs() < 1e-14);
        assert!((action_ratio_at(&c, t) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ell_is_stationary_curve() {
        for k in 1..20 {
            let theta = 0.5 + 0.13 * k as f64;
            let e = ell_eccentricity(theta);
            let v = e * theta.sin() / (2f64.sqrt() * (1.0 + e * theta.cos()).sqrt());
            assert!((v - 1.0).abs() < 1e-12);
        }
    }
}
