use std::f64::consts::PI;

use platonic_orbits::kepler::*;

type State = [f64; 4];

fn accel(s: &State, mu: f64) -> State {
    let r2 = s[0] * s[0] + s[1] * s[1];
    let k = -mu / (r2 * r2.sqrt());
    [s[2], s[3], k * s[0], k * s[1]]
}

/// Classical RK4 from `s` over `t`; also returns ∫(½|v|² + μ/r) by Simpson.
fn rk4(mut s: State, mu: f64, t: f64, steps: usize) -> (State, f64) {
    let h = t / steps as f64;
    let lag = |s: &State| 0.5 * (s[2] * s[2] + s[3] * s[3]) + mu / (s[0] * s[0] + s[1] * s[1]).sqrt();
    let mut action = 0.0;
    let add = |a: &State, b: f64| -> State { std::array::from_fn(|i| a[i] * b) };
    let sum = |a: &State, b: &State| -> State { std::array::from_fn(|i| a[i] + b[i]) };
    for _ in 0..steps {
        let l0 = lag(&s);
        let k1 = accel(&s, mu);
        let k2 = accel(&sum(&s, &add(&k1, 0.5 * h)), mu);
        let mid = sum(&s, &add(&k2, 0.5 * h));
        let k3 = accel(&mid, mu);
        let k4 = accel(&sum(&s, &add(&k3, h)), mu);
        let next: State = std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        // Simpson needs the midpoint state; the RK4 midpoint estimate is only O(h²), so use a half step
        let half = {
            let hh = 0.5 * h;
            let j1 = k1;
            let j2 = accel(&sum(&s, &add(&j1, 0.5 * hh)), mu);
            let j3 = accel(&sum(&s, &add(&j2, 0.5 * hh)), mu);
            let j4 = accel(&sum(&s, &add(&j3, hh)), mu);
            let v: State = std::array::from_fn(|i| s[i] + hh / 6.0 * (j1[i] + 2.0 * j2[i] + 2.0 * j3[i] + j4[i]));
            v
        };
        action += h / 6.0 * (l0 + 4.0 * lag(&half) + lag(&next));
        s = next;
    }
    (s, action)
}

const ANGLES: [f64; 9] = [0.05, 0.2, 0.4, 0.46, 0.48, 0.8, 1.4, 2.0, 2.6];

#[test]
fn solved_arcs_reach_endpoint_in_parabolic_time() {
    let (mu, rho) = (0.25, 1.0);
    for theta in ANGLES {
        let arc = ArcProblem::new(mu, rho, theta).unwrap();
        let (p, v) = arc.axis_state();
        let (end, action) = rk4([p[0], p[1], v[0], v[1]], mu, arc.tau, 200_000);
        let target = arc.endpoint();
        let miss = ((end[0] - target[0]).powi(2) + (end[1] - target[1]).powi(2)).sqrt();
        assert!(miss < 1e-8, "θ = {theta}: endpoint missed by {miss:e}");
        let rel = (action - arc.half_action()).abs() / arc.half_action();
        assert!(rel < 1e-8, "θ = {theta}: integrated action off by {rel:e}");
    }
}

#[test]
fn arc_constants_satisfy_conic_relations() {
    let (mu, rho) = (0.7, 2.3);
    for theta in ANGLES {
        let a = ArcProblem::new(mu, rho, theta).unwrap();
        let v2 = (a.angular_momentum / a.rho0).powi(2);
        assert!((0.5 * v2 - mu / a.rho0 - a.energy).abs() < 1e-12 * mu / a.rho0);
        // eccentricity vector at the apse
        let e = (a.rho0 * v2 / mu - 1.0).abs();
        assert!((e - a.e).abs() < 1e-10, "θ = {theta}: {e} vs {}", a.e);
    }
}

/// Finds (ρ₀, v₀) reaching ρn⁺ at time τ by Newton iteration on the integrator.
fn shoot(mu: f64, rho: f64, theta: f64, guess: (f64, f64)) -> (f64, f64) {
    let tau = parabolic_time(mu, rho);
    let miss = |r0: f64, v0: f64| {
        let (s, _) = rk4([r0, 0.0, 0.0, v0], mu, tau, 20_000);
        [s[0] - rho * theta.cos(), s[1] - rho * theta.sin()]
    };
    let (mut r0, mut v0) = guess;
    for _ in 0..40 {
        let f = miss(r0, v0);
        if f[0].hypot(f[1]) < 1e-13 {
            break;
        }
        let d = 1e-7;
        let fr = miss(r0 + d, v0);
        let fv = miss(r0, v0 + d);
        let j = [[(fr[0] - f[0]) / d, (fv[0] - f[0]) / d], [(fr[1] - f[1]) / d, (fv[1] - f[1]) / d]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        r0 -= (j[1][1] * f[0] - j[0][1] * f[1]) / det;
        v0 -= (-j[1][0] * f[0] + j[0][0] * f[1]) / det;
    }
    (r0, v0)
}

#[test]
fn shooting_matches_solved_eccentricity_near_threshold() {
    let mu = 0.25;
    let t0 = threshold_angle();
    for theta in [t0 - 0.01, t0 - 0.002, t0 + 0.002] {
        let circular = (mu / 1.0f64).sqrt();
        let (r0, v0) = shoot(mu, 1.0, theta, (1.0, circular));
        let e = (r0 * v0 * v0 / mu - 1.0).abs();
        let solved = solve_eccentricity(theta).unwrap();
        assert!((e - solved.e).abs() < 1e-6, "θ = {theta}: shooting {e} vs {}", solved.e);
        assert!(solved.e < 0.05);
        let apocenter = r0 * v0 * v0 < mu;
        assert_eq!(apocenter, solved.branch == Branch::Apocenter, "θ = {theta}");
    }
}

#[test]
fn eccentricity_lies_in_admissible_window() {
    for k in 1..200 {
        let theta = (PI - 1e-3) * k as f64 / 200.0;
        let c = solve_eccentricity(theta).unwrap();
        match c.branch {
            Branch::Apocenter => assert!(theta <= threshold_angle() && (0.0..1.0).contains(&c.e)),
            Branch::Pericenter => {
                assert!(theta > threshold_angle() && c.e > 0.0);
                if theta > PI / 2.0 {
                    assert!(c.e < -1.0 / theta.cos());
                }
            }
        }
        assert!(eccentricity_residual(&c, theta).unwrap().abs() < 1e-10);
    }
    assert_eq!(solve_eccentricity(threshold_angle()).unwrap().e, 0.0);
    assert!(matches!(solve_eccentricity(0.0), Err(KeplerError::BadAngle(_))));
    assert!(matches!(solve_eccentricity(PI), Err(KeplerError::BadAngle(_))));
}

#[test]
fn i2_matches_reduction_identity() {
    // (1 − b²) I₂ = I₁ − b sin θ/(1 + b cos θ), I₁ in closed form for |b| < 1
    for (e, theta, branch) in [(0.3f64, 0.2f64, Branch::Apocenter), (0.9, 0.4, Branch::Apocenter), (0.2, 0.6, Branch::Pericenter), (0.7, 2.5, Branch::Pericenter)] {
        let b = branch.sign() * e;
        let i1 = 2.0 / (1.0 - b * b).sqrt() * (((1.0 - b) / (1.0 + b)).sqrt() * (0.5 * theta).tan()).atan();
        let expect = (i1 - b * theta.sin() / (1.0 + b * theta.cos())) / (1.0 - b * b);
        let got = i2(&Eccentricity::new(e, branch), theta).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect, "{e} {theta}: {got} vs {expect}");
    }
}

#[test]
fn ratio_formula_at_zero_angle() {
    for k in 0..100 {
        let e = k as f64 / 100.0;
        let a = action_ratio_at(&Eccentricity::new(e, Branch::Apocenter), 0.0);
        assert!((a - 0.25 * (1.0 + e)).abs() < 1e-15);
        assert!(a < 0.5);
    }
}

#[test]
fn maximum_along_lines_is_attained_on_ell() {
    // along e cos θ = η the ratio peaks on ℓ with value 1 − (1 + η)/4
    for eta in [-0.8f64, -0.3, 0.0, 0.4, 1.2] {
        let e_l = (1.0f64 + (1.0 + eta).powi(2)).sqrt();
        let theta_l = (eta / e_l).acos();
        let peak = action_ratio_at(&Eccentricity::new(e_l, Branch::Pericenter), theta_l);
        for d in [-0.05, -0.01, 0.01, 0.05] {
            let e = e_l + d;
            let theta = (eta / e).acos();
            let a = action_ratio_at(&Eccentricity::new(e, Branch::Pericenter), theta);
            assert!(a < peak, "η = {eta}, e = {e}");
        }
        assert!((peak - (1.0 - 0.25 * (1.0 + eta))).abs() < 1e-12);
    }
}

#[test]
fn ratio_on_ell_matches_closed_form() {
    for k in 1..400 {
        let theta = threshold_angle() + (PI - threshold_angle()) * k as f64 / 400.0;
        let e = ell_eccentricity(theta);
        let a = action_ratio_at(&Eccentricity::new(e, Branch::Pericenter), theta);
        assert!((a - ell_action_ratio(e, theta)).abs() < 1e-8);
    }
}

#[test]
fn ratio_stays_below_one_on_fine_grid() {
    let grid = ratio_grid(2000, PI - 1e-3).unwrap();
    assert_eq!(grid.len(), 2000);
    let max = grid.iter().map(|s| s.a).fold(f64::NEG_INFINITY, f64::max);
    assert!(max < 1.0);
    assert!(grid.iter().all(|s| s.a > 0.0));
}

#[test]
fn radial_limit_is_continuous() {
    let a0 = action_ratio(0.0).unwrap();
    assert!((action_ratio(1e-5).unwrap() - a0).abs() < 1e-8);
    assert!(a0 < 0.5);
}

#[test]
fn parabolic_motion_solves_its_ode() {
    for alpha in [0.5, 1.0, 3.0] {
        assert_eq!(parabolic_motion(alpha, 0.0), 0.0);
        for k in 1..200 {
            let t = 0.01 * k as f64;
            let s = parabolic_motion(alpha, t);
            let r = parabolic_speed(alpha, t) - (alpha / 2.0).sqrt() / s.sqrt();
            assert!(r.abs() < 1e-12 * parabolic_speed(alpha, t));
            // central difference of s against ṡ
            let d = 1e-6 * t;
            let fd = (parabolic_motion(alpha, t + d) - parabolic_motion(alpha, t - d)) / (2.0 * d);
            assert!((fd - parabolic_speed(alpha, t)).abs() < 1e-7 * fd);
        }
    }
}

#[test]
fn ejection_arc_action_and_time() {
    for (alpha, rho) in [(1.0, 1.0), (2.0, 0.3), (0.4, 5.0)] {
        let mu = alpha / 4.0;
        let q = ejection_action_quadrature(alpha, rho).unwrap();
        assert!((q - parabolic_action(mu, rho)).abs() < 1e-10 * q);
        let tau = parabolic_time(mu, rho);
        assert!((parabolic_motion(alpha, tau) - rho).abs() < 1e-13 * rho);
    }
}
