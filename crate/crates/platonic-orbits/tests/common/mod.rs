#![allow(dead_code)]

use std::f64::consts::TAU;

use platonic_orbits::loops::GeneratingLoop;
use platonic_orbits::symmetry::{axis_angle, GroupKind, Mat3, Vec3};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Smooth loop: offset plus a few random Fourier modes.
pub fn random_loop(rng: &mut StdRng, group: GroupKind, period: f64, m: usize) -> GeneratingLoop {
    let mut r = || Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let base = r() * 0.5 + Vec3::new(0.31, 0.47, 0.83);
    let modes: Vec<(Vec3, Vec3)> = (0..3).map(|_| (r() * 0.3, r() * 0.3)).collect();
    GeneratingLoop::from_fn(group, period, m, |t| {
        let w = TAU * t / period;
        modes.iter().enumerate().fold(base, |acc, (k, (a, b))| {
            let f = (k + 1) as f64 * w;
            acc + a * f.cos() + b * f.sin()
        })
    })
    .expect("finite samples")
}

pub fn random_rotation(rng: &mut StdRng) -> Mat3 {
    let axis = loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if v.norm() > 0.1 && v.norm() <= 1.0 {
            break v.normalize();
        }
    };
    axis_angle(&axis, rng.random_range(0.0..TAU))
}

/// Composite Simpson on [a, b] with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|k| f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
    h / 3.0 * (f(a) + inner + f(b))
}

/// Pairwise potential Σ_{i<j} 1/|u_i − u_j| at the point x for the group.
pub fn pair_potential(group: GroupKind, x: &Vec3) -> f64 {
    let pts: Vec<Vec3> = group.group().matrices().map(|r| r * x).collect();
    let mut s = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            s += 1.0 / (pts[i] - pts[j]).norm();
        }
    }
    s
}
