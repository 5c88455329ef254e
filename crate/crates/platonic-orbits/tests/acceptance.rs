//! Acceptance criteria 1-12, one line each. Known discrepancies with the
//! published numbers print FAIL with the reason but do not fail the run.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use platonic_orbits::action::{self, analytic_test_action, upsilon, upsilon_conjugated};
use platonic_orbits::archimedean::ArchimedeanPolyhedron;
use platonic_orbits::bounds::{emit_tables, k4_bounds, total_collision_bound, Table, PRINTED_COLLISION};
use platonic_orbits::catalog::{self, entries, EntryKind};
use platonic_orbits::chambers::{least_rotation, ChamberComplex};
use platonic_orbits::kepler::{self, Branch, Eccentricity};
use platonic_orbits::loops::{k4_optimal_radius, k4_test_loop, ConeDescriptor};
use platonic_orbits::optimizer::{alpha_sweep, discrete_gradient, gradient_flow, verify_solution, FlowParams};
use platonic_orbits::symmetry::GroupKind;
use platonic_orbits::topology;
use rand::RngExt;

struct Check {
    pass: bool,
    detail: String,
    /// Why a failure is expected (published value disagrees with the formulas).
    known: Option<&'static str>,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check { pass, detail: detail.into(), known: None }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (_, g, a, ap) in PRINTED_COLLISION {
        worst = worst.max((total_collision_bound(g, false).unwrap() - a).abs());
        worst = worst.max((total_collision_bound(g, true).unwrap() - ap).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(worst <= 5e-4 && elapsed < 1.0, format!("max |Δ| = {worst:.2e} (tol 5e-4), {elapsed:.3} s"))
}

fn c2() -> Check {
    let t = emit_tables().unwrap();
    let rows: Vec<_> = t.table(Table::Minimal).filter(|c| c.column.starts_with("H^")).collect();
    let worst = rows.iter().map(|c| (c.computed - c.printed).abs()).fold(0.0, f64::max);
    check(rows.len() == 10 && worst <= 5e-4, format!("{} cells, max |Δ| = {worst:.2e} (tol 5e-4)", rows.len()))
}

fn upsilon_closed_form() -> f64 {
    let (s2, s3) = (2f64.sqrt(), 3f64.sqrt());
    let (l21, l23m, l23p, l3) = ((s2 - 1.0).ln(), (2.0 - s3).ln(), (2.0 + s3).ln(), 3f64.ln());
    -l21 * s2 - 2.0 * l23m - 2.0 * l3 + 2.0 / 3.0 * s3 * l3 + 2.0 * l23p - 2.0 / 3.0 * l23m * s3 + 2.0 / 3.0 * l23p * s3 - l21
}

fn c3() -> Check {
    let closed = upsilon_closed_form();
    let quad = upsilon(GroupKind::Tetrahedral, 1).unwrap();
    let quad2 = upsilon(GroupKind::Tetrahedral, 2).unwrap();
    let mut rng = common::rng(3);
    let mut worst: f64 = 0.0;
    for g in GroupKind::POLYHEDRAL {
        let poly = ArchimedeanPolyhedron::get(g).unwrap();
        let cx = poly.complex();
        for _ in 0..5 {
            let r = *cx.element(rng.random_range(0..cx.len()));
            for i in [1, 2] {
                worst = worst.max((upsilon_conjugated(poly, i, &r).unwrap() - upsilon(g, i).unwrap()).abs());
            }
        }
    }
    let d = (quad - closed).abs().max((quad2 - closed).abs());
    check(
        d <= 1e-8 && worst <= 1e-10,
        format!("υ = {quad:.10} vs closed form {closed:.10} (|Δ| {d:.1e}); υ_i(R′) for 5 random R′ ∈ ℛ̃ per group, max |Δ| {worst:.1e}"),
    )
}

fn c4() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for (id, expect) in [("T.nu1", 168.0445), ("T.nu2", 168.0445), ("T.nu3", 266.7542)] {
        let e = catalog::entry(id).unwrap();
        let a = analytic_test_action(e.polyhedron(), &e.nu(1).unwrap(), 1.0).unwrap();
        ok &= rel(a, expect) <= 1e-3;
        notes.push(format!("{id} {a:.4}"));
    }
    // discrete pipeline against the closed form
    let mut pipeline: f64 = 0.0;
    for e in entries().iter().filter(|e| e.kind == EntryKind::Symmetric && e.group != GroupKind::Tetrahedral) {
        let closed = analytic_test_action(e.polyhedron(), &e.nu(1).unwrap(), 1.0).unwrap();
        let lp = e.test_loop(1, 1.0, 2048).unwrap();
        let discrete = action::action(&lp, 1.0).unwrap().scaled_min;
        pipeline = pipeline.max(rel(discrete, closed));
    }
    ok &= pipeline <= 1e-3;
    let tables = emit_tables().unwrap();
    let printed: Vec<_> = tables.cells.iter().filter(|c| c.column.starts_with("A(v)")).collect();
    let misses: Vec<String> = printed.iter().filter(|c| !c.pass).map(|c| format!("{} {}", c.row, c.column)).collect();
    let structural = ok;
    let pass = ok && misses.is_empty();
    let detail = format!(
        "{}; 𝒪/ℐ pipeline vs closed form {pipeline:.1e} (tol 1e-3); printed cells {}/{} within 2e-2, misses: [{}]",
        notes.join(", "),
        printed.len() - misses.len(),
        printed.len(),
        misses.join(", ")
    );
    let known = (structural && misses.iter().all(|m| m.starts_with('O') || m.starts_with('C'))).then_some(
        "the printed 𝒪 cells use υ_triangle ≈ 22.39; quadrature of the edge integral gives 20.3224 \
         in two independent frames, so the octahedral A(v) cells sit 2-4.4% above the formula",
    );
    Check { pass, detail, known: if pass { None } else { known } }
}

fn c5() -> Check {
    let t = 1.0;
    let b = k4_bounds(t);
    let rho = k4_optimal_radius(t);
    let lp = k4_test_loop(rho, t, 4096).unwrap();
    let d = action::action(&lp, 1.0).unwrap();
    // potential of the four half circles by Simpson on each quarter arc
    let au: f64 = (0..8)
        .map(|q| common::simpson(|s| common::pair_potential(GroupKind::Klein4, &lp.at(s)), q as f64 / 8.0, (q + 1) as f64 / 8.0, 4000))
        .sum();
    let analytic = 32.0 * PI * PI * rho * rho / t + au;
    let r = rel(d.total, analytic);
    check(
        b.lower > d.total && r <= 1e-3 && au < 3.0 * t / rho,
        format!("lower {:.4} > test {:.4}; vs 32π²ρ²/T + A_U = {analytic:.4} (rel {r:.1e}); A_U {au:.4} < 3T/ρ {:.4}", b.lower, d.total, 3.0 * t / rho),
    )
}

fn c6() -> Check {
    let t = emit_tables().unwrap();
    let bad: Vec<String> = t.inequalities.iter().filter(|i| !i.holds).map(|i| i.row.clone()).collect();
    let weak = t.inequalities.iter().filter(|i| !i.holds_weak).count();
    check(
        bad.is_empty() && !t.inequalities.is_empty(),
        format!("{} inequalities A(v) < M^(2/3)a′ hold, violations [{}] ({weak} above the weaker a bound)", t.inequalities.len() - bad.len(), bad.join(", ")),
    )
}

fn c7() -> Check {
    let grid = kepler::ratio_grid(2000, PI - 1e-3).unwrap();
    let max = grid.iter().map(|s| s.a).fold(f64::NEG_INFINITY, f64::max);
    let zero = (0..100).all(|k| {
        let e = k as f64 / 100.0;
        let a = kepler::action_ratio_at(&Eccentricity::new(e, Branch::Apocenter), 0.0);
        (a - 0.25 * (1.0 + e)).abs() < 1e-15 && a < 0.5
    });
    let t0 = kepler::threshold_angle();
    let ell = (1..400)
        .map(|k| {
            let th = t0 + (PI - t0) * k as f64 / 400.0;
            let e = kepler::ell_eccentricity(th);
            let a = kepler::action_ratio_at(&Eccentricity::new(e, Branch::Pericenter), th);
            (a - (1.0 - 0.25 * (1.0 + e * th.cos()))).abs()
        })
        .fold(0.0, f64::max);
    check(max < 1.0 && zero && ell <= 1e-8, format!("max a = {max:.12} over 2000 angles; a(e,0) = (1+e)/4 < 1/2: {zero}; on ℓ max |Δ| {ell:.1e}"))
}

fn c8() -> Check {
    let expect = [(12, 24, 12, 24, vec![3, 4, 3, 4]), (24, 48, 24, 48, vec![3, 4, 4, 4]), (60, 120, 60, 120, vec![3, 4, 5, 4])];
    let mut ok = true;
    let mut parts = Vec::new();
    for (g, (order, chambers, nv, ne, config)) in GroupKind::POLYHEDRAL.into_iter().zip(expect) {
        let cx = ChamberComplex::get(g).unwrap();
        let poly = ArchimedeanPolyhedron::get(g).unwrap();
        let configs_ok = (0..poly.vertices.len()).all(|v| poly.vertex_configuration(v) == least_rotation(&config));
        let lens: Vec<f64> = poly.edges.iter().map(|e| (poly.vertices[e.a] - poly.vertices[e.b]).norm()).collect();
        let spread = lens.iter().fold(0.0f64, |m, l| m.max((l - lens[0]).abs()));
        let clearance = poly.gamma_clearance();
        let good = g.group().order() == order
            && cx.len() == chambers
            && poly.vertices.len() == nv
            && poly.edges.len() == ne
            && configs_ok
            && spread <= 1e-10
            && clearance > 0.0;
        ok &= good;
        parts.push(format!("{g}: {}/{}/({},{}) spread {spread:.0e} clearance {clearance:.3}", g.group().order(), cx.len(), poly.vertices.len(), poly.edges.len()));
    }
    check(ok, parts.join("; "))
}

fn c9() -> Check {
    let mut count = 0;
    let mut failures = Vec::new();
    for e in entries() {
        let poly = e.polyhedron();
        for n in 1..=3 {
            let nu = e.nu(n).unwrap();
            let sigma = poly.sigma_from_nu(&nu).unwrap();
            let back = poly.nu_from_sigma(&sigma).unwrap();
            let again = poly.sigma_from_nu(&back).unwrap();
            let lp = e.test_loop(n, 1.0, 64).unwrap();
            let extracted = topology::invariant(&lp);
            let ok = back.canonical() == nu.canonical() && again == sigma && extracted.as_ref() == Ok(&sigma) && sigma.multiplicity == n;
            count += 1;
            if !ok {
                failures.push(format!("{} n={n}", e.id));
            }
        }
    }
    check(failures.is_empty(), format!("{count} (entry, n) pairs, failures [{}]", failures.join(", ")))
}

fn c10() -> Check {
    let start = Instant::now();
    let e = catalog::entry("T.nu1").unwrap();
    let cone = e.descriptor(1).unwrap();
    let sigma0 = cone.sigma().unwrap();
    let lp = e.test_loop(1, 1.0, 2064).unwrap();
    let lp = lp.scaled(action::action(&lp, 1.0).unwrap().lambda_star);
    let mut current = lp;
    let mut residuals = Vec::new();
    let mut monotone = true;
    let mut invariant_kept = true;
    let mut final_action = f64::INFINITY;
    let mut min_dist = f64::INFINITY;
    let mut crossings = None;
    for m in [2064, 4128, 8256] {
        let start_loop = if current.m() == m { current.clone() } else { current.resampled(m).unwrap() };
        let tr = match gradient_flow(&start_loop, Some(&cone), &FlowParams { max_steps: 40_000, ..Default::default() }) {
            Ok(tr) => tr,
            Err(err) => return check(false, format!("flow failed at m = {m}: {err}")),
        };
        monotone &= tr.monotone() && tr.final_action <= tr.initial_action;
        invariant_kept &= topology::invariant(&tr.final_loop).as_ref() == Ok(&sigma0);
        min_dist = min_dist.min(tr.final_loop.min_gamma_distance() / tr.final_loop.diameter());
        let v = verify_solution(&tr.final_loop, 1.0).unwrap();
        residuals.push(v.newton_residual);
        final_action = tr.final_action;
        crossings = v.crossings;
        current = tr.final_loop;
    }
    let orders: Vec<f64> = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let refinement = orders.iter().all(|&p| p >= 1.6);
    let crossing_ok = crossings.as_ref().is_some_and(|c| c.matches && c.expected == sigma0.period * sigma0.multiplicity);
    let elapsed = start.elapsed().as_secs_f64();
    check(
        monotone && final_action <= 168.05 && invariant_kept && min_dist > 1e-3 && refinement && crossing_ok && elapsed < 300.0,
        format!(
            "monotone {monotone}, final {final_action:.4} ≤ 168.05, σ kept {invariant_kept}, min dist/diam {min_dist:.4}, \
             residual orders {:?}, crossings {}/{} transversal {}, {elapsed:.1} s",
            orders.iter().map(|p| format!("{p:.2}")).collect::<Vec<_>>(),
            crossings.as_ref().map_or(0, |c| c.count),
            crossings.as_ref().map_or(0, |c| c.expected),
            crossings.as_ref().is_some_and(|c| c.all_transversal),
        ),
    )
}

fn c11() -> Check {
    let cone = ConeDescriptor::k4();
    let lp = k4_test_loop(k4_optimal_radius(1.0), 1.0, 256).unwrap();
    let sweep = alpha_sweep(&lp, Some(&cone), &[1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0], &FlowParams::default());
    let last = sweep.last().unwrap();
    let speed_ok = rel(last.mean_speed, 2.0 * PI) <= 0.02;
    let eight_pi = rel(last.action, 8.0 * PI);
    let eight_pi2 = rel(last.action, 8.0 * PI * PI);

    let e = catalog::entry("C.min2").unwrap();
    let cone = e.descriptor(1).unwrap();
    let lp = e.test_loop(1, 1.0, 256).unwrap();
    let lp = lp.scaled(action::action(&lp, 3.0).unwrap().lambda_star);
    let cube = alpha_sweep(&lp, Some(&cone), &[3.0, 1.5, 0.5], &FlowParams::default());
    let sups: Vec<f64> = cube.iter().map(|s| s.sup_norm).collect();
    let shrinking = cube.iter().all(|s| s.error.is_none()) && sups.windows(2).all(|w| w[1] < w[0]);

    let errors = sweep.iter().any(|s| s.error.is_some());
    let pass = speed_ok && eight_pi <= 0.02 && shrinking && !errors;
    let detail = format!(
        "α=1000: mean speed {:.4} vs 2π (rel {:.1e}); action {:.3} vs 8π (rel {eight_pi:.2}) and 8π² (rel {eight_pi2:.1e}); \
         cube 𝒦₂ ‖u‖∞ at α=3,1.5,0.5: {:?}",
        last.mean_speed,
        rel(last.mean_speed, 2.0 * PI),
        last.action,
        sups.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>(),
    );
    let known = (speed_ok && shrinking && !errors && eight_pi2 <= 0.02)
        .then_some("the limit loop (four half circles of radius 1/2, speed 2π) has action 2·(2π)² = 8π², not 8π");
    Check { pass, detail, known: if pass { None } else { known } }
}

fn c12() -> Check {
    let mut rng = common::rng(12);
    let groups = [GroupKind::Tetrahedral, GroupKind::Octahedral, GroupKind::Icosahedral, GroupKind::Klein4];
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let g = groups[k % groups.len()];
        let alpha = [1.0, 0.5, 2.0, 1.0][k % 4];
        let lp = common::random_loop(&mut rng, g, 1.0 + 0.1 * k as f64, 24);
        let grad = discrete_gradient(&lp, alpha).unwrap();
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for j in 0..lp.m() {
            for c in 0..3 {
                // random loops pass close to Γ, where h = 1e-5 is already truncation-limited
                let h = 1e-6;
                let mut plus = lp.samples.clone();
                let mut minus = lp.samples.clone();
                plus[j][c] += h;
                minus[j][c] -= h;
                let fp = action::action(&lp.with_samples(plus), alpha).unwrap().total;
                let fm = action::action(&lp.with_samples(minus), alpha).unwrap().total;
                let fd = (fp - fm) / (2.0 * h);
                num = num.max((fd - grad[j][c]).abs());
                den = den.max(grad[j][c].abs());
            }
        }
        worst = worst.max(num / den);
    }
    check(worst < 1e-6, format!("20 random loops, max relative error {worst:.1e} (tol 1e-6)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("collision estimates", c1),
        ("minimal-cone bound rows", c2),
        ("tetrahedral υ and conjugation invariance", c3),
        ("symmetric-cone analytic actions", c4),
        ("𝒦₄ level gap", c5),
        ("collision-exclusion inequalities", c6),
        ("Kepler action ratio", c7),
        ("group structure", c8),
        ("invariant round trips", c9),
        ("optimizer on 𝒯 ν¹", c10),
        ("α-limit experiment", c11),
        ("discrete gradient", c12),
    ];
    let mut unexpected = 0;
    let mut known = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let c = f();
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("criterion {:2} {tag}: {name}: {}", i + 1, c.detail);
        match (c.pass, c.known) {
            (true, _) => {}
            (false, Some(why)) => {
                known += 1;
                println!("             known discrepancy: {why}");
            }
            (false, None) => unexpected += 1,
        }
    }
    println!("acceptance: {} pass, {known} known discrepancies, {unexpected} unexpected failures", 12 - known - unexpected);
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
