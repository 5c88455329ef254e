use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use platonic_orbits::action::{self, analytic_test_action, upsilon};
use platonic_orbits::archimedean::ArchimedeanPolyhedron;
use platonic_orbits::bounds::{bound_report, emit_tables, k4_bounds, multi_collision_bound};
use platonic_orbits::catalog;
use platonic_orbits::chambers::ChamberComplex;
use platonic_orbits::config::{self, resolve_cone};
use platonic_orbits::io::{self, Format, TrajectoryMeta};
use platonic_orbits::kepler;
use platonic_orbits::optimizer::{alpha_sweep, gradient_flow, verify_solution, FlowParams};
use platonic_orbits::symmetry::{to_array, GroupKind};
use platonic_orbits::topology;

#[derive(Parser)]
#[command(name = "platonic", version, about = "Symmetric N-body loops for the Platonic rotation groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FileFormat {
    Csv,
    Json,
}

impl From<FileFormat> for Format {
    fn from(f: FileFormat) -> Self {
        match f {
            FileFormat::Csv => Format::Csv,
            FileFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Rotation groups: order, axis census, matrices.
    Groups {
        #[arg(long)]
        group: Option<GroupKind>,
        #[arg(long)]
        matrices: bool,
    },
    /// Chamber complex of a polyhedral group.
    Chambers {
        #[arg(long)]
        group: GroupKind,
    },
    /// The Archimedean polyhedron 𝒬_ℛ and the υ integrals.
    Qr {
        #[arg(long)]
        group: GroupKind,
    },
    /// Analytic and discrete action of a test loop.
    Action {
        #[arg(long)]
        cone: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        period: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Regenerates the action tables; `--check` fails on any mismatch.
    Tables {
        #[arg(long)]
        check: bool,
    },
    /// σ-invariant, condition (C) and collision loci of a stored loop.
    Invariant {
        file: PathBuf,
        #[arg(long)]
        group: Option<GroupKind>,
    },
    /// Gradient flow from the λ*-scaled test loop of a cone.
    Minimize {
        #[arg(long)]
        cone: String,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        period: f64,
        /// JSON file with flow parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Final trajectory as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Warm-started minimization over a list of exponents.
    SweepAlpha {
        #[arg(long)]
        cone: String,
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// CSV of (θ, e, a) for the symmetric Keplerian arcs.
    KeplerRatio {
        #[arg(long, default_value_t = 2000)]
        grid: usize,
    },
    /// Writes the test loop (optionally minimized) of a cone.
    Export {
        #[arg(long)]
        cone: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: FileFormat,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        period: f64,
        #[arg(long)]
        minimize: bool,
    },
    /// Executes a JSON run configuration.
    Run { config: PathBuf },
}

type Outcome = Result<bool, String>;

/// println! that tolerates a closed pipe.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn print(v: &Value) {
    outln!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn groups(group: Option<GroupKind>, matrices: bool) -> Outcome {
    let list: Vec<GroupKind> = match group {
        Some(g) => vec![g],
        None => vec![GroupKind::Tetrahedral, GroupKind::Octahedral, GroupKind::Icosahedral, GroupKind::Klein4, GroupKind::Binary],
    };
    let expected = |g: GroupKind| match g {
        GroupKind::Tetrahedral => 12,
        GroupKind::Octahedral => 24,
        GroupKind::Icosahedral => 60,
        GroupKind::Klein4 => 4,
        GroupKind::Binary => 2,
    };
    let mut ok = true;
    let mut out = Vec::new();
    for g in list {
        let rg = g.group();
        ok &= rg.order() == expected(g);
        let mut v = json!({
            "group": g.symbol(),
            "order": rg.order(),
            "axes": rg.axes().census().iter().map(|(fold, count)| json!({"fold": fold, "count": count})).collect::<Vec<_>>(),
        });
        if matrices {
            v["matrices"] = json!(rg.matrices().map(|m| (0..3).map(|i| to_array(&m.row(i).transpose())).collect::<Vec<_>>()).collect::<Vec<_>>());
        }
        out.push(v);
    }
    print(&json!(out));
    Ok(ok)
}

fn chambers(group: GroupKind) -> Outcome {
    let c = ChamberComplex::get(group).map_err(err)?;
    let n = group.order();
    let ok = c.len() == 2 * n;
    print(&json!({
        "group": group.symbol(),
        "chambers": c.len(),
        "faces": c.faces.len(),
        "mirrors": c.mirrors.len(),
        "poles": c.poles.len(),
        "adjacency": c.chambers.iter().map(|ch| ch.neighbors).collect::<Vec<_>>(),
        "poleIndices": c.chambers.iter().map(|ch| ch.poles).collect::<Vec<_>>(),
    }));
    Ok(ok)
}

fn qr(group: GroupKind) -> Outcome {
    let p = ArchimedeanPolyhedron::get(group).map_err(err)?;
    let lengths: Vec<f64> = p.edges.iter().map(|e| (p.vertices[e.a] - p.vertices[e.b]).norm()).collect();
    let spread = lengths.iter().fold(0.0f64, |m, l| m.max((l - p.edge_length).abs()));
    let config: String = p.vertex_configuration(0).iter().map(|k| k.to_string()).collect();
    let clearance = p.gamma_clearance();
    let ok = p.vertices.len() == group.order() && p.edges.len() == 2 * group.order() && spread < 1e-10 && clearance > 0.0;
    print(&json!({
        "group": group.symbol(),
        "vertices": p.vertices.len(),
        "edges": p.edges.len(),
        "faces": p.faces.len(),
        "vertexConfiguration": config,
        "edgeLength": p.edge_length,
        "edgeLengthSpread": spread,
        "gammaClearance": clearance,
        "upsilon": [upsilon(group, 1).map_err(err)?, upsilon(group, 2).map_err(err)?],
        "coordinates": p.vertices.iter().map(to_array).collect::<Vec<_>>(),
    }));
    Ok(ok)
}

fn action_cmd(cone: &str, n: usize, grid: usize, period: f64, alpha: f64) -> Outcome {
    let (lp, _) = resolve_cone(cone, n, period, grid, alpha).map_err(err)?;
    let b = action::action(&lp, alpha).map_err(err)?;
    let analytic = if cone.eq_ignore_ascii_case("K4") {
        Some(k4_bounds(period).test_upper)
    } else {
        let e = catalog::entry(cone).map_err(err)?;
        let nu = e.nu(n).map_err(err)?;
        if alpha == 1.0 {
            Some(analytic_test_action(e.polyhedron(), &nu, period).map_err(err)?)
        } else {
            None
        }
    };
    // M^{2/3} a′ T^{1/3}
    let bound = catalog::entry(cone)
        .ok()
        .and_then(|e| Some(multi_collision_bound(bound_report(e.group)?.a_prime, e.symmetry_order())))
        .map(|b| b * period.cbrt());
    print(&json!({
        "cone": cone,
        "n": n,
        "m": lp.m(),
        "period": period,
        "alpha": alpha,
        "analytic": analytic,
        "discrete": b,
        "totalCollisionBound": bound,
    }));
    Ok(true)
}

fn tables(check: bool) -> Outcome {
    let t = emit_tables().map_err(err)?;
    if check {
        for c in &t.cells {
            outln!(
                "{} {:<9} {:>8} {:<12} computed {:>14.4} printed {:>14.4}",
                if c.pass { "PASS" } else { "FAIL" },
                c.table,
                c.row,
                c.column,
                c.computed,
                c.printed
            );
        }
        for i in &t.inequalities {
            outln!(
                "{} {:<9} {:>8} A(v) {:.4} < bound {:.4} (weak bound {:.4}: {})",
                if i.holds { "PASS" } else { "FAIL" },
                i.table,
                i.row,
                i.action,
                i.bound,
                i.weak_bound,
                if i.holds_weak { "holds" } else { "violated" }
            );
        }
        let failed = t.cells.iter().filter(|c| !c.pass).count() + t.inequalities.iter().filter(|i| !i.holds).count();
        outln!("{} checks, {failed} failed", t.cells.len() + t.inequalities.len());
    } else {
        print(&serde_json::to_value(&t).map_err(err)?);
    }
    Ok(!check || t.all_pass())
}

fn load_loop(file: &Path, group: Option<GroupKind>) -> Result<platonic_orbits::loops::GeneratingLoop, String> {
    let format = Format::from_path(file).map_err(err)?;
    Ok(io::import_trajectory(file, format, group).map_err(err)?.0)
}

fn invariant(file: &Path, group: Option<GroupKind>) -> Outcome {
    let lp = load_loop(file, group)?;
    let complex = ChamberComplex::get(lp.group).map_err(err)?;
    let sigma = topology::invariant(&lp).map_err(err)?;
    let loci = topology::collision_loci(complex, &sigma);
    let audit = topology::crossing_count_audit(&lp, &sigma).map_err(err)?;
    let nu = ArchimedeanPolyhedron::get(lp.group).map_err(err)?.nu_from_sigma(&sigma).ok();
    print(&json!({
        "group": lp.group.symbol(),
        "sigma": sigma.chambers,
        "n": sigma.multiplicity,
        "K": sigma.period,
        "simple": complex.is_simple(&sigma),
        "conditionC": topology::condition_c_check(complex, &sigma.chambers),
        "nu": nu.map(|v| v.vertices),
        "loci": loci,
        "crossings": audit,
    }));
    Ok(audit.matches)
}

fn flow_params(path: Option<&Path>, alpha: f64) -> Result<FlowParams, String> {
    let mut p = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => FlowParams::default(),
    };
    p.alpha = alpha;
    p.validate().map_err(err)?;
    Ok(p)
}

fn minimize(cone: &str, alpha: f64, grid: usize, period: f64, params: Option<&Path>, out: Option<&Path>) -> Outcome {
    let p = flow_params(params, alpha)?;
    let (lp, desc) = resolve_cone(cone, 1, period, grid, alpha).map_err(err)?;
    let tr = gradient_flow(&lp, Some(&desc), &p).map_err(err)?;
    let report = verify_solution(&tr.final_loop, alpha).map_err(err)?;
    if let Some(path) = out {
        let meta = TrajectoryMeta { cone: Some(cone.to_string()), ..TrajectoryMeta::for_loop(&tr.final_loop, alpha) };
        io::export_trajectory(&tr.final_loop, &meta, path, Format::Csv).map_err(err)?;
    }
    let ok = tr.monotone() && !matches!(tr.termination, platonic_orbits::optimizer::Termination::ConeChanged { .. });
    print(&json!({ "trace": tr, "solution": report }));
    Ok(ok)
}

fn sweep(cone: &str, alphas: &[f64], grid: usize, params: Option<&Path>) -> Outcome {
    let first = *alphas.first().ok_or("no exponents given")?;
    let p = flow_params(params, first)?;
    let (lp, desc) = resolve_cone(cone, 1, 1.0, grid, first).map_err(err)?;
    let out = alpha_sweep(&lp, Some(&desc), alphas, &p);
    let ok = out.iter().all(|s| s.error.is_none());
    print(&serde_json::to_value(&out).map_err(err)?);
    Ok(ok)
}

fn kepler_ratio(grid: usize) -> Outcome {
    let samples = kepler::ratio_grid(grid, std::f64::consts::PI - 1e-3).map_err(err)?;
    outln!("theta,e,a");
    for s in &samples {
        outln!("{:.16e},{:.16e},{:.16e}", s.theta, s.e, s.a);
    }
    let max = samples.iter().max_by(|a, b| a.a.total_cmp(&b.a)).ok_or("empty grid")?;
    eprintln!("max a = {:.12} at theta = {:.12} (e = {:.12})", max.a, max.theta, max.e);
    Ok(max.a < 1.0)
}

fn export(cone: &str, format: Format, out: &Path, grid: usize, period: f64, minimize: bool) -> Outcome {
    let (mut lp, desc) = resolve_cone(cone, 1, period, grid, 1.0).map_err(err)?;
    if minimize {
        lp = gradient_flow(&lp, Some(&desc), &FlowParams::default()).map_err(err)?.final_loop;
    }
    let b = action::action(&lp, 1.0).map_err(err)?;
    let meta = TrajectoryMeta { cone: Some(cone.to_string()), action: Some(b), ..TrajectoryMeta::for_loop(&lp, 1.0) };
    io::export_trajectory(&lp, &meta, out, format).map_err(err)?;
    eprintln!("wrote {} ({} samples, action {:.6})", out.display(), lp.m(), b.total);
    Ok(true)
}

fn run(path: &Path) -> Outcome {
    let r = config::run_config(path).map_err(|e| format!("{}: {e}", path.display()))?;
    print(&serde_json::to_value(&r).map_err(err)?);
    Ok(r.invariant_preserved && r.flow.as_ref().is_none_or(|f| f.monotone))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Groups { group, matrices } => groups(*group, *matrices),
        Command::Chambers { group } => chambers(*group),
        Command::Qr { group } => qr(*group),
        Command::Action { cone, n, grid, period, alpha } => action_cmd(cone, *n, *grid, *period, *alpha),
        Command::Tables { check } => tables(*check),
        Command::Invariant { file, group } => invariant(file, *group),
        Command::Minimize { cone, alpha, grid, period, params, out } => minimize(cone, *alpha, *grid, *period, params.as_deref(), out.as_deref()),
        Command::SweepAlpha { cone, alphas, grid, params } => sweep(cone, alphas, *grid, params.as_deref()),
        Command::KeplerRatio { grid } => kepler_ratio(*grid),
        Command::Export { cone, format, out, grid, period, minimize } => export(cone, (*format).into(), out, *grid, *period, *minimize),
        Command::Run { config } => run(config),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
