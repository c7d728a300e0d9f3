//! Scenario runner: one subcommand per experiment family, deterministic
//! CSV/JSON artifacts, and exit codes that distinguish config errors,
//! blow-up, and convexity-guard stops.

mod config;

use clap::{Args, Parser, Subcommand};
use config::{build_scenario, parse_overlay, Kind, Scenario};
use hmcf::curve::{circle_initial, ellipse_initial, run_curve, CurveFlowConfig, CurveTermination};
use hmcf::diagnostics::{conservation_report, curvature_budget};
use hmcf::field::{Boundary, GraphField};
use hmcf::fv::{run, FluxScheme, Integrator, SolverConfig, Termination};
use hmcf::sphere::integrate_sphere;
use hmcf::system::{eigenstructure_1d, jacobian_1d};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 2;
const EXIT_BLOWUP: u8 = 3;
const EXIT_GUARD: u8 = 4;

#[derive(Parser)]
#[command(
    name = "hmcf",
    about = "Numerical laboratory for a hyperbolic mean curvature flow",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory for CSV/JSON artifacts
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
    /// Seed for randomized sweeps
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Flat TOML config file; its values override command-line flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Additional key=value overrides (TOML-typed), applied after --config
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Radially symmetric solution of the flow (second-order radius ODE)
    Sphere {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        n: Option<i64>,
        #[arg(long)]
        r0: Option<f64>,
        #[arg(long)]
        sigma0: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        expect_collapse: bool,
    },
    /// Closed plane curve under the normal flow
    Curve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        shape: Option<String>,
        #[arg(long)]
        m: Option<i64>,
        #[arg(long)]
        r0: Option<f64>,
        #[arg(long)]
        sigma0: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        expect_collapse: bool,
    },
    /// Finite-volume run of the graph system on smooth periodic data
    Graph {
        #[command(flatten)]
        common: CommonArgs,
        /// spatial dimension of the grid (1 or 2)
        #[arg(long, default_value_t = 1)]
        dim: u8,
        #[arg(long)]
        cells: Option<i64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        cfl: Option<f64>,
        #[arg(long)]
        flux: Option<String>,
        #[arg(long)]
        sigma_amp: Option<f64>,
        #[arg(long)]
        b_amp: Option<f64>,
    },
    /// Riemann problem for the 1D graph system
    Riemann {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        cells: Option<i64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        sigma_left: Option<f64>,
        #[arg(long)]
        b_left: Option<f64>,
        #[arg(long)]
        sigma_right: Option<f64>,
        #[arg(long)]
        b_right: Option<f64>,
    },
    /// Random sweep of the 1D eigenstructure with residual checks
    Eigen {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        samples: Option<i64>,
        #[arg(long)]
        range: Option<f64>,
    },
    /// Grid-refinement study against a fine reference
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        reference_cells: Option<i64>,
    },
    /// Curve run plus full conservation/curvature diagnostics report
    Report {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        shape: Option<String>,
        #[arg(long)]
        m: Option<i64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        expect_collapse: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(errors) => {
            for e in errors {
                eprintln!("error: {e}");
            }
            EXIT_CONFIG
        }
    };
    ExitCode::from(code)
}

type Flat = BTreeMap<String, toml::Value>;

fn flag_f64(map: &mut Flat, key: &str, v: Option<f64>) {
    if let Some(v) = v {
        map.insert(key.to_string(), toml::Value::Float(v));
    }
}

fn flag_i64(map: &mut Flat, key: &str, v: Option<i64>) {
    if let Some(v) = v {
        map.insert(key.to_string(), toml::Value::Integer(v));
    }
}

fn flag_str(map: &mut Flat, key: &str, v: Option<String>) {
    if let Some(v) = v {
        map.insert(key.to_string(), toml::Value::String(v));
    }
}

fn finalize(common: &CommonArgs, kind: Kind, mut map: Flat) -> Result<Scenario, Vec<String>> {
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| vec![format!("cannot read config {}: {e}", path.display())])?;
        let overlay = parse_overlay(&text)?;
        // config-file values override flags
        map.extend(overlay);
    }
    let mut errors = Vec::new();
    for entry in &common.sets {
        match entry.split_once('=') {
            Some((k, v)) => match format!("v = {v}").parse::<toml::Table>() {
                Ok(mut table) => {
                    map.insert(k.trim().to_string(), table.remove("v").unwrap());
                }
                Err(e) => errors.push(format!("--set {entry}: bad value ({e})")),
            },
            None => errors.push(format!("--set {entry}: expected KEY=VALUE")),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    build_scenario(kind, common.output_dir.clone(), common.seed, map)
}

fn dispatch(cli: Cli) -> Result<u8, Vec<String>> {
    match cli.command {
        Command::Sphere {
            common,
            n,
            r0,
            sigma0,
            dt,
            t_end,
            expect_collapse,
        } => {
            let mut map = Flat::new();
            flag_i64(&mut map, "n", n);
            flag_f64(&mut map, "r0", r0);
            flag_f64(&mut map, "sigma0", sigma0);
            flag_f64(&mut map, "dt", dt);
            flag_f64(&mut map, "t_end", t_end);
            if expect_collapse {
                map.insert("expect_collapse".into(), toml::Value::Boolean(true));
            }
            let scenario = finalize(&common, Kind::Sphere, map)?;
            run_sphere(&scenario).map_err(|e| vec![e])
        }
        Command::Curve {
            common,
            shape,
            m,
            r0,
            sigma0,
            dt,
            t_end,
            expect_collapse,
        } => {
            let mut map = Flat::new();
            flag_str(&mut map, "shape", shape);
            flag_i64(&mut map, "m", m);
            flag_f64(&mut map, "r0", r0);
            flag_f64(&mut map, "sigma0", sigma0);
            flag_f64(&mut map, "dt", dt);
            flag_f64(&mut map, "t_end", t_end);
            if expect_collapse {
                map.insert("expect_collapse".into(), toml::Value::Boolean(true));
            }
            let scenario = finalize(&common, Kind::Curve, map)?;
            run_curve_scenario(&scenario, false).map_err(|e| vec![e])
        }
        Command::Graph {
            common,
            dim,
            cells,
            t_end,
            cfl,
            flux,
            sigma_amp,
            b_amp,
        } => {
            let kind = match dim {
                1 => Kind::Graph1d,
                2 => Kind::Graph2d,
                other => return Err(vec![format!("dim must be 1 or 2, got {other}")]),
            };
            let mut map = Flat::new();
            flag_i64(&mut map, "cells", cells);
            flag_f64(&mut map, "t_end", t_end);
            flag_f64(&mut map, "cfl", cfl);
            flag_str(&mut map, "flux", flux);
            flag_f64(&mut map, "sigma_amp", sigma_amp);
            flag_f64(&mut map, "b_amp", b_amp);
            let scenario = finalize(&common, kind, map)?;
            run_graph(&scenario).map_err(|e| vec![e])
        }
        Command::Riemann {
            common,
            cells,
            t_end,
            sigma_left,
            b_left,
            sigma_right,
            b_right,
        } => {
            let mut map = Flat::new();
            flag_i64(&mut map, "cells", cells);
            flag_f64(&mut map, "t_end", t_end);
            flag_f64(&mut map, "sigma_left", sigma_left);
            flag_f64(&mut map, "b_left", b_left);
            flag_f64(&mut map, "sigma_right", sigma_right);
            flag_f64(&mut map, "b_right", b_right);
            let scenario = finalize(&common, Kind::Riemann, map)?;
            run_graph(&scenario).map_err(|e| vec![e])
        }
        Command::Eigen {
            common,
            samples,
            range,
        } => {
            let mut map = Flat::new();
            flag_i64(&mut map, "samples", samples);
            flag_f64(&mut map, "range", range);
            let scenario = finalize(&common, Kind::Eigen, map)?;
            run_eigen(&scenario).map_err(|e| vec![e])
        }
        Command::Convergence {
            common,
            t_end,
            reference_cells,
        } => {
            let mut map = Flat::new();
            flag_f64(&mut map, "t_end", t_end);
            flag_i64(&mut map, "reference_cells", reference_cells);
            let scenario = finalize(&common, Kind::Convergence, map)?;
            run_convergence(&scenario).map_err(|e| vec![e])
        }
        Command::Report {
            common,
            shape,
            m,
            dt,
            t_end,
            expect_collapse,
        } => {
            let mut map = Flat::new();
            flag_str(&mut map, "shape", shape);
            flag_i64(&mut map, "m", m);
            flag_f64(&mut map, "dt", dt);
            flag_f64(&mut map, "t_end", t_end);
            if expect_collapse {
                map.insert("expect_collapse".into(), toml::Value::Boolean(true));
            }
            let scenario = finalize(&common, Kind::Report, map)?;
            run_curve_scenario(&scenario, true).map_err(|e| vec![e])
        }
    }
}

fn write_manifest(
    scenario: &Scenario,
    termination: &str,
    diagnostics: serde_json::Value,
) -> Result<(), String> {
    let hash = Sha256::digest(scenario.canonical_string().as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    let manifest = serde_json::json!({
        "kind": scenario.kind.as_str(),
        "seed": scenario.seed,
        "config_hash": hex,
        "termination": termination,
        "diagnostics": diagnostics,
    });
    let path = scenario.output_dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap())
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn prepare_dir(scenario: &Scenario) -> Result<(), String> {
    std::fs::create_dir_all(&scenario.output_dir)
        .map_err(|e| format!("cannot create {}: {e}", scenario.output_dir.display()))
}

fn create(scenario: &Scenario, name: &str) -> Result<std::io::BufWriter<std::fs::File>, String> {
    let path = scenario.output_dir.join(name);
    std::fs::File::create(&path)
        .map(std::io::BufWriter::new)
        .map_err(|e| format!("cannot create {}: {e}", path.display()))
}

fn run_sphere(scenario: &Scenario) -> Result<u8, String> {
    prepare_dir(scenario)?;
    let traj = integrate_sphere(
        scenario.f64("r0"),
        scenario.f64("sigma0"),
        scenario.usize("n"),
        scenario.f64("dt"),
        scenario.f64("t_end"),
        scenario.f64("r_floor"),
    )
    .map_err(|e| e.to_string())?;
    let mut out = create(scenario, "sphere.csv")?;
    hmcf::io::write_sphere_trajectory(&traj, &mut out).map_err(|e| e.to_string())?;
    out.flush().map_err(|e| e.to_string())?;

    let collapsed = traj.collapse_time.is_some();
    let (t_last, r_last, _) = traj.last();
    write_manifest(
        scenario,
        if collapsed { "collapse" } else { "reached_end" },
        serde_json::json!({
            "t_final": t_last,
            "r_final": r_last,
            "collapse_time": traj.collapse_time,
        }),
    )?;
    Ok(exit_for_collapse(collapsed, scenario.bool("expect_collapse")))
}

fn exit_for_collapse(collapsed: bool, expected: bool) -> u8 {
    match (collapsed, expected) {
        (true, true) => EXIT_OK,
        (true, false) => EXIT_BLOWUP,
        (false, _) => EXIT_OK,
    }
}

fn run_curve_scenario(scenario: &Scenario, with_report: bool) -> Result<u8, String> {
    prepare_dir(scenario)?;
    let m = scenario.usize("m");
    let initial = match scenario.str("shape") {
        "circle" => circle_initial(scenario.f64("r0"), scenario.f64("sigma0"), m),
        "ellipse" => {
            let s0 = scenario.f64("sigma0");
            ellipse_initial(scenario.f64("ax"), scenario.f64("by"), m, |_| s0)
        }
        other => return Err(format!("unknown shape {other}")),
    }
    .map_err(|e| e.to_string())?;
    let config = CurveFlowConfig {
        dt: scenario.f64("dt"),
        t_end: scenario.f64("t_end"),
        record_every: scenario.usize("record_every"),
    };
    let record = run_curve(&initial, &config).map_err(|e| e.to_string())?;

    let mut out = create(scenario, "curve.csv")?;
    hmcf::io::write_curve_snapshots(&record, &mut out).map_err(|e| e.to_string())?;
    out.flush().map_err(|e| e.to_string())?;

    let mut report_json = serde_json::Value::Null;
    if with_report && record.snapshots.len() >= 3 {
        let report = conservation_report(&record, [0.0, 0.0]).map_err(|e| e.to_string())?;
        let u: Vec<usize> = (0..m).collect();
        let budget = curvature_budget(&record, &u).map_err(|e| e.to_string())?;
        report_json = serde_json::json!({
            "energy_drift": report.energy_drift,
            "linear_momentum_drift": report.linear_momentum_drift,
            "angular_momentum_drift": report.angular_momentum_drift,
            "tangential_momentum_max": report.tangential_momentum_max,
            "momentum_balance_residual_max": report.momentum_balance_residual_max,
            "rotation_number_drift": report.rotation_number_drift,
            "e_u_drift": budget.e_u_drift,
            "h_time_integral": budget.h_time_integral,
            "h_bound": budget.h_bound,
            "bound_f_ok": budget.bound_f_ok,
            "bound_sigma_ok": budget.bound_sigma_ok,
        });
        let path = scenario.output_dir.join("report.json");
        let full = serde_json::json!({ "conservation": report, "budget": budget });
        std::fs::write(&path, serde_json::to_string_pretty(&full).unwrap())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }

    let termination = match record.termination {
        CurveTermination::ReachedEnd => "reached_end",
        CurveTermination::CollapseDetected => "collapse",
        CurveTermination::BlowUp => "blow_up",
    };
    let last = record.snapshots.last().unwrap();
    write_manifest(
        scenario,
        termination,
        serde_json::json!({
            "t_final": last.t,
            "vertices": m,
            "report": report_json,
        }),
    )?;
    let collapsed = record.termination != CurveTermination::ReachedEnd;
    Ok(exit_for_collapse(collapsed, scenario.bool("expect_collapse")))
}

fn solver_config(scenario: &Scenario) -> SolverConfig {
    SolverConfig {
        flux_scheme: match scenario.str("flux") {
            "rusanov" => FluxScheme::Rusanov,
            _ => FluxScheme::LaxFriedrichs,
        },
        cfl: scenario.f64("cfl"),
        integrator: match scenario.str("integrator") {
            "ssprk2" => Integrator::SspRk2,
            _ => Integrator::ForwardEuler,
        },
        t_end: scenario.f64("t_end"),
        output_every: scenario.usize("output_every"),
        hyperbolicity_eps: scenario.f64("hyperbolicity_eps"),
    }
}

fn boundary(scenario: &Scenario) -> Boundary {
    match scenario.str("boundary") {
        "outflow" => Boundary::Outflow,
        _ => Boundary::Periodic,
    }
}

fn run_graph(scenario: &Scenario) -> Result<u8, String> {
    prepare_dir(scenario)?;
    let config = solver_config(scenario);
    let field = match scenario.kind {
        Kind::Graph1d => {
            let cells = scenario.usize("cells");
            let length = scenario.f64("length");
            let (sa, ba, modes) = (
                scenario.f64("sigma_amp"),
                scenario.f64("b_amp"),
                scenario.usize("modes") as f64,
            );
            GraphField::from_profile_1d(cells, length, boundary(scenario), |x| {
                let phase = 2.0 * std::f64::consts::PI * modes * x / length;
                (sa * phase.sin(), ba * phase.sin())
            })
        }
        Kind::Graph2d => {
            let cells = [scenario.usize("cells"), scenario.usize("cells_y")];
            let lengths = [scenario.f64("length"), scenario.f64("length_y")];
            let (sa, ba, modes) = (
                scenario.f64("sigma_amp"),
                scenario.f64("b_amp"),
                scenario.usize("modes") as f64,
            );
            GraphField::from_profile_2d(cells, lengths, boundary(scenario), |x, y| {
                let px = 2.0 * std::f64::consts::PI * modes * x / lengths[0];
                let py = 2.0 * std::f64::consts::PI * modes * y / lengths[1];
                (
                    sa * px.sin() * py.sin(),
                    ba * px.sin() * py.cos(),
                    ba * px.cos() * py.sin(),
                )
            })
        }
        Kind::Riemann => {
            let left = hmcf::system::ConservedState::new(
                scenario.f64("sigma_left"),
                vec![scenario.f64("b_left")],
            );
            let right = hmcf::system::ConservedState::new(
                scenario.f64("sigma_right"),
                vec![scenario.f64("b_right")],
            );
            hmcf::fv::riemann_initial(
                &left,
                &right,
                scenario.usize("cells"),
                scenario.f64("length"),
                boundary(scenario),
            )
        }
        _ => unreachable!("run_graph called with non-graph kind"),
    }
    .map_err(|e| e.to_string())?;

    let record = run(&field, &config).map_err(|e| e.to_string())?;

    let mut snaps = create(scenario, "snapshots.csv")?;
    hmcf::io::write_graph_snapshots(&record, &mut snaps).map_err(|e| e.to_string())?;
    snaps.flush().map_err(|e| e.to_string())?;
    let mut diag = create(scenario, "diagnostics.csv")?;
    hmcf::io::write_graph_diagnostics(&record, &mut diag).map_err(|e| e.to_string())?;
    diag.flush().map_err(|e| e.to_string())?;

    let (termination, code) = match record.termination {
        Termination::ReachedEnd => ("reached_end", EXIT_OK),
        Termination::ConvexityGuard => ("convexity_guard", EXIT_GUARD),
        Termination::BlowUpNonFinite => ("blow_up_non_finite", EXIT_BLOWUP),
        Termination::BlowUpSigma => ("blow_up_sigma", EXIT_BLOWUP),
        Termination::BlowUpDtCollapse => ("blow_up_dt_collapse", EXIT_BLOWUP),
    };
    let last = record.diagnostics.last().unwrap();
    write_manifest(
        scenario,
        termination,
        serde_json::json!({
            "t_final": last.t,
            "mass_sigma": last.mass_sigma,
            "entropy": last.entropy,
            "bv": last.bv,
            "max_b2": last.max_b2,
        }),
    )?;
    Ok(code)
}

fn run_eigen(scenario: &Scenario) -> Result<u8, String> {
    prepare_dir(scenario)?;
    let samples = scenario.usize("samples");
    let range = scenario.f64("range");
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut out = create(scenario, "eigen.csv")?;
    writeln!(out, "a,b,lambda_plus,lambda_minus,gnl,residual").map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = rng.gen_range(-range..range);
        let b = rng.gen_range(-range..range);
        let eig = eigenstructure_1d(a, b);
        let m = jacobian_1d(a, b);
        let res = ((m * eig.mu_plus - eig.lambda_plus * eig.mu_plus).norm()
            / eig.mu_plus.norm())
        .max((m * eig.mu_minus - eig.lambda_minus * eig.mu_minus).norm() / eig.mu_minus.norm());
        worst = worst.max(res);
        writeln!(
            out,
            "{},{},{},{},{},{}",
            hmcf::io::fmt(a),
            hmcf::io::fmt(b),
            hmcf::io::fmt(eig.lambda_plus),
            hmcf::io::fmt(eig.lambda_minus),
            hmcf::io::fmt(eig.gnl),
            hmcf::io::fmt(res)
        )
        .map_err(|e| e.to_string())?;
    }
    out.flush().map_err(|e| e.to_string())?;
    write_manifest(
        scenario,
        "reached_end",
        serde_json::json!({ "samples": samples, "max_residual": worst }),
    )?;
    Ok(EXIT_OK)
}

fn run_convergence(scenario: &Scenario) -> Result<u8, String> {
    prepare_dir(scenario)?;
    let grids = scenario.usize_list("grids");
    let ref_cells = scenario.usize("reference_cells");
    let t_end = scenario.f64("t_end");
    let (sa, ba) = (scenario.f64("sigma_amp"), scenario.f64("b_amp"));
    for &g in &grids {
        if ref_cells % g != 0 {
            return Err(format!(
                "reference_cells {ref_cells} must be a multiple of grid {g}"
            ));
        }
    }
    let config = SolverConfig {
        t_end,
        ..SolverConfig::default()
    };
    let make = |cells: usize| {
        GraphField::from_profile_1d(cells, 1.0, Boundary::Periodic, |x| {
            let phase = 2.0 * std::f64::consts::PI * x;
            (sa * phase.sin(), ba * phase.sin())
        })
        .unwrap()
    };
    let reference = run(&make(ref_cells), &config).map_err(|e| e.to_string())?;
    let (_, ref_final) = reference.snapshots.last().unwrap();

    let mut out = create(scenario, "convergence.csv")?;
    writeln!(out, "cells,dx,l1_error,rate").map_err(|e| e.to_string())?;
    let mut prev: Option<(f64, f64)> = None;
    for &cells in &grids {
        let rec = run(&make(cells), &config).map_err(|e| e.to_string())?;
        let (_, coarse) = rec.snapshots.last().unwrap();
        let factor = ref_cells / cells;
        let dx = coarse.spacing[0];
        let mut err = 0.0;
        for i in 0..cells {
            let (mut s, mut b) = (0.0, 0.0);
            for j in 0..factor {
                s += ref_final.sigma[i * factor + j];
                b += ref_final.b[0][i * factor + j];
            }
            err += (coarse.sigma[i] - s / factor as f64).abs() * dx;
            err += (coarse.b[0][i] - b / factor as f64).abs() * dx;
        }
        let rate = match prev {
            Some((pdx, perr)) => (perr / err).ln() / (pdx / dx).ln(),
            None => f64::NAN,
        };
        writeln!(
            out,
            "{},{},{},{}",
            cells,
            hmcf::io::fmt(dx),
            hmcf::io::fmt(err),
            hmcf::io::fmt(rate)
        )
        .map_err(|e| e.to_string())?;
        prev = Some((dx, err));
    }
    out.flush().map_err(|e| e.to_string())?;
    write_manifest(
        scenario,
        "reached_end",
        serde_json::json!({ "grids": grids, "reference_cells": ref_cells }),
    )?;
    Ok(EXIT_OK)
}
