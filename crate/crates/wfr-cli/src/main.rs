//! `wfr`: config-driven experiment runner.
//!
//! Subcommands: `sample` (weighted-SDE run), `oracle` (grid PDE solve),
//! `equivalence` (paired jump vs reweight runs), `geodesic` (density
//! geodesics and triangle figures), `diagnose` (semigroup and generator
//! checks). All outputs are deterministic CSV/JSON; rerunning a config with
//! the same seed reproduces every data file byte for byte regardless of
//! `--threads` (the summary's wall_time_s field is the one exception).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wfr_core::config::{Experiment, ReactionMode};
use wfr_core::diagnostics;
use wfr_core::dynamics::run;
use wfr_core::geometry::{GaussianPoint, GeodesicKind, GeoPoint, GridSpec};
use wfr_core::grid::w1_weighted;
use wfr_core::oracle::{fk_pde_solve, interp_target_on_grid, InterpolationFields, SolverOptions};
use wfr_core::output;
use wfr_core::{Error, RunConfig};

#[derive(Parser)]
#[command(name = "wfr", version, about = "Weighted-SDE sampling engine")]
struct Cli {
    /// Worker threads (default: all cores; WFR_THREADS as fallback).
    /// Thread count never changes numerical results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the weighted-SDE sampler described by a config file.
    Sample(SampleArgs),
    /// Solve the matching density PDE on a grid.
    Oracle(OracleArgs),
    /// Paired jump-process vs reweighting runs with a distance report.
    Equivalence(EquivalenceArgs),
    /// Density geodesics and triangle figures.
    Geodesic(GeodesicArgs),
    /// Generator, semigroup, and dissipation checks.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to the JSON run config.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Override the config's particle count.
    #[arg(long)]
    particles: Option<usize>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    common: ConfigArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Grid cells.
    #[arg(long, default_value_t = 1024)]
    cells: usize,
    /// Left grid edge.
    #[arg(long, default_value_t = -10.0)]
    lo: f64,
    /// Right grid edge.
    #[arg(long, default_value_t = 10.0)]
    hi: f64,
}

#[derive(Args)]
struct EquivalenceArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// States for the discrete adjoint check.
    #[arg(long, default_value_t = 10)]
    states: usize,
    /// Random instances for the discrete adjoint check.
    #[arg(long, default_value_t = 50)]
    trials: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Wasserstein,
    Mixture,
    Exponential,
    FisherRao,
}

impl From<KindArg> for GeodesicKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Wasserstein => GeodesicKind::Wasserstein,
            KindArg::Mixture => GeodesicKind::Mixture,
            KindArg::Exponential => GeodesicKind::Exponential,
            KindArg::FisherRao => GeodesicKind::FisherRao,
        }
    }
}

#[derive(Args)]
struct GeodesicArgs {
    /// Interpolate two Gaussians in this geometry (single-geodesic mode).
    #[arg(long, value_enum, required_unless_present = "triangle")]
    kind: Option<KindArg>,
    #[arg(long, default_value_t = 0.0)]
    mu0: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma0: f64,
    #[arg(long, default_value_t = 2.0)]
    mu1: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma1: f64,
    /// Emit a single interpolant at this t instead of a sweep.
    #[arg(long)]
    t: Option<f64>,
    /// Sweep sample count when --t is absent.
    #[arg(long, default_value_t = 11)]
    samples: usize,

    /// Triangle mode: edges p-u and p-v in --kind-i, base u-v in --kind-j.
    #[arg(long)]
    triangle: bool,
    #[arg(long, value_enum)]
    kind_i: Option<KindArg>,
    #[arg(long, value_enum)]
    kind_j: Option<KindArg>,
    /// Emit all 16 (kind-i, kind-j) pairs.
    #[arg(long)]
    all_pairs: bool,
    #[arg(long, default_value_t = 0.0)]
    p_mu: f64,
    #[arg(long, default_value_t = 1.0)]
    p_sigma: f64,
    #[arg(long, default_value_t = -2.0)]
    u_mu: f64,
    #[arg(long, default_value_t = 0.8)]
    u_sigma: f64,
    #[arg(long, default_value_t = 2.0)]
    v_mu: f64,
    #[arg(long, default_value_t = 1.3)]
    v_sigma: f64,

    #[arg(long, default_value_t = -9.0)]
    grid_lo: f64,
    #[arg(long, default_value_t = 9.0)]
    grid_hi: f64,
    #[arg(long, default_value_t = 512)]
    cells: usize,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CheckArg {
    Adjoint,
    Gamma,
    VarianceDecay,
    Chi2,
    All,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long, value_enum, default_value_t = CheckArg::All)]
    check: CheckArg,
    #[arg(long, default_value_t = 10)]
    states: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Particle count for the Monte Carlo variance-decay check.
    #[arg(long, default_value_t = 100_000)]
    particles: usize,
    /// Also write report.json here.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

/// Print to stdout, tolerating a reader that closed the pipe early.
fn emit(payload: &str) {
    use std::io::Write;
    let mut out = std::io::stdout();
    let _ = out.write_all(payload.as_bytes());
    let _ = out.write_all(b"\n");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("WFR_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if threads > 0 {
        // Ignore pool re-init errors under repeated in-process use.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match &e {
                Error::Config { .. } => "config",
                Error::InvalidArgument(_) => "invalid_argument",
                Error::DegenerateEnsemble(_) => "degenerate_ensemble",
                Error::NoJumpTarget => "no_jump_target",
                Error::StepSize(_) => "step_size",
                Error::NumericalFailure(_) => "numerical_failure",
                Error::Domain(_) => "domain",
                Error::Io(_) => "io",
            };
            let payload = serde_json::json!({ "error": { "kind": kind, "message": e.to_string() } });
            emit(&payload.to_string());
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::Sample(args) => cmd_sample(args),
        Cmd::Oracle(args) => cmd_oracle(args),
        Cmd::Equivalence(args) => cmd_equivalence(args),
        Cmd::Geodesic(args) => cmd_geodesic(args),
        Cmd::Diagnose(args) => cmd_diagnose(args),
    }
}

fn load_config(common: &ConfigArgs, expected: Experiment) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(&common.config)?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &common.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(k) = common.particles {
        cfg.particles = k;
    }
    if cfg.experiment != expected {
        return Err(Error::config(
            "experiment",
            format!("config declares {:?}, subcommand expects {:?}", cfg.experiment, expected),
        ));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_summary(dir: &Path, summary: &serde_json::Value) -> Result<(), Error> {
    output::write_file(
        &dir.join("summary.json"),
        &format!("{}\n", serde_json::to_string_pretty(summary).expect("json")),
    )
}

fn cmd_sample(args: SampleArgs) -> Result<(), Error> {
    let cfg = load_config(&args.common, Experiment::Sample)?;
    let start = Instant::now();
    let result = run(&cfg)?;
    let wall = start.elapsed().as_secs_f64();
    let dir = cfg.output_dir.clone();
    output::write_file(
        &dir.join("snapshots.csv"),
        &output::snapshots_csv(&result.snapshots, cfg.model1[0].mean.len()),
    )?;
    let summary = output::run_summary_json(
        serde_json::to_value(&cfg).expect("config echo"),
        cfg.seed,
        &result,
        wall,
    );
    write_summary(&dir, &summary)
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Error> {
    let cfg = load_config(&args.common, Experiment::Oracle)?;
    let start = Instant::now();
    let fields = cfg.field_set()?;
    let sched = cfg.time_schedule()?;
    let spec = GridSpec::new(args.lo, args.hi, args.cells)?;
    let p0 = interp_target_on_grid(&fields, &cfg.interpolation, sched.t_start, &spec)?;
    let oracle_fields = InterpolationFields {
        fields: &fields,
        interp: cfg.interpolation,
    };
    let traj = fk_pde_solve(&p0, &oracle_fields, &sched, &SolverOptions::default())?;
    // Keep only the configured snapshot times (all grid points if none).
    let keep: Vec<(f64, _)> = if cfg.snapshots.is_empty() {
        traj.into_iter().collect()
    } else {
        let mut idx: Vec<usize> = cfg
            .snapshots
            .iter()
            .map(|&t| {
                ((t - sched.t_start) / sched.signed_step())
                    .round()
                    .clamp(0.0, sched.n_steps as f64) as usize
            })
            .collect();
        idx.sort_unstable();
        idx.dedup();
        idx.into_iter().map(|i| traj[i].clone()).collect()
    };
    let wall = start.elapsed().as_secs_f64();
    let dir = cfg.output_dir.clone();
    output::write_file(&dir.join("grid.csv"), &output::grid_csv(&keep))?;
    let masses: Vec<f64> = keep.iter().map(|(_, g)| g.mass()).collect();
    let summary = serde_json::json!({
        "config": serde_json::to_value(&cfg).expect("config echo"),
        "seed": cfg.seed,
        "version": output::version_string(),
        "wall_time_s": wall,
        "grid": { "lo": args.lo, "hi": args.hi, "cells": args.cells },
        "snapshot_times": keep.iter().map(|(t, _)| *t).collect::<Vec<_>>(),
        "snapshot_masses": masses,
    });
    write_summary(&dir, &summary)
}

fn cmd_equivalence(args: EquivalenceArgs) -> Result<(), Error> {
    let base = load_config(&args.common, Experiment::JumpEquivalence)?;
    let start = Instant::now();
    let mut weight_cfg = base.clone();
    weight_cfg.reaction_mode = ReactionMode::Weight;
    let mut jump_cfg = base.clone();
    jump_cfg.reaction_mode = ReactionMode::Jump;
    let wres = run(&weight_cfg)?;
    let jres = run(&jump_cfg)?;

    let wx = wres.final_ensemble.alive_x1();
    let ww: Vec<f64> = wfr_core::normalized_weights(&wres.final_ensemble)?
        .into_iter()
        .zip(&wres.final_ensemble.particles)
        .filter(|(_, p)| p.alive)
        .map(|(w, _)| w)
        .collect();
    let jx = jres.final_ensemble.alive_x1();
    let jw: Vec<f64> = wfr_core::normalized_weights(&jres.final_ensemble)?
        .into_iter()
        .zip(&jres.final_ensemble.particles)
        .filter(|(_, p)| p.alive)
        .map(|(w, _)| w)
        .collect();
    let w1 = w1_weighted(&wx, &ww, &jx, &jw);
    let residual = diagnostics::adjoint_residual_max(args.states, args.trials, base.seed)?;
    let wall = start.elapsed().as_secs_f64();

    let dir = base.output_dir.clone();
    output::write_file(
        &dir.join("weight_snapshots.csv"),
        &output::snapshots_csv(&wres.snapshots, 1),
    )?;
    output::write_file(
        &dir.join("jump_snapshots.csv"),
        &output::snapshots_csv(&jres.snapshots, 1),
    )?;
    let summary = serde_json::json!({
        "config": serde_json::to_value(&base).expect("config echo"),
        "seed": base.seed,
        "version": output::version_string(),
        "wall_time_s": wall,
        "terminal_w1_distance": w1,
        "adjoint_check": {
            "states": args.states,
            "trials": args.trials,
            "max_residual": residual,
        },
        "weight_run": { "mean": wres.terminal_mean, "var": wres.terminal_var,
                         "n_resamples": wres.n_resamples },
        "jump_run": { "mean": jres.terminal_mean, "var": jres.terminal_var,
                       "n_jumps": jres.n_jumps },
    });
    write_summary(&dir, &summary)
}

fn cmd_geodesic(args: GeodesicArgs) -> Result<(), Error> {
    let start = Instant::now();
    let grid = GridSpec::new(args.grid_lo, args.grid_hi, args.cells)?;
    let dir = args.output_dir.clone();
    let mut files: Vec<String> = Vec::new();

    if args.triangle {
        let p = GaussianPoint::new(args.p_mu, args.p_sigma)?;
        let u = GaussianPoint::new(args.u_mu, args.u_sigma)?;
        let v = GaussianPoint::new(args.v_mu, args.v_sigma)?;
        let pairs: Vec<(GeodesicKind, GeodesicKind)> = if args.all_pairs {
            GeodesicKind::ALL
                .iter()
                .flat_map(|&i| GeodesicKind::ALL.iter().map(move |&j| (i, j)))
                .collect()
        } else {
            let i = args.kind_i.ok_or_else(|| {
                Error::invalid("triangle mode needs --kind-i --kind-j or --all-pairs")
            })?;
            let j = args
                .kind_j
                .ok_or_else(|| Error::invalid("triangle mode needs --kind-j"))?;
            vec![(i.into(), j.into())]
        };
        for (ki, kj) in pairs {
            let (points, grids) =
                output::triangle_csvs(&p, &u, &v, ki, kj, args.samples, &grid)?;
            let pname = format!("triangle_{}_{}_points.csv", ki.name(), kj.name());
            let gname = format!("triangle_{}_{}_grid.csv", ki.name(), kj.name());
            output::write_file(&dir.join(&pname), &points)?;
            output::write_file(&dir.join(&gname), &grids)?;
            files.push(pname);
            files.push(gname);
        }
    } else {
        let kind: GeodesicKind = args.kind.expect("required by clap").into();
        let p0 = GaussianPoint::new(args.mu0, args.sigma0)?;
        let p1 = GaussianPoint::new(args.mu1, args.sigma1)?;
        let ts: Vec<f64> = match args.t {
            Some(t) => vec![t],
            None => (0..args.samples)
                .map(|i| i as f64 / (args.samples - 1).max(1) as f64)
                .collect(),
        };
        let mut points = Vec::new();
        let mut grids = Vec::new();
        for &t in &ts {
            match wfr_core::geometry::gaussian_geodesic(&p0, &p1, t, kind, &grid)? {
                GeoPoint::Point(q) => points.push(output::PointRow {
                    segment: "geodesic",
                    s: t,
                    t,
                    point: q,
                }),
                GeoPoint::Grid(g) => grids.push(output::GridRow {
                    segment: "geodesic",
                    s: t,
                    density: g,
                }),
            }
        }
        if !points.is_empty() {
            output::write_file(&dir.join("trajectory_points.csv"), &output::points_csv(&points))?;
            files.push("trajectory_points.csv".into());
        }
        if !grids.is_empty() {
            output::write_file(&dir.join("trajectory_grid.csv"), &output::grid_rows_csv(&grids))?;
            files.push("trajectory_grid.csv".into());
        }
    }

    let wall = start.elapsed().as_secs_f64();
    let summary = serde_json::json!({
        "config": {
            "mode": if args.triangle { "triangle" } else { "single" },
            "grid": { "lo": args.grid_lo, "hi": args.grid_hi, "cells": args.cells },
            "samples": args.samples,
            "median_rule": "midpoint of the p-to-base geodesic at t = 1/2",
        },
        "seed": 0,
        "version": output::version_string(),
        "wall_time_s": wall,
        "files": files,
    });
    write_summary(&dir, &summary)
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<(), Error> {
    let start = Instant::now();
    let mut report = serde_json::Map::new();
    let wants = |c: CheckArg| args.check == c || args.check == CheckArg::All;
    if wants(CheckArg::Adjoint) {
        let max_residual = diagnostics::adjoint_residual_max(args.states, args.trials, args.seed)?;
        report.insert(
            "adjoint".into(),
            serde_json::json!({
                "states": args.states,
                "trials": args.trials,
                "max_residual": max_residual,
            }),
        );
    }
    if wants(CheckArg::Gamma) {
        let rep = diagnostics::gamma_ou_check(1024);
        report.insert("gamma".into(), serde_json::to_value(rep).expect("json"));
    }
    if wants(CheckArg::VarianceDecay) {
        let points: Vec<_> = [0.5, 1.0]
            .iter()
            .map(|&t| diagnostics::ou_variance_decay_mc(1.0, t, args.particles, 1e-3, args.seed))
            .collect();
        report.insert(
            "variance_decay".into(),
            serde_json::to_value(points).expect("json"),
        );
    }
    if wants(CheckArg::Chi2) {
        let cases = diagnostics::chi2_cases(1024, 1e-4)?;
        report.insert("chi2".into(), serde_json::to_value(cases).expect("json"));
    }
    let wall = start.elapsed().as_secs_f64();
    let payload = serde_json::json!({
        "version": output::version_string(),
        "seed": args.seed,
        "wall_time_s": wall,
        "report": serde_json::Value::Object(report),
    });
    emit(&serde_json::to_string_pretty(&payload).expect("json"));
    if let Some(dir) = &args.output_dir {
        output::write_file(
            &dir.join("report.json"),
            &format!("{}\n", serde_json::to_string_pretty(&payload).expect("json")),
        )?;
    }
    Ok(())
}
