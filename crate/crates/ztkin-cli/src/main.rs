//! `ztkin`: forward kinematics, workspace sampling, and the tracking
//! comparison experiment from the command line.
//!
//! Exit codes: 0 on success, 2 for configuration and usage errors, 3 for
//! runtime failures.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ztkin::chain::{forward_kinematics, RobotConfig, RobotModel};
use ztkin::config::ExperimentConfig;
use ztkin::experiment::{
    build_trajectory, run_comparison, summarize, write_runs, write_summary, OptimizeMode, Summary,
    TrajectorySpec,
};
use ztkin::mechanism::{module_workspace, ModuleParams};

#[derive(Parser)]
#[command(
    name = "ztkin",
    version,
    about = "Zero-torsion modular robot kinematics and tracking experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the tool pose for a joint configuration.
    Fk(FkArgs),
    /// Run the raw-vs-optimized tracking comparison and write artifacts.
    Run(RunArgs),
    /// Sample reachable tool positions as CSV.
    Workspace(WorkspaceArgs),
}

#[derive(Args)]
struct FkArgs {
    /// Config file (TOML); omitted means the built-in reference arm.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the fully straight configuration (the default).
    #[arg(long, conflicts_with = "q")]
    straight: bool,
    /// Comma-separated joint values in radians, one per degree of freedom.
    #[arg(long)]
    q: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizeFlag {
    /// Optimized arm only.
    On,
    /// Raw arm only.
    Off,
    /// Paired runs (the comparison).
    Both,
}

#[derive(Args)]
struct RunArgs {
    /// Config file (TOML); omitted means the desk-scale reference setup.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Paired repetitions per trajectory.
    #[arg(long)]
    reps: Option<u32>,
    /// Trajectory nodes, including the closing node.
    #[arg(long)]
    steps: Option<usize>,
    /// Which arms to run.
    #[arg(long, value_enum, default_value_t = OptimizeFlag::Both)]
    optimize: OptimizeFlag,
    /// Trajectory id 1..=4, or "all".
    #[arg(long, default_value = "all")]
    trajectory: String,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for the per-run CSVs and summary.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Full-scale contour timing (2000 intervals of 0.5 s) instead of the
    /// desk-scale default (200 intervals of 0.1 s).
    #[arg(long)]
    full_scale: bool,
    /// Record per-step solver timings in the CSVs. This trades the
    /// byte-for-byte reproducibility of the artifacts for profiling detail.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum WorkspaceMode {
    /// Sweep both actuators of a single bend module on a grid.
    Module,
    /// Draw random joint vectors for the configured robot.
    Robot,
}

#[derive(Args)]
struct WorkspaceArgs {
    /// Config file (TOML); used by robot mode.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = WorkspaceMode::Module)]
    mode: WorkspaceMode,
    /// Grid resolution per actuator axis (module mode).
    #[arg(long, default_value_t = 60)]
    grid: usize,
    /// Number of random configurations (robot mode).
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    /// RNG seed (robot mode).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Module bend radius in metres (module mode).
    #[arg(long)]
    radius: Option<f64>,
    /// Module cone half-angle in degrees (module mode).
    #[arg(long)]
    alpha_deg: Option<f64>,
}

/// Failures split by exit code: 2 for configuration, 3 for runtime.
enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, CliError> {
    match path {
        Some(p) => ExperimentConfig::from_path(p).map_err(config_err),
        None => Ok(ExperimentConfig::default()),
    }
}

fn parse_joint_vector(text: &str, dof: usize) -> Result<DVector<f64>, CliError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| CliError::Config(format!("--q: {e}")))?;
    if values.len() != dof {
        return Err(CliError::Config(format!(
            "--q: expected {dof} joint values, got {}",
            values.len()
        )));
    }
    Ok(DVector::from_vec(values))
}

fn cmd_fk(args: &FkArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    let model = cfg.robot().map_err(config_err)?;
    let config = match &args.q {
        Some(text) => RobotConfig::new(parse_joint_vector(text, model.dof())?),
        None => RobotConfig::straight(&model),
    };
    let pose = forward_kinematics(&model, &config).map_err(runtime_err)?;
    let p = pose.translation;
    let r = pose.rotation;
    println!("dof: {}", model.dof());
    println!("position_m: {:.6} {:.6} {:.6}", p.x, p.y, p.z);
    println!(
        "tool_axis: {:.6} {:.6} {:.6}",
        r[(0, 2)],
        r[(1, 2)],
        r[(2, 2)]
    );
    for i in 0..3 {
        println!(
            "rotation_row{i}: {:.6} {:.6} {:.6}",
            r[(i, 0)],
            r[(i, 1)],
            r[(i, 2)]
        );
    }
    Ok(())
}

fn parse_trajectories(text: &str) -> Result<Vec<u8>, CliError> {
    if text == "all" {
        return Ok(vec![1, 2, 3, 4]);
    }
    match text.parse::<u8>() {
        Ok(id) if (1..=4).contains(&id) => Ok(vec![id]),
        _ => Err(CliError::Config(format!(
            "--trajectory: expected 1..=4 or 'all', got '{text}'"
        ))),
    }
}

fn print_digest(summary: &Summary) {
    for t in &summary.trajectories {
        let mut line = format!("trajectory {}:", t.trajectory);
        if let (Some(start), Some(mean)) = (&t.improvement_start_eta, &t.improvement_mean_eta) {
            line.push_str(&format!(
                " {} pairs, start eta median {:+.1}%, contour eta median {:+.1}%, negatives {:.0}%",
                start.pairs,
                start.percent.median,
                mean.percent.median,
                100.0 * mean.negative_fraction
            ));
        } else {
            for (tag, arm) in [("raw", &t.raw), ("optimized", &t.optimized)] {
                if let Some(stats) = arm {
                    line.push_str(&format!(
                        " {} runs {} (mean eta {:.3}),",
                        tag, stats.runs, stats.mean_eta.mean
                    ));
                }
            }
        }
        if let Some(raw) = &t.raw {
            if let Some(ratio) = raw.sector_rtr.along_x_over_transverse {
                line.push_str(&format!(" raw rtr x/transverse {ratio:.2}"));
            }
        }
        println!("{line}");
    }
    println!(
        "solver step: mean {:.1} us (worst run mean {:.1} us)",
        summary.mean_step_us, summary.max_mean_step_us
    );
    if summary.failed_pairs > 0 {
        println!(
            "failed pairs: {}/{}",
            summary.failed_pairs, summary.attempted_pairs
        );
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.config)?;
    if args.full_scale {
        cfg.trajectory.steps = 2001;
        cfg.trajectory.dt = 0.5;
    }
    if let Some(steps) = args.steps {
        cfg.trajectory.steps = steps;
    }
    if let Some(seed) = args.seed {
        cfg.run.master_seed = seed;
    }
    if let Some(reps) = args.reps {
        cfg.run.repetitions = reps;
    }
    if args.timing {
        cfg.run.record_step_timing = true;
    }

    let setup = cfg.build().map_err(config_err)?;
    let ids = parse_trajectories(&args.trajectory)?;
    let specs: Vec<TrajectorySpec> = ids
        .iter()
        .map(|&id| build_trajectory(id, &setup.trajectory))
        .collect::<Result<_, _>>()
        .map_err(config_err)?;

    if let Some(workers) = args.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(runtime_err)?;
    }
    let mode = match args.optimize {
        OptimizeFlag::On => OptimizeMode::OptimizedOnly,
        OptimizeFlag::Off => OptimizeMode::RawOnly,
        OptimizeFlag::Both => OptimizeMode::Both,
    };

    let outcome = run_comparison(&setup.model, &specs, &setup.actions, &setup.run, mode)
        .map_err(runtime_err)?;
    for note in &outcome.failure_notes {
        eprintln!("warning: dropped {note}");
    }
    if outcome.records.is_empty() {
        return Err(CliError::Runtime(
            "every repetition failed; no runs to report".into(),
        ));
    }

    let summary = summarize(&outcome).map_err(runtime_err)?;
    let paths = write_runs(&args.out, &outcome.records).map_err(runtime_err)?;
    let summary_path = write_summary(&args.out, &summary).map_err(runtime_err)?;
    print_digest(&summary);
    println!("wrote {} runs and {}", paths.len(), summary_path.display());
    Ok(())
}

fn write_points_csv(
    out: &Option<PathBuf>,
    points: impl Iterator<Item = [f64; 3]>,
) -> Result<(), CliError> {
    let mut body = String::from("x_m,y_m,z_m\n");
    for p in points {
        body.push_str(&format!("{:.6},{:.6},{:.6}\n", p[0], p[1], p[2]));
    }
    match out {
        Some(path) => std::fs::write(path, body).map_err(runtime_err),
        // A reader that closes the pipe early (`workspace | head`) is not an error.
        None => match std::io::stdout().write_all(body.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(runtime_err(e)),
            _ => Ok(()),
        },
    }
}

fn cmd_workspace(args: &WorkspaceArgs) -> Result<(), CliError> {
    match args.mode {
        WorkspaceMode::Module => {
            if args.grid == 0 {
                return Err(CliError::Config("--grid must be at least 1".into()));
            }
            let defaults = ModuleParams::default();
            let params = ModuleParams::new(
                args.radius.unwrap_or(defaults.radius),
                args.alpha_deg.map_or(defaults.alpha, f64::to_radians),
            )
            .map_err(config_err)?;
            let points = module_workspace(&params, args.grid);
            write_points_csv(&args.out, points.into_iter().map(|p| [p.x, p.y, p.z]))
        }
        WorkspaceMode::Robot => {
            if args.samples == 0 {
                return Err(CliError::Config("--samples must be at least 1".into()));
            }
            let cfg = load_config(&args.config)?;
            let model: RobotModel = cfg.robot().map_err(config_err)?;
            let dof = model.dof();
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let mut points = Vec::with_capacity(args.samples);
            for _ in 0..args.samples {
                let q = DVector::from_fn(dof, |_, _| {
                    rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)
                });
                let pose = forward_kinematics(&model, &RobotConfig::new(q)).map_err(runtime_err)?;
                points.push([pose.translation.x, pose.translation.y, pose.translation.z]);
            }
            write_points_csv(&args.out, points.into_iter())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fk(args) => cmd_fk(args),
        Command::Run(args) => cmd_run(args),
        Command::Workspace(args) => cmd_workspace(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
