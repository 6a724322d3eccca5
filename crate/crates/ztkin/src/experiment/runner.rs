//! Paired raw-vs-optimized tracking runs.
//!
//! Each repetition draws one random start posture, then runs the trajectory
//! twice from that same posture: once with a plain reach-and-track hierarchy
//! and once with dexterity and transmission objectives layered underneath the
//! pose task. A pair is excluded (and counted) if either arm fails to reach
//! the contour start within its step budget.

use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{forward_kinematics, weighted_jacobian, RobotConfig, RobotModel};
use crate::error::{Error, Result};
use crate::experiment::trajectory::{Sector, TrajectorySpec};
use crate::geometry::Twist;
use crate::metrics::{metric_sample, MetricSample, MetricWeights};
use crate::tpik::{
    integrate_step, pose_error, Action, ControlObjective, JointLimits, SolverOutput, StepContext,
    Task, TaskKind, TpikSolver,
};

/// Which arms of the comparison to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizeMode {
    /// Paired runs, both arms (the default comparison).
    Both,
    /// Plain tracking only.
    RawOnly,
    /// Metric-optimizing runs only.
    OptimizedOnly,
}

impl OptimizeMode {
    pub fn runs_raw(self) -> bool {
        matches!(self, OptimizeMode::Both | OptimizeMode::RawOnly)
    }

    pub fn runs_optimized(self) -> bool {
        matches!(self, OptimizeMode::Both | OptimizeMode::OptimizedOnly)
    }
}

/// Acceptance region for randomly drawn start postures, checked on the tool
/// position after forward kinematics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StartRegion {
    /// Allowed tool height band (metres).
    pub z_range: (f64, f64),
    /// Max horizontal distance of the tool from the base axis (metres).
    pub max_xy_radius: f64,
    /// Rejection-sampling budget before the repetition is abandoned.
    pub max_attempts: u32,
}

impl Default for StartRegion {
    fn default() -> Self {
        Self {
            z_range: (0.05, 1.9),
            max_xy_radius: 1.8,
            max_attempts: 10_000,
        }
    }
}

/// Gains for the standard four-action hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActionGains {
    /// Pose-error gain while reaching the contour start (1/s).
    pub reach_gain: f64,
    /// Pose-error gain while tracking, on top of the twist feedforward (1/s).
    pub track_gain: f64,
    /// Gain pushing each metric toward its upper bound (1/s).
    pub metric_gain: f64,
    /// Clamp on the metric reference rates (1/s); see [`Task::rate_cap`].
    pub metric_rate_cap: f64,
    /// `(sigma_threshold, damping)` for the metric level, sized to gradient
    /// row norms rather than to the 6-row pose Jacobian.
    pub metric_damping: (f64, f64),
}

impl Default for ActionGains {
    fn default() -> Self {
        Self {
            reach_gain: 1.0,
            track_gain: 1.5,
            metric_gain: 1.0,
            metric_rate_cap: 0.05,
            metric_damping: (0.1, 0.05),
        }
    }
}

/// The four actions the comparison cycles through.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    /// Pose task only: drive the tool to the contour start.
    pub reach: Action,
    /// Velocity task only: follow the contour.
    pub track: Action,
    /// Reach with metric objectives in the pose null space.
    pub reach_optimized: Action,
    /// Track with metric objectives in the pose null space.
    pub track_optimized: Action,
}

impl ActionSet {
    /// Builds the standard hierarchy: a six-row pose or velocity task at
    /// priority 1 and, in the optimized actions, one dexterity row plus one
    /// transmission row at priority 2 driven toward their upper bound 1.
    pub fn standard(gains: &ActionGains) -> Self {
        let pose = |g| {
            Task::new(
                "pose",
                1,
                TaskKind::Pose,
                ControlObjective::equality(0.0, g),
            )
        };
        let follow = |g| {
            Task::new(
                "follow",
                1,
                TaskKind::Velocity,
                ControlObjective::equality(0.0, g),
            )
        };
        let metric = |name, kind| {
            Task::new(
                name,
                2,
                kind,
                ControlObjective::equality(1.0, gains.metric_gain),
            )
            .with_rate_cap(gains.metric_rate_cap)
            .with_damping(gains.metric_damping.0, gains.metric_damping.1)
        };
        let dex = metric("dexterity", TaskKind::Dexterity);
        let rtr = metric("transmission", TaskKind::Rtr);
        Self {
            reach: Action::new("reach", vec![pose(gains.reach_gain)]),
            track: Action::new("track", vec![follow(gains.track_gain)]),
            reach_optimized: Action::new(
                "reach+metrics",
                vec![pose(gains.reach_gain), dex.clone(), rtr.clone()],
            ),
            track_optimized: Action::new("track+metrics", vec![follow(gains.track_gain), dex, rtr]),
        }
    }
}

/// Everything a comparison run needs besides the robot and the trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    /// Paired repetitions per trajectory.
    pub repetitions: u32,
    /// Master seed; each (trajectory, repetition) derives its own stream.
    pub master_seed: u64,
    pub solver: TpikSolver,
    pub limits: JointLimits,
    pub weights: MetricWeights,
    /// Reach succeeds when the position error drops below this (metres).
    pub reach_position_tol: f64,
    /// ... and the orientation error below this (radians).
    pub reach_rotation_tol: f64,
    /// Max reach steps before the start draw counts as unreachable.
    pub reach_budget_steps: usize,
    /// Fresh start draws allowed per pair. A posture from which the contour
    /// start cannot be reached within budget is discarded and redrawn, like
    /// an inadmissible posture in a physical trial; the draws stay on the
    /// pair's own RNG stream, so results remain reproducible.
    pub start_attempts: u32,
    /// Extra settling steps granted to the optimized arm after reaching.
    pub optimize_budget_steps: usize,
    /// Metric gradients projected into the pose null space below this norm
    /// count as "settled" (rad/s per unit metric).
    pub gradient_norm_tol: f64,
    /// Consecutive settled steps required to declare a constrained optimum.
    pub gradient_quiet_steps: usize,
    /// Tracking rows with position error above this count as violations.
    pub tracking_tolerance: f64,
    /// Record per-step solver timings in the run records. Off by default so
    /// that run artifacts are byte-identical across repeated invocations;
    /// aggregate timing is always collected.
    pub record_step_timing: bool,
    pub start_region: StartRegion,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            repetitions: 20,
            master_seed: 42,
            solver: TpikSolver::default(),
            limits: JointLimits::default(),
            weights: MetricWeights::default(),
            reach_position_tol: 1e-3,
            reach_rotation_tol: 5e-3,
            reach_budget_steps: 3000,
            start_attempts: 5,
            optimize_budget_steps: 1500,
            gradient_norm_tol: 1e-5,
            gradient_quiet_steps: 10,
            tracking_tolerance: 5e-3,
            record_step_timing: false,
            start_region: StartRegion::default(),
        }
    }
}

/// One completed pass over a trajectory.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub trajectory: u8,
    pub repetition: u32,
    /// Derived per-repetition seed (shared by both arms of a pair).
    pub seed: u64,
    pub optimized: bool,
    /// Node spacing of the tracked trajectory (seconds).
    pub dt: f64,
    /// Metrics at the randomly drawn posture, before any reaching.
    pub random_start_sample: MetricSample,
    /// Steps spent reaching the contour start (including metric settling).
    pub reach_steps: usize,
    pub reach_seconds: f64,
    /// Whether the optimized arm stopped on a detected constrained optimum
    /// rather than on its settling budget.
    pub local_max_hit: bool,
    /// Per-node metrics; `samples[0]` is the tracking start.
    pub samples: Vec<MetricSample>,
    /// Per-node contour sector, copied from the trajectory.
    pub sectors: Vec<Sector>,
    /// Per-node tool position error (metres).
    pub pose_errors: Vec<f64>,
    /// Per-node solve time; zeros unless step timing was requested.
    pub solver_us: Vec<u64>,
    /// Mean solve time over every solver call in the run (reach + track).
    pub mean_step_us: f64,
    pub solver_calls: u64,
    pub tracking_violations: usize,
    pub max_tracking_error: f64,
    pub final_pose_error: f64,
}

impl RunRecord {
    /// Mean blended metric over the tracked contour.
    pub fn mean_eta(&self) -> f64 {
        self.samples.iter().map(|s| s.eta).sum::<f64>() / self.samples.len() as f64
    }

    /// Mean of one metric component over the tracked contour.
    pub fn mean_component(&self, f: impl Fn(&MetricSample) -> f64) -> f64 {
        self.samples.iter().map(f).sum::<f64>() / self.samples.len() as f64
    }
}

/// Outcome of the full comparison sweep.
#[derive(Debug, Clone)]
pub struct ComparisonOutcome {
    /// Completed runs, ordered by (trajectory, repetition, raw-then-opt).
    pub records: Vec<RunRecord>,
    pub attempted_pairs: u32,
    /// Pairs dropped because sampling, reaching, or solving failed in either
    /// arm.
    pub failed_pairs: u32,
    /// One human-readable line per dropped pair.
    pub failure_notes: Vec<String>,
}

/// Derives a well-mixed seed for one (trajectory, repetition) cell.
fn mix_seed(master: u64, trajectory: u8, repetition: u32) -> u64 {
    // splitmix64 finalizer over a cell-unique input.
    let mut x = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(trajectory as u64 + 1))
        .wrapping_add((repetition as u64) << 17);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

/// Draws joint vectors uniformly until the tool lands inside the region.
fn sample_start(
    model: &RobotModel,
    rng: &mut ChaCha8Rng,
    region: &StartRegion,
) -> Option<RobotConfig> {
    let dof = model.dof();
    for _ in 0..region.max_attempts {
        let q = DVector::from_fn(dof, |_, _| {
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)
        });
        let cfg = RobotConfig::new(q);
        let tool = forward_kinematics(model, &cfg).ok()?;
        let z = tool.translation.z;
        let r_xy = tool.translation.fixed_rows::<2>(0).norm();
        if z >= region.z_range.0 && z <= region.z_range.1 && r_xy <= region.max_xy_radius {
            return Some(cfg);
        }
    }
    None
}

/// Norms of the last level's rows projected through the null space of the
/// levels above it; `None` when the hierarchy has a single level.
fn projected_gradient_norms(out: &SolverOutput) -> Option<Vec<f64>> {
    let levels = out.level_jacobians.len();
    if levels < 2 {
        return None;
    }
    let q = &out.projectors[levels - 2];
    let j = out.level_jacobians.last().unwrap();
    Some((0..j.nrows()).map(|r| (j.row(r) * q).norm()).collect())
}

/// Why one pass could not produce a record.
enum PassFailure {
    /// The contour start was not reached within budget from this draw; the
    /// pair may redraw its start posture and try again.
    ReachTimeout { pos_err: f64, rot_err: f64 },
    /// Anything else; the pair is dropped outright.
    Fatal(String),
}

/// Runs one pass (reach, then track) from `start`.
#[allow(clippy::too_many_arguments)]
fn run_pass(
    model: &RobotModel,
    spec: &TrajectorySpec,
    reach_action: &Action,
    track_action: &Action,
    start: &RobotConfig,
    params: &RunParams,
    optimized: bool,
    seed: u64,
    repetition: u32,
) -> std::result::Result<RunRecord, PassFailure> {
    let dof = model.dof();
    let dt = spec.dt;
    let length = model.characteristic_length;
    let solve_err = |e: Error| PassFailure::Fatal(format!("solver: {e}"));

    let random_start_sample = weighted_jacobian(model, start)
        .and_then(|jw| {
            metric_sample(
                &jw,
                &spec.twists[0],
                &spec.wrenches[0],
                length,
                &params.weights,
            )
        })
        .map_err(solve_err)?;

    let mut cfg = start.clone();
    let mut rate = DVector::zeros(dof);
    let mut total_us: u128 = 0;
    let mut calls: u64 = 0;

    // Reach phase: hold the contour start; the metric tasks (if present) see
    // the load of the first interval.
    let reach_ctx = StepContext {
        target: spec.poses[0],
        feedforward: Twist::zero(),
        twist: spec.twists[0],
        wrench: spec.wrenches[0],
    };
    let mut reach_steps = 0usize;
    let mut reached = false;
    let mut local_max_hit = false;
    let mut settling_steps = 0usize;
    let mut quiet = 0usize;
    loop {
        let t0 = Instant::now();
        let out = params
            .solver
            .solve(reach_action, model, &cfg, &reach_ctx)
            .map_err(solve_err)?;
        total_us += t0.elapsed().as_micros();
        calls += 1;
        let (next, applied) = integrate_step(&cfg, &rate, &out.q_dot, dt, &params.limits);
        cfg = next;
        rate = applied;
        reach_steps += 1;

        let pose = forward_kinematics(model, &cfg).map_err(solve_err)?;
        let err = pose_error(&reach_ctx.target, &pose);
        let pos_err = err.rows(0, 3).norm();
        let rot_err = err.rows(3, 3).norm();
        if !reached && pos_err <= params.reach_position_tol && rot_err <= params.reach_rotation_tol
        {
            reached = true;
            if !optimized {
                break;
            }
        }
        if reached {
            // The pose is held by priority 1; keep stepping until the metric
            // gradients die inside its null space or the budget runs out.
            settling_steps += 1;
            let settled = projected_gradient_norms(&out)
                .is_none_or(|norms| norms.iter().all(|n| *n <= params.gradient_norm_tol));
            if settled {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet >= params.gradient_quiet_steps {
                local_max_hit = true;
                break;
            }
            if settling_steps >= params.optimize_budget_steps {
                break;
            }
        } else if reach_steps >= params.reach_budget_steps {
            return Err(PassFailure::ReachTimeout { pos_err, rot_err });
        }
    }

    // Track phase: node k commands the pose it should currently hold plus
    // the twist of the interval leaving it; the row recorded after the step
    // is judged against the next node.
    let n = spec.len();
    let mut samples = Vec::with_capacity(n);
    let mut pose_errors = Vec::with_capacity(n);
    let mut solver_us = vec![0u64; n];

    let jw = weighted_jacobian(model, &cfg).map_err(solve_err)?;
    samples.push(
        metric_sample(
            &jw,
            &spec.twists[0],
            &spec.wrenches[0],
            length,
            &params.weights,
        )
        .map_err(solve_err)?,
    );
    let pose = forward_kinematics(model, &cfg).map_err(solve_err)?;
    pose_errors.push(pose_error(&spec.poses[0], &pose).rows(0, 3).norm());

    for k in 0..n - 1 {
        let ctx = StepContext {
            target: spec.poses[k],
            feedforward: spec.twists[k],
            twist: spec.twists[k],
            wrench: spec.wrenches[k],
        };
        let t0 = Instant::now();
        let out = params
            .solver
            .solve(track_action, model, &cfg, &ctx)
            .map_err(solve_err)?;
        let us = t0.elapsed().as_micros();
        total_us += us;
        calls += 1;
        if params.record_step_timing {
            solver_us[k + 1] = us as u64;
        }
        let (next, applied) = integrate_step(&cfg, &rate, &out.q_dot, dt, &params.limits);
        cfg = next;
        rate = applied;

        let pose = forward_kinematics(model, &cfg).map_err(solve_err)?;
        pose_errors.push(pose_error(&spec.poses[k + 1], &pose).rows(0, 3).norm());
        let jw = weighted_jacobian(model, &cfg).map_err(solve_err)?;
        samples.push(
            metric_sample(
                &jw,
                &spec.twists[k + 1],
                &spec.wrenches[k + 1],
                length,
                &params.weights,
            )
            .map_err(solve_err)?,
        );
    }

    let tracking_violations = pose_errors
        .iter()
        .filter(|e| **e > params.tracking_tolerance)
        .count();
    let max_tracking_error = pose_errors.iter().cloned().fold(0.0, f64::max);

    Ok(RunRecord {
        trajectory: spec.id,
        repetition,
        seed,
        optimized,
        dt,
        random_start_sample,
        reach_steps,
        reach_seconds: reach_steps as f64 * dt,
        local_max_hit,
        samples,
        sectors: spec.sectors.clone(),
        final_pose_error: *pose_errors.last().unwrap(),
        pose_errors,
        solver_us,
        mean_step_us: total_us as f64 / calls as f64,
        solver_calls: calls,
        tracking_violations,
        max_tracking_error,
    })
}

/// Runs one (trajectory, repetition) pair; both arms share the drawn start.
///
/// A draw whose reach times out (in either arm) is discarded and replaced by
/// the next draw from the pair's RNG stream, up to `start_attempts`; any
/// other failure drops the pair.
fn run_pair(
    model: &RobotModel,
    spec: &TrajectorySpec,
    actions: &ActionSet,
    params: &RunParams,
    mode: OptimizeMode,
    repetition: u32,
) -> std::result::Result<Vec<RunRecord>, String> {
    let seed = mix_seed(params.master_seed, spec.id, repetition);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attempts = params.start_attempts.max(1);
    let mut last_timeout = String::new();

    for _ in 0..attempts {
        let start = sample_start(model, &mut rng, &params.start_region)
            .ok_or_else(|| "start sampling exhausted its attempt budget".to_string())?;

        let arms = [
            (mode.runs_raw(), &actions.reach, &actions.track, false),
            (
                mode.runs_optimized(),
                &actions.reach_optimized,
                &actions.track_optimized,
                true,
            ),
        ];
        let mut records = Vec::with_capacity(2);
        let mut timed_out = false;
        for (enabled, reach, track, optimized) in arms {
            if !enabled {
                continue;
            }
            match run_pass(
                model, spec, reach, track, &start, params, optimized, seed, repetition,
            ) {
                Ok(rec) => records.push(rec),
                Err(PassFailure::ReachTimeout { pos_err, rot_err }) => {
                    last_timeout = format!(
                        "position {pos_err:.3e} m, rotation {rot_err:.3e} rad after {} steps",
                        params.reach_budget_steps
                    );
                    timed_out = true;
                    break;
                }
                Err(PassFailure::Fatal(reason)) => return Err(reason),
            }
        }
        if !timed_out {
            return Ok(records);
        }
    }
    Err(format!(
        "reach timeout on all {attempts} start draws (last: {last_timeout})"
    ))
}

/// Runs the full sweep: every repetition of every trajectory, in parallel.
///
/// Results are deterministic for a fixed configuration and master seed: each
/// cell derives its own RNG stream and the output order is independent of
/// scheduling. Timing fields are the only exception and are excluded from
/// run artifacts unless explicitly requested.
pub fn run_comparison(
    model: &RobotModel,
    specs: &[TrajectorySpec],
    actions: &ActionSet,
    params: &RunParams,
    mode: OptimizeMode,
) -> Result<ComparisonOutcome> {
    if specs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if params.repetitions == 0 {
        return Err(Error::InvalidParameter(
            "repetitions must be at least 1".into(),
        ));
    }

    let jobs: Vec<(usize, u32)> = (0..specs.len())
        .flat_map(|s| (0..params.repetitions).map(move |r| (s, r)))
        .collect();

    let results: Vec<std::result::Result<Vec<RunRecord>, String>> = jobs
        .par_iter()
        .map(|&(s, r)| run_pair(model, &specs[s], actions, params, mode, r))
        .collect();

    let mut records = Vec::new();
    let mut failed_pairs = 0;
    let mut failure_notes = Vec::new();
    for (&(s, r), result) in jobs.iter().zip(results) {
        match result {
            Ok(mut recs) => records.append(&mut recs),
            Err(reason) => {
                failed_pairs += 1;
                failure_notes.push(format!(
                    "trajectory {} repetition {r}: {reason}",
                    specs[s].id
                ));
            }
        }
    }

    Ok(ComparisonOutcome {
        records,
        attempted_pairs: jobs.len() as u32,
        failed_pairs,
        failure_notes,
    })
}
