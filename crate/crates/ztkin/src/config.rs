//! TOML-backed configuration for the robot, solver, and experiment.
//!
//! Every section is optional; an empty document builds the 21-DOF reference
//! arm with the desk-scale comparison settings. The task hierarchy can be
//! overridden by declaring named `[tasks.*]` entries and wiring them into the
//! four action roles under `[actions]`; otherwise the standard hierarchy is
//! assembled from `[gains]`.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Vector3;
use serde::Deserialize;

use crate::chain::{RobotModel, Segment};
use crate::error::{Error, Result};
use crate::experiment::{ActionGains, ActionSet, Face, RunParams, StartRegion, TrajectoryParams};
use crate::geometry::RigidTransform;
use crate::mechanism::ModuleParams;
use crate::metrics::MetricWeights;
use crate::tpik::{
    Action, ControlObjective, JointLimits, ObjectiveKind, SolverParams, Task, TaskKind, TpikSolver,
};

/// Robot description: a named preset or an inline segment list.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotDecl {
    /// Currently `"rp120"`; mutually exclusive with `segments`.
    pub preset: Option<String>,
    pub segments: Vec<SegmentDecl>,
    pub tool: Option<ToolDecl>,
    pub characteristic_length: Option<f64>,
}

/// One serial segment, tagged by `type`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SegmentDecl {
    /// Zero-torsion bend module.
    Module {
        radius: Option<f64>,
        alpha_deg: Option<f64>,
    },
    /// Rigid spacer along local z, metres.
    Link { length: f64 },
    /// Hinge about a fixed local axis.
    Revolute { axis: [f64; 3] },
}

/// Tool transform: a cant about local y plus a fixed offset.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolDecl {
    pub cant_y_deg: f64,
    pub offset: [f64; 3],
}

impl ToolDecl {
    fn to_transform(&self) -> RigidTransform {
        RigidTransform::from_parts(
            RigidTransform::rot_y(self.cant_y_deg.to_radians()),
            Vector3::from(self.offset),
        )
    }
}

/// Numerical solver settings.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverDecl {
    pub sigma_threshold: f64,
    pub damping: f64,
    /// Per-joint rate clamp inside the solver; unset means unclamped (the
    /// integrator's velocity limit still applies).
    pub velocity_limit: Option<f64>,
    pub fd_step: f64,
}

impl Default for SolverDecl {
    fn default() -> Self {
        let p = SolverParams::default();
        Self {
            sigma_threshold: p.sigma_threshold,
            damping: p.damping,
            velocity_limit: None,
            fd_step: crate::chain::DEFAULT_FD_STEP,
        }
    }
}

/// Joint motion limits.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsDecl {
    pub velocity: f64,
    pub acceleration: f64,
}

impl Default for LimitsDecl {
    fn default() -> Self {
        let l = JointLimits::default();
        Self {
            velocity: l.velocity,
            acceleration: l.acceleration,
        }
    }
}

/// Blend weights for the combined metric.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsDecl {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for WeightsDecl {
    fn default() -> Self {
        let w = MetricWeights::default();
        Self {
            lambda1: w.lambda1,
            lambda2: w.lambda2,
        }
    }
}

/// Contour geometry and load; angles in degrees for readability.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryDecl {
    pub cube_center: [f64; 3],
    pub cube_side: f64,
    pub steps: usize,
    pub dt: f64,
    pub tangential_force: f64,
    pub radial_force: f64,
    pub radial_inward: bool,
    pub attitude_deg: f64,
    pub faces: [Face; 4],
}

impl Default for TrajectoryDecl {
    fn default() -> Self {
        let t = TrajectoryParams::desk();
        Self {
            cube_center: t.cube_center,
            cube_side: t.cube_side,
            steps: t.steps,
            dt: t.dt,
            tangential_force: t.tangential_force,
            radial_force: t.radial_force,
            radial_inward: t.radial_inward,
            attitude_deg: t.attitude.to_degrees(),
            faces: t.faces,
        }
    }
}

/// Repetition counts, tolerances, and budgets for the comparison runs.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunDecl {
    pub repetitions: u32,
    pub master_seed: u64,
    pub reach_position_tol: f64,
    pub reach_rotation_tol: f64,
    pub reach_budget_steps: usize,
    pub start_attempts: u32,
    pub optimize_budget_steps: usize,
    pub gradient_norm_tol: f64,
    pub gradient_quiet_steps: usize,
    pub tracking_tolerance: f64,
    pub record_step_timing: bool,
    pub start_region: StartRegion,
}

impl Default for RunDecl {
    fn default() -> Self {
        let r = RunParams::default();
        Self {
            repetitions: r.repetitions,
            master_seed: r.master_seed,
            reach_position_tol: r.reach_position_tol,
            reach_rotation_tol: r.reach_rotation_tol,
            reach_budget_steps: r.reach_budget_steps,
            start_attempts: r.start_attempts,
            optimize_budget_steps: r.optimize_budget_steps,
            gradient_norm_tol: r.gradient_norm_tol,
            gradient_quiet_steps: r.gradient_quiet_steps,
            tracking_tolerance: r.tracking_tolerance,
            record_step_timing: r.record_step_timing,
            start_region: r.start_region,
        }
    }
}

/// Objective behind a declared task, tagged by `type`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveDecl {
    Equality { target: f64 },
    LowerBound { min: f64 },
    UpperBound { max: f64 },
    Range { min: f64, max: f64 },
}

/// Controlled quantity of a declared task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindDecl {
    Pose,
    Velocity,
    Dexterity,
    Rtr,
    JointValue,
}

/// One named task in the `[tasks.*]` table.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDecl {
    pub kind: KindDecl,
    pub priority: u32,
    pub objective: ObjectiveDecl,
    pub gain: f64,
    #[serde(default)]
    pub joint_index: Option<usize>,
    #[serde(default)]
    pub feedforward: f64,
    #[serde(default)]
    pub buffer: f64,
    #[serde(default)]
    pub rate_cap: Option<f64>,
    #[serde(default)]
    pub damping_override: Option<[f64; 2]>,
}

impl TaskDecl {
    fn to_task(&self, name: &str) -> Result<Task> {
        let kind = match (self.kind, self.joint_index) {
            (KindDecl::Pose, None) => TaskKind::Pose,
            (KindDecl::Velocity, None) => TaskKind::Velocity,
            (KindDecl::Dexterity, None) => TaskKind::Dexterity,
            (KindDecl::Rtr, None) => TaskKind::Rtr,
            (KindDecl::JointValue, Some(index)) => TaskKind::JointValue { index },
            (KindDecl::JointValue, None) => {
                return Err(Error::InvalidParameter(format!(
                    "task '{name}': joint_value tasks need joint_index"
                )));
            }
            (_, Some(_)) => {
                return Err(Error::InvalidParameter(format!(
                    "task '{name}': joint_index only applies to joint_value tasks"
                )));
            }
        };
        let objective_kind = match self.objective {
            ObjectiveDecl::Equality { target } => ObjectiveKind::Equality { target },
            ObjectiveDecl::LowerBound { min } => ObjectiveKind::LowerBound { min },
            ObjectiveDecl::UpperBound { max } => ObjectiveKind::UpperBound { max },
            ObjectiveDecl::Range { min, max } => ObjectiveKind::Range { min, max },
        };
        let objective =
            ControlObjective::new(objective_kind, self.gain, self.feedforward, self.buffer)
                .map_err(|e| Error::InvalidParameter(format!("task '{name}': {e}")))?;
        let mut task = Task::new(name, self.priority, kind, objective);
        if let Some(cap) = self.rate_cap {
            task = task.with_rate_cap(cap);
        }
        if let Some([sigma, damping]) = self.damping_override {
            task = task.with_damping(sigma, damping);
        }
        Ok(task)
    }
}

/// Task names assigned to the four action roles.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RolesDecl {
    pub reach: Vec<String>,
    pub track: Vec<String>,
    pub reach_optimized: Vec<String>,
    pub track_optimized: Vec<String>,
}

/// Root of the configuration file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub robot: RobotDecl,
    pub solver: SolverDecl,
    pub limits: LimitsDecl,
    pub weights: WeightsDecl,
    pub trajectory: TrajectoryDecl,
    pub run: RunDecl,
    /// Gains for the standard hierarchy, used when `[actions]` is absent.
    pub gains: ActionGains,
    pub tasks: BTreeMap<String, TaskDecl>,
    pub actions: Option<RolesDecl>,
}

/// Everything `run`-style commands need, built from one config.
#[derive(Debug, Clone)]
pub struct ExperimentSetup {
    pub model: RobotModel,
    pub trajectory: TrajectoryParams,
    pub run: RunParams,
    pub actions: ActionSet,
}

impl ExperimentConfig {
    /// Parses a TOML document; parse errors keep the toml crate's line/column
    /// rendering.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    /// Reads and parses a config file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Builds the robot model.
    pub fn robot(&self) -> Result<RobotModel> {
        let decl = &self.robot;
        if decl.preset.is_some() && !decl.segments.is_empty() {
            return Err(Error::InvalidParameter(
                "robot: choose either preset or segments, not both".into(),
            ));
        }
        let mut model = if !decl.segments.is_empty() {
            let mut segments = Vec::with_capacity(decl.segments.len());
            for (i, s) in decl.segments.iter().enumerate() {
                let seg = match s {
                    SegmentDecl::Module { radius, alpha_deg } => {
                        let d = ModuleParams::default();
                        Segment::module(ModuleParams::new(
                            radius.unwrap_or(d.radius),
                            alpha_deg.map_or(d.alpha, f64::to_radians),
                        )?)
                    }
                    SegmentDecl::Link { length } => Segment::link(*length)?,
                    SegmentDecl::Revolute { axis } => Segment::revolute(Vector3::from(*axis))?,
                };
                let _ = i;
                segments.push(seg);
            }
            RobotModel::new(
                segments,
                RigidTransform::identity(),
                decl.characteristic_length.unwrap_or(0.25),
            )?
        } else {
            match decl.preset.as_deref() {
                None | Some("rp120") => RobotModel::rp120(),
                Some(other) => {
                    return Err(Error::InvalidParameter(format!(
                        "robot: unknown preset '{other}' (available: rp120)"
                    )));
                }
            }
        };
        if let Some(tool) = &decl.tool {
            model.tool = tool.to_transform();
        }
        if let Some(length) = decl.characteristic_length {
            model = RobotModel::new(model.segments, model.tool, length)?;
        }
        if model.dof() == 0 {
            return Err(Error::InvalidParameter(
                "robot: the segment list has no degrees of freedom".into(),
            ));
        }
        Ok(model)
    }

    /// Builds the contour parameters.
    pub fn trajectory_params(&self) -> Result<TrajectoryParams> {
        let t = &self.trajectory;
        let params = TrajectoryParams {
            cube_center: t.cube_center,
            cube_side: t.cube_side,
            steps: t.steps,
            dt: t.dt,
            tangential_force: t.tangential_force,
            radial_force: t.radial_force,
            radial_inward: t.radial_inward,
            attitude: t.attitude_deg.to_radians(),
            faces: t.faces,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds the run parameters (solver, limits, weights, budgets).
    pub fn run_params(&self) -> Result<RunParams> {
        let s = &self.solver;
        for (name, v) in [
            ("solver.sigma_threshold", s.sigma_threshold),
            ("solver.fd_step", s.fd_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(s.damping >= 0.0 && s.damping.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "solver.damping must be non-negative and finite, got {}",
                s.damping
            )));
        }
        let l = &self.limits;
        for (name, v) in [
            ("limits.velocity", l.velocity),
            ("limits.acceleration", l.acceleration),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let r = &self.run;
        for (name, v) in [
            ("run.reach_position_tol", r.reach_position_tol),
            ("run.reach_rotation_tol", r.reach_rotation_tol),
            ("run.gradient_norm_tol", r.gradient_norm_tol),
            ("run.tracking_tolerance", r.tracking_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if r.reach_budget_steps == 0 {
            return Err(Error::InvalidParameter(
                "run.reach_budget_steps must be at least 1".into(),
            ));
        }
        if r.start_attempts == 0 {
            return Err(Error::InvalidParameter(
                "run.start_attempts must be at least 1".into(),
            ));
        }

        let solver = TpikSolver {
            params: SolverParams {
                sigma_threshold: s.sigma_threshold,
                damping: s.damping,
                velocity_limit: s.velocity_limit.unwrap_or(f64::INFINITY),
            },
            fd_step: s.fd_step,
        };
        Ok(RunParams {
            repetitions: r.repetitions,
            master_seed: r.master_seed,
            solver,
            limits: JointLimits {
                velocity: l.velocity,
                acceleration: l.acceleration,
            },
            weights: MetricWeights::new(self.weights.lambda1, self.weights.lambda2)?,
            reach_position_tol: r.reach_position_tol,
            reach_rotation_tol: r.reach_rotation_tol,
            reach_budget_steps: r.reach_budget_steps,
            start_attempts: r.start_attempts,
            optimize_budget_steps: r.optimize_budget_steps,
            gradient_norm_tol: r.gradient_norm_tol,
            gradient_quiet_steps: r.gradient_quiet_steps,
            tracking_tolerance: r.tracking_tolerance,
            record_step_timing: r.record_step_timing,
            start_region: r.start_region,
        })
    }

    /// Builds the four actions, from `[actions]`+`[tasks.*]` when declared
    /// and from the standard hierarchy otherwise.
    pub fn action_set(&self) -> Result<ActionSet> {
        let Some(roles) = &self.actions else {
            if !self.tasks.is_empty() {
                return Err(Error::InvalidParameter(
                    "[tasks.*] are declared but [actions] does not wire them to roles".into(),
                ));
            }
            return Ok(ActionSet::standard(&self.gains));
        };
        let build = |role: &str, names: &[String]| -> Result<Action> {
            if names.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "actions.{role} must list at least one task"
                )));
            }
            let mut tasks = Vec::with_capacity(names.len());
            for name in names {
                let decl = self.tasks.get(name).ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "actions.{role}: unknown task '{name}' (declare it under [tasks.{name}])"
                    ))
                })?;
                tasks.push(decl.to_task(name)?);
            }
            Ok(Action::new(role, tasks))
        };
        Ok(ActionSet {
            reach: build("reach", &roles.reach)?,
            track: build("track", &roles.track)?,
            reach_optimized: build("reach_optimized", &roles.reach_optimized)?,
            track_optimized: build("track_optimized", &roles.track_optimized)?,
        })
    }

    /// Builds everything a run needs.
    pub fn build(&self) -> Result<ExperimentSetup> {
        Ok(ExperimentSetup {
            model: self.robot()?,
            trajectory: self.trajectory_params()?,
            run: self.run_params()?,
            actions: self.action_set()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn empty_config_builds_the_reference_setup() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        let setup = cfg.build().unwrap();
        assert_eq!(setup.model.dof(), 21);
        assert_eq!(setup.trajectory.steps, 201);
        assert_abs_diff_eq!(setup.trajectory.dt, 0.1);
        assert_eq!(setup.run.repetitions, 20);
        assert_eq!(setup.run.master_seed, 42);
        assert!(!setup.run.record_step_timing);
        assert_eq!(setup.actions.reach.tasks.len(), 1);
        assert!(setup.actions.track_optimized.has_metric_tasks());
    }

    #[test]
    fn overrides_flow_through() {
        let text = r#"
            [trajectory]
            steps = 2001
            dt = 0.5
            cube_center = [0.0, 1.0, 0.5]

            [run]
            repetitions = 3
            master_seed = 7
            record_step_timing = true

            [gains]
            metric_rate_cap = 0.02
            metric_damping = [0.2, 0.1]

            [weights]
            lambda1 = 0.25
            lambda2 = 0.75
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        let setup = cfg.build().unwrap();
        assert_eq!(setup.trajectory.steps, 2001);
        assert_abs_diff_eq!(setup.trajectory.speed(), 0.002, epsilon = 1e-12);
        assert_eq!(setup.run.repetitions, 3);
        assert_eq!(setup.run.master_seed, 7);
        assert!(setup.run.record_step_timing);
        assert_abs_diff_eq!(setup.run.weights.lambda2, 0.75);
        let metric = &setup.actions.track_optimized.tasks[1];
        assert_abs_diff_eq!(metric.rate_cap, 0.02);
        assert_eq!(metric.damping_override, Some((0.2, 0.1)));
    }

    #[test]
    fn unknown_keys_are_rejected_with_context() {
        let err = ExperimentConfig::from_toml_str("[run]\nreps = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("reps"), "message was: {msg}");
        assert!(msg.contains("line 2"), "message was: {msg}");
    }

    #[test]
    fn syntax_errors_carry_line_information() {
        let err = ExperimentConfig::from_toml_str("[run\nrepetitions = 1").unwrap_err();
        assert!(err.to_string().contains("line 1"), "got: {err}");
    }

    #[test]
    fn preset_and_segments_conflict() {
        let text = r#"
            [robot]
            preset = "rp120"
            [[robot.segments]]
            type = "link"
            length = 0.2
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert!(cfg.robot().is_err());
    }

    #[test]
    fn unknown_preset_is_named_in_the_error() {
        let cfg = ExperimentConfig::from_toml_str("[robot]\npreset = \"rp500\"\n").unwrap();
        let msg = cfg.robot().unwrap_err().to_string();
        assert!(msg.contains("rp500") && msg.contains("rp120"), "got: {msg}");
    }

    #[test]
    fn inline_robots_assemble_segment_by_segment() {
        let text = r#"
            [robot]
            characteristic_length = 0.3
            tool = { cant_y_deg = 90.0, offset = [0.0, 0.0, 0.05] }

            [[robot.segments]]
            type = "module"

            [[robot.segments]]
            type = "module"
            radius = 0.1
            alpha_deg = 10.0

            [[robot.segments]]
            type = "link"
            length = 0.2

            [[robot.segments]]
            type = "revolute"
            axis = [0.0, 0.0, 2.0]
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        let model = cfg.robot().unwrap();
        assert_eq!(model.dof(), 5);
        assert_abs_diff_eq!(model.characteristic_length, 0.3);
        // Axis comes out normalized.
        match &model.segments[3] {
            Segment::Revolute(axis) => assert_abs_diff_eq!(axis.norm(), 1.0, epsilon = 1e-12),
            other => panic!("expected revolute, got {other:?}"),
        }
        assert_abs_diff_eq!(model.tool.translation.z, 0.05);
    }

    #[test]
    fn declared_tasks_wire_into_action_roles() {
        let text = r#"
            [tasks.pose]
            kind = "pose"
            priority = 1
            gain = 1.0
            objective = { type = "equality", target = 0.0 }

            [tasks.follow]
            kind = "velocity"
            priority = 1
            gain = 1.5
            objective = { type = "equality", target = 0.0 }

            [tasks.dex]
            kind = "dexterity"
            priority = 2
            gain = 1.0
            objective = { type = "lower_bound", min = 1.0 }
            buffer = 1.0
            rate_cap = 0.05
            damping_override = [0.1, 0.05]

            [tasks.elbow]
            kind = "joint_value"
            joint_index = 6
            priority = 3
            gain = 0.5
            objective = { type = "range", min = -1.0, max = 1.0 }
            buffer = 0.1

            [actions]
            reach = ["pose"]
            track = ["follow"]
            reach_optimized = ["pose", "dex", "elbow"]
            track_optimized = ["follow", "dex"]
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        let actions = cfg.action_set().unwrap();
        assert_eq!(actions.reach_optimized.tasks.len(), 3);
        assert_eq!(
            actions.reach_optimized.tasks[2].kind,
            TaskKind::JointValue { index: 6 }
        );
        assert_eq!(
            actions.reach_optimized.tasks[1].damping_override,
            Some((0.1, 0.05))
        );
        assert!(actions.track_optimized.has_metric_tasks());
    }

    #[test]
    fn role_validation_catches_wiring_mistakes() {
        // Unknown task name.
        let text = r#"
            [actions]
            reach = ["pose"]
            track = ["pose"]
            reach_optimized = ["pose"]
            track_optimized = ["pose"]
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        let msg = cfg.action_set().unwrap_err().to_string();
        assert!(msg.contains("unknown task 'pose'"), "got: {msg}");

        // Tasks declared but never wired.
        let text = r#"
            [tasks.pose]
            kind = "pose"
            priority = 1
            gain = 1.0
            objective = { type = "equality", target = 0.0 }
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert!(cfg.action_set().is_err());

        // joint_value without an index.
        let text = r#"
            [tasks.j]
            kind = "joint_value"
            priority = 1
            gain = 1.0
            objective = { type = "equality", target = 0.0 }

            [actions]
            reach = ["j"]
            track = ["j"]
            reach_optimized = ["j"]
            track_optimized = ["j"]
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        let msg = cfg.action_set().unwrap_err().to_string();
        assert!(msg.contains("joint_index"), "got: {msg}");
    }

    #[test]
    fn bad_numbers_are_rejected_by_the_builders() {
        let cfg =
            ExperimentConfig::from_toml_str("[weights]\nlambda1 = 0.8\nlambda2 = 0.8\n").unwrap();
        assert!(cfg.run_params().is_err());

        let cfg = ExperimentConfig::from_toml_str("[limits]\nvelocity = 0.0\n").unwrap();
        assert!(cfg.run_params().is_err());

        let cfg = ExperimentConfig::from_toml_str("[trajectory]\nsteps = 3\n").unwrap();
        assert!(cfg.trajectory_params().is_err());
    }

    #[test]
    fn faces_can_be_remapped() {
        let text = "[trajectory]\nfaces = [\"far\", \"near\", \"top\", \"bottom\"]\n";
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        let params = cfg.trajectory_params().unwrap();
        let spec = crate::experiment::build_trajectory(1, &params).unwrap();
        // Trajectory 1 now runs on the far face: constant y = 1.3.
        for pose in &spec.poses {
            assert_abs_diff_eq!(pose.translation.y, 1.3, epsilon = 1e-12);
        }
    }
}
