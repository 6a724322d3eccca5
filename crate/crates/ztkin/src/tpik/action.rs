//! Tasks, prioritized actions, and the closed-loop glue around the level
//! solver: evaluating task rows at a posture, rate integration under
//! velocity and acceleration limits, and smooth hand-over between actions.

use crate::chain::{
    end_effector_jacobian, forward_kinematics, jacobian_partials, weighted_jacobian, RobotConfig,
    RobotModel, DEFAULT_FD_STEP,
};
use crate::error::{Error, Result};
use crate::geometry::{rotation_vector, wrap_angle, RigidTransform, Twist, Wrench};
use crate::metrics::{dexterity, dexterity_gradient, rtr, rtr_gradient};
use crate::tpik::objective::{smoothstep, ControlObjective};
use crate::tpik::solver::{solve_levels, LevelEval, SolverOutput, SolverParams};
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;

/// Per-joint motion limits enforced during integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimits {
    /// Max joint speed, rad/s.
    pub velocity: f64,
    /// Max joint acceleration, rad/s^2.
    pub acceleration: f64,
}

impl Default for JointLimits {
    fn default() -> Self {
        Self {
            velocity: 1.0,
            acceleration: 2.0,
        }
    }
}

/// What quantity a task controls.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskKind {
    /// Six-row tool pose task driven by the context target.
    Pose,
    /// Six-row pose task with the commanded path twist as feedforward.
    Velocity,
    /// One-row dexterity objective on the weighted Jacobian.
    Dexterity,
    /// One-row transmission-ratio objective for the commanded load.
    Rtr,
    /// One-row objective on a single joint coordinate, mainly for limits.
    JointValue { index: usize },
}

/// A named task at a priority level. Lower `priority` is served first.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub name: String,
    pub priority: u32,
    pub kind: TaskKind,
    pub objective: ControlObjective,
    /// Clamp on the task's reference rate; keeps scalar gradient rows from
    /// demanding huge joint rates when their row norm collapses near an
    /// optimum.
    pub rate_cap: f64,
    /// Per-level `(sigma_threshold, damping)` applied when this task's rows
    /// live on a different scale than the solver default; see
    /// [`crate::tpik::solver::LevelEval::damping_override`].
    pub damping_override: Option<(f64, f64)>,
}

impl Task {
    pub fn new(name: &str, priority: u32, kind: TaskKind, objective: ControlObjective) -> Self {
        Self {
            name: name.into(),
            priority,
            kind,
            objective,
            rate_cap: f64::INFINITY,
            damping_override: None,
        }
    }

    pub fn with_rate_cap(mut self, cap: f64) -> Self {
        self.rate_cap = cap;
        self
    }

    pub fn with_damping(mut self, sigma_threshold: f64, damping: f64) -> Self {
        self.damping_override = Some((sigma_threshold, damping));
        self
    }
}

/// An ordered hierarchy of tasks solved together.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub name: String,
    pub tasks: Vec<Task>,
}

impl Action {
    pub fn new(name: &str, tasks: Vec<Task>) -> Self {
        Self {
            name: name.into(),
            tasks,
        }
    }

    pub fn has_metric_tasks(&self) -> bool {
        self.tasks
            .iter()
            .any(|t| matches!(t.kind, TaskKind::Dexterity | TaskKind::Rtr))
    }
}

/// Everything a single control step needs to know about the outside world.
#[derive(Debug, Clone, Copy)]
pub struct StepContext {
    /// Commanded tool pose.
    pub target: RigidTransform,
    /// Commanded tool twist, added as feedforward by velocity tasks.
    pub feedforward: Twist,
    /// Twist the transmission metric is evaluated against.
    pub twist: Twist,
    /// Wrench the transmission metric is evaluated against.
    pub wrench: Wrench,
}

impl StepContext {
    /// Hold a pose; the metric load defaults to the given twist/wrench.
    pub fn hold(target: RigidTransform, twist: Twist, wrench: Wrench) -> Self {
        Self {
            target,
            feedforward: Twist::zero(),
            twist,
            wrench,
        }
    }
}

/// Tool-frame error `[p* - p; rotvec(R* R^T)]` driving pose tasks.
pub fn pose_error(target: &RigidTransform, current: &RigidTransform) -> DVector<f64> {
    let dp = target.translation - current.translation;
    let dw = rotation_vector(&(target.rotation * current.rotation.transpose()));
    DVector::from_column_slice(&[dp.x, dp.y, dp.z, dw.x, dw.y, dw.z])
}

/// Task hierarchy solver bound to a set of numerical parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TpikSolver {
    pub params: SolverParams,
    /// Step for the Jacobian slices behind metric gradients.
    pub fd_step: f64,
}

impl Default for TpikSolver {
    fn default() -> Self {
        Self {
            params: SolverParams::default(),
            fd_step: DEFAULT_FD_STEP,
        }
    }
}

impl TpikSolver {
    pub fn new(params: SolverParams) -> Self {
        Self {
            params,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// Evaluate every task of `action` at the current posture and solve the
    /// resulting hierarchy for joint rates.
    pub fn solve(
        &self,
        action: &Action,
        model: &RobotModel,
        config: &RobotConfig,
        ctx: &StepContext,
    ) -> Result<SolverOutput> {
        if action.tasks.is_empty() {
            return Err(Error::NoTasks);
        }
        let dof = model.dof();
        let pose = forward_kinematics(model, config)?;
        let j_e = end_effector_jacobian(model, config)?;
        // Metric rows share one weighted Jacobian and one set of slices.
        let metric = if action.has_metric_tasks() {
            let jw = weighted_jacobian(model, config)?;
            let partials = jacobian_partials(model, config, self.fd_step)?;
            Some((jw, partials))
        } else {
            None
        };

        type LevelAccum = (
            String,
            Vec<DVector<f64>>,
            Vec<f64>,
            Vec<f64>,
            Option<(f64, f64)>,
        );
        let mut levels: BTreeMap<u32, LevelAccum> = BTreeMap::new();
        for task in &action.tasks {
            let entry = levels
                .entry(task.priority)
                .or_insert_with(|| (String::new(), Vec::new(), Vec::new(), Vec::new(), None));
            if !entry.0.is_empty() {
                entry.0.push('+');
            }
            entry.0.push_str(&task.name);
            if entry.4.is_none() {
                entry.4 = task.damping_override;
            }
            let cap = task.rate_cap;
            match &task.kind {
                TaskKind::Pose | TaskKind::Velocity => {
                    let err = pose_error(&ctx.target, &pose);
                    let ff = if matches!(task.kind, TaskKind::Velocity) {
                        ctx.feedforward.to_vector()
                    } else {
                        Twist::zero().to_vector()
                    };
                    for r in 0..6 {
                        entry.1.push(j_e.row(r).transpose());
                        let rate = task.objective.gain * err[r] + ff[r];
                        entry.2.push(rate.clamp(-cap, cap));
                        entry.3.push(1.0);
                    }
                }
                TaskKind::Dexterity => {
                    let (jw, partials) = metric.as_ref().unwrap();
                    let value = dexterity(jw)?.eta1;
                    let row = dexterity_gradient(jw, partials)?;
                    entry.1.push(row);
                    entry
                        .2
                        .push(task.objective.reference_rate(value).clamp(-cap, cap));
                    entry.3.push(task.objective.activation(value));
                }
                TaskKind::Rtr => {
                    let (jw, partials) = metric.as_ref().unwrap();
                    let l = model.characteristic_length;
                    let value = rtr(jw, &ctx.twist, &ctx.wrench, l)?;
                    let row = rtr_gradient(jw, partials, &ctx.twist, &ctx.wrench, l)?;
                    entry.1.push(row);
                    entry
                        .2
                        .push(task.objective.reference_rate(value).clamp(-cap, cap));
                    entry.3.push(task.objective.activation(value));
                }
                TaskKind::JointValue { index } => {
                    if *index >= dof {
                        return Err(Error::DimensionMismatch {
                            expected: dof,
                            got: *index + 1,
                        });
                    }
                    let value = config.q[*index];
                    let mut row = DVector::zeros(dof);
                    row[*index] = 1.0;
                    entry.1.push(row);
                    entry
                        .2
                        .push(task.objective.reference_rate(value).clamp(-cap, cap));
                    entry.3.push(task.objective.activation(value));
                }
            }
        }

        let evals: Vec<LevelEval> = levels
            .into_values()
            .map(|(label, rows, rates, acts, damping_override)| {
                let jac = DMatrix::from_fn(rows.len(), dof, |r, c| rows[r][c]);
                LevelEval {
                    label,
                    jacobian: jac,
                    rates: DVector::from_vec(rates),
                    activations: DVector::from_vec(acts),
                    damping_override,
                }
            })
            .collect();
        solve_levels(&evals, dof, &self.params)
    }

    /// Blend two actions over a hand-over window: pure `prev` at
    /// `elapsed <= 0`, pure `next` at `elapsed >= horizon`, smooth between.
    pub fn transition(
        &self,
        prev: &Action,
        next: &Action,
        elapsed: f64,
        horizon: f64,
        model: &RobotModel,
        config: &RobotConfig,
        ctx: &StepContext,
    ) -> Result<SolverOutput> {
        let s = if horizon <= 0.0 {
            1.0
        } else {
            smoothstep(elapsed / horizon)
        };
        if s <= 0.0 {
            return self.solve(prev, model, config, ctx);
        }
        if s >= 1.0 {
            return self.solve(next, model, config, ctx);
        }
        let a = self.solve(prev, model, config, ctx)?;
        let b = self.solve(next, model, config, ctx)?;
        Ok(SolverOutput {
            q_dot: &a.q_dot * (1.0 - s) + &b.q_dot * s,
            level_residuals: b.level_residuals,
            projectors: b.projectors,
            level_jacobians: b.level_jacobians,
        })
    }
}

/// Advance a configuration by one control period.
///
/// The commanded rate is clamped to the velocity limit, then slew-limited
/// against the previously applied rate so acceleration stays within bounds,
/// then integrated with the angles wrapped back to `(-pi, pi]`. Returns the
/// new configuration and the rate actually applied.
pub fn integrate_step(
    config: &RobotConfig,
    prev_rate: &DVector<f64>,
    commanded: &DVector<f64>,
    dt: f64,
    limits: &JointLimits,
) -> (RobotConfig, DVector<f64>) {
    let n = config.q.len();
    let mut applied = DVector::zeros(n);
    let max_delta = limits.acceleration * dt;
    for i in 0..n {
        let v = commanded[i].clamp(-limits.velocity, limits.velocity);
        let prev = if i < prev_rate.len() {
            prev_rate[i]
        } else {
            0.0
        };
        applied[i] = prev + (v - prev).clamp(-max_delta, max_delta);
    }
    let mut q = config.q.clone();
    for i in 0..n {
        q[i] = wrap_angle(q[i] + applied[i] * dt);
    }
    (RobotConfig::new(q), applied)
}
