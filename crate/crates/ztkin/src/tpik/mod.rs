//! Task-priority inverse kinematics: objectives, the level solver, and the
//! action layer that ties them to a robot model.

pub mod action;
pub mod objective;
pub mod solver;

pub use action::{
    integrate_step, pose_error, Action, JointLimits, StepContext, Task, TaskKind, TpikSolver,
};
pub use objective::{smoothstep, ControlObjective, ObjectiveKind};
pub use solver::{solve_levels, LevelEval, SolverOutput, SolverParams};
