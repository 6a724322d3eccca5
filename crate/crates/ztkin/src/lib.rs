//! Kinematics, dexterity metrics, and task-priority control for serial robots
//! built from zero-torsion two-actuator bend modules.
//!
//! The crate covers the full pipeline behind a machining-style tracking
//! experiment:
//!
//! - [`mechanism`]: the closed-form maps of a single bend module (actuator
//!   angles to tilt/azimuth, bend transforms, both inverse branches, module
//!   Jacobians).
//! - [`chain`]: serial assembly of modules, spacers, and hinges into a robot
//!   model, with forward kinematics and end-effector Jacobians. The
//!   [`chain::RobotModel::rp120`] preset is the 21-DOF reference arm.
//! - [`metrics`]: posture quality as a dexterity index and a robot
//!   transmission ratio for a commanded twist/wrench pair, both with exact
//!   gradients.
//! - [`tpik`]: a task-priority inverse-kinematics solver with smooth task
//!   activation, singularity-robust damping, rate integration under joint
//!   limits, and action hand-over.
//! - [`experiment`]: square machining contours on a work cube, paired
//!   raw-vs-optimized tracking runs from shared random starts, aggregate
//!   statistics, and deterministic CSV/JSON artifacts.
//! - [`config`]: TOML configuration tying all of the above together; the
//!   `ztkin` binary is a thin front end over it.
//!
//! # Quick start
//!
//! ```
//! use ztkin::chain::{forward_kinematics, RobotConfig, RobotModel};
//!
//! let model = RobotModel::rp120();
//! let straight = RobotConfig::straight(&model);
//! let pose = forward_kinematics(&model, &straight)?;
//! assert!((pose.translation.z - 1.9).abs() < 1e-9);
//! # Ok::<(), ztkin::Error>(())
//! ```

pub mod chain;
pub mod config;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod mechanism;
pub mod metrics;
pub mod tpik;

pub use error::{Error, Result};

// Keep every code block in the guide and the README compiling. The guide
// builds with mdbook from book/; these shims make `cargo test --doc` walk the
// same sources.
#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct ReadmeDoctests;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/intro.md")]
pub struct BookIntroDoctests;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/module.md")]
pub struct BookModuleDoctests;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/chain.md")]
pub struct BookChainDoctests;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/metrics.md")]
pub struct BookMetricsDoctests;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/solver.md")]
pub struct BookSolverDoctests;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiment.md")]
pub struct BookExperimentDoctests;
