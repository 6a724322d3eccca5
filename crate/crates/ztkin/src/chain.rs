//! Serial chains assembled from bend modules, rigid links, and plain
//! revolute joints.
//!
//! A chain is an ordered list of [`Segment`]s followed by a fixed tool
//! transform. Modules contribute two generalized coordinates each, revolute
//! joints one, links none; the coordinate vector concatenates them in
//! segment order. All Jacobians are expressed at the tool point in world
//! coordinates, rows stacked linear-first.

use crate::error::{Error, Result};
use crate::geometry::RigidTransform;
use crate::mechanism::{
    actuator_to_tilt_azimuth, bend_transform, module_jacobians, ActuatorAngles, ModuleParams,
};
use nalgebra::{DMatrix, DVector, Vector3};

/// One element of a serial chain.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    /// Two-actuator zero-torsion bend module.
    Module(ModuleParams),
    /// Rigid spacer translating along the local z axis, metres.
    FixedLink(f64),
    /// One-axis hinge about a fixed unit axis in the local frame.
    Revolute(Vector3<f64>),
}

impl Segment {
    pub fn module(params: ModuleParams) -> Self {
        Segment::Module(params)
    }

    pub fn link(length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "link length must be positive, got {length}"
            )));
        }
        Ok(Segment::FixedLink(length))
    }

    pub fn revolute(axis: Vector3<f64>) -> Result<Self> {
        let n = axis.norm();
        if !(n.is_finite() && n > 1e-12) {
            return Err(Error::InvalidParameter(
                "revolute axis must be a nonzero vector".into(),
            ));
        }
        Ok(Segment::Revolute(axis / n))
    }

    /// Generalized coordinates this segment consumes.
    pub fn dof(&self) -> usize {
        match self {
            Segment::Module(_) => 2,
            Segment::FixedLink(_) => 0,
            Segment::Revolute(_) => 1,
        }
    }
}

/// A serial robot: segments, a tool transform from the last segment frame
/// to the tool point, and the characteristic length that trades metres
/// against radians when linear and angular rows share one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub segments: Vec<Segment>,
    pub tool: RigidTransform,
    pub characteristic_length: f64,
}

impl RobotModel {
    pub fn new(
        segments: Vec<Segment>,
        tool: RigidTransform,
        characteristic_length: f64,
    ) -> Result<Self> {
        if !(characteristic_length.is_finite() && characteristic_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "characteristic length must be positive, got {characteristic_length}"
            )));
        }
        Ok(Self {
            segments,
            tool,
            characteristic_length,
        })
    }

    /// Total number of generalized coordinates.
    pub fn dof(&self) -> usize {
        self.segments.iter().map(Segment::dof).sum()
    }

    /// The 21-DOF machining arm this crate is built around: stacks of
    /// three, four, and three bend modules separated by 0.2 m spacers,
    /// a final tool-spin hinge, and a 0.1 m tool held at 45 degrees.
    /// Fully straight it stands 1.9 m tall.
    pub fn rp120() -> Self {
        let m = ModuleParams::default();
        let mut segments = Vec::new();
        for _ in 0..3 {
            segments.push(Segment::Module(m));
        }
        segments.push(Segment::FixedLink(0.2));
        for _ in 0..4 {
            segments.push(Segment::Module(m));
        }
        segments.push(Segment::FixedLink(0.2));
        for _ in 0..3 {
            segments.push(Segment::Module(m));
        }
        segments.push(Segment::Revolute(Vector3::z()));
        let tool = RigidTransform::from_parts(
            RigidTransform::rot_y(45.0_f64.to_radians()),
            Vector3::new(0.0, 0.0, 0.1),
        );
        Self {
            segments,
            tool,
            characteristic_length: 0.25,
        }
    }

    /// A single bend module with no tool offset.
    pub fn single_module() -> Self {
        Self {
            segments: vec![Segment::Module(ModuleParams::default())],
            tool: RigidTransform::identity(),
            characteristic_length: 0.25,
        }
    }

    /// Planar n-R test arm in the x-z plane: hinges about y, links along z.
    pub fn planar_arm(joints: usize, link_length: f64) -> Self {
        let mut segments = Vec::new();
        for _ in 0..joints {
            segments.push(Segment::Revolute(Vector3::y()));
            segments.push(Segment::FixedLink(link_length));
        }
        Self {
            segments,
            tool: RigidTransform::identity(),
            characteristic_length: link_length.max(1e-3),
        }
    }
}

/// Generalized coordinate vector for a model.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotConfig {
    pub q: DVector<f64>,
}

impl RobotConfig {
    pub fn new(q: DVector<f64>) -> Self {
        Self { q }
    }

    pub fn from_slice(q: &[f64]) -> Self {
        Self {
            q: DVector::from_column_slice(q),
        }
    }

    /// Every module straight (both wedges at pi/2), every hinge at zero.
    pub fn straight(model: &RobotModel) -> Self {
        let mut q = Vec::with_capacity(model.dof());
        for s in &model.segments {
            match s {
                Segment::Module(_) => {
                    q.push(std::f64::consts::FRAC_PI_2);
                    q.push(std::f64::consts::FRAC_PI_2);
                }
                Segment::Revolute(_) => q.push(0.0),
                Segment::FixedLink(_) => {}
            }
        }
        Self::from_slice(&q)
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.len() == 0
    }
}

fn check_dim(model: &RobotModel, config: &RobotConfig) -> Result<()> {
    if config.q.len() != model.dof() {
        return Err(Error::DimensionMismatch {
            expected: model.dof(),
            got: config.q.len(),
        });
    }
    Ok(())
}

/// Pose of each segment's base frame in world coordinates, plus the final
/// tool-mount frame (before the tool transform) as the last entry.
fn base_frames(model: &RobotModel, config: &RobotConfig) -> Result<Vec<RigidTransform>> {
    check_dim(model, config)?;
    let mut frames = Vec::with_capacity(model.segments.len() + 1);
    let mut t = RigidTransform::identity();
    let mut k = 0usize;
    for s in &model.segments {
        frames.push(t);
        match s {
            Segment::Module(p) => {
                let q = ActuatorAngles::new(config.q[k], config.q[k + 1]);
                t = t.compose(&bend_transform(&actuator_to_tilt_azimuth(&q, p), p));
                k += 2;
            }
            Segment::FixedLink(len) => {
                t = t.compose(&RigidTransform::from_translation(Vector3::new(
                    0.0, 0.0, *len,
                )));
            }
            Segment::Revolute(axis) => {
                t = t.compose(&RigidTransform::from_parts(
                    RigidTransform::axis_angle(axis, config.q[k]),
                    Vector3::zeros(),
                ));
                k += 1;
            }
        }
    }
    frames.push(t);
    Ok(frames)
}

/// World pose of the tool point.
pub fn forward_kinematics(model: &RobotModel, config: &RobotConfig) -> Result<RigidTransform> {
    let frames = base_frames(model, config)?;
    Ok(frames.last().unwrap().compose(&model.tool))
}

/// Geometric Jacobian at the tool point, world coordinates, 6 x dof,
/// linear rows first.
pub fn end_effector_jacobian(model: &RobotModel, config: &RobotConfig) -> Result<DMatrix<f64>> {
    let frames = base_frames(model, config)?;
    let tool_pos = frames.last().unwrap().compose(&model.tool).translation;
    let n = model.dof();
    let mut j = DMatrix::zeros(6, n);
    let mut k = 0usize;
    for (idx, s) in model.segments.iter().enumerate() {
        let base = &frames[idx];
        match s {
            Segment::Module(p) => {
                let q = ActuatorAngles::new(config.q[k], config.q[k + 1]);
                let local = module_jacobians(&q, p).actuator;
                let tip = frames[idx + 1].translation;
                for col in 0..2 {
                    let v_loc = Vector3::new(local[(0, col)], local[(1, col)], local[(2, col)]);
                    let w_loc = Vector3::new(local[(3, col)], local[(4, col)], local[(5, col)]);
                    let w = base.rotation * w_loc;
                    // Rigid transport of the module-tip velocity out to the
                    // tool point.
                    let v = base.rotation * v_loc + w.cross(&(tool_pos - tip));
                    for r in 0..3 {
                        j[(r, k + col)] = v[r];
                        j[(r + 3, k + col)] = w[r];
                    }
                }
                k += 2;
            }
            Segment::FixedLink(_) => {}
            Segment::Revolute(axis) => {
                let a = base.rotation * axis;
                let v = a.cross(&(tool_pos - base.translation));
                for r in 0..3 {
                    j[(r, k)] = v[r];
                    j[(r + 3, k)] = a[r];
                }
                k += 1;
            }
        }
    }
    Ok(j)
}

/// Jacobian with linear rows divided by the characteristic length, making
/// all six rows dimensionally comparable.
pub fn weighted_jacobian(model: &RobotModel, config: &RobotConfig) -> Result<DMatrix<f64>> {
    let mut j = end_effector_jacobian(model, config)?;
    let inv_l = 1.0 / model.characteristic_length;
    for r in 0..3 {
        for c in 0..j.ncols() {
            j[(r, c)] *= inv_l;
        }
    }
    Ok(j)
}

/// Default step for the coordinate-wise derivative of the weighted Jacobian.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Central-difference slices `d(Jw)/d(q_i)` of the weighted Jacobian, one
/// 6 x dof matrix per coordinate.
pub fn jacobian_partials(
    model: &RobotModel,
    config: &RobotConfig,
    step: f64,
) -> Result<Vec<DMatrix<f64>>> {
    check_dim(model, config)?;
    let n = model.dof();
    let mut out = Vec::with_capacity(n);
    let mut work = config.clone();
    for i in 0..n {
        let q0 = work.q[i];
        work.q[i] = q0 + step;
        let jp = weighted_jacobian(model, &work)?;
        work.q[i] = q0 - step;
        let jm = weighted_jacobian(model, &work)?;
        work.q[i] = q0;
        out.push((jp - jm) / (2.0 * step));
    }
    Ok(out)
}
