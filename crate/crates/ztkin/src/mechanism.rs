//! Geometry of a single two-actuator zero-torsion module.
//!
//! The module is a pair of coaxial bevelled wedges. Spinning the two wedge
//! angles `q1`, `q2` together changes the azimuth of the bend; spinning them
//! against each other changes the tilt. The output frame rotates about an
//! axis that always lies in the base x-y plane, so the mechanism transmits
//! no torsion: the moving plate never spins about its own normal.
//!
//! Conventions used throughout:
//! * `tilt` (theta) is the bend angle, limited to `|tilt| <= 2 * alpha`;
//! * `azimuth` (phi) orients the bend axis `[-sin(phi), cos(phi), 0]`;
//! * the output frame sits on a sphere of radius `r` centred at `(0, 0, r)`.

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, RigidTransform};
use nalgebra::{Matrix2, Matrix3, SMatrix, Vector3};

pub type Matrix6x2 = SMatrix<f64, 6, 2>;

/// Free constants of one module: sphere radius and wedge bevel angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuleParams {
    /// Radius of the spherical workspace shell, metres.
    pub radius: f64,
    /// Bevel angle of each wedge, radians. The tilt limit is twice this.
    pub alpha: f64,
}

impl ModuleParams {
    pub fn new(radius: f64, alpha: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {radius}"
            )));
        }
        if !(alpha.is_finite() && alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_4) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, pi/4), got {alpha}"
            )));
        }
        Ok(Self { radius, alpha })
    }

    /// Largest attainable |tilt|.
    pub fn max_tilt(&self) -> f64 {
        2.0 * self.alpha
    }
}

impl Default for ModuleParams {
    /// Reference build: 70 mm radius, 15 degree bevel.
    fn default() -> Self {
        Self {
            radius: 0.07,
            alpha: std::f64::consts::FRAC_PI_6 / 2.0,
        }
    }
}

/// Output-frame attitude of a module in bend coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltAzimuth {
    /// Bend angle theta, radians.
    pub tilt: f64,
    /// Bend-plane direction phi in `(-pi, pi]`, radians.
    pub azimuth: f64,
}

/// Wedge drive angles, each wrapped to `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorAngles {
    pub q1: f64,
    pub q2: f64,
}

impl ActuatorAngles {
    pub fn new(q1: f64, q2: f64) -> Self {
        Self {
            q1: wrap_angle(q1),
            q2: wrap_angle(q2),
        }
    }
}

/// Module Jacobians split by coordinate layer.
///
/// `bend` maps `[d(azimuth); d(tilt)]` to a spatial velocity, `drive` maps
/// actuator rates to bend rates, and `actuator = bend * drive` maps actuator
/// rates straight to the output twist. Rows are linear-first.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleJacobians {
    pub bend: Matrix6x2,
    pub drive: Matrix2<f64>,
    pub actuator: Matrix6x2,
}

/// Bend coordinates reached by a pair of actuator angles.
///
/// Equal angles leave the module straight; opposed angles bend it. The tilt
/// is negative when `q1` leads `q2`.
pub fn actuator_to_tilt_azimuth(q: &ActuatorAngles, params: &ModuleParams) -> TiltAzimuth {
    let azimuth = wrap_angle((q.q1 + q.q2 - std::f64::consts::PI) / 2.0);
    let u = params.alpha.tan() * ((q.q1 - q.q2) / 2.0).sin();
    // Double-angle form of theta = -2 * atan(u); atan2 keeps the branch
    // explicit and never divides by zero.
    let tilt = (-2.0 * u).atan2(1.0 - u * u);
    TiltAzimuth { tilt, azimuth }
}

/// Both actuator solutions for a bend, first branch listed first.
///
/// The two branches mirror each other about the bend plane and coincide at
/// maximum tilt. Requests beyond `2 * alpha` (with a small tolerance for
/// round-off) are rejected.
pub fn tilt_azimuth_to_actuator(
    a: &TiltAzimuth,
    params: &ModuleParams,
) -> Result<(ActuatorAngles, ActuatorAngles)> {
    // tan(theta/2)/tan(alpha) stays finite through theta = 0, where the
    // textbook cos/sin expression degenerates to 0/0.
    let mut c = (a.tilt / 2.0).tan() / params.alpha.tan();
    if c.abs() > 1.0 + 1e-9 {
        return Err(Error::TiltOutOfRange {
            theta: a.tilt,
            max: params.max_tilt(),
        });
    }
    c = c.clamp(-1.0, 1.0);
    let offset = c.acos();
    let phi = a.azimuth;
    let first = ActuatorAngles::new(phi + offset, phi - offset + std::f64::consts::PI);
    let second = ActuatorAngles::new(phi - offset, phi + offset + std::f64::consts::PI);
    Ok((first, second))
}

/// The actuator solution nearest to `current` in wrapped joint distance.
pub fn closest_actuator_solution(
    a: &TiltAzimuth,
    params: &ModuleParams,
    current: &ActuatorAngles,
) -> Result<ActuatorAngles> {
    let (first, second) = tilt_azimuth_to_actuator(a, params)?;
    let dist = |s: &ActuatorAngles| {
        wrap_angle(s.q1 - current.q1).abs() + wrap_angle(s.q2 - current.q2).abs()
    };
    if dist(&first) <= dist(&second) {
        Ok(first)
    } else {
        Ok(second)
    }
}

/// Pose of the module output frame in the module base frame.
pub fn bend_transform(a: &TiltAzimuth, params: &ModuleParams) -> RigidTransform {
    let (sp, cp) = a.azimuth.sin_cos();
    let (st, ct) = a.tilt.sin_cos();
    let rotation = Matrix3::new(
        cp * cp * ct + sp * sp,
        sp * cp * (ct - 1.0),
        cp * st,
        sp * cp * (ct - 1.0),
        sp * sp * ct + cp * cp,
        sp * st,
        -cp * st,
        -sp * st,
        ct,
    );
    let r = params.radius;
    let translation = Vector3::new(r * st * cp, r * st * sp, r + r * ct);
    RigidTransform::from_parts(rotation, translation)
}

/// Pose of the module output frame for a pair of actuator angles.
pub fn module_transform(q: &ActuatorAngles, params: &ModuleParams) -> RigidTransform {
    bend_transform(&actuator_to_tilt_azimuth(q, params), params)
}

/// All three Jacobian layers at the given actuator angles.
pub fn module_jacobians(q: &ActuatorAngles, params: &ModuleParams) -> ModuleJacobians {
    let a = actuator_to_tilt_azimuth(q, params);
    let (sp, cp) = a.azimuth.sin_cos();
    let (st, ct) = a.tilt.sin_cos();
    let r = params.radius;

    // Columns: azimuth rate, tilt rate. Rows: linear xyz then angular xyz.
    let bend = Matrix6x2::from_columns(&[
        SMatrix::<f64, 6, 1>::new(-r * st * sp, r * st * cp, 0.0, -cp * st, -sp * st, 1.0 - ct),
        SMatrix::<f64, 6, 1>::new(r * ct * cp, r * ct * sp, -r * st, -sp, cp, 0.0),
    ]);

    let ta = params.alpha.tan();
    let half_diff = (q.q1 - q.q2) / 2.0;
    let (sd, cd) = half_diff.sin_cos();
    let c = 2.0 * ta * cd / (1.0 + ta * ta * sd * sd);
    let drive = Matrix2::new(0.5, 0.5, -0.5 * c, 0.5 * c);

    let actuator = bend * drive;
    ModuleJacobians {
        bend,
        drive,
        actuator,
    }
}

/// Output positions over a `grid x grid` sweep of both actuators.
pub fn module_workspace(params: &ModuleParams, grid: usize) -> Vec<Vector3<f64>> {
    let mut points = Vec::with_capacity(grid * grid);
    if grid == 0 {
        return points;
    }
    let step = 2.0 * std::f64::consts::PI / grid as f64;
    for i in 0..grid {
        for j in 0..grid {
            let q = ActuatorAngles::new(
                -std::f64::consts::PI + step * i as f64,
                -std::f64::consts::PI + step * j as f64,
            );
            points.push(module_transform(&q, params).translation);
        }
    }
    points
}
