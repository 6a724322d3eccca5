//! Machining path synthesis for the face-milling comparison experiment.
//!
//! Each trajectory is a closed square contour on one face of an axis-aligned
//! work cube in front of the robot. The tool keeps a constant commanded
//! attitude per face, moves at constant speed along the contour, and carries a
//! constant-magnitude cutting load: a tangential component along the feed
//! direction plus a radial component pointing into the contour.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{RigidTransform, Twist, Wrench};

/// Which face of the work cube a trajectory runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    /// Horizontal face at the bottom of the cube (constant, low z).
    Bottom,
    /// Horizontal face at the top of the cube (constant, high z).
    Top,
    /// Vertical face nearest the robot (constant, low y).
    Near,
    /// Vertical face farthest from the robot (constant, high y).
    Far,
}

impl Face {
    /// `true` for faces with a constant z coordinate.
    pub fn is_horizontal(self) -> bool {
        matches!(self, Face::Bottom | Face::Top)
    }
}

/// Quarter of the square contour, labelled in traversal order.
///
/// Sides `A` and `C` run along the in-face transverse axis (y on horizontal
/// faces, z on vertical ones); sides `B` and `D` run along x. The distinction
/// matters because the transmission-ratio metric depends on how the cutting
/// load aligns with the arm posture, which differs systematically between the
/// two directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    A,
    B,
    C,
    D,
}

impl Sector {
    /// Lower-case single-letter label used in CSV output.
    pub fn as_char(self) -> char {
        match self {
            Sector::A => 'a',
            Sector::B => 'b',
            Sector::C => 'c',
            Sector::D => 'd',
        }
    }

    /// `true` for the sectors whose feed direction is the x axis.
    pub fn along_x(self) -> bool {
        matches!(self, Sector::B | Sector::D)
    }
}

/// Geometry, discretization, and load parameters for the path generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryParams {
    /// Centre of the work cube in the robot base frame (metres).
    pub cube_center: [f64; 3],
    /// Edge length of the work cube (metres).
    pub cube_side: f64,
    /// Number of path nodes, including the closing node (>= 9).
    pub steps: usize,
    /// Time between consecutive nodes (seconds).
    pub dt: f64,
    /// Cutting force along the feed direction (newtons).
    pub tangential_force: f64,
    /// Cutting force normal to the feed direction, in the face plane (newtons).
    pub radial_force: f64,
    /// Radial component points toward the contour centre when `true`,
    /// outward when `false`.
    pub radial_inward: bool,
    /// Constant cant of the tool axis away from the face normal, applied
    /// about the x axis (radians).
    pub attitude: f64,
    /// Face assigned to each trajectory id 1..=4.
    pub faces: [Face; 4],
}

impl TrajectoryParams {
    /// Desk-scale preset: a 0.5 m cube centred 1.05 m in front of the base,
    /// traversed in 200 intervals of 0.1 s (feed 0.1 m/s).
    pub fn desk() -> Self {
        Self {
            cube_center: [0.0, 1.05, 0.45],
            cube_side: 0.5,
            steps: 201,
            dt: 0.1,
            tangential_force: 60.0,
            radial_force: 20.0,
            radial_inward: true,
            attitude: std::f64::consts::FRAC_PI_4,
            faces: [Face::Bottom, Face::Top, Face::Near, Face::Far],
        }
    }

    /// Full-scale preset: same geometry traversed in 2000 intervals of 0.5 s
    /// (feed 2 mm/s), matching a slow machining pass.
    pub fn full_scale() -> Self {
        Self {
            steps: 2001,
            dt: 0.5,
            ..Self::desk()
        }
    }

    /// Validates ranges and cross-field consistency.
    pub fn validate(&self) -> Result<()> {
        if !self.cube_center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidParameter("cube_center must be finite".into()));
        }
        if !(self.cube_side > 0.0 && self.cube_side.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cube_side must be positive and finite, got {}",
                self.cube_side
            )));
        }
        if self.steps < 9 {
            return Err(Error::InvalidParameter(format!(
                "steps must be at least 9 (two nodes per side), got {}",
                self.steps
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive and finite, got {}",
                self.dt
            )));
        }
        for (name, f) in [
            ("tangential_force", self.tangential_force),
            ("radial_force", self.radial_force),
        ] {
            if !(f >= 0.0 && f.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative and finite, got {f}"
                )));
            }
        }
        if !self.attitude.is_finite() || self.attitude.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidParameter(format!(
                "attitude must lie in (-pi/2, pi/2), got {}",
                self.attitude
            )));
        }
        Ok(())
    }

    /// Contour length: the perimeter of one cube face.
    pub fn perimeter(&self) -> f64 {
        4.0 * self.cube_side
    }

    /// Constant feed speed implied by the discretization.
    pub fn speed(&self) -> f64 {
        self.perimeter() / ((self.steps - 1) as f64 * self.dt)
    }
}

/// A fully discretized machining pass: per-node poses and per-node commanded
/// loads, with `poses[0] == poses[len-1]` (closed contour).
///
/// Node `k` stores the twist and wrench of the interval that *leaves* node
/// `k`; the final node repeats the last interval so every node has a defined
/// load for metric evaluation.
#[derive(Debug, Clone)]
pub struct TrajectorySpec {
    /// Trajectory id (1..=4).
    pub id: u8,
    /// Face the contour lies on.
    pub face: Face,
    /// Node spacing in time (seconds).
    pub dt: f64,
    /// Commanded tool pose at each node.
    pub poses: Vec<RigidTransform>,
    /// Commanded spatial velocity over the interval leaving each node.
    pub twists: Vec<Twist>,
    /// Cutting load applied over the interval leaving each node.
    pub wrenches: Vec<Wrench>,
    /// Contour quarter each node belongs to.
    pub sectors: Vec<Sector>,
}

impl TrajectorySpec {
    /// Number of nodes (path steps), including the closing node.
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    /// `true` when the spec holds no nodes (never produced by the builder).
    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Total traversal time.
    pub fn duration(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }

    /// Polyline length of the commanded positions.
    pub fn path_length(&self) -> f64 {
        self.poses
            .windows(2)
            .map(|w| (w[1].translation - w[0].translation).norm())
            .sum()
    }
}

/// In-face orthonormal basis: `e1` is always the base x axis; `e2` is y on
/// horizontal faces and z on vertical ones.
fn face_basis(face: Face) -> (Vector3<f64>, Vector3<f64>) {
    let e1 = Vector3::x();
    match face {
        Face::Bottom | Face::Top => (e1, Vector3::y()),
        Face::Near | Face::Far => (e1, Vector3::z()),
    }
}

/// Corner of the square where the traversal starts, in base coordinates.
fn start_corner(face: Face, center: &Vector3<f64>, half: f64) -> Vector3<f64> {
    match face {
        Face::Bottom => Vector3::new(center.x - half, center.y - half, center.z - half),
        Face::Top => Vector3::new(center.x - half, center.y - half, center.z + half),
        Face::Near => Vector3::new(center.x - half, center.y - half, center.z - half),
        Face::Far => Vector3::new(center.x - half, center.y + half, center.z - half),
    }
}

/// Constant tool orientation for a face: the tool axis (body z) is the
/// machining approach direction canted by `attitude` about base x, and the
/// tool x axis stays aligned with base x.
fn face_attitude(face: Face, attitude: f64) -> RigidTransform {
    // Approach direction: pointing from the tool into the face.
    let approach = match face {
        Face::Bottom | Face::Top => -Vector3::z(),
        Face::Near | Face::Far => Vector3::y(),
    };
    let z_tool = RigidTransform::rot_x(attitude) * approach;
    let x_tool = Vector3::x();
    let y_tool = z_tool.cross(&x_tool);
    let mut rotation = nalgebra::Matrix3::zeros();
    rotation.set_column(0, &x_tool);
    rotation.set_column(1, &y_tool);
    rotation.set_column(2, &z_tool);
    RigidTransform::from_parts(rotation, Vector3::zeros())
}

/// Builds the discretized machining pass for trajectory `id` (1..=4).
///
/// The contour starts at the face corner with the smallest coordinates,
/// traverses sector A along the transverse axis, B along +x, C back along the
/// transverse axis, and D along -x to close the loop. Corner nodes land
/// exactly on the discretization whenever `steps - 1` is a multiple of 4 (both
/// presets satisfy this), so forward-Euler integration of the twists
/// reproduces the node positions without drift.
pub fn build_trajectory(id: u8, params: &TrajectoryParams) -> Result<TrajectorySpec> {
    params.validate()?;
    if !(1..=4).contains(&id) {
        return Err(Error::BadTrajectoryId(id));
    }
    let face = params.faces[(id - 1) as usize];
    let center = Vector3::from(params.cube_center);
    let half = 0.5 * params.cube_side;
    let (e1, e2) = face_basis(face);
    let c0 = start_corner(face, &center, half);
    let side = params.cube_side;

    // Square corners in traversal order (A starts along e2 from c0).
    let corners = [c0, c0 + side * e2, c0 + side * (e1 + e2), c0 + side * e1];
    // In-face feed directions per sector, and the in-face inward normals
    // (rotate the feed direction by -90 degrees within the (e1, e2) plane;
    // the traversal orientation makes the square interior sit on that side).
    let dirs = [e2, e1, -e2, -e1];
    let inward = |dir: Vector3<f64>| {
        let d1 = dir.dot(&e1);
        let d2 = dir.dot(&e2);
        d2 * e1 - d1 * e2
    };

    let n = params.steps;
    let intervals = n - 1;
    let perimeter = params.perimeter();
    let ds = perimeter / intervals as f64;
    let speed = params.speed();
    let rotation = face_attitude(face, params.attitude);

    let mut poses = Vec::with_capacity(n);
    let mut twists = Vec::with_capacity(n);
    let mut wrenches = Vec::with_capacity(n);
    let mut sectors = Vec::with_capacity(n);

    for k in 0..n {
        // Position: walk the perimeter by arc length.
        let s = (k as f64 * ds).min(perimeter);
        let side_idx = ((s / side) as usize).min(3);
        let local = s - side_idx as f64 * side;
        let position = corners[side_idx] + local * dirs[side_idx];

        // Interval quantities: the interval leaving node k (the last node
        // repeats the final interval so each node carries a defined load).
        let mid = (k.min(intervals - 1) as f64 + 0.5) * ds;
        let sector_idx = ((mid / side) as usize).min(3);
        let sector = [Sector::A, Sector::B, Sector::C, Sector::D][sector_idx];
        let dir = dirs[sector_idx];

        let radial_dir = if params.radial_inward {
            inward(dir)
        } else {
            -inward(dir)
        };
        let force = params.tangential_force * dir + params.radial_force * radial_dir;

        poses.push(RigidTransform::from_parts(rotation.rotation, position));
        twists.push(Twist {
            linear: speed * dir,
            angular: Vector3::zeros(),
        });
        wrenches.push(Wrench {
            force,
            moment: Vector3::zeros(),
        });
        sectors.push(sector);
    }

    Ok(TrajectorySpec {
        id,
        face,
        dt: params.dt,
        poses,
        twists,
        wrenches,
        sectors,
    })
}
