//! World model: planar n-link arm, convex obstacles, kinematics, collision.
//!
//! Poses are SE(2); the arm is a serial revolute chain whose links are
//! capsules (segments inflated by a clearance radius). Worlds load from a
//! versioned JSON schema and expose a content fingerprint so downstream
//! artifacts can detect when they were built against different geometry.

use crate::behavior::BehaviorSpec;
use crate::geom::{wrap_angle, ConvexPolygon, Point, PolygonError, Pose2};
use crate::instrument;
use crate::roi::RegionOfInterest;
use crate::seeding::{self, SALT_IK};
use crate::tolerances::{
    EDGE_RESOLUTION, IK_ANG_TOL, IK_DAMPING, IK_DEDUP_DIST, IK_MAX_ITERS, IK_MAX_STEP, IK_POS_TOL,
};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path as FsPath;

/// Schema tag expected at the top of every world file.
pub const WORLD_FORMAT: &str = "bctmp-world-v1";

/// A joint configuration of the arm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotState(pub Vec<f64>);

impl RobotState {
    #[must_use]
    pub fn new(joints: Vec<f64>) -> Self {
        RobotState(joints)
    }

    #[must_use]
    pub fn joints(&self) -> &[f64] {
        &self.0
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Euclidean distance in joint space.
    #[must_use]
    pub fn dist(&self, other: &RobotState) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Linear interpolation; `t` in `[0, 1]`.
    #[must_use]
    pub fn lerp(&self, other: &RobotState, t: f64) -> RobotState {
        RobotState(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + (b - a) * t)
                .collect(),
        )
    }
}

/// Kinematic and geometric description of the arm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmSpec {
    /// Link lengths in meters, base outward.
    pub links: Vec<f64>,
    /// Per-joint `(low, high)` limits in radians.
    pub joint_limits: Vec<(f64, f64)>,
    /// Pose of the arm base in the world frame.
    pub base: Pose2,
    /// Capsule radius around each link, meters.
    pub clearance: f64,
}

impl ArmSpec {
    #[must_use]
    pub fn dof(&self) -> usize {
        self.links.len()
    }

    /// Total reach: the sum of link lengths.
    #[must_use]
    pub fn reach(&self) -> f64 {
        self.links.iter().sum()
    }
}

/// Parallel-jaw gripper dimensions used by the grasp behavior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GripperSpec {
    /// Distance between the open fingers, meters.
    pub span: f64,
    /// Finger length along the approach direction, meters.
    pub depth: f64,
}

/// A fully validated world.
#[derive(Clone, Debug, PartialEq)]
pub struct World {
    pub arm: ArmSpec,
    pub obstacles: Vec<ConvexPolygon>,
    pub gripper: GripperSpec,
    pub home: RobotState,
    pub rng_seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum WorldError {
    #[error("world file format is {found:?}, expected {WORLD_FORMAT:?}")]
    BadFormat { found: String },
    #[error("arm needs at least one link")]
    EmptyArm,
    #[error("link {index} has non-positive length {length}")]
    BadLink { index: usize, length: f64 },
    #[error("joint {index} limits ({low}, {high}) are not an interval")]
    BadJointLimits { index: usize, low: f64, high: f64 },
    #[error("clearance must be positive, got {0}")]
    BadClearance(f64),
    #[error("gripper span and depth must be positive")]
    BadGripper,
    #[error("obstacle {index}: {source}")]
    BadObstacle {
        index: usize,
        source: PolygonError,
    },
    #[error("expected {expected} joint values, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("joint {index} value {value} outside limits ({low}, {high})")]
    JointOutOfLimits {
        index: usize,
        value: f64,
        low: f64,
        high: f64,
    },
    #[error("home state is in collision")]
    HomeInCollision,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// On-disk world schema. A task file may additionally carry the behavior and
/// region-of-interest sections consumed by preprocessing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorldFile {
    pub format: String,
    pub arm: ArmFile,
    /// Obstacles as vertex lists, CCW convex.
    pub obstacles: Vec<Vec<[f64; 2]>>,
    pub gripper: GripperSpec,
    pub home_joints: Vec<f64>,
    pub rng_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior: Option<BehaviorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roi: Option<RegionOfInterest>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArmFile {
    pub links: Vec<f64>,
    pub joint_limits: Vec<[f64; 2]>,
    pub base: [f64; 3],
    pub clearance: f64,
}

impl WorldFile {
    pub fn parse(text: &str) -> Result<Self, WorldError> {
        let file: WorldFile = serde_json::from_str(text)?;
        if file.format != WORLD_FORMAT {
            return Err(WorldError::BadFormat {
                found: file.format.clone(),
            });
        }
        Ok(file)
    }

    pub fn load(path: &FsPath) -> Result<Self, WorldError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &FsPath) -> Result<(), WorldError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Validates the file into a usable world.
    pub fn build_world(&self) -> Result<World, WorldError> {
        if self.arm.links.is_empty() {
            return Err(WorldError::EmptyArm);
        }
        for (index, &length) in self.arm.links.iter().enumerate() {
            if !(length > 0.0) {
                return Err(WorldError::BadLink { index, length });
            }
        }
        if self.arm.joint_limits.len() != self.arm.links.len() {
            return Err(WorldError::DimensionMismatch {
                expected: self.arm.links.len(),
                found: self.arm.joint_limits.len(),
            });
        }
        let mut joint_limits = Vec::with_capacity(self.arm.joint_limits.len());
        for (index, &[low, high]) in self.arm.joint_limits.iter().enumerate() {
            if !(low < high) {
                return Err(WorldError::BadJointLimits { index, low, high });
            }
            joint_limits.push((low, high));
        }
        if !(self.arm.clearance > 0.0) {
            return Err(WorldError::BadClearance(self.arm.clearance));
        }
        if !(self.gripper.span > 0.0 && self.gripper.depth > 0.0) {
            return Err(WorldError::BadGripper);
        }
        let mut obstacles = Vec::with_capacity(self.obstacles.len());
        for (index, verts) in self.obstacles.iter().enumerate() {
            let pts = verts.iter().map(|&[x, y]| Point::new(x, y)).collect();
            obstacles.push(
                ConvexPolygon::new(pts).map_err(|source| WorldError::BadObstacle { index, source })?,
            );
        }
        let world = World {
            arm: ArmSpec {
                links: self.arm.links.clone(),
                joint_limits,
                base: Pose2::new(self.arm.base[0], self.arm.base[1], self.arm.base[2]),
                clearance: self.arm.clearance,
            },
            obstacles,
            gripper: self.gripper,
            home: RobotState::new(self.home_joints.clone()),
            rng_seed: self.rng_seed,
        };
        world.check_state(&world.home)?;
        if world.in_collision(&world.home)? {
            return Err(WorldError::HomeInCollision);
        }
        Ok(world)
    }
}

impl World {
    /// Rebuilds the canonical file form (without task sections).
    #[must_use]
    pub fn to_file(&self) -> WorldFile {
        WorldFile {
            format: WORLD_FORMAT.to_string(),
            arm: ArmFile {
                links: self.arm.links.clone(),
                joint_limits: self.arm.joint_limits.iter().map(|&(a, b)| [a, b]).collect(),
                base: [self.arm.base.x, self.arm.base.y, self.arm.base.theta],
                clearance: self.arm.clearance,
            },
            obstacles: self
                .obstacles
                .iter()
                .map(|p| p.vertices().iter().map(|v| [v.x, v.y]).collect())
                .collect(),
            gripper: self.gripper,
            home_joints: self.home.joints().to_vec(),
            rng_seed: self.rng_seed,
            behavior: None,
            roi: None,
        }
    }

    /// Canonical serialization used for fingerprinting. Task sections are
    /// excluded so the same geometry always hashes identically.
    #[must_use]
    pub fn canonical_json(&self) -> Vec<u8> {
        serde_json::to_vec(&self.to_file()).expect("world serialization cannot fail")
    }

    /// Content hash of the world geometry and arm description.
    #[must_use]
    pub fn fingerprint(&self) -> [u8; 32] {
        Sha256::digest(self.canonical_json()).into()
    }

    fn check_state(&self, s: &RobotState) -> Result<(), WorldError> {
        if s.dim() != self.arm.dof() {
            return Err(WorldError::DimensionMismatch {
                expected: self.arm.dof(),
                found: s.dim(),
            });
        }
        Ok(())
    }

    /// Validates joint-limit containment on top of dimension checks.
    pub fn check_limits(&self, s: &RobotState) -> Result<(), WorldError> {
        self.check_state(s)?;
        for (index, (&value, &(low, high))) in
            s.joints().iter().zip(&self.arm.joint_limits).enumerate()
        {
            if value < low || value > high {
                return Err(WorldError::JointOutOfLimits {
                    index,
                    value,
                    low,
                    high,
                });
            }
        }
        Ok(())
    }

    /// World-frame joint positions: `dof + 1` points, base first, tip last.
    pub fn joint_positions(&self, s: &RobotState) -> Result<Vec<Point>, WorldError> {
        self.check_state(s)?;
        let mut pts = Vec::with_capacity(self.arm.dof() + 1);
        let mut angle = self.arm.base.theta;
        let mut p = self.arm.base.position();
        pts.push(p);
        for (q, len) in s.joints().iter().zip(&self.arm.links) {
            angle += q;
            p = p.add(Point::unit(angle).scale(*len));
            pts.push(p);
        }
        Ok(pts)
    }

    /// End-effector pose: tip position, heading = base plus all joint angles.
    pub fn forward_kinematics(&self, s: &RobotState) -> Result<Pose2, WorldError> {
        let pts = self.joint_positions(s)?;
        let tip = pts[pts.len() - 1];
        let heading = self.arm.base.theta + s.joints().iter().sum::<f64>();
        Ok(Pose2::new(tip.x, tip.y, heading))
    }

    /// Positional Jacobian, `2 x dof`: column `j` is the velocity of the tip
    /// per unit velocity of joint `j`.
    pub fn jacobian(&self, s: &RobotState) -> Result<DMatrix<f64>, WorldError> {
        let pts = self.joint_positions(s)?;
        let tip = pts[pts.len() - 1];
        let n = self.arm.dof();
        let mut j = DMatrix::zeros(2, n);
        for col in 0..n {
            let axis = pts[col];
            j[(0, col)] = -(tip.y - axis.y);
            j[(1, col)] = tip.x - axis.x;
        }
        Ok(j)
    }

    /// Task Jacobian over (x, y, heading): positional rows plus a row of
    /// ones, since every joint contributes directly to the tip heading.
    pub(crate) fn se2_jacobian(&self, s: &RobotState) -> Result<DMatrix<f64>, WorldError> {
        let pos = self.jacobian(s)?;
        let n = self.arm.dof();
        let mut j = DMatrix::zeros(3, n);
        for col in 0..n {
            j[(0, col)] = pos[(0, col)];
            j[(1, col)] = pos[(1, col)];
            j[(2, col)] = 1.0;
        }
        Ok(j)
    }

    fn clamp_to_limits(&self, s: &mut RobotState) {
        for (q, &(low, high)) in s.0.iter_mut().zip(&self.arm.joint_limits) {
            *q = q.clamp(low, high);
        }
    }

    /// One damped-least-squares step toward `target`; returns the joint
    /// update applied. Shared by IK descent and the behavior servo loop.
    pub(crate) fn dls_step(
        &self,
        s: &mut RobotState,
        target: &Pose2,
        max_joint_step: f64,
    ) -> Result<f64, WorldError> {
        let ee = self.forward_kinematics(s)?;
        let err = Vector3::new(
            target.x - ee.x,
            target.y - ee.y,
            wrap_angle(target.theta - ee.theta),
        );
        let j = self.se2_jacobian(s)?;
        let jjt = &j * j.transpose() + Matrix3::identity() * (IK_DAMPING * IK_DAMPING);
        let jjt = Matrix3::from_iterator(jjt.iter().copied());
        let y = jjt
            .lu()
            .solve(&err)
            .unwrap_or_else(Vector3::zeros);
        let mut dq = j.transpose() * DVector::from_column_slice(y.as_slice());
        let norm = dq.norm();
        if norm > max_joint_step {
            dq *= max_joint_step / norm;
        }
        for (q, d) in s.0.iter_mut().zip(dq.iter()) {
            *q += d;
        }
        self.clamp_to_limits(s);
        Ok(dq.norm())
    }

    /// Damped-least-squares inverse kinematics with multi-start.
    ///
    /// Runs one descent from home plus `seeds` random restarts, keeps
    /// solutions whose end-effector pose lands within `(IK_POS_TOL,
    /// IK_ANG_TOL)` of `target`, and deduplicates by joint-space distance.
    /// Deterministic for a given world seed and target. Targets beyond total
    /// reach return an empty list.
    pub fn inverse_kinematics(&self, target: &Pose2, seeds: usize) -> Vec<RobotState> {
        let reach = self.arm.reach();
        if target.position().dist(self.arm.base.position()) > reach + 1e-12 {
            return Vec::new();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seeding::mix(
            self.rng_seed,
            &[SALT_IK, seeding::pose_bits(target.x, target.y, target.theta)],
        ));
        let mut solutions: Vec<RobotState> = Vec::new();
        for start_idx in 0..=seeds {
            let mut q = if start_idx == 0 {
                self.home.clone()
            } else {
                self.sample_state(&mut rng)
            };
            for _ in 0..IK_MAX_ITERS {
                let ee = self.forward_kinematics(&q).expect("dimension fixed");
                let pos_err = ee.position().dist(target.position());
                let ang_err = wrap_angle(target.theta - ee.theta).abs();
                if pos_err < 1e-10 && ang_err < 1e-10 {
                    break;
                }
                let step = self
                    .dls_step(&mut q, target, IK_MAX_STEP)
                    .expect("dimension fixed");
                if step < 1e-13 {
                    break;
                }
            }
            let ee = self.forward_kinematics(&q).expect("dimension fixed");
            let pos_err = ee.position().dist(target.position());
            let ang_err = wrap_angle(target.theta - ee.theta).abs();
            if pos_err < IK_POS_TOL && ang_err < IK_ANG_TOL {
                let duplicate = solutions.iter().any(|s| s.dist(&q) < IK_DEDUP_DIST);
                if !duplicate {
                    solutions.push(q);
                }
            }
        }
        solutions
    }

    /// Exact collision test: any link capsule against any obstacle, or any
    /// non-adjacent link pair against each other.
    pub fn in_collision(&self, s: &RobotState) -> Result<bool, WorldError> {
        instrument::count_collision_check();
        let pts = self.joint_positions(s)?;
        let r = self.arm.clearance;
        let n = self.arm.dof();
        for i in 0..n {
            for poly in &self.obstacles {
                if poly.segment_distance(pts[i], pts[i + 1]) <= r {
                    return Ok(true);
                }
            }
        }
        for i in 0..n {
            for j in (i + 2)..n {
                let d = crate::geom::segment_segment_distance(
                    pts[i],
                    pts[i + 1],
                    pts[j],
                    pts[j + 1],
                );
                if d <= 2.0 * r {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Collision-checks the straight joint-space segment from `a` to `b`,
    /// sampled so consecutive states differ by at most `resolution` radians
    /// (Euclidean), endpoints inclusive.
    pub fn edge_collision_free(
        &self,
        a: &RobotState,
        b: &RobotState,
        resolution: f64,
    ) -> Result<bool, WorldError> {
        instrument::count_edge_check();
        self.check_state(a)?;
        self.check_state(b)?;
        let steps = (a.dist(b) / resolution).ceil() as usize;
        for k in 0..=steps {
            let t = if steps == 0 { 0.0 } else { k as f64 / steps as f64 };
            if self.in_collision(&a.lerp(b, t))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Default-resolution edge check.
    pub fn edge_free(&self, a: &RobotState, b: &RobotState) -> Result<bool, WorldError> {
        self.edge_collision_free(a, b, EDGE_RESOLUTION)
    }

    /// Uniform joint-limit sample.
    pub fn sample_state(&self, rng: &mut impl Rng) -> RobotState {
        RobotState(
            self.arm
                .joint_limits
                .iter()
                .map(|&(low, high)| rng.gen_range(low..high))
                .collect(),
        )
    }
}
