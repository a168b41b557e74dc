//! Manipulation behaviors: grasp and insertion.
//!
//! A behavior bundles an initiation predicate (which robot states it can
//! start from, given an object pose), a generator of candidate initiation
//! states, and a closed policy simulated by `rollout`. Grasping runs open
//! loop from a single observation; insertion re-observes the port every step
//! and corrects, which is why its feasibility additionally depends on the
//! arm's manipulability along the way.

use crate::geom::{wrap_angle, Point, Pose2};
use crate::instrument;
use crate::tolerances::{
    CONTROLLABLE_ANG_TOL, CONTROLLABLE_REACH_FACTOR, DEFAULT_EPSILON, DEFAULT_RETRACTION,
    ROLLOUT_ANGULAR_STEP, ROLLOUT_ANG_TOL, ROLLOUT_CARTESIAN_STEP, ROLLOUT_MAX_STEPS,
    ROLLOUT_POS_TOL,
};
use crate::world::{RobotState, World, WorldError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::{FRAC_PI_2, PI};

/// Which policy a `BehaviorSpec` names.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BehaviorKind {
    Grasp,
    Insertion,
}

fn default_approach_samples() -> usize {
    16
}

fn default_half_extent() -> f64 {
    0.03
}

fn default_ik_seeds() -> usize {
    8
}

fn default_retraction() -> f64 {
    DEFAULT_RETRACTION
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

/// Task-level behavior parameters, read from the `behavior` section of a
/// task file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorSpec {
    /// `"grasp"` or `"insertion"`.
    pub name: String,
    /// Number of top-scoring approaches kept by the grasp generator.
    #[serde(rename = "K")]
    pub k: usize,
    /// Offset from the key pose to its approach pose, meters.
    #[serde(default = "default_retraction")]
    pub retraction: f64,
    /// Manipulability threshold as a fraction of arm reach (insertion).
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Perception noise radius, meters. Zero means exact observation.
    #[serde(default)]
    pub noise_bound: f64,
    /// Candidate approach directions sampled around an object (grasp).
    #[serde(default = "default_approach_samples")]
    pub approach_samples: usize,
    /// Half side length of the square grasp object, meters.
    #[serde(default = "default_half_extent")]
    pub object_half_extent: f64,
    /// Random restarts handed to each inverse-kinematics call.
    #[serde(default = "default_ik_seeds")]
    pub ik_seeds: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum BehaviorError {
    #[error("unknown behavior {0:?} (expected \"grasp\" or \"insertion\")")]
    UnknownBehavior(String),
    #[error("behavior parameter {name} = {value} is out of range")]
    BadParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    World(#[from] WorldError),
}

impl BehaviorSpec {
    pub fn kind(&self) -> Result<BehaviorKind, BehaviorError> {
        match self.name.as_str() {
            "grasp" => Ok(BehaviorKind::Grasp),
            "insertion" => Ok(BehaviorKind::Insertion),
            other => Err(BehaviorError::UnknownBehavior(other.to_string())),
        }
    }

    pub fn validate(&self) -> Result<(), BehaviorError> {
        self.kind()?;
        let checks = [
            ("K", self.k as f64, self.k >= 1),
            ("retraction", self.retraction, self.retraction > 0.0),
            ("epsilon", self.epsilon, self.epsilon > 0.0),
            ("noise_bound", self.noise_bound, self.noise_bound >= 0.0),
            (
                "approach_samples",
                self.approach_samples as f64,
                self.approach_samples >= 1,
            ),
            (
                "object_half_extent",
                self.object_half_extent,
                self.object_half_extent > 0.0,
            ),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(BehaviorError::BadParameter { name, value });
            }
        }
        Ok(())
    }

    /// Content hash of the full parameter set (defaults included).
    #[must_use]
    pub fn fingerprint(&self) -> [u8; 32] {
        let bytes = serde_json::to_vec(self).expect("behavior serialization cannot fail");
        Sha256::digest(bytes).into()
    }

    /// Perception model implied by this behavior's noise bound.
    #[must_use]
    pub fn perception(&self) -> PerceptionModel {
        PerceptionModel {
            noise_bound: self.noise_bound,
        }
    }
}

/// Bounded-noise pose observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerceptionModel {
    /// Radius of the positional noise disc, meters.
    pub noise_bound: f64,
}

impl PerceptionModel {
    /// Observes a pose: position offset uniformly within the noise disc,
    /// orientation exact. Always consumes the same number of RNG draws so a
    /// stream maps to the same offsets under a different bound.
    pub fn observe(&self, truth: &Pose2, rng: &mut impl Rng) -> Pose2 {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        let radius = self.noise_bound * u1.sqrt();
        let angle = 2.0 * PI * u2;
        Pose2::new(
            truth.x + radius * angle.cos(),
            truth.y + radius * angle.sin(),
            truth.theta,
        )
    }
}

/// The square object targeted by the grasp behavior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraspTarget {
    pub pose: Pose2,
    pub half_extent: f64,
}

impl GraspTarget {
    /// Support radius of the square along world direction `dir` (unit).
    #[must_use]
    pub fn support(&self, dir: Point) -> f64 {
        let a = Point::unit(self.pose.theta);
        let b = Point::unit(self.pose.theta + FRAC_PI_2);
        self.half_extent * (dir.dot(a).abs() + dir.dot(b).abs())
    }
}

/// Why a rollout stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RolloutFailure {
    /// Rollout succeeded.
    None,
    /// A servo step produced a colliding state.
    Collision,
    /// The initiation predicate rejected the start, or the grasp closed
    /// without straddling the object.
    PredicateViolated,
    /// Insertion manipulability fell below the behavior threshold.
    ManipulabilityBreach,
    /// The policy did not converge within the step budget.
    ConvergenceTimeout,
}

/// Outcome of simulating a behavior policy.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutResult {
    pub success: bool,
    /// Visited states, starting at the initiation state. Every recorded
    /// state is collision-free.
    pub trajectory: Vec<RobotState>,
    pub failure: RolloutFailure,
    /// Pose the policy drove the end effector toward.
    pub terminal_target: Pose2,
}

impl RolloutResult {
    fn failed(failure: RolloutFailure, trajectory: Vec<RobotState>, target: Pose2) -> Self {
        RolloutResult {
            success: false,
            trajectory,
            failure,
            terminal_target: target,
        }
    }
}

// ─── key poses ──────────────────────────────────────────────────────────

/// Pose reached at the end of a grasp approaching from angle `approach`.
#[must_use]
pub fn grasp_pose(object: &Pose2, approach: f64) -> Pose2 {
    Pose2::new(object.x, object.y, approach)
}

/// Approach (pre-key) pose: retracted from the key pose along the approach
/// direction.
#[must_use]
pub fn approach_pose(object_position: Point, approach: f64, retraction: f64) -> Pose2 {
    let p = object_position.sub(Point::unit(approach).scale(retraction));
    Pose2::new(p.x, p.y, approach)
}

/// Full-depth insertion pose: the port pose itself.
#[must_use]
pub fn insertion_pose(port: &Pose2) -> Pose2 {
    *port
}

/// Pre-insertion pose, retracted along the port axis.
#[must_use]
pub fn pre_insert_pose(port: &Pose2, retraction: f64) -> Pose2 {
    approach_pose(port.position(), port.theta, retraction)
}

/// Alignment score of a grasp approach: cosine between the gripper closing
/// axis and the nearer face-normal axis of the square object. 1.0 means the
/// fingers close flat onto two opposing faces.
#[must_use]
pub fn antipodal_score(object_theta: f64, approach: f64) -> f64 {
    let closing = approach + FRAC_PI_2;
    let rel = closing - object_theta;
    rel.cos().abs().max((rel - FRAC_PI_2).cos().abs())
}

/// Candidate approaches around `object`, best score first; ties keep
/// sampling order. Deterministic: approaches are evenly spaced starting at
/// the object's orientation.
#[must_use]
pub fn ranked_approaches(spec: &BehaviorSpec, object: &Pose2) -> Vec<(f64, f64)> {
    let m = spec.approach_samples;
    let mut scored: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let approach = object.theta + 2.0 * PI * i as f64 / m as f64;
            (approach, antipodal_score(object.theta, approach))
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("scores are finite"));
    scored
}

// ─── manipulability ─────────────────────────────────────────────────────

/// Smallest singular value of the positional Jacobian: the worst-case tip
/// speed over all unit joint velocities. Near zero means the arm cannot
/// correct in some direction.
pub fn manipulability_radius(world: &World, s: &RobotState) -> Result<f64, WorldError> {
    let j = world.jacobian(s)?;
    let sv = j.svd(false, false).singular_values;
    Ok(sv.iter().fold(f64::INFINITY, |a, &b| a.min(b)))
}

/// Absolute manipulability threshold for a behavior in a world: the spec's
/// epsilon is a fraction of total arm reach.
#[must_use]
pub fn manipulability_threshold(world: &World, spec: &BehaviorSpec) -> f64 {
    spec.epsilon * world.arm.reach()
}

// ─── initiation predicate ───────────────────────────────────────────────

/// Approach angle implied by a state relative to an object: the direction
/// from the end effector to the object, or the current heading when the end
/// effector sits on the object itself.
fn implied_approach(ee: &Pose2, object: &Pose2) -> f64 {
    let d = object.position().sub(ee.position());
    if d.norm() < 1e-9 {
        ee.theta
    } else {
        d.y.atan2(d.x)
    }
}

/// Whether the behavior can start from `s` for object pose `w`: the state is
/// collision-free and the end effector sits inside the controllable set
/// around the behavior's approach pose.
pub fn initiation_predicate(
    world: &World,
    spec: &BehaviorSpec,
    s: &RobotState,
    w: &Pose2,
) -> Result<bool, BehaviorError> {
    let kind = spec.kind()?;
    if world.in_collision(s)? {
        return Ok(false);
    }
    let ee = world.forward_kinematics(s)?;
    let key = match kind {
        BehaviorKind::Grasp => {
            let approach = implied_approach(&ee, w);
            approach_pose(w.position(), approach, spec.retraction)
        }
        BehaviorKind::Insertion => pre_insert_pose(w, spec.retraction),
    };
    let pos_ok =
        ee.position().dist(key.position()) <= CONTROLLABLE_REACH_FACTOR * spec.retraction;
    let ang_ok = wrap_angle(ee.theta - key.theta).abs() < CONTROLLABLE_ANG_TOL;
    Ok(pos_ok && ang_ok)
}

// ─── initiation state generation ────────────────────────────────────────

/// Candidate initiation states for object pose `w`, best ranked first.
///
/// Grasp: the K top-scoring approaches, each IK-solved at its approach pose;
/// the first valid solution per approach is kept. Insertion: every IK
/// solution of the single pre-insertion pose that passes the predicate and
/// the manipulability threshold. Deterministic for a given world seed.
pub fn get_init_states(
    world: &World,
    spec: &BehaviorSpec,
    w: &Pose2,
) -> Result<Vec<RobotState>, BehaviorError> {
    let kind = spec.kind()?;
    let mut states = Vec::new();
    match kind {
        BehaviorKind::Grasp => {
            for (approach, _score) in ranked_approaches(spec, w).into_iter().take(spec.k) {
                let pre = approach_pose(w.position(), approach, spec.retraction);
                for q in world.inverse_kinematics(&pre, spec.ik_seeds) {
                    if initiation_predicate(world, spec, &q, w)? {
                        states.push(q);
                        break;
                    }
                }
            }
        }
        BehaviorKind::Insertion => {
            let pre = pre_insert_pose(w, spec.retraction);
            let threshold = manipulability_threshold(world, spec);
            for q in world.inverse_kinematics(&pre, spec.ik_seeds) {
                if initiation_predicate(world, spec, &q, w)?
                    && manipulability_radius(world, &q)? >= threshold
                {
                    states.push(q);
                }
            }
        }
    }
    Ok(states)
}

// ─── rollout ────────────────────────────────────────────────────────────

fn converged(ee: &Pose2, target: &Pose2) -> bool {
    ee.position().dist(target.position()) <= ROLLOUT_POS_TOL
        && wrap_angle(ee.theta - target.theta).abs() <= ROLLOUT_ANG_TOL
}

/// Clips the pose error from `ee` toward `target` to one servo step.
fn step_target(ee: &Pose2, target: &Pose2) -> Pose2 {
    let dp = target.position().sub(ee.position());
    let da = wrap_angle(target.theta - ee.theta);
    let scale = [
        1.0,
        if dp.norm() > 0.0 {
            ROLLOUT_CARTESIAN_STEP / dp.norm()
        } else {
            1.0
        },
        if da.abs() > 0.0 {
            ROLLOUT_ANGULAR_STEP / da.abs()
        } else {
            1.0
        },
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    Pose2::new(
        ee.x + dp.x * scale,
        ee.y + dp.y * scale,
        ee.theta + da * scale,
    )
}

/// Whether the gripper at `ee` has both fingers on opposite sides of the
/// object: the object's lateral support fits inside the finger span and its
/// center lies within finger depth along the approach axis.
#[must_use]
pub fn grasp_straddles(
    gripper: &crate::world::GripperSpec,
    ee: &Pose2,
    target: &GraspTarget,
) -> bool {
    let rel = target.pose.position().sub(ee.position());
    let axial_dir = Point::unit(ee.theta);
    let closing_dir = Point::unit(ee.theta + FRAC_PI_2);
    let axial = rel.dot(axial_dir).abs();
    let lateral = rel.dot(closing_dir).abs();
    lateral + target.support(closing_dir) <= gripper.span / 2.0
        && axial <= gripper.depth / 2.0 + target.half_extent
}

/// Simulates the behavior policy from `start` for true object pose `w`.
///
/// Grasp observes once and servos open loop down the approach axis; success
/// requires converging on the commanded grasp pose and straddling the true
/// object. Insertion re-observes every step, moves its tracked target by at
/// most the noise bound per observation, and fails if manipulability drops
/// below the behavior threshold on the way in; success is measured against
/// the true port. Deterministic for a given seed.
pub fn rollout(
    world: &World,
    spec: &BehaviorSpec,
    start: &RobotState,
    w: &Pose2,
    perception: &PerceptionModel,
    seed: u64,
) -> Result<RolloutResult, BehaviorError> {
    instrument::count_rollout();
    let kind = spec.kind()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let believed = perception.observe(w, &mut rng);
    let ee0 = world.forward_kinematics(start)?;
    let (terminal, judged) = match kind {
        BehaviorKind::Grasp => {
            let approach = implied_approach(&ee0, &believed);
            let t = grasp_pose(&believed, approach);
            (t, t)
        }
        // insertion convergence is judged against the true port; the policy
        // only ever sees observations of it
        BehaviorKind::Insertion => (insertion_pose(&believed), insertion_pose(w)),
    };
    if !initiation_predicate(world, spec, start, &believed)? {
        return Ok(RolloutResult::failed(
            RolloutFailure::PredicateViolated,
            vec![start.clone()],
            judged,
        ));
    }

    let threshold = manipulability_threshold(world, spec);
    let mut q = start.clone();
    let mut trajectory = vec![start.clone()];
    let mut target = terminal;
    for step in 0..=ROLLOUT_MAX_STEPS {
        let ee = world.forward_kinematics(&q)?;
        if converged(&ee, &judged) {
            let success = match kind {
                BehaviorKind::Grasp => grasp_straddles(
                    &world.gripper,
                    &ee,
                    &GraspTarget {
                        pose: *w,
                        half_extent: spec.object_half_extent,
                    },
                ),
                BehaviorKind::Insertion => true,
            };
            return Ok(RolloutResult {
                success,
                failure: if success {
                    RolloutFailure::None
                } else {
                    RolloutFailure::PredicateViolated
                },
                trajectory,
                terminal_target: judged,
            });
        }
        if step == ROLLOUT_MAX_STEPS {
            break;
        }
        if kind == BehaviorKind::Insertion {
            if manipulability_radius(world, &q)? < threshold {
                return Ok(RolloutResult::failed(
                    RolloutFailure::ManipulabilityBreach,
                    trajectory,
                    judged,
                ));
            }
            let observed = perception.observe(w, &mut rng);
            let desired = insertion_pose(&observed);
            let dp = desired.position().sub(target.position());
            let bound = perception.noise_bound;
            let dp = if bound > 0.0 && dp.norm() > bound {
                dp.scale(bound / dp.norm())
            } else {
                dp
            };
            target = Pose2::new(target.x + dp.x, target.y + dp.y, desired.theta);
        }
        let intermediate = step_target(&ee, &target);
        world
            .dls_step(&mut q, &intermediate, 0.2)
            .map_err(BehaviorError::World)?;
        if world.in_collision(&q)? {
            return Ok(RolloutResult::failed(
                RolloutFailure::Collision,
                trajectory,
                judged,
            ));
        }
        trajectory.push(q.clone());
    }
    Ok(RolloutResult::failed(
        RolloutFailure::ConvergenceTimeout,
        trajectory,
        judged,
    ))
}
