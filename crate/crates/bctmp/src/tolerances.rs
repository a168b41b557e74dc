//! Central numeric defaults and tolerances.
//!
//! Every magic number shared by more than one module lives here so the
//! coupling between them stays visible. Behavior-specific knobs that vary per
//! task (retraction, top-K, noise bound) live in `BehaviorSpec` instead.

/// Capsule radius around each link segment, meters. Collision checks treat a
/// link as its segment inflated by this radius.
pub const LINK_CLEARANCE: f64 = 0.02;

/// Damping factor for damped-least-squares inverse kinematics and Cartesian
/// servo steps. Large enough to step through near-singular poses without
/// exploding joint velocities.
pub const IK_DAMPING: f64 = 1e-2;

/// Iteration cap for one inverse-kinematics descent.
pub const IK_MAX_ITERS: usize = 200;

/// Positional acceptance tolerance for an IK solution, meters.
pub const IK_POS_TOL: f64 = 1e-4;

/// Angular acceptance tolerance for an IK solution, radians.
pub const IK_ANG_TOL: f64 = 1e-4;

/// Joint-space distance under which two IK solutions count as duplicates.
pub const IK_DEDUP_DIST: f64 = 1e-3;

/// Largest joint-space move a single DLS iteration may take, radians.
/// Bounds the step near singularities where the damped solve still produces
/// large updates.
pub const IK_MAX_STEP: f64 = 0.5;

/// Joint-space interpolation resolution for edge collision checks, radians.
pub const EDGE_RESOLUTION: f64 = 0.02;

/// Extension step for the bidirectional RRT, radians in joint space.
pub const RRT_STEP: f64 = 0.2;

/// Probability that an RRT extension targets the opposite tree root instead
/// of a uniform sample.
pub const RRT_GOAL_BIAS: f64 = 0.1;

/// Number of random-pair shortcut attempts applied to every returned path.
pub const SHORTCUT_ATTEMPTS: usize = 200;

/// Weight converting object orientation error to meters in the object-pose
/// metric: d = sqrt(dx^2 + dy^2) + METRIC_THETA_WEIGHT * |dtheta|.
pub const METRIC_THETA_WEIGHT: f64 = 0.3;

/// Default offset from a key pose to its approach pose, meters.
pub const DEFAULT_RETRACTION: f64 = 0.10;

/// Default manipulability threshold as a fraction of total arm reach.
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Cartesian translation cap per rollout servo step, meters.
pub const ROLLOUT_CARTESIAN_STEP: f64 = 0.005;

/// Rotation cap per rollout servo step, radians.
pub const ROLLOUT_ANGULAR_STEP: f64 = 0.05;

/// Step cap for one behavior rollout.
pub const ROLLOUT_MAX_STEPS: usize = 500;

/// Positional convergence tolerance for rollout termination, meters.
pub const ROLLOUT_POS_TOL: f64 = 0.002;

/// Angular convergence tolerance for rollout termination, radians.
pub const ROLLOUT_ANG_TOL: f64 = 0.02;

/// Controllable-set bound: an initiation state's end effector must sit within
/// this multiple of the retraction distance from the approach pose.
pub const CONTROLLABLE_REACH_FACTOR: f64 = 1.5;

/// Controllable-set bound on approach-heading error, radians.
pub const CONTROLLABLE_ANG_TOL: f64 = 0.5;

/// Margin subtracted from a neighborhood radius so the bounding failure cell
/// itself falls strictly outside the ball.
pub const BALL_MARGIN: f64 = 1e-9;

/// Refinement factor applied to `EDGE_RESOLUTION` when re-verifying a stored
/// path during execution or library verification.
pub const VERIFY_REFINEMENT: f64 = 2.0;

/// How far (object metric) a stored terminal pose may sit from a computed
/// initiation pose and still be snapped to by the pose-table baseline.
pub const POSE_TABLE_SNAP: f64 = 0.05;
