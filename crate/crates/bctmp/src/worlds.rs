//! Benchmark task scenes.
//!
//! Two hand-built desk-scale scenes used by the benchmark harness and the
//! end-to-end tests. `grasp_shelf` is a walled shelf whose left partition
//! makes a strip of object poses provably impossible; `corner_insertion`
//! hangs a block over the insertion corridor where the elbow-up posture
//! sweeps its upper arm mid-insertion while the elbow-down branch stays
//! clear. Geometry constants are chosen so feasibility boundaries fall
//! between grid columns with millimeter margins — per-cell verdicts stay
//! sharp and deterministic instead of riding on floating-point luck.

use crate::behavior::BehaviorSpec;
use crate::geom::{ConvexPolygon, Pose2};
use crate::roi::{RegionOfInterest, RoiBox};
use crate::world::{ArmSpec, GripperSpec, RobotState, World, WorldError, WorldFile};

/// A complete benchmark task: scene, goal region, behavior, and the seed
/// every derived artifact (library, trials) is keyed on.
#[derive(Clone, Debug)]
pub struct TaskWorld {
    pub name: String,
    pub world: World,
    pub roi: RegionOfInterest,
    pub behavior: BehaviorSpec,
    pub seed: u64,
}

impl TaskWorld {
    /// File form: the world schema with the task's behavior and goal-region
    /// sections filled in.
    #[must_use]
    pub fn to_file(&self) -> WorldFile {
        let mut file = self.world.to_file();
        file.behavior = Some(self.behavior.clone());
        file.roi = Some(self.roi.clone());
        file
    }

    /// Builds a task from a loaded file; `behavior` and `roi` sections are
    /// required here. `seed` keys the derived artifacts and is supplied by
    /// the caller (the file format intentionally does not pin it).
    pub fn from_file(name: &str, file: &WorldFile, seed: u64) -> Result<Self, WorldError> {
        let world = file.build_world()?;
        let missing = |what: &str| WorldError::BadFormat {
            found: format!("task file without a {what} section"),
        };
        Ok(TaskWorld {
            name: name.to_string(),
            world,
            roi: file.roi.clone().ok_or_else(|| missing("roi"))?,
            behavior: file.behavior.clone().ok_or_else(|| missing("behavior"))?,
            seed,
        })
    }
}

fn desk_arm() -> ArmSpec {
    ArmSpec {
        links: vec![0.45, 0.35, 0.25],
        joint_limits: vec![(-3.05, 3.05); 3],
        base: Pose2::identity(),
        clearance: 0.02,
    }
}

/// Shelf with a back wall, a right side wall, and a left partition.
///
/// Objects sit on the shelf in a 10 cm x 10 cm patch with up to 0.32 rad
/// of yaw, gridded 25x25x8. The shelf opens toward the arm (below), so
/// the only workable grasps approach from the front; side and back
/// approaches die on the walls. Objects in the three leftmost columns
/// put the converged gripper within link clearance of the partition, so
/// every approach to them — including ones whose retracted initiation
/// pose is collision-free — ends its servo in contact: the columns keep
/// candidates, but no execution from any of them can succeed. The
/// boundary falls 2 mm past a grid column edge, so the infeasible strip
/// is exactly columns 0-2 and everything to the right is graspable.
#[must_use]
pub fn grasp_shelf() -> TaskWorld {
    let world = World {
        arm: desk_arm(),
        obstacles: vec![
            // back wall
            ConvexPolygon::rect(0.55, 0.50, 0.25, 0.02),
            // right side wall
            ConvexPolygon::rect(0.77, 0.40, 0.02, 0.12),
            // left partition; right face at x = 0.442
            ConvexPolygon::rect(0.416, 0.35, 0.026, 0.15),
        ],
        gripper: GripperSpec {
            span: 0.12,
            depth: 0.08,
        },
        home: RobotState::new(vec![-0.5, 0.3, 0.2]),
        rng_seed: 2024,
    };
    TaskWorld {
        name: "grasp_shelf".to_string(),
        world,
        roi: RegionOfInterest {
            regions: vec![RoiBox {
                x: (0.45, 0.55),
                y: (0.28, 0.38),
                theta: (0.0, 0.32),
            }],
            delta: [0.004, 0.004, 0.04],
        },
        behavior: serde_json::from_str(r#"{"name": "grasp", "K": 5}"#)
            .expect("static behavior config"),
        seed: 20240,
    }
}

/// Insertion ports far in front of the arm, with a block hanging over the
/// elbow-up sweep corridor.
///
/// Ports face right (insertion direction +x) in a 6 cm x 2 cm band near
/// the edge of the workspace, gridded 15x5x2. Both wrist postures can
/// reach every retracted pre-insertion pose, and the hanging block sits
/// entirely outside the shoulder link's disc, above the retracted upper
/// arm — so candidate filtering sees nothing wrong with either posture.
/// But as the peg advances, the elbow-up posture's rising upper-arm
/// segment sweeps up-left straight through the block: a failure only
/// execution (or a verified rehearsal of it) reveals. The elbow-down
/// posture keeps its elbow below the table line and clears everything
/// with centimeters to spare, even under the 5 mm of perception noise
/// that makes insertion the closed-loop task.
#[must_use]
pub fn corner_insertion() -> TaskWorld {
    let world = World {
        arm: desk_arm(),
        obstacles: vec![
            // elbow-catcher block over the insertion corridor; its nearest
            // corner is 5.5 cm from the base circle of radius 0.45, so the
            // shoulder link can never touch it at any joint angle
            ConvexPolygon::rect(0.47, 0.25, 0.02, 0.02),
        ],
        gripper: GripperSpec {
            span: 0.12,
            depth: 0.08,
        },
        home: RobotState::new(vec![1.2, -1.9, 0.75]),
        rng_seed: 2024,
    };
    TaskWorld {
        name: "corner_insertion".to_string(),
        world,
        roi: RegionOfInterest {
            regions: vec![RoiBox {
                x: (0.82, 0.88),
                y: (0.15, 0.17),
                theta: (-0.04, 0.04),
            }],
            delta: [0.004, 0.004, 0.04],
        },
        behavior: serde_json::from_str(
            // both wrist postures matter here, so spend extra solver
            // restarts to find them reliably for every port
            r#"{"name": "insertion", "K": 1, "noise_bound": 0.005, "ik_seeds": 32}"#,
        )
        .expect("static behavior config"),
        seed: 20241,
    }
}

/// Looks a built-in task up by name.
#[must_use]
pub fn by_name(name: &str) -> Option<TaskWorld> {
    match name {
        "grasp_shelf" => Some(grasp_shelf()),
        "corner_insertion" => Some(corner_insertion()),
        _ => None,
    }
}

/// Names of all built-in tasks.
#[must_use]
pub fn builtin_names() -> &'static [&'static str] {
    &["grasp_shelf", "corner_insertion"]
}
