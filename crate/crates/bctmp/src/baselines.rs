//! Comparison planners sharing the library planner's behaviors and worlds.
//!
//! Three alternatives answer the same "plan for object pose w" question
//! without a verified neighborhood library, each paying a different price:
//!
//! * **online** — searches initiation states and plans from scratch at
//!   query time, committing to the first candidate it can reach;
//! * **roadmap** — the same search seeded by a precomputed roadmap, trading
//!   memory for planning time;
//! * **pose table** — stores paths into a hand-authored end-effector
//!   region and snaps queries to the nearest stored terminal, standing in
//!   for preprocessing approaches whose initiation region must be guessed
//!   by hand.
//!
//! All three run the shared collision checker, planners, and behavior
//! policies, so benchmark differences measure strategy, not plumbing. A
//! trial ends in exactly one stage: no initiation candidate, no reachable
//! candidate within budget, a behavior execution that missed, or success.
//! Committing to the first reachable candidate is the operative weakness:
//! reaching an initiation state says nothing about whether the behavior
//! will succeed from it, and the benchmark worlds are built to make that
//! distinction visible.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::behavior::{self, BehaviorSpec};
use crate::geom::Pose2;
use crate::library::{PlanLibrary, PoseTableEntry};
use crate::planner::{self, PlannerBudget, Roadmap};
use crate::roi::{RegionOfInterest, RoiBox};
use crate::seeding::{
    self, SALT_BASELINE_PLAN, SALT_BASELINE_ROLLOUT, SALT_POSE_TABLE, SALT_ROADMAP,
};
use crate::tolerances::POSE_TABLE_SNAP;
use crate::world::{RobotState, World, WorldError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ─── trial vocabulary ───────────────────────────────────────────────────

/// Where a trial stopped. `None` is the success label, so every record
/// carries exactly one stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureStage {
    /// No initiation candidate existed for the goal pose.
    InitStateSearch,
    /// Candidates existed but none could be reached within budget.
    MotionPlanning,
    /// A candidate was reached but the behavior execution failed.
    BehaviorExecution,
    /// The trial succeeded.
    None,
}

impl FailureStage {
    /// Fixed label used in result tables.
    #[must_use]
    pub fn label(self) -> &'static str {
        match self {
            FailureStage::InitStateSearch => "init_state_search",
            FailureStage::MotionPlanning => "motion_planning",
            FailureStage::BehaviorExecution => "behavior_execution",
            FailureStage::None => "none",
        }
    }
}

/// One planner's outcome on one trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub success: bool,
    /// Online seconds until a plan was committed or the attempt gave up;
    /// behavior execution time is excluded.
    pub planning_seconds: f64,
    pub stage: FailureStage,
}

impl TrialOutcome {
    /// Couples `success` to the stage so the two can never disagree.
    #[must_use]
    pub fn at_stage(stage: FailureStage, planning_seconds: f64) -> Self {
        TrialOutcome {
            success: stage == FailureStage::None,
            planning_seconds,
            stage,
        }
    }
}

/// One benchmark goal: an object pose and the seed all planners must use
/// on it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialGoal {
    pub goal: Pose2,
    pub seed: u64,
}

/// A reproducible set of goals every planner answers under the same
/// timeout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSet {
    pub world: String,
    pub behavior: String,
    pub timeout_seconds: f64,
    pub goals: Vec<TrialGoal>,
}

// ─── from-scratch online baseline ───────────────────────────────────────

/// Runs one trial by searching initiation states online, planning to the
/// candidates in ranked order, and executing the behavior from the first
/// one reached. The whole attempt shares `budget.timeout` as a deadline.
#[must_use]
pub fn run_online_baseline(
    world: &World,
    spec: &BehaviorSpec,
    goal: &Pose2,
    budget: &PlannerBudget,
    seed: u64,
) -> TrialOutcome {
    let t0 = Instant::now();
    let deadline = t0 + budget.timeout;
    let states = match behavior::get_init_states(world, spec, goal) {
        Ok(s) if !s.is_empty() => s,
        _ => return TrialOutcome::at_stage(FailureStage::InitStateSearch, seconds_since(t0)),
    };
    for (j, q) in states.iter().enumerate() {
        let Some(remaining) = deadline.checked_duration_since(Instant::now()) else {
            break;
        };
        let per_call = PlannerBudget {
            max_iterations: budget.max_iterations,
            timeout: remaining,
        };
        let plan = planner::plan_path(
            world,
            &world.home,
            q,
            &per_call,
            seeding::mix(seed, &[SALT_BASELINE_PLAN, j as u64]),
        );
        let Ok(Some(path)) = plan else { continue };
        // committed: reaching an initiation state is no guarantee the
        // behavior will succeed from it
        let planning_seconds = seconds_since(t0);
        let reached = path.waypoints.last().expect("paths are never empty");
        return TrialOutcome::at_stage(
            execution_stage(world, spec, reached, goal, seed, j),
            planning_seconds,
        );
    }
    TrialOutcome::at_stage(FailureStage::MotionPlanning, seconds_since(t0))
}

// ─── roadmap-seeded baseline ────────────────────────────────────────────

/// As [`run_online_baseline`], but planning over a precomputed roadmap.
/// Roadmap construction happens offline; only the per-query graph search
/// counts as planning time here.
#[must_use]
pub fn run_prm_baseline(
    world: &World,
    roadmap: &Roadmap,
    spec: &BehaviorSpec,
    goal: &Pose2,
    budget: &PlannerBudget,
    seed: u64,
) -> TrialOutcome {
    let t0 = Instant::now();
    let deadline = t0 + budget.timeout;
    let states = match behavior::get_init_states(world, spec, goal) {
        Ok(s) if !s.is_empty() => s,
        _ => return TrialOutcome::at_stage(FailureStage::InitStateSearch, seconds_since(t0)),
    };
    for (j, q) in states.iter().enumerate() {
        if Instant::now() > deadline {
            break;
        }
        let plan = planner::plan_on_roadmap(
            world,
            roadmap,
            &world.home,
            q,
            seeding::mix(seed, &[SALT_BASELINE_PLAN, j as u64]),
        );
        let Ok(Some(path)) = plan else { continue };
        let planning_seconds = seconds_since(t0);
        let reached = path.waypoints.last().expect("paths are never empty");
        return TrialOutcome::at_stage(
            execution_stage(world, spec, reached, goal, seed, j),
            planning_seconds,
        );
    }
    TrialOutcome::at_stage(FailureStage::MotionPlanning, seconds_since(t0))
}

/// Builds the roadmap-planner artifact: an otherwise-empty library whose
/// memory cost is the roadmap itself.
pub fn build_prm_library(
    world: &World,
    spec: &BehaviorSpec,
    roi: &RegionOfInterest,
    vertices: usize,
    connect_radius: f64,
    seed: u64,
) -> Result<PlanLibrary, planner::PlanError> {
    let roadmap = planner::build_roadmap(
        world,
        vertices,
        connect_radius,
        seeding::mix(seed, &[SALT_ROADMAP]),
    )?;
    let mut library = PlanLibrary::new(world, spec, roi.clone(), Default::default(), seed);
    library.roadmap = Some(roadmap);
    Ok(library)
}

// ─── stored-path pose-table baseline ────────────────────────────────────

/// Builds the pose-table artifact: up to `samples` paths from home into
/// the hand-authored end-effector `region`, stored with their terminal
/// poses. How well this works depends entirely on how well `region` was
/// guessed — that guess is the burden this baseline exists to measure.
pub fn build_pose_table_library(
    world: &World,
    spec: &BehaviorSpec,
    roi: &RegionOfInterest,
    region: &RoiBox,
    samples: usize,
    budget: &PlannerBudget,
    seed: u64,
) -> Result<PlanLibrary, WorldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::mix(seed, &[SALT_POSE_TABLE]));
    let mut entries = Vec::new();
    let mut attempts = 0usize;
    while entries.len() < samples && attempts < 50 * samples.max(1) {
        attempts += 1;
        let target = Pose2::new(
            rng.gen_range(region.x.0..=region.x.1),
            rng.gen_range(region.y.0..=region.y.1),
            rng.gen_range(region.theta.0..=region.theta.1),
        );
        // first reachable solution only: the table stores poses, not the
        // full solution set
        let Some(state) = world
            .inverse_kinematics(&target, spec.ik_seeds)
            .into_iter()
            .find(|q| matches!(world.in_collision(q), Ok(false)))
        else {
            continue;
        };
        let plan = planner::plan_path(
            world,
            &world.home,
            &state,
            budget,
            seeding::mix(seed, &[SALT_POSE_TABLE, attempts as u64]),
        );
        let Ok(Some(tau)) = plan else { continue };
        let pose = world.forward_kinematics(&state)?;
        entries.push(PoseTableEntry { pose, state, tau });
    }
    let mut library = PlanLibrary::new(world, spec, roi.clone(), Default::default(), seed);
    library.pose_table = Some(entries);
    Ok(library)
}

/// Runs one trial by snapping to the stored path whose terminal pose is
/// nearest one of the goal's computed initiation poses. No stored terminal
/// within [`POSE_TABLE_SNAP`] means the table has no usable plan.
#[must_use]
pub fn run_vanilla_ctmp_baseline(
    world: &World,
    library: &PlanLibrary,
    spec: &BehaviorSpec,
    goal: &Pose2,
    seed: u64,
) -> TrialOutcome {
    let t0 = Instant::now();
    let states = match behavior::get_init_states(world, spec, goal) {
        Ok(s) if !s.is_empty() => s,
        _ => return TrialOutcome::at_stage(FailureStage::InitStateSearch, seconds_since(t0)),
    };
    let table = library.pose_table.as_deref().unwrap_or(&[]);
    let mut best: Option<(usize, f64)> = None;
    for q in &states {
        let Ok(want) = world.forward_kinematics(q) else {
            continue;
        };
        for (i, entry) in table.iter().enumerate() {
            let d = library.metric.distance(&want, &entry.pose);
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((i, d));
            }
        }
    }
    match best {
        Some((i, d)) if d <= POSE_TABLE_SNAP => {
            let planning_seconds = seconds_since(t0);
            let entry = &table[i];
            TrialOutcome::at_stage(
                execution_stage(world, spec, &entry.state, goal, seed, i),
                planning_seconds,
            )
        }
        // a populated table can still be useless for this goal: the hand
        // region simply failed to cover its initiation poses
        _ => TrialOutcome::at_stage(FailureStage::MotionPlanning, seconds_since(t0)),
    }
}

// ─── shared helpers ─────────────────────────────────────────────────────

fn seconds_since(t0: Instant) -> f64 {
    t0.elapsed().as_secs_f64()
}

/// Executes the behavior from `reached` and labels the outcome.
fn execution_stage(
    world: &World,
    spec: &BehaviorSpec,
    reached: &RobotState,
    goal: &Pose2,
    seed: u64,
    candidate: usize,
) -> FailureStage {
    let ok = behavior::rollout(
        world,
        spec,
        reached,
        goal,
        &spec.perception(),
        seeding::mix(seed, &[SALT_BASELINE_ROLLOUT, candidate as u64]),
    )
    .map(|r| r.success)
    .unwrap_or(false);
    if ok {
        FailureStage::None
    } else {
        FailureStage::BehaviorExecution
    }
}
