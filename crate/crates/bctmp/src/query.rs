//! Online goal answering.
//!
//! Answering a goal pose is a containment lookup over the precomputed
//! library — one distance evaluation per stored attractor, nothing else —
//! followed by replaying the stored approach path and rolling the behavior
//! out toward the exact queried pose. No planning, collision checking, or
//! rollouts happen during the lookup itself; instrumentation counters
//! captured around it prove that per query. Goals outside the covered
//! region come back as `NotCovered`, and goals on cells that preprocessing
//! proved impossible come back as `ProvenInfeasible` with the recorded
//! failure class.

use crate::behavior::{self, BehaviorError, BehaviorSpec, RolloutResult};
use crate::geom::{wrap_angle, Pose2};
use crate::instrument::{self, Counters};
use crate::library::{InfeasibleClass, PlanLibrary};
use crate::planner::Path;
use crate::seeding::{self, SALT_QUERY};
use crate::tolerances::{
    EDGE_RESOLUTION, ROLLOUT_ANG_TOL, ROLLOUT_POS_TOL, VERIFY_REFINEMENT,
};
use crate::world::World;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum QueryError {
    #[error("library was built against a different {which}")]
    FingerprintMismatch { which: &'static str },
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
}

/// A complete answer: ready-made path to the initiation state plus the
/// simulated behavior execution from there to the queried pose.
#[derive(Clone, Debug)]
pub struct FullPlan {
    /// Stored collision-free path from home to the initiation state.
    pub tau: Path,
    /// Behavior execution from the end of `tau` toward `goal`.
    pub rollout: RolloutResult,
    /// Index of the serving attractor in the library.
    pub tuple_index: usize,
    /// The queried object pose.
    pub goal: Pose2,
    /// Seed the rollout ran under, kept so execution can replay it exactly.
    pub rollout_seed: u64,
    /// Wall-clock seconds spent on lookup and path retrieval alone.
    pub lookup_seconds: f64,
    /// Wall-clock seconds for the whole query including the rollout.
    pub total_seconds: f64,
}

#[derive(Clone, Debug)]
pub enum QueryOutcome {
    Plan(Box<FullPlan>),
    /// The goal lies outside every covered ball and outside the region of
    /// interest (or on a cell preprocessing never settled).
    NotCovered,
    /// Preprocessing proved this goal's cell impossible.
    ProvenInfeasible(InfeasibleClass),
}

#[derive(Clone, Debug)]
pub struct QueryReport {
    pub outcome: QueryOutcome,
    pub lookup_seconds: f64,
    pub total_seconds: f64,
    /// Instrumentation delta over the lookup phase only. Planning,
    /// collision, and rollout counts must be zero here; distance
    /// evaluations must equal the library size.
    pub lookup_counters: Counters,
}

/// Answers one goal pose against a preprocessed library.
///
/// Fingerprints are checked first so a stale library can never serve plans
/// for a world it was not built in. The lookup scans every tuple
/// regardless of the goal — cost is a function of the library alone.
pub fn query(
    world: &World,
    library: &PlanLibrary,
    w_g: &Pose2,
    spec: &BehaviorSpec,
    seed: u64,
) -> Result<QueryReport, QueryError> {
    if library.world_fingerprint != world.fingerprint() {
        return Err(QueryError::FingerprintMismatch { which: "world" });
    }
    if library.behavior_fingerprint != spec.fingerprint() {
        return Err(QueryError::FingerprintMismatch { which: "behavior" });
    }
    let perception = spec.perception();

    let total_start = Instant::now();
    let before = instrument::snapshot();
    let lookup_start = Instant::now();
    let retrieved = library
        .find_containing_tuple(w_g)
        .map(|(index, tuple)| (index, tuple.s_attr.clone(), tuple.tau.clone()));
    let lookup_seconds = lookup_start.elapsed().as_secs_f64();
    let lookup_counters = instrument::snapshot().since(&before);

    let mut outcome = if !library.roi.contains(w_g) {
        QueryOutcome::NotCovered
    } else if let Some((index, s_attr, tau)) = retrieved {
        let rollout_seed = seeding::mix(
            seed,
            &[SALT_QUERY, seeding::pose_bits(w_g.x, w_g.y, w_g.theta)],
        );
        let rollout = behavior::rollout(world, spec, &s_attr, w_g, &perception, rollout_seed)?;
        QueryOutcome::Plan(Box::new(FullPlan {
            tau,
            rollout,
            tuple_index: index,
            goal: *w_g,
            rollout_seed,
            lookup_seconds,
            total_seconds: 0.0,
        }))
    } else {
        match library.roi.cell_of(w_g).and_then(|c| library.infeasible_class(c)) {
            Some(class) => QueryOutcome::ProvenInfeasible(class),
            None => QueryOutcome::NotCovered,
        }
    };

    let total_seconds = total_start.elapsed().as_secs_f64();
    if let QueryOutcome::Plan(plan) = &mut outcome {
        plan.total_seconds = total_seconds;
    }
    Ok(QueryReport {
        outcome,
        lookup_seconds,
        total_seconds,
        lookup_counters,
    })
}

// ─── plan execution ───

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExecutionFault {
    /// Path segment `index` (between waypoints `index` and `index + 1`)
    /// failed the refined collision sweep.
    PathSegment { index: usize },
    /// The behavior trajectory does not start where the path ends.
    Discontinuity,
    /// Behavior trajectory state `index` is in collision.
    BehaviorState { index: usize },
    /// Replaying the rollout under the stored seed did not reproduce it.
    RolloutDiverged,
    /// Final end-effector pose missed the behavior's terminal key pose.
    TerminalPose,
}

#[derive(Clone, Debug)]
pub struct ExecutionReport {
    pub success: bool,
    pub path_waypoints: usize,
    pub behavior_steps: usize,
    /// Final end-effector position error against the terminal key pose.
    pub position_error: f64,
    /// Final end-effector heading error against the terminal key pose.
    pub angle_error: f64,
    pub faults: Vec<ExecutionFault>,
}

/// Re-simulates a full plan against the world and reports every violation
/// instead of trusting the stored result.
///
/// The path is swept at twice the planning resolution, every behavior
/// state is point-checked, and the rollout is replayed under its stored
/// seed — a plan only passes if the replay reproduces the stored
/// trajectory and the final end-effector pose lands on the terminal key
/// pose within the behavior's own convergence tolerances.
#[must_use]
pub fn execute_plan(world: &World, spec: &BehaviorSpec, plan: &FullPlan) -> ExecutionReport {
    let mut faults = Vec::new();
    let fine = EDGE_RESOLUTION / VERIFY_REFINEMENT;
    for (index, pair) in plan.tau.waypoints.windows(2).enumerate() {
        if !world
            .edge_collision_free(&pair[0], &pair[1], fine)
            .unwrap_or(false)
        {
            faults.push(ExecutionFault::PathSegment { index });
        }
    }

    let trajectory = &plan.rollout.trajectory;
    match (plan.tau.waypoints.last(), trajectory.first()) {
        (Some(end), Some(start)) if end == start => {}
        _ => faults.push(ExecutionFault::Discontinuity),
    }
    for (index, state) in trajectory.iter().enumerate() {
        if world.in_collision(state).unwrap_or(true) {
            faults.push(ExecutionFault::BehaviorState { index });
        }
    }

    match plan.tau.waypoints.last() {
        Some(start) => {
            let replay = behavior::rollout(
                world,
                spec,
                start,
                &plan.goal,
                &spec.perception(),
                plan.rollout_seed,
            );
            match replay {
                Ok(result) if result.success && result.trajectory == *trajectory => {}
                _ => faults.push(ExecutionFault::RolloutDiverged),
            }
        }
        None => faults.push(ExecutionFault::RolloutDiverged),
    }

    let (position_error, angle_error) = match trajectory.last() {
        Some(final_state) => match world.forward_kinematics(final_state) {
            Ok(ee) => {
                let target = plan.rollout.terminal_target;
                let dx = ee.x - target.x;
                let dy = ee.y - target.y;
                (
                    (dx * dx + dy * dy).sqrt(),
                    wrap_angle(ee.theta - target.theta).abs(),
                )
            }
            Err(_) => (f64::INFINITY, f64::INFINITY),
        },
        None => (f64::INFINITY, f64::INFINITY),
    };
    if position_error > ROLLOUT_POS_TOL || angle_error > ROLLOUT_ANG_TOL {
        faults.push(ExecutionFault::TerminalPose);
    }

    ExecutionReport {
        success: faults.is_empty(),
        path_waypoints: plan.tau.waypoints.len(),
        behavior_steps: trajectory.len().saturating_sub(1),
        position_error,
        angle_error,
        faults,
    }
}

// ─── timing ───

#[derive(Clone, Copy, Debug)]
pub struct TimingStats {
    pub p50_seconds: f64,
    pub p99_seconds: f64,
    pub max_seconds: f64,
    /// Distance evaluations performed by every single lookup — identical
    /// across queries by construction, asserted here.
    pub evals_per_query: u64,
    pub queries: usize,
}

/// Measures lookup cost alone over a batch of goals.
///
/// Every lookup must spend exactly the same number of distance
/// evaluations — one per stored tuple — or this panics, because that
/// uniformity is the structural guarantee the timing numbers rest on.
#[must_use]
pub fn timing_probe(library: &PlanLibrary, goals: &[Pose2]) -> TimingStats {
    assert!(!goals.is_empty(), "timing probe needs at least one goal");
    let mut times = Vec::with_capacity(goals.len());
    let mut evals_per_query = None;
    for goal in goals {
        let before = instrument::snapshot();
        let start = Instant::now();
        let hit = library.find_containing_tuple(goal);
        let elapsed = start.elapsed().as_secs_f64();
        std::hint::black_box(hit);
        let evals = instrument::snapshot().since(&before).distance_evals;
        match evals_per_query {
            None => evals_per_query = Some(evals),
            Some(expected) => assert_eq!(
                evals, expected,
                "lookup cost must not depend on the goal"
            ),
        }
        times.push(elapsed);
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let rank = |q: f64| {
        let n = times.len();
        let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
        times[idx]
    };
    TimingStats {
        p50_seconds: rank(0.50),
        p99_seconds: rank(0.99),
        max_seconds: *times.last().expect("non-empty"),
        evals_per_query: evals_per_query.unwrap_or(0),
        queries: goals.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::ConvexPolygon;
    use crate::planner::PlannerBudget;
    use crate::preprocess;
    use crate::roi::{RegionOfInterest, RoiBox};
    use crate::world::{ArmSpec, GripperSpec, RobotState};

    fn grasp_spec() -> BehaviorSpec {
        serde_json::from_str(r#"{"name": "grasp", "K": 5}"#).unwrap()
    }

    fn free_world() -> World {
        World {
            arm: ArmSpec {
                links: vec![0.45, 0.35, 0.25],
                joint_limits: vec![(-3.05, 3.05); 3],
                base: Pose2::identity(),
                clearance: 0.02,
            },
            obstacles: Vec::new(),
            gripper: GripperSpec {
                span: 0.12,
                depth: 0.08,
            },
            home: RobotState::new(vec![0.4, 0.6, 0.5]),
            rng_seed: 7,
        }
    }

    fn patch_roi() -> RegionOfInterest {
        RegionOfInterest {
            regions: vec![RoiBox {
                x: (0.45, 0.55),
                y: (0.1, 0.2),
                theta: (0.0, 0.4),
            }],
            delta: [0.025, 0.025, 0.2],
        }
    }

    fn walled_setup() -> (World, RegionOfInterest, BehaviorSpec, PlanLibrary) {
        let mut world = free_world();
        world.obstacles = vec![ConvexPolygon::rect(0.62, 0.15, 0.07, 0.1)];
        let roi = patch_roi();
        let spec = grasp_spec();
        let lib =
            preprocess::preprocess(&world, &roi, &spec, &PlannerBudget::default(), 3).unwrap();
        (world, roi, spec, lib)
    }

    fn open_setup() -> (World, RegionOfInterest, BehaviorSpec, PlanLibrary) {
        let world = free_world();
        let roi = patch_roi();
        let spec = grasp_spec();
        let lib =
            preprocess::preprocess(&world, &roi, &spec, &PlannerBudget::default(), 3).unwrap();
        (world, roi, spec, lib)
    }

    #[test]
    fn attractor_pose_query_returns_a_working_plan() {
        let (world, _, spec, lib) = open_setup();
        let goal = lib.tuples[0].w_attr;
        let report = query(&world, &lib, &goal, &spec, 41).unwrap();
        let plan = match report.outcome {
            QueryOutcome::Plan(plan) => plan,
            other => panic!("expected a plan, got {other:?}"),
        };
        assert!(plan.rollout.success);
        assert_eq!(plan.tuple_index, 0);
        assert_eq!(
            plan.tau.waypoints.last().unwrap(),
            &lib.tuples[0].s_attr,
            "path must deliver the initiation state"
        );
        assert_eq!(
            plan.rollout.trajectory.first().unwrap(),
            plan.tau.waypoints.last().unwrap(),
            "behavior starts where the path ends"
        );
    }

    #[test]
    fn lookup_phase_does_no_planning_work() {
        let (world, roi, spec, lib) = walled_setup();
        assert!(lib.tuples.len() > 1, "need a multi-tuple library");
        let goals = [
            lib.tuples[0].w_attr,
            roi.center(roi.cells().last().unwrap()),
            Pose2::new(5.0, 5.0, 0.0),
        ];
        for goal in goals {
            let report = query(&world, &lib, &goal, &spec, 1).unwrap();
            let c = report.lookup_counters;
            assert_eq!(c.plan_calls, 0, "no planning during lookup");
            assert_eq!(c.collision_checks, 0, "no collision checks during lookup");
            assert_eq!(c.edge_checks, 0, "no edge checks during lookup");
            assert_eq!(c.rollout_calls, 0, "no rollouts during lookup");
            assert_eq!(
                c.distance_evals,
                lib.tuples.len() as u64,
                "one distance evaluation per tuple, for every goal"
            );
        }
    }

    #[test]
    fn every_roi_cell_gets_plan_or_infeasibility_never_silence() {
        let (world, roi, spec, lib) = walled_setup();
        let mut plans = 0usize;
        let mut infeasible = 0usize;
        for cell in roi.cells() {
            let goal = roi.center(cell);
            let report = query(&world, &lib, &goal, &spec, 9).unwrap();
            match report.outcome {
                QueryOutcome::Plan(plan) => {
                    assert!(plan.rollout.success, "served plan must work at {goal:?}");
                    plans += 1;
                }
                QueryOutcome::ProvenInfeasible(class) => {
                    assert_eq!(lib.infeasible_class(cell), Some(class));
                    infeasible += 1;
                }
                QueryOutcome::NotCovered => {
                    panic!("cell {cell:?} inside the region must never be NotCovered")
                }
            }
        }
        assert!(plans > 0, "some cells are feasible");
        assert!(infeasible > 0, "the wall makes some cells infeasible");
    }

    #[test]
    fn outside_the_region_is_not_covered() {
        let (world, _, spec, lib) = open_setup();
        let report = query(&world, &lib, &Pose2::new(5.0, 5.0, 0.0), &spec, 1).unwrap();
        assert!(matches!(report.outcome, QueryOutcome::NotCovered));
        // even just past the region edge, with tuples nearby
        let report = query(&world, &lib, &Pose2::new(0.5, 0.25, 0.2), &spec, 1).unwrap();
        assert!(matches!(report.outcome, QueryOutcome::NotCovered));
    }

    #[test]
    fn stale_library_is_rejected_by_fingerprint() {
        let (world, _, spec, lib) = open_setup();
        let mut moved_world = world.clone();
        moved_world.obstacles = vec![ConvexPolygon::rect(0.0, -0.5, 0.05, 0.05)];
        let err = query(&moved_world, &lib, &Pose2::identity(), &spec, 1).unwrap_err();
        assert!(matches!(
            err,
            QueryError::FingerprintMismatch { which: "world" }
        ));
        let other_spec: BehaviorSpec =
            serde_json::from_str(r#"{"name": "grasp", "K": 3}"#).unwrap();
        let err = query(&world, &lib, &Pose2::identity(), &other_spec, 1).unwrap_err();
        assert!(matches!(
            err,
            QueryError::FingerprintMismatch { which: "behavior" }
        ));
    }

    #[test]
    fn execution_revalidates_a_fresh_plan() {
        let (world, roi, spec, lib) = open_setup();
        // an off-center pose inside some ball, not an attractor itself
        let cell = roi.cells().nth(7).unwrap();
        let mut goal = roi.center(cell);
        goal.x += 0.004;
        goal.theta += 0.01;
        let report = query(&world, &lib, &goal, &spec, 23).unwrap();
        let plan = match report.outcome {
            QueryOutcome::Plan(plan) => plan,
            other => panic!("expected a plan, got {other:?}"),
        };
        let exec = execute_plan(&world, &spec, &plan);
        assert!(exec.success, "faults: {:?}", exec.faults);
        assert!(exec.position_error <= ROLLOUT_POS_TOL);
        assert!(exec.angle_error <= ROLLOUT_ANG_TOL);
        assert_eq!(exec.path_waypoints, plan.tau.waypoints.len());
        assert_eq!(exec.behavior_steps, plan.rollout.trajectory.len() - 1);
    }

    #[test]
    fn corrupted_waypoint_is_flagged_by_segment() {
        let (world, _, spec, lib) = open_setup();
        let goal = lib.tuples[0].w_attr;
        let report = query(&world, &lib, &goal, &spec, 5).unwrap();
        let mut plan = match report.outcome {
            QueryOutcome::Plan(plan) => plan,
            other => panic!("expected a plan, got {other:?}"),
        };
        // splice in a self-colliding waypoint mid-path
        let folded = RobotState::new(vec![0.0, 2.9, 2.9]);
        assert!(world.in_collision(&folded).unwrap());
        plan.tau.waypoints.insert(1, folded);
        let exec = execute_plan(&world, &spec, &plan);
        assert!(!exec.success);
        assert!(
            exec.faults
                .iter()
                .any(|f| matches!(f, ExecutionFault::PathSegment { index: 0 | 1 })),
            "a segment touching the corrupt waypoint must be flagged: {:?}",
            exec.faults
        );
    }

    #[test]
    fn single_waypoint_path_executes_behavior_only() {
        let (world, _, spec, lib) = open_setup();
        let tuple = &lib.tuples[0];
        let rollout_seed = 77;
        let rollout = behavior::rollout(
            &world,
            &spec,
            &tuple.s_attr,
            &tuple.w_attr,
            &spec.perception(),
            rollout_seed,
        )
        .unwrap();
        assert!(rollout.success);
        let plan = FullPlan {
            tau: Path {
                waypoints: vec![tuple.s_attr.clone()],
            },
            rollout,
            tuple_index: 0,
            goal: tuple.w_attr,
            rollout_seed,
            lookup_seconds: 0.0,
            total_seconds: 0.0,
        };
        let exec = execute_plan(&world, &spec, &plan);
        assert!(exec.success, "faults: {:?}", exec.faults);
        assert_eq!(exec.path_waypoints, 1);
    }

    #[test]
    fn timing_probe_counts_are_query_independent() {
        let (_, roi, _, lib) = walled_setup();
        let goals: Vec<Pose2> = roi
            .cells()
            .map(|c| roi.center(c))
            .chain([Pose2::new(3.0, 3.0, 1.0)])
            .collect();
        let stats = timing_probe(&lib, &goals);
        assert_eq!(stats.evals_per_query, lib.tuples.len() as u64);
        assert_eq!(stats.queries, goals.len());
        assert!(stats.p50_seconds <= stats.p99_seconds);
        assert!(stats.p99_seconds <= stats.max_seconds);
    }

    #[test]
    fn single_tuple_library_costs_one_evaluation_per_query() {
        let world = free_world();
        let roi = RegionOfInterest {
            regions: vec![RoiBox {
                x: (0.5, 0.52),
                y: (0.15, 0.17),
                theta: (0.1, 0.2),
            }],
            delta: [0.02, 0.02, 0.1],
        };
        let spec = grasp_spec();
        let lib =
            preprocess::preprocess(&world, &roi, &spec, &PlannerBudget::default(), 3).unwrap();
        assert_eq!(lib.tuples.len(), 1);
        let stats = timing_probe(&lib, &[roi.center(roi.cells().next().unwrap())]);
        assert_eq!(stats.evals_per_query, 1);
    }
}
