//! Benchmark harness comparing the library planner against the baselines.
//!
//! A run is described by one JSON config — world, behavior, trial count,
//! timeout, planner list, seed — and produces a directory of artifacts:
//!
//! * `results.csv` — one row per (planner, trial) with success and failure
//!   stage; deterministic, byte-identical across reruns of the same config;
//! * `aggregate.json` — per-planner success counts, stage histograms,
//!   memory bytes, and the lookup instrumentation audit; deterministic;
//! * `timings.csv`, `timing_summary.json` — wall-clock planning times,
//!   percentiles, offline build times, and the lookup-vs-planning
//!   comparison; these necessarily vary run to run;
//! * `plotdata/*.csv` — small per-figure tables for the plotting script.
//!
//! Fairness is structural: every planner answers the identical goal list
//! under the same per-trial seed and timeout, and all of them call the
//! same collision checker, planners, and behavior policies. Goals are
//! drawn from the covered cells of the preprocessed library, i.e. from
//! goals proven answerable, so success differences expose planner
//! strategy rather than impossible asks. Offline costs (preprocessing,
//! roadmap construction, pose-table construction) are reported separately
//! from online times and never mixed into them.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path as FsPath;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{
    build_pose_table_library, build_prm_library, run_online_baseline, run_prm_baseline,
    run_vanilla_ctmp_baseline, FailureStage, TrialGoal, TrialOutcome, TrialSet,
};
use crate::geom::Pose2;
use crate::instrument::Counters;
use crate::library::{InfeasibleClass, LibraryError, PlanLibrary};
use crate::planner::{PlanError, PlannerBudget};
use crate::preprocess::{self, PreprocessError};
use crate::query::{self, QueryError, QueryOutcome};
use crate::roi::RoiBox;
use crate::seeding::{self, SALT_TRIAL, SALT_TRIALS};
use crate::world::WorldError;
use crate::worlds::{self, TaskWorld};

// ─── configuration ──────────────────────────────────────────────────────

/// The four planners a benchmark can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerId {
    /// Constant-time lookup over the preprocessed attractor library.
    Bctmp,
    /// From-scratch online planning to sampled initiation states.
    Online,
    /// Online planning seeded by a precomputed roadmap.
    Prm,
    /// Stored paths into a hand-authored region with nearest-pose snap.
    Vctmp,
}

impl PlannerId {
    pub const ALL: [PlannerId; 4] = [
        PlannerId::Bctmp,
        PlannerId::Online,
        PlannerId::Prm,
        PlannerId::Vctmp,
    ];

    /// Fixed id used in configs, CSV columns, and JSON keys.
    #[must_use]
    pub fn label(self) -> &'static str {
        match self {
            PlannerId::Bctmp => "bctmp",
            PlannerId::Online => "online",
            PlannerId::Prm => "prm",
            PlannerId::Vctmp => "vctmp",
        }
    }
}

fn default_prm_vertices() -> usize {
    300
}

fn default_prm_radius() -> f64 {
    2.0
}

fn default_pose_table_samples() -> usize {
    400
}

/// One benchmark run, as read from a JSON config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Built-in task world id.
    pub world: String,
    /// Behavior id; must match the behavior the world ships with.
    pub behavior: String,
    /// Number of goals, drawn over the library's covered cells.
    pub trials: usize,
    /// Per-trial online planning timeout in seconds.
    pub timeout_s: f64,
    /// Which planners to run, in output order.
    pub planners: Vec<PlannerId>,
    /// Master seed for goal sampling and per-trial randomness.
    pub seed: u64,
    /// Hand-authored end-effector box for the pose-table planner. Built-in
    /// worlds carry a tuned default; supplying a box here overrides it.
    /// How well this box overlaps the behavior's initiation poses decides
    /// that planner's fate — the manual-tuning burden is the point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vctmp_region: Option<RoiBox>,
    /// Roadmap size for the roadmap-seeded planner.
    #[serde(default = "default_prm_vertices")]
    pub prm_vertices: usize,
    /// Roadmap connection radius (joint-space).
    #[serde(default = "default_prm_radius")]
    pub prm_radius: f64,
    /// Stored-path count for the pose-table planner.
    #[serde(default = "default_pose_table_samples")]
    pub pose_table_samples: usize,
}

impl BenchConfig {
    /// Reads and validates a config file.
    pub fn from_file(path: &FsPath) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: BenchConfig =
            serde_json::from_str(&text).map_err(|source| BenchError::Json {
                path: path.display().to_string(),
                source,
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if !(self.timeout_s.is_finite() && self.timeout_s > 0.0) {
            return Err(BenchError::Config(format!(
                "timeout_s must be a positive number, got {}",
                self.timeout_s
            )));
        }
        for (i, p) in self.planners.iter().enumerate() {
            if self.planners[..i].contains(p) {
                return Err(BenchError::Config(format!(
                    "planner {:?} listed twice",
                    p.label()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid bench config: {0}")]
    Config(String),
    #[error("unknown world {got:?}; built-in worlds are {available:?}")]
    UnknownWorld { got: String, available: String },
    #[error("world {world:?} ships behavior {available:?}, config asked for {got:?}")]
    BehaviorMismatch {
        world: String,
        available: String,
        got: String,
    },
    #[error(
        "world {0:?} has no built-in hand region for the pose-table planner; \
         supply one in the config as vctmp_region"
    )]
    MissingHandRegion(String),
    #[error("library covers zero cells, so no feasible goals can be drawn")]
    NoFeasibleGoals,
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

// ─── artifacts ──────────────────────────────────────────────────────────

/// Everything a benchmark needs built before the first trial runs.
pub struct BenchArtifacts {
    /// The preprocessed attractor library (also the source of trial goals).
    pub library: PlanLibrary,
    /// Roadmap artifact, present when the roadmap planner runs.
    pub prm: Option<PlanLibrary>,
    /// Pose-table artifact, present when the pose-table planner runs.
    pub vctmp: Option<PlanLibrary>,
    /// Offline construction seconds per planner artifact.
    pub offline_seconds: BTreeMap<PlannerId, f64>,
}

/// The tuned hand region shipped with each built-in world: the
/// end-effector box an operator who studied the task would author for the
/// pose-table planner.
#[must_use]
pub fn default_hand_region(world: &str) -> Option<RoiBox> {
    match world {
        // pre-grasp slab below the shelf openings, gripper pointing up
        "grasp_shelf" => Some(RoiBox {
            x: (0.45, 0.55),
            y: (0.17, 0.29),
            theta: (1.50, 1.95),
        }),
        // pre-insertion band retracted from the ports, peg pointing right
        "corner_insertion" => Some(RoiBox {
            x: (0.71, 0.79),
            y: (0.14, 0.18),
            theta: (-0.05, 0.05),
        }),
        _ => None,
    }
}

/// Builds (or rebuilds) every artifact the config's planner list needs.
/// Artifacts are seeded from the task, not the trial seed, so changing
/// the goal draw never changes the libraries being measured.
pub fn build_artifacts(
    task: &TaskWorld,
    config: &BenchConfig,
) -> Result<BenchArtifacts, BenchError> {
    let budget = PlannerBudget::default();
    let mut offline_seconds = BTreeMap::new();

    let t0 = Instant::now();
    let library = preprocess::preprocess(&task.world, &task.roi, &task.behavior, &budget, task.seed)?;
    offline_seconds.insert(PlannerId::Bctmp, t0.elapsed().as_secs_f64());
    offline_seconds.insert(PlannerId::Online, 0.0);

    let prm = if config.planners.contains(&PlannerId::Prm) {
        let t0 = Instant::now();
        let artifact = build_prm_library(
            &task.world,
            &task.behavior,
            &task.roi,
            config.prm_vertices,
            config.prm_radius,
            task.seed,
        )?;
        offline_seconds.insert(PlannerId::Prm, t0.elapsed().as_secs_f64());
        Some(artifact)
    } else {
        None
    };

    let vctmp = if config.planners.contains(&PlannerId::Vctmp) {
        let region = config
            .vctmp_region
            .clone()
            .or_else(|| default_hand_region(&task.name))
            .ok_or_else(|| BenchError::MissingHandRegion(task.name.clone()))?;
        let t0 = Instant::now();
        let artifact = build_pose_table_library(
            &task.world,
            &task.behavior,
            &task.roi,
            &region,
            config.pose_table_samples,
            &budget,
            task.seed,
        )?;
        offline_seconds.insert(PlannerId::Vctmp, t0.elapsed().as_secs_f64());
        Some(artifact)
    } else {
        None
    };

    Ok(BenchArtifacts {
        library,
        prm,
        vctmp,
        offline_seconds,
    })
}

// ─── trial generation ───────────────────────────────────────────────────

/// Centers of every cell the library covers, in grid order.
#[must_use]
pub fn covered_cell_centers(library: &PlanLibrary) -> Vec<Pose2> {
    (0..library.roi.cell_count())
        .filter_map(|lin| {
            let center = library.roi.center(library.roi.from_linear(lin)?);
            library
                .find_containing_tuple(&center)
                .is_some()
                .then_some(center)
        })
        .collect()
}

/// Draws the goal list every planner will answer: uniform over covered
/// cell centers, with replacement, reproducible from the config seed.
pub fn trial_set(
    task: &TaskWorld,
    library: &PlanLibrary,
    config: &BenchConfig,
) -> Result<TrialSet, BenchError> {
    let centers = covered_cell_centers(library);
    if centers.is_empty() && config.trials > 0 {
        return Err(BenchError::NoFeasibleGoals);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::mix(config.seed, &[SALT_TRIALS]));
    let goals = (0..config.trials)
        .map(|t| TrialGoal {
            goal: centers[rng.gen_range(0..centers.len())],
            seed: seeding::mix(config.seed, &[SALT_TRIAL, t as u64]),
        })
        .collect();
    Ok(TrialSet {
        world: task.name.clone(),
        behavior: task.behavior.name.clone(),
        timeout_seconds: config.timeout_s,
        goals,
    })
}

// ─── running trials ─────────────────────────────────────────────────────

/// One planner's answer to one trial, plus the lookup audit when the
/// planner is the library lookup.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub planner: PlannerId,
    pub trial: usize,
    pub goal: TrialGoal,
    pub outcome: TrialOutcome,
    /// Lookup-phase instrumentation delta; recorded for the library
    /// planner only, `None` for the baselines.
    pub counters: Option<Counters>,
}

fn stage_for_class(class: InfeasibleClass) -> FailureStage {
    match class {
        InfeasibleClass::EmptyInitSet => FailureStage::InitStateSearch,
        InfeasibleClass::NoPath => FailureStage::MotionPlanning,
        InfeasibleClass::RolloutFailed => FailureStage::BehaviorExecution,
    }
}

/// Answers one trial with the library planner. Planning time is the
/// lookup alone — the stored path needs no further planning — so this is
/// the number the dominance comparison pits against baseline planning
/// times.
pub fn run_bctmp_trial(
    task: &TaskWorld,
    library: &PlanLibrary,
    goal: &TrialGoal,
) -> Result<(TrialOutcome, Counters), BenchError> {
    let report = query::query(&task.world, library, &goal.goal, &task.behavior, goal.seed)?;
    let outcome = match report.outcome {
        QueryOutcome::Plan(plan) => {
            let stage = if plan.rollout.success {
                FailureStage::None
            } else {
                FailureStage::BehaviorExecution
            };
            TrialOutcome::at_stage(stage, plan.lookup_seconds)
        }
        QueryOutcome::NotCovered => {
            TrialOutcome::at_stage(FailureStage::MotionPlanning, report.lookup_seconds)
        }
        QueryOutcome::ProvenInfeasible(class) => {
            TrialOutcome::at_stage(stage_for_class(class), report.lookup_seconds)
        }
    };
    Ok((outcome, report.lookup_counters))
}

/// Runs every configured planner over the whole trial set.
///
/// Library-planner trials run serially so each query's instrumentation
/// delta stays attributable to that query; baseline trials are
/// independent and run in parallel, each timing its own work.
pub fn run_trials(
    task: &TaskWorld,
    artifacts: &BenchArtifacts,
    config: &BenchConfig,
    set: &TrialSet,
) -> Result<Vec<TrialRecord>, BenchError> {
    let budget = PlannerBudget {
        timeout: Duration::from_secs_f64(set.timeout_seconds),
        ..PlannerBudget::default()
    };
    let mut records = Vec::with_capacity(config.planners.len() * set.goals.len());
    for &planner in &config.planners {
        match planner {
            PlannerId::Bctmp => {
                for (trial, goal) in set.goals.iter().enumerate() {
                    let (outcome, counters) = run_bctmp_trial(task, &artifacts.library, goal)?;
                    records.push(TrialRecord {
                        planner,
                        trial,
                        goal: *goal,
                        outcome,
                        counters: Some(counters),
                    });
                }
            }
            PlannerId::Online => {
                records.par_extend(set.goals.par_iter().enumerate().map(|(trial, goal)| {
                    TrialRecord {
                        planner,
                        trial,
                        goal: *goal,
                        outcome: run_online_baseline(
                            &task.world,
                            &task.behavior,
                            &goal.goal,
                            &budget,
                            goal.seed,
                        ),
                        counters: None,
                    }
                }));
            }
            PlannerId::Prm => {
                let roadmap = artifacts
                    .prm
                    .as_ref()
                    .and_then(|l| l.roadmap.as_ref())
                    .ok_or_else(|| {
                        BenchError::Config("roadmap planner requested but not built".into())
                    })?;
                records.par_extend(set.goals.par_iter().enumerate().map(|(trial, goal)| {
                    TrialRecord {
                        planner,
                        trial,
                        goal: *goal,
                        outcome: run_prm_baseline(
                            &task.world,
                            roadmap,
                            &task.behavior,
                            &goal.goal,
                            &budget,
                            goal.seed,
                        ),
                        counters: None,
                    }
                }));
            }
            PlannerId::Vctmp => {
                let table = artifacts.vctmp.as_ref().ok_or_else(|| {
                    BenchError::Config("pose-table planner requested but not built".into())
                })?;
                records.par_extend(set.goals.par_iter().enumerate().map(|(trial, goal)| {
                    TrialRecord {
                        planner,
                        trial,
                        goal: *goal,
                        outcome: run_vanilla_ctmp_baseline(
                            &task.world,
                            table,
                            &task.behavior,
                            &goal.goal,
                            goal.seed,
                        ),
                        counters: None,
                    }
                }));
            }
        }
    }
    Ok(records)
}

// ─── whole-run orchestration ────────────────────────────────────────────

/// Everything one benchmark run produced, ready for writing or asserting.
#[derive(Clone, Debug)]
pub struct BenchRun {
    pub config: BenchConfig,
    pub set: TrialSet,
    pub records: Vec<TrialRecord>,
    /// Serialized artifact bytes per planner (0 for the from-scratch one).
    pub memory_bytes: BTreeMap<PlannerId, usize>,
    pub offline_seconds: BTreeMap<PlannerId, f64>,
    /// Stored tuple count of the library the lookup audit is checked
    /// against.
    pub library_size: usize,
}

impl BenchRun {
    /// Rows for one planner, in trial order.
    pub fn rows(&self, planner: PlannerId) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(move |r| r.planner == planner)
    }

    /// Successful-trial count for one planner.
    #[must_use]
    pub fn successes(&self, planner: PlannerId) -> usize {
        self.rows(planner).filter(|r| r.outcome.success).count()
    }
}

/// Runs the benchmark described by an already-built artifact set.
pub fn run_with_artifacts(
    task: &TaskWorld,
    artifacts: &BenchArtifacts,
    config: &BenchConfig,
) -> Result<BenchRun, BenchError> {
    config.validate()?;
    let set = trial_set(task, &artifacts.library, config)?;
    let records = run_trials(task, artifacts, config, &set)?;

    let mut memory_bytes = BTreeMap::new();
    for &planner in &config.planners {
        let artifact = match planner {
            PlannerId::Bctmp => Some(&artifacts.library),
            PlannerId::Online => None,
            PlannerId::Prm => artifacts.prm.as_ref(),
            PlannerId::Vctmp => artifacts.vctmp.as_ref(),
        };
        let bytes = match artifact {
            Some(library) => library.memory_report()?.serialized_bytes,
            None => 0,
        };
        memory_bytes.insert(planner, bytes);
    }

    Ok(BenchRun {
        config: config.clone(),
        set,
        records,
        memory_bytes,
        offline_seconds: artifacts.offline_seconds.clone(),
        library_size: artifacts.library.tuples.len(),
    })
}

/// Builds artifacts, runs all trials, and writes every output file.
pub fn run_benchmark(config: &BenchConfig, out_dir: &FsPath) -> Result<BenchRun, BenchError> {
    config.validate()?;
    let task = worlds::by_name(&config.world).ok_or_else(|| BenchError::UnknownWorld {
        got: config.world.clone(),
        available: worlds::builtin_names().join(", "),
    })?;
    if task.behavior.name != config.behavior {
        return Err(BenchError::BehaviorMismatch {
            world: task.name.clone(),
            available: task.behavior.name.clone(),
            got: config.behavior.clone(),
        });
    }
    let artifacts = build_artifacts(&task, config)?;
    let run = run_with_artifacts(&task, &artifacts, config)?;
    write_outputs(&run, out_dir)?;
    Ok(run)
}

// ─── output files ───────────────────────────────────────────────────────

#[derive(Serialize)]
struct FailureCounts {
    init_state_search: usize,
    motion_planning: usize,
    behavior_execution: usize,
}

/// Deterministic summary of the lookup-phase instrumentation over all
/// library-planner queries. A healthy run has zero planner, collision,
/// and rollout activity, and the same distance-evaluation count — the
/// library size — on every query.
#[derive(Serialize)]
struct LookupAudit {
    queries: usize,
    library_size: usize,
    distance_evals_min: u64,
    distance_evals_max: u64,
    plan_calls: u64,
    rollout_calls: u64,
    collision_checks: u64,
    edge_checks: u64,
}

#[derive(Serialize)]
struct PlannerAggregate {
    planner: PlannerId,
    trials: usize,
    successes: usize,
    success_rate: Option<f64>,
    failures: FailureCounts,
    memory_bytes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    lookup: Option<LookupAudit>,
}

#[derive(Serialize)]
struct Aggregate {
    world: String,
    behavior: String,
    seed: u64,
    timeout_s: f64,
    trials: usize,
    planners: Vec<PlannerAggregate>,
}

#[derive(Serialize)]
struct PlannerTiming {
    planner: PlannerId,
    offline_build_seconds: f64,
    p50_seconds: Option<f64>,
    p90_seconds: Option<f64>,
    p99_seconds: Option<f64>,
    max_seconds: Option<f64>,
}

/// Per-baseline comparison of the library planner's lookup time against
/// the baseline's planning time on trials both answered successfully.
#[derive(Serialize)]
struct DominanceRow {
    baseline: PlannerId,
    compared_trials: usize,
    lookup_faster_on_all: bool,
    violations: usize,
}

#[derive(Serialize)]
struct TimingSummary {
    planners: Vec<PlannerTiming>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    lookup_vs_planning: Vec<DominanceRow>,
}

fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let idx = (q * (sorted.len() - 1) as f64).round() as usize;
    Some(sorted[idx.min(sorted.len() - 1)])
}

fn io_err(path: &FsPath) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_json<T: Serialize>(path: &FsPath, value: &T) -> Result<(), BenchError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| BenchError::Json {
        path: path.display().to_string(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn aggregate(run: &BenchRun) -> Aggregate {
    let planners = run
        .config
        .planners
        .iter()
        .map(|&planner| {
            let rows: Vec<&TrialRecord> = run.rows(planner).collect();
            let successes = rows.iter().filter(|r| r.outcome.success).count();
            let count_stage = |stage: FailureStage| {
                rows.iter().filter(|r| r.outcome.stage == stage).count()
            };
            let lookup = (planner == PlannerId::Bctmp && !rows.is_empty()).then(|| {
                let evals: Vec<u64> = rows
                    .iter()
                    .filter_map(|r| r.counters.map(|c| c.distance_evals))
                    .collect();
                let sum = |f: fn(&Counters) -> u64| {
                    rows.iter().filter_map(|r| r.counters.as_ref().map(f)).sum()
                };
                LookupAudit {
                    queries: rows.len(),
                    library_size: run.library_size,
                    distance_evals_min: evals.iter().copied().min().unwrap_or(0),
                    distance_evals_max: evals.iter().copied().max().unwrap_or(0),
                    plan_calls: sum(|c| c.plan_calls),
                    rollout_calls: sum(|c| c.rollout_calls),
                    collision_checks: sum(|c| c.collision_checks),
                    edge_checks: sum(|c| c.edge_checks),
                }
            });
            PlannerAggregate {
                planner,
                trials: rows.len(),
                successes,
                success_rate: (!rows.is_empty())
                    .then(|| successes as f64 / rows.len() as f64),
                failures: FailureCounts {
                    init_state_search: count_stage(FailureStage::InitStateSearch),
                    motion_planning: count_stage(FailureStage::MotionPlanning),
                    behavior_execution: count_stage(FailureStage::BehaviorExecution),
                },
                memory_bytes: run.memory_bytes.get(&planner).copied().unwrap_or(0),
                lookup,
            }
        })
        .collect();
    Aggregate {
        world: run.config.world.clone(),
        behavior: run.config.behavior.clone(),
        seed: run.config.seed,
        timeout_s: run.config.timeout_s,
        trials: run.config.trials,
        planners,
    }
}

fn timing_summary(run: &BenchRun) -> TimingSummary {
    let planners = run
        .config
        .planners
        .iter()
        .map(|&planner| {
            let mut times: Vec<f64> = run
                .rows(planner)
                .map(|r| r.outcome.planning_seconds)
                .collect();
            times.sort_by(f64::total_cmp);
            PlannerTiming {
                planner,
                offline_build_seconds: run.offline_seconds.get(&planner).copied().unwrap_or(0.0),
                p50_seconds: percentile(&times, 0.50),
                p90_seconds: percentile(&times, 0.90),
                p99_seconds: percentile(&times, 0.99),
                max_seconds: times.last().copied(),
            }
        })
        .collect();

    let mut lookup_vs_planning = Vec::new();
    if run.config.planners.contains(&PlannerId::Bctmp) {
        let lookup: BTreeMap<usize, &TrialRecord> =
            run.rows(PlannerId::Bctmp).map(|r| (r.trial, r)).collect();
        for &planner in &run.config.planners {
            if planner == PlannerId::Bctmp {
                continue;
            }
            let mut compared = 0usize;
            let mut violations = 0usize;
            for row in run.rows(planner) {
                let Some(ours) = lookup.get(&row.trial) else {
                    continue;
                };
                if row.outcome.success && ours.outcome.success {
                    compared += 1;
                    if ours.outcome.planning_seconds >= row.outcome.planning_seconds {
                        violations += 1;
                    }
                }
            }
            lookup_vs_planning.push(DominanceRow {
                baseline: planner,
                compared_trials: compared,
                lookup_faster_on_all: violations == 0,
                violations,
            });
        }
    }

    TimingSummary {
        planners,
        lookup_vs_planning,
    }
}

/// Writes every output artifact under `out_dir`.
///
/// `results.csv`, `aggregate.json`, and the success-rate and memory plot
/// tables depend only on the config and are byte-identical across reruns;
/// `timings.csv`, `timing_summary.json`, and the times plot table carry
/// wall-clock measurements and vary run to run.
pub fn write_outputs(run: &BenchRun, out_dir: &FsPath) -> Result<(), BenchError> {
    let plotdata = out_dir.join("plotdata");
    fs::create_dir_all(&plotdata).map_err(io_err(plotdata.as_path()))?;

    let results = out_dir.join("results.csv");
    let mut w = csv::Writer::from_path(&results)?;
    w.write_record([
        "planner",
        "trial",
        "goal_x",
        "goal_y",
        "goal_theta",
        "seed",
        "success",
        "failure_stage",
    ])?;
    for r in &run.records {
        w.write_record([
            r.planner.label().to_string(),
            r.trial.to_string(),
            r.goal.goal.x.to_string(),
            r.goal.goal.y.to_string(),
            r.goal.goal.theta.to_string(),
            r.goal.seed.to_string(),
            r.outcome.success.to_string(),
            r.outcome.stage.label().to_string(),
        ])?;
    }
    w.flush().map_err(io_err(results.as_path()))?;

    let timings = out_dir.join("timings.csv");
    let mut w = csv::Writer::from_path(&timings)?;
    w.write_record(["planner", "trial", "planning_seconds", "success"])?;
    for r in &run.records {
        w.write_record([
            r.planner.label().to_string(),
            r.trial.to_string(),
            r.outcome.planning_seconds.to_string(),
            r.outcome.success.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(timings.as_path()))?;

    write_json(&out_dir.join("aggregate.json"), &aggregate(run))?;
    write_json(&out_dir.join("timing_summary.json"), &timing_summary(run))?;

    let success = plotdata.join("success_rate.csv");
    let mut w = csv::Writer::from_path(&success)?;
    w.write_record(["planner", "successes", "trials", "success_rate"])?;
    for &planner in &run.config.planners {
        let trials = run.rows(planner).count();
        let successes = run.successes(planner);
        let rate = if trials == 0 {
            String::new()
        } else {
            (successes as f64 / trials as f64).to_string()
        };
        w.write_record([
            planner.label().to_string(),
            successes.to_string(),
            trials.to_string(),
            rate,
        ])?;
    }
    w.flush().map_err(io_err(success.as_path()))?;

    let memory = plotdata.join("memory.csv");
    let mut w = csv::Writer::from_path(&memory)?;
    w.write_record(["planner", "memory_bytes"])?;
    for &planner in &run.config.planners {
        w.write_record([
            planner.label().to_string(),
            run.memory_bytes.get(&planner).copied().unwrap_or(0).to_string(),
        ])?;
    }
    w.flush().map_err(io_err(memory.as_path()))?;

    let times = plotdata.join("times.csv");
    let mut w = csv::Writer::from_path(&times)?;
    w.write_record(["planner", "trial", "planning_seconds", "success"])?;
    for r in &run.records {
        w.write_record([
            r.planner.label().to_string(),
            r.trial.to_string(),
            r.outcome.planning_seconds.to_string(),
            r.outcome.success.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(times.as_path()))?;

    Ok(())
}
