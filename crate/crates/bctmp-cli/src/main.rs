//! Command-line front end for the two-phase manipulation planner.
//!
//! `preprocess` runs the expensive offline phase and saves the resulting
//! attractor library; `query` answers a single object-pose goal from a
//! saved library in constant time; `verify` independently re-checks a
//! saved library against its world; `bench` runs the planner comparison
//! described by a JSON config; `world` exports a built-in task so its
//! geometry can be inspected or modified.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use bctmp::bench::{self, BenchConfig};
use bctmp::geom::Pose2;
use bctmp::library::PlanLibrary;
use bctmp::planner::PlannerBudget;
use bctmp::preprocess::preprocess_with;
use bctmp::query::{self, QueryOutcome};
use bctmp::roi::PoseMetric;
use bctmp::world::WorldFile;
use bctmp::worlds::{self, TaskWorld};

#[derive(Parser)]
#[command(
    name = "bctmp",
    version,
    about = "Two-phase manipulation planning: preprocess a library of verified \
             attractors offline, answer object-pose queries in constant time online"
)]
struct Cli {
    /// Worker threads for parallel sections (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the attractor library for a task and save it.
    Preprocess {
        /// Built-in task name, or path to an exported task JSON file.
        #[arg(long)]
        world: String,
        /// Output path for the binary library (a JSON summary sidecar is
        /// written next to it).
        #[arg(long)]
        out: PathBuf,
        /// Override the task's preprocessing seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Answer one object-pose query from a saved library.
    Query {
        /// Saved library file.
        #[arg(long = "lib")]
        library: PathBuf,
        /// Built-in task name, or path to an exported task JSON file.
        #[arg(long)]
        world: String,
        /// Goal object pose as "x,y,theta".
        #[arg(long)]
        goal: String,
        /// Seed for the behavior execution.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Re-simulate the returned plan against the world and report
        /// every violation.
        #[arg(long)]
        execute: bool,
    },
    /// Run the benchmark described by a JSON config file.
    Bench {
        /// Config file: {world, behavior, trials, timeout_s, planners[], seed}.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for results.csv, aggregate.json, timing files,
        /// and plotdata/.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-check every stored tuple and infeasibility claim of a library.
    Verify {
        /// Saved library file.
        #[arg(long = "lib")]
        library: PathBuf,
        /// Built-in task name, or path to an exported task JSON file.
        #[arg(long)]
        world: String,
    },
    /// Export a built-in task description as JSON.
    World {
        /// Built-in task name.
        #[arg(long)]
        name: String,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .context("thread pool already initialized")?;
    }
    match cli.command {
        Command::Preprocess { world, out, seed } => cmd_preprocess(&world, &out, seed),
        Command::Query {
            library,
            world,
            goal,
            seed,
            execute,
        } => cmd_query(&library, &world, &goal, seed, execute),
        Command::Bench { config, out } => cmd_bench(&config, &out),
        Command::Verify { library, world } => cmd_verify(&library, &world),
        Command::World { name, out } => cmd_world(&name, out.as_deref()),
    }
}

/// Resolves `--world`: a built-in task name first, otherwise a path to an
/// exported task file.
fn load_task(world: &str) -> Result<TaskWorld> {
    if let Some(task) = worlds::by_name(world) {
        return Ok(task);
    }
    let path = Path::new(world);
    if !path.exists() {
        bail!(
            "unknown world {world:?}: not a built-in task ({}) and no such file",
            worlds::builtin_names().join(", ")
        );
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {world:?}"))?;
    let file =
        WorldFile::parse(&text).with_context(|| format!("parsing task file {world:?}"))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("task")
        .to_string();
    let task = TaskWorld::from_file(&name, &file, 0)?;
    Ok(task)
}

fn parse_goal(text: &str) -> Result<Pose2> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("goal {text:?} is not three comma-separated numbers"))?;
    let [x, y, theta] = parts[..] else {
        bail!("goal {text:?} must be exactly \"x,y,theta\"");
    };
    Ok(Pose2::new(x, y, theta))
}

fn cmd_preprocess(world: &str, out: &Path, seed: Option<u64>) -> Result<()> {
    let mut task = load_task(world)?;
    if let Some(seed) = seed {
        task.seed = seed;
    }
    log::info!("preprocessing task {:?} with seed {}", task.name, task.seed);
    let t0 = Instant::now();
    let (library, stats) = preprocess_with(
        &task.world,
        &task.roi,
        &task.behavior,
        &PlannerBudget::default(),
        task.seed,
        PoseMetric::default(),
    )?;
    let elapsed = t0.elapsed().as_secs_f64();
    library.save(out)?;
    let report = library.memory_report()?;
    println!("preprocessed {:?} in {elapsed:.1}s", task.name);
    println!(
        "  cells: {} covered, {} proven infeasible (of {})",
        report.covered_cells,
        library.infeasible.len(),
        task.roi.cell_count()
    );
    println!(
        "  library: {} attractor tuples, {} path waypoints, {} bytes",
        report.tuple_count, report.waypoints, report.serialized_bytes
    );
    println!(
        "  work: {} placements, {} rollouts, {} plan attempts",
        stats.placements, stats.rollouts, stats.plan_attempts
    );
    println!("  saved to {}", out.display());
    Ok(())
}

fn cmd_query(library: &Path, world: &str, goal: &str, seed: u64, execute: bool) -> Result<()> {
    let task = load_task(world)?;
    let goal = parse_goal(goal)?;
    let library = PlanLibrary::load_checked(library, &task.world, &task.behavior)?;
    let report = query::query(&task.world, &library, &goal, &task.behavior, seed)?;
    println!(
        "lookup: {:.1} us over {} tuples ({} distance evaluations)",
        report.lookup_seconds * 1e6,
        library.tuples.len(),
        report.lookup_counters.distance_evals
    );
    match report.outcome {
        QueryOutcome::Plan(plan) => {
            let rollout = &plan.rollout;
            println!(
                "plan: tuple {} serves this goal; {} stored waypoints, {} behavior steps, \
                 execution {}",
                plan.tuple_index,
                plan.tau.waypoints.len(),
                rollout.trajectory.len(),
                if rollout.success { "succeeded" } else { "FAILED" }
            );
            if execute {
                let exec = query::execute_plan(&task.world, &task.behavior, &plan);
                if exec.success {
                    println!(
                        "re-execution: clean ({} path waypoints, {} behavior steps, \
                         final error {:.2} mm / {:.3} rad)",
                        exec.path_waypoints,
                        exec.behavior_steps,
                        exec.position_error * 1e3,
                        exec.angle_error
                    );
                } else {
                    println!("re-execution: {} fault(s)", exec.faults.len());
                    for fault in &exec.faults {
                        println!("  {fault:?}");
                    }
                    bail!("stored plan failed re-execution");
                }
            }
            if !rollout.success {
                bail!("behavior execution failed from the stored attractor");
            }
        }
        QueryOutcome::NotCovered => {
            println!("not covered: goal lies outside every verified neighborhood");
        }
        QueryOutcome::ProvenInfeasible(class) => {
            println!("proven infeasible during preprocessing: {class:?}");
        }
    }
    Ok(())
}

fn cmd_bench(config: &Path, out: &Path) -> Result<()> {
    let config = BenchConfig::from_file(config)?;
    log::info!(
        "benchmarking {:?}: {} trials, {:.1}s timeout",
        config.world,
        config.trials,
        config.timeout_s
    );
    let run = bench::run_benchmark(&config, out)?;
    println!(
        "{} trials on {:?} ({:?} behavior)",
        config.trials, config.world, config.behavior
    );
    for &planner in &config.planners {
        let successes = run.successes(planner);
        let trials = run.rows(planner).count();
        let memory = run.memory_bytes.get(&planner).copied().unwrap_or(0);
        println!(
            "  {:<8} {:>3}/{} succeeded, artifact {} bytes",
            planner.label(),
            successes,
            trials,
            memory
        );
    }
    println!("results written to {}", out.display());
    Ok(())
}

fn cmd_verify(library: &Path, world: &str) -> Result<()> {
    let task = load_task(world)?;
    let library = PlanLibrary::load_checked(library, &task.world, &task.behavior)?;
    let report = library.verify(&task.world, &task.behavior);
    println!(
        "verified {} tuples and {} cells",
        report.tuples_checked, report.cells_checked
    );
    if report.passed() {
        println!("library is sound: every stored path and rollout re-validates");
        Ok(())
    } else {
        for failure in &report.failures {
            println!("  FAIL: {failure}");
        }
        bail!("{} verification failure(s)", report.failures.len());
    }
}

fn cmd_world(name: &str, out: Option<&Path>) -> Result<()> {
    let Some(task) = worlds::by_name(name) else {
        bail!(
            "unknown world {name:?}; built-in tasks: {}",
            worlds::builtin_names().join(", ")
        );
    };
    let mut text = serde_json::to_string_pretty(&task.to_file())?;
    text.push('\n');
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote task {name:?} to {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}
