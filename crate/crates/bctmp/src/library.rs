//! Attractor-tuple library: the persisted product of preprocessing.
//!
//! A library holds, for one world/behavior pair, the attractor tuples
//! `(w_attr, s_attr, r, tau)` whose balls cover the verified goal region,
//! plus the goal cells proven infeasible. Optional sections carry a
//! precomputed roadmap and a pose-indexed baseline table so every artifact a
//! benchmark needs lives in one container.
//!
//! On disk the container is little-endian binary:
//!
//! ```text
//! magic            9 bytes  "BCTMPLIB1" (last byte is the format version)
//! seed             u64
//! theta_weight     f64
//! world_fp         32 bytes
//! behavior_fp      32 bytes
//! dof              u32
//! region_count     u32
//! delta            3 x f64
//! regions          region_count x (6 x f64 bounds, 3 x u32 dims)
//! tuple_count      u32
//! tuples           w_attr 3 x f64, s_attr dof x f64, radius f64,
//!                  waypoint_count u32, waypoints wp x dof x f64
//! infeasible_count u32
//! records          region u32, ix u32, iy u32, itheta u32, class u8
//! roadmap_flag     u8; if 1: vertex_count u32, vertices V x dof x f64,
//!                  V x (edge_count u32, edges u32...), connect_radius f64
//! table_flag       u8; if 1: entry_count u32, entries pose 3 x f64,
//!                  state dof x f64, waypoint_count u32, waypoints ...
//! ```
//!
//! Loading consumes the file exactly; trailing bytes or a short read are
//! corruption, and a mismatched version byte is reported as such.

use crate::behavior::BehaviorSpec;
use crate::geom::Pose2;
use crate::planner::{Path, Roadmap};
use crate::roi::{CellId, PoseMetric, RegionOfInterest, RoiBox};
use crate::seeding::{self, SALT_VERIFY};
use crate::tolerances::{EDGE_RESOLUTION, VERIFY_REFINEMENT};
use crate::world::{RobotState, World};
use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path as FsPath;

const MAGIC: &[u8; 9] = b"BCTMPLIB1";
/// Soft cap on any stored count, to reject absurd allocations from corrupt
/// headers before attempting them.
const MAX_COUNT: u32 = 50_000_000;

/// One library entry: a verified attractor with its reach-ball and the
/// precomputed path from home to the attractor state.
#[derive(Clone, Debug, PartialEq)]
pub struct AttractorTuple {
    /// Object pose the attractor was built for.
    pub w_attr: Pose2,
    /// Initiation state verified at `w_attr`.
    pub s_attr: RobotState,
    /// Ball radius in the task-space metric; every covered cell center
    /// within this distance of `w_attr` was verified to succeed.
    pub radius: f64,
    /// Collision-free path from the home state to `s_attr`.
    pub tau: Path,
}

/// Why a goal cell is unreachable, established during preprocessing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfeasibleClass {
    /// No initiation state exists for the cell's pose.
    EmptyInitSet,
    /// No collision-free path from home reaches any initiation state.
    NoPath,
    /// The behavior itself fails from every reachable initiation state.
    RolloutFailed,
}

impl InfeasibleClass {
    fn to_byte(self) -> u8 {
        match self {
            InfeasibleClass::EmptyInitSet => 0,
            InfeasibleClass::NoPath => 1,
            InfeasibleClass::RolloutFailed => 2,
        }
    }

    fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(InfeasibleClass::EmptyInitSet),
            1 => Some(InfeasibleClass::NoPath),
            2 => Some(InfeasibleClass::RolloutFailed),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfeasibleRecord {
    pub cell: CellId,
    pub class: InfeasibleClass,
}

/// Entry of the pose-indexed baseline table: a terminal end-effector pose
/// with its state and stored path from home.
#[derive(Clone, Debug, PartialEq)]
pub struct PoseTableEntry {
    pub pose: Pose2,
    pub state: RobotState,
    pub tau: Path,
}

#[derive(Debug, thiserror::Error)]
pub enum LibraryError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt library file: {0}")]
    CorruptFile(String),
    #[error("library format version {found:?} is not supported")]
    VersionMismatch { found: u8 },
    #[error("library was built for a different {which}")]
    FingerprintMismatch { which: &'static str },
}

/// The full preprocessing product for one world/behavior pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanLibrary {
    pub seed: u64,
    pub metric: PoseMetric,
    pub world_fingerprint: [u8; 32],
    pub behavior_fingerprint: [u8; 32],
    pub dof: usize,
    pub roi: RegionOfInterest,
    pub tuples: Vec<AttractorTuple>,
    pub infeasible: Vec<InfeasibleRecord>,
    pub roadmap: Option<Roadmap>,
    pub pose_table: Option<Vec<PoseTableEntry>>,
}

/// Footprint summary of a serialized library.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryReport {
    pub tuple_count: usize,
    pub waypoints: usize,
    pub serialized_bytes: usize,
    pub covered_cells: usize,
}

/// Outcome of independently re-checking a library against its world.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tuples_checked: usize,
    pub cells_checked: usize,
    pub failures: Vec<String>,
}

impl VerifyReport {
    #[must_use]
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl PlanLibrary {
    pub fn new(
        world: &World,
        spec: &BehaviorSpec,
        roi: RegionOfInterest,
        metric: PoseMetric,
        seed: u64,
    ) -> Self {
        PlanLibrary {
            seed,
            metric,
            world_fingerprint: world.fingerprint(),
            behavior_fingerprint: spec.fingerprint(),
            dof: world.arm.dof(),
            roi,
            tuples: Vec::new(),
            infeasible: Vec::new(),
            roadmap: None,
            pose_table: None,
        }
    }

    // ── lookup ──────────────────────────────────────────────────────────

    /// Scans every tuple and returns the one whose ball contains `goal`
    /// with the smallest distance (first index on exact ties). Always
    /// evaluates all tuples, so lookup cost is a fixed function of library
    /// size, not of the goal.
    #[must_use]
    pub fn find_containing_tuple(&self, goal: &Pose2) -> Option<(usize, &AttractorTuple)> {
        let mut best: Option<(usize, f64)> = None;
        for (index, tuple) in self.tuples.iter().enumerate() {
            let d = self.metric.distance(goal, &tuple.w_attr);
            if d <= tuple.radius && best.map_or(true, |(_, bd)| d < bd) {
                best = Some((index, d));
            }
        }
        best.map(|(index, _)| (index, &self.tuples[index]))
    }

    /// Infeasibility record covering `cell`, if any.
    #[must_use]
    pub fn infeasible_class(&self, cell: CellId) -> Option<InfeasibleClass> {
        self.infeasible
            .iter()
            .find(|r| r.cell == cell)
            .map(|r| r.class)
    }

    /// Number of region-of-interest cells whose center lies inside at least
    /// one tuple ball.
    #[must_use]
    pub fn covered_cell_count(&self) -> usize {
        self.roi
            .cells()
            .filter(|&cell| {
                let center = self.roi.center(cell);
                self.tuples
                    .iter()
                    .any(|t| self.metric.distance(&center, &t.w_attr) <= t.radius)
            })
            .count()
    }

    pub fn memory_report(&self) -> Result<MemoryReport, LibraryError> {
        let mut bytes = Vec::new();
        self.write_to(&mut bytes)?;
        Ok(MemoryReport {
            tuple_count: self.tuples.len(),
            waypoints: self.tuples.iter().map(|t| t.tau.waypoints.len()).sum(),
            serialized_bytes: bytes.len(),
            covered_cells: self.covered_cell_count(),
        })
    }

    // ── persistence ─────────────────────────────────────────────────────

    pub fn save(&self, path: &FsPath) -> Result<(), LibraryError> {
        let mut writer = BufWriter::new(File::create(path)?);
        self.write_to(&mut writer)?;
        writer.flush()?;
        // human-readable sidecar summary next to the binary
        let report = self.memory_report()?;
        let sidecar = serde_json::json!({
            "seed": self.seed,
            "theta_weight": self.metric.theta_weight,
            "world_fingerprint": hex(&self.world_fingerprint),
            "behavior_fingerprint": hex(&self.behavior_fingerprint),
            "tuple_count": report.tuple_count,
            "waypoints": report.waypoints,
            "serialized_bytes": report.serialized_bytes,
            "covered_cells": report.covered_cells,
            "roi_cells": self.roi.cell_count(),
            "infeasible_cells": self.infeasible.len(),
            "has_roadmap": self.roadmap.is_some(),
            "has_pose_table": self.pose_table.is_some(),
        });
        let mut sidecar_path = path.as_os_str().to_owned();
        sidecar_path.push(".json");
        std::fs::write(
            sidecar_path,
            serde_json::to_string_pretty(&sidecar).expect("summary serializes"),
        )?;
        Ok(())
    }

    pub fn load(path: &FsPath) -> Result<Self, LibraryError> {
        let mut reader = BufReader::new(File::open(path)?);
        let library = Self::read_from(&mut reader)?;
        let mut probe = [0u8; 1];
        if reader.read(&mut probe)? != 0 {
            return Err(LibraryError::CorruptFile(
                "trailing bytes after library payload".into(),
            ));
        }
        Ok(library)
    }

    /// Loads and insists the library belongs to this world and behavior.
    pub fn load_checked(
        path: &FsPath,
        world: &World,
        spec: &BehaviorSpec,
    ) -> Result<Self, LibraryError> {
        let library = Self::load(path)?;
        if library.world_fingerprint != world.fingerprint() {
            return Err(LibraryError::FingerprintMismatch { which: "world" });
        }
        if library.behavior_fingerprint != spec.fingerprint() {
            return Err(LibraryError::FingerprintMismatch { which: "behavior" });
        }
        Ok(library)
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<(), LibraryError> {
        w.write_all(MAGIC)?;
        w.write_u64::<LE>(self.seed)?;
        w.write_f64::<LE>(self.metric.theta_weight)?;
        w.write_all(&self.world_fingerprint)?;
        w.write_all(&self.behavior_fingerprint)?;
        w.write_u32::<LE>(self.dof as u32)?;

        w.write_u32::<LE>(self.roi.regions.len() as u32)?;
        for d in self.roi.delta {
            w.write_f64::<LE>(d)?;
        }
        for (i, r) in self.roi.regions.iter().enumerate() {
            for v in [r.x.0, r.x.1, r.y.0, r.y.1, r.theta.0, r.theta.1] {
                w.write_f64::<LE>(v)?;
            }
            let (nx, ny, nt) = self.roi.region_dims(i);
            for n in [nx, ny, nt] {
                w.write_u32::<LE>(n)?;
            }
        }

        w.write_u32::<LE>(self.tuples.len() as u32)?;
        for t in &self.tuples {
            for v in [t.w_attr.x, t.w_attr.y, t.w_attr.theta] {
                w.write_f64::<LE>(v)?;
            }
            write_state(w, &t.s_attr, self.dof)?;
            w.write_f64::<LE>(t.radius)?;
            w.write_u32::<LE>(t.tau.waypoints.len() as u32)?;
            for s in &t.tau.waypoints {
                write_state(w, s, self.dof)?;
            }
        }

        w.write_u32::<LE>(self.infeasible.len() as u32)?;
        for rec in &self.infeasible {
            for v in [rec.cell.region, rec.cell.ix, rec.cell.iy, rec.cell.itheta] {
                w.write_u32::<LE>(v)?;
            }
            w.write_u8(rec.class.to_byte())?;
        }

        match &self.roadmap {
            None => w.write_u8(0)?,
            Some(rm) => {
                w.write_u8(1)?;
                w.write_u32::<LE>(rm.vertices.len() as u32)?;
                for v in &rm.vertices {
                    write_state(w, v, self.dof)?;
                }
                for edges in &rm.edges {
                    w.write_u32::<LE>(edges.len() as u32)?;
                    for &e in edges {
                        w.write_u32::<LE>(e as u32)?;
                    }
                }
                w.write_f64::<LE>(rm.connect_radius)?;
            }
        }

        match &self.pose_table {
            None => w.write_u8(0)?,
            Some(entries) => {
                w.write_u8(1)?;
                w.write_u32::<LE>(entries.len() as u32)?;
                for e in entries {
                    for v in [e.pose.x, e.pose.y, e.pose.theta] {
                        w.write_f64::<LE>(v)?;
                    }
                    write_state(w, &e.state, self.dof)?;
                    w.write_u32::<LE>(e.tau.waypoints.len() as u32)?;
                    for s in &e.tau.waypoints {
                        write_state(w, s, self.dof)?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self, LibraryError> {
        let mut magic = [0u8; 9];
        read_fully(r, &mut magic)?;
        if magic != *MAGIC {
            if magic[..8] == MAGIC[..8] {
                return Err(LibraryError::VersionMismatch { found: magic[8] });
            }
            return Err(LibraryError::CorruptFile("bad magic".into()));
        }
        let seed = r.read_u64::<LE>().map_err(truncated)?;
        let theta_weight = read_finite(r, "theta_weight")?;
        let mut world_fingerprint = [0u8; 32];
        read_fully(r, &mut world_fingerprint)?;
        let mut behavior_fingerprint = [0u8; 32];
        read_fully(r, &mut behavior_fingerprint)?;
        let dof = read_count(r, "dof")? as usize;
        if dof == 0 {
            return Err(LibraryError::CorruptFile("zero degrees of freedom".into()));
        }

        let region_count = read_count(r, "region count")?;
        let mut delta = [0.0f64; 3];
        for d in &mut delta {
            *d = read_finite(r, "delta")?;
        }
        let mut regions = Vec::with_capacity(region_count as usize);
        let mut stored_dims = Vec::with_capacity(region_count as usize);
        for _ in 0..region_count {
            let mut b = [0.0f64; 6];
            for v in &mut b {
                *v = read_finite(r, "region bounds")?;
            }
            regions.push(RoiBox {
                x: (b[0], b[1]),
                y: (b[2], b[3]),
                theta: (b[4], b[5]),
            });
            let nx = read_count(r, "region dims")?;
            let ny = read_count(r, "region dims")?;
            let nt = read_count(r, "region dims")?;
            stored_dims.push((nx, ny, nt));
        }
        let roi = RegionOfInterest { regions, delta };
        roi.validate()
            .map_err(|e| LibraryError::CorruptFile(format!("stored region invalid: {e}")))?;
        for (i, &dims) in stored_dims.iter().enumerate() {
            if roi.region_dims(i) != dims {
                return Err(LibraryError::CorruptFile(format!(
                    "region {i} dims {dims:?} disagree with bounds"
                )));
            }
        }

        let tuple_count = read_count(r, "tuple count")?;
        let mut tuples = Vec::with_capacity(tuple_count as usize);
        for _ in 0..tuple_count {
            let x = read_finite(r, "attractor pose")?;
            let y = read_finite(r, "attractor pose")?;
            let theta = read_finite(r, "attractor pose")?;
            let s_attr = read_state(r, dof)?;
            let radius = read_finite(r, "radius")?;
            if radius < 0.0 {
                return Err(LibraryError::CorruptFile("negative radius".into()));
            }
            let wp = read_count(r, "waypoint count")?;
            let mut waypoints = Vec::with_capacity(wp as usize);
            for _ in 0..wp {
                waypoints.push(read_state(r, dof)?);
            }
            tuples.push(AttractorTuple {
                w_attr: Pose2::new(x, y, theta),
                s_attr,
                radius,
                tau: Path { waypoints },
            });
        }

        let infeasible_count = read_count(r, "infeasible count")?;
        let mut infeasible = Vec::with_capacity(infeasible_count as usize);
        for _ in 0..infeasible_count {
            let region = r.read_u32::<LE>().map_err(truncated)?;
            let ix = r.read_u32::<LE>().map_err(truncated)?;
            let iy = r.read_u32::<LE>().map_err(truncated)?;
            let itheta = r.read_u32::<LE>().map_err(truncated)?;
            let class_byte = r.read_u8().map_err(truncated)?;
            let class = InfeasibleClass::from_byte(class_byte).ok_or_else(|| {
                LibraryError::CorruptFile(format!("unknown infeasibility class {class_byte}"))
            })?;
            infeasible.push(InfeasibleRecord {
                cell: CellId {
                    region,
                    ix,
                    iy,
                    itheta,
                },
                class,
            });
        }

        let roadmap = match r.read_u8().map_err(truncated)? {
            0 => None,
            1 => {
                let n = read_count(r, "roadmap vertices")? as usize;
                let mut vertices = Vec::with_capacity(n);
                for _ in 0..n {
                    vertices.push(read_state(r, dof)?);
                }
                let mut edges = Vec::with_capacity(n);
                for _ in 0..n {
                    let deg = read_count(r, "roadmap degree")? as usize;
                    let mut adj = Vec::with_capacity(deg);
                    for _ in 0..deg {
                        let e = r.read_u32::<LE>().map_err(truncated)? as usize;
                        if e >= n {
                            return Err(LibraryError::CorruptFile(
                                "roadmap edge index out of range".into(),
                            ));
                        }
                        adj.push(e);
                    }
                    edges.push(adj);
                }
                let connect_radius = read_finite(r, "connect radius")?;
                Some(Roadmap {
                    vertices,
                    edges,
                    connect_radius,
                })
            }
            other => {
                return Err(LibraryError::CorruptFile(format!(
                    "bad roadmap flag {other}"
                )))
            }
        };

        let pose_table = match r.read_u8().map_err(truncated)? {
            0 => None,
            1 => {
                let n = read_count(r, "table entries")? as usize;
                let mut entries = Vec::with_capacity(n);
                for _ in 0..n {
                    let x = read_finite(r, "table pose")?;
                    let y = read_finite(r, "table pose")?;
                    let theta = read_finite(r, "table pose")?;
                    let state = read_state(r, dof)?;
                    let wp = read_count(r, "table waypoints")?;
                    let mut waypoints = Vec::with_capacity(wp as usize);
                    for _ in 0..wp {
                        waypoints.push(read_state(r, dof)?);
                    }
                    entries.push(PoseTableEntry {
                        pose: Pose2::new(x, y, theta),
                        state,
                        tau: Path { waypoints },
                    });
                }
                Some(entries)
            }
            other => {
                return Err(LibraryError::CorruptFile(format!("bad table flag {other}")))
            }
        };

        Ok(PlanLibrary {
            seed,
            metric: PoseMetric {
                theta_weight,
            },
            world_fingerprint,
            behavior_fingerprint,
            dof,
            roi,
            tuples,
            infeasible,
            roadmap,
            pose_table,
        })
    }

    // ── verification ────────────────────────────────────────────────────

    /// Re-derives every promise the library makes, with fresh rollout seeds
    /// so verification does not just replay preprocessing: fingerprints,
    /// path validity from home to each attractor state, the initiation
    /// predicate at each attractor, rollout success at every covered cell
    /// center, and disjointness of the covered and infeasible sets.
    pub fn verify(&self, world: &World, spec: &BehaviorSpec) -> VerifyReport {
        let mut failures = Vec::new();
        if self.world_fingerprint != world.fingerprint() {
            failures.push("world fingerprint mismatch".to_string());
        }
        if self.behavior_fingerprint != spec.fingerprint() {
            failures.push("behavior fingerprint mismatch".to_string());
        }
        if self.dof != world.arm.dof() {
            failures.push(format!(
                "library dof {} vs world dof {}",
                self.dof,
                world.arm.dof()
            ));
        }
        let perception = spec.perception();
        let fine = EDGE_RESOLUTION / VERIFY_REFINEMENT;
        for (i, t) in self.tuples.iter().enumerate() {
            if t.tau.waypoints.first() != Some(&world.home) {
                failures.push(format!("tuple {i}: path does not start at home"));
            }
            if t.tau.waypoints.last() != Some(&t.s_attr) {
                failures.push(format!("tuple {i}: path does not end at the attractor state"));
            }
            match t.tau.collision_free(world, fine) {
                Ok(true) => {}
                Ok(false) => failures.push(format!("tuple {i}: stored path collides")),
                Err(e) => failures.push(format!("tuple {i}: path check failed: {e}")),
            }
            match crate::behavior::initiation_predicate(world, spec, &t.s_attr, &t.w_attr) {
                Ok(true) => {}
                Ok(false) => {
                    failures.push(format!("tuple {i}: predicate rejects attractor state"))
                }
                Err(e) => failures.push(format!("tuple {i}: predicate failed: {e}")),
            }
        }
        let mut cells_checked = 0usize;
        for cell in self.roi.cells() {
            let center = self.roi.center(cell);
            let containing = self.find_containing_tuple(&center);
            if let Some((index, tuple)) = containing {
                if self.infeasible_class(cell).is_some() {
                    failures.push(format!("cell {cell:?} is both covered and infeasible"));
                }
                cells_checked += 1;
                let seed = seeding::mix(
                    self.seed,
                    &[SALT_VERIFY, self.roi.linear_index(cell), index as u64],
                );
                match crate::behavior::rollout(
                    world,
                    spec,
                    &tuple.s_attr,
                    &center,
                    &perception,
                    seed,
                ) {
                    Ok(result) if result.success => {}
                    Ok(result) => failures.push(format!(
                        "cell {cell:?}: rollout from tuple {index} failed: {:?}",
                        result.failure
                    )),
                    Err(e) => failures.push(format!("cell {cell:?}: rollout error: {e}")),
                }
            }
        }
        VerifyReport {
            tuples_checked: self.tuples.len(),
            cells_checked,
            failures,
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn truncated(e: std::io::Error) -> LibraryError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        LibraryError::CorruptFile("file truncated".into())
    } else {
        LibraryError::Io(e)
    }
}

fn read_fully(r: &mut impl Read, buf: &mut [u8]) -> Result<(), LibraryError> {
    r.read_exact(buf).map_err(truncated)
}

fn read_count(r: &mut impl Read, what: &str) -> Result<u32, LibraryError> {
    let v = r.read_u32::<LE>().map_err(truncated)?;
    if v > MAX_COUNT {
        return Err(LibraryError::CorruptFile(format!(
            "{what} {v} exceeds sanity bound"
        )));
    }
    Ok(v)
}

fn read_finite(r: &mut impl Read, what: &str) -> Result<f64, LibraryError> {
    let v = r.read_f64::<LE>().map_err(truncated)?;
    if !v.is_finite() {
        return Err(LibraryError::CorruptFile(format!("{what} is not finite")));
    }
    Ok(v)
}

fn write_state(w: &mut impl Write, s: &RobotState, dof: usize) -> Result<(), LibraryError> {
    debug_assert_eq!(s.dim(), dof);
    for &j in s.joints() {
        w.write_f64::<LE>(j)?;
    }
    Ok(())
}

fn read_state(r: &mut impl Read, dof: usize) -> Result<RobotState, LibraryError> {
    let mut joints = Vec::with_capacity(dof);
    for _ in 0..dof {
        joints.push(read_finite(r, "joint value")?);
    }
    Ok(RobotState::new(joints))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerances::METRIC_THETA_WEIGHT;

    fn tiny_roi() -> RegionOfInterest {
        RegionOfInterest {
            regions: vec![RoiBox {
                x: (0.4, 0.6),
                y: (0.0, 0.2),
                theta: (0.0, 0.4),
            }],
            delta: [0.05, 0.05, 0.2],
        }
    }

    fn sample_library() -> PlanLibrary {
        let metric = PoseMetric {
            theta_weight: METRIC_THETA_WEIGHT,
        };
        PlanLibrary {
            seed: 99,
            metric,
            world_fingerprint: [7; 32],
            behavior_fingerprint: [9; 32],
            dof: 3,
            roi: tiny_roi(),
            tuples: vec![
                AttractorTuple {
                    w_attr: Pose2::new(0.45, 0.05, 0.1),
                    s_attr: RobotState::new(vec![0.1, 0.2, 0.3]),
                    radius: 0.08,
                    tau: Path {
                        waypoints: vec![
                            RobotState::new(vec![0.0, 0.0, 0.0]),
                            RobotState::new(vec![0.1, 0.2, 0.3]),
                        ],
                    },
                },
                AttractorTuple {
                    w_attr: Pose2::new(0.55, 0.15, 0.3),
                    s_attr: RobotState::new(vec![0.4, 0.5, 0.6]),
                    radius: 0.05,
                    tau: Path {
                        waypoints: vec![
                            RobotState::new(vec![0.0, 0.0, 0.0]),
                            RobotState::new(vec![0.2, 0.1, 0.0]),
                            RobotState::new(vec![0.4, 0.5, 0.6]),
                        ],
                    },
                },
            ],
            infeasible: vec![InfeasibleRecord {
                cell: CellId {
                    region: 0,
                    ix: 3,
                    iy: 3,
                    itheta: 1,
                },
                class: InfeasibleClass::NoPath,
            }],
            roadmap: Some(Roadmap {
                vertices: vec![
                    RobotState::new(vec![0.0, 0.0, 0.0]),
                    RobotState::new(vec![0.5, 0.5, 0.5]),
                ],
                edges: vec![vec![1], vec![0]],
                connect_radius: 1.5,
            }),
            pose_table: Some(vec![PoseTableEntry {
                pose: Pose2::new(0.5, 0.1, 0.0),
                state: RobotState::new(vec![0.3, 0.3, 0.3]),
                tau: Path {
                    waypoints: vec![
                        RobotState::new(vec![0.0, 0.0, 0.0]),
                        RobotState::new(vec![0.3, 0.3, 0.3]),
                    ],
                },
            }]),
        }
    }

    /// Independent byte accounting for the serialized form.
    fn expected_size(lib: &PlanLibrary) -> usize {
        let state = lib.dof * 8;
        let header = 9 + 8 + 8 + 32 + 32 + 4;
        let roi = 4 + 3 * 8 + lib.roi.regions.len() * (6 * 8 + 3 * 4);
        let tuples: usize = 4 + lib
            .tuples
            .iter()
            .map(|t| 3 * 8 + state + 8 + 4 + t.tau.waypoints.len() * state)
            .sum::<usize>();
        let infeasible = 4 + lib.infeasible.len() * (4 * 4 + 1);
        let roadmap = 1 + lib.roadmap.as_ref().map_or(0, |rm| {
            4 + rm.vertices.len() * state
                + rm.edges.iter().map(|e| 4 + 4 * e.len()).sum::<usize>()
                + 8
        });
        let table = 1 + lib.pose_table.as_ref().map_or(0, |entries| {
            4 + entries
                .iter()
                .map(|e| 3 * 8 + state + 4 + e.tau.waypoints.len() * state)
                .sum::<usize>()
        });
        header + roi + tuples + infeasible + roadmap + table
    }

    #[test]
    fn empty_library_has_exact_header_size() {
        let lib = PlanLibrary {
            seed: 1,
            metric: PoseMetric {
                theta_weight: METRIC_THETA_WEIGHT,
            },
            world_fingerprint: [0; 32],
            behavior_fingerprint: [0; 32],
            dof: 3,
            roi: RegionOfInterest {
                regions: Vec::new(),
                delta: [0.1, 0.1, 0.1],
            },
            tuples: Vec::new(),
            infeasible: Vec::new(),
            roadmap: None,
            pose_table: None,
        };
        let mut bytes = Vec::new();
        lib.write_to(&mut bytes).unwrap();
        // magic + seed + weight + two fingerprints + dof + empty sections
        assert_eq!(bytes.len(), 9 + 8 + 8 + 32 + 32 + 4 + (4 + 24) + 4 + 4 + 1 + 1);
        assert_eq!(bytes.len(), expected_size(&lib));
    }

    #[test]
    fn serialized_size_matches_accounting() {
        let lib = sample_library();
        let mut bytes = Vec::new();
        lib.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), expected_size(&lib));
        assert_eq!(lib.memory_report().unwrap().serialized_bytes, bytes.len());
    }

    #[test]
    fn library_round_trips_through_a_file() {
        let lib = sample_library();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lib.bctmp");
        lib.save(&path).unwrap();
        let loaded = PlanLibrary::load(&path).unwrap();
        assert_eq!(lib, loaded);
        // sidecar summary exists and is valid json
        let sidecar = std::fs::read_to_string(dir.path().join("lib.bctmp.json")).unwrap();
        let summary: serde_json::Value = serde_json::from_str(&sidecar).unwrap();
        assert_eq!(summary["tuple_count"], 2);
    }

    #[test]
    fn version_byte_is_checked() {
        let lib = sample_library();
        let mut bytes = Vec::new();
        lib.write_to(&mut bytes).unwrap();
        bytes[8] = b'2';
        match PlanLibrary::read_from(&mut bytes.as_slice()) {
            Err(LibraryError::VersionMismatch { found: b'2' }) => {}
            other => panic!("expected version mismatch, got {other:?}"),
        }
        bytes[0] = b'X';
        assert!(matches!(
            PlanLibrary::read_from(&mut bytes.as_slice()),
            Err(LibraryError::CorruptFile(_))
        ));
    }

    #[test]
    fn truncation_and_trailing_bytes_are_corruption() {
        let lib = sample_library();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lib.bctmp");
        lib.save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();

        let cut = dir.path().join("cut.bctmp");
        std::fs::write(&cut, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(
            PlanLibrary::load(&cut),
            Err(LibraryError::CorruptFile(_))
        ));

        let padded = dir.path().join("padded.bctmp");
        let mut grown = bytes.clone();
        grown.extend_from_slice(&[0, 0]);
        std::fs::write(&padded, &grown).unwrap();
        assert!(matches!(
            PlanLibrary::load(&padded),
            Err(LibraryError::CorruptFile(_))
        ));
    }

    #[test]
    fn checked_load_rejects_foreign_artifacts() {
        use crate::geom::Pose2;
        use crate::world::{ArmSpec, GripperSpec};
        let world = World {
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
        };
        let spec: BehaviorSpec =
            serde_json::from_str(r#"{"name": "grasp", "K": 5}"#).unwrap();
        let mut lib = sample_library();
        lib.behavior_fingerprint = spec.fingerprint();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lib.bctmp");
        lib.save(&path).unwrap();
        // world fingerprint [7; 32] does not belong to `world`
        assert!(matches!(
            PlanLibrary::load_checked(&path, &world, &spec),
            Err(LibraryError::FingerprintMismatch { which: "world" })
        ));
        lib.world_fingerprint = world.fingerprint();
        lib.behavior_fingerprint = [9; 32];
        lib.save(&path).unwrap();
        assert!(matches!(
            PlanLibrary::load_checked(&path, &world, &spec),
            Err(LibraryError::FingerprintMismatch { which: "behavior" })
        ));
    }

    #[test]
    fn containment_lookup_picks_nearest_and_scans_everything() {
        let mut lib = sample_library();
        lib.tuples[0].radius = 0.3;
        lib.tuples[1].radius = 0.3;
        // near tuple 1, inside both balls
        let goal = Pose2::new(0.54, 0.14, 0.28);
        let before = crate::instrument::snapshot();
        let (index, _) = lib.find_containing_tuple(&goal).unwrap();
        let used = crate::instrument::snapshot().since(&before);
        assert_eq!(index, 1);
        assert_eq!(used.distance_evals, lib.tuples.len() as u64);
        // lookup does no planning, collision checking, or simulation
        assert_eq!(used.plan_calls, 0);
        assert_eq!(used.collision_checks, 0);
        assert_eq!(used.rollout_calls, 0);

        // outside both balls
        assert!(lib.find_containing_tuple(&Pose2::new(2.0, 2.0, 0.0)).is_none());

        // exact tie: attractors mirrored across the goal at exactly
        // representable offsets resolve to the first tuple
        lib.tuples[0].w_attr = Pose2::new(0.25, 0.05, 0.1);
        lib.tuples[1].w_attr = Pose2::new(0.75, 0.05, 0.1);
        let mid = Pose2::new(0.5, 0.05, 0.1);
        let d0 = lib.metric.distance(&mid, &lib.tuples[0].w_attr);
        let d1 = lib.metric.distance(&mid, &lib.tuples[1].w_attr);
        assert_eq!(d0, d1, "construction should be exactly equidistant");
        let (index, _) = lib.find_containing_tuple(&mid).unwrap();
        assert_eq!(index, 0);
    }

    #[test]
    fn covered_cells_counts_ball_contents() {
        let mut lib = sample_library();
        lib.tuples.truncate(1);
        lib.tuples[0].w_attr = Pose2::new(0.425, 0.025, 0.1);
        lib.tuples[0].radius = 0.051;
        // ball of metric radius 0.051 around the center of cell (0,0,0):
        // reaches one cell over in x or y (0.05), and theta neighbors cost
        // 0.2 * weight = 0.06 > 0.051, so exactly 3 cells are inside
        let covered = lib.covered_cell_count();
        assert_eq!(covered, 3);
        let report = lib.memory_report().unwrap();
        assert_eq!(report.covered_cells, 3);
        assert_eq!(report.tuple_count, 1);
        assert_eq!(report.waypoints, 2);
    }
}
