//! Sampling-based joint-space motion planning.
//!
//! `plan_path` runs bidirectional RRT with a connect heuristic followed by
//! randomized shortcutting; `build_roadmap`/`plan_on_roadmap` provide a
//! precomputed-roadmap alternative. Both are deterministic given a seed, and
//! both distinguish "no path found" (`Ok(None)`) from invalid endpoints
//! (errors).

use crate::instrument;
use crate::tolerances::{EDGE_RESOLUTION, RRT_GOAL_BIAS, RRT_STEP, SHORTCUT_ATTEMPTS};
use crate::world::{RobotState, World, WorldError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

/// A joint-space path: consecutive waypoints connected by straight edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<RobotState>,
}

impl Path {
    /// Total joint-space length.
    #[must_use]
    pub fn length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| w[0].dist(&w[1]))
            .sum()
    }

    /// Checks every waypoint and every edge at the given resolution.
    pub fn collision_free(&self, world: &World, resolution: f64) -> Result<bool, WorldError> {
        match self.waypoints.as_slice() {
            [] => Ok(true),
            [only] => Ok(!world.in_collision(only)?),
            _ => {
                for pair in self.waypoints.windows(2) {
                    if !world.edge_collision_free(&pair[0], &pair[1], resolution)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

/// Resource limits for one planning call. The iteration cap is the
/// deterministic bound; the wall-clock timeout is a safety net.
#[derive(Clone, Copy, Debug)]
pub struct PlannerBudget {
    pub max_iterations: usize,
    pub timeout: Duration,
}

impl Default for PlannerBudget {
    fn default() -> Self {
        PlannerBudget {
            max_iterations: 4000,
            timeout: Duration::from_secs(5),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("start state is in collision")]
    StartInCollision,
    #[error("goal state is in collision")]
    GoalInCollision,
    #[error("could not sample {wanted} free states ({got} found)")]
    SamplingExhausted { wanted: usize, got: usize },
    #[error(transparent)]
    World(#[from] WorldError),
}

// ─── bidirectional tree search ──────────────────────────────────────────

struct Tree {
    nodes: Vec<RobotState>,
    parents: Vec<usize>,
}

enum Extend {
    /// New (or matching existing) node index; `true` if it reached the
    /// sample exactly.
    Advanced(usize, bool),
    Trapped,
}

impl Tree {
    fn rooted(root: RobotState) -> Self {
        Tree {
            nodes: vec![root],
            parents: vec![0],
        }
    }

    fn nearest(&self, q: &RobotState) -> (usize, f64) {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (i, n.dist(q)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("distances are finite"))
            .expect("tree is never empty")
    }

    fn extend(&mut self, world: &World, q_rand: &RobotState) -> Result<Extend, WorldError> {
        let (near, dist) = self.nearest(q_rand);
        if dist < 1e-12 {
            return Ok(Extend::Advanced(near, true));
        }
        let reached = dist <= RRT_STEP;
        let q_new = if reached {
            q_rand.clone()
        } else {
            self.nodes[near].lerp(q_rand, RRT_STEP / dist)
        };
        if world.edge_collision_free(&self.nodes[near], &q_new, EDGE_RESOLUTION)? {
            self.nodes.push(q_new);
            self.parents.push(near);
            Ok(Extend::Advanced(self.nodes.len() - 1, reached))
        } else {
            Ok(Extend::Trapped)
        }
    }

    fn connect(&mut self, world: &World, target: &RobotState) -> Result<Option<usize>, WorldError> {
        loop {
            match self.extend(world, target)? {
                Extend::Advanced(idx, true) => return Ok(Some(idx)),
                Extend::Advanced(_, false) => continue,
                Extend::Trapped => return Ok(None),
            }
        }
    }

    /// Chain from the root to `idx`, root first.
    fn chain(&self, mut idx: usize) -> Vec<RobotState> {
        let mut out = vec![self.nodes[idx].clone()];
        while self.parents[idx] != idx {
            idx = self.parents[idx];
            out.push(self.nodes[idx].clone());
        }
        out.reverse();
        out
    }
}

/// Randomized shortcutting: repeatedly tries to replace a waypoint run with
/// the direct edge. Never lengthens the path and preserves validity.
pub fn shortcut(
    world: &World,
    waypoints: &mut Vec<RobotState>,
    rng: &mut impl Rng,
) -> Result<(), WorldError> {
    for _ in 0..SHORTCUT_ATTEMPTS {
        if waypoints.len() < 3 {
            break;
        }
        let i = rng.gen_range(0..waypoints.len() - 2);
        let j = rng.gen_range(i + 2..waypoints.len());
        if world.edge_collision_free(&waypoints[i], &waypoints[j], EDGE_RESOLUTION)? {
            waypoints.drain(i + 1..j);
        }
    }
    Ok(())
}

/// Plans a collision-free joint path from `start` to `goal`.
///
/// Returns `Ok(None)` when the budget runs out without a connection — the
/// query may genuinely have no solution, or just not be found yet. Colliding
/// endpoints are errors, not planner failures. Deterministic for a seed.
pub fn plan_path(
    world: &World,
    start: &RobotState,
    goal: &RobotState,
    budget: &PlannerBudget,
    seed: u64,
) -> Result<Option<Path>, PlanError> {
    instrument::count_plan_call();
    if world.in_collision(start)? {
        return Err(PlanError::StartInCollision);
    }
    if world.in_collision(goal)? {
        return Err(PlanError::GoalInCollision);
    }
    if start.dist(goal) < 1e-12 {
        return Ok(Some(Path {
            waypoints: vec![start.clone()],
        }));
    }
    if world.edge_collision_free(start, goal, EDGE_RESOLUTION)? {
        return Ok(Some(Path {
            waypoints: vec![start.clone(), goal.clone()],
        }));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut forward = Tree::rooted(start.clone());
    let mut backward = Tree::rooted(goal.clone());
    // `swapped` tracks whether `forward` currently holds the goal tree
    let mut swapped = false;
    let t0 = Instant::now();

    for iteration in 0..budget.max_iterations {
        if iteration % 64 == 0 && t0.elapsed() > budget.timeout {
            break;
        }
        let q_rand = if rng.gen::<f64>() < RRT_GOAL_BIAS {
            backward.nodes[0].clone()
        } else {
            world.sample_state(&mut rng)
        };
        if let Extend::Advanced(idx, _) = forward.extend(world, &q_rand)? {
            let tip = forward.nodes[idx].clone();
            if let Some(other) = backward.connect(world, &tip)? {
                let mut waypoints = forward.chain(idx);
                let mut tail = backward.chain(other);
                tail.reverse();
                waypoints.extend(tail.into_iter().skip(1));
                if swapped {
                    waypoints.reverse();
                }
                shortcut(world, &mut waypoints, &mut rng)?;
                return Ok(Some(Path { waypoints }));
            }
        }
        std::mem::swap(&mut forward, &mut backward);
        swapped = !swapped;
    }
    Ok(None)
}

// ─── probabilistic roadmap ──────────────────────────────────────────────

/// Precomputed roadmap: free vertices plus verified edges between nearby
/// pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Roadmap {
    pub vertices: Vec<RobotState>,
    /// Adjacency lists; symmetric.
    pub edges: Vec<Vec<usize>>,
    pub connect_radius: f64,
}

impl Roadmap {
    #[must_use]
    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Samples `n` collision-free vertices (up to 50 attempts each) and links
/// every pair within `connect_radius` whose straight edge is free.
pub fn build_roadmap(
    world: &World,
    n: usize,
    connect_radius: f64,
    seed: u64,
) -> Result<Roadmap, PlanError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while vertices.len() < n && attempts < 50 * n {
        attempts += 1;
        let q = world.sample_state(&mut rng);
        if !world.in_collision(&q)? {
            vertices.push(q);
        }
    }
    if vertices.len() < n {
        return Err(PlanError::SamplingExhausted {
            wanted: n,
            got: vertices.len(),
        });
    }
    let mut edges = vec![Vec::new(); n];
    for a in 0..n {
        for b in a + 1..n {
            if vertices[a].dist(&vertices[b]) <= connect_radius
                && world.edge_collision_free(&vertices[a], &vertices[b], EDGE_RESOLUTION)?
            {
                edges[a].push(b);
                edges[b].push(a);
            }
        }
    }
    Ok(Roadmap {
        vertices,
        edges,
        connect_radius,
    })
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap, we want lowest cost first
        other
            .cost
            .partial_cmp(&self.cost)
            .expect("costs are finite")
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Plans via the roadmap: connects both endpoints to every in-radius vertex
/// with a free edge, then runs shortest-path search. The seed only feeds the
/// final shortcutting pass.
pub fn plan_on_roadmap(
    world: &World,
    roadmap: &Roadmap,
    start: &RobotState,
    goal: &RobotState,
    seed: u64,
) -> Result<Option<Path>, PlanError> {
    instrument::count_plan_call();
    if world.in_collision(start)? {
        return Err(PlanError::StartInCollision);
    }
    if world.in_collision(goal)? {
        return Err(PlanError::GoalInCollision);
    }
    if start.dist(goal) < 1e-12 {
        return Ok(Some(Path {
            waypoints: vec![start.clone()],
        }));
    }
    if world.edge_collision_free(start, goal, EDGE_RESOLUTION)? {
        return Ok(Some(Path {
            waypoints: vec![start.clone(), goal.clone()],
        }));
    }

    let n = roadmap.vertices.len();
    let (start_id, goal_id) = (n, n + 1);
    let state_of = |id: usize| -> &RobotState {
        match id {
            i if i < n => &roadmap.vertices[i],
            i if i == start_id => start,
            _ => goal,
        }
    };
    // endpoint links, computed lazily once
    let mut endpoint_links: Vec<Vec<usize>> = vec![Vec::new(), Vec::new()];
    for (slot, endpoint) in [start, goal].into_iter().enumerate() {
        for (i, v) in roadmap.vertices.iter().enumerate() {
            if endpoint.dist(v) <= roadmap.connect_radius
                && world.edge_collision_free(endpoint, v, EDGE_RESOLUTION)?
            {
                endpoint_links[slot].push(i);
            }
        }
    }

    let total = n + 2;
    let mut dist = vec![f64::INFINITY; total];
    let mut prev = vec![usize::MAX; total];
    let mut heap = BinaryHeap::new();
    dist[start_id] = 0.0;
    heap.push(HeapEntry {
        cost: 0.0,
        node: start_id,
    });
    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        if node == goal_id {
            break;
        }
        let neighbors: Vec<usize> = if node == start_id {
            endpoint_links[0].clone()
        } else if node == goal_id {
            Vec::new()
        } else {
            let mut ns = roadmap.edges[node].clone();
            if endpoint_links[1].contains(&node) {
                ns.push(goal_id);
            }
            ns
        };
        for next in neighbors {
            let step = state_of(node).dist(state_of(next));
            let candidate = cost + step;
            if candidate < dist[next] {
                dist[next] = candidate;
                prev[next] = node;
                heap.push(HeapEntry {
                    cost: candidate,
                    node: next,
                });
            }
        }
    }
    if dist[goal_id].is_infinite() {
        return Ok(None);
    }
    let mut ids = vec![goal_id];
    while *ids.last().unwrap() != start_id {
        ids.push(prev[*ids.last().unwrap()]);
    }
    ids.reverse();
    let mut waypoints: Vec<RobotState> = ids.into_iter().map(|i| state_of(i).clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shortcut(world, &mut waypoints, &mut rng)?;
    Ok(Some(Path { waypoints }))
}
