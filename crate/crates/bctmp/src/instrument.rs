//! Thread-local operation counters.
//!
//! The online query path is claimed to do no planning work: its lookup phase
//! must run zero collision checks, zero plan calls, and zero rollouts, and
//! exactly one metric evaluation per stored tuple. These counters make that
//! claim testable. Counts are per thread, so concurrent tests and rayon
//! workers do not interfere with a caller measuring its own deltas.

use std::cell::Cell;

/// Snapshot of the calling thread's operation counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    /// Single-state collision queries.
    pub collision_checks: u64,
    /// Joint-space edge validations (each also runs collision checks).
    pub edge_checks: u64,
    /// Motion-planner invocations (tree search or roadmap search).
    pub plan_calls: u64,
    /// Behavior rollout simulations.
    pub rollout_calls: u64,
    /// Object-pose metric evaluations.
    pub distance_evals: u64,
}

impl Counters {
    /// Counts accumulated since `earlier` on this thread.
    #[must_use]
    pub fn since(&self, earlier: &Counters) -> Counters {
        Counters {
            collision_checks: self.collision_checks - earlier.collision_checks,
            edge_checks: self.edge_checks - earlier.edge_checks,
            plan_calls: self.plan_calls - earlier.plan_calls,
            rollout_calls: self.rollout_calls - earlier.rollout_calls,
            distance_evals: self.distance_evals - earlier.distance_evals,
        }
    }
}

thread_local! {
    static COUNTERS: Cell<Counters> = const { Cell::new(Counters {
        collision_checks: 0,
        edge_checks: 0,
        plan_calls: 0,
        rollout_calls: 0,
        distance_evals: 0,
    }) };
}

/// Current counts for the calling thread.
#[must_use]
pub fn snapshot() -> Counters {
    COUNTERS.with(|c| c.get())
}

fn bump(f: impl FnOnce(&mut Counters)) {
    COUNTERS.with(|c| {
        let mut v = c.get();
        f(&mut v);
        c.set(v);
    });
}

pub(crate) fn count_collision_check() {
    bump(|c| c.collision_checks += 1);
}

pub(crate) fn count_edge_check() {
    bump(|c| c.edge_checks += 1);
}

pub(crate) fn count_plan_call() {
    bump(|c| c.plan_calls += 1);
}

pub(crate) fn count_rollout() {
    bump(|c| c.rollout_calls += 1);
}

pub(crate) fn count_distance_eval() {
    bump(|c| c.distance_evals += 1);
}
