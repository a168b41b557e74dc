//! Two-phase manipulation planning for a planar n-link arm.
//!
//! The offline phase ([`preprocess`]) sweeps a region of object poses and
//! builds a [`library`] of attractor tuples: a robot initiation state, a
//! motion plan reaching it from home, and a verified radius of object poses
//! the associated behavior handles from that state. The online phase
//! ([`query`]) answers a goal pose with a containment lookup over the stored
//! tuples, so planning cost is a fixed scan independent of world complexity.
//!
//! Supporting modules: [`world`] (kinematics and collision), [`planner`]
//! (sampling-based motion planning), [`behavior`] (grasp and insertion
//! policies), [`roi`] (pose-space discretization), [`baselines`] and
//! [`bench`] (comparison planners and the benchmark harness).

pub mod baselines;
pub mod behavior;
pub mod bench;
pub mod geom;
pub mod instrument;
pub mod library;
pub mod planner;
pub mod preprocess;
pub mod query;
pub mod roi;
pub mod seeding;
pub mod tolerances;
pub mod world;
pub mod worlds;
