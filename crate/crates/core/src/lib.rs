//! Aircraft routing under periodic maintenance constraints.
//!
//! The crate covers three related problems:
//!
//! * the periodic problem on an Eulerian multigraph of lines of flying
//!   ([`periodic`]), with constructive solvers for `gamma <= 4` and an exact
//!   state-space oracle;
//! * the constrained path partition problem on layered DAGs ([`cpp`]),
//!   solved by the pebble game ([`pebble`]) for a fixed number of paths;
//! * the finite-horizon problem ([`finite_horizon`]), solved for quiet-night
//!   instances through a reduction to path partition.
//!
//! [`reductions`] holds instance transformations and random generators, and
//! [`document`] the tagged JSON envelope shared with the command-line tool.

pub mod cpp;
pub mod document;
pub mod dot;
mod error;
pub mod finite_horizon;
pub mod flow;
pub mod graph;
pub mod pebble;
pub mod periodic;
mod perm;
pub mod reductions;

pub use document::{Document, DocumentError};
pub use error::Error;

pub use cpp::{brute_force_cpp, validate_cpp_instance, validate_path_partition, CppError, CppInstance, PathPartition};
pub use finite_horizon::{
    is_quiet_night, lift_cpp_solution_to_routes, reduce_quiet_night_to_cpp, solve_ignoring_maintenance,
    solve_quiet_night, validate_plan, FhError, FiniteHorizonInstance, RoutePlan,
};
pub use graph::{
    decompose_into_closed_trails, is_acyclic, is_eulerian, topological_order, Arc, ArcId, ArcPath, ClosedTrail,
    DirectedMultigraph, GraphError, Reachability, VertexId,
};
pub use pebble::{compute_layers, extract_path_partition, solve_game, PebbleError};
pub use periodic::{
    solve_absolutely_periodic, validate_absolutely_periodic, AbsolutelyPeriodicSolution, PeriodicDiagnostics,
    PeriodicError, PeriodicInstance,
};
pub use reductions::{cpp_to_finite_horizon, two_commodity_to_cpp, ReductionError, TwoCommodityInstance};
