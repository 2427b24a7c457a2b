//! Exact minimum-time trip planning for a single electric vehicle.
//!
//! The vehicle drives over a directed graph, may fully recharge at static
//! charge stations (SCS) and may attach a mobile energy disseminator (MED)
//! at designated nodes. An attached MED induces energy while driving at the
//! price of a slowdown, with a per-MED energy budget and a cap on how many
//! MEDs a trip may use.
//!
//! Modules:
//!
//! * [`instance`]: problem data, validation, JSON I/O and node-copy expansion.
//! * [`engine`]: the label-setting dynamic program with dominance pruning.
//! * [`solution`]: decision patterns, their evaluation and verified solutions.
//! * [`milp`]: the arc-flow mixed-integer model, LP export and solution import.
//! * [`oracle`]: exhaustive enumeration for small instances.
//! * [`gen`]: seeded random instance generator.

pub mod engine;
pub mod gen;
pub mod instance;
pub mod milp;
pub mod oracle;
pub mod solution;

/// Absolute tolerance used for energy and time comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

pub use engine::{solve, SolveError, SolveOptions};
pub use instance::{Instance, NodeKey, NodeRole};
pub use solution::Solution;
