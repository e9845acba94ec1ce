//! Multi-agent path finding on graphs with priority inheritance and
//! backtracking, in two flavours: the classic one-step solver and a windowed
//! generalization that lets agents secure several steps ahead. Ships with a
//! provably checkable path-safety core, MovingAI benchmark ingestion, a
//! deterministic run harness, and SVG rendering.

pub mod graph;
pub mod io;
pub mod paths;
pub mod planner;
pub mod scenario;
pub mod solver;

pub use graph::{Graph, GraphError, GraphKind, NodeId, PibtCondition};
pub use paths::{AgentId, ExecutionCheck, Path, PathSet, ProvisionalPaths};
pub use scenario::{
    generate_random_instance, metrics, run, Instance, Mode, ModeSpec, Placement, RunResult,
    ScenarioError, Simulation,
};
pub use solver::{PibtSolver, SolverKind, WinPibtSolver};
