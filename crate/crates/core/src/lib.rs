//! Sum-of-costs optimal multi-agent path finding compiled to SAT.
//!
//! Three models are supported over the same multi-valued decision diagrams:
//! the complete model, the conflict-lazy model (conflicts refined on demand)
//! and the non-refined model, where path consistency is dropped entirely and
//! per-agent paths are recovered from the DAG read back from each satisfying
//! assignment.
//!
//! The crate is `no_std` and only needs `alloc`. Anything touching files,
//! processes or wall clocks lives in the companion `nrfmapf` crate; the core
//! sees time only through the [`clock::Clock`] trait.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cdcl;
pub mod cegar;
pub mod clock;
pub mod cnf;
pub mod encode;
mod error;
pub mod graph;
pub mod instance;
pub mod mdd;
pub mod sat;

pub use cegar::{
    extract_path, interpret_dags, solve_bounded, solve_optimal, AgentDag, BoundedOutcome, BoundedResult,
    ReportOutcome, SolveReport, SolverConfig,
};
pub use cdcl::CdclSolver;
pub use clock::{Clock, Deadline};
pub use cnf::{Clause, CnfFormula, Lit, Var, VarMap};
pub use encode::{build_model, EncodedModel, ModelKind};
pub use error::Error;
pub use graph::{Graph, VertexId, UNREACHABLE};
pub use instance::{solution_costs, AgentPath, Conflict, ConflictKind, MapfInstance};
pub use mdd::{HorizonPlan, Mdd};
pub use sat::{SatBackend, SolveOutcome, SolveStats, SolveStatus};

pub type Result<T> = core::result::Result<T, Error>;
