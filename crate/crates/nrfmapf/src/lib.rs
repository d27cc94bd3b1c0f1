//! Std companion to `nrfmapf-core`: movingai map and scenario files, an
//! external DIMACS solver backend, and the benchmark harness behind the
//! `nrfmapf` binary.

pub mod bench;
pub mod dimacs;
pub mod external;
pub mod movingai;

mod error;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use nrfmapf_core::{
    solve_optimal, CdclSolver, Clock, Deadline, MapfInstance, ModelKind, SatBackend, SolveReport, SolverConfig,
};

pub use error::{Error, Result};
pub use external::ExternalSolver;

/// Environment variable naming the default external solver command.
pub const SOLVER_CMD_ENV: &str = "NRFMAPF_SOLVER_CMD";

/// Wall clock started at construction.
#[derive(Debug, Clone, Copy)]
pub struct StdClock(Instant);

impl StdClock {
    pub fn start() -> Self {
        StdClock(Instant::now())
    }
}

impl Clock for StdClock {
    fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Embedded,
    /// Solver executable plus arguments placed before the DIMACS file path.
    External { command: PathBuf, args: Vec<String> },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub backend: Backend,
    pub seed: u64,
    /// Wall-clock limit for the whole optimisation.
    pub timeout: Option<Duration>,
    pub per_call_budget: Option<Duration>,
    pub max_soc: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            backend: Backend::Embedded,
            seed: nrfmapf_core::cdcl::DEFAULT_SEED,
            timeout: None,
            per_call_budget: None,
            max_soc: None,
        }
    }
}

impl RunConfig {
    /// A fresh, empty session of the configured backend.
    pub fn new_session(&self) -> Box<dyn SatBackend> {
        match &self.backend {
            Backend::Embedded => Box::new(CdclSolver::new(self.seed)),
            Backend::External { command, args } => Box::new(ExternalSolver::new(command.clone(), args.clone())),
        }
    }
}

/// Sum-of-costs optimal solve of `instance` with the `kind` model, timed by
/// the wall clock.
pub fn solve(instance: &MapfInstance, kind: ModelKind, config: &RunConfig) -> Result<SolveReport> {
    let clock = StdClock::start();
    let deadline = Deadline::new(&clock, config.timeout);
    let solver_config = SolverConfig { per_call_budget: config.per_call_budget, max_soc: config.max_soc };
    Ok(solve_optimal(instance, kind, &mut || config.new_session(), &deadline, &solver_config)?)
}
