//! Backend-neutral incremental SAT interface.

use alloc::string::String;
use alloc::vec::Vec;
use core::time::Duration;

use crate::clock::Deadline;
use crate::cnf::{Clause, Lit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Sat,
    Unsat,
    Timeout,
    /// The backend could not produce an answer (e.g. an external process
    /// crashed or printed garbage).
    Failed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Truth value per variable; present iff `status` is `Sat`.
    pub model: Option<Vec<bool>>,
    pub stats: SolveStats,
    /// Diagnostic for `Failed`.
    pub message: Option<String>,
}

impl SolveOutcome {
    pub fn timeout(stats: SolveStats) -> Self {
        SolveOutcome { status: SolveStatus::Timeout, model: None, stats, message: None }
    }

    pub fn unsat(stats: SolveStats) -> Self {
        SolveOutcome { status: SolveStatus::Unsat, model: None, stats, message: None }
    }

    pub fn sat(model: Vec<bool>, stats: SolveStats) -> Self {
        SolveOutcome { status: SolveStatus::Sat, model: Some(model), stats, message: None }
    }

    pub fn failed(message: String, stats: SolveStats) -> Self {
        SolveOutcome { status: SolveStatus::Failed, model: None, stats, message: Some(message) }
    }
}

/// A solver session that accumulates clauses across `solve` calls.
///
/// Variables are created implicitly by the clauses that mention them;
/// [`SatBackend::reserve_vars`] makes sure the model covers variables that
/// occur in no clause.
pub trait SatBackend {
    fn reserve_vars(&mut self, count: usize);

    /// Adds a clause permanently. An empty clause makes the session
    /// unsatisfiable for good.
    fn add_clause(&mut self, clause: &[Lit]);

    fn add_clauses(&mut self, clauses: &[Clause]) {
        for c in clauses {
            self.add_clause(c);
        }
    }

    fn solve(&mut self, deadline: &Deadline<'_>) -> SolveOutcome;

    fn num_vars(&self) -> usize;
}

impl<B: SatBackend + ?Sized> SatBackend for alloc::boxed::Box<B> {
    fn reserve_vars(&mut self, count: usize) {
        (**self).reserve_vars(count)
    }
    fn add_clause(&mut self, clause: &[Lit]) {
        (**self).add_clause(clause)
    }
    fn solve(&mut self, deadline: &Deadline<'_>) -> SolveOutcome {
        (**self).solve(deadline)
    }
    fn num_vars(&self) -> usize {
        (**self).num_vars()
    }
}
