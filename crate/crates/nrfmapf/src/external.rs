//! SAT backend that runs an external solver on a DIMACS file per call.
//!
//! The session keeps every clause and re-solves from scratch each time, so
//! learned state is not carried between calls.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use nrfmapf_core::{Clause, Deadline, Lit, SatBackend, SolveOutcome, SolveStats, SolveStatus};

use crate::dimacs;

const POLL: Duration = Duration::from_millis(2);

#[derive(Debug, Clone)]
pub struct ExternalSolver {
    command: PathBuf,
    args: Vec<String>,
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl ExternalSolver {
    /// `command args... <cnf-file>` is run for every solve.
    pub fn new(command: PathBuf, args: Vec<String>) -> Self {
        ExternalSolver { command, args, num_vars: 0, clauses: Vec::new() }
    }

    fn run(&self, deadline: &Deadline<'_>) -> Result<SolveOutcome, String> {
        let start = Instant::now();
        let stats = |s: Instant| SolveStats { elapsed: s.elapsed(), ..SolveStats::default() };
        let mut file = tempfile::Builder::new().suffix(".cnf").tempfile().map_err(|e| e.to_string())?;
        let mut text = String::new();
        nrfmapf_core::cnf::write_dimacs(&mut text, self.num_vars, &self.clauses).expect("writing to a String");
        file.write_all(text.as_bytes()).and_then(|_| file.flush()).map_err(|e| e.to_string())?;

        let mut child = Command::new(&self.command)
            .args(&self.args)
            .arg(file.path())
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| format!("cannot run {}: {e}", self.command.display()))?;
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let reader = std::thread::spawn(move || {
            let mut out = String::new();
            stdout.read_to_string(&mut out).map(|_| out)
        });
        loop {
            if child.try_wait().map_err(|e| e.to_string())?.is_some() {
                break;
            }
            if deadline.expired() {
                let _ = child.kill();
                let _ = child.wait();
                // Not joined: a grandchild may still hold the pipe open.
                drop(reader);
                return Ok(SolveOutcome::timeout(stats(start)));
            }
            std::thread::sleep(POLL);
        }
        let output = reader.join().map_err(|_| "stdout reader panicked".to_string())?.map_err(|e| e.to_string())?;
        let (status, model) = dimacs::parse_solver_output(&output, self.num_vars).map_err(|e| e.to_string())?;
        match (status, model) {
            (SolveStatus::Sat, Some(model)) => {
                if let Some(c) = self.clauses.iter().find(|c| !c.iter().any(|l| l.eval(&model))) {
                    return Err(format!("solver model violates clause {c:?}"));
                }
                Ok(SolveOutcome::sat(model, stats(start)))
            }
            (SolveStatus::Unsat, _) => Ok(SolveOutcome::unsat(stats(start))),
            _ => Ok(SolveOutcome::timeout(stats(start))),
        }
    }
}

impl SatBackend for ExternalSolver {
    fn reserve_vars(&mut self, count: usize) {
        self.num_vars = self.num_vars.max(count);
    }

    fn add_clause(&mut self, clause: &[Lit]) {
        if let Some(max) = clause.iter().map(|l| l.var().index() + 1).max() {
            self.num_vars = self.num_vars.max(max);
        }
        self.clauses.push(clause.to_vec());
    }

    fn solve(&mut self, deadline: &Deadline<'_>) -> SolveOutcome {
        if deadline.expired() {
            return SolveOutcome::timeout(SolveStats::default());
        }
        if self.clauses.iter().any(|c| c.is_empty()) {
            return SolveOutcome::unsat(SolveStats::default());
        }
        self.run(deadline).unwrap_or_else(|msg| SolveOutcome::failed(msg, SolveStats::default()))
    }

    fn num_vars(&self) -> usize {
        self.num_vars
    }
}
