//! DIMACS CNF input and SAT-competition style solver output.

use std::fmt::Write as _;

use nrfmapf_core::{Clause, Lit, SolveStatus};

use crate::{Error, Result};

/// Parses a DIMACS CNF document into `(num_vars, clauses)`.
pub fn parse_cnf(text: &str) -> Result<(usize, Vec<Clause>)> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            match parts.as_slice() {
                ["cnf", v, c] => {
                    let v = v.parse().map_err(|_| Error::parse(n, "bad variable count"))?;
                    let c = c.parse().map_err(|_| Error::parse(n, "bad clause count"))?;
                    header = Some((v, c));
                }
                _ => return Err(Error::parse(n, format!("bad problem line {line:?}"))),
            }
            continue;
        }
        let (num_vars, _) = header.ok_or_else(|| Error::parse(n, "clause before `p cnf` line"))?;
        for tok in line.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| Error::parse(n, format!("bad literal {tok:?}")))?;
            if x == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if x.unsigned_abs() as usize > num_vars {
                return Err(Error::parse(n, format!("literal {x} exceeds {num_vars} variables")));
            } else {
                current.push(Lit::from_dimacs(x));
            }
        }
    }
    let (num_vars, _) = header.ok_or_else(|| Error::parse(1, "missing `p cnf` line"))?;
    if !current.is_empty() {
        clauses.push(current);
    }
    Ok((num_vars, clauses))
}

/// Status and (for SAT) the model from solver output with `s` and `v` lines.
/// Variables not mentioned in `v` lines default to false.
pub fn parse_solver_output(text: &str, num_vars: usize) -> Result<(SolveStatus, Option<Vec<bool>>)> {
    let mut status = None;
    let mut model = vec![false; num_vars];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(s) = line.strip_prefix("s ") {
            status = Some(match s.trim() {
                "SATISFIABLE" => SolveStatus::Sat,
                "UNSATISFIABLE" => SolveStatus::Unsat,
                "UNKNOWN" => SolveStatus::Timeout,
                other => return Err(Error::parse(i + 1, format!("unknown status {other:?}"))),
            });
        } else if let Some(vals) = line.strip_prefix("v ").or_else(|| (line == "v").then_some("")) {
            for tok in vals.split_whitespace() {
                let x: i64 = tok.parse().map_err(|_| Error::parse(i + 1, format!("bad value {tok:?}")))?;
                if x != 0 {
                    let v = x.unsigned_abs() as usize - 1;
                    if v < num_vars {
                        model[v] = x > 0;
                    }
                }
            }
        }
    }
    match status {
        None => Err(Error::parse(text.lines().count(), "no `s` line in solver output")),
        Some(SolveStatus::Sat) => Ok((SolveStatus::Sat, Some(model))),
        Some(s) => Ok((s, None)),
    }
}

/// `s`/`v` lines for an answer, the inverse of [`parse_solver_output`].
pub fn render_solver_output(status: SolveStatus, model: Option<&[bool]>) -> String {
    match status {
        SolveStatus::Sat => {
            let mut out = String::from("s SATISFIABLE\n");
            let lits: Vec<i64> = model
                .unwrap_or(&[])
                .iter()
                .enumerate()
                .map(|(v, &b)| if b { v as i64 + 1 } else { -(v as i64 + 1) })
                .chain([0])
                .collect();
            for chunk in lits.chunks(16) {
                out.push('v');
                for x in chunk {
                    write!(out, " {x}").unwrap();
                }
                out.push('\n');
            }
            out
        }
        SolveStatus::Unsat => "s UNSATISFIABLE\n".into(),
        SolveStatus::Timeout | SolveStatus::Failed => "s UNKNOWN\n".into(),
    }
}
