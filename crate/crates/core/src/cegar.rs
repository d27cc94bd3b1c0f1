//! Counterexample-guided solving loops.
//!
//! [`solve_optimal`] walks the sum-of-costs bound upward from the lower
//! bound. For each bound, [`solve_bounded`] solves the current abstraction,
//! turns the answer into paths, validates them and refines the formula with
//! every conflict found, until the paths are collision-free or the formula
//! becomes unsatisfiable.
//!
//! Under [`ModelKind::NonRefined`] an answer is not a set of paths: each
//! agent's true variables form a DAG inside its MDD ([`interpret_dags`]) from
//! which one start-to-goal path is read by breadth-first search
//! ([`extract_path`]).

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use crate::clock::Deadline;
use crate::encode::{build_model, EncodedModel, ModelKind};
use crate::graph::VertexId;
use crate::instance::{solution_costs, AgentPath, Conflict, MapfInstance};
use crate::sat::{SatBackend, SolveStatus};
use crate::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct SolverConfig {
    /// Budget for each individual SAT call, on top of the overall deadline.
    pub per_call_budget: Option<Duration>,
    /// Give up (reporting [`ReportOutcome::SocLimit`]) past this bound.
    pub max_soc: Option<u64>,
}

/// Sub-graph of an agent's MDD selected by a satisfying assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentDag {
    pub agent: usize,
    /// Selected vertices per step, sorted.
    layers: Vec<Vec<VertexId>>,
    /// `succ[t][k]`: selected successors of `layers[t][k]`, sorted.
    succ: Vec<Vec<Vec<VertexId>>>,
}

impl AgentDag {
    pub fn horizon(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layer(&self, t: usize) -> &[VertexId] {
        &self.layers[t]
    }

    pub fn contains(&self, v: VertexId, t: usize) -> bool {
        self.layers.get(t).is_some_and(|l| l.binary_search(&v).is_ok())
    }

    pub fn successors(&self, v: VertexId, t: usize) -> &[VertexId] {
        match (self.succ.get(t), self.layers.get(t).and_then(|l| l.binary_search(&v).ok())) {
            (Some(row), Some(k)) => &row[k],
            _ => &[],
        }
    }

    pub fn has_edge(&self, u: VertexId, t: usize, v: VertexId) -> bool {
        self.successors(u, t).binary_search(&v).is_ok()
    }

    pub fn node_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (VertexId, usize)> + '_ {
        self.layers.iter().enumerate().flat_map(|(t, l)| l.iter().map(move |&v| (v, t)))
    }
}

/// Reads one DAG per agent from `model` and checks that it contains the
/// start at step 0 and that every node reaches the goal at the horizon.
pub fn interpret_dags(model: &[bool], encoded: &EncodedModel) -> Result<Vec<AgentDag>> {
    let mut dags = Vec::with_capacity(encoded.mdds.len());
    for (a, mdd) in encoded.mdds.iter().enumerate() {
        let horizon = mdd.horizon();
        let layers: Vec<Vec<VertexId>> = (0..=horizon)
            .map(|t| {
                encoded
                    .varmap
                    .layer_vars(a, t)
                    .filter(|(_, x)| model[x.index()])
                    .map(|(v, _)| v)
                    .collect()
            })
            .collect();
        let succ: Vec<Vec<Vec<VertexId>>> = (0..horizon)
            .map(|t| {
                layers[t]
                    .iter()
                    .map(|&u| {
                        mdd.successors(u, t)
                            .iter()
                            .copied()
                            .filter(|w| layers[t + 1].binary_search(w).is_ok())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let dag = AgentDag { agent: a, layers, succ };
        check_dag(&dag, mdd.layer(0)[0], mdd.layer(horizon)[0])?;
        dags.push(dag);
    }
    Ok(dags)
}

fn check_dag(dag: &AgentDag, start: VertexId, goal: VertexId) -> Result<()> {
    let horizon = dag.horizon();
    let fail = |what: &str| Err(Error::Encoding(format!("DAG of agent {}: {what}", dag.agent)));
    if !dag.contains(start, 0) {
        return fail("start node not selected");
    }
    if dag.layer(horizon) != [goal] {
        return fail("last layer is not exactly the goal");
    }
    for t in 0..horizon {
        for (k, &v) in dag.layers[t].iter().enumerate() {
            // Successors are DAG nodes, and by induction from the last layer
            // every non-empty successor list means the goal is reachable.
            if dag.succ[t][k].is_empty() {
                return fail(&format!("node ({v}, {t}) cannot reach the goal"));
            }
        }
    }
    Ok(())
}

/// Breadth-first search from `(start, 0)` expanding successors in ascending
/// vertex order; the path to the goal follows first-discovery parents.
///
/// # Panics
/// If the DAG has no start-to-goal path, which [`interpret_dags`] rules out.
pub fn extract_path(dag: &AgentDag) -> AgentPath {
    let horizon = dag.horizon();
    let start = *dag.layer(0).first().expect("DAG without a start node");
    // parent[t][k]: index in layer t - 1 of the node that discovered layers[t][k].
    let mut parent: Vec<Vec<Option<usize>>> = dag.layers.iter().map(|l| vec![None; l.len()]).collect();
    let mut queue = VecDeque::new();
    let start_idx = dag.layers[0].binary_search(&start).unwrap();
    queue.push_back((0usize, start_idx));
    let mut discovered: Vec<Vec<bool>> = dag.layers.iter().map(|l| vec![false; l.len()]).collect();
    discovered[0][start_idx] = true;
    while let Some((t, k)) = queue.pop_front() {
        if t == horizon {
            continue;
        }
        for &w in &dag.succ[t][k] {
            let j = dag.layers[t + 1].binary_search(&w).unwrap();
            if !discovered[t + 1][j] {
                discovered[t + 1][j] = true;
                parent[t + 1][j] = Some(k);
                queue.push_back((t + 1, j));
            }
        }
    }
    assert!(discovered[horizon][0], "goal not reachable in DAG of agent {}", dag.agent);
    let mut rev = Vec::with_capacity(horizon + 1);
    let mut k = 0;
    for t in (0..=horizon).rev() {
        rev.push(dag.layers[t][k]);
        if t > 0 {
            k = parent[t][k].unwrap();
        }
    }
    rev.reverse();
    AgentPath::new(rev)
}

/// One inner iteration of a bounded solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationLog {
    pub soc: u64,
    pub iteration: usize,
    pub clauses_added: usize,
    pub conflicts_found: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundedOutcome {
    Solved(Vec<AgentPath>),
    Unsat,
    Timeout,
}

#[derive(Debug, Clone)]
pub struct BoundedResult {
    pub outcome: BoundedOutcome,
    /// Conflicts passed in plus every conflict discovered here.
    pub conflicts: Vec<Conflict>,
    pub sat_calls: usize,
    /// Inner iterations that ended in refinement.
    pub refinements: usize,
    pub initial_clauses: usize,
    pub final_clauses: usize,
    pub log: Vec<IterationLog>,
}

/// CEGAR loop for a fixed sum-of-costs bound. `new_backend` must return an
/// empty session; one is created per call.
pub fn solve_bounded<B, F>(
    instance: &MapfInstance,
    soc: u64,
    kind: ModelKind,
    conflicts_in: &[Conflict],
    new_backend: &mut F,
    deadline: &Deadline<'_>,
    config: &SolverConfig,
) -> Result<BoundedResult>
where
    B: SatBackend,
    F: FnMut() -> B,
{
    let mut model = build_model(instance, soc, kind, conflicts_in)?;
    let mut conflicts = conflicts_in.to_vec();
    let mut known: BTreeSet<Conflict> = conflicts.iter().copied().collect();
    let mut result = BoundedResult {
        outcome: BoundedOutcome::Timeout,
        conflicts: Vec::new(),
        sat_calls: 0,
        refinements: 0,
        initial_clauses: model.clause_count_initial,
        final_clauses: model.clause_count_initial,
        log: Vec::new(),
    };
    if deadline.expired() {
        result.conflicts = conflicts;
        return Ok(result);
    }

    let mut backend = new_backend();
    backend.reserve_vars(model.formula.num_vars());
    backend.add_clauses(model.formula.clauses());

    // A repeated tuple of paths means refinement made no progress.
    let mut seen: BTreeSet<Vec<AgentPath>> = BTreeSet::new();
    let outcome = loop {
        let call_deadline = deadline.tightened(config.per_call_budget);
        let answer = backend.solve(&call_deadline);
        result.sat_calls += 1;
        let values = match answer.status {
            SolveStatus::Unsat => break BoundedOutcome::Unsat,
            SolveStatus::Timeout => break BoundedOutcome::Timeout,
            SolveStatus::Failed => {
                return Err(Error::Backend(answer.message.unwrap_or_else(|| "no diagnostic".into())));
            }
            SolveStatus::Sat => answer.model.expect("Sat outcome without a model"),
        };
        let paths: Vec<AgentPath> = match kind {
            ModelKind::NonRefined => interpret_dags(&values, &model)?.iter().map(extract_path).collect(),
            _ => model.decode_paths(&values)?,
        };
        let found = instance.validate_solution(&paths)?;
        if found.is_empty() {
            let (cost, _) = solution_costs(&paths);
            if cost > soc {
                return Err(Error::Encoding(format!("paths cost {cost} exceed the bound {soc}")));
            }
            break BoundedOutcome::Solved(paths);
        }
        if !seen.insert(paths) {
            return Err(Error::Encoding(format!(
                "refinement loop at bound {soc} produced the same paths twice"
            )));
        }
        let before = model.formula.len();
        for c in &found {
            let clauses = crate::encode::conflict_to_clauses(c, &model.varmap);
            backend.add_clauses(&clauses);
            for clause in clauses {
                model.formula.add_clause(clause);
            }
            if known.insert(*c) {
                conflicts.push(*c);
            }
        }
        result.refinements += 1;
        let entry = IterationLog {
            soc,
            iteration: result.refinements,
            clauses_added: model.formula.len() - before,
            conflicts_found: found.len(),
        };
        log::debug!(
            "soc={} iteration={} clauses_added={} conflicts={}",
            entry.soc,
            entry.iteration,
            entry.clauses_added,
            entry.conflicts_found
        );
        result.log.push(entry);
        if deadline.expired() {
            break BoundedOutcome::Timeout;
        }
    };
    result.outcome = outcome;
    result.conflicts = conflicts;
    result.final_clauses = model.formula.len();
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReportOutcome {
    Solved(Vec<AgentPath>),
    Timeout,
    /// No solution up to [`SolverConfig::max_soc`].
    SocLimit,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub kind: ModelKind,
    pub outcome: ReportOutcome,
    /// Optimal sum-of-costs when solved, otherwise the last bound attempted.
    pub soc: u64,
    pub refinements: usize,
    pub sat_calls: usize,
    /// Clause count of the last model before its refinements.
    pub initial_clauses: usize,
    /// Clause count of the last model after its refinements.
    pub final_clauses: usize,
    /// Clauses generated over all bounds tried.
    pub total_clauses: usize,
    pub elapsed: Duration,
    pub log: Vec<IterationLog>,
}

impl SolveReport {
    pub fn paths(&self) -> Option<&[AgentPath]> {
        match &self.outcome {
            ReportOutcome::Solved(p) => Some(p),
            _ => None,
        }
    }
}

/// Finds a sum-of-costs optimal solution by trying bounds `lower_bound`,
/// `lower_bound + 1`, ... until a bounded solve succeeds. Conflicts found at
/// one bound are carried into the next.
pub fn solve_optimal<B, F>(
    instance: &MapfInstance,
    kind: ModelKind,
    new_backend: &mut F,
    deadline: &Deadline<'_>,
    config: &SolverConfig,
) -> Result<SolveReport>
where
    B: SatBackend,
    F: FnMut() -> B,
{
    let start = deadline.elapsed();
    let mut report = SolveReport {
        kind,
        outcome: ReportOutcome::Timeout,
        soc: instance.lower_bound(),
        refinements: 0,
        sat_calls: 0,
        initial_clauses: 0,
        final_clauses: 0,
        total_clauses: 0,
        elapsed: Duration::ZERO,
        log: Vec::new(),
    };
    let mut conflicts = Vec::new();
    loop {
        if config.max_soc.is_some_and(|m| report.soc > m) {
            report.soc -= 1;
            report.outcome = ReportOutcome::SocLimit;
            break;
        }
        let r = solve_bounded(instance, report.soc, kind, &conflicts, new_backend, deadline, config)?;
        report.refinements += r.refinements;
        report.sat_calls += r.sat_calls;
        report.initial_clauses = r.initial_clauses;
        report.final_clauses = r.final_clauses;
        report.total_clauses += r.final_clauses;
        report.log.extend(r.log);
        conflicts = r.conflicts;
        match r.outcome {
            BoundedOutcome::Solved(paths) => {
                report.outcome = ReportOutcome::Solved(paths);
                break;
            }
            BoundedOutcome::Timeout => break,
            BoundedOutcome::Unsat => report.soc += 1,
        }
    }
    report.elapsed = deadline.elapsed().saturating_sub(start);
    Ok(report)
}
