//! The three MAPF models over MDD decision variables.
//!
//! Every model contains agent propagation (each selected node has a selected
//! successor, start and goal fixed) and the sum-of-costs bound. The
//! conflict-lazy model adds exactly-one-position-per-step constraints, and the
//! complete model further forbids vertex and swap collisions up front.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cnf::{self, Clause, CnfFormula, Lit, VarMap};
use crate::graph::VertexId;
use crate::instance::{AgentPath, Conflict, MapfInstance};
use crate::mdd::{HorizonPlan, Mdd};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    /// Propagation, path consistency and conflict elimination.
    Complete,
    /// Propagation and path consistency; conflicts are refined lazily.
    ConflictLazy,
    /// Propagation only; conflicts refined lazily, path consistency never.
    NonRefined,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Complete, ModelKind::ConflictLazy, ModelKind::NonRefined];

    /// Short name used on the command line and in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Complete => "complete",
            ModelKind::ConflictLazy => "lazy",
            ModelKind::NonRefined => "nrf",
        }
    }

    pub fn from_name(name: &str) -> Option<ModelKind> {
        ModelKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A model for one sum-of-costs bound, ready to hand to a SAT backend.
#[derive(Debug, Clone)]
pub struct EncodedModel {
    pub formula: CnfFormula,
    pub varmap: VarMap,
    pub mdds: Vec<Mdd>,
    pub plan: HorizonPlan,
    pub kind: ModelKind,
    /// Clause count right after building, before any refinement.
    pub clause_count_initial: usize,
}

impl EncodedModel {
    /// Adds the clauses forbidding `conflict`; returns how many were added.
    pub fn refine(&mut self, conflict: &Conflict) -> usize {
        let clauses = conflict_to_clauses(conflict, &self.varmap);
        let n = clauses.len();
        for c in clauses {
            self.formula.add_clause(c);
        }
        n
    }

    /// Reads one path per agent from a model of a path-consistent formula:
    /// the unique true variable of each layer.
    pub fn decode_paths(&self, model: &[bool]) -> Result<Vec<AgentPath>> {
        (0..self.mdds.len())
            .map(|a| {
                let vertices = (0..=self.plan.horizon)
                    .map(|t| {
                        let mut chosen = self.varmap.layer_vars(a, t).filter(|(_, x)| model[x.index()]);
                        match (chosen.next(), chosen.next()) {
                            (Some((v, _)), None) => Ok(v),
                            _ => Err(Error::Encoding(format!(
                                "agent {a} does not occupy exactly one vertex at step {t}"
                            ))),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(AgentPath::new(vertices))
            })
            .collect()
    }

    /// DIMACS text of the current formula.
    pub fn write_dimacs<W: fmt::Write>(&self, out: &mut W) -> fmt::Result {
        self.formula.write_dimacs(out)
    }
}

/// Builds the `kind` model for bound `soc`, re-encoding `conflicts` over the
/// fresh variables. Conflicts whose nodes no longer exist are dropped.
pub fn build_model(
    instance: &MapfInstance,
    soc: u64,
    kind: ModelKind,
    conflicts: &[Conflict],
) -> Result<EncodedModel> {
    let plan = HorizonPlan::new(instance, soc)?;
    let mdds: Vec<Mdd> = (0..instance.agent_count()).map(|a| Mdd::build(instance, a, &plan)).collect();
    let mut formula = CnfFormula::new();
    let mut varmap = VarMap::allocate(&mdds, &mut formula);

    encode_propagation(&mdds, &varmap, &mut formula);
    encode_cost_bound(&mdds, &plan, &mut varmap, &mut formula);
    if kind != ModelKind::NonRefined {
        encode_path_consistency(&mdds, &varmap, &mut formula);
    }
    if kind == ModelKind::Complete {
        encode_conflict_elimination(&mdds, &varmap, &mut formula);
    }
    for c in conflicts {
        for clause in conflict_to_clauses(c, &varmap) {
            formula.add_clause(clause);
        }
    }
    let clause_count_initial = formula.len();
    Ok(EncodedModel { formula, varmap, mdds, plan, kind, clause_count_initial })
}

/// A selected node must be followed by a selected successor; the start node
/// at step 0 and the goal node at the horizon are selected.
pub fn encode_propagation(mdds: &[Mdd], varmap: &VarMap, formula: &mut CnfFormula) {
    for (a, mdd) in mdds.iter().enumerate() {
        let horizon = mdd.horizon();
        for t in 0..horizon {
            for &v in mdd.layer(t) {
                let mut clause = Vec::with_capacity(mdd.successors(v, t).len() + 1);
                clause.push(!x(varmap, a, v, t));
                clause.extend(mdd.successors(v, t).iter().map(|&w| x(varmap, a, w, t + 1)));
                formula.add_clause(clause);
            }
        }
        let first = x(varmap, a, mdd.layer(0)[0], 0);
        let last = x(varmap, a, mdd.layer(horizon)[0], horizon);
        formula.add_clause(vec![first]);
        if last != first {
            formula.add_clause(vec![last]);
        }
    }
}

/// Bounds the total excess over the shortest distances by `plan.delta`.
///
/// Agent `i` gets a finished flag `F[t]` for each step `t` in
/// `dist_i .. arrival_deadline(i)`; from the deadline on its MDD holds only
/// the goal, so it is finished there by construction. `F[t]` means the agent
/// sits at its goal at `t` and never leaves, so its cost is the first step
/// with a true flag and its excess is the number of false flags.
pub fn encode_cost_bound(mdds: &[Mdd], plan: &HorizonPlan, varmap: &mut VarMap, formula: &mut CnfFormula) {
    let mut excess = Vec::new();
    for (a, mdd) in mdds.iter().enumerate() {
        let first = plan.dists[a] as usize;
        let deadline = plan.arrival_deadline(a);
        if first >= deadline {
            continue;
        }
        let goal = mdd.layer(deadline)[0];
        let flags: Vec<_> = (first..deadline).map(|_| formula.new_var()).collect();
        for (k, &f) in flags.iter().enumerate() {
            let t = first + k;
            for (v, xv) in varmap.layer_vars(a, t) {
                if v == goal {
                    formula.add_clause(vec![f.neg(), xv.pos()]);
                } else {
                    formula.add_clause(vec![f.neg(), xv.neg()]);
                }
            }
            if let Some(next) = flags.get(k + 1) {
                formula.add_clause(vec![f.neg(), next.pos()]);
            }
            excess.push(f.neg());
        }
        varmap.set_finished(a, first, flags);
    }
    cnf::encode_card_le_k(formula, &excess, plan.delta as usize);
}

/// Each agent occupies exactly one vertex per step.
pub fn encode_path_consistency(mdds: &[Mdd], varmap: &VarMap, formula: &mut CnfFormula) {
    for (a, mdd) in mdds.iter().enumerate() {
        for t in 0..=mdd.horizon() {
            let lits: Vec<Lit> = varmap.layer_vars(a, t).map(|(_, xv)| xv.pos()).collect();
            cnf::encode_exactly_one(formula, &lits);
        }
    }
}

/// At most one agent per vertex and step, and no two agents swapping along
/// an edge.
pub fn encode_conflict_elimination(mdds: &[Mdd], varmap: &VarMap, formula: &mut CnfFormula) {
    let horizon = mdds.first().map_or(0, Mdd::horizon);
    for t in 0..=horizon {
        let mut occupants: BTreeMap<VertexId, Vec<Lit>> = BTreeMap::new();
        for a in 0..mdds.len() {
            for (v, xv) in varmap.layer_vars(a, t) {
                occupants.entry(v).or_default().push(xv.pos());
            }
        }
        for lits in occupants.values().filter(|l| l.len() >= 2) {
            cnf::encode_at_most_one(formula, lits);
        }
    }
    for t in 0..horizon {
        let mut movers: BTreeMap<(VertexId, VertexId), Vec<usize>> = BTreeMap::new();
        for (a, mdd) in mdds.iter().enumerate() {
            for &u in mdd.layer(t) {
                for &v in mdd.successors(u, t) {
                    if u != v {
                        movers.entry((u, v)).or_default().push(a);
                    }
                }
            }
        }
        for (&(u, v), forward) in movers.range(..) {
            if u > v {
                continue;
            }
            let Some(backward) = movers.get(&(v, u)) else { continue };
            for &i in forward {
                for &j in backward {
                    if i != j {
                        formula.add_clause(swap_clause(varmap, i, j, u, v, t));
                    }
                }
            }
        }
    }
}

/// Clauses forbidding the occupancies of `conflict`. Empty when some of the
/// nodes are not in the current MDDs, since the conflict cannot recur then.
pub fn conflict_to_clauses(conflict: &Conflict, varmap: &VarMap) -> Vec<Clause> {
    match *conflict {
        Conflict::Vertex { agents: (i, j), vertex, time } => {
            match (varmap.x(i, vertex, time), varmap.x(j, vertex, time)) {
                (Some(a), Some(b)) => vec![vec![a.neg(), b.neg()]],
                _ => Vec::new(),
            }
        }
        Conflict::Edge { agents: (i, j), from, to, time } => {
            let lits = [
                varmap.x(i, from, time),
                varmap.x(i, to, time + 1),
                varmap.x(j, to, time),
                varmap.x(j, from, time + 1),
            ];
            if lits.iter().all(Option::is_some) {
                vec![lits.iter().map(|x| x.unwrap().neg()).collect()]
            } else {
                Vec::new()
            }
        }
    }
}

fn swap_clause(varmap: &VarMap, i: usize, j: usize, u: VertexId, v: VertexId, t: usize) -> Clause {
    vec![
        !x(varmap, i, u, t),
        !x(varmap, i, v, t + 1),
        !x(varmap, j, v, t),
        !x(varmap, j, u, t + 1),
    ]
}

fn x(varmap: &VarMap, agent: usize, v: VertexId, t: usize) -> Lit {
    varmap.x(agent, v, t).expect("MDD node without a variable").pos()
}
