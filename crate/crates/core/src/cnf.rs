//! CNF formulas, the MDD-node variable map and cardinality encodings.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Not;

use crate::graph::VertexId;
use crate::mdd::Mdd;

/// Boolean variable, 0-based. DIMACS id is `index + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn pos(self) -> Lit {
        Lit(self.0 << 1)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit((self.0 << 1) | 1)
    }
}

/// Signed variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        if positive {
            var.pos()
        } else {
            var.neg()
        }
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense code `2 * var + sign`, used to index watch lists.
    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn from_code(code: usize) -> Lit {
        Lit(code as u32)
    }

    pub fn to_dimacs(self) -> i64 {
        let id = i64::from(self.var().0) + 1;
        if self.is_positive() {
            id
        } else {
            -id
        }
    }

    /// # Panics
    /// On `0`.
    pub fn from_dimacs(lit: i64) -> Lit {
        assert!(lit != 0, "0 is not a DIMACS literal");
        Lit::new(Var((lit.unsigned_abs() - 1) as u32), lit > 0)
    }

    /// Truth value of the literal under a full assignment indexed by variable.
    pub fn eval(self, model: &[bool]) -> bool {
        model[self.var().index()] == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

pub type Clause = Vec<Lit>;

/// Append-only clause store with a variable counter.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.num_vars);
        self.num_vars += 1;
        v
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars as usize
    }

    pub fn add_clause(&mut self, clause: Clause) {
        debug_assert!(
            clause.iter().all(|&l| l.var().0 < self.num_vars),
            "clause uses an unallocated variable"
        );
        debug_assert!(
            !clause.iter().any(|&l| clause.contains(&!l)),
            "tautological clause"
        );
        self.clauses.push(clause);
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Whether every clause holds under `model` (indexed by variable).
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.eval(model)))
    }

    /// DIMACS CNF text: `p cnf <vars> <clauses>` then one `0`-terminated
    /// clause per line.
    pub fn write_dimacs<W: fmt::Write>(&self, out: &mut W) -> fmt::Result {
        write_dimacs(out, self.num_vars(), &self.clauses)
    }
}

pub fn write_dimacs<W: fmt::Write>(out: &mut W, num_vars: usize, clauses: &[Clause]) -> fmt::Result {
    writeln!(out, "p cnf {} {}", num_vars, clauses.len())?;
    for c in clauses {
        for l in c {
            write!(out, "{l} ")?;
        }
        writeln!(out, "0")?;
    }
    Ok(())
}

/// Maps each MDD node `(agent, vertex, time)` to its decision variable.
///
/// The variables of one MDD layer are allocated contiguously in vertex
/// order, so lookup is a binary search in the layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarMap {
    /// Per agent, per time step: first variable of the layer and its vertices.
    layers: Vec<Vec<(u32, Vec<VertexId>)>>,
    /// Per agent: first step with a finished flag, and the flags.
    finished: Vec<(usize, Vec<Var>)>,
}

impl VarMap {
    /// Allocates one variable per node of every MDD, agent by agent and
    /// layer by layer.
    pub fn allocate(mdds: &[Mdd], formula: &mut CnfFormula) -> VarMap {
        let layers = mdds
            .iter()
            .map(|mdd| {
                mdd.layers()
                    .iter()
                    .map(|layer| {
                        let base = formula.num_vars;
                        for _ in layer {
                            formula.new_var();
                        }
                        (base, layer.clone())
                    })
                    .collect()
            })
            .collect();
        VarMap { layers, finished: alloc::vec![(0, Vec::new()); mdds.len()] }
    }

    pub fn agent_count(&self) -> usize {
        self.layers.len()
    }

    pub fn horizon(&self) -> usize {
        self.layers.first().map_or(0, |l| l.len().saturating_sub(1))
    }

    /// Decision variable of `(agent, v, t)`, or `None` if the node is not in
    /// the agent's MDD.
    pub fn x(&self, agent: usize, v: VertexId, t: usize) -> Option<Var> {
        let (base, layer) = self.layers.get(agent)?.get(t)?;
        let k = layer.binary_search(&v).ok()?;
        Some(Var(base + k as u32))
    }

    /// Variables of one layer, in vertex order.
    pub fn layer_vars(&self, agent: usize, t: usize) -> impl Iterator<Item = (VertexId, Var)> + '_ {
        let (base, layer) = &self.layers[agent][t];
        layer.iter().enumerate().map(move |(k, &v)| (v, Var(base + k as u32)))
    }

    /// Every X variable with its node, agent by agent.
    pub fn all_x(&self) -> impl Iterator<Item = (usize, VertexId, usize, Var)> + '_ {
        (0..self.layers.len()).flat_map(move |a| {
            (0..self.layers[a].len()).flat_map(move |t| self.layer_vars(a, t).map(move |(v, x)| (a, v, t, x)))
        })
    }

    pub fn x_count(&self) -> usize {
        self.layers.iter().flatten().map(|(_, l)| l.len()).sum()
    }

    /// Reverse lookup of an X variable.
    pub fn node_of(&self, var: Var) -> Option<(usize, VertexId, usize)> {
        for (a, layers) in self.layers.iter().enumerate() {
            for (t, (base, layer)) in layers.iter().enumerate() {
                if var.0 >= *base && ((var.0 - base) as usize) < layer.len() {
                    return Some((a, layer[(var.0 - base) as usize], t));
                }
            }
        }
        None
    }

    pub(crate) fn set_finished(&mut self, agent: usize, first: usize, flags: Vec<Var>) {
        self.finished[agent] = (first, flags);
    }

    /// Finished flag of `agent` at `t`, when one was allocated.
    pub fn finished(&self, agent: usize, t: usize) -> Option<Var> {
        let (first, flags) = self.finished.get(agent)?;
        flags.get(t.checked_sub(*first)?).copied()
    }

    /// Human-readable meaning of every X and finished-flag variable, one
    /// `<dimacs id> <label>` line each. Other variables are cardinality
    /// auxiliaries.
    pub fn write_sidecar<W: fmt::Write>(&self, out: &mut W) -> fmt::Result {
        for (a, v, t, x) in self.all_x() {
            writeln!(out, "{} X agent={a} vertex={v} t={t}", x.0 + 1)?;
        }
        for (a, (first, flags)) in self.finished.iter().enumerate() {
            for (k, f) in flags.iter().enumerate() {
                writeln!(out, "{} F agent={a} t={}", f.0 + 1, first + k)?;
            }
        }
        Ok(())
    }
}

/// Largest input handled by the pairwise at-most-one encoding; larger inputs
/// use a sequential counter.
pub const PAIRWISE_AMO_LIMIT: usize = 6;

/// At most one of `lits` is true.
pub fn encode_at_most_one(formula: &mut CnfFormula, lits: &[Lit]) {
    if lits.len() <= PAIRWISE_AMO_LIMIT {
        encode_amo_pairwise(formula, lits);
    } else {
        encode_amo_sequential(formula, lits);
    }
}

pub fn encode_amo_pairwise(formula: &mut CnfFormula, lits: &[Lit]) {
    for (i, &a) in lits.iter().enumerate() {
        for &b in &lits[i + 1..] {
            formula.add_clause(alloc::vec![!a, !b]);
        }
    }
}

/// Sequential counter specialised to a bound of one: `3n - 4` clauses and
/// `n - 1` auxiliaries.
pub fn encode_amo_sequential(formula: &mut CnfFormula, lits: &[Lit]) {
    let n = lits.len();
    if n <= 1 {
        return;
    }
    let s: Vec<Var> = (0..n - 1).map(|_| formula.new_var()).collect();
    formula.add_clause(alloc::vec![!lits[0], s[0].pos()]);
    for i in 1..n - 1 {
        formula.add_clause(alloc::vec![!lits[i], s[i].pos()]);
        formula.add_clause(alloc::vec![s[i - 1].neg(), s[i].pos()]);
        formula.add_clause(alloc::vec![!lits[i], s[i - 1].neg()]);
    }
    formula.add_clause(alloc::vec![!lits[n - 1], s[n - 2].neg()]);
}

/// Exactly one of `lits` is true.
pub fn encode_exactly_one(formula: &mut CnfFormula, lits: &[Lit]) {
    formula.add_clause(lits.to_vec());
    encode_at_most_one(formula, lits);
}

/// At most `k` of `lits` are true, as a sequential counter circuit.
///
/// `s[i][j]` holds when at least `j + 1` of the first `i + 1` literals are
/// true. Nothing is emitted when `k >= lits.len()`.
pub fn encode_card_le_k(formula: &mut CnfFormula, lits: &[Lit], k: usize) {
    let n = lits.len();
    if k >= n {
        return;
    }
    if k == 0 {
        for &l in lits {
            formula.add_clause(alloc::vec![!l]);
        }
        return;
    }
    let s: Vec<Vec<Var>> = (0..n - 1).map(|_| (0..k).map(|_| formula.new_var()).collect()).collect();
    formula.add_clause(alloc::vec![!lits[0], s[0][0].pos()]);
    for s0j in &s[0][1..] {
        formula.add_clause(alloc::vec![s0j.neg()]);
    }
    for i in 1..n - 1 {
        formula.add_clause(alloc::vec![!lits[i], s[i][0].pos()]);
        formula.add_clause(alloc::vec![s[i - 1][0].neg(), s[i][0].pos()]);
        for j in 1..k {
            formula.add_clause(alloc::vec![!lits[i], s[i - 1][j - 1].neg(), s[i][j].pos()]);
            formula.add_clause(alloc::vec![s[i - 1][j].neg(), s[i][j].pos()]);
        }
        formula.add_clause(alloc::vec![!lits[i], s[i - 1][k - 1].neg()]);
    }
    formula.add_clause(alloc::vec![!lits[n - 1], s[n - 2][k - 1].neg()]);
}
