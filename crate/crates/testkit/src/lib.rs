//! Brute-force oracles and random instance generators for tests.
//!
//! Nothing here reuses the solver's algorithms: distances are recomputed,
//! optimal costs come from a joint-state search, and formulas are checked by
//! plain enumeration or a naive DPLL.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};

use nrfmapf_core::cnf::{Clause, Lit, Var};
use nrfmapf_core::{AgentPath, EncodedModel, Graph, MapfInstance, ModelKind};
use rand::seq::SliceRandom;


pub use rand_chacha::ChaCha8Rng;
pub use rand::{Rng, SeedableRng};

/// Sum-of-costs optimum by uniform-cost search over joint states.
///
/// A state holds every agent's vertex and whether it has "parked" (settled at
/// its goal for good). Each step costs one per unparked agent; parking is a
/// free move available to an agent standing on its goal. `None` if no
/// collision-free plan exists.
pub fn joint_optimal_soc(inst: &MapfInstance) -> Option<u64> {
    let k = inst.agent_count();
    let g = inst.graph();
    type State = (Vec<usize>, u32);
    let start: State = (inst.starts().to_vec(), 0);
    let all_parked = (1u32 << k) - 1;
    let mut best: HashMap<State, u64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(start.clone(), 0);
    heap.push(Reverse((0u64, start)));
    while let Some(Reverse((cost, state))) = heap.pop() {
        if best.get(&state).is_some_and(|&c| c < cost) {
            continue;
        }
        let (pos, parked) = &state;
        if *parked == all_parked {
            return Some(cost);
        }
        let mut push = |next: State, c: u64| {
            if best.get(&next).is_none_or(|&old| c < old) {
                best.insert(next.clone(), c);
                heap.push(Reverse((c, next)));
            }
        };
        for a in 0..k {
            if parked & (1 << a) == 0 && pos[a] == inst.goal(a) {
                push((pos.clone(), parked | (1 << a)), cost);
            }
        }
        let moving: Vec<usize> = (0..k).filter(|a| parked & (1 << a) == 0).collect();
        let step = moving.len() as u64;
        let options: Vec<Vec<usize>> = moving
            .iter()
            .map(|&a| std::iter::once(pos[a]).chain(g.neighbors(pos[a]).iter().copied()).collect())
            .collect();
        let mut choice = vec![0usize; moving.len()];
        loop {
            let mut next = pos.clone();
            for (m, &a) in moving.iter().enumerate() {
                next[a] = options[m][choice[m]];
            }
            if collision_free_step(pos, &next) {
                push((next, *parked), cost + step);
            }
            let mut m = 0;
            while m < choice.len() {
                choice[m] += 1;
                if choice[m] < options[m].len() {
                    break;
                }
                choice[m] = 0;
                m += 1;
            }
            if m == choice.len() {
                break;
            }
        }
    }
    None
}

fn collision_free_step(before: &[usize], after: &[usize]) -> bool {
    for i in 0..after.len() {
        for j in i + 1..after.len() {
            if after[i] == after[j] {
                return false;
            }
            if before[i] == after[j] && before[j] == after[i] && before[i] != after[i] {
                return false;
            }
        }
    }
    true
}

/// Whether any two agents collide, by scanning every pair at every step of
/// the goal-padded paths.
pub fn has_collision(paths: &[AgentPath]) -> bool {
    let horizon = paths.iter().map(|p| p.vertices().len()).max().unwrap_or(0);
    let at = |p: &AgentPath, t: usize| {
        let v = p.vertices();
        v[t.min(v.len() - 1)]
    };
    for t in 0..horizon {
        for i in 0..paths.len() {
            for j in 0..paths.len() {
                if i == j {
                    continue;
                }
                if at(&paths[i], t) == at(&paths[j], t) {
                    return true;
                }
                if t + 1 < horizon
                    && at(&paths[i], t) == at(&paths[j], t + 1)
                    && at(&paths[j], t) == at(&paths[i], t + 1)
                    && at(&paths[i], t) != at(&paths[i], t + 1)
                {
                    return true;
                }
            }
        }
    }
    false
}

/// Plain BFS distances, `None` for unreachable.
pub fn bfs(graph: &Graph, source: usize) -> Vec<Option<u32>> {
    let mut d = vec![None; graph.vertex_count()];
    d[source] = Some(0);
    let mut q = VecDeque::from([source]);
    while let Some(u) = q.pop_front() {
        for &v in graph.neighbors(u) {
            if d[v].is_none() {
                d[v] = Some(d[u].unwrap() + 1);
                q.push_back(v);
            }
        }
    }
    d
}

/// Every walk of exactly `len` steps (waits allowed) from `s` ending at `g`.
pub fn walks(graph: &Graph, s: usize, g: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![s];
    fn rec(graph: &Graph, g: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len + 1 {
            if *cur.last().unwrap() == g {
                out.push(cur.clone());
            }
            return;
        }
        let u = *cur.last().unwrap();
        for v in std::iter::once(u).chain(graph.neighbors(u).iter().copied()) {
            cur.push(v);
            rec(graph, g, len, cur, out);
            cur.pop();
        }
    }
    rec(graph, g, len, &mut cur, &mut out);
    out
}

/// Steps paid before the walk settles at its last vertex for good.
pub fn walk_cost(walk: &[usize]) -> usize {
    let last = *walk.last().unwrap();
    walk.len() - walk.iter().rev().take_while(|&&v| v == last).count()
}

fn lit_value(l: Lit, assignment: &[Option<bool>]) -> Option<bool> {
    assignment[l.var().index()].map(|b| b == l.is_positive())
}

/// Naive DPLL with unit propagation. `assignment` holds fixed values.
pub fn dpll(clauses: &[Clause], assignment: &mut Vec<Option<bool>>) -> bool {
    let mut trail = Vec::new();
    let ok = loop {
        let mut unit = None;
        let mut conflict = false;
        for c in clauses {
            let mut unassigned = None;
            let mut count = 0;
            let mut sat = false;
            for &l in c {
                match lit_value(l, assignment) {
                    Some(true) => {
                        sat = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        count += 1;
                        unassigned = Some(l);
                    }
                }
            }
            if sat {
                continue;
            }
            if count == 0 {
                conflict = true;
                break;
            }
            if count == 1 {
                unit = unassigned;
                break;
            }
        }
        if conflict {
            break false;
        }
        match unit {
            Some(l) => {
                assignment[l.var().index()] = Some(l.is_positive());
                trail.push(l.var().index());
            }
            None => {
                let free = clauses
                    .iter()
                    .flatten()
                    .map(|l| l.var().index())
                    .find(|&v| assignment[v].is_none());
                break match free {
                    None => true,
                    Some(v) => {
                        let mut found = false;
                        for b in [false, true] {
                            assignment[v] = Some(b);
                            if dpll(clauses, assignment) {
                                found = true;
                                break;
                            }
                        }
                        if !found {
                            assignment[v] = None;
                        }
                        found
                    }
                };
            }
        }
    };
    if !ok {
        for v in trail {
            assignment[v] = None;
        }
    }
    ok
}

/// Whether the clauses are satisfiable, by trying all `2^num_vars` assignments.
pub fn exhaustive_sat(num_vars: usize, clauses: &[Clause]) -> bool {
    assert!(num_vars <= 24, "too many variables for exhaustive search");
    (0u64..1 << num_vars).any(|bits| {
        clauses.iter().all(|c| c.iter().any(|l| ((bits >> l.var().index()) & 1 == 1) == l.is_positive()))
    })
}

/// Assignments to `vars` that extend to a model of `clauses`.
///
/// Enumerates `vars` depth-first, pruning as soon as a clause over already
/// fixed variables is falsified, and checks each complete choice with
/// [`dpll`] over the remaining variables.
pub fn projected_models(num_vars: usize, clauses: &[Clause], vars: &[Var]) -> BTreeSet<Vec<bool>> {
    let mut out = BTreeSet::new();
    let mut assignment = vec![None; num_vars];
    let mut chosen = Vec::with_capacity(vars.len());
    project_rec(clauses, vars, &mut assignment, &mut chosen, &mut out);
    out
}

fn project_rec(
    clauses: &[Clause],
    vars: &[Var],
    assignment: &mut Vec<Option<bool>>,
    chosen: &mut Vec<bool>,
    out: &mut BTreeSet<Vec<bool>>,
) {
    let falsified = clauses
        .iter()
        .any(|c| c.iter().all(|&l| lit_value(l, assignment) == Some(false)));
    if falsified {
        return;
    }
    if chosen.len() == vars.len() {
        let mut trial = assignment.clone();
        if dpll(clauses, &mut trial) {
            out.insert(chosen.clone());
        }
        return;
    }
    let v = vars[chosen.len()].index();
    for b in [false, true] {
        assignment[v] = Some(b);
        chosen.push(b);
        project_rec(clauses, vars, assignment, chosen, out);
        chosen.pop();
    }
    assignment[v] = None;
}

/// Assignments to the X variables of `model` (in `varmap.all_x()` order)
/// that the encoding of its kind should admit, decided directly from the
/// selected vertex sets.
///
/// Each agent's selection must contain the start at step 0 and the goal at
/// the horizon, and every selected vertex before the horizon must have a
/// selected graph neighbour (or itself) one step later. An agent pays until
/// the step from which only its goal stays selected; the total must fit the
/// bound. The lazy model also wants one vertex per step, and the complete
/// model additionally wants the resulting paths collision-free.
pub fn x_model_oracle(inst: &MapfInstance, model: &EncodedModel) -> BTreeSet<Vec<bool>> {
    let nodes: Vec<(usize, usize, usize)> = model.varmap.all_x().map(|(a, v, t, _)| (a, v, t)).collect();
    assert!(nodes.len() <= 24, "too many X variables for enumeration");
    let k = inst.agent_count();
    let horizon = model.plan.horizon;
    let soc = inst.lower_bound() + model.plan.delta;
    let g = inst.graph();
    let mut out = BTreeSet::new();
    'bits: for bits in 0u64..1 << nodes.len() {
        let mut layers = vec![vec![Vec::new(); horizon + 1]; k];
        for (i, &(a, v, t)) in nodes.iter().enumerate() {
            if bits >> i & 1 == 1 {
                layers[a][t].push(v);
            }
        }
        let mut total = 0u64;
        for (a, ls) in layers.iter().enumerate() {
            let (s, goal) = (inst.start(a), inst.goal(a));
            if !ls[0].contains(&s) || !ls[horizon].contains(&goal) {
                continue 'bits;
            }
            for t in 0..horizon {
                for &u in &ls[t] {
                    if !ls[t + 1].iter().any(|&w| w == u || g.is_adjacent(u, w)) {
                        continue 'bits;
                    }
                }
            }
            let settled = ls.iter().rev().take_while(|l| l.as_slice() == [goal]).count();
            total += (horizon + 1 - settled) as u64;
            if model.kind != ModelKind::NonRefined && ls.iter().any(|l| l.len() != 1) {
                continue 'bits;
            }
        }
        if total > soc {
            continue;
        }
        if model.kind == ModelKind::Complete {
            let paths: Vec<AgentPath> =
                layers.iter().map(|ls| AgentPath::new(ls.iter().map(|l| l[0]).collect())).collect();
            if has_collision(&paths) {
                continue;
            }
        }
        out.insert((0..nodes.len()).map(|i| bits >> i & 1 == 1).collect());
    }
    out
}

/// Connected random graph: a random spanning tree plus `extra` random edges.
pub fn random_connected_graph(rng: &mut impl Rng, n: usize, extra: usize) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((order[i], order[j]));
    }
    for _ in 0..extra {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Open 4-connected grid.
pub fn open_grid(height: usize, width: usize) -> Graph {
    let id = |r: usize, c: usize| r * width + c;
    let mut edges = Vec::new();
    for r in 0..height {
        for c in 0..width {
            if c + 1 < width {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < height {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Graph::from_edges(height * width, &edges).unwrap()
}

/// `k` agents with distinct random starts and distinct random goals, all in
/// the connected component of their start.
pub fn random_instance(rng: &mut impl Rng, graph: Graph, k: usize) -> MapfInstance {
    let n = graph.vertex_count();
    loop {
        let mut vs: Vec<usize> = (0..n).collect();
        vs.shuffle(rng);
        let starts = vs[..k].to_vec();
        vs.shuffle(rng);
        let goals = vs[..k].to_vec();
        if let Ok(inst) = MapfInstance::new(graph.clone(), starts, goals) {
            return inst;
        }
    }
}

/// Seeded ChaCha generator.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
