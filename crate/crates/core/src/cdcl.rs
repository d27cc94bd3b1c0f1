//! Embedded conflict-driven clause learning solver.
//!
//! Two watched literals with blockers, VSIDS branching on an indexed heap,
//! phase saving, first-UIP learning with local minimisation, Luby restarts
//! and activity-based learnt clause deletion. Clauses may be added between
//! `solve` calls; learnt clauses and activities are kept.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::clock::Deadline;
use crate::cnf::{Lit, Var};
use crate::sat::{SatBackend, SolveOutcome, SolveStats, SolveStatus};

pub const DEFAULT_SEED: u64 = 0x5eed_2021;

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESTART_BASE: u64 = 100;
const RANDOM_VAR_FREQ: f64 = 0.01;
/// Conflicts between two deadline checks.
const DEADLINE_CHECK_PERIOD: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Undef,
}

type ClauseRef = u32;

enum Search {
    Done(SolveStatus),
    Restart,
}

#[derive(Debug, Clone)]
struct StoredClause {
    lits: Vec<Lit>,
    learnt: bool,
    activity: f32,
    lbd: u32,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: ClauseRef,
    blocker: Lit,
}

/// Max-heap of variables keyed by activity, with position index.
#[derive(Debug, Clone, Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl VarHeap {
    fn grow(&mut self, n: usize) {
        self.pos.resize(n, NOT_IN_HEAP);
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] != NOT_IN_HEAP
    }

    fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v] = self.heap.len();
        self.heap.push(v as u32);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.pos[v], act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()? as usize;
        let last = self.heap.pop().unwrap();
        self.pos[top] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if act[p as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] { r } else { l };
            let c = self.heap[child];
            if act[c as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = c;
            self.pos[c as usize] = i;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }
}

/// Luby sequence value at index `x` (0-based): 1 1 2 1 1 2 4 ...
fn luby(mut x: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

/// Incremental CDCL solver.
#[derive(Debug, Clone)]
pub struct CdclSolver {
    ok: bool,
    clauses: Vec<StoredClause>,
    num_learnts: usize,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    polarity: Vec<bool>,
    activity: Vec<f64>,
    var_inc: f64,
    clause_inc: f32,
    heap: VarHeap,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    max_learnts: f64,
    restarts: u64,
    rng: ChaCha8Rng,
    stats: SolveStats,
    #[cfg(debug_assertions)]
    originals: Vec<Vec<Lit>>,
}

impl Default for CdclSolver {
    fn default() -> Self {
        Self::new(DEFAULT_SEED)
    }
}

impl CdclSolver {
    pub fn new(seed: u64) -> Self {
        CdclSolver {
            ok: true,
            clauses: Vec::new(),
            num_learnts: 0,
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            polarity: Vec::new(),
            activity: Vec::new(),
            var_inc: 1.0,
            clause_inc: 1.0,
            heap: VarHeap::default(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: Vec::new(),
            max_learnts: 0.0,
            restarts: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats: SolveStats::default(),
            #[cfg(debug_assertions)]
            originals: Vec::new(),
        }
    }

    /// Number of problem clauses plus learnt clauses currently stored.
    pub fn stored_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Cumulative counters over all `solve` calls.
    pub fn total_stats(&self) -> SolveStats {
        self.stats
    }

    fn value(&self, l: Lit) -> Value {
        match self.assigns[l.var().index()] {
            Value::Undef => Value::Undef,
            Value::True if l.is_positive() => Value::True,
            Value::False if !l.is_positive() => Value::True,
            _ => Value::False,
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn grow_to(&mut self, n: usize) {
        let old = self.assigns.len();
        if n <= old {
            return;
        }
        self.assigns.resize(n, Value::Undef);
        self.level.resize(n, 0);
        self.reason.resize(n, None);
        self.polarity.resize(n, false);
        self.seen.resize(n, false);
        self.watches.resize(2 * n, Vec::new());
        self.heap.grow(n);
        for _ in old..n {
            // Tiny seeded noise breaks ties between untouched variables.
            let noise = (self.rng.next_u32() as f64 / u32::MAX as f64) * 1e-5;
            self.activity.push(noise);
        }
        for v in old..n {
            self.heap.insert(v, &self.activity);
        }
    }

    fn enqueue(&mut self, l: Lit, from: Option<ClauseRef>) {
        let v = l.var().index();
        debug_assert_eq!(self.assigns[v], Value::Undef);
        self.assigns[v] = if l.is_positive() { Value::True } else { Value::False };
        self.level[v] = self.decision_level();
        self.reason[v] = from;
        self.trail.push(l);
    }

    fn attach(&mut self, cref: ClauseRef) {
        let c = &self.clauses[cref as usize];
        let (a, b) = (c.lits[0], c.lits[1]);
        self.watches[(!a).code()].push(Watcher { cref, blocker: b });
        self.watches[(!b).code()].push(Watcher { cref, blocker: a });
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let keep = self.trail_lim[lvl as usize];
        for i in (keep..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            self.assigns[v] = Value::Undef;
            self.reason[v] = None;
            self.polarity[v] = l.is_positive();
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = keep;
    }

    fn propagate(&mut self) -> Option<ClauseRef> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = core::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == Value::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref;
                let lits = &mut self.clauses[cref as usize].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                if first != w.blocker && self.value(first) == Value::True {
                    ws[j] = Watcher { cref, blocker: first };
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[cref as usize].lits.len() {
                    let l = self.clauses[cref as usize].lits[k];
                    if self.value(l) != Value::False {
                        let lits = &mut self.clauses[cref as usize].lits;
                        lits.swap(1, k);
                        self.watches[(!l).code()].push(Watcher { cref, blocker: first });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watcher { cref, blocker: first };
                j += 1;
                if self.value(first) == Value::False {
                    conflict = Some(cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(cref));
                }
            }
            ws.truncate(j);
            // Watches pushed to p's list during the scan cannot exist: new
            // watches are never on a false literal.
            debug_assert!(self.watches[p.code()].is_empty());
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: ClauseRef) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.clause_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal first,
    /// highest remaining level second) and the backjump level.
    fn analyze(&mut self, mut confl: ClauseRef) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit::from_code(0)];
        let mut path_count = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level();

        loop {
            self.bump_clause(confl);
            let start = usize::from(p.is_some());
            let len = self.clauses[confl as usize].lits.len();
            for k in start..len {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path_count += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let lit = self.trail[index];
            let v = lit.var().index();
            self.seen[v] = false;
            path_count -= 1;
            p = Some(lit);
            if path_count == 0 {
                break;
            }
            confl = self.reason[v].expect("implied literal without reason");
        }
        learnt[0] = !p.unwrap();

        // Local minimisation: drop literals implied by other learnt literals.
        let marked = learnt.clone();
        let mut kept = 1;
        for k in 1..learnt.len() {
            let l = learnt[k];
            let redundant = match self.reason[l.var().index()] {
                None => false,
                Some(r) => self.clauses[r as usize].lits[1..].iter().all(|q| {
                    let v = q.var().index();
                    self.seen[v] || self.level[v] == 0
                }),
            };
            if !redundant {
                learnt[kept] = l;
                kept += 1;
            }
        }
        for l in &marked {
            self.seen[l.var().index()] = false;
        }
        learnt.truncate(kept);

        let mut backjump = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            backjump = self.level[learnt[1].var().index()];
        }
        (learnt, backjump)
    }

    fn lbd(&self, lits: &[Lit]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|l| self.level[l.var().index()]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn locked(&self, cref: ClauseRef) -> bool {
        let l = self.clauses[cref as usize].lits[0];
        self.value(l) == Value::True && self.reason[l.var().index()] == Some(cref)
    }

    /// Deletes the less active half of the learnt clauses (glue clauses and
    /// reasons are kept), then compacts the clause arena.
    fn reduce_db(&mut self) {
        let mut learnts: Vec<ClauseRef> = (0..self.clauses.len() as u32)
            .filter(|&c| self.clauses[c as usize].learnt)
            .collect();
        learnts.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            ca.activity.partial_cmp(&cb.activity).unwrap_or(core::cmp::Ordering::Equal)
        });
        let mut remove = vec![false; self.clauses.len()];
        let limit = learnts.len() / 2;
        for &c in &learnts[..limit] {
            if self.clauses[c as usize].lbd > 2 && !self.locked(c) {
                remove[c as usize] = true;
            }
        }
        let mut remap = vec![u32::MAX; self.clauses.len()];
        let mut kept = Vec::with_capacity(self.clauses.len());
        for (i, c) in core::mem::take(&mut self.clauses).into_iter().enumerate() {
            if remove[i] {
                self.num_learnts -= 1;
            } else {
                remap[i] = kept.len() as u32;
                kept.push(c);
            }
        }
        self.clauses = kept;
        for r in self.reason.iter_mut().flatten() {
            *r = remap[*r as usize];
        }
        for ws in &mut self.watches {
            ws.clear();
        }
        for c in 0..self.clauses.len() as u32 {
            self.attach(c);
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        let n = self.assigns.len();
        if n > 0 && (self.rng.next_u32() as f64 / u32::MAX as f64) < RANDOM_VAR_FREQ {
            let v = (self.rng.next_u64() % n as u64) as usize;
            if self.assigns[v] == Value::Undef {
                return Some(Lit::new(Var(v as u32), self.polarity[v]));
            }
        }
        while !self.heap.is_empty() {
            let v = self.heap.pop(&self.activity).unwrap();
            if self.assigns[v] == Value::Undef {
                return Some(Lit::new(Var(v as u32), self.polarity[v]));
            }
        }
        None
    }

    fn search(&mut self, deadline: &Deadline<'_>, stats: &mut SolveStats) -> Search {
        let mut conflicts_here = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                stats.conflicts += 1;
                conflicts_here += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Search::Done(SolveStatus::Unsat);
                }
                let (learnt, backjump) = self.analyze(confl);
                self.cancel_until(backjump);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let lbd = self.lbd(&learnt);
                    let cref = self.clauses.len() as ClauseRef;
                    let asserting = learnt[0];
                    self.clauses.push(StoredClause { lits: learnt, learnt: true, activity: 0.0, lbd });
                    self.num_learnts += 1;
                    self.attach(cref);
                    self.bump_clause(cref);
                    self.enqueue(asserting, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                self.clause_inc /= CLAUSE_DECAY as f32;
                if stats.conflicts.is_multiple_of(DEADLINE_CHECK_PERIOD) && deadline.expired() {
                    return Search::Done(SolveStatus::Timeout);
                }
            } else {
                if conflicts_here >= RESTART_BASE * luby(self.restarts) {
                    self.restarts += 1;
                    self.cancel_until(0);
                    return Search::Restart;
                }
                if self.num_learnts as f64 >= self.max_learnts + self.trail.len() as f64 {
                    self.reduce_db();
                    self.max_learnts *= 1.1;
                }
                match self.pick_branch() {
                    None => return Search::Done(SolveStatus::Sat),
                    Some(l) => {
                        stats.decisions += 1;
                        if stats.decisions.is_multiple_of(4096) && deadline.expired() {
                            return Search::Done(SolveStatus::Timeout);
                        }
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, None);
                    }
                }
            }
        }
    }

    #[cfg(debug_assertions)]
    fn check_model(&self, model: &[bool]) {
        for c in &self.originals {
            assert!(c.iter().any(|l| l.eval(model)), "model violates clause {c:?}");
        }
    }
}

impl SatBackend for CdclSolver {
    fn reserve_vars(&mut self, count: usize) {
        self.grow_to(count);
    }

    fn add_clause(&mut self, clause: &[Lit]) {
        #[cfg(debug_assertions)]
        self.originals.push(clause.to_vec());
        if let Some(max) = clause.iter().map(|l| l.var().index()).max() {
            self.grow_to(max + 1);
        }
        if !self.ok {
            return;
        }
        self.cancel_until(0);
        let mut lits = clause.to_vec();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        if lits.iter().any(|&l| self.value(l) == Value::True) {
            return;
        }
        lits.retain(|&l| self.value(l) == Value::Undef);
        match lits.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(lits[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                let cref = self.clauses.len() as ClauseRef;
                self.clauses.push(StoredClause { lits, learnt: false, activity: 0.0, lbd: 0 });
                self.attach(cref);
            }
        }
    }

    fn solve(&mut self, deadline: &Deadline<'_>) -> SolveOutcome {
        let mut stats = SolveStats::default();
        let start = deadline.elapsed();
        let finish = |mut s: SolveStats, d: &Deadline<'_>| {
            s.elapsed = d.elapsed().saturating_sub(start);
            s
        };
        if !self.ok {
            return SolveOutcome::unsat(finish(stats, deadline));
        }
        if deadline.expired() {
            return SolveOutcome::timeout(finish(stats, deadline));
        }
        let problem = self.clauses.len() - self.num_learnts;
        self.max_learnts = self.max_learnts.max(problem as f64 / 3.0 + 2000.0);
        let status = loop {
            match self.search(deadline, &mut stats) {
                Search::Restart => continue,
                Search::Done(s) => break s,
            }
        };
        self.stats.decisions += stats.decisions;
        self.stats.propagations += stats.propagations;
        self.stats.conflicts += stats.conflicts;
        let stats = finish(stats, deadline);
        match status {
            SolveStatus::Sat => {
                let model: Vec<bool> = self.assigns.iter().map(|&v| v == Value::True).collect();
                #[cfg(debug_assertions)]
                self.check_model(&model);
                self.cancel_until(0);
                SolveOutcome::sat(model, stats)
            }
            SolveStatus::Unsat => SolveOutcome::unsat(stats),
            SolveStatus::Failed => unreachable!("search never fails"),
            SolveStatus::Timeout => {
                self.cancel_until(0);
                SolveOutcome::timeout(stats)
            }
        }
    }

    fn num_vars(&self) -> usize {
        self.assigns.len()
    }
}
