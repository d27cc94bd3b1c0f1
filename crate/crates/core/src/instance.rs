//! MAPF instances, agent paths, conflicts and cost metrics.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::graph::{Graph, VertexId, UNREACHABLE};
use crate::{Error, Result};

/// A graph plus one start and one goal vertex per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapfInstance {
    graph: Graph,
    starts: Vec<VertexId>,
    goals: Vec<VertexId>,
    from_start: Vec<Vec<u32>>,
    to_goal: Vec<Vec<u32>>,
}

impl MapfInstance {
    /// Checks that starts and goals are in range and pairwise distinct and
    /// that every goal is reachable from its start.
    pub fn new(graph: Graph, starts: Vec<VertexId>, goals: Vec<VertexId>) -> Result<Self> {
        if starts.len() != goals.len() {
            return Err(Error::InvalidGraph(alloc::format!(
                "{} starts but {} goals",
                starts.len(),
                goals.len()
            )));
        }
        let n = graph.vertex_count();
        for &v in starts.iter().chain(goals.iter()) {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, vertex_count: n });
            }
        }
        if let Some((first, second)) = first_duplicate(&starts) {
            return Err(Error::DuplicateStart { first, second, vertex: starts[first] });
        }
        if let Some((first, second)) = first_duplicate(&goals) {
            return Err(Error::DuplicateGoal { first, second, vertex: goals[first] });
        }
        let from_start: Vec<_> = starts.iter().map(|&s| graph.shortest_dists(s)).collect();
        let to_goal: Vec<_> = goals.iter().map(|&g| graph.shortest_dists(g)).collect();
        for (agent, &g) in goals.iter().enumerate() {
            if from_start[agent][g] == UNREACHABLE {
                return Err(Error::Unsolvable { agent });
            }
        }
        Ok(MapfInstance { graph, starts, goals, from_start, to_goal })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn agent_count(&self) -> usize {
        self.starts.len()
    }

    pub fn start(&self, agent: usize) -> VertexId {
        self.starts[agent]
    }

    pub fn goal(&self, agent: usize) -> VertexId {
        self.goals[agent]
    }

    pub fn starts(&self) -> &[VertexId] {
        &self.starts
    }

    pub fn goals(&self) -> &[VertexId] {
        &self.goals
    }

    /// Shortest start-to-goal distance of `agent`.
    pub fn shortest_dist(&self, agent: usize) -> u32 {
        self.from_start[agent][self.goals[agent]]
    }

    /// BFS distances from the agent's start.
    pub fn dists_from_start(&self, agent: usize) -> &[u32] {
        &self.from_start[agent]
    }

    /// BFS distances to the agent's goal.
    pub fn dists_to_goal(&self, agent: usize) -> &[u32] {
        &self.to_goal[agent]
    }

    /// Sum of individual shortest distances; no solution is cheaper.
    pub fn lower_bound(&self) -> u64 {
        (0..self.agent_count()).map(|a| u64::from(self.shortest_dist(a))).sum()
    }

    /// Returns every vertex and edge conflict between the given paths,
    /// ordered by time step, then lower agent id, then kind.
    ///
    /// Paths of different lengths are padded with goal waits to a common
    /// horizon first.
    pub fn validate_solution(&self, paths: &[AgentPath]) -> Result<Vec<Conflict>> {
        if paths.len() != self.agent_count() {
            return Err(Error::MalformedPath {
                agent: paths.len().min(self.agent_count()),
                step: 0,
                reason: "number of paths differs from number of agents",
            });
        }
        for (agent, path) in paths.iter().enumerate() {
            self.check_path(agent, path)?;
        }
        let horizon = paths.iter().map(AgentPath::horizon).max().unwrap_or(0);
        let at = |a: usize, t: usize| paths[a].at(t);

        let mut conflicts = Vec::new();
        let k = paths.len();
        for t in 0..=horizon {
            for i in 0..k {
                for j in i + 1..k {
                    if at(i, t) == at(j, t) {
                        conflicts.push(Conflict::Vertex { agents: (i, j), vertex: at(i, t), time: t });
                    }
                    if t < horizon {
                        let (u, v) = (at(i, t), at(i, t + 1));
                        if u != v && at(j, t) == v && at(j, t + 1) == u {
                            conflicts.push(Conflict::Edge { agents: (i, j), from: u, to: v, time: t });
                        }
                    }
                }
            }
        }
        conflicts.sort();
        Ok(conflicts)
    }

    fn check_path(&self, agent: usize, path: &AgentPath) -> Result<()> {
        let bad = |step, reason| Err(Error::MalformedPath { agent, step, reason });
        let vs = path.vertices();
        if vs.is_empty() {
            return bad(0, "empty path");
        }
        if let Some(step) = vs.iter().position(|&v| v >= self.graph.vertex_count()) {
            return bad(step, "vertex out of range");
        }
        if vs[0] != self.starts[agent] {
            return bad(0, "does not begin at the agent's start");
        }
        if *vs.last().unwrap() != self.goals[agent] {
            return bad(vs.len() - 1, "does not end at the agent's goal");
        }
        for (step, w) in vs.windows(2).enumerate() {
            if w[0] != w[1] && !self.graph.is_adjacent(w[0], w[1]) {
                return bad(step + 1, "moves between non-adjacent vertices");
            }
        }
        Ok(())
    }
}

fn first_duplicate(vs: &[VertexId]) -> Option<(usize, usize)> {
    let mut seen: Vec<(VertexId, usize)> = vs.iter().copied().zip(0..).collect();
    seen.sort_unstable();
    seen.windows(2)
        .filter(|w| w[0].0 == w[1].0)
        .map(|w| (w[0].1.min(w[1].1), w[0].1.max(w[1].1)))
        .min()
}

/// Vertex sequence of one agent, one entry per time step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentPath(Vec<VertexId>);

impl AgentPath {
    pub fn new(vertices: Vec<VertexId>) -> Self {
        AgentPath(vertices)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    /// Last time step index.
    pub fn horizon(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    /// Position at `t`; the path is extended by waiting at its last vertex.
    pub fn at(&self, t: usize) -> VertexId {
        self.0[t.min(self.0.len() - 1)]
    }

    /// Time step from which the agent stays at its final vertex for good.
    pub fn cost(&self) -> u64 {
        match self.0.last() {
            None => 0,
            Some(goal) => {
                let resting = self.0.iter().rev().take_while(|v| *v == goal).count();
                (self.0.len() - resting) as u64
            }
        }
    }

    /// Extends the path with waits at its last vertex up to `horizon`.
    pub fn padded(&self, horizon: usize) -> AgentPath {
        let mut vs = self.0.clone();
        if let Some(&last) = vs.last() {
            vs.resize(vs.len().max(horizon + 1), last);
        }
        AgentPath(vs)
    }
}

/// `(sum_of_costs, makespan)` where an agent's cost counts every step before
/// it settles at its goal for good; trailing goal waits are free.
pub fn solution_costs(paths: &[AgentPath]) -> (u64, u64) {
    paths.iter().map(AgentPath::cost).fold((0, 0), |(soc, mk), c| (soc + c, mk.max(c)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConflictKind {
    Vertex,
    Edge,
}

/// A collision between two agents; `agents.0 < agents.1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Conflict {
    /// Both agents occupy `vertex` at `time`.
    Vertex { agents: (usize, usize), vertex: VertexId, time: usize },
    /// `agents.0` moves `from -> to` while `agents.1` moves `to -> from`
    /// between `time` and `time + 1`.
    Edge { agents: (usize, usize), from: VertexId, to: VertexId, time: usize },
}

impl Conflict {
    pub fn kind(&self) -> ConflictKind {
        match self {
            Conflict::Vertex { .. } => ConflictKind::Vertex,
            Conflict::Edge { .. } => ConflictKind::Edge,
        }
    }

    pub fn time(&self) -> usize {
        match *self {
            Conflict::Vertex { time, .. } | Conflict::Edge { time, .. } => time,
        }
    }

    pub fn agents(&self) -> (usize, usize) {
        match *self {
            Conflict::Vertex { agents, .. } | Conflict::Edge { agents, .. } => agents,
        }
    }

    fn sort_key(&self) -> (usize, usize, ConflictKind, usize, VertexId, VertexId) {
        let (i, j) = self.agents();
        match *self {
            Conflict::Vertex { vertex, time, .. } => (time, i, self.kind(), j, vertex, vertex),
            Conflict::Edge { from, to, time, .. } => (time, i, self.kind(), j, from, to),
        }
    }
}

impl Ord for Conflict {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Conflict {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn lower_bound_single_agent() {
        let inst = MapfInstance::new(line3(), vec![0], vec![2]).unwrap();
        assert_eq!(inst.lower_bound(), 2);
    }

    #[test]
    fn lower_bound_agents_at_goals() {
        let inst = MapfInstance::new(line3(), vec![0, 2], vec![0, 2]).unwrap();
        assert_eq!(inst.lower_bound(), 0);
    }

    #[test]
    fn lower_bound_diagonal_swap_on_square() {
        // 2x2 grid: 0 1 / 2 3; agents swap diagonally.
        let g = Graph::grid(2, 2, |_, _| true);
        let inst = MapfInstance::new(g, vec![0, 3], vec![3, 0]).unwrap();
        assert_eq!(inst.lower_bound(), 4);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            MapfInstance::new(line3(), vec![0, 0], vec![1, 2]).unwrap_err(),
            Error::DuplicateStart { first: 0, second: 1, vertex: 0 }
        );
        assert_eq!(
            MapfInstance::new(line3(), vec![0, 1], vec![2, 2]).unwrap_err(),
            Error::DuplicateGoal { first: 0, second: 1, vertex: 2 }
        );
        let split = Graph::from_edges(3, &[(0, 1)]).unwrap();
        assert_eq!(
            MapfInstance::new(split, vec![0], vec![2]).unwrap_err(),
            Error::Unsolvable { agent: 0 }
        );
    }

    #[test]
    fn validate_disjoint_components() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let inst = MapfInstance::new(g, vec![0, 2], vec![1, 3]).unwrap();
        let paths = [AgentPath::new(vec![0, 1]), AgentPath::new(vec![2, 3])];
        assert!(inst.validate_solution(&paths).unwrap().is_empty());
    }

    #[test]
    fn validate_vertex_conflict() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let inst = MapfInstance::new(g, vec![0, 2], vec![3, 1]).unwrap();
        let paths = [AgentPath::new(vec![0, 1, 3]), AgentPath::new(vec![2, 1, 1])];
        let cs = inst.validate_solution(&paths).unwrap();
        assert_eq!(cs, vec![Conflict::Vertex { agents: (0, 1), vertex: 1, time: 1 }]);
    }

    #[test]
    fn validate_edge_swap() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let inst = MapfInstance::new(g, vec![0, 1], vec![1, 0]).unwrap();
        let paths = [AgentPath::new(vec![0, 1]), AgentPath::new(vec![1, 0])];
        let cs = inst.validate_solution(&paths).unwrap();
        assert_eq!(cs, vec![Conflict::Edge { agents: (0, 1), from: 0, to: 1, time: 0 }]);
    }

    #[test]
    fn validate_pads_short_paths() {
        // Agent 0 parks at 1; agent 1 passes through 1 later.
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let inst = MapfInstance::new(g, vec![0, 2], vec![1, 0]).unwrap();
        let paths = [AgentPath::new(vec![0, 1]), AgentPath::new(vec![2, 2, 1, 0])];
        let cs = inst.validate_solution(&paths).unwrap();
        assert_eq!(cs, vec![Conflict::Vertex { agents: (0, 1), vertex: 1, time: 2 }]);
    }

    #[test]
    fn malformed_paths_are_rejected() {
        let inst = MapfInstance::new(line3(), vec![0], vec![2]).unwrap();
        let err = inst.validate_solution(&[AgentPath::new(vec![0, 2])]).unwrap_err();
        assert!(matches!(err, Error::MalformedPath { agent: 0, step: 1, .. }));
        let err = inst.validate_solution(&[AgentPath::new(vec![1, 2])]).unwrap_err();
        assert!(matches!(err, Error::MalformedPath { agent: 0, step: 0, .. }));
        let err = inst.validate_solution(&[AgentPath::new(vec![0, 1])]).unwrap_err();
        assert!(matches!(err, Error::MalformedPath { agent: 0, step: 1, .. }));
    }

    #[test]
    fn costs() {
        assert_eq!(AgentPath::new(vec![0, 1, 2]).cost(), 2);
        assert_eq!(AgentPath::new(vec![5, 5, 5]).cost(), 0);
        // Leaves the goal and returns: steps 0 and 1 are paid.
        assert_eq!(AgentPath::new(vec![5, 4, 5, 5]).cost(), 2);
        let paths = [AgentPath::new(vec![0, 1, 2]), AgentPath::new(vec![5, 4, 5, 5])];
        assert_eq!(solution_costs(&paths), (4, 2));
    }

    #[test]
    fn conflict_order() {
        let a = Conflict::Edge { agents: (0, 2), from: 0, to: 1, time: 1 };
        let b = Conflict::Vertex { agents: (1, 2), vertex: 3, time: 0 };
        let c = Conflict::Vertex { agents: (0, 1), vertex: 4, time: 1 };
        let mut v = vec![a, b, c];
        v.sort();
        assert_eq!(v, vec![b, c, a]);
    }
}
