//! Time-expanded reachability diagrams (MDDs) for single agents.
//!
//! An [`Mdd`] keeps exactly the `(vertex, time)` nodes that some start-to-goal
//! walk of the agent can visit when the whole instance must fit the
//! sum-of-costs bound behind a [`HorizonPlan`].

use alloc::vec::Vec;

use crate::graph::VertexId;
use crate::instance::MapfInstance;
use crate::{Error, Result};

/// Common horizon and excess budget derived from a sum-of-costs bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HorizonPlan {
    /// Last time step shared by all agents.
    pub horizon: usize,
    /// Excess budget: sum-of-costs bound minus the lower bound.
    pub delta: u64,
    /// Shortest start-to-goal distance per agent.
    pub dists: Vec<u32>,
}

impl HorizonPlan {
    /// `soc` must not be below the instance lower bound.
    pub fn new(instance: &MapfInstance, soc: u64) -> Result<Self> {
        let lower_bound = instance.lower_bound();
        if soc < lower_bound {
            return Err(Error::SocBelowLowerBound { soc, lower_bound });
        }
        let delta = soc - lower_bound;
        let dists: Vec<u32> = (0..instance.agent_count()).map(|a| instance.shortest_dist(a)).collect();
        let max_dist = dists.iter().copied().max().unwrap_or(0) as u64;
        Ok(HorizonPlan { horizon: (max_dist + delta) as usize, delta, dists })
    }

    /// Latest time by which `agent` must have settled at its goal.
    pub fn arrival_deadline(&self, agent: usize) -> usize {
        (u64::from(self.dists[agent]) + self.delta).min(self.horizon as u64) as usize
    }
}

/// Layered DAG of reachable `(vertex, time)` nodes for one agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mdd {
    agent: usize,
    /// Sorted vertex ids per time step `0..=horizon`.
    layers: Vec<Vec<VertexId>>,
    /// `succ[t][k]`: sorted successors in layer `t + 1` of `layers[t][k]`.
    succ: Vec<Vec<Vec<VertexId>>>,
}

impl Mdd {
    pub fn build(instance: &MapfInstance, agent: usize, plan: &HorizonPlan) -> Mdd {
        let horizon = plan.horizon;
        let deadline = plan.arrival_deadline(agent);
        let goal = instance.goal(agent);
        let from_start = instance.dists_from_start(agent);
        let to_goal = instance.dists_to_goal(agent);
        let n = instance.graph().vertex_count();

        let layers: Vec<Vec<VertexId>> = (0..=horizon)
            .map(|t| {
                if t >= deadline {
                    return alloc::vec![goal];
                }
                (0..n)
                    .filter(|&v| {
                        from_start[v] as usize <= t
                            && (to_goal[v] as u64) <= (deadline - t) as u64
                    })
                    .collect()
            })
            .collect();

        let graph = instance.graph();
        let succ = (0..horizon)
            .map(|t| {
                let next = &layers[t + 1];
                layers[t]
                    .iter()
                    .map(|&u| {
                        next.iter()
                            .copied()
                            .filter(|&v| v == u || graph.is_adjacent(u, v))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Mdd { agent, layers, succ }
    }

    pub fn agent(&self) -> usize {
        self.agent
    }

    pub fn horizon(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layer(&self, t: usize) -> &[VertexId] {
        &self.layers[t]
    }

    pub fn layers(&self) -> &[Vec<VertexId>] {
        &self.layers
    }

    pub fn contains(&self, v: VertexId, t: usize) -> bool {
        self.index_of(v, t).is_some()
    }

    pub fn index_of(&self, v: VertexId, t: usize) -> Option<usize> {
        self.layers.get(t)?.binary_search(&v).ok()
    }

    /// Successors of `(v, t)` in layer `t + 1`; empty for the last layer or a
    /// node outside the diagram.
    pub fn successors(&self, v: VertexId, t: usize) -> &[VertexId] {
        match (self.succ.get(t), self.index_of(v, t)) {
            (Some(row), Some(k)) => &row[k],
            _ => &[],
        }
    }

    pub fn has_edge(&self, u: VertexId, t: usize, v: VertexId) -> bool {
        self.successors(u, t).binary_search(&v).is_ok()
    }

    /// Predecessors of `(v, t)` in layer `t - 1`, computed by scanning.
    pub fn predecessors(&self, v: VertexId, t: usize) -> Vec<VertexId> {
        if t == 0 {
            return Vec::new();
        }
        self.layers[t - 1].iter().copied().filter(|&u| self.has_edge(u, t - 1, v)).collect()
    }

    pub fn node_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().flatten().map(Vec::len).sum()
    }

    /// All nodes as `(vertex, time)` in layer order.
    pub fn nodes(&self) -> impl Iterator<Item = (VertexId, usize)> + '_ {
        self.layers.iter().enumerate().flat_map(|(t, l)| l.iter().map(move |&v| (v, t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use alloc::vec;

    fn line(s: usize, g: usize) -> MapfInstance {
        let graph = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        MapfInstance::new(graph, vec![s], vec![g]).unwrap()
    }

    #[test]
    fn plan_examples() {
        let p = HorizonPlan::new(&line(0, 2), 2).unwrap();
        assert_eq!((p.horizon, p.delta), (2, 0));

        // dists {2, 3} on a 5-vertex line; soc 6.
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let inst = MapfInstance::new(g, vec![0, 4], vec![2, 1]).unwrap();
        let p = HorizonPlan::new(&inst, 6).unwrap();
        assert_eq!((p.horizon, p.delta), (4, 1));

        assert_eq!(
            HorizonPlan::new(&line(0, 2), 1).unwrap_err(),
            Error::SocBelowLowerBound { soc: 1, lower_bound: 2 }
        );
    }

    #[test]
    fn unique_path() {
        let inst = line(0, 2);
        let m = Mdd::build(&inst, 0, &HorizonPlan::new(&inst, 2).unwrap());
        assert_eq!(m.layers(), &[vec![0], vec![1], vec![2]]);
        assert_eq!(m.edge_count(), 2);
    }

    #[test]
    fn one_step_of_slack() {
        let inst = line(0, 2);
        let m = Mdd::build(&inst, 0, &HorizonPlan::new(&inst, 3).unwrap());
        assert_eq!(m.layers(), &[vec![0], vec![0, 1], vec![1, 2], vec![2]]);
        assert_eq!(m.successors(0, 1), &[1]);
        assert_eq!(m.successors(1, 1), &[1, 2]);
        assert_eq!(m.predecessors(2, 3), vec![1, 2]);
    }

    #[test]
    fn start_is_goal() {
        let inst = line(1, 1);
        let m = Mdd::build(&inst, 0, &HorizonPlan::new(&inst, 0).unwrap());
        assert_eq!(m.layers(), &[vec![1]]);
        assert_eq!(m.edge_count(), 0);
    }

    #[test]
    fn early_agent_settles_at_goal() {
        // Agent 0 has dist 1, agent 1 dist 2; with delta 0 agent 0 is pinned
        // to its goal from t = 1 even though the horizon is 2.
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let inst = MapfInstance::new(g, vec![0, 4], vec![1, 2]).unwrap();
        let plan = HorizonPlan::new(&inst, 3).unwrap();
        assert_eq!(plan.horizon, 2);
        let m = Mdd::build(&inst, 0, &plan);
        assert_eq!(m.layers(), &[vec![0], vec![1], vec![1]]);
    }
}
