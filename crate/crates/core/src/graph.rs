//! Undirected graphs and breadth-first distances.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub type VertexId = usize;

/// Distance sentinel for vertices not reachable from the BFS source.
pub const UNREACHABLE: u32 = u32::MAX;

/// Simple undirected graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adjacency: Vec<Vec<VertexId>>,
}

impl Graph {
    /// Validates adjacency lists: sorted, no duplicates, no self-loops,
    /// in range and symmetric.
    pub fn new(adjacency: Vec<Vec<VertexId>>) -> Result<Self> {
        let n = adjacency.len();
        for (u, nbrs) in adjacency.iter().enumerate() {
            for w in nbrs.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidGraph(format!(
                        "neighbors of {u} are not strictly increasing"
                    )));
                }
            }
            for &v in nbrs {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, vertex_count: n });
                }
                if v == u {
                    return Err(Error::InvalidGraph(format!("self-loop at {u}")));
                }
                if adjacency[v].binary_search(&u).is_err() {
                    return Err(Error::InvalidGraph(format!("edge {u}-{v} is not symmetric")));
                }
            }
        }
        Ok(Graph { adjacency })
    }

    /// Builds a graph from an undirected edge list. Duplicate edges are merged.
    pub fn from_edges(vertex_count: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= vertex_count {
                    return Err(Error::VertexOutOfRange { vertex: x, vertex_count });
                }
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        Ok(Graph { adjacency })
    }

    /// 4-connected grid over the cells for which `passable(row, col)` holds,
    /// with vertex ids assigned in row-major order.
    pub fn grid(height: usize, width: usize, passable: impl Fn(usize, usize) -> bool) -> Self {
        let mut index = vec![usize::MAX; height * width];
        let mut next = 0;
        for r in 0..height {
            for c in 0..width {
                if passable(r, c) {
                    index[r * width + c] = next;
                    next += 1;
                }
            }
        }
        let mut adjacency = vec![Vec::new(); next];
        for r in 0..height {
            for c in 0..width {
                let u = index[r * width + c];
                if u == usize::MAX {
                    continue;
                }
                // Pushed in increasing id order: up, left, right, down.
                let mut nbrs = Vec::with_capacity(4);
                if r > 0 {
                    nbrs.push(index[(r - 1) * width + c]);
                }
                if c > 0 {
                    nbrs.push(index[r * width + c - 1]);
                }
                if c + 1 < width {
                    nbrs.push(index[r * width + c + 1]);
                }
                if r + 1 < height {
                    nbrs.push(index[(r + 1) * width + c]);
                }
                nbrs.retain(|&v| v != usize::MAX);
                adjacency[u] = nbrs;
            }
        }
        Graph { adjacency }
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v]
    }

    pub fn is_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Hop distances from `source`; unreachable vertices get [`UNREACHABLE`].
    ///
    /// # Panics
    /// If `source` is not a vertex of the graph.
    pub fn shortest_dists(&self, source: VertexId) -> Vec<u32> {
        assert!(source < self.vertex_count(), "BFS source {source} out of range");
        let mut dist = vec![UNREACHABLE; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let next = dist[u] + 1;
            for &v in &self.adjacency[u] {
                if dist[v] == UNREACHABLE {
                    dist[v] = next;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn dists_on_line() {
        assert_eq!(path3().shortest_dists(0), vec![0, 1, 2]);
    }

    #[test]
    fn dists_single_vertex() {
        let g = Graph::new(vec![vec![]]).unwrap();
        assert_eq!(g.shortest_dists(0), vec![0]);
    }

    #[test]
    fn dists_on_open_grid_are_manhattan() {
        let g = Graph::grid(3, 3, |_, _| true);
        let d = g.shortest_dists(0);
        // Frozen from a hand BFS over the 3x3 grid.
        assert_eq!(d, vec![0, 1, 2, 1, 2, 3, 2, 3, 4]);
        assert_eq!(*d.iter().max().unwrap(), 4);
    }

    #[test]
    fn unreachable_gets_sentinel() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        assert_eq!(g.shortest_dists(0)[2], UNREACHABLE);
    }

    #[test]
    fn rejects_asymmetric_and_self_loops() {
        assert!(Graph::new(vec![vec![1], vec![]]).is_err());
        assert!(Graph::new(vec![vec![0]]).is_err());
        assert!(Graph::new(vec![vec![2]]).is_err());
        assert!(Graph::new(vec![vec![1, 1], vec![0]]).is_err());
        assert!(Graph::from_edges(2, &[(1, 1)]).is_err());
    }

    #[test]
    fn grid_with_blocked_cell() {
        // 2x2 with (0,1) blocked -> 3 vertices in an L.
        let g = Graph::grid(2, 2, |r, c| !(r == 0 && c == 1));
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert!(Graph::new((0..3).map(|v| g.neighbors(v).to_vec()).collect()).is_ok());
    }
}
