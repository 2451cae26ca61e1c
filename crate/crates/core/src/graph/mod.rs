//! Immutable simple undirected graphs in compressed adjacency form.

mod degree;
pub mod expansion;
mod io;
mod traversal;

pub use degree::{check_graphical, DegreeSequence};
pub use expansion::{
    edge_boundary, expansion_exact, expansion_heuristic, vertex_boundary, ExpansionMode,
    ExpansionReport, EXACT_EXPANSION_CAP,
};
pub use io::{parse_edge_list, read_edge_list, write_edge_list};
pub(crate) use traversal::open_bfs_generations;
pub use traversal::{
    bfs_ball, bfs_distances, components, components_where, ComponentStats, UnionFind,
};

use crate::error::{Error, Result};

/// Simple undirected graph on vertices `0..n`.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted lexicographically;
/// an edge's id is its position in that list. Adjacency lists are sorted and
/// carry the id of the edge they traverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    edge_ids: Vec<u32>,
}

impl Graph {
    /// Builds the canonical graph from an edge list, dropping duplicates.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut canon = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { u, v, n });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            canon.push((a as u32, b as u32));
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(Graph::from_canonical(n, canon))
    }

    /// `edges` must already be sorted, deduplicated, with `u < v < n`.
    pub(crate) fn from_canonical(n: usize, edges: Vec<(u32, u32)>) -> Graph {
        assert!(n <= u32::MAX as usize, "vertex count exceeds u32 range");
        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in &edges {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; 2 * edges.len()];
        let mut edge_ids = vec![0u32; 2 * edges.len()];
        // Lexicographic order puts every (u, x) with u < x before any (x, w),
        // so each list comes out sorted.
        for (id, &(u, v)) in edges.iter().enumerate() {
            let (u, v) = (u as usize, v as usize);
            neighbors[fill[u]] = v as u32;
            edge_ids[fill[u]] = id as u32;
            fill[u] += 1;
            neighbors[fill[v]] = u as u32;
            edge_ids[fill[v]] = id as u32;
            fill[v] += 1;
        }
        debug_assert!((0..n).all(|x| neighbors[offsets[x]..offsets[x + 1]]
            .windows(2)
            .all(|w| w[0] < w[1])));
        Graph {
            n,
            edges,
            offsets,
            neighbors,
            edge_ids,
        }
    }

    pub fn empty(n: usize) -> Graph {
        Graph::from_canonical(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Neighbors of `v` paired with the ids of the connecting edges.
    pub fn incident(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.neighbors[range.clone()]
            .iter()
            .zip(&self.edge_ids[range])
            .map(|(&w, &e)| (w as usize, e as usize))
    }

    /// `i`-th entry of `v`'s adjacency as `(neighbor, edge id)`.
    #[inline]
    pub fn incident_at(&self, v: usize, i: usize) -> (usize, usize) {
        let at = self.offsets[v] + i;
        (self.neighbors[at] as usize, self.edge_ids[at] as usize)
    }

    /// Canonical edge list; index = edge id.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    pub fn edge(&self, id: usize) -> (usize, usize) {
        let (u, v) = self.edges[id];
        (u as usize, v as usize)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Id of edge `{u, v}`, if present.
    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        let nb = self.neighbors(u);
        nb.binary_search(&(v as u32))
            .ok()
            .map(|i| self.edge_ids[self.offsets[u] + i] as usize)
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::NoSuchVertex { vertex: v, n: self.n })
        }
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || components(self, None).expect("no mask").sizes.len() == 1
    }

    /// Graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::InvalidParameter("permutation length".into()));
        }
        let edges: Vec<_> = self.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        Graph::from_edges(self.n, &edges)
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n as u32;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(u, v)| (u + shift, v + shift)));
        Graph::from_canonical(self.n + other.n, edges)
    }

    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).expect("valid path")
    }

    pub fn cycle(n: usize) -> Graph {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        Graph::from_edges(n, &edges).expect("valid cycle")
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u as u32, v as u32));
            }
        }
        Graph::from_canonical(n, edges)
    }

    pub fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Graph::from_edges(leaves + 1, &edges).expect("valid star")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn path_from_edges() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.degrees(), vec![1, 2, 1]);
        assert_eq!(g.m(), 2);
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = Graph::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.edge(0), (0, 1));
    }

    #[test]
    fn self_loop_rejected() {
        assert!(matches!(
            Graph::from_edges(1, &[(0, 0)]),
            Err(Error::SelfLoop(0))
        ));
    }

    #[test]
    fn out_of_range_rejected() {
        let err = Graph::from_edges(2, &[(0, 2)]).unwrap_err();
        assert!(matches!(err, Error::VertexOutOfRange { u: 0, v: 2, n: 2 }));
    }

    #[test]
    fn edge_ids_follow_lexicographic_order() {
        let g = Graph::from_edges(4, &[(2, 3), (0, 3), (1, 0), (0, 2)]).unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1), (0, 2), (0, 3), (2, 3)]);
        assert_eq!(g.edge_id(3, 2), Some(3));
        assert_eq!(g.edge_id(1, 2), None);
    }

    proptest! {
        #[test]
        fn adjacency_invariants(n in 1usize..30, raw in proptest::collection::vec((0usize..30, 0usize..30), 0..120)) {
            let edges: Vec<_> = raw.into_iter()
                .map(|(u, v)| (u % n, v % n))
                .filter(|(u, v)| u != v)
                .collect();
            let g = Graph::from_edges(n, &edges).unwrap();
            let deg_sum: usize = g.degrees().iter().sum();
            prop_assert_eq!(deg_sum, 2 * g.m());
            for u in 0..n {
                let nb = g.neighbors(u);
                prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
                for (w, e) in g.incident(u) {
                    prop_assert!(w != u);
                    prop_assert!(g.has_edge(w, u));
                    let (a, b) = g.edge(e);
                    prop_assert_eq!((a.min(b), a.max(b)), (u.min(w), u.max(w)));
                }
            }
            prop_assert!(g.edges().all(|(u, v)| u < v));
        }
    }
}
