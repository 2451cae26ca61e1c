use std::collections::VecDeque;

use super::Graph;
use crate::error::{Error, Result};

/// Vertices within distance `k` of `v`, in BFS order, with their distances.
pub fn bfs_ball(g: &Graph, v: usize, k: usize) -> Result<Vec<(usize, usize)>> {
    g.check_vertex(v)?;
    let mut dist = vec![usize::MAX; g.n()];
    let mut out = vec![(v, 0)];
    dist[v] = 0;
    let mut head = 0;
    while head < out.len() {
        let (u, d) = out[head];
        head += 1;
        if d == k {
            continue;
        }
        for &w in g.neighbors(u) {
            let w = w as usize;
            if dist[w] == usize::MAX {
                dist[w] = d + 1;
                out.push((w, d + 1));
            }
        }
    }
    Ok(out)
}

/// Disjoint-set forest with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut cur = x;
        while self.parent[cur] as usize != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }
}

/// Connected components of the graph restricted to open edges.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStats {
    /// Component id per vertex; ids index `sizes`, so id 0 is the largest.
    pub labels: Vec<u32>,
    /// Component sizes, descending.
    pub sizes: Vec<usize>,
    /// `sizes[0] / n`.
    pub giant_fraction: f64,
}

impl ComponentStats {
    pub fn component_size(&self, v: usize) -> usize {
        self.sizes[self.labels[v] as usize]
    }

    pub fn in_giant(&self, v: usize) -> bool {
        self.labels[v] == 0
    }

    pub fn giant_size(&self) -> usize {
        self.sizes.first().copied().unwrap_or(0)
    }
}

/// Components over the edges whose bit is set in `open`; `None` keeps all edges.
pub fn components(g: &Graph, open: Option<&[bool]>) -> Result<ComponentStats> {
    match open {
        Some(bits) => {
            if bits.len() != g.m() {
                return Err(Error::MaskLength {
                    expected: g.m(),
                    got: bits.len(),
                });
            }
            Ok(components_where(g, |e| bits[e]))
        }
        None => Ok(components_where(g, |_| true)),
    }
}

/// Components over the edges accepted by `is_open(edge_id)`.
pub fn components_where(g: &Graph, is_open: impl Fn(usize) -> bool) -> ComponentStats {
    let n = g.n();
    let mut uf = UnionFind::new(n);
    for (id, (u, v)) in g.edges().enumerate() {
        if is_open(id) {
            uf.union(u, v);
        }
    }
    // Rank components by size, ties by smallest member, for stable labels.
    let mut root_first = vec![u32::MAX; n];
    let mut roots = Vec::new();
    let mut root_of = vec![0u32; n];
    for v in 0..n {
        let r = uf.find(v);
        root_of[v] = r as u32;
        if root_first[r] == u32::MAX {
            root_first[r] = v as u32;
            roots.push(r);
        }
    }
    let mut order: Vec<(usize, usize)> = roots.iter().map(|&r| (uf.size_of(r), r)).collect();
    // `roots` is already ordered by first member; a stable sort keeps that on ties.
    order.sort_by(|a, b| b.0.cmp(&a.0));
    let mut label_of_root = vec![0u32; n];
    for (label, &(_, r)) in order.iter().enumerate() {
        label_of_root[r] = label as u32;
    }
    let labels = root_of.iter().map(|&r| label_of_root[r as usize]).collect();
    let sizes: Vec<usize> = order.iter().map(|&(s, _)| s).collect();
    let giant_fraction = if n == 0 {
        0.0
    } else {
        sizes[0] as f64 / n as f64
    };
    ComponentStats {
        labels,
        sizes,
        giant_fraction,
    }
}

/// Vertices reachable from `seeds` through edges accepted by `is_open`,
/// grouped by BFS generation. Generation 0 is the (deduplicated) seed set.
pub(crate) fn open_bfs_generations(
    g: &Graph,
    seeds: &[usize],
    is_open: impl Fn(usize) -> bool,
) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.n()];
    let mut current: Vec<usize> = Vec::new();
    for &s in seeds {
        if !seen[s] {
            seen[s] = true;
            current.push(s);
        }
    }
    let mut generations = Vec::new();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &u in &current {
            for (w, e) in g.incident(u) {
                if !seen[w] && is_open(e) {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        generations.push(current);
        current = next;
    }
    generations
}

/// BFS distances from `v`; `usize::MAX` marks unreachable vertices.
pub fn bfs_distances(g: &Graph, v: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.n()];
    let mut queue = VecDeque::from([v]);
    dist[v] = 0;
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            let w = w as usize;
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}
