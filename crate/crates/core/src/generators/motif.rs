//! Motif (household) overlays: every external vertex of degree `d` is
//! replaced by a connected motif whose external degrees sum to `d`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Generated, Provenance};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

/// Internal graph plus the number of external half-edges at each vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Motif {
    internal: Graph,
    ext_degrees: Vec<usize>,
}

impl Motif {
    pub fn new(edges: &[(usize, usize)], ext_degrees: Vec<usize>) -> Result<Motif> {
        let size = ext_degrees.len();
        if size == 0 {
            return Err(Error::InvalidMotif("motif has no vertices".into()));
        }
        let internal = Graph::from_edges(size, edges)
            .map_err(|e| Error::InvalidMotif(format!("internal graph: {e}")))?;
        if !internal.is_connected() {
            return Err(Error::InvalidMotif("internal graph is disconnected".into()));
        }
        Ok(Motif {
            internal,
            ext_degrees,
        })
    }

    pub fn single_vertex(ext_degree: usize) -> Motif {
        Motif {
            internal: Graph::empty(1),
            ext_degrees: vec![ext_degree],
        }
    }

    pub fn internal(&self) -> &Graph {
        &self.internal
    }

    pub fn ext_degrees(&self) -> &[usize] {
        &self.ext_degrees
    }

    /// Number of vertices.
    pub fn size(&self) -> usize {
        self.ext_degrees.len()
    }

    /// Total external degree.
    pub fn external_degree(&self) -> usize {
        self.ext_degrees.iter().sum()
    }
}

/// Per-degree motif tables with a global size bound.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifDistribution {
    tables: BTreeMap<usize, Vec<(Motif, f64)>>,
    s_max: usize,
}

#[derive(Serialize, Deserialize)]
struct MotifEntry {
    edges: Vec<[usize; 2]>,
    ext: Vec<usize>,
    p: f64,
}

impl MotifDistribution {
    /// `s_max` defaults to the largest motif.
    pub fn new(
        tables: BTreeMap<usize, Vec<(Motif, f64)>>,
        s_max: Option<usize>,
    ) -> Result<MotifDistribution> {
        let largest = tables
            .values()
            .flatten()
            .map(|(m, _)| m.size())
            .max()
            .unwrap_or(0);
        let s_max = s_max.unwrap_or(largest);
        if largest > s_max {
            return Err(Error::InvalidMotif(format!(
                "motif of size {largest} exceeds s_max {s_max}"
            )));
        }
        for (&d, table) in &tables {
            if table.is_empty() {
                return Err(Error::InvalidMotif(format!("empty table for degree {d}")));
            }
            let mut total = 0.0;
            for (motif, p) in table {
                if motif.external_degree() != d {
                    return Err(Error::InvalidMotif(format!(
                        "motif with external degree {} listed under degree {d}",
                        motif.external_degree()
                    )));
                }
                if !(p.is_finite() && *p >= 0.0) {
                    return Err(Error::InvalidMotif(format!("bad probability {p}")));
                }
                total += p;
            }
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidMotif(format!(
                    "probabilities for degree {d} sum to {total}"
                )));
            }
        }
        Ok(MotifDistribution { tables, s_max })
    }

    /// The same motif for every listed degree.
    pub fn constant(entries: impl IntoIterator<Item = (usize, Motif)>) -> Result<MotifDistribution> {
        let tables = entries.into_iter().map(|(d, m)| (d, vec![(m, 1.0)])).collect();
        MotifDistribution::new(tables, None)
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    pub fn table(&self, d: usize) -> Option<&[(Motif, f64)]> {
        self.tables.get(&d).map(Vec::as_slice)
    }

    /// Parses `{"d": [{"edges": [[u, v], ...], "ext": [..], "p": w}, ...], ...}`.
    pub fn from_json(text: &str) -> Result<MotifDistribution> {
        let raw: BTreeMap<String, Vec<MotifEntry>> = serde_json::from_str(text)?;
        MotifDistribution::from_raw(raw)
    }

    fn from_raw(raw: BTreeMap<String, Vec<MotifEntry>>) -> Result<MotifDistribution> {
        let mut tables = BTreeMap::new();
        for (key, entries) in raw {
            let d: usize = key
                .parse()
                .map_err(|_| Error::InvalidMotif(format!("table key {key:?} is not a degree")))?;
            let mut table = Vec::with_capacity(entries.len());
            for e in entries {
                let edges: Vec<(usize, usize)> = e.edges.iter().map(|&[u, v]| (u, v)).collect();
                table.push((Motif::new(&edges, e.ext)?, e.p));
            }
            tables.insert(d, table);
        }
        MotifDistribution::new(tables, None)
    }

    fn to_raw(&self) -> BTreeMap<String, Vec<MotifEntry>> {
        self.tables
            .iter()
            .map(|(d, table)| {
                let entries = table
                    .iter()
                    .map(|(m, p)| MotifEntry {
                        edges: m.internal.edges().map(|(u, v)| [u, v]).collect(),
                        ext: m.ext_degrees.clone(),
                        p: *p,
                    })
                    .collect();
                (d.to_string(), entries)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_raw()).expect("motif tables serialize")
    }

    fn draw(&self, d: usize, rng: &mut impl Rng) -> Result<&Motif> {
        let table = self.tables.get(&d).ok_or(Error::MissingMotifTable(d))?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (motif, p) in table {
            acc += p;
            if u < acc {
                return Ok(motif);
            }
        }
        Ok(&table.last().expect("nonempty table").0)
    }
}

impl Serialize for MotifDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_raw().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MotifDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, Vec<MotifEntry>>::deserialize(d)?;
        MotifDistribution::from_raw(raw).map_err(serde::de::Error::custom)
    }
}

/// Replaces each external vertex by an independent motif draw.
///
/// The `d` external edges at a vertex are wired to motif vertices by a
/// uniformly random bijection onto the multiset where motif vertex `v`
/// appears `ext_degrees[v]` times. Vertices of each motif are numbered
/// contiguously in external-vertex order; `membership[v]` is the external
/// vertex a new vertex came from.
pub fn gen_motif_overlay(g_ext: &Graph, motifs: &MotifDistribution, seed: u64) -> Result<Generated> {
    // Validate before drawing anything.
    for x in 0..g_ext.n() {
        let d = g_ext.degree(x);
        if motifs.table(d).is_none() {
            return Err(Error::MissingMotifTable(d));
        }
    }
    let mut rng = seed::rng(seed);
    let mut offset = vec![0usize; g_ext.n() + 1];
    let mut membership: Vec<u32> = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    // Motif vertex receiving each external half-edge, indexed like adjacency.
    let mut slot_of_half_edge: Vec<Vec<u32>> = Vec::with_capacity(g_ext.n());
    for x in 0..g_ext.n() {
        let motif = motifs.draw(g_ext.degree(x), &mut rng)?;
        let base = offset[x];
        offset[x + 1] = base + motif.size();
        membership.extend(std::iter::repeat_n(x as u32, motif.size()));
        edges.extend(
            motif
                .internal
                .edges()
                .map(|(u, v)| ((base + u) as u32, (base + v) as u32)),
        );
        let mut slots: Vec<u32> = Vec::with_capacity(motif.external_degree());
        for (v, &k) in motif.ext_degrees.iter().enumerate() {
            slots.extend(std::iter::repeat_n((base + v) as u32, k));
        }
        slots.shuffle(&mut rng);
        slot_of_half_edge.push(slots);
    }
    for x in 0..g_ext.n() {
        for (i, (y, _)) in g_ext.incident(x).enumerate() {
            if x < y {
                let j = g_ext
                    .neighbors(y)
                    .binary_search(&(x as u32))
                    .expect("symmetric adjacency");
                let a = slot_of_half_edge[x][i];
                let b = slot_of_half_edge[y][j];
                edges.push((a.min(b), a.max(b)));
            }
        }
    }
    edges.sort_unstable();
    let n = offset[g_ext.n()];
    let graph = Graph::from_canonical(n, edges);
    let mut out = Generated::new(graph, Provenance::new("motif_overlay", seed));
    out.membership = Some(membership);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_k_regular;

    fn triangle_motifs() -> MotifDistribution {
        let tri = Motif::new(&[(0, 1), (1, 2), (0, 2)], vec![1, 1, 1]).unwrap();
        MotifDistribution::constant([(3, tri)]).unwrap()
    }

    #[test]
    fn identity_overlay() {
        let ext = Graph::path(2);
        let motifs = MotifDistribution::constant([(1, Motif::single_vertex(1))]).unwrap();
        let out = gen_motif_overlay(&ext, &motifs, 3).unwrap();
        assert_eq!(out.graph, ext);
    }

    #[test]
    fn triangles_on_cubic_graph() {
        let ext = gen_k_regular(3, 50, 1).unwrap().graph;
        let out = gen_motif_overlay(&ext, &triangle_motifs(), 2).unwrap();
        let g = &out.graph;
        assert_eq!(g.n(), 150);
        assert!(g.degrees().iter().all(|&k| k == 3));
        assert_eq!(g.m(), ext.m() + 3 * 50);
        let membership = out.membership.unwrap();
        for x in 0..50 {
            let block: Vec<usize> = (0..g.n()).filter(|&v| membership[v] == x).collect();
            assert_eq!(block.len(), 3);
            assert!(g.has_edge(block[0], block[1]) && g.has_edge(block[1], block[2]));
        }
    }

    #[test]
    fn external_degrees_respected() {
        let ext = gen_k_regular(4, 40, 7).unwrap().graph;
        // path a-b-c with external degrees 2, 0, 2
        let m = Motif::new(&[(0, 1), (1, 2)], vec![2, 0, 2]).unwrap();
        let single = Motif::single_vertex(4);
        let mut tables = BTreeMap::new();
        tables.insert(4, vec![(m, 0.5), (single, 0.5)]);
        let dist = MotifDistribution::new(tables, None).unwrap();
        let out = gen_motif_overlay(&ext, &dist, 9).unwrap();
        let g = &out.graph;
        let membership = out.membership.unwrap();
        let mut external_edges = 0;
        for (u, v) in g.edges() {
            if membership[u] != membership[v] {
                external_edges += 1;
            }
        }
        assert_eq!(external_edges, ext.m());
        for v in 0..g.n() {
            let ext_deg = g
                .neighbors(v)
                .iter()
                .filter(|&&w| membership[w as usize] != membership[v])
                .count();
            let block: Vec<usize> = (0..g.n()).filter(|&u| membership[u] == membership[v]).collect();
            let expected = if block.len() == 1 {
                4
            } else {
                [2, 0, 2][v - block[0]]
            };
            assert_eq!(ext_deg, expected);
        }
    }

    #[test]
    fn validation_errors() {
        let tri = Motif::new(&[(0, 1), (1, 2), (0, 2)], vec![1, 1, 1]).unwrap();
        let mut tables = BTreeMap::new();
        tables.insert(4, vec![(tri, 1.0)]);
        assert!(matches!(
            MotifDistribution::new(tables, None),
            Err(Error::InvalidMotif(_))
        ));
        assert!(Motif::new(&[(0, 1)], vec![1, 1, 1]).is_err());
        assert!(Motif::new(&[], vec![]).is_err());
        let ext = Graph::path(3);
        let motifs = MotifDistribution::constant([(1, Motif::single_vertex(1))]).unwrap();
        assert!(matches!(
            gen_motif_overlay(&ext, &motifs, 0),
            Err(Error::MissingMotifTable(2))
        ));
    }

    #[test]
    fn json_format() {
        let text = r#"{"3": [{"edges": [[0,1],[1,2],[0,2]], "ext": [1,1,1], "p": 0.25},
                             {"edges": [], "ext": [3], "p": 0.75}]}"#;
        let dist = MotifDistribution::from_json(text).unwrap();
        assert_eq!(dist.s_max(), 3);
        assert_eq!(dist.table(3).unwrap().len(), 2);
        let again = MotifDistribution::from_json(&dist.to_json()).unwrap();
        assert_eq!(again, dist);
        assert!(MotifDistribution::from_json(r#"{"x": []}"#).is_err());
    }
}
