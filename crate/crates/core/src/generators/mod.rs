//! Random graph models: configuration model conditioned on simplicity,
//! conditional preferential attachment, motif overlays, and the two-block
//! graph that has a local limit but no large-set expansion.

mod cm;
mod motif;
mod pa;

pub use cm::{gen_cm_simple, gen_k_regular, DEFAULT_MAX_RETRIES};
pub use motif::{gen_motif_overlay, Motif, MotifDistribution};
pub use pa::{gen_pa, PaStats};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{DegreeSequence, Graph};
use crate::seed;

/// Where a generated graph came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub seed: u64,
    /// Hash of the [`GenSpec`] when generated through one.
    pub spec_hash: Option<String>,
    /// Set when the configuration model gave up on simplicity and erased
    /// loops and multi-edges.
    pub erased: bool,
    /// Whole matchings drawn (configuration model only).
    pub attempts: usize,
}

impl Provenance {
    pub fn new(model: &str, seed: u64) -> Provenance {
        Provenance {
            model: model.into(),
            seed,
            spec_hash: None,
            erased: false,
            attempts: 0,
        }
    }

    fn with_attempts(mut self, attempts: usize) -> Provenance {
        self.attempts = attempts;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: Graph,
    pub provenance: Provenance,
    /// External vertex of each vertex, for motif overlays.
    pub membership: Option<Vec<u32>>,
}

impl Generated {
    fn new(graph: Graph, provenance: Provenance) -> Generated {
        Generated {
            graph,
            provenance,
            membership: None,
        }
    }
}

/// Two independent uniform `d`-regular graphs on `n/2` vertices each, joined
/// by the single bridge `(0, n/2)`.
pub fn gen_two_block(d: usize, n: usize, seed: u64) -> Result<Generated> {
    if n % 2 == 1 {
        return Err(Error::InvalidParameter(format!("n must be even, got {n}")));
    }
    let half = n / 2;
    let a = gen_k_regular(d, half, seed::substream(seed, 0))?;
    let b = gen_k_regular(d, half, seed::substream(seed, 1))?;
    let mut edges: Vec<(usize, usize)> = a.graph.disjoint_union(&b.graph).edges().collect();
    edges.push((0, half));
    let graph = Graph::from_edges(n, &edges)?;
    let mut prov = Provenance::new("two_block", seed);
    prov.erased = a.provenance.erased || b.provenance.erased;
    prov.attempts = a.provenance.attempts + b.provenance.attempts;
    Ok(Generated::new(graph, prov))
}

/// The bridge edge id of a graph produced by [`gen_two_block`].
pub fn two_block_bridge(g: &Graph) -> Option<usize> {
    g.edge_id(0, g.n() / 2)
}

/// Degree sequence in a config: an explicit list or `"DxN"` (N copies of D).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DegreeSpec {
    List(Vec<usize>),
    Compact(String),
}

impl DegreeSpec {
    pub fn sequence(&self) -> Result<DegreeSequence> {
        match self {
            DegreeSpec::List(d) => Ok(DegreeSequence::new(d.clone())),
            DegreeSpec::Compact(text) => parse_compact_degrees(text),
        }
    }
}

/// Parses comma-separated `D` or `DxN` items, e.g. `"3x100000"` or `"4x10,2x6"`.
pub fn parse_compact_degrees(text: &str) -> Result<DegreeSequence> {
    let bad = || Error::InvalidParameter(format!("bad degree list {text:?}"));
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('x') {
            Some((d, count)) => {
                let d: usize = d.trim().parse().map_err(|_| bad())?;
                let count: usize = count.trim().parse().map_err(|_| bad())?;
                out.extend(std::iter::repeat_n(d, count));
            }
            None => out.push(item.parse().map_err(|_| bad())?),
        }
    }
    Ok(DegreeSequence::new(out))
}

fn default_retries() -> usize {
    DEFAULT_MAX_RETRIES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GenModel {
    Cm {
        degrees: DegreeSpec,
        #[serde(default = "default_retries")]
        max_retries: usize,
    },
    Pa {
        m: usize,
        n: usize,
    },
    MotifOverlay {
        external: Box<GenModel>,
        motifs: MotifDistribution,
    },
    TwoBlock {
        d: usize,
        n: usize,
    },
    KRegular {
        d: usize,
        n: usize,
    },
}

/// A model with its parameters and seed; serialized as one JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    #[serde(flatten)]
    pub model: GenModel,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(model: GenModel, seed: u64) -> GenSpec {
        GenSpec { model, seed }
    }

    /// First 16 hex digits of SHA-256 over the compact JSON form.
    pub fn hash(&self) -> String {
        short_hash(serde_json::to_string(self).expect("spec serializes").as_bytes())
    }

    pub fn validate(&self) -> Result<()> {
        validate_model(&self.model)
    }

    pub fn generate(&self) -> Result<Generated> {
        let mut out = generate_model(&self.model, self.seed)?;
        out.provenance.spec_hash = Some(self.hash());
        Ok(out)
    }
}

pub(crate) fn short_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn validate_model(model: &GenModel) -> Result<()> {
    let fail = |msg: String| Err(Error::Config(msg));
    match model {
        GenModel::Cm { degrees, .. } => {
            let d = degrees.sequence()?;
            if d.sum() % 2 == 1 {
                return Err(Error::OddDegreeSum);
            }
            if !d.is_graphical() {
                return Err(Error::NonGraphical);
            }
            Ok(())
        }
        GenModel::Pa { m, n } => {
            if *m < 2 || *n < 2 * m + 1 {
                return fail(format!("pa needs m >= 2 and n >= 2m + 1 (m = {m}, n = {n})"));
            }
            Ok(())
        }
        GenModel::MotifOverlay { external, .. } => validate_model(external),
        GenModel::TwoBlock { d, n } => {
            if n % 2 == 1 || (d * (n / 2)) % 2 == 1 || *d >= n / 2 {
                return fail(format!("infeasible two-block parameters d = {d}, n = {n}"));
            }
            Ok(())
        }
        GenModel::KRegular { d, n } => {
            if (d * n) % 2 == 1 {
                return Err(Error::OddDegreeSum);
            }
            if d >= n {
                return fail(format!("k-regular needs d < n (d = {d}, n = {n})"));
            }
            Ok(())
        }
    }
}

fn generate_model(model: &GenModel, seed: u64) -> Result<Generated> {
    match model {
        GenModel::Cm {
            degrees,
            max_retries,
        } => gen_cm_simple(&degrees.sequence()?, seed, *max_retries),
        GenModel::Pa { m, n } => gen_pa(*m, *n, seed).map(|(g, _)| g),
        GenModel::MotifOverlay { external, motifs } => {
            let ext = generate_model(external, seed::substream(seed, 1))?;
            let mut out = gen_motif_overlay(&ext.graph, motifs, seed::substream(seed, 2))?;
            out.provenance.seed = seed;
            out.provenance.erased = ext.provenance.erased;
            out.provenance.attempts = ext.provenance.attempts;
            Ok(out)
        }
        GenModel::TwoBlock { d, n } => gen_two_block(*d, *n, seed),
        GenModel::KRegular { d, n } => gen_k_regular(*d, *n, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::components;

    #[test]
    fn two_block_structure() {
        let out = gen_two_block(3, 20, 4).unwrap();
        let g = &out.graph;
        assert_eq!(g.m(), 31);
        let bridge = two_block_bridge(g).unwrap();
        let mask: Vec<bool> = (0..g.m()).map(|e| e != bridge).collect();
        let c = components(g, Some(&mask)).unwrap();
        assert_eq!(c.sizes, vec![10, 10]);
        let mut degs = g.degrees();
        degs.sort();
        assert_eq!(&degs[18..], &[4, 4]);
        assert!(degs[..18].iter().all(|&k| k == 3));
    }

    #[test]
    fn two_block_rejects_infeasible() {
        assert!(gen_two_block(3, 21, 0).is_err());
        assert!(gen_two_block(3, 10, 0).is_err());
    }

    #[test]
    fn compact_degrees() {
        assert_eq!(parse_compact_degrees("3x4").unwrap().degrees, vec![3; 4]);
        assert_eq!(
            parse_compact_degrees("2x2, 1,1").unwrap().degrees,
            vec![2, 2, 1, 1]
        );
        assert!(parse_compact_degrees("ax3").is_err());
    }

    #[test]
    fn spec_json_round_trip_and_hash() {
        let text = r#"{"model": "cm", "degrees": "3x10", "seed": 5}"#;
        let spec: GenSpec = serde_json::from_str(text).unwrap();
        assert_eq!(
            spec.model,
            GenModel::Cm {
                degrees: DegreeSpec::Compact("3x10".into()),
                max_retries: DEFAULT_MAX_RETRIES
            }
        );
        let again: GenSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again, spec);
        assert_eq!(spec.hash().len(), 16);
        let other = GenSpec::new(spec.model.clone(), 6);
        assert_ne!(other.hash(), spec.hash());
        let out = spec.generate().unwrap();
        assert_eq!(out.provenance.spec_hash, Some(spec.hash()));
        assert_eq!(spec.generate().unwrap().graph, out.graph);
    }

    #[test]
    fn overlay_spec() {
        let text = r#"{"model": "motif_overlay", "seed": 1,
            "external": {"model": "k_regular", "d": 3, "n": 10},
            "motifs": {"3": [{"edges": [[0,1],[1,2],[0,2]], "ext": [1,1,1], "p": 1.0}]}}"#;
        let spec: GenSpec = serde_json::from_str(text).unwrap();
        spec.validate().unwrap();
        let out = spec.generate().unwrap();
        assert_eq!(out.graph.n(), 30);
    }

    #[test]
    fn validation_catches_bad_specs() {
        let bad = GenSpec::new(GenModel::Cm { degrees: DegreeSpec::List(vec![3, 1]), max_retries: 5 }, 0);
        assert!(matches!(bad.validate(), Err(Error::NonGraphical)));
        let bad = GenSpec::new(GenModel::KRegular { d: 3, n: 5 }, 0);
        assert!(matches!(bad.validate(), Err(Error::OddDegreeSum)));
        let bad = GenSpec::new(GenModel::Pa { m: 2, n: 4 }, 0);
        assert!(bad.validate().is_err());
    }
}
