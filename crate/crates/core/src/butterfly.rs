//! Butterfly graphs of degree `B` and depth `d`.
//!
//! Layers `0..=d` each hold `B^d` nodes labelled by `d`-digit base-`B`
//! numbers (digit 0 least significant). An edge `e_k(i, j)` joins node `i`
//! of layer `k` to node `j` of layer `k + 1` when the labels agree on every
//! digit except possibly digit `k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest edge count accepted, so edge sets stay materialisable.
pub const MAX_EDGES: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ButterflySpec {
    degree: u64,
    depth: u32,
    nodes_per_layer: u64,
}

impl ButterflySpec {
    pub fn new(degree: u64, depth: u32) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidButterfly(format!("degree must be at least 2, got {degree}")));
        }
        if depth < 1 {
            return Err(Error::InvalidButterfly("depth must be at least 1".into()));
        }
        let nodes_per_layer = degree
            .checked_pow(depth)
            .ok_or_else(|| Error::InvalidButterfly("B^d overflows".into()))?;
        let edges = (depth as u64)
            .checked_mul(nodes_per_layer)
            .and_then(|x| x.checked_mul(degree))
            .filter(|&e| e <= MAX_EDGES)
            .ok_or_else(|| Error::InvalidButterfly(format!("more than {MAX_EDGES} edges")))?;
        debug_assert!(edges > 0);
        Ok(ButterflySpec {
            degree,
            depth,
            nodes_per_layer,
        })
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn layers(&self) -> u32 {
        self.depth + 1
    }

    pub fn nodes_per_layer(&self) -> u64 {
        self.nodes_per_layer
    }

    /// `n = d·B^{d+1}`.
    pub fn edge_count(&self) -> u64 {
        self.depth as u64 * self.nodes_per_layer * self.degree
    }

    /// Digit `h` of `label`, least significant first.
    pub fn digit(&self, label: u64, h: u32) -> u64 {
        (label / self.degree.pow(h)) % self.degree
    }

    /// Replaces digit `h` of `label` by `value`.
    pub fn with_digit(&self, label: u64, h: u32, value: u64) -> u64 {
        let place = self.degree.pow(h);
        label - self.digit(label, h) * place + value * place
    }

    pub fn check_label(&self, label: u64) -> Result<()> {
        if label < self.nodes_per_layer {
            Ok(())
        } else {
            Err(Error::LabelOutOfRange {
                label,
                nodes: self.nodes_per_layer,
            })
        }
    }

    pub fn edge(&self, layer: u32, source: u64, target: u64) -> Result<ButterflyEdge> {
        if layer >= self.depth {
            return Err(Error::InvalidButterfly(format!("layer {layer} not below depth {}", self.depth)));
        }
        self.check_label(source)?;
        self.check_label(target)?;
        let e = ButterflyEdge { layer, source, target };
        if !self.digits_agree(&e) {
            return Err(Error::InvalidButterfly(format!(
                "{source} and {target} differ outside digit {layer}"
            )));
        }
        Ok(e)
    }

    /// Labels agree on every digit other than the edge's layer.
    pub fn digits_agree(&self, e: &ButterflyEdge) -> bool {
        (0..self.depth)
            .filter(|&h| h != e.layer)
            .all(|h| self.digit(e.source, h) == self.digit(e.target, h))
    }

    /// Dense index `((k·B^d) + i)·B + j[k]`.
    pub fn edge_index(&self, e: &ButterflyEdge) -> u64 {
        ((e.layer as u64 * self.nodes_per_layer) + e.source) * self.degree + self.digit(e.target, e.layer)
    }

    pub fn edge_at(&self, index: u64) -> Result<ButterflyEdge> {
        if index >= self.edge_count() {
            return Err(Error::InvalidButterfly(format!("edge index {index} out of range")));
        }
        let target_digit = index % self.degree;
        let rest = index / self.degree;
        let source = rest % self.nodes_per_layer;
        let layer = (rest / self.nodes_per_layer) as u32;
        Ok(ButterflyEdge {
            layer,
            source,
            target: self.with_digit(source, layer, target_digit),
        })
    }

    /// Every edge, ordered by layer, then source, then the target's free digit.
    pub fn all_edges(&self) -> Vec<ButterflyEdge> {
        (0..self.edge_count())
            .map(|i| self.edge_at(i).expect("index below edge count"))
            .collect()
    }

    /// The unique source-to-sink path: edge `k` has taken the low `k` digits
    /// from `t` on entry and digit `k` from `t` on exit, keeping `s` above.
    pub fn path_edges(&self, s: u64, t: u64) -> Result<Vec<ButterflyEdge>> {
        self.check_label(s)?;
        self.check_label(t)?;
        let mut node = s;
        let mut path = Vec::with_capacity(self.depth as usize);
        for k in 0..self.depth {
            let next = self.with_digit(node, k, self.digit(t, k));
            path.push(ButterflyEdge {
                layer: k,
                source: node,
                target: next,
            });
            node = next;
        }
        debug_assert_eq!(node, t);
        Ok(path)
    }

    pub fn reachable(&self, edges: &EdgeSet, s: u64, t: u64) -> Result<bool> {
        self.check_edge_set(edges)?;
        Ok(self.path_edges(s, t)?.iter().all(|e| edges.contains(self, e)))
    }

    fn check_edge_set(&self, edges: &EdgeSet) -> Result<()> {
        if edges.spec != *self {
            return Err(Error::InvalidButterfly("edge set belongs to a different butterfly".into()));
        }
        Ok(())
    }

    pub fn random_edge_subset(&self, keep_probability: f64, seed: u64) -> Result<EdgeSet> {
        if !(0.0..=1.0).contains(&keep_probability) {
            return Err(Error::InvalidParameters(format!(
                "keep probability {keep_probability} not in [0, 1]"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let present = (0..self.edge_count())
            .map(|_| rng.gen_bool(keep_probability))
            .collect();
        Ok(EdgeSet { spec: *self, present })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ButterflyEdge {
    /// `k`, in `[0, d)`.
    pub layer: u32,
    /// `i`, a label on layer `k`.
    pub source: u64,
    /// `j`, a label on layer `k + 1`.
    pub target: u64,
}

/// A subset of a butterfly's edges as a bitset over canonical indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawEdgeSet", into = "RawEdgeSet")]
pub struct EdgeSet {
    spec: ButterflySpec,
    present: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct RawEdgeSet {
    B: u64,
    d: u32,
    edges: Vec<u64>,
}

impl TryFrom<RawEdgeSet> for EdgeSet {
    type Error = Error;

    fn try_from(raw: RawEdgeSet) -> Result<Self> {
        EdgeSet::from_indices(ButterflySpec::new(raw.B, raw.d)?, &raw.edges)
    }
}

impl From<EdgeSet> for RawEdgeSet {
    fn from(set: EdgeSet) -> Self {
        RawEdgeSet {
            B: set.spec.degree,
            d: set.spec.depth,
            edges: set.indices().collect(),
        }
    }
}

impl EdgeSet {
    pub fn empty(spec: ButterflySpec) -> Self {
        EdgeSet {
            spec,
            present: vec![false; spec.edge_count() as usize],
        }
    }

    pub fn full(spec: ButterflySpec) -> Self {
        EdgeSet {
            spec,
            present: vec![true; spec.edge_count() as usize],
        }
    }

    pub fn from_indices(spec: ButterflySpec, indices: &[u64]) -> Result<Self> {
        let mut set = EdgeSet::empty(spec);
        for &i in indices {
            if i >= spec.edge_count() {
                return Err(Error::InvalidButterfly(format!("edge index {i} out of range")));
            }
            set.present[i as usize] = true;
        }
        Ok(set)
    }

    pub fn spec(&self) -> ButterflySpec {
        self.spec
    }

    pub fn contains(&self, spec: &ButterflySpec, e: &ButterflyEdge) -> bool {
        self.present[spec.edge_index(e) as usize]
    }

    pub fn set(&mut self, e: &ButterflyEdge, present: bool) {
        let i = self.spec.edge_index(e) as usize;
        self.present[i] = present;
    }

    pub fn len(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.present
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| i as u64)
    }
}
