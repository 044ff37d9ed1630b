//! Undirected multigraphs, girth by breadth-first search, and the Moore-type
//! bound relating node count, average degree and girth.

use crate::error::{Error, Result};

/// Undirected multigraph; self-loops and parallel edges allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    nodes: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

/// A simple cycle: edges in traversal order and the node each edge leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub edges: Vec<usize>,
    pub nodes: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

impl Multigraph {
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); nodes];
        for (id, &(u, v)) in edges.iter().enumerate() {
            if u >= nodes || v >= nodes {
                return Err(Error::InvalidParameters(format!(
                    "edge ({u}, {v}) outside {nodes} nodes"
                )));
            }
            adjacency[u].push((id, v));
            if u != v {
                adjacency[v].push((id, u));
            }
        }
        Ok(Multigraph { nodes, edges, adjacency })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `2|E| / |V|`.
    pub fn average_degree(&self) -> f64 {
        if self.nodes == 0 {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.nodes as f64
        }
    }

    pub fn girth(&self) -> Option<usize> {
        self.shortest_cycle().map(|c| c.len())
    }

    /// A shortest cycle, counting a self-loop as length 1 and a parallel pair
    /// as length 2. `None` for forests.
    ///
    /// BFS from every root; a non-tree edge `(u, w)` closes a walk of length
    /// `dist[u] + dist[w] + 1`, which is a simple cycle whenever the two tree
    /// paths meet only at the root. At a root lying on a shortest cycle that
    /// happens for the minimum, so the overall minimum is exact.
    pub fn shortest_cycle(&self) -> Option<Cycle> {
        let mut best: Option<Cycle> = None;
        let mut dist = vec![usize::MAX; self.nodes];
        let mut parent = vec![usize::MAX; self.nodes];
        let mut queue = std::collections::VecDeque::new();
        for root in 0..self.nodes {
            if best.as_ref().is_some_and(|c| c.len() == 1) {
                break;
            }
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            parent.iter_mut().for_each(|p| *p = usize::MAX);
            dist[root] = 0;
            queue.clear();
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                if let Some(c) = &best {
                    // every later candidate has length >= 2·dist[u]
                    if 2 * dist[u] >= c.len() {
                        break;
                    }
                }
                for &(e, w) in &self.adjacency[u] {
                    if e == parent[u] {
                        continue;
                    }
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = e;
                        queue.push_back(w);
                        continue;
                    }
                    let len = dist[u] + dist[w] + 1;
                    if best.as_ref().is_some_and(|c| c.len() <= len) {
                        continue;
                    }
                    if let Some(c) = self.close_cycle(root, u, w, e, &parent) {
                        best = Some(c);
                    }
                }
            }
        }
        best
    }

    fn other_end(&self, e: usize, node: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == node {
            b
        } else {
            a
        }
    }

    /// Tree path from `root` to `node` as (edge, node-it-leaves) pairs.
    fn tree_path(&self, root: usize, node: usize, parent: &[usize]) -> Vec<(usize, usize)> {
        let mut path = Vec::new();
        let mut at = node;
        while at != root {
            let e = parent[at];
            let prev = self.other_end(e, at);
            path.push((e, prev));
            at = prev;
        }
        path.reverse();
        path
    }

    fn close_cycle(&self, root: usize, u: usize, w: usize, e: usize, parent: &[usize]) -> Option<Cycle> {
        let to_u = self.tree_path(root, u, parent);
        let to_w = self.tree_path(root, w, parent);
        let mut seen = std::collections::HashSet::new();
        seen.insert(root);
        for &(_, from) in to_u.iter().chain(&to_w) {
            if from != root && !seen.insert(from) {
                return None;
            }
        }
        if u != root && !seen.insert(u) {
            return None;
        }
        if w != root && u != w && !seen.insert(w) {
            return None;
        }
        if u == w && u != root {
            return None;
        }
        let mut edges = Vec::new();
        let mut nodes = Vec::new();
        for &(edge, from) in &to_u {
            edges.push(edge);
            nodes.push(from);
        }
        edges.push(e);
        nodes.push(u);
        // back down from w to the root
        let mut at = w;
        for &(edge, from) in to_w.iter().rev() {
            edges.push(edge);
            nodes.push(at);
            at = from;
        }
        Some(Cycle { edges, nodes })
    }
}

/// `nodes >= 2·(d - 2)^{r/2 - 2}` for a graph with average degree `d > 2`
/// and finite girth `r`.
pub fn girth_bound_check(nodes: usize, average_degree: f64, girth: usize) -> Result<bool> {
    if average_degree <= 2.0 || !average_degree.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "average degree must exceed 2, got {average_degree}"
        )));
    }
    let bound = 2.0 * (average_degree - 2.0).powf(girth as f64 / 2.0 - 2.0);
    // allow for rounding in the power
    Ok(nodes as f64 >= bound * (1.0 - 1e-12))
}
