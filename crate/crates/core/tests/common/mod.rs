//! Brute-force oracles shared by the integration tests. None of them call the
//! library code they are used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use threesum_lab::butterfly::{ButterflySpec, EdgeSet};
use threesum_lab::{GroupSpec, ThreeSumInstance};

/// Search over the layered graph from `s` at layer 0 to `t` at the last layer,
/// trying every outgoing edge rather than relying on path uniqueness.
pub fn reachable_search(spec: &ButterflySpec, edges: &EdgeSet, s: u64, t: u64) -> bool {
    let b = spec.degree();
    let mut frontier: BTreeSet<u64> = [s].into_iter().collect();
    for layer in 0..spec.depth() {
        let place = b.pow(layer);
        let mut next = BTreeSet::new();
        for &x in &frontier {
            let base = x - (x / place % b) * place;
            for digit in 0..b {
                let y = base + digit * place;
                let e = spec.edge(layer, x, y).expect("valid butterfly edge");
                if edges.contains(spec, &e) {
                    next.insert(y);
                }
            }
        }
        frontier = next;
    }
    frontier.contains(&t)
}

/// Every pairwise sum, computed from the raw group formula.
pub fn pair_sums(inst: &ThreeSumInstance) -> BTreeSet<u64> {
    let add = |x: u64, y: u64| match inst.group() {
        GroupSpec::Cyclic(m) => ((x as u128 + y as u128) % m as u128) as u64,
        GroupSpec::Xor(_) => x ^ y,
    };
    let mut out = BTreeSet::new();
    for a in inst.a1() {
        for b in inst.a2() {
            out.insert(add(a.0, b.0));
        }
    }
    out
}

/// Disjointness of the data set coded by `mask` (bit `i·B + b`) and the query
/// vector coded base `B` by `vector_index`.
pub fn lsd_disjoint(indices: u64, block_width: u64, mask: u64, vector_index: u64) -> bool {
    let mut rest = vector_index;
    for i in 0..indices {
        let b = rest % block_width;
        rest /= block_width;
        if (mask >> (i * block_width + b)) & 1 == 1 {
            return false;
        }
    }
    true
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
    }
    acc
}

pub fn ceil_log2(x: u128) -> u64 {
    let mut bits = 0;
    while (1u128 << bits) < x {
        bits += 1;
    }
    bits
}

/// Girth of a multigraph by enumerating simple cycles: loops give 1, parallel
/// pairs give 2, and longer cycles are found by extending simple paths from
/// their smallest vertex.
pub fn girth_by_enumeration(nodes: usize, edges: &[(usize, usize)]) -> Option<usize> {
    if edges.iter().any(|&(u, v)| u == v) {
        return Some(1);
    }
    let mut pairs = BTreeSet::new();
    for &(u, v) in edges {
        if !pairs.insert((u.min(v), u.max(v))) {
            return Some(2);
        }
    }
    let mut adj = vec![Vec::new(); nodes];
    for &(u, v) in &pairs {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut best = None;
    for start in 0..nodes {
        let mut path = vec![start];
        let mut on_path = vec![false; nodes];
        on_path[start] = true;
        extend(&adj, start, &mut path, &mut on_path, &mut best);
    }
    best
}

fn extend(adj: &[Vec<usize>], start: usize, path: &mut Vec<usize>, on_path: &mut [bool], best: &mut Option<usize>) {
    let last = *path.last().unwrap();
    for &next in &adj[last] {
        if next == start && path.len() >= 3 {
            let len = path.len();
            if best.is_none_or(|b| len < b) {
                *best = Some(len);
            }
        } else if next > start && !on_path[next] {
            path.push(next);
            on_path[next] = true;
            extend(adj, start, path, on_path, best);
            on_path[next] = false;
            path.pop();
        }
    }
}
