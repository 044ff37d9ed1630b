//! Non-adaptive 2-bit-probe schemes: truth-table classification, the probe
//! graph, structural weaknesses, and refutation certificates checked by
//! exhaustive enumeration over the cells the weakness touches.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{construct_input, group_size_bound, PatternTarget};
use crate::error::{Error, Result};
use crate::graph::Multigraph;
use crate::group::{GroupElement, GroupSpec};
use crate::threesum::{NonAdaptiveScheme, ThreeSumInstance};

// Truth tables are indexed by 2·first + second.
pub const TABLE_AND: u8 = 0b1000;
pub const TABLE_OR: u8 = 0b1110;
pub const TABLE_XOR: u8 = 0b0110;
pub const TABLE_XNOR: u8 = 0b1001;
pub const TABLE_COPY_FIRST: u8 = 0b1100;
pub const TABLE_COPY_SECOND: u8 = 0b1010;
pub const TABLE_NOT_FIRST: u8 = 0b0011;
pub const TABLE_NOT_SECOND: u8 = 0b0101;
pub const TABLE_ZERO: u8 = 0;
pub const TABLE_ONE: u8 = 0b1111;

/// Largest cell set a certificate may enumerate.
pub const MAX_CERTIFICATE_CELLS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionType {
    Copy,
    Constant,
    AndType,
    XorType,
}

/// Category of a two-input truth table. Panics if `table >= 16`.
pub fn classify(table: u8) -> FunctionType {
    assert!(table < 16, "truth table {table} has more than 4 bits");
    match table {
        TABLE_ZERO | TABLE_ONE => FunctionType::Constant,
        TABLE_XOR | TABLE_XNOR => FunctionType::XorType,
        TABLE_COPY_FIRST | TABLE_NOT_FIRST | TABLE_COPY_SECOND | TABLE_NOT_SECOND => FunctionType::Copy,
        _ => FunctionType::AndType,
    }
}

/// For a Copy table, which probe it reads: 0 for the first, 1 for the second.
pub fn copy_reads(table: u8) -> Option<usize> {
    match table {
        TABLE_COPY_FIRST | TABLE_NOT_FIRST => Some(0),
        TABLE_COPY_SECOND | TABLE_NOT_SECOND => Some(1),
        _ => None,
    }
}

fn eval(table: u8, first: bool, second: bool) -> bool {
    (table >> (2 * first as u8 + second as u8)) & 1 == 1
}

/// A [`NonAdaptiveScheme`] with exactly two probes per query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NonAdaptiveScheme", into = "NonAdaptiveScheme")]
pub struct TwoProbeScheme {
    inner: NonAdaptiveScheme,
}

impl TryFrom<NonAdaptiveScheme> for TwoProbeScheme {
    type Error = Error;

    fn try_from(inner: NonAdaptiveScheme) -> Result<Self> {
        if inner.probes_per_query() != 2 {
            return Err(Error::InvalidScheme(format!(
                "expected 2 probes per query, got {}",
                inner.probes_per_query()
            )));
        }
        Ok(TwoProbeScheme { inner })
    }
}

impl From<TwoProbeScheme> for NonAdaptiveScheme {
    fn from(s: TwoProbeScheme) -> Self {
        s.inner
    }
}

impl TwoProbeScheme {
    pub fn new(cells: u64, probes: Vec<(u64, u64)>, tables: Vec<u8>) -> Result<Self> {
        let probes = probes.into_iter().map(|(u, v)| vec![u, v]).collect();
        let tables = tables.into_iter().map(u64::from).collect();
        NonAdaptiveScheme::new(cells, 2, probes, tables)?.try_into()
    }

    pub fn scheme(&self) -> &NonAdaptiveScheme {
        &self.inner
    }

    pub fn cells(&self) -> u64 {
        self.inner.cells()
    }

    pub fn queries(&self) -> u64 {
        self.inner.queries()
    }

    pub fn probes(&self, z: GroupElement) -> (u64, u64) {
        let p = self.inner.probes(z);
        (p[0], p[1])
    }

    pub fn table(&self, z: GroupElement) -> u8 {
        self.inner.table(z) as u8
    }

    pub fn answer_with(&self, z: GroupElement, mut bit: impl FnMut(u64) -> bool) -> bool {
        let (u, v) = self.probes(z);
        eval(self.table(z), bit(u), bit(v))
    }
}

/// Uniformly random probes and tables for every element of `group`.
pub fn random_scheme(group: GroupSpec, cells: u64, seed: u64) -> Result<TwoProbeScheme> {
    if cells == 0 {
        return Err(Error::InvalidParameters("a scheme needs at least one cell".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = group.cardinality() as usize;
    let mut probes = Vec::with_capacity(q);
    let mut tables = Vec::with_capacity(q);
    for _ in 0..q {
        probes.push((rng.gen_range(0..cells), rng.gen_range(0..cells)));
        tables.push(rng.gen_range(0..16u8));
    }
    TwoProbeScheme::new(cells, probes, tables)
}

/// The sumset bit vector as a scheme: query `g` reads cell `g` twice.
pub fn bitvector_scheme(group: GroupSpec) -> Result<TwoProbeScheme> {
    let q = group.cardinality();
    TwoProbeScheme::new(
        q,
        (0..q).map(|g| (g, g)).collect(),
        vec![TABLE_COPY_FIRST; q as usize],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeEdge {
    pub query: GroupElement,
    pub first: u64,
    pub second: u64,
    pub table: u8,
    pub kind: FunctionType,
}

impl ProbeEdge {
    pub fn is_loop(&self) -> bool {
        self.first == self.second
    }

    fn pair(&self) -> (u64, u64) {
        (self.first.min(self.second), self.first.max(self.second))
    }
}

/// One node per cell, one edge per query element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeGraph {
    nodes: u64,
    edges: Vec<ProbeEdge>,
}

impl ProbeGraph {
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    pub fn edges(&self) -> &[ProbeEdge] {
        &self.edges
    }

    /// The subgraph of edges accepted by `keep`, with a map back to edges.
    pub fn multigraph(&self, keep: impl Fn(&ProbeEdge) -> bool) -> (Multigraph, Vec<usize>) {
        let mut ids = Vec::new();
        let mut pairs = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if keep(e) {
                ids.push(i);
                pairs.push((e.first as usize, e.second as usize));
            }
        }
        let graph = Multigraph::new(self.nodes as usize, pairs).expect("probes are below the cell count");
        (graph, ids)
    }
}

pub fn build_graph(scheme: &TwoProbeScheme, group: &GroupSpec) -> Result<ProbeGraph> {
    scheme.scheme().check_group(group)?;
    let edges = group
        .elements()
        .map(|g| {
            let (first, second) = scheme.probes(g);
            let table = scheme.table(g);
            ProbeEdge {
                query: g,
                first,
                second,
                table,
                kind: classify(table),
            }
        })
        .collect();
    Ok(ProbeGraph {
        nodes: scheme.cells(),
        edges,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weakness {
    ConstantEdge { query: GroupElement },
    TripleParallel { queries: [GroupElement; 3] },
    CopyFan { node: u64, queries: [GroupElement; 2] },
    /// Edges in traversal order; consecutive edges share a node and the last
    /// closes back to the first.
    MonochromaticCycle { function: FunctionType, queries: Vec<GroupElement> },
}

impl Weakness {
    pub fn queries(&self) -> Vec<GroupElement> {
        match self {
            Weakness::ConstantEdge { query } => vec![*query],
            Weakness::TripleParallel { queries } => queries.to_vec(),
            Weakness::CopyFan { queries, .. } => queries.to_vec(),
            Weakness::MonochromaticCycle { queries, .. } => queries.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Weakness::ConstantEdge { .. } => "constant_edge",
            Weakness::TripleParallel { .. } => "triple_parallel",
            Weakness::CopyFan { .. } => "copy_fan",
            Weakness::MonochromaticCycle { .. } => "monochromatic_cycle",
        }
    }
}

/// Shortest cycle among edges of one function type, if any.
pub fn monochromatic_cycle(graph: &ProbeGraph, function: FunctionType) -> Option<Weakness> {
    // an AND-type self-loop reads one bit twice and constrains nothing
    let skip_loops = function == FunctionType::AndType;
    let (sub, ids) = graph.multigraph(|e| e.kind == function && !(skip_loops && e.is_loop()));
    let cycle = sub.shortest_cycle()?;
    Some(Weakness::MonochromaticCycle {
        function,
        queries: cycle.edges.iter().map(|&i| graph.edges[ids[i]].query).collect(),
    })
}

/// First weakness in the fixed order: constant edge, three parallel edges,
/// copy fan, AND-type cycle, XOR-type cycle.
pub fn find_weakness(scheme: &TwoProbeScheme, group: &GroupSpec) -> Result<Weakness> {
    let graph = build_graph(scheme, group)?;
    if let Some(e) = graph.edges.iter().find(|e| e.kind == FunctionType::Constant) {
        return Ok(Weakness::ConstantEdge { query: e.query });
    }

    let mut by_pair: HashMap<(u64, u64), Vec<GroupElement>> = HashMap::new();
    for e in &graph.edges {
        let seen = by_pair.entry(e.pair()).or_default();
        seen.push(e.query);
        if seen.len() == 3 {
            return Ok(Weakness::TripleParallel {
                queries: [seen[0], seen[1], seen[2]],
            });
        }
    }

    let mut readers: HashMap<u64, GroupElement> = HashMap::new();
    for e in &graph.edges {
        let Some(side) = copy_reads(e.table) else { continue };
        let node = if side == 0 { e.first } else { e.second };
        match readers.get(&node) {
            Some(&earlier) => {
                return Ok(Weakness::CopyFan {
                    node,
                    queries: [earlier, e.query],
                })
            }
            None => {
                readers.insert(node, e.query);
            }
        }
    }

    [FunctionType::AndType, FunctionType::XorType]
        .into_iter()
        .find_map(|f| monochromatic_cycle(&graph, f))
        .ok_or(Error::NoWeaknessFound)
}

/// Queries, the cells they read, an answer pattern no memory can produce on
/// those cells, and an input whose true answers are that pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefutationCertificate {
    pub queries: Vec<u64>,
    pub cells: Vec<u64>,
    pub pattern: Vec<u8>,
    pub witness: ThreeSumInstance,
    pub n: usize,
}

fn cell_union(scheme: &TwoProbeScheme, queries: &[GroupElement]) -> Vec<u64> {
    let mut cells: Vec<u64> = queries
        .iter()
        .flat_map(|&q| {
            let (u, v) = scheme.probes(q);
            [u, v]
        })
        .collect();
    cells.sort_unstable();
    cells.dedup();
    cells
}

/// Answer pattern of `queries` (bit `i` for `queries[i]`) when cell
/// `cells[j]` holds bit `j` of `assignment`.
fn pattern_under(scheme: &TwoProbeScheme, queries: &[GroupElement], cells: &[u64], assignment: u64) -> u64 {
    let bit = |c: u64| {
        let j = cells.binary_search(&c).expect("probe inside the cell set");
        (assignment >> j) & 1 == 1
    };
    queries
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &q)| acc | (scheme.answer_with(q, bit) as u64) << i)
}

/// Every answer pattern on `queries` reachable by some assignment to the
/// cells they read, as a membership table indexed by pattern mask.
pub fn achievable_patterns(scheme: &TwoProbeScheme, queries: &[GroupElement]) -> Result<Vec<bool>> {
    let cells = cell_union(scheme, queries);
    if cells.len() > MAX_CERTIFICATE_CELLS || queries.len() > MAX_CERTIFICATE_CELLS {
        return Err(Error::CertificateTooLarge(format!(
            "{} queries over {} cells; at most {MAX_CERTIFICATE_CELLS} supported",
            queries.len(),
            cells.len()
        )));
    }
    let mut seen = vec![false; 1 << queries.len()];
    for assignment in 0..1u64 << cells.len() {
        seen[pattern_under(scheme, queries, &cells, assignment) as usize] = true;
    }
    Ok(seen)
}

pub fn build_certificate(scheme: &TwoProbeScheme, group: &GroupSpec, weakness: &Weakness) -> Result<RefutationCertificate> {
    build_certificate_seeded(scheme, group, weakness, 0)
}

/// As [`build_certificate`], with `seed` driving the witness construction.
pub fn build_certificate_seeded(
    scheme: &TwoProbeScheme,
    group: &GroupSpec,
    weakness: &Weakness,
    seed: u64,
) -> Result<RefutationCertificate> {
    scheme.scheme().check_group(group)?;
    let queries = weakness.queries();
    for &q in &queries {
        group.check(q)?;
    }
    let n = queries.len().max(1);
    let bound = group_size_bound(n);
    if group.cardinality() <= bound {
        return Err(Error::GroupTooSmall {
            cardinality: group.cardinality(),
            n,
            bound,
        });
    }
    let achievable = achievable_patterns(scheme, &queries)?;
    let mask = achievable.iter().position(|&a| !a).ok_or(Error::AchievableSetFull)? as u64;
    let target = PatternTarget::from_mask(queries.clone(), mask)?;
    let witness = construct_input(*group, &target, n, seed)?;
    Ok(RefutationCertificate {
        queries: queries.iter().map(|q| q.0).collect(),
        cells: cell_union(scheme, &queries),
        pattern: (0..queries.len()).map(|i| ((mask >> i) & 1) as u8).collect(),
        witness,
        n,
    })
}

/// Checks that every probe of the certificate's queries lies in its cells,
/// that the pattern is the witness's true answer, and that no assignment to
/// the cells produces the pattern. Malformed certificates are rejected.
pub fn verify_certificate(scheme: &TwoProbeScheme, group: &GroupSpec, cert: &RefutationCertificate) -> bool {
    if scheme.scheme().check_group(group).is_err() || cert.witness.group() != *group {
        return false;
    }
    let k = cert.queries.len();
    if k == 0 || cert.pattern.len() != k || cert.n != cert.witness.n() {
        return false;
    }
    if k > MAX_CERTIFICATE_CELLS || cert.cells.len() > MAX_CERTIFICATE_CELLS {
        return false;
    }
    if cert.pattern.iter().any(|&b| b > 1) {
        return false;
    }
    let mut cells = cert.cells.clone();
    cells.sort_unstable();
    cells.dedup();
    if cells.len() != cert.cells.len() || cells.iter().any(|&c| c >= scheme.cells()) {
        return false;
    }
    let mut queries = Vec::with_capacity(k);
    for &q in &cert.queries {
        if q >= group.cardinality() || queries.contains(&GroupElement(q)) {
            return false;
        }
        queries.push(GroupElement(q));
    }

    // (i) probes stay inside the cell set
    let inside = queries.iter().all(|&q| {
        let (u, v) = scheme.probes(q);
        cells.binary_search(&u).is_ok() && cells.binary_search(&v).is_ok()
    });
    if !inside {
        return false;
    }

    // (ii) the pattern is the witness's true answer
    let sums = cert.witness.sumset();
    if queries.iter().zip(&cert.pattern).any(|(q, &p)| sums.contains(q) != (p == 1)) {
        return false;
    }

    // (iii) no assignment to the cells produces it
    let mask = cert
        .pattern
        .iter()
        .enumerate()
        .fold(0u64, |m, (i, &p)| m | (p as u64) << i);
    (0..1u64 << cells.len()).all(|a| pattern_under(scheme, &queries, &cells, a) != mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: u64) -> GroupSpec {
        GroupSpec::cyclic(n).unwrap()
    }

    #[test]
    fn classification_counts() {
        let mut counts = HashMap::new();
        for t in 0..16 {
            *counts.entry(classify(t)).or_insert(0) += 1;
        }
        assert_eq!(counts[&FunctionType::Copy], 4);
        assert_eq!(counts[&FunctionType::Constant], 2);
        assert_eq!(counts[&FunctionType::AndType], 8);
        assert_eq!(counts[&FunctionType::XorType], 2);
    }

    #[test]
    fn reference_tables() {
        for (x, y) in [(false, false), (false, true), (true, false), (true, true)] {
            assert_eq!(eval(TABLE_AND, x, y), x && y);
            assert_eq!(eval(TABLE_OR, x, y), x || y);
            assert_eq!(eval(TABLE_XOR, x, y), x ^ y);
            assert_eq!(eval(TABLE_COPY_FIRST, x, y), x);
            assert_eq!(eval(TABLE_COPY_SECOND, x, y), y);
            assert_eq!(eval(TABLE_NOT_SECOND, x, y), !y);
        }
        assert_eq!(classify(TABLE_AND), FunctionType::AndType);
        assert_eq!(classify(TABLE_XOR), FunctionType::XorType);
        assert_eq!(classify(TABLE_COPY_FIRST), FunctionType::Copy);
        assert_eq!(classify(TABLE_ZERO), FunctionType::Constant);
    }

    #[test]
    fn graph_shapes() {
        let s = random_scheme(g(8), 4, 1).unwrap();
        let graph = build_graph(&s, &g(8)).unwrap();
        assert_eq!((graph.nodes(), graph.edges().len()), (4, 8));
        let bv = bitvector_scheme(g(8)).unwrap();
        assert!(build_graph(&bv, &g(8)).unwrap().edges().iter().all(|e| e.is_loop()));
        assert!(build_graph(&bv, &g(9)).is_err());
    }

    /// Scheme on `|G|` queries where the listed ones get the given edges and
    /// every other query gets a private copy self-loop.
    fn scheme_with(group: u64, cells: u64, special: &[(u64, u64, u64, u8)]) -> TwoProbeScheme {
        let mut probes: Vec<(u64, u64)> = (0..group).map(|q| (q + 8, q + 8)).collect();
        let mut tables = vec![TABLE_COPY_FIRST; group as usize];
        for &(q, u, v, t) in special {
            probes[q as usize] = (u, v);
            tables[q as usize] = t;
        }
        TwoProbeScheme::new(cells, probes, tables).unwrap()
    }

    fn certify(s: &TwoProbeScheme, group: GroupSpec) -> (Weakness, RefutationCertificate) {
        let w = find_weakness(s, &group).unwrap();
        let cert = build_certificate(s, &group, &w).unwrap();
        assert!(verify_certificate(s, &group, &cert), "{w:?}");
        (w, cert)
    }

    #[test]
    fn constant_edge() {
        let group = g(41);
        let s = scheme_with(41, 60, &[(3, 0, 1, TABLE_ZERO)]);
        let (w, cert) = certify(&s, group);
        assert_eq!(w, Weakness::ConstantEdge { query: GroupElement(3) });
        assert_eq!(cert.pattern, vec![1]);
    }

    #[test]
    fn triple_parallel() {
        let group = g(41);
        let s = scheme_with(41, 60, &[(1, 0, 1, TABLE_AND), (2, 1, 0, TABLE_OR), (4, 0, 1, TABLE_XOR)]);
        let (w, cert) = certify(&s, group);
        assert_eq!(w.name(), "triple_parallel");
        let achievable = achievable_patterns(&s, &w.queries()).unwrap();
        assert!(achievable.iter().filter(|&&a| a).count() <= 4);
        assert_eq!(cert.cells, vec![0, 1]);
    }

    #[test]
    fn triple_parallel_patterns() {
        let s = scheme_with(41, 60, &[(1, 0, 1, TABLE_AND), (2, 0, 1, TABLE_OR), (4, 0, 1, TABLE_XOR)]);
        let q = [GroupElement(1), GroupElement(2), GroupElement(4)];
        let achievable = achievable_patterns(&s, &q).unwrap();
        // masks: bit0 AND, bit1 OR, bit2 XOR
        let expected = [0b000, 0b110, 0b011];
        for (m, &a) in achievable.iter().enumerate() {
            assert_eq!(a, expected.contains(&m), "{m:03b}");
        }
        assert!(!achievable[0b001]);
    }

    #[test]
    fn copy_fan() {
        let group = g(41);
        let s = scheme_with(41, 60, &[(5, 0, 1, TABLE_COPY_FIRST), (6, 2, 0, TABLE_NOT_SECOND)]);
        let (w, _) = certify(&s, group);
        assert_eq!(
            w,
            Weakness::CopyFan {
                node: 0,
                queries: [GroupElement(5), GroupElement(6)]
            }
        );
    }

    #[test]
    fn xor_triangle() {
        let group = g(41);
        let s = scheme_with(41, 60, &[(0, 0, 1, TABLE_XOR), (1, 1, 2, TABLE_XOR), (2, 2, 0, TABLE_XOR)]);
        let (w, cert) = certify(&s, group);
        match &w {
            Weakness::MonochromaticCycle { function, queries } => {
                assert_eq!(*function, FunctionType::XorType);
                assert_eq!(queries.len(), 3);
            }
            other => panic!("{other:?}"),
        }
        let parity = cert.pattern.iter().fold(0, |a, &b| a ^ b);
        assert_eq!(parity, 1);
    }

    #[test]
    fn and_square() {
        let group = g(61);
        let s = scheme_with(
            61,
            70,
            &[(0, 0, 1, TABLE_AND), (1, 1, 2, TABLE_OR), (2, 2, 3, 0b0100), (3, 3, 0, TABLE_AND)],
        );
        let (w, _) = certify(&s, group);
        assert_eq!(w.queries().len(), 4);
    }

    #[test]
    fn bitvector_has_no_weakness() {
        let group = g(64);
        let s = bitvector_scheme(group).unwrap();
        assert_eq!(find_weakness(&s, &group), Err(Error::NoWeaknessFound));
        let fake = Weakness::ConstantEdge { query: GroupElement(7) };
        assert_eq!(build_certificate(&s, &group, &fake), Err(Error::AchievableSetFull));
        let witness = ThreeSumInstance::from_values(group, &[3], &[4]).unwrap();
        let claim = RefutationCertificate {
            queries: vec![7],
            cells: vec![7],
            pattern: vec![1],
            witness,
            n: 1,
        };
        assert!(!verify_certificate(&s, &group, &claim));
    }

    #[test]
    fn tampering_detected() {
        let group = g(41);
        let s = scheme_with(41, 60, &[(0, 0, 1, TABLE_XOR), (1, 1, 2, TABLE_XOR), (2, 2, 0, TABLE_XOR)]);
        let (_, cert) = certify(&s, group);
        let mut flipped = cert.clone();
        flipped.pattern[0] ^= 1;
        assert!(!verify_certificate(&s, &group, &flipped));
        let mut shrunk = cert.clone();
        shrunk.cells.pop();
        assert!(!verify_certificate(&s, &group, &shrunk));
        let mut wrong_n = cert.clone();
        wrong_n.n += 1;
        assert!(!verify_certificate(&s, &group, &wrong_n));
        assert!(!verify_certificate(&s, &g(43), &cert));
    }

    #[test]
    fn certificate_json_round_trip() {
        let group = g(41);
        let s = scheme_with(41, 60, &[(3, 0, 1, TABLE_ONE)]);
        let (_, cert) = certify(&s, group);
        let text = serde_json::to_string(&cert).unwrap();
        let back: RefutationCertificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cert);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["queries", "cells", "pattern", "witness", "n"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn too_small_group() {
        let group = g(4);
        let s = scheme_with(4, 20, &[(0, 0, 1, TABLE_ZERO)]);
        let w = find_weakness(&s, &group).unwrap();
        assert!(matches!(build_certificate(&s, &group, &w), Err(Error::GroupTooSmall { .. })));
    }
}
