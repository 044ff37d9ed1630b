//! Butterfly reachability as 3SUM-Indexing.
//!
//! Every edge `e_k(i, j)` of the full butterfly becomes one element of `A1`
//! whose digits are
//!
//! ```text
//! (k, [e in E], i[d-1..k], 0^k, 0^(d-k-1), j[k..0], 0, 0)
//! ```
//!
//! and `A2` holds, for each layer `k`, every element
//! `(-k, 0, 0^(d-k), *^k, *^(d-k-1), 0^(k+1), *, *)`. The query for `(s, t)`
//! is `(0, 0, s[d-1..0], t[d-1..0], 0, 0)`; it is a pair sum iff some edge
//! of the `s -> t` path is missing from `E`.
//!
//! In the cyclic group the digits form a mixed-radix number with radices
//! `(4d, 3, B, ..., B)`. In the XOR group (powers of two only) every digit is
//! a binary field, the presence digit gets one bit, and `-k` is written as `k`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::butterfly::{ButterflyEdge, ButterflySpec, EdgeSet};
use crate::error::{Error, Result};
use crate::group::{xor_pack, xor_unpack, xor_width, GroupElement, GroupSpec, MixedRadixLayout};
use crate::threesum::ThreeSumInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Cyclic,
    Xor,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::Cyclic => "cyclic",
            GroupKind::Xor => "xor",
        })
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cyclic" => Ok(GroupKind::Cyclic),
            "xor" => Ok(GroupKind::Xor),
            other => Err(Error::InvalidParameters(format!("unknown group kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Packing {
    Cyclic(MixedRadixLayout),
    Xor,
}

/// Digit layout and target group for one butterfly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionLayout {
    spec: ButterflySpec,
    kind: GroupKind,
    radices: Vec<u64>,
    packing: Packing,
    group: GroupSpec,
}

impl ReductionLayout {
    pub fn new(spec: ButterflySpec, kind: GroupKind) -> Result<Self> {
        let d = spec.depth() as u64;
        let b = spec.degree();
        let presence_radix = match kind {
            GroupKind::Cyclic => 3,
            GroupKind::Xor => 2,
        };
        let mut radices = vec![4 * d, presence_radix];
        radices.extend(std::iter::repeat_n(b, 2 * spec.depth() as usize + 2));
        let (packing, group) = match kind {
            GroupKind::Cyclic => {
                let mixed = MixedRadixLayout::new(radices.clone())?;
                let group = mixed.group();
                (Packing::Cyclic(mixed), group)
            }
            GroupKind::Xor => {
                // the leading field holds k in ceil(log2 4d) bits, so any d works
                if !b.is_power_of_two() {
                    return Err(Error::InvalidParameters(format!(
                        "the XOR reduction needs B to be a power of two, got B = {b}"
                    )));
                }
                (Packing::Xor, GroupSpec::xor(xor_width(&radices)?)?)
            }
        };
        Ok(ReductionLayout {
            spec,
            kind,
            radices,
            packing,
            group,
        })
    }

    pub fn spec(&self) -> ButterflySpec {
        self.spec
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn radices(&self) -> &[u64] {
        &self.radices
    }

    pub fn digit_count(&self) -> usize {
        self.radices.len()
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    fn depth(&self) -> usize {
        self.spec.depth() as usize
    }

    /// Position of label digit `h` inside the third block.
    fn block3(&self, h: u32) -> usize {
        2 + (self.depth() - 1 - h as usize)
    }

    /// Position of label digit `h` inside the fourth block.
    fn block4(&self, h: u32) -> usize {
        2 + self.depth() + (self.depth() - 1 - h as usize)
    }

    /// Leading digit standing for `-k`.
    fn negated_layer(&self, k: u32) -> u64 {
        let top = self.radices[0];
        match self.kind {
            GroupKind::Cyclic => (top - k as u64) % top,
            GroupKind::Xor => k as u64,
        }
    }

    pub fn pack(&self, digits: &[u64]) -> Result<GroupElement> {
        match &self.packing {
            Packing::Cyclic(mixed) => mixed.encode(digits),
            Packing::Xor => xor_pack(&self.radices, digits),
        }
    }

    pub fn unpack(&self, v: GroupElement) -> Result<Vec<u64>> {
        match &self.packing {
            Packing::Cyclic(mixed) => mixed.decode(v),
            Packing::Xor => xor_unpack(&self.radices, v),
        }
    }

    pub fn edge_digits(&self, e: &ButterflyEdge, present: bool) -> Vec<u64> {
        let mut digits = vec![0; self.digit_count()];
        digits[0] = e.layer as u64;
        digits[1] = present as u64;
        for h in e.layer..self.spec.depth() {
            digits[self.block3(h)] = self.spec.digit(e.source, h);
        }
        for h in 0..=e.layer {
            digits[self.block4(h)] = self.spec.digit(e.target, h);
        }
        digits
    }

    pub fn encode_edge(&self, e: &ButterflyEdge, present: bool) -> Result<GroupElement> {
        self.pack(&self.edge_digits(e, present))
    }

    pub fn build_a1(&self, edges: &EdgeSet) -> Result<Vec<GroupElement>> {
        if edges.spec() != self.spec {
            return Err(Error::InvalidButterfly("edge set belongs to a different butterfly".into()));
        }
        self.spec
            .all_edges()
            .iter()
            .map(|e| self.encode_edge(e, edges.contains(&self.spec, e)))
            .collect()
    }

    /// Digit positions left free for layer `k` in `A2`, most significant first.
    fn wildcard_positions(&self, k: u32) -> Vec<usize> {
        let d = self.spec.depth();
        let mut free: Vec<usize> = (0..k).map(|h| self.block3(h)).collect();
        free.extend(((k + 1)..d).map(|h| self.block4(h)));
        free.push(self.digit_count() - 2);
        free.push(self.digit_count() - 1);
        free.sort_unstable();
        free
    }

    pub fn build_a2(&self) -> Result<Vec<GroupElement>> {
        let b = self.spec.degree();
        let mut out = Vec::with_capacity(self.spec.edge_count() as usize);
        for k in 0..self.spec.depth() {
            let free = self.wildcard_positions(k);
            let mut digits = vec![0; self.digit_count()];
            digits[0] = self.negated_layer(k);
            // odometer over the wildcard digits, lexicographic order
            loop {
                out.push(self.pack(&digits)?);
                let mut advanced = false;
                for &pos in free.iter().rev() {
                    if digits[pos] + 1 < b {
                        digits[pos] += 1;
                        advanced = true;
                        break;
                    }
                    digits[pos] = 0;
                }
                if !advanced {
                    break;
                }
            }
        }
        Ok(out)
    }

    pub fn query_digits(&self, s: u64, t: u64) -> Vec<u64> {
        let mut digits = vec![0; self.digit_count()];
        for h in 0..self.spec.depth() {
            digits[self.block3(h)] = self.spec.digit(s, h);
            digits[self.block4(h)] = self.spec.digit(t, h);
        }
        digits
    }

    pub fn encode_query(&self, s: u64, t: u64) -> Result<GroupElement> {
        self.spec.check_label(s)?;
        self.spec.check_label(t)?;
        self.pack(&self.query_digits(s, t))
    }
}

/// A reduced instance together with the layout that translates queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ButterflyReduction {
    layout: ReductionLayout,
    instance: ThreeSumInstance,
}

impl ButterflyReduction {
    pub fn layout(&self) -> &ReductionLayout {
        &self.layout
    }

    pub fn instance(&self) -> &ThreeSumInstance {
        &self.instance
    }

    pub fn query(&self, s: u64, t: u64) -> Result<GroupElement> {
        self.layout.encode_query(s, t)
    }

    /// `true` iff the query is a pair sum, i.e. `(s, t)` is NOT reachable.
    pub fn answer(&self, s: u64, t: u64) -> Result<bool> {
        self.instance.brute_force_answer(self.query(s, t)?)
    }

    /// Answers for all `(s, t)`, row-major by `s`.
    pub fn answer_table(&self) -> Result<Vec<bool>> {
        let nodes = self.layout.spec.nodes_per_layer();
        let truth = self.instance.sumset();
        let mut out = Vec::with_capacity((nodes * nodes) as usize);
        for s in 0..nodes {
            for t in 0..nodes {
                out.push(truth.contains(&self.query(s, t)?));
            }
        }
        Ok(out)
    }

    /// Digit-level audit of every pair `(a1, a2)` whose sum has leading digit 0.
    pub fn audit(&self) -> Result<DigitAudit> {
        let layout = &self.layout;
        let group = self.instance.group();
        let top = layout.radices[0];
        let a1: Vec<Vec<u64>> = self.instance.a1().iter().map(|&x| layout.unpack(x)).collect::<Result<_>>()?;
        let a2: Vec<Vec<u64>> = self.instance.a2().iter().map(|&y| layout.unpack(y)).collect::<Result<_>>()?;
        let mut audit = DigitAudit::default();
        for (&x, dx) in self.instance.a1().iter().zip(&a1) {
            for (&y, dy) in self.instance.a2().iter().zip(&a2) {
                audit.pairs_checked += 1;
                let sum = layout.unpack(group.add(x, y)?)?;
                if sum[0] != 0 {
                    continue;
                }
                audit.aligned_pairs += 1;
                if dy[0] != layout.negated_layer(dx[0] as u32) {
                    audit.top_digit_violations += 1;
                }
                let lower_ok = match layout.kind {
                    GroupKind::Cyclic => {
                        let lead = dx[0] + dy[0];
                        (lead == 0 || lead == top)
                            && (1..layout.digit_count()).all(|p| {
                                dx[p] + dy[p] < layout.radices[p] && sum[p] == dx[p] + dy[p]
                            })
                    }
                    GroupKind::Xor => (1..layout.digit_count())
                        .all(|p| (dx[p] == 0 || dy[p] == 0) && sum[p] == dx[p] + dy[p]),
                };
                if !lower_ok {
                    audit.carry_violations += 1;
                }
            }
        }
        Ok(audit)
    }
}

/// Counts from [`ButterflyReduction::audit`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitAudit {
    pub pairs_checked: u64,
    /// Pairs whose sum has leading digit 0.
    pub aligned_pairs: u64,
    pub carry_violations: u64,
    pub top_digit_violations: u64,
}

impl DigitAudit {
    pub fn violations(&self) -> u64 {
        self.carry_violations + self.top_digit_violations
    }
}

pub fn reduce(spec: ButterflySpec, edges: &EdgeSet, kind: GroupKind) -> Result<ButterflyReduction> {
    let layout = ReductionLayout::new(spec, kind)?;
    let a1 = layout.build_a1(edges)?;
    let a2 = layout.build_a2()?;
    let instance = match ThreeSumInstance::new(layout.group(), a1, a2) {
        Ok(inst) => inst,
        Err(Error::DuplicateElement(v)) => {
            panic!("butterfly encoding produced duplicate element {v}")
        }
        Err(e) => return Err(e),
    };
    Ok(ButterflyReduction { layout, instance })
}

/// `max(2, ceil(S·w²/n))`.
pub fn suggested_degree(cells: u64, word_bits: u64, n: u64) -> Result<u64> {
    if cells == 0 || word_bits == 0 || n == 0 {
        return Err(Error::InvalidParameters("S, w and n must be positive".into()));
    }
    let num = cells as u128 * word_bits as u128 * word_bits as u128;
    let b = num.div_ceil(n as u128);
    Ok(b.clamp(2, u64::MAX as u128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout22() -> ReductionLayout {
        ReductionLayout::new(ButterflySpec::new(2, 2).unwrap(), GroupKind::Cyclic).unwrap()
    }

    #[test]
    fn layout_shape() {
        let l = layout22();
        assert_eq!(l.radices(), &[8, 3, 2, 2, 2, 2, 2, 2]);
        assert_eq!(l.digit_count(), 2 * (2 + 2));
        assert_eq!(l.group(), GroupSpec::Cyclic(12 * 2 * 2u64.pow(6)));
        let x = ReductionLayout::new(ButterflySpec::new(2, 2).unwrap(), GroupKind::Xor).unwrap();
        assert_eq!(x.radices(), &[8, 2, 2, 2, 2, 2, 2, 2]);
        assert_eq!(x.group(), GroupSpec::Xor(3 + 1 + 6));
    }

    #[test]
    fn xor_needs_powers_of_two() {
        assert!(ReductionLayout::new(ButterflySpec::new(3, 1).unwrap(), GroupKind::Xor).is_err());
        assert!(ReductionLayout::new(ButterflySpec::new(6, 2).unwrap(), GroupKind::Xor).is_err());
        assert!(ReductionLayout::new(ButterflySpec::new(2, 3).unwrap(), GroupKind::Xor).is_ok());
        assert!(ReductionLayout::new(ButterflySpec::new(4, 2).unwrap(), GroupKind::Xor).is_ok());
    }

    #[test]
    fn edge_encoding_examples() {
        let l = layout22();
        let e = l.spec().edge(0, 0, 1).unwrap();
        assert_eq!(l.edge_digits(&e, true), vec![0, 1, 0, 0, 0, 1, 0, 0]);
        assert_eq!(l.encode_edge(&e, true).unwrap(), GroupElement(68));
        assert_eq!(l.encode_edge(&e, false).unwrap(), GroupElement(4));
    }

    #[test]
    fn last_layer_edge_uses_one_source_digit() {
        let l = layout22();
        // e_1(01 -> 11): block 3 keeps only i[1] = 0, block 4 holds all of j
        let e = l.spec().edge(1, 0b01, 0b11).unwrap();
        assert_eq!(l.edge_digits(&e, true), vec![1, 1, 0, 0, 1, 1, 0, 0]);
    }

    #[test]
    fn query_examples() {
        let l = layout22();
        assert_eq!(l.encode_query(0, 0).unwrap(), GroupElement(0));
        assert_eq!(l.query_digits(3, 3), vec![0, 0, 1, 1, 1, 1, 0, 0]);
        assert_eq!(l.encode_query(3, 3).unwrap(), GroupElement(60));
        assert!(l.encode_query(4, 0).is_err());
    }

    #[test]
    fn a1_sizes_and_presence_isolation() {
        let l = layout22();
        let spec = l.spec();
        let full = l.build_a1(&EdgeSet::full(spec)).unwrap();
        let empty = l.build_a1(&EdgeSet::empty(spec)).unwrap();
        assert_eq!(full.len(), 16);
        let mut distinct = full.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 16);
        for (a, b) in full.iter().zip(&empty) {
            let (da, db) = (l.unpack(*a).unwrap(), l.unpack(*b).unwrap());
            assert_eq!(da[1], 1);
            assert_eq!(db[1], 0);
            assert_eq!(da[0], db[0]);
            assert_eq!(da[2..], db[2..]);
        }
    }

    #[test]
    fn a2_shape() {
        let l = layout22();
        let a2 = l.build_a2().unwrap();
        assert_eq!(a2.len(), 16);
        for (idx, v) in a2.iter().enumerate() {
            let digits = l.unpack(*v).unwrap();
            assert!(digits[0] == 0 || digits[0] == 7);
            assert_eq!(digits[1], 0);
            if idx < 8 {
                // k = 0: block 3 all zero, one trailing zero in block 4
                assert_eq!(digits[0], 0);
                assert_eq!(&digits[2..4], &[0, 0]);
                assert_eq!(digits[5], 0);
            }
        }
        let mut distinct = a2.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 16);
    }

    #[test]
    fn a2_leading_digits_are_negated_layers() {
        let spec = ButterflySpec::new(2, 3).unwrap();
        let l = ReductionLayout::new(spec, GroupKind::Cyclic).unwrap();
        let d = 3u64;
        for v in l.build_a2().unwrap() {
            let lead = l.unpack(v).unwrap()[0];
            assert!(lead == 0 || (3 * d + 1..4 * d).contains(&lead), "{lead}");
        }
    }

    #[test]
    fn single_missing_edge_answers() {
        let spec = ButterflySpec::new(2, 2).unwrap();
        let mut edges = EdgeSet::full(spec);
        edges.set(&spec.edge(0, 0, 1).unwrap(), false);
        for kind in [GroupKind::Cyclic, GroupKind::Xor] {
            let r = reduce(spec, &edges, kind).unwrap();
            for s in 0..4 {
                for t in 0..4 {
                    let expect = matches!((s, t), (0, 1) | (0, 3));
                    assert_eq!(r.answer(s, t).unwrap(), expect, "{kind} ({s},{t})");
                }
            }
        }
    }

    #[test]
    fn full_graph_answers_no() {
        let spec = ButterflySpec::new(2, 2).unwrap();
        let r = reduce(spec, &EdgeSet::full(spec), GroupKind::Cyclic).unwrap();
        assert!(r.answer_table().unwrap().iter().all(|&a| !a));
    }

    #[test]
    fn audit_on_small_instance() {
        let spec = ButterflySpec::new(2, 2).unwrap();
        for kind in [GroupKind::Cyclic, GroupKind::Xor] {
            let r = reduce(spec, &spec.random_edge_subset(0.5, 3).unwrap(), kind).unwrap();
            let audit = r.audit().unwrap();
            assert_eq!(audit.pairs_checked, 256);
            assert!(audit.aligned_pairs > 0);
            assert_eq!(audit.violations(), 0, "{kind}: {audit:?}");
        }
    }

    #[test]
    fn suggested_degree_examples() {
        assert_eq!(suggested_degree(1024, 16, 4096).unwrap(), 64);
        assert_eq!(suggested_degree(4096, 1, 4096).unwrap(), 2);
        assert!(suggested_degree(0, 1, 1).is_err());
        let mut last = 0;
        for s in 1..200 {
            let b = suggested_degree(s, 4, 37).unwrap();
            assert!(b >= last);
            last = b;
        }
    }
}
