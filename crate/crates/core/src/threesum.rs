//! The 3SUM-Indexing problem: instances, the brute-force membership oracle,
//! two baseline data structures with probe accounting, and non-adaptive
//! bit-probe schemes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};

/// Two equal-size sets of group elements. Stored sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct ThreeSumInstance {
    group: GroupSpec,
    a1: Vec<GroupElement>,
    a2: Vec<GroupElement>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    group: GroupSpec,
    a1: Vec<u64>,
    a2: Vec<u64>,
}

impl TryFrom<RawInstance> for ThreeSumInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        ThreeSumInstance::new(
            raw.group,
            raw.a1.into_iter().map(GroupElement).collect(),
            raw.a2.into_iter().map(GroupElement).collect(),
        )
    }
}

impl From<ThreeSumInstance> for RawInstance {
    fn from(inst: ThreeSumInstance) -> Self {
        RawInstance {
            group: inst.group,
            a1: inst.a1.iter().map(|e| e.0).collect(),
            a2: inst.a2.iter().map(|e| e.0).collect(),
        }
    }
}

fn into_set(group: &GroupSpec, items: Vec<GroupElement>) -> Result<Vec<GroupElement>> {
    let mut seen = BTreeSet::new();
    for e in items {
        group.check(e)?;
        if !seen.insert(e) {
            return Err(Error::DuplicateElement(e.0));
        }
    }
    Ok(seen.into_iter().collect())
}

impl ThreeSumInstance {
    pub fn new(group: GroupSpec, a1: Vec<GroupElement>, a2: Vec<GroupElement>) -> Result<Self> {
        let a1 = into_set(&group, a1)?;
        let a2 = into_set(&group, a2)?;
        if a1.len() != a2.len() {
            return Err(Error::InvalidInstance(format!(
                "|A1| = {} differs from |A2| = {}",
                a1.len(),
                a2.len()
            )));
        }
        if a1.is_empty() {
            return Err(Error::InvalidInstance("input sets must be nonempty".into()));
        }
        Ok(ThreeSumInstance { group, a1, a2 })
    }

    pub fn from_values(group: GroupSpec, a1: &[u64], a2: &[u64]) -> Result<Self> {
        Self::new(
            group,
            a1.iter().copied().map(GroupElement).collect(),
            a2.iter().copied().map(GroupElement).collect(),
        )
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn a1(&self) -> &[GroupElement] {
        &self.a1
    }

    pub fn a2(&self) -> &[GroupElement] {
        &self.a2
    }

    /// Common size of the two input sets.
    pub fn n(&self) -> usize {
        self.a1.len()
    }

    /// Ground truth: is `z` a sum `a1 + a2`? Tries each `a1` and looks up
    /// `z - a1` in the sorted `A2`.
    pub fn brute_force_answer(&self, z: GroupElement) -> Result<bool> {
        self.group.check(z)?;
        Ok(self
            .a1
            .iter()
            .any(|&x| self.a2.binary_search(&self.group.sub_unchecked(z, x)).is_ok()))
    }

    pub fn sumset(&self) -> BTreeSet<GroupElement> {
        let mut out = BTreeSet::new();
        for &x in &self.a1 {
            for &y in &self.a2 {
                out.insert(self.group.add_unchecked(x, y));
            }
        }
        out
    }

    /// Answers for every element of the group, indexed by element value.
    pub fn answer_table(&self) -> Vec<bool> {
        let mut table = vec![false; self.group.cardinality() as usize];
        for z in self.sumset() {
            table[z.0 as usize] = true;
        }
        table
    }
}

pub fn brute_force_answer(inst: &ThreeSumInstance, z: GroupElement) -> Result<bool> {
    inst.brute_force_answer(z)
}

pub fn sumset(inst: &ThreeSumInstance) -> BTreeSet<GroupElement> {
    inst.sumset()
}

/// Space/probe accounting for one query call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeBudget {
    pub cells: u64,
    pub word_bits: u32,
    pub probes_made: u64,
    pub cap: Option<u64>,
    /// Cell addresses in probe order.
    pub trace: Vec<u64>,
}

impl ProbeBudget {
    pub fn new(cells: u64, word_bits: u32) -> Self {
        ProbeBudget {
            cells,
            word_bits,
            probes_made: 0,
            cap: None,
            trace: Vec::new(),
        }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = Some(cap);
        self
    }

    /// Records a probe. The counter always advances; exceeding the cap is
    /// reported but the probe is still recorded.
    pub fn probe(&mut self, cell: u64) -> Result<()> {
        if cell >= self.cells {
            return Err(Error::CellOutOfRange {
                index: cell,
                cells: self.cells,
            });
        }
        self.probes_made += 1;
        self.trace.push(cell);
        match self.cap {
            Some(cap) if self.probes_made > cap => Err(Error::ProbeCapExceeded { cap }),
            _ => Ok(()),
        }
    }
}

/// A static data structure in the cell-probe model.
pub trait CellProbeStructure {
    fn group(&self) -> GroupSpec;
    fn cells(&self) -> u64;
    fn word_bits(&self) -> u32;
    /// Worst-case probes of a single query.
    fn max_probes(&self) -> u64;
    /// Content of one cell. Only [`CellProbeStructure::query`] should count
    /// as probing; this is the raw memory view.
    fn cell(&self, index: u64) -> u64;
    fn query(&self, z: GroupElement, budget: &mut ProbeBudget) -> Result<bool>;

    fn budget(&self) -> ProbeBudget {
        ProbeBudget::new(self.cells(), self.word_bits())
    }
}

/// Default upper limit on the number of one-bit cells a bit vector may use.
pub const DEFAULT_MEMORY_CAP: u64 = 1 << 26;

/// One bit per group element, set iff the element is in the sumset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVectorIndex {
    group: GroupSpec,
    bits: Vec<bool>,
}

impl BitVectorIndex {
    pub fn build(inst: &ThreeSumInstance) -> Result<Self> {
        Self::build_with_cap(inst, DEFAULT_MEMORY_CAP)
    }

    pub fn build_with_cap(inst: &ThreeSumInstance, cap: u64) -> Result<Self> {
        let cardinality = inst.group().cardinality();
        if cardinality > cap {
            return Err(Error::MemoryCapExceeded { cardinality, cap });
        }
        Ok(BitVectorIndex {
            group: inst.group(),
            bits: inst.answer_table(),
        })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

impl CellProbeStructure for BitVectorIndex {
    fn group(&self) -> GroupSpec {
        self.group
    }

    fn cells(&self) -> u64 {
        self.bits.len() as u64
    }

    fn word_bits(&self) -> u32 {
        1
    }

    fn max_probes(&self) -> u64 {
        1
    }

    fn cell(&self, index: u64) -> u64 {
        self.bits[index as usize] as u64
    }

    fn query(&self, z: GroupElement, budget: &mut ProbeBudget) -> Result<bool> {
        self.group.check(z)?;
        budget.probe(z.0)?;
        Ok(self.bits[z.0 as usize])
    }
}

pub fn bitvector_build(inst: &ThreeSumInstance) -> Result<BitVectorIndex> {
    BitVectorIndex::build(inst)
}

pub fn bitvector_query(memory: &BitVectorIndex, z: GroupElement, budget: &mut ProbeBudget) -> Result<bool> {
    memory.query(z, budget)
}

/// The sumset stored sorted, one element per `w`-bit word, queried by
/// binary search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedSumsetIndex {
    group: GroupSpec,
    word_bits: u32,
    words: Vec<u64>,
}

impl SortedSumsetIndex {
    pub fn build(inst: &ThreeSumInstance, word_bits: u32) -> Result<Self> {
        let group = inst.group();
        if word_bits < group.element_bits() || word_bits > 64 {
            return Err(Error::WordTooSmall {
                word_bits,
                cardinality: group.cardinality(),
            });
        }
        Ok(SortedSumsetIndex {
            group,
            word_bits,
            words: inst.sumset().into_iter().map(|e| e.0).collect(),
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl CellProbeStructure for SortedSumsetIndex {
    fn group(&self) -> GroupSpec {
        self.group
    }

    fn cells(&self) -> u64 {
        self.words.len() as u64
    }

    fn word_bits(&self) -> u32 {
        self.word_bits
    }

    fn max_probes(&self) -> u64 {
        crate::group::ceil_log2(self.words.len() as u64) as u64 + 1
    }

    fn cell(&self, index: u64) -> u64 {
        self.words[index as usize]
    }

    fn query(&self, z: GroupElement, budget: &mut ProbeBudget) -> Result<bool> {
        self.group.check(z)?;
        let (mut lo, mut hi) = (0usize, self.words.len());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            budget.probe(mid as u64)?;
            let w = self.words[mid];
            if w == z.0 {
                return Ok(true);
            }
            if w < z.0 {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(false)
    }
}

pub fn sorted_sumset_build(inst: &ThreeSumInstance, word_bits: u32) -> Result<SortedSumsetIndex> {
    SortedSumsetIndex::build(inst, word_bits)
}

pub fn sorted_sumset_query(
    structure: &SortedSumsetIndex,
    z: GroupElement,
    budget: &mut ProbeBudget,
) -> Result<bool> {
    structure.query(z, budget)
}

/// Widest probe count a decision table can index in a `u64`.
pub const MAX_SCHEME_PROBES: u32 = 6;

/// A non-adaptive bit-probe query plan: for every query element, the `t`
/// cells it reads and a truth table over the read bits.
///
/// Table bit `x` is the answer when the probed bits, read first probe as the
/// most significant, spell `x`. For `t = 2` that means index `2·b_u + b_v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawScheme", into = "RawScheme")]
pub struct NonAdaptiveScheme {
    cells: u64,
    probes_per_query: u32,
    probes: Vec<Vec<u64>>,
    tables: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    s: u64,
    t: u32,
    probes: Vec<Vec<u64>>,
    tables: Vec<u64>,
}

impl TryFrom<RawScheme> for NonAdaptiveScheme {
    type Error = Error;

    fn try_from(raw: RawScheme) -> Result<Self> {
        NonAdaptiveScheme::new(raw.s, raw.t, raw.probes, raw.tables)
    }
}

impl From<NonAdaptiveScheme> for RawScheme {
    fn from(s: NonAdaptiveScheme) -> Self {
        RawScheme {
            s: s.cells,
            t: s.probes_per_query,
            probes: s.probes,
            tables: s.tables,
        }
    }
}

impl NonAdaptiveScheme {
    pub fn new(cells: u64, probes_per_query: u32, probes: Vec<Vec<u64>>, tables: Vec<u64>) -> Result<Self> {
        if probes_per_query == 0 || probes_per_query > MAX_SCHEME_PROBES {
            return Err(Error::InvalidScheme(format!(
                "probes per query must be in 1..={MAX_SCHEME_PROBES}, got {probes_per_query}"
            )));
        }
        if probes.len() != tables.len() {
            return Err(Error::InvalidScheme(format!(
                "{} probe lists but {} tables",
                probes.len(),
                tables.len()
            )));
        }
        let table_limit = 1u128 << (1u32 << probes_per_query);
        for (g, (plist, &table)) in probes.iter().zip(&tables).enumerate() {
            if plist.len() != probes_per_query as usize {
                return Err(Error::InvalidScheme(format!(
                    "query {g} has {} probes, expected {probes_per_query}",
                    plist.len()
                )));
            }
            if let Some(&bad) = plist.iter().find(|&&c| c >= cells) {
                return Err(Error::CellOutOfRange { index: bad, cells });
            }
            if table as u128 >= table_limit {
                return Err(Error::InvalidScheme(format!("table {table} of query {g} has too many bits")));
            }
        }
        Ok(NonAdaptiveScheme {
            cells,
            probes_per_query,
            probes,
            tables,
        })
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    pub fn probes_per_query(&self) -> u32 {
        self.probes_per_query
    }

    /// Number of query elements the plan covers.
    pub fn queries(&self) -> u64 {
        self.probes.len() as u64
    }

    pub fn probes(&self, z: GroupElement) -> &[u64] {
        &self.probes[z.0 as usize]
    }

    pub fn table(&self, z: GroupElement) -> u64 {
        self.tables[z.0 as usize]
    }

    /// Checks that the plan is total over `group`.
    pub fn check_group(&self, group: &GroupSpec) -> Result<()> {
        if self.queries() != group.cardinality() {
            return Err(Error::InvalidScheme(format!(
                "scheme covers {} queries but the group has {} elements",
                self.queries(),
                group.cardinality()
            )));
        }
        Ok(())
    }

    /// Evaluates query `z` with cell contents given by `bit`.
    pub fn answer_with(&self, z: GroupElement, mut bit: impl FnMut(u64) -> bool) -> bool {
        let index = self
            .probes(z)
            .iter()
            .fold(0u32, |acc, &c| (acc << 1) | bit(c) as u32);
        (self.table(z) >> index) & 1 == 1
    }

    pub fn answer(&self, memory: &[bool], z: GroupElement) -> Result<bool> {
        if memory.len() as u64 != self.cells {
            return Err(Error::InvalidScheme(format!(
                "memory has {} bits, scheme uses {} cells",
                memory.len(),
                self.cells
            )));
        }
        if z.0 >= self.queries() {
            return Err(Error::ElementOutOfRange {
                value: z.0,
                cardinality: self.queries(),
            });
        }
        Ok(self.answer_with(z, |c| memory[c as usize]))
    }

    pub fn correct_on(&self, memory: &[bool], inst: &ThreeSumInstance) -> Result<bool> {
        self.check_group(&inst.group())?;
        let truth = inst.answer_table();
        for z in inst.group().elements() {
            if self.answer(memory, z)? != truth[z.0 as usize] {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn scheme_answer(scheme: &NonAdaptiveScheme, memory: &[bool], z: GroupElement) -> Result<bool> {
    scheme.answer(memory, z)
}

pub fn scheme_correct_on(scheme: &NonAdaptiveScheme, memory: &[bool], inst: &ThreeSumInstance) -> Result<bool> {
    scheme.correct_on(memory, inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ThreeSumInstance {
        ThreeSumInstance::from_values(GroupSpec::cyclic(11).unwrap(), &[1, 2], &[3, 5]).unwrap()
    }

    #[test]
    fn brute_force_examples() {
        let inst = small();
        assert!(inst.brute_force_answer(GroupElement(7)).unwrap());
        assert!(!inst.brute_force_answer(GroupElement(10)).unwrap());
        assert!(inst.brute_force_answer(GroupElement(11)).is_err());
        let zero = ThreeSumInstance::from_values(GroupSpec::cyclic(5).unwrap(), &[0], &[0]).unwrap();
        assert!(zero.brute_force_answer(GroupElement(0)).unwrap());
    }

    #[test]
    fn sumset_example() {
        let got: Vec<u64> = small().sumset().into_iter().map(|e| e.0).collect();
        assert_eq!(got, vec![4, 5, 6, 7]);
    }

    #[test]
    fn instance_validation() {
        let g = GroupSpec::cyclic(11).unwrap();
        assert!(matches!(
            ThreeSumInstance::from_values(g, &[1, 1], &[2, 3]),
            Err(Error::DuplicateElement(1))
        ));
        assert!(ThreeSumInstance::from_values(g, &[1], &[2, 3]).is_err());
        assert!(ThreeSumInstance::from_values(g, &[], &[]).is_err());
        assert!(ThreeSumInstance::from_values(g, &[11], &[2]).is_err());
    }

    #[test]
    fn instance_json_shape() {
        let json = serde_json::to_string(&small()).unwrap();
        assert_eq!(json, r#"{"group":{"cyclic":11},"a1":[1,2],"a2":[3,5]}"#);
        let back: ThreeSumInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back, small());
    }

    #[test]
    fn bitvector_example() {
        let inst = small();
        let bv = BitVectorIndex::build(&inst).unwrap();
        let set: Vec<usize> = bv.bits().iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect();
        assert_eq!(set, vec![4, 5, 6, 7]);
        let mut budget = bv.budget();
        assert!(bv.query(GroupElement(7), &mut budget).unwrap());
        assert_eq!(budget.probes_made, 1);
        let mut budget = bv.budget();
        assert!(!bv.query(GroupElement(10), &mut budget).unwrap());
        assert_eq!(budget.probes_made, 1);
        assert!(matches!(
            BitVectorIndex::build_with_cap(&inst, 10),
            Err(Error::MemoryCapExceeded { .. })
        ));
    }

    #[test]
    fn sorted_sumset_example() {
        let inst = small();
        let idx = SortedSumsetIndex::build(&inst, 4).unwrap();
        let mut budget = idx.budget();
        assert!(idx.query(GroupElement(7), &mut budget).unwrap());
        assert!(budget.probes_made <= 3);
        let mut budget = idx.budget();
        assert!(!idx.query(GroupElement(10), &mut budget).unwrap());
        assert!(budget.probes_made <= 3);
        assert!(matches!(SortedSumsetIndex::build(&inst, 3), Err(Error::WordTooSmall { .. })));
    }

    #[test]
    fn probe_cap_counts_then_errors() {
        let mut b = ProbeBudget::new(4, 1).with_cap(1);
        b.probe(0).unwrap();
        assert!(matches!(b.probe(1), Err(Error::ProbeCapExceeded { cap: 1 })));
        assert_eq!(b.probes_made, 2);
        assert!(matches!(b.probe(4), Err(Error::CellOutOfRange { .. })));
    }

    const AND: u64 = 0b1000;
    const XOR: u64 = 0b0110;
    const COPY_FIRST: u64 = 0b1100;

    #[test]
    fn scheme_answer_examples() {
        let mk = |table| NonAdaptiveScheme::new(2, 2, vec![vec![0, 1]], vec![table]).unwrap();
        let memory = [true, false];
        assert!(!mk(AND).answer(&memory, GroupElement(0)).unwrap());
        assert!(mk(XOR).answer(&memory, GroupElement(0)).unwrap());
        assert!(mk(0b1111).answer(&memory, GroupElement(0)).unwrap());
        assert!(mk(0b1111).answer(&[false, false], GroupElement(0)).unwrap());
        assert!(mk(AND).answer(&[true], GroupElement(0)).is_err());
    }

    #[test]
    fn bitvector_as_two_probe_scheme() {
        let inst = small();
        let m = inst.group().cardinality();
        let scheme = NonAdaptiveScheme::new(
            m,
            2,
            (0..m).map(|z| vec![z, z]).collect(),
            vec![COPY_FIRST; m as usize],
        )
        .unwrap();
        let mut memory = BitVectorIndex::build(&inst).unwrap().bits().to_vec();
        assert!(scheme.correct_on(&memory, &inst).unwrap());
        memory[3] = !memory[3];
        assert!(!scheme.correct_on(&memory, &inst).unwrap());
    }

    #[test]
    fn scheme_validation() {
        assert!(NonAdaptiveScheme::new(2, 2, vec![vec![0, 2]], vec![0]).is_err());
        assert!(NonAdaptiveScheme::new(2, 2, vec![vec![0]], vec![0]).is_err());
        assert!(NonAdaptiveScheme::new(2, 2, vec![vec![0, 1]], vec![16]).is_err());
        assert!(NonAdaptiveScheme::new(2, 0, vec![], vec![]).is_err());
        let json = r#"{"s":3,"t":2,"probes":[[0,1],[2,2]],"tables":[8,6]}"#;
        let s: NonAdaptiveScheme = serde_json::from_str(json).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), json);
    }
}
