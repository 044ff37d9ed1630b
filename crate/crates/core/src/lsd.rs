//! Blocked Lopsided Set Disjointness as 3SUM-Indexing over `Z_Δ`, and the
//! communication protocol obtained by running a cell-probe structure on all
//! block queries in parallel.
//!
//! The universe `[N] × [B]` is cut into blocks of `ℓ` consecutive indices.
//! Writing numbers in base `2B + 1`, a data pair `(j, b)` in block `i`
//! becomes `i·(2B+1)^{ℓ+1} + (b+1)·(2B+1)^{j - iℓ}`; `A2` holds every
//! `ℓ`-digit number with exactly one zero digit and the rest in `[1, B]`;
//! block `i` of the query vector becomes
//! `i·(2B+1)^{ℓ+1} + Σ_j (b_{iℓ+j} + 1)·(2B+1)^j`.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{rank_subset, subset_code_bits};
use crate::error::{Error, Result};
use crate::group::{ceil_log2, GroupElement, GroupSpec};
use crate::threesum::{CellProbeStructure, ThreeSumInstance};

/// One Blocked LSD input pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LsdInstance {
    indices: u64,
    block_width: u64,
    /// Arbitrary subset of `[N] × [B]`.
    data: BTreeSet<(u64, u64)>,
    /// Exactly one `b_i` per index `i`.
    query_vector: Vec<u64>,
}

impl LsdInstance {
    pub fn new(indices: u64, block_width: u64, data: BTreeSet<(u64, u64)>, query_vector: Vec<u64>) -> Result<Self> {
        if indices == 0 || block_width == 0 {
            return Err(Error::InvalidParameters("N and B must be positive".into()));
        }
        if query_vector.len() as u64 != indices {
            return Err(Error::InvalidParameters(format!(
                "query vector has {} entries, expected N = {indices}",
                query_vector.len()
            )));
        }
        if let Some(&b) = query_vector.iter().find(|&&b| b >= block_width) {
            return Err(Error::InvalidParameters(format!("query entry {b} not below B = {block_width}")));
        }
        if let Some(&(i, b)) = data.iter().find(|&&(i, b)| i >= indices || b >= block_width) {
            return Err(Error::InvalidParameters(format!("data pair ({i}, {b}) outside [N] x [B]")));
        }
        Ok(LsdInstance {
            indices,
            block_width,
            data,
            query_vector,
        })
    }

    /// Data set from bit `i·B + b` of `mask`, query vector from the base-`B`
    /// digits of `vector_index` (entry 0 least significant).
    pub fn from_codes(indices: u64, block_width: u64, mask: u64, vector_index: u64) -> Result<Self> {
        let data = (0..indices)
            .flat_map(|i| (0..block_width).map(move |b| (i, b)))
            .filter(|&(i, b)| (mask >> (i * block_width + b)) & 1 == 1)
            .collect();
        let mut rest = vector_index;
        let query_vector = (0..indices)
            .map(|_| {
                let b = rest % block_width;
                rest /= block_width;
                b
            })
            .collect();
        Self::new(indices, block_width, data, query_vector)
    }

    /// Each pair joins the data set with probability 1/2; entries of the query
    /// vector are uniform.
    pub fn random(indices: u64, block_width: u64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = BTreeSet::new();
        for i in 0..indices {
            for b in 0..block_width {
                if rng.gen_bool(0.5) {
                    data.insert((i, b));
                }
            }
        }
        let query_vector = (0..indices).map(|_| rng.gen_range(0..block_width)).collect();
        Self::new(indices, block_width, data, query_vector)
    }

    pub fn indices(&self) -> u64 {
        self.indices
    }

    pub fn block_width(&self) -> u64 {
        self.block_width
    }

    pub fn data(&self) -> &BTreeSet<(u64, u64)> {
        &self.data
    }

    pub fn query_vector(&self) -> &[u64] {
        &self.query_vector
    }

    /// Direct check that no `(i, b_i)` is in the data set.
    pub fn brute_force_disjoint(&self) -> bool {
        self.query_vector
            .iter()
            .enumerate()
            .all(|(i, &b)| !self.data.contains(&(i as u64, b)))
    }
}

pub fn brute_force_disjoint(inst: &LsdInstance) -> bool {
    inst.brute_force_disjoint()
}

/// Block size, digit base and modulus of one reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockParams {
    indices: u64,
    block_width: u64,
    ell: u64,
    base: u64,
    modulus: u64,
}

fn checked_pow(base: u64, exp: u64) -> Result<u64> {
    u32::try_from(exp)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .ok_or_else(|| Error::InvalidParameters(format!("{base}^{exp} overflows")))
}

impl BlockParams {
    /// Smallest modulus accepted by [`BlockParams::new`].
    pub fn minimal_modulus(indices: u64, block_width: u64, ell: u64) -> Result<u64> {
        Self::structural_checks(indices, block_width, ell)?;
        let base = 2 * block_width + 1;
        let overflow = || Error::InvalidParameters("modulus overflows u64".into());
        let value_bound = (indices as u128)
            .checked_mul(checked_pow(base, ell + 2)? as u128)
            .ok_or_else(overflow)?;
        let n = indices as u128 * block_width as u128;
        let pad_bound = (2 * (indices / ell) as u128 + 2 * n)
            .checked_mul(checked_pow(base, ell + 1)? as u128)
            .ok_or_else(overflow)?;
        let m = value_bound.max(pad_bound) + 1;
        u64::try_from(m).map_err(|_| overflow())
    }

    fn structural_checks(indices: u64, block_width: u64, ell: u64) -> Result<()> {
        if indices == 0 || block_width == 0 {
            return Err(Error::InvalidParameters("N and B must be positive".into()));
        }
        if ell == 0 || !indices.is_multiple_of(ell) {
            return Err(Error::InvalidParameters(format!("block size {ell} must divide N = {indices}")));
        }
        let a2_real = (ell as u128) * (block_width as u128).pow(ell as u32 - 1);
        if a2_real > indices as u128 * block_width as u128 {
            return Err(Error::InvalidParameters(format!(
                "|A2| = l·B^(l-1) = {a2_real} exceeds n = {}",
                indices * block_width
            )));
        }
        Ok(())
    }

    pub fn new(indices: u64, block_width: u64, ell: u64, modulus: u64) -> Result<Self> {
        let min = Self::minimal_modulus(indices, block_width, ell)?;
        if modulus < min {
            return Err(Error::InvalidParameters(format!(
                "modulus {modulus} too small: need at least {min} so that N·(2B+1)^(l+2) and every padded pair sum stay below it"
            )));
        }
        Ok(BlockParams {
            indices,
            block_width,
            ell,
            base: 2 * block_width + 1,
            modulus,
        })
    }

    pub fn minimal(indices: u64, block_width: u64, ell: u64) -> Result<Self> {
        Self::new(indices, block_width, ell, Self::minimal_modulus(indices, block_width, ell)?)
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn indices(&self) -> u64 {
        self.indices
    }

    pub fn block_width(&self) -> u64 {
        self.block_width
    }

    /// `n = N·B`, the padded size of both input sets.
    pub fn n(&self) -> u64 {
        self.indices * self.block_width
    }

    pub fn blocks(&self) -> u64 {
        self.indices / self.ell
    }

    pub fn group(&self) -> GroupSpec {
        GroupSpec::Cyclic(self.modulus)
    }

    /// `(2B+1)^{ℓ+1}`, the weight of the block coefficient.
    pub fn block_weight(&self) -> u64 {
        self.base.pow(self.ell as u32 + 1)
    }

    fn place(&self, j: u64) -> u64 {
        self.base.pow(j as u32)
    }

    /// First block coefficient that no query uses; dummies start here.
    fn dummy_coefficient(&self) -> u64 {
        self.blocks()
    }

    fn check_instance(&self, inst: &LsdInstance) -> Result<()> {
        if inst.indices != self.indices || inst.block_width != self.block_width {
            return Err(Error::InvalidParameters(format!(
                "instance is N = {}, B = {} but parameters are N = {}, B = {}",
                inst.indices, inst.block_width, self.indices, self.block_width
            )));
        }
        Ok(())
    }

    /// Block coefficient and the `ℓ + 1` low base-`(2B+1)` digits of `v`.
    pub fn split(&self, v: GroupElement) -> (u64, Vec<u64>) {
        let weight = self.block_weight();
        let mut low = v.0 % weight;
        let digits = (0..=self.ell)
            .map(|_| {
                let d = low % self.base;
                low /= self.base;
                d
            })
            .collect();
        (v.0 / weight, digits)
    }

    fn pad(&self, mut real: Vec<GroupElement>) -> Vec<GroupElement> {
        let weight = self.block_weight();
        let n = self.n() as usize;
        let mut coefficient = self.dummy_coefficient();
        while real.len() < n {
            real.push(GroupElement(coefficient * weight));
            coefficient += 1;
        }
        real
    }

    pub fn build_a1(&self, data: &BTreeSet<(u64, u64)>) -> Result<Vec<GroupElement>> {
        let weight = self.block_weight();
        let mut out = Vec::with_capacity(self.n() as usize);
        for &(j, b) in data {
            if j >= self.indices || b >= self.block_width {
                return Err(Error::InvalidParameters(format!("data pair ({j}, {b}) outside [N] x [B]")));
            }
            let block = j / self.ell;
            out.push(GroupElement(block * weight + (b + 1) * self.place(j - block * self.ell)));
        }
        Ok(self.pad(out))
    }

    /// Real `A2` elements, before padding.
    pub fn a2_core(&self) -> Vec<GroupElement> {
        let ell = self.ell as usize;
        let b = self.block_width;
        let mut out = Vec::new();
        for zero in 0..ell {
            let mut digits = vec![1u64; ell];
            digits[zero] = 0;
            loop {
                let v = digits.iter().enumerate().map(|(j, &c)| c * self.place(j as u64)).sum();
                out.push(GroupElement(v));
                let mut advanced = false;
                for pos in (0..ell).filter(|&p| p != zero) {
                    if digits[pos] < b {
                        digits[pos] += 1;
                        advanced = true;
                        break;
                    }
                    digits[pos] = 1;
                }
                if !advanced {
                    break;
                }
            }
        }
        out
    }

    pub fn build_a2(&self) -> Vec<GroupElement> {
        self.pad(self.a2_core())
    }

    pub fn build_queries(&self, query_vector: &[u64]) -> Result<Vec<GroupElement>> {
        if query_vector.len() as u64 != self.indices {
            return Err(Error::InvalidParameters(format!(
                "query vector has {} entries, expected {}",
                query_vector.len(),
                self.indices
            )));
        }
        let weight = self.block_weight();
        Ok(query_vector
            .chunks(self.ell as usize)
            .enumerate()
            .map(|(i, block)| {
                let low: u64 = block
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| (b + 1) * self.place(j as u64))
                    .sum();
                GroupElement(i as u64 * weight + low)
            })
            .collect())
    }

    pub fn reduce(&self, inst: &LsdInstance) -> Result<LsdReduction> {
        self.check_instance(inst)?;
        let instance = ThreeSumInstance::new(self.group(), self.build_a1(&inst.data)?, self.build_a2())?;
        let queries = self.build_queries(&inst.query_vector)?;
        Ok(LsdReduction {
            params: *self,
            instance,
            queries,
            query_vector: inst.query_vector.clone(),
        })
    }
}

/// The 3SUM-Indexing input built from the data set, plus one query per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LsdReduction {
    params: BlockParams,
    instance: ThreeSumInstance,
    queries: Vec<GroupElement>,
    query_vector: Vec<u64>,
}

impl LsdReduction {
    pub fn params(&self) -> &BlockParams {
        &self.params
    }

    pub fn instance(&self) -> &ThreeSumInstance {
        &self.instance
    }

    pub fn queries(&self) -> &[GroupElement] {
        &self.queries
    }

    /// Disjoint iff no block query is a pair sum.
    pub fn disjoint(&self) -> Result<bool> {
        for &z in &self.queries {
            if self.instance.brute_force_answer(z)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Digit audit of every pair `(a1, a2)` that sums to a block query.
    pub fn audit(&self) -> LsdAudit {
        let p = &self.params;
        let group = self.instance.group();
        let a2: BTreeSet<GroupElement> = self.instance.a2().iter().copied().collect();
        let mut audit = LsdAudit::default();
        for (block, &z) in self.queries.iter().enumerate() {
            for &x in self.instance.a1() {
                let y = group.sub_unchecked(z, x);
                if !a2.contains(&y) {
                    continue;
                }
                audit.summing_pairs += 1;
                let (cx, dx) = p.split(x);
                let (cy, dy) = p.split(y);
                let ell = p.ell as usize;

                let nonzero: Vec<usize> = (0..ell).filter(|&j| dx[j] != 0).collect();
                let zeros: Vec<usize> = (0..ell).filter(|&j| dy[j] == 0).collect();
                let aligned = cx == block as u64
                    && cy == 0
                    && dx[ell] == 0
                    && dy[ell] == 0
                    && nonzero.len() == 1
                    && zeros == nonzero
                    && dx[nonzero[0]] == self.query_vector[block * ell + nonzero[0]] + 1;
                if !aligned {
                    audit.alignment_violations += 1;
                }
                if (0..=ell).any(|j| dx[j] + dy[j] >= p.base) {
                    audit.carry_violations += 1;
                }
            }
        }
        audit
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LsdAudit {
    pub summing_pairs: u64,
    pub alignment_violations: u64,
    pub carry_violations: u64,
}

impl LsdAudit {
    pub fn violations(&self) -> u64 {
        self.alignment_violations + self.carry_violations
    }
}

pub fn disjoint_via_reduction(inst: &LsdInstance, params: &BlockParams) -> Result<bool> {
    params.reduce(inst)?.disjoint()
}

/// `floor(δ·log2 n / log2(2B+1)) - 2`, at least 1.
pub fn choose_ell(n: u64, block_width: u64, delta: f64) -> Result<u64> {
    if n < 2 || block_width < 2 || !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameters(format!(
            "choose_ell needs n, B >= 2 and delta in (0, 1], got n = {n}, B = {block_width}, delta = {delta}"
        )));
    }
    let ratio = delta * (n as f64).log2() / ((2 * block_width + 1) as f64).log2();
    // guard against 3.9999999 style rounding on exact ratios
    let floor = (ratio + 1e-9).floor() as i64;
    Ok((floor - 2).max(1) as u64)
}

/// One round of the parallel simulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// `q_r`, distinct cells requested.
    pub cells_requested: u64,
    /// Lexicographic rank of the requested cell set among all `q_r`-subsets.
    pub subset_rank: String,
    pub alice_bits: u64,
    pub bob_bits: u64,
    pub cells: Vec<u64>,
    pub contents: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub rounds: u64,
    pub alice_bits: u64,
    pub bob_bits: u64,
    pub per_round: Vec<RoundRecord>,
    pub answer: bool,
}

/// Alice's cost for requesting `q` of `cells` cells: the subset rank plus a
/// `ceil(log2(q+1))`-bit count prefix.
pub fn alice_round_bits(cells: u64, q: u64) -> u64 {
    subset_code_bits(cells, q) + ceil_log2(q + 1) as u64
}

/// Runs every query against `structure` and groups the `r`-th probes of all
/// queries into round `r`. Round `r` requests are fixed by the contents
/// returned in earlier rounds, as in the parallel simulation.
pub fn simulate_protocol<S: CellProbeStructure + ?Sized>(
    structure: &S,
    queries: &[GroupElement],
    max_probes: u64,
) -> Result<ProtocolTranscript> {
    let mut traces = Vec::with_capacity(queries.len());
    let mut any_yes = false;
    for &z in queries {
        let mut budget = structure.budget().with_cap(max_probes);
        let answer = structure.query(z, &mut budget).map_err(|e| match e {
            Error::ProbeCapExceeded { cap } => {
                Error::Protocol(format!("query {z} needs more than T = {cap} probes"))
            }
            other => other,
        })?;
        any_yes |= answer;
        traces.push(budget.trace);
    }

    let s = structure.cells();
    let w = structure.word_bits() as u64;
    let mut per_round = Vec::with_capacity(max_probes as usize);
    for r in 0..max_probes as usize {
        let cells: Vec<u64> = traces
            .iter()
            .filter_map(|t| t.get(r).copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let q = cells.len() as u64;
        let rank: BigUint = rank_subset(s, &cells);
        per_round.push(RoundRecord {
            cells_requested: q,
            subset_rank: rank.to_string(),
            alice_bits: alice_round_bits(s, q),
            bob_bits: q * w,
            contents: cells.iter().map(|&c| structure.cell(c)).collect(),
            cells,
        });
    }
    Ok(ProtocolTranscript {
        rounds: max_probes,
        alice_bits: per_round.iter().map(|r| r.alice_bits).sum(),
        bob_bits: per_round.iter().map(|r| r.bob_bits).sum(),
        per_round,
        answer: !any_yes,
    })
}
