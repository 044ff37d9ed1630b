//! Inputs whose sumset meets a query set `Q` in exactly a chosen pattern
//! `P ⊆ Q`, the uniform-pattern input distribution built from them, and the
//! cell-sampling coverage count.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigUint;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::threesum::ThreeSumInstance;

/// An ordered query set and the subset that must land in the sumset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTarget {
    queries: Vec<GroupElement>,
    pattern: BTreeSet<GroupElement>,
}

impl PatternTarget {
    pub fn new(queries: Vec<GroupElement>, pattern: BTreeSet<GroupElement>) -> Result<Self> {
        let distinct: BTreeSet<_> = queries.iter().copied().collect();
        if distinct.len() != queries.len() {
            return Err(Error::InvalidParameters("query set has duplicates".into()));
        }
        if !pattern.is_subset(&distinct) {
            return Err(Error::PatternInvalid);
        }
        Ok(PatternTarget { queries, pattern })
    }

    /// `mask` bit `i` selects `queries[i]`.
    pub fn from_mask(queries: Vec<GroupElement>, mask: u64) -> Result<Self> {
        if queries.len() < 64 && mask >> queries.len() != 0 {
            return Err(Error::PatternInvalid);
        }
        let pattern = queries
            .iter()
            .enumerate()
            .filter(|(i, _)| (mask >> i) & 1 == 1)
            .map(|(_, &q)| q)
            .collect();
        Self::new(queries, pattern)
    }

    pub fn queries(&self) -> &[GroupElement] {
        &self.queries
    }

    pub fn pattern(&self) -> &BTreeSet<GroupElement> {
        &self.pattern
    }

    pub fn mask(&self) -> u64 {
        self.queries
            .iter()
            .enumerate()
            .filter(|(_, q)| self.pattern.contains(q))
            .fold(0, |m, (i, _)| m | 1 << i)
    }
}

/// `2n² + 2n`; the group must be strictly larger.
pub fn group_size_bound(n: usize) -> u64 {
    let n = n as u64;
    2 * n * n + 2 * n
}

struct Builder<'a> {
    group: GroupSpec,
    forbidden: Vec<GroupElement>,
    a1: Vec<GroupElement>,
    a2: Vec<GroupElement>,
    a1_set: HashSet<GroupElement>,
    a2_set: HashSet<GroupElement>,
    rng: &'a mut ChaCha8Rng,
}

impl Builder<'_> {
    fn covers(&self, p: GroupElement) -> bool {
        self.a1
            .iter()
            .any(|&x| self.a2_set.contains(&self.group.sub_unchecked(p, x)))
    }

    /// Values of `t` for which `(target - t, t)` would create a forbidden sum
    /// or repeat an existing element.
    fn blocked(&self, target: GroupElement) -> HashSet<GroupElement> {
        let g = &self.group;
        let mut blocked = HashSet::new();
        for &q in &self.forbidden {
            for &y in &self.a2 {
                // (target - t) + y = q
                blocked.insert(g.sub_unchecked(g.add_unchecked(target, y), q));
            }
            for &x in &self.a1 {
                // x + t = q
                blocked.insert(g.sub_unchecked(q, x));
            }
        }
        for &x in &self.a1 {
            blocked.insert(g.sub_unchecked(target, x));
        }
        blocked.extend(self.a2.iter().copied());
        blocked
    }

    /// Smallest free value scanning upward from a random offset.
    fn pick(&mut self, blocked: &HashSet<GroupElement>) -> Result<GroupElement> {
        let size = self.group.cardinality();
        let start = self.rng.gen_range(0..size);
        (0..size)
            .map(|i| GroupElement((start + i) % size))
            .find(|t| !blocked.contains(t))
            .ok_or(Error::GroupTooSmall {
                cardinality: size,
                n: self.a1.len() + 1,
                bound: group_size_bound(self.a1.len() + 1),
            })
    }

    fn add_pair(&mut self, target: GroupElement) -> Result<()> {
        let blocked = self.blocked(target);
        let t = self.pick(&blocked)?;
        let x = self.group.sub_unchecked(target, t);
        self.a1.push(x);
        self.a1_set.insert(x);
        self.a2.push(t);
        self.a2_set.insert(t);
        Ok(())
    }
}

/// Greedy pair-by-pair construction: cover each pattern element with a fresh
/// pair `(p - t, t)`, then pad, never creating a sum in `Q \ P`.
pub fn construct_input(group: GroupSpec, target: &PatternTarget, n: usize, seed: u64) -> Result<ThreeSumInstance> {
    for &q in target.queries() {
        group.check(q)?;
    }
    if n == 0 {
        return Err(Error::InvalidParameters("n must be positive".into()));
    }
    if target.queries().len() > n {
        return Err(Error::InvalidParameters(format!(
            "|Q| = {} exceeds n = {n}",
            target.queries().len()
        )));
    }
    let bound = group_size_bound(n);
    if group.cardinality() <= bound {
        return Err(Error::GroupTooSmall {
            cardinality: group.cardinality(),
            n,
            bound,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forbidden: Vec<GroupElement> = target
        .queries()
        .iter()
        .copied()
        .filter(|q| !target.pattern().contains(q))
        .collect();
    let mut b = Builder {
        group,
        forbidden,
        a1: Vec::with_capacity(n),
        a2: Vec::with_capacity(n),
        a1_set: HashSet::new(),
        a2_set: HashSet::new(),
        rng: &mut rng,
    };

    for &p in target.queries().iter().filter(|q| target.pattern().contains(q)) {
        if !b.covers(p) {
            b.add_pair(p)?;
        }
    }

    let queries: HashSet<GroupElement> = target.queries().iter().copied().collect();
    while b.a1.len() < n {
        let size = group.cardinality();
        let start = b.rng.gen_range(0..size);
        let sum = (0..size)
            .map(|i| GroupElement((start + i) % size))
            .find(|v| !queries.contains(v))
            .expect("group is larger than Q");
        b.add_pair(sum)?;
    }

    let (a1, a2) = (b.a1, b.a2);
    ThreeSumInstance::new(group, a1, a2)
}

/// Checks `P ⊆ A1 + A2` and `(Q \ P) ∩ (A1 + A2) = ∅`.
pub fn verify_pattern(inst: &ThreeSumInstance, queries: &[GroupElement], pattern: &BTreeSet<GroupElement>) -> bool {
    let sums = inst.sumset();
    pattern.iter().all(|p| queries.contains(p) && sums.contains(p))
        && queries.iter().filter(|q| !pattern.contains(q)).all(|q| !sums.contains(q))
}

/// A draw from the uniform-pattern distribution over `Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub target: PatternTarget,
    pub input: ThreeSumInstance,
}

/// Picks `P` uniformly among subsets of `Q`, then builds its input.
pub fn sample_distribution(group: GroupSpec, queries: &[GroupElement], n: usize, seed: u64) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pattern = queries.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    let target = PatternTarget::new(queries.to_vec(), pattern)?;
    let input = construct_input(group, &target, n, rng.gen())?;
    Ok(Sample { target, input })
}

/// Average number of queries answered by a uniformly random set of `subset`
/// cells out of `cells`, when each of `queries` queries probes `probes`
/// distinct cells: `|G|·Π_{i<T} (Δ - i)/(S - i)`.
pub fn cell_sampling_count(queries: u64, cells: u64, subset: u64, probes: u64) -> Result<BigRational> {
    if !(probes <= subset && subset <= cells) {
        return Err(Error::InvalidParameters(format!(
            "need T <= Δ <= S, got T = {probes}, Δ = {subset}, S = {cells}"
        )));
    }
    let mut num = BigUint::from(queries);
    let mut den = BigUint::from(1u32);
    for i in 0..probes {
        num *= subset - i;
        den *= cells - i;
    }
    Ok(BigRational::new(num.into(), den.into()))
}
