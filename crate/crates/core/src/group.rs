//! Finite abelian groups used by the reductions: cyclic `Z_m` and XOR over
//! `k`-bit strings, plus the mixed-radix digit layouts both reductions share.
//!
//! Elements of either group are a single canonical `u64`; the owning
//! [`GroupSpec`] decides how addition treats it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Widest XOR group supported; elements must fit a `u64` and `2^k` must too.
pub const MAX_XOR_BITS: u32 = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGroupSpec", into = "RawGroupSpec")]
pub enum GroupSpec {
    Cyclic(u64),
    Xor(u32),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawGroupSpec {
    Cyclic(u64),
    XorBits(u32),
}

impl TryFrom<RawGroupSpec> for GroupSpec {
    type Error = Error;

    fn try_from(raw: RawGroupSpec) -> Result<Self> {
        match raw {
            RawGroupSpec::Cyclic(m) => GroupSpec::cyclic(m),
            RawGroupSpec::XorBits(k) => GroupSpec::xor(k),
        }
    }
}

impl From<GroupSpec> for RawGroupSpec {
    fn from(spec: GroupSpec) -> Self {
        match spec {
            GroupSpec::Cyclic(m) => RawGroupSpec::Cyclic(m),
            GroupSpec::Xor(k) => RawGroupSpec::XorBits(k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub u64);

impl GroupElement {
    pub const ZERO: GroupElement = GroupElement(0);

    pub fn value(self) -> u64 {
        self.0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for GroupElement {
    fn from(v: u64) -> Self {
        GroupElement(v)
    }
}

impl GroupSpec {
    pub fn cyclic(modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidGroup(format!(
                "cyclic modulus must be at least 2, got {modulus}"
            )));
        }
        Ok(GroupSpec::Cyclic(modulus))
    }

    pub fn xor(bits: u32) -> Result<Self> {
        if bits == 0 || bits > MAX_XOR_BITS {
            return Err(Error::InvalidGroup(format!(
                "xor bit width must be in 1..={MAX_XOR_BITS}, got {bits}"
            )));
        }
        Ok(GroupSpec::Xor(bits))
    }

    pub fn cardinality(&self) -> u64 {
        match *self {
            GroupSpec::Cyclic(m) => m,
            GroupSpec::Xor(k) => 1u64 << k,
        }
    }

    /// Bits needed to write any element of this group.
    pub fn element_bits(&self) -> u32 {
        bits_for(self.cardinality())
    }

    pub fn contains(&self, a: GroupElement) -> bool {
        a.0 < self.cardinality()
    }

    pub fn element(&self, value: u64) -> Result<GroupElement> {
        let e = GroupElement(value);
        self.check(e)?;
        Ok(e)
    }

    pub fn check(&self, a: GroupElement) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::ElementOutOfRange {
                value: a.0,
                cardinality: self.cardinality(),
            })
        }
    }

    pub fn add(&self, a: GroupElement, b: GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    pub fn negate(&self, a: GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(self.negate_unchecked(a))
    }

    pub fn sub(&self, a: GroupElement, b: GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.sub_unchecked(a, b))
    }

    /// Addition for elements already known to be in range.
    pub(crate) fn add_unchecked(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        match *self {
            GroupSpec::Cyclic(m) => GroupElement(((a.0 as u128 + b.0 as u128) % m as u128) as u64),
            GroupSpec::Xor(_) => GroupElement(a.0 ^ b.0),
        }
    }

    pub(crate) fn negate_unchecked(&self, a: GroupElement) -> GroupElement {
        match *self {
            GroupSpec::Cyclic(m) => GroupElement((m - a.0) % m),
            GroupSpec::Xor(_) => a,
        }
    }

    pub(crate) fn sub_unchecked(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        self.add_unchecked(a, self.negate_unchecked(b))
    }

    /// All elements in increasing order of their canonical value.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> {
        (0..self.cardinality()).map(GroupElement)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(m) => write!(f, "cyclic:{m}"),
            GroupSpec::Xor(k) => write!(f, "xor:{k}"),
        }
    }
}

impl std::str::FromStr for GroupSpec {
    type Err = Error;

    /// Parses `cyclic:M` or `xor:K`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGroup(format!("expected cyclic:M or xor:K, got {s:?}"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "cyclic" => GroupSpec::cyclic(arg.trim().parse().map_err(|_| bad())?),
            "xor" => GroupSpec::xor(arg.trim().parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

/// `ceil(log2(x))` for `x >= 1`.
pub fn ceil_log2(x: u64) -> u32 {
    assert!(x >= 1, "ceil_log2 of zero");
    if x == 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Bits needed to store every value in `[0, count)`.
pub fn bits_for(count: u64) -> u32 {
    ceil_log2(count.max(1))
}

/// Mixed-radix positional layout, most significant radix first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedRadixLayout {
    radices: Vec<u64>,
    modulus: u64,
}

impl MixedRadixLayout {
    pub fn new(radices: Vec<u64>) -> Result<Self> {
        if radices.is_empty() {
            return Err(Error::InvalidLayout("no radices".into()));
        }
        let mut modulus: u64 = 1;
        for (pos, &r) in radices.iter().enumerate() {
            if r < 2 {
                return Err(Error::InvalidLayout(format!("radix {r} at position {pos} is below 2")));
            }
            modulus = modulus
                .checked_mul(r)
                .ok_or_else(|| Error::InvalidLayout("product of radices overflows u64".into()))?;
        }
        Ok(MixedRadixLayout { radices, modulus })
    }

    pub fn radices(&self) -> &[u64] {
        &self.radices
    }

    pub fn len(&self) -> usize {
        self.radices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radices.is_empty()
    }

    /// Product of all radices.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// The cyclic group whose elements this layout spells out.
    pub fn group(&self) -> GroupSpec {
        GroupSpec::Cyclic(self.modulus)
    }

    fn check_digits(&self, digits: &[u64]) -> Result<()> {
        check_digits(&self.radices, digits)
    }

    pub fn encode(&self, digits: &[u64]) -> Result<GroupElement> {
        self.check_digits(digits)?;
        let value = self
            .radices
            .iter()
            .zip(digits)
            .fold(0u64, |acc, (&r, &d)| acc * r + d);
        Ok(GroupElement(value))
    }

    pub fn decode(&self, v: GroupElement) -> Result<Vec<u64>> {
        if v.0 >= self.modulus {
            return Err(Error::ElementOutOfRange {
                value: v.0,
                cardinality: self.modulus,
            });
        }
        let mut rest = v.0;
        let mut digits = vec![0; self.radices.len()];
        for (slot, &r) in digits.iter_mut().zip(&self.radices).rev() {
            *slot = rest % r;
            rest /= r;
        }
        Ok(digits)
    }
}

fn check_digits(radices: &[u64], digits: &[u64]) -> Result<()> {
    if digits.len() != radices.len() {
        return Err(Error::DigitCountMismatch {
            expected: radices.len(),
            got: digits.len(),
        });
    }
    for (position, (&digit, &radix)) in digits.iter().zip(radices).enumerate() {
        if digit >= radix {
            return Err(Error::DigitOutOfRange { position, digit, radix });
        }
    }
    Ok(())
}

pub fn encode_digits(layout: &MixedRadixLayout, digits: &[u64]) -> Result<GroupElement> {
    layout.encode(digits)
}

pub fn decode_digits(layout: &MixedRadixLayout, v: GroupElement) -> Result<Vec<u64>> {
    layout.decode(v)
}

/// Binary field widths for packing digits with the given radices.
///
/// Every radix after the first must be a power of two; the leading one may
/// be anything and gets `ceil(log2 radix)` bits.
pub fn xor_field_widths(radices: &[u64]) -> Result<Vec<u32>> {
    if radices.is_empty() {
        return Err(Error::InvalidLayout("no radices".into()));
    }
    let mut widths = Vec::with_capacity(radices.len());
    for (pos, &r) in radices.iter().enumerate() {
        if r < 2 {
            return Err(Error::InvalidLayout(format!("radix {r} at position {pos} is below 2")));
        }
        if pos > 0 && !r.is_power_of_two() {
            return Err(Error::InvalidLayout(format!(
                "radix {r} at position {pos} is not a power of two"
            )));
        }
        widths.push(ceil_log2(r));
    }
    let total: u32 = widths.iter().sum();
    if total > MAX_XOR_BITS {
        return Err(Error::InvalidLayout(format!("packed width {total} exceeds {MAX_XOR_BITS} bits")));
    }
    Ok(widths)
}

/// Total packed width in bits.
pub fn xor_width(radices: &[u64]) -> Result<u32> {
    Ok(xor_field_widths(radices)?.iter().sum())
}

/// Concatenates fixed-width binary fields, most significant first.
pub fn xor_pack(radices: &[u64], digits: &[u64]) -> Result<GroupElement> {
    let widths = xor_field_widths(radices)?;
    check_digits(radices, digits)?;
    let value = widths
        .iter()
        .zip(digits)
        .fold(0u64, |acc, (&w, &d)| (acc << w) | d);
    Ok(GroupElement(value))
}

/// Splits a packed value back into its fields. Fields are returned raw, so a
/// leading field wider than its radix may yield a value `>= radix`.
pub fn xor_unpack(radices: &[u64], v: GroupElement) -> Result<Vec<u64>> {
    let widths = xor_field_widths(radices)?;
    let total: u32 = widths.iter().sum();
    if total < 64 && v.0 >> total != 0 {
        return Err(Error::ElementOutOfRange {
            value: v.0,
            cardinality: 1u64 << total,
        });
    }
    let mut rest = v.0;
    let mut fields = vec![0; widths.len()];
    for (slot, &w) in fields.iter_mut().zip(&widths).rev() {
        *slot = rest & ((1u64 << w) - 1);
        rest >>= w;
    }
    Ok(fields)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: u64) -> GroupElement {
        GroupElement(v)
    }

    #[test]
    fn cyclic_add_wraps() {
        let g = GroupSpec::cyclic(7).unwrap();
        assert_eq!(g.add(e(5), e(4)).unwrap(), e(2));
        assert_eq!(g.add(e(6), e(0)).unwrap(), e(6));
    }

    #[test]
    fn xor_add_is_bitwise() {
        let g = GroupSpec::xor(3).unwrap();
        assert_eq!(g.add(e(0b101), e(0b011)).unwrap(), e(0b110));
        assert_eq!(g.add(e(0b101), e(0)).unwrap(), e(0b101));
    }

    #[test]
    fn negation() {
        let c = GroupSpec::cyclic(7).unwrap();
        assert_eq!(c.negate(e(3)).unwrap(), e(4));
        assert_eq!(c.negate(e(0)).unwrap(), e(0));
        let x = GroupSpec::xor(3).unwrap();
        assert_eq!(x.negate(e(0b101)).unwrap(), e(0b101));
    }

    #[test]
    fn out_of_range_is_rejected() {
        let c = GroupSpec::cyclic(7).unwrap();
        assert!(matches!(c.add(e(7), e(0)), Err(Error::ElementOutOfRange { .. })));
        assert!(c.negate(e(9)).is_err());
        let x = GroupSpec::xor(3).unwrap();
        assert!(x.add(e(8), e(1)).is_err());
    }

    #[test]
    fn degenerate_groups_rejected() {
        assert!(GroupSpec::cyclic(1).is_err());
        assert!(GroupSpec::cyclic(0).is_err());
        assert!(GroupSpec::xor(0).is_err());
        assert!(GroupSpec::xor(64).is_err());
        assert_eq!(GroupSpec::xor(4).unwrap().cardinality(), 16);
    }

    #[test]
    fn json_shape() {
        let c = GroupSpec::cyclic(11).unwrap();
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"cyclic":11}"#);
        let x = GroupSpec::xor(5).unwrap();
        assert_eq!(serde_json::to_string(&x).unwrap(), r#"{"xor_bits":5}"#);
        let back: GroupSpec = serde_json::from_str(r#"{"xor_bits":5}"#).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<GroupSpec>(r#"{"cyclic":1}"#).is_err());
    }

    #[test]
    fn parse_flag_form() {
        assert_eq!("cyclic:41".parse::<GroupSpec>().unwrap(), GroupSpec::Cyclic(41));
        assert_eq!("xor:11".parse::<GroupSpec>().unwrap(), GroupSpec::Xor(11));
        assert!("ring:3".parse::<GroupSpec>().is_err());
        assert!("cyclic".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(u64::MAX), 64);
    }

    #[test]
    fn encode_examples() {
        let l = MixedRadixLayout::new(vec![3, 2, 2]).unwrap();
        assert_eq!(l.modulus(), 12);
        assert_eq!(l.encode(&[1, 0, 1]).unwrap(), e(5));
        assert_eq!(l.encode(&[0, 0, 0]).unwrap(), e(0));
        let wide = MixedRadixLayout::new(vec![8, 3, 2, 2, 2, 2, 2, 2]).unwrap();
        assert_eq!(wide.encode(&[0, 1, 0, 0, 0, 1, 0, 0]).unwrap(), e(68));
    }

    #[test]
    fn decode_examples() {
        let l = MixedRadixLayout::new(vec![3, 2, 2]).unwrap();
        assert_eq!(l.decode(e(5)).unwrap(), vec![1, 0, 1]);
        assert_eq!(l.decode(e(0)).unwrap(), vec![0, 0, 0]);
        for v in 0..12 {
            let digits = l.decode(e(v)).unwrap();
            assert_eq!(l.encode(&digits).unwrap(), e(v));
        }
        assert!(l.decode(e(12)).is_err());
    }

    #[test]
    fn encode_errors() {
        let l = MixedRadixLayout::new(vec![3, 2, 2]).unwrap();
        assert!(matches!(
            l.encode(&[3, 0, 0]),
            Err(Error::DigitOutOfRange { position: 0, .. })
        ));
        assert!(matches!(l.encode(&[1, 0]), Err(Error::DigitCountMismatch { .. })));
        assert!(MixedRadixLayout::new(vec![3, 1]).is_err());
        assert!(MixedRadixLayout::new(vec![]).is_err());
    }

    #[test]
    fn carry_free_addition_matches_fieldwise_sum() {
        // exhaustive over a small layout
        let l = MixedRadixLayout::new(vec![4, 3, 2, 3]).unwrap();
        let g = l.group();
        for x in 0..l.modulus() {
            for y in 0..l.modulus() {
                let dx = l.decode(e(x)).unwrap();
                let dy = l.decode(e(y)).unwrap();
                let fits = dx.iter().zip(&dy).zip(l.radices()).all(|((a, b), r)| a + b < *r);
                if fits {
                    let sum: Vec<u64> = dx.iter().zip(&dy).map(|(a, b)| a + b).collect();
                    assert_eq!(g.add(e(x), e(y)).unwrap(), l.encode(&sum).unwrap());
                }
            }
        }
    }

    #[test]
    fn xor_pack_examples() {
        assert_eq!(xor_pack(&[4, 2, 2], &[2, 1, 0]).unwrap(), e(0b1010));
        assert_eq!(xor_pack(&[4, 2, 2], &[0, 0, 0]).unwrap(), e(0));
        assert_eq!(xor_width(&[8, 2, 4, 4]).unwrap(), 3 + 1 + 2 + 2);
        // leading radix need not be a power of two
        assert_eq!(xor_pack(&[3, 2], &[2, 1]).unwrap(), e(0b101));
        assert!(matches!(xor_pack(&[4, 3], &[0, 0]), Err(Error::InvalidLayout(_))));
        assert!(xor_pack(&[4, 2], &[4, 0]).is_err());
    }

    #[test]
    fn xor_pack_is_fieldwise_homomorphic() {
        let radices = [4, 2];
        for a in 0..4 {
            for b in 0..2 {
                for c in 0..4 {
                    for d in 0..2 {
                        let lhs = xor_pack(&radices, &[a, b]).unwrap().0 ^ xor_pack(&radices, &[c, d]).unwrap().0;
                        let rhs = xor_pack(&radices, &[a ^ c, b ^ d]).unwrap().0;
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn xor_unpack_inverts_pack() {
        let radices = [8, 2, 4, 4];
        let digits = [5, 1, 3, 2];
        let packed = xor_pack(&radices, &digits).unwrap();
        assert_eq!(xor_unpack(&radices, packed).unwrap(), digits);
    }
}
