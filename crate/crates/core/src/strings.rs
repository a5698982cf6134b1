//! Binary and ternary strings, prefix relations, cylinder measure, and the
//! ternary embedding with its lexicographic block order.
//!
//! Strings are bounded by a configured depth (the engine never works with
//! infinite sequences), so a binary string packs into a `(len, bits)` pair
//! with the first character in the most significant position. Lexicographic
//! order on equal-length strings is then numeric order on `bits`.

use crate::ratio::{q_pow2_neg, Q};
use num_traits::Zero;
use serde::{de::Error as DeError, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Maximum supported string length (dense trees stay desk-scale).
pub const MAX_LEN: usize = 28;

/// A finite binary string of length `<= MAX_LEN`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: u8,
    /// Bit `i` of the string sits at position `len-1-i` (MSB-first).
    bits: u32,
}

impl BitString {
    pub fn empty() -> Self {
        BitString { len: 0, bits: 0 }
    }

    /// Builds from `(len, value)` with `value` read MSB-first.
    pub fn from_value(len: usize, value: u32) -> Self {
        assert!(len <= MAX_LEN, "string length {len} exceeds limit");
        debug_assert!(len == 32 || value < (1u32 << len));
        BitString {
            len: len as u8,
            bits: value,
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        assert!(bits.len() <= MAX_LEN);
        let mut v = 0u32;
        for &b in bits {
            debug_assert!(b < 2);
            v = (v << 1) | u32::from(b);
        }
        BitString {
            len: bits.len() as u8,
            bits: v,
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        if s.len() > MAX_LEN {
            return Err(format!("string {s:?} too long"));
        }
        let mut v = 0u32;
        for c in s.chars() {
            match c {
                '0' => v <<= 1,
                '1' => v = (v << 1) | 1,
                _ => return Err(format!("bad binary string {s:?}")),
            }
        }
        Ok(BitString {
            len: s.len() as u8,
            bits: v,
        })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> u32 {
        self.bits
    }

    /// `sigma(i)`, the i-th character.
    pub fn bit(&self, i: usize) -> u8 {
        assert!(i < self.len());
        ((self.bits >> (self.len() - 1 - i)) & 1) as u8
    }

    pub fn push(&self, b: u8) -> Self {
        debug_assert!(b < 2);
        BitString::from_value(self.len() + 1, (self.bits << 1) | u32::from(b))
    }

    /// Concatenation `self * other`.
    pub fn concat(&self, other: &BitString) -> Self {
        BitString::from_value(
            self.len() + other.len(),
            (self.bits << other.len()) | other.bits,
        )
    }

    /// The length-`n` prefix.
    pub fn prefix(&self, n: usize) -> Self {
        assert!(n <= self.len());
        BitString::from_value(n, self.bits >> (self.len() - n))
    }

    pub fn parent(&self) -> Option<Self> {
        if self.len == 0 {
            None
        } else {
            Some(self.prefix(self.len() - 1))
        }
    }

    /// True iff `self` is a prefix of `other` (allowing equality).
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len() <= other.len() && other.prefix(self.len()) == *self
    }

    /// Strips `self` from the front of `other`.
    pub fn strip_prefix_of(&self, other: &BitString) -> Option<BitString> {
        if self.is_prefix_of(other) {
            Some(BitString::from_value(
                other.len() - self.len(),
                other.bits & (1u32 << (other.len() - self.len())).wrapping_sub(1),
            ))
        } else {
            None
        }
    }

    /// All prefixes from the empty string up to `self` itself.
    pub fn ancestors(&self) -> impl Iterator<Item = BitString> + '_ {
        (0..=self.len()).map(move |n| self.prefix(n))
    }

    /// Heap index of this node in a dense tree layout: `2^len - 1 + bits`.
    pub fn heap_index(&self) -> usize {
        ((1usize << self.len()) - 1) + self.bits as usize
    }

    /// Inverse of `heap_index` given the node's depth.
    pub fn from_heap(len: usize, offset: u32) -> Self {
        BitString::from_value(len, offset)
    }

    /// The measure of the cylinder `[self]`, i.e. `2^-len`.
    pub fn measure(&self) -> Q {
        q_pow2_neg(self.len())
    }

    /// Number of zero characters.
    pub fn count_zeros(&self) -> usize {
        self.len() - self.count_ones()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones() as usize
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        BitString::parse(&s).map_err(D::Error::custom)
    }
}

/// A finite string over `{0,1,2}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TernaryString(Vec<u8>);

impl TernaryString {
    pub fn empty() -> Self {
        TernaryString(Vec::new())
    }

    pub fn from_digits(digits: &[u8]) -> Self {
        assert!(digits.iter().all(|&d| d < 3));
        TernaryString(digits.to_vec())
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                '2' => Ok(2),
                _ => Err(format!("bad ternary string {s:?}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(TernaryString)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn push(&self, d: u8) -> Self {
        assert!(d < 3);
        let mut v = self.0.clone();
        v.push(d);
        TernaryString(v)
    }
}

impl fmt::Display for TernaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TernaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self)
    }
}

/// Reduces an arbitrary set of strings to the prefix-free antichain covering
/// the same cylinder union (members extending another member are dropped).
pub fn antichain(set: &[BitString]) -> Vec<BitString> {
    let mut sorted: Vec<BitString> = set.to_vec();
    sorted.sort_by_key(|s| (s.len(), s.value()));
    sorted.dedup();
    let mut out: Vec<BitString> = Vec::new();
    'next: for s in sorted {
        for kept in &out {
            if kept.is_prefix_of(&s) {
                continue 'next;
            }
        }
        out.push(s);
    }
    out
}

/// A finite set of binary strings none of which properly extends another.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixFreeSet {
    members: Vec<BitString>,
}

impl PrefixFreeSet {
    /// Validates prefix-freeness pairwise.
    pub fn new(members: Vec<BitString>) -> Result<Self, String> {
        let mut sorted = members.clone();
        sorted.sort();
        sorted.dedup();
        for i in 0..sorted.len() {
            for j in 0..sorted.len() {
                if i != j && sorted[i].is_prefix_of(&sorted[j]) {
                    return Err(format!(
                        "{} is a prefix of {}: not prefix-free",
                        sorted[i], sorted[j]
                    ));
                }
            }
        }
        Ok(PrefixFreeSet { members: sorted })
    }

    /// Normalizes an arbitrary set to its covering antichain.
    pub fn from_any(set: &[BitString]) -> Self {
        PrefixFreeSet {
            members: antichain(set),
        }
    }

    pub fn members(&self) -> &[BitString] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn measure(&self) -> Q {
        self.members.iter().map(|s| s.measure()).sum()
    }
}

/// Measure of the union of cylinders `[A]`, for arbitrary (not necessarily
/// prefix-free) `A`, computed exactly via antichain reduction.
pub fn measure(set: &[BitString]) -> Q {
    antichain(set).iter().map(|s| s.measure()).sum()
}

/// Conditional measure `m(A | rho) = m(A cap [rho]) / m(rho)`.
pub fn conditional_measure(set: &[BitString], rho: &BitString) -> Q {
    let mut inside: Vec<BitString> = Vec::new();
    for s in antichain(set) {
        if rho.is_prefix_of(&s) {
            inside.push(s);
        } else if s.is_prefix_of(rho) {
            // [rho] lies entirely inside [s].
            return crate::ratio::q_one();
        }
    }
    let num: Q = inside.iter().map(|s| s.measure()).sum();
    if num.is_zero() {
        num
    } else {
        num / rho.measure()
    }
}

/// All length-`n` extensions of `rho`, lexicographic. Requires `|rho| <= n`.
pub fn cylinder_leaves(rho: &BitString, n: usize) -> Vec<BitString> {
    assert!(rho.len() <= n, "cylinder_leaves: |rho| > n");
    let shift = n - rho.len();
    let base = rho.value() << shift;
    (0..(1u32 << shift))
        .map(|off| BitString::from_value(n, base | off))
        .collect()
}

/// All `sigma` of length `n` outside `[rho]` and outside `already`,
/// lexicographic.
pub fn complement_leaves(rho: &BitString, n: usize, already: &[BitString]) -> Vec<BitString> {
    assert!(rho.len() <= n);
    let skip: std::collections::HashSet<BitString> = already.iter().copied().collect();
    (0..(1u32 << n))
        .map(|v| BitString::from_value(n, v))
        .filter(|s| !rho.is_prefix_of(s) && !skip.contains(s))
        .collect()
}

/// The embedding `e : 3^* -> 2^*` with `e(a0) = e(a)0`, `e(a1) = e(a)11`,
/// `e(a2) = e(a)10`.
pub fn ternary_embed(alpha: &TernaryString) -> BitString {
    let mut out = BitString::empty();
    for &d in alpha.digits() {
        out = match d {
            0 => out.push(0),
            1 => out.push(1).push(1),
            _ => out.push(1).push(0),
        };
    }
    out
}

/// All ternary strings of exactly the given depth, lexicographic (0 < 1 < 2).
pub fn ternary_lex_iter(depth: usize) -> Vec<TernaryString> {
    let total = 3usize.pow(depth as u32);
    let mut out = Vec::with_capacity(total);
    for mut v in 0..total {
        let mut digits = vec![0u8; depth];
        for i in (0..depth).rev() {
            digits[i] = (v % 3) as u8;
            v /= 3;
        }
        out.push(TernaryString(digits));
    }
    out
}
