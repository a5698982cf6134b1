//! Finite-depth supermartingale snapshots, approximation sequences, vectors
//! of gales, and the class predicates that carve out restricted betting.
//!
//! A [`GaleTree`] stores a nonnegative capital on *every* string up to its
//! depth (dense heap layout), which keeps indexing O(1) and validation exact.

use crate::ratio::{fmt_frac, is_nonneg, parse_frac, q_zero, Q};
use crate::strings::BitString;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;

/// One supermartingale snapshot: values on all of `2^{<=depth}`.
#[derive(Clone, PartialEq, Eq)]
pub struct GaleTree {
    depth: usize,
    values: Vec<Q>,
}

impl GaleTree {
    /// The all-zero snapshot (the conventional `M[-1]`).
    pub fn zero(depth: usize) -> Self {
        GaleTree {
            depth,
            values: vec![q_zero(); (1 << (depth + 1)) - 1],
        }
    }

    /// Constant snapshot.
    pub fn constant(depth: usize, v: Q) -> Self {
        assert!(is_nonneg(&v));
        GaleTree {
            depth,
            values: vec![v; (1 << (depth + 1)) - 1],
        }
    }

    /// Builds from an explicit map; every string of length `<= depth` must be
    /// present with a nonnegative value.
    pub fn from_map(depth: usize, map: &BTreeMap<BitString, Q>) -> Result<Self, String> {
        let mut t = GaleTree::zero(depth);
        let expected = (1usize << (depth + 1)) - 1;
        if map.len() != expected {
            return Err(format!(
                "gale tree of depth {depth} needs {expected} values, got {}",
                map.len()
            ));
        }
        for (s, v) in map {
            if s.len() > depth {
                return Err(format!("string {s} too long for depth {depth}"));
            }
            if !is_nonneg(v) {
                return Err(format!("negative capital {} at {s}", fmt_frac(v)));
            }
            t.values[s.heap_index()] = v.clone();
        }
        Ok(t)
    }

    /// Builds from `(string, value)` pairs, defaulting missing nodes to zero.
    pub fn from_sparse(depth: usize, pairs: &[(&str, Q)]) -> Self {
        let mut t = GaleTree::zero(depth);
        for (s, v) in pairs {
            let b = BitString::parse(s).unwrap();
            assert!(b.len() <= depth);
            assert!(is_nonneg(v));
            t.values[b.heap_index()] = v.clone();
        }
        t
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn value(&self, s: &BitString) -> &Q {
        assert!(s.len() <= self.depth, "string {s} beyond depth {}", self.depth);
        &self.values[s.heap_index()]
    }

    pub fn set(&mut self, s: &BitString, v: Q) {
        assert!(s.len() <= self.depth);
        assert!(is_nonneg(&v), "negative capital at {s}");
        self.values[s.heap_index()] = v;
    }

    /// Iterates `(string, value)` over all nodes, by depth then lex.
    pub fn iter(&self) -> impl Iterator<Item = (BitString, &Q)> + '_ {
        (0..=self.depth).flat_map(move |len| {
            (0..(1u32 << len)).map(move |off| {
                let s = BitString::from_heap(len, off);
                (s, &self.values[s.heap_index()])
            })
        })
    }

    /// Pointwise scaling by a positive rational.
    pub fn scale(&self, c: &Q) -> GaleTree {
        assert!(is_nonneg(c));
        GaleTree {
            depth: self.depth,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Pointwise sum; depths must agree.
    pub fn add(&self, other: &GaleTree) -> GaleTree {
        assert_eq!(self.depth, other.depth);
        GaleTree {
            depth: self.depth,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// The subtree below `rho` pulled up to the root (`sigma -> M(rho sigma)`).
    pub fn extract_under(&self, rho: &BitString) -> GaleTree {
        assert!(rho.len() <= self.depth);
        let d = self.depth - rho.len();
        let mut out = GaleTree::zero(d);
        for len in 0..=d {
            for off in 0..(1u32 << len) {
                let rel = BitString::from_heap(len, off);
                let abs = rho.concat(&rel);
                out.values[rel.heap_index()] = self.values[abs.heap_index()].clone();
            }
        }
        out
    }

    /// Restriction to the top `n` levels.
    pub fn truncate(&self, n: usize) -> GaleTree {
        assert!(n <= self.depth);
        let mut out = GaleTree::zero(n);
        for len in 0..=n {
            for off in 0..(1u32 << len) {
                let s = BitString::from_heap(len, off);
                out.values[s.heap_index()] = self.values[s.heap_index()].clone();
            }
        }
        out
    }
}

impl fmt::Debug for GaleTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GaleTree(depth={}, root={})", self.depth, fmt_frac(&self.values[0]))
    }
}

impl Serialize for GaleTree {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("GaleTree", 2)?;
        st.serialize_field("depth", &self.depth)?;
        let map: BTreeMap<String, String> = self
            .iter()
            .map(|(s, v)| (s.to_string(), fmt_frac(v)))
            .collect();
        st.serialize_field("values", &map)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for GaleTree {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            depth: usize,
            values: BTreeMap<String, String>,
        }
        let raw = Raw::deserialize(de)?;
        let mut map = BTreeMap::new();
        for (k, v) in raw.values {
            let s = BitString::parse(&k).map_err(D::Error::custom)?;
            let q = parse_frac(&v).map_err(D::Error::custom)?;
            map.insert(s, q);
        }
        GaleTree::from_map(raw.depth, &map).map_err(D::Error::custom)
    }
}

/// A partial commitment of favorable outcomes: string -> bit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidePolicy {
    assignments: BTreeMap<BitString, u8>,
}

impl SidePolicy {
    pub fn empty() -> Self {
        SidePolicy::default()
    }

    pub fn from_pairs(pairs: &[(&str, u8)]) -> Self {
        let mut p = SidePolicy::empty();
        for (s, b) in pairs {
            p.assignments.insert(BitString::parse(s).unwrap(), *b);
        }
        p
    }

    pub fn get(&self, s: &BitString) -> Option<u8> {
        self.assignments.get(s).copied()
    }

    pub fn set(&mut self, s: BitString, b: u8) {
        assert!(b < 2);
        self.assignments.insert(s, b);
    }

    pub fn domain(&self) -> impl Iterator<Item = (&BitString, u8)> + '_ {
        self.assignments.iter().map(|(s, &b)| (s, b))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// True iff `self` extends `older` (superset domain, agreeing values).
    pub fn extends(&self, older: &SidePolicy) -> bool {
        older
            .assignments
            .iter()
            .all(|(s, b)| self.assignments.get(s) == Some(b))
    }
}

/// A vector of `k >= 1` snapshots of equal depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaleVector {
    components: Vec<GaleTree>,
}

impl GaleVector {
    pub fn new(components: Vec<GaleTree>) -> Self {
        assert!(!components.is_empty());
        let d = components[0].depth();
        assert!(components.iter().all(|c| c.depth() == d));
        GaleVector { components }
    }

    pub fn zero(k: usize, depth: usize) -> Self {
        GaleVector::new((0..k).map(|_| GaleTree::zero(depth)).collect())
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn depth(&self) -> usize {
        self.components[0].depth()
    }

    pub fn component(&self, j: usize) -> &GaleTree {
        &self.components[j]
    }

    pub fn components(&self) -> &[GaleTree] {
        &self.components
    }

    pub fn scale(&self, c: &Q) -> GaleVector {
        GaleVector::new(self.components.iter().map(|t| t.scale(c)).collect())
    }

    pub fn extract_under(&self, rho: &BitString) -> GaleVector {
        GaleVector::new(self.components.iter().map(|t| t.extract_under(rho)).collect())
    }

    pub fn truncate(&self, n: usize) -> GaleVector {
        GaleVector::new(self.components.iter().map(|t| t.truncate(n)).collect())
    }
}

/// `||M(sigma)||_1`: the component sum at one node.
pub fn l1_at(v: &GaleVector, s: &BitString) -> Q {
    v.components.iter().map(|t| t.value(s)).sum()
}

/// A nonempty sequence of snapshots of equal depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxSequence {
    snapshots: Vec<GaleTree>,
}

impl ApproxSequence {
    pub fn new(snapshots: Vec<GaleTree>) -> Self {
        assert!(!snapshots.is_empty());
        let d = snapshots[0].depth();
        assert!(snapshots.iter().all(|s| s.depth() == d));
        ApproxSequence { snapshots }
    }

    pub fn snapshots(&self) -> &[GaleTree] {
        &self.snapshots
    }

    pub fn depth(&self) -> usize {
        self.snapshots[0].depth()
    }

    pub fn push(&self, t: GaleTree) -> ApproxSequence {
        let mut v = self.snapshots.clone();
        v.push(t);
        ApproxSequence::new(v)
    }

    /// Subtree extraction applied to every snapshot.
    pub fn extract_under(&self, rho: &BitString) -> ApproxSequence {
        ApproxSequence::new(self.snapshots.iter().map(|t| t.extract_under(rho)).collect())
    }

    pub fn scale(&self, c: &Q) -> ApproxSequence {
        ApproxSequence::new(self.snapshots.iter().map(|t| t.scale(c)).collect())
    }
}

/// Result of the supermartingale check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupermartingaleCheck {
    pub ok: bool,
    /// First internal node violating `2 M(s) >= M(s0) + M(s1)`.
    pub violation: Option<BitString>,
    /// Equality held everywhere.
    pub martingale: bool,
}

/// Checks `2 M(sigma) >= M(sigma0) + M(sigma1)` on every internal node.
pub fn is_supermartingale(m: &GaleTree) -> SupermartingaleCheck {
    let mut martingale = true;
    for len in 0..m.depth() {
        for off in 0..(1u32 << len) {
            let s = BitString::from_heap(len, off);
            let lhs = m.value(&s) + m.value(&s);
            let rhs = m.value(&s.push(0)) + m.value(&s.push(1));
            if lhs < rhs {
                return SupermartingaleCheck {
                    ok: false,
                    violation: Some(s),
                    martingale: false,
                };
            }
            if lhs != rhs {
                martingale = false;
            }
        }
    }
    SupermartingaleCheck {
        ok: true,
        violation: None,
        martingale,
    }
}

/// `M` is `i`-sided at `sigma`: the `i`-child's capital weakly dominates.
pub fn is_sided_at(m: &GaleTree, sigma: &BitString, i: u8) -> bool {
    assert!(sigma.len() < m.depth());
    assert!(i < 2);
    m.value(&sigma.push(i)) >= m.value(&sigma.push(1 - i))
}

/// `M` is `p`-sided: `p(sigma)`-sided where `p` is defined, children equal
/// where it is not.
pub fn is_p_sided(m: &GaleTree, p: &SidePolicy) -> bool {
    for len in 0..m.depth() {
        for off in 0..(1u32 << len) {
            let s = BitString::from_heap(len, off);
            match p.get(&s) {
                Some(b) => {
                    if !is_sided_at(m, &s, b) {
                        return false;
                    }
                }
                None => {
                    if m.value(&s.push(0)) != m.value(&s.push(1)) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// `(l,i)`-betting: no capital increase at tree levels congruent to `i` mod `l`.
pub fn is_li_betting(m: &GaleTree, l: usize, i: usize) -> bool {
    assert!(i < l);
    for len in 0..m.depth() {
        if len % l != i {
            continue;
        }
        for off in 0..(1u32 << len) {
            let s = BitString::from_heap(len, off);
            let v = m.value(&s);
            if v < m.value(&s.push(0)) || v < m.value(&s.push(1)) {
                return false;
            }
        }
    }
    true
}

/// `M` dominates `M0` pointwise on `2^{<= depth}`.
pub fn dominates(m: &GaleTree, m0: &GaleTree) -> bool {
    assert_eq!(m.depth(), m0.depth(), "dominates: depth mismatch");
    m.values.iter().zip(&m0.values).all(|(a, b)| a >= b)
}

/// Orientation a node has been strictly committed to across a sequence.
fn strict_orientation(snapshots: &[GaleTree], s: &BitString) -> (bool, bool) {
    let mut zero = false;
    let mut one = false;
    for t in snapshots {
        let v0 = t.value(&s.push(0));
        let v1 = t.value(&s.push(1));
        if v0 > v1 {
            zero = true;
        } else if v1 > v0 {
            one = true;
        }
    }
    (zero, one)
}

/// Membership in the kastergale class: supermartingale snapshots,
/// nondecreasing, and no node ever strictly favored in both directions
/// across the sequence (symmetric closure of the one-direction phrasing).
pub fn kaster_consistent(seq: &ApproxSequence) -> bool {
    let snaps = seq.snapshots();
    for t in snaps {
        if !is_supermartingale(t).ok {
            return false;
        }
    }
    for w in snaps.windows(2) {
        if !dominates(&w[1], &w[0]) {
            return false;
        }
    }
    let depth = seq.depth();
    for len in 0..depth {
        for off in 0..(1u32 << len) {
            let s = BitString::from_heap(len, off);
            let (zero, one) = strict_orientation(snaps, &s);
            if zero && one {
                return false;
            }
        }
    }
    true
}

/// Which restricted class an approximation sequence is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaleClass {
    Kaster,
    Much { l: usize, i: usize },
}

impl GaleClass {
    pub fn member(&self, seq: &ApproxSequence) -> bool {
        match self {
            GaleClass::Kaster => kaster_consistent(seq),
            GaleClass::Much { l, i } => {
                let snaps = seq.snapshots();
                snaps.iter().all(|t| is_supermartingale(t).ok && is_li_betting(t, *l, *i))
                    && snaps.windows(2).all(|w| dominates(&w[1], &w[0]))
            }
        }
    }
}

impl fmt::Display for GaleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaleClass::Kaster => write!(f, "kaster"),
            GaleClass::Much { l, i } => write!(f, "much(l={l},i={i})"),
        }
    }
}

/// One line of a meta-check report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetaFailure {
    pub check: String,
    pub detail: String,
}

/// Spot-verifies the closure properties of a class on a given member:
/// subsequence-closure, scale-closure (scalings 1/2, 2, 3), nondecreasing.
pub fn class_meta_checks(seq: &ApproxSequence, class: GaleClass) -> Vec<MetaFailure> {
    let mut failures = Vec::new();
    if !class.member(seq) {
        failures.push(MetaFailure {
            check: "membership".into(),
            detail: format!("sequence is not a member of {class}"),
        });
    }
    // nondecreasing
    for (i, w) in seq.snapshots().windows(2).enumerate() {
        if !dominates(&w[1], &w[0]) {
            failures.push(MetaFailure {
                check: "nondecreasing".into(),
                detail: format!("snapshot {} does not dominate snapshot {}", i + 1, i),
            });
        }
    }
    // subsequence-closed: all subsequences when small, a fixed family otherwise
    let n = seq.snapshots().len();
    let masks: Vec<u64> = if n <= 6 {
        (1..(1u64 << n)).collect()
    } else {
        let mut m = vec![(1u64 << n) - 1, 1, 1 << (n - 1)];
        m.push(0x5555_5555_5555_5555 & ((1 << n) - 1)); // alternating
        m.push((1 << (n / 2)) - 1); // prefix
        m
    };
    for mask in masks {
        let sub: Vec<GaleTree> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| seq.snapshots()[i].clone())
            .collect();
        if sub.is_empty() {
            continue;
        }
        if !class.member(&ApproxSequence::new(sub)) {
            failures.push(MetaFailure {
                check: "subsequence-closed".into(),
                detail: format!("subsequence mask {mask:#b} left the class"),
            });
        }
    }
    // scale-closed for 1/2, 2, 3
    for c in [crate::ratio::q(1, 2), crate::ratio::q_int(2), crate::ratio::q_int(3)] {
        if !class.member(&seq.scale(&c)) {
            failures.push(MetaFailure {
                check: "scale-closed".into(),
                detail: format!("scaling by {} left the class", fmt_frac(&c)),
            });
        }
    }
    failures
}
