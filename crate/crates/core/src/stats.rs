//! Conditional expectation and variance of gale vectors over prefix-free
//! sets, martingale completion, and the two variance inequalities with
//! seeded samplers for them.

use crate::gales::{is_sided_at, is_supermartingale, GaleTree, GaleVector};
use crate::ratio::{q_int, q_one, q_zero, Q};
use crate::strings::{BitString, PrefixFreeSet};
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

/// A refining sequence of prefix-free full covers of the space.
#[derive(Clone, Debug)]
pub struct LevelChain {
    levels: Vec<PrefixFreeSet>,
}

impl LevelChain {
    /// Validates: each level covers the full space, and each member of level
    /// `m+1` extends some member of level `m`.
    pub fn new(levels: Vec<PrefixFreeSet>) -> Result<Self, String> {
        if levels.is_empty() {
            return Err("level chain must be nonempty".into());
        }
        for (i, level) in levels.iter().enumerate() {
            if level.measure() != q_one() {
                return Err(format!("level {i} does not cover the space"));
            }
        }
        for w in levels.windows(2) {
            for s in w[1].members() {
                if !w[0].members().iter().any(|r| r.is_prefix_of(s)) {
                    return Err(format!("{s} extends no member of the previous level"));
                }
            }
        }
        Ok(LevelChain { levels })
    }

    pub fn levels(&self) -> &[PrefixFreeSet] {
        &self.levels
    }

    /// Number of refinement steps.
    pub fn steps(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn max_depth(&self) -> usize {
        self.levels
            .iter()
            .flat_map(|l| l.members().iter().map(|s| s.len()))
            .max()
            .unwrap_or(0)
    }
}

/// `E(M|B)` component-wise: `(1/m(B)) * sum_{s in B} M_j(s) 2^-|s|`.
pub fn cond_expectation(v: &GaleVector, b: &PrefixFreeSet) -> Result<Vec<Q>, String> {
    if b.is_empty() {
        return Err("conditional expectation over an empty set".into());
    }
    let mb = b.measure();
    let mut out = Vec::with_capacity(v.k());
    for j in 0..v.k() {
        let mut acc = q_zero();
        for s in b.members() {
            if s.len() > v.depth() {
                return Err(format!("{s} deeper than the gale vector"));
            }
            acc += v.component(j).value(s) * s.measure();
        }
        out.push(acc / mb.clone());
    }
    Ok(out)
}

/// `Var(M|B) = (1/m(B)) * sum_{s in B} ||M(s) - E(M|B)||_2^2 * 2^-|s|`.
pub fn cond_variance(v: &GaleVector, b: &PrefixFreeSet) -> Result<Q, String> {
    let e = cond_expectation(v, b)?;
    let mb = b.measure();
    let mut acc = q_zero();
    for s in b.members() {
        for j in 0..v.k() {
            let d = v.component(j).value(s) - &e[j];
            acc += &d * &d * s.measure();
        }
    }
    Ok(acc / mb)
}

/// The martingale agreeing with the given leaf values: internal nodes are
/// exact averages of their children.
pub fn martingale_completion(depth: usize, leaves: &[Q]) -> GaleTree {
    assert_eq!(leaves.len(), 1 << depth);
    assert!(leaves.iter().all(crate::ratio::is_nonneg));
    let mut t = GaleTree::zero(depth);
    for (off, v) in leaves.iter().enumerate() {
        t.set(&BitString::from_heap(depth, off as u32), v.clone());
    }
    for len in (0..depth).rev() {
        for off in 0..(1u32 << len) {
            let s = BitString::from_heap(len, off);
            let avg = (t.value(&s.push(0)) + t.value(&s.push(1))) / q_int(2);
            t.set(&s, avg);
        }
    }
    t
}

/// For `rho` in one chain level, the next level restricted below `rho`.
fn refinement_below(rho: &BitString, next: &PrefixFreeSet) -> PrefixFreeSet {
    PrefixFreeSet::new(
        next.members()
            .iter()
            .filter(|s| rho.is_prefix_of(s))
            .copied()
            .collect(),
    )
    .expect("subset of a prefix-free set")
}

/// Total conditional-variance budget along a chain:
/// `sum_{level} sum_{rho in level} m(rho) * Var(V | next-level below rho)`.
pub fn variance_budget(v: &GaleVector, chain: &LevelChain) -> Result<Q, String> {
    if chain.max_depth() > v.depth() {
        return Err("chain deeper than the gale vector".into());
    }
    let mut acc = q_zero();
    for w in chain.levels().windows(2) {
        for rho in w[0].members() {
            let below = refinement_below(rho, &w[1]);
            if below.is_empty() {
                return Err(format!("no refinement below {rho}"));
            }
            acc += rho.measure() * cond_variance(v, &below)?;
        }
    }
    Ok(acc)
}

/// Precondition failures of the check operations are reported, never assumed.
#[derive(Clone, Debug, Serialize)]
pub struct PreconditionViolation {
    pub what: String,
}

/// The two-component root-deficit inequality, checked in squared form:
/// `(1 - ||M(root)||_1)^2 <= C^2 * Var(M | {0,11})`, or a nonpositive deficit.
///
/// Preconditions: component 0 is 0-sided everywhere and component 1 is
/// 1-sided everywhere, `||M(11)||_1 >= 1`, `||M(0)||_1 >= 1`, both
/// components supermartingales.
pub fn check_claim_sqrtvar(v: &GaleVector, bound_c: &Q) -> Result<bool, PreconditionViolation> {
    if v.k() != 2 {
        return Err(PreconditionViolation {
            what: format!("need exactly 2 components, got {}", v.k()),
        });
    }
    if v.depth() < 2 {
        return Err(PreconditionViolation {
            what: "need depth >= 2".into(),
        });
    }
    for j in 0..2 {
        if !is_supermartingale(v.component(j)).ok {
            return Err(PreconditionViolation {
                what: format!("component {j} is not a supermartingale"),
            });
        }
        for len in 0..v.depth() {
            for off in 0..(1u32 << len) {
                let s = BitString::from_heap(len, off);
                if !is_sided_at(v.component(j), &s, j as u8) {
                    return Err(PreconditionViolation {
                        what: format!("component {j} is not {j}-sided at {s}"),
                    });
                }
            }
        }
    }
    let zero = BitString::parse("0").unwrap();
    let oneone = BitString::parse("11").unwrap();
    for node in [&zero, &oneone] {
        if crate::gales::l1_at(v, node) < q_one() {
            return Err(PreconditionViolation {
                what: format!("||M({node})||_1 < 1"),
            });
        }
    }
    let b = PrefixFreeSet::new(vec![zero, oneone]).unwrap();
    let deficit = q_one() - crate::gales::l1_at(v, &BitString::empty());
    if deficit <= q_zero() {
        return Ok(true);
    }
    let var = cond_variance(v, &b).expect("nonempty B");
    Ok(&deficit * &deficit <= bound_c * bound_c * var)
}

/// The chain-budget inequality: `variance_budget(V, chain) <= c_k * (1 + m*eps)`
/// where `m` is the number of refinement steps, `eps = max(0, 1 - integral of
/// ||M||_1 over the full-depth leaves)`, and `c_k` defaults to `8k`.
///
/// Preconditions: `||M(root)||_1 <= 1`, every component `<= 2` everywhere and
/// a supermartingale.
pub fn check_budget_bound(
    v: &GaleVector,
    chain: &LevelChain,
    constant: &Q,
) -> Result<bool, PreconditionViolation> {
    for j in 0..v.k() {
        if !is_supermartingale(v.component(j)).ok {
            return Err(PreconditionViolation {
                what: format!("component {j} is not a supermartingale"),
            });
        }
        for (s, val) in v.component(j).iter() {
            if val > &q_int(2) {
                return Err(PreconditionViolation {
                    what: format!("component {j} exceeds 2 at {s}"),
                });
            }
        }
    }
    if crate::gales::l1_at(v, &BitString::empty()) > q_one() {
        return Err(PreconditionViolation {
            what: "||M(root)||_1 > 1".into(),
        });
    }
    let eps = leaf_mass_deficit(v);
    let budget = variance_budget(v, chain).map_err(|e| PreconditionViolation { what: e })?;
    let m = q_int(chain.steps() as i64);
    Ok(budget <= constant * (q_one() + m * eps))
}

/// `max(0, 1 - integral over 2^depth of ||M||_1)`.
pub fn leaf_mass_deficit(v: &GaleVector) -> Q {
    let depth = v.depth();
    let mut mass = q_zero();
    for off in 0..(1u32 << depth) {
        let s = BitString::from_heap(depth, off);
        mass += crate::gales::l1_at(v, &s) * s.measure();
    }
    let deficit = q_one() - mass;
    if deficit < q_zero() {
        q_zero()
    } else {
        deficit
    }
}

/// Default absolute constant for the square-root claim.
pub fn default_sqrtvar_constant() -> Q {
    q_int(4)
}

/// Default chain-budget constant for `k` components.
pub fn default_budget_constant(k: usize) -> Q {
    q_int(8 * k as i64)
}

// ---------------------------------------------------------------------------
// Samplers. Dyadic values keep denominators small and arithmetic fast.

/// Random dyadic rational in `[0, hi)` with granularity `2^-grain`.
fn dyadic<R: Rng>(rng: &mut R, hi: u32, grain: usize) -> Q {
    let steps = (u64::from(hi)) << grain;
    Q::new((rng.gen_range(0..steps) as i64).into(), (1i64 << grain).into())
}

/// Samples a valid instance for the square-root claim: a 0-sided/1-sided
/// pair of depth-2 supermartingales with `||M(0)||_1, ||M(11)||_1 >= 1`.
pub fn sample_sqrtvar_instance<R: Rng>(rng: &mut R) -> GaleVector {
    loop {
        let mut comps = Vec::new();
        for j in 0..2u8 {
            let mut t = GaleTree::zero(2);
            // leaves first
            for off in 0..4u32 {
                t.set(&BitString::from_heap(2, off), dyadic(rng, 4, 4));
            }
            // order each sibling pair per sidedness by swapping
            for len in (0..2usize).rev() {
                for off in 0..(1u32 << len) {
                    let s = BitString::from_heap(len, off);
                    let (c0, c1) = (s.push(0), s.push(1));
                    let swap = if j == 0 {
                        t.value(&c0) < t.value(&c1)
                    } else {
                        t.value(&c1) < t.value(&c0)
                    };
                    if swap && len == 1 {
                        let (a, b) = (t.value(&c0).clone(), t.value(&c1).clone());
                        t.set(&c0, b);
                        t.set(&c1, a);
                    } else if swap {
                        // swap the whole depth-1 subtrees
                        let sub0 = t.extract_under(&c0);
                        let sub1 = t.extract_under(&c1);
                        for (rel, val) in sub1.iter() {
                            let (r, v) = (rel, val.clone());
                            t.set(&c0.concat(&r), v);
                        }
                        for (rel, val) in sub0.iter() {
                            let (r, v) = (rel, val.clone());
                            t.set(&c1.concat(&r), v);
                        }
                    }
                    let avg = (t.value(&c0) + t.value(&c1)) / q_int(2);
                    t.set(&s, avg + dyadic(rng, 1, 4));
                }
            }
            comps.push(t);
        }
        let v = GaleVector::new(comps);
        let zero = BitString::parse("0").unwrap();
        let oneone = BitString::parse("11").unwrap();
        let anchor = std::cmp::min(
            crate::gales::l1_at(&v, &zero),
            crate::gales::l1_at(&v, &oneone),
        );
        if anchor.is_zero() {
            continue;
        }
        // normalize so both anchors reach 1; sidedness is scale-invariant
        let scaled = v.scale(&(q_one() / anchor));
        debug_assert!(is_supermartingale(scaled.component(0)).ok);
        return scaled;
    }
}

/// Samples a valid budget-claim instance plus a chain: `k` supermartingales
/// of the given depth, all values `<= 2`, root `||.||_1 <= 1`, built
/// top-down by splitting with bounded loss (occasionally bimodal to make
/// variances substantial).
pub fn sample_budget_instance<R: Rng>(
    rng: &mut R,
    k: usize,
    depth: usize,
    levels: usize,
) -> (GaleVector, LevelChain) {
    let two = q_int(2);
    let mut comps = Vec::new();
    for _ in 0..k {
        let mut t = GaleTree::zero(depth);
        // component roots in [1/2k, 1/k) so the root 1-norm stays below 1
        let root = dyadic(rng, 1, 4) / q_int(2 * k as i64) + Q::new(1.into(), (2 * k as i64).into());
        t.set(&BitString::empty(), root.clone().min(two.clone()));
        for len in 0..depth {
            for off in 0..(1u32 << len) {
                let s = BitString::from_heap(len, off);
                let v = t.value(&s).clone();
                let bimodal = rng.gen_bool(0.5);
                let (a, b) = if bimodal {
                    // push toward {0, 2v} with capped doubling
                    let hi = (&v * &two).min(two.clone());
                    let lo = &v * &two - &hi;
                    if rng.gen_bool(0.5) {
                        (hi, lo)
                    } else {
                        let h = hi;
                        let l = lo;
                        (l, h)
                    }
                } else {
                    // near-even split with a small supermartingale loss
                    let loss = dyadic(rng, 1, 6).min(v.clone());
                    let rem = &v * &two - &loss;
                    let half = &rem / &two;
                    let tilt = dyadic(rng, 1, 6).min(half.clone());
                    ((&half + &tilt).min(two.clone()), (&half - &tilt).max(q_zero()))
                };
                debug_assert!(&a + &b <= &v * &two);
                t.set(&s.push(0), a);
                t.set(&s.push(1), b);
            }
        }
        comps.push(t);
    }
    let v = GaleVector::new(comps);
    let chain = sample_chain(rng, depth, levels);
    (v, chain)
}

/// A fixed valid instance whose budget (3/2) exceeds the corrupted constant
/// 1 while staying inside the true `8k` bound. Two components place their
/// leaf mass on disjoint quarter cylinders.
pub fn budget_violation_witness() -> GaleVector {
    let two = q_int(2);
    let zero = q_zero();
    let c0 = martingale_completion(2, &[two.clone(), zero.clone(), zero.clone(), zero.clone()]);
    let c1 = martingale_completion(2, &[zero.clone(), two, zero.clone(), zero]);
    GaleVector::new(vec![c0, c1])
}

/// Random refining chain of full covers, `levels` refinement steps, members
/// no deeper than `depth`.
pub fn sample_chain<R: Rng>(rng: &mut R, depth: usize, levels: usize) -> LevelChain {
    let mut current = vec![BitString::empty()];
    let mut out = vec![PrefixFreeSet::new(current.clone()).unwrap()];
    for _ in 0..levels {
        let mut next = Vec::new();
        for s in &current {
            if s.len() < depth && rng.gen_bool(0.7) {
                next.push(s.push(0));
                next.push(s.push(1));
            } else {
                next.push(*s);
            }
        }
        current = next;
        out.push(PrefixFreeSet::new(current.clone()).unwrap());
    }
    LevelChain::new(out).expect("constructed chain is valid")
}
