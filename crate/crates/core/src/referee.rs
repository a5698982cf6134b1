//! Game state machines: every game definition's rules and win criteria.
//!
//! A `GameState` is an immutable value; moves return new states. Baby's
//! replies are validated in a fixed rule order so each failure mode has a
//! distinct rejection code, and the win check runs after every accepted
//! reply.

use crate::gales::{
    is_li_betting, is_p_sided, is_sided_at, is_supermartingale, l1_at, GaleClass, GaleTree,
    GaleVector, SidePolicy,
};
use crate::ratio::{fmt_frac, q_one, Q};
use crate::stats::cond_variance;
use crate::strings::{conditional_measure, measure, BitString, PrefixFreeSet};
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GameKind {
    Sided {
        #[serde(with = "crate::ratio::frac_serde")]
        c: Q,
        #[serde(with = "crate::ratio::frac_serde")]
        d: Q,
        n: usize,
    },
    DynamicSided {
        #[serde(with = "crate::ratio::frac_serde")]
        a: Q,
        n: usize,
    },
    RestrictedDynamicSided {
        #[serde(with = "crate::ratio::frac_serde")]
        a: Q,
        #[serde(with = "crate::ratio::frac_serde")]
        delta: Q,
        n: usize,
    },
    PartialSided {
        #[serde(with = "crate::ratio::frac_serde")]
        c: Q,
        n: usize,
        k: usize,
    },
    DynamicPartial {
        #[serde(with = "crate::ratio::frac_serde")]
        a: Q,
        n: usize,
        k: usize,
    },
    RestrictedDynamicPartial {
        #[serde(with = "crate::ratio::frac_serde")]
        a: Q,
        #[serde(with = "crate::ratio::frac_serde")]
        delta: Q,
        n: usize,
        k: usize,
    },
    VariancePartial {
        #[serde(with = "crate::ratio::frac_serde")]
        a: Q,
        #[serde(with = "crate::ratio::frac_serde")]
        big_delta: Q,
        m: usize,
        k: usize,
    },
    ClassGame {
        class: GaleClass,
        #[serde(with = "crate::ratio::frac_serde")]
        c: Q,
        n: usize,
        k: usize,
    },
    VarianceClassGame {
        class: GaleClass,
        #[serde(with = "crate::ratio::frac_serde")]
        a: Q,
        #[serde(with = "crate::ratio::frac_serde")]
        big_delta: Q,
        m: usize,
        k: usize,
    },
}

/// A game kind plus the capital scale multiplying every threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub kind: GameKind,
    #[serde(with = "crate::ratio::frac_serde")]
    pub scale: Q,
}

#[derive(Clone, Debug, thiserror::Error, PartialEq)]
pub enum SpecError {
    #[error("invalid game parameters: {0}")]
    Invalid(String),
}

impl GameSpec {
    pub fn new(kind: GameKind) -> Result<Self, SpecError> {
        GameSpec::with_scale(kind, q_one())
    }

    pub fn with_scale(kind: GameKind, scale: Q) -> Result<Self, SpecError> {
        let spec = GameSpec { kind, scale };
        spec.validate()?;
        Ok(spec)
    }

    /// `(c, n)`-sided-game: `d` defaults to 1.
    pub fn sided(c: Q, n: usize) -> Result<Self, SpecError> {
        GameSpec::new(GameKind::Sided { c, d: q_one(), n })
    }

    fn validate(&self) -> Result<(), SpecError> {
        use GameKind::*;
        let bad = |m: String| Err(SpecError::Invalid(m));
        if !self.scale.is_positive() {
            return bad("scale must be positive".into());
        }
        match &self.kind {
            Sided { c, d, n } => {
                if c.is_negative() || c > d {
                    return bad(format!("need 0 <= c <= d, got c={} d={}", fmt_frac(c), fmt_frac(d)));
                }
                if *n < 1 {
                    return bad("n >= 1".into());
                }
            }
            DynamicSided { a, n } | DynamicPartial { a, n, .. } => {
                if !a.is_positive() || *n < 1 {
                    return bad("need a > 0, n >= 1".into());
                }
            }
            RestrictedDynamicSided { a, delta, n }
            | RestrictedDynamicPartial { a, delta, n, .. } => {
                if !a.is_positive() || !delta.is_positive() || *n < 1 {
                    return bad("need a > 0, delta > 0, n >= 1".into());
                }
            }
            VariancePartial { a, big_delta, m, .. }
            | VarianceClassGame { a, big_delta, m, .. } => {
                if !a.is_positive() || !big_delta.is_positive() || *m < 1 {
                    return bad("need a > 0, Delta > 0, m >= 1".into());
                }
            }
            PartialSided { c, n, .. } | ClassGame { c, n, .. } => {
                if c.is_negative() || *n < 1 {
                    return bad("need c >= 0, n >= 1".into());
                }
            }
        }
        if let Some(k) = self.explicit_k() {
            if k < 1 {
                return bad("k >= 1".into());
            }
        }
        Ok(())
    }

    fn explicit_k(&self) -> Option<usize> {
        use GameKind::*;
        match &self.kind {
            PartialSided { k, .. }
            | DynamicPartial { k, .. }
            | RestrictedDynamicPartial { k, .. }
            | VariancePartial { k, .. }
            | ClassGame { k, .. }
            | VarianceClassGame { k, .. } => Some(*k),
            _ => None,
        }
    }

    /// Number of gale components Baby must present.
    pub fn k(&self) -> usize {
        self.explicit_k().unwrap_or(2)
    }

    /// Depth of the tree Alice enumerates leaves of.
    pub fn depth(&self) -> usize {
        use GameKind::*;
        match &self.kind {
            Sided { n, .. }
            | DynamicSided { n, .. }
            | RestrictedDynamicSided { n, .. }
            | PartialSided { n, .. }
            | DynamicPartial { n, .. }
            | RestrictedDynamicPartial { n, .. }
            | ClassGame { n, .. } => *n,
            VariancePartial { m, .. } | VarianceClassGame { m, .. } => *m,
        }
    }

    /// The dynamic-goal parameter, when the kind has one.
    pub fn dynamic_a(&self) -> Option<&Q> {
        use GameKind::*;
        match &self.kind {
            DynamicSided { a, .. }
            | RestrictedDynamicSided { a, .. }
            | DynamicPartial { a, .. }
            | RestrictedDynamicPartial { a, .. }
            | VariancePartial { a, .. }
            | VarianceClassGame { a, .. } => Some(a),
            _ => None,
        }
    }

    /// Catching must hold at the enumerated leaf itself (restriction rule I).
    pub fn catch_at_leaf(&self) -> bool {
        use GameKind::*;
        matches!(
            self.kind,
            RestrictedDynamicSided { .. }
                | RestrictedDynamicPartial { .. }
                | VariancePartial { .. }
                | VarianceClassGame { .. }
        )
    }

    /// Catching threshold (`d` for the plain sided game, 1 otherwise),
    /// before scaling.
    pub fn catch_threshold(&self) -> Q {
        match &self.kind {
            GameKind::Sided { d, .. } => d.clone(),
            _ => q_one(),
        }
    }

    /// Restriction rule II ceiling `1 + delta`, before scaling.
    pub fn restriction_ceiling(&self) -> Option<Q> {
        use GameKind::*;
        match &self.kind {
            RestrictedDynamicSided { delta, .. } | RestrictedDynamicPartial { delta, .. } => {
                Some(q_one() + delta)
            }
            _ => None,
        }
    }

    pub fn is_partial(&self) -> bool {
        use GameKind::*;
        matches!(
            self.kind,
            PartialSided { .. }
                | DynamicPartial { .. }
                | RestrictedDynamicPartial { .. }
                | VariancePartial { .. }
        )
    }

    pub fn class(&self) -> Option<GaleClass> {
        match &self.kind {
            GameKind::ClassGame { class, .. } | GameKind::VarianceClassGame { class, .. } => {
                Some(*class)
            }
            _ => None,
        }
    }

    /// Fixed-threshold win target (sided / partial-sided / class games).
    pub fn threshold_c(&self) -> Option<&Q> {
        use GameKind::*;
        match &self.kind {
            Sided { c, .. } | PartialSided { c, .. } | ClassGame { c, .. } => Some(c),
            _ => None,
        }
    }

    pub fn variance_delta(&self) -> Option<&Q> {
        use GameKind::*;
        match &self.kind {
            VariancePartial { big_delta, .. } | VarianceClassGame { big_delta, .. } => {
                Some(big_delta)
            }
            _ => None,
        }
    }

    pub fn id(&self) -> String {
        use GameKind::*;
        let body = match &self.kind {
            Sided { c, d, n } => format!("sided:c={},d={},n={n}", fmt_frac(c), fmt_frac(d)),
            DynamicSided { a, n } => format!("dynamic-sided:a={},n={n}", fmt_frac(a)),
            RestrictedDynamicSided { a, delta, n } => {
                format!("restricted-dynamic-sided:a={},delta={},n={n}", fmt_frac(a), fmt_frac(delta))
            }
            PartialSided { c, n, k } => format!("partial-sided:c={},n={n},k={k}", fmt_frac(c)),
            DynamicPartial { a, n, k } => format!("dynamic-partial:a={},n={n},k={k}", fmt_frac(a)),
            RestrictedDynamicPartial { a, delta, n, k } => format!(
                "restricted-dynamic-partial:a={},delta={},n={n},k={k}",
                fmt_frac(a),
                fmt_frac(delta)
            ),
            VariancePartial { a, big_delta, m, k } => format!(
                "variance-partial:a={},Delta={},m={m},k={k}",
                fmt_frac(a),
                fmt_frac(big_delta)
            ),
            ClassGame { class, c, n, k } => {
                format!("class-game:{class},c={},n={n},k={k}", fmt_frac(c))
            }
            VarianceClassGame { class, a, big_delta, m, k } => format!(
                "variance-class-game:{class},a={},Delta={},m={m},k={k}",
                fmt_frac(a),
                fmt_frac(big_delta)
            ),
        };
        if self.scale == q_one() {
            body
        } else {
            format!("{body},scale={}", fmt_frac(&self.scale))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WinCriterion {
    Threshold,
    TypeA,
    TypeB,
}

/// Why a Baby reply was rejected. Each validation rule has its own code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum Rejection {
    #[error("SHAPE: wrong component count, depth, or policy layout")]
    Shape,
    #[error("SUPERMARTINGALE: a component violates the supermartingale rule")]
    Supermartingale,
    #[error("SIDEDNESS: a component is not sided as required")]
    Sidedness,
    #[error("POLICY_RETRACTION: a policy does not extend its predecessor")]
    PolicyRetraction,
    #[error("CLASS: the approximation sequence left its class")]
    Class,
    #[error("DOMINATION: a component does not dominate its predecessor")]
    Domination,
    #[error("CATCHING: an enumerated string has no catching point")]
    Catching,
    #[error("RESTRICTION_I: an enumerated string is not caught at itself")]
    RestrictionI,
    #[error("RESTRICTION_II: capital exceeds the ceiling somewhere")]
    RestrictionII,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MoveError {
    #[error("GAME_OVER: the game has ended")]
    GameOver,
    #[error("OUT_OF_TURN: not this player's turn")]
    OutOfTurn,
    #[error("DUPLICATE: string already enumerated")]
    Duplicate,
    #[error("WRONG_LENGTH: string has the wrong length")]
    WrongLength,
    #[error("GAME_KIND_MISMATCH: {0}")]
    KindMismatch(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Ongoing,
    AliceWon(WinCriterion),
    InvalidBaby(Rejection),
    Exhausted,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ongoing => write!(f, "ongoing"),
            Status::AliceWon(WinCriterion::Threshold) => write!(f, "alice_won:threshold"),
            Status::AliceWon(WinCriterion::TypeA) => write!(f, "alice_won:type_a"),
            Status::AliceWon(WinCriterion::TypeB) => write!(f, "alice_won:type_b"),
            Status::InvalidBaby(r) => write!(f, "invalid_baby:{r:?}"),
            Status::Exhausted => write!(f, "exhausted"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Turn {
    Alice,
    Baby,
}

/// Full game state; every accessor is cheap, every move returns a new value.
#[derive(Clone, Debug)]
pub struct GameState {
    spec: GameSpec,
    round: usize,
    enumerated: Vec<BitString>,
    history: Vec<GaleVector>,
    policies: Vec<Vec<SidePolicy>>,
    status: Status,
    turn: Turn,
}

/// Round 0, empty enumeration, Alice to move.
pub fn new_game(spec: GameSpec) -> GameState {
    GameState {
        spec,
        round: 0,
        enumerated: Vec::new(),
        history: Vec::new(),
        policies: Vec::new(),
        status: Status::Ongoing,
        turn: Turn::Alice,
    }
}

impl GameState {
    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn turn(&self) -> Turn {
        self.turn
    }

    pub fn enumerated(&self) -> &[BitString] {
        &self.enumerated
    }

    pub fn history(&self) -> &[GaleVector] {
        &self.history
    }

    pub fn policies(&self) -> &[Vec<SidePolicy>] {
        &self.policies
    }

    pub fn latest(&self) -> Option<&GaleVector> {
        self.history.last()
    }

    pub fn latest_policies(&self) -> Option<&Vec<SidePolicy>> {
        self.policies.last()
    }

    /// `||M[t](s)||_1` of the latest snapshot, zero before any reply.
    pub fn l1_latest(&self, s: &BitString) -> Q {
        self.latest().map_or_else(crate::ratio::q_zero, |v| l1_at(v, s))
    }

    /// Measure of the enumerated set.
    pub fn cost(&self) -> Q {
        measure(&self.enumerated)
    }

    pub fn alice_move(&self, sigma: BitString) -> Result<GameState, MoveError> {
        match self.status {
            Status::Ongoing => {}
            _ => return Err(MoveError::GameOver),
        }
        if self.turn != Turn::Alice {
            return Err(MoveError::OutOfTurn);
        }
        if sigma.len() != self.spec.depth() {
            return Err(MoveError::WrongLength);
        }
        if self.enumerated.contains(&sigma) {
            return Err(MoveError::Duplicate);
        }
        let mut next = self.clone();
        next.enumerated.push(sigma);
        next.turn = Turn::Baby;
        Ok(next)
    }

    /// Validates Baby's reply in rule order; on success appends it, runs the
    /// win check, and advances the round. On failure the state is unchanged.
    pub fn baby_move(
        &self,
        v: GaleVector,
        policies: Option<Vec<SidePolicy>>,
    ) -> Result<GameState, Rejection> {
        if self.status != Status::Ongoing || self.turn != Turn::Baby {
            return Err(Rejection::Shape);
        }
        self.validate_reply(&v, policies.as_deref())?;
        let mut next = self.clone();
        next.history.push(v);
        if let Some(p) = policies {
            next.policies.push(p);
        }
        next.round += 1;
        next.turn = Turn::Alice;
        next.status = check_win(&next);
        if next.status == Status::Ongoing && next.enumerated.len() == 1 << next.spec.depth() {
            next.status = Status::Exhausted;
        }
        Ok(next)
    }

    /// The validation rules, in the order the rejection codes promise.
    fn validate_reply(&self, v: &GaleVector, policies: Option<&[SidePolicy]>) -> Result<(), Rejection> {
        let spec = &self.spec;
        let n = spec.depth();
        let k = spec.k();
        if v.k() != k || v.depth() != n {
            return Err(Rejection::Shape);
        }
        match (spec.is_partial(), policies) {
            (true, Some(p)) if p.len() == k => {
                for pol in p {
                    if pol.domain().any(|(s, _)| s.len() >= n) {
                        return Err(Rejection::Shape);
                    }
                }
            }
            (false, None) => {}
            _ => return Err(Rejection::Shape),
        }

        // (1) every component is a supermartingale
        for j in 0..k {
            if !is_supermartingale(v.component(j)).ok {
                return Err(Rejection::Supermartingale);
            }
        }

        // (2) sidedness / policy extension / class membership
        if spec.is_partial() {
            let pols = policies.expect("checked above");
            if let Some(prev) = self.policies.last() {
                for (new_p, old_p) in pols.iter().zip(prev) {
                    if !new_p.extends(old_p) {
                        return Err(Rejection::PolicyRetraction);
                    }
                }
            }
            for (j, pol) in pols.iter().enumerate() {
                if !is_p_sided(v.component(j), pol) {
                    return Err(Rejection::Sidedness);
                }
            }
        } else if let Some(class) = spec.class() {
            for j in 0..k {
                if !self.class_admits(class, v.component(j), j) {
                    return Err(Rejection::Class);
                }
            }
        } else {
            // fixed two-component layout: component j is j-sided everywhere
            for j in 0..k {
                for len in 0..n {
                    for off in 0..(1u32 << len) {
                        let s = BitString::from_heap(len, off);
                        if !is_sided_at(v.component(j), &s, j as u8) {
                            return Err(Rejection::Sidedness);
                        }
                    }
                }
            }
        }

        // (3) domination of the previous snapshot (M[-1] identically zero)
        if let Some(prev) = self.history.last() {
            for j in 0..k {
                if !crate::gales::dominates(v.component(j), prev.component(j)) {
                    return Err(Rejection::Domination);
                }
            }
        }

        // (4) catching, for all of A every round
        let need = &self.spec.scale * spec.catch_threshold();
        if spec.catch_at_leaf() {
            for s in &self.enumerated {
                if l1_at(v, s) < need {
                    return Err(Rejection::RestrictionI);
                }
            }
        } else {
            for s in &self.enumerated {
                if !s.ancestors().any(|anc| l1_at(v, &anc) >= need) {
                    return Err(Rejection::Catching);
                }
            }
        }

        // (5) restriction rule II
        if let Some(ceiling) = spec.restriction_ceiling() {
            let cap = &self.spec.scale * ceiling;
            for len in 0..=n {
                for off in 0..(1u32 << len) {
                    let s = BitString::from_heap(len, off);
                    if l1_at(v, &s) > cap {
                        return Err(Rejection::RestrictionII);
                    }
                }
            }
        }
        Ok(())
    }

    /// Incremental class admission: history components already validated.
    fn class_admits(&self, class: GaleClass, new: &GaleTree, j: usize) -> bool {
        match class {
            GaleClass::Much { l, i } => is_li_betting(new, l, i),
            GaleClass::Kaster => {
                // no node may ever be strictly favored in both directions
                let n = new.depth();
                for len in 0..n {
                    for off in 0..(1u32 << len) {
                        let s = BitString::from_heap(len, off);
                        let v0 = new.value(&s.push(0));
                        let v1 = new.value(&s.push(1));
                        let (new_zero, new_one) = (v0 > v1, v1 > v0);
                        if !(new_zero || new_one) {
                            continue;
                        }
                        for old in &self.history {
                            let o0 = old.component(j).value(&s.push(0));
                            let o1 = old.component(j).value(&s.push(1));
                            if (new_zero && o1 > o0) || (new_one && o0 > o1) {
                                return false;
                            }
                        }
                    }
                }
                true
            }
        }
    }
}

/// Evaluates the win criteria on the current state (latest reply).
pub fn check_win(state: &GameState) -> Status {
    if let Status::AliceWon(_) = state.status {
        return state.status;
    }
    let Some(v) = state.latest() else {
        return state.status;
    };
    let spec = state.spec();
    let s = &spec.scale;
    let root = BitString::empty();

    if let Some(c) = spec.threshold_c() {
        if l1_at(v, &root) >= s * c {
            return Status::AliceWon(WinCriterion::Threshold);
        }
        return Status::Ongoing;
    }

    let a = spec.dynamic_a().expect("dynamic-family game");
    let cost = state.cost();
    // type-(a): scale - ||M(root)||_1 <= scale * (1/a) * (1 - m(A));
    // a nonpositive left side counts as satisfied
    let lhs = s - l1_at(v, &root);
    let rhs = s * (q_one() - cost) / a;
    if lhs <= rhs {
        return Status::AliceWon(WinCriterion::TypeA);
    }
    if let Some(big_delta) = spec.variance_delta() {
        if !state.enumerated().is_empty() {
            let set = PrefixFreeSet::new(state.enumerated().to_vec())
                .expect("distinct equal-length leaves");
            let var = cond_variance(v, &set).expect("nonempty enumerated set");
            if var >= s * s * big_delta {
                return Status::AliceWon(WinCriterion::TypeB);
            }
        }
    }
    Status::Ongoing
}

/// Winning attention at `rho` with an explicit dynamic parameter:
/// `scale - ||M(rho)||_1 <= scale * (1/a) * (1 - m(A|rho))` and `m(A|rho) < 1`.
/// Attention is a property of a round, so a game without replies has none.
pub fn attention_with(state: &GameState, rho: &BitString, a: &Q) -> bool {
    if state.history().is_empty() {
        return false;
    }
    let cm = conditional_measure(state.enumerated(), rho);
    if cm >= q_one() {
        return false;
    }
    let s = &state.spec().scale;
    let lhs = s - state.l1_latest(rho);
    let rhs = s * (q_one() - cm) / a;
    lhs <= rhs
}

/// Winning attention using the game's own dynamic parameter.
pub fn winning_attention(state: &GameState, rho: &BitString) -> Result<bool, MoveError> {
    if rho.len() > state.spec().depth() {
        return Err(MoveError::WrongLength);
    }
    let a = state
        .spec()
        .dynamic_a()
        .ok_or(MoveError::KindMismatch("game has no dynamic parameter"))?
        .clone();
    Ok(attention_with(state, rho, &a))
}

/// Marks a rejected reply as a terminal state (used by trace replay).
pub fn mark_invalid(state: &GameState, rejection: Rejection) -> GameState {
    let mut next = state.clone();
    next.status = Status::InvalidBaby(rejection);
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{q, q_int, q_zero};

    fn bs(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    fn sided_spec(c: Q, d: Q, n: usize) -> GameSpec {
        GameSpec::new(GameKind::Sided { c, d, n }).unwrap()
    }

    /// The worked two-component reply: M0 all zero; M1 supported on the
    /// path to 11.
    fn example_pair() -> GaleVector {
        let m0 = GaleTree::zero(2);
        let m1 = GaleTree::from_sparse(
            2,
            &[("", q(1, 4)), ("1", q(1, 2)), ("11", q_int(1))],
        );
        GaleVector::new(vec![m0, m1])
    }

    #[test]
    fn new_game_examples() {
        let g = new_game(sided_spec(q(1, 2), q_one(), 3));
        assert_eq!(g.round(), 0);
        assert!(g.enumerated().is_empty());
        assert_eq!(g.status(), Status::Ongoing);

        let v = GameSpec::new(GameKind::VariancePartial {
            a: q_int(4),
            big_delta: q(1, 64),
            m: 4,
            k: 1,
        })
        .unwrap();
        let g = new_game(v);
        assert_eq!(g.status(), Status::Ongoing);

        assert!(GameSpec::new(GameKind::Sided {
            c: q_int(2),
            d: q_one(),
            n: 2
        })
        .is_err());
    }

    #[test]
    fn alice_move_errors() {
        let g = new_game(sided_spec(q(1, 2), q_one(), 2));
        let g = g.alice_move(bs("11")).unwrap();
        assert_eq!(g.turn(), Turn::Baby);
        assert_eq!(g.alice_move(bs("01")).unwrap_err(), MoveError::OutOfTurn);
        let g2 = g.baby_move(example_pair(), None).unwrap();
        assert_eq!(g2.alice_move(bs("11")).unwrap_err(), MoveError::Duplicate);
        assert_eq!(g2.alice_move(bs("0")).unwrap_err(), MoveError::WrongLength);
    }

    #[test]
    fn worked_sided_round_is_accepted() {
        let g = new_game(sided_spec(q(1, 2), q_one(), 2));
        let g = g.alice_move(bs("11")).unwrap();
        let g = g.baby_move(example_pair(), None).unwrap();
        // game continues: root 1-norm 1/4 < 1/2
        assert_eq!(g.status(), Status::Ongoing);
        assert_eq!(g.l1_latest(&BitString::empty()), q(1, 4));
        assert_eq!(g.cost(), q(1, 4));
    }

    #[test]
    fn sidedness_rejection() {
        let g = new_game(sided_spec(q(1, 2), q_one(), 2))
            .alice_move(bs("11"))
            .unwrap();
        let m0 = GaleTree::zero(2);
        let m1 = GaleTree::from_sparse(
            2,
            &[("", q(1, 4)), ("1", q(1, 2)), ("11", q_int(1)), ("10", q_int(2))],
        );
        // M1(10)=2 > M1(11): 1-sided fails at node 1; but supermartingale
        // fails first at node 1 too unless the parent is bumped
        let m1 = {
            let mut t = m1;
            t.set(&bs("1"), q(3, 2));
            t.set(&BitString::empty(), q(3, 4));
            t
        };
        let err = g.baby_move(GaleVector::new(vec![m0, m1]), None).unwrap_err();
        assert_eq!(err, Rejection::Sidedness);
    }

    #[test]
    fn catching_rejection() {
        let g = new_game(sided_spec(q(1, 2), q_one(), 2))
            .alice_move(bs("11"))
            .unwrap();
        let err = g
            .baby_move(GaleVector::zero(2, 2), None)
            .unwrap_err();
        assert_eq!(err, Rejection::Catching);
    }

    #[test]
    fn domination_rejection() {
        let g = new_game(sided_spec(q(1, 2), q_one(), 2))
            .alice_move(bs("11"))
            .unwrap();
        let g = g.baby_move(example_pair(), None).unwrap();
        let g = g.alice_move(bs("00")).unwrap();
        // fresh reply catching 00 but dropping the old capital on 11's path
        let m0 = GaleTree::from_sparse(2, &[("", q(1, 4)), ("0", q(1, 2)), ("00", q_int(1))]);
        let err = g
            .baby_move(GaleVector::new(vec![m0, GaleTree::zero(2)]), None)
            .unwrap_err();
        assert_eq!(err, Rejection::Domination);
    }

    #[test]
    fn threshold_win_is_inclusive() {
        let g = new_game(sided_spec(q(1, 2), q_one(), 2))
            .alice_move(bs("11"))
            .unwrap();
        let m0 = GaleTree::zero(2);
        let m1 = GaleTree::from_sparse(
            2,
            &[("", q(1, 2)), ("1", q_int(1)), ("11", q_int(2)), ("10", q_zero())],
        );
        let g = g.baby_move(GaleVector::new(vec![m0, m1]), None).unwrap();
        assert_eq!(g.status(), Status::AliceWon(WinCriterion::Threshold));
        assert!(matches!(
            g.alice_move(bs("00")).unwrap_err(),
            MoveError::GameOver
        ));
    }

    #[test]
    fn dynamic_type_a_win() {
        let spec = GameSpec::new(GameKind::DynamicSided { a: q_one(), n: 1 }).unwrap();
        let g = new_game(spec).alice_move(bs("1")).unwrap();
        // deficit 1/4 <= (1/1)(1 - 1/2)
        let m0 = GaleTree::zero(1);
        let m1 = GaleTree::from_sparse(1, &[("", q(3, 4)), ("1", q_int(1)), ("0", q(1, 2))]);
        let g = g.baby_move(GaleVector::new(vec![m0, m1]), None).unwrap();
        assert_eq!(g.status(), Status::AliceWon(WinCriterion::TypeA));
    }

    #[test]
    fn variance_type_b_win_and_restriction_i() {
        let spec = GameSpec::new(GameKind::VariancePartial {
            a: q_int(100),
            big_delta: q(1, 4),
            m: 2,
            k: 1,
        })
        .unwrap();
        let g = new_game(spec).alice_move(bs("00")).unwrap();
        // must catch at the leaf itself
        let not_at_leaf = GaleTree::from_sparse(
            2,
            &[("", q_int(1)), ("0", q(1, 2)), ("1", q(1, 2)), ("00", q(1, 2)), ("01", q(1, 2))],
        );
        assert_eq!(
            g.baby_move(GaleVector::new(vec![not_at_leaf]), Some(vec![SidePolicy::empty()]))
                .unwrap_err(),
            Rejection::RestrictionI
        );
        let p1 = SidePolicy::from_pairs(&[("", 0)]);
        let r1 = GaleTree::from_sparse(
            2,
            &[("", q(1, 2)), ("0", q_int(1)), ("00", q_int(1)), ("01", q_int(1))],
        );
        let g = g.baby_move(GaleVector::new(vec![r1]), Some(vec![p1])).unwrap();
        assert_eq!(g.status(), Status::Ongoing);
        // spread {1, 2} on the enumerated pair has variance exactly 1/4
        let g = g.alice_move(bs("01")).unwrap();
        let p2 = SidePolicy::from_pairs(&[("", 0), ("0", 1)]);
        let r2 = GaleTree::from_sparse(
            2,
            &[("", q(3, 4)), ("0", q(3, 2)), ("00", q_int(1)), ("01", q_int(2))],
        );
        let g = g.baby_move(GaleVector::new(vec![r2]), Some(vec![p2])).unwrap();
        assert_eq!(g.status(), Status::AliceWon(WinCriterion::TypeB));
    }

    #[test]
    fn restriction_ii_rejection() {
        let spec = GameSpec::new(GameKind::RestrictedDynamicSided {
            a: q_int(4),
            delta: q(1, 8),
            n: 2,
        })
        .unwrap();
        let g = new_game(spec).alice_move(bs("11")).unwrap();
        let m0 = GaleTree::zero(2);
        let m1 = GaleTree::from_sparse(
            2,
            &[("", q(1, 2)), ("1", q_int(1)), ("11", q_int(2))],
        );
        // l1(11) = 2 > 1 + 1/8
        let err = g.baby_move(GaleVector::new(vec![m0, m1]), None).unwrap_err();
        assert_eq!(err, Rejection::RestrictionII);
    }

    #[test]
    fn policy_retraction_rejection() {
        let spec = GameSpec::new(GameKind::PartialSided {
            c: q_one(),
            n: 1,
            k: 1,
        })
        .unwrap();
        let g = new_game(spec).alice_move(bs("1")).unwrap();
        let p1 = SidePolicy::from_pairs(&[("", 1)]);
        let m = GaleTree::from_sparse(1, &[("", q(1, 2)), ("1", q_int(1))]);
        let g = g.baby_move(GaleVector::new(vec![m.clone()]), Some(vec![p1])).unwrap();
        assert_eq!(g.status(), Status::Ongoing);
        let g = g.alice_move(bs("0")).unwrap();
        let p2 = SidePolicy::from_pairs(&[("", 0)]);
        let m2 = GaleTree::from_sparse(1, &[("", q_int(1)), ("1", q_int(1)), ("0", q_int(1))]);
        let err = g.baby_move(GaleVector::new(vec![m2]), Some(vec![p2])).unwrap_err();
        assert_eq!(err, Rejection::PolicyRetraction);
    }

    #[test]
    fn class_rejection_much() {
        let spec = GameSpec::new(GameKind::ClassGame {
            class: GaleClass::Much { l: 2, i: 0 },
            c: q_one(),
            n: 2,
            k: 1,
        })
        .unwrap();
        let g = new_game(spec).alice_move(bs("00")).unwrap();
        // doubling at the root breaks (2,0)-betting
        let bad = GaleTree::from_sparse(
            2,
            &[("", q(1, 2)), ("0", q_int(1)), ("00", q_int(1)), ("01", q_int(1))],
        );
        assert_eq!(
            g.baby_move(GaleVector::new(vec![bad]), None).unwrap_err(),
            Rejection::Class
        );
        let ok = GaleTree::from_sparse(
            2,
            &[("", q_int(1)), ("0", q_int(1)), ("00", q_int(1)), ("01", q_int(1))],
        );
        let g = g.baby_move(GaleVector::new(vec![ok]), None).unwrap();
        // root already at 1: threshold c=1 reached
        assert_eq!(g.status(), Status::AliceWon(WinCriterion::Threshold));
    }

    #[test]
    fn kaster_class_flip_rejected() {
        let spec = GameSpec::new(GameKind::ClassGame {
            class: GaleClass::Kaster,
            c: q_int(2),
            n: 1,
            k: 1,
        })
        .unwrap();
        let g = new_game(spec).alice_move(bs("1")).unwrap();
        let first = GaleTree::from_sparse(1, &[("", q(1, 2)), ("1", q_int(1))]);
        let g = g.baby_move(GaleVector::new(vec![first]), None).unwrap();
        let g = g.alice_move(bs("0")).unwrap();
        // flipping the strict orientation at the root leaves the class
        let flip = GaleTree::from_sparse(1, &[("", q_int(2)), ("0", q_int(3)), ("1", q_int(1))]);
        assert_eq!(
            g.baby_move(GaleVector::new(vec![flip]), None).unwrap_err(),
            Rejection::Class
        );
    }

    #[test]
    fn exhausted_when_all_leaves_spent() {
        // a partial-sided game can demand a threshold above the catching
        // level, so full enumeration without a win is reachable
        let spec = GameSpec::new(GameKind::PartialSided {
            c: q_int(2),
            n: 1,
            k: 1,
        })
        .unwrap();
        let mut g = new_game(spec);
        for leaf in ["0", "1"] {
            g = g.alice_move(bs(leaf)).unwrap();
            let m = GaleTree::constant(1, q_one());
            g = g.baby_move(GaleVector::new(vec![m]), Some(vec![SidePolicy::empty()])).unwrap();
        }
        assert_eq!(g.status(), Status::Exhausted);
    }

    #[test]
    fn attention_examples() {
        let spec = GameSpec::new(GameKind::DynamicSided { a: q_one(), n: 2 }).unwrap();
        let g = new_game(spec).alice_move(bs("00")).unwrap();
        let m0 = GaleTree::from_sparse(
            2,
            &[("", q(1, 4)), ("0", q(1, 2)), ("00", q_int(1)), ("01", q_zero())],
        );
        let g = g.baby_move(GaleVector::new(vec![m0, GaleTree::zero(2)]), None).unwrap();
        // rho fully enumerated below: second conjunct fails
        assert!(!winning_attention(&g, &bs("00")).unwrap());
        // l1(0) = 1/2 = m(A|0): deficit 1/2 <= 1/2, equality accepted
        assert!(winning_attention(&g, &bs("0")).unwrap());
        // the root: deficit 3/4 <= 1 - 1/4
        assert!(winning_attention(&g, &BitString::empty()).unwrap());

        let sided = new_game(sided_spec(q(1, 2), q_one(), 2));
        assert!(winning_attention(&sided, &BitString::empty()).is_err());
    }

    #[test]
    fn attention_inequality_is_non_strict() {
        // at node 0: deficit exactly 1/4 with untouched fraction exactly
        // 1/4; unit gain accepts the equality, gain 2 does not
        let spec = GameSpec::new(GameKind::DynamicSided { a: q_int(4), n: 3 }).unwrap();
        let mut g = new_game(spec);
        let zero = GaleTree::zero(3);
        let replies = [
            GaleTree::from_sparse(
                3,
                &[("", q(1, 8)), ("0", q(1, 4)), ("00", q(1, 2)), ("000", q_int(1))],
            ),
            GaleTree::from_sparse(
                3,
                &[
                    ("", q(1, 4)),
                    ("0", q(1, 2)),
                    ("00", q_int(1)),
                    ("000", q_int(1)),
                    ("001", q_int(1)),
                ],
            ),
            GaleTree::from_sparse(
                3,
                &[
                    ("", q(3, 8)),
                    ("0", q(3, 4)),
                    ("00", q_int(1)),
                    ("01", q(1, 2)),
                    ("000", q_int(1)),
                    ("001", q_int(1)),
                    ("010", q_int(1)),
                ],
            ),
        ];
        for (leaf, m0) in ["000", "001", "010"].iter().zip(replies) {
            g = g.alice_move(bs(leaf)).unwrap();
            g = g.baby_move(GaleVector::new(vec![m0, zero.clone()]), None).unwrap();
        }
        assert_eq!(g.status(), Status::Ongoing);
        assert!(attention_with(&g, &bs("0"), &q_one()));
        assert!(!attention_with(&g, &bs("0"), &q_int(2)));
    }

    #[test]
    fn no_attention_before_any_reply() {
        let spec = GameSpec::new(GameKind::DynamicSided { a: q(1, 2), n: 2 }).unwrap();
        let g = new_game(spec);
        assert!(!winning_attention(&g, &BitString::empty()).unwrap());
        let g = g.alice_move(bs("00")).unwrap();
        assert!(!winning_attention(&g, &bs("0")).unwrap());
    }

    #[test]
    fn scaling_leaves_decisions_unchanged() {
        let scale = q(3, 5);
        let base = sided_spec(q(1, 2), q_one(), 2);
        let scaled = GameSpec::with_scale(base.kind.clone(), scale.clone()).unwrap();
        let g1 = new_game(base).alice_move(bs("11")).unwrap();
        let g2 = new_game(scaled).alice_move(bs("11")).unwrap();
        let v = example_pair();
        let r1 = g1.baby_move(v.clone(), None);
        let r2 = g2.baby_move(v.scale(&scale), None);
        match (r1, r2) {
            (Ok(a), Ok(b)) => assert_eq!(a.status(), b.status()),
            (Err(a), Err(b)) => assert_eq!(a, b),
            other => panic!("{other:?}"),
        }
    }
}
