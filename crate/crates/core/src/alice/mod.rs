//! Alice's constructive strategies and the combinators that assemble them.
//!
//! A strategy is a deterministic cursor over the observed game state: it
//! never trusts Baby and reads everything from the referee's `GameState`.
//! `PassToWin` is the strategy's claim that the win criterion already holds;
//! the harness treats a claim the referee disagrees with as a hard error.

mod combine;
mod lexvar;
mod pipeline;
mod variance;

pub use combine::{dynamic_to_fixed, nest, restricted_to_dynamic, variance_to_restricted};
pub use lexvar::lex_variance_strategy;
pub use pipeline::{assemble as pipeline_assemble, build_pipeline, PipelineParams};
pub use variance::{
    variance_induction_strategy, variance_induction_with_sub, variance_k1_framed,
    variance_k1_strategy, InductionParams, InductionPhase,
};

use crate::ratio::Q;
use crate::referee::GameState;
use crate::strings::{cylinder_leaves, BitString};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AliceMove {
    Enumerate(BitString),
    /// The strategy believes the current state already satisfies the win
    /// criterion.
    PassToWin,
}

#[derive(Clone, Debug, thiserror::Error, PartialEq, Eq)]
pub enum StrategyError {
    #[error("strategy/game kind mismatch: {0}")]
    KindMismatch(String),
    #[error("composition failure: {0}")]
    Composition(String),
    #[error("strategy asked to move in a finished game")]
    GameOver,
}

pub trait Strategy {
    /// The next leaf to enumerate, or the pass sentinel. The same move is
    /// returned until it is recorded; strategies detect progress through
    /// the state, or through `note_recorded` when their moves are virtual
    /// board strings that never appear in the enumerated set.
    fn next_move(&mut self, state: &GameState) -> Result<AliceMove, StrategyError>;

    /// Stable identifier (name plus parameters), recorded in trace headers.
    fn id(&self) -> String;

    /// Contract cost bound `m(A) <= bound`, when the strategy has one.
    fn cost_bound(&self) -> Option<Q> {
        None
    }

    /// Tells a board-level driver that its instructed move was carried out.
    fn note_recorded(&mut self, _s: &BitString) {}
}

/// A shifted board: the strategy plays on `[root] cap 2^(|root| + n)` and
/// thinks in relative strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub root: BitString,
    /// Relative depth of the board.
    pub n: usize,
}

impl Frame {
    pub fn global(n: usize) -> Self {
        Frame {
            root: BitString::empty(),
            n,
        }
    }

    pub fn abs(&self, rel: &BitString) -> BitString {
        self.root.concat(rel)
    }

    pub fn leaf_depth(&self) -> usize {
        self.root.len() + self.n
    }

    /// Sub-frame rooted at a relative string.
    pub fn sub(&self, rel: &BitString, n: usize) -> Frame {
        assert!(rel.len() + n <= self.n);
        Frame {
            root: self.abs(rel),
            n,
        }
    }
}

/// Enumerates a fixed list of leaves (or board strings), then passes.
pub(crate) struct LeafList {
    pending: std::collections::VecDeque<BitString>,
    consumed: std::collections::BTreeSet<BitString>,
    id: String,
    bound: Option<Q>,
}

impl LeafList {
    pub(crate) fn new(id: String, leaves: Vec<BitString>, bound: Option<Q>) -> Self {
        LeafList {
            pending: leaves.into_iter().collect(),
            consumed: Default::default(),
            id,
            bound,
        }
    }
}

impl Strategy for LeafList {
    fn next_move(&mut self, state: &GameState) -> Result<AliceMove, StrategyError> {
        while let Some(front) = self.pending.front() {
            if state.enumerated().contains(front) || self.consumed.contains(front) {
                self.pending.pop_front();
                continue;
            }
            return Ok(AliceMove::Enumerate(*self.pending.front().unwrap()));
        }
        Ok(AliceMove::PassToWin)
    }

    fn id(&self) -> String {
        self.id.clone()
    }

    fn cost_bound(&self) -> Option<Q> {
        self.bound.clone()
    }

    fn note_recorded(&mut self, s: &BitString) {
        self.consumed.insert(*s);
    }
}

/// The single-leaf toy: enumerate the all-ones leaf of the frame and pass.
/// Once that leaf is caught at threshold `d`, the frame root's 1-norm is at
/// least `d * 2^-n`, so this wins the `(d 2^-n, d, n)`-sided-game with cost
/// `2^-n`; the depth-1 instance is the `(1/2, 1)`-game.
pub fn toy_single_leaf(frame: Frame) -> Box<dyn Strategy> {
    let leaf = frame.abs(&BitString::from_value(frame.n, (1 << frame.n) - 1));
    Box::new(LeafList::new(
        format!("toy-single-leaf:n={}", frame.n),
        vec![leaf],
        Some(crate::ratio::q_pow2_neg(frame.n)),
    ))
}

/// Enumerates exactly `{sigma in 2^n : sigma(i) = 0}` in lexicographic
/// order, then passes: every `(l,i)`-betting supermartingale catching all of
/// them is forced to capital 1 at the root. Cost is exactly 1/2.
pub fn muchgale_strategy(l: usize, i: usize, n: usize) -> Box<dyn Strategy> {
    assert!(i < l && l <= n, "need i < l <= n");
    let leaves: Vec<BitString> = cylinder_leaves(&BitString::empty(), n)
        .into_iter()
        .filter(|s| s.bit(i) == 0)
        .collect();
    Box::new(LeafList::new(
        format!("muchgale:l={l},i={i},n={n}"),
        leaves,
        Some(crate::ratio::q(1, 2)),
    ))
}

/// Pragmatic single-opponent partial-sided strategy on a frame of depth
/// `n >= 2`: enumerate `[1] \ {1^n}`; if the watched component commits its
/// root policy, flood the side it disfavors; otherwise finish with the
/// near-full capital forced on the `[1]` side. Wins threshold `1 - 2^(1-n)`
/// with cost at most `1 - 2^-n`.
pub struct PartialFlood {
    frame: Frame,
    component: usize,
    phase: FloodPhase,
    consumed: std::collections::BTreeSet<BitString>,
    id: String,
}

enum FloodPhase {
    Main(std::collections::VecDeque<BitString>),
    Flood(std::collections::VecDeque<BitString>),
    Done,
}

impl PartialFlood {
    pub fn new(frame: Frame, component: usize) -> Self {
        assert!(frame.n >= 2);
        let rel_one = BitString::from_value(1, 1);
        let all_one = cylinder_leaves(&frame.abs(&rel_one), frame.leaf_depth());
        let last = *all_one.last().expect("nonempty side");
        let main: std::collections::VecDeque<BitString> =
            all_one.into_iter().filter(|s| *s != last).collect();
        PartialFlood {
            id: format!("partial-flood:n={},j={component}", frame.n),
            frame,
            component,
            phase: FloodPhase::Main(main),
            consumed: Default::default(),
        }
    }


    /// `(threshold, cost bound)` of the contract, frame-relative.
    pub fn contract(n: usize) -> (Q, Q) {
        (
            crate::ratio::q_one() - crate::ratio::q_pow2_neg(n - 1),
            crate::ratio::q_one() - crate::ratio::q_pow2_neg(n),
        )
    }

    /// The opponent's committed favorable outcome at the frame root: an
    /// explicit policy entry in partial games, or historical strictness in
    /// the kastergale class (betting strictly is itself the commitment).
    fn root_commitment(&self, state: &GameState) -> Option<u8> {
        if let Some(bit) = state
            .latest_policies()
            .and_then(|pols| pols.get(self.component))
            .and_then(|p| p.get(&self.frame.root))
        {
            return Some(bit);
        }
        if state.spec().class() == Some(crate::gales::GaleClass::Kaster) {
            let c0 = self.frame.root.push(0);
            let c1 = self.frame.root.push(1);
            for old in state.history() {
                let v0 = old.component(self.component).value(&c0);
                let v1 = old.component(self.component).value(&c1);
                if v0 > v1 {
                    return Some(0);
                }
                if v1 > v0 {
                    return Some(1);
                }
            }
        }
        None
    }
}

impl Strategy for PartialFlood {
    fn next_move(&mut self, state: &GameState) -> Result<AliceMove, StrategyError> {
        loop {
            let commitment = self.root_commitment(state);
            match &mut self.phase {
                FloodPhase::Main(pending) => {
                    if let Some(bit) = commitment {
                        let side = self.frame.root.push(1 - bit);
                        let flood = cylinder_leaves(&side, self.frame.leaf_depth())
                            .into_iter()
                            .collect();
                        self.phase = FloodPhase::Flood(flood);
                        continue;
                    }
                    match pending.front() {
                        Some(front)
                            if !self.consumed.contains(front)
                                && !state.enumerated().contains(front) =>
                        {
                            return Ok(AliceMove::Enumerate(*front))
                        }
                        Some(_) => {
                            pending.pop_front();
                        }
                        None => self.phase = FloodPhase::Done,
                    }
                }
                FloodPhase::Flood(pending) => {
                    match pending.front() {
                        Some(front)
                            if !self.consumed.contains(front)
                                && !state.enumerated().contains(front) =>
                        {
                            return Ok(AliceMove::Enumerate(*front))
                        }
                        Some(_) => {
                            pending.pop_front();
                        }
                        None => self.phase = FloodPhase::Done,
                    }
                }
                FloodPhase::Done => {
                    // a root commitment arriving on the very last reply
                    // still triggers the flood
                    if let Some(bit) = commitment {
                        let side = self.frame.root.push(1 - bit);
                        let flood: std::collections::VecDeque<BitString> =
                            cylinder_leaves(&side, self.frame.leaf_depth())
                                .into_iter()
                                .collect();
                        let consumed = &self.consumed;
                        if flood
                            .iter()
                            .any(|s| !consumed.contains(s) && !state.enumerated().contains(s))
                        {
                            self.phase = FloodPhase::Flood(flood);
                            continue;
                        }
                    }
                    return Ok(AliceMove::PassToWin);
                }
            }
        }
    }

    fn id(&self) -> String {
        self.id.clone()
    }

    fn cost_bound(&self) -> Option<Q> {
        Some(crate::ratio::q_one() - crate::ratio::q_pow2_neg(self.frame.n))
    }

    fn note_recorded(&mut self, s: &BitString) {
        self.consumed.insert(*s);
    }
}
