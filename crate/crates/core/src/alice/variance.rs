//! Strategies for the variance partial-sided games: the single-opponent
//! base case and the induction step that defeats one extra opponent by
//! splitting the board into a top half and per-cylinder bottom halves.

use super::{AliceMove, Frame, PartialFlood, Strategy, StrategyError};
use crate::ratio::{fmt_frac, q_int, q_one, q_pow2, q_pow2_neg, Q};
use crate::referee::{GameKind, GameState};
use crate::strings::{cylinder_leaves, BitString};
use serde::Serialize;
use std::collections::VecDeque;

/// The `k = 1` variance-game strategy: enumerate `[1] \ {1^m}`; if Baby ever
/// commits the root policy, flood the disfavored side; if the list completes
/// uncommitted, the near-full capital on `[1]` forces the type-(a) win.
///
/// Requires `2^(m-1) >= 2a` so the leftover `2^-(m-1)` deficit fits the
/// dynamic goal at cost `<= 1/2` spent.
pub fn variance_k1_strategy(a: Q, m: usize) -> Box<dyn Strategy> {
    variance_k1_framed(a, Frame::global(m))
}

/// The same strategy shifted below a frame root (used by the level tower).
pub fn variance_k1_framed(a: Q, frame: Frame) -> Box<dyn Strategy> {
    let m = frame.n;
    assert!(
        q_pow2(m - 1) >= q_int(2) * &a,
        "need 2^(m-1) >= 2a for the uncommitted endgame"
    );
    Box::new(VarianceK1 {
        id: format!("variance-k1:a={},m={m}@{}", fmt_frac(&a), frame.root),
        inner: PartialFlood::new(frame, 0),
    })
}

struct VarianceK1 {
    inner: PartialFlood,
    id: String,
}

impl Strategy for VarianceK1 {
    fn next_move(&mut self, state: &GameState) -> Result<AliceMove, StrategyError> {
        // playable in the variance game itself, in the restricted dynamic
        // partial game through the level tower (whose rules only constrain
        // Baby further), and against the kastergale class where strict
        // betting plays the role of the policy
        let spec = state.spec();
        let single_partial = spec.is_partial() && spec.k() == 1;
        let single_kaster =
            spec.class() == Some(crate::gales::GaleClass::Kaster) && spec.k() == 1;
        if !single_partial && !single_kaster {
            return Err(StrategyError::KindMismatch(format!(
                "variance-k1 expects a single-opponent partial or kaster game, got {:?}",
                spec.kind
            )));
        }
        self.inner.next_move(state)
    }

    fn id(&self) -> String {
        self.id.clone()
    }

    fn cost_bound(&self) -> Option<Q> {
        self.inner.cost_bound()
    }
}

/// Ledger of the induction step's derived parameters.
#[derive(Clone, Debug, Serialize)]
pub struct InductionParams {
    #[serde(with = "crate::ratio::frac_serde")]
    pub a: Q,
    pub k: usize,
    pub m: usize,
    #[serde(with = "crate::ratio::frac_serde")]
    pub delta_hat: Q,
    /// The game's variance threshold implied by `2^-m (delta_hat / 2k)^2`.
    #[serde(with = "crate::ratio::frac_serde")]
    pub delta: Q,
    /// Sub-strategy contract `(threshold, cost)` on depth `m/2`.
    #[serde(with = "crate::ratio::frac_serde")]
    pub sub_threshold: Q,
    #[serde(with = "crate::ratio::frac_serde")]
    pub sub_cost: Q,
    /// Whether `1 - c + 2 delta_hat <= (1 - 2 eps)/a` holds, i.e. whether
    /// the closing type-(a) arithmetic is guaranteed rather than empirical.
    pub type_a_guaranteed: bool,
}

impl InductionParams {
    pub fn derive(a: &Q, k: usize, m: usize, delta_hat: &Q) -> Self {
        assert!(k >= 2 && m >= 4 && m % 2 == 0);
        let ratio = delta_hat / q_int(2 * k as i64);
        let delta = q_pow2_neg(m) * &ratio * &ratio;
        let (c, eps) = PartialFlood::contract(m / 2);
        let lhs = q_one() - &c + q_int(2) * delta_hat;
        let rhs = (q_one() - q_int(2) * &eps) / a;
        InductionParams {
            a: a.clone(),
            k,
            m,
            delta_hat: delta_hat.clone(),
            delta,
            sub_threshold: c,
            sub_cost: eps,
            type_a_guaranteed: lhs <= rhs,
        }
    }
}

/// Which phase a sub-strategy instance serves: the top board against the
/// opposing components, or one bottom cylinder against component 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InductionPhase {
    AgainstUpper,
    AgainstComponentZero,
}

/// Phase bookkeeping for the induction strategy.
enum Phase {
    /// Playing the sub-strategy against components `1..k` on the top board;
    /// each instructed top string expands to its full bottom cylinder.
    Top {
        expansion: VecDeque<BitString>,
        current_board: Option<BitString>,
        boards_done: Vec<BitString>,
    },
    /// Playing the sub-strategy against component 0 below each untreated
    /// top string.
    Bottom {
        remaining: VecDeque<BitString>,
        sub: Option<Box<dyn Strategy>>,
    },
    Done,
}

type SubFactory = std::rc::Rc<dyn Fn(Frame, InductionPhase) -> Box<dyn Strategy>>;

pub struct VarianceInduction {
    params: InductionParams,
    top_sub: Box<dyn Strategy>,
    sub_factory: SubFactory,
    phase: Phase,
    /// Component 0's value at the first enumerated leaf, once observed.
    c0_seen: bool,
    skip_top: bool,
    id: String,
}

/// The induction step for `k >= 2` built on the default flood sub-strategy:
/// phase 1 plays it against components `1..k` on `2^(m/2)` (top strings
/// expand to full bottom cylinders); phase 2 replays it against component 0
/// on each untreated bottom cylinder. A type-(b) event ends the game at the
/// referee before either phase completes.
pub fn variance_induction_strategy(a: Q, k: usize, m: usize, delta_hat: Q) -> Box<dyn Strategy> {
    let last = k - 1;
    let sub: SubFactory = std::rc::Rc::new(move |frame: Frame, phase: InductionPhase| {
        let component = match phase {
            InductionPhase::AgainstUpper => last,
            InductionPhase::AgainstComponentZero => 0,
        };
        Box::new(PartialFlood::new(frame, component))
    });
    variance_induction_with_sub(a, k, m, delta_hat, sub)
}

/// The induction step over a caller-supplied winning sub-strategy for the
/// half-depth single-opponent game.
pub fn variance_induction_with_sub(
    a: Q,
    k: usize,
    m: usize,
    delta_hat: Q,
    sub_factory: SubFactory,
) -> Box<dyn Strategy> {
    let params = InductionParams::derive(&a, k, m, &delta_hat);
    let top_sub = sub_factory(Frame::global(m / 2), InductionPhase::AgainstUpper);
    let id = format!(
        "variance-induction:a={},k={k},m={m},delta_hat={}",
        fmt_frac(&a),
        fmt_frac(&delta_hat)
    );
    Box::new(VarianceInduction {
        params,
        top_sub,
        sub_factory,
        phase: Phase::Top {
            expansion: VecDeque::new(),
            current_board: None,
            boards_done: Vec::new(),
        },
        c0_seen: false,
        skip_top: false,
        id,
    })
}

impl VarianceInduction {
    /// After the first reply, component 0's value at the first enumerated
    /// leaf decides whether the scaled phase-1 game is vacuous (scale
    /// clamped to zero: skip ahead).
    fn observe_scale(&mut self, state: &GameState) {
        if self.c0_seen {
            return;
        }
        let (Some(first), Some(v)) = (state.enumerated().first(), state.latest()) else {
            return;
        };
        self.c0_seen = true;
        let c0 = v.component(0).value(first).clone();
        let scale = q_one() - c0 - &self.params.delta_hat;
        if scale <= crate::ratio::q_zero() {
            self.skip_top = true;
        }
    }
}

impl Strategy for VarianceInduction {
    fn next_move(&mut self, state: &GameState) -> Result<AliceMove, StrategyError> {
        match &state.spec().kind {
            GameKind::VariancePartial { k, m, big_delta, .. }
                if *k == self.params.k
                    && *m == self.params.m
                    && *big_delta <= self.params.delta => {}
            other => {
                return Err(StrategyError::KindMismatch(format!(
                    "variance-induction expects VariancePartial(k={},m={}) with Delta <= {}, got {other:?}",
                    self.params.k,
                    self.params.m,
                    fmt_frac(&self.params.delta)
                )))
            }
        }
        self.observe_scale(state);
        let m = self.params.m;
        loop {
            match &mut self.phase {
                Phase::Top {
                    expansion,
                    current_board,
                    boards_done,
                } => {
                    // drain the current board's cylinder first
                    while let Some(front) = expansion.front() {
                        if state.enumerated().contains(front) {
                            expansion.pop_front();
                        } else {
                            return Ok(AliceMove::Enumerate(*front));
                        }
                    }
                    if let Some(done) = current_board.take() {
                        boards_done.push(done);
                        self.top_sub.note_recorded(&done);
                    }
                    if self.skip_top {
                        let done = std::mem::take(boards_done);
                        self.phase = Phase::Bottom {
                            remaining: cylinder_leaves(&BitString::empty(), m / 2)
                                .into_iter()
                                .filter(|b| !done.contains(b))
                                .collect(),
                            sub: None,
                        };
                        continue;
                    }
                    match self.top_sub.next_move(state)? {
                        AliceMove::Enumerate(board) => {
                            *current_board = Some(board);
                            *expansion = cylinder_leaves(&board, m).into_iter().collect();
                        }
                        AliceMove::PassToWin => {
                            let done = std::mem::take(boards_done);
                            self.phase = Phase::Bottom {
                                remaining: cylinder_leaves(&BitString::empty(), m / 2)
                                    .into_iter()
                                    .filter(|b| !done.contains(b))
                                    .collect(),
                                sub: None,
                            };
                        }
                    }
                }
                Phase::Bottom { remaining, sub } => {
                    if let Some(s) = sub {
                        match s.next_move(state)? {
                            AliceMove::Enumerate(leaf) => return Ok(AliceMove::Enumerate(leaf)),
                            AliceMove::PassToWin => *sub = None,
                        }
                    }
                    if sub.is_none() {
                        match remaining.pop_front() {
                            Some(rho) => {
                                *sub = Some((self.sub_factory)(
                                    Frame {
                                        root: rho,
                                        n: m / 2,
                                    },
                                    InductionPhase::AgainstComponentZero,
                                ));
                            }
                            None => {
                                self.phase = Phase::Done;
                            }
                        }
                    }
                }
                Phase::Done => return Ok(AliceMove::PassToWin),
            }
        }
    }

    fn id(&self) -> String {
        self.id.clone()
    }

    fn cost_bound(&self) -> Option<Q> {
        // both phases run the flood sub, each spending at most its
        // sub-board's bound; the union stays below the whole space
        Some(q_one() - q_pow2_neg(self.params.m))
    }
}
