//! Reduction combinators: nesting of sided-game strategies, the dynamic-goal
//! wrapper, the reserved-leaf wrapper turning restricted-game strategies
//! into dynamic-game strategies, and the recursive variance tower.
//!
//! Each combinator guards its own children: a catching point appearing above
//! a child's frame is detected here and ends that child, so children never
//! need to look outside their frames.

use super::{AliceMove, Frame, Strategy, StrategyError};
use crate::gales::GaleVector;
use crate::ratio::{fmt_frac, q_one, q_pow2_neg, Q};
use crate::referee::{attention_with, GameSpec, GameState, Status};
use crate::strings::{cylinder_leaves, BitString};
use std::collections::VecDeque;

/// Effective catching level of the game a strategy observes.
fn catch_level(state: &GameState) -> Q {
    &state.spec().scale * state.spec().catch_threshold()
}

/// Attention scan over a frame; shallowest witness first maximizes the
/// unspent measure of the abandoned block.
fn scan_attention(state: &GameState, frame: &Frame, a: &Q, shallowest: bool) -> Option<BitString> {
    if state.history().is_empty() {
        return None;
    }
    let depths: Vec<usize> = if shallowest {
        (0..=frame.n).collect()
    } else {
        (0..=frame.n).rev().collect()
    };
    for len in depths {
        for off in 0..(1u32 << len) {
            let rel = BitString::from_heap(len, off);
            let abs = frame.abs(&rel);
            if attention_with(state, &abs, a) {
                return Some(abs);
            }
        }
    }
    None
}

/// Relative type-(a) win at a frame root:
/// `scale - ||M(root)||_1 <= scale (1/a)(1 - m(A|root))`.
fn relative_type_a(state: &GameState, root: &BitString, a: &Q) -> bool {
    let s = &state.spec().scale;
    let cm = crate::strings::conditional_measure(state.enumerated(), root);
    s - state.l1_latest(root) <= s * (q_one() - cm) / a
}

/// First queued string not yet enumerated.
fn drain(queue: &mut VecDeque<BitString>, state: &GameState) -> Option<BitString> {
    while let Some(front) = queue.front() {
        if state.enumerated().contains(front) {
            queue.pop_front();
        } else {
            return Some(*front);
        }
    }
    None
}

fn complement_queue(state: &GameState, frame: &Frame, nu: &BitString) -> VecDeque<BitString> {
    cylinder_leaves(&frame.root, frame.leaf_depth())
        .into_iter()
        .filter(|leaf| !nu.is_prefix_of(leaf) && !state.enumerated().contains(leaf))
        .collect()
}

// ---------------------------------------------------------------------------
// Nesting.

pub struct Nest {
    virt: GameState,
    outer: Box<dyn Strategy>,
    inner_factory: Box<dyn Fn(BitString) -> Box<dyn Strategy>>,
    frame: Frame,
    current: Option<(BitString, Box<dyn Strategy>)>,
    id: String,
    bound: Option<Q>,
}

/// Simulates `outer` on a virtual sided game of depth `n0`; each fictitious
/// outer enumeration `rho` is replaced by playing `inner_factory(rho)` on
/// the real game below `rho` until some ancestor of `rho` inside the frame
/// reaches the virtual catching level, which is then reported to the
/// simulated game as Baby's reply.
///
/// `virtual_spec` must be a sided game whose scale carries the inner
/// threshold (`d = 1`), so its catching level is the sub-game outcome level.
pub fn nest(
    virtual_spec: GameSpec,
    outer: Box<dyn Strategy>,
    inner_depth: usize,
    inner_factory: Box<dyn Fn(BitString) -> Box<dyn Strategy>>,
    frame: Frame,
    cost_bound: Option<Q>,
) -> Box<dyn Strategy> {
    let n0 = virtual_spec.depth();
    assert_eq!(n0 + inner_depth, frame.n, "outer + inner depths must tile the frame");
    let id = format!("nest[{} over {}]", outer.id(), virtual_spec.id());
    Box::new(Nest {
        virt: crate::referee::new_game(virtual_spec),
        outer,
        inner_factory,
        frame,
        current: None,
        id,
        bound: cost_bound,
    })
}

impl Nest {
    fn subwin(&self, state: &GameState, block_root: &BitString) -> bool {
        let level = catch_level(&self.virt);
        block_root
            .ancestors()
            .filter(|nu| self.frame.root.is_prefix_of(nu))
            .any(|nu| state.l1_latest(&nu) >= level)
    }

    /// The virtual Baby reply: the real snapshot pulled up to the frame and
    /// truncated to the virtual depth.
    fn virtual_reply(&self, state: &GameState) -> GaleVector {
        let latest = state.latest().expect("a sub-win implies a reply");
        latest
            .extract_under(&self.frame.root)
            .truncate(self.virt.spec().depth())
    }
}

impl Strategy for Nest {
    fn next_move(&mut self, state: &GameState) -> Result<AliceMove, StrategyError> {
        loop {
            if let Status::AliceWon(_) = self.virt.status() {
                return Ok(AliceMove::PassToWin);
            }
            if let Some(block_root) = self.current.as_ref().map(|(r, _)| *r) {
                if self.subwin(state, &block_root) {
                    let reply = self.virtual_reply(state);
                    self.virt = self.virt.baby_move(reply, None).map_err(|r| {
                        StrategyError::Composition(format!(
                            "virtual outer game rejected the sub-outcome: {r}"
                        ))
                    })?;
                    self.current = None;
                    continue;
                }
                let inner = &mut self.current.as_mut().expect("checked").1;
                match inner.next_move(state)? {
                    AliceMove::Enumerate(s) => return Ok(AliceMove::Enumerate(s)),
                    AliceMove::PassToWin => {
                        return Err(StrategyError::Composition(format!(
                            "inner strategy under {block_root} finished without the outcome"
                        )))
                    }
                }
            }
            match self.outer.next_move(&self.virt)? {
                AliceMove::Enumerate(rel) => {
                    let abs = self.frame.root.concat(&rel);
                    self.virt = self.virt.alice_move(rel).map_err(|e| {
                        StrategyError::Composition(format!("outer made an illegal move {rel}: {e}"))
                    })?;
                    let inner = (self.inner_factory)(abs);
                    self.current = Some((abs, inner));
                }
                AliceMove::PassToWin => {
                    return Err(StrategyError::Composition(
                        "outer passed before the virtual game was won".into(),
                    ))
                }
            }
        }
    }

    fn id(&self) -> String {
        self.id.clone()
    }

    fn cost_bound(&self) -> Option<Q> {
        self.bound.clone()
    }
}

// ---------------------------------------------------------------------------
// Restricted-game strategy -> dynamic-game strategy (reserved leaves).

pub struct RestrictedToDynamic {
    frame: Frame,
    a_dyn: Q,
    n_r: usize,
    n_hat: usize,
    virt: GameState,
    inner: Box<dyn Strategy>,
    dblock: Option<(BitString, VecDeque<BitString>)>,
    complement: Option<VecDeque<BitString>>,
    id: String,
}

/// Plays the dynamic `(a/2, n_r + n_hat)`-game on the frame by simulating a
/// `(1 - 2^-n_hat)`-scaled restricted dynamic `(a, delta, n_r)`-game: each
/// instructed string `sigma` becomes the block `D_sigma` that reserves
/// `sigma 0^n_hat`, while every frame node is monitored for winning
/// attention.
pub fn restricted_to_dynamic(
    restricted_factory: impl FnOnce() -> Box<dyn Strategy>,
    a: Q,
    delta: Q,
    n_r: usize,
    n_hat: usize,
    frame: Frame,
    outer_scale: Q,
) -> Box<dyn Strategy> {
    assert_eq!(frame.n, n_r + n_hat);
    let scaled = &outer_scale * (q_one() - q_pow2_neg(n_hat));
    let virtual_spec = GameSpec::with_scale(
        crate::referee::GameKind::RestrictedDynamicSided {
            a: a.clone(),
            delta,
            n: n_r,
        },
        scaled,
    )
    .expect("valid restricted spec");
    let inner = restricted_factory();
    let id = format!(
        "restricted-to-dynamic[{} a={},n_hat={n_hat}]",
        inner.id(),
        fmt_frac(&a)
    );
    Box::new(RestrictedToDynamic {
        frame,
        a_dyn: a / crate::ratio::q_int(2),
        n_r,
        n_hat,
        virt: crate::referee::new_game(virtual_spec),
        inner,
        dblock: None,
        complement: None,
        id,
    })
}

impl Strategy for RestrictedToDynamic {
    fn next_move(&mut self, state: &GameState) -> Result<AliceMove, StrategyError> {
        loop {
            if self.complement.is_some() {
                let queue = self.complement.as_mut().expect("checked");
                if let Some(mv) = drain(queue, state) {
                    return Ok(AliceMove::Enumerate(mv));
                }
                if !relative_type_a(state, &self.frame.root, &self.a_dyn) {
                    return Err(StrategyError::Composition(
                        "attention complement finished without the dynamic win".into(),
                    ));
                }
                return Ok(AliceMove::PassToWin);
            }
            if let Some(nu) = scan_attention(state, &self.frame, &self.a_dyn, true) {
                self.complement = Some(complement_queue(state, &self.frame, &nu));
                continue;
            }
            if self.dblock.is_some() {
                {
                    let queue = &mut self.dblock.as_mut().expect("checked").1;
                    if let Some(mv) = drain(queue, state) {
                        return Ok(AliceMove::Enumerate(mv));
                    }
                }
                // block finished without attention: the simulated restricted
                // game sees a valid scaled reply
                let sigma_rel = self.dblock.as_ref().expect("checked").0;
                let reply = state
                    .latest()
                    .expect("a finished block implies replies")
                    .extract_under(&self.frame.root)
                    .truncate(self.n_r);
                let virt = self.virt.alice_move(sigma_rel).map_err(|e| {
                    StrategyError::Composition(format!("virtual restricted move: {e}"))
                })?;
                self.virt = virt.baby_move(reply, None).map_err(|r| {
                    StrategyError::Composition(format!(
                        "virtual restricted game rejected the block outcome: {r}"
                    ))
                })?;
                self.dblock = None;
                continue;
            }
            if let Status::AliceWon(_) = self.virt.status() {
                // honest completion: the scaled restricted win transfers
                if !relative_type_a(state, &self.frame.root, &self.a_dyn) {
                    return Err(StrategyError::Composition(
                        "restricted win did not transfer to the dynamic goal".into(),
                    ));
                }
                return Ok(AliceMove::PassToWin);
            }
            match self.inner.next_move(&self.virt)? {
                AliceMove::Enumerate(sigma_rel) => {
                    let abs = self.frame.abs(&sigma_rel);
                    let reserved = abs.concat(&BitString::from_value(self.n_hat, 0));
                    let pending: VecDeque<BitString> =
                        cylinder_leaves(&abs, self.frame.leaf_depth())
                            .into_iter()
                            .filter(|leaf| *leaf != reserved)
                            .collect();
                    self.dblock = Some((sigma_rel, pending));
                }
                AliceMove::PassToWin => {
                    return Err(StrategyError::Composition(
                        "restricted strategy passed before its game was won".into(),
                    ))
                }
            }
        }
    }

    fn id(&self) -> String {
        self.id.clone()
    }

    fn cost_bound(&self) -> Option<Q> {
        Some(q_one() - q_pow2_neg(self.frame.n))
    }
}

// ---------------------------------------------------------------------------
// Dynamic-game strategy -> fixed-goal sided-game strategy (accumulator).

pub struct DynamicToFixed {
    frame: Frame,
    a_dyn: Q,
    n_tilde: usize,
    blocks: VecDeque<BitString>,
    current: Option<(BitString, Box<dyn Strategy>)>,
    acc: Q,
    target: Q,
    finishing: Option<VecDeque<BitString>>,
    dyn_factory: Box<dyn Fn(BitString) -> Box<dyn Strategy>>,
    id: String,
    bound: Q,
}

/// Runs the dynamic strategy block by block over `2^n_tilde`, accumulating
/// each block's unspent measure `m(rho)(1 - m(A_rho|rho))` exactly; when the
/// sum first reaches `a * delta`, enumerates every untreated block in full.
/// Blocks already caught from above are skipped with full contribution; a
/// catching point appearing strictly above a running block ends it with its
/// partial contribution.
pub fn dynamic_to_fixed(
    dyn_factory: Box<dyn Fn(BitString) -> Box<dyn Strategy>>,
    a_dyn: Q,
    delta_dyn: Q,
    n_tilde: usize,
    n_dyn: usize,
    frame: Frame,
) -> Box<dyn Strategy> {
    assert_eq!(frame.n, n_tilde + n_dyn);
    let target = &a_dyn * &delta_dyn;
    assert!(
        q_pow2_neg(n_tilde) < target,
        "need 2^-n_tilde < a*delta for the accumulator"
    );
    let blocks: VecDeque<BitString> = cylinder_leaves(&BitString::empty(), n_tilde)
        .into_iter()
        .collect();
    let id = format!(
        "dynamic-to-fixed[a={},delta={},n_tilde={n_tilde},n_dyn={n_dyn}]",
        fmt_frac(&a_dyn),
        fmt_frac(&delta_dyn)
    );
    let bound = q_one() - &target;
    Box::new(DynamicToFixed {
        frame,
        a_dyn,
        n_tilde,
        blocks,
        current: None,
        acc: crate::ratio::q_zero(),
        target,
        finishing: None,
        dyn_factory,
        id,
        bound,
    })
}

impl DynamicToFixed {
    fn block_contribution(&self, state: &GameState, abs_root: &BitString) -> Q {
        let cm = crate::strings::conditional_measure(state.enumerated(), abs_root);
        q_pow2_neg(self.n_tilde) * (q_one() - cm)
    }

    fn caught_at_or_above(&self, state: &GameState, abs_root: &BitString, strict: bool) -> bool {
        let level = catch_level(state);
        abs_root
            .ancestors()
            .filter(|nu| !strict || nu.len() < abs_root.len())
            .any(|nu| state.l1_latest(&nu) >= level)
    }

    fn bank(&mut self, contribution: Q) {
        self.acc += contribution;
        // per-block increments stay below a*delta, so the sum cannot reach
        // twice the target
        assert!(
            self.acc < crate::ratio::q_int(2) * &self.target,
            "accumulator overshoot"
        );
    }
}

impl Strategy for DynamicToFixed {
    fn next_move(&mut self, state: &GameState) -> Result<AliceMove, StrategyError> {
        loop {
            if self.finishing.is_some() {
                let queue = self.finishing.as_mut().expect("checked");
                if let Some(mv) = drain(queue, state) {
                    return Ok(AliceMove::Enumerate(mv));
                }
                return Ok(AliceMove::PassToWin);
            }
            if let Some(abs_root) = self.current.as_ref().map(|(r, _)| *r) {
                if self.caught_at_or_above(state, &abs_root, true) {
                    // the sub-game's action is no longer valid for its block
                    let c = self.block_contribution(state, &abs_root);
                    self.bank(c);
                    self.current = None;
                    continue;
                }
                let mv = self
                    .current
                    .as_mut()
                    .expect("checked")
                    .1
                    .next_move(state)?;
                match mv {
                    AliceMove::Enumerate(s) => return Ok(AliceMove::Enumerate(s)),
                    AliceMove::PassToWin => {
                        if !relative_type_a(state, &abs_root, &self.a_dyn) {
                            return Err(StrategyError::Composition(format!(
                                "block {abs_root} passed without its dynamic win"
                            )));
                        }
                        let c = self.block_contribution(state, &abs_root);
                        self.bank(c);
                        self.current = None;
                        continue;
                    }
                }
            }
            if self.acc >= self.target {
                let mut pending = VecDeque::new();
                for rel in &self.blocks {
                    let abs = self.frame.abs(rel);
                    for leaf in cylinder_leaves(&abs, self.frame.leaf_depth()) {
                        if !state.enumerated().contains(&leaf) {
                            pending.push_back(leaf);
                        }
                    }
                }
                self.finishing = Some(pending);
                continue;
            }
            match self.blocks.pop_front() {
                None => {
                    return Err(StrategyError::Composition(format!(
                        "accumulator reached only {} of {}: the assumed dynamic margin failed",
                        fmt_frac(&self.acc),
                        fmt_frac(&self.target)
                    )))
                }
                Some(rel) => {
                    let abs = self.frame.abs(&rel);
                    if self.caught_at_or_above(state, &abs, false) {
                        // nothing to do over this block
                        self.bank(q_pow2_neg(self.n_tilde));
                        continue;
                    }
                    let inner = (self.dyn_factory)(abs);
                    self.current = Some((abs, inner));
                }
            }
        }
    }

    fn id(&self) -> String {
        self.id.clone()
    }

    fn cost_bound(&self) -> Option<Q> {
        Some(self.bound.clone())
    }
}

// ---------------------------------------------------------------------------
// Variance-game strategy -> restricted-game strategy (the level tower).

pub struct VarianceTower {
    frame: Frame,
    a: Q,
    m: usize,
    level: usize,
    driver: Box<dyn Strategy>,
    sub: Option<(BitString, Box<dyn Strategy>)>,
    leftovers: Option<VecDeque<BitString>>,
    complement: Option<VecDeque<BitString>>,
    factory: std::rc::Rc<dyn Fn(Frame) -> Box<dyn Strategy>>,
    id: String,
}

/// The recursive `level`-tower on `2^(m * level)`: level 1 is the variance
/// strategy with attention monitoring and a full-enumeration finish; deeper
/// levels replace each instructed board string with a recursive
/// `(level-1)`-tower below it. Attention anywhere inside the frame aborts to
/// complement enumeration.
pub fn variance_to_restricted(
    var_factory: std::rc::Rc<dyn Fn(Frame) -> Box<dyn Strategy>>,
    a: Q,
    m: usize,
    level: usize,
    frame: Frame,
) -> Box<dyn Strategy> {
    assert!(level >= 1, "recursion depth must be at least 1");
    assert_eq!(frame.n, m * level);
    let driver = var_factory(Frame {
        root: frame.root,
        n: m,
    });
    let id = format!("variance-tower[{} m={m},l={level}]", driver.id());
    Box::new(VarianceTower {
        frame,
        a,
        m,
        level,
        driver,
        sub: None,
        leftovers: None,
        complement: None,
        factory: var_factory,
        id,
    })
}

impl VarianceTower {
    /// A board string is settled once its whole cylinder is enumerated.
    fn board_done(&self, state: &GameState, board: &BitString) -> bool {
        cylinder_leaves(board, self.frame.leaf_depth())
            .iter()
            .all(|leaf| state.enumerated().contains(leaf))
    }

    fn start_board(&mut self, board: BitString, state: &GameState) {
        if self.board_done(state, &board) {
            self.driver.note_recorded(&board);
            return;
        }
        if self.level == 1 {
            let single = super::LeafList::new("leaf".into(), vec![board], None);
            self.sub = Some((board, Box::new(single)));
        } else {
            let sub = variance_to_restricted(
                self.factory.clone(),
                self.a.clone(),
                self.m,
                self.level - 1,
                Frame {
                    root: board,
                    n: self.m * (self.level - 1),
                },
            );
            self.sub = Some((board, sub));
        }
    }
}

impl Strategy for VarianceTower {
    fn next_move(&mut self, state: &GameState) -> Result<AliceMove, StrategyError> {
        loop {
            if self.complement.is_some() {
                let queue = self.complement.as_mut().expect("checked");
                if let Some(mv) = drain(queue, state) {
                    return Ok(AliceMove::Enumerate(mv));
                }
                return Ok(AliceMove::PassToWin);
            }
            if let Some(nu) = scan_attention(state, &self.frame, &self.a, true) {
                self.complement = Some(complement_queue(state, &self.frame, &nu));
                continue;
            }
            if let Some(board) = self.sub.as_ref().map(|(b, _)| *b) {
                let mv = self.sub.as_mut().expect("checked").1.next_move(state)?;
                match mv {
                    AliceMove::Enumerate(s) => return Ok(AliceMove::Enumerate(s)),
                    AliceMove::PassToWin => {
                        self.driver.note_recorded(&board);
                        self.sub = None;
                        continue;
                    }
                }
            }
            if self.leftovers.is_some() {
                let board = self.leftovers.as_mut().expect("checked").pop_front();
                match board {
                    Some(b) => {
                        self.start_board(b, state);
                        continue;
                    }
                    None => return Ok(AliceMove::PassToWin),
                }
            }
            match self.driver.next_move(state)? {
                AliceMove::Enumerate(board) => {
                    self.start_board(board, state);
                }
                AliceMove::PassToWin => {
                    // keep enumerating whatever is left of the frame
                    let boards: VecDeque<BitString> =
                        cylinder_leaves(&self.frame.root, self.frame.root.len() + self.m)
                            .into_iter()
                            .collect();
                    self.leftovers = Some(boards);
                }
            }
        }
    }

    fn id(&self) -> String {
        self.id.clone()
    }

    fn cost_bound(&self) -> Option<Q> {
        Some(q_one() - q_pow2_neg(self.frame.n))
    }
}
