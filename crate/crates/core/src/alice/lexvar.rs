//! The lexicographic block strategy for the restricted dynamic sided game:
//! enumerate the embedded ternary blocks in order, forcing either winning
//! attention somewhere or a large conditional variance on the two-block.

use super::{AliceMove, Strategy, StrategyError};
use crate::ratio::Q;
use crate::referee::{attention_with, GameKind, GameState};
use crate::strings::{complement_leaves, cylinder_leaves, ternary_embed, ternary_lex_iter, BitString};
use std::collections::VecDeque;

pub struct LexVariance {
    a: Q,
    n: usize,
    queue: VecDeque<BitString>,
    complement: Option<VecDeque<BitString>>,
    id: String,
}

/// Plays the restricted dynamic `(a, delta, n)`-sided-game: enumerates the
/// depth-`n` leaves of `e(alpha)` block by block for `alpha` in the
/// lexicographic order on `3^(n/2)`; after every reply scans all of
/// `2^{<=n}` for winning attention (deepest witness first) and, on a hit at
/// `rho`, dumps the complement of `[rho]` and passes.
pub fn lex_variance_strategy(a: Q, delta: Q, n: usize) -> Box<dyn Strategy> {
    assert!(n >= 2 && n % 2 == 0, "need an even n >= 2");
    let queue: VecDeque<BitString> = ternary_lex_iter(n / 2)
        .iter()
        .flat_map(|alpha| cylinder_leaves(&ternary_embed(alpha), n))
        .collect();
    let id = format!(
        "lex-variance:a={},delta={},n={n}",
        crate::ratio::fmt_frac(&a),
        crate::ratio::fmt_frac(&delta)
    );
    Box::new(LexVariance {
        a,
        n,
        queue,
        complement: None,
        id,
    })
}

impl LexVariance {
    /// Deepest node currently receiving winning attention.
    fn scan_attention(&self, state: &GameState) -> Option<BitString> {
        if state.history().is_empty() {
            return None;
        }
        for len in (0..=self.n).rev() {
            for off in 0..(1u32 << len) {
                let rho = BitString::from_heap(len, off);
                if attention_with(state, &rho, &self.a) {
                    return Some(rho);
                }
            }
        }
        None
    }
}

impl Strategy for LexVariance {
    fn next_move(&mut self, state: &GameState) -> Result<AliceMove, StrategyError> {
        match &state.spec().kind {
            GameKind::RestrictedDynamicSided { n, .. } if *n == self.n => {}
            other => {
                return Err(StrategyError::KindMismatch(format!(
                    "lex-variance expects a restricted dynamic sided game of depth {}, got {other:?}",
                    self.n
                )))
            }
        }
        if self.complement.is_none() {
            if let Some(rho) = self.scan_attention(state) {
                self.complement = Some(
                    complement_leaves(&rho, self.n, state.enumerated())
                        .into_iter()
                        .collect(),
                );
            }
        }
        let queue = match &mut self.complement {
            Some(c) => c,
            None => &mut self.queue,
        };
        while let Some(front) = queue.front() {
            if state.enumerated().contains(front) {
                queue.pop_front();
            } else {
                return Ok(AliceMove::Enumerate(*front));
            }
        }
        Ok(AliceMove::PassToWin)
    }

    fn id(&self) -> String {
        self.id.clone()
    }

    fn cost_bound(&self) -> Option<Q> {
        // the contract is m(A) < 1: at least one leaf stays untouched
        Some(crate::ratio::q_one() - crate::ratio::q_pow2_neg(self.n))
    }
}
