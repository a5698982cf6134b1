//! Assembles the full sided-game strategy: nesting over the dynamic-goal
//! wrapper over the reserved-leaf wrapper over the lexicographic block
//! strategy, with every "sufficiently small/large" parameter resolved by an
//! exact grid search and recorded in a replayable ledger.

use super::{
    dynamic_to_fixed, lex_variance_strategy, nest, restricted_to_dynamic, Frame, Strategy,
    StrategyError,
};
use crate::ratio::{fmt_frac, q, q_int, q_one, q_pow2_neg, Q};
use crate::referee::{GameKind, GameSpec};
use crate::strings::BitString;
use num_traits::One;
use serde::Serialize;

/// The pipeline's parameter ledger. Rationals are exact; rebuilding from the
/// ledger reproduces the identical composed strategy.
#[derive(Clone, Debug, Serialize)]
pub struct PipelineParams {
    #[serde(with = "crate::ratio::frac_serde")]
    pub target_c: Q,
    #[serde(with = "crate::ratio::frac_serde")]
    pub target_eps: Q,
    /// Nesting-level gain: the per-level cost factor is `1 - a*delta`.
    #[serde(with = "crate::ratio::frac_serde")]
    pub a: Q,
    /// Per-level threshold slack: the per-level threshold is `1 - delta`.
    #[serde(with = "crate::ratio::frac_serde")]
    pub delta: Q,
    pub k_iter: usize,
    /// Block depth of the dynamic-goal wrapper.
    pub n_tilde: usize,
    /// Board depth of the lexicographic block strategy.
    pub n_r: usize,
    /// Reserved-leaf extension depth.
    pub n_hat: usize,
    /// Restriction-II slack of the simulated restricted game.
    #[serde(with = "crate::ratio::frac_serde")]
    pub delta_r: Q,
    /// Derived dynamic-game parameters (`a_dyn = 2a`, `delta_dyn = delta/2`,
    /// `a_r = 2 a_dyn`).
    #[serde(with = "crate::ratio::frac_serde")]
    pub a_dyn: Q,
    #[serde(with = "crate::ratio::frac_serde")]
    pub delta_dyn: Q,
    #[serde(with = "crate::ratio::frac_serde")]
    pub a_r: Q,
    /// Assumed unspent margin of the dynamic strategy; sound for
    /// `a_dyn <= 1` where every block ends within one move.
    #[serde(with = "crate::ratio::frac_serde")]
    pub eps_assumed: Q,
    #[serde(with = "crate::ratio::frac_serde")]
    pub delta_scale: Q,
    pub n_per: usize,
    pub n_total: usize,
    /// Achieved threshold `(1-delta)^k_iter >= target_c`.
    #[serde(with = "crate::ratio::frac_serde")]
    pub threshold_c: Q,
    /// Cost ledger bound `(1-a*delta)^k_iter <= target_eps`.
    #[serde(with = "crate::ratio::frac_serde")]
    pub cost_bound: Q,
}

impl PipelineParams {
    /// Every inequality the ledger promises, re-checked exactly.
    pub fn check(&self) -> Result<(), String> {
        let ad = &self.a * &self.delta;
        if pow(&(q_one() - &ad), self.k_iter) > self.target_eps {
            return Err("(1-a*delta)^k exceeds the target cost".into());
        }
        if pow(&(q_one() - &self.delta), self.k_iter) < self.target_c {
            return Err("(1-delta)^k is below the target threshold".into());
        }
        if self.delta > &self.eps_assumed / (q_int(2) * &self.a) {
            return Err("delta exceeds eps/(2a)".into());
        }
        if q_pow2_neg(self.n_tilde) >= ad {
            return Err("2^-n_tilde is not below a*delta".into());
        }
        if self.delta_scale != q_pow2_neg(self.n_hat) {
            return Err("delta_scale must be 2^-n_hat".into());
        }
        if self.n_per != self.n_tilde + self.n_r + self.n_hat
            || self.n_total != self.k_iter * self.n_per
        {
            return Err("depth bookkeeping is inconsistent".into());
        }
        Ok(())
    }

    /// The sided game the composed strategy wins.
    pub fn game(&self) -> GameSpec {
        GameSpec::sided(self.threshold_c.clone(), self.n_total).expect("valid sided spec")
    }
}

fn pow(x: &Q, k: usize) -> Q {
    let mut acc = Q::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

/// Searches exact grids for parameters meeting the targets within the depth
/// budget, preferring the shallowest (then least-iterated) solution, and
/// assembles the composed strategy together with its ledger.
pub fn build_pipeline(
    target_c: &Q,
    target_eps: &Q,
    depth_budget: usize,
) -> Result<(Box<dyn Strategy>, PipelineParams), StrategyError> {
    assert!(
        target_c > &crate::ratio::q_zero() && target_c < &q_one(),
        "need 0 < target_c < 1"
    );
    assert!(target_eps > &crate::ratio::q_zero(), "need target_eps > 0");

    let a_grid = [q(1, 4), q(1, 2), q_int(1), q_int(2)];
    let delta_r_grid = [q_int(1), q(1, 2), q(1, 4)];
    let mut best: Option<PipelineParams> = None;

    for k_iter in 1..=4usize {
        for n_r in [2usize, 4] {
            for a in &a_grid {
                for dj in 1..=15i64 {
                    let delta = q(dj, 16);
                    for delta_r in &delta_r_grid {
                        if let Some(p) = feasible(
                            target_c, target_eps, a, &delta, delta_r, k_iter, n_r, depth_budget,
                        ) {
                            let better = match &best {
                                None => true,
                                Some(b) => {
                                    (p.n_total, p.k_iter) < (b.n_total, b.k_iter)
                                }
                            };
                            if better {
                                best = Some(p);
                            }
                        }
                    }
                }
            }
        }
    }

    let params = best.ok_or_else(|| {
        StrategyError::Composition(format!(
            "no feasible pipeline parameters for c={}, eps={} within depth {depth_budget}; \
             the binding constraint is the depth budget",
            fmt_frac(target_c),
            fmt_frac(target_eps)
        ))
    })?;
    params.check().expect("searched parameters satisfy the ledger");
    let strategy = assemble(&params);
    Ok((strategy, params))
}

#[allow(clippy::too_many_arguments)]
fn feasible(
    target_c: &Q,
    target_eps: &Q,
    a: &Q,
    delta: &Q,
    delta_r: &Q,
    k_iter: usize,
    n_r: usize,
    depth_budget: usize,
) -> Option<PipelineParams> {
    let ad = a * delta;
    if pow(&(q_one() - &ad), k_iter) > *target_eps {
        return None;
    }
    let threshold = pow(&(q_one() - delta), k_iter);
    if threshold < *target_c {
        return None;
    }
    let a_dyn = q_int(2) * a;
    let a_r = q_int(2) * &a_dyn;

    // n_hat: small enough that a scaled restriction-II break forces
    // attention, and that the honest-case arithmetic transfers
    let hat_cap = std::cmp::min(
        delta_r / (q_int(2) * (q_one() + delta_r)),
        q_pow2_neg(n_r) / &a_r,
    );
    let mut n_hat = 1usize;
    while q_pow2_neg(n_hat) > hat_cap {
        n_hat += 1;
        if n_hat > depth_budget {
            return None;
        }
    }
    let n_dyn = n_r + n_hat;

    // the assumed margin: provable when a_dyn <= 1 (every block of the
    // dynamic wrapper ends within one move), worst-case otherwise
    let eps_assumed = if a_dyn <= q_one() {
        q_one() - q_pow2_neg(n_dyn)
    } else {
        q_pow2_neg(n_dyn)
    };
    if *delta > &eps_assumed / (q_int(2) * a) {
        return None;
    }

    let mut n_tilde = 1usize;
    while q_pow2_neg(n_tilde) >= ad {
        n_tilde += 1;
        if n_tilde > depth_budget {
            return None;
        }
    }
    let n_per = n_tilde + n_dyn;
    let n_total = k_iter * n_per;
    if n_total > depth_budget {
        return None;
    }
    Some(PipelineParams {
        target_c: target_c.clone(),
        target_eps: target_eps.clone(),
        a: a.clone(),
        delta: delta.clone(),
        k_iter,
        n_tilde,
        n_r,
        n_hat,
        delta_r: delta_r.clone(),
        a_dyn,
        delta_dyn: delta / q_int(2),
        a_r,
        eps_assumed,
        delta_scale: q_pow2_neg(n_hat),
        n_per,
        n_total,
        threshold_c: threshold,
        cost_bound: pow(&(q_one() - &ad), k_iter),
    })
}

/// One nesting level's fixed-game strategy on a frame.
fn level_strategy(p: &PipelineParams, frame: Frame, scale: Q) -> Box<dyn Strategy> {
    let (a_r, delta_r, n_r, n_hat) = (
        p.a_r.clone(),
        p.delta_r.clone(),
        p.n_r,
        p.n_hat,
    );
    let n_dyn = n_r + n_hat;
    let dyn_factory: Box<dyn Fn(BitString) -> Box<dyn Strategy>> = {
        let a_r = a_r.clone();
        let delta_r = delta_r.clone();
        let scale = scale.clone();
        Box::new(move |abs_root: BitString| {
            let a_r = a_r.clone();
            let delta_r = delta_r.clone();
            restricted_to_dynamic(
                {
                    let a_r = a_r.clone();
                    let delta_r = delta_r.clone();
                    move || lex_variance_strategy(a_r, delta_r, n_r)
                },
                a_r.clone(),
                delta_r.clone(),
                n_r,
                n_hat,
                Frame {
                    root: abs_root,
                    n: n_dyn,
                },
                scale.clone(),
            )
        })
    };
    dynamic_to_fixed(
        dyn_factory,
        p.a_dyn.clone(),
        p.delta_dyn.clone(),
        p.n_tilde,
        n_dyn,
        frame,
    )
}

/// `levels` nested copies of the level strategy below `frame`, at the real
/// capital scale `scale`.
fn composed(p: &PipelineParams, levels: usize, frame: Frame, scale: Q) -> Box<dyn Strategy> {
    if levels == 1 {
        return level_strategy(p, frame, scale);
    }
    let inner_threshold = pow(&(q_one() - &p.delta), levels - 1);
    let virtual_spec = GameSpec::with_scale(
        GameKind::Sided {
            c: q_one() - &p.delta,
            d: q_one(),
            n: p.n_per,
        },
        &scale * &inner_threshold,
    )
    .expect("valid virtual spec");
    let outer = level_strategy(p, Frame::global(p.n_per), &scale * &inner_threshold);
    let inner_depth = (levels - 1) * p.n_per;
    let p_inner = p.clone();
    let scale_inner = scale.clone();
    let inner_factory: Box<dyn Fn(BitString) -> Box<dyn Strategy>> =
        Box::new(move |abs_root: BitString| {
            composed(
                &p_inner,
                levels - 1,
                Frame {
                    root: abs_root,
                    n: (levels - 1) * p_inner.n_per,
                },
                scale_inner.clone(),
            )
        });
    nest(
        virtual_spec,
        outer,
        inner_depth,
        inner_factory,
        frame,
        Some(pow(&(q_one() - &p.a * &p.delta), levels)),
    )
}

/// Rebuilds the composed strategy from a ledger.
pub fn assemble(p: &PipelineParams) -> Box<dyn Strategy> {
    let inner = composed(p, p.k_iter, Frame::global(p.n_total), q_one());
    Box::new(Pipeline {
        inner,
        id: format!(
            "pipeline:c={},eps={},k={},n={}",
            fmt_frac(&p.target_c),
            fmt_frac(&p.target_eps),
            p.k_iter,
            p.n_total
        ),
        bound: p.cost_bound.clone(),
    })
}

struct Pipeline {
    inner: Box<dyn Strategy>,
    id: String,
    bound: Q,
}

impl Strategy for Pipeline {
    fn next_move(
        &mut self,
        state: &crate::referee::GameState,
    ) -> Result<super::AliceMove, StrategyError> {
        self.inner.next_move(state)
    }

    fn id(&self) -> String {
        self.id.clone()
    }

    fn cost_bound(&self) -> Option<Q> {
        Some(self.bound.clone())
    }
}
