//! Desk-scale driver that assembles a prefix of a non-random real: play a
//! winning enumeration level by level against a finite roster of scaled
//! sided gale pairs, keep the candidates no roster member catches, back off
//! when a catching point appears later, and emit the enumerated sets as a
//! test witnessing the construction.

use crate::baby::{AdversaryHandle, AdversaryKind};
use crate::gales::{l1_at, GaleTree, GaleVector};
use crate::ratio::{fmt_frac, q, q_int, q_one, q_pow2_neg, q_zero, Q};
use crate::referee::{new_game, GameKind, GameSpec, GameState};
use crate::strings::{cylinder_leaves, measure, BitString};
use serde::Serialize;

/// Level depths, threshold ladder, and roster scalings.
#[derive(Clone, Debug, Serialize)]
pub struct LadderConfig {
    pub depths: Vec<usize>,
    #[serde(with = "crate::ratio::frac_vec_serde")]
    pub c: Vec<Q>,
    #[serde(with = "crate::ratio::frac_vec_serde")]
    pub d: Vec<Q>,
    #[serde(with = "crate::ratio::frac_vec_serde")]
    pub deltas: Vec<Q>,
}

impl LadderConfig {
    /// `c_k = 1 - 2^(-k-2)`, `d_k` the midpoint to `c_(k+1)`, and
    /// `delta_k = (c_(k+1) - d_k)/2`.
    pub fn default_ladder(levels: usize, depth: usize) -> Self {
        let c: Vec<Q> = (0..=levels)
            .map(|k| q_one() - q_pow2_neg(k + 2))
            .collect();
        let d: Vec<Q> = (0..levels)
            .map(|k| (&c[k] + &c[k + 1]) / q_int(2))
            .collect();
        let deltas: Vec<Q> = (0..levels).map(|k| (&c[k + 1] - &d[k]) / q_int(2)).collect();
        LadderConfig {
            depths: vec![depth; levels],
            c: c[..levels].to_vec(),
            d,
            deltas,
        }
    }

    pub fn levels(&self) -> usize {
        self.depths.len()
    }

    /// Absolute depth at which level `k`'s candidates live.
    pub fn depth_at(&self, k: usize) -> usize {
        self.depths[..=k].iter().sum()
    }

    /// Static sanity of the ladder: strictly interleaved thresholds under 2
    /// and scalings inside the inter-level margins.
    pub fn margin_check(&self) -> Result<(), ConstructError> {
        let bad = |m: String| Err(ConstructError::Margin(m));
        let k = self.levels();
        if k == 0 || self.c.len() != k || self.d.len() != k || self.deltas.len() != k {
            return bad("ladder vectors must all have one entry per level".into());
        }
        let mut prev = q_zero();
        for i in 0..k {
            if self.c[i] <= prev || self.d[i] <= self.c[i] {
                return bad(format!("need {} < c_{i} < d_{i}", fmt_frac(&prev)));
            }
            prev = self.d[i].clone();
        }
        if prev >= q_int(2) {
            return bad("the ladder must stay below 2".into());
        }
        if self.deltas[0] > self.c[0] {
            return bad("delta_0 must not exceed c_0".into());
        }
        for i in 1..k {
            let margin = (&self.c[i] - &self.d[i - 1]) / q_int(2);
            if self.deltas[i] > margin {
                return bad(format!(
                    "delta_{i} = {} exceeds the margin (c_{i} - d_{})/2 = {}",
                    fmt_frac(&self.deltas[i]),
                    i - 1,
                    fmt_frac(&margin)
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, thiserror::Error, PartialEq)]
pub enum ConstructError {
    #[error("ladder margin check failed: {0}")]
    Margin(String),
    #[error("threshold violation opening level {level}: certificate {certificate} >= {bound}")]
    ThresholdViolation {
        level: usize,
        certificate: String,
        bound: String,
    },
    #[error("level {0} exhausted its candidate stream")]
    StreamExhausted(usize),
    #[error("level {0} would exceed its measure budget")]
    BudgetExhausted(usize),
}

/// What a roster member is.
#[derive(Clone, Debug)]
pub enum RosterKind {
    /// Never bets.
    Zero,
    /// Fixed snapshot list, advanced one per driver event.
    Scripted(Vec<GaleVector>),
    /// Pumps the 0-sided component along the all-zero spine, one level per
    /// event, up to a budget.
    Chaser { budget: usize },
    /// Plays its level's window like a refereed LP Baby at its scaling.
    LpRefereed,
}

/// One roster member: a pair (0-sided, 1-sided) revealed as a nondecreasing
/// stream of snapshots at full construction depth.
pub struct RosterMember {
    pub kind: RosterKind,
    /// Recorded pre-scale factor (the member keeps its root 1-norm at or
    /// below this).
    pub delta: Q,
    current: GaleVector,
    script_cursor: usize,
    chaser_len: usize,
    /// Closed window instances folded into a base (LpRefereed).
    base: Option<GaleVector>,
    window: Option<(BitString, GameState, AdversaryHandle)>,
    level: usize,
    total_depth: usize,
}

pub enum RosterEvent<'a> {
    Enumerated {
        level: usize,
        leaf: &'a BitString,
        window_root: &'a BitString,
    },
    Tick,
}

impl RosterMember {
    fn new(kind: RosterKind, delta: Q, level: usize, total_depth: usize) -> Self {
        RosterMember {
            kind,
            delta,
            current: GaleVector::zero(2, total_depth),
            script_cursor: 0,
            chaser_len: 0,
            base: None,
            window: None,
            level,
            total_depth,
        }
    }

    pub fn snapshot(&self) -> &GaleVector {
        &self.current
    }

    /// Advances the stream; returns true when the snapshot changed.
    fn react(&mut self, event: &RosterEvent<'_>, ladder: &LadderConfig) -> bool {
        match &self.kind {
            RosterKind::Zero => false,
            RosterKind::Scripted(snaps) => {
                if self.script_cursor < snaps.len() {
                    self.current = snaps[self.script_cursor].clone();
                    self.script_cursor += 1;
                    true
                } else {
                    false
                }
            }
            RosterKind::Chaser { budget } => {
                if self.chaser_len >= *budget || self.chaser_len >= self.total_depth {
                    return false;
                }
                self.chaser_len += 1;
                // the t-th snapshot is the sum of doubling martingales
                // toward the deepening all-zero spine prefixes: each
                // increment is a martingale, so the stream is a
                // nondecreasing sequence of 0-sided supermartingales with
                // root mass below delta
                let mut m0 = GaleTree::zero(self.total_depth);
                for len in 0..=self.total_depth {
                    for off in 0..(1u32 << len) {
                        let node = BitString::from_heap(len, off);
                        let run = (0..len).take_while(|&i| node.bit(i) == 0).count();
                        let mut v = q_zero();
                        for i in 1..=self.chaser_len {
                            let reach = len.min(i);
                            if run >= reach {
                                v += &self.delta * q_pow2_neg(i) * crate::ratio::q_pow2(reach);
                            }
                        }
                        m0.set(&node, v);
                    }
                }
                self.current = GaleVector::new(vec![m0, GaleTree::zero(self.total_depth)]);
                true
            }
            RosterKind::LpRefereed => {
                let RosterEvent::Enumerated {
                    level,
                    leaf,
                    window_root,
                } = event
                else {
                    return false;
                };
                if *level != self.level {
                    return false;
                }
                let n_k = ladder.depths[self.level];
                // new window: fold the old instance into the base
                let stale = self
                    .window
                    .as_ref()
                    .map_or(true, |(root, _, _)| root != *window_root);
                if stale {
                    if let Some((root, game, _)) = self.window.take() {
                        let folded = embed_window(&game, &root, self.total_depth);
                        self.base = Some(match self.base.take() {
                            None => folded,
                            Some(b) => add_vectors(&b, &folded),
                        });
                    }
                    let spec = GameSpec::with_scale(
                        GameKind::Sided {
                            c: ladder.c[self.level].clone(),
                            d: ladder.d[self.level].clone(),
                            n: n_k,
                        },
                        &self.delta / q_int(2),
                    )
                    .expect("valid window spec");
                    self.window = Some((
                        **window_root,
                        new_game(spec),
                        AdversaryHandle::new(AdversaryKind::LpDisjunctive),
                    ));
                }
                let (root, game, adv) = self.window.as_mut().expect("window just ensured");
                if game.status() != crate::referee::Status::Ongoing {
                    return false; // the window game ended; capital is frozen
                }
                let rel = root.strip_prefix_of(leaf).expect("leaf lies in the window");
                let moved = game.alice_move(rel).expect("fresh window candidate");
                let reply = adv.respond(&moved).expect("sided window is always feasible");
                *game = moved
                    .baby_move(reply.gale, reply.policies)
                    .expect("the LP reply is rule-abiding");
                let embedded = embed_window(game, root, self.total_depth);
                self.current = match &self.base {
                    None => embedded,
                    Some(b) => add_vectors(b, &embedded),
                };
                true
            }
        }
    }
}

fn add_vectors(a: &GaleVector, b: &GaleVector) -> GaleVector {
    GaleVector::new(
        a.components()
            .iter()
            .zip(b.components())
            .map(|(x, y)| x.add(y))
            .collect(),
    )
}

/// Spreads a window game's latest snapshot over the full tree: the window
/// subtree sits below its root, every node outside carries the window's
/// root value flat (equal children keep both sidednesses).
fn embed_window(game: &GameState, window_root: &BitString, total_depth: usize) -> GaleVector {
    let Some(latest) = game.latest() else {
        return GaleVector::zero(2, total_depth);
    };
    let n_k = game.spec().depth();
    let comps = latest
        .components()
        .iter()
        .map(|rel| {
            let mut t = GaleTree::zero(total_depth);
            let root_val = rel.value(&BitString::empty()).clone();
            for len in 0..=total_depth {
                for off in 0..(1u32 << len) {
                    let node = BitString::from_heap(len, off);
                    let v = match window_root.strip_prefix_of(&node) {
                        Some(tail) if tail.len() <= n_k => rel.value(&tail).clone(),
                        Some(tail) => rel.value(&tail.prefix(n_k)).clone(),
                        None => root_val.clone(),
                    };
                    t.set(&node, v);
                }
            }
            t
        })
        .collect();
    GaleVector::new(comps)
}

#[derive(Clone, Debug, Serialize)]
pub struct RosterInfo {
    pub kind: String,
    pub scale: String,
}

/// The emitted bundle: prefix, exact certificate table, the enumerated test
/// sets with their measures, and the event log.
#[derive(Clone, Debug, Serialize)]
pub struct ConstructionBundle {
    pub prefix: String,
    pub certificates: Vec<CertificateRow>,
    pub v_sets: Vec<Vec<String>>,
    pub v_measures: Vec<String>,
    pub backtracks: Vec<usize>,
    pub roster: Vec<RosterInfo>,
    pub events: Vec<String>,
    pub all_certificates_below_two: bool,
    pub budgets_respected: bool,
    pub prefix_in_every_level: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateRow {
    pub m: usize,
    pub value: String,
}

struct LevelRun {
    stream: Vec<BitString>,
    cursor: usize,
    candidate: Option<BitString>,
}

/// The construction state: one candidate stream per open level, the
/// enumerated sets `V_k`, and the roster.
pub struct ConstructionState {
    config: LadderConfig,
    roster: Vec<RosterMember>,
    levels: Vec<LevelRun>,
    v_sets: Vec<Vec<BitString>>,
    backtracks: Vec<usize>,
    events: Vec<String>,
}

impl ConstructionState {
    pub fn new(
        config: LadderConfig,
        roster_kinds: Vec<(RosterKind, Option<Q>)>,
    ) -> Result<Self, ConstructError> {
        config.margin_check()?;
        if roster_kinds.len() != config.levels() {
            return Err(ConstructError::Margin(
                "one roster member per level is required".into(),
            ));
        }
        let total_depth = config.depth_at(config.levels() - 1);
        let roster = roster_kinds
            .into_iter()
            .enumerate()
            .map(|(k, (kind, scale))| {
                let delta = scale.unwrap_or_else(|| config.deltas[k].clone());
                RosterMember::new(kind, delta, k, total_depth)
            })
            .collect();
        let levels = config.levels();
        Ok(ConstructionState {
            config,
            roster,
            levels: Vec::new(),
            v_sets: vec![Vec::new(); levels],
            backtracks: vec![0; levels],
            events: Vec::new(),
        })
    }

    fn chain_root(&self, level: usize) -> BitString {
        if level == 0 {
            BitString::empty()
        } else {
            self.levels[level - 1]
                .candidate
                .expect("parent candidate exists for an open level")
        }
    }

    /// Combined roster capital at a node.
    fn certificate_at(&self, node: &BitString, upto_level: usize) -> Q {
        self.roster[..=upto_level]
            .iter()
            .map(|m| l1_at(m.snapshot(), node))
            .sum()
    }

    fn open_level(&mut self, k: usize) -> Result<(), ConstructError> {
        let root = self.chain_root(k);
        // entry margin: the combined capital at the chain point must sit
        // below the new level's threshold
        let cert = self.certificate_at(&root, k);
        if cert >= self.config.c[k] {
            return Err(ConstructError::ThresholdViolation {
                level: k,
                certificate: fmt_frac(&cert),
                bound: fmt_frac(&self.config.c[k]),
            });
        }
        let depth = self.config.depth_at(k);
        let stream = cylinder_leaves(&root, depth);
        self.events.push(format!("open level {k} under {root}"));
        self.levels.push(LevelRun {
            stream,
            cursor: 0,
            candidate: None,
        });
        Ok(())
    }

    /// A catching point for a level-`k` candidate: some new prefix of the
    /// candidate (inside level k's window) where the combined capital of
    /// members `0..=k` reaches `d_k`.
    fn caught(&self, k: usize, candidate: &BitString) -> Option<BitString> {
        let lo = if k == 0 { 0 } else { self.config.depth_at(k - 1) };
        for len in (lo + 1)..=candidate.len() {
            let nu = candidate.prefix(len);
            if self.certificate_at(&nu, k) >= self.config.d[k] {
                return Some(nu);
            }
        }
        None
    }

    /// Re-checks the whole chain after roster growth; on a hit, discards
    /// every deeper level. Returns the shallowest invalidated level.
    fn revalidate_chain(&mut self) -> Option<usize> {
        for k in 0..self.levels.len() {
            if let Some(cand) = self.levels[k].candidate {
                if let Some(nu) = self.caught(k, &cand) {
                    self.events
                        .push(format!("candidate {cand} at level {k} caught at {nu}"));
                    self.levels.truncate(k + 1);
                    self.levels[k].candidate = None;
                    self.backtracks[k] += 1;
                    return Some(k);
                }
            }
        }
        None
    }

    fn broadcast(&mut self, event: RosterEvent<'_>) -> bool {
        let mut changed = false;
        for member in &mut self.roster {
            changed |= member.react(&event, &self.config);
        }
        changed
    }

    /// Advances one game round at the deepest active level. A complete
    /// chain is a fixed point.
    pub fn step(&mut self) -> Result<(), ConstructError> {
        if self.chain_complete() {
            return Ok(());
        }
        if self.levels.is_empty() {
            self.open_level(0)?;
            return Ok(());
        }
        let k = self.levels.len() - 1;
        if self.levels[k].candidate.is_some() {
            // chain complete up to here: open the next level
            let next = self.levels.len();
            self.open_level(next)?;
            return Ok(());
        }
        // pull the next candidate from the stream
        let (leaf, window_root) = {
            let run = &self.levels[k];
            let half = run.stream.len() / 2;
            if run.cursor >= half {
                return Err(ConstructError::StreamExhausted(k));
            }
            (run.stream[run.cursor], self.chain_root(k))
        };
        self.levels[k].cursor += 1;
        // the budget invariant m(V_k) <= 2^-k holds at all times
        let mut v_next = self.v_sets[k].clone();
        v_next.push(leaf);
        if measure(&v_next) > q_pow2_neg(k) {
            return Err(ConstructError::BudgetExhausted(k));
        }
        self.v_sets[k].push(leaf);
        self.events.push(format!("level {k} enumerates {leaf}"));
        self.broadcast(RosterEvent::Enumerated {
            level: k,
            leaf: &leaf,
            window_root: &window_root,
        });
        // tentatively adopt the candidate unless already caught
        if self.caught(k, &leaf).is_none() {
            self.levels[k].candidate = Some(leaf);
        } else {
            self.backtracks[k] += 1;
            self.events.push(format!("candidate {leaf} rejected immediately"));
        }
        // roster growth may invalidate shallower links
        self.revalidate_chain();
        Ok(())
    }

    fn chain_complete(&self) -> bool {
        self.levels.len() == self.config.levels()
            && self.levels.iter().all(|l| l.candidate.is_some())
    }

    /// Runs to completion: all levels carry surviving candidates and the
    /// roster streams are exhausted.
    pub fn run(mut self) -> Result<ConstructionBundle, ConstructError> {
        let mut guard = 0usize;
        let limit = 1 << 20;
        loop {
            guard += 1;
            if guard > limit {
                return Err(ConstructError::StreamExhausted(usize::MAX));
            }
            if self.chain_complete() {
                // drain remaining roster activity, then re-check
                let changed = self.broadcast(RosterEvent::Tick);
                if !changed {
                    break;
                }
                if self.revalidate_chain().is_some() {
                    continue;
                }
            } else {
                self.step()?;
            }
        }
        Ok(self.bundle())
    }

    fn bundle(&self) -> ConstructionBundle {
        let levels = self.config.levels();
        let prefix = self.levels[levels - 1]
            .candidate
            .expect("complete chain");
        let mut certificates = Vec::new();
        let mut below_two = true;
        for m in 0..=prefix.len() {
            let node = prefix.prefix(m);
            let value: Q = self
                .roster
                .iter()
                .map(|mem| l1_at(mem.snapshot(), &node))
                .sum();
            if value >= q_int(2) {
                below_two = false;
            }
            certificates.push(CertificateRow {
                m,
                value: fmt_frac(&value),
            });
        }
        let v_measures: Vec<Q> = self.v_sets.iter().map(|v| measure(v)).collect();
        let budgets = v_measures
            .iter()
            .enumerate()
            .all(|(k, val)| *val <= q_pow2_neg(k));
        let prefix_in_levels = (0..levels).all(|k| {
            let point = prefix.prefix(self.config.depth_at(k));
            self.v_sets[k].contains(&point)
        });
        ConstructionBundle {
            prefix: prefix.to_string(),
            certificates,
            v_sets: self
                .v_sets
                .iter()
                .map(|v| v.iter().map(|s| s.to_string()).collect())
                .collect(),
            v_measures: v_measures.iter().map(fmt_frac).collect(),
            backtracks: self.backtracks.clone(),
            roster: self
                .roster
                .iter()
                .map(|m| RosterInfo {
                    kind: match &m.kind {
                        RosterKind::Zero => "zero".into(),
                        RosterKind::Scripted(_) => "scripted".into(),
                        RosterKind::Chaser { budget } => format!("chaser:budget={budget}"),
                        RosterKind::LpRefereed => "lp-refereed".into(),
                    },
                    scale: fmt_frac(&m.delta),
                })
                .collect(),
            events: self.events.clone(),
            all_certificates_below_two: below_two,
            budgets_respected: budgets,
            prefix_in_every_level: prefix_in_levels,
        }
    }
}

/// The scripted pair used by the forced-backtrack fixture: the 0-sided
/// component catches exactly the leaf `0000` of a depth-8 construction at
/// the default `d_0 = 13/16`, with every proper prefix strictly below it.
pub fn backtrack_fixture_pair(total_depth: usize) -> GaleVector {
    let mut m0 = GaleTree::zero(total_depth);
    let target = BitString::parse("0000").unwrap();
    // halving up from 13/16 at the target, flat on the target's subtree
    for len in 0..=4usize {
        let node = target.prefix(len);
        m0.set(&node, q(13, 16) * q_pow2_neg(4 - len));
    }
    for len in 5..=total_depth {
        for leaf in cylinder_leaves(&target, len) {
            m0.set(&leaf, q(13, 16));
        }
    }
    GaleVector::new(vec![m0, GaleTree::zero(total_depth)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level_config() -> LadderConfig {
        LadderConfig::default_ladder(2, 4)
    }

    #[test]
    fn default_ladder_passes_margin_check() {
        let cfg = two_level_config();
        assert!(cfg.margin_check().is_ok());
        assert_eq!(cfg.c[0], q(3, 4));
        assert_eq!(cfg.d[0], q(13, 16));
        assert_eq!(cfg.deltas[0], q(1, 32));
    }

    #[test]
    fn oversized_delta_fails_margin_check() {
        let mut cfg = two_level_config();
        cfg.deltas[1] = q_one();
        assert!(matches!(cfg.margin_check(), Err(ConstructError::Margin(_))));
    }

    #[test]
    fn zero_roster_yields_lexicographic_prefix() {
        let cfg = two_level_config();
        let state = ConstructionState::new(
            cfg,
            vec![(RosterKind::Zero, None), (RosterKind::Zero, None)],
        )
        .unwrap();
        let bundle = state.run().unwrap();
        assert_eq!(bundle.prefix, "00000000");
        assert!(bundle.all_certificates_below_two);
        assert!(bundle.budgets_respected);
        assert!(bundle.prefix_in_every_level);
        assert_eq!(bundle.backtracks, vec![0, 0]);
        assert!(bundle
            .certificates
            .iter()
            .all(|row| row.value == "0/1"));
    }

    #[test]
    fn scripted_catch_forces_exactly_one_backtrack() {
        let cfg = two_level_config();
        let fixture = backtrack_fixture_pair(8);
        let state = ConstructionState::new(
            cfg,
            vec![
                (RosterKind::Scripted(vec![fixture]), Some(q(1, 8))),
                (RosterKind::Zero, None),
            ],
        )
        .unwrap();
        let bundle = state.run().unwrap();
        assert_eq!(bundle.backtracks[0], 1);
        assert_eq!(bundle.prefix, "00010000");
        assert!(bundle.all_certificates_below_two);
        assert!(bundle.prefix_in_every_level);
        // backtracking soundness: nothing below the abandoned candidate
        // 0000 ever enters a deeper test set
        assert!(bundle.v_sets[1].iter().all(|s| !s.starts_with("0000")));
    }

    #[test]
    fn roster_streams_are_valid_gale_sequences() {
        use crate::gales::{dominates, is_sided_at, is_supermartingale};
        let ladder = LadderConfig::default_ladder(2, 3);
        let kinds = vec![
            RosterKind::Zero,
            RosterKind::Chaser { budget: 4 },
            RosterKind::Scripted(vec![backtrack_fixture_pair(6)]),
            RosterKind::LpRefereed,
        ];
        for kind in kinds {
            let name = format!("{kind:?}");
            let mut member = RosterMember::new(kind, q(1, 8), 0, 6);
            let mut prev = member.snapshot().clone();
            let window = BitString::empty();
            for off in 0..5u32 {
                let leaf = BitString::from_value(3, off);
                member.react(
                    &RosterEvent::Enumerated {
                        level: 0,
                        leaf: &leaf,
                        window_root: &window,
                    },
                    &ladder,
                );
                member.react(&RosterEvent::Tick, &ladder);
                let cur = member.snapshot().clone();
                for j in 0..2usize {
                    assert!(is_supermartingale(cur.component(j)).ok, "{name}");
                    assert!(dominates(cur.component(j), prev.component(j)), "{name}");
                    for len in 0..6 {
                        for o in 0..(1u32 << len) {
                            let node = BitString::from_heap(len, o);
                            assert!(is_sided_at(cur.component(j), &node, j as u8), "{name} at {node}");
                        }
                    }
                }
                prev = cur;
            }
        }
    }

    #[test]
    fn runtime_threshold_violation_is_reported() {
        // a level-1 roster member arriving with a full unit of capital makes
        // the chain point breach c_1 the moment level 1 opens
        let cfg = two_level_config();
        let flat = GaleVector::new(vec![GaleTree::constant(8, q_one()), GaleTree::zero(8)]);
        let state = ConstructionState::new(
            cfg,
            vec![
                (RosterKind::Zero, None),
                (RosterKind::Scripted(vec![flat]), Some(q_one())),
            ],
        )
        .unwrap();
        match state.run() {
            Err(ConstructError::ThresholdViolation { level: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lp_roster_keeps_certificates_below_the_ladder() {
        let cfg = two_level_config();
        let state = ConstructionState::new(
            cfg.clone(),
            vec![(RosterKind::LpRefereed, None), (RosterKind::LpRefereed, None)],
        )
        .unwrap();
        let bundle = state.run().unwrap();
        assert!(bundle.all_certificates_below_two);
        assert!(bundle.budgets_respected);
        // every certificate stays strictly below d_0
        for row in &bundle.certificates {
            let v = crate::ratio::parse_frac(&row.value).unwrap();
            assert!(v < cfg.d[0], "certificate {} at m={}", row.value, row.m);
        }
    }
}
