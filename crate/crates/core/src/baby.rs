//! Adversaries: exact LP best responses, lazy policy handling, scripted
//! replays, random polytope vertices, and the exhaustive discrete-choice
//! soundness check.
//!
//! The LP kinds answer each round greedily: minimize the root 1-norm subject
//! to every referee rule, dominating the previous round's reply. Earlier
//! rounds' structure persists through domination, so only the newly
//! enumerated string needs a catching decision. Round-greedy play is not
//! guaranteed globally optimal across rounds; `exhaustive_verdict` is the
//! soundness bar and its report says so.

use crate::alice::{AliceMove, Strategy};
use crate::gales::{l1_at, GaleClass, GaleTree, GaleVector, SidePolicy};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::ratio::{q_one, q_zero, Q};
use crate::referee::{GameSpec, GameState, Status};
use crate::strings::BitString;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::{BTreeMap, BTreeSet};

/// One full Baby reply.
#[derive(Clone, Debug, PartialEq)]
pub struct BabyReply {
    pub gale: GaleVector,
    pub policies: Option<Vec<SidePolicy>>,
}

#[derive(Clone, Debug, thiserror::Error, PartialEq)]
pub enum RespondError {
    #[error("NO_VALID_MOVE: every catching choice is infeasible")]
    NoValidMove,
    #[error("adversary misuse: {0}")]
    Misuse(&'static str),
}

#[derive(Clone, Debug)]
pub enum AdversaryKind {
    /// Catch each enumerated string at the string itself.
    LpLeafCatch,
    /// Branch over the new string's ancestors, keep the global minimum.
    LpDisjunctive,
    /// Leaf catching with the lazy policy rule made explicit (the LP kinds
    /// already extend policies lazily; this name documents the intent).
    LazyMinimal,
    /// Replay recorded replies verbatim.
    Scripted(Vec<BabyReply>),
    /// Random vertex of the feasible polytope via a random objective.
    Random(u64),
    /// Used through `exhaustive_verdict`, not `respond`.
    Exhaustive(usize),
}

/// A scheduled commitment of component 0's root policy (the exhaustive
/// menu's branch parameter).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RootPolicySchedule {
    /// Commit when answering this (1-based) round.
    pub at_round: usize,
    pub bit: u8,
}

#[derive(Debug)]
pub struct AdversaryHandle {
    pub kind: AdversaryKind,
    script_cursor: usize,
    schedule: Option<RootPolicySchedule>,
    /// Keep component 0's root policy undefined unless the schedule fires.
    hold_root: bool,
}

impl AdversaryHandle {
    pub fn new(kind: AdversaryKind) -> Self {
        AdversaryHandle {
            kind,
            script_cursor: 0,
            schedule: None,
            hold_root: false,
        }
    }

    pub fn parse(id: &str) -> Result<Self, String> {
        let (name, arg) = match id.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (id, None),
        };
        let kind = match name {
            "lp" | "lp-disjunctive" => AdversaryKind::LpDisjunctive,
            "lp-leaf" | "lp-leaf-catch" => AdversaryKind::LpLeafCatch,
            "lazy" | "lazy-minimal" => AdversaryKind::LazyMinimal,
            "random" => {
                let seed = arg
                    .and_then(|a| a.strip_prefix("seed="))
                    .unwrap_or("0")
                    .parse::<u64>()
                    .map_err(|e| format!("bad seed: {e}"))?;
                AdversaryKind::Random(seed)
            }
            other => return Err(format!("unknown adversary {other:?}")),
        };
        Ok(AdversaryHandle::new(kind))
    }

    /// The exhaustive menu's "never" branch.
    pub fn with_root_held(mut self) -> Self {
        self.hold_root = true;
        self
    }

    pub fn with_schedule(mut self, schedule: RootPolicySchedule) -> Self {
        self.schedule = Some(schedule);
        self.hold_root = true;
        self
    }

    pub fn id(&self) -> String {
        match &self.kind {
            AdversaryKind::LpLeafCatch => "lp-leaf-catch".into(),
            AdversaryKind::LpDisjunctive => "lp-disjunctive".into(),
            AdversaryKind::LazyMinimal => "lazy-minimal".into(),
            AdversaryKind::Scripted(_) => "scripted".into(),
            AdversaryKind::Random(seed) => format!("random:seed={seed}"),
            AdversaryKind::Exhaustive(budget) => format!("exhaustive:budget={budget}"),
        }
    }

    /// A reply the referee accepts, or `NoValidMove`.
    pub fn respond(&mut self, state: &GameState) -> Result<BabyReply, RespondError> {
        match &self.kind {
            AdversaryKind::Scripted(script) => {
                let reply = script
                    .get(self.script_cursor)
                    .cloned()
                    .ok_or(RespondError::Misuse("script exhausted"))?;
                self.script_cursor += 1;
                Ok(reply)
            }
            AdversaryKind::Exhaustive(_) => Err(RespondError::Misuse(
                "the exhaustive adversary runs through exhaustive_verdict",
            )),
            AdversaryKind::Random(seed) => {
                let round_seed =
                    seed ^ (state.round() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                let mut rng = ChaCha12Rng::seed_from_u64(round_seed);
                self.lp_respond(state, Some(&mut rng))
            }
            AdversaryKind::LpLeafCatch
            | AdversaryKind::LpDisjunctive
            | AdversaryKind::LazyMinimal => self.lp_respond(state, None),
        }
    }

    fn lp_respond(
        &self,
        state: &GameState,
        mut rng: Option<&mut ChaCha12Rng>,
    ) -> Result<BabyReply, RespondError> {
        let new_leaf = *state
            .enumerated()
            .last()
            .expect("respond is called after an Alice move");
        let need = &state.spec().scale * state.spec().catch_threshold();
        let at_leaf = state.spec().catch_at_leaf();

        // domination makes the previous optimum a floor; a string already
        // caught by the floor makes the unchanged previous reply optimal
        if let Some(prev) = state.latest() {
            let already = if at_leaf {
                l1_at(prev, &new_leaf) >= need
            } else {
                new_leaf.ancestors().any(|anc| l1_at(prev, &anc) >= need)
            };
            if already {
                let mut policies = self.carry_policies(state);
                // a scheduled commitment still happens: equality satisfies
                // either orientation, so the unchanged gale stays valid
                if let (Some(RootFreeze::Commit(b)), Some(pols)) =
                    (self.forced_root_policy(state), policies.as_mut())
                {
                    pols[0].set(BitString::empty(), b);
                }
                return Ok(BabyReply {
                    gale: prev.clone(),
                    policies,
                });
            }
        }

        let candidates: Vec<BitString> = if at_leaf {
            vec![new_leaf]
        } else {
            match (&self.kind, &mut rng) {
                (AdversaryKind::LpDisjunctive, _) => {
                    let mut v: Vec<BitString> = new_leaf.ancestors().collect();
                    v.reverse(); // deepest first; strict improvement to switch
                    v
                }
                (AdversaryKind::Random(_), Some(r)) => {
                    let all: Vec<BitString> = new_leaf.ancestors().collect();
                    vec![all[r.gen_range(0..all.len())]]
                }
                _ => vec![new_leaf],
            }
        };

        let mut best: Option<(Q, BabyReply)> = None;
        for cand in candidates {
            if let Some((value, reply)) = self.solve_candidate(state, &cand, rng.as_deref_mut()) {
                let better = match &best {
                    None => true,
                    Some((b, _)) => value < *b,
                };
                if better {
                    best = Some((value, reply));
                }
            }
        }
        best.map(|(_, r)| r).ok_or(RespondError::NoValidMove)
    }

    fn carry_policies(&self, state: &GameState) -> Option<Vec<SidePolicy>> {
        if state.spec().is_partial() {
            Some(
                state
                    .latest_policies()
                    .cloned()
                    .unwrap_or_else(|| vec![SidePolicy::empty(); state.spec().k()]),
            )
        } else {
            None
        }
    }

    /// Lazy two-pass solve for one catching choice. Pass A keeps every
    /// uncommitted orientation equal; pass B frees them and commits whatever
    /// came out strictly unequal. B wins only when strictly cheaper.
    fn solve_candidate(
        &self,
        state: &GameState,
        catch_node: &BitString,
        mut rng: Option<&mut ChaCha12Rng>,
    ) -> Option<(Q, BabyReply)> {
        let forced = self.forced_root_policy(state);
        if let Some(r) = rng.as_deref_mut() {
            return solve_reply(state, catch_node, Freedom::Free, forced, Some(r));
        }
        let a = solve_reply(state, catch_node, Freedom::Equalities, forced, None);
        let b = if self.allows_freedom(state) {
            solve_reply(state, catch_node, Freedom::Free, forced, None)
        } else {
            None
        };
        match (a, b) {
            (Some(pa), Some(pb)) => Some(if pb.0 < pa.0 { pb } else { pa }),
            (Some(pa), None) => Some(pa),
            (None, some_b) => some_b,
        }
    }

    fn allows_freedom(&self, state: &GameState) -> bool {
        state.spec().is_partial() || state.spec().class() == Some(GaleClass::Kaster)
    }

    fn forced_root_policy(&self, state: &GameState) -> Option<RootFreeze> {
        if !state.spec().is_partial() {
            return None;
        }
        if let Some(sched) = self.schedule {
            if state.round() + 1 == sched.at_round {
                return Some(RootFreeze::Commit(sched.bit));
            }
        }
        if self.hold_root {
            let committed = state
                .latest_policies()
                .map(|p| p[0].get(&BitString::empty()).is_some())
                .unwrap_or(false);
            if !committed {
                return Some(RootFreeze::HoldEqual);
            }
        }
        None
    }
}

/// What the lazy policy rule decides for the round being answered: the
/// policies the reply would carry, extended only where strictly cheaper.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyDecision {
    pub policies: Vec<SidePolicy>,
    /// Nodes committed by this round's reply (empty when equality is as
    /// cheap as betting).
    pub new_commitments: Vec<(usize, BitString, u8)>,
}

/// The adversary's policy-extension decision for the current round: never
/// extend until a node needs unequal children to lower the objective, then
/// commit the orientation the LP prefers.
pub fn policy_heuristic(
    adv: &AdversaryHandle,
    state: &GameState,
) -> Result<PolicyDecision, RespondError> {
    if !state.spec().is_partial() {
        return Err(RespondError::Misuse("policy decisions exist in partial games only"));
    }
    let new_leaf = *state
        .enumerated()
        .last()
        .expect("called after an Alice move");
    let (_, reply) = adv
        .solve_candidate(state, &new_leaf, None)
        .ok_or(RespondError::NoValidMove)?;
    let old = state.latest_policies().cloned().unwrap_or_else(|| {
        vec![SidePolicy::empty(); state.spec().k()]
    });
    let policies = reply.policies.expect("partial games carry policies");
    let mut new_commitments = Vec::new();
    for (j, (newer, older)) in policies.iter().zip(&old).enumerate() {
        for (s, b) in newer.domain() {
            if older.get(s).is_none() {
                new_commitments.push((j, *s, b));
            }
        }
    }
    Ok(PolicyDecision {
        policies,
        new_commitments,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Freedom {
    Equalities,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RootFreeze {
    HoldEqual,
    Commit(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NodeRule {
    Equal,
    Oriented(u8),
    Free,
}

/// Builds and solves the round LP for a fixed catching point over the
/// ancestor closure of the targets (inactive nodes stay at their floors).
/// Returns the root 1-norm of the reply and the reply itself.
fn solve_reply(
    state: &GameState,
    catch_node: &BitString,
    freedom: Freedom,
    forced_root: Option<RootFreeze>,
    mut random_objective: Option<&mut ChaCha12Rng>,
) -> Option<(Q, BabyReply)> {
    let spec = state.spec();
    let n = spec.depth();
    let k = spec.k();
    let new_leaf = *state.enumerated().last().expect("after an Alice move");
    let floors: Vec<GaleTree> = match state.latest() {
        Some(prev) => prev.components().to_vec(),
        None => (0..k).map(|_| GaleTree::zero(n)).collect(),
    };

    let mut active: BTreeSet<BitString> = BTreeSet::new();
    for target in [&new_leaf, catch_node] {
        for anc in target.ancestors() {
            active.insert(anc);
            if !anc.is_empty() {
                let parent = anc.parent().unwrap();
                active.insert(parent.push(1 - anc.bit(anc.len() - 1)));
            }
        }
    }
    let active: Vec<BitString> = active.into_iter().collect();
    let index: BTreeMap<(BitString, usize), usize> = active
        .iter()
        .flat_map(|s| (0..k).map(move |j| (*s, j)))
        .enumerate()
        .map(|(i, key)| (key, i))
        .collect();
    let nvars = index.len();
    let var = |s: &BitString, j: usize| index.get(&(*s, j)).copied();

    let mut lp = LinearProgram::new(nvars);

    // catching at the chosen node
    {
        let mut row = vec![q_zero(); nvars];
        for j in 0..k {
            row[var(catch_node, j).expect("catch node is active")] = q_one();
        }
        let have: Q = (0..k).map(|j| floors[j].value(catch_node)).sum();
        let need = &spec.scale * spec.catch_threshold();
        lp.constrain(row, Relation::Ge, need - have);
    }

    let committed = state.latest_policies();
    let kaster = spec.class() == Some(GaleClass::Kaster);
    let much = match spec.class() {
        Some(GaleClass::Much { l, i }) => Some((l, i)),
        _ => None,
    };
    for s in &active {
        if s.len() >= n {
            continue;
        }
        let (c0, c1) = (s.push(0), s.push(1));
        if var(&c0, 0).is_none() {
            continue; // children inactive: floors keep every rule
        }
        for j in 0..k {
            let y_s = var(s, j).expect("parent of an active node is active");
            let y0 = var(&c0, j).unwrap();
            let y1 = var(&c1, j).expect("siblings are active together");

            let mut row = vec![q_zero(); nvars];
            row[y_s] = crate::ratio::q_int(2);
            row[y0] -= q_one();
            row[y1] -= q_one();
            let rhs = floors[j].value(&c0) + floors[j].value(&c1)
                - crate::ratio::q_int(2) * floors[j].value(s);
            lp.constrain(row, Relation::Ge, rhs);

            match node_rule(spec, s, j, committed, kaster, state, freedom, forced_root) {
                NodeRule::Free => {}
                NodeRule::Equal => {
                    let mut row = vec![q_zero(); nvars];
                    row[y0] = q_one();
                    row[y1] -= q_one();
                    lp.constrain(
                        row,
                        Relation::Eq,
                        floors[j].value(&c1) - floors[j].value(&c0),
                    );
                }
                NodeRule::Oriented(b) => {
                    let (yb, yo) = if b == 0 { (y0, y1) } else { (y1, y0) };
                    let (cb, co) = if b == 0 { (&c0, &c1) } else { (&c1, &c0) };
                    let mut row = vec![q_zero(); nvars];
                    row[yb] = q_one();
                    row[yo] -= q_one();
                    lp.constrain(row, Relation::Ge, floors[j].value(co) - floors[j].value(cb));
                }
            }

            if let Some((l, i)) = much {
                if s.len() % l == i {
                    for (yc, cc) in [(y0, &c0), (y1, &c1)] {
                        let mut row = vec![q_zero(); nvars];
                        row[y_s] = q_one();
                        row[yc] -= q_one();
                        lp.constrain(
                            row,
                            Relation::Ge,
                            floors[j].value(cc) - floors[j].value(s),
                        );
                    }
                }
            }
        }
    }

    if let Some(ceiling) = spec.restriction_ceiling() {
        let cap = &spec.scale * ceiling;
        for s in &active {
            let mut row = vec![q_zero(); nvars];
            for j in 0..k {
                row[var(s, j).unwrap()] = q_one();
            }
            let have: Q = (0..k).map(|j| floors[j].value(s)).sum();
            lp.constrain(row, Relation::Le, &cap - have);
        }
    }

    let objective = match random_objective.as_deref_mut() {
        Some(r) => (0..nvars)
            .map(|_| crate::ratio::q(r.gen_range(1..9), 1))
            .collect(),
        None => {
            let mut obj = vec![q_zero(); nvars];
            for j in 0..k {
                obj[var(&BitString::empty(), j).expect("root is active")] = q_one();
            }
            obj
        }
    };
    lp.set_objective(objective);

    let LpOutcome::Optimal { assignment, .. } = crate::lp::solve(&lp) else {
        return None;
    };

    let mut comps = floors.clone();
    for (key, &i) in &index {
        if assignment[i].is_zero() {
            continue;
        }
        let (s, j) = key;
        let v = comps[*j].value(s) + &assignment[i];
        comps[*j].set(s, v);
    }
    let gale = GaleVector::new(comps);
    let value = l1_at(&gale, &BitString::empty());

    let policies = if spec.is_partial() {
        let mut pols = state
            .latest_policies()
            .cloned()
            .unwrap_or_else(|| vec![SidePolicy::empty(); k]);
        if let Some(RootFreeze::Commit(b)) = forced_root {
            pols[0].set(BitString::empty(), b);
        }
        if freedom == Freedom::Free {
            for s in &active {
                if s.len() >= n || var(&s.push(0), 0).is_none() {
                    continue;
                }
                for (j, pol) in pols.iter_mut().enumerate() {
                    if pol.get(s).is_some() {
                        continue;
                    }
                    if s.is_empty() && j == 0 && matches!(forced_root, Some(RootFreeze::HoldEqual))
                    {
                        continue;
                    }
                    let v0 = gale.component(j).value(&s.push(0));
                    let v1 = gale.component(j).value(&s.push(1));
                    if v0 > v1 {
                        pol.set(*s, 0);
                    } else if v1 > v0 {
                        pol.set(*s, 1);
                    }
                }
            }
        }
        Some(pols)
    } else {
        None
    };

    Some((value, BabyReply { gale, policies }))
}

#[allow(clippy::too_many_arguments)]
fn node_rule(
    spec: &GameSpec,
    s: &BitString,
    j: usize,
    committed: Option<&Vec<SidePolicy>>,
    kaster: bool,
    state: &GameState,
    freedom: Freedom,
    forced_root: Option<RootFreeze>,
) -> NodeRule {
    if spec.is_partial() {
        if let Some(pols) = committed {
            if let Some(b) = pols[j].get(s) {
                return NodeRule::Oriented(b);
            }
        }
        if s.is_empty() && j == 0 {
            match forced_root {
                Some(RootFreeze::Commit(b)) => return NodeRule::Oriented(b),
                Some(RootFreeze::HoldEqual) => return NodeRule::Equal,
                None => {}
            }
        }
        return match freedom {
            Freedom::Equalities => NodeRule::Equal,
            Freedom::Free => NodeRule::Free,
        };
    }
    if kaster {
        let mut locked: Option<u8> = None;
        for old in state.history() {
            let v0 = old.component(j).value(&s.push(0));
            let v1 = old.component(j).value(&s.push(1));
            if v0 > v1 {
                locked = Some(0);
                break;
            }
            if v1 > v0 {
                locked = Some(1);
                break;
            }
        }
        return match (locked, freedom) {
            (Some(b), _) => NodeRule::Oriented(b),
            (None, Freedom::Equalities) => NodeRule::Equal,
            (None, Freedom::Free) => NodeRule::Free,
        };
    }
    if spec.class().is_some() {
        // stage-restricted classes carry no orientation constraints
        return NodeRule::Free;
    }
    // fixed two-component layout: component j is j-sided everywhere
    NodeRule::Oriented(j as u8)
}

// ---------------------------------------------------------------------------
// One-shot sided minima (the depth-2 lower-bound checks).

/// Gale layout for the one-shot minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SidedLayout {
    /// One component, `bit`-sided at every node.
    Single(u8),
    /// The 0-sided/1-sided pair.
    Pair,
}

/// Exact minimum root 1-norm of a sided gale that catches every target at
/// some ancestor with capital `>= 1`, minimized over all catching-point
/// assignments. Exponential in the number of targets; meant for tiny
/// instances.
pub fn min_root_sided_catch(n: usize, layout: SidedLayout, targets: &[BitString]) -> Option<Q> {
    let k = match layout {
        SidedLayout::Single(_) => 1,
        SidedLayout::Pair => 2,
    };
    let node_count = (1usize << (n + 1)) - 1;
    let var = |s: &BitString, j: usize| j * node_count + s.heap_index();
    let mut best: Option<Q> = None;
    let mut assignment = vec![0usize; targets.len()];
    loop {
        let mut lp = LinearProgram::new(k * node_count);
        let mut obj = vec![q_zero(); k * node_count];
        for j in 0..k {
            obj[var(&BitString::empty(), j)] = q_one();
        }
        lp.set_objective(obj);
        for len in 0..n {
            for off in 0..(1u32 << len) {
                let s = BitString::from_heap(len, off);
                let (c0, c1) = (s.push(0), s.push(1));
                for j in 0..k {
                    let mut row = vec![q_zero(); k * node_count];
                    row[var(&s, j)] = crate::ratio::q_int(2);
                    row[var(&c0, j)] = -q_one();
                    row[var(&c1, j)] = -q_one();
                    lp.constrain(row, Relation::Ge, q_zero());
                    let b = match layout {
                        SidedLayout::Single(bit) => bit,
                        SidedLayout::Pair => j as u8,
                    };
                    let mut row = vec![q_zero(); k * node_count];
                    row[var(if b == 0 { &c0 } else { &c1 }, j)] = q_one();
                    row[var(if b == 0 { &c1 } else { &c0 }, j)] = -q_one();
                    lp.constrain(row, Relation::Ge, q_zero());
                }
            }
        }
        for (i, t) in targets.iter().enumerate() {
            let catch = t.prefix(assignment[i]);
            let mut row = vec![q_zero(); k * node_count];
            for j in 0..k {
                row[var(&catch, j)] = q_one();
            }
            lp.constrain(row, Relation::Ge, q_one());
        }
        if let LpOutcome::Optimal { value, .. } = crate::lp::solve(&lp) {
            best = Some(match best {
                None => value,
                Some(b) => b.min(value),
            });
        }
        // next catching assignment in mixed radix (depth 0..=|target|)
        let mut i = 0;
        loop {
            if i == targets.len() {
                return best;
            }
            assignment[i] += 1;
            if assignment[i] <= targets[i].len() {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Exhaustive soundness check.

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    AliceAlwaysWins { max_cost: Q },
    Counterexample { branch: String, status: Status, cost: Q },
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub branches_run: usize,
    /// Catching points inside each branch come from the per-round greedy
    /// LP; the branch space covers the policy menu only.
    pub greedy_catching: bool,
}

/// Enumerates Baby's discrete choices (the root-policy menu of "never"
/// plus every `(round, bit)` pair), playing each branch with the greedy LP
/// responder. `AliceAlwaysWins` requires every branch to end in a win with
/// cost at most `cost_bound`.
pub fn exhaustive_verdict(
    spec: &GameSpec,
    mut alice_factory: impl FnMut() -> Box<dyn Strategy>,
    cost_bound: &Q,
    budget: usize,
) -> VerdictReport {
    let mut branches_run = 0usize;
    let mut max_cost = q_zero();

    fn run_branch(
        spec: &GameSpec,
        adv: AdversaryHandle,
        name: &str,
        cost_bound: &Q,
        branches_run: &mut usize,
        alice_factory: &mut dyn FnMut() -> Box<dyn Strategy>,
    ) -> Result<(Q, usize), Verdict> {
        *branches_run += 1;
        let mut adv = adv;
        let mut strategy = alice_factory();
        match run_to_end(spec, strategy.as_mut(), &mut adv) {
            BranchEnd::Won { cost, rounds } => {
                if &cost > cost_bound {
                    Err(Verdict::Counterexample {
                        branch: name.into(),
                        status: Status::Ongoing,
                        cost,
                    })
                } else {
                    Ok((cost, rounds))
                }
            }
            // Baby had no legal reply: cannot prevent the win
            BranchEnd::Forfeit { cost, rounds } => Ok((cost, rounds)),
            BranchEnd::Failed { status, cost } => Err(Verdict::Counterexample {
                branch: name.into(),
                status,
                cost,
            }),
        }
    }

    let never = AdversaryHandle::new(AdversaryKind::LpLeafCatch).with_root_held();
    let rounds = match run_branch(
        spec,
        never,
        "never",
        cost_bound,
        &mut branches_run,
        &mut alice_factory,
    ) {
        Ok((cost, rounds)) => {
            if cost > max_cost {
                max_cost = cost;
            }
            rounds
        }
        Err(v) => {
            return VerdictReport {
                verdict: v,
                branches_run,
                greedy_catching: true,
            }
        }
    };

    if spec.is_partial() {
        for r in 1..=rounds {
            for bit in 0..2u8 {
                if branches_run >= budget {
                    return VerdictReport {
                        verdict: Verdict::BudgetExhausted,
                        branches_run,
                        greedy_catching: true,
                    };
                }
                let adv = AdversaryHandle::new(AdversaryKind::LpLeafCatch)
                    .with_schedule(RootPolicySchedule { at_round: r, bit });
                match run_branch(
                    spec,
                    adv,
                    &format!("commit(r={r},b={bit})"),
                    cost_bound,
                    &mut branches_run,
                    &mut alice_factory,
                ) {
                    Ok((cost, _)) => {
                        if cost > max_cost {
                            max_cost = cost;
                        }
                    }
                    Err(v) => {
                        return VerdictReport {
                            verdict: v,
                            branches_run,
                            greedy_catching: true,
                        }
                    }
                }
            }
        }
    }

    VerdictReport {
        verdict: Verdict::AliceAlwaysWins { max_cost },
        branches_run,
        greedy_catching: true,
    }
}

enum BranchEnd {
    Won { cost: Q, rounds: usize },
    Forfeit { cost: Q, rounds: usize },
    Failed { status: Status, cost: Q },
}

fn run_to_end(
    spec: &GameSpec,
    strategy: &mut dyn Strategy,
    adv: &mut AdversaryHandle,
) -> BranchEnd {
    let mut state = crate::referee::new_game(spec.clone());
    loop {
        match state.status() {
            Status::Ongoing => {}
            Status::AliceWon(_) => {
                return BranchEnd::Won {
                    cost: state.cost(),
                    rounds: state.round(),
                }
            }
            other => {
                return BranchEnd::Failed {
                    status: other,
                    cost: state.cost(),
                }
            }
        }
        let mv = match strategy.next_move(&state) {
            Ok(m) => m,
            Err(_) => {
                return BranchEnd::Failed {
                    status: state.status(),
                    cost: state.cost(),
                }
            }
        };
        match mv {
            AliceMove::PassToWin => {
                // the referee disagrees (status is Ongoing): a mismatch
                return BranchEnd::Failed {
                    status: state.status(),
                    cost: state.cost(),
                };
            }
            AliceMove::Enumerate(s) => {
                state = match state.alice_move(s) {
                    Ok(next) => next,
                    Err(_) => {
                        return BranchEnd::Failed {
                            status: state.status(),
                            cost: state.cost(),
                        }
                    }
                };
            }
        }
        match adv.respond(&state) {
            Ok(reply) => {
                state = match state.baby_move(reply.gale, reply.policies) {
                    Ok(next) => next,
                    Err(rej) => {
                        return BranchEnd::Failed {
                            status: Status::InvalidBaby(rej),
                            cost: state.cost(),
                        }
                    }
                };
            }
            Err(RespondError::NoValidMove) => {
                return BranchEnd::Forfeit {
                    cost: state.cost(),
                    rounds: state.round(),
                }
            }
            Err(RespondError::Misuse(_)) => {
                return BranchEnd::Failed {
                    status: state.status(),
                    cost: state.cost(),
                }
            }
        }
    }
}
