//! Command-line surface: play games, verify the variance claims, run the
//! exhaustive soundness check, drive the construction, and poke the LP
//! solver. Rationals print as `p/q` everywhere; every run is reproducible
//! from its recorded seed.
//!
//! Exit status: 0 on success (Alice won within contract / zero violations /
//! bundle checks hold), 1 when the checked property fails, 2 on usage or
//! configuration errors.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use galesim::alice::{
    build_pipeline, lex_variance_strategy, muchgale_strategy, variance_induction_strategy,
    variance_k1_strategy, Strategy,
};
use galesim::baby::{exhaustive_verdict, AdversaryHandle, Verdict};
use galesim::gales::GaleClass;
use galesim::play::{self, RunVerdict};
use galesim::ratio::{fmt_frac, parse_frac, q_int, q_one, Q};
use galesim::referee::{GameKind, GameSpec};
use galesim::stats;
use galesim::strings::BitString;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::json;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "galesim", about = "exact adversarial betting-game engine", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Play one game: a named strategy against a named adversary.
    Play {
        /// "auto" derives the game from the strategy; or e.g.
        /// "sided:c=1/2,d=1,n=2", "variance-partial:a=4,Delta=1/64,m=4,k=1",
        /// "class-much:l=2,i=0,n=4,c=1"
        #[arg(long, default_value = "auto")]
        game: String,
        /// e.g. "muchgale:l=2,i=0,n=4", "variance-k1:a=4,m=4",
        /// "lex-variance:a=1,delta=1/4,n=4", "pipeline:c=1/4,eps=3/4"
        #[arg(long)]
        alice: String,
        /// "lp", "lp-leaf", "lazy", "random:seed=7", or "exhaustive[:budget=N]"
        #[arg(long)]
        baby: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trace output path (JSON lines).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 14)]
        depth_budget: usize,
    },
    /// Run the property samplers for the variance claims.
    VerifyClaims {
        /// one of: sqrtvar, budget, total-variance
        #[arg(long)]
        which: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the claim constant (e.g. a deliberately corrupted 1).
        #[arg(long)]
        constant: Option<String>,
    },
    /// Run the construction driver and emit its bundle.
    Construct {
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Key-value config file with rational values as p/q.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated roster kinds: zero, chaser, lp, backtrack-fixture.
        #[arg(long, default_value = "lp,zero")]
        roster: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a linear program from a JSON dump.
    LpSolve {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Re-validate a recorded trace bit-exactly.
    Replay {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_kv(args: &str) -> BTreeMap<String, String> {
    args.split(',')
        .filter(|p| !p.is_empty())
        .filter_map(|p| p.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

fn kv_q(kv: &BTreeMap<String, String>, key: &str, default: Option<Q>) -> Result<Q> {
    match kv.get(key) {
        Some(v) => parse_frac(v).map_err(|e| anyhow!(e)),
        None => default.ok_or_else(|| anyhow!("missing parameter {key}")),
    }
}

fn kv_usize(kv: &BTreeMap<String, String>, key: &str, default: Option<usize>) -> Result<usize> {
    match kv.get(key) {
        Some(v) => v.parse().context(format!("bad {key}")),
        None => default.ok_or_else(|| anyhow!("missing parameter {key}")),
    }
}

fn parse_game(id: &str) -> Result<GameSpec> {
    let (name, rest) = id.split_once(':').unwrap_or((id, ""));
    let kv = parse_kv(rest);
    let kind = match name {
        "sided" => GameKind::Sided {
            c: kv_q(&kv, "c", None)?,
            d: kv_q(&kv, "d", Some(q_one()))?,
            n: kv_usize(&kv, "n", None)?,
        },
        "dynamic-sided" => GameKind::DynamicSided {
            a: kv_q(&kv, "a", None)?,
            n: kv_usize(&kv, "n", None)?,
        },
        "restricted-dynamic-sided" => GameKind::RestrictedDynamicSided {
            a: kv_q(&kv, "a", None)?,
            delta: kv_q(&kv, "delta", None)?,
            n: kv_usize(&kv, "n", None)?,
        },
        "partial-sided" => GameKind::PartialSided {
            c: kv_q(&kv, "c", None)?,
            n: kv_usize(&kv, "n", None)?,
            k: kv_usize(&kv, "k", Some(1))?,
        },
        "dynamic-partial" => GameKind::DynamicPartial {
            a: kv_q(&kv, "a", None)?,
            n: kv_usize(&kv, "n", None)?,
            k: kv_usize(&kv, "k", Some(1))?,
        },
        "restricted-dynamic-partial" => GameKind::RestrictedDynamicPartial {
            a: kv_q(&kv, "a", None)?,
            delta: kv_q(&kv, "delta", None)?,
            n: kv_usize(&kv, "n", None)?,
            k: kv_usize(&kv, "k", Some(1))?,
        },
        "variance-partial" => GameKind::VariancePartial {
            a: kv_q(&kv, "a", None)?,
            big_delta: kv_q(&kv, "Delta", None)?,
            m: kv_usize(&kv, "m", None)?,
            k: kv_usize(&kv, "k", Some(1))?,
        },
        "class-much" => GameKind::ClassGame {
            class: GaleClass::Much {
                l: kv_usize(&kv, "l", None)?,
                i: kv_usize(&kv, "i", None)?,
            },
            c: kv_q(&kv, "c", Some(q_one()))?,
            n: kv_usize(&kv, "n", None)?,
            k: kv_usize(&kv, "k", Some(1))?,
        },
        "class-kaster" => GameKind::ClassGame {
            class: GaleClass::Kaster,
            c: kv_q(&kv, "c", Some(q_one()))?,
            n: kv_usize(&kv, "n", None)?,
            k: kv_usize(&kv, "k", Some(1))?,
        },
        other => bail!("unknown game kind {other:?}"),
    };
    GameSpec::new(kind).map_err(|e| anyhow!("{e}"))
}

/// Builds a strategy and, when derivable, the game it plays.
fn parse_alice(id: &str, depth_budget: usize) -> Result<(Box<dyn Strategy>, Option<GameSpec>)> {
    let (name, rest) = id.split_once(':').unwrap_or((id, ""));
    let kv = parse_kv(rest);
    match name {
        "muchgale" => {
            let l = kv_usize(&kv, "l", None)?;
            let i = kv_usize(&kv, "i", None)?;
            let n = kv_usize(&kv, "n", None)?;
            let spec = GameSpec::new(GameKind::ClassGame {
                class: GaleClass::Much { l, i },
                c: q_one(),
                n,
                k: 1,
            })
            .map_err(|e| anyhow!("{e}"))?;
            Ok((muchgale_strategy(l, i, n), Some(spec)))
        }
        "variance-k1" => {
            let a = kv_q(&kv, "a", None)?;
            let m = kv_usize(&kv, "m", None)?;
            let delta = kv_q(&kv, "Delta", Some(parse_frac("1/64").unwrap()))?;
            let spec = GameSpec::new(GameKind::VariancePartial {
                a: a.clone(),
                big_delta: delta,
                m,
                k: 1,
            })
            .map_err(|e| anyhow!("{e}"))?;
            Ok((variance_k1_strategy(a, m), Some(spec)))
        }
        "variance-induction" => {
            let a = kv_q(&kv, "a", None)?;
            let k = kv_usize(&kv, "k", Some(2))?;
            let m = kv_usize(&kv, "m", None)?;
            let delta_hat = kv_q(&kv, "delta_hat", Some(parse_frac("1/8").unwrap()))?;
            let ratio = &delta_hat / q_int(2 * k as i64);
            let delta = galesim::ratio::q_pow2_neg(m) * &ratio * &ratio;
            let spec = GameSpec::new(GameKind::VariancePartial {
                a: a.clone(),
                big_delta: delta,
                m,
                k,
            })
            .map_err(|e| anyhow!("{e}"))?;
            Ok((variance_induction_strategy(a, k, m, delta_hat), Some(spec)))
        }
        "lex-variance" => {
            let a = kv_q(&kv, "a", None)?;
            let delta = kv_q(&kv, "delta", None)?;
            let n = kv_usize(&kv, "n", None)?;
            let spec = GameSpec::new(GameKind::RestrictedDynamicSided {
                a: a.clone(),
                delta: delta.clone(),
                n,
            })
            .map_err(|e| anyhow!("{e}"))?;
            Ok((lex_variance_strategy(a, delta, n), Some(spec)))
        }
        "pipeline" => {
            let c = kv_q(&kv, "c", None)?;
            let eps = kv_q(&kv, "eps", None)?;
            let (s, params) = build_pipeline(&c, &eps, depth_budget).map_err(|e| anyhow!("{e}"))?;
            eprintln!(
                "pipeline ledger: {}",
                serde_json::to_string(&params).expect("serializable")
            );
            let spec = params.game();
            Ok((s, Some(spec)))
        }
        other => bail!("unknown strategy {other:?}"),
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().cmd {
        Cmd::Play {
            game,
            alice,
            baby,
            seed,
            out,
            depth_budget,
        } => {
            let (mut strategy, derived) = parse_alice(&alice, depth_budget)?;
            let spec = if game == "auto" {
                derived.ok_or_else(|| anyhow!("strategy has no derived game; pass --game"))?
            } else {
                parse_game(&game)?
            };
            if baby == "exhaustive" || baby.starts_with("exhaustive:") {
                let budget = baby
                    .split_once("budget=")
                    .map(|(_, b)| b.parse().unwrap_or(256))
                    .unwrap_or(256);
                let bound = strategy.cost_bound().unwrap_or_else(q_one);
                let alice_id = alice.clone();
                let report = exhaustive_verdict(
                    &spec,
                    move || parse_alice(&alice_id, depth_budget).expect("parsed once").0,
                    &bound,
                    budget,
                );
                println!(
                    "{}",
                    json!({
                        "verdict": match &report.verdict {
                            Verdict::AliceAlwaysWins { max_cost } =>
                                json!({"alice_always_wins": {"max_cost": fmt_frac(max_cost)}}),
                            Verdict::Counterexample { branch, status, cost } =>
                                json!({"counterexample": {"branch": branch,
                                        "status": status.to_string(), "cost": fmt_frac(cost)}}),
                            Verdict::BudgetExhausted => json!("budget_exhausted"),
                        },
                        "branches": report.branches_run,
                        "greedy_catching": report.greedy_catching,
                    })
                );
                return Ok(match report.verdict {
                    Verdict::AliceAlwaysWins { .. } => ExitCode::SUCCESS,
                    _ => ExitCode::from(1),
                });
            }
            let mut adversary = AdversaryHandle::parse(&baby).map_err(|e| anyhow!(e))?;
            let max_rounds = 2 << spec.depth();
            let outcome =
                play::run(&spec, strategy.as_mut(), &mut adversary, Some(seed), max_rounds);
            if let Some(path) = out {
                std::fs::write(&path, play::trace_to_jsonl(&outcome.trace))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let (ok, verdict_json) = match &outcome.verdict {
                RunVerdict::AliceWon { cost, within_bound } => (
                    *within_bound,
                    json!({"alice_won": {"cost": fmt_frac(cost), "within_bound": within_bound}}),
                ),
                RunVerdict::BabyForfeit { cost } => {
                    (true, json!({"baby_forfeit": {"cost": fmt_frac(cost)}}))
                }
                RunVerdict::Loss { status } => (false, json!({"loss": status.to_string()})),
                RunVerdict::PassMismatch => (false, json!("pass_mismatch")),
                RunVerdict::StrategyFailed(e) => (false, json!({"strategy_failed": e.to_string()})),
            };
            println!(
                "{}",
                json!({
                    "game": spec.id(),
                    "alice": alice,
                    "baby": baby,
                    "seed": seed,
                    "rounds": outcome.state.round(),
                    "cost": fmt_frac(&outcome.state.cost()),
                    "status": outcome.state.status().to_string(),
                    "verdict": verdict_json,
                })
            );
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::VerifyClaims {
            which,
            samples,
            seed,
            constant,
        } => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let constant = constant
                .map(|c| parse_frac(&c))
                .transpose()
                .map_err(|e| anyhow!(e))?;
            let mut violations: Vec<serde_json::Value> = Vec::new();
            match which.as_str() {
                "sqrtvar" => {
                    let c = constant.unwrap_or_else(stats::default_sqrtvar_constant);
                    for i in 0..samples {
                        let v = stats::sample_sqrtvar_instance(&mut rng);
                        match stats::check_claim_sqrtvar(&v, &c) {
                            Ok(true) => {}
                            Ok(false) => violations.push(json!({"sample": i, "instance": v})),
                            Err(p) => bail!("sampler produced an invalid instance: {}", p.what),
                        }
                        if violations.len() >= 3 {
                            break;
                        }
                    }
                }
                "budget" => {
                    // deterministic battery first, then the seeded samples
                    let witness = stats::budget_violation_witness();
                    let chain = stats::sample_chain(&mut rng, 2, 2);
                    let c2 = constant
                        .clone()
                        .unwrap_or_else(|| stats::default_budget_constant(2));
                    match stats::check_budget_bound(&witness, &chain, &c2) {
                        Ok(true) => {}
                        Ok(false) => {
                            violations.push(json!({"sample": "canonical-witness", "instance": witness}))
                        }
                        Err(p) => bail!("canonical witness invalid: {}", p.what),
                    }
                    for i in 0..samples {
                        let k = 1 + (i % 3);
                        let depth = 4 + (i % 7);
                        let levels = 1 + (i % 6);
                        let (v, chain) = stats::sample_budget_instance(&mut rng, k, depth, levels);
                        let c = constant
                            .clone()
                            .unwrap_or_else(|| stats::default_budget_constant(k));
                        match stats::check_budget_bound(&v, &chain, &c) {
                            Ok(true) => {}
                            Ok(false) => violations.push(json!({"sample": i, "k": k})),
                            Err(p) => bail!("sampler produced an invalid instance: {}", p.what),
                        }
                        if violations.len() >= 3 {
                            break;
                        }
                    }
                }
                "total-variance" => {
                    for i in 0..samples {
                        let depth = 3 + (i % 5);
                        let (v, chain) = stats::sample_budget_instance(&mut rng, 1, depth, 3);
                        let leaves: Vec<Q> = (0..(1u32 << depth))
                            .map(|off| {
                                v.component(0)
                                    .value(&BitString::from_heap(depth, off))
                                    .clone()
                            })
                            .collect();
                        let hat = stats::martingale_completion(depth, &leaves);
                        let hv = galesim::gales::GaleVector::new(vec![hat]);
                        // exact telescoping: budget equals the variance gap
                        let budget = stats::variance_budget(&hv, &chain).map_err(|e| anyhow!(e))?;
                        let last = stats::cond_variance(&hv, chain.levels().last().unwrap())
                            .map_err(|e| anyhow!(e))?;
                        let first = stats::cond_variance(&hv, &chain.levels()[0])
                            .map_err(|e| anyhow!(e))?;
                        if budget != last - first {
                            violations.push(json!({"sample": i}));
                        }
                        if violations.len() >= 3 {
                            break;
                        }
                    }
                }
                other => bail!("unknown claim {other:?}"),
            }
            println!(
                "{}",
                json!({
                    "claim": which,
                    "samples": samples,
                    "seed": seed,
                    "violations": violations.len(),
                    "witnesses": violations,
                })
            );
            Ok(if violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::Construct {
            levels,
            depth,
            config,
            roster,
            out,
        } => {
            use galesim::construct::{ConstructionState, LadderConfig, RosterKind};
            let mut ladder = LadderConfig::default_ladder(levels, depth);
            if let Some(path) = config {
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading {}", path.display()))?;
                apply_ladder_config(&mut ladder, &text)?;
            }
            let kinds: Result<Vec<_>> = roster
                .split(',')
                .map(|k| match k.trim() {
                    "zero" => Ok((RosterKind::Zero, None)),
                    "chaser" => Ok((RosterKind::Chaser { budget: 3 }, None)),
                    "lp" => Ok((RosterKind::LpRefereed, None)),
                    "backtrack-fixture" => Ok((
                        RosterKind::Scripted(vec![galesim::construct::backtrack_fixture_pair(
                            ladder.depth_at(ladder.levels() - 1),
                        )]),
                        Some(parse_frac("1/8").unwrap()),
                    )),
                    other => bail!("unknown roster kind {other:?}"),
                })
                .collect();
            let state = ConstructionState::new(ladder, kinds?).map_err(|e| anyhow!("{e}"))?;
            let bundle = state.run().map_err(|e| anyhow!("{e}"))?;
            let text = serde_json::to_string_pretty(&bundle)?;
            match out {
                Some(path) => std::fs::write(&path, &text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => println!("{text}"),
            }
            let ok = bundle.all_certificates_below_two
                && bundle.budgets_respected
                && bundle.prefix_in_every_level;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::LpSolve { input } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let lp: galesim::lp::LinearProgram = serde_json::from_str(&text)?;
            match galesim::lp::solve(&lp) {
                galesim::lp::LpOutcome::Optimal { value, assignment } => {
                    println!(
                        "{}",
                        json!({
                            "outcome": "optimal",
                            "value": fmt_frac(&value),
                            "assignment": assignment.iter().map(fmt_frac).collect::<Vec<_>>(),
                        })
                    );
                    Ok(ExitCode::SUCCESS)
                }
                galesim::lp::LpOutcome::Infeasible => {
                    println!("{}", json!({"outcome": "infeasible"}));
                    Ok(ExitCode::from(1))
                }
                galesim::lp::LpOutcome::Unbounded => {
                    println!("{}", json!({"outcome": "unbounded"}));
                    Ok(ExitCode::from(1))
                }
            }
        }
        Cmd::Replay { input } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let trace = play::trace_from_jsonl(&text).map_err(|e| anyhow!(e))?;
            let report = play::replay(&trace).map_err(|e| anyhow!(e))?;
            println!(
                "{}",
                json!({
                    "statuses_match": report.statuses_match,
                    "final_status": report.final_status.to_string(),
                    "final_cost": fmt_frac(&report.final_cost),
                })
            );
            Ok(if report.statuses_match {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

/// UTF-8 key-value ladder overrides: `c0 = 3/4`, `d0 = 13/16`,
/// `delta1 = 1/64`, `n0 = 4`.
fn apply_ladder_config(ladder: &mut galesim::construct::LadderConfig, text: &str) -> Result<()> {
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("bad config line {line:?}"))?;
        let (key, value) = (key.trim(), value.trim());
        let split = key.find(|c: char| c.is_ascii_digit()).unwrap_or(key.len());
        let (name, idx) = key.split_at(split);
        if idx.is_empty() {
            bail!("config keys need a level index: {key:?}");
        }
        let idx: usize = idx.parse()?;
        match name {
            "c" => ladder.c[idx] = parse_frac(value).map_err(|e| anyhow!(e))?,
            "d" => ladder.d[idx] = parse_frac(value).map_err(|e| anyhow!(e))?,
            "delta" => ladder.deltas[idx] = parse_frac(value).map_err(|e| anyhow!(e))?,
            "n" => ladder.depths[idx] = value.parse()?,
            other => bail!("unknown config key {other:?}"),
        }
    }
    Ok(())
}
