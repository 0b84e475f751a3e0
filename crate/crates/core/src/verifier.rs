//! Monitor correctness checks: no missed alarms and no false alarms up to the
//! horizon, with counterexample traces.
//!
//! Missed alarms reduce to a threshold query on the colored MDP built from
//! the product with the monitor's complement (target: alarm sink, normalized
//! threshold risk/rMax); false alarms use the product with the monitor itself
//! (target: safe sink, threshold 1 - risk/rMax). Both comparisons are strict.
//! Every counterexample is re-validated against the original model before it
//! is returned.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::inference::trace_risk;
use crate::model::{Dfa, Hmm, StateId, Thresholds, Trace};
use crate::rational::Rat;
use crate::synthesis::solve_threshold;
use crate::transform::{build_colored_mdp, product, unroll_with_risk, AlarmMode, ProductHmm, Variant};

/// Which kind of misclassification a counterexample witnesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CexKind {
    /// An unsafe trace the monitor does not flag.
    MissedAlarm,
    /// A safe trace the monitor flags.
    FalseAlarm,
}

/// Counterexample trace with its exact risk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub kind: CexKind,
    pub trace: Trace,
    pub risk: Rat,
}

/// Sizes and timings of a verification run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub product_states: usize,
    pub mdp_states: usize,
    pub explored_nodes: u64,
    pub ms: u128,
}

/// Outcome of a verification query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub counterexample: Option<Counterexample>,
    pub stats: Stats,
}

impl Verdict {
    pub fn correct(stats: Stats) -> Self {
        Verdict { counterexample: None, stats }
    }

    pub fn is_correct(&self) -> bool {
        self.counterexample.is_none()
    }

    pub fn to_json_string(&self) -> String {
        let doc = match &self.counterexample {
            None => serde_json::json!({
                "status": "correct",
                "stats": self.stats_json(),
            }),
            Some(cex) => serde_json::json!({
                "status": "counterexample",
                "kind": match cex.kind {
                    CexKind::MissedAlarm => "missedAlarm",
                    CexKind::FalseAlarm => "falseAlarm",
                },
                "trace": cex.trace.to_string(),
                "risk": cex.risk.to_string(),
                "stats": self.stats_json(),
            }),
        };
        serde_json::to_string_pretty(&doc).expect("verdict serialization") + "\n"
    }

    fn stats_json(&self) -> serde_json::Value {
        serde_json::json!({
            "productStates": self.stats.product_states,
            "mdpStates": self.stats.mdp_states,
            "exploredNodes": self.stats.explored_nodes,
            "ms": self.stats.ms as u64,
        })
    }
}

/// Decides whether any trace of length at most `horizon` has risk strictly
/// above `lambda_u` while the monitor rejects it.
pub fn check_missed_alarms(
    hmm: &Hmm,
    monitor: &Dfa,
    lambda_u: &Rat,
    horizon: usize,
) -> Result<Verdict> {
    if lambda_u.is_negative() {
        return Err(Error::InvalidParameter(format!("negative threshold {lambda_u}")));
    }
    let started = Instant::now();
    let prod = product(hmm, monitor, AlarmMode::MissedAlarm)?;
    let mut stats = Stats { product_states: prod.hmm.num_states(), ..Stats::default() };
    let r_max = prod.hmm.max_risk();
    // No reachable risk can exceed lambda_u: trivially correct. Covers the
    // degenerate all-zero-risk case.
    if lambda_u >= &r_max {
        stats.ms = started.elapsed().as_millis();
        return Ok(Verdict::correct(stats));
    }
    let unrolled = unroll_with_risk(&prod, horizon)?;
    let mdp = build_colored_mdp(&unrolled, Variant::LeqH);
    stats.mdp_states = mdp.num_states();
    let lambda = lambda_u / &r_max;
    let hit = solve_threshold(&mdp, &lambda, true)?;
    let verdict = match hit {
        None => Verdict::correct(stats.clone()),
        Some(result) => {
            stats.explored_nodes = result.explored;
            let trace = result.trace;
            let risk = trace_risk(hmm, &trace)?;
            assert_eq!(&risk / &r_max, result.value, "synthesis value disagrees with filtering");
            assert!(&risk > lambda_u, "counterexample risk {risk} not above {lambda_u}");
            assert!(trace.len() <= horizon && !trace.is_empty());
            assert!(!monitor.accepts(&trace), "missed-alarm trace is accepted");
            Verdict {
                counterexample: Some(Counterexample { kind: CexKind::MissedAlarm, trace, risk }),
                stats: stats.clone(),
            }
        }
    };
    let mut verdict = verdict;
    verdict.stats.ms = started.elapsed().as_millis();
    Ok(verdict)
}

/// Decides whether any trace of length at most `horizon` has risk strictly
/// below `lambda_s` while the monitor accepts it.
pub fn check_false_alarms(
    hmm: &Hmm,
    monitor: &Dfa,
    lambda_s: &Rat,
    horizon: usize,
) -> Result<Verdict> {
    if lambda_s.is_negative() {
        return Err(Error::InvalidParameter(format!("negative threshold {lambda_s}")));
    }
    let started = Instant::now();
    let prod = product(hmm, monitor, AlarmMode::FalseAlarm)?;
    let mut stats = Stats { product_states: prod.hmm.num_states(), ..Stats::default() };
    // No risk is strictly below zero.
    if lambda_s.is_zero() {
        stats.ms = started.elapsed().as_millis();
        return Ok(Verdict::correct(stats));
    }
    let r_max = prod.hmm.max_risk();
    if r_max.is_zero() {
        // Every trace has risk 0 < lambda_s: any accepted trace within the
        // horizon is a false alarm, found by a plain reachability sweep.
        let cex = accepted_trace_sweep(&prod, horizon).map(|trace| Counterexample {
            kind: CexKind::FalseAlarm,
            trace,
            risk: Rat::zero(),
        });
        stats.ms = started.elapsed().as_millis();
        return Ok(Verdict { counterexample: cex, stats });
    }
    let unrolled = unroll_with_risk(&prod, horizon)?;
    let mdp = build_colored_mdp(&unrolled, Variant::LeqH);
    stats.mdp_states = mdp.num_states();
    let lambda = Rat::one() - lambda_s / &r_max;
    let hit = solve_threshold(&mdp, &lambda, true)?;
    let verdict = match hit {
        None => Verdict::correct(stats.clone()),
        Some(result) => {
            stats.explored_nodes = result.explored;
            let trace = result.trace;
            let risk = trace_risk(hmm, &trace)?;
            assert_eq!(
                Rat::one() - &risk / &r_max,
                result.value,
                "synthesis value disagrees with filtering"
            );
            assert!(&risk < lambda_s, "counterexample risk {risk} not below {lambda_s}");
            assert!(trace.len() <= horizon && !trace.is_empty());
            assert!(monitor.accepts(&trace), "false-alarm trace is rejected");
            Verdict {
                counterexample: Some(Counterexample { kind: CexKind::FalseAlarm, trace, risk }),
                stats: stats.clone(),
            }
        }
    };
    let mut verdict = verdict;
    verdict.stats.ms = started.elapsed().as_millis();
    Ok(verdict)
}

/// Full correctness check: no missed alarms at `th.unsafe_` and no false
/// alarms at `th.safe`. Missed alarms are checked first.
pub fn check_monitor(hmm: &Hmm, monitor: &Dfa, th: &Thresholds) -> Result<Verdict> {
    let ma = check_missed_alarms(hmm, monitor, &th.unsafe_, th.horizon)?;
    if !ma.is_correct() {
        return Ok(ma);
    }
    let mut fa = check_false_alarms(hmm, monitor, &th.safe, th.horizon)?;
    fa.stats.product_states += ma.stats.product_states;
    fa.stats.mdp_states += ma.stats.mdp_states;
    fa.stats.explored_nodes += ma.stats.explored_nodes;
    fa.stats.ms += ma.stats.ms;
    Ok(fa)
}

/// Breadth-first search for the shortest trace within the horizon whose
/// (false-alarm mode) product run ends in alarm states, i.e. a trace the
/// monitor accepts. All paths of a trace share the monitor component, so the
/// alarm flag is uniform over each belief support.
fn accepted_trace_sweep(prod: &ProductHmm, horizon: usize) -> Option<Trace> {
    let hmm = &prod.hmm;
    let init: BTreeSet<StateId> = BTreeSet::from([hmm.initial()]);
    let first = Trace::from_symbols([hmm.obs_name_of(hmm.initial())]);
    let mut visited: HashSet<BTreeSet<StateId>> = HashSet::from([init.clone()]);
    let mut queue = VecDeque::from([(init, first)]);
    while let Some((support, trace)) = queue.pop_front() {
        if support.iter().any(|&s| prod.alarm[s]) {
            return Some(trace);
        }
        if trace.len() == horizon {
            continue;
        }
        for (z, obs) in hmm.observations().iter().enumerate() {
            let next: BTreeSet<StateId> = support
                .iter()
                .flat_map(|&s| hmm.successors(s))
                .filter(|(t, _)| hmm.obs_of(*t) == z)
                .map(|(t, _)| *t)
                .collect();
            if !next.is_empty() && visited.insert(next.clone()) {
                queue.push_back((next, trace.extended(obs)));
            }
        }
    }
    None
}
