//! Active learning of correct monitors: L* against a teacher whose
//! membership query is the risk threshold test and whose equivalence query
//! first samples traces for cheap disagreements (conformance) and then runs
//! the exact verifier.
//!
//! Counterexamples are processed by suffix extraction (Rivest-Schapire style)
//! instead of prefix insertion, which keeps the observation table small for
//! long counterexamples. Membership answers are cached per distinct trace.

use std::collections::HashMap;
use std::time::Instant;

use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_traits::Zero;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::inference::{membership_query, trace_risk};
use crate::model::{Dfa, Hmm, StateId, Thresholds, Trace};
use crate::rational::Rat;
use crate::verifier::check_monitor;

/// Sample counts for the conformance phase of the equivalence query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConformanceConfig {
    /// Samples checked for false alarms at the safe threshold.
    pub safe_samples: usize,
    /// Samples checked for missed alarms at the unsafe threshold.
    pub unsafe_samples: usize,
}

impl Default for ConformanceConfig {
    fn default() -> Self {
        ConformanceConfig { safe_samples: 100, unsafe_samples: 100 }
    }
}

/// Where an equivalence-query counterexample came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CeSource {
    Conformance,
    Verification,
}

/// Result of a learning run.
#[derive(Clone, Debug)]
pub struct LearnReport {
    /// Final monitor; passes the full correctness check by construction.
    pub monitor: Dfa,
    /// Equivalence queries issued (= rounds, including the accepting one).
    pub eq_count: usize,
    /// Distinct membership queries answered.
    pub mq_count: usize,
    /// Counterexample origin per non-final round.
    pub ce_sources: Vec<CeSource>,
    pub ms: u128,
}

impl LearnReport {
    pub fn to_json_string(&self) -> String {
        let sources: Vec<&str> = self
            .ce_sources
            .iter()
            .map(|s| match s {
                CeSource::Conformance => "conformance",
                CeSource::Verification => "verification",
            })
            .collect();
        let doc = serde_json::json!({
            "states": self.monitor.num_states(),
            "eqCount": self.eq_count,
            "mqCount": self.mq_count,
            "ceSources": sources,
            "ms": self.ms as u64,
        });
        serde_json::to_string_pretty(&doc).expect("report serialization") + "\n"
    }
}

/// Samples a random successor according to the exact transition weights.
fn sample_successor(hmm: &Hmm, state: StateId, rng: &mut ChaCha8Rng) -> StateId {
    let succs = hmm.successors(state);
    let denom = succs
        .iter()
        .fold(BigInt::from(1), |d, (_, p)| d.lcm(p.denom()));
    let mut r = rng.gen_bigint_range(&BigInt::zero(), &denom);
    for (t, p) in succs {
        let w = p.numer() * (&denom / p.denom());
        if r < w {
            return *t;
        }
        r -= w;
    }
    unreachable!("transition weights sum to one");
}

/// Samples a trace of the given length by simulating one path.
fn sample_trace(hmm: &Hmm, len: usize, rng: &mut ChaCha8Rng) -> Trace {
    let mut state = hmm.initial();
    let mut symbols = vec![hmm.obs_name_of(state).to_string()];
    for _ in 1..len {
        state = sample_successor(hmm, state, rng);
        symbols.push(hmm.obs_name_of(state).to_string());
    }
    Trace::new(symbols)
}

/// Samples up to `n` traces (uniform length in 1..=h, then one path of that
/// length) and returns the first whose threshold classification at `lambda`
/// disagrees with the monitor's acceptance.
pub fn conformance_counterexample(
    hmm: &Hmm,
    monitor: &Dfa,
    lambda: &Rat,
    horizon: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Trace> {
    for _ in 0..n {
        let len = 1 + (rng.next_u64() as usize) % horizon;
        let trace = sample_trace(hmm, len, rng);
        let risk = trace_risk(hmm, &trace).expect("sampled traces are in the language");
        if (&risk > lambda) != monitor.accepts(&trace) {
            return Some(trace);
        }
    }
    None
}

/// Like [`conformance_counterexample`] but only reports genuine
/// misclassifications of one kind, so every returned trace is a real missed
/// or false alarm (keeping the teacher consistent when the thresholds
/// differ).
fn sample_misclassification(
    hmm: &Hmm,
    monitor: &Dfa,
    lambda: &Rat,
    horizon: usize,
    n: usize,
    missed: bool,
    rng: &mut ChaCha8Rng,
) -> Option<Trace> {
    for _ in 0..n {
        let len = 1 + (rng.next_u64() as usize) % horizon;
        let trace = sample_trace(hmm, len, rng);
        let risk = trace_risk(hmm, &trace).expect("sampled traces are in the language");
        let bad = if missed {
            &risk > lambda && !monitor.accepts(&trace)
        } else {
            &risk < lambda && monitor.accepts(&trace)
        };
        if bad {
            return Some(trace);
        }
    }
    None
}

/// Equivalence query: conformance sampling at the safe threshold (false-alarm
/// direction), then at the unsafe threshold (missed-alarm direction), then
/// the exact verifier. `None` certifies the monitor correct.
pub fn equivalence_query(
    hmm: &Hmm,
    monitor: &Dfa,
    th: &Thresholds,
    conf: &ConformanceConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(Trace, CeSource)>> {
    if !th.safe.is_zero() {
        if let Some(t) =
            sample_misclassification(hmm, monitor, &th.safe, th.horizon, conf.safe_samples, false, rng)
        {
            return Ok(Some((t, CeSource::Conformance)));
        }
    }
    if let Some(t) = sample_misclassification(
        hmm,
        monitor,
        &th.unsafe_,
        th.horizon,
        conf.unsafe_samples,
        true,
        rng,
    ) {
        return Ok(Some((t, CeSource::Conformance)));
    }
    let verdict = check_monitor(hmm, monitor, th)?;
    Ok(verdict.counterexample.map(|c| (c.trace, CeSource::Verification)))
}

struct Teacher<'a> {
    hmm: &'a Hmm,
    th: &'a Thresholds,
    cache: HashMap<Trace, bool>,
    mq_count: usize,
}

impl<'a> Teacher<'a> {
    fn mq(&mut self, trace: &Trace) -> bool {
        if let Some(&v) = self.cache.get(trace) {
            return v;
        }
        let v = membership_query(self.hmm, trace, self.th).unsafe_;
        self.cache.insert(trace.clone(), v);
        self.mq_count += 1;
        v
    }
}

/// Observation table with pairwise-distinct access rows: new prefixes are
/// added only when their row is unseen, so the table is always consistent and
/// only closedness needs restoring.
struct Table {
    alphabet: Vec<String>,
    prefixes: Vec<Trace>,
    suffixes: Vec<Trace>,
}

impl Table {
    fn row(&self, teacher: &mut Teacher, prefix: &Trace) -> Vec<bool> {
        self.suffixes.iter().map(|e| teacher.mq(&prefix.concat(e))).collect()
    }

    fn close(&mut self, teacher: &mut Teacher) {
        loop {
            let rows: Vec<Vec<bool>> =
                self.prefixes.iter().map(|p| self.row(teacher, p)).collect();
            let mut added = false;
            'scan: for p in self.prefixes.clone() {
                for z in self.alphabet.clone() {
                    let ext = p.extended(&z);
                    let r = self.row(teacher, &ext);
                    if !rows.contains(&r) {
                        self.prefixes.push(ext);
                        added = true;
                        break 'scan;
                    }
                }
            }
            if !added {
                return;
            }
        }
    }

    fn hypothesis(&self, teacher: &mut Teacher) -> Dfa {
        let rows: Vec<Vec<bool>> = self.prefixes.iter().map(|p| self.row(teacher, p)).collect();
        let names: Vec<String> = (0..rows.len()).map(|i| format!("q{i}")).collect();
        let accepting: Vec<String> = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r[0])
            .map(|(i, _)| names[i].clone())
            .collect();
        let mut transitions = Vec::new();
        for (i, p) in self.prefixes.iter().enumerate() {
            for z in &self.alphabet {
                let r = self.row(teacher, &p.extended(z));
                let j = rows.iter().position(|x| x == &r).expect("table is closed");
                transitions.push((names[i].clone(), z.clone(), names[j].clone()));
            }
        }
        Dfa::new(self.alphabet.clone(), names.clone(), &names[0], accepting, transitions)
            .expect("hypothesis construction is well-formed")
    }

    /// Rivest-Schapire: finds one suffix of the counterexample that exposes a
    /// new state and adds it to the table.
    fn process_counterexample(&mut self, teacher: &mut Teacher, hyp: &Dfa, w: &Trace) {
        // Access string of the hypothesis state reached after each prefix.
        let mut access: Vec<&Trace> = vec![&self.prefixes[0]];
        let mut q = hyp.initial();
        for z in w.symbols() {
            let zi = hyp.symbol_index(z).expect("counterexample over the model alphabet");
            q = hyp.step(q, zi).expect("hypothesis is total");
            access.push(&self.prefixes[q]);
        }
        let value = |teacher: &mut Teacher, i: usize| {
            let suffix = Trace::from_symbols(w.symbols()[i..].iter().cloned());
            teacher.mq(&access[i].concat(&suffix))
        };
        let first = value(teacher, 0);
        for i in 0..w.len() {
            if value(teacher, i + 1) != first {
                let suffix = Trace::from_symbols(w.symbols()[i + 1..].iter().cloned());
                assert!(!self.suffixes.contains(&suffix), "suffix already distinguishes");
                self.suffixes.push(suffix);
                return;
            }
        }
        unreachable!("counterexample exposes no new suffix");
    }
}

/// Learns a monitor that is correct for the model at the given thresholds.
/// Deterministic for a fixed seed.
pub fn learn_monitor(
    hmm: &Hmm,
    th: &Thresholds,
    conf: &ConformanceConfig,
    seed: u64,
) -> Result<LearnReport> {
    const MAX_ROUNDS: usize = 10_000;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut teacher = Teacher { hmm, th, cache: HashMap::new(), mq_count: 0 };
    let mut table = Table {
        alphabet: hmm.observations().to_vec(),
        prefixes: vec![Trace::empty()],
        suffixes: vec![Trace::empty()],
    };
    table.close(&mut teacher);
    let mut eq_count = 0;
    let mut ce_sources = Vec::new();
    loop {
        if eq_count >= MAX_ROUNDS {
            return Err(Error::Aborted(format!(
                "no correct monitor after {MAX_ROUNDS} equivalence queries"
            )));
        }
        let hyp = table.hypothesis(&mut teacher);
        eq_count += 1;
        match equivalence_query(hmm, &hyp, th, conf, &mut rng)? {
            None => {
                return Ok(LearnReport {
                    monitor: hyp,
                    eq_count,
                    mq_count: teacher.mq_count,
                    ce_sources,
                    ms: started.elapsed().as_millis(),
                });
            }
            Some((w, source)) => {
                // Teacher consistency (the counterexample must flip the
                // membership label) and learner progress.
                assert_ne!(
                    teacher.mq(&w),
                    hyp.accepts(&w),
                    "counterexample {w} agrees with the teacher"
                );
                let before = table.prefixes.len();
                table.process_counterexample(&mut teacher, &hyp, &w);
                table.close(&mut teacher);
                assert!(table.prefixes.len() > before, "counterexample produced no new state");
                ce_sources.push(source);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate_trace_risks, icy_driving, monitor_b};

    fn uniform(h: usize) -> Thresholds {
        Thresholds::uniform(Rat::new(1, 4), h).unwrap()
    }

    #[test]
    fn learns_correct_monitor_for_running_example() {
        let hmm = icy_driving();
        let th = uniform(3);
        let report = learn_monitor(&hmm, &th, &ConformanceConfig::default(), 1).unwrap();
        let m = &report.monitor;
        assert!(check_monitor(&hmm, m, &th).unwrap().is_correct());
        assert!(m.accepts(&Trace::from_symbols(["dry", "icy", "icy"])));
        assert!(!m.accepts(&Trace::from_symbols(["dry", "icy"])));
        assert!(!m.accepts(&Trace::from_symbols(["dry"])));
        assert!(report.eq_count >= 1);
        assert_eq!(report.ce_sources.len(), report.eq_count - 1);
    }

    #[test]
    fn learned_language_is_exact_for_equal_thresholds() {
        let hmm = icy_driving();
        let th = uniform(3);
        let report = learn_monitor(&hmm, &th, &ConformanceConfig::default(), 5).unwrap();
        let table = enumerate_trace_risks(&hmm, 3).unwrap();
        for e in &table.entries {
            assert_eq!(
                report.monitor.accepts(&e.trace),
                e.risk > Rat::new(1, 4),
                "trace {}",
                e.trace
            );
        }
    }

    #[test]
    fn zero_risk_model_learns_empty_monitor_in_one_round() {
        let hmm = crate::model::Hmm::new(
            vec!["a".into()],
            vec![("s".into(), "a".into(), Rat::zero())],
            "s",
            vec![("s".into(), "s".into(), Rat::one())],
        )
        .unwrap();
        let th = Thresholds::uniform(Rat::zero(), 4).unwrap();
        let report = learn_monitor(&hmm, &th, &ConformanceConfig::default(), 9).unwrap();
        assert_eq!(report.eq_count, 1);
        assert!(!report.monitor.accepts(&Trace::from_symbols(["a", "a"])));
    }

    #[test]
    fn learning_is_deterministic() {
        let hmm = icy_driving();
        let th = uniform(3);
        let a = learn_monitor(&hmm, &th, &ConformanceConfig::default(), 42).unwrap();
        let b = learn_monitor(&hmm, &th, &ConformanceConfig::default(), 42).unwrap();
        assert_eq!(a.monitor, b.monitor);
        assert_eq!(a.eq_count, b.eq_count);
        assert_eq!(a.mq_count, b.mq_count);
        assert_eq!(a.ce_sources, b.ce_sources);
    }

    #[test]
    fn conformance_finds_monitor_b_disagreement() {
        let hmm = icy_driving();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = conformance_counterexample(&hmm, &monitor_b(), &Rat::new(1, 4), 3, 100, &mut rng);
        let t = t.expect("disagreement has high probability over 100 samples");
        let risk = trace_risk(&hmm, &t).unwrap();
        assert_ne!(risk > Rat::new(1, 4), monitor_b().accepts(&t));
    }

    #[test]
    fn conformance_accepts_exact_monitor_and_zero_samples() {
        let hmm = icy_driving();
        let th = uniform(3);
        let exact = learn_monitor(&hmm, &th, &ConformanceConfig::default(), 2).unwrap().monitor;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(conformance_counterexample(&hmm, &exact, &Rat::new(1, 4), 3, 200, &mut rng)
            .is_none());
        assert!(conformance_counterexample(&hmm, &exact, &Rat::new(1, 4), 3, 0, &mut rng)
            .is_none());
    }

    #[test]
    fn equivalence_query_flags_monitor_b_and_accepts_learned() {
        let hmm = icy_driving();
        let th = uniform(3);
        let conf = ConformanceConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ce = equivalence_query(&hmm, &monitor_b().completed(), &th, &conf, &mut rng).unwrap();
        assert!(ce.is_some());
        let good = learn_monitor(&hmm, &th, &conf, 7).unwrap().monitor;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!(equivalence_query(&hmm, &good, &th, &conf, &mut rng).unwrap().is_none());
    }

    #[test]
    fn split_thresholds_still_yield_correct_monitor() {
        // Hyper-parameters with an inconclusive band between safe and unsafe.
        let hmm = icy_driving();
        let th =
            Thresholds::new(Rat::new(1, 10), Rat::new(3, 10), Rat::new(7, 20), 3).unwrap();
        let report = learn_monitor(&hmm, &th, &ConformanceConfig::default(), 11).unwrap();
        assert!(check_monitor(&hmm, &report.monitor, &th).unwrap().is_correct());
    }
}
