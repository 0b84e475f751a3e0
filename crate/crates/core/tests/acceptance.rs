//! Acceptance gate: end-to-end checks of the running example, the verifier
//! against brute-force enumeration, the solver against enumerated optima, the
//! CNF hardness gadget, the learner, and a larger smoke benchmark. Each test
//! prints a single `ACCEPTANCE <n>: PASS` line on success.

use std::time::{Duration, Instant};

use hmmon_core::inference::trace_risk;
use hmmon_core::learner::{learn_monitor, ConformanceConfig};
use hmmon_core::model::{Dfa, Hmm, Thresholds, Trace};
use hmmon_core::oracle::{
    brute_force_verdict, cnf_gadget, enumerate_trace_risks, gadget_horizon, icy_driving,
    monitor_a, monitor_b, random_dfa, random_hmm, CnfFormula, TraceTable,
};
use hmmon_core::rational::Rat;
use hmmon_core::synthesis::{policy_value, solve_max, trace_to_policy};
use hmmon_core::transform::{build_colored_mdp, product, unroll_with_risk, AlarmMode, Variant};
use hmmon_core::verifier::{check_monitor, CexKind, Verdict};
use hmmon_core::Error;

fn within(budget: Duration, started: Instant, what: &str) {
    let took = started.elapsed();
    assert!(took <= budget, "{what} took {took:?}, budget {budget:?}");
}

/// Criterion 1: exact risks of the running example.
#[test]
fn acceptance_1_running_example_risks() {
    let started = Instant::now();
    let hmm = icy_driving();
    let r3 = trace_risk(&hmm, &Trace::from_symbols(["dry", "icy", "icy"])).unwrap();
    assert_eq!(r3, Rat::new(13, 22));
    let r2 = trace_risk(&hmm, &Trace::from_symbols(["dry", "icy"])).unwrap();
    assert_eq!(r2, Rat::new(1, 10));
    within(Duration::from_secs(1), started, "criterion 1");
    println!("ACCEPTANCE 1: PASS — running-example risks are exactly 13/22 and 1/10");
}

/// Criterion 2: verdicts for the two hand-written monitors at lambda = 1/4,
/// horizon 3, with a self-validating counterexample.
#[test]
fn acceptance_2_reference_monitors() {
    let started = Instant::now();
    let hmm = icy_driving();
    let th = Thresholds::uniform(Rat::new(1, 4), 3).unwrap();

    let verdict_a = check_monitor(&hmm, &monitor_a(), &th).unwrap();
    assert!(verdict_a.is_correct(), "monitor A must verify as correct");

    let verdict_b = check_monitor(&hmm, &monitor_b(), &th).unwrap();
    let cex = verdict_b.counterexample.expect("monitor B must be rejected");
    validate_counterexample(&hmm, &monitor_b(), &th, cex.kind, &cex.trace, &cex.risk);
    within(Duration::from_secs(1), started, "criterion 2");
    println!(
        "ACCEPTANCE 2: PASS — monitor A correct, monitor B rejected with {:?} {} (risk {})",
        cex.kind, cex.trace, cex.risk
    );
}

/// Re-derives a counterexample's claims from the original model.
fn validate_counterexample(
    hmm: &Hmm,
    monitor: &Dfa,
    th: &Thresholds,
    kind: CexKind,
    trace: &Trace,
    risk: &Rat,
) {
    assert!(!trace.is_empty() && trace.len() <= th.horizon, "length out of range: {trace}");
    let actual = trace_risk(hmm, trace).expect("counterexample must be a model trace");
    assert_eq!(&actual, risk, "reported risk is wrong for {trace}");
    let accepted = monitor.completed().accepts(trace);
    match kind {
        CexKind::MissedAlarm => {
            assert!(!accepted, "missed-alarm trace {trace} is accepted");
            assert!(actual > th.unsafe_, "risk {actual} not above {}", th.unsafe_);
        }
        CexKind::FalseAlarm => {
            assert!(accepted, "false-alarm trace {trace} is rejected");
            assert!(actual < th.safe, "risk {actual} not below {}", th.safe);
        }
    }
}

const THRESHOLD_POOL: [(i64, i64); 5] = [(0, 1), (1, 10), (1, 4), (1, 2), (1, 1)];

/// The seeded random instance family shared by criteria 3 and 4: HMMs with at
/// most 5 states over at most 3 observations, monitors with at most 4 states,
/// horizons up to 5, thresholds from {0, 1/10, 1/4, 1/2, 1}.
fn random_instance(seed: u64) -> (Hmm, Dfa, Thresholds) {
    let states = 2 + (seed % 4) as usize;
    let obs = 2 + (seed % 2) as usize;
    let hmm = random_hmm(states, obs, seed).unwrap();
    let dfa_states = 1 + ((seed / 4) % 4) as usize;
    let monitor = random_dfa(dfa_states, hmm.observations(), seed.wrapping_add(1)).unwrap();
    let horizon = 1 + (seed % 5) as usize;
    let (an, ad) = THRESHOLD_POOL[(seed % 5) as usize];
    let (bn, bd) = THRESHOLD_POOL[((seed / 5) % 5) as usize];
    let (mut ls, mut lu) = (Rat::new(an, ad), Rat::new(bn, bd));
    if ls > lu {
        std::mem::swap(&mut ls, &mut lu);
    }
    let th = Thresholds::new(ls, lu.clone(), lu, horizon).unwrap();
    (hmm, monitor, th)
}

/// Criterion 3: on 200 seeded random instances the verifier verdict agrees
/// with exhaustive trace enumeration, and every counterexample re-validates.
#[test]
fn acceptance_3_verifier_matches_brute_force() {
    let started = Instant::now();
    let mut rejected = 0usize;
    for seed in 0..200u64 {
        let (hmm, monitor, th) = random_instance(seed);
        let verdict = check_monitor(&hmm, &monitor, &th).unwrap();
        let oracle = brute_force_verdict(&hmm, &monitor, &th).unwrap();
        assert_eq!(
            verdict.is_correct(),
            oracle.is_correct(),
            "seed {seed}: verifier and brute force disagree on status"
        );
        if let Some(cex) = &verdict.counterexample {
            rejected += 1;
            let oracle_cex = oracle.counterexample.as_ref().unwrap();
            assert_eq!(cex.kind, oracle_cex.kind, "seed {seed}: counterexample kinds differ");
            validate_counterexample(&hmm, &monitor, &th, cex.kind, &cex.trace, &cex.risk);
        }
    }
    assert!(rejected > 0 && rejected < 200, "family must mix verdicts, got {rejected}/200 rejected");
    within(Duration::from_secs(300), started, "criterion 3");
    println!("ACCEPTANCE 3: PASS — 200/200 random instances agree with brute force ({rejected} rejected)");
}

/// Maximum normalized conditional value over enumerated traces: risk/rMax over
/// rejected traces in missed-alarm mode, 1 - risk/rMax over accepted traces in
/// false-alarm mode.
fn enumerated_optimum(
    table: &TraceTable,
    monitor: &Dfa,
    r_max: &Rat,
    mode: AlarmMode,
) -> Option<(Rat, Trace)> {
    let completed = monitor.completed();
    let mut best: Option<(Rat, Trace)> = None;
    for entry in &table.entries {
        let accepted = completed.accepts(&entry.trace);
        let value = match mode {
            AlarmMode::MissedAlarm if !accepted => entry.risk.clone() / r_max.clone(),
            AlarmMode::FalseAlarm if accepted => {
                Rat::one() - entry.risk.clone() / r_max.clone()
            }
            _ => continue,
        };
        // Ties break towards the shortest trace, matching the solver: the
        // table is already in (length, symbols) order, so strict improvement
        // suffices.
        if best.as_ref().is_none_or(|(v, _)| &value > v) {
            best = Some((value, entry.trace.clone()));
        }
    }
    best
}

/// Criterion 4: on the same family, the branch-and-bound optimum equals the
/// enumerated optimum, and no trace-consistent policy ever exceeds it.
#[test]
fn acceptance_4_solver_matches_enumeration() {
    let started = Instant::now();
    let mut solved = 0usize;
    for seed in 0..200u64 {
        let (hmm, monitor, th) = random_instance(seed);
        let table = enumerate_trace_risks(&hmm, th.horizon).unwrap();
        for mode in [AlarmMode::MissedAlarm, AlarmMode::FalseAlarm] {
            let prod = product(&hmm, &monitor, mode).unwrap();
            let unrolled = match unroll_with_risk(&prod, th.horizon) {
                Ok(u) => u,
                // All-zero risk: no MDP to compare on this instance.
                Err(Error::DegenerateRisk) => continue,
                Err(e) => panic!("seed {seed}: {e}"),
            };
            let mdp = build_colored_mdp(&unrolled, Variant::LeqH);
            let expected = enumerated_optimum(&table, &monitor, &unrolled.r_max, mode);
            match (solve_max(&mdp), expected) {
                (Ok(result), Some((value, trace))) => {
                    solved += 1;
                    assert_eq!(result.value, value, "seed {seed} {mode:?}: optimum differs");
                    assert_eq!(result.trace, trace, "seed {seed} {mode:?}: witness differs");
                    // The optimum (the tightest output of the monotone bound)
                    // must dominate every sampled completion.
                    for entry in table.entries.iter().step_by(7) {
                        let Ok(policy) = trace_to_policy(&mdp, &entry.trace) else { continue };
                        if let Some((a, b)) = policy_value(&mdp, &policy).unwrap() {
                            let value = a.clone() / (a + b);
                            assert!(value <= result.value, "seed {seed} {mode:?}: bound underestimates {}", entry.trace);
                        }
                    }
                }
                (Err(Error::Infeasible), None) => {}
                (got, want) => {
                    panic!("seed {seed} {mode:?}: solver {got:?} vs enumeration {want:?}")
                }
            }
        }
    }
    assert!(solved > 100, "family must exercise the solver, got {solved} solved queries");
    within(Duration::from_secs(300), started, "criterion 4");
    println!("ACCEPTANCE 4: PASS — solver optimum matches enumeration on {solved} queries");
}

/// All clauses over variables 1..=n with 1-3 distinct, non-complementary
/// literals, in canonical (sorted) order.
fn canonical_clauses(n: i64) -> Vec<Vec<i64>> {
    let literals: Vec<i64> = (1..=n).flat_map(|v| [v, -v]).collect();
    let mut out = Vec::new();
    let k = literals.len();
    for i in 0..k {
        out.push(vec![literals[i]]);
        for j in i + 1..k {
            if literals[i] == -literals[j] {
                continue;
            }
            out.push(vec![literals[i], literals[j]]);
            for l in j + 1..k {
                if literals[i] == -literals[l] || literals[j] == -literals[l] {
                    continue;
                }
                out.push(vec![literals[i], literals[j], literals[l]]);
            }
        }
    }
    out
}

/// All multisets of `m` clauses drawn from `pool` (formulas are clause
/// conjunctions, so order and repetition do not matter).
fn clause_multisets(pool: &[Vec<i64>], m: usize) -> Vec<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    fn rec(pool: &[Vec<i64>], m: usize, from: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<Vec<i64>>>) {
        if current.len() == m {
            out.push(current.iter().map(|&i| pool[i].clone()).collect());
            return;
        }
        for i in from..pool.len() {
            current.push(i);
            rec(pool, m, i, current, out);
            current.pop();
        }
    }
    rec(pool, m, 0, &mut current, &mut out);
    out
}

fn check_gadget(formula: &CnfFormula) {
    let hmm = cnf_gadget(formula);
    let table = enumerate_trace_risks(&hmm, gadget_horizon(formula)).unwrap();
    let max = table.max_risk().expect("gadget has traces").clone();
    let expected = Rat::new(
        formula.max_satisfied_clauses() as i64,
        formula.clauses().len() as i64,
    );
    assert_eq!(max, expected, "max conditional differs for {:?}", formula.clauses());
    assert_eq!(
        max.is_one(),
        formula.is_satisfiable(),
        "risk-1 trace must exist iff satisfiable: {:?}",
        formula.clauses()
    );
}

/// Criterion 5: the hardness gadget maps maximum satisfiability to maximum
/// trace risk, exhaustively for n <= 3, m <= 3 and on 50 random formulas.
#[test]
fn acceptance_5_cnf_gadget() {
    use rand::{Rng, SeedableRng};
    let started = Instant::now();
    let mut count = 0usize;
    for n in 1..=3i64 {
        let pool = canonical_clauses(n);
        for m in 1..=3usize {
            for clauses in clause_multisets(&pool, m) {
                check_gadget(&CnfFormula::new(n as usize, clauses).unwrap());
                count += 1;
            }
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.gen_range(1..=4i64);
        let m = rng.gen_range(1..=5usize);
        let clauses: Vec<Vec<i64>> = (0..m)
            .map(|_| {
                (0..rng.gen_range(1..=3usize))
                    .map(|_| {
                        let v = rng.gen_range(1..=n);
                        if rng.gen_range(0..2) == 0 { v } else { -v }
                    })
                    .collect()
            })
            .collect();
        check_gadget(&CnfFormula::new(n as usize, clauses).unwrap());
        count += 1;
    }
    within(Duration::from_secs(120), started, "criterion 5");
    println!("ACCEPTANCE 5: PASS — {count} formulas map max satisfiability to max trace risk");
}

/// Learned-monitor exactness: acceptance must match risk > lambda on every
/// positive-probability trace up to the horizon.
fn assert_exact(hmm: &Hmm, monitor: &Dfa, lambda: &Rat, horizon: usize) {
    let completed = monitor.completed();
    let table = enumerate_trace_risks(hmm, horizon).unwrap();
    for entry in &table.entries {
        assert_eq!(
            completed.accepts(&entry.trace),
            &entry.risk > lambda,
            "trace {} (risk {}) misclassified at lambda {lambda}",
            entry.trace,
            entry.risk
        );
    }
}

/// Criterion 6: learning at a single threshold 3/10 yields monitors that
/// verify as correct and classify every trace exactly, up to horizon 10.
#[test]
fn acceptance_6_learn_single_threshold() {
    let hmm = icy_driving();
    let lambda = Rat::new(3, 10);
    let conf = ConformanceConfig::default();
    let mut sizes = Vec::new();
    for horizon in [3usize, 5, 10] {
        let th = Thresholds::uniform(lambda.clone(), horizon).unwrap();
        let round = Instant::now();
        let report = learn_monitor(&hmm, &th, &conf, 6).unwrap();
        if horizon == 10 {
            within(Duration::from_secs(120), round, "criterion 6 at horizon 10");
        }
        let verdict = check_monitor(&hmm, &report.monitor, &th).unwrap();
        assert!(verdict.is_correct(), "learned monitor fails verification at horizon {horizon}");
        assert_exact(&hmm, &report.monitor, &lambda, horizon);
        sizes.push(report.monitor.num_states());
    }
    // Reported finding, not a failure: a 2-state monitor suffices for this
    // threshold, larger learned sizes indicate non-minimal output.
    let note = if sizes.iter().all(|&s| s == 2) {
        "all minimal (2 states)".to_string()
    } else {
        format!("learned sizes {sizes:?} vs minimal 2 — non-minimal output, recorded as a finding")
    };
    println!("ACCEPTANCE 6: PASS — exact monitors learned at horizons 3/5/10; {note}");
}

/// Criterion 7: with a genuine inconclusive band 1/10 < 3/10 < 7/20 the
/// learner still produces a correct monitor, never larger than the
/// single-threshold one.
#[test]
fn acceptance_7_learn_threshold_band() {
    let started = Instant::now();
    let hmm = icy_driving();
    let horizon = 10usize;
    let conf = ConformanceConfig::default();

    let exact_th = Thresholds::uniform(Rat::new(3, 10), horizon).unwrap();
    let exact = learn_monitor(&hmm, &exact_th, &conf, 6).unwrap();

    let band_th =
        Thresholds::new(Rat::new(1, 10), Rat::new(3, 10), Rat::new(7, 20), horizon).unwrap();
    let band = learn_monitor(&hmm, &band_th, &conf, 6).unwrap();
    let verdict = check_monitor(&hmm, &band.monitor, &band_th).unwrap();
    assert!(verdict.is_correct(), "band-threshold monitor fails verification");
    assert!(
        band.monitor.num_states() <= exact.monitor.num_states(),
        "band monitor ({} states) larger than single-threshold monitor ({} states)",
        band.monitor.num_states(),
        exact.monitor.num_states()
    );
    within(Duration::from_secs(120), started, "criterion 7");
    println!(
        "ACCEPTANCE 7: PASS — band-threshold monitor correct with {} states (single-threshold: {})",
        band.monitor.num_states(),
        exact.monitor.num_states()
    );
}

/// Criterion 8: smoke benchmark on a 50-state model with a 10-state monitor
/// at horizon 8, within ten minutes, with a self-validating outcome.
#[test]
fn acceptance_8_smoke_benchmark() {
    let started = Instant::now();
    let hmm = random_hmm(50, 3, 8).unwrap();
    let monitor = random_dfa(10, hmm.observations(), 88).unwrap();
    let th = Thresholds::uniform(Rat::new(1, 4), 8).unwrap();
    let verdict: Verdict = check_monitor(&hmm, &monitor, &th).unwrap();
    let outcome = match &verdict.counterexample {
        None => "correct".to_string(),
        Some(cex) => {
            validate_counterexample(&hmm, &monitor, &th, cex.kind, &cex.trace, &cex.risk);
            format!("{:?} {} (risk {})", cex.kind, cex.trace, cex.risk)
        }
    };
    within(Duration::from_secs(600), started, "criterion 8");
    println!(
        "ACCEPTANCE 8: PASS — 50-state benchmark verified in {}ms: {outcome}",
        verdict.stats.ms
    );
}
