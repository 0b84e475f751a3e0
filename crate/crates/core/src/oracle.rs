//! Independent ground truth: exhaustive trace enumeration, brute-force
//! verdicts, a CNF-to-HMM hardness gadget, and model generators.
//!
//! Everything here is deliberately implemented by different means than the
//! main pipeline (path enumeration instead of filtering and synthesis) so the
//! two can cross-check each other in tests.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Dfa, Hmm, StateId, Thresholds, Trace};
use crate::rational::Rat;
use crate::verifier::{CexKind, Counterexample, Stats, Verdict};

/// Default path budget for enumeration.
pub const DEFAULT_ENUM_BUDGET: u64 = 1_000_000;

/// One enumerated trace with its exact probability and risk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub trace: Trace,
    pub prob: Rat,
    pub risk: Rat,
}

/// Every trace in the model's language up to the horizon, with exact
/// probability and risk. Sorted by length, then lexicographically.
#[derive(Clone, Debug)]
pub struct TraceTable {
    pub horizon: usize,
    pub entries: Vec<TraceEntry>,
}

impl TraceTable {
    pub fn risk_of(&self, trace: &Trace) -> Option<&Rat> {
        let key = (trace.len(), trace.symbols());
        self.entries
            .binary_search_by(|e| (e.trace.len(), e.trace.symbols()).cmp(&key))
            .ok()
            .map(|i| &self.entries[i].risk)
    }

    pub fn max_risk(&self) -> Option<&Rat> {
        self.entries.iter().map(|e| &e.risk).max()
    }

    /// CSV with `;` separators (traces contain commas).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trace;prob;risk\n");
        for e in &self.entries {
            out.push_str(&format!("{};{};{}\n", e.trace, e.prob, e.risk));
        }
        out
    }
}

/// Enumerates all traces of length 1..=h with the default budget.
pub fn enumerate_trace_risks(hmm: &Hmm, horizon: usize) -> Result<TraceTable> {
    enumerate_trace_risks_with_budget(hmm, horizon, DEFAULT_ENUM_BUDGET)
}

/// Enumerates by extending (trace, path-weight) frontiers one observation at
/// a time; the budget caps the number of path extensions considered.
pub fn enumerate_trace_risks_with_budget(
    hmm: &Hmm,
    horizon: usize,
    budget: u64,
) -> Result<TraceTable> {
    let mut entries: Vec<TraceEntry> = Vec::new();
    let mut spent: u64 = 0;
    // Weights are unnormalized: weight of each path consistent with the trace.
    let first = Trace::from_symbols([hmm.obs_name_of(hmm.initial())]);
    let mut frontier: Vec<(Trace, HashMap<StateId, Rat>)> =
        vec![(first, HashMap::from([(hmm.initial(), Rat::one())]))];
    for len in 1..=horizon {
        frontier.sort_by(|(a, _), (b, _)| a.symbols().cmp(b.symbols()));
        for (trace, weights) in &frontier {
            let prob: Rat = weights.values().cloned().sum();
            let risk: Rat =
                weights.iter().map(|(s, w)| w * hmm.risk(*s)).sum::<Rat>() / prob.clone();
            entries.push(TraceEntry { trace: trace.clone(), prob, risk });
        }
        if len == horizon {
            break;
        }
        let mut next: HashMap<Trace, HashMap<StateId, Rat>> = HashMap::new();
        for (trace, weights) in frontier {
            for (s, w) in &weights {
                for (t, p) in hmm.successors(*s) {
                    spent += 1;
                    if spent > budget {
                        return Err(Error::BudgetExceeded(budget));
                    }
                    let ext = trace.extended(hmm.obs_name_of(*t));
                    *next.entry(ext).or_default().entry(*t).or_insert_with(Rat::zero) +=
                        &(w * p);
                }
            }
        }
        frontier = next.into_iter().collect();
    }
    Ok(TraceTable { horizon, entries })
}

/// Reference verdict by exhaustive scan. Missed alarms are searched before
/// false alarms; within a kind the shortest, then lexicographically first
/// counterexample is returned.
pub fn brute_force_verdict(hmm: &Hmm, monitor: &Dfa, th: &Thresholds) -> Result<Verdict> {
    monitor.check_alphabet(hmm)?;
    let table = enumerate_trace_risks(hmm, th.horizon)?;
    let missed = table
        .entries
        .iter()
        .find(|e| e.risk > th.unsafe_ && !monitor.accepts(&e.trace))
        .map(|e| Counterexample {
            kind: CexKind::MissedAlarm,
            trace: e.trace.clone(),
            risk: e.risk.clone(),
        });
    let cex = missed.or_else(|| {
        table
            .entries
            .iter()
            .find(|e| e.risk < th.safe && monitor.accepts(&e.trace))
            .map(|e| Counterexample {
                kind: CexKind::FalseAlarm,
                trace: e.trace.clone(),
                risk: e.risk.clone(),
            })
    });
    Ok(Verdict { counterexample: cex, stats: Stats::default() })
}

/// A CNF formula with at most three literals per clause. Literals are signed
/// 1-based variable indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i64>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::InvalidParameter("formula has no variables".into()));
        }
        if clauses.is_empty() {
            return Err(Error::InvalidParameter("formula has no clauses".into()));
        }
        for (j, c) in clauses.iter().enumerate() {
            if c.is_empty() || c.len() > 3 {
                return Err(Error::InvalidParameter(format!(
                    "clause {} has {} literals, expected 1 to 3",
                    j + 1,
                    c.len()
                )));
            }
            for &lit in c {
                let v = lit.unsigned_abs() as usize;
                if lit == 0 || v > num_vars {
                    return Err(Error::InvalidParameter(format!(
                        "literal {lit} out of range for {num_vars} variables"
                    )));
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i64>] {
        &self.clauses
    }

    /// Parses DIMACS CNF (`c` comments, `p cnf n m` header, 0-terminated
    /// clauses possibly spanning lines).
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut num_vars: Option<usize> = None;
        let mut clauses: Vec<Vec<i64>> = Vec::new();
        let mut current: Vec<i64> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let mut parts = rest.split_whitespace();
                let fmt = parts.next().unwrap_or("");
                let n = parts.next().and_then(|x| x.parse::<usize>().ok());
                if fmt != "cnf" || n.is_none() {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        column: 1,
                        msg: format!("malformed DIMACS header {line:?}"),
                    });
                }
                num_vars = n;
                continue;
            }
            for tok in line.split_whitespace() {
                let lit: i64 = tok.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    column: 1,
                    msg: format!("expected a literal, got {tok:?}"),
                })?;
                if lit == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(lit);
                }
            }
        }
        if !current.is_empty() {
            clauses.push(current);
        }
        let n = num_vars
            .ok_or_else(|| Error::Parse { line: 1, column: 1, msg: "missing p cnf header".into() })?;
        CnfFormula::new(n, clauses)
    }

    /// Number of clauses satisfied by the assignment (bit `i` = variable
    /// `i + 1`).
    pub fn satisfied_clauses(&self, assignment: u64) -> usize {
        self.clauses
            .iter()
            .filter(|c| {
                c.iter().any(|&lit| {
                    let v = lit.unsigned_abs() as usize - 1;
                    (assignment >> v) & 1 == u64::from(lit > 0)
                })
            })
            .count()
    }

    /// Maximum number of simultaneously satisfiable clauses, by brute force
    /// over all assignments.
    pub fn max_satisfied_clauses(&self) -> usize {
        (0..1u64 << self.num_vars).map(|a| self.satisfied_clauses(a)).max().unwrap()
    }

    pub fn is_satisfiable(&self) -> bool {
        self.max_satisfied_clauses() == self.clauses.len()
    }
}

/// Builds the hardness gadget: an HMM over `{#, top, bot}` whose maximum
/// trace risk at horizon `2n + 2` is 1 iff the formula is satisfiable, and
/// whose maximum conditional equals (max satisfiable clauses) / m.
///
/// A trace `# # a(x_1) # a(x_2) ... #` spells out an assignment. The initial
/// state picks a clause uniformly; each clause gadget reads the assignment and
/// reaches the risk-1 state `t` iff the assignment satisfies its clause. The
/// per-clause evaluation states of the final level are collapsed directly
/// into `t`/`f`, and unreachable states are pruned.
pub fn cnf_gadget(formula: &CnfFormula) -> Hmm {
    let n = formula.num_vars();
    let m = formula.clauses().len();
    let hash = "#".to_string();
    let mut states: Vec<(String, String, Rat)> = Vec::new();
    let mut trans: Vec<(String, String, Rat)> = Vec::new();

    states.push(("s_init".into(), hash.clone(), Rat::zero()));
    states.push(("t".into(), hash.clone(), Rat::one()));
    states.push(("f".into(), hash.clone(), Rat::zero()));
    trans.push(("t".into(), "t".into(), Rat::one()));
    trans.push(("f".into(), "f".into(), Rat::one()));

    let plain = |i: usize, j: usize| {
        if i > n { "f".to_string() } else { format!("s_{i}_{j}") }
    };
    let primed = |i: usize, j: usize| {
        if i > n { "t".to_string() } else { format!("sp_{i}_{j}") }
    };
    let half = Rat::new(1, 2);
    for (j0, clause) in formula.clauses().iter().enumerate() {
        let j = j0 + 1;
        trans.push(("s_init".into(), plain(1, j), Rat::new(1, m as i64)));
        for i in 1..=n {
            states.push((plain(i, j), hash.clone(), Rat::zero()));
            states.push((primed(i, j), hash.clone(), Rat::zero()));
            for (tag, obs, lit) in
                [("T", "top", i as i64), ("B", "bot", -(i as i64))]
            {
                let value = format!("s{tag}_{i}_{j}");
                let value_p = format!("sp{tag}_{i}_{j}");
                states.push((value.clone(), obs.to_string(), Rat::zero()));
                states.push((value_p.clone(), obs.to_string(), Rat::zero()));
                trans.push((plain(i, j), value.clone(), half.clone()));
                trans.push((primed(i, j), value_p.clone(), half.clone()));
                let dest = if clause.contains(&lit) { primed(i + 1, j) } else { plain(i + 1, j) };
                trans.push((value, dest, Rat::one()));
                trans.push((value_p, primed(i + 1, j), Rat::one()));
            }
        }
    }

    // Prune states unreachable from the initial state.
    let mut out: HashMap<&str, Vec<&(String, String, Rat)>> = HashMap::new();
    for e in &trans {
        out.entry(e.0.as_str()).or_default().push(e);
    }
    let mut reach: HashSet<&str> = HashSet::new();
    let mut queue = VecDeque::from(["s_init"]);
    reach.insert("s_init");
    while let Some(s) = queue.pop_front() {
        for (_, to, _) in out.get(s).into_iter().flatten() {
            if reach.insert(to.as_str()) {
                queue.push_back(to.as_str());
            }
        }
    }
    let states: Vec<_> = states.iter().filter(|(s, _, _)| reach.contains(s.as_str())).cloned().collect();
    let trans: Vec<_> = trans.iter().filter(|(s, _, _)| reach.contains(s.as_str())).cloned().collect();

    Hmm::new(vec![hash, "top".into(), "bot".into()], states, "s_init", trans)
        .expect("gadget construction yields a valid HMM")
}

/// Query horizon for the gadget: traces `# # a(x_1) # ... a(x_n) #`.
pub fn gadget_horizon(formula: &CnfFormula) -> usize {
    2 * formula.num_vars() + 2
}

/// The three-state icy-driving HMM used as the running example: dry roads may
/// turn icy, icy roads may cause a crash.
pub fn icy_driving() -> Hmm {
    Hmm::new(
        vec!["dry".into(), "icy".into()],
        vec![
            ("q_d".into(), "dry".into(), Rat::zero()),
            ("q_i".into(), "icy".into(), Rat::zero()),
            ("q_c".into(), "icy".into(), Rat::one()),
        ],
        "q_d",
        vec![
            ("q_d".into(), "q_i".into(), Rat::new(9, 10)),
            ("q_d".into(), "q_c".into(), Rat::new(1, 10)),
            ("q_i".into(), "q_d".into(), Rat::new(1, 2)),
            ("q_i".into(), "q_i".into(), Rat::new(1, 4)),
            ("q_i".into(), "q_c".into(), Rat::new(1, 4)),
            ("q_c".into(), "q_c".into(), Rat::one()),
        ],
    )
    .expect("icy-driving model is valid")
}

fn icy_monitor(accepting: Vec<String>) -> Dfa {
    Dfa::new(
        vec!["dry".into(), "icy".into()],
        vec!["s_1".into(), "s_2".into(), "s_3".into()],
        "s_1",
        accepting,
        vec![
            ("s_1".into(), "dry".into(), "s_1".into()),
            ("s_1".into(), "icy".into(), "s_2".into()),
            ("s_2".into(), "dry".into(), "s_1".into()),
            ("s_2".into(), "icy".into(), "s_3".into()),
            ("s_3".into(), "dry".into(), "s_3".into()),
            ("s_3".into(), "icy".into(), "s_3".into()),
        ],
    )
    .expect("icy monitor is valid")
}

/// Monitor that alarms once two consecutive icy observations occur (correct
/// for the icy-driving model at threshold 1/4, horizon 3).
pub fn monitor_a() -> Dfa {
    icy_monitor(vec!["s_3".into()])
}

/// Complement-shaped monitor that alarms until two consecutive icy
/// observations occur (incorrect at threshold 1/4, horizon 3).
pub fn monitor_b() -> Dfa {
    icy_monitor(vec!["s_1".into(), "s_2".into()])
}

/// Snakes-and-ladders style board walk with four observations.
///
/// Cells `0..size`, die moves 1 or 2 with probability 1/2 each, a ladder from
/// cell 1 up to cell `size/2` and a snake from cell `size-2` down to cell
/// `size/3` (applied on landing). The last cell absorbs. Observations coarsen
/// the position (`start`, `low`, `high`, `goal`); the snake's landing cell has
/// risk 1 and the cell after it risk 1/2.
pub fn snakes_ladders(size: usize) -> Result<Hmm> {
    if size < 6 {
        return Err(Error::InvalidParameter(format!(
            "board size {size} too small, need at least 6"
        )));
    }
    let goal = size - 1;
    let ladder = (1, size / 2);
    let snake = (size - 2, size / 3);
    let apply = |c: usize| {
        if c == ladder.0 {
            ladder.1
        } else if c == snake.0 {
            snake.1
        } else {
            c
        }
    };
    let obs_of = |c: usize| {
        if c == 0 {
            "start"
        } else if c == goal {
            "goal"
        } else if c < size / 2 {
            "low"
        } else {
            "high"
        }
    };
    let risk_of = |c: usize| {
        if c == snake.1 {
            Rat::one()
        } else if c == snake.1 + 1 {
            Rat::new(1, 2)
        } else {
            Rat::zero()
        }
    };
    let states: Vec<(String, String, Rat)> =
        (0..size).map(|c| (format!("c{c}"), obs_of(c).to_string(), risk_of(c))).collect();
    let mut trans: Vec<(String, String, Rat)> = Vec::new();
    for c in 0..goal {
        let d1 = apply((c + 1).min(goal));
        let d2 = apply((c + 2).min(goal));
        if d1 == d2 {
            trans.push((format!("c{c}"), format!("c{d1}"), Rat::one()));
        } else {
            trans.push((format!("c{c}"), format!("c{d1}"), Rat::new(1, 2)));
            trans.push((format!("c{c}"), format!("c{d2}"), Rat::new(1, 2)));
        }
    }
    trans.push((format!("c{goal}"), format!("c{goal}"), Rat::one()));
    Hmm::new(
        vec!["start".into(), "low".into(), "high".into(), "goal".into()],
        states,
        "c0",
        trans,
    )
}

/// Deterministic pseudo-random HMM: every state gets a random observation, a
/// risk in {0, 1/4, ..., 1}, and 1-3 successors with random rational weights.
pub fn random_hmm(states: usize, obs_count: usize, seed: u64) -> Result<Hmm> {
    if states == 0 || obs_count == 0 {
        return Err(Error::InvalidParameter(format!(
            "need at least one state and one observation, got {states} states, {obs_count} observations"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let observations: Vec<String> = (0..obs_count).map(|z| format!("z{z}")).collect();
    let state_list: Vec<(String, String, Rat)> = (0..states)
        .map(|s| {
            let obs = format!("z{}", rng.gen_range(0..obs_count));
            let risk = Rat::new(rng.gen_range(0..=4), 4);
            (format!("s{s}"), obs, risk)
        })
        .collect();
    let mut trans: Vec<(String, String, Rat)> = Vec::new();
    for s in 0..states {
        let degree = rng.gen_range(1..=3.min(states));
        let mut succs: Vec<usize> = Vec::new();
        while succs.len() < degree {
            let t = rng.gen_range(0..states);
            if !succs.contains(&t) {
                succs.push(t);
            }
        }
        let weights: Vec<i64> = (0..degree).map(|_| rng.gen_range(1..=4)).collect();
        let total: i64 = weights.iter().sum();
        for (t, w) in succs.into_iter().zip(weights) {
            trans.push((format!("s{s}"), format!("s{t}"), Rat::new(w, total)));
        }
    }
    Hmm::new(observations, state_list, "s0", trans)
}

/// Deterministic pseudo-random total DFA over the given alphabet: random
/// transition targets and a random accepting set.
pub fn random_dfa(states: usize, alphabet: &[String], seed: u64) -> Result<Dfa> {
    if states == 0 || alphabet.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least one state and one symbol".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..states).map(|q| format!("q{q}")).collect();
    let accepting: Vec<String> =
        names.iter().filter(|_| rng.gen_range(0..2) == 1).cloned().collect();
    let mut transitions = Vec::new();
    for q in &names {
        for z in alphabet {
            let t = rng.gen_range(0..states);
            transitions.push((q.clone(), z.clone(), names[t].clone()));
        }
    }
    Dfa::new(alphabet.to_vec(), names.clone(), &names[0], accepting, transitions)
}
