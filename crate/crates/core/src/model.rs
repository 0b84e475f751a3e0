//! Data model: risk-labelled HMMs, monitor DFAs, traces and thresholds,
//! plus the JSON model format and DOT export.
//!
//! All types are immutable after construction. State identity in files is by
//! name; indices are internal.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;

pub type StateId = usize;
pub type ObsId = usize;

/// A finite observation sequence. May be empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace(Vec<String>);

impl Trace {
    pub fn new(symbols: Vec<String>) -> Self {
        Trace(symbols)
    }

    pub fn empty() -> Self {
        Trace(Vec::new())
    }

    pub fn from_symbols<S: Into<String>, I: IntoIterator<Item = S>>(symbols: I) -> Self {
        Trace(symbols.into_iter().map(Into::into).collect())
    }

    /// Parses a comma-separated observation list, e.g. `dry,icy,icy`.
    /// An empty string is the empty trace.
    pub fn parse_csv(s: &str) -> Self {
        if s.trim().is_empty() {
            Trace::empty()
        } else {
            Trace(s.split(',').map(|x| x.trim().to_string()).collect())
        }
    }

    pub fn symbols(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn extended(&self, symbol: &str) -> Trace {
        let mut v = self.0.clone();
        v.push(symbol.to_string());
        Trace(v)
    }

    pub fn concat(&self, other: &Trace) -> Trace {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Trace(v)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.join(","))
    }
}

/// Safe/learn/unsafe thresholds and the horizon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Thresholds {
    pub safe: Rat,
    pub learn: Rat,
    pub unsafe_: Rat,
    pub horizon: usize,
}

impl Thresholds {
    /// Requires `0 <= safe <= learn <= unsafe` and `horizon >= 1`.
    pub fn new(safe: Rat, learn: Rat, unsafe_: Rat, horizon: usize) -> Result<Self> {
        if safe.is_negative() {
            return Err(Error::Validation(format!("safe threshold {safe} is negative")));
        }
        if safe > learn || learn > unsafe_ {
            return Err(Error::Validation(format!(
                "thresholds must satisfy safe <= learn <= unsafe, got {safe} <= {learn} <= {unsafe_}"
            )));
        }
        if horizon == 0 {
            return Err(Error::Validation("horizon must be at least 1".into()));
        }
        Ok(Thresholds { safe, learn, unsafe_, horizon })
    }

    /// Convenience for the common case of a single threshold.
    pub fn uniform(lambda: Rat, horizon: usize) -> Result<Self> {
        Thresholds::new(lambda.clone(), lambda.clone(), lambda, horizon)
    }
}

/// Risk-labelled hidden Markov model with deterministic observation labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hmm {
    observations: Vec<String>,
    state_names: Vec<String>,
    obs_of: Vec<ObsId>,
    risk: Vec<Rat>,
    initial: StateId,
    trans: Vec<Vec<(StateId, Rat)>>,
}

impl Hmm {
    /// Builds and validates an HMM. Each state is `(name, observation, risk)`;
    /// each transition is `(from, to, probability)` by state name.
    pub fn new(
        observations: Vec<String>,
        states: Vec<(String, String, Rat)>,
        initial: &str,
        transitions: Vec<(String, String, Rat)>,
    ) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::Validation("observation alphabet is empty".into()));
        }
        let obs_index: HashMap<&str, ObsId> =
            observations.iter().enumerate().map(|(i, z)| (z.as_str(), i)).collect();
        if obs_index.len() != observations.len() {
            return Err(Error::Validation("duplicate observation name".into()));
        }
        if states.is_empty() {
            return Err(Error::Validation("state set is empty".into()));
        }
        let mut state_names = Vec::with_capacity(states.len());
        let mut obs_of = Vec::with_capacity(states.len());
        let mut risk = Vec::with_capacity(states.len());
        let mut state_index: HashMap<String, StateId> = HashMap::new();
        for (name, obs, r) in states {
            let oid = *obs_index
                .get(obs.as_str())
                .ok_or_else(|| Error::Validation(format!("state {name} has undeclared observation {obs}")))?;
            if r.is_negative() {
                return Err(Error::Validation(format!("state {name} has negative risk {r}")));
            }
            if state_index.insert(name.clone(), state_names.len()).is_some() {
                return Err(Error::Validation(format!("duplicate state name {name}")));
            }
            state_names.push(name);
            obs_of.push(oid);
            risk.push(r);
        }
        let initial = *state_index
            .get(initial)
            .ok_or_else(|| Error::Validation(format!("initial state {initial} is not declared")))?;
        let mut trans: Vec<Vec<(StateId, Rat)>> = vec![Vec::new(); state_names.len()];
        for (from, to, p) in transitions {
            let f = *state_index
                .get(&from)
                .ok_or_else(|| Error::Validation(format!("transition from undeclared state {from}")))?;
            let t = *state_index
                .get(&to)
                .ok_or_else(|| Error::Validation(format!("transition to undeclared state {to}")))?;
            if p.is_negative() || p.is_zero() {
                return Err(Error::Validation(format!(
                    "transition {from} -> {to} has nonpositive probability {p}"
                )));
            }
            if trans[f].iter().any(|(s, _)| *s == t) {
                return Err(Error::Validation(format!("duplicate transition {from} -> {to}")));
            }
            trans[f].push((t, p));
        }
        for (s, out) in trans.iter().enumerate() {
            if out.is_empty() {
                return Err(Error::Validation(format!(
                    "state {} has no outgoing transition (deadlock)",
                    state_names[s]
                )));
            }
            let total: Rat = out.iter().map(|(_, p)| p.clone()).sum();
            if !total.is_one() {
                return Err(Error::Validation(format!(
                    "distribution from state {} sums to {total}",
                    state_names[s]
                )));
            }
        }
        Ok(Hmm { observations, state_names, obs_of, risk, initial, trans })
    }

    pub fn observations(&self) -> &[String] {
        &self.observations
    }

    pub fn obs_index(&self, name: &str) -> Option<ObsId> {
        self.observations.iter().position(|z| z == name)
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn obs_of(&self, s: StateId) -> ObsId {
        self.obs_of[s]
    }

    pub fn obs_name_of(&self, s: StateId) -> &str {
        &self.observations[self.obs_of[s]]
    }

    pub fn risk(&self, s: StateId) -> &Rat {
        &self.risk[s]
    }

    pub fn max_risk(&self) -> Rat {
        self.risk.iter().max().cloned().unwrap()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn successors(&self, s: StateId) -> &[(StateId, Rat)] {
        &self.trans[s]
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: HmmFile = serde_json::from_str(text)?;
        if file.kind != "hmm" {
            return Err(Error::Validation(format!("expected kind \"hmm\", got {:?}", file.kind)));
        }
        Hmm::new(
            file.observations,
            file.states.into_iter().map(|s| (s.name, s.obs, s.risk)).collect(),
            &file.initial,
            file.transitions.into_iter().map(|t| (t.from, t.to, t.prob)).collect(),
        )
    }

    pub fn to_json_string(&self) -> String {
        let file = HmmFile {
            kind: "hmm".into(),
            observations: self.observations.clone(),
            states: (0..self.num_states())
                .map(|s| HmmStateFile {
                    name: self.state_names[s].clone(),
                    obs: self.obs_name_of(s).to_string(),
                    risk: self.risk[s].clone(),
                })
                .collect(),
            initial: self.state_names[self.initial].clone(),
            transitions: (0..self.num_states())
                .flat_map(|s| {
                    self.trans[s].iter().map(move |(t, p)| HmmTransFile {
                        from: self.state_names[s].clone(),
                        to: self.state_names[*t].clone(),
                        prob: p.clone(),
                    })
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("hmm serialization") + "\n"
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph hmm {\n  rankdir=LR;\n");
        for s in 0..self.num_states() {
            let shape = if s == self.initial { "doublecircle" } else { "circle" };
            out.push_str(&format!(
                "  \"{}\" [shape={shape}, label=\"{}\\n{} r={}\"];\n",
                self.state_names[s],
                self.state_names[s],
                self.obs_name_of(s),
                self.risk[s]
            ));
        }
        for s in 0..self.num_states() {
            for (t, p) in &self.trans[s] {
                out.push_str(&format!(
                    "  \"{}\" -> \"{}\" [label=\"{p}\"];\n",
                    self.state_names[s], self.state_names[*t]
                ));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Deterministic finite automaton over the observation alphabet.
/// The transition function may be partial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    state_names: Vec<String>,
    alphabet: Vec<String>,
    initial: StateId,
    accepting: Vec<bool>,
    delta: Vec<Vec<Option<StateId>>>,
}

impl Dfa {
    pub fn new(
        alphabet: Vec<String>,
        states: Vec<String>,
        initial: &str,
        accepting: Vec<String>,
        transitions: Vec<(String, String, String)>,
    ) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::Validation("alphabet is empty".into()));
        }
        let sym_index: HashMap<&str, usize> =
            alphabet.iter().enumerate().map(|(i, z)| (z.as_str(), i)).collect();
        if sym_index.len() != alphabet.len() {
            return Err(Error::Validation("duplicate alphabet symbol".into()));
        }
        if states.is_empty() {
            return Err(Error::Validation("state set is empty".into()));
        }
        let state_index: HashMap<&str, StateId> =
            states.iter().enumerate().map(|(i, q)| (q.as_str(), i)).collect();
        if state_index.len() != states.len() {
            return Err(Error::Validation("duplicate state name".into()));
        }
        let initial = *state_index
            .get(initial)
            .ok_or_else(|| Error::Validation(format!("initial state {initial} is not declared")))?;
        let mut acc = vec![false; states.len()];
        for q in &accepting {
            let id = *state_index
                .get(q.as_str())
                .ok_or_else(|| Error::Validation(format!("accepting state {q} is not declared")))?;
            acc[id] = true;
        }
        let mut delta = vec![vec![None; alphabet.len()]; states.len()];
        for (from, on, to) in &transitions {
            let f = *state_index
                .get(from.as_str())
                .ok_or_else(|| Error::Validation(format!("transition from undeclared state {from}")))?;
            let z = *sym_index
                .get(on.as_str())
                .ok_or_else(|| Error::Validation(format!("transition on undeclared symbol {on}")))?;
            let t = *state_index
                .get(to.as_str())
                .ok_or_else(|| Error::Validation(format!("transition to undeclared state {to}")))?;
            if delta[f][z].is_some() {
                return Err(Error::Validation(format!(
                    "nondeterministic transitions from {from} on {on}"
                )));
            }
            delta[f][z] = Some(t);
        }
        Ok(Dfa { state_names: states, alphabet, initial, accepting: acc, delta })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|z| z == name)
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.state_names[q]
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q]
    }

    pub fn step(&self, q: StateId, symbol: usize) -> Option<StateId> {
        self.delta[q][symbol]
    }

    /// Runs the automaton on a trace; `None` when a transition is undefined
    /// or a symbol is not in the alphabet.
    pub fn run(&self, trace: &Trace) -> Option<StateId> {
        let mut q = self.initial;
        for z in trace.symbols() {
            let zi = self.symbol_index(z)?;
            q = self.delta[q][zi]?;
        }
        Some(q)
    }

    /// True iff the trace ends in an accepting state. An undefined transition
    /// or unknown symbol rejects.
    pub fn accepts(&self, trace: &Trace) -> bool {
        self.run(trace).map(|q| self.accepting[q]).unwrap_or(false)
    }

    pub fn is_total(&self) -> bool {
        self.delta.iter().all(|row| row.iter().all(|t| t.is_some()))
    }

    /// Completes the transition function, routing missing transitions to a
    /// fresh non-accepting sink.
    pub fn completed(&self) -> Dfa {
        if self.is_total() {
            return self.clone();
        }
        let mut out = self.clone();
        let mut sink_name = "sink".to_string();
        while out.state_names.contains(&sink_name) {
            sink_name.push('_');
        }
        let sink = out.state_names.len();
        out.state_names.push(sink_name);
        out.accepting.push(false);
        out.delta.push(vec![Some(sink); out.alphabet.len()]);
        for row in out.delta.iter_mut() {
            for t in row.iter_mut() {
                if t.is_none() {
                    *t = Some(sink);
                }
            }
        }
        out
    }

    /// Accepts exactly the words over the alphabet not accepted by `self`.
    pub fn complement(&self) -> Dfa {
        let mut out = self.completed();
        for a in out.accepting.iter_mut() {
            *a = !*a;
        }
        out
    }

    /// Checks that the DFA alphabet equals the HMM observation set.
    pub fn check_alphabet(&self, hmm: &Hmm) -> Result<()> {
        let a: BTreeSet<&String> = self.alphabet.iter().collect();
        let z: BTreeSet<&String> = hmm.observations().iter().collect();
        if a != z {
            return Err(Error::AlphabetMismatch(format!(
                "monitor alphabet {{{}}} does not equal HMM observations {{{}}}",
                self.alphabet.join(","),
                hmm.observations().join(",")
            )));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: DfaFile = serde_json::from_str(text)?;
        if file.kind != "dfa" {
            return Err(Error::Validation(format!("expected kind \"dfa\", got {:?}", file.kind)));
        }
        Dfa::new(
            file.alphabet,
            file.states,
            &file.initial,
            file.accepting,
            file.transitions.into_iter().map(|t| (t.from, t.on, t.to)).collect(),
        )
    }

    pub fn to_json_string(&self) -> String {
        let file = DfaFile {
            kind: "dfa".into(),
            alphabet: self.alphabet.clone(),
            states: self.state_names.clone(),
            initial: self.state_names[self.initial].clone(),
            accepting: (0..self.num_states())
                .filter(|&q| self.accepting[q])
                .map(|q| self.state_names[q].clone())
                .collect(),
            transitions: (0..self.num_states())
                .flat_map(|q| {
                    self.delta[q].iter().enumerate().filter_map(move |(z, t)| {
                        t.map(|t| DfaTransFile {
                            from: self.state_names[q].clone(),
                            on: self.alphabet[z].clone(),
                            to: self.state_names[t].clone(),
                        })
                    })
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("dfa serialization") + "\n"
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  __init [shape=point];\n");
        for q in 0..self.num_states() {
            let shape = if self.accepting[q] { "doublecircle" } else { "circle" };
            out.push_str(&format!("  \"{}\" [shape={shape}];\n", self.state_names[q]));
        }
        out.push_str(&format!("  __init -> \"{}\";\n", self.state_names[self.initial]));
        for q in 0..self.num_states() {
            for (z, t) in self.delta[q].iter().enumerate() {
                if let Some(t) = t {
                    out.push_str(&format!(
                        "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                        self.state_names[q], self.state_names[*t], self.alphabet[z]
                    ));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

pub enum Model {
    Hmm(Hmm),
    Dfa(Dfa),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Hmm,
    Dfa,
}

pub fn load_model(path: impl AsRef<Path>, kind: ModelKind) -> Result<Model> {
    match kind {
        ModelKind::Hmm => Ok(Model::Hmm(Hmm::load(path)?)),
        ModelKind::Dfa => Ok(Model::Dfa(Dfa::load(path)?)),
    }
}

#[derive(Serialize, Deserialize)]
struct HmmFile {
    kind: String,
    observations: Vec<String>,
    states: Vec<HmmStateFile>,
    initial: String,
    transitions: Vec<HmmTransFile>,
}

#[derive(Serialize, Deserialize)]
struct HmmStateFile {
    name: String,
    obs: String,
    risk: Rat,
}

#[derive(Serialize, Deserialize)]
struct HmmTransFile {
    from: String,
    to: String,
    prob: Rat,
}

#[derive(Serialize, Deserialize)]
struct DfaFile {
    kind: String,
    alphabet: Vec<String>,
    states: Vec<String>,
    initial: String,
    accepting: Vec<String>,
    transitions: Vec<DfaTransFile>,
}

#[derive(Serialize, Deserialize)]
struct DfaTransFile {
    from: String,
    on: String,
    to: String,
}
