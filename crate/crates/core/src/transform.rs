//! Construction chain from HMM and monitor to a colored MDP: synchronous
//! product, horizon unrolling with risk-weighted terminal sinks, and the
//! observation-as-action MDP with step coloring.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::model::{Dfa, Hmm, StateId, Trace};
use crate::rational::Rat;

/// Which misclassification the downstream query searches for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlarmMode {
    /// Product with the monitor's complement; alarm states mark traces the
    /// monitor rejects.
    MissedAlarm,
    /// Product with the monitor itself; alarm states mark traces the monitor
    /// accepts.
    FalseAlarm,
}

/// Synchronous product of an HMM and a (completed) monitor DFA.
#[derive(Clone, Debug)]
pub struct ProductHmm {
    pub hmm: Hmm,
    /// Per product state: does the monitor component mark the trace.
    pub alarm: Vec<bool>,
    pub mode: AlarmMode,
}

/// Builds the product. Only reachable state pairs are materialized. The
/// monitor component tracks the full trace including the initial observation,
/// so a product path ends in an alarm state iff the marked DFA accepts the
/// path's trace.
pub fn product(hmm: &Hmm, monitor: &Dfa, mode: AlarmMode) -> Result<ProductHmm> {
    monitor.check_alphabet(hmm)?;
    let dfa = match mode {
        AlarmMode::MissedAlarm => monitor.complement(),
        AlarmMode::FalseAlarm => monitor.completed(),
    };
    // Map HMM observation ids to DFA symbol ids (alphabets are equal as sets
    // but may be ordered differently).
    let sym: Vec<usize> = hmm
        .observations()
        .iter()
        .map(|z| dfa.symbol_index(z).expect("alphabet checked"))
        .collect();

    let q0 = dfa.step(dfa.initial(), sym[hmm.obs_of(hmm.initial())]).expect("dfa is total");
    let init = (hmm.initial(), q0);

    let mut index: HashMap<(StateId, StateId), usize> = HashMap::new();
    let mut pairs: Vec<(StateId, StateId)> = Vec::new();
    let mut queue = VecDeque::new();
    index.insert(init, 0);
    pairs.push(init);
    queue.push_back(init);
    type Pair = (StateId, StateId);
    let mut edges: Vec<(Pair, Pair, Rat)> = Vec::new();
    while let Some((s, q)) = queue.pop_front() {
        for (s2, p) in hmm.successors(s) {
            let q2 = dfa.step(q, sym[hmm.obs_of(*s2)]).expect("dfa is total");
            let pair = (*s2, q2);
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(pair) {
                e.insert(pairs.len());
                pairs.push(pair);
                queue.push_back(pair);
            }
            edges.push(((s, q), pair, p.clone()));
        }
    }

    let name = |&(s, q): &(StateId, StateId)| format!("{}|{}", hmm.state_name(s), dfa.state_name(q));
    let states: Vec<(String, String, Rat)> = pairs
        .iter()
        .map(|pair| (name(pair), hmm.obs_name_of(pair.0).to_string(), hmm.risk(pair.0).clone()))
        .collect();
    let transitions: Vec<(String, String, Rat)> =
        edges.iter().map(|(f, t, p)| (name(f), name(t), p.clone())).collect();
    let product_hmm = Hmm::new(hmm.observations().to_vec(), states, &name(&init), transitions)?;
    let alarm = pairs.iter().map(|&(_, q)| dfa.is_accepting(q)).collect();
    Ok(ProductHmm { hmm: product_hmm, alarm, mode })
}

/// Terminal distribution of a horizon-step state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SinkDist {
    pub alarm: Rat,
    pub safe: Rat,
    pub ignore: Rat,
}

/// Horizon-bounded acyclic copy of the product with risk-weighted sinks.
///
/// Step-indexed states `(i, s)` are materialized only where reachable; step 1
/// holds exactly the initial state. The three sinks and their incoming
/// distributions are represented implicitly via [`UnrolledHmm::sink_dist`].
#[derive(Clone, Debug)]
pub struct UnrolledHmm {
    pub product: ProductHmm,
    pub horizon: usize,
    pub r_max: Rat,
    /// `steps[i]` (1-based, `steps[0]` empty) lists product states present at
    /// step `i`, reachable from the step-1 initial state.
    pub steps: Vec<Vec<StateId>>,
}

pub fn unroll_with_risk(product: &ProductHmm, horizon: usize) -> Result<UnrolledHmm> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let r_max = product.hmm.max_risk();
    if r_max.is_zero() {
        return Err(Error::DegenerateRisk);
    }
    let hmm = &product.hmm;
    let mut steps: Vec<Vec<StateId>> = vec![Vec::new(); horizon + 1];
    let mut frontier: HashSet<StateId> = HashSet::new();
    frontier.insert(hmm.initial());
    for (i, step) in steps.iter_mut().enumerate().skip(1) {
        let mut layer: Vec<StateId> = frontier.iter().copied().collect();
        layer.sort_unstable();
        if i < horizon {
            let mut next = HashSet::new();
            for &s in &layer {
                for (t, _) in hmm.successors(s) {
                    next.insert(*t);
                }
            }
            frontier = next;
        }
        *step = layer;
    }
    Ok(UnrolledHmm { product: product.clone(), horizon, r_max, steps })
}

impl UnrolledHmm {
    /// Distribution from the horizon-step copy of `s` into the three sinks.
    pub fn sink_dist(&self, s: StateId) -> SinkDist {
        if self.product.alarm[s] {
            let a = self.product.hmm.risk(s) / &self.r_max;
            let safe = Rat::one() - a.clone();
            SinkDist { alarm: a, safe, ignore: Rat::zero() }
        } else {
            SinkDist { alarm: Rat::zero(), safe: Rat::zero(), ignore: Rat::one() }
        }
    }
}

/// Horizon handling of the constructed MDP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Traces of length exactly the horizon.
    ExactH,
    /// Traces of length at most the horizon: a fresh initial state picks the
    /// trace length, and redirected probability mass restarts there.
    LeqH,
}

pub type ColorId = usize;
pub type ActionId = usize;

/// MDP with per-state colors; color-consistent policies pick one action per
/// color. Colors are steps, plus color 0 for the fresh initial state of the
/// `LeqH` variant and a final color for the sinks.
#[derive(Clone, Debug)]
pub struct ColoredMdp {
    pub variant: Variant,
    pub horizon: usize,
    pub mode: AlarmMode,
    pub r_max: Rat,
    pub names: Vec<String>,
    pub colors: Vec<ColorId>,
    pub initial: usize,
    /// Action names: the HMM observations in model-file order, then the
    /// end-of-trace action, then (LeqH only) the length actions.
    pub actions: Vec<String>,
    pub enabled: BTreeMap<ColorId, Vec<ActionId>>,
    pub transitions: HashMap<(usize, ActionId), Vec<(usize, Rat)>>,
    /// Target sink: alarm sink in missed-alarm mode, safe sink in false-alarm
    /// mode.
    pub target: usize,
    pub other_sink: usize,
    /// MDP state ids per step, 1-based like [`UnrolledHmm::steps`].
    pub step_states: Vec<Vec<usize>>,
    /// Product state behind each step state (None for sinks and the fresh
    /// initial state).
    pub product_state: Vec<Option<StateId>>,
    /// Observation emitted by the trace's first symbol (the product initial).
    pub initial_obs: String,
    pub end_action: ActionId,
    /// First length action id (LeqH); `len_action(l) = length_actions + l - 1`.
    pub length_actions: Option<ActionId>,
}

impl ColoredMdp {
    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a]
    }

    pub fn enabled_at(&self, color: ColorId) -> &[ActionId] {
        &self.enabled[&color]
    }

    pub fn distribution(&self, state: usize, action: ActionId) -> &[(usize, Rat)] {
        self.transitions.get(&(state, action)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Successors excluding redirected mass, i.e. the acyclic single-pass
    /// structure the solver works on.
    pub fn forward(&self, state: usize, action: ActionId) -> Vec<(usize, Rat)> {
        self.distribution(state, action)
            .iter()
            .filter(|(t, _)| *t != self.initial)
            .cloned()
            .collect()
    }

    pub fn len_action(&self, length: usize) -> ActionId {
        self.length_actions.expect("length actions only exist in the LeqH variant") + length - 1
    }

    pub fn to_json_string(&self) -> String {
        let states: Vec<serde_json::Value> = (0..self.num_states())
            .map(|s| {
                serde_json::json!({ "name": self.names[s], "color": self.colors[s] })
            })
            .collect();
        let mut trans: Vec<serde_json::Value> = Vec::new();
        for s in 0..self.num_states() {
            for &a in self.enabled_at(self.colors[s]) {
                let dist: Vec<serde_json::Value> = self
                    .distribution(s, a)
                    .iter()
                    .map(|(t, p)| {
                        serde_json::json!({ "to": self.names[*t], "prob": p.to_string() })
                    })
                    .collect();
                trans.push(serde_json::json!({
                    "state": self.names[s],
                    "action": self.actions[a],
                    "dist": dist,
                }));
            }
        }
        let doc = serde_json::json!({
            "kind": "colored-mdp",
            "states": states,
            "initial": self.names[self.initial],
            "actions": self.actions,
            "transitions": trans,
            "target": [self.names[self.target]],
        });
        serde_json::to_string_pretty(&doc).expect("mdp serialization") + "\n"
    }

    /// DOT export with intermediate action nodes.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph mdp {\n  rankdir=LR;\n  __init [shape=point];\n");
        for s in 0..self.num_states() {
            let shape = if s == self.target { "doublecircle" } else { "circle" };
            out.push_str(&format!(
                "  \"{}\" [shape={shape}, label=\"{}\\nc={}\"];\n",
                self.names[s], self.names[s], self.colors[s]
            ));
        }
        out.push_str(&format!("  __init -> \"{}\";\n", self.names[self.initial]));
        for s in 0..self.num_states() {
            for &a in self.enabled_at(self.colors[s]) {
                let node = format!("act_{s}_{a}");
                out.push_str(&format!(
                    "  {node} [shape=point, label=\"\"];\n  \"{}\" -> {node} [label=\"{}\", arrowhead=none];\n",
                    self.names[s], self.actions[a]
                ));
                for (t, p) in self.distribution(s, a) {
                    out.push_str(&format!("  {node} -> \"{}\" [label=\"{p}\"];\n", self.names[*t]));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_colored_mdp(unrolled: &UnrolledHmm, variant: Variant) -> ColoredMdp {
    let hmm = &unrolled.product.hmm;
    let h = unrolled.horizon;

    // LeqH needs states (i, s) with s reachable in at most i-1 steps, since a
    // length-l trace enters the step structure at step h-l+1.
    let steps: Vec<Vec<StateId>> = match variant {
        Variant::ExactH => unrolled.steps.clone(),
        Variant::LeqH => {
            let mut cumulative: HashSet<StateId> = HashSet::new();
            let mut frontier: HashSet<StateId> = HashSet::new();
            frontier.insert(hmm.initial());
            let mut layers = vec![Vec::new()];
            for _ in 1..=h {
                cumulative.extend(frontier.iter().copied());
                let mut layer: Vec<StateId> = cumulative.iter().copied().collect();
                layer.sort_unstable();
                layers.push(layer);
                let mut next = HashSet::new();
                for &s in &cumulative {
                    for (t, _) in hmm.successors(s) {
                        next.insert(*t);
                    }
                }
                frontier = next;
            }
            layers
        }
    };

    let mut names = Vec::new();
    let mut colors = Vec::new();
    let mut product_state: Vec<Option<StateId>> = Vec::new();
    let mut step_states: Vec<Vec<usize>> = vec![Vec::new(); h + 1];
    let mut id_of: HashMap<(usize, StateId), usize> = HashMap::new();

    let fresh_initial = match variant {
        Variant::LeqH => {
            names.push("init".to_string());
            colors.push(0);
            product_state.push(None);
            Some(0)
        }
        Variant::ExactH => None,
    };
    for (i, layer) in steps.iter().enumerate().skip(1) {
        for &s in layer {
            let id = names.len();
            id_of.insert((i, s), id);
            names.push(format!("{i}|{}", hmm.state_name(s)));
            colors.push(i);
            product_state.push(Some(s));
            step_states[i].push(id);
        }
    }
    let target_is_alarm = matches!(unrolled.product.mode, AlarmMode::MissedAlarm);
    let t_alrm = names.len();
    names.push("t_alrm".to_string());
    colors.push(h + 1);
    product_state.push(None);
    let t_safe = names.len();
    names.push("t_safe".to_string());
    colors.push(h + 1);
    product_state.push(None);
    let (target, other_sink) =
        if target_is_alarm { (t_alrm, t_safe) } else { (t_safe, t_alrm) };

    let obs_count = hmm.observations().len();
    let mut actions: Vec<String> = hmm.observations().to_vec();
    let end_action = actions.len();
    actions.push("z_end".to_string());
    let length_actions = match variant {
        Variant::LeqH => {
            let first = actions.len();
            for l in 1..=h {
                actions.push(format!("len_{l}"));
            }
            Some(first)
        }
        Variant::ExactH => None,
    };

    let initial = match variant {
        Variant::LeqH => fresh_initial.unwrap(),
        Variant::ExactH => id_of[&(1, hmm.initial())],
    };

    let mut enabled: BTreeMap<ColorId, Vec<ActionId>> = BTreeMap::new();
    let mut transitions: HashMap<(usize, ActionId), Vec<(usize, Rat)>> = HashMap::new();

    if let Some(init) = fresh_initial {
        let first = length_actions.unwrap();
        enabled.insert(0, (0..h).map(|l| first + l).collect());
        for l in 1..=h {
            let entry = id_of[&(h - l + 1, hmm.initial())];
            transitions.insert((init, first + l - 1), vec![(entry, Rat::one())]);
        }
    }

    // Observation actions at color i < h: enabled unless, from every state of
    // the color, the action redirects everything to the initial state.
    for i in 1..=h {
        let mut acts: Vec<ActionId> = Vec::new();
        if i < h {
            for z in 0..obs_count {
                let useful = steps[i].iter().any(|&s| {
                    hmm.successors(s)
                        .iter()
                        .any(|(t, _)| hmm.obs_of(*t) == z && id_of.contains_key(&(i + 1, *t)))
                });
                if useful {
                    acts.push(z);
                }
            }
        } else {
            acts.push(end_action);
        }
        for &a in &acts {
            for &s in &steps[i] {
                let id = id_of[&(i, s)];
                let mut dist: Vec<(usize, Rat)> = Vec::new();
                let mut moved = Rat::zero();
                if a == end_action {
                    let sd = unrolled.sink_dist(s);
                    if !sd.alarm.is_zero() {
                        moved += &sd.alarm;
                        dist.push((t_alrm, sd.alarm));
                    }
                    if !sd.safe.is_zero() {
                        moved += &sd.safe;
                        dist.push((t_safe, sd.safe));
                    }
                    // ignore-sink mass is redirected: the ignore state is not
                    // part of the MDP.
                } else {
                    for (t, p) in hmm.successors(s) {
                        if hmm.obs_of(*t) == a {
                            if let Some(&tid) = id_of.get(&(i + 1, *t)) {
                                moved += p;
                                dist.push((tid, p.clone()));
                            }
                        }
                    }
                }
                let residual = Rat::one() - moved;
                if !residual.is_zero() {
                    dist.push((initial, residual));
                }
                transitions.insert((id, a), dist);
            }
        }
        enabled.insert(i, acts);
    }

    // Sinks self-loop under the end action.
    enabled.insert(h + 1, vec![end_action]);
    transitions.insert((t_alrm, end_action), vec![(t_alrm, Rat::one())]);
    transitions.insert((t_safe, end_action), vec![(t_safe, Rat::one())]);

    ColoredMdp {
        variant,
        horizon: h,
        mode: unrolled.product.mode,
        r_max: unrolled.r_max.clone(),
        names,
        colors,
        initial,
        actions,
        enabled,
        transitions,
        target,
        other_sink,
        step_states,
        product_state,
        initial_obs: hmm.obs_name_of(hmm.initial()).to_string(),
        end_action,
        length_actions,
    }
}

/// Probability of observing `trace` in the HMM (sum over matching paths).
pub fn trace_probability(hmm: &Hmm, trace: &Trace) -> Rat {
    crate::inference::forward_filter(hmm, trace).trace_prob
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Trace;
    use crate::oracle::{icy_driving, monitor_a, monitor_b};

    fn all_traces(alphabet: &[String], max_len: usize) -> Vec<Trace> {
        let mut out = vec![Trace::empty()];
        let mut layer = vec![Trace::empty()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for t in &layer {
                for z in alphabet {
                    let e = t.extended(z);
                    out.push(e.clone());
                    next.push(e);
                }
            }
            layer = next;
        }
        out
    }

    #[test]
    fn product_of_running_example_matches_fig3() {
        let hmm = icy_driving();
        let prod = product(&hmm, &monitor_b(), AlarmMode::MissedAlarm).unwrap();
        assert_eq!(prod.hmm.num_states(), 6);
        let d1 = prod.hmm.state_id("q_d|s_1").unwrap();
        let i2 = prod.hmm.state_id("q_i|s_2").unwrap();
        assert_eq!(prod.hmm.initial(), d1);
        assert!(prod.hmm.successors(d1).contains(&(i2, Rat::new(9, 10))));
        // Alarm states are exactly the pairs with monitor component s_3.
        for s in 0..prod.hmm.num_states() {
            let is_s3 = prod.hmm.state_name(s).ends_with("|s_3");
            assert_eq!(prod.alarm[s], is_s3, "state {}", prod.hmm.state_name(s));
        }
    }

    #[test]
    fn all_accepting_monitor_false_alarm_product() {
        let hmm = icy_driving();
        let all = Dfa::new(
            vec!["dry".into(), "icy".into()],
            vec!["q".into()],
            "q",
            vec!["q".into()],
            vec![
                ("q".into(), "dry".into(), "q".into()),
                ("q".into(), "icy".into(), "q".into()),
            ],
        )
        .unwrap();
        let prod = product(&hmm, &all, AlarmMode::FalseAlarm).unwrap();
        assert_eq!(prod.hmm.num_states(), hmm.num_states());
        assert!(prod.alarm.iter().all(|&a| a));
    }

    #[test]
    fn product_preserves_trace_probabilities() {
        let hmm = icy_driving();
        for mode in [AlarmMode::MissedAlarm, AlarmMode::FalseAlarm] {
            let prod = product(&hmm, &monitor_a(), mode).unwrap();
            for t in all_traces(hmm.observations(), 4) {
                assert_eq!(
                    trace_probability(&hmm, &t),
                    trace_probability(&prod.hmm, &t),
                    "trace {t}"
                );
            }
        }
    }

    #[test]
    fn product_alarm_tracks_acceptance() {
        let hmm = icy_driving();
        let mon = monitor_a();
        let prod = product(&hmm, &mon, AlarmMode::MissedAlarm).unwrap();
        let comp = mon.complement();
        for t in all_traces(hmm.observations(), 4) {
            if t.is_empty() || trace_probability(&hmm, &t).is_zero() {
                continue;
            }
            let b = crate::inference::forward_filter(&prod.hmm, &t);
            let ends: Vec<bool> = b.states.keys().map(|&s| prod.alarm[s]).collect();
            assert!(ends.iter().all(|&x| x == ends[0]), "mixed alarm flags for {t}");
            assert_eq!(ends[0], comp.accepts(&t), "trace {t}");
        }
    }

    #[test]
    fn unroll_matches_fig4() {
        let hmm = icy_driving();
        let prod = product(&hmm, &monitor_b(), AlarmMode::MissedAlarm).unwrap();
        let unrolled = unroll_with_risk(&prod, 3).unwrap();
        assert_eq!(unrolled.steps[1].len(), 1);
        assert_eq!(unrolled.steps[2].len(), 2);
        assert_eq!(unrolled.steps[3].len(), 3);

        let i3 = prod.hmm.state_id("q_i|s_3").unwrap();
        assert_eq!(
            unrolled.sink_dist(i3),
            SinkDist { alarm: Rat::zero(), safe: Rat::one(), ignore: Rat::zero() }
        );
        let d1 = prod.hmm.state_id("q_d|s_1").unwrap();
        assert_eq!(
            unrolled.sink_dist(d1),
            SinkDist { alarm: Rat::zero(), safe: Rat::zero(), ignore: Rat::one() }
        );
        let c3 = prod.hmm.state_id("q_c|s_3").unwrap();
        assert_eq!(
            unrolled.sink_dist(c3),
            SinkDist { alarm: Rat::one(), safe: Rat::zero(), ignore: Rat::zero() }
        );
    }

    #[test]
    fn unroll_rejects_degenerate_risk() {
        let hmm = Hmm::new(
            vec!["a".into()],
            vec![("s".into(), "a".into(), Rat::zero())],
            "s",
            vec![("s".into(), "s".into(), Rat::one())],
        )
        .unwrap();
        let all = Dfa::new(
            vec!["a".into()],
            vec!["q".into()],
            "q",
            vec!["q".into()],
            vec![("q".into(), "a".into(), "q".into())],
        )
        .unwrap();
        let prod = product(&hmm, &all, AlarmMode::FalseAlarm).unwrap();
        assert!(matches!(unroll_with_risk(&prod, 2), Err(Error::DegenerateRisk)));
    }

    #[test]
    fn mdp_matches_fig5() {
        let hmm = icy_driving();
        let prod = product(&hmm, &monitor_b(), AlarmMode::MissedAlarm).unwrap();
        let unrolled = unroll_with_risk(&prod, 3).unwrap();
        let mdp = build_colored_mdp(&unrolled, Variant::ExactH);

        let dry = mdp.actions.iter().position(|a| a == "dry").unwrap();
        let find = |name: &str| mdp.names.iter().position(|n| n == name).unwrap();

        // From <2,(i,2)>, action dry: 1/2 to <3,(d,1)> and 1/2 back to the
        // initial state.
        let i2 = find("2|q_i|s_2");
        let d3 = find("3|q_d|s_1");
        let dist = mdp.distribution(i2, dry);
        assert!(dist.contains(&(d3, Rat::new(1, 2))));
        assert!(dist.contains(&(mdp.initial, Rat::new(1, 2))));

        // From <2,(c,2)>, action dry redirects everything.
        let c2 = find("2|q_c|s_2");
        assert_eq!(mdp.distribution(c2, dry), &[(mdp.initial, Rat::one())]);

        // Color 3 only has the end action; colors never mix enabled sets.
        assert_eq!(mdp.enabled_at(3), &[mdp.end_action]);
        for s in 0..mdp.num_states() {
            for &a in mdp.enabled_at(mdp.colors[s]) {
                let total: Rat =
                    mdp.distribution(s, a).iter().map(|(_, p)| p.clone()).sum();
                assert!(total.is_one(), "state {} action {}", mdp.names[s], mdp.actions[a]);
            }
        }
    }

    #[test]
    fn leqh_with_horizon_one_adds_only_fresh_initial() {
        let hmm = icy_driving();
        let prod = product(&hmm, &monitor_b(), AlarmMode::MissedAlarm).unwrap();
        let unrolled = unroll_with_risk(&prod, 1).unwrap();
        let exact = build_colored_mdp(&unrolled, Variant::ExactH);
        let leq = build_colored_mdp(&unrolled, Variant::LeqH);
        assert_eq!(leq.num_states(), exact.num_states() + 1);
        assert_eq!(leq.enabled_at(0).len(), 1);
        let entry = leq.distribution(leq.initial, leq.len_action(1));
        assert_eq!(entry.len(), 1);
        assert_eq!(leq.names[entry[0].0], "1|q_d|s_1");
    }

    #[test]
    fn leqh_materializes_entry_states() {
        let hmm = icy_driving();
        let prod = product(&hmm, &monitor_b(), AlarmMode::MissedAlarm).unwrap();
        let unrolled = unroll_with_risk(&prod, 3).unwrap();
        let mdp = build_colored_mdp(&unrolled, Variant::LeqH);
        // Length-l entry points exist for every l.
        for l in 1..=3 {
            let dist = mdp.distribution(mdp.initial, mdp.len_action(l));
            assert_eq!(dist.len(), 1);
            assert_eq!(mdp.names[dist[0].0], format!("{}|q_d|s_1", 3 - l + 1));
        }
    }
}
