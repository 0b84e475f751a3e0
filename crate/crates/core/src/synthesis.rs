//! Exact policy synthesis on colored MDPs by depth-first branch-and-bound.
//!
//! The objective is the conditional probability a/(a+b) of reaching the
//! target sink rather than the other sink. Although the constructed MDP
//! redirects residual mass to its initial state, the conditional value of a
//! color-consistent policy equals the two-sink ratio of a single acyclic pass
//! through the step structure, so no cyclic chain ever needs solving; the
//! solver works exclusively on that single-pass view ([`ColoredMdp::forward`]).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::Trace;
use crate::rational::Rat;
use crate::transform::{ActionId, ColorId, ColoredMdp, Variant};

/// Memoryless, color-consistent policy: one action per color.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    pub actions: BTreeMap<ColorId, ActionId>,
}

impl Policy {
    pub fn action(&self, color: ColorId) -> Option<ActionId> {
        self.actions.get(&color).copied()
    }
}

/// Outcome of a successful synthesis query.
#[derive(Clone, Debug)]
pub struct SynthesisResult {
    /// Maximum (or witnessing) conditional value a/(a+b).
    pub value: Rat,
    pub witness: Policy,
    pub trace: Trace,
    /// Branch-and-bound nodes expanded.
    pub explored: u64,
}

/// Optional solver instrumentation.
#[derive(Default)]
pub struct SolveOptions<'a> {
    /// One line per expanded node: `node color=<c> actions=<a,..> bound=<p/q>`.
    pub diagnostics: Option<&'a mut dyn std::io::Write>,
}

/// Maximizes the conditional value over all color-consistent policies.
/// Ties are broken towards the shortest, then lexicographically smallest
/// induced trace (action order as declared in the model file).
pub fn solve_max(mdp: &ColoredMdp) -> Result<SynthesisResult> {
    solve_max_with(mdp, &mut SolveOptions::default())
}

pub fn solve_max_with(mdp: &ColoredMdp, opts: &mut SolveOptions) -> Result<SynthesisResult> {
    let mut search = Search::new(mdp, opts, None);
    search.run();
    search.into_result().ok_or(Error::Infeasible)
}

/// Finds any policy whose conditional value compares above `lambda`
/// (strictly or not), or certifies that none exists. Early-exits on the
/// first witness, which need not be optimal.
pub fn solve_threshold(
    mdp: &ColoredMdp,
    lambda: &Rat,
    strict: bool,
) -> Result<Option<SynthesisResult>> {
    solve_threshold_with(mdp, lambda, strict, &mut SolveOptions::default())
}

pub fn solve_threshold_with(
    mdp: &ColoredMdp,
    lambda: &Rat,
    strict: bool,
    opts: &mut SolveOptions,
) -> Result<Option<SynthesisResult>> {
    let mut search = Search::new(mdp, opts, Some((lambda.clone(), strict)));
    search.run();
    Ok(search.into_result())
}

/// Reads off the trace induced by a policy: the initial observation followed
/// by the chosen observation actions, up to the end-of-trace action. In the
/// LeqH variant the color-0 length action selects where the pass starts.
pub fn policy_to_trace(mdp: &ColoredMdp, policy: &Policy) -> Result<Trace> {
    let start = pass_start(mdp, policy)?;
    let mut symbols = vec![mdp.initial_obs.clone()];
    for color in start..=mdp.horizon {
        let a = expect_enabled(mdp, policy, color)?;
        if a == mdp.end_action {
            break;
        }
        symbols.push(mdp.action_name(a).to_string());
    }
    Ok(Trace::new(symbols))
}

/// Inverse of [`policy_to_trace`]: the trace-consistent policy whose pass
/// spells out the given trace. Colors before the pass get the smallest
/// enabled action.
pub fn trace_to_policy(mdp: &ColoredMdp, trace: &Trace) -> Result<Policy> {
    let l = trace.len();
    let bad = |msg: String| Error::MalformedPolicy(msg);
    if l == 0 {
        return Err(bad("the empty trace has no policy".into()));
    }
    if trace.symbols()[0] != mdp.initial_obs {
        return Err(bad(format!(
            "trace starts with {}, the model starts with {}",
            trace.symbols()[0],
            mdp.initial_obs
        )));
    }
    let h = mdp.horizon;
    let start = match mdp.variant {
        Variant::ExactH if l != h => {
            return Err(bad(format!("trace length {l} differs from horizon {h}")));
        }
        Variant::ExactH => 1,
        Variant::LeqH if l > h => {
            return Err(bad(format!("trace length {l} exceeds horizon {h}")));
        }
        Variant::LeqH => h - l + 1,
    };
    let mut actions: BTreeMap<ColorId, ActionId> = BTreeMap::new();
    if mdp.variant == Variant::LeqH {
        actions.insert(0, mdp.len_action(l));
    }
    for (k, z) in trace.symbols().iter().enumerate().skip(1) {
        let color = start + k - 1;
        let a = mdp
            .actions
            .iter()
            .position(|n| n == z)
            .ok_or_else(|| bad(format!("unknown observation {z}")))?;
        if !mdp.enabled_at(color).contains(&a) {
            return Err(bad(format!("observation {z} not enabled at color {color}")));
        }
        actions.insert(color, a);
    }
    actions.insert(h, mdp.end_action);
    for color in 1..start {
        actions.insert(color, mdp.enabled_at(color)[0]);
    }
    actions.insert(h + 1, mdp.end_action);
    Ok(Policy { actions })
}

/// Target and other-sink mass of the single pass induced by the policy.
/// `None` when the pass reaches neither sink (a + b = 0).
pub fn policy_value(mdp: &ColoredMdp, policy: &Policy) -> Result<Option<(Rat, Rat)>> {
    let start = pass_start(mdp, policy)?;
    let entry = pass_entry(mdp, policy)?;
    let mut dist: Vec<(usize, Rat)> = vec![(entry, Rat::one())];
    let mut a = Rat::zero();
    let mut b = Rat::zero();
    for color in start..=mdp.horizon {
        let act = expect_enabled(mdp, policy, color)?;
        let mut next: BTreeMap<usize, Rat> = BTreeMap::new();
        for (s, w) in &dist {
            for (t, p) in mdp.forward(*s, act) {
                if t == mdp.target {
                    a += &(w * &p);
                } else if t == mdp.other_sink {
                    b += &(w * &p);
                } else {
                    *next.entry(t).or_insert_with(Rat::zero) += &(w * &p);
                }
            }
        }
        dist = next.into_iter().collect();
    }
    if (a.clone() + b.clone()).is_zero() {
        Ok(None)
    } else {
        Ok(Some((a, b)))
    }
}

fn pass_start(mdp: &ColoredMdp, policy: &Policy) -> Result<usize> {
    match mdp.variant {
        Variant::ExactH => Ok(1),
        Variant::LeqH => {
            let a = expect_enabled(mdp, policy, 0)?;
            let l = a - mdp.len_action(1) + 1;
            Ok(mdp.horizon - l + 1)
        }
    }
}

fn pass_entry(mdp: &ColoredMdp, policy: &Policy) -> Result<usize> {
    match mdp.variant {
        Variant::ExactH => Ok(mdp.initial),
        Variant::LeqH => {
            let a = expect_enabled(mdp, policy, 0)?;
            Ok(mdp.distribution(mdp.initial, a)[0].0)
        }
    }
}

fn expect_enabled(mdp: &ColoredMdp, policy: &Policy, color: ColorId) -> Result<ActionId> {
    let a = policy
        .action(color)
        .ok_or_else(|| Error::MalformedPolicy(format!("no action for color {color}")))?;
    if !mdp.enabled_at(color).contains(&a) {
        return Err(Error::MalformedPolicy(format!(
            "action {} not enabled at color {color}",
            mdp.action_name(a)
        )));
    }
    Ok(a)
}

/// Per-state relaxation: maximum reachable target mass and minimum other-sink
/// mass, with per-state (color-inconsistent) action choices. The objective is
/// monotone increasing in a and decreasing in b, so
/// `a_max / (a_max + b_min)` bounds every completion from above.
struct Relaxation {
    a_max: Vec<Rat>,
    b_min: Vec<Rat>,
}

impl Relaxation {
    fn build(mdp: &ColoredMdp) -> Relaxation {
        let n = mdp.num_states();
        let mut a_max = vec![Rat::zero(); n];
        let mut b_min = vec![Rat::zero(); n];
        let h = mdp.horizon;
        for &s in &mdp.step_states[h] {
            for (t, p) in mdp.forward(s, mdp.end_action) {
                if t == mdp.target {
                    a_max[s] = p;
                } else if t == mdp.other_sink {
                    b_min[s] = p;
                }
            }
        }
        for i in (1..h).rev() {
            for &s in &mdp.step_states[i] {
                let mut best_a: Option<Rat> = None;
                let mut best_b: Option<Rat> = None;
                for &z in mdp.enabled_at(i) {
                    let mut a = Rat::zero();
                    let mut b = Rat::zero();
                    for (t, p) in mdp.forward(s, z) {
                        a += &(&p * &a_max[t]);
                        b += &(&p * &b_min[t]);
                    }
                    best_a = Some(best_a.map_or(a.clone(), |x| x.max(a)));
                    best_b = Some(best_b.map_or(b.clone(), |x| x.min(b)));
                }
                a_max[s] = best_a.unwrap_or_else(Rat::zero);
                b_min[s] = best_b.unwrap_or_else(Rat::zero);
            }
        }
        Relaxation { a_max, b_min }
    }

    fn bound(&self, dist: &[(usize, Rat)]) -> Rat {
        let a: Rat = dist.iter().map(|(s, w)| w * &self.a_max[*s]).sum();
        let b: Rat = dist.iter().map(|(s, w)| w * &self.b_min[*s]).sum();
        let total = a.clone() + b.clone();
        if total.is_zero() { Rat::zero() } else { a / total }
    }
}

struct Incumbent {
    value: Rat,
    /// Pass length (LeqH trace length; horizon for ExactH) and action
    /// sequence along the pass, for the shortest-then-lex tie-break.
    key: (usize, Vec<ActionId>),
    start: usize,
    actions: Vec<ActionId>,
}

struct Search<'a, 'b> {
    mdp: &'a ColoredMdp,
    relax: Relaxation,
    opts: &'a mut SolveOptions<'b>,
    /// Threshold mode: stop at the first policy comparing above lambda.
    threshold: Option<(Rat, bool)>,
    incumbent: Option<Incumbent>,
    explored: u64,
    done: bool,
}

impl<'a, 'b> Search<'a, 'b> {
    fn new(
        mdp: &'a ColoredMdp,
        opts: &'a mut SolveOptions<'b>,
        threshold: Option<(Rat, bool)>,
    ) -> Self {
        Search { mdp, relax: Relaxation::build(mdp), opts, threshold, incumbent: None, explored: 0, done: false }
    }

    fn run(&mut self) {
        let h = self.mdp.horizon;
        match self.mdp.variant {
            Variant::ExactH => {
                let entry = self.mdp.initial;
                self.greedy_seed(1, entry, h);
                let dist = vec![(entry, Rat::one())];
                let mut actions = Vec::new();
                self.dfs(1, dist, &mut actions, 1, h);
            }
            Variant::LeqH => {
                // Solve one pass per trace length, shortest first; a later
                // length replaces the incumbent only on strict improvement.
                for l in 1..=h {
                    if self.done {
                        break;
                    }
                    let start = h - l + 1;
                    let entry = self.mdp.distribution(self.mdp.initial, self.mdp.len_action(l))[0].0;
                    self.greedy_seed(start, entry, l);
                    let dist = vec![(entry, Rat::one())];
                    let mut actions = Vec::new();
                    self.dfs(start, dist, &mut actions, start, l);
                }
            }
        }
    }

    /// Seeds the incumbent with the rollout that always forwards the most
    /// probability mass.
    fn greedy_seed(&mut self, start: usize, entry: usize, length: usize) {
        let mut dist: Vec<(usize, Rat)> = vec![(entry, Rat::one())];
        let mut actions: Vec<ActionId> = Vec::new();
        for color in start..self.mdp.horizon {
            let mut best: Option<(Rat, ActionId)> = None;
            for &z in self.mdp.enabled_at(color) {
                let mass: Rat = dist
                    .iter()
                    .flat_map(|(s, w)| {
                        self.mdp.forward(*s, z).into_iter().map(move |(_, p)| w * &p)
                    })
                    .sum();
                if best.as_ref().is_none_or(|(m, _)| mass > *m) {
                    best = Some((mass, z));
                }
            }
            let (_, z) = best.expect("every color has an enabled action");
            actions.push(z);
            dist = step(self.mdp, &dist, z);
        }
        actions.push(self.mdp.end_action);
        if let Some((a, b)) = finish(self.mdp, &dist) {
            let value = a.clone() / (a + b);
            self.offer(value, start, actions, length);
        }
    }

    fn dfs(
        &mut self,
        color: usize,
        dist: Vec<(usize, Rat)>,
        actions: &mut Vec<ActionId>,
        start: usize,
        length: usize,
    ) {
        if self.done {
            return;
        }
        self.explored += 1;
        let bound = self.relax.bound(&dist);
        if let Some(w) = self.opts.diagnostics.as_deref_mut() {
            let names: Vec<&str> =
                actions.iter().map(|&a| self.mdp.action_name(a)).collect();
            let _ = writeln!(w, "node color={color} actions={} bound={bound}", names.join(","));
        }
        if !self.admissible(&bound) {
            return;
        }
        if color == self.mdp.horizon {
            if let Some((a, b)) = finish(self.mdp, &dist) {
                let value = a.clone() / (a + b);
                let mut full = actions.clone();
                full.push(self.mdp.end_action);
                self.offer(value, start, full, length);
            }
            return;
        }
        // Children in descending bound order, lexicographic among ties.
        type Child = (Rat, ActionId, Vec<(usize, Rat)>);
        let mut children: Vec<Child> = Vec::new();
        for &z in self.mdp.enabled_at(color) {
            let next = step(self.mdp, &dist, z);
            if next.is_empty() {
                continue;
            }
            children.push((self.relax.bound(&next), z, next));
        }
        children.sort_by(|(ba, za, _), (bb, zb, _)| bb.cmp(ba).then(za.cmp(zb)));
        for (_, z, next) in children {
            actions.push(z);
            self.dfs(color + 1, next, actions, start, length);
            actions.pop();
            if self.done {
                return;
            }
        }
    }

    /// True while the subtree can still contribute: its bound beats the
    /// incumbent (or ties it, to preserve the lexicographic tie-break) and,
    /// in threshold mode, can still cross the threshold.
    fn admissible(&self, bound: &Rat) -> bool {
        if let Some((lambda, strict)) = &self.threshold {
            return if *strict { bound > lambda } else { bound >= lambda };
        }
        match &self.incumbent {
            Some(inc) => bound >= &inc.value,
            None => true,
        }
    }

    fn offer(&mut self, value: Rat, start: usize, actions: Vec<ActionId>, length: usize) {
        if let Some((lambda, strict)) = &self.threshold {
            let ok = if *strict { &value > lambda } else { &value >= lambda };
            if ok {
                self.incumbent = Some(Incumbent { value, key: (length, actions.clone()), start, actions });
                self.done = true;
            }
            return;
        }
        let key = (length, actions.clone());
        let better = match &self.incumbent {
            None => true,
            Some(inc) => value > inc.value || (value == inc.value && key < inc.key),
        };
        if better {
            self.incumbent = Some(Incumbent { value, key, start, actions });
        }
    }

    fn into_result(self) -> Option<SynthesisResult> {
        let inc = self.incumbent?;
        let mut map: BTreeMap<ColorId, ActionId> = BTreeMap::new();
        if self.mdp.variant == Variant::LeqH {
            let l = self.mdp.horizon - inc.start + 1;
            map.insert(0, self.mdp.len_action(l));
            for color in 1..inc.start {
                map.insert(color, self.mdp.enabled_at(color)[0]);
            }
        }
        for (k, &a) in inc.actions.iter().enumerate() {
            map.insert(inc.start + k, a);
        }
        map.insert(self.mdp.horizon + 1, self.mdp.end_action);
        let witness = Policy { actions: map };
        let trace = policy_to_trace(self.mdp, &witness).expect("witness policy is well-formed");
        Some(SynthesisResult { value: inc.value, witness, trace, explored: self.explored })
    }
}

fn step(mdp: &ColoredMdp, dist: &[(usize, Rat)], action: ActionId) -> Vec<(usize, Rat)> {
    let mut next: BTreeMap<usize, Rat> = BTreeMap::new();
    for (s, w) in dist {
        for (t, p) in mdp.forward(*s, action) {
            *next.entry(t).or_insert_with(Rat::zero) += &(w * &p);
        }
    }
    next.into_iter().collect()
}

/// Applies the end action to a horizon-step distribution; `None` if neither
/// sink receives mass.
fn finish(mdp: &ColoredMdp, dist: &[(usize, Rat)]) -> Option<(Rat, Rat)> {
    let mut a = Rat::zero();
    let mut b = Rat::zero();
    for (s, w) in dist {
        for (t, p) in mdp.forward(*s, mdp.end_action) {
            if t == mdp.target {
                a += &(w * &p);
            } else if t == mdp.other_sink {
                b += &(w * &p);
            }
        }
    }
    if (a.clone() + b.clone()).is_zero() { None } else { Some((a, b)) }
}
