//! Exact forward filtering, trace risk, and the learner's membership query.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Hmm, StateId, Thresholds, Trace};
use crate::rational::Rat;

/// Posterior over HMM states after observing a trace, together with the
/// unconditional trace probability.
#[derive(Clone, Debug)]
pub struct Belief {
    /// Conditional probability of being in each state given the trace.
    /// Empty iff the trace probability is zero.
    pub states: HashMap<StateId, Rat>,
    /// Unconditional probability of the trace.
    pub trace_prob: Rat,
}

/// Membership query verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MqVerdict {
    pub unsafe_: bool,
    /// Risk of the trace; absent when the trace is not in the language.
    pub risk: Option<Rat>,
}

/// Single left-to-right pass of unnormalized state weights; normalization
/// happens once at the end.
pub fn forward_filter(hmm: &Hmm, trace: &Trace) -> Belief {
    let mut weights: HashMap<StateId, Rat> = HashMap::new();
    let mut symbols = trace.symbols().iter();
    match symbols.next() {
        Some(z) if hmm.obs_name_of(hmm.initial()) == z => {
            weights.insert(hmm.initial(), Rat::one());
        }
        Some(_) => {
            return Belief { states: HashMap::new(), trace_prob: Rat::zero() };
        }
        None => {
            // Empty trace: the unique length-0 path stays at the initial state.
            weights.insert(hmm.initial(), Rat::one());
            return Belief { states: weights, trace_prob: Rat::one() };
        }
    }
    for z in symbols {
        let zid = match hmm.obs_index(z) {
            Some(z) => z,
            None => return Belief { states: HashMap::new(), trace_prob: Rat::zero() },
        };
        let mut next: HashMap<StateId, Rat> = HashMap::new();
        for (s, w) in &weights {
            for (t, p) in hmm.successors(*s) {
                if hmm.obs_of(*t) == zid {
                    *next.entry(*t).or_insert_with(Rat::zero) += &(w * p);
                }
            }
        }
        weights = next;
        if weights.is_empty() {
            return Belief { states: weights, trace_prob: Rat::zero() };
        }
    }
    let trace_prob: Rat = weights.values().cloned().sum();
    let inv = trace_prob.recip();
    for w in weights.values_mut() {
        *w *= &inv;
    }
    Belief { states: weights, trace_prob }
}

/// Expected end-state risk conditioned on the trace.
/// The empty trace has risk `r(initial)`.
pub fn trace_risk(hmm: &Hmm, trace: &Trace) -> Result<Rat> {
    let belief = forward_filter(hmm, trace);
    if belief.trace_prob.is_zero() {
        return Err(Error::NotInLanguage);
    }
    Ok(belief.states.iter().map(|(s, w)| w * hmm.risk(*s)).sum())
}

/// Membership query: unsafe iff the trace occurs, fits the horizon, and its
/// risk exceeds the learning threshold. Total on all traces.
pub fn membership_query(hmm: &Hmm, trace: &Trace, th: &Thresholds) -> MqVerdict {
    if trace.len() > th.horizon {
        return MqVerdict { unsafe_: false, risk: None };
    }
    match trace_risk(hmm, trace) {
        Ok(risk) => {
            let unsafe_ = risk > th.learn;
            MqVerdict { unsafe_, risk: Some(risk) }
        }
        Err(_) => MqVerdict { unsafe_: false, risk: None },
    }
}
