//! Verification and active learning of runtime monitors for risk-labelled
//! hidden Markov models.
//!
//! The pipeline decides, with exact rational arithmetic, whether a DFA monitor
//! raises an alarm on every unsafe trace (no missed alarms) and only on unsafe
//! traces (no false alarms) up to a horizon. The decision reduces to policy
//! synthesis on a colored MDP built from the monitor-HMM product. A learner
//! uses the verifier as an equivalence oracle to produce correct monitors.

pub mod error;
pub mod inference;
pub mod learner;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod synthesis;
pub mod transform;
pub mod verifier;

pub use error::{Error, Result};
pub use model::{Dfa, Hmm, Thresholds, Trace};
pub use rational::Rat;
