//! Answer selection for repeated LLM sampling by modelling the distribution
//! of trajectory confidences.
//!
//! A pool of sampled answers is scored by token-level confidence, split into
//! a confident and an unconfident part, purged of the answer the unconfident
//! part most agrees on, and voted hierarchically over confidence intervals.
//! The crate also carries the streaming reflection controller used at
//! generation time, synthetic pool generators, evaluation metrics and
//! numerical checks of the separation results the method rests on.

pub mod cli;
pub mod confidence;
pub mod error;
pub mod io;
pub mod metrics;
pub mod partition;
pub mod rng;
pub mod sim;
pub mod ssc;
pub mod theory;
pub mod voting;

pub use confidence::{
    group_confidence, segment_steps, token_confidence, trajectory_confidence, GeneratedToken, GroupChoice, StepGroup,
    StepStrategy, TokenDistribution, TokenLogprob, Trajectory,
};
pub use error::{Error, Result};
pub use partition::{fit_gmm_1d, partition, GmmFit, PartitionMethod, Split};
pub use ssc::{ssc_step, Decision, SscConfig, SscController, SscState};
pub use voting::{
    baseline_vote, distri_vote, hier_vote, weighted_majority, Baseline, ConfidencePool, VoteMethod, VoteResult,
    VotingConfig,
};
