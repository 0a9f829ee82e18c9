//! SelfStepConf: step-confidence monitoring with reflection injection.
//!
//! After every reasoning step the controller compares the step confidence to
//! an adaptive threshold `tau` (an exponential moving average of earlier step
//! confidences). A step that falls below `delta * tau` while also being lower
//! than the previous step triggers a reflection: the configured reflection
//! tokens are forced into the next positions and `tau` is left untouched.
//! Otherwise `tau` absorbs the step confidence.

use serde::{Deserialize, Serialize};

use crate::confidence::{
    GeneratedToken, StepGroup, StepSegmenter, StepStrategy, TokenDistribution, TokenLogprob,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SscConfig {
    /// EMA factor for the threshold, in (0, 1).
    pub alpha: f64,
    /// Trigger ratio, in (0, 1].
    pub delta: f64,
    /// Tokens forced, in order, when a reflection fires.
    pub reflection_tokens: Vec<String>,
}

impl Default for SscConfig {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            delta: 0.8,
            reflection_tokens: vec!["wait".to_string()],
        }
    }
}

impl SscConfig {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        let cfg = Self {
            alpha,
            delta,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must be in (0,1), got {}", self.alpha)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::invalid(format!("delta must be in (0,1], got {}", self.delta)));
        }
        if self.reflection_tokens.is_empty() {
            return Err(Error::invalid("at least one reflection token is required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SscState {
    pub tau: f64,
    /// Number of step events seen so far.
    pub step: usize,
    pub prev_step_conf: Option<f64>,
    pub reflections_fired: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Continue,
    Reflect,
}

/// One controller transition for a completed step.
pub fn ssc_step(state: &SscState, step_conf: f64, cfg: &SscConfig) -> Result<(SscState, Decision)> {
    if !(step_conf.is_finite() && step_conf >= 0.0) {
        return Err(Error::invalid(format!(
            "step confidence must be finite and >= 0, got {step_conf}"
        )));
    }
    let mut next = state.clone();
    let decision = if state.step == 0 {
        next.tau = step_conf;
        Decision::Continue
    } else {
        // tau == 0 means the ratio is unbounded: never a decline
        let ratio = if state.tau > 0.0 {
            step_conf / state.tau
        } else {
            f64::INFINITY
        };
        let declining = state.prev_step_conf.is_some_and(|prev| step_conf < prev);
        if ratio < cfg.delta && declining {
            next.reflections_fired += 1;
            Decision::Reflect
        } else {
            next.tau = cfg.alpha * state.tau + (1.0 - cfg.alpha) * step_conf;
            Decision::Continue
        }
    };
    next.prev_step_conf = Some(step_conf);
    next.step += 1;
    Ok((next, decision))
}

/// Result of replaying a sequence of step confidences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayTrace {
    pub triggers: Vec<usize>,
    pub tau_history: Vec<f64>,
    pub final_state: SscState,
}

pub fn replay_trace(step_confs: &[f64], cfg: &SscConfig) -> Result<ReplayTrace> {
    cfg.validate()?;
    let mut state = SscState::default();
    let mut triggers = Vec::new();
    let mut tau_history = Vec::with_capacity(step_confs.len());
    for (i, &c) in step_confs.iter().enumerate() {
        let (next, decision) = ssc_step(&state, c, cfg)?;
        if decision == Decision::Reflect {
            triggers.push(i);
        }
        tau_history.push(next.tau);
        state = next;
    }
    Ok(ReplayTrace {
        triggers,
        tau_history,
        final_state: state,
    })
}

/// A distribution after reflection injection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    pub dist: TokenDistribution,
    pub emitted: String,
    /// True when the reflection token was missing from the logged top-k and
    /// had to be appended; the position's confidence changes in that case.
    pub appended: bool,
}

/// Give `reflection_token` the highest probability by swapping it with the
/// current argmax, then decode greedily.
pub fn inject_reflection(dist: &TokenDistribution, reflection_token: &str) -> Injection {
    let entries = dist.entries();
    let top = entries[0].logprob;
    let mut rest: Vec<TokenLogprob> = Vec::with_capacity(entries.len());
    let appended = match entries.iter().position(|e| e.token == reflection_token) {
        Some(pos) => {
            let displaced = entries[pos].logprob;
            for (i, e) in entries.iter().enumerate() {
                if i == pos {
                    continue;
                }
                let mut e = e.clone();
                if i == 0 {
                    e.logprob = displaced;
                }
                rest.push(e);
            }
            false
        }
        None => {
            rest.extend(entries.iter().cloned());
            true
        }
    };
    rest.sort_by(|a, b| b.logprob.total_cmp(&a.logprob));
    let mut out = Vec::with_capacity(rest.len() + 1);
    out.push(TokenLogprob::new(reflection_token, top));
    out.extend(rest);
    Injection {
        dist: TokenDistribution::from_sorted_unchecked(out),
        emitted: reflection_token.to_string(),
        appended,
    }
}

/// A model proposing one position at a time.
///
/// `propose` returns the next-token distribution together with the token the
/// model would emit on its own; `commit` tells the model which token was
/// actually emitted (it differs from the proposal during reflection).
pub trait TokenSource {
    fn propose(&mut self) -> Option<(TokenDistribution, String)>;
    fn commit(&mut self, token: &str);
}

/// Replays a recorded stream. Committed tokens are ignored, so a forced
/// reflection token simply overwrites the recorded position.
#[derive(Debug, Clone)]
pub struct ReplaySource {
    tokens: std::vec::IntoIter<GeneratedToken>,
}

impl ReplaySource {
    pub fn new(tokens: Vec<GeneratedToken>) -> Self {
        Self {
            tokens: tokens.into_iter(),
        }
    }
}

impl TokenSource for ReplaySource {
    fn propose(&mut self) -> Option<(TokenDistribution, String)> {
        self.tokens.next().map(|t| (t.dist, t.text))
    }

    fn commit(&mut self, _token: &str) {}
}

/// Everything the controller did while driving one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub tokens: Vec<GeneratedToken>,
    pub steps: Vec<StepGroup>,
    pub step_confidences: Vec<f64>,
    pub decisions: Vec<Decision>,
    pub tau_history: Vec<f64>,
    /// Token positions that carry a forced reflection token.
    pub injected_positions: Vec<usize>,
    /// Subset of `injected_positions` where the token had to be appended.
    pub appended_positions: Vec<usize>,
    pub final_state: SscState,
}

impl GenerationTrace {
    pub fn text(&self) -> String {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }
}

/// Drives a [`TokenSource`] with step segmentation and reflection triggering.
#[derive(Debug, Clone)]
pub struct SscController {
    cfg: SscConfig,
    strategy: StepStrategy,
    max_tokens: usize,
}

impl SscController {
    pub fn new(cfg: SscConfig, strategy: StepStrategy) -> Result<Self> {
        cfg.validate()?;
        strategy.validate()?;
        Ok(Self {
            cfg,
            strategy,
            max_tokens: usize::MAX,
        })
    }

    pub fn with_max_tokens(mut self, max_tokens: usize) -> Self {
        self.max_tokens = max_tokens;
        self
    }

    pub fn run<S: TokenSource>(&self, source: &mut S) -> Result<GenerationTrace> {
        let mut seg = StepSegmenter::new(self.strategy.clone())?;
        let mut state = SscState::default();
        let mut trace = GenerationTrace {
            tokens: Vec::new(),
            steps: Vec::new(),
            step_confidences: Vec::new(),
            decisions: Vec::new(),
            tau_history: Vec::new(),
            injected_positions: Vec::new(),
            appended_positions: Vec::new(),
            final_state: SscState::default(),
        };
        // reflection tokens still to be forced, next one first
        let mut pending: std::collections::VecDeque<&str> = Default::default();

        while trace.tokens.len() < self.max_tokens {
            let Some((dist, proposed)) = source.propose() else {
                break;
            };
            let position = trace.tokens.len();
            let (dist, text) = match pending.pop_front() {
                Some(reflection) => {
                    let inj = inject_reflection(&dist, reflection);
                    trace.injected_positions.push(position);
                    if inj.appended {
                        trace.appended_positions.push(position);
                    }
                    (inj.dist, inj.emitted)
                }
                None => (dist, proposed),
            };
            source.commit(&text);
            let closed = seg.push(&text, &dist);
            trace.tokens.push(GeneratedToken::new(text, dist));
            if let Some(group) = closed {
                let decision = self.close_step(&mut state, &mut trace, group)?;
                if decision == Decision::Reflect {
                    pending.extend(self.cfg.reflection_tokens.iter().map(String::as_str));
                }
            }
        }
        if let Some(group) = seg.finish() {
            self.close_step(&mut state, &mut trace, group)?;
        }
        trace.final_state = state;
        Ok(trace)
    }

    fn close_step(
        &self,
        state: &mut SscState,
        trace: &mut GenerationTrace,
        group: StepGroup,
    ) -> Result<Decision> {
        let dists: Vec<TokenDistribution> =
            trace.tokens[group.range()].iter().map(|t| t.dist.clone()).collect();
        let conf = crate::confidence::group_confidence(&dists, StepGroup::new(0, group.len() - 1)?)?;
        let (next, decision) = ssc_step(state, conf, &self.cfg)?;
        *state = next;
        trace.steps.push(group);
        trace.step_confidences.push(conf);
        trace.decisions.push(decision);
        trace.tau_history.push(state.tau);
        Ok(decision)
    }
}
