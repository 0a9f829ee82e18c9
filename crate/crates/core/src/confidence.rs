//! Token-, step- and trajectory-level confidence from top-k log-probabilities.
//!
//! Confidence is the negative mean of the logged top-k log-probabilities. When
//! the model concentrates mass on one token the remaining top-k entries are
//! pushed far below zero, so higher values mean a more certain position.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One logged candidate token and its log-probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLogprob {
    pub token: String,
    pub logprob: f64,
}

impl TokenLogprob {
    pub fn new(token: impl Into<String>, logprob: f64) -> Self {
        Self {
            token: token.into(),
            logprob,
        }
    }
}

/// The retained top-k entries of one generated position, sorted by
/// log-probability descending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenDistribution {
    entries: Vec<TokenLogprob>,
}

impl TokenDistribution {
    /// Validates and sorts the entries (stable, descending by log-probability).
    pub fn new(mut entries: Vec<TokenLogprob>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("token distribution has no entries"));
        }
        for e in &entries {
            if !e.logprob.is_finite() && e.logprob != f64::NEG_INFINITY {
                return Err(Error::invalid(format!(
                    "log-probability of {:?} is not a number",
                    e.token
                )));
            }
            if e.logprob > 0.0 {
                return Err(Error::invalid(format!(
                    "log-probability of {:?} is positive ({})",
                    e.token, e.logprob
                )));
            }
            if e.logprob == f64::NEG_INFINITY {
                return Err(Error::invalid(format!(
                    "log-probability of {:?} is -inf",
                    e.token
                )));
            }
        }
        entries.sort_by(|a, b| b.logprob.total_cmp(&a.logprob));
        Ok(Self { entries })
    }

    /// Convenience constructor from `(token, logprob)` pairs.
    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, f64)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(t, lp)| TokenLogprob::new(t, lp))
                .collect(),
        )
    }

    /// Caller guarantees the entries are non-empty, valid and already sorted.
    pub(crate) fn from_sorted_unchecked(entries: Vec<TokenLogprob>) -> Self {
        debug_assert!(!entries.is_empty());
        debug_assert!(entries.windows(2).all(|w| w[0].logprob >= w[1].logprob));
        Self { entries }
    }

    pub fn entries(&self) -> &[TokenLogprob] {
        &self.entries
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }

    pub fn argmax(&self) -> &TokenLogprob {
        &self.entries[0]
    }

    pub fn logprob_of(&self, token: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.token == token)
            .map(|e| e.logprob)
    }

    /// Negative mean log-probability over the retained entries.
    pub fn confidence(&self) -> f64 {
        token_confidence(self)
    }

    /// Shannon entropy (nats) of the top-k entries renormalized to sum to one.
    pub fn topk_entropy(&self) -> f64 {
        let max = self.entries[0].logprob;
        let z: f64 = self.entries.iter().map(|e| (e.logprob - max).exp()).sum();
        let log_z = z.ln() + max;
        -self
            .entries
            .iter()
            .map(|e| {
                let lp = e.logprob - log_z;
                lp.exp() * lp
            })
            .sum::<f64>()
    }
}

impl<'de> Deserialize<'de> for TokenDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            entries: Vec<TokenLogprob>,
        }
        let raw = Raw::deserialize(d)?;
        TokenDistribution::new(raw.entries).map_err(serde::de::Error::custom)
    }
}

/// `-(1/k) * sum_j logprob_j` over the retained entries of one position.
pub fn token_confidence(dist: &TokenDistribution) -> f64 {
    let k = dist.entries.len() as f64;
    let s: f64 = dist.entries.iter().map(|e| e.logprob).sum();
    // -0.0 for the certainty case reads badly in reports
    (-s / k).max(0.0)
}

/// A generated position: the decoded text that was emitted plus its top-k distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedToken {
    pub text: String,
    pub dist: TokenDistribution,
}

impl GeneratedToken {
    pub fn new(text: impl Into<String>, dist: TokenDistribution) -> Self {
        Self {
            text: text.into(),
            dist,
        }
    }
}

/// Inclusive token span `[start, end]` of one reasoning step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepGroup {
    pub start: usize,
    pub end: usize,
}

impl StepGroup {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start > end {
            return Err(Error::invalid(format!(
                "step group start {start} is after end {end}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn range(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }
}

/// How a token stream is cut into reasoning steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepStrategy {
    /// Close a step at the token that completes `delimiter` in the decoded text.
    Delimiter { delimiter: String },
    /// Fixed-size token windows.
    FixedWindow { width: usize },
    /// Close a step at a token whose top-k entropy exceeds `threshold`, once
    /// the step holds at least `min_len` tokens.
    HighEntropy { threshold: f64, min_len: usize },
}

impl StepStrategy {
    pub const DEFAULT_DELIMITER: &'static str = "\n\n";
    pub const DEFAULT_ENTROPY_THRESHOLD: f64 = 0.672;
    pub const DEFAULT_ENTROPY_MIN_LEN: usize = 200;

    /// Reasoning-block split on blank lines.
    pub fn paragraph() -> Self {
        StepStrategy::Delimiter {
            delimiter: Self::DEFAULT_DELIMITER.to_string(),
        }
    }

    /// Sentence/line split on a single newline.
    pub fn sentence() -> Self {
        StepStrategy::Delimiter {
            delimiter: "\n".to_string(),
        }
    }

    pub fn high_entropy() -> Self {
        StepStrategy::HighEntropy {
            threshold: Self::DEFAULT_ENTROPY_THRESHOLD,
            min_len: Self::DEFAULT_ENTROPY_MIN_LEN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StepStrategy::Delimiter { delimiter } if delimiter.is_empty() => {
                Err(Error::invalid("step delimiter is empty"))
            }
            StepStrategy::FixedWindow { width: 0 } => {
                Err(Error::invalid("fixed step window must be positive"))
            }
            StepStrategy::HighEntropy { min_len: 0, .. } => {
                Err(Error::invalid("high-entropy minimum step length must be positive"))
            }
            StepStrategy::HighEntropy { threshold, .. } if !threshold.is_finite() => {
                Err(Error::invalid("high-entropy threshold must be finite"))
            }
            _ => Ok(()),
        }
    }
}

impl Default for StepStrategy {
    fn default() -> Self {
        Self::paragraph()
    }
}

/// Incremental step segmenter: push one token at a time, get a group back
/// whenever a step closes. Used both for offline segmentation and by the live
/// reflection controller.
#[derive(Debug, Clone)]
pub struct StepSegmenter {
    strategy: StepStrategy,
    start: usize,
    next: usize,
    suffix: String,
}

impl StepSegmenter {
    pub fn new(strategy: StepStrategy) -> Result<Self> {
        strategy.validate()?;
        Ok(Self {
            strategy,
            start: 0,
            next: 0,
            suffix: String::new(),
        })
    }

    /// Feed the next token; returns the step closed by it, if any.
    pub fn push(&mut self, text: &str, dist: &TokenDistribution) -> Option<StepGroup> {
        let index = self.next;
        self.next += 1;
        let closes = match &self.strategy {
            StepStrategy::Delimiter { delimiter } => {
                self.suffix.push_str(text);
                if self.suffix.contains(delimiter.as_str()) {
                    true
                } else {
                    // keep a rolling tail long enough to catch a delimiter split across tokens
                    let keep = 2 * delimiter.chars().count();
                    let n = self.suffix.chars().count();
                    if n > keep {
                        let cut = self
                            .suffix
                            .char_indices()
                            .nth(n - keep)
                            .map(|(i, _)| i)
                            .unwrap_or(0);
                        self.suffix.drain(..cut);
                    }
                    false
                }
            }
            StepStrategy::FixedWindow { width } => index + 1 - self.start == *width,
            StepStrategy::HighEntropy { threshold, min_len } => {
                index + 1 - self.start >= *min_len && dist.topk_entropy() > *threshold
            }
        };
        if closes {
            let group = StepGroup {
                start: self.start,
                end: index,
            };
            self.start = index + 1;
            self.suffix.clear();
            Some(group)
        } else {
            None
        }
    }

    /// Close the trailing partial step at end of stream.
    pub fn finish(&mut self) -> Option<StepGroup> {
        if self.next > self.start {
            let group = StepGroup {
                start: self.start,
                end: self.next - 1,
            };
            self.start = self.next;
            self.suffix.clear();
            Some(group)
        } else {
            None
        }
    }

    /// Number of tokens pushed so far.
    pub fn position(&self) -> usize {
        self.next
    }
}

/// Partition a token stream into contiguous steps.
pub fn segment_steps(tokens: &[GeneratedToken], strategy: &StepStrategy) -> Result<Vec<StepGroup>> {
    let mut seg = StepSegmenter::new(strategy.clone())?;
    let mut groups: Vec<StepGroup> = tokens
        .iter()
        .filter_map(|t| seg.push(&t.text, &t.dist))
        .collect();
    groups.extend(seg.finish());
    Ok(groups)
}

/// Confidence of a step: the mean token confidence over the group.
///
/// With a common k this is `-(1/(N_G*k)) * sum_i sum_j logprob_ij`; when k
/// varies per position each token is normalized by its own k.
pub fn group_confidence(tokens: &[TokenDistribution], group: StepGroup) -> Result<f64> {
    if group.start > group.end || group.end >= tokens.len() {
        return Err(Error::invalid(format!(
            "step group [{}..{}] out of range for {} tokens",
            group.start,
            group.end,
            tokens.len()
        )));
    }
    let slice = &tokens[group.start..=group.end];
    let total: f64 = slice.iter().map(token_confidence).sum();
    Ok(total / slice.len() as f64)
}

/// Which steps feed the trajectory-level confidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "steps", rename_all = "snake_case")]
pub enum GroupChoice {
    /// The final step, which carries the answer.
    #[default]
    LastStep,
    /// The final `n` steps pooled by token.
    LastSteps(usize),
    /// Every generated token.
    AllTokens,
}

/// Trajectory confidence plus the per-step confidences it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfidence {
    pub confidence: f64,
    pub step_confidences: Vec<f64>,
    pub groups: Vec<StepGroup>,
    pub token_count: usize,
}

/// Segment `tokens`, score each step, and score the chosen tail as the trajectory confidence.
pub fn trajectory_confidence(
    tokens: &[GeneratedToken],
    strategy: &StepStrategy,
    choice: GroupChoice,
) -> Result<TrajectoryConfidence> {
    if tokens.is_empty() {
        return Err(Error::invalid("cannot score an empty token stream"));
    }
    let groups = segment_steps(tokens, strategy)?;
    let dists: Vec<TokenDistribution> = tokens.iter().map(|t| t.dist.clone()).collect();
    let step_confidences = groups
        .iter()
        .map(|g| group_confidence(&dists, *g))
        .collect::<Result<Vec<_>>>()?;
    let last = groups[groups.len() - 1];
    let tail = match choice {
        GroupChoice::LastStep => last,
        GroupChoice::LastSteps(n) => {
            if n == 0 {
                return Err(Error::invalid("LastSteps needs at least one step"));
            }
            let first = groups[groups.len().saturating_sub(n)];
            StepGroup {
                start: first.start,
                end: last.end,
            }
        }
        GroupChoice::AllTokens => StepGroup {
            start: 0,
            end: tokens.len() - 1,
        },
    };
    Ok(TrajectoryConfidence {
        confidence: group_confidence(&dists, tail)?,
        step_confidences,
        groups,
        token_count: tokens.len(),
    })
}

/// One sampled response to a question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: String,
    pub answer: String,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_confidences: Option<Vec<f64>>,
    #[serde(default)]
    pub token_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
}

impl Trajectory {
    pub fn new(id: impl Into<String>, answer: impl Into<String>, confidence: f64) -> Result<Self> {
        let t = Self {
            id: id.into(),
            answer: answer.into(),
            confidence,
            step_confidences: None,
            token_count: 0,
            correct: None,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn with_correct(mut self, correct: bool) -> Self {
        self.correct = Some(correct);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.confidence.is_finite() && self.confidence >= 0.0) {
            return Err(Error::invalid(format!(
                "trajectory {} has confidence {}, expected a finite value >= 0",
                self.id, self.confidence
            )));
        }
        if let Some(steps) = &self.step_confidences {
            if let Some(bad) = steps.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
                return Err(Error::invalid(format!(
                    "trajectory {} has step confidence {bad}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}
