//! JSONL ingestion and output.
//!
//! Pools come from a records file, one trajectory per line. Confidences can be
//! given directly or derived from a companion stream of per-token top-k
//! log-probabilities. Pools are grouped by `question_id` in order of first
//! appearance; trajectories keep file order.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::confidence::{
    trajectory_confidence, GeneratedToken, GroupChoice, StepStrategy, TokenDistribution, TokenLogprob, Trajectory,
};
use crate::error::{Error, Result};
use crate::voting::ConfidencePool;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub question_id: String,
    pub trajectory_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    /// Raw response text; only read when answers are extracted from `\boxed{}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_confidences: Option<Vec<f64>>,
    #[serde(default)]
    pub token_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
}

impl TrajectoryRecord {
    pub fn from_trajectory(question_id: &str, t: &Trajectory) -> Self {
        Self {
            question_id: question_id.to_string(),
            trajectory_id: t.id.clone(),
            answer: Some(t.answer.clone()),
            text: None,
            confidence: Some(t.confidence),
            step_confidences: t.step_confidences.clone(),
            token_count: t.token_count,
            correct: t.correct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogprobStreamRecord {
    pub question_id: String,
    pub trajectory_id: String,
    pub position: usize,
    pub chosen_token: String,
    pub topk: Vec<TokenLogprob>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub question_id: String,
    pub answer: String,
}

/// A step-confidence trace for replaying the reflection controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTraceRecord {
    #[serde(default, alias = "trajectory_id", skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub step_confidences: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadOptions {
    /// Companion logprob stream.
    pub stream: Option<PathBuf>,
    pub strategy: StepStrategy,
    pub group_choice: GroupChoice,
    /// Take the answer from the last `\boxed{...}` in the record text.
    pub extract_boxed: bool,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parse every non-blank line of a JSONL file, keeping 1-based line numbers.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| parse_error(path, i + 1, e.to_string()))?;
        out.push((i + 1, value));
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize, W: Write>(items: impl IntoIterator<Item = T>, mut out: W) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, &item)?;
        out.write_all(b"\n").map_err(|e| Error::Io {
            path: "<output>".into(),
            source: e,
        })?;
    }
    Ok(())
}

/// Content of the last balanced `\boxed{...}` span.
pub fn extract_boxed(text: &str) -> Option<String> {
    const OPEN: &str = "\\boxed{";
    let mut found = None;
    for (start, _) in text.match_indices(OPEN) {
        let body = &text[start + OPEN.len()..];
        let mut depth = 1usize;
        for (i, ch) in body.char_indices() {
            match ch {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        found = Some(body[..i].trim().to_string());
                        break;
                    }
                }
                _ => {}
            }
        }
    }
    found
}

/// Tokens per `(question_id, trajectory_id)`, in stream order.
type StreamTokens = IndexMap<(String, String), Vec<GeneratedToken>>;

pub fn load_stream(path: &Path) -> Result<StreamTokens> {
    let mut tokens: StreamTokens = IndexMap::new();
    for (line, rec) in read_jsonl::<LogprobStreamRecord>(path)? {
        if rec.topk.windows(2).any(|w| w[1].logprob > w[0].logprob) {
            return Err(parse_error(path, line, "topk entries must be sorted by descending logprob"));
        }
        let dist = TokenDistribution::new(rec.topk).map_err(|e| parse_error(path, line, e.to_string()))?;
        let seq = tokens.entry((rec.question_id, rec.trajectory_id.clone())).or_default();
        if rec.position != seq.len() {
            return Err(parse_error(
                path,
                line,
                format!(
                    "trajectory {:?}: expected position {}, found {}",
                    rec.trajectory_id,
                    seq.len(),
                    rec.position
                ),
            ));
        }
        seq.push(GeneratedToken::new(rec.chosen_token, dist));
    }
    Ok(tokens)
}

fn record_to_trajectory(
    path: &Path,
    line: usize,
    rec: TrajectoryRecord,
    stream: Option<&mut StreamTokens>,
    opts: &LoadOptions,
) -> Result<Trajectory> {
    let tokens = stream.and_then(|s| s.shift_remove(&(rec.question_id.clone(), rec.trajectory_id.clone())));
    let answer = match (&rec.answer, opts.extract_boxed) {
        (_, true) => {
            let text = rec
                .text
                .clone()
                .or_else(|| tokens.as_ref().map(|ts| ts.iter().map(|t| t.text.as_str()).collect()));
            let text = text.ok_or_else(|| parse_error(path, line, "no text to extract a boxed answer from"))?;
            extract_boxed(&text).ok_or_else(|| parse_error(path, line, "no \\boxed{...} answer in text"))?
        }
        (Some(a), false) => a.clone(),
        (None, false) => return Err(parse_error(path, line, "missing field `answer`")),
    };

    let mut step_confidences = rec.step_confidences;
    let mut token_count = rec.token_count;
    let confidence = match (rec.confidence, tokens) {
        (Some(c), _) => c,
        (None, Some(tokens)) => {
            let tc = trajectory_confidence(&tokens, &opts.strategy, opts.group_choice.clone())
                .map_err(|e| parse_error(path, line, format!("trajectory {:?}: {e}", rec.trajectory_id)))?;
            step_confidences.get_or_insert(tc.step_confidences);
            if token_count == 0 {
                token_count = tc.token_count;
            }
            tc.confidence
        }
        (None, None) => {
            return Err(parse_error(
                path,
                line,
                format!("trajectory {:?} has no confidence and no logprob stream", rec.trajectory_id),
            ))
        }
    };
    let t = Trajectory {
        id: rec.trajectory_id,
        answer,
        confidence,
        step_confidences,
        token_count,
        correct: rec.correct,
    };
    t.validate().map_err(|e| parse_error(path, line, e.to_string()))?;
    Ok(t)
}

/// Load pools from a records file, grouped by question in order of first appearance.
pub fn load_pools(path: &Path, opts: &LoadOptions) -> Result<Vec<ConfidencePool>> {
    opts.strategy.validate()?;
    let mut stream = opts.stream.as_deref().map(load_stream).transpose()?;
    let mut grouped: IndexMap<String, Vec<Trajectory>> = IndexMap::new();
    for (line, rec) in read_jsonl::<TrajectoryRecord>(path)? {
        let qid = rec.question_id.clone();
        let t = record_to_trajectory(path, line, rec, stream.as_mut(), opts)?;
        grouped.entry(qid).or_default().push(t);
    }
    grouped
        .into_iter()
        .map(|(qid, ts)| ConfidencePool::new(qid, ts))
        .collect()
}

pub fn write_pools<W: Write>(pools: &[ConfidencePool], out: W) -> Result<()> {
    write_jsonl(
        pools
            .iter()
            .flat_map(|p| p.trajectories.iter().map(|t| TrajectoryRecord::from_trajectory(&p.question_id, t))),
        out,
    )
}

pub fn write_pools_file(pools: &[ConfidencePool], path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut w = std::io::BufWriter::new(f);
    write_pools(pools, &mut w)?;
    w.flush().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Ground-truth answers keyed by question.
pub fn load_ground_truth(path: &Path) -> Result<IndexMap<String, String>> {
    let mut gt = IndexMap::new();
    for (line, rec) in read_jsonl::<GroundTruthRecord>(path)? {
        if gt.insert(rec.question_id.clone(), rec.answer).is_some() {
            return Err(parse_error(path, line, format!("duplicate question {:?}", rec.question_id)));
        }
    }
    Ok(gt)
}

pub fn load_step_traces(path: &Path) -> Result<Vec<StepTraceRecord>> {
    Ok(read_jsonl(path)?.into_iter().map(|(_, r)| r).collect())
}
