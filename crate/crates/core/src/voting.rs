//! Answer selection over a pool of trajectories.
//!
//! [`distri_vote`] runs the full pipeline: split the pool's confidences into
//! positive/negative parts, use the negative part to name one answer to
//! reject, re-split what is left, then vote hierarchically over the final
//! positive pool. The classic baselines live in [`baseline_vote`].
//!
//! Ties are always resolved in favour of the answer seen first.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::confidence::Trajectory;
use crate::error::{Error, Result};
use crate::partition::{partition, GmmFit, PartitionMethod, Split};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidencePool {
    pub question_id: String,
    pub trajectories: Vec<Trajectory>,
}

impl ConfidencePool {
    pub fn new(question_id: impl Into<String>, trajectories: Vec<Trajectory>) -> Result<Self> {
        let question_id = question_id.into();
        if trajectories.is_empty() {
            return Err(Error::invalid(format!("pool {question_id:?} is empty")));
        }
        for t in &trajectories {
            t.validate()?;
        }
        Ok(Self {
            question_id,
            trajectories,
        })
    }

    pub fn budget(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn answers(&self) -> Vec<&str> {
        self.trajectories.iter().map(|t| t.answer.as_str()).collect()
    }

    pub fn confidences(&self) -> Vec<f64> {
        self.trajectories.iter().map(|t| t.confidence).collect()
    }

    /// Sub-pool of the given indices, in the order given. May be empty.
    pub fn select(&self, indices: &[usize]) -> ConfidencePool {
        ConfidencePool {
            question_id: self.question_id.clone(),
            trajectories: indices.iter().map(|&i| self.trajectories[i].clone()).collect(),
        }
    }

    fn retain(&self, keep: impl Fn(&Trajectory) -> bool) -> ConfidencePool {
        ConfidencePool {
            question_id: self.question_id.clone(),
            trajectories: self.trajectories.iter().filter(|t| keep(t)).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteResult {
    pub answer: String,
    pub score: f64,
    /// Accumulated weight per answer, in first-seen order.
    pub tally: IndexMap<String, f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum Stage {
    /// Pool of one: its answer is returned directly.
    Single,
    Partition {
        method: String,
        pos: usize,
        neg: usize,
    },
    Reject {
        a_pos: String,
        a_neg: Option<String>,
        /// Trajectories dropped for carrying `a_neg`.
        removed: usize,
        refit: bool,
        kept: usize,
    },
    TopFraction {
        eta: f64,
        kept: usize,
    },
    Vote {
        scheme: VoteScheme,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intervals_used: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteScheme {
    #[default]
    Hier,
    WeightedMajority,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VotingConfig {
    pub n_intervals: usize,
    pub reject_enabled: bool,
    pub hier_enabled: bool,
    pub partition: PartitionMethod,
    /// Scheme used to name the rejected answer from the negative pool.
    pub neg_scheme: VoteScheme,
}

impl Default for VotingConfig {
    fn default() -> Self {
        Self {
            n_intervals: 10,
            reject_enabled: true,
            hier_enabled: true,
            partition: PartitionMethod::Gmm,
            neg_scheme: VoteScheme::Hier,
        }
    }
}

impl VotingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_intervals == 0 {
            return Err(Error::invalid("number of confidence intervals must be >= 1"));
        }
        Ok(())
    }

    fn base_scheme(&self) -> VoteScheme {
        if self.hier_enabled {
            VoteScheme::Hier
        } else {
            VoteScheme::WeightedMajority
        }
    }

    /// Short label: `dis`, plus any non-default settings in brackets.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.partition != PartitionMethod::Gmm {
            parts.push(self.partition.to_string());
        }
        if !self.reject_enabled {
            parts.push("no-reject".to_string());
        }
        if !self.hier_enabled {
            parts.push("no-hier".to_string());
        }
        if self.n_intervals != 10 {
            parts.push(format!("nc={}", self.n_intervals));
        }
        if self.neg_scheme != VoteScheme::Hier {
            parts.push("neg=wmaj".to_string());
        }
        if parts.is_empty() {
            "dis".to_string()
        } else {
            format!("dis[{}]", parts.join(","))
        }
    }
}

fn check_lengths(n_answers: usize, n_weights: usize) -> Result<()> {
    if n_answers == 0 {
        return Err(Error::invalid("cannot vote over zero answers"));
    }
    if n_answers != n_weights {
        return Err(Error::invalid(format!(
            "{n_answers} answers but {n_weights} weights"
        )));
    }
    Ok(())
}

fn tally_of<S: AsRef<str>>(answers: &[S], weights: &[f64]) -> IndexMap<String, f64> {
    let mut tally: IndexMap<String, f64> = IndexMap::new();
    for (a, &w) in answers.iter().zip(weights) {
        *tally.entry(a.as_ref().to_string()).or_insert(0.0) += w;
    }
    tally
}

fn argmax(tally: &IndexMap<String, f64>) -> (String, f64) {
    let mut best: Option<(&String, f64)> = None;
    for (a, &s) in tally {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((a, s));
        }
    }
    let (a, s) = best.expect("tally is non-empty");
    (a.clone(), s)
}

/// Sum weights per answer and return the heaviest answer.
pub fn weighted_majority<S: AsRef<str>>(answers: &[S], weights: &[f64]) -> Result<VoteResult> {
    check_lengths(answers.len(), weights.len())?;
    if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
        return Err(Error::invalid(format!("non-finite vote weight {w}")));
    }
    let tally = tally_of(answers, weights);
    let (answer, score) = argmax(&tally);
    Ok(VoteResult {
        answer,
        score,
        tally,
        provenance: Provenance {
            method: "wmaj".into(),
            stages: vec![Stage::Vote {
                scheme: VoteScheme::WeightedMajority,
                n: answers.len(),
                intervals_used: None,
            }],
        },
    })
}

/// Interval index (0-based) of each confidence: interval `i` covers
/// `(c_min + i*h, c_min + (i+1)*h]`, the first one also includes `c_min`.
pub fn interval_indices(confs: &[f64], n_intervals: usize) -> Vec<usize> {
    let lo = confs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = confs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let h = (hi - lo) / n_intervals as f64;
    if !(h > 0.0) {
        return vec![0; confs.len()];
    }
    confs
        .iter()
        .map(|&c| {
            (1..=n_intervals)
                .find(|&i| c <= lo + i as f64 * h)
                .unwrap_or(n_intervals)
                - 1
        })
        .collect()
}

/// Hierarchical vote with separate interval axis and vote weights.
///
/// Intervals are laid out on `confs`; inside each non-empty interval the
/// answer with the largest summed `weights` wins, and interval winners are
/// then combined by weighted majority using the mean weight of the winner's
/// trajectories in that interval.
pub fn hier_vote_weighted<S: AsRef<str>>(
    answers: &[S],
    confs: &[f64],
    weights: &[f64],
    n_intervals: usize,
) -> Result<VoteResult> {
    check_lengths(answers.len(), confs.len())?;
    check_lengths(answers.len(), weights.len())?;
    if n_intervals == 0 {
        return Err(Error::invalid("number of confidence intervals must be >= 1"));
    }
    if let Some(c) = confs.iter().chain(weights).find(|c| !c.is_finite()) {
        return Err(Error::invalid(format!("non-finite confidence or weight {c}")));
    }
    let idx = interval_indices(confs, n_intervals);
    let mut sub_answers: Vec<String> = Vec::new();
    let mut sub_weights: Vec<f64> = Vec::new();
    for interval in 0..n_intervals {
        let members: Vec<usize> = (0..answers.len()).filter(|&i| idx[i] == interval).collect();
        if members.is_empty() {
            continue;
        }
        let ans: Vec<&str> = members.iter().map(|&i| answers[i].as_ref()).collect();
        let ws: Vec<f64> = members.iter().map(|&i| weights[i]).collect();
        let (winner, _) = argmax(&tally_of(&ans, &ws));
        let matching: Vec<f64> = members
            .iter()
            .filter(|&&i| answers[i].as_ref() == winner)
            .map(|&i| weights[i])
            .collect();
        sub_weights.push(matching.iter().sum::<f64>() / matching.len() as f64);
        sub_answers.push(winner);
    }
    let tally = tally_of(&sub_answers, &sub_weights);
    let (answer, score) = argmax(&tally);
    Ok(VoteResult {
        answer,
        score,
        tally,
        provenance: Provenance {
            method: "hier".into(),
            stages: vec![Stage::Vote {
                scheme: VoteScheme::Hier,
                n: answers.len(),
                intervals_used: Some(sub_answers.len()),
            }],
        },
    })
}

/// Hierarchical vote using the confidences as weights.
pub fn hier_vote<S: AsRef<str>>(answers: &[S], confs: &[f64], n_intervals: usize) -> Result<VoteResult> {
    hier_vote_weighted(answers, confs, confs, n_intervals)
}

fn vote_with(scheme: VoteScheme, pool: &ConfidencePool, negate: bool, n_intervals: usize) -> Result<VoteResult> {
    let answers = pool.answers();
    let confs = pool.confidences();
    let weights: Vec<f64> = if negate {
        confs.iter().map(|c| -c).collect()
    } else {
        confs.clone()
    };
    match scheme {
        VoteScheme::Hier => hier_vote_weighted(&answers, &confs, &weights, n_intervals),
        VoteScheme::WeightedMajority => weighted_majority(&answers, &weights),
    }
}

/// Output of the first filtering stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSplit {
    pub pos: ConfidencePool,
    pub neg: ConfidencePool,
    pub split: Split,
    pub fit: Option<GmmFit>,
}

/// Split `pool` by its confidences. Order inside each side follows the pool.
pub fn gmm_stage(pool: &ConfidencePool, method: &PartitionMethod, seed: u64) -> Result<StageSplit> {
    if pool.is_empty() {
        return Err(Error::invalid("cannot split an empty pool"));
    }
    let (split, fit) = if pool.budget() == 1 {
        (
            Split {
                pos: vec![0],
                neg: vec![],
                method: method.clone(),
            },
            None,
        )
    } else {
        let (mut split, fit) = partition(&pool.confidences(), method, seed)?;
        if split.pos.is_empty() {
            // a degenerate fit can leave nothing positive; keep the whole pool instead
            split.pos = (0..pool.budget()).collect();
            split.neg.clear();
        }
        (split, fit)
    };
    Ok(StageSplit {
        pos: pool.select(&split.pos),
        neg: pool.select(&split.neg),
        split,
        fit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectOutcome {
    pub pool: ConfidencePool,
    pub a_pos: String,
    pub a_neg: Option<String>,
    pub removed: usize,
    pub refit: Option<Split>,
}

impl RejectOutcome {
    fn stage(&self) -> Stage {
        Stage::Reject {
            a_pos: self.a_pos.clone(),
            a_neg: self.a_neg.clone(),
            removed: self.removed,
            refit: self.refit.is_some(),
            kept: self.pool.budget(),
        }
    }
}

/// Name the most likely wrong answer from the negative side and purge it.
///
/// The negative pool is voted with negated confidences; if that answer
/// differs from the positive pool's answer, every trajectory carrying it is
/// removed from the full pool and the remainder is split again.
pub fn reject_filter(
    pool: &ConfidencePool,
    pos: &ConfidencePool,
    neg: &ConfidencePool,
    cfg: &VotingConfig,
    seed: u64,
) -> Result<RejectOutcome> {
    if pos.is_empty() {
        return Err(Error::invalid("reject filter needs a non-empty positive pool"));
    }
    let a_pos = vote_with(cfg.base_scheme(), pos, false, cfg.n_intervals)?.answer;
    let unchanged = |a_neg: Option<String>| RejectOutcome {
        pool: pos.clone(),
        a_pos: a_pos.clone(),
        a_neg,
        removed: 0,
        refit: None,
    };
    if neg.is_empty() {
        return Ok(unchanged(None));
    }
    let a_neg = vote_with(cfg.neg_scheme, neg, true, cfg.n_intervals)?.answer;
    if a_neg == a_pos {
        return Ok(unchanged(Some(a_neg)));
    }
    let remainder = pool.retain(|t| t.answer != a_neg);
    let removed = pool.budget() - remainder.budget();
    if remainder.budget() < 2 {
        return Ok(RejectOutcome {
            pool: remainder,
            a_pos,
            a_neg: Some(a_neg),
            removed,
            refit: None,
        });
    }
    let refit = gmm_stage(&remainder, &cfg.partition, seed)?;
    Ok(RejectOutcome {
        pool: refit.pos,
        a_pos,
        a_neg: Some(a_neg),
        removed,
        refit: Some(refit.split),
    })
}

/// Every intermediate pool of one [`distri_vote`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct DistriOutcome {
    pub result: VoteResult,
    pub stage_split: Option<StageSplit>,
    pub reject: Option<RejectOutcome>,
    /// Pool the final vote ran on.
    pub final_pool: ConfidencePool,
}

pub fn distri_vote_detailed(pool: &ConfidencePool, cfg: &VotingConfig, seed: u64) -> Result<DistriOutcome> {
    cfg.validate()?;
    if pool.is_empty() {
        return Err(Error::invalid("cannot vote over an empty pool"));
    }
    let method = cfg.label();
    if pool.budget() == 1 {
        let t = &pool.trajectories[0];
        let mut tally = IndexMap::new();
        tally.insert(t.answer.clone(), t.confidence);
        return Ok(DistriOutcome {
            result: VoteResult {
                answer: t.answer.clone(),
                score: t.confidence,
                tally,
                provenance: Provenance {
                    method,
                    stages: vec![Stage::Single],
                },
            },
            stage_split: None,
            reject: None,
            final_pool: pool.clone(),
        });
    }

    let mut stages = Vec::new();
    let split = gmm_stage(pool, &cfg.partition, seed)?;
    stages.push(Stage::Partition {
        method: cfg.partition.to_string(),
        pos: split.pos.budget(),
        neg: split.neg.budget(),
    });
    let reject = if cfg.reject_enabled {
        let r = reject_filter(pool, &split.pos, &split.neg, cfg, seed)?;
        stages.push(r.stage());
        Some(r)
    } else {
        None
    };
    let final_pool = reject.as_ref().map_or(&split.pos, |r| &r.pool).clone();
    let mut result = vote_with(cfg.base_scheme(), &final_pool, false, cfg.n_intervals)?;
    stages.append(&mut result.provenance.stages);
    result.provenance = Provenance { method, stages };
    Ok(DistriOutcome {
        result,
        stage_split: Some(split),
        reject,
        final_pool,
    })
}

/// Split, reject, then vote over what is left.
pub fn distri_vote(pool: &ConfidencePool, cfg: &VotingConfig, seed: u64) -> Result<VoteResult> {
    Ok(distri_vote_detailed(pool, cfg, seed)?.result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Baseline {
    /// Plain majority.
    SelfConsistency,
    /// Confidence-weighted majority.
    WeightedSelfConsistency,
    /// The single most confident trajectory.
    BestOfN,
    /// Weighted majority over the top `eta` fraction by confidence.
    TopFractionWeighted { eta: f64 },
}

impl std::fmt::Display for Baseline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Baseline::SelfConsistency => write!(f, "sc"),
            Baseline::WeightedSelfConsistency => write!(f, "wsc"),
            Baseline::BestOfN => write!(f, "bon"),
            Baseline::TopFractionWeighted { eta } => write!(f, "top:{eta}"),
        }
    }
}

pub fn baseline_vote(pool: &ConfidencePool, method: Baseline) -> Result<VoteResult> {
    if pool.is_empty() {
        return Err(Error::invalid("cannot vote over an empty pool"));
    }
    let answers = pool.answers();
    let confs = pool.confidences();
    let mut result = match method {
        Baseline::SelfConsistency => weighted_majority(&answers, &vec![1.0; answers.len()])?,
        Baseline::WeightedSelfConsistency => weighted_majority(&answers, &confs)?,
        Baseline::BestOfN => {
            let mut best = 0;
            for (i, &c) in confs.iter().enumerate() {
                if c > confs[best] {
                    best = i;
                }
            }
            weighted_majority(&answers[best..=best], &confs[best..=best])?
        }
        Baseline::TopFractionWeighted { eta } => {
            let split = crate::partition::top_fraction_split(&confs, eta)?;
            let kept = pool.select(&split.pos);
            let mut r = weighted_majority(&kept.answers(), &kept.confidences())?;
            r.provenance.stages.insert(
                0,
                Stage::TopFraction {
                    eta,
                    kept: kept.budget(),
                },
            );
            r
        }
    };
    result.provenance.method = method.to_string();
    Ok(result)
}

/// Any answer-selection method, as named on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VoteMethod {
    Baseline(Baseline),
    Distri(VotingConfig),
}

impl VoteMethod {
    pub fn label(&self) -> String {
        match self {
            VoteMethod::Baseline(b) => b.to_string(),
            VoteMethod::Distri(cfg) => cfg.label(),
        }
    }

    pub fn vote(&self, pool: &ConfidencePool, seed: u64) -> Result<VoteResult> {
        match self {
            VoteMethod::Baseline(b) => baseline_vote(pool, *b),
            VoteMethod::Distri(cfg) => distri_vote(pool, cfg, seed),
        }
    }

    /// Whether the method only sees confidence through a monotone score
    /// (false only for plain majority).
    pub fn uses_confidence(&self) -> bool {
        !matches!(self, VoteMethod::Baseline(Baseline::SelfConsistency))
    }
}

impl std::str::FromStr for VoteMethod {
    type Err = Error;

    /// `sc`, `wsc`, `bon`, `top:<eta>` or `dis` (default pipeline settings).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sc" => Ok(VoteMethod::Baseline(Baseline::SelfConsistency)),
            "wsc" => Ok(VoteMethod::Baseline(Baseline::WeightedSelfConsistency)),
            "bon" => Ok(VoteMethod::Baseline(Baseline::BestOfN)),
            "dis" => Ok(VoteMethod::Distri(VotingConfig::default())),
            _ => match s.strip_prefix("top:") {
                Some(eta) => {
                    let eta: f64 = eta
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad fraction in method {s:?}")))?;
                    if !(eta > 0.0 && eta <= 1.0) {
                        return Err(Error::invalid(format!("top fraction must be in (0,1], got {eta}")));
                    }
                    Ok(VoteMethod::Baseline(Baseline::TopFractionWeighted { eta }))
                }
                None => Err(Error::invalid(format!(
                    "unknown vote method {s:?}; expected sc, wsc, bon, top:<eta> or dis"
                ))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(items: &[(&str, f64)]) -> ConfidencePool {
        ConfidencePool::new(
            "q",
            items
                .iter()
                .enumerate()
                .map(|(i, (a, c))| Trajectory::new(format!("t{i}"), *a, *c).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn weighted_majority_examples() {
        let r = weighted_majority(&["A", "B", "B"], &[2.0, 1.5, 1.0]).unwrap();
        assert_eq!(r.answer, "B");
        assert_eq!(r.score, 2.5);
        assert_eq!(r.tally["A"], 2.0);

        assert_eq!(weighted_majority(&["Z"], &[0.3]).unwrap().answer, "Z");
        assert_eq!(weighted_majority(&["A", "B"], &[1.0, 1.0]).unwrap().answer, "A");
        assert_eq!(weighted_majority(&["B", "A"], &[1.0, 1.0]).unwrap().answer, "B");
    }

    #[test]
    fn weighted_majority_errors() {
        assert!(weighted_majority::<&str>(&[], &[]).is_err());
        assert!(weighted_majority(&["A"], &[1.0, 2.0]).is_err());
        assert!(weighted_majority(&["A"], &[f64::NAN]).is_err());
    }

    #[test]
    fn weighted_majority_negative_weights_pick_lightest() {
        // three low-confidence B's outweigh a single A once negated
        let r = weighted_majority(&["A", "B", "B", "B"], &[-2.0, -1.0, -1.0, -1.0]).unwrap();
        assert_eq!(r.answer, "A");
    }

    #[test]
    fn hier_vote_two_intervals() {
        let r = hier_vote(&["A", "A", "B", "B"], &[1.0, 2.0, 9.0, 10.0], 2).unwrap();
        assert_eq!(r.answer, "B");
        assert!((r.tally["A"] - 1.5).abs() < 1e-12);
        assert!((r.tally["B"] - 9.5).abs() < 1e-12);
    }

    #[test]
    fn hier_vote_single_interval_is_weighted_majority() {
        let answers = ["A", "B", "B", "C", "A"];
        let confs = [3.0, 1.0, 1.5, 0.2, 0.1];
        let h = hier_vote(&answers, &confs, 1).unwrap();
        let w = weighted_majority(&answers, &confs).unwrap();
        assert_eq!(h.answer, w.answer);
    }

    #[test]
    fn hier_vote_equal_confidences() {
        let answers = ["A", "B", "B"];
        let confs = [2.0; 3];
        let h = hier_vote(&answers, &confs, 10).unwrap();
        assert_eq!(h.answer, "B");
        assert_eq!(interval_indices(&confs, 10), vec![0, 0, 0]);
    }

    #[test]
    fn interval_membership() {
        // h = 2.5: (0, 2.5], (2.5, 5], (5, 7.5], (7.5, 10], with 0 in the first
        let idx = interval_indices(&[0.0, 2.5, 2.6, 5.0, 7.5, 10.0], 4);
        assert_eq!(idx, vec![0, 0, 1, 1, 2, 3]);
    }

    #[test]
    fn hier_vote_mean_weight_counts_only_winner() {
        // one interval: A wins with 3+3, B has 5; interval weight is mean of A's = 3
        let r = hier_vote(&["A", "A", "B"], &[3.0, 3.0, 5.0], 1).unwrap();
        assert_eq!(r.answer, "A");
        assert_eq!(r.score, 3.0);
    }

    #[test]
    fn gmm_stage_cases() {
        let p = pool(&[("A", 9.0), ("B", 1.0), ("A", 9.2), ("B", 1.1), ("C", 0.9), ("A", 8.9)]);
        let s = gmm_stage(&p, &PartitionMethod::Gmm, 0).unwrap();
        assert_eq!(s.pos.answers(), vec!["A", "A", "A"]);
        assert_eq!(s.neg.budget(), 3);

        let one = pool(&[("A", 1.0)]);
        let s = gmm_stage(&one, &PartitionMethod::Gmm, 0).unwrap();
        assert_eq!(s.pos, one);
        assert!(s.neg.is_empty());

        let flat = pool(&[("A", 2.0), ("B", 2.0), ("C", 2.0)]);
        let s = gmm_stage(&flat, &PartitionMethod::Gmm, 0).unwrap();
        assert_eq!(s.pos.budget(), 3);
    }

    #[test]
    fn reject_guards_return_pos() {
        let cfg = VotingConfig::default();
        let full = pool(&[("A", 9.0), ("A", 8.0), ("A", 1.0)]);
        let pos = full.select(&[0, 1]);
        let neg = full.select(&[2]);
        let r = reject_filter(&full, &pos, &neg, &cfg, 0).unwrap();
        assert_eq!(r.pool, pos);
        assert_eq!(r.a_neg.as_deref(), Some("A"));
        assert_eq!(r.removed, 0);

        let r = reject_filter(&full, &full, &full.select(&[]), &cfg, 0).unwrap();
        assert_eq!(r.pool, full);
        assert!(r.a_neg.is_none());

        assert!(reject_filter(&full, &full.select(&[]), &neg, &cfg, 0).is_err());
    }

    #[test]
    fn reject_removes_negative_answer() {
        // twelve trajectories: A high, B in both pools at low confidence, C low
        let items = [
            ("A", 9.0), ("A", 9.3), ("A", 8.8), ("B", 8.6), ("A", 9.1), ("C", 2.0),
            ("C", 2.2), ("C", 1.9), ("B", 1.2), ("C", 2.1), ("C", 1.8), ("C", 2.3),
        ];
        let full = pool(&items);
        let cfg = VotingConfig::default();
        let s = gmm_stage(&full, &cfg.partition, 0).unwrap();
        assert_eq!(s.split.pos, vec![0, 1, 2, 3, 4]);
        // negated weights: B's single 1.2 is the least negative mass
        let r = reject_filter(&full, &s.pos, &s.neg, &cfg, 0).unwrap();
        assert_eq!(r.a_pos, "A");
        assert_eq!(r.a_neg.as_deref(), Some("B"));
        assert_eq!(r.removed, 2);
        assert!(r.pool.trajectories.iter().all(|t| t.answer != "B"));
        // oracle: the re-fit on the ten remaining confidences
        let remainder: Vec<f64> = items.iter().filter(|(a, _)| *a != "B").map(|(_, c)| *c).collect();
        let (split, _) = partition(&remainder, &PartitionMethod::Gmm, 0).unwrap();
        assert_eq!(split.pos, vec![0, 1, 2, 3]);
        assert_eq!(r.pool.answers(), vec!["A"; 4]);
    }

    #[test]
    fn reject_small_remainder_is_returned_whole() {
        let full = pool(&[("A", 9.0), ("B", 1.0), ("B", 1.1)]);
        let cfg = VotingConfig::default();
        let pos = full.select(&[0]);
        let neg = full.select(&[1, 2]);
        let r = reject_filter(&full, &pos, &neg, &cfg, 0).unwrap();
        assert_eq!(r.a_neg.as_deref(), Some("B"));
        assert_eq!(r.pool.answers(), vec!["A"]);
        assert!(r.refit.is_none());
    }

    /// 8 A's near 9 and 12 B's near 3, interleaved.
    fn two_cluster_fixture() -> ConfidencePool {
        let a = [9.05, 8.93, 9.12, 8.98, 9.01, 9.15, 8.87, 9.04];
        let b = [3.02, 2.91, 3.11, 2.95, 3.08, 2.99, 3.13, 2.86, 3.04, 2.97, 3.06, 2.92];
        let mut items = Vec::new();
        for i in 0..12 {
            items.push(("B", b[i]));
            if i < 8 {
                items.push(("A", a[i]));
            }
        }
        pool(&items)
    }

    #[test]
    fn distri_vote_beats_majority_on_fixture() {
        let p = two_cluster_fixture();
        let out = distri_vote_detailed(&p, &VotingConfig::default(), 0).unwrap();
        // stage by stage: the split isolates the eight A's, the negative side is
        // all B so B is rejected, and the re-fit on the A's alone keeps them all
        let split = out.stage_split.as_ref().unwrap();
        assert_eq!(split.pos.answers(), vec!["A"; 8]);
        let rej = out.reject.as_ref().unwrap();
        assert_eq!(rej.a_neg.as_deref(), Some("B"));
        assert_eq!(rej.removed, 12);
        assert_eq!(out.result.answer, "A");
        assert_eq!(baseline_vote(&p, Baseline::SelfConsistency).unwrap().answer, "B");
    }

    #[test]
    fn distri_vote_trivial_pools() {
        let p = pool(&[("X", 1.0), ("X", 5.0), ("X", 3.0)]);
        assert_eq!(distri_vote(&p, &VotingConfig::default(), 0).unwrap().answer, "X");
        let one = pool(&[("Y", 0.4)]);
        let r = distri_vote(&one, &VotingConfig::default(), 0).unwrap();
        assert_eq!(r.answer, "Y");
        assert_eq!(r.provenance.stages, vec![Stage::Single]);
    }

    #[test]
    fn distri_vote_provenance_records_stages() {
        let r = distri_vote(&two_cluster_fixture(), &VotingConfig::default(), 0).unwrap();
        assert_eq!(r.provenance.method, "dis");
        assert!(matches!(r.provenance.stages[0], Stage::Partition { pos: 8, neg: 12, .. }));
        assert!(matches!(r.provenance.stages[1], Stage::Reject { .. }));
        assert!(matches!(r.provenance.stages[2], Stage::Vote { scheme: VoteScheme::Hier, .. }));
    }

    #[test]
    fn baseline_examples() {
        let p = pool(&[("A", 1.0), ("A", 1.0), ("B", 5.0)]);
        assert_eq!(baseline_vote(&p, Baseline::SelfConsistency).unwrap().answer, "A");
        assert_eq!(baseline_vote(&p, Baseline::WeightedSelfConsistency).unwrap().answer, "B");
        assert_eq!(baseline_vote(&p, Baseline::BestOfN).unwrap().answer, "B");

        let unanimous = pool(&[("Q", 1.0), ("Q", 3.0)]);
        for b in [
            Baseline::SelfConsistency,
            Baseline::WeightedSelfConsistency,
            Baseline::BestOfN,
            Baseline::TopFractionWeighted { eta: 0.5 },
        ] {
            assert_eq!(baseline_vote(&unanimous, b).unwrap().answer, "Q");
        }

        let q = pool(&[("A", 2.0), ("B", 1.5), ("B", 1.0), ("C", 0.1)]);
        let top = baseline_vote(&q, Baseline::TopFractionWeighted { eta: 1.0 }).unwrap();
        let wsc = baseline_vote(&q, Baseline::WeightedSelfConsistency).unwrap();
        assert_eq!(top.answer, wsc.answer);
        assert_eq!(top.tally, wsc.tally);
    }

    #[test]
    fn bon_ties_take_lowest_index() {
        let p = pool(&[("A", 1.0), ("B", 5.0), ("C", 5.0)]);
        assert_eq!(baseline_vote(&p, Baseline::BestOfN).unwrap().answer, "B");
    }

    #[test]
    fn pool_rejects_empty_and_invalid() {
        assert!(ConfidencePool::new("q", vec![]).is_err());
        let mut t = Trajectory::new("t", "A", 1.0).unwrap();
        t.confidence = -1.0;
        assert!(ConfidencePool::new("q", vec![t]).is_err());
    }

    #[test]
    fn method_parsing_and_labels() {
        for s in ["sc", "wsc", "bon", "top:0.5", "dis"] {
            assert_eq!(s.parse::<VoteMethod>().unwrap().label(), s);
        }
        assert!("top:0".parse::<VoteMethod>().is_err());
        assert!("maj".parse::<VoteMethod>().is_err());
        let cfg = VotingConfig {
            partition: PartitionMethod::TopFraction { eta: 0.5 },
            reject_enabled: false,
            hier_enabled: false,
            ..VotingConfig::default()
        };
        assert_eq!(cfg.label(), "dis[top:0.5,no-reject,no-hier]");
    }
}
