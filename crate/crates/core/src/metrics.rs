//! Evaluation over labeled pools.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Split;
use crate::voting::{distri_vote_detailed, ConfidencePool, VotingConfig};

/// Fraction of trajectories whose answer is `gt`.
pub fn pool_accuracy(pool: &ConfidencePool, gt: &str) -> Result<f64> {
    if pool.is_empty() {
        return Err(Error::invalid("accuracy of an empty pool"));
    }
    let hits = pool.trajectories.iter().filter(|t| t.answer == gt).count();
    Ok(hits as f64 / pool.budget() as f64)
}

/// Mean over the pool of `confidence * [answer == gt]`.
pub fn weighted_accuracy(pool: &ConfidencePool, gt: &str) -> Result<f64> {
    if pool.is_empty() {
        return Err(Error::invalid("weighted accuracy of an empty pool"));
    }
    let mass: f64 = pool
        .trajectories
        .iter()
        .filter(|t| t.answer == gt)
        .map(|t| t.confidence)
        .sum();
    Ok(mass / pool.budget() as f64)
}

/// Area under the ROC curve via the Mann-Whitney rank statistic with midranks for ties.
pub fn auroc(confs: &[f64], labels: &[bool]) -> Result<f64> {
    if confs.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} scores but {} labels",
            confs.len(),
            labels.len()
        )));
    }
    if let Some(c) = confs.iter().find(|c| c.is_nan()) {
        return Err(Error::invalid(format!("score {c} is not a number")));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(
            "AUROC needs at least one positive and one negative label".into(),
        ));
    }

    let mut order: Vec<usize> = (0..confs.len()).collect();
    order.sort_by(|&a, &b| confs[a].total_cmp(&confs[b]));
    // twice the positive rank sum, kept integral so the result is exact up to the final division
    let mut rank_sum_x2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && confs[order[j + 1]] == confs[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share the midrank (i + j + 2) / 2
        let positives = order[i..=j].iter().filter(|&&k| labels[k]).count() as u128;
        rank_sum_x2 += positives * (i + j + 2) as u128;
        i = j + 1;
    }
    let (p, n) = (n_pos as u128, n_neg as u128);
    // U * 2 = rank_sum_x2 - p(p+1)
    let u_x2 = rank_sum_x2 - p * (p + 1);
    Ok(u_x2 as f64 / (2 * p * n) as f64)
}

/// Fraction of samples whose side in `split` agrees with its label.
pub fn prediction_accuracy(split: &Split, labels: &[bool]) -> Result<f64> {
    if split.len() != labels.len() {
        return Err(Error::invalid(format!(
            "split covers {} samples but {} labels given",
            split.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::invalid("prediction accuracy of an empty split"));
    }
    let flags = split.flags();
    let agree = flags.iter().zip(labels).filter(|(f, l)| f == l).count();
    Ok(agree as f64 / labels.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolMetrics {
    pub acc: f64,
    pub wacc: f64,
    /// Undefined when every trajectory is right, or every one is wrong.
    pub auroc: Option<f64>,
    pub n: usize,
}

impl PoolMetrics {
    pub fn of(pool: &ConfidencePool, gt: &str) -> Result<Self> {
        let labels: Vec<bool> = pool.trajectories.iter().map(|t| t.answer == gt).collect();
        let auroc = match auroc(&pool.confidences(), &labels) {
            Ok(a) => Some(a),
            Err(Error::UndefinedMetric(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            acc: pool_accuracy(pool, gt)?,
            wacc: weighted_accuracy(pool, gt)?,
            auroc,
            n: pool.budget(),
        })
    }
}

/// Pool quality before filtering, after the first split, and after rejection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub question_id: String,
    pub stage1: PoolMetrics,
    pub stage2: PoolMetrics,
    pub stage3: PoolMetrics,
    /// Agreement of the first split with correctness labels.
    pub predict_acc: Option<f64>,
    pub voted: String,
    pub voted_correct: bool,
}

pub fn stage_report(pool: &ConfidencePool, gt: &str, cfg: &VotingConfig, seed: u64) -> Result<StageReport> {
    let out = distri_vote_detailed(pool, cfg, seed)?;
    let stage1 = PoolMetrics::of(pool, gt)?;
    let (stage2, predict_acc) = match &out.stage_split {
        Some(s) => {
            let labels: Vec<bool> = pool.trajectories.iter().map(|t| t.answer == gt).collect();
            (PoolMetrics::of(&s.pos, gt)?, Some(prediction_accuracy(&s.split, &labels)?))
        }
        None => (stage1.clone(), None),
    };
    let stage3 = match &out.reject {
        Some(r) => PoolMetrics::of(&r.pool, gt)?,
        None => stage2.clone(),
    };
    Ok(StageReport {
        question_id: pool.question_id.clone(),
        stage1,
        stage2,
        stage3,
        predict_acc,
        voted_correct: out.result.answer == gt,
        voted: out.result.answer,
    })
}
