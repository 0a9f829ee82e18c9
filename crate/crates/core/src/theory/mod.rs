//! Numerical checks of the separation results behind confidence voting.
//!
//! Two facts are exercised here. First, for two normals split at the midpoint
//! of their means, the ratio of right-tail masses
//! `R(delta) = Phi(delta / 2 sigma1) / (1 - Phi(delta / 2 sigma2))` grows
//! strictly with the mean gap `delta`. Second, the probability that the
//! weighted confidence sum of the correct answer beats every incorrect
//! answer's sum is compared with the closed-form normal bound
//! `Phi((delta W_f + mu2 (W_f - W_g)) / sqrt(sigma1^2 W_f2 + sigma2^2 W_g2))`
//! by Monte Carlo.
//!
//! `delta` in this module is always the mean gap between the correct and
//! incorrect confidence distributions, never the reflection trigger ratio.

pub mod normal;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, hash_reals, seeded_rng};
pub use normal::{erf, erfc, normal_cdf, normal_pdf, normal_sf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationSpec {
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl SeparationSpec {
    pub fn new(mu1: f64, mu2: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        let s = Self { mu1, mu2, sigma1, sigma2 };
        s.validate()?;
        Ok(s)
    }

    /// Spec with `mu2 = 0` and `mu1 = delta`.
    pub fn with_gap(delta: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        Self::new(delta, 0.0, sigma1, sigma2)
    }

    pub fn delta(&self) -> f64 {
        self.mu1 - self.mu2
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma1 > 0.0 && self.sigma2 > 0.0) {
            return Err(Error::invalid("standard deviations must be positive"));
        }
        if ![self.mu1, self.mu2, self.sigma1, self.sigma2].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("separation parameters must be finite"));
        }
        Ok(())
    }
}

/// Ratio of the right-tail masses of the two normals beyond the midpoint of their means.
pub fn tail_ratio(spec: &SeparationSpec) -> Result<f64> {
    spec.validate()?;
    let delta = spec.delta();
    Ok(normal_cdf(delta / (2.0 * spec.sigma1)) / normal_sf(delta / (2.0 * spec.sigma2)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub delta: f64,
    pub kind: ViolationKind,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `R` did not increase from the previous grid point (value = the step).
    NotIncreasing,
    /// The central difference at an interior point was not positive.
    NonPositiveSlope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub sigma1: f64,
    pub sigma2: f64,
    pub points: Vec<(f64, f64)>,
    pub violations: Vec<MonotonicityViolation>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluate `R` along `delta_grid` and list every place where it fails to
/// increase or where its central-difference slope is not positive.
pub fn check_tail_monotonicity(sigma1: f64, sigma2: f64, delta_grid: &[f64]) -> Result<MonotonicityReport> {
    if delta_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("delta grid must be strictly ascending"));
    }
    let points = delta_grid
        .iter()
        .map(|&d| Ok((d, tail_ratio(&SeparationSpec::with_gap(d, sigma1, sigma2)?)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    for w in points.windows(2) {
        if !(w[1].1 > w[0].1) {
            violations.push(MonotonicityViolation {
                delta: w[1].0,
                kind: ViolationKind::NotIncreasing,
                value: w[1].1 - w[0].1,
            });
        }
    }
    for w in points.windows(3) {
        let slope = (w[2].1 - w[0].1) / (w[2].0 - w[0].0);
        if !(slope > 0.0) {
            violations.push(MonotonicityViolation {
                delta: w[1].0,
                kind: ViolationKind::NonPositiveSlope,
                value: slope,
            });
        }
    }
    Ok(MonotonicityReport {
        sigma1,
        sigma2,
        points,
        violations,
    })
}

/// Sample weights of the correct answer and of each incorrect answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub correct: Vec<f64>,
    pub incorrect: Vec<Vec<f64>>,
}

impl WeightProfile {
    pub fn new(correct: Vec<f64>, incorrect: Vec<Vec<f64>>) -> Result<Self> {
        let p = Self { correct, incorrect };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.correct.iter().chain(self.incorrect.iter().flatten());
        if let Some(w) = all.into_iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(format!("weights must be finite and >= 0, got {w}")));
        }
        if !(self.correct.iter().sum::<f64>() > 0.0) {
            return Err(Error::invalid("correct-answer weights must have a positive sum"));
        }
        if self.incorrect.is_empty() || self.incorrect.iter().any(|v| v.is_empty()) {
            return Err(Error::invalid("need at least one incorrect answer, each with a sample"));
        }
        Ok(())
    }

    /// Number of incorrect answers.
    pub fn m(&self) -> usize {
        self.incorrect.len()
    }

    /// Total number of samples.
    pub fn n(&self) -> usize {
        self.correct.len() + self.incorrect.iter().map(Vec::len).sum::<usize>()
    }

    fn key(&self) -> Vec<f64> {
        let mut k = self.correct.clone();
        for v in &self.incorrect {
            k.push(f64::NAN);
            k.extend(v);
        }
        k
    }
}

/// Normal-model parameters shared by the bound and the Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoteModel {
    /// Mean confidence of incorrect samples.
    pub mu2: f64,
    /// Mean gap: correct samples have mean `mu2 + delta`.
    pub delta: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl VoteModel {
    pub fn validate(&self) -> Result<()> {
        SeparationSpec::new(self.mu2 + self.delta, self.mu2, self.sigma1, self.sigma2).map(|_| ())
    }
}

fn bound_for(correct: &[f64], incorrect: &[f64], model: &VoteModel) -> Result<f64> {
    let wf: f64 = correct.iter().sum();
    let wf2: f64 = correct.iter().map(|w| w * w).sum();
    let wg: f64 = incorrect.iter().sum();
    let wg2: f64 = incorrect.iter().map(|w| w * w).sum();
    let var = model.sigma1 * model.sigma1 * wf2 + model.sigma2 * model.sigma2 * wg2;
    if !(var > 0.0) {
        return Err(Error::invalid("weight-square sums are both zero"));
    }
    Ok(normal_cdf((model.delta * wf + model.mu2 * (wf - wg)) / var.sqrt()))
}

/// `P(S_f > S_g)` where `S_g` is the weighted sum of incorrect answer `k`
/// (0-based).
pub fn vote_lower_bound(profile: &WeightProfile, model: &VoteModel, k: usize) -> Result<f64> {
    profile.validate()?;
    model.validate()?;
    let incorrect = profile
        .incorrect
        .get(k)
        .ok_or_else(|| Error::invalid(format!("incorrect answer index {k} out of range")))?;
    bound_for(&profile.correct, incorrect, model)
}

/// Minimum of [`vote_lower_bound`] over every incorrect answer.
pub fn min_vote_lower_bound(profile: &WeightProfile, model: &VoteModel) -> Result<f64> {
    (0..profile.m())
        .map(|k| vote_lower_bound(profile, model, k))
        .try_fold(f64::INFINITY, |acc, b| b.map(|b| acc.min(b)))
}

/// `P(S_f > S_g)` with `S_g` pooling the samples of every incorrect answer.
///
/// Whenever every incorrect sum is nonnegative, `S_f > sum_k S_k` implies
/// `S_f > max_k S_k`, so this bounds the vote accuracy from below.
pub fn vote_lower_bound_pooled(profile: &WeightProfile, model: &VoteModel) -> Result<f64> {
    profile.validate()?;
    model.validate()?;
    let pooled: Vec<f64> = profile.incorrect.iter().flatten().copied().collect();
    bound_for(&profile.correct, &pooled, model)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// Binomial standard error, with a half-count continuity adjustment so it
    /// stays positive when the estimate is exactly 0 or 1.
    pub std_error: f64,
    pub n_samples: usize,
}

pub const MC_MIN_SAMPLES: usize = 1000;
const MC_CHUNK: usize = 1 << 16;

/// Monte Carlo estimate of the probability that the correct answer's
/// weighted confidence sum beats every incorrect answer's sum.
///
/// Samples are drawn in fixed-size chunks, each from its own stream derived
/// from `(seed, configuration, chunk index)`, so the estimate does not depend
/// on thread count.
pub fn mc_vote_accuracy(profile: &WeightProfile, model: &VoteModel, n_samples: usize, seed: u64) -> Result<McEstimate> {
    profile.validate()?;
    model.validate()?;
    if n_samples < MC_MIN_SAMPLES {
        return Err(Error::invalid(format!(
            "Monte Carlo needs at least {MC_MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    let mut key = profile.key();
    key.extend([model.mu2, model.delta, model.sigma1, model.sigma2]);
    let config_hash = hash_reals(&key);
    let mu1 = model.mu2 + model.delta;
    let n_chunks = n_samples.div_ceil(MC_CHUNK);

    let wins: usize = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = seeded_rng(derive_seed(seed, &[config_hash, chunk as u64]));
            let len = MC_CHUNK.min(n_samples - chunk * MC_CHUNK);
            let mut wins = 0;
            for _ in 0..len {
                let mut draw = |w: f64, mu: f64, sigma: f64| {
                    let z: f64 = rng.sample(StandardNormal);
                    w * (mu + sigma * z)
                };
                let s_f: f64 = profile.correct.iter().map(|&w| draw(w, mu1, model.sigma1)).sum();
                let s_g = profile
                    .incorrect
                    .iter()
                    .map(|ws| ws.iter().map(|&w| draw(w, model.mu2, model.sigma2)).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max);
                if s_f > s_g {
                    wins += 1;
                }
            }
            wins
        })
        .sum();

    let n = n_samples as f64;
    let adjusted = (wins as f64 + 0.5) / (n + 1.0);
    Ok(McEstimate {
        estimate: wins as f64 / n,
        std_error: (adjusted * (1.0 - adjusted) / n).sqrt(),
        n_samples,
    })
}

/// One row of the theorem-check table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremRow {
    pub delta: f64,
    pub tail_ratio: f64,
    pub p_lower: f64,
    pub p_mc: f64,
    pub p_mc_se: f64,
}

/// Evaluate `R`, the minimum per-answer bound and the Monte Carlo accuracy along a grid of gaps.
pub fn theorem_table(
    profile: &WeightProfile,
    base: &VoteModel,
    delta_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<TheoremRow>> {
    delta_grid
        .iter()
        .map(|&delta| {
            let model = VoteModel { delta, ..*base };
            let spec = SeparationSpec::new(base.mu2 + delta, base.mu2, base.sigma1, base.sigma2)?;
            let mc = mc_vote_accuracy(profile, &model, n_samples, seed)?;
            Ok(TheoremRow {
                delta,
                tail_ratio: tail_ratio(&spec)?,
                p_lower: min_vote_lower_bound(profile, &model)?,
                p_mc: mc.estimate,
                p_mc_se: mc.std_error,
            })
        })
        .collect()
}

/// Settings for the combined theorem check run by `verify-theorems`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TheoremCheckConfig {
    /// `(sigma1, sigma2)` pairs for the tail-ratio monotonicity check.
    pub sigma_pairs: Vec<(f64, f64)>,
    pub delta_grid: Vec<f64>,
    pub profile: WeightProfile,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub n_samples: usize,
}

impl Default for TheoremCheckConfig {
    fn default() -> Self {
        Self {
            sigma_pairs: vec![(1.0, 1.0), (0.5, 2.0), (2.0, 0.5)],
            delta_grid: (0..=100).map(|i| i as f64 * 0.05).collect(),
            profile: WeightProfile {
                correct: vec![1.0],
                incorrect: vec![vec![1.0]],
            },
            mu2: 3.0,
            sigma1: 1.0,
            sigma2: 1.0,
            n_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub checks: Vec<CheckLine>,
    pub table: Vec<TheoremRow>,
}

impl TheoremCheck {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Tail-ratio monotonicity for every sigma pair, then the Monte Carlo
/// accuracy against the closed-form bound along the gap grid.
pub fn verify_theorems(cfg: &TheoremCheckConfig, seed: u64) -> Result<TheoremCheck> {
    let mut checks = Vec::new();
    for &(s1, s2) in &cfg.sigma_pairs {
        let report = check_tail_monotonicity(s1, s2, &cfg.delta_grid)?;
        checks.push(CheckLine {
            name: format!("tail ratio increasing (sigma1={s1}, sigma2={s2})"),
            passed: report.passed(),
            detail: format!("{} points, {} violations", report.points.len(), report.violations.len()),
        });
    }
    let base = VoteModel {
        mu2: cfg.mu2,
        delta: 0.0,
        sigma1: cfg.sigma1,
        sigma2: cfg.sigma2,
    };
    let table = theorem_table(&cfg.profile, &base, &cfg.delta_grid, cfg.n_samples, seed)?;
    let below: Vec<f64> = table
        .iter()
        .filter(|r| r.p_mc < r.p_lower - 3.0 * r.p_mc_se)
        .map(|r| r.delta)
        .collect();
    checks.push(CheckLine {
        name: "monte carlo accuracy >= bound - 3 se".into(),
        passed: below.is_empty(),
        detail: if below.is_empty() {
            format!("{} gaps", table.len())
        } else {
            format!("violated at gaps {below:?}")
        },
    });
    let bounds: Vec<f64> = table.iter().map(|r| r.p_lower).collect();
    checks.push(CheckLine {
        name: "bound non-decreasing in gap".into(),
        passed: bounds.windows(2).all(|w| w[1] >= w[0]),
        detail: format!("{} gaps", bounds.len()),
    });
    Ok(TheoremCheck { checks, table })
}
