//! Synthetic pools drawn from a two-component confidence model, plus sweeps
//! that compare voting methods as the components move apart.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confidence::Trajectory;
use crate::error::{Error, Result};
use crate::metrics::stage_report;
use crate::rng::{derive_seed, seeded_rng};
use crate::voting::{ConfidencePool, VoteMethod};

/// Answer carried by every correct synthetic trajectory.
pub const GT_ANSWER: &str = "GT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub mu_pos: f64,
    pub mu_neg: f64,
    pub sigma_pos: f64,
    pub sigma_neg: f64,
    pub budget: usize,
    /// Fraction of the pool drawn from the positive component (and labeled correct).
    pub p_correct: f64,
    /// Number of distinct wrong answers.
    pub m_wrong: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            mu_pos: 9.0,
            mu_neg: 3.0,
            sigma_pos: 1.0,
            sigma_neg: 1.0,
            budget: 128,
            p_correct: 0.5,
            m_wrong: 3,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_pos > 0.0 && self.sigma_neg > 0.0) {
            return Err(Error::invalid("component standard deviations must be positive"));
        }
        if !(self.mu_pos.is_finite() && self.mu_neg.is_finite() && self.sigma_pos.is_finite() && self.sigma_neg.is_finite())
        {
            return Err(Error::invalid("component parameters must be finite"));
        }
        if !(0.0..=1.0).contains(&self.p_correct) {
            return Err(Error::invalid(format!("p_correct must be in [0,1], got {}", self.p_correct)));
        }
        if self.budget == 0 {
            return Err(Error::invalid("budget must be >= 1"));
        }
        if self.m_wrong == 0 {
            return Err(Error::invalid("m_wrong must be >= 1"));
        }
        Ok(())
    }

    pub fn n_correct(&self) -> usize {
        (self.p_correct * self.budget as f64).floor() as usize
    }
}

/// Draw one labeled pool. Trajectory order is shuffled so position carries
/// no information about correctness.
pub fn generate_pool(cfg: &SimConfig) -> Result<ConfidencePool> {
    cfg.validate()?;
    let mut rng = seeded_rng(cfg.seed);
    let pos = Normal::new(cfg.mu_pos, cfg.sigma_pos).map_err(|e| Error::invalid(e.to_string()))?;
    let neg = Normal::new(cfg.mu_neg, cfg.sigma_neg).map_err(|e| Error::invalid(e.to_string()))?;
    let n_correct = cfg.n_correct();
    let mut drawn: Vec<(String, f64, bool)> = Vec::with_capacity(cfg.budget);
    for _ in 0..n_correct {
        drawn.push((GT_ANSWER.to_string(), pos.sample(&mut rng).max(0.0), true));
    }
    for _ in n_correct..cfg.budget {
        let label = rng.random_range(1..=cfg.m_wrong);
        drawn.push((format!("W{label}"), neg.sample(&mut rng).max(0.0), false));
    }
    drawn.shuffle(&mut rng);
    let trajectories = drawn
        .into_iter()
        .enumerate()
        .map(|(i, (answer, c, ok))| Ok(Trajectory::new(format!("t{i}"), answer, c)?.with_correct(ok)))
        .collect::<Result<Vec<_>>>()?;
    ConfidencePool::new(format!("sim-{:016x}", cfg.seed), trajectories)
}

/// Generator of step-confidence traces with bounded relative noise and
/// occasional dips.
///
/// Every step lies in `[level * lo, level * hi]` where `lo / hi > 0.3`, so the
/// ratio of any step to a running average of earlier steps stays above 0.3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepTraceConfig {
    pub n_steps: usize,
    pub level: f64,
    /// Maximum relative jitter, at most 0.3.
    pub noise: f64,
    pub dip_prob: f64,
    /// Relative depth of a dip, at most 0.4.
    pub dip_depth: f64,
    pub seed: u64,
}

impl Default for StepTraceConfig {
    fn default() -> Self {
        Self {
            n_steps: 40,
            level: 8.0,
            noise: 0.15,
            dip_prob: 0.15,
            dip_depth: 0.35,
            seed: 0,
        }
    }
}

impl StepTraceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level.is_finite()) {
            return Err(Error::invalid("trace level must be positive"));
        }
        if !(0.0..=0.3).contains(&self.noise) {
            return Err(Error::invalid("trace noise must be in [0, 0.3]"));
        }
        if !(0.0..=0.4).contains(&self.dip_depth) {
            return Err(Error::invalid("dip depth must be in [0, 0.4]"));
        }
        if !(0.0..=1.0).contains(&self.dip_prob) {
            return Err(Error::invalid("dip probability must be in [0, 1]"));
        }
        Ok(())
    }
}

pub fn generate_step_trace(cfg: &StepTraceConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut rng = seeded_rng(cfg.seed);
    Ok((0..cfg.n_steps)
        .map(|_| {
            let jitter = 1.0 + cfg.noise * rng.random_range(-1.0..=1.0);
            let dip = if rng.random_bool(cfg.dip_prob) { 1.0 - cfg.dip_depth } else { 1.0 };
            cfg.level * jitter * dip
        })
        .collect())
}

/// What one method did on one pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatOutcome {
    pub method: String,
    pub correct: bool,
    pub acc: Option<[f64; 3]>,
    pub wacc: Option<[f64; 3]>,
    pub predict_acc: Option<f64>,
}

/// Run every method on one pool with ground truth [`GT_ANSWER`].
pub fn evaluate_methods(pool: &ConfidencePool, methods: &[VoteMethod], seed: u64) -> Result<Vec<RepeatOutcome>> {
    methods
        .iter()
        .map(|m| match m {
            VoteMethod::Distri(cfg) => {
                let r = stage_report(pool, GT_ANSWER, cfg, seed)?;
                Ok(RepeatOutcome {
                    method: m.label(),
                    correct: r.voted_correct,
                    acc: Some([r.stage1.acc, r.stage2.acc, r.stage3.acc]),
                    wacc: Some([r.stage1.wacc, r.stage2.wacc, r.stage3.wacc]),
                    predict_acc: r.predict_acc,
                })
            }
            VoteMethod::Baseline(_) => Ok(RepeatOutcome {
                method: m.label(),
                correct: m.vote(pool, seed)?.answer == GT_ANSWER,
                acc: None,
                wacc: None,
                predict_acc: None,
            }),
        })
        .collect()
}

/// Per-repeat outcomes for one configuration; pool `r` uses seed
/// `derive_seed(cfg.seed, [index, r])`.
pub fn run_repeats(cfg: &SimConfig, index: u64, methods: &[VoteMethod], repeats: usize) -> Result<Vec<Vec<RepeatOutcome>>> {
    (0..repeats)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(cfg.seed, &[index, r as u64]);
            let pool = generate_pool(&SimConfig { seed, ..cfg.clone() })?;
            evaluate_methods(&pool, methods, seed)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta: f64,
    pub method: String,
    pub repeat_count: usize,
    pub mean_acc: f64,
    pub acc_stage1: Option<f64>,
    pub acc_stage2: Option<f64>,
    pub acc_stage3: Option<f64>,
    pub wacc_stage1: Option<f64>,
    pub wacc_stage2: Option<f64>,
    pub wacc_stage3: Option<f64>,
    pub predict_acc: Option<f64>,
}

impl SweepRow {
    /// Binomial standard error of `mean_acc`.
    pub fn std_error(&self) -> f64 {
        let p = self.mean_acc;
        (p * (1.0 - p) / self.repeat_count as f64).sqrt()
    }
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let mut n = 0usize;
    let mut sum = 0.0;
    for v in values {
        sum += v?;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

fn summarize(delta: f64, method: &str, outcomes: &[&RepeatOutcome]) -> SweepRow {
    let n = outcomes.len();
    let stage = |f: fn(&RepeatOutcome) -> Option<[f64; 3]>, i: usize| mean_of(outcomes.iter().map(|o| f(o).map(|a| a[i])));
    SweepRow {
        delta,
        method: method.to_string(),
        repeat_count: n,
        mean_acc: outcomes.iter().filter(|o| o.correct).count() as f64 / n as f64,
        acc_stage1: stage(|o| o.acc, 0),
        acc_stage2: stage(|o| o.acc, 1),
        acc_stage3: stage(|o| o.acc, 2),
        wacc_stage1: stage(|o| o.wacc, 0),
        wacc_stage2: stage(|o| o.wacc, 1),
        wacc_stage3: stage(|o| o.wacc, 2),
        predict_acc: mean_of(outcomes.iter().map(|o| o.predict_acc)),
    }
}

/// For each gap in `delta_grid`, set `mu_pos = mu_neg + delta`, draw
/// `repeats` pools and run every method on each. Rows are sorted by
/// `(delta, method label)`.
pub fn sweep_separation(base: &SimConfig, delta_grid: &[f64], methods: &[VoteMethod], repeats: usize) -> Result<Vec<SweepRow>> {
    base.validate()?;
    if delta_grid.is_empty() || methods.is_empty() {
        return Err(Error::invalid("sweep needs at least one gap and one method"));
    }
    if repeats == 0 {
        return Err(Error::invalid("repeats must be >= 1"));
    }
    if let Some(d) = delta_grid.iter().find(|d| !d.is_finite()) {
        return Err(Error::invalid(format!("gap {d} is not finite")));
    }
    let mut rows = Vec::new();
    for (di, &delta) in delta_grid.iter().enumerate() {
        let cfg = SimConfig {
            mu_pos: base.mu_neg + delta,
            ..base.clone()
        };
        let per_repeat = run_repeats(&cfg, di as u64, methods, repeats)?;
        for (mi, m) in methods.iter().enumerate() {
            let column: Vec<&RepeatOutcome> = per_repeat.iter().map(|r| &r[mi]).collect();
            rows.push(summarize(delta, &m.label(), &column));
        }
    }
    rows.sort_by(|a, b| a.delta.total_cmp(&b.delta).then_with(|| a.method.cmp(&b.method)));
    Ok(rows)
}

/// A method given either by its short name (`dis`, `wsc`, `top:0.5`, ...) or in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MethodSpec {
    Name(String),
    Full(VoteMethod),
}

impl MethodSpec {
    pub fn resolve(&self) -> Result<VoteMethod> {
        match self {
            MethodSpec::Name(s) => s.parse(),
            MethodSpec::Full(m) => Ok(m.clone()),
        }
    }
}

/// File form of a sweep, as read by `simulate --config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub base: SimConfig,
    pub delta_grid: Vec<f64>,
    pub methods: Vec<MethodSpec>,
    pub repeats: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            base: SimConfig::default(),
            delta_grid: vec![0.0, 1.0, 2.0, 3.0, 4.0, 6.0],
            methods: ["sc", "wsc", "bon", "top:0.5", "dis"]
                .iter()
                .map(|s| MethodSpec::Name(s.to_string()))
                .collect(),
            repeats: 64,
        }
    }
}

impl SweepConfig {
    pub fn run(&self) -> Result<Vec<SweepRow>> {
        let methods = self.methods.iter().map(MethodSpec::resolve).collect::<Result<Vec<_>>>()?;
        sweep_separation(&self.base, &self.delta_grid, &methods, self.repeats)
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<csv>".into(),
        source: e,
    })?;
    Ok(())
}

pub fn write_sweep_csv_file(rows: &[SweepRow], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    write_sweep_csv(rows, std::io::BufWriter::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voting::{Baseline, VotingConfig};

    #[test]
    fn all_correct_pool() {
        let p = generate_pool(&SimConfig { p_correct: 1.0, budget: 17, ..Default::default() }).unwrap();
        assert_eq!(p.budget(), 17);
        assert!(p.trajectories.iter().all(|t| t.answer == GT_ANSWER && t.correct == Some(true)));
    }

    #[test]
    fn correct_mean_near_component_mean() {
        let cfg = SimConfig { budget: 200, p_correct: 0.5, seed: 42, ..Default::default() };
        let p = generate_pool(&cfg).unwrap();
        let correct: Vec<f64> = p.trajectories.iter().filter(|t| t.correct == Some(true)).map(|t| t.confidence).collect();
        assert_eq!(correct.len(), 100);
        let mean = correct.iter().sum::<f64>() / correct.len() as f64;
        assert!((mean - 9.0).abs() <= 3.0 / (correct.len() as f64).sqrt());
    }

    #[test]
    fn pools_are_deterministic() {
        let cfg = SimConfig { seed: 7, ..Default::default() };
        assert_eq!(generate_pool(&cfg).unwrap(), generate_pool(&cfg).unwrap());
        let other = generate_pool(&SimConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(generate_pool(&SimConfig { seed: 7, ..Default::default() }).unwrap(), other);
    }

    #[test]
    fn counts_and_clamping() {
        let cfg = SimConfig { budget: 10, p_correct: 0.35, mu_neg: 0.0, m_wrong: 2, ..Default::default() };
        let p = generate_pool(&cfg).unwrap();
        assert_eq!(p.trajectories.iter().filter(|t| t.answer == GT_ANSWER).count(), 3);
        assert!(p.trajectories.iter().all(|t| t.confidence >= 0.0));
        assert!(p.trajectories.iter().filter(|t| t.answer != GT_ANSWER).all(|t| t.answer == "W1" || t.answer == "W2"));
    }

    #[test]
    fn invalid_configs() {
        assert!(generate_pool(&SimConfig { sigma_pos: 0.0, ..Default::default() }).is_err());
        assert!(generate_pool(&SimConfig { p_correct: 1.5, ..Default::default() }).is_err());
        assert!(generate_pool(&SimConfig { budget: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn step_traces_stay_in_band() {
        for seed in 0..20 {
            let cfg = StepTraceConfig { seed, ..Default::default() };
            let t = generate_step_trace(&cfg).unwrap();
            assert_eq!(t.len(), 40);
            let lo = cfg.level * (1.0 - cfg.noise) * (1.0 - cfg.dip_depth);
            let hi = cfg.level * (1.0 + cfg.noise);
            assert!(t.iter().all(|&c| c >= lo && c <= hi));
        }
        assert!(generate_step_trace(&StepTraceConfig { noise: 0.5, ..Default::default() }).is_err());
    }

    #[test]
    fn sweep_shape_and_order() {
        let methods = vec![
            VoteMethod::Distri(VotingConfig::default()),
            VoteMethod::Baseline(Baseline::SelfConsistency),
        ];
        let base = SimConfig { budget: 24, ..Default::default() };
        let rows = sweep_separation(&base, &[2.0, 0.0], &methods, 4).unwrap();
        let keys: Vec<(f64, &str)> = rows.iter().map(|r| (r.delta, r.method.as_str())).collect();
        assert_eq!(keys, vec![(0.0, "dis"), (0.0, "sc"), (2.0, "dis"), (2.0, "sc")]);
        assert!(rows[0].acc_stage1.is_some() && rows[1].acc_stage1.is_none());
        assert!(rows.iter().all(|r| r.repeat_count == 4));
        assert!(sweep_separation(&base, &[], &methods, 4).is_err());
    }

    #[test]
    fn sweep_csv_is_byte_identical() {
        let cfg = SweepConfig { delta_grid: vec![0.0, 3.0], repeats: 6, ..Default::default() };
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_sweep_csv(&cfg.run().unwrap(), &mut a).unwrap();
        write_sweep_csv(&cfg.run().unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with(
            "delta,method,repeat_count,mean_acc,acc_stage1,acc_stage2,acc_stage3,wacc_stage1,wacc_stage2,wacc_stage3,predict_acc\n"
        ));
    }

    #[test]
    fn method_spec_forms() {
        let cfg: SweepConfig = serde_json::from_str(
            r#"{"methods": ["wsc", {"kind": "distri", "partition": {"kind": "kmeans"}, "reject_enabled": false}]}"#,
        )
        .unwrap();
        let m: Vec<VoteMethod> = cfg.methods.iter().map(|m| m.resolve().unwrap()).collect();
        assert_eq!(m[0].label(), "wsc");
        assert_eq!(m[1].label(), "dis[kmeans,no-reject]");
    }
}
