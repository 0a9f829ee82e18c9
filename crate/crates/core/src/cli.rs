//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::confidence::{GroupChoice, StepStrategy};
use crate::error::{Error, Result};
use crate::io::{load_ground_truth, load_pools, load_step_traces, LoadOptions};
use crate::metrics::{stage_report, PoolMetrics};
use crate::partition::{partition, PartitionMethod};
use crate::sim::{write_sweep_csv, SweepConfig};
use crate::ssc::{replay_trace, SscConfig};
use crate::theory::{verify_theorems, TheoremCheckConfig};
use crate::voting::{VoteMethod, VotingConfig};

#[derive(Debug, Parser)]
#[command(name = "distrivote", version, about = "Confidence-distribution voting over sampled answers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pick one answer per question.
    Vote(VoteArgs),
    /// Dump the confidence split of each question.
    Fit(FitArgs),
    /// Replay step confidences through the reflection controller.
    SscReplay(SscReplayArgs),
    /// Sweep component separation on synthetic pools and write CSV.
    Simulate(SimulateArgs),
    /// Numerically check the tail-ratio and vote-accuracy results.
    VerifyTheorems(VerifyArgs),
    /// Accuracy, weighted accuracy, AUROC and per-stage pool quality.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON file with settings for this subcommand; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Common {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn load<T: DeserializeOwned + Default>(&self) -> Result<T> {
        match &self.config {
            Some(p) => read_json(p),
            None => Ok(T::default()),
        }
    }
}

#[derive(Debug, Args)]
pub struct PoolInput {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Companion logprob stream for records without a confidence.
    #[arg(long)]
    pub stream: Option<PathBuf>,
    /// Take answers from the last `\boxed{...}` of each record's text.
    #[arg(long)]
    pub extract_boxed: bool,
    /// Step segmentation as JSON, e.g. '{"kind":"fixed_window","width":32}'.
    #[arg(long)]
    pub steps: Option<String>,
    /// Number of trailing steps to average (default: the last one).
    #[arg(long)]
    pub tail_steps: Option<usize>,
    /// Average every token instead of the trailing steps.
    #[arg(long, conflicts_with = "tail_steps")]
    pub all_tokens: bool,
}

impl PoolInput {
    fn options(&self) -> Result<LoadOptions> {
        let strategy: StepStrategy = match &self.steps {
            Some(s) => serde_json::from_str(s).map_err(|e| Error::invalid(format!("bad --steps: {e}")))?,
            None => StepStrategy::default(),
        };
        let group_choice = if self.all_tokens {
            GroupChoice::AllTokens
        } else {
            match self.tail_steps {
                Some(n) => GroupChoice::LastSteps(n),
                None => GroupChoice::LastStep,
            }
        };
        Ok(LoadOptions {
            stream: self.stream.clone(),
            strategy,
            group_choice,
            extract_boxed: self.extract_boxed,
        })
    }

    fn load(&self) -> Result<Vec<crate::voting::ConfidencePool>> {
        load_pools(&self.input, &self.options()?)
    }
}

#[derive(Debug, Args)]
pub struct PipelineFlags {
    #[arg(long)]
    pub partition: Option<PartitionMethod>,
    #[arg(long)]
    pub no_reject: bool,
    #[arg(long)]
    pub no_hier: bool,
    #[arg(long)]
    pub n_intervals: Option<usize>,
}

impl PipelineFlags {
    fn apply(&self, mut cfg: VotingConfig) -> Result<VotingConfig> {
        if let Some(p) = &self.partition {
            cfg.partition = p.clone();
        }
        if self.no_reject {
            cfg.reject_enabled = false;
        }
        if self.no_hier {
            cfg.hier_enabled = false;
        }
        if let Some(n) = self.n_intervals {
            cfg.n_intervals = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct VoteArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub input: PoolInput,
    /// sc, wsc, bon, top:<eta> or dis.
    #[arg(long, default_value = "dis")]
    pub method: String,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub input: PoolInput,
    #[arg(long, default_value = "gmm")]
    pub partition: PartitionMethod,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SscReplayArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// CSV destination (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Gap grid: `start:stop:step` or a comma list.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// CSV destination for the (delta, R, P_lower, P_mc) table (default: after the report on stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub input: PoolInput,
    #[arg(long)]
    pub gt: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Open `path` for writing, or stdout when absent.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p).map_err(io_err(p))?)),
        None => Box::new(std::io::BufWriter::new(std::io::stdout().lock())),
    })
}

fn finish(mut w: Box<dyn Write>) -> Result<()> {
    w.flush().map_err(io_err(Path::new("<output>")))
}

/// Parse `start:stop:step` or `a,b,c`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| -> Result<f64> {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("bad number {t:?} in grid {s:?}")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let grid = if parts.len() == 3 {
        let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(h > 0.0) || b < a {
            return Err(Error::invalid(format!("grid {s:?} needs step > 0 and stop >= start")));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        (0..=n).map(|i| a + i as f64 * h).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if grid.is_empty() {
        return Err(Error::invalid("empty grid"));
    }
    Ok(grid)
}

fn json_line<W: Write + ?Sized, T: Serialize>(w: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n").map_err(io_err(Path::new("<output>")))
}

fn cmd_vote(a: &VoteArgs) -> Result<()> {
    let mut method: VoteMethod = a.method.parse()?;
    if let VoteMethod::Distri(_) = method {
        method = VoteMethod::Distri(a.pipeline.apply(a.common.load()?)?);
    }
    let pools = a.input.load()?;
    let mut out = sink(a.out.as_deref())?;
    for pool in &pools {
        let r = method.vote(pool, a.common.seed())?;
        json_line(
            &mut out,
            &json!({
                "question_id": pool.question_id,
                "answer": r.answer,
                "score": r.score,
                "tally": r.tally,
                "provenance": r.provenance,
            }),
        )?;
    }
    finish(out)
}

fn cmd_fit(a: &FitArgs) -> Result<()> {
    let pools = a.input.load()?;
    let mut out = sink(a.out.as_deref())?;
    for pool in &pools {
        let confs = pool.confidences();
        let record = if confs.len() < 2 {
            json!({ "question_id": pool.question_id, "method": a.partition.to_string(), "fit": null,
                    "pos": (0..confs.len()).collect::<Vec<_>>(), "neg": [] })
        } else {
            let (split, fit) = partition(&confs, &a.partition, a.common.seed())?;
            json!({ "question_id": pool.question_id, "method": a.partition.to_string(), "fit": fit,
                    "pos": split.pos, "neg": split.neg })
        };
        json_line(&mut out, &record)?;
    }
    finish(out)
}

fn cmd_ssc_replay(a: &SscReplayArgs) -> Result<()> {
    let mut cfg: SscConfig = a.common.load()?;
    if let Some(alpha) = a.alpha {
        cfg.alpha = alpha;
    }
    if let Some(delta) = a.delta {
        cfg.delta = delta;
    }
    cfg.validate()?;
    let mut out = sink(a.out.as_deref())?;
    for (i, trace) in load_step_traces(&a.input)?.iter().enumerate() {
        let r = replay_trace(&trace.step_confidences, &cfg)?;
        json_line(
            &mut out,
            &json!({
                "id": trace.id.clone().unwrap_or_else(|| i.to_string()),
                "triggers": r.triggers,
                "tau_history": r.tau_history,
            }),
        )?;
    }
    finish(out)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let mut cfg: SweepConfig = a.common.load()?;
    if let Some(s) = a.common.seed {
        cfg.base.seed = s;
    }
    if let Some(r) = a.repeats {
        cfg.repeats = r;
    }
    let rows = cfg.run()?;
    let out = sink(a.out.as_deref())?;
    write_sweep_csv(&rows, out)
}

fn cmd_verify(a: &VerifyArgs) -> Result<()> {
    let mut cfg: TheoremCheckConfig = a.common.load()?;
    if let Some(g) = &a.grid {
        cfg.delta_grid = parse_grid(g)?;
    }
    if let Some(n) = a.samples {
        cfg.n_samples = n;
    }
    let check = verify_theorems(&cfg, a.common.seed())?;
    let mut stdout = std::io::stdout().lock();
    for c in &check.checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        writeln!(stdout, "{mark} {}: {}", c.name, c.detail).map_err(io_err(Path::new("<stdout>")))?;
    }
    drop(stdout);
    let mut w = csv::Writer::from_writer(sink(a.out.as_deref())?);
    w.write_record(["delta", "R", "P_lower", "P_mc", "P_mc_se"])?;
    for r in &check.table {
        w.serialize((r.delta, r.tail_ratio, r.p_lower, r.p_mc, r.p_mc_se))?;
    }
    w.flush().map_err(io_err(Path::new("<output>")))?;
    if check.passed() {
        Ok(())
    } else {
        Err(Error::Assertion("one or more theorem checks failed".into()))
    }
}

fn cmd_metrics(a: &MetricsArgs) -> Result<()> {
    let cfg = a.pipeline.apply(a.common.load()?)?;
    let pools = a.input.load()?;
    let gt = load_ground_truth(&a.gt)?;
    let mut reports = Vec::new();
    let mut overall = Vec::new();
    for pool in &pools {
        let answer = gt
            .get(&pool.question_id)
            .ok_or_else(|| Error::invalid(format!("no ground truth for question {:?}", pool.question_id)))?;
        overall.push(PoolMetrics::of(pool, answer)?);
        reports.push(stage_report(pool, answer, &cfg, a.common.seed())?);
    }
    let n = reports.len().max(1) as f64;
    let mean = |f: &dyn Fn(&PoolMetrics) -> f64, which: &dyn Fn(&crate::metrics::StageReport) -> &PoolMetrics| {
        reports.iter().map(|r| f(which(r))).sum::<f64>() / n
    };
    let aurocs: Vec<f64> = overall.iter().filter_map(|m| m.auroc).collect();
    let summary = json!({
        "questions": reports.len(),
        "vote_accuracy": reports.iter().filter(|r| r.voted_correct).count() as f64 / n,
        "acc": [mean(&|m| m.acc, &|r| &r.stage1), mean(&|m| m.acc, &|r| &r.stage2), mean(&|m| m.acc, &|r| &r.stage3)],
        "wacc": [mean(&|m| m.wacc, &|r| &r.stage1), mean(&|m| m.wacc, &|r| &r.stage2), mean(&|m| m.wacc, &|r| &r.stage3)],
        "auroc": if aurocs.is_empty() { None } else { Some(aurocs.iter().sum::<f64>() / aurocs.len() as f64) },
        "auroc_defined": aurocs.len(),
    });
    let mut out = sink(a.out.as_deref())?;
    for r in &reports {
        json_line(&mut out, r)?;
    }
    json_line(&mut out, &json!({ "summary": summary }))?;
    finish(out)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Vote(a) => cmd_vote(a),
        Command::Fit(a) => cmd_fit(a),
        Command::SscReplay(a) => cmd_ssc_replay(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::VerifyTheorems(a) => cmd_verify(a),
        Command::Metrics(a) => cmd_metrics(a),
    }
}

/// Parse arguments and run; usage errors exit with 1 like any other bad input.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
