//! A pool where the confident minority is right: plain majority picks the
//! popular wrong answer, the distribution-aware vote does not.

use distrivote::{baseline_vote, distri_vote, Baseline, ConfidencePool, Trajectory, VotingConfig};

fn main() -> distrivote::Result<()> {
    let mut ts = Vec::new();
    for i in 0..6 {
        ts.push(Trajectory::new(format!("r{i}"), "42", 9.0 + 0.1 * i as f64)?);
    }
    for i in 0..9 {
        ts.push(Trajectory::new(format!("w{i}"), "41", 3.0 + 0.1 * i as f64)?);
    }
    ts.push(Trajectory::new("x", "40", 4.0)?);
    let pool = ConfidencePool::new("demo", ts)?;

    for b in [Baseline::SelfConsistency, Baseline::WeightedSelfConsistency, Baseline::BestOfN] {
        println!("{:<6} -> {}", b.to_string(), baseline_vote(&pool, b)?.answer);
    }

    let r = distri_vote(&pool, &VotingConfig::default(), 0)?;
    println!("{:<6} -> {} (score {:.3})", r.provenance.method, r.answer, r.score);
    for s in &r.provenance.stages {
        println!("  {}", serde_json::to_string(s).unwrap());
    }

    let no_reject = VotingConfig { reject_enabled: false, ..Default::default() };
    let r = distri_vote(&pool, &no_reject, 0)?;
    println!("{} -> {}", r.provenance.method, r.answer);
    Ok(())
}
