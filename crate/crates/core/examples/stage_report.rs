//! Accuracy, weighted accuracy and AUROC of the pool at each filtering stage.

use distrivote::metrics::stage_report;
use distrivote::sim::{generate_pool, SimConfig, GT_ANSWER};
use distrivote::VotingConfig;

fn main() -> distrivote::Result<()> {
    let cfg = VotingConfig::default();
    for p in [0.3, 0.5, 0.7] {
        let sim = SimConfig { mu_pos: 6.0, p_correct: p, seed: 21, ..Default::default() };
        let pool = generate_pool(&sim)?;
        let rep = stage_report(&pool, GT_ANSWER, &cfg, sim.seed)?;
        println!("p_correct {p}: voted {} (correct: {})", rep.voted, rep.voted_correct);
        for (name, m) in [("I", &rep.stage1), ("II", &rep.stage2), ("III", &rep.stage3)] {
            let auroc = m.auroc.map_or("-".to_string(), |a| format!("{a:.3}"));
            println!("  {name:<3} n {:>3}  acc {:.3}  wacc {:.3}  auroc {auroc}", m.n, m.acc, m.wacc);
        }
        if let Some(pa) = rep.predict_acc {
            println!("  split agreement {pa:.3}");
        }
    }
    Ok(())
}
