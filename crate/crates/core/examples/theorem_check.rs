//! Tail ratio along a gap grid, and the closed-form vote bound against a
//! Monte Carlo estimate.

use distrivote::theory::{
    mc_vote_accuracy, min_vote_lower_bound, tail_ratio, verify_theorems, SeparationSpec, TheoremCheckConfig,
    VoteModel, WeightProfile,
};

fn main() -> distrivote::Result<()> {
    for delta in [0.0, 1.0, 2.0, 3.0] {
        let r = tail_ratio(&SeparationSpec::with_gap(delta, 1.0, 1.0)?)?;
        println!("gap {delta}: R = {r:.6}");
    }

    let profile = WeightProfile::new(vec![1.0, 0.8], vec![vec![1.0]])?;
    let model = VoteModel { mu2: 3.0, delta: 1.5, sigma1: 1.0, sigma2: 1.0 };
    let bound = min_vote_lower_bound(&profile, &model)?;
    let mc = mc_vote_accuracy(&profile, &model, 200_000, 5)?;
    println!("bound {bound:.4}  mc {:.4} +- {:.4}", mc.estimate, mc.std_error);

    let cfg = TheoremCheckConfig {
        delta_grid: (0..=20).map(|i| i as f64 * 0.25).collect(),
        ..Default::default()
    };
    let check = verify_theorems(&cfg, 1)?;
    for c in &check.checks {
        println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(())
}
