//! Token, step and trajectory confidence from a small logged top-k stream.

use distrivote::{segment_steps, trajectory_confidence, GeneratedToken, GroupChoice, StepStrategy, TokenDistribution};

fn tok(text: &str, lps: &[f64]) -> distrivote::Result<GeneratedToken> {
    let pairs = lps.iter().enumerate().map(|(i, &lp)| (format!("alt{i}"), lp));
    Ok(GeneratedToken::new(text, TokenDistribution::from_pairs(pairs)?))
}

fn main() -> distrivote::Result<()> {
    let tokens = vec![
        tok("First", &[-0.1, -3.0, -4.0])?,
        tok(" step", &[-0.2, -2.5, -5.0])?,
        tok("\n\n", &[-0.5, -1.0, -1.5])?,
        tok("The answer", &[-0.05, -6.0, -7.0])?,
        tok(" is 4", &[-0.01, -8.0, -9.0])?,
    ];
    for t in &tokens {
        println!("{:>12?}  conf {:.3}  entropy {:.3}", t.text, t.dist.confidence(), t.dist.topk_entropy());
    }

    let strategy = StepStrategy::paragraph();
    let groups = segment_steps(&tokens, &strategy)?;
    println!("steps: {groups:?}");

    for choice in [GroupChoice::LastStep, GroupChoice::LastSteps(2), GroupChoice::AllTokens] {
        let tc = trajectory_confidence(&tokens, &strategy, choice)?;
        println!("{choice:?}: {:.4} (steps {:?})", tc.confidence, tc.step_confidences);
    }
    Ok(())
}
