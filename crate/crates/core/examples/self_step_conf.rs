//! Reflection triggering on a synthetic step-confidence trace, then on a
//! replayed token stream where the forced token lands in the output.

use distrivote::sim::{generate_step_trace, StepTraceConfig};
use distrivote::ssc::{replay_trace, ReplaySource};
use distrivote::{GeneratedToken, SscConfig, SscController, StepStrategy, TokenDistribution};

fn main() -> distrivote::Result<()> {
    let cfg = SscConfig::new(0.8, 0.8)?;

    let trace = generate_step_trace(&StepTraceConfig { seed: 3, ..Default::default() })?;
    let replay = replay_trace(&trace, &cfg)?;
    println!("{} steps, reflections at {:?}", trace.len(), replay.triggers);
    for &i in &replay.triggers {
        let tau_before = if i == 0 { 0.0 } else { replay.tau_history[i - 1] };
        println!("  step {i}: conf {:.3} vs tau {:.3}", trace[i], tau_before);
    }

    // one token per line; the third line has a flat top-k, hence low confidence
    let line = |text: &str, alt: f64| -> distrivote::Result<GeneratedToken> {
        let dist = TokenDistribution::from_pairs([(text.to_string(), -0.05), ("wait".to_string(), alt)])?;
        Ok(GeneratedToken::new(text, dist))
    };
    let tokens = vec![
        line("a\n", -5.0)?,
        line("b\n", -5.0)?,
        line("c\n", -0.8)?,
        line("d\n", -5.0)?,
        line("e\n", -5.0)?,
    ];
    let controller = SscController::new(cfg, StepStrategy::sentence())?;
    let gen = controller.run(&mut ReplaySource::new(tokens))?;
    println!("decisions {:?}", gen.decisions);
    println!("injected at {:?}, text {:?}", gen.injected_positions, gen.text());
    Ok(())
}
