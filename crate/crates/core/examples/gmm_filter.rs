//! Two-component mixture split of a simulated confidence pool, compared with
//! the other partition methods.

use distrivote::metrics::prediction_accuracy;
use distrivote::sim::{generate_pool, SimConfig, GT_ANSWER};
use distrivote::{fit_gmm_1d, partition, PartitionMethod};

fn main() -> distrivote::Result<()> {
    let pool = generate_pool(&SimConfig { mu_pos: 7.0, mu_neg: 3.0, seed: 11, ..Default::default() })?;
    let confs = pool.confidences();
    let labels: Vec<bool> = pool.trajectories.iter().map(|t| t.answer == GT_ANSWER).collect();

    let fit = fit_gmm_1d(&confs, 11)?;
    println!(
        "means {:.3?} vars {:.3?} weights {:.3?} after {} iterations",
        fit.means, fit.variances, fit.weights, fit.iterations
    );
    println!("responsibility of high component at 5.0: {:.3}", fit.responsibility_high(5.0));

    let methods = [
        PartitionMethod::Gmm,
        PartitionMethod::KMeans,
        PartitionMethod::MeanShift { bandwidth: None },
        PartitionMethod::TopFraction { eta: 0.5 },
    ];
    for m in &methods {
        let (split, _) = partition(&confs, m, 11)?;
        println!(
            "{:<12} pos {:>3}  neg {:>3}  agreement {:.3}",
            m.to_string(),
            split.pos.len(),
            split.neg.len(),
            prediction_accuracy(&split, &labels)?
        );
    }
    Ok(())
}
