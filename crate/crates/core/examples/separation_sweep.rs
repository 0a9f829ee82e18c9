//! Accuracy of each method as the confidence gap between correct and wrong
//! answers grows. Writes the table as CSV to stdout.

use distrivote::sim::{write_sweep_csv, SweepConfig};

fn main() -> distrivote::Result<()> {
    let mut cfg = SweepConfig { delta_grid: vec![0.0, 1.0, 2.0, 4.0], repeats: 32, ..Default::default() };
    cfg.base.p_correct = 0.3;
    cfg.base.seed = 7;
    let rows = cfg.run()?;
    for r in &rows {
        eprintln!("gap {:<4} {:<8} acc {:.3} +- {:.3}", r.delta, r.method, r.mean_acc, r.std_error());
    }
    write_sweep_csv(&rows, std::io::stdout().lock())
}
