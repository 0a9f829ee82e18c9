//! Write simulated pools as JSONL, read them back and vote.

use distrivote::io::{load_pools, write_pools_file, LoadOptions};
use distrivote::sim::{generate_pool, SimConfig};
use distrivote::{distri_vote, VotingConfig};

fn main() -> distrivote::Result<()> {
    let pools = (0..3)
        .map(|seed| generate_pool(&SimConfig { budget: 16, seed, ..Default::default() }))
        .collect::<distrivote::Result<Vec<_>>>()?;

    let path = std::env::temp_dir().join("distrivote_example_pools.jsonl");
    write_pools_file(&pools, &path)?;
    let back = load_pools(&path, &LoadOptions::default())?;
    assert_eq!(back, pools);
    println!("wrote and reread {} pools via {}", back.len(), path.display());

    let first = std::fs::read_to_string(&path).unwrap();
    println!("first record: {}", first.lines().next().unwrap_or(""));

    for pool in &back {
        let r = distri_vote(pool, &VotingConfig::default(), 0)?;
        println!("{}: {} trajectories -> {}", pool.question_id, pool.budget(), r.answer);
    }
    std::fs::remove_file(&path).ok();
    Ok(())
}
