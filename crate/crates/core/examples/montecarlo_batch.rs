//! A seeded Monte Carlo batch next to the exact lock-in probability at the
//! same horizon, exported as runs.csv and summary.json.

use sbgame::harness::{self, ExperimentConfig, InitialPolicy};
use sbgame::meta::{self, MetaChain};
use sbgame::{chain, fixtures, report};

fn main() -> sbgame::Result<()> {
    let g = fixtures::example9();
    let cfg = ExperimentConfig {
        runs: 500,
        horizon: 1000,
        epsilons: vec![0.5, 0.5],
        master_seed: 1,
        initial: InitialPolicy::Fixed(0),
    };
    let batch = harness::montecarlo(&g, &cfg)?;
    let c = MetaChain::build(&g, &cfg.epsilons, &meta::point_initial(&g, 0)?, meta::DEFAULT_BUDGET)?;
    let oracle = c.summarize(Some(cfg.horizon))?;
    println!("empirical lock-in frequency {}", batch.lockin_frequency);
    println!("exact Pr[lock-in by T]      {:.6}", oracle.truncated.expect("horizon given").1);

    let dir = std::env::temp_dir().join("sbgame-montecarlo-example");
    let paths = report::report(&g, &batch, &chain::analyze(&g)?, Some(&oracle), &dir)?;
    println!("wrote {} and {}", paths.runs_csv.display(), paths.summary_json.display());
    Ok(())
}
