//! Exact convergence probabilities from the chain the learner induces on
//! five-tuples of states and actions, compared across initial states.

use sbgame::fixtures;
use sbgame::meta::{self, MetaChain};

fn main() -> sbgame::Result<()> {
    for (name, g) in [("example9", fixtures::example9()), ("example9-lazy", fixtures::example9_lazy())] {
        let c = MetaChain::build(&g, &[0.5, 0.5], &meta::uniform_initial(&g), meta::DEFAULT_BUDGET)?;
        let a = c.absorption_probabilities()?;
        println!("{name}: {} reachable of {} meta-states, residual {:.1e}", c.len(), c.omega_size(), a.residual);
        for (x, p) in c.absorption_by_initial_state(&a) {
            println!("  Pr[converge | x(1) = {}] = {p:.6}", x + 1);
        }
        let curve = c.lockin_curve(200)?;
        println!("  Pr[lock-in by T=50] = {:.6}, by T=200 = {:.6}", curve[48], curve[198]);
    }
    Ok(())
}
