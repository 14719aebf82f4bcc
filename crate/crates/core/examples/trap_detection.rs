//! Example 12 has an RSE but also a set of states that no action can leave
//! and that hosts no RSE. The verdict does not depend on the block
//! probability.

use sbgame::{chain, fixtures};

fn main() -> sbgame::Result<()> {
    for p in [0.1, 0.5, 0.9] {
        let g = fixtures::example12(p)?;
        let trap: Vec<usize> = chain::detect_trap(&g).iter().map(|x| x + 1).collect();
        let rse: Vec<String> = chain::enumerate_rse(&g)
            .iter()
            .map(|q| format!("({},{})", g.label(q.action), q.state + 1))
            .collect();
        println!("p={p}: RSE {{{}}}, trap {trap:?}, theorem {}", rse.join(","), chain::check_theorem8(&g).describe());
    }
    Ok(())
}
