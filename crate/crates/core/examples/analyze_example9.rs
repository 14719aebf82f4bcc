//! Static analysis of Example 9: RSEs, X*, the convergence conditions and
//! the trap check, printed as the `analyze` command does.

use sbgame::{chain, fixtures};

fn main() -> sbgame::Result<()> {
    let g = fixtures::example9();
    let report = chain::analyze(&g)?;
    print!("{}", report.summary(&g));

    let v = chain::check_theorem8(&g);
    for w in &v.class_witnesses {
        let states: Vec<usize> = w.class.iter().map(|x| x + 1).collect();
        match w.witness {
            Some(p) => println!("P-bar class {states:?} holds RSE ({}, {})", g.label(p.action), p.state + 1),
            None => println!("P-bar class {states:?} holds no RSE"),
        }
    }
    Ok(())
}
