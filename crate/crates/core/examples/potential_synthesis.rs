//! Potential synthesis: a generated potential game round-trips, Example 4
//! is refused with a four-cycle certificate.

use sbgame::fixtures::{self, RandomGameParams};
use sbgame::potential::{self, Mode, Synthesis};

fn main() -> sbgame::Result<()> {
    let (g, _) = fixtures::random_potential_game(7, &RandomGameParams::default());
    let s = potential::synthesize_potential(&g);
    println!("{}", s.describe(&g));
    if let Synthesis::Found(phi) = &s {
        let v = potential::verify_potential(&g, phi, Mode::Strict)?;
        println!("strict verification: {}", v.holds());
        for p in potential::argmax_pairs(&g, phi) {
            println!("argmax ({}, {})", g.label(p.action), p.state + 1);
        }
    }

    let e4 = fixtures::example4();
    println!("{}", potential::synthesize_potential(&e4).describe(&e4));
    Ok(())
}
