//! One run of the two-memory learner on the lazified Example 9, with the
//! lock-in time and the first steps of the trajectory.

use sbgame::fixtures;
use sbgame::learner::{self, InitialState, LearnerConfig};

fn main() -> sbgame::Result<()> {
    let g = fixtures::example9_lazy();
    let cfg = LearnerConfig::uniform(&g, 0.5, 2000, 42, InitialState::Fixed(3));
    let traj = learner::run(&g, &cfg)?;

    for t in 1..=12 {
        println!("t={t:<3} x={} a={}", traj.state(t) + 1, g.label(traj.action(t)));
    }
    match learner::detect_lockin(&g, &traj)? {
        Some(l) => println!("locked in at tau={} on action {}", l.tau, g.label(l.action)),
        None => println!("no lock-in within {} steps", traj.horizon),
    }
    Ok(())
}
