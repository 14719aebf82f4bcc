//! Reading a game from JSON, with the validator's report for a broken one.

use sbgame::{harness, Error};

const GAME: &str = r#"{
  "agents": 2,
  "actions": [2, 2],
  "states": 2,
  "payoffs": [
    [[2, 2], [0, 3], [3, 0], [1, 1]],
    [[1, 1], [0, 0], [0, 0], [2, 2]]
  ],
  "kernels": [
    [[1, 0], [0.5, 0.5]],
    [[0, 1], [0, 1]],
    [[0, 1], [0, 1]],
    [[0.5, 0.5], [0, 1]]
  ]
}"#;

fn main() -> sbgame::Result<()> {
    let g = harness::parse_game(GAME, "inline")?;
    print!("{}", sbgame::chain::analyze(&g)?.summary(&g));

    let broken = GAME.replace("[[0.5, 0.5], [0, 1]]", "[[0.5, 0.6], [0, 1]]");
    match harness::parse_game(&broken, "inline") {
        Err(Error::InvalidGame(report)) => println!("rejected:\n{report}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
