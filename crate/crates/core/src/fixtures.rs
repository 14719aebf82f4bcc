//! Built-in games and random game generators.
//!
//! Action 1 of every two-action fixture is `C` and action 2 is `D`, so the
//! digit string `"12"` reads as `CD`.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain;
use crate::error::{Error, Result};
use crate::game::{ActionStatePair, JointAction, StateBasedGame};

/// Names accepted by [`by_name`].
pub const FIXTURE_NAMES: [&str; 4] = ["example4", "example9", "example9-lazy", "example12"];

/// Default `p` of the parametric two-block kernels of [`example12`].
pub const EXAMPLE12_DEFAULT_P: f64 = 0.5;

fn bimatrix(tables: &[[(f64, f64); 4]]) -> impl Fn(usize, JointAction, usize) -> f64 + '_ {
    move |i, a, x| {
        let (c1, c2) = tables[x][a.0];
        if i == 0 {
            c1
        } else {
            c2
        }
    }
}

const MATCHING_PENNIES: [(f64, f64); 4] = [(-1.0, 1.0), (1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];

/// Three states: a coordination game, a prisoner's dilemma and matching
/// pennies. The kernel is the canonical construction in which `22` keeps
/// `{1, 2}` closed, `11` pushes 1 to the absorbing state 2, and `12`, `21`
/// send everything to 3.
pub fn example4() -> StateBasedGame {
    let tables = [
        [(4.0, 4.0), (1.0, 3.0), (3.0, 1.0), (2.0, 2.0)],
        [(2.0, 2.0), (0.0, 3.0), (3.0, 0.0), (1.0, 1.0)],
        MATCHING_PENNIES,
    ];
    let kernels: [[[f64; 3]; 3]; 4] = [
        // 11
        [[0.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        // 12
        [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]],
        // 21
        [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]],
        // 22
        [[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [1.0, 0.0, 0.0]],
    ];
    StateBasedGame::from_fn(vec![2, 2], 3, bimatrix(&tables), |a, x, y| {
        kernels[a.0][x][y]
    })
    .expect("example 4 fixture is well formed")
}

/// Four states, actions `{C, D}` for both agents; the only RSE is `(CC, 1)`.
pub fn example9() -> StateBasedGame {
    let tables = [
        [(5.0, 4.0), (2.0, 3.0), (4.0, 2.0), (3.0, 1.0)],
        [(1.0, 2.0), (3.0, 1.0), (2.0, 0.0), (2.0, 1.0)],
        MATCHING_PENNIES,
        [(2.0, 2.0), (2.0, 3.0), (0.0, 3.0), (3.0, 1.0)],
    ];
    let kernels: [[[f64; 4]; 4]; 4] = [
        // CC
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.5, 0.5, 0.0],
            [0.0, 0.0, 0.5, 0.5],
        ],
        // CD
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.5, 0.5, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
        // DC
        [
            [0.5, 0.5, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
        // DD
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.0, 0.5],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
    ];
    StateBasedGame::from_fn(vec![2, 2], 4, bimatrix(&tables), |a, x, y| {
        kernels[a.0][x][y]
    })
    .expect("example 9 fixture is well formed")
}

/// `P'(a) = I/2 + P(a)/2` for every action. Supports gain self-loops only,
/// so reachability, closed classes and the RSE set are unchanged.
pub fn lazify(game: &StateBasedGame) -> StateBasedGame {
    StateBasedGame::from_fn(
        game.actions().counts().to_vec(),
        game.states(),
        |i, a, x| game.c(i, a, x),
        |a, x, y| {
            let stay = if x == y { 0.5 } else { 0.0 };
            stay + 0.5 * game.prob(a, x, y)
        },
    )
    .expect("lazification preserves stochasticity")
}

pub fn example9_lazy() -> StateBasedGame {
    lazify(&example9())
}

/// Two closed blocks `{1, 2}` and `{3, 4}` under every action. Block rows are
/// `[p, 1 - p]` and `[1 - p, p]`; `p` must lie in `(0, 1)`.
pub fn example12(p: f64) -> Result<StateBasedGame> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Config(format!(
            "example12 block probability {p} must lie strictly between 0 and 1"
        )));
    }
    let tables = [
        [(5.0, 4.0), (2.0, 3.0), (4.0, 2.0), (3.0, 1.0)],
        [(2.0, 2.0), (3.0, 1.0), (0.0, 3.0), (2.0, 1.0)],
        MATCHING_PENNIES,
        [(2.0, 2.0), (2.0, 3.0), (0.0, 3.0), (3.0, 1.0)],
    ];
    StateBasedGame::from_fn(vec![2, 2], 4, bimatrix(&tables), |_, x, y| {
        if x / 2 != y / 2 {
            0.0
        } else if x == y {
            p
        } else {
            1.0 - p
        }
    })
}

/// Resolve a built-in fixture name. `example4` is only served if the chain
/// analysis reproduces the facts the fixture was constructed to exhibit.
pub fn by_name(name: &str, example12_p: Option<f64>) -> Result<StateBasedGame> {
    match name {
        "example4" => {
            let g = example4();
            check_example4_facts(&g)?;
            Ok(g)
        }
        "example9" => Ok(example9()),
        "example9-lazy" => Ok(example9_lazy()),
        "example12" => example12(example12_p.unwrap_or(EXAMPLE12_DEFAULT_P)),
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

/// `[22, 1]` and `[22, 2]` are equivalent RSEs, `[11, 1]` is not an RSE even
/// though `11` is Nash at state 1, and the recurrent states of `P(22)` are
/// `{1, 2}`.
pub fn check_example4_facts(g: &StateBasedGame) -> Result<()> {
    let a11 = JointAction(0);
    let a22 = JointAction(3);
    let fail = |what: &str| Err(Error::Invariant(format!("example4 fixture: {what}")));
    if !(chain::is_rse(g, a22, 0)? && chain::is_rse(g, a22, 1)?) {
        return fail("[22,1] and [22,2] must be RSEs");
    }
    let class = chain::rse_class(g, a22, 0)?;
    if !class.contains(&ActionStatePair::new(a22, 1)) {
        return fail("[22,1] ~ [22,2] must hold");
    }
    if chain::is_rse(g, a11, 0)? {
        return fail("[11,1] must not be an RSE");
    }
    if !g.is_pure_nash(a11, 0)? {
        return fail("11 must be Nash at state 1");
    }
    let recurrent: Vec<usize> = chain::recurrent_classes(&g.kernel(a22))?
        .into_iter()
        .flatten()
        .collect();
    if recurrent != vec![0, 1] {
        return fail("recurrent states of P(22) must be {1,2}");
    }
    Ok(())
}

/// Shape of random games drawn by [`random_game`].
#[derive(Debug, Clone)]
pub struct RandomGameParams {
    pub agents: usize,
    pub max_actions: usize,
    pub max_states: usize,
    /// Payoffs are integers in `0..=max_payoff`.
    pub max_payoff: i32,
    /// Probability that an off-diagonal kernel entry is in the support.
    pub density: f64,
    /// Probability that a diagonal entry is in the support.
    pub self_loop: f64,
}

impl Default for RandomGameParams {
    fn default() -> Self {
        Self {
            agents: 2,
            max_actions: 3,
            max_states: 4,
            max_payoff: 3,
            density: 0.35,
            self_loop: 0.5,
        }
    }
}

fn random_row(rng: &mut ChaCha8Rng, support: &[usize], m: usize) -> Vec<f64> {
    let weights: Vec<u32> = support.iter().map(|_| rng.random_range(1..=4)).collect();
    let total: u32 = weights.iter().sum();
    let mut row = vec![0.0; m];
    for (&y, &w) in support.iter().zip(&weights) {
        row[y] = f64::from(w) / f64::from(total);
    }
    row
}

/// A random game with small integer payoffs (ties included) and sparse kernels.
pub fn random_game(seed: u64, params: &RandomGameParams) -> StateBasedGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts: Vec<usize> = (0..params.agents)
        .map(|_| rng.random_range(1..=params.max_actions))
        .collect();
    let m = rng.random_range(1..=params.max_states);
    let na: usize = counts.iter().product();
    let n = params.agents;
    let payoffs: Vec<f64> = (0..m * na * n)
        .map(|_| f64::from(rng.random_range(0..=params.max_payoff)))
        .collect();
    let mut rows = Vec::with_capacity(na * m);
    for _ in 0..na {
        for x in 0..m {
            let mut support: Vec<usize> = (0..m)
                .filter(|&y| {
                    let p = if y == x { params.self_loop } else { params.density };
                    rng.random_bool(p)
                })
                .collect();
            if support.is_empty() {
                support.push(rng.random_range(0..m));
            }
            rows.push(random_row(&mut rng, &support, m));
        }
    }
    StateBasedGame::from_fn(
        counts,
        m,
        |i, a, x| payoffs[(x * na + a.0) * n + i],
        |a, x, y| rows[a.0 * m + x][y],
    )
    .expect("generated games are valid")
}

/// A state-based potential game together with the potential it was built
/// from. The potential takes distinct values, each agent's payoff adds a
/// term independent of its own action, and kernels only move to states where
/// the potential (for the same action) does not decrease.
pub fn random_potential_game(seed: u64, params: &RandomGameParams) -> (StateBasedGame, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_907e);
    let counts: Vec<usize> = (0..params.agents)
        .map(|_| rng.random_range(1..=params.max_actions))
        .collect();
    let m = rng.random_range(1..=params.max_states);
    let space = crate::game::ActionSpace::new(counts.clone());
    let na = space.size();
    let n = params.agents;
    let mut values: Vec<f64> = (0..na * m).map(|v| v as f64).collect();
    values.shuffle(&mut rng);
    // phi[a * m + x]
    let phi = values;
    // Opponent-only payoff terms: indexed by (agent, a with own component zeroed, x).
    let mut dummy = vec![0.0; n * na * m];
    for v in dummy.iter_mut() {
        *v = f64::from(rng.random_range(0..=params.max_payoff));
    }
    let mut rows = Vec::with_capacity(na * m);
    for a in 0..na {
        for x in 0..m {
            let allowed: Vec<usize> = (0..m)
                .filter(|&y| phi[a * m + y] >= phi[a * m + x])
                .collect();
            let mut support: Vec<usize> = allowed
                .iter()
                .copied()
                .filter(|&y| {
                    let p = if y == x { params.self_loop } else { params.density };
                    rng.random_bool(p)
                })
                .collect();
            if support.is_empty() {
                support.push(*allowed.choose(&mut rng).expect("x itself is allowed"));
            }
            rows.push(random_row(&mut rng, &support, m));
        }
    }
    let game = StateBasedGame::from_fn(
        counts,
        m,
        |i, a, x| {
            let others = space.with_component(a, i, 0);
            phi[a.0 * m + x] + dummy[(i * na + others.0) * m + x]
        },
        |a, x, y| rows[a.0 * m + x][y],
    )
    .expect("generated games are valid");
    (game, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::validate;

    #[test]
    fn fixtures_resolve_by_name() {
        for name in FIXTURE_NAMES {
            let g = by_name(name, None).unwrap();
            assert!(validate(&g.to_raw()).is_ok());
        }
        assert!(matches!(by_name("example5", None), Err(Error::UnknownFixture(_))));
    }

    #[test]
    fn example4_facts_hold() {
        check_example4_facts(&example4()).unwrap();
    }

    #[test]
    fn example4_loader_refuses_broken_fixture() {
        // Make state 1 absorbing under 11: [11, 1] would become an RSE.
        let mut raw = example4().to_raw();
        raw.kernels[0][0] = vec![1.0, 0.0, 0.0];
        let g = StateBasedGame::from_raw(raw).unwrap();
        assert!(matches!(check_example4_facts(&g), Err(Error::Invariant(_))));
    }

    #[test]
    fn example12_rejects_degenerate_p() {
        assert!(example12(0.0).is_err());
        assert!(example12(1.0).is_err());
        assert!(example12(0.1).is_ok());
    }

    #[test]
    fn lazify_adds_only_self_loops() {
        let g = example9();
        let l = example9_lazy();
        for a in g.actions().iter() {
            for x in 0..g.states() {
                assert!(l.prob(a, x, x) >= 0.5);
                for y in 0..g.states() {
                    if x != y {
                        assert_eq!(l.prob(a, x, y), g.prob(a, x, y) / 2.0);
                    }
                }
            }
        }
    }

    #[test]
    fn random_generators_are_deterministic() {
        let p = RandomGameParams::default();
        assert_eq!(random_game(7, &p), random_game(7, &p));
        assert_eq!(random_potential_game(7, &p).0, random_potential_game(7, &p).0);
    }
}
