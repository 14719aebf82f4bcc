//! Two-memory better-reply learning with inertia.
//!
//! Each agent remembers the last two joint actions and observes the current
//! state. If the last two joint actions agree, the agent keeps its action
//! with probability `eps_i` and otherwise moves uniformly to a strict better
//! reply (or stays put when there is none). If they differ, it keeps its
//! action with probability `eps_i` and otherwise explores every other action
//! uniformly. The first two joint actions are uniform.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain;
use crate::error::{Error, Result};
use crate::game::{JointAction, StateBasedGame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    Fixed(usize),
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    /// Per-agent inertia, each strictly inside `(0, 1)`.
    pub epsilons: Vec<f64>,
    /// Number of joint actions played, at least 3.
    pub horizon: usize,
    pub seed: u64,
    pub initial_state: InitialState,
}

impl LearnerConfig {
    /// Same inertia for every agent.
    pub fn uniform(game: &StateBasedGame, epsilon: f64, horizon: usize, seed: u64, initial_state: InitialState) -> Self {
        Self {
            epsilons: vec![epsilon; game.agents()],
            horizon,
            seed,
            initial_state,
        }
    }

    pub fn check(&self, game: &StateBasedGame) -> Result<()> {
        check_epsilons(game, &self.epsilons)?;
        if self.horizon < 3 {
            return Err(Error::Config(format!("horizon {} must be at least 3", self.horizon)));
        }
        if let InitialState::Fixed(x) = self.initial_state {
            game.check_state(x)?;
        }
        Ok(())
    }
}

pub(crate) fn check_epsilon(agent: usize, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::InertiaOutOfRange { agent, value })
    }
}

pub(crate) fn check_epsilons(game: &StateBasedGame, epsilons: &[f64]) -> Result<()> {
    if epsilons.len() != game.agents() {
        return Err(Error::Config(format!(
            "{} inertia values given for {} agents",
            epsilons.len(),
            game.agents()
        )));
    }
    for (i, &e) in epsilons.iter().enumerate() {
        check_epsilon(i, e)?;
    }
    Ok(())
}

/// `h(t) = {a(t-2), a(t-1), x(t)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct History {
    pub a_prev2: JointAction,
    pub a_prev1: JointAction,
    pub x_now: usize,
}

/// Agent `i`'s mixed action at time `t`. Exact: the last positive entry
/// absorbs the rounding residual so the vector sums to 1.
pub fn response_distribution(game: &StateBasedGame, i: usize, hist: &History, epsilon: f64) -> Result<Vec<f64>> {
    game.check_agent(i)?;
    game.actions().check(hist.a_prev2)?;
    game.actions().check(hist.a_prev1)?;
    game.check_state(hist.x_now)?;
    check_epsilon(i, epsilon)?;
    Ok(response(game, i, hist, epsilon))
}

fn response(game: &StateBasedGame, i: usize, hist: &History, epsilon: f64) -> Vec<f64> {
    let k = game.actions().count(i);
    let own = game.actions().component(hist.a_prev1, i);
    let mut p = vec![0.0; k];
    if hist.a_prev2 == hist.a_prev1 {
        let better = game.better_replies(i, hist.a_prev1, hist.x_now);
        if better.is_empty() {
            p[own] = 1.0;
            return p;
        }
        p[own] = epsilon;
        let share = (1.0 - epsilon) / better.len() as f64;
        for b in better {
            p[b] = share;
        }
    } else if k == 1 {
        p[0] = 1.0;
        return p;
    } else {
        let share = (1.0 - epsilon) / (k - 1) as f64;
        p.fill(share);
        p[own] = epsilon;
    }
    let last = p.iter().rposition(|&v| v > 0.0).expect("some entry is positive");
    let head: f64 = p[..last].iter().sum();
    p[last] = 1.0 - head;
    p
}

/// Inverse-CDF draw over indices in ascending order.
fn sample(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc && p > 0.0 {
            return k;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).expect("distribution has support")
}

fn sample_uniform_action(game: &StateBasedGame, rng: &mut ChaCha8Rng) -> JointAction {
    let comps: Vec<usize> = game
        .actions()
        .counts()
        .iter()
        .map(|&k| sample(&vec![1.0 / k as f64; k], rng))
        .collect();
    game.actions().encode(&comps).expect("sampled components are in range")
}

fn sample_state(game: &StateBasedGame, a: JointAction, x: usize, rng: &mut ChaCha8Rng) -> usize {
    sample(game.row(a, x), rng)
}

/// One iteration of the loop body: every agent draws its action (ascending
/// agent order), then the environment draws `x(t+1)` from `P(a(t); x(t), .)`.
pub fn step(game: &StateBasedGame, hist: &History, epsilons: &[f64], rng: &mut ChaCha8Rng) -> (JointAction, usize) {
    let comps: Vec<usize> = (0..game.agents())
        .map(|i| sample(&response(game, i, hist, epsilons[i]), rng))
        .collect();
    let a = game.actions().encode(&comps).expect("sampled components are in range");
    let y = sample_state(game, a, hist.x_now, rng);
    (a, y)
}

/// `a(1..T)` and `x(1..T+1)`, stored 0-based: `actions[t - 1] = a(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub actions: Vec<JointAction>,
    pub states: Vec<usize>,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    pub horizon: usize,
}

impl Trajectory {
    /// `a(t)` for 1-based `t`.
    pub fn action(&self, t: usize) -> JointAction {
        self.actions[t - 1]
    }

    /// `x(t)` for 1-based `t`.
    pub fn state(&self, t: usize) -> usize {
        self.states[t - 1]
    }

    /// Every index is in range and every recorded transition has positive
    /// probability.
    pub fn check(&self, game: &StateBasedGame) -> Result<()> {
        let bad = |msg: String| Err(Error::TrajectoryMismatch(msg));
        if self.states.len() != self.actions.len() + 1 {
            return bad(format!(
                "{} actions but {} states",
                self.actions.len(),
                self.states.len()
            ));
        }
        for (t, &a) in self.actions.iter().enumerate() {
            if game.actions().check(a).is_err() {
                return bad(format!("action index {} at t = {}", a.0, t + 1));
            }
        }
        for (t, &x) in self.states.iter().enumerate() {
            if x >= game.states() {
                return bad(format!("state {} at t = {}", x + 1, t + 1));
            }
        }
        for t in 0..self.actions.len() {
            let (a, x, y) = (self.actions[t], self.states[t], self.states[t + 1]);
            if game.prob(a, x, y) <= 0.0 {
                return bad(format!(
                    "transition {} -> {} under {} at t = {} has probability 0",
                    x + 1,
                    y + 1,
                    game.label(a),
                    t + 1
                ));
            }
        }
        Ok(())
    }

    /// CSV with columns `t, x, a_digits, locked`, one row per played action.
    pub fn write_csv<W: Write>(&self, game: &StateBasedGame, lockin: Option<LockIn>, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "a_digits", "locked"])?;
        for t in 1..=self.actions.len() {
            let locked = lockin.is_some_and(|l| t >= l.tau);
            w.write_record([
                t.to_string(),
                (self.state(t) + 1).to_string(),
                game.label(self.action(t)),
                u8::from(locked).to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

pub fn run(game: &StateBasedGame, config: &LearnerConfig) -> Result<Trajectory> {
    config.check(game)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let t_max = config.horizon;
    let mut actions = Vec::with_capacity(t_max);
    let mut states = Vec::with_capacity(t_max + 1);
    states.push(match config.initial_state {
        InitialState::Fixed(x) => x,
        InitialState::Uniform => rng.random_range(0..game.states()),
    });
    for _ in 0..2 {
        let a = sample_uniform_action(game, &mut rng);
        let x = *states.last().expect("initial state pushed");
        actions.push(a);
        states.push(sample_state(game, a, x, &mut rng));
    }
    for t in 2..t_max {
        let hist = History {
            a_prev2: actions[t - 2],
            a_prev1: actions[t - 1],
            x_now: states[t],
        };
        let (a, y) = step(game, &hist, &config.epsilons, &mut rng);
        actions.push(a);
        states.push(y);
    }
    Ok(Trajectory {
        actions,
        states,
        seed: config.seed,
        epsilons: config.epsilons.clone(),
        horizon: t_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LockIn {
    /// 1-based time of the second of two equal consecutive actions.
    pub tau: usize,
    pub action: JointAction,
}

/// Smallest `tau` in `[2, T]` with `a(tau - 1) = a(tau)` and
/// `[a(tau), x(tau + 1)]` an RSE.
pub fn detect_lockin(game: &StateBasedGame, traj: &Trajectory) -> Result<Option<LockIn>> {
    traj.check(game)?;
    let rse = chain::rse_table(game);
    Ok(lockin_with(&rse, traj))
}

pub(crate) fn lockin_with(rse: &[Vec<bool>], traj: &Trajectory) -> Option<LockIn> {
    (2..=traj.actions.len())
        .find(|&tau| {
            let a = traj.action(tau);
            traj.action(tau - 1) == a && rse[a.0][traj.state(tau + 1)]
        })
        .map(|tau| LockIn {
            tau,
            action: traj.action(tau),
        })
}

/// Seed of run `r` of a batch with master seed `master` (SplitMix64 finalizer
/// over the pair).
pub fn derive_seed(master: u64, r: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(r.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
