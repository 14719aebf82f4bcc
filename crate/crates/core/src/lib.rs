//! Finite state-based games and uncoupled learning in them.
//!
//! A state-based game is a normal-form game whose payoffs depend on an
//! environment state, and whose state moves by a Markov kernel chosen by the
//! joint action. The crate provides:
//!
//! - [`game`]: the game model, validation, better replies and stage Nash checks;
//! - [`chain`]: per-action Markov analysis, recurrent state equilibria (RSE),
//!   the convergence-condition checker and trap detection;
//! - [`learner`]: the two-memory better-reply dynamics with inertia;
//! - [`meta`]: the exact Markov chain the learner induces, used as an oracle
//!   for absorption and lock-in probabilities;
//! - [`potential`]: verification and synthesis of state-based potentials;
//! - [`harness`] and [`report`]: file I/O, Monte Carlo batches and exports;
//! - [`fixtures`]: built-in games and random generators.
//!
//! Indices are 0-based in the API and 1-based in files and reports.

pub mod chain;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod harness;
pub mod learner;
pub mod meta;
pub mod potential;
pub mod report;

pub use error::{Error, Result};
pub use game::{ActionSpace, ActionStatePair, JointAction, RawGame, StateBasedGame};
