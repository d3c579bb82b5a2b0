//! Equilibria of large anonymous games and their rare-event statistics.
//!
//! An anonymous game is a game in which each player's cost depends on the
//! other players only through the empirical distribution of (type, action)
//! pairs. This crate computes:
//!
//! - Nash equilibria of the `n`-player game (exhaustive enumeration of the
//!   equilibrium distribution set, and best-response dynamics on congestion
//!   games), see [`finite`];
//! - Cournot-Nash equilibria of the nonatomic (continuum-player) limit, both
//!   analytically for the bundled entry games ([`entry`]) and by Frank-Wolfe
//!   minimization of the Beckmann potential for congestion games
//!   ([`solver`]);
//! - rate functions, decay slopes, and conditional-limit statistics for rare
//!   equilibrium events ([`ldp`]);
//! - prices of anarchy for finite and nonatomic games, with tail experiments
//!   over random type draws ([`poa`]).
//!
//! Everything is driven by finite type/action sets. The central state object
//! is [`measures::TypeActionDistribution`], a probability mass on the
//! type-action grid which optionally tracks exact integer counts when it is
//! an empirical distribution of `n` players.
//!
//! The [`scenario`] module wires the experiments into JSON-configured runs
//! used by the `anon-games` binary.

pub mod congestion;
pub mod entry;
pub mod error;
pub mod finite;
pub mod game;
pub mod ldp;
pub mod measures;
pub mod poa;
pub mod scenario;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
