//! Cooperative inverse reinforcement learning at desk scale.
//!
//! A human who knows the reward parameters demonstrates in a gridworld, a
//! robot infers the parameters with maximum-entropy IRL and then acts alone.
//! The crate covers the game definitions, exact and soft planning, the
//! particle posterior, expert and instructive demonstrators, the evaluation
//! measures, and the equilibrium analysis of the paperclip game.

pub mod belief;
pub mod config;
pub mod demonstrators;
pub mod episode;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod metrics;
pub mod planning;
pub mod seed;

pub use config::{ConfigOverrides, Eta, GameConfig};
pub use error::{Error, Result};
pub use game::{Action, Cell, GridWorld, RewardParams, TabularWorld, Trajectory, World};
