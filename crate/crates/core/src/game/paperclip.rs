//! The two-round paperclip/staple apprenticeship game.
//!
//! Round 0: the human makes two items. Round 1: the robot makes up to 100.
//! Afterwards the game sits in a sink state. Both rounds pay
//! `theta * paperclips + (1 - theta) * staples` with `theta` in [0, 1].

use serde::{Deserialize, Serialize};

/// A production choice `(paperclips, staples)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Production {
    pub paperclips: u32,
    pub staples: u32,
}

impl Production {
    pub const fn new(paperclips: u32, staples: u32) -> Self {
        Production {
            paperclips,
            staples,
        }
    }

    pub fn reward(self, theta: f64) -> f64 {
        theta * f64::from(self.paperclips) + (1.0 - theta) * f64::from(self.staples)
    }
}

impl std::fmt::Display for Production {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.paperclips, self.staples)
    }
}

pub const HUMAN_ACTIONS: [Production; 3] = [
    Production::new(0, 2),
    Production::new(1, 1),
    Production::new(2, 0),
];

pub const ROBOT_ACTIONS: [Production; 3] = [
    Production::new(0, 90),
    Production::new(50, 50),
    Production::new(90, 0),
];

/// Round counter of the game state `(p, q, t)`; only `t` matters for play.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    Human,
    Robot,
    Sink,
}

impl Round {
    pub fn advance(self) -> Round {
        match self {
            Round::Human => Round::Robot,
            Round::Robot | Round::Sink => Round::Sink,
        }
    }
}

/// Total two-round payoff for one theta.
pub fn episode_reward(human: Production, robot: Production, theta: f64) -> f64 {
    human.reward(theta) + robot.reward(theta)
}
