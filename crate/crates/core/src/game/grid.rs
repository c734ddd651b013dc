use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::features::FeatureMap;
use super::World;
use crate::config::GameConfig;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

/// Grid moves. The declaration order is the tie-breaking order everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "N")]
    North,
    #[serde(rename = "S")]
    South,
    #[serde(rename = "E")]
    East,
    #[serde(rename = "W")]
    West,
    #[serde(rename = "noop")]
    Stay,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::North,
        Action::South,
        Action::East,
        Action::West,
        Action::Stay,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    pub fn inverse(self) -> Action {
        match self {
            Action::North => Action::South,
            Action::South => Action::North,
            Action::East => Action::West,
            Action::West => Action::East,
            Action::Stay => Action::Stay,
        }
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Action::North => (-1, 0),
            Action::South => (1, 0),
            Action::East => (0, 1),
            Action::West => (0, -1),
            Action::Stay => (0, 0),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::North => "N",
            Action::South => "S",
            Action::East => "E",
            Action::West => "W",
            Action::Stay => "noop",
        })
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" | "n" | "north" => Ok(Action::North),
            "S" | "s" | "south" => Ok(Action::South),
            "E" | "e" | "east" => Ok(Action::East),
            "W" | "w" | "west" => Ok(Action::West),
            "noop" | "no-op" | "stay" => Ok(Action::Stay),
            other => Err(Error::input(format!("unknown action `{other}`"))),
        }
    }
}

/// Grid coordinate; row 0 is the northern edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

/// Square navigation world with RBF features and a centered start.
#[derive(Debug, Clone)]
pub struct GridWorld {
    config: GameConfig,
    features: FeatureMap,
    transitions: Vec<[usize; 5]>,
}

impl GridWorld {
    /// Build a world whose feature centers are drawn without replacement from
    /// the grid cells, seeded by the config seed.
    pub fn new(config: GameConfig) -> Result<Self> {
        config.validate()?;
        let centers = sample_centers(&config);
        Self::with_centers(config, centers)
    }

    /// Build a world with explicit feature centers. `config.num_features` is
    /// overwritten by the number of centers.
    pub fn with_centers(mut config: GameConfig, centers: Vec<Cell>) -> Result<Self> {
        config.num_features = centers.len();
        config.validate()?;
        let n = config.grid_size;
        let features = FeatureMap::new(n, centers, config.rbf_bandwidth)?;
        let transitions = (0..n * n)
            .map(|s| {
                let cell = Cell::new(s / n, s % n);
                Action::ALL.map(|a| index_of(n, step_cell(n, cell, a)))
            })
            .collect();
        Ok(GridWorld {
            config,
            features,
            transitions,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn grid_size(&self) -> usize {
        self.config.grid_size
    }

    pub fn feature_map(&self) -> &FeatureMap {
        &self.features
    }

    pub fn cell_of(&self, state: usize) -> Cell {
        let n = self.config.grid_size;
        Cell::new(state / n, state % n)
    }

    pub fn state_of(&self, cell: Cell) -> Result<usize> {
        let n = self.config.grid_size;
        if cell.row >= n || cell.col >= n {
            return Err(Error::input(format!("cell {cell:?} outside a {n}x{n} grid")));
        }
        Ok(index_of(n, cell))
    }

    /// Feature vector of a state, checked against the grid bounds.
    pub fn feature_vector(&self, state: usize) -> Result<&[f64]> {
        if state >= self.num_states() {
            return Err(Error::input(format!(
                "state {state} outside a grid of {} cells",
                self.num_states()
            )));
        }
        Ok(self.features.row(state))
    }

    pub fn step(&self, state: usize, action: Action) -> usize {
        self.transitions[state][action.index()]
    }
}

impl World for GridWorld {
    fn num_states(&self) -> usize {
        self.config.grid_size * self.config.grid_size
    }

    fn num_actions(&self) -> usize {
        Action::ALL.len()
    }

    fn num_features(&self) -> usize {
        self.features.num_features()
    }

    fn next_state(&self, state: usize, action: usize) -> usize {
        self.transitions[state][action]
    }

    fn features(&self, state: usize) -> &[f64] {
        self.features.row(state)
    }

    fn initial_state(&self) -> usize {
        let mid = self.config.grid_size / 2;
        index_of(self.config.grid_size, Cell::new(mid, mid))
    }

    fn learning_steps(&self) -> usize {
        self.config.learning_steps
    }

    fn deployment_steps(&self) -> usize {
        self.config.deployment_steps()
    }

    fn gamma(&self) -> f64 {
        self.config.gamma
    }
}

fn index_of(n: usize, cell: Cell) -> usize {
    cell.row * n + cell.col
}

fn step_cell(n: usize, cell: Cell, action: Action) -> Cell {
    let (dr, dc) = action.delta();
    let row = cell.row as isize + dr;
    let col = cell.col as isize + dc;
    if row < 0 || col < 0 || row >= n as isize || col >= n as isize {
        cell
    } else {
        Cell::new(row as usize, col as usize)
    }
}

fn sample_centers(config: &GameConfig) -> Vec<Cell> {
    let n = config.grid_size;
    let mut rng = rng_from_seed(derive_seed(config.seed, "rbf-centers", config.num_features as u64));
    index::sample(&mut rng, n * n, config.num_features)
        .into_iter()
        .map(|s| Cell::new(s / n, s % n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn world(n: usize, centers: Vec<Cell>, bw: f64) -> GridWorld {
        let config = GameConfig {
            grid_size: n,
            rbf_bandwidth: bw,
            ..GameConfig::default()
        };
        GridWorld::with_centers(config, centers).unwrap()
    }

    #[test]
    fn rbf_at_center_is_one() {
        let w = world(5, vec![Cell::new(1, 3), Cell::new(4, 0)], 0.7);
        let s = w.state_of(Cell::new(1, 3)).unwrap();
        assert_eq!(w.feature_vector(s).unwrap()[0], 1.0);
    }

    #[test]
    fn rbf_one_cell_away() {
        let w = world(3, vec![Cell::new(0, 0)], 1.0);
        let s = w.state_of(Cell::new(0, 1)).unwrap();
        assert_relative_eq!(w.feature_vector(s).unwrap()[0], (-0.5f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(w.feature_vector(s).unwrap()[0], 0.6065, epsilon = 1e-4);
    }

    #[test]
    fn symmetric_centers_give_equal_components_at_middle() {
        let w = world(5, vec![Cell::new(0, 2), Cell::new(4, 2)], 1.3);
        let mid = w.initial_state();
        let f = w.feature_vector(mid).unwrap();
        assert_eq!(f[0], f[1]);
    }

    #[test]
    fn out_of_bounds_state_rejected() {
        let w = world(3, vec![Cell::new(0, 0)], 1.0);
        assert!(w.feature_vector(9).is_err());
        assert!(w.state_of(Cell::new(3, 0)).is_err());
    }

    #[test]
    fn edges_are_walls_and_start_is_centered() {
        let w = world(4, vec![Cell::new(0, 0)], 1.0);
        assert_eq!(w.cell_of(w.initial_state()), Cell::new(2, 2));
        let corner = w.state_of(Cell::new(0, 0)).unwrap();
        assert_eq!(w.step(corner, Action::North), corner);
        assert_eq!(w.step(corner, Action::West), corner);
        assert_eq!(w.cell_of(w.step(corner, Action::South)), Cell::new(1, 0));
    }

    #[test]
    fn interior_moves_are_invertible() {
        let w = world(5, vec![Cell::new(0, 0)], 1.0);
        for r in 1..4 {
            for c in 1..4 {
                let s = w.state_of(Cell::new(r, c)).unwrap();
                for a in Action::ALL {
                    assert_eq!(w.step(w.step(s, a), a.inverse()), s);
                }
            }
        }
    }

    #[test]
    fn feature_rows_peak_at_their_center() {
        let w = GridWorld::new(GameConfig::default()).unwrap();
        let n = w.num_features();
        for (k, center) in w.feature_map().centers().iter().enumerate() {
            let best = (0..w.num_states())
                .max_by(|&a, &b| w.features(a)[k].total_cmp(&w.features(b)[k]))
                .unwrap();
            assert_eq!(w.cell_of(best), *center);
        }
        assert!(w.feature_map().matrix().iter().all(|v| *v > 0.0 && *v <= 1.0));
        assert_eq!(w.feature_map().matrix().len(), w.num_states() * n);
    }

    #[test]
    fn centers_are_distinct_and_seeded() {
        let config = GameConfig {
            num_features: 10,
            ..GameConfig::default()
        };
        let a = GridWorld::new(config.clone()).unwrap();
        let b = GridWorld::new(config).unwrap();
        assert_eq!(a.feature_map().centers(), b.feature_map().centers());
        let mut cs = a.feature_map().centers().to_vec();
        cs.sort_by_key(|c| (c.row, c.col));
        cs.dedup();
        assert_eq!(cs.len(), 10);
    }

    #[test]
    fn action_parsing() {
        for a in Action::ALL {
            assert_eq!(a.to_string().parse::<Action>().unwrap(), a);
        }
        assert!("up".parse::<Action>().is_err());
    }
}
