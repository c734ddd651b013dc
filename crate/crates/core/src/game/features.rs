use serde::{Deserialize, Serialize};

use super::grid::Cell;
use crate::error::{Error, Result};

/// Radial basis features with centers on grid cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    centers: Vec<Cell>,
    bandwidth: f64,
    grid_size: usize,
    /// Row-major `|S| x centers.len()`.
    matrix: Vec<f64>,
}

impl FeatureMap {
    pub fn new(grid_size: usize, centers: Vec<Cell>, bandwidth: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::input("at least one feature center is required"));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::input(format!("bandwidth {bandwidth} must be positive")));
        }
        if let Some(c) = centers.iter().find(|c| c.row >= grid_size || c.col >= grid_size) {
            return Err(Error::input(format!("center {c:?} lies outside the grid")));
        }
        let n = centers.len();
        let mut matrix = Vec::with_capacity(grid_size * grid_size * n);
        for row in 0..grid_size {
            for col in 0..grid_size {
                let cell = Cell { row, col };
                matrix.extend(centers.iter().map(|c| rbf(cell, *c, bandwidth)));
            }
        }
        Ok(FeatureMap {
            centers,
            bandwidth,
            grid_size,
            matrix,
        })
    }

    pub fn centers(&self) -> &[Cell] {
        &self.centers
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn num_features(&self) -> usize {
        self.centers.len()
    }

    pub fn row(&self, state: usize) -> &[f64] {
        let n = self.centers.len();
        &self.matrix[state * n..(state + 1) * n]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }
}

fn rbf(cell: Cell, center: Cell, bandwidth: f64) -> f64 {
    let dr = cell.row as f64 - center.row as f64;
    let dc = cell.col as f64 - center.col as f64;
    (-(dr * dr + dc * dc) / (2.0 * bandwidth * bandwidth)).exp()
}
