use crate::error::{Error, Result};

/// Uniform cell partition of `[0, 1]`; the width is always derived from the
/// cell count.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n_cells: usize,
    h: f64,
    centers: Vec<f64>,
}

impl Grid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::invalid(format!(
                "grid needs at least 2 cells, got {n_cells}"
            )));
        }
        let h = 1.0 / n_cells as f64;
        let centers = (0..n_cells).map(|i| (i as f64 + 0.5) * h).collect();
        Ok(Self {
            n_cells,
            h,
            centers,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Index of the cell containing `x`; `x = 0` maps to the first cell and
    /// `x = 1` to the last.
    pub fn cell_of(&self, x: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid(format!("location {x} outside [0, 1]")));
        }
        Ok(((x * self.n_cells as f64) as usize).min(self.n_cells - 1))
    }

    /// `h * sum(v)`
    pub fn integral(&self, v: &[f64]) -> f64 {
        self.h * v.iter().sum::<f64>()
    }
}

pub fn build_grid(n_cells: usize) -> Result<Grid> {
    Grid::new(n_cells)
}
