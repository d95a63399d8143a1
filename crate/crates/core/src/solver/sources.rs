use crate::error::{Error, Result};

use super::Grid;

/// One source field: nothing, a point source, or an explicit per-cell rate.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceTerm {
    None,
    Dirac { at: f64, strength: f64 },
    Cells(Vec<f64>),
}

impl SourceTerm {
    /// Total rate `∫ s dx`.
    pub fn total(&self, h: f64) -> f64 {
        match self {
            SourceTerm::None => 0.0,
            SourceTerm::Dirac { strength, .. } => *strength,
            SourceTerm::Cells(v) => h * v.iter().sum::<f64>(),
        }
    }

    fn discretize(&self, grid: &Grid) -> Result<Vec<f64>> {
        let n = grid.n_cells();
        match self {
            SourceTerm::None => Ok(vec![0.0; n]),
            SourceTerm::Dirac { at, strength } => {
                if *strength < 0.0 {
                    return Err(Error::invalid("source strength must be nonnegative"));
                }
                let mut v = vec![0.0; n];
                v[grid.cell_of(*at)?] = strength / grid.h();
                Ok(v)
            }
            SourceTerm::Cells(v) => {
                if v.len() != n {
                    return Err(Error::invalid(format!(
                        "per-cell source has {} entries for {n} cells",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !(*x >= 0.0)) {
                    return Err(Error::invalid("per-cell source rates must be nonnegative"));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Injection/extraction fields and the saturation `c` of the injected fluid.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub injection: SourceTerm,
    pub extraction: SourceTerm,
    pub c: f64,
    /// Adds the mean imbalance `mean(inj - ext)` to the extraction so that
    /// the discrete sources integrate to zero. A no-op for balanced data.
    pub balance: bool,
}

impl SourceSpec {
    pub fn none() -> Self {
        Self {
            injection: SourceTerm::None,
            extraction: SourceTerm::None,
            c: 1.0,
            balance: false,
        }
    }

    pub fn validate(&self, u_m: f64) -> Result<()> {
        if !(self.c >= u_m && self.c <= 1.0) {
            return Err(Error::invalid(format!(
                "injected saturation c = {} must lie in [u_m, 1] = [{u_m}, 1]",
                self.c
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSources {
    pub inj: Vec<f64>,
    pub ext: Vec<f64>,
}

impl DiscreteSources {
    pub fn zero(n: usize) -> Self {
        Self {
            inj: vec![0.0; n],
            ext: vec![0.0; n],
        }
    }
}

/// Deposits each Dirac as `w / h` in the single cell containing it.
pub fn discretize_sources(spec: &SourceSpec, grid: &Grid) -> Result<DiscreteSources> {
    let inj = spec.injection.discretize(grid)?;
    let mut ext = spec.extraction.discretize(grid)?;
    if spec.balance {
        let imbalance = grid.integral(&inj) - grid.integral(&ext);
        if imbalance != 0.0 {
            // the domain has unit length, so the mean equals the integral
            for e in &mut ext {
                *e += imbalance;
            }
            if ext.iter().any(|&e| e < 0.0) {
                return Err(Error::invalid(
                    "balancing the sources would make the extraction negative",
                ));
            }
        }
    }
    Ok(DiscreteSources { inj, ext })
}
