//! Saturation transforms of the two-phase system.
//!
//! All five are integrals from 0 to `s` of closure combinations against
//! `p_c'`:
//!
//! ```text
//! g(s)    = -∫ k_a p_c'                         (>= 0, nondecreasing)
//! zeta(s) =  ∫ sqrt(k_a) p_c'                   (<= 0, nonincreasing)
//! Q(s)    =  ∫ f p_c'                           (water share)
//! R(s)    =  ∫ k_a / (k_a + mu k_w) p_c'        (air share)
//! psi(s)  = -(1/mu) ∫ k_a k_w / M p_c'          (>= 0, nondecreasing)
//! ```
//!
//! Since `f + k_a / (k_a + mu k_w) = 1`, `R(s) + Q(s) = p_c(s) - p_c(0)`
//! exactly; the tests lean on this identity heavily.

mod quadrature;

pub use quadrature::Quadrature;

use std::io::Write;

use crate::error::{Error, Result};
use crate::physics::{ConstitutiveModel, Viscosity};

/// Number of points in the default uniform saturation grid.
pub const DEFAULT_TABLE_POINTS: usize = 1025;

fn check_s(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::invalid(format!("saturation {s} outside [0, 1]")))
    }
}

fn g_integrand(model: &ConstitutiveModel) -> impl Fn(f64) -> f64 + '_ {
    move |t| -model.k_a(t) * model.p_c_prime(t)
}

fn zeta_integrand(model: &ConstitutiveModel) -> impl Fn(f64) -> f64 + '_ {
    move |t| model.k_a(t).max(0.0).sqrt() * model.p_c_prime(t)
}

fn q_integrand(model: &ConstitutiveModel, mu: Viscosity) -> impl Fn(f64) -> f64 + '_ {
    move |t| {
        let kw = model.k_w(t);
        let ka = model.k_a(t);
        let den = mu.get() * kw + ka;
        if den <= 0.0 {
            return f64::NAN;
        }
        mu.get() * kw / den * model.p_c_prime(t)
    }
}

fn r_integrand(model: &ConstitutiveModel, mu: Viscosity) -> impl Fn(f64) -> f64 + '_ {
    move |t| {
        let ka = model.k_a(t);
        if ka == 0.0 {
            // k_a / (k_a + mu k_w) -> 0 when only the air mobility vanishes
            return 0.0;
        }
        ka / (ka + mu.get() * model.k_w(t)) * model.p_c_prime(t)
    }
}

fn psi_integrand(model: &ConstitutiveModel, mu: Viscosity) -> impl Fn(f64) -> f64 + '_ {
    // -(1/mu) k_a k_w / (k_w + k_a/mu) p_c' = k_w k_a / (mu k_w + k_a) (-p_c')
    move |t| {
        let kw = model.k_w(t);
        let ka = model.k_a(t);
        if ka == 0.0 || kw == 0.0 {
            return 0.0;
        }
        kw * ka / (mu.get() * kw + ka) * -model.p_c_prime(t)
    }
}

pub fn eval_g(model: &ConstitutiveModel, quad: &Quadrature, s: f64) -> Result<f64> {
    check_s(s)?;
    quad.integrate_unit(g_integrand(model), 0.0, s)
}

pub fn eval_zeta(model: &ConstitutiveModel, quad: &Quadrature, s: f64) -> Result<f64> {
    check_s(s)?;
    quad.integrate_unit(zeta_integrand(model), 0.0, s)
}

pub fn eval_q(model: &ConstitutiveModel, mu: Viscosity, quad: &Quadrature, s: f64) -> Result<f64> {
    check_s(s)?;
    quad.integrate_unit(q_integrand(model, mu), 0.0, s)
}

pub fn eval_r(model: &ConstitutiveModel, mu: Viscosity, quad: &Quadrature, s: f64) -> Result<f64> {
    check_s(s)?;
    quad.integrate_unit(r_integrand(model, mu), 0.0, s)
}

pub fn eval_psi(
    model: &ConstitutiveModel,
    mu: Viscosity,
    quad: &Quadrature,
    s: f64,
) -> Result<f64> {
    check_s(s)?;
    quad.integrate_unit(psi_integrand(model, mu), 0.0, s)
}

/// Tabulated transforms on a strictly increasing saturation grid.
///
/// `mu == None` marks the limit table used by the Richards-type scheme:
/// there `Q = 0` and `R = p_c - p_c(0)` on `[0, 1)`, and `psi` is undefined
/// (stored as NaN).
#[derive(Debug, Clone, PartialEq)]
pub struct TransformTable {
    pub mu: Option<Viscosity>,
    pub s_grid: Vec<f64>,
    pub g_vals: Vec<f64>,
    pub zeta_vals: Vec<f64>,
    pub q_vals: Vec<f64>,
    pub r_vals: Vec<f64>,
    pub psi_vals: Vec<f64>,
    pc0: f64,
}

pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("transform grid is empty"));
    }
    if grid.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::invalid("transform grid leaves [0, 1]"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("transform grid must be strictly increasing"));
    }
    Ok(())
}

/// Integrates `f` cumulatively along `grid` (starting from 0 at s = 0).
fn cumulative<F: Fn(f64) -> f64>(quad: &Quadrature, grid: &[f64], f: F) -> Result<Vec<f64>> {
    let pieces = grid.len().max(1) as f64;
    let tol = quad.abs_tol / pieces;
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = quad.integrate_unit_tol(&f, 0.0, grid[0], quad.abs_tol)?;
    out.push(acc);
    for w in grid.windows(2) {
        acc += quad
            .integrate_unit_tol(&f, w[0], w[1], tol)
            .map_err(|e| match e {
                Error::Integration { estimate, .. } => Error::Integration { s: w[1], estimate },
                other => other,
            })?;
        out.push(acc);
    }
    Ok(out)
}

pub fn build_table(
    model: &ConstitutiveModel,
    mu: Viscosity,
    quad: &Quadrature,
    grid: &[f64],
) -> Result<TransformTable> {
    check_grid(grid)?;
    Ok(TransformTable {
        mu: Some(mu),
        s_grid: grid.to_vec(),
        g_vals: cumulative(quad, grid, g_integrand(model))?,
        zeta_vals: cumulative(quad, grid, zeta_integrand(model))?,
        q_vals: cumulative(quad, grid, q_integrand(model, mu))?,
        r_vals: cumulative(quad, grid, r_integrand(model, mu))?,
        psi_vals: cumulative(quad, grid, psi_integrand(model, mu))?,
        pc0: model.p_c(0.0),
    })
}

/// Table for the `mu -> 0` limit.
pub fn build_limit_table(
    model: &ConstitutiveModel,
    quad: &Quadrature,
    grid: &[f64],
) -> Result<TransformTable> {
    check_grid(grid)?;
    let pc0 = model.p_c(0.0);
    Ok(TransformTable {
        mu: None,
        s_grid: grid.to_vec(),
        g_vals: cumulative(quad, grid, g_integrand(model))?,
        zeta_vals: cumulative(quad, grid, zeta_integrand(model))?,
        q_vals: vec![0.0; grid.len()],
        r_vals: grid.iter().map(|&s| model.p_c(s) - pc0).collect(),
        psi_vals: vec![f64::NAN; grid.len()],
        pc0,
    })
}

impl TransformTable {
    fn interp(&self, vals: &[f64], s: f64) -> f64 {
        let grid = &self.s_grid;
        if grid.len() == 1 || s <= grid[0] {
            return vals[0];
        }
        let last = grid.len() - 1;
        if s >= grid[last] {
            return vals[last];
        }
        let j = grid.partition_point(|&x| x <= s) - 1;
        let w = (s - grid[j]) / (grid[j + 1] - grid[j]);
        vals[j] + w * (vals[j + 1] - vals[j])
    }

    /// Piecewise-linear `Q` between grid points.
    pub fn q_at(&self, s: f64) -> f64 {
        self.interp(&self.q_vals, s)
    }

    /// `R` at an arbitrary saturation. Off the grid it is recovered from the
    /// interpolated `Q` through `R = p_c - p_c(0) - Q`, so that pressure
    /// reconstructions and `Q`-based energy functionals see the same field.
    pub fn r_at(&self, model: &ConstitutiveModel, s: f64) -> f64 {
        model.p_c(s) - self.pc0 - self.q_at(s)
    }

    pub fn g_at(&self, s: f64) -> f64 {
        self.interp(&self.g_vals, s)
    }

    pub fn zeta_at(&self, s: f64) -> f64 {
        self.interp(&self.zeta_vals, s)
    }

    pub fn len(&self) -> usize {
        self.s_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_grid.is_empty()
    }

    /// Writes `s,g,zeta,Q,R,psi` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "s,g,zeta,Q,R,psi")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                crate::output::fmt17(self.s_grid[i]),
                crate::output::fmt17(self.g_vals[i]),
                crate::output::fmt17(self.zeta_vals[i]),
                crate::output::fmt17(self.q_vals[i]),
                crate::output::fmt17(self.r_vals[i]),
                crate::output::fmt17(self.psi_vals[i]),
            )?;
        }
        Ok(())
    }
}
