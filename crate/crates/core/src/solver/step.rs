//! One explicit Euler update of either scheme.
//!
//! Cell `i` is updated as
//!
//! ```text
//! u_i' = u_i + dt/h (F_{i+1/2} - F_{i-1/2}) + dt * source_i
//! ```
//!
//! with zero fluxes on both boundary faces. Saturations are never projected
//! back into `[0, 1]`: a value outside the band `[-1e-12, 1 + 1e-12]` is a
//! stability error.

use crate::error::{Error, Result};
use crate::physics::{ConstitutiveModel, Viscosity};

use super::flux::{interface_flux, Mobility};
use super::{DiscreteSources, Grid, LimitMode, Scheme, SimState, BOUND_TOL, TOL_SAT};

/// Per-step knobs shared by both schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub mobility: Mobility,
    /// Scale the injection down in any cell it would push above 1.
    pub cap_injection: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            mobility: Mobility::MixedPoint,
            cap_injection: true,
        }
    }
}

/// Extraction multiplier of the limit scheme in obstacle mode; zero in
/// every cell that is not saturated.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleMultiplier {
    pub f_hat: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: SimState,
    /// Fraction of the nominal injection actually applied per cell.
    pub injection_factor: Vec<f64>,
    pub obstacle: ObstacleMultiplier,
    /// Net source rate applied per cell (injection minus extraction).
    pub source: Vec<f64>,
    /// Smallest and largest interior interface flux.
    pub flux_range: (f64, f64),
}

/// `χ(c)`: 1 for saturated injected fluid, 0 otherwise.
pub fn chi(c: f64) -> f64 {
    if c >= 1.0 - TOL_SAT {
        1.0
    } else {
        0.0
    }
}

fn interface_fluxes(
    model: &ConstitutiveModel,
    scheme: Scheme,
    mobility: Mobility,
    u: &[f64],
    h: f64,
) -> Vec<f64> {
    let n = u.len();
    let mut f = vec![0.0; n + 1];
    for i in 1..n {
        f[i] = interface_flux(model, scheme, mobility, u[i - 1], u[i], h);
    }
    f
}

fn flux_range(f: &[f64]) -> (f64, f64) {
    let interior = &f[1..f.len() - 1];
    interior
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Largest factor in `[0, 1]` on `rate` keeping `base + dt * factor * rate <= 1`.
fn cap_factor(base: f64, dt: f64, rate: f64) -> f64 {
    if base + dt * rate <= 1.0 || rate <= 0.0 {
        1.0
    } else {
        ((1.0 - base) / (dt * rate)).clamp(0.0, 1.0)
    }
}

fn check_bounds(u: &[f64], time: f64) -> Result<()> {
    for (cell, &value) in u.iter().enumerate() {
        if !(-BOUND_TOL..=1.0 + BOUND_TOL).contains(&value) {
            return Err(Error::Stability {
                step: 0,
                time,
                cell,
                value,
            });
        }
    }
    Ok(())
}

fn check_inputs(state: &SimState, grid: &Grid, sources: &DiscreteSources, dt: f64) -> Result<()> {
    let n = grid.n_cells();
    if state.u.len() != n || sources.inj.len() != n || sources.ext.len() != n {
        return Err(Error::invalid(
            "state, sources and grid disagree on the cell count",
        ));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid(format!(
            "time step must be positive, got {dt}"
        )));
    }
    Ok(())
}

/// Two-phase update: water source `f(c) inj - f(u) ext`.
#[allow(clippy::too_many_arguments)]
pub fn step_two_phase(
    model: &ConstitutiveModel,
    mu: Viscosity,
    state: &SimState,
    grid: &Grid,
    sources: &DiscreteSources,
    c: f64,
    dt: f64,
    opts: StepOptions,
) -> Result<StepOutcome> {
    check_inputs(state, grid, sources, dt)?;
    let h = grid.h();
    let n = grid.n_cells();
    let f = interface_fluxes(model, Scheme::TwoPhase(mu), opts.mobility, &state.u, h);
    let fc = model.frac_flow(mu, c)?;

    let mut u_new = vec![0.0; n];
    let mut factor = vec![1.0; n];
    let mut source = vec![0.0; n];
    for i in 0..n {
        let u = state.u[i];
        let div = (f[i + 1] - f[i]) / h;
        let inj = fc * sources.inj[i];
        let ext = if sources.ext[i] > 0.0 {
            model.frac_flow(mu, u)? * sources.ext[i]
        } else {
            0.0
        };
        let base = u + dt * (div - ext);
        if opts.cap_injection && inj > 0.0 {
            factor[i] = cap_factor(base, dt, inj);
        }
        source[i] = factor[i] * inj - ext;
        u_new[i] = u + dt * (div + source[i]);
    }
    let t = state.t + dt;
    check_bounds(&u_new, t)?;
    Ok(StepOutcome {
        state: SimState::new(t, u_new),
        injection_factor: factor,
        obstacle: ObstacleMultiplier {
            f_hat: vec![0.0; n],
        },
        source,
        flux_range: flux_range(&f),
    })
}

/// Limit update: source `χ(c) inj`, plus `-f̂ ext` in obstacle mode.
#[allow(clippy::too_many_arguments)]
pub fn step_limit(
    model: &ConstitutiveModel,
    state: &SimState,
    grid: &Grid,
    sources: &DiscreteSources,
    c: f64,
    dt: f64,
    mode: LimitMode,
    opts: StepOptions,
) -> Result<StepOutcome> {
    check_inputs(state, grid, sources, dt)?;
    let h = grid.h();
    let n = grid.n_cells();
    let f = interface_fluxes(model, Scheme::Limit(mode), opts.mobility, &state.u, h);
    let chi_c = chi(c);

    let mut u_new = vec![0.0; n];
    let mut factor = vec![1.0; n];
    let mut f_hat = vec![0.0; n];
    let mut source = vec![0.0; n];
    for i in 0..n {
        let u = state.u[i];
        let div = (f[i + 1] - f[i]) / h;
        let inj = chi_c * sources.inj[i];
        let ext = sources.ext[i];
        let predicted = u + dt * (div + inj);
        if mode == LimitMode::Obstacle && u >= 1.0 - TOL_SAT && ext > 0.0 {
            // smallest multiplier that keeps the cell at or below saturation
            f_hat[i] = ((predicted - 1.0) / (dt * ext)).clamp(0.0, 1.0);
        }
        let base = u + dt * (div - f_hat[i] * ext);
        if opts.cap_injection && inj > 0.0 {
            factor[i] = cap_factor(base, dt, inj);
        }
        source[i] = factor[i] * inj - f_hat[i] * ext;
        u_new[i] = u + dt * (div + source[i]);
    }
    let t = state.t + dt;
    check_bounds(&u_new, t)?;
    Ok(StepOutcome {
        state: SimState::new(t, u_new),
        injection_factor: factor,
        obstacle: ObstacleMultiplier { f_hat },
        source,
        flux_range: flux_range(&f),
    })
}
