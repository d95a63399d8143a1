//! Pressure reconstruction from a saturation profile.
//!
//! The water pressure is `P_i = -R(u_i) + h Σ_j R(u_j)`, which has zero mean
//! over the domain by construction. The global (air) pressure adds the
//! capillary pressure back: `P_g = P + p_c(u)`. The transform `R` is the one
//! matching the viscosity ratio the table was built for.

use crate::physics::ConstitutiveModel;
use crate::transforms::TransformTable;

use super::{Grid, SimState};

pub fn reconstruct_pressure(
    state: &SimState,
    table: &TransformTable,
    model: &ConstitutiveModel,
    grid: &Grid,
) -> Vec<f64> {
    let r: Vec<f64> = state.u.iter().map(|&u| table.r_at(model, u)).collect();
    let mean = grid.integral(&r);
    r.iter().map(|&ri| mean - ri).collect()
}

pub fn reconstruct_global_pressure(
    state: &SimState,
    table: &TransformTable,
    model: &ConstitutiveModel,
    grid: &Grid,
) -> Vec<f64> {
    let p = reconstruct_pressure(state, table, model, grid);
    p.iter()
        .zip(&state.u)
        .map(|(pi, &u)| pi + model.p_c(u))
        .collect()
}

/// Fills in `p` and `p_g` on `state`.
pub fn attach_pressures(
    state: &mut SimState,
    table: &TransformTable,
    model: &ConstitutiveModel,
    grid: &Grid,
) {
    let p = reconstruct_pressure(state, table, model, grid);
    let p_g = p
        .iter()
        .zip(&state.u)
        .map(|(pi, &u)| pi + model.p_c(u))
        .collect();
    state.p = Some(p);
    state.p_g = Some(p_g);
}
