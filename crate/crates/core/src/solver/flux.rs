//! Interface fluxes and the explicit step-size rule.
//!
//! A flux is evaluated at the interface between a left cell `u_left` and a
//! right cell `u_right`:
//!
//! ```text
//! F = -(p_c(u_right) - p_c(u_left)) / h * Λ
//! ```
//!
//! with the two-phase mobility `Λ = k_w(u_r) k_a(u_l) / (mu k_w(u_r) + k_a(u_l))`
//! and the limit mobility `Λ = k_w(u_r)`.

use crate::physics::{ConstitutiveModel, Viscosity};

use super::{Grid, Scheme, SimState};

/// Denominators below this are treated as the doubly-degenerate case.
const TINY_DENOMINATOR: f64 = 1e-300;
/// Floor of `|Δu|` in the divided-difference diffusivity.
const TINY_JUMP: f64 = 1e-14;

/// How the interface mobility combines the two neighbouring cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mobility {
    /// `k_w` from the right cell, `k_a` from the left cell.
    #[default]
    MixedPoint,
    /// Arithmetic mean of the single-cell mobilities.
    Symmetrized,
}

impl Mobility {
    pub fn as_str(self) -> &'static str {
        match self {
            Mobility::MixedPoint => "mixed",
            Mobility::Symmetrized => "symmetrized",
        }
    }
}

fn two_phase_lambda(mu: Viscosity, kw: f64, ka: f64) -> f64 {
    let den = mu.get() * kw + ka;
    if den < TINY_DENOMINATOR {
        log::debug!("two-phase mobility: vanishing denominator, flux set to 0");
        return 0.0;
    }
    kw * ka / den
}

/// Interface mobility of the active scheme.
pub fn interface_mobility(
    model: &ConstitutiveModel,
    scheme: Scheme,
    mobility: Mobility,
    u_left: f64,
    u_right: f64,
) -> f64 {
    match (scheme, mobility) {
        (Scheme::TwoPhase(mu), Mobility::MixedPoint) => {
            two_phase_lambda(mu, model.k_w(u_right), model.k_a(u_left))
        }
        (Scheme::TwoPhase(mu), Mobility::Symmetrized) => {
            let l = two_phase_lambda(mu, model.k_w(u_left), model.k_a(u_left));
            let r = two_phase_lambda(mu, model.k_w(u_right), model.k_a(u_right));
            0.5 * (l + r)
        }
        (Scheme::Limit(_), Mobility::MixedPoint) => model.k_w(u_right),
        (Scheme::Limit(_), Mobility::Symmetrized) => 0.5 * (model.k_w(u_left) + model.k_w(u_right)),
    }
}

pub fn interface_flux(
    model: &ConstitutiveModel,
    scheme: Scheme,
    mobility: Mobility,
    u_left: f64,
    u_right: f64,
    h: f64,
) -> f64 {
    let dp = model.p_c(u_right) - model.p_c(u_left);
    if dp == 0.0 {
        return 0.0;
    }
    let lambda = interface_mobility(model, scheme, mobility, u_left, u_right);
    if lambda == 0.0 {
        return 0.0;
    }
    -dp / h * lambda
}

/// Two-phase flux with the mixed-point mobility.
pub fn two_phase_flux(
    model: &ConstitutiveModel,
    mu: Viscosity,
    u_left: f64,
    u_right: f64,
    h: f64,
) -> f64 {
    interface_flux(
        model,
        Scheme::TwoPhase(mu),
        Mobility::MixedPoint,
        u_left,
        u_right,
        h,
    )
}

/// Limit-equation flux, mobility `k_w(u_right)`.
pub fn limit_flux(model: &ConstitutiveModel, u_left: f64, u_right: f64, h: f64) -> f64 {
    interface_flux(
        model,
        Scheme::Limit(super::LimitMode::PaperFaithful),
        Mobility::MixedPoint,
        u_left,
        u_right,
        h,
    )
}

/// Explicit step size: `sigma h^2 / max_i a_i` with the divided-difference
/// diffusivity `a_i = Λ_i |Δp_c| / max(|Δu|, 1e-14)`, capped by the nominal
/// step and the time left to the next stop.
#[allow(clippy::too_many_arguments)]
pub fn stable_dt(
    model: &ConstitutiveModel,
    scheme: Scheme,
    mobility: Mobility,
    state: &SimState,
    grid: &Grid,
    sigma: f64,
    k_nominal: f64,
    time_to_stop: f64,
) -> f64 {
    let a_max = state
        .u
        .windows(2)
        .map(|w| {
            let lambda = interface_mobility(model, scheme, mobility, w[0], w[1]);
            let dp = (model.p_c(w[1]) - model.p_c(w[0])).abs();
            lambda * dp / (w[1] - w[0]).abs().max(TINY_JUMP)
        })
        .fold(0.0_f64, f64::max);
    let h = grid.h();
    let cfl = if a_max > 0.0 {
        sigma * h * h / a_max
    } else {
        f64::INFINITY
    };
    cfl.min(k_nominal).min(time_to_stop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::LimitMode;

    fn model() -> ConstitutiveModel {
        ConstitutiveModel::paper_test()
    }

    fn mu(v: f64) -> Viscosity {
        Viscosity::new(v).unwrap()
    }

    #[test]
    fn flux_vanishes_for_equal_states() {
        let m = model();
        for u in [0.0, 0.3, 0.99, 1.0] {
            assert_eq!(two_phase_flux(&m, mu(1e-3), u, u, 0.01), 0.0);
            assert_eq!(limit_flux(&m, u, u, 0.01), 0.0);
        }
    }

    #[test]
    fn saturated_left_cell_blocks_two_phase_flux() {
        let m = model();
        for ur in [0.0, 0.2, 0.7] {
            assert_eq!(two_phase_flux(&m, mu(1e-8), 1.0, ur, 0.01), 0.0);
        }
    }

    #[test]
    fn dry_right_cell_blocks_limit_flux() {
        assert_eq!(limit_flux(&model(), 0.7, 0.0, 0.01), 0.0);
    }

    #[test]
    fn reference_values() {
        let m = model();
        // -100 (p_c(0.1) - p_c(0.7)) k_w(0.1) k_a(0.7) / (1e-8 k_w(0.1) + k_a(0.7))
        let f = two_phase_flux(&m, mu(1e-8), 0.7, 0.1, 0.01);
        assert!((f + 1.267_949_147_879_931).abs() < 1e-12, "{f}");
        let l = limit_flux(&m, 0.7, 0.1, 0.01);
        assert!((l + 1.267_949_192_431_122_7).abs() < 1e-12, "{l}");
        assert!((f - l).abs() < 1e-6 * l.abs());
    }

    #[test]
    fn doubly_degenerate_interface_gives_zero() {
        // k_w(0) = 0 on the right and k_a(1) = 0 on the left
        assert_eq!(two_phase_flux(&model(), mu(1.0), 1.0, 0.0, 0.01), 0.0);
    }

    #[test]
    fn stable_dt_uniform_state_uses_caps() {
        let m = model();
        let g = Grid::new(10).unwrap();
        let s = SimState::new(0.0, vec![0.4; 10]);
        let dt = stable_dt(
            &m,
            Scheme::TwoPhase(mu(1e-2)),
            Mobility::MixedPoint,
            &s,
            &g,
            0.45,
            1e-3,
            5e-4,
        );
        assert_eq!(dt, 5e-4);
        let dt = stable_dt(
            &m,
            Scheme::TwoPhase(mu(1e-2)),
            Mobility::MixedPoint,
            &s,
            &g,
            0.45,
            1e-3,
            1.0,
        );
        assert_eq!(dt, 1e-3);
    }

    #[test]
    fn stable_dt_two_cell_limit_example() {
        let m = model();
        let g = Grid::new(100).unwrap();
        let s = SimState::new(0.0, vec![0.7, 0.1]);
        let dt = stable_dt(
            &m,
            Scheme::Limit(LimitMode::PaperFaithful),
            Mobility::MixedPoint,
            &s,
            &g,
            0.4,
            1.0,
            1.0,
        );
        assert!((dt - 1.892_820_323_027_551e-3).abs() < 1e-12, "{dt}");
        let capped = stable_dt(
            &m,
            Scheme::Limit(LimitMode::PaperFaithful),
            Mobility::MixedPoint,
            &s,
            &g,
            0.4,
            1e-3,
            1.0,
        );
        assert_eq!(capped, 1e-3);
    }

    #[test]
    fn symmetrized_mobility_lets_saturated_cell_drain() {
        let m = model();
        // negative interface flux moves water from the left cell to the right
        let f = interface_flux(
            &m,
            Scheme::TwoPhase(mu(1e-2)),
            Mobility::Symmetrized,
            1.0,
            0.9,
            0.01,
        );
        assert!(f < 0.0);
    }
}
