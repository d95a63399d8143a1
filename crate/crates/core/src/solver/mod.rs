//! Explicit finite-volume time stepping for the two-phase saturation
//! equation and for its limit (Richards-type) equation on `[0, 1]` with
//! no-flux boundaries.

mod flux;
mod grid;
mod pressure;
mod sources;
mod step;

pub use flux::{
    interface_flux, interface_mobility, limit_flux, stable_dt, two_phase_flux, Mobility,
};
pub use grid::{build_grid, Grid};
pub use pressure::{attach_pressures, reconstruct_global_pressure, reconstruct_pressure};
pub use sources::{discretize_sources, DiscreteSources, SourceSpec, SourceTerm};
pub use step::{chi, step_limit, step_two_phase, ObstacleMultiplier, StepOptions, StepOutcome};

use std::fmt;

use crate::error::{Error, Result};
use crate::physics::{ConstitutiveModel, Viscosity};
use crate::transforms::TransformTable;

/// Saturations within this distance of 1 count as saturated for `χ` and `H`.
pub const TOL_SAT: f64 = 1e-9;
/// Admissible overshoot of `[0, 1]` before a step is rejected.
pub const BOUND_TOL: f64 = 1e-12;
/// Relative slack used when landing a step on a stop time.
const LANDING_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    /// Injection `χ(c) inj` only, no extraction term.
    PaperFaithful,
    /// Adds the extraction `-f̂ ext` with `f̂ ∈ H(u)`.
    Obstacle,
}

impl LimitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LimitMode::PaperFaithful => "paper",
            LimitMode::Obstacle => "obstacle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    TwoPhase(Viscosity),
    Limit(LimitMode),
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::TwoPhase(mu) => write!(f, "two-phase(mu={:?})", mu.get()),
            Scheme::Limit(mode) => write!(f, "limit({})", mode.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: Vec<f64>,
    pub p: Option<Vec<f64>>,
    pub p_g: Option<Vec<f64>>,
}

impl SimState {
    pub fn new(t: f64, u: Vec<f64>) -> Self {
        Self {
            t,
            u,
            p: None,
            p_g: None,
        }
    }
}

/// Samples `u0` at the cell centres.
pub fn initial_state(u0: impl Fn(f64) -> f64, grid: &Grid) -> Result<SimState> {
    let u: Vec<f64> = grid.centers().iter().map(|&x| u0(x)).collect();
    if let Some((i, v)) = u
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(Error::invalid(format!(
            "initial saturation {v} in cell {i} outside [0, 1]"
        )));
    }
    Ok(SimState::new(0.0, u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Recording {
    /// Every accepted step.
    Dense,
    /// Initial state and the stop times only.
    #[default]
    Snapshots,
}

impl Recording {
    pub fn as_str(self) -> &'static str {
        match self {
            Recording::Dense => "dense",
            Recording::Snapshots => "snapshots",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub sigma: f64,
    pub k_nominal: f64,
    /// Use `k_nominal` as a fixed step and skip the stability rule.
    pub fixed_step: bool,
    pub recording: Recording,
    pub step: StepOptions,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            sigma: 0.45,
            k_nominal: 1e-4,
            fixed_step: false,
            recording: Recording::Snapshots,
            step: StepOptions::default(),
        }
    }
}

/// Everything a run needs apart from the initial data and stop times.
#[derive(Debug, Clone)]
pub struct Problem {
    pub model: ConstitutiveModel,
    pub scheme: Scheme,
    pub grid: Grid,
    pub sources: DiscreteSources,
    pub c: f64,
}

impl Problem {
    pub fn step(&self, state: &SimState, dt: f64, opts: StepOptions) -> Result<StepOutcome> {
        match self.scheme {
            Scheme::TwoPhase(mu) => step_two_phase(
                &self.model,
                mu,
                state,
                &self.grid,
                &self.sources,
                self.c,
                dt,
                opts,
            ),
            Scheme::Limit(mode) => step_limit(
                &self.model,
                state,
                &self.grid,
                &self.sources,
                self.c,
                dt,
                mode,
                opts,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<SimState>,
    /// Every accepted step size, in order, whatever the recording mode.
    pub dts: Vec<f64>,
    pub flux_ranges: Vec<(f64, f64)>,
    pub k_nominal: f64,
    pub scheme: Scheme,
    pub recording: Recording,
}

impl Trajectory {
    pub fn is_dense(&self) -> bool {
        self.recording == Recording::Dense && self.states.len() == self.dts.len() + 1
    }

    pub fn final_state(&self) -> &SimState {
        self.states
            .last()
            .expect("trajectory always holds the initial state")
    }

    /// Recorded state at time `t`, if any.
    pub fn state_at(&self, t: f64) -> Option<&SimState> {
        self.states
            .iter()
            .find(|s| (s.t - t).abs() <= LANDING_SLACK * t.abs().max(1.0))
    }
}

fn check_stops(t_end: f64, snapshots: &[f64]) -> Result<Vec<f64>> {
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::invalid(format!(
            "horizon must be a nonnegative number, got {t_end}"
        )));
    }
    let mut stops = Vec::with_capacity(snapshots.len() + 1);
    for &s in snapshots {
        if !(s > 0.0 && s <= t_end) {
            return Err(Error::invalid(format!(
                "snapshot time {s} outside (0, {t_end}]"
            )));
        }
        if stops.last().is_some_and(|&prev| s <= prev) {
            return Err(Error::invalid("snapshot times must be strictly increasing"));
        }
        stops.push(s);
    }
    if t_end > 0.0 && stops.last() != Some(&t_end) {
        stops.push(t_end);
    }
    Ok(stops)
}

/// Advances `initial` to `t_end`, landing exactly on every snapshot time.
/// When `table` is given, recorded states carry reconstructed pressures.
pub fn run(
    problem: &Problem,
    initial: SimState,
    t_end: f64,
    snapshots: &[f64],
    settings: &SolverSettings,
    table: Option<&TransformTable>,
) -> Result<Trajectory> {
    let stops = check_stops(t_end, snapshots)?;
    if !(settings.k_nominal > 0.0) {
        return Err(Error::invalid("nominal time step must be positive"));
    }
    if !settings.fixed_step && !(settings.sigma > 0.0) {
        return Err(Error::invalid("sigma must be positive"));
    }
    if initial.u.len() != problem.grid.n_cells() {
        return Err(Error::invalid("initial state does not match the grid"));
    }

    let record = |mut s: SimState| {
        if let Some(tab) = table {
            attach_pressures(&mut s, tab, &problem.model, &problem.grid);
        }
        s
    };

    let mut state = initial;
    let mut states = vec![record(state.clone())];
    let mut dts = Vec::new();
    let mut flux_ranges = Vec::new();

    for &stop in &stops {
        while state.t < stop {
            let remaining = stop - state.t;
            let mut dt = if settings.fixed_step {
                settings.k_nominal.min(remaining)
            } else {
                stable_dt(
                    &problem.model,
                    problem.scheme,
                    settings.step.mobility,
                    &state,
                    &problem.grid,
                    settings.sigma,
                    settings.k_nominal,
                    remaining,
                )
            };
            let landing = remaining - dt <= LANDING_SLACK * dt;
            if landing {
                dt = remaining;
            }
            let step_index = dts.len();
            let out = problem
                .step(&state, dt, settings.step)
                .map_err(|e| match e {
                    Error::Stability {
                        time, cell, value, ..
                    } => Error::Stability {
                        step: step_index,
                        time,
                        cell,
                        value,
                    },
                    other => other,
                })?;
            state = out.state;
            if landing {
                state.t = stop;
            }
            dts.push(dt);
            flux_ranges.push(out.flux_range);
            if settings.recording == Recording::Dense {
                states.push(record(state.clone()));
            }
        }
        if settings.recording == Recording::Snapshots {
            states.push(record(state.clone()));
        }
    }

    Ok(Trajectory {
        states,
        dts,
        flux_ranges,
        k_nominal: settings.k_nominal,
        scheme: problem.scheme,
        recording: settings.recording,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_problem(n: usize, scheme: Scheme) -> Problem {
        Problem {
            model: ConstitutiveModel::paper_test(),
            scheme,
            grid: Grid::new(n).unwrap(),
            sources: DiscreteSources::zero(n),
            c: 0.7,
        }
    }

    #[test]
    fn initial_state_samples_centres() {
        let g = Grid::new(3).unwrap();
        let s = initial_state(|_| 1.0, &g).unwrap();
        assert_eq!(s.u, vec![1.0; 3]);
        let s = initial_state(|x| if x <= 1.0 / 3.0 { 0.1 } else { 0.7 }, &g).unwrap();
        assert_eq!(s.u, vec![0.1, 0.7, 0.7]);
        let s = initial_state(|_| 0.42, &g).unwrap();
        assert!(s.u.iter().all(|&u| u == 0.42));
        assert_eq!(s.t, 0.0);
        assert!(initial_state(|_| 1.2, &g).is_err());
    }

    #[test]
    fn zero_horizon_gives_initial_state_only() {
        let p = zero_problem(4, Scheme::Limit(LimitMode::PaperFaithful));
        let tr = run(
            &p,
            SimState::new(0.0, vec![0.5; 4]),
            0.0,
            &[],
            &SolverSettings::default(),
            None,
        )
        .unwrap();
        assert_eq!(tr.states.len(), 1);
        assert!(tr.dts.is_empty());
    }

    #[test]
    fn lands_exactly_on_snapshots() {
        let p = zero_problem(10, Scheme::TwoPhase(Viscosity::new(1e-2).unwrap()));
        let g = &p.grid;
        let init = initial_state(|x| if x < 0.5 { 0.2 } else { 0.8 }, g).unwrap();
        let settings = SolverSettings {
            k_nominal: 3e-4,
            ..SolverSettings::default()
        };
        let tr = run(&p, init, 0.01, &[0.001, 0.005, 0.01], &settings, None).unwrap();
        let times: Vec<f64> = tr.states.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.0, 0.001, 0.005, 0.01]);
        assert!(tr.dts.iter().all(|&dt| dt > 0.0));
    }

    #[test]
    fn dense_recording_keeps_every_step() {
        let p = zero_problem(10, Scheme::Limit(LimitMode::Obstacle));
        let init = initial_state(|x| 0.3 + 0.5 * x, &p.grid).unwrap();
        let settings = SolverSettings {
            recording: Recording::Dense,
            ..SolverSettings::default()
        };
        let tr = run(&p, init, 0.002, &[0.001], &settings, None).unwrap();
        assert!(tr.is_dense());
        assert!(tr.states.windows(2).all(|w| w[1].t > w[0].t));
        assert!(tr.state_at(0.001).is_some());
    }

    #[test]
    fn rejects_bad_stop_times() {
        let p = zero_problem(4, Scheme::Limit(LimitMode::PaperFaithful));
        let init = SimState::new(0.0, vec![0.5; 4]);
        let s = SolverSettings::default();
        assert!(run(&p, init.clone(), 0.01, &[0.02], &s, None).is_err());
        assert!(run(&p, init.clone(), 0.01, &[0.005, 0.002], &s, None).is_err());
        assert!(run(&p, init, -1.0, &[], &s, None).is_err());
    }

    #[test]
    fn stability_error_carries_step_index() {
        let mut p = zero_problem(20, Scheme::Limit(LimitMode::PaperFaithful));
        p.c = 1.0;
        let init = initial_state(|x| if x < 0.5 { 0.05 } else { 0.95 }, &p.grid).unwrap();
        let settings = SolverSettings {
            sigma: 5.0,
            k_nominal: 1e-2,
            ..SolverSettings::default()
        };
        let err = run(&p, init, 0.5, &[], &settings, None).unwrap_err();
        assert!(matches!(err, Error::Stability { .. }), "{err}");
    }
}
