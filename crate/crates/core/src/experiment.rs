//! Turning a [`RunConfig`] into trajectories.

use crate::config::{RunConfig, SchemeKind};
use crate::diagnostics::{cylinder_l2, sup_gap};
use crate::error::Result;
use crate::physics::{ConstitutiveModel, Viscosity};
use crate::solver::{self, discretize_sources, initial_state, Grid, Problem, Scheme, Trajectory};
use crate::transforms::{build_limit_table, build_table, uniform_grid, Quadrature, TransformTable};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub grid: Grid,
    pub model: ConstitutiveModel,
    pub table: TransformTable,
    pub trajectory: Trajectory,
}

pub fn scheme_of(config: &RunConfig) -> Result<Scheme> {
    Ok(match config.scheme {
        SchemeKind::TwoPhase => Scheme::TwoPhase(Viscosity::new(config.mu)?),
        SchemeKind::Limit => Scheme::Limit(config.limit_mode),
    })
}

pub fn transform_table(config: &RunConfig, model: &ConstitutiveModel) -> Result<TransformTable> {
    let grid = uniform_grid(config.table_points);
    let quad = Quadrature::default();
    match config.scheme {
        SchemeKind::TwoPhase => build_table(model, Viscosity::new(config.mu)?, &quad, &grid),
        SchemeKind::Limit => build_limit_table(model, &quad, &grid),
    }
}

/// Validates `config`, runs it and attaches pressures to every recorded state.
pub fn run_config(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let model = config.model();
    let grid = Grid::new(config.n_cells)?;
    let problem = Problem {
        model: model.clone(),
        scheme: scheme_of(config)?,
        sources: discretize_sources(&config.sources, &grid)?,
        grid: grid.clone(),
        c: config.sources.c,
    };
    let init = initial_state(|x| config.u0.value(x), &grid)?;
    let table = transform_table(config, &model)?;
    log::info!(
        "{}: {} on {} cells to T = {}",
        config.run_id,
        problem.scheme,
        config.n_cells,
        config.t_end
    );
    let trajectory = solver::run(
        &problem,
        init,
        config.t_end,
        &config.snapshots,
        &config.solver_settings(),
        Some(&table),
    )?;
    log::info!("{}: {} steps", config.run_id, trajectory.dts.len());
    Ok(RunOutput {
        grid,
        model,
        table,
        trajectory,
    })
}

/// Two-phase and limit runs of the same configuration.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub two_phase: RunOutput,
    pub limit: RunOutput,
    /// Snapshot times followed by `T` (deduplicated).
    pub times: Vec<f64>,
    pub sup_gaps: Vec<f64>,
    pub l2_gap: f64,
}

pub fn compare(config: &RunConfig) -> Result<Comparison> {
    let mut tp = config.clone();
    tp.scheme = SchemeKind::TwoPhase;
    let mut lim = config.clone();
    lim.scheme = SchemeKind::Limit;
    let two_phase = run_config(&tp)?;
    let limit = run_config(&lim)?;

    let mut times = config.snapshots.clone();
    if times.last() != Some(&config.t_end) && config.t_end > 0.0 {
        times.push(config.t_end);
    }
    let mut sup_gaps = Vec::with_capacity(times.len());
    for &t in &times {
        let a = two_phase
            .trajectory
            .state_at(t)
            .expect("stop times are recorded");
        let b = limit
            .trajectory
            .state_at(t)
            .expect("stop times are recorded");
        sup_gaps.push(sup_gap(&a.u, &b.u));
    }
    let l2_gap = cylinder_l2(&two_phase.trajectory, &limit.trajectory, &times)?;
    Ok(Comparison {
        two_phase,
        limit,
        times,
        sup_gaps,
        l2_gap,
    })
}
