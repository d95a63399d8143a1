//! Discrete energy and translate functionals over recorded trajectories,
//! and the viscosity sweep comparing the two-phase scheme with its limit.
//!
//! All space-time sums use the left-endpoint rule in time: state `n` is
//! held for `dts[n]`. Spatial gradients are forward differences, weighted
//! with the left cell where a coefficient appears, matching the flux
//! stencil of the solver.

use std::io::Write;

use crate::config::{RunConfig, SchemeKind};
use crate::error::{Error, Result};
use crate::experiment::{self, RunOutput};
use crate::output::fmt17;
use crate::physics::{ConstitutiveModel, Viscosity};
use crate::solver::{Recording, Scheme, SimState, Trajectory};
use crate::transforms::TransformTable;

/// Relative spread tolerated in the step sizes of a time-translate run.
const UNIFORM_DT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub name: String,
    pub value: f64,
    pub mu: Option<f64>,
    pub normalization: String,
    /// Translate length (`xi^2` or `tau`) the value is compared against.
    pub scale: Option<f64>,
}

impl EstimateReport {
    fn new(
        name: impl Into<String>,
        value: f64,
        mu: Option<f64>,
        normalization: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            value,
            mu,
            normalization: normalization.into(),
            scale: None,
        }
    }

    /// `value / scale` for translate estimates.
    pub fn ratio(&self) -> Option<f64> {
        self.scale.filter(|&s| s > 0.0).map(|s| self.value / s)
    }
}

fn require_dense(traj: &Trajectory) -> Result<()> {
    if traj.is_dense() {
        Ok(())
    } else {
        Err(Error::InsufficientData(
            "estimate functionals need a dense trajectory (recording = dense)".into(),
        ))
    }
}

fn grid_h(traj: &Trajectory) -> f64 {
    1.0 / traj.states[0].u.len() as f64
}

/// `Σ_n dt_n h Σ_i weight(u_i) [(w_{i+1} - w_i)/h]^2` for a per-state field `w`.
fn gradient_energy(
    traj: &Trajectory,
    field: impl Fn(&SimState) -> Vec<f64>,
    weight: impl Fn(f64) -> f64,
) -> f64 {
    let h = grid_h(traj);
    traj.dts
        .iter()
        .zip(&traj.states)
        .map(|(&dt, s)| {
            let w = field(s);
            let sum: f64 = w
                .windows(2)
                .zip(&s.u)
                .map(|(pair, &ul)| {
                    let d = (pair[1] - pair[0]) / h;
                    weight(ul) * d * d
                })
                .sum();
            dt * h * sum
        })
        .sum()
}

fn table_mu(table: &TransformTable) -> Result<Viscosity> {
    table
        .mu
        .ok_or_else(|| Error::invalid("air energy needs a two-phase transform table"))
}

/// Air-phase energy `Σ dt h k_a(u_i) [((P + p_c)_{i+1} - (P + p_c)_i)/h]^2`,
/// evaluated through `(P + p_c)_{i+1} - (P + p_c)_i = Q(u_{i+1}) - Q(u_i)`.
pub fn est_air_energy(
    traj: &Trajectory,
    table: &TransformTable,
    model: &ConstitutiveModel,
) -> Result<EstimateReport> {
    require_dense(traj)?;
    let mu = table_mu(table)?;
    let value = gradient_energy(
        traj,
        |s| s.u.iter().map(|&u| table.q_at(u)).collect(),
        |u| model.k_a(u),
    );
    Ok(EstimateReport::new(
        "air_energy",
        value,
        Some(mu.get()),
        "sum dt*h*k_a(u_i)*((Q(u_{i+1})-Q(u_i))/h)^2",
    ))
}

/// Same functional from the stored pressures, `P + p_c(u)` directly.
pub fn est_air_energy_from_pressures(
    traj: &Trajectory,
    model: &ConstitutiveModel,
) -> Result<EstimateReport> {
    require_dense(traj)?;
    let missing = traj.states.iter().any(|s| s.p.is_none());
    if missing {
        return Err(Error::InsufficientData(
            "trajectory carries no pressures".into(),
        ));
    }
    let value = gradient_energy(
        traj,
        |s| {
            let p = s.p.as_ref().expect("checked above");
            p.iter()
                .zip(&s.u)
                .map(|(pi, &u)| pi + model.p_c(u))
                .collect()
        },
        |u| model.k_a(u),
    );
    Ok(EstimateReport::new(
        "air_energy_pressure_form",
        value,
        scheme_mu(traj),
        "sum dt*h*k_a(u_i)*(((P+p_c)_{i+1}-(P+p_c)_i)/h)^2",
    ))
}

pub fn est_pressure_energy(traj: &Trajectory) -> Result<EstimateReport> {
    require_dense(traj)?;
    if traj.states.iter().any(|s| s.p.is_none()) {
        return Err(Error::InsufficientData(
            "trajectory carries no pressures".into(),
        ));
    }
    let value = gradient_energy(traj, |s| s.p.clone().expect("checked above"), |_| 1.0);
    Ok(EstimateReport::new(
        "pressure_energy",
        value,
        scheme_mu(traj),
        "sum dt*h*((P_{i+1}-P_i)/h)^2",
    ))
}

/// `|∇ζ(u)|^2` and its companion `|∇g(u)|^2`.
pub fn est_zeta_energy(
    traj: &Trajectory,
    table: &TransformTable,
) -> Result<(EstimateReport, EstimateReport)> {
    require_dense(traj)?;
    let zeta = gradient_energy(
        traj,
        |s| s.u.iter().map(|&u| table.zeta_at(u)).collect(),
        |_| 1.0,
    );
    let g = gradient_energy(
        traj,
        |s| s.u.iter().map(|&u| table.g_at(u)).collect(),
        |_| 1.0,
    );
    let mu = scheme_mu(traj);
    Ok((
        EstimateReport::new(
            "zeta_energy",
            zeta,
            mu,
            "sum dt*h*((zeta(u_{i+1})-zeta(u_i))/h)^2",
        ),
        EstimateReport::new("g_energy", g, mu, "sum dt*h*((g(u_{i+1})-g(u_i))/h)^2"),
    ))
}

fn scheme_mu(traj: &Trajectory) -> Option<f64> {
    match traj.scheme {
        Scheme::TwoPhase(mu) => Some(mu.get()),
        Scheme::Limit(_) => None,
    }
}

/// `Σ_n dt_n h Σ_i [g(u_{i+k}) - g(u_i)]^2`, reported against `xi^2 = (k h)^2`.
pub fn space_translate(
    traj: &Trajectory,
    table: &TransformTable,
    k_cells: usize,
) -> Result<EstimateReport> {
    require_dense(traj)?;
    let n = traj.states[0].u.len();
    if k_cells >= n {
        return Err(Error::invalid(format!(
            "shift of {k_cells} cells on a {n}-cell grid"
        )));
    }
    let h = grid_h(traj);
    let value = if k_cells == 0 {
        0.0
    } else {
        traj.dts
            .iter()
            .zip(&traj.states)
            .map(|(&dt, s)| {
                let g: Vec<f64> = s.u.iter().map(|&u| table.g_at(u)).collect();
                let sum: f64 = (0..n - k_cells)
                    .map(|i| (g[i + k_cells] - g[i]).powi(2))
                    .sum();
                dt * h * sum
            })
            .sum()
    };
    let xi = k_cells as f64 * h;
    let mut r = EstimateReport::new(
        format!("space_translate_k{k_cells}"),
        value,
        scheme_mu(traj),
        format!("sum dt*h*(g(u_{{i+{k_cells}}})-g(u_i))^2; xi^2={}", xi * xi),
    );
    r.scale = Some(xi * xi);
    Ok(r)
}

/// `Σ_n dt h Σ_i [g(u^{n+m}) - g(u^n)]^2`, reported against `tau = m dt`.
/// Needs a run with uniform steps.
pub fn time_translate(
    traj: &Trajectory,
    table: &TransformTable,
    m_steps: usize,
) -> Result<EstimateReport> {
    require_dense(traj)?;
    let steps = traj.dts.len();
    if steps == 0 {
        return Err(Error::InsufficientData("trajectory has no steps".into()));
    }
    let dt0 = traj.dts[0];
    let (lo, hi) = traj
        .dts
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &d| {
            (lo.min(d), hi.max(d))
        });
    if hi - lo > UNIFORM_DT_TOL * hi {
        return Err(Error::InsufficientData(format!(
            "time translates need uniform steps; got dt in [{lo:e}, {hi:e}] \
             (lower the nominal step or use fixed_step = true)"
        )));
    }
    if m_steps > steps {
        return Err(Error::InsufficientData(format!(
            "shift of {m_steps} steps exceeds the {steps} recorded steps"
        )));
    }
    let h = grid_h(traj);
    let value = if m_steps == 0 {
        0.0
    } else {
        let g: Vec<Vec<f64>> = traj
            .states
            .iter()
            .map(|s| s.u.iter().map(|&u| table.g_at(u)).collect())
            .collect();
        (0..=steps - m_steps)
            .map(|n| {
                let sum: f64 = g[n + m_steps]
                    .iter()
                    .zip(&g[n])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                traj.dts[n] * h * sum
            })
            .sum()
    };
    let tau = m_steps as f64 * dt0;
    let mut r = EstimateReport::new(
        format!("time_translate_m{m_steps}"),
        value,
        scheme_mu(traj),
        format!("sum dt*h*(g(u^{{n+{m_steps}}})-g(u^n))^2; tau={tau}"),
    );
    r.scale = Some(tau);
    Ok(r)
}

/// Spread `max - min` of the global pressure over cells with `u <= threshold`.
pub fn air_pressure_flatness(state: &SimState, threshold_u: f64) -> Result<f64> {
    let pg = state
        .p_g
        .as_ref()
        .ok_or_else(|| Error::InsufficientData("state carries no global pressure".into()))?;
    let (lo, hi) = pg
        .iter()
        .zip(&state.u)
        .filter(|(_, &u)| u <= threshold_u)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&p, _)| {
            (lo.min(p), hi.max(p))
        });
    Ok(if lo.is_finite() { hi - lo } else { 0.0 })
}

/// `sqrt(Σ_k (t_k - t_{k-1}) h Σ_i (a - b)^2)` over the common stop times,
/// with the state at `t_k` standing for the slab `(t_{k-1}, t_k]`.
pub fn cylinder_l2(a: &Trajectory, b: &Trajectory, times: &[f64]) -> Result<f64> {
    let h = grid_h(a);
    let mut prev = 0.0;
    let mut acc = 0.0;
    for &t in times {
        let sa = a
            .state_at(t)
            .ok_or_else(|| Error::InsufficientData(format!("no state at t = {t}")))?;
        let sb = b
            .state_at(t)
            .ok_or_else(|| Error::InsufficientData(format!("no state at t = {t}")))?;
        let d2: f64 = sa.u.iter().zip(&sb.u).map(|(x, y)| (x - y).powi(2)).sum();
        acc += (t - prev) * h * d2;
        prev = t;
    }
    Ok(acc.sqrt())
}

pub fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub mus: Vec<f64>,
    pub l2_diff: Vec<f64>,
    pub sup_diff_final: Vec<f64>,
    pub est1_vals: Vec<f64>,
}

impl SweepResult {
    pub fn l2_strictly_decreasing(&self) -> bool {
        self.l2_diff.windows(2).all(|w| w[1] < w[0])
    }

    /// `mu,l2_diff,sup_diff_final,est1,est1_over_mu` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "mu,l2_diff,sup_diff_final,est1,est1_over_mu")?;
        for j in 0..self.mus.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt17(self.mus[j]),
                fmt17(self.l2_diff[j]),
                fmt17(self.sup_diff_final[j]),
                fmt17(self.est1_vals[j]),
                fmt17(self.est1_vals[j] / self.mus[j]),
            )?;
        }
        Ok(())
    }
}

/// Stop times shared by every member of a sweep: the configured snapshots
/// plus `samples` equispaced times in `(0, T]`.
pub fn sweep_times(config: &RunConfig) -> Vec<f64> {
    let t_end = config.t_end;
    let mut times: Vec<f64> = config.snapshots.clone();
    for k in 1..=config.sweep_samples {
        times.push(t_end * k as f64 / config.sweep_samples as f64);
    }
    times.push(t_end);
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * t_end.max(1.0));
    times.retain(|&t| t > 0.0);
    times
}

/// Runs the two-phase scheme for every `mu` and the limit scheme once, and
/// measures the gap between them. Viscosities must be nonincreasing;
/// repeated values are allowed and give identical rows.
pub fn mu_sweep(config: &RunConfig, mus: &[f64]) -> Result<SweepResult> {
    if mus.is_empty() {
        return Err(Error::invalid("viscosity sweep needs at least one value"));
    }
    for &m in mus {
        Viscosity::new(m)?;
    }
    if mus.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::invalid("sweep viscosities must be nonincreasing"));
    }
    let times = sweep_times(config);

    let mut limit_cfg = config.clone();
    limit_cfg.scheme = SchemeKind::Limit;
    limit_cfg.recording = Recording::Snapshots;
    limit_cfg.snapshots = times.clone();
    let limit = experiment::run_config(&limit_cfg)?;

    let mut out = SweepResult {
        mus: mus.to_vec(),
        l2_diff: Vec::with_capacity(mus.len()),
        sup_diff_final: Vec::with_capacity(mus.len()),
        est1_vals: Vec::with_capacity(mus.len()),
    };
    for &mu in mus {
        let mut cfg = config.clone();
        cfg.scheme = SchemeKind::TwoPhase;
        cfg.mu = mu;
        cfg.recording = Recording::Dense;
        cfg.snapshots = times.clone();
        let RunOutput {
            trajectory,
            table,
            model,
            ..
        } = experiment::run_config(&cfg).map_err(|e| annotate_mu(e, mu))?;
        out.l2_diff
            .push(cylinder_l2(&trajectory, &limit.trajectory, &times)?);
        out.sup_diff_final.push(sup_gap(
            &trajectory.final_state().u,
            &limit.trajectory.final_state().u,
        ));
        out.est1_vals
            .push(est_air_energy(&trajectory, &table, &model)?.value);
    }
    Ok(out)
}

fn annotate_mu(e: Error, mu: f64) -> Error {
    match e {
        Error::InvalidInput(msg) => Error::InvalidInput(format!("mu = {mu}: {msg}")),
        Error::InsufficientData(msg) => Error::InsufficientData(format!("mu = {mu}: {msg}")),
        other => {
            log::error!("sweep member mu = {mu} failed");
            other
        }
    }
}

/// `name,mu,value,normalization` rows; translate estimates add a `_ratio` row.
pub fn write_estimates_csv<W: Write>(
    mut out: W,
    reports: &[EstimateReport],
) -> std::io::Result<()> {
    writeln!(out, "name,mu,value,normalization")?;
    for r in reports {
        let mu = r.mu.map(fmt17).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},\"{}\"",
            r.name,
            mu,
            fmt17(r.value),
            r.normalization
        )?;
        if let Some(ratio) = r.ratio() {
            writeln!(
                out,
                "{}_ratio,{},{},\"value/scale\"",
                r.name,
                mu,
                fmt17(ratio)
            )?;
        }
    }
    Ok(())
}
