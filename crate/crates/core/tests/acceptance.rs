//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::path::Path;
use std::time::Instant;

use porolim::config::{preset, RunConfig, SchemeKind, PRESETS};
use porolim::diagnostics::{
    air_pressure_flatness, est_air_energy, est_pressure_energy, est_zeta_energy, mu_sweep,
    space_translate, time_translate,
};
use porolim::experiment::{self, RunOutput};
use porolim::physics::{ConstitutiveModel, Viscosity};
use porolim::solver::{
    self, initial_state, DiscreteSources, Grid, LimitMode, Problem, Recording, Scheme,
    SolverSettings, Trajectory, BOUND_TOL,
};
use porolim::transforms::{eval_g, eval_q, eval_r, eval_zeta, Quadrature};
use porolim::Error;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn s101() -> impl Iterator<Item = f64> {
    (0..=100).map(|i| i as f64 / 100.0)
}

fn transform_identity() -> Outcome {
    let m = ConstitutiveModel::paper_test();
    let q = Quadrature::default();
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for mu in [1.0, 1e-4, 1e-8] {
        let mu = Viscosity::new(mu).unwrap();
        for s in s101() {
            let r = eval_r(&m, mu, &q, s).map_err(|e| e.to_string())?;
            let qq = eval_q(&m, mu, &q, s).map_err(|e| e.to_string())?;
            worst = worst.max((r + qq - (m.p_c(s) - m.p_c(0.0))).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 2e-10 && secs < 5.0,
        format!("max residual {worst:.3e} (<= 2e-10), {secs:.2} s (< 5 s)"),
    )
}

fn closed_form_oracles() -> Outcome {
    let m = ConstitutiveModel::paper_test();
    let q = Quadrature::default();
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for s in s101() {
        let g = 0.02 * (1.0 - (1.0 - s).powf(2.5));
        let z = -(0.1 / 3.0) * (1.0 - (1.0 - s).powf(1.5));
        worst = worst.max((eval_g(&m, &q, s).map_err(|e| e.to_string())? - g).abs());
        worst = worst.max((eval_zeta(&m, &q, s).map_err(|e| e.to_string())? - z).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-8 && secs < 1.0,
        format!("max error {worst:.3e} (<= 1e-8), {secs:.3} s (< 1 s)"),
    )
}

fn conservation() -> Outcome {
    let start = Instant::now();
    let grid = Grid::new(100).unwrap();
    let u0 = preset("test2").unwrap().u0;
    let settings = SolverSettings {
        k_nominal: 1e-5,
        fixed_step: true,
        recording: Recording::Dense,
        ..SolverSettings::default()
    };
    let mut worst = 0.0_f64;
    let mut steps = Vec::new();
    for scheme in [
        Scheme::TwoPhase(Viscosity::new(1e-8).unwrap()),
        Scheme::Limit(LimitMode::PaperFaithful),
    ] {
        let problem = Problem {
            model: ConstitutiveModel::paper_test(),
            scheme,
            grid: grid.clone(),
            sources: DiscreteSources::zero(100),
            c: 0.7,
        };
        let init = initial_state(|x| u0.value(x), &grid).unwrap();
        let mass0 = grid.integral(&init.u);
        let tr =
            solver::run(&problem, init, 0.1, &[], &settings, None).map_err(|e| e.to_string())?;
        steps.push(tr.dts.len());
        for s in &tr.states {
            worst = worst.max((grid.integral(&s.u) - mass0).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-12 && steps.iter().all(|&n| n >= 10_000) && secs < 10.0,
        format!("steps {steps:?}, max drift {worst:.3e} (<= 1e-12), {secs:.2} s (< 10 s)"),
    )
}

fn dense(name: &str, scheme: SchemeKind) -> RunConfig {
    let mut c = preset(name).unwrap();
    c.scheme = scheme;
    c.recording = Recording::Dense;
    c
}

fn preset_runs() -> Result<Vec<(String, RunOutput)>, String> {
    let mut out = Vec::new();
    for name in PRESETS {
        for scheme in [SchemeKind::TwoPhase, SchemeKind::Limit] {
            let run = experiment::run_config(&dense(name, scheme))
                .map_err(|e| format!("{name} {}: {e}", scheme.as_str()))?;
            out.push((format!("{name}/{}", scheme.as_str()), run));
        }
    }
    Ok(out)
}

fn pressure_mean_zero(runs: &[(String, RunOutput)]) -> Outcome {
    let mut worst = 0.0_f64;
    let mut checked = 0;
    for (_, run) in runs {
        for s in &run.trajectory.states {
            let p = s.p.as_ref().ok_or("state without pressure")?;
            worst = worst.max(run.grid.integral(p).abs());
            checked += 1;
        }
    }
    check(
        worst <= 1e-13,
        format!("{checked} recorded states, max |h sum P| {worst:.3e} (<= 1e-13)"),
    )
}

fn bound_preservation(runs: &[(String, RunOutput)]) -> Outcome {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (label, run) in runs {
        let tr = &run.trajectory;
        let end = tr.final_state().t;
        let cfg_end = preset(label.split('/').next().unwrap()).unwrap().t_end;
        if end != cfg_end {
            return Err(format!("{label} stopped at t = {end}"));
        }
        for s in &tr.states {
            for &u in &s.u {
                lo = lo.min(u);
                hi = hi.max(u);
            }
        }
    }
    let in_band = lo >= -BOUND_TOL && hi <= 1.0 + BOUND_TOL;

    // sigma = 5 with a large nominal step must trip the guard
    let cfg = preset("test2").unwrap();
    let grid = Grid::new(cfg.n_cells).unwrap();
    let problem = Problem {
        model: cfg.model(),
        scheme: Scheme::TwoPhase(Viscosity::new(cfg.mu).unwrap()),
        sources: solver::discretize_sources(&cfg.sources, &grid).unwrap(),
        grid: grid.clone(),
        c: cfg.sources.c,
    };
    let init = initial_state(|x| cfg.u0.value(x), &grid).unwrap();
    let settings = SolverSettings {
        sigma: 5.0,
        k_nominal: 1e-2,
        ..SolverSettings::default()
    };
    let unstable = solver::run(&problem, init, 0.1, &[], &settings, None);
    let raised = matches!(unstable, Err(Error::Stability { .. }));
    check(
        in_band && raised,
        format!(
            "{} preset runs, u in [{lo:.3e}, 1 + {:.3e}]; sigma = 5 run raised stability error: {raised}",
            runs.len(),
            hi - 1.0
        ),
    )
}

struct SweepRow {
    mu: f64,
    est1: f64,
    pressure: f64,
    zeta: f64,
}

fn test2_short(mu: f64) -> RunConfig {
    let mut c = preset("test2").unwrap();
    c.t_end = 0.01;
    c.snapshots = vec![0.01];
    c.mu = mu;
    c.recording = Recording::Dense;
    c
}

fn energy_sweep() -> Result<(Vec<SweepRow>, f64), String> {
    let start = Instant::now();
    let mut rows = Vec::new();
    for mu in [1e-2, 1e-3, 1e-4, 1e-5] {
        let run = experiment::run_config(&test2_short(mu)).map_err(|e| e.to_string())?;
        let tr = &run.trajectory;
        rows.push(SweepRow {
            mu,
            est1: est_air_energy(tr, &run.table, &run.model)
                .map_err(|e| e.to_string())?
                .value,
            pressure: est_pressure_energy(tr).map_err(|e| e.to_string())?.value,
            zeta: est_zeta_energy(tr, &run.table)
                .map_err(|e| e.to_string())?
                .0
                .value,
        });
    }
    Ok((rows, start.elapsed().as_secs_f64()))
}

fn energy_scaling(rows: &[SweepRow], secs: f64) -> Outcome {
    let nonincreasing = rows.windows(2).all(|w| w[1].est1 <= w[0].est1);
    let ratios: Vec<f64> = rows.iter().map(|r| r.est1 / r.mu).collect();
    let c0 = ratios[0];
    let banded = ratios.iter().all(|&r| r >= 0.0 && r <= 100.0 * c0);
    check(
        nonincreasing && banded && secs < 120.0,
        format!(
            "est1 {:?}, est1/mu {:?} (all <= 100 x {:.3e}), {secs:.1} s",
            rows.iter()
                .map(|r| format!("{:.3e}", r.est1))
                .collect::<Vec<_>>(),
            ratios
                .iter()
                .map(|r| format!("{r:.3e}"))
                .collect::<Vec<_>>(),
            c0
        ),
    )
}

fn within_factor(vals: &[f64], factor: f64) -> bool {
    let v0 = vals[0];
    v0 > 0.0 && vals.iter().all(|&v| v <= factor * v0 && v >= v0 / factor)
}

fn uniform_bounds(rows: &[SweepRow]) -> Outcome {
    let p: Vec<f64> = rows.iter().map(|r| r.pressure).collect();
    let z: Vec<f64> = rows.iter().map(|r| r.zeta).collect();
    check(
        within_factor(&p, 10.0) && within_factor(&z, 10.0),
        format!(
            "pressure energy {:?}, zeta energy {:?} (within x10 of the mu = 1e-2 value)",
            p.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>(),
            z.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn singular_limit() -> Outcome {
    let start = Instant::now();
    let mut cfg = preset("test1").unwrap();
    cfg.limit_mode = LimitMode::Obstacle;
    let res = mu_sweep(&cfg, &[1e-2, 1e-4, 1e-6, 1e-8]).map_err(|e| e.to_string())?;
    let sup = *res.sup_diff_final.last().unwrap();
    let secs = start.elapsed().as_secs_f64();
    check(
        res.l2_strictly_decreasing() && sup <= 0.02 && secs < 300.0,
        format!(
            "l2 {:?}, final sup gap at mu = 1e-8 {sup:.4e} (<= 0.02), {secs:.2} s",
            res.l2_diff
                .iter()
                .map(|v| format!("{v:.3e}"))
                .collect::<Vec<_>>()
        ),
    )
}

fn constant_air_pressure(runs: &[(String, RunOutput)]) -> Outcome {
    let (_, run) = runs
        .iter()
        .find(|(l, _)| l == "test1/two-phase")
        .ok_or("missing test1 run")?;
    let state = run
        .trajectory
        .state_at(0.01)
        .ok_or("no state at t = 0.01")?;
    let spread = air_pressure_flatness(state, 0.95).map_err(|e| e.to_string())?;
    let qualifying = state.u.iter().filter(|&&u| u <= 0.95).count();
    check(
        spread <= 1e-5,
        format!("spread {spread:.3e} (<= 1e-5) over {qualifying} cells with u <= 0.95"),
    )
}

fn read_u(path: &Path) -> Result<Vec<(f64, f64)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    text.lines()
        .skip(1)
        .map(|l| {
            let mut cols = l.split(',');
            let x = cols.next().and_then(|v| v.parse().ok());
            let u = cols.next().and_then(|v| v.parse().ok());
            x.zip(u).ok_or_else(|| format!("bad row '{l}'"))
        })
        .collect()
}

fn mean_left_third(rows: &[(f64, f64)]) -> f64 {
    let left: Vec<f64> = rows
        .iter()
        .filter(|(x, _)| *x <= 1.0 / 3.0)
        .map(|r| r.1)
        .collect();
    left.iter().sum::<f64>() / left.len() as f64
}

fn figure_regeneration() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path();
    let expected = [
        ("test1", vec!["0.01"]),
        ("test2", vec!["0.01", "0.1"]),
        ("test3", vec!["0.01", "0.1"]),
    ];
    for (name, times) in &expected {
        let code = porolim::cli::run_cli([
            "porolim",
            "run",
            "--preset",
            name,
            "--quiet",
            "--out",
            out.to_str().unwrap(),
        ]);
        if code != 0 {
            return Err(format!("run --preset {name} exited {code}"));
        }
        for t in times {
            let f = out.join(format!("{name}_t{t}.csv"));
            if !f.exists() {
                return Err(format!("missing {}", f.display()));
            }
        }
        for f in [format!("{name}.gp"), format!("{name}_manifest.txt")] {
            if !out.join(&f).exists() {
                return Err(format!("missing {f}"));
            }
        }
    }
    let gain = |name: &str| -> Result<f64, String> {
        let early = read_u(&out.join(format!("{name}_t0.01.csv")))?;
        let late = read_u(&out.join(format!("{name}_t0.1.csv")))?;
        Ok(mean_left_third(&late) - mean_left_third(&early))
    };
    let (g2, g3) = (gain("test2")?, gain("test3")?);
    check(
        g3 > g2,
        format!("files for 5 time points written; mean gain on [0, 1/3]: test3 {g3:.4e} > test2 {g2:.4e}"),
    )
}

fn translates() -> Outcome {
    let run = experiment::run_config(&test2_short(1e-8)).map_err(|e| e.to_string())?;
    let tr: &Trajectory = &run.trajectory;
    let mut space = Vec::new();
    let mut time = Vec::new();
    for k in [1, 2, 4, 8] {
        space.push(
            space_translate(tr, &run.table, k)
                .map_err(|e| e.to_string())?
                .ratio()
                .unwrap(),
        );
        time.push(
            time_translate(tr, &run.table, k)
                .map_err(|e| e.to_string())?
                .ratio()
                .unwrap(),
        );
    }
    let band = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(0.0, f64::max);
        hi / lo
    };
    let (bs, bt) = (band(&space), band(&time));
    check(
        bs <= 4.0 && bt <= 4.0,
        format!("space ratio spread x{bs:.2}, time ratio spread x{bt:.2} (<= 4)"),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "transform identity", transform_identity()),
        (2, "closed-form oracles", closed_form_oracles()),
        (3, "conservation", conservation()),
    ];
    match preset_runs() {
        Ok(runs) => {
            results.push((4, "pressure mean zero", pressure_mean_zero(&runs)));
            results.push((5, "bound preservation", bound_preservation(&runs)));
            results.push((9, "constant air pressure", constant_air_pressure(&runs)));
        }
        Err(e) => {
            results.push((4, "pressure mean zero", Err(e.clone())));
            results.push((5, "bound preservation", Err(e.clone())));
            results.push((9, "constant air pressure", Err(e)));
        }
    }
    match energy_sweep() {
        Ok((rows, secs)) => {
            results.push((6, "energy estimate mu-scaling", energy_scaling(&rows, secs)));
            results.push((7, "mu-uniform boundedness", uniform_bounds(&rows)));
        }
        Err(e) => {
            results.push((6, "energy estimate mu-scaling", Err(e.clone())));
            results.push((7, "mu-uniform boundedness", Err(e)));
        }
    }
    results.push((8, "singular limit", singular_limit()));
    results.push((10, "figure regeneration", figure_regeneration()));
    results.push((11, "translate estimates", translates()));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(d) => println!("PASS [{n:>2}] {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL [{n:>2}] {name}: {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", results.len());
        std::process::exit(1);
    }
}
