//! Command-line experiment runner.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{preset, RunConfig, SchemeKind, PRESETS};
use crate::diagnostics::{self, EstimateReport};
use crate::error::{Error, Result};
use crate::experiment::{self, RunOutput};
use crate::output::{self, fmt17, fmt_short};
use crate::solver::Recording;

/// Environment variable giving the default output directory.
pub const OUT_ENV: &str = "POROLIM_OUT";

const DEFAULT_SHIFTS: [usize; 4] = [1, 2, 4, 8];

#[derive(Debug, Parser)]
#[command(
    name = "porolim",
    version,
    about = "Two-phase porous-media flow and its Richards-type limit in 1-D"
)]
pub struct Cli {
    /// Config file (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Builtin experiment used as the base configuration.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Output directory (default: config `out_dir`, then $POROLIM_OUT, then `.`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub cells: Option<usize>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// `dense` or `snapshots`.
    #[arg(long, global = true)]
    pub recording: Option<String>,
    /// Suppress the summary printed on standard output.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scheme and write snapshots, a manifest and a plot script.
    Run {
        /// Also write the transform table used for the pressures.
        #[arg(long)]
        dump_table: bool,
    },
    /// Run the two-phase and limit schemes side by side.
    Compare,
    /// Compare the limit scheme against a list of viscosity ratios.
    Sweep {
        /// Comma-separated, nonincreasing viscosity ratios.
        #[arg(long, value_delimiter = ',')]
        mus: Option<Vec<f64>>,
    },
    /// Evaluate the energy and translate functionals on a dense run.
    Diagnose {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SHIFTS)]
        space_shifts: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SHIFTS)]
        time_shifts: Vec<usize>,
    },
    /// List the builtin experiments.
    Presets,
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Resolved {
    config: RunConfig,
    out_dir: PathBuf,
}

fn resolve(cli: &Cli) -> Result<Resolved> {
    let mut config = match (&cli.config, &cli.preset) {
        (Some(path), base) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            match base {
                Some(name) => RunConfig::parse(&format!("preset = {name}\n{text}"))?,
                None => RunConfig::parse(&text)?,
            }
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => {
            return Err(Error::invalid(
                "give a configuration with --preset or --config",
            ));
        }
    };
    if let Some(n) = cli.cells {
        config.n_cells = n;
    }
    if let Some(s) = cli.sigma {
        config.sigma = s;
    }
    if let Some(mu) = cli.mu {
        config.mu = mu;
    }
    if let Some(r) = &cli.recording {
        config.set("recording", r)?;
    }
    config.validate()?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(Resolved { config, out_dir })
}

fn dispatch(cli: &Cli) -> Result<i32> {
    if let Command::Presets = cli.command {
        for name in PRESETS {
            let p = preset(name)?;
            println!(
                "{name}: c = {}, u0 = {:?}, snapshots = {:?}",
                p.sources.c, p.u0, p.snapshots
            );
        }
        return Ok(0);
    }
    let r = resolve(cli)?;
    match &cli.command {
        Command::Run { dump_table } => cmd_run(&r.config, &r.out_dir, *dump_table, cli.quiet),
        Command::Compare => cmd_compare(&r.config, &r.out_dir, cli.quiet),
        Command::Sweep { mus } => {
            let mus = mus.clone().unwrap_or_else(|| r.config.sweep_mus.clone());
            cmd_sweep(&r.config, &mus, &r.out_dir, cli.quiet)
        }
        Command::Diagnose {
            space_shifts,
            time_shifts,
        } => cmd_diagnose(&r.config, &r.out_dir, space_shifts, time_shifts, cli.quiet),
        Command::Presets => unreachable!("handled above"),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn stop_times(config: &RunConfig) -> Vec<f64> {
    let mut times = config.snapshots.clone();
    if config.t_end > 0.0 && times.last() != Some(&config.t_end) {
        times.push(config.t_end);
    }
    times
}

/// Writes snapshot CSVs, the manifest and the plot script.
pub fn cmd_run(config: &RunConfig, out_dir: &Path, dump_table: bool, quiet: bool) -> Result<i32> {
    let RunOutput {
        grid,
        table,
        trajectory,
        ..
    } = experiment::run_config(config)?;
    ensure_dir(out_dir)?;
    let mut files = Vec::new();
    for t in stop_times(config) {
        let state = trajectory.state_at(t).expect("stop times are recorded");
        let path = output::write_snapshot_file(out_dir, &config.run_id, &grid, state)?;
        files.push((t, output::snapshot_file_name(&config.run_id, t)));
        if !quiet {
            println!("wrote {}", path.display());
        }
    }
    let manifest = out_dir.join(format!("{}_manifest.txt", config.run_id));
    write_text(&manifest, &config.to_text())?;
    let script = out_dir.join(format!("{}.gp", config.run_id));
    write_text(&script, &output::plot_script(&config.run_id, &files))?;
    if dump_table {
        let path = out_dir.join(format!("{}_transforms.csv", config.run_id));
        let mut w = output::create(&path)?;
        table.write_csv(&mut w).map_err(|e| Error::io(&path, e))?;
        output::finish(w, &path)?;
    }
    if !quiet {
        println!("wrote {}", manifest.display());
        println!("wrote {}", script.display());
        println!("{} steps", trajectory.dts.len());
    }
    Ok(0)
}

pub fn cmd_compare(config: &RunConfig, out_dir: &Path, quiet: bool) -> Result<i32> {
    let cmp = experiment::compare(config)?;
    ensure_dir(out_dir)?;
    for (&t, gap) in cmp.times.iter().zip(&cmp.sup_gaps) {
        let a = cmp
            .two_phase
            .trajectory
            .state_at(t)
            .expect("stop times are recorded");
        let b = cmp
            .limit
            .trajectory
            .state_at(t)
            .expect("stop times are recorded");
        let path = out_dir.join(format!("{}_compare_t{t}.csv", config.run_id));
        let mut w = output::create(&path)?;
        output::write_comparison(&mut w, &cmp.two_phase.grid, &a.u, &b.u)
            .map_err(|e| Error::io(&path, e))?;
        output::finish(w, &path)?;
        if !quiet {
            println!("t = {t}: sup gap {}", fmt17(*gap));
        }
    }
    if !quiet {
        println!(
            "mu = {}, limit mode {}: L2 gap {}",
            fmt_short(config.mu),
            config.limit_mode.as_str(),
            fmt17(cmp.l2_gap)
        );
    }
    Ok(0)
}

pub fn cmd_sweep(config: &RunConfig, mus: &[f64], out_dir: &Path, quiet: bool) -> Result<i32> {
    let result = diagnostics::mu_sweep(config, mus)?;
    ensure_dir(out_dir)?;
    let path = out_dir.join(format!("{}_sweep.csv", config.run_id));
    let mut w = output::create(&path)?;
    result.write_csv(&mut w).map_err(|e| Error::io(&path, e))?;
    output::finish(w, &path)?;
    if !quiet {
        println!("wrote {}", path.display());
        let verdict = if result.l2_strictly_decreasing() {
            "strictly decreasing"
        } else {
            "NOT strictly decreasing"
        };
        println!("l2_diff is {verdict} along the sweep");
    }
    Ok(0)
}

/// Evaluates every functional on a dense run. Returns 3 when an invariant
/// (nonnegative finite values, zero-mean pressure) fails.
pub fn cmd_diagnose(
    config: &RunConfig,
    out_dir: &Path,
    space_shifts: &[usize],
    time_shifts: &[usize],
    quiet: bool,
) -> Result<i32> {
    if config.recording != Recording::Dense {
        return Err(Error::InsufficientData(
            "diagnose needs every step recorded; pass --recording dense or set recording = dense"
                .into(),
        ));
    }
    let out = experiment::run_config(config)?;
    let traj = &out.trajectory;
    let mut reports: Vec<EstimateReport> = Vec::new();
    if config.scheme == SchemeKind::TwoPhase {
        let air = diagnostics::est_air_energy(traj, &out.table, &out.model)?;
        let air_p = diagnostics::est_air_energy_from_pressures(traj, &out.model)?;
        log::info!(
            "air energy: transform form {:e}, pressure form {:e}",
            air.value,
            air_p.value
        );
        reports.push(air);
        reports.push(air_p);
    }
    reports.push(diagnostics::est_pressure_energy(traj)?);
    let (zeta, g) = diagnostics::est_zeta_energy(traj, &out.table)?;
    reports.push(zeta);
    reports.push(g);
    for &k in space_shifts {
        reports.push(diagnostics::space_translate(traj, &out.table, k)?);
    }
    for &m in time_shifts {
        match diagnostics::time_translate(traj, &out.table, m) {
            Ok(r) => reports.push(r),
            Err(Error::InsufficientData(msg)) => {
                log::warn!("time translate m = {m} skipped: {msg}")
            }
            Err(e) => return Err(e),
        }
    }

    ensure_dir(out_dir)?;
    let path = out_dir.join(format!("{}_estimates.csv", config.run_id));
    let mut w = output::create(&path)?;
    diagnostics::write_estimates_csv(&mut w, &reports).map_err(|e| Error::io(&path, e))?;
    output::finish(w, &path)?;

    let mut failures = Vec::new();
    for r in &reports {
        if !(r.value >= 0.0 && r.value.is_finite()) {
            failures.push(format!(
                "{} = {} is not a nonnegative number",
                r.name, r.value
            ));
        }
    }
    for s in &traj.states {
        if let Some(p) = &s.p {
            let mean = out.grid.integral(p);
            if mean.abs() > 1e-13 {
                failures.push(format!("pressure mean {mean:e} at t = {}", s.t));
            }
        }
    }
    if !quiet {
        println!("wrote {}", path.display());
        for r in &reports {
            match r.ratio() {
                Some(q) => println!("{:<28} {}  ratio {}", r.name, fmt17(r.value), fmt17(q)),
                None => println!("{:<28} {}", r.name, fmt17(r.value)),
            }
        }
    }
    for f in &failures {
        eprintln!("invariant failed: {f}");
    }
    Ok(if failures.is_empty() { 0 } else { 3 })
}
