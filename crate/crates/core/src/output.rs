//! CSV and plot-script writers.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::solver::{Grid, SimState};

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Shortest round-trip rendering, used in file names and manifests.
pub fn fmt_short(x: f64) -> String {
    format!("{x:?}")
}

pub fn snapshot_file_name(run_id: &str, t: f64) -> String {
    format!("{run_id}_t{t}.csv")
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn finish(mut w: BufWriter<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// `x,u,p,p_g` rows, one per cell. Missing pressures are written as NaN.
pub fn write_snapshot<W: Write>(mut out: W, grid: &Grid, state: &SimState) -> std::io::Result<()> {
    writeln!(out, "x,u,p,p_g")?;
    for (i, &x) in grid.centers().iter().enumerate() {
        let p = state.p.as_ref().map_or(f64::NAN, |v| v[i]);
        let pg = state.p_g.as_ref().map_or(f64::NAN, |v| v[i]);
        writeln!(
            out,
            "{},{},{},{}",
            fmt17(x),
            fmt17(state.u[i]),
            fmt17(p),
            fmt17(pg)
        )?;
    }
    Ok(())
}

pub fn write_snapshot_file(
    dir: &Path,
    run_id: &str,
    grid: &Grid,
    state: &SimState,
) -> Result<PathBuf> {
    let path = dir.join(snapshot_file_name(run_id, state.t));
    let mut w = create(&path)?;
    write_snapshot(&mut w, grid, state).map_err(|e| Error::io(&path, e))?;
    finish(w, &path)?;
    Ok(path)
}

/// `x,u_mu,u_limit,abs_diff` rows.
pub fn write_comparison<W: Write>(
    mut out: W,
    grid: &Grid,
    u_mu: &[f64],
    u_limit: &[f64],
) -> std::io::Result<()> {
    writeln!(out, "x,u_mu,u_limit,abs_diff")?;
    for (i, &x) in grid.centers().iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt17(x),
            fmt17(u_mu[i]),
            fmt17(u_limit[i]),
            fmt17((u_mu[i] - u_limit[i]).abs())
        )?;
    }
    Ok(())
}

/// Gnuplot script drawing `u` with crosses and `p_g` with diamonds for each
/// snapshot file, optionally overlaying a limit-solution column.
pub fn plot_script(run_id: &str, files: &[(f64, String)]) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set xlabel 'x'\n");
    s.push_str("set terminal pngcairo size 800,600\n");
    for (t, file) in files {
        let stem = file.trim_end_matches(".csv");
        s.push_str(&format!("set output '{stem}.png'\n"));
        s.push_str(&format!("set title '{run_id}, t = {t}'\n"));
        s.push_str(&format!(
            "plot '{file}' using 1:2 with linespoints pointtype 2 title 'u', \\\n     '{file}' using 1:4 with linespoints pointtype 12 title 'p_g'\n"
        ));
    }
    s
}
