//! Run configuration: a flat `key = value` text format with `#` comments
//! and dotted keys for nested blocks, plus the three builtin presets.
//!
//! ```text
//! preset = test2            # optional base, applied before the other keys
//! mu = 1e-4
//! sources.injection = dirac 0.0 1.0
//! u0 = piecewise 0.1 0.3333333333333333 0.7
//! ```
//!
//! [`RunConfig::to_text`] writes every resolved field back in this format,
//! so a manifest re-read with [`RunConfig::parse`] reproduces the run.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::output::fmt_short;
use crate::physics::{ConstitutiveModel, PowerLaw, Viscosity};
use crate::solver::{
    LimitMode, Mobility, Recording, SolverSettings, SourceSpec, SourceTerm, StepOptions,
};
use crate::transforms::DEFAULT_TABLE_POINTS;

pub const PRESETS: [&str; 3] = ["test1", "test2", "test3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelName {
    PaperTest,
    PowerLaw,
}

impl ModelName {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::PaperTest => "paper-test",
            ModelName::PowerLaw => "power-law",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    TwoPhase,
    Limit,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::TwoPhase => "two-phase",
            SchemeKind::Limit => "limit",
        }
    }
}

/// Initial saturation profile.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Constant(f64),
    /// `values[0]` on `[0, breaks[0]]`, `values[1]` on `(breaks[0], breaks[1]]`,
    /// and so on; `values` has one more entry than `breaks`.
    Piecewise {
        values: Vec<f64>,
        breaks: Vec<f64>,
    },
}

impl InitialData {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            InitialData::Constant(v) => *v,
            InitialData::Piecewise { values, breaks } => {
                let j = breaks.partition_point(|&b| b < x);
                values[j]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let values: &[f64] = match self {
            InitialData::Constant(v) => std::slice::from_ref(v),
            InitialData::Piecewise { values, breaks } => {
                if values.len() != breaks.len() + 1 {
                    return Err(Error::invalid(
                        "piecewise u0 needs one more value than breakpoints",
                    ));
                }
                if breaks.iter().any(|b| !(*b > 0.0 && *b < 1.0))
                    || breaks.windows(2).any(|w| w[1] <= w[0])
                {
                    return Err(Error::invalid(
                        "piecewise u0 breakpoints must be increasing inside (0, 1)",
                    ));
                }
                values
            }
        };
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid(
                "initial saturation values must lie in [0, 1]",
            ));
        }
        Ok(())
    }

    fn to_text(&self) -> String {
        match self {
            InitialData::Constant(v) => format!("constant {}", fmt_short(*v)),
            InitialData::Piecewise { values, breaks } => {
                let mut s = format!("piecewise {}", fmt_short(values[0]));
                for (b, v) in breaks.iter().zip(&values[1..]) {
                    let _ = write!(s, " {} {}", fmt_short(*b), fmt_short(*v));
                }
                s
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub run_id: String,
    pub model: ModelName,
    /// Parameters of the power-law family; ignored by `paper-test`.
    pub power_law: PowerLaw,
    pub scheme: SchemeKind,
    pub mu: f64,
    pub limit_mode: LimitMode,
    pub mobility: Mobility,
    pub n_cells: usize,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub sigma: f64,
    pub k_nominal: f64,
    pub fixed_step: bool,
    pub sources: SourceSpec,
    pub cap_injection: bool,
    pub u0: InitialData,
    pub recording: Recording,
    pub out_dir: Option<PathBuf>,
    pub table_points: usize,
    pub sweep_mus: Vec<f64>,
    pub sweep_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            run_id: "run".into(),
            model: ModelName::PaperTest,
            power_law: PowerLaw {
                a: 0.5,
                b: 2.0,
                pi0: 0.1,
                gamma: 0.5,
                u_m: 0.05,
            },
            scheme: SchemeKind::TwoPhase,
            mu: 1e-8,
            limit_mode: LimitMode::Obstacle,
            mobility: Mobility::MixedPoint,
            n_cells: 100,
            t_end: 0.01,
            snapshots: Vec::new(),
            sigma: 0.45,
            k_nominal: 1e-4,
            fixed_step: false,
            sources: SourceSpec::none(),
            cap_injection: true,
            u0: InitialData::Constant(0.5),
            recording: Recording::Snapshots,
            out_dir: None,
            table_points: DEFAULT_TABLE_POINTS,
            sweep_mus: vec![1e-2, 1e-4, 1e-6, 1e-8],
            sweep_samples: 10,
        }
    }
}

/// Builtin experiments: unit Dirac injection at `x = 0` and extraction at
/// `x = 1`, `mu = 1e-8`, 100 cells.
pub fn preset(name: &str) -> Result<RunConfig> {
    let piecewise = InitialData::Piecewise {
        values: vec![0.1, 0.7],
        breaks: vec![1.0 / 3.0],
    };
    let (c, u0, snapshots, t_end) = match name {
        "test1" => (0.7, InitialData::Constant(1.0), vec![0.01], 0.01),
        "test2" => (0.7, piecewise, vec![0.01, 0.1], 0.1),
        "test3" => (1.0, piecewise, vec![0.01, 0.1], 0.1),
        other => {
            return Err(Error::invalid(format!(
                "unknown preset '{other}' (available: {})",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(RunConfig {
        run_id: name.into(),
        t_end,
        snapshots,
        sources: SourceSpec {
            injection: SourceTerm::Dirac {
                at: 0.0,
                strength: 1.0,
            },
            extraction: SourceTerm::Dirac {
                at: 1.0,
                strength: 1.0,
            },
            c,
            balance: false,
        },
        u0,
        ..RunConfig::default()
    })
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::invalid(format!("{key}: '{v}' is not a number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| Error::invalid(format!("{key}: '{v}' is not a nonnegative integer")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(Error::invalid(format!("{key}: '{v}' is not a boolean"))),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| parse_f64(key, t))
        .collect()
}

fn parse_source(key: &str, v: &str) -> Result<SourceTerm> {
    let mut words = v.split_whitespace();
    let kind = words.next().unwrap_or("");
    let nums = parse_list(key, &words.collect::<Vec<_>>().join(" "))?;
    match (kind, nums.as_slice()) {
        ("none", []) => Ok(SourceTerm::None),
        ("dirac", &[at, strength]) => Ok(SourceTerm::Dirac { at, strength }),
        ("cells", rates) if !rates.is_empty() => Ok(SourceTerm::Cells(rates.to_vec())),
        _ => Err(Error::invalid(format!(
            "{key}: expected 'none', 'dirac <x> <w>' or 'cells <r0> <r1> ...', got '{v}'"
        ))),
    }
}

fn source_text(s: &SourceTerm) -> String {
    match s {
        SourceTerm::None => "none".into(),
        SourceTerm::Dirac { at, strength } => {
            format!("dirac {} {}", fmt_short(*at), fmt_short(*strength))
        }
        SourceTerm::Cells(v) => {
            let parts: Vec<String> = v.iter().map(|x| fmt_short(*x)).collect();
            format!("cells {}", parts.join(" "))
        }
    }
}

fn parse_u0(key: &str, v: &str) -> Result<InitialData> {
    if PRESETS.contains(&v) {
        return Ok(preset(v)?.u0);
    }
    let mut words = v.split_whitespace();
    let kind = words.next().unwrap_or("");
    let nums = parse_list(key, &words.collect::<Vec<_>>().join(" "))?;
    match (kind, nums.as_slice()) {
        ("constant", &[c]) => Ok(InitialData::Constant(c)),
        ("piecewise", xs) if xs.len() % 2 == 1 => Ok(InitialData::Piecewise {
            values: xs.iter().step_by(2).copied().collect(),
            breaks: xs.iter().skip(1).step_by(2).copied().collect(),
        }),
        _ => Err(Error::invalid(format!(
            "{key}: expected 'constant <v>', 'piecewise <v0> <x1> <v1> ...' or a preset name, got '{v}'"
        ))),
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| fmt_short(*x))
        .collect::<Vec<_>>()
        .join(", ")
}

impl RunConfig {
    /// Parses config text. A `preset` key, wherever it appears, selects the
    /// base that the remaining keys override.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::invalid(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            entries.push((lineno + 1, k.trim().to_string(), v.trim().to_string()));
        }

        let presets: Vec<_> = entries.iter().filter(|(_, k, _)| k == "preset").collect();
        let mut cfg = match presets.as_slice() {
            [] => RunConfig::default(),
            [(_, _, name)] => preset(name)?,
            _ => return Err(Error::invalid("'preset' given more than once")),
        };
        for (lineno, k, v) in &entries {
            if k == "preset" {
                continue;
            }
            cfg.set(k, v).map_err(|e| match e {
                Error::InvalidInput(msg) => Error::InvalidInput(format!("line {lineno}: {msg}")),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "run_id" => {
                if v.is_empty() || v.contains(['/', '\\']) {
                    return Err(Error::invalid(format!(
                        "run_id '{v}' is not a plain file stem"
                    )));
                }
                self.run_id = v.to_string();
            }
            "model" => {
                self.model = match v {
                    "paper-test" => ModelName::PaperTest,
                    "power-law" => ModelName::PowerLaw,
                    _ => return Err(Error::invalid(format!("unknown model '{v}'"))),
                }
            }
            "model.a" => self.power_law.a = parse_f64(key, v)?,
            "model.b" => self.power_law.b = parse_f64(key, v)?,
            "model.pi0" => self.power_law.pi0 = parse_f64(key, v)?,
            "model.gamma" => self.power_law.gamma = parse_f64(key, v)?,
            "model.u_m" => self.power_law.u_m = parse_f64(key, v)?,
            "scheme" => {
                self.scheme = match v {
                    "two-phase" => SchemeKind::TwoPhase,
                    "limit" => SchemeKind::Limit,
                    _ => return Err(Error::invalid(format!("unknown scheme '{v}'"))),
                }
            }
            "mu" => self.mu = parse_f64(key, v)?,
            "limit.mode" => {
                self.limit_mode = match v {
                    "paper" => LimitMode::PaperFaithful,
                    "obstacle" => LimitMode::Obstacle,
                    _ => return Err(Error::invalid(format!("unknown limit mode '{v}'"))),
                }
            }
            "mobility" => {
                self.mobility = match v {
                    "mixed" => Mobility::MixedPoint,
                    "symmetrized" => Mobility::Symmetrized,
                    _ => return Err(Error::invalid(format!("unknown mobility '{v}'"))),
                }
            }
            "n_cells" => self.n_cells = parse_usize(key, v)?,
            "T" => self.t_end = parse_f64(key, v)?,
            "snapshots" => self.snapshots = parse_list(key, v)?,
            "sigma" => self.sigma = parse_f64(key, v)?,
            "K_nominal" => self.k_nominal = parse_f64(key, v)?,
            "fixed_step" => self.fixed_step = parse_bool(key, v)?,
            "sources.injection" => self.sources.injection = parse_source(key, v)?,
            "sources.extraction" => self.sources.extraction = parse_source(key, v)?,
            "sources.c" => self.sources.c = parse_f64(key, v)?,
            "sources.balance" => self.sources.balance = parse_bool(key, v)?,
            "sources.injection_cap" => self.cap_injection = parse_bool(key, v)?,
            "u0" => self.u0 = parse_u0(key, v)?,
            "recording" => {
                self.recording = match v {
                    "dense" => Recording::Dense,
                    "snapshots" => Recording::Snapshots,
                    _ => return Err(Error::invalid(format!("unknown recording mode '{v}'"))),
                }
            }
            "out_dir" => self.out_dir = Some(PathBuf::from(v)),
            "table_points" => self.table_points = parse_usize(key, v)?,
            "sweep.mus" => self.sweep_mus = parse_list(key, v)?,
            "sweep.samples" => self.sweep_samples = parse_usize(key, v)?,
            _ => return Err(Error::invalid(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 2 {
            return Err(Error::invalid(format!(
                "n_cells must be at least 2, got {}",
                self.n_cells
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid(format!(
                "T must be nonnegative, got {}",
                self.t_end
            )));
        }
        for &s in &self.snapshots {
            if !(s > 0.0 && s <= self.t_end) {
                return Err(Error::invalid(format!(
                    "snapshot {s} outside (0, T] with T = {}",
                    self.t_end
                )));
            }
        }
        if self.snapshots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("snapshot times must be strictly increasing"));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::invalid(format!(
                "sigma must lie in (0, 1), got {}",
                self.sigma
            )));
        }
        if !(self.k_nominal > 0.0 && self.k_nominal.is_finite()) {
            return Err(Error::invalid(format!(
                "K_nominal must be positive, got {}",
                self.k_nominal
            )));
        }
        Viscosity::new(self.mu)?;
        if self.model == ModelName::PowerLaw {
            let p = self.power_law;
            if [p.a, p.b, p.pi0, p.gamma]
                .iter()
                .any(|x| !(*x > 0.0 && x.is_finite()))
            {
                return Err(Error::invalid(
                    "power-law parameters a, b, pi0, gamma must be positive",
                ));
            }
            if !(p.u_m > 0.0 && p.u_m < 1.0) {
                return Err(Error::invalid("power-law u_m must lie in (0, 1)"));
            }
        }
        self.sources.validate(self.model().u_m())?;
        self.u0.validate()?;
        if self.table_points < 2 {
            return Err(Error::invalid("table_points must be at least 2"));
        }
        if self.sweep_samples == 0 {
            return Err(Error::invalid("sweep.samples must be at least 1"));
        }
        Ok(())
    }

    pub fn model(&self) -> ConstitutiveModel {
        match self.model {
            ModelName::PaperTest => ConstitutiveModel::paper_test(),
            ModelName::PowerLaw => ConstitutiveModel::power_law(self.power_law),
        }
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            sigma: self.sigma,
            k_nominal: self.k_nominal,
            fixed_step: self.fixed_step,
            recording: self.recording,
            step: StepOptions {
                mobility: self.mobility,
                cap_injection: self.cap_injection,
            },
        }
    }

    /// Every resolved field in config syntax.
    pub fn to_text(&self) -> String {
        let p = self.power_law;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("run_id", self.run_id.clone());
        kv("model", self.model.as_str().into());
        kv("model.a", fmt_short(p.a));
        kv("model.b", fmt_short(p.b));
        kv("model.pi0", fmt_short(p.pi0));
        kv("model.gamma", fmt_short(p.gamma));
        kv("model.u_m", fmt_short(p.u_m));
        kv("scheme", self.scheme.as_str().into());
        kv("mu", fmt_short(self.mu));
        kv("limit.mode", self.limit_mode.as_str().into());
        kv("mobility", self.mobility.as_str().into());
        kv("n_cells", self.n_cells.to_string());
        kv("T", fmt_short(self.t_end));
        kv("snapshots", fmt_list(&self.snapshots));
        kv("sigma", fmt_short(self.sigma));
        kv("K_nominal", fmt_short(self.k_nominal));
        kv("fixed_step", self.fixed_step.to_string());
        kv("sources.injection", source_text(&self.sources.injection));
        kv("sources.extraction", source_text(&self.sources.extraction));
        kv("sources.c", fmt_short(self.sources.c));
        kv("sources.balance", self.sources.balance.to_string());
        kv("sources.injection_cap", self.cap_injection.to_string());
        kv("u0", self.u0.to_text());
        kv("recording", self.recording.as_str().into());
        if let Some(dir) = &self.out_dir {
            kv("out_dir", dir.display().to_string());
        }
        kv("table_points", self.table_points.to_string());
        kv("sweep.mus", fmt_list(&self.sweep_mus));
        kv("sweep.samples", self.sweep_samples.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_the_experiments() {
        assert_eq!(preset("test1").unwrap().sources.c, 0.7);
        assert_eq!(preset("test3").unwrap().sources.c, 1.0);
        let t2 = preset("test2").unwrap();
        assert_eq!(t2.u0.value(0.2), 0.1);
        assert_eq!(t2.u0.value(0.5), 0.7);
        assert_eq!(t2.snapshots, vec![0.01, 0.1]);
        assert_eq!(preset("test1").unwrap().snapshots, vec![0.01]);
        assert_eq!(preset("test1").unwrap().u0.value(0.99), 1.0);
        for name in PRESETS {
            let p = preset(name).unwrap();
            assert_eq!(p.mu, 1e-8);
            assert_eq!(p.n_cells, 100);
            assert_eq!(p.sigma, 0.45);
            p.validate().unwrap();
        }
        assert!(preset("test4").is_err());
    }

    #[test]
    fn round_trip_through_text() {
        for name in PRESETS {
            let p = preset(name).unwrap();
            assert_eq!(RunConfig::parse(&p.to_text()).unwrap(), p);
        }
        let mut c = preset("test2").unwrap();
        c.model = ModelName::PowerLaw;
        c.power_law.a = 3.0;
        c.mu = 0.1 + 0.2;
        c.sources.extraction = SourceTerm::Cells(vec![0.25; 100]);
        c.recording = Recording::Dense;
        c.out_dir = Some("out dir".into());
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn preset_key_is_a_base() {
        let c = RunConfig::parse("mu = 1e-4  # override\npreset = test3\n\nn_cells = 50").unwrap();
        assert_eq!(c.mu, 1e-4);
        assert_eq!(c.n_cells, 50);
        assert_eq!(c.sources.c, 1.0);
        assert_eq!(c.run_id, "test3");
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = RunConfig::parse("sigma = 0.4\nbogus = 1").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(RunConfig::parse("sigma 0.4").is_err());
        assert!(RunConfig::parse("u0 = piecewise 0.1 0.5").is_err());
        assert!(RunConfig::parse("sources.injection = dirac 0.0").is_err());
    }

    #[test]
    fn validation() {
        let mut c = preset("test1").unwrap();
        c.sigma = 1.5;
        assert!(c.validate().is_err());
        let mut c = preset("test1").unwrap();
        c.snapshots = vec![0.02];
        assert!(c.validate().is_err());
        let mut c = preset("test1").unwrap();
        c.sources.c = 0.01;
        assert!(c.validate().is_err());
        let mut c = preset("test1").unwrap();
        c.mu = 0.0;
        assert!(c.validate().is_err());
        let c = RunConfig::parse("u0 = piecewise 0.1 0.6 0.2 0.4 0.3").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn piecewise_boundaries_are_closed_on_the_right() {
        let u = InitialData::Piecewise {
            values: vec![0.1, 0.7],
            breaks: vec![0.5],
        };
        assert_eq!(u.value(0.5), 0.1);
        assert_eq!(u.value(0.5000001), 0.7);
    }
}
