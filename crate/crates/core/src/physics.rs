//! Constitutive closures of the water/air system.
//!
//! A [`ConstitutiveModel`] bundles the water and air relative permeabilities
//! `k_w`, `k_a`, the capillary pressure `p_c` with its derivative, and the
//! residual saturation `u_m`. The viscosity ratio `mu` (air over water) is
//! kept separate as a [`Viscosity`] because the whole point of the crate is
//! to vary it while holding the closures fixed.
//!
//! Pointwise algebra:
//!
//! ```text
//! M(s) = k_w(s) + k_a(s) / mu          total mobility
//! f(s) = k_w(s) / M(s)                 water fractional flow
//! ```

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Closure = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Step of the central difference used when no analytic `p_c'` is supplied.
const FD_STEP: f64 = 1e-6;
/// Within this distance of an endpoint the difference becomes one-sided.
const FD_ENDPOINT_BAND: f64 = 1e-5;
/// Distance from `s = 1` excluded from sampled sup checks on `p_c'`.
pub const VALIDATION_END_GAP: f64 = 1e-6;
/// Tolerance for the endpoint equalities in [`validate_hypotheses`].
const ENDPOINT_TOL: f64 = 1e-12;

/// Relative permeabilities, capillary pressure and residual saturation.
#[derive(Clone)]
pub struct ConstitutiveModel {
    name: String,
    k_w: Closure,
    k_a: Closure,
    p_c: Closure,
    p_c_prime: Closure,
    u_m: f64,
}

impl fmt::Debug for ConstitutiveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstitutiveModel")
            .field("name", &self.name)
            .field("u_m", &self.u_m)
            .finish_non_exhaustive()
    }
}

/// Parameters of the power-law family
/// `k_w = s^a`, `k_a = (1-s)^b`, `p_c = pi0 (1-s)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub a: f64,
    pub b: f64,
    pub pi0: f64,
    pub gamma: f64,
    pub u_m: f64,
}

impl ConstitutiveModel {
    /// Builds a model from closures. When `p_c_prime` is `None` the
    /// derivative falls back to finite differences of `p_c`.
    pub fn from_closures<W, A, P>(
        name: impl Into<String>,
        k_w: W,
        k_a: A,
        p_c: P,
        p_c_prime: Option<Closure>,
        u_m: f64,
    ) -> Self
    where
        W: Fn(f64) -> f64 + Send + Sync + 'static,
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let p_c: Closure = Arc::new(p_c);
        let p_c_prime = p_c_prime.unwrap_or_else(|| {
            let pc = Arc::clone(&p_c);
            Arc::new(move |s| finite_difference(&*pc, s))
        });
        Self {
            name: name.into(),
            k_w: Arc::new(k_w),
            k_a: Arc::new(k_a),
            p_c,
            p_c_prime,
            u_m,
        }
    }

    /// `p_c(z) = 0.1 sqrt(1-z)`, `k_a(z) = (1-z)^2`, `k_w(z) = sqrt(z)`, `u_m = 0.05`.
    pub fn paper_test() -> Self {
        Self::from_closures(
            "paper-test",
            |z: f64| z.max(0.0).sqrt(),
            |z: f64| (1.0 - z).powi(2),
            |z: f64| 0.1 * (1.0 - z).max(0.0).sqrt(),
            Some(Arc::new(|z: f64| -0.05 / (1.0 - z).sqrt())),
            0.05,
        )
    }

    pub fn power_law(params: PowerLaw) -> Self {
        let PowerLaw {
            a,
            b,
            pi0,
            gamma,
            u_m,
        } = params;
        Self::from_closures(
            "power-law",
            move |s: f64| s.max(0.0).powf(a),
            move |s: f64| (1.0 - s).max(0.0).powf(b),
            move |s: f64| pi0 * (1.0 - s).max(0.0).powf(gamma),
            Some(Arc::new(move |s: f64| {
                -pi0 * gamma * (1.0 - s).max(0.0).powf(gamma - 1.0)
            })),
            u_m,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn u_m(&self) -> f64 {
        self.u_m
    }

    #[inline]
    pub fn k_w(&self, s: f64) -> f64 {
        (self.k_w)(s)
    }

    #[inline]
    pub fn k_a(&self, s: f64) -> f64 {
        (self.k_a)(s)
    }

    #[inline]
    pub fn p_c(&self, s: f64) -> f64 {
        (self.p_c)(s)
    }

    #[inline]
    pub fn p_c_prime(&self, s: f64) -> f64 {
        (self.p_c_prime)(s)
    }

    /// Water fractional flow `k_w / (k_w + k_a / mu)`, evaluated as
    /// `mu k_w / (mu k_w + k_a)` so that tiny `mu` does not overflow.
    pub fn frac_flow(&self, mu: Viscosity, s: f64) -> Result<f64> {
        let kw = self.k_w(s);
        let ka = self.k_a(s);
        let den = mu.get() * kw + ka;
        if den <= 0.0 {
            return Err(Error::Model {
                s,
                reason: "k_w and k_a vanish simultaneously".into(),
            });
        }
        Ok(mu.get() * kw / den)
    }

    pub fn total_mobility(&self, mu: Viscosity, s: f64) -> f64 {
        self.k_w(s) + self.k_a(s) / mu.get()
    }
}

fn finite_difference(p_c: &(dyn Fn(f64) -> f64 + Send + Sync), s: f64) -> f64 {
    if s >= 1.0 - FD_ENDPOINT_BAND {
        (p_c(s) - p_c(s - FD_STEP)) / FD_STEP
    } else if s <= FD_ENDPOINT_BAND {
        (p_c(s + FD_STEP) - p_c(s)) / FD_STEP
    } else {
        (p_c(s + FD_STEP) - p_c(s - FD_STEP)) / (2.0 * FD_STEP)
    }
}

/// Air/water viscosity ratio, `0 < mu <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Viscosity(f64);

impl Viscosity {
    pub fn new(mu: f64) -> Result<Self> {
        if mu > 0.0 && mu <= 1.0 {
            Ok(Self(mu))
        } else {
            Err(Error::invalid(format!(
                "viscosity ratio must lie in (0, 1], got {mu}"
            )))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Outcome of one sampled hypothesis check.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Sample location and offending value (or the worst value seen).
    pub worst: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Samples the closure hypotheses on `samples` uniform points of
/// `[0, 1 - VALIDATION_END_GAP]` plus the endpoints. Never aborts: a failed
/// hypothesis shows up as a failing entry in the report.
pub fn validate_hypotheses(model: &ConstitutiveModel, samples: usize) -> Result<ValidationReport> {
    if samples < 2 {
        return Err(Error::invalid("validation needs at least 2 samples"));
    }
    let top = 1.0 - VALIDATION_END_GAP;
    let mut grid: Vec<f64> = (0..samples)
        .map(|i| top * i as f64 / (samples - 1) as f64)
        .collect();
    grid.push(1.0);

    let mut checks = Vec::new();
    let endpoint = |name, s: f64, value: f64, target: f64| HypothesisCheck {
        name,
        passed: (value - target).abs() <= ENDPOINT_TOL,
        worst: Some((s, value)),
    };

    let u_m = model.u_m();
    checks.push(HypothesisCheck {
        name: "u_m in (0,1)",
        passed: u_m > 0.0 && u_m < 1.0,
        worst: Some((u_m, u_m)),
    });

    checks.push(endpoint("k_w(0)=0", 0.0, model.k_w(0.0), 0.0));
    checks.push(endpoint("k_w(1)=1", 1.0, model.k_w(1.0), 1.0));
    let kw_um = model.k_w(u_m);
    checks.push(HypothesisCheck {
        name: "k_w(u_m)>0",
        passed: kw_um > 0.0,
        worst: Some((u_m, kw_um)),
    });
    checks.push(monotone_check(
        "k_w nondecreasing",
        &grid,
        |s| model.k_w(s),
        1.0,
    ));

    checks.push(endpoint("k_a(1)=0", 1.0, model.k_a(1.0), 0.0));
    checks.push(endpoint("k_a(0)=1", 0.0, model.k_a(0.0), 1.0));
    checks.push(monotone_check(
        "k_a nonincreasing",
        &grid,
        |s| model.k_a(s),
        -1.0,
    ));
    let (s_min, ka_min) = grid[..grid.len() - 1]
        .iter()
        .map(|&s| (s, model.k_a(s)))
        .fold(
            (f64::NAN, f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        );
    checks.push(HypothesisCheck {
        name: "k_a>0 on [0,1)",
        passed: ka_min > 0.0,
        worst: Some((s_min, ka_min)),
    });

    // strict decrease: every adjacent pair must drop
    let mut pc_worst: Option<(f64, f64)> = None;
    let mut pc_ok = true;
    for w in grid.windows(2) {
        let d = model.p_c(w[1]) - model.p_c(w[0]);
        if !(d < 0.0) {
            pc_ok = false;
            if pc_worst.is_none_or(|(_, v)| d > v) {
                pc_worst = Some((w[1], d));
            }
        }
    }
    checks.push(HypothesisCheck {
        name: "p_c strictly decreasing",
        passed: pc_ok,
        worst: pc_worst,
    });

    let mut sup = (0.0, 0.0_f64);
    let mut finite = true;
    for &s in &grid[..grid.len() - 1] {
        let v = -model.k_a(s) * model.p_c_prime(s);
        if !v.is_finite() {
            finite = false;
            sup = (s, v);
            break;
        }
        if v > sup.1 {
            sup = (s, v);
        }
    }
    checks.push(HypothesisCheck {
        name: "sup -k_a p_c' finite",
        passed: finite,
        worst: Some(sup),
    });

    Ok(ValidationReport { checks })
}

/// `direction = 1` checks nondecreasing, `-1` nonincreasing.
fn monotone_check(
    name: &'static str,
    grid: &[f64],
    f: impl Fn(f64) -> f64,
    direction: f64,
) -> HypothesisCheck {
    let mut worst: Option<(f64, f64)> = None;
    for w in grid.windows(2) {
        let step = direction * (f(w[1]) - f(w[0]));
        if step < 0.0 && worst.is_none_or(|(_, v)| step < v) {
            worst = Some((w[1], step));
        }
    }
    HypothesisCheck {
        name,
        passed: worst.is_none(),
        worst,
    }
}
