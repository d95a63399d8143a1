//! Adaptive Simpson integration with an endpoint substitution at `s = 1`.

use crate::error::{Error, Result};

/// Subdivisions always performed before the error test may accept a panel.
const MIN_DEPTH: u32 = 4;
/// Offset used to extrapolate a substituted integrand to `sigma = 0`.
const EXTRAPOLATION_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Below this distance from `s = 1` the integral is taken in the
    /// variable `sigma` with `tau = 1 - sigma^2`.
    pub endpoint_guard: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_depth: 40,
            endpoint_guard: 1e-3,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

impl Quadrature {
    pub fn new(abs_tol: f64, max_depth: u32, endpoint_guard: f64) -> Result<Self> {
        let q = Self {
            abs_tol,
            max_depth,
            endpoint_guard,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::invalid("quadrature abs_tol must be positive"));
        }
        if self.max_depth < 10 {
            return Err(Error::invalid("quadrature max_depth must be at least 10"));
        }
        if !(self.endpoint_guard > 0.0 && self.endpoint_guard < 0.5) {
            return Err(Error::invalid(
                "quadrature endpoint_guard must lie in (0, 0.5)",
            ));
        }
        Ok(())
    }

    /// Integrates `f` over `[a, b] ⊂ [0, 1]` to `abs_tol`. The part of the
    /// interval closer than `endpoint_guard` to 1 is mapped through
    /// `tau = 1 - sigma^2`, which turns an inverse-square-root blow-up of the
    /// integrand at `tau = 1` into a bounded function of `sigma`.
    pub fn integrate_unit<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        self.integrate_unit_tol(f, a, b, self.abs_tol)
    }

    pub(crate) fn integrate_unit_tol<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        tol: f64,
    ) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let split = (1.0 - self.endpoint_guard).max(a);
        if b <= split {
            return self.simpson(&f, a, b, tol).map_err(|e| at_s(e, b));
        }
        let plain = if split > a {
            self.simpson(&f, a, split, tol / 2.0)
                .map_err(|e| at_s(e, b))?
        } else {
            0.0
        };
        let substituted = |sigma: f64| 2.0 * sigma * f(1.0 - sigma * sigma);
        let g = |sigma: f64| {
            let v = substituted(sigma);
            if v.is_finite() {
                v
            } else {
                // quadratic extrapolation from the right
                let h = EXTRAPOLATION_STEP;
                3.0 * substituted(sigma + h) - 3.0 * substituted(sigma + 2.0 * h)
                    + substituted(sigma + 3.0 * h)
            }
        };
        let sigma_hi = (1.0 - split).max(0.0).sqrt();
        let sigma_lo = (1.0 - b).max(0.0).sqrt();
        let tail = self
            .simpson(&g, sigma_lo, sigma_hi, tol / 2.0)
            .map_err(|e| at_s(e, b))?;
        Ok(plain + tail)
    }

    /// Plain adaptive Simpson on `[a, b]` with Richardson correction.
    pub fn simpson<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
        let fa = f(a);
        let fb = f(b);
        let m = 0.5 * (a + b);
        let fm = f(m);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let mut unresolved = 0.0;
        let value = self.refine(
            f,
            Panel {
                a,
                b,
                fa,
                fm,
                fb,
                whole,
            },
            tol,
            0,
            &mut unresolved,
        );
        if unresolved > tol || !value.is_finite() {
            return Err(Error::Integration {
                s: b,
                estimate: if value.is_finite() {
                    unresolved
                } else {
                    f64::INFINITY
                },
            });
        }
        Ok(value)
    }

    fn refine<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        p: Panel,
        tol: f64,
        depth: u32,
        unresolved: &mut f64,
    ) -> f64 {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let delta = left + right - p.whole;
        if depth >= MIN_DEPTH && delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        if depth >= self.max_depth || !delta.is_finite() {
            *unresolved += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        let l = Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
        };
        let r = Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
        };
        self.refine(f, l, tol / 2.0, depth + 1, unresolved)
            + self.refine(f, r, tol / 2.0, depth + 1, unresolved)
    }
}

fn at_s(e: Error, s: f64) -> Error {
    match e {
        Error::Integration { estimate, .. } => Error::Integration { s, estimate },
        other => other,
    }
}
