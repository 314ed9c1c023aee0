//! Scalar root finding.
//!
//! Newton-Raphson is the workhorse for inverting the AMM invariants; bisection
//! is both its fallback and the independent oracle used in tests. All
//! arithmetic is `f64` and both solvers are pure, so repeated calls with the
//! same inputs return bit-identical results.

use thiserror::Error;

/// Step halvings allowed when a Newton step leaves the caller's domain.
const MAX_DAMPING_HALVINGS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RootError {
    #[error("no convergence after {iterations} iterations (last iterate {last})")]
    NonConvergence { last: f64, iterations: u32 },
    #[error("derivative vanished at x = {at}")]
    DerivativeVanished { at: f64 },
    #[error("f({lo}) = {f_lo} and f({hi}) = {f_hi} do not bracket a root")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("function is not finite at x = {at}")]
    NonFinite { at: f64 },
    #[error("invalid root configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Stopping rule shared by both solvers.
///
/// An iterate `x` is accepted once the last step (Newton) or half-bracket
/// (bisection) is below `max(abs_tolerance, rel_tolerance * |x|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    pub rel_tolerance: f64,
    pub abs_tolerance: f64,
    pub max_iterations: u32,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-12,
            abs_tolerance: 1e-10,
            max_iterations: 255,
        }
    }
}

impl RootConfig {
    pub fn new(rel_tolerance: f64, abs_tolerance: f64, max_iterations: u32) -> Result<Self, RootError> {
        let cfg = Self {
            rel_tolerance,
            abs_tolerance,
            max_iterations,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RootError> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance.is_finite()) {
            return Err(RootError::InvalidConfig("rel_tolerance must be positive"));
        }
        if !(self.abs_tolerance > 0.0 && self.abs_tolerance.is_finite()) {
            return Err(RootError::InvalidConfig("abs_tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(RootError::InvalidConfig("max_iterations must be at least 1"));
        }
        Ok(())
    }

    /// Acceptance width around `x`.
    pub fn tolerance_at(&self, x: f64) -> f64 {
        self.abs_tolerance.max(self.rel_tolerance * x.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub root: f64,
    pub iterations: u32,
    /// `f(root)`.
    pub residual: f64,
}

/// Newton-Raphson on an unrestricted domain.
pub fn newton_raphson<F, D>(f: F, df: D, x0: f64, cfg: &RootConfig) -> Result<RootResult, RootError>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    newton_raphson_within(f, df, x0, cfg, |_| true)
}

/// Newton-Raphson with step damping.
///
/// Whenever a full step lands outside `valid` (for example a negative D),
/// the step is halved up to ten times; if no halving lands inside the domain
/// the solve fails with [`RootError::NonConvergence`].
pub fn newton_raphson_within<F, D, V>(
    f: F,
    df: D,
    x0: f64,
    cfg: &RootConfig,
    valid: V,
) -> Result<RootResult, RootError>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
    V: Fn(f64) -> bool,
{
    cfg.validate()?;
    if !x0.is_finite() {
        return Err(RootError::NonFinite { at: x0 });
    }

    let mut x = x0;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        let fx = f(x);
        if !fx.is_finite() {
            return Err(RootError::NonFinite { at: x });
        }
        if fx == 0.0 {
            return Ok(RootResult {
                root: x,
                iterations,
                residual: fx,
            });
        }
        let dfx = df(x);
        if !dfx.is_finite() {
            return Err(RootError::NonFinite { at: x });
        }
        let mut step = fx / dfx;
        if dfx.abs() < f64::MIN_POSITIVE || !step.is_finite() {
            return Err(RootError::DerivativeVanished { at: x });
        }

        let mut next = x - step;
        let mut halvings = 0;
        while !valid(next) {
            if halvings == MAX_DAMPING_HALVINGS {
                return Err(RootError::NonConvergence { last: x, iterations });
            }
            step *= 0.5;
            next = x - step;
            halvings += 1;
        }

        iterations += 1;
        x = next;
        if step.abs() <= cfg.tolerance_at(x) {
            let residual = f(x);
            if !residual.is_finite() {
                return Err(RootError::NonFinite { at: x });
            }
            return Ok(RootResult {
                root: x,
                iterations,
                residual,
            });
        }
    }
    Err(RootError::NonConvergence { last: x, iterations })
}

/// Bisection on `[lo, hi]`; the endpoints may be given in either order.
pub fn bisection<F>(f: F, lo: f64, hi: f64, cfg: &RootConfig) -> Result<RootResult, RootError>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if !f_lo.is_finite() {
        return Err(RootError::NonFinite { at: lo });
    }
    if !f_hi.is_finite() {
        return Err(RootError::NonFinite { at: hi });
    }
    if f_lo == 0.0 {
        return Ok(RootResult { root: lo, iterations: 0, residual: 0.0 });
    }
    if f_hi == 0.0 {
        return Ok(RootResult { root: hi, iterations: 0, residual: 0.0 });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(RootError::NoBracket { lo, hi, f_lo, f_hi });
    }

    for iterations in 1..=cfg.max_iterations {
        let mid = lo + 0.5 * (hi - lo);
        let f_mid = f(mid);
        if !f_mid.is_finite() {
            return Err(RootError::NonFinite { at: mid });
        }
        if f_mid == 0.0 || 0.5 * (hi - lo) <= cfg.tolerance_at(mid) {
            return Ok(RootResult {
                root: mid,
                iterations,
                residual: f_mid,
            });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(RootError::NonConvergence {
        last: lo + 0.5 * (hi - lo),
        iterations: cfg.max_iterations,
    })
}
