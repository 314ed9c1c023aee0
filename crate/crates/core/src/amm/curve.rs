//! Stableswap and Cryptoswap invariants.
//!
//! Both share the form
//!
//! ```text
//! K D^(N-1) sum(x) + prod(x) = K D^N + (D/N)^N
//! ```
//!
//! with `K0 = prod(x) N^N / D^N` and
//!
//! * Stableswap: `K = A K0`
//! * Cryptoswap: `K = A K0 gamma^2 / (gamma + 1 - K0)^2`
//!
//! Residuals are evaluated after dividing through by `D^N`, i.e. in terms of
//! `u_i = x_i / D`, which keeps every term O(1) for any reserve scale.

use crate::numerics::{bisection, newton_raphson_within, RootConfig, RootError, RootResult};

use super::AmmError;

/// Halvings/doublings allowed while searching for a sign change.
const MAX_BRACKET_STEPS: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    Stableswap { a: f64 },
    Cryptoswap { a: f64, gamma: f64 },
}

impl Curve {
    /// `K` and `dK/dK0` at the given `K0`.
    fn k(&self, k0: f64) -> (f64, f64) {
        match *self {
            Curve::Stableswap { a } => (a * k0, a),
            Curve::Cryptoswap { a, gamma } => {
                let g = gamma + (1.0 - k0);
                let g2 = g * g;
                let k = a * k0 * gamma * gamma / g2;
                let dk = a * gamma * gamma * (g + 2.0 * k0) / (g2 * g);
                (k, dk)
            }
        }
    }

    fn validate(&self) -> Result<(), AmmError> {
        match *self {
            Curve::Stableswap { a } if a > 0.0 && a.is_finite() => Ok(()),
            Curve::Cryptoswap { a, gamma }
                if a > 0.0 && a.is_finite() && gamma > 0.0 && gamma < 1.0 =>
            {
                Ok(())
            }
            _ => Err(AmmError::InvalidParams(format!("{self:?}"))),
        }
    }
}

/// Sum and product of `x_i / d`, and `N^-N`, optionally with `x[j]`
/// replaced by `v`.
fn normalized(x: &[f64], d: f64, replace: Option<(usize, f64)>) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (mut sum, mut prod) = (0.0, 1.0);
    for (i, &xi) in x.iter().enumerate() {
        let xi = match replace {
            Some((j, v)) if j == i => v,
            _ => xi,
        };
        let u = xi / d;
        sum += u;
        prod *= u;
    }
    (sum, prod, n.powi(-(x.len() as i32)))
}

/// Invariant residual divided by `D^N`; zero on the curve.
pub fn residual(curve: &Curve, x: &[f64], d: f64) -> f64 {
    residual_with(curve, x, d, None)
}

fn residual_with(curve: &Curve, x: &[f64], d: f64, replace: Option<(usize, f64)>) -> f64 {
    let (sum, prod, n_pow) = normalized(x, d, replace);
    let k0 = prod / n_pow;
    let (k, _) = curve.k(k0);
    k * (sum - 1.0) + prod - n_pow
}

/// Derivative of [`residual`] with respect to `d`.
fn residual_d_deriv(curve: &Curve, x: &[f64], d: f64) -> f64 {
    let n = x.len() as f64;
    let (sum, prod, n_pow) = normalized(x, d, None);
    let k0 = prod / n_pow;
    let (k, dk) = curve.k(k0);
    let dk_dd = dk * (-n * k0 / d);
    dk_dd * (sum - 1.0) - k * sum / d - n * prod / d
}

/// Derivative of [`residual`] with respect to `x[j]` at fixed `d`.
fn residual_x_deriv(curve: &Curve, x: &[f64], j: usize, xj: f64, d: f64) -> f64 {
    let (sum, prod, n_pow) = normalized(x, d, Some((j, xj)));
    let k0 = prod / n_pow;
    let (k, dk) = curve.k(k0);
    dk * k0 / xj * (sum - 1.0) + k / d + prod / xj
}

fn check_balances(x: &[f64]) -> Result<(), AmmError> {
    if x.len() < 2 {
        return Err(AmmError::TokenCount(x.len()));
    }
    if let Some(&bad) = x.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(AmmError::NonPositiveReserve(bad));
    }
    Ok(())
}

/// Newton-only D solve starting from `sum(x)`; no fallback.
pub fn solve_d_newton(curve: &Curve, x: &[f64], cfg: &RootConfig) -> Result<RootResult, AmmError> {
    curve.validate()?;
    check_balances(x)?;
    let start: f64 = x.iter().sum();
    Ok(newton_raphson_within(
        |d| residual(curve, x, d),
        |d| residual_d_deriv(curve, x, d),
        start,
        cfg,
        |d| d > 0.0 && d.is_finite(),
    )?)
}

/// Bisection-only D solve on `[max(x), N * sum(x)]`.
///
/// If the residual is already negative at `max(x)` (heavily skewed
/// reserves), the lower end is halved until the sign flips; the residual
/// tends to `+inf` as `D -> 0` so this always terminates.
pub fn solve_d_bisection(curve: &Curve, x: &[f64], cfg: &RootConfig) -> Result<RootResult, AmmError> {
    curve.validate()?;
    check_balances(x)?;
    let n = x.len() as f64;
    let f = |d: f64| residual(curve, x, d);
    let hi = n * x.iter().sum::<f64>();
    let mut lo = x.iter().copied().fold(f64::MIN_POSITIVE, f64::max);
    let mut steps = 0;
    while f(lo) < 0.0 {
        if steps == MAX_BRACKET_STEPS {
            let (f_lo, f_hi) = (f(lo), f(hi));
            return Err(RootError::NoBracket { lo, hi, f_lo, f_hi }.into());
        }
        lo *= 0.5;
        steps += 1;
    }
    Ok(bisection(f, lo, hi, cfg)?)
}

/// D with Newton first and bisection as fallback.
pub fn solve_d(curve: &Curve, x: &[f64], cfg: &RootConfig) -> Result<f64, AmmError> {
    match solve_d_newton(curve, x, cfg) {
        Ok(r) => Ok(r.root),
        Err(AmmError::Solver(_)) => Ok(solve_d_bisection(curve, x, cfg)?.root),
        Err(e) => Err(e),
    }
}

/// Solves the invariant at fixed `d` for balance `j`, all other balances held.
///
/// `guess` seeds Newton; on solver failure a sign-change bracket is grown
/// around the guess and bisected.
pub fn solve_balance(
    curve: &Curve,
    x: &[f64],
    j: usize,
    d: f64,
    guess: f64,
    cfg: &RootConfig,
) -> Result<f64, AmmError> {
    let f = |v: f64| residual_with(curve, x, d, Some((j, v)));
    let df = |v: f64| residual_x_deriv(curve, x, j, v, d);
    let valid = |v: f64| v > 0.0 && v.is_finite();
    if let Ok(r) = newton_raphson_within(f, df, guess, cfg, valid) {
        return Ok(r.root);
    }

    // residual increases in x[j]: negative near zero, positive for large x[j]
    let (mut lo, mut hi) = (guess, guess);
    let mut steps = 0;
    while f(lo) > 0.0 {
        lo *= 0.5;
        steps += 1;
        if steps > MAX_BRACKET_STEPS {
            return Err(AmmError::Solver(RootError::NonConvergence { last: lo, iterations: steps }));
        }
    }
    while f(hi) < 0.0 {
        hi *= 2.0;
        steps += 1;
        if steps > MAX_BRACKET_STEPS {
            return Err(AmmError::Solver(RootError::NonConvergence { last: hi, iterations: steps }));
        }
    }
    Ok(bisection(f, lo, hi, cfg)?.root)
}

/// Pay-side increment that keeps the balances on their current level set
/// after `dy` is taken from balance `j`.
///
/// Solves `F(x + e) - F(x) = 0` with `e_j = -dy`, `e_i = delta`, where the
/// change is expanded algebraically so no term is formed as a difference of
/// two balance-sized numbers. `delta` is therefore accurate relative to
/// itself rather than to the reserve, which matters for small trades on deep
/// pools.
pub fn solve_exchange(
    curve: &Curve,
    x: &[f64],
    i: usize,
    j: usize,
    dy: f64,
    d: f64,
    cfg: &RootConfig,
) -> Result<f64, AmmError> {
    let step = ExchangeStep::new(curve, x, i, j, dy, d);
    let guess = x[i] * dy / (x[j] - dy);
    let valid = |v: f64| v > 0.0 && v.is_finite();
    if let Ok(r) = newton_raphson_within(|v| step.change(v).0, |v| step.change(v).1, guess, cfg, valid) {
        return Ok(r.root);
    }

    // change is increasing in delta and negative at delta = 0
    let mut hi = guess.max(dy);
    let mut steps = 0;
    while step.change(hi).0 < 0.0 {
        hi *= 2.0;
        steps += 1;
        if steps > MAX_BRACKET_STEPS {
            return Err(AmmError::Solver(RootError::NonConvergence { last: hi, iterations: steps }));
        }
    }
    Ok(bisection(|v| step.change(v).0, 0.0, hi, cfg)?.root)
}

/// Pre-trade quantities for [`solve_exchange`].
struct ExchangeStep<'a> {
    curve: &'a Curve,
    d: f64,
    n_pow_inv: f64,
    u_pay: f64,
    u_recv: f64,
    v_recv: f64,
    others: f64,
    sigma0: f64,
    k0: f64,
    h0: f64,
}

impl<'a> ExchangeStep<'a> {
    fn new(curve: &'a Curve, x: &[f64], i: usize, j: usize, dy: f64, d: f64) -> Self {
        let n = x.len() as i32;
        let others: f64 = x
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i && *k != j)
            .map(|(_, v)| v / d)
            .product();
        let sum: f64 = x.iter().map(|v| v / d).sum();
        let (u_pay, u_recv) = (x[i] / d, x[j] / d);
        let n_pow_inv = (n as f64).powi(n);
        let k0 = others * u_pay * u_recv * n_pow_inv;
        Self {
            curve,
            d,
            n_pow_inv,
            u_pay,
            u_recv,
            v_recv: -dy / d,
            others,
            sigma0: sum - 1.0,
            k0,
            h0: 1.0 - k0,
        }
    }

    /// `F(x + e) - F(x)` and its derivative in `delta`.
    fn change(&self, delta: f64) -> (f64, f64) {
        let v_pay = delta / self.d;
        let cross = v_pay * self.u_recv + self.u_pay * self.v_recv + v_pay * self.v_recv;
        let d_prod = self.others * cross;
        let d_prod_dv = self.others * (self.u_recv + self.v_recv) / self.d;
        let d_k0 = self.n_pow_inv * d_prod;
        let k0_1 = self.k0 + d_k0;
        let sigma1 = self.sigma0 + (v_pay + self.v_recv);

        let (k1, dk1, d_k) = match *self.curve {
            Curve::Stableswap { a } => (a * k0_1, a, a * d_k0),
            Curve::Cryptoswap { a, gamma } => {
                let g0 = gamma + self.h0;
                let g1 = gamma + (self.h0 - d_k0);
                let g12 = g1 * g1;
                let k1 = a * k0_1 * gamma * gamma / g12;
                let dk1 = a * gamma * gamma * (g1 + 2.0 * k0_1) / (g12 * g1);
                // K1 - K0 without cancellation
                let num = d_k0 * (self.k0 * (g0 + g1) + g0 * g0);
                let d_k = a * gamma * gamma * num / (g0 * g0 * g12);
                (k1, dk1, d_k)
            }
        };

        let value = d_k * self.sigma0 + k1 * (v_pay + self.v_recv) + d_prod;
        let slope = dk1 * self.n_pow_inv * d_prod_dv * sigma1 + k1 / self.d + d_prod_dv;
        (value, slope)
    }
}

/// Cryptoswap D for the given balances.
pub fn cryptoswap_solve_d(x: &[f64], a: f64, gamma: f64) -> Result<f64, AmmError> {
    solve_d(&Curve::Cryptoswap { a, gamma }, x, &RootConfig::default())
}

/// Stableswap D for the given balances.
pub fn stableswap_solve_d(x: &[f64], a: f64) -> Result<f64, AmmError> {
    solve_d(&Curve::Stableswap { a }, x, &RootConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CRYPTO: Curve = Curve::Cryptoswap { a: 50.0, gamma: 1e-8 };

    #[test]
    fn balanced_pools_have_d_equal_n_x() {
        for &x in &[1.0, 1e3, 1e8] {
            for n in [2usize, 3] {
                let bal = vec![x; n];
                let d = cryptoswap_solve_d(&bal, 50.0, 1e-8).unwrap();
                assert!((d - n as f64 * x).abs() <= 1e-10, "crypto n={n} x={x} d={d}");
                let d = stableswap_solve_d(&bal, 50.0).unwrap();
                assert!((d - n as f64 * x).abs() <= 1e-10, "stable n={n} x={x} d={d}");
            }
        }
    }

    #[test]
    fn balanced_identity_on_bisection_bracket() {
        // the bracket [x, 4x] of a balanced 2-token pool contains D = 2x
        let x = 1234.5;
        let f = |d: f64| residual(&CRYPTO, &[x, x], d);
        let r = bisection(f, x, 4.0 * x, &RootConfig::default()).unwrap();
        assert!((r.root - 2.0 * x).abs() <= 1e-9 * x);
    }

    #[test]
    fn cryptoswap_d_matches_bisection() {
        let x = [1.0e6, 9.0e5];
        let cfg = RootConfig::default();
        let newton = solve_d_newton(&CRYPTO, &x, &cfg).unwrap();
        let bis = solve_d_bisection(&CRYPTO, &x, &cfg).unwrap();
        assert!(((newton.root - bis.root) / bis.root).abs() <= 1e-8);
        assert!(newton.iterations <= 100);
    }

    #[test]
    fn stableswap_d_matches_bisection() {
        let curve = Curve::Stableswap { a: 50.0 };
        let x = [1.0e6, 9.0e5];
        let cfg = RootConfig::default();
        let d = stableswap_solve_d(&x, 50.0).unwrap();
        let bis = solve_d_bisection(&curve, &x, &cfg).unwrap();
        assert!(((d - bis.root) / bis.root).abs() <= 1e-8);
    }

    #[test]
    fn stableswap_large_amplification_tends_to_sum() {
        let d = stableswap_solve_d(&[1.0e6, 9.0e5], 1e9).unwrap();
        assert!((d / 1.9e6 - 1.0).abs() <= 1e-4);
    }

    #[test]
    fn skewed_reserves_extend_bracket_downward() {
        // D is far below max(x) here
        let x = [1e6, 1.0];
        let r = solve_d_bisection(&CRYPTO, &x, &RootConfig::default()).unwrap();
        assert!(r.root < 1e6);
        assert!(residual(&CRYPTO, &x, r.root).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(cryptoswap_solve_d(&[1.0, 0.0], 50.0, 1e-8), Err(AmmError::NonPositiveReserve(_))));
        assert!(matches!(cryptoswap_solve_d(&[1.0], 50.0, 1e-8), Err(AmmError::TokenCount(1))));
        assert!(matches!(cryptoswap_solve_d(&[1.0, 1.0], 50.0, 1.5), Err(AmmError::InvalidParams(_))));
        assert!(matches!(stableswap_solve_d(&[1.0, 1.0], -1.0), Err(AmmError::InvalidParams(_))));
    }

    #[test]
    fn balance_solve_recovers_removed_amount() {
        let x = [1e6, 1.1e6, 0.9e6];
        let d = cryptoswap_solve_d(&x, 50.0, 1e-8).unwrap();
        let mut moved = x;
        moved[1] -= 1e4;
        let x0 = solve_balance(&CRYPTO, &moved, 0, d, x[0], &RootConfig::default()).unwrap();
        assert!(x0 > x[0]);
        moved[0] = x0;
        assert!(residual(&CRYPTO, &moved, d).abs() < 1e-12);
    }

    #[test]
    fn exchange_solve_agrees_with_absolute_solve() {
        let cfg = RootConfig::default();
        for curve in [CRYPTO, Curve::Cryptoswap { a: 120.0, gamma: 1e-4 }, Curve::Stableswap { a: 50.0 }] {
            for x in [vec![1e6, 1.1e6, 0.9e6], vec![2e5, 3e5]] {
                let d = solve_d(&curve, &x, &cfg).unwrap();
                let dy = 2e4;
                let delta = solve_exchange(&curve, &x, 0, 1, dy, d, &cfg).unwrap();
                let mut moved = x.clone();
                moved[1] -= dy;
                let abs = solve_balance(&curve, &moved, 0, d, x[0] + dy, &cfg).unwrap() - x[0];
                assert!(((delta - abs) / abs).abs() < 1e-8, "{curve:?} {x:?}: {delta} vs {abs}");
            }
        }
    }

    #[test]
    fn exchange_derivative_matches_finite_difference() {
        let x = [3.0e5, 2.2e5, 4.1e5];
        for curve in [CRYPTO, Curve::Cryptoswap { a: 120.0, gamma: 1e-4 }, Curve::Stableswap { a: 50.0 }] {
            let d = solve_d(&curve, &x, &RootConfig::default()).unwrap();
            let step = ExchangeStep::new(&curve, &x, 2, 0, 1e4, d);
            let (v, h) = (1.3e4, 1.0);
            let fd = (step.change(v + h).0 - step.change(v - h).0) / (2.0 * h);
            let an = step.change(v).1;
            assert!(((fd - an) / an).abs() < 1e-6, "{curve:?}: {fd} vs {an}");
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let x = [3.0e5, 2.2e5, 4.1e5];
        for curve in [CRYPTO, Curve::Cryptoswap { a: 120.0, gamma: 1e-4 }, Curve::Stableswap { a: 50.0 }] {
            let d = 8.9e5;
            let h = 1e-3;
            let fd = (residual(&curve, &x, d + h) - residual(&curve, &x, d - h)) / (2.0 * h);
            let an = residual_d_deriv(&curve, &x, d);
            assert!(((fd - an) / an).abs() < 1e-5, "{curve:?} dD {fd} vs {an}");

            let mut up = x;
            let mut dn = x;
            up[1] += h;
            dn[1] -= h;
            let fd = (residual(&curve, &up, d) - residual(&curve, &dn, d)) / (2.0 * h);
            let an = residual_x_deriv(&curve, &x, 1, x[1], d);
            assert!(((fd - an) / an).abs() < 1e-5, "{curve:?} dx {fd} vs {an}");
        }
    }
}
