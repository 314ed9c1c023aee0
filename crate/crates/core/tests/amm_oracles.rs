//! Exchange solves checked against values frozen from a 50-digit mpmath
//! solve of the same invariants, an in-test scan/bisection oracle written
//! directly from the invariant, and randomized structural properties.

#![allow(clippy::excessive_precision)]

use fxswap_core::amm::{clmm_price_impact, solve_d, ConcentratedRange, Curve};
use fxswap_core::numerics::RootConfig;
use fxswap_core::{AmmParams, Currency, Pool, Rates};
use proptest::prelude::*;

const CHF: Currency = Currency::CHF;
const EUR: Currency = Currency::EUR;
const SGD: Currency = Currency::SGD;
const S: f64 = 1.05;
const A: f64 = 50.0;
const GAMMA: f64 = 1e-8;

fn crypto() -> AmmParams {
    AmmParams::Cryptoswap { a: A, gamma: GAMMA }
}

fn rates() -> Rates {
    Rates::chf(S, 1.46)
}

fn three_token(n0: f64) -> Pool {
    Pool::seed("CHF-EUR-SGD", crypto(), 1e-4, n0, &rates(), &[CHF, EUR, SGD]).unwrap()
}

fn two_token(n0: f64) -> Pool {
    Pool::seed("CHF-EUR", crypto(), 1e-4, n0, &rates(), &[CHF, EUR]).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// `(volume, dx in CHF, impact cost in EUR)` from mpmath at 50 digits.
const FROZEN_THREE_TOKEN: [(f64, f64, f64); 3] = [
    (1e4, 9524.157298808066232, 0.36516374846954355),
    (1e5, 95487.936574355997, 262.33340307379635),
    (1e6, 980277.36866232643, 29291.237095442748),
];
const FROZEN_TWO_TOKEN: [(f64, f64, f64); 3] = [
    (1e4, 9532.9105317046008, 9.5560582898308479),
    (1e5, 96329.945663794504, 1146.4429469842292),
    (1e6, 1075219.1791974402, 128980.13815731223),
];

#[test]
fn cryptoswap_d_matches_mpmath() {
    let d = solve_d(&Curve::Cryptoswap { a: A, gamma: GAMMA }, &[1e6, 9e5], &RootConfig::default()).unwrap();
    assert!(rel(d, 1_897_369.461_195_629_7) < 1e-12, "{d}");
}

#[test]
fn exchange_matches_mpmath() {
    for (pool, frozen) in [(three_token(1e8 / 3.0), FROZEN_THREE_TOKEN), (two_token(1e8 / 12.0), FROZEN_TWO_TOKEN)] {
        for (dy, dx, impact) in frozen {
            let q = pool.swap_exact_out(CHF, EUR, dy, S).unwrap();
            assert!(rel(q.input_amount, dx) < 1e-12, "{} dy={dy}: {} vs {dx}", pool.id, q.input_amount);
            assert!(rel(q.price_impact_cost, impact) < 1e-7, "{} dy={dy}: {} vs {impact}", pool.id, q.price_impact_cost);
        }
    }
}

/// Invariant in its original polynomial form, `lhs - rhs`.
fn invariant_gap(x: &[f64], d: f64) -> f64 {
    let n = x.len() as f64;
    let sum: f64 = x.iter().sum();
    let prod: f64 = x.iter().product();
    let k0 = prod * n.powf(n) / d.powf(n);
    let k = A * k0 * GAMMA * GAMMA / (GAMMA + 1.0 - k0).powi(2);
    k * d.powf(n - 1.0) * sum + prod - k * d.powf(n) - (d / n).powf(n)
}

/// Pay-side balance restoring the invariant: coarse geometric scan for a
/// sign change, then plain bisection to adjacent floats.
fn oracle_pay_balance(x: &[f64], i: usize, d: f64) -> f64 {
    let at = |v: f64| {
        let mut y = x.to_vec();
        y[i] = v;
        invariant_gap(&y, d)
    };
    let mut lo = x[i];
    let mut hi = lo;
    let sign_lo = at(lo).signum();
    loop {
        hi *= 1.01;
        if at(hi).signum() != sign_lo {
            break;
        }
        lo = hi;
    }
    while hi - lo > 0.0 {
        let mid = lo + (hi - lo) / 2.0;
        if mid == lo || mid == hi {
            break;
        }
        if at(mid).signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + (hi - lo) / 2.0
}

#[test]
fn exchange_matches_scan_oracle() {
    for (pool, n) in [(three_token(1e8 / 3.0), 3.0), (two_token(1e8 / 12.0), 2.0)] {
        let n0 = pool.creation_notional;
        let d = n * n0;
        for dy in [3e3, 5e4, 2e6] {
            let mut x = vec![n0; n as usize];
            x[1] -= dy / S;
            let dx_oracle = oracle_pay_balance(&x, 0, d) - n0;
            let q = pool.swap_exact_out(CHF, EUR, dy, S).unwrap();
            assert!(rel(q.input_amount, dx_oracle) < 1e-9, "{} dy={dy}: {} vs {dx_oracle}", pool.id, q.input_amount);
        }
    }
}

#[test]
fn clmm_closed_form_is_first_order_of_exact_range() {
    let n0 = 1e8 / 6.0;
    let range = ConcentratedRange::seeded(n0, S, 1.2);
    for dy in [1.0, 1e2, 1e3] {
        let dx = range.x_in_for_y_out(n0, n0 * S, dy).unwrap();
        let exact = (dy / dx) / S - 1.0;
        let closed = -clmm_price_impact(dy, n0, S, S, 1.2).unwrap();
        // second-order remainder is O(fraction^2)
        assert!((exact - closed).abs() <= 2.0 * closed * closed + 1e-15, "dy={dy}: {exact} vs {closed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dx_is_homogeneous(n0 in 1e3f64..1e9, frac in 1e-6f64..0.3, c in prop::sample::select(vec![1e-3, 7.0, 1e4])) {
        let pool = three_token(n0);
        let dy = frac * n0 * S;
        let base = pool.swap_exact_out(CHF, EUR, dy, S).unwrap();
        let scaled = pool.scaled(c).swap_exact_out(CHF, EUR, dy * c, S).unwrap();
        prop_assert!(rel(scaled.input_amount, c * base.input_amount) < 1e-9);
        prop_assert!((scaled.price_impact_fraction - base.price_impact_fraction).abs() < 1e-9);
    }

    #[test]
    fn cost_is_increasing_and_convex(frac in 1e-5f64..0.3, two in any::<bool>()) {
        let pool = if two { two_token(1e8 / 12.0) } else { three_token(1e8 / 3.0) };
        let dy = frac * pool.creation_notional * S;
        let dx = |v: f64| pool.swap_exact_out(CHF, EUR, v, S).unwrap().input_amount;
        let (d1, d2, d3) = (dx(dy), dx(1.5 * dy), dx(2.0 * dy));
        prop_assert!(d1 < d2 && d2 < d3);
        prop_assert!(d1 + d3 >= 2.0 * d2 * (1.0 - 1e-12));
        prop_assert!(pool.swap_exact_out(CHF, EUR, dy, S).unwrap().price_impact_cost >= 0.0);
    }

    #[test]
    fn fee_free_round_trip_restores_reserves(frac in 1e-6f64..0.5, two in any::<bool>()) {
        let pool = if two { two_token(1e8 / 12.0) } else { three_token(1e8 / 3.0) };
        let dy = frac * pool.creation_notional * S;
        let out = pool.swap_exact_out(CHF, EUR, dy, S).unwrap();
        let moved = pool.apply(&out);
        let back = moved.swap_exact_out(EUR, CHF, out.input_amount, 1.0 / S).unwrap();
        let restored = moved.apply(&back);
        for ((_, a), (_, b)) in restored.reserves.iter().zip(pool.reserves.iter()) {
            prop_assert!(rel(a, b) < 1e-8);
        }
    }

    #[test]
    fn clmm_impact_is_linear(dy in 1.0f64..1e6, k in 1.0f64..10.0) {
        let one = clmm_price_impact(dy, 1e8 / 6.0, S, 1.02, 1.2).unwrap();
        let many = clmm_price_impact(dy * k, 1e8 / 6.0, S, 1.02, 1.2).unwrap();
        prop_assert!(rel(many, k * one) < 1e-12);
    }
}
