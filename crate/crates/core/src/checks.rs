//! Reference checks run by `fxswap check` and the acceptance tests.
//!
//! Each check returns a [`CheckOutcome`] instead of panicking so a caller
//! can report every result before deciding on an exit status.

use std::fmt;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::amm::{clmm_price_impact, solve_d_bisection, solve_d_newton, AmmParams, Curve, Pool};
use crate::backtest::{run_backtest, sweep_gas_volume, BacktestConfig, BacktestReport};
use crate::currency::{Currency, Rates};
use crate::market_data::{FxSeries, PRESET_L1_MARIANA, PRESET_L2L3_EXCHANGE};
use crate::numerics::RootConfig;

/// Reference fee levels in EUR.
pub const REFERENCE_L1_GAS: f64 = 15.0;
pub const REFERENCE_L2_GAS: f64 = 0.3;
/// `(volume, lp fee)` pairs.
pub const REFERENCE_SWAP_FEES: [(f64, f64); 3] = [(1e4, 1.0), (1e5, 10.0), (1e6, 100.0)];
/// Mean price-impact cost per volume 1e4, 1e5, 1e6.
pub const REFERENCE_IMPACT_L1: [f64; 3] = [0.01, 1.08, 10_271.42];
pub const REFERENCE_IMPACT_L2: [f64; 3] = [0.02, 15.33, 5_345.04];
pub const IMPACT_REL_TOLERANCE: f64 = 0.30;

pub const FEE_RUNTIME: Duration = Duration::from_secs(1);
pub const IMPACT_RUNTIME: Duration = Duration::from_secs(30);
pub const SWEEP_RUNTIME: Duration = Duration::from_secs(60);
pub const CROSSOVER_GAS: f64 = 800.0;
pub const CLMM_LARGE_SHARE: f64 = 0.90;

pub const BALANCED_ABS_TOLERANCE: f64 = 1e-10;
pub const ORACLE_REL_TOLERANCE: f64 = 1e-8;
pub const ORACLE_STATES: usize = 1000;
pub const HOMOGENEITY_REL_TOLERANCE: f64 = 1e-9;
pub const ROUND_TRIP_REL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(id: u8, name: &'static str, passed: bool, detail: String) -> Self {
        Self { id, name, passed, detail }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {} {}: {}", self.id, self.name, self.detail)
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn rel_err(actual: f64, expected: f64) -> f64 {
    ((actual - expected) / expected).abs()
}

/// Runs the default backtest once and reports it with its wall time.
pub fn default_backtest(series: &FxSeries) -> Result<(BacktestReport, Duration), String> {
    let (report, elapsed) = timed(|| run_backtest(&BacktestConfig::default(), series));
    report.map(|r| (r, elapsed)).map_err(|e| e.to_string())
}

pub fn fee_columns(report: &BacktestReport, elapsed: Duration) -> CheckOutcome {
    let mut bad = Vec::new();
    for (scenario, gas) in [(PRESET_L1_MARIANA, REFERENCE_L1_GAS), (PRESET_L2L3_EXCHANGE, REFERENCE_L2_GAS)] {
        for (volume, fee) in REFERENCE_SWAP_FEES {
            match report.aggregate_for(scenario, volume) {
                Some(a) if a.days > 0 => {
                    if a.mean.gas_fee != gas {
                        bad.push(format!("{scenario} {volume}: gas {} != {gas}", a.mean.gas_fee));
                    }
                    if a.mean.lp_fee != fee {
                        bad.push(format!("{scenario} {volume}: swap fee {} != {fee}", a.mean.lp_fee));
                    }
                }
                _ => bad.push(format!("{scenario} {volume}: no rows")),
            }
        }
    }
    if elapsed > FEE_RUNTIME {
        bad.push(format!("runtime {elapsed:.2?} > {FEE_RUNTIME:?}"));
    }
    let detail = if bad.is_empty() {
        format!("gas 15.0/0.3 and swap fees 1/10/100 exact; runtime {elapsed:.2?}")
    } else {
        bad.join("; ")
    };
    CheckOutcome::new(1, "exact fee columns", bad.is_empty(), detail)
}

pub fn price_impact_columns(report: &BacktestReport, elapsed: Duration) -> CheckOutcome {
    let mut parts = Vec::new();
    let mut passed = elapsed <= IMPACT_RUNTIME;
    for (scenario, reference) in [(PRESET_L1_MARIANA, REFERENCE_IMPACT_L1), (PRESET_L2L3_EXCHANGE, REFERENCE_IMPACT_L2)] {
        for (volume, expected) in [1e4, 1e5, 1e6].into_iter().zip(reference) {
            let actual = report
                .aggregate_for(scenario, volume)
                .map_or(f64::NAN, |a| a.mean.price_impact_cost);
            let err = rel_err(actual, expected);
            let ok = err <= IMPACT_REL_TOLERANCE;
            passed &= ok;
            parts.push(format!(
                "{scenario} {volume:.0e}: {actual:.4} vs {expected} ({}{:.0}%)",
                if ok { "" } else { "off by " },
                err * 100.0
            ));
        }
    }
    parts.push(format!("runtime {elapsed:.2?}"));
    CheckOutcome::new(2, "price impact within 30%", passed, parts.join("; "))
}

pub fn outperformance(report: &BacktestReport) -> CheckOutcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for volume in [1e4, 1e6] {
        let l1 = report.aggregate_for(PRESET_L1_MARIANA, volume).map_or(f64::NAN, |a| a.mean.total);
        let l2 = report.aggregate_for(PRESET_L2L3_EXCHANGE, volume).map_or(f64::NAN, |a| a.mean.total);
        passed &= l2 < l1;
        parts.push(format!("{volume:.0e}: l2l3 {l2:.4} vs l1 {l1:.4}"));
    }
    CheckOutcome::new(3, "l2l3 cheaper at 1e4 and 1e6", passed, parts.join("; "))
}

pub fn gas_crossover(series: &FxSeries) -> CheckOutcome {
    let cfg = BacktestConfig {
        gas_levels_eur: vec![CROSSOVER_GAS],
        ..BacktestConfig::sweep_default()
    };
    let (grid, elapsed) = timed(|| sweep_gas_volume(&cfg, series, 100e6));
    match grid {
        Err(e) => CheckOutcome::new(4, "gas crossover at 800", false, e.to_string()),
        Ok(grid) => {
            let worst = grid
                .cells
                .iter()
                .min_by(|a, b| a.diff_eur.total_cmp(&b.diff_eur))
                .copied();
            let all_ok = grid.cells.iter().all(|c| c.days > 0 && c.diff_eur >= 0.0);
            let passed = all_ok && elapsed <= SWEEP_RUNTIME;
            let detail = match worst {
                Some(w) => format!(
                    "{} volumes, min diff {:.4} EUR at volume {:.3e}; runtime {elapsed:.2?}",
                    grid.cells.len(),
                    w.diff_eur,
                    w.volume_eur
                ),
                None => "empty grid".into(),
            };
            CheckOutcome::new(4, "gas crossover at 800", passed, detail)
        }
    }
}

pub fn router_selection(report: &BacktestReport) -> CheckOutcome {
    let three_token = report
        .rows
        .iter()
        .filter(|r| r.scenario == PRESET_L2L3_EXCHANGE && r.venue == "l3-cryptoswap-3tok")
        .count();
    let (clmm, days) = report
        .aggregate_for(PRESET_L2L3_EXCHANGE, 1e6)
        .map_or((0, 0), |a| {
            let clmm = a.chosen.iter().filter(|(k, _)| k.starts_with("l3-clmm/")).map(|(_, n)| n).sum();
            (clmm, a.days)
        });
    let share = if days > 0 { clmm as f64 / days as f64 } else { 0.0 };
    let passed = three_token == 0 && share > CLMM_LARGE_SHARE;
    CheckOutcome::new(
        5,
        "router selection pattern",
        passed,
        format!("3-token pool chosen {three_token} times; CLMM at 1e6 on {:.1}% of {days} days", share * 100.0),
    )
}

fn solver_failures() -> Vec<String> {
    let mut bad = Vec::new();
    let cfg = RootConfig::default();
    let crypto = Curve::Cryptoswap { a: 50.0, gamma: 1e-8 };
    let stable = Curve::Stableswap { a: 50.0 };

    for curve in [crypto, stable] {
        for x in [1.0, 1e3, 1e8] {
            for n in [2usize, 3] {
                let xs = vec![x; n];
                match solve_d_newton(&curve, &xs, &cfg) {
                    Ok(d) if (d.root - n as f64 * x).abs() <= BALANCED_ABS_TOLERANCE => {}
                    other => bad.push(format!("balanced {curve:?} x={x} n={n}: {other:?}")),
                }
            }
        }
    }

    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..ORACLE_STATES {
        let n = rng.gen_range(2..=3);
        let base = 10f64.powf(rng.gen_range(0.0..9.0));
        let xs: Vec<f64> = (0..n).map(|_| base * rng.gen_range(0.5..2.0)).collect();
        let curve = Curve::Cryptoswap {
            a: rng.gen_range(10.0..200.0),
            gamma: 10f64.powf(rng.gen_range(-9.0..-4.0)),
        };
        match (solve_d_newton(&curve, &xs, &cfg), solve_d_bisection(&curve, &xs, &cfg)) {
            (Ok(a), Ok(b)) if rel_err(a.root, b.root) <= ORACLE_REL_TOLERANCE => {}
            other => {
                bad.push(format!("oracle {curve:?} {xs:?}: {other:?}"));
                break;
            }
        }
    }

    let rates = Rates::chf(1.05, 1.46);
    let tokens = [Currency::CHF, Currency::EUR, Currency::SGD];
    let pool = Pool::seed("p", AmmParams::Cryptoswap { a: 50.0, gamma: 1e-8 }, 1e-4, 1e8 / 3.0, &rates, &tokens)
        .expect("reference pool");
    let xs = pool.scaled_balances();
    let base_d = solve_d_newton(&crypto, &xs, &cfg).map(|r| r.root);
    let base_dx = pool.swap_exact_out(Currency::CHF, Currency::EUR, 1e5, 1.05).map(|q| q.input_amount);
    for c in [1e-3, 7.0, 1e4] {
        let scaled: Vec<f64> = xs.iter().map(|x| x * c).collect();
        let d = solve_d_newton(&crypto, &scaled, &cfg).map(|r| r.root);
        let dx = pool
            .scaled(c)
            .swap_exact_out(Currency::CHF, Currency::EUR, 1e5 * c, 1.05)
            .map(|q| q.input_amount);
        match (&base_d, d, &base_dx, dx) {
            (Ok(d0), Ok(d), Ok(dx0), Ok(dx))
                if rel_err(d, c * d0) <= HOMOGENEITY_REL_TOLERANCE && rel_err(dx, c * dx0) <= HOMOGENEITY_REL_TOLERANCE => {}
            other => bad.push(format!("homogeneity c={c}: {other:?}")),
        }
    }

    for dy in [1e3, 1e5, 1e7] {
        let trip = pool.swap_exact_out(Currency::CHF, Currency::EUR, dy, 1.05).and_then(|out| {
            let moved = pool.apply(&out);
            let back = moved.swap_exact_out(Currency::EUR, Currency::CHF, out.input_amount, 1.0 / 1.05)?;
            Ok(moved.apply(&back))
        });
        match trip {
            Ok(p) if p
                .reserves
                .iter()
                .zip(pool.reserves.iter())
                .all(|((_, a), (_, b))| rel_err(a, b) <= ROUND_TRIP_REL_TOLERANCE) => {}
            other => bad.push(format!("round trip dy={dy}: {:?}", other.map(|p| p.reserves))),
        }
    }

    let n0 = 1e8 / 6.0;
    let unit = clmm_price_impact(1e4, n0, 1.05, 1.05, 1.2);
    for k in [2.0, 10.0, 37.0] {
        match (&unit, clmm_price_impact(1e4 * k, n0, 1.05, 1.05, 1.2)) {
            (Ok(u), Ok(v)) if rel_err(v, k * u) <= 1e-12 => {}
            other => bad.push(format!("clmm linearity k={k}: {other:?}")),
        }
    }
    let near_one = clmm_price_impact(1e4, n0, 1.05, 1.05, 1.0 + 1e-12);
    match near_one {
        Ok(v) if v.abs() < 1e-15 => {}
        other => bad.push(format!("clmm alpha -> 1: {other:?}")),
    }
    bad
}

pub fn solver_properties() -> CheckOutcome {
    let bad = solver_failures();
    let detail = if bad.is_empty() {
        format!("balanced identity, {ORACLE_STATES} oracle states, homogeneity, round trip, clmm linearity")
    } else {
        bad.join("; ")
    };
    CheckOutcome::new(6, "solver properties", bad.is_empty(), detail)
}

pub fn determinism(series: &FxSeries, first: &BacktestReport) -> CheckOutcome {
    let render = |r: &BacktestReport| {
        let mut buf = Vec::new();
        r.write_rows_csv(&mut buf).map(|_| buf)
    };
    let outcome = run_backtest(&BacktestConfig::default(), series)
        .map_err(|e| e.to_string())
        .and_then(|second| Ok((render(first).map_err(|e| e.to_string())?, render(&second).map_err(|e| e.to_string())?)));
    match outcome {
        Ok((a, b)) => CheckOutcome::new(
            7,
            "deterministic report",
            a == b,
            format!("{} bytes, {}", a.len(), if a == b { "identical" } else { "differ" }),
        ),
        Err(e) => CheckOutcome::new(7, "deterministic report", false, e),
    }
}

/// Every check against `series`, in order.
pub fn run_all(series: &FxSeries) -> Vec<CheckOutcome> {
    let mut out = Vec::with_capacity(7);
    match default_backtest(series) {
        Ok((report, elapsed)) => {
            out.push(fee_columns(&report, elapsed));
            out.push(price_impact_columns(&report, elapsed));
            out.push(outperformance(&report));
            out.push(gas_crossover(series));
            out.push(router_selection(&report));
            out.push(solver_properties());
            out.push(determinism(series, &report));
        }
        Err(e) => {
            out.push(CheckOutcome::new(0, "default backtest", false, e));
            out.push(solver_properties());
        }
    }
    out
}
