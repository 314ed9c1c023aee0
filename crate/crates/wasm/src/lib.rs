//! Browser bindings: quote one trade, trace the cost breakdown over trade
//! size, and grid the L1 minus L2/L3 cost difference over gas and volume.
//!
//! Every export takes plain numbers and returns a JSON string. The `*_json`
//! functions hold the logic so they can be tested off the browser.

use chrono::NaiveDate;
use fxswap_core::backtest::{log_grid, sweep_gas_volume, BacktestConfig};
use fxswap_core::market_data::{pools_at_rates, FxRow, FxSeries};
use fxswap_core::router::best_route;
use fxswap_core::{Currency, GasModel, Rates, ScenarioSpec, TradeRequest};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 400;

fn preset(name: &str, tvl: f64) -> Result<ScenarioSpec, String> {
    let spec = ScenarioSpec::preset(name).ok_or_else(|| format!("unknown preset {name:?}"))?;
    if !(tvl > 0.0 && tvl.is_finite()) {
        return Err(format!("liquidity must be positive, got {tvl}"));
    }
    Ok(spec.with_total_liquidity(tvl))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn points(n: u32) -> Result<usize, String> {
    match n as usize {
        n @ 2..=MAX_POINTS => Ok(n),
        n => Err(format!("point count {n} outside 2..={MAX_POINTS}")),
    }
}

pub fn quote_json(preset_name: &str, pair: &str, volume: f64, rate_eur: f64, rate_sgd: f64, gas: f64, tvl: f64) -> Result<String, String> {
    let spec = preset(preset_name, tvl)?;
    let (pay, receive) = pair.split_once('/').ok_or("pair must look like CHF/EUR")?;
    let pay: Currency = pay.parse().map_err(|e| format!("{e}"))?;
    let receive: Currency = receive.parse().map_err(|e| format!("{e}"))?;
    let rates = Rates::chf(rate_eur, rate_sgd);
    let venues = pools_at_rates(&spec, &rates).map_err(|e| e.to_string())?;
    let trade = TradeRequest { receive, amount: volume, pay, date: None };
    let decision = best_route(&venues, &trade, &rates, &GasModel::default().with_l1_gas(gas)).map_err(|e| e.to_string())?;
    to_json(&decision)
}

#[derive(Debug, Serialize)]
struct CurvePoint {
    volume: f64,
    venue: Option<String>,
    pool: Option<String>,
    gas: f64,
    lp_fee: f64,
    impact: f64,
    total: f64,
}

/// Cheapest breakdown for `n` log-spaced EUR buys in `[vmin, vmax]`.
/// Sizes no venue can fill come back with `venue: null` and NaN costs.
#[allow(clippy::too_many_arguments)]
pub fn cost_curve_json(preset_name: &str, rate_eur: f64, rate_sgd: f64, gas: f64, tvl: f64, vmin: f64, vmax: f64, n: u32) -> Result<String, String> {
    let spec = preset(preset_name, tvl)?;
    if !(vmin > 0.0 && vmax > vmin && vmax.is_finite()) {
        return Err(format!("bad volume range [{vmin}, {vmax}]"));
    }
    let rates = Rates::chf(rate_eur, rate_sgd);
    let venues = pools_at_rates(&spec, &rates).map_err(|e| e.to_string())?;
    let gas_model = GasModel::default().with_l1_gas(gas);
    let curve: Vec<CurvePoint> = log_grid(vmin, vmax, points(n)?)
        .into_iter()
        .map(|v| match best_route(&venues, &TradeRequest::buy_eur_with_chf(v), &rates, &gas_model) {
            Ok(d) => CurvePoint {
                volume: v,
                venue: Some(d.chosen.venue_id.clone()),
                pool: Some(d.chosen.pool_id.clone()),
                gas: d.breakdown().gas_fee,
                lp_fee: d.breakdown().lp_fee,
                impact: d.breakdown().price_impact_cost,
                total: d.breakdown().total,
            },
            Err(_) => CurvePoint { volume: v, venue: None, pool: None, gas: f64::NAN, lp_fee: f64::NAN, impact: f64::NAN, total: f64::NAN },
        })
        .collect();
    to_json(&curve)
}

#[derive(Debug, Serialize)]
struct DiffGrid {
    gas: Vec<f64>,
    volume: Vec<f64>,
    /// Row-major by gas: `diff_eur[g][v]`.
    diff_eur: Vec<Vec<f64>>,
    diff_pct: Vec<Vec<f64>>,
}

/// `total(l1-mariana) - total(l2l3-exchange)` on one day's rates over a
/// log-spaced gas × volume grid.
#[allow(clippy::too_many_arguments)]
pub fn diff_grid_json(
    rate_eur: f64,
    rate_sgd: f64,
    tvl: f64,
    gas_min: f64,
    gas_max: f64,
    n_gas: u32,
    vol_min: f64,
    vol_max: f64,
    n_vol: u32,
) -> Result<String, String> {
    if !(gas_min > 0.0 && gas_max > gas_min && vol_min > 0.0 && vol_max > vol_min) {
        return Err("ranges must be positive and increasing".into());
    }
    let day = FxRow {
        date: NaiveDate::default(),
        chf_eur: rate_eur,
        chf_sgd: rate_sgd,
    };
    let series = FxSeries::new(vec![day]).map_err(|e| e.to_string())?;
    let cfg = BacktestConfig {
        volumes_eur: log_grid(vol_min, vol_max, points(n_vol)?),
        gas_levels_eur: log_grid(gas_min, gas_max, points(n_gas)?),
        tvl_levels_chf: vec![tvl],
        ..BacktestConfig::default()
    };
    let grid = sweep_gas_volume(&cfg, &series, tvl).map_err(|e| e.to_string())?;
    let nv = cfg.volumes_eur.len();
    let rows = |f: fn(&fxswap_core::backtest::SweepCell) -> f64| -> Vec<Vec<f64>> {
        grid.cells.chunks(nv).map(|row| row.iter().map(f).collect()).collect()
    };
    to_json(&DiffGrid {
        diff_eur: rows(|c| c.diff_eur),
        diff_pct: rows(|c| c.diff_pct),
        gas: cfg.gas_levels_eur,
        volume: cfg.volumes_eur,
    })
}

#[wasm_bindgen]
pub fn quote(preset: &str, pair: &str, volume: f64, rate_eur: f64, rate_sgd: f64, gas: f64, tvl: f64) -> Result<String, JsError> {
    quote_json(preset, pair, volume, rate_eur, rate_sgd, gas, tvl).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn cost_curve(preset: &str, rate_eur: f64, rate_sgd: f64, gas: f64, tvl: f64, vmin: f64, vmax: f64, n: u32) -> Result<String, JsError> {
    cost_curve_json(preset, rate_eur, rate_sgd, gas, tvl, vmin, vmax, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn diff_grid(
    rate_eur: f64,
    rate_sgd: f64,
    tvl: f64,
    gas_min: f64,
    gas_max: f64,
    n_gas: u32,
    vol_min: f64,
    vol_max: f64,
    n_vol: u32,
) -> Result<String, JsError> {
    diff_grid_json(rate_eur, rate_sgd, tvl, gas_min, gas_max, n_gas, vol_min, vol_max, n_vol).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn quote_picks_a_venue() {
        let v: Value = serde_json::from_str(&quote_json("l2l3-exchange", "CHF/EUR", 1e4, 1.05, 1.46, 15.0, 1e8).unwrap()).unwrap();
        assert_eq!(v["candidates"].as_array().unwrap().len(), 3);
        assert_eq!(v["chosen"]["breakdown"]["gas_fee"], 0.3);
        assert!(quote_json("nope", "CHF/EUR", 1e4, 1.05, 1.46, 15.0, 1e8).is_err());
        assert!(quote_json("l1-mariana", "CHFEUR", 1e4, 1.05, 1.46, 15.0, 1e8).is_err());
    }

    #[test]
    fn curve_has_requested_points() {
        let v: Value = serde_json::from_str(&cost_curve_json("l1-mariana", 1.05, 1.46, 15.0, 1e8, 1.0, 1e6, 25).unwrap()).unwrap();
        let pts = v.as_array().unwrap();
        assert_eq!(pts.len(), 25);
        assert_eq!(pts[24]["volume"], 1e6);
        assert!(cost_curve_json("l1-mariana", 1.05, 1.46, 15.0, 1e8, 1.0, 1e6, 1).is_err());
    }

    #[test]
    fn grid_shape_and_small_volume_limit() {
        let v: Value = serde_json::from_str(&diff_grid_json(1.05, 1.46, 1e8, 1.0, 1000.0, 4, 1e-6, 1e6, 6).unwrap()).unwrap();
        let rows = v["diff_eur"].as_array().unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].as_array().unwrap().len(), 6);
        // gas 1000 on L1 vs 20 on L2/L3 at a negligible volume
        let tiny = rows[3][0].as_f64().unwrap();
        assert!((tiny - 980.0).abs() < 1e-6, "{tiny}");
    }
}
