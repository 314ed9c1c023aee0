//! Day-by-volume simulation over an FX history, fee-breakdown aggregation
//! and the gas × volume × TVL comparison sweeps.
//!
//! Every day each scenario is re-seeded at that day's closes, an exact-output
//! buy is quoted on every eligible pool and the cheapest candidate is kept.
//! Days are independent, so they are processed in parallel when the
//! `parallel` feature is enabled; results are always collected in date order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::cost::{gas_fee, CostBreakdown, GasModel, Layer};
use crate::currency::{Currency, Rates};
use crate::market_data::{pools_for_date, FxRow, FxSeries, ScenarioSpec};
use crate::router::{quote_all, route, Candidate, TradeRequest, Venue};

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("invalid backtest config: {0}")]
    InvalidConfig(String),
    #[error("report has no successful rows")]
    EmptyReport,
    #[error("comparison needs two scenarios, got {0}")]
    NeedTwoScenarios(usize),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// `n` points from `lo` to `hi` evenly spaced in log10, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    i if i == n - 1 => hi,
                    i => 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64),
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestConfig {
    pub scenarios: Vec<ScenarioSpec>,
    /// Trade sizes, in units of `receive` (EUR by default).
    pub volumes_eur: Vec<f64>,
    /// L1 gas levels for the sweeps.
    pub gas_levels_eur: Vec<f64>,
    /// Liquidity levels for [`sweep_tvl`].
    pub tvl_levels_chf: Vec<f64>,
    /// Gas used by [`run_backtest`].
    pub gas: GasModel,
    pub pay: Currency,
    pub receive: Currency,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            scenarios: vec![ScenarioSpec::l1_mariana(), ScenarioSpec::l2l3_exchange()],
            volumes_eur: vec![1e4, 1e5, 1e6],
            gas_levels_eur: vec![15.0],
            tvl_levels_chf: vec![100e6],
            gas: GasModel::default(),
            pay: Currency::CHF,
            receive: Currency::EUR,
        }
    }
}

impl BacktestConfig {
    /// Default scenarios with the sweep grids: 30 log-spaced volumes in
    /// `[1, 1e6]` and 18 log-spaced gas levels in `[1, 1000]` plus 15 and 800.
    pub fn sweep_default() -> Self {
        let mut gas = log_grid(1.0, 1000.0, 18);
        gas.extend([15.0, 800.0]);
        gas.sort_by(f64::total_cmp);
        Self {
            volumes_eur: log_grid(1.0, 1e6, 30),
            gas_levels_eur: gas,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), BacktestError> {
        let check = |name: &str, grid: &[f64], allow_zero: bool| {
            if grid.is_empty() {
                return Err(BacktestError::InvalidConfig(format!("{name} is empty")));
            }
            match grid.iter().find(|&&v| !(v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0)))) {
                Some(v) => Err(BacktestError::InvalidConfig(format!("{name} contains {v}"))),
                None => Ok(()),
            }
        };
        check("volumes_eur", &self.volumes_eur, false)?;
        check("gas_levels_eur", &self.gas_levels_eur, true)?;
        check("tvl_levels_chf", &self.tvl_levels_chf, false)?;
        if !self.gas.is_valid() {
            return Err(BacktestError::InvalidConfig(format!("gas model {:?}", self.gas)));
        }
        if self.pay == self.receive {
            return Err(BacktestError::InvalidConfig("pay and receive currencies are equal".into()));
        }
        for s in &self.scenarios {
            s.validate().map_err(|e| BacktestError::InvalidConfig(e.to_string()))?;
        }
        Ok(())
    }

    fn trade(&self, volume: f64, date: NaiveDate) -> TradeRequest {
        TradeRequest {
            receive: self.receive,
            amount: volume,
            pay: self.pay,
            date: Some(date),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestRow {
    pub date: NaiveDate,
    pub scenario: String,
    pub volume_eur: f64,
    pub venue: String,
    pub pool: String,
    pub layer: Layer,
    pub price_impact_fraction: f64,
    pub cost: CostBreakdown,
}

/// A (date, scenario, volume) cell where seeding or every quote failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub date: NaiveDate,
    pub scenario: String,
    pub volume_eur: f64,
    pub message: String,
}

/// Means over the successful days of one scenario × volume.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub scenario: String,
    pub volume_eur: f64,
    pub days: usize,
    pub errors: usize,
    /// Each field is the mean of that column; `total` is the mean of the
    /// row totals.
    pub mean: CostBreakdown,
    pub mean_price_impact_fraction: f64,
    /// `venue/pool` → number of days it was chosen.
    pub chosen: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct BacktestReport {
    /// Sorted by date, then scenario and volume in config order.
    pub rows: Vec<BacktestRow>,
    pub errors: Vec<ErrorRow>,
    /// Scenario-major, in config order.
    pub aggregates: Vec<Aggregate>,
}

/// Arithmetic mean by running update; a constant column averages to that
/// constant exactly.
pub fn running_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut mean = 0.0;
    let mut n = 0.0;
    for v in values {
        n += 1.0;
        mean += (v - mean) / n;
    }
    if n == 0.0 {
        f64::NAN
    } else {
        mean
    }
}

fn map_days<T, F>(rows: &[FxRow], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&FxRow) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        rows.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        rows.iter().map(f).collect()
    }
}

/// Candidates for every volume of one scenario on one day.
fn quote_scenario(cfg: &BacktestConfig, spec: &ScenarioSpec, day: &FxRow) -> Vec<Result<Vec<Candidate>, String>> {
    let rates: Rates = day.rates();
    let venues: Vec<Venue> = match pools_for_date(spec, day) {
        Ok(v) => v,
        Err(e) => return cfg.volumes_eur.iter().map(|_| Err(format!("seeding: {e}"))).collect(),
    };
    cfg.volumes_eur
        .iter()
        .map(|&v| quote_all(&venues, &cfg.trade(v, day.date), &rates, &cfg.gas).map_err(|e| e.to_string()))
        .collect()
}

pub fn run_backtest(cfg: &BacktestConfig, series: &FxSeries) -> Result<BacktestReport, BacktestError> {
    cfg.validate()?;
    if cfg.scenarios.is_empty() {
        return Ok(BacktestReport::default());
    }

    let per_day = map_days(series.rows(), |day| {
        let mut rows = Vec::new();
        let mut errors = Vec::new();
        for spec in &cfg.scenarios {
            for (&volume, quoted) in cfg.volumes_eur.iter().zip(quote_scenario(cfg, spec, day)) {
                match quoted.and_then(|c| route(c).map_err(|e| e.to_string())) {
                    Ok(decision) => {
                        let c = decision.chosen;
                        rows.push(BacktestRow {
                            date: day.date,
                            scenario: spec.name.clone(),
                            volume_eur: volume,
                            venue: c.venue_id,
                            pool: c.pool_id,
                            layer: c.layer,
                            price_impact_fraction: c.quote.price_impact_fraction,
                            cost: c.breakdown,
                        });
                    }
                    Err(message) => errors.push(ErrorRow {
                        date: day.date,
                        scenario: spec.name.clone(),
                        volume_eur: volume,
                        message,
                    }),
                }
            }
        }
        (rows, errors)
    });

    let mut report = BacktestReport::default();
    for (rows, errors) in per_day {
        report.rows.extend(rows);
        report.errors.extend(errors);
    }
    report.aggregates = aggregate(cfg, &report);
    Ok(report)
}

fn aggregate(cfg: &BacktestConfig, report: &BacktestReport) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for spec in &cfg.scenarios {
        for &volume in &cfg.volumes_eur {
            let rows: Vec<&BacktestRow> = report
                .rows
                .iter()
                .filter(|r| r.scenario == spec.name && r.volume_eur == volume)
                .collect();
            let errors = report
                .errors
                .iter()
                .filter(|r| r.scenario == spec.name && r.volume_eur == volume)
                .count();
            let mut chosen = BTreeMap::new();
            for r in &rows {
                *chosen.entry(format!("{}/{}", r.venue, r.pool)).or_insert(0) += 1;
            }
            let col = |f: fn(&BacktestRow) -> f64| running_mean(rows.iter().map(|r| f(r)));
            out.push(Aggregate {
                scenario: spec.name.clone(),
                volume_eur: volume,
                days: rows.len(),
                errors,
                mean: CostBreakdown {
                    gas_fee: col(|r| r.cost.gas_fee),
                    lp_fee: col(|r| r.cost.lp_fee),
                    price_impact_cost: col(|r| r.cost.price_impact_cost),
                    total: col(|r| r.cost.total),
                },
                mean_price_impact_fraction: col(|r| r.price_impact_fraction),
                chosen,
            });
        }
    }
    out
}

impl BacktestReport {
    pub fn aggregate_for(&self, scenario: &str, volume: f64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.scenario == scenario && a.volume_eur == volume)
    }

    pub fn write_rows_csv<W: Write>(&self, writer: W) -> Result<(), BacktestError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "date",
            "scenario",
            "volume_eur",
            "venue",
            "pool",
            "gas_eur",
            "lp_fee_eur",
            "impact_eur",
            "total_eur",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.date.to_string(),
                r.scenario.clone(),
                r.volume_eur.to_string(),
                r.venue.clone(),
                r.pool.clone(),
                r.cost.gas_fee.to_string(),
                r.cost.lp_fee.to_string(),
                r.cost.price_impact_cost.to_string(),
                r.cost.total.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_errors_csv<W: Write>(&self, writer: W) -> Result<(), BacktestError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "scenario", "volume_eur", "error"])?;
        for e in &self.errors {
            w.write_record([e.date.to_string(), e.scenario.clone(), e.volume_eur.to_string(), e.message.clone()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One line of the fee breakdown table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub scenario: String,
    pub volume_eur: f64,
    pub days: usize,
    pub errors: usize,
    pub total_fee: f64,
    pub gas_fee: f64,
    pub swap_fee: f64,
    pub price_impact: f64,
}

impl TableRow {
    fn cells(&self) -> [(f64, i64); 4] {
        let bps = |x| (x, CostBreakdown::bps(x, self.volume_eur));
        [bps(self.total_fee), bps(self.gas_fee), bps(self.swap_fee), bps(self.price_impact)]
    }
}

pub const TABLE_HEADERS: [&str; 4] = ["Total Fee", "Gas Fee", "Swap Fee", "Price Impact"];

pub fn aggregate_table(report: &BacktestReport) -> Result<Vec<TableRow>, BacktestError> {
    if report.rows.is_empty() {
        return Err(BacktestError::EmptyReport);
    }
    Ok(report
        .aggregates
        .iter()
        .filter(|a| a.days > 0)
        .map(|a| TableRow {
            scenario: a.scenario.clone(),
            volume_eur: a.volume_eur,
            days: a.days,
            errors: a.errors,
            total_fee: a.mean.total,
            gas_fee: a.mean.gas_fee,
            swap_fee: a.mean.lp_fee,
            price_impact: a.mean.price_impact_cost,
        })
        .collect())
}

fn fee_cell(value: f64, bps: i64) -> String {
    format!("{value:.2} ({bps}bps)")
}

/// Aligned plain-text rendering, one line per scenario × volume.
pub fn format_table_text(rows: &[TableRow]) -> String {
    let mut lines: Vec<Vec<String>> = vec![["Scenario", "Volume (EUR)"]
        .into_iter()
        .chain(TABLE_HEADERS)
        .map(String::from)
        .collect()];
    for r in rows {
        let mut line = vec![r.scenario.clone(), format!("{}", r.volume_eur)];
        line.extend(r.cells().iter().map(|&(v, b)| fee_cell(v, b)));
        lines.push(line);
    }
    let widths: Vec<usize> = (0..lines[0].len())
        .map(|i| lines.iter().map(|l| l[i].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in &lines {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (cell, &w))| if i < 2 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    let skipped: usize = rows.iter().map(|r| r.errors).sum();
    if skipped > 0 {
        let _ = writeln!(out, "({skipped} day/volume cells excluded after solver errors)");
    }
    out
}

pub fn write_table_csv<W: Write>(rows: &[TableRow], writer: W) -> Result<(), BacktestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "scenario",
        "volume_eur",
        "days",
        "errors",
        "total_fee_eur",
        "total_fee_bps",
        "gas_fee_eur",
        "gas_fee_bps",
        "swap_fee_eur",
        "swap_fee_bps",
        "price_impact_eur",
        "price_impact_bps",
    ])?;
    for r in rows {
        let mut rec = vec![r.scenario.clone(), r.volume_eur.to_string(), r.days.to_string(), r.errors.to_string()];
        for (v, b) in r.cells() {
            rec.push(v.to_string());
            rec.push(b.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean cost difference between two scenarios at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub gas_eur: f64,
    pub volume_eur: f64,
    pub tvl_chf: f64,
    /// Days where both scenarios produced a route.
    pub days: usize,
    pub mean_total_first: f64,
    pub mean_total_second: f64,
    /// Mean over days of `total(first) - total(second)`; positive when the
    /// second scenario is cheaper.
    pub diff_eur: f64,
    /// `100 * diff_eur / mean_total_first`.
    pub diff_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub first: String,
    pub second: String,
    /// Ordered by TVL, gas, then volume.
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn cell(&self, tvl: f64, gas: f64, volume: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.tvl_chf == tvl && c.gas_eur == gas && c.volume_eur == volume)
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<(), BacktestError> {
        writeln!(
            writer,
            "# diff_eur = mean total({}) - mean total({}); positive means {} is cheaper",
            self.first, self.second, self.second
        )?;
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["gas_eur", "volume_eur", "tvl_chf", "diff_eur", "diff_pct"])?;
        for c in &self.cells {
            w.write_record([
                c.gas_eur.to_string(),
                c.volume_eur.to_string(),
                c.tvl_chf.to_string(),
                c.diff_eur.to_string(),
                c.diff_pct.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Cheapest total at each gas level, re-costing the cached quotes.
fn totals_by_gas(cfg: &BacktestConfig, candidates: &[Candidate]) -> Vec<f64> {
    cfg.gas_levels_eur
        .iter()
        .map(|&g| {
            let gas = cfg.gas.with_l1_gas(g);
            candidates
                .iter()
                .map(|c| CostBreakdown::new(gas_fee(c.layer, &gas), c.breakdown.lp_fee, c.breakdown.price_impact_cost).total)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

type GasTotals = (Vec<f64>, Vec<f64>);

/// Compares `scenarios[0]` against `scenarios[1]`, both re-seeded at `tvl_chf`,
/// over every gas level and volume.
pub fn sweep_gas_volume(cfg: &BacktestConfig, series: &FxSeries, tvl_chf: f64) -> Result<SweepGrid, BacktestError> {
    cfg.validate()?;
    if cfg.scenarios.len() < 2 {
        return Err(BacktestError::NeedTwoScenarios(cfg.scenarios.len()));
    }
    if !(tvl_chf > 0.0 && tvl_chf.is_finite()) {
        return Err(BacktestError::InvalidConfig(format!("tvl {tvl_chf}")));
    }
    let first = cfg.scenarios[0].with_total_liquidity(tvl_chf);
    let second = cfg.scenarios[1].with_total_liquidity(tvl_chf);

    // per day, per volume: totals by gas for both scenarios, if both routed
    let per_day: Vec<Vec<Option<GasTotals>>> = map_days(series.rows(), |day| {
        quote_scenario(cfg, &first, day)
            .into_iter()
            .zip(quote_scenario(cfg, &second, day))
            .map(|(a, b)| match (a, b) {
                (Ok(a), Ok(b)) => Some((totals_by_gas(cfg, &a), totals_by_gas(cfg, &b))),
                _ => None,
            })
            .collect()
    });

    let mut cells = Vec::with_capacity(cfg.gas_levels_eur.len() * cfg.volumes_eur.len());
    for (gi, &gas) in cfg.gas_levels_eur.iter().enumerate() {
        for (vi, &volume) in cfg.volumes_eur.iter().enumerate() {
            let pairs: Vec<(f64, f64)> = per_day
                .iter()
                .filter_map(|d| d[vi].as_ref().map(|(a, b)| (a[gi], b[gi])))
                .collect();
            let mean_first = running_mean(pairs.iter().map(|p| p.0));
            let diff = running_mean(pairs.iter().map(|p| p.0 - p.1));
            cells.push(SweepCell {
                gas_eur: gas,
                volume_eur: volume,
                tvl_chf,
                days: pairs.len(),
                mean_total_first: mean_first,
                mean_total_second: running_mean(pairs.iter().map(|p| p.1)),
                diff_eur: diff,
                diff_pct: 100.0 * diff / mean_first,
            });
        }
    }
    Ok(SweepGrid {
        first: first.name,
        second: second.name,
        cells,
    })
}

/// [`sweep_gas_volume`] at every TVL level, concatenated.
pub fn sweep_tvl(cfg: &BacktestConfig, series: &FxSeries) -> Result<SweepGrid, BacktestError> {
    cfg.validate()?;
    let mut grids = cfg
        .tvl_levels_chf
        .iter()
        .map(|&tvl| sweep_gas_volume(cfg, series, tvl))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = grids.remove(0);
    for g in grids {
        out.cells.extend(g.cells);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(days: usize) -> FxSeries {
        let start: NaiveDate = "2023-01-02".parse().unwrap();
        FxSeries::new(
            (0..days)
                .map(|i| FxRow {
                    date: start + chrono::Days::new(i as u64),
                    chf_eur: 1.0 + 0.01 * i as f64,
                    chf_sgd: 1.45 + 0.005 * i as f64,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1.0, 1e6, 30);
        assert_eq!(g.len(), 30);
        assert_eq!((g[0], g[29]), (1.0, 1e6));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(log_grid(1.0, 1000.0, 4)[1], 10f64.powf(1.0));
        let sweep = BacktestConfig::sweep_default();
        assert_eq!(sweep.gas_levels_eur.len(), 20);
        assert!(sweep.gas_levels_eur.contains(&800.0) && sweep.gas_levels_eur.contains(&15.0));
    }

    #[test]
    fn running_mean_of_constants_is_exact() {
        assert_eq!(running_mean(std::iter::repeat_n(0.3, 781)), 0.3);
        assert_eq!(running_mean([1.0, 2.0, 6.0]), 3.0);
        assert!(running_mean([]).is_nan());
    }

    #[test]
    fn one_row_per_day_scenario_volume() {
        let report = run_backtest(&BacktestConfig::default(), &series(3)).unwrap();
        assert_eq!(report.rows.len(), 3 * 2 * 3);
        assert!(report.errors.is_empty());
        assert!(report.rows.windows(2).all(|w| w[0].date <= w[1].date));
        for r in &report.rows {
            assert_eq!(r.cost.total, r.cost.gas_fee + r.cost.lp_fee + r.cost.price_impact_cost);
        }
        let a = report.aggregate_for("l1-mariana", 1e4).unwrap();
        assert_eq!(a.days, 3);
        assert_eq!(a.chosen.values().sum::<usize>(), 3);
    }

    #[test]
    fn single_day_aggregate_equals_row() {
        let report = run_backtest(&BacktestConfig::default(), &series(1)).unwrap();
        for a in &report.aggregates {
            let row = report
                .rows
                .iter()
                .find(|r| r.scenario == a.scenario && r.volume_eur == a.volume_eur)
                .unwrap();
            assert_eq!(a.mean, row.cost);
        }
    }

    #[test]
    fn zero_scenarios_empty_report() {
        let cfg = BacktestConfig {
            scenarios: vec![],
            ..BacktestConfig::default()
        };
        let report = run_backtest(&cfg, &series(2)).unwrap();
        assert_eq!(report, BacktestReport::default());
        assert!(matches!(aggregate_table(&report), Err(BacktestError::EmptyReport)));
    }

    #[test]
    fn failing_cells_become_error_rows() {
        // 2e8 EUR out of a 1e8 CHF system exceeds every CLMM range and the
        // Curve pools' reserves
        let cfg = BacktestConfig {
            volumes_eur: vec![1e4, 2e8],
            ..BacktestConfig::default()
        };
        let report = run_backtest(&cfg, &series(2)).unwrap();
        assert_eq!(report.rows.len() + report.errors.len(), 2 * 2 * 2);
        assert!(report.errors.iter().all(|e| e.volume_eur == 2e8));
        let a = report.aggregate_for("l1-mariana", 2e8).unwrap();
        assert_eq!((a.days, a.errors), (0, 2));
        let table = aggregate_table(&report).unwrap();
        assert!(table.iter().all(|r| r.volume_eur == 1e4));
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            BacktestConfig { volumes_eur: vec![], ..BacktestConfig::default() },
            BacktestConfig { volumes_eur: vec![0.0], ..BacktestConfig::default() },
            BacktestConfig { gas_levels_eur: vec![-1.0], ..BacktestConfig::default() },
            BacktestConfig { tvl_levels_chf: vec![f64::NAN], ..BacktestConfig::default() },
            BacktestConfig { receive: Currency::CHF, ..BacktestConfig::default() },
        ];
        for cfg in bad {
            assert!(matches!(run_backtest(&cfg, &series(1)), Err(BacktestError::InvalidConfig(_))));
        }
        let one = BacktestConfig {
            scenarios: vec![ScenarioSpec::l1_mariana()],
            ..BacktestConfig::default()
        };
        assert!(matches!(sweep_gas_volume(&one, &series(1), 1e8), Err(BacktestError::NeedTwoScenarios(1))));
    }

    #[test]
    fn table_layout() {
        let report = run_backtest(&BacktestConfig::default(), &series(2)).unwrap();
        let table = aggregate_table(&report).unwrap();
        assert_eq!(table.len(), 6);
        let text = format_table_text(&table);
        let header = text.lines().next().unwrap();
        for h in TABLE_HEADERS {
            assert!(header.contains(h));
        }
        assert!(text.contains("15.00 (15bps)"));
        let mut buf = Vec::new();
        write_table_csv(&table, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
    }

    #[test]
    fn sweep_small_volume_limit() {
        let cfg = BacktestConfig {
            volumes_eur: vec![1e-6],
            gas_levels_eur: vec![15.0],
            ..BacktestConfig::default()
        };
        let grid = sweep_gas_volume(&cfg, &series(2), 100e6).unwrap();
        assert_eq!(grid.cells.len(), 1);
        assert!((grid.cells[0].diff_eur - 14.7).abs() < 1e-8);
    }

    #[test]
    fn sweep_matches_backtest_totals() {
        let cfg = BacktestConfig {
            gas_levels_eur: vec![15.0],
            ..BacktestConfig::default()
        };
        let s = series(3);
        let report = run_backtest(&cfg, &s).unwrap();
        let grid = sweep_gas_volume(&cfg, &s, 100e6).unwrap();
        for &v in &cfg.volumes_eur {
            let c = grid.cell(100e6, 15.0, v).unwrap();
            assert_eq!(c.mean_total_first, report.aggregate_for("l1-mariana", v).unwrap().mean.total);
            assert_eq!(c.mean_total_second, report.aggregate_for("l2l3-exchange", v).unwrap().mean.total);
        }
    }
}
