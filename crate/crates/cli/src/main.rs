use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use fxswap_core::backtest::{aggregate_table, format_table_text, run_backtest, sweep_tvl, write_table_csv};
use fxswap_core::checks;
use fxswap_core::router::best_route;
use fxswap_core::{BacktestConfig, Currency, GasModel, Rates, RouteDecision, ScenarioSpec, TradeRequest};

mod render;
mod run_config;

use run_config::{resolve_scenarios, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "fxswap", version, about = "Swap cost engine and backtester for CHF, EUR and SGD venues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quote one trade on every venue of a scenario and pick the cheapest.
    Quote(QuoteArgs),
    /// Run the daily backtest and write one row per day, scenario and volume.
    Backtest(RunArgs),
    /// Mean cost difference between the first two scenarios over gas, volume and TVL grids.
    Sweep(RunArgs),
    /// Average fee breakdown per scenario and volume.
    Table(RunArgs),
    /// Run the reference checks; exits nonzero if any fails.
    Check(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be non-negative, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

/// `PAY/RECEIVE`, e.g. `CHF/EUR` buys EUR with CHF.
fn pair(s: &str) -> Result<(Currency, Currency), String> {
    let (pay, receive) = s.split_once('/').ok_or("expected PAY/RECEIVE, e.g. CHF/EUR")?;
    let pay: Currency = pay.parse().map_err(|e| format!("{e}"))?;
    let receive: Currency = receive.parse().map_err(|e| format!("{e}"))?;
    if pay == receive {
        return Err("pay and receive currencies must differ".into());
    }
    Ok((pay, receive))
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reserved; every computation is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct QuoteArgs {
    #[arg(long, value_parser = pair, default_value = "CHF/EUR")]
    pair: (Currency, Currency),
    /// Amount of the receive currency to buy.
    #[arg(long, value_parser = positive)]
    volume: f64,
    /// Scenario preset or scenario file.
    #[arg(long, default_value = "l2l3-exchange")]
    preset: String,
    /// EUR per CHF.
    #[arg(long, value_parser = positive, requires = "rate_sgd")]
    rate_eur: Option<f64>,
    /// SGD per CHF.
    #[arg(long, value_parser = positive, requires = "rate_eur")]
    rate_sgd: Option<f64>,
    /// FX file to take rates from when no explicit rates are given.
    #[arg(long, conflicts_with_all = ["rate_eur", "rate_sgd"])]
    fx: Option<PathBuf>,
    /// Day in the FX file; defaults to the last one.
    #[arg(long, requires = "fx")]
    date: Option<NaiveDate>,
    /// L1 gas fee in EUR.
    #[arg(long, value_parser = non_negative, default_value_t = 15.0)]
    gas: f64,
    /// Total liquidity of the scenario in CHF.
    #[arg(long, value_parser = positive)]
    tvl: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Run settings file, or `default`.
    #[arg(long)]
    config: Option<String>,
    /// Combined `date,chf_eur,chf_sgd` file.
    #[arg(long, conflicts_with_all = ["fx_eur", "fx_sgd"])]
    fx: Option<PathBuf>,
    /// `date,chf_eur` file, joined with --fx-sgd.
    #[arg(long, requires = "fx_sgd")]
    fx_eur: Option<PathBuf>,
    #[arg(long, requires = "fx_eur")]
    fx_sgd: Option<PathBuf>,
    /// Scenario presets or files; repeatable.
    #[arg(long = "preset")]
    presets: Vec<String>,
    /// Trade sizes; repeatable.
    #[arg(long = "volume", value_parser = positive)]
    volumes: Vec<f64>,
    /// L1 gas in EUR; repeatable for sweeps.
    #[arg(long = "gas", value_parser = non_negative)]
    gas: Vec<f64>,
    /// Total liquidity in CHF; repeatable for sweeps.
    #[arg(long = "tvl", value_parser = positive)]
    tvl: Vec<f64>,
    /// Also write error rows here (backtest only).
    #[arg(long)]
    errors_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ArgumentConflict, msg).exit()
}

fn writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize>(value: &T, mut w: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn quote(args: QuoteArgs) -> Result<ExitCode> {
    let (pay, receive) = args.pair;
    let mut spec = ScenarioSpec::resolve(&args.preset).with_context(|| format!("scenario {:?}", args.preset))?;
    if let Some(tvl) = args.tvl {
        spec = spec.with_total_liquidity(tvl);
    }
    let (rates, date) = match (args.rate_eur, args.rate_sgd) {
        (Some(e), Some(s)) => (Rates::chf(e, s), None),
        _ => {
            let cfg = RunConfig::default();
            let series = cfg.load_series(args.fx.as_deref(), None)?;
            let row = match args.date {
                Some(d) => *series.get(d).with_context(|| format!("no FX row for {d}"))?,
                None => *series.rows().last().context("empty FX series")?,
            };
            (row.rates(), Some(row.date))
        }
    };
    let venues = fxswap_core::market_data::pools_at_rates(&spec, &rates).context("seeding pools")?;
    let mut trade = TradeRequest { receive, amount: args.volume, pay, date: None };
    if let Some(d) = date {
        trade = trade.on(d);
    }
    let gas = GasModel::default().with_l1_gas(args.gas);
    let decision: RouteDecision = best_route(&venues, &trade, &rates, &gas).context("routing")?;
    let w = writer(&args.output.out)?;
    match args.output.format.unwrap_or(Format::Text) {
        Format::Text => render::quote_text(&spec.name, &trade, &decision, w)?,
        Format::Csv => render::quote_csv(&decision, w)?,
        Format::Json => write_json(&decision, w)?,
    }
    Ok(ExitCode::SUCCESS)
}

/// Backtest config from defaults, the config file and flags, in that order.
fn build_config(args: &RunArgs, base: BacktestConfig, rc: &RunConfig, multi_gas: bool) -> Result<BacktestConfig> {
    let mut cfg = rc.apply(base)?;
    if !args.presets.is_empty() {
        cfg.scenarios = resolve_scenarios(&args.presets)?;
    }
    if !args.volumes.is_empty() {
        cfg.volumes_eur = args.volumes.clone();
    }
    if !args.tvl.is_empty() {
        cfg.tvl_levels_chf = args.tvl.clone();
    }
    match (multi_gas, args.gas.as_slice()) {
        (_, []) => {}
        (true, levels) => cfg.gas_levels_eur = levels.to_vec(),
        (false, [g]) => cfg.gas.l1_gas_eur = *g,
        (false, _) => usage_error("--gas may be given once for this command"),
    }
    if !multi_gas {
        match args.tvl.as_slice() {
            [] => {}
            [tvl] => cfg.scenarios = cfg.scenarios.iter().map(|s| s.with_total_liquidity(*tvl)).collect(),
            _ => usage_error("--tvl may be given once for this command"),
        }
    }
    Ok(cfg)
}

fn load(args: &RunArgs, base: BacktestConfig, multi_gas: bool) -> Result<(BacktestConfig, fxswap_core::FxSeries)> {
    let rc = RunConfig::load(args.config.as_deref())?;
    let cfg = build_config(args, base, &rc, multi_gas)?;
    let pair = args.fx_eur.as_deref().zip(args.fx_sgd.as_deref());
    let series = rc.load_series(args.fx.as_deref(), pair)?;
    Ok((cfg, series))
}

fn backtest(args: RunArgs) -> Result<ExitCode> {
    let (cfg, series) = load(&args, BacktestConfig::default(), false)?;
    let report = run_backtest(&cfg, &series)?;
    let w = writer(&args.output.out)?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => report.write_rows_csv(w)?,
        Format::Json => write_json(&report, w)?,
        Format::Text => {
            let rows = aggregate_table(&report)?;
            let mut w = w;
            write!(w, "{}", format_table_text(&rows))?;
        }
    }
    if let Some(p) = &args.errors_out {
        report.write_errors_csv(File::create(p).with_context(|| format!("creating {}", p.display()))?)?;
    }
    eprintln!(
        "backtest: {} days, {} scenarios, {} volumes: {} rows, {} error rows",
        series.len(),
        cfg.scenarios.len(),
        cfg.volumes_eur.len(),
        report.rows.len(),
        report.errors.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: RunArgs) -> Result<ExitCode> {
    let (cfg, series) = load(&args, BacktestConfig::sweep_default(), true)?;
    let grid = sweep_tvl(&cfg, &series)?;
    let w = writer(&args.output.out)?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv | Format::Text => grid.write_csv(w)?,
        Format::Json => write_json(&grid, w)?,
    }
    eprintln!(
        "sweep: {} cells over {} days ({} vs {})",
        grid.cells.len(),
        series.len(),
        grid.first,
        grid.second
    );
    Ok(ExitCode::SUCCESS)
}

fn table(args: RunArgs) -> Result<ExitCode> {
    let (cfg, series) = load(&args, BacktestConfig::default(), false)?;
    let report = run_backtest(&cfg, &series)?;
    let rows = aggregate_table(&report)?;
    let mut w = writer(&args.output.out)?;
    match args.output.format.unwrap_or(Format::Text) {
        Format::Text => write!(w, "{}", format_table_text(&rows))?,
        Format::Csv => write_table_csv(&rows, w)?,
        Format::Json => write_json(&rows, w)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn check(args: RunArgs) -> Result<ExitCode> {
    let rc = RunConfig::load(args.config.as_deref())?;
    let pair = args.fx_eur.as_deref().zip(args.fx_sgd.as_deref());
    let series = rc.load_series(args.fx.as_deref(), pair)?;
    let outcomes = checks::run_all(&series);
    let mut w = writer(&args.output.out)?;
    match args.output.format.unwrap_or(Format::Text) {
        Format::Json => write_json(&outcomes, &mut w)?,
        Format::Csv => {
            writeln!(w, "id,name,passed")?;
            for o in &outcomes {
                writeln!(w, "{},{},{}", o.id, o.name, o.passed)?;
            }
        }
        Format::Text => {
            for o in &outcomes {
                writeln!(w, "{o}")?;
            }
        }
    }
    w.flush()?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    eprintln!("check: {} passed, {failed} failed", outcomes.len() - failed);
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Quote(a) => quote(a),
        Command::Backtest(a) => backtest(a),
        Command::Sweep(a) => sweep(a),
        Command::Table(a) => table(a),
        Command::Check(a) => check(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
