use std::io::Write;
use std::path::PathBuf;

use fxswap_core::backtest::{aggregate_table, log_grid, run_backtest, sweep_gas_volume, sweep_tvl};
use fxswap_core::market_data::{load_fx_csv, load_fx_pair_csvs, FxSeries};
use fxswap_core::{BacktestConfig, FxRow, GasModel};

fn sample() -> FxSeries {
    load_fx_csv(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/fx_sample.csv")).unwrap()
}

/// Every tenth day of the sample.
fn thinned() -> FxSeries {
    FxSeries::new(sample().rows().iter().step_by(10).copied().collect()).unwrap()
}

#[test]
fn sample_file_shape() {
    let s = sample();
    assert!(s.len() > 750);
    assert!(s.rows().windows(2).all(|w| w[0].date < w[1].date));
}

#[test]
fn default_report_csv() {
    let s = thinned();
    let report = run_backtest(&BacktestConfig::default(), &s).unwrap();
    assert_eq!(report.rows.len(), s.len() * 2 * 3);
    let mut buf = Vec::new();
    report.write_rows_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "date,scenario,volume_eur,venue,pool,gas_eur,lp_fee_eur,impact_eur,total_eur"
    );
    assert_eq!(lines.count(), report.rows.len());

    for a in &report.aggregates {
        let rows: Vec<_> = report
            .rows
            .iter()
            .filter(|r| r.scenario == a.scenario && r.volume_eur == a.volume_eur)
            .collect();
        let plain_mean = rows.iter().map(|r| r.cost.total).sum::<f64>() / rows.len() as f64;
        assert!(((a.mean.total - plain_mean) / plain_mean).abs() < 1e-12);
    }
    assert_eq!(aggregate_table(&report).unwrap().len(), 6);
}

#[test]
fn tvl_and_volume_scaling_leaves_ratios_unchanged() {
    let s = thinned();
    let volumes = vec![1e3, 1e4, 1e5, 1e6];
    let c = 7.0;
    let base = BacktestConfig {
        volumes_eur: volumes.clone(),
        gas_levels_eur: vec![15.0],
        ..BacktestConfig::default()
    };
    let scaled = BacktestConfig {
        volumes_eur: volumes.iter().map(|v| v * c).collect(),
        gas_levels_eur: vec![15.0 * c],
        gas: GasModel::default().with_l1_gas(15.0 * c),
        scenarios: base.scenarios.iter().map(|s| s.with_total_liquidity(s.total_liquidity_chf * c)).collect(),
        ..base.clone()
    };

    let r0 = run_backtest(&base, &s).unwrap();
    let r1 = run_backtest(&scaled, &s).unwrap();
    assert_eq!(r0.rows.len(), r1.rows.len());
    for (a, b) in r0.rows.iter().zip(&r1.rows) {
        assert_eq!((&a.venue, &a.pool), (&b.venue, &b.pool));
        assert!((a.price_impact_fraction - b.price_impact_fraction).abs() < 1e-9);
        assert!(((b.cost.total - c * a.cost.total) / b.cost.total).abs() < 1e-9);
    }

    let g0 = sweep_gas_volume(&base, &s, 100e6).unwrap();
    let g1 = sweep_gas_volume(&scaled, &s, 100e6 * c).unwrap();
    for (a, b) in g0.cells.iter().zip(&g1.cells) {
        // diff_pct is in percent; compare the underlying fraction
        assert!((a.diff_pct - b.diff_pct).abs() / 100.0 < 1e-9, "{a:?} {b:?}");
    }
}

#[test]
fn sweep_tvl_contains_single_level_sweep() {
    let s = thinned();
    let cfg = BacktestConfig {
        volumes_eur: log_grid(1.0, 1e6, 5),
        gas_levels_eur: vec![1.0, 15.0, 800.0],
        tvl_levels_chf: vec![100e6, 200e6],
        ..BacktestConfig::default()
    };
    let all = sweep_tvl(&cfg, &s).unwrap();
    assert_eq!(all.cells.len(), 2 * 3 * 5);
    let single = sweep_gas_volume(&cfg, &s, 100e6).unwrap();
    assert_eq!(&all.cells[..15], &single.cells[..]);

    // deeper pools make every trade cheaper
    for cell in &single.cells {
        let deep = all.cell(200e6, cell.gas_eur, cell.volume_eur).unwrap();
        assert!(deep.mean_total_first <= cell.mean_total_first);
        assert!(deep.mean_total_second <= cell.mean_total_second);
    }

    let mut buf = Vec::new();
    all.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# diff_eur = mean total(l1-mariana) - mean total(l2l3-exchange)"));
    assert_eq!(lines.next().unwrap(), "gas_eur,volume_eur,tvl_chf,diff_eur,diff_pct");
    assert_eq!(lines.count(), 30);
}

#[test]
fn pair_files_join_on_date() {
    let dir = tempfile::tempdir().unwrap();
    let eur = dir.path().join("eur.csv");
    let sgd = dir.path().join("sgd.csv");
    let rows: Vec<FxRow> = sample().rows()[..20].to_vec();
    let mut f = std::fs::File::create(&eur).unwrap();
    writeln!(f, "date,chf_eur").unwrap();
    for r in &rows {
        writeln!(f, "{},{}", r.date, r.chf_eur).unwrap();
    }
    let mut f = std::fs::File::create(&sgd).unwrap();
    writeln!(f, "date,chf_sgd").unwrap();
    for r in rows.iter().skip(5) {
        writeln!(f, "{},{}", r.date, r.chf_sgd).unwrap();
    }
    let joined = load_fx_pair_csvs(&eur, &sgd).unwrap();
    assert_eq!(joined.rows(), &rows[5..]);
}
