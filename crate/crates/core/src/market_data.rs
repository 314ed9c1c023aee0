//! Daily FX closes and per-day pool seeding.
//!
//! Pools are re-seeded every day at that day's closing rates with a fixed
//! value per pool, which is how arbitrage-aligned pool compositions are
//! materialised without simulating the arbitrage trades themselves.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amm::{AmmError, AmmParams, Pool};
use crate::cost::Layer;
use crate::currency::{Currency, Rates};
use crate::router::Venue;

const SHARE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MarketDataError {
    #[error("reading {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column {0:?} in header")]
    MissingColumn(&'static str),
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: {column} must be positive, got {value}")]
    NonPositiveRate { line: u64, column: &'static str, value: f64 },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("FX series is empty")]
    EmptySeries,
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("scenario file: {0}")]
    Toml(#[from] toml::de::Error),
}

/// One day's closes: CHF-EUR `S_t` and CHF-SGD `P_t` (units per CHF).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FxRow {
    pub date: NaiveDate,
    pub chf_eur: f64,
    pub chf_sgd: f64,
}

impl FxRow {
    pub fn rates(&self) -> Rates {
        Rates::chf(self.chf_eur, self.chf_sgd)
    }
}

/// Date-ordered FX closes with unique dates and positive rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FxSeries {
    rows: Vec<FxRow>,
}

impl FxSeries {
    pub fn new(mut rows: Vec<FxRow>) -> Result<Self, MarketDataError> {
        if rows.is_empty() {
            return Err(MarketDataError::EmptySeries);
        }
        for r in &rows {
            for (column, value) in [("chf_eur", r.chf_eur), ("chf_sgd", r.chf_sgd)] {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(MarketDataError::NonPositiveRate { line: 0, column, value });
                }
            }
        }
        rows.sort_by_key(|r| r.date);
        if let Some(w) = rows.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(MarketDataError::DuplicateDate(w[0].date));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[FxRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, date: NaiveDate) -> Option<&FxRow> {
        self.rows
            .binary_search_by_key(&date, |r| r.date)
            .ok()
            .map(|i| &self.rows[i])
    }
}

fn open(path: &Path) -> Result<File, MarketDataError> {
    File::open(path).map_err(|source| MarketDataError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn parse_date(line: u64, s: &str) -> Result<NaiveDate, MarketDataError> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| MarketDataError::MalformedRow {
        line,
        reason: format!("date {s:?}: {e}"),
    })
}

/// `None` for an empty field (the row is missing that pair).
fn parse_rate(line: u64, column: &'static str, s: &str) -> Result<Option<f64>, MarketDataError> {
    if s.is_empty() {
        return Ok(None);
    }
    let value: f64 = s.parse().map_err(|_| MarketDataError::MalformedRow {
        line,
        reason: format!("{column} {s:?} is not a number"),
    })?;
    if !value.is_finite() {
        return Err(MarketDataError::MalformedRow {
            line,
            reason: format!("{column} {s:?} is not finite"),
        });
    }
    if value <= 0.0 {
        return Err(MarketDataError::NonPositiveRate { line, column, value });
    }
    Ok(Some(value))
}

fn column(headers: &csv::StringRecord, name: &'static str) -> Result<usize, MarketDataError> {
    headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case(name))
        .ok_or(MarketDataError::MissingColumn(name))
}

/// Reads one `date,<rate>` column pair keyed by date.
fn read_column<R: Read>(reader: R, rate_col: &'static str) -> Result<BTreeMap<NaiveDate, f64>, MarketDataError> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers()?.clone();
    let date_idx = column(&headers, "date")?;
    let rate_idx = column(&headers, rate_col)?;
    let mut out = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let date = parse_date(line, record.get(date_idx).unwrap_or(""))?;
        if let Some(rate) = parse_rate(line, rate_col, record.get(rate_idx).unwrap_or(""))? {
            if out.insert(date, rate).is_some() {
                return Err(MarketDataError::DuplicateDate(date));
            }
        }
    }
    Ok(out)
}

/// Parses the combined `date,chf_eur,chf_sgd` format. Rows with an empty
/// rate field are dropped; malformed rows are errors.
pub fn read_fx_csv<R: Read>(reader: R) -> Result<FxSeries, MarketDataError> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers()?.clone();
    let date_idx = column(&headers, "date")?;
    let eur_idx = column(&headers, "chf_eur")?;
    let sgd_idx = column(&headers, "chf_sgd")?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let date = parse_date(line, record.get(date_idx).unwrap_or(""))?;
        let eur = parse_rate(line, "chf_eur", record.get(eur_idx).unwrap_or(""))?;
        let sgd = parse_rate(line, "chf_sgd", record.get(sgd_idx).unwrap_or(""))?;
        if let (Some(chf_eur), Some(chf_sgd)) = (eur, sgd) {
            rows.push(FxRow { date, chf_eur, chf_sgd });
        }
    }
    FxSeries::new(rows)
}

pub fn load_fx_csv(path: impl AsRef<Path>) -> Result<FxSeries, MarketDataError> {
    read_fx_csv(open(path.as_ref())?)
}

/// Inner-joins a `date,chf_eur` file with a `date,chf_sgd` file.
pub fn load_fx_pair_csvs(eur_path: impl AsRef<Path>, sgd_path: impl AsRef<Path>) -> Result<FxSeries, MarketDataError> {
    join_fx_columns(open(eur_path.as_ref())?, open(sgd_path.as_ref())?)
}

pub fn join_fx_columns<A: Read, B: Read>(eur: A, sgd: B) -> Result<FxSeries, MarketDataError> {
    let eur = read_column(eur, "chf_eur")?;
    let sgd = read_column(sgd, "chf_sgd")?;
    let rows = eur
        .into_iter()
        .filter_map(|(date, chf_eur)| sgd.get(&date).map(|&chf_sgd| FxRow { date, chf_eur, chf_sgd }))
        .collect();
    FxSeries::new(rows)
}

/// Writes the combined CSV format.
pub fn write_fx_csv<W: std::io::Write>(series: &FxSeries, writer: W) -> Result<(), MarketDataError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "chf_eur", "chf_sgd"])?;
    for r in series.rows() {
        w.write_record([r.date.to_string(), r.chf_eur.to_string(), r.chf_sgd.to_string()])?;
    }
    w.flush().map_err(|source| MarketDataError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmmKind {
    Cryptoswap,
    Stableswap,
    Clmm,
}

/// AMM parameters shared by all pools of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmmDefaults {
    #[serde(default = "default_a")]
    pub amplification: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_fee")]
    pub fee_rate: f64,
}

fn default_a() -> f64 {
    50.0
}
fn default_gamma() -> f64 {
    1e-8
}
fn default_alpha() -> f64 {
    1.2
}
fn default_fee() -> f64 {
    1e-4
}

impl Default for AmmDefaults {
    fn default() -> Self {
        Self {
            amplification: default_a(),
            gamma: default_gamma(),
            alpha: default_alpha(),
            fee_rate: default_fee(),
        }
    }
}

impl AmmDefaults {
    pub fn params(&self, kind: AmmKind) -> AmmParams {
        match kind {
            AmmKind::Cryptoswap => AmmParams::Cryptoswap {
                a: self.amplification,
                gamma: self.gamma,
            },
            AmmKind::Stableswap => AmmParams::Stableswap { a: self.amplification },
            AmmKind::Clmm => AmmParams::Clmm { alpha: self.alpha },
        }
    }
}

/// A venue to be seeded: its AMM kind, the token sets of its pools (e.g.
/// `"CHF-EUR"`), and its share of the scenario's liquidity, split equally
/// among its pools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VenueBlueprint {
    pub id: String,
    pub layer: Layer,
    pub kind: AmmKind,
    pub pools: Vec<String>,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub total_liquidity_chf: f64,
    #[serde(flatten)]
    pub amm: AmmDefaults,
    pub venues: Vec<VenueBlueprint>,
}

pub const PRESET_L1_MARIANA: &str = "l1-mariana";
pub const PRESET_L2L3_EXCHANGE: &str = "l2l3-exchange";

fn parse_tokens(s: &str) -> Result<Vec<Currency>, MarketDataError> {
    s.split(['-', '/'])
        .map(|c| c.parse::<Currency>().map_err(|e| MarketDataError::Scenario(e.to_string())))
        .collect()
}

impl ScenarioSpec {
    /// Single 3-token Cryptoswap pool on L1 holding all liquidity.
    pub fn l1_mariana() -> Self {
        Self {
            name: PRESET_L1_MARIANA.into(),
            total_liquidity_chf: 100e6,
            amm: AmmDefaults::default(),
            venues: vec![VenueBlueprint {
                id: "l1-mariana".into(),
                layer: Layer::L1,
                kind: AmmKind::Cryptoswap,
                pools: vec!["CHF-EUR-SGD".into()],
                share: 1.0,
            }],
        }
    }

    /// Three L3 operators with a third of the liquidity each: a 3-token
    /// Cryptoswap pool, two 2-token Cryptoswap pools, two CLMM pools.
    pub fn l2l3_exchange() -> Self {
        let third = 1.0 / 3.0;
        let venue = |id: &str, kind, pools: &[&str]| VenueBlueprint {
            id: id.into(),
            layer: Layer::L2L3,
            kind,
            pools: pools.iter().map(|p| p.to_string()).collect(),
            share: third,
        };
        Self {
            name: PRESET_L2L3_EXCHANGE.into(),
            total_liquidity_chf: 100e6,
            amm: AmmDefaults::default(),
            venues: vec![
                venue("l3-cryptoswap-3tok", AmmKind::Cryptoswap, &["CHF-EUR-SGD"]),
                venue("l3-cryptoswap-2tok", AmmKind::Cryptoswap, &["CHF-EUR", "CHF-SGD"]),
                venue("l3-clmm", AmmKind::Clmm, &["CHF-EUR", "CHF-SGD"]),
            ],
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            PRESET_L1_MARIANA => Some(Self::l1_mariana()),
            PRESET_L2L3_EXCHANGE => Some(Self::l2l3_exchange()),
            _ => None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, MarketDataError> {
        let spec: Self = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MarketDataError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| MarketDataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// A preset name or a path to a scenario file.
    pub fn resolve(name_or_path: &str) -> Result<Self, MarketDataError> {
        match Self::preset(name_or_path) {
            Some(spec) => Ok(spec),
            None => Self::load(name_or_path),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn with_total_liquidity(&self, total_liquidity_chf: f64) -> Self {
        Self {
            total_liquidity_chf,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), MarketDataError> {
        let bad = |msg: String| Err(MarketDataError::Scenario(msg));
        if !(self.total_liquidity_chf > 0.0 && self.total_liquidity_chf.is_finite()) {
            return bad(format!("total_liquidity_chf must be positive, got {}", self.total_liquidity_chf));
        }
        if self.venues.is_empty() {
            return bad("no venues".into());
        }
        let mut share_sum = 0.0;
        for (i, v) in self.venues.iter().enumerate() {
            if self.venues[..i].iter().any(|o| o.id == v.id) {
                return bad(format!("duplicate venue id {:?}", v.id));
            }
            if !(v.share > 0.0 && v.share.is_finite()) {
                return bad(format!("venue {:?}: share must be positive", v.id));
            }
            if v.pools.is_empty() {
                return bad(format!("venue {:?} has no pools", v.id));
            }
            share_sum += v.share;
            for p in &v.pools {
                let tokens = parse_tokens(p)?;
                let distinct = tokens.iter().enumerate().all(|(k, t)| !tokens[..k].contains(t));
                if !(2..=3).contains(&tokens.len()) || !distinct {
                    return bad(format!("venue {:?}: pool {p:?} needs 2 or 3 distinct currencies", v.id));
                }
                if v.kind == AmmKind::Clmm && tokens.len() != 2 {
                    return bad(format!("venue {:?}: CLMM pool {p:?} must have 2 currencies", v.id));
                }
            }
            self.amm
                .params(v.kind)
                .validate()
                .map_err(|e| MarketDataError::Scenario(e.to_string()))?;
        }
        if (share_sum - 1.0).abs() > SHARE_TOLERANCE {
            return bad(format!("venue shares sum to {share_sum}, expected 1"));
        }
        if !(0.0..=crate::amm::MAX_FEE_RATE).contains(&self.amm.fee_rate) {
            return bad(format!("fee_rate {} outside [0, 0.01]", self.amm.fee_rate));
        }
        Ok(())
    }
}

/// Seeds every pool of `spec` at `day`'s rates.
///
/// A pool of CHF value `V` over `N` currencies gets notional `N0 = V / N`,
/// so each reserve is worth `V / N` CHF.
pub fn pools_for_date(spec: &ScenarioSpec, day: &FxRow) -> Result<Vec<Venue>, AmmError> {
    pools_at_rates(spec, &day.rates())
}

pub fn pools_at_rates(spec: &ScenarioSpec, rates: &Rates) -> Result<Vec<Venue>, AmmError> {
    spec.venues
        .iter()
        .map(|bp| {
            let venue_value = spec.total_liquidity_chf * bp.share;
            let pool_value = venue_value / bp.pools.len() as f64;
            let pools = bp
                .pools
                .iter()
                .map(|p| {
                    let tokens = parse_tokens(p).map_err(|e| AmmError::InvalidParams(e.to_string()))?;
                    let n0 = pool_value / tokens.len() as f64;
                    let id = tokens.iter().map(Currency::to_string).collect::<Vec<_>>().join("-");
                    Pool::seed(id, spec.amm.params(bp.kind), spec.amm.fee_rate, n0, rates, &tokens)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Venue {
                id: bp.id.clone(),
                layer: bp.layer,
                pools,
            })
        })
        .collect()
}
