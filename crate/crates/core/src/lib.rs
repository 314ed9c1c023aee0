//! Cost engine for cross-border currency swaps routed across competing
//! automated-market-maker venues.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: scalar Newton-Raphson and bisection root finders.
//! * [`amm`]: CLMM, Stableswap and Cryptoswap pools, D-solves, exact-output
//!   swaps and price impact.
//! * [`cost`]: gas + LP fee + price impact decomposition.
//! * [`router`]: quote every venue, pick the cheapest.
//! * [`market_data`]: FX series ingestion and daily pool seeding.
//! * [`backtest`]: day x volume x scenario simulation, fee tables, sweeps.
//! * [`checks`]: consistency checks over a backtest, used by `fxswap check`.

pub mod amm;
pub mod backtest;
pub mod checks;
pub mod cost;
pub mod currency;
pub mod market_data;
pub mod numerics;
pub mod router;

pub use amm::{AmmError, AmmParams, Pool, Reserves, SwapQuote};
pub use backtest::{BacktestConfig, BacktestReport};
pub use cost::{CostBreakdown, GasModel, Layer};
pub use currency::{Currency, Rates};
pub use market_data::{FxRow, FxSeries, ScenarioSpec};
pub use router::{RouteDecision, TradeRequest, Venue};


