//! AMM pools: seeding, exact-output swaps, price impact and spot prices.
//!
//! Curve-family pools (Stableswap, Cryptoswap) evaluate their invariant on
//! price-scaled balances `x_i / rate_i`, where `rate_i` is the currency's
//! rate against the numeraire when the pool was (re)seeded. A freshly seeded
//! pool is therefore perfectly balanced in value terms and quotes exactly
//! the seeding FX rate.

mod clmm;
mod curve;

use serde::Serialize;
use thiserror::Error;

use crate::currency::{Currency, Rates};
use crate::numerics::{RootConfig, RootError};

pub use clmm::{clmm_price_impact, ConcentratedRange};
pub use curve::{
    cryptoswap_solve_d, residual, solve_balance, solve_d, solve_d_bisection, solve_d_newton,
    solve_exchange, stableswap_solve_d, Curve,
};

/// Relative trade size used for finite-difference spot prices.
pub const SPOT_EPSILON: f64 = 1e-6;

/// Upper bound accepted for a pool fee rate.
pub const MAX_FEE_RATE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AmmError {
    #[error("rate for {currency} must be positive, got {rate}")]
    NonPositiveRate { currency: Currency, rate: f64 },
    #[error("reserve must be positive and finite, got {0}")]
    NonPositiveReserve(f64),
    #[error("trade amount must be positive and finite, got {0}")]
    NonPositiveAmount(f64),
    #[error("invalid AMM parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported token count {0}")]
    TokenCount(usize),
    #[error("currency {0} is not in the pool")]
    UnknownCurrency(Currency),
    #[error("duplicate currency {0} in pool")]
    DuplicateCurrency(Currency),
    #[error("pay and receive currency are both {0}")]
    SameCurrency(Currency),
    #[error("insufficient liquidity: requested {requested}, reserve {available}")]
    InsufficientLiquidity { requested: f64, available: f64 },
    #[error("trade of {requested} exceeds the active range depth {depth}")]
    RangeExceeded { requested: f64, depth: f64 },
    #[error("fee rate {0} outside [0, {MAX_FEE_RATE}]")]
    FeeRate(f64),
    #[error(transparent)]
    Solver(#[from] RootError),
}

/// Token balances of a pool, in pool order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reserves(Vec<(Currency, f64)>);

impl Reserves {
    pub fn new(amounts: Vec<(Currency, f64)>) -> Result<Self, AmmError> {
        if !(2..=3).contains(&amounts.len()) {
            return Err(AmmError::TokenCount(amounts.len()));
        }
        for (i, (c, v)) in amounts.iter().enumerate() {
            if amounts[..i].iter().any(|(o, _)| o == c) {
                return Err(AmmError::DuplicateCurrency(*c));
            }
            if !(*v > 0.0 && v.is_finite()) {
                return Err(AmmError::NonPositiveReserve(*v));
            }
        }
        Ok(Self(amounts))
    }

    /// Seeds `tokens` from notional `n0`: each reserve is `rate * n0`, so the
    /// numeraire reserve is exactly `n0`.
    pub fn seed(n0: f64, rates: &Rates, tokens: &[Currency]) -> Result<Self, AmmError> {
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(AmmError::NonPositiveAmount(n0));
        }
        let amounts = tokens
            .iter()
            .map(|&c| {
                let rate = rates.get(c).ok_or(AmmError::UnknownCurrency(c))?;
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(AmmError::NonPositiveRate { currency: c, rate });
                }
                Ok((c, rate * n0))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(amounts)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, currency: Currency) -> Option<usize> {
        self.0.iter().position(|(c, _)| *c == currency)
    }

    pub fn get(&self, currency: Currency) -> Option<f64> {
        self.index_of(currency).map(|i| self.0[i].1)
    }

    pub fn contains(&self, currency: Currency) -> bool {
        self.index_of(currency).is_some()
    }

    pub fn currencies(&self) -> impl Iterator<Item = Currency> + '_ {
        self.0.iter().map(|(c, _)| *c)
    }

    pub fn amounts(&self) -> Vec<f64> {
        self.0.iter().map(|(_, v)| *v).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Currency, f64)> + '_ {
        self.0.iter().copied()
    }

    /// Same reserves scaled by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|&(k, v)| (k, v * c)).collect())
    }
}

/// Seeds reserves for every currency in `rates` from notional `n0`.
pub fn init_reserves(n0: f64, rates: &Rates) -> Result<Reserves, AmmError> {
    let tokens: Vec<Currency> = rates.iter().map(|(c, _)| c).collect();
    Reserves::seed(n0, rates, &tokens)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AmmParams {
    Cryptoswap { a: f64, gamma: f64 },
    Stableswap { a: f64 },
    /// Range `[S0 / alpha, S0 * alpha]` around the seeding rate.
    Clmm { alpha: f64 },
}

impl AmmParams {
    pub fn validate(&self) -> Result<(), AmmError> {
        let ok = match *self {
            AmmParams::Cryptoswap { a, gamma } => a > 0.0 && a.is_finite() && gamma > 0.0 && gamma < 1.0,
            AmmParams::Stableswap { a } => a > 0.0 && a.is_finite(),
            AmmParams::Clmm { alpha } => alpha > 1.0 && alpha.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(AmmError::InvalidParams(format!("{self:?}")))
        }
    }

    fn curve(&self) -> Option<Curve> {
        match *self {
            AmmParams::Cryptoswap { a, gamma } => Some(Curve::Cryptoswap { a, gamma }),
            AmmParams::Stableswap { a } => Some(Curve::Stableswap { a }),
            AmmParams::Clmm { .. } => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            AmmParams::Cryptoswap { .. } => "cryptoswap",
            AmmParams::Stableswap { .. } => "stableswap",
            AmmParams::Clmm { .. } => "clmm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pool {
    pub id: String,
    pub params: AmmParams,
    pub reserves: Reserves,
    pub fee_rate: f64,
    /// Rates against the numeraire at the last (re)seeding.
    pub creation_rates: Rates,
    /// Numeraire notional `N0` at the last (re)seeding.
    pub creation_notional: f64,
}

impl Pool {
    /// Seeds a pool over `tokens` at `rates` with notional `n0`.
    pub fn seed(
        id: impl Into<String>,
        params: AmmParams,
        fee_rate: f64,
        n0: f64,
        rates: &Rates,
        tokens: &[Currency],
    ) -> Result<Self, AmmError> {
        params.validate()?;
        if !(0.0..=MAX_FEE_RATE).contains(&fee_rate) {
            return Err(AmmError::FeeRate(fee_rate));
        }
        if matches!(params, AmmParams::Clmm { .. }) && tokens.len() != 2 {
            return Err(AmmError::TokenCount(tokens.len()));
        }
        let reserves = Reserves::seed(n0, rates, tokens)?;
        let mut creation_rates = Rates::new(rates.numeraire());
        for c in reserves.currencies() {
            // present and positive, checked by Reserves::seed
            creation_rates.set(c, rates.get(c).unwrap_or(1.0));
        }
        Ok(Self {
            id: id.into(),
            params,
            reserves,
            fee_rate,
            creation_rates,
            creation_notional: n0,
        })
    }

    pub fn supports(&self, a: Currency, b: Currency) -> bool {
        a != b && self.reserves.contains(a) && self.reserves.contains(b)
    }

    /// Reserves converted to numeraire value at the seeding rates.
    pub fn scaled_balances(&self) -> Vec<f64> {
        self.reserves
            .iter()
            .map(|(c, v)| v / self.creation_rate(c))
            .collect()
    }

    fn creation_rate(&self, c: Currency) -> f64 {
        self.creation_rates.get(c).unwrap_or(1.0)
    }

    /// Pool value in numeraire at the given rates.
    pub fn value(&self, rates: &Rates) -> Option<f64> {
        self.reserves
            .iter()
            .map(|(c, v)| rates.get(c).map(|r| v / r))
            .sum()
    }

    /// Same pool with every reserve and the notional scaled by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            reserves: self.reserves.scaled(c),
            creation_notional: self.creation_notional * c,
            ..self.clone()
        }
    }

    fn check_pair(&self, pay: Currency, receive: Currency) -> Result<(usize, usize), AmmError> {
        if pay == receive {
            return Err(AmmError::SameCurrency(pay));
        }
        let i = self.reserves.index_of(pay).ok_or(AmmError::UnknownCurrency(pay))?;
        let j = self.reserves.index_of(receive).ok_or(AmmError::UnknownCurrency(receive))?;
        Ok((i, j))
    }

    /// Fee-free exact-output swap: take `dy` of `receive` out, pay `pay`.
    ///
    /// `spot_rate` is today's rate in `receive` units per `pay` unit. Curve
    /// pools hold D fixed and solve the invariant for the new pay balance;
    /// CLMM pools use the closed-form impact. Fees are not applied here.
    pub fn swap_exact_out(
        &self,
        pay: Currency,
        receive: Currency,
        dy: f64,
        spot_rate: f64,
    ) -> Result<SwapQuote, AmmError> {
        self.swap_exact_out_with(pay, receive, dy, spot_rate, &RootConfig::default())
    }

    pub fn swap_exact_out_with(
        &self,
        pay: Currency,
        receive: Currency,
        dy: f64,
        spot_rate: f64,
        cfg: &RootConfig,
    ) -> Result<SwapQuote, AmmError> {
        let (i, j) = self.check_pair(pay, receive)?;
        if !(dy > 0.0 && dy.is_finite()) {
            return Err(AmmError::NonPositiveAmount(dy));
        }
        if !(spot_rate > 0.0 && spot_rate.is_finite()) {
            return Err(AmmError::NonPositiveRate { currency: receive, rate: spot_rate });
        }
        let amounts = self.reserves.amounts();
        if dy >= amounts[j] {
            return Err(AmmError::InsufficientLiquidity { requested: dy, available: amounts[j] });
        }

        let (dx, price_impact_cost) = match self.params.curve() {
            Some(curve) => {
                let rate_i = self.creation_rate(pay);
                let rate_j = self.creation_rate(receive);
                let xp = self.scaled_balances();
                let d = solve_d(&curve, &xp, cfg)?;
                let dx = solve_exchange(&curve, &xp, i, j, dy / rate_j, d, cfg)? * rate_i;
                (dx, spot_rate * dx - dy)
            }
            None => {
                let AmmParams::Clmm { alpha } = self.params else { unreachable!() };
                let s0 = self.creation_rate(receive) / self.creation_rate(pay);
                let n0 = self.creation_notional * self.creation_rate(pay);
                let impact = clmm_price_impact(dy, n0, s0, spot_rate, alpha)?;
                let cost = impact * dy;
                ((dy + cost) / spot_rate, cost)
            }
        };

        let mut after = self.reserves.clone();
        after.0[i].1 += dx;
        after.0[j].1 -= dy;
        Ok(SwapQuote {
            pay,
            receive,
            input_amount: dx,
            output_amount: dy,
            spot_rate,
            price_impact_fraction: price_impact_fraction(dx, dy, spot_rate),
            price_impact_cost,
            executed_rate: dy / dx,
            reserves_after: after,
        })
    }

    /// Pool with the post-trade reserves of `quote`.
    pub fn apply(&self, quote: &SwapQuote) -> Self {
        Self {
            reserves: quote.reserves_after.clone(),
            ..self.clone()
        }
    }

    /// Marginal price: units of `quote` per unit of `base`.
    ///
    /// Curve pools use a finite difference: the geometric mean of the
    /// executed rates of an exact-output buy of `SPOT_EPSILON` of the quote
    /// reserve and the matching reverse trade, which cancels the first-order
    /// impact term. CLMM pools read the price off their virtual reserves.
    pub fn spot_price(&self, base: Currency, quote: Currency) -> Result<f64, AmmError> {
        self.spot_price_with_epsilon(base, quote, SPOT_EPSILON)
    }

    pub fn spot_price_with_epsilon(&self, base: Currency, quote: Currency, epsilon: f64) -> Result<f64, AmmError> {
        let (i, j) = self.check_pair(base, quote)?;
        if let AmmParams::Clmm { alpha } = self.params {
            let (c0, c1) = if i < j { (base, quote) } else { (quote, base) };
            let x = self.reserves.get(c0).unwrap_or_default();
            let y = self.reserves.get(c1).unwrap_or_default();
            let p0 = self.creation_rate(c1) / self.creation_rate(c0);
            let x0 = self.creation_notional * self.creation_rate(c0);
            let p = ConcentratedRange::seeded(x0, p0, alpha).price(x, y);
            return Ok(if i < j { p } else { 1.0 / p });
        }

        // rate argument only feeds the impact fields, which are unused here
        let reference = self.creation_rate(quote) / self.creation_rate(base);
        let eps_quote = epsilon * self.reserves.amounts()[j];
        let buy = self.swap_exact_out(base, quote, eps_quote, reference)?;
        let rate_buy = eps_quote / buy.input_amount;
        let eps_base = eps_quote / rate_buy;
        let sell = self.swap_exact_out(quote, base, eps_base, 1.0 / reference)?;
        let rate_sell = sell.input_amount / eps_base;
        Ok((rate_buy * rate_sell).sqrt())
    }
}

/// Result of a fee-free exact-output swap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapQuote {
    pub pay: Currency,
    pub receive: Currency,
    /// Amount paid, in `pay` units.
    pub input_amount: f64,
    /// Amount received, in `receive` units.
    pub output_amount: f64,
    /// Rate the impact is measured against (`receive` per `pay`).
    pub spot_rate: f64,
    /// `(dy / dx) / S - 1`; non-positive for a buy on a pool seeded at spot.
    pub price_impact_fraction: f64,
    /// `S dx - dy`, in `receive` units.
    pub price_impact_cost: f64,
    /// `dy / dx`.
    pub executed_rate: f64,
    pub reserves_after: Reserves,
}

/// Signed price impact of buying `dy` for `dx` against spot `st`.
pub fn price_impact_fraction(dx: f64, dy: f64, st: f64) -> f64 {
    (dy / dx) / st - 1.0
}
