//! Rule-based venue selection: quote every pool holding the requested pair
//! and take the cheapest total cost. Orders are never split and never
//! routed through an intermediate currency.

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::amm::{AmmError, Pool, SwapQuote};
use crate::cost::{total_swap_cost, CostBreakdown, GasModel, Layer};
use crate::currency::{Currency, Rates};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RouteError {
    #[error("no venue offers {pay}/{receive}")]
    NoVenueForPair { pay: Currency, receive: Currency },
    #[error("no candidates to route")]
    EmptyCandidates,
    #[error("duplicate venue id {0:?}")]
    DuplicateVenue(String),
    #[error("no rate for {0}")]
    MissingRate(Currency),
    #[error("trade amount must be positive, got {0}")]
    BadAmount(f64),
    #[error("{venue}/{pool}: {source}")]
    Quote {
        venue: String,
        pool: String,
        #[source]
        source: AmmError,
    },
}

/// Exact-output buy: receive `amount` of `receive`, paying in `pay`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeRequest {
    pub receive: Currency,
    pub amount: f64,
    pub pay: Currency,
    pub date: Option<NaiveDate>,
}

impl TradeRequest {
    /// Buy `amount` EUR paying CHF.
    pub fn buy_eur_with_chf(amount: f64) -> Self {
        Self {
            receive: Currency::EUR,
            amount,
            pay: Currency::CHF,
            date: None,
        }
    }

    pub fn on(self, date: NaiveDate) -> Self {
        Self { date: Some(date), ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Venue {
    pub id: String,
    pub layer: Layer,
    pub pools: Vec<Pool>,
}

/// One priced option for a trade.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub venue_id: String,
    pub pool_id: String,
    pub layer: Layer,
    pub quote: SwapQuote,
    pub breakdown: CostBreakdown,
}

impl Candidate {
    fn key(&self) -> (&str, &str) {
        (&self.venue_id, &self.pool_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteDecision {
    pub chosen: Candidate,
    /// All candidates, sorted by `(venue id, pool id)`.
    pub candidates: Vec<Candidate>,
}

impl RouteDecision {
    pub fn breakdown(&self) -> &CostBreakdown {
        &self.chosen.breakdown
    }
}

/// Prices `trade` on every pool holding both currencies.
///
/// Pools whose quote fails (for example a trade beyond a CLMM range) are
/// dropped; if every supporting pool fails, the first failure is returned.
pub fn quote_all(venues: &[Venue], trade: &TradeRequest, rates: &Rates, gas: &GasModel) -> Result<Vec<Candidate>, RouteError> {
    if !(trade.amount > 0.0 && trade.amount.is_finite()) {
        return Err(RouteError::BadAmount(trade.amount));
    }
    for (i, v) in venues.iter().enumerate() {
        if venues[..i].iter().any(|o| o.id == v.id) {
            return Err(RouteError::DuplicateVenue(v.id.clone()));
        }
    }
    let spot = rates
        .cross(trade.pay, trade.receive)
        .ok_or(RouteError::MissingRate(if rates.get(trade.pay).is_none() { trade.pay } else { trade.receive }))?;
    let eur_per_unit = rates
        .cross(trade.receive, Currency::EUR)
        .ok_or(RouteError::MissingRate(Currency::EUR))?;

    let mut candidates = Vec::new();
    let mut first_error = None;
    for venue in venues {
        for pool in venue.pools.iter().filter(|p| p.supports(trade.pay, trade.receive)) {
            match pool.swap_exact_out(trade.pay, trade.receive, trade.amount, spot) {
                Ok(quote) => {
                    let breakdown = total_swap_cost(&quote, venue.layer, gas, pool.fee_rate, eur_per_unit);
                    candidates.push(Candidate {
                        venue_id: venue.id.clone(),
                        pool_id: pool.id.clone(),
                        layer: venue.layer,
                        quote,
                        breakdown,
                    });
                }
                Err(source) => {
                    first_error.get_or_insert(RouteError::Quote {
                        venue: venue.id.clone(),
                        pool: pool.id.clone(),
                        source,
                    });
                }
            }
        }
    }
    if candidates.is_empty() {
        return Err(first_error.unwrap_or(RouteError::NoVenueForPair {
            pay: trade.pay,
            receive: trade.receive,
        }));
    }
    candidates.sort_by(|a, b| a.key().cmp(&b.key()));
    Ok(candidates)
}

/// Picks the minimum-total candidate; ties go to the smallest
/// `(venue id, pool id)`.
pub fn route(mut candidates: Vec<Candidate>) -> Result<RouteDecision, RouteError> {
    candidates.sort_by(|a, b| a.key().cmp(&b.key()));
    let best = candidates
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, c)| match best {
            Some((_, t)) if c.breakdown.total.total_cmp(&t).is_ge() => best,
            _ => Some((i, c.breakdown.total)),
        })
        .ok_or(RouteError::EmptyCandidates)?;
    Ok(RouteDecision {
        chosen: candidates[best.0].clone(),
        candidates,
    })
}

/// [`quote_all`] followed by [`route`].
pub fn best_route(venues: &[Venue], trade: &TradeRequest, rates: &Rates, gas: &GasModel) -> Result<RouteDecision, RouteError> {
    route(quote_all(venues, trade, rates, gas)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amm::{AmmParams, Reserves};

    fn candidate(venue: &str, pool: &str, total: f64) -> Candidate {
        let reserves = Reserves::new(vec![(Currency::CHF, 1.0), (Currency::EUR, 1.0)]).unwrap();
        Candidate {
            venue_id: venue.into(),
            pool_id: pool.into(),
            layer: Layer::L2L3,
            quote: SwapQuote {
                pay: Currency::CHF,
                receive: Currency::EUR,
                input_amount: 1.0,
                output_amount: 1.0,
                spot_rate: 1.0,
                price_impact_fraction: 0.0,
                price_impact_cost: 0.0,
                executed_rate: 1.0,
                reserves_after: reserves,
            },
            breakdown: CostBreakdown::new(total, 0.0, 0.0),
        }
    }

    #[test]
    fn picks_minimum_total() {
        let d = route(vec![candidate("a", "p", 26.1), candidate("b", "p", 25.6), candidate("c", "p", 27.0)]).unwrap();
        assert_eq!(d.chosen.venue_id, "b");
        assert_eq!(d.chosen.breakdown.total, 25.6);
    }

    #[test]
    fn ties_go_to_smallest_id() {
        let d = route(vec![candidate("z", "p", 1.0), candidate("a", "q", 1.0), candidate("a", "p", 1.0)]).unwrap();
        assert_eq!(d.chosen.key(), ("a", "p"));
    }

    #[test]
    fn empty_candidates() {
        assert_eq!(route(vec![]).unwrap_err(), RouteError::EmptyCandidates);
    }

    fn venue(id: &str, layer: Layer, pools: Vec<Pool>) -> Venue {
        Venue { id: id.into(), layer, pools }
    }

    fn pool(id: &str, params: AmmParams, n0: f64, tokens: &[Currency]) -> Pool {
        Pool::seed(id, params, 1e-4, n0, &Rates::chf(1.05, 1.46), tokens).unwrap()
    }

    #[test]
    fn filters_pools_by_pair() {
        let crypto = AmmParams::Cryptoswap { a: 50.0, gamma: 1e-8 };
        let venues = vec![
            venue("v1", Layer::L2L3, vec![pool("CHF-EUR", crypto, 1e7, &[Currency::CHF, Currency::EUR])]),
            venue("v2", Layer::L2L3, vec![pool("CHF-SGD", crypto, 1e7, &[Currency::CHF, Currency::SGD])]),
        ];
        let rates = Rates::chf(1.05, 1.46);
        let sgd = TradeRequest {
            receive: Currency::SGD,
            amount: 1e4,
            pay: Currency::CHF,
            date: None,
        };
        let c = quote_all(&venues, &sgd, &rates, &GasModel::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].pool_id, "CHF-SGD");
        // SGD volume is converted into EUR for the fee
        let expected_fee = 1e4 * (1.05 / 1.46) * 1e-4;
        assert!((c[0].breakdown.lp_fee - expected_fee).abs() < 1e-12);

        let single = quote_all(&venues[..1], &TradeRequest::buy_eur_with_chf(1e4), &rates, &GasModel::default()).unwrap();
        assert_eq!(single.len(), 1);

        let eur_sgd = TradeRequest {
            receive: Currency::SGD,
            amount: 1e4,
            pay: Currency::EUR,
            date: None,
        };
        assert!(matches!(
            quote_all(&venues, &eur_sgd, &rates, &GasModel::default()),
            Err(RouteError::NoVenueForPair { .. })
        ));
    }

    #[test]
    fn failing_pools_are_dropped() {
        let venues = vec![
            venue("a", Layer::L2L3, vec![pool("small", AmmParams::Clmm { alpha: 1.2 }, 1e3, &[Currency::CHF, Currency::EUR])]),
            venue("b", Layer::L2L3, vec![pool("deep", AmmParams::Clmm { alpha: 1.2 }, 1e8, &[Currency::CHF, Currency::EUR])]),
        ];
        let rates = Rates::chf(1.05, 1.46);
        let c = quote_all(&venues, &TradeRequest::buy_eur_with_chf(1e4), &rates, &GasModel::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].venue_id, "b");
        let err = quote_all(&venues[..1], &TradeRequest::buy_eur_with_chf(1e4), &rates, &GasModel::default()).unwrap_err();
        assert!(matches!(err, RouteError::Quote { .. }));
    }

    #[test]
    fn duplicate_venues_rejected() {
        let v = venue("a", Layer::L1, vec![]);
        let err = quote_all(&[v.clone(), v], &TradeRequest::buy_eur_with_chf(1.0), &Rates::chf(1.0, 1.0), &GasModel::default());
        assert_eq!(err.unwrap_err(), RouteError::DuplicateVenue("a".into()));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn optimal_and_order_independent(totals in proptest::collection::vec(0.0f64..100.0, 1..8), rot in 0usize..8) {
                let cands: Vec<_> = totals.iter().enumerate().map(|(i, t)| candidate(&format!("v{i}"), "p", *t)).collect();
                let d = route(cands.clone()).unwrap();
                prop_assert!(cands.iter().all(|c| d.chosen.breakdown.total <= c.breakdown.total));
                let mut rotated = cands.clone();
                rotated.rotate_left(rot % cands.len());
                prop_assert_eq!(route(rotated).unwrap(), d);
            }

            #[test]
            fn adding_a_venue_never_hurts(totals in proptest::collection::vec(0.0f64..100.0, 2..8)) {
                let cands: Vec<_> = totals.iter().enumerate().map(|(i, t)| candidate(&format!("v{i}"), "p", *t)).collect();
                let fewer = route(cands[..cands.len() - 1].to_vec()).unwrap();
                let more = route(cands).unwrap();
                prop_assert!(more.chosen.breakdown.total <= fewer.chosen.breakdown.total);
            }
        }
    }
}
