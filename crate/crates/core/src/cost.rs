//! Total swap cost = gas fee + LP fee + price impact, in EUR.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amm::SwapQuote;

/// Settlement layer of a venue; only its gas profile is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    L1,
    L2L3,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layer::L1 => "l1",
            Layer::L2L3 => "l2l3",
        })
    }
}

impl FromStr for Layer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Layer::L1),
            "l2l3" | "l2-l3" | "l2" | "l3" => Ok(Layer::L2L3),
            other => Err(format!("unknown layer {other:?}")),
        }
    }
}

/// Flat per-swap gas: `l1_gas_eur` on L1, divided by `l2_divisor` on L2/L3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    pub l1_gas_eur: f64,
    pub l2_divisor: f64,
}

impl Default for GasModel {
    fn default() -> Self {
        Self {
            l1_gas_eur: 15.0,
            l2_divisor: 50.0,
        }
    }
}

impl GasModel {
    pub fn with_l1_gas(self, l1_gas_eur: f64) -> Self {
        Self { l1_gas_eur, ..self }
    }

    pub fn is_valid(&self) -> bool {
        self.l1_gas_eur >= 0.0 && self.l1_gas_eur.is_finite() && self.l2_divisor > 0.0 && self.l2_divisor.is_finite()
    }
}

pub fn gas_fee(layer: Layer, model: &GasModel) -> f64 {
    match layer {
        Layer::L1 => model.l1_gas_eur,
        Layer::L2L3 => model.l1_gas_eur / model.l2_divisor,
    }
}

pub fn lp_fee(volume_eur: f64, fee_rate: f64) -> f64 {
    volume_eur * fee_rate
}

/// Cost components of one swap, all in EUR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub gas_fee: f64,
    pub lp_fee: f64,
    pub price_impact_cost: f64,
    /// `(gas_fee + lp_fee) + price_impact_cost`, always summed in that order.
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(gas_fee: f64, lp_fee: f64, price_impact_cost: f64) -> Self {
        Self {
            gas_fee,
            lp_fee,
            price_impact_cost,
            total: gas_fee + lp_fee + price_impact_cost,
        }
    }

    /// Component in basis points of `volume`, rounded for display.
    pub fn bps(component: f64, volume: f64) -> i64 {
        if volume > 0.0 {
            (component / volume * 1e4).round() as i64
        } else {
            0
        }
    }
}

/// Costs a fee-free quote. `eur_per_unit` converts the quote's receive
/// currency into EUR (1 when buying EUR).
pub fn total_swap_cost(quote: &SwapQuote, layer: Layer, gas: &GasModel, fee_rate: f64, eur_per_unit: f64) -> CostBreakdown {
    let volume_eur = quote.output_amount * eur_per_unit;
    CostBreakdown::new(
        gas_fee(layer, gas),
        lp_fee(volume_eur, fee_rate),
        quote.price_impact_cost * eur_per_unit,
    )
}
