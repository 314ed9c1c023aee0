//! Concentrated-liquidity pools over the range `[S0 / alpha, S0 * alpha]`.
//!
//! Backtests price CLMM trades with the closed-form impact
//! `dy / (N0 sqrt(S0 St)) * (1 - 1/sqrt(alpha))`. The exact virtual-reserve
//! curve `(x + L/sqrt(Pu)) (y + L sqrt(Pl)) = L^2` is kept alongside it for
//! spot prices and as a cross-check of the closed form.

use super::AmmError;

/// Closed-form CLMM price impact fraction for buying `dy` units.
///
/// `n0` is the pay-side notional at the last rebalance, `s0` the rate at that
/// rebalance and `st` today's rate (both receive units per pay unit).
pub fn clmm_price_impact(dy: f64, n0: f64, s0: f64, st: f64, alpha: f64) -> Result<f64, AmmError> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(AmmError::InvalidParams(format!("alpha = {alpha} must exceed 1")));
    }
    for (name, v) in [("n0", n0), ("s0", s0), ("st", st)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(AmmError::InvalidParams(format!("{name} = {v} must be positive")));
        }
    }
    if !(dy >= 0.0 && dy.is_finite()) {
        return Err(AmmError::NonPositiveAmount(dy));
    }
    let depth = n0 * (s0 * st).sqrt();
    if dy > depth {
        return Err(AmmError::RangeExceeded { requested: dy, depth });
    }
    Ok(dy / depth * (1.0 - 1.0 / alpha.sqrt()))
}

/// Exact concentrated-liquidity position for token pair `(x, y)`, price
/// quoted as `y` per `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentratedRange {
    pub liquidity: f64,
    pub sqrt_lower: f64,
    pub sqrt_upper: f64,
}

impl ConcentratedRange {
    /// Range `[p0 / alpha, p0 * alpha]` holding `x0` of token x at price `p0`.
    pub fn seeded(x0: f64, p0: f64, alpha: f64) -> Self {
        let sqrt_p0 = p0.sqrt();
        let sqrt_alpha = alpha.sqrt();
        Self {
            liquidity: x0 * sqrt_p0 / (1.0 - 1.0 / sqrt_alpha),
            sqrt_lower: sqrt_p0 / sqrt_alpha,
            sqrt_upper: sqrt_p0 * sqrt_alpha,
        }
    }

    /// Marginal price (y per x) at real reserves `(x, y)`.
    pub fn price(&self, x: f64, y: f64) -> f64 {
        let vx = x + self.liquidity / self.sqrt_upper;
        let vy = y + self.liquidity * self.sqrt_lower;
        vy / vx
    }

    /// Amount of x paid to take `dy` of y out at real reserves `(x, y)`.
    pub fn x_in_for_y_out(&self, x: f64, y: f64, dy: f64) -> Result<f64, AmmError> {
        if dy >= y {
            return Err(AmmError::RangeExceeded { requested: dy, depth: y });
        }
        let vx = x + self.liquidity / self.sqrt_upper;
        let vy = y + self.liquidity * self.sqrt_lower;
        // constant product on virtual reserves
        Ok(vx * dy / (vy - dy))
    }
}
