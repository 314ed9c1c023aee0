use std::io::Write;

use anyhow::Result;
use fxswap_core::{RouteDecision, TradeRequest};

pub fn quote_text(scenario: &str, trade: &TradeRequest, d: &RouteDecision, mut w: impl Write) -> Result<()> {
    let date = trade.date.map(|d| format!(" on {d}")).unwrap_or_default();
    writeln!(w, "{scenario}: buy {} {} with {}{date}", trade.amount, trade.receive, trade.pay)?;
    writeln!(
        w,
        "  {:<22} {:<12} {:<5} {:>16} {:>10} {:>12} {:>14} {:>14}",
        "venue",
        "pool",
        "layer",
        format!("paid ({})", trade.pay),
        "gas",
        "lp_fee",
        "impact",
        "total"
    )?;
    for c in &d.candidates {
        let mark = if c.venue_id == d.chosen.venue_id && c.pool_id == d.chosen.pool_id { '*' } else { ' ' };
        writeln!(
            w,
            "{mark} {:<22} {:<12} {:<5} {:>16.4} {:>10.4} {:>12.4} {:>14.4} {:>14.4}",
            c.venue_id,
            c.pool_id,
            c.layer.to_string(),
            c.quote.input_amount,
            c.breakdown.gas_fee,
            c.breakdown.lp_fee,
            c.breakdown.price_impact_cost,
            c.breakdown.total
        )?;
    }
    let b = d.breakdown();
    writeln!(
        w,
        "chosen {}/{}: total {:.4} EUR = gas {:.4} + lp fee {:.4} + price impact {:.4}",
        d.chosen.venue_id, d.chosen.pool_id, b.total, b.gas_fee, b.lp_fee, b.price_impact_cost
    )?;
    Ok(())
}

pub fn quote_csv(d: &RouteDecision, mut w: impl Write) -> Result<()> {
    writeln!(
        w,
        "venue,pool,layer,chosen,input_amount,output_amount,executed_rate,price_impact_fraction,gas_eur,lp_fee_eur,impact_eur,total_eur"
    )?;
    for c in &d.candidates {
        let chosen = c.venue_id == d.chosen.venue_id && c.pool_id == d.chosen.pool_id;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            c.venue_id,
            c.pool_id,
            c.layer,
            chosen,
            c.quote.input_amount,
            c.quote.output_amount,
            c.quote.executed_rate,
            c.quote.price_impact_fraction,
            c.breakdown.gas_fee,
            c.breakdown.lp_fee,
            c.breakdown.price_impact_cost,
            c.breakdown.total
        )?;
    }
    Ok(())
}
