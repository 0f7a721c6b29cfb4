//! Signal backtests on a single asset's daily returns.

mod metrics;
mod signals;

use chrono::NaiveDate;

pub use metrics::{
    benchmark_metrics, cagr, information_ratio, max_drawdown, perf_metrics, sharpe, PerfMetrics, TRADING_DAYS,
};
pub use signals::{signal_ewma, signal_rolling_mean, signal_vote, Position, SignalSeries};

use crate::error::{Error, Result};
use crate::series::Series;

/// Cumulative strategy and buy-and-hold values starting at 1 on the first
/// signal date, with the daily returns that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct EquityCurve {
    pub name: String,
    pub dates: Vec<NaiveDate>,
    pub strategy: Vec<f64>,
    pub benchmark: Vec<f64>,
    /// `strategy_returns[t − 1]` is earned between `dates[t − 1]` and `dates[t]`.
    pub strategy_returns: Vec<f64>,
    pub benchmark_returns: Vec<f64>,
}

fn compound(returns: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(returns.len() + 1);
    out.push(1.0);
    for r in returns {
        out.push(out[out.len() - 1] * (1.0 + r));
    }
    out
}

/// Holds `position[t − 1]` over day `t`. The signal dates must be a
/// contiguous run of the asset's calendar.
pub fn run_backtest(signal: &SignalSeries, asset_returns: &Series) -> Result<EquityCurve> {
    let Some(&first) = signal.dates.first() else {
        return Err(Error::Alignment(format!("signal `{}` is empty", signal.name)));
    };
    let Ok(start) = asset_returns.dates.binary_search(&first) else {
        return Err(Error::Alignment(format!("signal starts {first}, which is not an asset return date")));
    };
    let asset = asset_returns.dates.get(start..start + signal.len());
    if asset != Some(&signal.dates[..]) {
        return Err(Error::Alignment(format!(
            "signal `{}` dates are not a contiguous run of the asset calendar",
            signal.name
        )));
    }
    let r = &asset_returns.values[start + 1..start + signal.len()];
    let strategy_returns: Vec<f64> = signal.positions.iter().zip(r).map(|(p, r)| p.value() * r).collect();
    Ok(EquityCurve {
        name: signal.name.clone(),
        dates: signal.dates.clone(),
        strategy: compound(&strategy_returns),
        benchmark: compound(r),
        strategy_returns,
        benchmark_returns: r.to_vec(),
    })
}

/// Long-format `date,strategy,benchmark,value` rows for several curves.
pub fn curves_to_csv(curves: &[EquityCurve]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["date", "strategy", "strategy_value", "benchmark_value"])?;
    for c in curves {
        for ((d, s), b) in c.dates.iter().zip(&c.strategy).zip(&c.benchmark) {
            w.write_record([d.to_string(), c.name.clone(), format!("{s}"), format!("{b}")])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
