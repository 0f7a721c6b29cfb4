//! Strategy performance statistics on daily returns.

use serde::Serialize;

use super::EquityCurve;
use crate::error::{Error, Result};
use crate::series::transforms::is_degenerate;

pub const TRADING_DAYS: f64 = 252.0;

/// `cumulative^(252/T) − 1` over `T` daily returns.
pub fn cagr(cumulative: &[f64]) -> Result<f64> {
    let (Some(first), Some(last)) = (cumulative.first(), cumulative.last()) else {
        return Err(Error::Length("CAGR needs at least two curve points".into()));
    };
    let t = cumulative.len() - 1;
    if t == 0 {
        return Err(Error::Length("CAGR needs at least two curve points".into()));
    }
    Ok((last / first).powf(TRADING_DAYS / t as f64) - 1.0)
}

fn mean_std(x: &[f64]) -> Option<(f64, f64)> {
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

fn annualised_ratio(x: &[f64], what: &'static str) -> Result<f64> {
    match mean_std(x) {
        Some((_, s)) if is_degenerate(x, s) => Err(Error::MetricUndefined(what)),
        Some((m, s)) => Ok(TRADING_DAYS.sqrt() * m / s),
        None => Err(Error::Length(format!("{what} needs at least two returns"))),
    }
}

/// `√252 · mean / std` of daily returns, zero risk-free rate.
pub fn sharpe(returns: &[f64]) -> Result<f64> {
    annualised_ratio(returns, "Sharpe ratio (zero return variance)")
}

/// Sharpe ratio of the active return `strategy − benchmark`.
pub fn information_ratio(strategy: &[f64], benchmark: &[f64]) -> Result<f64> {
    if strategy.len() != benchmark.len() {
        return Err(Error::Length(format!("{} strategy vs {} benchmark returns", strategy.len(), benchmark.len())));
    }
    let active: Vec<f64> = strategy.iter().zip(benchmark).map(|(s, b)| s - b).collect();
    annualised_ratio(&active, "information ratio (zero tracking error)")
}

/// Largest peak-to-trough loss as a fraction of the peak, in one pass.
pub fn max_drawdown(curve: &[f64]) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for &v in curve {
        peak = peak.max(v);
        if peak > 0.0 {
            worst = worst.max((peak - v) / peak);
        }
    }
    worst
}

/// Row of the strategy metrics table. Undefined metrics serialise as null.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerfMetrics {
    #[serde(rename = "Strategy")]
    pub strategy: String,
    #[serde(rename = "CAGR")]
    pub cagr: f64,
    #[serde(rename = "Sharpe")]
    pub sharpe: Option<f64>,
    #[serde(rename = "MaxDD")]
    pub max_drawdown: f64,
    #[serde(rename = "IR")]
    pub information_ratio: Option<f64>,
}

fn defined(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::MetricUndefined(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Metrics of the strategy leg, with IR against the benchmark leg.
pub fn perf_metrics(curve: &EquityCurve) -> Result<PerfMetrics> {
    Ok(PerfMetrics {
        strategy: curve.name.clone(),
        cagr: cagr(&curve.strategy)?,
        sharpe: defined(sharpe(&curve.strategy_returns))?,
        max_drawdown: max_drawdown(&curve.strategy),
        information_ratio: defined(information_ratio(&curve.strategy_returns, &curve.benchmark_returns))?,
    })
}

/// Metrics of the buy-and-hold leg. Its IR against itself is undefined.
pub fn benchmark_metrics(curve: &EquityCurve, name: &str) -> Result<PerfMetrics> {
    Ok(PerfMetrics {
        strategy: name.to_string(),
        cagr: cagr(&curve.benchmark)?,
        sharpe: defined(sharpe(&curve.benchmark_returns))?,
        max_drawdown: max_drawdown(&curve.benchmark),
        information_ratio: defined(information_ratio(&curve.benchmark_returns, &curve.benchmark_returns))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let r = 2f64.powf(1.0 / 504.0) - 1.0;
        let mut c = vec![1.0];
        for _ in 0..504 {
            c.push(c[c.len() - 1] * (1.0 + r));
        }
        assert!((cagr(&c).unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert_eq!(max_drawdown(&[1.0, 2.0, 1.0, 3.0]), 0.5);
        assert_eq!(max_drawdown(&[1.0, 1.1, 1.2]), 0.0);
        assert!(matches!(sharpe(&[0.01; 10]), Err(Error::MetricUndefined(_))));
        let x = [0.01, -0.02, 0.03];
        assert!(matches!(information_ratio(&x, &x), Err(Error::MetricUndefined(_))));
    }
}
