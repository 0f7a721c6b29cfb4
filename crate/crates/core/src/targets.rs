//! Forecast targets and the cointegration precondition for spread targets.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning, WarningCode};
use crate::features::adf::{adf_regression, engle_granger_critical_values, AdfRegression};
use crate::features::volatility::ANNUALIZATION;
use crate::series::transforms::{rolling_moments, rolling_zscore_ddof};
use crate::series::Series;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Cumulative change from the origin; the no-information forecast is zero.
    Change,
    /// Future level of a series observed at the origin.
    Level,
}

/// `y[t, h]` for origins `t` and horizons `h = 1..=H`. Only origins whose
/// whole horizon is observed are present.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMatrix {
    pub kind: TargetKind,
    horizon: usize,
    origins: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl TargetMatrix {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn origins(&self) -> &[NaiveDate] {
        &self.origins
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    /// Row `i`: values for horizons `1..=H`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.horizon..(i + 1) * self.horizon]
    }

    /// `y[t, h]` with `h` starting at 1.
    pub fn get(&self, i: usize, h: usize) -> f64 {
        self.values[i * self.horizon + h - 1]
    }

    pub fn row_for(&self, origin: NaiveDate) -> Option<&[f64]> {
        self.origins.binary_search(&origin).ok().map(|i| self.row(i))
    }

    /// Rows whose origin is on or after `first`.
    pub fn from_origin(&self, first: NaiveDate) -> TargetMatrix {
        let start = self.origins.partition_point(|d| *d < first);
        TargetMatrix {
            kind: self.kind,
            horizon: self.horizon,
            origins: self.origins[start..].to_vec(),
            values: self.values[start * self.horizon..].to_vec(),
        }
    }

    /// CSV with `date,h1..hH` for change targets.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["date".to_string()];
        header.extend((1..=self.horizon).map(|h| format!("h{h}")));
        w.write_record(&header).expect("in-memory write");
        for (i, d) in self.origins.iter().enumerate() {
            let mut rec = vec![d.format("%Y-%m-%d").to_string()];
            rec.extend(self.row(i).iter().map(|v| format!("{v}")));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// `y[t,h] = Π_{i=1..h} (1 + (r[t+i] − r[t+i−1]) / r[t+i−1]) − 1`.
pub fn cumulative_pct_change_target(levels: &Series, horizon: usize) -> Result<TargetMatrix> {
    if horizon == 0 {
        return Err(Error::Config("target horizon must be >= 1".into()));
    }
    let r = &levels.values;
    if let Some(i) = r.iter().position(|v| *v == 0.0) {
        return Err(Error::Division { series: levels.name.clone(), date: levels.dates[i] });
    }
    let n_origins = r.len().saturating_sub(horizon);
    let daily: Vec<f64> = r.windows(2).map(|w| (w[1] - w[0]) / w[0]).collect();
    let mut values = Vec::with_capacity(n_origins * horizon);
    for t in 0..n_origins {
        let mut acc = 1.0;
        for h in 1..=horizon {
            acc *= 1.0 + daily[t + h - 1];
            values.push(acc - 1.0);
        }
    }
    Ok(TargetMatrix { kind: TargetKind::Change, horizon, origins: levels.dates[..n_origins].to_vec(), values })
}

/// `y[t,h] = level[t+h]`.
pub fn level_target_matrix(level: &Series, horizon: usize) -> Result<TargetMatrix> {
    if horizon == 0 {
        return Err(Error::Config("target horizon must be >= 1".into()));
    }
    let n_origins = level.len().saturating_sub(horizon);
    let mut values = Vec::with_capacity(n_origins * horizon);
    for t in 0..n_origins {
        values.extend_from_slice(&level.values[t + 1..=t + horizon]);
    }
    Ok(TargetMatrix { kind: TargetKind::Level, horizon, origins: level.dates[..n_origins].to_vec(), values })
}

/// `ln(√252 · rolling sample std of log returns)`.
pub fn log_realized_vol_target(log_returns: &Series, window: usize) -> Result<Series> {
    if window < 2 {
        return Err(Error::Config(format!("realized-vol window must be >= 2, got {window}")));
    }
    if log_returns.len() < window {
        return Err(Error::Length(format!("{} returns for a {window}-day window", log_returns.len())));
    }
    let mut values = Vec::with_capacity(log_returns.len() + 1 - window);
    for (i, (_, std)) in rolling_moments(&log_returns.values, window, 1).into_iter().enumerate() {
        if !(std > 0.0) {
            return Err(Error::Domain(format!(
                "zero realized volatility in `{}` at {}",
                log_returns.name,
                log_returns.dates[i + window - 1]
            )));
        }
        values.push((std * ANNUALIZATION.sqrt()).ln());
    }
    Ok(Series::new(log_returns.name.clone(), log_returns.dates[window - 1..].to_vec(), values))
}

/// `(s[t] − μ_t) / σ_t` for the log-price spread `s = ln pA − ln pB`, with
/// `μ_t`, `σ_t` the mean and population (divisor `w`) standard deviation of the
/// last `w` spread values.
pub fn standardized_spread_target(pa: &Series, pb: &Series, window: usize) -> Result<(Series, Vec<Warning>)> {
    let spread = log_spread(pa, pb)?;
    rolling_zscore_ddof(&spread, window, 0)
}

/// `ln pA − ln pB` on the common dates.
pub fn log_spread(pa: &Series, pb: &Series) -> Result<Series> {
    for s in [pa, pb] {
        if let Some(i) = s.values.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::Domain(format!("non-positive price in `{}` at {}", s.name, s.dates[i])));
        }
    }
    Ok(pa.zip_with(pb, "spread", |a, b| a.ln() - b.ln()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CointResult {
    pub beta: f64,
    pub intercept: f64,
    /// ADF statistic of the residual; `-inf` when the residual is identically zero.
    pub statistic: f64,
    pub lags: usize,
    pub critical_values: [f64; 3],
    pub cointegrated_5pct: bool,
}

impl CointResult {
    pub fn warning(&self, name: &str) -> Option<Warning> {
        (!self.cointegrated_5pct).then(|| {
            Warning::new(
                WarningCode::NotCointegrated,
                name,
                None,
                format!("Engle-Granger statistic {:.3} above 5% critical value {:.3}", self.statistic, self.critical_values[1]),
            )
        })
    }
}

/// Engle–Granger two-step test: OLS `y = a + βx + z`, then an ADF regression
/// without deterministic terms on `z`, judged against the two-variable
/// cointegration critical values.
pub fn engle_granger(x: &[f64], y: &[f64]) -> Result<CointResult> {
    if x.len() != y.len() {
        return Err(Error::Length(format!("x has {} values, y has {}", x.len(), y.len())));
    }
    if x.len() <= 50 {
        return Err(Error::Length(format!("Engle-Granger needs more than 50 observations, got {}", x.len())));
    }
    let n = x.len();
    let design = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { x[i] });
    let fit = crate::linalg::ols(&design, &DVector::from_column_slice(y))?;
    let (intercept, beta) = (fit.coef[0], fit.coef[1]);
    let resid: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| yi - intercept - beta * xi).collect();

    let y_mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let rss: f64 = resid.iter().map(|r| r * r).sum();
    if rss <= 1e-20 * tss.max(f64::MIN_POSITIVE) {
        let cv = engle_granger_critical_values(AdfRegression::Constant, n);
        return Ok(CointResult {
            beta,
            intercept,
            statistic: f64::NEG_INFINITY,
            lags: 0,
            critical_values: cv,
            cointegrated_5pct: true,
        });
    }
    let adf = adf_regression(&resid, None, AdfRegression::NoConstant)?;
    let cv = engle_granger_critical_values(AdfRegression::Constant, adf.nobs);
    Ok(CointResult {
        beta,
        intercept,
        statistic: adf.statistic,
        lags: adf.lags,
        critical_values: cv,
        cointegrated_5pct: adf.statistic < cv[1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::calendar::business_days;

    fn series(values: Vec<f64>) -> Series {
        let start = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
        let dates = business_days(start, start + chrono::Duration::days(values.len() as i64 * 2 + 7));
        Series::new("r", dates[..values.len()].to_vec(), values)
    }

    #[test]
    fn cumulative_change_examples() {
        let m = cumulative_pct_change_target(&series(vec![2.0, 2.2, 2.42]), 2).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m.get(0, 2) - 0.21).abs() < 1e-12);
        assert!((m.get(0, 1) - 0.1).abs() < 1e-12);
        let c = cumulative_pct_change_target(&series(vec![4.0; 30]), 5).unwrap();
        assert!(c.row(3).iter().all(|v| *v == 0.0));
        assert_eq!(c.len(), 25);
        assert!(matches!(cumulative_pct_change_target(&series(vec![1.0, 0.0, 1.0]), 1), Err(Error::Division { .. })));
    }

    #[test]
    fn realized_vol_closed_form() {
        let s = 0.01;
        // even window so every window has mean exactly zero
        let w = 20;
        let r: Vec<f64> = (0..60).map(|i| if i % 2 == 0 { s } else { -s }).collect();
        let t = log_realized_vol_target(&series(r), w).unwrap();
        let expected = (s * (w as f64 / (w as f64 - 1.0)).sqrt() * 252f64.sqrt()).ln();
        assert!(t.values.iter().all(|v| (v - expected).abs() < 1e-12));
        assert_eq!(t.len(), 60 - w + 1);
        assert!(matches!(log_realized_vol_target(&series(vec![0.0; 30]), 5), Err(Error::Domain(_))));
    }

    #[test]
    fn spread_at_rolling_mean_is_zero() {
        let pa = series((0..50).map(|i| 10.0 + (i as f64 * 0.2).sin()).collect());
        let pb = series(vec![5.0; 50]);
        let (y, _) = standardized_spread_target(&pa, &pb, 42).unwrap();
        assert_eq!(y.len(), 9);
        let (flat, w) = standardized_spread_target(&pb, &pb, 42).unwrap();
        assert!(flat.values.iter().all(|v| *v == 0.0) && !w.is_empty());
    }

    #[test]
    fn identical_series_short_circuit() {
        let x: Vec<f64> = (0..100).map(|i| (i as f64 * 0.1).sin() + i as f64 * 0.01).collect();
        let r = engle_granger(&x, &x).unwrap();
        assert!(r.cointegrated_5pct && (r.beta - 1.0).abs() < 1e-12);
        assert!(matches!(engle_granger(&x, &x[..99]), Err(Error::Length(_))));
    }
}
