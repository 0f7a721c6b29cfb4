//! Volatility estimators used by the FX volatility recipes.

use crate::error::{Error, Result, Warning};
use crate::series::transforms::{self, ewma_values, rolling_moments};
use crate::series::{Frame, Series};

/// Trading days per year used for every annualisation.
pub const ANNUALIZATION: f64 = 252.0;

/// Names of the OHLC columns in a frame.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OhlcColumns {
    pub open: String,
    pub high: String,
    pub low: String,
    pub close: String,
}

impl Default for OhlcColumns {
    fn default() -> Self {
        OhlcColumns { open: "open".into(), high: "high".into(), low: "low".into(), close: "close".into() }
    }
}

/// Garman–Klass daily variance `0.5·ln(H/L)² − (2 ln 2 − 1)·ln(C/O)²`.
pub fn garman_klass_variance(open: f64, high: f64, low: f64, close: f64) -> f64 {
    let hl = (high / low).ln();
    let co = (close / open).ln();
    0.5 * hl * hl - (2.0 * std::f64::consts::LN_2 - 1.0) * co * co
}

/// Annualised Garman–Klass volatility: `sqrt(mean of daily variance over
/// window) · √252`.
pub fn garman_klass_vol(ohlc: &Frame, cols: &OhlcColumns, window: usize) -> Result<Series> {
    if window == 0 {
        return Err(Error::Config("garman-klass window must be >= 1".into()));
    }
    let (o, h, l, c) = (ohlc.require(&cols.open)?, ohlc.require(&cols.high)?, ohlc.require(&cols.low)?, ohlc.require(&cols.close)?);
    let dates = ohlc.dates();
    let mut daily = Vec::with_capacity(dates.len());
    for i in 0..dates.len() {
        let (o, h, l, c) = (o[i], h[i], l[i], c[i]);
        let ok = o > 0.0 && h > 0.0 && l > 0.0 && c > 0.0 && h >= o.max(c) && l <= o.min(c);
        if !ok {
            return Err(Error::Data {
                date: dates[i],
                reason: format!("invalid OHLC bar (open {o}, high {h}, low {l}, close {c})"),
            });
        }
        // Clamp rounding noise; the variance is non-negative when C and O lie in [L, H].
        daily.push(garman_klass_variance(o, h, l, c).max(0.0));
    }
    let values: Vec<f64> =
        transforms::rolling_mean(&daily, window).into_iter().map(|v| (v * ANNUALIZATION).sqrt()).collect();
    Ok(Series::new(cols.close.clone(), dates.iter().skip(window - 1).copied().collect(), values))
}

/// Natural log then a rolling z-score (default window 126, half a year).
pub fn vol_transform(vol: &Series, window: usize) -> Result<(Series, Vec<Warning>)> {
    let logged = transforms::log(vol)?;
    transforms::rolling_zscore(&logged, window)
}

/// Rolling sample standard deviation of returns, annualised by √252 when asked.
pub fn realized_vol(returns: &Series, window: usize, annualize: bool) -> Result<Series> {
    if window < 2 {
        return Err(Error::Config(format!("realized-vol window must be >= 2, got {window}")));
    }
    if returns.len() < window {
        return Err(Error::Length(format!("{} returns for a {window}-day window", returns.len())));
    }
    let k = if annualize { ANNUALIZATION.sqrt() } else { 1.0 };
    let values = rolling_moments(&returns.values, window, 1).into_iter().map(|(_, s)| s * k).collect();
    Ok(Series::new(returns.name.clone(), returns.dates.iter().skip(window - 1).copied().collect(), values))
}

/// `sqrt(EWMA(r²))`, annualised.
pub fn ewma_vol(returns: &Series, span: f64) -> Result<Series> {
    let alpha = transforms::EwmaParam::from_options(Some(span), None)?.alpha();
    let sq: Vec<f64> = returns.values.iter().map(|r| r * r).collect();
    let values = ewma_values(&sq, alpha).into_iter().map(|v| (v * ANNUALIZATION).sqrt()).collect();
    Ok(Series::new(returns.name.clone(), returns.dates.clone(), values))
}

/// Rolling mean of absolute returns.
pub fn mean_abs_return(returns: &Series, window: usize) -> Series {
    let abs: Vec<f64> = returns.values.iter().map(|r| r.abs()).collect();
    let values = transforms::rolling_mean(&abs, window);
    Series::new(returns.name.clone(), returns.dates.iter().skip(window.saturating_sub(1)).copied().collect(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::calendar::business_days;
    use chrono::NaiveDate;

    fn ohlc(bars: &[(f64, f64, f64, f64)]) -> Frame {
        let start = NaiveDate::from_ymd_opt(2021, 1, 4).unwrap();
        let dates = business_days(start, start + chrono::Duration::days(bars.len() as i64 * 2 + 7))[..bars.len()].to_vec();
        Frame::new(
            dates,
            vec![
                ("open".into(), bars.iter().map(|b| b.0).collect()),
                ("high".into(), bars.iter().map(|b| b.1).collect()),
                ("low".into(), bars.iter().map(|b| b.2).collect()),
                ("close".into(), bars.iter().map(|b| b.3).collect()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn flat_bars_have_zero_vol() {
        let f = ohlc(&[(1.5, 1.5, 1.5, 1.5); 10]);
        let v = garman_klass_vol(&f, &OhlcColumns::default(), 5).unwrap();
        assert_eq!(v.len(), 6);
        assert!(v.values.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn single_bar_variance() {
        let v = garman_klass_variance(1.0, 0.02f64.exp(), 1.0, 1.0);
        assert!((v - 2.0e-4).abs() < 1e-15);
    }

    #[test]
    fn bad_bar_is_data_error() {
        let f = ohlc(&[(1.0, 1.1, 0.9, 1.0), (1.0, 0.95, 0.9, 1.0)]);
        match garman_klass_vol(&f, &OhlcColumns::default(), 1) {
            Err(Error::Data { date, .. }) => assert_eq!(date, f.dates()[1]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn vol_transform_is_scale_free() {
        let start = NaiveDate::from_ymd_opt(2021, 1, 4).unwrap();
        let dates = business_days(start, start + chrono::Duration::days(80))[..40].to_vec();
        let vals: Vec<f64> = (0..40).map(|i| 0.1 + 0.05 * ((i as f64) * 0.7).sin().abs()).collect();
        let s = Series::new("v", dates, vals);
        let (a, _) = vol_transform(&s, 10).unwrap();
        let (b, _) = vol_transform(&s.map(|v| v * 10.0), 10).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-9);
        }
        let (c, w) = vol_transform(&s.map(|_| 0.2), 10).unwrap();
        assert!(c.values.iter().all(|v| *v == 0.0) && !w.is_empty());
        assert!(vol_transform(&s.map(|_| 0.0), 10).is_err());
    }
}
