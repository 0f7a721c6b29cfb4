//! Price/spread technical indicators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::series::transforms::{self, ewma_values, is_degenerate, rolling_max, rolling_moments, EwmaParam};
use crate::series::{align, Frame, Series};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TechnicalWindows {
    pub bollinger: usize,
    pub bollinger_width: f64,
    pub ma_short_span: f64,
    pub ma_long_span: f64,
    pub drawdown_peak: usize,
    pub drawdown_zscore: usize,
}

impl Default for TechnicalWindows {
    fn default() -> Self {
        TechnicalWindows {
            bollinger: 20,
            bollinger_width: 2.0,
            ma_short_span: 5.0,
            ma_long_span: 20.0,
            drawdown_peak: 63,
            drawdown_zscore: 63,
        }
    }
}

impl TechnicalWindows {
    /// Observations needed before every indicator is defined.
    pub fn min_history(&self) -> usize {
        self.bollinger.max(self.drawdown_peak + self.drawdown_zscore - 1)
    }
}

/// `(x − rolling mean) / (width · rolling std)`; degenerate windows give 0.
pub fn bollinger_position(x: &Series, window: usize, width: f64) -> Result<Series> {
    if window < 2 {
        return Err(Error::Config(format!("bollinger window must be >= 2, got {window}")));
    }
    let values = rolling_moments(&x.values, window, 1)
        .into_iter()
        .enumerate()
        .map(|(i, (mean, std))| {
            let t = i + window - 1;
            if is_degenerate(&x.values[i..=t], std) {
                0.0
            } else {
                (x.values[t] - mean) / (width * std)
            }
        })
        .collect();
    Ok(Series::new(x.name.clone(), x.dates.iter().skip(window - 1).copied().collect(), values))
}

/// Short EWMA minus long EWMA.
pub fn ma_divergence(x: &Series, short_span: f64, long_span: f64) -> Result<Series> {
    let a_short = EwmaParam::from_options(Some(short_span), None)?.alpha();
    let a_long = EwmaParam::from_options(Some(long_span), None)?.alpha();
    let s = ewma_values(&x.values, a_short);
    let l = ewma_values(&x.values, a_long);
    Ok(Series::new(x.name.clone(), x.dates.clone(), s.iter().zip(&l).map(|(a, b)| a - b).collect()))
}

/// `(x − rolling max) / rolling max`, always `<= 0`.
pub fn drawdown(x: &Series, peak_window: usize) -> Result<Series> {
    let peaks = rolling_max(&x.values, peak_window);
    let mut values = Vec::with_capacity(peaks.len());
    for (i, peak) in peaks.iter().enumerate() {
        let t = i + peak_window - 1;
        if !(*peak > 0.0) {
            return Err(Error::Domain(format!(
                "drawdown needs a positive running peak; `{}` at {} has peak {peak}",
                x.name, x.dates[t]
            )));
        }
        values.push((x.values[t] - peak) / peak);
    }
    Ok(Series::new(x.name.clone(), x.dates.iter().skip(peak_window - 1).copied().collect(), values))
}

/// `sqrt(EWMA(Δx²))` of first differences.
pub fn ema_volatility(x: &Series, span: f64) -> Result<Series> {
    let d = transforms::difference(x, 1);
    let alpha = EwmaParam::from_options(Some(span), None)?.alpha();
    let sq: Vec<f64> = d.values.iter().map(|v| v * v).collect();
    Ok(Series::new(x.name.clone(), d.dates.clone(), ewma_values(&sq, alpha).into_iter().map(f64::sqrt).collect()))
}

/// Bollinger position, MA divergence and z-scored drawdown of one series.
pub fn technical_block(x: &Series, windows: &TechnicalWindows) -> Result<(Frame, Vec<Warning>)> {
    let need = windows.min_history();
    if x.len() < need {
        return Err(Error::Length(format!("technical block needs {need} observations, got {}", x.len())));
    }
    let boll = bollinger_position(x, windows.bollinger, windows.bollinger_width)?.renamed("bollinger_position");
    let mad = ma_divergence(x, windows.ma_short_span, windows.ma_long_span)?.renamed("ma_divergence");
    let dd = drawdown(x, windows.drawdown_peak)?;
    let (ddz, warnings) = transforms::rolling_zscore(&dd, windows.drawdown_zscore)?;
    let frame = Frame::from_series(&[boll, mad, ddz.renamed("drawdown_z")])?;
    Ok((align(&[frame], 0)?, warnings))
}
