//! Forecast-to-position rules. All rules are sign-inverted: a predicted
//! yield rise means short bonds.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::transforms::{ewma_values, rolling_mean, EwmaParam};
use crate::series::Series;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(i8)]
pub enum Position {
    Short = -1,
    Flat = 0,
    Long = 1,
}

impl Position {
    pub fn value(self) -> f64 {
        self as i8 as f64
    }

    /// Opposite side to the sign of `x`; flat for zero.
    fn against(x: f64) -> Position {
        if x > 0.0 {
            Position::Short
        } else if x < 0.0 {
            Position::Long
        } else {
            Position::Flat
        }
    }
}

/// Positions on the dates after each rule's warm-up.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSeries {
    pub name: String,
    pub dates: Vec<NaiveDate>,
    pub positions: Vec<Position>,
}

impl SignalSeries {
    pub fn constant(name: impl Into<String>, dates: Vec<NaiveDate>, p: Position) -> SignalSeries {
        let positions = vec![p; dates.len()];
        SignalSeries { name: name.into(), dates, positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn thresholded(x: f64, threshold: f64) -> Position {
    if x.abs() <= threshold {
        Position::Flat
    } else {
        Position::against(x)
    }
}

fn check(forecasts: &Series, window: usize) -> Result<()> {
    if window == 0 {
        return Err(Error::Config("signal window must be positive".into()));
    }
    if forecasts.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite forecast in `{}`", forecasts.name)));
    }
    Ok(())
}

/// Signal 1: short when the rolling mean forecast exceeds `threshold`, long
/// below `−threshold`, flat in between.
pub fn signal_rolling_mean(forecasts: &Series, window: usize, threshold: f64) -> Result<SignalSeries> {
    check(forecasts, window)?;
    let positions = rolling_mean(&forecasts.values, window).into_iter().map(|m| thresholded(m, threshold)).collect();
    Ok(SignalSeries {
        name: "rolling_mean".into(),
        dates: forecasts.dates.get(window - 1..).unwrap_or_default().to_vec(),
        positions,
    })
}

/// Signal 2: as [`signal_rolling_mean`] on an EWMA with the given span. The
/// first `span − 1` values are warm-up.
pub fn signal_ewma(forecasts: &Series, span: usize, threshold: f64) -> Result<SignalSeries> {
    check(forecasts, span)?;
    let smooth = ewma_values(&forecasts.values, EwmaParam::Span(span as f64).alpha());
    let skip = (span - 1).min(smooth.len());
    Ok(SignalSeries {
        name: "ewma".into(),
        dates: forecasts.dates[skip..].to_vec(),
        positions: smooth[skip..].iter().map(|&m| thresholded(m, threshold)).collect(),
    })
}

/// Signal 3: a position against the majority sign when at least `quorum` of
/// the last `window` forecasts share it.
pub fn signal_vote(forecasts: &Series, window: usize, quorum: usize) -> Result<SignalSeries> {
    check(forecasts, window)?;
    if quorum == 0 || quorum > window {
        return Err(Error::Config(format!("quorum {quorum} must lie in 1..={window}")));
    }
    let positions = forecasts
        .values
        .windows(window)
        .map(|w| {
            let up = w.iter().filter(|v| **v > 0.0).count();
            let down = w.iter().filter(|v| **v < 0.0).count();
            if up >= quorum && up > down {
                Position::Short
            } else if down >= quorum && down > up {
                Position::Long
            } else {
                Position::Flat
            }
        })
        .collect();
    Ok(SignalSeries {
        name: "vote".into(),
        dates: forecasts.dates.get(window - 1..).unwrap_or_default().to_vec(),
        positions,
    })
}
