//! Elementary transforms composed by the feature recipes.
//!
//! Every rolling statistic uses the sample standard deviation (divisor `w − 1`)
//! unless a function says otherwise. Undefined head values are dropped, so a
//! rolling transform of window `w` returns `w − 1` fewer observations.

use serde::{Deserialize, Serialize};

use super::frame::Series;
use crate::error::{Error, Result, Warning, WarningCode};

/// One step of a feature transform chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformSpec {
    None,
    Difference {
        #[serde(default = "default_lag")]
        lag: usize,
    },
    PctChange,
    LogDiff,
    RollingZscore {
        window: usize,
    },
    /// Same statistic as `rolling_zscore`; kept separate because the macro
    /// recipes use it with a long (one-year) window.
    RollingStandardise {
        #[serde(default = "default_standardise_window")]
        window: usize,
    },
    Ewma {
        #[serde(default)]
        span: Option<f64>,
        #[serde(default)]
        half_life: Option<f64>,
    },
    /// Natural log followed by a rolling z-score.
    VolTransform {
        #[serde(default = "default_vol_window")]
        window: usize,
    },
}

fn default_lag() -> usize {
    1
}

fn default_standardise_window() -> usize {
    252
}

fn default_vol_window() -> usize {
    126
}

impl TransformSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TransformSpec::RollingZscore { window }
            | TransformSpec::RollingStandardise { window }
            | TransformSpec::VolTransform { window }
                if window < 2 =>
            {
                Err(Error::Config(format!("rolling window must be >= 2, got {window}")))
            }
            TransformSpec::Difference { lag: 0 } => Err(Error::Config("difference lag must be >= 1".into())),
            TransformSpec::Ewma { span, half_life } => EwmaParam::from_options(span, half_life).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Number of leading observations consumed.
    pub fn warmup(&self) -> usize {
        match *self {
            TransformSpec::None | TransformSpec::Ewma { .. } => 0,
            TransformSpec::Difference { lag } => lag,
            TransformSpec::PctChange | TransformSpec::LogDiff => 1,
            TransformSpec::RollingZscore { window }
            | TransformSpec::RollingStandardise { window }
            | TransformSpec::VolTransform { window } => window - 1,
        }
    }
}

/// EWMA smoothing parameter: either a span or a half-life, never both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EwmaParam {
    Span(f64),
    HalfLife(f64),
}

impl EwmaParam {
    pub fn from_options(span: Option<f64>, half_life: Option<f64>) -> Result<Self> {
        let p = match (span, half_life) {
            (Some(s), None) => EwmaParam::Span(s),
            (None, Some(h)) => EwmaParam::HalfLife(h),
            _ => return Err(Error::Config("ewma needs exactly one of `span` or `half_life`".into())),
        };
        let v = match p {
            EwmaParam::Span(v) | EwmaParam::HalfLife(v) => v,
        };
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Config(format!("ewma parameter must be positive, got {v}")));
        }
        Ok(p)
    }

    pub fn alpha(self) -> f64 {
        match self {
            EwmaParam::Span(s) => 2.0 / (s + 1.0),
            EwmaParam::HalfLife(h) => 1.0 - (0.5f64.ln() / h).exp(),
        }
    }
}

pub fn pct_change(s: &Series) -> Result<Series> {
    let mut values = Vec::with_capacity(s.len().saturating_sub(1));
    for t in 1..s.len() {
        let prev = s.values[t - 1];
        if prev == 0.0 {
            return Err(Error::Division { series: s.name.clone(), date: s.dates[t] });
        }
        values.push((s.values[t] - prev) / prev);
    }
    Ok(Series::new(s.name.clone(), s.dates.iter().skip(1).copied().collect(), values))
}

pub fn difference(s: &Series, lag: usize) -> Series {
    let lag = lag.max(1);
    let values = (lag..s.len()).map(|t| s.values[t] - s.values[t - lag]).collect();
    Series::new(s.name.clone(), s.dates.iter().skip(lag).copied().collect(), values)
}

pub fn log_diff(s: &Series) -> Result<Series> {
    let logs = log(s)?;
    Ok(difference(&logs, 1))
}

pub fn log(s: &Series) -> Result<Series> {
    if let Some(i) = s.values.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Domain(format!(
            "log of non-positive value {} in `{}` at {}",
            s.values[i], s.name, s.dates[i]
        )));
    }
    Ok(s.map(f64::ln))
}

pub fn ewma(s: &Series, param: EwmaParam) -> Series {
    Series::new(s.name.clone(), s.dates.clone(), ewma_values(&s.values, param.alpha()))
}

/// `y[0] = x[0]`, `y[t] = (1 − α)·y[t−1] + α·x[t]`.
pub fn ewma_values(x: &[f64], alpha: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut y = match x.first() {
        Some(v) => *v,
        None => return out,
    };
    out.push(y);
    for &v in &x[1..] {
        y = (1.0 - alpha) * y + alpha * v;
        out.push(y);
    }
    out
}

/// Mean and standard deviation (`divisor = w − ddof`) of each full window,
/// computed directly per window so that results do not depend on history
/// outside the window.
pub fn rolling_moments(x: &[f64], window: usize, ddof: usize) -> Vec<(f64, f64)> {
    if window == 0 || x.len() < window {
        return Vec::new();
    }
    x.windows(window)
        .map(|w| {
            let n = w.len() as f64;
            let mean = w.iter().sum::<f64>() / n;
            let ss = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
            (mean, (ss / (n - ddof as f64)).sqrt())
        })
        .collect()
}

pub fn rolling_mean(x: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || x.len() < window {
        return Vec::new();
    }
    x.windows(window).map(|w| w.iter().sum::<f64>() / w.len() as f64).collect()
}

pub fn rolling_max(x: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || x.len() < window {
        return Vec::new();
    }
    x.windows(window).map(|w| w.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect()
}

/// True when a window's dispersion is indistinguishable from rounding noise.
pub(crate) fn is_degenerate(window: &[f64], std: f64) -> bool {
    let scale = window.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    std <= 16.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE)
}

/// Rolling z-score with sample standard deviation. Windows with zero
/// dispersion yield `0.0` and a [`WarningCode::ZeroVariance`] record.
pub fn rolling_zscore(s: &Series, window: usize) -> Result<(Series, Vec<Warning>)> {
    rolling_zscore_ddof(s, window, 1)
}

pub(crate) fn rolling_zscore_ddof(s: &Series, window: usize, ddof: usize) -> Result<(Series, Vec<Warning>)> {
    if window < 2 {
        return Err(Error::Config(format!("rolling window must be >= 2, got {window}")));
    }
    let moments = rolling_moments(&s.values, window, ddof);
    let mut warnings = Vec::new();
    let values = moments
        .iter()
        .enumerate()
        .map(|(i, &(mean, std))| {
            let t = i + window - 1;
            if is_degenerate(&s.values[i..=t], std) {
                warnings.push(Warning::new(
                    WarningCode::ZeroVariance,
                    s.name.clone(),
                    Some(s.dates[t]),
                    format!("zero rolling std over {window} observations; emitted 0.0"),
                ));
                0.0
            } else {
                (s.values[t] - mean) / std
            }
        })
        .collect();
    let dates = s.dates.iter().skip(window - 1).copied().collect();
    Ok((Series::new(s.name.clone(), dates, values), warnings))
}

/// Applies one transform step.
pub fn apply(s: &Series, spec: &TransformSpec) -> Result<(Series, Vec<Warning>)> {
    spec.validate()?;
    let out = match *spec {
        TransformSpec::None => s.clone(),
        TransformSpec::Difference { lag } => difference(s, lag),
        TransformSpec::PctChange => pct_change(s)?,
        TransformSpec::LogDiff => log_diff(s)?,
        TransformSpec::RollingZscore { window } | TransformSpec::RollingStandardise { window } => {
            return rolling_zscore(s, window)
        }
        TransformSpec::Ewma { span, half_life } => ewma(s, EwmaParam::from_options(span, half_life)?),
        TransformSpec::VolTransform { window } => return rolling_zscore(&log(s)?, window),
    };
    Ok((out, Vec::new()))
}

/// Applies a chain of transforms left to right.
pub fn apply_chain(s: &Series, chain: &[TransformSpec]) -> Result<(Series, Vec<Warning>)> {
    let mut cur = s.clone();
    let mut warnings = Vec::new();
    for step in chain {
        let (next, w) = apply(&cur, step)?;
        cur = next;
        warnings.extend(w);
    }
    Ok((cur, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::calendar::business_days;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn series(values: &[f64]) -> Series {
        let start = NaiveDate::from_ymd_opt(2020, 1, 6).unwrap();
        let dates = business_days(start, start + chrono::Duration::days(values.len() as i64 * 2 + 7));
        Series::new("x", dates[..values.len()].to_vec(), values.to_vec())
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pct_change_examples() {
        let out = pct_change(&series(&[100.0, 110.0, 99.0])).unwrap();
        assert!(close(out.values[0], 0.10, 1e-15) && close(out.values[1], -0.10, 1e-15));
        let out = pct_change(&series(&[2.0, 2.2, 2.42])).unwrap();
        assert!(out.values.iter().all(|v| close(*v, 0.1, 1e-12)));
        assert!(pct_change(&series(&[5.0; 6])).unwrap().values.iter().all(|v| *v == 0.0));
        let s = series(&[1.0, 0.0, 3.0]);
        match pct_change(&s) {
            Err(Error::Division { date, .. }) => assert_eq!(date, s.dates[2]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rolling_zscore_examples() {
        let (out, w) = rolling_zscore(&series(&[1.0, 2.0, 3.0]), 3).unwrap();
        assert_eq!(out.len(), 1);
        assert!(close(out.values[0], 1.0, 1e-15));
        assert!(w.is_empty());
        let (out, w) = rolling_zscore(&series(&[0.1; 5]), 3).unwrap();
        assert_eq!(out.values, vec![0.0; 3]);
        assert_eq!(w.len(), 3);
        assert_eq!(w[0].code, WarningCode::ZeroVariance);
        assert!(rolling_zscore(&series(&[1.0, 2.0]), 1).is_err());
    }

    #[test]
    fn ewma_examples() {
        let out = ewma(&series(&[3.5; 10]), EwmaParam::Span(4.0));
        assert!(out.values.iter().all(|v| *v == 3.5));
        assert_eq!(EwmaParam::Span(10.0).alpha(), 2.0 / 11.0);

        // Impulse: weight on lag k is α(1−α)^k, so lag 5 carries half of lag 0 at half-life 5.
        let alpha = EwmaParam::HalfLife(5.0).alpha();
        let mut x = vec![0.0; 12];
        x[1] = 1.0;
        let y = ewma_values(&x, alpha);
        assert!(close(y[6] / y[1], 0.5, 1e-12));
        assert!(EwmaParam::from_options(Some(1.0), Some(2.0)).is_err());
        assert!(EwmaParam::from_options(Some(-1.0), None).is_err());
    }

    #[test]
    fn difference_and_log_diff_examples() {
        assert_eq!(difference(&series(&[1.0, 4.0, 9.0]), 1).values, vec![3.0, 5.0]);
        let e = std::f64::consts::E;
        let ld = log_diff(&series(&[1.0, e, e * e])).unwrap();
        assert!(ld.values.iter().all(|v| close(*v, 1.0, 1e-15)));
        assert!(matches!(log_diff(&series(&[1.0, 0.0])), Err(Error::Domain(_))));
    }

    proptest! {
        #[test]
        fn diff_cumsum_restores(xs in proptest::collection::vec(-1e3f64..1e3, 2..60)) {
            let d = difference(&series(&xs), 1);
            let mut acc = xs[0];
            for (i, dv) in d.values.iter().enumerate() {
                acc += dv;
                prop_assert!((acc - xs[i + 1]).abs() <= 1e-9);
            }
        }

        #[test]
        fn pct_change_cumprod_restores(xs in proptest::collection::vec(0.5f64..2.0, 2..60)) {
            let p = pct_change(&series(&xs)).unwrap();
            let mut acc = xs[0];
            for (i, r) in p.values.iter().enumerate() {
                acc *= 1.0 + r;
                prop_assert!((acc - xs[i + 1]).abs() <= 1e-12 * xs[i + 1].abs().max(1.0));
            }
        }

        #[test]
        fn zscore_shift_and_scale_invariant(
            xs in proptest::collection::vec(-10f64..10.0, 10..50),
            shift in -100f64..100.0,
            scale in 0.01f64..100.0,
        ) {
            let (base, w0) = rolling_zscore(&series(&xs), 5).unwrap();
            prop_assume!(w0.is_empty());
            let moved: Vec<f64> = xs.iter().map(|v| v * scale + shift).collect();
            let (out, _) = rolling_zscore(&series(&moved), 5).unwrap();
            for (a, b) in base.values.iter().zip(&out.values) {
                prop_assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
            }
        }

        #[test]
        fn ewma_stays_within_range(xs in proptest::collection::vec(-50f64..50.0, 1..80), span in 1.0f64..40.0) {
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for y in ewma(&series(&xs), EwmaParam::Span(span)).values {
                prop_assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
            }
        }
    }
}
