//! Declarative feature recipes and the stationarity-gated builder.

use serde::{Deserialize, Serialize};

use super::adf::{adf_test, AdfRegression, AdfResult};
use super::pca::pc1_expanding;
use super::technical::{bollinger_position, drawdown, ema_volatility, ma_divergence};
use super::volatility::{ewma_vol, garman_klass_vol, mean_abs_return, realized_vol, OhlcColumns};
use crate::error::{Error, Result, Warning};
use crate::series::transforms::{self, apply_chain, TransformSpec};
use crate::series::{align, Frame, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observability {
    /// Known only up to the forecast origin.
    #[default]
    Conditional,
    /// Known in advance (scheduled events).
    Observable,
}

/// A series derived from the raw columns: a plain column, a ratio or spread
/// of two columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeriesRef {
    Column(String),
    Ratio { ratio: [String; 2] },
    Spread { spread: [String; 2] },
}

impl SeriesRef {
    pub fn columns(&self) -> Vec<&str> {
        match self {
            SeriesRef::Column(c) => vec![c.as_str()],
            SeriesRef::Ratio { ratio: [a, b] } | SeriesRef::Spread { spread: [a, b] } => vec![a.as_str(), b.as_str()],
        }
    }

    pub fn resolve(&self, raw: &Frame) -> Result<Series> {
        match self {
            SeriesRef::Column(c) => raw.series(c),
            SeriesRef::Ratio { ratio: [a, b] } => {
                let (sa, sb) = (raw.series(a)?, raw.series(b)?);
                if let Some(i) = sb.values.iter().position(|v| *v == 0.0) {
                    return Err(Error::Division { series: b.clone(), date: sb.dates[i] });
                }
                Ok(sa.zip_with(&sb, format!("{a}/{b}"), |x, y| x / y))
            }
            SeriesRef::Spread { spread: [a, b] } => {
                Ok(raw.series(a)?.zip_with(&raw.series(b)?, format!("{a}-{b}"), |x, y| x - y))
            }
        }
    }
}

/// How the base series of a feature is constructed before its transform chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeatureSource {
    Series {
        of: SeriesRef,
    },
    /// Annualised Garman–Klass volatility.
    GarmanKlass {
        #[serde(default)]
        ohlc: OhlcColumns,
        #[serde(default = "five")]
        window: usize,
    },
    /// Annualised rolling std of log returns of a price.
    RealizedVol {
        price: String,
        window: usize,
    },
    EwmaVol {
        price: String,
        span: f64,
    },
    MeanAbsReturn {
        price: String,
        window: usize,
    },
    /// Ratio of short- to long-window realised volatility.
    VolRatio {
        price: String,
        short: usize,
        long: usize,
    },
    /// Causal first principal component of a maturity panel.
    Pc1 {
        columns: Vec<String>,
        #[serde(default = "year")]
        min_periods: usize,
    },
    Bollinger {
        of: SeriesRef,
        #[serde(default = "twenty")]
        window: usize,
        #[serde(default = "two")]
        width: f64,
    },
    MaDivergence {
        of: SeriesRef,
        #[serde(default = "five_f")]
        short_span: f64,
        #[serde(default = "twenty_f")]
        long_span: f64,
    },
    Drawdown {
        of: SeriesRef,
        #[serde(default = "quarter")]
        peak_window: usize,
    },
    EmaVol {
        of: SeriesRef,
        #[serde(default = "twenty_f")]
        span: f64,
    },
}

fn five() -> usize {
    5
}
fn twenty() -> usize {
    20
}
fn quarter() -> usize {
    63
}
fn year() -> usize {
    252
}
fn two() -> f64 {
    2.0
}
fn five_f() -> f64 {
    5.0
}
fn twenty_f() -> f64 {
    20.0
}

impl FeatureSource {
    pub fn column(name: &str) -> Self {
        FeatureSource::Series { of: SeriesRef::Column(name.into()) }
    }

    pub fn columns(&self) -> Vec<&str> {
        match self {
            FeatureSource::Series { of }
            | FeatureSource::Bollinger { of, .. }
            | FeatureSource::MaDivergence { of, .. }
            | FeatureSource::Drawdown { of, .. }
            | FeatureSource::EmaVol { of, .. } => of.columns(),
            FeatureSource::GarmanKlass { ohlc, .. } => {
                vec![ohlc.open.as_str(), ohlc.high.as_str(), ohlc.low.as_str(), ohlc.close.as_str()]
            }
            FeatureSource::RealizedVol { price, .. }
            | FeatureSource::EwmaVol { price, .. }
            | FeatureSource::MeanAbsReturn { price, .. }
            | FeatureSource::VolRatio { price, .. } => vec![price.as_str()],
            FeatureSource::Pc1 { columns, .. } => columns.iter().map(String::as_str).collect(),
        }
    }

    fn build(&self, raw: &Frame) -> Result<Series> {
        let log_returns = |price: &str| transforms::log_diff(&raw.series(price)?);
        match self {
            FeatureSource::Series { of } => of.resolve(raw),
            FeatureSource::GarmanKlass { ohlc, window } => garman_klass_vol(raw, ohlc, *window),
            FeatureSource::RealizedVol { price, window } => realized_vol(&log_returns(price)?, *window, true),
            FeatureSource::EwmaVol { price, span } => ewma_vol(&log_returns(price)?, *span),
            FeatureSource::MeanAbsReturn { price, window } => Ok(mean_abs_return(&log_returns(price)?, *window)),
            FeatureSource::VolRatio { price, short, long } => {
                let r = log_returns(price)?;
                let s = realized_vol(&r, *short, false)?;
                let l = realized_vol(&r, *long, false)?;
                if let Some(i) = l.values.iter().position(|v| *v == 0.0) {
                    return Err(Error::Division { series: price.clone(), date: l.dates[i] });
                }
                Ok(s.zip_with(&l, price.clone(), |a, b| a / b))
            }
            FeatureSource::Pc1 { columns, min_periods } => {
                let names: Vec<&str> = columns.iter().map(String::as_str).collect();
                let panel = raw.select(&names)?;
                pc1_expanding(&panel, *min_periods)
            }
            FeatureSource::Bollinger { of, window, width } => bollinger_position(&of.resolve(raw)?, *window, *width),
            FeatureSource::MaDivergence { of, short_span, long_span } => {
                ma_divergence(&of.resolve(raw)?, *short_span, *long_span)
            }
            FeatureSource::Drawdown { of, peak_window } => drawdown(&of.resolve(raw)?, *peak_window),
            FeatureSource::EmaVol { of, span } => ema_volatility(&of.resolve(raw)?, *span),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureRecipe {
    pub name: String,
    pub source: FeatureSource,
    /// Applied left to right; `[{ kind = "none" }]` for an untransformed feature.
    pub transforms: Vec<TransformSpec>,
    #[serde(default)]
    pub observability: Observability,
}

impl FeatureRecipe {
    pub fn new(name: &str, source: FeatureSource, transforms: Vec<TransformSpec>) -> Self {
        FeatureRecipe { name: name.into(), source, transforms, observability: Observability::Conditional }
    }

    pub fn observable(mut self) -> Self {
        self.observability = Observability::Observable;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.transforms.is_empty() {
            return Err(Error::Config(format!(
                "feature `{}` has an empty transform chain; use kind = \"none\" explicitly",
                self.name
            )));
        }
        for t in &self.transforms {
            t.validate()?;
        }
        if self.observability == Observability::Observable
            && (!matches!(self.source, FeatureSource::Series { of: SeriesRef::Column(_) })
                || self.transforms.iter().any(|t| *t != TransformSpec::None))
        {
            return Err(Error::Config(format!(
                "feature `{}` is observable; only untransformed scheduled columns may be",
                self.name
            )));
        }
        Ok(())
    }

    pub fn compute(&self, raw: &Frame) -> Result<(Series, Vec<Warning>)> {
        self.validate()?;
        let base = self.source.build(raw)?;
        let (s, w) = apply_chain(&base, &self.transforms)?;
        Ok((s.renamed(self.name.clone()), w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationarityGate {
    /// Any feature failing the 5% ADF test is an error.
    Enforce,
    /// Failures are reported as warnings.
    Warn,
}

#[derive(Debug, Clone)]
pub struct FeatureSet {
    pub frame: Frame,
    pub adf: Vec<(String, AdfResult)>,
    pub warnings: Vec<Warning>,
}

/// Runs every recipe, aligns the outputs (dropping warm-up rows) and tests each
/// feature for stationarity.
pub fn build_features(recipes: &[FeatureRecipe], raw: &Frame, gate: StationarityGate) -> Result<FeatureSet> {
    if recipes.is_empty() {
        return Ok(FeatureSet { frame: Frame::empty(), adf: Vec::new(), warnings: Vec::new() });
    }
    for r in recipes {
        r.validate()?;
        if let Some(missing) = r.source.columns().into_iter().find(|c| !raw.has_column(c)) {
            return Err(Error::Config(format!("feature `{}` references missing column `{missing}`", r.name)));
        }
    }
    let mut series = Vec::with_capacity(recipes.len());
    let mut warnings = Vec::new();
    for r in recipes {
        let (s, w) = r.compute(raw)?;
        series.push(s);
        warnings.extend(w);
    }
    let frame = align(&[Frame::from_series(&series)?], 0)?;

    let mut adf = Vec::with_capacity(recipes.len());
    let mut offenders = Vec::new();
    for name in frame.column_names() {
        let values = frame.require(name)?;
        let result = adf_test(values, None, AdfRegression::Constant)
            .map_err(|e| Error::Domain(format!("ADF on feature `{name}` failed: {e}")))?;
        if !result.reject_5pct {
            offenders.push(name.to_string());
        }
        adf.push((name.to_string(), result));
    }
    if !offenders.is_empty() {
        match gate {
            StationarityGate::Enforce => return Err(Error::Stationarity { offenders }),
            StationarityGate::Warn => warnings.extend(offenders.iter().map(|o| {
                Warning::new(crate::WarningCode::NonStationary, o.clone(), None, "feature failed the 5% ADF test")
            })),
        }
    }
    Ok(FeatureSet { frame, adf, warnings })
}
