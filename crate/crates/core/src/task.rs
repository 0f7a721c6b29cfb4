//! Forecasting tasks: feature recipes, target construction, horizons and the
//! naive baseline, plus the built-in bond-yield, FX-volatility and
//! equity-spread tasks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::features::{
    build_features, AdfResult, FeatureRecipe, FeatureSource, Observability, SeriesRef, StationarityGate,
};
use crate::features::volatility::OhlcColumns;
use crate::forecast::{NaiveRule, TARGET_COLUMN};
use crate::series::transforms::{log_diff, pct_change};
use crate::series::{align, Frame, TransformSpec};
use crate::targets::{
    cumulative_pct_change_target, engle_granger, level_target_matrix, log_realized_vol_target, log_spread,
    standardized_spread_target, CointResult, TargetMatrix,
};

/// How the target channel and the target matrix are derived from raw columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetRecipe {
    /// Cumulative percentage change of a level series; the channel is the
    /// daily percentage change.
    CumulativePctChange { series: String },
    /// Future log annualised realised volatility of a price's log returns.
    LogRealizedVol {
        price: String,
        #[serde(default = "month")]
        window: usize,
    },
    /// Future rolling-standardised log spread `ln a − ln b`.
    StandardizedSpread {
        a: String,
        b: String,
        #[serde(default = "two_months")]
        window: usize,
    },
    /// Future value of a column.
    Level { series: String },
}

fn month() -> usize {
    21
}

fn two_months() -> usize {
    42
}

impl TargetRecipe {
    pub fn columns(&self) -> Vec<&str> {
        match self {
            TargetRecipe::CumulativePctChange { series } | TargetRecipe::Level { series } => vec![series.as_str()],
            TargetRecipe::LogRealizedVol { price, .. } => vec![price.as_str()],
            TargetRecipe::StandardizedSpread { a, b, .. } => vec![a.as_str(), b.as_str()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub id: String,
    pub features: Vec<FeatureRecipe>,
    pub target: TargetRecipe,
    /// Largest forecast horizon in business days.
    pub horizon: usize,
    /// Horizons reported as headline numbers.
    pub headline: Vec<usize>,
    pub naive: NaiveRule,
    #[serde(default = "enforce")]
    pub gate: StationarityGate,
}

fn enforce() -> StationarityGate {
    StationarityGate::Enforce
}

impl TaskSpec {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config(format!("task `{}` needs a horizon >= 1", self.id)));
        }
        if self.headline.is_empty() || self.headline.iter().any(|&h| h == 0 || h > self.horizon) {
            return Err(Error::Config(format!(
                "task `{}` headline horizons {:?} must lie in 1..={}",
                self.id, self.headline, self.horizon
            )));
        }
        self.naive.validate(self.horizon)?;
        let mut names: Vec<&str> = self.features.iter().map(|f| f.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate feature name `{}`", w[0])));
        }
        if names.contains(&TARGET_COLUMN) {
            return Err(Error::Config(format!("`{TARGET_COLUMN}` is reserved for the target channel")));
        }
        self.features.iter().try_for_each(FeatureRecipe::validate)
    }

    /// Every raw column the task reads.
    pub fn required_columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self
            .features
            .iter()
            .flat_map(|f| f.source.columns())
            .chain(self.target.columns())
            .map(str::to_string)
            .collect();
        cols.sort();
        cols.dedup();
        cols
    }

    pub fn builtin(id: &str) -> Result<TaskSpec> {
        match id {
            "bond_yield" => Ok(bond_yield()),
            "fx_vol" => Ok(fx_vol()),
            "equity_spread" => Ok(equity_spread()),
            "ar1" => Ok(ar1()),
            other => Err(Error::Config(format!(
                "unknown task `{other}`; expected bond_yield, fx_vol, equity_spread or ar1"
            ))),
        }
    }
}

/// The model-ready panel of a task: the target channel in
/// [`TARGET_COLUMN`] followed by the features, and the target matrix aligned
/// so that row `i` of both refers to the same origin date.
#[derive(Debug, Clone)]
pub struct TaskData {
    pub spec: TaskSpec,
    pub frame: Frame,
    pub targets: TargetMatrix,
    pub observable: Vec<String>,
    pub adf: Vec<(String, AdfResult)>,
    pub coint: Option<CointResult>,
    pub warnings: Vec<Warning>,
}

impl TaskData {
    pub fn build(spec: &TaskSpec, raw: &Frame) -> Result<TaskData> {
        spec.validate()?;
        if let Some(missing) = spec.target.columns().into_iter().find(|c| !raw.has_column(c)) {
            return Err(Error::Config(format!("task `{}` target needs missing column `{missing}`", spec.id)));
        }
        let mut warnings = Vec::new();
        let mut coint = None;
        let (channel, targets) = match &spec.target {
            TargetRecipe::CumulativePctChange { series } => {
                let levels = raw.series(series)?;
                (pct_change(&levels)?, cumulative_pct_change_target(&levels, spec.horizon)?)
            }
            TargetRecipe::LogRealizedVol { price, window } => {
                let lv = log_realized_vol_target(&log_diff(&raw.series(price)?)?, *window)?;
                let m = level_target_matrix(&lv, spec.horizon)?;
                (lv, m)
            }
            TargetRecipe::StandardizedSpread { a, b, window } => {
                let (pa, pb) = (raw.series(a)?, raw.series(b)?);
                log_spread(&pa, &pb)?;
                let (la, lb) = (pa.map(f64::ln), pb.map(f64::ln));
                let eg = engle_granger(&lb.values, &la.values)?;
                warnings.extend(eg.warning(&format!("{a}/{b}")));
                coint = Some(eg);
                let (z, w) = standardized_spread_target(&pa, &pb, *window)?;
                warnings.extend(w);
                let m = level_target_matrix(&z, spec.horizon)?;
                (z, m)
            }
            TargetRecipe::Level { series } => {
                let s = raw.series(series)?;
                let m = level_target_matrix(&s, spec.horizon)?;
                (s, m)
            }
        };
        let channel = Frame::from_series(&[channel.renamed(TARGET_COLUMN)])?;
        let features = build_features(&spec.features, raw, spec.gate)?;
        warnings.extend(features.warnings);
        let frame = if features.frame.is_empty() { channel } else { align(&[channel, features.frame], 0)? };
        let targets = targets.from_origin(frame.dates()[0]);
        if targets.origins().iter().zip(frame.dates()).any(|(a, b)| a != b) {
            return Err(Error::Alignment("target origins do not follow the feature calendar".into()));
        }
        let observable = spec
            .features
            .iter()
            .filter(|f| f.observability == Observability::Observable)
            .map(|f| f.name.clone())
            .collect();
        Ok(TaskData { spec: spec.clone(), frame, targets, observable, adf: features.adf, coint, warnings })
    }

    /// Number of leading frame rows that are valid forecast origins.
    pub fn n_origins(&self) -> usize {
        self.targets.len()
    }
}

fn column(name: &str) -> FeatureSource {
    FeatureSource::column(name)
}

fn recipe(name: &str, source: FeatureSource, transforms: Vec<TransformSpec>) -> FeatureRecipe {
    FeatureRecipe::new(name, source, transforms)
}

fn standardise() -> Vec<TransformSpec> {
    vec![TransformSpec::RollingStandardise { window: 252 }]
}

fn diff() -> Vec<TransformSpec> {
    vec![TransformSpec::Difference { lag: 1 }]
}

fn none() -> Vec<TransformSpec> {
    vec![TransformSpec::None]
}

fn zscore_of_log_diff(window: usize) -> Vec<TransformSpec> {
    vec![TransformSpec::LogDiff, TransformSpec::RollingZscore { window }]
}

fn vol_transform() -> Vec<TransformSpec> {
    vec![TransformSpec::VolTransform { window: 126 }]
}

/// Macro columns shared by the bond-yield and equity-spread tasks.
pub const GROWTH_MACRO: [&str; 5] =
    ["rgdp_growth", "intuitive_gdp", "employment_growth", "unemployment_rate", "cpi_momentum"];

/// US 10-year yield change over 21 business days.
pub fn bond_yield() -> TaskSpec {
    let mut features: Vec<FeatureRecipe> = GROWTH_MACRO
        .iter()
        .chain(&["infl_exp_1y", "infl_exp_5y"])
        .map(|c| recipe(c, column(c), standardise()))
        .collect();
    features.extend([
        recipe("m2", column("m2"), vec![TransformSpec::PctChange]),
        recipe("vix", column("vix"), zscore_of_log_diff(20)),
        recipe("move", column("move"), zscore_of_log_diff(20)),
        recipe("spx", column("spx"), vec![TransformSpec::PctChange, TransformSpec::Ewma { span: None, half_life: Some(5.0) }]),
        recipe("ust_1m", column("ust_1m"), diff()),
        recipe("ust_2y", column("ust_2y"), diff()),
        recipe("ust_10y", column("ust_10y"), diff()),
        recipe(
            "slope_5y_2y",
            FeatureSource::Series { of: SeriesRef::Spread { spread: ["ust_5y".into(), "ust_2y".into()] } },
            diff(),
        ),
        recipe(
            "ust_10y_ma_divergence",
            FeatureSource::MaDivergence { of: SeriesRef::Column("ust_10y".into()), short_span: 5.0, long_span: 20.0 },
            none(),
        ),
        recipe(
            "ust_10y_bollinger",
            FeatureSource::Bollinger { of: SeriesRef::Column("ust_10y".into()), window: 20, width: 2.0 },
            none(),
        ),
        recipe("ust_10y_ema_vol", FeatureSource::EmaVol { of: SeriesRef::Column("ust_10y".into()), span: 20.0 }, none()),
    ]);
    TaskSpec {
        id: "bond_yield".into(),
        features,
        target: TargetRecipe::CumulativePctChange { series: "ust_10y".into() },
        horizon: 21,
        headline: vec![21],
        naive: NaiveRule::Zero,
        gate: StationarityGate::Enforce,
    }
}

pub const FX_OHLC: [&str; 4] = ["eurusd_open", "eurusd_high", "eurusd_low", "eurusd_close"];

/// EUR/USD log realised volatility 21 business days ahead.
pub fn fx_vol() -> TaskSpec {
    let close = "eurusd_close".to_string();
    let spread = |m: &str| {
        recipe(
            &format!("spread_{m}"),
            FeatureSource::Series { of: SeriesRef::Spread { spread: [format!("eur_{m}"), format!("usd_{m}")] } },
            diff(),
        )
    };
    let pc1 = |ccy: &str| {
        recipe(
            &format!("{ccy}_pc1"),
            FeatureSource::Pc1 { columns: ["3m", "2y", "10y"].iter().map(|m| format!("{ccy}_{m}")).collect(), min_periods: 252 },
            diff(),
        )
    };
    let features = vec![
        recipe("ewma_vol", FeatureSource::EwmaVol { price: close.clone(), span: 10.0 }, vol_transform()),
        recipe("mean_abs_return", FeatureSource::MeanAbsReturn { price: close.clone(), window: 5 }, vol_transform()),
        recipe(
            "garman_klass_vol",
            FeatureSource::GarmanKlass {
                ohlc: OhlcColumns {
                    open: FX_OHLC[0].into(),
                    high: FX_OHLC[1].into(),
                    low: FX_OHLC[2].into(),
                    close: FX_OHLC[3].into(),
                },
                window: 5,
            },
            vol_transform(),
        ),
        recipe("long_term_vol", FeatureSource::RealizedVol { price: close.clone(), window: 21 }, vol_transform()),
        recipe("vol_ratio", FeatureSource::VolRatio { price: close.clone(), short: 5, long: 21 }, none()),
        recipe("vix", column("vix"), zscore_of_log_diff(50)),
        recipe("move", column("move"), zscore_of_log_diff(50)),
        spread("3m"),
        spread("2y"),
        spread("10y"),
        pc1("usd"),
        pc1("eur"),
        recipe("meetings", column("meetings"), none()).observable(),
    ];
    TaskSpec {
        id: "fx_vol".into(),
        features,
        target: TargetRecipe::LogRealizedVol { price: close, window: 21 },
        horizon: 21,
        headline: vec![21],
        naive: NaiveRule::Last,
        gate: StationarityGate::Enforce,
    }
}

pub const SPREAD_MACRO_RAW: [&str; 6] =
    ["real_rate_short", "real_rate_short_bw", "real_5y_irs", "real_5y_irs_bw", "debt_to_gdp", "current_account"];

/// Standardised EWA/EWC log-price spread 10 business days ahead.
pub fn equity_spread() -> TaskSpec {
    let pair = || SeriesRef::Ratio { ratio: ["ewa".into(), "ewc".into()] };
    let mut features: Vec<FeatureRecipe> = GROWTH_MACRO.iter().map(|c| recipe(c, column(c), standardise())).collect();
    features.push(recipe("hh_infl_exp", column("hh_infl_exp"), vec![TransformSpec::RollingZscore { window: 252 }]));
    features.extend(SPREAD_MACRO_RAW.iter().map(|c| recipe(c, column(c), none())));
    features.extend([
        recipe("spread_bollinger", FeatureSource::Bollinger { of: pair(), window: 20, width: 2.0 }, none()),
        recipe(
            "spread_ma_divergence",
            FeatureSource::MaDivergence { of: pair(), short_span: 5.0, long_span: 20.0 },
            none(),
        ),
        recipe(
            "spread_drawdown",
            FeatureSource::Drawdown { of: pair(), peak_window: 63 },
            vec![TransformSpec::RollingZscore { window: 63 }],
        ),
    ]);
    TaskSpec {
        id: "equity_spread".into(),
        features,
        target: TargetRecipe::StandardizedSpread { a: "ewa".into(), b: "ewc".into(), window: 42 },
        horizon: 10,
        headline: vec![5, 10],
        naive: NaiveRule::switch_to_zero_after(5),
        gate: StationarityGate::Enforce,
    }
}

/// A single mean-reverting level forecast 10 days ahead from its own history.
pub fn ar1() -> TaskSpec {
    TaskSpec {
        id: "ar1".into(),
        features: Vec::new(),
        target: TargetRecipe::Level { series: "z".into() },
        horizon: 10,
        headline: vec![10],
        naive: NaiveRule::Last,
        gate: StationarityGate::Enforce,
    }
}
