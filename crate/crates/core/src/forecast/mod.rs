//! The forecaster contract shared by native baselines and external adapters.

mod ecm;
mod linear;
mod naive;
mod var;

use chrono::NaiveDate;
use serde::Serialize;

pub use ecm::{ecm_fit, ecm_forecast, EcmForecaster, EcmModel};
pub use linear::{linear_fit, linear_predict, ridge_fit, LinearModel, ShiftedRegression};
pub use naive::{naive_horizon_rule, naive_last, naive_zero, HorizonAction, NaiveForecaster, NaiveRule, RuleEntry};
pub use var::{var_fit, var_forecast, LagSelection, VarForecaster, VarModel};

use crate::error::{Error, Result};
use crate::series::FrameView;
use crate::targets::{TargetKind, TargetMatrix};

/// Column holding the target channel in every task frame.
pub const TARGET_COLUMN: &str = "target";

/// Multi-horizon point forecast made at one origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastSet {
    pub origin: NaiveDate,
    pub model: String,
    /// Values for horizons `1..=H`.
    pub values: Vec<f64>,
}

impl ForecastSet {
    pub fn new(origin: NaiveDate, model: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Model(format!("non-finite forecast value {v}")));
        }
        Ok(ForecastSet { origin, model: model.into(), values })
    }

    pub fn horizon(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecasterMeta {
    pub name: String,
    /// Trained on target sequences (as opposed to a shifted single-step target).
    pub is_sequential: bool,
    pub needs_fit: bool,
    /// Horizons a single-step model was trained for; only these are scored.
    pub trained_horizons: Option<Vec<usize>>,
}

/// Training window handed to [`Forecaster::fit`]. `targets` only holds origins
/// whose whole horizon ends inside the window.
#[derive(Debug, Clone)]
pub struct TrainSet<'a> {
    pub frame: FrameView<'a>,
    pub targets: &'a TargetMatrix,
    /// Index range of `targets` rows usable for training.
    pub target_rows: std::ops::Range<usize>,
    /// Row in `frame` of each usable target origin, in the same order.
    pub origin_rows: Vec<usize>,
    pub observable: &'a [String],
    pub seed: u64,
}

impl TrainSet<'_> {
    pub fn kind(&self) -> TargetKind {
        self.targets.kind
    }

    pub fn horizon(&self) -> usize {
        self.targets.horizon()
    }
}

/// Information available at a forecast origin: everything up to and including
/// the origin row, plus (for adapters that accept them) future values of
/// observable columns.
#[derive(Debug, Clone)]
pub struct Context<'a> {
    pub history: FrameView<'a>,
    pub future_observable: Option<FrameView<'a>>,
    pub observable: &'a [String],
}

impl<'a> Context<'a> {
    pub fn origin(&self) -> Result<NaiveDate> {
        self.history.last_date().ok_or_else(|| Error::Length("empty forecast context".into()))
    }

    pub fn target(&self) -> Result<&'a [f64]> {
        self.history
            .column(TARGET_COLUMN)
            .ok_or_else(|| Error::Config(format!("context has no `{TARGET_COLUMN}` column")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FitReport {
    pub loss_trace: Vec<f64>,
    pub detail: serde_json::Value,
}

pub trait Forecaster: Send {
    fn meta(&self) -> ForecasterMeta;

    fn fit(&mut self, train: &TrainSet<'_>) -> Result<FitReport>;

    fn predict(&mut self, context: &Context<'_>, horizon: usize) -> Result<ForecastSet>;

    /// Coefficients and settings for report provenance.
    fn summary(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
}

/// Converts an iterated path of the target channel into target values: the
/// compounded change for change targets, the path itself for level targets.
pub fn path_to_target(kind: TargetKind, path: &[f64]) -> Vec<f64> {
    match kind {
        TargetKind::Level => path.to_vec(),
        TargetKind::Change => path
            .iter()
            .scan(1.0, |acc, r| {
                *acc *= 1.0 + r;
                Some(*acc - 1.0)
            })
            .collect(),
    }
}

pub(crate) fn not_fitted(name: &str) -> Error {
    Error::Model(format!("`{name}` must be fitted before predict"))
}
