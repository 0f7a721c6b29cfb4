//! Error-correction model on a cointegration spread. With the spread `z` and
//! `Δz[t] = α·z[t−1] + ε`, the model is an AR(1) with `φ = 1 + α`.

use serde::Serialize;

use super::{not_fitted, Context, FitReport, ForecastSet, Forecaster, ForecasterMeta, TrainSet};
use crate::error::{Error, Result, Warning, WarningCode};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcmModel {
    pub phi: f64,
    /// Adjustment speed `φ − 1`.
    pub alpha: f64,
    pub intercept: f64,
    pub nobs: usize,
    pub warnings: Vec<Warning>,
}

impl EcmModel {
    pub fn step(&self, z: f64) -> f64 {
        self.intercept + self.phi * z
    }

    /// `ln 0.5 / ln φ` in days; `None` unless `0 < φ < 1`.
    pub fn half_life(&self) -> Option<f64> {
        (self.phi > 0.0 && self.phi < 1.0).then(|| 0.5f64.ln() / self.phi.ln())
    }
}

/// OLS of `z[t]` on `z[t−1]`, optionally with an intercept.
pub fn ecm_fit(spread: &[f64], intercept: bool) -> Result<EcmModel> {
    if spread.len() < 3 {
        return Err(Error::Length(format!("ECM needs at least 3 observations, got {}", spread.len())));
    }
    if spread.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("spread contains non-finite values".into()));
    }
    let (lag, cur) = (&spread[..spread.len() - 1], &spread[1..]);
    let n = lag.len() as f64;
    let (phi, c) = if intercept {
        let (ml, mc) = (lag.iter().sum::<f64>() / n, cur.iter().sum::<f64>() / n);
        let sxx: f64 = lag.iter().map(|l| (l - ml).powi(2)).sum();
        let sxy: f64 = lag.iter().zip(cur).map(|(l, c)| (l - ml) * (c - mc)).sum();
        if !(sxx > 0.0) {
            return Err(Error::Singular("spread is constant".into()));
        }
        let phi = sxy / sxx;
        (phi, mc - phi * ml)
    } else {
        let sxx: f64 = lag.iter().map(|l| l * l).sum();
        if !(sxx > 0.0) {
            return Err(Error::Singular("spread is identically zero".into()));
        }
        (lag.iter().zip(cur).map(|(l, c)| l * c).sum::<f64>() / sxx, 0.0)
    };
    let mut warnings = Vec::new();
    if phi.abs() >= 1.0 {
        warnings.push(Warning::new(
            WarningCode::NonReversion,
            "spread",
            None,
            format!("estimated persistence {phi:.4} implies no mean reversion"),
        ));
    }
    Ok(EcmModel { phi, alpha: phi - 1.0, intercept: c, nobs: lag.len(), warnings })
}

/// `ẑ[t+h]` for `h = 1..=H`, iterating the one-step map from `last_spread`.
pub fn ecm_forecast(model: &EcmModel, last_spread: f64, horizon: usize) -> Vec<f64> {
    std::iter::successors(Some(model.step(last_spread)), |z| Some(model.step(*z)))
        .take(horizon)
        .collect()
}

/// ECM applied to the target channel, which must be the spread itself.
#[derive(Debug, Clone)]
pub struct EcmForecaster {
    name: String,
    intercept: bool,
    model: Option<EcmModel>,
}

impl EcmForecaster {
    pub fn new(name: impl Into<String>, intercept: bool) -> Self {
        EcmForecaster { name: name.into(), intercept, model: None }
    }

    pub fn model(&self) -> Option<&EcmModel> {
        self.model.as_ref()
    }
}

impl Forecaster for EcmForecaster {
    fn meta(&self) -> ForecasterMeta {
        ForecasterMeta { name: self.name.clone(), is_sequential: true, needs_fit: true, trained_horizons: None }
    }

    fn fit(&mut self, train: &TrainSet<'_>) -> Result<FitReport> {
        if train.kind() != crate::targets::TargetKind::Level {
            return Err(Error::Config(format!("`{}` forecasts spread levels only", self.name)));
        }
        let z = train
            .frame
            .column(super::TARGET_COLUMN)
            .ok_or_else(|| Error::Config(format!("training frame has no `{}` column", super::TARGET_COLUMN)))?;
        let model = ecm_fit(z, self.intercept)?;
        let detail = serde_json::to_value(&model).unwrap_or_default();
        self.model = Some(model);
        Ok(FitReport { loss_trace: Vec::new(), detail })
    }

    fn predict(&mut self, ctx: &Context<'_>, horizon: usize) -> Result<ForecastSet> {
        let model = self.model.as_ref().ok_or_else(|| not_fitted(&self.name))?;
        let last = *ctx.target()?.last().ok_or_else(|| Error::Length("empty forecast context".into()))?;
        ForecastSet::new(ctx.origin()?, self.name.clone(), ecm_forecast(model, last, horizon))
    }

    fn summary(&self) -> serde_json::Value {
        serde_json::json!({ "model": self.name, "intercept": self.intercept, "fit": self.model })
    }
}
