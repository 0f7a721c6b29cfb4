//! Linear and ridge regressions on a shifted (h-day-ahead) target.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{not_fitted, Context, FitReport, ForecastSet, Forecaster, ForecasterMeta, TrainSet};
use crate::error::{Error, Result};
use crate::linalg::spd_solve;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearModel {
    pub coef: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
}

impl LinearModel {
    pub fn predict(&self, row: &[f64]) -> f64 {
        linear_predict(self, row)
    }
}

/// Ordinary least squares with an intercept.
pub fn linear_fit(x: &DMatrix<f64>, y: &[f64]) -> Result<LinearModel> {
    ridge_fit(x, y, 0.0)
}

/// Minimises `‖y − Xβ − b‖² + λ‖β‖²`; the intercept `b` is not penalised.
pub fn ridge_fit(x: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<LinearModel> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Config(format!("ridge penalty must be a finite value >= 0, got {lambda}")));
    }
    let (n, k) = x.shape();
    if n != y.len() {
        return Err(Error::Length(format!("{n} feature rows for {} targets", y.len())));
    }
    if n == 0 {
        return Err(Error::Length("no training rows".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Domain("training data contains missing or non-finite values".into()));
    }
    let x_mean: DVector<f64> = DVector::from_fn(k, |j, _| x.column(j).mean());
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let xc = DMatrix::from_fn(n, k, |i, j| x[(i, j)] - x_mean[j]);
    let yc = DVector::from_fn(n, |i, _| y[i] - y_mean);
    let xt = xc.transpose();
    let mut gram = &xt * &xc;
    let rhs = &xt * &yc;
    let beta = if lambda == 0.0 {
        spd_solve(&gram, &rhs).map_err(|e| match e {
            Error::Singular(m) => Error::Singular(format!("{m}; use a ridge penalty > 0")),
            other => other,
        })?
    } else {
        for j in 0..k {
            gram[(j, j)] += lambda;
        }
        gram.cholesky()
            .ok_or_else(|| Error::Singular("ridge normal equations are not positive definite".into()))?
            .solve(&rhs)
    };
    let intercept = y_mean - beta.dot(&x_mean);
    Ok(LinearModel { coef: beta.iter().copied().collect(), intercept, lambda })
}

pub fn linear_predict(model: &LinearModel, row: &[f64]) -> f64 {
    model.intercept + model.coef.iter().zip(row).map(|(b, x)| b * x).sum::<f64>()
}

/// One ridge model per trained horizon, each regressing `y[t, h]` on the
/// feature row at `t`. Forecasts are piecewise flat: horizon `h` uses the
/// model of the smallest trained horizon at or above `h` (the largest one
/// beyond it).
#[derive(Debug, Clone)]
pub struct ShiftedRegression {
    name: String,
    lambda: f64,
    horizons: Vec<usize>,
    columns: Vec<String>,
    models: Vec<LinearModel>,
}

impl ShiftedRegression {
    pub fn new(name: impl Into<String>, lambda: f64, mut horizons: Vec<usize>) -> Result<Self> {
        horizons.sort_unstable();
        horizons.dedup();
        if horizons.is_empty() || horizons[0] == 0 {
            return Err(Error::Config("shifted regression needs trained horizons >= 1".into()));
        }
        Ok(ShiftedRegression { name: name.into(), lambda, horizons, columns: Vec::new(), models: Vec::new() })
    }

    fn model_for(&self, h: usize) -> &LinearModel {
        let i = self.horizons.iter().position(|&t| t >= h).unwrap_or(self.horizons.len() - 1);
        &self.models[i]
    }
}

impl Forecaster for ShiftedRegression {
    fn meta(&self) -> ForecasterMeta {
        ForecasterMeta {
            name: self.name.clone(),
            is_sequential: false,
            needs_fit: true,
            trained_horizons: Some(self.horizons.clone()),
        }
    }

    fn fit(&mut self, train: &TrainSet<'_>) -> Result<FitReport> {
        if let Some(&h) = self.horizons.iter().find(|&&h| h > train.horizon()) {
            return Err(Error::Config(format!("trained horizon {h} exceeds target horizon {}", train.horizon())));
        }
        self.columns = train.frame.column_names().iter().map(|s| s.to_string()).collect();
        let width = self.columns.len();
        let rows = train.origin_rows.len();
        let x = DMatrix::from_fn(rows, width, |i, j| train.frame.column_at(j)[train.origin_rows[i]]);
        self.models = self
            .horizons
            .iter()
            .map(|&h| {
                let y: Vec<f64> = (0..rows).map(|i| train.targets.get(train.target_rows.start + i, h)).collect();
                ridge_fit(&x, &y, self.lambda)
            })
            .collect::<Result<_>>()?;
        Ok(FitReport::default())
    }

    fn predict(&mut self, ctx: &Context<'_>, horizon: usize) -> Result<ForecastSet> {
        if self.models.is_empty() {
            return Err(not_fitted(&self.name));
        }
        let last = ctx.history.len().checked_sub(1).ok_or_else(|| Error::Length("empty forecast context".into()))?;
        let row = self
            .columns
            .iter()
            .map(|c| {
                ctx.history
                    .column(c)
                    .map(|v| v[last])
                    .ok_or_else(|| Error::Config(format!("context is missing feature `{c}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let values = (1..=horizon).map(|h| self.model_for(h).predict(&row)).collect();
        ForecastSet::new(ctx.origin()?, self.name.clone(), values)
    }

    fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "model": self.name,
            "lambda": self.lambda,
            "features": self.columns,
            "horizons": self.horizons,
            "fits": self.models,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_relation_recovered() {
        let x = DMatrix::from_fn(20, 1, |i, _| i as f64 * 0.5 - 3.0);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let m = linear_fit(&x, &y).unwrap();
        assert!((m.coef[0] - 3.0).abs() < 1e-10 && m.intercept.abs() < 1e-10);
        assert!((linear_predict(&m, &[2.0]) - 6.0).abs() < 1e-10);
    }

    #[test]
    fn large_penalty_predicts_mean() {
        let x = DMatrix::from_fn(30, 2, |i, j| ((i + 3 * j) as f64).sin());
        let y: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).cos() + 2.0).collect();
        let m = ridge_fit(&x, &y, 1e14).unwrap();
        let mean = y.iter().sum::<f64>() / 30.0;
        assert!(m.coef.iter().all(|b| b.abs() < 1e-10));
        assert!((m.predict(&[0.4, -0.2]) - mean).abs() < 1e-9);
    }

    #[test]
    fn collinear_ols_is_singular_but_ridge_is_not() {
        let x = DMatrix::from_fn(10, 2, |i, _| i as f64);
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert!(matches!(linear_fit(&x, &y), Err(Error::Singular(_))));
        assert!(ridge_fit(&x, &y, 0.5).is_ok());
        assert!(matches!(ridge_fit(&x, &y, -1.0), Err(Error::Config(_))));
    }
}
