//! Vector autoregression fitted equation by equation with OLS.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{not_fitted, path_to_target, Context, FitReport, ForecastSet, Forecaster, ForecasterMeta, TrainSet, TARGET_COLUMN};
use crate::error::{Error, Result};
use crate::targets::TargetKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "select", rename_all = "snake_case")]
pub enum LagSelection {
    Fixed { p: usize },
    /// Minimise `ln det Σ̂ + 2·k/T` over `p = 1..=max_p` on a common sample.
    Aic { max_p: usize },
}

impl Default for LagSelection {
    fn default() -> Self {
        LagSelection::Aic { max_p: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarModel {
    pub columns: Vec<String>,
    pub p: usize,
    /// Per-equation constants (zeros when fitted without intercept).
    pub intercept: Vec<f64>,
    /// `coefs[i]` is the N×N matrix `A_{i+1}` stored row-major.
    pub coefs: Vec<Vec<f64>>,
    pub aic: Option<f64>,
    pub nobs: usize,
}

impl VarModel {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Entry `(row, col)` of lag matrix `A_lag` (`lag` from 1).
    pub fn coef(&self, lag: usize, row: usize, col: usize) -> f64 {
        self.coefs[lag - 1][row * self.dim() + col]
    }

    fn step(&self, recent: &[Vec<f64>]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut v = self.intercept[i];
                for lag in 1..=self.p {
                    let x = &recent[recent.len() - lag];
                    for (j, xj) in x.iter().enumerate() {
                        v += self.coef(lag, i, j) * xj;
                    }
                }
                v
            })
            .collect()
    }
}

/// Rows are observations; the design for equation rows `p..T` is
/// `[1?, x[t−1], …, x[t−p]]`.
fn design(rows: &[Vec<f64>], p: usize, start: usize, intercept: bool) -> DMatrix<f64> {
    let n = rows[0].len();
    let k = usize::from(intercept) + n * p;
    DMatrix::from_fn(rows.len() - start, k, |r, c| {
        let t = start + r;
        if intercept && c == 0 {
            return 1.0;
        }
        let c = c - usize::from(intercept);
        rows[t - 1 - c / n][c % n]
    })
}

fn response(rows: &[Vec<f64>], start: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len() - start, rows[0].len(), |r, c| rows[start + r][c])
}

struct Solved {
    coef: DMatrix<f64>,
    resid: DMatrix<f64>,
}

/// Least squares through the SVD; rank-deficient designs get the
/// minimum-norm solution. Lagged technical indicators that are linear
/// filters of another feature make the design exactly rank-deficient.
fn solve(z: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<Solved> {
    let svd = z.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || !smax.is_finite() {
        return Err(Error::Singular("VAR design is zero or non-finite".into()));
    }
    let eps = smax * z.nrows().max(z.ncols()) as f64 * f64::EPSILON;
    let coef = svd.solve(y, eps).map_err(|e| Error::Singular(e.to_string()))?;
    let resid = y - z * &coef;
    Ok(Solved { coef, resid })
}

fn log_det_sigma(resid: &DMatrix<f64>) -> f64 {
    let t = resid.nrows() as f64;
    let sigma = resid.transpose() * resid / t;
    match sigma.cholesky() {
        Some(c) => 2.0 * c.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>(),
        None => f64::NEG_INFINITY,
    }
}

/// Fits a VAR on `rows` (one `Vec` of length N per date).
pub fn var_fit(columns: &[String], rows: &[Vec<f64>], selection: LagSelection, intercept: bool) -> Result<VarModel> {
    let n = columns.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Length("VAR panel rows must match the column count".into()));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Domain("VAR panel contains missing or non-finite values".into()));
    }
    let max_p = match selection {
        LagSelection::Fixed { p } | LagSelection::Aic { max_p: p } => p,
    };
    if max_p == 0 {
        return Err(Error::Config("VAR lag order must be >= 1".into()));
    }
    let k = usize::from(intercept) + n * max_p;
    if rows.len() < max_p + k + 1 {
        return Err(Error::Length(format!("{} observations for a {n}-variable VAR({max_p})", rows.len())));
    }

    let (p, aic) = match selection {
        LagSelection::Fixed { p } => (p, None),
        LagSelection::Aic { max_p } => {
            let y = response(rows, max_p);
            let t = y.nrows() as f64;
            let mut best: Option<(f64, usize)> = None;
            for p in 1..=max_p {
                let s = solve(&design(rows, p, max_p, intercept), &y)?;
                let params = (n * n * p + if intercept { n } else { 0 }) as f64;
                let aic = log_det_sigma(&s.resid) + 2.0 * params / t;
                if best.map_or(true, |(b, _)| aic < b) {
                    best = Some((aic, p));
                }
            }
            let (aic, p) = best.expect("max_p >= 1");
            (p, Some(aic))
        }
    };

    let s = solve(&design(rows, p, p, intercept), &response(rows, p))?;
    let off = usize::from(intercept);
    let intercept_vec = (0..n).map(|i| if intercept { s.coef[(0, i)] } else { 0.0 }).collect();
    let coefs = (0..p)
        .map(|lag| {
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    a[i * n + j] = s.coef[(off + lag * n + j, i)];
                }
            }
            a
        })
        .collect();
    Ok(VarModel { columns: columns.to_vec(), p, intercept: intercept_vec, coefs, aic, nobs: rows.len() - p })
}

/// Iterated forecasts for `h = 1..=H`; `recent` must hold at least `p` rows,
/// the last one being the origin.
pub fn var_forecast(model: &VarModel, recent: &[Vec<f64>], horizon: usize) -> Result<Vec<Vec<f64>>> {
    if recent.len() < model.p {
        return Err(Error::Length(format!("VAR({}) needs {} context rows, got {}", model.p, model.p, recent.len())));
    }
    let mut buf: Vec<Vec<f64>> = recent[recent.len() - model.p..].to_vec();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let next = model.step(&buf);
        buf.remove(0);
        buf.push(next.clone());
        out.push(next);
    }
    Ok(out)
}

/// VAR on the target channel plus the conditional feature columns; the
/// forecast target is derived from the iterated target-channel path.
#[derive(Debug, Clone)]
pub struct VarForecaster {
    name: String,
    selection: LagSelection,
    intercept: bool,
    columns: Option<Vec<String>>,
    kind: TargetKind,
    model: Option<VarModel>,
}

impl VarForecaster {
    /// `columns = None` uses the target and every non-observable feature.
    pub fn new(name: impl Into<String>, selection: LagSelection, intercept: bool, columns: Option<Vec<String>>) -> Self {
        VarForecaster { name: name.into(), selection, intercept, columns, kind: TargetKind::Level, model: None }
    }

    pub fn model(&self) -> Option<&VarModel> {
        self.model.as_ref()
    }
}

fn panel_rows(view: &crate::series::FrameView<'_>, columns: &[String], from: usize) -> Result<Vec<Vec<f64>>> {
    let cols = columns
        .iter()
        .map(|c| view.column(c).ok_or_else(|| Error::Config(format!("frame is missing column `{c}`"))))
        .collect::<Result<Vec<_>>>()?;
    Ok((from..view.len()).map(|t| cols.iter().map(|c| c[t]).collect()).collect())
}

impl Forecaster for VarForecaster {
    fn meta(&self) -> ForecasterMeta {
        ForecasterMeta { name: self.name.clone(), is_sequential: true, needs_fit: true, trained_horizons: None }
    }

    fn fit(&mut self, train: &TrainSet<'_>) -> Result<FitReport> {
        let columns: Vec<String> = match &self.columns {
            Some(c) => {
                let mut c = c.clone();
                if !c.iter().any(|x| x == TARGET_COLUMN) {
                    c.insert(0, TARGET_COLUMN.to_string());
                }
                c
            }
            None => std::iter::once(TARGET_COLUMN.to_string())
                .chain(
                    train
                        .frame
                        .column_names()
                        .into_iter()
                        .filter(|c| *c != TARGET_COLUMN && !train.observable.iter().any(|o| o == c))
                        .map(str::to_string),
                )
                .collect(),
        };
        let rows = panel_rows(&train.frame, &columns, 0)?;
        let model = var_fit(&columns, &rows, self.selection, self.intercept)?;
        self.kind = train.kind();
        let detail = serde_json::json!({ "p": model.p, "aic": model.aic });
        self.model = Some(model);
        Ok(FitReport { loss_trace: Vec::new(), detail })
    }

    fn predict(&mut self, ctx: &Context<'_>, horizon: usize) -> Result<ForecastSet> {
        let model = self.model.as_ref().ok_or_else(|| not_fitted(&self.name))?;
        let from = ctx.history.len().saturating_sub(model.p);
        let recent = panel_rows(&ctx.history, &model.columns, from)?;
        let path: Vec<f64> = var_forecast(model, &recent, horizon)?.into_iter().map(|r| r[0]).collect();
        ForecastSet::new(ctx.origin()?, self.name.clone(), path_to_target(self.kind, &path))
    }

    fn summary(&self) -> serde_json::Value {
        serde_json::json!({ "model": self.name, "selection": self.selection, "fit": self.model })
    }
}
