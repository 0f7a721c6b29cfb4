//! Augmented Dickey–Fuller unit-root test with MacKinnon (2010)
//! response-surface critical values.
//!
//! The regression is `Δx[t] = c (+ β·t) + γ·x[t−1] + Σ φ_i·Δx[t−i] + ε`.
//! The lag order is picked by AIC over `0..=max_lag` on a common sample, then
//! the chosen model is refit on every usable observation. The statistic is
//! the t-ratio of `γ`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CrossProducts;

/// Deterministic terms in the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfRegression {
    /// No deterministic terms (used on cointegration residuals).
    NoConstant,
    Constant,
    ConstantTrend,
}

impl AdfRegression {
    fn deterministic_terms(self) -> usize {
        match self {
            AdfRegression::NoConstant => 0,
            AdfRegression::Constant => 1,
            AdfRegression::ConstantTrend => 2,
        }
    }
}

/// Where the statistic falls relative to the 1/5/10% critical values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PValueBand {
    #[serde(rename = "p<0.01")]
    Below1,
    #[serde(rename = "0.01<=p<0.05")]
    Below5,
    #[serde(rename = "0.05<=p<0.10")]
    Below10,
    #[serde(rename = "p>=0.10")]
    Above10,
}

impl PValueBand {
    fn classify(stat: f64, crit: &[f64; 3]) -> Self {
        if stat < crit[0] {
            PValueBand::Below1
        } else if stat < crit[1] {
            PValueBand::Below5
        } else if stat < crit[2] {
            PValueBand::Below10
        } else {
            PValueBand::Above10
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub lags: usize,
    pub nobs: usize,
    /// 1%, 5% and 10% critical values at `nobs`.
    pub critical_values: [f64; 3],
    pub p_band: PValueBand,
    pub reject_5pct: bool,
}

// (b0, b1, b2, b3) per significance level 1%, 5%, 10%: crit = b0 + b1/T + b2/T² + b3/T³.
type Surface = [[f64; 4]; 3];

const TAU_NC_1: Surface = [
    [-2.56574, -2.2358, -3.627, 0.0],
    [-1.94100, -0.2686, -3.365, 31.223],
    [-1.61682, 0.2656, -2.714, 25.364],
];
const TAU_C_1: Surface = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];
const TAU_CT_1: Surface = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.380],
];
// Two-variable cointegration (Engle–Granger) surfaces.
const TAU_C_2: Surface = [
    [-3.89644, -10.9519, -33.527, 0.0],
    [-3.33613, -6.1101, -6.823, 0.0],
    [-3.04445, -4.2412, -2.720, 0.0],
];
const TAU_CT_2: Surface = [
    [-4.32762, -15.4387, -35.679, 0.0],
    [-3.78057, -9.5106, -12.074, 0.0],
    [-3.49631, -7.0815, -7.538, 21.892],
];

fn eval_surface(s: &Surface, nobs: usize) -> [f64; 3] {
    let t = nobs as f64;
    let mut out = [0.0; 3];
    for (o, b) in out.iter_mut().zip(s) {
        *o = b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t);
    }
    out
}

/// Unit-root critical values for a single series.
pub fn adf_critical_values(regression: AdfRegression, nobs: usize) -> [f64; 3] {
    let s = match regression {
        AdfRegression::NoConstant => &TAU_NC_1,
        AdfRegression::Constant => &TAU_C_1,
        AdfRegression::ConstantTrend => &TAU_CT_1,
    };
    eval_surface(s, nobs)
}

/// Critical values for the residual test of a two-variable cointegrating
/// regression that contained `deterministic` terms.
pub fn engle_granger_critical_values(deterministic: AdfRegression, nobs: usize) -> [f64; 3] {
    match deterministic {
        AdfRegression::ConstantTrend => eval_surface(&TAU_CT_2, nobs),
        _ => eval_surface(&TAU_C_2, nobs),
    }
}

/// `⌊12·(n/100)^{1/4}⌋`
pub fn schwert_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Raw output of the test regression before critical values are attached.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AdfRegressionOutput {
    pub statistic: f64,
    pub lags: usize,
    pub nobs: usize,
}

fn design(x: &[f64], dx: &[f64], regression: AdfRegression, lags: usize, start: usize) -> (DMatrix<f64>, DVector<f64>) {
    // rows index Δx[t] for t in start..dx.len(); dx[t] = x[t+1] − x[t]
    let rows = dx.len() - start;
    let ndet = regression.deterministic_terms();
    let k = 1 + ndet + lags;
    let scale = dx.len() as f64;
    let mut m = DMatrix::zeros(rows, k);
    let mut y = DVector::zeros(rows);
    for r in 0..rows {
        let t = start + r;
        y[r] = dx[t];
        m[(r, 0)] = x[t];
        if ndet >= 1 {
            m[(r, 1)] = 1.0;
        }
        if ndet == 2 {
            m[(r, 2)] = (t + 1) as f64 / scale;
        }
        for i in 1..=lags {
            m[(r, ndet + i)] = dx[t - i];
        }
    }
    (m, y)
}

pub(crate) fn adf_regression(x: &[f64], max_lag: Option<usize>, regression: AdfRegression) -> Result<AdfRegressionOutput> {
    let n = x.len();
    let max_lag = max_lag.unwrap_or_else(|| schwert_max_lag(n));
    if n <= 20 + max_lag {
        return Err(Error::Length(format!("ADF needs more than {} observations, got {n}", 20 + max_lag)));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("ADF input contains non-finite values".into()));
    }
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let ndet = regression.deterministic_terms();

    // Lag selection on the common sample that the largest model can use.
    let (m, y) = design(x, &dx, regression, max_lag, max_lag);
    let cp = CrossProducts::new(&m, &y);
    let mut best: Option<(f64, usize)> = None;
    for lags in 0..=max_lag {
        let fit = cp.fit_leading(1 + ndet + lags)?;
        let aic = fit.aic();
        if best.map_or(true, |(b, _)| aic < b) {
            best = Some((aic, lags));
        }
    }
    let lags = best.map(|(_, l)| l).unwrap_or(0);

    let (m, y) = design(x, &dx, regression, lags, lags);
    let fit = crate::linalg::ols(&m, &y)?;
    Ok(AdfRegressionOutput { statistic: fit.t_stat(0), lags, nobs: fit.nobs })
}

/// Runs the ADF test. `max_lag = None` uses the Schwert rule.
pub fn adf_test(x: &[f64], max_lag: Option<usize>, regression: AdfRegression) -> Result<AdfResult> {
    let out = adf_regression(x, max_lag, regression)?;
    let critical_values = adf_critical_values(regression, out.nobs);
    Ok(AdfResult {
        statistic: out.statistic,
        lags: out.lags,
        nobs: out.nobs,
        critical_values,
        p_band: PValueBand::classify(out.statistic, &critical_values),
        reject_5pct: out.statistic < critical_values[1],
    })
}
