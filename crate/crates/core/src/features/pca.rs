//! First principal component ("level" factor) of a yield-curve panel.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::series::{Frame, Series};

#[derive(Debug, Clone)]
pub struct Pc1 {
    pub scores: Series,
    /// Unit-length loading vector, signed so that its mean is positive.
    pub loadings: Vec<f64>,
    /// Share of total variance carried by the first component.
    pub explained: f64,
}

fn validate(panel: &Frame) -> Result<()> {
    if panel.width() < 2 {
        return Err(Error::Config(format!("pc1 needs at least 2 maturity columns, got {}", panel.width())));
    }
    if panel.has_missing() {
        return Err(Error::Domain("pc1 panel contains missing values".into()));
    }
    Ok(())
}

/// Largest eigenpair of a symmetric matrix, with the sign convention applied.
fn leading_eigen(cov: DMatrix<f64>) -> Result<(f64, DVector<f64>, f64)> {
    let total = cov.trace();
    if !(total > 0.0) {
        return Err(Error::Degenerate("yield panel has zero variance".into()));
    }
    let eig = SymmetricEigen::new(cov);
    let (idx, lambda) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let mut v = eig.eigenvectors.column(idx).into_owned();
    if v.sum() < 0.0 {
        v.neg_mut();
    }
    Ok((lambda, v, total))
}

/// Covariance PCA over the whole panel.
pub fn pc1(panel: &Frame) -> Result<Pc1> {
    validate(panel)?;
    let (n, k) = (panel.len(), panel.width());
    if n < 2 {
        return Err(Error::Length("pc1 needs at least 2 rows".into()));
    }
    let mut x = DMatrix::from_fn(n, k, |i, j| panel.column_at(j)[i]);
    for j in 0..k {
        let mean = x.column(j).mean();
        x.column_mut(j).add_scalar_mut(-mean);
    }
    let cov = (x.transpose() * &x) / (n as f64 - 1.0);
    let (lambda, v, total) = leading_eigen(cov)?;
    let scores = &x * &v;
    Ok(Pc1 {
        scores: Series::new("pc1", panel.dates().to_vec(), scores.iter().copied().collect()),
        loadings: v.iter().copied().collect(),
        explained: lambda / total,
    })
}

/// Causal variant: at each date the loadings and means come only from rows up
/// to and including that date. The first `min_periods − 1` rows are dropped.
pub fn pc1_expanding(panel: &Frame, min_periods: usize) -> Result<Series> {
    validate(panel)?;
    let (n, k) = (panel.len(), panel.width());
    let min_periods = min_periods.max(k + 1);
    if n < min_periods {
        return Err(Error::Length(format!("expanding pc1 needs {min_periods} rows, got {n}")));
    }
    let mut sum = DVector::<f64>::zeros(k);
    let mut cross = DMatrix::<f64>::zeros(k, k);
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for t in 0..n {
        let row = DVector::from_fn(k, |j, _| panel.column_at(j)[t]);
        sum += &row;
        cross += &row * row.transpose();
        let m = (t + 1) as f64;
        if t + 1 < min_periods {
            continue;
        }
        let mean = &sum / m;
        let cov = (&cross - &mean * mean.transpose() * m) / (m - 1.0);
        let (_, v, _) = leading_eigen(cov)?;
        dates.push(panel.dates()[t]);
        values.push((&row - &mean).dot(&v));
    }
    Ok(Series::new("pc1", dates, values))
}
