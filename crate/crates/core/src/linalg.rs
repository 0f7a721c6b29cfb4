//! Least-squares helpers shared by the estimators.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest Cholesky pivot, relative to the largest, accepted as non-singular.
const PIVOT_TOL: f64 = 1e-8;

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = cholesky_checked(a)?;
    Ok(chol.inverse())
}

pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(cholesky_checked(a)?.solve(b))
}

fn cholesky_checked(a: &DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("normal equations are not positive definite".into()))?;
    let l = chol.l_dirty();
    let diag: Vec<f64> = (0..a.nrows()).map(|i| l[(i, i)]).collect();
    let max = diag.iter().copied().fold(0.0f64, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if a.nrows() > 0 && !(min > max * PIVOT_TOL) {
        return Err(Error::Singular("regressors are (numerically) collinear".into()));
    }
    Ok(chol)
}

/// Ordinary least squares fit of `y` on the columns of `x`.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coef: DVector<f64>,
    pub rss: f64,
    pub nobs: usize,
    /// `(XᵀX)⁻¹`
    pub xtx_inv: DMatrix<f64>,
}

impl OlsFit {
    pub fn dof(&self) -> usize {
        self.nobs.saturating_sub(self.coef.len())
    }

    pub fn sigma2(&self) -> f64 {
        self.rss / self.dof().max(1) as f64
    }

    pub fn std_err(&self, i: usize) -> f64 {
        (self.sigma2() * self.xtx_inv[(i, i)]).sqrt()
    }

    pub fn t_stat(&self, i: usize) -> f64 {
        self.coef[i] / self.std_err(i)
    }

    /// Gaussian log-likelihood at the MLE variance.
    pub fn log_likelihood(&self) -> f64 {
        let n = self.nobs as f64;
        -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + (self.rss / n).ln() + 1.0)
    }

    pub fn aic(&self) -> f64 {
        -2.0 * self.log_likelihood() + 2.0 * self.coef.len() as f64
    }
}

pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    if x.nrows() != y.len() {
        return Err(Error::Length(format!("design has {} rows, response {}", x.nrows(), y.len())));
    }
    if x.nrows() < x.ncols() {
        return Err(Error::Length(format!("{} observations for {} regressors", x.nrows(), x.ncols())));
    }
    let xt = x.transpose();
    let xtx = &xt * x;
    let xty = &xt * y;
    let xtx_inv = spd_inverse(&xtx)?;
    let coef = &xtx_inv * &xty;
    let resid = y - x * &coef;
    Ok(OlsFit { coef, rss: resid.norm_squared(), nobs: x.nrows(), xtx_inv })
}

/// Cross-products of a design against itself and a response, so nested
/// models that use the leading columns can be solved without re-scanning data.
#[derive(Debug, Clone)]
pub struct CrossProducts {
    pub xtx: DMatrix<f64>,
    pub xty: DVector<f64>,
    pub yty: f64,
    pub nobs: usize,
}

impl CrossProducts {
    pub fn new(x: &DMatrix<f64>, y: &DVector<f64>) -> Self {
        let xt = x.transpose();
        CrossProducts { xtx: &xt * x, xty: &xt * y, yty: y.norm_squared(), nobs: x.nrows() }
    }

    /// OLS on the first `k` columns.
    pub fn fit_leading(&self, k: usize) -> Result<OlsFit> {
        let xtx = self.xtx.view((0, 0), (k, k)).into_owned();
        let xty = self.xty.rows(0, k).into_owned();
        let xtx_inv = spd_inverse(&xtx)?;
        let coef = &xtx_inv * &xty;
        let rss = (self.yty - coef.dot(&xty)).max(0.0);
        Ok(OlsFit { coef, rss, nobs: self.nobs, xtx_inv })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_recovered() {
        let x = DMatrix::from_fn(10, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y = DVector::from_fn(10, |i, _| 2.0 + 3.0 * i as f64);
        let fit = ols(&x, &y).unwrap();
        assert!((fit.coef[0] - 2.0).abs() < 1e-10 && (fit.coef[1] - 3.0).abs() < 1e-10);
        assert!(fit.rss < 1e-18);
    }

    #[test]
    fn collinear_columns_are_singular() {
        let x = DMatrix::from_fn(10, 2, |i, _| i as f64 + 1.0);
        let y = DVector::from_element(10, 1.0);
        assert!(matches!(ols(&x, &y), Err(Error::Singular(_))));
    }

    #[test]
    fn leading_fit_matches_direct() {
        let x = DMatrix::from_fn(30, 3, |i, j| ((i * (j + 2)) as f64).sin() + j as f64);
        let y = DVector::from_fn(30, |i, _| (i as f64).cos());
        let cp = CrossProducts::new(&x, &y);
        let sub = x.columns(0, 2).into_owned();
        let direct = ols(&sub, &y).unwrap();
        let nested = cp.fit_leading(2).unwrap();
        assert!((direct.coef - nested.coef).amax() < 1e-10);
        assert!((direct.rss - nested.rss).abs() < 1e-9);
    }
}
