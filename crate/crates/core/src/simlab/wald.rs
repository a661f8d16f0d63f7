use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldInterval {
    pub estimate: f64,
    pub se: f64,
    pub lo: f64,
    pub hi: f64,
    pub warning: Option<String>,
}

impl WaldInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo <= theta && theta <= self.hi
    }
}

/// `z_{1 − α/2}`.
pub fn normal_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(Normal::standard().inverse_cdf(1.0 - alpha / 2.0))
}

fn interval(estimate: f64, se: f64, alpha: f64) -> Result<WaldInterval> {
    let z = normal_quantile(alpha)?;
    let warning = (se == 0.0).then(|| "estimated variance is zero; interval has zero width".to_string());
    Ok(WaldInterval {
        estimate,
        se,
        lo: estimate - z * se,
        hi: estimate + z * se,
        warning,
    })
}

/// `x̄ ± z · s / √n` with the `n − 1` sample standard deviation.
pub fn wald_mean(data: &Dataset, alpha: f64) -> Result<WaldInterval> {
    let x = data.column(data.roles().sample);
    let n = x.len();
    if n < 2 {
        return Err(Error::domain("wald interval for the mean needs n >= 2"));
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    interval(mean, (var / nf).sqrt(), alpha)
}

/// OLS with an intercept and a heteroskedasticity-robust variance
/// `(XᵀX)⁻¹ Xᵀ diag(e²) X (XᵀX)⁻¹`, without small-sample correction.
/// `coefficient` indexes the design with the intercept at 0.
pub fn wald_ols_sandwich(data: &Dataset, alpha: f64, coefficient: usize) -> Result<WaldInterval> {
    let roles = data.roles();
    let y = data.column(roles.response.ok_or_else(|| Error::Data("no response column".into()))?);
    let n = data.n_rows();
    let p = roles.covariates.len() + 1;
    if coefficient >= p {
        return Err(Error::domain(format!(
            "coefficient {coefficient} out of range for {p} parameters"
        )));
    }
    if n < p + 1 {
        return Err(Error::domain(format!("sandwich needs n >= {} rows, got {n}", p + 1)));
    }
    let x = DMatrix::from_fn(n, p, |i, j| {
        if j == 0 {
            1.0
        } else {
            data.column(roles.covariates[j - 1])[i]
        }
    });
    let yv = DVector::from_column_slice(y);
    let bread = (x.transpose() * &x)
        .try_inverse()
        .ok_or_else(|| Error::domain("design is rank deficient"))?;
    let beta = &bread * x.transpose() * &yv;
    let resid = &yv - &x * &beta;
    let mut meat = DMatrix::zeros(p, p);
    for i in 0..n {
        let row = x.row(i);
        meat += row.transpose() * row * resid[i].powi(2);
    }
    let cov = &bread * meat * &bread;
    interval(beta[coefficient], cov[(coefficient, coefficient)].max(0.0).sqrt(), alpha)
}
