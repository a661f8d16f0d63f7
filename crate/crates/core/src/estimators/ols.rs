use super::EstimatorSpec;
use crate::error::{Error, Result};

/// Least-squares fit in which columns that are (numerically) linear
/// combinations of earlier columns are dropped, left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// One entry per design column; `None` for dropped columns.
    pub coefficients: Vec<Option<f64>>,
    /// Indices of the retained design columns.
    pub kept: Vec<usize>,
    pub residuals: Vec<f64>,
}

// Relative residual norm below which a column counts as dependent.
const RANK_TOL: f64 = 1e-9;

/// Fits `y ≈ X β` with `X` given column-major. Uses modified Gram–Schmidt;
/// a column whose residual after projecting out the kept columns is tiny
/// relative to its own norm is dropped.
pub fn ols_fit(design: &[Vec<f64>], y: &[f64]) -> Result<OlsFit> {
    let n = y.len();
    if design.iter().any(|c| c.len() != n) {
        return Err(Error::domain("design columns and response differ in length"));
    }
    let mut q: Vec<Vec<f64>> = Vec::new();
    // r[j] holds the coefficients of kept column j against q[0..=j].
    let mut r: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for (j, col) in design.iter().enumerate() {
        let norm0 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = col.clone();
        let mut coeffs = Vec::with_capacity(q.len() + 1);
        for qk in &q {
            let c: f64 = qk.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(qk) {
                *vi -= c * qi;
            }
            coeffs.push(c);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 || norm <= RANK_TOL * norm0 || q.len() == n {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        coeffs.push(norm);
        q.push(v);
        r.push(coeffs);
        kept.push(j);
    }

    // Solve R β = Qᵀ y by back substitution.
    let qty: Vec<f64> = q.iter().map(|qk| qk.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    let p = kept.len();
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = qty[i];
        for k in i + 1..p {
            s -= r[k][i] * beta[k];
        }
        beta[i] = s / r[i][i];
    }

    let mut residuals = y.to_vec();
    for (b, &j) in beta.iter().zip(&kept) {
        for (e, x) in residuals.iter_mut().zip(&design[j]) {
            *e -= b * x;
        }
    }
    let mut coefficients = vec![None; design.len()];
    for (b, &j) in beta.iter().zip(&kept) {
        coefficients[j] = Some(*b);
    }
    Ok(OlsFit {
        coefficients,
        kept,
        residuals,
    })
}

/// Coefficient `target_coefficient` of the least-squares fit of the response
/// on the covariates; index 0 is the intercept when `intercept` is set.
pub fn ols_estimator(target_coefficient: usize, intercept: bool) -> EstimatorSpec {
    let name = format!("ols:{target_coefficient}");
    let err_name = name.clone();
    EstimatorSpec::new(name, 1, 2, move |view, _| {
        let y = view.response()?;
        let mut design = Vec::new();
        if intercept {
            design.push(vec![1.0; y.len()]);
        }
        for &j in view.covariate_indices() {
            design.push(view.column(j).collect());
        }
        if target_coefficient >= design.len() {
            return Err(Error::estimator(
                &err_name,
                format!("coefficient {target_coefficient} out of range for {} design columns", design.len()),
            ));
        }
        let fit = ols_fit(&design, &y)?;
        fit.coefficients[target_coefficient]
            .map(|b| vec![b])
            .ok_or_else(|| Error::estimator(&err_name, "target coefficient is not identifiable on this split"))
    })
    .with_delta(0.0)
}
