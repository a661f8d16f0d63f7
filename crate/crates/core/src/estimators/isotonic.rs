use super::EstimatorSpec;
use crate::error::{Error, Result};

/// Weighted isotonic (nondecreasing) least-squares fit by pooling adjacent
/// violators.
pub fn pava(values: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if values.len() != weights.len() {
        return Err(Error::domain(format!(
            "{} values but {} weights",
            values.len(),
            weights.len()
        )));
    }
    if values.is_empty() {
        return Err(Error::domain("pava needs at least one value"));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::domain(format!("weights must be positive, got {w}")));
    }

    // Blocks of (weighted mean, total weight, length).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&y, &w) in values.iter().zip(weights) {
        let mut cur = (y, w, 1usize);
        while let Some(&(m, wt, len)) = blocks.last() {
            if m <= cur.0 {
                break;
            }
            blocks.pop();
            let total = wt + cur.1;
            cur = ((m * wt + cur.0 * cur.1) / total, total, len + cur.2);
        }
        blocks.push(cur);
    }
    let mut fit = Vec::with_capacity(values.len());
    for (m, _, len) in blocks {
        fit.extend(std::iter::repeat_n(m, len));
    }
    Ok(fit)
}

/// Fits the isotonic regression of `y` on `x` and evaluates it at `x0` as a
/// left-continuous step function: the fitted value at the largest design
/// point `≤ x0`, or the first fitted value when `x0` lies below the design.
pub fn isotonic_fit_at(x: &[f64], y: &[f64], x0: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::domain("x and y differ in length"));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    // Stable sort keeps ties in original order.
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let fit = pava(&ys, &vec![1.0; ys.len()])?;
    let below = order.partition_point(|&i| x[i] <= x0);
    Ok(fit[below.saturating_sub(1)])
}

/// Isotonic least-squares fit of the response on the first covariate,
/// evaluated at `x0`.
pub fn isotonic_at_point(x0: f64) -> EstimatorSpec {
    let name = format!("isotonic:{x0}");
    let err_name = name.clone();
    EstimatorSpec::new(name, 1, 1, move |view, _| {
        let y = view.response()?;
        let &xcol = view
            .covariate_indices()
            .first()
            .ok_or_else(|| Error::estimator(&err_name, "needs a covariate column"))?;
        let x: Vec<f64> = view.column(xcol).collect();
        Ok(vec![isotonic_fit_at(&x, &y, x0)?])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pava_examples() {
        assert_eq!(pava(&[1.0, 2.0, 3.0], &[1.0; 3]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(pava(&[3.0, 1.0, 2.0], &[1.0; 3]).unwrap(), vec![2.0, 2.0, 2.0]);
        assert_eq!(pava(&[2.0, 1.0], &[3.0, 1.0]).unwrap(), vec![1.75, 1.75]);
        assert_eq!(pava(&[4.0], &[2.0]).unwrap(), vec![4.0]);
    }

    #[test]
    fn pava_errors() {
        assert!(pava(&[1.0, 2.0], &[1.0]).is_err());
        assert!(pava(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(pava(&[], &[]).is_err());
    }

    #[test]
    fn step_evaluation() {
        assert_eq!(isotonic_fit_at(&[0.1, 0.9], &[0.0, 1.0], 0.5).unwrap(), 0.0);
        assert_eq!(isotonic_fit_at(&[0.1, 0.9], &[0.0, 1.0], 0.05).unwrap(), 0.0);
        assert_eq!(isotonic_fit_at(&[0.1, 0.9], &[0.0, 1.0], 0.95).unwrap(), 1.0);
        let grid: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
        for x0 in [0.0, 0.23, 0.5, 0.77, 0.999] {
            let got = isotonic_fit_at(&grid, &grid, x0).unwrap();
            let want = grid.iter().copied().filter(|g| *g <= x0).fold(f64::MIN, f64::max);
            assert_eq!(got, want);
        }
    }

    proptest! {
        #[test]
        fn pava_is_monotone_and_mean_preserving(
            pairs in prop::collection::vec((-10.0f64..10.0, 0.1f64..5.0), 1..60)
        ) {
            let (y, w): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let f = pava(&y, &w).unwrap();
            prop_assert!(f.windows(2).all(|p| p[0] <= p[1] + 1e-12));
            let lhs: f64 = f.iter().zip(&w).map(|(a, b)| a * b).sum();
            let rhs: f64 = y.iter().zip(&w).map(|(a, b)| a * b).sum();
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }
    }
}
