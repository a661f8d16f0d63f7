//! Estimators that can be handed to the hull constructions.
//!
//! An [`EstimatorSpec`] couples a pure procedure (a row subset plus an RNG
//! stream mapped to a `dim`-vector) with the metadata the split planner
//! needs: the smallest admissible split, a default median-bias bound, and
//! whether the procedure draws randomness.

use std::fmt;
use std::sync::Arc;

use crate::data::DataView;
use crate::error::{Error, Result};
use crate::rng::StreamRng;

mod bias;
mod isotonic;
mod ols;
mod transform;
mod univariate;

pub use bias::empirical_median_bias;
pub use isotonic::{isotonic_at_point, isotonic_fit_at, pava};
pub use ols::{ols_estimator, ols_fit, OlsFit};
pub use transform::{monotone_transform, MonotoneMap};
pub use univariate::{
    binomial_proportion, mean_estimator, median_estimator, squared_mean_ustat, uniform_endpoint,
    uniform_max, CHI2_ONE_MEDIAN_BIAS,
};

pub type Procedure = Arc<dyn Fn(&DataView<'_>, &mut StreamRng) -> Result<Vec<f64>> + Send + Sync>;

/// Post-hull widening some discrete estimators admit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inflation {
    /// Widen both endpoints by `ln 2 / m`, `m` the smallest split size;
    /// intersect with `[0, 1]` when `unit_interval` is set.
    LogTwoOverM { unit_interval: bool },
}

impl Inflation {
    pub fn amount(&self, smallest_split: usize) -> f64 {
        match self {
            Inflation::LogTwoOverM { .. } => std::f64::consts::LN_2 / smallest_split as f64,
        }
    }
}

#[derive(Clone)]
pub struct EstimatorSpec {
    pub name: String,
    pub dim: usize,
    pub min_split_size: usize,
    /// Default median-bias bound; `None` when unknown.
    pub recommended_delta: Option<f64>,
    pub needs_randomness: bool,
    /// Median unbiasedness only holds on odd-sized splits.
    pub prefers_odd_splits: bool,
    pub inflation: Option<Inflation>,
    procedure: Procedure,
}

impl fmt::Debug for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EstimatorSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("min_split_size", &self.min_split_size)
            .field("recommended_delta", &self.recommended_delta)
            .field("needs_randomness", &self.needs_randomness)
            .finish_non_exhaustive()
    }
}

impl EstimatorSpec {
    pub fn new<F>(name: impl Into<String>, dim: usize, min_split_size: usize, procedure: F) -> Self
    where
        F: Fn(&DataView<'_>, &mut StreamRng) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            min_split_size: min_split_size.max(1),
            recommended_delta: None,
            needs_randomness: false,
            prefers_odd_splits: false,
            inflation: None,
            procedure: Arc::new(procedure),
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.recommended_delta = Some(delta);
        self
    }

    pub fn randomized(mut self) -> Self {
        self.needs_randomness = true;
        self
    }

    pub fn with_inflation(mut self, inflation: Inflation) -> Self {
        self.inflation = Some(inflation);
        self
    }

    /// Runs the procedure on `view`, checking the split size and the shape
    /// and finiteness of the output.
    pub fn estimate(&self, view: &DataView<'_>, rng: &mut StreamRng) -> Result<Vec<f64>> {
        if view.len() < self.min_split_size {
            return Err(Error::estimator(
                &self.name,
                format!(
                    "split of {} rows is below the minimum of {}",
                    view.len(),
                    self.min_split_size
                ),
            ));
        }
        let out = (self.procedure)(view, rng)?;
        if out.len() != self.dim {
            return Err(Error::estimator(
                &self.name,
                format!("returned {} values, expected {}", out.len(), self.dim),
            ));
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::estimator(&self.name, "returned a non-finite value"));
        }
        Ok(out)
    }
}

/// Names accepted by [`from_name`].
pub const REGISTRY: &[&str] = &[
    "mean",
    "median",
    "median-lower",
    "binom",
    "ols:<k>",
    "uniform-endpoint",
    "uniform-max",
    "sqmean",
    "sqmean-clamped",
    "isotonic:<x0>",
];

/// Looks an estimator up by its command-line name.
pub fn from_name(name: &str) -> Result<EstimatorSpec> {
    let unknown = || Error::Unknown {
        kind: "estimator",
        name: name.to_string(),
        known: REGISTRY.join(", "),
    };
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let spec = match (head, arg) {
        ("mean", None) => mean_estimator(),
        ("median", None) => median_estimator(true),
        ("median-lower", None) => median_estimator(false),
        ("binom", None) => binomial_proportion(),
        ("uniform-endpoint", None) => uniform_endpoint(),
        ("uniform-max", None) => uniform_max(),
        ("sqmean", None) => squared_mean_ustat(false),
        ("sqmean-clamped", None) => squared_mean_ustat(true),
        ("ols", Some(k)) => {
            let k: usize = k
                .parse()
                .map_err(|_| Error::domain(format!("bad coefficient index `{k}`")))?;
            ols_estimator(k, true)
        }
        ("isotonic", Some(x0)) => {
            let x0: f64 = x0
                .parse()
                .map_err(|_| Error::domain(format!("bad evaluation point `{x0}`")))?;
            isotonic_at_point(x0)
        }
        _ => return Err(unknown()),
    };
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::rng::Streams;

    #[test]
    fn registry_round_trip() {
        for name in ["mean", "median", "binom", "ols:1", "uniform-endpoint", "sqmean", "isotonic:0.5"] {
            let spec = from_name(name).unwrap();
            assert_eq!(spec.dim, 1);
        }
        let err = from_name("mode").unwrap_err();
        assert!(err.to_string().contains("uniform-endpoint"));
        assert!(from_name("ols:x").is_err());
    }

    #[test]
    fn estimate_checks_output_shape() {
        let bad = EstimatorSpec::new("bad", 2, 1, |_, _| Ok(vec![1.0]));
        let d = Dataset::univariate(vec![1.0]).unwrap();
        let rows = d.all_rows();
        let mut rng = Streams::new(0).estimator(0);
        assert!(bad.estimate(&d.view(&rows), &mut rng).is_err());

        let nan = EstimatorSpec::new("nan", 1, 1, |_, _| Ok(vec![f64::NAN]));
        assert!(nan.estimate(&d.view(&rows), &mut rng).is_err());
    }

    #[test]
    fn inflation_constant() {
        let inf = Inflation::LogTwoOverM { unit_interval: true };
        assert!((inf.amount(100) - 0.006931471805599453).abs() < 1e-15);
    }
}
