use super::EstimatorSpec;
use crate::error::{Error, Result};

/// Nondecreasing maps that can be composed with an estimator. Median bias
/// can only shrink under such a map, so the base estimator's bound carries
/// over.
#[derive(Debug, Clone, PartialEq)]
pub enum MonotoneMap {
    ClampAtZero,
    /// `scale · x + shift` with `scale > 0`.
    Affine { scale: f64, shift: f64 },
    Exp,
    /// Natural log; undefined for nonpositive inputs.
    Log,
    /// Piecewise-linear interpolation through `(xs, ys)` with both
    /// nondecreasing, held constant outside the table.
    Table { xs: Vec<f64>, ys: Vec<f64> },
}

impl MonotoneMap {
    pub fn table(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::domain("table needs matching, nonempty knots"));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("table knots must be strictly increasing"));
        }
        if ys.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::domain("table values must be nondecreasing"));
        }
        Ok(MonotoneMap::Table { xs, ys })
    }

    pub fn affine(scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite() && shift.is_finite()) {
            return Err(Error::domain("affine map needs a positive, finite scale"));
        }
        Ok(MonotoneMap::Affine { scale, shift })
    }

    pub fn label(&self) -> &'static str {
        match self {
            MonotoneMap::ClampAtZero => "clamp0",
            MonotoneMap::Affine { .. } => "affine",
            MonotoneMap::Exp => "exp",
            MonotoneMap::Log => "log",
            MonotoneMap::Table { .. } => "table",
        }
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        let y = match self {
            MonotoneMap::ClampAtZero => x.max(0.0),
            MonotoneMap::Affine { scale, shift } => scale * x + shift,
            MonotoneMap::Exp => x.exp(),
            MonotoneMap::Log => {
                if x <= 0.0 {
                    return Err(Error::domain(format!("log undefined at {x}")));
                }
                x.ln()
            }
            MonotoneMap::Table { xs, ys } => {
                let k = xs.partition_point(|&t| t <= x);
                if k == 0 {
                    ys[0]
                } else if k == xs.len() {
                    ys[k - 1]
                } else {
                    let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                    ys[k - 1] + w * (ys[k] - ys[k - 1])
                }
            }
        };
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::domain(format!("{} overflowed at {x}", self.label())))
        }
    }
}

/// `g ∘ base`, applied coordinatewise.
pub fn monotone_transform(base: EstimatorSpec, g: MonotoneMap) -> EstimatorSpec {
    let name = format!("{}({})", g.label(), base.name);
    let err_name = name.clone();
    let inner = base.clone();
    let mut spec = EstimatorSpec::new(name, base.dim, base.min_split_size, move |view, rng| {
        inner
            .estimate(view, rng)?
            .into_iter()
            .map(|v| g.apply(v).map_err(|e| Error::estimator(&err_name, e.to_string())))
            .collect()
    });
    spec.recommended_delta = base.recommended_delta;
    spec.needs_randomness = base.needs_randomness;
    spec.prefers_odd_splits = base.prefers_odd_splits;
    spec
}
