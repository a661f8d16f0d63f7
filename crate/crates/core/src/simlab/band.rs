use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptive::{adaptive_hulc, AdaptiveParams};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::isotonic_at_point;
use crate::rng::{Stage, Streams};
use crate::unimodal::unimodal_hulc;

/// Step-function confidence band for a nondecreasing function, built from
/// intervals at increasing points `x₁ < … < x_k`.
///
/// A nondecreasing `f` with `f(xᵢ) ∈ [ℓᵢ, uᵢ]` satisfies `f(x) ≥ ℓᵢ` for
/// `x ≥ xᵢ` and `f(x) ≤ uᵢ` for `x ≤ xᵢ`. The stored bounds are already
/// tightened: `lower[i] = max_{j ≤ i} ℓⱼ` and `upper[i] = min_{j ≥ i} uⱼ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepBand {
    pub xs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub raw_lower: Vec<f64>,
    pub raw_upper: Vec<f64>,
}

impl StepBand {
    /// `−∞` left of `x₁`, then `lower[i]` on `[xᵢ, xᵢ₊₁)`.
    pub fn lower_at(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&p| p <= x);
        if k == 0 {
            f64::NEG_INFINITY
        } else {
            self.lower[k - 1]
        }
    }

    /// `upper[i + 1]` on `(xᵢ, xᵢ₊₁]`, `upper[0]` up to `x₁`, `+∞` right of `x_k`.
    pub fn upper_at(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&p| p < x);
        if k == self.xs.len() {
            f64::INFINITY
        } else {
            self.upper[k]
        }
    }
}

pub fn monotone_band(xs: &[f64], intervals: &[(f64, f64)]) -> Result<StepBand> {
    if xs.is_empty() || xs.len() != intervals.len() {
        return Err(Error::domain("band needs one interval per point, at least one point"));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("band points must be strictly increasing"));
    }
    if let Some((l, u)) = intervals.iter().find(|(l, u)| !(l <= u)) {
        return Err(Error::domain(format!("interval [{l}, {u}] is not ordered")));
    }
    let raw_lower: Vec<f64> = intervals.iter().map(|i| i.0).collect();
    let raw_upper: Vec<f64> = intervals.iter().map(|i| i.1).collect();
    let lower = raw_lower
        .iter()
        .scan(f64::NEG_INFINITY, |m, &l| {
            *m = m.max(l);
            Some(*m)
        })
        .collect();
    let mut upper: Vec<f64> = raw_upper
        .iter()
        .rev()
        .scan(f64::INFINITY, |m, &u| {
            *m = m.min(u);
            Some(*m)
        })
        .collect();
    upper.reverse();
    Ok(StepBand {
        xs: xs.to_vec(),
        lower,
        upper,
        raw_lower,
        raw_upper,
    })
}

/// `points` equi-spaced values on `[n^{-1/2}, 1 − n^{-1/2}]`.
pub fn band_grid(n: usize, points: usize) -> Result<Vec<f64>> {
    let a = 1.0 / (n as f64).sqrt();
    if points == 0 || a >= 0.5 {
        return Err(Error::domain(format!(
            "grid needs at least one point and n > 4 (got n = {n}, points = {points})"
        )));
    }
    if points == 1 {
        return Ok(vec![0.5]);
    }
    let step = (1.0 - 2.0 * a) / (points - 1) as f64;
    Ok((0..points).map(|i| a + step * i as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandMethod {
    Adaptive(AdaptiveParams),
    Unimodal { t: f64, delta: f64 },
}

/// Simultaneous band for a monotone regression function: isotonic
/// estimates at each grid point, per-point level `alpha / points`, then
/// [`monotone_band`]. `data` needs a covariate column and a response.
pub fn isotonic_band(
    data: &Dataset,
    xs: &[f64],
    alpha: f64,
    method: &BandMethod,
    streams: &Streams,
) -> Result<StepBand> {
    if xs.is_empty() {
        return Err(Error::domain("band needs at least one point"));
    }
    let level = alpha / xs.len() as f64;
    let intervals: Vec<(f64, f64)> = xs
        .par_iter()
        .enumerate()
        .map(|(k, &x0)| {
            let est = isotonic_at_point(x0);
            let s = streams.child(Stage::Point, k as u64);
            let b = match *method {
                BandMethod::Adaptive(p) => adaptive_hulc(data, &est, level, &p, &s)?,
                BandMethod::Unimodal { t, delta } => unimodal_hulc(data, &est, level, t, delta, &s)?,
            };
            Ok((b.lo[0], b.hi[0]))
        })
        .collect::<Result<_>>()?;
    monotone_band(xs, &intervals)
}
