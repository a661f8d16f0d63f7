//! Hull with a data-driven median-bias parameter.
//!
//! The asymptotic median bias is estimated by subsampling: with `θ̂` the
//! full-data estimate and `θ̂⁽ᵇ⁾` estimates on `K` random subsamples of size
//! `b`, `L_n(0)` is the fraction of subsample estimates at or below `θ̂`, and
//! `Δ̂ = |L_n(0) − 1/2|`. No convergence rate enters: the indicator
//! `1{r_b(θ̂⁽ᵇ⁾ − θ̂) ≤ 0}` does not depend on `r_b`.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::EstimatorSpec;
use crate::hulc::{hulc_interval, AdaptiveInfo, ConfidenceBox, Method};
use crate::rng::{Stage, Streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsampleSize {
    /// `⌊n^{2/3}⌋`.
    Auto,
    Fixed(usize),
}

impl SubsampleSize {
    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            SubsampleSize::Auto => floor_two_thirds_power(n),
            SubsampleSize::Fixed(b) => b,
        }
    }
}

/// Exact `⌊n^{2/3}⌋`, i.e. the largest `b` with `b³ ≤ n²`.
fn floor_two_thirds_power(n: usize) -> usize {
    let n2 = (n as u128) * (n as u128);
    let mut b = (n as f64).powf(2.0 / 3.0).floor() as u128;
    while b * b * b > n2 {
        b -= 1;
    }
    while (b + 1) * (b + 1) * (b + 1) <= n2 {
        b += 1;
    }
    b as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveParams {
    pub subsample_size: SubsampleSize,
    pub subsamples: usize,
    /// Upper clip for `Δ̂`; must lie in `(0, 1/2)`.
    pub delta_cap: f64,
    /// Fail instead of clipping when `Δ̂` exceeds the cap.
    pub strict_cap: bool,
}

impl Default for AdaptiveParams {
    fn default() -> Self {
        Self {
            subsample_size: SubsampleSize::Auto,
            subsamples: 1000,
            delta_cap: 0.45,
            strict_cap: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    /// Largest per-coordinate estimate; the one the hull is built with.
    pub delta_hat: f64,
    /// `L_n(0)` for each output coordinate.
    pub l_n_zero: Vec<f64>,
    pub subsample_size: usize,
    pub subsample_count: usize,
    pub seed: u64,
}

impl DeltaEstimate {
    pub fn coordinate_deltas(&self) -> Vec<f64> {
        self.l_n_zero.iter().map(|l| (l - 0.5).abs()).collect()
    }
}

/// Subsampling estimate of the median bias of `est`.
pub fn estimate_delta(
    data: &Dataset,
    est: &EstimatorSpec,
    subsample_size: usize,
    subsamples: usize,
    streams: &Streams,
) -> Result<DeltaEstimate> {
    let n = data.n_rows();
    if subsample_size < est.min_split_size || subsample_size >= n {
        return Err(Error::domain(format!(
            "subsample size {subsample_size} must satisfy {} <= b < n = {n}",
            est.min_split_size
        )));
    }
    if subsamples == 0 {
        return Err(Error::domain("subsample count must be at least 1"));
    }
    let all = data.all_rows();
    let full = est.estimate(&data.view(&all), &mut streams.rng(Stage::FullEstimate, 0))?;

    // Index sets depend only on (seed, k), so the parallel map is
    // schedule-independent.
    let below: Vec<Vec<bool>> = (0..subsamples)
        .into_par_iter()
        .map(|k| {
            let sub = streams.child(Stage::Subsampling, k as u64);
            let mut rows = index::sample(&mut sub.split_shuffle(), n, subsample_size).into_vec();
            rows.sort_unstable();
            let e = est
                .estimate(&data.view(&rows), &mut sub.estimator(0))
                .map_err(|e| Error::Subsample {
                    index: k,
                    source: Box::new(e),
                })?;
            Ok(e.iter().zip(&full).map(|(s, f)| s <= f).collect())
        })
        .collect::<Result<_>>()?;

    let l_n_zero: Vec<f64> = (0..est.dim)
        .map(|c| below.iter().filter(|b| b[c]).count() as f64 / subsamples as f64)
        .collect();
    let delta_hat = l_n_zero
        .iter()
        .map(|l| (l - 0.5).abs())
        .fold(0.0, f64::max);
    Ok(DeltaEstimate {
        delta_hat,
        l_n_zero,
        subsample_size,
        subsample_count: subsamples,
        seed: streams.seed(),
    })
}

/// Estimates `Δ̂`, clips it at `params.delta_cap`, and builds the hull at
/// that median-bias level on the same data. Multivariate estimators use the
/// largest coordinate estimate with the shared `alpha / dim` split plan.
pub fn adaptive_hulc(
    data: &Dataset,
    est: &EstimatorSpec,
    alpha: f64,
    params: &AdaptiveParams,
    streams: &Streams,
) -> Result<ConfidenceBox> {
    if !(params.delta_cap > 0.0 && params.delta_cap < 0.5) {
        return Err(Error::domain(format!(
            "delta cap must lie in (0, 1/2), got {}",
            params.delta_cap
        )));
    }
    let delta_streams = streams.child(Stage::Method, 0);
    let hull_streams = streams.child(Stage::Method, 1);
    let b = params.subsample_size.resolve(data.n_rows());
    let dh = estimate_delta(data, est, b, params.subsamples, &delta_streams)?;

    let clipped = dh.delta_hat > params.delta_cap;
    if clipped && params.strict_cap {
        return Err(Error::DeltaClipped {
            delta_hat: dh.delta_hat,
            cap: params.delta_cap,
        });
    }
    let delta = dh.delta_hat.min(params.delta_cap);
    let mut out = hulc_interval(data, est, alpha, delta, &hull_streams)?;
    out.method = Method::Adaptive;
    out.seed = streams.seed();
    if clipped {
        out.warnings.push(format!(
            "median-bias estimate {:.4} clipped to {}; the unimodal method handles bias near 1/2",
            dh.delta_hat, params.delta_cap
        ));
    }
    out.adaptive = Some(AdaptiveInfo {
        delta_hat: dh.delta_hat,
        l_n_zero: dh.l_n_zero,
        subsample_size: dh.subsample_size,
        subsample_count: dh.subsample_count,
        clipped,
        delta_seed: delta_streams.seed(),
        hull_seed: hull_streams.seed(),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{mean_estimator, uniform_max};
    use crate::rng::StreamRng;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn data(n: usize, seed: u64, f: impl Fn(&mut StreamRng) -> f64) -> Dataset {
        let mut rng = Streams::new(seed).rng(Stage::Data, 0);
        Dataset::univariate((0..n).map(|_| f(&mut rng)).collect()).unwrap()
    }

    #[test]
    fn auto_subsample_size() {
        assert_eq!(SubsampleSize::Auto.resolve(1000), 100);
        assert_eq!(SubsampleSize::Auto.resolve(2000), 158);
        assert_eq!(SubsampleSize::Auto.resolve(8), 4);
        assert_eq!(SubsampleSize::Auto.resolve(27), 9);
        assert_eq!(SubsampleSize::Fixed(17).resolve(1000), 17);
    }

    #[test]
    fn one_sided_estimator_gives_half() {
        // Full data (all rows) sees 1.0; every proper subsample sees 0.0.
        let d = data(50, 1, |_| 1.0);
        let n = d.n_rows();
        let est = EstimatorSpec::new("below", 1, 1, move |v, _| Ok(vec![if v.len() == n { 1.0 } else { 0.0 }]));
        let dh = estimate_delta(&d, &est, 10, 40, &Streams::new(2)).unwrap();
        assert_eq!(dh.l_n_zero, vec![1.0]);
        assert_eq!(dh.delta_hat, 0.5);
    }

    #[test]
    fn balanced_estimator_gives_zero() {
        let d = data(50, 1, |_| 0.0);
        let n = d.n_rows();
        let est = EstimatorSpec::new("alt", 1, 1, move |v, rng| {
            if v.len() == n {
                return Ok(vec![0.0]);
            }
            // Deterministic alternation keyed on the subsample's first draw.
            Ok(vec![if rng.random::<u64>() % 2 == 0 { 1.0 } else { -1.0 }])
        });
        let dh = estimate_delta(&d, &est, 10, 2000, &Streams::new(3)).unwrap();
        assert!(dh.delta_hat < 0.05, "{}", dh.delta_hat);
        assert!((dh.delta_hat - (dh.l_n_zero[0] - 0.5).abs()).abs() < 1e-15);
    }

    #[test]
    fn uniform_max_looks_maximally_biased() {
        let d = data(2000, 4, |r| r.random::<f64>());
        let b = SubsampleSize::Auto.resolve(2000);
        let dh = estimate_delta(&d, &uniform_max(), b, 500, &Streams::new(5)).unwrap();
        assert!(dh.delta_hat >= 0.4, "{}", dh.delta_hat);
    }

    #[test]
    fn gaussian_mean_lands_on_zero_plateau() {
        let mut small = 0;
        for seed in 0..20 {
            let d = data(2000, 100 + seed, |r| StandardNormal.sample(r));
            let p = AdaptiveParams {
                subsamples: 500,
                ..Default::default()
            };
            let b = adaptive_hulc(&d, &mean_estimator(), 0.05, &p, &Streams::new(seed)).unwrap();
            if b.b_star == 5 || b.b_star == 6 {
                small += 1;
            }
        }
        assert!(small >= 19, "{small}/20");
    }

    #[test]
    fn clip_path() {
        let d = data(60, 1, |_| 1.0);
        let n = d.n_rows();
        let est = EstimatorSpec::new("below", 1, 1, move |v, _| Ok(vec![if v.len() == n { 1.0 } else { 0.0 }]));
        let p = AdaptiveParams {
            subsample_size: SubsampleSize::Fixed(10),
            subsamples: 20,
            ..Default::default()
        };
        let b = adaptive_hulc(&d, &est, 0.2, &p, &Streams::new(1)).unwrap();
        let info = b.adaptive.as_ref().unwrap();
        assert!(info.clipped);
        assert_eq!(b.delta, 0.45);
        assert!(b.warnings[0].contains("unimodal"));

        let strict = AdaptiveParams { strict_cap: true, ..p };
        assert!(matches!(
            adaptive_hulc(&d, &est, 0.2, &strict, &Streams::new(1)),
            Err(Error::DeltaClipped { .. })
        ));
    }

    #[test]
    fn bad_arguments() {
        let d = data(30, 1, |_| 0.0);
        assert!(estimate_delta(&d, &mean_estimator(), 30, 10, &Streams::new(0)).is_err());
        assert!(estimate_delta(&d, &mean_estimator(), 0, 10, &Streams::new(0)).is_err());
        assert!(estimate_delta(&d, &mean_estimator(), 5, 0, &Streams::new(0)).is_err());
        let p = AdaptiveParams { delta_cap: 0.5, ..Default::default() };
        assert!(adaptive_hulc(&d, &mean_estimator(), 0.1, &p, &Streams::new(0)).is_err());
    }

    #[test]
    fn subsample_failure_names_index() {
        let d = data(30, 1, |_| 0.0);
        let est = EstimatorSpec::new("fails", 1, 1, |v, _| {
            if v.len() < 30 {
                Err(Error::Data("boom".into()))
            } else {
                Ok(vec![0.0])
            }
        });
        let err = estimate_delta(&d, &est, 5, 10, &Streams::new(0)).unwrap_err();
        assert!(matches!(err, Error::Subsample { index: 0, .. }), "{err}");
    }

    #[test]
    fn deterministic() {
        let d = data(300, 9, |r| StandardNormal.sample(r));
        let a = estimate_delta(&d, &mean_estimator(), 40, 200, &Streams::new(3)).unwrap();
        let b = estimate_delta(&d, &mean_estimator(), 40, 200, &Streams::new(3)).unwrap();
        assert_eq!(a, b);
    }
}
