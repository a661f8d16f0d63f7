//! Stretched hull, valid when the estimator's limit law is unimodal at the
//! target, even when the median bias is 1/2.

use rand::Rng;

use crate::data::Dataset;
use crate::error::Result;
use crate::estimators::EstimatorSpec;
use crate::hulc::{hull, split_estimates, split_indices, ConfidenceBox, Method};
use crate::rng::Streams;
use crate::splitmath::solve_unimodal_budget;

/// Default stretch and median-bias level for estimators of unknown bias.
pub const DEFAULT_T: f64 = 0.5;
pub const DEFAULT_DELTA: f64 = 0.5;

/// `[min − t·range, max + t·range]` per coordinate, on `B*` splits drawn
/// from the unimodal budget at level `alpha / dim`.
///
/// The uniform `u` comes from the same budget stream as the plain hull and
/// is reflected (`1 − u`) before the `u ≤ η ⇒ B` rule, so at `t = 0` this
/// selects the same split count, the same cells and the same endpoints as
/// [`crate::hulc::hulc_interval`] for the same seed.
pub fn unimodal_hulc(
    data: &Dataset,
    est: &EstimatorSpec,
    alpha: f64,
    t: f64,
    delta: f64,
    streams: &Streams,
) -> Result<ConfidenceBox> {
    let budget = solve_unimodal_budget(alpha / est.dim as f64, t, delta)?;
    let u: f64 = streams.budget_draw().random();
    let b_star = budget.randomize(1.0 - u);
    let assignment = split_indices(
        data.n_rows(),
        b_star,
        est.min_split_size,
        &mut streams.split_shuffle(),
    )?;
    let estimates = split_estimates(data, est, &assignment, streams)?;
    let (min, max) = hull(&estimates);
    let (lo, hi) = min
        .iter()
        .zip(&max)
        .map(|(&a, &b)| {
            let r = b - a;
            (a - t * r, b + t * r)
        })
        .unzip();
    Ok(ConfidenceBox {
        method: Method::Unimodal,
        alpha,
        delta,
        b_star,
        lo,
        hi,
        seed: streams.seed(),
        b_solved: Some(budget.b_solved),
        budget_draw: Some(u),
        min_split_rows: data.n_rows() / b_star,
        inflation: None,
        t: Some(t),
        adaptive: None,
        warnings: Vec::new(),
    })
}
