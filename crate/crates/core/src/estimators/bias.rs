use rayon::prelude::*;

use super::EstimatorSpec;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{Stage, StreamRng, Streams};

/// Monte-Carlo plug-in for the median bias
/// `(1/2 − min{P(θ̂ ≥ θ₀), P(θ̂ ≤ θ₀)})₊` of the first output coordinate,
/// over `reps` datasets of size `n` drawn by `sampler`.
pub fn empirical_median_bias<S>(
    spec: &EstimatorSpec,
    sampler: S,
    theta0: f64,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<f64>
where
    S: Fn(usize, &mut StreamRng) -> Result<Dataset> + Sync,
{
    if reps == 0 {
        return Err(Error::domain("reps must be at least 1"));
    }
    let streams = Streams::new(seed);
    let (ge, le) = (0..reps)
        .into_par_iter()
        .map(|r| {
            let rep = streams.child(Stage::Replication, r as u64);
            let data = sampler(n, &mut rep.rng(Stage::Data, 0))?;
            let rows = data.all_rows();
            let est = spec.estimate(&data.view(&rows), &mut rep.estimator(0))?[0];
            Ok(((est >= theta0) as usize, (est <= theta0) as usize))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let p_ge = ge as f64 / reps as f64;
    let p_le = le as f64 / reps as f64;
    Ok((0.5 - p_ge.min(p_le)).max(0.0))
}
