//! Large-sample least-squares re-derivation of the tabulated regression
//! targets.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::scenarios::{multireg_covariates, multireg_direction};
use crate::error::{Error, Result};
use crate::rng::{Stage, StreamRng, Streams};

const CHUNK: usize = 1 << 18;

/// Accumulates `DᵀD` and `Dᵀy` for the design `D = [1, x]` over `draws`
/// rows in fixed-size chunks, each from its own stream, summed in chunk
/// order; then solves the normal equations.
fn projection(
    draws: usize,
    seed: u64,
    p: usize,
    row: impl Fn(&mut StreamRng, &mut [f64]) -> f64 + Sync,
) -> Result<Vec<f64>> {
    if draws < 10 * (p + 1) {
        return Err(Error::domain(format!("need at least {} draws", 10 * (p + 1))));
    }
    let root = Streams::new(seed);
    let chunks = draws.div_ceil(CHUNK);
    let parts: Vec<(DMatrix<f64>, DVector<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = root.rng(Stage::Replication, c as u64);
            let len = CHUNK.min(draws - c * CHUNK);
            let mut xtx = DMatrix::zeros(p + 1, p + 1);
            let mut xty = DVector::zeros(p + 1);
            let mut d = vec![0.0; p + 1];
            for _ in 0..len {
                d[0] = 1.0;
                let y = row(&mut rng, &mut d[1..]);
                for i in 0..=p {
                    xty[i] += d[i] * y;
                    for j in 0..=i {
                        xtx[(i, j)] += d[i] * d[j];
                    }
                }
            }
            (xtx, xty)
        })
        .collect();
    let mut xtx = DMatrix::zeros(p + 1, p + 1);
    let mut xty = DVector::zeros(p + 1);
    for (a, b) in parts {
        xtx += a;
        xty += b;
    }
    xtx.fill_upper_triangle_with_lower_triangle();
    let sol = xtx
        .cholesky()
        .ok_or_else(|| Error::domain("normal equations are singular"))?
        .solve(&xty);
    Ok(sol.iter().copied().collect())
}

/// Population slope of the `lm-gamma` design, approximated from `draws` rows.
pub fn derive_lm_gamma_slope(gamma: f64, draws: usize, seed: u64) -> Result<f64> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("gamma must be finite and >= 0, got {gamma}")));
    }
    let beta = projection(draws, seed, 1, |rng, x| {
        let xi = 10.0 * rng.random::<f64>();
        let e: f64 = StandardNormal.sample(rng);
        x[0] = xi;
        1.0 + 2.0 * xi + gamma * xi.powf(1.7) + (gamma * xi).exp() * e
    })?;
    Ok(beta[1])
}

/// Population coefficient of `X₁` in the six-covariate design.
pub fn derive_multireg_slope(draws: usize, seed: u64) -> Result<f64> {
    let theta = multireg_direction();
    let beta = projection(draws, seed, 6, |rng, x| {
        let c = multireg_covariates(rng);
        x.copy_from_slice(&c);
        let e: f64 = StandardNormal.sample(rng);
        c.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>().abs() + e
    })?;
    Ok(beta[1])
}
