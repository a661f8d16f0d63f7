//! The hull construction: split the rows into `B*` disjoint random cells,
//! estimate on each cell, and report the coordinatewise `[min, max]`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{EstimatorSpec, Inflation};
use crate::rng::{StreamRng, Streams};
use crate::splitmath::{randomize_b, rect_union_bound, solve_budget};

/// A balanced partition of `n` rows into `b_star` cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAssignment {
    pub b_star: usize,
    /// Cell index of each row.
    pub membership: Vec<usize>,
}

impl SplitAssignment {
    /// Row indices per cell, each in ascending order.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.b_star];
        for (row, &cell) in self.membership.iter().enumerate() {
            cells[cell].push(row);
        }
        cells
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.b_star];
        for &c in &self.membership {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Shuffles the row indices and deals them round-robin into `b` cells, so
/// cell sizes differ by at most one.
pub fn split_indices(
    n: usize,
    b: usize,
    min_split_size: usize,
    rng: &mut StreamRng,
) -> Result<SplitAssignment> {
    if b == 0 {
        return Err(Error::domain("split count must be at least 1"));
    }
    if b > n {
        return Err(Error::MoreSplitsThanRows { n, b });
    }
    if n / b < min_split_size {
        return Err(Error::InfeasibleSplit {
            n,
            b,
            min_split_size,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut membership = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        membership[row] = pos % b;
    }
    Ok(SplitAssignment {
        b_star: b,
        membership,
    })
}

/// Runs `est` on every cell of `assignment`, cell `j` drawing from its own
/// estimator stream.
pub fn split_estimates(
    data: &Dataset,
    est: &EstimatorSpec,
    assignment: &SplitAssignment,
    streams: &Streams,
) -> Result<Vec<Vec<f64>>> {
    assignment
        .cells()
        .iter()
        .enumerate()
        .map(|(j, rows)| est.estimate(&data.view(rows), &mut streams.estimator(j)))
        .collect()
}

pub(crate) fn hull(estimates: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = estimates[0].len();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for e in estimates {
        for k in 0..d {
            lo[k] = lo[k].min(e[k]);
            hi[k] = hi[k].max(e[k]);
        }
    }
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Hulc,
    HulcFixedB,
    Adaptive,
    Unimodal,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Hulc => "hulc",
            Method::HulcFixedB => "hulc-fixed-b",
            Method::Adaptive => "adaptive",
            Method::Unimodal => "unimodal",
        }
    }
}

/// Provenance of the median-bias estimate behind an adaptive box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveInfo {
    pub delta_hat: f64,
    pub l_n_zero: Vec<f64>,
    pub subsample_size: usize,
    pub subsample_count: usize,
    pub clipped: bool,
    pub delta_seed: u64,
    pub hull_seed: u64,
}

/// Per-coordinate closed intervals plus how they were produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBox {
    pub method: Method,
    pub alpha: f64,
    /// Median-bias parameter the split budget was solved at.
    pub delta: f64,
    pub b_star: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_solved: Option<usize>,
    /// The uniform draw that fixed `b_star`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_draw: Option<f64>,
    /// Rows in the smallest split.
    pub min_split_rows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<AdaptiveInfo>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ConfidenceBox {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn width(&self, k: usize) -> f64 {
        self.hi[k] - self.lo[k]
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(t, (l, h))| l <= t && t <= h)
    }

    /// Widens every endpoint by the estimator's inflation constant for the
    /// smallest split in this box.
    pub fn apply_inflation(&mut self, inflation: Inflation) {
        let amount = inflation.amount(self.min_split_rows);
        let Inflation::LogTwoOverM { unit_interval } = inflation;
        for (l, h) in self.lo.iter_mut().zip(self.hi.iter_mut()) {
            *l -= amount;
            *h += amount;
            if unit_interval {
                *l = l.max(0.0);
                *h = h.min(1.0);
            }
        }
        self.inflation = Some(amount);
    }
}

/// The randomized hull at miscoverage `alpha` for estimators with median
/// bias at most `delta`. For `dim > 1` the budget is solved at `alpha / dim`
/// and one shared split plan yields every coordinate's interval.
pub fn hulc_interval(
    data: &Dataset,
    est: &EstimatorSpec,
    alpha: f64,
    delta: f64,
    streams: &Streams,
) -> Result<ConfidenceBox> {
    let budget = solve_budget(alpha / est.dim as f64, delta)?;
    let u: f64 = streams.budget_draw().random();
    let b_star = randomize_b(&budget, u);
    let assignment = split_indices(
        data.n_rows(),
        b_star,
        est.min_split_size,
        &mut streams.split_shuffle(),
    )?;
    let estimates = split_estimates(data, est, &assignment, streams)?;
    let (lo, hi) = hull(&estimates);
    Ok(ConfidenceBox {
        method: Method::Hulc,
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
        t: None,
        adaptive: None,
        warnings: Vec::new(),
    })
}

/// The hull of exactly `b` split estimates, with no budget randomization.
/// `alpha` reports the union bound at the estimator's recommended median
/// bias (zero when unknown).
pub fn hulc_interval_fixed_b(
    data: &Dataset,
    est: &EstimatorSpec,
    b: usize,
    streams: &Streams,
) -> Result<ConfidenceBox> {
    let assignment = split_indices(
        data.n_rows(),
        b,
        est.min_split_size,
        &mut streams.split_shuffle(),
    )?;
    let estimates = split_estimates(data, est, &assignment, streams)?;
    let (lo, hi) = hull(&estimates);
    let delta = est.recommended_delta.unwrap_or(0.0).min(0.5);
    Ok(ConfidenceBox {
        method: Method::HulcFixedB,
        alpha: rect_union_bound(b, est.dim, delta)?,
        delta,
        b_star: b,
        lo,
        hi,
        seed: streams.seed(),
        b_solved: None,
        budget_draw: None,
        min_split_rows: data.n_rows() / b,
        inflation: None,
        t: None,
        adaptive: None,
        warnings: Vec::new(),
    })
}
