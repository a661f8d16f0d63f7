//! The split calculus: how many disjoint splits a hull needs for a target
//! miscoverage, and the randomization that makes the miscoverage exact.
//!
//! With `B` independent estimates whose median bias is at most `Δ`, the hull
//! `[min, max]` misses the target with probability at most
//! `P(B; Δ) = (1/2 − Δ)^B + (1/2 + Δ)^B`. The functions here solve for the
//! smallest admissible `B`, the randomization weight between `B − 1` and `B`,
//! and the companion quantities for the stretched (unimodal) hull and for
//! multivariate hulls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Split counts past this are treated as a domain error rather than looped to.
const MAX_SPLITS: usize = 10_000_000;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=0.5).contains(&delta) {
        Ok(())
    } else {
        Err(Error::domain(format!("delta must lie in [0, 1/2], got {delta}")))
    }
}

fn p_unchecked(b: usize, delta: f64) -> f64 {
    match b {
        0 => return 2.0,
        1 => return 1.0,
        _ => {}
    }
    let b = b as i32;
    ((0.5 - delta).powi(b) + (0.5 + delta).powi(b)).clamp(0.0, 1.0)
}

/// Probability that the hull of `b` independent estimates with median bias
/// `delta` misses the target: `(1/2 − Δ)^B + (1/2 + Δ)^B`.
pub fn miscoverage_p(b: usize, delta: f64) -> Result<f64> {
    if b < 1 {
        return Err(Error::domain("split count must be at least 1"));
    }
    check_delta(delta)?;
    if delta == 0.5 || b == 1 {
        return Ok(1.0);
    }
    Ok(p_unchecked(b, delta))
}

/// Solved split budget for the plain hull.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitBudget {
    pub alpha: f64,
    pub delta: f64,
    /// Smallest `B` with `P(B; Δ) ≤ α`.
    pub b_solved: usize,
    /// Probability of using `b_solved − 1` splits instead of `b_solved`.
    pub tau: f64,
    pub p_at_b: f64,
    pub p_at_b_minus_1: f64,
}

impl SplitBudget {
    /// Miscoverage of the randomized procedure; equals `alpha` up to rounding.
    pub fn randomized_miscoverage(&self) -> f64 {
        self.tau * self.p_at_b_minus_1 + (1.0 - self.tau) * self.p_at_b
    }
}

/// The bracket `[⌈log(2/α)/log 2⌉, ⌈log(2/α)/log(2/(1+2Δ))⌉]` that contains
/// `B_{α,Δ}`.
pub fn budget_bounds(alpha: f64, delta: f64) -> Result<(usize, usize)> {
    check_alpha(alpha)?;
    check_delta(delta)?;
    if delta >= 0.5 {
        return Err(Error::InfiniteSplits { delta });
    }
    let num = (2.0 / alpha).ln();
    let lower = (num / std::f64::consts::LN_2).ceil().max(1.0) as usize;
    let upper = (num / (2.0 / (1.0 + 2.0 * delta)).ln()).ceil().max(1.0) as usize;
    Ok((lower, upper))
}

/// Smallest `B` with `P(B; Δ) ≤ α` and the randomization weight
/// `τ = (α − P(B)) / (P(B − 1) − P(B))`.
pub fn solve_budget(alpha: f64, delta: f64) -> Result<SplitBudget> {
    check_alpha(alpha)?;
    check_delta(delta)?;
    if delta >= 0.5 {
        return Err(Error::InfiniteSplits { delta });
    }
    let (lower, _) = budget_bounds(alpha, delta)?;
    // One below the analytic lower bound absorbs rounding in the logarithms.
    let mut b = lower.saturating_sub(1).max(1);
    while p_unchecked(b, delta) > alpha {
        b += 1;
        if b > MAX_SPLITS {
            return Err(Error::domain(format!(
                "split budget exceeds {MAX_SPLITS} at alpha = {alpha}, delta = {delta}"
            )));
        }
    }
    let p_at_b = p_unchecked(b, delta);
    let p_at_b_minus_1 = p_unchecked(b - 1, delta);
    let tau = ((alpha - p_at_b) / (p_at_b_minus_1 - p_at_b)).clamp(0.0, 1.0);
    Ok(SplitBudget {
        alpha,
        delta,
        b_solved: b,
        tau,
        p_at_b,
        p_at_b_minus_1,
    })
}

/// Maps a uniform draw to the number of splits actually used:
/// `b_solved − 1` when `u ≤ τ`, otherwise `b_solved`.
pub fn randomize_b(budget: &SplitBudget, u: f64) -> usize {
    if u <= budget.tau {
        budget.b_solved - 1
    } else {
        budget.b_solved
    }
}

/// Radius `C_{α,Δ}` around `delta` inside which `B_{α,γ} = B_{α,Δ}`.
pub fn stability_radius(alpha: f64, delta: f64) -> Result<f64> {
    let budget = solve_budget(alpha, delta)?;
    let b = budget.b_solved as f64;
    let radius = if delta == 0.0 {
        2.0 / (b * (b - 1.0)) * (alpha / budget.p_at_b - 1.0)
    } else {
        let up = (alpha / budget.p_at_b).powf(1.0 / b);
        let down = (budget.p_at_b_minus_1 / alpha).powf(1.0 / b);
        0.5 * (up.min(down) - 1.0)
    };
    Ok(radius.max(0.0))
}

/// `Q(B; t, Δ) = P(B; Δ) (1 + t)^{−B+1}`, the miscoverage of the hull
/// stretched by `t` times its range on each side.
pub fn unimodal_q(b: usize, t: f64, delta: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(format!("stretch t must be finite and >= 0, got {t}")));
    }
    miscoverage_p(b, delta)?;
    Ok(q_unchecked(b, t, delta))
}

fn q_unchecked(b: usize, t: f64, delta: f64) -> f64 {
    let p = if delta == 0.5 && b > 0 { 1.0 } else { p_unchecked(b, delta) };
    (p * (1.0 + t).powi(1 - b as i32)).clamp(0.0, 2.0)
}

/// Solved split budget for the stretched hull.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnimodalBudget {
    pub alpha: f64,
    pub t: f64,
    pub delta: f64,
    pub b_solved: usize,
    /// Probability of using `b_solved` splits; otherwise `b_solved − 1`.
    pub eta: f64,
    pub q_at_b: f64,
    pub q_at_b_minus_1: f64,
}

impl UnimodalBudget {
    pub fn randomized_miscoverage(&self) -> f64 {
        self.eta * self.q_at_b + (1.0 - self.eta) * self.q_at_b_minus_1
    }

    /// Note the direction: `u ≤ η` selects the larger count, the reverse of
    /// [`randomize_b`].
    pub fn randomize(&self, u: f64) -> usize {
        if u <= self.eta {
            self.b_solved
        } else {
            self.b_solved - 1
        }
    }
}

pub fn solve_unimodal_budget(alpha: f64, t: f64, delta: f64) -> Result<UnimodalBudget> {
    check_alpha(alpha)?;
    check_delta(delta)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(format!("stretch t must be finite and >= 0, got {t}")));
    }
    if t == 0.0 && delta >= 0.5 {
        return Err(Error::InfiniteSplits { delta });
    }
    let mut b = 1;
    while q_unchecked(b, t, delta) > alpha {
        b += 1;
        if b > MAX_SPLITS {
            return Err(Error::domain(format!(
                "split budget exceeds {MAX_SPLITS} at alpha = {alpha}, t = {t}, delta = {delta}"
            )));
        }
    }
    let q_at_b = q_unchecked(b, t, delta);
    let q_at_b_minus_1 = q_unchecked(b - 1, t, delta);
    let eta = ((q_at_b_minus_1 - alpha) / (q_at_b_minus_1 - q_at_b)).clamp(0.0, 1.0);
    Ok(UnimodalBudget {
        alpha,
        t,
        delta,
        b_solved: b,
        eta,
        q_at_b,
        q_at_b_minus_1,
    })
}

/// Probability that the origin lies outside the convex hull of `b` points in
/// `R^d` drawn independently from sign-symmetric laws:
/// `2^{−(B−1)} Σ_{k<d} C(B−1, k)`.
pub fn wendel_miscoverage(b: usize, d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    if b <= d {
        return Err(Error::domain(format!(
            "need more points than dimensions (b = {b}, d = {d})"
        )));
    }
    let m = b - 1;
    // term_k = C(m, k) / 2^m, built up multiplicatively.
    let mut term = 0.5f64.powi(m as i32);
    let mut sum = term;
    for k in 0..d - 1 {
        term *= (m - k) as f64 / (k + 1) as f64;
        sum += term;
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// Union bound on the miscoverage of the coordinatewise rectangle hull.
pub fn rect_union_bound(b: usize, d: usize, delta: f64) -> Result<f64> {
    if d < 1 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    Ok((d as f64 * miscoverage_p(b, delta)?).min(1.0))
}
