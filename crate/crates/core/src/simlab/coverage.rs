use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenarios::{Baseline, Scenario};
use super::wald::{wald_mean, wald_ols_sandwich, WaldInterval};
use crate::adaptive::{adaptive_hulc, AdaptiveParams};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::hulc::hulc_interval;
use crate::rng::{Stage, Streams};
use crate::unimodal::unimodal_hulc;

/// Interval construction to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimMethod {
    /// Known median bias; `None` takes the estimator's recommended bound.
    Hulc { delta: Option<f64> },
    Adaptive(AdaptiveParams),
    Unimodal { t: f64, delta: f64 },
    /// The scenario's baseline interval itself.
    Wald,
}

impl SimMethod {
    pub fn label(&self) -> &'static str {
        match self {
            SimMethod::Hulc { .. } => "hulc",
            SimMethod::Adaptive(_) => "adaptive",
            SimMethod::Unimodal { .. } => "unimodal",
            SimMethod::Wald => "wald",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalStats {
    /// Replications that produced an interval.
    pub successes: usize,
    pub failures: usize,
    pub coverage: f64,
    pub coverage_se: f64,
    pub mean_width: f64,
    pub median_width: f64,
}

impl IntervalStats {
    fn from_outcomes(outcomes: &[Option<(bool, f64)>]) -> Self {
        let ok: Vec<(bool, f64)> = outcomes.iter().flatten().copied().collect();
        let successes = ok.len();
        let (coverage, mean_width, median_width) = if successes == 0 {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            let s = successes as f64;
            let mut widths: Vec<f64> = ok.iter().map(|o| o.1).collect();
            widths.sort_by(f64::total_cmp);
            let mid = successes / 2;
            let median = if successes % 2 == 1 {
                widths[mid]
            } else {
                0.5 * (widths[mid - 1] + widths[mid])
            };
            (
                ok.iter().filter(|o| o.0).count() as f64 / s,
                widths.iter().sum::<f64>() / s,
                median,
            )
        };
        let coverage_se = if successes == 0 {
            f64::NAN
        } else {
            (coverage * (1.0 - coverage) / successes as f64).sqrt()
        };
        Self {
            successes,
            failures: outcomes.len() - successes,
            coverage,
            coverage_se,
            mean_width,
            median_width,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub scenario: String,
    pub theta0: f64,
    pub n: usize,
    pub alpha: f64,
    pub method: String,
    pub reps: usize,
    pub seed: u64,
    pub method_stats: IntervalStats,
    pub baseline: Option<IntervalStats>,
    /// Mean over replications of method width / baseline width, where both
    /// succeeded and the baseline width is positive.
    pub width_ratio: Option<f64>,
    /// Up to five distinct failure messages, in replication order.
    pub failure_examples: Vec<String>,
    pub wall_clock_secs: f64,
}

impl PartialEq for SimReport {
    /// Ignores wall-clock time.
    fn eq(&self, other: &Self) -> bool {
        self.scenario == other.scenario
            && self.theta0.to_bits() == other.theta0.to_bits()
            && self.n == other.n
            && self.alpha == other.alpha
            && self.method == other.method
            && self.reps == other.reps
            && self.seed == other.seed
            && self.method_stats == other.method_stats
            && self.baseline == other.baseline
            && self.width_ratio == other.width_ratio
            && self.failure_examples == other.failure_examples
    }
}

pub const CSV_HEADER: [&str; 10] = [
    "scenario",
    "n",
    "alpha",
    "method",
    "reps",
    "coverage",
    "coverage_se",
    "mean_width",
    "width_ratio",
    "failures",
];

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => x.to_string(),
        _ => "NA".into(),
    }
}

impl SimReport {
    pub fn coverage(&self) -> f64 {
        self.method_stats.coverage
    }

    pub fn mean_width(&self) -> f64 {
        self.method_stats.mean_width
    }

    pub fn failures(&self) -> usize {
        self.method_stats.failures
    }

    /// One row under [`CSV_HEADER`].
    pub fn csv_row(&self) -> Vec<String> {
        let s = &self.method_stats;
        vec![
            self.scenario.clone(),
            self.n.to_string(),
            self.alpha.to_string(),
            self.method.clone(),
            self.reps.to_string(),
            fmt_opt(Some(s.coverage)),
            fmt_opt(Some(s.coverage_se)),
            fmt_opt(Some(s.mean_width)),
            fmt_opt(self.width_ratio),
            s.failures.to_string(),
        ]
    }
}

pub fn baseline_interval(baseline: Baseline, data: &Dataset, alpha: f64) -> Result<WaldInterval> {
    match baseline {
        Baseline::WaldMean => wald_mean(data, alpha),
        Baseline::WaldOls { coefficient } => wald_ols_sandwich(data, alpha, coefficient),
        Baseline::None => Err(Error::domain("scenario has no baseline interval")),
    }
}

/// One method interval on `data`, as `(lo, hi)` of the first coordinate.
pub fn method_interval(
    scenario: &Scenario,
    method: &SimMethod,
    data: &Dataset,
    alpha: f64,
    streams: &Streams,
) -> Result<(f64, f64)> {
    let est = &scenario.estimator;
    let b = match *method {
        SimMethod::Hulc { delta } => {
            let delta = delta.or(est.recommended_delta).ok_or_else(|| {
                Error::domain(format!(
                    "estimator `{}` has no known median-bias bound; pass one or use adaptive/unimodal",
                    est.name
                ))
            })?;
            hulc_interval(data, est, alpha, delta, streams)?
        }
        SimMethod::Adaptive(p) => adaptive_hulc(data, est, alpha, &p, streams)?,
        SimMethod::Unimodal { t, delta } => unimodal_hulc(data, est, alpha, t, delta, streams)?,
        SimMethod::Wald => {
            let w = baseline_interval(scenario.baseline, data, alpha)?;
            return Ok((w.lo, w.hi));
        }
    };
    Ok((b.lo[0], b.hi[0]))
}

struct Rep {
    method: std::result::Result<(bool, f64), String>,
    baseline: Option<(bool, f64)>,
}

/// Monte-Carlo coverage and width of `method` on `scenario`. Replication `r`
/// draws its data and its interval from sub-streams keyed by `(seed, r)`,
/// so the report does not depend on `workers` or scheduling.
pub fn run_coverage(
    scenario: &Scenario,
    method: &SimMethod,
    n: usize,
    reps: usize,
    alpha: f64,
    seed: u64,
    workers: Option<usize>,
) -> Result<SimReport> {
    if reps == 0 {
        return Err(Error::domain("reps must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let start = Instant::now();
    let root = Streams::new(seed);
    let theta0 = scenario.theta0;
    let one = |r: usize| -> Rep {
        let rep = root.child(Stage::Replication, r as u64);
        let data = match scenario.generate(n, &mut rep.rng(Stage::Data, 0)) {
            Ok(d) => d,
            Err(e) => {
                return Rep {
                    method: Err(format!("data generation: {e}")),
                    baseline: None,
                }
            }
        };
        let method = method_interval(scenario, method, &data, alpha, &rep.child(Stage::Method, 0))
            .map(|(lo, hi)| (lo <= theta0 && theta0 <= hi, hi - lo))
            .map_err(|e| e.to_string());
        let baseline = baseline_interval(scenario.baseline, &data, alpha)
            .ok()
            .map(|w| (w.contains(theta0), w.width()));
        Rep { method, baseline }
    };
    let outcomes: Vec<Rep> = match workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::domain(format!("thread pool: {e}")))?
            .install(|| (0..reps).into_par_iter().map(one).collect()),
        None => (0..reps).into_par_iter().map(one).collect(),
    };

    let method_outcomes: Vec<Option<(bool, f64)>> =
        outcomes.iter().map(|o| o.method.as_ref().ok().copied()).collect();
    let method_stats = IntervalStats::from_outcomes(&method_outcomes);
    let baseline = (scenario.baseline != Baseline::None).then(|| {
        let b: Vec<_> = outcomes.iter().map(|o| o.baseline).collect();
        IntervalStats::from_outcomes(&b)
    });
    let ratios: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| match (&o.method, o.baseline) {
            (Ok((_, w)), Some((_, bw))) if bw > 0.0 => Some(w / bw),
            _ => None,
        })
        .collect();
    let width_ratio = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
    let mut failure_examples: Vec<String> = Vec::new();
    for o in &outcomes {
        if let Err(e) = &o.method {
            if failure_examples.len() < 5 && !failure_examples.contains(e) {
                failure_examples.push(e.clone());
            }
        }
    }
    Ok(SimReport {
        scenario: scenario.name.clone(),
        theta0,
        n,
        alpha,
        method: method.label().to_string(),
        reps,
        seed,
        method_stats,
        baseline,
        width_ratio,
        failure_examples,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simlab::scenarios::{scenario, ScenarioParams};

    fn gaussian() -> Scenario {
        scenario("gaussian-mean", &ScenarioParams::default()).unwrap()
    }

    #[test]
    fn single_rep_bookkeeping() {
        let r = run_coverage(&gaussian(), &SimMethod::Hulc { delta: None }, 50, 1, 0.05, 3, None).unwrap();
        assert!(r.coverage() == 0.0 || r.coverage() == 1.0);
        assert_eq!(r.method_stats.coverage_se, 0.0);
        assert_eq!(r.csv_row().len(), CSV_HEADER.len());
    }

    #[test]
    fn worker_count_does_not_matter() {
        let m = SimMethod::Hulc { delta: None };
        let a = run_coverage(&gaussian(), &m, 60, 40, 0.1, 9, Some(1)).unwrap();
        let b = run_coverage(&gaussian(), &m, 60, 40, 0.1, 9, Some(4)).unwrap();
        let c = run_coverage(&gaussian(), &m, 60, 40, 0.1, 9, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.csv_row(), b.csv_row());
    }

    #[test]
    fn failures_are_counted() {
        let s = scenario("uniform-max", &ScenarioParams::default()).unwrap();
        let r = run_coverage(&s, &SimMethod::Hulc { delta: None }, 30, 5, 0.05, 1, None).unwrap();
        assert_eq!(r.failures(), 5);
        assert!(r.failure_examples[0].contains("infinite splits"));
        assert_eq!(r.csv_row()[5], "NA");
    }

    #[test]
    fn wald_method_has_unit_ratio() {
        let r = run_coverage(&gaussian(), &SimMethod::Wald, 40, 10, 0.05, 2, None).unwrap();
        assert_eq!(r.width_ratio, Some(1.0));
    }

    #[test]
    fn se_formula() {
        let r = run_coverage(&gaussian(), &SimMethod::Hulc { delta: None }, 40, 200, 0.2, 5, None).unwrap();
        let c = r.coverage();
        assert!((r.method_stats.coverage_se - (c * (1.0 - c) / 200.0).sqrt()).abs() < 1e-15);
    }
}
