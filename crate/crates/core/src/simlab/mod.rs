//! Monte-Carlo harness: scenarios with known targets, Wald baselines, the
//! coverage engine, and monotone confidence bands.

mod band;
mod coverage;
mod scenarios;
pub mod targets;
mod wald;

pub use band::{band_grid, isotonic_band, monotone_band, BandMethod, StepBand};
pub use coverage::{
    baseline_interval, method_interval, run_coverage, IntervalStats, SimMethod, SimReport, CSV_HEADER,
};
pub use scenarios::{
    gen_lm_gamma, gen_monotone, gen_multireg, scenario, Baseline, Generator, MonotoneFlavor, Scenario,
    ScenarioParams, TargetSource, LM_GAMMA_TARGETS, MULTIREG_SLOPE, SCENARIOS,
};
pub use wald::{normal_quantile, wald_mean, wald_ols_sandwich, WaldInterval};
