//! Confidence sets from the hull of estimates computed on disjoint random
//! splits of the data.
//!
//! [`hulc_interval`] takes a known median-bias bound, [`adaptive_hulc`]
//! estimates that bound by subsampling, and [`unimodal_hulc`] stretches the
//! hull so that no bound is needed when the estimator is asymptotically
//! unimodal at the target. [`splitmath`] holds the split-count calculus and
//! [`simlab`] the Monte-Carlo harness.

pub mod adaptive;
pub mod data;
pub mod error;
pub mod estimators;
pub mod hulc;
pub mod rng;
pub mod simlab;
pub mod splitmath;
pub mod unimodal;

pub use adaptive::{adaptive_hulc, estimate_delta, AdaptiveParams, DeltaEstimate, SubsampleSize};
pub use data::{DataView, Dataset, Roles};
pub use error::{Error, Result};
pub use estimators::EstimatorSpec;
pub use hulc::{hulc_interval, hulc_interval_fixed_b, split_indices, ConfidenceBox, Method, SplitAssignment};
pub use rng::{Stage, StreamRng, Streams};
pub use splitmath::{solve_budget, solve_unimodal_budget, SplitBudget, UnimodalBudget};
pub use unimodal::unimodal_hulc;
