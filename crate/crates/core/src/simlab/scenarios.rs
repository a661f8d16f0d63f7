use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{
    binomial_proportion, isotonic_at_point, mean_estimator, ols_estimator, squared_mean_ustat,
    uniform_endpoint, uniform_max, EstimatorSpec,
};
use crate::rng::StreamRng;

pub type Generator = Arc<dyn Fn(usize, &mut StreamRng) -> Result<Dataset> + Send + Sync>;

/// Where a scenario's true target comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetSource {
    /// Closed form.
    Analytic,
    /// Published large-sample least-squares value.
    Tabulated,
    /// Re-derived here by large-sample least squares (see [`super::targets`]).
    Derived,
}

/// Interval the method is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    WaldMean,
    /// Sandwich Wald interval for the OLS coefficient `coefficient`, with an
    /// intercept (index 0).
    WaldOls { coefficient: usize },
    None,
}

#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub theta0: f64,
    pub source: TargetSource,
    pub estimator: EstimatorSpec,
    pub baseline: Baseline,
    generator: Generator,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .field("theta0", &self.theta0)
            .field("source", &self.source)
            .field("estimator", &self.estimator.name)
            .field("baseline", &self.baseline)
            .finish()
    }
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        theta0: f64,
        source: TargetSource,
        estimator: EstimatorSpec,
        baseline: Baseline,
        generator: impl Fn(usize, &mut StreamRng) -> Result<Dataset> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            theta0,
            source,
            estimator,
            baseline,
            generator: Arc::new(generator),
        }
    }

    pub fn generate(&self, n: usize, rng: &mut StreamRng) -> Result<Dataset> {
        (self.generator)(n, rng)
    }
}

/// Knobs some scenarios read; the rest ignore them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Misspecification strength for `lm-gamma`.
    pub gamma: f64,
    /// Population mean for `sqmean`.
    pub mu: f64,
    /// Success probability for `binomial`.
    pub p: f64,
    /// Evaluation point for the monotone-regression scenarios.
    pub x0: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            mu: 0.0,
            p: 0.3,
            x0: 0.75,
        }
    }
}

pub const SCENARIOS: &[&str] = &[
    "gaussian-mean",
    "lm-gamma",
    "multireg",
    "uniform-endpoint",
    "uniform-max",
    "sqmean",
    "heavy-tail",
    "binomial",
    "monotone-fig4",
    "monotone-fig8",
    "monotone-flat",
];

/// Population least-squares slope of `Y` on `X` in the `lm-gamma` design, by `γ`.
pub const LM_GAMMA_TARGETS: &[(f64, f64, TargetSource)] = &[
    (0.0, 2.0, TargetSource::Analytic),
    (0.25, 3.2791, TargetSource::Tabulated),
    (0.5, 4.5567, TargetSource::Tabulated),
    (0.75, 5.8239, TargetSource::Tabulated),
    (1.0, 6.8093, TargetSource::Tabulated),
];

/// Population least-squares coefficient of `X₁` in the six-covariate design,
/// re-derived from 10⁷ draws.
pub const MULTIREG_SLOPE: f64 = -0.3355;

/// `X ~ U[0, 10]`, `Y = 1 + 2X + γX^1.7 + exp(γX)ξ`, `ξ ~ N(0, 1)`.
pub fn gen_lm_gamma(n: usize, gamma: f64, rng: &mut StreamRng) -> Result<Dataset> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("gamma must be finite and >= 0, got {gamma}")));
    }
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi = 10.0 * rng.random::<f64>();
        let e: f64 = StandardNormal.sample(rng);
        x.push(xi);
        y.push(1.0 + 2.0 * xi + gamma * xi.powf(1.7) + (gamma * xi).exp() * e);
    }
    Dataset::regression(vec![x], y)
}

/// One draw of the six covariates.
pub(crate) fn multireg_covariates(rng: &mut StreamRng) -> [f64; 6] {
    let mut u = || 2.0 * rng.random::<f64>() - 1.0;
    let (x1, x2, z1, z2) = (u(), u(), u(), u());
    let x3 = 0.2 * x1 + 0.2 * (x2 + 2.0).powi(2) + 0.2 * z1;
    let x4 = 0.1 + 0.1 * (x1 + x2) + 0.3 * (x1 + 1.5).powi(2) + 0.2 * z2;
    let logistic = |t: f64| 1.0 / (1.0 + (-t).exp());
    let x5 = rng.random_bool(logistic(x1)) as u8 as f64;
    let x6 = rng.random_bool(logistic(x2)) as u8 as f64;
    [x1, x2, x3, x4, x5, x6]
}

pub(crate) fn multireg_direction() -> [f64; 6] {
    let s = 5.13f64.sqrt();
    [1.3 / s, -1.3 / s, 1.0 / s, -0.5 / s, -0.5 / s, -0.5 / s]
}

/// Six correlated covariates (two uniforms, two noisy quadratics, two
/// logistic Bernoullis) and `Y = |θᵀX| + ξ`.
pub fn gen_multireg(n: usize, rng: &mut StreamRng) -> Result<Dataset> {
    let theta = multireg_direction();
    let mut cols: Vec<Vec<f64>> = (0..6).map(|_| Vec::with_capacity(n)).collect();
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x = multireg_covariates(rng);
        let e: f64 = StandardNormal.sample(rng);
        let lin: f64 = x.iter().zip(&theta).map(|(a, b)| a * b).sum();
        for (c, v) in cols.iter_mut().zip(x) {
            c.push(v);
        }
        y.push(lin.abs() + e);
    }
    Dataset::regression(cols, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonotoneFlavor {
    /// `0` on `[0, 1/2]`, `1 + ((x − 1/2)/(1/2))²` beyond; random design,
    /// noise SD 0.1.
    Fig4,
    /// `0` on `[0, 1/2]`, `((x − 1/2)/(1/2))²` beyond; random design, noise
    /// SD 0.1.
    Fig8,
    /// `f ≡ 0` on the grid `i/n`, noise SD 1.
    Flat,
}

impl MonotoneFlavor {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fig4" => Ok(Self::Fig4),
            "fig8" => Ok(Self::Fig8),
            "flat" => Ok(Self::Flat),
            other => Err(Error::Unknown {
                kind: "monotone flavor",
                name: other.to_string(),
                known: "fig4, fig8, flat".into(),
            }),
        }
    }

    pub fn truth(&self, x: f64) -> f64 {
        let bump = if x > 0.5 { ((x - 0.5) / 0.5).powi(2) } else { 0.0 };
        match self {
            Self::Fig4 => 1.0 - (x <= 0.5) as u8 as f64 + bump,
            Self::Fig8 => bump,
            Self::Flat => 0.0,
        }
    }

    pub fn noise_sd(&self) -> f64 {
        match self {
            Self::Fig4 | Self::Fig8 => 0.1,
            Self::Flat => 1.0,
        }
    }
}

/// Columns `x` and `y` with `y = f(x) + ε`.
pub fn gen_monotone(n: usize, flavor: MonotoneFlavor, rng: &mut StreamRng) -> Result<Dataset> {
    let noise = Normal::new(0.0, flavor.noise_sd()).expect("positive sd");
    let x: Vec<f64> = match flavor {
        MonotoneFlavor::Flat => (1..=n).map(|i| i as f64 / n as f64).collect(),
        _ => (0..n).map(|_| rng.random::<f64>()).collect(),
    };
    let y = x.iter().map(|&xi| flavor.truth(xi) + noise.sample(rng)).collect();
    Dataset::new(vec!["x".into(), "y".into()], vec![x, y])
}

fn univariate_gen(
    draw: impl Fn(&mut StreamRng) -> f64 + Send + Sync + 'static,
) -> impl Fn(usize, &mut StreamRng) -> Result<Dataset> + Send + Sync + 'static {
    move |n, rng| Dataset::univariate((0..n).map(|_| draw(rng)).collect())
}

/// Looks up a scenario by name.
pub fn scenario(name: &str, params: &ScenarioParams) -> Result<Scenario> {
    let s = match name {
        "gaussian-mean" => Scenario::new(
            name,
            0.0,
            TargetSource::Analytic,
            mean_estimator(),
            Baseline::WaldMean,
            univariate_gen(|r| StandardNormal.sample(r)),
        ),
        "lm-gamma" => {
            let gamma = params.gamma;
            let &(_, theta0, source) = LM_GAMMA_TARGETS
                .iter()
                .find(|(g, _, _)| (g - gamma).abs() < 1e-12)
                .ok_or_else(|| {
                    Error::domain(format!(
                        "no stored target for gamma = {gamma}; stored: 0, 0.25, 0.5, 0.75, 1 (derive others with `targets`)"
                    ))
                })?;
            Scenario::new(
                name,
                theta0,
                source,
                ols_estimator(1, true),
                Baseline::WaldOls { coefficient: 1 },
                move |n, rng| gen_lm_gamma(n, gamma, rng),
            )
        }
        "multireg" => Scenario::new(
            name,
            MULTIREG_SLOPE,
            TargetSource::Derived,
            ols_estimator(1, true),
            Baseline::WaldOls { coefficient: 1 },
            gen_multireg,
        ),
        "uniform-endpoint" => Scenario::new(
            name,
            1.0,
            TargetSource::Analytic,
            uniform_endpoint(),
            Baseline::None,
            univariate_gen(|r| r.random::<f64>()),
        ),
        "uniform-max" => Scenario::new(
            name,
            1.0,
            TargetSource::Analytic,
            uniform_max(),
            Baseline::None,
            univariate_gen(|r| r.random::<f64>()),
        ),
        "sqmean" => {
            let mu = params.mu;
            Scenario::new(
                name,
                mu * mu,
                TargetSource::Analytic,
                squared_mean_ustat(false),
                Baseline::None,
                univariate_gen(move |r| mu + Distribution::<f64>::sample(&StandardNormal, r)),
            )
        }
        "heavy-tail" => {
            let t = StudentT::new(1.5).expect("valid df");
            Scenario::new(
                name,
                0.0,
                TargetSource::Analytic,
                mean_estimator(),
                Baseline::WaldMean,
                univariate_gen(move |r| t.sample(r)),
            )
        }
        "binomial" => {
            let p = params.p;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("p must lie in [0, 1], got {p}")));
            }
            Scenario::new(
                name,
                p,
                TargetSource::Analytic,
                binomial_proportion(),
                Baseline::WaldMean,
                univariate_gen(move |r| r.random_bool(p) as u8 as f64),
            )
        }
        "monotone-fig4" | "monotone-fig8" | "monotone-flat" => {
            let flavor = MonotoneFlavor::parse(&name["monotone-".len()..])?;
            Scenario::new(
                name,
                flavor.truth(params.x0),
                TargetSource::Analytic,
                isotonic_at_point(params.x0),
                Baseline::None,
                move |n, rng| gen_monotone(n, flavor, rng),
            )
        }
        other => {
            return Err(Error::Unknown {
                kind: "scenario",
                name: other.to_string(),
                known: SCENARIOS.join(", "),
            })
        }
    };
    Ok(s)
}
