use rand::Rng;

use super::{EstimatorSpec, Inflation};
use crate::error::Error;

/// `|P(χ²₁ ≤ 1) − 1/2| ≈ 0.183`, the median-bias bound used for the
/// squared-mean U-statistic.
pub const CHI2_ONE_MEDIAN_BIAS: f64 = 0.182_689_492_137_085_85;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs
}

/// Sample mean of the sample column.
pub fn mean_estimator() -> EstimatorSpec {
    EstimatorSpec::new("mean", 1, 1, |view, _| Ok(vec![mean(&view.sample())])).with_delta(0.0)
}

/// Sample median. Odd splits give the middle order statistic; even splits
/// flip a fair coin between the two central order statistics when
/// `randomized`, and otherwise take the lower one (not median unbiased).
pub fn median_estimator(randomized: bool) -> EstimatorSpec {
    let name = if randomized { "median" } else { "median-lower" };
    let mut spec = EstimatorSpec::new(name, 1, 1, move |view, rng| {
        let xs = sorted(view.sample());
        let n = xs.len();
        let upper = n % 2 == 1 || (randomized && rng.random_bool(0.5));
        Ok(vec![if upper { xs[n / 2] } else { xs[n / 2 - 1] }])
    })
    .with_delta(0.0);
    spec.prefers_odd_splits = true;
    if randomized {
        spec = spec.randomized();
    }
    spec
}

/// Sample proportion of a 0/1 column. Median bias is at most 1/4 away from
/// the boundary; `ln 2 / m` inflation is available for the full range.
pub fn binomial_proportion() -> EstimatorSpec {
    EstimatorSpec::new("binom", 1, 1, |view, _| {
        let xs = view.sample();
        if let Some(v) = xs.iter().find(|&&v| v != 0.0 && v != 1.0) {
            return Err(Error::estimator("binom", format!("non-binary value {v}")));
        }
        Ok(vec![mean(&xs)])
    })
    .with_delta(0.25)
    .with_inflation(Inflation::LogTwoOverM {
        unit_interval: true,
    })
}

fn top_two(view: &crate::data::DataView<'_>) -> (f64, f64) {
    let mut first = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for v in view.column(view.dataset().roles().sample) {
        if v > first {
            second = first;
            first = v;
        } else if v > second {
            second = v;
        }
    }
    (first, second)
}

/// `2·max − second max`, median unbiased for the right endpoint of a
/// uniform law.
pub fn uniform_endpoint() -> EstimatorSpec {
    EstimatorSpec::new("uniform-endpoint", 1, 2, |view, _| {
        let (b, a) = top_two(view);
        Ok(vec![2.0 * b - a])
    })
    .with_delta(0.0)
}

/// Sample maximum, the uniform-model MLE. Its median bias is 1/2, so it is
/// only usable with the stretched hull.
pub fn uniform_max() -> EstimatorSpec {
    EstimatorSpec::new("uniform-max", 1, 1, |view, _| Ok(vec![top_two(view).0])).with_delta(0.5)
}

/// Unbiased U-statistic for the squared mean,
/// `(n(n−1))⁻¹ Σ_{i≠k} X_i X_k`, optionally clamped at zero.
pub fn squared_mean_ustat(clamp_nonnegative: bool) -> EstimatorSpec {
    let name = if clamp_nonnegative { "sqmean-clamped" } else { "sqmean" };
    EstimatorSpec::new(name, 1, 2, move |view, _| {
        let xs = view.sample();
        let n = xs.len() as f64;
        let m = mean(&xs);
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n;
        let u = (n * m * m - m2) / (n - 1.0);
        Ok(vec![if clamp_nonnegative { u.max(0.0) } else { u }])
    })
    .with_delta(CHI2_ONE_MEDIAN_BIAS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::rng::{StreamRng, Streams};
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn run(spec: &EstimatorSpec, xs: &[f64], rng: &mut StreamRng) -> crate::error::Result<f64> {
        let d = Dataset::univariate(xs.to_vec())?;
        let rows = d.all_rows();
        Ok(spec.estimate(&d.view(&rows), rng)?[0])
    }

    fn rng() -> StreamRng {
        Streams::new(1).estimator(0)
    }

    #[test]
    fn mean_examples() {
        assert_eq!(run(&mean_estimator(), &[1.0, 2.0, 3.0], &mut rng()).unwrap(), 2.0);
        assert_eq!(run(&mean_estimator(), &[5.0], &mut rng()).unwrap(), 5.0);
    }

    #[test]
    fn median_examples() {
        let m = median_estimator(true);
        assert_eq!(run(&m, &[3.0, 1.0, 2.0], &mut rng()).unwrap(), 2.0);
        let mut seen = [0usize; 2];
        for seed in 0..400 {
            let mut r = StreamRng::seed_from_u64(seed);
            match run(&m, &[1.0, 2.0, 3.0, 4.0], &mut r).unwrap() {
                2.0 => seen[0] += 1,
                3.0 => seen[1] += 1,
                v => panic!("unexpected {v}"),
            }
        }
        assert!(seen[0] > 150 && seen[1] > 150, "{seen:?}");
        assert_eq!(run(&median_estimator(false), &[4.0, 1.0, 3.0, 2.0], &mut rng()).unwrap(), 2.0);
    }

    #[test]
    fn binomial_examples() {
        let b = binomial_proportion();
        assert_eq!(run(&b, &[1.0, 1.0, 0.0, 0.0], &mut rng()).unwrap(), 0.5);
        assert_eq!(run(&b, &[0.0, 0.0, 0.0], &mut rng()).unwrap(), 0.0);
        assert!(run(&b, &[0.0, 0.5], &mut rng()).is_err());
    }

    #[test]
    fn uniform_endpoint_examples() {
        let u = uniform_endpoint();
        assert!((run(&u, &[0.2, 0.9, 0.7], &mut rng()).unwrap() - 1.1).abs() < 1e-12);
        assert_eq!(run(&u, &[0.4, 0.4], &mut rng()).unwrap(), 0.4);
        assert!(run(&u, &[0.4], &mut rng()).is_err());
        assert_eq!(run(&uniform_max(), &[0.4, 0.8, 0.1], &mut rng()).unwrap(), 0.8);
    }

    #[test]
    fn sqmean_examples() {
        let s = squared_mean_ustat(false);
        assert!((run(&s, &[1.0, 3.0], &mut rng()).unwrap() - 3.0).abs() < 1e-12);
        assert!((run(&s, &[1.5; 7], &mut rng()).unwrap() - 2.25).abs() < 1e-12);
        assert!(run(&s, &[1.0], &mut rng()).is_err());
        assert!(run(&s, &[1.0, -1.0], &mut rng()).unwrap() < 0.0);
        assert_eq!(run(&squared_mean_ustat(true), &[1.0, -1.0], &mut rng()).unwrap(), 0.0);
        assert!((CHI2_ONE_MEDIAN_BIAS - 0.183).abs() < 5e-4);
        let exact = statrs::function::erf::erf(std::f64::consts::FRAC_1_SQRT_2) - 0.5;
        assert!((CHI2_ONE_MEDIAN_BIAS - exact).abs() < 1e-9);
    }

    fn pairwise(xs: &[f64]) -> f64 {
        let n = xs.len();
        let mut s = 0.0;
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    s += xs[i] * xs[k];
                }
            }
        }
        s / (n * (n - 1)) as f64
    }

    proptest! {
        #[test]
        fn sqmean_matches_pairwise_sum(xs in prop::collection::vec(-10.0f64..10.0, 2..200)) {
            let fast = run(&squared_mean_ustat(false), &xs, &mut rng()).unwrap();
            let slow = pairwise(&xs);
            prop_assert!((fast - slow).abs() <= 1e-10 * (1.0 + slow.abs()), "{fast} vs {slow}");
        }

        #[test]
        fn estimators_are_pure(xs in prop::collection::vec(-5.0f64..5.0, 2..40), seed: u64) {
            for spec in [mean_estimator(), median_estimator(true), uniform_endpoint(), squared_mean_ustat(false)] {
                let a = run(&spec, &xs, &mut StreamRng::seed_from_u64(seed)).unwrap();
                let b = run(&spec, &xs, &mut StreamRng::seed_from_u64(seed)).unwrap();
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
