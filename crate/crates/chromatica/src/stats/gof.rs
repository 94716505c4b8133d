//! Cramér–von Mises goodness-of-fit testing.
//!
//! The statistic is computed from its definition,
//! `W² = 1/(12n) + Σ ((2i-1)/(2n) - F(x_(i)))²`, against a candidate family
//! whose parameters are fitted from the samples. Because parameters are
//! estimated, p-values come from a parametric bootstrap that refits per
//! replicate; standard asymptotic tables would not apply. Replicates draw
//! their RNG from seeds derived as `seed + replicate_index`, so the result
//! is reproducible and independent of evaluation order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, DiscreteCDF};

use super::StatsError;

/// Distribution families the pooled degree data is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Candidate {
    Normal,
    Cauchy,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GofMethod {
    ParametricBootstrap,
}

/// Degrees are shifted by this amount before fitting a Poisson, moving the
/// ordinary [-7, 7] window onto non-negative support.
pub const POISSON_SHIFT: f64 = 7.0;

/// Fitted parameters of the candidate family, echoed in results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FitParams {
    Normal { mean: f64, sd: f64 },
    Cauchy { location: f64, scale: f64 },
    Poisson { lambda: f64, shift: f64 },
}

/// Outcome of one test run. Bit-identical for identical
/// (samples, candidate, reps, seed).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofResult {
    pub candidate: Candidate,
    pub method: GofMethod,
    pub statistic: f64,
    pub p_value: f64,
    pub bootstrap_reps: u32,
    pub seed: u64,
    pub sample_count: usize,
    pub params: FitParams,
}

enum Fitted {
    Normal(statrs::distribution::Normal, rand_distr::Normal<f64>),
    Cauchy(statrs::distribution::Cauchy, rand_distr::Cauchy<f64>),
    Poisson(statrs::distribution::Poisson, rand_distr::Poisson<f64>),
}

impl Fitted {
    fn cdf(&self, x: f64) -> f64 {
        match self {
            Fitted::Normal(d, _) => d.cdf(x),
            Fitted::Cauchy(d, _) => d.cdf(x),
            Fitted::Poisson(d, _) => {
                let shifted = x + POISSON_SHIFT;
                if shifted < 0.0 {
                    0.0
                } else {
                    d.cdf(shifted.floor() as u64)
                }
            }
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Fitted::Normal(_, d) => d.sample(rng),
            Fitted::Cauchy(_, d) => d.sample(rng),
            Fitted::Poisson(_, d) => d.sample(rng) - POISSON_SHIFT,
        }
    }

    fn params(&self) -> FitParams {
        match self {
            Fitted::Normal(d, _) => FitParams::Normal {
                mean: d.mean().unwrap(),
                sd: d.std_dev().unwrap(),
            },
            Fitted::Cauchy(d, _) => FitParams::Cauchy {
                location: d.location(),
                scale: d.scale(),
            },
            Fitted::Poisson(d, _) => FitParams::Poisson {
                lambda: d.lambda(),
                shift: POISSON_SHIFT,
            },
        }
    }
}

use statrs::statistics::Distribution as StatrsDistribution;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Type-7 (linear interpolation) quantile of pre-sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Fit the candidate family. Normal: sample mean and (n-1) standard
/// deviation. Cauchy: median and half the interquartile range. Poisson:
/// mean of the samples shifted by [`POISSON_SHIFT`]. Fails when the family
/// degenerates on this data (zero sd, zero IQR, non-positive shifted mean).
fn fit(candidate: Candidate, samples: &[f64], sorted: &[f64]) -> Result<Fitted, StatsError> {
    match candidate {
        Candidate::Normal => {
            let m = mean(samples);
            let var = samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
                / (samples.len() - 1) as f64;
            let sd = var.sqrt();
            if sd <= 0.0 {
                return Err(StatsError::DegenerateSamples);
            }
            Ok(Fitted::Normal(
                statrs::distribution::Normal::new(m, sd).expect("validated params"),
                rand_distr::Normal::new(m, sd).expect("validated params"),
            ))
        }
        Candidate::Cauchy => {
            let location = quantile(sorted, 0.5);
            let scale = (quantile(sorted, 0.75) - quantile(sorted, 0.25)) / 2.0;
            if scale <= 0.0 {
                return Err(StatsError::DegenerateSamples);
            }
            Ok(Fitted::Cauchy(
                statrs::distribution::Cauchy::new(location, scale).expect("validated params"),
                rand_distr::Cauchy::new(location, scale).expect("validated params"),
            ))
        }
        Candidate::Poisson => {
            let lambda = mean(samples) + POISSON_SHIFT;
            if lambda <= 0.0 {
                return Err(StatsError::DegenerateSamples);
            }
            Ok(Fitted::Poisson(
                statrs::distribution::Poisson::new(lambda).expect("validated params"),
                rand_distr::Poisson::new(lambda).expect("validated params"),
            ))
        }
    }
}

/// The Cramér–von Mises statistic of `sorted` (ascending) samples against a
/// CDF.
pub fn cvm_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut w2 = 1.0 / (12.0 * n);
    for (i, &x) in sorted.iter().enumerate() {
        let u = (2.0 * (i as f64 + 1.0) - 1.0) / (2.0 * n);
        let diff = u - cdf(x);
        w2 += diff * diff;
    }
    w2
}

fn sorted_copy(samples: &[f64]) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finiteness checked"));
    sorted
}

/// Test `samples` against the fitted `candidate` family.
///
/// A replicate whose refit degenerates (possible only for discrete
/// families drawing identical values) counts as an exceedance, keeping the
/// p-value conservative. The p-value is `(1 + #exceedances) / (1 + reps)`.
pub fn cvm_test(
    samples: &[f64],
    candidate: Candidate,
    bootstrap_reps: u32,
    seed: u64,
) -> Result<GofResult, StatsError> {
    if samples.len() < 8 {
        return Err(StatsError::TooFewSamples(samples.len()));
    }
    if bootstrap_reps < 100 {
        return Err(StatsError::TooFewReps(bootstrap_reps));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFiniteSamples);
    }
    let sorted = sorted_copy(samples);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(StatsError::DegenerateSamples);
    }

    let fitted = fit(candidate, samples, &sorted)?;
    let observed = cvm_statistic(&sorted, |x| fitted.cdf(x));

    let n = samples.len();
    let mut exceedances: u64 = 0;
    for rep in 0..bootstrap_reps {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(rep as u64));
        let replicate: Vec<f64> = (0..n).map(|_| fitted.sample(&mut rng)).collect();
        let rep_sorted = sorted_copy(&replicate);
        let w2 = match fit(candidate, &replicate, &rep_sorted) {
            Ok(refit) => cvm_statistic(&rep_sorted, |x| refit.cdf(x)),
            Err(_) => f64::INFINITY,
        };
        if w2 >= observed {
            exceedances += 1;
        }
    }
    let p_value = (1 + exceedances) as f64 / (1 + bootstrap_reps as u64) as f64;

    Ok(GofResult {
        candidate,
        method: GofMethod::ParametricBootstrap,
        statistic: observed,
        p_value,
        bootstrap_reps,
        seed,
        sample_count: n,
        params: fitted.params(),
    })
}
