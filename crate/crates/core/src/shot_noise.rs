//! Photon-counting noise and Monte Carlo error propagation.
//!
//! Every detector probability is replaced by `k / N` with `k ~ Binomial(N, p)`,
//! independently per setting and per detector. Trial `i` draws from its own
//! ChaCha stream `i` under the configured seed, so results do not depend on
//! the order in which trials run.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::ComplexValue;
use crate::pipeline::{plan_for, reconstruct_from_records, PipelineOptions};
use crate::protocol::{detect_plan, DetectionRecord, ProtocolConfig};
use crate::reconstruction::{EstimationMethod, Observable, ReconstructionResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingModel {
    /// Use the exact probabilities; the infinite-count limit.
    Exact,
    Binomial { pairs_per_setting: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountingConfig {
    pub model: SamplingModel,
    pub trials: usize,
    pub seed: u64,
}

impl CountingConfig {
    pub fn binomial(pairs_per_setting: u64, trials: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            model: SamplingModel::Binomial { pairs_per_setting },
            trials,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn exact(trials: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            model: SamplingModel::Exact,
            trials,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if let SamplingModel::Binomial { pairs_per_setting: 0 } = self.model {
            return Err(Error::InvalidConfig("pairs per setting must be at least 1".into()));
        }
        Ok(())
    }
}

/// What to do when noisy probabilities leave the invertible region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FailurePolicy {
    /// Drop the trial and count it.
    #[default]
    Reject,
    /// Clamp the inversion discriminant to the boundary.
    Clamp,
}

/// Independent random stream for Monte Carlo trial `trial`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One `Binomial(pairs, p)` draw.
pub fn sample_counts<R: Rng + ?Sized>(p: f64, pairs: u64, rng: &mut R) -> u64 {
    let p = p.clamp(0.0, 1.0);
    Binomial::new(pairs, p)
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}

pub fn sample_counts_seeded(p: f64, pairs: u64, seed: u64) -> u64 {
    sample_counts(p, pairs, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Replaces each probability by a sampled frequency; `p1` before `p2`,
/// records in order.
pub fn sample_records<R: Rng + ?Sized>(
    records: &[DetectionRecord],
    pairs: u64,
    rng: &mut R,
) -> Vec<DetectionRecord> {
    records
        .iter()
        .map(|r| {
            let p1 = sample_counts(r.p1, pairs, rng) as f64 / pairs as f64;
            let p2 = sample_counts(r.p2, pairs, rng) as f64 / pairs as f64;
            DetectionRecord {
                observable: r.observable,
                p1,
                p2,
                pairs: Some(pairs),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyEstimate<T> {
    pub mean: T,
    /// Sample standard deviation; componentwise for complex values.
    pub std: T,
    pub samples_kept: usize,
    pub samples_rejected: usize,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn real_estimate(values: &[f64], rejected: usize) -> NoisyEstimate<f64> {
    let (mean, std) = mean_std(values.iter().copied());
    NoisyEstimate {
        mean,
        std,
        samples_kept: values.len(),
        samples_rejected: rejected,
    }
}

pub fn complex_estimate(values: &[ComplexValue], rejected: usize) -> NoisyEstimate<ComplexValue> {
    let (mre, sre) = mean_std(values.iter().map(|v| v.re));
    let (mim, sim) = mean_std(values.iter().map(|v| v.im));
    NoisyEstimate {
        mean: Complex64::new(mre, mim),
        std: Complex64::new(sre, sim),
        samples_kept: values.len(),
        samples_rejected: rejected,
    }
}

#[derive(Debug, Clone)]
pub struct MonteCarloReport {
    pub dims: (usize, usize),
    /// Row-major per-component amplitude statistics.
    pub amplitudes: Vec<NoisyEstimate<ComplexValue>>,
    pub weak_values: Vec<NoisyEstimate<ComplexValue>>,
    pub modulars: Vec<(Observable, NoisyEstimate<ComplexValue>)>,
    pub normalizer: NoisyEstimate<f64>,
    /// Accepted trial reconstructions, in trial order.
    pub samples: Vec<ReconstructionResult>,
    /// Rejected trials with the reason, in trial order.
    pub rejections: Vec<(usize, Error)>,
}

impl MonteCarloReport {
    pub fn samples_kept(&self) -> usize {
        self.samples.len()
    }

    pub fn samples_rejected(&self) -> usize {
        self.rejections.len()
    }
}

/// Runs the full pipeline under counting noise `counting.trials` times.
pub fn monte_carlo(
    cfg: &ProtocolConfig,
    options: PipelineOptions,
    counting: CountingConfig,
    policy: FailurePolicy,
) -> Result<MonteCarloReport> {
    cfg.validate()?;
    counting.validate()?;
    if options.method == EstimationMethod::Definitional {
        return Err(Error::InvalidConfig(
            "counting noise needs a detector-based method".into(),
        ));
    }
    let plan = plan_for(cfg)?;
    let exact = detect_plan(cfg, &plan)?;
    let mut options = options;
    if policy == FailurePolicy::Clamp {
        options.inversion.clamp = true;
    }

    let outcomes: Vec<Result<ReconstructionResult>> = (0..counting.trials)
        .into_par_iter()
        .map(|trial| {
            let records = match counting.model {
                SamplingModel::Exact => exact.clone(),
                SamplingModel::Binomial { pairs_per_setting } => {
                    let mut rng = trial_rng(counting.seed, trial as u64);
                    sample_records(&exact, pairs_per_setting, &mut rng)
                }
            };
            reconstruct_from_records(&records, cfg, &plan, options)
        })
        .collect();

    let mut samples = Vec::with_capacity(counting.trials);
    let mut rejections = Vec::new();
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => samples.push(r),
            Err(e) => rejections.push((trial, e)),
        }
    }
    if samples.is_empty() {
        return Err(Error::AllTrialsRejected {
            trials: counting.trials,
        });
    }

    let rejected = rejections.len();
    let (m, n) = cfg.system_dims();
    let column = |f: &dyn Fn(&ReconstructionResult) -> ComplexValue| {
        complex_estimate(&samples.iter().map(f).collect::<Vec<_>>(), rejected)
    };
    let amplitudes = (0..m * n)
        .map(|i| column(&|r| r.amplitudes()[i]))
        .collect();
    let weak_values = (0..m * n)
        .map(|i| column(&|r| r.weak_values()[i]))
        .collect();
    let modulars = plan
        .observables()
        .iter()
        .map(|obs| (*obs, column(&|r| r.modulars.get(obs).expect("complete plan"))))
        .collect();
    let normalizer = real_estimate(
        &samples.iter().map(|r| r.normalizer).collect::<Vec<_>>(),
        rejected,
    );

    Ok(MonteCarloReport {
        dims: (m, n),
        amplitudes,
        weak_values,
        modulars,
        normalizer,
        samples,
        rejections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_probabilities() {
        for seed in 0..5 {
            assert_eq!(sample_counts_seeded(0.0, 12345, seed), 0);
            assert_eq!(sample_counts_seeded(1.0, 1000, seed), 1000);
        }
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let a = sample_counts_seeded(0.37, 100_000, 42);
        let b = sample_counts_seeded(0.37, 100_000, 42);
        assert_eq!(a, b);
        let mut r1 = trial_rng(7, 3);
        let mut r2 = trial_rng(7, 3);
        assert_eq!(r1.random::<u64>(), r2.random::<u64>());
        let mut r3 = trial_rng(7, 4);
        assert_ne!(trial_rng(7, 3).random::<u64>(), r3.random::<u64>());
    }

    #[test]
    fn counting_config_validation() {
        assert!(CountingConfig::binomial(0, 10, 1).is_err());
        assert!(CountingConfig::binomial(10, 0, 1).is_err());
        assert!(CountingConfig::exact(1, 0).is_ok());
    }

    #[test]
    fn statistics_of_known_samples() {
        let est = real_estimate(&[1.0, 2.0, 3.0, 4.0], 2);
        assert_eq!(est.mean, 2.5);
        assert!((est.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!((est.samples_kept, est.samples_rejected), (4, 2));
        assert_eq!(real_estimate(&[3.0], 0).std, 0.0);
    }
}
