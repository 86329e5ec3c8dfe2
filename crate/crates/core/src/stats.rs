//! Summary statistics used by every metric family.
//!
//! Continuous quantities are reported as median, interquartile range and a
//! 95% percentile-bootstrap interval for the median. Success proportions are
//! reported with Wilson score intervals.
//!
//! Quantiles use linear interpolation at index `h = (n - 1) q` over the sorted
//! sample (Hyndman & Fan type 7, the default of R and NumPy).
//!
//! Resampling draws from ChaCha8 seeded through `SeedableRng::seed_from_u64`,
//! so a `(samples, config)` pair always yields the same interval on every
//! platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Proportion, SummaryStat};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("quantile level {0} outside [0, 1]")]
    QuantileOutOfRange(f64),
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("confidence level {0} outside (0, 1)")]
    InvalidConfidence(f64),
    #[error("bootstrap needs at least {min} resamples, got {got}")]
    TooFewResamples { min: usize, got: usize },
    #[error("{successes} successes out of {trials} trials")]
    InvalidCounts { successes: u64, trials: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl BootstrapConfig {
    pub const MIN_RESAMPLES: usize = 100;

    pub fn new(resamples: usize, seed: u64) -> Self {
        Self {
            resamples,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        if self.resamples < Self::MIN_RESAMPLES {
            return Err(StatsError::TooFewResamples {
                min: Self::MIN_RESAMPLES,
                got: self.resamples,
            });
        }
        check_confidence(self.confidence)
    }

    /// Same configuration on an independent random stream.
    pub fn with_stream(&self, stream: u64) -> Self {
        Self {
            seed: derive_seed(self.seed, stream),
            ..*self
        }
    }
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resamples: 2000,
            confidence: 0.95,
            seed: 42,
        }
    }
}

fn check_confidence(c: f64) -> Result<(), StatsError> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidConfidence(c))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent seed for a numbered sub-stream.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sorted_finite(samples: &[f64]) -> Result<Vec<f64>, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Type-7 quantile: linear interpolation at `h = (n - 1) q`.
pub fn quantile(samples: &[f64], q: f64) -> Result<f64, StatsError> {
    if !(0.0..=1.0).contains(&q) {
        return Err(StatsError::QuantileOutOfRange(q));
    }
    let sorted = sorted_finite(samples)?;
    Ok(quantile_sorted(&sorted, q))
}

pub fn median(samples: &[f64]) -> Result<f64, StatsError> {
    quantile(samples, 0.5)
}

/// Arithmetic mean, accumulated as offsets from the first sample so that a
/// constant sample returns that constant exactly.
pub fn mean(samples: &[f64]) -> Result<f64, StatsError> {
    let (&first, rest) = samples.split_first().ok_or(StatsError::EmptySample)?;
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let offset: f64 = rest.iter().map(|x| x - first).sum();
    Ok(first + offset / samples.len() as f64)
}

fn median_in_place(buf: &mut [f64]) -> f64 {
    buf.sort_by(f64::total_cmp);
    quantile_sorted(buf, 0.5)
}

/// Percentile bootstrap interval for an arbitrary statistic. Draws index the
/// sorted samples, so the interval does not depend on input order.
pub fn bootstrap_ci<F>(samples: &[f64], cfg: &BootstrapConfig, statistic: F) -> Result<(f64, f64), StatsError>
where
    F: Fn(&mut [f64]) -> f64,
{
    cfg.validate()?;
    if samples.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut samples = samples.to_vec();
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    let mut rng = rng_from_seed(cfg.seed);
    let mut buf = vec![0.0; n];
    let mut stats = Vec::with_capacity(cfg.resamples);
    for _ in 0..cfg.resamples {
        for slot in buf.iter_mut() {
            *slot = samples[rng.random_range(0..n)];
        }
        stats.push(statistic(&mut buf));
    }
    stats.sort_by(f64::total_cmp);
    let alpha = 1.0 - cfg.confidence;
    Ok((
        quantile_sorted(&stats, alpha / 2.0),
        quantile_sorted(&stats, 1.0 - alpha / 2.0),
    ))
}

/// Median, quartiles and a percentile-bootstrap interval for the median.
pub fn summarize(samples: &[f64], cfg: &BootstrapConfig) -> Result<SummaryStat, StatsError> {
    let sorted = sorted_finite(samples)?;
    let ci95 = bootstrap_ci(samples, cfg, median_in_place)?;
    Ok(SummaryStat {
        n: sorted.len(),
        median: quantile_sorted(&sorted, 0.5),
        q1: quantile_sorted(&sorted, 0.25),
        q3: quantile_sorted(&sorted, 0.75),
        ci95,
        method: SummaryStat::METHOD.to_string(),
    })
}

/// Inverse of the standard normal CDF.
///
/// Peter Acklam's rational approximation (relative error below 1.15e-9 over
/// the open unit interval): a central rational function on
/// `[0.02425, 0.97575]` and tail expansions in `sqrt(-2 ln p)` outside it.
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

/// Two-sided critical value for a confidence level, e.g. 1.959964 at 0.95.
pub fn z_for_confidence(confidence: f64) -> f64 {
    normal_quantile(1.0 - (1.0 - confidence) / 2.0)
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64), StatsError> {
    if trials == 0 {
        return Err(StatsError::EmptySample);
    }
    if successes > trials {
        return Err(StatsError::InvalidCounts { successes, trials });
    }
    check_confidence(confidence)?;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = z_for_confidence(confidence);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).clamp(0.0, p)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).clamp(p, 1.0)
    };
    Ok((lo, hi))
}

pub fn proportion(successes: u64, trials: u64, confidence: f64) -> Result<Proportion, StatsError> {
    let wilson95 = wilson_interval(successes, trials, confidence)?;
    Ok(Proportion {
        successes,
        trials,
        point: successes as f64 / trials as f64,
        wilson95,
    })
}
