//! Seed derivation and binomial interval helpers.

use serde::{Deserialize, Serialize};

/// Standard splitmix64 mixer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed: the trial index is mixed into the master seed through a
/// splitmix64 stream, so any subset of trials reproduces independently of
/// execution order.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(master.wrapping_add((trial + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Confidence-interval method for binomial rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CiMethod {
    /// Normal approximation at three standard deviations.
    #[default]
    Normal3Sigma,
    /// Exact Clopper-Pearson at the matching 99.73% confidence.
    ClopperPearson,
}

/// Two-sided coverage matching three standard deviations.
const THREE_SIGMA_CONFIDENCE: f64 = 0.997_300_203_936_739_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateWithCi {
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn binomial_rate(successes: usize, trials: usize, method: CiMethod) -> RateWithCi {
    if trials == 0 {
        return RateWithCi {
            rate: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
        };
    }
    let p = successes as f64 / trials as f64;
    match method {
        CiMethod::Normal3Sigma => {
            let half = 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
            RateWithCi {
                rate: p,
                ci_low: (p - half).max(0.0),
                ci_high: (p + half).min(1.0),
            }
        }
        CiMethod::ClopperPearson => {
            let alpha = 1.0 - THREE_SIGMA_CONFIDENCE;
            RateWithCi {
                rate: p,
                ci_low: clopper_pearson_low(successes, trials, alpha / 2.0),
                ci_high: clopper_pearson_high(successes, trials, alpha / 2.0),
            }
        }
    }
}

/// P[X <= k] for X ~ Binomial(n, p), computed in log space.
fn binomial_cdf(k: usize, n: usize, p: f64) -> f64 {
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return if k >= n { 1.0 } else { 0.0 };
    }
    let lp = p.ln();
    let lq = (1.0 - p).ln();
    // log pmf(0) = n log q, then pmf(i+1)/pmf(i) = (n-i)/(i+1) * p/q.
    let mut log_pmf = n as f64 * lq;
    let mut cdf = log_pmf.exp();
    for i in 0..k.min(n) {
        log_pmf += ((n - i) as f64).ln() - ((i + 1) as f64).ln() + lp - lq;
        cdf += log_pmf.exp();
    }
    cdf.min(1.0)
}

fn clopper_pearson_low(k: usize, n: usize, tail: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    // Largest p with P[X >= k] <= tail, found by bisection on
    // 1 - cdf(k-1; n, p) which is increasing in p.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - binomial_cdf(k - 1, n, mid) > tail {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

fn clopper_pearson_high(k: usize, n: usize, tail: f64) -> f64 {
    if k == n {
        return 1.0;
    }
    // Smallest p with P[X <= k] <= tail.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if binomial_cdf(k, n, mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_seeds_differ_and_reproduce() {
        let a = trial_seed(7, 0);
        let b = trial_seed(7, 1);
        assert_ne!(a, b);
        assert_eq!(a, trial_seed(7, 0));
    }

    #[test]
    fn normal_interval_brackets_rate() {
        let r = binomial_rate(500, 1000, CiMethod::Normal3Sigma);
        assert!((r.rate - 0.5).abs() < 1e-12);
        assert!(r.ci_low < 0.5 && r.ci_high > 0.5);
        let half = r.ci_high - r.rate;
        assert!((half - 3.0 * (0.25f64 / 1000.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn clopper_pearson_contains_true_rate() {
        let r = binomial_rate(30, 100, CiMethod::ClopperPearson);
        assert!(r.ci_low < 0.3 && r.ci_high > 0.3);
        assert!(r.ci_low > 0.0 && r.ci_high < 1.0);
        let edge = binomial_rate(0, 50, CiMethod::ClopperPearson);
        assert_eq!(edge.ci_low, 0.0);
        assert!(edge.ci_high > 0.0);
    }

    #[test]
    fn binomial_cdf_sane() {
        assert!((binomial_cdf(5, 10, 0.5) - 0.623_046_875).abs() < 1e-9);
        assert!((binomial_cdf(10, 10, 0.3) - 1.0).abs() < 1e-12);
    }
}
