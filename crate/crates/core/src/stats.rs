//! Shared statistics helpers: goodness-of-fit and binomial intervals.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Outcome of a Pearson chi-square goodness-of-fit test.
#[derive(Debug, Clone, Copy)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of observed counts against expected probabilities.
///
/// Categories whose expected count falls below `MIN_EXPECTED` are pooled into
/// a single bin so the chi-square approximation stays valid for sparse tails.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> GofResult {
    assert_eq!(
        observed.len(),
        probs.len(),
        "observed/probs length mismatch"
    );
    const MIN_EXPECTED: f64 = 5.0;

    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut statistic = 0.0;
    let mut used = 0usize;
    let mut pooled_obs = 0.0;
    let mut pooled_exp = 0.0;
    for (&obs, &p) in observed.iter().zip(probs) {
        let expected = nf * p;
        if expected < MIN_EXPECTED {
            pooled_obs += obs as f64;
            pooled_exp += expected;
        } else {
            let diff = obs as f64 - expected;
            statistic += diff * diff / expected;
            used += 1;
        }
    }
    if pooled_exp > 0.0 {
        let diff = pooled_obs - pooled_exp;
        statistic += diff * diff / pooled_exp;
        used += 1;
    }

    if used < 2 {
        // Degenerate test: a single effective category always fits.
        return GofResult {
            statistic,
            dof: 0,
            p_value: 1.0,
        };
    }
    let dof = used - 1;
    let chi = ChiSquared::new(dof as f64).expect("positive dof");
    let p_value = 1.0 - chi.cdf(statistic);
    GofResult {
        statistic,
        dof,
        p_value,
    }
}

/// Wilson score interval for a binomial proportion at the given confidence.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0, "wilson interval needs at least one trial");
    assert!((0.0..1.0).contains(&confidence) || confidence == 1.0);
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    assert!(!xs.is_empty());
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
