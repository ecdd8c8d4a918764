//! Monte Carlo summaries with standard errors.

use serde::{Deserialize, Serialize};

/// A point estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// True when `target` lies within `k` standard errors.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }

    /// Number of standard errors between the estimate and `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.value == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - target) / self.std_error
        }
    }
}

/// Fraction of successes with the binomial standard error.
pub fn proportion(successes: u64, trials: u64) -> Estimate {
    assert!(trials > 0, "need at least one trial");
    let p = successes as f64 / trials as f64;
    Estimate { value: p, std_error: (p * (1.0 - p) / trials as f64).sqrt() }
}

/// Sample mean and unbiased variance of a scalar series, each with a standard
/// error. The variance error uses the fourth central moment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub n: usize,
    pub mean: Estimate,
    pub variance: Estimate,
}

impl MomentSummary {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        assert!(n >= 2, "need at least two samples");
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
        let var = m2 * nf / (nf - 1.0);
        Self {
            n,
            mean: Estimate { value: mean, std_error: (var / nf).sqrt() },
            variance: Estimate { value: var, std_error: ((m4 - m2 * m2).max(0.0) / nf).sqrt() },
        }
    }

    /// Standard error of `variance - mean`, from the joint second moments of
    /// `x` and `(x - μ)²`.
    pub fn dispersion(xs: &[f64]) -> Estimate {
        let s = Self::from_samples(xs);
        let nf = xs.len() as f64;
        let mu = s.mean.value;
        let m2 = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / nf;
        let m3 = xs.iter().map(|x| (x - mu).powi(3)).sum::<f64>() / nf;
        let m4 = xs.iter().map(|x| (x - mu).powi(4)).sum::<f64>() / nf;
        // Var((x-μ)² - x) = μ4 - μ2² - 2μ3 + μ2
        let v = (m4 - m2 * m2 - 2.0 * m3 + m2).max(0.0);
        Estimate { value: s.variance.value - s.mean.value, std_error: (v / nf).sqrt() }
    }
}

/// Sample covariance with a delta-method standard error.
pub fn covariance(xs: &[f64], ys: &[f64]) -> Estimate {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    assert!(n >= 2, "need at least two samples");
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let c = prods.iter().sum::<f64>() / nf;
    let v = prods.iter().map(|p| (p - c).powi(2)).sum::<f64>() / (nf - 1.0);
    Estimate { value: c * nf / (nf - 1.0), std_error: (v / nf).sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_a_small_series() {
        let s = MomentSummary::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean.value, 2.5);
        assert!((s.variance.value - 5.0 / 3.0).abs() < 1e-15);
        assert!(proportion(3, 4).within(0.75, 0.0));
        let c = covariance(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]);
        assert!((c.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn dispersion_of_a_constant_is_minus_the_mean() {
        let d = MomentSummary::dispersion(&[3.0; 10]);
        assert_eq!(d.value, -3.0);
        assert_eq!(d.std_error, 0.0);
    }
}
