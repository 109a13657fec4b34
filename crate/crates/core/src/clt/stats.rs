//! Sample statistics with error bars.

use serde::{Deserialize, Serialize};

/// A point estimate and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// `|value - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Within `k` standard errors of `target`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        self.z_score(target) <= k
    }
}

/// Sample mean and its plain standard error.
pub fn mean_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return Estimate {
            value: mean,
            stderr: f64::NAN,
        };
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
    }
}

/// Raw power sums `(n, sum x, sum x^2, sum x^3, sum x^4)`.
type Sums = [f64; 5];

fn power_sums(xs: &[f64]) -> Sums {
    let mut s = [xs.len() as f64, 0.0, 0.0, 0.0, 0.0];
    for &x in xs {
        let x2 = x * x;
        s[1] += x;
        s[2] += x2;
        s[3] += x2 * x;
        s[4] += x2 * x2;
    }
    s
}

/// Central moments `(mean, m2, m3, m4)` from power sums (population norms).
fn central(s: &Sums) -> (f64, f64, f64, f64) {
    let n = s[0];
    let mu = s[1] / n;
    let (e2, e3, e4) = (s[2] / n, s[3] / n, s[4] / n);
    let m2 = e2 - mu * mu;
    let m3 = e3 - 3.0 * mu * e2 + 2.0 * mu.powi(3);
    let m4 = e4 - 4.0 * mu * e3 + 6.0 * mu * mu * e2 - 3.0 * mu.powi(4);
    (mu, m2, m3, m4)
}

/// Delete-one jackknife of a statistic that depends on the data only through
/// its power sums. Runs in linear time.
fn jackknife_sums(xs: &[f64], stat: impl Fn(&Sums) -> f64) -> Estimate {
    let full = power_sums(xs);
    let value = stat(&full);
    let n = xs.len() as f64;
    let loo: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let x2 = x * x;
            let s = [full[0] - 1.0, full[1] - x, full[2] - x2, full[3] - x2 * x, full[4] - x2 * x2];
            stat(&s)
        })
        .collect();
    let bar = loo.iter().sum::<f64>() / n;
    let var = (n - 1.0) / n * loo.iter().map(|t| (t - bar).powi(2)).sum::<f64>();
    Estimate {
        value,
        stderr: var.sqrt(),
    }
}

pub fn variance_estimate(xs: &[f64]) -> Estimate {
    jackknife_sums(xs, |s| {
        let (_, m2, _, _) = central(s);
        m2 * s[0] / (s[0] - 1.0)
    })
}

pub fn skewness_estimate(xs: &[f64]) -> Estimate {
    jackknife_sums(xs, |s| {
        let (_, m2, m3, _) = central(s);
        m3 / m2.powf(1.5)
    })
}

pub fn excess_kurtosis_estimate(xs: &[f64]) -> Estimate {
    jackknife_sums(xs, |s| {
        let (_, m2, _, m4) = central(s);
        m4 / (m2 * m2) - 3.0
    })
}

/// Jackknife mean of `exp(i x)` over the sample, real and imaginary parts.
///
/// For a plain mean the delete-one jackknife reproduces the usual standard
/// error; it is kept in jackknife form so every estimator here shares one
/// error model.
pub fn char_function_estimate(xs: &[f64]) -> (Estimate, Estimate) {
    let re: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
    let im: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
    (
        jackknife_sums(&re, |s| s[1] / s[0]),
        jackknife_sums(&im, |s| s[1] / s[0]),
    )
}

pub use crate::spectral::fundamental::least_squares_slope;
