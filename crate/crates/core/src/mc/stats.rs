//! Binomial confidence intervals and Kolmogorov–Smirnov goodness of fit.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{exp, sqrt};

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Smallest sample accepted by [`EmpiricalCdf::new`].
pub const MIN_KS_SAMPLES: usize = 1000;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    let mut lo = (center - half).max(0.0);
    let mut hi = (center + half).min(1.0);
    // keep the point estimate inside despite rounding at the edges
    if successes == 0 {
        lo = 0.0;
    }
    if successes == trials {
        hi = 1.0;
    }
    (lo.min(p), hi.max(p))
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {MIN_KS_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample contains a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub samples: usize,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self, StatsError> {
        if samples.len() < MIN_KS_SAMPLES {
            return Err(StatsError::TooFewSamples(samples.len()));
        }
        if samples.iter().any(|v| v.is_nan()) {
            return Err(StatsError::NonFinite);
        }
        samples.sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of samples `≤ x`.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.sorted.partition_point(|&v| v <= x);
        k as f64 / self.sorted.len() as f64
    }

    /// Two-sided statistic `sup |F_n − F|` against a continuous reference.
    pub fn ks_statistic<F: FnMut(f64) -> f64>(&self, mut reference: F) -> f64 {
        let n = self.sorted.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in self.sorted.iter().enumerate() {
            let f = reference(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            d = d.max(above).max(below);
        }
        d
    }

    pub fn ks_test<F: FnMut(f64) -> f64>(&self, reference: F) -> KsResult {
        let statistic = self.ks_statistic(reference);
        KsResult {
            statistic,
            p_value: ks_p_value(statistic, self.sorted.len()),
            samples: self.sorted.len(),
        }
    }
}

/// Asymptotic two-sided p-value with the finite-sample shift
/// `λ = (√n + 0.12 + 0.11/√n) D`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = sqrt(n as f64);
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

/// `P[K > λ]` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // theta-function form converges fast for small λ
        let c = PI * PI / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            s += exp(-m * m * c);
        }
        return (1.0 - sqrt(2.0 * PI) / lambda * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let t = exp(-2.0 * kf * kf * lambda * lambda);
        s += sign * t;
        if t < 1e-17 * s.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * s).clamp(0.0, 1.0)
}
