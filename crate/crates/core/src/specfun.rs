//! Special functions used by the closed-form link statistics.
//!
//! Everything here works on `f64` and is written against `libm` so the kernel
//! stays usable without `std`. Routines that would overflow for moderate
//! arguments (`I_n`, products such as `exp(u) * erfc(v)`) have scaled or
//! log-space companions; the link formulas use those.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::{exp, fabs, floor, log, sin, sqrt};

const FRAC_2_SQRT_PI: f64 = core::f64::consts::FRAC_2_SQRT_PI;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Below this argument `erf` is summed from its power series; above it `erfc`
/// comes from the continued fraction.
const ERF_SERIES_LIMIT: f64 = 2.0;

/// Largest argument for which the scaled Bessel functions are summed directly.
const BESSEL_SERIES_LIMIT: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SpecialFnError {
    #[error("I_{order}({x}) overflows f64; use the exponentially scaled form")]
    Overflow { order: u32, x: f64 },
    #[error("gamma function has a pole at {0}")]
    Pole(f64),
    #[error("series did not converge within {0} terms")]
    NotConverged(usize),
    #[error("argument {0} outside the function's domain")]
    Domain(f64),
}

/// Convergence controls for the series and continued-fraction evaluators.
///
/// `max_terms` caps the number of series terms or continued-fraction steps.
/// The Miller recurrence used for Bessel sequences sizes itself from
/// `rel_tol` alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalTolerance {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl EvalTolerance {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self, SpecialFnError> {
        if !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(SpecialFnError::Domain(rel_tol));
        }
        if max_terms == 0 {
            return Err(SpecialFnError::NotConverged(0));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

impl Default for EvalTolerance {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 500,
        }
    }
}

/// Error function, `(2/√π) ∫₀ˣ e^{−t²} dt`.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    let ax = fabs(x);
    let v = if ax < ERF_SERIES_LIMIT {
        erf_series(ax)
    } else {
        1.0 - erfc_cf(ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Complementary error function without cancellation for large `x`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < ERF_SERIES_LIMIT {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// Scaled complementary error function `e^{x²} erfc(x)` for `x ≥ 0`.
///
/// Negative arguments are accepted but the result grows like `2e^{x²}`.
pub fn erfcx(x: f64) -> f64 {
    if x < ERF_SERIES_LIMIT {
        exp(x * x) * erfc(x)
    } else {
        erfcx_cf(x, EvalTolerance::default())
    }
}

/// `ln erfc(x)`, finite for every finite `x`.
pub fn ln_erfc(x: f64) -> f64 {
    if x < ERF_SERIES_LIMIT {
        log(erfc(x))
    } else {
        log(erfcx_cf(x, EvalTolerance::default())) - x * x
    }
}

// erf(x) = (2/√π) e^{−x²} Σ 2ⁿ x^{2n+1} / (2n+1)!!  (all terms positive)
fn erf_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0u32;
    while term > f64::EPSILON * 0.25 * sum && n < 200 {
        n += 1;
        term *= 2.0 * x2 / f64::from(2 * n + 1);
        sum += term;
    }
    FRAC_2_SQRT_PI * exp(-x2) * sum
}

fn erfc_cf(x: f64) -> f64 {
    erfcx_cf(x, EvalTolerance::default()) * exp(-x * x)
}

// e^{x²} erfc(x) = 1 / (√π (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))))
// evaluated with the modified Lentz algorithm.
fn erfcx_cf(x: f64, tol: EvalTolerance) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    let eps = tol.rel_tol.min(1e-15);
    for n in 1..=tol.max_terms {
        let a = n as f64 * 0.5;
        d = x + a * d;
        if fabs(d) < tiny {
            d = tiny;
        }
        d = 1.0 / d;
        c = x + a / c;
        if fabs(c) < tiny {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if fabs(delta - 1.0) < eps {
            break;
        }
    }
    1.0 / (SQRT_PI * f)
}

/// Upper tail of the standard normal, `Q(x) = erfc(x/√2)/2`.
pub fn gauss_q(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (Γ(x+1) form)
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// Gamma function. Poles at the non-positive integers are rejected.
pub fn gamma_fn(x: f64) -> Result<f64, SpecialFnError> {
    if !x.is_finite() {
        return Err(SpecialFnError::Domain(x));
    }
    if x <= 0.0 && floor(x) == x {
        return Err(SpecialFnError::Pole(x));
    }
    if x < 0.5 {
        // reflection
        let g = gamma_fn(1.0 - x)?;
        return Ok(PI / (sin(PI * x) * g));
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(sqrt(2.0 * PI) * libm::pow(t, z + 0.5) * exp(-t) * lanczos_sum(z))
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64, SpecialFnError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecialFnError::Domain(x));
    }
    if x < 0.5 {
        return Ok(log(PI / sin(PI * x)) - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * log(2.0 * PI) + (z + 0.5) * log(t) - t + log(lanczos_sum(z)))
}

/// Modified Bessel function of the first kind `I_order(x)` by its ascending
/// series.
pub fn bessel_i(order: u32, x: f64) -> Result<f64, SpecialFnError> {
    bessel_i_with(order, x, EvalTolerance::default())
}

pub fn bessel_i_with(order: u32, x: f64, tol: EvalTolerance) -> Result<f64, SpecialFnError> {
    let (ln_lead, sum) = bessel_series(order, x, tol)?;
    if sum == 0.0 {
        return Ok(0.0);
    }
    let v = exp(ln_lead) * sum;
    if !v.is_finite() {
        return Err(SpecialFnError::Overflow { order, x });
    }
    Ok(v)
}

/// Exponentially scaled Bessel function `e^{−x} I_order(x)`.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64, SpecialFnError> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(SpecialFnError::Domain(x));
    }
    if x <= BESSEL_SERIES_LIMIT {
        let (ln_lead, sum) = bessel_series(order, x, EvalTolerance::default())?;
        if sum == 0.0 {
            return Ok(0.0);
        }
        return Ok(exp(ln_lead - x) * sum);
    }
    let seq = scaled_bessel_sequence(x, order as usize, EvalTolerance::default().rel_tol);
    Ok(seq[order as usize])
}

// Returns (ln of the leading term, series normalised to the leading term).
fn bessel_series(order: u32, x: f64, tol: EvalTolerance) -> Result<(f64, f64), SpecialFnError> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(SpecialFnError::Domain(x));
    }
    if x == 0.0 {
        return Ok((0.0, if order == 0 { 1.0 } else { 0.0 }));
    }
    let n = f64::from(order);
    let ln_fact = if order <= 170 {
        (2..=order).map(|k| log(f64::from(k))).sum()
    } else {
        ln_gamma(n + 1.0)?
    };
    let ln_lead = if order == 0 { 0.0 } else { n * log(0.5 * x) - ln_fact };
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=tol.max_terms {
        let kf = k as f64;
        term *= q / (kf * (kf + n));
        sum += term;
        if !sum.is_finite() {
            return Err(SpecialFnError::Overflow { order, x });
        }
        if term < tol.rel_tol * 1e-4 * sum && kf > 0.5 * x {
            return Ok((ln_lead, sum));
        }
    }
    Err(SpecialFnError::NotConverged(tol.max_terms))
}

/// `[e^{−x} I_0(x), …, e^{−x} I_{n_max}(x)]` by Miller's backward recurrence,
/// normalised with `I_0 + 2 Σ_{k≥1} I_k = e^{x}`.
///
/// The returned vector may be longer than `n_max + 1`; trailing entries are
/// valid but negligible.
pub fn scaled_bessel_sequence(x: f64, n_max: usize, rel_tol: f64) -> Vec<f64> {
    if x <= 0.0 {
        let mut v = vec![0.0; n_max + 1];
        v[0] = 1.0;
        return v;
    }
    if x < 1.0 {
        // the recurrence ratio 2k/x overflows for tiny x; the series is cheap here
        return (0..=n_max + 30)
            .map(|k| match bessel_series(k as u32, x, EvalTolerance::default()) {
                Ok((ln_lead, sum)) => exp(ln_lead - x) * sum,
                Err(_) => 0.0,
            })
            .collect();
    }
    // I_k/I_0 ≈ exp(−k²/2x) for k ≪ x and decays faster beyond, so the
    // start index only has to clear that Gaussian envelope.
    let depth = sqrt(2.0 * x * (log(1.0 / rel_tol) + 12.0));
    let start = n_max + depth as usize + 30;
    let mut v = vec![0.0; start + 2];
    v[start] = 1e-280;
    for k in (1..=start).rev() {
        let next = (2.0 * k as f64 / x) * v[k] + v[k + 1];
        v[k - 1] = next;
        if next > 1e250 {
            for t in &mut v[k - 1..=start] {
                *t *= 1e-250;
            }
        }
    }
    let total = v[0] + 2.0 * v[1..].iter().sum::<f64>();
    for t in &mut v {
        *t /= total;
    }
    v.truncate(start + 1);
    v
}

/// Generalised Marcum Q-function of order one, `Q₁(a, b)`.
pub fn marcum_q1(a: f64, b: f64) -> f64 {
    marcum_q1_with(a, b, EvalTolerance::default())
}

pub fn marcum_q1_with(a: f64, b: f64, tol: EvalTolerance) -> f64 {
    let (q, p) = marcum_pair(a, b, tol);
    if b >= a {
        q
    } else {
        1.0 - p
    }
}

/// `1 − Q₁(a, b)`, the Rice CDF, computed directly when it is the small side.
pub fn marcum_q1_complement(a: f64, b: f64) -> f64 {
    let (q, p) = marcum_pair(a, b, EvalTolerance::default());
    if b >= a {
        1.0 - q
    } else {
        p
    }
}

// For b ≥ a returns (Q, _) from  Q = e^{−(a²+b²)/2} Σ_{k≥0} (a/b)^k I_k(ab);
// for b < a returns (_, 1−Q) from 1−Q = e^{−(a²+b²)/2} Σ_{k≥1} (b/a)^k I_k(ab).
fn marcum_pair(a: f64, b: f64, tol: EvalTolerance) -> (f64, f64) {
    debug_assert!(a >= 0.0 && b >= 0.0);
    if b <= 0.0 {
        return (1.0, 0.0);
    }
    if a <= 0.0 {
        return (exp(-0.5 * b * b), 0.0);
    }
    let x = a * b;
    let scale = exp(-0.5 * (a - b) * (a - b));
    if scale == 0.0 {
        return (0.0, 0.0);
    }
    let seq = scaled_bessel_sequence(x, 0, tol.rel_tol);
    if b >= a {
        let r = a / b;
        let mut pow = 1.0;
        let mut sum = 0.0;
        for &ik in &seq {
            sum += pow * ik;
            pow *= r;
            if pow * ik == 0.0 && pow < 1e-300 {
                break;
            }
        }
        ((scale * sum).clamp(0.0, 1.0), 0.0)
    } else {
        let r = b / a;
        let mut pow = r;
        let mut sum = 0.0;
        for &ik in &seq[1..] {
            sum += pow * ik;
            pow *= r;
            if pow < 1e-300 {
                break;
            }
        }
        (0.0, (scale * sum).clamp(0.0, 1.0))
    }
}
