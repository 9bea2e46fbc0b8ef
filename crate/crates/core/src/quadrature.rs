//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use alloc::vec::Vec;

use libm::{fabs, pow};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge: value {value}, error estimate {error}")]
    NotConverged { value: f64, error: f64 },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Equal-width panels the interval is split into before adapting.
    pub initial_panels: usize,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            initial_panels: 4,
            max_intervals: 4000,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Panel, QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadratureError::NonFinite(center));
    }
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = fabs(resk);
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let x1 = center - dx;
        let x2 = center + dx;
        let f1 = f(x1);
        let f2 = f(x2);
        if !f1.is_finite() {
            return Err(QuadratureError::NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(QuadratureError::NonFinite(x2));
        }
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (fabs(f1) + fabs(f2));
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * fabs(fc - reskh);
    for j in 0..7 {
        resasc += WGK[j] * (fabs(fv1[j] - reskh) + fabs(fv2[j] - reskh));
    }
    let value = resk * half;
    resabs *= fabs(half);
    resasc *= fabs(half);
    let mut error = fabs((resk - resg) * half);
    if resasc != 0.0 && error != 0.0 {
        error = resasc * pow(200.0 * error / resasc, 1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && error < round {
        error = round;
    }
    Ok(Panel { a, b, value, error })
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature, QuadratureError> {
    integrate_with(
        f,
        a,
        b,
        QuadratureOptions {
            rel_tol,
            abs_tol,
            ..QuadratureOptions::default()
        },
    )
}

pub fn integrate_with<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    opts: QuadratureOptions,
) -> Result<Quadrature, QuadratureError> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut panels: Vec<Panel> = Vec::with_capacity(opts.max_intervals.max(n0) + 1);
    for i in 0..n0 {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + width };
        panels.push(kronrod(&mut f, lo, hi)?);
    }
    let mut evaluations = 15 * n0;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= opts.abs_tol.max(opts.rel_tol * fabs(value)) {
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        if panels.len() >= opts.max_intervals {
            return Err(QuadratureError::NotConverged { value, error });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // interval can no longer be split in f64
            return Err(QuadratureError::NotConverged { value, error });
        }
        panels.push(kronrod(&mut f, p.a, mid)?);
        panels.push(kronrod(&mut f, mid, p.b)?);
        evaluations += 30;
    }
}

/// Integrates `f` over `[a, ∞)` through `x = a + t/(1−t)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature, QuadratureError> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        },
        0.0,
        1.0,
        rel_tol,
        abs_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use libm::{exp, sqrt};

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| x * x * x - 2.0 * x, 0.0, 3.0, 1e-12, 0.0).unwrap();
        assert!((q.value - (81.0 / 4.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2
        let q = integrate(|x| if x > 0.0 { 1.0 / sqrt(x) } else { 0.0 }, 0.0, 1.0, 1e-10, 0.0)
            .unwrap();
        assert!((q.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn semi_infinite() {
        let q = integrate_to_infinity(|x| exp(-x), 0.0, 1e-12, 0.0).unwrap();
        assert!((q.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn reports_non_convergence() {
        let opts = QuadratureOptions {
            rel_tol: 1e-15,
            abs_tol: 0.0,
            initial_panels: 1,
            max_intervals: 3,
        };
        let r = integrate_with(|x| libm::sin(1.0 / (x + 1e-3)), 0.0, 1.0, opts);
        assert!(matches!(r, Err(QuadratureError::NotConverged { .. })));
    }
}
