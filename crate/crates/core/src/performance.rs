//! End-to-end decode-and-forward metrics: exact outage, high-SNR
//! asymptotes and a numerical BER reference.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{exp, log, pow, sqrt};

use crate::fso::FsoLink;
use crate::params::{dbm_to_watts, ParamError, SystemParams};
use crate::quadrature::{integrate_with, QuadratureError, QuadratureOptions};
use crate::rf::RfLink;
use crate::specfun::{gamma_fn, gauss_q, SpecialFnError};

/// Smallest node budget accepted by [`ber_exact_numeric`].
pub const MIN_QUAD_POINTS: usize = 64;

/// Beyond this the standard normal density underflows.
const NORMAL_CUTOFF: f64 = 39.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PerformanceError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Special(#[from] SpecialFnError),
    #[error("{hop} hop BER integral: {source}")]
    Quadrature {
        hop: &'static str,
        source: QuadratureError,
    },
    #[error("quad_points must be at least {MIN_QUAD_POINTS}, got {0}")]
    TooFewPoints(usize),
    #[error("sweep axis must be non-empty and strictly increasing")]
    BadAxis,
}

/// Conditional bit error rate `κ Q(√(ζ γ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulation {
    pub kappa: f64,
    pub zeta: f64,
}

impl Modulation {
    pub fn conditional_ber(&self, gamma: f64) -> f64 {
        self.kappa * gauss_q(sqrt(self.zeta * gamma.max(0.0)))
    }
}

/// The two hops of one user link, sharing the transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPair {
    pub rf: RfLink,
    pub fso: FsoLink,
    pub fso_mod: Modulation,
    pub rf_mod: Modulation,
}

impl LinkPair {
    pub fn from_params(p: &SystemParams) -> Result<Self, ParamError> {
        Ok(Self {
            rf: RfLink::from_params(p),
            fso: FsoLink::from_params(p)?,
            fso_mod: Modulation {
                kappa: p.mod_kappa,
                zeta: p.mod_zeta,
            },
            rf_mod: Modulation {
                kappa: p.rf_mod_kappa,
                zeta: p.rf_mod_zeta,
            },
        })
    }

    pub fn pt(&self) -> f64 {
        self.rf.pt
    }

    pub fn with_pt(&self, pt: f64) -> Self {
        Self {
            rf: self.rf.with_pt(pt),
            fso: self.fso.with_pt(pt),
            ..*self
        }
    }

    pub fn with_pt_dbm(&self, dbm: f64) -> Self {
        self.with_pt(dbm_to_watts(dbm))
    }
}

/// Outage of two independent hops: `F₁ + F₂ − F₁F₂`.
pub fn compose_outage(f_rf: f64, f_fso: f64) -> f64 {
    let (hi, lo) = if f_rf >= f_fso { (f_rf, f_fso) } else { (f_fso, f_rf) };
    hi + lo * (1.0 - hi)
}

/// End-to-end bit error with decode-and-forward: exactly one hop flips.
pub fn compose_df_ber(p_rf: f64, p_fso: f64) -> f64 {
    p_rf + p_fso - 2.0 * p_rf * p_fso
}

/// Exact outage probability at SNR threshold `gamma_th` (linear).
pub fn outage_exact(pair: &LinkPair, gamma_th: f64) -> f64 {
    compose_outage(pair.rf.snr_cdf(gamma_th), pair.fso.optical_snr_cdf(gamma_th))
}

/// `(σ_nk / (A_0 P_t δ α_m μ_k h_l))^ρ · e^{2ρσ_X² + 2ρ²σ_X²}`, the optical
/// hop's high-SNR coefficient.
pub fn fso_asymptotic_coefficient(pair: &LinkPair) -> f64 {
    let f = &pair.fso;
    let rho = f.rho();
    let s2 = f.sigma_x_sq();
    let ratio = sqrt(f.sigma_nk_sq) / (f.peak_gain() * f.pt * f.delta * f.alpha_m * f.mu_k);
    exp(rho * log(ratio) + 2.0 * rho * s2 + 2.0 * rho * rho * s2)
}

/// `σ_nr² (A⁴ + 4σ_m⁴ − 2σ_m²A²) / (8σ_m⁶ P_t)`, the RF hop's high-SNR
/// slope.
pub fn rf_asymptotic_coefficient(pair: &LinkPair) -> f64 {
    let r = &pair.rf;
    let a2 = r.a_peak * r.a_peak;
    let s2 = r.sigma_m_sq;
    r.sigma_nr_sq * (a2 * a2 + 4.0 * s2 * s2 - 2.0 * s2 * a2) / (8.0 * s2 * s2 * s2 * r.pt)
}

/// High-SNR outage approximation. May exceed one at low power.
pub fn outage_asymptotic(pair: &LinkPair, gamma_th: f64) -> f64 {
    let rho = pair.fso.rho();
    pow(gamma_th, rho / 2.0) / pow(2.0, rho / 2.0 + 1.0) * fso_asymptotic_coefficient(pair)
        + rf_asymptotic_coefficient(pair) * gamma_th
}

/// High-SNR density of the end-to-end SNR; the derivative of
/// [`outage_asymptotic`] in `gamma`.
pub fn snr_pdf_asymptotic(pair: &LinkPair, gamma: f64) -> f64 {
    let rho = pair.fso.rho();
    rho * pow(gamma, rho / 2.0 - 1.0) / pow(2.0, rho / 2.0 + 2.0) * fso_asymptotic_coefficient(pair)
        + rf_asymptotic_coefficient(pair)
}

/// High-SNR average BER, `∫ κ Q(√(ζγ)) f_γ^∞(γ) dγ` in closed form.
pub fn ber_asymptotic(pair: &LinkPair) -> Result<f64, SpecialFnError> {
    let rho = pair.fso.rho();
    let Modulation { kappa, zeta } = pair.fso_mod;
    let fso = kappa * gamma_fn((rho + 1.0) / 2.0)? / (4.0 * sqrt(PI) * pow(zeta, rho / 2.0))
        * fso_asymptotic_coefficient(pair);
    let rf = kappa * rf_asymptotic_coefficient(pair) / (2.0 * zeta);
    Ok(fso + rf)
}

/// Per-hop average bit error rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopBer {
    pub rf: f64,
    pub fso: f64,
}

impl HopBer {
    pub fn end_to_end(&self) -> f64 {
        compose_df_ber(self.rf, self.fso)
    }
}

// E[κ Q(√(ζγ))] = κ ∫₀^∞ F(t²/ζ) φ(t) dt, after integrating by parts and
// substituting t = √(ζγ).
fn average_ber<F: Fn(f64) -> f64>(
    cdf: F,
    m: Modulation,
    quad_points: usize,
) -> Result<f64, QuadratureError> {
    let norm = 1.0 / sqrt(2.0 * PI);
    let opts = QuadratureOptions {
        rel_tol: 1e-10,
        abs_tol: 1e-300,
        initial_panels: (quad_points / 15).max(4),
        max_intervals: 4000,
    };
    let q = integrate_with(
        |t| {
            let phi = norm * exp(-0.5 * t * t);
            if phi == 0.0 {
                return 0.0;
            }
            cdf(t * t / m.zeta) * phi
        },
        0.0,
        NORMAL_CUTOFF,
        opts,
    )?;
    Ok(m.kappa * q.value)
}

pub fn hop_ber(pair: &LinkPair, quad_points: usize) -> Result<HopBer, PerformanceError> {
    if quad_points < MIN_QUAD_POINTS {
        return Err(PerformanceError::TooFewPoints(quad_points));
    }
    let rf = average_ber(|g| pair.rf.snr_cdf(g), pair.rf_mod, quad_points)
        .map_err(|source| PerformanceError::Quadrature { hop: "rf", source })?;
    let fso = average_ber(|g| pair.fso.optical_snr_cdf(g), pair.fso_mod, quad_points)
        .map_err(|source| PerformanceError::Quadrature { hop: "fso", source })?;
    Ok(HopBer { rf, fso })
}

/// Reference end-to-end BER by numerical integration over the exact hop
/// SNR distributions.
pub fn ber_exact_numeric(pair: &LinkPair, quad_points: usize) -> Result<f64, PerformanceError> {
    Ok(hop_ber(pair, quad_points)?.end_to_end())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub index: usize,
    pub pt_dbm: f64,
    pub reason: String,
}

/// Closed-form series over a transmit-power axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceCurve {
    pub axis_dbm: Vec<f64>,
    pub gamma_th: f64,
    pub outage_exact: Vec<f64>,
    pub outage_asymptotic: Vec<f64>,
    pub ber_asymptotic: Vec<Option<f64>>,
    pub ber_exact_numeric: Vec<Option<f64>>,
    pub failures: Vec<PointFailure>,
}

impl PerformanceCurve {
    pub fn len(&self) -> usize {
        self.axis_dbm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis_dbm.is_empty()
    }
}

pub const DEFAULT_QUAD_POINTS: usize = 128;

/// Evaluates every closed-form series at each axis point (dBm).
pub fn sweep(
    template: &LinkPair,
    axis_dbm: &[f64],
    gamma_th: f64,
) -> Result<PerformanceCurve, PerformanceError> {
    sweep_with(template, axis_dbm, gamma_th, DEFAULT_QUAD_POINTS)
}

pub fn sweep_with(
    template: &LinkPair,
    axis_dbm: &[f64],
    gamma_th: f64,
    quad_points: usize,
) -> Result<PerformanceCurve, PerformanceError> {
    if quad_points < MIN_QUAD_POINTS {
        return Err(PerformanceError::TooFewPoints(quad_points));
    }
    if axis_dbm.is_empty() || axis_dbm.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(PerformanceError::BadAxis);
    }
    let n = axis_dbm.len();
    let mut curve = PerformanceCurve {
        axis_dbm: axis_dbm.to_vec(),
        gamma_th,
        outage_exact: Vec::with_capacity(n),
        outage_asymptotic: Vec::with_capacity(n),
        ber_asymptotic: Vec::with_capacity(n),
        ber_exact_numeric: Vec::with_capacity(n),
        failures: Vec::new(),
    };
    for (index, &dbm) in axis_dbm.iter().enumerate() {
        let pair = template.with_pt_dbm(dbm);
        curve.outage_exact.push(outage_exact(&pair, gamma_th));
        curve.outage_asymptotic.push(outage_asymptotic(&pair, gamma_th));
        match ber_asymptotic(&pair) {
            Ok(v) => curve.ber_asymptotic.push(Some(v)),
            Err(e) => {
                curve.ber_asymptotic.push(None);
                curve.failures.push(PointFailure {
                    index,
                    pt_dbm: dbm,
                    reason: e.to_string(),
                });
            }
        }
        match ber_exact_numeric(&pair, quad_points) {
            Ok(v) => curve.ber_exact_numeric.push(Some(v)),
            Err(e) => {
                curve.ber_exact_numeric.push(None);
                curve.failures.push(PointFailure {
                    index,
                    pt_dbm: dbm,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok(curve)
}

/// Transmit power (dBm) at which a decreasing metric crosses `level`,
/// found by bisection in `[lo_dbm, hi_dbm]`. `None` if not bracketed.
pub fn power_at_level<F: FnMut(f64) -> f64>(
    mut metric: F,
    level: f64,
    lo_dbm: f64,
    hi_dbm: f64,
) -> Option<f64> {
    let (mut lo, mut hi) = (lo_dbm, hi_dbm);
    let f_lo = metric(lo) - level;
    let f_hi = metric(hi) - level;
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if metric(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{db_to_linear, GeometryMode};
    use crate::quadrature::integrate_to_infinity;

    fn pair(mode: GeometryMode) -> LinkPair {
        LinkPair::from_params(&SystemParams::default().with_geometry_mode(mode)).unwrap()
    }

    #[test]
    fn composition_examples() {
        assert!((compose_outage(0.1, 0.2) - 0.28).abs() < 1e-15);
        assert_eq!(compose_df_ber(0.0, 0.3), 0.3);
        assert_eq!(compose_df_ber(0.5, 0.5), 0.5);
    }

    #[test]
    fn outage_vanishes_at_zero_threshold() {
        let p = pair(GeometryMode::PaperPrinted).with_pt_dbm(40.0);
        assert!(outage_exact(&p, 1e-300) < 1e-30);
    }

    #[test]
    fn outage_identity() {
        let p = pair(GeometryMode::PaperPrinted).with_pt_dbm(35.0);
        let g = db_to_linear(5.0);
        let f1 = p.rf.snr_cdf(g);
        let f2 = p.fso.optical_snr_cdf(g);
        assert!((outage_exact(&p, g) - (1.0 - (1.0 - f1) * (1.0 - f2))).abs() < 1e-15);
    }

    #[test]
    fn asymptote_scaling() {
        let p = pair(GeometryMode::PaperPrinted).with_pt_dbm(40.0);
        let rho = p.fso.rho();
        let c = fso_asymptotic_coefficient(&p);
        let n = rf_asymptotic_coefficient(&p);
        let t1 = |g: f64| outage_asymptotic(&p, g) - n * g;
        let t2 = |g: f64| outage_asymptotic(&p, g) - pow(g, rho / 2.0) / pow(2.0, rho / 2.0 + 1.0) * c;
        assert!((t1(4.0) / t1(2.0) - pow(2.0, rho / 2.0)).abs() < 1e-12);
        assert!((t2(4.0) / t2(2.0) - 2.0).abs() < 1e-9);
        let mut halved = p;
        halved.fso.mu_k = 0.5;
        let ratio = (outage_asymptotic(&halved, 3.0) - 3.0 * n) / (outage_asymptotic(&p, 3.0) - 3.0 * n);
        assert!((ratio - pow(2.0, rho)).abs() < 1e-10);
    }

    #[test]
    fn asymptotic_pdf_is_derivative_of_asymptotic_outage() {
        let p = pair(GeometryMode::PaperPrinted).with_pt_dbm(30.0);
        for &g in &[0.1, 1.0, 3.0, 30.0] {
            let h = 1e-6 * g;
            let fd = (outage_asymptotic(&p, g + h) - outage_asymptotic(&p, g - h)) / (2.0 * h);
            let pdf = snr_pdf_asymptotic(&p, g);
            assert!(((fd - pdf) / pdf).abs() < 1e-7, "gamma {g}: {fd} vs {pdf}");
        }
        // constant second term, diverging first term for rho < 2
        let n = rf_asymptotic_coefficient(&p);
        assert!(snr_pdf_asymptotic(&p, 1e-12) > 1e3 * n);
        assert!((snr_pdf_asymptotic(&p, 1e12) - n).abs() / n < 1e-2);
    }

    #[test]
    fn asymptotic_ber_is_integral_of_asymptotic_pdf() {
        let p = pair(GeometryMode::PaperPrinted).with_pt_dbm(60.0);
        let m = p.fso_mod;
        let q = integrate_to_infinity(
            |g| m.conditional_ber(g) * snr_pdf_asymptotic(&p, g),
            0.0,
            1e-10,
            0.0,
        )
        .unwrap();
        let b = ber_asymptotic(&p).unwrap();
        assert!(((q.value - b) / b).abs() < 1e-6, "{} vs {b}", q.value);
    }

    #[test]
    fn ber_asymptotic_linear_in_kappa() {
        let p = pair(GeometryMode::PaperPrinted).with_pt_dbm(50.0);
        let mut q = p;
        q.fso_mod.kappa = 3.0;
        assert!((ber_asymptotic(&q).unwrap() / ber_asymptotic(&p).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rf_factor_is_truncated_exponential() {
        let p = pair(GeometryMode::PaperPrinted);
        let k = 10.0;
        let rf = &p.rf;
        let expected = rf.sigma_nr_sq / (2.0 * rf.sigma_m_sq * rf.pt) * (k * k - k + 1.0);
        assert!(((rf_asymptotic_coefficient(&p) - expected) / expected).abs() < 1e-12);
    }

    // The optical term of the closed-form asymptote is half of the exact
    // small-γ behaviour F(γ) ≈ (γ/2)^{ρ/2} C of the optical CDF.
    #[test]
    fn optical_asymptote_is_half_the_exact_limit() {
        let p = pair(GeometryMode::PaperPrinted).with_pt_dbm(110.0);
        let g = db_to_linear(5.0);
        let rho = p.fso.rho();
        let exact_limit = pow(g / 2.0, rho / 2.0) * fso_asymptotic_coefficient(&p);
        assert!((p.fso.optical_snr_cdf(g) / exact_limit - 1.0).abs() < 1e-6);
        let ratio = outage_asymptotic(&p, g) / outage_exact(&p, g);
        assert!((ratio - 0.5).abs() < 1e-3, "ratio {ratio}");
    }

    #[test]
    fn numeric_ber_rejects_small_budgets() {
        let p = pair(GeometryMode::PaperPrinted);
        assert_eq!(ber_exact_numeric(&p, 10), Err(PerformanceError::TooFewPoints(10)));
    }

    #[test]
    fn numeric_ber_against_direct_density_integral() {
        // independent route: integrate κQ(√(ζγ)) f(γ) with the RF SNR density
        let p = pair(GeometryMode::PaperPrinted).with_pt_dbm(-10.0);
        let hop = hop_ber(&p, 128).unwrap();
        let direct = integrate_to_infinity(
            |g| p.rf_mod.conditional_ber(g) * p.rf.snr_pdf(g),
            0.0,
            1e-11,
            0.0,
        )
        .unwrap();
        assert!(((hop.rf - direct.value) / direct.value).abs() < 1e-7);
    }

    #[test]
    fn numeric_ber_high_power_is_twice_asymptote() {
        let p = pair(GeometryMode::PaperPrinted).with_pt_dbm(130.0);
        let num = ber_exact_numeric(&p, 128).unwrap();
        let asym = ber_asymptotic(&p).unwrap();
        assert!(num < 1e-4);
        assert!((asym / num - 0.5).abs() < 0.02, "ratio {}", asym / num);
    }

    #[test]
    fn sweep_shapes() {
        let p = pair(GeometryMode::PaperPrinted);
        let one = sweep(&p, &[20.0], 3.0).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(sweep(&p, &[], 3.0), Err(PerformanceError::BadAxis));
        assert_eq!(sweep(&p, &[5.0, 5.0], 3.0), Err(PerformanceError::BadAxis));
        let axis: Vec<f64> = (0..10).map(|i| 5.0 * i as f64).collect();
        let c = sweep(&p, &axis, db_to_linear(5.0)).unwrap();
        assert!(c.failures.is_empty());
        assert!(c.outage_exact.windows(2).all(|w| w[1] <= w[0]));
        assert!(c.outage_exact.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn power_at_level_bisects() {
        let dbm = power_at_level(|x| pow(10.0, -x / 10.0), 1e-3, 0.0, 100.0).unwrap();
        assert!((dbm - 30.0).abs() < 1e-8);
        assert!(power_at_level(|x| x, 1.0, 0.0, 10.0).is_none());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn outage_monotone(pt in -10.0f64..120.0, dpt in 0.0f64..20.0,
                           g in 0.01f64..100.0, dg in 0.0f64..50.0) {
            let p = pair(GeometryMode::PaperPrinted);
            let o = outage_exact(&p.with_pt_dbm(pt), g);
            proptest::prop_assert!((0.0..=1.0).contains(&o));
            proptest::prop_assert!(outage_exact(&p.with_pt_dbm(pt + dpt), g) <= o + 1e-15);
            proptest::prop_assert!(outage_exact(&p.with_pt_dbm(pt), g + dg) >= o - 1e-15);
        }
    }
}
