//! Alternative closed forms that differ from the ones the model uses.
//!
//! Kept so the differences can be measured: an unsigned-exponent
//! scintillation density, an optical SNR CDF missing its constant term,
//! and an outage expression whose RF Marcum argument is `√γ_th`.

use core::f64::consts::{PI, SQRT_2};

use libm::{exp, log, sqrt};

use crate::fso::FsoLink;
use crate::performance::LinkPair;
use crate::specfun::{erfc, marcum_q1};

/// Log-normal density with `+(ln h_a + 2σ_X²)²/(8σ_X²)` in the exponent.
/// Not normalisable.
pub fn turbulence_pdf_unsigned_exponent(sigma_x_sq: f64, ha: f64) -> f64 {
    if ha <= 0.0 {
        return 0.0;
    }
    let t = log(ha) + 2.0 * sigma_x_sq;
    1.0 / (2.0 * ha * sqrt(2.0 * PI * sigma_x_sq)) * exp(t * t / (8.0 * sigma_x_sq))
}

// (T1, T2) with F₂ = T1 + 1 − T2.
fn optical_terms(fso: &FsoLink, gamma: f64) -> (f64, f64) {
    let rho = fso.rho();
    let s2 = fso.sigma_x_sq();
    let s = sqrt(s2);
    let eta = fso.snr_log_ratio(gamma);
    let t1 = 0.5
        * exp(rho * eta + 2.0 * rho * s2 + 2.0 * rho * rho * s2)
        * erfc((eta + 2.0 * s2 + 4.0 * rho * s2) / (2.0 * SQRT_2 * s));
    let t2 = 0.5 * erfc((eta + 2.0 * s2) / (2.0 * SQRT_2 * s));
    (t1, t2)
}

/// Optical SNR "CDF" without the constant term; equals
/// `optical_snr_cdf − 1` and is never a probability.
pub fn optical_snr_cdf_without_constant(fso: &FsoLink, gamma: f64) -> f64 {
    let (t1, t2) = optical_terms(fso, gamma);
    t1 - t2
}

/// Marcum arguments `(A/σ_m, √γ_th)`.
pub fn rf_marcum_args_unscaled(pair: &LinkPair, gamma_th: f64) -> (f64, f64) {
    (pair.rf.a_peak / sqrt(pair.rf.sigma_m_sq), sqrt(gamma_th))
}

/// Ratio of the RF Marcum second argument used by the model to `√γ_th`:
/// `(σ_nr/σ_m)/√P_t`.
pub fn rf_argument_scale(pair: &LinkPair) -> f64 {
    sqrt(pair.rf.sigma_nr_sq / pair.rf.sigma_m_sq) / sqrt(pair.rf.pt)
}

/// `1 + T1·Q₁ − T2·Q₁ − Q₁` with `Q₁ = Q₁(A/σ_m, √γ_th)`.
pub fn outage_unscaled_marcum(pair: &LinkPair, gamma_th: f64) -> f64 {
    let (a, b) = rf_marcum_args_unscaled(pair, gamma_th);
    let q = marcum_q1(a, b);
    let (t1, t2) = optical_terms(&pair.fso, gamma_th);
    1.0 + t1 * q - t2 * q - q
}
