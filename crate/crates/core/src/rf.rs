//! Rice-faded RF hop from the base station to the relay.

use libm::{exp, sqrt};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::params::SystemParams;
use crate::specfun::{bessel_i_scaled, marcum_q1, marcum_q1_complement};

/// Envelope and SNR statistics of the RF hop.
///
/// The envelope `ν` is Rice distributed with line-of-sight amplitude `A`
/// and multipath power `σ_m²` at unit transmit power; the relay SNR is
/// `γ = P_t ν² / σ_nr²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfLink {
    pub a_peak: f64,
    pub sigma_m_sq: f64,
    pub sigma_nr_sq: f64,
    pub pt: f64,
}

impl RfLink {
    pub fn new(a_peak: f64, sigma_m_sq: f64, sigma_nr_sq: f64, pt: f64) -> Self {
        debug_assert!(a_peak >= 0.0 && sigma_m_sq > 0.0 && pt > 0.0);
        Self {
            a_peak,
            sigma_m_sq,
            sigma_nr_sq,
            pt,
        }
    }

    pub fn from_params(p: &SystemParams) -> Self {
        Self::new(p.rice_amplitude(), p.sigma_m_sq(), p.sigma_nr_sq, p.pt)
    }

    pub fn with_pt(self, pt: f64) -> Self {
        Self { pt, ..self }
    }

    /// Rice envelope density.
    pub fn envelope_pdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let s2 = self.sigma_m_sq;
        let a = self.a_peak;
        // exp(−(v²+A²)/2σ²) I₀(vA/σ²) = exp(−(v−A)²/2σ²) e^{−x} I₀(x)
        let x = v * a / s2;
        let i0s = bessel_i_scaled(0, x).unwrap_or(0.0);
        v / s2 * exp(-(v - a) * (v - a) / (2.0 * s2)) * i0s
    }

    /// Rice envelope CDF, `1 − Q₁(A/σ_m, ν/σ_m)`.
    pub fn envelope_cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let s = sqrt(self.sigma_m_sq);
        marcum_q1_complement(self.a_peak / s, v / s)
    }

    /// Density of the relay SNR.
    pub fn snr_pdf(&self, gamma: f64) -> f64 {
        if gamma < 0.0 {
            return 0.0;
        }
        let s2 = self.sigma_m_sq;
        let a = self.a_peak;
        let v = sqrt(self.sigma_nr_sq * gamma / self.pt);
        let x = v * a / s2;
        let i0s = bessel_i_scaled(0, x).unwrap_or(0.0);
        self.sigma_nr_sq / (2.0 * self.pt * s2) * exp(-(v - a) * (v - a) / (2.0 * s2)) * i0s
    }

    /// CDF of the relay SNR, `1 − Q₁(A/σ_m, (σ_nr/σ_m)√(x/P_t))`.
    pub fn snr_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        let (a, b) = self.marcum_args(x);
        marcum_q1_complement(a, b)
    }

    /// `Q₁` arguments of [`RfLink::snr_cdf`] at threshold `x`.
    pub fn marcum_args(&self, x: f64) -> (f64, f64) {
        let s = sqrt(self.sigma_m_sq);
        (self.a_peak / s, sqrt(self.sigma_nr_sq / self.sigma_m_sq * x / self.pt))
    }

    /// Survival function `P[γ > x]`.
    pub fn snr_survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let (a, b) = self.marcum_args(x);
        marcum_q1(a, b)
    }

    pub fn snr(&self, envelope: f64) -> f64 {
        self.pt * envelope * envelope / self.sigma_nr_sq
    }

    /// Draws `ν = |A + σ_m (g₁ + i g₂)|`.
    pub fn sample_envelope<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = sqrt(self.sigma_m_sq);
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        let i = self.a_peak + s * g1;
        let q = s * g2;
        sqrt(i * i + q * q)
    }
}
