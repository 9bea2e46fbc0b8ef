//! Optical hop from the relay through the ORIS to the user.
//!
//! The channel gain factors as `h = h_l · h_p · h_a`: deterministic path
//! loss, pointing loss from transmitter and ORIS jitter, and unit-mean
//! log-normal scintillation with `ln h_a ~ N(−2σ_X², 4σ_X²)`.

use core::f64::consts::{LN_2, PI, SQRT_2};

use libm::{exp, log, pow, sqrt};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::params::{DerivedGeometry, ParamError, SystemParams};
use crate::specfun::{erfc, ln_erfc};

const SQRT_8: f64 = 2.0 * SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsoLink {
    pub geometry: DerivedGeometry,
    pub sigma_theta: f64,
    pub sigma_beta: f64,
    pub l_ro: f64,
    pub l_ou: f64,
    pub alpha_m: f64,
    pub mu_k: f64,
    pub delta: f64,
    pub pt: f64,
    pub sigma_nk_sq: f64,
}

impl FsoLink {
    pub fn from_params(p: &SystemParams) -> Result<Self, ParamError> {
        Ok(Self::with_geometry(p, p.derive()?))
    }

    pub fn with_geometry(p: &SystemParams, geometry: DerivedGeometry) -> Self {
        Self {
            geometry,
            sigma_theta: p.sigma_theta,
            sigma_beta: p.sigma_beta,
            l_ro: p.l_ro,
            l_ou: p.l_ou,
            alpha_m: p.alpha_m,
            mu_k: p.mu_k,
            delta: p.delta,
            pt: p.pt,
            sigma_nk_sq: p.sigma_nk_sq,
        }
    }

    pub fn with_pt(self, pt: f64) -> Self {
        Self { pt, ..self }
    }

    pub fn rho(&self) -> f64 {
        self.geometry.rho
    }

    pub fn sigma_x_sq(&self) -> f64 {
        self.geometry.sigma_x_sq
    }

    /// Peak received gain `A_0 h_l`.
    pub fn peak_gain(&self) -> f64 {
        self.geometry.a0 * self.geometry.h_l
    }

    /// Per-axis variance `s²` of the jitter angle seen at the receiving plane.
    pub fn jitter_variance(&self) -> f64 {
        let lever = 1.0 + self.l_ro / self.l_ou;
        lever * lever * self.sigma_theta * self.sigma_theta
            + 4.0 * self.sigma_beta * self.sigma_beta
    }

    /// Rayleigh density of the receiving-plane jitter angle.
    pub fn jitter_angle_pdf(&self, theta_u: f64) -> f64 {
        if theta_u < 0.0 {
            return 0.0;
        }
        let s2 = self.jitter_variance();
        theta_u / s2 * exp(-theta_u * theta_u / (2.0 * s2))
    }

    pub fn jitter_angle_cdf(&self, theta_u: f64) -> f64 {
        if theta_u <= 0.0 {
            return 0.0;
        }
        -libm::expm1(-theta_u * theta_u / (2.0 * self.jitter_variance()))
    }

    /// Beam offset on the receiving plane, `R ≈ θ_u l_ou`.
    pub fn displacement(&self, theta_u: f64) -> f64 {
        theta_u * self.l_ou
    }

    /// Collected power fraction at radial offset `r`.
    pub fn pointing_loss(&self, r: f64) -> f64 {
        self.geometry.a0 * exp(-2.0 * r * r / self.geometry.w_zeq_sq)
    }

    /// Power-law density `(ρ/A_0)(h_p/A_0)^{ρ−1}` on `(0, A_0]`.
    pub fn pointing_loss_pdf(&self, hp: f64) -> f64 {
        let a0 = self.geometry.a0;
        if hp <= 0.0 || hp > a0 {
            return 0.0;
        }
        let rho = self.rho();
        rho / a0 * pow(hp / a0, rho - 1.0)
    }

    pub fn pointing_loss_cdf(&self, hp: f64) -> f64 {
        let a0 = self.geometry.a0;
        if hp <= 0.0 {
            0.0
        } else if hp >= a0 {
            1.0
        } else {
            pow(hp / a0, self.rho())
        }
    }

    /// Log-normal scintillation density with unit mean.
    pub fn turbulence_pdf(&self, ha: f64) -> f64 {
        if ha <= 0.0 {
            return 0.0;
        }
        let s2 = self.sigma_x_sq();
        let t = log(ha) + 2.0 * s2;
        1.0 / (2.0 * ha * sqrt(2.0 * PI * s2)) * exp(-t * t / (8.0 * s2))
    }

    pub fn turbulence_cdf(&self, ha: f64) -> f64 {
        if ha <= 0.0 {
            return 0.0;
        }
        let s2 = self.sigma_x_sq();
        0.5 * erfc(-(log(ha) + 2.0 * s2) / (SQRT_8 * sqrt(s2)))
    }

    /// Closed-form density of the composite gain `h`.
    pub fn fading_pdf(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let rho = self.rho();
        let s2 = self.sigma_x_sq();
        let peak = self.peak_gain();
        if s2 == 0.0 {
            return self.pointing_loss_pdf(h / self.geometry.h_l) / self.geometry.h_l;
        }
        let u = log(h / peak);
        let arg = (u + 2.0 * s2 + 4.0 * rho * s2) / (SQRT_8 * sqrt(s2));
        let ln_f = log(rho) - LN_2 - rho * log(peak)
            + (rho - 1.0) * log(h)
            + ln_erfc(arg)
            + 2.0 * s2 * rho * (1.0 + rho);
        exp(ln_f)
    }

    /// Closed-form CDF of the composite gain `h`.
    pub fn fading_cdf(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        if h.is_infinite() {
            return 1.0;
        }
        self.cdf_at_log_ratio(log(h / self.peak_gain()))
    }

    // CDF expressed through u = ln(h / (A_0 h_l)).
    fn cdf_at_log_ratio(&self, u: f64) -> f64 {
        let rho = self.rho();
        let s2 = self.sigma_x_sq();
        if s2 == 0.0 {
            return if u >= 0.0 { 1.0 } else { exp(rho * u) };
        }
        let s = sqrt(s2);
        let arg1 = (u + 2.0 * s2 + 4.0 * rho * s2) / (SQRT_8 * s);
        let ln_t1 = -LN_2 + rho * u + 2.0 * rho * s2 * (1.0 + rho) + ln_erfc(arg1);
        let t1 = exp(ln_t1);
        let t2 = 0.5 * erfc(-(u + 2.0 * s2) / (SQRT_8 * s));
        (t1 + t2).clamp(0.0, 1.0)
    }

    /// Instantaneous optical SNR `2μ²α²h²δ²P_t²/σ_nk²`.
    pub fn optical_snr(&self, h: f64) -> f64 {
        let amp = self.mu_k * self.alpha_m * h * self.delta * self.pt;
        2.0 * amp * amp / self.sigma_nk_sq
    }

    /// Gain needed to reach SNR `gamma`.
    pub fn gain_at_snr(&self, gamma: f64) -> f64 {
        let scale = self.mu_k * self.alpha_m * self.delta * self.pt;
        sqrt(gamma * self.sigma_nk_sq / 2.0) / scale
    }

    /// `η = ½ ln(γ/2) + ln(σ_nk / (A_0 P_t δ α_m μ_k h_l))`, the log of
    /// `h/(A_0 h_l)` at SNR `γ`.
    pub fn snr_log_ratio(&self, gamma: f64) -> f64 {
        0.5 * log(gamma / 2.0)
            + log(
                sqrt(self.sigma_nk_sq)
                    / (self.geometry.a0
                        * self.pt
                        * self.delta
                        * self.alpha_m
                        * self.mu_k
                        * self.geometry.h_l),
            )
    }

    /// CDF of the optical SNR.
    pub fn optical_snr_cdf(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        if gamma.is_infinite() {
            return 1.0;
        }
        self.cdf_at_log_ratio(self.snr_log_ratio(gamma))
    }

    pub fn sample_jitter_angle<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = sqrt(self.jitter_variance());
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        s * sqrt(g1 * g1 + g2 * g2)
    }

    /// `θ_u → R → h_p`. Reproduces [`FsoLink::pointing_loss_pdf`] only when
    /// the geometry was derived in self-consistent mode.
    pub fn sample_pointing_loss<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let theta = self.sample_jitter_angle(rng);
        self.pointing_loss(self.displacement(theta))
    }

    pub fn sample_turbulence<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s2 = self.sigma_x_sq();
        let g: f64 = rng.sample(StandardNormal);
        exp(-2.0 * s2 + 2.0 * sqrt(s2) * g)
    }

    /// Draws the composite gain `h_l · h_p · h_a`.
    pub fn sample_fading<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let hp = self.sample_pointing_loss(rng);
        let ha = self.sample_turbulence(rng);
        self.geometry.h_l * hp * ha
    }
}
