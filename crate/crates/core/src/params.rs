//! Physical parameters of the RF → relay → ORIS → user link and the
//! geometric/turbulence constants derived from them.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use libm::{exp, log10, pow, sqrt};

use crate::specfun::erf;

/// Beam-radius to aperture-radius ratio above which the Gaussian pointing
/// loss approximation is considered accurate.
pub const BEAM_APERTURE_RATIO_MIN: f64 = 6.0;
/// Above this pointing exponent the pointing error is practically absent.
pub const RHO_NEGLIGIBLE: f64 = 20.0;
/// Rytov variance beyond which the log-normal (weak turbulence) model is stretched.
pub const RYTOV_WEAK_LIMIT: f64 = 1.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    pow(10.0, (dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * log10(w) + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    pow(10.0, db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * log10(x)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must lie in (0, 1], got {value}")]
    NotAFraction { name: &'static str, value: f64 },
    #[error("{name} must lie in [0, π/2), got {value}")]
    BadAngle { name: &'static str, value: f64 },
    #[error("derived quantity {0} is not finite")]
    NonFinite(&'static str),
}

/// Which denominator the pointing exponent ρ uses for the ORIS jitter term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeometryMode {
    /// `16 σ_β² l_ro²` in the exponent denominator.
    #[default]
    PaperPrinted,
    /// `16 σ_β² l_ou²`, consistent with displacement `R = θ_u l_ou` and with
    /// the ray-traced Monte Carlo scene.
    SelfConsistent,
}

impl GeometryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GeometryMode::PaperPrinted => "paper-printed",
            GeometryMode::SelfConsistent => "self-consistent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "paper-printed" => Some(GeometryMode::PaperPrinted),
            "self-consistent" => Some(GeometryMode::SelfConsistent),
            _ => None,
        }
    }
}

impl fmt::Display for GeometryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rice fading of the RF hop, given either by the line-of-sight amplitude or
/// by the Rice factor `K = A²/(2σ_m²)` (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiceFading {
    Amplitude { a: f64, sigma_m_sq: f64 },
    Factor { k: f64, sigma_m_sq: f64 },
}

impl RiceFading {
    pub fn sigma_m_sq(&self) -> f64 {
        match *self {
            RiceFading::Amplitude { sigma_m_sq, .. } | RiceFading::Factor { sigma_m_sq, .. } => {
                sigma_m_sq
            }
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            RiceFading::Amplitude { a, .. } => a,
            RiceFading::Factor { k, sigma_m_sq } => sqrt(2.0 * k * sigma_m_sq),
        }
    }

    pub fn factor(&self) -> f64 {
        match *self {
            RiceFading::Amplitude { a, sigma_m_sq } => a * a / (2.0 * sigma_m_sq),
            RiceFading::Factor { k, .. } => k,
        }
    }
}

/// Turbulence strength: refraction structure parameter or Rytov variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Turbulence {
    Cn2(f64),
    Rytov(f64),
}

/// Every input of the analysis, in SI units (watts, meters, radians).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Base-station transmit power, W.
    pub pt: f64,
    pub rice: RiceFading,
    /// Relay noise variance, W.
    pub sigma_nr_sq: f64,
    /// User receiver noise variance, W.
    pub sigma_nk_sq: f64,
    /// Electrical-to-optical power conversion at the relay.
    pub delta: f64,
    /// ORIS attenuation.
    pub alpha_m: f64,
    /// Composite power allocation to the user.
    pub mu_k: f64,
    /// Base station → relay distance. Informational only.
    pub l_sr: f64,
    pub l_ro: f64,
    pub l_ou: f64,
    /// Transmitter pointing jitter (per axis std-dev), rad.
    pub sigma_theta: f64,
    /// ORIS surface jitter (per axis std-dev), rad.
    pub sigma_beta: f64,
    /// Beam divergence, rad.
    pub phi: f64,
    pub aperture_radius: f64,
    pub wavelength: f64,
    pub turbulence: Turbulence,
    /// Optical attenuation, dB/km.
    pub hl_per_km: f64,
    /// Optical hop conditional BER `κ Q(√(ζ γ))`.
    pub mod_kappa: f64,
    pub mod_zeta: f64,
    /// Relay (RF) conditional BER `κ Q(√(ζ γ))`.
    pub rf_mod_kappa: f64,
    pub rf_mod_zeta: f64,
    pub geometry_mode: GeometryMode,
    /// Angle between the chief ray and the ORIS normal, rad. Used by the
    /// ray-traced Monte Carlo scene only.
    pub incidence_angle: f64,
}

impl Default for SystemParams {
    /// The reference system: 1550 nm, 50 m + 100 m optical hop, 8 mrad
    /// divergence, 5/2 mrad jitter, K = 10 dB, σ_R² = 0.25, P_t = 20 dBm.
    fn default() -> Self {
        Self {
            pt: dbm_to_watts(20.0),
            rice: RiceFading::Factor {
                k: db_to_linear(10.0),
                sigma_m_sq: 0.5,
            },
            sigma_nr_sq: 1e-4,
            sigma_nk_sq: 1e-4,
            delta: 0.8,
            alpha_m: 0.95,
            mu_k: 1.0,
            l_sr: 100.0,
            l_ro: 50.0,
            l_ou: 100.0,
            sigma_theta: 5e-3,
            sigma_beta: 2e-3,
            phi: 8e-3,
            aperture_radius: 0.1,
            wavelength: 1550e-9,
            turbulence: Turbulence::Rytov(0.25),
            hl_per_km: 0.1,
            mod_kappa: 1.0,
            mod_zeta: 0.5,
            rf_mod_kappa: 1.0,
            rf_mod_zeta: 2.0,
            geometry_mode: GeometryMode::PaperPrinted,
            incidence_angle: 0.0,
        }
    }
}

/// Constants derived once from [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedGeometry {
    /// Beam radius at the receiver, m.
    pub w_z: f64,
    /// Aperture radius over beam radius, scaled by √(π/2).
    pub z_ratio: f64,
    /// Collected power fraction on axis.
    pub a0: f64,
    /// Equivalent beam width squared, m².
    pub w_zeq_sq: f64,
    /// Pointing-loss exponent for the selected geometry mode.
    pub rho: f64,
    pub geometry_mode: GeometryMode,
    /// Log-amplitude variance, always `rytov_sq / 4`.
    pub sigma_x_sq: f64,
    pub rytov_sq: f64,
    /// Deterministic path gain over the optical hop.
    pub h_l: f64,
    /// Optical wavenumber 2π/λ, rad/m.
    pub wavenumber: f64,
}

/// A soft warning about the validity of the model for a parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diagnostic {
    BeamApertureRatio { ratio: f64 },
    NegligiblePointingError { rho: f64 },
    StrongTurbulence { rytov_sq: f64 },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Diagnostic::BeamApertureRatio { ratio } => write!(
                f,
                "beam/aperture ratio {ratio} ≤ {BEAM_APERTURE_RATIO_MIN}: Gaussian pointing-loss approximation is inaccurate"
            ),
            Diagnostic::NegligiblePointingError { rho } => write!(
                f,
                "pointing exponent rho = {rho} ≥ {RHO_NEGLIGIBLE}: pointing error is negligible"
            ),
            Diagnostic::StrongTurbulence { rytov_sq } => write!(
                f,
                "Rytov variance {rytov_sq} > {RYTOV_WEAK_LIMIT}: log-normal weak-turbulence model is stretched"
            ),
        }
    }
}

/// `ρ = ω_zeq² / (4σ_θ²(l_ro+l_ou)² + 16σ_β² l²)` with `l = l_ro` or `l_ou`.
pub fn pointing_exponent(
    w_zeq_sq: f64,
    sigma_theta: f64,
    sigma_beta: f64,
    l_ro: f64,
    l_ou: f64,
    mode: GeometryMode,
) -> f64 {
    let l = l_ro + l_ou;
    let lever = match mode {
        GeometryMode::PaperPrinted => l_ro,
        GeometryMode::SelfConsistent => l_ou,
    };
    w_zeq_sq
        / (4.0 * sigma_theta * sigma_theta * l * l
            + 16.0 * sigma_beta * sigma_beta * lever * lever)
}

/// Rytov variance `1.23 C_n² k^{7/6} L^{11/6}`.
pub fn rytov_variance(cn2: f64, wavenumber: f64, length: f64) -> f64 {
    1.23 * cn2 * pow(wavenumber, 7.0 / 6.0) * pow(length, 11.0 / 6.0)
}

/// Log-amplitude variance from the 0.30545 prefactor. Kept as a cross-check
/// only; the model uses `σ_R²/4`.
pub fn log_amplitude_variance_direct(cn2: f64, wavenumber: f64, length: f64) -> f64 {
    0.30545 * pow(wavenumber, 7.0 / 6.0) * cn2 * pow(length, 11.0 / 6.0)
}

fn positive(name: &'static str, v: f64) -> Result<(), ParamError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ParamError::NonPositive { name, value: v })
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<(), ParamError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ParamError::Negative { name, value: v })
    }
}

fn fraction(name: &'static str, v: f64) -> Result<(), ParamError> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(ParamError::NotAFraction { name, value: v })
    }
}

impl SystemParams {
    pub fn rice_amplitude(&self) -> f64 {
        self.rice.amplitude()
    }

    pub fn sigma_m_sq(&self) -> f64 {
        self.rice.sigma_m_sq()
    }

    pub fn optical_length(&self) -> f64 {
        self.l_ro + self.l_ou
    }

    /// Hard checks only; see [`SystemParams::validate`] for warnings.
    pub fn check(&self) -> Result<(), ParamError> {
        positive("pt", self.pt)?;
        match self.rice {
            RiceFading::Amplitude { a, sigma_m_sq } => {
                non_negative("rice_a", a)?;
                positive("sigma_m_sq", sigma_m_sq)?;
            }
            RiceFading::Factor { k, sigma_m_sq } => {
                non_negative("rice_k", k)?;
                positive("sigma_m_sq", sigma_m_sq)?;
            }
        }
        positive("sigma_nr_sq", self.sigma_nr_sq)?;
        positive("sigma_nk_sq", self.sigma_nk_sq)?;
        fraction("delta", self.delta)?;
        fraction("alpha_m", self.alpha_m)?;
        fraction("mu_k", self.mu_k)?;
        positive("l_sr", self.l_sr)?;
        positive("l_ro", self.l_ro)?;
        positive("l_ou", self.l_ou)?;
        non_negative("sigma_theta", self.sigma_theta)?;
        non_negative("sigma_beta", self.sigma_beta)?;
        positive("phi", self.phi)?;
        positive("aperture_radius", self.aperture_radius)?;
        positive("wavelength", self.wavelength)?;
        match self.turbulence {
            Turbulence::Cn2(v) => positive("cn2", v)?,
            Turbulence::Rytov(v) => positive("rytov_sq", v)?,
        }
        non_negative("hl_per_km", self.hl_per_km)?;
        positive("mod_kappa", self.mod_kappa)?;
        positive("mod_zeta", self.mod_zeta)?;
        positive("rf_mod_kappa", self.rf_mod_kappa)?;
        positive("rf_mod_zeta", self.rf_mod_zeta)?;
        if !(self.incidence_angle >= 0.0 && self.incidence_angle < 0.5 * PI) {
            return Err(ParamError::BadAngle {
                name: "incidence_angle",
                value: self.incidence_angle,
            });
        }
        Ok(())
    }

    pub fn derive(&self) -> Result<DerivedGeometry, ParamError> {
        self.check()?;
        let l = self.optical_length();
        let w_z = self.phi * l;
        let z = sqrt(PI / 2.0) * self.aperture_radius / w_z;
        let erf_z = erf(z);
        let a0 = erf_z * erf_z;
        let w_zeq_sq = w_z * w_z * sqrt(PI) * erf_z / (2.0 * z * exp(-z * z));
        let rho = pointing_exponent(
            w_zeq_sq,
            self.sigma_theta,
            self.sigma_beta,
            self.l_ro,
            self.l_ou,
            self.geometry_mode,
        );
        let wavenumber = 2.0 * PI / self.wavelength;
        let rytov_sq = match self.turbulence {
            Turbulence::Cn2(cn2) => rytov_variance(cn2, wavenumber, l),
            Turbulence::Rytov(r) => r,
        };
        let h_l = pow(10.0, -(self.hl_per_km * l / 1000.0) / 10.0);
        let g = DerivedGeometry {
            w_z,
            z_ratio: z,
            a0,
            w_zeq_sq,
            rho,
            geometry_mode: self.geometry_mode,
            sigma_x_sq: rytov_sq / 4.0,
            rytov_sq,
            h_l,
            wavenumber,
        };
        for (name, v) in [
            ("w_z", g.w_z),
            ("z", g.z_ratio),
            ("a0", g.a0),
            ("w_zeq_sq", g.w_zeq_sq),
            ("rho", g.rho),
            ("rytov_sq", g.rytov_sq),
            ("h_l", g.h_l),
        ] {
            if !v.is_finite() {
                return Err(ParamError::NonFinite(name));
            }
        }
        Ok(g)
    }

    /// Hard errors for invalid inputs, otherwise the list of model-validity
    /// warnings (empty for the reference system).
    pub fn validate(&self) -> Result<Vec<Diagnostic>, ParamError> {
        let g = self.derive()?;
        let mut out = Vec::new();
        let ratio = g.w_z / self.aperture_radius;
        if ratio <= BEAM_APERTURE_RATIO_MIN {
            out.push(Diagnostic::BeamApertureRatio { ratio });
        }
        if g.rho >= RHO_NEGLIGIBLE {
            out.push(Diagnostic::NegligiblePointingError { rho: g.rho });
        }
        if g.rytov_sq > RYTOV_WEAK_LIMIT {
            out.push(Diagnostic::StrongTurbulence {
                rytov_sq: g.rytov_sq,
            });
        }
        Ok(out)
    }

    pub fn with_pt(&self, pt: f64) -> Self {
        Self {
            pt,
            ..self.clone()
        }
    }

    pub fn with_geometry_mode(&self, geometry_mode: GeometryMode) -> Self {
        Self {
            geometry_mode,
            ..self.clone()
        }
    }
}
