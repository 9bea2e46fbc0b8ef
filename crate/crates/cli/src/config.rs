//! `key = value` configuration files.
//!
//! Missing keys keep the reference-system defaults. Angles accept `mrad`,
//! `rad` or `deg`; powers `dBm` or `W`; `rice_k` accepts `dB`; lengths an
//! optional `m`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use oris_link_core::params::{
    db_to_linear, dbm_to_watts, Diagnostic, GeometryMode, RiceFading, SystemParams, Turbulence,
};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key `{key}` on line {line}")]
    UnknownKey { key: String, line: usize },
    #[error("key `{key}` given twice (lines {first} and {second})")]
    Duplicate {
        key: String,
        first: usize,
        second: usize,
    },
    #[error("bad value for `{key}` on line {line}: {msg}")]
    Value { key: String, line: usize, msg: String },
    #[error("{0}")]
    Conflict(String),
    #[error(transparent)]
    Params(#[from] oris_link_core::params::ParamError),
}

#[derive(Clone, Copy)]
enum Kind {
    Plain,
    Length,
    Angle,
    Power,
    Ratio,
    Mode,
}

const KEYS: &[(&str, Kind)] = &[
    ("pt", Kind::Power),
    ("rice_a", Kind::Plain),
    ("sigma_m_sq", Kind::Plain),
    ("rice_k", Kind::Ratio),
    ("sigma_nr_sq", Kind::Power),
    ("sigma_nk_sq", Kind::Power),
    ("delta", Kind::Plain),
    ("alpha_m", Kind::Plain),
    ("mu_k", Kind::Plain),
    ("l_sr", Kind::Length),
    ("l_ro", Kind::Length),
    ("l_ou", Kind::Length),
    ("sigma_theta", Kind::Angle),
    ("sigma_beta", Kind::Angle),
    ("phi", Kind::Angle),
    ("aperture_radius", Kind::Length),
    ("wavelength", Kind::Length),
    ("cn2", Kind::Plain),
    ("rytov_sq", Kind::Plain),
    ("hl_per_km", Kind::Plain),
    ("mod_kappa", Kind::Plain),
    ("mod_zeta", Kind::Plain),
    ("rf_mod_kappa", Kind::Plain),
    ("rf_mod_zeta", Kind::Plain),
    ("geometry_mode", Kind::Mode),
    ("incidence_angle", Kind::Angle),
];

/// A parsed configuration with its canonical text and digest.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub params: SystemParams,
    pub canonical: String,
    pub digest: String,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn load(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

fn split_unit<'a>(raw: &'a str, units: &[&str]) -> (&'a str, Option<&'a str>) {
    for u in units {
        if let Some(num) = raw.strip_suffix(u) {
            let num = num.trim_end();
            if !num.is_empty() {
                return (num, Some(&raw[raw.len() - u.len()..]));
            }
        }
    }
    (raw, None)
}

fn number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn convert(kind: Kind, raw: &str) -> Result<f64, String> {
    let units: &[&str] = match kind {
        Kind::Plain | Kind::Mode => &[],
        Kind::Length => &["m"],
        Kind::Angle => &["mrad", "rad", "deg"],
        Kind::Power => &["dBm", "W"],
        Kind::Ratio => &["dB"],
    };
    let (num, unit) = split_unit(raw, units);
    let v = number(num).ok_or_else(|| format!("`{raw}` is not a number with an accepted unit"))?;
    Ok(match unit {
        None => v,
        Some("mrad") => v * 1e-3,
        Some("rad") | Some("m") | Some("W") => v,
        Some("deg") => v.to_radians(),
        Some("dBm") => dbm_to_watts(v),
        Some("dB") => db_to_linear(v),
        Some(u) => return Err(format!("unsupported unit `{u}`")),
    })
}

pub fn parse(text: &str) -> Result<LoadedConfig, ConfigError> {
    let mut seen: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = k.trim().to_string();
        let value = v.trim().to_string();
        if value.is_empty() {
            return Err(ConfigError::Syntax {
                line: line_no,
                msg: format!("missing value for `{key}`"),
            });
        }
        if !KEYS.iter().any(|(name, _)| *name == key) {
            return Err(ConfigError::UnknownKey { key, line: line_no });
        }
        if let Some((first, _)) = seen.get(&key) {
            return Err(ConfigError::Duplicate {
                key,
                first: *first,
                second: line_no,
            });
        }
        seen.insert(key, (line_no, value));
    }

    let mut p = SystemParams::default();
    let mut values: BTreeMap<&str, f64> = BTreeMap::new();
    for (key, (line, value)) in &seen {
        let kind = KEYS.iter().find(|(n, _)| n == key).map(|(_, k)| *k).unwrap();
        if let Kind::Mode = kind {
            p.geometry_mode = GeometryMode::parse(value).ok_or_else(|| ConfigError::Value {
                key: key.clone(),
                line: *line,
                msg: format!("expected `paper-printed` or `self-consistent`, got `{value}`"),
            })?;
            continue;
        }
        let v = convert(kind, value).map_err(|msg| ConfigError::Value {
            key: key.clone(),
            line: *line,
            msg,
        })?;
        let name = KEYS.iter().find(|(n, _)| n == key).unwrap().0;
        values.insert(name, v);
    }

    if values.contains_key("rice_a") && values.contains_key("rice_k") {
        return Err(ConfigError::Conflict(
            "give either rice_a or rice_k, not both".into(),
        ));
    }
    if values.contains_key("cn2") && values.contains_key("rytov_sq") {
        return Err(ConfigError::Conflict(
            "give either cn2 or rytov_sq, not both".into(),
        ));
    }
    let sigma_m_sq = values.get("sigma_m_sq").copied().unwrap_or(p.sigma_m_sq());
    p.rice = if let Some(&a) = values.get("rice_a") {
        RiceFading::Amplitude { a, sigma_m_sq }
    } else {
        let k = values.get("rice_k").copied().unwrap_or(match p.rice {
            RiceFading::Factor { k, .. } => k,
            RiceFading::Amplitude { .. } => unreachable!(),
        });
        RiceFading::Factor { k, sigma_m_sq }
    };
    if let Some(&v) = values.get("cn2") {
        p.turbulence = Turbulence::Cn2(v);
    }
    if let Some(&v) = values.get("rytov_sq") {
        p.turbulence = Turbulence::Rytov(v);
    }
    for (name, v) in &values {
        let slot = match *name {
            "pt" => &mut p.pt,
            "sigma_nr_sq" => &mut p.sigma_nr_sq,
            "sigma_nk_sq" => &mut p.sigma_nk_sq,
            "delta" => &mut p.delta,
            "alpha_m" => &mut p.alpha_m,
            "mu_k" => &mut p.mu_k,
            "l_sr" => &mut p.l_sr,
            "l_ro" => &mut p.l_ro,
            "l_ou" => &mut p.l_ou,
            "sigma_theta" => &mut p.sigma_theta,
            "sigma_beta" => &mut p.sigma_beta,
            "phi" => &mut p.phi,
            "aperture_radius" => &mut p.aperture_radius,
            "wavelength" => &mut p.wavelength,
            "hl_per_km" => &mut p.hl_per_km,
            "mod_kappa" => &mut p.mod_kappa,
            "mod_zeta" => &mut p.mod_zeta,
            "rf_mod_kappa" => &mut p.rf_mod_kappa,
            "rf_mod_zeta" => &mut p.rf_mod_zeta,
            "incidence_angle" => &mut p.incidence_angle,
            _ => continue,
        };
        *slot = *v;
    }
    let diagnostics = p.validate()?;

    let mut canonical = String::new();
    for (key, (_, value)) in &seen {
        let _ = writeln!(canonical, "{key} = {value}");
    }
    let digest = sha256_hex(canonical.as_bytes());
    Ok(LoadedConfig {
        params: p,
        canonical,
        digest,
        diagnostics,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(64);
    for b in Sha256::digest(bytes) {
        let _ = write!(s, "{b:02x}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_reference_system() {
        let c = parse("# nothing\n\n").unwrap();
        assert_eq!(c.params, SystemParams::default());
        assert!(c.diagnostics.is_empty());
        assert_eq!(c.canonical, "");
        assert_eq!(
            c.digest,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn units() {
        let c = parse(
            "pt = 30 dBm\nsigma_theta = 4mrad\nphi = 0.008 rad\nrice_k = 10 dB\n\
             incidence_angle = 30 deg\nl_ro = 40 m\nsigma_nk_sq = 2e-4 W\n",
        )
        .unwrap();
        let p = c.params;
        assert!((p.pt - 1.0).abs() < 1e-15);
        assert!((p.sigma_theta - 4e-3).abs() < 1e-18);
        assert_eq!(p.phi, 0.008);
        assert!((p.rice.factor() - 10.0).abs() < 1e-12);
        assert!((p.incidence_angle - std::f64::consts::PI / 6.0).abs() < 1e-15);
        assert_eq!(p.l_ro, 40.0);
        assert_eq!(p.sigma_nk_sq, 2e-4);
    }

    #[test]
    fn digest_ignores_order_comments_and_spacing() {
        let a = parse("mu_k = 0.5\npt=20 dBm # comment\n").unwrap();
        let b = parse("# header\n  pt =   20 dBm\nmu_k=0.5").unwrap();
        assert_eq!(a.canonical, "mu_k = 0.5\npt = 20 dBm\n");
        assert_eq!(a.digest, b.digest);
        assert_ne!(a.digest, parse("mu_k = 0.25\n").unwrap().digest);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("bogus = 1"), Err(ConfigError::UnknownKey { .. })));
        assert!(matches!(parse("pt = 1\npt = 2"), Err(ConfigError::Duplicate { .. })));
        assert!(matches!(parse("pt 1"), Err(ConfigError::Syntax { .. })));
        assert!(matches!(parse("pt = 1 mrad"), Err(ConfigError::Value { .. })));
        assert!(matches!(parse("l_ro = 5 dBm"), Err(ConfigError::Value { .. })));
        assert!(matches!(parse("geometry_mode = sideways"), Err(ConfigError::Value { .. })));
        assert!(matches!(parse("rice_a = 1\nrice_k = 2"), Err(ConfigError::Conflict(_))));
        assert!(matches!(parse("sigma_m_sq = 0"), Err(ConfigError::Params(_))));
        assert!(matches!(parse("mu_k = 1.5"), Err(ConfigError::Params(_))));
    }

    #[test]
    fn diagnostics_surface() {
        let c = parse("aperture_radius = 0.5").unwrap();
        assert_eq!(c.diagnostics.len(), 1);
        assert!(c.diagnostics[0].to_string().starts_with("beam/aperture ratio 2.4"));
    }

    #[test]
    fn geometry_mode_keyword() {
        let c = parse("geometry_mode = self-consistent").unwrap();
        assert_eq!(c.params.geometry_mode, GeometryMode::SelfConsistent);
    }
}
