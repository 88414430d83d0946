//! Plain-text `key = value` run configuration.
//!
//! Values are layered: built-in defaults, then an optional file, then
//! `--set key=value` overrides. Unknown keys are rejected at every layer.

use std::collections::BTreeMap;
use std::path::Path;

use nanochiral::fiber::{sellmeier_index, FiberSpec};
use nanochiral::fitting::Weighting;
use nanochiral::incident::IncidentModel;
use nanochiral::scattering::{BeamParams, ModelParams, ParticleSpec};

use crate::CliError;

pub const DEFAULTS: &str = include_str!("../config/defaults.conf");

const KEYS: &[&str] = &[
    "fiber.radius",
    "fiber.wavelength",
    "fiber.n_core",
    "fiber.n_clad",
    "particle.radius",
    "particle.radial_r",
    "model.incident",
    "model.kappa_f",
    "model.c0",
    "model.phi0_deg",
    "grid.phi_deg",
    "grid.theta_deg",
    "grid.map_half_width",
    "grid.map_points",
    "beam.power",
    "beam.waist",
    "beam.efficiency",
    "fit.weighting",
    "synth.noise_rel",
    "synth.seed",
];

/// Validated configuration with every domain object already constructed.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub fiber: FiberSpec,
    pub particle: ParticleSpec,
    pub incident: IncidentModel,
    pub params: ModelParams,
    pub phis_deg: Vec<f64>,
    pub thetas_deg: Vec<f64>,
    pub map_half_width: f64,
    pub map_points: usize,
    pub beam: BeamParams,
    pub weighting: Weighting,
    pub noise_rel: f64,
    pub seed: u64,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parse `key = value` lines; `#` starts a comment.
fn parse_text(text: &str, origin: &str, into: &mut BTreeMap<String, String>) -> Result<(), CliError> {
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("{origin}:{}: expected key = value", i + 1)))?;
        set(into, key.trim(), value.trim(), &format!("{origin}:{}", i + 1))?;
    }
    Ok(())
}

fn set(into: &mut BTreeMap<String, String>, key: &str, value: &str, origin: &str) -> Result<(), CliError> {
    if !KEYS.contains(&key) {
        return Err(config_err(format!("{origin}: unknown key '{key}'")));
    }
    into.insert(key.to_string(), value.to_string());
    Ok(())
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut raw = BTreeMap::new();
        parse_text(DEFAULTS, "defaults", &mut raw)?;
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            parse_text(&text, &path.display().to_string(), &mut raw)?;
        }
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| config_err(format!("--set expects key=value, got '{item}'")))?;
            set(&mut raw, key.trim(), value.trim(), "--set")?;
        }
        Self::from_map(&raw)
    }

    pub fn from_map(raw: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let get = |key: &str| -> Result<&str, CliError> {
            raw.get(key).map(String::as_str).ok_or_else(|| config_err(format!("missing key '{key}'")))
        };
        let num = |key: &str| -> Result<f64, CliError> {
            let v = get(key)?;
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| config_err(format!("{key}: expected a number, got '{v}'")))
        };

        let radius = num("fiber.radius")?;
        let wavelength = num("fiber.wavelength")?;
        let n_core = match get("fiber.n_core")? {
            "sellmeier" => sellmeier_index(wavelength).map_err(|e| config_err(format!("fiber.n_core: {e}")))?,
            _ => num("fiber.n_core")?,
        };
        let fiber = FiberSpec::new(radius, n_core, num("fiber.n_clad")?, wavelength)
            .map_err(|e| config_err(format!("fiber: {e}")))?;

        let particle = ParticleSpec::new(&fiber, num("particle.radius")?, 0.0)
            .map_err(|e| config_err(format!("particle: {e}")))?;
        let particle = match get("particle.radial_r")? {
            "center" => Ok(particle),
            "surface" => particle.with_radial_r(&fiber, fiber.radius),
            _ => particle.with_radial_r(&fiber, num("particle.radial_r")?),
        }
        .map_err(|e| config_err(format!("particle.radial_r: {e}")))?;

        let incident = match get("model.incident")? {
            "unperturbed" => IncidentModel::Unperturbed,
            "cylinder_modified" => IncidentModel::CylinderModified,
            other => {
                return Err(config_err(format!(
                    "model.incident: expected unperturbed or cylinder_modified, got '{other}'"
                )))
            }
        };
        let params = ModelParams::new(num("model.kappa_f")?, num("model.c0")?, num("model.phi0_deg")?)
            .map_err(|e| config_err(format!("model: {e}")))?;

        let phis_deg = parse_grid("grid.phi_deg", get("grid.phi_deg")?)?;
        let thetas_deg = parse_grid("grid.theta_deg", get("grid.theta_deg")?)?;
        let map_half_width = num("grid.map_half_width")?;
        if !(map_half_width > 0.0) {
            return Err(config_err("grid.map_half_width must be positive"));
        }
        let map_points = get("grid.map_points")?
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 2)
            .ok_or_else(|| config_err("grid.map_points must be an integer >= 2"))?;

        let beam = BeamParams::new(num("beam.power")?, num("beam.waist")?, num("beam.efficiency")?, wavelength)
            .map_err(|e| config_err(format!("beam: {e}")))?;
        let weighting = match get("fit.weighting")? {
            "unweighted" => Weighting::Unweighted,
            "poisson" => Weighting::Poisson,
            other => {
                return Err(config_err(format!("fit.weighting: expected unweighted or poisson, got '{other}'")))
            }
        };
        let noise_rel = num("synth.noise_rel")?;
        if noise_rel < 0.0 {
            return Err(config_err("synth.noise_rel must be >= 0"));
        }
        let seed = get("synth.seed")?
            .parse::<u64>()
            .map_err(|_| config_err("synth.seed must be a non-negative integer"))?;

        Ok(Self {
            fiber,
            particle,
            incident,
            params,
            phis_deg,
            thetas_deg,
            map_half_width,
            map_points,
            beam,
            weighting,
            noise_rel,
            seed,
        })
    }
}

/// `a,b,c` or `start:stop:step` (stop excluded).
pub fn parse_grid(key: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || config_err(format!("{key}: expected a list or start:stop:step, got '{text}'"));
    let values: Vec<f64> = if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [start, stop, step] = parts[..] else { return Err(bad()) };
        if !(step > 0.0) || !(stop > start) || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        let count = ((stop - start) / step - 1e-9).ceil() as usize;
        (0..count).map(|i| start + i as f64 * step).collect()
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(bad)?
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_load() {
        let cfg = RunConfig::load(None, &[]).unwrap();
        assert_eq!(cfg.fiber.radius, 157.5e-9);
        assert!((cfg.fiber.n_core - 1.4607).abs() < 1e-3);
        assert_eq!(cfg.thetas_deg.len(), 72);
        assert_eq!(cfg.thetas_deg[1], 5.0);
        assert_eq!(cfg.phis_deg.len(), 180);
        assert!((cfg.particle.radial_r - 202.5e-9).abs() < 1e-20);
        assert_eq!(cfg.params.phi0_deg, 6.3);
    }

    #[test]
    fn overrides_apply_and_unknown_keys_fail() {
        let cfg = RunConfig::load(None, &["model.c0=0".into(), "particle.radial_r = surface".into()]).unwrap();
        assert_eq!(cfg.params.c0, 0.0);
        assert_eq!(cfg.particle.radial_r, cfg.fiber.radius);
        assert!(matches!(RunConfig::load(None, &["fiber.diameter=1".into()]), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::load(None, &["model.c0".into()]), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::load(None, &["fiber.n_clad=2".into()]), Err(CliError::Config(_))));
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("g", "0:20:5").unwrap(), vec![0.0, 5.0, 10.0, 15.0]);
        assert_eq!(parse_grid("g", "84, 264").unwrap(), vec![84.0, 264.0]);
        assert!(parse_grid("g", "0:10").is_err());
        assert!(parse_grid("g", "0:10:-1").is_err());
        assert!(parse_grid("g", "a,b").is_err());
    }
}
