use std::fmt::Write;
use std::path::Path;

use serde::Serialize;

use nanochiral::dataset::FluxDataset;
use nanochiral::fiber::{solve_he11, ModeLabel, ModeSolution};
use nanochiral::fitting::{self, FitOptions, FitResult};
use nanochiral::incident::{IncidentField, IncidentModel};
use nanochiral::polarization::PolState3;
use nanochiral::scattering::{overlap_map as overlap_values, FluxModel};

use crate::config::RunConfig;
use crate::CliError;

fn solve(cfg: &RunConfig) -> Result<ModeSolution, CliError> {
    Ok(solve_he11(&cfg.fiber)?)
}

fn flux_model(cfg: &RunConfig) -> Result<FluxModel, CliError> {
    Ok(FluxModel::new(&solve(cfg)?, &cfg.particle, cfg.incident)?)
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn incident_name(model: IncidentModel) -> &'static str {
    match model {
        IncidentModel::Unperturbed => "unperturbed",
        IncidentModel::CylinderModified => "cylinder_modified",
    }
}

/// Square transverse grid, `y` outer and `x` inner, both ascending.
fn transverse_grid(cfg: &RunConfig) -> Vec<(f64, f64)> {
    let n = cfg.map_points;
    let half = cfg.map_half_width * cfg.fiber.radius;
    // Mirror nodes are exact negatives, so a node on the surface has its twin there too.
    let coord = |i: usize| half * (2.0 * i as f64 - (n - 1) as f64) / (n - 1) as f64;
    (0..n).flat_map(|j| (0..n).map(move |i| (coord(i), coord(j)))).collect()
}

#[derive(Serialize)]
struct ModesReport {
    #[serde(rename = "V")]
    v: f64,
    single_mode: bool,
    n_core: f64,
    n_clad: f64,
    beta: f64,
    beta_over_k0: f64,
    h: f64,
    q: f64,
    s: f64,
    residual: f64,
    circular_point_r: Option<f64>,
    circular_point_r_over_a: Option<f64>,
    max_longitudinal_ratio: f64,
    max_longitudinal_ratio_phi_deg: f64,
}

pub fn modes(cfg: &RunConfig) -> Result<String, CliError> {
    let sol = solve(cfg)?;
    let r_star = match sol.circular_point() {
        Ok(r) => Some(r),
        Err(nanochiral::Error::NoRoot(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let (phi, ratio) = sol.max_longitudinal_ratio()?;
    json(&ModesReport {
        v: sol.v_number,
        single_mode: sol.is_single_mode(),
        n_core: cfg.fiber.n_core,
        n_clad: cfg.fiber.n_clad,
        beta: sol.beta,
        beta_over_k0: sol.beta / cfg.fiber.k0(),
        h: sol.h,
        q: sol.q,
        s: sol.s,
        residual: sol.residual,
        circular_point_r: r_star,
        circular_point_r_over_a: r_star.map(|r| r / cfg.fiber.radius),
        max_longitudinal_ratio: ratio,
        max_longitudinal_ratio_phi_deg: phi.to_degrees(),
    })
}

pub fn overlap_map(cfg: &RunConfig, label: ModeLabel, pol: PolState3) -> Result<String, CliError> {
    let sol = solve(cfg)?;
    let points = transverse_grid(cfg);
    let values = overlap_values(&sol, label, &pol, &points)?;
    let mut out = String::from("x,y,overlap\n");
    for ((x, y), v) in points.iter().zip(values) {
        writeln!(out, "{x:e},{y:e},{v:e}").unwrap();
    }
    Ok(out)
}

pub fn field_map(cfg: &RunConfig, pol: PolState3) -> Result<String, CliError> {
    let field = IncidentField::new(&cfg.fiber, pol, cfg.incident)?;
    let mut out = String::from("x,y,intensity\n");
    for (x, y) in transverse_grid(cfg) {
        let e = field.at(x.hypot(y), y.atan2(x))?;
        writeln!(out, "{x:e},{y:e},{:e}", e.norm_sqr()).unwrap();
    }
    Ok(out)
}

pub fn flux_map(cfg: &RunConfig) -> Result<String, CliError> {
    let model = flux_model(cfg)?;
    let map = model.flux_map(&cfg.params, &cfg.phis_deg, &cfg.thetas_deg)?;
    Ok(map.to_csv_string()?)
}

pub fn directionality(cfg: &RunConfig, phis: &[f64]) -> Result<String, CliError> {
    let model = flux_model(cfg)?;
    let map = model.flux_map(&cfg.params, phis, &cfg.thetas_deg)?;
    let mut out = String::from("phi_deg,theta_deg,directionality\n");
    for row in map.rows() {
        let d = row.directionality.map(|d| format!("{d:e}")).unwrap_or_default();
        writeln!(out, "{:e},{:e},{d}", row.phi_deg, row.theta_deg).unwrap();
    }
    Ok(out)
}

pub fn synth(cfg: &RunConfig, seed: u64, noise_rel: f64) -> Result<String, CliError> {
    let model = flux_model(cfg)?;
    let data = fitting::synthesize_dataset(&model, &cfg.params, &cfg.phis_deg, &cfg.thetas_deg, noise_rel, seed)?;
    Ok(data.to_csv_string()?)
}

#[derive(Serialize)]
struct FitReport<'a> {
    #[serde(flatten)]
    result: &'a FitResult,
    std_errors_kind: &'static str,
    incident_model: &'static str,
    nodes: usize,
}

pub fn fit(cfg: &RunConfig, data: &Path) -> Result<String, CliError> {
    let dataset = FluxDataset::read_path(data)?;
    let model = flux_model(cfg)?;
    let options = FitOptions { weighting: cfg.weighting, ..FitOptions::default() };
    let result = fitting::fit(&model, &dataset, cfg.params.c0, &cfg.params, &options)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    json(&FitReport {
        result: &result,
        std_errors_kind: "model_based",
        incident_model: incident_name(cfg.incident),
        nodes: dataset.len(),
    })
}

#[derive(Serialize)]
struct CrossSectionReport {
    phi_deg: f64,
    plate_angles: usize,
    incident_model: &'static str,
    both_detectors_um2: f64,
    per_detector_um2: f64,
}

pub fn cross_section(cfg: &RunConfig, phi_deg: f64) -> Result<String, CliError> {
    let model = flux_model(cfg)?;
    let s = model.cross_section(&cfg.params, &cfg.beam, phi_deg, &cfg.thetas_deg)?;
    json(&CrossSectionReport {
        phi_deg,
        plate_angles: cfg.thetas_deg.len(),
        incident_model: incident_name(cfg.incident),
        both_detectors_um2: s.both_detectors * 1e12,
        per_detector_um2: s.per_detector * 1e12,
    })
}
