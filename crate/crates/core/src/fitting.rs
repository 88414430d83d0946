//! Least-squares fit of `(κf, φ0)` to measured flux maps and synthetic data
//! generation for closed-loop checks.
//!
//! The model is linear in `κf` once `c0` is subtracted, so `κf` is solved in
//! closed form for every trial `φ0` and only `φ0` is searched numerically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::dataset::{FluxDataset, FluxRow};
use crate::error::{Error, Result};
use crate::polarization::{qwp_state, PolState3};
use crate::scattering::{FluxModel, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Unweighted,
    /// Each residual weighted by `1 / max(counts, 1)`.
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub weighting: Weighting,
    /// Search interval for `φ0` is `[-bound, bound]` degrees.
    pub phi0_bound_deg: f64,
    pub coarse_step_deg: f64,
    pub tolerance_deg: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            weighting: Weighting::Unweighted,
            phi0_bound_deg: 30.0,
            coarse_step_deg: 0.5,
            tolerance_deg: 1e-7,
        }
    }
}

/// Model-based standard errors from the local curvature of the residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StdErrors {
    pub kappa_f: Option<f64>,
    pub phi0_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub kappa_f: f64,
    pub phi0_deg: f64,
    pub c0: f64,
    pub residual_sum: f64,
    pub std_errors: StdErrors,
    pub weighting: Weighting,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn params(&self) -> ModelParams {
        ModelParams { kappa_f: self.kappa_f, c0: self.c0, phi0_deg: self.phi0_deg }
    }
}

/// Dataset pre-arranged for repeated model evaluation.
struct Prepared<'a> {
    rows: &'a [FluxRow],
    azimuths: Vec<f64>,
    azimuth_of_row: Vec<usize>,
    states: Vec<PolState3>,
    weights: Vec<(f64, f64)>,
}

impl<'a> Prepared<'a> {
    fn new(dataset: &'a FluxDataset, weighting: Weighting) -> Self {
        let rows = dataset.rows();
        let azimuths = dataset.azimuths();
        let azimuth_of_row = rows
            .iter()
            .map(|r| azimuths.binary_search_by(|p| p.total_cmp(&r.phi_deg)).unwrap_or(0))
            .collect();
        let states = rows.iter().map(|r| qwp_state(r.theta_deg)).collect();
        let weights = rows
            .iter()
            .map(|r| match weighting {
                Weighting::Unweighted => (1.0, 1.0),
                Weighting::Poisson => (1.0 / r.c_plus.max(1.0), 1.0 / r.c_minus.max(1.0)),
            })
            .collect();
        Self { rows, azimuths, azimuth_of_row, states, weights }
    }

    /// `(g+, g-)` per row at offset `phi0`.
    fn couplings(&self, model: &FluxModel, phi0_deg: f64) -> Vec<(f64, f64)> {
        let per_azimuth: Vec<_> =
            self.azimuths.iter().map(|&p| model.azimuth_coupling(p, phi0_deg)).collect();
        self.azimuth_of_row
            .iter()
            .zip(&self.states)
            .map(|(&i, st)| per_azimuth[i].at(st))
            .collect()
    }

    fn residual(&self, g: &[(f64, f64)], kappa: f64, c0: f64) -> f64 {
        self.rows
            .iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((row, &(gp, gm)), &(wp, wm))| {
                let dp = kappa * gp + c0 - row.c_plus;
                let dm = kappa * gm + c0 - row.c_minus;
                wp * dp * dp + wm * dm * dm
            })
            .sum()
    }

    /// Closed-form `κf` minimizing the residual at fixed couplings.
    fn best_kappa(&self, g: &[(f64, f64)], c0: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for ((row, &(gp, gm)), &(wp, wm)) in self.rows.iter().zip(g).zip(&self.weights) {
            num += wp * gp * (row.c_plus - c0) + wm * gm * (row.c_minus - c0);
            den += wp * gp * gp + wm * gm * gm;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    fn profile(&self, model: &FluxModel, c0: f64, phi0: f64) -> (f64, f64) {
        let g = self.couplings(model, phi0);
        let kappa = self.best_kappa(&g, c0);
        (self.residual(&g, kappa, c0), kappa)
    }

    fn full(&self, model: &FluxModel, c0: f64, kappa: f64, phi0: f64) -> f64 {
        self.residual(&self.couplings(model, phi0), kappa, c0)
    }
}

/// Unweighted sum over nodes and both detectors of `(model - data)²`.
pub fn residual(params: &ModelParams, dataset: &FluxDataset, model: &FluxModel) -> f64 {
    let prepared = Prepared::new(dataset, Weighting::Unweighted);
    prepared.full(model, params.c0, params.kappa_f, params.phi0_deg)
}

/// Fit `κf` and `φ0` with `c0` held fixed. `init.phi0_deg` seeds the search
/// alongside the coarse scan; `init.kappa_f` is not needed by the closed-form solve.
pub fn fit(
    model: &FluxModel,
    dataset: &FluxDataset,
    c0: f64,
    init: &ModelParams,
    options: &FitOptions,
) -> Result<FitResult> {
    if dataset.is_empty() {
        return Err(Error::InvalidParameter("cannot fit an empty dataset".into()));
    }
    if !(c0 >= 0.0) || !c0.is_finite() {
        return Err(Error::InvalidParameter(format!("c0 must be >= 0, got {c0}")));
    }
    let mut warnings = Vec::new();
    let n_phi = dataset.azimuths().len();
    let n_theta = dataset.plate_angles().len();
    if n_phi < 2 {
        warnings.push(format!("only {n_phi} azimuth(s): phi0 is weakly identified"));
    }
    if n_theta < 4 {
        warnings.push(format!("only {n_theta} plate angle(s): fewer than 4"));
    }

    let prepared = Prepared::new(dataset, options.weighting);
    let bound = options.phi0_bound_deg;
    let step = options.coarse_step_deg;
    let n_steps = (2.0 * bound / step).round() as usize;
    let mut candidates: Vec<f64> = (0..=n_steps).map(|i| -bound + i as f64 * step).collect();
    if init.phi0_deg.abs() < bound {
        candidates.push(init.phi0_deg);
    }
    let objective = |phi0: f64| prepared.profile(model, c0, phi0).0;
    let (best, _) = candidates
        .iter()
        .map(|&p| (p, objective(p)))
        .fold((f64::NAN, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
    if !best.is_finite() {
        return Err(Error::FitNonConvergence("residual is not finite anywhere".into()));
    }
    if best.abs() >= bound {
        return Err(Error::FitNonConvergence(format!(
            "phi0 search hit the bound at {best} deg"
        )));
    }
    let lo = (best - step).max(-bound);
    let hi = (best + step).min(bound);
    let phi0 = golden_section(objective, lo, hi, options.tolerance_deg);
    if phi0.abs() >= bound - options.tolerance_deg {
        return Err(Error::FitNonConvergence(format!(
            "phi0 search hit the bound at {phi0} deg"
        )));
    }
    let (residual_sum, kappa) = prepared.profile(model, c0, phi0);
    if !(kappa > 0.0) {
        return Err(Error::FitNonConvergence(format!(
            "best-fit kappa_f is not positive ({kappa})"
        )));
    }
    let std_errors = standard_errors(&prepared, model, c0, kappa, phi0, residual_sum);
    Ok(FitResult {
        kappa_f: kappa,
        phi0_deg: phi0,
        c0,
        residual_sum,
        std_errors,
        weighting: options.weighting,
        warnings,
    })
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// `cov = 2 s² H⁻¹`, `s² = S/(N - 2)`, with `H` the finite-difference Hessian of `S`.
fn standard_errors(
    prepared: &Prepared,
    model: &FluxModel,
    c0: f64,
    kappa: f64,
    phi0: f64,
    residual_sum: f64,
) -> StdErrors {
    let n = 2 * prepared.rows.len();
    if n <= 2 {
        return StdErrors { kappa_f: None, phi0_deg: None };
    }
    let s = |k: f64, p: f64| prepared.full(model, c0, k, p);
    let hk = 1e-4 * kappa.abs().max(1e-12);
    let hp = 1e-3;
    let f00 = s(kappa, phi0);
    let h_kk = (s(kappa + hk, phi0) - 2.0 * f00 + s(kappa - hk, phi0)) / (hk * hk);
    let h_pp = (s(kappa, phi0 + hp) - 2.0 * f00 + s(kappa, phi0 - hp)) / (hp * hp);
    let h_kp = (s(kappa + hk, phi0 + hp) - s(kappa + hk, phi0 - hp) - s(kappa - hk, phi0 + hp)
        + s(kappa - hk, phi0 - hp))
        / (4.0 * hk * hp);
    let det = h_kk * h_pp - h_kp * h_kp;
    if !(det > 0.0) || !(h_kk > 0.0) {
        return StdErrors { kappa_f: None, phi0_deg: None };
    }
    let s2 = residual_sum / (n - 2) as f64;
    let var_k = 2.0 * s2 * h_pp / det;
    let var_p = 2.0 * s2 * h_kk / det;
    StdErrors {
        kappa_f: (var_k >= 0.0).then(|| var_k.sqrt()),
        phi0_deg: (var_p >= 0.0).then(|| var_p.sqrt()),
    }
}

/// Model fluxes with multiplicative Gaussian noise of relative width `noise_rel`,
/// clamped at zero. Deterministic for a given seed.
pub fn synthesize_dataset(
    model: &FluxModel,
    params: &ModelParams,
    phis_deg: &[f64],
    thetas_deg: &[f64],
    noise_rel: f64,
    seed: u64,
) -> Result<FluxDataset> {
    if !(noise_rel >= 0.0) || !noise_rel.is_finite() {
        return Err(Error::InvalidParameter(format!("noise level must be >= 0, got {noise_rel}")));
    }
    let clean = model.flux_map(params, phis_deg, thetas_deg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noisy = |v: f64| {
        let z: f64 = StandardNormal.sample(&mut rng);
        (v * (1.0 + noise_rel * z)).max(0.0)
    };
    let rows = clean
        .rows()
        .iter()
        .map(|r| {
            let cp = noisy(r.c_plus);
            let cm = noisy(r.c_minus);
            FluxRow::new(r.phi_deg, r.theta_deg, cp, cm)
        })
        .collect();
    FluxDataset::new(rows)
}
