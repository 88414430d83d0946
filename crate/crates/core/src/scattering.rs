//! Light scattered by a point-dipole nanoparticle into the guided fiber modes.
//!
//! The detected fluxes are
//! `c± = κf (|𝓔·ε*(±,x)|² + |𝓔·ε*(±,y)|²) + c0`,
//! with both the mode profiles and the excitation field evaluated at the
//! particle's true position `(r, φ - φ0)`. The `+` detector collects light
//! running towards `+z`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dataset::{FluxDataset, FluxRow};
use crate::error::{Error, Result};
use crate::fiber::{Axis, Direction, FiberSpec, ModeLabel, ModeSolution, RadialProfile};
use crate::field::ComplexField3;
use crate::incident::{cylinder_coefficients, IncidentModel, RadialSeries, Side};
use crate::polarization::{overlap_fraction, qwp_state, PolState3};

const PLANCK: f64 = 6.626_070_15e-34;
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `d = α 𝓔`.
pub fn dipole_moment(alpha: Complex64, e_exc: &ComplexField3) -> ComplexField3 {
    e_exc.scale(alpha)
}

/// Power radiated into a mode, up to constant factors: `|d · ε*|²`.
pub fn emission_into_mode(d: &ComplexField3, mode: &ComplexField3) -> f64 {
    d.dot_conj(mode).norm_sqr()
}

/// `D = (c+ - c-)/(c+ + c-)`.
pub fn directionality(c_plus: f64, c_minus: f64) -> Result<f64> {
    let sum = c_plus + c_minus;
    if sum == 0.0 || !sum.is_finite() {
        return Err(Error::Degenerate(format!(
            "directionality undefined for fluxes {c_plus} and {c_minus}"
        )));
    }
    Ok((c_plus - c_minus) / sum)
}

/// Nanoparticle on the fiber surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleSpec {
    pub radius_p: f64,
    pub azimuth_deg: f64,
    /// Radius at which fields are evaluated; the particle centre by default.
    pub radial_r: f64,
    pub alpha: Complex64,
}

impl ParticleSpec {
    pub fn new(fiber: &FiberSpec, radius_p: f64, azimuth_deg: f64) -> Result<Self> {
        if !(radius_p > 0.0) || !radius_p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "particle radius must be positive, got {radius_p}"
            )));
        }
        Ok(Self {
            radius_p,
            azimuth_deg,
            radial_r: fiber.radius + radius_p,
            alpha: Complex64::new(1.0, 0.0),
        })
    }

    /// Override the evaluation radius (e.g. the fiber surface itself).
    pub fn with_radial_r(mut self, fiber: &FiberSpec, radial_r: f64) -> Result<Self> {
        if !(radial_r >= fiber.radius) || !radial_r.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "particle must sit outside the fiber: r = {radial_r} < a = {}",
                fiber.radius
            )));
        }
        self.radial_r = radial_r;
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: Complex64) -> Self {
        self.alpha = alpha;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Photon-flux amplitude, counts/s.
    pub kappa_f: f64,
    /// Background flux, counts/s.
    pub c0: f64,
    /// Angular offset of the particle, degrees.
    pub phi0_deg: f64,
}

impl ModelParams {
    pub fn new(kappa_f: f64, c0: f64, phi0_deg: f64) -> Result<Self> {
        if !(kappa_f >= 0.0) || !kappa_f.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa_f must be >= 0, got {kappa_f}")));
        }
        if !(c0 >= 0.0) || !c0.is_finite() {
            return Err(Error::InvalidParameter(format!("c0 must be >= 0, got {c0}")));
        }
        if !phi0_deg.is_finite() {
            return Err(Error::InvalidParameter("phi0 must be finite".into()));
        }
        Ok(Self { kappa_f, c0, phi0_deg })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxPrediction {
    pub c_plus: f64,
    pub c_minus: f64,
    pub directionality: f64,
}

/// Excitation beam at the particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams {
    pub power: f64,
    pub waist: f64,
    pub detection_efficiency: f64,
    pub wavelength: f64,
}

impl BeamParams {
    pub fn new(power: f64, waist: f64, detection_efficiency: f64, wavelength: f64) -> Result<Self> {
        for (name, v) in [("power", power), ("waist", waist), ("wavelength", wavelength)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(detection_efficiency > 0.0 && detection_efficiency <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "detection efficiency must lie in (0, 1], got {detection_efficiency}"
            )));
        }
        Ok(Self { power, waist, detection_efficiency, wavelength })
    }

    /// Peak Gaussian intensity `2P/(π w²)`, W/m².
    pub fn peak_intensity(&self) -> f64 {
        2.0 * self.power / (std::f64::consts::PI * self.waist * self.waist)
    }

    pub fn photon_energy(&self) -> f64 {
        PLANCK * SPEED_OF_LIGHT / self.wavelength
    }

    /// Incident photons per second per square metre at the beam centre.
    pub fn photon_flux_density(&self) -> f64 {
        self.peak_intensity() / self.photon_energy()
    }
}

/// Fiber-coupled scattering cross-section, m², in two detector conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSection {
    /// Both detectors' signal summed.
    pub both_detectors: f64,
    /// Average signal of one detector.
    pub per_detector: f64,
}

#[derive(Debug, Clone)]
enum Excitation {
    PlaneWave { k: f64 },
    Cylinder(RadialSeries),
}

/// `d·ε*` for `y`- and `z`-polarized drive, per mode label, at one position.
/// Any transverse drive follows by linearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AzimuthCoupling {
    plus: [(Complex64, Complex64); 2],
    minus: [(Complex64, Complex64); 2],
}

impl AzimuthCoupling {
    /// `(g+, g-)` for drive polarization `pol`.
    pub fn at(&self, pol: &PolState3) -> (f64, f64) {
        let p = pol.vector();
        let sum = |modes: &[(Complex64, Complex64); 2]| {
            modes.iter().map(|(a, b)| (p.ey * a + p.ez * b).norm_sqr()).sum::<f64>()
        };
        (sum(&self.plus), sum(&self.minus))
    }
}

/// Forward model for the detected fluxes at one evaluation radius.
///
/// Radial functions are computed once; every query only needs angular factors.
#[derive(Debug, Clone)]
pub struct FluxModel {
    solution: ModeSolution,
    particle: ParticleSpec,
    model: IncidentModel,
    profile: RadialProfile,
    excitation: Excitation,
}

impl FluxModel {
    pub fn new(solution: &ModeSolution, particle: &ParticleSpec, model: IncidentModel) -> Result<Self> {
        let spec = &solution.spec;
        let particle = particle.with_radial_r(spec, particle.radial_r)?;
        let profile = solution.radial(particle.radial_r)?;
        let excitation = match model {
            IncidentModel::Unperturbed => Excitation::PlaneWave { k: spec.n_clad * spec.k0() },
            IncidentModel::CylinderModified => Excitation::Cylinder(
                cylinder_coefficients(spec)?.at_radius(particle.radial_r, Side::Exterior)?,
            ),
        };
        Ok(Self { solution: *solution, particle, model, profile, excitation })
    }

    pub fn solution(&self) -> &ModeSolution {
        &self.solution
    }

    pub fn particle(&self) -> &ParticleSpec {
        &self.particle
    }

    pub fn incident_model(&self) -> IncidentModel {
        self.model
    }

    /// Excitation field at lab azimuth `phi` (radians) on the evaluation circle.
    pub fn excitation(&self, pol: &PolState3, phi: f64) -> ComplexField3 {
        match &self.excitation {
            Excitation::PlaneWave { k } => {
                let x = self.particle.radial_r * phi.cos();
                pol.vector().scale(Complex64::from_polar(1.0, -k * x))
            }
            Excitation::Cylinder(series) => series.field(pol, phi),
        }
    }

    /// Mode projections of the two excitation channels at one azimuth.
    pub fn azimuth_coupling(&self, phi_deg: f64, phi0_deg: f64) -> AzimuthCoupling {
        let phi = (phi_deg - phi0_deg).to_radians();
        let ey = dipole_moment(self.particle.alpha, &self.excitation(&PolState3::linear_y(), phi));
        let ez = dipole_moment(self.particle.alpha, &self.excitation(&PolState3::linear_z(), phi));
        let project = |direction| {
            [Axis::X, Axis::Y].map(|axis| {
                let mode = self.profile.field(ModeLabel::new(axis, direction), phi);
                (ey.dot_conj(&mode), ez.dot_conj(&mode))
            })
        };
        AzimuthCoupling { plus: project(Direction::Plus), minus: project(Direction::Minus) }
    }

    /// Flux per unit `κf` into each detector, `(g+, g-)`, before background.
    pub fn couplings(&self, phi_deg: f64, theta_deg: f64, phi0_deg: f64) -> (f64, f64) {
        self.azimuth_coupling(phi_deg, phi0_deg).at(&qwp_state(theta_deg))
    }

    /// Fluxes without the directionality, which may be undefined.
    pub fn fluxes(&self, params: &ModelParams, phi_deg: f64, theta_deg: f64) -> (f64, f64) {
        let (gp, gm) = self.couplings(phi_deg, theta_deg, params.phi0_deg);
        (params.kappa_f * gp + params.c0, params.kappa_f * gm + params.c0)
    }

    pub fn predict(&self, params: &ModelParams, phi_deg: f64, theta_deg: f64) -> Result<FluxPrediction> {
        let (c_plus, c_minus) = self.fluxes(params, phi_deg, theta_deg);
        Ok(FluxPrediction { c_plus, c_minus, directionality: directionality(c_plus, c_minus)? })
    }

    /// Fluxes at every node, rows ordered by φ then θ.
    pub fn flux_map(&self, params: &ModelParams, phis_deg: &[f64], thetas_deg: &[f64]) -> Result<FluxDataset> {
        if phis_deg.is_empty() || thetas_deg.is_empty() {
            return Err(Error::InvalidParameter("flux map needs non-empty grids".into()));
        }
        let blocks: Vec<Vec<FluxRow>> = phis_deg
            .par_iter()
            .map(|&phi| {
                thetas_deg
                    .iter()
                    .map(|&theta| {
                        let (cp, cm) = self.fluxes(params, phi, theta);
                        FluxRow::new(phi, theta, cp, cm)
                    })
                    .collect()
            })
            .collect();
        FluxDataset::new(blocks.into_iter().flatten().collect())
    }

    /// `σ_f = ⟨c+ + c- - 2c0⟩_θ / (η I/ħω)`; the per-detector form halves the signal.
    pub fn cross_section(
        &self,
        params: &ModelParams,
        beam: &BeamParams,
        phi_deg: f64,
        thetas_deg: &[f64],
    ) -> Result<CrossSection> {
        if thetas_deg.is_empty() {
            return Err(Error::InvalidParameter("cross-section needs at least one plate angle".into()));
        }
        let mean = thetas_deg
            .iter()
            .map(|&t| {
                let (gp, gm) = self.couplings(phi_deg, t, params.phi0_deg);
                params.kappa_f * (gp + gm)
            })
            .sum::<f64>()
            / thetas_deg.len() as f64;
        let both = mean / (beam.detection_efficiency * beam.photon_flux_density());
        Ok(CrossSection { both_detectors: both, per_detector: 0.5 * both })
    }
}

/// Fluxes for one particle and plate angle.
pub fn flux_pair(
    params: &ModelParams,
    solution: &ModeSolution,
    particle: &ParticleSpec,
    model: IncidentModel,
    theta_deg: f64,
) -> Result<FluxPrediction> {
    FluxModel::new(solution, particle, model)?.predict(params, particle.azimuth_deg, theta_deg)
}

/// Overlap of one mode with `pol` at Cartesian transverse points (metres).
pub fn overlap_map(
    solution: &ModeSolution,
    label: ModeLabel,
    pol: &PolState3,
    points: &[(f64, f64)],
) -> Result<Vec<f64>> {
    points
        .par_iter()
        .map(|&(x, y)| {
            let field = solution.field(label, x.hypot(y), y.atan2(x), 0.0)?;
            overlap_fraction(&field, pol)
        })
        .collect()
}

/// `A = -log10(I_particle / I_ref)` pointwise.
pub fn absorbance(i_particle: &[f64], i_ref: &[f64]) -> Result<Vec<f64>> {
    if i_particle.len() != i_ref.len() {
        return Err(Error::InvalidParameter(format!(
            "spectra differ in length: {} vs {}",
            i_particle.len(),
            i_ref.len()
        )));
    }
    i_particle
        .iter()
        .zip(i_ref)
        .map(|(&p, &r)| {
            if !(r > 0.0) {
                return Err(Error::Domain {
                    what: "reference intensity",
                    value: r,
                    expected: "> 0",
                });
            }
            Ok(-(p / r).log10())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::solve_he11;

    fn reference_model(model: IncidentModel) -> FluxModel {
        let spec = FiberSpec::silica_in_vacuum(157.5e-9, 532e-9).unwrap();
        let sol = solve_he11(&spec).unwrap();
        let particle = ParticleSpec::new(&spec, 45e-9, 90.0).unwrap();
        FluxModel::new(&sol, &particle, model).unwrap()
    }

    fn params(c0: f64) -> ModelParams {
        ModelParams::new(1.0, c0, 0.0).unwrap()
    }

    #[test]
    fn dipole_and_emission_basics() {
        let e = ComplexField3::new(Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0), Complex64::new(0.0, 3.0));
        assert_eq!(dipole_moment(Complex64::new(1.0, 0.0), &e), e);
        let shifted = dipole_moment(Complex64::new(0.0, 1.0), &e);
        assert_eq!(shifted.ex, Complex64::new(-2.0, 1.0));
        assert!((emission_into_mode(&e, &e) - e.norm_sqr().powi(2)).abs() < 1e-12);
        let perp = ComplexField3::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let flat = ComplexField3::from_real(1.0, 1.0, 0.0);
        assert_eq!(emission_into_mode(&flat, &perp), 0.0);
    }

    #[test]
    fn directionality_examples() {
        assert_eq!(directionality(5.0, 5.0).unwrap(), 0.0);
        assert!((directionality(16.0, 1.0).unwrap() - 0.882).abs() < 5e-4);
        assert!((directionality(40.0, 1.0).unwrap() - 0.951).abs() < 5e-4);
        assert!(directionality(0.0, 0.0).is_err());
        assert_eq!(directionality(3.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn top_particle_sigma_minus_directionality() {
        let m = reference_model(IncidentModel::Unperturbed);
        let d = m.predict(&params(0.0), 90.0, 45.0).unwrap().directionality;
        assert!((d - 0.86).abs() < 0.02, "D = {d}");
    }

    #[test]
    fn side_particle_has_no_directionality() {
        let m = reference_model(IncidentModel::Unperturbed);
        for i in 0..36 {
            let d = m.predict(&params(0.0), 0.0, 5.0 * i as f64).unwrap().directionality;
            assert!(d.abs() < 1e-10);
        }
    }

    #[test]
    fn linear_z_drive_is_balanced() {
        let m = reference_model(IncidentModel::Unperturbed);
        let d = m.predict(&params(0.0), 90.0, 0.0).unwrap().directionality;
        assert!(d.abs() < 1e-10);
    }

    #[test]
    fn zero_kappa_map_is_background() {
        let m = reference_model(IncidentModel::CylinderModified);
        let p = ModelParams::new(0.0, 22.5e3, 6.3).unwrap();
        let map = m.flux_map(&p, &[0.0, 90.0, 200.0], &[0.0, 45.0]).unwrap();
        assert_eq!(map.len(), 6);
        assert!(map.rows().iter().all(|r| r.c_plus == 22.5e3 && r.c_minus == 22.5e3));
        assert_eq!(map.rows()[2].phi_deg, 90.0);
        assert_eq!(map.rows()[3].theta_deg, 45.0);
    }

    #[test]
    fn cross_section_scales() {
        let m = reference_model(IncidentModel::Unperturbed);
        let thetas: Vec<f64> = (0..36).map(|i| 5.0 * i as f64).collect();
        let beam = BeamParams::new(265e-6, 150e-6, 0.46, 532e-9).unwrap();
        let p = ModelParams::new(21.9e6, 22.5e3, 0.0).unwrap();
        let s = m.cross_section(&p, &beam, 90.0, &thetas).unwrap();
        assert!((s.per_detector * 2.0 - s.both_detectors).abs() < 1e-30);
        let um2 = s.both_detectors * 1e12;
        assert!((2e-4..2e-3).contains(&um2), "{um2}");
        let zero = m.cross_section(&ModelParams::new(0.0, 22.5e3, 0.0).unwrap(), &beam, 90.0, &thetas).unwrap();
        assert_eq!(zero.both_detectors, 0.0);
        let half_power = BeamParams::new(132.5e-6, 150e-6, 0.46, 532e-9).unwrap();
        let doubled = m.cross_section(&p, &half_power, 90.0, &thetas).unwrap();
        assert!((doubled.both_detectors / s.both_detectors - 2.0).abs() < 1e-12);
    }

    #[test]
    fn absorbance_examples() {
        assert_eq!(absorbance(&[2.0, 3.0], &[2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        let t = 10f64.powf(-0.035);
        assert!((t - 0.9226).abs() < 1e-4);
        assert!((absorbance(&[t], &[1.0]).unwrap()[0] - 0.035).abs() < 1e-12);
        assert!(absorbance(&[1.0], &[0.0]).is_err());
        assert!(absorbance(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn particle_validation() {
        let spec = FiberSpec::silica_in_vacuum(157.5e-9, 532e-9).unwrap();
        assert!(ParticleSpec::new(&spec, 0.0, 0.0).is_err());
        let p = ParticleSpec::new(&spec, 45e-9, 0.0).unwrap();
        assert!((p.radial_r - 202.5e-9).abs() < 1e-20);
        assert!(p.with_radial_r(&spec, 100e-9).is_err());
        assert!(p.with_radial_r(&spec, spec.radius).is_ok());
        assert!(BeamParams::new(1.0, 1.0, 1.5, 1.0).is_err());
        assert!(ModelParams::new(-1.0, 0.0, 0.0).is_err());
    }
}
