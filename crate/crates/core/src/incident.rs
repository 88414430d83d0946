//! Excitation field at the particle: the bare plane wave, or the plane wave
//! modified by the nanofiber treated as an infinite dielectric cylinder at
//! normal incidence.
//!
//! The beam propagates along `-x`, the cylinder axis is `z`. The two
//! polarization channels decouple: TM carries `E_z` (incident `E ∥ z`), TE
//! carries `H_z` (incident `E ∥ y`). Magnetic fields are expressed in units of
//! `E / Z0`, so Maxwell's curl equations read `H = ∇×E / (i k0)` and
//! `E = i ∇×H / (k0 εr)`.
//!
//! Both channels are expanded as `Σ_n (-i)^n f_n(r) e^{inφ}`; the incident
//! expansion coefficients are the Jacobi–Anger weights, so the scattered
//! (`H_n^(1)`) and internal (`J_n`) coefficients are dimensionless ratios.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fiber::FiberSpec;
use crate::field::ComplexField3;
use crate::polarization::PolState3;
use crate::specfun::{bessel_j_orders, derivatives, hankel1_orders};

const MAX_ORDER: usize = 200;
const CERTIFICATE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncidentModel {
    /// Plane wave, ignoring the fiber.
    Unperturbed,
    /// Plane wave plus the field scattered by the fiber.
    CylinderModified,
}

/// Excitation beam. `k` is the wavenumber in the surrounding medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentConfig {
    pub pol: PolState3,
    pub model: IncidentModel,
    pub k: f64,
}

impl IncidentConfig {
    /// A paraxial beam along `-x` has no `x` polarization component.
    pub fn new(pol: PolState3, model: IncidentModel, k: f64) -> Result<Self> {
        if pol.vector().ex.norm() > 1e-12 {
            return Err(Error::InvalidParameter(
                "incident polarization must be transverse to the propagation axis x".into(),
            ));
        }
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!("wavenumber must be positive, got {k}")));
        }
        Ok(Self { pol, model, k })
    }
}

/// Unit-amplitude plane wave `pol · e^{-i k x}` at Cartesian `position`.
pub fn plane_wave_field(config: &IncidentConfig, position: [f64; 3]) -> ComplexField3 {
    let phase = Complex64::from_polar(1.0, -config.k * position[0]);
    config.pol.vector().scale(phase)
}

/// Series length for size parameter `x = k a`: `ceil(x + 4 x^{1/3} + 2)`, at least 3.
pub fn truncation_order(size_parameter: f64) -> usize {
    let x = size_parameter.max(0.0);
    ((x + 4.0 * x.cbrt() + 2.0).ceil() as usize).max(3)
}

/// Which side's expansion to evaluate (lets boundary checks evaluate both at `r = a`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Interior,
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Incident `E ∥ z`.
    Tm,
    /// Incident `E ∥ y`, `H ∥ z`.
    Te,
}

/// Expansion coefficients for orders `0..=n_max`; order `-n` equals order `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSeries {
    pub n_max: usize,
    pub radius: f64,
    pub n_core: f64,
    pub n_clad: f64,
    /// Vacuum wavenumber.
    pub k0: f64,
    pub tm_scatter: Vec<Complex64>,
    pub tm_internal: Vec<Complex64>,
    pub te_scatter: Vec<Complex64>,
    pub te_internal: Vec<Complex64>,
    /// Largest boundary-term magnitude at `n_max`.
    pub certificate: f64,
}

/// Coefficients extended until the order-`n_max` terms fall below 1e-12.
pub fn cylinder_coefficients(spec: &FiberSpec) -> Result<CylinderSeries> {
    let x = spec.n_clad * spec.k0() * spec.radius;
    let mut n = truncation_order(x);
    loop {
        let series = CylinderSeries::with_order(spec, n)?;
        if series.certificate < CERTIFICATE {
            return Ok(series);
        }
        n += 1;
        if n > MAX_ORDER {
            return Err(Error::Convergence(format!(
                "cylinder series not converged by order {MAX_ORDER} (size parameter {x})"
            )));
        }
    }
}

impl CylinderSeries {
    /// Coefficients for a fixed truncation order, without the convergence loop.
    pub fn with_order(spec: &FiberSpec, n_max: usize) -> Result<Self> {
        let k = spec.n_clad * spec.k0();
        let x = k * spec.radius;
        let m = spec.n_core / spec.n_clad;
        let top = n_max as u32 + 1;
        let j = bessel_j_orders(top, x);
        let jm = bessel_j_orders(top, m * x);
        let h = hankel1_orders(top, x)?;
        let jp = derivatives(&j);
        let jmp = derivatives(&jm);
        let hp = derivatives(&h);

        let mut tm_scatter = Vec::with_capacity(n_max + 1);
        let mut tm_internal = Vec::with_capacity(n_max + 1);
        let mut te_scatter = Vec::with_capacity(n_max + 1);
        let mut te_internal = Vec::with_capacity(n_max + 1);
        let mut certificate = 0.0f64;
        for n in 0..=n_max {
            // E_z and H_φ continuous (TM); H_z and E_φ continuous (TE).
            let b = (m * jmp[n] * j[n] - jm[n] * jp[n]) / (h[n] * (-m * jmp[n]) + hp[n] * jm[n]);
            let c = (h[n] * b + j[n]) / jm[n];
            let a = (jmp[n] * j[n] - m * jm[n] * jp[n]) / (hp[n] * (m * jm[n]) - h[n] * jmp[n]);
            let d = (h[n] * a + j[n]) / jm[n];
            if n == n_max {
                certificate = [
                    b.norm(),
                    a.norm(),
                    (b * h[n]).norm(),
                    (a * h[n]).norm(),
                    (c * jm[n]).norm(),
                    (d * jm[n]).norm(),
                ]
                .into_iter()
                .fold(0.0, f64::max);
            }
            tm_scatter.push(b);
            tm_internal.push(c);
            te_scatter.push(a);
            te_internal.push(d);
        }
        Ok(Self {
            n_max,
            radius: spec.radius,
            n_core: spec.n_core,
            n_clad: spec.n_clad,
            k0: spec.k0(),
            tm_scatter,
            tm_internal,
            te_scatter,
            te_internal,
            certificate,
        })
    }

    pub fn size_parameter(&self) -> f64 {
        self.n_clad * self.k0 * self.radius
    }

    fn k(&self) -> f64 {
        self.n_clad * self.k0
    }

    /// Radial functions of every order at radius `r`, for fast azimuthal sweeps.
    pub fn at_radius(&self, r: f64, side: Side) -> Result<RadialSeries> {
        if !(r >= 0.0) {
            return Err(Error::Domain {
                what: "cylinder series radius",
                value: r,
                expected: "r >= 0",
            });
        }
        let top = self.n_max as u32 + 1;
        let (tm, te, perm) = match side {
            Side::Exterior => {
                let kr = self.k() * r;
                let h = hankel1_orders(top, kr)?;
                let hp = derivatives(&h);
                let k = self.k();
                let tm = scale_pairs(&self.tm_scatter, &h, &hp, k);
                let te = scale_pairs(&self.te_scatter, &h, &hp, k);
                (tm, te, self.n_clad * self.n_clad)
            }
            Side::Interior => {
                let km = self.n_core * self.k0;
                let j: Vec<Complex64> = bessel_j_orders(top, km * r)
                    .into_iter()
                    .map(Complex64::from)
                    .collect();
                let jp = derivatives(&j);
                let tm = scale_pairs(&self.tm_internal, &j, &jp, km);
                let te = scale_pairs(&self.te_internal, &j, &jp, km);
                (tm, te, self.n_core * self.n_core)
            }
        };
        Ok(RadialSeries {
            r,
            side,
            k: self.k(),
            k0: self.k0,
            n_clad: self.n_clad,
            permittivity: perm,
            tm,
            te,
        })
    }

    /// Total field (incident + scattered outside, internal inside) at `(r, phi)`
    /// for a transverse polarization `pol`.
    pub fn modified_field(&self, pol: &PolState3, r: f64, phi: f64) -> Result<ComplexField3> {
        let side = if r < self.radius { Side::Interior } else { Side::Exterior };
        Ok(self.at_radius(r, side)?.field(pol, phi))
    }

    /// `(E_z, H_φ)` of the TM channel from the chosen side's expansion.
    pub fn tm_tangential(&self, r: f64, phi: f64, side: Side) -> Result<(Complex64, Complex64)> {
        let rs = self.at_radius(r, side)?;
        Ok(rs.tm_tangential(phi))
    }

    /// `(H_z, E_φ)` of the TE channel from the chosen side's expansion.
    pub fn te_tangential(&self, r: f64, phi: f64, side: Side) -> Result<(Complex64, Complex64)> {
        let rs = self.at_radius(r, side)?;
        Ok(rs.te_tangential(phi))
    }

    fn scatter(&self, channel: Channel) -> &[Complex64] {
        match channel {
            Channel::Tm => &self.tm_scatter,
            Channel::Te => &self.te_scatter,
        }
    }

    /// Scattering efficiency per unit length, `(2/x) Σ_n |s_n|²` over all orders.
    pub fn scattering_efficiency(&self, channel: Channel) -> f64 {
        let s = self.scatter(channel);
        let sum = s[0].norm_sqr() + 2.0 * s[1..].iter().map(|c| c.norm_sqr()).sum::<f64>();
        2.0 * sum / self.size_parameter()
    }

    /// Extinction efficiency from the forward-scattering amplitude, `-(2/x) Re Σ_n s_n`.
    pub fn extinction_efficiency(&self, channel: Channel) -> f64 {
        let s = self.scatter(channel);
        let sum = s[0] + s[1..].iter().sum::<Complex64>() * 2.0;
        -2.0 * sum.re / self.size_parameter()
    }
}

/// `(coef_n f_n, coef_n k f_n')` for every order.
fn scale_pairs(
    coef: &[Complex64],
    f: &[Complex64],
    fp: &[Complex64],
    k: f64,
) -> Vec<(Complex64, Complex64)> {
    coef.iter()
        .zip(f.iter().zip(fp))
        .map(|(c, (v, d))| (c * v, c * d * k))
        .collect()
}

/// Radial factors of one side's expansion at a fixed radius.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSeries {
    r: f64,
    side: Side,
    k: f64,
    k0: f64,
    n_clad: f64,
    permittivity: f64,
    tm: Vec<(Complex64, Complex64)>,
    te: Vec<(Complex64, Complex64)>,
}

/// `Σ_n (-i)^n g_n e^{inφ}` with `g_{-n} = g_n`, and its φ-derivative.
fn azimuthal_sum(terms: &[(Complex64, Complex64)], phi: f64, pick: fn(&(Complex64, Complex64)) -> Complex64) -> (Complex64, Complex64) {
    let mut value = pick(&terms[0]);
    let mut dphi = Complex64::new(0.0, 0.0);
    let mut weight = Complex64::new(1.0, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    for (n, t) in terms.iter().enumerate().skip(1) {
        weight *= minus_i;
        let g = weight * pick(t);
        let (s, c) = (n as f64 * phi).sin_cos();
        value += g * (2.0 * c);
        dphi -= g * (2.0 * n as f64 * s);
    }
    (value, dphi)
}

impl RadialSeries {
    fn incident_phase(&self, phi: f64) -> Complex64 {
        Complex64::from_polar(1.0, -self.k * self.r * phi.cos())
    }

    /// TM `E_z` and `∂_r E_z`.
    fn tm_values(&self, phi: f64) -> (Complex64, Complex64) {
        let (v, _) = azimuthal_sum(&self.tm, phi, |t| t.0);
        let (dr, _) = azimuthal_sum(&self.tm, phi, |t| t.1);
        match self.side {
            Side::Interior => (v, dr),
            Side::Exterior => {
                let inc = self.incident_phase(phi);
                let i_k_cos = Complex64::new(0.0, -self.k * phi.cos());
                (v + inc, dr + inc * i_k_cos)
            }
        }
    }

    /// TE `H_z`, `∂_φ H_z`, `∂_r H_z` (for unit incident electric amplitude).
    fn te_values(&self, phi: f64) -> (Complex64, Complex64, Complex64) {
        let h0 = -self.n_clad;
        let (v, dphi) = azimuthal_sum(&self.te, phi, |t| t.0);
        let (dr, _) = azimuthal_sum(&self.te, phi, |t| t.1);
        let (mut hz, mut hphi, mut hr) = (v * h0, dphi * h0, dr * h0);
        if self.side == Side::Exterior {
            let inc = self.incident_phase(phi) * h0;
            let (s, c) = phi.sin_cos();
            hz += inc;
            hphi += inc * Complex64::new(0.0, self.k * self.r * s);
            hr += inc * Complex64::new(0.0, -self.k * c);
        }
        (hz, hphi, hr)
    }

    fn tm_tangential(&self, phi: f64) -> (Complex64, Complex64) {
        let (ez, dr) = self.tm_values(phi);
        (ez, Complex64::new(0.0, 1.0 / self.k0) * dr)
    }

    fn te_tangential(&self, phi: f64) -> (Complex64, Complex64) {
        let (hz, _, dr) = self.te_values(phi);
        (hz, Complex64::new(0.0, -1.0 / (self.k0 * self.permittivity)) * dr)
    }

    /// Total electric field for polarization `pol` (no `x` component) at azimuth `phi`.
    pub fn field(&self, pol: &PolState3, phi: f64) -> ComplexField3 {
        let p = pol.vector();
        let (ez, _) = self.tm_values(phi);
        let (_, dphi, dr) = self.te_values(phi);
        // The 1/r factor stays finite at the axis; only the n = 1 term survives there.
        let r = self.r.max(1e-12 / self.k0);
        let pref = Complex64::new(0.0, 1.0 / (self.k0 * self.permittivity));
        let er = pref * dphi / r;
        let ephi = -pref * dr;
        let (s, c) = phi.sin_cos();
        let te = ComplexField3::new(er * c - ephi * s, er * s + ephi * c, Complex64::new(0.0, 0.0));
        let tm = ComplexField3::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), ez);
        te.scale(p.ey) + tm.scale(p.ez)
    }
}

/// Excitation field evaluator for either incident model.
#[derive(Debug, Clone)]
pub struct IncidentField {
    config: IncidentConfig,
    series: Option<CylinderSeries>,
}

impl IncidentField {
    pub fn new(spec: &FiberSpec, pol: PolState3, model: IncidentModel) -> Result<Self> {
        let config = IncidentConfig::new(pol, model, spec.n_clad * spec.k0())?;
        let series = match model {
            IncidentModel::Unperturbed => None,
            IncidentModel::CylinderModified => Some(cylinder_coefficients(spec)?),
        };
        Ok(Self { config, series })
    }

    pub fn config(&self) -> &IncidentConfig {
        &self.config
    }

    pub fn series(&self) -> Option<&CylinderSeries> {
        self.series.as_ref()
    }

    /// Field at transverse polar position `(r, phi)`.
    pub fn at(&self, r: f64, phi: f64) -> Result<ComplexField3> {
        match &self.series {
            None => Ok(plane_wave_field(&self.config, [r * phi.cos(), r * phi.sin(), 0.0])),
            Some(series) => series.modified_field(&self.config.pol, r, phi),
        }
    }
}

/// Free-function form of [`CylinderSeries::modified_field`].
pub fn modified_field(
    series: &CylinderSeries,
    config: &IncidentConfig,
    r: f64,
    phi: f64,
) -> Result<ComplexField3> {
    series.modified_field(&config.pol, r, phi)
}
