//! Fundamental HE11 mode of a step-index nanofiber.
//!
//! Coordinates: fiber axis along `z`, azimuth `phi` measured from `x`,
//! time dependence `exp(-iωt)`. Profile functions are normalized so that
//! `|ε(r = 0)|² = 1`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ComplexField3;
use crate::specfun::{bessel_j_orders, mod_bessel_k_orders};

/// `V` below which only HE11 is guided (first zero of `J_0`).
pub const SINGLE_MODE_CUTOFF: f64 = 2.405;
/// `V` above which hybrid modes beyond HE11 certainly exist (first zero of `J_1`).
pub const SECOND_HYBRID_CUTOFF: f64 = 3.832;
/// Azimuth of the top of the fiber.
pub const TOP: f64 = FRAC_PI_2;

const SCAN_POINTS: usize = 10_000;
const BRACKET_MARGIN: f64 = 1e-9;

/// Fused-silica refractive index from the three-term Sellmeier formula.
/// `wavelength` in meters, valid from 0.2 to 2 µm.
pub fn sellmeier_index(wavelength: f64) -> Result<f64> {
    const B: [f64; 3] = [0.696_166_3, 0.407_942_6, 0.897_479_4];
    const C: [f64; 3] = [0.068_404_3, 0.116_241_4, 9.896_161];
    let um = wavelength * 1e6;
    if !(0.2..=2.0).contains(&um) {
        return Err(Error::Domain {
            what: "sellmeier_index",
            value: wavelength,
            expected: "0.2 µm <= wavelength <= 2 µm",
        });
    }
    let l2 = um * um;
    let n2 = 1.0
        + B.iter()
            .zip(C)
            .map(|(b, c)| b * l2 / (l2 - c * c))
            .sum::<f64>();
    Ok(n2.sqrt())
}

/// Geometry and optics of the nanofiber. Lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberSpec {
    pub radius: f64,
    pub n_core: f64,
    pub n_clad: f64,
    pub wavelength: f64,
}

impl FiberSpec {
    /// Index-matched specs (`n_core == n_clad`) are accepted: they describe a
    /// non-guiding, non-scattering cylinder, which is a useful limit.
    pub fn new(radius: f64, n_core: f64, n_clad: f64, wavelength: f64) -> Result<Self> {
        let finite = [radius, n_core, n_clad, wavelength].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidFiber("non-finite parameter".into()));
        }
        if radius <= 0.0 {
            return Err(Error::InvalidFiber(format!("radius must be positive, got {radius}")));
        }
        if wavelength <= 0.0 {
            return Err(Error::InvalidFiber(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if n_clad < 1.0 || n_core < n_clad {
            return Err(Error::InvalidFiber(format!(
                "indices must satisfy n_core >= n_clad >= 1, got n_core = {n_core}, n_clad = {n_clad}"
            )));
        }
        Ok(Self {
            radius,
            n_core,
            n_clad,
            wavelength,
        })
    }

    /// Silica core (Sellmeier index) in vacuum.
    pub fn silica_in_vacuum(radius: f64, wavelength: f64) -> Result<Self> {
        Self::new(radius, sellmeier_index(wavelength)?, 1.0, wavelength)
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn v_number(&self) -> f64 {
        v_number(self)
    }

    pub fn is_single_mode(&self) -> bool {
        self.v_number() < SINGLE_MODE_CUTOFF
    }
}

/// Normalized frequency `V = k0 a sqrt(n1² - n2²)`.
pub fn v_number(spec: &FiberSpec) -> f64 {
    spec.k0() * spec.radius * (spec.n_core.powi(2) - spec.n_clad.powi(2)).sqrt()
}

/// Principal polarization axis of a quasi-linearly polarized mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    /// `(cos φ0, sin φ0)` of the orientation angle, exact for both axes.
    fn orientation(self) -> (f64, f64) {
        match self {
            Axis::X => (1.0, 0.0),
            Axis::Y => (0.0, 1.0),
        }
    }
}

/// Propagation direction along the fiber axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Plus,
    Minus,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeLabel {
    pub axis: Axis,
    pub direction: Direction,
}

impl ModeLabel {
    pub const fn new(axis: Axis, direction: Direction) -> Self {
        Self { axis, direction }
    }

    pub const ALL: [ModeLabel; 4] = [
        ModeLabel::new(Axis::X, Direction::Plus),
        ModeLabel::new(Axis::Y, Direction::Plus),
        ModeLabel::new(Axis::X, Direction::Minus),
        ModeLabel::new(Axis::Y, Direction::Minus),
    ];
}

struct DispersionTerms {
    lhs: f64,
    rhs: f64,
}

/// Both sides of the hybrid-mode eigenvalue equation at `b = β/k0`.
fn dispersion_terms(spec: &FiberSpec, b: f64) -> Result<DispersionTerms> {
    let k0a = spec.k0() * spec.radius;
    let (n1, n2) = (spec.n_core, spec.n_clad);
    let u = k0a * (n1 * n1 - b * b).sqrt();
    let w = k0a * (b * b - n2 * n2).sqrt();
    let j = bessel_j_orders(2, u);
    let k = mod_bessel_k_orders(2, w)?;
    let j1p = 0.5 * (j[0] - j[2]);
    let k1p = -0.5 * (k[0] + k[2]);
    let jt = j1p / (u * j[1]);
    let kt = k1p / (w * k[1]);
    let lhs = (jt + kt) * (jt + (n2 * n2) / (n1 * n1) * kt);
    let inv = 1.0 / (u * u) + 1.0 / (w * w);
    let rhs = (b / n1).powi(2) * inv * inv;
    Ok(DispersionTerms { lhs, rhs })
}

/// Relative residual `LHS/RHS - 1` of the hybrid eigenvalue equation at `beta`.
pub fn dispersion_residual(spec: &FiberSpec, beta: f64) -> Result<f64> {
    let t = dispersion_terms(spec, beta / spec.k0())?;
    Ok(t.lhs / t.rhs - 1.0)
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let fmid = f(mid)?;
        if (fmid < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All roots of the hybrid eigenvalue equation inside the guidance window,
/// as `β` values in decreasing order. Sign changes across poles are dropped.
pub fn hybrid_mode_roots(spec: &FiberSpec) -> Result<Vec<f64>> {
    if spec.n_core <= spec.n_clad {
        return Err(Error::NoRoot("index-matched fiber guides no mode".into()));
    }
    let lo = spec.n_clad * (1.0 + BRACKET_MARGIN);
    let hi = spec.n_core * (1.0 - BRACKET_MARGIN);
    let g = |b: f64| -> Result<f64> {
        let t = dispersion_terms(spec, b)?;
        Ok(t.lhs / t.rhs - 1.0)
    };
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let mut roots = Vec::new();
    let mut prev_b = lo;
    let mut prev_g = g(lo)?;
    for i in 1..SCAN_POINTS {
        let b = if i == SCAN_POINTS - 1 { hi } else { lo + i as f64 * step };
        let gb = g(b)?;
        if gb == 0.0 {
            roots.push(b);
        } else if (gb < 0.0) != (prev_g < 0.0) && prev_g != 0.0 {
            let root = bisect(&g, prev_b, b, 0.0)?;
            if g(root)?.abs() < 1e-6 {
                roots.push(root);
            }
        }
        prev_b = b;
        prev_g = gb;
    }
    let k0 = spec.k0();
    let mut betas: Vec<f64> = roots.into_iter().map(|b| b * k0).collect();
    betas.sort_by(|a, b| b.total_cmp(a));
    Ok(betas)
}

/// Solved HE11 mode. All wavenumbers in rad/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSolution {
    pub spec: FiberSpec,
    pub beta: f64,
    /// Transverse wavenumber inside the core.
    pub h: f64,
    /// Decay constant outside the core.
    pub q: f64,
    pub s: f64,
    pub v_number: f64,
    /// Amplitude giving `|ε(0)|² = 1`.
    pub norm_a: f64,
    /// Relative eigenvalue-equation residual at `beta`.
    pub residual: f64,
}

/// Solve for the HE11 propagation constant (largest root of the hybrid relation).
///
/// For `V >= 2.405` the fiber is no longer single-mode; HE11 is still
/// returned and callers can check [`ModeSolution::is_single_mode`].
pub fn solve_he11(spec: &FiberSpec) -> Result<ModeSolution> {
    let roots = hybrid_mode_roots(spec)?;
    let beta = *roots.first().ok_or_else(|| {
        Error::NoRoot(format!(
            "no sign change of the HE11 relation in (n2 k0, n1 k0) for V = {}",
            spec.v_number()
        ))
    })?;
    let k0 = spec.k0();
    let a = spec.radius;
    let h = ((spec.n_core * k0).powi(2) - beta * beta).sqrt();
    let q = (beta * beta - (spec.n_clad * k0).powi(2)).sqrt();
    let (u, w) = (h * a, q * a);
    let j = bessel_j_orders(2, u);
    let k = mod_bessel_k_orders(2, w)?;
    let jt = 0.5 * (j[0] - j[2]) / (u * j[1]);
    let kt = -0.5 * (k[0] + k[2]) / (w * k[1]);
    let s = (1.0 / (u * u) + 1.0 / (w * w)) / (jt + kt);
    let norm_a = 2.0 * h / (beta * (1.0 - s).abs());
    let residual = dispersion_residual(spec, beta)?.abs();
    Ok(ModeSolution {
        spec: *spec,
        beta,
        h,
        q,
        s,
        v_number: spec.v_number(),
        norm_a,
        residual,
    })
}

/// Radial factors of the quasi-linear mode at one radius:
/// `ε_x = main cos φ0 + hybrid cos(2φ - φ0)`,
/// `ε_y = main sin φ0 + hybrid sin(2φ - φ0)`,
/// `ε_z = ∓ i longitudinal cos(φ - φ0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub main: f64,
    pub hybrid: f64,
    pub longitudinal: f64,
}

impl RadialProfile {
    pub fn field(&self, label: ModeLabel, phi: f64) -> ComplexField3 {
        let (c0, s0) = label.axis.orientation();
        let (s1, c1) = phi.sin_cos();
        let (s2, c2) = (2.0 * phi).sin_cos();
        let cos_2 = c2 * c0 + s2 * s0;
        let sin_2 = s2 * c0 - c2 * s0;
        let cos_1 = c1 * c0 + s1 * s0;
        let sign = label.direction.sign();
        ComplexField3::new(
            Complex64::new(self.main * c0 + self.hybrid * cos_2, 0.0),
            Complex64::new(self.main * s0 + self.hybrid * sin_2, 0.0),
            Complex64::new(0.0, -sign * self.longitudinal * cos_1),
        )
    }
}

impl ModeSolution {
    pub fn is_single_mode(&self) -> bool {
        self.v_number < SINGLE_MODE_CUTOFF
    }

    pub fn radial(&self, r: f64) -> Result<RadialProfile> {
        if !(r >= 0.0) {
            return Err(Error::Domain {
                what: "mode radius",
                value: r,
                expected: "r >= 0",
            });
        }
        let a = self.spec.radius;
        let ratio = (1.0 + self.s) / (1.0 - self.s);
        if r < a {
            let j = bessel_j_orders(2, self.h * r);
            Ok(RadialProfile {
                main: j[0],
                hybrid: -ratio * j[2],
                longitudinal: self.norm_a * j[1],
            })
        } else {
            let jk = bessel_j_orders(1, self.h * a)[1] / mod_bessel_k_orders(1, self.q * a)?[1];
            let k = mod_bessel_k_orders(2, self.q * r)?;
            let scale = self.h / self.q * jk;
            Ok(RadialProfile {
                main: scale * k[0],
                hybrid: scale * ratio * k[2],
                longitudinal: self.norm_a * jk * k[1],
            })
        }
    }

    /// Mode profile function `ε` at cylindrical position `(r, phi, z)`.
    pub fn field(&self, label: ModeLabel, r: f64, phi: f64, z: f64) -> Result<ComplexField3> {
        let phase = Complex64::from_polar(1.0, label.direction.sign() * self.beta * z);
        Ok(self.radial(r)?.field(label, phi).scale(phase))
    }

    /// `|ε_z| / |ε_y|` of the y-polarized mode at `r >= a`, in closed form.
    pub fn longitudinal_ratio(&self, phi: f64, r: f64) -> Result<f64> {
        if !(r >= self.spec.radius) {
            return Err(Error::Domain {
                what: "longitudinal_ratio",
                value: r,
                expected: "r >= fiber radius",
            });
        }
        let k = mod_bessel_k_orders(2, self.q * r)?;
        let s = self.s;
        let denom = (1.0 - s) * k[0] - (1.0 + s) * k[2] * (2.0 * phi).cos();
        Ok(2.0 * self.q / self.beta * phi.sin().abs() * k[1] / denom.abs())
    }

    /// Largest longitudinal ratio on the fiber surface, with the azimuth where it occurs.
    pub fn max_longitudinal_ratio(&self) -> Result<(f64, f64)> {
        let a = self.spec.radius;
        let f = |phi: f64| self.longitudinal_ratio(phi, a);
        let n = 720;
        let mut best = (0.0, f64::NEG_INFINITY);
        for i in 0..=n {
            let phi = PI * i as f64 / n as f64;
            let v = f(phi)?;
            if v > best.1 {
                best = (phi, v);
            }
        }
        let step = PI / n as f64;
        let (mut lo, mut hi) = ((best.0 - step).max(0.0), (best.0 + step).min(PI));
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..100 {
            let m1 = hi - inv_phi * (hi - lo);
            let m2 = lo + inv_phi * (hi - lo);
            if f(m1)? < f(m2)? {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let phi = 0.5 * (lo + hi);
        Ok((phi, f(phi)?))
    }

    /// Radius inside the core where the y-polarized mode is exactly circular on
    /// the `phi = 90°` meridian (`|ε_z| = |ε_y|`).
    pub fn circular_point(&self) -> Result<f64> {
        let a = self.spec.radius;
        let g = |r: f64| -> Result<f64> {
            let p = self.radial(r)?;
            // On phi = 90° the y-mode has ε_y = main + hybrid and |ε_z| = longitudinal.
            Ok(p.longitudinal.abs() - (p.main + p.hybrid).abs())
        };
        let n = 2000;
        let mut prev_r = 0.0;
        let mut prev_g = g(0.0)?;
        for i in 1..n {
            let r = a * i as f64 / n as f64;
            let gr = g(r)?;
            if (gr < 0.0) != (prev_g < 0.0) {
                return bisect(g, prev_r, r, 1e-13 * a);
            }
            prev_r = r;
            prev_g = gr;
        }
        Err(Error::NoRoot(
            "no interior radius with |ε_z| = |ε_y| on the principal meridian".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reference_fiber() -> FiberSpec {
        FiberSpec::silica_in_vacuum(157.5e-9, 532e-9).unwrap()
    }

    #[test]
    fn sellmeier_values() {
        let n532 = sellmeier_index(532e-9).unwrap();
        assert_abs_diff_eq!(n532, 1.4607, epsilon = 5e-4);
        assert!(sellmeier_index(1.0e-6).unwrap() < n532);
        assert!(matches!(sellmeier_index(0.1e-6), Err(Error::Domain { .. })));
        assert!(sellmeier_index(2.5e-6).is_err());
    }

    #[test]
    fn v_number_examples() {
        let spec = FiberSpec::new(157.5e-9, 1.4607, 1.0, 532e-9).unwrap();
        assert_abs_diff_eq!(spec.v_number(), 1.98, epsilon = 0.005);
        assert!(spec.is_single_mode());

        let matched = FiberSpec::new(157.5e-9, 1.3, 1.3, 532e-9).unwrap();
        assert_eq!(matched.v_number(), 0.0);

        let doubled = FiberSpec::new(315e-9, 1.4607, 1.0, 532e-9).unwrap();
        assert_abs_diff_eq!(doubled.v_number(), 2.0 * spec.v_number(), epsilon = 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(FiberSpec::new(-1.0, 1.45, 1.0, 532e-9).is_err());
        assert!(FiberSpec::new(1e-7, 1.0, 1.45, 532e-9).is_err());
        assert!(FiberSpec::new(1e-7, 1.45, 0.9, 532e-9).is_err());
        assert!(FiberSpec::new(1e-7, 1.45, 1.0, 0.0).is_err());
    }

    #[test]
    fn index_matched_has_no_mode() {
        let matched = FiberSpec::new(157.5e-9, 1.3, 1.3, 532e-9).unwrap();
        assert!(matches!(solve_he11(&matched), Err(Error::NoRoot(_))));
    }

    #[test]
    fn reference_mode_parameters() {
        let spec = reference_fiber();
        let sol = solve_he11(&spec).unwrap();
        let k0 = spec.k0();
        assert!(sol.beta > spec.n_clad * k0 && sol.beta < spec.n_core * k0);
        assert!(sol.residual <= 1e-10);
        let lhs = sol.h * sol.h + sol.q * sol.q;
        let rhs = (spec.n_core.powi(2) - spec.n_clad.powi(2)) * k0 * k0;
        assert!(((lhs - rhs) / rhs).abs() <= 1e-12);
        assert!(sol.s < 0.0 && sol.s > -1.0);
    }

    #[test]
    fn axis_normalization() {
        let sol = solve_he11(&reference_fiber()).unwrap();
        for label in ModeLabel::ALL {
            let e = sol.field(label, 0.0, 0.3, 0.0).unwrap();
            assert_abs_diff_eq!(e.norm_sqr(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn y_mode_has_no_x_component_on_top() {
        let sol = solve_he11(&reference_fiber()).unwrap();
        let label = ModeLabel::new(Axis::Y, Direction::Plus);
        for &r in &[0.0, 50e-9, 157.5e-9, 200e-9, 400e-9] {
            let e = sol.field(label, r, TOP, 0.0).unwrap();
            assert!(e.ex.norm() < 1e-15, "r = {r}: ex = {}", e.ex);
        }
    }

    #[test]
    fn boundary_conditions_at_surface() {
        let spec = reference_fiber();
        let sol = solve_he11(&spec).unwrap();
        let a = spec.radius;
        let eps_ratio = (spec.n_core / spec.n_clad).powi(2);
        for label in ModeLabel::ALL {
            for i in 0..24 {
                let phi = 0.1 + i as f64 * PI / 12.0;
                let inner = sol.field(label, a * (1.0 - 1e-13), phi, 0.0).unwrap();
                let outer = sol.field(label, a, phi, 0.0).unwrap();
                let (s, c) = phi.sin_cos();
                let radial = |e: &ComplexField3| e.ex * c + e.ey * s;
                let azimuthal = |e: &ComplexField3| -e.ex * s + e.ey * c;
                assert!((azimuthal(&inner) - azimuthal(&outer)).norm() < 1e-9);
                assert!((inner.ez - outer.ez).norm() < 1e-9);
                let ri = radial(&inner);
                if ri.norm() > 1e-6 {
                    assert!((radial(&outer) / ri - eps_ratio).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn longitudinal_ratio_closed_form_matches_fields() {
        let spec = reference_fiber();
        let sol = solve_he11(&spec).unwrap();
        let label = ModeLabel::new(Axis::Y, Direction::Plus);
        assert_eq!(sol.longitudinal_ratio(0.0, spec.radius).unwrap(), 0.0);
        for &r in &[spec.radius, 1.3 * spec.radius, 2.0 * spec.radius] {
            for &deg in &[10.0f64, 45.0, 80.0, 90.0, 135.0, 270.0] {
                let phi = deg.to_radians();
                let e = sol.field(label, r, phi, 0.0).unwrap();
                let direct = e.ez.norm() / e.ey.norm();
                let closed = sol.longitudinal_ratio(phi, r).unwrap();
                assert!((direct - closed).abs() < 1e-12 * closed.max(1.0), "{deg}: {direct} vs {closed}");
            }
        }
        assert!(sol.longitudinal_ratio(0.3, 0.5 * spec.radius).is_err());
    }

    #[test]
    fn ratio_maximum_is_on_top() {
        let sol = solve_he11(&reference_fiber()).unwrap();
        let (phi, _) = sol.max_longitudinal_ratio().unwrap();
        assert_abs_diff_eq!(phi, TOP, epsilon = 1e-6);
    }

    #[test]
    fn circular_point_lies_inside() {
        let spec = reference_fiber();
        let sol = solve_he11(&spec).unwrap();
        let r = sol.circular_point().unwrap();
        assert!(r > 0.0 && r < spec.radius);
        let e = sol.field(ModeLabel::new(Axis::Y, Direction::Plus), r, TOP, 0.0).unwrap();
        assert!((e.ez.norm() - e.ey.norm()).abs() < 1e-11);
    }
}
