//! Polarization states of the excitation beam and overlaps with local fields.
//!
//! The quantization axis is `+x`, so `σ± = (i e_z ± e_y)/√2` and `π = e_x`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField3;

/// Quarter-wave retardance of the plate's slow axis relative to its fast axis.
/// The sign is what makes a fast axis at 45° from `y` produce σ⁻ from
/// `z`-polarized input.
pub const QWP_RETARDANCE: f64 = -FRAC_PI_2;

/// Unit-norm complex polarization vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolState3(ComplexField3);

impl PolState3 {
    /// Normalize `v` into a polarization state.
    pub fn new(v: ComplexField3) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Degenerate("polarization vector has zero norm".into()));
        }
        Ok(Self(v * (1.0 / norm)))
    }

    pub fn sigma_plus() -> Self {
        Self(ComplexField3::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, FRAC_1_SQRT_2),
        ))
    }

    pub fn sigma_minus() -> Self {
        Self(ComplexField3::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(-FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, FRAC_1_SQRT_2),
        ))
    }

    pub fn pi() -> Self {
        Self(ComplexField3::from_real(1.0, 0.0, 0.0))
    }

    pub fn linear_y() -> Self {
        Self(ComplexField3::from_real(0.0, 1.0, 0.0))
    }

    pub fn linear_z() -> Self {
        Self(ComplexField3::from_real(0.0, 0.0, 1.0))
    }

    pub fn vector(&self) -> &ComplexField3 {
        &self.0
    }

    /// `⟨self, other⟩ = Σ self_i* other_i`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        other.0.dot_conj(&self.0)
    }

    /// True when the two states differ only by a global phase.
    pub fn same_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        (self.inner(other).norm() - 1.0).abs() <= tol
    }
}

/// `(σ⁺, σ⁻, π)`.
pub fn sigma_basis() -> (PolState3, PolState3, PolState3) {
    (PolState3::sigma_plus(), PolState3::sigma_minus(), PolState3::pi())
}

/// Quarter-wave plate with its fast axis at `theta_deg` from the `y` axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePlateSetting {
    pub theta_deg: f64,
}

impl WavePlateSetting {
    pub fn new(theta_deg: f64) -> Self {
        Self { theta_deg }
    }

    pub fn state(&self) -> PolState3 {
        qwp_state(self.theta_deg)
    }
}

/// Polarization after the plate for `z`-polarized input propagating along `-x`.
///
/// Jones transform in the `(e_y, e_z)` plane: `R(θ) diag(1, e^{iδ}) R(-θ) (0, 1)ᵀ`.
pub fn qwp_state(theta_deg: f64) -> PolState3 {
    let (s, c) = theta_deg.to_radians().sin_cos();
    let retard = Complex64::from_polar(1.0, QWP_RETARDANCE);
    let one = Complex64::new(1.0, 0.0);
    let jy = (one - retard) * (s * c);
    let jz = one * (s * s) + retard * (c * c);
    PolState3(ComplexField3::new(Complex64::new(0.0, 0.0), jy, jz))
}

/// Fraction `|ε · u*|² / |ε|²` of the local field carried by polarization `pol`.
pub fn overlap_fraction(field: &ComplexField3, pol: &PolState3) -> Result<f64> {
    let norm = field.norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::Degenerate("overlap of a zero field".into()));
    }
    Ok(field.dot_conj(pol.vector()).norm_sqr() / norm)
}
