//! Complex Cartesian 3-vectors used for field envelopes and polarization states.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Positive-frequency complex envelope of an electric field at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexField3 {
    pub ex: Complex64,
    pub ey: Complex64,
    pub ez: Complex64,
}

impl ComplexField3 {
    pub const ZERO: Self = Self {
        ex: Complex64::new(0.0, 0.0),
        ey: Complex64::new(0.0, 0.0),
        ez: Complex64::new(0.0, 0.0),
    };

    pub fn new(ex: Complex64, ey: Complex64, ez: Complex64) -> Self {
        Self { ex, ey, ez }
    }

    pub fn from_real(x: f64, y: f64, z: f64) -> Self {
        Self::new(x.into(), y.into(), z.into())
    }

    pub fn components(&self) -> [Complex64; 3] {
        [self.ex, self.ey, self.ez]
    }

    /// `self · other*`, the projection used by every overlap and emission formula.
    pub fn dot_conj(&self, other: &Self) -> Complex64 {
        self.ex * other.ex.conj() + self.ey * other.ey.conj() + self.ez * other.ez.conj()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.ex.norm_sqr() + self.ey.norm_sqr() + self.ez.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.ex.conj(), self.ey.conj(), self.ez.conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::new(self.ex * factor, self.ey * factor, self.ez * factor)
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = *self - *other;
        d.components().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Add for ComplexField3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.ex + rhs.ex, self.ey + rhs.ey, self.ez + rhs.ez)
    }
}

impl Sub for ComplexField3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.ex - rhs.ex, self.ey - rhs.ey, self.ez - rhs.ez)
    }
}

impl Mul<Complex64> for ComplexField3 {
    type Output = Self;
    fn mul(self, rhs: Complex64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for ComplexField3 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(Complex64::new(rhs, 0.0))
    }
}
