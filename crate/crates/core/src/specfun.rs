//! Cylinder functions of integer order and real argument.
//!
//! `J_n` comes from Miller's backward recurrence normalized with
//! `J_0 + 2 Σ J_2k = 1`, which is accurate to a few ulps of unity for every
//! `x` up to a few hundred. `Y_0` and `Y_1` are assembled from the same
//! sequence through Neumann's expansion and continued upward by forward
//! recurrence (stable for `Y`). `K_0` and `K_1` use the ascending series for
//! `x <= 2` and Steed's continued fraction above; higher orders again follow
//! by forward recurrence.

use std::f64::consts::{FRAC_2_PI, PI};
use std::ops::{Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_ABOVE: f64 = 1e200;
const SERIES_EPS: f64 = 1e-17;

fn require_positive(what: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: x,
            expected: "x > 0",
        })
    }
}

/// Highest order needed so that the backward recurrence has converged by `n_max`.
fn miller_start(n_max: u32, x: f64) -> usize {
    let top = (n_max as f64).max(x);
    (top + 20.0 + 16.0 * (0.5 * top).cbrt()).ceil() as usize
}

/// `J_0(x) ..= J_m(x)` for `x > 0`, where `m >= n_max` is the recurrence start.
/// Entries above `n_max` are still accurate (just tiny) and feed the Neumann sums.
fn miller(n_max: u32, x: f64) -> Vec<f64> {
    let start = miller_start(n_max, x);
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1.0;
    for k in (1..=start).rev() {
        let next = (2.0 * k as f64 / x) * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > RESCALE_ABOVE {
            for v in vals[k - 1..].iter_mut() {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    let norm = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    vals.truncate(start + 1);
    for v in vals.iter_mut() {
        *v /= norm;
    }
    vals
}

/// `J_0(x) ..= J_{n_max}(x)`.
pub fn bessel_j_orders(n_max: u32, x: f64) -> Vec<f64> {
    let len = n_max as usize + 1;
    if x == 0.0 {
        let mut out = vec![0.0; len];
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let mut out = miller(n_max, ax);
    out.truncate(len);
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// Bessel function of the first kind `J_n(x)`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    bessel_j_orders(n, x)[n as usize]
}

/// `J_n'(x)`, using `J_0' = -J_1` and `J_n' = (J_{n-1} - J_{n+1}) / 2`.
pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    let j = bessel_j_orders(n + 1, x);
    derivative_at(&j, n as usize)
}

/// Derivative of order `n` from a table of cylinder functions of orders `0..=n+1`.
pub(crate) fn derivative_at<T>(values: &[T], n: usize) -> T
where
    T: Copy + Sub<Output = T> + Mul<f64, Output = T> + Neg<Output = T>,
{
    if n == 0 {
        -values[1]
    } else {
        (values[n - 1] - values[n + 1]) * 0.5
    }
}

/// Derivatives of orders `0..values.len()-1` from a table of orders `0..values.len()`.
pub(crate) fn derivatives<T>(values: &[T]) -> Vec<T>
where
    T: Copy + Sub<Output = T> + Mul<f64, Output = T> + Neg<Output = T>,
{
    (0..values.len() - 1).map(|n| derivative_at(values, n)).collect()
}

/// `Y_0(x) ..= Y_{n_max}(x)` for `x > 0`.
pub fn bessel_y_orders(n_max: u32, x: f64) -> Result<Vec<f64>> {
    require_positive("bessel_y", x)?;
    let j = miller(1, x);
    let log_term = (0.5 * x).ln() + EULER_GAMMA;

    // Neumann expansions for Y_0 and its negated derivative Y_1.
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        let upper = j.get(2 * k + 1).copied().unwrap_or(0.0);
        s1 += sign * (j[2 * k - 1] - upper) / kf;
        k += 1;
    }
    let y0 = FRAC_2_PI * log_term * j[0] - 2.0 * FRAC_2_PI * s0;
    let y1 = -FRAC_2_PI * j[0] / x + FRAC_2_PI * log_term * j[1] + FRAC_2_PI * s1;

    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(y0);
    if n_max >= 1 {
        out.push(y1);
    }
    for k in 1..n_max as usize {
        let next = (2.0 * k as f64 / x) * out[k] - out[k - 1];
        out.push(next);
    }
    Ok(out)
}

/// Bessel function of the second kind `Y_n(x)`, `x > 0`.
pub fn bessel_y(n: u32, x: f64) -> Result<f64> {
    Ok(bessel_y_orders(n, x)?[n as usize])
}

fn k0_k1_series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let log_term = (0.5 * x).ln();

    // I_0, I_1 and the digamma-weighted companions.
    let mut term0 = 1.0; // t^k / (k!)^2
    let mut term1 = 1.0; // t^k / (k! (k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut k0_sum = 0.0;
    let mut k1_sum = 0.0;
    let mut k = 0u32;
    loop {
        let kf = k as f64;
        if k > 0 {
            term0 *= t / (kf * kf);
            term1 *= t / (kf * (kf + 1.0));
            harmonic += 1.0 / kf;
        }
        let psi_k1 = -EULER_GAMMA + harmonic;
        let psi_k2 = psi_k1 + 1.0 / (kf + 1.0);
        i0 += term0;
        i1 += term1;
        k0_sum += term0 * harmonic;
        k1_sum += term1 * (psi_k1 + psi_k2);
        if term0 < SERIES_EPS * i0 && k > 2 {
            break;
        }
        k += 1;
    }
    let i1 = 0.5 * x * i1;
    let k0 = -(log_term + EULER_GAMMA) * i0 + k0_sum;
    let k1 = 1.0 / x + log_term * i1 - 0.25 * x * k1_sum;
    (k0, k1)
}

/// Steed's continued fraction for `K_0` and `K_1`, valid for `x >= 2`.
fn k0_k1_continued_fraction(x: f64) -> Result<(f64, f64)> {
    const MAX_ITER: usize = 10_000;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut converged = false;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-16 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence(format!(
            "K continued fraction at x = {x}"
        )));
    }
    let h = a1 * h;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    Ok((k0, k1))
}

/// `K_0(x) ..= K_{n_max}(x)` for `x > 0`.
pub fn mod_bessel_k_orders(n_max: u32, x: f64) -> Result<Vec<f64>> {
    require_positive("mod_bessel_k", x)?;
    let (k0, k1) = if x <= 2.0 {
        k0_k1_series(x)
    } else {
        k0_k1_continued_fraction(x)?
    };
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(k0);
    if n_max >= 1 {
        out.push(k1);
    }
    for k in 1..n_max as usize {
        let next = out[k - 1] + (2.0 * k as f64 / x) * out[k];
        out.push(next);
    }
    Ok(out)
}

/// Modified Bessel function of the second kind `K_n(x)`, `x > 0`.
pub fn mod_bessel_k(n: u32, x: f64) -> Result<f64> {
    Ok(mod_bessel_k_orders(n, x)?[n as usize])
}

/// `K_n'(x)`, with `K_0' = -K_1` and `K_n' = -(K_{n-1} + K_{n+1}) / 2`.
pub fn mod_bessel_k_prime(n: u32, x: f64) -> Result<f64> {
    let k = mod_bessel_k_orders(n + 1, x)?;
    let n = n as usize;
    Ok(if n == 0 {
        -k[1]
    } else {
        -0.5 * (k[n - 1] + k[n + 1])
    })
}

/// `H^(1)_0(x) ..= H^(1)_{n_max}(x)` for `x > 0`.
pub fn hankel1_orders(n_max: u32, x: f64) -> Result<Vec<Complex64>> {
    let y = bessel_y_orders(n_max, x)?;
    let j = bessel_j_orders(n_max, x);
    Ok(j.into_iter()
        .zip(y)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

/// Hankel function of the first kind `H^(1)_n(x) = J_n(x) + i Y_n(x)`, `x > 0`.
pub fn hankel1(n: u32, x: f64) -> Result<Complex64> {
    Ok(hankel1_orders(n, x)?[n as usize])
}

#[cfg(test)]
#[path = "../tests/common/oracles.rs"]
mod oracles;
