//! Slow reference implementations of the cylinder functions.
//!
//! Shared by the unit tests in `specfun` and the acceptance suite. None of
//! these reuse the production evaluation paths: J and I come from their
//! power series or Bessel's integral, Y and K from integral representations
//! evaluated by brute-force quadrature.
#![allow(dead_code)]

use std::f64::consts::PI;

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Power series for `J_n(x)`; reliable only while `x` stays moderate (<~ 10).
pub fn bessel_j_series(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let mut term = (n as f64 * half.ln() - ln_factorial(n)).exp();
    let mut sum = term;
    for k in 1..400u32 {
        term *= -half * half / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-22 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Bessel's integral `J_n(x) = (1/2π) ∫_0^{2π} cos(nτ - x sin τ) dτ`,
/// evaluated with the periodic trapezoidal rule (spectrally accurate).
pub fn bessel_j_integral(n: u32, x: f64) -> f64 {
    let m = (4.0 * (x + n as f64) + 256.0) as usize;
    let h = 2.0 * PI / m as f64;
    let sum: f64 = (0..m)
        .map(|i| {
            let t = i as f64 * h;
            (n as f64 * t - x * t.sin()).cos()
        })
        .sum();
    sum / m as f64
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `Y_n(x) = (1/π)∫_0^π sin(x sin τ - nτ) dτ - (1/π)∫_0^∞ (e^{nt} + (-1)^n e^{-nt}) e^{-x sinh t} dt`.
pub fn bessel_y_integral(n: u32, x: f64) -> f64 {
    let nf = n as f64;
    let first = simpson(|t| (x * t.sin() - nf * t).sin(), 0.0, PI, 200_000);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    // Cut the tail once the log-integrand has fallen 60 below its peak.
    let log_f = |t: f64| nf * t - x * t.sinh();
    let peak = if nf > x { (nf / x).acosh() } else { 0.0 };
    let peak_val = log_f(peak);
    let mut upper = peak + 1.0;
    while log_f(upper) > peak_val - 60.0 {
        upper += 0.5;
    }
    let second = simpson(
        |t| ((nf * t - x * t.sinh()).exp()) + sign * ((-nf * t - x * t.sinh()).exp()),
        0.0,
        upper,
        400_000,
    );
    (first - second) / PI
}

/// `K_n(x) = ∫_0^∞ e^{-x cosh t} cosh(nt) dt` by the trapezoidal rule,
/// which converges geometrically for this analytic, doubly-decaying integrand.
pub fn mod_bessel_k_integral(n: u32, x: f64) -> f64 {
    let nf = n as f64;
    let log_f = |t: f64| -x * t.cosh() + nf * t;
    let peak = if nf > x { (nf / x).asinh() } else { 0.0 };
    let peak_val = log_f(peak);
    let h = 0.01;
    let mut sum = 0.5 * (-x).exp();
    let mut t = h;
    loop {
        let lf = log_f(t);
        sum += (-x * t.cosh()).exp() * (nf * t).cosh();
        if t > peak && lf < peak_val - 50.0 {
            break;
        }
        t += h;
    }
    sum * h
}

/// Power series for the modified Bessel function `I_n(x)`.
pub fn mod_bessel_i_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (n as f64 * half.ln() - ln_factorial(n)).exp();
    let mut sum = term;
    for k in 1..1000u32 {
        term *= half * half / (k as f64 * (k + n) as f64);
        sum += term;
        if term < 1e-20 * sum {
            break;
        }
    }
    sum
}

pub fn mod_bessel_i_prime_series(n: u32, x: f64) -> f64 {
    if n == 0 {
        mod_bessel_i_series(1, x)
    } else {
        0.5 * (mod_bessel_i_series(n - 1, x) + mod_bessel_i_series(n + 1, x))
    }
}
