//! Closed forms on the Bargmann–Fock plane and its reduced Heisenberg group.
//!
//! Nothing here touches the quadrature/Toeplitz pipeline; these functions are
//! the independent reference it is compared against.

use std::f64::consts::{PI, TAU};

use crate::special::{ln_factorial, log_sum_exp};
use crate::C64;

/// A point `(z, θ)` of the circle bundle, `θ` normalized to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedPoint {
    pub z: C64,
    pub theta: f64,
}

impl LiftedPoint {
    pub fn new(z: C64, theta: f64) -> Self {
        let mut t = theta.rem_euclid(TAU);
        // rem_euclid can round up to exactly 2π for tiny negative inputs
        if t >= TAU {
            t = 0.0;
        }
        LiftedPoint { z, theta: t }
    }

    pub fn base(z: C64) -> Self {
        LiftedPoint::new(z, 0.0)
    }
}

/// k-th Fourier component of the Heisenberg Szegő kernel.
pub fn bf_szego_kernel(k: usize, a: LiftedPoint, b: LiftedPoint) -> C64 {
    let kf = k as f64;
    let phase = kf * (a.theta - b.theta + (a.z * b.z.conj()).im);
    let modulus = kf / (2.0 * PI) * (-0.5 * kf * (a.z - b.z).norm_sqr()).exp();
    C64::from_polar(modulus, phase)
}

/// `(z, θ)∘(z′, θ′) = (z + z′, θ + θ′ + Im(z z̄′))`.
pub fn heisenberg_multiply(p: LiftedPoint, q: LiftedPoint) -> LiftedPoint {
    LiftedPoint::new(p.z + q.z, p.theta + q.theta + (p.z * q.z.conj()).im)
}

pub fn heisenberg_inverse(p: LiftedPoint) -> LiftedPoint {
    LiftedPoint::new(-p.z, -p.theta)
}

/// Kernel of `exp(itk H_k)` for `H = Re(α z̄)`.
pub fn bf_linear_propagator(k: usize, t: f64, alpha: C64, a: LiftedPoint, b: LiftedPoint) -> C64 {
    let kf = k as f64;
    let drift = alpha * t / (C64::i() * 2.0);
    let shifted = a.z - drift;
    // Im(shifted · w̄) split so that t → −t flips the phase exactly on the diagonal
    let cross = (a.z * b.z.conj()).im - (drift * b.z.conj()).im;
    let phase = kf * (a.theta + 0.5 * (alpha * a.z.conj()).re * t - b.theta + cross);
    let modulus = kf / (2.0 * PI) * (-0.5 * kf * (shifted - b.z).norm_sqr()).exp();
    C64::from_polar(modulus, phase)
}

/// `Π_{k,ε}(z)/Π_k(z) = Σ_{j ≤ εk} e^{-λ} λ^j / j!` with `λ = k|z|²`.
pub fn poisson_ratio_oracle(k: usize, eps: f64, z: C64) -> f64 {
    let lambda = k as f64 * z.norm_sqr();
    // the index set {j : j/k < ε} closed up to rounding at the endpoint
    let top = (eps * k as f64 + 1e-9).floor();
    if top < 0.0 {
        return 0.0;
    }
    let top = top as u64;
    if lambda == 0.0 {
        return 1.0;
    }
    let ln_lambda = lambda.ln();
    let terms = (0..=top).map(|j| -lambda + j as f64 * ln_lambda - ln_factorial(j));
    log_sum_exp(terms).exp().min(1.0)
}
