//! Orthonormal monomial bases of holomorphic sections of `L^k`.
//!
//! Sections are evaluated in the frame `e_L^k` with the weight
//! `e^{-kφ/2}` folded in, so `|eval(j, z)|² = ‖s_j(z)‖²_{h^k}`.

mod quadrature;

pub use quadrature::{
    bf_radial_extent, build_quadrature, default_angular, default_bf_radial, default_fs_radial,
    gauss_legendre, QuadratureRule,
};

use std::f64::consts::PI;

use faer::Mat;

use crate::error::{LabError, Result};
use crate::geometry::{GeometryModel, ModelKind};
use crate::special::{ln_factorial, log_sum_exp};
use crate::C64;

/// Relative tolerance between quadrature norms and the Beta-integral values.
pub const NORM_CHECK_TOLERANCE: f64 = 1e-8;

pub fn default_bf_truncation(k: usize) -> usize {
    let kf = k as f64;
    (4 * k).max((kf + 10.0 * kf.sqrt()).ceil() as usize)
}

#[derive(Debug, Clone)]
pub struct SectionBasis {
    pub k: usize,
    pub model: GeometryModel,
    /// Number of sections `N_k`.
    pub count: usize,
    /// `ln ‖z^j‖²` for the raw monomials.
    pub log_norms: Vec<f64>,
    pub quadrature: QuadratureRule,
}

/// `ln ∫ |z|^{2j} e^{-kφ} dVol` in closed form.
pub fn exact_log_norm(kind: ModelKind, k: usize, j: usize) -> f64 {
    let ln2pi = (2.0 * PI).ln();
    match kind {
        ModelKind::BargmannFock => ln2pi + ln_factorial(j as u64) - (j as f64 + 1.0) * (k as f64).ln(),
        // 2π B(j+1, k-j+1)
        ModelKind::FubiniStudyCp1 => {
            ln2pi + ln_factorial(j as u64) + ln_factorial((k - j) as u64) - ln_factorial(k as u64 + 1)
        }
    }
}

/// Basis with the default quadrature for `k`.
pub fn build_basis(model: &GeometryModel, k: usize, truncation: Option<usize>) -> Result<SectionBasis> {
    let top = top_degree(model, k, truncation)?;
    let (nr, na) = default_resolution(model.kind, k, top);
    build_basis_with(model, k, truncation, nr, na)
}

/// Default `(n_radial, n_angular)` for a basis of top degree `top`.
pub fn default_resolution(kind: ModelKind, k: usize, top: usize) -> (usize, usize) {
    match kind {
        ModelKind::FubiniStudyCp1 => (default_fs_radial(k), default_angular(k, top)),
        ModelKind::BargmannFock => (default_bf_radial(k, top), default_angular(k, top)),
    }
}

fn top_degree(model: &GeometryModel, k: usize, truncation: Option<usize>) -> Result<usize> {
    if k == 0 {
        return Err(LabError::InvalidResolution("tensor power k must be positive".into()));
    }
    match model.kind {
        ModelKind::FubiniStudyCp1 => Ok(k),
        ModelKind::BargmannFock => {
            let n = truncation.unwrap_or_else(|| default_bf_truncation(k));
            if n < 4 * k {
                return Err(LabError::InvalidResolution(format!(
                    "Bargmann-Fock truncation {n} is below 4k = {}",
                    4 * k
                )));
            }
            Ok(n)
        }
    }
}

pub fn build_basis_with(
    model: &GeometryModel,
    k: usize,
    truncation: Option<usize>,
    n_radial: usize,
    n_angular: usize,
) -> Result<SectionBasis> {
    let top = top_degree(model, k, truncation)?;
    if n_angular < 2 * top + 2 {
        return Err(LabError::InvalidResolution(format!(
            "n_angular = {n_angular} cannot separate degrees up to {top}; need {}",
            2 * top + 2
        )));
    }
    let quadrature = build_quadrature(model, k, n_radial, n_angular)?;
    let log_norms = match model.kind {
        ModelKind::BargmannFock => (0..=top)
            .map(|j| exact_log_norm(model.kind, k, j))
            .collect(),
        ModelKind::FubiniStudyCp1 => {
            let mut norms = Vec::with_capacity(top + 1);
            for j in 0..=top {
                let got = quadrature_log_norm(&quadrature, k, j);
                let want = exact_log_norm(model.kind, k, j);
                let rel = (got - want).exp_m1().abs();
                if !(rel <= NORM_CHECK_TOLERANCE) {
                    return Err(LabError::InvalidResolution(format!(
                        "quadrature norm of z^{j} is off by {rel:e} relative to the Beta integral"
                    )));
                }
                norms.push(got);
            }
            norms
        }
    };
    Ok(SectionBasis {
        k,
        model: *model,
        count: top + 1,
        log_norms,
        quadrature,
    })
}

/// `ln ∫ |z|^{2j} e^{-kφ} dVol` by the (angle-independent) radial rule.
pub fn quadrature_log_norm(q: &QuadratureRule, k: usize, j: usize) -> f64 {
    let kf = k as f64;
    let jf = j as f64;
    let terms = q.radii.iter().zip(&q.radial_weights).map(|(&r, &w)| {
        let r2 = r * r;
        let weight = match q.model {
            ModelKind::BargmannFock => -kf * r2,
            ModelKind::FubiniStudyCp1 => -kf * r2.ln_1p(),
        };
        let power = if j == 0 { 0.0 } else { jf * r2.ln() };
        w.ln() + power + weight
    });
    (2.0 * PI).ln() + log_sum_exp(terms)
}

impl SectionBasis {
    /// `ln ‖s_j(z)‖²`; `-∞` where the section vanishes.
    pub fn log_density(&self, j: usize, z: C64) -> f64 {
        let r2 = z.norm_sqr();
        let power = if j == 0 {
            0.0
        } else if r2 == 0.0 {
            return f64::NEG_INFINITY;
        } else {
            j as f64 * r2.ln()
        };
        power - self.k as f64 * self.model.potential(z) - self.log_norms[j]
    }

    /// `s_j(z)` in the weighted frame.
    pub fn eval(&self, j: usize, z: C64) -> C64 {
        let amp = (0.5 * self.log_density(j, z)).exp();
        if amp == 0.0 {
            return C64::new(0.0, 0.0);
        }
        C64::from_polar(amp, j as f64 * z.arg())
    }

    pub fn eval_all(&self, z: C64) -> Vec<C64> {
        (0..self.count).map(|j| self.eval(j, z)).collect()
    }

    /// `|s_j|` on the circle of radius `r`, for every `j`.
    pub fn radial_amplitudes(&self, r: f64) -> Vec<f64> {
        let z = C64::new(r, 0.0);
        (0..self.count)
            .map(|j| (0.5 * self.log_density(j, z)).exp())
            .collect()
    }

    /// `Σ_j ‖s_j(z)‖²`.
    pub fn full_density(&self, z: C64) -> f64 {
        let logs: Vec<f64> = (0..self.count).map(|j| self.log_density(j, z)).collect();
        log_sum_exp(logs).exp()
    }

    /// Quadrature Gram matrix `⟨s_l, s_i⟩`.
    pub fn gram_matrix(&self) -> Mat<C64> {
        let q = &self.quadrature;
        let n = self.count;
        let amps: Vec<Vec<f64>> = q.radii.iter().map(|&r| self.radial_amplitudes(r)).collect();
        let moments: Vec<C64> = (0..n as i64).map(|m| q.angular_moment(m)).collect();
        Mat::from_fn(n, n, |i, l| {
            let radial: f64 = amps
                .iter()
                .zip(&q.radial_weights)
                .map(|(a, w)| w * a[i] * a[l])
                .sum();
            let m = l as i64 - i as i64;
            let ang = if m >= 0 {
                moments[m as usize]
            } else {
                moments[(-m) as usize].conj()
            };
            ang * radial
        })
    }
}

/// `‖Σ_j c_j s_j(z)‖²`, terms scaled by their largest magnitude before summation.
pub fn eval_density(basis: &SectionBasis, coeffs: &[C64], z: C64) -> Result<f64> {
    if coeffs.len() != basis.count {
        return Err(LabError::DimensionMismatch {
            expected: basis.count,
            got: coeffs.len(),
        });
    }
    let logs: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if c.norm_sqr() == 0.0 {
                f64::NEG_INFINITY
            } else {
                c.norm().ln() + 0.5 * basis.log_density(j, z)
            }
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let theta = z.arg();
    let sum: C64 = coeffs
        .iter()
        .zip(&logs)
        .enumerate()
        .filter(|(_, (_, l))| l.is_finite())
        .map(|(j, (c, l))| C64::from_polar((l - top).exp(), c.arg() + j as f64 * theta))
        .sum();
    Ok(sum.norm_sqr() * (2.0 * top).exp())
}
