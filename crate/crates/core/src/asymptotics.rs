//! The limit laws as checkable experiments: interface profiles, the
//! short-time propagator, energy localization and off-diagonal decay.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::geometry::{fields_at, flow, FieldKind, GeometryModel, HamiltonianSpec, DEFAULT_DT_MAX};
use crate::spectral::{make_kernel, partial_from_masses, KernelKind};
use crate::toeplitz::{propagator_kernel, quantize, Mode, Quantization};
use crate::C64;

/// `|∇H|` below this is treated as a critical point.
pub const CRITICAL_THRESHOLD: f64 = 1e-8;

/// Standard normal cumulative `∫_{-∞}^x e^{-s²/2} ds/√(2π)`.
///
/// This is not the classical `erf`; `erf(x) = (1 + erf_classical(x/√2))/2`.
pub fn erf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

fn require_regular(model: &GeometryModel, h: &HamiltonianSpec, z: C64) -> Result<f64> {
    let norm = fields_at(model, h, z)?.norm_xi;
    if norm < CRITICAL_THRESHOLD {
        return Err(LabError::CriticalPoint { norm });
    }
    Ok(norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub k: usize,
    pub beta: f64,
    pub ratio: f64,
    pub target: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub rows: Vec<ProfileRow>,
    pub z0: C64,
    pub energy: f64,
    /// `|∇H(z0)|`.
    pub grad_norm: f64,
    pub boundary_modes: usize,
}

impl ProfileTable {
    /// `sup_β |ratio − target|` for each `k`, in the order the ks appear.
    pub fn sup_errors(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for row in &self.rows {
            match out.iter_mut().find(|(k, _)| *k == row.k) {
                Some((_, e)) => *e = e.max(row.abs_error),
                None => out.push((row.k, row.abs_error)),
            }
        }
        out
    }
}

/// Interface target `Erf(−√2 β |∇H(z0)|)`.
pub fn interface_target(beta: f64, grad_norm: f64) -> f64 {
    erf(-SQRT_2 * beta * grad_norm)
}

/// Quantizes at every `k` and profiles the partial density across `H = E`.
#[allow(clippy::too_many_arguments)]
pub fn interface_profile(
    model: &GeometryModel,
    h: &HamiltonianSpec,
    e: f64,
    z0: C64,
    betas: &[f64],
    ks: &[usize],
    mode: Mode,
    truncation: Option<usize>,
) -> Result<ProfileTable> {
    let quantized = ks
        .iter()
        .map(|&k| quantize(model, h, k, truncation, mode))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Quantization> = quantized.iter().collect();
    interface_profile_with(model, h, e, z0, betas, &refs)
}

/// Profile on precomputed spectra: the ratio at `F^{β/√k}(z0)` against
/// `Erf(−√2 β |∇H(z0)|)`, where `F` is the gradient flow.
pub fn interface_profile_with(
    model: &GeometryModel,
    h: &HamiltonianSpec,
    e: f64,
    z0: C64,
    betas: &[f64],
    quantized: &[&Quantization],
) -> Result<ProfileTable> {
    let grad_norm = require_regular(model, h, z0)?;
    if (h.value(z0) - e).abs() > 1e-10 {
        return Err(LabError::InvalidParameter(format!(
            "profile base point has H = {} but E = {e}; project it onto the level set first",
            h.value(z0)
        )));
    }
    let mut rows = Vec::with_capacity(betas.len() * quantized.len());
    let mut boundary = 0;
    for q in quantized {
        let k = q.k();
        let sk = (k as f64).sqrt();
        for &beta in betas {
            let zk = flow(model, h, z0, beta / sk, FieldKind::Gradient, DEFAULT_DT_MAX)?.endpoint;
            let masses = q.spectrum.mode_densities(&q.basis, zk)?;
            let pd = partial_from_masses(&q.spectrum, &masses, e);
            boundary += pd.boundary_modes.len();
            let target = interface_target(beta, grad_norm);
            rows.push(ProfileRow {
                k,
                beta,
                ratio: pd.ratio,
                target,
                abs_error: (pd.ratio - target).abs(),
            });
        }
    }
    Ok(ProfileTable {
        rows,
        z0,
        energy: e,
        grad_norm,
        boundary_modes: boundary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(ln k, ln error)`.
    pub points: Vec<(f64, f64)>,
}

/// Least squares `ln error = intercept + slope · ln k`.
pub fn rate_fit(errors: &[(usize, f64)]) -> Result<RateFit> {
    if errors.len() < 3 {
        return Err(LabError::DegenerateFit(format!(
            "need at least 3 points, got {}",
            errors.len()
        )));
    }
    if let Some((k, e)) = errors.iter().find(|(k, e)| *k == 0 || !(*e > 0.0) || !e.is_finite()) {
        return Err(LabError::DegenerateFit(format!(
            "point (k = {k}, error = {e}) cannot be placed on a log scale"
        )));
    }
    let points: Vec<(f64, f64)> = errors.iter().map(|&(k, e)| ((k as f64).ln(), e.ln())).collect();
    let (slope, intercept, r_squared) = least_squares(&points)?;
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points,
    })
}

fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(LabError::DegenerateFit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok((slope, intercept, r_squared))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagatorRow {
    pub k: usize,
    pub tau: f64,
    pub modulus: f64,
    pub predicted: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortTimeReport {
    pub rows: Vec<PropagatorRow>,
    pub max_rel_error: f64,
}

/// `|U_k(τ/√k, z, z)|` against `Π_k(z) e^{−τ²‖ξ_H(z)‖²/4}`.
pub fn short_time_gaussian_check(
    q: &Quantization,
    model: &GeometryModel,
    h: &HamiltonianSpec,
    z: C64,
    taus: &[f64],
) -> Result<ShortTimeReport> {
    let norm = require_regular(model, h, z)?;
    let k = q.k();
    let sk = (k as f64).sqrt();
    let full = q.spectrum.mode_densities(&q.basis, z)?.iter().sum::<f64>();
    let mut rows = Vec::with_capacity(taus.len());
    let mut worst = 0.0f64;
    for &tau in taus {
        let modulus = propagator_kernel(&q.spectrum, &q.basis, tau / sk, z, z)?.norm();
        let predicted = full * (-0.25 * tau * tau * norm * norm).exp();
        let rel_error = (modulus - predicted).abs() / predicted;
        worst = worst.max(rel_error);
        rows.push(PropagatorRow {
            k,
            tau,
            modulus,
            predicted,
            rel_error,
        });
    }
    Ok(ShortTimeReport {
        rows,
        max_rel_error: worst,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizationRow {
    pub k: usize,
    pub alpha: f64,
    pub measured: f64,
    pub predicted: f64,
    pub ratio: f64,
}

/// `Σ_j f(k(μ_j − H(z)) + √k α) Π_{k,j}(z)` against
/// `Π_k(z) (k/2π)^{-1/2} e^{−α²/‖ξ_H‖²} √2/(2π‖ξ_H‖)`.
///
/// `f` is the unit-mass kernel of `kind` with `supp f̂ ⊂ (−ε, ε)` for Fejér,
/// i.e. width `1/ε`.
pub fn energy_localization_check(
    q: &Quantization,
    model: &GeometryModel,
    h: &HamiltonianSpec,
    z: C64,
    alpha: f64,
    kind: KernelKind,
    epsilon: f64,
) -> Result<LocalizationRow> {
    let norm = require_regular(model, h, z)?;
    if !(epsilon > 0.0) {
        return Err(LabError::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let f = make_kernel(kind, 1.0 / epsilon)?;
    let k = q.k();
    let kf = k as f64;
    let center = h.value(z);
    let masses = q.spectrum.mode_densities(&q.basis, z)?;
    let full: f64 = masses.iter().sum();
    let measured: f64 = q
        .spectrum
        .eigenvalues
        .iter()
        .zip(&masses)
        .map(|(&mu, &m)| m * f.density(kf * (mu - center) + kf.sqrt() * alpha))
        .sum();
    let predicted = localization_prediction(full, k, alpha, norm);
    Ok(LocalizationRow {
        k,
        alpha,
        measured,
        predicted,
        ratio: measured / predicted,
    })
}

/// Leading-order value with prefactor `Π_k(z)` in place of `(k/2π)`.
pub fn localization_prediction(prefactor: f64, k: usize, alpha: f64, norm_xi: f64) -> f64 {
    prefactor * (k as f64 / (2.0 * PI)).powf(-0.5) * (-alpha * alpha / (norm_xi * norm_xi)).exp() * SQRT_2
        / (2.0 * PI * norm_xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub k: usize,
    pub dist: f64,
    pub log_modulus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Fitted rate in `ln|U_k(0,z,w)| − ln k ≈ c − β̂ √k d(z,w)`.
    pub beta_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rows: Vec<DecayRow>,
}

/// Fits the off-diagonal decay of the Bergman kernel against `√k d(z, w)`.
pub fn offdiag_decay_fit(
    model: &GeometryModel,
    quantized: &[&Quantization],
    pairs: &[(C64, C64)],
) -> Result<DecayFit> {
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &(z, w) in pairs {
        let d = model.distance(z, w);
        if !(0.1..=1.0).contains(&d) {
            return Err(LabError::InvalidParameter(format!(
                "pair distance {d} lies outside [0.1, 1]"
            )));
        }
    }
    for q in quantized {
        let k = q.k();
        let kf = k as f64;
        for &(z, w) in pairs {
            let d = model.distance(z, w);
            let u = propagator_kernel(&q.spectrum, &q.basis, 0.0, z, w)?;
            let log_modulus = u.norm().ln();
            rows.push(DecayRow { k, dist: d, log_modulus });
            points.push((-kf.sqrt() * d, log_modulus - kf.ln()));
        }
    }
    if points.len() < 3 {
        return Err(LabError::DegenerateFit(format!("need at least 3 samples, got {}", points.len())));
    }
    let (slope, intercept, r_squared) = least_squares(&points)?;
    Ok(DecayFit {
        beta_hat: slope,
        intercept,
        r_squared,
        rows,
    })
}

/// `∫ f(x) e^{−(x/‖∇H‖ − β‖∇H‖)²} dx/(√π‖∇H‖)`, the leading term of
/// `Π_k(z_k)^{-1} Σ_j f(√k(μ_j − E)) Π_{k,j}(z_k)`, by the trapezoid rule on
/// `x ∈ center ± 12‖∇H‖`.
pub fn leading_pairing(f: impl Fn(f64) -> f64, grad_norm: f64, beta: f64, nodes: usize) -> f64 {
    let center = beta * grad_norm * grad_norm;
    let half = 12.0 * grad_norm;
    let n = nodes.max(2);
    let step = 2.0 * half / (n - 1) as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let x = center - half + i as f64 * step;
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let g = (-(x / grad_norm - beta * grad_norm).powi(2)).exp() / (PI.sqrt() * grad_norm);
        acc += w * f(x) * g;
    }
    acc * step
}

/// `Π_k(z_k)^{-1} Σ_j f(√k(μ_j − E)) Π_{k,j}(z_k)` with `z_k = F^{β/√k}(z0)`.
pub fn measured_pairing(
    q: &Quantization,
    model: &GeometryModel,
    h: &HamiltonianSpec,
    z0: C64,
    beta: f64,
    f: impl Fn(f64) -> f64,
) -> Result<f64> {
    let e = h.value(z0);
    let sk = (q.k() as f64).sqrt();
    let zk = flow(model, h, z0, beta / sk, FieldKind::Gradient, DEFAULT_DT_MAX)?.endpoint;
    let masses = q.spectrum.mode_densities(&q.basis, zk)?;
    let full: f64 = masses.iter().sum();
    let total: f64 = q
        .spectrum
        .eigenvalues
        .iter()
        .zip(&masses)
        .map(|(&mu, &m)| m * f(sk * (mu - e)))
        .sum();
    Ok(total / full)
}

/// `Vol{H < e}` on the sphere.
///
/// Along each of `n_angular` rays the sign changes of `H − e` on a
/// `n_radial`-point grid in `v = r²/(1+r²)` are refined by bisection, so the
/// result is exact up to crossings missed by the grid.
pub fn sublevel_volume(model: &GeometryModel, h: &HamiltonianSpec, e: f64, n_radial: usize, n_angular: usize) -> Result<f64> {
    if model.volume().is_none() {
        return Err(LabError::InvalidParameter(format!(
            "sublevel volumes need a compact model, not {}",
            model.kind.name()
        )));
    }
    let point = |v: f64, theta: f64| {
        // v = 1 is the south pole, outside the chart
        let v = v.min(1.0 - 1e-15);
        C64::from_polar((v / (1.0 - v)).sqrt(), theta)
    };
    let mut total = 0.0;
    for a in 0..n_angular {
        let theta = 2.0 * PI * (a as f64 + 0.5) / n_angular as f64;
        let g = |v: f64| h.value(point(v, theta)) - e;
        let mut prev_v = 0.0;
        let mut prev_g = g(0.0);
        let mut below = 0.0;
        let mut start = if prev_g < 0.0 { Some(0.0) } else { None };
        for i in 1..=n_radial {
            let v = i as f64 / n_radial as f64;
            let gv = g(v);
            if (gv < 0.0) != (prev_g < 0.0) {
                let (mut lo, mut hi) = (prev_v, v);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if (g(mid) < 0.0) == (prev_g < 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let cross = 0.5 * (lo + hi);
                match start.take() {
                    Some(s) => below += cross - s,
                    None => start = Some(cross),
                }
            }
            prev_v = v;
            prev_g = gv;
        }
        if let Some(s) = start {
            below += 1.0 - s;
        }
        total += below;
    }
    Ok(total * 2.0 * PI / n_angular as f64)
}

/// The level `E` with `Vol{H < E} = fraction · Vol(M)`, by bisection on `[lo, hi]`.
pub fn volume_fraction_level(
    model: &GeometryModel,
    h: &HamiltonianSpec,
    fraction: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let total = model.volume().ok_or_else(|| {
        LabError::InvalidParameter(format!("{} has infinite volume", model.kind.name()))
    })?;
    let target = fraction * total;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if sublevel_volume(model, h, mid, 2000, 720)? < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
