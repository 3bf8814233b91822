//! Partial Bergman densities and the spectral measures `Σ_j Π_{k,j}(z) δ_{x_j}`.

mod kernel;

pub use kernel::{make_kernel, KernelKind, SmoothingKernel};

use serde::{Deserialize, Serialize};

use crate::basis::SectionBasis;
use crate::error::{LabError, Result};
use crate::toeplitz::SpectralData;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct PartialDensity {
    /// `partial / full`.
    pub ratio: f64,
    /// `Σ_{μ_j < E} Π_{k,j}(z)`.
    pub partial: f64,
    /// `Σ_j Π_{k,j}(z) = Π_k(z)`.
    pub full: f64,
    /// Modes with `|μ_j − E| < 1e-12`; these are counted in `partial`.
    pub boundary_modes: Vec<usize>,
}

pub fn partial_density_ratio(spec: &SpectralData, basis: &SectionBasis, e: f64, z: C64) -> Result<PartialDensity> {
    if spec.is_empty() {
        return Err(LabError::EmptySpectrum);
    }
    let masses = spec.mode_densities(basis, z)?;
    Ok(partial_from_masses(spec, &masses, e))
}

/// Same as [`partial_density_ratio`] with the mode densities at `z` precomputed.
pub fn partial_from_masses(spec: &SpectralData, masses: &[f64], e: f64) -> PartialDensity {
    let below = spec.count_below(e);
    let partial: f64 = masses[..below].iter().sum();
    let full: f64 = partial + masses[below..].iter().sum::<f64>();
    let ratio = if full > 0.0 { partial / full } else { 0.0 };
    PartialDensity {
        ratio,
        partial,
        full,
        boundary_modes: spec.boundary_modes(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scaling {
    /// Atoms at `μ_j`.
    Unscaled,
    /// Atoms at `√k(μ_j − H(z))`.
    Clt,
    /// Atoms at `k(μ_j − H(z)) + √k τ`.
    Energy,
}

impl Scaling {
    pub fn name(self) -> &'static str {
        match self {
            Scaling::Unscaled => "unscaled",
            Scaling::Clt => "clt",
            Scaling::Energy => "energy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub z: C64,
    pub k: usize,
    /// `H(z)`.
    pub center: f64,
    pub tau: Option<f64>,
}

/// Finite weighted Dirac measure, atoms sorted by location.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMeasure {
    pub atoms: Vec<(f64, f64)>,
    pub scaling: Scaling,
    pub anchor: Anchor,
    cumulative: Vec<f64>,
}

impl PointMeasure {
    pub fn new(mut atoms: Vec<(f64, f64)>, scaling: Scaling, anchor: Anchor) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cumulative = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for &(_, m) in &atoms {
            acc += m;
            cumulative.push(acc);
        }
        PointMeasure {
            atoms,
            scaling,
            anchor,
            cumulative,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// `μ((−∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.atoms.partition_point(|a| a.0 <= x);
        if n == 0 {
            0.0
        } else {
            self.cumulative[n - 1]
        }
    }

    /// `μ((−∞, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let n = self.atoms.partition_point(|a| a.0 < x);
        if n == 0 {
            0.0
        } else {
            self.cumulative[n - 1]
        }
    }

    /// `Σ_atoms mass · f(location)`.
    pub fn pair(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(x, m)| m * f(x)).sum()
    }
}

/// Relocates the mode densities at `z` according to `scaling`.
pub fn spectral_measure(
    spec: &SpectralData,
    basis: &SectionBasis,
    z: C64,
    scaling: Scaling,
    center: f64,
    tau: Option<f64>,
) -> Result<PointMeasure> {
    let masses = spec.mode_densities(basis, z)?;
    measure_from_masses(spec, &masses, z, scaling, center, tau)
}

pub fn measure_from_masses(
    spec: &SpectralData,
    masses: &[f64],
    z: C64,
    scaling: Scaling,
    center: f64,
    tau: Option<f64>,
) -> Result<PointMeasure> {
    if spec.is_empty() {
        return Err(LabError::EmptySpectrum);
    }
    if masses.len() != spec.len() {
        return Err(LabError::DimensionMismatch {
            expected: spec.len(),
            got: masses.len(),
        });
    }
    let kf = spec.k as f64;
    let sk = kf.sqrt();
    let shift = match scaling {
        Scaling::Energy => tau.ok_or(LabError::MissingTau)? * sk,
        _ => 0.0,
    };
    let atoms = spec
        .eigenvalues
        .iter()
        .zip(masses)
        .map(|(&mu, &m)| {
            let x = match scaling {
                Scaling::Unscaled => mu,
                Scaling::Clt => sk * (mu - center),
                Scaling::Energy => kf * (mu - center) + shift,
            };
            (x, m)
        })
        .collect();
    Ok(PointMeasure::new(
        atoms,
        scaling,
        Anchor {
            z,
            k: spec.k,
            center,
            tau,
        },
    ))
}

pub fn cdf(m: &PointMeasure, x: f64) -> f64 {
    m.cdf(x)
}

/// `(F * W_h)(x) = Σ mass · CDF_W((x − loc)/h)`.
pub fn smoothed_cdf(m: &PointMeasure, w: &SmoothingKernel, x: f64) -> f64 {
    m.atoms.iter().map(|&(loc, mass)| mass * w.cumulative(x - loc)).sum()
}

/// `sup_x |F(x) − (F * W_h)(x)|`.
///
/// Between atoms `F` is constant and the smoothed CDF monotone, so the
/// supremum is attained at an atom from one side.
pub fn tauberian_gap(m: &PointMeasure, w: &SmoothingKernel) -> f64 {
    let mut worst = 0.0f64;
    for &(loc, _) in &m.atoms {
        let s = smoothed_cdf(m, w, loc);
        worst = worst.max((m.cdf(loc) - s).abs()).max((m.cdf_left(loc) - s).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anchor() -> Anchor {
        Anchor {
            z: C64::new(0.0, 0.0),
            k: 1,
            center: 0.0,
            tau: None,
        }
    }

    #[test]
    fn cdf_conventions() {
        let m = PointMeasure::new(vec![(0.0, 1.0)], Scaling::Unscaled, anchor());
        assert_eq!(m.cdf(0.0), 1.0);
        assert_eq!(m.cdf(-1e-9), 0.0);
        let m = PointMeasure::new(vec![(2.0, 0.5), (-1.0, 0.25)], Scaling::Unscaled, anchor());
        assert_eq!(m.cdf(-5.0), 0.0);
        assert_eq!(m.cdf(10.0), 0.75);
        assert_eq!(m.cdf_left(2.0), 0.25);
    }

    #[test]
    fn smoothed_cdf_limits() {
        let m = PointMeasure::new(vec![(0.0, 1.0)], Scaling::Unscaled, anchor());
        let g = make_kernel(KernelKind::Gaussian, 1.0).unwrap();
        assert!((smoothed_cdf(&m, &g, 0.0) - 0.5).abs() < 1e-15);
        let f = make_kernel(KernelKind::Fejer, 0.1).unwrap();
        let m = PointMeasure::new(vec![(0.0, 2.0), (1.0, 3.0)], Scaling::Unscaled, anchor());
        assert!((smoothed_cdf(&m, &g, 1e3) - 5.0).abs() < 1e-12);
        assert!((smoothed_cdf(&m, &f, 1e9) - 5.0).abs() < 1e-8);
    }

    #[test]
    fn gap_of_single_atom_is_half() {
        let m = PointMeasure::new(vec![(0.0, 1.0)], Scaling::Unscaled, anchor());
        let g = make_kernel(KernelKind::Gaussian, 0.2).unwrap();
        assert!((tauberian_gap(&m, &g) - 0.5).abs() < 1e-15);
    }
}
