//! Toeplitz quantization `H_k = Π_k((i/k)∇_{ξ_H} + H)Π_k`, its spectrum, and
//! the propagator `exp(itkH_k)`.

use std::f64::consts::PI;

use faer::{Mat, Side};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::basis::SectionBasis;
use crate::error::{LabError, Result};
use crate::geometry::{check_compatible, GeometryModel, HamiltonianSpec};
use crate::C64;

/// Largest tolerated `max |M − M*|` before symmetrization.
pub const HERMITIAN_DEFECT_TOLERANCE: f64 = 1e-6;

/// Relative size below which an angular mode of the symbol is skipped.
const MODE_CUTOFF: f64 = 1e-14;

/// Eigenvalues within this distance of a threshold are reported as boundary modes.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `Π_k((i/k)∇_{ξ_H} + H)Π_k`.
    Kostant,
    /// `Π_k H Π_k`.
    Multiplication,
}

#[derive(Debug, Clone)]
pub struct ToeplitzMatrix {
    pub entries: Mat<C64>,
    pub mode: Mode,
    pub k: usize,
    pub hamiltonian_label: String,
    /// `max |M − M*|` of the raw quadrature matrix.
    pub hermitian_defect: f64,
}

/// Assembles `M_il = ⟨A s_l, s_i⟩`.
///
/// With `s_l = a_l z^l` and `A f = P f + (H_z̄/(kλ)) f'`, each entry reduces to
/// angular Fourier coefficients of `P` and `R = H_z̄/(kλz)` on every quadrature
/// circle, taken by FFT.
pub fn build_toeplitz(
    model: &GeometryModel,
    h: &HamiltonianSpec,
    basis: &SectionBasis,
    mode: Mode,
) -> Result<ToeplitzMatrix> {
    check_compatible(model, h)?;
    if basis.model.kind != model.kind {
        return Err(LabError::InvalidParameter(format!(
            "basis was built on {}, not {}",
            basis.model.kind.name(),
            model.kind.name()
        )));
    }
    let q = &basis.quadrature;
    let n = basis.count;
    let na = q.n_angular;
    if na < 2 * basis.k + 2 {
        return Err(LabError::InvalidResolution(format!(
            "n_angular = {na} is below 2k+2 = {}",
            2 * basis.k + 2
        )));
    }
    let kf = basis.k as f64;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(na);

    let mut p_hat = Vec::with_capacity(q.radii.len());
    let mut r_hat = Vec::with_capacity(q.radii.len());
    for &r in &q.radii {
        let mut p_buf = Vec::with_capacity(na);
        let mut r_buf = Vec::with_capacity(na);
        for m in 0..na {
            let z = C64::from_polar(r, q.angle(m));
            let value = h.value(z);
            match mode {
                Mode::Multiplication => {
                    p_buf.push(C64::new(value, 0.0));
                    r_buf.push(C64::new(0.0, 0.0));
                }
                Mode::Kostant => {
                    let lambda = model.metric_coeff(z);
                    let hzb = h.dzbar(z);
                    p_buf.push(value - model.potential_dz(z) * hzb / lambda);
                    r_buf.push(hzb / (kf * lambda * z));
                }
            }
        }
        fft.process(&mut p_buf);
        fft.process(&mut r_buf);
        let scale = 1.0 / na as f64;
        p_buf.iter_mut().for_each(|c| *c *= scale);
        r_buf.iter_mut().for_each(|c| *c *= scale);
        p_hat.push(p_buf);
        r_hat.push(r_buf);
    }

    let amps: Vec<Vec<f64>> = q.radii.iter().map(|&r| basis.radial_amplitudes(r)).collect();
    let weights: Vec<f64> = q.radial_weights.iter().map(|w| 2.0 * PI * w).collect();

    // Angular frequencies at FFT round-off level on every circle are dropped.
    let span = (n as i64 - 1).min(na as i64 / 2);
    let mut magnitude = vec![0.0f64; 2 * span as usize + 1];
    for (ph, rh) in p_hat.iter().zip(&r_hat) {
        for d in -span..=span {
            let idx = d.rem_euclid(na as i64) as usize;
            let m = ph[idx].norm() + n as f64 * rh[idx].norm();
            let slot = &mut magnitude[(d + span) as usize];
            *slot = slot.max(m);
        }
    }
    let peak = magnitude.iter().copied().fold(0.0, f64::max);

    let mut entries = Mat::<C64>::zeros(n, n);
    for d in -span..=span {
        if magnitude[(d + span) as usize] <= MODE_CUTOFF * peak {
            continue;
        }
        let idx = d.rem_euclid(na as i64) as usize;
        for l in 0..n {
            let i = l as i64 + d;
            if i < 0 || i >= n as i64 {
                continue;
            }
            let i = i as usize;
            let lf = l as f64;
            let mut acc = C64::new(0.0, 0.0);
            for (qi, a) in amps.iter().enumerate() {
                let ai = a[i] * a[l];
                if ai == 0.0 {
                    continue;
                }
                acc += (p_hat[qi][idx] + r_hat[qi][idx] * lf) * (weights[qi] * ai);
            }
            entries[(i, l)] = acc;
        }
    }

    let mut defect = 0.0f64;
    for i in 0..n {
        for l in 0..=i {
            defect = defect.max((entries[(i, l)] - entries[(l, i)].conj()).norm());
        }
    }
    if !(defect <= HERMITIAN_DEFECT_TOLERANCE) {
        return Err(LabError::QuadratureDefect {
            defect,
            tolerance: HERMITIAN_DEFECT_TOLERANCE,
        });
    }
    let sym = Mat::from_fn(n, n, |i, l| (entries[(i, l)] + entries[(l, i)].conj()) * 0.5);
    Ok(ToeplitzMatrix {
        entries: sym,
        mode,
        k: basis.k,
        hamiltonian_label: h.label.clone(),
        hermitian_defect: defect,
    })
}

impl ToeplitzMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `max |M − M*|` of the stored (symmetrized) matrix.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for l in 0..n {
                worst = worst.max((self.entries[(i, l)] - self.entries[(l, i)].conj()).norm());
            }
        }
        worst
    }
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Ascending eigenvalues `μ_{k,j}`.
    pub eigenvalues: Vec<f64>,
    /// Columns are orthonormal eigen-coefficient vectors in the section basis.
    pub eigenvectors: Mat<C64>,
    pub k: usize,
    /// `max_j ‖M v_j − μ_j v_j‖`.
    pub residual: f64,
}

/// Dense Hermitian eigendecomposition.
pub fn diagonalize(m: &ToeplitzMatrix) -> Result<SpectralData> {
    spectrum_of(&m.entries, m.k)
}

pub fn spectrum_of(entries: &Mat<C64>, k: usize) -> Result<SpectralData> {
    let n = entries.nrows();
    if n == 0 {
        return Err(LabError::EmptySpectrum);
    }
    if entries.ncols() != n {
        return Err(LabError::DimensionMismatch {
            expected: n,
            got: entries.ncols(),
        });
    }
    if (0..n).any(|j| (0..n).any(|i| !entries[(i, j)].is_finite())) {
        return Err(LabError::EigensolverFailure("matrix has non-finite entries".into()));
    }
    let evd = entries
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LabError::EigensolverFailure(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&j| s[j].re).collect();
    let eigenvectors = Mat::from_fn(n, n, |i, j| u[(i, order[j])]);

    let norm = eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mv = entries * &eigenvectors;
    let mut residual = 0.0f64;
    for j in 0..n {
        let mut r2 = 0.0;
        for i in 0..n {
            r2 += (mv[(i, j)] - eigenvectors[(i, j)] * eigenvalues[j]).norm_sqr();
        }
        residual = residual.max(r2.sqrt());
    }
    if !(residual <= 1e-8 * norm.max(f64::MIN_POSITIVE)) && residual > 1e-300 {
        return Err(LabError::EigensolverFailure(format!(
            "eigen residual {residual:e} exceeds 1e-8 * ||M|| = {:e}",
            1e-8 * norm
        )));
    }
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
        k,
        residual,
    })
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    fn check_basis(&self, basis: &SectionBasis) -> Result<()> {
        if basis.count != self.len() {
            return Err(LabError::DimensionMismatch {
                expected: self.len(),
                got: basis.count,
            });
        }
        Ok(())
    }

    /// Eigensections `ŝ_j(z) = Σ_l V_lj s_l(z)`.
    pub fn eigensections_at(&self, basis: &SectionBasis, z: C64) -> Result<Vec<C64>> {
        self.check_basis(basis)?;
        let s = basis.eval_all(z);
        Ok(self.project(&s))
    }

    fn project(&self, s: &[C64]) -> Vec<C64> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let mut acc = C64::new(0.0, 0.0);
                for (l, sl) in s.iter().enumerate() {
                    acc += self.eigenvectors[(l, j)] * sl;
                }
                acc
            })
            .collect()
    }

    /// `Π_{k,j}(z) = ‖ŝ_j(z)‖²` for each eigenvalue.
    pub fn mode_densities(&self, basis: &SectionBasis, z: C64) -> Result<Vec<f64>> {
        Ok(self
            .eigensections_at(basis, z)?
            .iter()
            .map(|c| c.norm_sqr())
            .collect())
    }

    /// Number of eigenvalues counted below threshold `e`; ties within
    /// [`BOUNDARY_TOLERANCE`] count as below.
    pub fn count_below(&self, e: f64) -> usize {
        self.eigenvalues.partition_point(|&mu| mu < e + BOUNDARY_TOLERANCE)
    }

    /// Eigenvalue indices within [`BOUNDARY_TOLERANCE`] of `e`.
    pub fn boundary_modes(&self, e: f64) -> Vec<usize> {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, mu)| (*mu - e).abs() < BOUNDARY_TOLERANCE)
            .map(|(j, _)| j)
            .collect()
    }

    /// Coefficient matrix of `exp(itkH_k)`: `V e^{itkD} V*`.
    pub fn propagator_matrix(&self, t: f64) -> Mat<C64> {
        let n = self.len();
        let kf = self.k as f64;
        let phased = Mat::from_fn(n, n, |i, j| {
            self.eigenvectors[(i, j)] * C64::from_polar(1.0, t * kf * self.eigenvalues[j])
        });
        &phased * self.eigenvectors.adjoint()
    }
}

/// `U_k(t, z, w) = Σ_j e^{itkμ_j} ŝ_j(z) conj(ŝ_j(w))`.
pub fn propagator_kernel(spec: &SpectralData, basis: &SectionBasis, t: f64, z: C64, w: C64) -> Result<C64> {
    let ez = spec.eigensections_at(basis, z)?;
    let ew = if w == z { ez.clone() } else { spec.eigensections_at(basis, w)? };
    let kf = spec.k as f64;
    Ok(ez
        .iter()
        .zip(&ew)
        .zip(&spec.eigenvalues)
        .map(|((a, b), mu)| C64::from_polar(1.0, t * kf * mu) * a * b.conj())
        .sum())
}

/// Kernel `s(z)ᵀ C conj(s(w))` of an operator with coefficient matrix `C`.
pub fn kernel_from_matrix(basis: &SectionBasis, c: &Mat<C64>, z: C64, w: C64) -> Result<C64> {
    if c.nrows() != basis.count || c.ncols() != basis.count {
        return Err(LabError::DimensionMismatch {
            expected: basis.count,
            got: c.nrows(),
        });
    }
    let sz = basis.eval_all(z);
    let sw = basis.eval_all(w);
    let mut acc = C64::new(0.0, 0.0);
    for (i, a) in sz.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let mut row = C64::new(0.0, 0.0);
        for (l, b) in sw.iter().enumerate() {
            row += c[(i, l)] * b.conj();
        }
        acc += a * row;
    }
    Ok(acc)
}

/// Basis, quantized Hamiltonian and its spectrum at one `k`.
#[derive(Debug, Clone)]
pub struct Quantization {
    pub basis: SectionBasis,
    pub spectrum: SpectralData,
    pub mode: Mode,
    pub hermitian_defect: f64,
}

impl Quantization {
    pub fn k(&self) -> usize {
        self.basis.k
    }
}

/// Builds the default basis for `k`, assembles `H_k` and diagonalizes it.
pub fn quantize(
    model: &GeometryModel,
    h: &HamiltonianSpec,
    k: usize,
    truncation: Option<usize>,
    mode: Mode,
) -> Result<Quantization> {
    let basis = crate::basis::build_basis(model, k, truncation)?;
    quantize_on(model, h, basis, mode)
}

pub fn quantize_on(
    model: &GeometryModel,
    h: &HamiltonianSpec,
    basis: SectionBasis,
    mode: Mode,
) -> Result<Quantization> {
    let m = build_toeplitz(model, h, &basis, mode)?;
    let spectrum = diagonalize(&m)?;
    Ok(Quantization {
        basis,
        spectrum,
        mode,
        hermitian_defect: m.hermitian_defect,
    })
}
