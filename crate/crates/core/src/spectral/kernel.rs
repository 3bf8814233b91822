use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::special::sine_integral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// `W(x) = (1/2π)(sin(x/2)/(x/2))²`, `Ŵ(ξ) = max(0, 1 − |ξ|)`.
    Fejer,
    /// Standard normal density. Its transform is not compactly supported.
    Gaussian,
}

/// `W_h(x) = W(x/h)/h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingKernel {
    pub kind: KernelKind,
    pub h: f64,
}

pub fn make_kernel(kind: KernelKind, h: f64) -> Result<SmoothingKernel> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(LabError::InvalidWidth(h));
    }
    Ok(SmoothingKernel { kind, h })
}

fn fejer(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        return 1.0 / (2.0 * PI);
    }
    let s = (0.5 * x).sin() / (0.5 * x);
    s * s / (2.0 * PI)
}

fn fejer_cdf(x: f64) -> f64 {
    // ∫_0^x (1 − cos t)/(π t²) dt = (Si(x) − (1 − cos x)/x)/π
    let one_minus_cos_over_x = if x == 0.0 {
        0.0
    } else {
        let s = (0.5 * x).sin();
        2.0 * s * s / x
    };
    let v = 0.5 + (sine_integral(x) - one_minus_cos_over_x) / PI;
    v.clamp(0.0, 1.0)
}

impl SmoothingKernel {
    /// Unit-width profile `W(x)`.
    pub fn profile(&self, x: f64) -> f64 {
        match self.kind {
            KernelKind::Fejer => fejer(x),
            KernelKind::Gaussian => (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
        }
    }

    /// `W_h(x)`.
    pub fn density(&self, x: f64) -> f64 {
        self.profile(x / self.h) / self.h
    }

    /// `∫_{-∞}^x W_h`.
    pub fn cumulative(&self, x: f64) -> f64 {
        let u = x / self.h;
        match self.kind {
            KernelKind::Fejer => fejer_cdf(u),
            KernelKind::Gaussian => 0.5 * libm::erfc(-u / SQRT_2),
        }
    }

    /// `Ŵ_h(ξ) = ∫ W_h(x) e^{-ixξ} dx`.
    pub fn fourier(&self, xi: f64) -> f64 {
        let u = xi * self.h;
        match self.kind {
            KernelKind::Fejer => (1.0 - u.abs()).max(0.0),
            KernelKind::Gaussian => (-0.5 * u * u).exp(),
        }
    }

    /// Half-width of the support of `Ŵ_h`, if compact.
    pub fn fourier_support(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Fejer => Some(1.0 / self.h),
            KernelKind::Gaussian => None,
        }
    }
}
