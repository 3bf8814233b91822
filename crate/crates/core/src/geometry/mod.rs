//! Model Kähler geometries, Hamiltonian vector fields and their flows.
//!
//! Both models live in a single complex chart `z`. The Kähler form is
//! `ω = i λ(z) dz ∧ dz̄ = 2λ dx ∧ dy`, so the Riemannian metric is
//! `g = 2λ (dx² + dy²)` and `dVol = ω`.

mod flow;
mod hamiltonian;

pub use flow::{
    contact_lift_rate, flow, lifted_flow, project_to_level_set, FieldKind, FlowResult, DEFAULT_DT_MAX,
};
pub use hamiltonian::{registry, Hamiltonian, HamiltonianSpec, RegisteredHamiltonian};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::C64;

/// Default chart cutoff for both models.
pub const DEFAULT_CHART_RADIUS: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// `ℂ` with potential `|z|²`.
    #[serde(alias = "bf")]
    BargmannFock,
    /// `ℂP¹` in the north chart with potential `log(1 + |z|²)`.
    #[serde(rename = "fubini-study", alias = "fs")]
    FubiniStudyCp1,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::BargmannFock => "bargmann-fock",
            ModelKind::FubiniStudyCp1 => "fubini-study",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryModel {
    pub kind: ModelKind,
    pub chart_radius: f64,
}

impl GeometryModel {
    pub fn bargmann_fock() -> Self {
        GeometryModel {
            kind: ModelKind::BargmannFock,
            chart_radius: DEFAULT_CHART_RADIUS,
        }
    }

    pub fn fubini_study() -> Self {
        GeometryModel {
            kind: ModelKind::FubiniStudyCp1,
            chart_radius: DEFAULT_CHART_RADIUS,
        }
    }

    pub fn new(kind: ModelKind) -> Self {
        match kind {
            ModelKind::BargmannFock => Self::bargmann_fock(),
            ModelKind::FubiniStudyCp1 => Self::fubini_study(),
        }
    }

    pub fn with_chart_radius(mut self, radius: f64) -> Self {
        self.chart_radius = radius;
        self
    }

    /// Kähler potential `φ(z)`.
    pub fn potential(&self, z: C64) -> f64 {
        match self.kind {
            ModelKind::BargmannFock => z.norm_sqr(),
            ModelKind::FubiniStudyCp1 => z.norm_sqr().ln_1p(),
        }
    }

    /// `∂φ/∂z`.
    pub fn potential_dz(&self, z: C64) -> C64 {
        match self.kind {
            ModelKind::BargmannFock => z.conj(),
            ModelKind::FubiniStudyCp1 => z.conj() / (1.0 + z.norm_sqr()),
        }
    }

    /// `λ(z)` in `ω = i λ dz ∧ dz̄`.
    pub fn metric_coeff(&self, z: C64) -> f64 {
        match self.kind {
            ModelKind::BargmannFock => 1.0,
            ModelKind::FubiniStudyCp1 => (1.0 + z.norm_sqr()).powi(-2),
        }
    }

    /// Total `∫ ω`, when finite.
    pub fn volume(&self) -> Option<f64> {
        match self.kind {
            ModelKind::BargmannFock => None,
            ModelKind::FubiniStudyCp1 => Some(2.0 * PI),
        }
    }

    pub fn in_chart(&self, z: C64) -> bool {
        z.is_finite() && z.norm() <= self.chart_radius
    }

    pub fn check_chart(&self, z: C64) -> Result<()> {
        if self.in_chart(z) {
            Ok(())
        } else {
            Err(LabError::OutsideChart {
                re: z.re,
                im: z.im,
                radius: self.chart_radius,
            })
        }
    }

    /// Riemannian distance of `g`.
    pub fn distance(&self, z: C64, w: C64) -> f64 {
        match self.kind {
            ModelKind::BargmannFock => 2f64.sqrt() * (z - w).norm(),
            // round sphere of radius 1/√2 under stereographic projection
            ModelKind::FubiniStudyCp1 => {
                let chord = (z - w).norm();
                let denom = (C64::new(1.0, 0.0) + z.conj() * w).norm();
                2f64.sqrt() * chord.atan2(denom)
            }
        }
    }

    /// `g(u, v)` for real tangent vectors written as complex numbers.
    pub fn inner(&self, z: C64, u: C64, v: C64) -> f64 {
        2.0 * self.metric_coeff(z) * (u.re * v.re + u.im * v.im)
    }
}

/// Hamiltonian and gradient vector fields at a point, as real 2-vectors `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorFields {
    pub xi: [f64; 2],
    pub grad: [f64; 2],
    /// `‖ξ_H‖ = ‖∇H‖` in the metric `g`.
    pub norm_xi: f64,
}

impl VectorFields {
    pub fn xi_complex(&self) -> C64 {
        C64::new(self.xi[0], self.xi[1])
    }

    pub fn grad_complex(&self) -> C64 {
        C64::new(self.grad[0], self.grad[1])
    }
}

pub(crate) fn check_compatible(model: &GeometryModel, h: &HamiltonianSpec) -> Result<()> {
    if model.kind == h.model {
        Ok(())
    } else {
        Err(LabError::IncompatibleModel {
            label: h.label.clone(),
            expected: h.model.name(),
            got: model.kind.name(),
        })
    }
}

/// Metric gradient `∇H = g⁻¹dH` as a complex number: `∂H/∂z̄ / λ`.
pub(crate) fn gradient_complex(model: &GeometryModel, h: &HamiltonianSpec, z: C64) -> C64 {
    h.dzbar(z) / model.metric_coeff(z)
}

/// `ξ_H = ω⁻¹dH` with `ι_ξ ω = dH`, and `∇H = J ξ_H`.
pub fn fields_at(model: &GeometryModel, h: &HamiltonianSpec, z: C64) -> Result<VectorFields> {
    check_compatible(model, h)?;
    model.check_chart(z)?;
    let grad = gradient_complex(model, h, z);
    let xi = -C64::i() * grad;
    let norm_xi = (2.0 * model.metric_coeff(z)).sqrt() * xi.norm();
    Ok(VectorFields {
        xi: [xi.re, xi.im],
        grad: [grad.re, grad.im],
        norm_xi,
    })
}
