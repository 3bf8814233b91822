use std::collections::BTreeMap;

use serde::Serialize;

use super::ModelKind;
use crate::error::{LabError, Result};
use crate::C64;

/// Closed-form real Hamiltonians with analytic `∂H/∂z`.
#[derive(Debug, Clone, PartialEq)]
pub enum Hamiltonian {
    /// `Re(α z̄)`.
    Linear { alpha: C64 },
    /// `|z|²`.
    Radial,
    /// `(A|z|² + 2Re(B z̄) + C) / (1 + |z|²)`: the height functions of `ℂP¹`.
    Mobius { a: f64, b: C64, c: f64 },
    Sum(Vec<(f64, Hamiltonian)>),
    Square(Box<Hamiltonian>),
}

impl Hamiltonian {
    pub fn value(&self, z: C64) -> f64 {
        match self {
            Hamiltonian::Linear { alpha } => (alpha * z.conj()).re,
            Hamiltonian::Radial => z.norm_sqr(),
            Hamiltonian::Mobius { a, b, c } => {
                let r2 = z.norm_sqr();
                (a * r2 + 2.0 * (b * z.conj()).re + c) / (1.0 + r2)
            }
            Hamiltonian::Sum(terms) => terms.iter().map(|(w, t)| w * t.value(z)).sum(),
            Hamiltonian::Square(inner) => inner.value(z).powi(2),
        }
    }

    /// `∂H/∂z`; for real `H`, `∂H/∂z̄` is its conjugate.
    pub fn dz(&self, z: C64) -> C64 {
        match self {
            Hamiltonian::Linear { alpha } => alpha.conj() * 0.5,
            Hamiltonian::Radial => z.conj(),
            Hamiltonian::Mobius { a, b, c } => {
                let r2 = z.norm_sqr();
                let d = 1.0 + r2;
                let n = a * r2 + 2.0 * (b * z.conj()).re + c;
                let n_z = z.conj() * *a + b.conj();
                (n_z * d - z.conj() * n) / (d * d)
            }
            Hamiltonian::Sum(terms) => terms.iter().map(|(w, t)| t.dz(z) * *w).sum(),
            Hamiltonian::Square(inner) => inner.dz(z) * (2.0 * inner.value(z)),
        }
    }
}

/// A registered Hamiltonian bound to the model it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub label: String,
    pub model: ModelKind,
    pub expr: Hamiltonian,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegisteredHamiltonian {
    pub label: &'static str,
    pub model: ModelKind,
    pub summary: &'static str,
    /// Parameter names with their defaults.
    pub params: &'static [(&'static str, f64)],
}

const REGISTRY: &[RegisteredHamiltonian] = &[
    RegisteredHamiltonian {
        label: "bf-linear",
        model: ModelKind::BargmannFock,
        summary: "Re(alpha * conj z); translation flow",
        params: &[("alpha_re", std::f64::consts::SQRT_2), ("alpha_im", 0.0)],
    },
    RegisteredHamiltonian {
        label: "bf-radial",
        model: ModelKind::BargmannFock,
        summary: "|z|^2; rotation flow",
        params: &[],
    },
    RegisteredHamiltonian {
        label: "fs-height",
        model: ModelKind::FubiniStudyCp1,
        summary: "(a|z|^2 + 2Re(b conj z) + c)/(1+|z|^2); defaults to |z|^2/(1+|z|^2)",
        params: &[("a", 1.0), ("b_re", 0.0), ("b_im", 0.0), ("c", 0.0)],
    },
    RegisteredHamiltonian {
        label: "fs-tilted",
        model: ModelKind::FubiniStudyCp1,
        summary: "(1 + x1)/2 for the unit-sphere coordinate x1; rotation about a horizontal axis",
        params: &[],
    },
    RegisteredHamiltonian {
        label: "fs-mixed",
        model: ModelKind::FubiniStudyCp1,
        summary: "h1 + w2*h1^2 + w3*h2 with h1 = |z|^2/(1+|z|^2), h2 = fs-tilted",
        params: &[("w2", 0.3), ("w3", 0.2)],
    },
    RegisteredHamiltonian {
        label: "fs-skew",
        model: ModelKind::FubiniStudyCp1,
        summary: "h1 + w2*h2^2 - w3*h3 with h3 = (1 + x2)/2",
        params: &[("w2", 0.25), ("w3", 0.15)],
    },
];

pub fn registry() -> &'static [RegisteredHamiltonian] {
    REGISTRY
}

fn north_height() -> Hamiltonian {
    Hamiltonian::Mobius {
        a: 1.0,
        b: C64::new(0.0, 0.0),
        c: 0.0,
    }
}

fn x1_height() -> Hamiltonian {
    Hamiltonian::Mobius {
        a: 0.5,
        b: C64::new(0.5, 0.0),
        c: 0.5,
    }
}

fn x2_height() -> Hamiltonian {
    Hamiltonian::Mobius {
        a: 0.5,
        b: C64::new(0.0, 0.5),
        c: 0.5,
    }
}

impl HamiltonianSpec {
    pub fn bf_linear(alpha: C64) -> Self {
        HamiltonianSpec {
            label: "bf-linear".into(),
            model: ModelKind::BargmannFock,
            expr: Hamiltonian::Linear { alpha },
        }
    }

    pub fn bf_radial() -> Self {
        HamiltonianSpec {
            label: "bf-radial".into(),
            model: ModelKind::BargmannFock,
            expr: Hamiltonian::Radial,
        }
    }

    /// Registered Hamiltonian with default parameters.
    pub fn named(label: &str) -> Result<Self> {
        Self::registered(label, &BTreeMap::new())
    }

    /// Registered Hamiltonian; unspecified parameters take their defaults.
    pub fn registered(label: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let entry = REGISTRY
            .iter()
            .find(|r| r.label == label)
            .ok_or_else(|| LabError::UnknownHamiltonian(label.to_string()))?;
        for key in params.keys() {
            if !entry.params.iter().any(|(name, _)| name == key) {
                return Err(LabError::InvalidParameter(format!(
                    "hamiltonian `{label}` has no parameter `{key}`"
                )));
            }
        }
        let p = |name: &str| -> f64 {
            params.get(name).copied().unwrap_or_else(|| {
                entry
                    .params
                    .iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, v)| *v)
                    .unwrap_or(0.0)
            })
        };
        let expr = match label {
            "bf-linear" => {
                let alpha = C64::new(p("alpha_re"), p("alpha_im"));
                if alpha.norm() == 0.0 {
                    return Err(LabError::InvalidParameter("bf-linear needs alpha != 0".into()));
                }
                Hamiltonian::Linear { alpha }
            }
            "bf-radial" => Hamiltonian::Radial,
            "fs-height" => Hamiltonian::Mobius {
                a: p("a"),
                b: C64::new(p("b_re"), p("b_im")),
                c: p("c"),
            },
            "fs-tilted" => x1_height(),
            "fs-mixed" => Hamiltonian::Sum(vec![
                (1.0, north_height()),
                (p("w2"), Hamiltonian::Square(Box::new(north_height()))),
                (p("w3"), x1_height()),
            ]),
            "fs-skew" => Hamiltonian::Sum(vec![
                (1.0, north_height()),
                (p("w2"), Hamiltonian::Square(Box::new(x1_height()))),
                (-p("w3"), x2_height()),
            ]),
            _ => unreachable!("registry and constructor out of sync"),
        };
        Ok(HamiltonianSpec {
            label: label.to_string(),
            model: entry.model,
            expr,
        })
    }

    pub fn value(&self, z: C64) -> f64 {
        self.expr.value(z)
    }

    pub fn dz(&self, z: C64) -> C64 {
        self.expr.dz(z)
    }

    pub fn dzbar(&self, z: C64) -> C64 {
        self.expr.dz(z).conj()
    }
}
