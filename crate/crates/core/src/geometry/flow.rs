use serde::{Deserialize, Serialize};

use super::{check_compatible, gradient_complex, GeometryModel, HamiltonianSpec};
use crate::bfmodel::LiftedPoint;
use crate::error::{LabError, Result};
use crate::C64;

/// Default RK4 step bound.
pub const DEFAULT_DT_MAX: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Hamiltonian,
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowResult {
    pub endpoint: C64,
    pub steps: usize,
    pub field_kind: FieldKind,
}

fn velocity(model: &GeometryModel, h: &HamiltonianSpec, kind: FieldKind, z: C64) -> C64 {
    let grad = gradient_complex(model, h, z);
    match kind {
        FieldKind::Gradient => grad,
        FieldKind::Hamiltonian => -C64::i() * grad,
    }
}

fn step_count(t: f64, dt_max: f64) -> Result<usize> {
    if !(dt_max > 0.0) || !t.is_finite() {
        return Err(LabError::InvalidParameter(format!(
            "flow needs finite t and dt_max > 0 (t = {t}, dt_max = {dt_max})"
        )));
    }
    Ok((t.abs() / dt_max).ceil() as usize)
}

/// Fixed-step classical RK4 for the Hamiltonian or gradient field of `h`.
pub fn flow(
    model: &GeometryModel,
    h: &HamiltonianSpec,
    z0: C64,
    t: f64,
    field_kind: FieldKind,
    dt_max: f64,
) -> Result<FlowResult> {
    check_compatible(model, h)?;
    model.check_chart(z0)?;
    let steps = step_count(t, dt_max)?;
    let mut z = z0;
    if steps > 0 {
        let dt = t / steps as f64;
        let f = |z: C64| velocity(model, h, field_kind, z);
        for step in 0..steps {
            let k1 = f(z);
            let k2 = f(z + k1 * (0.5 * dt));
            let k3 = f(z + k2 * (0.5 * dt));
            let k4 = f(z + k3 * dt);
            z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            if !z.is_finite() {
                return Err(LabError::NonFiniteState { steps: step + 1 });
            }
            model.check_chart(z)?;
        }
    }
    Ok(FlowResult {
        endpoint: z,
        steps,
        field_kind,
    })
}

/// Fiber-angle speed `dθ/dt = ½⟨d^cφ, ξ_H⟩ − H` of the contact lift.
pub fn contact_lift_rate(model: &GeometryModel, h: &HamiltonianSpec, z: C64) -> Result<f64> {
    check_compatible(model, h)?;
    model.check_chart(z)?;
    Ok(lift_rate_unchecked(model, h, z))
}

fn lift_rate_unchecked(model: &GeometryModel, h: &HamiltonianSpec, z: C64) -> f64 {
    let xi = -C64::i() * gradient_complex(model, h, z);
    // ⟨d^cφ, v⟩ = dφ(Jv) = -2 Im(∂φ · v)
    -(model.potential_dz(z) * xi).im - h.value(z)
}

/// Integrates the contact-lifted Hamiltonian flow on the circle bundle.
pub fn lifted_flow(
    model: &GeometryModel,
    h: &HamiltonianSpec,
    start: LiftedPoint,
    t: f64,
    dt_max: f64,
) -> Result<LiftedPoint> {
    check_compatible(model, h)?;
    model.check_chart(start.z)?;
    let steps = step_count(t, dt_max)?;
    let mut z = start.z;
    let mut theta = start.theta;
    if steps > 0 {
        let dt = t / steps as f64;
        let f = |z: C64| {
            (
                velocity(model, h, FieldKind::Hamiltonian, z),
                lift_rate_unchecked(model, h, z),
            )
        };
        for step in 0..steps {
            let (k1, a1) = f(z);
            let (k2, a2) = f(z + k1 * (0.5 * dt));
            let (k3, a3) = f(z + k2 * (0.5 * dt));
            let (k4, a4) = f(z + k3 * dt);
            z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            theta += (a1 + 2.0 * a2 + 2.0 * a3 + a4) * (dt / 6.0);
            if !z.is_finite() || !theta.is_finite() {
                return Err(LabError::NonFiniteState { steps: step + 1 });
            }
            model.check_chart(z)?;
        }
    }
    Ok(LiftedPoint::new(z, theta))
}

/// Newton iteration along `∇H` onto the level set `H = e`.
pub fn project_to_level_set(
    model: &GeometryModel,
    h: &HamiltonianSpec,
    z: C64,
    e: f64,
) -> Result<C64> {
    check_compatible(model, h)?;
    let mut z = z;
    for _ in 0..100 {
        model.check_chart(z)?;
        let residual = h.value(z) - e;
        if residual.abs() <= 1e-13 {
            return Ok(z);
        }
        let grad = gradient_complex(model, h, z);
        let norm2 = model.inner(z, grad, grad);
        if norm2 < 1e-16 {
            return Err(LabError::CriticalPoint { norm: norm2.sqrt() });
        }
        // dH(∇H) = ‖∇H‖²
        z -= grad * (residual / norm2);
    }
    if (h.value(z) - e).abs() <= 1e-10 {
        Ok(z)
    } else {
        Err(LabError::InvalidParameter(format!(
            "level-set projection onto H = {e} did not converge"
        )))
    }
}
