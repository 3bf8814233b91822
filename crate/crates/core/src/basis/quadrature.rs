use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::geometry::{GeometryModel, ModelKind};
use crate::C64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor rule: Gauss–Legendre in a radial variable times the uniform
/// trapezoid rule in angle. The volume form is `dVol = dv dθ` where
/// `v = r²/(1+r²)` on the sphere and `v = r²` on the plane.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub model: ModelKind,
    pub radii: Vec<f64>,
    /// Radial weights in `v`, angular measure excluded.
    pub radial_weights: Vec<f64>,
    pub n_angular: usize,
    pub exactness_note: String,
}

impl QuadratureRule {
    pub fn angle(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / self.n_angular as f64
    }

    pub fn angular_weight(&self) -> f64 {
        2.0 * PI / self.n_angular as f64
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.n_angular
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All chart nodes, radius-major.
    pub fn nodes(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.len());
        for &r in &self.radii {
            for m in 0..self.n_angular {
                out.push(C64::from_polar(r, self.angle(m)));
            }
        }
        out
    }

    /// Weights aligned with [`QuadratureRule::nodes`].
    pub fn weights(&self) -> Vec<f64> {
        let wa = self.angular_weight();
        let mut out = Vec::with_capacity(self.len());
        for &w in &self.radial_weights {
            out.extend(std::iter::repeat_n(w * wa, self.n_angular));
        }
        out
    }

    /// `∫ f dVol`.
    pub fn integrate(&self, mut f: impl FnMut(C64) -> f64) -> f64 {
        let wa = self.angular_weight();
        let mut total = 0.0;
        for (&r, &w) in self.radii.iter().zip(&self.radial_weights) {
            let mut ring = 0.0;
            for m in 0..self.n_angular {
                ring += f(C64::from_polar(r, self.angle(m)));
            }
            total += w * wa * ring;
        }
        total
    }

    /// `Σ_θ w_θ e^{imθ}` for the angular rule.
    pub fn angular_moment(&self, m: i64) -> C64 {
        let wa = self.angular_weight();
        (0..self.n_angular)
            .map(|n| C64::from_polar(wa, m as f64 * self.angle(n)))
            .sum()
    }
}

/// Default radial order on the sphere: the Bergman integrands are
/// polynomials of degree about `k` in `v`.
pub fn default_fs_radial(k: usize) -> usize {
    32.max(k / 2 + 16)
}

pub fn default_angular(k: usize, top_degree: usize) -> usize {
    (2 * k + 8).max(2 * top_degree + 2)
}

/// Right end of the truncated plane: beyond it `s^N e^{-ks}` is negligible.
pub fn bf_radial_extent(k: usize, top_degree: usize) -> f64 {
    let n = (top_degree + 1) as f64;
    (n + 12.0 * n.sqrt() + 40.0) / k as f64
}

const BF_PANEL_ORDER: usize = 32;

pub fn default_bf_radial(k: usize, top_degree: usize) -> usize {
    let extent = bf_radial_extent(k, top_degree) * k as f64;
    BF_PANEL_ORDER * ((extent / 20.0).ceil() as usize).max(1)
}

/// Builds the tensor rule for sections of `L^k`.
///
/// On the plane the radial extent follows the highest angular degree the rule
/// resolves, `(n_angular − 2)/2`, and `n_radial` nodes are split into
/// 32-point panels.
pub fn build_quadrature(
    model: &GeometryModel,
    k: usize,
    n_radial: usize,
    n_angular: usize,
) -> Result<QuadratureRule> {
    if k == 0 {
        return Err(LabError::InvalidResolution("tensor power k must be positive".into()));
    }
    if n_radial < 32 {
        return Err(LabError::InvalidResolution(format!(
            "n_radial = {n_radial} is below the minimum of 32"
        )));
    }
    if n_angular < 2 * k + 2 {
        return Err(LabError::InvalidResolution(format!(
            "n_angular = {n_angular} is below 2k+2 = {}",
            2 * k + 2
        )));
    }
    let (x, w) = gauss_legendre_panels(model.kind, k, n_radial, n_angular);
    let (radii, radial_weights, note) = match model.kind {
        ModelKind::FubiniStudyCp1 => {
            let radii = x.iter().map(|&v| (v / (1.0 - v)).sqrt()).collect();
            let note = format!(
                "{n_radial}-point Gauss-Legendre in r^2/(1+r^2) on [0,1), exact to degree {}; {n_angular}-point trapezoid in angle",
                2 * n_radial - 1
            );
            (radii, w, note)
        }
        ModelKind::BargmannFock => {
            let extent = bf_radial_extent(k, (n_angular - 2) / 2);
            let radii = x.iter().map(|&s| s.sqrt()).collect();
            let note = format!(
                "{n_radial} Gauss-Legendre nodes in r^2 on [0,{extent:.6}] in 32-point panels; {n_angular}-point trapezoid in angle"
            );
            (radii, w, note)
        }
    };
    Ok(QuadratureRule {
        model: model.kind,
        radii,
        radial_weights,
        n_angular,
        exactness_note: note,
    })
}

fn gauss_legendre_panels(
    kind: ModelKind,
    k: usize,
    n_radial: usize,
    n_angular: usize,
) -> (Vec<f64>, Vec<f64>) {
    let (a, b, panels) = match kind {
        ModelKind::FubiniStudyCp1 => (0.0, 1.0, 1),
        ModelKind::BargmannFock => (
            0.0,
            bf_radial_extent(k, (n_angular - 2) / 2),
            (n_radial / BF_PANEL_ORDER).max(1),
        ),
    };
    let order = n_radial / panels;
    let (t, tw) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut x = Vec::with_capacity(order * panels);
    let mut w = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        for (ti, wi) in t.iter().zip(&tw) {
            x.push(lo + 0.5 * width * (ti + 1.0));
            w.push(0.5 * width * wi);
        }
    }
    (x, w)
}
