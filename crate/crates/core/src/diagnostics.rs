//! Monitored quantities: energy, vorticity, divergence, stabilization
//! seminorm, error norms and convergence slopes.

use crate::assembly::{self, FormParams};
use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::quadrature::{map_point, TRI6};
use crate::spaces::{FESystem, Field, FieldKind};
use crate::sparse::{norm2, SparseOperator};

/// `½ uᵀ M u`.
pub fn kinetic_energy(system: &FESystem, u: &Field) -> f64 {
    kinetic_energy_with(&assembly::assemble_mass(system), u)
}

pub fn kinetic_energy_with(mass: &SparseOperator, u: &Field) -> f64 {
    0.5 * mass.quadratic(&u.coeffs)
}

/// Elementwise `∂x u_y − ∂y u_x` on each sub-triangle.
pub fn vorticity(system: &FESystem, u: &Field) -> Field {
    let n = system.mesh().n_triangles();
    let w = (0..n)
        .map(|t| {
            let g = system.velocity_gradient(u, t);
            g[1][0] - g[0][1]
        })
        .collect();
    Field::new(FieldKind::ElementScalar, w)
}

pub fn max_vorticity(system: &FESystem, u: &Field) -> f64 {
    vorticity(system, u).max_abs()
}

/// `(‖D u‖₂, ‖∇·u‖_{L²})`: the macro-weak residual and the pointwise
/// divergence.
pub fn divergence_norms(system: &FESystem, u: &Field) -> (f64, f64) {
    divergence_norms_with(system, &assembly::assemble_divergence(system), u)
}

pub fn divergence_norms_with(system: &FESystem, d: &SparseOperator, u: &Field) -> (f64, f64) {
    let weak = norm2(&d.matvec(&u.coeffs));
    let mesh = system.mesh();
    let pointwise = (0..mesh.n_triangles())
        .map(|t| {
            let g = system.velocity_gradient(u, t);
            mesh.area(t) * (g[0][0] + g[1][1]).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    (weak, pointwise)
}

/// `‖∇u‖_{L²}`.
pub fn gradient_norm(system: &FESystem, u: &Field) -> f64 {
    let mesh = system.mesh();
    (0..mesh.n_triangles())
        .map(|t| {
            let g = system.velocity_gradient(u, t);
            mesh.area(t) * (g[0][0].powi(2) + g[0][1].powi(2) + g[1][0].powi(2) + g[1][1].powi(2))
        })
        .sum::<f64>()
        .sqrt()
}

/// `(uᵀ (S_smag(w) + S0(w) + S1) u)^{1/2}`.
pub fn stab_seminorm(system: &FESystem, u: &Field, w: &Field, params: &FormParams) -> Result<f64> {
    let mut total = 0.0;
    if params.gamma > 0.0 {
        total += assembly::assemble_smagorinsky(system, w, params.gamma).quadratic(&u.coeffs);
    }
    if params.gamma0 > 0.0 {
        total += assembly::assemble_jump_penalty(system, w, params.gamma0, params.u_char)?.quadratic(&u.coeffs);
    }
    if params.gamma1 > 0.0 {
        let (_, s1) = assembly::assemble_nitsche(system, params.mu, params.gamma1, params.u_char);
        total += s1.quadratic(&u.coeffs);
    }
    Ok(total.max(0.0).sqrt())
}

/// `(‖u − u_h‖_{L²}, ‖∇(u − u_h)‖_{L²})` with the 6-point rule.
pub fn error_norms(
    system: &FESystem,
    u_h: &Field,
    exact: &dyn Fn(Point, f64) -> [f64; 2],
    exact_grad: &dyn Fn(Point, f64) -> [[f64; 2]; 2],
    t: f64,
) -> (f64, f64) {
    let mesh = system.mesh();
    let (mut l2, mut h1) = (0.0, 0.0);
    for tri in 0..mesh.n_triangles() {
        let corners = mesh.corners(tri);
        let area = mesh.area(tri);
        let g_h = system.velocity_gradient(u_h, tri);
        for q in &TRI6 {
            let p = map_point(&corners, q.bary);
            let uh = system.velocity_at(u_h, tri, q.bary);
            let ue = exact(p, t);
            let ge = exact_grad(p, t);
            let w = q.weight * area;
            l2 += w * ((ue[0] - uh[0]).powi(2) + (ue[1] - uh[1]).powi(2));
            for c in 0..2 {
                for k in 0..2 {
                    h1 += w * (ge[c][k] - g_h[c][k]).powi(2);
                }
            }
        }
    }
    (l2.sqrt(), h1.sqrt())
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_slope(hs: &[f64], errors: &[f64]) -> Result<f64> {
    if hs.len() != errors.len() || hs.len() < 2 {
        return Err(Error::InvalidArgument("need at least two (h, error) pairs".into()));
    }
    if hs.iter().chain(errors).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("mesh sizes and errors must be positive".into()));
    }
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("mesh sizes must be strictly decreasing".into()));
    }
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
