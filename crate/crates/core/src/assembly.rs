//! Bilinear and linear forms of the semi-discrete scheme and of the linear
//! model problem. Operators act on velocity DOFs (`2 * node + c`) unless
//! stated otherwise; constraints are applied later by the solver.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::quadrature::{gauss_segment, TRI3};
use crate::spaces::{FESystem, Field, FieldKind};
use crate::sparse::SparseOperator;

type Triplet = (usize, usize, f64);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormParams {
    pub mu: f64,
    pub gamma: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub u_char: f64,
}

impl Default for FormParams {
    fn default() -> Self {
        Self {
            mu: 0.0,
            gamma: 0.0,
            gamma0: 0.0,
            gamma1: 0.0,
            u_char: 1.0,
        }
    }
}

impl FormParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mu", self.mu),
            ("gamma", self.gamma),
            ("gamma0", self.gamma0),
            ("gamma1", self.gamma1),
            ("u_char", self.u_char),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.gamma0 > 0.0 && self.u_char <= 0.0 {
            return Err(Error::InvalidArgument("gamma0 > 0 needs u_char > 0".into()));
        }
        Ok(())
    }
}

/// Runs `local` over `0..n` in fixed-size chunks (possibly in parallel)
/// and concatenates the chunk outputs in index order, so the triplet
/// sequence does not depend on the thread count.
fn collect_triplets<F>(n: usize, local: F) -> Vec<Triplet>
where
    F: Fn(usize, &mut Vec<Triplet>) + Sync,
{
    const CHUNK: usize = 512;
    let starts: Vec<usize> = (0..n).step_by(CHUNK).collect();
    let parts: Vec<Vec<Triplet>> = starts
        .par_iter()
        .map(|&s| {
            let mut out = Vec::new();
            for i in s..(s + CHUNK).min(n) {
                local(i, &mut out);
            }
            out
        })
        .collect();
    let mut all = Vec::with_capacity(parts.iter().map(Vec::len).sum());
    for p in parts {
        all.extend(p);
    }
    all
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn velocity_op(system: &FESystem, trip: &[Triplet]) -> SparseOperator {
    let n = system.n_velocity();
    SparseOperator::from_triplets(n, n, trip)
}

/// Scalar element matrix `k[i][j]` placed on both components.
fn push_scalar(out: &mut Vec<Triplet>, nodes: [usize; 3], k: [[f64; 3]; 3]) {
    for i in 0..3 {
        for j in 0..3 {
            for c in 0..2 {
                out.push((2 * nodes[i] + c, 2 * nodes[j] + c, k[i][j]));
            }
        }
    }
}

fn stiffness_local(grads: &[Point; 3], area: f64, coef: f64) -> [[f64; 3]; 3] {
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = coef * area * dot(grads[i], grads[j]);
        }
    }
    k
}

pub fn assemble_mass(system: &FESystem) -> SparseOperator {
    let mesh = system.mesh();
    let trip = collect_triplets(mesh.n_triangles(), |t, out| {
        let a = mesh.area(t) / 12.0;
        let mut k = [[a; 3]; 3];
        for (i, row) in k.iter_mut().enumerate() {
            row[i] = 2.0 * a;
        }
        push_scalar(out, system.triangle_nodes(t), k);
    });
    velocity_op(system, &trip)
}

pub fn assemble_viscous(system: &FESystem, mu: f64) -> SparseOperator {
    let mesh = system.mesh();
    let trip = collect_triplets(mesh.n_triangles(), |t, out| {
        let k = stiffness_local(&mesh.barycentric_gradients(t), mesh.area(t), mu);
        push_scalar(out, system.triangle_nodes(t), k);
    });
    velocity_op(system, &trip)
}

/// `C(w)_{ij} = ∫ (w·∇φ_j) φ_i`, non-skew form, 3-point rule.
pub fn assemble_convection(system: &FESystem, w: &Field) -> SparseOperator {
    assert_eq!(w.kind, FieldKind::Velocity);
    let mesh = system.mesh();
    let trip = collect_triplets(mesh.n_triangles(), |t, out| {
        let grads = mesh.barycentric_gradients(t);
        let area = mesh.area(t);
        let mut k = [[0.0; 3]; 3];
        for q in &TRI3 {
            let wq = system.velocity_at(w, t, q.bary);
            for i in 0..3 {
                for j in 0..3 {
                    k[i][j] += q.weight * area * dot(wq, grads[j]) * q.bary[i];
                }
            }
        }
        push_scalar(out, system.triangle_nodes(t), k);
    });
    velocity_op(system, &trip)
}

fn frobenius(g: [[f64; 2]; 2]) -> f64 {
    (g[0][0] * g[0][0] + g[0][1] * g[0][1] + g[1][0] * g[1][0] + g[1][1] * g[1][1]).sqrt()
}

/// Element viscosity `γ |T| |∇w|_F`.
pub fn smagorinsky_viscosity(system: &FESystem, w: &Field, gamma: f64) -> Vec<f64> {
    let mesh = system.mesh();
    (0..mesh.n_triangles())
        .map(|t| gamma * mesh.area(t) * frobenius(system.velocity_gradient(w, t)))
        .collect()
}

/// `Σ_T ν_T (∇φ_j, ∇φ_i)_T` with `ν_T = γ |T| |∇w|_F`.
pub fn assemble_smagorinsky(system: &FESystem, w: &Field, gamma: f64) -> SparseOperator {
    let mesh = system.mesh();
    let nu = smagorinsky_viscosity(system, w, gamma);
    let trip = collect_triplets(mesh.n_triangles(), |t, out| {
        let k = stiffness_local(&mesh.barycentric_gradients(t), mesh.area(t), nu[t]);
        push_scalar(out, system.triangle_nodes(t), k);
    });
    velocity_op(system, &trip)
}

/// Gradient jumps `∇φ|_L − ∇φ|_R` per node touching an interior face.
fn face_jumps(system: &FESystem, left: usize, right: usize) -> Vec<(usize, Point)> {
    let mesh = system.mesh();
    let mut jumps: Vec<(usize, Point)> = Vec::with_capacity(4);
    let mut add = |node: usize, g: Point, s: f64| {
        if let Some(e) = jumps.iter_mut().find(|e| e.0 == node) {
            e.1[0] += s * g[0];
            e.1[1] += s * g[1];
        } else {
            jumps.push((node, [s * g[0], s * g[1]]));
        }
    };
    for (tri, s) in [(left, 1.0), (right, -1.0)] {
        let grads = mesh.barycentric_gradients(tri);
        for (k, node) in system.triangle_nodes(tri).into_iter().enumerate() {
            add(node, grads[k], s);
        }
    }
    jumps
}

/// Value of `w` at segment parameter `s` along face `f`.
fn face_value(system: &FESystem, w: &Field, f: usize, s: f64) -> Point {
    let face = &system.mesh().faces()[f];
    let [a, b] = face.vertices.map(|v| system.node_of_vertex(v));
    [
        (1.0 - s) * w.coeffs[2 * a] + s * w.coeffs[2 * b],
        (1.0 - s) * w.coeffs[2 * a + 1] + s * w.coeffs[2 * b + 1],
    ]
}

/// Tangential projection of the 2D "× n": `e_0 × n = n_y`, `e_1 × n = -n_x`.
fn cross_n(n: Point) -> [f64; 2] {
    [n[1], -n[0]]
}

/// Face term `Σ_F ∫_F ρ_F(x) [[(w·∇)φ_j × n]] [[(w·∇)φ_i × n]]` where the
/// `rho(f, w_at_gauss_points)` returns the weight at each Gauss point.
fn face_penalty<R>(system: &FESystem, w: &Field, n_points: usize, rho: R) -> SparseOperator
where
    R: Fn(usize, &[Point]) -> Vec<f64> + Sync,
{
    let mesh = system.mesh();
    let faces = mesh.faces();
    let gauss = gauss_segment(n_points);
    let trip = collect_triplets(faces.len(), |f, out| {
        let face = &faces[f];
        let Some(right) = face.right else { return };
        let len = mesh.h_per_face()[f];
        let tau = cross_n(mesh.face_normal(f));
        let jumps = face_jumps(system, face.left, right);
        let wq: Vec<Point> = gauss.iter().map(|&(s, _)| face_value(system, w, f, s)).collect();
        let weights = rho(f, &wq);
        for (q, &(_, gw)) in gauss.iter().enumerate() {
            let scale = weights[q] * gw * len;
            if scale == 0.0 {
                // keep the pattern fixed across linearization points
                for &(ni, _) in &jumps {
                    for &(nj, _) in &jumps {
                        for d in 0..2 {
                            for c in 0..2 {
                                out.push((2 * ni + d, 2 * nj + c, 0.0));
                            }
                        }
                    }
                }
                continue;
            }
            for &(ni, gi) in &jumps {
                let ai = dot(wq[q], gi);
                for &(nj, gj) in &jumps {
                    let aj = dot(wq[q], gj);
                    for d in 0..2 {
                        for c in 0..2 {
                            out.push((2 * ni + d, 2 * nj + c, scale * ai * aj * tau[d] * tau[c]));
                        }
                    }
                }
            }
        }
    });
    velocity_op(system, &trip)
}

/// `s0`: `γ0 h_F² (mean_F |w| + U)^{-1} ∫_F [[(w·∇)u × n]] [[(w·∇)v × n]]`
/// over interior and periodic faces; the face mean of `|w|` uses 2-point Gauss.
pub fn assemble_jump_penalty(system: &FESystem, w: &Field, gamma0: f64, u_char: f64) -> Result<SparseOperator> {
    if !(gamma0 >= 0.0) {
        return Err(Error::InvalidArgument(format!("gamma0 must be >= 0, got {gamma0}")));
    }
    if gamma0 > 0.0 && !(u_char > 0.0) {
        return Err(Error::InvalidArgument("gamma0 > 0 needs u_char > 0".into()));
    }
    if gamma0 == 0.0 {
        return Ok(SparseOperator::zeros(system.n_velocity(), system.n_velocity()));
    }
    let h = system.mesh().h_per_face();
    Ok(face_penalty(system, w, 2, |f, wq| {
        let mean = wq.iter().map(|v| dot(*v, *v).sqrt()).sum::<f64>() / wq.len() as f64;
        let weight = gamma0 * h[f] * h[f] / (mean + u_char);
        vec![weight; wq.len()]
    }))
}

/// `(BC_sym, S1)` on `normal_only` boundaries (axis-aligned faces):
/// `BC_sym = −(μ∇u n, t v) − (μ∇v n, t u)`,
/// `S1 = γ1 max(μ/h_F, U) (t u, t v)` with `t = I − n⊗n`.
pub fn assemble_nitsche(system: &FESystem, mu: f64, gamma1: f64, u_char: f64) -> (SparseOperator, SparseOperator) {
    let mesh = system.mesh();
    let faces = system.nitsche_faces();
    let mut bc = Vec::new();
    let mut s1 = Vec::new();
    for &f in faces {
        let face = &mesh.faces()[f];
        let t = face.left;
        let n = mesh.face_normal(f);
        let len = mesh.h_per_face()[f];
        let tp = [[1.0 - n[0] * n[0], -n[0] * n[1]], [-n[1] * n[0], 1.0 - n[1] * n[1]]];
        let grads = mesh.barycentric_gradients(t);
        let tnodes = system.triangle_nodes(t);
        let fnodes = face.vertices.map(|v| system.node_of_vertex(v));
        if mu != 0.0 {
            for (k, &nj) in tnodes.iter().enumerate() {
                let gn = dot(grads[k], n);
                for &ni in &fnodes {
                    for d in 0..2 {
                        for c in 0..2 {
                            let v = -mu * gn * tp[c][d] * len / 2.0;
                            bc.push((2 * ni + d, 2 * nj + c, v));
                            bc.push((2 * nj + c, 2 * ni + d, v));
                        }
                    }
                }
            }
        }
        if gamma1 != 0.0 {
            let pen = gamma1 * (mu / len).max(u_char);
            for (a, &ni) in fnodes.iter().enumerate() {
                for (b, &nj) in fnodes.iter().enumerate() {
                    let m = if a == b { 2.0 } else { 1.0 } * len / 6.0;
                    for d in 0..2 {
                        for c in 0..2 {
                            s1.push((2 * ni + d, 2 * nj + c, pen * tp[d][c] * m));
                        }
                    }
                }
            }
        }
    }
    (velocity_op(system, &bc), velocity_op(system, &s1))
}

/// `D_{M,(j,c)} = ∫_M ∂_c φ_j`, shape `n_pressure × n_velocity`.
pub fn assemble_divergence(system: &FESystem) -> SparseOperator {
    let mesh = system.mesh();
    let parent = mesh.macro_parent();
    let trip = collect_triplets(mesh.n_triangles(), |t, out| {
        let grads = mesh.barycentric_gradients(t);
        let area = mesh.area(t);
        for (k, node) in system.triangle_nodes(t).into_iter().enumerate() {
            for c in 0..2 {
                out.push((parent[t], 2 * node + c, area * grads[k][c]));
            }
        }
    });
    SparseOperator::from_triplets(system.n_pressure(), system.n_velocity(), &trip)
}

/// Load vector `(f(·, t), φ_i)` by the 6-point rule. Constrained entries
/// hold the prescribed boundary values at `t`.
pub fn assemble_rhs(system: &FESystem, f: &dyn Fn(Point, f64) -> [f64; 2], t: f64) -> Field {
    let mut b = crate::spaces::load_vector(system, &|p| f(p, t));
    for (dof, v) in system.constraint_values(t) {
        b[dof] = v;
    }
    Field::new(FieldKind::Velocity, b)
}

/// Operator of the linear model problem:
/// `−(u, β·∇v) + σ(u, v) + γ s(u, v)` with
/// `s = (|T| |∇β|_F ∇u, ∇v) + (h_F² |β|^{-1} [[(β·∇)u × n]], [[(β·∇)v × n]])_F`.
/// The face weight is evaluated pointwise (3-point Gauss) and vanishes where
/// `β = 0`.
pub fn assemble_linear_model(system: &FESystem, beta: &Field, sigma: f64, params: &FormParams) -> Result<SparseOperator> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be > 0, got {sigma}")));
    }
    params.validate()?;
    let conv = assemble_convection(system, beta).transpose();
    let mass = assemble_mass(system);
    let stab = linear_model_stabilization(system, beta, params.gamma);
    Ok(conv.scaled(-1.0).add_scaled(sigma, &mass).add_scaled(1.0, &stab))
}

/// `γ s(·,·)` of the linear model problem.
pub fn linear_model_stabilization(system: &FESystem, beta: &Field, gamma: f64) -> SparseOperator {
    if gamma == 0.0 {
        return SparseOperator::zeros(system.n_velocity(), system.n_velocity());
    }
    let bulk = assemble_smagorinsky(system, beta, gamma);
    let h = system.mesh().h_per_face();
    let faces = face_penalty(system, beta, 3, |f, wq| {
        wq.iter()
            .map(|v| {
                let m = dot(*v, *v).sqrt();
                if m > 0.0 {
                    gamma * h[f] * h[f] / m
                } else {
                    0.0
                }
            })
            .collect()
    });
    bulk.add_scaled(1.0, &faces)
}
