//! Continuous P1 vector velocity on the refined mesh, one pressure constant
//! per macro cell, and the constraint bookkeeping around them.
//!
//! Velocity DOF `2 * node + c` carries component `c` at `node`, where nodes
//! are the vertices left after periodic identification.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::assembly;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, FaceKind, Mesh, Point};
use crate::quadrature::{map_point, TRI6};
use crate::solver::{solve_saddle, SaddleSystem};
use crate::sparse::{norm2, SparseOperator};

/// Vector-valued function of position and time.
pub type VectorFn = Arc<dyn Fn(Point, f64) -> [f64; 2] + Send + Sync>;

pub fn vector_fn(f: impl Fn(Point, f64) -> [f64; 2] + Send + Sync + 'static) -> VectorFn {
    Arc::new(f)
}

#[derive(Clone)]
pub enum BcMode {
    StrongDirichlet(VectorFn),
    /// `u·n = 0` strongly; the tangential part is handled by Nitsche terms.
    NormalOnly,
    Neumann,
    /// Acknowledges a seam built by [`crate::mesh::build_periodicity`].
    Periodic,
}

impl BcMode {
    pub fn no_slip() -> Self {
        BcMode::StrongDirichlet(vector_fn(|_, _| [0.0, 0.0]))
    }

    pub fn name(&self) -> &'static str {
        match self {
            BcMode::StrongDirichlet(_) => "strong_dirichlet",
            BcMode::NormalOnly => "normal_only",
            BcMode::Neumann => "neumann",
            BcMode::Periodic => "periodic",
        }
    }

    fn priority(&self) -> u8 {
        match self {
            BcMode::StrongDirichlet(_) => 3,
            BcMode::NormalOnly => 2,
            BcMode::Neumann => 1,
            BcMode::Periodic => 0,
        }
    }
}

impl fmt::Debug for BcMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub type BcMap = BTreeMap<BoundaryTag, BcMode>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofKind {
    Free,
    /// Value from the strong Dirichlet function of this tag.
    Strong(BoundaryTag),
    /// Normal component on a `normal_only` boundary, fixed to zero.
    NormalZero(BoundaryTag),
}

/// A vertex where boundaries with different modes meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CornerResolution {
    pub vertex: usize,
    pub kept: BoundaryTag,
    pub overridden: BoundaryTag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Velocity,
    Pressure,
    ElementScalar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub kind: FieldKind,
    pub coeffs: Vec<f64>,
}

impl Field {
    pub fn new(kind: FieldKind, coeffs: Vec<f64>) -> Self {
        Self { kind, coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|v| v.is_finite())
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Field {
        assert_eq!(self.kind, other.kind);
        assert_eq!(self.len(), other.len());
        Field {
            kind: self.kind,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug)]
pub struct FESystem {
    mesh: Mesh,
    bc: BcMap,
    node_of_vertex: Vec<usize>,
    node_vertex: Vec<usize>,
    dof_kind: Vec<DofKind>,
    nitsche_faces: Vec<usize>,
    resolutions: Vec<CornerResolution>,
    pressure_modes: Vec<Vec<f64>>,
    pinned: Vec<usize>,
    macro_area: Vec<f64>,
}

fn axis_normal(n: Point) -> Option<usize> {
    const TOL: f64 = 1e-10;
    if n[1].abs() < TOL {
        Some(0)
    } else if n[0].abs() < TOL {
        Some(1)
    } else {
        None
    }
}

/// Builds the DOF maps and constraints.
///
/// Every boundary tag present on the mesh needs a mode. Where boundaries
/// of different modes share a vertex the priority is
/// strong_dirichlet > normal_only > neumann; each such vertex is listed in
/// [`FESystem::corner_resolutions`]. Pressure modes (the constant, and the
/// macro checkerboard on structured grids) are detected against the
/// constrained divergence operator and one pressure DOF is pinned per mode.
pub fn build_system(mesh: Mesh, bc_modes: BcMap) -> Result<FESystem> {
    let nv = mesh.n_vertices();
    let map = mesh.periodic_map().to_vec();
    let mut node_of_master = vec![usize::MAX; nv];
    let mut node_vertex = Vec::new();
    for v in 0..nv {
        if map[v] == v {
            node_of_master[v] = node_vertex.len();
            node_vertex.push(v);
        }
    }
    let node_of_vertex: Vec<usize> = (0..nv).map(|v| node_of_master[map[v]]).collect();
    let n_nodes = node_vertex.len();

    for tag in mesh.boundary_tags() {
        match bc_modes.get(&tag) {
            None => {
                return Err(Error::Boundary(format!("no boundary condition given for tag `{tag}`")))
            }
            Some(BcMode::Periodic) => {
                return Err(Error::Boundary(format!(
                    "tag `{tag}` is declared periodic but its faces are not paired; build periodicity first"
                )))
            }
            _ => {}
        }
    }

    // strongest claim per (node, component)
    let mut claim: Vec<Option<(u8, BoundaryTag)>> = vec![None; 2 * n_nodes];
    let mut touching: Vec<Vec<BoundaryTag>> = vec![Vec::new(); n_nodes];
    let mut nitsche_faces = Vec::new();
    for (f, face) in mesh.boundary_faces() {
        let tag = face.tag().expect("boundary face");
        let mode = &bc_modes[&tag];
        let comps: &[usize] = match mode {
            BcMode::StrongDirichlet(_) => &[0, 1],
            BcMode::NormalOnly => {
                nitsche_faces.push(f);
                match axis_normal(mesh.face_normal(f)) {
                    Some(0) => &[0],
                    Some(_) => &[1],
                    None => {
                        return Err(Error::Boundary(format!(
                            "normal_only on tag `{tag}` needs axis-aligned faces (face {f} is not)"
                        )))
                    }
                }
            }
            _ => &[],
        };
        let p = mode.priority();
        for &v in &face.vertices {
            let node = node_of_vertex[v];
            if !touching[node].contains(&tag) {
                touching[node].push(tag);
            }
            for &c in comps {
                let slot = &mut claim[2 * node + c];
                let better = match *slot {
                    None => true,
                    Some((q, t)) => p > q || (p == q && tag < t),
                };
                if better {
                    *slot = Some((p, tag));
                }
            }
        }
    }

    let dof_kind: Vec<DofKind> = claim
        .iter()
        .map(|c| match c {
            None => DofKind::Free,
            Some((3, tag)) => DofKind::Strong(*tag),
            Some((_, tag)) => DofKind::NormalZero(*tag),
        })
        .collect();

    let mut resolutions = Vec::new();
    for (node, tags) in touching.iter().enumerate() {
        if tags.len() < 2 {
            continue;
        }
        let priority = |t: &BoundaryTag| bc_modes[t].priority();
        let best = *tags
            .iter()
            .max_by(|a, b| priority(a).cmp(&priority(b)).then(b.cmp(a)))
            .unwrap();
        for &t in tags {
            if priority(&t) < priority(&best) {
                resolutions.push(CornerResolution {
                    vertex: node_vertex[node],
                    kept: best,
                    overridden: t,
                });
            }
        }
    }

    let mut macro_area = vec![0.0; mesh.n_macro()];
    for t in 0..mesh.n_triangles() {
        macro_area[mesh.macro_parent()[t]] += mesh.area(t);
    }

    let mut system = FESystem {
        mesh,
        bc: bc_modes,
        node_of_vertex,
        node_vertex,
        dof_kind,
        nitsche_faces,
        resolutions,
        pressure_modes: Vec::new(),
        pinned: Vec::new(),
        macro_area,
    };
    system.detect_pressure_modes();
    Ok(system)
}

impl FESystem {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn bc_modes(&self) -> &BcMap {
        &self.bc
    }

    pub fn n_nodes(&self) -> usize {
        self.node_vertex.len()
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.n_nodes()
    }

    pub fn n_pressure(&self) -> usize {
        self.mesh.n_macro()
    }

    pub fn n_free_velocity(&self) -> usize {
        self.dof_kind.iter().filter(|k| **k == DofKind::Free).count()
    }

    pub fn node_of_vertex(&self, v: usize) -> usize {
        self.node_of_vertex[v]
    }

    /// Representative (master) vertex of a node.
    pub fn node_vertex(&self, node: usize) -> usize {
        self.node_vertex[node]
    }

    pub fn triangle_nodes(&self, t: usize) -> [usize; 3] {
        self.mesh.triangles()[t].map(|v| self.node_of_vertex[v])
    }

    pub fn dof_kind(&self, dof: usize) -> DofKind {
        self.dof_kind[dof]
    }

    pub fn is_free(&self, dof: usize) -> bool {
        self.dof_kind[dof] == DofKind::Free
    }

    pub fn free_mask(&self) -> Vec<bool> {
        self.dof_kind.iter().map(|k| *k == DofKind::Free).collect()
    }

    pub fn has_neumann(&self) -> bool {
        self.mesh
            .boundary_tags()
            .iter()
            .any(|t| matches!(self.bc[t], BcMode::Neumann))
    }

    /// Boundary faces in `normal_only` mode.
    pub fn nitsche_faces(&self) -> &[usize] {
        &self.nitsche_faces
    }

    pub fn corner_resolutions(&self) -> &[CornerResolution] {
        &self.resolutions
    }

    /// Detected pressure null modes (per macro values).
    pub fn pressure_modes(&self) -> &[Vec<f64>] {
        &self.pressure_modes
    }

    /// Pressure DOFs fixed to zero, one per detected mode.
    pub fn pinned_pressure(&self) -> &[usize] {
        &self.pinned
    }

    pub fn macro_area(&self, m: usize) -> f64 {
        self.macro_area[m]
    }

    pub fn zero_velocity(&self) -> Field {
        Field::new(FieldKind::Velocity, vec![0.0; self.n_velocity()])
    }

    pub fn zero_pressure(&self) -> Field {
        Field::new(FieldKind::Pressure, vec![0.0; self.n_pressure()])
    }

    /// Prescribed values of all constrained velocity DOFs at time `t`.
    pub fn constraint_values(&self, t: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (dof, kind) in self.dof_kind.iter().enumerate() {
            match kind {
                DofKind::Free => {}
                DofKind::NormalZero(_) => out.push((dof, 0.0)),
                DofKind::Strong(tag) => {
                    let BcMode::StrongDirichlet(g) = &self.bc[tag] else {
                        unreachable!("strong dof without strong mode")
                    };
                    let p = self.mesh.vertices()[self.node_vertex[dof / 2]];
                    out.push((dof, g(p, t)[dof % 2]));
                }
            }
        }
        out
    }

    pub fn apply_constraints(&self, u: &mut Field, t: f64) {
        assert_eq!(u.kind, FieldKind::Velocity);
        for (dof, v) in self.constraint_values(t) {
            u.coeffs[dof] = v;
        }
    }

    /// Velocity at barycentric point `bary` of triangle `t`.
    pub fn velocity_at(&self, u: &Field, t: usize, bary: [f64; 3]) -> [f64; 2] {
        let nodes = self.triangle_nodes(t);
        let mut out = [0.0; 2];
        for k in 0..3 {
            out[0] += bary[k] * u.coeffs[2 * nodes[k]];
            out[1] += bary[k] * u.coeffs[2 * nodes[k] + 1];
        }
        out
    }

    /// `g[c][k] = ∂_k u_c` on triangle `t`.
    pub fn velocity_gradient(&self, u: &Field, t: usize) -> [[f64; 2]; 2] {
        let nodes = self.triangle_nodes(t);
        let grads = self.mesh.barycentric_gradients(t);
        let mut g = [[0.0; 2]; 2];
        for k in 0..3 {
            for c in 0..2 {
                let val = u.coeffs[2 * nodes[k] + c];
                g[c][0] += val * grads[k][0];
                g[c][1] += val * grads[k][1];
            }
        }
        g
    }

    /// Removes the detected pressure modes (area-weighted orthogonal
    /// projection). For the constant mode this is a mean shift.
    pub fn filter_pressure(&self, p: &mut Field) {
        let w = &self.macro_area;
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(w).map(|((x, y), m)| x * y * m).sum() };
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for mode in &self.pressure_modes {
            let mut v = mode.clone();
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let n = dot(&v, &v).sqrt();
            if n > 0.0 {
                v.iter_mut().for_each(|x| *x /= n);
                basis.push(v);
            }
        }
        for b in &basis {
            let c = dot(&p.coeffs, b);
            p.coeffs.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }

    fn detect_pressure_modes(&mut self) {
        let n_macro = self.mesh.n_macro();
        let mut candidates = vec![vec![1.0; n_macro]];
        if let Some(g) = self.mesh.macro_grid() {
            candidates.push(
                (0..n_macro)
                    .map(|m| if (m % g.nx + m / g.nx) % 2 == 0 { 1.0 } else { -1.0 })
                    .collect(),
            );
        }
        let d = assembly::assemble_divergence(self);
        let dt = d.transpose();
        let free = self.free_mask();
        for q in candidates {
            let mut worst = 0.0_f64;
            let mut scale = 0.0_f64;
            for (dof, is_free) in free.iter().enumerate() {
                if !is_free {
                    continue;
                }
                let mut r = 0.0;
                let mut s = 0.0;
                for (m, v) in dt.row(dof) {
                    r += v * q[m];
                    s += (v * q[m]).abs();
                }
                worst = worst.max(r.abs());
                scale = scale.max(s);
            }
            if worst <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
                self.pressure_modes.push(q);
            }
        }
        // greedy pins: add macro m while it raises the rank of the modes' columns
        let k = self.pressure_modes.len();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for m in 0..n_macro {
            if self.pinned.len() == k {
                break;
            }
            let mut v: Vec<f64> = self.pressure_modes.iter().map(|q| q[m]).collect();
            for r in &rows {
                let piv = r.iter().position(|x| x.abs() > 1e-12).unwrap();
                let c = v[piv] / r[piv];
                v.iter_mut().zip(r).for_each(|(x, y)| *x -= c * y);
            }
            if v.iter().any(|x| x.abs() > 1e-12) {
                rows.push(v);
                self.pinned.push(m);
            }
        }
    }

    /// Restricts `a` to the free DOFs (constrained rows become identity,
    /// constrained columns are lifted into `rhs`), then solves.
    pub(crate) fn solve_constrained(&self, a: &SparseOperator, rhs: &[f64], t: f64) -> Result<Vec<f64>> {
        let n = self.n_velocity();
        let values = self.constraint_values(t);
        let mut fixed = vec![None; n];
        for &(dof, v) in &values {
            fixed[dof] = Some(v);
        }
        let mut b = rhs.to_vec();
        let mut trip = Vec::with_capacity(a.nnz());
        for i in 0..n {
            if let Some(v) = fixed[i] {
                trip.push((i, i, 1.0));
                b[i] = v;
                continue;
            }
            for (j, val) in a.row(i) {
                match fixed[j] {
                    Some(g) => b[i] -= val * g,
                    None => trip.push((i, j, val)),
                }
            }
        }
        let reduced = SparseOperator::from_triplets(n, n, &trip);
        crate::sparse::solve_sparse(&reduced, &b)
    }
}

/// Vertex-value interpolant, then constraints applied at time `t`.
pub fn interpolate(system: &FESystem, f: impl Fn(Point, f64) -> [f64; 2], t: f64) -> Field {
    let mut u = system.zero_velocity();
    for node in 0..system.n_nodes() {
        let p = system.mesh.vertices()[system.node_vertex[node]];
        let v = f(p, t);
        u.coeffs[2 * node] = v[0];
        u.coeffs[2 * node + 1] = v[1];
    }
    system.apply_constraints(&mut u, t);
    u
}

/// `∫ f·φ_i` with the 6-point rule.
pub(crate) fn load_vector(system: &FESystem, f: &dyn Fn(Point) -> [f64; 2]) -> Vec<f64> {
    let mesh = system.mesh();
    let mut b = vec![0.0; system.n_velocity()];
    for t in 0..mesh.n_triangles() {
        let corners = mesh.corners(t);
        let area = mesh.area(t);
        let nodes = system.triangle_nodes(t);
        for q in &TRI6 {
            let val = f(map_point(&corners, q.bary));
            for k in 0..3 {
                let w = q.weight * area * q.bary[k];
                b[2 * nodes[k]] += w * val[0];
                b[2 * nodes[k] + 1] += w * val[1];
            }
        }
    }
    b
}

/// L2 projection onto the velocity space with constraints at `t = 0`.
pub fn l2_project(system: &FESystem, f: impl Fn(Point) -> [f64; 2]) -> Result<Field> {
    l2_project_at(system, f, 0.0)
}

pub fn l2_project_at(system: &FESystem, f: impl Fn(Point) -> [f64; 2], t: f64) -> Result<Field> {
    let m = assembly::assemble_mass(system);
    let b = load_vector(system, &f);
    let x = system.solve_constrained(&m, &b, t)?;
    // residual of the projection equations on free rows
    let mx = m.matvec(&x);
    let free = system.free_mask();
    let r: Vec<f64> = (0..b.len()).map(|i| if free[i] { b[i] - mx[i] } else { 0.0 }).collect();
    let bn: Vec<f64> = (0..b.len()).map(|i| if free[i] { b[i] } else { 0.0 }).collect();
    let (rn, bnorm) = (norm2(&r), norm2(&bn));
    if bnorm > 0.0 && rn > 1e-10 * bnorm {
        return Err(Error::Residual {
            residual: rn / bnorm,
            limit: 1e-10,
        });
    }
    Ok(Field::new(FieldKind::Velocity, x))
}

/// L2 projection onto the weakly divergence-free subspace: the mass /
/// divergence saddle problem with constraints at time `t`.
pub fn project_divergence_free(system: &FESystem, f: impl Fn(Point) -> [f64; 2], t: f64) -> Result<Field> {
    let mass = assembly::assemble_mass(system);
    let mut rhs_u = load_vector(system, &f);
    for (dof, v) in system.constraint_values(t) {
        rhs_u[dof] = v;
    }
    let sys = SaddleSystem {
        a: mass,
        d: assembly::assemble_divergence(system),
        rhs_u,
        rhs_p: vec![0.0; system.n_pressure()],
    };
    let (u, _) = solve_saddle(system, &sys)?;
    Ok(u)
}

/// Convenience: BC map with the same mode on every listed tag.
pub fn uniform_bc(tags: &[BoundaryTag], mode: BcMode) -> BcMap {
    tags.iter().map(|&t| (t, mode.clone())).collect()
}

/// True if every face of the mesh is interior or a periodic seam.
pub fn fully_periodic(mesh: &Mesh) -> bool {
    mesh.faces().iter().all(|f| !matches!(f.kind, FaceKind::Boundary(_)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_periodicity, build_union_jack, Axis, Rect};

    fn periodic_unit(n: usize) -> FESystem {
        let m = build_union_jack(n, n, Rect::unit()).unwrap();
        let m = build_periodicity(m, &[Axis::X, Axis::Y]).unwrap();
        build_system(m, BcMap::new()).unwrap()
    }

    #[test]
    fn one_cell_all_periodic() {
        let s = periodic_unit(1);
        // corners collapse to one node, plus the center
        assert_eq!(s.n_nodes(), 2);
        assert_eq!(s.n_velocity(), 4);
        assert_eq!(s.n_pressure(), 1);
        assert_eq!(s.pinned_pressure(), &[0]);
        assert_eq!(s.n_free_velocity(), 4);
    }

    #[test]
    fn one_cell_no_slip_leaves_center_free() {
        let m = build_union_jack(1, 1, Rect::unit()).unwrap();
        let s = build_system(m, uniform_bc(&[BoundaryTag::Wall], BcMode::no_slip())).unwrap();
        assert_eq!(s.n_free_velocity(), 2);
        assert!(s.is_free(8) && s.is_free(9));
    }

    #[test]
    fn outflow_means_no_pin_and_corners_are_reported() {
        let m = build_union_jack(4, 2, Rect::new(0.0, 2.0, 0.0, 1.0)).unwrap();
        let m = m.retag_boundary(|mid, _| {
            if mid[0] < 1e-12 {
                BoundaryTag::Inflow
            } else if mid[0] > 2.0 - 1e-12 {
                BoundaryTag::Outflow
            } else {
                BoundaryTag::Wall
            }
        });
        let mut bc = BcMap::new();
        bc.insert(BoundaryTag::Wall, BcMode::no_slip());
        bc.insert(BoundaryTag::Inflow, BcMode::StrongDirichlet(vector_fn(|p, _| [p[1] * (1.0 - p[1]), 0.0])));
        bc.insert(BoundaryTag::Outflow, BcMode::Neumann);
        let s = build_system(m, bc).unwrap();
        assert!(s.has_neumann());
        assert!(s.pinned_pressure().is_empty());
        // both outflow corners: wall beats neumann
        let over: Vec<_> = s
            .corner_resolutions()
            .iter()
            .filter(|r| r.overridden == BoundaryTag::Outflow)
            .collect();
        assert_eq!(over.len(), 2);
        assert!(over.iter().all(|r| r.kept == BoundaryTag::Wall));
    }

    #[test]
    fn checkerboard_mode_is_detected_on_walls() {
        let m = build_union_jack(4, 4, Rect::unit()).unwrap();
        let s = build_system(m, uniform_bc(&[BoundaryTag::Wall], BcMode::no_slip())).unwrap();
        assert_eq!(s.pressure_modes().len(), 2);
        assert_eq!(s.pinned_pressure(), &[0, 1]);
        let mut p = Field::new(FieldKind::Pressure, s.pressure_modes()[1].iter().map(|x| 3.0 * x + 2.0).collect());
        s.filter_pressure(&mut p);
        assert!(p.max_abs() < 1e-14);
    }

    #[test]
    fn normal_only_needs_axis_aligned_faces() {
        let m = build_union_jack(2, 2, Rect::unit()).unwrap();
        let s = build_system(m, uniform_bc(&[BoundaryTag::Wall], BcMode::NormalOnly)).unwrap();
        // bottom edge interior vertex (1/2, 0): only u_y fixed
        let node = s.node_of_vertex(1);
        assert!(s.is_free(2 * node));
        assert!(!s.is_free(2 * node + 1));
        // corner (0,0): both components fixed
        assert!(!s.is_free(0) && !s.is_free(1));
        assert_eq!(s.nitsche_faces().len(), 8);
    }

    #[test]
    fn unknown_tag_is_rejected() {
        let m = build_union_jack(1, 1, Rect::unit()).unwrap();
        assert!(build_system(m.clone(), BcMap::new()).is_err());
        assert!(build_system(m, uniform_bc(&[BoundaryTag::Wall], BcMode::Periodic)).is_err());
    }

    #[test]
    fn interpolation_reproduces_affine_fields() {
        let m = build_union_jack(3, 2, Rect::new(0.0, 1.5, 0.0, 1.0)).unwrap();
        let s = build_system(m, uniform_bc(&[BoundaryTag::Wall], BcMode::Neumann)).unwrap();
        let f = |p: Point, _t: f64| [1.0 + 2.0 * p[0] - p[1], 0.5 * p[1]];
        let u = interpolate(&s, f, 0.0);
        for t in 0..s.mesh().n_triangles() {
            let bary = [0.2, 0.3, 0.5];
            let x = map_point(&s.mesh().corners(t), bary);
            let v = s.velocity_at(&u, t, bary);
            let e = f(x, 0.0);
            assert!((v[0] - e[0]).abs() < 1e-14 && (v[1] - e[1]).abs() < 1e-14);
        }
        assert!(interpolate(&s, |_, _| [0.0, 0.0], 0.0).max_abs() == 0.0);
    }

    #[test]
    fn projection_is_idempotent_and_keeps_constants() {
        let s = periodic_unit(4);
        let c = l2_project(&s, |_| [0.3, -1.2]).unwrap();
        for n in 0..s.n_nodes() {
            assert!((c.coeffs[2 * n] - 0.3).abs() < 1e-13);
            assert!((c.coeffs[2 * n + 1] + 1.2).abs() < 1e-13);
        }
        let u = l2_project(&s, |p| [p[0].sin(), p[1].cos()]).unwrap();
        let again = l2_project(&s, |p| {
            // evaluate the FE function at p by locating its triangle
            let mesh = s.mesh();
            for t in 0..mesh.n_triangles() {
                let [a, b, c] = mesh.corners(t);
                let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
                let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
                let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
                let l0 = 1.0 - l1 - l2;
                if l0 > -1e-12 && l1 > -1e-12 && l2 > -1e-12 {
                    return s.velocity_at(&u, t, [l0, l1, l2]);
                }
            }
            panic!("point outside mesh");
        })
        .unwrap();
        let diff = u.combine(1.0, &again, -1.0).max_abs();
        assert!(diff < 1e-11, "{diff}");
        assert_eq!(l2_project(&s, |_| [0.0, 0.0]).unwrap().max_abs(), 0.0);
    }
}
