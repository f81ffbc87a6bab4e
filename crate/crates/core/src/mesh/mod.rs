//! Triangulations with macro structure, face connectivity, boundary tags and
//! periodic identification.

mod generate;
mod io;
mod periodic;
mod refine;
mod structured;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use generate::{channel_with_cylinder, CylinderChannel};
pub use io::{export_mesh, import_mesh};
pub use periodic::build_periodicity;
pub use refine::{macro_refine, macro_refine_with, TriangleSplit};
pub use structured::{build_union_jack, Rect};

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Wall,
    Inflow,
    Outflow,
    Cylinder,
    PeriodicX,
    PeriodicY,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 6] = [
        BoundaryTag::Wall,
        BoundaryTag::Inflow,
        BoundaryTag::Outflow,
        BoundaryTag::Cylinder,
        BoundaryTag::PeriodicX,
        BoundaryTag::PeriodicY,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Wall => "wall",
            BoundaryTag::Inflow => "inflow",
            BoundaryTag::Outflow => "outflow",
            BoundaryTag::Cylinder => "cylinder",
            BoundaryTag::PeriodicX => "periodic_x",
            BoundaryTag::PeriodicY => "periodic_y",
        }
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let lower = s.to_ascii_lowercase();
        if let Ok(code) = lower.parse::<usize>() {
            return BoundaryTag::ALL
                .get(code)
                .copied()
                .ok_or_else(|| format!("unknown boundary tag code {code}"));
        }
        BoundaryTag::ALL
            .iter()
            .copied()
            .find(|t| t.name() == lower)
            .ok_or_else(|| format!("unknown boundary tag `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceKind {
    Interior,
    Boundary(BoundaryTag),
    /// Interior face across a periodic seam. `right` lies on the opposite side.
    Periodic(Axis),
}

/// An edge of the triangulation.
///
/// `vertices` run counter-clockwise along the `left` triangle, so the normal
/// `(dy, -dx) / len` points out of `left`. For periodic faces the vertices
/// belong to the `left` copy of the seam.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
    pub kind: FaceKind,
}

impl Face {
    pub fn tag(&self) -> Option<BoundaryTag> {
        match self.kind {
            FaceKind::Boundary(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self.kind, FaceKind::Boundary(_))
    }
}

/// Structured macro layout: macro `(i, j)` has index `j * nx + i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MacroGrid {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    macro_parent: Vec<usize>,
    n_macro: usize,
    faces: Vec<Face>,
    h_per_face: Vec<f64>,
    periodic_map: Vec<usize>,
    periodic_axes: Vec<Axis>,
    macro_grid: Option<MacroGrid>,
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

impl Mesh {
    /// Builds connectivity from raw vertices/triangles. Boundary faces are
    /// tagged by `tag_of(midpoint, outward_normal)`.
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        macro_parent: Vec<usize>,
        tag_of: impl Fn(Point, Point) -> Result<BoundaryTag>,
    ) -> Result<Mesh> {
        Self::from_parts_by_edge(vertices, triangles, macro_parent, |_, mid, n| tag_of(mid, n))
    }

    /// Like [`Mesh::from_parts`], but the tag callback also sees the edge's vertex indices.
    pub(crate) fn from_parts_by_edge(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        macro_parent: Vec<usize>,
        tag_of: impl Fn([usize; 2], Point, Point) -> Result<BoundaryTag>,
    ) -> Result<Mesh> {
        let n_macro = validate_macro_parent(&macro_parent, triangles.len())?;
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a vertex out of range"
                )));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::InvertedTriangle { index: t, area });
            }
        }
        let mut faces = build_faces(&triangles)?;
        for face in faces.iter_mut() {
            if face.right.is_none() {
                let a = vertices[face.vertices[0]];
                let b = vertices[face.vertices[1]];
                let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                let len = dist(a, b);
                let normal = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
                face.kind = FaceKind::Boundary(tag_of(face.vertices, mid, normal)?);
            }
        }
        let n_vertices = vertices.len();
        let mut mesh = Mesh {
            vertices,
            triangles,
            macro_parent,
            n_macro,
            faces,
            h_per_face: Vec::new(),
            periodic_map: (0..n_vertices).collect(),
            periodic_axes: Vec::new(),
            macro_grid: None,
        };
        mesh.refresh_face_lengths();
        Ok(mesh)
    }

    pub(crate) fn refresh_face_lengths(&mut self) {
        self.h_per_face = self
            .faces
            .iter()
            .map(|f| dist(self.vertices[f.vertices[0]], self.vertices[f.vertices[1]]))
            .collect();
    }

    pub(crate) fn set_macro_grid(&mut self, grid: Option<MacroGrid>) {
        self.macro_grid = grid;
    }

    pub(crate) fn set_periodic(&mut self, map: Vec<usize>, axes: Vec<Axis>, faces: Vec<Face>) {
        self.periodic_map = map;
        self.periodic_axes = axes;
        self.faces = faces;
        self.refresh_face_lengths();
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn macro_parent(&self) -> &[usize] {
        &self.macro_parent
    }

    pub fn n_macro(&self) -> usize {
        self.n_macro
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn h_per_face(&self) -> &[f64] {
        &self.h_per_face
    }

    /// Master vertex of each vertex; the identity for non-periodic vertices.
    pub fn periodic_map(&self) -> &[usize] {
        &self.periodic_map
    }

    pub fn periodic_axes(&self) -> &[Axis] {
        &self.periodic_axes
    }

    pub fn macro_grid(&self) -> Option<MacroGrid> {
        self.macro_grid
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        signed_area(a, b, c)
    }

    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    /// Global mesh size: the largest triangle diameter.
    pub fn h(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| self.diameter(t))
            .fold(0.0, f64::max)
    }

    /// `max h_T / min h_T`.
    pub fn quasi_uniformity(&self) -> f64 {
        let (lo, hi) = (0..self.n_triangles())
            .map(|t| self.diameter(t))
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
        hi / lo
    }

    /// `(xmin, xmax, ymin, ymax)`.
    pub fn bounding_box(&self) -> [f64; 4] {
        let mut bb = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for p in &self.vertices {
            bb[0] = bb[0].min(p[0]);
            bb[1] = bb[1].max(p[0]);
            bb[2] = bb[2].min(p[1]);
            bb[3] = bb[3].max(p[1]);
        }
        bb
    }

    /// Unit normal of face `f` pointing out of its left triangle.
    pub fn face_normal(&self, f: usize) -> Point {
        let face = &self.faces[f];
        let a = self.vertices[face.vertices[0]];
        let b = self.vertices[face.vertices[1]];
        let len = self.h_per_face[f];
        [(b[1] - a[1]) / len, -(b[0] - a[0]) / len]
    }

    pub fn face_endpoints(&self, f: usize) -> [Point; 2] {
        let face = &self.faces[f];
        [self.vertices[face.vertices[0]], self.vertices[face.vertices[1]]]
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = (usize, &Face)> {
        self.faces.iter().enumerate().filter(|(_, f)| f.is_boundary())
    }

    /// Tags present on the boundary, sorted.
    pub fn boundary_tags(&self) -> Vec<BoundaryTag> {
        let mut tags: Vec<_> = self.faces.iter().filter_map(|f| f.tag()).collect();
        tags.sort();
        tags.dedup();
        tags
    }

    /// Retags every boundary face by `tag_of(midpoint, outward_normal)`.
    pub fn retag_boundary(mut self, tag_of: impl Fn(Point, Point) -> BoundaryTag) -> Mesh {
        for f in 0..self.faces.len() {
            if self.faces[f].is_boundary() {
                let [a, b] = self.face_endpoints(f);
                let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                let n = self.face_normal(f);
                self.faces[f].kind = FaceKind::Boundary(tag_of(mid, n));
            }
        }
        self
    }

    /// Gradients of the three barycentric coordinates of triangle `t`.
    pub fn barycentric_gradients(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.corners(t);
        let two_area = 2.0 * signed_area(a, b, c);
        [
            [(b[1] - c[1]) / two_area, (c[0] - b[0]) / two_area],
            [(c[1] - a[1]) / two_area, (a[0] - c[0]) / two_area],
            [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area],
        ]
    }
}

fn validate_macro_parent(macro_parent: &[usize], n_tri: usize) -> Result<usize> {
    if macro_parent.len() != n_tri {
        return Err(Error::InvalidMesh(format!(
            "macro_parent has {} entries for {} triangles",
            macro_parent.len(),
            n_tri
        )));
    }
    let n_macro = macro_parent.iter().map(|&m| m + 1).max().unwrap_or(0);
    let mut seen = vec![false; n_macro];
    for &m in macro_parent {
        seen[m] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidMesh("macro indices are not contiguous".into()));
    }
    Ok(n_macro)
}

/// Faces in first-encounter order over triangles and local edges.
fn build_faces(triangles: &[[usize; 3]]) -> Result<Vec<Face>> {
    let mut faces: Vec<Face> = Vec::with_capacity(triangles.len() * 3 / 2 + 8);
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let key = (a.min(b), a.max(b));
            match lookup.get(&key) {
                None => {
                    lookup.insert(key, faces.len());
                    faces.push(Face {
                        vertices: [a, b],
                        left: t,
                        right: None,
                        kind: FaceKind::Interior,
                    });
                }
                Some(&f) => {
                    let face = &mut faces[f];
                    if face.right.is_some() {
                        return Err(Error::InvalidMesh(format!(
                            "edge ({a}, {b}) is shared by more than two triangles"
                        )));
                    }
                    if face.vertices != [b, a] {
                        return Err(Error::InvalidMesh(format!(
                            "triangles {} and {t} have inconsistent orientation along edge ({a}, {b})",
                            face.left
                        )));
                    }
                    face.right = Some(t);
                }
            }
        }
    }
    Ok(faces)
}
