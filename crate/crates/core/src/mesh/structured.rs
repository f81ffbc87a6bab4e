use super::{BoundaryTag, MacroGrid, Mesh};
use crate::error::{Error, Result};

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// Criss-cross ("Union Jack") mesh: `nx x ny` quads, each cut by both
/// diagonals into four triangles around an added center vertex.
///
/// Corner vertex `(i, j)` has index `j (nx + 1) + i`; the center of macro
/// `(i, j)` has index `(nx + 1)(ny + 1) + j nx + i`. All boundary faces are
/// tagged [`BoundaryTag::Wall`].
pub fn build_union_jack(nx: usize, ny: usize, domain: Rect) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "Union Jack mesh needs nx, ny >= 1 (got {nx} x {ny})"
        )));
    }
    if !(domain.width() > 0.0) || !(domain.height() > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "degenerate domain {:?}",
            domain
        )));
    }
    let dx = domain.width() / nx as f64;
    let dy = domain.height() / ny as f64;
    let coord = |i: usize, n: usize, lo: f64, hi: f64, d: f64| {
        if i == n {
            hi
        } else {
            lo + i as f64 * d
        }
    };

    let n_corner = (nx + 1) * (ny + 1);
    let mut vertices = Vec::with_capacity(n_corner + nx * ny);
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([
                coord(i, nx, domain.x0, domain.x1, dx),
                coord(j, ny, domain.y0, domain.y1, dy),
            ]);
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            vertices.push([
                domain.x0 + (i as f64 + 0.5) * dx,
                domain.y0 + (j as f64 + 0.5) * dy,
            ]);
        }
    }

    let corner = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(4 * nx * ny);
    let mut macro_parent = Vec::with_capacity(4 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let m = j * nx + i;
            let center = n_corner + m;
            let (a, b, c, d) = (
                corner(i, j),
                corner(i + 1, j),
                corner(i + 1, j + 1),
                corner(i, j + 1),
            );
            for tri in [[a, b, center], [b, c, center], [c, d, center], [d, a, center]] {
                triangles.push(tri);
                macro_parent.push(m);
            }
        }
    }

    let mut mesh = Mesh::from_parts(vertices, triangles, macro_parent, |_, _| {
        Ok(BoundaryTag::Wall)
    })?;
    mesh.set_macro_grid(Some(MacroGrid { nx, ny }));
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn counts_follow_the_construction() {
        let m = build_union_jack(1, 1, Rect::unit()).unwrap();
        assert_eq!((m.n_vertices(), m.n_triangles()), (5, 4));
        // nx = 2, ny = 1: (3)(2) corners + 2 centers
        let m = build_union_jack(2, 1, Rect::unit()).unwrap();
        assert_eq!((m.n_vertices(), m.n_triangles()), (8, 8));
        let m = build_union_jack(100, 100, Rect::new(0.0, 2.0 * PI, 0.0, 2.0 * PI)).unwrap();
        assert_eq!(m.n_vertices(), 10201 + 10000);
        assert_eq!(m.n_triangles(), 40000);
        assert_eq!(m.n_macro(), 10000);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(build_union_jack(0, 3, Rect::unit()).is_err());
        assert!(build_union_jack(2, 2, Rect::new(0.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn geometry_invariants() {
        let rect = Rect::new(-0.5, 2.0, -0.5, 0.5);
        let m = build_union_jack(5, 3, rect).unwrap();
        assert!((m.total_area() - rect.area()).abs() <= 1e-12 * rect.area());
        for t in 0..m.n_triangles() {
            assert!(m.area(t) > 0.0);
        }
        let mut per_macro = vec![0; m.n_macro()];
        for &p in m.macro_parent() {
            per_macro[p] += 1;
        }
        assert!(per_macro.iter().all(|&c| c == 4));
        let boundary = m.faces().iter().filter(|f| f.right.is_none()).count();
        assert_eq!(boundary, 2 * (5 + 3));
        // interior faces: normals from the two sides are opposite
        for (f, face) in m.faces().iter().enumerate() {
            if let Some(r) = face.right {
                let n = m.face_normal(f);
                let [a, b] = face.vertices;
                let tri = m.triangles()[r];
                let k = (0..3).find(|&k| tri[k] == b && tri[(k + 1) % 3] == a);
                assert!(k.is_some(), "right triangle must traverse the edge backwards");
                let pa = m.vertices()[b];
                let pb = m.vertices()[a];
                let len = m.h_per_face()[f];
                let nr = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
                assert!((n[0] + nr[0]).abs() < 1e-14 && (n[1] + nr[1]).abs() < 1e-14);
            }
        }
        assert!((m.h() - rect.width() / 5.0).abs() < 1e-12);
    }
}
