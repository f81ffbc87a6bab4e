use std::f64::consts::PI;

use spade::handles::FixedVertexHandle;
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::{signed_area, BoundaryTag, Mesh, Point};
use crate::error::{Error, Result};

/// Channel `(x0, x1) x (y0, y1)` with a circular obstacle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CylinderChannel {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub center: Point,
    pub radius: f64,
    /// Background spacing is `(y1 - y0) / resolution`.
    pub resolution: usize,
    pub min_arc_segments: usize,
}

impl Default for CylinderChannel {
    fn default() -> Self {
        Self {
            x0: -0.5,
            x1: 2.0,
            y0: -0.5,
            y1: 0.5,
            center: [0.0, 0.0],
            radius: 0.1,
            resolution: 20,
            min_arc_segments: 32,
        }
    }
}

impl CylinderChannel {
    pub fn spacing(&self) -> f64 {
        (self.y1 - self.y0) / self.resolution as f64
    }

    pub fn arc_segments(&self) -> usize {
        let s = 0.5 * self.spacing();
        self.min_arc_segments
            .max((2.0 * PI * self.radius / s).ceil() as usize)
    }
}

fn insert(
    cdt: &mut ConstrainedDelaunayTriangulation<Point2<f64>>,
    points: &mut Vec<Point>,
    p: Point,
) -> Result<FixedVertexHandle> {
    let handle = cdt
        .insert(Point2::new(p[0], p[1]))
        .map_err(|e| Error::InvalidMesh(format!("mesh generator: {e:?}")))?;
    if handle.index() != points.len() {
        return Err(Error::InvalidMesh(format!(
            "mesh generator produced a duplicate point at ({}, {})",
            p[0], p[1]
        )));
    }
    points.push(p);
    Ok(handle)
}

/// Unstructured triangulation of a channel around a cylinder.
///
/// Nodes: uniform boundary and background grid points at spacing `h`, plus
/// polar rings around the obstacle that grade from the arc spacing to `h`.
/// The arc is a polygon of [`CylinderChannel::arc_segments`] chords.
/// Boundary tags: `Inflow` at `x0`, `Outflow` at `x1`, `Wall` at `y0`/`y1`,
/// `Cylinder` on the arc.
pub fn channel_with_cylinder(spec: &CylinderChannel) -> Result<Mesh> {
    let h = spec.spacing();
    let (lx, ly) = (spec.x1 - spec.x0, spec.y1 - spec.y0);
    let nx = (lx / h).round() as usize;
    let ny = (ly / h).round() as usize;
    if spec.resolution < 2 || nx < 2 {
        return Err(Error::InvalidArgument("cylinder mesh resolution too small".into()));
    }
    let c = spec.center;
    let r = spec.radius;
    if c[0] - r <= spec.x0 + h || c[0] + r >= spec.x1 - h || c[1] - r <= spec.y0 + h || c[1] + r >= spec.y1 - h {
        return Err(Error::InvalidArgument("cylinder too close to the channel walls".into()));
    }

    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::new();
    let mut points: Vec<Point> = Vec::new();

    // rectangle boundary, counter-clockwise
    let dx = lx / nx as f64;
    let dy = ly / ny as f64;
    for i in 0..nx {
        insert(&mut cdt, &mut points, [spec.x0 + i as f64 * dx, spec.y0])?;
    }
    for j in 0..ny {
        insert(&mut cdt, &mut points, [spec.x1, spec.y0 + j as f64 * dy])?;
    }
    for i in 0..nx {
        insert(&mut cdt, &mut points, [spec.x1 - i as f64 * dx, spec.y1])?;
    }
    for j in 0..ny {
        insert(&mut cdt, &mut points, [spec.x0, spec.y1 - j as f64 * dy])?;
    }

    // polar rings
    let n_arc = spec.arc_segments();
    let arc_step = 2.0 * PI * r / n_arc as f64;
    let mut ring = Vec::with_capacity(n_arc);
    for k in 0..n_arc {
        let th = 2.0 * PI * k as f64 / n_arc as f64;
        ring.push(insert(&mut cdt, &mut points, [c[0] + r * th.cos(), c[1] + r * th.sin()])?);
    }
    for k in 0..n_arc {
        cdt.add_constraint(ring[k], ring[(k + 1) % n_arc]);
    }
    let mut radius = r;
    let mut step = 0.9 * arc_step;
    let mut level = 1usize;
    let mut outer = r;
    let wall_gap = (c[0] - spec.x0).min(spec.x1 - c[0]).min(c[1] - spec.y0).min(spec.y1 - c[1]);
    let max_radius = (r + 4.0 * h).min(wall_gap - h);
    while 2.0 * PI * radius / (n_arc as f64) < 0.8 * h && radius + step < max_radius {
        radius += step;
        let shift = if level % 2 == 1 { 0.5 } else { 0.0 };
        for k in 0..n_arc {
            let th = 2.0 * PI * (k as f64 + shift) / n_arc as f64;
            insert(&mut cdt, &mut points, [c[0] + radius * th.cos(), c[1] + radius * th.sin()])?;
        }
        outer = radius;
        step = (step * 1.25).min(h);
        level += 1;
    }

    // background grid
    let keep_out = outer + 0.7 * h;
    for j in 1..ny {
        for i in 1..nx {
            let p = [spec.x0 + i as f64 * dx, spec.y0 + j as f64 * dy];
            if ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt() > keep_out {
                insert(&mut cdt, &mut points, p)?;
            }
        }
    }

    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        let [a, b, cc] = face.vertices().map(|v| v.fix().index());
        let (pa, pb, pc) = (points[a], points[b], points[cc]);
        let centroid = [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0];
        let d = ((centroid[0] - c[0]).powi(2) + (centroid[1] - c[1]).powi(2)).sqrt();
        if d < r {
            continue;
        }
        if signed_area(pa, pb, pc) > 0.0 {
            triangles.push([a, b, cc]);
        } else {
            triangles.push([a, cc, b]);
        }
    }

    let tol = 1e-9 * lx.max(ly);
    let macro_parent = (0..triangles.len()).collect();
    let (x0, x1, y0, y1) = (spec.x0, spec.x1, spec.y0, spec.y1);
    Mesh::from_parts(points, triangles, macro_parent, |mid, _| {
        Ok(if (mid[0] - x0).abs() < tol {
            BoundaryTag::Inflow
        } else if (mid[0] - x1).abs() < tol {
            BoundaryTag::Outflow
        } else if (mid[1] - y0).abs() < tol || (mid[1] - y1).abs() < tol {
            BoundaryTag::Wall
        } else {
            BoundaryTag::Cylinder
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{export_mesh, import_mesh, macro_refine, macro_refine_with, TriangleSplit};

    #[test]
    fn generated_channel_is_valid_and_round_trips() {
        let spec = CylinderChannel::default();
        let m = channel_with_cylinder(&spec).unwrap();
        let n_arc = spec.arc_segments();
        assert!(n_arc >= 32);
        let on_cylinder = m
            .boundary_faces()
            .filter(|(_, f)| f.tag() == Some(BoundaryTag::Cylinder))
            .count();
        assert_eq!(on_cylinder, n_arc);
        for (f, face) in m.boundary_faces() {
            if face.tag() == Some(BoundaryTag::Cylinder) {
                for p in m.face_endpoints(f) {
                    let d = (p[0].powi(2) + p[1].powi(2)).sqrt();
                    assert!((d - spec.radius).abs() < 1e-12);
                }
            }
        }
        // polygonal area: rectangle minus inscribed polygon
        let poly = 0.5 * n_arc as f64 * spec.radius.powi(2) * (2.0 * PI / n_arc as f64).sin();
        let expected = 2.5 - poly;
        assert!((m.total_area() - expected).abs() < 1e-12 * expected);
        assert!(m.quasi_uniformity() < 10.0);

        let again = import_mesh(&export_mesh(&m)).unwrap();
        assert_eq!(again.n_triangles(), m.n_triangles());
        assert_eq!(again.boundary_tags(), m.boundary_tags());
        let refined = macro_refine(&again).unwrap();
        assert_eq!(refined.n_triangles(), 3 * m.n_triangles());
        let red = macro_refine_with(&again, TriangleSplit::Red).unwrap();
        assert_eq!(red.n_triangles(), 4 * m.n_triangles());
        assert!((red.total_area() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn generator_is_deterministic() {
        let spec = CylinderChannel {
            resolution: 12,
            ..Default::default()
        };
        let a = export_mesh(&channel_with_cylinder(&spec).unwrap());
        let b = export_mesh(&channel_with_cylinder(&spec).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn coarse_channels_stay_inside_the_box() {
        for resolution in [5, 6, 8, 10, 14] {
            let m = channel_with_cylinder(&CylinderChannel {
                resolution,
                ..Default::default()
            })
            .unwrap();
            assert_eq!(m.bounding_box(), [-0.5, 2.0, -0.5, 0.5], "resolution {resolution}");
            assert_eq!(
                m.boundary_tags(),
                vec![BoundaryTag::Wall, BoundaryTag::Inflow, BoundaryTag::Outflow, BoundaryTag::Cylinder]
            );
        }
    }
}
