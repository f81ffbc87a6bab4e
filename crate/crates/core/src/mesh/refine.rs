use std::collections::HashMap;

use super::{BoundaryTag, Mesh, Point};
use crate::error::{Error, Result};

/// How a coarse triangle is split into a macro cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriangleSplit {
    /// Barycenter joined to the three vertices: 3 sub-triangles.
    Alfeld,
    /// Edge midpoints joined pairwise: 4 sub-triangles.
    Red,
}

/// Alfeld split of every triangle; each coarse triangle becomes one macro cell.
pub fn macro_refine(coarse: &Mesh) -> Result<Mesh> {
    macro_refine_with(coarse, TriangleSplit::Alfeld)
}

pub fn macro_refine_with(coarse: &Mesh, split: TriangleSplit) -> Result<Mesh> {
    if !coarse.periodic_axes().is_empty() {
        return Err(Error::InvalidMesh(
            "refine before building periodicity".into(),
        ));
    }
    let mut boundary: HashMap<(usize, usize), BoundaryTag> = HashMap::new();
    for (_, face) in coarse.boundary_faces() {
        let [a, b] = face.vertices;
        boundary.insert((a.min(b), a.max(b)), face.tag().expect("boundary face"));
    }

    let mut vertices: Vec<Point> = coarse.vertices().to_vec();
    let mut triangles = Vec::new();
    let mut macro_parent = Vec::new();
    // new boundary edge -> tag of the coarse edge it came from
    let mut sub_tags: HashMap<(usize, usize), BoundaryTag> = HashMap::new();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));

    match split {
        TriangleSplit::Alfeld => {
            for (t, tri) in coarse.triangles().iter().enumerate() {
                let [pa, pb, pc] = coarse.corners(t);
                let z = vertices.len();
                vertices.push([(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0]);
                let [a, b, c] = *tri;
                for sub in [[a, b, z], [b, c, z], [c, a, z]] {
                    triangles.push(sub);
                    macro_parent.push(t);
                }
            }
            sub_tags = boundary;
        }
        TriangleSplit::Red => {
            let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
            for (t, tri) in coarse.triangles().iter().enumerate() {
                let mut mid = [0usize; 3];
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    mid[k] = *midpoint.entry(key(a, b)).or_insert_with(|| {
                        let (pa, pb) = (vertices[a], vertices[b]);
                        vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                        vertices.len() - 1
                    });
                    if let Some(&tag) = boundary.get(&key(a, b)) {
                        sub_tags.insert(key(a, mid[k]), tag);
                        sub_tags.insert(key(mid[k], b), tag);
                    }
                }
                let [a, b, c] = *tri;
                let [mab, mbc, mca] = mid;
                for sub in [[a, mab, mca], [mab, b, mbc], [mca, mbc, c], [mab, mbc, mca]] {
                    triangles.push(sub);
                    macro_parent.push(t);
                }
            }
        }
    }

    Mesh::from_parts_by_edge(vertices, triangles, macro_parent, |[a, b], _, _| {
        sub_tags.get(&key(a, b)).copied().ok_or_else(|| {
            Error::InvalidMesh(format!("refined boundary edge ({a}, {b}) has no coarse parent"))
        })
    })
}
