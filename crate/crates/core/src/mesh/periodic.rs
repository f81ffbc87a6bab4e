use std::collections::HashMap;

use super::{Axis, Face, FaceKind, Mesh, Point};
use crate::error::{Error, Result};

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

fn lex_less(a: Point, b: Point) -> bool {
    a[0] < b[0] || (a[0] == b[0] && a[1] < b[1])
}

/// Identifies opposite sides of the bounding box along `axes`.
///
/// Every vertex gets a master: the lexicographically smallest member of its
/// equivalence class, so doubly periodic corners collapse onto `(xmin, ymin)`.
/// Boundary faces on paired sides are merged into interior
/// [`FaceKind::Periodic`] faces whose `left` triangle lies on the low side.
pub fn build_periodicity(mesh: Mesh, axes: &[Axis]) -> Result<Mesh> {
    let mut axes: Vec<Axis> = axes.to_vec();
    axes.sort();
    axes.dedup();
    if axes.is_empty() {
        return Ok(mesh);
    }
    if !mesh.periodic_axes().is_empty() {
        return Err(Error::InvalidMesh("mesh is already periodic".into()));
    }
    let bb = mesh.bounding_box();
    let size = (bb[1] - bb[0]).max(bb[3] - bb[2]);
    let tol = 1e-9 * size;
    let n = mesh.n_vertices();
    let verts = mesh.vertices();

    let mut on_boundary = vec![false; n];
    for (_, face) in mesh.boundary_faces() {
        on_boundary[face.vertices[0]] = true;
        on_boundary[face.vertices[1]] = true;
    }

    let mut parent: Vec<usize> = (0..n).collect();
    for &axis in &axes {
        let (along, across, lo, hi) = match axis {
            Axis::X => (0, 1, bb[0], bb[1]),
            Axis::Y => (1, 0, bb[2], bb[3]),
        };
        let mut low: Vec<(f64, usize)> = (0..n)
            .filter(|&v| on_boundary[v] && (verts[v][along] - lo).abs() <= tol)
            .map(|v| (verts[v][across], v))
            .collect();
        let mut high: Vec<(f64, usize)> = (0..n)
            .filter(|&v| on_boundary[v] && (verts[v][along] - hi).abs() <= tol)
            .map(|v| (verts[v][across], v))
            .collect();
        low.sort_by(|a, b| a.0.total_cmp(&b.0));
        high.sort_by(|a, b| a.0.total_cmp(&b.0));
        let matched = |from: &[(f64, usize)], into: &[(f64, usize)]| -> Result<Vec<(usize, usize)>> {
            let mut pairs = Vec::with_capacity(from.len());
            for &(c, v) in from {
                let idx = into.partition_point(|p| p.0 < c - tol);
                match into.get(idx) {
                    Some(&(c2, w)) if (c2 - c).abs() <= tol => pairs.push((v, w)),
                    _ => {
                        return Err(Error::UnmatchedPeriodicVertex {
                            x: verts[v][0],
                            y: verts[v][1],
                        })
                    }
                }
            }
            Ok(pairs)
        };
        let pairs = matched(&high, &low)?;
        matched(&low, &high)?;
        for (v, w) in pairs {
            let (rv, rw) = (find(&mut parent, v), find(&mut parent, w));
            if rv != rw {
                parent[rv] = rw;
            }
        }
    }

    let mut best: HashMap<usize, usize> = HashMap::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        let entry = best.entry(r).or_insert(v);
        if lex_less(verts[v], verts[*entry]) {
            *entry = v;
        }
    }
    let map: Vec<usize> = (0..n)
        .map(|v| {
            let r = find(&mut parent, v);
            best[&r]
        })
        .collect();

    // merge paired boundary faces
    let faces = mesh.faces();
    let mut merged: Vec<Face> = Vec::with_capacity(faces.len());
    let mut pending: HashMap<(Axis, usize, usize), (usize, usize)> = HashMap::new();
    for (f, face) in faces.iter().enumerate() {
        let axis = match face.kind {
            FaceKind::Boundary(_) => {
                let [a, b] = mesh.face_endpoints(f);
                axes.iter().copied().find(|&axis| {
                    let (along, lo, hi) = match axis {
                        Axis::X => (0, bb[0], bb[1]),
                        Axis::Y => (1, bb[2], bb[3]),
                    };
                    let on = |c: f64| (a[along] - c).abs() <= tol && (b[along] - c).abs() <= tol;
                    on(lo) || on(hi)
                })
            }
            _ => None,
        };
        let Some(axis) = axis else {
            merged.push(*face);
            continue;
        };
        let (ma, mb) = (map[face.vertices[0]], map[face.vertices[1]]);
        let key = (axis, ma.min(mb), ma.max(mb));
        match pending.remove(&key) {
            None => {
                pending.insert(key, (merged.len(), f));
                merged.push(Face {
                    kind: FaceKind::Periodic(axis),
                    ..*face
                });
            }
            Some((slot, _)) => {
                let first = merged[slot];
                let along = match axis {
                    Axis::X => 0,
                    Axis::Y => 1,
                };
                let first_low = verts[first.vertices[0]][along] < verts[face.vertices[0]][along];
                merged[slot] = if first_low {
                    Face {
                        right: Some(face.left),
                        ..first
                    }
                } else {
                    Face {
                        right: Some(first.left),
                        ..*face
                    }
                    .with_kind(FaceKind::Periodic(axis))
                };
            }
        }
    }
    if let Some(&(_, f)) = pending.values().min() {
        let [a, _] = mesh.face_endpoints(f);
        return Err(Error::UnmatchedPeriodicVertex { x: a[0], y: a[1] });
    }

    let mut mesh = mesh;
    mesh.set_periodic(map, axes, merged);
    Ok(mesh)
}

impl Face {
    fn with_kind(self, kind: FaceKind) -> Face {
        Face { kind, ..self }
    }
}
