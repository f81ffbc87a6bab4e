//! Plain-text mesh format.
//!
//! ```text
//! V T B
//! x y          (V lines)
//! i j k        (T lines, counter-clockwise, 0-based)
//! i j tag      (B lines, boundary edges)
//! ```
//!
//! Tags are names (`wall`, `inflow`, `outflow`, `cylinder`, `periodic_x`,
//! `periodic_y`) or their integer codes 0..=5.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{BoundaryTag, Mesh};
use crate::error::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-empty line as (1-based line number, tokens).
    fn next_tokens(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if !tokens.is_empty() {
                return Ok((i + 1, tokens));
            }
        }
        Err(Error::MeshParse {
            line: 0,
            msg: format!("unexpected end of file while reading {what}"),
        })
    }
}

fn parse<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::MeshParse {
        line,
        msg: format!("cannot parse {what} from `{tok}`"),
    })
}

fn expect_len(tokens: &[&str], n: usize, line: usize, what: &str) -> Result<()> {
    if tokens.len() != n {
        return Err(Error::MeshParse {
            line,
            msg: format!("{what} line needs {n} fields, found {}", tokens.len()),
        });
    }
    Ok(())
}

pub fn import_mesh(text: &str) -> Result<Mesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (line, header) = lines.next_tokens("header")?;
    expect_len(&header, 3, line, "header")?;
    let nv: usize = parse(header[0], line, "vertex count")?;
    let nt: usize = parse(header[1], line, "triangle count")?;
    let nb: usize = parse(header[2], line, "boundary edge count")?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, tok) = lines.next_tokens("vertices")?;
        expect_len(&tok, 2, line, "vertex")?;
        let x: f64 = parse(tok[0], line, "x")?;
        let y: f64 = parse(tok[1], line, "y")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::MeshParse {
                line,
                msg: "non-finite coordinate".into(),
            });
        }
        vertices.push([x, y]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, tok) = lines.next_tokens("triangles")?;
        expect_len(&tok, 3, line, "triangle")?;
        let mut tri = [0usize; 3];
        for k in 0..3 {
            tri[k] = parse(tok[k], line, "vertex index")?;
            if tri[k] >= nv {
                return Err(Error::MeshParse {
                    line,
                    msg: format!("vertex index {} out of range (V = {nv})", tri[k]),
                });
            }
        }
        triangles.push(tri);
    }
    let mut tags: HashMap<(usize, usize), (BoundaryTag, usize)> = HashMap::new();
    for _ in 0..nb {
        let (line, tok) = lines.next_tokens("boundary edges")?;
        expect_len(&tok, 3, line, "boundary edge")?;
        let a: usize = parse(tok[0], line, "vertex index")?;
        let b: usize = parse(tok[1], line, "vertex index")?;
        let tag: BoundaryTag = tok[2]
            .parse()
            .map_err(|msg| Error::MeshParse { line, msg })?;
        tags.insert((a.min(b), a.max(b)), (tag, line));
    }
    if let Ok((line, _)) = lines.next_tokens("trailing data") {
        return Err(Error::MeshParse {
            line,
            msg: "trailing data after the declared sections".into(),
        });
    }

    let macro_parent = (0..triangles.len()).collect();
    let used = std::cell::RefCell::new(0usize);
    let mesh = Mesh::from_parts_by_edge(vertices, triangles, macro_parent, |[a, b], _, _| {
        match tags.get(&(a.min(b), a.max(b))) {
            Some(&(tag, _)) => {
                *used.borrow_mut() += 1;
                Ok(tag)
            }
            None => Err(Error::InvalidMesh(format!(
                "boundary edge ({a}, {b}) has no tag"
            ))),
        }
    })?;
    if *used.borrow() != tags.len() {
        let boundary: std::collections::HashSet<(usize, usize)> = mesh
            .boundary_faces()
            .map(|(_, f)| (f.vertices[0].min(f.vertices[1]), f.vertices[0].max(f.vertices[1])))
            .collect();
        let mut stray: Vec<_> = tags
            .iter()
            .filter(|(k, _)| !boundary.contains(k))
            .map(|(k, &(_, line))| (line, *k))
            .collect();
        stray.sort();
        let (line, (a, b)) = stray[0];
        return Err(Error::MeshParse {
            line,
            msg: format!("edge ({a}, {b}) is not a boundary edge"),
        });
    }
    Ok(mesh)
}

/// Serializes the geometry and boundary tags. Periodic seams are not stored.
pub fn export_mesh(mesh: &Mesh) -> String {
    let boundary: Vec<_> = mesh.boundary_faces().map(|(_, f)| *f).collect();
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", mesh.n_vertices(), mesh.n_triangles(), boundary.len());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{:?} {:?}", p[0], p[1]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    for f in boundary {
        let _ = writeln!(
            out,
            "{} {} {}",
            f.vertices[0],
            f.vertices[1],
            f.tag().expect("boundary face")
        );
    }
    out
}
