//! Mesh construction: Union Jack grids, periodic identification, the
//! cylinder channel, macro refinement and the text format.

use smagfem::mesh::{
    build_periodicity, build_union_jack, channel_with_cylinder, export_mesh, import_mesh, macro_refine_with, Axis,
    CylinderChannel, Rect, TriangleSplit,
};

fn main() -> smagfem::Result<()> {
    let grid = build_union_jack(4, 3, Rect::new(0.0, 2.0, 0.0, 1.5))?;
    println!(
        "union jack 4x3: {} vertices, {} triangles, {} macro cells, tags {:?}",
        grid.n_vertices(),
        grid.n_triangles(),
        grid.n_macro(),
        grid.boundary_tags()
    );
    let periodic = build_periodicity(grid, &[Axis::X, Axis::Y])?;
    let masters: std::collections::BTreeSet<_> = periodic.periodic_map().iter().collect();
    println!("fully periodic: {} distinct nodes", masters.len());

    let coarse = channel_with_cylinder(&CylinderChannel::default())?;
    println!(
        "channel: {} triangles, h = {:.4}, quasi-uniformity {:.2}, arc segments {}",
        coarse.n_triangles(),
        coarse.h(),
        coarse.quasi_uniformity(),
        CylinderChannel::default().arc_segments()
    );
    for split in [TriangleSplit::Alfeld, TriangleSplit::Red] {
        let fine = macro_refine_with(&coarse, split)?;
        println!("  {split:?} split: {} triangles in {} macro cells", fine.n_triangles(), fine.n_macro());
    }

    let text = export_mesh(&coarse);
    let back = import_mesh(&text)?;
    println!("text format round trip: {} bytes, identical {}", text.len(), export_mesh(&back) == text);
    Ok(())
}
