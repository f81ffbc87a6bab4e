//! Saddle-point solves on a Union Jack channel: steady Stokes flow with a
//! parabolic inflow and a free outflow, the divergence-free projection, and
//! the error a lid-driven cavity produces on this mesh.

use smagfem::assembly::{assemble_divergence, assemble_rhs, assemble_viscous};
use smagfem::diagnostics::{divergence_norms, error_norms, gradient_norm};
use smagfem::mesh::{build_union_jack, BoundaryTag, Rect};
use smagfem::solver::{solve_saddle, SaddleSystem};
use smagfem::spaces::{build_system, project_divergence_free, vector_fn, BcMap, BcMode, FESystem};

fn stokes(system: &FESystem) -> smagfem::Result<(smagfem::spaces::Field, smagfem::spaces::Field)> {
    let rhs = assemble_rhs(system, &|_, _| [0.0, 0.0], 0.0);
    solve_saddle(
        system,
        &SaddleSystem {
            a: assemble_viscous(system, 1.0),
            d: assemble_divergence(system),
            rhs_u: rhs.coeffs,
            rhs_p: vec![0.0; system.n_pressure()],
        },
    )
}

fn main() -> smagfem::Result<()> {
    let poiseuille = |p: [f64; 2], _t: f64| [4.0 * p[1] * (1.0 - p[1]), 0.0];
    for n in [8, 16, 32] {
        let mesh = build_union_jack(2 * n, n, Rect::new(0.0, 2.0, 0.0, 1.0))?.retag_boundary(|mid, _| {
            if mid[0].abs() < 1e-12 {
                BoundaryTag::Inflow
            } else if (mid[0] - 2.0).abs() < 1e-12 {
                BoundaryTag::Outflow
            } else {
                BoundaryTag::Wall
            }
        });
        let mut bc = BcMap::new();
        bc.insert(BoundaryTag::Wall, BcMode::no_slip());
        bc.insert(BoundaryTag::Inflow, BcMode::StrongDirichlet(vector_fn(poiseuille)));
        bc.insert(BoundaryTag::Outflow, BcMode::Neumann);
        let system = build_system(mesh, bc)?;
        let (u, p) = stokes(&system)?;
        let (weak, _) = divergence_norms(&system, &u);
        let (l2, h1) = error_norms(&system, &u, &poiseuille, &|p, _| [[0.0, 4.0 - 8.0 * p[1]], [0.0, 0.0]], 0.0);
        println!(
            "channel n = {n:>2}: |u - u_exact| = {l2:.3e} (H1 {h1:.3e}), |Bu| = {weak:.1e}, pressure drop {:.4}",
            p.coeffs[0] - p.coeffs[n * 2 - 1]
        );
        if n == 32 {
            let v = project_divergence_free(&system, |x| [1.0 + x[0] * (2.0 - x[0]), x[1]], 0.0)?;
            let (weak, _) = divergence_norms(&system, &v);
            println!("projection: |Bv| / (1 + |grad v|) = {:.1e}", weak / (1.0 + gradient_norm(&system, &v)));
        }
    }

    // an all-Dirichlet criss-cross box has a checkerboard pressure mode, and
    // a sliding lid is not compatible with it
    let mesh = build_union_jack(8, 8, Rect::unit())?.retag_boundary(|mid, _| {
        if (mid[1] - 1.0).abs() < 1e-12 {
            BoundaryTag::Inflow
        } else {
            BoundaryTag::Wall
        }
    });
    let mut bc = BcMap::new();
    bc.insert(BoundaryTag::Wall, BcMode::no_slip());
    bc.insert(BoundaryTag::Inflow, BcMode::StrongDirichlet(vector_fn(|_, _| [1.0, 0.0])));
    let cavity = build_system(mesh, bc)?;
    match stokes(&cavity) {
        Ok(_) => println!("cavity solved"),
        Err(e) => println!("cavity: {e}"),
    }
    Ok(())
}
