//! Randomized invariants of the forms, tensors, meshes and config files.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use proptest::prelude::*;
use smagfem::assembly::{self, FormParams};
use smagfem::config::{parse_config, serialize_config, BcChoice, CaseId, SimConfig};
use smagfem::diagnostics;
use smagfem::math_core::{matrix_cross, p_flux, Tensor2};
use smagfem::mesh::{build_periodicity, build_union_jack, Axis, BoundaryTag, Rect};
use smagfem::solver::Linearization;
use smagfem::spaces::{build_system, interpolate, uniform_bc, BcMap, BcMode, FESystem, Field, FieldKind};

fn periodic(n: usize) -> FESystem {
    let m = build_union_jack(n, n, Rect::new(0.0, 2.0 * PI, 0.0, 2.0 * PI)).unwrap();
    build_system(build_periodicity(m, &[Axis::X, Axis::Y]).unwrap(), BcMap::new()).unwrap()
}

fn slip_box() -> FESystem {
    let m = build_union_jack(4, 3, Rect::new(0.0, 1.0, 0.0, 0.75)).unwrap();
    build_system(m, uniform_bc(&[BoundaryTag::Wall], BcMode::NormalOnly)).unwrap()
}

fn velocity(values: &[f64], system: &FESystem) -> Field {
    Field::new(
        FieldKind::Velocity,
        (0..system.n_velocity()).map(|i| values[i % values.len()]).collect(),
    )
}

fn tensor(v: &[f64]) -> Tensor2 {
    Tensor2::from_3x3([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
}

fn coeff() -> impl Strategy<Value = f64> {
    -1.0f64..1.0
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(coeff(), 7..40)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn p_flux_is_two_homogeneous(v in prop::collection::vec(-10.0f64..10.0, 9), s in 0.0f64..50.0) {
        let g = tensor(&v);
        let lhs = p_flux(&(s * g));
        let rhs = (s * s) * p_flux(&g);
        prop_assert!((lhs - rhs).frobenius_norm() <= 1e-12 * (1.0 + rhs.frobenius_norm()));
    }

    #[test]
    fn matrix_cross_of_a_tensor_with_itself_vanishes(v in prop::collection::vec(-10.0f64..10.0, 9)) {
        let a = tensor(&v);
        prop_assert!(matrix_cross(&a, &a).max_abs() <= 1e-12 * (1.0 + a.frobenius_norm().powi(2)));
    }

    #[test]
    fn union_jack_counts_and_area(nx in 1usize..9, ny in 1usize..9, w in 0.1f64..5.0, h in 0.1f64..5.0) {
        let m = build_union_jack(nx, ny, Rect::new(-1.0, -1.0 + w, 2.0, 2.0 + h)).unwrap();
        prop_assert_eq!(m.n_vertices(), (nx + 1) * (ny + 1) + nx * ny);
        prop_assert_eq!(m.n_triangles(), 4 * nx * ny);
        let area: f64 = (0..m.n_triangles()).map(|t| m.area(t)).sum();
        prop_assert!(close(area, w * h, 1e-12));
        prop_assert!((0..m.n_triangles()).all(|t| m.area(t) > 0.0));
    }

    #[test]
    fn stabilization_forms_are_spsd(w in values(), v in values(), g in 0.0f64..2.0, g0 in 0.0f64..2.0) {
        let s = slip_box();
        let (w, v) = (velocity(&w, &s), velocity(&v, &s));
        let (_, s1) = assembly::assemble_nitsche(&s, 1e-2, g0, 1.0);
        for a in [
            assembly::assemble_smagorinsky(&s, &w, g),
            assembly::assemble_jump_penalty(&s, &w, g0, 1.0).unwrap(),
            s1,
        ] {
            prop_assert!(a.asymmetry() <= 1e-12 * a.max_abs().max(f64::MIN_POSITIVE));
            let norm: f64 = v.coeffs.iter().map(|x| x * x).sum();
            prop_assert!(a.quadratic(&v.coeffs) >= -1e-13 * a.max_abs() * norm);
        }
    }

    #[test]
    fn smagorinsky_sees_only_the_gradient_norm(w in values(), angle in 0.0f64..(2.0 * PI), c in -3.0f64..3.0) {
        let s = periodic(4);
        let w = velocity(&w, &s);
        let (cs, sn) = (angle.cos(), angle.sin());
        let mut rotated = w.clone();
        for n in rotated.coeffs.chunks_mut(2) {
            let (a, b) = (n[0], n[1]);
            n[0] = cs * a - sn * b;
            n[1] = sn * a + cs * b;
        }
        let mut scaled = w.clone();
        scaled.coeffs.iter_mut().for_each(|x| *x *= c);
        let base = assembly::assemble_smagorinsky(&s, &w, 0.3);
        let tol = 1e-12 * base.max_abs().max(f64::MIN_POSITIVE);
        let rot = assembly::assemble_smagorinsky(&s, &rotated, 0.3);
        prop_assert!(rot.add_scaled(-1.0, &base).max_abs() <= tol);
        let sc = assembly::assemble_smagorinsky(&s, &scaled, 0.3);
        prop_assert!(sc.add_scaled(-c.abs(), &base).max_abs() <= 3.0 * tol);
    }

    #[test]
    fn stab_seminorm_is_one_homogeneous(w in values(), u in values(), c in -4.0f64..4.0) {
        let s = slip_box();
        let (w, u) = (velocity(&w, &s), velocity(&u, &s));
        let params = FormParams { mu: 1e-2, gamma: 0.5, gamma0: 0.2, gamma1: 1.0, u_char: 1.0 };
        let mut cu = u.clone();
        cu.coeffs.iter_mut().for_each(|x| *x *= c);
        let a = diagnostics::stab_seminorm(&s, &cu, &w, &params).unwrap();
        let b = diagnostics::stab_seminorm(&s, &u, &w, &params).unwrap();
        prop_assert!(close(a, c.abs() * b, 1e-10));
    }

    #[test]
    fn gradient_fields_have_no_vorticity(a in coeff(), b in coeff(), c in coeff()) {
        // the gradient of the potential a x + b y + c x y is (a + c y, b + c x)
        let m = build_union_jack(3, 3, Rect::new(0.0, 1.0, 0.0, 1.0)).unwrap();
        let s = build_system(m, uniform_bc(&[BoundaryTag::Wall], BcMode::Neumann)).unwrap();
        let u = interpolate(&s, |p, _| [a + c * p[1], b + c * p[0]], 0.0);
        prop_assert!(diagnostics::vorticity(&s, &u).coeffs.iter().all(|w| w.abs() <= 1e-13));
    }

    #[test]
    fn assembly_is_repeatable(w in values()) {
        let s = periodic(3);
        let w = velocity(&w, &s);
        let a = assembly::assemble_convection(&s, &w);
        let b = assembly::assemble_convection(&s, &w);
        prop_assert_eq!(a.values(), b.values());
    }
}

fn case() -> impl Strategy<Value = CaseId> {
    prop::sample::select(CaseId::ALL.to_vec())
}

fn bc_map() -> impl Strategy<Value = BTreeMap<BoundaryTag, BcChoice>> {
    let tag = prop::sample::select(vec![BoundaryTag::Wall, BoundaryTag::Inflow, BoundaryTag::Outflow, BoundaryTag::Cylinder]);
    let choice = prop::sample::select(vec![
        BcChoice::StrongDirichlet,
        BcChoice::NormalOnly,
        BcChoice::Neumann,
    ]);
    prop::collection::btree_map(tag, choice, 0..3)
}

prop_compose! {
    fn config()(
        case in case(),
        resolution in 1usize..300,
        mu in 0.0f64..1.0,
        gamma in 0.0f64..2.0,
        gamma0 in 0.0f64..2.0,
        gamma1 in 0.0f64..2.0,
        u_char in 0.01f64..10.0,
        dt in 1e-5f64..0.5,
        t_end in 0.0f64..20.0,
        output_every in 1usize..100,
        extrapolated in any::<bool>(),
        bc in bc_map(),
        seed in any::<u64>(),
    ) -> SimConfig {
        SimConfig {
            resolution,
            mu,
            gamma,
            gamma0,
            gamma1,
            u_char,
            dt,
            t_end,
            output_every,
            linearization: if extrapolated { Linearization::Extrapolated } else { Linearization::Previous },
            bc,
            out_dir: PathBuf::from(format!("out/run_{seed}")),
            seed,
            ..SimConfig::defaults(case)
        }
    }
}

proptest! {
    #[test]
    fn config_round_trips(c in config()) {
        let text = serialize_config(&c);
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(back, c);
    }
}
