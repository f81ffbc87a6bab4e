//! Randomized property suites behind the `validate` command.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly;
use crate::diagnostics;
use crate::math_core::{continuity_gap, cubic_tolerance, curl_advection_identity_residual, monotonicity_residual, AffineField3, Tensor2};
use crate::mesh::{build_periodicity, build_union_jack, Axis, BoundaryTag, Rect};
use crate::spaces::{build_system, interpolate, uniform_bc, BcMap, BcMode, FESystem, Field, FieldKind};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub samples: usize,
    /// Worst observed value, in the units of the check.
    pub worst: f64,
    pub detail: String,
    pub elapsed: Duration,
}

fn finish(name: &'static str, start: Instant, samples: usize, worst: f64, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        samples,
        worst,
        detail,
        elapsed: start.elapsed(),
    }
}

/// Random tensor of dimension 2 or 3 with log-uniform magnitude in
/// `[1e-3, 1e3]`, occasionally zero.
pub fn random_tensor(rng: &mut impl Rng, dim: usize) -> Tensor2 {
    if rng.random_bool(0.02) {
        return Tensor2::zeros(dim);
    }
    let scale = 10f64.powf(rng.random_range(-3.0..3.0));
    let mut m = [[0.0; 3]; 3];
    for row in m.iter_mut().take(dim) {
        for v in row.iter_mut().take(dim) {
            *v = scale * rng.random_range(-1.0..1.0);
        }
    }
    if dim == 2 {
        Tensor2::from_2x2([[m[0][0], m[0][1]], [m[1][0], m[1][1]]])
    } else {
        Tensor2::from_3x3(m)
    }
}

/// Random pairs, half of them close to each other.
fn tensor_pair(rng: &mut impl Rng) -> (Tensor2, Tensor2) {
    let dim = if rng.random_bool(0.5) { 2 } else { 3 };
    let x = random_tensor(rng, dim);
    let z = if rng.random_bool(0.5) {
        let eps = 10f64.powf(rng.random_range(-8.0..0.0));
        x + eps * random_tensor(rng, dim)
    } else {
        random_tensor(rng, dim)
    };
    (x, z)
}

pub fn check_monotonicity(samples: usize, seed: u64) -> CheckResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut passed = true;
    for _ in 0..samples {
        let (x, z) = tensor_pair(&mut rng);
        let tol = cubic_tolerance(&[&x, &z]);
        let r = monotonicity_residual(&x, &z);
        worst = worst.min(r / tol);
        passed &= r >= -tol;
    }
    finish(
        "monotonicity",
        start,
        samples,
        worst,
        passed,
        format!("{samples} pairs, min residual/tolerance {worst:.3e}"),
    )
}

pub fn check_continuity(samples: usize, seed: u64) -> CheckResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut worst = f64::INFINITY;
    let mut passed = true;
    for _ in 0..samples {
        let (x, z) = tensor_pair(&mut rng);
        let tol = cubic_tolerance(&[&x, &z]);
        let g = continuity_gap(&x, &z);
        worst = worst.min(g / tol);
        passed &= g >= -tol;
    }
    finish(
        "continuity",
        start,
        samples,
        worst,
        passed,
        format!("{samples} pairs, min gap/tolerance {worst:.3e}"),
    )
}

pub fn random_affine(rng: &mut impl Rng) -> AffineField3 {
    let mut f = AffineField3::constant([0.0; 3]);
    for i in 0..3 {
        f.offset[i] = rng.random_range(-1.0..1.0);
        for j in 0..3 {
            f.grad[i][j] = rng.random_range(-1.0..1.0);
        }
    }
    f
}

pub fn check_curl_advection(samples: usize, seed: u64) -> CheckResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0de);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (b, v) = (random_affine(&mut rng), random_affine(&mut rng));
        worst = worst.max(curl_advection_identity_residual(&b, &v));
    }
    finish(
        "curl_advection_identity",
        start,
        samples,
        worst,
        worst <= 1e-12,
        format!("{samples} affine pairs, max residual {worst:.3e}"),
    )
}

pub fn periodic_square(n: usize) -> FESystem {
    let l = 2.0 * PI;
    let m = build_union_jack(n, n, Rect::new(0.0, l, 0.0, l)).expect("valid grid");
    build_system(build_periodicity(m, &[Axis::X, Axis::Y]).expect("periodic grid"), BcMap::new()).expect("valid system")
}

/// Continuous, periodic, pointwise divergence-free P1 field `(f(y), g(x))`
/// on the periodic Union Jack grid of `n` cells: `f` and `g` are linear on
/// each macro row and column, built from random Fourier modes sampled at the
/// grid lines. It is the curl of the stream function `F(y) - G(x)`.
pub fn divergence_free_sample(system: &FESystem, n: usize, rng: &mut impl Rng) -> Field {
    let l = 2.0 * PI;
    let h = l / n as f64;
    let modes: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(1..=3) as f64,
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..l),
                rng.random_range(0.0..l),
            )
        })
        .collect();
    let mean = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let sample = |s: f64, phase_of: fn(&(f64, f64, f64, f64)) -> f64, comp: usize| -> f64 {
        let wave = |s: f64| {
            mean[comp]
                + modes
                    .iter()
                    .map(|m| m.1 * (m.0 * s + phase_of(m)).sin())
                    .sum::<f64>()
        };
        let j = (s / h).floor();
        let s0 = j * h;
        let theta = ((s - s0) / h).clamp(0.0, 1.0);
        (1.0 - theta) * wave(s0) + theta * wave(s0 + h)
    };
    interpolate(
        system,
        |p, _| [sample(p[1], |m| m.2, 0), sample(p[0], |m| m.3, 1)],
        0.0,
    )
}

pub fn max_nodal_abs(u: &Field) -> f64 {
    u.coeffs.chunks(2).map(|c| (c[0] * c[0] + c[1] * c[1]).sqrt()).fold(0.0, f64::max)
}

/// `(|wᵀ C(w) w|, ‖w‖ ‖∇w‖ ‖w‖_∞)` for a sampled field.
pub fn skew_pair(system: &FESystem, w: &Field) -> (f64, f64) {
    let c = assembly::assemble_convection(system, w);
    let form = c.bilinear(&w.coeffs, &w.coeffs).abs();
    let l2 = (2.0 * diagnostics::kinetic_energy(system, w)).sqrt();
    let scale = l2 * diagnostics::gradient_norm(system, w) * max_nodal_abs(w);
    (form, scale)
}

pub fn check_skew_symmetry(samples: usize, seed: u64) -> CheckResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ce);
    let mut worst: f64 = 0.0;
    let mut max_div: f64 = 0.0;
    let sizes = [4usize, 6, 8, 12];
    let systems: Vec<_> = sizes.iter().map(|&n| periodic_square(n)).collect();
    for k in 0..samples {
        let i = k % sizes.len();
        let w = divergence_free_sample(&systems[i], sizes[i], &mut rng);
        let (_, pointwise) = diagnostics::divergence_norms(&systems[i], &w);
        max_div = max_div.max(pointwise);
        let (form, scale) = skew_pair(&systems[i], &w);
        worst = worst.max(form / scale.max(f64::MIN_POSITIVE));
    }
    finish(
        "skew_symmetry",
        start,
        samples,
        worst,
        worst <= 1e-10 && max_div <= 1e-12,
        format!("{samples} fields, max |wCw|/scale {worst:.3e}, max pointwise div {max_div:.1e}"),
    )
}

fn random_field(system: &FESystem, rng: &mut impl Rng) -> Field {
    Field::new(
        FieldKind::Velocity,
        (0..system.n_velocity()).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
}

/// Symmetry and semidefiniteness of the symmetric forms on random fields.
pub fn check_form_positivity(samples: usize, seed: u64) -> CheckResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf0f0);
    let m = build_union_jack(5, 4, Rect::new(0.0, 1.25, 0.0, 1.0)).expect("valid grid");
    let system = build_system(m, uniform_bc(&[BoundaryTag::Wall], BcMode::NormalOnly)).expect("valid system");
    let mut worst: f64 = 0.0;
    let mut asym: f64 = 0.0;
    for _ in 0..samples {
        let w = random_field(&system, &mut rng);
        let (_, s1) = assembly::assemble_nitsche(&system, 0.1, 1.0, 1.0);
        let forms = [
            assembly::assemble_mass(&system),
            assembly::assemble_viscous(&system, 1.0),
            assembly::assemble_smagorinsky(&system, &w, 0.5),
            assembly::assemble_jump_penalty(&system, &w, 0.5, 1.0).expect("valid"),
            s1,
        ];
        for a in &forms {
            asym = asym.max(a.asymmetry() / a.max_abs().max(f64::MIN_POSITIVE));
            for _ in 0..4 {
                let x = random_field(&system, &mut rng);
                let q = a.quadratic(&x.coeffs);
                let norm: f64 = x.coeffs.iter().map(|v| v * v).sum();
                worst = worst.min(q / (a.max_abs() * norm).max(f64::MIN_POSITIVE));
            }
        }
    }
    finish(
        "form_positivity",
        start,
        samples,
        worst,
        worst >= -1e-13 && asym <= 1e-13,
        format!("{samples} fields x 5 forms, min normalized energy {worst:.2e}, max asymmetry {asym:.1e}"),
    )
}

pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        check_monotonicity(100_000, seed),
        check_continuity(100_000, seed),
        check_curl_advection(100, seed),
        check_skew_symmetry(100, seed),
        check_form_positivity(20, seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(check_monotonicity(2000, 1).passed);
        assert!(check_continuity(2000, 1).passed);
        assert!(check_curl_advection(20, 1).passed);
        assert!(check_form_positivity(3, 1).passed);
    }

    #[test]
    fn samples_are_pointwise_divergence_free() {
        let s = periodic_square(6);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = divergence_free_sample(&s, 6, &mut rng);
        let (weak, pointwise) = diagnostics::divergence_norms(&s, &w);
        assert!(weak < 1e-12 && pointwise < 1e-12);
        assert!(w.max_abs() > 0.1);
    }

    #[test]
    fn skew_oracle_sees_divergence() {
        // a field with pointwise divergence breaks the identity
        let s = periodic_square(6);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = random_field(&s, &mut rng);
        let (form, scale) = skew_pair(&s, &w);
        assert!(form / scale > 1e-4, "{}", form / scale);
    }
}
