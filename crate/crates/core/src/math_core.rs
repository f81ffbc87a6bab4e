//! Tensor-level algebra used by the Smagorinsky flux and by the property suites.
//!
//! The p = 3 flux `|G|_F G` is the pointwise Smagorinsky stress. Its
//! monotonicity and continuity inequalities are exposed as residual functions
//! whose sign is the property under test.

use std::ops::{Add, Mul, Sub};

/// Square `d x d` real matrix with `d` in {2, 3}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor2 {
    dim: usize,
    entries: [[f64; 3]; 3],
}

impl Tensor2 {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "tensor dimension must be 2 or 3");
        Self {
            dim,
            entries: [[0.0; 3]; 3],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            t.entries[i][i] = 1.0;
        }
        t
    }

    pub fn from_2x2(m: [[f64; 2]; 2]) -> Self {
        let mut t = Self::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                t.entries[i][j] = m[i][j];
            }
        }
        t
    }

    pub fn from_3x3(m: [[f64; 3]; 3]) -> Self {
        Self {
            dim: 3,
            entries: m,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.entries[i][j]
    }

    /// Row `i` as a length-3 array (zero padded in 2D).
    pub fn row(&self, i: usize) -> [f64; 3] {
        self.entries[i]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.entries[i][j] = self.entries[j][i];
            }
        }
        t
    }

    /// Frobenius inner product `A : B`.
    pub fn double_dot(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "tensor dimensions differ");
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.entries[i][j] * other.entries[i][j];
            }
        }
        s
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.double_dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|v| v.is_finite())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.dim, other.dim, "tensor dimensions differ");
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.entries[i][j] = f(self.entries[i][j], other.entries[i][j]);
            }
        }
        t
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(self, rhs: Tensor2) -> Tensor2 {
        self.zip_with(&rhs, |a, b| a + b)
    }
}

impl Sub for Tensor2 {
    type Output = Tensor2;
    fn sub(self, rhs: Tensor2) -> Tensor2 {
        self.zip_with(&rhs, |a, b| a - b)
    }
}

impl Mul<Tensor2> for f64 {
    type Output = Tensor2;
    fn mul(self, rhs: Tensor2) -> Tensor2 {
        let mut t = rhs;
        for row in t.entries.iter_mut() {
            for v in row.iter_mut() {
                *v *= self;
            }
        }
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// `|G|_F`.
pub fn frobenius_norm(g: &Tensor2) -> f64 {
    g.frobenius_norm()
}

/// The p = 3 flux `|G|_F G`.
pub fn p_flux(g: &Tensor2) -> Tensor2 {
    g.frobenius_norm() * *g
}

/// `4 (P(X) - P(Z)) : (X - Z) - |X - Z|_F^3`, nonnegative for all pairs.
pub fn monotonicity_residual(x: &Tensor2, z: &Tensor2) -> f64 {
    let diff = *x - *z;
    let flux_diff = p_flux(x) - p_flux(z);
    4.0 * flux_diff.double_dot(&diff) - diff.frobenius_norm().powi(3)
}

/// `(|X|_F + |Z|_F) |X - Z|_F - |P(X) - P(Z)|_F`, nonnegative for all pairs.
pub fn continuity_gap(x: &Tensor2, z: &Tensor2) -> f64 {
    let diff = (*x - *z).frobenius_norm();
    let flux_diff = (p_flux(x) - p_flux(z)).frobenius_norm();
    (x.frobenius_norm() + z.frobenius_norm()) * diff - flux_diff
}

/// Round-off allowance for the cubic pointwise inequalities.
pub fn cubic_tolerance(inputs: &[&Tensor2]) -> f64 {
    let scale = inputs
        .iter()
        .map(|t| t.frobenius_norm())
        .fold(0.0_f64, f64::max);
    1e-12 * (1.0 + scale).powi(3)
}

/// Row-wise cross product of two 3x3 matrices:
/// `c1 = A2.B3 - A3.B2`, `c2 = -(A1.B3 - A3.B1)`, `c3 = A1.B2 - A2.B1`.
pub fn matrix_cross(a: &Tensor2, b: &Tensor2) -> Vec3 {
    assert_eq!(a.dim(), 3, "matrix cross product needs 3x3 input");
    assert_eq!(b.dim(), 3, "matrix cross product needs 3x3 input");
    let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let (a1, a2, a3) = (a.row(0), a.row(1), a.row(2));
    let (b1, b2, b3) = (b.row(0), b.row(1), b.row(2));
    Vec3([
        dot(a2, b3) - dot(a3, b2),
        -(dot(a1, b3) - dot(a3, b1)),
        dot(a1, b2) - dot(a2, b1),
    ])
}

/// A smooth 3D vector field described by its second-order jet at a point.
///
/// `jacobian[i][j] = d_j f_i`, `hessian[i][j][k] = d_j d_k f_i`.
pub trait VectorField3 {
    fn value(&self, x: [f64; 3]) -> [f64; 3];
    fn jacobian(&self, x: [f64; 3]) -> [[f64; 3]; 3];
    fn hessian(&self, x: [f64; 3]) -> [[[f64; 3]; 3]; 3];
}

/// `f(x) = offset + grad x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineField3 {
    pub offset: [f64; 3],
    pub grad: [[f64; 3]; 3],
}

impl AffineField3 {
    pub fn constant(offset: [f64; 3]) -> Self {
        Self {
            offset,
            grad: [[0.0; 3]; 3],
        }
    }
}

impl VectorField3 for AffineField3 {
    fn value(&self, x: [f64; 3]) -> [f64; 3] {
        let mut v = self.offset;
        for (i, vi) in v.iter_mut().enumerate() {
            for j in 0..3 {
                *vi += self.grad[i][j] * x[j];
            }
        }
        v
    }

    fn jacobian(&self, _x: [f64; 3]) -> [[f64; 3]; 3] {
        self.grad
    }

    fn hessian(&self, _x: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
        [[[0.0; 3]; 3]; 3]
    }
}

/// `f_i(x) = offset_i + grad_i . x + 1/2 x^T quad_i x` with symmetric `quad_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticField3 {
    pub offset: [f64; 3],
    pub grad: [[f64; 3]; 3],
    pub quad: [[[f64; 3]; 3]; 3],
}

impl VectorField3 for QuadraticField3 {
    fn value(&self, x: [f64; 3]) -> [f64; 3] {
        let mut v = self.offset;
        for i in 0..3 {
            for j in 0..3 {
                v[i] += self.grad[i][j] * x[j];
                for k in 0..3 {
                    v[i] += 0.5 * self.quad[i][j][k] * x[j] * x[k];
                }
            }
        }
        v
    }

    fn jacobian(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let mut jac = self.grad;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    jac[i][j] += self.quad[i][j][k] * x[k];
                }
            }
        }
        jac
    }

    fn hessian(&self, _x: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
        self.quad
    }
}

fn curl_from_jacobian(j: &[[f64; 3]; 3]) -> [f64; 3] {
    [j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]]
}

/// Pointwise residual of `curl((b.grad) v) - (b.grad) curl v - (grad b)^t x grad v`.
pub fn curl_advection_residual_at(
    beta: &impl VectorField3,
    v: &impl VectorField3,
    x: [f64; 3],
) -> Vec3 {
    let b = beta.value(x);
    let jb = beta.jacobian(x);
    let jv = v.jacobian(x);
    let hv = v.hessian(x);

    // Jacobian of a = (b.grad) v: d_j a_i = sum_k d_j b_k d_k v_i + b_k d_j d_k v_i
    let mut ja = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                ja[i][j] += jb[k][j] * jv[i][k] + b[k] * hv[i][k][j];
            }
        }
    }
    let lhs = curl_from_jacobian(&ja);

    // Jacobian of curl v, row i = grad (curl v)_i
    let mut jc = [[0.0; 3]; 3];
    for j in 0..3 {
        jc[0][j] = hv[2][1][j] - hv[1][2][j];
        jc[1][j] = hv[0][2][j] - hv[2][0][j];
        jc[2][j] = hv[1][0][j] - hv[0][1][j];
    }
    let mut transport = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            transport[i] += b[j] * jc[i][j];
        }
    }

    let cross = matrix_cross(&Tensor2::from_3x3(jb).transpose(), &Tensor2::from_3x3(jv));
    Vec3([
        lhs[0] - transport[0] - cross.0[0],
        lhs[1] - transport[1] - cross.0[1],
        lhs[2] - transport[2] - cross.0[2],
    ])
}

/// Fixed sample points in `[-1, 1]^3` used by the identity check.
pub const IDENTITY_SAMPLE_POINTS: [[f64; 3]; 10] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [-0.5, 0.25, 0.75],
    [0.3, -0.9, 0.1],
    [-1.0, -1.0, -1.0],
    [0.6, 0.6, -0.2],
    [-0.35, 0.8, -0.65],
    [0.95, -0.15, 0.45],
];

/// Max-norm of the curl/advection identity residual over the sample points.
pub fn curl_advection_identity_residual(beta: &AffineField3, v: &AffineField3) -> f64 {
    IDENTITY_SAMPLE_POINTS
        .iter()
        .map(|&x| curl_advection_residual_at(beta, v, x).max_abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn frobenius_norm_examples() {
        assert!((frobenius_norm(&Tensor2::identity(2)) - SQRT2).abs() < 1e-15);
        assert_eq!(frobenius_norm(&Tensor2::zeros(2)), 0.0);
        assert_eq!(frobenius_norm(&Tensor2::from_2x2([[3.0, 4.0], [0.0, 0.0]])), 5.0);
    }

    #[test]
    fn p_flux_examples() {
        assert_eq!(p_flux(&Tensor2::zeros(2)), Tensor2::zeros(2));
        let id = p_flux(&Tensor2::identity(2));
        assert!((id.get(0, 0) - SQRT2).abs() < 1e-15);
        assert_eq!(id.get(0, 1), 0.0);
        let d = p_flux(&Tensor2::from_2x2([[1.0, 0.0], [0.0, -1.0]]));
        assert!((d.get(0, 0) - SQRT2).abs() < 1e-15);
        assert!((d.get(1, 1) + SQRT2).abs() < 1e-15);
    }

    #[test]
    fn p_flux_is_degree_two_homogeneous() {
        let g = Tensor2::from_3x3([[0.3, -1.2, 0.5], [2.0, 0.1, -0.4], [0.0, 0.7, 1.1]]);
        for s in [0.0, 0.5, 1.0, 3.0] {
            let lhs = p_flux(&(s * g));
            let rhs = (s * s) * p_flux(&g);
            assert!((lhs - rhs).frobenius_norm() <= 1e-14 * (1.0 + rhs.frobenius_norm()));
        }
    }

    #[test]
    fn monotonicity_examples() {
        let x = Tensor2::from_2x2([[0.2, -0.7], [1.5, 0.3]]);
        assert_eq!(monotonicity_residual(&x, &x), 0.0);
        let r = monotonicity_residual(&Tensor2::identity(2), &Tensor2::zeros(2));
        assert!((r - 3.0 * SQRT2.powi(3)).abs() < 1e-12);
        assert!((r - 8.485_281_374_238_57).abs() < 1e-9);
    }

    #[test]
    fn continuity_examples() {
        let x = Tensor2::from_2x2([[0.2, -0.7], [1.5, 0.3]]);
        assert_eq!(continuity_gap(&x, &x), 0.0);
        assert!(continuity_gap(&x, &Tensor2::zeros(2)).abs() < 1e-14);
    }

    #[test]
    fn matrix_cross_examples() {
        let a = Tensor2::from_3x3([[1.0, 2.0, 3.0], [-1.0, 0.5, 2.0], [0.0, 4.0, -2.0]]);
        assert_eq!(matrix_cross(&a, &a).max_abs(), 0.0);
        let id = Tensor2::identity(3);
        assert_eq!(matrix_cross(&id, &id).max_abs(), 0.0);
        // rows of B: (e2, e3, e1). Hand evaluation with A = I:
        // c1 = e2.e1 - e3.e3 = -1, c2 = -(e1.e1 - e3.e2) = -1, c3 = e1.e3 - e2.e2 = -1
        let b = Tensor2::from_3x3([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]);
        assert_eq!(matrix_cross(&id, &b), Vec3([-1.0, -1.0, -1.0]));
    }

    #[test]
    fn identity_examples() {
        let b = AffineField3::constant([1.0, -2.0, 0.5]);
        let v = AffineField3::constant([0.0, 3.0, 1.0]);
        assert_eq!(curl_advection_identity_residual(&b, &v), 0.0);

        // beta = x e1, v = y e3
        let mut beta = AffineField3::constant([0.0; 3]);
        beta.grad[0][0] = 1.0;
        let mut v = AffineField3::constant([0.0; 3]);
        v.grad[2][1] = 1.0;
        assert!(curl_advection_identity_residual(&beta, &v) <= 1e-15);
    }

    #[test]
    fn identity_holds_for_quadratic_fields() {
        let mut quad = [[[0.0; 3]; 3]; 3];
        quad[0][1][2] = 1.5;
        quad[0][2][1] = 1.5;
        quad[1][0][0] = -2.0;
        quad[2][1][1] = 0.7;
        quad[2][0][2] = 0.3;
        quad[2][2][0] = 0.3;
        let v = QuadraticField3 {
            offset: [0.1, 0.2, 0.3],
            grad: [[0.5, -1.0, 0.0], [0.2, 0.1, 0.9], [-0.3, 0.4, 0.0]],
            quad,
        };
        let beta = QuadraticField3 {
            offset: [1.0, 0.0, -1.0],
            grad: [[0.0, 2.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.5]],
            quad: {
                let mut q = [[[0.0; 3]; 3]; 3];
                q[1][2][2] = 1.0;
                q
            },
        };
        for &x in IDENTITY_SAMPLE_POINTS.iter() {
            assert!(curl_advection_residual_at(&beta, &v, x).max_abs() < 1e-13);
        }
    }
}
