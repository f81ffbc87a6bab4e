//! Built-in benchmark and verification cases.

use std::f64::consts::PI;

use crate::config::{CaseId, SimConfig};
use crate::mesh::{BoundaryTag, Point};
use crate::spaces::{vector_fn, BcMap, BcMode, VectorFn};

/// Shear layer thickness.
pub const SHEAR_RHO: f64 = PI / 15.0;
/// Amplitude of the vertical perturbation of the shear layer.
pub const SHEAR_DELTA_PERT: f64 = 0.05;
/// Reaction coefficient of the linear model case.
pub const MMS_LINEAR_SIGMA: f64 = 4.0;
/// Side of the periodic square used by the shear layer and both MMS cases.
pub const PERIODIC_SIDE: f64 = 2.0 * PI;

pub type VelocityFn = fn(Point, f64) -> [f64; 2];
pub type GradientFn = fn(Point, f64) -> [[f64; 2]; 2];

/// Exact solution of a manufactured case; the pressure is zero.
#[derive(Clone, Copy)]
pub struct Exact {
    pub velocity: VelocityFn,
    /// `g[c][k] = ∂_k u_c`.
    pub gradient: GradientFn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    PeriodicSquare,
    CylinderChannel,
}

pub struct CaseSpec {
    pub id: CaseId,
    pub summary: &'static str,
    pub geometry: Geometry,
    pub defaults: SimConfig,
    pub exact: Option<Exact>,
}

impl CaseSpec {
    pub fn get(id: CaseId) -> CaseSpec {
        match id {
            CaseId::ShearLayer => shear_layer_case(),
            CaseId::Cylinder => cylinder_case(),
            CaseId::MmsNs => mms_ns_case(),
            CaseId::MmsLinear => mms_linear_case(),
        }
    }

    /// Boundary modes for the case's own mesh. Periodic geometries carry no
    /// boundary faces.
    pub fn default_bc(&self) -> BcMap {
        match self.geometry {
            Geometry::PeriodicSquare => BcMap::new(),
            Geometry::CylinderChannel => {
                let mut bc = BcMap::new();
                bc.insert(BoundaryTag::Inflow, BcMode::StrongDirichlet(vector_fn(|p, _| cylinder_inflow(p))));
                bc.insert(BoundaryTag::Wall, BcMode::no_slip());
                bc.insert(BoundaryTag::Cylinder, BcMode::no_slip());
                bc.insert(BoundaryTag::Outflow, BcMode::Neumann);
                bc
            }
        }
    }

    /// Data used when a config asks for `strong_dirichlet` on `tag`.
    pub fn dirichlet_data(&self, tag: BoundaryTag) -> VectorFn {
        match (self.id, tag) {
            (CaseId::Cylinder, BoundaryTag::Inflow) => vector_fn(|p, _| cylinder_inflow(p)),
            (_, _) => match self.exact {
                Some(e) => vector_fn(e.velocity),
                None => vector_fn(|_, _| [0.0, 0.0]),
            },
        }
    }

    /// Body force for viscosity `mu`; `None` for the benchmarks.
    pub fn forcing(&self, mu: f64) -> Option<VectorFn> {
        match self.id {
            CaseId::MmsNs => Some(vector_fn(move |p, t| mms_ns_forcing(p, t, mu))),
            CaseId::MmsLinear => Some(vector_fn(|p, _| mms_linear_forcing(p, MMS_LINEAR_SIGMA))),
            _ => None,
        }
    }

    /// Initial velocity before projection. For the cylinder the Stokes
    /// initial state is computed by the runner instead.
    pub fn initial(&self) -> VectorFn {
        match self.id {
            CaseId::ShearLayer => vector_fn(|p, _| shear_layer_velocity(p)),
            CaseId::MmsNs => vector_fn(mms_ns_velocity),
            _ => vector_fn(|_, _| [0.0, 0.0]),
        }
    }
}

pub fn shear_layer_velocity(p: Point) -> [f64; 2] {
    let [x, y] = p;
    let ux = if y <= PI {
        ((y - 0.5 * PI) / SHEAR_RHO).tanh()
    } else {
        ((1.5 * PI - y) / SHEAR_RHO).tanh()
    };
    [ux, SHEAR_DELTA_PERT * x.sin()]
}

pub fn shear_layer_case() -> CaseSpec {
    CaseSpec {
        id: CaseId::ShearLayer,
        summary: "double shear layer on the periodic square (0, 2pi)^2, inviscid",
        geometry: Geometry::PeriodicSquare,
        defaults: SimConfig::defaults(CaseId::ShearLayer),
        exact: None,
    }
}

pub fn cylinder_inflow(p: Point) -> [f64; 2] {
    [1.5 - 6.0 * p[1] * p[1], 0.0]
}

pub fn cylinder_case() -> CaseSpec {
    CaseSpec {
        id: CaseId::Cylinder,
        summary: "channel (-1/2, 2) x (-1/2, 1/2) past a cylinder of radius 1/10, Stokes start",
        geometry: Geometry::CylinderChannel,
        defaults: SimConfig::defaults(CaseId::Cylinder),
        exact: None,
    }
}

fn mms_ns_g(t: f64) -> f64 {
    (-0.25 * t).exp()
}

pub fn mms_ns_velocity(p: Point, t: f64) -> [f64; 2] {
    let g = mms_ns_g(t);
    [g * p[1].cos(), g * p[0].sin()]
}

pub fn mms_ns_gradient(p: Point, t: f64) -> [[f64; 2]; 2] {
    let g = mms_ns_g(t);
    [[0.0, -g * p[1].sin()], [g * p[0].cos(), 0.0]]
}

/// `∂t u + (u·∇)u − μΔu` for the exact solution.
pub fn mms_ns_forcing(p: Point, t: f64, mu: f64) -> [f64; 2] {
    let [x, y] = p;
    let g = mms_ns_g(t);
    let lin = g * (mu - 0.25);
    [
        lin * y.cos() - g * g * x.sin() * y.sin(),
        lin * x.sin() + g * g * x.cos() * y.cos(),
    ]
}

pub fn mms_ns_case() -> CaseSpec {
    CaseSpec {
        id: CaseId::MmsNs,
        summary: "manufactured Navier-Stokes solution exp(-t/4) (cos y, sin x), zero pressure",
        geometry: Geometry::PeriodicSquare,
        defaults: SimConfig::defaults(CaseId::MmsNs),
        exact: Some(Exact {
            velocity: mms_ns_velocity,
            gradient: mms_ns_gradient,
        }),
    }
}

pub fn mms_linear_beta(p: Point) -> [f64; 2] {
    [p[1].cos(), p[0].sin()]
}

pub fn mms_linear_velocity(p: Point, _t: f64) -> [f64; 2] {
    [p[1].sin(), p[0].cos()]
}

pub fn mms_linear_gradient(p: Point, _t: f64) -> [[f64; 2]; 2] {
    [[0.0, p[1].cos()], [-p[0].sin(), 0.0]]
}

/// `(β·∇)u + σu` for the exact solution.
pub fn mms_linear_forcing(p: Point, sigma: f64) -> [f64; 2] {
    let [x, y] = p;
    [
        x.sin() * y.cos() + sigma * y.sin(),
        -x.sin() * y.cos() + sigma * x.cos(),
    ]
}

pub fn mms_linear_case() -> CaseSpec {
    CaseSpec {
        id: CaseId::MmsLinear,
        summary: "steady linear transport-reaction model, beta = (cos y, sin x), sigma = 4",
        geometry: Geometry::PeriodicSquare,
        defaults: SimConfig::defaults(CaseId::MmsLinear),
        exact: Some(Exact {
            velocity: mms_linear_velocity,
            gradient: mms_linear_gradient,
        }),
    }
}

/// Finite-difference residual of the manufactured PDE at `(p, t)`,
/// with the case's forcing. Zero pressure, so only velocity terms appear.
pub fn pde_residual(id: CaseId, p: Point, t: f64, mu: f64) -> f64 {
    const H: f64 = 1e-4;
    let shift = |dx: f64, dy: f64| [p[0] + dx, p[1] + dy];
    let (u, f): (Box<dyn Fn(Point, f64) -> [f64; 2]>, [f64; 2]) = match id {
        CaseId::MmsNs => (Box::new(mms_ns_velocity), mms_ns_forcing(p, t, mu)),
        CaseId::MmsLinear => (Box::new(mms_linear_velocity), mms_linear_forcing(p, MMS_LINEAR_SIGMA)),
        _ => return 0.0,
    };
    let u0 = u(p, t);
    let (xp, xm, yp, ym) = (u(shift(H, 0.0), t), u(shift(-H, 0.0), t), u(shift(0.0, H), t), u(shift(0.0, -H), t));
    let mut r = [0.0; 2];
    for c in 0..2 {
        let dx = (xp[c] - xm[c]) / (2.0 * H);
        let dy = (yp[c] - ym[c]) / (2.0 * H);
        r[c] = match id {
            CaseId::MmsNs => {
                let dt = (u(p, t + H)[c] - u(p, t - H)[c]) / (2.0 * H);
                let lap = (xp[c] + xm[c] + yp[c] + ym[c] - 4.0 * u0[c]) / (H * H);
                dt + u0[0] * dx + u0[1] * dy - mu * lap
            }
            _ => {
                let b = mms_linear_beta(p);
                b[0] * dx + b[1] * dy + MMS_LINEAR_SIGMA * u0[c]
            }
        } - f[c];
    }
    r[0].abs().max(r[1].abs())
}
