//! From a [`SimConfig`] to a finished run.

use std::time::Instant;

use crate::assembly::{self, FormParams};
use crate::cases::{CaseSpec, Geometry, MMS_LINEAR_SIGMA, PERIODIC_SIDE};
use crate::config::{BcChoice, CaseId, SimConfig};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::mesh::{
    build_periodicity, build_union_jack, channel_with_cylinder, import_mesh, macro_refine_with, Axis, CylinderChannel,
    Mesh, Rect, TriangleSplit,
};
use crate::solver::{self, ReportRow, RunFlag, RunReport, RunSetup, SaddleSystem, Snapshot, StepOptions, TimeState};
use crate::spaces::{build_system, interpolate, project_divergence_free, BcMode, FESystem, Field, VectorFn};

/// A configured case ready to run.
pub struct Prepared {
    pub config: SimConfig,
    pub case: CaseSpec,
    pub system: FESystem,
    pub params: FormParams,
    pub forcing: Option<VectorFn>,
    pub options: StepOptions,
}

/// Mesh for a config: the case geometry at `resolution`, or `mesh_file`
/// macro-refined with the 4-triangle split.
pub fn build_mesh(config: &SimConfig, case: &CaseSpec) -> Result<Mesh> {
    if let Some(path) = &config.mesh_file {
        let text = std::fs::read_to_string(path)?;
        return macro_refine_with(&import_mesh(&text)?, TriangleSplit::Red);
    }
    match case.geometry {
        Geometry::PeriodicSquare => {
            let n = config.resolution;
            let m = build_union_jack(n, n, Rect::new(0.0, PERIODIC_SIDE, 0.0, PERIODIC_SIDE))?;
            build_periodicity(m, &[Axis::X, Axis::Y])
        }
        Geometry::CylinderChannel => {
            let coarse = channel_with_cylinder(&CylinderChannel {
                resolution: config.resolution,
                ..CylinderChannel::default()
            })?;
            macro_refine_with(&coarse, TriangleSplit::Red)
        }
    }
}

/// Viscosity actually used: for the manufactured Navier-Stokes case it is
/// `min(mu, u_char * h)` on the given mesh.
pub fn effective_mu(config: &SimConfig, mesh: &Mesh) -> f64 {
    match config.case {
        CaseId::MmsNs => config.mu.min(config.u_char * mesh.h()),
        _ => config.mu,
    }
}

pub fn prepare(config: &SimConfig) -> Result<Prepared> {
    config.validate()?;
    let case = CaseSpec::get(config.case);
    let mesh = build_mesh(config, &case)?;
    let mut bc = case.default_bc();
    for (&tag, &choice) in &config.bc {
        let mode = match choice {
            BcChoice::StrongDirichlet => BcMode::StrongDirichlet(case.dirichlet_data(tag)),
            BcChoice::NormalOnly => BcMode::NormalOnly,
            BcChoice::Neumann => BcMode::Neumann,
            BcChoice::Periodic => BcMode::Periodic,
        };
        bc.insert(tag, mode);
    }
    // drop modes for tags that this mesh does not carry
    let tags = mesh.boundary_tags();
    bc.retain(|t, _| tags.contains(t));
    let mu = effective_mu(config, &mesh);
    let system = build_system(mesh, bc)?;
    let params = FormParams {
        mu,
        gamma: config.gamma,
        gamma0: config.gamma0,
        gamma1: config.gamma1,
        u_char: config.u_char,
    };
    params.validate()?;
    Ok(Prepared {
        config: config.clone(),
        forcing: case.forcing(mu),
        case,
        system,
        params,
        options: StepOptions {
            linearization: config.linearization,
            convection: true,
        },
    })
}

/// Steady Stokes state with unit viscosity and the boundary data at `t`.
pub fn stokes_state(system: &FESystem, t: f64) -> Result<Field> {
    let rhs = assembly::assemble_rhs(system, &|_, _| [0.0, 0.0], t);
    let sys = SaddleSystem {
        a: assembly::assemble_viscous(system, 1.0),
        d: assembly::assemble_divergence(system),
        rhs_u: rhs.coeffs,
        rhs_p: vec![0.0; system.n_pressure()],
    };
    Ok(solver::solve_saddle(system, &sys)?.0)
}

impl Prepared {
    /// Initial velocity: the divergence-free projection of the case data, or
    /// the Stokes state for the cylinder.
    pub fn initial_velocity(&self) -> Result<Field> {
        match self.case.id {
            CaseId::Cylinder => stokes_state(&self.system, 0.0),
            _ => {
                let f = self.case.initial();
                project_divergence_free(&self.system, |p| f(p, 0.0), 0.0)
            }
        }
    }

    pub fn setup(&self, initial: Field) -> RunSetup<'_> {
        RunSetup {
            system: &self.system,
            params: self.params,
            dt: self.config.dt,
            t_end: self.config.t_end,
            output_every: self.config.output_every,
            options: self.options,
            forcing: self.forcing.clone(),
            initial,
        }
    }

    /// Time-dependent run, or the single steady solve of the linear model.
    pub fn run(&self, observer: &mut dyn FnMut(&Snapshot<'_>)) -> Result<RunReport> {
        if self.case.id == CaseId::MmsLinear {
            return self.run_linear_model(observer);
        }
        let initial = self.initial_velocity()?;
        solver::run(&self.setup(initial), observer)
    }

    /// Discrete solution of the linear model problem.
    pub fn solve_linear_model(&self) -> Result<(Field, Field)> {
        let beta = interpolate(&self.system, |p, _| crate::cases::mms_linear_beta(p), 0.0);
        let forcing = self
            .forcing
            .clone()
            .ok_or_else(|| Error::InvalidArgument("linear model needs a forcing".into()))?;
        solver::solve_linear_model(&self.system, &beta, MMS_LINEAR_SIGMA, &self.params, &|p| forcing(p, 0.0))
    }

    fn run_linear_model(&self, observer: &mut dyn FnMut(&Snapshot<'_>)) -> Result<RunReport> {
        let start = Instant::now();
        let (u, p) = self.solve_linear_model()?;
        let beta = interpolate(&self.system, |p, _| crate::cases::mms_linear_beta(p), 0.0);
        let (div_weak, div_pointwise) = diagnostics::divergence_norms(&self.system, &u);
        let stab = diagnostics::stab_seminorm(&self.system, &u, &beta, &self.params)?;
        observer(&Snapshot {
            t: 0.0,
            step_index: 0,
            u: &u,
            p: &p,
        });
        let row = ReportRow {
            t: 0.0,
            energy: diagnostics::kinetic_energy(&self.system, &u),
            max_vorticity: diagnostics::max_vorticity(&self.system, &u),
            div_weak,
            div_pointwise,
            stab_seminorm: stab,
            flag: RunFlag::Ok,
        };
        Ok(RunReport {
            rows: vec![row],
            steps: Vec::new(),
            flag: RunFlag::Ok,
            instability_time: None,
            stab_time_integral: 0.0,
            final_state: TimeState::initial(u, p),
            wall_time: start.elapsed(),
        })
    }
}

pub fn run_simulation(config: &SimConfig) -> Result<RunReport> {
    prepare(config)?.run(&mut |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn zero_steps_gives_initial_row_only() {
        let c = parse_config("case = shear_layer\nresolution = 8\nt_end = 0").unwrap();
        let r = run_simulation(&c).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.steps.is_empty());
        assert_eq!(r.flag, RunFlag::Ok);
        assert!(r.rows[0].energy > 0.0);
    }

    #[test]
    fn mms_ns_viscosity_follows_mesh() {
        let c = parse_config("case = mms_ns\nresolution = 8").unwrap();
        let p = prepare(&c).unwrap();
        assert!((p.params.mu - p.system.mesh().h()).abs() < 1e-15);
        let c = parse_config("case = mms_ns\nresolution = 8\nmu = 0.01").unwrap();
        assert_eq!(prepare(&c).unwrap().params.mu, 0.01);
    }

    #[test]
    fn cylinder_stokes_start_meets_inflow() {
        let c = parse_config("case = cylinder\nresolution = 6\nt_end = 0").unwrap();
        let p = prepare(&c).unwrap();
        let u = p.initial_velocity().unwrap();
        let (weak, _) = diagnostics::divergence_norms(&p.system, &u);
        assert!(weak < 1e-9 * (1.0 + diagnostics::gradient_norm(&p.system, &u)));
        for (dof, v) in p.system.constraint_values(0.0) {
            assert_eq!(u.coeffs[dof], v);
        }
        assert!(u.max_abs() >= 1.5 - 1e-12, "{}", u.max_abs());
    }
}
