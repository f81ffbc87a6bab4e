//! Saddle-point solves and BDF time stepping.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::assembly::{self, FormParams};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::spaces::{FESystem, Field, FieldKind, VectorFn};
use crate::sparse::{CondensedLu, LuSolver, SparseOperator};

/// `[A, −Dᵀ; −D, 0] [u; p] = [rhs_u; −rhs_p]`, i.e. `A u − Dᵀp = rhs_u` and
/// `D u = rhs_p`. Entries of `rhs_u` on constrained DOFs are the prescribed
/// values.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    pub a: SparseOperator,
    pub d: SparseOperator,
    pub rhs_u: Vec<f64>,
    pub rhs_p: Vec<f64>,
}

/// Reduced system: constrained velocity rows are identity and their columns
/// are lifted; pinned pressures are removed.
fn reduce(system: &FESystem, sys: &SaddleSystem) -> (SparseOperator, Vec<f64>, Vec<Option<usize>>) {
    let nv = system.n_velocity();
    let np = system.n_pressure();
    assert_eq!((sys.a.nrows(), sys.a.ncols()), (nv, nv));
    assert_eq!((sys.d.nrows(), sys.d.ncols()), (np, nv));
    let mut pidx = vec![None; np];
    let mut next = nv;
    for (m, slot) in pidx.iter_mut().enumerate() {
        if !system.pinned_pressure().contains(&m) {
            *slot = Some(next);
            next += 1;
        }
    }
    let n = next;
    let free = system.free_mask();
    let mut b = vec![0.0; n];
    let mut trip = Vec::with_capacity(sys.a.nnz() + 2 * sys.d.nnz() + nv);
    for i in 0..nv {
        if !free[i] {
            trip.push((i, i, 1.0));
            b[i] = sys.rhs_u[i];
            continue;
        }
        b[i] = sys.rhs_u[i];
        for (j, v) in sys.a.row(i) {
            if free[j] {
                trip.push((i, j, v));
            } else {
                b[i] -= v * sys.rhs_u[j];
            }
        }
    }
    let dt = sys.d.transpose();
    for i in 0..nv {
        if !free[i] {
            continue;
        }
        for (m, v) in dt.row(i) {
            if let Some(k) = pidx[m] {
                trip.push((i, k, -v));
            }
        }
    }
    for m in 0..np {
        let Some(k) = pidx[m] else { continue };
        b[k] = -sys.rhs_p[m];
        for (j, v) in sys.d.row(m) {
            if free[j] {
                trip.push((k, j, -v));
            } else {
                b[k] += v * sys.rhs_u[j];
            }
        }
    }
    (SparseOperator::from_triplets(n, n, &trip), b, pidx)
}

fn singular_hint(system: &FESystem, err: Error) -> Error {
    match err {
        Error::Singular(msg) => {
            let cause = if system.pinned_pressure().is_empty() && !system.has_neumann() {
                "missing pressure pin"
            } else {
                "rank-deficient divergence block (undetected pressure mode) or singular velocity block"
            };
            Error::Singular(format!("{msg}; suspected cause: {cause}"))
        }
        other => other,
    }
}

/// The divergence rows of pinned pressures are left out of the reduced
/// system. They hold automatically only when the boundary data is
/// compatible with the detected pressure modes; this checks that they do.
fn check_dropped_rows(system: &FESystem, sys: &SaddleSystem, u: &[f64]) -> Result<()> {
    let pinned = system.pinned_pressure();
    if pinned.is_empty() {
        return Ok(());
    }
    let du = sys.d.matvec(u);
    let scale = sys.d.max_abs() * u.iter().fold(0.0f64, |m, v| m.max(v.abs())) + crate::sparse::norm2(&sys.rhs_p);
    let worst = pinned
        .iter()
        .map(|&m| (du[m] - sys.rhs_p[m]).abs())
        .fold(0.0f64, f64::max);
    if worst > 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Boundary(format!(
            "boundary data is incompatible with the {} pressure mode(s) of this mesh: \
             divergence residual {worst:e} on a pinned cell (a checkerboard mode needs \
             velocity data it annihilates, e.g. data vanishing at the cell corners)",
            system.pressure_modes().len()
        )));
    }
    Ok(())
}

/// Velocity node pairs of the reduced matrix, fewest couplings first. Free
/// nodes inside a macro element (the cell centres of a Union Jack mesh) come
/// out on top and are eliminated before the sparse LU.
fn condensation_candidates(system: &FESystem, k: &SparseOperator) -> Vec<[usize; 2]> {
    let free = system.free_mask();
    let mut nodes: Vec<(usize, usize)> = (0..system.n_nodes())
        .filter(|&n| free[2 * n] && free[2 * n + 1])
        .map(|n| (k.row(2 * n).count() + k.row(2 * n + 1).count(), n))
        .collect();
    nodes.sort_unstable();
    nodes.into_iter().map(|(_, n)| [2 * n, 2 * n + 1]).collect()
}

enum Factorization {
    Condensed(CondensedLu),
    Plain(LuSolver),
}

/// Direct saddle solver that keeps the symbolic factorization while the
/// reduced pattern stays the same.
#[derive(Default)]
pub struct SaddleSolver {
    lu: Option<Factorization>,
}

impl SaddleSolver {
    pub fn new() -> Self {
        Self::default()
    }

    fn matches(&self, k: &SparseOperator) -> bool {
        match &self.lu {
            Some(Factorization::Condensed(lu)) => lu.matches_pattern(k),
            Some(Factorization::Plain(lu)) => lu.matches_pattern(k),
            None => false,
        }
    }

    /// Factors `k` and solves; a failed condensed solve is repeated with the
    /// plain LU, which is then kept.
    fn factor_and_solve(&mut self, system: &FESystem, k: &SparseOperator, b: &[f64]) -> Result<Vec<f64>> {
        if !self.matches(k) {
            self.lu = Some(match CondensedLu::analyze(k, &condensation_candidates(system, k)) {
                Ok(lu) => Factorization::Condensed(lu),
                Err(_) => Factorization::Plain(LuSolver::analyze(k)?),
            });
        }
        if let Some(Factorization::Condensed(lu)) = &mut self.lu {
            match lu.factor(k).and_then(|_| lu.solve(b)) {
                Ok(x) => return Ok(x),
                Err(Error::Singular(_) | Error::Residual { .. }) => {
                    self.lu = Some(Factorization::Plain(LuSolver::analyze(k)?));
                }
                Err(e) => return Err(e),
            }
        }
        let Some(Factorization::Plain(lu)) = &mut self.lu else {
            unreachable!("plain factorization set above")
        };
        lu.factor(k)?;
        lu.solve(b)
    }

    pub fn solve(&mut self, system: &FESystem, sys: &SaddleSystem) -> Result<(Field, Field)> {
        let (k, b, pidx) = reduce(system, sys);
        let x = self.factor_and_solve(system, &k, &b).map_err(|e| singular_hint(system, e))?;
        let nv = system.n_velocity();
        check_dropped_rows(system, sys, &x[..nv])?;
        let u = Field::new(FieldKind::Velocity, x[..nv].to_vec());
        let p = Field::new(
            FieldKind::Pressure,
            pidx.iter().map(|k| k.map_or(0.0, |k| x[k])).collect(),
        );
        Ok((u, p))
    }
}

/// One-shot saddle solve. Pinned pressure DOFs come back as 0.
pub fn solve_saddle(system: &FESystem, sys: &SaddleSystem) -> Result<(Field, Field)> {
    SaddleSolver::new().solve(system, sys)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Linearization {
    /// `w = u^n`.
    Previous,
    /// `w = 2u^n − u^{n−1}` (falls back to `u^n` on the first step).
    Extrapolated,
}

impl Linearization {
    pub fn name(self) -> &'static str {
        match self {
            Linearization::Previous => "previous",
            Linearization::Extrapolated => "extrapolated",
        }
    }
}

impl fmt::Display for Linearization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Linearization {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "previous" => Ok(Linearization::Previous),
            "extrapolated" => Ok(Linearization::Extrapolated),
            _ => Err(format!("expected `previous` or `extrapolated`, got `{s}`")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TimeState {
    pub t: f64,
    pub step_index: usize,
    pub u_prev: Field,
    pub u_prevprev: Option<Field>,
    pub p_prev: Field,
}

impl TimeState {
    pub fn initial(u0: Field, p0: Field) -> Self {
        Self {
            t: 0.0,
            step_index: 0,
            u_prev: u0,
            u_prevprev: None,
            p_prev: p0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions {
    pub linearization: Linearization,
    /// Include `C(w)`; off for Stokes-type runs.
    pub convection: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            linearization: Linearization::Previous,
            convection: true,
        }
    }
}

/// Time stepper holding the state-independent operators and the saddle
/// factorization.
pub struct Stepper<'a> {
    system: &'a FESystem,
    params: FormParams,
    dt: f64,
    options: StepOptions,
    forcing: Option<VectorFn>,
    mass: SparseOperator,
    fixed: SparseOperator,
    divergence: SparseOperator,
    s1: SparseOperator,
    solver: SaddleSolver,
}

/// Result of one step: the new state and `uᵀ(S_smag(w) + S0(w) + S1)u`
/// at the new velocity.
pub struct StepResult {
    pub state: TimeState,
    pub stab_energy: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(
        system: &'a FESystem,
        params: FormParams,
        dt: f64,
        options: StepOptions,
        forcing: Option<VectorFn>,
    ) -> Result<Self> {
        params.validate()?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
        }
        let mass = assembly::assemble_mass(system);
        let (bc, s1) = assembly::assemble_nitsche(system, params.mu, params.gamma1, params.u_char);
        let fixed = assembly::assemble_viscous(system, params.mu)
            .add_scaled(1.0, &bc)
            .add_scaled(1.0, &s1);
        Ok(Self {
            system,
            params,
            dt,
            options,
            forcing,
            mass,
            fixed,
            divergence: assembly::assemble_divergence(system),
            s1,
            solver: SaddleSolver::new(),
        })
    }

    pub fn mass(&self) -> &SparseOperator {
        &self.mass
    }

    pub fn divergence(&self) -> &SparseOperator {
        &self.divergence
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances by one step of BDF `order` (1 or 2).
    pub fn step(&mut self, state: &TimeState, order: usize) -> Result<StepResult> {
        let (alpha0, hist) = match (order, &state.u_prevprev) {
            (1, _) => (1.0, state.u_prev.clone()),
            (2, Some(prev)) => (1.5, state.u_prev.combine(2.0, prev, -0.5)),
            (2, None) => {
                return Err(Error::InvalidArgument("BDF2 needs two history levels".into()));
            }
            _ => return Err(Error::InvalidArgument(format!("BDF order must be 1 or 2, got {order}"))),
        };
        let w = match (self.options.linearization, &state.u_prevprev) {
            (Linearization::Extrapolated, Some(prev)) => state.u_prev.combine(2.0, prev, -1.0),
            _ => state.u_prev.clone(),
        };
        let system = self.system;
        let p = &self.params;
        let mut stab = SparseOperator::zeros(system.n_velocity(), system.n_velocity());
        if p.gamma > 0.0 {
            stab = stab.add_scaled(1.0, &assembly::assemble_smagorinsky(system, &w, p.gamma));
        }
        if p.gamma0 > 0.0 {
            stab = stab.add_scaled(1.0, &assembly::assemble_jump_penalty(system, &w, p.gamma0, p.u_char)?);
        }
        let mut a = self
            .mass
            .scaled(alpha0 / self.dt)
            .add_scaled(1.0, &self.fixed)
            .add_scaled(1.0, &stab);
        if self.options.convection {
            a = a.add_scaled(1.0, &assembly::assemble_convection(system, &w));
        }

        let t_new = (state.step_index + 1) as f64 * self.dt;
        let mut rhs = self.mass.matvec(&hist.coeffs);
        rhs.iter_mut().for_each(|v| *v /= self.dt);
        if let Some(f) = &self.forcing {
            let load = crate::spaces::load_vector(system, &|x| f(x, t_new));
            rhs.iter_mut().zip(&load).for_each(|(r, l)| *r += l);
        }
        for (dof, v) in system.constraint_values(t_new) {
            rhs[dof] = v;
        }
        let sys = SaddleSystem {
            a,
            d: self.divergence.clone(),
            rhs_u: rhs,
            rhs_p: vec![0.0; system.n_pressure()],
        };
        let (u, pr) = self.solver.solve(system, &sys)?;
        if !u.is_finite() || !pr.is_finite() {
            return Err(Error::Instability {
                t: t_new,
                reason: "non-finite coefficients".into(),
            });
        }
        let stab_energy = stab.add_scaled(1.0, &self.s1).quadratic(&u.coeffs);
        Ok(StepResult {
            state: TimeState {
                t: t_new,
                step_index: state.step_index + 1,
                u_prev: u,
                u_prevprev: Some(state.u_prev.clone()),
                p_prev: pr,
            },
            stab_energy,
        })
    }
}

/// Single BDF step without keeping the operators around.
pub fn bdf_step(
    state: &TimeState,
    system: &FESystem,
    params: &FormParams,
    forcing: Option<VectorFn>,
    dt: f64,
    order: usize,
    options: StepOptions,
) -> Result<TimeState> {
    let mut stepper = Stepper::new(system, *params, dt, options, forcing)?;
    Ok(stepper.step(state, order)?.state)
}

/// Steady linear model problem: operator from
/// [`assembly::assemble_linear_model`] with the divergence constraint.
pub fn solve_linear_model(
    system: &FESystem,
    beta: &Field,
    sigma: f64,
    params: &FormParams,
    f: &dyn Fn(crate::mesh::Point) -> [f64; 2],
) -> Result<(Field, Field)> {
    let a = assembly::assemble_linear_model(system, beta, sigma, params)?;
    let rhs = assembly::assemble_rhs(system, &|x, _| f(x), 0.0);
    let sys = SaddleSystem {
        a,
        d: assembly::assemble_divergence(system),
        rhs_u: rhs.coeffs,
        rhs_p: vec![0.0; system.n_pressure()],
    };
    solve_saddle(system, &sys)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunFlag {
    Ok,
    Instability,
}

impl RunFlag {
    pub fn name(self) -> &'static str {
        match self {
            RunFlag::Ok => "OK",
            RunFlag::Instability => "INSTABILITY",
        }
    }
}

impl fmt::Display for RunFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One output row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportRow {
    pub t: f64,
    pub energy: f64,
    pub max_vorticity: f64,
    pub div_weak: f64,
    pub div_pointwise: f64,
    pub stab_seminorm: f64,
    pub flag: RunFlag,
}

/// Per-step monitor values (every step, not only output steps).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub energy: f64,
    pub div_weak: f64,
    pub grad_norm: f64,
    pub stab_seminorm: f64,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
    pub steps: Vec<StepRecord>,
    pub flag: RunFlag,
    /// Time of the step that triggered the abort.
    pub instability_time: Option<f64>,
    /// `Σ dt |u^{n+1}|_s²`.
    pub stab_time_integral: f64,
    pub final_state: TimeState,
    pub wall_time: Duration,
}

/// Everything a time-dependent run needs.
pub struct RunSetup<'a> {
    pub system: &'a FESystem,
    pub params: FormParams,
    pub dt: f64,
    pub t_end: f64,
    pub output_every: usize,
    pub options: StepOptions,
    pub forcing: Option<VectorFn>,
    pub initial: Field,
}

/// Energy growth over the initial value that counts as blow-up.
pub const INSTABILITY_FACTOR: f64 = 1e6;

/// State handed to the observer at output steps.
pub struct Snapshot<'a> {
    pub t: f64,
    pub step_index: usize,
    pub u: &'a Field,
    pub p: &'a Field,
}

/// BDF1 first step then BDF2 until `t_end`. Output rows are written at
/// `t = 0`, every `output_every` steps and at the final step.
pub fn run(setup: &RunSetup<'_>, observer: &mut dyn FnMut(&Snapshot<'_>)) -> Result<RunReport> {
    let start = Instant::now();
    let system = setup.system;
    let mut stepper = Stepper::new(system, setup.params, setup.dt, setup.options, setup.forcing.clone())?;
    let n_steps = (setup.t_end / setup.dt - 1e-9).ceil().max(0.0) as usize;
    let every = setup.output_every.max(1);

    let mut state = TimeState::initial(setup.initial.clone(), system.zero_pressure());
    let mass = stepper.mass().clone();
    let divergence = stepper.divergence().clone();
    let e0 = diagnostics::kinetic_energy_with(&mass, &state.u_prev);
    let row = |state: &TimeState, stab: f64, flag: RunFlag| {
        let (div_weak, div_pointwise) = diagnostics::divergence_norms_with(system, &divergence, &state.u_prev);
        ReportRow {
            t: state.t,
            energy: diagnostics::kinetic_energy_with(&mass, &state.u_prev),
            max_vorticity: diagnostics::max_vorticity(system, &state.u_prev),
            div_weak,
            div_pointwise,
            stab_seminorm: stab,
            flag,
        }
    };

    let mut rows = Vec::new();
    let mut steps = Vec::with_capacity(n_steps);
    let initial_stab = diagnostics::stab_seminorm(system, &state.u_prev, &state.u_prev, &setup.params)?;
    rows.push(row(&state, initial_stab, RunFlag::Ok));
    observer(&Snapshot {
        t: 0.0,
        step_index: 0,
        u: &state.u_prev,
        p: &state.p_prev,
    });

    let mut flag = RunFlag::Ok;
    let mut instability_time = None;
    let mut stab_integral = 0.0;
    for n in 0..n_steps {
        let order = if n == 0 { 1 } else { 2 };
        let result = match stepper.step(&state, order) {
            Ok(r) => r,
            Err(Error::Instability { t, .. }) => {
                flag = RunFlag::Instability;
                instability_time = Some(t);
                break;
            }
            Err(e) => return Err(e),
        };
        state = result.state;
        let energy = diagnostics::kinetic_energy_with(&mass, &state.u_prev);
        let stab = result.stab_energy.max(0.0).sqrt();
        stab_integral += setup.dt * result.stab_energy.max(0.0);
        let div_weak = crate::sparse::norm2(&divergence.matvec(&state.u_prev.coeffs));
        steps.push(StepRecord {
            t: state.t,
            energy,
            div_weak,
            grad_norm: diagnostics::gradient_norm(system, &state.u_prev),
            stab_seminorm: stab,
        });
        let blown = !energy.is_finite() || (e0 > 0.0 && energy > INSTABILITY_FACTOR * e0);
        if blown {
            flag = RunFlag::Instability;
            instability_time = Some(state.t);
            rows.push(row(&state, stab, RunFlag::Instability));
            break;
        }
        if (n + 1) % every == 0 || n + 1 == n_steps {
            rows.push(row(&state, stab, RunFlag::Ok));
            observer(&Snapshot {
                t: state.t,
                step_index: state.step_index,
                u: &state.u_prev,
                p: &state.p_prev,
            });
        }
    }
    Ok(RunReport {
        rows,
        steps,
        flag,
        instability_time,
        stab_time_integral: stab_integral,
        final_state: state,
        wall_time: start.elapsed(),
    })
}
