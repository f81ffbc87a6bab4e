//! Mesh-sequence studies for the manufactured cases.

use std::fmt::Write as _;

use crate::cases::{mms_linear_gradient, mms_linear_velocity, mms_ns_gradient, mms_ns_velocity};
use crate::config::{CaseId, SimConfig};
use crate::diagnostics::{self, convergence_slope};
use crate::error::{Error, Result};
use crate::output::timeseries_string;
use crate::simulation::prepare;
use crate::solver::{Linearization, RunFlag};

#[derive(Clone, Debug)]
pub struct LevelResult {
    pub resolution: usize,
    pub h: f64,
    pub dt: f64,
    pub mu: f64,
    pub l2: f64,
    pub h1: f64,
    /// `max ‖Bu‖ / (1 + ‖∇u‖)` over the stored states.
    pub max_divergence_ratio: f64,
    /// CSV time series of the level's run.
    pub series: String,
}

#[derive(Clone, Debug)]
pub struct StudyTable {
    pub case: CaseId,
    pub levels: Vec<LevelResult>,
    pub l2_slope: f64,
    pub h1_slope: f64,
}

impl StudyTable {
    fn new(case: CaseId, levels: Vec<LevelResult>) -> Result<Self> {
        let hs: Vec<f64> = levels.iter().map(|l| l.h).collect();
        let l2: Vec<f64> = levels.iter().map(|l| l.l2).collect();
        let h1: Vec<f64> = levels.iter().map(|l| l.h1).collect();
        Ok(Self {
            case,
            l2_slope: convergence_slope(&hs, &l2)?,
            h1_slope: convergence_slope(&hs, &h1)?,
            levels,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("resolution,h,dt,mu,l2,h1,max_divergence_ratio\n");
        for l in &self.levels {
            let _ = writeln!(
                s,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                l.resolution, l.h, l.dt, l.mu, l.l2, l.h1, l.max_divergence_ratio
            );
        }
        let _ = writeln!(s, "# l2_slope {:.16e}", self.l2_slope);
        let _ = writeln!(s, "# h1_slope {:.16e}", self.h1_slope);
        s
    }
}

/// `8, 16, 32, ...` macro cells per side.
pub fn level_resolutions(levels: usize) -> Result<Vec<usize>> {
    if !(2..=7).contains(&levels) {
        return Err(Error::InvalidArgument(format!("levels must be in 2..=7, got {levels}")));
    }
    Ok((0..levels).map(|k| 8 << k).collect())
}

/// Steady linear model at each resolution.
pub fn linear_model_study(resolutions: &[usize], gamma: f64) -> Result<StudyTable> {
    let mut levels = Vec::new();
    for &n in resolutions {
        let mut config = SimConfig::defaults(CaseId::MmsLinear);
        config.resolution = n;
        config.gamma = gamma;
        let prepared = prepare(&config)?;
        let report = prepared.run(&mut |_| {})?;
        let u = &report.final_state.u_prev;
        let (l2, h1) = diagnostics::error_norms(&prepared.system, u, &mms_linear_velocity, &mms_linear_gradient, 0.0);
        let row = &report.rows[0];
        levels.push(LevelResult {
            resolution: n,
            h: prepared.system.mesh().h(),
            dt: 0.0,
            mu: 0.0,
            l2,
            h1,
            max_divergence_ratio: row.div_weak / (1.0 + diagnostics::gradient_norm(&prepared.system, u)),
            series: timeseries_string(Some(&report)),
        });
    }
    StudyTable::new(CaseId::MmsLinear, levels)
}

/// Parameters of the Navier-Stokes study. The viscosity is `u_char * h`
/// and the step `dt = t_end / ceil(t_end / (courant * h))`.
#[derive(Clone, Copy, Debug)]
pub struct NsStudy {
    pub gamma: f64,
    pub t_end: f64,
    pub courant: f64,
    pub linearization: Linearization,
}

impl Default for NsStudy {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            t_end: 0.5,
            courant: 0.08,
            linearization: Linearization::Extrapolated,
        }
    }
}

pub fn navier_stokes_study(resolutions: &[usize], study: &NsStudy) -> Result<StudyTable> {
    let mut levels = Vec::new();
    for &n in resolutions {
        let mut config = SimConfig::defaults(CaseId::MmsNs);
        config.resolution = n;
        config.gamma = study.gamma;
        config.gamma0 = 0.0;
        config.gamma1 = 0.0;
        config.t_end = study.t_end;
        config.linearization = study.linearization;
        let h = crate::simulation::build_mesh(&config, &crate::cases::CaseSpec::get(CaseId::MmsNs))?.h();
        config.mu = config.u_char * h;
        let steps = (study.t_end / (study.courant * h)).ceil().max(1.0);
        config.dt = study.t_end / steps;
        config.output_every = 1;
        let prepared = prepare(&config)?;
        let report = prepared.run(&mut |_| {})?;
        if report.flag == RunFlag::Instability {
            return Err(Error::Instability {
                t: report.instability_time.unwrap_or(0.0),
                reason: format!("manufactured run at resolution {n}"),
            });
        }
        let state = &report.final_state;
        let (l2, h1) = diagnostics::error_norms(&prepared.system, &state.u_prev, &mms_ns_velocity, &mms_ns_gradient, state.t);
        let ratio = report
            .steps
            .iter()
            .map(|s| s.div_weak / (1.0 + s.grad_norm))
            .fold(0.0, f64::max);
        levels.push(LevelResult {
            resolution: n,
            h,
            dt: config.dt,
            mu: prepared.params.mu,
            l2,
            h1,
            max_divergence_ratio: ratio,
            series: timeseries_string(Some(&report)),
        });
    }
    StudyTable::new(CaseId::MmsNs, levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_lists() {
        assert_eq!(level_resolutions(4).unwrap(), vec![8, 16, 32, 64]);
        assert!(level_resolutions(1).is_err());
    }

    #[test]
    fn coarse_linear_study_converges() {
        let t = linear_model_study(&[4, 8, 16], 1.0).unwrap();
        assert!(t.levels.windows(2).all(|w| w[1].l2 < w[0].l2));
        assert!(t.l2_slope > 1.2, "{}", t.l2_slope);
        assert!(t.to_csv().lines().count() == 6);
    }
}
