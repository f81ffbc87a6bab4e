//! Command line front end: `run`, `converge`, `validate`, `info`.
//!
//! Exit codes: 0 success, 1 instability abort or failed check, 2 usage or
//! input error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{parse_config, CaseId, SimConfig};
use crate::error::{Error, Result};
use crate::output;
use crate::solver::RunFlag;
use crate::{cases, simulation, study, validate};

#[derive(Parser, Debug)]
#[command(name = "smagfem", version, about = "Smagorinsky-stabilized macro-element flow solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for assembly.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Single-threaded, bit-reproducible mode.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one simulation and write CSV and VTK output.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Case to run with its defaults when no config is given.
        #[arg(long)]
        case: Option<CaseId>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mesh-sequence study for a manufactured case.
    Converge {
        #[arg(long, default_value = "mms_linear")]
        case: CaseId,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Property suites for the tensor identities and the assembled forms.
    Validate,
    /// List the built-in cases.
    Info,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Sets the assembly pool size; `deterministic` forces one thread and a
/// sequential factorization.
pub fn configure_threads(threads: Option<usize>, deterministic: bool) {
    let n = if deterministic { Some(1) } else { threads };
    if let Some(n) = n {
        // a second call in the same process is a no-op
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    if deterministic {
        faer::set_global_parallelism(faer::Par::Seq);
    }
}

/// Output directory: `SMAGFEM_OUT`, then `--out`, then the config value.
fn out_dir(flag: Option<PathBuf>, config: &SimConfig) -> PathBuf {
    std::env::var_os("SMAGFEM_OUT")
        .map(PathBuf::from)
        .or(flag)
        .unwrap_or_else(|| config.out_dir.clone())
}

fn load_config(path: Option<&Path>, case: Option<CaseId>) -> Result<SimConfig> {
    match (path, case) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p)?;
            let c = parse_config(&text)?;
            if let Some(id) = case {
                if id != c.case {
                    return Err(Error::InvalidArgument(format!("--case {id} disagrees with config case {}", c.case)));
                }
            }
            Ok(c)
        }
        (None, Some(id)) => Ok(SimConfig::defaults(id)),
        (None, None) => Err(Error::InvalidArgument("run needs --config or --case".into())),
    }
}

fn cmd_run(config: Option<PathBuf>, case: Option<CaseId>, out: Option<PathBuf>) -> Result<i32> {
    let mut config = load_config(config.as_deref(), case)?;
    config.out_dir = out_dir(out, &config);
    let prepared = simulation::prepare(&config)?;
    println!(
        "{}: {} velocity dofs, {} pressures, dt {}, t_end {}",
        config.case,
        prepared.system.n_velocity(),
        prepared.system.n_pressure(),
        config.dt,
        config.t_end
    );
    let dir = config.out_dir.clone();
    std::fs::create_dir_all(&dir)?;
    let mut write_error = None;
    let report = prepared.run(&mut |snap| {
        let path = dir.join(format!("{}_{:06}.vtk", config.case, snap.step_index));
        if let Err(e) = output::write_snapshot(&path, &prepared.system, snap.u, snap.p) {
            write_error.get_or_insert(e);
        }
        println!("  t = {:.4}", snap.t);
    })?;
    if let Some(e) = write_error {
        return Err(e);
    }
    let csv = dir.join(format!("{}.csv", config.case));
    output::write_timeseries(&csv, &report)?;
    output::write_atomic(&dir.join(format!("{}.cfg", config.case)), &crate::config::serialize_config(&config))?;
    let last = report.rows.last().expect("report has the initial row");
    println!(
        "{} at t = {:.4}: energy {:.6e}, max vorticity {:.4e}, stabilization integral {:.4e}, wall {:.2?}",
        report.flag, last.t, last.energy, last.max_vorticity, report.stab_time_integral, report.wall_time
    );
    println!("wrote {}", csv.display());
    Ok(match report.flag {
        RunFlag::Ok => EXIT_OK,
        RunFlag::Instability => EXIT_FAILURE,
    })
}

fn cmd_converge(case: CaseId, levels: usize, out: Option<PathBuf>) -> Result<i32> {
    let resolutions = study::level_resolutions(levels)?;
    let table = match case {
        CaseId::MmsLinear => study::linear_model_study(&resolutions, 1.0)?,
        CaseId::MmsNs => study::navier_stokes_study(&resolutions, &study::NsStudy::default())?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "converge needs a manufactured case, got {other}"
            )))
        }
    };
    println!("{:>6} {:>12} {:>14} {:>14}", "n", "h", "L2 error", "H1 error");
    for l in &table.levels {
        println!("{:>6} {:>12.5e} {:>14.6e} {:>14.6e}", l.resolution, l.h, l.l2, l.h1);
    }
    println!("L2 slope {:.4}", table.l2_slope);
    println!("H1 slope {:.4}", table.h1_slope);
    if let Some(dir) = std::env::var_os("SMAGFEM_OUT").map(PathBuf::from).or(out) {
        let path = dir.join(format!("{case}_convergence.csv"));
        output::write_atomic(&path, &table.to_csv())?;
        println!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}

fn cmd_validate() -> Result<i32> {
    let results = validate::run_all(0);
    let mut ok = true;
    for r in &results {
        println!("{} {:<28} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        ok &= r.passed;
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_info() -> i32 {
    for id in CaseId::ALL {
        let c = cases::CaseSpec::get(id);
        let d = &c.defaults;
        println!(
            "{:<12} {}\n{:<12} resolution {}, mu {}, gamma {}, dt {}, t_end {}",
            id.name(),
            c.summary,
            "",
            d.resolution,
            d.mu,
            d.gamma,
            d.dt,
            d.t_end
        );
    }
    EXIT_OK
}

pub fn execute(cli: Cli) -> i32 {
    configure_threads(cli.threads, cli.deterministic);
    let result = match cli.command {
        Command::Run { config, case, out } => cmd_run(config, case, out),
        Command::Converge { case, levels, out } => cmd_converge(case, levels, out),
        Command::Validate => cmd_validate(),
        Command::Info => Ok(cmd_info()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } | Error::InvalidArgument(_) | Error::Io(_) | Error::MeshParse { .. } => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            }
        }
    }
}
