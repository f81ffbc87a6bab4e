//! Run configuration: flat `key = value` lines, `#` starts a comment.
//!
//! ```text
//! case = shear_layer
//! resolution = 64
//! gamma = 0.1
//! bc.wall = normal_only
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::BoundaryTag;
use crate::solver::Linearization;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    ShearLayer,
    Cylinder,
    MmsNs,
    MmsLinear,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [CaseId::ShearLayer, CaseId::Cylinder, CaseId::MmsNs, CaseId::MmsLinear];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::ShearLayer => "shear_layer",
            CaseId::Cylinder => "cylinder",
            CaseId::MmsNs => "mms_ns",
            CaseId::MmsLinear => "mms_linear",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        CaseId::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown case `{s}` (expected shear_layer, cylinder, mms_ns or mms_linear)"))
    }
}

/// Boundary mode as named in a config file. `strong_dirichlet` uses the
/// case's own boundary data for that tag (zero if it has none).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcChoice {
    StrongDirichlet,
    NormalOnly,
    Neumann,
    Periodic,
}

impl BcChoice {
    pub fn name(self) -> &'static str {
        match self {
            BcChoice::StrongDirichlet => "strong_dirichlet",
            BcChoice::NormalOnly => "normal_only",
            BcChoice::Neumann => "neumann",
            BcChoice::Periodic => "periodic",
        }
    }
}

impl FromStr for BcChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [
            BcChoice::StrongDirichlet,
            BcChoice::NormalOnly,
            BcChoice::Neumann,
            BcChoice::Periodic,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| format!("unknown boundary mode `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub case: CaseId,
    /// Macro cells per unit direction (structured cases) or cells across the
    /// channel height (cylinder).
    pub resolution: usize,
    pub mesh_file: Option<PathBuf>,
    pub mu: f64,
    pub gamma: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub u_char: f64,
    pub dt: f64,
    pub t_end: f64,
    pub output_every: usize,
    pub linearization: Linearization,
    pub bc: BTreeMap<BoundaryTag, BcChoice>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl SimConfig {
    /// Defaults of a case before any overrides.
    pub fn defaults(case: CaseId) -> Self {
        let base = SimConfig {
            case,
            resolution: 100,
            mesh_file: None,
            mu: 0.0,
            gamma: 0.0,
            gamma0: 0.0,
            gamma1: 0.0,
            u_char: 1.0,
            dt: 0.01,
            t_end: 12.0,
            output_every: 10,
            linearization: Linearization::Previous,
            bc: BTreeMap::new(),
            out_dir: PathBuf::from("out"),
            seed: 0,
        };
        match case {
            CaseId::ShearLayer => base,
            CaseId::Cylinder => SimConfig {
                resolution: 20,
                mu: 3e-4,
                t_end: 4.0,
                ..base
            },
            CaseId::MmsNs => SimConfig {
                resolution: 16,
                // per-level viscosity is min(mu, u_char * h)
                mu: 1.0,
                gamma: 1.0,
                dt: 0.05,
                t_end: 0.5,
                output_every: 1,
                linearization: Linearization::Extrapolated,
                ..base
            },
            CaseId::MmsLinear => SimConfig {
                resolution: 16,
                gamma: 1.0,
                t_end: 0.0,
                output_every: 1,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Error::Config {
            line: 0,
            key: key.into(),
            msg,
        };
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(bad("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(bad("t_end", format!("must be >= 0, got {}", self.t_end)));
        }
        for (key, v) in [
            ("mu", self.mu),
            ("gamma", self.gamma),
            ("gamma0", self.gamma0),
            ("gamma1", self.gamma1),
            ("u_char", self.u_char),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(bad(key, format!("must be finite and >= 0, got {v}")));
            }
        }
        if self.resolution < 1 {
            return Err(bad("resolution", "must be >= 1".into()));
        }
        if self.output_every < 1 {
            return Err(bad("output_every", "must be >= 1".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>().map_err(|e| Error::Config {
        line,
        key: key.into(),
        msg: format!("cannot parse `{raw}`: {e}"),
    })
}

/// Parses a config. `case` may appear anywhere; defaults come from it
/// (shear_layer if absent) and the remaining keys override them.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config {
                line: i + 1,
                key: line.into(),
                msg: "expected `key = value`".into(),
            });
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if entries.iter().any(|e| e.1 == k) {
            return Err(Error::Config {
                line: i + 1,
                key: k,
                msg: "duplicate key".into(),
            });
        }
        entries.push((i + 1, k, v));
    }
    let case = match entries.iter().find(|e| e.1 == "case") {
        Some((line, key, v)) => value::<CaseId>(*line, key, v)?,
        None => CaseId::ShearLayer,
    };
    let mut c = SimConfig::defaults(case);
    for (line, key, v) in &entries {
        let (line, key) = (*line, key.as_str());
        match key {
            "case" => {}
            "resolution" => c.resolution = value(line, key, v)?,
            "mesh_file" => c.mesh_file = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            "mu" => c.mu = value(line, key, v)?,
            "gamma" => c.gamma = value(line, key, v)?,
            "gamma0" => c.gamma0 = value(line, key, v)?,
            "gamma1" => c.gamma1 = value(line, key, v)?,
            "u_char" => c.u_char = value(line, key, v)?,
            "dt" => c.dt = value(line, key, v)?,
            "t_end" => c.t_end = value(line, key, v)?,
            "output_every" => c.output_every = value(line, key, v)?,
            "linearization" => c.linearization = value(line, key, v)?,
            "out_dir" => c.out_dir = PathBuf::from(v),
            "seed" => c.seed = value(line, key, v)?,
            _ => {
                if let Some(tag) = key.strip_prefix("bc.") {
                    let tag: BoundaryTag = value(line, key, tag)?;
                    c.bc.insert(tag, value(line, key, v)?);
                } else {
                    return Err(Error::Config {
                        line,
                        key: key.into(),
                        msg: "unknown key".into(),
                    });
                }
            }
        }
        if let Err(Error::Config { key: bad, msg, .. }) = c.validate() {
            if bad == key {
                return Err(Error::Config { line, key: bad, msg });
            }
        }
    }
    c.validate()?;
    Ok(c)
}

/// Writes every key; `parse_config(&serialize_config(c)) == c`.
pub fn serialize_config(c: &SimConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "case = {}", c.case);
    let _ = writeln!(s, "resolution = {}", c.resolution);
    if let Some(p) = &c.mesh_file {
        let _ = writeln!(s, "mesh_file = {}", p.display());
    }
    for (k, v) in [
        ("mu", c.mu),
        ("gamma", c.gamma),
        ("gamma0", c.gamma0),
        ("gamma1", c.gamma1),
        ("u_char", c.u_char),
        ("dt", c.dt),
        ("t_end", c.t_end),
    ] {
        let _ = writeln!(s, "{k} = {v:?}");
    }
    let _ = writeln!(s, "output_every = {}", c.output_every);
    let _ = writeln!(s, "linearization = {}", c.linearization);
    for (tag, mode) in &c.bc {
        let _ = writeln!(s, "bc.{} = {}", tag, mode.name());
    }
    let _ = writeln!(s, "out_dir = {}", c.out_dir.display());
    let _ = writeln!(s, "seed = {}", c.seed);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_shear_layer() {
        let c = parse_config("case=shear_layer").unwrap();
        assert_eq!(c.mu, 0.0);
        assert_eq!(c.dt, 0.01);
        assert_eq!(c.resolution, 100);
        assert_eq!(c.gamma, 0.0);
    }

    #[test]
    fn overrides_and_comments() {
        let c = parse_config("# stable run\ncase = shear_layer\ngamma=0.1  # Smagorinsky\nbc.wall = normal_only\n").unwrap();
        assert_eq!(c.gamma, 1e-1);
        assert_eq!(c.bc[&BoundaryTag::Wall], BcChoice::NormalOnly);
        let c = parse_config("case = cylinder\nmu = 1e-6").unwrap();
        assert_eq!(c.mu, 1e-6);
        assert_eq!(c.resolution, 20);
    }

    #[test]
    fn errors_name_key_and_line() {
        match parse_config("case=shear_layer\ndt=-1") {
            Err(Error::Config { line, key, .. }) => assert_eq!((line, key.as_str()), (2, "dt")),
            other => panic!("{other:?}"),
        }
        match parse_config("\n\ncolour = blue") {
            Err(Error::Config { line, key, .. }) => assert_eq!((line, key.as_str()), (3, "colour")),
            other => panic!("{other:?}"),
        }
        assert!(parse_config("case = tunnel").is_err());
        assert!(parse_config("gamma = lots").is_err());
        assert!(parse_config("gamma").is_err());
        assert!(parse_config("dt = 0.1\ndt = 0.2").is_err());
        assert!(parse_config("bc.lid = neumann").is_err());
    }

    #[test]
    fn round_trip_of_defaults() {
        for case in CaseId::ALL {
            let c = SimConfig::defaults(case);
            assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
        }
    }
}
