//! Run configuration: a JSON file and command-line flags merged into a
//! validated [`RunConfig`].

use std::fs;
use std::path::{Path, PathBuf};

use hdivflow_core::analysis::study::MESH_FAMILY;
use hdivflow_core::analysis::{ChannelConfig, StudyConfig};
use hdivflow_core::forms::{DEFAULT_C_F, DEFAULT_EPS_REG};
use hdivflow_core::quadrature::{DEFAULT_ORDER, MAX_ORDER};
use hdivflow_core::solver::{PicardConfig, TimeConfig};
use hdivflow_core::FluxParams;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Convergence,
    Channel,
    #[serde(alias = "single-run")]
    Run,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Convergence => "convergence",
            Command::Channel => "channel",
            Command::Run => "run",
        }
    }
}

/// A scalar or a list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Unresolved settings; every field is optional. The JSON keys match the
/// long flag names with `-` replaced by `_`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub command: Option<Command>,
    pub nu: Option<OneOrMany>,
    pub r: Option<OneOrMany>,
    pub eps_reg: Option<f64>,
    pub cf: Option<f64>,
    pub dt: Option<f64>,
    pub tf: Option<f64>,
    pub mesh: Option<PathBuf>,
    pub meshes: Option<usize>,
    pub full: Option<bool>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub quad_order: Option<usize>,
    pub picard_tol: Option<f64>,
    pub picard_max: Option<usize>,
}

impl Settings {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| e.in_file(path))
    }

    /// Fields set in `over` replace those of `self`.
    pub fn merge(self, over: Settings) -> Settings {
        Settings {
            command: over.command.or(self.command),
            nu: over.nu.or(self.nu),
            r: over.r.or(self.r),
            eps_reg: over.eps_reg.or(self.eps_reg),
            cf: over.cf.or(self.cf),
            dt: over.dt.or(self.dt),
            tf: over.tf.or(self.tf),
            mesh: over.mesh.or(self.mesh),
            meshes: over.meshes.or(self.meshes),
            full: over.full.or(self.full),
            out: over.out.or(self.out),
            jobs: over.jobs.or(self.jobs),
            quad_order: over.quad_order.or(self.quad_order),
            picard_tol: over.picard_tol.or(self.picard_tol),
            picard_max: over.picard_max.or(self.picard_max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub nu: Vec<f64>,
    pub r: Vec<f64>,
    pub eps_reg: f64,
    pub c_f: f64,
    /// `None` selects the command's own rule (`1.5 h` or 20 channel steps).
    pub dt: Option<f64>,
    pub t_final: f64,
    pub mesh: Option<PathBuf>,
    /// Number of meshes of the Test 1 family, coarsest first.
    pub meshes: usize,
    pub out: PathBuf,
    pub jobs: usize,
    pub quad_order: usize,
    pub picard: PicardConfig,
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Config(format!("{key} must be positive and finite (got {v})")))
    }
}

fn in_range(key: &str, v: usize, lo: usize, hi: usize) -> Result<usize> {
    if (lo..=hi).contains(&v) {
        Ok(v)
    } else {
        Err(Error::Config(format!("{key} must lie in {lo}..={hi} (got {v})")))
    }
}

impl RunConfig {
    /// Apply defaults for `command` and validate. A command in `settings`
    /// that disagrees with `command` is an error.
    pub fn resolve(command: Command, s: Settings) -> Result<Self> {
        if let Some(c) = s.command {
            if c != command {
                return Err(Error::Config(format!(
                    "command: config file is for '{}' but '{}' was requested",
                    c.name(),
                    command.name()
                )));
            }
        }
        let default_nu = match command {
            Command::Channel => 1e-2,
            _ => 1.0,
        };
        let nu = s.nu.map_or(vec![default_nu], |v| v.values());
        let r = s.r.map_or(vec![2.0], |v| v.values());
        if nu.is_empty() {
            return Err(Error::Config("nu: at least one value is required".into()));
        }
        if r.is_empty() {
            return Err(Error::Config("r: at least one value is required".into()));
        }
        for &v in &nu {
            positive("nu", v)?;
        }
        for &v in &r {
            if !(v.is_finite() && v > 1.0) {
                return Err(Error::Config(format!("r must exceed 1 (got {v})")));
            }
        }
        let eps_reg = s.eps_reg.unwrap_or(DEFAULT_EPS_REG);
        if !(eps_reg.is_finite() && eps_reg >= 0.0) {
            return Err(Error::Config(format!("eps_reg must be nonnegative (got {eps_reg})")));
        }
        let c_f = positive("cf", s.cf.unwrap_or(DEFAULT_C_F))?;
        let t_final = positive(
            "tf",
            s.tf.unwrap_or(match command {
                Command::Channel => 10.0,
                _ => 1.0,
            }),
        )?;
        let dt = s.dt.map(|v| positive("dt", v)).transpose()?;
        if let Some(dt) = dt {
            TimeConfig::with_dt(dt, t_final)
                .map_err(|_| Error::Config(format!("dt must divide tf into whole steps (dt {dt}, tf {t_final})")))?;
        }
        if s.mesh.is_some() && command != Command::Run {
            return Err(Error::Config(format!(
                "mesh: a mesh file is only used by the run command, not '{}'",
                command.name()
            )));
        }
        let family = MESH_FAMILY.len();
        let meshes = if s.full.unwrap_or(false) {
            family
        } else {
            let default = if command == Command::Run { 1 } else { 3 };
            in_range("meshes", s.meshes.unwrap_or(default), 1, family)?
        };
        let jobs = in_range("jobs", s.jobs.unwrap_or(1), 1, 1024)?;
        let quad_order = in_range("quad_order", s.quad_order.unwrap_or(DEFAULT_ORDER), 2, MAX_ORDER)?;
        let tol = positive("picard_tol", s.picard_tol.unwrap_or(PicardConfig::default().tol_rel))?;
        let max_iter = in_range("picard_max", s.picard_max.unwrap_or(PicardConfig::default().max_iter), 1, 100_000)?;
        let picard = PicardConfig::new(tol, max_iter)?;
        Ok(Self {
            command,
            nu,
            r,
            eps_reg,
            c_f,
            dt,
            t_final,
            mesh: s.mesh,
            meshes,
            out: s.out.unwrap_or_else(|| PathBuf::from("out")),
            jobs,
            quad_order,
            picard,
        })
    }

    /// All `(ν, r)` pairs, `ν` outermost.
    pub fn schedule(&self) -> Vec<(f64, f64)> {
        self.nu
            .iter()
            .flat_map(|&nu| self.r.iter().map(move |&r| (nu, r)))
            .collect()
    }

    pub fn params(&self, nu: f64, r: f64) -> Result<FluxParams> {
        Ok(FluxParams::with_regularization(nu, r, self.eps_reg)?)
    }

    pub fn study(&self, nu: f64, r: f64) -> StudyConfig {
        let mut c = StudyConfig::new(nu, r);
        c.eps_reg = self.eps_reg;
        c.c_f = self.c_f;
        c.t_final = self.t_final;
        c.meshes = MESH_FAMILY[..self.meshes].to_vec();
        c.quad_order = self.quad_order;
        c.picard = self.picard;
        c.dt = self.dt;
        c
    }

    pub fn channel(&self, nu: f64, r: f64) -> Result<ChannelConfig> {
        let mut c = ChannelConfig::new(r);
        c.nu = nu;
        c.eps_reg = self.eps_reg;
        c.c_f = self.c_f;
        c.t_final = self.t_final;
        if let Some(dt) = self.dt {
            c.steps = TimeConfig::with_dt(dt, self.t_final)?.steps;
        }
        c.quad_order = self.quad_order;
        c.picard = self.picard;
        Ok(c)
    }
}
