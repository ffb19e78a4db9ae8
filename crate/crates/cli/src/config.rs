//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored, and ` #` starts a
//! trailing comment. Every key is
//! optional; missing keys keep the reproduce-paper defaults. The same
//! format, with a `config.` prefix, is echoed into the run manifest.

use std::f64::consts::FRAC_PI_6;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;
use walker_core::dmoc::{OCProblem, PhasePlan, SolverConfig, WarmStart};
use walker_core::model::{Config, ReferenceTrajectory, ReferenceXForm, WalkerParams};
use walker_core::{IntegratorConfig, WalkerError};

/// Prefix of echoed configuration keys in a manifest.
pub const MANIFEST_PREFIX: &str = "config.";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown field `{field}`")]
    UnknownField { line: usize, field: String },
    #[error("line {line}: field `{field}`: {reason}")]
    BadValue { line: usize, field: String, reason: String },
    #[error("field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl From<WalkerError> for ConfigError {
    fn from(e: WalkerError) -> Self {
        let field = match &e {
            WalkerError::InvalidParameter { name, .. } => (*name).to_string(),
            _ => "config".to_string(),
        };
        ConfigError::Invalid { field, reason: e.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Optimize,
    ReproducePaper,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Optimize => "optimize",
            Self::ReproducePaper => "reproduce-paper",
        }
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "simulate" => Ok(Self::Simulate),
            "optimize" => Ok(Self::Optimize),
            "reproduce-paper" => Ok(Self::ReproducePaper),
            _ => Err("expected simulate, optimize or reproduce-paper".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub m1: f64,
    pub m2: f64,
    pub ell: f64,
    pub g: f64,
    pub kappa: f64,
    pub a: f64,
    pub alpha: f64,
    pub h: f64,
    pub n_steps: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub impact_cap: usize,
    pub epsilon: f64,
    pub eta: f64,
    pub rho: f64,
    pub x0: f64,
    pub theta0: f64,
    pub xdot0: f64,
    pub thetadot0: f64,
    pub enforce_initial_velocity: bool,
    pub q_final: Option<(f64, f64)>,
    pub qdot_final: Option<(f64, f64)>,
    pub ref_foot_offset: f64,
    pub ref_foot_speed: f64,
    pub ref_theta_rate: f64,
    pub ref_x_form: ReferenceXForm,
    /// Empty means the plan is read off the warm start.
    pub phase_plan: Option<Vec<usize>>,
    pub warm_start: String,
    pub tracking_bandwidth: f64,
    pub max_iter: usize,
    pub feas_tol: f64,
    pub stat_tol: f64,
    pub uncontrolled: bool,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        let integrator = IntegratorConfig::default();
        Self {
            command: Command::ReproducePaper,
            m1: 1.0 / 3.0,
            m2: 2.0 / 3.0,
            ell: 1.5,
            g: 9.8,
            kappa: 0.2,
            a: FRAC_PI_6,
            alpha: 0.0,
            h: 0.1,
            n_steps: 80,
            newton_tol: integrator.newton_tol,
            newton_max_iter: integrator.newton_max_iter,
            impact_cap: integrator.impact_cap,
            epsilon: 0.1,
            eta: 100.0,
            rho: 1.0,
            x0: 0.0,
            theta0: FRAC_PI_6,
            xdot0: 1.0,
            thetadot0: 0.1,
            enforce_initial_velocity: true,
            q_final: None,
            qdot_final: None,
            ref_foot_offset: 0.0,
            ref_foot_speed: 1.0,
            ref_theta_rate: -0.08,
            ref_x_form: ReferenceXForm::CosOffset,
            phase_plan: None,
            warm_start: "auto".into(),
            tracking_bandwidth: walker_core::dmoc::DEFAULT_TRACKING_BANDWIDTH,
            max_iter: solver.max_iter,
            feas_tol: solver.feas_tol,
            stat_tol: solver.stat_tol,
            uncontrolled: false,
            seed: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_num<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("`{v}`: {e}"))
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("`{v}` is not a boolean")),
    }
}

fn parse_pair(v: &str) -> Result<Option<(f64, f64)>, String> {
    if v == "none" || v.is_empty() {
        return Ok(None);
    }
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("`{v}`: expected `x, theta` or `none`"));
    }
    Ok(Some((parse_num(parts[0])?, parse_num(parts[1])?)))
}

fn fmt_pair(p: Option<(f64, f64)>) -> String {
    match p {
        Some((a, b)) => format!("{a}, {b}"),
        None => "none".into(),
    }
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "command" => self.command = value.parse()?,
            "m1" => self.m1 = parse_num(value)?,
            "m2" => self.m2 = parse_num(value)?,
            "ell" => self.ell = parse_num(value)?,
            "g" => self.g = parse_num(value)?,
            "kappa" => self.kappa = parse_num(value)?,
            "a" => self.a = parse_num(value)?,
            "alpha" => self.alpha = parse_num(value)?,
            "h" => self.h = parse_num(value)?,
            "n_steps" => self.n_steps = parse_num(value)?,
            "newton_tol" => self.newton_tol = parse_num(value)?,
            "newton_max_iter" => self.newton_max_iter = parse_num(value)?,
            "impact_cap" => self.impact_cap = parse_num(value)?,
            "epsilon" => self.epsilon = parse_num(value)?,
            "eta" => self.eta = parse_num(value)?,
            "rho" => self.rho = parse_num(value)?,
            "x0" => self.x0 = parse_num(value)?,
            "theta0" => self.theta0 = parse_num(value)?,
            "xdot0" => self.xdot0 = parse_num(value)?,
            "thetadot0" => self.thetadot0 = parse_num(value)?,
            "enforce_initial_velocity" => self.enforce_initial_velocity = parse_bool(value)?,
            "q_final" => self.q_final = parse_pair(value)?,
            "qdot_final" => self.qdot_final = parse_pair(value)?,
            "ref_foot_offset" => self.ref_foot_offset = parse_num(value)?,
            "ref_foot_speed" => self.ref_foot_speed = parse_num(value)?,
            "ref_theta_rate" => self.ref_theta_rate = parse_num(value)?,
            "ref_x_form" => {
                self.ref_x_form = match value {
                    "cos_offset" => ReferenceXForm::CosOffset,
                    "sin_offset" => ReferenceXForm::SinOffset,
                    _ => return Err(format!("`{value}`: expected cos_offset or sin_offset")),
                }
            }
            "phase_plan" => {
                self.phase_plan = if value == "auto" {
                    None
                } else if value.is_empty() || value == "none" {
                    Some(Vec::new())
                } else {
                    Some(value.split(',').map(|s| parse_num(s.trim())).collect::<Result<_, _>>()?)
                }
            }
            "warm_start" => match value {
                "auto" | "zero" | "tracking" => self.warm_start = value.to_string(),
                _ => return Err(format!("`{value}`: expected auto, zero or tracking")),
            },
            "tracking_bandwidth" => self.tracking_bandwidth = parse_num(value)?,
            "max_iter" => self.max_iter = parse_num(value)?,
            "feas_tol" => self.feas_tol = parse_num(value)?,
            "stat_tol" => self.stat_tol = parse_num(value)?,
            "uncontrolled" => self.uncontrolled = parse_bool(value)?,
            "seed" => self.seed = parse_num(value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(UNKNOWN.into()),
        }
        Ok(())
    }

    /// Parses a configuration text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::parse_with_prefix(text, None)
    }

    /// Reads the `config.` echo of a run manifest; other lines are ignored.
    pub fn from_manifest(text: &str) -> Result<Self, ConfigError> {
        Self::parse_with_prefix(text, Some(MANIFEST_PREFIX))
    }

    fn parse_with_prefix(text: &str, prefix: Option<&str>) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                if prefix.is_some() {
                    continue;
                }
                return Err(ConfigError::Syntax { line, text: trimmed.to_string() });
            };
            let key = key.trim();
            let key = match prefix {
                Some(p) => match key.strip_prefix(p) {
                    Some(k) => k,
                    None => continue,
                },
                None => key,
            };
            let value = value.split_once(" #").map_or(value, |(v, _)| v);
            cfg.set(key, value.trim()).map_err(|reason| {
                if reason == UNKNOWN {
                    ConfigError::UnknownField { line, field: key.to_string() }
                } else {
                    ConfigError::BadValue { line, field: key.to_string(), reason }
                }
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Every field as `(key, value)`, in a fixed order; values re-parse exactly.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let plan = match &self.phase_plan {
            None => "auto".to_string(),
            Some(v) if v.is_empty() => "none".to_string(),
            Some(v) => v.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(", "),
        };
        vec![
            ("command", self.command.as_str().to_string()),
            ("m1", self.m1.to_string()),
            ("m2", self.m2.to_string()),
            ("ell", self.ell.to_string()),
            ("g", self.g.to_string()),
            ("kappa", self.kappa.to_string()),
            ("a", self.a.to_string()),
            ("alpha", self.alpha.to_string()),
            ("h", self.h.to_string()),
            ("n_steps", self.n_steps.to_string()),
            ("newton_tol", self.newton_tol.to_string()),
            ("newton_max_iter", self.newton_max_iter.to_string()),
            ("impact_cap", self.impact_cap.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("eta", self.eta.to_string()),
            ("rho", self.rho.to_string()),
            ("x0", self.x0.to_string()),
            ("theta0", self.theta0.to_string()),
            ("xdot0", self.xdot0.to_string()),
            ("thetadot0", self.thetadot0.to_string()),
            ("enforce_initial_velocity", self.enforce_initial_velocity.to_string()),
            ("q_final", fmt_pair(self.q_final)),
            ("qdot_final", fmt_pair(self.qdot_final)),
            ("ref_foot_offset", self.ref_foot_offset.to_string()),
            ("ref_foot_speed", self.ref_foot_speed.to_string()),
            ("ref_theta_rate", self.ref_theta_rate.to_string()),
            (
                "ref_x_form",
                match self.ref_x_form {
                    ReferenceXForm::CosOffset => "cos_offset",
                    ReferenceXForm::SinOffset => "sin_offset",
                }
                .to_string(),
            ),
            ("phase_plan", plan),
            ("warm_start", self.warm_start.clone()),
            ("tracking_bandwidth", self.tracking_bandwidth.to_string()),
            ("max_iter", self.max_iter.to_string()),
            ("feas_tol", self.feas_tol.to_string()),
            ("stat_tol", self.stat_tol.to_string()),
            ("uncontrolled", self.uncontrolled.to_string()),
            ("seed", self.seed.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
        ]
    }

    pub fn params(&self) -> Result<WalkerParams, ConfigError> {
        Ok(WalkerParams::new(self.m1, self.m2, self.ell, self.g, self.kappa, self.a)?.with_slope(self.alpha)?)
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, ConfigError> {
        Ok(IntegratorConfig::new(self.h, self.newton_tol, self.newton_max_iter, self.impact_cap)?)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            max_iter: self.max_iter,
            feas_tol: self.feas_tol,
            stat_tol: self.stat_tol,
            ..SolverConfig::default()
        }
    }

    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.h
    }

    pub fn reference(&self) -> Result<ReferenceTrajectory, ConfigError> {
        let params = self.params()?;
        Ok(ReferenceTrajectory::from_initial(
            params.com_radius(),
            params.a(),
            0.0,
            self.ref_foot_offset,
            self.ref_foot_speed,
            self.ref_theta_rate,
            self.horizon(),
            self.ref_x_form,
        )?)
    }

    pub fn problem(&self) -> Result<OCProblem, ConfigError> {
        let warm_start = match self.warm_start.as_str() {
            "zero" => WarmStart::ZeroControl,
            "tracking" => WarmStart::Tracking { bandwidth: self.tracking_bandwidth },
            _ => WarmStart::Auto,
        };
        let problem = OCProblem {
            params: self.params()?,
            n_steps: self.n_steps,
            h: self.h,
            epsilon: self.epsilon,
            eta: self.eta,
            rho: self.rho,
            q0: Config::new(self.x0, self.theta0),
            qdot0: Config::new(self.xdot0, self.thetadot0),
            enforce_initial_velocity: self.enforce_initial_velocity,
            q_final: self.q_final.map(|(x, t)| Config::new(x, t)),
            qdot_final: self.qdot_final.map(|(x, t)| Config::new(x, t)),
            reference: self.reference()?,
            phase_plan: match &self.phase_plan {
                None => PhasePlan::Auto,
                Some(v) => PhasePlan::Fixed(v.clone()),
            },
            warm_start,
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Checks every derived object can be built.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.integrator()?;
        self.problem()?;
        Ok(())
    }

    /// The tracking-scenario parameter list, keeping only the run-control
    /// fields (`h`, `n_steps`, output, flags) of `self`.
    pub fn reproduce_defaults(&self) -> Self {
        Self {
            command: Command::ReproducePaper,
            h: self.h,
            n_steps: self.n_steps,
            uncontrolled: self.uncontrolled,
            seed: self.seed,
            out_dir: self.out_dir.clone(),
            ..Self::default()
        }
    }
}

const UNKNOWN: &str = "\u{0}unknown";
