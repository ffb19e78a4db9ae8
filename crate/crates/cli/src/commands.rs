use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;
use walker_core::dmoc::{path_cost, solve, zero_control_baseline, NLPResult, OCProblem};
use walker_core::integrator::{simulate_hybrid, ZeroControl};
use walker_core::model::{ReferenceTrajectory, WalkerParams};
use walker_core::{DiscretePath, HybridOutcome, WalkerError};

use crate::config::{Command, ConfigError, RunConfig, MANIFEST_PREFIX};
use crate::metrics::{config_tracking_error, foot_tracking_error, max_control, rms_control};
use crate::output::{controls_csv, line_plot, reference_csv, trajectory_csv, write_atomic, Manifest, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CRASH: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Simulation(WalkerError),
    #[error("optimization failed: {0}")]
    Solver(WalkerError),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } | Self::Simulation(_) => EXIT_CONFIG,
            Self::Solver(_) => EXIT_SOLVER,
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    /// Acceptance metrics as `(name, value)`, when the command computes them.
    pub metrics: Vec<(String, String)>,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

fn base_manifest(cfg: &RunConfig) -> Manifest {
    let mut m = Manifest::default();
    for (k, v) in cfg.entries() {
        m.push(format!("{MANIFEST_PREFIX}{k}"), v);
    }
    m.push("version.walker_cli", env!("CARGO_PKG_VERSION"));
    m.push("version.walker_core", walker_core::VERSION);
    m
}

fn record_impacts(m: &mut Manifest, path: &DiscretePath) {
    m.push("impacts.count", path.impacts.len());
    for (i, imp) in path.impacts.iter().enumerate() {
        let pair = |p: &[walker_core::Config; 2]| {
            format!("{:.16e}, {:.16e}, {:.16e}, {:.16e}", p[0].x, p[0].theta, p[1].x, p[1].theta)
        };
        m.push(format!("impact.{i}.index"), imp.index);
        m.push(format!("impact.{i}.t"), format!("{:.16e}", path.time(imp.index)));
        m.push(format!("impact.{i}.pre"), pair(&imp.pre));
        m.push(format!("impact.{i}.post"), pair(&imp.post));
    }
}

fn finish_manifest(dir: &Path, m: &mut Manifest, started: Instant, exit_code: i32) -> Result<(), CliError> {
    m.push("run.exit_code", exit_code);
    m.push("run.wall_time_s", format!("{:.6}", started.elapsed().as_secs_f64()));
    let path = dir.join("manifest");
    write_atomic(&path, &m.render()).map_err(|source| CliError::Io { path, source })
}

fn outcome_str(o: HybridOutcome) -> String {
    match o {
        HybridOutcome::Completed => "completed".into(),
        HybridOutcome::Crashed { step } => format!("crashed at step {step}"),
    }
}

/// Zero-control hybrid simulation from the configured initial state.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let started = Instant::now();
    cfg.validate()?;
    let params = cfg.params()?;
    let icfg = cfg.integrator()?;
    let dir = cfg.out_dir.clone();
    prepare_dir(&dir)?;
    let problem = cfg.problem()?;
    let run = simulate_hybrid(&params, &icfg, problem.q0, problem.qdot0, &mut ZeroControl, cfg.n_steps)
        .map_err(CliError::Simulation)?;
    write(&dir, "trajectory.csv", &trajectory_csv(&params, &run.path))?;
    let exit_code = match run.outcome {
        HybridOutcome::Completed => EXIT_OK,
        HybridOutcome::Crashed { .. } => EXIT_CRASH,
    };
    let mut m = base_manifest(cfg);
    m.push("run.command", "simulate");
    m.push("run.outcome", outcome_str(run.outcome));
    record_impacts(&mut m, &run.path);
    m.push("residual.max_del", format!("{:.6e}", run.path.max_del_residual(&params)));
    finish_manifest(&dir, &mut m, started, exit_code)?;
    Ok(RunReport { exit_code, out_dir: dir, manifest: m, metrics: Vec::new() })
}

fn plots(
    dir: &Path,
    params: &WalkerParams,
    path: &DiscretePath,
    reference: &ReferenceTrajectory,
) -> Result<(), CliError> {
    let r = params.com_radius();
    let ts: Vec<f64> = (0..path.configs.len()).map(|k| path.time(k)).collect();
    let refs: Vec<_> = ts.iter().filter_map(|&t| reference.eval(t).ok().map(|s| (t, s))).collect();
    let x = line_plot(
        "Horizontal position of the center of mass",
        "t [s]",
        "x [m]",
        &[
            Series {
                label: "x",
                color: "#1f77b4",
                points: ts.iter().zip(&path.configs).map(|(&t, q)| (t, q.x)).collect(),
                dashed: false,
            },
            Series {
                label: "x_r",
                color: "#d62728",
                points: refs.iter().map(|(t, s)| (*t, s.x)).collect(),
                dashed: true,
            },
        ],
    );
    write(dir, "fig_x.svg", &x)?;
    let theta = line_plot(
        "Leg angle",
        "t [s]",
        "theta [rad]",
        &[
            Series {
                label: "theta",
                color: "#1f77b4",
                points: ts.iter().zip(&path.configs).map(|(&t, q)| (t, q.theta)).collect(),
                dashed: false,
            },
            Series {
                label: "theta_r",
                color: "#d62728",
                points: refs.iter().map(|(t, s)| (*t, s.theta)).collect(),
                dashed: true,
            },
        ],
    );
    write(dir, "fig_theta.svg", &theta)?;

    let mut xy = vec![
        Series {
            label: "center of mass",
            color: "#1f77b4",
            points: path.configs.iter().map(|q| (q.x, r * q.theta.cos())).collect(),
            dashed: false,
        },
        Series {
            label: "foot",
            color: "#2ca02c",
            points: path.configs.iter().map(|q| (q.x - r * q.theta.sin(), 0.0)).collect(),
            dashed: false,
        },
        Series {
            label: "reference",
            color: "#d62728",
            points: refs.iter().map(|(_, s)| (s.x, r * s.theta.cos())).collect(),
            dashed: true,
        },
    ];
    let stride = (path.configs.len() / 10).max(1);
    for q in path.configs.iter().step_by(stride) {
        xy.push(Series {
            label: "",
            color: "#7f7f7f",
            points: vec![(q.x - r * q.theta.sin(), 0.0), (q.x, r * q.theta.cos())],
            dashed: false,
        });
    }
    write(dir, "fig_xy.svg", &line_plot("Trajectories in the xy-plane", "x [m]", "y [m]", &xy))?;

    let tm: Vec<f64> = (0..path.controls.len()).map(|k| path.h * (k as f64 + 0.5)).collect();
    let controls = line_plot(
        "Horizontal and angular components of the control inputs",
        "t [s]",
        "u",
        &[
            Series {
                label: "u_x",
                color: "#1f77b4",
                points: tm.iter().zip(&path.controls).map(|(&t, u)| (t, u.ux)).collect(),
                dashed: false,
            },
            Series {
                label: "u_theta",
                color: "#ff7f0e",
                points: tm.iter().zip(&path.controls).map(|(&t, u)| (t, u.utheta)).collect(),
                dashed: false,
            },
        ],
    );
    write(dir, "fig_controls.svg", &controls)
}

/// Tracking-problem metrics of a solved run against its zero-control baseline.
pub fn acceptance_metrics(problem: &OCProblem, result: &NLPResult) -> Result<Vec<(String, String)>, WalkerError> {
    let (baseline, baseline_outcome) = zero_control_baseline(problem)?;
    let err = foot_tracking_error(&problem.params, &result.path, &problem.reference)?;
    let base_err = foot_tracking_error(&problem.params, &baseline, &problem.reference)?;
    let e = |v: f64| format!("{v:.6e}");
    Ok(vec![
        ("status".into(), result.status.as_str().into()),
        ("iterations".into(), result.iterations.to_string()),
        ("objective".into(), e(result.objective)),
        ("baseline_objective".into(), e(path_cost(problem, &baseline)?)),
        ("constraint_residual".into(), e(result.residual)),
        ("stationarity".into(), e(result.stationarity)),
        ("max_del_residual".into(), e(result.path.max_del_residual(&problem.params))),
        ("foot_error_final_third".into(), e(err)),
        ("baseline_foot_error_final_third".into(), e(base_err)),
        ("foot_error_ratio".into(), e(err / base_err)),
        ("config_tracking_error".into(), e(config_tracking_error(&result.path, &problem.reference)?)),
        ("impacts".into(), result.path.impacts.len().to_string()),
        ("baseline_outcome".into(), outcome_str(baseline_outcome)),
        ("baseline_impacts".into(), baseline.impacts.len().to_string()),
        ("max_abs_control".into(), e(max_control(&result.path))),
        ("rms_control".into(), e(rms_control(&result.path))),
    ])
}

fn metrics_table(metrics: &[(String, String)]) -> String {
    let mut out = String::from("metric,value\n");
    for (k, v) in metrics {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

/// Solves the tracking problem and writes trajectories, controls, the
/// reference, plots and the manifest.
pub fn cmd_optimize(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let started = Instant::now();
    cfg.validate()?;
    let problem = cfg.problem()?;
    let dir = cfg.out_dir.clone();
    prepare_dir(&dir)?;
    let result = solve(&problem, &cfg.solver()).map_err(CliError::Solver)?;
    let params = &problem.params;
    write(&dir, "trajectory.csv", &trajectory_csv(params, &result.path))?;
    write(&dir, "controls.csv", &controls_csv(&result.path))?;
    write(&dir, "reference.csv", &reference_csv(&problem.reference, problem.h, problem.n_steps))?;
    plots(&dir, params, &result.path, &problem.reference)?;
    let metrics = acceptance_metrics(&problem, &result).map_err(CliError::Solver)?;
    if cfg.command == Command::ReproducePaper {
        write(&dir, "summary.csv", &metrics_table(&metrics))?;
    }
    let exit_code = if result.converged() { EXIT_OK } else { EXIT_SOLVER };
    let mut m = base_manifest(cfg);
    m.push("run.command", cfg.command.as_str());
    m.push("run.outcome", result.status.as_str());
    record_impacts(&mut m, &result.path);
    for (k, v) in &metrics {
        m.push(format!("metric.{k}"), v);
    }
    finish_manifest(&dir, &mut m, started, exit_code)?;
    Ok(RunReport { exit_code, out_dir: dir, manifest: m, metrics })
}

/// Runs the tracking scenario with its reference parameter list.
///
/// Only `h`, `n_steps`, the output directory and the flags are taken from
/// `cfg`. With `uncontrolled` set, the zero-control baseline is written
/// instead of the optimized run.
pub fn cmd_reproduce_paper(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let cfg = cfg.reproduce_defaults();
    if !cfg.uncontrolled {
        return cmd_optimize(&cfg);
    }
    let started = Instant::now();
    cfg.validate()?;
    let problem = cfg.problem()?;
    let dir = cfg.out_dir.clone();
    prepare_dir(&dir)?;
    let icfg = cfg.integrator()?;
    let run = simulate_hybrid(&problem.params, &icfg, problem.q0, problem.qdot0, &mut ZeroControl, problem.n_steps)
        .map_err(CliError::Simulation)?;
    let (baseline, _) = zero_control_baseline(&problem).map_err(CliError::Simulation)?;
    write(&dir, "trajectory.csv", &trajectory_csv(&problem.params, &run.path))?;
    write(&dir, "controls.csv", &controls_csv(&run.path))?;
    write(&dir, "reference.csv", &reference_csv(&problem.reference, problem.h, problem.n_steps))?;
    plots(&dir, &problem.params, &run.path, &problem.reference)?;
    let e = |v: f64| format!("{v:.6e}");
    let sim_err = |e: WalkerError| CliError::Simulation(e);
    let metrics = vec![
        ("outcome".to_string(), outcome_str(run.outcome)),
        ("impacts".to_string(), run.path.impacts.len().to_string()),
        ("objective".to_string(), e(path_cost(&problem, &baseline).map_err(sim_err)?)),
        (
            "foot_error_final_third".to_string(),
            e(foot_tracking_error(&problem.params, &baseline, &problem.reference).map_err(sim_err)?),
        ),
    ];
    write(&dir, "summary.csv", &metrics_table(&metrics))?;
    let exit_code = match run.outcome {
        HybridOutcome::Completed => EXIT_OK,
        HybridOutcome::Crashed { .. } => EXIT_CRASH,
    };
    let mut m = base_manifest(&cfg);
    m.push("run.command", "reproduce-paper");
    m.push("run.outcome", outcome_str(run.outcome));
    record_impacts(&mut m, &run.path);
    for (k, v) in &metrics {
        m.push(format!("metric.{k}"), v);
    }
    finish_manifest(&dir, &mut m, started, exit_code)?;
    Ok(RunReport { exit_code, out_dir: dir, manifest: m, metrics })
}

/// Dispatches on `cfg.command`.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    match cfg.command {
        Command::Simulate => cmd_simulate(cfg),
        Command::Optimize => cmd_optimize(cfg),
        Command::ReproducePaper => cmd_reproduce_paper(cfg),
    }
}
