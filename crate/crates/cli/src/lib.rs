//! Configuration and experiment driver behind the `xdg-shockfit` binary.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};
use xdg_shockfit::report::{history_csv, step_solution_csv, summary_csv};
use xdg_shockfit::{
    GasModel, IndicatorKind, InitKind, LoopConfig, P0Average, PseudoTimeTrace, ShockCase, SolverConfig,
};

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Command-line flags. Every value is optional so that a config file can
/// supply it; flags win over the file, the file wins over defaults.
#[derive(Debug, Default, Clone, Parser, Deserialize, Serialize)]
#[command(name = "xdg-shockfit", allow_negative_numbers = true, about = "Sub-cell accurate shock interface correction for a 1D stationary normal shock")]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Flags {
    /// Shock Mach number (>= 1)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mach: Option<f64>,
    /// Exact shock position
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shock_pos: Option<f64>,
    /// Initial interface position
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interface_init: Option<f64>,
    /// Domain bounds as LO,HI
    #[arg(long, value_name = "LO,HI", allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    /// Number of background cells
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<i64>,
    /// Polynomial degree
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<i64>,
    /// Smoothing strength of the initial shock profile
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<f64>,
    /// Implicit Euler step size
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Driving indicator: p0 | density | momentum
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indicator: Option<String>,
    /// Cut-cell constant used by the p0 indicator: background-cell | cut-cell
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0_average: Option<String>,
    /// Interface position tolerance
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_x: Option<f64>,
    /// Cap on outer pseudo-steps
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_pseudo_steps: Option<i64>,
    /// Minimum cut-cell volume fraction
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_agg: Option<f64>,
    /// Output samples per cut-cell
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_points: Option<i64>,
    /// Initial condition: smoothed | exact
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    /// Output directory
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Flat JSON file with keys named after the flags
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Flags {
    /// Fields set in `self` win over `base`.
    fn over(self, base: Flags) -> Flags {
        Flags {
            mach: self.mach.or(base.mach),
            shock_pos: self.shock_pos.or(base.shock_pos),
            interface_init: self.interface_init.or(base.interface_init),
            domain: self.domain.or(base.domain),
            cells: self.cells.or(base.cells),
            degree: self.degree.or(base.degree),
            smoothing: self.smoothing.or(base.smoothing),
            dt: self.dt.or(base.dt),
            indicator: self.indicator.or(base.indicator),
            p0_average: self.p0_average.or(base.p0_average),
            tol_x: self.tol_x.or(base.tol_x),
            max_pseudo_steps: self.max_pseudo_steps.or(base.max_pseudo_steps),
            delta_agg: self.delta_agg.or(base.delta_agg),
            sample_points: self.sample_points.or(base.sample_points),
            init: self.init.or(base.init),
            out: self.out.or(base.out),
            config: self.config,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: ShockCase,
    pub dt: f64,
    pub indicator: IndicatorKind,
    pub p0_average: P0Average,
    pub tol_x: f64,
    pub max_pseudo_steps: usize,
    pub delta_agg: f64,
    pub sample_points: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let lc = LoopConfig::default();
        RunConfig {
            case: ShockCase::default(),
            dt: SolverConfig::default().dt,
            indicator: lc.indicator,
            p0_average: lc.p0_average,
            tol_x: lc.tol_x,
            max_pseudo_steps: lc.max_pseudo_steps,
            delta_agg: lc.delta_agg,
            sample_points: 20,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt,
            ..SolverConfig::default()
        }
    }

    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            indicator: self.indicator,
            p0_average: self.p0_average,
            tol_x: self.tol_x,
            max_pseudo_steps: self.max_pseudo_steps,
            delta_agg: self.delta_agg,
            ..LoopConfig::default()
        }
    }

    /// The effective configuration in config-file form.
    pub fn to_flags(&self) -> Flags {
        let c = &self.case;
        Flags {
            mach: Some(c.mach_s),
            shock_pos: Some(c.shock_pos),
            interface_init: Some(c.interface_init),
            domain: Some(format!("{},{}", c.domain.0, c.domain.1)),
            cells: Some(c.cells as i64),
            degree: Some(c.degree as i64),
            smoothing: Some(c.c_tilde),
            dt: Some(self.dt),
            indicator: Some(self.indicator.name().into()),
            p0_average: Some(self.p0_average.name().into()),
            tol_x: Some(self.tol_x),
            max_pseudo_steps: Some(self.max_pseudo_steps as i64),
            delta_agg: Some(self.delta_agg),
            sample_points: Some(self.sample_points as i64),
            init: Some(c.init.name().into()),
            out: Some(self.out.clone()),
            config: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_flags()).expect("flags serialize") + "\n"
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_domain(s: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(config_err(format!("--domain expects LO,HI, got '{s}'")));
    }
    let lo = parts[0].parse::<f64>().map_err(|e| config_err(format!("domain '{s}': {e}")))?;
    let hi = parts[1].parse::<f64>().map_err(|e| config_err(format!("domain '{s}': {e}")))?;
    Ok((lo, hi))
}

fn read_config_file(path: &Path) -> Result<Flags, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

/// Merge flags, optional config file and defaults into a validated config.
pub fn parse_config(flags: Flags) -> Result<RunConfig, CliError> {
    let file = match &flags.config {
        Some(path) => read_config_file(path)?,
        None => Flags::default(),
    };
    let f = flags.over(file);
    let mut cfg = RunConfig::default();
    let case = &mut cfg.case;

    if let Some(v) = f.mach {
        case.mach_s = v;
    }
    if let Some(v) = f.shock_pos {
        case.shock_pos = v;
    }
    if let Some(v) = f.interface_init {
        case.interface_init = v;
    }
    if let Some(d) = &f.domain {
        case.domain = parse_domain(d)?;
    }
    if let Some(v) = f.cells {
        if v < 1 {
            return Err(config_err(format!("--cells must be >= 1, got {v}")));
        }
        case.cells = v as usize;
    }
    if let Some(v) = f.degree {
        if v < 0 {
            return Err(config_err(format!("--degree must be >= 0, got {v}")));
        }
        case.degree = v as usize;
    }
    if let Some(v) = f.smoothing {
        case.c_tilde = v;
    }
    if let Some(s) = &f.init {
        case.init = s.parse::<InitKind>().map_err(|e| config_err(e.to_string()))?;
    }
    if let Some(v) = f.dt {
        cfg.dt = v;
    }
    if let Some(s) = &f.indicator {
        cfg.indicator = s.parse::<IndicatorKind>().map_err(|e| config_err(e.to_string()))?;
    }
    if let Some(s) = &f.p0_average {
        cfg.p0_average = s.parse::<P0Average>().map_err(|e| config_err(e.to_string()))?;
    }
    if let Some(v) = f.tol_x {
        cfg.tol_x = v;
    }
    if let Some(v) = f.max_pseudo_steps {
        if v < 1 {
            return Err(config_err(format!("--max-pseudo-steps must be >= 1, got {v}")));
        }
        cfg.max_pseudo_steps = v as usize;
    }
    if let Some(v) = f.delta_agg {
        cfg.delta_agg = v;
    }
    if let Some(v) = f.sample_points {
        if v < 2 {
            return Err(config_err(format!("--sample-points must be >= 2, got {v}")));
        }
        cfg.sample_points = v as usize;
    }
    if let Some(p) = f.out {
        cfg.out = p;
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let c = &cfg.case;
    if !(c.mach_s >= 1.0) || !c.mach_s.is_finite() {
        return Err(config_err(format!("--mach must be >= 1, got {}", c.mach_s)));
    }
    let (lo, hi) = c.domain;
    if !(lo < hi) {
        return Err(config_err(format!("empty domain ({lo}, {hi})")));
    }
    if !(c.interface_init > lo && c.interface_init < hi) {
        return Err(config_err(format!(
            "--interface-init {} outside the domain ({lo}, {hi})",
            c.interface_init
        )));
    }
    if !(c.shock_pos > lo && c.shock_pos < hi) {
        return Err(config_err(format!("--shock-pos {} outside the domain ({lo}, {hi})", c.shock_pos)));
    }
    if !(c.c_tilde > 0.0) {
        return Err(config_err("--smoothing must be positive"));
    }
    if !(cfg.tol_x > 0.0) {
        return Err(config_err("--tol-x must be positive"));
    }
    if !(cfg.delta_agg >= 0.0 && cfg.delta_agg < 0.5) {
        return Err(config_err("--delta-agg must lie in [0, 0.5)"));
    }
    cfg.solver().validate().map_err(|e| config_err(e.to_string()))?;
    Ok(())
}

#[derive(Debug)]
pub struct Outcome {
    pub trace: PseudoTimeTrace,
    pub exit_code: i32,
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Run the pseudo-time loop and write `config.json`, `history.csv`,
/// `solution_l<l>.csv` and `summary.csv` into the output directory.
pub fn run_experiment(cfg: &RunConfig) -> Result<Outcome, CliError> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io(format!("{}: {e}", cfg.out.display())))?;
    write(&cfg.out.join("config.json"), &cfg.to_json())?;

    let problem = cfg.case.problem().map_err(|e| config_err(e.to_string()))?;
    let initial = cfg.case.initial_field(&problem).map_err(|e| config_err(e.to_string()))?;
    let trace = xdg_shockfit::shockfit::pseudo_time_loop(&problem, initial, &cfg.solver(), &cfg.loop_config())
        .map_err(|e| config_err(e.to_string()))?;

    let gas: GasModel = cfg.case.gas;
    write(&cfg.out.join("history.csv"), &history_csv(&trace))?;
    for step in &trace.steps {
        write(
            &cfg.out.join(format!("solution_l{}.csv", step.l)),
            &step_solution_csv(step, &gas, cfg.sample_points),
        )?;
    }
    write(&cfg.out.join("summary.csv"), &summary_csv(&trace, cfg.case.shock_pos))?;

    let exit_code = if trace.converged {
        EXIT_CONVERGED
    } else {
        EXIT_NOT_CONVERGED
    };
    Ok(Outcome { trace, exit_code })
}
