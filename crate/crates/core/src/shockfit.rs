//! Sub-cell correction of the shock interface inside the cut background cell.
//!
//! Each pseudo-step freezes the interface, drives the flow to a steady state,
//! evaluates three indicators on the cut cell and moves the interface by
//! bisection in the direction given by the sign of the driving indicator.

use std::sync::Arc;

use crate::euler::{ConservedState, GasModel};
use crate::error::{Error, Result};
use crate::grid::{BackgroundGrid, CutCellGrid, LevelSet, Species};
use crate::timestepper::{solve_field_to_steady, SolverConfig, SteadyReport};
use crate::xdg::{EulerOperator, XdgField, XdgSpace};

const RHO: usize = 0;

/// Which constant stands for a cut-cell polynomial in the P0 indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum P0Average {
    /// Mean over the cut-cell itself.
    CutCell,
    /// Zeroth Legendre mode of the background-cell basis, i.e. the mean of
    /// the species polynomial extended over the whole background cell.
    BackgroundCell,
}

impl P0Average {
    pub fn name(self) -> &'static str {
        match self {
            P0Average::CutCell => "cut-cell",
            P0Average::BackgroundCell => "background-cell",
        }
    }
}

impl std::str::FromStr for P0Average {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cut-cell" => Ok(P0Average::CutCell),
            "background-cell" => Ok(P0Average::BackgroundCell),
            other => Err(Error::Config(format!(
                "unknown P0 average '{other}' (expected cut-cell|background-cell)"
            ))),
        }
    }
}

/// Zeroth-order indicator on the density: mean of the near-band values minus
/// the mean of the two cut-cell constants.
pub fn indicator_p0(field: &XdgField, band_width: usize, average: P0Average) -> Result<f64> {
    let grid = field.space().grid();
    let band = grid.near_band(band_width)?;
    let cut = grid.cut.ok_or(Error::NoCutCell)?;
    let side_mean = |cells: &[usize], species: Species| -> Result<f64> {
        let vals = cells
            .iter()
            .map(|&j| field.p0_projection(j, species, RHO))
            .collect::<Result<Vec<_>>>()?;
        Ok(vals.iter().sum::<f64>() / vals.len() as f64)
    };
    if band.left.is_empty() {
        return Err(Error::MissingBand("left"));
    }
    if band.right.is_empty() {
        return Err(Error::MissingBand("right"));
    }
    let rho_pre = side_mean(&band.left, Species::A)?;
    let rho_post = side_mean(&band.right, Species::B)?;
    let cut_value = |species| match average {
        P0Average::CutCell => field.p0_projection(cut.cell, species, RHO),
        P0Average::BackgroundCell => field.background_mode(cut.cell, species, RHO),
    };
    let rho_a = cut_value(Species::A)?;
    let rho_b = cut_value(Species::B)?;
    Ok(p0_indicator_value(rho_pre, rho_post, rho_a, rho_b))
}

/// `(rho_pre + rho_post)/2 - (rho_A + rho_B)/2`.
pub fn p0_indicator_value(rho_pre: f64, rho_post: f64, rho_a: f64, rho_b: f64) -> f64 {
    0.5 * (rho_pre + rho_post) - 0.5 * (rho_a + rho_b)
}

fn interface_traces(field: &XdgField) -> Result<(ConservedState, ConservedState, f64)> {
    let grid = field.space().grid();
    let cut = grid.cut.ok_or(Error::NoCutCell)?;
    let x = cut.x_interface;
    Ok((field.state(x, Species::A), field.state(x, Species::B), cut.background_len()))
}

/// Jump of the mass flux `rho u` across the interface divided by `|K_j|`.
pub fn indicator_density_jump(field: &XdgField) -> Result<f64> {
    let (a, b, len) = interface_traces(field)?;
    Ok(jump_indicator_value(a.mom, b.mom, len))
}

/// Jump of the momentum flux `p + rho u^2` across the interface divided by `|K_j|`.
pub fn indicator_momentum_jump(field: &XdgField, gas: &GasModel) -> Result<f64> {
    let (a, b, len) = interface_traces(field)?;
    let momentum_flux = |u: &ConservedState| -> Result<f64> {
        let w = u.to_primitive(gas)?;
        Ok(w.p + w.rho * w.u * w.u)
    };
    Ok(jump_indicator_value(momentum_flux(&a)?, momentum_flux(&b)?, len))
}

/// `(trace_A - trace_B) / |K_j|`.
pub fn jump_indicator_value(trace_a: f64, trace_b: f64, cell_len: f64) -> f64 {
    (trace_a - trace_b) / cell_len
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndicatorKind {
    P0,
    Density,
    Momentum,
}

impl IndicatorKind {
    pub fn name(self) -> &'static str {
        match self {
            IndicatorKind::P0 => "p0",
            IndicatorKind::Density => "density",
            IndicatorKind::Momentum => "momentum",
        }
    }
}

impl std::str::FromStr for IndicatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p0" => Ok(IndicatorKind::P0),
            "density" => Ok(IndicatorKind::Density),
            "momentum" => Ok(IndicatorKind::Momentum),
            other => Err(Error::Config(format!("unknown indicator '{other}' (expected p0|density|momentum)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorReport {
    pub i_p0: f64,
    pub i_rho: f64,
    pub i_mom: f64,
    pub chosen: IndicatorKind,
}

impl IndicatorReport {
    pub fn evaluate(field: &XdgField, gas: &GasModel, cfg: &LoopConfig) -> Result<Self> {
        let report = IndicatorReport {
            i_p0: indicator_p0(field, cfg.band_width, cfg.p0_average)?,
            i_rho: indicator_density_jump(field)?,
            i_mom: indicator_momentum_jump(field, gas)?,
            chosen: cfg.indicator,
        };
        for v in [report.i_p0, report.i_rho, report.i_mom] {
            if !v.is_finite() {
                return Err(Error::NonFiniteIndicator(v));
            }
        }
        Ok(report)
    }

    pub fn value(&self, kind: IndicatorKind) -> f64 {
        match kind {
            IndicatorKind::P0 => self.i_p0,
            IndicatorKind::Density => self.i_rho,
            IndicatorKind::Momentum => self.i_mom,
        }
    }

    pub fn driving(&self) -> f64 {
        self.value(self.chosen)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
    Converged,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::Converged => "converged",
        }
    }
}

pub const INDICATOR_ZERO_TOL: f64 = 1e-8;

/// Positive indicator moves the interface right, negative moves it left.
pub fn shift_direction(value: f64, zero_tol: f64) -> Result<Direction> {
    if !value.is_finite() {
        return Err(Error::NonFiniteIndicator(value));
    }
    Ok(if value.abs() <= zero_tol {
        Direction::Converged
    } else if value > 0.0 {
        Direction::Right
    } else {
        Direction::Left
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionState {
    pub bracket: Bracket,
    pub x_current: f64,
    pub history: Vec<(f64, IndicatorReport)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BisectionOutcome {
    Moved(BisectionState),
    /// The bracket is narrower than the position tolerance.
    Exhausted(BisectionState),
}

impl BisectionState {
    /// Bracket initialized to the cut background cell.
    pub fn new(cell: (f64, f64), x_current: f64) -> Result<Self> {
        if !(cell.0 < x_current && x_current < cell.1) {
            return Err(Error::Config(format!(
                "interface {x_current} is not strictly inside the bracket ({}, {})",
                cell.0, cell.1
            )));
        }
        Ok(BisectionState {
            bracket: Bracket { lo: cell.0, hi: cell.1 },
            x_current,
            history: Vec::new(),
        })
    }

    /// Shrink the bracket to the side given by `direction` and move to its midpoint.
    pub fn update(&self, direction: Direction, tol_x: f64) -> Result<BisectionOutcome> {
        let bracket = match direction {
            Direction::Left => Bracket {
                lo: self.bracket.lo,
                hi: self.x_current,
            },
            Direction::Right => Bracket {
                lo: self.x_current,
                hi: self.bracket.hi,
            },
            Direction::Converged => {
                return Err(Error::Config("bisection update needs a left/right direction".into()));
            }
        };
        let next = BisectionState {
            bracket,
            x_current: 0.5 * (bracket.lo + bracket.hi),
            history: self.history.clone(),
        };
        if bracket.width() < tol_x {
            Ok(BisectionOutcome::Exhausted(next))
        } else {
            Ok(BisectionOutcome::Moved(next))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopConfig {
    pub indicator: IndicatorKind,
    pub tol_x: f64,
    pub max_pseudo_steps: usize,
    pub delta_agg: f64,
    pub band_width: usize,
    pub p0_average: P0Average,
    pub indicator_zero_tol: f64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            indicator: IndicatorKind::P0,
            tol_x: 1e-4,
            max_pseudo_steps: 40,
            delta_agg: 0.3,
            band_width: 1,
            p0_average: P0Average::BackgroundCell,
            indicator_zero_tol: INDICATOR_ZERO_TOL,
        }
    }
}

/// Record of one pseudo-step.
#[derive(Debug, Clone)]
pub struct PseudoStep {
    pub l: usize,
    pub x_interface: f64,
    /// Bracket after this step's bisection update (unchanged if the step
    /// did not move the interface).
    pub bracket: Bracket,
    pub indicators: Option<IndicatorReport>,
    pub direction: Option<Direction>,
    pub steady: SteadyReport,
    /// Steady field of this step.
    pub field: XdgField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Interface moved by at most `tol_x`.
    PositionTolerance,
    IndicatorZero,
    BracketExhausted,
    StepCap,
    SteadyFailure,
    Error,
}

#[derive(Debug, Clone)]
pub struct PseudoTimeTrace {
    pub steps: Vec<PseudoStep>,
    pub final_x: f64,
    pub converged: bool,
    pub termination: Termination,
    pub error: Option<Error>,
}

/// Fixed data of a stationary-shock problem.
#[derive(Debug, Clone)]
pub struct ShockProblem {
    pub grid: BackgroundGrid,
    pub degree: usize,
    pub gas: GasModel,
    pub bc_left: ConservedState,
    pub bc_right: ConservedState,
}

impl ShockProblem {
    pub fn space_at(&self, x_interface: f64) -> Result<Arc<XdgSpace>> {
        let ls = LevelSet::new(x_interface, &self.grid)?;
        let cg = CutCellGrid::cut(&self.grid, ls);
        Ok(Arc::new(XdgSpace::new(cg, self.degree)?))
    }

    pub fn operator(&self, space: Arc<XdgSpace>, solver: &SolverConfig) -> EulerOperator {
        EulerOperator::new(space, self.gas, self.bc_left, self.bc_right).with_execution(solver.execution)
    }
}

/// Iterative pseudo-time correction of the interface.
///
/// `initial` must live on the cut grid of its own interface position; that
/// position is the starting guess.
pub fn pseudo_time_loop(
    problem: &ShockProblem,
    initial: XdgField,
    solver: &SolverConfig,
    cfg: &LoopConfig,
) -> Result<PseudoTimeTrace> {
    solver.validate()?;
    let grid0 = initial.space().grid();
    let cut0 = grid0.cut.ok_or(Error::NoCutCell)?;
    let mut state = BisectionState::new(problem.grid.cell(cut0.cell), cut0.x_interface)?;
    let mut field = initial;
    let mut steps = Vec::new();

    let finish = |steps: Vec<PseudoStep>, final_x, converged, termination, error| PseudoTimeTrace {
        steps,
        final_x,
        converged,
        termination,
        error,
    };

    for l in 0..cfg.max_pseudo_steps {
        let x_l = state.x_current;
        let space = match problem.space_at(x_l) {
            Ok(s) => s,
            Err(err) => return Ok(finish(steps, x_l, false, Termination::Error, Some(err))),
        };
        if let Err(err) = space.grid().check_well_placed(cfg.delta_agg) {
            return Ok(finish(steps, x_l, false, Termination::Error, Some(err)));
        }
        if l > 0 {
            field = field.transfer(space.clone());
        }
        let op = problem.operator(space, solver);
        let (steady_field, steady) = solve_field_to_steady(&op, field, solver);
        field = steady_field;

        let mut step = PseudoStep {
            l,
            x_interface: x_l,
            bracket: state.bracket,
            indicators: None,
            direction: None,
            steady: steady.clone(),
            field: field.clone(),
        };
        if !steady.converged {
            steps.push(step);
            return Ok(finish(steps, x_l, false, Termination::SteadyFailure, None));
        }

        let report = match IndicatorReport::evaluate(&field, &problem.gas, cfg) {
            Ok(r) => r,
            Err(err) => {
                steps.push(step);
                return Ok(finish(steps, x_l, false, Termination::Error, Some(err)));
            }
        };
        let direction = shift_direction(report.driving(), cfg.indicator_zero_tol)?;
        step.indicators = Some(report);
        step.direction = Some(direction);
        state.history.push((x_l, report));

        if direction == Direction::Converged {
            steps.push(step);
            return Ok(finish(steps, x_l, true, Termination::IndicatorZero, None));
        }
        match state.update(direction, cfg.tol_x)? {
            BisectionOutcome::Moved(next) => {
                let moved = (next.x_current - x_l).abs();
                step.bracket = next.bracket;
                steps.push(step);
                state = next;
                if moved <= cfg.tol_x {
                    return Ok(finish(steps, state.x_current, true, Termination::PositionTolerance, None));
                }
            }
            BisectionOutcome::Exhausted(next) => {
                step.bracket = next.bracket;
                steps.push(step);
                return Ok(finish(steps, next.x_current, true, Termination::BracketExhausted, None));
            }
        }
    }
    Ok(finish(steps, state.x_current, false, Termination::StepCap, None))
}
