//! The stationary normal-shock test case: exact pre/post states as boundary
//! data and either a smoothed or an exact initial field.

use crate::euler::{post_shock_state, pre_shock_state, smoothed_initial_state, GasModel, PrimitiveState, SmoothingParams};
use crate::error::{Error, Result};
use crate::grid::BackgroundGrid;
use crate::shockfit::{pseudo_time_loop, LoopConfig, PseudoTimeTrace, ShockProblem};
use crate::timestepper::SolverConfig;
use crate::xdg::XdgField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    /// tanh-smoothed shock profile.
    Smoothed,
    /// Sharp jump at the shock position.
    Exact,
}

impl std::str::FromStr for InitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoothed" => Ok(InitKind::Smoothed),
            "exact" => Ok(InitKind::Exact),
            other => Err(Error::Config(format!("unknown init '{other}' (expected exact|smoothed)"))),
        }
    }
}

impl InitKind {
    pub fn name(self) -> &'static str {
        match self {
            InitKind::Smoothed => "smoothed",
            InitKind::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShockCase {
    pub mach_s: f64,
    pub shock_pos: f64,
    pub interface_init: f64,
    pub domain: (f64, f64),
    pub cells: usize,
    pub degree: usize,
    pub c_tilde: f64,
    pub init: InitKind,
    pub gas: GasModel,
}

impl Default for ShockCase {
    fn default() -> Self {
        ShockCase {
            mach_s: 1.5,
            shock_pos: 0.55,
            interface_init: 0.57,
            domain: (0.0, 1.0),
            cells: 10,
            degree: 2,
            c_tilde: 1.0,
            init: InitKind::Smoothed,
            gas: GasModel::default(),
        }
    }
}

impl ShockCase {
    pub fn pre(&self) -> PrimitiveState {
        pre_shock_state(self.mach_s, &self.gas)
    }

    pub fn post(&self) -> Result<PrimitiveState> {
        post_shock_state(&self.pre(), self.mach_s, &self.gas)
    }

    pub fn problem(&self) -> Result<ShockProblem> {
        let grid = BackgroundGrid::uniform(self.domain.0, self.domain.1, self.cells)?;
        Ok(ShockProblem {
            grid,
            degree: self.degree,
            gas: self.gas,
            bc_left: self.pre().to_conserved(&self.gas),
            bc_right: self.post()?.to_conserved(&self.gas),
        })
    }

    /// Initial field projected onto the cut grid at `interface_init`.
    pub fn initial_field(&self, problem: &ShockProblem) -> Result<XdgField> {
        let space = problem.space_at(self.interface_init)?;
        let (pre, post) = (problem.bc_left, problem.bc_right);
        let x_s = self.shock_pos;
        match self.init {
            InitKind::Smoothed => {
                let sp = SmoothingParams::new(self.c_tilde, problem.grid.h(), self.degree)?;
                XdgField::project(space, |x| smoothed_initial_state(x, &pre, &post, x_s, &sp).to_array())
            }
            InitKind::Exact => XdgField::project_with_breaks(
                space,
                |x| if x < x_s { pre.to_array() } else { post.to_array() },
                &[x_s],
            ),
        }
    }

    pub fn run(&self, solver: &SolverConfig, cfg: &LoopConfig) -> Result<PseudoTimeTrace> {
        let problem = self.problem()?;
        let field = self.initial_field(&problem)?;
        pseudo_time_loop(&problem, field, solver, cfg)
    }
}
