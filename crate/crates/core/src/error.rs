use thiserror::Error;

/// Which component of a state violated positivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateComponent {
    Density,
    Pressure,
}

impl std::fmt::Display for StateComponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateComponent::Density => f.write_str("density"),
            StateComponent::Pressure => f.write_str("pressure"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state: non-positive {component} ({value})")]
    InvalidState { component: StateComponent, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shock Mach number {0} < 1 describes an inadmissible expansion shock")]
    ExpansionShock(f64),

    #[error("Riemann problem generates vacuum (pressure positivity condition {0} <= 0)")]
    Vacuum(f64),

    #[error("Riemann solver did not converge after {iterations} iterations (residual {residual:e})")]
    RiemannConvergence { iterations: usize, residual: f64 },

    #[error("mass matrix of element {element} is singular")]
    SingularMass { element: usize },

    #[error("element {element} is empty")]
    EmptyElement { element: usize },

    #[error("residual evaluation failed in element {element}: {source}")]
    Residual {
        element: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Jacobian column for dof {dof} failed: {source}")]
    Jacobian {
        dof: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Newton iteration did not converge after {iterations} iterations (|G| = {residual:e})")]
    NewtonConvergence { iterations: usize, residual: f64 },

    #[error("singular Newton matrix")]
    SingularJacobian,

    #[error("no cut cell: interface coincides with a grid node")]
    NoCutCell,

    #[error("near band is missing the {0} side")]
    MissingBand(&'static str),

    #[error("non-finite indicator value {0}")]
    NonFiniteIndicator(f64),

    #[error("interface at {x} is not well placed (volume fractions {frac_a:.4}/{frac_b:.4} < {delta_agg})")]
    NotWellPlaced {
        x: f64,
        frac_a: f64,
        frac_b: f64,
        delta_agg: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
