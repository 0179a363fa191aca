//! Implicit Euler pseudo-time integration to a steady state, with Newton's
//! method on a brute-force finite-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::exec::Execution;
use crate::error::{Error, Result};
use crate::xdg::{EulerOperator, XdgField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub fd_epsilon: f64,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub steady_tol: f64,
    pub max_euler_steps: usize,
    /// How often a failed implicit step may be retried with half the step
    /// size. Zero keeps the step size fixed.
    pub max_dt_halvings: usize,
    /// Perturb DOFs of elements at least three apart in a single residual
    /// evaluation.
    pub batching: bool,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 0.1,
            fd_epsilon: 1e-7,
            newton_tol: 1e-10,
            newton_max_iters: 50,
            steady_tol: 1e-9,
            max_euler_steps: 500,
            max_dt_halvings: 8,
            batching: true,
            execution: Execution::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("fd_epsilon", self.fd_epsilon),
            ("newton_tol", self.newton_tol),
            ("steady_tol", self.steady_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.newton_max_iters == 0 || self.max_euler_steps == 0 {
            return Err(Error::Config("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Nearest-neighbor coupling of a chain of equally sized DOF blocks: the
/// residual of block `b` depends only on blocks `b - 1`, `b`, `b + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Locality {
    pub block_size: usize,
    pub num_blocks: usize,
}

impl Locality {
    /// Block distance that makes two perturbations' row footprints disjoint.
    pub const SEPARATION: usize = 3;

    /// Groups of DOFs that can be perturbed together.
    pub fn batches(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for color in 0..Self::SEPARATION.min(self.num_blocks) {
            for local in 0..self.block_size {
                out.push(
                    (color..self.num_blocks)
                        .step_by(Self::SEPARATION)
                        .map(|b| b * self.block_size + local)
                        .collect(),
                );
            }
        }
        out
    }

    /// Rows touched by perturbing `dof`.
    pub fn rows(&self, dof: usize) -> std::ops::Range<usize> {
        let b = dof / self.block_size;
        let lo = b.saturating_sub(1);
        let hi = (b + 2).min(self.num_blocks);
        lo * self.block_size..hi * self.block_size
    }
}

/// Finite-difference Jacobian `J[:, k] = (R(U + eps_k e_k) - R(U)) / eps_k`
/// with `eps_k = fd_epsilon * max(1, |U_k|)`.
///
/// With `locality` set (and `cfg.batching`), well-separated DOFs share one
/// residual evaluation and each column is read from its own row footprint;
/// the result is bit-identical to the unbatched matrix.
pub fn fd_jacobian<F>(residual: F, u: &[f64], cfg: &SolverConfig, locality: Option<Locality>) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let n = u.len();
    let r0 = residual(u)?;
    let m = r0.len();
    let steps: Vec<f64> = u
        .iter()
        .map(|&v| {
            let eps = cfg.fd_epsilon * v.abs().max(1.0);
            // use the representable increment so the quotient is consistent
            (v + eps) - v
        })
        .collect();

    let batches: Vec<Vec<usize>> = match locality {
        Some(loc) if cfg.batching => {
            assert_eq!(loc.block_size * loc.num_blocks, n, "locality does not match the DOF count");
            loc.batches()
        }
        _ => (0..n).map(|k| vec![k]).collect(),
    };

    let evaluated = cfg.execution.map(batches.len(), |b| {
        let mut up = u.to_vec();
        for &k in &batches[b] {
            up[k] += steps[k];
        }
        residual(&up).map_err(|err| Error::Jacobian {
            dof: batches[b][0],
            source: Box::new(err),
        })
    });

    let mut jac = DMatrix::zeros(m, n);
    for (batch, rp) in batches.iter().zip(evaluated) {
        let rp = rp?;
        for &k in batch {
            let rows = match (locality, batch.len()) {
                (Some(loc), _) if cfg.batching => loc.rows(k),
                _ => 0..m,
            };
            for i in rows {
                jac[(i, k)] = (rp[i] - r0[i]) / steps[k];
            }
        }
    }
    Ok(jac)
}

/// A semi-discrete system `M dU/dt + R(U) = 0`.
pub trait SemiDiscrete: Sync {
    fn num_dofs(&self) -> usize;
    fn residual(&self, u: &[f64]) -> Result<Vec<f64>>;
    fn apply_mass(&self, v: &[f64], out: &mut [f64]);
    fn locality(&self) -> Option<Locality> {
        None
    }
}

impl SemiDiscrete for EulerOperator {
    fn num_dofs(&self) -> usize {
        self.space.num_dofs()
    }

    fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        EulerOperator::residual(self, u)
    }

    fn apply_mass(&self, v: &[f64], out: &mut [f64]) {
        self.space.apply_mass(v, out)
    }

    fn locality(&self) -> Option<Locality> {
        Some(Locality {
            block_size: self.space.dofs_per_element(),
            num_blocks: self.space.num_elements(),
        })
    }
}

pub fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `G(U) = M (U - U_n) / dt + R(U)`.
fn implicit_residual<S: SemiDiscrete>(sys: &S, u: &[f64], u_n: &[f64], dt: f64) -> Result<Vec<f64>> {
    let mut g = sys.residual(u)?;
    let diff: Vec<f64> = u.iter().zip(u_n).map(|(a, b)| (a - b) / dt).collect();
    let mut mdiff = vec![0.0; u.len()];
    sys.apply_mass(&diff, &mut mdiff);
    g.iter_mut().zip(&mdiff).for_each(|(gi, mi)| *gi += mi);
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: Vec<f64>,
    pub newton_iterations: usize,
    pub residual: f64,
}

/// One backward Euler step, solved by plain Newton iteration started at `u_n`.
pub fn implicit_euler_step<S: SemiDiscrete>(sys: &S, u_n: &[f64], cfg: &SolverConfig) -> Result<StepOutcome> {
    let mut u = u_n.to_vec();
    let g_fn = |v: &[f64]| implicit_residual(sys, v, u_n, cfg.dt);
    let mut g = g_fn(&u)?;
    let mut norm = max_norm(&g);
    let mut iters = 0;
    while norm > cfg.newton_tol {
        if iters >= cfg.newton_max_iters {
            return Err(Error::NewtonConvergence {
                iterations: iters,
                residual: norm,
            });
        }
        let jac = fd_jacobian(g_fn, &u, cfg, sys.locality())?;
        let rhs = DVector::from_iterator(g.len(), g.iter().map(|v| -v));
        let delta = jac.lu().solve(&rhs).ok_or(Error::SingularJacobian)?;
        u.iter_mut().zip(delta.iter()).for_each(|(a, d)| *a += d);
        g = g_fn(&u)?;
        norm = max_norm(&g);
        iters += 1;
        if !norm.is_finite() {
            return Err(Error::NewtonConvergence {
                iterations: iters,
                residual: norm,
            });
        }
    }
    Ok(StepOutcome {
        state: u,
        newton_iterations: iters,
        residual: norm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyReport {
    pub euler_steps: usize,
    pub residual_norm: f64,
    pub converged: bool,
    pub newton_iterations: Vec<usize>,
    /// Number of rejected steps that were retried with a smaller step size.
    pub rejected_steps: usize,
    /// Set when a step failed; the state is the last one that was accepted.
    pub failure: Option<String>,
}

/// Repeat implicit Euler steps until `|R(U)|_inf <= steady_tol`. A step
/// whose Newton solve fails is retried with half the step size, at most
/// `max_dt_halvings` times in a row.
pub fn solve_to_steady<S: SemiDiscrete>(sys: &S, u0: Vec<f64>, cfg: &SolverConfig) -> (Vec<f64>, SteadyReport) {
    let mut u = u0;
    let mut report = SteadyReport {
        euler_steps: 0,
        residual_norm: f64::INFINITY,
        converged: false,
        newton_iterations: Vec::new(),
        rejected_steps: 0,
        failure: None,
    };
    // after a rejection the step size doubles back towards cfg.dt
    let mut dt = cfg.dt;
    let mut halvings = 0;
    loop {
        match sys.residual(&u) {
            Ok(r) => report.residual_norm = max_norm(&r),
            Err(err) => {
                report.failure = Some(err.to_string());
                return (u, report);
            }
        }
        if report.residual_norm <= cfg.steady_tol {
            report.converged = true;
            return (u, report);
        }
        if report.euler_steps >= cfg.max_euler_steps {
            return (u, report);
        }
        let step_cfg = SolverConfig { dt, ..*cfg };
        match implicit_euler_step(sys, &u, &step_cfg) {
            Ok(step) => {
                u = step.state;
                report.euler_steps += 1;
                report.newton_iterations.push(step.newton_iterations);
                if halvings > 0 {
                    halvings -= 1;
                    dt *= 2.0;
                }
            }
            Err(_) if halvings < cfg.max_dt_halvings => {
                halvings += 1;
                dt *= 0.5;
                report.rejected_steps += 1;
            }
            Err(err) => {
                report.failure = Some(err.to_string());
                return (u, report);
            }
        }
    }
}

/// [`solve_to_steady`] on an [`XdgField`].
pub fn solve_field_to_steady(op: &EulerOperator, field: XdgField, cfg: &SolverConfig) -> (XdgField, SteadyReport) {
    let space = field.space().clone();
    let (u, report) = solve_to_steady(op, field.into_coeffs(), cfg);
    (XdgField::from_coeffs(space, u), report)
}
