//! Exact Riemann solver for the ideal-gas Euler equations (Newton iteration on
//! the star pressure) and the Godunov flux obtained by sampling the solution
//! on the line `x/t = 0`.
//!
//! There is intentionally no HLLC option: for a stationary shock sitting on an
//! edge the HLLC wave-speed estimates have signs decided by round-off.

use crate::euler::{ConservedState, Flux, GasModel, PrimitiveState};
use crate::error::{Error, Result};

/// Lower bound for pressure iterates.
pub const PRESSURE_FLOOR: f64 = 1e-12;
/// Shocks with |speed| below this are treated as stationary and sampled on
/// their post-shock side.
pub const STATIONARY_SHOCK_EPS: f64 = 1e-12;
pub const MAX_NEWTON_ITERS: usize = 100;
const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wave {
    Shock { speed: f64 },
    Rarefaction { head: f64, tail: f64 },
}

impl Wave {
    pub fn is_shock(&self) -> bool {
        matches!(self, Wave::Shock { .. })
    }

    /// Range of signal speeds `(min, max)` covered by the wave.
    pub fn speed_range(&self) -> (f64, f64) {
        match *self {
            Wave::Shock { speed } => (speed, speed),
            Wave::Rarefaction { head, tail } => (head.min(tail), head.max(tail)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannSolution {
    pub left: PrimitiveState,
    pub right: PrimitiveState,
    pub p_star: f64,
    pub u_star: f64,
    pub rho_star_left: f64,
    pub rho_star_right: f64,
    pub left_wave: Wave,
    pub right_wave: Wave,
    pub iterations: usize,
    pub residual: f64,
    gamma: f64,
}

struct Side {
    rho: f64,
    p: f64,
    a: f64,
    a_coef: f64,
    b_coef: f64,
}

impl Side {
    fn new(w: &PrimitiveState, gas: &GasModel) -> Self {
        let g = gas.gamma;
        Side {
            rho: w.rho,
            p: w.p,
            a: w.sound_speed(gas),
            a_coef: 2.0 / ((g + 1.0) * w.rho),
            b_coef: (g - 1.0) / (g + 1.0) * w.p,
        }
    }

    /// Pressure function `f_K(p)` and its derivative.
    fn eval(&self, p: f64, g: f64) -> (f64, f64) {
        if p > self.p {
            let q = (self.a_coef / (p + self.b_coef)).sqrt();
            let f = (p - self.p) * q;
            let df = q * (1.0 - 0.5 * (p - self.p) / (p + self.b_coef));
            (f, df)
        } else {
            let ratio = p / self.p;
            let f = 2.0 * self.a / (g - 1.0) * (ratio.powf((g - 1.0) / (2.0 * g)) - 1.0);
            let df = ratio.powf(-(g + 1.0) / (2.0 * g)) / (self.rho * self.a);
            (f, df)
        }
    }
}

/// Solve the Riemann problem with initial data `left | right`.
pub fn solve_riemann(left: &PrimitiveState, right: &PrimitiveState, gas: &GasModel) -> Result<RiemannSolution> {
    left.validate()?;
    right.validate()?;
    let g = gas.gamma;
    let sl = Side::new(left, gas);
    let sr = Side::new(right, gas);
    let du = right.u - left.u;

    let positivity = 2.0 * (sl.a + sr.a) / (g - 1.0) - du;
    if !(positivity > 0.0) {
        return Err(Error::Vacuum(positivity));
    }

    // Two-rarefaction estimate is exact when both waves are rarefactions.
    let z = (g - 1.0) / (2.0 * g);
    let p_tr = ((sl.a + sr.a - 0.5 * (g - 1.0) * du) / (sl.a / sl.p.powf(z) + sr.a / sr.p.powf(z))).powf(1.0 / z);
    let mut p = p_tr.max(PRESSURE_FLOOR);

    let scale = 1.0f64.max(sl.a + sr.a + du.abs());
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < MAX_NEWTON_ITERS {
        let (fl, dfl) = sl.eval(p, g);
        let (fr, dfr) = sr.eval(p, g);
        let f = fl + fr + du;
        residual = f.abs();
        if residual <= 4.0 * f64::EPSILON * scale {
            break;
        }
        iterations += 1;
        let p_new = (p - f / (dfl + dfr)).max(PRESSURE_FLOOR);
        let change = 2.0 * (p_new - p).abs() / (p_new + p);
        p = p_new;
        if change <= 1e-15 {
            let (fl, _) = sl.eval(p, g);
            let (fr, _) = sr.eval(p, g);
            residual = (fl + fr + du).abs();
            break;
        }
    }
    if !(residual <= RESIDUAL_TOL * scale) {
        return Err(Error::RiemannConvergence { iterations, residual });
    }

    let (fl, _) = sl.eval(p, g);
    let (fr, _) = sr.eval(p, g);
    let u_star = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);

    let g6 = (g - 1.0) / (g + 1.0);
    let star_density = |s: &Side| {
        let ratio = p / s.p;
        if p > s.p {
            s.rho * (ratio + g6) / (g6 * ratio + 1.0)
        } else {
            s.rho * ratio.powf(1.0 / g)
        }
    };
    let rho_star_left = star_density(&sl);
    let rho_star_right = star_density(&sr);

    let shock_factor = |s: &Side| ((g + 1.0) / (2.0 * g) * p / s.p + (g - 1.0) / (2.0 * g)).sqrt();
    let left_wave = if p > sl.p {
        Wave::Shock {
            speed: left.u - sl.a * shock_factor(&sl),
        }
    } else {
        Wave::Rarefaction {
            head: left.u - sl.a,
            tail: u_star - sl.a * (p / sl.p).powf(z),
        }
    };
    let right_wave = if p > sr.p {
        Wave::Shock {
            speed: right.u + sr.a * shock_factor(&sr),
        }
    } else {
        Wave::Rarefaction {
            head: right.u + sr.a,
            tail: u_star + sr.a * (p / sr.p).powf(z),
        }
    };

    Ok(RiemannSolution {
        left: *left,
        right: *right,
        p_star: p,
        u_star,
        rho_star_left,
        rho_star_right,
        left_wave,
        right_wave,
        iterations,
        residual,
        gamma: g,
    })
}

impl RiemannSolution {
    pub fn star_left(&self) -> PrimitiveState {
        PrimitiveState::new(self.rho_star_left, self.u_star, self.p_star)
    }

    pub fn star_right(&self) -> PrimitiveState {
        PrimitiveState::new(self.rho_star_right, self.u_star, self.p_star)
    }

    /// State on the ray `x/t = xi`.
    pub fn sample(&self, xi: f64) -> PrimitiveState {
        let g = self.gamma;
        if xi <= self.u_star {
            let w = &self.left;
            let a = (g * w.p / w.rho).sqrt();
            match self.left_wave {
                Wave::Shock { speed } => {
                    if xi < speed - STATIONARY_SHOCK_EPS {
                        *w
                    } else {
                        self.star_left()
                    }
                }
                Wave::Rarefaction { head, tail } => {
                    if xi <= head {
                        *w
                    } else if xi >= tail {
                        self.star_left()
                    } else {
                        let c = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * a) * (w.u - xi);
                        PrimitiveState::new(
                            w.rho * c.powf(2.0 / (g - 1.0)),
                            2.0 / (g + 1.0) * (a + 0.5 * (g - 1.0) * w.u + xi),
                            w.p * c.powf(2.0 * g / (g - 1.0)),
                        )
                    }
                }
            }
        } else {
            let w = &self.right;
            let a = (g * w.p / w.rho).sqrt();
            match self.right_wave {
                Wave::Shock { speed } => {
                    if xi > speed + STATIONARY_SHOCK_EPS {
                        *w
                    } else {
                        self.star_right()
                    }
                }
                Wave::Rarefaction { head, tail } => {
                    if xi >= head {
                        *w
                    } else if xi <= tail {
                        self.star_right()
                    } else {
                        let c = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * a) * (w.u - xi);
                        PrimitiveState::new(
                            w.rho * c.powf(2.0 / (g - 1.0)),
                            2.0 / (g + 1.0) * (-a + 0.5 * (g - 1.0) * w.u + xi),
                            w.p * c.powf(2.0 * g / (g - 1.0)),
                        )
                    }
                }
            }
        }
    }
}

/// Godunov flux: physical flux of the exact Riemann solution sampled at `x/t = 0`.
pub fn godunov_flux(left: &ConservedState, right: &ConservedState, gas: &GasModel) -> Result<Flux> {
    let wl = left.to_primitive(gas)?;
    let wr = right.to_primitive(gas)?;
    let sol = solve_riemann(&wl, &wr, gas)?;
    Ok(sol.sample(0.0).flux(gas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::{physical_flux, post_shock_state, pre_shock_state};
    use approx::assert_relative_eq;

    fn gas() -> GasModel {
        GasModel::default()
    }

    /// Independent bisection on the monotone pressure function.
    fn bisection_p_star(l: &PrimitiveState, r: &PrimitiveState, g: f64) -> f64 {
        let fk = |p: f64, w: &PrimitiveState| {
            let a = (g * w.p / w.rho).sqrt();
            if p > w.p {
                (p - w.p) * (2.0 / ((g + 1.0) * w.rho) / (p + (g - 1.0) / (g + 1.0) * w.p)).sqrt()
            } else {
                2.0 * a / (g - 1.0) * ((p / w.p).powf((g - 1.0) / (2.0 * g)) - 1.0)
            }
        };
        let f = |p: f64| fk(p, l) + fk(p, r) + r.u - l.u;
        let (mut lo, mut hi) = (0.0, 1.0);
        while f(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn equal_states_have_trivial_solution() {
        let w = PrimitiveState::new(1.3, 0.4, 2.0);
        let s = solve_riemann(&w, &w, &gas()).unwrap();
        assert_relative_eq!(s.p_star, w.p, max_relative = 1e-14);
        assert_relative_eq!(s.u_star, w.u, max_relative = 1e-14);
        assert_relative_eq!(s.rho_star_left, w.rho, max_relative = 1e-14);
    }

    #[test]
    fn stationary_shock_pair() {
        let g = gas();
        let pre = pre_shock_state(1.5, &g);
        let post = post_shock_state(&pre, 1.5, &g).unwrap();
        let s = solve_riemann(&pre, &post, &g).unwrap();
        assert_relative_eq!(s.u_star, 0.9531462, epsilon = 1e-7);
        assert_relative_eq!(s.p_star, 2.4583333, epsilon = 1e-7);
        assert_relative_eq!(s.p_star, bisection_p_star(&pre, &post, g.gamma), epsilon = 1e-10);
        match s.left_wave {
            Wave::Shock { speed } => assert!(speed.abs() <= 1e-10, "speed {speed}"),
            w => panic!("expected shock, got {w:?}"),
        }
        let sampled = s.sample(0.0);
        assert_relative_eq!(sampled.rho, post.rho, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_compression() {
        let l = PrimitiveState::new(1.0, 1.0, 1.0);
        let r = PrimitiveState::new(1.0, -1.0, 1.0);
        let s = solve_riemann(&l, &r, &gas()).unwrap();
        assert!(s.u_star.abs() <= 1e-14);
        assert_relative_eq!(s.p_star, bisection_p_star(&l, &r, 1.4), epsilon = 1e-10);
        assert!(s.left_wave.is_shock() && s.right_wave.is_shock());
    }

    #[test]
    fn sod_problem() {
        // Toro, test 1: p* = 0.30313, u* = 0.92745
        let l = PrimitiveState::new(1.0, 0.0, 1.0);
        let r = PrimitiveState::new(0.125, 0.0, 0.1);
        let s = solve_riemann(&l, &r, &gas()).unwrap();
        assert_relative_eq!(s.p_star, 0.30313, epsilon = 1e-5);
        assert_relative_eq!(s.u_star, 0.92745, epsilon = 1e-5);
        // the fan tail moves left, so x/t = 0 lies in the left star region
        let w0 = s.sample(0.0);
        assert_relative_eq!(w0.p, s.p_star, epsilon = 1e-14);
        assert_relative_eq!(w0.u, s.u_star, epsilon = 1e-14);

        // with u_L = 0.75 the left fan straddles x/t = 0 and the sample is sonic
        let l = PrimitiveState::new(1.0, 0.75, 1.0);
        let s = solve_riemann(&l, &r, &gas()).unwrap();
        let w0 = s.sample(0.0);
        assert!(w0.p < l.p && w0.p > s.p_star);
        let (a, _) = w0.sound_speed_and_mach(&gas());
        assert_relative_eq!(w0.u, a, epsilon = 1e-12);
    }

    #[test]
    fn vacuum_is_rejected() {
        let l = PrimitiveState::new(1.0, -20.0, 0.4);
        let r = PrimitiveState::new(1.0, 20.0, 0.4);
        assert!(matches!(solve_riemann(&l, &r, &gas()), Err(Error::Vacuum(_))));
    }

    #[test]
    fn supersonic_flow_is_upwinded() {
        let g = gas();
        let l = PrimitiveState::new(1.0, 3.0, 1.0).to_conserved(&g);
        let r = PrimitiveState::new(1.1, 3.1, 1.05).to_conserved(&g);
        let f = godunov_flux(&l, &r, &g).unwrap();
        assert_eq!(f, physical_flux(&l, &g).unwrap());
        let l = PrimitiveState::new(1.0, -3.0, 1.0).to_conserved(&g);
        let r = PrimitiveState::new(1.1, -3.1, 1.05).to_conserved(&g);
        let f = godunov_flux(&l, &r, &g).unwrap();
        let fr = physical_flux(&r, &g).unwrap();
        for k in 0..3 {
            assert_relative_eq!(f[k], fr[k], max_relative = 1e-15);
        }
    }

    #[test]
    fn stationary_shock_flux() {
        let g = gas();
        let pre = pre_shock_state(1.5, &g);
        let post = post_shock_state(&pre, 1.5, &g).unwrap();
        let f = godunov_flux(&pre.to_conserved(&g), &post.to_conserved(&g), &g).unwrap();
        let expected = [1.7748239, 4.15, 9.0072314];
        for k in 0..3 {
            assert!((f[k] - expected[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn sampled_star_states_satisfy_wave_relations() {
        let g = gas();
        let l = PrimitiveState::new(1.0, 0.75, 1.0);
        let r = PrimitiveState::new(0.125, 0.0, 0.1);
        let s = solve_riemann(&l, &r, &g).unwrap();
        // right shock: mass flux through the shock is continuous
        if let Wave::Shock { speed } = s.right_wave {
            let lhs = s.rho_star_right * (s.u_star - speed);
            let rhs = r.rho * (r.u - speed);
            assert!((lhs - rhs).abs() <= 1e-10);
        } else {
            panic!("expected right shock");
        }
        // left rarefaction: isentropic
        let ent = |w: &PrimitiveState| w.p / w.rho.powf(g.gamma);
        assert_relative_eq!(ent(&s.star_left()), ent(&l), max_relative = 1e-12);
    }
}
