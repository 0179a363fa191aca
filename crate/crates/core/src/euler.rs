//! Ideal-gas Euler model: state conversions, convective flux, normal-shock
//! relations and the smoothed shock profile used as initial condition.

use crate::error::{Error, Result, StateComponent};

/// Conserved variables `(rho, rho u, rho E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedState {
    pub rho: f64,
    pub mom: f64,
    pub energy: f64,
}

/// Primitive variables `(rho, u, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

/// Flux triple, same component order as [`ConservedState`].
pub type Flux = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    pub gamma: f64,
    pub mach_ref: f64,
}

impl Default for GasModel {
    fn default() -> Self {
        let gamma = 1.4;
        GasModel {
            gamma,
            mach_ref: 1.0 / f64::sqrt(gamma),
        }
    }
}

impl GasModel {
    /// Gas with reference Mach number `1/sqrt(gamma)`, which makes the
    /// non-dimensional flux identical to the dimensional one.
    pub fn with_gamma(gamma: f64) -> Result<Self> {
        Self::new(gamma, 1.0 / gamma.sqrt())
    }

    pub fn new(gamma: f64, mach_ref: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::Config(format!("gamma must be > 1, got {gamma}")));
        }
        if !(mach_ref > 0.0) || !mach_ref.is_finite() {
            return Err(Error::Config(format!("mach_ref must be > 0, got {mach_ref}")));
        }
        Ok(GasModel { gamma, mach_ref })
    }

    /// `1 / (gamma M_ref^2)`.
    pub fn flux_prefactor(&self) -> f64 {
        let m2 = self.mach_ref * self.mach_ref;
        let pf = 1.0 / (self.gamma * m2);
        // 1/(g * (1/sqrt(g))^2) is not exactly 1 in floating point for every g.
        if (pf - 1.0).abs() < 8.0 * f64::EPSILON {
            1.0
        } else {
            pf
        }
    }
}

impl ConservedState {
    pub fn new(rho: f64, mom: f64, energy: f64) -> Self {
        ConservedState { rho, mom, energy }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        ConservedState::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.rho, self.mom, self.energy]
    }

    pub fn to_primitive(&self, gas: &GasModel) -> Result<PrimitiveState> {
        if !(self.rho > 0.0) {
            return Err(Error::InvalidState {
                component: StateComponent::Density,
                value: self.rho,
            });
        }
        let u = self.mom / self.rho;
        let p = (gas.gamma - 1.0) * (self.energy - 0.5 * self.mom * u);
        if !(p > 0.0) {
            return Err(Error::InvalidState {
                component: StateComponent::Pressure,
                value: p,
            });
        }
        Ok(PrimitiveState { rho: self.rho, u, p })
    }
}

impl PrimitiveState {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        PrimitiveState { rho, u, p }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(Error::InvalidState {
                component: StateComponent::Density,
                value: self.rho,
            });
        }
        if !(self.p > 0.0) {
            return Err(Error::InvalidState {
                component: StateComponent::Pressure,
                value: self.p,
            });
        }
        Ok(())
    }

    pub fn to_conserved(&self, gas: &GasModel) -> ConservedState {
        let mom = self.rho * self.u;
        ConservedState {
            rho: self.rho,
            mom,
            energy: self.p / (gas.gamma - 1.0) + 0.5 * mom * self.u,
        }
    }

    pub fn sound_speed(&self, gas: &GasModel) -> f64 {
        (gas.gamma * self.p / self.rho).sqrt()
    }

    /// Local speed of sound and Mach number `|u| / a`.
    pub fn sound_speed_and_mach(&self, gas: &GasModel) -> (f64, f64) {
        let a = self.sound_speed(gas);
        (a, self.u.abs() / a)
    }

    /// Convective flux evaluated from primitives.
    pub fn flux(&self, gas: &GasModel) -> Flux {
        let pf = gas.flux_prefactor();
        let mom = self.rho * self.u;
        let energy = self.p / (gas.gamma - 1.0) + 0.5 * mom * self.u;
        [
            pf * mom,
            pf * (mom * self.u + self.p),
            pf * (self.u * (energy + self.p)),
        ]
    }
}

/// Convective flux `1/(gamma M_ref^2) (rho u, rho u^2 + p, u (rho E + p))`.
pub fn physical_flux(state: &ConservedState, gas: &GasModel) -> Result<Flux> {
    let w = state.to_primitive(gas)?;
    let pf = gas.flux_prefactor();
    Ok([
        pf * state.mom,
        pf * (state.mom * w.u + w.p),
        pf * (w.u * (state.energy + w.p)),
    ])
}

/// Pre-shock state `(1, sqrt(gamma p/rho) M_s, 1)` of the stationary shock test.
pub fn pre_shock_state(mach_s: f64, gas: &GasModel) -> PrimitiveState {
    let (rho, p) = (1.0, 1.0);
    PrimitiveState {
        rho,
        u: (gas.gamma * p / rho).sqrt() * mach_s,
        p,
    }
}

/// Normal-shock relations: state behind a stationary shock of Mach number
/// `mach_s` with upstream state `pre`.
pub fn post_shock_state(pre: &PrimitiveState, mach_s: f64, gas: &GasModel) -> Result<PrimitiveState> {
    if !(mach_s >= 1.0) {
        return Err(Error::ExpansionShock(mach_s));
    }
    pre.validate()?;
    let g = gas.gamma;
    let m2 = mach_s * mach_s;
    let num = (g + 1.0) * m2;
    let den = 2.0 + (g - 1.0) * m2;
    Ok(PrimitiveState {
        rho: num / den * pre.rho,
        u: den / num * pre.u,
        p: (1.0 + 2.0 * g / (g + 1.0) * (m2 - 1.0)) * pre.p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    /// Smoothing strength factor.
    pub c_tilde: f64,
    /// Characteristic cell size.
    pub h: f64,
    /// Polynomial degree of the discretization.
    pub degree: usize,
}

impl SmoothingParams {
    pub fn new(c_tilde: f64, h: f64, degree: usize) -> Result<Self> {
        if !(c_tilde > 0.0) || !(h > 0.0) {
            return Err(Error::Config(format!(
                "smoothing needs c_tilde > 0 and h > 0 (got {c_tilde}, {h})"
            )));
        }
        Ok(SmoothingParams { c_tilde, h, degree })
    }

    /// Transition width `c_tilde h / max(1, P)`.
    pub fn width(&self) -> f64 {
        self.c_tilde * self.h / self.degree.max(1) as f64
    }
}

/// Smoothed Heaviside step `0.5 (tanh((x - x_s)/width) + 1)`.
///
/// The literal printed form `0.5 tanh(|x - x_s| / (C h / max(0, P)) + 1)` is
/// symmetric about `x_s` and never transitions, so the signed form is used.
pub fn smoothed_heaviside(x: f64, x_s: f64, sp: &SmoothingParams) -> f64 {
    0.5 * (((x - x_s) / sp.width()).tanh() + 1.0)
}

/// Smoothed shock profile `U_pre - H(x) (U_pre - U_post)` applied to every
/// conserved component.
pub fn smoothed_initial_state(
    x: f64,
    pre: &ConservedState,
    post: &ConservedState,
    x_s: f64,
    sp: &SmoothingParams,
) -> ConservedState {
    let h = smoothed_heaviside(x, x_s, sp);
    ConservedState {
        rho: pre.rho - h * (pre.rho - post.rho),
        mom: pre.mom - h * (pre.mom - post.mom),
        energy: pre.energy - h * (pre.energy - post.energy),
    }
}

/// Primitive view of [`smoothed_initial_state`].
pub fn smoothed_initial_value(
    x: f64,
    pre: &PrimitiveState,
    post: &PrimitiveState,
    x_s: f64,
    sp: &SmoothingParams,
    gas: &GasModel,
) -> Result<PrimitiveState> {
    smoothed_initial_state(x, &pre.to_conserved(gas), &post.to_conserved(gas), x_s, sp).to_primitive(gas)
}
