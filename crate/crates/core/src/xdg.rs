//! Broken polynomial space on the cut-cell grid and the DG discretization of
//! the Euler equations on it.
//!
//! Every non-empty cut-cell (an [`Element`]) carries `P + 1` modes per
//! conserved component. The modes are Legendre polynomials of the *background*
//! cell mapped to `[-1, 1]` and restricted to the cut-cell, so the two halves
//! of a cut cell share a basis but not their coefficients. The mass matrices
//! of cut-cells are therefore dense.
//!
//! Coefficient layout: `dof(e, c, i) = (e * 3 + c) * (P + 1) + i`.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::euler::{physical_flux, ConservedState, Flux, GasModel};
use crate::exec::Execution;
use crate::error::{Error, Result};
use crate::grid::{CutCellGrid, Edge, EdgeKind, Element, Species};
use crate::quadrature::{legendre_all, GaussRule};

pub const NUM_COMPONENTS: usize = 3;

/// Quadrature points used when projecting arbitrary (non-polynomial)
/// functions onto the space.
const PROJECTION_POINTS: usize = 16;

/// Below this element count the residual is always assembled sequentially.
pub const PARALLEL_MIN_ELEMENTS: usize = 64;

#[derive(Debug, Clone)]
struct ElementData {
    center: f64,
    half: f64,
    quad_x: Vec<f64>,
    quad_w: Vec<f64>,
    /// `phi[q * nb + i]`
    phi: Vec<f64>,
    dphi: Vec<f64>,
    phi_lo: Vec<f64>,
    phi_hi: Vec<f64>,
    mass: DMatrix<f64>,
    /// `∫ phi_i dx`
    moments: Vec<f64>,
}

/// Polynomial space of degree `P` on every non-empty cut-cell of a grid.
#[derive(Debug, Clone)]
pub struct XdgSpace {
    grid: CutCellGrid,
    degree: usize,
    rule: GaussRule,
    data: Vec<ElementData>,
}

impl XdgSpace {
    /// Uses `2P + 2` Gauss points per cut-cell for volume integrals.
    pub fn new(grid: CutCellGrid, degree: usize) -> Result<Self> {
        Self::with_quadrature(grid, degree, 2 * degree + 2)
    }

    pub fn with_quadrature(grid: CutCellGrid, degree: usize, points: usize) -> Result<Self> {
        if points < degree + 1 {
            return Err(Error::Config(format!(
                "{points} quadrature points cannot integrate the degree-{degree} mass matrix"
            )));
        }
        let rule = GaussRule::new(points);
        let nb = degree + 1;
        let mut data = Vec::with_capacity(grid.num_elements());
        let mut vals = vec![0.0; nb];
        let mut ders = vec![0.0; nb];
        for (e, el) in grid.elements().iter().enumerate() {
            if el.is_empty() {
                return Err(Error::EmptyElement { element: e });
            }
            let (lo, hi) = grid.background.cell(el.cell);
            let center = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let mut quad_x = Vec::with_capacity(points);
            let mut quad_w = Vec::with_capacity(points);
            let mut phi = Vec::with_capacity(points * nb);
            let mut dphi = Vec::with_capacity(points * nb);
            for (x, w) in rule.mapped(el.x_lo, el.x_hi) {
                quad_x.push(x);
                quad_w.push(w);
                legendre_all(degree, (x - center) / half, &mut vals, &mut ders);
                phi.extend_from_slice(&vals);
                dphi.extend(ders.iter().map(|d| d / half));
            }
            legendre_all(degree, (el.x_lo - center) / half, &mut vals, &mut ders);
            let phi_lo = vals.clone();
            legendre_all(degree, (el.x_hi - center) / half, &mut vals, &mut ders);
            let phi_hi = vals.clone();

            let mut mass = DMatrix::zeros(nb, nb);
            for q in 0..points {
                let row = &phi[q * nb..(q + 1) * nb];
                for i in 0..nb {
                    for k in 0..nb {
                        mass[(i, k)] += quad_w[q] * row[i] * row[k];
                    }
                }
            }
            let moments = (0..nb).map(|i| mass[(0, i)]).collect();
            if Cholesky::new(mass.clone()).is_none() {
                return Err(Error::SingularMass { element: e });
            }
            data.push(ElementData {
                center,
                half,
                quad_x,
                quad_w,
                phi,
                dphi,
                phi_lo,
                phi_hi,
                mass,
                moments,
            });
        }
        Ok(XdgSpace {
            grid,
            degree,
            rule,
            data,
        })
    }

    pub fn grid(&self) -> &CutCellGrid {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_basis(&self) -> usize {
        self.degree + 1
    }

    pub fn dofs_per_element(&self) -> usize {
        NUM_COMPONENTS * self.num_basis()
    }

    pub fn num_elements(&self) -> usize {
        self.data.len()
    }

    pub fn num_dofs(&self) -> usize {
        self.num_elements() * self.dofs_per_element()
    }

    pub fn dof(&self, element: usize, component: usize, mode: usize) -> usize {
        (element * NUM_COMPONENTS + component) * self.num_basis() + mode
    }

    pub fn element(&self, e: usize) -> &Element {
        &self.grid.elements()[e]
    }

    pub fn mass(&self, e: usize) -> &DMatrix<f64> {
        &self.data[e].mass
    }

    /// Spectral condition number of an element mass matrix.
    pub fn mass_condition(&self, e: usize) -> f64 {
        let eig = self.data[e].mass.clone().symmetric_eigen().eigenvalues;
        let max = eig.iter().cloned().fold(f64::MIN, f64::max);
        let min = eig.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }

    /// Volume quadrature points and weights of element `e`.
    pub fn quadrature(&self, e: usize) -> (&[f64], &[f64]) {
        (&self.data[e].quad_x, &self.data[e].quad_w)
    }

    /// Basis values of element `e` at `x` (any `x`, the polynomials extend).
    pub fn basis_at(&self, e: usize, x: f64, out: &mut [f64]) {
        let d = &self.data[e];
        let mut ders = vec![0.0; self.num_basis()];
        legendre_all(self.degree, (x - d.center) / d.half, out, &mut ders);
    }

    /// Weighted least-squares fit of element `e`'s basis to `values` sampled
    /// at quadrature `points` `(x, w)`. When the rule integrates the products
    /// exactly this is the L2 projection. Solving through a QR factorization
    /// of `sqrt(w) phi` instead of the mass matrix keeps thin cut-cells
    /// accurate, since the condition number enters only by its square root.
    fn fit(&self, e: usize, points: &[(f64, f64)], values: &[[f64; NUM_COMPONENTS]]) -> [Vec<f64>; NUM_COMPONENTS] {
        let nb = self.num_basis();
        let mut a = DMatrix::zeros(points.len(), nb);
        let mut phi = vec![0.0; nb];
        for (q, &(x, w)) in points.iter().enumerate() {
            self.basis_at(e, x, &mut phi);
            let sw = w.sqrt();
            for i in 0..nb {
                a[(q, i)] = sw * phi[i];
            }
        }
        let qr = a.qr();
        let (q, r) = (qr.q(), qr.r());
        std::array::from_fn(|c| {
            let b = DVector::from_iterator(points.len(), points.iter().zip(values).map(|(&(_, w), v)| w.sqrt() * v[c]));
            let qtb = q.transpose() * b;
            r.solve_upper_triangular(&qtb)
                .expect("mass matrix was checked to be positive definite")
                .data
                .into()
        })
    }

    /// `out = (M ⊗ I_3) v`, block diagonal over elements.
    pub fn apply_mass(&self, v: &[f64], out: &mut [f64]) {
        let nb = self.num_basis();
        for (e, d) in self.data.iter().enumerate() {
            for c in 0..NUM_COMPONENTS {
                let base = self.dof(e, c, 0);
                for i in 0..nb {
                    out[base + i] = (0..nb).map(|k| d.mass[(i, k)] * v[base + k]).sum();
                }
            }
        }
    }
}

/// Modal coefficients of the three conserved components on an [`XdgSpace`].
#[derive(Debug, Clone)]
pub struct XdgField {
    space: Arc<XdgSpace>,
    coeffs: Vec<f64>,
}

impl XdgField {
    pub fn zeros(space: Arc<XdgSpace>) -> Self {
        let n = space.num_dofs();
        XdgField {
            space,
            coeffs: vec![0.0; n],
        }
    }

    pub fn from_coeffs(space: Arc<XdgSpace>, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), space.num_dofs(), "coefficient vector does not match the space");
        XdgField { space, coeffs }
    }

    /// L2 projection of `f` onto the space.
    pub fn project<F>(space: Arc<XdgSpace>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> [f64; NUM_COMPONENTS],
    {
        Self::project_with_breaks(space, f, &[])
    }

    /// L2 projection of a piecewise smooth `f`; quadrature is split at every
    /// point of `breaks` inside an element so jumps there are integrated exactly.
    pub fn project_with_breaks<F>(space: Arc<XdgSpace>, f: F, breaks: &[f64]) -> Result<Self>
    where
        F: Fn(f64) -> [f64; NUM_COMPONENTS],
    {
        let rule = GaussRule::new(PROJECTION_POINTS.max(space.degree + 1));
        let nb = space.num_basis();
        let mut coeffs = vec![0.0; space.num_dofs()];
        for e in 0..space.num_elements() {
            let el = *space.element(e);
            let mut cuts: Vec<f64> = vec![el.x_lo];
            cuts.extend(breaks.iter().copied().filter(|&b| b > el.x_lo && b < el.x_hi));
            cuts.push(el.x_hi);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            // interior quadrature points only, so a break belongs to neither side
            let points: Vec<(f64, f64)> = cuts.windows(2).flat_map(|seg| rule.mapped(seg[0], seg[1])).collect();
            let values: Vec<_> = points.iter().map(|&(x, _)| f(x)).collect();
            for (c, sol) in space.fit(e, &points, &values).iter().enumerate() {
                let base = space.dof(e, c, 0);
                coeffs[base..base + nb].copy_from_slice(sol);
            }
        }
        Ok(XdgField { space, coeffs })
    }

    pub fn space(&self) -> &Arc<XdgSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Value of the polynomial of element `e` at `x`.
    pub fn element_value(&self, e: usize, x: f64) -> [f64; NUM_COMPONENTS] {
        let mut phi = vec![0.0; self.space.num_basis()];
        self.space.basis_at(e, x, &mut phi);
        element_value_with(&self.space, &self.coeffs, e, &phi)
    }

    /// Field value at `x`. At edges and at the interface `side` picks the
    /// one-sided limit: `A` the left limit, `B` the right limit.
    pub fn evaluate(&self, x: f64, side: Species) -> [f64; NUM_COMPONENTS] {
        let e = self.space.grid().locate(x, side);
        self.element_value(e, x)
    }

    pub fn state(&self, x: f64, side: Species) -> ConservedState {
        ConservedState::from_array(self.evaluate(x, side))
    }

    /// Mean of every component over element `e` (the zeroth-order projection).
    pub fn element_mean(&self, e: usize) -> [f64; NUM_COMPONENTS] {
        let d = &self.space.data[e];
        let len = self.space.element(e).len();
        let mut out = [0.0; NUM_COMPONENTS];
        for (c, o) in out.iter_mut().enumerate() {
            let base = self.space.dof(e, c, 0);
            *o = d
                .moments
                .iter()
                .zip(&self.coeffs[base..base + self.space.num_basis()])
                .map(|(m, a)| m * a)
                .sum::<f64>()
                / len;
        }
        out
    }

    /// Zeroth-order projection of `component` on the cut-cell `(cell, species)`.
    pub fn p0_projection(&self, cell: usize, species: Species, component: usize) -> Result<f64> {
        let e = self
            .space
            .grid()
            .element_index(cell, species)
            .ok_or(Error::EmptyElement { element: cell })?;
        Ok(self.element_mean(e)[component])
    }

    /// Zeroth Legendre coefficient of the `(cell, species)` polynomial. The
    /// basis lives on the background cell, so this is the mean of the
    /// polynomial extended over the whole background cell.
    pub fn background_mode(&self, cell: usize, species: Species, component: usize) -> Result<f64> {
        let e = self
            .space
            .grid()
            .element_index(cell, species)
            .ok_or(Error::EmptyElement { element: cell })?;
        Ok(self.coeffs[self.space.dof(e, component, 0)])
    }

    /// Jump `psi^- - psi^+` on interior edges and the interface, `psi^-` on
    /// the domain boundary. `-` is the side opposite to the edge normal.
    pub fn jump(&self, edge: &Edge) -> [f64; NUM_COMPONENTS] {
        let val = |e: usize| self.element_value(e, edge.x);
        match edge.kind {
            // n = -1 at the left boundary, so psi^- is the interior trace
            EdgeKind::BoundaryLeft => val(edge.plus.unwrap()),
            EdgeKind::BoundaryRight => val(edge.minus.unwrap()),
            EdgeKind::Interior | EdgeKind::Interface => {
                let m = val(edge.minus.unwrap());
                let p = val(edge.plus.unwrap());
                [m[0] - p[0], m[1] - p[1], m[2] - p[2]]
            }
        }
    }

    /// L2 transfer onto another cut-cell grid over the same background grid.
    ///
    /// Unchanged elements are copied. A changed element is projected by
    /// integrating the old piecewise polynomial over each overlapping old
    /// element, so the donor side is decided by the old interface position
    /// and the transfer is exact and conservative.
    pub fn transfer(&self, target: Arc<XdgSpace>) -> XdgField {
        let nb = target.num_basis();
        assert_eq!(nb, self.space.num_basis(), "transfer between different degrees");
        let old_grid = self.space.grid();
        let rule = &target.rule;
        let mut coeffs = vec![0.0; target.num_dofs()];
        let mut phi_old = vec![0.0; nb];
        for (e, el) in target.grid().elements().iter().enumerate() {
            if let Some(o) = old_grid.elements().iter().position(|old| old == el) {
                for c in 0..NUM_COMPONENTS {
                    let src = self.space.dof(o, c, 0);
                    let dst = target.dof(e, c, 0);
                    coeffs[dst..dst + nb].copy_from_slice(&self.coeffs[src..src + nb]);
                }
                continue;
            }
            let mut points = Vec::new();
            let mut values = Vec::new();
            for (o, old) in old_grid.elements().iter().enumerate() {
                let a = el.x_lo.max(old.x_lo);
                let b = el.x_hi.min(old.x_hi);
                if !(b > a) {
                    continue;
                }
                for (x, w) in rule.mapped(a, b) {
                    self.space.basis_at(o, x, &mut phi_old);
                    points.push((x, w));
                    values.push(element_value_with(&self.space, &self.coeffs, o, &phi_old));
                }
            }
            for (c, sol) in target.fit(e, &points, &values).iter().enumerate() {
                let dst = target.dof(e, c, 0);
                coeffs[dst..dst + nb].copy_from_slice(sol);
            }
        }
        XdgField { space: target, coeffs }
    }
}

fn element_value_with(space: &XdgSpace, coeffs: &[f64], e: usize, phi: &[f64]) -> [f64; NUM_COMPONENTS] {
    let nb = space.num_basis();
    let mut out = [0.0; NUM_COMPONENTS];
    for (c, o) in out.iter_mut().enumerate() {
        let base = space.dof(e, c, 0);
        *o = coeffs[base..base + nb].iter().zip(phi).map(|(a, p)| a * p).sum();
    }
    out
}

/// Semi-discrete DG operator `R(U)` for the Euler equations on a fixed
/// cut-cell grid with Dirichlet states at both domain ends.
///
/// Per element and mode `i`:
/// `R_i = -∫ F(U_h) phi_i' dx + F̂(x_hi) phi_i(x_hi) - F̂(x_lo) phi_i(x_lo)`
/// with the exact Godunov flux on every edge, including the interface.
#[derive(Debug, Clone)]
pub struct EulerOperator {
    pub space: Arc<XdgSpace>,
    pub gas: GasModel,
    pub bc_left: ConservedState,
    pub bc_right: ConservedState,
    pub execution: Execution,
}

impl EulerOperator {
    pub fn new(space: Arc<XdgSpace>, gas: GasModel, bc_left: ConservedState, bc_right: ConservedState) -> Self {
        EulerOperator {
            space,
            gas,
            bc_left,
            bc_right,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    fn assembly_execution(&self) -> Execution {
        if self.space.num_elements() >= PARALLEL_MIN_ELEMENTS {
            self.execution
        } else {
            Execution::Sequential
        }
    }

    fn trace(&self, coeffs: &[f64], e: usize, hi: bool) -> ConservedState {
        let d = &self.space.data[e];
        let phi = if hi { &d.phi_hi } else { &d.phi_lo };
        ConservedState::from_array(element_value_with(&self.space, coeffs, e, phi))
    }

    /// Numerical flux on every edge, left to right (`num_elements + 1` values).
    pub fn edge_fluxes(&self, coeffs: &[f64]) -> Result<Vec<Flux>> {
        let n = self.space.num_elements();
        let gas = &self.gas;
        let fluxes = self.assembly_execution().map(n + 1, |f| {
            let (left, right, owner) = if f == 0 {
                (self.bc_left, self.trace(coeffs, 0, false), 0)
            } else if f == n {
                (self.trace(coeffs, n - 1, true), self.bc_right, n - 1)
            } else {
                (self.trace(coeffs, f - 1, true), self.trace(coeffs, f, false), f)
            };
            crate::riemann::godunov_flux(&left, &right, gas).map_err(|err| Error::Residual {
                element: owner,
                source: Box::new(err),
            })
        });
        fluxes.into_iter().collect()
    }

    pub fn residual(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.space.num_dofs()];
        self.residual_into(coeffs, &mut out)?;
        Ok(out)
    }

    pub fn residual_into(&self, coeffs: &[f64], out: &mut [f64]) -> Result<()> {
        let space = &*self.space;
        assert_eq!(coeffs.len(), space.num_dofs());
        let fluxes = self.edge_fluxes(coeffs)?;
        let nb = space.num_basis();
        let errors = std::sync::Mutex::new(None);
        self.assembly_execution()
            .for_each_chunk(out, space.dofs_per_element(), |e, block| {
                if let Err(err) = self.element_residual(coeffs, &fluxes, e, block) {
                    errors.lock().unwrap().get_or_insert(err);
                }
            });
        debug_assert_eq!(out.len(), space.num_elements() * NUM_COMPONENTS * nb);
        match errors.into_inner().unwrap() {
            Some(err) => Err(err),
            None => Ok(()),
        }
    }

    fn element_residual(&self, coeffs: &[f64], fluxes: &[Flux], e: usize, block: &mut [f64]) -> Result<()> {
        let space = &*self.space;
        let d = &space.data[e];
        let nb = space.num_basis();
        block.iter_mut().for_each(|v| *v = 0.0);
        for q in 0..d.quad_x.len() {
            let phi = &d.phi[q * nb..(q + 1) * nb];
            let u = ConservedState::from_array(element_value_with(space, coeffs, e, phi));
            let f = physical_flux(&u, &self.gas).map_err(|err| Error::Residual {
                element: e,
                source: Box::new(err),
            })?;
            let dphi = &d.dphi[q * nb..(q + 1) * nb];
            let w = d.quad_w[q];
            for c in 0..NUM_COMPONENTS {
                for i in 0..nb {
                    block[c * nb + i] -= w * f[c] * dphi[i];
                }
            }
        }
        let (f_lo, f_hi) = (&fluxes[e], &fluxes[e + 1]);
        for c in 0..NUM_COMPONENTS {
            for i in 0..nb {
                block[c * nb + i] += f_hi[c] * d.phi_hi[i] - f_lo[c] * d.phi_lo[i];
            }
        }
        Ok(())
    }
}
