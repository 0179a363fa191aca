//! Background grid, level set and cut-cell construction.
//!
//! The domain is split by a single interface point into sub-domain A (left)
//! and B (right). The background cell containing the interface is replaced by
//! two cut-cells; every other cell is recovered unchanged as a pure cell.

use crate::error::{Error, Result};

const FRACTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundGrid {
    pub x_left: f64,
    pub x_right: f64,
    nodes: Vec<f64>,
}

impl BackgroundGrid {
    /// Equispaced grid with `cells` cells on `(x_left, x_right)`.
    pub fn uniform(x_left: f64, x_right: f64, cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::Config("grid needs at least one cell".into()));
        }
        if !(x_left < x_right) || !x_left.is_finite() || !x_right.is_finite() {
            return Err(Error::Config(format!("degenerate domain ({x_left}, {x_right})")));
        }
        let len = x_right - x_left;
        let mut nodes: Vec<f64> = (0..=cells)
            .map(|j| x_left + len * j as f64 / cells as f64)
            .collect();
        nodes[cells] = x_right;
        Ok(BackgroundGrid { x_left, x_right, nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn num_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn cell(&self, j: usize) -> (f64, f64) {
        (self.nodes[j], self.nodes[j + 1])
    }

    pub fn cell_len(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    /// Characteristic length `max_j |K_j|`.
    pub fn h(&self) -> f64 {
        (0..self.num_cells()).map(|j| self.cell_len(j)).fold(0.0, f64::max)
    }

    /// Index of the cell with `x_j <= x < x_{j+1}`, the last cell for `x = x_right`.
    pub fn locate(&self, x: f64) -> usize {
        let n = self.num_cells();
        match self.nodes.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(k) => k.min(n - 1),
            Err(k) => k.saturating_sub(1).min(n - 1),
        }
    }
}

/// Level set `phi(x) = x - x_interface`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSet {
    pub x_interface: f64,
}

impl LevelSet {
    pub fn new(x_interface: f64, grid: &BackgroundGrid) -> Result<Self> {
        if !(x_interface > grid.x_left && x_interface < grid.x_right) {
            return Err(Error::Config(format!(
                "interface {x_interface} outside domain ({}, {})",
                grid.x_left, grid.x_right
            )));
        }
        Ok(LevelSet { x_interface })
    }

    pub fn eval(&self, x: f64) -> f64 {
        x - self.x_interface
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Species {
    A,
    B,
}

impl Species {
    pub fn label(self) -> &'static str {
        match self {
            Species::A => "A",
            Species::B => "B",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Occupancy {
    Pure(Species),
    Cut,
}

/// The background cell split by the interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutCell {
    pub cell: usize,
    pub x_interface: f64,
    pub extent_a: (f64, f64),
    pub extent_b: (f64, f64),
    pub frac_a: f64,
    pub frac_b: f64,
}

impl CutCell {
    pub fn background_len(&self) -> f64 {
        self.extent_b.1 - self.extent_a.0
    }
}

/// A non-empty cut-cell `K_j ∩ s`; the unit that carries degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub cell: usize,
    pub species: Species,
    pub x_lo: f64,
    pub x_hi: f64,
}

impl Element {
    pub fn len(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn is_empty(&self) -> bool {
        !(self.x_hi > self.x_lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_lo && x <= self.x_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    BoundaryLeft,
    BoundaryRight,
    Interior,
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub x: f64,
    pub kind: EdgeKind,
    /// Element on the `-n` side, `None` outside the domain.
    pub minus: Option<usize>,
    /// Element on the `+n` side.
    pub plus: Option<usize>,
}

impl Edge {
    /// Normal field: -1 at the left boundary, +1 everywhere else.
    pub fn normal(&self) -> f64 {
        match self.kind {
            EdgeKind::BoundaryLeft => -1.0,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutCellGrid {
    pub background: BackgroundGrid,
    pub level_set: LevelSet,
    pub occupancy: Vec<Occupancy>,
    pub cut: Option<CutCell>,
    elements: Vec<Element>,
}

impl CutCellGrid {
    pub fn cut(background: &BackgroundGrid, level_set: LevelSet) -> Self {
        let x_i = level_set.x_interface;
        let n = background.num_cells();
        let nodes = background.nodes();
        let mut occupancy = Vec::with_capacity(n);
        let mut elements = Vec::with_capacity(n + 1);
        let mut cut = None;
        for j in 0..n {
            let (lo, hi) = background.cell(j);
            if hi <= x_i {
                occupancy.push(Occupancy::Pure(Species::A));
                elements.push(Element {
                    cell: j,
                    species: Species::A,
                    x_lo: lo,
                    x_hi: hi,
                });
            } else if lo >= x_i {
                occupancy.push(Occupancy::Pure(Species::B));
                elements.push(Element {
                    cell: j,
                    species: Species::B,
                    x_lo: lo,
                    x_hi: hi,
                });
            } else {
                let len = hi - lo;
                occupancy.push(Occupancy::Cut);
                let cc = CutCell {
                    cell: j,
                    x_interface: x_i,
                    extent_a: (lo, x_i),
                    extent_b: (x_i, hi),
                    frac_a: (x_i - lo) / len,
                    frac_b: (hi - x_i) / len,
                };
                elements.push(Element {
                    cell: j,
                    species: Species::A,
                    x_lo: lo,
                    x_hi: x_i,
                });
                elements.push(Element {
                    cell: j,
                    species: Species::B,
                    x_lo: x_i,
                    x_hi: hi,
                });
                cut = Some(cc);
            }
        }
        debug_assert_eq!(elements.first().map(|e| e.x_lo), Some(nodes[0]));
        CutCellGrid {
            background: background.clone(),
            level_set,
            occupancy,
            cut,
            elements,
        }
    }

    pub fn x_interface(&self) -> f64 {
        self.level_set.x_interface
    }

    /// Non-empty cut-cells ordered left to right.
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Element index of `(cell, species)` if that cut-cell is non-empty.
    pub fn element_index(&self, cell: usize, species: Species) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| e.cell == cell && e.species == species)
    }

    /// Element containing `x`; at shared edges and at the interface the
    /// species selects the side (A = left limit, B = right limit).
    pub fn locate(&self, x: f64, side: Species) -> usize {
        let n = self.elements.len();
        let first = self.elements.iter().position(|e| e.contains(x)).unwrap_or(if x < self.background.x_left {
            0
        } else {
            n - 1
        });
        match side {
            Species::A => first,
            Species::B => {
                if first + 1 < n && self.elements[first].x_hi == x {
                    first + 1
                } else {
                    first
                }
            }
        }
    }

    /// All edges: both boundaries, interior nodes and the interface, ordered by x.
    pub fn edges(&self) -> Vec<Edge> {
        let n = self.elements.len();
        let mut out = Vec::with_capacity(n + 1);
        out.push(Edge {
            x: self.elements[0].x_lo,
            kind: EdgeKind::BoundaryLeft,
            minus: None,
            plus: Some(0),
        });
        for e in 1..n {
            let left = &self.elements[e - 1];
            let right = &self.elements[e];
            let kind = if left.cell == right.cell {
                EdgeKind::Interface
            } else {
                EdgeKind::Interior
            };
            out.push(Edge {
                x: right.x_lo,
                kind,
                minus: Some(e - 1),
                plus: Some(e),
            });
        }
        out.push(Edge {
            x: self.elements[n - 1].x_hi,
            kind: EdgeKind::BoundaryRight,
            minus: Some(n - 1),
            plus: None,
        });
        out
    }

    /// True iff both cut-cell volume fractions are at least `delta_agg`, or
    /// nothing is cut. The comparison absorbs round-off in the fractions, so
    /// `0.57` on `(0.5, 0.6)` passes `delta_agg = 0.3`.
    pub fn well_placed(&self, delta_agg: f64) -> bool {
        match &self.cut {
            None => true,
            Some(c) => c.frac_a >= delta_agg - FRACTION_TOL && c.frac_b >= delta_agg - FRACTION_TOL,
        }
    }

    pub fn check_well_placed(&self, delta_agg: f64) -> Result<()> {
        match &self.cut {
            Some(c) if !self.well_placed(delta_agg) => Err(Error::NotWellPlaced {
                x: c.x_interface,
                frac_a: c.frac_a,
                frac_b: c.frac_b,
                delta_agg,
            }),
            _ => Ok(()),
        }
    }

    /// Pure neighbor cells of the cut cell, `width` on each side.
    pub fn near_band(&self, width: usize) -> Result<NearBand> {
        let c = self.cut.ok_or(Error::NoCutCell)?;
        let width = width.max(1);
        let j = c.cell;
        let n = self.background.num_cells();
        let left: Vec<usize> = (j.saturating_sub(width)..j).collect();
        let right: Vec<usize> = (j + 1..(j + 1 + width).min(n)).collect();
        let partial = left.len() < width || right.len() < width;
        Ok(NearBand {
            cut_cell: j,
            left,
            right,
            partial,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearBand {
    pub cut_cell: usize,
    /// Background cells left of the cut cell, ordered left to right.
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// Set when the domain boundary truncates the band on either side.
    pub partial: bool,
}

impl NearBand {
    pub fn cells(&self) -> Vec<usize> {
        self.left.iter().chain(self.right.iter()).copied().collect()
    }
}
