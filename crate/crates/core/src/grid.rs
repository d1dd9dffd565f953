//! Discretized tube `B_ε(Λ)` for k = 1: a uniform periodic t-grid along the
//! curve times a fixed rescaled fiber grid (`z = ε x`), so the fiber
//! resolution is independent of ε.

use crate::error::{Error, Result};

/// Fiber discretization kind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FiberKind {
    /// n = 1: signed coordinate x in [-1, 1]
    Line,
    /// fiber-radial reduction in dimension n: x in [0, 1]
    Radial { n: usize },
}

#[derive(Clone, Debug)]
pub struct TubeGrid {
    pub n_t: usize,
    /// parameter period of the t-grid
    pub period: f64,
    pub fiber: FiberKind,
    /// rescaled fiber nodes; boundary nodes sit exactly at |x| = 1
    pub x: Vec<f64>,
    /// tube radius; physical fiber coordinate is z = eps * x
    pub eps: f64,
}

impl TubeGrid {
    /// Symmetric 1D fiber mirrored from a radial grid with `half` intervals:
    /// 2*half+1 nodes from -1 to 1. Matches the ground-state collocation
    /// stencil node for node.
    pub fn line(n_t: usize, period: f64, half: usize, eps: f64) -> Self {
        let h = 1.0 / half as f64;
        let x: Vec<f64> = (0..=2 * half).map(|b| (b as f64 - half as f64) * h).collect();
        Self { n_t, period, fiber: FiberKind::Line, x, eps }
    }

    /// Radial fiber grid with `nn` intervals on [0, 1].
    pub fn radial(n_t: usize, period: f64, nn: usize, eps: f64, n: usize) -> Self {
        let h = 1.0 / nn as f64;
        let x: Vec<f64> = (0..=nn).map(|b| b as f64 * h).collect();
        Self { n_t, period, fiber: FiberKind::Radial { n }, x, eps }
    }

    pub fn n_z(&self) -> usize {
        self.x.len()
    }

    pub fn h_t(&self) -> f64 {
        self.period / self.n_t as f64
    }

    pub fn h_x(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn fiber_dim(&self) -> usize {
        match self.fiber {
            FiberKind::Line => 1,
            FiberKind::Radial { n } => n,
        }
    }

    /// Dirichlet boundary nodes carry |x| = 1.
    pub fn is_boundary(&self, b: usize) -> bool {
        match self.fiber {
            FiberKind::Line => b == 0 || b + 1 == self.n_z(),
            FiberKind::Radial { .. } => b + 1 == self.n_z(),
        }
    }

    /// Distance to the manifold at fiber node b.
    pub fn dist(&self, b: usize) -> f64 {
        self.eps * self.x[b].abs()
    }

    /// Indices of non-boundary fiber nodes.
    pub fn interior_z(&self) -> std::ops::Range<usize> {
        match self.fiber {
            FiberKind::Line => 1..self.n_z() - 1,
            FiberKind::Radial { .. } => 0..self.n_z() - 1,
        }
    }

    pub fn same_shape(&self, other: &TubeGrid) -> bool {
        self.n_t == other.n_t
            && self.n_z() == other.n_z()
            && self.fiber == other.fiber
            && (self.period - other.period).abs() < 1e-14 * self.period.abs()
    }
}

/// Scalar field over a tube grid, row-major `[t-slice][fiber node]`.
#[derive(Clone, Debug)]
pub struct TubeField {
    pub n_t: usize,
    pub n_z: usize,
    pub values: Vec<f64>,
}

impl TubeField {
    pub fn zeros(grid: &TubeGrid) -> Self {
        Self { n_t: grid.n_t, n_z: grid.n_z(), values: vec![0.0; grid.n_t * grid.n_z()] }
    }

    pub fn from_fn(grid: &TubeGrid, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut field = Self::zeros(grid);
        for a in 0..grid.n_t {
            for b in 0..grid.n_z() {
                field.values[a * field.n_z + b] = f(a, b);
            }
        }
        field
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.n_z + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        self.values[a * self.n_z + b] = v;
    }

    pub fn matches(&self, grid: &TubeGrid) -> Result<()> {
        if self.n_t != grid.n_t || self.n_z != grid.n_z() {
            return Err(Error::GridMismatch(format!(
                "field is {}x{}, grid is {}x{}",
                self.n_t,
                self.n_z,
                grid.n_t,
                grid.n_z()
            )));
        }
        Ok(())
    }

    /// Largest |value| on the Dirichlet boundary.
    pub fn boundary_trace_max(&self, grid: &TubeGrid) -> f64 {
        let mut m = 0.0f64;
        for a in 0..self.n_t {
            for b in 0..self.n_z {
                if grid.is_boundary(b) {
                    m = m.max(self.get(a, b).abs());
                }
            }
        }
        m
    }

    pub fn require_zero_trace(&self, grid: &TubeGrid) -> Result<()> {
        let t = self.boundary_trace_max(grid);
        if t != 0.0 {
            return Err(Error::NonzeroTrace { max_trace: t });
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        crate::linalg::norm_inf(&self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_grid_mirrors_radial_nodes() {
        let g = TubeGrid::line(16, 1.0, 8, 0.25);
        assert_eq!(g.n_z(), 17);
        assert_eq!(g.x[0], -1.0);
        assert_eq!(g.x[8], 0.0);
        assert_eq!(g.x[16], 1.0);
        assert!(g.is_boundary(0) && g.is_boundary(16) && !g.is_boundary(8));
        assert_eq!(g.dist(0), 0.25);
    }

    #[test]
    fn trace_bookkeeping() {
        let g = TubeGrid::line(4, 1.0, 4, 0.1);
        let mut f = TubeField::zeros(&g);
        f.require_zero_trace(&g).unwrap();
        f.set(2, 0, 1e-14);
        assert!(matches!(f.require_zero_trace(&g), Err(Error::NonzeroTrace { .. })));
    }
}
