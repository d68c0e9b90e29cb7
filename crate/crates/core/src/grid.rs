//! Uniform periodic grids on the unit torus and real sample containers.
//!
//! All fields live on `[0,1)^d` with `d` = 2 or 3 and an isotropic
//! resolution of `N` points per axis, spacing `1/N`. Sample layout is
//! component-major with the last spatial axis fastest, `f64` throughout.

use crate::error::{Error, Result};
use crate::util;

/// Isotropic uniform grid on the unit torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    dim: usize,
    n: usize,
}

impl Grid {
    /// New grid; `dim` must be 2 or 3, `n` even and at least 8.
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Dim(format!("grid dimension must be 2 or 3, got {dim}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::Dim(format!(
                "grid resolution must be even and >= 8, got {n}"
            )));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points, `N^dim`.
    pub fn points(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Grid spacing `1/N`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Coordinate of index `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }
}

/// Real samples of a scalar/vector/tensor field on a [`Grid`], stamped
/// with the solution time they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid,
    ncomp: usize,
    time: f64,
    data: Vec<f64>,
}

impl GridField {
    /// All-zero field with `ncomp` components.
    pub fn zeros(grid: Grid, ncomp: usize, time: f64) -> Self {
        assert!(ncomp > 0, "ncomp must be positive");
        Self {
            grid,
            ncomp,
            time,
            data: vec![0.0; ncomp * grid.points()],
        }
    }

    /// Wrap raw samples; length must be `ncomp * N^dim` and all finite.
    pub fn from_data(grid: Grid, ncomp: usize, time: f64, data: Vec<f64>) -> Result<Self> {
        if ncomp == 0 {
            return Err(Error::Dim("ncomp must be positive".into()));
        }
        let expect = ncomp * grid.points();
        if data.len() != expect {
            return Err(Error::Dim(format!(
                "data length {} does not match ncomp * N^dim = {}",
                data.len(),
                expect
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!(
                "non-finite sample at flat index {pos}"
            )));
        }
        Ok(Self { grid, ncomp, time, data })
    }

    /// Build from a closure over (component, coordinates).
    pub fn from_fn(
        grid: Grid,
        ncomp: usize,
        time: f64,
        f: impl Fn(usize, &[f64]) -> f64,
    ) -> Self {
        let mut field = Self::zeros(grid, ncomp, time);
        let dim = grid.dim();
        let n = grid.n();
        let points = grid.points();
        let mut x = vec![0.0; dim];
        for flat in 0..points {
            let mut rem = flat;
            for a in (0..dim).rev() {
                x[a] = grid.coord(rem % n);
                rem /= n;
            }
            for c in 0..ncomp {
                field.data[c * points + flat] = f(c, &x);
            }
        }
        field
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Samples of one component, length `N^dim`.
    pub fn component(&self, c: usize) -> &[f64] {
        let p = self.grid.points();
        &self.data[c * p..(c + 1) * p]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let p = self.grid.points();
        &mut self.data[c * p..(c + 1) * p]
    }

    /// Flat index of a spatial multi-index (last axis fastest).
    pub fn flat_index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.grid.dim());
        let n = self.grid.n();
        coords.iter().fold(0, |acc, &c| acc * n + c)
    }

    /// Spatial multi-index of a flat index.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let n = self.grid.n();
        let dim = self.grid.dim();
        let mut coords = vec![0; dim];
        let mut rem = flat;
        for a in (0..dim).rev() {
            coords[a] = rem % n;
            rem /= n;
        }
        coords
    }

    pub fn value(&self, comp: usize, coords: &[usize]) -> f64 {
        self.component(comp)[self.flat_index(coords)]
    }

    /// Max absolute sample over all components.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max absolute difference against another field of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// L^2 norm over the unit torus: sqrt( mean_x sum_c f_c(x)^2 ).
    pub fn l2_norm(&self) -> f64 {
        let p = self.grid.points() as f64;
        (util::compensated_sum(self.data.iter().map(|v| v * v)) / p).sqrt()
    }

    /// Mean of one component (the k=0 Fourier coefficient).
    pub fn component_mean(&self, c: usize) -> f64 {
        util::mean(self.component(c))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
