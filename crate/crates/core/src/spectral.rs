//! Fourier-side representation and spectral operators.
//!
//! Convention: `f(x) = sum_k fhat(k) exp(2*pi*i k.x)` with integer
//! wavevectors `k` in `{-N/2, ..., N/2-1}^dim` on the unit torus, so every
//! wavenumber factor carries 2*pi. Coefficients are stored in FFT layout
//! (index `j` holds `k = j` for `j < N/2`, else `k = j - N`).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use crate::util;

const TAU: f64 = std::f64::consts::TAU;

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = PLANS.lock().unwrap();
    cache
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

/// Signed wavenumber of FFT index `j` on an `n`-point axis.
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// FFT index of signed wavenumber `k` on an `n`-point axis.
pub fn fft_index(k: i64, n: usize) -> usize {
    let half = (n / 2) as i64;
    debug_assert!(k >= -half && k < half, "wavenumber {k} out of range for n = {n}");
    k.rem_euclid(n as i64) as usize
}

/// Complex Fourier coefficients of a real field, matching [`GridField`]
/// in grid, component count, time stamp and memory layout.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    ncomp: usize,
    time: f64,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid, ncomp: usize, time: f64) -> Self {
        assert!(ncomp > 0, "ncomp must be positive");
        Self {
            grid,
            ncomp,
            time,
            data: vec![Complex64::new(0.0, 0.0); ncomp * grid.points()],
        }
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

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let p = self.grid.points();
        &self.data[c * p..(c + 1) * p]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let p = self.grid.points();
        &mut self.data[c * p..(c + 1) * p]
    }

    /// Flat index of a signed wavevector within one component.
    pub fn mode_index(&self, k: &[i64]) -> usize {
        debug_assert_eq!(k.len(), self.grid.dim());
        let n = self.grid.n();
        k.iter().fold(0, |acc, &kj| acc * n + fft_index(kj, n))
    }

    pub fn coeff(&self, comp: usize, k: &[i64]) -> Complex64 {
        self.component(comp)[self.mode_index(k)]
    }

    pub fn set_coeff(&mut self, comp: usize, k: &[i64], value: Complex64) {
        let idx = self.mode_index(k);
        self.component_mut(comp)[idx] = value;
    }

    /// Signed wavevector of a flat in-component index.
    pub fn wavevector(&self, flat: usize) -> Vec<i64> {
        let n = self.grid.n();
        let dim = self.grid.dim();
        let mut k = vec![0; dim];
        let mut rem = flat;
        for a in (0..dim).rev() {
            k[a] = wavenumber(rem % n, n);
            rem /= n;
        }
        k
    }

    /// Zero every mode with any |k_j| > N/3 (2/3-rule dealiasing).
    pub fn dealias(&mut self) {
        let cutoff = (self.grid.n() / 3) as i64;
        self.zero_modes_beyond(cutoff);
    }

    fn zero_modes_beyond(&mut self, cutoff: i64) {
        let n = self.grid.n();
        let dim = self.grid.dim();
        let points = self.grid.points();
        // per-axis keep mask over FFT indices
        let keep: Vec<bool> = (0..n).map(|j| wavenumber(j, n).abs() <= cutoff).collect();
        for c in 0..self.ncomp {
            let comp = self.component_mut(c);
            for flat in 0..points {
                let mut rem = flat;
                let mut kill = false;
                for _ in 0..dim {
                    if !keep[rem % n] {
                        kill = true;
                        break;
                    }
                    rem /= n;
                }
                if kill {
                    comp[flat] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Max |fhat(-k) - conj(fhat(k))| over all modes and components.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let dim = self.grid.dim();
        let mut worst = 0.0f64;
        let mut k = vec![0i64; dim];
        for c in 0..self.ncomp {
            for flat in 0..self.grid.points() {
                let mut rem = flat;
                let mut refl_ok = true;
                for a in (0..dim).rev() {
                    let kj = wavenumber(rem % n, n);
                    // -N/2 has no mirror partner on the grid
                    if kj == -(n as i64) / 2 {
                        refl_ok = false;
                        break;
                    }
                    k[a] = -kj;
                    rem /= n;
                }
                if !refl_ok {
                    continue;
                }
                let mirror = self.coeff(c, &k);
                let here = self.component(c)[flat];
                worst = worst.max((mirror - here.conj()).norm());
            }
        }
        worst
    }

    /// sum_k |fhat(k)|^2 over all components (Parseval energy).
    pub fn spectrum_power(&self) -> f64 {
        util::compensated_sum(self.data.iter().map(|z| z.norm_sqr()))
    }
}

/// Forward transform of a real field; coefficients follow the module
/// convention (forward transform carries the 1/N^dim factor).
pub fn transform_forward(f: &GridField) -> Result<SpectralField> {
    if !f.is_finite() {
        return Err(Error::InvalidField(
            "non-finite samples in transform input".into(),
        ));
    }
    let grid = f.grid();
    let mut out = SpectralField::zeros(grid, f.ncomp(), f.time());
    for c in 0..f.ncomp() {
        let comp = out.component_mut(c);
        for (z, &v) in comp.iter_mut().zip(f.component(c)) {
            *z = Complex64::new(v, 0.0);
        }
        fft_all_axes(comp, grid, true);
        let scale = 1.0 / grid.points() as f64;
        for z in comp.iter_mut() {
            *z *= scale;
        }
    }
    Ok(out)
}

/// Inverse transform back to real samples. The imaginary residue of a
/// Hermitian-symmetric input is at roundoff level and is dropped.
pub fn transform_inverse(f: &SpectralField) -> GridField {
    let grid = f.grid();
    let mut out = GridField::zeros(grid, f.ncomp(), f.time());
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.points()];
    for c in 0..f.ncomp() {
        buf.copy_from_slice(f.component(c));
        fft_all_axes(&mut buf, grid, false);
        for (v, z) in out.component_mut(c).iter_mut().zip(&buf) {
            *v = z.re;
        }
    }
    out
}

/// In-place multidimensional FFT: 1-D transforms along every axis.
fn fft_all_axes(data: &mut [Complex64], grid: Grid, forward: bool) {
    let n = grid.n();
    let dim = grid.dim();
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let outer = n.pow(axis as u32);
        if stride == 1 {
            for o in 0..outer {
                let base = o * n;
                fft.process_with_scratch(&mut data[base..base + n], &mut scratch);
            }
        } else {
            for o in 0..outer {
                for i in 0..stride {
                    let base = o * n * stride + i;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, slot) in line.iter().enumerate() {
                        data[base + j * stride] = *slot;
                    }
                }
            }
        }
    }
}

/// Multiply every mode by `2*pi*i*k_axis`; the Nyquist mode is zeroed.
pub fn spectral_derivative(f: &SpectralField, axis: usize) -> Result<SpectralField> {
    let dim = f.grid().dim();
    if axis >= dim {
        return Err(Error::InvalidAxis { axis, dim });
    }
    let n = f.grid().n();
    let nyquist = -(n as i64) / 2;
    let mut out = f.clone();
    let step_before_axis = n.pow((dim - 1 - axis) as u32);
    for c in 0..f.ncomp() {
        let comp = out.component_mut(c);
        for (flat, z) in comp.iter_mut().enumerate() {
            let j = (flat / step_before_axis) % n;
            let k = wavenumber(j, n);
            if k == nyquist {
                *z = Complex64::new(0.0, 0.0);
            } else {
                *z *= Complex64::new(0.0, TAU * k as f64);
            }
        }
    }
    Ok(out)
}

/// Solve `laplacian(u) = f` spectrally with the zero-mean gauge:
/// divide by `-(2*pi*|k|)^2`, zero the k=0 mode.
pub fn invert_laplacian(f: &SpectralField) -> SpectralField {
    let n = f.grid().n();
    let dim = f.grid().dim();
    let mut out = f.clone();
    for c in 0..f.ncomp() {
        let comp = out.component_mut(c);
        for (flat, z) in comp.iter_mut().enumerate() {
            let mut k2 = 0.0;
            let mut rem = flat;
            for _ in 0..dim {
                let k = wavenumber(rem % n, n) as f64;
                k2 += k * k;
                rem /= n;
            }
            if k2 == 0.0 {
                *z = Complex64::new(0.0, 0.0);
            } else {
                *z /= -TAU * TAU * k2;
            }
        }
    }
    out
}

/// Negative-Sobolev norm `( sum_{k != 0} |fhat(k)|^2 / (2*pi*|k|)^2 )^(1/2)`.
pub fn hminus1_norm(f: &SpectralField) -> f64 {
    let n = f.grid().n();
    let dim = f.grid().dim();
    let mut total = 0.0;
    for c in 0..f.ncomp() {
        let comp = f.component(c);
        total += util::compensated_sum(comp.iter().enumerate().map(|(flat, z)| {
            let mut k2 = 0.0;
            let mut rem = flat;
            for _ in 0..dim {
                let k = wavenumber(rem % n, n) as f64;
                k2 += k * k;
                rem /= n;
            }
            if k2 == 0.0 {
                0.0
            } else {
                z.norm_sqr() / (TAU * TAU * k2)
            }
        }));
    }
    total.sqrt()
}
