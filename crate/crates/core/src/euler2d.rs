//! Smooth 2-D incompressible Euler evolution on the torus in
//! vorticity-streamfunction form, plus recovery of the exact subsolution
//! triplet (v, u, q) with `u = v (x) v - (|v|^2/2) I` and the pressure
//! from a spectral Poisson solve.
//!
//! The state is the scalar vorticity `omega = d1 v2 - d2 v1` in spectral
//! space; velocity is `perp-grad` of the streamfunction, so `div v = 0`
//! holds by construction. Time stepping is fixed-step RK4 behind a CFL
//! guard, with 2/3-rule dealiasing inside the advection product.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use crate::spectral::{
    invert_laplacian, spectral_derivative, transform_forward, transform_inverse, wavenumber,
    SpectralField,
};
use crate::util;

const TAU: f64 = std::f64::consts::TAU;
const MEAN_TOL: f64 = 1e-12;

/// Vorticity-side state of the 2-D solution.
#[derive(Debug, Clone)]
pub struct EulerState2D {
    omega: SpectralField,
}

impl EulerState2D {
    /// Wrap a scalar spectral vorticity; the mean must vanish.
    pub fn new(omega: SpectralField) -> Result<Self> {
        if omega.grid().dim() != 2 {
            return Err(Error::Dim("vorticity state must be 2-dimensional".into()));
        }
        if omega.ncomp() != 1 {
            return Err(Error::Dim("vorticity must be scalar".into()));
        }
        if omega.coeff(0, &[0, 0]).norm() > MEAN_TOL {
            return Err(Error::InvalidState(format!(
                "nonzero mean vorticity {:.3e}",
                omega.coeff(0, &[0, 0]).norm()
            )));
        }
        Ok(Self { omega })
    }

    /// Zero flow.
    pub fn zero(grid: Grid) -> Result<Self> {
        Self::new(SpectralField::zeros(grid, 1, 0.0))
    }

    /// State from real vorticity samples.
    pub fn from_vorticity(omega: &GridField) -> Result<Self> {
        Self::new(transform_forward(omega)?)
    }

    /// State from an explicit mode list `(k1, k2) -> coefficient`.
    ///
    /// The list must be closed under conjugate reflection within 1e-12;
    /// it describes a real field.
    pub fn from_modes(grid: Grid, modes: &[((i64, i64), Complex64)]) -> Result<Self> {
        let mut omega = SpectralField::zeros(grid, 1, 0.0);
        for &((k1, k2), c) in modes {
            let half = (grid.n() / 2) as i64;
            if k1 < -half || k1 >= half || k2 < -half || k2 >= half {
                return Err(Error::Alias(format!(
                    "mode ({k1},{k2}) outside the grid for N = {}",
                    grid.n()
                )));
            }
            omega.set_coeff(0, &[k1, k2], c);
        }
        let defect = omega.hermitian_defect();
        if defect > 1e-12 {
            return Err(Error::InvalidState(format!(
                "mode list is not conjugate-symmetric, defect {defect:.3e}"
            )));
        }
        Self::new(omega)
    }

    pub fn grid(&self) -> Grid {
        self.omega.grid()
    }

    pub fn time(&self) -> f64 {
        self.omega.time()
    }

    pub fn omega(&self) -> &SpectralField {
        &self.omega
    }

    /// Real vorticity samples.
    pub fn vorticity_grid(&self) -> GridField {
        transform_inverse(&self.omega)
    }

    /// Kinetic energy `int |v|^2 dx = sum_{k!=0} |omega_hat|^2 / (2 pi |k|)^2`.
    pub fn kinetic_energy(&self) -> f64 {
        let n = self.grid().n();
        util::compensated_sum(self.omega.component(0).iter().enumerate().map(|(flat, z)| {
            let k1 = wavenumber(flat / n, n) as f64;
            let k2 = wavenumber(flat % n, n) as f64;
            let k2sum = k1 * k1 + k2 * k2;
            if k2sum == 0.0 {
                0.0
            } else {
                z.norm_sqr() / (TAU * TAU * k2sum)
            }
        }))
    }

    /// Enstrophy `int omega^2 dx`.
    pub fn enstrophy(&self) -> f64 {
        self.omega.spectrum_power()
    }

    /// Largest admissible RK4 step under `dt * max|v| * N <= 0.5`.
    pub fn cfl_max_dt(&self) -> f64 {
        let vmax = velocity_spectral(&self.omega)
            .map(|vhat| transform_inverse(&vhat).max_abs())
            .unwrap_or(0.0);
        if vmax == 0.0 {
            f64::INFINITY
        } else {
            0.5 / (vmax * self.grid().n() as f64)
        }
    }
}

/// Streamfunction-side velocity: `v = perp-grad psi` with
/// `laplacian psi = omega`, zero-mean gauge.
fn velocity_spectral(omega: &SpectralField) -> Result<SpectralField> {
    let psi = invert_laplacian(omega);
    let d2 = spectral_derivative(&psi, 1)?;
    let d1 = spectral_derivative(&psi, 0)?;
    let mut v = SpectralField::zeros(omega.grid(), 2, omega.time());
    for (dst, src) in v.component_mut(0).iter_mut().zip(d2.component(0)) {
        *dst = -src;
    }
    v.component_mut(1).copy_from_slice(d1.component(0));
    Ok(v)
}

/// Biot-Savart inversion: real velocity samples of a state.
pub fn velocity_from_vorticity(state: &EulerState2D) -> Result<GridField> {
    if state.omega.coeff(0, &[0, 0]).norm() > MEAN_TOL {
        return Err(Error::InvalidState("nonzero mean vorticity".into()));
    }
    Ok(transform_inverse(&velocity_spectral(&state.omega)?))
}

/// Dealiased advection right-hand side `-(v . grad omega)` in spectral space.
fn advection_rhs(omega: &SpectralField) -> Result<SpectralField> {
    let mut vhat = velocity_spectral(omega)?;
    vhat.dealias();
    let mut g1 = spectral_derivative(omega, 0)?;
    let mut g2 = spectral_derivative(omega, 1)?;
    g1.dealias();
    g2.dealias();
    let v = transform_inverse(&vhat);
    let g1 = transform_inverse(&g1);
    let g2 = transform_inverse(&g2);
    let grid = omega.grid();
    let mut adv = GridField::zeros(grid, 1, omega.time());
    {
        let out = adv.component_mut(0);
        let (v1, v2) = (v.component(0), v.component(1));
        let (g1, g2) = (g1.component(0), g2.component(0));
        for p in 0..grid.points() {
            out[p] = -(v1[p] * g1[p] + v2[p] * g2[p]);
        }
    }
    let mut rhs = transform_forward(&adv)?;
    rhs.dealias();
    Ok(rhs)
}

/// One fixed RK4 step of `d omega/dt = -(v . grad omega)`.
pub fn step(state: &EulerState2D, dt: f64) -> Result<EulerState2D> {
    if dt <= 0.0 {
        return Err(Error::InvalidTime(format!("dt must be positive, got {dt}")));
    }
    let max_dt = state.cfl_max_dt();
    if dt > max_dt {
        return Err(Error::Cfl { dt, max_dt });
    }

    let w0 = &state.omega;
    let k1 = advection_rhs(w0)?;
    let k2 = advection_rhs(&axpy(w0, 0.5 * dt, &k1))?;
    let k3 = advection_rhs(&axpy(w0, 0.5 * dt, &k2))?;
    let k4 = advection_rhs(&axpy(w0, dt, &k3))?;

    let mut next = w0.clone();
    {
        let out = next.data_mut();
        let sixth = dt / 6.0;
        for (i, z) in out.iter_mut().enumerate() {
            *z += sixth * (k1.data()[i] + 2.0 * k2.data()[i] + 2.0 * k3.data()[i] + k4.data()[i]);
        }
    }
    next.set_time(state.time() + dt);
    EulerState2D::new(next)
}

fn axpy(base: &SpectralField, scale: f64, delta: &SpectralField) -> SpectralField {
    let mut out = base.clone();
    for (z, d) in out.data_mut().iter_mut().zip(delta.data()) {
        *z += scale * d;
    }
    out
}

/// Exact subsolution triplet of a smooth 2-D solution.
#[derive(Debug, Clone)]
pub struct ExactTriplet2D {
    /// Velocity, 2 components.
    pub v: GridField,
    /// Symmetric trace-free stress, 4 components row-major.
    pub u: GridField,
    /// Zero-mean pressure.
    pub q: GridField,
}

impl ExactTriplet2D {
    /// Build `u = v (x) v - (|v|^2/2) I` pointwise and recover `q` from
    /// `laplacian q = -div div u` with the zero-mean gauge.
    ///
    /// Works for any divergence-free velocity samples, including a uniform
    /// (k = 0 only) flow where `u` is constant and `q = 0`.
    pub fn from_velocity(v: &GridField) -> Result<Self> {
        let grid = v.grid();
        if grid.dim() != 2 || v.ncomp() != 2 {
            return Err(Error::Dim("expected a 2-component field on a 2-D grid".into()));
        }
        let points = grid.points();
        let mut u = GridField::zeros(grid, 4, v.time());
        {
            let (v1, v2) = (v.component(0), v.component(1));
            // u11 and u22 are exact negatives: 0.5*(a-b) vs 0.5*(b-a)
            for p in 0..points {
                let d = 0.5 * (v1[p] * v1[p] - v2[p] * v2[p]);
                let off = v1[p] * v2[p];
                u.component_mut(0)[p] = d;
                u.component_mut(1)[p] = off;
                u.component_mut(2)[p] = off;
                u.component_mut(3)[p] = -d;
            }
        }
        let q = pressure_from_stress(&u)?;
        Ok(Self { v: v.clone(), u, q })
    }
}

/// Spectral solve of `laplacian q = -d_i d_j u_ij`, zero-mean q.
fn pressure_from_stress(u: &GridField) -> Result<GridField> {
    let grid = u.grid();
    let d = grid.dim();
    let uhat = transform_forward(u)?;
    let mut rhs = SpectralField::zeros(grid, 1, u.time());
    for i in 0..d {
        for j in 0..d {
            let dij = spectral_derivative(&spectral_derivative(&uhat, i)?, j)?;
            let src = dij.component(i * d + j);
            for (z, s) in rhs.component_mut(0).iter_mut().zip(src) {
                *z -= s;
            }
        }
    }
    Ok(transform_inverse(&invert_laplacian(&rhs)))
}

/// Exact triplet of the current state.
pub fn exact_triplet(state: &EulerState2D) -> Result<ExactTriplet2D> {
    ExactTriplet2D::from_velocity(&velocity_from_vorticity(state)?)
}

/// Truncation report for initial data read from a mode file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    /// Modes dropped because they exceed the dealiased band |k_j| <= N/3.
    pub dropped_modes: usize,
    /// L^2 distance of the dropped vorticity content.
    pub omega_l2: f64,
    /// L^2 distance of the corresponding velocity content.
    pub velocity_l2: f64,
}

/// Parse an initial-condition mode file: lines `k1 k2 re im` for
/// `omega_hat(k)`, `#` comments allowed.
///
/// Entries violating conjugate symmetry are rejected unless
/// `complete_conjugates` is set, in which case missing partners are
/// filled in. Modes outside the dealiased band are truncated and
/// accounted for in the returned report.
pub fn read_mode_file(
    path: impl AsRef<Path>,
    grid: Grid,
    complete_conjugates: bool,
) -> Result<(EulerState2D, TruncationReport)> {
    let text = std::fs::read_to_string(path)?;
    parse_mode_list(&text, grid, complete_conjugates)
}

/// Same as [`read_mode_file`] but from an in-memory string.
pub fn parse_mode_list(
    text: &str,
    grid: Grid,
    complete_conjugates: bool,
) -> Result<(EulerState2D, TruncationReport)> {
    let cutoff = (grid.n() / 3) as i64;
    let mut entries: Vec<((i64, i64), Complex64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(Error::Input(format!(
                "line {}: expected `k1 k2 re im`, got {raw:?}",
                lineno + 1
            )));
        }
        let k1: i64 = parts[0]
            .parse()
            .map_err(|_| Error::Input(format!("line {}: bad k1 {:?}", lineno + 1, parts[0])))?;
        let k2: i64 = parts[1]
            .parse()
            .map_err(|_| Error::Input(format!("line {}: bad k2 {:?}", lineno + 1, parts[1])))?;
        let re: f64 = parts[2]
            .parse()
            .map_err(|_| Error::Input(format!("line {}: bad re {:?}", lineno + 1, parts[2])))?;
        let im: f64 = parts[3]
            .parse()
            .map_err(|_| Error::Input(format!("line {}: bad im {:?}", lineno + 1, parts[3])))?;
        if entries.iter().any(|&((a, b), _)| (a, b) == (k1, k2)) {
            return Err(Error::Input(format!(
                "line {}: duplicate mode ({k1},{k2})",
                lineno + 1
            )));
        }
        entries.push(((k1, k2), Complex64::new(re, im)));
    }

    if let Some(&(_, c)) = entries.iter().find(|&&((a, b), _)| (a, b) == (0, 0)) {
        if c.norm() > MEAN_TOL {
            return Err(Error::InvalidState(format!(
                "mean vorticity mode (0,0) must vanish, got {c}"
            )));
        }
    }

    // truncate unresolved modes, tracking the discarded L^2 content
    let mut dropped = 0usize;
    let mut omega_l2_sq = 0.0;
    let mut velocity_l2_sq = 0.0;
    let mut kept: Vec<((i64, i64), Complex64)> = Vec::new();
    for ((k1, k2), c) in entries {
        if k1.abs() > cutoff || k2.abs() > cutoff {
            dropped += 1;
            let ksq = (k1 * k1 + k2 * k2) as f64;
            omega_l2_sq += c.norm_sqr();
            velocity_l2_sq += c.norm_sqr() / (TAU * TAU * ksq);
        } else {
            kept.push(((k1, k2), c));
        }
    }

    // conjugate closure
    let mut complete = kept.clone();
    for &((k1, k2), c) in &kept {
        if (k1, k2) == (0, 0) {
            continue;
        }
        match kept.iter().find(|&&((a, b), _)| (a, b) == (-k1, -k2)) {
            Some(&(_, partner)) => {
                if (partner - c.conj()).norm() > 1e-12 {
                    return Err(Error::Input(format!(
                        "modes ({k1},{k2}) and ({},{}) violate conjugate symmetry",
                        -k1, -k2
                    )));
                }
            }
            None if complete_conjugates => {
                complete.push(((-k1, -k2), c.conj()));
            }
            None => {
                return Err(Error::Input(format!(
                    "mode ({k1},{k2}) lacks its conjugate partner ({},{}); \
                     pass --complete-conjugates to fill it in",
                    -k1, -k2
                )));
            }
        }
    }

    let state = EulerState2D::from_modes(grid, &complete)?;
    Ok((
        state,
        TruncationReport {
            dropped_modes: dropped,
            omega_l2: omega_l2_sq.sqrt(),
            velocity_l2: velocity_l2_sq.sqrt(),
        },
    ))
}
