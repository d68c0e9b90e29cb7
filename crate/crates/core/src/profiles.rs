//! Prescribed energy profiles and their exact integrals.
//!
//! The base profile adds a decaying constant to the kinetic energy
//! density, `e0(t,x) = |v(t,x)|^2/2 + eta/(1+t)`, which brackets it
//! strictly from above by at most `eta`. The lifted profile adds an
//! x3-dependent pump term, `ebar = e0 + eta (t/(1+t)) sin^2(2 pi x3)`,
//! zero at t = 0 and strictly positive afterwards - the sole source of
//! three-dimensionality in the construction.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use crate::util;

const TAU: f64 = std::f64::consts::TAU;

/// Profile parameters: the bracket height `eta` and the initial-data
/// closeness target `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams {
    pub eta: f64,
    pub epsilon: f64,
}

impl ProfileParams {
    pub fn new(eta: f64, epsilon: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::Input(format!("eta must be positive, got {eta}")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::Input(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self { eta, epsilon })
    }

    /// Default coupling `eta = epsilon^2 / 2`, which makes the pump's
    /// L^2 deviation from the smooth data exactly `epsilon`.
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        Self::new(0.5 * epsilon * epsilon, epsilon)
    }
}

/// Kinetic energy density `|v|^2 / 2` of a velocity field.
pub fn kinetic_energy_density(v: &GridField) -> Result<GridField> {
    let d = v.grid().dim();
    if v.ncomp() != d {
        return Err(Error::Dim(format!(
            "velocity has {} components on a {d}-dimensional grid",
            v.ncomp()
        )));
    }
    let mut out = GridField::zeros(v.grid(), 1, v.time());
    for c in 0..d {
        let src = v.component(c);
        for (dst, s) in out.component_mut(0).iter_mut().zip(src) {
            *dst += 0.5 * s * s;
        }
    }
    Ok(out)
}

/// Base profile `e0(t, x) = |v|^2/2 + eta/(1+t)` on the 2-D torus.
pub fn e0_at(t: f64, v_energy: &GridField, eta: f64) -> Result<GridField> {
    if t < 0.0 {
        return Err(Error::InvalidTime(format!("t must be nonnegative, got {t}")));
    }
    if v_energy.ncomp() != 1 {
        return Err(Error::Dim("energy density must be scalar".into()));
    }
    let shift = eta / (1.0 + t);
    let mut out = v_energy.clone();
    out.set_time(t);
    for v in out.data_mut() {
        *v += shift;
    }
    Ok(out)
}

/// Lifted profile `ebar(t, x) = e0(t, x1, x2) + eta (t/(1+t)) sin^2(2 pi x3)`
/// on the 3-D torus with the same per-axis resolution.
pub fn ebar_at(t: f64, e0: &GridField, eta: f64) -> Result<GridField> {
    if t < 0.0 {
        return Err(Error::InvalidTime(format!("t must be nonnegative, got {t}")));
    }
    if e0.grid().dim() != 2 || e0.ncomp() != 1 {
        return Err(Error::Dim("base profile must be a scalar 2-D field".into()));
    }
    let n = e0.grid().n();
    let grid3 = Grid::new(3, n)?;
    let mut out = GridField::zeros(grid3, 1, t);
    let pump = eta * t / (1.0 + t);
    let base = e0.component(0);
    let dst = out.component_mut(0);
    for i3 in 0..n {
        let x3 = i3 as f64 / n as f64;
        let s = (TAU * x3).sin();
        let add = pump * s * s;
        for (p2, &b) in base.iter().enumerate() {
            dst[p2 * n + i3] = b + add;
        }
    }
    Ok(out)
}

/// Total prescribed energy `int 2 ebar dx`, i.e. twice the mean
/// (the k = 0 Fourier coefficient; exact for band-limited fields).
pub fn total_energy(profile: &GridField) -> f64 {
    2.0 * util::mean(profile.component(0))
}
