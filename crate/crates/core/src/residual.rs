//! Residuals of the linear relaxation system
//! `dv/dt + div u + grad q = 0`, `div v = 0` on sampled snapshot pairs.
//!
//! Space derivatives are spectral. The time derivative uses the pair's
//! difference quotient, which is second-order accurate at the midpoint,
//! so the spatial terms of both snapshots are averaged there; the
//! measured residual of a smooth run floors at O(dt^2).

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::spectral::{spectral_derivative, transform_forward, transform_inverse, SpectralField};

/// Borrowed view of one (v, u, q) snapshot.
#[derive(Debug, Clone, Copy)]
pub struct TripletRef<'a> {
    pub v: &'a GridField,
    pub u: &'a GridField,
    pub q: &'a GridField,
}

/// Max-norm residual report of one snapshot pair.
#[derive(Debug, Clone)]
pub struct ResidualNorms {
    /// Momentum residual per velocity component.
    pub momentum: Vec<f64>,
    /// Largest momentum residual.
    pub max: f64,
    /// Largest |div v| over the two snapshots.
    pub div_max: f64,
    /// Grid coordinates of the worst momentum residual.
    pub worst_x: Vec<f64>,
}

impl TripletRef<'_> {
    fn validate(&self) -> Result<()> {
        let grid = self.v.grid();
        let d = grid.dim();
        if self.v.ncomp() != d {
            return Err(Error::Input(format!(
                "velocity has {} components in dimension {d}",
                self.v.ncomp()
            )));
        }
        if self.u.grid() != grid || self.q.grid() != grid {
            return Err(Error::Input("snapshot grids differ".into()));
        }
        if self.u.ncomp() != d * d || self.q.ncomp() != 1 {
            return Err(Error::Input("stress/pressure component counts are wrong".into()));
        }
        Ok(())
    }
}

/// `div u + grad q` per velocity component, in physical space.
fn spatial_terms(t: &TripletRef<'_>) -> Result<Vec<GridField>> {
    let grid = t.v.grid();
    let d = grid.dim();
    let uhat = transform_forward(t.u)?;
    let qhat = transform_forward(t.q)?;
    let mut acc: Vec<SpectralField> = (0..d)
        .map(|_| SpectralField::zeros(grid, 1, t.v.time()))
        .collect();
    for j in 0..d {
        let du = spectral_derivative(&uhat, j)?;
        for (i, target) in acc.iter_mut().enumerate() {
            let src = du.component(i * d + j);
            for (z, s) in target.component_mut(0).iter_mut().zip(src) {
                *z += s;
            }
        }
        let dq = spectral_derivative(&qhat, j)?;
        for (z, s) in acc[j].component_mut(0).iter_mut().zip(dq.component(0)) {
            *z += s;
        }
    }
    Ok(acc.iter().map(transform_inverse).collect())
}

/// Max |div v| in physical space.
fn divergence_max(v: &GridField) -> Result<f64> {
    let d = v.grid().dim();
    let vhat = transform_forward(v)?;
    let mut div = SpectralField::zeros(v.grid(), 1, v.time());
    for i in 0..d {
        let di = spectral_derivative(&vhat, i)?;
        let src = di.component(i);
        for (z, s) in div.component_mut(0).iter_mut().zip(src) {
            *z += s;
        }
    }
    Ok(transform_inverse(&div).max_abs())
}

/// Residual of the pair (a at t, b at t + dt).
pub fn linear_system_residual(
    a: &TripletRef<'_>,
    b: &TripletRef<'_>,
    dt: f64,
) -> Result<ResidualNorms> {
    a.validate()?;
    b.validate()?;
    if a.v.grid() != b.v.grid() {
        return Err(Error::Input("snapshot pair lives on different grids".into()));
    }
    if dt <= 0.0 {
        return Err(Error::InvalidTime(format!("dt must be positive, got {dt}")));
    }
    let grid = a.v.grid();
    let d = grid.dim();
    let sa = spatial_terms(a)?;
    let sb = spatial_terms(b)?;

    let mut momentum = vec![0.0; d];
    let mut max = 0.0f64;
    let mut worst_flat = 0usize;
    for i in 0..d {
        let va = a.v.component(i);
        let vb = b.v.component(i);
        let fa = sa[i].component(0);
        let fb = sb[i].component(0);
        let mut comp_max = 0.0f64;
        for p in 0..grid.points() {
            let r = (vb[p] - va[p]) / dt + 0.5 * (fa[p] + fb[p]);
            let r = r.abs();
            if r > comp_max {
                comp_max = r;
            }
            if r > max {
                max = r;
                worst_flat = p;
            }
        }
        momentum[i] = comp_max;
    }
    let div_max = divergence_max(a.v)?.max(divergence_max(b.v)?);
    let coords = a.v.multi_index(worst_flat);
    let worst_x = coords.iter().map(|&c| grid.coord(c)).collect();
    Ok(ResidualNorms { momentum, max, div_max, worst_x })
}
