//! The 2-D -> 3-D subsolution lift and its structural identities.
//!
//! Given a planar triplet (v', u', q') and its energy density e = e(v', u'),
//! the lifted fields are replicated along x3 with
//!
//! ```text
//! vbar = (v', 0)
//! ubar = [ u'11 + e/3   u'12        0      ]
//!        [ u'21         u'22 + e/3  0      ]
//!        [ 0            0          -2e/3   ]
//! qbar = q' - e/3
//! ```
//!
//! The pressure shift cancels the diagonal shift of the stress, so
//! `div ubar + grad qbar` restricts to the planar `div u' + grad q'` and
//! the lifted triplet solves the linear system whenever the planar one
//! does. The lift also preserves the trace-free structure and the energy
//! density: the (3,3) entry of `vbar (x) vbar - ubar` equals `2e/3` and
//! the upper 2x2 block has the same largest eigenvalue, so
//! `e3d = (3/2)(2e/3) = e`.

use crate::energy::{energy_density_field, lmax2, lmax3};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use crate::residual::{linear_system_residual, ResidualNorms, TripletRef};

/// Lifted subsolution triplet on the 3-D torus, constant in x3.
#[derive(Debug, Clone)]
pub struct Subsolution3D {
    /// Velocity (v'1, v'2, 0), 3 components.
    pub v: GridField,
    /// Symmetric trace-free stress, 9 components row-major.
    pub u: GridField,
    /// Pressure q' - e/3.
    pub q: GridField,
    /// Time of the 2-D source snapshot.
    pub source_time: f64,
}

/// Replicate a 2-D field along x3 onto the isotropic 3-D grid.
pub fn replicate_to_3d(f2: &GridField) -> Result<GridField> {
    if f2.grid().dim() != 2 {
        return Err(Error::Dim("replication input must be 2-dimensional".into()));
    }
    let n = f2.grid().n();
    let grid3 = Grid::new(3, n)?;
    let points2 = f2.grid().points();
    let mut out = GridField::zeros(grid3, f2.ncomp(), f2.time());
    for c in 0..f2.ncomp() {
        let src = f2.component(c);
        let dst = out.component_mut(c);
        for p2 in 0..points2 {
            dst[p2 * n..(p2 + 1) * n].fill(src[p2]);
        }
    }
    Ok(out)
}

/// Build the lifted triplet from a planar one and its energy density field.
pub fn lift(
    v2: &GridField,
    u2: &GridField,
    q2: &GridField,
    e2: &GridField,
) -> Result<Subsolution3D> {
    let grid = v2.grid();
    if grid.dim() != 2 {
        return Err(Error::Dim("lift input must live on the 2-D torus".into()));
    }
    for (name, f, ncomp) in [("u", u2, 4), ("q", q2, 1), ("e", e2, 1)] {
        if f.grid() != grid {
            return Err(Error::Dim(format!("{name} grid differs from v grid")));
        }
        if f.ncomp() != ncomp {
            return Err(Error::Dim(format!(
                "{name} has {} components, expected {ncomp}",
                f.ncomp()
            )));
        }
    }
    if v2.ncomp() != 2 {
        return Err(Error::Dim("v must have 2 components".into()));
    }
    // the lift only preserves trace-freeness if the input is trace-free
    let points2 = grid.points();
    for p in 0..points2 {
        let trace = u2.component(0)[p] + u2.component(3)[p];
        let asym = (u2.component(1)[p] - u2.component(2)[p]).abs();
        let defect = trace.abs().max(asym);
        if defect > 1e-12 {
            return Err(Error::InvalidTensorField {
                index: u2.multi_index(p),
                defect,
            });
        }
    }

    let time = v2.time();
    let n = grid.n();
    let grid3 = Grid::new(3, n)?;
    let mut v = GridField::zeros(grid3, 3, time);
    let mut u = GridField::zeros(grid3, 9, time);
    let mut q = GridField::zeros(grid3, 1, time);

    for p2 in 0..points2 {
        let span = p2 * n..(p2 + 1) * n;
        let third_e = e2.component(0)[p2] / 3.0;
        v.component_mut(0)[span.clone()].fill(v2.component(0)[p2]);
        v.component_mut(1)[span.clone()].fill(v2.component(1)[p2]);
        // component 2 stays exactly zero
        u.component_mut(0)[span.clone()].fill(u2.component(0)[p2] + third_e);
        u.component_mut(1)[span.clone()].fill(u2.component(1)[p2]);
        u.component_mut(3)[span.clone()].fill(u2.component(2)[p2]);
        u.component_mut(4)[span.clone()].fill(u2.component(3)[p2] + third_e);
        u.component_mut(8)[span.clone()].fill(-2.0 * third_e);
        // third row/column off-diagonals stay exactly zero
        q.component_mut(0)[span].fill(q2.component(0)[p2] - third_e);
    }

    Ok(Subsolution3D { v, u, q, source_time: time })
}

/// Max over the grid of |e3d(vbar, ubar) - e2d(v', u')|.
///
/// The lift is energy-preserving, so this defect is a pure roundoff
/// measurement; anything above ~1e-11 indicates a broken lift.
pub fn lift_energy_identity_check(s: &Subsolution3D, e2d: &GridField) -> Result<f64> {
    if e2d.grid().dim() != 2 || e2d.grid().n() != s.v.grid().n() {
        return Err(Error::Dim("2-D energy field does not match the lift".into()));
    }
    let e3d = energy_density_field(&s.v, &s.u)?;
    let n = s.v.grid().n();
    let mut worst = 0.0f64;
    for (p2, &e2) in e2d.component(0).iter().enumerate() {
        for &e3 in &e3d.component(0)[p2 * n..(p2 + 1) * n] {
            worst = worst.max((e3 - e2).abs());
        }
    }
    Ok(worst)
}

/// Pointwise energy density of a 2-D triplet without tensor revalidation.
pub fn energy_density_2d(v2: &GridField, u2: &GridField) -> GridField {
    let points = v2.grid().points();
    let mut out = GridField::zeros(v2.grid(), 1, v2.time());
    let (v1, v2c) = (v2.component(0), v2.component(1));
    let (u11, u12) = (u2.component(0), u2.component(1));
    let e = out.component_mut(0);
    for p in 0..points {
        e[p] = lmax2(
            v1[p] * v1[p] - u11[p],
            v1[p] * v2c[p] - u12[p],
            v2c[p] * v2c[p] + u11[p],
        );
    }
    out
}

/// Max pointwise |trace| of the lifted stress.
pub fn max_trace_defect(s: &Subsolution3D) -> f64 {
    let points = s.u.grid().points();
    let (u11, u22, u33) = (s.u.component(0), s.u.component(4), s.u.component(8));
    let mut worst = 0.0f64;
    for p in 0..points {
        worst = worst.max((u11[p] + u22[p] + u33[p]).abs());
    }
    worst
}

/// Residual of the linear system on a pair of lifted snapshots:
/// max-norm of `dv/dt + div u + grad q` (midpoint finite difference in
/// time, spectral in space) together with |div v|.
pub fn residual_3d(s: &Subsolution3D, s_next: &Subsolution3D, dt: f64) -> Result<ResidualNorms> {
    if dt <= 0.0 {
        return Err(Error::InvalidTime(format!("dt must be positive, got {dt}")));
    }
    linear_system_residual(
        &TripletRef { v: &s.v, u: &s.u, q: &s.q },
        &TripletRef { v: &s_next.v, u: &s_next.u, q: &s_next.q },
        dt,
    )
}

/// 3-D energy density evaluated with the closed-form kernel directly,
/// bypassing field validation (hot path for the identity check).
pub fn energy_density_3d_raw(v: &GridField, u: &GridField) -> GridField {
    let points = v.grid().points();
    let mut out = GridField::zeros(v.grid(), 1, v.time());
    let (v1, v2, v3) = (v.component(0), v.component(1), v.component(2));
    let u11 = u.component(0);
    let u12 = u.component(1);
    let u13 = u.component(2);
    let u22 = u.component(4);
    let u23 = u.component(5);
    let u33 = u.component(8);
    let e = out.component_mut(0);
    for p in 0..points {
        e[p] = 1.5
            * lmax3(
                v1[p] * v1[p] - u11[p],
                v1[p] * v2[p] - u12[p],
                v1[p] * v3[p] - u13[p],
                v2[p] * v2[p] - u22[p],
                v2[p] * v3[p] - u23[p],
                v3[p] * v3[p] - u33[p],
            );
    }
    out
}
