//! Symmetric trace-free tensor algebra and the generalized energy density
//! `e(v, u) = (d/2) * lambda_max(v (x) v - u)`.
//!
//! Eigenvalues come from closed forms: the quadratic formula in 2-D and the
//! trigonometric (Cardano) method for symmetric 3x3 matrices, so the kernel
//! is deterministic and branch-light when mapped over N^3 grid points.
//! Accuracy is absolute, about 1e-13 * ||M||; only the largest eigenvalue
//! is produced, so near-degenerate spectra need no special casing.

use crate::error::{Error, Result};
use crate::grid::GridField;

const SYM_TOL: f64 = 1e-12;

/// Symmetric trace-free d x d matrix, upper triangle stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymTraceFree {
    /// 2x2: entries (1,1) and (1,2); (2,2) = -(1,1).
    Two { a11: f64, a12: f64 },
    /// 3x3: first two rows of the upper triangle; (3,3) = -(1,1)-(2,2).
    Three {
        a11: f64,
        a12: f64,
        a13: f64,
        a22: f64,
        a23: f64,
    },
}

impl SymTraceFree {
    /// Validate a full 2x2 matrix (symmetry and trace within 1e-12).
    pub fn from_matrix2(m: &[[f64; 2]; 2]) -> Result<Self> {
        if (m[0][1] - m[1][0]).abs() > SYM_TOL {
            return Err(Error::InvalidMatrix(format!(
                "asymmetry {:.3e}",
                (m[0][1] - m[1][0]).abs()
            )));
        }
        let trace = m[0][0] + m[1][1];
        if trace.abs() > SYM_TOL {
            return Err(Error::InvalidMatrix(format!("trace {:.3e}", trace)));
        }
        Ok(Self::Two { a11: m[0][0], a12: 0.5 * (m[0][1] + m[1][0]) })
    }

    /// Validate a full 3x3 matrix (symmetry and trace within 1e-12).
    pub fn from_matrix3(m: &[[f64; 3]; 3]) -> Result<Self> {
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if (m[i][j] - m[j][i]).abs() > SYM_TOL {
                return Err(Error::InvalidMatrix(format!(
                    "asymmetry {:.3e} at ({i},{j})",
                    (m[i][j] - m[j][i]).abs()
                )));
            }
        }
        let trace = m[0][0] + m[1][1] + m[2][2];
        if trace.abs() > SYM_TOL {
            return Err(Error::InvalidMatrix(format!("trace {:.3e}", trace)));
        }
        Ok(Self::Three {
            a11: m[0][0],
            a12: 0.5 * (m[0][1] + m[1][0]),
            a13: 0.5 * (m[0][2] + m[2][0]),
            a22: m[1][1],
            a23: 0.5 * (m[1][2] + m[2][1]),
        })
    }

    /// Trace-free part of `v (x) v`, the tensor saturating `e = |v|^2/2`.
    pub fn traceless_outer(v: &[f64]) -> Result<Self> {
        match v {
            [x, y] => {
                let half_sq = 0.5 * (x * x + y * y);
                Ok(Self::Two { a11: x * x - half_sq, a12: x * y })
            }
            [x, y, z] => {
                let third_sq = (x * x + y * y + z * z) / 3.0;
                Ok(Self::Three {
                    a11: x * x - third_sq,
                    a12: x * y,
                    a13: x * z,
                    a22: y * y - third_sq,
                    a23: y * z,
                })
            }
            _ => Err(Error::Dim(format!("vector length {} not 2 or 3", v.len()))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Two { .. } => 2,
            Self::Three { .. } => 3,
        }
    }

    /// Entry (i, j) of the full matrix.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match *self {
            Self::Two { a11, a12 } => match (i, j) {
                (0, 0) => a11,
                (1, 1) => -a11,
                (0, 1) | (1, 0) => a12,
                _ => panic!("index ({i},{j}) out of range for 2x2"),
            },
            Self::Three { a11, a12, a13, a22, a23 } => match (i, j) {
                (0, 0) => a11,
                (1, 1) => a22,
                (2, 2) => -a11 - a22,
                (0, 1) | (1, 0) => a12,
                (0, 2) | (2, 0) => a13,
                (1, 2) | (2, 1) => a23,
                _ => panic!("index ({i},{j}) out of range for 3x3"),
            },
        }
    }
}

/// Largest eigenvalue of a symmetric 2x2 matrix (mean plus radius).
pub fn lambda_max_sym2(m: &[[f64; 2]; 2]) -> Result<f64> {
    if (m[0][1] - m[1][0]).abs() > SYM_TOL {
        return Err(Error::InvalidMatrix(format!(
            "asymmetry {:.3e}",
            (m[0][1] - m[1][0]).abs()
        )));
    }
    Ok(lmax2(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]))
}

/// Largest eigenvalue of a symmetric 3x3 matrix (trigonometric closed form).
pub fn lambda_max_sym3(m: &[[f64; 3]; 3]) -> Result<f64> {
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if (m[i][j] - m[j][i]).abs() > SYM_TOL {
            return Err(Error::InvalidMatrix(format!(
                "asymmetry {:.3e} at ({i},{j})",
                (m[i][j] - m[j][i]).abs()
            )));
        }
    }
    Ok(lmax3(
        m[0][0],
        0.5 * (m[0][1] + m[1][0]),
        0.5 * (m[0][2] + m[2][0]),
        m[1][1],
        0.5 * (m[1][2] + m[2][1]),
        m[2][2],
    ))
}

pub(crate) fn lmax2(a11: f64, a12: f64, a22: f64) -> f64 {
    let mean = 0.5 * (a11 + a22);
    let half_diff = 0.5 * (a11 - a22);
    mean + (half_diff * half_diff + a12 * a12).sqrt()
}

pub(crate) fn lmax3(a11: f64, a12: f64, a13: f64, a22: f64, a23: f64, a33: f64) -> f64 {
    let q = (a11 + a22 + a33) / 3.0;
    let p2 = (a11 - q).powi(2)
        + (a22 - q).powi(2)
        + (a33 - q).powi(2)
        + 2.0 * (a12 * a12 + a13 * a13 + a23 * a23);
    if p2 == 0.0 {
        return q; // exactly scalar matrix
    }
    let p = (p2 / 6.0).sqrt();
    let b11 = (a11 - q) / p;
    let b22 = (a22 - q) / p;
    let b33 = (a33 - q) / p;
    let b12 = a12 / p;
    let b13 = a13 / p;
    let b23 = a23 / p;
    let det_b = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13)
        + b13 * (b12 * b23 - b22 * b13);
    // clamp absorbs roundoff that pushes the cosine argument past +-1
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * phi.cos()
}

/// Generalized energy density `(d/2) * lambda_max(v (x) v - u)`.
///
/// Always at least `|v|^2/2`, with equality exactly when `u` is the
/// trace-free part of `v (x) v`.
pub fn energy_density(v: &[f64], u: &SymTraceFree) -> Result<f64> {
    if v.len() != u.dim() {
        return Err(Error::Dim(format!(
            "vector dim {} vs tensor dim {}",
            v.len(),
            u.dim()
        )));
    }
    Ok(match *u {
        SymTraceFree::Two { a11, a12 } => {
            lmax2(v[0] * v[0] - a11, v[0] * v[1] - a12, v[1] * v[1] + a11)
        }
        SymTraceFree::Three { a11, a12, a13, a22, a23 } => {
            1.5 * lmax3(
                v[0] * v[0] - a11,
                v[0] * v[1] - a12,
                v[0] * v[2] - a13,
                v[1] * v[1] - a22,
                v[1] * v[2] - a23,
                v[2] * v[2] + a11 + a22,
            )
        }
    })
}

/// Pointwise energy density of a velocity field against a tensor field.
///
/// `v` has d components, `u` has d^2 components in row-major order and
/// must be symmetric trace-free at every grid point within 1e-10.
pub fn energy_density_field(v: &GridField, u: &GridField) -> Result<GridField> {
    let grid = v.grid();
    if u.grid() != grid {
        return Err(Error::Dim("velocity and tensor grids differ".into()));
    }
    let d = grid.dim();
    if v.ncomp() != d {
        return Err(Error::Dim(format!(
            "velocity has {} components on a {d}-dimensional grid",
            v.ncomp()
        )));
    }
    if u.ncomp() != d * d {
        return Err(Error::Dim(format!(
            "tensor has {} components, expected {}",
            u.ncomp(),
            d * d
        )));
    }
    validate_tensor_field(u, 1e-10)?;

    let points = grid.points();
    let mut out = GridField::zeros(grid, 1, v.time());
    let e = out.component_mut(0);
    if d == 2 {
        let (v1, v2) = (v.component(0), v.component(1));
        let (u11, u12) = (u.component(0), u.component(1));
        for p in 0..points {
            e[p] = lmax2(
                v1[p] * v1[p] - u11[p],
                v1[p] * v2[p] - u12[p],
                v2[p] * v2[p] + u11[p],
            );
        }
    } else {
        let (v1, v2, v3) = (v.component(0), v.component(1), v.component(2));
        let u11 = u.component(0);
        let u12 = u.component(1);
        let u13 = u.component(2);
        let u22 = u.component(4);
        let u23 = u.component(5);
        let u33 = u.component(8);
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
    }
    Ok(out)
}

/// Check pointwise symmetry and trace of a tensor field; worst violation
/// beyond `tol` is reported with its grid location.
pub fn validate_tensor_field(u: &GridField, tol: f64) -> Result<()> {
    let d = u.grid().dim();
    let points = u.grid().points();
    let mut worst = 0.0f64;
    let mut worst_at = 0usize;
    for p in 0..points {
        let mut defect = 0.0f64;
        let mut trace = 0.0;
        for i in 0..d {
            trace += u.component(i * d + i)[p];
            for j in (i + 1)..d {
                defect = defect.max((u.component(i * d + j)[p] - u.component(j * d + i)[p]).abs());
            }
        }
        defect = defect.max(trace.abs());
        if defect > worst {
            worst = defect;
            worst_at = p;
        }
    }
    if worst > tol {
        return Err(Error::InvalidTensorField {
            index: u.multi_index(worst_at),
            defect: worst,
        });
    }
    Ok(())
}
