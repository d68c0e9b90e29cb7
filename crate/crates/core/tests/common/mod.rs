//! Shared fixtures: reference states and an independent eigenvalue oracle.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use subsol::euler2d::EulerState2D;
use subsol::{Grid, GridField};

pub const TAU: f64 = std::f64::consts::TAU;

/// Taylor-Green eigenstate: psi = sin(2 pi x1) sin(2 pi x2)/(2 pi),
/// omega = -4 pi sin(2 pi x1) sin(2 pi x2). Exactly steady, energy 1/2.
pub fn taylor_green(grid: Grid) -> EulerState2D {
    let pi = std::f64::consts::PI;
    EulerState2D::from_modes(
        grid,
        &[
            ((1, 1), Complex64::new(pi, 0.0)),
            ((-1, -1), Complex64::new(pi, 0.0)),
            ((1, -1), Complex64::new(-pi, 0.0)),
            ((-1, 1), Complex64::new(-pi, 0.0)),
        ],
    )
    .unwrap()
}

/// The exact Taylor-Green velocity samples.
pub fn taylor_green_velocity(grid: Grid) -> GridField {
    GridField::from_fn(grid, 2, 0.0, |c, x| {
        if c == 0 {
            -(TAU * x[0]).sin() * (TAU * x[1]).cos()
        } else {
            (TAU * x[0]).cos() * (TAU * x[1]).sin()
        }
    })
}

/// Random smooth vorticity: seeded low-mode coefficients with a Gaussian
/// spectral envelope, conjugate-closed, so the state is fully resolved.
pub fn random_smooth_state(grid: Grid, seed: u64, amplitude: f64, kmax: i64) -> EulerState2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes: Vec<((i64, i64), Complex64)> = Vec::new();
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            if (k1, k2) == (0, 0) {
                continue;
            }
            // fill half-space, mirror the rest
            if k1 < 0 || (k1 == 0 && k2 < 0) {
                continue;
            }
            let env = (-((k1 * k1 + k2 * k2) as f64) / 4.0).exp();
            let c = Complex64::new(
                amplitude * env * rng.gen_range(-1.0..1.0),
                amplitude * env * rng.gen_range(-1.0..1.0),
            );
            modes.push(((k1, k2), c));
            modes.push(((-k1, -k2), c.conj()));
        }
    }
    EulerState2D::from_modes(grid, &modes).unwrap()
}

/// Independent eigenvalue oracle: cyclic Jacobi rotations on a dense
/// symmetric matrix. No closed forms anywhere near it.
pub fn jacobi_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-32 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Max eigenvalue via the Jacobi oracle.
pub fn jacobi_lambda_max(m: &[Vec<f64>]) -> f64 {
    *jacobi_eigenvalues(m).last().unwrap()
}

/// Deterministic random symmetric matrix with entries in [-1, 1].
pub fn random_symmetric(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            let v = rng.gen_range(-1.0..1.0);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
