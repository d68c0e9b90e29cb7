//! Fixtures shared by the CLI test suites.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use subsol::euler2d::EulerState2D;
use subsol::{Grid, GridField};

pub const TAU: f64 = std::f64::consts::TAU;

/// Taylor-Green eigenstate: exactly steady, kinetic energy 1/2.
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

pub fn taylor_green_velocity(grid: Grid) -> GridField {
    GridField::from_fn(grid, 2, 0.0, |c, x| {
        if c == 0 {
            -(TAU * x[0]).sin() * (TAU * x[1]).cos()
        } else {
            (TAU * x[0]).cos() * (TAU * x[1]).sin()
        }
    })
}

/// The Taylor-Green vorticity as a mode file accepted by `--ic`.
pub fn taylor_green_ic() -> String {
    let pi = std::f64::consts::PI;
    format!("1 1 {pi:.17} 0\n-1 -1 {pi:.17} 0\n1 -1 {:.17} 0\n-1 1 {:.17} 0\n", -pi, -pi)
}

/// Seeded smooth random vorticity, band-limited to |k|_inf <= kmax.
pub fn random_smooth_state(grid: Grid, seed: u64, amplitude: f64, kmax: i64) -> EulerState2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes: Vec<((i64, i64), Complex64)> = Vec::new();
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            if (k1, k2) == (0, 0) || k1 < 0 || (k1 == 0 && k2 < 0) {
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

/// Path of the built CLI binary.
pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_subsol"))
}

/// Run the binary with the given arguments in `dir`.
pub fn run_cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("failed to launch subsol")
}

pub fn assert_exit(out: &Output, code: i32, context: &str) {
    let got = out.status.code().unwrap_or(-1);
    assert_eq!(
        got,
        code,
        "{context}: expected exit {code}, got {got}\nstdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Parse a JSON-lines file.
pub fn read_jsonl(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("bad jsonl line"))
        .collect()
}
