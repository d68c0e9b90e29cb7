//! Property-based invariants of the spectral core and tensor kernels.

mod common;

use common::{jacobi_lambda_max, random_symmetric, seeded_rng, TAU};
use proptest::prelude::*;
use rand::Rng;

use subsol::energy::{energy_density, lambda_max_sym2, lambda_max_sym3, SymTraceFree};
use subsol::pump::{pump_initial, PumpConfig};
use subsol::snapshot::{read_snapshot, write_snapshot};
use subsol::spectral::{spectral_derivative, transform_forward, transform_inverse};
use subsol::{Grid, GridField};

fn random_field(grid: Grid, ncomp: usize, seed: u64) -> GridField {
    let mut rng = seeded_rng(seed);
    let data: Vec<f64> = (0..ncomp * grid.points())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    GridField::from_data(grid, ncomp, 0.0, data).unwrap()
}

#[test]
fn round_trip_is_identity_to_1e12() {
    let grid = Grid::new(2, 32).unwrap();
    let f = random_field(grid, 1, 42);
    let back = transform_inverse(&transform_forward(&f).unwrap());
    let rel = f.max_abs_diff(&back) / f.max_abs();
    assert!(rel < 1e-12, "round-trip relative error {rel}");
}

#[test]
fn parseval_holds_for_random_fields() {
    for (dim, n, seed) in [(2, 32, 1u64), (2, 48, 2), (3, 16, 3)] {
        let grid = Grid::new(dim, n).unwrap();
        let f = random_field(grid, 1, seed);
        let fhat = transform_forward(&f).unwrap();
        let physical: f64 =
            f.data().iter().map(|v| v * v).sum::<f64>() / grid.points() as f64;
        let spectral = fhat.spectrum_power();
        let rel = (physical - spectral).abs() / physical;
        assert!(rel < 1e-10, "Parseval violated: {rel} at dim {dim}");
    }
}

#[test]
fn transforms_preserve_hermitian_symmetry() {
    let grid = Grid::new(3, 16).unwrap();
    let f = random_field(grid, 1, 7);
    let fhat = transform_forward(&f).unwrap();
    assert!(fhat.hermitian_defect() < 1e-12 * f.max_abs());
}

#[test]
fn dealiased_product_derivative_matches_analytic() {
    // product of resolved single modes: h = sin(2 pi x1) cos(4 pi x2);
    // all product modes survive the 2/3 cutoff at N = 32
    let grid = Grid::new(2, 32).unwrap();
    let f = GridField::from_fn(grid, 1, 0.0, |_, x| {
        (TAU * x[0]).sin() * (2.0 * TAU * x[1]).cos()
    });
    let mut fhat = transform_forward(&f).unwrap();
    fhat.dealias();
    let d1 = transform_inverse(&spectral_derivative(&fhat, 0).unwrap());
    let exact = GridField::from_fn(grid, 1, 0.0, |_, x| {
        TAU * (TAU * x[0]).cos() * (2.0 * TAU * x[1]).cos()
    });
    assert!(d1.max_abs_diff(&exact) < 1e-10);
}

#[test]
fn lambda_max_agrees_with_jacobi_oracle() {
    let mut rng = seeded_rng(2024);
    for _ in 0..300 {
        let m2 = random_symmetric(2, &mut rng);
        let ours = lambda_max_sym2(&[[m2[0][0], m2[0][1]], [m2[1][0], m2[1][1]]]).unwrap();
        let oracle = jacobi_lambda_max(&m2);
        assert!((ours - oracle).abs() < 1e-12, "2x2: {ours} vs {oracle}");

        let m3 = random_symmetric(3, &mut rng);
        let full = [
            [m3[0][0], m3[0][1], m3[0][2]],
            [m3[1][0], m3[1][1], m3[1][2]],
            [m3[2][0], m3[2][1], m3[2][2]],
        ];
        let ours = lambda_max_sym3(&full).unwrap();
        let oracle = jacobi_lambda_max(&m3);
        assert!((ours - oracle).abs() < 1e-12, "3x3: {ours} vs {oracle}");
    }
}

/// Strategy for small trace-free symmetric tensors paired with vectors.
fn arb_v_u_2d() -> impl Strategy<Value = ([f64; 2], SymTraceFree)> {
    (
        prop::array::uniform2(-10.0f64..10.0),
        -10.0f64..10.0,
        -10.0f64..10.0,
    )
        .prop_map(|(v, a11, a12)| (v, SymTraceFree::Two { a11, a12 }))
}

fn arb_v_u_3d() -> impl Strategy<Value = ([f64; 3], SymTraceFree)> {
    (
        prop::array::uniform3(-10.0f64..10.0),
        prop::array::uniform5(-10.0f64..10.0),
    )
        .prop_map(|(v, a)| {
            (
                v,
                SymTraceFree::Three { a11: a[0], a12: a[1], a13: a[2], a22: a[3], a23: a[4] },
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn energy_density_dominates_kinetic_2d((v, u) in arb_v_u_2d()) {
        let e = energy_density(&v, &u).unwrap();
        let half_sq = 0.5 * (v[0] * v[0] + v[1] * v[1]);
        prop_assert!(e >= half_sq - 1e-12 * (1.0 + half_sq.abs()));
    }

    #[test]
    fn energy_density_dominates_kinetic_3d((v, u) in arb_v_u_3d()) {
        let e = energy_density(&v, &u).unwrap();
        let half_sq = 0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        prop_assert!(e >= half_sq - 1e-12 * (1.0 + half_sq.abs()));
    }

    #[test]
    fn energy_density_equality_case(v in prop::array::uniform3(-10.0f64..10.0)) {
        let u = SymTraceFree::traceless_outer(&v).unwrap();
        let e = energy_density(&v, &u).unwrap();
        let half_sq = 0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        prop_assert!((e - half_sq).abs() < 1e-12 * (1.0 + half_sq.abs()));
    }

    #[test]
    fn energy_density_is_degree_two_homogeneous(
        (v, u) in arb_v_u_2d(),
        s in 0.1f64..10.0,
    ) {
        let e1 = energy_density(&v, &u).unwrap();
        let sv = [s * v[0], s * v[1]];
        let su = match u {
            SymTraceFree::Two { a11, a12 } =>
                SymTraceFree::Two { a11: s * s * a11, a12: s * s * a12 },
            _ => unreachable!(),
        };
        let e2 = energy_density(&sv, &su).unwrap();
        prop_assert!((e2 - s * s * e1).abs() < 1e-12 * (1.0 + e2.abs()));
    }

    #[test]
    fn snapshot_round_trip_bitexact(
        n_choice in 0usize..2,
        ncomp in 1usize..4,
        seed in 0u64..1000,
    ) {
        let n = [8, 16][n_choice];
        let grid = Grid::new(2, n).unwrap();
        let f = random_field(grid, ncomp, seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.fld");
        write_snapshot(&f, &path).unwrap();
        let g = read_snapshot(&path).unwrap();
        // bit-exact, not approximately equal
        for (a, b) in f.data().iter().zip(g.data()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(f.time().to_bits(), g.time().to_bits());
    }
}

#[test]
fn pump_divergence_free_across_configs() {
    let grid = Grid::new(2, 64).unwrap();
    let zero = GridField::zeros(grid, 2, 0.0);
    let mut rng = seeded_rng(5);
    for _ in 0..20 {
        let xi = loop {
            let xi = [rng.gen_range(-3i64..=3), rng.gen_range(-3i64..=3)];
            if xi != [0, 0] {
                break xi;
            }
        };
        let n_osc = rng.gen_range(1u32..=5);
        let eta = rng.gen_range(0.01..0.5);
        let cfg = PumpConfig::new(n_osc, xi, eta, 0.25).unwrap();
        let vp = pump_initial(&zero, &cfg).unwrap();
        let vhat = transform_forward(&vp).unwrap();
        let d1 = spectral_derivative(&vhat, 0).unwrap();
        let d2 = spectral_derivative(&vhat, 1).unwrap();
        let mut div_max = 0.0f64;
        let mut div = subsol::SpectralField::zeros(grid, 1, 0.0);
        for (z, (a, b)) in div
            .component_mut(0)
            .iter_mut()
            .zip(d1.component(0).iter().zip(d2.component(1)))
        {
            *z = a + b;
        }
        div_max = div_max.max(transform_inverse(&div).max_abs());
        assert!(div_max < 1e-12, "divergence {div_max} for xi {xi:?}");
    }
}
