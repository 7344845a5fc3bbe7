use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xlmimo::correlation::{
    build_correlation_matrix, correlation_entry_closed_form, correlation_entry_farfield, correlation_entry_quadrature,
    Kernel, LocalScattering, QuadratureSettings, MAX_HALF_WIDTH,
};
use xlmimo::linalg::{complex_gaussian, hermitian_eigenvalues, CMatrix, C64};
use xlmimo::scenario::ArrayGeometry;

const STD_MATCHED_TEN_DEG: f64 = 0.302_299_894_039_036_3; // sqrt(3) * 10 deg

fn default_array(m: usize) -> ArrayGeometry {
    ArrayGeometry::half_wavelength(m, 0.15).unwrap()
}

fn cluster(angle: f64, radius: f64, beta: f64) -> LocalScattering {
    LocalScattering {
        nominal_angle: angle,
        half_width: STD_MATCHED_TEN_DEG,
        radius,
        beta,
    }
}

#[test]
fn reference_entry_matches_quadrature() {
    let geom = default_array(64);
    let p = cluster(FRAC_PI_6, 40.0, 1.0);
    let closed = correlation_entry_closed_form(10, -5, &geom, &p).unwrap();
    let quad =
        correlation_entry_quadrature(10, -5, &geom, &p, Kernel::SmallAngle, QuadratureSettings::default()).unwrap();
    assert!((closed - quad).norm() <= 1e-6, "{closed} vs {quad}");
}

#[test]
fn matrix_is_hermitian_with_beta_diagonal() {
    let geom = default_array(48);
    let r = build_correlation_matrix(&geom, &cluster(-0.4, 60.0, 0.7)).unwrap();
    let m = &r.matrix;
    assert!((m - m.adjoint()).norm() <= 1e-12 * m.norm());
    for i in 0..48 {
        assert!((m[(i, i)].re - 0.7).abs() <= 1e-10 * 0.7);
        assert!(m[(i, i)].im.abs() <= 1e-12);
    }
    assert!((r.trace() - 48.0 * 0.7).abs() <= 1e-10 * 48.0 * 0.7);
    assert!(r.min_eigenvalue >= -1e-8 * r.max_eigenvalue);
}

#[test]
fn sampling_factor_reproduces_matrix() {
    let geom = default_array(32);
    let r = build_correlation_matrix(&geom, &cluster(0.2, 100.0, 1.0)).unwrap();
    let rebuilt = &r.factor * r.factor.adjoint();
    assert!((&rebuilt - &r.matrix).norm() <= 1e-7 * r.matrix.norm());
    let eig = hermitian_eigenvalues(&rebuilt);
    let max = eig.iter().cloned().fold(f64::MIN, f64::max);
    assert!(eig.iter().all(|&e| e >= -1e-12 * max));
}

/// Entry-wise sample covariance of `L u` against `R`, in standard errors.
#[test]
fn sampled_diffuse_covariance_matches() {
    let geom = default_array(4);
    let r = build_correlation_matrix(&geom, &cluster(0.3, 45.0, 1.0)).unwrap();
    let draws = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let samples: Vec<_> = (0..draws)
        .map(|_| &r.factor * complex_gaussian(&mut rng, r.factor.ncols()))
        .collect();
    for i in 0..4 {
        for j in 0..4 {
            let prods: Vec<C64> = samples.iter().map(|h| h[i] * h[j].conj()).collect();
            let mean = prods.iter().sum::<C64>() / draws as f64;
            let var_re = prods.iter().map(|p| (p.re - mean.re).powi(2)).sum::<f64>() / (draws - 1) as f64;
            let var_im = prods.iter().map(|p| (p.im - mean.im).powi(2)).sum::<f64>() / (draws - 1) as f64;
            let se_re = (var_re / draws as f64).sqrt();
            let se_im = (var_im / draws as f64).sqrt();
            let target = r.matrix[(i, j)];
            assert!((mean.re - target.re).abs() <= 3.0 * se_re + 1e-12, "({i},{j}) re");
            assert!((mean.im - target.im).abs() <= 3.0 * se_im + 1e-12, "({i},{j}) im");
        }
    }
}

#[test]
fn far_field_limit_of_closed_form() {
    let geom = default_array(64);
    for angle in [-FRAC_PI_4, 0.0, FRAC_PI_4] {
        let p = cluster(angle, 1e6, 1.0);
        for m in (-32..32).step_by(3) {
            for n in (-32..32).step_by(5) {
                let closed = correlation_entry_closed_form(m, n, &geom, &p).unwrap();
                let far = correlation_entry_farfield(m, n, &geom, &p).unwrap();
                assert!((closed - far).norm() <= 1e-4, "m={m} n={n} angle={angle}");
            }
        }
    }
}

#[test]
fn small_angle_quadrature_reaches_far_field_formula() {
    // residual curvature at 1e6 m grows with the aperture; 8 elements stay below 1e-6
    let geom = default_array(8);
    for angle in [0.0, FRAC_PI_4] {
        let p = cluster(angle, 1e6, 1.0);
        for m in -4..4 {
            for n in -4..4 {
                let quad =
                    correlation_entry_quadrature(m, n, &geom, &p, Kernel::SmallAngle, QuadratureSettings::default())
                        .unwrap();
                let far = correlation_entry_farfield(m, n, &geom, &p).unwrap();
                assert!((quad - far).norm() <= 1e-6, "m={m} n={n}: {quad} vs {far}");
            }
        }
    }
}

#[test]
fn point_source_limit() {
    let geom = default_array(8);
    let p = LocalScattering {
        half_width: 1e-9,
        ..cluster(0.5, 1e6, 2.0)
    };
    let far = correlation_entry_farfield(3, -2, &geom, &p).unwrap();
    let planar = C64::from_polar(2.0, geom.wavenumber() * 5.0 * geom.spacing * 0.5f64.sin());
    assert!((far - planar).norm() < 1e-12);
}

#[test]
fn degenerate_branch_is_continuous() {
    // c ~ 1.03 * angle^2 here, so the sinc branch takes over near 9.85e-7 rad
    let geom = default_array(64);
    for angle in [1e-4, 1e-5, 2e-6, 9.9e-7, 9.8e-7, 5e-7, 1e-8, 0.0] {
        let p = cluster(angle, 40.0, 1.0);
        let closed = correlation_entry_closed_form(20, -7, &geom, &p).unwrap();
        let quad =
            correlation_entry_quadrature(20, -7, &geom, &p, Kernel::SmallAngle, QuadratureSettings::default()).unwrap();
        assert!((closed - quad).norm() <= 1e-6, "angle {angle}: {closed} vs {quad}");
    }
}

#[test]
fn half_width_outside_domain_is_rejected() {
    let geom = default_array(8);
    let p = LocalScattering {
        half_width: MAX_HALF_WIDTH * 1.01,
        ..cluster(0.0, 40.0, 1.0)
    };
    assert!(correlation_entry_closed_form(1, 0, &geom, &p).is_err());
    let zero = LocalScattering { half_width: 0.0, ..p };
    assert!(correlation_entry_closed_form(1, 0, &geom, &zero).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_quadratic_phase_quadrature(
        m in -32i64..32,
        n in -32i64..32,
        radius in 40.0f64..230.0,
        angle in -FRAC_PI_4..FRAC_PI_4,
        half_width in 0.01f64..MAX_HALF_WIDTH,
    ) {
        let geom = default_array(64);
        let p = LocalScattering { nominal_angle: angle, half_width, radius, beta: 1.0 };
        let closed = correlation_entry_closed_form(m, n, &geom, &p).unwrap();
        let quad = correlation_entry_quadrature(m, n, &geom, &p, Kernel::SmallAngle, QuadratureSettings::default()).unwrap();
        prop_assert!((closed - quad).norm() <= 1e-6, "{} vs {}", closed, quad);
    }

    #[test]
    fn conjugate_symmetry_and_beta_linearity(
        m in -32i64..32,
        n in -32i64..32,
        radius in 40.0f64..230.0,
        angle in -FRAC_PI_4..FRAC_PI_4,
        beta in 0.01f64..10.0,
    ) {
        let geom = default_array(64);
        let p = cluster(angle, radius, beta);
        let mn = correlation_entry_closed_form(m, n, &geom, &p).unwrap();
        let nm = correlation_entry_closed_form(n, m, &geom, &p).unwrap();
        prop_assert!((mn - nm.conj()).norm() <= 1e-12 * beta);
        let unit = correlation_entry_closed_form(m, n, &geom, &cluster(angle, radius, 1.0)).unwrap();
        prop_assert!((mn - unit * beta).norm() <= 1e-12 * beta);
        prop_assert!(mn.norm() <= beta * (1.0 + 1e-12));
    }

    #[test]
    fn random_matrices_are_psd(radius in 40.0f64..230.0, angle in -FRAC_PI_4..FRAC_PI_4) {
        let geom = default_array(24);
        let r = build_correlation_matrix(&geom, &cluster(angle, radius, 1.0)).unwrap();
        let eig = hermitian_eigenvalues(&(&r.factor * r.factor.adjoint()));
        prop_assert!(eig.iter().all(|&e| e >= -1e-10));
        let herm: CMatrix = &r.matrix - r.matrix.adjoint();
        prop_assert!(herm.norm() == 0.0);
    }
}
