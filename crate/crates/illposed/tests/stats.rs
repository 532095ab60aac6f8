use approx::{assert_abs_diff_eq, assert_relative_eq};
use illposed::quad::adaptive_simpson;
use illposed::stats::*;
use illposed::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// ∫_a^b f(z) dz with z = u² so the n = 1 singularity at z = 0 disappears.
fn integrate_pdf<F: Fn(f64) -> f64>(n: u32, a: f64, b: f64, weight: F) -> f64 {
    let g = |u: f64| {
        let z = u * u;
        2.0 * u * chi2_pdf(z, n).unwrap() * weight(z)
    };
    adaptive_simpson(&g, a.sqrt().max(1e-150), b.sqrt(), 1e-12)
}

#[test]
fn density_examples() {
    assert_eq!(chi2_pdf(0.0, 2).unwrap(), 0.5);
    for z in [0.3, 1.0, 4.0] {
        assert_relative_eq!(chi2_pdf(z, 2).unwrap(), (-z / 2.0).exp() / 2.0, max_relative = 1e-14);
    }
    let expected = (-0.5f64).exp() / (2.0 * PI).sqrt();
    assert_relative_eq!(chi2_pdf(1.0, 1).unwrap(), expected, max_relative = 1e-14);
    assert_abs_diff_eq!(expected, 0.2420, epsilon = 1e-4);
    assert!(matches!(chi2_pdf(-1.0, 2), Err(Error::Domain(_))));
    assert!(matches!(chi2_pdf(1.0, 0), Err(Error::Domain(_))));
}

#[test]
fn density_is_normalized_with_mean_n() {
    for n in 1..=10 {
        let top = 200.0 + 20.0 * n as f64;
        assert_abs_diff_eq!(integrate_pdf(n, 0.0, top, |_| 1.0), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(integrate_pdf(n, 0.0, top, |z| z), n as f64, epsilon = 1e-6);
    }
}

#[test]
fn p_value_examples() {
    assert_eq!(p_value(0.0, 3).unwrap(), 1.0);
    let p = p_value(1.0, 1).unwrap();
    assert_abs_diff_eq!(p, 0.3173, epsilon = 1e-4);
    // P(χ²₁ ≥ 1) = erfc(1/√2).
    assert_abs_diff_eq!(p, 0.317_310_507_862_914_1, epsilon = 1e-14);
}

#[test]
fn p_value_matches_tail_quadrature() {
    for n in [1, 2, 3, 7, 15] {
        for chi2 in [0.5, 1.0, 3.3, 9.0, 25.0] {
            let tail = integrate_pdf(n, chi2, 400.0, |_| 1.0);
            assert_abs_diff_eq!(p_value(chi2, n).unwrap(), tail, epsilon = 1e-8);
        }
    }
}

#[test]
fn p_value_decreases_with_chi2() {
    for n in 1..=6 {
        let ps: Vec<f64> = (0..200).map(|k| p_value(0.1 * k as f64, n).unwrap()).collect();
        assert!(ps.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn delta_chi2_reproduces_the_published_table() {
    let table = [
        (68.27, [1.00, 2.30, 3.53]),
        (90.00, [2.71, 4.61, 6.25]),
        (95.45, [4.00, 6.18, 8.03]),
        (99.00, [6.63, 9.21, 11.34]),
        (99.73, [9.00, 11.83, 14.16]),
    ];
    for (cl, row) in table {
        for (m, expected) in (1..=3).zip(row) {
            assert_abs_diff_eq!(delta_chi2(cl, m).unwrap(), expected, epsilon = 0.01);
        }
    }
    assert!(matches!(delta_chi2(100.0, 1), Err(Error::Domain(_))));
    assert!(matches!(delta_chi2(0.0, 1), Err(Error::Domain(_))));
}

#[test]
fn curvature_of_the_sample_mean() {
    let n = 25;
    let j = DMatrix::from_element(n, 1, 1.0);
    let c = ls_curvature_covariance(&j, &vec![1.0; n]).unwrap();
    assert_abs_diff_eq!(c.alpha[(0, 0)], n as f64, epsilon = 1e-12);
    assert_abs_diff_eq!(c.sigmas[0], 1.0 / (n as f64).sqrt(), epsilon = 1e-14);
}

#[test]
fn orthogonal_design_gives_diagonal_covariance() {
    let j = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0, -1.0]);
    let c = ls_curvature_covariance(&j, &[0.5; 4]).unwrap();
    assert_abs_diff_eq!(c.covariance[(0, 1)], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(c.covariance[(1, 0)], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(c.covariance[(0, 0)], 1.0 / 16.0, epsilon = 1e-15);
}

#[test]
fn random_design_covariance_matches_dense_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let j = DMatrix::from_fn(20, 2, |_, _| rng.random_range(-1.0..1.0));
    let sigma: Vec<f64> = (0..20).map(|_| rng.random_range(0.1..2.0)).collect();
    let c = ls_curvature_covariance(&j, &sigma).unwrap();
    let winv = DMatrix::from_diagonal(&DVector::from_iterator(20, sigma.iter().map(|s| 1.0 / (s * s))));
    let oracle = (j.transpose() * winv * &j).try_inverse().unwrap();
    for (a, b) in c.covariance.iter().zip(oracle.iter()) {
        assert_abs_diff_eq!(*a, *b, epsilon = 1e-12 * oracle.abs().max());
    }
}

#[test]
fn collinear_design_is_rejected() {
    let j = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
    assert!(matches!(ls_curvature_covariance(&j, &[1.0; 3]), Err(Error::Numerical(_))));
}

proptest! {
    #[test]
    fn threshold_and_tail_are_inverse(cl in 1.0f64..99.9, m in 1u32..8) {
        let d = delta_chi2(cl, m).unwrap();
        prop_assert!((p_value(d, m).unwrap() - (1.0 - cl / 100.0)).abs() < 1e-6);
    }

    #[test]
    fn curvature_is_half_the_chi2_hessian(seed in any::<u64>(), n in 4usize..30, p in 1usize..4) {
        // Linear model F_i(θ) = Σ_j J_ij θ_j + c_i: χ² is quadratic and the difference Hessian exact.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0));
        let offset = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
        let Ok(c) = ls_curvature_covariance(&j, &sigma) else {
            return Ok(());
        };
        let chi2 = |theta: &DVector<f64>| chi2_of(&(&j * theta + &offset - &y), &sigma);
        let theta0 = DVector::from_fn(p, |_, _| rng.random_range(-1.0..1.0));
        let h = 1e-3;
        for a in 0..p {
            for b in 0..p {
                let e = |da: f64, db: f64| {
                    let mut t = theta0.clone();
                    t[a] += da;
                    t[b] += db;
                    chi2(&t)
                };
                let hess = (e(h, h) - e(h, -h) - e(-h, h) + e(-h, -h)) / (4.0 * h * h);
                let scale = c.alpha.abs().max();
                prop_assert!((0.5 * hess - c.alpha[(a, b)]).abs() <= 1e-5 * scale);
            }
        }
    }
}
