use approx::assert_abs_diff_eq;
use illposed::fredholm::*;
use illposed::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sample<F: Fn(f64) -> f64>(k: &SampledKernel, f: F) -> Vec<f64> {
    k.nodes.iter().map(|&x| f(x)).collect()
}

fn min_kernel() -> SampledKernel {
    SampledKernel::from_fn(|x, t| x.min(t), 0.0, 1.0, 8, 8)
}

/// Symmetric kernel Σ c_i p_i(x) p_i(t) with cosine-plus-monomial parts.
fn low_rank_kernel(coeffs: &[f64]) -> (SampledKernel, Vec<Vec<f64>>) {
    let part = |i: usize, x: f64| (PI * (i as f64 + 1.0) * x).cos() + 0.3 * x.powi(i as i32);
    let k = SampledKernel::from_fn(
        |x, t| coeffs.iter().enumerate().map(|(i, c)| c * part(i, x) * part(i, t)).sum(),
        0.0,
        1.0,
        8,
        4,
    );
    let parts = (0..coeffs.len()).map(|i| sample(&k, |x| part(i, x))).collect();
    (k, parts)
}

#[test]
fn zero_lambda_returns_the_data() {
    let k = min_kernel();
    let f = sample(&k, |x| x.exp());
    assert_eq!(nystrom_solve(&k, &f, 0.0).unwrap(), f);
    let n = neumann_series_solve(&k, &f, 0.0, 1).unwrap();
    assert_eq!(n.u, f);
    let parts = vec![vec![1.0; k.len()]];
    assert_eq!(degenerate_solve(&parts, &parts, &k.weights, &f, 0.0).unwrap(), f);
    let eig = symmetric_eigensystem(&k).unwrap();
    let r = resolvent_symmetric(&eig, &k, 0.0).unwrap();
    assert_eq!(r.values, k.values);
}

#[test]
fn separable_kernel_nystrom_matches_reduced_system() {
    // K(x, t) = x sin t on [0, π].
    let k = SampledKernel::from_fn(|x, t| x * t.sin(), 0.0, PI, 10, 4);
    let f = sample(&k, |x| 1.0 - 0.5 * x);
    let lambda = 0.3;
    let a = vec![k.nodes.clone()];
    let b = vec![sample(&k, f64::sin)];
    let u_deg = degenerate_solve(&a, &b, &k.weights, &f, lambda).unwrap();
    let u_ny = nystrom_solve(&k, &f, lambda).unwrap();
    assert!(sup_diff(&u_deg, &u_ny) < 1e-10);
    // ∫₀^π t sin t dt = π, so λ = 1/π is the characteristic value.
    assert!(matches!(degenerate_solve(&a, &b, &k.weights, &f, 1.0 / PI), Err(Error::Characteristic { .. })));
    assert!(matches!(nystrom_solve(&k, &f, 1.0 / PI), Err(Error::Characteristic { .. })));
}

#[test]
fn scalar_degenerate_kernel() {
    let k = SampledKernel::from_fn(|_, _| 1.0, 0.0, 1.0, 6, 1);
    let ones = vec![1.0; k.len()];
    let u = degenerate_solve(&[ones.clone()], &[ones.clone()], &k.weights, &ones, 0.5).unwrap();
    for v in u {
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-13);
    }
}

#[test]
fn trigonometric_degenerate_kernel_matches_nystrom() {
    // K(x, t) = cos x cos t + 2 sin x sin t on 128 nodes of [0, π].
    let k = SampledKernel::from_fn(|x, t| x.cos() * t.cos() + 2.0 * x.sin() * t.sin(), 0.0, PI, 8, 16);
    assert_eq!(k.len(), 128);
    let f = sample(&k, |x| x * x - 1.0);
    let a = vec![sample(&k, f64::cos), sample(&k, |x| 2.0 * x.sin())];
    let b = vec![sample(&k, f64::cos), sample(&k, f64::sin)];
    for lambda in [-0.7, 0.2, 0.5] {
        let u_deg = degenerate_solve(&a, &b, &k.weights, &f, lambda).unwrap();
        let u_ny = nystrom_solve(&k, &f, lambda).unwrap();
        assert!(sup_diff(&u_deg, &u_ny) < 1e-9);
    }
}

#[test]
fn nystrom_matches_neumann_for_small_lambda() {
    let k = min_kernel();
    let f = sample(&k, |x| (2.0 * x).cos());
    let lambda = 0.5;
    let series = neumann_series_solve(&k, &f, lambda, 50).unwrap();
    assert!(series.converged);
    let u = nystrom_solve(&k, &f, lambda).unwrap();
    assert!(sup_diff(&series.u, &u) < 1e-8);
}

#[test]
fn neumann_increments_decay_geometrically_for_a_contraction() {
    // Constant kernel: ‖λ K W‖ = λ on [0, 1].
    let k = SampledKernel::from_fn(|_, _| 1.0, 0.0, 1.0, 6, 2);
    let f = sample(&k, |x| 1.0 + x);
    let series = neumann_series_solve(&k, &f, 0.5, 30).unwrap();
    assert!(series.converged);
    for w in series.term_norms[1..].windows(2) {
        assert!((w[1] / w[0] - 0.5).abs() < 1e-12);
    }
    let u = nystrom_solve(&k, &f, 0.5).unwrap();
    assert!(sup_diff(&series.u, &u) <= 2.0 * series.term_norms[29]);
}

#[test]
fn neumann_diverges_beyond_the_first_characteristic_value() {
    // Constant kernel has its only characteristic value at 1.
    let k = SampledKernel::from_fn(|_, _| 1.0, 0.0, 1.0, 6, 2);
    let f = sample(&k, |x| x);
    let series = neumann_series_solve(&k, &f, 2.0, 40).unwrap();
    assert!(!series.converged);
    let u = nystrom_solve(&k, &f, 2.0).unwrap();
    // u = f + 2c with c = ∫u, so c = −∫f = −1/2 and u = x − 1.
    for (ui, x) in u.iter().zip(&k.nodes) {
        assert_abs_diff_eq!(*ui, x - 1.0, epsilon = 1e-12);
    }
    assert!(sup_diff(&series.u, &u) > 1.0);
}

#[test]
fn rank_one_resolvent_has_unit_residue() {
    let k0 = SampledKernel::from_fn(|_, _| 0.0, 0.0, 1.0, 8, 2);
    let phi = sample(&k0, |x| 3f64.sqrt() * x);
    let lambda1 = 2.5;
    let values = DMatrix::from_fn(k0.len(), k0.len(), |i, j| phi[i] * phi[j] / lambda1);
    let k = SampledKernel::new(values, k0.nodes.clone(), k0.weights.clone()).unwrap();
    let eig = symmetric_eigensystem(&k).unwrap();
    assert_eq!(eig.characteristic_values.len(), 1);
    assert_abs_diff_eq!(eig.characteristic_values[0], lambda1, epsilon = 1e-12);
    let near = lambda1 * (1.0 - 1e-6);
    let r = resolvent_symmetric(&eig, &k, near).unwrap();
    let residue = r.values.map(|v| v * (lambda1 - near));
    for i in 0..k.len() {
        for j in 0..k.len() {
            assert_abs_diff_eq!(residue[(i, j)], phi[i] * phi[j], epsilon = 1e-5);
        }
    }
    assert!(matches!(resolvent_symmetric(&eig, &k, lambda1), Err(Error::Characteristic { .. })));
}

#[test]
fn min_kernel_resolvent_matches_nystrom() {
    let k = min_kernel();
    let eig = symmetric_eigensystem(&k).unwrap();
    let lambda1 = eig.characteristic_values[0];
    assert!((lambda1 - PI * PI / 4.0).abs() < 1e-3);
    let lambda = 0.5 * lambda1;
    let f = sample(&k, |x| 1.0 + x * x);
    let r = resolvent_symmetric(&eig, &k, lambda).unwrap();
    let u_res = resolvent_apply(&r, &f, lambda).unwrap();
    let u_ny = nystrom_solve(&k, &f, lambda).unwrap();
    assert!(sup_diff(&u_res, &u_ny) < 1e-7 * sup(&f));
}

#[test]
fn eigensolution_examples() {
    let (k, _) = low_rank_kernel(&[1.0, 0.4]);
    let eig = symmetric_eigensystem(&k).unwrap();
    assert_eq!(eig.characteristic_values.len(), 2);

    // Remove the stored modes from a generic function.
    let g = sample(&k, |x| (5.0 * x).sin() + x);
    let (comps, _) = eig.expand(&g);
    let mut f = g.clone();
    for (i, c) in comps.iter().enumerate() {
        for (fi, p) in f.iter_mut().zip(eig.eigenfunctions.column(i).iter()) {
            *fi -= c * p;
        }
    }
    let (u, residual) = symmetric_eigensolution(&eig, &f, 0.3).unwrap();
    assert!(sup_diff(&u, &f) < 1e-12);
    assert!(residual > 0.0);

    let phi1: Vec<f64> = eig.eigenfunctions.column(0).iter().copied().collect();
    let lambda = 0.5 * eig.characteristic_values[0];
    let (u, residual) = symmetric_eigensolution(&eig, &phi1, lambda).unwrap();
    assert!(residual < 1e-12);
    for (a, b) in u.iter().zip(&phi1) {
        assert_abs_diff_eq!(*a, 2.0 * b, epsilon = 1e-10);
    }
}

#[test]
fn eigenfunctions_are_orthonormal() {
    let k = SampledKernel::from_fn(|x, t| (-(x - t).abs()).exp(), 0.0, 1.0, 8, 4);
    let eig = symmetric_eigensystem(&k).unwrap();
    let n = eig.characteristic_values.len();
    for i in 0..n {
        for j in 0..n {
            let ip: f64 = (0..k.len())
                .map(|r| eig.eigenfunctions[(r, i)] * eig.eigenfunctions[(r, j)] * k.weights[r])
                .sum();
            assert_abs_diff_eq!(ip, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-8);
        }
    }
    for w in eig.characteristic_values.windows(2) {
        assert!(w[0].abs() <= w[1].abs());
    }
}

#[test]
fn random_symmetric_kernel_eigensolution_matches_nystrom() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let base = SampledKernel::from_fn(|_, _| 0.0, -1.0, 1.0, 6, 4);
    let n = base.len();
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let values = (&a + a.transpose()) * 0.5;
    let k = SampledKernel::new(values, base.nodes.clone(), base.weights.clone()).unwrap();
    let eig = symmetric_eigensystem(&k).unwrap();
    let lambda = 0.4 * eig.characteristic_values[0].abs();
    let f = sample(&k, |x| x.cos());
    let (u, _) = symmetric_eigensolution(&eig, &f, lambda).unwrap();
    let u_ny = nystrom_solve(&k, &f, lambda).unwrap();
    assert!(sup_diff(&u, &u_ny) < 1e-8);
}

#[test]
fn non_symmetric_kernels_have_no_eigensystem() {
    let k = SampledKernel::from_fn(|x, t| x * t * t, 0.0, 1.0, 4, 1);
    assert!(matches!(symmetric_eigensystem(&k), Err(Error::Input(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn second_kind_solvers_agree(
        coeffs in prop::collection::vec(0.1f64..2.0, 1..=8),
        scale in -0.5f64..0.5,
        phase in 0.0f64..PI,
    ) {
        let (k, parts) = low_rank_kernel(&coeffs);
        let eig = symmetric_eigensystem(&k).unwrap();
        let radius = eig.characteristic_values[0].abs();
        let lambda = scale * radius;
        let f = sample(&k, |x| (3.0 * x + phase).sin() + 0.5);

        let u_ny = nystrom_solve(&k, &f, lambda).unwrap();
        let a: Vec<Vec<f64>> = parts.iter().zip(&coeffs).map(|(p, c)| p.iter().map(|v| c * v).collect()).collect();
        let u_deg = degenerate_solve(&a, &parts, &k.weights, &f, lambda).unwrap();
        let (u_eig, _) = symmetric_eigensolution(&eig, &f, lambda).unwrap();
        let r = resolvent_symmetric(&eig, &k, lambda).unwrap();
        let u_res = resolvent_apply(&r, &f, lambda).unwrap();
        let series = neumann_series_solve(&k, &f, lambda, 80).unwrap();

        let tol = 1e-7 * sup(&f);
        prop_assert!(sup_diff(&u_deg, &u_ny) < tol);
        prop_assert!(sup_diff(&u_eig, &u_ny) < tol);
        prop_assert!(sup_diff(&u_res, &u_ny) < tol);
        prop_assert!(series.converged);
        prop_assert!(sup_diff(&series.u, &u_ny) < tol);
    }

    #[test]
    fn iterated_kernel_matches_its_eigen_expansion(coeffs in prop::collection::vec(0.1f64..2.0, 1..=8)) {
        let (k, _) = low_rank_kernel(&coeffs);
        let eig = symmetric_eigensystem(&k).unwrap();
        let k2 = k.iterated();
        let n = k.len();
        let scale = k2.abs().max();
        for i in 0..n {
            for j in 0..n {
                let series: f64 = eig
                    .characteristic_values
                    .iter()
                    .enumerate()
                    .map(|(c, li)| eig.eigenfunctions[(i, c)] * eig.eigenfunctions[(j, c)] / (li * li))
                    .sum();
                prop_assert!((k2[(i, j)] - series).abs() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn nystrom_residual_is_small(seed in any::<u64>(), lambda in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..4.0)];
        let k = SampledKernel::from_fn(|x, t| c[0] + c[1] * x * t + (-c[2] * (x - t).powi(2)).exp(), 0.0, 1.0, 8, 3);
        let f = sample(&k, |x| (c[2] * x).sin() + c[0]);
        if let Ok(u) = nystrom_solve(&k, &f, lambda) {
            let ku = k.apply(&u);
            let res = u.iter().zip(&ku).zip(&f).fold(0.0f64, |m, ((u, k), f)| m.max((u - lambda * k - f).abs()));
            prop_assert!(res < 1e-10 * sup(&f));
        }
    }
}
