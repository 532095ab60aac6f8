use approx::assert_abs_diff_eq;
use illposed::specfun::*;
use proptest::prelude::*;
use std::f64::consts::PI;

/// Bessel's integral J_l(x) = (1/2π) ∫ cos(lτ − x sin τ) dτ by the periodic
/// trapezoid rule, which converges geometrically once n ≫ x + l.
fn bessel_integral(l: u32, x: f64) -> f64 {
    let n = 2048;
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            (l as f64 * t - x * t.sin()).cos()
        })
        .sum::<f64>()
        / n as f64
}

fn sign_changes<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, step: f64) -> usize {
    let mut count = 0;
    let mut x = a;
    let mut fx = f(x);
    while x < b {
        let y = (x + step).min(b);
        let fy = f(y);
        if fx * fy < 0.0 {
            count += 1;
        }
        x = y;
        fx = fy;
    }
    count
}

#[test]
fn values_at_the_origin() {
    assert_eq!(bessel_j(0, 0.0), 1.0);
    for l in 1..6 {
        assert_eq!(bessel_j(l, 0.0), 0.0);
    }
}

#[test]
fn first_zero_of_j0() {
    assert!(bessel_j(0, 2.404826).abs() < 1e-6);
}

#[test]
fn three_term_recurrence() {
    for x in [1.0, 5.0, 20.0] {
        for l in 1..8 {
            let lhs = bessel_j(l - 1, x) + bessel_j(l + 1, x);
            let rhs = 2.0 * l as f64 / x * bessel_j(l, x);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }
}

#[test]
fn matches_the_integral_representation() {
    for l in [0u32, 1, 2, 5, 10, 25] {
        for x in [0.1, 0.9, 3.7, 10.0, 14.9, 35.2, 99.0, 150.5, 200.0] {
            assert_abs_diff_eq!(bessel_j(l, x), bessel_integral(l, x), epsilon = 1e-12);
        }
    }
}

#[test]
fn first_derivative_zero_of_order_one() {
    let z = bessel_jprime_zeros(1, 1);
    assert_eq!(z.order, 1);
    assert_abs_diff_eq!(z.zeros[0], 1.84118, epsilon = 1e-4);
}

#[test]
fn derivative_zeros_approach_pi_spacing() {
    let z = bessel_jprime_zeros(1, 51).zeros;
    assert_abs_diff_eq!(z[50] - z[49], PI, epsilon = 1e-2);
    for w in z.windows(2) {
        assert!(w[0] < w[1]);
    }
}

#[test]
fn first_zeros_increase_with_order() {
    let first: Vec<f64> = (1..=3).map(|l| bessel_jprime_zeros(l, 1).zeros[0]).collect();
    assert!(first[0] < first[1] && first[1] < first[2]);
}

#[test]
fn disc_quadrature_moments() {
    let q = disc_quadrature(6, 16);
    assert_abs_diff_eq!(q.integrate(|_, _| 1.0), PI, epsilon = 1e-12);
    assert_abs_diff_eq!(q.integrate(|r, t| r * t.cos()), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(q.integrate(|r, _| r * r), PI / 2.0, epsilon = 1e-12);
    let (x, y) = q.xy(3);
    assert_abs_diff_eq!(x.hypot(y), q.r[3], epsilon = 1e-15);
}

proptest! {
    #[test]
    fn derivative_zeros_are_roots_and_none_are_skipped(l in 1u32..12, m_max in 1usize..15) {
        let z = bessel_jprime_zeros(l, m_max);
        prop_assert_eq!(z.zeros.len(), m_max);
        for &x in &z.zeros {
            prop_assert!(bessel_j_prime(l, x).abs() < 1e-10);
        }
        let top = z.zeros[m_max - 1] + PI;
        let count = sign_changes(|x| bessel_j_prime(l, x), 1e-3, top, 1e-3);
        prop_assert_eq!(count, m_max);
    }

    #[test]
    fn disc_rule_is_exact_on_polar_monomials(n_r in 1usize..10, n_theta in 1usize..20, a_frac in 0.0f64..1.0, b_frac in 0.0f64..1.0) {
        let a = ((2 * n_r - 2) as f64 * a_frac).round() as i32;
        let b = ((n_theta - 1) as f64 * b_frac).round();
        let q = disc_quadrature(n_r, n_theta);
        prop_assert!(q.weights.iter().all(|w| *w > 0.0));
        let got = q.integrate(|r, t| r.powi(a) * (b * t).cos());
        let exact = if b == 0.0 { 2.0 * PI / (a as f64 + 2.0) } else { 0.0 };
        prop_assert!((got - exact).abs() < 1e-12);
    }
}
