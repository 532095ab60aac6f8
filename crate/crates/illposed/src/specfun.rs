//! Bessel functions of the first kind, zeros of their derivatives, and a
//! product quadrature on the unit disc.

use crate::quad::gauss_legendre_on;
use std::f64::consts::PI;

/// Below this argument the power series is used; beyond it the alternating
/// terms cancel badly for large orders and backward recurrence takes over.
const SERIES_LIMIT: f64 = 4.0;

/// J_l(x) for integer l ≥ 0 and x ≥ 0 (negative x handled by parity).
pub fn bessel_j(l: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(l, -x);
        return if l % 2 == 0 { v } else { -v };
    }
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_LIMIT {
        series(l, x)
    } else {
        miller(l, x)
    }
}

fn series(l: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=l {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + l as f64));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
        k += 1.0;
        if k > 500.0 {
            break;
        }
    }
    sum
}

/// Backward recurrence normalised by J_0 + 2 Σ J_2k = 1.
fn miller(l: u32, x: f64) -> f64 {
    let top = (l as f64).max(x);
    let mut start = (top + 30.0 + (40.0 * top).sqrt()) as usize;
    start += start % 2;
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds J_{k-1}.
        let idx = k - 1;
        if idx == l as usize {
            wanted = cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            wanted *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += cur;
    wanted / norm
}

/// Derivative J_l'(x) = (J_{l-1}(x) − J_{l+1}(x)) / 2, with J_0' = −J_1.
pub fn bessel_j_prime(l: u32, x: f64) -> f64 {
    if l == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(l - 1, x) - bessel_j(l + 1, x))
    }
}

/// First positive zeros of J_l' for one order.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselDerivativeZeros {
    pub order: u32,
    pub zeros: Vec<f64>,
}

/// The first `m_max` positive zeros of J_l', l ≥ 1.
pub fn bessel_jprime_zeros(l: u32, m_max: usize) -> BesselDerivativeZeros {
    assert!(l >= 1, "order 0 is excluded from the disc expansion");
    let mut zeros = Vec::with_capacity(m_max);
    let step = 0.05;
    // J_l' keeps its sign on (0, l], the first zero lies beyond l.
    let mut a = (l as f64).max(step);
    let mut fa = bessel_j_prime(l, a);
    while zeros.len() < m_max {
        let b = a + step;
        let fb = bessel_j_prime(l, b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            zeros.push(bisect(|x| bessel_j_prime(l, x), a, b, fa, 1e-13));
        }
        a = b;
        fa = fb;
    }
    BesselDerivativeZeros { order: l, zeros }
}

pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if b - a <= tol * a.abs().max(1.0) {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Product quadrature on the unit disc in polar coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscQuadrature {
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DiscQuadrature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn xy(&self, k: usize) -> (f64, f64) {
        (self.r[k] * self.theta[k].cos(), self.r[k] * self.theta[k].sin())
    }

    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        (0..self.len())
            .map(|k| self.weights[k] * f(self.r[k], self.theta[k]))
            .sum()
    }
}

/// Gauss-Legendre in r (Jacobian folded into the weights) times the
/// trapezoid rule in θ.
pub fn disc_quadrature(n_r: usize, n_theta: usize) -> DiscQuadrature {
    assert!(n_r >= 1 && n_theta >= 1);
    let radial = gauss_legendre_on(n_r, 0.0, 1.0);
    let dtheta = 2.0 * PI / n_theta as f64;
    let mut q = DiscQuadrature {
        r: Vec::with_capacity(n_r * n_theta),
        theta: Vec::with_capacity(n_r * n_theta),
        weights: Vec::with_capacity(n_r * n_theta),
    };
    for (&r, &w) in radial.nodes.iter().zip(&radial.weights) {
        for t in 0..n_theta {
            q.r.push(r);
            q.theta.push(t as f64 * dtheta);
            q.weights.push(w * r * dtheta);
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(3, 0.0), 0.0);
    }

    #[test]
    fn series_and_recurrence_agree_at_the_switch() {
        for l in 0..30 {
            let x = SERIES_LIMIT;
            let a = series(l, x);
            let b = miller(l, x);
            assert!((a - b).abs() < 1e-14, "l={l}: {a} vs {b}");
        }
    }

    #[test]
    fn first_derivative_zero() {
        let z = bessel_jprime_zeros(1, 3);
        assert!((z.zeros[0] - 1.841_183_781).abs() < 1e-8);
        assert!((z.zeros[1] - 5.331_442_774).abs() < 1e-8);
    }

    #[test]
    fn disc_area() {
        let q = disc_quadrature(4, 43);
        assert_eq!(q.len(), 172);
        assert!((q.weights.iter().sum::<f64>() - PI).abs() < 1e-12);
    }
}
