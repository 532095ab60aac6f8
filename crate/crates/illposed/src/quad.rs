//! One-dimensional quadrature rules.

use std::f64::consts::PI;

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Rule {
    let base = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Rule {
        nodes: base.nodes.iter().map(|x| mid + half * x).collect(),
        weights: base.weights.iter().map(|w| half * w).collect(),
    }
}

/// Composite Gauss-Legendre: `panels` equal panels of `order` nodes each.
pub fn composite_gauss_legendre(order: usize, panels: usize, a: f64, b: f64) -> Rule {
    assert!(panels >= 1);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(order * panels);
    let mut weights = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let r = gauss_legendre_on(order, lo, lo + h);
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Rule { nodes, weights }
}

/// Trapezoid weights on an arbitrary increasing grid.
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    for i in 0..n - 1 {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// Adaptive Simpson integration, used for tail integrals and checks.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}
