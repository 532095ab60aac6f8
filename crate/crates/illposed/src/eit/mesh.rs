//! Structured triangulation of the unit disc by concentric rings.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const MIN_AREA: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscMesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Boundary loop, counterclockwise from θ = 0.
    pub boundary_nodes: Vec<usize>,
}

/// Twice the signed area of a triangle.
pub(crate) fn signed_area2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

impl DiscMesh {
    /// Ring k sits at radius k/n and carries 6k equally spaced nodes, so the
    /// mesh has 1 + 3n(n+1) nodes, 6n² triangles and 6n boundary nodes.
    pub fn rings(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Mesh("need at least one ring".into()));
        }
        let mut nodes = vec![[0.0, 0.0]];
        let mut start = vec![0usize];
        for k in 1..=n {
            start.push(nodes.len());
            let r = k as f64 / n as f64;
            let count = 6 * k;
            for j in 0..count {
                let t = 2.0 * PI * j as f64 / count as f64;
                nodes.push([r * t.cos(), r * t.sin()]);
            }
        }
        let mut triangles = Vec::with_capacity(6 * n * n);
        for k in 1..=n {
            let q = 6 * k;
            let outer = |j: usize| start[k] + j % q;
            if k == 1 {
                for j in 0..q {
                    triangles.push([0, outer(j), outer(j + 1)]);
                }
                continue;
            }
            let p = 6 * (k - 1);
            let inner = |i: usize| start[k - 1] + i % p;
            // Zip the two loops together, always advancing along whichever
            // loop has the nearer next node in angle.
            let (mut i, mut j) = (0, 0);
            while i < p || j < q {
                let next_in = (i + 1) as f64 / p as f64;
                let next_out = (j + 1) as f64 / q as f64;
                if i == p || (j < q && next_out <= next_in) {
                    triangles.push([inner(i), outer(j), outer(j + 1)]);
                    j += 1;
                } else {
                    triangles.push([inner(i), outer(j), inner(i + 1)]);
                    i += 1;
                }
            }
        }
        let boundary_nodes = (start[n]..nodes.len()).collect();
        let mut mesh = DiscMesh { nodes, triangles, boundary_nodes };
        mesh.orient();
        mesh.validate()?;
        Ok(mesh)
    }

    /// Mesh with roughly `target` triangles.
    pub fn with_triangles(target: usize) -> Result<Self> {
        let n = ((target as f64 / 6.0).sqrt().round() as usize).max(1);
        Self::rings(n)
    }

    pub fn new(nodes: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, boundary_nodes: Vec<usize>) -> Result<Self> {
        let mesh = DiscMesh { nodes, triangles, boundary_nodes };
        mesh.validate()?;
        Ok(mesh)
    }

    fn orient(&mut self) {
        for t in &mut self.triangles {
            if signed_area2(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]) < 0.0 {
                t.swap(1, 2);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        for (k, p) in self.nodes.iter().enumerate() {
            if !(p[0].hypot(p[1]) <= 1.0 + 1e-12) {
                return Err(Error::Mesh(format!("node {k} lies outside the unit disc")));
            }
        }
        for (k, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= n) {
                return Err(Error::Mesh(format!("triangle {k} references a missing node")));
            }
            let a = 0.5 * signed_area2(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
            if a.abs() < MIN_AREA {
                return Err(Error::Mesh(format!("triangle {k} is degenerate (area {a:e})")));
            }
            if a < 0.0 {
                return Err(Error::Mesh(format!("triangle {k} is negatively oriented")));
            }
        }
        if self.boundary_nodes.len() < 3 {
            return Err(Error::Mesh("boundary needs at least three nodes".into()));
        }
        let angles = self.boundary_angles();
        let mut turn = 0.0;
        for k in 0..angles.len() {
            let next = angles[(k + 1) % angles.len()];
            let mut d = next - angles[k];
            while d <= -PI {
                d += 2.0 * PI;
            }
            while d > PI {
                d -= 2.0 * PI;
            }
            if d <= 0.0 {
                return Err(Error::Mesh("boundary nodes are not ordered by angle".into()));
            }
            turn += d;
        }
        if (turn - 2.0 * PI).abs() > 1e-9 {
            return Err(Error::Mesh("boundary nodes do not form a single loop".into()));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Angles of the boundary nodes in [0, 2π).
    pub fn boundary_angles(&self) -> Vec<f64> {
        self.boundary_nodes
            .iter()
            .map(|&k| {
                let a = self.nodes[k][1].atan2(self.nodes[k][0]);
                if a < 0.0 { a + 2.0 * PI } else { a }
            })
            .collect()
    }

    /// Longest edge length.
    pub fn max_edge(&self) -> f64 {
        let d = |a: usize, b: usize| {
            let (p, q) = (self.nodes[a], self.nodes[b]);
            (p[0] - q[0]).hypot(p[1] - q[1])
        };
        self.triangles
            .iter()
            .map(|t| d(t[0], t[1]).max(d(t[1], t[2])).max(d(t[2], t[0])))
            .fold(0.0, f64::max)
    }

    /// Linear interpolation of the boundary trace of a nodal field at angle θ.
    pub fn boundary_value(&self, field: &[f64], theta: f64) -> f64 {
        let angles = self.boundary_angles();
        let nb = angles.len();
        let t = theta.rem_euclid(2.0 * PI);
        // Boundary angles increase from (near) zero, wrapping once.
        let mut k = angles.partition_point(|&a| a <= t);
        if k == 0 {
            k = nb;
        }
        let (i0, i1) = (k - 1, k % nb);
        let a0 = angles[i0];
        let mut a1 = angles[i1];
        if a1 <= a0 {
            a1 += 2.0 * PI;
        }
        let mut tt = t;
        if tt < a0 {
            tt += 2.0 * PI;
        }
        let s = ((tt - a0) / (a1 - a0)).clamp(0.0, 1.0);
        let (v0, v1) = (field[self.boundary_nodes[i0]], field[self.boundary_nodes[i1]]);
        v0 + s * (v1 - v0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_ring_formula() {
        for n in [1, 2, 5, 32] {
            let m = DiscMesh::rings(n).unwrap();
            assert_eq!(m.triangles.len(), 6 * n * n);
            assert_eq!(m.nodes.len(), 1 + 3 * n * (n + 1));
            assert_eq!(m.boundary_nodes.len(), 6 * n);
        }
    }

    #[test]
    fn total_area_approaches_pi() {
        let m = DiscMesh::rings(40).unwrap();
        let area: f64 = m
            .triangles
            .iter()
            .map(|t| 0.5 * signed_area2(m.nodes[t[0]], m.nodes[t[1]], m.nodes[t[2]]))
            .sum();
        // Inscribed 240-gon.
        let exact = 0.5 * 240.0 * (2.0 * PI / 240.0).sin();
        assert!((area - exact).abs() < 1e-10);
    }

    #[test]
    fn rejects_degenerate_triangle() {
        let nodes = vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let err = DiscMesh::new(nodes, vec![[0, 1, 2]], vec![1, 2, 3]).unwrap_err();
        assert!(matches!(err, Error::Mesh(_)));
    }

    #[test]
    fn boundary_interpolation_is_exact_at_nodes() {
        let m = DiscMesh::rings(4).unwrap();
        let f: Vec<f64> = m.nodes.iter().map(|p| p[0] + 2.0 * p[1]).collect();
        for (&k, a) in m.boundary_nodes.iter().zip(m.boundary_angles()) {
            assert!((m.boundary_value(&f, a) - f[k]).abs() < 1e-14);
        }
    }
}
