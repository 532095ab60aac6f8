//! Linear finite elements for ∇·(σ∇φ) = 0 with Neumann data.

use super::mesh::{signed_area2, DiscMesh};
use crate::{par, Error, Result};
use std::f64::consts::PI;

const CG_RTOL: f64 = 1e-12;
const RESIDUAL_LIMIT: f64 = 1e-10;
const COMPATIBILITY_TOL: f64 = 1e-10;

/// Strictly positive nodal conductivity.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductivityField {
    values: Vec<f64>,
}

impl ConductivityField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!(
                "conductivity must be positive, node {k} has {}",
                values[k]
            )));
        }
        Ok(Self { values })
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(mesh: &DiscMesh, f: F) -> Result<Self> {
        Self::new(mesh.nodes.iter().map(|p| f(p[0], p[1])).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Sum duplicate triplets into a CSR matrix.
    pub fn from_triplets(n: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trip {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(p) => self.values[self.row_ptr[i] + p],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[p] * x[self.col_idx[p]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.values[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect()
    }

    /// Largest |A_ij − A_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                worst = worst.max((self.values[p] - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= factor);
        m
    }
}

/// Element stiffness ∫ σ ∇φ_a·∇φ_b over one triangle with constant σ.
pub fn element_matrix(p: [[f64; 2]; 3], sigma: f64) -> Result<[[f64; 3]; 3]> {
    let a2 = signed_area2(p[0], p[1], p[2]);
    if a2.abs() < 2e-14 {
        return Err(Error::Mesh(format!("degenerate triangle (area {:e})", 0.5 * a2)));
    }
    // ∇φ_a = (y_b − y_c, x_c − x_b) / 2A with (a, b, c) cyclic.
    let mut g = [[0.0; 2]; 3];
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        g[a] = [(p[b][1] - p[c][1]) / a2, (p[c][0] - p[b][0]) / a2];
    }
    let area = 0.5 * a2.abs();
    let mut m = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            m[a][b] = sigma * area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
        }
    }
    Ok(m)
}

/// Assemble the stiffness matrix; σ on each triangle is the vertex average.
pub fn fem_assemble(mesh: &DiscMesh, sigma: &ConductivityField) -> Result<CsrMatrix> {
    if sigma.len() != mesh.node_count() {
        return Err(Error::Input(format!(
            "conductivity has {} values for {} nodes",
            sigma.len(),
            mesh.node_count()
        )));
    }
    let s = sigma.values();
    let blocks = par::map_slice(&mesh.triangles, |t| {
        let p = [mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]];
        let avg = (s[t[0]] + s[t[1]] + s[t[2]]) / 3.0;
        element_matrix(p, avg)
    });
    let mut trip = Vec::with_capacity(9 * mesh.triangles.len());
    for (t, block) in mesh.triangles.iter().zip(blocks) {
        let m = block?;
        for a in 0..3 {
            for b in 0..3 {
                trip.push((t[a], t[b], m[a][b]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.node_count(), trip))
}

/// Load vector ∮ I φ_k ds for a current density given at the boundary
/// nodes and taken linear in θ between them.
pub fn boundary_load(mesh: &DiscMesh, current: &[f64]) -> Result<Vec<f64>> {
    let nb = mesh.boundary_nodes.len();
    if current.len() != nb {
        return Err(Error::Input(format!(
            "current has {} samples for {nb} boundary nodes",
            current.len()
        )));
    }
    let angles = mesh.boundary_angles();
    let mut load = vec![0.0; mesh.node_count()];
    let mut scale = 0.0;
    for k in 0..nb {
        let k1 = (k + 1) % nb;
        let h = (angles[k1] - angles[k]).rem_euclid(2.0 * PI);
        let (i0, i1) = (current[k], current[k1]);
        load[mesh.boundary_nodes[k]] += h * (2.0 * i0 + i1) / 6.0;
        load[mesh.boundary_nodes[k1]] += h * (i0 + 2.0 * i1) / 6.0;
        scale += h * 0.5 * (i0.abs() + i1.abs());
    }
    let net: f64 = load.iter().sum();
    if net.abs() > COMPATIBILITY_TOL * scale.max(1.0) {
        return Err(Error::Compatibility { imbalance: net });
    }
    Ok(load)
}

/// Result of a forward solve.
#[derive(Debug, Clone)]
pub struct ForwardSolution {
    /// Nodal potential with zero mean over the boundary nodes.
    pub potential: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl ForwardSolution {
    pub fn boundary_trace(&self, mesh: &DiscMesh) -> Vec<f64> {
        mesh.boundary_nodes.iter().map(|&k| self.potential[k]).collect()
    }
}

/// Jacobi-preconditioned CG on the consistent singular system. The right
/// hand side is projected onto the range (orthogonal to constants) first.
pub fn pcg(a: &CsrMatrix, b: &[f64], rtol: f64, max_iter: usize) -> Result<(Vec<f64>, usize, f64)> {
    let n = a.n;
    let mean = b.iter().sum::<f64>() / n as f64;
    let b: Vec<f64> = b.iter().map(|v| v - mean).collect();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let dinv: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    for it in 1..=max_iter {
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Numerical(format!("CG breakdown at iteration {it}")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = dot(&r, &r).sqrt();
        if rn <= rtol * bnorm {
            return Ok((x, it, rn / bnorm));
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Numerical(format!("CG did not converge in {max_iter} iterations")))
}

fn solve_assembled(mesh: &DiscMesh, a: &CsrMatrix, current: &[f64]) -> Result<ForwardSolution> {
    let load = boundary_load(mesh, current)?;
    let (mut phi, iterations, _) = pcg(a, &load, CG_RTOL, 20 * a.n + 100)?;
    let gauge = mesh.boundary_nodes.iter().map(|&k| phi[k]).sum::<f64>() / mesh.boundary_nodes.len() as f64;
    phi.iter_mut().for_each(|v| *v -= gauge);
    // Residual of the gauge-fixed solution against the projected load.
    let mean = load.iter().sum::<f64>() / load.len() as f64;
    let mut ax = vec![0.0; a.n];
    a.mul_vec(&phi, &mut ax);
    let rn = ax
        .iter()
        .zip(&load)
        .map(|(u, b)| (u - (b - mean)).powi(2))
        .sum::<f64>()
        .sqrt();
    let bn = load.iter().map(|b| b * b).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let residual = rn / bn;
    if bn > f64::MIN_POSITIVE && residual > RESIDUAL_LIMIT {
        return Err(Error::Numerical(format!("forward residual {residual:e} too large")));
    }
    Ok(ForwardSolution { potential: phi, iterations, residual })
}

/// Solve for the potential driven by a boundary current density sampled at
/// the boundary nodes.
pub fn fem_forward_solve(mesh: &DiscMesh, sigma: &ConductivityField, current: &[f64]) -> Result<ForwardSolution> {
    let a = fem_assemble(mesh, sigma)?;
    solve_assembled(mesh, &a, current)
}

/// Several excitations with one assembly; excitations run in parallel.
pub fn fem_forward_many(
    mesh: &DiscMesh,
    sigma: &ConductivityField,
    currents: &[Vec<f64>],
) -> Result<Vec<ForwardSolution>> {
    let a = fem_assemble(mesh, sigma)?;
    par::map_slice(currents, |c| solve_assembled(mesh, &a, c))
        .into_iter()
        .collect()
}

/// ∫ σ|∇φ|² = φᵀAφ.
pub fn energy(a: &CsrMatrix, phi: &[f64]) -> f64 {
    let mut ax = vec![0.0; a.n];
    a.mul_vec(phi, &mut ax);
    phi.iter().zip(&ax).map(|(p, q)| p * q).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_triangle_element() {
        let m = element_matrix([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 1.0).unwrap();
        assert!((m[0][0] - 1.0).abs() < 1e-15);
        assert!((m[1][1] - 0.5).abs() < 1e-15);
        assert!((m[2][2] - 0.5).abs() < 1e-15);
        for row in m {
            assert!(row.iter().sum::<f64>().abs() < 1e-15);
        }
    }

    #[test]
    fn csr_merges_duplicates() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (0, 1, -1.0)]);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 0), 2.0);
        assert_eq!(a.get(1, 1), 0.0);
    }
}
