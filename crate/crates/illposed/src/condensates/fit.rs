//! Grid scans of χ²_L over one or two condensates, with Δχ² regions.

use super::problem::CondensateProblem;
use super::qcd::Condensates;
use crate::stats::delta_chi2;
use crate::{par, Error, Result};
use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Confidence levels reported by default (percent).
pub const DEFAULT_CLS: [f64; 3] = [68.27, 95.45, 99.73];

/// One scanned condensate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub dim: u32,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(|k| self.lo + step * k as f64).collect()
    }

    fn step(&self) -> f64 {
        if self.points > 1 {
            (self.hi - self.lo) / (self.points - 1) as f64
        } else {
            0.0
        }
    }
}

/// How μ is chosen while scanning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuMode {
    /// Calibrate μ at every grid point.
    #[default]
    Nested,
    /// Calibrate once, scan at that μ, and recalibrate at the minimum until
    /// it stops moving.
    Fixed,
}

const FIXED_MU_ROUNDS: usize = 10;
const MAX_WIDENINGS: usize = 20;

/// Scan specification: one or two axes plus fixed values of the other
/// condensates of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub fixed: Condensates,
    #[serde(default = "default_cls")]
    pub cls: Vec<f64>,
    #[serde(default)]
    pub mu_mode: MuMode,
}

fn default_cls() -> Vec<f64> {
    DEFAULT_CLS.to_vec()
}

impl ParameterGrid {
    pub fn one(axis: Axis) -> Self {
        Self { axes: vec![axis], fixed: Condensates::new(), cls: default_cls(), mu_mode: MuMode::Nested }
    }

    pub fn two(a: Axis, b: Axis) -> Self {
        Self { axes: vec![a, b], fixed: Condensates::new(), cls: default_cls(), mu_mode: MuMode::Nested }
    }

    pub fn with_mu_mode(mut self, mode: MuMode) -> Self {
        self.mu_mode = mode;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.axes.len()) {
            return Err(Error::Parameter(format!("{} free parameters; 1 or 2 supported", self.axes.len())));
        }
        for a in &self.axes {
            if a.points < 3 || !(a.hi > a.lo) {
                return Err(Error::Parameter(format!("axis for O_{} needs lo < hi and at least 3 points", a.dim)));
            }
            if self.fixed.contains_key(&a.dim) {
                return Err(Error::Parameter(format!("O_{} is both scanned and fixed", a.dim)));
            }
        }
        if self.axes.len() == 2 && self.axes[0].dim == self.axes[1].dim {
            return Err(Error::Parameter("the two axes scan the same condensate".into()));
        }
        if self.cls.iter().any(|&c| !(c > 0.0 && c < 100.0)) {
            return Err(Error::Parameter("confidence levels must lie in (0, 100)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub params: [f64; 2],
    pub chi_l: f64,
    pub mu: f64,
    pub active: bool,
}

/// Δχ² interval of a one-parameter scan. `closed` is false when the
/// region reaches the grid edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub cl: f64,
    pub threshold: f64,
    pub lo: f64,
    pub hi: f64,
    pub closed: bool,
}

/// Level set of a two-parameter scan as polylines in (O_a, O_b).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub cl: f64,
    pub threshold: f64,
    pub polylines: Vec<Vec<[f64; 2]>>,
    /// Grid points inside the region.
    pub inside: usize,
    /// Connected groups of inside points (4-neighbour).
    pub components: usize,
}

/// Best-determined linear combination O_b = slope·O_a + intercept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationLine {
    pub slope: f64,
    pub intercept: f64,
    pub intercept_error: f64,
    /// √(h_max/h_min) of the fitted quadratic: ratio of principal widths.
    pub width_ratio: f64,
    pub centre: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensateFit {
    pub dims: Vec<u32>,
    pub best: Condensates,
    pub chi_l_min: f64,
    pub mu_opt: f64,
    pub axes: Vec<Axis>,
    /// Row-major over (axis 0, axis 1).
    pub surface: Vec<SurfacePoint>,
    pub intervals: Vec<Interval>,
    pub contours: Vec<Contour>,
    pub correlation: Option<CorrelationLine>,
    pub on_boundary: bool,
}

impl CondensateFit {
    pub fn interval(&self, cl: f64) -> Option<&Interval> {
        self.intervals.iter().find(|i| (i.cl - cl).abs() < 1e-9)
    }

    pub fn contour(&self, cl: f64) -> Option<&Contour> {
        self.contours.iter().find(|c| (c.cl - cl).abs() < 1e-9)
    }

    /// Area of the sub-threshold region, counted in grid cells.
    pub fn region_area(&self, threshold: f64) -> f64 {
        let cell: f64 = self.axes.iter().map(|a| a.step()).product();
        let limit = self.chi_l_min + threshold;
        self.surface.iter().filter(|p| p.chi_l <= limit).count() as f64 * cell
    }
}

/// Scan χ²_L over the grid, with μ chosen according to `grid.mu_mode`.
pub fn fit_condensates(problem: &CondensateProblem, grid: &ParameterGrid) -> Result<CondensateFit> {
    grid.validate()?;
    for a in &grid.axes {
        if !problem.model.dims.contains(&a.dim) {
            return Err(Error::Parameter(format!("O_{} is not part of the model", a.dim)));
        }
    }
    let xs = grid.axes[0].values();
    let ys = grid.axes.get(1).map_or(vec![0.0], |a| a.values());
    let (nx, ny) = (xs.len(), ys.len());
    let condensates_at = |i: usize, j: usize| {
        let mut o = grid.fixed.clone();
        o.insert(grid.axes[0].dim, xs[i]);
        if let Some(b) = grid.axes.get(1) {
            o.insert(b.dim, ys[j]);
        }
        o
    };
    let scan = |fixed_mu: Option<(f64, bool)>| -> Result<Vec<SurfacePoint>> {
        let points: Vec<Result<SurfacePoint>> = par::map_range(nx * ny, |k| {
            let (i, j) = (k / ny, k % ny);
            let o = condensates_at(i, j);
            let (mu, chi_l, active) = match fixed_mu {
                Some((mu, active)) => (mu, problem.chi_at(mu, &o)?.1, active),
                None => {
                    let cal = problem.calibrate(&o)?;
                    (cal.mu, cal.chi_l, cal.active)
                }
            };
            Ok(SurfacePoint { params: [xs[i], ys[j]], chi_l, mu, active })
        });
        points.into_iter().collect()
    };
    let argmin = |surface: &[SurfacePoint]| {
        (0..surface.len())
            .min_by(|&a, &b| surface[a].chi_l.total_cmp(&surface[b].chi_l))
            .expect("nonempty grid")
    };
    let (surface, kmin) = match grid.mu_mode {
        MuMode::Nested => {
            let surface = scan(None)?;
            let k = argmin(&surface);
            (surface, k)
        }
        MuMode::Fixed => {
            let mut k = (nx / 2) * ny + ny / 2;
            let mut round = 0;
            loop {
                let cal = problem.calibrate(&condensates_at(k / ny, k % ny))?;
                let surface = scan(Some((cal.mu, cal.active)))?;
                let next = argmin(&surface);
                round += 1;
                if next == k || round == FIXED_MU_ROUNDS {
                    if next != k {
                        log::warn!("fixed-μ scan did not settle after {round} recalibrations");
                    }
                    break (surface, next);
                }
                k = next;
            }
        }
    };
    let (imin, jmin) = (kmin / ny, kmin % ny);
    let on_boundary = imin == 0 || imin == nx - 1 || (grid.axes.len() == 2 && (jmin == 0 || jmin == ny - 1));
    if on_boundary {
        log::warn!(
            "χ²_L minimum sits on the grid boundary at {:?}; widen the scan",
            surface[kmin].params
        );
    }
    let chi_l_min = surface[kmin].chi_l;
    let m = grid.axes.len() as u32;
    let mut fit = CondensateFit {
        dims: grid.axes.iter().map(|a| a.dim).collect(),
        best: condensates_at(imin, jmin),
        chi_l_min,
        mu_opt: surface[kmin].mu,
        axes: grid.axes.clone(),
        surface,
        intervals: Vec::new(),
        contours: Vec::new(),
        correlation: None,
        on_boundary,
    };
    let values: Vec<f64> = fit.surface.iter().map(|p| p.chi_l).collect();
    for &cl in &grid.cls {
        let threshold = delta_chi2(cl, m)?;
        let level = chi_l_min + threshold;
        if m == 1 {
            fit.intervals.push(interval(&xs, &values, imin, cl, threshold, level));
        } else {
            let (inside, components) = region_components(&values, nx, ny, level);
            fit.contours.push(Contour {
                cl,
                threshold,
                polylines: marching_squares(&xs, &ys, &values, level),
                inside,
                components,
            });
        }
    }
    if m == 2 {
        let threshold = delta_chi2(68.27, 2)?;
        fit.correlation = correlation_line(&fit, threshold);
        if fit.correlation.is_none() {
            log::warn!("χ²_L surface near the minimum is not a positive-definite quadratic");
        }
    }
    Ok(fit)
}

fn interval(xs: &[f64], v: &[f64], imin: usize, cl: f64, threshold: f64, level: f64) -> Interval {
    let cross = |a: usize, b: usize| {
        let t = (level - v[a]) / (v[b] - v[a]);
        xs[a] + t * (xs[b] - xs[a])
    };
    let mut closed = true;
    let mut lo = xs[0];
    match (0..imin).rev().find(|&k| v[k] > level) {
        Some(k) => lo = cross(k + 1, k),
        None => closed = false,
    }
    let mut hi = xs[xs.len() - 1];
    match (imin + 1..xs.len()).find(|&k| v[k] > level) {
        Some(k) => hi = cross(k - 1, k),
        None => closed = false,
    }
    Interval { cl, threshold, lo, hi, closed }
}

fn region_components(v: &[f64], nx: usize, ny: usize, level: f64) -> (usize, usize) {
    let inside: Vec<bool> = v.iter().map(|&x| x <= level).collect();
    let mut seen = vec![false; v.len()];
    let mut groups = 0;
    for start in 0..v.len() {
        if !inside[start] || seen[start] {
            continue;
        }
        groups += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(k) = stack.pop() {
            let (i, j) = (k / ny, k % ny);
            let mut push = |ii: usize, jj: usize| {
                let q = ii * ny + jj;
                if inside[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < nx {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < ny {
                push(i, j + 1);
            }
        }
    }
    (inside.iter().filter(|&&b| b).count(), groups)
}

/// Level-set segments per cell, joined into polylines.
fn marching_squares(xs: &[f64], ys: &[f64], v: &[f64], level: f64) -> Vec<Vec<[f64; 2]>> {
    let ny = ys.len();
    let at = |i: usize, j: usize| v[i * ny + j];
    let lerp = |p: [f64; 2], q: [f64; 2], a: f64, b: f64| {
        let t = (level - a) / (b - a);
        [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
    };
    let mut segments: Vec<[[f64; 2]; 2]> = Vec::new();
    for i in 0..xs.len() - 1 {
        for j in 0..ny - 1 {
            let corners = [[xs[i], ys[j]], [xs[i + 1], ys[j]], [xs[i + 1], ys[j + 1]], [xs[i], ys[j + 1]]];
            let vals = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let mut pts = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, b) = (vals[e], vals[(e + 1) % 4]);
                if (a <= level) != (b <= level) {
                    pts.push(lerp(corners[e], corners[(e + 1) % 4], a, b));
                }
            }
            // Saddle cells give four crossings; pair them in edge order.
            for pair in pts.chunks_exact(2) {
                segments.push([pair[0], pair[1]]);
            }
        }
    }
    join_segments(segments)
}

fn join_segments(mut segments: Vec<[[f64; 2]; 2]>) -> Vec<Vec<[f64; 2]>> {
    let close = |a: [f64; 2], b: [f64; 2]| {
        let scale = a[0].abs().max(a[1].abs()).max(b[0].abs()).max(b[1].abs()).max(1e-300);
        (a[0] - b[0]).abs() <= 1e-12 * scale && (a[1] - b[1]).abs() <= 1e-12 * scale
    };
    let mut lines = Vec::new();
    while let Some(seg) = segments.pop() {
        let mut line = vec![seg[0], seg[1]];
        loop {
            let tail = *line.last().unwrap();
            let head = line[0];
            let mut grew = false;
            let mut k = 0;
            while k < segments.len() {
                let s = segments[k];
                if close(s[0], tail) {
                    line.push(s[1]);
                } else if close(s[1], tail) {
                    line.push(s[0]);
                } else if close(s[1], head) {
                    line.insert(0, s[0]);
                } else if close(s[0], head) {
                    line.insert(0, s[1]);
                } else {
                    k += 1;
                    continue;
                }
                segments.swap_remove(k);
                grew = true;
                break;
            }
            if !grew {
                break;
            }
        }
        lines.push(line);
    }
    lines
}

/// Quadratic least squares on the points inside min + threshold, then the
/// long principal axis of the fitted ellipse.
fn correlation_line(fit: &CondensateFit, threshold: f64) -> Option<CorrelationLine> {
    let best = fit.surface.iter().min_by(|a, b| a.chi_l.total_cmp(&b.chi_l))?;
    let (x0, y0) = (best.params[0], best.params[1]);
    let (sx, sy) = (fit.axes[0].step(), fit.axes[1].step());
    // Thin valleys may hold only a cell or two below the threshold; widen
    // the selection until the six coefficients are overdetermined.
    let mut limit = threshold;
    let mut pts: Vec<&SurfacePoint> = Vec::new();
    for _ in 0..MAX_WIDENINGS {
        pts = fit.surface.iter().filter(|p| p.chi_l <= fit.chi_l_min + limit).collect();
        if pts.len() >= 12 {
            break;
        }
        limit *= 2.0;
    }
    if pts.len() < 6 {
        return None;
    }
    // Scaled coordinates keep the normal equations well conditioned.
    let d = DMatrix::from_fn(pts.len(), 6, |r, c| {
        let u = (pts[r].params[0] - x0) / sx;
        let v = (pts[r].params[1] - y0) / sy;
        [1.0, u, v, u * u, u * v, v * v][c]
    });
    let rhs = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.chi_l));
    let coef = d.svd(true, true).solve(&rhs, 1e-14).ok()?;
    // Back to physical units.
    let h = Matrix2::new(
        coef[3] / (sx * sx),
        0.5 * coef[4] / (sx * sy),
        0.5 * coef[4] / (sx * sy),
        coef[5] / (sy * sy),
    );
    let g = nalgebra::Vector2::new(coef[1] / sx, coef[2] / sy);
    let eig = SymmetricEigen::new(h);
    let (imin, imax) = if eig.eigenvalues[0] <= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let (emin, emax) = (eig.eigenvalues[imin], eig.eigenvalues[imax]);
    if !(emin > 0.0) {
        return None;
    }
    let long = eig.eigenvectors.column(imin);
    if long[0].abs() < 1e-300 {
        return None;
    }
    let slope = long[1] / long[0];
    let hinv = h.try_inverse()?;
    let shift = -0.5 * hinv * g;
    let centre = [x0 + shift[0], y0 + shift[1]];
    let intercept = centre[1] - slope * centre[0];
    // Δχ² = 1 ellipse: covariance = H⁻¹ for χ² ≈ χ²_min + δᵀHδ.
    let grad = nalgebra::Vector2::new(-slope, 1.0);
    let var = (grad.transpose() * hinv * grad)[(0, 0)];
    Some(CorrelationLine {
        slope,
        intercept,
        intercept_error: var.max(0.0).sqrt(),
        width_ratio: (emax / emin).sqrt(),
        centre,
    })
}
