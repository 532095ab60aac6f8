//! TSVD cutoff from the point where data components overtake singular values.

const FLOOR: f64 = 1e-300;

fn median5(v: &[f64], k: usize) -> f64 {
    let lo = k.saturating_sub(2);
    let hi = (k + 3).min(v.len());
    let mut w = v[lo..hi].to_vec();
    w.sort_by(f64::total_cmp);
    w[w.len() / 2]
}

/// σ_J² at the first index J where the median-smoothed log |component|
/// exceeds log σ_J; σ_last² when the curves never cross.
pub fn cutoff_from_crossing(singular_values: &[f64], components: &[f64]) -> f64 {
    let n = singular_values.len().min(components.len());
    if n == 0 {
        return 0.0;
    }
    let log_c: Vec<f64> = components[..n].iter().map(|c| c.abs().max(FLOOR).ln()).collect();
    for j in 0..n {
        let s = singular_values[j];
        if median5(&log_c, j) > s.max(FLOOR).ln() {
            return s * s;
        }
    }
    singular_values[n - 1].powi(2)
}

/// Index of the crossing, if any.
pub fn crossing_index(singular_values: &[f64], components: &[f64]) -> Option<usize> {
    let n = singular_values.len().min(components.len());
    let log_c: Vec<f64> = components[..n].iter().map(|c| c.abs().max(FLOOR).ln()).collect();
    (0..n).find(|&j| median5(&log_c, j) > singular_values[j].max(FLOOR).ln())
}
