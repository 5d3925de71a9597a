use crate::error::{invalid, Result};
use crate::sde::Trajectory;

/// Root-mean-square difference between `truth[truth_cols[k]]` and
/// `estimate[est_cols[k]]` over the shared time grid, one value per pair.
pub fn compute_rmse(
    truth: &Trajectory,
    estimate: &Trajectory,
    truth_cols: &[usize],
    est_cols: &[usize],
) -> Result<Vec<f64>> {
    if truth_cols.len() != est_cols.len() {
        return Err(invalid(format!(
            "{} truth columns paired with {} estimate columns",
            truth_cols.len(),
            est_cols.len()
        )));
    }
    if truth.len() != estimate.len() {
        return Err(invalid(format!(
            "trajectories have {} and {} samples",
            truth.len(),
            estimate.len()
        )));
    }
    if truth.is_empty() {
        return Err(invalid("empty trajectories"));
    }
    for (a, b) in truth.times.iter().zip(&estimate.times) {
        if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
            return Err(invalid(format!("time grids differ at t = {a} vs {b}")));
        }
    }
    if let Some(&c) = truth_cols.iter().find(|&&c| c >= truth.dim()) {
        return Err(invalid(format!("truth column {c} out of range")));
    }
    if let Some(&c) = est_cols.iter().find(|&&c| c >= estimate.dim()) {
        return Err(invalid(format!("estimate column {c} out of range")));
    }
    let n = truth.len() as f64;
    Ok(truth_cols
        .iter()
        .zip(est_cols)
        .map(|(&i, &j)| {
            let sum: f64 = truth
                .states
                .iter()
                .zip(&estimate.states)
                .map(|(x, z)| (x[i] - z[j]).powi(2))
                .sum();
            (sum / n).sqrt()
        })
        .collect())
}

/// Mean over time of the across-run sample variance of a set of traces on
/// a common grid: how far individual paths wander from their mean path.
/// NaN with fewer than two traces.
pub fn trace_fluctuation(traces: &[Vec<f64>]) -> f64 {
    let runs = traces.len();
    if runs < 2 {
        return f64::NAN;
    }
    let len = traces.iter().map(Vec::len).min().unwrap_or(0);
    if len == 0 {
        return f64::NAN;
    }
    let mut total = 0.0;
    for k in 0..len {
        let mean = traces.iter().map(|t| t[k]).sum::<f64>() / runs as f64;
        let var = traces.iter().map(|t| (t[k] - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        total += var;
    }
    total / len as f64
}

/// Sample mean and standard deviation (`n − 1`); zero spread for one value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn path(values: &[(f64, f64)]) -> Trajectory {
        let mut t = Trajectory::with_initial(dvector![values[0].0, values[0].1], values.len());
        for (k, &(a, b)) in values.iter().enumerate().skip(1) {
            t.push(k as f64 * 0.1, dvector![a, b]);
        }
        t
    }

    #[test]
    fn identical_is_zero_and_offset_is_offset() {
        let a = path(&[(1.0, 2.0), (1.5, -1.0), (0.2, 0.0)]);
        assert_eq!(compute_rmse(&a, &a, &[0, 1], &[0, 1]).unwrap(), vec![0.0, 0.0]);
        let b = path(&[(1.25, 2.0), (1.75, -1.0), (0.45, 0.0)]);
        let r = compute_rmse(&a, &b, &[0], &[0]).unwrap();
        assert!((r[0] - 0.25).abs() < 1e-15);
        let swapped = compute_rmse(&b, &a, &[0], &[0]).unwrap();
        assert_eq!(r, swapped);
        let cross = compute_rmse(&a, &b, &[1], &[1]).unwrap();
        assert_eq!(cross, vec![0.0]);
    }

    #[test]
    fn mismatched_inputs_fail() {
        let a = path(&[(1.0, 2.0), (1.5, -1.0)]);
        let b = path(&[(1.0, 2.0)]);
        assert!(compute_rmse(&a, &b, &[0], &[0]).is_err());
        assert!(compute_rmse(&a, &a, &[0, 1], &[0]).is_err());
        assert!(compute_rmse(&a, &a, &[2], &[0]).is_err());
    }

    #[test]
    fn fluctuation_and_spread() {
        assert!(trace_fluctuation(&[vec![1.0, 2.0]]).is_nan());
        let f = trace_fluctuation(&[vec![1.0, 1.0], vec![3.0, 1.0]]);
        assert!((f - 1.0).abs() < 1e-15);
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
    }
}
