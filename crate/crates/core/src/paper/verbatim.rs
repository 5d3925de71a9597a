use nalgebra::DVector;

use super::{paper_lifted_system, NoiseCoupling, PaperMode, PaperParameters};
use crate::error::{invalid, Result};
use crate::filtering::{generalized_riccati_rate, FilterDiagnostics, FilterState};

/// The six mean equations of the example's Koopman filter, written
/// out component by component, with the covariance advanced by the
/// generalized Riccati equation on the shared-noise verbatim matrices.
pub fn paper_verbatim_filter_step(
    params: &PaperParameters,
    fs: &FilterState,
    dy: &DVector<f64>,
    dt: f64,
    diag: &mut FilterDiagnostics,
) -> Result<FilterState> {
    if fs.dim() != 6 || dy.len() != 1 {
        return Err(invalid("the example filter has 6 states and one measurement"));
    }
    if !(dt > 0.0) {
        return Err(invalid(format!("dt must be positive, got {dt}")));
    }
    let lifted = paper_lifted_system(params, PaperMode::Verbatim, NoiseCoupling::Shared)?;
    let PaperParameters { a, b, r1, x01, x02, .. } = *params;
    let z = &fs.mean;
    let p = &fs.cov;

    let innovation = dy[0] - (z[1] - z[5]) * dt;
    let gain = |i: usize| (p[(i, 1)] - p[(i, 5)]) / (r1 * r1);

    let drift = [
        8.0 * a * a / x01.powi(3) * z[1] - 4.0 * b * b / x02.powi(3) * z[2]
            - 3.0 * a * a / x01.powi(4) * z[3]
            + 3.0 * b * b / (2.0 * x02.powi(4)) * z[4],
        -z[1] + z[5],
        -2.0 * z[2] - 2.0 * z[5],
        -2.0 * z[3],
        -4.0 * z[4],
        -3.0 * z[5],
    ];
    let mean = DVector::from_fn(6, |i, _| z[i] + drift[i] * dt + gain(i) * innovation);
    let cov = p + generalized_riccati_rate(&lifted, fs)? * dt;
    crate::filtering::finish_step(mean, cov, diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dvector, DMatrix};

    #[test]
    fn zero_covariance_is_pure_drift() {
        let params = PaperParameters::default();
        let z = dvector![0.3, 0.1, 0.2, 0.01, 0.04, 0.02];
        let fs = FilterState::new(z.clone(), DMatrix::zeros(6, 6));
        let mut diag = FilterDiagnostics::default();
        let next = paper_verbatim_filter_step(&params, &fs, &dvector![7.0], 1e-3, &mut diag).unwrap();
        assert!((next.mean[1] - (0.1 + (-0.1 + 0.02) * 1e-3)).abs() < 1e-15);
        assert!((next.mean[4] - (0.04 - 4.0 * 0.04 * 1e-3)).abs() < 1e-15);
    }

    #[test]
    fn zero_state_zero_observation() {
        let params = PaperParameters::default();
        let fs = FilterState::with_isotropic_cov(DVector::zeros(6), 1.0);
        let mut diag = FilterDiagnostics::default();
        let next = paper_verbatim_filter_step(&params, &fs, &dvector![0.0], 1e-3, &mut diag).unwrap();
        assert_eq!(next.mean[1], 0.0);
        assert_eq!(next.mean, DVector::zeros(6));
        assert!(next.cov[(0, 0)] > 1.0);
    }
}
