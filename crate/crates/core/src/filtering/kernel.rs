//! Generalized Riccati filter on a bilinear lift.

use nalgebra::{DMatrix, DVector};

use super::{symmetrize_and_project, FilterDiagnostics, FilterState};
use crate::error::{invalid, Error, Result};
use crate::lifting::LiftedBilinearSystem;

/// Conditional second moment of the diffusion, using `E[zzᵀ] = P + ẑẑᵀ`:
///
/// `Σ_γ D P Dᵀ + D ẑẑᵀ Dᵀ + D ẑ Fᵀ + F ẑᵀ Dᵀ + F Fᵀ`.
pub fn expected_bbt(lifted: &LiftedBilinearSystem, fs: &FilterState) -> Result<DMatrix<f64>> {
    let m = lifted.dim();
    check_state(lifted, fs)?;
    let mut out = DMatrix::zeros(m, m);
    for (d, f) in lifted.d.iter().zip(&lifted.f) {
        let dz = d * &fs.mean;
        out += d * &fs.cov * d.transpose();
        out += &dz * dz.transpose();
        out += &dz * f.transpose();
        out += f * dz.transpose();
        out += f * f.transpose();
    }
    Ok(out)
}

/// One Euler step of the Koopman filter:
///
/// ```text
/// dẑ = (Λ ẑ + G) dt + P Cᵀ r1⁻² (dy − C ẑ dt)
/// dP = (P Λᵀ + Λ P + E[b bᵀ] − P Cᵀ r1⁻² C P) dt
/// ```
///
/// with `Λ = Λ_f + Λ_b`; the covariance is then symmetrized and projected.
pub fn koopman_filter_step(
    lifted: &LiftedBilinearSystem,
    fs: &FilterState,
    dy: &DVector<f64>,
    dt: f64,
    diag: &mut FilterDiagnostics,
) -> Result<FilterState> {
    bilinear_filter_step(lifted, fs, dy, dt, diag)
}

/// Carleman filter step. The Carleman lift has the same bilinear structure, so
/// this runs the same kernel as [`koopman_filter_step`]; all four cross terms
/// of the diffusion moment are kept.
pub fn carleman_filter_step(
    lifted: &LiftedBilinearSystem,
    fs: &FilterState,
    dy: &DVector<f64>,
    dt: f64,
    diag: &mut FilterDiagnostics,
) -> Result<FilterState> {
    bilinear_filter_step(lifted, fs, dy, dt, diag)
}

/// Right-hand side of the generalized Riccati equation.
pub fn generalized_riccati_rate(
    lifted: &LiftedBilinearSystem,
    fs: &FilterState,
) -> Result<DMatrix<f64>> {
    let a = lifted.drift_matrix();
    let p = &fs.cov;
    let pct = p * lifted.c.transpose();
    let r2 = lifted.r1 * lifted.r1;
    Ok(p * a.transpose() + &a * p + expected_bbt(lifted, fs)? - &pct * pct.transpose() / r2)
}

fn bilinear_filter_step(
    lifted: &LiftedBilinearSystem,
    fs: &FilterState,
    dy: &DVector<f64>,
    dt: f64,
    diag: &mut FilterDiagnostics,
) -> Result<FilterState> {
    lifted.validate()?;
    check_state(lifted, fs)?;
    check_step(dt, dy.len(), lifted.measurement_dim())?;
    let r2 = lifted.r1 * lifted.r1;
    let innovation = dy - &lifted.c * &fs.mean * dt;
    let gain = &fs.cov * lifted.c.transpose() / r2;
    let mean = &fs.mean + (lifted.drift_matrix() * &fs.mean + &lifted.g) * dt + gain * innovation;
    let cov = &fs.cov + generalized_riccati_rate(lifted, fs)? * dt;
    finish(mean, cov, diag)
}

pub(crate) fn finish(
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    diag: &mut FilterDiagnostics,
) -> Result<FilterState> {
    let step = diag.steps;
    diag.steps += 1;
    let (cov, projected) = symmetrize_and_project(&cov);
    if projected {
        diag.projections += 1;
    }
    let next = FilterState { mean, cov };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFinite {
            step,
            context: "filter state".into(),
        })
    }
}

pub(crate) fn check_step(dt: f64, dy_len: usize, p: usize) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid(format!("dt must be positive, got {dt}")));
    }
    if dy_len != p {
        return Err(invalid(format!(
            "observation increment has length {dy_len}, model has {p} channels"
        )));
    }
    Ok(())
}

fn check_state(lifted: &LiftedBilinearSystem, fs: &FilterState) -> Result<()> {
    let m = lifted.dim();
    if fs.mean.len() != m || fs.cov.nrows() != m || fs.cov.ncols() != m {
        return Err(invalid(format!(
            "filter state has dimension {} (cov {}×{}), system has {m}",
            fs.mean.len(),
            fs.cov.nrows(),
            fs.cov.ncols()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn constant_diffusion_moment() {
        let mut s = LiftedBilinearSystem::zeros(2, 2, 0, 1.0);
        s.f[0] = dvector![1.0, 2.0];
        s.f[1] = dvector![0.0, -1.0];
        let fs = FilterState::new(dvector![3.0, -4.0], dmatrix![2.0, 0.1; 0.1, 5.0]);
        let e = expected_bbt(&s, &fs).unwrap();
        assert_eq!(e, dmatrix![1.0, 2.0; 2.0, 5.0]);
    }

    #[test]
    fn multiplicative_only_moment() {
        let mut s = LiftedBilinearSystem::zeros(2, 1, 0, 1.0);
        s.d[0] = dmatrix![0.0, 1.0; 2.0, 0.5];
        let p = dmatrix![2.0, 0.1; 0.1, 5.0];
        let fs = FilterState::new(dvector![0.0, 0.0], p.clone());
        let e = expected_bbt(&s, &fs).unwrap();
        assert!((e - &s.d[0] * &p * s.d[0].transpose()).amax() < 1e-15);
    }

    #[test]
    fn scalar_moment_expansion() {
        let (d, f, mu, p) = (0.7, -0.3, 1.5, 0.4);
        let mut s = LiftedBilinearSystem::zeros(1, 1, 0, 1.0);
        s.d[0] = dmatrix![d];
        s.f[0] = dvector![f];
        let e = expected_bbt(&s, &FilterState::new(dvector![mu], dmatrix![p])).unwrap();
        let expected = d * d * p + d * d * mu * mu + 2.0 * d * f * mu + f * f;
        assert!((e[(0, 0)] - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_system_leaves_state() {
        let s = LiftedBilinearSystem::zeros(3, 1, 1, 0.5);
        let fs = FilterState::new(dvector![1.0, 2.0, 3.0], DMatrix::identity(3, 3));
        let mut diag = FilterDiagnostics::default();
        let next = koopman_filter_step(&s, &fs, &dvector![0.0], 1e-3, &mut diag).unwrap();
        assert_eq!(next, fs);
        let next = carleman_filter_step(&s, &fs, &dvector![0.0], 1e-3, &mut diag).unwrap();
        assert_eq!(next, fs);
        assert_eq!(diag.steps, 2);
    }

    #[test]
    fn unobserved_mean_ignores_dy() {
        let mut s = LiftedBilinearSystem::zeros(2, 1, 1, 0.5);
        s.lambda_f = dmatrix![-1.0, 0.3; 0.0, -0.2];
        let fs = FilterState::new(dvector![1.0, 2.0], dmatrix![1.0, 0.2; 0.2, 1.0]);
        let mut diag = FilterDiagnostics::default();
        let a = koopman_filter_step(&s, &fs, &dvector![0.0], 1e-2, &mut diag).unwrap();
        let b = koopman_filter_step(&s, &fs, &dvector![5.0], 1e-2, &mut diag).unwrap();
        assert_eq!(a.mean, b.mean);
    }

    #[test]
    fn argument_errors() {
        let s = LiftedBilinearSystem::zeros(2, 1, 1, 0.5);
        let fs = FilterState::with_isotropic_cov(dvector![0.0, 0.0], 1.0);
        let mut diag = FilterDiagnostics::default();
        assert!(koopman_filter_step(&s, &fs, &dvector![0.0], 0.0, &mut diag).is_err());
        assert!(koopman_filter_step(&s, &fs, &dvector![0.0, 1.0], 1e-3, &mut diag).is_err());
        let mut bad = s.clone();
        bad.r1 = -1.0;
        assert!(koopman_filter_step(&bad, &fs, &dvector![0.0], 1e-3, &mut diag).is_err());
        let small = FilterState::with_isotropic_cov(dvector![0.0], 1.0);
        assert!(koopman_filter_step(&s, &small, &dvector![0.0], 1e-3, &mut diag).is_err());
    }

    #[test]
    fn non_finite_reports_step() {
        let mut s = LiftedBilinearSystem::zeros(1, 1, 1, 0.5);
        s.lambda_f = dmatrix![1e308];
        let fs = FilterState::with_isotropic_cov(dvector![1e10], 1.0);
        let mut diag = FilterDiagnostics { steps: 41, projections: 0 };
        let err = koopman_filter_step(&s, &fs, &dvector![0.0], 1.0, &mut diag).unwrap_err();
        assert!(matches!(err, Error::NonFinite { step: 41, .. }));
    }
}
