//! Second-order continuous-time nonlinear filter for a generic model
//! `dz = a(z) dt + b(z) dB`, `dy = h(z) dt + r1 dη`.

use nalgebra::{DMatrix, DVector};

use super::kernel::{check_step, finish};
use super::{FilterDiagnostics, FilterState};
use crate::error::{invalid, Result};
use crate::lifting::LiftedBilinearSystem;

/// Model callbacks for [`second_order_filter_step`].
///
/// Jacobians are indexed `[(i, p)] = ∂(·)_i/∂z_p`; Hessians are `m × m`.
pub trait GenericFilterModel {
    fn state_dim(&self) -> usize;
    fn measurement_dim(&self) -> usize;
    fn r1(&self) -> f64;

    fn drift(&self, z: &DVector<f64>) -> DVector<f64>;
    fn drift_jacobian(&self, z: &DVector<f64>) -> DMatrix<f64>;
    fn drift_hessian(&self, z: &DVector<f64>, i: usize) -> DMatrix<f64>;

    /// `(b bᵀ)(z)`.
    fn diffusion_product(&self, z: &DVector<f64>) -> DMatrix<f64>;
    /// Hessian of the entry `(b bᵀ)_{ij}`.
    fn diffusion_product_hessian(&self, z: &DVector<f64>, i: usize, j: usize) -> DMatrix<f64>;

    fn measurement(&self, z: &DVector<f64>) -> DVector<f64>;
    fn measurement_jacobian(&self, z: &DVector<f64>) -> DMatrix<f64>;
    fn measurement_hessian(&self, z: &DVector<f64>, k: usize) -> DMatrix<f64>;
}

/// One Euler step of the second-order filter.
///
/// ```text
/// ν   = dy − h(ẑ) dt − ½ Σ_pq P_pq ∂²h/∂z_p∂z_q dt
/// dẑ  = (a(ẑ) + ½ Σ_pq P_pq ∂²a/∂z_p∂z_q) dt + P Hᵀ r1⁻² ν
/// dP_ij = (Σ_p P_ip ∂a_j/∂z_p + Σ_p P_jp ∂a_i/∂z_p + (bbᵀ)_ij
///          + ½ Σ_pq P_pq ∂²(bbᵀ)_ij/∂z_p∂z_q − (P Hᵀ)_i r1⁻² (H P)_j) dt
///        + Σ_k Σ_pq P_ip P_jq ∂²h_k/∂z_p∂z_q r1⁻² ν_k
/// ```
pub fn second_order_filter_step<M: GenericFilterModel + ?Sized>(
    model: &M,
    fs: &FilterState,
    dy: &DVector<f64>,
    dt: f64,
    diag: &mut FilterDiagnostics,
) -> Result<FilterState> {
    let m = model.state_dim();
    let n_obs = model.measurement_dim();
    if fs.mean.len() != m || fs.cov.shape() != (m, m) {
        return Err(invalid(format!(
            "filter state has dimension {}, model has {m}",
            fs.mean.len()
        )));
    }
    if !(model.r1() > 0.0) {
        return Err(invalid(format!("r1 must be positive, got {}", model.r1())));
    }
    check_step(dt, dy.len(), n_obs)?;
    let z = &fs.mean;
    let p = &fs.cov;
    let r2 = model.r1() * model.r1();

    let weighted = |h: &DMatrix<f64>| 0.5 * h.component_mul(p).sum();

    let a = model.drift(z);
    let a_jac = model.drift_jacobian(z);
    let a_corr = DVector::from_fn(m, |i, _| weighted(&model.drift_hessian(z, i)));

    let h = model.measurement(z);
    let h_jac = model.measurement_jacobian(z);
    let h_hess: Vec<DMatrix<f64>> = (0..n_obs).map(|k| model.measurement_hessian(z, k)).collect();
    let innovation = DVector::from_fn(n_obs, |k, _| dy[k] - h[k] * dt - weighted(&h_hess[k]) * dt);

    let pht = p * h_jac.transpose();
    let mean = z + (&a + &a_corr) * dt + &pht * &innovation / r2;

    let bbt = model.diffusion_product(z);
    let mut rate = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut v = 0.0;
            for q in 0..m {
                v += p[(i, q)] * a_jac[(j, q)] + p[(j, q)] * a_jac[(i, q)];
            }
            v += bbt[(i, j)] + weighted(&model.diffusion_product_hessian(z, i, j));
            for k in 0..n_obs {
                v -= pht[(i, k)] * pht[(j, k)] / r2;
            }
            rate[(i, j)] = v;
        }
    }
    let mut cov = p + rate * dt;
    for (k, hk) in h_hess.iter().enumerate() {
        cov += p * hk * p * (innovation[k] / r2);
    }
    finish(mean, cov, diag)
}

/// A bilinear lift seen as a generic model: `a(z) = Λz + G`,
/// `b(z) = [D_γ z + F_γ]_γ`, `h(z) = Cz`.
#[derive(Debug, Clone)]
pub struct BilinearModel {
    lifted: LiftedBilinearSystem,
    drift_matrix: DMatrix<f64>,
}

pub fn wrap_bilinear_as_generic(lifted: &LiftedBilinearSystem) -> BilinearModel {
    BilinearModel {
        drift_matrix: lifted.drift_matrix(),
        lifted: lifted.clone(),
    }
}

impl GenericFilterModel for BilinearModel {
    fn state_dim(&self) -> usize {
        self.lifted.dim()
    }
    fn measurement_dim(&self) -> usize {
        self.lifted.measurement_dim()
    }
    fn r1(&self) -> f64 {
        self.lifted.r1
    }
    fn drift(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.drift_matrix * z + &self.lifted.g
    }
    fn drift_jacobian(&self, _z: &DVector<f64>) -> DMatrix<f64> {
        self.drift_matrix.clone()
    }
    fn drift_hessian(&self, _z: &DVector<f64>, _i: usize) -> DMatrix<f64> {
        let m = self.state_dim();
        DMatrix::zeros(m, m)
    }
    fn diffusion_product(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let b = self.lifted.diffusion_at(z);
        &b * b.transpose()
    }
    fn diffusion_product_hessian(&self, _z: &DVector<f64>, i: usize, j: usize) -> DMatrix<f64> {
        let m = self.state_dim();
        let mut h = DMatrix::zeros(m, m);
        for d in &self.lifted.d {
            for p in 0..m {
                for q in 0..m {
                    h[(p, q)] += d[(i, p)] * d[(j, q)] + d[(i, q)] * d[(j, p)];
                }
            }
        }
        h
    }
    fn measurement(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.lifted.c * z
    }
    fn measurement_jacobian(&self, _z: &DVector<f64>) -> DMatrix<f64> {
        self.lifted.c.clone()
    }
    fn measurement_hessian(&self, _z: &DVector<f64>, _k: usize) -> DMatrix<f64> {
        let m = self.state_dim();
        DMatrix::zeros(m, m)
    }
}

/// Worst relative error between a model's analytic derivatives and central
/// differences of its values at the given points.
pub fn model_derivative_self_test<M: GenericFilterModel + ?Sized>(
    model: &M,
    points: &[DVector<f64>],
) -> f64 {
    let m = model.state_dim();
    let mut worst: f64 = 0.0;
    let mut track = |analytic: f64, numeric: f64| {
        let e = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0);
        worst = worst.max(e);
    };
    for z in points {
        let a_jac = model.drift_jacobian(z);
        let h_jac = model.measurement_jacobian(z);
        for p in 0..m {
            let step = 1e-5 * z[p].abs().max(1.0);
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[p] += step;
            zm[p] -= step;
            let da = (model.drift(&zp) - model.drift(&zm)) / (2.0 * step);
            let dh = (model.measurement(&zp) - model.measurement(&zm)) / (2.0 * step);
            let da_jac = (model.drift_jacobian(&zp) - model.drift_jacobian(&zm)) / (2.0 * step);
            let dh_jac = (model.measurement_jacobian(&zp) - model.measurement_jacobian(&zm)) / (2.0 * step);
            for i in 0..m {
                track(a_jac[(i, p)], da[i]);
                let hess = model.drift_hessian(z, i);
                for q in 0..m {
                    track(hess[(q, p)], da_jac[(i, q)]);
                }
            }
            for k in 0..model.measurement_dim() {
                track(h_jac[(k, p)], dh[k]);
                let hess = model.measurement_hessian(z, k);
                for q in 0..m {
                    track(hess[(q, p)], dh_jac[(k, q)]);
                }
            }
            // second differences of bbᵀ along the (p, p) diagonal and mixed (p, q)
            let bb0 = model.diffusion_product(z);
            for q in 0..m {
                let sq = 1e-4 * z[q].abs().max(1.0);
                let shift = |dp: f64, dq: f64| {
                    let mut w = z.clone();
                    w[p] += dp * step;
                    w[q] += dq * sq;
                    model.diffusion_product(&w)
                };
                let mixed = if p == q {
                    let s = step;
                    let mut wp = z.clone();
                    let mut wm = z.clone();
                    wp[p] += s;
                    wm[p] -= s;
                    (model.diffusion_product(&wp) - &bb0 * 2.0 + model.diffusion_product(&wm)) / (s * s)
                } else {
                    (shift(1.0, 1.0) - shift(1.0, -1.0) - shift(-1.0, 1.0) + shift(-1.0, -1.0))
                        / (4.0 * step * sq)
                };
                for i in 0..m {
                    for j in 0..m {
                        track(model.diffusion_product_hessian(z, i, j)[(p, q)], mixed[(i, j)]);
                    }
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn zero_model_leaves_state() {
        let model = wrap_bilinear_as_generic(&LiftedBilinearSystem::zeros(2, 1, 1, 0.5));
        let fs = FilterState::new(dvector![0.3, -0.1], dmatrix![1.0, 0.2; 0.2, 2.0]);
        let mut diag = FilterDiagnostics::default();
        let next = second_order_filter_step(&model, &fs, &dvector![0.0], 1e-3, &mut diag).unwrap();
        assert_eq!(next, fs);
    }

    #[test]
    fn scalar_diffusion_product() {
        let (d, f) = (0.7, -0.2);
        let mut s = LiftedBilinearSystem::zeros(1, 1, 1, 1.0);
        s.d[0] = dmatrix![d];
        s.f[0] = dvector![f];
        let model = wrap_bilinear_as_generic(&s);
        let z = dvector![1.3];
        assert!((model.diffusion_product(&z)[(0, 0)] - (d * 1.3 + f).powi(2)).abs() < 1e-15);
        assert!((model.diffusion_product_hessian(&z, 0, 0)[(0, 0)] - 2.0 * d * d).abs() < 1e-15);
    }

    #[test]
    fn bilinear_model_derivatives_consistent() {
        let mut s = LiftedBilinearSystem::zeros(3, 2, 1, 0.5);
        s.lambda_f = dmatrix![-1.0, 0.2, 0.0; 0.3, -0.5, 0.1; 0.0, 0.0, -2.0];
        s.d[0] = dmatrix![0.1, 0.0, 0.4; 0.0, 0.3, 0.0; 0.2, 0.0, 0.0];
        s.d[1] = dmatrix![0.0, 0.5, 0.0; 0.1, 0.0, 0.0; 0.0, 0.0, 0.6];
        s.f[0] = dvector![0.5, 0.0, 0.1];
        s.c = dmatrix![0.0, 1.0, -1.0];
        let model = wrap_bilinear_as_generic(&s);
        let worst = model_derivative_self_test(&model, &[dvector![0.3, -0.7, 1.1]]);
        assert!(worst < 1e-4, "worst {worst}");
    }

    /// `h(z) = z²`, `a = 0`, `b = 0`: only the gain, the Hessian-corrected
    /// innovation and the innovation-driven covariance term act.
    struct Quadratic {
        r1: f64,
    }

    impl GenericFilterModel for Quadratic {
        fn state_dim(&self) -> usize { 1 }
        fn measurement_dim(&self) -> usize { 1 }
        fn r1(&self) -> f64 { self.r1 }
        fn drift(&self, _z: &DVector<f64>) -> DVector<f64> { dvector![0.0] }
        fn drift_jacobian(&self, _z: &DVector<f64>) -> DMatrix<f64> { dmatrix![0.0] }
        fn drift_hessian(&self, _z: &DVector<f64>, _i: usize) -> DMatrix<f64> { dmatrix![0.0] }
        fn diffusion_product(&self, _z: &DVector<f64>) -> DMatrix<f64> { dmatrix![0.0] }
        fn diffusion_product_hessian(&self, _z: &DVector<f64>, _i: usize, _j: usize) -> DMatrix<f64> { dmatrix![0.0] }
        fn measurement(&self, z: &DVector<f64>) -> DVector<f64> { dvector![z[0] * z[0]] }
        fn measurement_jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> { dmatrix![2.0 * z[0]] }
        fn measurement_hessian(&self, _z: &DVector<f64>, _k: usize) -> DMatrix<f64> { dmatrix![2.0] }
    }

    #[test]
    fn quadratic_measurement_by_hand() {
        let (mu, p, r1, dt, dy) = (0.8, 0.3, 0.5, 1e-2, 0.02);
        let model = Quadratic { r1 };
        let r2 = r1 * r1;
        let nu = dy - mu * mu * dt - p * dt;
        let mean = mu + p * 2.0 * mu / r2 * nu;
        let cov = p + (-(p * 2.0 * mu).powi(2) / r2) * dt + p * p * 2.0 / r2 * nu;
        let mut diag = FilterDiagnostics::default();
        let next = second_order_filter_step(
            &model,
            &FilterState::new(dvector![mu], dmatrix![p]),
            &dvector![dy],
            dt,
            &mut diag,
        )
        .unwrap();
        assert!((next.mean[0] - mean).abs() < 1e-15);
        assert!((next.cov[(0, 0)] - cov).abs() < 1e-15);
        assert!(model_derivative_self_test(&model, &[dvector![0.4]]) < 1e-6);
    }
}
