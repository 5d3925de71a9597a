//! Pointwise Lie operators of the Itô generator acting on one observable.

use nalgebra::{DVector};

use super::{Observable, ObservableDictionary};
use crate::error::{invalid, Result};
use crate::sde::SdeSystem;

/// `L^f φ = ⟨∇φ, f(x, u)⟩`.
pub fn lie_drift<S: SdeSystem + ?Sized>(
    phi: &dyn Observable,
    system: &S,
    x: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<f64> {
    let grad = phi.gradient(x)?;
    Ok(grad.dot(&system.drift(x, u)))
}

/// `L^b φ = ½ tr(∇²φ · Σ_γ g_γ g_γᵀ)`.
pub fn lie_diffusion_correction<S: SdeSystem + ?Sized>(
    phi: &dyn Observable,
    system: &S,
    x: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<f64> {
    let hess = phi.hessian(x)?;
    let g = system.diffusion(x, u);
    let ggt = &g * g.transpose();
    Ok(0.5 * hess.component_mul(&ggt).sum())
}

/// `L^{g_γ} φ = ⟨∇φ, g_γ(x, u)⟩`, `gamma` 0-based.
pub fn lie_noise<S: SdeSystem + ?Sized>(
    phi: &dyn Observable,
    system: &S,
    x: &DVector<f64>,
    u: &DVector<f64>,
    gamma: usize,
) -> Result<f64> {
    if gamma >= system.noise_dim() {
        return Err(invalid(format!(
            "noise index {gamma} out of range for {} channels",
            system.noise_dim()
        )));
    }
    let grad = phi.gradient(x)?;
    Ok(grad.dot(&system.diffusion(x, u).column(gamma)))
}

/// `(L^f + L^b) φ_j(x)` for every dictionary entry.
pub fn generator_drift_vector<S: SdeSystem + ?Sized>(
    dict: &ObservableDictionary,
    system: &S,
    x: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(dict.len());
    for (j, phi) in dict.observables().iter().enumerate() {
        out[j] = lie_drift(phi.as_ref(), system, x, u)?
            + lie_diffusion_correction(phi.as_ref(), system, x, u)?;
    }
    Ok(out)
}

/// `L^{g_γ} φ_j(x)` for every dictionary entry.
pub fn generator_noise_vector<S: SdeSystem + ?Sized>(
    dict: &ObservableDictionary,
    system: &S,
    x: &DVector<f64>,
    u: &DVector<f64>,
    gamma: usize,
) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(dict.len());
    for (j, phi) in dict.observables().iter().enumerate() {
        out[j] = lie_noise(phi.as_ref(), system, x, u, gamma)?;
    }
    Ok(out)
}
