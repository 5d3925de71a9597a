use nalgebra::DVector;

use super::lie::{generator_drift_vector, generator_noise_vector};
use super::{build_koopman_generators, ObservableDictionary, PolynomialSystem, TruncationPolicy};
use crate::error::{invalid, Result};

/// Which generator's truncation error to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualChannel {
    /// `(L^f + L^b)φ − ((Λ_f + Λ_b)φ + G)`.
    Drift,
    /// `L^{g_γ}φ − (D_γ φ + F_γ)`, 0-based `γ`.
    Noise(usize),
}

/// Sample mean of `‖exact Lie derivative − dictionary-span reconstruction‖₂`.
///
/// The exact side is evaluated pointwise from the observables' analytic
/// gradients and Hessians; the reconstruction uses the matrices produced by
/// [`build_koopman_generators`] with the drop policy.
pub fn truncation_residual(
    dict: &ObservableDictionary,
    poly: &PolynomialSystem,
    u: &DVector<f64>,
    samples: &[DVector<f64>],
    channel: ResidualChannel,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("truncation residual needs at least one sample"));
    }
    if let ResidualChannel::Noise(g) = channel {
        if g >= poly.r() {
            return Err(invalid(format!("noise index {g} out of range for {} channels", poly.r())));
        }
    }
    let lifted = build_koopman_generators(dict, poly, u, TruncationPolicy::Drop)?.system;
    let drift_matrix = lifted.drift_matrix();
    let mut total = 0.0;
    for x in samples {
        let z = dict.lift(x)?;
        let residual = match channel {
            ResidualChannel::Drift => {
                generator_drift_vector(dict, poly, x, u)? - (&drift_matrix * &z + &lifted.g)
            }
            ResidualChannel::Noise(g) => {
                generator_noise_vector(dict, poly, x, u, g)? - (&lifted.d[g] * &z + &lifted.f[g])
            }
        };
        total += residual.norm();
    }
    Ok(total / samples.len() as f64)
}
