//! Koopman and Carleman liftings of polynomial Itô systems.
//!
//! Observables are pushed through the Itô generator, their Lie derivatives
//! are expanded on the dictionary span, and the expansion coefficients become
//! the rows of the lifted bilinear model.

mod bilinear;
mod carleman;
mod dictionary;
mod generators;
pub mod lie;
mod monomial;
mod polynomial_system;
mod residual;

pub use bilinear::LiftedBilinearSystem;
pub use carleman::{
    carleman_dimension, carleman_embed, carleman_embed_with, CarlemanEmbedding, DEFAULT_STATE_CAP,
};
pub use dictionary::{LogAffineObservable, MonomialObservable, Observable, ObservableDictionary};
pub use generators::{
    build_koopman_generators, DroppedTerm, GeneratorBuild, TermSource, TruncationPolicy,
    TruncationReport,
};
pub use lie::{lie_diffusion_correction, lie_drift, lie_noise};
pub use monomial::{monomials_up_to, Monomial, MonomialOrdering, Polynomial};
pub use polynomial_system::PolynomialSystem;
pub use residual::{truncation_residual, ResidualChannel};

/// `x ↦ φ(x)` for a dictionary; see [`ObservableDictionary::lift`].
pub fn lift_state(
    dict: &ObservableDictionary,
    x: &nalgebra::DVector<f64>,
) -> crate::error::Result<nalgebra::DVector<f64>> {
    dict.lift(x)
}
