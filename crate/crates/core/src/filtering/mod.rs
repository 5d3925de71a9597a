//! Continuous-time filters on bilinear lifts.
//!
//! The Koopman and Carleman filters share one generalized Riccati kernel;
//! [`second_order_filter_step`] is the generic second-order filter the kernel
//! is checked against through [`wrap_bilinear_as_generic`].

mod generic;
mod kernel;
mod state;
mod trace;

pub use generic::{
    model_derivative_self_test, second_order_filter_step, wrap_bilinear_as_generic,
    BilinearModel, GenericFilterModel,
};
pub use kernel::{
    carleman_filter_step, expected_bbt, generalized_riccati_rate, koopman_filter_step,
};
pub use state::{symmetrize_and_project, FilterDiagnostics, FilterState, PSD_TOLERANCE};
pub use trace::{run_filter, FilterTrace};
pub(crate) use kernel::finish as finish_step;
