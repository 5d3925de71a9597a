use nalgebra::{DMatrix, DVector};

/// A controlled Itô system `dx = f(x, u) dt + Σ_γ g_γ(x, u) dB_γ`.
///
/// Implementations must be pure: the same `(x, u)` always yields the same
/// drift and diffusion.
pub trait SdeSystem {
    /// State dimension `n`.
    fn state_dim(&self) -> usize;
    /// Control dimension `d`.
    fn control_dim(&self) -> usize;
    /// Number of driving Brownian motions `r`.
    fn noise_dim(&self) -> usize;

    /// Drift `f(x, u)`, length `n`.
    fn drift(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64>;

    /// Diffusion as an `n × r` matrix whose columns are the `g_γ(x, u)`.
    fn diffusion(&self, x: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64>;

    /// Analytic drift Jacobian `∂f/∂x`, when available.
    fn drift_jacobian(&self, _x: &DVector<f64>, _u: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }
}

type DriftFn = dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync;
type DiffusionFn = dyn Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// An [`SdeSystem`] built from closures.
pub struct FnSystem {
    n: usize,
    d: usize,
    r: usize,
    drift: Box<DriftFn>,
    diffusion: Box<DiffusionFn>,
}

impl FnSystem {
    pub fn new(
        n: usize,
        d: usize,
        r: usize,
        drift: impl Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        diffusion: impl Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            n,
            d,
            r,
            drift: Box::new(drift),
            diffusion: Box::new(diffusion),
        }
    }

    /// `dx = A x dt + Σ dB` with constant noise matrix `sigma` (`n × r`).
    pub fn linear(a: DMatrix<f64>, sigma: DMatrix<f64>) -> Self {
        let n = a.nrows();
        let r = sigma.ncols();
        Self::new(
            n,
            0,
            r,
            move |x, _| &a * x,
            move |_, _| sigma.clone(),
        )
    }
}

impl SdeSystem for FnSystem {
    fn state_dim(&self) -> usize {
        self.n
    }
    fn control_dim(&self) -> usize {
        self.d
    }
    fn noise_dim(&self) -> usize {
        self.r
    }
    fn drift(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        (self.drift)(x, u)
    }
    fn diffusion(&self, x: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
        (self.diffusion)(x, u)
    }
}
