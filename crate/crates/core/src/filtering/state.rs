use nalgebra::{DMatrix, DVector};

/// Eigenvalues below this are clipped by [`symmetrize_and_project`].
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Conditional mean and covariance of the lifted state.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl FilterState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        Self { mean, cov }
    }

    /// Mean `mean` with covariance `scale · I`.
    pub fn with_isotropic_cov(mean: DVector<f64>, scale: f64) -> Self {
        let m = mean.len();
        Self {
            mean,
            cov: DMatrix::identity(m, m) * scale,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.mean.iter().chain(self.cov.iter()).all(|v| v.is_finite())
    }
}

/// Counters carried across filter steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FilterDiagnostics {
    pub steps: usize,
    /// Steps where the covariance had to be projected back onto the PSD cone.
    pub projections: usize,
}

/// `(P + Pᵀ)/2`, with negative eigenvalues clipped to zero when the smallest
/// one is below `-PSD_TOLERANCE`. The flag reports whether clipping happened.
pub fn symmetrize_and_project(p: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let sym = (p + p.transpose()) * 0.5;
    let m = sym.nrows();
    if m == 0 || sym.iter().any(|v| !v.is_finite()) {
        return (sym, false);
    }
    // Cholesky of P + tol·I succeeds exactly when P is PSD up to the tolerance.
    let shifted = &sym + DMatrix::identity(m, m) * PSD_TOLERANCE;
    if shifted.cholesky().is_some() {
        return (sym, false);
    }
    let eig = sym.clone().symmetric_eigen();
    if eig.eigenvalues.min() >= -PSD_TOLERANCE {
        return (sym, false);
    }
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let v = &eig.eigenvectors;
    let rebuilt = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    ((&rebuilt + rebuilt.transpose()) * 0.5, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn psd_input_unchanged() {
        let p = dmatrix![2.0, 0.3; 0.3, 1.0];
        let (q, clipped) = symmetrize_and_project(&p);
        assert!(!clipped);
        assert_eq!(q, p);
    }

    #[test]
    fn negative_eigenvalue_clipped() {
        let p = dmatrix![1.0, 0.0; 0.0, -1e-6];
        let (q, clipped) = symmetrize_and_project(&p);
        assert!(clipped);
        assert!((q - dmatrix![1.0, 0.0; 0.0, 0.0]).amax() < 1e-15);
    }

    #[test]
    fn tiny_negative_tolerated() {
        let p = dmatrix![1.0, 0.0; 0.0, -1e-12];
        let (_, clipped) = symmetrize_and_project(&p);
        assert!(!clipped);
    }

    #[test]
    fn asymmetric_psd_input_is_averaged() {
        let a = dmatrix![2.0, 0.5; 0.1, 1.0];
        let (q, clipped) = symmetrize_and_project(&a);
        assert!(!clipped);
        assert_eq!(q, (&a + a.transpose()) * 0.5);
    }
}
