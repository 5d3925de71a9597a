use nalgebra::{DMatrix, DVector};

use super::Polynomial;
use crate::error::{invalid, Result};
use crate::sde::SdeSystem;

/// A controlled Itô system whose drift, diffusion columns and measurement are
/// polynomials in `(x, u)`.
///
/// Polynomials range over `n + d` variables: `x_1..x_n` followed by the
/// controls `u_1..u_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSystem {
    n: usize,
    d: usize,
    drift: Vec<Polynomial>,
    diffusion: Vec<Vec<Polynomial>>,
    measurement: Vec<Polynomial>,
    r1: f64,
}

impl PolynomialSystem {
    /// `drift` has `n` entries, `diffusion` holds `r` columns of `n` entries,
    /// `measurement` holds the `p` channels of `h(x)` (may be empty).
    pub fn new(
        n: usize,
        d: usize,
        drift: Vec<Polynomial>,
        diffusion: Vec<Vec<Polynomial>>,
        measurement: Vec<Polynomial>,
    ) -> Result<Self> {
        let nv = n + d;
        if drift.len() != n {
            return Err(invalid(format!("drift has {} entries, expected {n}", drift.len())));
        }
        for (g, col) in diffusion.iter().enumerate() {
            if col.len() != n {
                return Err(invalid(format!(
                    "diffusion column {} has {} entries, expected {n}",
                    g + 1,
                    col.len()
                )));
            }
        }
        let all = drift
            .iter()
            .chain(diffusion.iter().flatten())
            .chain(measurement.iter());
        for p in all {
            if p.nvars() != nv {
                return Err(invalid(format!(
                    "polynomial over {} variables, expected {nv}",
                    p.nvars()
                )));
            }
            if p.terms().any(|(_, c)| !c.is_finite()) {
                return Err(invalid("polynomial coefficients must be finite"));
            }
        }
        Ok(Self {
            n,
            d,
            drift,
            diffusion,
            measurement,
            r1: 1.0,
        })
    }

    /// Sets the measurement noise scale `r1` in `dy = h(x) dt + r1 dη`.
    pub fn with_measurement_noise(mut self, r1: f64) -> Result<Self> {
        if !(r1 > 0.0) || !r1.is_finite() {
            return Err(invalid(format!("r1 must be positive, got {r1}")));
        }
        self.r1 = r1;
        Ok(self)
    }

    pub fn measurement_noise(&self) -> f64 {
        self.r1
    }

    /// `dx = A x dt + Σ dB` with `h(x) = C x`.
    pub fn linear(a: &DMatrix<f64>, sigma: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        let row = |m: &DMatrix<f64>, i: usize| {
            let mut p = Polynomial::zero(n);
            for j in 0..n {
                p = &p + &Polynomial::var(n, j).scale(m[(i, j)]);
            }
            p
        };
        let drift = (0..n).map(|i| row(a, i)).collect();
        let diffusion = (0..sigma.ncols())
            .map(|g| (0..n).map(|i| Polynomial::constant(n, sigma[(i, g)])).collect())
            .collect();
        let measurement = (0..c.nrows()).map(|i| row(c, i)).collect();
        Self::new(n, 0, drift, diffusion, measurement)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.diffusion.len()
    }

    pub fn p(&self) -> usize {
        self.measurement.len()
    }

    pub fn drift_polys(&self) -> &[Polynomial] {
        &self.drift
    }

    pub fn diffusion_polys(&self) -> &[Vec<Polynomial>] {
        &self.diffusion
    }

    pub fn measurement_polys(&self) -> &[Polynomial] {
        &self.measurement
    }

    /// Freezes the control at `u`, returning an autonomous system in `x`.
    pub fn at_control(&self, u: &DVector<f64>) -> Result<PolynomialSystem> {
        if u.len() != self.d {
            return Err(invalid(format!(
                "control has length {}, system expects {}",
                u.len(),
                self.d
            )));
        }
        if self.d == 0 {
            return Ok(self.clone());
        }
        let fix = |p: &Polynomial| p.fix_trailing(u.as_slice());
        Ok(Self {
            n: self.n,
            d: 0,
            drift: self.drift.iter().map(fix).collect(),
            diffusion: self
                .diffusion
                .iter()
                .map(|col| col.iter().map(fix).collect())
                .collect(),
            measurement: self.measurement.iter().map(fix).collect(),
            r1: self.r1,
        })
    }

    /// Evaluates `h(x)`; measurement polynomials must not depend on `u`.
    pub fn measure(&self, x: &DVector<f64>) -> DVector<f64> {
        let args = self.args(x, &DVector::zeros(self.d));
        DVector::from_iterator(self.p(), self.measurement.iter().map(|h| h.eval(&args)))
    }

    fn args(&self, x: &DVector<f64>, u: &DVector<f64>) -> Vec<f64> {
        x.iter().chain(u.iter()).copied().collect()
    }
}

impl SdeSystem for PolynomialSystem {
    fn state_dim(&self) -> usize {
        self.n
    }
    fn control_dim(&self) -> usize {
        self.d
    }
    fn noise_dim(&self) -> usize {
        self.diffusion.len()
    }
    fn drift(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let args = self.args(x, u);
        DVector::from_iterator(self.n, self.drift.iter().map(|f| f.eval(&args)))
    }
    fn diffusion(&self, x: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
        let args = self.args(x, u);
        DMatrix::from_fn(self.n, self.r(), |i, g| self.diffusion[g][i].eval(&args))
    }
    fn drift_jacobian(&self, x: &DVector<f64>, u: &DVector<f64>) -> Option<DMatrix<f64>> {
        let args = self.args(x, u);
        Some(DMatrix::from_fn(self.n, self.n, |i, j| {
            self.drift[i].derivative(j).eval(&args)
        }))
    }
}
