use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{Monomial, Polynomial};
use crate::error::{invalid, Error, Result};

/// A scalar observable `φ: R^n → R` with analytic gradient and Hessian.
///
/// The `*_unchecked` methods may assume `in_domain(x)`; callers go through the
/// checked `value`/`gradient`/`hessian` wrappers.
pub trait Observable: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn nvars(&self) -> usize;

    fn in_domain(&self, _x: &DVector<f64>) -> bool {
        true
    }

    fn value_unchecked(&self, x: &DVector<f64>) -> f64;
    fn gradient_unchecked(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian_unchecked(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// The monomial this observable is, if it is one.
    fn as_monomial(&self) -> Option<&Monomial> {
        None
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        self.check(x)?;
        Ok(self.value_unchecked(x))
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(x)?;
        Ok(self.gradient_unchecked(x))
    }

    fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check(x)?;
        Ok(self.hessian_unchecked(x))
    }

    fn check(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.nvars() {
            return Err(invalid(format!(
                "observable `{}` takes {} coordinates, got {}",
                self.name(),
                self.nvars(),
                x.len()
            )));
        }
        if !self.in_domain(x) {
            return Err(Error::Domain {
                observable: self.name(),
                point: format!("{:?}", x.as_slice()),
            });
        }
        Ok(())
    }
}

/// `x^α` as an observable.
#[derive(Debug, Clone)]
pub struct MonomialObservable {
    monomial: Monomial,
    poly: Polynomial,
    grad: Vec<Polynomial>,
    hess: Vec<Vec<Polynomial>>,
}

impl MonomialObservable {
    pub fn new(monomial: Monomial) -> Self {
        let n = monomial.nvars();
        let poly = Polynomial::term(monomial.clone(), 1.0);
        let grad: Vec<Polynomial> = (0..n).map(|i| poly.derivative(i)).collect();
        let hess = grad
            .iter()
            .map(|g| (0..n).map(|j| g.derivative(j)).collect())
            .collect();
        Self {
            monomial,
            poly,
            grad,
            hess,
        }
    }
}

impl Observable for MonomialObservable {
    fn name(&self) -> String {
        self.monomial.to_string()
    }
    fn nvars(&self) -> usize {
        self.monomial.nvars()
    }
    fn value_unchecked(&self, x: &DVector<f64>) -> f64 {
        self.poly.eval_vec(x)
    }
    fn gradient_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.grad.len(), self.grad.iter().map(|g| g.eval_vec(x)))
    }
    fn hessian_unchecked(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.nvars();
        DMatrix::from_fn(n, n, |i, j| self.hess[i][j].eval_vec(x))
    }
    fn as_monomial(&self) -> Option<&Monomial> {
        Some(&self.monomial)
    }
}

/// `Σ_i c_i x_i + Σ_i k_i ln x_i`, defined where every `x_i` with `k_i ≠ 0`
/// is positive (real principal logarithm).
#[derive(Debug, Clone)]
pub struct LogAffineObservable {
    name: String,
    linear: Vec<f64>,
    log: Vec<f64>,
}

impl LogAffineObservable {
    pub fn new(name: impl Into<String>, linear: Vec<f64>, log: Vec<f64>) -> Result<Self> {
        if linear.len() != log.len() {
            return Err(invalid("linear and log coefficient lists differ in length"));
        }
        Ok(Self {
            name: name.into(),
            linear,
            log,
        })
    }
}

impl Observable for LogAffineObservable {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn nvars(&self) -> usize {
        self.linear.len()
    }
    fn in_domain(&self, x: &DVector<f64>) -> bool {
        self.log.iter().zip(x.iter()).all(|(&k, &xi)| k == 0.0 || xi > 0.0)
    }
    fn value_unchecked(&self, x: &DVector<f64>) -> f64 {
        self.linear
            .iter()
            .zip(&self.log)
            .zip(x.iter())
            .map(|((&c, &k), &xi)| c * xi + if k == 0.0 { 0.0 } else { k * xi.ln() })
            .sum()
    }
    fn gradient_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.nvars(), |i, _| {
            self.linear[i] + if self.log[i] == 0.0 { 0.0 } else { self.log[i] / x[i] }
        })
    }
    fn hessian_unchecked(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.nvars(), self.nvars(), |i, j| {
            if i == j && self.log[i] != 0.0 {
                -self.log[i] / (x[i] * x[i])
            } else {
                0.0
            }
        })
    }
}

/// Ordered observables `φ_1..φ_m` and the lift `x ↦ (φ_1(x), …, φ_m(x))`.
#[derive(Debug, Clone)]
pub struct ObservableDictionary {
    nvars: usize,
    observables: Vec<Arc<dyn Observable>>,
}

impl ObservableDictionary {
    pub fn new(observables: Vec<Arc<dyn Observable>>) -> Result<Self> {
        let nvars = observables.first().map_or(0, |o| o.nvars());
        if let Some(o) = observables.iter().find(|o| o.nvars() != nvars) {
            return Err(invalid(format!(
                "observable `{}` has {} variables, dictionary has {nvars}",
                o.name(),
                o.nvars()
            )));
        }
        Ok(Self { nvars, observables })
    }

    pub fn from_monomials(monomials: impl IntoIterator<Item = Monomial>) -> Result<Self> {
        Self::new(
            monomials
                .into_iter()
                .map(|m| Arc::new(MonomialObservable::new(m)) as Arc<dyn Observable>)
                .collect(),
        )
    }

    /// `{x_1, …, x_n}`.
    pub fn identity(n: usize) -> Self {
        Self::from_monomials((0..n).map(|i| Monomial::var(n, i))).expect("uniform arity")
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn observables(&self) -> &[Arc<dyn Observable>] {
        &self.observables
    }

    pub fn names(&self) -> Vec<String> {
        self.observables.iter().map(|o| o.name()).collect()
    }

    pub fn in_domain(&self, x: &DVector<f64>) -> bool {
        x.len() == self.nvars && self.observables.iter().all(|o| o.in_domain(x))
    }

    pub fn lift(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let values = self
            .observables
            .iter()
            .map(|o| o.value(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(values))
    }

    /// Compares analytic gradients and Hessians against central differences at
    /// each point; returns the worst relative error seen.
    pub fn derivative_self_test(&self, points: &[DVector<f64>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in points {
            for o in &self.observables {
                let g = o.gradient(x)?;
                let h = o.hessian(x)?;
                for i in 0..self.nvars {
                    let step = 1e-6 * x[i].abs().max(1.0);
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += step;
                    xm[i] -= step;
                    let fd = (o.value(&xp)? - o.value(&xm)?) / (2.0 * step);
                    worst = worst.max(rel_err(g[i], fd));
                    let gp = o.gradient(&xp)?;
                    let gm = o.gradient(&xm)?;
                    for j in 0..self.nvars {
                        let fd = (gp[j] - gm[j]) / (2.0 * step);
                        worst = worst.max(rel_err(h[(i, j)], fd));
                    }
                }
            }
        }
        Ok(worst)
    }
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn identity_lift() {
        let d = ObservableDictionary::identity(3);
        let x = dvector![0.5, -1.0, 2.0];
        assert_eq!(d.lift(&x).unwrap(), x);
    }

    #[test]
    fn log_affine_domain() {
        let phi = LogAffineObservable::new("phi", vec![2.0, 1.0], vec![2.0, -1.0]).unwrap();
        assert!((phi.value(&dvector![1.0, 1.0]).unwrap() - 3.0).abs() < 1e-15);
        let err = phi.value(&dvector![-1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Domain { ref observable, .. } if observable == "phi"));
        assert!(phi.value(&dvector![0.0, 1.0]).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut obs: Vec<Arc<dyn Observable>> = super::super::monomials_up_to(
            2,
            3,
            super::super::MonomialOrdering::GradedLex,
        )
        .into_iter()
        .map(|m| Arc::new(MonomialObservable::new(m)) as Arc<dyn Observable>)
        .collect();
        obs.push(Arc::new(
            LogAffineObservable::new("phi", vec![2.0, 1.0], vec![2.0, -1.0]).unwrap(),
        ));
        let dict = ObservableDictionary::new(obs).unwrap();
        let points = [dvector![0.3, 0.7], dvector![1.5, 0.2], dvector![0.05, 2.0]];
        let worst = dict.derivative_self_test(&points).unwrap();
        assert!(worst < 1e-5, "worst {worst}");
    }

    #[test]
    fn mixed_arity_rejected() {
        let obs: Vec<Arc<dyn Observable>> = vec![
            Arc::new(MonomialObservable::new(Monomial::var(2, 0))),
            Arc::new(MonomialObservable::new(Monomial::var(3, 0))),
        ];
        assert!(ObservableDictionary::new(obs).is_err());
    }
}
