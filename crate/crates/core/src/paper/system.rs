use std::sync::Arc;

use nalgebra::DVector;

use super::{NoiseCoupling, PaperParameters};
use crate::error::Result;
use crate::lifting::{
    monomials_up_to, LogAffineObservable, MonomialObservable, MonomialOrdering, Observable,
    ObservableDictionary, Polynomial, PolynomialSystem,
};

/// ```text
/// dx1 = (−x1 + x1 x2) dt + a dB
/// dx2 = (−2 x2 − 2 x1 x2) dt + b dB
/// dy  = (x1 − x1 x2) dt + r1 dη
/// ```
pub fn paper_system(params: &PaperParameters, coupling: NoiseCoupling) -> Result<PolynomialSystem> {
    let f1 = Polynomial::from_terms(2, &[(&[1, 0], -1.0), (&[1, 1], 1.0)]);
    let f2 = Polynomial::from_terms(2, &[(&[0, 1], -2.0), (&[1, 1], -2.0)]);
    let c = |v: f64| Polynomial::constant(2, v);
    let diffusion = match coupling {
        NoiseCoupling::Shared => vec![vec![c(params.a), c(params.b)]],
        NoiseCoupling::Independent => vec![vec![c(params.a), c(0.0)], vec![c(0.0), c(params.b)]],
    };
    let h = Polynomial::from_terms(2, &[(&[1, 0], 1.0), (&[1, 1], -1.0)]);
    PolynomialSystem::new(2, 0, vec![f1, f2], diffusion, vec![h])?.with_measurement_noise(params.r1)
}

fn eigenfunction_observable() -> LogAffineObservable {
    LogAffineObservable::new("2*x1 + x2 + 2*ln(x1) - ln(x2)", vec![2.0, 1.0], vec![2.0, -1.0])
        .expect("two coefficients each")
}

/// Principal eigenfunction `2 x1 + x2 + 2 ln x1 − ln x2`, positive orthant only.
pub fn paper_eigenfunction(x: &DVector<f64>) -> Result<f64> {
    eigenfunction_observable().value(x)
}

/// `(φ, x1, x2, x1², x2², x1 x2)`.
pub fn paper_dictionary() -> ObservableDictionary {
    let mut obs: Vec<Arc<dyn Observable>> = vec![Arc::new(eigenfunction_observable())];
    obs.extend(
        paper_monomials()
            .into_iter()
            .map(|m| Arc::new(MonomialObservable::new(m)) as Arc<dyn Observable>),
    );
    ObservableDictionary::new(obs).expect("uniform arity")
}

/// `x1, x2, x1², x2², x1 x2`: the monomial part of [`paper_dictionary`].
pub fn paper_monomials() -> Vec<crate::lifting::Monomial> {
    monomials_up_to(2, 2, MonomialOrdering::PowersFirst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::sde::SdeSystem;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn drift_values() {
        let sys = paper_system(&PaperParameters::default(), NoiseCoupling::Shared).unwrap();
        let u = dvector![];
        assert_eq!(sys.drift(&dvector![0.0, 0.0], &u), dvector![0.0, 0.0]);
        assert_eq!(sys.drift(&dvector![1.0, 1.0], &u), dvector![0.0, -4.0]);
        assert_eq!(sys.diffusion(&dvector![3.0, -2.0], &u), dmatrix![0.5; 0.5]);
        let ind = paper_system(&PaperParameters::default(), NoiseCoupling::Independent).unwrap();
        assert_eq!(ind.diffusion(&dvector![3.0, -2.0], &u), dmatrix![0.5, 0.0; 0.0, 0.5]);
        assert_eq!(sys.measure(&dvector![2.0, 3.0]), dvector![2.0 - 6.0]);
    }

    #[test]
    fn euler_step_from_initial_state() {
        let sys = paper_system(&PaperParameters::default(), NoiseCoupling::Shared).unwrap();
        let next = crate::sde::euler_maruyama_step(&sys, &dvector![0.1, 0.1], &dvector![], 1e-3, &dvector![0.0])
            .unwrap();
        assert!((next[0] - 0.099910).abs() < 1e-15);
        assert!((next[1] - 0.099780).abs() < 1e-15);
    }

    #[test]
    fn eigenfunction_values() {
        assert!((paper_eigenfunction(&dvector![1.0, 1.0]).unwrap() - 3.0).abs() < 1e-15);
        let v = paper_eigenfunction(&dvector![0.1, 0.1]).unwrap();
        assert!((v - (0.3 + 0.1f64.ln())).abs() < 1e-15);
        assert!((v + 2.00258509).abs() < 1e-8);
        assert!(matches!(paper_eigenfunction(&dvector![-1.0, 1.0]), Err(Error::Domain { .. })));
    }

    #[test]
    fn lifted_initial_state() {
        let z = paper_dictionary().lift(&dvector![0.1, 0.1]).unwrap();
        assert_eq!(z.len(), 6);
        assert!((z[0] + 2.0025850929940455).abs() < 1e-12);
        assert_eq!(z[1], 0.1);
        assert_eq!(z[2], 0.1);
        assert_eq!(z[3], z[1] * z[1]);
        assert_eq!(z[4], z[2] * z[2]);
        assert_eq!(z[5], z[1] * z[2]);
        assert!(paper_dictionary().lift(&dvector![0.0, 0.1]).is_err());
    }
}
