use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::{LiftedBilinearSystem, Monomial, ObservableDictionary, Polynomial, PolynomialSystem};
use crate::error::{invalid, Error, Result};

/// What happens to generator terms whose monomial is not in the dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationPolicy {
    /// Zero the term and record it in the [`TruncationReport`].
    #[default]
    Drop,
    /// Fail with [`Error::Truncation`].
    Reject,
}

/// Which generator a term came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermSource {
    Drift,
    DiffusionCorrection,
    /// 0-based noise channel.
    Noise(usize),
    /// 0-based measurement channel.
    Measurement,
}

impl fmt::Display for TermSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermSource::Drift => f.write_str("drift"),
            TermSource::DiffusionCorrection => f.write_str("ito-correction"),
            TermSource::Noise(g) => write!(f, "noise-{}", g + 1),
            TermSource::Measurement => f.write_str("measurement"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroppedTerm {
    /// 0-based row: dictionary index, or measurement channel.
    pub row: usize,
    pub source: TermSource,
    pub monomial: Monomial,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TruncationReport {
    pub dropped: Vec<DroppedTerm>,
}

impl TruncationReport {
    pub fn is_empty(&self) -> bool {
        self.dropped.is_empty()
    }

    /// One line per dropped term: `row,source,monomial,coefficient`.
    pub fn to_text(&self) -> String {
        let mut s = String::from("row,source,monomial,coefficient\n");
        for t in &self.dropped {
            s.push_str(&format!(
                "{},{},{},{}\n",
                t.row + 1,
                t.source,
                t.monomial,
                crate::sde::fmt_f64(t.coefficient)
            ));
        }
        s
    }
}

/// Lifted system together with what the truncation removed.
#[derive(Debug, Clone)]
pub struct GeneratorBuild {
    pub system: LiftedBilinearSystem,
    pub report: TruncationReport,
}

/// Projects the Itô generator of `poly` (control frozen at `u`) onto a
/// dictionary of monomials.
///
/// For each `φ_j`, the drift part `L^f φ_j` fills row `j` of `Λ_f`, the Itô
/// correction `L^b φ_j` fills row `j` of `Λ_b`, and each `L^{g_γ} φ_j` fills
/// row `j` of `D_γ`. Constant parts go to `G` (drift) and `F_γ` (noise). The
/// measurement polynomials are expanded into the rows of `C`.
pub fn build_koopman_generators(
    dict: &ObservableDictionary,
    poly: &PolynomialSystem,
    u: &DVector<f64>,
    policy: TruncationPolicy,
) -> Result<GeneratorBuild> {
    let sys = poly.at_control(u)?;
    let n = sys.n();
    if dict.nvars() != n && !dict.is_empty() {
        return Err(invalid(format!(
            "dictionary ranges over {} variables, system has {n}",
            dict.nvars()
        )));
    }
    let mut index: HashMap<Monomial, usize> = HashMap::new();
    let mut monomials = Vec::with_capacity(dict.len());
    for (j, obs) in dict.observables().iter().enumerate() {
        let m = obs
            .as_monomial()
            .ok_or_else(|| Error::UnsupportedObservable(obs.name()))?;
        if m.is_constant() {
            return Err(invalid(format!(
                "observable {} is constant; constants are carried by G and F",
                j + 1
            )));
        }
        if index.insert(m.clone(), j).is_some() {
            return Err(invalid(format!("monomial {m} appears twice in the dictionary")));
        }
        monomials.push(m.clone());
    }

    let m = dict.len();
    let r = sys.r();
    let mut out = LiftedBilinearSystem::zeros(m, r, sys.p(), sys.measurement_noise());
    let mut report = TruncationReport::default();

    let mut place = |row: usize,
                     source: TermSource,
                     expansion: &Polynomial,
                     matrix: &mut DMatrix<f64>,
                     constant: Option<&mut f64>|
     -> Result<()> {
        let mut constant = constant;
        for (mono, c) in expansion.terms() {
            if mono.is_constant() {
                if let Some(slot) = constant.as_deref_mut() {
                    *slot += c;
                    continue;
                }
            } else if let Some(&col) = index.get(mono) {
                matrix[(row, col)] += c;
                continue;
            }
            match policy {
                TruncationPolicy::Drop => report.dropped.push(DroppedTerm {
                    row,
                    source,
                    monomial: mono.clone(),
                    coefficient: c,
                }),
                TruncationPolicy::Reject => {
                    return Err(Error::Truncation {
                        row: row + 1,
                        term: format!("{c}*{mono} ({source})"),
                    })
                }
            }
        }
        Ok(())
    };

    let drift = sys.drift_polys();
    let columns = sys.diffusion_polys();
    for (j, mono) in monomials.iter().enumerate() {
        let phi = Polynomial::term(mono.clone(), 1.0);
        let grad: Vec<Polynomial> = (0..n).map(|l| phi.derivative(l)).collect();

        let mut lf = Polynomial::zero(n);
        for l in 0..n {
            lf = &lf + &(&grad[l] * &drift[l]);
        }

        let mut lb = Polynomial::zero(n);
        for l1 in 0..n {
            for l2 in 0..n {
                let h = grad[l1].derivative(l2);
                if h.is_zero() {
                    continue;
                }
                let mut cov = Polynomial::zero(n);
                for col in columns {
                    cov = &cov + &(&col[l1] * &col[l2]);
                }
                lb = &lb + &(&h * &cov).scale(0.5);
            }
        }

        let mut g_j = 0.0;
        place(j, TermSource::Drift, &lf, &mut out.lambda_f, Some(&mut g_j))?;
        place(j, TermSource::DiffusionCorrection, &lb, &mut out.lambda_b, Some(&mut g_j))?;
        out.g[j] = g_j;

        for (gamma, col) in columns.iter().enumerate() {
            let mut lg = Polynomial::zero(n);
            for l in 0..n {
                lg = &lg + &(&grad[l] * &col[l]);
            }
            let mut f_j = 0.0;
            place(j, TermSource::Noise(gamma), &lg, &mut out.d[gamma], Some(&mut f_j))?;
            out.f[gamma][j] = f_j;
        }
    }

    for (i, h) in sys.measurement_polys().iter().enumerate() {
        place(i, TermSource::Measurement, h, &mut out.c, None)?;
    }

    out.validate()?;
    Ok(GeneratorBuild {
        system: out,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::LogAffineObservable;
    use nalgebra::{dmatrix, dvector};
    use std::sync::Arc;

    #[test]
    fn linear_system_lifts_to_itself() {
        let a = dmatrix![-1.0, 0.5; 0.2, -3.0];
        let sigma = dmatrix![0.1, 0.0; 0.4, 0.7];
        let poly = PolynomialSystem::linear(&a, &sigma, &dmatrix![1.0, 1.0]).unwrap();
        let b = build_koopman_generators(
            &ObservableDictionary::identity(2),
            &poly,
            &dvector![],
            TruncationPolicy::Reject,
        )
        .unwrap();
        let s = &b.system;
        assert_eq!(s.lambda_f, a);
        assert_eq!(s.lambda_b, DMatrix::zeros(2, 2));
        assert!(s.d.iter().all(|d| d.iter().all(|&v| v == 0.0)));
        assert_eq!(s.f[0], dvector![0.1, 0.4]);
        assert_eq!(s.f[1], dvector![0.0, 0.7]);
        assert_eq!(s.g, dvector![0.0, 0.0]);
        assert_eq!(s.c, dmatrix![1.0, 1.0]);
        assert!(b.report.is_empty());
    }

    #[test]
    fn log_observable_rejected() {
        let dict = ObservableDictionary::new(vec![Arc::new(
            LogAffineObservable::new("phi", vec![2.0, 1.0], vec![2.0, -1.0]).unwrap(),
        )])
        .unwrap();
        let poly = PolynomialSystem::linear(&DMatrix::zeros(2, 2), &DMatrix::zeros(2, 1), &DMatrix::zeros(0, 2)).unwrap();
        let err = build_koopman_generators(&dict, &poly, &dvector![], TruncationPolicy::Drop).unwrap_err();
        assert_eq!(err, Error::UnsupportedObservable("phi".into()));
    }

    #[test]
    fn reject_policy_fails_on_out_of_span() {
        // dx = x^2 dt with dictionary {x}
        let f = Polynomial::from_terms(1, &[(&[2], 1.0)]);
        let poly = PolynomialSystem::new(1, 0, vec![f], vec![], vec![]).unwrap();
        let dict = ObservableDictionary::identity(1);
        assert!(matches!(
            build_koopman_generators(&dict, &poly, &dvector![], TruncationPolicy::Reject),
            Err(Error::Truncation { row: 1, .. })
        ));
        let b = build_koopman_generators(&dict, &poly, &dvector![], TruncationPolicy::Drop).unwrap();
        assert_eq!(b.report.dropped.len(), 1);
        assert_eq!(b.report.dropped[0].coefficient, 1.0);
    }

    #[test]
    fn control_enters_bias() {
        // dx = (-x + u) dt, u = 2 -> G = 2
        let f = Polynomial::from_terms(2, &[(&[1, 0], -1.0), (&[0, 1], 1.0)]);
        let poly = PolynomialSystem::new(1, 1, vec![f], vec![], vec![]).unwrap();
        let b = build_koopman_generators(
            &ObservableDictionary::identity(1),
            &poly,
            &dvector![2.0],
            TruncationPolicy::Reject,
        )
        .unwrap();
        assert_eq!(b.system.lambda_f, dmatrix![-1.0]);
        assert_eq!(b.system.g, dvector![2.0]);
    }

    #[test]
    fn duplicate_and_constant_observables() {
        let poly = PolynomialSystem::linear(&DMatrix::zeros(1, 1), &DMatrix::zeros(1, 0), &DMatrix::zeros(0, 1)).unwrap();
        let dup = ObservableDictionary::from_monomials([Monomial::var(1, 0), Monomial::var(1, 0)]).unwrap();
        assert!(build_koopman_generators(&dup, &poly, &dvector![], TruncationPolicy::Drop).is_err());
        let one = ObservableDictionary::from_monomials([Monomial::one(1)]).unwrap();
        assert!(build_koopman_generators(&one, &poly, &dvector![], TruncationPolicy::Drop).is_err());
    }
}
