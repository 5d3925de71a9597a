use nalgebra::DVector;

use super::{
    build_koopman_generators, monomials_up_to, LiftedBilinearSystem, Monomial, MonomialOrdering,
    ObservableDictionary, PolynomialSystem, TruncationPolicy, TruncationReport,
};
use crate::error::{invalid, Error, Result};

pub const DEFAULT_STATE_CAP: usize = 2000;

/// Carleman state: all monomials of degree `1..=order`.
#[derive(Debug, Clone)]
pub struct CarlemanEmbedding {
    pub order: u32,
    pub ordering: MonomialOrdering,
    pub monomials: Vec<Monomial>,
    pub system: LiftedBilinearSystem,
    pub report: TruncationReport,
}

impl CarlemanEmbedding {
    pub fn dictionary(&self) -> ObservableDictionary {
        ObservableDictionary::from_monomials(self.monomials.iter().cloned())
            .expect("monomials share arity")
    }

    /// Metadata block: ordering, state names and truncation report.
    pub fn metadata(&self) -> String {
        let mut s = format!(
            "lifting: carleman\norder: {}\nordering: {}\nstates:\n",
            self.order,
            self.ordering.name()
        );
        for (i, m) in self.monomials.iter().enumerate() {
            s.push_str(&format!("  {}: {m}\n", i + 1));
        }
        s.push_str("truncation:\n");
        s.push_str(&self.report.to_text());
        s
    }
}

/// Order-`order` Carleman embedding of an autonomous polynomial system with
/// the default ordering and state cap.
pub fn carleman_embed(poly: &PolynomialSystem, order: u32) -> Result<CarlemanEmbedding> {
    carleman_embed_with(poly, order, MonomialOrdering::default(), DEFAULT_STATE_CAP)
}

/// Each state row is the exact Itô generator of its monomial with every
/// resulting monomial of degree above `order` dropped.
pub fn carleman_embed_with(
    poly: &PolynomialSystem,
    order: u32,
    ordering: MonomialOrdering,
    cap: usize,
) -> Result<CarlemanEmbedding> {
    if order == 0 {
        return Err(invalid("Carleman order must be at least 1"));
    }
    let n = poly.n();
    let requested = carleman_dimension(n, order);
    if requested > cap {
        return Err(Error::Capacity { requested, cap });
    }
    let monomials = monomials_up_to(n, order, ordering);
    debug_assert_eq!(monomials.len(), requested);
    let dict = ObservableDictionary::from_monomials(monomials.iter().cloned())?;
    let u = DVector::zeros(poly.d());
    let build = build_koopman_generators(&dict, poly, &u, TruncationPolicy::Drop)?;
    Ok(CarlemanEmbedding {
        order,
        ordering,
        monomials,
        system: build.system,
        report: build.report,
    })
}

/// `C(n + N, N) − 1`, saturating at `usize::MAX`.
pub fn carleman_dimension(n: usize, order: u32) -> usize {
    let mut acc: u128 = 1;
    for i in 1..=order as u128 {
        acc = acc * (n as u128 + i) / i;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    (acc - 1) as usize
}
