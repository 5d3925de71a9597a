use nalgebra::{DMatrix, DVector};

use super::{NoiseCoupling, PaperMode, PaperParameters};
use crate::error::Result;
use crate::lifting::LiftedBilinearSystem;

/// Hard-coded six-state lift on `(φ, x1, x2, x1², x2², x1 x2)`.
///
/// `Λ_f` holds the combined drift matrix and `Λ_b` is zero. The `dz2` row is
/// `−z2 + z6`. With [`NoiseCoupling::Independent`] the single `D`, `F` are
/// split by the noise intensity (`a` terms on channel 1, `b` terms on
/// channel 2).
pub fn paper_lifted_system(
    params: &PaperParameters,
    mode: PaperMode,
    coupling: NoiseCoupling,
) -> Result<LiftedBilinearSystem> {
    params.validate()?;
    let PaperParameters { a, b, x01, x02, .. } = *params;

    let mut lambda = DMatrix::zeros(6, 6);
    lambda[(0, 1)] = 8.0 * a * a / x01.powi(3);
    lambda[(0, 2)] = -4.0 * b * b / x02.powi(3);
    lambda[(0, 3)] = -3.0 * a * a / x01.powi(4);
    lambda[(0, 4)] = 3.0 * b * b / (2.0 * x02.powi(4));
    lambda[(1, 1)] = -1.0;
    lambda[(1, 5)] = 1.0;
    lambda[(2, 2)] = -2.0;
    lambda[(2, 5)] = -2.0;
    lambda[(3, 3)] = -2.0;
    lambda[(4, 4)] = -4.0;
    lambda[(5, 5)] = -3.0;

    // a-carried and b-carried parts of D and F
    let mut d_a = DMatrix::zeros(6, 6);
    let mut d_b = DMatrix::zeros(6, 6);
    d_a[(0, 1)] = -6.0 * a / (x01 * x01);
    d_b[(0, 2)] = 3.0 * b / (x02 * x02);
    d_a[(0, 3)] = 2.0 * a / x01.powi(3);
    d_b[(0, 4)] = -b / x02.powi(3);
    d_a[(3, 1)] = 2.0 * a;
    d_b[(4, 2)] = 2.0 * b;
    d_b[(5, 1)] = b;
    d_a[(5, 2)] = a;

    let mut f_a = DVector::zeros(6);
    let mut f_b = DVector::zeros(6);
    f_a[0] = 2.0 * a + 6.0 * a / x01;
    f_b[0] = b - 3.0 * b / x02;
    f_a[1] = a;
    f_b[2] = b;

    let (d, f) = match coupling {
        NoiseCoupling::Shared => (vec![d_a + d_b], vec![f_a + f_b]),
        NoiseCoupling::Independent => (vec![d_a, d_b], vec![f_a, f_b]),
    };

    let mut g = DVector::zeros(6);
    if mode == PaperMode::Ito {
        g[3] = a * a;
        g[4] = b * b;
        if coupling == NoiseCoupling::Shared {
            g[5] = a * b;
        }
    }

    let c = DMatrix::from_row_slice(1, 6, &[0.0, 1.0, 0.0, 0.0, 0.0, -1.0]);
    LiftedBilinearSystem::new(lambda, DMatrix::zeros(6, 6), d, f, g, c, params.r1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use nalgebra::dvector;

    #[test]
    fn default_parameter_values() {
        let s = paper_lifted_system(&PaperParameters::default(), PaperMode::Verbatim, NoiseCoupling::Shared)
            .unwrap();
        assert_eq!(s.lambda_f.row(0).transpose(), dvector![0.0, -2.0, -1.0, -0.75, 0.375, 0.0]);
        assert_eq!(s.f[0], dvector![-3.0, 0.5, 0.5, 0.0, 0.0, 0.0]);
        assert_eq!(s.d[0].row(0).transpose(), dvector![0.0, -3.0, 1.5, -1.0, -0.5, 0.0]);
        assert_eq!(s.c.row(0).transpose(), dvector![0.0, 1.0, 0.0, 0.0, 0.0, -1.0]);
        assert_eq!(s.g, DVector::zeros(6));
    }

    #[test]
    fn ito_mode_bias() {
        let p = PaperParameters { a: 0.3, b: 0.7, ..Default::default() };
        let s = paper_lifted_system(&p, PaperMode::Ito, NoiseCoupling::Shared).unwrap();
        assert_eq!(s.g, dvector![0.0, 0.0, 0.0, 0.3 * 0.3, 0.7 * 0.7, 0.3 * 0.7]);
        let s = paper_lifted_system(&p, PaperMode::Ito, NoiseCoupling::Independent).unwrap();
        assert_eq!(s.g, dvector![0.0, 0.0, 0.0, 0.3 * 0.3, 0.7 * 0.7, 0.0]);
    }

    #[test]
    fn independent_split_sums_to_shared() {
        let p = PaperParameters { a: 0.3, b: 0.7, x01: 1.5, x02: -2.0, ..Default::default() };
        let shared = paper_lifted_system(&p, PaperMode::Verbatim, NoiseCoupling::Shared).unwrap();
        let ind = paper_lifted_system(&p, PaperMode::Verbatim, NoiseCoupling::Independent).unwrap();
        assert_eq!(ind.noise_dim(), 2);
        assert!((&ind.d[0] + &ind.d[1] - &shared.d[0]).amax() < 1e-15);
        assert!((&ind.f[0] + &ind.f[1] - &shared.f[0]).amax() < 1e-15);
    }

    #[test]
    fn zero_expansion_point_rejected() {
        let p = PaperParameters { x01: 0.0, ..Default::default() };
        assert!(matches!(
            paper_lifted_system(&p, PaperMode::Verbatim, NoiseCoupling::Shared),
            Err(Error::InvalidArgument(_))
        ));
    }
}
