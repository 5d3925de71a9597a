use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::sde::fmt_f64;

/// Lifted bilinear model
///
/// ```text
/// dz = ((Λ_f + Λ_b) z + G) dt + Σ_γ (D_γ z + F_γ) dB_γ
/// dy = C z dt + r1 dη
/// ```
///
/// `G` is an affine drift bias collecting the constant parts of the Itô
/// generator; it is zero for a purely bilinear lift.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedBilinearSystem {
    pub lambda_f: DMatrix<f64>,
    pub lambda_b: DMatrix<f64>,
    pub d: Vec<DMatrix<f64>>,
    pub f: Vec<DVector<f64>>,
    pub g: DVector<f64>,
    pub c: DMatrix<f64>,
    pub r1: f64,
}

impl LiftedBilinearSystem {
    pub fn new(
        lambda_f: DMatrix<f64>,
        lambda_b: DMatrix<f64>,
        d: Vec<DMatrix<f64>>,
        f: Vec<DVector<f64>>,
        g: DVector<f64>,
        c: DMatrix<f64>,
        r1: f64,
    ) -> Result<Self> {
        let sys = Self {
            lambda_f,
            lambda_b,
            d,
            f,
            g,
            c,
            r1,
        };
        sys.validate()?;
        Ok(sys)
    }

    /// All-zero system with `m` states, `r` noises and `p` measurements.
    pub fn zeros(m: usize, r: usize, p: usize, r1: f64) -> Self {
        Self {
            lambda_f: DMatrix::zeros(m, m),
            lambda_b: DMatrix::zeros(m, m),
            d: vec![DMatrix::zeros(m, m); r],
            f: vec![DVector::zeros(m); r],
            g: DVector::zeros(m),
            c: DMatrix::zeros(p, m),
            r1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.lambda_f.nrows();
        let square = |a: &DMatrix<f64>| a.nrows() == m && a.ncols() == m;
        if !square(&self.lambda_f) || !square(&self.lambda_b) {
            return Err(invalid(format!("Λ_f and Λ_b must be {m}×{m}")));
        }
        if self.d.len() != self.f.len() {
            return Err(invalid(format!(
                "{} D matrices but {} F vectors",
                self.d.len(),
                self.f.len()
            )));
        }
        if !self.d.iter().all(square) {
            return Err(invalid(format!("every D_γ must be {m}×{m}")));
        }
        if self.f.iter().any(|f| f.len() != m) || self.g.len() != m {
            return Err(invalid(format!("F_γ and G must have length {m}")));
        }
        if self.c.ncols() != m {
            return Err(invalid(format!("C must have {m} columns")));
        }
        if !(self.r1 > 0.0) || !self.r1.is_finite() {
            return Err(invalid(format!("r1 must be positive, got {}", self.r1)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lambda_f.nrows()
    }

    pub fn noise_dim(&self) -> usize {
        self.d.len()
    }

    pub fn measurement_dim(&self) -> usize {
        self.c.nrows()
    }

    /// `Λ_f + Λ_b`.
    pub fn drift_matrix(&self) -> DMatrix<f64> {
        &self.lambda_f + &self.lambda_b
    }

    /// Copy with the drift bias set to zero.
    pub fn without_bias(&self) -> Self {
        let mut s = self.clone();
        s.g.fill(0.0);
        s
    }

    /// Diffusion matrix `b(z)` with columns `D_γ z + F_γ`.
    pub fn diffusion_at(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.dim(), self.noise_dim());
        for (k, (d, f)) in self.d.iter().zip(&self.f).enumerate() {
            b.set_column(k, &(d * z + f));
        }
        b
    }

    /// One Euler–Maruyama step of the lifted SDE.
    pub fn euler_step(&self, z: &DVector<f64>, dt: f64, db: &DVector<f64>) -> DVector<f64> {
        let mut next = z + (self.drift_matrix() * z + &self.g) * dt;
        for (k, (d, f)) in self.d.iter().zip(&self.f).enumerate() {
            next += (d * z + f) * db[k];
        }
        next
    }

    /// Long-format dump `matrix,row,col,value` (1-based indices) of every
    /// generator matrix and vector.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "matrix,row,col,value")?;
        let mut dump = |name: &str, a: &DMatrix<f64>| -> Result<()> {
            for i in 0..a.nrows() {
                for j in 0..a.ncols() {
                    writeln!(out, "{name},{},{},{}", i + 1, j + 1, fmt_f64(a[(i, j)]))?;
                }
            }
            Ok(())
        };
        dump("Lambda_f", &self.lambda_f)?;
        dump("Lambda_b", &self.lambda_b)?;
        for (k, d) in self.d.iter().enumerate() {
            dump(&format!("D_{}", k + 1), d)?;
        }
        for (k, f) in self.f.iter().enumerate() {
            dump(&format!("F_{}", k + 1), &DMatrix::from_column_slice(f.len(), 1, f.as_slice()))?;
        }
        dump("G", &DMatrix::from_column_slice(self.g.len(), 1, self.g.as_slice()))?;
        dump("C", &self.c)?;
        dump("r1", &DMatrix::from_element(1, 1, self.r1))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn validation() {
        assert!(LiftedBilinearSystem::zeros(2, 1, 1, 0.5).validate().is_ok());
        let mut s = LiftedBilinearSystem::zeros(2, 1, 1, 0.5);
        s.r1 = 0.0;
        assert!(s.validate().is_err());
        let mut s = LiftedBilinearSystem::zeros(2, 1, 1, 0.5);
        s.f.push(dvector![0.0, 0.0]);
        assert!(s.validate().is_err());
        let mut s = LiftedBilinearSystem::zeros(2, 1, 1, 0.5);
        s.c = DMatrix::zeros(1, 3);
        assert!(s.validate().is_err());
    }

    #[test]
    fn euler_step_matches_formula() {
        let mut s = LiftedBilinearSystem::zeros(2, 1, 1, 1.0);
        s.lambda_f = dmatrix![-1.0, 0.5; 0.0, -2.0];
        s.lambda_b = dmatrix![0.1, 0.0; 0.0, 0.0];
        s.d[0] = dmatrix![0.0, 1.0; 2.0, 0.0];
        s.f[0] = dvector![0.3, 0.0];
        s.g = dvector![0.0, 0.25];
        let z = dvector![1.0, 2.0];
        let next = s.euler_step(&z, 0.1, &dvector![0.2]);
        // drift: (-0.9*1 + 0.5*2, -4 + 0.25) = (0.1, -3.75)
        // noise: (2 + 0.3, 2) * 0.2
        let expected = dvector![1.0 + 0.01 + 0.46, 2.0 - 0.375 + 0.4];
        assert!((next - expected).amax() < 1e-15);
    }

    #[test]
    fn csv_dump_has_all_entries() {
        let s = LiftedBilinearSystem::zeros(2, 2, 1, 0.5);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // 4 + 4 + 2*4 + 2*2 + 2 + 2 + 1 entries plus header
        assert_eq!(text.lines().count(), 1 + 4 + 4 + 8 + 4 + 2 + 2 + 1);
        assert!(text.contains("r1,1,1,5.0000000000000000e-1"));
    }
}
