use std::io::Write;

use nalgebra::{DMatrix, DVector};

use super::{FilterDiagnostics, FilterState};
use crate::error::Result;
use crate::sde::fmt_f64;

/// Filter output on the observation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterTrace {
    pub times: Vec<f64>,
    pub means: Vec<DVector<f64>>,
    pub cov_diagonals: Vec<DVector<f64>>,
    /// Full covariance every `stride` steps (and at t = 0); empty when the
    /// stride is zero.
    pub full_covariances: Vec<(f64, DMatrix<f64>)>,
    pub diagnostics: FilterDiagnostics,
}

impl FilterTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn mean_column(&self, j: usize) -> Vec<f64> {
        self.means.iter().map(|m| m[j]).collect()
    }

    pub fn variance_column(&self, j: usize) -> Vec<f64> {
        self.cov_diagonals.iter().map(|d| d[j]).collect()
    }

    /// `t,zhat_1..zhat_m,P_11..P_mm`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let m = self.means.first().map_or(0, |v| v.len());
        write!(out, "t")?;
        for j in 1..=m {
            write!(out, ",zhat_{j}")?;
        }
        for j in 1..=m {
            write!(out, ",P_{j}{j}")?;
        }
        writeln!(out)?;
        for ((t, mean), diag) in self.times.iter().zip(&self.means).zip(&self.cov_diagonals) {
            write!(out, "{}", fmt_f64(*t))?;
            for v in mean.iter().chain(diag.iter()) {
                write!(out, ",{}", fmt_f64(*v))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// `t,P_1_1,P_1_2,…,P_m_m`, row-major, one row per stored snapshot.
    pub fn write_covariance_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let m = self.means.first().map_or(0, |v| v.len());
        write!(out, "t")?;
        for i in 1..=m {
            for j in 1..=m {
                write!(out, ",P_{i}_{j}")?;
            }
        }
        writeln!(out)?;
        for (t, p) in &self.full_covariances {
            write!(out, "{}", fmt_f64(*t))?;
            for i in 0..m {
                for j in 0..m {
                    write!(out, ",{}", fmt_f64(p[(i, j)]))?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Runs `step` over the observation increments `dys` (one per grid step).
pub fn run_filter<F>(
    initial: FilterState,
    dys: &[DVector<f64>],
    dt: f64,
    cov_stride: usize,
    mut step: F,
) -> Result<FilterTrace>
where
    F: FnMut(&FilterState, &DVector<f64>, &mut FilterDiagnostics) -> Result<FilterState>,
{
    let mut trace = FilterTrace {
        times: Vec::with_capacity(dys.len() + 1),
        means: Vec::with_capacity(dys.len() + 1),
        cov_diagonals: Vec::with_capacity(dys.len() + 1),
        full_covariances: Vec::new(),
        diagnostics: FilterDiagnostics::default(),
    };
    let record = |trace: &mut FilterTrace, k: usize, fs: &FilterState| {
        let t = k as f64 * dt;
        trace.times.push(t);
        trace.means.push(fs.mean.clone());
        trace.cov_diagonals.push(fs.cov.diagonal());
        if cov_stride > 0 && k.is_multiple_of(cov_stride) {
            trace.full_covariances.push((t, fs.cov.clone()));
        }
    };
    let mut fs = initial;
    record(&mut trace, 0, &fs);
    let mut diag = FilterDiagnostics::default();
    for (k, dy) in dys.iter().enumerate() {
        fs = step(&fs, dy, &mut diag)?;
        record(&mut trace, k + 1, &fs);
    }
    trace.diagnostics = diag;
    Ok(trace)
}
