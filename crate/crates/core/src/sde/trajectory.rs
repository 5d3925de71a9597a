use std::io::Write;

use nalgebra::DVector;

use crate::error::Result;

/// Uniform time grid `t_k = k·dt`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, steps: usize) -> Self {
        Self { dt, steps }
    }

    /// Grid covering `[0, horizon]`; the step count is `round(horizon / dt)`.
    pub fn from_horizon(dt: f64, horizon: f64) -> Self {
        Self {
            dt,
            steps: (horizon / dt).round().max(0.0) as usize,
        }
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

/// A sampled path on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn with_initial(x0: DVector<f64>, capacity: usize) -> Self {
        let mut times = Vec::with_capacity(capacity + 1);
        let mut states = Vec::with_capacity(capacity + 1);
        times.push(0.0);
        states.push(x0);
        Self { times, states }
    }

    pub fn push(&mut self, t: f64, x: DVector<f64>) {
        self.times.push(t);
        self.states.push(x);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.len())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[j]).collect()
    }

    pub fn last(&self) -> Option<&DVector<f64>> {
        self.states.last()
    }

    /// CSV with header `t,s1,...,sk`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let labels: Vec<String> = (1..=self.dim()).map(|j| format!("s{j}")).collect();
        self.write_csv_labeled(out, &labels)
    }

    pub fn write_csv_labeled<W: Write>(&self, out: &mut W, labels: &[String]) -> Result<()> {
        write!(out, "t")?;
        for l in labels {
            write!(out, ",{l}")?;
        }
        writeln!(out)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(out, "{}", fmt_f64(*t))?;
            for v in s.iter() {
                write!(out, ",{}", fmt_f64(*v))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// 17 significant digits, `.` decimal separator.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut tr = Trajectory::with_initial(DVector::from_vec(vec![1.0, 0.1]), 1);
        tr.push(0.5, DVector::from_vec(vec![0.9, 0.2]));
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,s1,s2");
        assert_eq!(lines.len(), 3);
        let parsed: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(parsed, vec![0.5, 0.9, 0.2]);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn fmt_round_trips() {
        for v in [0.1, -2.0025850929940455, 1e-300, 123456.789] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn grid_from_horizon() {
        assert_eq!(TimeGrid::from_horizon(1e-3, 5.0).steps, 5000);
        assert_eq!(TimeGrid::from_horizon(1e-3, 0.0).steps, 0);
    }
}
