use crate::error::{invalid, Result};

/// Constants of the two-state polynomial benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaperParameters {
    /// Noise intensity on `x1`.
    pub a: f64,
    /// Noise intensity on `x2`.
    pub b: f64,
    /// Measurement noise scale.
    pub r1: f64,
    /// Expansion points of the logarithmic eigenfunction.
    pub x01: f64,
    pub x02: f64,
    pub x0: [f64; 2],
    pub dt: f64,
    pub horizon: f64,
}

impl Default for PaperParameters {
    fn default() -> Self {
        Self {
            a: 0.5,
            b: 0.5,
            r1: 0.5,
            x01: -1.0,
            x02: 1.0,
            x0: [0.1, 0.1],
            dt: 1e-3,
            horizon: 5.0,
        }
    }
}

impl PaperParameters {
    pub fn validate(&self) -> Result<()> {
        if !(self.r1 > 0.0) {
            return Err(invalid(format!("r1 must be positive, got {}", self.r1)));
        }
        if self.x01 == 0.0 || self.x02 == 0.0 {
            return Err(invalid("expansion points x01 and x02 must be non-zero"));
        }
        if !(self.x0[0] > 0.0 && self.x0[1] > 0.0) {
            return Err(invalid(format!(
                "initial state must lie in the positive orthant, got {:?}",
                self.x0
            )));
        }
        let all = [self.a, self.b, self.r1, self.x01, self.x02, self.x0[0], self.x0[1]];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("parameters must be finite"));
        }
        Ok(())
    }
}

/// Whether the two state equations share one Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseCoupling {
    /// One motion drives both states (`r = 1`).
    #[default]
    Shared,
    /// Independent motions for `x1` and `x2` (`r = 2`).
    Independent,
}

impl NoiseCoupling {
    pub fn name(self) -> &'static str {
        match self {
            NoiseCoupling::Shared => "shared",
            NoiseCoupling::Independent => "independent",
        }
    }
}

/// Which drift constants the lifted example carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PaperMode {
    /// Reference filter equations: no drift bias.
    #[default]
    Verbatim,
    /// Full Itô generator: `a²`, `b²` on the squares and `ab` on the product
    /// when the noise is shared.
    Ito,
}

impl PaperMode {
    pub fn name(self) -> &'static str {
        match self {
            PaperMode::Verbatim => "verbatim",
            PaperMode::Ito => "ito",
        }
    }
}
