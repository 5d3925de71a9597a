use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};

/// Brownian increments on a uniform grid.
///
/// Generation scheme: a ChaCha20 stream cipher (a 64-bit-counter based
/// generator) keyed by `seed` via `seed_from_u64` and positioned on word
/// stream `stream`; standard normals are drawn with the ziggurat sampler of
/// `rand_distr::StandardNormal` and scaled by `sqrt(dt)`. Entries are filled
/// row by row (step-major, then noise dimension).
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub dt: f64,
    pub seed: u64,
    pub stream: u64,
    /// `steps × dims`.
    pub increments: DMatrix<f64>,
}

impl NoisePath {
    pub fn steps(&self) -> usize {
        self.increments.nrows()
    }

    pub fn dims(&self) -> usize {
        self.increments.ncols()
    }

    /// Increment vector for step `k`.
    pub fn row(&self, k: usize) -> nalgebra::DVector<f64> {
        self.increments.row(k).transpose()
    }
}

/// Process-noise stream, see [`generate_noise_stream`].
pub fn generate_noise(seed: u64, dt: f64, steps: usize, dims: usize) -> Result<NoisePath> {
    generate_noise_stream(seed, 0, dt, steps, dims)
}

/// Independent increments for the same seed are obtained by choosing a
/// different `stream`; the harness uses stream 0 for the state noise and
/// stream 1 for the measurement noise.
pub fn generate_noise_stream(
    seed: u64,
    stream: u64,
    dt: f64,
    steps: usize,
    dims: usize,
) -> Result<NoisePath> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid(format!("dt must be positive and finite, got {dt}")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let scale = dt.sqrt();
    let mut increments = DMatrix::zeros(steps, dims);
    for k in 0..steps {
        for j in 0..dims {
            let z: f64 = StandardNormal.sample(&mut rng);
            increments[(k, j)] = scale * z;
        }
    }
    Ok(NoisePath {
        dt,
        seed,
        stream,
        increments,
    })
}
