//! Controlled Itô SDEs: system model, Brownian increments and Euler–Maruyama
//! integration of truth and lifted paths.

mod integrate;
mod noise;
mod system;
mod trajectory;

pub use integrate::{
    euler_maruyama_step, simulate_coupled, simulate_lifted, simulate_path, zero_control,
};
pub use noise::{generate_noise, generate_noise_stream, NoisePath};
pub use system::{FnSystem, SdeSystem};
pub use trajectory::{fmt_f64, TimeGrid, Trajectory};
