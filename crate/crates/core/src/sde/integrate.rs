use nalgebra::DVector;

use super::{NoisePath, SdeSystem, TimeGrid, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::lifting::{LiftedBilinearSystem, ObservableDictionary};

/// One explicit Euler–Maruyama step `x + f(x,u)·dt + Σ_γ g_γ(x,u)·dB_γ`.
pub fn euler_maruyama_step<S: SdeSystem + ?Sized>(
    system: &S,
    x: &DVector<f64>,
    u: &DVector<f64>,
    dt: f64,
    db: &DVector<f64>,
) -> Result<DVector<f64>> {
    step_at(system, x, u, dt, db, 0)
}

fn step_at<S: SdeSystem + ?Sized>(
    system: &S,
    x: &DVector<f64>,
    u: &DVector<f64>,
    dt: f64,
    db: &DVector<f64>,
    step: usize,
) -> Result<DVector<f64>> {
    if x.len() != system.state_dim() {
        return Err(invalid(format!(
            "state has length {}, system expects {}",
            x.len(),
            system.state_dim()
        )));
    }
    if u.len() != system.control_dim() {
        return Err(invalid(format!(
            "control has length {}, system expects {}",
            u.len(),
            system.control_dim()
        )));
    }
    if db.len() != system.noise_dim() {
        return Err(invalid(format!(
            "noise increment has length {}, system expects {}",
            db.len(),
            system.noise_dim()
        )));
    }
    let next = x + system.drift(x, u) * dt + system.diffusion(x, u) * db;
    if next.iter().all(|v| v.is_finite()) {
        Ok(next)
    } else {
        Err(Error::NonFinite {
            step,
            context: "Euler–Maruyama state".into(),
        })
    }
}

/// The zero control hook for a `d`-dimensional input.
pub fn zero_control(d: usize) -> impl Fn(f64) -> DVector<f64> {
    move |_| DVector::zeros(d)
}

/// Integrates `system` from `x0` on `grid`, consuming noise rows `0..grid.steps`.
pub fn simulate_path<S: SdeSystem + ?Sized>(
    system: &S,
    x0: &DVector<f64>,
    control: &dyn Fn(f64) -> DVector<f64>,
    grid: TimeGrid,
    noise: &NoisePath,
) -> Result<Trajectory> {
    check_noise(noise, system.noise_dim(), grid)?;
    if x0.len() != system.state_dim() {
        return Err(invalid(format!(
            "initial state has length {}, system expects {}",
            x0.len(),
            system.state_dim()
        )));
    }
    let mut path = Trajectory::with_initial(x0.clone(), grid.steps);
    let mut x = x0.clone();
    for k in 0..grid.steps {
        let t = grid.time(k);
        x = step_at(system, &x, &control(t), grid.dt, &noise.row(k), k)?;
        path.push(grid.time(k + 1), x.clone());
    }
    Ok(path)
}

/// Integrates the lifted bilinear system from `z0`.
pub fn simulate_lifted(
    lifted: &LiftedBilinearSystem,
    z0: &DVector<f64>,
    grid: TimeGrid,
    noise: &NoisePath,
) -> Result<Trajectory> {
    lifted.validate()?;
    check_noise(noise, lifted.noise_dim(), grid)?;
    if z0.len() != lifted.dim() {
        return Err(invalid(format!(
            "lifted initial state has length {}, system has {} states",
            z0.len(),
            lifted.dim()
        )));
    }
    let mut path = Trajectory::with_initial(z0.clone(), grid.steps);
    let mut z = z0.clone();
    for k in 0..grid.steps {
        z = lifted.euler_step(&z, grid.dt, &noise.row(k));
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                step: k,
                context: "lifted state".into(),
            });
        }
        path.push(grid.time(k + 1), z.clone());
    }
    Ok(path)
}

/// Truth path and lifted path driven by the same Brownian increments.
///
/// The truth system runs with zero control; the lifted path starts at
/// `dictionary.lift(x0)`.
pub fn simulate_coupled<S: SdeSystem + ?Sized>(
    truth: &S,
    lifted: &LiftedBilinearSystem,
    dictionary: &ObservableDictionary,
    x0: &DVector<f64>,
    grid: TimeGrid,
    noise: &NoisePath,
) -> Result<(Trajectory, Trajectory)> {
    if lifted.dim() != dictionary.len() {
        return Err(invalid(format!(
            "lifted system has {} states but the dictionary has {} observables",
            lifted.dim(),
            dictionary.len()
        )));
    }
    if lifted.noise_dim() != truth.noise_dim() {
        return Err(invalid(format!(
            "lifted system has {} noise channels, truth has {}",
            lifted.noise_dim(),
            truth.noise_dim()
        )));
    }
    let z0 = dictionary.lift(x0)?;
    let control = zero_control(truth.control_dim());
    let truth_path = simulate_path(truth, x0, &control, grid, noise)?;
    let lifted_path = simulate_lifted(lifted, &z0, grid, noise)?;
    Ok((truth_path, lifted_path))
}

fn check_noise(noise: &NoisePath, dims: usize, grid: TimeGrid) -> Result<()> {
    if noise.dims() != dims {
        return Err(invalid(format!(
            "noise path has {} dimensions, system needs {dims}",
            noise.dims()
        )));
    }
    if noise.steps() < grid.steps {
        return Err(invalid(format!(
            "noise path has {} steps, grid needs {}",
            noise.steps(),
            grid.steps
        )));
    }
    if (noise.dt - grid.dt).abs() > 1e-15 * grid.dt.abs().max(1.0) {
        return Err(invalid(format!(
            "noise dt {} differs from grid dt {}",
            noise.dt, grid.dt
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::{generate_noise, FnSystem};
    use nalgebra::{dmatrix, dvector, DMatrix};

    fn decay() -> FnSystem {
        FnSystem::linear(dmatrix![-1.0], DMatrix::zeros(1, 1))
    }

    #[test]
    fn zero_system_is_identity() {
        let sys = FnSystem::linear(DMatrix::zeros(2, 2), DMatrix::zeros(2, 1));
        let x = dvector![0.3, -4.0];
        let next = euler_maruyama_step(&sys, &x, &dvector![], 0.1, &dvector![0.7]).unwrap();
        assert_eq!(next, x);
    }

    #[test]
    fn scalar_decay_step() {
        let next = euler_maruyama_step(&decay(), &dvector![1.0], &dvector![], 0.1, &dvector![0.0])
            .unwrap();
        assert!((next[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let err = euler_maruyama_step(&decay(), &dvector![1.0, 2.0], &dvector![], 0.1, &dvector![0.0]);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
        let err = euler_maruyama_step(&decay(), &dvector![1.0], &dvector![], 0.1, &dvector![]);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn overflow_reports_step() {
        let sys = FnSystem::new(1, 0, 1, |x, _| x.map(|v| v * v * 1e200), |_, _| DMatrix::zeros(1, 1));
        let noise = generate_noise(1, 1.0, 10, 1).unwrap();
        let err = simulate_path(&sys, &dvector![10.0], &zero_control(0), TimeGrid::new(1.0, 10), &noise)
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { step: 1, .. }), "{err:?}");
    }

    #[test]
    fn repeated_euler() {
        let noise = NoisePath {
            dt: 0.1,
            seed: 0,
            stream: 0,
            increments: DMatrix::zeros(2, 1),
        };
        let path = simulate_path(&decay(), &dvector![1.0], &zero_control(0), TimeGrid::new(0.1, 2), &noise)
            .unwrap();
        let xs = path.column(0);
        assert_eq!(xs.len(), 3);
        assert!((xs[1] - 0.9).abs() < 1e-15 && (xs[2] - 0.81).abs() < 1e-15);
        assert!((path.times[2] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_steps_only_initial_state() {
        let noise = generate_noise(1, 0.1, 0, 1).unwrap();
        let path = simulate_path(&decay(), &dvector![2.0], &zero_control(0), TimeGrid::new(0.1, 0), &noise)
            .unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path.states[0], dvector![2.0]);
    }

    #[test]
    fn pure_diffusion_sums_increments() {
        let sys = FnSystem::linear(DMatrix::zeros(2, 2), dmatrix![0.5; -1.5]);
        let noise = generate_noise(3, 1e-3, 2000, 1).unwrap();
        let x0 = dvector![0.25, 1.0];
        let path = simulate_path(&sys, &x0, &zero_control(0), TimeGrid::new(1e-3, 2000), &noise).unwrap();
        let total: f64 = noise.increments.iter().sum();
        let last = path.last().unwrap();
        assert!((last[0] - (0.25 + 0.5 * total)).abs() < 1e-12);
        assert!((last[1] - (1.0 - 1.5 * total)).abs() < 1e-12);
    }

    #[test]
    fn noise_too_short() {
        let noise = generate_noise(1, 0.1, 1, 1).unwrap();
        let err = simulate_path(&decay(), &dvector![1.0], &zero_control(0), TimeGrid::new(0.1, 2), &noise);
        assert!(err.is_err());
    }
}
