use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::config::{ExperimentConfig, LiftingSelector};
use super::metrics::{compute_rmse, mean_std, trace_fluctuation};
use crate::error::{invalid, Result};
use crate::filtering::{koopman_filter_step, carleman_filter_step, run_filter, FilterState, FilterTrace};
use crate::lifting::{
    build_koopman_generators, carleman_embed, LiftedBilinearSystem, Monomial, ObservableDictionary,
    PolynomialSystem, TruncationPolicy,
};
use crate::paper::{paper_dictionary, paper_lifted_system, paper_monomials, paper_system};
use crate::sde::{generate_noise_stream, simulate_coupled, simulate_path, zero_control, TimeGrid, Trajectory};

pub const PROCESS_STREAM: u64 = 0;
pub const MEASUREMENT_STREAM: u64 = 1;

/// A lifted model ready for filtering, with the indices of its `x1` and
/// `x2` states.
#[derive(Debug, Clone)]
pub struct PreparedLifting {
    pub selector: LiftingSelector,
    pub system: LiftedBilinearSystem,
    pub dictionary: ObservableDictionary,
    pub state_index: [usize; 2],
    /// Ordering, state names and truncation report.
    pub metadata: String,
}

pub fn prepare_lifting(cfg: &ExperimentConfig, selector: LiftingSelector) -> Result<PreparedLifting> {
    let params = &cfg.params;
    let poly = paper_system(params, cfg.coupling)?;
    match selector {
        LiftingSelector::KoopmanPaper => {
            let system = paper_lifted_system(params, cfg.mode, cfg.coupling)?;
            let dictionary = paper_dictionary();
            let mut metadata = format!(
                "lifting: koopman-paper\nmode: {}\nnoise coupling: {}\nstates:\n",
                cfg.mode.name(),
                cfg.coupling.name()
            );
            for (i, name) in dictionary.names().iter().enumerate() {
                metadata.push_str(&format!("  {}: {name}\n", i + 1));
            }
            metadata.push_str("truncation: row 1 expanded around (x01, x02), hard-coded\n");
            Ok(PreparedLifting { selector, system, dictionary, state_index: [1, 2], metadata })
        }
        LiftingSelector::KoopmanGeneric => {
            let monomials = paper_monomials();
            let dictionary = ObservableDictionary::from_monomials(monomials.clone())?;
            let build = build_koopman_generators(&dictionary, &poly, &DVector::zeros(0), TruncationPolicy::Drop)?;
            let mut metadata = format!(
                "lifting: koopman-generic\nnoise coupling: {}\nstates:\n",
                cfg.coupling.name()
            );
            for (i, m) in monomials.iter().enumerate() {
                metadata.push_str(&format!("  {}: {m}\n", i + 1));
            }
            metadata.push_str("truncation:\n");
            metadata.push_str(&build.report.to_text());
            Ok(PreparedLifting {
                selector,
                system: build.system,
                dictionary,
                state_index: linear_indices(&monomials)?,
                metadata,
            })
        }
        LiftingSelector::Carleman(order) => {
            let emb = carleman_embed(&poly, order)?;
            let metadata = format!("noise coupling: {}\n{}", cfg.coupling.name(), emb.metadata());
            Ok(PreparedLifting {
                selector,
                dictionary: emb.dictionary(),
                state_index: linear_indices(&emb.monomials)?,
                system: emb.system,
                metadata,
            })
        }
    }
}

fn linear_indices(monomials: &[Monomial]) -> Result<[usize; 2]> {
    let find = |i: usize| {
        monomials
            .iter()
            .position(|m| *m == Monomial::var(2, i))
            .ok_or_else(|| invalid(format!("dictionary lacks x{}", i + 1)))
    };
    Ok([find(0)?, find(1)?])
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Ok,
    Failed(String),
}

/// Metrics of one filter on one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub status: RunStatus,
    /// RMSE of the `x1`, `x2` estimates against the truth path.
    pub rmse: [f64; 2],
    /// Terminal variances of the `x1`, `x2` estimates.
    pub p_final: [f64; 2],
    /// Smallest and largest variance of each estimate over the horizon.
    pub p_min: [f64; 2],
    pub p_max: [f64; 2],
    pub projections: usize,
    /// Filter loop only.
    pub wall_ms: f64,
}

impl RunRecord {
    fn failed(seed: u64, message: String) -> Self {
        Self {
            seed,
            status: RunStatus::Failed(message),
            rmse: [f64::NAN; 2],
            p_final: [f64::NAN; 2],
            p_min: [f64::NAN; 2],
            p_max: [f64::NAN; 2],
            projections: 0,
            wall_ms: 0.0,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodReport {
    pub selector: LiftingSelector,
    pub state_dim: usize,
    pub runs: Vec<RunRecord>,
    /// [`trace_fluctuation`] of the `x1`, `x2` variance traces over the
    /// successful runs.
    pub fluctuation: [f64; 2],
}

impl MethodReport {
    pub fn name(&self) -> String {
        self.selector.name()
    }

    pub fn failed(&self) -> usize {
        self.runs.iter().filter(|r| !r.is_ok()).count()
    }

    pub fn projections(&self) -> usize {
        self.runs.iter().map(|r| r.projections).sum()
    }

    /// Mean and standard deviation of the filter wall clock over successful runs.
    pub fn wall_ms(&self) -> (f64, f64) {
        let ms: Vec<f64> = self.runs.iter().filter(|r| r.is_ok()).map(|r| r.wall_ms).collect();
        mean_std(&ms)
    }

    pub fn mean_rmse(&self) -> [f64; 2] {
        let ok: Vec<&RunRecord> = self.runs.iter().filter(|r| r.is_ok()).collect();
        let avg = |j: usize| mean_std(&ok.iter().map(|r| r.rmse[j]).collect::<Vec<_>>()).0;
        [avg(0), avg(1)]
    }
}

/// Paths of the first seed, kept for CSV output.
#[derive(Debug, Clone)]
pub struct SampleRun {
    pub seed: u64,
    pub truth: Trajectory,
    pub observations: Vec<DVector<f64>>,
    pub traces: Vec<(LiftingSelector, FilterTrace)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub seeds: Vec<u64>,
    pub methods: Vec<MethodReport>,
    pub sample: Option<SampleRun>,
}

/// Truth path and observation increments `dy_k = h(x_k) dt + r1 dη_k` of one seed.
pub fn simulate_truth(
    cfg: &ExperimentConfig,
    poly: &PolynomialSystem,
    seed: u64,
) -> Result<(Trajectory, Vec<DVector<f64>>)> {
    let grid = TimeGrid::from_horizon(cfg.params.dt, cfg.params.horizon);
    let x0 = DVector::from_column_slice(&cfg.params.x0);
    let noise = generate_noise_stream(seed, PROCESS_STREAM, grid.dt, grid.steps, poly.r())?;
    let truth = simulate_path(poly, &x0, &zero_control(poly.d()), grid, &noise)?;
    let eta = generate_noise_stream(seed, MEASUREMENT_STREAM, grid.dt, grid.steps, poly.p())?;
    let r1 = poly.measurement_noise();
    let observations = (0..grid.steps)
        .map(|k| poly.measure(&truth.states[k]) * grid.dt + eta.row(k) * r1)
        .collect();
    Ok((truth, observations))
}

/// Truth path and the selected lifted path on the process noise of `seed`.
pub fn simulate_lifted_pair(
    cfg: &ExperimentConfig,
    lifting: &PreparedLifting,
    seed: u64,
) -> Result<(Trajectory, Trajectory)> {
    let poly = paper_system(&cfg.params, cfg.coupling)?;
    let grid = TimeGrid::from_horizon(cfg.params.dt, cfg.params.horizon);
    let x0 = DVector::from_column_slice(&cfg.params.x0);
    let noise = generate_noise_stream(seed, PROCESS_STREAM, grid.dt, grid.steps, poly.r())?;
    simulate_coupled(&poly, &lifting.system, &lifting.dictionary, &x0, grid, &noise)
}

/// One filter over a prepared observation record. The timer covers the
/// filter loop only.
pub fn run_single_filter(
    cfg: &ExperimentConfig,
    lifting: &PreparedLifting,
    observations: &[DVector<f64>],
) -> Result<(FilterTrace, f64)> {
    let x0 = DVector::from_column_slice(&cfg.params.x0);
    let m = lifting.system.dim();
    let initial = FilterState::new(lifting.dictionary.lift(&x0)?, DMatrix::identity(m, m) * cfg.p0_scale);
    let dt = cfg.params.dt;
    let system = &lifting.system;
    let start = Instant::now();
    let trace = match lifting.selector {
        LiftingSelector::KoopmanPaper => run_filter(initial, observations, dt, cfg.cov_stride, |fs, dy, d| {
            koopman_filter_step(system, fs, dy, dt, d)
        }),
        _ => run_filter(initial, observations, dt, cfg.cov_stride, |fs, dy, d| {
            carleman_filter_step(system, fs, dy, dt, d)
        }),
    }?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((trace, wall_ms))
}

fn evaluate(
    seed: u64,
    lifting: &PreparedLifting,
    truth: &Trajectory,
    trace: &FilterTrace,
    wall_ms: f64,
) -> Result<RunRecord> {
    let estimate = Trajectory {
        times: trace.times.clone(),
        states: trace.means.clone(),
    };
    let rmse = compute_rmse(truth, &estimate, &[0, 1], &lifting.state_index)?;
    let [i, j] = lifting.state_index;
    let var = [trace.variance_column(i), trace.variance_column(j)];
    let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
    Ok(RunRecord {
        seed,
        status: RunStatus::Ok,
        rmse: [rmse[0], rmse[1]],
        p_final: [*var[0].last().unwrap_or(&f64::NAN), *var[1].last().unwrap_or(&f64::NAN)],
        p_min: [fold(&var[0], f64::min, f64::INFINITY), fold(&var[1], f64::min, f64::INFINITY)],
        p_max: [fold(&var[0], f64::max, f64::NEG_INFINITY), fold(&var[1], f64::max, f64::NEG_INFINITY)],
        projections: trace.diagnostics.projections,
        wall_ms,
    })
}

/// Runs every configured filter on `num_runs` seeds. Setup errors abort;
/// a failing run is recorded and the remaining runs continue.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.num_runs < 1 {
        return Err(invalid("num_runs must be at least 1"));
    }
    if cfg.filters.is_empty() {
        return Err(invalid("no filters selected"));
    }
    cfg.params.validate()?;
    let poly = paper_system(&cfg.params, cfg.coupling)?;
    let liftings = cfg
        .filters
        .iter()
        .map(|&s| prepare_lifting(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let seeds = cfg.seeds();
    let mut methods: Vec<MethodReport> = liftings
        .iter()
        .map(|l| MethodReport {
            selector: l.selector,
            state_dim: l.system.dim(),
            runs: Vec::with_capacity(seeds.len()),
            fluctuation: [f64::NAN; 2],
        })
        .collect();
    let mut variance_traces: Vec<[Vec<Vec<f64>>; 2]> = vec![[Vec::new(), Vec::new()]; liftings.len()];
    let mut sample = None;

    for (run, &seed) in seeds.iter().enumerate() {
        let (truth, observations) = match simulate_truth(cfg, &poly, seed) {
            Ok(v) => v,
            Err(e) => {
                for m in &mut methods {
                    m.runs.push(RunRecord::failed(seed, format!("truth: {e}")));
                }
                continue;
            }
        };
        let mut traces = Vec::new();
        for (k, lifting) in liftings.iter().enumerate() {
            let outcome = run_single_filter(cfg, lifting, &observations)
                .and_then(|(trace, ms)| evaluate(seed, lifting, &truth, &trace, ms).map(|r| (trace, r)));
            match outcome {
                Ok((trace, record)) => {
                    let [i, j] = lifting.state_index;
                    variance_traces[k][0].push(trace.variance_column(i));
                    variance_traces[k][1].push(trace.variance_column(j));
                    methods[k].runs.push(record);
                    if run == 0 {
                        traces.push((lifting.selector, trace));
                    }
                }
                Err(e) => methods[k].runs.push(RunRecord::failed(seed, e.to_string())),
            }
        }
        if run == 0 {
            sample = Some(SampleRun { seed, truth, observations, traces });
        }
    }
    for (m, v) in methods.iter_mut().zip(&variance_traces) {
        m.fluctuation = [trace_fluctuation(&v[0]), trace_fluctuation(&v[1])];
    }
    Ok(ExperimentReport { seeds, methods, sample })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(cfg: &mut ExperimentConfig) {
        cfg.params.horizon = 0.05;
        cfg.num_runs = 3;
    }

    #[test]
    fn zero_horizon_gives_zero_rmse() {
        let mut cfg = ExperimentConfig::default();
        cfg.params.horizon = 0.0;
        cfg.num_runs = 1;
        let rep = run_experiment(&cfg).unwrap();
        for m in &rep.methods {
            assert_eq!(m.runs.len(), 1);
            assert!(m.runs[0].is_ok());
            assert_eq!(m.runs[0].rmse, [0.0, 0.0]);
        }
        assert_eq!(rep.sample.unwrap().truth.len(), 1);
    }

    #[test]
    fn both_filters_report_every_seed() {
        let mut cfg = ExperimentConfig::default();
        small(&mut cfg);
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(rep.seeds, vec![1, 2, 3]);
        assert_eq!(rep.methods.len(), 2);
        assert_eq!(rep.methods[0].state_dim, 6);
        assert_eq!(rep.methods[1].state_dim, 5);
        for m in &rep.methods {
            assert_eq!(m.runs.len(), 3);
            assert_eq!(m.failed(), 0);
            assert!(m.wall_ms().0 >= 0.0);
            assert!(m.fluctuation.iter().all(|f| f.is_finite()));
        }
        let sample = rep.sample.unwrap();
        assert_eq!(sample.truth.len(), 51);
        assert_eq!(sample.observations.len(), 50);
        assert_eq!(sample.traces.len(), 2);
    }

    #[test]
    fn deterministic_metrics() {
        let mut cfg = ExperimentConfig::default();
        small(&mut cfg);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        for (ma, mb) in a.methods.iter().zip(&b.methods) {
            for (ra, rb) in ma.runs.iter().zip(&mb.runs) {
                assert_eq!((ra.rmse, ra.p_final, ra.projections), (rb.rmse, rb.p_final, rb.projections));
            }
        }
    }

    #[test]
    fn failing_runs_are_recorded() {
        let mut cfg = ExperimentConfig::default();
        small(&mut cfg);
        cfg.params.a = 1e200;
        let rep = run_experiment(&cfg).unwrap();
        for m in &rep.methods {
            assert_eq!(m.runs.len(), 3);
            assert_eq!(m.failed(), 3);
            assert!(matches!(m.runs[0].status, RunStatus::Failed(_)));
        }
    }

    #[test]
    fn state_indices() {
        let cfg = ExperimentConfig::default();
        assert_eq!(prepare_lifting(&cfg, LiftingSelector::KoopmanPaper).unwrap().state_index, [1, 2]);
        assert_eq!(prepare_lifting(&cfg, LiftingSelector::Carleman(3)).unwrap().state_index, [0, 1]);
        let g = prepare_lifting(&cfg, LiftingSelector::KoopmanGeneric).unwrap();
        assert_eq!(g.state_index, [0, 1]);
        assert_eq!(g.system.dim(), 5);
    }
}
