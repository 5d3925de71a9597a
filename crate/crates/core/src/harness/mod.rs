//! Configuration, seeded Monte Carlo runs of the example and CSV output.

mod config;
mod experiment;
mod metrics;
mod output;

pub use config::{parse_config, ExperimentConfig, LiftingSelector, PRESET_PAPER_S4};
pub use experiment::{
    prepare_lifting, run_experiment, run_single_filter, simulate_lifted_pair, simulate_truth,
    ExperimentReport, MethodReport, PreparedLifting, RunRecord, RunStatus, SampleRun,
    MEASUREMENT_STREAM, PROCESS_STREAM,
};
pub use metrics::{compute_rmse, mean_std, trace_fluctuation};
pub use output::{
    write_experiment, write_file, write_filter_csvs, write_lifted_csv, write_matrices,
    write_observations_csv, write_report_csv, write_summary_csv, write_timing_csv,
    write_truth_csv,
};
