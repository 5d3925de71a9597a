use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::experiment::{ExperimentReport, MethodReport, PreparedLifting, RunStatus};
use crate::error::Result;
use crate::filtering::FilterTrace;
use crate::sde::{fmt_f64, Trajectory};

/// Creates `path` and streams `body` into it; returns the path.
pub fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<PathBuf> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(path.to_path_buf())
}

fn sanitize(message: &str) -> String {
    message.replace([',', '\n', '\r'], ";")
}

/// `method,seed,status,rmse_x1,rmse_x2,p11_final,p22_final,projections`.
///
/// Deterministic for a fixed configuration; wall clock goes to
/// [`write_timing_csv`].
pub fn write_report_csv<W: Write>(methods: &[MethodReport], out: &mut W) -> Result<()> {
    writeln!(out, "method,seed,status,rmse_x1,rmse_x2,p11_final,p22_final,projections")?;
    for m in methods {
        let name = m.name();
        for r in &m.runs {
            let status = match &r.status {
                RunStatus::Ok => "ok".to_string(),
                RunStatus::Failed(e) => format!("failed: {}", sanitize(e)),
            };
            writeln!(
                out,
                "{name},{},{status},{},{},{},{},{}",
                r.seed,
                fmt_f64(r.rmse[0]),
                fmt_f64(r.rmse[1]),
                fmt_f64(r.p_final[0]),
                fmt_f64(r.p_final[1]),
                r.projections
            )?;
        }
    }
    Ok(())
}

/// `method,seed,wall_ms`.
pub fn write_timing_csv<W: Write>(methods: &[MethodReport], out: &mut W) -> Result<()> {
    writeln!(out, "method,seed,wall_ms")?;
    for m in methods {
        for r in &m.runs {
            writeln!(out, "{},{},{:.6}", m.name(), r.seed, r.wall_ms)?;
        }
    }
    Ok(())
}

/// One row per method: run counts, mean RMSE, variance-trace fluctuation,
/// projection events and wall-clock mean/stddev.
pub fn write_summary_csv<W: Write>(methods: &[MethodReport], out: &mut W) -> Result<()> {
    writeln!(
        out,
        "method,states,runs,failed,rmse_x1_mean,rmse_x2_mean,fluct_p11,fluct_p22,projections,wall_ms_mean,wall_ms_std"
    )?;
    for m in methods {
        let rmse = m.mean_rmse();
        let (mean, std) = m.wall_ms();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:.6},{:.6}",
            m.name(),
            m.state_dim,
            m.runs.len(),
            m.failed(),
            fmt_f64(rmse[0]),
            fmt_f64(rmse[1]),
            fmt_f64(m.fluctuation[0]),
            fmt_f64(m.fluctuation[1]),
            m.projections(),
            mean,
            std
        )?;
    }
    Ok(())
}

pub fn write_truth_csv(truth: &Trajectory, path: &Path) -> Result<PathBuf> {
    let labels: Vec<String> = (1..=truth.dim()).map(|j| format!("x{j}")).collect();
    write_file(path, |w| truth.write_csv_labeled(w, &labels))
}

pub fn write_lifted_csv(lifted: &Trajectory, path: &Path) -> Result<PathBuf> {
    let labels: Vec<String> = (1..=lifted.dim()).map(|j| format!("z{j}")).collect();
    write_file(path, |w| lifted.write_csv_labeled(w, &labels))
}

/// `t,dy_1..` with the increment over `[t, t + dt)`.
pub fn write_observations_csv(observations: &[nalgebra::DVector<f64>], dt: f64, path: &Path) -> Result<PathBuf> {
    write_file(path, |w| {
        let p = observations.first().map_or(0, |v| v.len());
        write!(w, "t")?;
        for j in 1..=p {
            write!(w, ",dy_{j}")?;
        }
        writeln!(w)?;
        for (k, dy) in observations.iter().enumerate() {
            write!(w, "{}", fmt_f64(k as f64 * dt))?;
            for v in dy.iter() {
                write!(w, ",{}", fmt_f64(*v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

/// `filter_<name>.csv` and, when the trace holds full covariances,
/// `filter_<name>_cov.csv`.
pub fn write_filter_csvs(name: &str, trace: &FilterTrace, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = vec![write_file(&dir.join(format!("filter_{name}.csv")), |w| trace.write_csv(w))?];
    if !trace.full_covariances.is_empty() {
        written.push(write_file(&dir.join(format!("filter_{name}_cov.csv")), |w| {
            trace.write_covariance_csv(w)
        })?);
    }
    Ok(written)
}

/// `matrices_<name>.csv` and `matrices_<name>.txt` (ordering, state names,
/// truncation report).
pub fn write_matrices(lifting: &PreparedLifting, dir: &Path) -> Result<Vec<PathBuf>> {
    let name = lifting.selector.name();
    Ok(vec![
        write_file(&dir.join(format!("matrices_{name}.csv")), |w| lifting.system.write_csv(w))?,
        write_file(&dir.join(format!("matrices_{name}.txt")), |w| {
            w.write_all(lifting.metadata.as_bytes())?;
            Ok(())
        })?,
    ])
}

/// report.csv, timing.csv, summary.csv and the paths of the first seed.
pub fn write_experiment(report: &ExperimentReport, dt: f64, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = vec![
        write_file(&dir.join("report.csv"), |w| write_report_csv(&report.methods, w))?,
        write_file(&dir.join("timing.csv"), |w| write_timing_csv(&report.methods, w))?,
        write_file(&dir.join("summary.csv"), |w| write_summary_csv(&report.methods, w))?,
    ];
    if let Some(sample) = &report.sample {
        written.push(write_truth_csv(&sample.truth, &dir.join("truth.csv"))?);
        written.push(write_observations_csv(&sample.observations, dt, &dir.join("observations.csv"))?);
        for (selector, trace) in &sample.traces {
            written.extend(write_filter_csvs(&selector.name(), trace, dir)?);
        }
    }
    Ok(written)
}
