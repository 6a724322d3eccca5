//! Run artifacts: one CSV per run plus a JSON report.
//!
//! CSV bodies are rendered with fixed formats so identical configurations and
//! seeds produce byte-identical files; wall-clock timing only enters when the
//! run was configured to record it.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::experiment::runner::RunRecord;
use crate::experiment::summary::Summary;

/// `traj{T}_rep{RRR}_{raw|opt}.csv`
pub fn run_file_name(record: &RunRecord) -> String {
    format!(
        "traj{}_rep{:03}_{}.csv",
        record.trajectory,
        record.repetition,
        if record.optimized { "opt" } else { "raw" }
    )
}

/// Renders one run as CSV text: header plus one row per trajectory node.
pub fn csv_body(record: &RunRecord) -> String {
    let n = record.samples.len();
    let mut out = String::with_capacity(64 * (n + 1));
    out.push_str("step,time_s,eta1,eta2,eta,sector,solver_us,pose_err_m\n");
    for k in 0..n {
        let s = &record.samples[k];
        out.push_str(&format!(
            "{},{:.3},{:.9},{:.9},{:.9},{},{},{:.6e}\n",
            k,
            k as f64 * record.dt,
            s.eta1,
            s.eta2,
            s.eta,
            record.sectors[k].as_char(),
            record.solver_us[k],
            record.pose_errors[k],
        ));
    }
    out
}

/// Writes every run to `dir`, creating it if needed. Returns the paths.
pub fn write_runs(dir: &Path, records: &[RunRecord]) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(records.len());
    for record in records {
        let path = dir.join(run_file_name(record));
        fs::write(&path, csv_body(record))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes the JSON report to `dir/summary.json`.
pub fn write_summary(dir: &Path, summary: &Summary) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("summary.json");
    let mut body = serde_json::to_string_pretty(summary).map_err(io::Error::other)?;
    body.push('\n');
    fs::write(&path, body)?;
    Ok(path)
}
