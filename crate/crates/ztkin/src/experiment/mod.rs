//! The face-milling comparison experiment.
//!
//! Synthesis of square machining contours on a work cube, paired
//! raw-vs-optimized tracking runs from shared random starts, aggregation into
//! improvement statistics, and deterministic CSV/JSON artifacts.

pub mod io;
pub mod runner;
pub mod summary;
pub mod trajectory;

pub use io::{csv_body, run_file_name, write_runs, write_summary};
pub use runner::{
    run_comparison, ActionGains, ActionSet, ComparisonOutcome, OptimizeMode, RunParams, RunRecord,
    StartRegion,
};
pub use summary::{distribution, summarize, Distribution, Summary};
pub use trajectory::{build_trajectory, Face, Sector, TrajectoryParams, TrajectorySpec};
