//! Aggregation of comparison runs into a serializable report.
//!
//! Pairs raw and optimized runs by (trajectory, repetition), turns the pairs
//! into percent-improvement distributions, and pools per-sector transmission
//! means so the feed-direction effect is visible per trajectory.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::runner::{ComparisonOutcome, RunRecord};
use crate::experiment::trajectory::Sector;
use crate::metrics::MetricSample;

/// Five-number summary plus the mean.
#[derive(Debug, Clone, Serialize)]
pub struct Distribution {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

/// Quantile by linear interpolation on the sorted sample.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let idx = p * (n - 1) as f64;
    let lo = idx.floor() as usize;
    let hi = idx.ceil() as usize;
    let frac = idx - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Builds the five-number summary of a non-empty sample.
pub fn distribution(values: &[f64]) -> Result<Distribution> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput(
            "distribution input contains non-finite values".into(),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(Distribution {
        count: sorted.len(),
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: *sorted.last().unwrap(),
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
    })
}

/// Percent change of a quantity across all completed pairs.
#[derive(Debug, Clone, Serialize)]
pub struct PairedImprovement {
    pub pairs: usize,
    /// Distribution of `100 (opt - raw) / raw` over the pairs.
    pub percent: Distribution,
    /// Fraction of pairs where the optimized arm ended up strictly worse.
    pub negative_fraction: f64,
}

/// Mean transmission ratio per contour sector for one arm.
#[derive(Debug, Clone, Serialize)]
pub struct SectorMeans {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Mean over the x-feed sectors (b, d) divided by the mean over the
    /// transverse sectors (a, c); `None` if the denominator vanishes.
    pub along_x_over_transverse: Option<f64>,
}

/// Aggregates for one arm (raw or optimized) of one trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct ArmStats {
    pub runs: usize,
    /// Blended metric at the tracking start, across runs.
    pub start_eta: Distribution,
    /// Contour-mean blended metric, across runs.
    pub mean_eta: Distribution,
    pub mean_eta1: Distribution,
    pub mean_eta2: Distribution,
    pub mean_reach_seconds: f64,
    pub mean_tracking_violations: f64,
    pub max_tracking_error: f64,
    pub sector_rtr: SectorMeans,
}

/// Per-trajectory report.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub trajectory: u8,
    pub raw: Option<ArmStats>,
    pub optimized: Option<ArmStats>,
    pub improvement_start_eta: Option<PairedImprovement>,
    pub improvement_mean_eta: Option<PairedImprovement>,
    pub improvement_mean_eta1: Option<PairedImprovement>,
    pub improvement_mean_eta2: Option<PairedImprovement>,
}

/// Pair improvements pooled over every trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct OverallImprovement {
    pub start_eta: PairedImprovement,
    pub mean_eta: PairedImprovement,
    pub mean_eta1: PairedImprovement,
    pub mean_eta2: PairedImprovement,
}

/// Full report for one comparison sweep.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub attempted_pairs: u32,
    pub failed_pairs: u32,
    pub completed_runs: usize,
    /// Mean solver step time pooled over every solve call of every run.
    pub mean_step_us: f64,
    /// Worst per-run mean step time.
    pub max_mean_step_us: f64,
    pub trajectories: Vec<TrajectorySummary>,
    pub overall: Option<OverallImprovement>,
}

fn sector_means(records: &[&RunRecord]) -> SectorMeans {
    let mut sums = [0.0f64; 4];
    let mut counts = [0usize; 4];
    for rec in records {
        for (sample, sector) in rec.samples.iter().zip(&rec.sectors) {
            let i = *sector as usize;
            sums[i] += sample.eta2;
            counts[i] += 1;
        }
    }
    let mean = |i: usize| {
        if counts[i] == 0 {
            0.0
        } else {
            sums[i] / counts[i] as f64
        }
    };
    let (a, b, c, d) = (
        mean(Sector::A as usize),
        mean(Sector::B as usize),
        mean(Sector::C as usize),
        mean(Sector::D as usize),
    );
    let transverse = 0.5 * (a + c);
    let along_x = 0.5 * (b + d);
    SectorMeans {
        a,
        b,
        c,
        d,
        along_x_over_transverse: (transverse > 0.0).then(|| along_x / transverse),
    }
}

fn arm_stats(records: &[&RunRecord]) -> Result<ArmStats> {
    let start: Vec<f64> = records.iter().map(|r| r.samples[0].eta).collect();
    let mean_eta: Vec<f64> = records.iter().map(|r| r.mean_eta()).collect();
    let mean_eta1: Vec<f64> = records
        .iter()
        .map(|r| r.mean_component(|s: &MetricSample| s.eta1))
        .collect();
    let mean_eta2: Vec<f64> = records
        .iter()
        .map(|r| r.mean_component(|s: &MetricSample| s.eta2))
        .collect();
    Ok(ArmStats {
        runs: records.len(),
        start_eta: distribution(&start)?,
        mean_eta: distribution(&mean_eta)?,
        mean_eta1: distribution(&mean_eta1)?,
        mean_eta2: distribution(&mean_eta2)?,
        mean_reach_seconds: records.iter().map(|r| r.reach_seconds).sum::<f64>()
            / records.len() as f64,
        mean_tracking_violations: records
            .iter()
            .map(|r| r.tracking_violations as f64)
            .sum::<f64>()
            / records.len() as f64,
        max_tracking_error: records
            .iter()
            .map(|r| r.max_tracking_error)
            .fold(0.0, f64::max),
        sector_rtr: sector_means(records),
    })
}

/// Percent changes for one extractor over the given (raw, opt) pairs.
fn improvement(
    pairs: &[(&RunRecord, &RunRecord)],
    value: impl Fn(&RunRecord) -> f64,
) -> Option<PairedImprovement> {
    if pairs.is_empty() {
        return None;
    }
    let percents: Vec<f64> = pairs
        .iter()
        .map(|(raw, opt)| {
            let base = value(raw);
            100.0 * (value(opt) - base) / base
        })
        .collect();
    if percents.iter().any(|p| !p.is_finite()) {
        return None;
    }
    let negative = percents.iter().filter(|p| **p < 0.0).count();
    Some(PairedImprovement {
        pairs: pairs.len(),
        percent: distribution(&percents).ok()?,
        negative_fraction: negative as f64 / pairs.len() as f64,
    })
}

fn improvements_for(
    pairs: &[(&RunRecord, &RunRecord)],
) -> (
    Option<PairedImprovement>,
    Option<PairedImprovement>,
    Option<PairedImprovement>,
    Option<PairedImprovement>,
) {
    (
        improvement(pairs, |r| r.samples[0].eta),
        improvement(pairs, |r| r.mean_eta()),
        improvement(pairs, |r| r.mean_component(|s| s.eta1)),
        improvement(pairs, |r| r.mean_component(|s| s.eta2)),
    )
}

/// Builds the full report from a comparison outcome.
pub fn summarize(outcome: &ComparisonOutcome) -> Result<Summary> {
    let records = &outcome.records;

    // Pool timing over every solve call.
    let total_calls: u64 = records.iter().map(|r| r.solver_calls).sum();
    let mean_step_us = if total_calls == 0 {
        0.0
    } else {
        records
            .iter()
            .map(|r| r.mean_step_us * r.solver_calls as f64)
            .sum::<f64>()
            / total_calls as f64
    };
    let max_mean_step_us = records.iter().map(|r| r.mean_step_us).fold(0.0, f64::max);

    let mut by_trajectory: BTreeMap<u8, Vec<&RunRecord>> = BTreeMap::new();
    for rec in records {
        by_trajectory.entry(rec.trajectory).or_default().push(rec);
    }

    let mut trajectories = Vec::new();
    let mut all_pairs: Vec<(&RunRecord, &RunRecord)> = Vec::new();
    for (traj, recs) in &by_trajectory {
        let raw: Vec<&RunRecord> = recs.iter().copied().filter(|r| !r.optimized).collect();
        let opt: Vec<&RunRecord> = recs.iter().copied().filter(|r| r.optimized).collect();

        // Pair arms by repetition.
        let mut pairs: Vec<(&RunRecord, &RunRecord)> = Vec::new();
        let opt_by_rep: BTreeMap<u32, &RunRecord> =
            opt.iter().map(|r| (r.repetition, *r)).collect();
        for r in &raw {
            if let Some(o) = opt_by_rep.get(&r.repetition) {
                pairs.push((r, o));
            }
        }
        all_pairs.extend(&pairs);

        let (start, mean, e1, e2) = improvements_for(&pairs);
        trajectories.push(TrajectorySummary {
            trajectory: *traj,
            raw: if raw.is_empty() {
                None
            } else {
                Some(arm_stats(&raw)?)
            },
            optimized: if opt.is_empty() {
                None
            } else {
                Some(arm_stats(&opt)?)
            },
            improvement_start_eta: start,
            improvement_mean_eta: mean,
            improvement_mean_eta1: e1,
            improvement_mean_eta2: e2,
        });
    }

    let overall = {
        let (start, mean, e1, e2) = improvements_for(&all_pairs);
        match (start, mean, e1, e2) {
            (Some(start_eta), Some(mean_eta), Some(mean_eta1), Some(mean_eta2)) => {
                Some(OverallImprovement {
                    start_eta,
                    mean_eta,
                    mean_eta1,
                    mean_eta2,
                })
            }
            _ => None,
        }
    };

    Ok(Summary {
        attempted_pairs: outcome.attempted_pairs,
        failed_pairs: outcome.failed_pairs,
        completed_runs: records.len(),
        mean_step_us,
        max_mean_step_us,
        trajectories,
        overall,
    })
}
