//! CSV emission with pinned column orders, shared by runs and sweeps.
//! Floats are written with the shortest round-trip formatting so files
//! are byte-identical across repeated executions.

use std::path::Path;

use anyhow::{Context, Result};

use cachefair::metrics::MetricsReport;
use cachefair::sim::SimResult;

pub const SUMMARY_HEADER: [&str; 8] = [
    "scenario",
    "policy",
    "seed",
    "throughput_per_min",
    "fairness_index",
    "avg_cache_util",
    "hit_ratio",
    "convergence_batches",
];

pub const PER_BATCH_HEADER: [&str; 4] = ["batch", "configuration", "cached_bytes", "makespan_s"];

pub const PER_QUERY_HEADER: [&str; 6] = [
    "query_id",
    "tenant",
    "batch",
    "hit",
    "runtime_s",
    "baseline_runtime_s",
];

/// One finished (scenario, policy, seed) execution with its paired
/// statically partitioned baseline.
pub struct RunArtifacts {
    pub label: String,
    pub policy: &'static str,
    pub seed: u64,
    pub result: SimResult,
    pub baseline: SimResult,
    pub report: MetricsReport,
}

pub fn summary_row(run: &RunArtifacts) -> [String; 8] {
    [
        run.label.clone(),
        run.policy.to_string(),
        run.seed.to_string(),
        run.report.throughput_per_min.to_string(),
        run.report.fairness_index.to_string(),
        run.report.avg_cache_utilization.to_string(),
        run.report.hit_ratio.to_string(),
        run.report.convergence_batches.to_string(),
    ]
}

fn open(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_summary(path: &Path, rows: &[[String; 8]]) -> Result<()> {
    let mut w = open(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_per_batch(path: &Path, result: &SimResult) -> Result<()> {
    let mut w = open(path)?;
    w.write_record(PER_BATCH_HEADER)?;
    for b in &result.batches {
        w.write_record([
            b.batch.to_string(),
            b.configuration.joined_ids(),
            b.cached_bytes.to_string(),
            b.makespan_s.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_per_query(path: &Path, result: &SimResult, baseline: &SimResult) -> Result<()> {
    let mut w = open(path)?;
    w.write_record(PER_QUERY_HEADER)?;
    for (a, b) in result.queries.iter().zip(&baseline.queries) {
        w.write_record([
            a.query_id.to_string(),
            a.tenant.to_string(),
            a.batch.to_string(),
            a.hit.to_string(),
            a.runtime_s.to_string(),
            b.runtime_s.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn print_metrics(run: &RunArtifacts) {
    println!("{} {} seed {}", run.label, run.policy, run.seed);
    println!("  throughput_per_min  {:.4}", run.report.throughput_per_min);
    println!("  fairness_index      {:.4}", run.report.fairness_index);
    println!("  avg_cache_util      {:.4}", run.report.avg_cache_utilization);
    println!("  hit_ratio           {:.4}", run.report.hit_ratio);
}
