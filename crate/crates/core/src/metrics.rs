//! Run-level metrics: throughput, weighted-speedup fairness index, cache
//! utilization, hit ratio, and convergence tracking of the index over batch
//! prefixes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TenantId;
use crate::sim::SimResult;

/// Checkpoint spacing and stability threshold for convergence tracking:
/// the index is recomputed every 2 batches and considered converged at the
/// first checkpoint after which it never again moves by this much.
pub const CONVERGENCE_DELTA: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub throughput_per_min: f64,
    pub fairness_index: f64,
    pub avg_cache_utilization: f64,
    pub hit_ratio: f64,
    /// Mean per-query speedup over the paired baseline, per tenant.
    pub speedups: BTreeMap<TenantId, f64>,
    /// Weighted tenants that issued no queries and were dropped from the
    /// fairness index.
    pub dropped_tenants: Vec<TenantId>,
    /// (prefix batches, fairness index) every 2 batches.
    pub convergence: Vec<(usize, f64)>,
    pub convergence_batches: usize,
}

/// Queries served per minute of simulated wall time.
pub fn throughput(result: &SimResult) -> Result<f64> {
    if !(result.wall_time_s > 0.0) {
        return Err(Error::ZeroDuration);
    }
    Ok(60.0 * result.query_count() as f64 / result.wall_time_s)
}

/// Mean over batches of cached bytes over budget.
pub fn avg_cache_utilization(result: &SimResult) -> Result<f64> {
    if result.batches.is_empty() {
        return Err(Error::InvalidParameter("result has no batches".into()));
    }
    let budget = result.cache_budget_bytes as f64;
    Ok(result
        .batches
        .iter()
        .map(|b| b.cached_bytes as f64 / budget)
        .sum::<f64>()
        / result.batches.len() as f64)
}

/// Fraction of queries whose full required set was cached.
pub fn hit_ratio(result: &SimResult) -> Result<f64> {
    if result.queries.is_empty() {
        return Err(Error::NoQueries);
    }
    Ok(result.hit_count() as f64 / result.query_count() as f64)
}

fn check_aligned(result: &SimResult, baseline: &SimResult) -> Result<()> {
    if result.queries.len() != baseline.queries.len() {
        return Err(Error::MisalignedBaseline);
    }
    for (a, b) in result.queries.iter().zip(&baseline.queries) {
        if a.query_id != b.query_id || a.tenant != b.tenant {
            return Err(Error::MisalignedBaseline);
        }
    }
    Ok(())
}

/// Per-tenant mean of per-query speedups baseline/policy over queries in
/// batches before `limit`. `None` when the prefix holds no queries.
fn prefix_speedups(
    result: &SimResult,
    baseline: &SimResult,
    limit: usize,
) -> Result<Option<BTreeMap<TenantId, f64>>> {
    let mut sums: BTreeMap<&TenantId, (f64, usize)> = BTreeMap::new();
    for (a, b) in result.queries.iter().zip(&baseline.queries) {
        if a.batch >= limit {
            continue;
        }
        if !(a.runtime_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "query {} has non-positive runtime",
                a.query_id
            )));
        }
        let e = sums.entry(&a.tenant).or_insert((0.0, 0));
        e.0 += b.runtime_s / a.runtime_s;
        e.1 += 1;
    }
    if sums.is_empty() {
        return Ok(None);
    }
    Ok(Some(
        sums.into_iter()
            .map(|(t, (s, n))| (t.clone(), s / n as f64))
            .collect(),
    ))
}

/// Mean speedup over the paired baseline for every tenant with queries.
pub fn mean_speedups(result: &SimResult, baseline: &SimResult) -> Result<BTreeMap<TenantId, f64>> {
    check_aligned(result, baseline)?;
    prefix_speedups(result, baseline, usize::MAX)?.ok_or(Error::NoQueries)
}

fn jain(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let s: f64 = xs.iter().sum();
    let q: f64 = xs.iter().map(|x| x * x).sum();
    if q <= 0.0 {
        return 1.0;
    }
    (s * s) / (n * q)
}

fn weighted_index(
    speedups: &BTreeMap<TenantId, f64>,
    weights: &BTreeMap<TenantId, f64>,
) -> Result<f64> {
    let mut xs = Vec::with_capacity(speedups.len());
    for (t, x) in speedups {
        let w = weights
            .get(t)
            .ok_or_else(|| Error::UnknownTenant(t.0.clone()))?;
        if !(*w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tenant `{t}` weight {w} must be positive"
            )));
        }
        xs.push(x / w);
    }
    Ok(jain(&xs))
}

/// The equality index over entitlement-normalized mean speedups X_i/λ_i:
/// (Σ X_i/λ_i)² / (n · Σ (X_i/λ_i)²). 1 iff all normalized speedups are
/// equal; tenants without queries are dropped.
pub fn fairness_index(
    result: &SimResult,
    baseline: &SimResult,
    weights: &BTreeMap<TenantId, f64>,
) -> Result<f64> {
    weighted_index(&mean_speedups(result, baseline)?, weights)
}

/// The fairness index on batch prefixes every 2 batches (plus the full run
/// when the batch count is odd). Prefixes without queries are skipped.
pub fn convergence_series(
    result: &SimResult,
    baseline: &SimResult,
    weights: &BTreeMap<TenantId, f64>,
) -> Result<Vec<(usize, f64)>> {
    check_aligned(result, baseline)?;
    let total = result.batches.len();
    let mut checkpoints: Vec<usize> = (1..).map(|i| 2 * i).take_while(|k| *k <= total).collect();
    if total % 2 == 1 {
        checkpoints.push(total);
    }
    let mut out = Vec::new();
    for k in checkpoints {
        if let Some(speedups) = prefix_speedups(result, baseline, k)? {
            out.push((k, weighted_index(&speedups, weights)?));
        }
    }
    Ok(out)
}

/// First checkpoint after which the series never again moves by
/// [`CONVERGENCE_DELTA`]; `total` when it keeps drifting (or the series is
/// too short to judge).
pub fn converged_at(series: &[(usize, f64)], total: usize) -> usize {
    if series.len() < 2 {
        return total;
    }
    let deltas: Vec<f64> = series
        .windows(2)
        .map(|w| (w[1].1 - w[0].1).abs())
        .collect();
    for i in 0..deltas.len() {
        if deltas[i..].iter().all(|d| *d < CONVERGENCE_DELTA) {
            return series[i + 1].0;
        }
    }
    total
}

/// Everything at once for one (run, paired baseline) pair.
pub fn report(
    result: &SimResult,
    baseline: &SimResult,
    weights: &BTreeMap<TenantId, f64>,
) -> Result<MetricsReport> {
    let speedups = mean_speedups(result, baseline)?;
    let fairness = weighted_index(&speedups, weights)?;
    let convergence = convergence_series(result, baseline, weights)?;
    let convergence_batches = converged_at(&convergence, result.batches.len());
    let dropped_tenants = weights
        .keys()
        .filter(|t| !speedups.contains_key(*t))
        .cloned()
        .collect();
    Ok(MetricsReport {
        throughput_per_min: throughput(result)?,
        fairness_index: fairness,
        avg_cache_utilization: avg_cache_utilization(result)?,
        hit_ratio: hit_ratio(result)?,
        speedups,
        dropped_tenants,
        convergence,
        convergence_batches,
    })
}
