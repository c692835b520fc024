//! Deterministic batch-loop simulation: drain a window of arrivals, plan an
//! allocation, sample one cache configuration, charge cache loads, execute
//! against a parametric I/O time model, carry the cache forward.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allocators::{plan, Policy, PolicyParams};
use crate::error::{Error, Result};
use crate::model::{
    sample_configuration_seeded, BatchInstance, Configuration, Query, QueryDemand, TenantId,
};
use crate::workload::{generate_trace, ScenarioSpec};

/// I/O cost model. Bytes served from the sampled configuration move at
/// cache bandwidth, everything else at disk bandwidth, and each query pays
/// a fixed overhead. Newly cached bytes are charged against disk bandwidth
/// at batch start unless `cache_load_charged` is off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeModel {
    pub fixed_overhead_s: f64,
    pub disk_bandwidth_bytes_per_s: f64,
    pub cache_bandwidth_bytes_per_s: f64,
    pub cache_load_charged: bool,
}

impl Default for TimeModel {
    fn default() -> Self {
        TimeModel {
            fixed_overhead_s: 0.5,
            disk_bandwidth_bytes_per_s: 500e6,
            cache_bandwidth_bytes_per_s: 10e9,
            cache_load_charged: true,
        }
    }
}

impl TimeModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.disk_bandwidth_bytes_per_s > 0.0
            && self.cache_bandwidth_bytes_per_s > self.disk_bandwidth_bytes_per_s
            && self.cache_bandwidth_bytes_per_s.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "need cache bandwidth ({}) > disk bandwidth ({}) > 0",
                self.cache_bandwidth_bytes_per_s, self.disk_bandwidth_bytes_per_s
            )));
        }
        if !(self.fixed_overhead_s >= 0.0 && self.fixed_overhead_s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "fixed overhead {} must be non-negative",
                self.fixed_overhead_s
            )));
        }
        Ok(())
    }

    /// Runtime of one query given how its bytes split between cache and disk.
    pub fn query_runtime_s(&self, hit_bytes: u64, miss_bytes: u64) -> f64 {
        self.fixed_overhead_s
            + hit_bytes as f64 / self.cache_bandwidth_bytes_per_s
            + miss_bytes as f64 / self.disk_bandwidth_bytes_per_s
    }
}

/// Cross-batch statefulness: when `stateful`, a demand whose whole required
/// set is already resident gets its value boosted by `gamma`, biasing the
/// planner towards keeping such views cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub stateful: bool,
    pub gamma: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions::stateless()
    }
}

impl SimOptions {
    pub fn stateless() -> Self {
        SimOptions {
            stateful: false,
            gamma: 1.0,
        }
    }

    pub fn boosted(gamma: f64) -> Self {
        SimOptions {
            stateful: true,
            gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 1.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "reuse boost {} must be >= 1",
                self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub batch: usize,
    /// The configuration sampled for this batch (the previous one if the
    /// batch drained no queries).
    pub configuration: Configuration,
    pub cached_bytes: u64,
    pub newly_cached_bytes: u64,
    pub load_time_s: f64,
    pub makespan_s: f64,
    pub queries: usize,
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    /// Position in the generated trace, stable across policies on the same
    /// (spec, seed) so runs pair up query by query.
    pub query_id: usize,
    pub tenant: TenantId,
    pub batch: usize,
    pub hit: bool,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub scenario: String,
    pub policy: String,
    pub seed: u64,
    pub cache_budget_bytes: u64,
    pub batch_s: f64,
    pub wall_time_s: f64,
    pub batches: Vec<BatchRecord>,
    pub queries: Vec<QueryRecord>,
}

impl SimResult {
    pub fn query_count(&self) -> usize {
        self.queries.len()
    }

    pub fn hit_count(&self) -> usize {
        self.queries.iter().filter(|q| q.hit).count()
    }

    pub fn tenants(&self) -> BTreeSet<TenantId> {
        self.queries.iter().map(|q| q.tenant.clone()).collect()
    }
}

/// Runs the batch loop for one (scenario, policy, seed). Per batch: drain
/// the window's arrivals, build the instance (boosting resident views when
/// stateful), plan, sample one configuration, charge the load of newly
/// cached bytes, execute. A query is a hit iff its full required set is in
/// the sampled configuration. The batch makespan is the longest per-tenant
/// runtime sum (tenants execute in parallel pools) plus load time; empty
/// batches advance time by the window length. Deterministic per seed.
pub fn run(
    spec: &ScenarioSpec,
    policy: Policy,
    params: &PolicyParams,
    time_model: &TimeModel,
    options: &SimOptions,
    seed: u64,
) -> Result<SimResult> {
    time_model.validate()?;
    options.validate()?;
    let trace = generate_trace(spec, seed)?;
    simulate(spec, &trace, policy, params, time_model, options, seed)
}

/// The statically partitioned baseline on the identical trace: same spec
/// and seed under `Policy::Static`, so per-query records align by
/// `query_id` for speedup ratios.
pub fn paired_baseline(spec: &ScenarioSpec, time_model: &TimeModel, seed: u64) -> Result<SimResult> {
    run(
        spec,
        Policy::Static,
        &PolicyParams::with_seed(seed),
        time_model,
        &SimOptions::stateless(),
        seed,
    )
}

fn simulate(
    spec: &ScenarioSpec,
    trace: &[Query],
    policy: Policy,
    params: &PolicyParams,
    time_model: &TimeModel,
    options: &SimOptions,
    seed: u64,
) -> Result<SimResult> {
    let catalog = spec.catalog.build();
    let sizes = catalog.view_sizes();
    let tenants = spec.tenant_models();
    // stream 0 of the run seed feeds per-batch plan and sample seeds;
    // tenant arrival streams use streams 1.. of the same seed
    let mut master = ChaCha8Rng::seed_from_u64(seed);

    let mut by_batch: Vec<Vec<(usize, &Query)>> = vec![Vec::new(); spec.batches];
    for (qid, q) in trace.iter().enumerate() {
        let b = ((q.arrival_s / spec.batch_s) as usize).min(spec.batches - 1);
        by_batch[b].push((qid, q));
    }

    let mut cache = Configuration::empty();
    let mut wall = 0.0;
    let mut batches = Vec::with_capacity(spec.batches);
    let mut queries_out: Vec<QueryRecord> = Vec::with_capacity(trace.len());

    for (b, arrivals) in by_batch.iter().enumerate() {
        let plan_seed: u64 = master.gen();
        let sample_seed: u64 = master.gen();
        if arrivals.is_empty() {
            wall += spec.batch_s;
            batches.push(BatchRecord {
                batch: b,
                configuration: cache.clone(),
                cached_bytes: cache.total_size_bytes(),
                newly_cached_bytes: 0,
                load_time_s: 0.0,
                makespan_s: spec.batch_s,
                queries: 0,
                hits: 0,
            });
            continue;
        }

        let mut demands: BTreeMap<TenantId, Vec<QueryDemand>> = BTreeMap::new();
        for (_, q) in arrivals {
            demands
                .entry(q.tenant.clone())
                .or_default()
                .push(QueryDemand {
                    required: q.required.clone(),
                    value_bytes: q.bytes_read,
                });
        }
        let (boost, resident) = if options.stateful {
            (options.gamma, cache.views().clone())
        } else {
            (1.0, BTreeSet::new())
        };
        let instance = BatchInstance::with_cache_state(
            tenants.clone(),
            catalog.views.clone(),
            spec.cache_budget_bytes,
            demands,
            boost,
            resident,
        )?;
        let mut batch_params = params.clone();
        batch_params.seed = plan_seed;
        batch_params.prune.seed = plan_seed;
        let outcome = plan(policy, &instance, &batch_params)?;
        let cfg = sample_configuration_seeded(&outcome.allocation.normalized()?, sample_seed)?;

        let newly_cached_bytes: u64 = cfg
            .views()
            .iter()
            .filter(|v| !cache.contains(v))
            .map(|v| sizes[v])
            .sum();
        let load_time_s = if time_model.cache_load_charged {
            newly_cached_bytes as f64 / time_model.disk_bandwidth_bytes_per_s
        } else {
            0.0
        };

        let mut per_tenant: BTreeMap<&TenantId, f64> = BTreeMap::new();
        let mut hits = 0usize;
        for (qid, q) in arrivals {
            let hit = cfg.covers(&q.required);
            let hit_bytes: u64 = q
                .required
                .iter()
                .filter(|v| cfg.contains(v))
                .map(|v| sizes[v])
                .sum();
            let miss_bytes: u64 = q
                .required
                .iter()
                .filter(|v| !cfg.contains(v))
                .map(|v| sizes[v])
                .sum();
            let runtime_s = time_model.query_runtime_s(hit_bytes, miss_bytes);
            if hit {
                hits += 1;
            }
            *per_tenant.entry(&q.tenant).or_insert(0.0) += runtime_s;
            queries_out.push(QueryRecord {
                query_id: *qid,
                tenant: q.tenant.clone(),
                batch: b,
                hit,
                runtime_s,
            });
        }
        let makespan_s = per_tenant.values().fold(0.0f64, |a, &x| a.max(x)) + load_time_s;
        wall += makespan_s;
        batches.push(BatchRecord {
            batch: b,
            configuration: cfg.clone(),
            cached_bytes: cfg.total_size_bytes(),
            newly_cached_bytes,
            load_time_s,
            makespan_s,
            queries: arrivals.len(),
            hits,
        });
        cache = cfg;
    }

    Ok(SimResult {
        scenario: spec.name.clone(),
        policy: policy.name().to_string(),
        seed,
        cache_budget_bytes: spec.cache_budget_bytes,
        batch_s: spec.batch_s,
        wall_time_s: wall,
        batches,
        queries: queries_out,
    })
}
