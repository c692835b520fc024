//! Domain model for randomized shared-cache allocation.
//!
//! A batch of tenant queries is planned against a byte-budgeted cache. A
//! `Configuration` is a feasible set of views; an `Allocation` is a
//! probability distribution over configurations. Utilities are counted in
//! exact bytes: a query contributes its byte value iff every view it needs is
//! in the configuration. Scaled utility divides by the tenant's best
//! standalone utility, so all fairness objectives work on [0, 1] rates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ViewId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TenantId(pub String);

impl ViewId {
    pub fn new(s: impl Into<String>) -> Self {
        ViewId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TenantId {
    pub fn new(s: impl Into<String>) -> Self {
        TenantId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ViewId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for TenantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A cacheable view (materialized result) with its exact byte size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct View {
    pub id: ViewId,
    pub size_bytes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl View {
    pub fn new(id: impl Into<String>, size_bytes: u64) -> Self {
        View {
            id: ViewId::new(id),
            size_bytes,
            label: None,
        }
    }
}

/// A tenant with its endowment weight (relative cache entitlement).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tenant {
    pub id: TenantId,
    pub weight: f64,
}

impl Tenant {
    pub fn new(id: impl Into<String>, weight: f64) -> Self {
        Tenant {
            id: TenantId::new(id),
            weight,
        }
    }
}

/// One query: the views it needs all of, and the bytes it reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub tenant: TenantId,
    pub arrival_s: f64,
    pub required: BTreeSet<ViewId>,
    pub bytes_read: u64,
}

/// Per-tenant demand inside a batch instance: required view set and the byte
/// value the covering configuration earns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryDemand {
    pub required: BTreeSet<ViewId>,
    pub value_bytes: u64,
}

impl QueryDemand {
    pub fn new<I: IntoIterator<Item = ViewId>>(required: I, value_bytes: u64) -> Self {
        QueryDemand {
            required: required.into_iter().collect(),
            value_bytes,
        }
    }
}

/// A feasible cache content: a set of views and their total footprint.
/// Construction resolves sizes against a catalog, so the size is always
/// consistent with the id set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    views: BTreeSet<ViewId>,
    total_size_bytes: u64,
}

impl Configuration {
    pub fn new<I>(views: I, catalog: &BTreeMap<ViewId, u64>) -> Result<Self>
    where
        I: IntoIterator<Item = ViewId>,
    {
        let views: BTreeSet<ViewId> = views.into_iter().collect();
        let mut total = 0u64;
        for v in &views {
            match catalog.get(v) {
                Some(sz) => total += sz,
                None => return Err(Error::UnknownView(v.0.clone())),
            }
        }
        Ok(Configuration {
            views,
            total_size_bytes: total,
        })
    }

    pub fn empty() -> Self {
        Configuration {
            views: BTreeSet::new(),
            total_size_bytes: 0,
        }
    }

    pub fn views(&self) -> &BTreeSet<ViewId> {
        &self.views
    }

    pub fn total_size_bytes(&self) -> u64 {
        self.total_size_bytes
    }

    pub fn contains(&self, v: &ViewId) -> bool {
        self.views.contains(v)
    }

    pub fn covers(&self, required: &BTreeSet<ViewId>) -> bool {
        required.is_subset(&self.views)
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    /// Semicolon-joined id list, stable because the id set is ordered.
    pub fn joined_ids(&self) -> String {
        let ids: Vec<&str> = self.views.iter().map(|v| v.as_str()).collect();
        ids.join(";")
    }
}

/// A (sub-)distribution over configurations. Stored canonically: support
/// sorted by view set, duplicates merged, zero-mass entries dropped. Total
/// mass may be below 1 while a solver is still assembling it; sampling
/// requires mass 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    support: Vec<(Configuration, f64)>,
}

pub const MASS_TOLERANCE: f64 = 1e-9;

impl Allocation {
    pub fn new(support: Vec<(Configuration, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<Configuration, f64> = BTreeMap::new();
        for (cfg, p) in support {
            if p < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "negative probability {p} in allocation support"
                )));
            }
            *merged.entry(cfg).or_insert(0.0) += p;
        }
        let support: Vec<(Configuration, f64)> =
            merged.into_iter().filter(|(_, p)| *p > 0.0).collect();
        Ok(Allocation { support })
    }

    /// Mass 1 on a single configuration.
    pub fn deterministic(cfg: Configuration) -> Self {
        Allocation {
            support: vec![(cfg, 1.0)],
        }
    }

    pub fn support(&self) -> &[(Configuration, f64)] {
        &self.support
    }

    pub fn total_mass(&self) -> f64 {
        self.support.iter().map(|(_, p)| p).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= MASS_TOLERANCE
    }

    /// Rescales so the total mass is exactly 1. Errors on zero mass.
    pub fn normalized(&self) -> Result<Allocation> {
        let m = self.total_mass();
        if m <= 0.0 {
            return Err(Error::UnnormalizedAllocation { mass: m });
        }
        Ok(Allocation {
            support: self
                .support
                .iter()
                .map(|(c, p)| (c.clone(), p / m))
                .collect(),
        })
    }

    pub fn probability_of(&self, cfg: &Configuration) -> f64 {
        self.support
            .iter()
            .find(|(c, _)| c == cfg)
            .map(|(_, p)| *p)
            .unwrap_or(0.0)
    }

    /// Largest absolute probability difference against `other`, treating
    /// missing configurations as probability 0.
    pub fn max_probability_gap(&self, other: &Allocation) -> f64 {
        let mut gap: f64 = 0.0;
        for (c, p) in &self.support {
            gap = gap.max((p - other.probability_of(c)).abs());
        }
        for (c, p) in &other.support {
            gap = gap.max((p - self.probability_of(c)).abs());
        }
        gap
    }
}

/// Draws a configuration from a normalized allocation.
pub fn sample_configuration(allocation: &Allocation, rng: &mut impl Rng) -> Result<Configuration> {
    let mass = allocation.total_mass();
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::UnnormalizedAllocation { mass });
    }
    if allocation.support.is_empty() {
        return Err(Error::UnnormalizedAllocation { mass: 0.0 });
    }
    let u: f64 = rng.gen::<f64>() * mass;
    let mut acc = 0.0;
    for (cfg, p) in &allocation.support {
        acc += p;
        if u < acc {
            return Ok(cfg.clone());
        }
    }
    Ok(allocation.support.last().unwrap().0.clone())
}

/// Seed-addressed convenience wrapper around [`sample_configuration`].
pub fn sample_configuration_seeded(allocation: &Allocation, seed: u64) -> Result<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_configuration(allocation, &mut rng)
}

/// Everything a planner needs for one batch: tenants, candidate views, the
/// byte budget, per-tenant demands, and the reuse-boost state.
///
/// `boost_factor` multiplies a query's byte value when all of its required
/// views are already cached (`cached_view_ids`); with `boost_factor` 1 or an
/// empty cached set the instance is stateless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchInstance {
    tenants: Vec<Tenant>,
    candidate_views: Vec<View>,
    cache_budget_bytes: u64,
    query_utilities: BTreeMap<TenantId, Vec<QueryDemand>>,
    boost_factor: f64,
    cached_view_ids: BTreeSet<ViewId>,
}

impl BatchInstance {
    pub fn new(
        tenants: Vec<Tenant>,
        candidate_views: Vec<View>,
        cache_budget_bytes: u64,
        query_utilities: BTreeMap<TenantId, Vec<QueryDemand>>,
    ) -> Result<Self> {
        Self::with_cache_state(
            tenants,
            candidate_views,
            cache_budget_bytes,
            query_utilities,
            1.0,
            BTreeSet::new(),
        )
    }

    pub fn with_cache_state(
        tenants: Vec<Tenant>,
        candidate_views: Vec<View>,
        cache_budget_bytes: u64,
        query_utilities: BTreeMap<TenantId, Vec<QueryDemand>>,
        boost_factor: f64,
        cached_view_ids: BTreeSet<ViewId>,
    ) -> Result<Self> {
        let mut tenant_ids = BTreeSet::new();
        for t in &tenants {
            if !(t.weight > 0.0 && t.weight.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "tenant `{}` weight must be positive and finite",
                    t.id
                )));
            }
            if !tenant_ids.insert(t.id.clone()) {
                return Err(Error::DuplicateId(t.id.0.clone()));
            }
        }
        let mut view_ids = BTreeSet::new();
        for v in &candidate_views {
            if !view_ids.insert(v.id.clone()) {
                return Err(Error::DuplicateId(v.id.0.clone()));
            }
        }
        if !(boost_factor >= 1.0 && boost_factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "boost factor {boost_factor} must be >= 1"
            )));
        }
        for (tid, demands) in &query_utilities {
            if !tenant_ids.contains(tid) {
                return Err(Error::UnknownTenant(tid.0.clone()));
            }
            for d in demands {
                for v in &d.required {
                    if !view_ids.contains(v) {
                        return Err(Error::UnknownView(v.0.clone()));
                    }
                }
            }
        }
        Ok(BatchInstance {
            tenants,
            candidate_views,
            cache_budget_bytes,
            query_utilities,
            boost_factor,
            cached_view_ids,
        })
    }

    pub fn tenants(&self) -> &[Tenant] {
        &self.tenants
    }

    pub fn tenant(&self, id: &TenantId) -> Result<&Tenant> {
        self.tenants
            .iter()
            .find(|t| &t.id == id)
            .ok_or_else(|| Error::UnknownTenant(id.0.clone()))
    }

    pub fn candidate_views(&self) -> &[View] {
        &self.candidate_views
    }

    pub fn cache_budget_bytes(&self) -> u64 {
        self.cache_budget_bytes
    }

    pub fn boost_factor(&self) -> f64 {
        self.boost_factor
    }

    pub fn cached_view_ids(&self) -> &BTreeSet<ViewId> {
        &self.cached_view_ids
    }

    pub fn demands(&self, tenant: &TenantId) -> &[QueryDemand] {
        self.query_utilities
            .get(tenant)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn view_sizes(&self) -> BTreeMap<ViewId, u64> {
        self.candidate_views
            .iter()
            .map(|v| (v.id.clone(), v.size_bytes))
            .collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.tenants.iter().map(|t| t.weight).sum()
    }

    /// The effective byte value of one demand under a configuration: 0 if not
    /// covered, the byte value if covered, boosted when the whole required
    /// set is already cached.
    pub fn demand_value(&self, demand: &QueryDemand, cfg: &Configuration) -> f64 {
        if !cfg.covers(&demand.required) {
            return 0.0;
        }
        let base = demand.value_bytes as f64;
        if self.boost_factor > 1.0 && demand.required.iter().all(|v| self.cached_view_ids.contains(v))
        {
            base * self.boost_factor
        } else {
            base
        }
    }

    /// Tenant utility of a configuration: sum of covered demand values.
    pub fn utility(&self, tenant: &TenantId, cfg: &Configuration) -> Result<f64> {
        self.tenant(tenant)?;
        for v in cfg.views() {
            if !self.candidate_views.iter().any(|cv| &cv.id == v) {
                return Err(Error::UnknownView(v.0.clone()));
            }
        }
        Ok(self
            .demands(tenant)
            .iter()
            .map(|d| self.demand_value(d, cfg))
            .sum())
    }

    /// Expected utility of an allocation, in bytes.
    pub fn expected_utility(&self, tenant: &TenantId, allocation: &Allocation) -> Result<f64> {
        let mut acc = 0.0;
        for (cfg, p) in allocation.support() {
            acc += p * self.utility(tenant, cfg)?;
        }
        Ok(acc)
    }

    /// Scaled utility: expected utility divided by the tenant's best
    /// standalone utility. Errors when that maximum is zero.
    pub fn scaled_utility(&self, tenant: &TenantId, allocation: &Allocation) -> Result<f64> {
        let best = crate::welfare::max_utility(self, tenant)?;
        if best <= 0.0 {
            return Err(Error::ZeroMaxUtility(tenant.0.clone()));
        }
        Ok(self.expected_utility(tenant, allocation)? / best)
    }
}
