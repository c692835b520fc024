//! Indexed instance representation used by the solvers.
//!
//! View ids are mapped to bit positions (sorted by id for determinism) so
//! required sets and configurations become `u64` masks, and per-tenant
//! demands become `(mask, value)` pairs with the reuse boost already folded
//! into the value. Built once per solver entry point; the hot loops never
//! touch strings or sets.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{BatchInstance, Configuration, TenantId, ViewId};

pub(crate) const MAX_MASK_VIEWS: usize = 64;

#[derive(Debug, Clone)]
pub(crate) struct CompactTenant {
    pub id: TenantId,
    pub weight: f64,
    /// (required-views mask, effective byte value) per query.
    pub queries: Vec<(u64, f64)>,
    /// Best standalone utility within the full budget.
    pub max_utility: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Compact {
    pub view_ids: Vec<ViewId>,
    pub view_sizes: Vec<u64>,
    pub budget: u64,
    pub tenants: Vec<CompactTenant>,
}

impl Compact {
    pub fn build(instance: &BatchInstance) -> Result<Self> {
        let mut views: Vec<(ViewId, u64)> = instance
            .candidate_views()
            .iter()
            .map(|v| (v.id.clone(), v.size_bytes))
            .collect();
        views.sort_by(|a, b| a.0.cmp(&b.0));
        if views.len() > MAX_MASK_VIEWS {
            return Err(Error::TooManyViews {
                count: views.len(),
                limit: MAX_MASK_VIEWS,
            });
        }
        let index: BTreeMap<&ViewId, usize> =
            views.iter().enumerate().map(|(i, (id, _))| (id, i)).collect();
        let view_ids: Vec<ViewId> = views.iter().map(|(id, _)| id.clone()).collect();
        let view_sizes: Vec<u64> = views.iter().map(|(_, s)| *s).collect();

        let mut tenants = Vec::with_capacity(instance.tenants().len());
        for t in instance.tenants() {
            let mut queries = Vec::new();
            for d in instance.demands(&t.id) {
                let mut mask = 0u64;
                for v in &d.required {
                    mask |= 1u64 << index[v];
                }
                let mut value = d.value_bytes as f64;
                if instance.boost_factor() > 1.0
                    && d.required
                        .iter()
                        .all(|v| instance.cached_view_ids().contains(v))
                {
                    value *= instance.boost_factor();
                }
                if value > 0.0 {
                    queries.push((mask, value));
                }
            }
            tenants.push(CompactTenant {
                id: t.id.clone(),
                weight: t.weight,
                queries,
                max_utility: 0.0,
            });
        }
        let mut compact = Compact {
            view_ids,
            view_sizes,
            budget: instance.cache_budget_bytes(),
            tenants,
        };
        for i in 0..compact.tenants.len() {
            compact.tenants[i].max_utility = crate::welfare::max_coverage_value(
                &compact.view_sizes,
                compact.budget,
                &compact.tenants[i].queries,
            );
        }
        Ok(compact)
    }

    pub fn mask_size(&self, mask: u64) -> u64 {
        let mut total = 0u64;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            total += self.view_sizes[i];
            m &= m - 1;
        }
        total
    }

    pub fn mask_to_configuration(&self, mask: u64) -> Configuration {
        let sizes: BTreeMap<ViewId, u64> = self
            .view_ids
            .iter()
            .cloned()
            .zip(self.view_sizes.iter().copied())
            .collect();
        let mut ids = Vec::new();
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            ids.push(self.view_ids[i].clone());
            m &= m - 1;
        }
        Configuration::new(ids, &sizes).expect("mask views come from the catalog")
    }

    pub fn configuration_to_mask(&self, cfg: &Configuration) -> Result<u64> {
        let mut mask = 0u64;
        for v in cfg.views() {
            match self.view_ids.binary_search(v) {
                Ok(i) => mask |= 1u64 << i,
                Err(_) => return Err(Error::UnknownView(v.0.clone())),
            }
        }
        Ok(mask)
    }

    /// Raw utility of a configuration mask for tenant `i`.
    pub fn utility_mask(&self, i: usize, mask: u64) -> f64 {
        self.tenants[i]
            .queries
            .iter()
            .filter(|(req, _)| req & !mask == 0)
            .map(|(_, v)| v)
            .sum()
    }

    /// Indices of tenants with positive standalone utility, in input order.
    pub fn active(&self) -> Vec<usize> {
        (0..self.tenants.len())
            .filter(|&i| self.tenants[i].max_utility > 0.0)
            .collect()
    }

    pub fn tenant_index(&self, id: &TenantId) -> Result<usize> {
        self.tenants
            .iter()
            .position(|t| &t.id == id)
            .ok_or_else(|| Error::UnknownTenant(id.0.clone()))
    }
}
