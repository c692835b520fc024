//! Seeded random instances for audits and solver cross-checks.
//!
//! Every draw is fully determined by an [`InstanceFamily`] and a seed, so
//! any failure reported against an instance can be regenerated from two
//! numbers. The construction guarantees each tenant at least one demand
//! that fits the budget, keeping standalone optima positive.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{BatchInstance, QueryDemand, Tenant, TenantId, View, ViewId};

#[derive(Debug, Clone)]
pub struct InstanceFamily {
    /// Tenant count is drawn uniformly from `2..=max_tenants`.
    pub max_tenants: usize,
    /// View count is drawn uniformly from `2..=max_views`.
    pub max_views: usize,
    /// Mix in tenant weights other than 1.
    pub weighted: bool,
}

impl InstanceFamily {
    pub fn new(max_tenants: usize, max_views: usize, weighted: bool) -> Self {
        InstanceFamily {
            max_tenants: max_tenants.max(2),
            max_views: max_views.max(2),
            weighted,
        }
    }
}

/// One random instance. A quarter of draws use unit view sizes, the rest
/// sizes in 1..=8; the budget always admits the smallest view and usually
/// not the whole catalog.
pub fn random_instance(family: &InstanceFamily, seed: u64) -> Result<BatchInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=family.max_tenants);
    let v = rng.gen_range(2..=family.max_views);

    let unit_sizes = rng.gen_bool(0.25);
    let sizes: Vec<u64> = (0..v)
        .map(|_| if unit_sizes { 1 } else { rng.gen_range(1..=8) })
        .collect();
    let views: Vec<View> = sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| View::new(format!("v{:02}", i + 1), s))
        .collect();
    let total: u64 = sizes.iter().sum();
    let smallest = *sizes.iter().min().unwrap();
    let cheapest = sizes.iter().position(|&s| s == smallest).unwrap();
    let budget = rng.gen_range(smallest..=(total * 7 / 10).max(smallest));

    let tenants: Vec<Tenant> = (0..n)
        .map(|i| {
            let w = if family.weighted {
                rng.gen_range(1..=4) as f64 * 0.5
            } else {
                1.0
            };
            Tenant::new(format!("t{}", i + 1), w)
        })
        .collect();

    let mut demands: BTreeMap<TenantId, Vec<QueryDemand>> = BTreeMap::new();
    for tenant in &tenants {
        let count = rng.gen_range(1..=3);
        let mut list = Vec::with_capacity(count + 1);
        let mut coverable = false;
        for _ in 0..count {
            let mut k = rng.gen_range(1..=2.min(v));
            if v >= 3 && rng.gen_bool(0.15) {
                k = 3;
            }
            let picked: Vec<usize> = sample(&mut rng, v, k).into_vec();
            coverable |= picked.iter().map(|&i| sizes[i]).sum::<u64>() <= budget;
            let required: Vec<ViewId> = picked.iter().map(|&i| views[i].id.clone()).collect();
            list.push(QueryDemand::new(required, rng.gen_range(1..=10)));
        }
        if !coverable {
            list.push(QueryDemand::new(
                [views[cheapest].id.clone()],
                rng.gen_range(1..=10),
            ));
        }
        demands.insert(tenant.id.clone(), list);
    }

    BatchInstance::new(tenants, views, budget, demands)
}
