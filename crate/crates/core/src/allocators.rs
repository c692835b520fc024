//! Allocation policies behind one dispatch point.
//!
//! | name      | strategy |
//! |-----------|----------|
//! | `static`  | budget split by weight, each tenant packs its share, union cached |
//! | `rsd`     | random serial dictatorship over tenant orders |
//! | `optp`    | deterministic weighted-welfare maximizer |
//! | `mmf`     | pruned pool + lexicographic max-min LP |
//! | `mmf-mw`  | max-min by multiplicative-weights sampling |
//! | `fastpf`  | pruned pool + projected gradient proportional fairness |
//! | `exactpf` | proportional fairness by feasibility search |

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::compact::Compact;
use crate::error::{Error, Result};
use crate::heuristics::{
    lexicographic_mmf, pf_gradient, prune_configurations, PfGradientParams, PruneParams,
};
use crate::model::{Allocation, BatchInstance, TenantId};
use crate::mw::{pf_exact, simple_mmf_mw, MmfMwParams, PfExactParams};
use crate::welfare::{self, solve_coverage_with_base, WelfareMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Policy {
    Static,
    Rsd,
    OptP,
    Mmf,
    MmfMw,
    FastPf,
    ExactPf,
}

impl Policy {
    pub const ALL: [Policy; 7] = [
        Policy::Static,
        Policy::Rsd,
        Policy::OptP,
        Policy::Mmf,
        Policy::MmfMw,
        Policy::FastPf,
        Policy::ExactPf,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Policy::Static => "static",
            Policy::Rsd => "rsd",
            Policy::OptP => "optp",
            Policy::Mmf => "mmf",
            Policy::MmfMw => "mmf-mw",
            Policy::FastPf => "fastpf",
            Policy::ExactPf => "exactpf",
        }
    }

    pub fn from_name(name: &str) -> Result<Policy> {
        Policy::ALL
            .iter()
            .copied()
            .find(|p| p.name() == name)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown policy `{name}` (expected one of: {})",
                    Policy::ALL.map(|p| p.name()).join(", ")
                ))
            })
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct PolicyParams {
    /// Base seed for every randomized stage.
    pub seed: u64,
    /// Tenant count up to which serial dictatorship enumerates all orders.
    pub rsd_exact_limit: usize,
    /// Sampled orders beyond the exact limit.
    pub rsd_samples: usize,
    pub prune: PruneParams,
    pub gradient: PfGradientParams,
    pub exact_pf: PfExactParams,
    pub mmf_mw: MmfMwParams,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            seed: 0,
            rsd_exact_limit: 8,
            rsd_samples: 10_000,
            prune: PruneParams::default(),
            gradient: PfGradientParams::default(),
            exact_pf: PfExactParams::default(),
            mmf_mw: MmfMwParams::default(),
        }
    }
}

impl PolicyParams {
    pub fn with_seed(seed: u64) -> Self {
        let mut p = PolicyParams::default();
        p.seed = seed;
        p.prune.seed = seed;
        p
    }
}

#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub allocation: Allocation,
    /// Tenants with zero standalone utility that the policy ignored.
    pub excluded_tenants: Vec<TenantId>,
    /// Policy-specific scalars (objective values, iteration counts).
    pub diagnostics: BTreeMap<String, f64>,
}

pub fn plan(policy: Policy, instance: &BatchInstance, params: &PolicyParams) -> Result<PlanOutcome> {
    match policy {
        Policy::Static => static_plan(instance),
        Policy::Rsd => rsd_plan(instance, params),
        Policy::OptP => optp_plan(instance),
        Policy::Mmf => {
            let pool = prune_configurations(instance, &params.prune)?;
            let out = lexicographic_mmf(instance, &pool)?;
            let mut diagnostics = BTreeMap::new();
            diagnostics.insert("pool_size".into(), pool.len() as f64);
            diagnostics.insert("stages".into(), out.levels.len() as f64);
            if let Some(first) = out.levels.first() {
                diagnostics.insert("min_rate".into(), *first);
            }
            Ok(PlanOutcome {
                allocation: out.allocation,
                excluded_tenants: out.excluded_tenants,
                diagnostics,
            })
        }
        Policy::MmfMw => {
            let out = simple_mmf_mw(instance, &params.mmf_mw)?;
            let mut diagnostics = BTreeMap::new();
            diagnostics.insert("min_rate".into(), out.min_rate);
            diagnostics.insert("rounds".into(), out.rounds as f64);
            Ok(PlanOutcome {
                allocation: out.allocation,
                excluded_tenants: out.excluded_tenants,
                diagnostics,
            })
        }
        Policy::FastPf => {
            let pool = prune_configurations(instance, &params.prune)?;
            let out = pf_gradient(instance, &pool, &params.gradient)?;
            let mut diagnostics = BTreeMap::new();
            diagnostics.insert("pool_size".into(), pool.len() as f64);
            diagnostics.insert("objective".into(), out.objective);
            diagnostics.insert("kkt_residual".into(), out.kkt_residual);
            diagnostics.insert("iterations".into(), out.iterations as f64);
            Ok(PlanOutcome {
                allocation: out.allocation,
                excluded_tenants: out.excluded_tenants,
                diagnostics,
            })
        }
        Policy::ExactPf => {
            let out = pf_exact(instance, &params.exact_pf)?;
            let mut diagnostics = BTreeMap::new();
            diagnostics.insert("objective".into(), out.objective);
            diagnostics.insert("oracle_calls".into(), out.oracle_calls as f64);
            diagnostics.insert("level".into(), out.q_resolved);
            Ok(PlanOutcome {
                allocation: out.allocation,
                excluded_tenants: out.excluded_tenants,
                diagnostics,
            })
        }
    }
}

/// Each tenant gets `floor(budget * weight_share)` private bytes and packs
/// them greedily for itself; the cache holds the union. Deterministic and
/// oblivious to sharing opportunities, which is exactly what makes it the
/// paired baseline.
pub fn static_plan(instance: &BatchInstance) -> Result<PlanOutcome> {
    let compact = Compact::build(instance)?;
    let total: f64 = compact.tenants.iter().map(|t| t.weight).sum();
    let mut union = 0u64;
    for t in &compact.tenants {
        let share = (instance.cache_budget_bytes() as f64 * t.weight / total).floor() as u64;
        let pick = crate::welfare::solve_coverage(&compact.view_sizes, share, &t.queries);
        union |= pick.mask;
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert(
        "cached_bytes".into(),
        compact.mask_size(union) as f64,
    );
    Ok(PlanOutcome {
        allocation: Allocation::deterministic(compact.mask_to_configuration(union)),
        excluded_tenants: Vec::new(),
        diagnostics,
    })
}

/// Weighted welfare maximizer: all mass on the configuration maximizing
/// the weight-scaled raw byte utility.
pub fn optp_plan(instance: &BatchInstance) -> Result<PlanOutcome> {
    let weights: BTreeMap<TenantId, f64> = instance
        .tenants()
        .iter()
        .map(|t| (t.id.clone(), t.weight))
        .collect();
    let sol = welfare::welfare(instance, &weights, WelfareMode::Raw)?;
    let compact = Compact::build(instance)?;
    let excluded = compact
        .tenants
        .iter()
        .filter(|t| t.max_utility <= 0.0)
        .map(|t| t.id.clone())
        .collect();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("welfare".into(), sol.value);
    Ok(PlanOutcome {
        allocation: Allocation::deterministic(sol.configuration),
        excluded_tenants: excluded,
        diagnostics,
    })
}

/// Serial dictatorship: tenants pick in a random order, each packing the
/// remaining budget with its best extension of what predecessors already
/// cached (shared views cost nothing twice). Orders are enumerated with
/// their draw probabilities up to `rsd_exact_limit` tenants, sampled
/// beyond. Order draws are weight-proportional without replacement, so a
/// tenant leads with probability equal to its weight share.
pub fn rsd_plan(instance: &BatchInstance, params: &PolicyParams) -> Result<PlanOutcome> {
    let compact = Compact::build(instance)?;
    let n = compact.tenants.len();
    let mut memo: BTreeMap<(u64, usize), u64> = BTreeMap::new();
    let mut pick = |base: u64, i: usize, compact: &Compact| -> u64 {
        *memo.entry((base, i)).or_insert_with(|| {
            solve_coverage_with_base(
                &compact.view_sizes,
                compact.budget,
                &compact.tenants[i].queries,
                base,
            )
            .mask
        })
    };

    let mut counts: BTreeMap<u64, f64> = BTreeMap::new();
    let mut orders = 0u64;
    if n <= params.rsd_exact_limit {
        // Depth-first over prefixes; probability multiplies in the weight
        // share of each successive dictator.
        let mut stack: Vec<(Vec<usize>, u64, f64)> = vec![(Vec::new(), 0u64, 1.0)];
        while let Some((prefix, base, prob)) = stack.pop() {
            if prefix.len() == n {
                *counts.entry(base).or_insert(0.0) += prob;
                orders += 1;
                continue;
            }
            let remaining: Vec<usize> =
                (0..n).filter(|i| !prefix.contains(i)).collect();
            let total: f64 = remaining.iter().map(|&i| compact.tenants[i].weight).sum();
            for &i in &remaining {
                let p = compact.tenants[i].weight / total;
                let next_base = pick(base, i, &compact);
                let mut next_prefix = prefix.clone();
                next_prefix.push(i);
                stack.push((next_prefix, next_base, prob * p));
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let samples = params.rsd_samples.max(1);
        for _ in 0..samples {
            let mut remaining: Vec<usize> = (0..n).collect();
            let mut base = 0u64;
            while !remaining.is_empty() {
                let total: f64 = remaining.iter().map(|&i| compact.tenants[i].weight).sum();
                let mut draw = rng.gen::<f64>() * total;
                let mut chosen = remaining.len() - 1;
                for (pos, &i) in remaining.iter().enumerate() {
                    draw -= compact.tenants[i].weight;
                    if draw <= 0.0 {
                        chosen = pos;
                        break;
                    }
                }
                let i = remaining.remove(chosen);
                base = pick(base, i, &compact);
            }
            *counts.entry(base).or_insert(0.0) += 1.0 / samples as f64;
            orders += 1;
        }
    }

    let support: Vec<_> = counts
        .iter()
        .map(|(&mask, &p)| (compact.mask_to_configuration(mask), p))
        .collect();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("orders".into(), orders as f64);
    diagnostics.insert("support".into(), counts.len() as f64);
    Ok(PlanOutcome {
        allocation: Allocation::new(support)?.normalized()?,
        excluded_tenants: Vec::new(),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Configuration, QueryDemand, Tenant, View, ViewId};
    use rand::Rng;

    fn instance(
        views: Vec<View>,
        budget: u64,
        spec: Vec<(&str, f64, Vec<(Vec<&str>, u64)>)>,
    ) -> BatchInstance {
        let tenants: Vec<Tenant> = spec.iter().map(|(id, w, _)| Tenant::new(*id, *w)).collect();
        let demands = spec
            .into_iter()
            .map(|(id, _, qs)| {
                (
                    TenantId::new(id),
                    qs.into_iter()
                        .map(|(req, v)| QueryDemand::new(req.into_iter().map(ViewId::new), v))
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        BatchInstance::new(tenants, views, budget, demands).unwrap()
    }

    fn unit_views(ids: &[&str]) -> Vec<View> {
        ids.iter().map(|id| View::new(*id, 1)).collect()
    }

    #[test]
    fn policy_names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(Policy::from_name(p.name()).unwrap(), p);
        }
        assert!(Policy::from_name("nope").is_err());
    }

    #[test]
    fn static_shares_union_under_the_budget() {
        let inst = instance(
            vec![View::new("a", 5), View::new("b", 5)],
            10,
            vec![
                ("t1", 1.0, vec![(vec!["a"], 7)]),
                ("t2", 1.0, vec![(vec!["b"], 7)]),
            ],
        );
        let out = static_plan(&inst).unwrap();
        let cfg = &out.allocation.support()[0].0;
        assert_eq!(cfg.joined_ids(), "a;b");
    }

    #[test]
    fn static_leaves_an_idle_share_unused() {
        let inst = instance(
            vec![View::new("a", 5), View::new("b", 5)],
            10,
            vec![("t1", 1.0, vec![(vec!["a"], 7)]), ("idle", 1.0, vec![])],
        );
        let out = static_plan(&inst).unwrap();
        let cfg = &out.allocation.support()[0].0;
        assert_eq!(cfg.joined_ids(), "a");
    }

    #[test]
    fn optp_puts_all_mass_on_the_welfare_maximizer() {
        let inst = instance(
            unit_views(&["a", "b"]),
            1,
            vec![
                ("t1", 1.0, vec![(vec!["a"], 3)]),
                ("t2", 1.0, vec![(vec!["b"], 5)]),
            ],
        );
        let out = optp_plan(&inst).unwrap();
        assert_eq!(out.allocation.support().len(), 1);
        assert_eq!(out.allocation.support()[0].0.joined_ids(), "b");
        assert_eq!(out.diagnostics["welfare"], 5.0);
    }

    #[test]
    fn rsd_unit_budget_splits_by_first_pick() {
        // Only the first dictator's pick fits, so the lottery is uniform
        // over the three standalone favorites.
        let inst = instance(
            unit_views(&["p", "r", "s"]),
            1,
            vec![
                ("a", 1.0, vec![(vec!["r"], 1)]),
                ("b", 1.0, vec![(vec!["s"], 1)]),
                ("c", 1.0, vec![(vec!["p"], 1)]),
            ],
        );
        let out = rsd_plan(&inst, &PolicyParams::default()).unwrap();
        let sizes = inst.view_sizes();
        for ids in [vec!["p"], vec!["r"], vec!["s"]] {
            let cfg =
                Configuration::new(ids.into_iter().map(ViewId::new), &sizes).unwrap();
            let p = out.allocation.probability_of(&cfg);
            assert!((p - 1.0 / 3.0).abs() < 1e-12, "probability {p}");
        }
        assert_eq!(out.diagnostics["orders"], 6.0);
    }

    #[test]
    fn rsd_successor_rides_free_on_shared_views() {
        // Both tenants want v; whoever goes second still gets it.
        let inst = instance(
            unit_views(&["v", "w"]),
            1,
            vec![
                ("t1", 1.0, vec![(vec!["v"], 1)]),
                ("t2", 1.0, vec![(vec!["v"], 1)]),
            ],
        );
        let out = rsd_plan(&inst, &PolicyParams::default()).unwrap();
        assert_eq!(out.allocation.support().len(), 1);
        assert_eq!(out.allocation.support()[0].0.joined_ids(), "v");
    }

    fn random_small_instance(rng: &mut ChaCha8Rng) -> BatchInstance {
        let nviews = rng.gen_range(2..=5usize);
        let views: Vec<View> = (0..nviews)
            .map(|i| View::new(format!("v{i}"), rng.gen_range(1..=4)))
            .collect();
        let budget = rng.gen_range(2..=8);
        let n = rng.gen_range(2..=4usize);
        let spec: Vec<(String, f64, Vec<(Vec<String>, u64)>)> = (0..n)
            .map(|t| {
                let queries: Vec<(Vec<String>, u64)> = (0..rng.gen_range(1..=3))
                    .filter_map(|_| {
                        let req: Vec<String> = (0..nviews)
                            .filter(|_| rng.gen_bool(0.5))
                            .map(|i| format!("v{i}"))
                            .collect();
                        (!req.is_empty()).then(|| (req, rng.gen_range(1..=9)))
                    })
                    .collect();
                (format!("t{t}"), rng.gen_range(1..=3) as f64, queries)
            })
            .collect();
        let tenants: Vec<Tenant> = spec.iter().map(|(id, w, _)| Tenant::new(id.clone(), *w)).collect();
        let demands = spec
            .into_iter()
            .map(|(id, _, qs)| {
                (
                    TenantId::new(id),
                    qs.into_iter()
                        .map(|(req, v)| {
                            QueryDemand::new(req.into_iter().map(ViewId::new), v)
                        })
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        BatchInstance::new(tenants, views, budget, demands).unwrap()
    }

    #[test]
    fn exact_rsd_gives_every_tenant_its_weight_share() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for _ in 0..25 {
            let inst = random_small_instance(&mut rng);
            let out = rsd_plan(&inst, &PolicyParams::default()).unwrap();
            let total: f64 = inst.tenants().iter().map(|t| t.weight).sum();
            for t in inst.tenants() {
                let best = crate::welfare::max_utility(&inst, &t.id).unwrap();
                if best <= 0.0 {
                    continue;
                }
                let v = inst.scaled_utility(&t.id, &out.allocation).unwrap();
                let floor = t.weight / total;
                assert!(
                    v >= floor - 1e-9,
                    "tenant {} got {v} below share {floor}",
                    t.id
                );
            }
        }
    }

    #[test]
    fn sampled_rsd_is_deterministic_and_near_exact() {
        let inst = instance(
            unit_views(&["p", "r", "s"]),
            1,
            vec![
                ("a", 1.0, vec![(vec!["r"], 1)]),
                ("b", 1.0, vec![(vec!["s"], 1)]),
                ("c", 1.0, vec![(vec!["p"], 1)]),
            ],
        );
        let mut params = PolicyParams::with_seed(7);
        params.rsd_exact_limit = 2;
        let one = rsd_plan(&inst, &params).unwrap();
        let two = rsd_plan(&inst, &params).unwrap();
        assert_eq!(one.allocation.support().len(), two.allocation.support().len());
        assert!(one.allocation.max_probability_gap(&two.allocation) == 0.0);
        let sizes = inst.view_sizes();
        let r = Configuration::new(vec![ViewId::new("r")], &sizes).unwrap();
        let p = one.allocation.probability_of(&r);
        assert!((p - 1.0 / 3.0).abs() < 0.02, "sampled probability {p}");
    }

    #[test]
    fn plan_dispatches_every_policy() {
        let inst = instance(
            unit_views(&["a", "b"]),
            1,
            vec![
                ("t1", 1.0, vec![(vec!["a"], 2)]),
                ("t2", 1.0, vec![(vec!["b"], 2)]),
            ],
        );
        let mut params = PolicyParams::default();
        params.exact_pf.epsilon = 0.15;
        for policy in Policy::ALL {
            let out = plan(policy, &inst, &params).unwrap();
            assert!(
                out.allocation.is_normalized(),
                "{policy} returned unnormalized allocation"
            );
        }
    }
}
