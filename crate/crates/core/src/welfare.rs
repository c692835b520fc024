//! Exact welfare maximization: pick the feasible view set maximizing a
//! weighted sum of tenant utilities.
//!
//! This is budgeted coverage (each query pays out only when its whole
//! required set is cached), solved exactly by depth-first branch and bound.
//! Views are branched in descending covered-bytes-per-byte order; the bound
//! adds every not-yet-covered query that the remaining views could still
//! cover, ignoring the budget, which is admissible because utility is
//! monotone. Ties are resolved toward the smallest footprint and then the
//! lexicographically smallest view-id set, so results are deterministic and
//! match exhaustive enumeration exactly.

use std::collections::BTreeMap;

use crate::compact::Compact;
use crate::error::{Error, Result};
use crate::model::{BatchInstance, Configuration, TenantId};

/// Whether tenant utilities enter the objective in raw bytes or scaled by
/// each tenant's best standalone utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WelfareMode {
    Raw,
    Scaled,
}

#[derive(Debug, Clone)]
pub struct WelfareSolution {
    pub configuration: Configuration,
    pub value: f64,
}

/// Configurations are enumerable only for desk-scale instances.
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy)]
pub(crate) struct CoverageSolution {
    pub mask: u64,
    pub value: f64,
}

/// `a` strictly before `b` in prefix-first lexicographic order of the
/// ascending bit-index sequences.
#[cfg(test)]
pub(crate) fn lex_less(mut a: u64, mut b: u64) -> bool {
    loop {
        if a == b {
            return false;
        }
        if a == 0 {
            return true;
        }
        if b == 0 {
            return false;
        }
        let ia = a.trailing_zeros();
        let ib = b.trailing_zeros();
        if ia != ib {
            return ia < ib;
        }
        a &= a - 1;
        b &= b - 1;
    }
}

struct SearchCtx<'a> {
    sizes: &'a [u64],
    items: Vec<(u64, f64)>,
    /// Value of queries with empty required sets (always covered).
    base_value: f64,
    /// Branch order: original bit indices, descending value/size ratio.
    order: Vec<usize>,
    /// `suffix[p]` = union mask of `order[p..]`.
    suffix: Vec<u64>,
    budget: u64,
}

fn mask_size(sizes: &[u64], mask: u64) -> u64 {
    let mut total = 0u64;
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        total += sizes[i];
        m &= m - 1;
    }
    total
}

impl<'a> SearchCtx<'a> {
    fn new(sizes: &'a [u64], budget: u64, raw_items: &[(u64, f64)], base_mask: u64) -> Self {
        let headroom = budget.saturating_sub(mask_size(sizes, base_mask));
        let mut merged: BTreeMap<u64, f64> = BTreeMap::new();
        let mut base_value = 0.0;
        for &(mask, value) in raw_items {
            if value <= 0.0 {
                continue;
            }
            let missing = mask & !base_mask;
            if missing == 0 {
                base_value += value;
            } else if mask_size(sizes, missing) <= headroom {
                *merged.entry(mask).or_insert(0.0) += value;
            }
        }
        let items: Vec<(u64, f64)> = merged.into_iter().collect();
        let mut useful = 0u64;
        for (mask, _) in &items {
            useful |= mask & !base_mask;
        }
        let mut order: Vec<usize> = (0..sizes.len()).filter(|i| useful >> i & 1 == 1).collect();
        let ratio = |i: usize| -> f64 {
            let covered: f64 = items
                .iter()
                .filter(|(m, _)| m >> i & 1 == 1)
                .map(|(_, v)| v)
                .sum();
            if sizes[i] == 0 {
                f64::INFINITY
            } else {
                covered / sizes[i] as f64
            }
        };
        order.sort_by(|&a, &b| ratio(b).partial_cmp(&ratio(a)).unwrap().then(a.cmp(&b)));
        let mut suffix = vec![0u64; order.len() + 1];
        for p in (0..order.len()).rev() {
            suffix[p] = suffix[p + 1] | 1u64 << order[p];
        }
        SearchCtx {
            sizes,
            items,
            base_value,
            order,
            suffix,
            budget,
        }
    }

    fn covered_value(&self, mask: u64) -> f64 {
        self.base_value
            + self
                .items
                .iter()
                .filter(|(m, _)| m & !mask == 0)
                .map(|(_, v)| v)
                .sum::<f64>()
    }

    /// Upper bound for any completion of `chosen` using views from
    /// `suffix[p]`: current value plus everything still coverable.
    fn bound(&self, p: usize, chosen: u64, covered: f64) -> f64 {
        let reach = chosen | self.suffix[p];
        covered
            + self
                .items
                .iter()
                .filter(|(m, _)| m & !chosen != 0 && m & !reach == 0)
                .map(|(_, v)| v)
                .sum::<f64>()
    }
}

#[derive(Debug)]
struct BestValue {
    value: f64,
    mask: u64,
    size: u64,
    tie_seen: bool,
}

fn dfs_value(ctx: &SearchCtx, p: usize, chosen: u64, used: u64, covered: f64, best: &mut BestValue) {
    if p == ctx.order.len() {
        if covered > best.value {
            best.value = covered;
            best.mask = chosen;
            best.size = used;
            best.tie_seen = false;
        } else if covered == best.value && chosen != best.mask {
            best.tie_seen = true;
        }
        return;
    }
    let b = ctx.bound(p, chosen, covered);
    if b < best.value {
        return;
    }
    if b == best.value && p > 0 {
        // A tied completion may exist below; remember it but do not expand.
        best.tie_seen = true;
        return;
    }
    let v = ctx.order[p];
    let sz = ctx.sizes[v];
    if used + sz <= ctx.budget {
        let chosen2 = chosen | 1u64 << v;
        let newly: f64 = ctx
            .items
            .iter()
            .filter(|(m, _)| m & !chosen != 0 && m & !chosen2 == 0)
            .map(|(_, x)| x)
            .sum();
        dfs_value(ctx, p + 1, chosen2, used + sz, covered + newly, best);
    }
    dfs_value(ctx, p + 1, chosen, used, covered, best);
}

/// Smallest footprint among configurations achieving `target` value.
fn dfs_min_size(ctx: &SearchCtx, p: usize, chosen: u64, used: u64, covered: f64, target: f64, best: &mut u64) {
    if used >= *best {
        return;
    }
    if covered == target {
        *best = used;
        return;
    }
    if p == ctx.order.len() || ctx.bound(p, chosen, covered) < target {
        return;
    }
    let v = ctx.order[p];
    let sz = ctx.sizes[v];
    if used + sz <= ctx.budget {
        let chosen2 = chosen | 1u64 << v;
        let newly: f64 = ctx
            .items
            .iter()
            .filter(|(m, _)| m & !chosen != 0 && m & !chosen2 == 0)
            .map(|(_, x)| x)
            .sum();
        dfs_min_size(ctx, p + 1, chosen2, used + sz, covered + newly, target, best);
    }
    dfs_min_size(ctx, p + 1, chosen, used, covered, target, best);
}

/// Can some superset of `chosen` (drawn from views in `allowed`) reach
/// `target` value within `budget` bytes total?
fn reachable(sizes: &[u64], budget: u64, items: &[(u64, f64)], chosen: u64, allowed: u64, target: f64) -> bool {
    if mask_size(sizes, chosen) > budget {
        return false;
    }
    let restricted: Vec<(u64, f64)> = items
        .iter()
        .filter(|(m, _)| m & !(chosen | allowed) == 0)
        .copied()
        .collect();
    let ctx = SearchCtx::new(sizes, budget, &restricted, chosen);
    let mut best = BestValue {
        value: f64::NEG_INFINITY,
        mask: 0,
        size: 0,
        tie_seen: false,
    };
    dfs_value(&ctx, 0, chosen, mask_size(sizes, chosen), ctx.covered_value(chosen), &mut best);
    best.value >= target
}

/// Exact maximizer over subsets of views within the byte budget, starting
/// from a pre-committed `base_mask` (counted against the budget, its covered
/// queries already earned). Ties: max value, then min total size, then
/// lexicographically smallest id set.
pub(crate) fn solve_coverage_with_base(
    sizes: &[u64],
    budget: u64,
    items: &[(u64, f64)],
    base_mask: u64,
) -> CoverageSolution {
    let ctx = SearchCtx::new(sizes, budget, items, base_mask);
    let base_used = mask_size(sizes, base_mask);
    let base_covered = ctx.covered_value(base_mask);
    let mut best = BestValue {
        value: base_covered,
        mask: base_mask,
        size: base_used,
        tie_seen: false,
    };
    dfs_value(&ctx, 0, base_mask, base_used, base_covered, &mut best);
    if !best.tie_seen {
        return CoverageSolution {
            mask: best.mask,
            value: best.value,
        };
    }

    // Ties exist (or were pruned away): canonicalize. First the smallest
    // size achieving the optimum, then the lexicographically smallest id
    // set at that size, built greedily with reachability probes.
    let target = best.value;
    let mut min_size = best.size;
    dfs_min_size(&ctx, 0, base_mask, base_used, base_covered, target, &mut min_size);

    let useful = ctx.suffix.first().copied().unwrap_or(0);
    let mut prefix = base_mask;
    let mut remaining = useful;
    loop {
        if ctx.covered_value(prefix) == target && mask_size(sizes, prefix) == min_size {
            return CoverageSolution {
                mask: prefix,
                value: target,
            };
        }
        let mut advanced = false;
        let mut m = remaining;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            let future = remaining & !((1u64 << j) | ((1u64 << j) - 1));
            let cand = prefix | 1u64 << j;
            if reachable(sizes, min_size, &ctx.items, cand, future, target) {
                prefix = cand;
                remaining = future;
                advanced = true;
                break;
            }
        }
        if !advanced {
            // Should not happen: fall back to the incumbent.
            return CoverageSolution {
                mask: best.mask,
                value: target,
            };
        }
    }
}

pub(crate) fn solve_coverage(sizes: &[u64], budget: u64, items: &[(u64, f64)]) -> CoverageSolution {
    solve_coverage_with_base(sizes, budget, items, 0)
}

/// Optimal value only, skipping tie canonicalization.
pub(crate) fn max_coverage_value(sizes: &[u64], budget: u64, items: &[(u64, f64)]) -> f64 {
    let ctx = SearchCtx::new(sizes, budget, items, 0);
    let base_covered = ctx.covered_value(0);
    let mut best = BestValue {
        value: base_covered,
        mask: 0,
        size: 0,
        tie_seen: false,
    };
    dfs_value(&ctx, 0, 0, 0, base_covered, &mut best);
    best.value
}

/// Merged weighted item list for an objective over tenant utilities.
pub(crate) fn weighted_items(
    compact: &Compact,
    weights: &[f64],
    mode: WelfareMode,
) -> Vec<(u64, f64)> {
    let mut items = Vec::new();
    for (t, &w) in compact.tenants.iter().zip(weights) {
        if w <= 0.0 {
            continue;
        }
        let coef = match mode {
            WelfareMode::Raw => w,
            WelfareMode::Scaled => {
                if t.max_utility > 0.0 {
                    w / t.max_utility
                } else {
                    continue;
                }
            }
        };
        for &(mask, value) in &t.queries {
            items.push((mask, value * coef));
        }
    }
    items
}

pub(crate) fn weight_vector(compact: &Compact, weights: &BTreeMap<TenantId, f64>) -> Result<Vec<f64>> {
    for (id, w) in weights {
        compact.tenant_index(id)?;
        if !(w.is_finite() && *w >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weight {w} for tenant `{id}` must be finite and non-negative"
            )));
        }
    }
    Ok(compact
        .tenants
        .iter()
        .map(|t| weights.get(&t.id).copied().unwrap_or(0.0))
        .collect())
}

/// Maximizes the weighted (raw or scaled) utility sum over feasible
/// configurations. Tenants missing from `weights` count as weight 0; in
/// scaled mode tenants with zero standalone utility are skipped.
pub fn welfare(
    instance: &BatchInstance,
    weights: &BTreeMap<TenantId, f64>,
    mode: WelfareMode,
) -> Result<WelfareSolution> {
    if instance.candidate_views().is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let compact = Compact::build(instance)?;
    let w = weight_vector(&compact, weights)?;
    let items = weighted_items(&compact, &w, mode);
    let sol = solve_coverage(&compact.view_sizes, compact.budget, &items);
    Ok(WelfareSolution {
        configuration: compact.mask_to_configuration(sol.mask),
        value: sol.value,
    })
}

/// Best standalone utility for one tenant within the full budget.
pub fn max_utility(instance: &BatchInstance, tenant: &TenantId) -> Result<f64> {
    if instance.candidate_views().is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let compact = Compact::build(instance)?;
    let i = compact.tenant_index(tenant)?;
    Ok(compact.tenants[i].max_utility)
}

/// Best standalone utility for every tenant.
pub fn max_utilities(instance: &BatchInstance) -> Result<BTreeMap<TenantId, f64>> {
    if instance.candidate_views().is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let compact = Compact::build(instance)?;
    Ok(compact
        .tenants
        .iter()
        .map(|t| (t.id.clone(), t.max_utility))
        .collect())
}

/// All feasible configurations (including the empty one), in ascending
/// mask order over id-sorted views. Guarded to [`ENUMERATION_LIMIT`] views.
pub fn enumerate_configurations(instance: &BatchInstance) -> Result<Vec<Configuration>> {
    if instance.candidate_views().is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let compact = Compact::build(instance)?;
    let masks = enumerate_masks(&compact)?;
    Ok(masks
        .into_iter()
        .map(|m| compact.mask_to_configuration(m))
        .collect())
}

pub(crate) fn enumerate_masks(compact: &Compact) -> Result<Vec<u64>> {
    let n = compact.view_sizes.len();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooManyViews {
            count: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << n) {
        if compact.mask_size(mask) <= compact.budget {
            out.push(mask);
        }
    }
    Ok(out)
}
