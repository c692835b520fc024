//! Multiplicative-weights solvers.
//!
//! [`ahk_feasibility`] is a generic width-bounded feasibility driver: each
//! round it hands the current constraint weights to an oracle that returns
//! the point maximizing the weighted slack, certifies infeasibility when
//! even that point has negative weighted slack, and otherwise averages the
//! returned points. [`simple_mmf_mw`] applies the same engine shape to
//! max-min scaled utility with per-round exponential down-weighting.
//! [`pf_exact`] wraps the feasibility driver in a binary search on the
//! proportional-fairness objective level.

use std::collections::{BTreeMap, BTreeSet};

use crate::compact::Compact;
use crate::error::{Error, Result};
use crate::heuristics::{pf_gradient, PfGradientParams};
use crate::model::{Allocation, BatchInstance, TenantId};
use crate::welfare::solve_coverage;

#[derive(Debug, Clone)]
pub struct AhkReply<P> {
    pub point: P,
    /// `a_i(point) - b_i` per constraint, within `[-width, width]`.
    pub slacks: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum AhkOutcome<P: Ord> {
    /// No certificate found; the uniform average over all round points
    /// satisfies every constraint up to an additive `delta`.
    Feasible {
        counts: BTreeMap<P, u64>,
        rounds: usize,
    },
    /// The returned weights certify that no point satisfies all
    /// constraints simultaneously.
    Infeasible { weights: Vec<f64>, round: usize },
}

/// Round count needed for additive slack `delta` at the given width.
pub fn rounds_for(constraints: usize, width: f64, delta: f64) -> usize {
    let k = 4.0 * width * width * (constraints as f64).ln() / (delta * delta);
    (k.ceil() as usize).max(1)
}

pub fn ahk_feasibility<P, F>(
    constraints: usize,
    width: f64,
    delta: f64,
    mut oracle: F,
) -> Result<AhkOutcome<P>>
where
    P: Ord + Clone,
    F: FnMut(&[f64]) -> Result<AhkReply<P>>,
{
    if constraints == 0 {
        return Err(Error::InvalidParameter("no constraints to satisfy".into()));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "width {width} must be positive and finite"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "slack target {delta} must lie in (0, 1)"
        )));
    }
    let rounds = rounds_for(constraints, width, delta);
    let mut y = vec![1.0 / constraints as f64; constraints];
    let mut counts: BTreeMap<P, u64> = BTreeMap::new();
    for round in 0..rounds {
        let reply = oracle(&y)?;
        if reply.slacks.len() != constraints {
            return Err(Error::InvalidParameter(format!(
                "oracle returned {} slacks for {constraints} constraints",
                reply.slacks.len()
            )));
        }
        if let Some(&bad) = reply
            .slacks
            .iter()
            .find(|s| !s.is_finite() || s.abs() > width + 1e-9)
        {
            return Err(Error::WidthViolation { slack: bad, width });
        }
        let total: f64 = y.iter().zip(&reply.slacks).map(|(w, s)| w * s).sum();
        if total < 0.0 {
            return Ok(AhkOutcome::Infeasible { weights: y, round });
        }
        for (s, w) in reply.slacks.iter().zip(y.iter_mut()) {
            let m = s / width;
            *w *= if *s >= 0.0 {
                (1.0 - delta).powf(m)
            } else {
                (1.0 + delta).powf(-m)
            };
        }
        let norm: f64 = y.iter().sum();
        for w in y.iter_mut() {
            *w /= norm;
        }
        *counts.entry(reply.point).or_insert(0) += 1;
    }
    Ok(AhkOutcome::Feasible { counts, rounds })
}

/// Cheapest scaled-utility floor profile at objective level `q`:
/// minimize `sum w_i g_i` over `floor_i <= g_i <= 1` with
/// `sum c_i ln g_i >= q`. The Lagrangian solution is
/// `g_i(L) = clamp(L c_i / w_i, floor_i, 1)`, monotone in `L`, so the
/// smallest feasible `L` is found by bisection.
pub(crate) fn gamma_profile(c: &[f64], floors: &[f64], w: &[f64], q: f64) -> Result<Vec<f64>> {
    let n = c.len();
    if floors.len() != n || w.len() != n {
        return Err(Error::InvalidParameter(
            "gamma profile inputs must have equal length".into(),
        ));
    }
    if q > 1e-12 {
        return Err(Error::InfeasibleQ { q });
    }
    for i in 0..n {
        if !(c[i] > 0.0 && floors[i] > 0.0 && floors[i] <= 1.0 && w[i] >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma profile entry {i} out of range"
            )));
        }
    }
    let profile = |l: f64| -> Vec<f64> {
        (0..n)
            .map(|i| {
                if w[i] <= 0.0 {
                    1.0
                } else {
                    (l * c[i] / w[i]).clamp(floors[i], 1.0)
                }
            })
            .collect()
    };
    let level = |g: &[f64]| -> f64 { c.iter().zip(g).map(|(ci, gi)| ci * gi.ln()).sum() };
    if level(&profile(0.0)) >= q {
        return Ok(profile(0.0));
    }
    let mut lo = 0.0f64;
    let mut hi = (0..n)
        .filter(|&i| w[i] > 0.0)
        .map(|i| w[i] / c[i])
        .fold(0.0f64, f64::max)
        .max(1e-12);
    while hi - lo > 1e-9 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if level(&profile(mid)) >= q {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(profile(hi))
}

pub(crate) struct ScaledInstance {
    pub(crate) compact: Compact,
    /// Indices into `compact.tenants` with positive standalone utility.
    pub(crate) active: Vec<usize>,
    pub(crate) lambda: Vec<f64>,
    pub(crate) lambda_total: f64,
    /// Per active tenant: demands with values divided by the standalone
    /// optimum, so covering everything scores exactly 1.
    pub(crate) scaled_queries: Vec<Vec<(u64, f64)>>,
}

impl ScaledInstance {
    pub(crate) fn build(instance: &BatchInstance) -> Result<Self> {
        let compact = Compact::build(instance)?;
        let active = compact.active();
        if active.is_empty() {
            return Err(Error::NoActiveTenants);
        }
        let lambda: Vec<f64> = active.iter().map(|&i| compact.tenants[i].weight).collect();
        let lambda_total: f64 = lambda.iter().sum();
        let scaled_queries: Vec<Vec<(u64, f64)>> = active
            .iter()
            .map(|&i| {
                let u = compact.tenants[i].max_utility;
                compact.tenants[i]
                    .queries
                    .iter()
                    .map(|&(m, v)| (m, v / u))
                    .collect()
            })
            .collect();
        Ok(ScaledInstance {
            compact,
            active,
            lambda,
            lambda_total,
            scaled_queries,
        })
    }

    pub(crate) fn n(&self) -> usize {
        self.active.len()
    }

    /// Scaled utility of a configuration mask for active tenant `k`.
    pub(crate) fn scaled(&self, k: usize, mask: u64) -> f64 {
        self.scaled_queries[k]
            .iter()
            .filter(|(req, _)| req & !mask == 0)
            .map(|(_, v)| v)
            .sum()
    }

    pub(crate) fn scaled_mix(&self, k: usize, counts: &BTreeMap<u64, u64>, rounds: u64) -> f64 {
        counts
            .iter()
            .map(|(&mask, &cnt)| self.scaled(k, mask) * cnt as f64)
            .sum::<f64>()
            / rounds as f64
    }

    pub(crate) fn argmax(&self, weights_per_active: &[f64]) -> u64 {
        let mut items = Vec::new();
        for (k, queries) in self.scaled_queries.iter().enumerate() {
            let w = weights_per_active[k];
            if w > 0.0 {
                items.extend(queries.iter().map(|&(m, v)| (m, v * w)));
            }
        }
        solve_coverage(&self.compact.view_sizes, self.compact.budget, &items).mask
    }

    pub(crate) fn allocation(&self, counts: &BTreeMap<u64, u64>, rounds: u64) -> Result<Allocation> {
        let support: Vec<_> = counts
            .iter()
            .map(|(&mask, &cnt)| {
                (
                    self.compact.mask_to_configuration(mask),
                    cnt as f64 / rounds as f64,
                )
            })
            .collect();
        Allocation::new(support)?.normalized()
    }

    /// Every excluded tenant id (zero standalone utility).
    pub(crate) fn excluded(&self) -> Vec<TenantId> {
        (0..self.compact.tenants.len())
            .filter(|i| !self.active.contains(i))
            .map(|i| self.compact.tenants[i].id.clone())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct MmfMwParams {
    /// Relative shortfall target: the averaged allocation's worst rate is
    /// at least `(1 - epsilon)` times the max-min rate.
    pub epsilon: f64,
}

impl Default for MmfMwParams {
    fn default() -> Self {
        MmfMwParams { epsilon: 0.05 }
    }
}

#[derive(Debug, Clone)]
pub struct MmfMwOutcome {
    pub allocation: Allocation,
    /// Worst weighted rate of the averaged allocation.
    pub min_rate: f64,
    pub rounds: usize,
    pub excluded_tenants: Vec<TenantId>,
}

/// Max-min fair allocation by sampling: repeatedly pick the configuration
/// maximizing the weighted scaled utility, then exponentially down-weight
/// tenants in proportion to what they just received. The empirical mix
/// over `max(1, ceil(4 N^2 ln N / eps^2))` rounds guarantees a worst rate
/// within a `(1 - eps)` factor of optimal.
///
/// A tenant's rate is its scaled utility divided by its weight share times
/// the active-tenant count, so with equal weights the rate is the scaled
/// utility itself.
pub fn simple_mmf_mw(instance: &BatchInstance, params: &MmfMwParams) -> Result<MmfMwOutcome> {
    let eps = params.epsilon;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon {eps} must lie in (0, 1)"
        )));
    }
    let inst = ScaledInstance::build(instance)?;
    let n = inst.n();
    let rounds = ((4.0 * (n * n) as f64 * (n as f64).ln() / (eps * eps)).ceil() as usize).max(1);
    // rate_i(S) = V_i(S) * Lambda / (N * lambda_i)
    let rate_scale: Vec<f64> = inst
        .lambda
        .iter()
        .map(|l| inst.lambda_total / (n as f64 * l))
        .collect();
    let mut w = vec![1.0f64; n];
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..rounds {
        let oracle_w: Vec<f64> = (0..n).map(|k| w[k] * rate_scale[k]).collect();
        let mask = inst.argmax(&oracle_w);
        *counts.entry(mask).or_insert(0) += 1;
        for k in 0..n {
            w[k] *= (-eps * inst.scaled(k, mask) * rate_scale[k]).exp();
        }
        let norm: f64 = w.iter().sum();
        for v in w.iter_mut() {
            *v /= norm;
        }
    }
    let min_rate = (0..n)
        .map(|k| inst.scaled_mix(k, &counts, rounds as u64) * rate_scale[k])
        .fold(f64::INFINITY, f64::min);
    Ok(MmfMwOutcome {
        allocation: inst.allocation(&counts, rounds as u64)?,
        min_rate,
        rounds,
        excluded_tenants: inst.excluded(),
    })
}

#[derive(Debug, Clone)]
pub struct PfExactParams {
    /// Additive tolerance on the log-utility objective; must stay below
    /// 1/6 for the shortfall analysis to apply.
    pub epsilon: f64,
    /// Hard cap on welfare-oracle invocations across the whole solve.
    pub oracle_cap: u64,
    /// Re-run the feasibility stage once at the resolved level with half
    /// the slack, keeping whichever allocation scores better.
    pub refine: bool,
    /// Finish with a gradient pass over every configuration the search
    /// touched, so the returned mix is stationary rather than merely
    /// within epsilon.
    pub polish: bool,
}

impl Default for PfExactParams {
    fn default() -> Self {
        PfExactParams {
            epsilon: 0.1,
            oracle_cap: 20_000_000,
            refine: false,
            polish: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PfExactOutcome {
    pub allocation: Allocation,
    /// Weighted log scaled utility of the returned allocation.
    pub objective: f64,
    /// Highest objective level the search still certified reachable.
    pub q_resolved: f64,
    pub oracle_calls: u64,
    pub excluded_tenants: Vec<TenantId>,
}

fn pf_objective(inst: &ScaledInstance, counts: &BTreeMap<u64, u64>, rounds: u64) -> f64 {
    (0..inst.n())
        .map(|k| {
            let v = inst.scaled_mix(k, counts, rounds);
            if v <= 0.0 {
                f64::NEG_INFINITY
            } else {
                inst.lambda[k] * v.ln()
            }
        })
        .sum()
}

/// One feasibility run at objective level `q`: does an allocation exist
/// whose scaled utilities majorize some floor profile at that level?
fn pf_feasible(
    inst: &ScaledInstance,
    floors: &[f64],
    q: f64,
    delta: f64,
    cap: u64,
    calls: &mut u64,
    touched: &mut BTreeSet<u64>,
) -> Result<Option<(BTreeMap<u64, u64>, u64)>> {
    let n = inst.n();
    let outcome = ahk_feasibility(n, 1.0, delta, |y| {
        let gamma = gamma_profile(&inst.lambda, floors, y, q)?;
        *calls += 1;
        if *calls > cap {
            return Err(Error::BudgetExceeded {
                calls: *calls,
                cap,
            });
        }
        let mask = inst.argmax(y);
        touched.insert(mask);
        let slacks: Vec<f64> = (0..n).map(|k| inst.scaled(k, mask) - gamma[k]).collect();
        Ok(AhkReply {
            point: mask,
            slacks,
        })
    })?;
    Ok(match outcome {
        AhkOutcome::Feasible { counts, rounds } => Some((counts, rounds as u64)),
        AhkOutcome::Infeasible { .. } => None,
    })
}

/// Exact proportional fairness up to an additive `epsilon` on the weighted
/// log objective: binary search on the achievable objective level, with
/// each level tested by multiplicative-weights feasibility. The best
/// allocation actually observed (scored directly, not trusted from the
/// feasibility verdict) is returned; with `polish` set, its mixing
/// weights are re-optimized by gradient ascent over the union of every
/// configuration any feasibility run produced, which costs no further
/// oracle calls and only ever raises the objective.
pub fn pf_exact(instance: &BatchInstance, params: &PfExactParams) -> Result<PfExactOutcome> {
    let eps = params.epsilon;
    if !(eps > 0.0 && eps < 1.0 / 6.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon {eps} must lie in (0, 1/6)"
        )));
    }
    let inst = ScaledInstance::build(instance)?;
    let n = inst.n();
    let floors: Vec<f64> = inst.lambda.iter().map(|l| l / inst.lambda_total).collect();
    let q_min: f64 = inst
        .lambda
        .iter()
        .zip(&floors)
        .map(|(l, f)| l * f.ln())
        .sum();
    let delta = eps / (n * n) as f64;
    let mut calls = 0u64;
    let mut touched: BTreeSet<u64> = BTreeSet::new();
    let mut best: Option<(f64, BTreeMap<u64, u64>, u64)> = None;
    let consider = |cand: Option<(BTreeMap<u64, u64>, u64)>,
                        best: &mut Option<(f64, BTreeMap<u64, u64>, u64)>|
     -> bool {
        match cand {
            Some((counts, rounds)) => {
                let b = pf_objective(&inst, &counts, rounds);
                if best.as_ref().map_or(true, |(bb, _, _)| b > *bb) {
                    *best = Some((b, counts, rounds));
                }
                true
            }
            None => false,
        }
    };

    let mut lo = q_min;
    let mut hi = 0.0f64;
    while hi - lo > eps / 2.0 {
        let mid = 0.5 * (lo + hi);
        let cand = pf_feasible(
            &inst,
            &floors,
            mid,
            delta,
            params.oracle_cap,
            &mut calls,
            &mut touched,
        )?;
        if consider(cand, &mut best) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.is_none() {
        // Every probed level certified infeasible; the floor level itself
        // is always reachable, so resolve it directly.
        let cand = pf_feasible(
            &inst,
            &floors,
            q_min,
            delta,
            params.oracle_cap,
            &mut calls,
            &mut touched,
        )?;
        consider(cand, &mut best);
    }
    if params.refine {
        let cand = pf_feasible(
            &inst,
            &floors,
            lo,
            delta / 2.0,
            params.oracle_cap,
            &mut calls,
            &mut touched,
        )?;
        consider(cand, &mut best);
    }
    let solo_masks: Vec<u64> = inst
        .active
        .iter()
        .map(|&i| {
            solve_coverage(
                &inst.compact.view_sizes,
                inst.compact.budget,
                &inst.compact.tenants[i].queries,
            )
            .mask
        })
        .collect();
    let (mut objective, counts, rounds) = match best {
        Some(b) => b,
        None => {
            // Defensive: mix each tenant's standalone optimum with its
            // weight share. This always meets the floors.
            let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
            let mut total = 0u64;
            for (k, &mask) in solo_masks.iter().enumerate() {
                let share = (floors[k] * 1_000_000.0).round() as u64;
                *counts.entry(mask).or_insert(0) += share;
                total += share;
            }
            let objective = pf_objective(&inst, &counts, total);
            (objective, counts, total)
        }
    };
    let mut allocation = inst.allocation(&counts, rounds)?;
    if params.polish {
        touched.extend(solo_masks);
        let pool: Vec<_> = touched
            .iter()
            .map(|&m| inst.compact.mask_to_configuration(m))
            .collect();
        let polished = pf_gradient(
            instance,
            &pool,
            &PfGradientParams {
                tolerance: 1e-12,
                max_iterations: 100_000,
                support_epsilon: 1e-9,
            },
        )?;
        if polished.objective >= objective {
            objective = polished.objective;
            allocation = polished.allocation;
        }
    }
    Ok(PfExactOutcome {
        allocation,
        objective,
        q_resolved: lo,
        oracle_calls: calls,
        excluded_tenants: inst.excluded(),
    })
}
