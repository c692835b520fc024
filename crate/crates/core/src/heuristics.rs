//! Pool-based fast solvers.
//!
//! Exhaustive configuration sets explode combinatorially, so the fast
//! policies first prune to a candidate pool: welfare maximizers for random
//! positive weight vectors, the support of a max-min sampling run, and each
//! tenant's standalone optimum. Proportional fairness and max-min fairness
//! are then solved over the pool alone, by projected gradient ascent and by
//! linear programming respectively.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::exec;
use crate::lp::{self, Constraint, Lp, LpOutcome, Sense};
use crate::model::{Allocation, BatchInstance, Configuration, TenantId};
use crate::mw::{simple_mmf_mw, MmfMwParams, ScaledInstance};
use crate::welfare::solve_coverage;

#[derive(Debug, Clone)]
pub struct PruneParams {
    pub seed: u64,
    /// Number of random weight vectors; defaults to `max(50, N^2)` over
    /// active tenants.
    pub scan_count: Option<usize>,
    /// Accuracy of the embedded max-min sampling run.
    pub mmf_epsilon: f64,
}

impl Default for PruneParams {
    fn default() -> Self {
        PruneParams {
            seed: 0,
            scan_count: None,
            mmf_epsilon: 0.05,
        }
    }
}

/// Candidate configuration pool: welfare argmaxes of random unit weight
/// vectors from the positive orthant, the support of a max-min sampling
/// run, and every tenant's standalone optimum. Deterministic for a fixed
/// seed; sorted by view-id set.
pub fn prune_configurations(instance: &BatchInstance, params: &PruneParams) -> Result<Vec<Configuration>> {
    let inst = ScaledInstance::build(instance)?;
    let n = inst.n();
    let scans = params.scan_count.unwrap_or_else(|| (n * n).max(50));
    let normal: Normal<f64> = Normal::new(0.0, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let vectors: Vec<Vec<f64>> = (0..scans)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(s as u64 + 1);
            let mut v: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng).abs()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                for x in v.iter_mut() {
                    *x /= norm;
                }
            } else {
                v = vec![1.0 / n as f64; n];
            }
            v
        })
        .collect();
    let mut masks: BTreeSet<u64> = exec::map(&vectors, |w: &Vec<f64>| inst.argmax(w)).into_iter().collect();
    for &i in &inst.active {
        masks.insert(
            solve_coverage(
                &inst.compact.view_sizes,
                inst.compact.budget,
                &inst.compact.tenants[i].queries,
            )
            .mask,
        );
    }
    let mmf = simple_mmf_mw(
        instance,
        &MmfMwParams {
            epsilon: params.mmf_epsilon,
        },
    )?;
    for (cfg, _) in mmf.allocation.support() {
        masks.insert(inst.compact.configuration_to_mask(cfg)?);
    }
    Ok(masks
        .into_iter()
        .map(|m| inst.compact.mask_to_configuration(m))
        .collect())
}

/// Scaled-utility matrix of a configuration pool, rows = active tenants.
struct PoolContext {
    inst: ScaledInstance,
    masks: Vec<u64>,
    /// `v[k][j]` = scaled utility of pool entry `j` for active tenant `k`.
    v: Vec<Vec<f64>>,
}

impl PoolContext {
    fn build(instance: &BatchInstance, pool: &[Configuration]) -> Result<Self> {
        let inst = ScaledInstance::build(instance)?;
        let mut masks: Vec<u64> = pool
            .iter()
            .map(|c| inst.compact.configuration_to_mask(c))
            .collect::<Result<_>>()?;
        masks.sort_unstable();
        masks.dedup();
        if masks.is_empty() {
            return Err(Error::InvalidParameter(
                "configuration pool is empty".into(),
            ));
        }
        let v: Vec<Vec<f64>> = (0..inst.n())
            .map(|k| masks.iter().map(|&m| inst.scaled(k, m)).collect())
            .collect();
        for (k, row) in v.iter().enumerate() {
            if row.iter().all(|&x| x <= 0.0) {
                let id = inst.compact.tenants[inst.active[k]].id.0.clone();
                return Err(Error::NoCoverage(id));
            }
        }
        Ok(PoolContext { inst, masks, v })
    }

    fn n(&self) -> usize {
        self.inst.n()
    }

    fn pool_len(&self) -> usize {
        self.masks.len()
    }

    /// rate_k(x) = V_k(x) * Lambda / (N * lambda_k)
    fn rate_scale(&self, k: usize) -> f64 {
        self.inst.lambda_total / (self.n() as f64 * self.inst.lambda[k])
    }

    fn allocation(&self, x: &[f64]) -> Result<Allocation> {
        let support: Vec<(Configuration, f64)> = self
            .masks
            .iter()
            .zip(x)
            .filter(|(_, &p)| p > 1e-12)
            .map(|(&m, &p)| (self.inst.compact.mask_to_configuration(m), p))
            .collect();
        Allocation::new(support)?.normalized()
    }

    fn scaled_utilities(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|k| self.v[k].iter().zip(x).map(|(v, p)| v * p).sum())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct PfGradientParams {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Mass below which a pool entry does not count as supported when
    /// measuring stationarity.
    pub support_epsilon: f64,
}

impl Default for PfGradientParams {
    fn default() -> Self {
        PfGradientParams {
            tolerance: 1e-9,
            max_iterations: 10_000,
            support_epsilon: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PfGradientOutcome {
    pub allocation: Allocation,
    /// Weighted log scaled utility of the returned allocation.
    pub objective: f64,
    /// Worst deviation from the stationarity condition: supported entries
    /// should price out to exactly the total weight, unsupported ones to
    /// no more.
    pub kkt_residual: f64,
    pub iterations: usize,
    pub excluded_tenants: Vec<TenantId>,
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv * (b - a);
    let mut d = a + inv * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Proportional fairness over a fixed pool by projected gradient ascent on
/// the penalized objective `sum_i lambda_i ln V_i(x) - Lambda * |x|`,
/// whose unconstrained maximum over `x >= 0` carries unit mass. Each step
/// follows the boundary-projected gradient with an exact line search.
pub fn pf_gradient(
    instance: &BatchInstance,
    pool: &[Configuration],
    params: &PfGradientParams,
) -> Result<PfGradientOutcome> {
    let ctx = PoolContext::build(instance, pool)?;
    let n = ctx.n();
    let m = ctx.pool_len();
    let lambda = &ctx.inst.lambda;
    let lam_total = ctx.inst.lambda_total;

    // Start from each tenant's best pool entry, mixed by weight share.
    let mut x = vec![0.0f64; m];
    for k in 0..n {
        let jbest = (0..m)
            .max_by(|&a, &b| ctx.v[k][a].partial_cmp(&ctx.v[k][b]).unwrap())
            .unwrap();
        x[jbest] += lambda[k] / lam_total;
    }

    let objective = |x: &[f64]| -> f64 {
        let mut g = 0.0;
        for k in 0..n {
            let v: f64 = ctx.v[k].iter().zip(x).map(|(v, p)| v * p).sum();
            if v <= 0.0 {
                return f64::NEG_INFINITY;
            }
            g += lambda[k] * v.ln();
        }
        g - lam_total * x.iter().sum::<f64>()
    };

    let gradient = |x: &[f64]| -> Vec<f64> {
        let vals: Vec<f64> = (0..n)
            .map(|k| ctx.v[k].iter().zip(x).map(|(v, p)| v * p).sum())
            .collect();
        (0..m)
            .map(|j| {
                (0..n)
                    .map(|k| lambda[k] * ctx.v[k][j] / vals[k])
                    .sum::<f64>()
                    - lam_total
            })
            .collect()
    };

    let mut g_prev = objective(&x);
    let mut stable = 0usize;
    let mut iterations = 0usize;
    while iterations < params.max_iterations {
        iterations += 1;
        let mut d = gradient(&x);
        for j in 0..m {
            if x[j] <= 0.0 && d[j] < 0.0 {
                d[j] = 0.0;
            }
        }
        let dnorm: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dnorm < 1e-14 {
            break;
        }
        // Step limit: first coordinate to hit zero, else a mass increase
        // of one, which the penalty always makes unprofitable.
        let mut tmax = f64::INFINITY;
        for j in 0..m {
            if d[j] < 0.0 {
                tmax = tmax.min(x[j] / -d[j]);
            }
        }
        let positive_mass: f64 = d.iter().filter(|&&v| v > 0.0).sum();
        if positive_mass > 0.0 {
            tmax = tmax.min(1.0 / positive_mass);
        }
        if !tmax.is_finite() || tmax <= 0.0 {
            break;
        }
        let line = |t: f64| -> f64 {
            let trial: Vec<f64> = x
                .iter()
                .zip(&d)
                .map(|(xi, di)| (xi + t * di).max(0.0))
                .collect();
            objective(&trial)
        };
        let t = golden_section_max(line, 0.0, tmax, params.tolerance * tmax.max(1.0));
        let capped = t >= 0.99 * tmax;
        for j in 0..m {
            x[j] = (x[j] + t * d[j]).max(0.0);
        }
        // A boundary hit leaves a float residue in the limiting coordinate,
        // and that residue would throttle every later step limit, so
        // anything within line-search precision of zero snaps to zero. A
        // wrongly snapped coordinate re-enters through its positive
        // gradient.
        let snap = (params.tolerance * 100.0).max(1e-12);
        for v in x.iter_mut() {
            if *v > 0.0 && *v < snap {
                *v = 0.0;
            }
        }
        let g = objective(&x);
        if (g - g_prev).abs() <= params.tolerance * (1.0 + g.abs()) {
            // Capped steps stall legitimately while the active set is still
            // changing; only full line searches count towards convergence.
            if !capped {
                stable += 1;
                if stable >= 3 {
                    break;
                }
            }
        } else {
            stable = 0;
        }
        g_prev = g;
    }

    let total: f64 = x.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateLp("gradient ascent lost all mass".into()));
    }
    for v in x.iter_mut() {
        *v /= total;
    }
    let vals = ctx.scaled_utilities(&x);
    let objective_value: f64 = (0..n)
        .map(|k| {
            if vals[k] <= 0.0 {
                f64::NEG_INFINITY
            } else {
                lambda[k] * vals[k].ln()
            }
        })
        .sum();
    let mut kkt = 0.0f64;
    for j in 0..m {
        let price: f64 = (0..n).map(|k| lambda[k] * ctx.v[k][j] / vals[k]).sum();
        if x[j] > params.support_epsilon {
            kkt = kkt.max((price - lam_total).abs());
        } else {
            kkt = kkt.max((price - lam_total).max(0.0));
        }
    }
    Ok(PfGradientOutcome {
        allocation: ctx.allocation(&x)?,
        objective: objective_value,
        kkt_residual: kkt,
        iterations,
        excluded_tenants: ctx.inst.excluded(),
    })
}

#[derive(Debug, Clone)]
pub struct MmfLpOutcome {
    pub allocation: Allocation,
    /// Max-min weighted rate over the pool.
    pub lambda: f64,
    pub excluded_tenants: Vec<TenantId>,
}

fn rate_row(ctx: &PoolContext, k: usize, nvars: usize) -> Vec<f64> {
    let mut coeffs = vec![0.0; nvars];
    let scale = ctx.rate_scale(k);
    for j in 0..ctx.pool_len() {
        coeffs[j] = ctx.v[k][j] * scale;
    }
    coeffs
}

fn mass_row(ctx: &PoolContext, nvars: usize) -> Vec<f64> {
    let mut coeffs = vec![0.0; nvars];
    for c in coeffs.iter_mut().take(ctx.pool_len()) {
        *c = 1.0;
    }
    coeffs
}

/// One-shot max-min over the pool: maximize the worst weighted rate.
pub fn simple_mmf_lp(instance: &BatchInstance, pool: &[Configuration]) -> Result<MmfLpOutcome> {
    let ctx = PoolContext::build(instance, pool)?;
    let m = ctx.pool_len();
    let nvars = m + 1;
    let mut constraints = Vec::new();
    for k in 0..ctx.n() {
        let mut coeffs = rate_row(&ctx, k, nvars);
        coeffs[m] = -1.0;
        constraints.push(Constraint::new(coeffs, Sense::Ge, 0.0));
    }
    constraints.push(Constraint::new(mass_row(&ctx, nvars), Sense::Le, 1.0));
    let mut objective = vec![0.0; nvars];
    objective[m] = 1.0;
    let sol = lp::solve(&Lp {
        objective,
        constraints,
    })?
    .optimal()?;
    Ok(MmfLpOutcome {
        allocation: ctx.allocation(&sol.x[..m])?,
        lambda: sol.objective,
        excluded_tenants: ctx.inst.excluded(),
    })
}

#[derive(Debug, Clone)]
pub struct LexMmfOutcome {
    pub allocation: Allocation,
    /// Final weighted rate per active tenant.
    pub rates: BTreeMap<TenantId, f64>,
    /// Water-filling levels, one per saturation stage.
    pub levels: Vec<f64>,
    pub excluded_tenants: Vec<TenantId>,
}

const SATURATION_EPS: f64 = 1e-7;

/// Lexicographic max-min over the pool: repeatedly raise the common rate
/// of the unfrozen tenants as far as possible, freeze the ones that cannot
/// go higher (detected by per-tenant probes), and finish with a polish
/// step maximizing the rate sum subject to every frozen level.
pub fn lexicographic_mmf(instance: &BatchInstance, pool: &[Configuration]) -> Result<LexMmfOutcome> {
    let ctx = PoolContext::build(instance, pool)?;
    let n = ctx.n();
    let m = ctx.pool_len();
    let nvars = m + 1;
    let mut frozen: Vec<Option<f64>> = vec![None; n];
    let mut levels = Vec::new();

    while frozen.iter().any(|f| f.is_none()) {
        let open: Vec<usize> = (0..n).filter(|&k| frozen[k].is_none()).collect();
        let mut constraints = Vec::new();
        for k in 0..n {
            let mut coeffs = rate_row(&ctx, k, nvars);
            match frozen[k] {
                None => {
                    coeffs[m] = -1.0;
                    constraints.push(Constraint::new(coeffs, Sense::Ge, 0.0));
                }
                Some(r) => constraints.push(Constraint::new(coeffs, Sense::Ge, r)),
            }
        }
        constraints.push(Constraint::new(mass_row(&ctx, nvars), Sense::Le, 1.0));
        let mut objective = vec![0.0; nvars];
        objective[m] = 1.0;
        let stage = lp::solve(&Lp {
            objective,
            constraints,
        })?
        .optimal()?;
        let level = stage.objective;
        levels.push(level);

        // Probe each open tenant: can it exceed the level while everyone
        // else keeps it?
        let mut saturated = Vec::new();
        let mut slackest: Option<(usize, f64)> = None;
        for &k in &open {
            let mut constraints = Vec::new();
            for i in 0..n {
                let mut coeffs = rate_row(&ctx, i, nvars);
                if i == k {
                    coeffs[m] = -1.0;
                    constraints.push(Constraint::new(coeffs, Sense::Ge, 0.0));
                } else {
                    let floor = frozen[i].unwrap_or(level);
                    constraints.push(Constraint::new(coeffs, Sense::Ge, floor));
                }
            }
            constraints.push(Constraint::new(mass_row(&ctx, nvars), Sense::Le, 1.0));
            let mut objective = vec![0.0; nvars];
            objective[m] = 1.0;
            let reachable = match lp::solve(&Lp {
                objective,
                constraints,
            })? {
                LpOutcome::Optimal(s) => s.objective,
                _ => level,
            };
            if reachable <= level + SATURATION_EPS {
                saturated.push(k);
            }
            if slackest.map_or(true, |(_, r)| reachable < r) {
                slackest = Some((k, reachable));
            }
        }
        if saturated.is_empty() {
            // Numerically everyone claims slack; freeze the tightest.
            saturated.push(slackest.expect("open set is non-empty").0);
        }
        for k in saturated {
            frozen[k] = Some(level);
        }
    }

    // Polish: keep all frozen levels, spend any slack on the rate sum.
    let mut constraints = Vec::new();
    let mut objective = vec![0.0; nvars];
    for k in 0..n {
        let coeffs = rate_row(&ctx, k, nvars);
        for j in 0..m {
            objective[j] += coeffs[j];
        }
        constraints.push(Constraint::new(
            coeffs,
            Sense::Ge,
            frozen[k].expect("all tenants frozen"),
        ));
    }
    constraints.push(Constraint::new(mass_row(&ctx, nvars), Sense::Le, 1.0));
    let polish = lp::solve(&Lp {
        objective,
        constraints,
    })?
    .optimal()?;
    let x = &polish.x[..m];
    let vals = ctx.scaled_utilities(x);
    let rates: BTreeMap<TenantId, f64> = (0..n)
        .map(|k| {
            (
                ctx.inst.compact.tenants[ctx.inst.active[k]].id.clone(),
                vals[k] * ctx.rate_scale(k),
            )
        })
        .collect();
    Ok(LexMmfOutcome {
        allocation: ctx.allocation(x)?,
        rates,
        levels,
        excluded_tenants: ctx.inst.excluded(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{QueryDemand, Tenant, View, ViewId};
    use crate::welfare::enumerate_configurations;

    fn unit_views(ids: &[&str]) -> Vec<View> {
        ids.iter().map(|id| View::new(*id, 1)).collect()
    }

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

    #[test]
    fn prune_contains_every_standalone_optimum() {
        let inst = instance(
            unit_views(&["a", "b", "c"]),
            1,
            vec![
                ("t1", 1.0, vec![(vec!["a"], 9)]),
                ("t2", 1.0, vec![(vec!["b"], 5), (vec!["c"], 2)]),
            ],
        );
        let pool = prune_configurations(&inst, &PruneParams::default()).unwrap();
        let ids: Vec<String> = pool.iter().map(|c| c.joined_ids()).collect();
        assert!(ids.contains(&"a".to_string()), "pool {ids:?}");
        assert!(ids.contains(&"b".to_string()), "pool {ids:?}");
    }

    #[test]
    fn prune_is_deterministic_for_a_fixed_seed() {
        let inst = instance(
            unit_views(&["a", "b", "c", "d"]),
            2,
            vec![
                ("t1", 1.0, vec![(vec!["a"], 3), (vec!["b", "c"], 4)]),
                ("t2", 2.0, vec![(vec!["d"], 2), (vec!["b"], 1)]),
            ],
        );
        let p = PruneParams {
            seed: 42,
            ..Default::default()
        };
        let a = prune_configurations(&inst, &p).unwrap();
        let b = prune_configurations(&inst, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gradient_matches_weighted_split_closed_form() {
        let inst = instance(
            unit_views(&["a", "b"]),
            1,
            vec![
                ("t1", 2.0, vec![(vec!["a"], 10)]),
                ("t2", 1.0, vec![(vec!["b"], 10)]),
            ],
        );
        let pool = enumerate_configurations(&inst).unwrap();
        let out = pf_gradient(&inst, &pool, &PfGradientParams::default()).unwrap();
        let expect = 2.0 * (2.0f64 / 3.0).ln() + (1.0f64 / 3.0).ln();
        assert!(
            (out.objective - expect).abs() < 1e-5,
            "objective {} vs {expect}",
            out.objective
        );
        assert!(out.kkt_residual < 1e-3, "kkt {}", out.kkt_residual);
        let sizes = inst.view_sizes();
        let a = Configuration::new(vec![ViewId::new("a")], &sizes).unwrap();
        assert!((out.allocation.probability_of(&a) - 2.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn gradient_migrates_mass_away_from_a_poor_start() {
        // t1's standalone pick is {a}, but the joint optimum is all mass
        // on {b}, so the start is well off and the ascent has to travel.
        let inst = instance(
            unit_views(&["a", "b"]),
            1,
            vec![
                ("t1", 1.0, vec![(vec!["a"], 2), (vec!["b"], 1)]),
                ("t2", 1.0, vec![(vec!["b"], 1)]),
            ],
        );
        let pool = enumerate_configurations(&inst).unwrap();
        let out = pf_gradient(&inst, &pool, &PfGradientParams::default()).unwrap();
        assert!(out.iterations > 1);
        let expect = 0.5f64.ln();
        assert!(
            (out.objective - expect).abs() < 1e-4,
            "objective {} vs {expect}",
            out.objective
        );
        let sizes = inst.view_sizes();
        let b = Configuration::new(vec![ViewId::new("b")], &sizes).unwrap();
        assert!(
            out.allocation.probability_of(&b) > 0.999,
            "allocation {:?}",
            out.allocation
        );
        assert!(out.kkt_residual < 1e-3, "kkt {}", out.kkt_residual);
    }

    #[test]
    fn gradient_requires_pool_coverage() {
        let inst = instance(
            unit_views(&["a", "b"]),
            1,
            vec![
                ("t1", 1.0, vec![(vec!["a"], 10)]),
                ("t2", 1.0, vec![(vec!["b"], 10)]),
            ],
        );
        let sizes = inst.view_sizes();
        let pool = vec![Configuration::new(vec![ViewId::new("b")], &sizes).unwrap()];
        assert!(matches!(
            pf_gradient(&inst, &pool, &PfGradientParams::default()),
            Err(Error::NoCoverage(id)) if id == "t1"
        ));
    }

    #[test]
    fn mmf_lp_splits_a_contested_slot_evenly() {
        let inst = instance(
            unit_views(&["a", "b"]),
            1,
            vec![
                ("t1", 1.0, vec![(vec!["a"], 10)]),
                ("t2", 1.0, vec![(vec!["b"], 10)]),
            ],
        );
        let pool = enumerate_configurations(&inst).unwrap();
        let out = simple_mmf_lp(&inst, &pool).unwrap();
        assert!((out.lambda - 0.5).abs() < 1e-7, "lambda {}", out.lambda);
    }

    #[test]
    fn lexicographic_stages_raise_the_flexible_tenant() {
        // t1 needs a, t2 needs b, t3 is happy with either; stage one fixes
        // t1 and t2 at 1/2, stage two lifts t3 to 1.
        let inst = instance(
            unit_views(&["a", "b"]),
            1,
            vec![
                ("t1", 1.0, vec![(vec!["a"], 1)]),
                ("t2", 1.0, vec![(vec!["b"], 1)]),
                ("t3", 1.0, vec![(vec!["a"], 1), (vec!["b"], 1)]),
            ],
        );
        let pool = enumerate_configurations(&inst).unwrap();
        let out = lexicographic_mmf(&inst, &pool).unwrap();
        assert_eq!(out.levels.len(), 2, "levels {:?}", out.levels);
        assert!((out.levels[0] - 0.5).abs() < 1e-6);
        assert!((out.levels[1] - 1.0).abs() < 1e-6);
        assert!((out.rates[&TenantId::new("t1")] - 0.5).abs() < 1e-6);
        assert!((out.rates[&TenantId::new("t2")] - 0.5).abs() < 1e-6);
        assert!((out.rates[&TenantId::new("t3")] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_demand_tenants_are_reported_excluded() {
        let inst = instance(
            unit_views(&["a"]),
            1,
            vec![
                ("t1", 1.0, vec![(vec!["a"], 10)]),
                ("idle", 1.0, vec![]),
            ],
        );
        let pool = enumerate_configurations(&inst).unwrap();
        let out = simple_mmf_lp(&inst, &pool).unwrap();
        assert_eq!(out.excluded_tenants, vec![TenantId::new("idle")]);
        assert!((out.lambda - 1.0).abs() < 1e-7);
    }
}
