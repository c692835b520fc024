//! Acceptance gate: ten end-to-end checks covering exact arithmetic on
//! textbook instances, oracle equivalence against in-file brute force,
//! solver guarantees, fairness properties, simulated trends, and
//! determinism. Each check prints one `[acceptance] ... PASS/FAIL` line;
//! run with `cargo test -p cachefair --test acceptance -- --nocapture`
//! to see them. Tolerances are pinned below next to the constants they
//! guard.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cachefair::allocators::{plan, Policy, PolicyParams};
use cachefair::audit::{audit, check_core, check_pe, AuditOptions};
use cachefair::exec;
use cachefair::heuristics::{lexicographic_mmf, pf_gradient, simple_mmf_lp, PfGradientParams};
use cachefair::instances::{random_instance, InstanceFamily};
use cachefair::lp::{self, Constraint, Lp, LpOutcome, Sense};
use cachefair::metrics::{self, MetricsReport};
use cachefair::model::{
    Allocation, BatchInstance, Configuration, QueryDemand, Tenant, TenantId, View, ViewId,
};
use cachefair::mw::{pf_exact, simple_mmf_mw, MmfMwParams, PfExactParams};
use cachefair::sim::{paired_baseline, run, QueryRecord, SimOptions, SimResult, TimeModel};
use cachefair::welfare::{enumerate_configurations, welfare, WelfareMode};
use cachefair::workload::{generate_trace, preset, trace_to_string};

/// Exact-arithmetic comparisons (integer byte values, dyadic weights).
const EXACT_TOL: f64 = 1e-8;
/// Distribution and KKT comparisons on iterative solvers.
const SOLVER_TOL: f64 = 1e-3;
/// Audit margin for the hand-checked verdicts.
const AUDIT_TOL: f64 = 1e-6;
/// Relative shortfall target for the sampling solvers.
const MW_EPSILON: f64 = 0.1;
/// Allowed drop in total scaled utility when comparing the two fairness
/// objectives; the inequality must hold with zero violations at this slack.
const TOTAL_UTILITY_SLACK: f64 = 1e-6;
/// Fairness-index stability per 4-batch step in the convergence check.
const CONVERGENCE_STEP: f64 = 0.02;
/// Allowed spread of shared-policy cache utilization in the scaling check.
const UTILIZATION_SPREAD: f64 = 0.15;

fn criterion(idx: usize, what: &str, body: impl FnOnce()) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let secs = start.elapsed().as_secs_f64();
    let status = if outcome.is_ok() { "PASS" } else { "FAIL" };
    println!("[acceptance] criterion {idx:>2} {status} {what} ({secs:.2} s)");
    if let Err(payload) = outcome {
        resume_unwind(payload);
    }
}

fn make_instance(
    views: &[(&str, u64)],
    budget: u64,
    tenants: &[(&str, f64, &[(&[&str], u64)])],
) -> BatchInstance {
    let vs: Vec<View> = views.iter().map(|&(id, s)| View::new(id, s)).collect();
    let ts: Vec<Tenant> = tenants.iter().map(|&(id, w, _)| Tenant::new(id, w)).collect();
    let mut demands = BTreeMap::new();
    for &(id, _, ds) in tenants {
        demands.insert(
            TenantId::new(id),
            ds.iter()
                .map(|&(req, val)| QueryDemand::new(req.iter().copied().map(ViewId::new), val))
                .collect(),
        );
    }
    BatchInstance::new(ts, vs, budget, demands).unwrap()
}

fn cfg(instance: &BatchInstance, ids: &[&str]) -> Configuration {
    Configuration::new(ids.iter().copied().map(ViewId::new), &instance.view_sizes()).unwrap()
}

fn make_alloc(instance: &BatchInstance, entries: &[(&[&str], f64)]) -> Allocation {
    Allocation::new(
        entries
            .iter()
            .map(|&(ids, p)| (cfg(instance, ids), p))
            .collect(),
    )
    .unwrap()
}

fn tenant_weights(instance: &BatchInstance) -> BTreeMap<TenantId, f64> {
    instance
        .tenants()
        .iter()
        .map(|t| (t.id.clone(), t.weight))
        .collect()
}

/// `n_r` tenants want view r, one tenant wants view s; unit sizes, budget 1.
fn contention_instance(n_r: usize) -> BatchInstance {
    let views = vec![View::new("r", 1), View::new("s", 1)];
    let mut tenants = Vec::new();
    let mut demands = BTreeMap::new();
    for i in 1..=n_r {
        let id = format!("r{i}");
        tenants.push(Tenant::new(id.clone(), 1.0));
        demands.insert(
            TenantId::new(id),
            vec![QueryDemand::new([ViewId::new("r")], 1)],
        );
    }
    tenants.push(Tenant::new("s1", 1.0));
    demands.insert(
        TenantId::new("s1"),
        vec![QueryDemand::new([ViewId::new("s")], 1)],
    );
    BatchInstance::new(tenants, views, 1, demands).unwrap()
}

fn tight_gradient() -> PfGradientParams {
    PfGradientParams {
        tolerance: 1e-12,
        max_iterations: 200_000,
        support_epsilon: 1e-9,
    }
}

fn total_scaled(instance: &BatchInstance, allocation: &Allocation) -> f64 {
    instance
        .tenants()
        .iter()
        .map(|t| instance.scaled_utility(&t.id, allocation).unwrap())
        .sum()
}

#[test]
fn c01_textbook_instances_solve_exactly() {
    criterion(
        1,
        "welfare, max-min, proportional fairness, and audit verdicts on textbook instances",
        || {
            let start = Instant::now();

            // Shared-office example: three unit views, a VP with weight 1.5.
            let office = |budget| {
                make_instance(
                    &[("p", 1), ("r", 1), ("s", 1)],
                    budget,
                    &[
                        ("analyst", 1.0, &[(&["r"][..], 2), (&["s"][..], 1)][..]),
                        ("engineer", 1.0, &[(&["r"][..], 2), (&["s"][..], 1)][..]),
                        ("vp", 1.5, &[(&["s"][..], 1), (&["p"][..], 2)][..]),
                    ],
                )
            };
            let one = office(1);
            let sol = welfare(&one, &tenant_weights(&one), WelfareMode::Raw).unwrap();
            assert_eq!(sol.value, 4.0);
            assert_eq!(sol.configuration, cfg(&one, &["r"]));
            let two = office(2);
            let sol = welfare(&two, &tenant_weights(&two), WelfareMode::Raw).unwrap();
            assert_eq!(sol.value, 7.5);
            assert_eq!(sol.configuration, cfg(&two, &["r", "s"]));

            // Two-view contention pair: max-min splits the lottery evenly.
            let pair = contention_instance(1);
            let pool = enumerate_configurations(&pair).unwrap();
            let mmf_lp = simple_mmf_lp(&pair, &pool).unwrap();
            assert!((mmf_lp.lambda - 0.5).abs() <= AUDIT_TOL);
            let lex = lexicographic_mmf(&pair, &pool).unwrap();
            for rate in lex.rates.values() {
                assert!((rate - 0.5).abs() <= AUDIT_TOL);
            }
            assert!((lex.allocation.probability_of(&cfg(&pair, &["r"])) - 0.5).abs() <= SOLVER_TOL);
            assert!((lex.allocation.probability_of(&cfg(&pair, &["s"])) - 0.5).abs() <= SOLVER_TOL);

            // With n-1 tenants on r and one on s, proportional fairness
            // gives the majority side (n-1)/n of the lottery.
            for n in 2..=5usize {
                let inst = contention_instance(n - 1);
                let pool = enumerate_configurations(&inst).unwrap();
                let out = pf_gradient(&inst, &pool, &tight_gradient()).unwrap();
                let pr = out.allocation.probability_of(&cfg(&inst, &["r"]));
                let ps = out.allocation.probability_of(&cfg(&inst, &["s"]));
                assert!((pr - (n as f64 - 1.0) / n as f64).abs() <= SOLVER_TOL, "n={n} pr={pr}");
                assert!((ps - 1.0 / n as f64).abs() <= SOLVER_TOL, "n={n} ps={ps}");
            }

            // Serial dictatorship's uniform singleton lottery wastes mass
            // on p while everyone tolerates s: not Pareto-efficient.
            let skewed = make_instance(
                &[("p", 1), ("r", 1), ("s", 1)],
                1,
                &[
                    ("a", 1.0, &[(&["r"][..], 2), (&["s"][..], 1)][..]),
                    ("b", 1.0, &[(&["s"][..], 1)][..]),
                    ("c", 1.0, &[(&["s"][..], 1), (&["p"][..], 2)][..]),
                ],
            );
            let rsd = plan(Policy::Rsd, &skewed, &PolicyParams::with_seed(0)).unwrap();
            let thirds = make_alloc(
                &skewed,
                &[(&["r"][..], 1.0 / 3.0), (&["s"][..], 1.0 / 3.0), (&["p"][..], 1.0 / 3.0)],
            );
            assert!(rsd.allocation.max_probability_gap(&thirds) <= 1e-9);
            let pe = check_pe(&skewed, &rsd.allocation, AUDIT_TOL).unwrap();
            assert!(!pe.pass);
            assert!(pe.improvement > 0.1);

            // Asymmetric pair: the even lottery leaves no coalition a
            // profitable deviation.
            let uneven = make_instance(
                &[("r", 1), ("s", 1)],
                1,
                &[
                    ("a", 1.0, &[(&["s"][..], 1)][..]),
                    ("b", 1.0, &[(&["r"][..], 100), (&["s"][..], 1)][..]),
                ],
            );
            let half = make_alloc(&uneven, &[(&["r"][..], 0.5), (&["s"][..], 0.5)]);
            assert!(check_core(&uneven, &half, AUDIT_TOL).unwrap().pass);

            // Three-tenant contention: max-min still splits evenly, and the
            // two r-tenants can pool their 2/3 endowment to block it.
            let trio = contention_instance(2);
            let pool = enumerate_configurations(&trio).unwrap();
            let lex = lexicographic_mmf(&trio, &pool).unwrap();
            assert!((lex.allocation.probability_of(&cfg(&trio, &["r"])) - 0.5).abs() <= AUDIT_TOL);
            let core = check_core(&trio, &lex.allocation, AUDIT_TOL).unwrap();
            assert!(!core.pass);
            let (members, gain) = core.blocking.unwrap();
            assert_eq!(members, vec![TenantId::new("r1"), TenantId::new("r2")]);
            assert!((gain - 1.0 / 3.0).abs() <= SOLVER_TOL);

            assert!(start.elapsed().as_secs_f64() < 1.0, "textbook checks must finish in under a second");
        },
    );
}

/// Exhaustive welfare argmax with the canonical tie-break: highest value,
/// then smallest footprint, then lexicographically smallest view-id set.
fn brute_force_compare(instance: &BatchInstance) {
    let mut views: Vec<&View> = instance.candidate_views().iter().collect();
    views.sort_by(|a, b| a.id.cmp(&b.id));
    let v = views.len();
    assert!(v <= 20);
    let index_of: BTreeMap<&ViewId, usize> =
        views.iter().enumerate().map(|(i, w)| (&w.id, i)).collect();
    let budget = instance.cache_budget_bytes();

    // Per-tenant demand masks, then one pass per mode.
    let tenants = instance.tenants();
    let demand_masks: Vec<Vec<(u64, f64)>> = tenants
        .iter()
        .map(|t| {
            instance
                .demands(&t.id)
                .iter()
                .map(|d| {
                    let mask = d
                        .required
                        .iter()
                        .fold(0u64, |m, id| m | 1 << index_of[id]);
                    (mask, d.value_bytes as f64)
                })
                .collect()
        })
        .collect();

    let lex_smaller = |a: u64, b: u64| -> bool {
        let bits = |m: u64| (0..v).filter(move |i| m >> i & 1 == 1).collect::<Vec<_>>();
        bits(a) < bits(b)
    };

    let mut umax = vec![0.0f64; tenants.len()];
    let mut best_raw: Option<(u64, f64, u64)> = None;
    for mask in 0..(1u64 << v) {
        let size: u64 = (0..v).filter(|i| mask >> i & 1 == 1).map(|i| views[i].size_bytes).sum();
        if size > budget {
            continue;
        }
        let mut raw = 0.0;
        for (k, t) in tenants.iter().enumerate() {
            let u: f64 = demand_masks[k]
                .iter()
                .filter(|(req, _)| mask & req == *req)
                .map(|(_, val)| val)
                .sum();
            umax[k] = umax[k].max(u);
            raw += t.weight * u;
        }
        let replace = match best_raw {
            None => true,
            Some((bm, bv, bs)) => {
                raw > bv || (raw == bv && (size < bs || (size == bs && lex_smaller(mask, bm))))
            }
        };
        if replace {
            best_raw = Some((mask, raw, size));
        }
    }
    let (best_mask, best_value, _) = best_raw.unwrap();

    let lib = welfare(instance, &tenant_weights(instance), WelfareMode::Raw).unwrap();
    assert!((lib.value - best_value).abs() <= EXACT_TOL);
    let ids: Vec<ViewId> = (0..v).filter(|i| best_mask >> i & 1 == 1).map(|i| views[i].id.clone()).collect();
    let expect = Configuration::new(ids, &instance.view_sizes()).unwrap();
    assert_eq!(lib.configuration, expect);

    // Second pass once the standalone maxima are known.
    let mut best_scaled = 0.0f64;
    for mask in 0..(1u64 << v) {
        let size: u64 = (0..v).filter(|i| mask >> i & 1 == 1).map(|i| views[i].size_bytes).sum();
        if size > budget {
            continue;
        }
        let mut scaled = 0.0;
        for (k, t) in tenants.iter().enumerate() {
            if umax[k] <= 0.0 {
                continue;
            }
            let u: f64 = demand_masks[k]
                .iter()
                .filter(|(req, _)| mask & req == *req)
                .map(|(_, val)| val)
                .sum();
            scaled += t.weight * u / umax[k];
        }
        best_scaled = best_scaled.max(scaled);
    }
    let lib = welfare(instance, &tenant_weights(instance), WelfareMode::Scaled).unwrap();
    assert!((lib.value - best_scaled).abs() <= EXACT_TOL);
}

type Row = (Vec<f64>, Sense, f64);

fn random_lp(seed: u64) -> (Vec<Row>, Vec<f64>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=6usize);
    let m = rng.gen_range(1..=5usize);
    let mut rows: Vec<Row> = (0..m)
        .map(|_| {
            let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-4..=4) as f64).collect();
            let sense = match rng.gen_range(0..10) {
                0..=5 => Sense::Le,
                6..=7 => Sense::Ge,
                _ => Sense::Eq,
            };
            (coeffs, sense, rng.gen_range(-4..=10) as f64)
        })
        .collect();
    // A box row keeps every generated program bounded.
    rows.push((vec![1.0; n], Sense::Le, rng.gen_range(2..=12) as f64));
    let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
    (rows, objective, n)
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn for_each_combination(total: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > total {
        return;
    }
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + total - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Best objective over feasible basic points: every choice of `n` active
/// hyperplanes among the constraint rows and the axes. `None` when no
/// feasible vertex exists, which for these bounded programs means the
/// feasible region is empty.
fn vertex_optimum(rows: &[Row], objective: &[f64], n: usize) -> Option<f64> {
    const FEAS: f64 = 1e-7;
    let mut planes: Vec<(Vec<f64>, f64)> =
        rows.iter().map(|(c, _, r)| (c.clone(), *r)).collect();
    for i in 0..n {
        let mut axis = vec![0.0; n];
        axis[i] = 1.0;
        planes.push((axis, 0.0));
    }
    let mut best: Option<f64> = None;
    for_each_combination(planes.len(), n, &mut |subset| {
        let a: Vec<Vec<f64>> = subset.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<f64> = subset.iter().map(|&i| planes[i].1).collect();
        let Some(x) = solve_square(a, b) else { return };
        if x.iter().any(|&xi| xi < -FEAS) {
            return;
        }
        for (coeffs, sense, rhs) in rows {
            let lhs: f64 = coeffs.iter().zip(&x).map(|(c, xi)| c * xi).sum();
            let ok = match sense {
                Sense::Le => lhs <= rhs + FEAS,
                Sense::Ge => lhs >= rhs - FEAS,
                Sense::Eq => (lhs - rhs).abs() <= FEAS,
            };
            if !ok {
                return;
            }
        }
        let value: f64 = objective.iter().zip(&x).map(|(c, xi)| c * xi).sum();
        best = Some(best.map_or(value, |b: f64| b.max(value)));
    });
    best
}

#[test]
fn c02_solvers_match_in_file_brute_force() {
    criterion(
        2,
        "welfare equals exhaustive search; the LP solver equals vertex enumeration",
        || {
            let start = Instant::now();
            for i in 0..200u64 {
                let family = InstanceFamily::new(4, 20, i >= 100);
                let instance = random_instance(&family, 2000 + i).unwrap();
                brute_force_compare(&instance);
            }
            let mut infeasible = 0;
            for i in 0..100u64 {
                let (rows, objective, n) = random_lp(2800 + i);
                let lp = Lp {
                    objective: objective.clone(),
                    constraints: rows
                        .iter()
                        .map(|(c, s, r)| Constraint::new(c.clone(), *s, *r))
                        .collect(),
                };
                match (lp::solve(&lp).unwrap(), vertex_optimum(&rows, &objective, n)) {
                    (LpOutcome::Optimal(sol), Some(best)) => assert!(
                        (sol.objective - best).abs() <= EXACT_TOL,
                        "seed {}: simplex {} vs vertices {}",
                        2800 + i,
                        sol.objective,
                        best
                    ),
                    (LpOutcome::Infeasible, None) => infeasible += 1,
                    (outcome, best) => panic!(
                        "seed {}: simplex says {outcome:?}, vertex enumeration says {best:?}",
                        2800 + i
                    ),
                }
            }
            // The generator must exercise both outcomes.
            assert!(infeasible > 0 && infeasible < 100, "infeasible count {infeasible}");
            assert!(start.elapsed().as_secs_f64() < 60.0);
        },
    );
}

#[test]
fn c03_sampling_solvers_meet_their_guarantees() {
    criterion(
        3,
        "multiplicative-weights max-min and the exact fairness search meet their bounds",
        || {
            let start = Instant::now();
            let family = InstanceFamily::new(4, 6, false);
            let seeds: Vec<u64> = (0..50).map(|i| 3000 + i).collect();
            let shortfalls = exec::map(&seeds, |&seed: &u64| {
                let instance = random_instance(&family, seed).unwrap();
                let pool = enumerate_configurations(&instance).unwrap();
                let target = simple_mmf_lp(&instance, &pool).unwrap().lambda;
                let mw = simple_mmf_mw(&instance, &MmfMwParams { epsilon: MW_EPSILON }).unwrap();
                (seed, mw.min_rate, target)
            });
            for (seed, rate, target) in shortfalls {
                assert!(
                    rate >= (1.0 - MW_EPSILON) * target - 1e-9,
                    "seed {seed}: min rate {rate} below 0.9 * {target}"
                );
            }
            let seeds: Vec<u64> = (0..25).map(|i| 3500 + i).collect();
            let gaps = exec::map(&seeds, |&seed: &u64| {
                let instance = random_instance(&family, seed).unwrap();
                let pool = enumerate_configurations(&instance).unwrap();
                let reference = pf_gradient(&instance, &pool, &tight_gradient()).unwrap();
                let exact = pf_exact(
                    &instance,
                    &PfExactParams {
                        epsilon: MW_EPSILON,
                        ..Default::default()
                    },
                )
                .unwrap();
                (seed, exact.objective, reference.objective)
            });
            for (seed, got, reference) in gaps {
                assert!(
                    got >= reference - MW_EPSILON,
                    "seed {seed}: objective {got} more than 0.1 below reference {reference}"
                );
            }
            assert!(start.elapsed().as_secs_f64() < 600.0);
        },
    );
}

#[test]
fn c04_fair_policies_always_land_in_the_core() {
    criterion(
        4,
        "exact and pooled proportional fairness pass the core audit on 100 instances",
        || {
            let mut cases: Vec<(u64, bool)> = Vec::new();
            for i in 0..50u64 {
                cases.push((4000 + i, false));
                cases.push((4500 + i, true));
            }
            let verdicts = exec::map(&cases, |&(seed, weighted): &(u64, bool)| {
                let family = InstanceFamily::new(4, 5, weighted);
                let instance = random_instance(&family, seed).unwrap();
                let exact = pf_exact(
                    &instance,
                    &PfExactParams {
                        epsilon: MW_EPSILON,
                        ..Default::default()
                    },
                )
                .unwrap();
                let exact_core = check_core(&instance, &exact.allocation, SOLVER_TOL).unwrap();
                let pool = enumerate_configurations(&instance).unwrap();
                let pooled = pf_gradient(&instance, &pool, &tight_gradient()).unwrap();
                let pooled_core = check_core(&instance, &pooled.allocation, SOLVER_TOL).unwrap();
                (seed, weighted, exact_core.pass, pooled_core.pass)
            });
            assert_eq!(verdicts.len(), 100);
            for (seed, weighted, exact_pass, pooled_pass) in verdicts {
                assert!(
                    exact_pass && pooled_pass,
                    "seed {seed} weighted={weighted}: exact in core: {exact_pass}, pooled in core: {pooled_pass}"
                );
            }
        },
    );
}

/// `group_sizes[i]` identical tenants per view, unit sizes, budget 1.
fn grouped_instance(group_sizes: &[usize]) -> BatchInstance {
    let views: Vec<View> = (1..=group_sizes.len())
        .map(|i| View::new(format!("g{i}"), 1))
        .collect();
    let mut tenants = Vec::new();
    let mut demands = BTreeMap::new();
    for (i, &count) in group_sizes.iter().enumerate() {
        for j in 1..=count {
            let id = format!("g{}t{j}", i + 1);
            tenants.push(Tenant::new(id.clone(), 1.0));
            demands.insert(
                TenantId::new(id),
                vec![QueryDemand::new([views[i].id.clone()], 1)],
            );
        }
    }
    BatchInstance::new(tenants, views, 1, demands).unwrap()
}

#[test]
fn c05_proportional_fairness_never_trails_max_min_on_total_utility() {
    criterion(
        5,
        "total scaled utility of proportional fairness >= max-min on 200 instances",
        || {
            for i in 0..100u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(5000 + i);
                let k = rng.gen_range(2..=5usize);
                let group_sizes: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=5)).collect();
                let instance = grouped_instance(&group_sizes);
                let pool = enumerate_configurations(&instance).unwrap();
                let mmf = lexicographic_mmf(&instance, &pool).unwrap();
                let pf = pf_gradient(&instance, &pool, &tight_gradient()).unwrap();
                let mmf_total = total_scaled(&instance, &mmf.allocation);
                let pf_total = total_scaled(&instance, &pf.allocation);
                assert!(
                    pf_total >= mmf_total - TOTAL_UTILITY_SLACK,
                    "groups {group_sizes:?}: pf {pf_total} < mmf {mmf_total}"
                );
                // Closed forms for this family: max-min levels every view at
                // 1/k; proportional fairness weights views by group size.
                let n: usize = group_sizes.iter().sum();
                assert!((mmf_total - n as f64 / k as f64).abs() <= TOTAL_UTILITY_SLACK);
                let pf_expected =
                    group_sizes.iter().map(|&s| (s * s) as f64).sum::<f64>() / n as f64;
                assert!((pf_total - pf_expected).abs() <= SOLVER_TOL);
            }
            let family = InstanceFamily::new(2, 5, false);
            for i in 0..100u64 {
                let instance = random_instance(&family, 5500 + i).unwrap();
                let pool = enumerate_configurations(&instance).unwrap();
                let mmf = lexicographic_mmf(&instance, &pool).unwrap();
                let pf = pf_gradient(&instance, &pool, &tight_gradient()).unwrap();
                let mmf_total = total_scaled(&instance, &mmf.allocation);
                let pf_total = total_scaled(&instance, &pf.allocation);
                assert!(
                    pf_total >= mmf_total - TOTAL_UTILITY_SLACK,
                    "seed {}: pf {pf_total} < mmf {mmf_total}",
                    5500 + i
                );
            }
        },
    );
}

#[test]
fn c06_gradient_fixed_point_satisfies_the_stationarity_identity() {
    criterion(
        6,
        "supported configurations price at exactly N under the gradient solution",
        || {
            let family = InstanceFamily::new(4, 5, false);
            let mut worst: f64 = 0.0;
            for i in 0..50u64 {
                let instance = random_instance(&family, 6000 + i).unwrap();
                let pool = enumerate_configurations(&instance).unwrap();
                let out = pf_gradient(&instance, &pool, &tight_gradient()).unwrap();
                assert!(out.excluded_tenants.is_empty());
                let n = instance.tenants().len() as f64;
                let values: BTreeMap<&TenantId, f64> = instance
                    .tenants()
                    .iter()
                    .map(|t| {
                        (&t.id, instance.scaled_utility(&t.id, &out.allocation).unwrap())
                    })
                    .collect();
                for (config, p) in out.allocation.support() {
                    if *p <= 1e-6 {
                        continue;
                    }
                    let price: f64 = instance
                        .tenants()
                        .iter()
                        .map(|t| instance.scaled_utility(&t.id, &Allocation::deterministic(config.clone())).unwrap() / values[&t.id])
                        .sum();
                    let gap = (price - n).abs();
                    worst = worst.max(gap);
                    assert!(
                        gap <= SOLVER_TOL,
                        "seed {}: config {} prices at {price}, expected {n}",
                        6000 + i,
                        config.joined_ids()
                    );
                }
            }
            assert!(worst <= SOLVER_TOL);
        },
    );
}

#[test]
fn c07_fairness_index_arithmetic_matches_the_reference_pair() {
    criterion(7, "speedups (0.67, 1.41) produce fairness index 0.888", || {
        let record = |tenant: &str, query_id: usize, runtime_s: f64| QueryRecord {
            query_id,
            tenant: TenantId::new(tenant),
            batch: 0,
            hit: false,
            runtime_s,
        };
        let shell = |queries: Vec<QueryRecord>| SimResult {
            scenario: "pair".into(),
            policy: "probe".into(),
            seed: 0,
            cache_budget_bytes: 1,
            batch_s: 1.0,
            wall_time_s: 1.0,
            batches: Vec::new(),
            queries,
        };
        let result = shell(vec![record("a", 0, 1.0), record("b", 1, 1.0)]);
        let baseline = shell(vec![record("a", 0, 0.67), record("b", 1, 1.41)]);
        let weights: BTreeMap<TenantId, f64> =
            [(TenantId::new("a"), 1.0), (TenantId::new("b"), 1.0)].into();
        let index = metrics::fairness_index(&result, &baseline, &weights).unwrap();
        assert!((index - 0.888).abs() <= 0.001, "index {index}");
    });
}

#[test]
fn c08_preset_trends_reproduce() {
    criterion(
        8,
        "simulated trends: hit ratios, throughput, starvation, and scaling",
        || {
            let start = Instant::now();
            let time_model = TimeModel::default();
            let policies = [Policy::Static, Policy::Mmf, Policy::FastPf, Policy::OptP];
            let shared = [Policy::Mmf, Policy::FastPf, Policy::OptP];
            let names = [
                "mixed-1", "mixed-2", "mixed-3", "mixed-4", "sales-4", "scale-2", "scale-4",
                "scale-8",
            ];
            // Trend metrics averaged over a pinned seed set: individual
            // seeds put the narrow comparisons within simulation noise,
            // the three-seed means leave margins of a couple percent.
            let seeds = [0u64, 1, 2];
            let mut sums: BTreeMap<(&str, Policy), MetricsReport> = BTreeMap::new();
            for name in names {
                let spec = preset(name).unwrap();
                let weights: BTreeMap<TenantId, f64> = spec
                    .tenants
                    .iter()
                    .map(|t| (TenantId::new(&t.id), t.weight))
                    .collect();
                for seed in seeds {
                    let baseline = paired_baseline(&spec, &time_model, seed).unwrap();
                    for policy in policies {
                        let result = if policy == Policy::Static {
                            baseline.clone()
                        } else {
                            run(
                                &spec,
                                policy,
                                &PolicyParams::with_seed(seed),
                                &time_model,
                                &SimOptions::stateless(),
                                seed,
                            )
                            .unwrap()
                        };
                        let report = metrics::report(&result, &baseline, &weights).unwrap();
                        sums.entry((name, policy))
                            .and_modify(|acc| {
                                acc.throughput_per_min += report.throughput_per_min;
                                acc.fairness_index += report.fairness_index;
                                acc.avg_cache_utilization += report.avg_cache_utilization;
                                acc.hit_ratio += report.hit_ratio;
                            })
                            .or_insert(report);
                    }
                }
            }
            let k = seeds.len() as f64;
            let g = |name: &str, policy: Policy| {
                let mut mean = sums[&(name, policy)].clone();
                mean.throughput_per_min /= k;
                mean.fairness_index /= k;
                mean.avg_cache_utilization /= k;
                mean.hit_ratio /= k;
                mean
            };

            // (a) Homogeneous mix: partitioned shares cannot hold the big
            // shared view, a pooled cache holds the whole working set.
            assert!(g("mixed-1", Policy::Static).hit_ratio <= 1e-9);
            for policy in shared {
                assert!(g("mixed-1", policy).hit_ratio >= 0.999, "{policy} hit ratio");
            }

            // (b) Pooling beats partitioning on throughput across the
            // mixed presets.
            for name in ["mixed-1", "mixed-2", "mixed-3", "mixed-4"] {
                let fenced = g(name, Policy::Static).throughput_per_min;
                for policy in shared {
                    let pooled = g(name, policy).throughput_per_min;
                    assert!(pooled > fenced, "{name}/{policy}: {pooled} <= {fenced}");
                }
            }

            // (c) Pure welfare maximization starves the odd tenant out in
            // the most heterogeneous preset; the fair policies do not.
            let optp = g("sales-4", Policy::OptP).fairness_index;
            let mmf = g("sales-4", Policy::Mmf).fairness_index;
            let fastpf = g("sales-4", Policy::FastPf).fairness_index;
            assert!(mmf >= 0.9 && fastpf >= 0.9, "mmf {mmf} fastpf {fastpf}");
            assert!(optp < mmf && optp < fastpf, "optp {optp} vs mmf {mmf}, fastpf {fastpf}");

            // (d) Fixed per-tenant shares waste more of the cache as the
            // tenant count grows; pooled policies track each other.
            let scales = ["scale-2", "scale-4", "scale-8"];
            let fenced: Vec<f64> = scales
                .iter()
                .map(|n| g(n, Policy::Static).avg_cache_utilization)
                .collect();
            assert!(fenced[0] > fenced[1] && fenced[1] > fenced[2], "{fenced:?}");
            for name in scales {
                let utils: Vec<f64> = shared
                    .iter()
                    .map(|&p| g(name, p).avg_cache_utilization)
                    .collect();
                let spread = utils.iter().cloned().fold(f64::MIN, f64::max)
                    - utils.iter().cloned().fold(f64::MAX, f64::min);
                assert!(spread <= UTILIZATION_SPREAD, "{name}: spread {spread} from {utils:?}");
            }

            assert!(start.elapsed().as_secs_f64() < 900.0);
        },
    );
}

#[test]
fn c09_fairness_index_stabilizes_over_long_runs() {
    criterion(
        9,
        "fairness settles to within 0.02 per 4-batch step after batch 25",
        || {
            let mut spec = preset("sales-1").unwrap();
            spec.batches = 50;
            let time_model = TimeModel::default();
            let weights: BTreeMap<TenantId, f64> = spec
                .tenants
                .iter()
                .map(|t| (TenantId::new(&t.id), t.weight))
                .collect();
            let baseline = paired_baseline(&spec, &time_model, 0).unwrap();
            for policy in [Policy::Mmf, Policy::FastPf] {
                let result = run(
                    &spec,
                    policy,
                    &PolicyParams::with_seed(0),
                    &time_model,
                    &SimOptions::stateless(),
                    0,
                )
                .unwrap();
                let series: BTreeMap<usize, f64> =
                    metrics::convergence_series(&result, &baseline, &weights)
                        .unwrap()
                        .into_iter()
                        .collect();
                for b in (26..=46).step_by(2) {
                    let now = series[&b];
                    let later = series[&(b + 4)];
                    assert!(
                        (later - now).abs() < CONVERGENCE_STEP,
                        "{policy}: index moved {} between batches {b} and {}",
                        later - now,
                        b + 4
                    );
                }
            }
        },
    );
}

#[test]
fn c10_equal_seeds_reproduce_everything() {
    criterion(
        10,
        "traces, simulations, plans, and audits are identical across same-seed executions",
        || {
            let mut spec = preset("sales-1").unwrap();
            spec.batches = 4;
            let time_model = TimeModel::default();

            let once = trace_to_string(&generate_trace(&spec, 7).unwrap()).unwrap();
            let again = trace_to_string(&generate_trace(&spec, 7).unwrap()).unwrap();
            assert_eq!(once, again);

            for policy in [Policy::Mmf, Policy::Rsd, Policy::FastPf] {
                let go = || {
                    run(
                        &spec,
                        policy,
                        &PolicyParams::with_seed(7),
                        &time_model,
                        &SimOptions::stateless(),
                        7,
                    )
                    .unwrap()
                };
                let first = go();
                assert_eq!(first, go());
                // The sequential fallback must not change results either.
                assert_eq!(first, exec::with_sequential(go));
            }

            let instance = random_instance(&InstanceFamily::new(4, 5, true), 77).unwrap();
            let options = AuditOptions {
                tolerance: AUDIT_TOL,
                check_core: true,
            };
            for policy in Policy::ALL {
                let first = plan(policy, &instance, &PolicyParams::with_seed(3)).unwrap();
                let second = plan(policy, &instance, &PolicyParams::with_seed(3)).unwrap();
                assert_eq!(format!("{first:?}"), format!("{second:?}"));
                let audited = audit(&instance, &first.allocation, &options).unwrap();
                let again = audit(&instance, &second.allocation, &options).unwrap();
                assert_eq!(format!("{audited:?}"), format!("{again:?}"));
            }
        },
    );
}
