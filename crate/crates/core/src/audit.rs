//! Fairness audits of a concrete allocation.
//!
//! Sharing incentive compares each tenant's scaled utility against its
//! weight share. Pareto efficiency and core membership are certified by
//! linear programs over the full configuration set, so they require an
//! enumerable catalog; core membership additionally scans every coalition,
//! asking whether that group could redeploy its own slice of the lottery
//! to do strictly better.

use std::collections::BTreeMap;

use crate::compact::Compact;
use crate::error::{Error, Result};
use crate::exec;
use crate::lp::{self, Constraint, Lp, LpOutcome, Sense};
use crate::model::{Allocation, BatchInstance, TenantId};
use crate::welfare::enumerate_masks;

#[derive(Debug, Clone)]
pub struct AuditOptions {
    /// Slack below which a violation is ignored.
    pub tolerance: f64,
    /// Core membership is exponential in the tenant count; set false to
    /// audit only sharing incentive and Pareto efficiency.
    pub check_core: bool,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            tolerance: 1e-6,
            check_core: true,
        }
    }
}

/// Coalition scans are capped to this many active tenants.
pub const CORE_TENANT_LIMIT: usize = 16;

#[derive(Debug, Clone)]
pub struct SiReport {
    pub pass: bool,
    /// Scaled utility per active tenant.
    pub values: BTreeMap<TenantId, f64>,
    /// Weight share per active tenant.
    pub floors: BTreeMap<TenantId, f64>,
    /// Smallest `value - floor`; negative means a violation.
    pub worst_slack: f64,
}

#[derive(Debug, Clone)]
pub struct PeReport {
    pub pass: bool,
    /// Best achievable sum of scaled-utility gains over a dominating
    /// allocation; zero (up to tolerance) certifies efficiency.
    pub improvement: f64,
}

#[derive(Debug, Clone)]
pub struct CoreReport {
    pub pass: bool,
    pub coalitions_checked: usize,
    /// Worst blocking coalition and its total scaled-utility gain.
    pub blocking: Option<(Vec<TenantId>, f64)>,
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub si: SiReport,
    pub pe: PeReport,
    pub core: Option<CoreReport>,
}

impl std::fmt::Display for AuditReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "sharing incentive: {} (worst slack {:+.6})",
            if self.si.pass { "pass" } else { "FAIL" },
            self.si.worst_slack
        )?;
        writeln!(
            f,
            "pareto efficiency: {} (best improvement {:.6})",
            if self.pe.pass { "pass" } else { "FAIL" },
            self.pe.improvement
        )?;
        match &self.core {
            Some(core) => match &core.blocking {
                Some((members, gain)) => writeln!(
                    f,
                    "core membership: FAIL (coalition {} gains {:.6})",
                    members
                        .iter()
                        .map(|t| t.0.clone())
                        .collect::<Vec<_>>()
                        .join("+"),
                    gain
                ),
                None => writeln!(
                    f,
                    "core membership: pass ({} coalitions)",
                    core.coalitions_checked
                ),
            },
            None => writeln!(f, "core membership: skipped"),
        }
    }
}

struct AuditContext {
    compact: Compact,
    active: Vec<usize>,
    /// Weight share of each active tenant against the full weight total.
    shares: Vec<f64>,
    masks: Vec<u64>,
    /// `v[k][j]` = scaled utility of enumerated configuration `j` for
    /// active tenant `k`.
    v: Vec<Vec<f64>>,
    /// Scaled utility of the audited allocation per active tenant.
    current: Vec<f64>,
}

impl AuditContext {
    fn build(instance: &BatchInstance, allocation: &Allocation) -> Result<Self> {
        let compact = Compact::build(instance)?;
        let active = compact.active();
        if active.is_empty() {
            return Err(Error::NoActiveTenants);
        }
        let total: f64 = compact.tenants.iter().map(|t| t.weight).sum();
        let shares: Vec<f64> = active
            .iter()
            .map(|&i| compact.tenants[i].weight / total)
            .collect();
        let masks = enumerate_masks(&compact)?;
        let v: Vec<Vec<f64>> = active
            .iter()
            .map(|&i| {
                let u = compact.tenants[i].max_utility;
                masks
                    .iter()
                    .map(|&m| compact.utility_mask(i, m) / u)
                    .collect()
            })
            .collect();
        let mut current = vec![0.0; active.len()];
        for (cfg, p) in allocation.support() {
            let mask = compact.configuration_to_mask(cfg)?;
            for (k, &i) in active.iter().enumerate() {
                current[k] += p * compact.utility_mask(i, mask) / compact.tenants[i].max_utility;
            }
        }
        Ok(AuditContext {
            compact,
            active,
            shares,
            masks,
            v,
            current,
        })
    }

    fn tenant_id(&self, k: usize) -> TenantId {
        self.compact.tenants[self.active[k]].id.clone()
    }

    /// Best total scaled-utility gain for `members` using `mass` of the
    /// lottery, keeping every member at least whole.
    fn improvement_lp(&self, members: &[usize], mass: f64) -> Result<f64> {
        let m = self.masks.len();
        let mut constraints = Vec::with_capacity(members.len() + 1);
        for &k in members {
            constraints.push(Constraint::new(self.v[k].clone(), Sense::Ge, self.current[k]));
        }
        constraints.push(Constraint::new(vec![1.0; m], Sense::Le, mass));
        let mut objective = vec![0.0; m];
        for &k in members {
            for j in 0..m {
                objective[j] += self.v[k][j];
            }
        }
        let base: f64 = members.iter().map(|&k| self.current[k]).sum();
        match lp::solve(&Lp {
            objective,
            constraints,
        })? {
            LpOutcome::Optimal(s) => Ok(s.objective - base),
            LpOutcome::Infeasible => Ok(0.0),
            LpOutcome::Unbounded => {
                Err(Error::DegenerateLp("improvement program unbounded".into()))
            }
        }
    }
}

pub fn check_si(instance: &BatchInstance, allocation: &Allocation, tolerance: f64) -> Result<SiReport> {
    let compact = Compact::build(instance)?;
    let active = compact.active();
    if active.is_empty() {
        return Err(Error::NoActiveTenants);
    }
    let total: f64 = compact.tenants.iter().map(|t| t.weight).sum();
    let mut values = BTreeMap::new();
    let mut floors = BTreeMap::new();
    let mut worst = f64::INFINITY;
    for &i in &active {
        let id = compact.tenants[i].id.clone();
        let v = instance.scaled_utility(&id, allocation)?;
        let floor = compact.tenants[i].weight / total;
        worst = worst.min(v - floor);
        values.insert(id.clone(), v);
        floors.insert(id, floor);
    }
    Ok(SiReport {
        pass: worst >= -tolerance,
        values,
        floors,
        worst_slack: worst,
    })
}

pub fn check_pe(instance: &BatchInstance, allocation: &Allocation, tolerance: f64) -> Result<PeReport> {
    let ctx = AuditContext::build(instance, allocation)?;
    let all: Vec<usize> = (0..ctx.active.len()).collect();
    let improvement = ctx.improvement_lp(&all, 1.0)?;
    Ok(PeReport {
        pass: improvement <= tolerance,
        improvement,
    })
}

pub fn check_core(instance: &BatchInstance, allocation: &Allocation, tolerance: f64) -> Result<CoreReport> {
    let ctx = AuditContext::build(instance, allocation)?;
    let n = ctx.active.len();
    if n > CORE_TENANT_LIMIT {
        return Err(Error::TooManyTenants {
            count: n,
            limit: CORE_TENANT_LIMIT,
        });
    }
    let coalitions: Vec<u32> = (1u32..(1u32 << n)).collect();
    let gains = exec::map(&coalitions, |&c: &u32| {
        let members: Vec<usize> = (0..n).filter(|k| c >> k & 1 == 1).collect();
        let mass: f64 = members.iter().map(|&k| ctx.shares[k]).sum();
        ctx.improvement_lp(&members, mass).map(|g| (c, g))
    });
    let mut blocking: Option<(Vec<TenantId>, f64)> = None;
    for res in gains {
        let (c, gain) = res?;
        if gain > tolerance && blocking.as_ref().map_or(true, |(_, g)| gain > *g) {
            let members = (0..n)
                .filter(|k| c >> k & 1 == 1)
                .map(|k| ctx.tenant_id(k))
                .collect();
            blocking = Some((members, gain));
        }
    }
    Ok(CoreReport {
        pass: blocking.is_none(),
        coalitions_checked: coalitions.len(),
        blocking,
    })
}

pub fn audit(
    instance: &BatchInstance,
    allocation: &Allocation,
    options: &AuditOptions,
) -> Result<AuditReport> {
    let si = check_si(instance, allocation, options.tolerance)?;
    let pe = check_pe(instance, allocation, options.tolerance)?;
    let core = if options.check_core {
        Some(check_core(instance, allocation, options.tolerance)?)
    } else {
        None
    };
    Ok(AuditReport { si, pe, core })
}
