//! Synthetic multi-tenant workloads: benchmark catalogs, Zipf data access
//! with rank permutations and cold-window re-access, Poisson arrivals, and
//! deterministic trace generation with a CSV exchange format.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read as IoRead, Write as IoWrite};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::model::{Query, Tenant, TenantId, View, ViewId};

pub const MB: u64 = 1_000_000;
pub const GB: u64 = 1_000_000_000;

/// The views one generated query reads, all-or-nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTemplate {
    pub name: String,
    pub required: BTreeSet<ViewId>,
}

/// A candidate-view catalog plus the query templates that access
/// distributions draw from. Dataset indices used by [`AccessDistribution`]
/// are 1-based positions in `templates`.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub views: Vec<View>,
    pub templates: Vec<QueryTemplate>,
}

impl Catalog {
    pub fn view_sizes(&self) -> BTreeMap<ViewId, u64> {
        self.views
            .iter()
            .map(|v| (v.id.clone(), v.size_bytes))
            .collect()
    }

    /// Bytes read by each template: the sum of its required view sizes.
    pub fn template_bytes(&self) -> Vec<u64> {
        let sizes = self.view_sizes();
        self.templates
            .iter()
            .map(|t| t.required.iter().map(|v| sizes[v]).sum())
            .collect()
    }
}

/// Thirty report views with linearly decreasing footprints: view `i`
/// (1-based) holds `118 * (31 - i)` MB, so sizes ramp from 3540 MB down to
/// 118 MB and total 54.87 GB. Each query projects exactly one view.
pub fn sales_catalog() -> Vec<View> {
    (1..=30u64)
        .map(|i| View::new(format!("sales{i:02}"), 118 * (31 - i) * MB))
        .collect()
}

/// A warehouse-style catalog: one 3.8 GB fact view read by every template,
/// plus eight smaller auxiliary views. Templates 1-8 join the fact view
/// with one auxiliary; templates 9-15 with a pair of adjacent auxiliaries.
/// The union of all requirements is 5950 MB, so a 6 GB cache can serve
/// every template while a quarter share (1.5 GB) cannot even hold the fact
/// view.
pub fn tpch_catalog() -> Catalog {
    const AUX_MB: [u64; 8] = [190, 200, 230, 250, 270, 300, 330, 380];
    let fact = ViewId::new("lineitem");
    let mut views = vec![View::new("lineitem", 3800 * MB)];
    for (i, mb) in AUX_MB.iter().enumerate() {
        views.push(View::new(format!("aux{}", i + 1), mb * MB));
    }
    let mut templates = Vec::with_capacity(15);
    for i in 0..8 {
        templates.push(QueryTemplate {
            name: format!("q{:02}", i + 1),
            required: [fact.clone(), ViewId::new(format!("aux{}", i + 1))]
                .into_iter()
                .collect(),
        });
    }
    for i in 0..7 {
        templates.push(QueryTemplate {
            name: format!("q{:02}", i + 9),
            required: [
                fact.clone(),
                ViewId::new(format!("aux{}", i + 1)),
                ViewId::new(format!("aux{}", i + 2)),
            ]
            .into_iter()
            .collect(),
        });
    }
    Catalog { views, templates }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogChoice {
    /// The 30 report views, one single-view template per view.
    Sales,
    /// The shared-fact-view catalog with 15 join templates.
    Tpch,
    /// Both: the 15 join templates first, then the 30 report views as
    /// templates 16-45.
    Mixed,
}

impl CatalogChoice {
    pub fn build(&self) -> Catalog {
        let sales = || {
            let views = sales_catalog();
            let templates = views
                .iter()
                .map(|v| QueryTemplate {
                    name: v.id.to_string(),
                    required: [v.id.clone()].into_iter().collect(),
                })
                .collect();
            Catalog { views, templates }
        };
        match self {
            CatalogChoice::Sales => sales(),
            CatalogChoice::Tpch => tpch_catalog(),
            CatalogChoice::Mixed => {
                let mut cat = tpch_catalog();
                let s = sales();
                cat.views.extend(s.views);
                cat.templates.extend(s.templates);
                cat
            }
        }
    }
}

/// Zipf probabilities over ranks `1..=n`: P(r) = r^(-s) / H_{n,s}.
pub fn zipf_pmf(n: usize, exponent: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("zipf over zero ranks".into()));
    }
    if !(exponent > 0.0 && exponent.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "zipf exponent {exponent} must be positive and finite"
        )));
    }
    let mut w: Vec<f64> = (1..=n).map(|r| (r as f64).powf(-exponent)).collect();
    let h: f64 = w.iter().sum();
    for x in &mut w {
        *x /= h;
    }
    Ok(w)
}

/// Draws one dataset index: rank r has probability r^(-s)/H_{n,s} and maps
/// through `ranks`, whose r-th entry is the dataset holding the r-th
/// largest share of accesses.
pub fn zipf_sample(n: usize, exponent: f64, ranks: &[usize], rng: &mut impl Rng) -> Result<usize> {
    if ranks.len() != n {
        return Err(Error::InvalidParameter(format!(
            "rank list has {} entries, expected {n}",
            ranks.len()
        )));
    }
    let pmf = zipf_pmf(n, exponent)?;
    let mut acc = 0.0;
    let u: f64 = rng.gen();
    for (r, p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return Ok(ranks[r]);
        }
    }
    Ok(ranks[n - 1])
}

/// Built-in 30-view rank assignments: entry v-1 holds view v's Zipf rank
/// (1 = hottest). Each row skews the heavy ranks towards a different
/// subset of views, so picking different rows for different tenants dials
/// the amount of data sharing from total overlap down to mostly disjoint
/// hot sets. Every row puts a multi-GB view at rank 1, which is what makes
/// the hot sets contend for cache space.
pub const RANK_PERMUTATIONS: [[usize; 30]; 4] = [
    [
        30, 29, 28, 8, 27, 26, 25, 1, 24, 23, 22, 7, 21, 20, 19, 6, 18, 17, 16, 5, 3, 14, 15, 4,
        12, 11, 10, 13, 9, 2,
    ],
    [
        30, 29, 7, 28, 27, 26, 1, 25, 24, 23, 6, 22, 21, 20, 5, 19, 18, 17, 4, 16, 15, 14, 3, 13,
        12, 11, 2, 10, 9, 8,
    ],
    [
        30, 7, 29, 28, 27, 1, 26, 25, 24, 6, 23, 22, 21, 5, 20, 19, 18, 4, 17, 16, 15, 3, 14, 13,
        12, 2, 11, 10, 9, 8,
    ],
    [
        8, 30, 29, 28, 1, 27, 26, 25, 7, 24, 23, 22, 6, 21, 20, 19, 5, 18, 17, 16, 4, 15, 14, 13,
        3, 12, 11, 10, 2, 9,
    ],
];

/// One of the built-in rank-by-view rows, `which` in 1..=4.
pub fn rank_permutation(which: usize) -> Result<Vec<usize>> {
    RANK_PERMUTATIONS
        .get(which.wrapping_sub(1))
        .map(|p| p.to_vec())
        .ok_or_else(|| Error::InvalidParameter(format!("no built-in rank permutation {which}")))
}

/// The same skew in sampler orientation: entry r-1 is the 1-based view
/// index drawn with the r-th largest probability, i.e. the inverse of
/// [`rank_permutation`].
pub fn hot_view_order(which: usize) -> Result<Vec<usize>> {
    let by_view = rank_permutation(which)?;
    let mut by_rank = vec![0usize; by_view.len()];
    for (v, r) in by_view.iter().enumerate() {
        by_rank[r - 1] = v + 1;
    }
    Ok(by_rank)
}

/// Re-access in time windows: window lengths are drawn from
/// Normal(mean, std) seconds (floored at one second), each window draws
/// `candidates` datasets from the tenant's base distribution, and queries
/// inside the window pick uniformly among those. Since the candidates are
/// themselves base-distributed, long-run frequencies still follow the base
/// distribution; within a window, accesses repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColdWindowParams {
    pub mean_window_s: f64,
    pub std_window_s: f64,
    pub candidates: usize,
}

impl Default for ColdWindowParams {
    fn default() -> Self {
        ColdWindowParams {
            mean_window_s: 120.0,
            std_window_s: 30.0,
            candidates: 3,
        }
    }
}

const MIN_WINDOW_S: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AccessKind {
    /// Zipf over `ranks.len()` ranks; entry r-1 names the 1-based template
    /// index drawn with the r-th largest probability.
    ZipfRanked { exponent: f64, ranks: Vec<usize> },
    /// Uniform over the listed 1-based template indices.
    UniformTemplates { templates: Vec<usize> },
}

/// How one tenant picks the dataset behind each query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessDistribution {
    #[serde(flatten)]
    pub kind: AccessKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cold_windows: Option<ColdWindowParams>,
}

impl AccessDistribution {
    pub fn zipf(exponent: f64, ranks: Vec<usize>) -> Self {
        AccessDistribution {
            kind: AccessKind::ZipfRanked { exponent, ranks },
            cold_windows: None,
        }
    }

    pub fn uniform(templates: Vec<usize>) -> Self {
        AccessDistribution {
            kind: AccessKind::UniformTemplates { templates },
            cold_windows: None,
        }
    }

    pub fn with_cold_windows(mut self, params: ColdWindowParams) -> Self {
        self.cold_windows = Some(params);
        self
    }

    /// Checks the distribution against a catalog with `template_count`
    /// templates: dataset indices must be distinct and in range, the Zipf
    /// exponent positive, cold-window parameters sane.
    pub fn validate(&self, template_count: usize) -> Result<()> {
        let check_indices = |list: &[usize], what: &str| -> Result<()> {
            if list.is_empty() {
                return Err(Error::InvalidParameter(format!("empty {what} list")));
            }
            let distinct: BTreeSet<usize> = list.iter().copied().collect();
            if distinct.len() != list.len() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate entries in {what} list"
                )));
            }
            for &d in list {
                if d == 0 || d > template_count {
                    return Err(Error::InvalidParameter(format!(
                        "{what} index {d} out of range 1..={template_count}"
                    )));
                }
            }
            Ok(())
        };
        match &self.kind {
            AccessKind::ZipfRanked { exponent, ranks } => {
                if !(*exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "zipf exponent {exponent} must be positive and finite"
                    )));
                }
                check_indices(ranks, "rank")?;
            }
            AccessKind::UniformTemplates { templates } => {
                check_indices(templates, "template")?;
            }
        }
        if let Some(cw) = &self.cold_windows {
            if !(cw.mean_window_s > 0.0 && cw.mean_window_s.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "cold window mean {} must be positive",
                    cw.mean_window_s
                )));
            }
            if !(cw.std_window_s >= 0.0 && cw.std_window_s.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "cold window std {} must be non-negative",
                    cw.std_window_s
                )));
            }
            if cw.candidates == 0 {
                return Err(Error::InvalidParameter(
                    "cold window needs at least one candidate".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TenantSpec {
    pub id: String,
    pub weight: f64,
    pub access: AccessDistribution,
    pub mean_interarrival_s: f64,
}

/// A full scenario: who queries what, how often, against which catalog and
/// cache budget, and how long the batched run lasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub catalog: CatalogChoice,
    pub tenants: Vec<TenantSpec>,
    pub batch_s: f64,
    pub batches: usize,
    pub cache_budget_bytes: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.tenants.is_empty() {
            return Err(Error::InvalidParameter("scenario has no tenants".into()));
        }
        if !(self.batch_s > 0.0 && self.batch_s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "batch length {} must be positive",
                self.batch_s
            )));
        }
        if self.batches == 0 {
            return Err(Error::InvalidParameter("zero batches".into()));
        }
        if self.cache_budget_bytes == 0 {
            return Err(Error::InvalidParameter("zero cache budget".into()));
        }
        let template_count = self.catalog.build().templates.len();
        let mut seen = BTreeSet::new();
        for t in &self.tenants {
            if t.id.is_empty() {
                return Err(Error::InvalidParameter("empty tenant id".into()));
            }
            if !seen.insert(t.id.clone()) {
                return Err(Error::DuplicateId(t.id.clone()));
            }
            if !(t.weight > 0.0 && t.weight.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "tenant `{}` weight {} must be positive",
                    t.id, t.weight
                )));
            }
            if !(t.mean_interarrival_s > 0.0 && t.mean_interarrival_s.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "tenant `{}` inter-arrival mean {} must be positive",
                    t.id, t.mean_interarrival_s
                )));
            }
            t.access.validate(template_count)?;
        }
        Ok(())
    }

    pub fn horizon_s(&self) -> f64 {
        self.batch_s * self.batches as f64
    }

    /// The tenants as planner-facing models (id and weight).
    pub fn tenant_models(&self) -> Vec<Tenant> {
        self.tenants
            .iter()
            .map(|t| Tenant::new(t.id.clone(), t.weight))
            .collect()
    }
}

/// Stateful dataset sampler for one tenant: precomputed base CDF plus the
/// current cold window, when configured.
struct DatasetDraw {
    cdf: Vec<f64>,
    datasets: Vec<usize>,
    cold: Option<(usize, Normal<f64>)>,
    window_end_s: f64,
    candidates: Vec<usize>,
}

impl DatasetDraw {
    fn new(access: &AccessDistribution, template_count: usize) -> Result<Self> {
        access.validate(template_count)?;
        let (weights, datasets) = match &access.kind {
            AccessKind::ZipfRanked { exponent, ranks } => {
                (zipf_pmf(ranks.len(), *exponent)?, ranks.clone())
            }
            AccessKind::UniformTemplates { templates } => {
                let n = templates.len();
                (vec![1.0 / n as f64; n], templates.clone())
            }
        };
        let mut cdf = weights;
        let mut acc = 0.0;
        for w in &mut cdf {
            acc += *w;
            *w = acc;
        }
        let cold = match &access.cold_windows {
            Some(p) => {
                let normal = Normal::new(p.mean_window_s, p.std_window_s)
                    .map_err(|e| Error::InvalidParameter(format!("cold window length: {e}")))?;
                Some((p.candidates, normal))
            }
            None => None,
        };
        Ok(DatasetDraw {
            cdf,
            datasets,
            cold,
            window_end_s: 0.0,
            candidates: Vec::new(),
        })
    }

    fn base(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.gen();
        let idx = self.cdf.partition_point(|&c| c <= u);
        self.datasets[idx.min(self.datasets.len() - 1)]
    }

    /// Dataset for a query arriving at `t` seconds.
    fn next(&mut self, t: f64, rng: &mut ChaCha8Rng) -> usize {
        let Some((k, normal)) = self.cold else {
            return self.base(rng);
        };
        if self.candidates.is_empty() || t >= self.window_end_s {
            let len = normal.sample(rng).max(MIN_WINDOW_S);
            self.window_end_s = t + len;
            self.candidates = (0..k).map(|_| self.base(rng)).collect();
        }
        self.candidates[rng.gen_range(0..self.candidates.len())]
    }
}

fn tenant_stream(
    spec: &ScenarioSpec,
    catalog: &Catalog,
    bytes: &[u64],
    idx: usize,
    seed: u64,
) -> Result<Vec<Query>> {
    let ts = &spec.tenants[idx];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx as u64 + 1);
    let gap = Exp::new(1.0 / ts.mean_interarrival_s)
        .map_err(|e| Error::InvalidParameter(format!("inter-arrival: {e}")))?;
    let mut draw = DatasetDraw::new(&ts.access, catalog.templates.len())?;
    let tenant = TenantId::new(ts.id.clone());
    let horizon = spec.horizon_s();
    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        t += gap.sample(&mut rng);
        if t >= horizon {
            break;
        }
        let dataset = draw.next(t, &mut rng);
        let tpl = &catalog.templates[dataset - 1];
        out.push(Query {
            tenant: tenant.clone(),
            arrival_s: t,
            required: tpl.required.clone(),
            bytes_read: bytes[dataset - 1],
        });
    }
    Ok(out)
}

/// Generates the scenario's query trace: per-tenant Poisson arrivals with
/// the configured mean gap, datasets drawn through each tenant's access
/// distribution (cold windows included when configured), streams merged in
/// arrival order. Pure in (spec, seed); reruns produce identical traces.
pub fn generate_trace(spec: &ScenarioSpec, seed: u64) -> Result<Vec<Query>> {
    spec.validate()?;
    let catalog = spec.catalog.build();
    let bytes = catalog.template_bytes();
    let streams = exec::map_indices(spec.tenants.len(), |i| {
        tenant_stream(spec, &catalog, &bytes, i, seed)
    });
    let mut queries = Vec::new();
    for s in streams {
        queries.extend(s?);
    }
    queries.sort_by(|a, b| {
        a.arrival_s
            .partial_cmp(&b.arrival_s)
            .unwrap()
            .then_with(|| a.tenant.cmp(&b.tenant))
    });
    Ok(queries)
}

const TRACE_HEADER: [&str; 4] = ["arrival_time_s", "tenant_id", "view_ids", "bytes_read"];

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    arrival_time_s: f64,
    tenant_id: String,
    view_ids: String,
    bytes_read: u64,
}

/// Writes the trace exchange format: a mandatory
/// `arrival_time_s,tenant_id,view_ids,bytes_read` header, then one row per
/// query with required views semicolon-joined in id order.
pub fn write_trace<W: IoWrite>(writer: W, queries: &[Query]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for q in queries {
        let ids: Vec<&str> = q.required.iter().map(|v| v.as_str()).collect();
        w.serialize(TraceRow {
            arrival_time_s: q.arrival_s,
            tenant_id: q.tenant.to_string(),
            view_ids: ids.join(";"),
            bytes_read: q.bytes_read,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_to_string(queries: &[Query]) -> Result<String> {
    let mut buf = Vec::new();
    write_trace(&mut buf, queries)?;
    String::from_utf8(buf).map_err(|e| Error::MalformedTrace(e.to_string()))
}

/// Reads a trace written by [`write_trace`]. The header row is required and
/// must match the documented column order exactly.
pub fn read_trace<R: IoRead>(reader: R) -> Result<Vec<Query>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    {
        let h = r.headers()?;
        if h != &csv::StringRecord::from(TRACE_HEADER.to_vec()) {
            return Err(Error::MalformedTrace(format!(
                "header must be `{}`, found `{}`",
                TRACE_HEADER.join(","),
                h.iter().collect::<Vec<_>>().join(",")
            )));
        }
    }
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: TraceRow = row?;
        if !(row.arrival_time_s.is_finite() && row.arrival_time_s >= 0.0) {
            return Err(Error::MalformedTrace(format!(
                "bad arrival time {}",
                row.arrival_time_s
            )));
        }
        let required: BTreeSet<ViewId> = row
            .view_ids
            .split(';')
            .filter(|s| !s.is_empty())
            .map(ViewId::new)
            .collect();
        if required.is_empty() {
            return Err(Error::MalformedTrace(format!(
                "query at {} s has no views",
                row.arrival_time_s
            )));
        }
        out.push(Query {
            tenant: TenantId::new(row.tenant_id),
            arrival_s: row.arrival_time_s,
            required,
            bytes_read: row.bytes_read,
        });
    }
    Ok(out)
}

pub const PRESET_NAMES: [&str; 14] = [
    "mixed-1",
    "mixed-2",
    "mixed-3",
    "mixed-4",
    "sales-1",
    "sales-2",
    "sales-3",
    "sales-4",
    "arrival-low",
    "arrival-mid",
    "arrival-high",
    "scale-2",
    "scale-4",
    "scale-8",
];

/// Built-in scenarios. `mixed-1..4`: four tenants over the combined catalog
/// with sharing decreasing from all-uniform to three distinct Zipf hot
/// sets. `sales-1..4`: the same progression on the report-view catalog.
/// `arrival-low/mid/high`: two Zipf tenants with increasingly skewed
/// arrival rates. `scale-2/4/8`: identical-Zipf tenants at growing counts,
/// arrival rate scaled to keep per-batch load flat. All use a 6 GB budget
/// and 30 batches.
pub fn preset(name: &str) -> Result<ScenarioSpec> {
    let zipf = |which: usize, offset: usize| -> Result<AccessDistribution> {
        let ranks = hot_view_order(which)?
            .into_iter()
            .map(|v| v + offset)
            .collect();
        Ok(AccessDistribution::zipf(1.0, ranks).with_cold_windows(ColdWindowParams::default()))
    };
    let tenant = |i: usize, access: AccessDistribution, mean: f64| TenantSpec {
        id: format!("t{}", i + 1),
        weight: 1.0,
        access,
        mean_interarrival_s: mean,
    };
    let scenario = |catalog: CatalogChoice, tenants: Vec<TenantSpec>, batch_s: f64| ScenarioSpec {
        name: name.to_string(),
        catalog,
        tenants,
        batch_s,
        batches: 30,
        cache_budget_bytes: 6 * GB,
    };
    let spec = match name {
        "mixed-1" | "mixed-2" | "mixed-3" | "mixed-4" => {
            let zipf_count = name.as_bytes()[6] as usize - b'1' as usize;
            let uniform = AccessDistribution::uniform((1..=15).collect());
            let mut tenants = Vec::new();
            for i in 0..4 {
                let access = if i < 4 - zipf_count {
                    uniform.clone()
                } else {
                    zipf(i - (4 - zipf_count) + 1, 15)?
                };
                tenants.push(tenant(i, access, 20.0));
            }
            scenario(CatalogChoice::Mixed, tenants, 40.0)
        }
        "sales-1" | "sales-2" | "sales-3" | "sales-4" => {
            let distinct = name.as_bytes()[6] as usize - b'0' as usize;
            let mut tenants = Vec::new();
            for i in 0..4 {
                let which = (i + distinct).saturating_sub(3).max(1);
                tenants.push(tenant(i, zipf(which, 0)?, 20.0));
            }
            scenario(CatalogChoice::Sales, tenants, 40.0)
        }
        "arrival-low" | "arrival-mid" | "arrival-high" => {
            let (m1, m2) = match name {
                "arrival-low" => (12.0, 12.0),
                "arrival-mid" => (18.0, 8.0),
                _ => (24.0, 6.0),
            };
            scenario(
                CatalogChoice::Sales,
                vec![tenant(0, zipf(1, 0)?, m1), tenant(1, zipf(2, 0)?, m2)],
                72.0,
            )
        }
        "scale-2" | "scale-4" | "scale-8" => {
            let n = name.as_bytes()[6] as usize - b'0' as usize;
            let mean = 5.0 * n as f64;
            let mut tenants = Vec::new();
            for i in 0..n {
                tenants.push(tenant(i, zipf(1, 0)?, mean));
            }
            scenario(CatalogChoice::Sales, tenants, 40.0)
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown preset `{other}`; known: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}
