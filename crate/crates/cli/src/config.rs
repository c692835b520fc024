//! Run configuration: one JSON document with sections `scenario`,
//! `policy`, `time_model`, and `output`, plus an optional `sweep` section
//! naming axes. Every default is overridable, either in the document or
//! with `--set dotted.path=value` flags applied on top of it.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use cachefair::allocators::Policy;
use cachefair::sim::{SimOptions, TimeModel};
use cachefair::workload::ScenarioSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub policy: PolicySection,
    #[serde(default)]
    pub time_model: TimeModel,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// Either the name of a built-in preset or a full inline scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSection {
    Preset(String),
    Inline(Box<ScenarioSpec>),
}

impl ScenarioSection {
    pub fn resolve(&self) -> Result<ScenarioSpec> {
        match self {
            ScenarioSection::Preset(name) => Ok(cachefair::workload::preset(name)?),
            ScenarioSection::Inline(spec) => {
                spec.validate()?;
                Ok((**spec).clone())
            }
        }
    }

    pub fn label(&self) -> &str {
        match self {
            ScenarioSection::Preset(name) => name,
            ScenarioSection::Inline(spec) => &spec.name,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySection {
    pub name: String,
    pub seed: u64,
    /// Carry the sampled configuration across batches and boost demands
    /// already fully resident.
    pub stateful: bool,
    /// Reuse boost applied to resident demands; values above 1 imply
    /// statefulness.
    pub gamma: f64,
}

impl Default for PolicySection {
    fn default() -> Self {
        PolicySection {
            name: "mmf".into(),
            seed: 0,
            stateful: false,
            gamma: 1.0,
        }
    }
}

impl PolicySection {
    pub fn policy(&self) -> Result<Policy> {
        Ok(Policy::from_name(&self.name)?)
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            stateful: self.stateful || self.gamma > 1.0,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Where CSVs land; no files are written when unset.
    pub dir: Option<PathBuf>,
    pub quiet: bool,
    pub per_batch: bool,
    pub per_query: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: None,
            quiet: false,
            per_batch: true,
            per_query: true,
        }
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_gammas() -> Vec<f64> {
    vec![1.0]
}

/// Axes for `sweep`: the cartesian product is executed in the declared
/// order scenario > policy > seed > gamma > batch length.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub scenarios: Vec<ScenarioSection>,
    pub policies: Vec<String>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Reuse boosts; 1 means stateless.
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
    /// Batch lengths in seconds replacing each scenario's own; empty
    /// keeps the scenario value.
    #[serde(default)]
    pub batch_seconds: Vec<f64>,
}

/// Flag-level overrides, applied after `--set` paths.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub sets: Vec<String>,
    pub policy: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub quiet: bool,
}

fn apply_set(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{assignment}` is not of the form path=value"))?;
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        bail!("override path `{path}` has an empty segment");
    }
    let mut node = &mut *root;
    for seg in &segments[..segments.len() - 1] {
        node = match node {
            Value::Object(map) => map
                .get_mut(*seg)
                .ok_or_else(|| anyhow!("config has no section `{seg}` (override `{path}`)"))?,
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| anyhow!("`{seg}` is not an index into an array (override `{path}`)"))?;
                items
                    .get_mut(idx)
                    .ok_or_else(|| anyhow!("index {idx} out of range (override `{path}`)"))?
            }
            _ => bail!("`{seg}` in override `{path}` addresses a scalar"),
        };
    }
    let leaf = *segments.last().unwrap();
    let parsed: Value =
        serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    match node {
        Value::Object(map) => {
            map.insert(leaf.to_string(), parsed);
        }
        Value::Array(items) => {
            let idx: usize = leaf
                .parse()
                .map_err(|_| anyhow!("`{leaf}` is not an index into an array (override `{path}`)"))?;
            let slot = items
                .get_mut(idx)
                .ok_or_else(|| anyhow!("index {idx} out of range (override `{path}`)"))?;
            *slot = parsed;
        }
        _ => bail!("override `{path}` addresses a scalar"),
    }
    Ok(())
}

/// Parse the document, surface schema violations with their line and
/// column, then layer the overrides and re-validate. Scenario presets are
/// expanded the moment an override reaches under `scenario.`, so the
/// dotted paths work uniformly.
pub fn load(path: &Path, overrides: &Overrides) -> Result<Config> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let base: Config = serde_json::from_str(&text)
        .with_context(|| format!("config {}", path.display()))?;

    let mut config = if overrides.sets.is_empty() {
        base
    } else {
        let mut value = serde_json::to_value(&base)?;
        if overrides.sets.iter().any(|s| s.starts_with("scenario.")) {
            if let ScenarioSection::Preset(_) = base.scenario {
                value["scenario"] = serde_json::to_value(base.scenario.resolve()?)?;
            }
        }
        for assignment in &overrides.sets {
            apply_set(&mut value, assignment)?;
        }
        serde_json::from_value(value)
            .map_err(|e| anyhow!("overrides produced an invalid config: {e}"))?
    };

    if let Some(policy) = &overrides.policy {
        config.policy.name = policy.clone();
    }
    if let Some(seed) = overrides.seed {
        config.policy.seed = seed;
    }
    if let Some(dir) = &overrides.out_dir {
        config.output.dir = Some(dir.clone());
    }
    if overrides.quiet {
        config.output.quiet = true;
    }
    validate(&config)?;
    Ok(config)
}

/// Everything that can fail must fail here, before any output file is
/// created.
pub fn validate(config: &Config) -> Result<()> {
    config.scenario.resolve()?;
    config.policy.policy()?;
    config.policy.sim_options().validate()?;
    config.time_model.validate()?;
    if let Some(sweep) = &config.sweep {
        if sweep.scenarios.is_empty() || sweep.policies.is_empty() || sweep.seeds.is_empty() {
            bail!("sweep axes scenarios, policies, and seeds must be non-empty");
        }
        for scenario in &sweep.scenarios {
            scenario.resolve()?;
        }
        for name in &sweep.policies {
            Policy::from_name(name)?;
        }
        for &gamma in &sweep.gammas {
            (SimOptions {
                stateful: gamma > 1.0,
                gamma,
            })
            .validate()?;
        }
        for &b in &sweep.batch_seconds {
            if !(b > 0.0 && b.is_finite()) {
                bail!("sweep batch length {b} must be positive");
            }
        }
    }
    Ok(())
}
