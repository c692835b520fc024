//! The four subcommands. Runs and sweeps share one execution path; sweep
//! fans the cartesian product of its axes out over the executor and merges
//! summaries in axis order regardless of completion order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use cachefair::allocators::{plan, Policy, PolicyParams};
use cachefair::audit::{audit, AuditOptions};
use cachefair::exec;
use cachefair::instances::{random_instance, InstanceFamily};
use cachefair::metrics;
use cachefair::model::TenantId;
use cachefair::sim::{self, SimOptions, TimeModel};
use cachefair::workload::{generate_trace, write_trace, ScenarioSpec};

use crate::config::Config;
use crate::output::{self, RunArtifacts};

struct RunSpec {
    label: String,
    spec: ScenarioSpec,
    policy: Policy,
    seed: u64,
    options: SimOptions,
    time_model: TimeModel,
}

fn execute(run: &RunSpec) -> Result<RunArtifacts> {
    let params = PolicyParams::with_seed(run.seed);
    let result = sim::run(
        &run.spec,
        run.policy,
        &params,
        &run.time_model,
        &run.options,
        run.seed,
    )?;
    let baseline = sim::paired_baseline(&run.spec, &run.time_model, run.seed)?;
    let weights: BTreeMap<TenantId, f64> = run
        .spec
        .tenants
        .iter()
        .map(|t| (TenantId::new(&t.id), t.weight))
        .collect();
    let report = metrics::report(&result, &baseline, &weights)?;
    Ok(RunArtifacts {
        label: run.label.clone(),
        policy: run.policy.name(),
        seed: run.seed,
        result,
        baseline,
        report,
    })
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '.' || c == '+' || c == '=' { c } else { '-' })
        .collect()
}

fn write_run_files(dir: &Path, config: &Config, run: &RunArtifacts) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    if config.output.per_batch {
        output::write_per_batch(&dir.join("per_batch.csv"), &run.result)?;
    }
    if config.output.per_query {
        output::write_per_query(&dir.join("per_query.csv"), &run.result, &run.baseline)?;
    }
    Ok(())
}

pub fn cmd_run(config: &Config) -> Result<()> {
    let run = RunSpec {
        label: config.scenario.label().to_string(),
        spec: config.scenario.resolve()?,
        policy: config.policy.policy()?,
        seed: config.policy.seed,
        options: config.policy.sim_options(),
        time_model: config.time_model.clone(),
    };
    let artifacts = execute(&run)?;
    if let Some(dir) = &config.output.dir {
        write_run_files(dir, config, &artifacts)?;
        output::write_summary(&dir.join("summary.csv"), &[output::summary_row(&artifacts)])?;
    }
    if !config.output.quiet {
        output::print_metrics(&artifacts);
    }
    Ok(())
}

pub fn cmd_sweep(config: &Config) -> Result<()> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| anyhow!("config has no `sweep` section"))?;
    let batch_axis: Vec<Option<f64>> = if sweep.batch_seconds.is_empty() {
        vec![None]
    } else {
        sweep.batch_seconds.iter().copied().map(Some).collect()
    };

    let mut runs = Vec::new();
    for scenario in &sweep.scenarios {
        let base = scenario.resolve()?;
        for name in &sweep.policies {
            let policy = Policy::from_name(name)?;
            for &seed in &sweep.seeds {
                for &gamma in &sweep.gammas {
                    for &batch in &batch_axis {
                        let mut spec = base.clone();
                        let mut label = scenario.label().to_string();
                        if let Some(b) = batch {
                            spec.batch_s = b;
                            label.push_str(&format!("+b{b}"));
                        }
                        if gamma != 1.0 {
                            label.push_str(&format!("+g{gamma}"));
                        }
                        runs.push(RunSpec {
                            label,
                            spec,
                            policy,
                            seed,
                            options: SimOptions {
                                stateful: gamma > 1.0,
                                gamma,
                            },
                            time_model: config.time_model.clone(),
                        });
                    }
                }
            }
        }
    }

    let outcomes = exec::map(&runs, execute);
    let mut artifacts = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (run, outcome) in runs.iter().zip(outcomes) {
        match outcome {
            Ok(a) => artifacts.push(a),
            Err(e) => failures.push(format!("{} {} seed {}: {e:#}", run.label, run.policy, run.seed)),
        }
    }
    if !failures.is_empty() {
        bail!("{} of {} runs failed:\n  {}", failures.len(), runs.len(), failures.join("\n  "));
    }

    if let Some(dir) = &config.output.dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for run in &artifacts {
            let sub = dir
                .join("runs")
                .join(sanitize(&format!("{}-{}-s{}", run.label, run.policy, run.seed)));
            write_run_files(&sub, config, run)?;
        }
        let rows: Vec<[String; 8]> = artifacts.iter().map(output::summary_row).collect();
        output::write_summary(&dir.join("summary.csv"), &rows)?;
    }
    if !config.output.quiet {
        for run in &artifacts {
            output::print_metrics(run);
        }
    }
    Ok(())
}

pub struct AuditCmd {
    pub count: usize,
    pub max_tenants: usize,
    pub max_views: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub weighted: bool,
    pub out_dir: Option<PathBuf>,
    pub quiet: bool,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    si: usize,
    pe: usize,
    core: usize,
}

/// Random instances, every policy, one verdict tally per policy: how
/// often the produced allocation violated sharing incentive, Pareto
/// efficiency, or core membership at the given tolerance.
pub fn cmd_audit(cmd: &AuditCmd) -> Result<()> {
    if cmd.count == 0 {
        bail!("need at least one instance");
    }
    if cmd.max_tenants > 6 {
        bail!("coalition scans cap the tenant bound at 6");
    }
    let family = InstanceFamily::new(cmd.max_tenants, cmd.max_views, cmd.weighted);
    let options = AuditOptions {
        tolerance: cmd.tolerance,
        check_core: true,
    };

    let seeds: Vec<u64> = (0..cmd.count as u64).map(|i| cmd.seed.wrapping_add(i)).collect();
    let per_instance = exec::map(&seeds, |&seed| -> Result<Vec<(Policy, Tally)>> {
        let instance = random_instance(&family, seed)?;
        let params = PolicyParams::with_seed(seed);
        let mut row = Vec::with_capacity(Policy::ALL.len());
        for policy in Policy::ALL {
            let outcome = plan(policy, &instance, &params)?;
            let report = audit(&instance, &outcome.allocation, &options)?;
            let core = report.core.as_ref().expect("core check requested");
            row.push((
                policy,
                Tally {
                    si: usize::from(!report.si.pass),
                    pe: usize::from(!report.pe.pass),
                    core: usize::from(!core.pass),
                },
            ));
        }
        Ok(row)
    });

    let mut totals: BTreeMap<Policy, Tally> = Policy::ALL.iter().map(|&p| (p, Tally::default())).collect();
    for row in per_instance {
        for (policy, tally) in row? {
            let t = totals.get_mut(&policy).unwrap();
            t.si += tally.si;
            t.pe += tally.pe;
            t.core += tally.core;
        }
    }

    let mut lines = Vec::new();
    lines.push(format!(
        "audit: {} instances (tenants <= {}, views <= {}, weighted: {}), tolerance {}, seed {}",
        cmd.count,
        cmd.max_tenants,
        cmd.max_views,
        if cmd.weighted { "yes" } else { "no" },
        cmd.tolerance,
        cmd.seed
    ));
    lines.push(format!(
        "{:<10} {:>14} {:>14} {:>16}",
        "policy", "si_violations", "pe_violations", "core_violations"
    ));
    for policy in Policy::ALL {
        let t = totals[&policy];
        lines.push(format!(
            "{:<10} {:>14} {:>14} {:>16}",
            policy.name(),
            t.si,
            t.pe,
            t.core
        ));
    }
    let text = lines.join("\n");
    if !cmd.quiet {
        println!("{text}");
    }

    if let Some(dir) = &cmd.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join("audit.csv");
        let mut w = csv::Writer::from_path(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        w.write_record(["policy", "si_violations", "pe_violations", "core_violations", "instances"])?;
        for policy in Policy::ALL {
            let t = totals[&policy];
            w.write_record([
                policy.name().to_string(),
                t.si.to_string(),
                t.pe.to_string(),
                t.core.to_string(),
                cmd.count.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

pub struct TraceCmd {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

pub fn cmd_trace(config: &Config, cmd: &TraceCmd) -> Result<()> {
    let spec = config.scenario.resolve()?;
    let seed = cmd.seed.unwrap_or(config.policy.seed);
    let queries = generate_trace(&spec, seed)?;
    match &cmd.out {
        Some(path) => {
            let file = fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_trace(file, &queries)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_trace(stdout.lock(), &queries)?;
        }
    }
    Ok(())
}
