//! Running scenarios: tasks within a scenario run in order and share one
//! `Context`; scenarios of a batch run in parallel on the rayon pool.

use crate::config::{ConfigError, ScenarioConfig};
use crate::registry::{Context, Registry};
use crate::report::{BatchReport, ScenarioReport, Status, TaskReport};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;
use tmotive::thirdkind::OMEGA_CONVENTION;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the tasks listed in the configs.
    pub tasks: Option<Vec<String>>,
    /// Record per-task timings in the report.
    pub timings: bool,
}

fn task_list(cfg: &ScenarioConfig, opts: &RunOptions) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in opts.tasks.as_ref().unwrap_or(&cfg.tasks) {
        if !out.contains(t) {
            out.push(t.clone());
        }
    }
    out
}

fn prepare(reg: &Registry, cfg: &ScenarioConfig, opts: &RunOptions) -> Result<(Context, Vec<String>), ConfigError> {
    let res = cfg.resolve()?;
    let tasks = task_list(cfg, opts);
    if tasks.is_empty() {
        return Err(cfg.invalid("no tasks"));
    }
    reg.check(cfg, &res, &tasks)?;
    Ok((Context::new(res), tasks))
}

fn execute(reg: &Registry, name: &str, ctx: Context, tasks: &[String], opts: &RunOptions) -> ScenarioReport {
    let mut reports = BTreeMap::new();
    let mut timings = BTreeMap::new();
    for t in tasks {
        let task = reg.get(t).expect("checked by Registry::check");
        let start = Instant::now();
        let rep = catch_unwind(AssertUnwindSafe(|| task.run(&ctx))).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            TaskReport { status: Status::Error, reason: Some(format!("panic: {msg}")), ..TaskReport::new() }
        });
        if opts.timings {
            timings.insert(t.clone(), start.elapsed().as_millis() as u64);
        }
        reports.insert(t.clone(), rep);
    }
    ScenarioReport {
        name: name.to_string(),
        omega_convention: OMEGA_CONVENTION.to_string(),
        tasks: reports,
        timings_ms: timings,
    }
}

pub fn run_scenario(reg: &Registry, cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ScenarioReport, ConfigError> {
    let (ctx, tasks) = prepare(reg, cfg, opts)?;
    Ok(execute(reg, &cfg.name, ctx, &tasks, opts))
}

/// Validates every config before running any of them.
pub fn run_batch(reg: &Registry, cfgs: &[ScenarioConfig], opts: &RunOptions) -> Result<BatchReport, ConfigError> {
    let prepared = cfgs.iter().map(|c| prepare(reg, c, opts)).collect::<Result<Vec<_>, _>>()?;
    let reports = prepared
        .into_par_iter()
        .zip(cfgs.par_iter())
        .map(|((ctx, tasks), cfg)| execute(reg, &cfg.name, ctx, &tasks, opts))
        .collect();
    Ok(BatchReport { reports })
}
