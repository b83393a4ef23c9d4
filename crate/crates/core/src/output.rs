//! Run outputs and cross-seed aggregation.
//!
//! Per seed, a run directory holds:
//!
//! | file | columns |
//! |------|---------|
//! | `agents.csv` | `agent_id,rho_final,k_final,c_final,utility,n_interactions` |
//! | `events.csv` | `step,t,i,j,rho_i_old,rho_i_new,rho_j_old,rho_j_new,mode` |
//! | `timeseries.csv` | `step,t,agent_id,rho,k,c,utility` |
//! | `histogram_{rho,k,c,U}.csv` | `bin_lo,bin_hi,count` |
//! | `summary.json` | seed, resolved scenario, event counts, per-variable stats |
//!
//! Floats in CSV files carry 17 significant digits. A scenario directory also
//! gets `aggregate.json` with across-seed means and standard errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Scenario;
use crate::engine::{run_with, Execution, RunResult};
use crate::error::{Error, Result};
use crate::metrics::{summary, SummaryStats};

/// `x` with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub const VARIABLES: [&str; 4] = ["rho", "k", "c", "U"];

pub fn agents_csv(result: &RunResult) -> String {
    let mut out = String::from("agent_id,rho_final,k_final,c_final,utility,n_interactions\n");
    for a in &result.agents {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            a.id,
            fmt_float(a.rho),
            fmt_float(a.k),
            fmt_float(a.c),
            fmt_float(a.utility),
            a.n_interactions
        );
    }
    out
}

pub fn events_csv(result: &RunResult) -> String {
    let mut out = String::from("step,t,i,j,rho_i_old,rho_i_new,rho_j_old,rho_j_new,mode\n");
    for e in &result.events {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            e.step,
            fmt_float(e.t),
            e.i,
            e.j,
            fmt_float(e.rho_i_old),
            fmt_float(e.rho_i_new),
            fmt_float(e.rho_j_old),
            fmt_float(e.rho_j_new),
            e.mode.as_str()
        );
    }
    out
}

pub fn timeseries_csv(result: &RunResult) -> String {
    let mut out = String::from("step,t,agent_id,rho,k,c,utility\n");
    for s in &result.timeseries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.step,
            fmt_float(s.t),
            s.agent,
            fmt_float(s.rho),
            fmt_float(s.k),
            fmt_float(s.c),
            fmt_float(s.utility)
        );
    }
    out
}

pub fn histogram_csv(stats: &SummaryStats) -> String {
    let mut out = String::from("bin_lo,bin_hi,count\n");
    let h = &stats.histogram;
    for (b, count) in h.counts.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{count}",
            fmt_float(h.edges[b]),
            fmt_float(h.edges[b + 1])
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableStats {
    pub rho: SummaryStats,
    pub k: SummaryStats,
    pub c: SummaryStats,
    #[serde(rename = "U")]
    pub utility: SummaryStats,
}

impl VariableStats {
    pub fn from_result(result: &RunResult) -> Result<Self> {
        Ok(Self {
            rho: summary(&result.column(|a| a.rho))?,
            k: summary(&result.column(|a| a.k))?,
            c: summary(&result.column(|a| a.c))?,
            utility: summary(&result.column(|a| a.utility))?,
        })
    }

    pub fn get(&self, variable: &str) -> Option<&SummaryStats> {
        match variable {
            "rho" => Some(&self.rho),
            "k" => Some(&self.k),
            "c" => Some(&self.c),
            "U" => Some(&self.utility),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: Scenario,
    pub seed: u64,
    pub t_max: f64,
    pub n_events: usize,
    pub agent_slots: usize,
    pub floor_hits: u64,
    pub stats: VariableStats,
}

impl RunSummary {
    pub fn new(scenario: &Scenario, result: &RunResult) -> Result<Self> {
        Ok(Self {
            scenario: scenario.clone(),
            seed: result.seed,
            t_max: result.t_max,
            n_events: result.events.len(),
            agent_slots: 2 * result.events.len(),
            floor_hits: result.floor_hits,
            stats: VariableStats::from_result(result)?,
        })
    }
}

/// Mean and standard error of one quantity across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let se = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self { mean, se }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableAggregate {
    pub mean: MeanSe,
    pub cv: MeanSe,
    pub gini: Option<MeanSe>,
    pub skewness: MeanSe,
    pub kurtosis: MeanSe,
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub scenario: String,
    pub seeds: Vec<u64>,
    pub rho: VariableAggregate,
    pub k: VariableAggregate,
    pub c: VariableAggregate,
    #[serde(rename = "U")]
    pub utility: VariableAggregate,
    pub floor_hits: u64,
}

impl Aggregate {
    pub fn from_runs(name: &str, runs: &[RunSummary]) -> Self {
        let var = |pick: fn(&VariableStats) -> &SummaryStats| {
            let stats: Vec<&SummaryStats> = runs.iter().map(|r| pick(&r.stats)).collect();
            let col = |f: &dyn Fn(&SummaryStats) -> f64| {
                MeanSe::of(&stats.iter().map(|s| f(s)).collect::<Vec<_>>())
            };
            let ginis: Option<Vec<f64>> = stats.iter().map(|s| s.gini).collect();
            VariableAggregate {
                mean: col(&|s| s.mean),
                cv: col(&|s| s.cv.unwrap_or(f64::NAN)),
                gini: ginis.map(|g| MeanSe::of(&g)),
                skewness: col(&|s| s.skewness),
                kurtosis: col(&|s| s.kurtosis),
            }
        };
        Self {
            scenario: name.to_string(),
            seeds: runs.iter().map(|r| r.seed).collect(),
            rho: var(|v| &v.rho),
            k: var(|v| &v.k),
            c: var(|v| &v.c),
            utility: var(|v| &v.utility),
            floor_hits: runs.iter().map(|r| r.floor_hits).sum(),
        }
    }

    pub fn get(&self, variable: &str) -> Option<&VariableAggregate> {
        match variable {
            "rho" => Some(&self.rho),
            "k" => Some(&self.k),
            "c" => Some(&self.c),
            "U" => Some(&self.utility),
            _ => None,
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Writes every per-seed file into `dir`, creating it if needed.
pub fn write_run(dir: &Path, summary: &RunSummary, result: &RunResult) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join("agents.csv"), &agents_csv(result))?;
    write(&dir.join("events.csv"), &events_csv(result))?;
    write(&dir.join("timeseries.csv"), &timeseries_csv(result))?;
    for var in VARIABLES {
        let stats = summary.stats.get(var).expect("known variable");
        write(
            &dir.join(format!("histogram_{var}.csv")),
            &histogram_csv(stats),
        )?;
    }
    write(&dir.join("summary.json"), &to_json(summary))
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub dir: PathBuf,
    pub runs: Vec<RunSummary>,
    pub aggregate: Aggregate,
}

#[cfg(feature = "parallel")]
fn map_seeds<F>(seeds: &[u64], execution: Execution, f: F) -> Vec<Result<RunSummary>>
where
    F: Fn(u64) -> Result<RunSummary> + Sync + Send,
{
    use rayon::prelude::*;
    match execution {
        Execution::Parallel => seeds.par_iter().map(|&s| f(s)).collect(),
        Execution::Serial => seeds.iter().map(|&s| f(s)).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn map_seeds<F>(seeds: &[u64], _execution: Execution, f: F) -> Vec<Result<RunSummary>>
where
    F: Fn(u64) -> Result<RunSummary>,
{
    seeds.iter().map(|&s| f(s)).collect()
}

/// Runs every seed of `scenario` under `out_dir/<name>/seed_<seed>/` and
/// writes `out_dir/<name>/aggregate.json` once all seeds have finished.
pub fn run_scenario(
    scenario: &Scenario,
    out_dir: &Path,
    execution: Execution,
) -> Result<ScenarioOutcome> {
    scenario.validate()?;
    let dir = out_dir.join(&scenario.name);
    let seeds: Vec<u64> = scenario.seeds().collect();
    let runs = map_seeds(&seeds, execution, |seed| {
        let result = run_with(&scenario.sim_config(seed), execution)?;
        let summary = RunSummary::new(scenario, &result)?;
        write_run(&dir.join(format!("seed_{seed}")), &summary, &result)?;
        Ok(summary)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let aggregate = Aggregate::from_runs(&scenario.name, &runs);
    write(&dir.join("aggregate.json"), &to_json(&aggregate))?;
    Ok(ScenarioOutcome {
        dir,
        runs,
        aggregate,
    })
}
