//! Parameter sweeps over scalar scenario fields.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::report::{ComparisonReport, Invariants, PulseReport};
use crate::run::execute;
use crate::scenario::{Scenario, SWEEP_KEYS};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepParam {
    pub key: String,
    pub values: Vec<f64>,
}

/// Parses `key=v1,v2,...`.
pub fn parse_set(arg: &str) -> Result<SweepParam, CliError> {
    let (key, list) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Input(format!("--set expects key=v1,v2,..., got `{arg}`")))?;
    let key = key.trim().to_string();
    if !SWEEP_KEYS.contains(&key.as_str()) {
        return Err(CliError::Input(format!("`{key}` is not sweepable (use one of {})", SWEEP_KEYS.join(", "))));
    }
    let values = list
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::Input(format!("--set {key}: `{}` is not a finite number", v.trim())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Input(format!("--set {key}: no values")));
    }
    Ok(SweepParam { key, values })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    /// (key, value) in the order the parameters were given.
    pub params: Vec<(String, f64)>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariants: Option<Invariants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonReport>,
    pub pulses: Vec<PulseReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub scenario: String,
    pub keys: Vec<String>,
    /// Sorted by parameter tuple.
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sweep reports are serializable");
        s.push('\n');
        s
    }
}

fn combinations(params: &[SweepParam]) -> Vec<Vec<f64>> {
    params.iter().fold(vec![Vec::new()], |acc, p| {
        acc.iter()
            .flat_map(|prefix| {
                p.values.iter().map(move |v| {
                    let mut c = prefix.clone();
                    c.push(*v);
                    c
                })
            })
            .collect()
    })
}

fn run_cell(template: &Scenario, params: &[SweepParam], values: &[f64]) -> SweepCell {
    let mut cell = SweepCell {
        params: params.iter().zip(values).map(|(p, v)| (p.key.clone(), *v)).collect(),
        exit_code: 0,
        error: None,
        invariants: None,
        comparison: None,
        pulses: Vec::new(),
    };
    let mut s = template.clone();
    let result = params
        .iter()
        .zip(values)
        .try_for_each(|(p, v)| s.set(&p.key, *v))
        .and_then(|_| s.check())
        .and_then(|_| execute(&s));
    match result {
        Ok(out) => {
            if let Some(msg) = out.failure {
                cell.exit_code = 4;
                cell.error = Some(msg);
            }
            cell.invariants = Some(out.report.invariants);
            cell.comparison = out.report.comparison;
            cell.pulses = out.report.pulses;
        }
        Err(e) => {
            cell.exit_code = e.exit_code();
            cell.error = Some(e.to_string());
        }
    }
    cell
}

fn cmp_tuple(a: &[(String, f64)], b: &[(String, f64)]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.1.total_cmp(&y.1)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Runs every parameter combination on `workers` threads. Failed cells are
/// recorded, never fatal.
pub fn sweep(template: &Scenario, params: &[SweepParam], workers: usize) -> Result<SweepReport, CliError> {
    let combos = combinations(params);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Input(format!("cannot start {workers} workers: {e}")))?;
    let mut cells: Vec<SweepCell> =
        pool.install(|| combos.par_iter().map(|v| run_cell(template, params, v)).collect());
    cells.sort_by(|a, b| cmp_tuple(&a.params, &b.params));
    Ok(SweepReport {
        scenario: template.name.clone(),
        keys: params.iter().map(|p| p.key.clone()).collect(),
        cells,
    })
}
