//! Browser bindings for the allocation model.
//!
//! Each export takes plain values, returns a JSON string and throws a string
//! on error. The `*_json` functions hold the logic so they run natively too.

use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

use hermfair::population::{sample_population, ClickConfig, PopulationSpec};
use hermfair::scenario::{
    aggregate, builtin_scenario, AllocationRule, ScenarioId, UptakeVariant,
};
use hermfair::solver::solve;
use hermfair::stats::{chi2_independence, conditional_proportions, read_table_csv, Axis};
use hermfair::{ConstraintSet, ModelParams, SolveRequest};

/// Users shipped back per group for plotting.
const PLOT_LIMIT: usize = 400;

/// Largest sweep the page may request, in user-solves.
const SWEEP_BUDGET: usize = 5_000_000;

fn to_json(value: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn params_from(json_text: &str) -> Result<ModelParams, String> {
    if json_text.trim().is_empty() {
        return Ok(ModelParams::default());
    }
    let params: ModelParams = serde_json::from_str(json_text).map_err(|e| e.to_string())?;
    params.validate().map_err(|e| e.to_string())?;
    Ok(params)
}

/// Sample a population and solve it under `rule` (unconstrained, parity, eo,
/// eho or all).
pub fn allocate_json(
    params_json: &str,
    rule: &str,
    uptake: &str,
    n_per_group: usize,
    seed: u64,
) -> Result<String, String> {
    let params = params_from(params_json)?;
    let rule: AllocationRule = rule.parse().map_err(|e: hermfair::Error| e.to_string())?;
    let uptake: UptakeVariant = uptake.parse().map_err(|e: hermfair::Error| e.to_string())?;
    let spec = PopulationSpec {
        n_a: n_per_group,
        n_b: n_per_group,
        uptake: uptake.config(),
        click: ClickConfig::default(),
        seed,
    };
    let pop = sample_population(&spec).map_err(|e| e.to_string())?;
    let constraints = rule.constraints(ConstraintSet::DEFAULT_TOLERANCE);
    let result = solve(&SolveRequest::new(&pop, params).with_constraints(constraints))
        .map_err(|e| e.to_string())?;
    let baseline = solve(&SolveRequest::new(&pop, params)).map_err(|e| e.to_string())?;

    let mut shown = [0.0; 2];
    let mut counts = [0usize; 2];
    let mut users = Vec::new();
    for (u, &d) in pop.users().iter().zip(result.allocation.decisions()) {
        let g = u.group as usize;
        shown[g] += d;
        counts[g] += 1;
        if counts[g] <= PLOT_LIMIT {
            users.push(json!([u.group.to_string(), u.p, u.rho, d]));
        }
    }
    to_json(&json!({
        "rule": rule.name(),
        "status": result.status.as_str(),
        "objective": result.objective,
        "utility_pct": 100.0 * result.objective / baseline.objective,
        "gaps": result.gaps,
        "show_rate": { "A": shown[0] / counts[0] as f64, "B": shown[1] / counts[1] as f64 },
        "users": users,
    }))
}

/// Median utility and parity-gap curves of a reduced built-in sweep.
pub fn sweep_json(
    scenario: &str,
    uptake: &str,
    replications: usize,
    n_per_group: usize,
    seed: u64,
) -> Result<String, String> {
    let id: ScenarioId = scenario.parse().map_err(|e: hermfair::Error| e.to_string())?;
    let uptake: UptakeVariant = uptake.parse().map_err(|e: hermfair::Error| e.to_string())?;
    let mut spec = builtin_scenario(id, uptake);
    spec.replications = replications;
    spec.population.n_a = n_per_group;
    spec.population.n_b = n_per_group;
    let solves = spec.grid.len() * replications * AllocationRule::ALL.len();
    if solves * 2 * n_per_group > SWEEP_BUDGET {
        return Err(format!(
            "sweep too large for the page: {solves} solves of {} users",
            2 * n_per_group
        ));
    }
    let sweep = hermfair::scenario::run_sweep(&spec, seed).map_err(|e| e.to_string())?;
    let rows = aggregate(&sweep);
    let curves: Vec<_> = AllocationRule::ALL
        .iter()
        .map(|&rule| {
            let points: Vec<_> = rows
                .iter()
                .filter(|r| r.rule == rule)
                .map(|r| {
                    json!({
                        "x": r.param_value,
                        "utility_pct": r.utility_pct.map(|q| q.median),
                        "parity_gap": r.parity_gap.map(|q| q.median),
                    })
                })
                .collect();
            json!({ "rule": rule.name(), "points": points })
        })
        .collect();
    to_json(&json!({
        "scenario": id.name(),
        "param": spec.param.name(),
        "failed": sweep.failed(),
        "curves": curves,
    }))
}

/// χ² test and row-conditional Wilson intervals for a pasted CSV table.
pub fn stats_json(table_csv: &str, confidence: f64) -> Result<String, String> {
    let table = read_table_csv(table_csv.as_bytes()).map_err(|e| e.to_string())?;
    let chi2 = chi2_independence(&table);
    let cells = conditional_proportions(&table, Axis::Rows, confidence).map_err(|e| e.to_string())?;
    to_json(&json!({ "table": table, "chi2": chi2, "cells": cells }))
}

#[wasm_bindgen]
pub fn allocate(
    params_json: &str,
    rule: &str,
    uptake: &str,
    n_per_group: usize,
    seed: u64,
) -> Result<String, JsValue> {
    allocate_json(params_json, rule, uptake, n_per_group, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sweep(
    scenario: &str,
    uptake: &str,
    replications: usize,
    n_per_group: usize,
    seed: u64,
) -> Result<String, JsValue> {
    sweep_json(scenario, uptake, replications, n_per_group, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn stats(table_csv: &str, confidence: f64) -> Result<String, JsValue> {
    stats_json(table_csv, confidence).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn default_params() -> String {
    serde_json::to_string(&ModelParams::default()).expect("params serialize")
}
