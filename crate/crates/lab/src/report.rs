use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::RunError;
use crate::registry::{Outcome, Table};

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    version: &'a str,
    config: &'a ExperimentConfig,
    field: Value,
    status: &'a str,
    passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    result: &'a Value,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn status(outcome: &Outcome) -> &'static str {
    match outcome.passed {
        Some(true) => "pass",
        Some(false) => "fail",
        None => "descriptive",
    }
}

pub fn write_outcome(dir: &Path, config: &ExperimentConfig, field: Value, outcome: &Outcome) -> Result<(), RunError> {
    let summary = Summary {
        experiment: &config.experiment,
        version: VERSION,
        config,
        field,
        status: status(outcome),
        passed: outcome.passed,
        error: None,
        result: &outcome.summary,
    };
    write_summary(dir, &summary)?;
    write_table(dir, &outcome.detail)
}

pub fn write_error(dir: &Path, config: &ExperimentConfig, field: Value, err: &RunError) -> Result<(), RunError> {
    let summary = Summary {
        experiment: &config.experiment,
        version: VERSION,
        config,
        field,
        status: err.kind(),
        passed: Some(false),
        error: Some(err.to_string()),
        result: &Value::Null,
    };
    write_summary(dir, &summary)
}

fn write_summary(dir: &Path, summary: &Summary<'_>) -> Result<(), RunError> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(dir.join("summary.json"), text)?;
    Ok(())
}

fn write_table(dir: &Path, table: &Table) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(dir.join("detail.csv"))?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
