//! The report envelope shared by every subcommand, and its renderers.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;
use crate::{Command, Format, RunConfig};

/// Version of the report layout described by `schemas/report.schema.json`.
pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub subcommand: String,
    /// `sha256:` digest over the contents of every input file, in read order.
    pub inputs_digest: String,
    pub results: Value,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(subcommand: &str, inputs_digest: String, results: Value, warnings: Vec<String>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION.to_string(),
            subcommand: subcommand.to_string(),
            inputs_digest,
            results,
            warnings,
        }
    }
}

/// Renders the report in the configured format. JSON goes through
/// [`Value`], whose maps are ordered, so keys come out sorted at every level.
pub fn render(report: &Report, config: &RunConfig) -> Result<String, CliError> {
    match config.format {
        Format::Json => {
            let value = serde_json::to_value(report).map_err(|e| CliError::Internal(e.to_string()))?;
            let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Internal(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv => match config.command {
            Command::Design { .. } => design_csv(&report.results),
            Command::Simulate { .. } => simulate_csv(&report.results),
            _ => Err(CliError::validation(
                "UnsupportedFormat",
                format!("--format csv is not available for {}", report.subcommand),
            )),
        },
    }
}

fn cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn finish(wtr: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = wtr.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Internal(e.to_string())
}

fn design_csv(results: &Value) -> Result<String, CliError> {
    let ids = results["ids"].as_array().cloned().unwrap_or_default();
    let pi = results["pi_star"].as_array().cloned().unwrap_or_default();
    let capped: Vec<&str> = results["capped"]
        .as_array()
        .map(|a| a.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["id", "pi_star", "capped"]).map_err(csv_err)?;
    for (id, p) in ids.iter().zip(&pi) {
        let id = cell(id);
        let is_capped = capped.contains(&id.as_str());
        wtr.write_record([id.as_str(), &cell(p), if is_capped { "true" } else { "false" }])
            .map_err(csv_err)?;
    }
    finish(wtr)
}

const SIMULATE_COLUMNS: [&str; 9] = [
    "strategy",
    "y_index",
    "exact_risk",
    "replicates",
    "empirical_mean",
    "empirical_mse",
    "mean_std_error",
    "mse_std_error",
    "seed",
];

fn simulate_csv(results: &Value) -> Result<String, CliError> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(SIMULATE_COLUMNS).map_err(csv_err)?;
    for row in results["rows"].as_array().into_iter().flatten() {
        let record: Vec<String> = SIMULATE_COLUMNS.iter().map(|c| cell(&row[*c])).collect();
        wtr.write_record(&record).map_err(csv_err)?;
    }
    finish(wtr)
}
