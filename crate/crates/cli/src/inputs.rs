use std::collections::HashMap;
use std::path::{Path, PathBuf};

use minimax_sampler::allocator::solve_waterfill;
use minimax_sampler::designs::{Design, EnumeratedDesign, InclusionProbabilities};
use minimax_sampler::popmodel::{read_bounds_csv, BoundsTable, OutcomeVector, PopulationBounds, StrippedPopulation};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::{DesignArgs, DesignKind};

/// Files read during a run, in read order, for the report digest.
#[derive(Debug, Default)]
pub struct InputSet {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl InputSet {
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        self.files.push((path.to_path_buf(), bytes.clone()));
        Ok(bytes)
    }

    pub fn read_text(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = self.read(path)?;
        String::from_utf8(bytes)
            .map_err(|_| CliError::validation("ParseError", format!("{} is not UTF-8", path.display())))
    }

    /// SHA-256 over the length-prefixed contents of every input, independent of paths.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for (_, bytes) in &self.files {
            hasher.update((bytes.len() as u64).to_le_bytes());
            hasher.update(bytes);
        }
        let hex: String = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        format!("sha256:{hex}")
    }
}

/// A bounds file after the optional degenerate-unit policy.
#[derive(Debug)]
pub struct Population {
    pub table: BoundsTable,
    /// Bounds used for computation (stripped when requested).
    pub bounds: PopulationBounds,
    pub stripped: Option<StrippedPopulation>,
}

impl Population {
    /// Observed values aligned with [`Population::bounds`].
    pub fn observed(&self) -> Vec<Option<f64>> {
        match &self.stripped {
            Some(s) => s.kept.iter().map(|&i| self.table.observed[i]).collect(),
            None => self.table.observed.clone(),
        }
    }

    pub fn known_total(&self) -> f64 {
        self.stripped.as_ref().map_or(0.0, |s| s.known_total)
    }

    /// Position in the working bounds of the original row `row`.
    pub fn working_index(&self, row: usize) -> Option<usize> {
        match &self.stripped {
            Some(s) => s.kept.iter().position(|&k| k == row),
            None => Some(row),
        }
    }
}

pub fn load_population(inputs: &mut InputSet, path: &Path, strip: bool) -> Result<Population, CliError> {
    let bytes = inputs.read(path)?;
    let table = read_bounds_csv(bytes.as_slice()).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })?;
    let (bounds, stripped) = if strip {
        let s = table.bounds.strip_degenerate().map_err(|source| CliError::Input {
            path: path.to_path_buf(),
            source,
        })?;
        (s.bounds.clone(), Some(s))
    } else {
        (table.bounds.clone(), None)
    };
    Ok(Population {
        table,
        bounds,
        stripped,
    })
}

fn align_by_id(
    bounds: &PopulationBounds,
    ids: &[String],
    values: &[f64],
    source: &Path,
) -> Result<Vec<f64>, CliError> {
    let lookup: HashMap<&str, f64> = ids.iter().map(String::as_str).zip(values.iter().copied()).collect();
    bounds
        .ids()
        .map(|id| {
            lookup.get(id).copied().ok_or_else(|| {
                CliError::validation(
                    "MissingProbability",
                    format!("{} has no inclusion probability for unit `{id}`", source.display()),
                )
            })
        })
        .collect()
}

fn positional(bounds: &PopulationBounds, values: Vec<f64>, source: &Path) -> Result<Vec<f64>, CliError> {
    if values.len() != bounds.len() {
        return Err(CliError::validation(
            "LengthMismatch",
            format!(
                "{} lists {} probabilities for {} units",
                source.display(),
                values.len(),
                bounds.len()
            ),
        ));
    }
    Ok(values)
}

fn to_probabilities(values: Vec<f64>, source: &Path) -> Result<InclusionProbabilities, CliError> {
    InclusionProbabilities::new(values).map_err(|e| CliError::Input {
        path: source.to_path_buf(),
        source: e,
    })
}

/// Reads `pi_star` (and `ids`, when present) from a `design` report.
pub fn read_pi_report(
    inputs: &mut InputSet,
    path: &Path,
    bounds: &PopulationBounds,
) -> Result<InclusionProbabilities, CliError> {
    let text = inputs.read_text(path)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::validation("ParseError", format!("{}: {e}", path.display())))?;
    let body = value.get("results").unwrap_or(&value);
    let pi: Vec<f64> = body
        .get("pi_star")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .ok_or_else(|| {
            CliError::validation("ParseError", format!("{} has no numeric `pi_star` array", path.display()))
        })?;
    let values = match body.get("ids").and_then(|v| serde_json::from_value::<Vec<String>>(v.clone()).ok()) {
        Some(ids) if ids.len() == pi.len() => align_by_id(bounds, &ids, &pi, path)?,
        _ => positional(bounds, pi, path)?,
    };
    to_probabilities(values, path)
}

/// Reads a CSV with a `pi` column and optional `id` column.
pub fn read_pi_csv(
    inputs: &mut InputSet,
    path: &Path,
    bounds: &PopulationBounds,
) -> Result<InclusionProbabilities, CliError> {
    let bytes = inputs.read(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let parse_err = |e: csv::Error| CliError::validation("ParseError", format!("{}: {e}", path.display()));
    let headers = rdr.headers().map_err(parse_err)?.clone();
    let pi_col = headers.iter().position(|h| h == "pi").ok_or_else(|| {
        CliError::validation("ParseError", format!("{} has no `pi` column", path.display()))
    })?;
    let id_col = headers.iter().position(|h| h == "id");
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(parse_err)?;
        let text = record.get(pi_col).unwrap_or("");
        values.push(text.parse::<f64>().map_err(|_| {
            CliError::validation("ParseError", format!("{}: `{text}` is not a number", path.display()))
        })?);
        if let Some(c) = id_col {
            ids.push(record.get(c).unwrap_or("").to_string());
        }
    }
    let values = if id_col.is_some() {
        align_by_id(bounds, &ids, &values, path)?
    } else {
        positional(bounds, values, path)?
    };
    to_probabilities(values, path)
}

/// Sampled units from a list of ids or 1-based indices into the original file.
/// Returns original row indices.
pub fn read_sample_file(
    inputs: &mut InputSet,
    path: &Path,
    table: &BoundsTable,
) -> Result<Vec<usize>, CliError> {
    let text = inputs.read_text(path)?;
    let ids: HashMap<&str, usize> = table.bounds.ids().enumerate().map(|(i, id)| (id, i)).collect();
    let mut rows = Vec::new();
    for line in text.lines().filter(|l| !l.trim_start().starts_with('#')) {
        for token in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let row = match ids.get(token) {
                Some(&i) => i,
                None => match token.parse::<usize>() {
                    Ok(k) if k >= 1 && k <= table.bounds.len() => k - 1,
                    _ => {
                        return Err(CliError::validation(
                            "UnknownUnit",
                            format!("{}: `{token}` is neither a unit id nor a valid index", path.display()),
                        ))
                    }
                },
            };
            if rows.contains(&row) {
                return Err(CliError::validation(
                    "DuplicateSampleUnit",
                    format!("{}: unit `{token}` listed twice", path.display()),
                ));
            }
            rows.push(row);
        }
    }
    rows.sort_unstable();
    Ok(rows)
}

/// Outcome vectors, one per row; a leading non-numeric header row is skipped.
pub fn read_y_file(inputs: &mut InputSet, path: &Path, units: usize) -> Result<Vec<OutcomeVector>, CliError> {
    let bytes = inputs.read(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes.as_slice());
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::validation("ParseError", format!("{}: {e}", path.display())))?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(values) => {
                if values.len() != units {
                    return Err(CliError::validation(
                        "LengthMismatch",
                        format!(
                            "{}: row {} has {} values for {units} units",
                            path.display(),
                            line + 1,
                            values.len()
                        ),
                    ));
                }
                rows.push(OutcomeVector(values));
            }
            Err(_) if line == 0 => continue,
            Err(_) => {
                return Err(CliError::validation(
                    "ParseError",
                    format!("{}: row {} is not numeric", path.display(), line + 1),
                ))
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::validation(
            "ParseError",
            format!("{} contains no outcome vectors", path.display()),
        ));
    }
    Ok(rows)
}

/// Builds the design selected by `--design` and its companion flags.
pub fn build_design(
    args: &DesignArgs,
    bounds: &PopulationBounds,
    inputs: &mut InputSet,
) -> Result<Design, CliError> {
    let units = bounds.len();
    let kind = args
        .kind
        .ok_or_else(|| CliError::validation("MissingDesign", "--design is required"))?;
    match kind {
        DesignKind::Srswor => {
            let size = args
                .size
                .ok_or_else(|| CliError::validation("MissingDesign", "--design srswor needs --size"))?;
            if let Some(of) = args.of {
                if of != units {
                    return Err(CliError::validation(
                        "LengthMismatch",
                        format!("--of {of} does not match the {units} units in the bounds file"),
                    ));
                }
            }
            Ok(Design::srswor(units, size)?)
        }
        DesignKind::Enumerated => {
            let path = args.design_file.as_ref().ok_or_else(|| {
                CliError::validation("MissingDesign", "--design enumerated needs --design-file")
            })?;
            let text = inputs.read_text(path)?;
            let design = EnumeratedDesign::from_json(&text, units).map_err(|source| CliError::Input {
                path: path.clone(),
                source,
            })?;
            Ok(Design::Enumerated(design))
        }
        DesignKind::Poisson => {
            let pi = if let Some(path) = &args.pi_from {
                read_pi_report(inputs, path, bounds)?
            } else if let Some(path) = &args.pi {
                read_pi_csv(inputs, path, bounds)?
            } else if let Some(budget) = args.budget {
                bounds.require_nondegenerate()?;
                solve_waterfill(bounds.radii(), budget)?.pi_star
            } else {
                return Err(CliError::validation(
                    "MissingDesign",
                    "--design poisson needs --design-pi-from, --design-pi or --design-budget",
                ));
            };
            Ok(Design::poisson(pi)?)
        }
    }
}
