//! Pre-flight checks that surface input problems before any computation.

use std::fmt;
use std::path::Path;

use minimax_sampler::popmodel::read_bounds_csv;
use serde::Serialize;

use crate::{Command, DesignArgs, Format, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.into(),
            message: message.into(),
        }
    }

    pub fn warning(code: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code: code.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{level}[{}]: {}", self.code, self.message)
    }
}

/// One row of a bounds file, parsed leniently so every problem can be reported.
struct RawRow {
    line: usize,
    id: String,
    lower: Option<f64>,
    upper: Option<f64>,
    y: Option<f64>,
}

fn scan_bounds(path: &Path, out: &mut Vec<Diagnostic>) -> Option<Vec<RawRow>> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => {
            out.push(Diagnostic::error("MissingFile", format!("{}: {e}", path.display())));
            return None;
        }
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes.as_slice());
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => {
            out.push(Diagnostic::error("ParseError", format!("{}: {e}", path.display())));
            return None;
        }
    };
    let column = |name: &str| headers.iter().position(|h| h == name);
    let (Some(id_col), Some(a_col), Some(b_col)) = (column("id"), column("a"), column("b")) else {
        out.push(Diagnostic::error(
            "ParseError",
            format!("{}: header must contain id,a,b", path.display()),
        ));
        return None;
    };
    let y_col = column("y");
    let mut rows = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let line = k + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                out.push(Diagnostic::error("ParseError", format!("{}: {e}", path.display())));
                continue;
            }
        };
        let field = |c: usize| record.get(c).unwrap_or("");
        let number = |c: usize, name: &str, out: &mut Vec<Diagnostic>| {
            let text = field(c);
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Some(v),
                _ => {
                    out.push(Diagnostic::error(
                        "ParseError",
                        format!("{} line {line}: column {name}: `{text}` is not a finite number", path.display()),
                    ));
                    None
                }
            }
        };
        let lower = number(a_col, "a", out);
        let upper = number(b_col, "b", out);
        let y = match y_col {
            Some(c) if !field(c).is_empty() => number(c, "y", out),
            _ => None,
        };
        rows.push(RawRow {
            line,
            id: field(id_col).to_string(),
            lower,
            upper,
            y,
        });
    }
    if rows.is_empty() {
        out.push(Diagnostic::error("EmptyPopulation", format!("{} has no units", path.display())));
    }
    Some(rows)
}

/// Checks a bounds file. `degenerate_is_error` is false when the subcommand
/// tolerates zero-radius units (estimation) or they will be stripped.
fn check_bounds(path: &Path, degenerate_is_error: bool, out: &mut Vec<Diagnostic>) -> Option<usize> {
    let rows = scan_bounds(path, out)?;
    let mut seen = std::collections::HashSet::new();
    let scale = rows
        .iter()
        .filter_map(|r| Some((r.upper? - r.lower?).abs() / 2.0))
        .fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    for row in &rows {
        if row.id.is_empty() {
            out.push(Diagnostic::error("ParseError", format!("{} line {}: empty id", path.display(), row.line)));
        } else if !seen.insert(row.id.clone()) {
            out.push(Diagnostic::error("DuplicateId", format!("unit `{}` appears more than once", row.id)));
        }
        let (Some(a), Some(b)) = (row.lower, row.upper) else { continue };
        if a > b {
            out.push(Diagnostic::error(
                "InvertedInterval",
                format!("unit `{}` has a = {a} > b = {b}", row.id),
            ));
            continue;
        }
        if a == b {
            let message = format!("unit `{}` has zero radius (a = b = {a})", row.id);
            if degenerate_is_error {
                out.push(Diagnostic::error(
                    "DegenerateUnit",
                    format!("{message}; pass --strip-degenerate to treat it as known"),
                ));
            } else {
                out.push(Diagnostic::warning("DegenerateUnit", message));
            }
        }
        if let Some(y) = row.y {
            if y < a - tol || y > b + tol {
                out.push(Diagnostic::warning(
                    "OutOfBounds",
                    format!("unit `{}` has observed y = {y} outside [{a}, {b}]", row.id),
                ));
            }
        }
    }
    Some(rows.len())
}

fn check_file(path: &Path, out: &mut Vec<Diagnostic>) {
    if !path.is_file() {
        out.push(Diagnostic::error("MissingFile", format!("{} does not exist", path.display())));
    }
}

fn check_budget(budget: f64, units: Option<usize>, out: &mut Vec<Diagnostic>) {
    let ok = budget.is_finite() && budget > 0.0 && units.is_none_or(|n| budget <= n as f64);
    if !ok {
        let range = units.map_or_else(|| "(0, N]".to_string(), |n| format!("(0, {n}]"));
        out.push(Diagnostic::error(
            "BudgetOutOfRange",
            format!("budget {budget} is outside {range}"),
        ));
    }
}

fn check_design_args(args: &DesignArgs, units: Option<usize>, out: &mut Vec<Diagnostic>) {
    for path in [&args.design_file, &args.pi_from, &args.pi].into_iter().flatten() {
        check_file(path, out);
    }
    if let Some(budget) = args.budget {
        check_budget(budget, units, out);
    }
    if let (Some(size), Some(n)) = (args.size, units.or(args.of)) {
        if size == 0 || size > n {
            out.push(Diagnostic::error(
                "InvalidDesign",
                format!("SRSWOR size {size} is outside 1..={n}"),
            ));
        }
    }
}

fn check_tolerance(tol: f64, out: &mut Vec<Diagnostic>) {
    if !(tol.is_finite() && tol > 0.0) {
        out.push(Diagnostic::error("InvalidTolerance", format!("tolerance {tol} must be positive")));
    }
}

/// Returns every problem found in the configuration and its input files.
/// Errors block the run; warnings are copied into the report.
pub fn validate_inputs(config: &RunConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let strip = config.strip_degenerate;
    if config.format == Format::Csv && !matches!(config.command, Command::Design { .. } | Command::Simulate { .. }) {
        out.push(Diagnostic::error(
            "UnsupportedFormat",
            format!("--format csv is only available for design and simulate, not {}", config.command.name()),
        ));
    }
    match &config.command {
        Command::Design { bounds, budget } => {
            let units = check_bounds(bounds, !strip, &mut out);
            check_budget(*budget, units.map(|n| n - degenerate_count(bounds, strip)), &mut out);
        }
        Command::Estimate {
            bounds,
            sample,
            pi_from,
            pi,
        } => {
            check_bounds(bounds, false, &mut out);
            for path in [sample, pi_from, pi].into_iter().flatten() {
                check_file(path, &mut out);
            }
            if pi_from.is_none() && pi.is_none() {
                out.push(Diagnostic::error(
                    "MissingProbability",
                    "estimate needs --pi-from or --pi",
                ));
            }
        }
        Command::Audit { bounds, design, tol } => {
            let units = check_bounds(bounds, !strip, &mut out);
            check_design_args(design, units.map(|n| n - degenerate_count(bounds, strip)), &mut out);
            check_tolerance(*tol, &mut out);
        }
        Command::Oracle {
            bounds,
            design,
            suite,
            tol,
            suite_max_units,
            ..
        } => {
            if let Some(bounds) = bounds {
                let units = check_bounds(bounds, !strip, &mut out);
                check_design_args(design, units.map(|n| n - degenerate_count(bounds, strip)), &mut out);
            }
            if suite.is_some() && !(2..=12).contains(suite_max_units) {
                out.push(Diagnostic::error(
                    "InvalidSuite",
                    format!("--suite-max-units {suite_max_units} is outside 2..=12"),
                ));
            }
            check_tolerance(*tol, &mut out);
        }
        Command::Simulate {
            bounds,
            budget,
            reps,
            strategy,
            y_file,
            ..
        } => {
            let units = check_bounds(bounds, !strip, &mut out);
            check_budget(*budget, units.map(|n| n - degenerate_count(bounds, strip)), &mut out);
            if *reps < 2 {
                out.push(Diagnostic::error("TooFewReplicates", format!("--reps {reps} must be at least 2")));
            }
            for name in strategy {
                if name != "all" && minimax_sampler::mc::Strategy::parse(name).is_none() {
                    out.push(Diagnostic::error("UnknownStrategy", format!("unknown strategy `{name}`")));
                }
            }
            if let Some(path) = y_file {
                check_file(path, &mut out);
            }
        }
    }
    out
}

/// Zero-radius units that `--strip-degenerate` will remove.
fn degenerate_count(path: &Path, strip: bool) -> usize {
    if !strip {
        return 0;
    }
    std::fs::read(path)
        .ok()
        .and_then(|bytes| read_bounds_csv(bytes.as_slice()).ok())
        .map_or(0, |t| t.bounds.radii().iter().filter(|&&r| r == 0.0).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;
    use std::io::Write;

    fn bounds_file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    fn diagnose(args: &[&str]) -> Vec<Diagnostic> {
        let mut full = vec!["minimax-sampler"];
        full.extend_from_slice(args);
        validate_inputs(&RunConfig::parse_from(full))
    }

    #[test]
    fn inverted_interval_is_reported_once() {
        let f = bounds_file("id,a,b\nu1,0,1\nu2,3,2\n");
        let d = diagnose(&["design", "--bounds", f.path().to_str().unwrap(), "--budget", "1"]);
        let inverted: Vec<_> = d.iter().filter(|d| d.code == "InvertedInterval").collect();
        assert_eq!(inverted.len(), 1);
        assert!(inverted[0].message.contains("u2"));
    }

    #[test]
    fn out_of_bounds_y_names_the_unit() {
        let f = bounds_file("id,a,b,y\nu1,0,1,0.5\nfar,0,1,1.5\n");
        let d = diagnose(&["estimate", "--bounds", f.path().to_str().unwrap(), "--pi", f.path().to_str().unwrap()]);
        let w: Vec<_> = d.iter().filter(|d| d.code == "OutOfBounds").collect();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].severity, Severity::Warning);
        assert!(w[0].message.contains("far"));
    }

    #[test]
    fn zero_budget_is_out_of_range() {
        let f = bounds_file("id,a,b\nu1,0,1\nu2,0,2\n");
        let d = diagnose(&["design", "--bounds", f.path().to_str().unwrap(), "--budget", "0"]);
        assert_eq!(d.iter().filter(|d| d.code == "BudgetOutOfRange").count(), 1);
    }

    #[test]
    fn degenerate_unit_blocks_unless_stripped() {
        let f = bounds_file("id,a,b\nu1,0,1\nu2,2,2\n");
        let p = f.path().to_str().unwrap();
        let d = diagnose(&["design", "--bounds", p, "--budget", "1"]);
        assert!(d.iter().any(|d| d.code == "DegenerateUnit" && d.severity == Severity::Error));
        let d = diagnose(&["design", "--bounds", p, "--budget", "1", "--strip-degenerate"]);
        assert!(d.iter().all(|d| d.severity == Severity::Warning));
    }

    #[test]
    fn missing_file_is_an_error() {
        let d = diagnose(&["design", "--bounds", "/nonexistent/bounds.csv", "--budget", "1"]);
        assert!(d.iter().any(|d| d.code == "MissingFile"));
    }
}
