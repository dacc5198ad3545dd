//! The parameter rectangle `Θ = ∏ [a_i, b_i]`, its midpoints and radii,
//! vertices, containment, and the `id,a,b[,y]` CSV format.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One population unit with known outcome bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub id: String,
    pub lower: f64,
    pub upper: f64,
}

/// Per-unit intervals with derived midpoints `m_i = (a_i + b_i) / 2` and
/// radii `r_i = (b_i - a_i) / 2`. Unit order is the index order used
/// everywhere else in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationBounds {
    units: Vec<Unit>,
    midpoints: Vec<f64>,
    radii: Vec<f64>,
}

impl PopulationBounds {
    /// Builds bounds from `(id, a, b)` records, preserving order.
    pub fn from_records<I, S>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64, f64)>,
        S: Into<String>,
    {
        let units: Vec<Unit> = records
            .into_iter()
            .map(|(id, lower, upper)| Unit {
                id: id.into(),
                lower,
                upper,
            })
            .collect();
        Self::from_units(units)
    }

    pub fn from_units(units: Vec<Unit>) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        let mut seen = HashSet::with_capacity(units.len());
        for unit in &units {
            if !unit.lower.is_finite() || !unit.upper.is_finite() {
                return Err(Error::NonFiniteBound(unit.id.clone()));
            }
            if unit.lower > unit.upper {
                return Err(Error::InvertedInterval(unit.id.clone()));
            }
            if !seen.insert(unit.id.as_str()) {
                return Err(Error::DuplicateId(unit.id.clone()));
            }
        }
        let midpoints = units.iter().map(|u| (u.lower + u.upper) / 2.0).collect();
        let radii = units.iter().map(|u| (u.upper - u.lower) / 2.0).collect();
        Ok(PopulationBounds {
            units,
            midpoints,
            radii,
        })
    }

    /// Intervals `[m_i - r_i, m_i + r_i]`
    /// with generated ids `u1, u2, ...`.
    pub fn from_midpoints_radii(midpoints: &[f64], radii: &[f64]) -> Result<Self> {
        if midpoints.len() != radii.len() {
            return Err(Error::LengthMismatch {
                expected: midpoints.len(),
                got: radii.len(),
            });
        }
        Self::from_records(
            midpoints
                .iter()
                .zip(radii)
                .enumerate()
                .map(|(i, (&m, &r))| (format!("u{}", i + 1), m - r, m + r)),
        )
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.units.iter().map(|u| u.id.as_str())
    }

    pub fn lower(&self) -> impl Iterator<Item = f64> + '_ {
        self.units.iter().map(|u| u.lower)
    }

    pub fn upper(&self) -> impl Iterator<Item = f64> + '_ {
        self.units.iter().map(|u| u.upper)
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn midpoint_total(&self) -> f64 {
        self.midpoints.iter().sum()
    }

    /// `1e-9 * max(1, max_i r_i)`.
    pub fn default_tolerance(&self) -> f64 {
        1e-9 * self.radii.iter().copied().fold(1.0, f64::max)
    }

    /// Fails with [`Error::DegenerateUnit`] naming the first unit with `r_i = 0`.
    pub fn require_nondegenerate(&self) -> Result<()> {
        match self.radii.iter().position(|&r| r <= 0.0) {
            Some(i) => Err(Error::DegenerateUnit(self.units[i].id.clone())),
            None => Ok(()),
        }
    }

    /// Removes zero-radius units; their midpoints become a known additive constant.
    pub fn strip_degenerate(&self) -> Result<StrippedPopulation> {
        let mut kept_units = Vec::new();
        let mut kept = Vec::new();
        let mut removed_ids = Vec::new();
        let mut known_total = 0.0;
        for (i, unit) in self.units.iter().enumerate() {
            if self.radii[i] > 0.0 {
                kept_units.push(unit.clone());
                kept.push(i);
            } else {
                removed_ids.push(unit.id.clone());
                known_total += self.midpoints[i];
            }
        }
        Ok(StrippedPopulation {
            bounds: PopulationBounds::from_units(kept_units)?,
            kept,
            removed_ids,
            known_total,
        })
    }

    /// The rectangle vertex `y_i = m_i + r_i ε_i`.
    pub fn vertex(&self, signs: &SignVector) -> Result<OutcomeVector> {
        self.check_len(signs.len())?;
        Ok(OutcomeVector(
            self.units
                .iter()
                .zip(signs.signs())
                .map(|(u, &s)| if s > 0 { u.upper } else { u.lower })
                .collect(),
        ))
    }

    /// True iff `a_i - tol <= y_i <= b_i + tol` for every unit.
    pub fn contains(&self, y: &OutcomeVector, tol: f64) -> Result<bool> {
        self.check_len(y.len())?;
        Ok(self
            .units
            .iter()
            .zip(y.values())
            .all(|(u, &v)| u.lower - tol <= v && v <= u.upper + tol))
    }

    /// Indices of units whose value lies outside `[a_i - tol, b_i + tol]`.
    pub fn out_of_bounds(&self, y: &OutcomeVector, tol: f64) -> Result<Vec<usize>> {
        self.check_len(y.len())?;
        Ok(self
            .units
            .iter()
            .zip(y.values())
            .enumerate()
            .filter(|(_, (u, &v))| !(u.lower - tol <= v && v <= u.upper + tol))
            .map(|(i, _)| i)
            .collect())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }
}

/// Result of removing zero-radius units from a population.
#[derive(Debug, Clone, PartialEq)]
pub struct StrippedPopulation {
    pub bounds: PopulationBounds,
    /// Original indices of the retained units, in order.
    pub kept: Vec<usize>,
    pub removed_ids: Vec<String>,
    /// Sum of the removed units' (known) values.
    pub known_total: f64,
}

/// A full outcome vector `y`, one value per unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeVector(pub Vec<f64>);

impl OutcomeVector {
    pub fn new(values: Vec<f64>) -> Self {
        OutcomeVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        total(self)
    }
}

/// `T(y) = Σ y_i`.
pub fn total(y: &OutcomeVector) -> f64 {
    y.0.iter().sum()
}

/// A vertex label `ε ∈ {-1, +1}^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidSign(bad));
        }
        Ok(SignVector(signs))
    }

    /// Bit `i` of `mask` set means `ε_i = +1`.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        SignVector(
            (0..len)
                .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn all(len: usize, sign: i8) -> Result<Self> {
        Self::new(vec![sign; len])
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        SignVector(self.0.iter().map(|s| -s).collect())
    }
}

/// Bounds together with the optional observed `y` column of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsTable {
    pub bounds: PopulationBounds,
    pub observed: Vec<Option<f64>>,
}

impl BoundsTable {
    pub fn has_observations(&self) -> bool {
        self.observed.iter().any(Option::is_some)
    }

    /// Zero-based indices of rows carrying a `y` value.
    pub fn observed_indices(&self) -> Vec<usize> {
        self.observed
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|_| i))
            .collect()
    }
}

/// Reads a bounds CSV: header `id,a,b` with optional `y` column, `#` comments.
///
/// Interval checks (inversion, duplicates) are applied, but zero-radius rows
/// are accepted; minimax operations reject them separately.
pub fn read_bounds_csv<R: Read>(reader: R) -> Result<BoundsTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let (id_col, a_col, b_col) = match (column("id"), column("a"), column("b")) {
        (Some(i), Some(a), Some(b)) => (i, a, b),
        _ => {
            return Err(Error::Parse(format!(
                "bounds header must contain id,a,b; found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )))
        }
    };
    let y_col = column("y");

    let mut units = Vec::new();
    let mut observed = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let field = |col: usize| record.get(col).unwrap_or("");
        let id = field(id_col).to_string();
        if id.is_empty() {
            return Err(Error::Parse(format!("line {line}: empty id")));
        }
        let lower = parse_real(field(a_col), "a", line)?;
        let upper = parse_real(field(b_col), "b", line)?;
        let y = match y_col.map(field) {
            Some(text) if !text.is_empty() => Some(parse_real(text, "y", line)?),
            _ => None,
        };
        units.push(Unit { id, lower, upper });
        observed.push(y);
    }
    Ok(BoundsTable {
        bounds: PopulationBounds::from_units(units)?,
        observed,
    })
}

fn parse_real(text: &str, column: &str, line: usize) -> Result<f64> {
    text.parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: column {column}: `{text}` is not a number")))
}

/// Writes bounds (and optional observations) in the format read by [`read_bounds_csv`].
pub fn write_bounds_csv<W: Write>(
    writer: W,
    bounds: &PopulationBounds,
    observed: Option<&[Option<f64>]>,
) -> Result<()> {
    if let Some(obs) = observed {
        if obs.len() != bounds.len() {
            return Err(Error::LengthMismatch {
                expected: bounds.len(),
                got: obs.len(),
            });
        }
    }
    let mut wtr = csv::Writer::from_writer(writer);
    if observed.is_some() {
        wtr.write_record(["id", "a", "b", "y"])?;
    } else {
        wtr.write_record(["id", "a", "b"])?;
    }
    for (i, unit) in bounds.units().iter().enumerate() {
        let mut row = vec![unit.id.clone(), unit.lower.to_string(), unit.upper.to_string()];
        if let Some(obs) = observed {
            row.push(obs[i].map(|v| v.to_string()).unwrap_or_default());
        }
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn load_symmetric_interval() {
        let b = PopulationBounds::from_records([("u1", -1.0, 1.0)]).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.midpoints(), &[0.0]);
        assert_eq!(b.radii(), &[1.0]);
    }

    #[test]
    fn load_two_units() {
        let b = PopulationBounds::from_records([("u1", 0.0, 2.0), ("u2", 0.0, 4.0)]).unwrap();
        assert_eq!(b.midpoints(), &[1.0, 2.0]);
        assert_eq!(b.radii(), &[1.0, 2.0]);
        assert_eq!(b.ids().collect::<Vec<_>>(), ["u1", "u2"]);
    }

    #[test]
    fn load_rejects_bad_records() {
        assert_eq!(
            PopulationBounds::from_records([("u1", 3.0, 1.0)]),
            Err(Error::InvertedInterval("u1".into()))
        );
        assert_eq!(
            PopulationBounds::from_records(Vec::<(String, f64, f64)>::new()),
            Err(Error::EmptyPopulation)
        );
        assert_eq!(
            PopulationBounds::from_records([("u1", 0.0, 1.0), ("u1", 0.0, 2.0)]),
            Err(Error::DuplicateId("u1".into()))
        );
    }

    #[test]
    fn degenerate_units() {
        let b = PopulationBounds::from_records([("u1", 0.0, 2.0), ("k", 5.0, 5.0), ("u3", 1.0, 3.0)])
            .unwrap();
        assert_eq!(b.require_nondegenerate(), Err(Error::DegenerateUnit("k".into())));
        let stripped = b.strip_degenerate().unwrap();
        assert_eq!(stripped.bounds.len(), 2);
        assert_eq!(stripped.kept, vec![0, 2]);
        assert_eq!(stripped.removed_ids, vec!["k".to_string()]);
        assert_eq!(stripped.known_total, 5.0);
        assert!(stripped.bounds.require_nondegenerate().is_ok());
    }

    #[test]
    fn vertices() {
        let sq = PopulationBounds::from_records([("a", -1.0, 1.0), ("b", -1.0, 1.0)]).unwrap();
        let y = sq.vertex(&SignVector::new(vec![1, -1]).unwrap()).unwrap();
        assert_eq!(y.values(), &[1.0, -1.0]);

        let rect = PopulationBounds::from_records([("a", 0.0, 2.0), ("b", 0.0, 4.0)]).unwrap();
        let up = rect.vertex(&SignVector::all(2, 1).unwrap()).unwrap();
        assert_eq!(up.values(), &[2.0, 4.0]);
        let down = rect.vertex(&SignVector::all(2, -1).unwrap()).unwrap();
        assert_eq!(down.values(), &[0.0, 0.0]);

        assert_eq!(
            rect.vertex(&SignVector::all(3, 1).unwrap()),
            Err(Error::LengthMismatch { expected: 2, got: 3 })
        );
        assert_eq!(SignVector::new(vec![1, 0]), Err(Error::InvalidSign(0)));
    }

    #[test]
    fn containment() {
        let b = PopulationBounds::from_records([("u", -1.0, 1.0)]).unwrap();
        assert!(b.contains(&OutcomeVector(vec![0.0]), 0.0).unwrap());
        assert!(b.contains(&OutcomeVector(vec![1.0]), 0.0).unwrap());
        assert!(!b.contains(&OutcomeVector(vec![1.1]), 0.0).unwrap());
        assert!(b.contains(&OutcomeVector(vec![1.1]), 0.2).unwrap());
        assert_eq!(b.out_of_bounds(&OutcomeVector(vec![1.1]), 0.0).unwrap(), vec![0]);
    }

    #[test]
    fn totals() {
        assert_eq!(total(&OutcomeVector(vec![1.0, -1.0])), 0.0);
        assert_eq!(total(&OutcomeVector(vec![1.5, 3.0])), 4.5);
        let b = PopulationBounds::from_records([("a", 0.0, 2.0), ("b", 0.0, 4.0)]).unwrap();
        assert_eq!(
            total(&OutcomeVector(b.midpoints().to_vec())),
            b.midpoint_total()
        );
    }

    #[test]
    fn default_tolerance_scales_with_radius() {
        let small = PopulationBounds::from_records([("u", 0.0, 1.0)]).unwrap();
        assert_eq!(small.default_tolerance(), 1e-9);
        let big = PopulationBounds::from_records([("u", 0.0, 200.0)]).unwrap();
        assert!((big.default_tolerance() - 1e-7).abs() < 1e-20);
    }

    #[test]
    fn csv_with_comments_and_observations() {
        let text = "# population\nid,a,b,y\nu1,0,2,1.5\nu2, -1 , 1 ,\n# trailing\nu3,0,4,3\n";
        let table = read_bounds_csv(text.as_bytes()).unwrap();
        assert_eq!(table.bounds.len(), 3);
        assert_eq!(table.observed, vec![Some(1.5), None, Some(3.0)]);
        assert_eq!(table.observed_indices(), vec![0, 2]);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            read_bounds_csv("id,lo,hi\nu,0,1\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            read_bounds_csv("id,a,b\nu,zero,1\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert_eq!(
            read_bounds_csv("id,a,b\nu,3,1\n".as_bytes()),
            Err(Error::InvertedInterval("u".into()))
        );
    }

    fn arb_records() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-1e6f64..1e6, 0f64..1e3), 1..12)
    }

    proptest! {
        #[test]
        fn every_vertex_is_contained(records in arb_records(), mask in any::<u64>()) {
            let b = PopulationBounds::from_records(
                records.iter().enumerate().map(|(i, &(a, w))| (format!("u{i}"), a, a + w)),
            ).unwrap();
            let signs = SignVector::from_mask(mask, b.len());
            let y = b.vertex(&signs).unwrap();
            prop_assert!(b.contains(&y, 0.0).unwrap());
            for i in 0..b.len() {
                let m = b.midpoints()[i];
                let r = b.radii()[i];
                let expected = m + r * f64::from(signs.signs()[i]);
                prop_assert!((y.values()[i] - expected).abs() <= 1e-9 * (1.0 + m.abs() + r));
            }
        }

        #[test]
        fn csv_round_trip(records in arb_records()) {
            let b = PopulationBounds::from_records(
                records.iter().enumerate().map(|(i, &(a, w))| (format!("unit-{i}"), a, a + w)),
            ).unwrap();
            let mut buf = Vec::new();
            write_bounds_csv(&mut buf, &b, None).unwrap();
            let back = read_bounds_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.bounds, b);
        }
    }
}
