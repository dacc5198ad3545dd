//! Sampling designs: probability distributions over subsets of the unit
//! indices, with exact first- and second-order inclusion probabilities.
//!
//! Unit indices are zero-based in memory. The JSON design file format uses
//! one-based indices.

use std::borrow::Cow;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Largest number of listed subsets an enumerated design may carry.
pub const DEFAULT_SUPPORT_CAP: usize = 1 << 20;

const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// First-order inclusion probabilities, each in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InclusionProbabilities(Vec<f64>);

impl InclusionProbabilities {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if value == 0.0 {
                return Err(Error::ZeroInclusion(index));
            }
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::InvalidProbability { index, value });
            }
        }
        Ok(InclusionProbabilities(values))
    }

    /// `n / N` for every unit.
    pub fn uniform(units: usize, budget: f64) -> Result<Self> {
        Self::new(vec![budget / units as f64; units])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for InclusionProbabilities {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<InclusionProbabilities> for Vec<f64> {
    fn from(pi: InclusionProbabilities) -> Self {
        pi.0
    }
}

/// Pairwise inclusion probabilities `π_ij` and covariances
/// `Δ_ij = π_ij - π_i π_j`. The diagonal holds `π_ii = π_i`, so
/// `Δ_ii = π_i (1 - π_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderMatrix {
    units: usize,
    first: Vec<f64>,
    joint: Vec<f64>,
}

impl SecondOrderMatrix {
    /// Builds the matrix from a full row-major `N x N` joint table.
    pub fn from_joint(first: Vec<f64>, joint: Vec<f64>) -> Result<Self> {
        let units = first.len();
        if joint.len() != units * units {
            return Err(Error::DimensionMismatch {
                expected: units * units,
                got: joint.len(),
            });
        }
        Ok(SecondOrderMatrix {
            units,
            first,
            joint,
        })
    }

    pub fn units(&self) -> usize {
        self.units
    }

    pub fn first_order(&self) -> &[f64] {
        &self.first
    }

    pub fn joint(&self, i: usize, j: usize) -> f64 {
        self.joint[i * self.units + j]
    }

    pub fn delta(&self, i: usize, j: usize) -> f64 {
        self.joint(i, j) - self.first[i] * self.first[j]
    }

    pub fn joint_rows(&self) -> Vec<Vec<f64>> {
        self.joint.chunks(self.units).map(<[f64]>::to_vec).collect()
    }

    pub fn delta_rows(&self) -> Vec<Vec<f64>> {
        (0..self.units)
            .map(|i| (0..self.units).map(|j| self.delta(i, j)).collect())
            .collect()
    }

    /// `max_{i != j} |Δ_ij|`, zero for a single unit.
    pub fn max_offdiag_delta(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.units {
            for j in (i + 1)..self.units {
                worst = worst.max(self.delta(i, j).abs());
            }
        }
        worst
    }

    /// Fréchet bounds `max(0, π_i + π_j - 1) <= π_ij <= min(π_i, π_j)` and symmetry.
    pub fn satisfies_frechet_bounds(&self, tol: f64) -> bool {
        (0..self.units).all(|i| {
            (0..self.units).all(|j| {
                let p = self.joint(i, j);
                let (pi, pj) = (self.first[i], self.first[j]);
                (p - self.joint(j, i)).abs() <= tol
                    && p >= (pi + pj - 1.0).max(0.0) - tol
                    && p <= pi.min(pj) + tol
            })
        })
    }
}

/// One listed subset with its selection probability.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSubset {
    /// Sorted zero-based unit indices.
    pub units: Vec<usize>,
    pub probability: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SubsetRecord {
    subset: Vec<usize>,
    p: f64,
}

/// A design given by an explicit list of `(subset, p(s))` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedDesign {
    population: usize,
    support: Vec<WeightedSubset>,
    cumulative: Vec<f64>,
}

impl EnumeratedDesign {
    pub fn new(population: usize, support: Vec<WeightedSubset>) -> Result<Self> {
        Self::with_cap(population, support, DEFAULT_SUPPORT_CAP)
    }

    pub fn with_cap(population: usize, mut support: Vec<WeightedSubset>, cap: usize) -> Result<Self> {
        if population == 0 {
            return Err(Error::EmptyPopulation);
        }
        if support.len() > cap {
            return Err(Error::EnumerationTooLarge {
                support: support.len() as u128,
                cap,
            });
        }
        let mut total = 0.0;
        for entry in support.iter_mut() {
            if !(entry.probability >= 0.0 && entry.probability.is_finite()) {
                return Err(Error::InvalidDesign(format!(
                    "subset probability {} is not a nonnegative number",
                    entry.probability
                )));
            }
            entry.units.sort_unstable();
            if entry.units.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidDesign(format!(
                    "subset {:?} lists a unit twice",
                    one_based(&entry.units)
                )));
            }
            if let Some(&index) = entry.units.iter().find(|&&i| i >= population) {
                return Err(Error::IndexOutOfRange {
                    index,
                    units: population,
                });
            }
            total += entry.probability;
        }
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::InvalidDesign(format!(
                "subset probabilities sum to {total}, not 1"
            )));
        }
        let cumulative = support
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s.probability;
                Some(*acc)
            })
            .collect();
        let design = EnumeratedDesign {
            population,
            support,
            cumulative,
        };
        if let Some(i) = design.first_order_values().iter().position(|&p| p <= 0.0) {
            return Err(Error::ZeroInclusion(i));
        }
        Ok(design)
    }

    /// Parses the JSON design file: an array of `{"subset": [1-based indices], "p": real}`.
    pub fn from_json(text: &str, population: usize) -> Result<Self> {
        let records: Vec<SubsetRecord> = serde_json::from_str(text)?;
        let mut support = Vec::with_capacity(records.len());
        for record in records {
            let mut units = Vec::with_capacity(record.subset.len());
            for index in record.subset {
                if index == 0 || index > population {
                    return Err(Error::IndexOutOfRange {
                        index,
                        units: population,
                    });
                }
                units.push(index - 1);
            }
            support.push(WeightedSubset {
                units,
                probability: record.p,
            });
        }
        Self::new(population, support)
    }

    pub fn to_json(&self) -> Result<String> {
        let records: Vec<SubsetRecord> = self
            .support
            .iter()
            .map(|s| SubsetRecord {
                subset: one_based(&s.units),
                p: s.probability,
            })
            .collect();
        Ok(serde_json::to_string(&records)?)
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn support(&self) -> &[WeightedSubset] {
        &self.support
    }

    fn first_order_values(&self) -> Vec<f64> {
        let mut pi = vec![0.0; self.population];
        for s in &self.support {
            for &i in &s.units {
                pi[i] += s.probability;
            }
        }
        pi
    }

    fn second_order_values(&self) -> Vec<f64> {
        let n = self.population;
        let mut joint = vec![0.0; n * n];
        for s in &self.support {
            for (a, &i) in s.units.iter().enumerate() {
                joint[i * n + i] += s.probability;
                for &j in &s.units[a + 1..] {
                    joint[i * n + j] += s.probability;
                    joint[j * n + i] += s.probability;
                }
            }
        }
        joint
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let u: f64 = rng.gen();
        let pos = self.cumulative.partition_point(|&c| c <= u);
        let index = if pos < self.support.len() {
            pos
        } else {
            // u landed above a total that rounded slightly below 1.
            self.support
                .iter()
                .rposition(|s| s.probability > 0.0)
                .unwrap_or(0)
        };
        self.support[index].units.clone()
    }

    /// A random design with `support` listed subsets and positive weights,
    /// adjusted so every unit has positive inclusion probability.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, population: usize, support: usize) -> Result<Self> {
        let support = support.max(1);
        let mut subsets: Vec<Vec<usize>> = (0..support)
            .map(|_| (0..population).filter(|_| rng.gen_bool(0.5)).collect())
            .collect();
        for unit in 0..population {
            if !subsets.iter().any(|s| s.contains(&unit)) {
                let k = rng.gen_range(0..support);
                subsets[k].push(unit);
            }
        }
        let weights: Vec<f64> = (0..support).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut entries: Vec<WeightedSubset> = subsets
            .into_iter()
            .zip(&weights)
            .map(|(units, w)| WeightedSubset {
                units,
                probability: w / total,
            })
            .collect();
        // Push the rounding residue onto the last entry so the sum is 1 to ~1 ulp.
        let residue = 1.0 - entries.iter().map(|e| e.probability).sum::<f64>();
        if let Some(last) = entries.last_mut() {
            last.probability += residue;
        }
        Self::new(population, entries)
    }
}

fn one_based(units: &[usize]) -> Vec<usize> {
    units.iter().map(|i| i + 1).collect()
}

/// A sampling design over `N` units.
#[derive(Debug, Clone, PartialEq)]
pub enum Design {
    Enumerated(EnumeratedDesign),
    /// Independent Bernoulli(`π_i`) inclusion.
    Poisson(InclusionProbabilities),
    /// Simple random sampling without replacement of fixed size.
    Srswor { population: usize, size: usize },
}

impl Design {
    pub fn poisson(pi: InclusionProbabilities) -> Result<Self> {
        if pi.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        Ok(Design::Poisson(pi))
    }

    pub fn srswor(population: usize, size: usize) -> Result<Self> {
        if population == 0 {
            return Err(Error::EmptyPopulation);
        }
        if size == 0 {
            return Err(Error::ZeroInclusion(0));
        }
        if size > population {
            return Err(Error::InvalidDesign(format!(
                "sample size {size} exceeds population {population}"
            )));
        }
        Ok(Design::Srswor { population, size })
    }

    pub fn label(&self) -> String {
        match self {
            Design::Enumerated(d) => format!("enumerated({} subsets)", d.support.len()),
            Design::Poisson(_) => "poisson".to_string(),
            Design::Srswor { population, size } => format!("srswor({population},{size})"),
        }
    }

    pub fn population(&self) -> usize {
        match self {
            Design::Enumerated(d) => d.population,
            Design::Poisson(pi) => pi.len(),
            Design::Srswor { population, .. } => *population,
        }
    }

    /// Every supported kind has exact pairwise inclusion probabilities.
    pub fn exact_second_order(&self) -> bool {
        true
    }

    /// Number of subsets the design places positive mass on (before zero-mass pruning
    /// for Poisson designs with some `π_i = 1`).
    pub fn support_size(&self) -> u128 {
        match self {
            Design::Enumerated(d) => d.support.len() as u128,
            Design::Poisson(pi) => {
                let free = pi.as_slice().iter().filter(|&&p| p < 1.0).count();
                if free >= 127 {
                    u128::MAX
                } else {
                    1u128 << free
                }
            }
            Design::Srswor { population, size } => binomial(*population, *size),
        }
    }

    pub fn enumerable(&self, cap: usize) -> bool {
        self.support_size() <= cap as u128
    }

    /// The explicit subset listing of this design.
    pub fn enumerate(&self, cap: usize) -> Result<Cow<'_, EnumeratedDesign>> {
        let support = self.support_size();
        if support > cap as u128 {
            return Err(Error::EnumerationTooLarge { support, cap });
        }
        match self {
            Design::Enumerated(d) => Ok(Cow::Borrowed(d)),
            Design::Poisson(pi) => Ok(Cow::Owned(enumerate_poisson(pi, cap)?)),
            Design::Srswor { population, size } => {
                Ok(Cow::Owned(enumerate_srswor(*population, *size, cap)?))
            }
        }
    }

    pub fn first_order(&self) -> InclusionProbabilities {
        match self {
            Design::Enumerated(d) => InclusionProbabilities(d.first_order_values()),
            Design::Poisson(pi) => pi.clone(),
            Design::Srswor { population, size } => {
                InclusionProbabilities(vec![*size as f64 / *population as f64; *population])
            }
        }
    }

    pub fn second_order(&self) -> SecondOrderMatrix {
        let first = self.first_order().into_inner();
        let n = first.len();
        let joint = match self {
            Design::Enumerated(d) => d.second_order_values(),
            Design::Poisson(pi) => {
                let p = pi.as_slice();
                let mut joint = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        joint[i * n + j] = if i == j { p[i] } else { p[i] * p[j] };
                    }
                }
                joint
            }
            Design::Srswor { population, size } => {
                let (nn, k) = (*population as f64, *size as f64);
                let off = if *population > 1 {
                    k * (k - 1.0) / (nn * (nn - 1.0))
                } else {
                    0.0
                };
                let mut joint = vec![off; n * n];
                for i in 0..n {
                    joint[i * n + i] = first[i];
                }
                joint
            }
        };
        SecondOrderMatrix {
            units: n,
            first,
            joint,
        }
    }

    /// `E|S| = Σ π_i`.
    pub fn expected_size(&self) -> f64 {
        match self {
            Design::Srswor { size, .. } => *size as f64,
            _ => self.first_order().sum(),
        }
    }

    pub fn is_pairwise_independent(&self, tol: f64) -> bool {
        self.second_order().max_offdiag_delta() <= tol
    }

    /// Draws one sample; returns sorted zero-based indices.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        match self {
            Design::Enumerated(d) => d.draw(rng),
            Design::Poisson(pi) => pi
                .as_slice()
                .iter()
                .enumerate()
                .filter_map(|(i, &p)| (rng.gen::<f64>() < p).then_some(i))
                .collect(),
            Design::Srswor { population, size } => {
                let mut units: Vec<usize> = (0..*population).collect();
                for i in 0..*size {
                    let j = rng.gen_range(i..*population);
                    units.swap(i, j);
                }
                units.truncate(*size);
                units.sort_unstable();
                units
            }
        }
    }

    /// Draws the sample determined by `(seed, stream)`.
    pub fn draw_stream(&self, seed: u64, stream: u64) -> Vec<usize> {
        self.draw(&mut stream_rng(seed, stream))
    }
}

fn enumerate_poisson(pi: &InclusionProbabilities, cap: usize) -> Result<EnumeratedDesign> {
    let p = pi.as_slice();
    let certain: Vec<usize> = (0..p.len()).filter(|&i| p[i] >= 1.0).collect();
    let free: Vec<usize> = (0..p.len()).filter(|&i| p[i] < 1.0).collect();
    let mut support = Vec::with_capacity(1usize << free.len());
    for mask in 0u64..(1u64 << free.len()) {
        let mut prob = 1.0;
        let mut units = certain.clone();
        for (bit, &i) in free.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                prob *= p[i];
                units.push(i);
            } else {
                prob *= 1.0 - p[i];
            }
        }
        support.push(WeightedSubset {
            units,
            probability: prob,
        });
    }
    build_unchecked_sum(p.len(), support, cap)
}

fn enumerate_srswor(population: usize, size: usize, cap: usize) -> Result<EnumeratedDesign> {
    let count = binomial(population, size);
    let prob = 1.0 / count as f64;
    let mut support = Vec::with_capacity(count as usize);
    let mut combo: Vec<usize> = (0..size).collect();
    loop {
        support.push(WeightedSubset {
            units: combo.clone(),
            probability: prob,
        });
        // Advance to the next k-combination in lexicographic order.
        let mut i = size;
        loop {
            if i == 0 {
                return build_unchecked_sum(population, support, cap);
            }
            i -= 1;
            if combo[i] < population - size + i {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..size {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// Product-form listings sum to 1 only up to accumulated rounding, which can
/// exceed the file-format tolerance for large supports; normalize the last
/// entry instead of rejecting.
fn build_unchecked_sum(
    population: usize,
    mut support: Vec<WeightedSubset>,
    cap: usize,
) -> Result<EnumeratedDesign> {
    let residue = 1.0 - support.iter().map(|s| s.probability).sum::<f64>();
    if residue.abs() > PROBABILITY_SUM_TOL {
        if let Some(last) = support.iter_mut().rev().find(|s| s.probability > residue.abs()) {
            last.probability += residue;
        }
    }
    EnumeratedDesign::with_cap(population, support, cap)
}

/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Observed values for the sampled units.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Sample {
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: indices.len(),
                got: values.len(),
            });
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDesign("sample lists a unit twice".into()));
        }
        Ok(Sample { indices, values })
    }

    pub fn empty() -> Self {
        Sample {
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Extracts `y_s` from a full outcome vector.
    pub fn from_outcomes(indices: &[usize], y: &[f64]) -> Result<Self> {
        let values = indices
            .iter()
            .map(|&i| {
                y.get(i).copied().ok_or(Error::IndexOutOfRange {
                    index: i,
                    units: y.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(indices.to_vec(), values)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pi(v: &[f64]) -> InclusionProbabilities {
        InclusionProbabilities::new(v.to_vec()).unwrap()
    }

    fn listed(population: usize, entries: &[(&[usize], f64)]) -> EnumeratedDesign {
        EnumeratedDesign::new(
            population,
            entries
                .iter()
                .map(|(u, p)| WeightedSubset {
                    units: u.to_vec(),
                    probability: *p,
                })
                .collect(),
        )
        .unwrap()
    }

    /// All 2-subsets of {0,1,2,3}, each with probability 1/6.
    fn srswor_4_2_by_hand() -> EnumeratedDesign {
        let pairs: [&[usize]; 6] = [&[0, 1], &[0, 2], &[0, 3], &[1, 2], &[1, 3], &[2, 3]];
        listed(4, &pairs.map(|p| (p, 1.0 / 6.0)))
    }

    #[test]
    fn srswor_first_order_matches_enumeration() {
        let d = Design::srswor(4, 2).unwrap();
        assert_eq!(d.first_order().as_slice(), &[0.5; 4]);
        let hand = Design::Enumerated(srswor_4_2_by_hand());
        for p in hand.first_order().as_slice() {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_and_listed_first_order() {
        let d = Design::poisson(pi(&[1.0 / 3.0, 2.0 / 3.0, 1.0])).unwrap();
        assert_eq!(d.first_order().as_slice(), &[1.0 / 3.0, 2.0 / 3.0, 1.0]);
        let e = Design::Enumerated(listed(2, &[(&[0], 0.5), (&[1], 0.5)]));
        assert_eq!(e.first_order().as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn srswor_second_order_closed_form_and_enumeration() {
        let closed = Design::srswor(4, 2).unwrap().second_order();
        let hand = Design::Enumerated(srswor_4_2_by_hand()).second_order();
        for i in 0..4 {
            for j in 0..4 {
                assert!((closed.joint(i, j) - hand.joint(i, j)).abs() < 1e-12);
                if i != j {
                    assert!((closed.joint(i, j) - 1.0 / 6.0).abs() < 1e-15);
                    assert!((closed.delta(i, j) + 1.0 / 12.0).abs() < 1e-15);
                }
            }
        }
        assert!((closed.delta(0, 0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn listed_second_order() {
        let e = Design::Enumerated(listed(2, &[(&[0], 0.5), (&[1], 0.5)]));
        let s = e.second_order();
        assert_eq!(s.joint(0, 1), 0.0);
        assert_eq!(s.delta(0, 1), -0.25);
        assert_eq!(s.max_offdiag_delta(), 0.25);
    }

    #[test]
    fn poisson_second_order_is_product() {
        let d = Design::poisson(pi(&[0.2, 0.7, 1.0, 0.45])).unwrap();
        let s = d.second_order();
        assert_eq!(s.max_offdiag_delta(), 0.0);
        assert!(d.is_pairwise_independent(0.0));
    }

    #[test]
    fn expected_sizes() {
        let d = Design::poisson(pi(&[1.0 / 3.0, 2.0 / 3.0, 1.0])).unwrap();
        assert!((d.expected_size() - 2.0).abs() < 1e-15);
        assert_eq!(Design::srswor(4, 2).unwrap().expected_size(), 2.0);
        let e = Design::Enumerated(listed(2, &[(&[], 0.5), (&[0, 1], 0.5)]));
        assert_eq!(e.expected_size(), 1.0);
    }

    #[test]
    fn pairwise_independence_checks() {
        assert!(!Design::srswor(4, 2).unwrap().is_pairwise_independent(1e-12));
        let product = Design::Enumerated(listed(
            2,
            &[(&[], 0.25), (&[0], 0.25), (&[1], 0.25), (&[0, 1], 0.25)],
        ));
        assert!(product.is_pairwise_independent(1e-15));
    }

    #[test]
    fn enumerated_validation() {
        let bad_sum = EnumeratedDesign::new(
            2,
            vec![
                WeightedSubset { units: vec![0], probability: 0.5 },
                WeightedSubset { units: vec![1], probability: 0.4 },
            ],
        );
        assert!(matches!(bad_sum, Err(Error::InvalidDesign(_))));
        let uncovered = EnumeratedDesign::new(
            3,
            vec![WeightedSubset { units: vec![0, 1], probability: 1.0 }],
        );
        assert_eq!(uncovered, Err(Error::ZeroInclusion(2)));
        let too_many = EnumeratedDesign::with_cap(
            1,
            vec![
                WeightedSubset { units: vec![0], probability: 0.5 },
                WeightedSubset { units: vec![0], probability: 0.5 },
            ],
            1,
        );
        assert!(matches!(too_many, Err(Error::EnumerationTooLarge { .. })));
        assert!(matches!(
            Design::srswor(4, 0),
            Err(Error::ZeroInclusion(_))
        ));
        assert!(matches!(
            InclusionProbabilities::new(vec![0.5, 1.5]),
            Err(Error::InvalidProbability { index: 1, .. })
        ));
    }

    #[test]
    fn json_round_trip_is_one_based() {
        let text = r#"[{"subset":[1],"p":0.25},{"subset":[1,2],"p":0.75}]"#;
        let d = EnumeratedDesign::from_json(text, 2).unwrap();
        assert_eq!(d.support()[1].units, vec![0, 1]);
        assert_eq!(d.to_json().unwrap(), text);
        assert!(matches!(
            EnumeratedDesign::from_json(r#"[{"subset":[0],"p":1}]"#, 2),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn enumerate_closed_forms() {
        let poisson = Design::poisson(pi(&[0.3, 1.0, 0.6])).unwrap();
        let listing = poisson.enumerate(DEFAULT_SUPPORT_CAP).unwrap();
        assert_eq!(listing.support().len(), 4);
        let as_design = Design::Enumerated(listing.into_owned());
        let (a, b) = (as_design.second_order(), poisson.second_order());
        for i in 0..3 {
            for j in 0..3 {
                assert!((a.joint(i, j) - b.joint(i, j)).abs() < 1e-12);
            }
        }
        let sr = Design::srswor(6, 3).unwrap();
        let listing = sr.enumerate(DEFAULT_SUPPORT_CAP).unwrap();
        assert_eq!(listing.support().len(), 20);
        let as_design = Design::Enumerated(listing.into_owned());
        let (a, b) = (as_design.second_order(), sr.second_order());
        for i in 0..6 {
            for j in 0..6 {
                assert!((a.joint(i, j) - b.joint(i, j)).abs() < 1e-12);
            }
        }
        assert!(matches!(
            Design::srswor(40, 20).unwrap().enumerate(DEFAULT_SUPPORT_CAP),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn certain_inclusion_always_drawn() {
        let d = Design::poisson(pi(&[1.0, 1.0])).unwrap();
        for stream in 0..100 {
            assert_eq!(d.draw_stream(1, stream), vec![0, 1]);
        }
    }

    #[test]
    fn draws_are_reproducible() {
        let d = Design::srswor(10, 4).unwrap();
        let a: Vec<_> = (0..20).map(|s| d.draw_stream(99, s)).collect();
        let b: Vec<_> = (0..20).map(|s| d.draw_stream(99, s)).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|s| s.len() == 4));
    }

    #[test]
    fn tiny_inclusion_frequency() {
        let p1 = 1e-9;
        let d = Design::poisson(pi(&[p1, 0.5])).unwrap();
        let draws = 1_000_000u64;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let hits = (0..draws).filter(|_| d.draw(&mut rng).contains(&0)).count() as f64;
        let sigma = (draws as f64 * p1 * (1.0 - p1)).sqrt();
        assert!((hits - draws as f64 * p1).abs() <= 3.0 * sigma.max(1.0));
    }

    #[test]
    fn srswor_subset_frequencies() {
        let d = Design::srswor(4, 2).unwrap();
        let draws = 1_000_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            *counts.entry(d.draw(&mut rng)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - draws as f64 * p).abs() <= 3.0 * sigma);
        }
    }

    #[test]
    fn enumerated_draw_frequencies() {
        let d = Design::Enumerated(listed(3, &[(&[0], 0.2), (&[1, 2], 0.5), (&[0, 2], 0.3)]));
        let draws = 200_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut freq = [0usize; 3];
        for _ in 0..draws {
            for i in d.draw(&mut rng) {
                freq[i] += 1;
            }
        }
        for (i, &p) in d.first_order().as_slice().iter().enumerate() {
            let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
            assert!((freq[i] as f64 - draws as f64 * p).abs() <= 3.0 * sigma);
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(20, 10), 184_756);
        assert_eq!(binomial(3, 5), 0);
    }

    proptest! {
        #[test]
        fn random_designs_are_consistent(seed in any::<u64>(), n in 1usize..7, support in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = EnumeratedDesign::random(&mut rng, n, support).unwrap();
            let design = Design::Enumerated(d);
            let second = design.second_order();
            prop_assert!(second.satisfies_frechet_bounds(1e-12));
            let first = design.first_order();
            for i in 0..n {
                prop_assert!((second.joint(i, i) - first.as_slice()[i]).abs() < 1e-12);
            }
            prop_assert!((design.expected_size() - first.sum()).abs() < 1e-12);
        }

        #[test]
        fn frechet_bounds_for_closed_forms(n in 1usize..9, k in 1usize..9) {
            prop_assume!(k <= n);
            let d = Design::srswor(n, k).unwrap();
            prop_assert!(d.second_order().satisfies_frechet_bounds(1e-12));
        }
    }
}
