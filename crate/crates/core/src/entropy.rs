//! Discrete entropy, conditional entropy and information quantity over exact
//! rational probabilities, returned as certified enclosures.
//!
//! `0 * log2 0` is taken as `0`. Terms with equal probabilities are grouped
//! and evaluated once, which keeps distributions with millions of equal
//! outcomes cheap.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certified::{log2_fixed, surprisal_fixed, CertifiedReal, FixedInterval, Tolerance};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntropyError {
    #[error("distribution has no outcomes")]
    Empty,
    #[error("negative probability {p} for outcome {label:?}")]
    NegativeProbability { label: String, p: Rational },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: Rational },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("probability {0} outside (0, 1]")]
    DomainError(Rational),
    #[error("table row {row} has {got} entries, expected {expected}")]
    RaggedTable {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("invalid distribution file: {0}")]
    Format(String),
    #[error("{axis} labels: {labels} given for {entries} table entries")]
    LabelMismatch {
        axis: &'static str,
        labels: usize,
        entries: usize,
    },
}

impl EntropyError {
    pub fn name(&self) -> &'static str {
        match self {
            EntropyError::Empty => "EmptyDistribution",
            EntropyError::NegativeProbability { .. } => "NegativeProbability",
            EntropyError::NotNormalized { .. } => "NotNormalized",
            EntropyError::DuplicateLabel(_) => "DuplicateLabel",
            EntropyError::DomainError(_) => "DomainError",
            EntropyError::RaggedTable { .. } => "RaggedTable",
            EntropyError::LabelMismatch { .. } => "LabelMismatch",
            EntropyError::Format(_) => "FormatError",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub label: String,
    pub p: Rational,
}

/// A finite probability distribution with exact rational weights summing to 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct Distribution {
    outcomes: Vec<Outcome>,
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    outcomes: Vec<Outcome>,
}

impl TryFrom<RawDistribution> for Distribution {
    type Error = EntropyError;

    fn try_from(raw: RawDistribution) -> Result<Self, Self::Error> {
        Distribution::new(raw.outcomes)
    }
}

impl From<Distribution> for RawDistribution {
    fn from(d: Distribution) -> Self {
        RawDistribution {
            outcomes: d.outcomes,
        }
    }
}

impl Distribution {
    pub fn new(outcomes: Vec<Outcome>) -> Result<Self, EntropyError> {
        if outcomes.is_empty() {
            return Err(EntropyError::Empty);
        }
        let mut seen = HashSet::with_capacity(outcomes.len());
        for o in &outcomes {
            if o.p.is_negative() {
                return Err(EntropyError::NegativeProbability {
                    label: o.label.clone(),
                    p: o.p.clone(),
                });
            }
            if !seen.insert(o.label.as_str()) {
                return Err(EntropyError::DuplicateLabel(o.label.clone()));
            }
        }
        let sum: Rational = outcomes.iter().map(|o| &o.p).sum();
        if !sum.is_one() {
            return Err(EntropyError::NotNormalized { sum });
        }
        Ok(Distribution { outcomes })
    }

    /// Labels are `"0"`, `"1"`, ... in order.
    pub fn from_probabilities(
        ps: impl IntoIterator<Item = Rational>,
    ) -> Result<Self, EntropyError> {
        let outcomes = ps
            .into_iter()
            .enumerate()
            .map(|(i, p)| Outcome {
                label: i.to_string(),
                p,
            })
            .collect();
        Self::new(outcomes)
    }

    pub fn uniform(m: usize) -> Result<Self, EntropyError> {
        if m == 0 {
            return Err(EntropyError::Empty);
        }
        let p = Rational::new(1, m as i64).expect("m > 0");
        Self::from_probabilities(std::iter::repeat_n(p, m))
    }

    pub fn from_json(s: &str) -> Result<Self, EntropyError> {
        let raw: RawDistribution =
            serde_json::from_str(s).map_err(|e| EntropyError::Format(e.to_string()))?;
        raw.try_into()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.outcomes.iter().filter(|o| !o.p.is_zero()).count()
    }

    pub fn probabilities(&self) -> impl Iterator<Item = &Rational> {
        self.outcomes.iter().map(|o| &o.p)
    }
}

/// Joint probabilities of a preceding experiment (rows) and a following one
/// (columns).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawJoint", into = "RawJoint")]
pub struct JointDistribution {
    rows: Vec<String>,
    cols: Vec<String>,
    table: Vec<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct RawJoint {
    rows: Vec<String>,
    cols: Vec<String>,
    table: Vec<Vec<Rational>>,
}

impl TryFrom<RawJoint> for JointDistribution {
    type Error = EntropyError;

    fn try_from(raw: RawJoint) -> Result<Self, Self::Error> {
        JointDistribution::new(raw.rows, raw.cols, raw.table)
    }
}

impl From<JointDistribution> for RawJoint {
    fn from(j: JointDistribution) -> Self {
        RawJoint {
            rows: j.rows,
            cols: j.cols,
            table: j.table,
        }
    }
}

fn check_labels(axis: &'static str, labels: &[String], entries: usize) -> Result<(), EntropyError> {
    if labels.len() != entries {
        return Err(EntropyError::LabelMismatch {
            axis,
            labels: labels.len(),
            entries,
        });
    }
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(EntropyError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

impl JointDistribution {
    pub fn new(
        rows: Vec<String>,
        cols: Vec<String>,
        table: Vec<Vec<Rational>>,
    ) -> Result<Self, EntropyError> {
        if table.is_empty() || table[0].is_empty() {
            return Err(EntropyError::Empty);
        }
        let width = table[0].len();
        for (i, row) in table.iter().enumerate() {
            if row.len() != width {
                return Err(EntropyError::RaggedTable {
                    row: i,
                    expected: width,
                    got: row.len(),
                });
            }
        }
        check_labels("row", &rows, table.len())?;
        check_labels("column", &cols, width)?;
        let mut sum = Rational::zero();
        for (i, row) in table.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if p.is_negative() {
                    return Err(EntropyError::NegativeProbability {
                        label: format!("({}, {})", rows[i], cols[j]),
                        p: p.clone(),
                    });
                }
                sum = &sum + p;
            }
        }
        if !sum.is_one() {
            return Err(EntropyError::NotNormalized { sum });
        }
        Ok(JointDistribution { rows, cols, table })
    }

    /// Unlabelled table; rows and columns are numbered from 0.
    pub fn from_table(table: Vec<Vec<Rational>>) -> Result<Self, EntropyError> {
        let rows = (0..table.len()).map(|i| i.to_string()).collect();
        let cols = (0..table.first().map_or(0, Vec::len))
            .map(|i| i.to_string())
            .collect();
        Self::new(rows, cols, table)
    }

    /// Independent experiments: `table[i][j] = a_i * b_j`.
    pub fn product(a: &Distribution, b: &Distribution) -> Self {
        let table = a
            .probabilities()
            .map(|pa| b.probabilities().map(|pb| pa * pb).collect())
            .collect();
        JointDistribution {
            rows: a.outcomes.iter().map(|o| o.label.clone()).collect(),
            cols: b.outcomes.iter().map(|o| o.label.clone()).collect(),
            table,
        }
    }

    /// An experiment paired with itself: the row result fixes the column.
    pub fn diagonal(d: &Distribution) -> Self {
        let n = d.len();
        let table = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            d.outcomes[i].p.clone()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let labels: Vec<String> = d.outcomes.iter().map(|o| o.label.clone()).collect();
        JointDistribution {
            rows: labels.clone(),
            cols: labels,
            table,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, EntropyError> {
        let raw: RawJoint =
            serde_json::from_str(s).map_err(|e| EntropyError::Format(e.to_string()))?;
        raw.try_into()
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn table(&self) -> &[Vec<Rational>] {
        &self.table
    }

    fn row_sums(&self) -> Vec<Rational> {
        self.table.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn row_marginal(&self) -> Distribution {
        let outcomes = self
            .rows
            .iter()
            .zip(self.row_sums())
            .map(|(label, p)| Outcome {
                label: label.clone(),
                p,
            })
            .collect();
        Distribution { outcomes }
    }

    pub fn col_marginal(&self) -> Distribution {
        let outcomes = self
            .cols
            .iter()
            .enumerate()
            .map(|(j, label)| Outcome {
                label: label.clone(),
                p: self.table.iter().map(|row| &row[j]).sum(),
            })
            .collect();
        Distribution { outcomes }
    }
}

/// Certified `-p log2 p` for `0 < p <= 1`.
pub fn surprisal_term(p: &Rational, tol: &Tolerance) -> Result<CertifiedReal, EntropyError> {
    if !p.is_positive() || p > &Rational::one() {
        return Err(EntropyError::DomainError(p.clone()));
    }
    Ok(tol.refine(|bits| CertifiedReal::from_fixed(&surprisal_fixed(p, bits))))
}

/// `sum count * (-p log2 p)` over positive `p`.
pub(crate) fn grouped_entropy_fixed(groups: &[(Rational, BigInt)], bits: u32) -> FixedInterval {
    let mut acc = FixedInterval::zero(bits);
    for (p, count) in groups {
        acc.add_assign(&surprisal_fixed(p, bits).scale_int(count));
    }
    acc
}

fn group_probabilities<'a>(ps: impl Iterator<Item = &'a Rational>) -> Vec<(Rational, BigInt)> {
    let mut counts: HashMap<&Rational, u64> = HashMap::new();
    for p in ps.filter(|p| !p.is_zero()) {
        *counts.entry(p).or_default() += 1;
    }
    let mut groups: Vec<_> = counts
        .into_iter()
        .map(|(p, c)| (p.clone(), BigInt::from(c)))
        .collect();
    groups.sort();
    groups
}

/// Certified Shannon entropy in bits.
pub fn entropy(d: &Distribution, tol: &Tolerance) -> CertifiedReal {
    let groups = group_probabilities(d.probabilities());
    tol.refine(|bits| CertifiedReal::from_fixed(&grouped_entropy_fixed(&groups, bits)))
}

/// Certified entropy of the column experiment given the row experiment:
/// `sum_ij -p_ij log2(p_ij / p_i)`.
pub fn conditional_entropy(j: &JointDistribution, tol: &Tolerance) -> CertifiedReal {
    let mut terms: HashMap<(Rational, Rational), u64> = HashMap::new();
    for (row, row_sum) in j.table.iter().zip(j.row_sums()) {
        for p in row.iter().filter(|p| !p.is_zero()) {
            let cond = p
                .checked_div(&row_sum)
                .expect("row containing p > 0 has positive sum");
            *terms.entry((p.clone(), cond)).or_default() += 1;
        }
    }
    let terms: Vec<_> = terms.into_iter().collect();
    tol.refine(|bits| {
        let mut acc = FixedInterval::zero(bits);
        for ((p, cond), count) in &terms {
            let t = log2_fixed(cond, bits)
                .neg()
                .scale(p)
                .scale_int(&BigInt::from(*count));
            acc.add_assign(&t);
        }
        CertifiedReal::from_fixed(&acc)
    })
}

/// Certified information the row experiment carries about the column
/// experiment, `H(cols) - H(cols | rows)`, clamped at zero.
pub fn information(j: &JointDistribution, tol: &Tolerance) -> CertifiedReal {
    let half = tol.scaled(&Rational::new(1, 2).expect("nonzero"));
    let h = entropy(&j.col_marginal(), &half);
    let hc = conditional_entropy(j, &half);
    h.sub(&hc).clamp_nonnegative()
}
