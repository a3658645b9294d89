//! Datasets of discrete cases and the synthetic generators used to exercise
//! the models.
//!
//! Values are stored 1-based exactly as they appear in data files. Case
//! indices are 0-based everywhere in the library.

mod cauchy_model;
mod hmm;
mod text;

use std::fmt;
use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cauchy_model::{cauchy_model_generate, CauchyModelSpec, CauchyModelTruth};
pub use hmm::{hmm_generate, HmmSpec};
pub use text::{encode_symbols, encode_text, TEXT_ALPHABET};

use crate::error::{Error, Result};

/// A rectangular table of positive integers with per-column alphabet sizes;
/// the last column is the response.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTable {
    pub sizes: Vec<u32>,
    pub rows: Vec<Vec<i64>>,
}

impl RawTable {
    /// Parses the plain-text dataset format: a `# K: k1 ... kresp` header,
    /// then one case per line. Other `#` lines and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sizes = None;
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(list) = comment.trim_start().strip_prefix("K:") {
                    let parsed = list
                        .split_whitespace()
                        .map(|tok| tok.parse::<u32>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| Error::Parse {
                            line: line_no,
                            message: format!("bad alphabet size: {e}"),
                        })?;
                    sizes = Some(parsed);
                }
                continue;
            }
            let row = trimmed
                .split_whitespace()
                .map(|tok| tok.parse::<i64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad value: {e}"),
                })?;
            rows.push(row);
        }
        let sizes = sizes.ok_or(Error::Parse {
            line: 1,
            message: "missing `# K:` header".into(),
        })?;
        Ok(RawTable { sizes, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Checks shape and ranges, reporting the first offending cell with
    /// 1-based row and column numbers.
    pub fn check(&self) -> Result<()> {
        let width = self.sizes.len();
        if width < 2 {
            return Err(Error::InvalidDataset(
                "need at least one predictor column and a response".into(),
            ));
        }
        if let Some(col) = self.sizes.iter().position(|&k| k < 2) {
            return Err(Error::InvalidDataset(format!(
                "alphabet size of column {} must be at least 2",
                col + 1
            )));
        }
        if self.rows.is_empty() {
            return Err(Error::InvalidDataset("no cases".into()));
        }
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Ragged {
                    row: r + 1,
                    found: row.len(),
                    expected: width,
                });
            }
            for (c, (&v, &k)) in row.iter().zip(&self.sizes).enumerate() {
                if v < 1 || v > i64::from(k) {
                    return Err(Error::OutOfRange {
                        row: r + 1,
                        column: c + 1,
                        value: v,
                        max: k,
                    });
                }
            }
        }
        Ok(())
    }
}

fn format_table(sizes: &[u32], n_cases: usize, row: impl Fn(usize, &mut Vec<u32>)) -> String {
    let mut out = String::new();
    out.push_str("# K:");
    for k in sizes {
        let _ = write!(out, " {k}");
    }
    out.push('\n');
    let mut buf = Vec::with_capacity(sizes.len());
    for i in 0..n_cases {
        buf.clear();
        row(i, &mut buf);
        let line: Vec<String> = buf.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn to_values(raw: &RawTable) -> Vec<Vec<u32>> {
    raw.rows
        .iter()
        .map(|row| row.iter().map(|&v| v as u32).collect())
        .collect()
}

/// Cases of a sequence prediction problem: a history `x_1..x_O` and the next
/// symbol `x_{O+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceDataset {
    order: usize,
    history_sizes: Vec<u32>,
    n_classes: u32,
    histories: Vec<u32>,
    responses: Vec<u32>,
}

impl SequenceDataset {
    pub fn new(
        history_sizes: Vec<u32>,
        n_classes: u32,
        cases: &[Vec<u32>],
    ) -> Result<Self> {
        let mut sizes = history_sizes;
        sizes.push(n_classes);
        let raw = RawTable {
            sizes,
            rows: cases
                .iter()
                .map(|r| r.iter().map(|&v| i64::from(v)).collect())
                .collect(),
        };
        validate_sequence(&raw)
    }

    pub fn n_cases(&self) -> usize {
        self.responses.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_classes(&self) -> u32 {
        self.n_classes
    }

    pub fn history_sizes(&self) -> &[u32] {
        &self.history_sizes
    }

    pub fn history(&self, case: usize) -> &[u32] {
        &self.histories[case * self.order..(case + 1) * self.order]
    }

    pub fn response(&self, case: usize) -> u32 {
        self.responses[case]
    }

    pub fn responses(&self) -> &[u32] {
        &self.responses
    }

    /// Keeps only the `order` most recent history positions.
    pub fn with_order(&self, order: usize) -> Result<Self> {
        if order == 0 || order > self.order {
            return Err(Error::InvalidDataset(format!(
                "order {order} not in 1..={}",
                self.order
            )));
        }
        let skip = self.order - order;
        let histories = (0..self.n_cases())
            .flat_map(|i| self.history(i)[skip..].iter().copied())
            .collect();
        Ok(SequenceDataset {
            order,
            history_sizes: self.history_sizes[skip..].to_vec(),
            n_classes: self.n_classes,
            histories,
            responses: self.responses.clone(),
        })
    }

    pub fn select(&self, rows: Range<usize>) -> Result<Self> {
        if rows.start >= rows.end || rows.end > self.n_cases() {
            return Err(Error::InvalidDataset(format!(
                "row range {}..{} invalid for {} cases",
                rows.start,
                rows.end,
                self.n_cases()
            )));
        }
        Ok(SequenceDataset {
            order: self.order,
            history_sizes: self.history_sizes.clone(),
            n_classes: self.n_classes,
            histories: self.histories[rows.start * self.order..rows.end * self.order].to_vec(),
            responses: self.responses[rows].to_vec(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut sizes = self.history_sizes.clone();
        sizes.push(self.n_classes);
        format_table(&sizes, self.n_cases(), |i, buf| {
            buf.extend_from_slice(self.history(i));
            buf.push(self.response(i));
        })
    }
}

/// Cases of a classification problem with `p` discrete features, modelled
/// with interaction patterns up to `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationDataset {
    n_features: usize,
    order: usize,
    feature_sizes: Vec<u32>,
    n_classes: u32,
    features: Vec<u32>,
    responses: Vec<u32>,
}

impl ClassificationDataset {
    pub fn new(
        feature_sizes: Vec<u32>,
        n_classes: u32,
        cases: &[Vec<u32>],
        order: usize,
    ) -> Result<Self> {
        let mut sizes = feature_sizes;
        sizes.push(n_classes);
        let raw = RawTable {
            sizes,
            rows: cases
                .iter()
                .map(|r| r.iter().map(|&v| i64::from(v)).collect())
                .collect(),
        };
        validate_classification(&raw, order)
    }

    pub fn n_cases(&self) -> usize {
        self.responses.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_classes(&self) -> u32 {
        self.n_classes
    }

    pub fn feature_sizes(&self) -> &[u32] {
        &self.feature_sizes
    }

    pub fn features(&self, case: usize) -> &[u32] {
        &self.features[case * self.n_features..(case + 1) * self.n_features]
    }

    pub fn feature(&self, case: usize, t: usize) -> u32 {
        self.features[case * self.n_features + t]
    }

    pub fn response(&self, case: usize) -> u32 {
        self.responses[case]
    }

    pub fn responses(&self) -> &[u32] {
        &self.responses
    }

    pub fn with_order(&self, order: usize) -> Result<Self> {
        if order > self.n_features {
            return Err(Error::InvalidDataset(format!(
                "order {order} exceeds the number of features {}",
                self.n_features
            )));
        }
        Ok(ClassificationDataset {
            order,
            ..self.clone()
        })
    }

    pub fn select(&self, rows: Range<usize>) -> Result<Self> {
        if rows.start >= rows.end || rows.end > self.n_cases() {
            return Err(Error::InvalidDataset(format!(
                "row range {}..{} invalid for {} cases",
                rows.start,
                rows.end,
                self.n_cases()
            )));
        }
        let p = self.n_features;
        Ok(ClassificationDataset {
            features: self.features[rows.start * p..rows.end * p].to_vec(),
            responses: self.responses[rows].to_vec(),
            ..self.clone()
        })
    }

    pub fn to_text(&self) -> String {
        let mut sizes = self.feature_sizes.clone();
        sizes.push(self.n_classes);
        format_table(&sizes, self.n_cases(), |i, buf| {
            buf.extend_from_slice(self.features(i));
            buf.push(self.response(i));
        })
    }
}

/// Either kind of validated dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dataset {
    Sequence(SequenceDataset),
    Classification(ClassificationDataset),
}

impl Dataset {
    pub fn n_cases(&self) -> usize {
        match self {
            Dataset::Sequence(d) => d.n_cases(),
            Dataset::Classification(d) => d.n_cases(),
        }
    }

    pub fn n_classes(&self) -> u32 {
        match self {
            Dataset::Sequence(d) => d.n_classes(),
            Dataset::Classification(d) => d.n_classes(),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Dataset::Sequence(d) => d.order(),
            Dataset::Classification(d) => d.order(),
        }
    }

    /// Predictor values of one case.
    pub fn predictors(&self, case: usize) -> &[u32] {
        match self {
            Dataset::Sequence(d) => d.history(case),
            Dataset::Classification(d) => d.features(case),
        }
    }

    pub fn response(&self, case: usize) -> u32 {
        match self {
            Dataset::Sequence(d) => d.response(case),
            Dataset::Classification(d) => d.response(case),
        }
    }

    pub fn responses(&self) -> &[u32] {
        match self {
            Dataset::Sequence(d) => d.responses(),
            Dataset::Classification(d) => d.responses(),
        }
    }

    pub fn select(&self, rows: Range<usize>) -> Result<Self> {
        Ok(match self {
            Dataset::Sequence(d) => Dataset::Sequence(d.select(rows)?),
            Dataset::Classification(d) => Dataset::Classification(d.select(rows)?),
        })
    }

    pub fn to_text(&self) -> String {
        match self {
            Dataset::Sequence(d) => d.to_text(),
            Dataset::Classification(d) => d.to_text(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Sequence,
    Classification,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sequence" | "seq" => Ok(ModelKind::Sequence),
            "classification" | "cls" => Ok(ModelKind::Classification),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Sequence => "sequence",
            ModelKind::Classification => "classification",
        })
    }
}

impl Dataset {
    /// Validates `raw` as the given model kind. Sequence histories are
    /// truncated to the most recent `order` positions when an order is
    /// given; classification defaults to the full number of features.
    pub fn from_table(raw: &RawTable, kind: ModelKind, order: Option<usize>) -> Result<Self> {
        match kind {
            ModelKind::Sequence => {
                let d = validate_sequence(raw)?;
                Ok(Dataset::Sequence(match order {
                    Some(o) => d.with_order(o)?,
                    None => d,
                }))
            }
            ModelKind::Classification => {
                let o = order.unwrap_or(raw.sizes.len().saturating_sub(1));
                Ok(Dataset::Classification(validate_classification(raw, o)?))
            }
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Dataset::Sequence(_) => ModelKind::Sequence,
            Dataset::Classification(_) => ModelKind::Classification,
        }
    }
}

/// Validates a raw table as sequence data; the history order is the number
/// of predictor columns.
pub fn validate_sequence(raw: &RawTable) -> Result<SequenceDataset> {
    raw.check()?;
    let order = raw.sizes.len() - 1;
    let rows = to_values(raw);
    Ok(SequenceDataset {
        order,
        history_sizes: raw.sizes[..order].to_vec(),
        n_classes: raw.sizes[order],
        histories: rows.iter().flat_map(|r| r[..order].iter().copied()).collect(),
        responses: rows.iter().map(|r| r[order]).collect(),
    })
}

/// Validates a raw table as classification data with interaction order cap
/// `order` (at most the number of features).
pub fn validate_classification(raw: &RawTable, order: usize) -> Result<ClassificationDataset> {
    raw.check()?;
    let p = raw.sizes.len() - 1;
    if order > p {
        return Err(Error::InvalidDataset(format!(
            "order {order} exceeds the number of features {p}"
        )));
    }
    let rows = to_values(raw);
    Ok(ClassificationDataset {
        n_features: p,
        order,
        feature_sizes: raw.sizes[..p].to_vec(),
        n_classes: raw.sizes[p],
        features: rows.iter().flat_map(|r| r[..p].iter().copied()).collect(),
        responses: rows.iter().map(|r| r[p]).collect(),
    })
}
