//! Grouping of interaction patterns that are expressed by exactly the same
//! training cases. Each group's coefficients enter the likelihood only
//! through their sum, so one compressed parameter per group and class is
//! all the sampler needs.

mod classification;
mod sequence;

use std::fmt;

pub use classification::{
    cls_match_test_case, entropy_of_feature, group_classification, merge_by_expression,
    ClassGroup, ClassSuperpattern, GroupingCls,
};
pub use sequence::{
    count_compressed_vs_original, group_sequence, seq_match_test_case, CompressionCount,
    GroupingSeq, SequenceSuperpattern,
};

use crate::data::Dataset;
use crate::prior::OrderCounts;

/// Sorted, 0-based indices of the training cases expressing a pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expression(Vec<usize>);

impl Expression {
    pub fn new(mut cases: Vec<usize>) -> Self {
        cases.sort_unstable();
        cases.dedup();
        Expression(cases)
    }

    pub(crate) fn from_sorted(cases: Vec<usize>) -> Self {
        debug_assert!(cases.windows(2).all(|w| w[0] < w[1]));
        Expression(cases)
    }

    pub fn all(n: usize) -> Self {
        Expression((0..n).collect())
    }

    pub fn cases(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, case: usize) -> bool {
        self.0.binary_search(&case).is_ok()
    }
}

/// Shown 1-based, as case numbers in a data file.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &i in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{}", i + 1)?;
            first = false;
        }
        Ok(())
    }
}

/// How a test case's own patterns fall into the training groups.
#[derive(Clone, Debug, PartialEq)]
pub struct TestMatch {
    /// Groups with at least one pattern expressed by the test case, with the
    /// per-order counts of those patterns.
    pub matched: Vec<(usize, OrderCounts)>,
    /// Per-order counts of the test case's patterns expressed by no training
    /// case.
    pub unseen: OrderCounts,
}

/// Grouping of either model kind.
#[derive(Clone, Debug)]
pub enum Grouping {
    Sequence(GroupingSeq),
    Classification(GroupingCls),
}

impl Grouping {
    pub fn build(data: &Dataset) -> Self {
        match data {
            Dataset::Sequence(d) => Grouping::Sequence(group_sequence(d)),
            Dataset::Classification(d) => Grouping::Classification(group_classification(d)),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Grouping::Sequence(g) => g.order(),
            Grouping::Classification(g) => g.order(),
        }
    }

    pub fn n_groups(&self) -> usize {
        match self {
            Grouping::Sequence(g) => g.n_groups(),
            Grouping::Classification(g) => g.n_groups(),
        }
    }

    pub fn expression(&self, group: usize) -> &Expression {
        match self {
            Grouping::Sequence(g) => &g.expressions()[group],
            Grouping::Classification(g) => &g.groups()[group].expression,
        }
    }

    pub fn counts(&self, group: usize) -> &OrderCounts {
        match self {
            Grouping::Sequence(g) => g.counts(group),
            Grouping::Classification(g) => &g.groups()[group].counts,
        }
    }

    /// Number of distinct patterns expressed by at least one training case.
    pub fn n_original(&self) -> u64 {
        (0..self.n_groups()).map(|g| self.counts(g).total()).sum()
    }

    pub fn match_test(&self, x: &[u32]) -> TestMatch {
        match self {
            Grouping::Sequence(g) => g.match_test(x),
            Grouping::Classification(g) => g.match_test(x),
        }
    }

    /// Plain-text report: one line per group, then summary counts.
    pub fn report(&self) -> String {
        let body = match self {
            Grouping::Sequence(g) => g.report_lines(),
            Grouping::Classification(g) => g.report_lines(),
        };
        let original = self.n_original();
        let compressed = self.n_groups();
        format!(
            "{body}# groups {compressed}\n# original {original}\n# ratio {}\n",
            compressed as f64 / original as f64
        )
    }
}
