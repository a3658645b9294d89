use std::fmt::Write as _;

use super::{Expression, TestMatch};
use crate::data::SequenceDataset;
use crate::error::Result;
use crate::prior::OrderCounts;

/// A run of nested suffix patterns sharing one expression.
///
/// With history length `O`, the suffix pattern starting at position `t`
/// (0-based) fixes `x_t..x_{O-1}` and has order `O - t`; `t = O` is the
/// intercept. A superpattern holds the patterns starting at every
/// `t in start..=stop`, all of which agree with `values` on their fixed
/// positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SequenceSuperpattern {
    /// Length `O`; entries before `start` are 0.
    pub values: Vec<u32>,
    pub start: usize,
    pub stop: usize,
}

impl SequenceSuperpattern {
    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn n_patterns(&self) -> usize {
        self.stop - self.start + 1
    }

    pub fn counts(&self) -> OrderCounts {
        let o = self.order();
        let mut c = OrderCounts::zeros(o);
        for t in self.start..=self.stop {
            c.add_at(o - t, 1);
        }
        c
    }

    /// Contained patterns, each as a length-`O` vector with 0 for free
    /// positions.
    pub fn patterns(&self) -> Vec<Vec<u32>> {
        (self.start..=self.stop)
            .map(|t| {
                let mut p = vec![0; self.order()];
                p[t..].copy_from_slice(&self.values[t..]);
                p
            })
            .collect()
    }
}

/// Part of `sp` expressed by the history `x`, or `None` when no pattern of
/// `sp` occurs in `x`. The intercept pattern always matches.
pub fn seq_match_test_case(sp: &SequenceSuperpattern, x: &[u32]) -> Option<SequenceSuperpattern> {
    let o = sp.order();
    if x[sp.stop..o] != sp.values[sp.stop..o] {
        return None;
    }
    let mut t = sp.stop;
    while t > sp.start && x[t - 1] == sp.values[t - 1] {
        t -= 1;
    }
    let mut values = sp.values.clone();
    values[..t].iter_mut().for_each(|v| *v = 0);
    Some(SequenceSuperpattern {
        values,
        start: t,
        stop: sp.stop,
    })
}

/// Parallel lists of expressions and superpatterns.
#[derive(Clone, Debug)]
pub struct GroupingSeq {
    order: usize,
    expressions: Vec<Expression>,
    superpatterns: Vec<SequenceSuperpattern>,
    counts: Vec<OrderCounts>,
}

impl GroupingSeq {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_groups(&self) -> usize {
        self.expressions.len()
    }

    pub fn expressions(&self) -> &[Expression] {
        &self.expressions
    }

    pub fn superpatterns(&self) -> &[SequenceSuperpattern] {
        &self.superpatterns
    }

    pub fn counts(&self, group: usize) -> &OrderCounts {
        &self.counts[group]
    }

    pub fn n_original(&self) -> usize {
        self.superpatterns.iter().map(SequenceSuperpattern::n_patterns).sum()
    }

    pub fn match_test(&self, x: &[u32]) -> TestMatch {
        let mut matched = Vec::new();
        let mut unseen = OrderCounts::from_vec(vec![1; self.order + 1]);
        for (g, sp) in self.superpatterns.iter().enumerate() {
            if let Some(sub) = seq_match_test_case(sp, x) {
                let c = sub.counts();
                unseen = unseen.minus(&c);
                matched.push((g, c));
            }
        }
        TestMatch { matched, unseen }
    }

    pub(super) fn report_lines(&self) -> String {
        let mut out = String::from("# g values b f size expression\n");
        for (g, (e, sp)) in self.expressions.iter().zip(&self.superpatterns).enumerate() {
            let values: Vec<String> = sp.values[sp.start..].iter().map(u32::to_string).collect();
            let values = if values.is_empty() { "-".to_string() } else { values.join(",") };
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                g + 1,
                values,
                sp.start + 1,
                sp.stop + 1,
                e.len(),
                e
            );
        }
        out
    }
}

struct Diverge<'a> {
    data: &'a SequenceDataset,
    expressions: Vec<Expression>,
    superpatterns: Vec<SequenceSuperpattern>,
}

impl Diverge<'_> {
    /// Extends the superpattern leftwards while the expression does not
    /// split, then emits it and recurses into each nonempty branch in
    /// increasing order of the splitting value.
    fn run(&mut self, cases: Vec<usize>, mut values: Vec<u32>, mut start: usize, stop: usize) {
        loop {
            if start == 0 {
                break;
            }
            let pos = start - 1;
            let k = self.data.history_sizes()[pos] as usize;
            let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
            for &i in &cases {
                buckets[self.data.history(i)[pos] as usize].push(i);
            }
            let nonempty = buckets.iter().filter(|b| !b.is_empty()).count();
            debug_assert_eq!(buckets.iter().map(Vec::len).sum::<usize>(), cases.len());
            if nonempty == 1 {
                values[pos] = self.data.history(cases[0])[pos];
                start = pos;
                continue;
            }
            self.emit(cases, values.clone(), start, stop);
            for (v, sub) in buckets.into_iter().enumerate() {
                if sub.is_empty() {
                    continue;
                }
                let mut child = values.clone();
                child[pos] = v as u32;
                self.run(sub, child, pos, pos);
            }
            return;
        }
        self.emit(cases, values, start, stop);
    }

    fn emit(&mut self, cases: Vec<usize>, values: Vec<u32>, start: usize, stop: usize) {
        self.expressions.push(Expression::from_sorted(cases));
        self.superpatterns.push(SequenceSuperpattern { values, start, stop });
    }
}

/// Groups the suffix patterns of a sequence dataset by expression.
pub fn group_sequence(data: &SequenceDataset) -> GroupingSeq {
    let order = data.order();
    let mut d = Diverge {
        data,
        expressions: Vec::new(),
        superpatterns: Vec::new(),
    };
    d.run((0..data.n_cases()).collect(), vec![0; order], order, order);
    let counts = d.superpatterns.iter().map(SequenceSuperpattern::counts).collect();
    GroupingSeq {
        order,
        expressions: d.expressions,
        superpatterns: d.superpatterns,
        counts,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressionCount {
    pub order: usize,
    pub compressed: usize,
    pub original: usize,
}

impl CompressionCount {
    pub fn ratio(&self) -> f64 {
        self.compressed as f64 / self.original as f64
    }
}

/// Number of compressed and original parameters when the most recent
/// `order` positions of each history are used, for each requested order.
pub fn count_compressed_vs_original(data: &SequenceDataset, orders: &[usize]) -> Result<Vec<CompressionCount>> {
    orders
        .iter()
        .map(|&o| {
            let g = group_sequence(&data.with_order(o)?);
            Ok(CompressionCount {
                order: o,
                compressed: g.n_groups(),
                original: g.n_original(),
            })
        })
        .collect()
}
