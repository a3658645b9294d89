use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Expression, TestMatch};
use crate::data::ClassificationDataset;
use crate::math::binomial;
use crate::prior::OrderCounts;

/// A set of classification patterns written `[A / I]`: slots with
/// `fixed[t]` take value `values[t]` (0 meaning the feature is ignored),
/// free slots take either 0 or `values[t]`. Only patterns of order at most
/// `order_cap` are included.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClassSuperpattern {
    pub values: Vec<u32>,
    pub fixed: Vec<bool>,
    pub order_cap: usize,
}

impl ClassSuperpattern {
    pub fn n_features(&self) -> usize {
        self.values.len()
    }

    /// Number of fixed slots (`f`).
    pub fn n_fixed(&self) -> usize {
        self.fixed.iter().filter(|&&b| b).count()
    }

    /// Order of the smallest contained pattern (`o`).
    pub fn min_order(&self) -> usize {
        self.fixed
            .iter()
            .zip(&self.values)
            .filter(|(&f, &a)| f && a != 0)
            .count()
    }

    /// `C(p - f, d)` patterns of order `o + d` for `d <= min(O - o, p - f)`.
    pub fn counts(&self) -> OrderCounts {
        let mut c = OrderCounts::zeros(self.order_cap);
        let o = self.min_order();
        if o > self.order_cap {
            return c;
        }
        let free = (self.n_features() - self.n_fixed()) as u64;
        let top = (self.order_cap - o).min(free as usize);
        for d in 0..=top {
            c.add_at(o + d, binomial(free, d as u64));
        }
        c
    }

    /// Explicit list of contained patterns (0 = ignored feature).
    pub fn patterns(&self) -> Vec<Vec<u32>> {
        let free: Vec<usize> = (0..self.n_features()).filter(|&t| !self.fixed[t]).collect();
        let base: Vec<u32> = self
            .values
            .iter()
            .zip(&self.fixed)
            .map(|(&a, &f)| if f { a } else { 0 })
            .collect();
        let o = self.min_order();
        let mut out = Vec::new();
        if o > self.order_cap {
            return out;
        }
        for mask in 0u64..(1u64 << free.len()) {
            if o + mask.count_ones() as usize > self.order_cap {
                continue;
            }
            let mut p = base.clone();
            for (j, &t) in free.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    p[t] = self.values[t];
                }
            }
            out.push(p);
        }
        out
    }

    pub fn contains(&self, pattern: &[u32]) -> bool {
        let order = pattern.iter().filter(|&&v| v != 0).count();
        order <= self.order_cap
            && pattern.iter().enumerate().all(|(t, &v)| {
                if self.fixed[t] {
                    v == self.values[t]
                } else {
                    v == 0 || v == self.values[t]
                }
            })
    }

    fn format_values(&self) -> String {
        let v: Vec<String> = self.values.iter().map(u32::to_string).collect();
        v.join(",")
    }

    fn format_fixed(&self) -> String {
        self.fixed.iter().map(|&f| if f { '1' } else { '0' }).collect()
    }
}

/// Part of `sp` expressed by the feature vector `x`, or `None` when some
/// fixed slot conflicts with `x`. Free slots disagreeing with `x` are fixed
/// at 0.
pub fn cls_match_test_case(sp: &ClassSuperpattern, x: &[u32]) -> Option<ClassSuperpattern> {
    let mut out = sp.clone();
    for t in 0..sp.n_features() {
        let a = sp.values[t];
        if sp.fixed[t] {
            if a != 0 && a != x[t] {
                return None;
            }
        } else if a != x[t] {
            out.fixed[t] = true;
            out.values[t] = 0;
        }
    }
    Some(out)
}

/// Natural-log entropy of the values of feature `t` over the given cases.
pub fn entropy_of_feature(cases: &[usize], t: usize, data: &ClassificationDataset) -> f64 {
    let k = data.feature_sizes()[t] as usize;
    let mut freq = vec![0usize; k + 1];
    for &i in cases {
        freq[data.feature(i, t) as usize] += 1;
    }
    let n = cases.len() as f64;
    -freq
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// All superpatterns sharing one expression.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassGroup {
    pub expression: Expression,
    pub members: Vec<ClassSuperpattern>,
    pub counts: OrderCounts,
}

#[derive(Clone, Debug)]
pub struct GroupingCls {
    order: usize,
    n_features: usize,
    groups: Vec<ClassGroup>,
}

impl GroupingCls {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[ClassGroup] {
        &self.groups
    }

    pub fn match_test(&self, x: &[u32]) -> TestMatch {
        let p = self.n_features as u64;
        let mut unseen = OrderCounts::from_vec(
            (0..=self.order as u64).map(|o| binomial(p, o)).collect(),
        );
        let mut matched = Vec::new();
        for (g, group) in self.groups.iter().enumerate() {
            let mut c = OrderCounts::zeros(self.order);
            for sp in &group.members {
                if let Some(sub) = cls_match_test_case(sp, x) {
                    c.add(&sub.counts());
                }
            }
            if !c.is_empty() {
                unseen = unseen.minus(&c);
                matched.push((g, c));
            }
        }
        TestMatch { matched, unseen }
    }

    pub(super) fn report_lines(&self) -> String {
        let mut out = String::from("# g A I f o counts size expression\n");
        for (g, group) in self.groups.iter().enumerate() {
            for sp in &group.members {
                let counts: Vec<String> = sp.counts().as_slice().iter().map(u64::to_string).collect();
                let _ = writeln!(
                    out,
                    "{} {} {} {} {} {} {} {}",
                    g + 1,
                    sp.format_values(),
                    sp.format_fixed(),
                    sp.n_fixed(),
                    sp.min_order(),
                    counts.join(","),
                    group.expression.len(),
                    group.expression
                );
            }
        }
        out
    }
}

/// Combines entries with identical expressions, keeping first-seen order.
pub fn merge_by_expression(entries: Vec<(Expression, ClassSuperpattern)>, order: usize) -> Vec<ClassGroup> {
    let mut index: HashMap<Expression, usize> = HashMap::new();
    let mut groups: Vec<ClassGroup> = Vec::new();
    for (expression, sp) in entries {
        let counts = sp.counts();
        match index.get(&expression) {
            Some(&g) => {
                groups[g].counts.add(&counts);
                groups[g].members.push(sp);
            }
            None => {
                index.insert(expression.clone(), groups.len());
                let mut total = OrderCounts::zeros(order);
                total.add(&counts);
                groups.push(ClassGroup {
                    expression,
                    members: vec![sp],
                    counts: total,
                });
            }
        }
    }
    groups
}

struct Diverge<'a> {
    data: &'a ClassificationDataset,
    order: usize,
    out: Vec<(Expression, ClassSuperpattern)>,
}

impl Diverge<'_> {
    fn run(&mut self, cases: Vec<usize>, pattern: Vec<u32>, order: usize, remaining: Vec<usize>) {
        let first = cases[0];
        let constant = remaining.iter().all(|&t| {
            let v = self.data.feature(first, t);
            cases.iter().all(|&i| self.data.feature(i, t) == v)
        });
        if order == self.order || constant {
            let mut values = pattern;
            let mut fixed = vec![true; values.len()];
            if order < self.order {
                for &t in &remaining {
                    values[t] = self.data.feature(first, t);
                    fixed[t] = false;
                }
            }
            self.out.push((
                Expression::from_sorted(cases),
                ClassSuperpattern {
                    values,
                    fixed,
                    order_cap: self.order,
                },
            ));
            return;
        }

        let mut best = remaining[0];
        let mut best_entropy = f64::NEG_INFINITY;
        for &t in &remaining {
            let h = entropy_of_feature(&cases, t, self.data);
            if h > best_entropy {
                best = t;
                best_entropy = h;
            }
        }
        let rest: Vec<usize> = remaining.iter().copied().filter(|&t| t != best).collect();

        let k = self.data.feature_sizes()[best] as usize;
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
        for &i in &cases {
            buckets[self.data.feature(i, best) as usize].push(i);
        }
        debug_assert_eq!(buckets.iter().map(Vec::len).sum::<usize>(), cases.len());

        self.run(cases, pattern.clone(), order, rest.clone());
        for (v, sub) in buckets.into_iter().enumerate() {
            if sub.is_empty() {
                continue;
            }
            let mut child = pattern.clone();
            child[best] = v as u32;
            self.run(sub, child, order + 1, rest.clone());
        }
    }
}

/// Groups all patterns of order `0..=O` expressed by the training cases,
/// splitting on the most diverse remaining feature first.
pub fn group_classification(data: &ClassificationDataset) -> GroupingCls {
    let p = data.n_features();
    let mut d = Diverge {
        data,
        order: data.order(),
        out: Vec::new(),
    };
    d.run((0..data.n_cases()).collect(), vec![0; p], 0, (0..p).collect());
    let groups = merge_by_expression(d.out, data.order());
    GroupingCls {
        order: data.order(),
        n_features: p,
        groups,
    }
}
