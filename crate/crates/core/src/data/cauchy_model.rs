use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution};

use super::ClassificationDataset;
use crate::error::{Error, Result};
use crate::math::softmax_in_place;

#[derive(Clone, Debug, PartialEq)]
pub struct CauchyModelSpec {
    pub n_features: usize,
    pub feature_size: u32,
    pub n_classes: u32,
    /// Highest interaction order carrying nonzero coefficients.
    pub order: usize,
    pub n_cases: usize,
}

/// Coefficients of the generating model. Order-`o` coefficients are drawn
/// from Cauchy(0, 1/o); intercepts are 0. With two classes the first class
/// is the all-zero reference.
#[derive(Clone, Debug)]
pub struct CauchyModelTruth {
    pub n_features: usize,
    pub order: usize,
    pub n_classes: u32,
    /// Pattern (0 = free slot) to one coefficient per class.
    pub coefficients: HashMap<Vec<u32>, Vec<f64>>,
}

impl CauchyModelTruth {
    pub fn linear(&self, x: &[u32], class: usize) -> f64 {
        let p = self.n_features;
        let mut total = 0.0;
        for mask in 1u64..(1u64 << p) {
            if mask.count_ones() as usize > self.order {
                continue;
            }
            let pattern: Vec<u32> = (0..p)
                .map(|t| if mask & (1 << t) != 0 { x[t] } else { 0 })
                .collect();
            if let Some(beta) = self.coefficients.get(&pattern) {
                total += beta[class];
            }
        }
        total
    }

    pub fn class_probs(&self, x: &[u32]) -> Vec<f64> {
        let mut l: Vec<f64> = (0..self.n_classes as usize).map(|k| self.linear(x, k)).collect();
        softmax_in_place(&mut l);
        l
    }
}

/// Visits all patterns with exactly `order` fixed slots, in depth-first order
/// over (position, value).
fn for_each_pattern(p: usize, size: u32, order: usize, mut visit: impl FnMut(Vec<u32>)) {
    fn recurse(
        pattern: &mut Vec<u32>,
        from: usize,
        remaining: usize,
        size: u32,
        visit: &mut dyn FnMut(Vec<u32>),
    ) {
        if remaining == 0 {
            visit(pattern.clone());
            return;
        }
        for t in from..=pattern.len() - remaining {
            for v in 1..=size {
                pattern[t] = v;
                recurse(pattern, t + 1, remaining - 1, size, visit);
            }
            pattern[t] = 0;
        }
    }
    let mut pattern = vec![0; p];
    recurse(&mut pattern, 0, order, size, &mut visit);
}

pub fn cauchy_model_generate(
    spec: &CauchyModelSpec,
    seed: u64,
) -> Result<(ClassificationDataset, CauchyModelTruth)> {
    let p = spec.n_features;
    if p == 0 || spec.order > p {
        return Err(Error::Config(format!(
            "order {} must not exceed the number of features {p}",
            spec.order
        )));
    }
    if spec.feature_size < 2 || spec.n_classes < 2 || spec.n_cases == 0 {
        return Err(Error::Config(
            "need feature size >= 2, classes >= 2 and at least one case".into(),
        ));
    }
    if p >= 64 {
        return Err(Error::Config("at most 63 features supported".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = spec.n_classes as usize;
    let mut coefficients = HashMap::new();
    for o in 1..=spec.order {
        let cauchy = Cauchy::new(0.0, 1.0 / o as f64).expect("positive width");
        for_each_pattern(p, spec.feature_size, o, |pattern| {
            let beta: Vec<f64> = (0..k)
                .map(|class| {
                    if k == 2 && class == 0 {
                        0.0
                    } else {
                        cauchy.sample(&mut rng)
                    }
                })
                .collect();
            coefficients.insert(pattern, beta);
        });
    }
    let truth = CauchyModelTruth {
        n_features: p,
        order: spec.order,
        n_classes: spec.n_classes,
        coefficients,
    };
    let mut cases = Vec::with_capacity(spec.n_cases);
    for _ in 0..spec.n_cases {
        let mut row: Vec<u32> = (0..p).map(|_| rng.random_range(1..=spec.feature_size)).collect();
        let probs = truth.class_probs(&row);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut y = k;
        for (class, &pr) in probs.iter().enumerate() {
            acc += pr;
            if u < acc {
                y = class + 1;
                break;
            }
        }
        row.push(y as u32);
        cases.push(row);
    }
    let data = ClassificationDataset::new(vec![spec.feature_size; p], spec.n_classes, &cases, spec.order)?;
    Ok((data, truth))
}
