//! Posterior-predictive class probabilities and evaluation metrics.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::grouping::{Grouping, TestMatch};
use crate::math::softmax_in_place;
use crate::mcmc::{active_classes, ChainSample};
use crate::prior::{compressed_width, sample_stable, Family};
use crate::split::{split_sample, SplitQuery};

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionRecord {
    /// 1-based test case number.
    pub id: usize,
    pub probs: Vec<f64>,
    /// 1-based class with the largest probability (first on ties).
    pub predicted: u32,
    pub truth: Option<u32>,
}

fn argmax(probs: &[f64]) -> u32 {
    let mut best = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = k;
        }
    }
    best as u32 + 1
}

/// Predictive probabilities for one test case whose pattern memberships
/// are `matched`. For every chain sample and class, fully matched groups
/// contribute their compressed value, partially matched ones a fresh split
/// draw, and patterns never seen in training one pooled prior draw.
pub fn predict_case<R: Rng + ?Sized>(
    matched: &TestMatch,
    grouping: &Grouping,
    chain: &[ChainSample],
    family: Family,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let first = chain.first().ok_or(Error::EmptyChain)?;
    let k = first.state.n_classes();
    let mut avg = vec![0.0; k];
    let mut scores = vec![0.0; k];
    for sample in chain {
        let st = &sample.state;
        let sigma = &st.sigma;
        // widths depend only on the sample, not the class
        let parts: Vec<(usize, Option<(f64, f64)>)> = matched
            .matched
            .iter()
            .map(|(g, counts)| {
                let total = grouping.counts(*g);
                if counts == total {
                    (*g, None)
                } else {
                    let rest = total.minus(counts);
                    (
                        *g,
                        Some((
                            compressed_width(counts, sigma, family),
                            compressed_width(&rest, sigma, family),
                        )),
                    )
                }
            })
            .collect();
        let unseen_width = if matched.unseen.is_empty() {
            0.0
        } else {
            compressed_width(&matched.unseen, sigma, family)
        };
        scores.iter_mut().for_each(|v| *v = 0.0);
        for class in active_classes(k) {
            let mut l = 0.0;
            for &(g, widths) in &parts {
                let s = st.s(g, class);
                l += match widths {
                    None => s,
                    Some((w1, w2)) => split_sample(&SplitQuery::new(s, w1, w2, family)?, rng)?,
                };
            }
            if unseen_width > 0.0 {
                l += sample_stable(unseen_width, family, rng);
            }
            scores[class] = l;
        }
        softmax_in_place(&mut scores);
        for (a, p) in avg.iter_mut().zip(&scores) {
            *a += p;
        }
    }
    let n = chain.len() as f64;
    avg.iter_mut().for_each(|a| *a /= n);
    if k == 2 {
        avg[0] = 1.0 - avg[1];
    }
    Ok(avg)
}

/// Predictions for every case of `test`. Case `i` draws from its own
/// random stream, so results do not depend on the number of threads.
pub fn predict_all(
    grouping: &Grouping,
    chain: &[ChainSample],
    family: Family,
    test: &Dataset,
    seed: u64,
    parallel: bool,
) -> Result<Vec<PredictionRecord>> {
    if chain.is_empty() {
        return Err(Error::EmptyChain);
    }
    let one = |i: usize| -> Result<PredictionRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let m = grouping.match_test(test.predictors(i));
        let probs = predict_case(&m, grouping, chain, family, &mut rng)?;
        Ok(PredictionRecord {
            id: i + 1,
            predicted: argmax(&probs),
            probs,
            truth: Some(test.response(i)),
        })
    };
    if parallel {
        (0..test.n_cases()).into_par_iter().map(one).collect()
    } else {
        (0..test.n_cases()).map(one).collect()
    }
}

/// Fraction of cases whose predicted class differs from the truth.
pub fn error_rate(records: &[PredictionRecord], truths: &[u32]) -> f64 {
    let wrong = records
        .iter()
        .zip(truths)
        .filter(|(r, &t)| r.predicted != t)
        .count();
    wrong as f64 / records.len() as f64
}

/// Average minus log probability of the true class; `+inf` when some true
/// class was given probability zero.
pub fn amlp(records: &[PredictionRecord], truths: &[u32]) -> f64 {
    let total: f64 = records
        .iter()
        .zip(truths)
        .map(|(r, &t)| -r.probs[t as usize - 1].ln())
        .sum();
    total / records.len() as f64
}

/// Sample autocorrelations at lags `0..=max_lag`.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n <= max_lag {
        return Err(Error::Numerical(format!(
            "series of length {n} is too short for lag {max_lag}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let var: f64 = dev.iter().map(|d| d * d).sum();
    if var == 0.0 {
        return Err(Error::Numerical("autocorrelation of a constant series is undefined".into()));
    }
    Ok((0..=max_lag)
        .map(|lag| dev[..n - lag].iter().zip(&dev[lag..]).map(|(a, b)| a * b).sum::<f64>() / var)
        .collect())
}

/// Tabular prediction output followed by a metrics block.
pub fn format_predictions(records: &[PredictionRecord]) -> String {
    let mut out = String::new();
    let k = records.first().map_or(0, |r| r.probs.len());
    let cols: Vec<String> = (1..=k).map(|c| format!("p_{c}")).collect();
    let _ = writeln!(out, "# id {} predicted truth", cols.join(" "));
    for r in records {
        let probs: Vec<String> = r.probs.iter().map(f64::to_string).collect();
        let truth = r.truth.map_or_else(|| "-".to_string(), |t| t.to_string());
        let _ = writeln!(out, "{} {} {} {}", r.id, probs.join(" "), r.predicted, truth);
    }
    let truths: Option<Vec<u32>> = records.iter().map(|r| r.truth).collect();
    let _ = writeln!(out, "# cases {}", records.len());
    if let Some(t) = truths.filter(|t| !t.is_empty()) {
        let _ = writeln!(out, "# error_rate {}", error_rate(records, &t));
        let _ = writeln!(out, "# amlp {}", amlp(records, &t));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(probs: &[f64]) -> PredictionRecord {
        PredictionRecord {
            id: 1,
            probs: probs.to_vec(),
            predicted: argmax(probs),
            truth: None,
        }
    }

    #[test]
    fn one_hot_is_perfect() {
        let r = vec![rec(&[1.0, 0.0]), rec(&[0.0, 1.0])];
        assert_eq!(error_rate(&r, &[1, 2]), 0.0);
        assert_eq!(amlp(&r, &[1, 2]), 0.0);
    }

    #[test]
    fn uniform_three_classes() {
        let r = vec![rec(&[1.0 / 3.0; 3])];
        assert!((amlp(&r, &[2]) - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn mixed_hand_example() {
        let r = vec![rec(&[0.8, 0.2]), rec(&[0.4, 0.6])];
        assert_eq!(error_rate(&r, &[1, 1]), 0.5);
        let want = -(0.8f64.ln() + 0.4f64.ln()) / 2.0;
        assert!((amlp(&r, &[1, 1]) - want).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_truth_is_infinite() {
        let r = vec![rec(&[1.0, 0.0])];
        assert_eq!(amlp(&r, &[2]), f64::INFINITY);
    }

    #[test]
    fn acf_basics() {
        let s: Vec<f64> = (0..50).map(|i| ((i * 7919) % 13) as f64).collect();
        let acf = autocorrelation(&s, 5).unwrap();
        assert_eq!(acf[0], 1.0);
        assert!(autocorrelation(&[2.0; 10], 3).is_err());
        assert!(autocorrelation(&s[..3], 3).is_err());
    }

    #[test]
    fn empty_chain_is_an_error() {
        let tm = TestMatch {
            matched: vec![],
            unseen: crate::prior::OrderCounts::zeros(1),
        };
        let d = crate::data::SequenceDataset::new(vec![2], 2, &[vec![1, 2]]).unwrap();
        let g = Grouping::build(&Dataset::Sequence(d));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            predict_case(&tm, &g, &[], Family::Cauchy, &mut rng),
            Err(Error::EmptyChain)
        ));
    }
}
