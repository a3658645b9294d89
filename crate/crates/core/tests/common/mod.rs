//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::PI;

use hicomp::data::{ClassificationDataset, Dataset, SequenceDataset};
use hicomp::grouping::Grouping;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pattern with 0 for free slots.
pub type Pattern = Vec<u32>;

/// Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Asymptotic p-value of the one-sample KS statistic.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    ks_pvalue(ks_statistic(samples, cdf), samples.len())
}

/// Two-sample KS p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    let ne = (x.len() * y.len()) as f64 / (x.len() + y.len()) as f64;
    ks_pvalue(d, ne.round() as usize)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7, 15) quadrature on a finite interval:
/// the interval with the largest error estimate is bisected until the total
/// estimate drops below `tol` or 4000 intervals are in use.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut parts = vec![{
        let (v, e) = gk15(f, a, b);
        (a, b, v, e)
    }];
    while parts.len() < 4000 {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        let total: f64 = parts.iter().map(|p| p.2).sum();
        if total_err <= tol.max(1e-15 * total.abs()) {
            break;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(i);
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        let (v1, e1) = gk15(f, lo, m);
        let (v2, e2) = gk15(f, m, hi);
        parts.push((lo, m, v1, e1));
        parts.push((m, hi, v2, e2));
    }
    parts.iter().map(|p| p.2).sum()
}

/// `int_{-inf}^{x} pdf` via `u = scale * tan(theta)`.
pub fn integrate_to(pdf: &dyn Fn(f64) -> f64, x: f64, scale: f64) -> f64 {
    let g = |t: f64| {
        let tt = t.tan();
        let v = scale * tt;
        if v.is_finite() {
            pdf(v) * scale * (1.0 + tt * tt)
        } else {
            0.0
        }
    };
    integrate(&g, -PI / 2.0, (x / scale).atan(), 1e-13)
}

/// Density of `a | a + b = s` for independent Cauchy `a`, `b`, normalized
/// numerically.
pub fn split_density_unnormalized(x: f64, s: f64, a: f64, b: f64) -> f64 {
    1.0 / ((a * a + x * x) * (b * b + (x - s) * (x - s)))
}

pub fn cauchy_cdf(x: f64, width: f64) -> f64 {
    0.5 + (x / width).atan() / PI
}

pub fn normal_cdf(x: f64, sd: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / (sd * std::f64::consts::SQRT_2))
}

/// All suffix patterns of a history: position `t` and beyond fixed.
pub fn sequence_patterns_of(history: &[u32]) -> Vec<Pattern> {
    let o = history.len();
    (0..=o)
        .map(|t| {
            let mut p = vec![0; o];
            p[t..].copy_from_slice(&history[t..]);
            p
        })
        .collect()
}

/// All patterns of order at most `order` expressed by a feature vector.
pub fn classification_patterns_of(x: &[u32], order: usize) -> Vec<Pattern> {
    let p = x.len();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << p) {
        if mask.count_ones() as usize > order {
            continue;
        }
        out.push((0..p).map(|t| if mask & (1 << t) != 0 { x[t] } else { 0 }).collect());
    }
    out
}

pub fn patterns_of(data: &Dataset, case: usize) -> Vec<Pattern> {
    match data {
        Dataset::Sequence(d) => sequence_patterns_of(d.history(case)),
        Dataset::Classification(d) => classification_patterns_of(d.features(case), d.order()),
    }
}

pub fn pattern_order(p: &Pattern) -> usize {
    p.iter().filter(|&&v| v != 0).count()
}

/// Brute force: every pattern expressed by some case, bucketed by the
/// exact set of cases expressing it.
pub fn brute_force_groups(data: &Dataset) -> BTreeMap<Vec<usize>, BTreeSet<Pattern>> {
    let mut expr: HashMap<Pattern, Vec<usize>> = HashMap::new();
    for i in 0..data.n_cases() {
        for p in patterns_of(data, i) {
            expr.entry(p).or_default().push(i);
        }
    }
    let mut out: BTreeMap<Vec<usize>, BTreeSet<Pattern>> = BTreeMap::new();
    for (p, cases) in expr {
        out.entry(cases).or_default().insert(p);
    }
    out
}

/// The patterns the library assigns to each of its groups.
pub fn library_group_patterns(grouping: &Grouping) -> Vec<Vec<Pattern>> {
    match grouping {
        Grouping::Sequence(g) => g.superpatterns().iter().map(|sp| sp.patterns()).collect(),
        Grouping::Classification(g) => g
            .groups()
            .iter()
            .map(|gr| gr.members.iter().flat_map(|m| m.patterns()).collect())
            .collect(),
    }
}

pub fn library_groups(grouping: &Grouping) -> BTreeMap<Vec<usize>, BTreeSet<Pattern>> {
    let mut out: BTreeMap<Vec<usize>, BTreeSet<Pattern>> = BTreeMap::new();
    for (g, pats) in library_group_patterns(grouping).into_iter().enumerate() {
        let e = grouping.expression(g).cases().to_vec();
        let entry = out.entry(e).or_default();
        for p in pats {
            assert!(entry.insert(p), "pattern listed twice in one group");
        }
    }
    assert_eq!(out.len(), grouping.n_groups(), "two groups share an expression");
    out
}

/// A small random dataset of either kind.
pub fn random_tiny_dataset(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=6);
    let k = rng.random_range(2..=3u32);
    if rng.random_bool(0.5) {
        let o = rng.random_range(1..=4);
        let sizes: Vec<u32> = (0..o).map(|_| rng.random_range(2..=3)).collect();
        let cases: Vec<Vec<u32>> = (0..n)
            .map(|_| {
                let mut r: Vec<u32> = sizes.iter().map(|&s| rng.random_range(1..=s)).collect();
                r.push(rng.random_range(1..=k));
                r
            })
            .collect();
        Dataset::Sequence(SequenceDataset::new(sizes, k, &cases).unwrap())
    } else {
        let p = rng.random_range(1..=4);
        let o = rng.random_range(0..=p);
        let sizes: Vec<u32> = (0..p).map(|_| rng.random_range(2..=3)).collect();
        let cases: Vec<Vec<u32>> = (0..n)
            .map(|_| {
                let mut r: Vec<u32> = sizes.iter().map(|&s| rng.random_range(1..=s)).collect();
                r.push(rng.random_range(1..=k));
                r
            })
            .collect();
        Dataset::Classification(ClassificationDataset::new(sizes, k, &cases, o).unwrap())
    }
}

/// Log-likelihood evaluated pattern by pattern, with one coefficient per
/// pattern and class.
pub fn uncompressed_log_likelihood(data: &Dataset, beta: &HashMap<Pattern, Vec<f64>>) -> f64 {
    let k = data.n_classes() as usize;
    let mut total = 0.0;
    for i in 0..data.n_cases() {
        let mut l = vec![0.0; k];
        for p in patterns_of(data, i) {
            for (c, b) in beta[&p].iter().enumerate() {
                l[c] += b;
            }
        }
        let max = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + l.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += l[data.response(i) as usize - 1] - lse;
    }
    total
}
