//! Prior hierarchy for the regression coefficients.
//!
//! Every coefficient of an order-`o` pattern is a symmetric stable variable
//! (Gaussian or Cauchy) centred at zero with width `sigma[o]`. For `o >= 1`
//! the width itself has an Inverse-Gamma prior whose mode is `w_o`; `sigma[0]`
//! is fixed. Because sums of independent symmetric stable variables stay in
//! the same family, a compressed parameter (the sum of all coefficients in a
//! group) has a closed-form prior whose width depends only on how many of the
//! group's patterns fall in each order.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{checked_gamma_ur, ln_gamma};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Cauchy,
}

impl Family {
    /// Only the closed-form members of the symmetric stable family are
    /// supported: index 2 (Gaussian) and index 1 (Cauchy).
    pub fn from_stable_index(index: u32) -> Result<Self> {
        match index {
            1 => Ok(Family::Cauchy),
            2 => Ok(Family::Gaussian),
            other => Err(Error::Config(format!(
                "stable index {other} unsupported; use 1 (Cauchy) or 2 (Gaussian)"
            ))),
        }
    }

    pub fn stable_index(self) -> u32 {
        match self {
            Family::Cauchy => 1,
            Family::Gaussian => 2,
        }
    }

    pub fn default_sigma0(self) -> f64 {
        match self {
            Family::Cauchy => 5.0,
            Family::Gaussian => 10.0,
        }
    }

    /// Initial slice width when sampling compressed parameters.
    pub fn s_slice_width(self) -> f64 {
        match self {
            Family::Cauchy => 20.0,
            Family::Gaussian => 10.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Cauchy => "cauchy",
            Family::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cauchy" | "1" => Ok(Family::Cauchy),
            "gaussian" | "normal" | "2" => Ok(Family::Gaussian),
            other => Err(Error::Config(format!("unknown prior family `{other}`"))),
        }
    }
}

/// Number of patterns of each order `0..=O` inside a group.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct OrderCounts(Vec<u64>);

impl OrderCounts {
    pub fn zeros(order: usize) -> Self {
        OrderCounts(vec![0; order + 1])
    }

    pub fn from_vec(counts: Vec<u64>) -> Self {
        OrderCounts(counts)
    }

    /// Highest order tracked.
    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn get(&self, order: usize) -> u64 {
        self.0.get(order).copied().unwrap_or(0)
    }

    pub fn add_at(&mut self, order: usize, n: u64) {
        self.0[order] = self.0[order].saturating_add(n);
    }

    pub fn total(&self) -> u64 {
        self.0.iter().fold(0u64, |a, &b| a.saturating_add(b))
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn add(&mut self, other: &OrderCounts) {
        for (a, &b) in self.0.iter_mut().zip(&other.0) {
            *a = a.saturating_add(b);
        }
    }

    /// Element-wise `self - other`, clamped at zero.
    pub fn minus(&self, other: &OrderCounts) -> OrderCounts {
        OrderCounts(
            self.0
                .iter()
                .enumerate()
                .map(|(o, &a)| a.saturating_sub(other.get(o)))
                .collect(),
        )
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

/// Widths `sigma[0..=O]` of the coefficient priors.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperparameterVector(Vec<f64>);

impl HyperparameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Config(
                "hyperparameters must be positive and finite".into(),
            ));
        }
        Ok(HyperparameterVector(values))
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn get(&self, order: usize) -> f64 {
        self.0[order]
    }

    pub(crate) fn set(&mut self, order: usize, value: f64) {
        debug_assert!(value > 0.0);
        self.0[order] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Inverse-Gamma distribution with density
/// `x^(-shape-1) rate^shape exp(-rate/x) / Gamma(shape)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseGamma {
    shape: f64,
    rate: f64,
}

impl InverseGamma {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
            return Err(Error::Config(format!(
                "Inverse-Gamma needs positive shape and rate, got ({shape}, {rate})"
            )));
        }
        Ok(InverseGamma { shape, rate })
    }

    /// Parameterised by its mode `w`: rate = (shape + 1) w.
    pub fn with_mode(shape: f64, mode: f64) -> Result<Self> {
        Self::new(shape, (shape + 1.0) * mode)
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape * self.rate.ln() - ln_gamma(self.shape) - (self.shape + 1.0) * x.ln()
            - self.rate / x
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// `P(X <= x)`, the regularized upper incomplete gamma at `rate / x`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        if x.is_infinite() {
            return Ok(1.0);
        }
        checked_gamma_ur(self.shape, self.rate / x)
            .map_err(|e| Error::Numerical(format!("incomplete gamma: {e}")))
    }

    /// Inverse of [`cdf`](Self::cdf) by bisection on `ln x`.
    pub fn quantile(&self, prob: f64) -> Result<f64> {
        if !(prob > 0.0 && prob < 1.0) {
            return Err(Error::Config(format!("quantile probability {prob} not in (0, 1)")));
        }
        let centre = self.rate.ln();
        let mut lo = centre - 10.0;
        let mut hi = centre + 10.0;
        let mut expansions = 0;
        while self.cdf(lo.exp())? > prob {
            lo -= 20.0;
            expansions += 1;
            if expansions > 60 {
                return Err(Error::Numerical("quantile bracket (lower) not found".into()));
            }
        }
        while self.cdf(hi.exp())? < prob {
            hi += 20.0;
            expansions += 1;
            if expansions > 60 {
                return Err(Error::Numerical("quantile bracket (upper) not found".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid.exp())? < prob {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }
}

/// How the Inverse-Gamma modes `w_o` are chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeRule {
    /// `w_o = c / o`, written `"c/o"` in config files.
    Rule(String),
    List(Vec<f64>),
}

impl ModeRule {
    pub fn modes(&self, order: usize) -> Result<Vec<f64>> {
        match self {
            ModeRule::Rule(rule) => {
                let c = rule
                    .trim()
                    .strip_suffix("/o")
                    .and_then(|c| c.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("bad w rule `{rule}`; expected `c/o`")))?;
                Ok((1..=order).map(|o| c / o as f64).collect())
            }
            ModeRule::List(list) => {
                if list.len() != order {
                    return Err(Error::Config(format!(
                        "w list has {} entries, order is {order}",
                        list.len()
                    )));
                }
                Ok(list.clone())
            }
        }
    }
}

impl Default for ModeRule {
    fn default() -> Self {
        ModeRule::Rule("0.1/o".into())
    }
}

/// Fully resolved prior for a model of order `O`.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorSpec {
    pub family: Family,
    pub sigma0: f64,
    /// `hyper[o - 1]` is the prior of `sigma[o]`.
    pub hyper: Vec<InverseGamma>,
}

impl PriorSpec {
    pub fn new(family: Family, sigma0: f64, shape: f64, modes: &ModeRule, order: usize) -> Result<Self> {
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            return Err(Error::Config(format!("sigma0 must be positive, got {sigma0}")));
        }
        let hyper = modes
            .modes(order)?
            .into_iter()
            .map(|w| InverseGamma::with_mode(shape, w))
            .collect::<Result<Vec<_>>>()?;
        Ok(PriorSpec { family, sigma0, hyper })
    }

    /// `sigma0` 5 (Cauchy) or 10 (Gaussian), shape 0.25, `w_o = 0.1 / o`.
    pub fn defaults(family: Family, order: usize) -> Self {
        Self::new(family, family.default_sigma0(), 0.25, &ModeRule::default(), order)
            .expect("default prior is valid")
    }

    pub fn order(&self) -> usize {
        self.hyper.len()
    }

    /// Starting point of the chain: `sigma[o]` at the prior mode.
    pub fn initial_sigma(&self) -> HyperparameterVector {
        let mut v = vec![self.sigma0];
        v.extend(self.hyper.iter().map(|ig| ig.rate() / (ig.shape() + 1.0)));
        HyperparameterVector(v)
    }
}

/// Width of the prior of a sum of coefficients with the given per-order
/// counts: `sum n_o sigma_o` (Cauchy) or `sqrt(sum n_o sigma_o^2)` (Gaussian).
pub fn compressed_width(counts: &OrderCounts, sigma: &HyperparameterVector, family: Family) -> f64 {
    let terms = counts
        .as_slice()
        .iter()
        .zip(sigma.as_slice())
        .filter(|(&n, _)| n > 0);
    match family {
        Family::Cauchy => terms.map(|(&n, &s)| n as f64 * s).sum(),
        Family::Gaussian => terms.map(|(&n, &s)| n as f64 * s * s).sum::<f64>().sqrt(),
    }
}

pub fn log_stable_density(x: f64, width: f64, family: Family) -> f64 {
    let z = x / width;
    match family {
        Family::Gaussian => -0.5 * (2.0 * PI).ln() - width.ln() - 0.5 * z * z,
        Family::Cauchy => -PI.ln() - width.ln() - (z * z).ln_1p(),
    }
}

pub fn sample_stable<R: Rng + ?Sized>(width: f64, family: Family, rng: &mut R) -> f64 {
    match family {
        Family::Gaussian => Normal::new(0.0, width).expect("positive width").sample(rng),
        Family::Cauchy => Cauchy::new(0.0, width).expect("positive width").sample(rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma(v: &[f64]) -> HyperparameterVector {
        HyperparameterVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rate_puts_mode_at_w() {
        let ig = InverseGamma::with_mode(0.25, 0.1).unwrap();
        assert!((ig.rate() - 0.125).abs() < 1e-15);
        // the density peaks at rate / (shape + 1)
        let mode = 0.1;
        assert!(ig.ln_pdf(mode) > ig.ln_pdf(mode * 1.01));
        assert!(ig.ln_pdf(mode) > ig.ln_pdf(mode * 0.99));
    }

    #[test]
    fn quantile_median_and_upper_decile() {
        let ig = InverseGamma::new(0.25, 0.125).unwrap();
        let median = ig.quantile(0.5).unwrap();
        let q90 = ig.quantile(0.9).unwrap();
        assert!((median - 2.86).abs() / 2.86 < 0.005, "{median}");
        assert!((q90 - 1851.83).abs() / 1851.83 < 0.005, "{q90}");
    }

    #[test]
    fn quantile_scales_with_rate() {
        let q1 = InverseGamma::new(0.25, 0.125).unwrap().quantile(0.5).unwrap();
        let q2 = InverseGamma::new(0.25, 0.125 / 2.0).unwrap().quantile(0.5).unwrap();
        assert!((q2 - q1 / 2.0).abs() < 1e-9 * q1);
        assert!((q2 - 1.43).abs() < 0.005);
    }

    #[test]
    fn quantile_rejects_bad_probability() {
        let ig = InverseGamma::new(0.25, 0.125).unwrap();
        assert!(ig.quantile(0.0).is_err());
        assert!(ig.quantile(1.0).is_err());
    }

    #[test]
    fn cdf_quantile_round_trip() {
        let ig = InverseGamma::new(0.25, 0.125).unwrap();
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let q = ig.quantile(p).unwrap();
            assert!((ig.cdf(q).unwrap() - p).abs() <= 1e-8, "p={p}");
        }
    }

    #[test]
    fn widths() {
        let s = sigma(&[5.0, 0.4, 0.3, 0.2]);
        let single = OrderCounts::from_vec(vec![0, 0, 0, 1]);
        assert_eq!(compressed_width(&single, &s, Family::Cauchy), 0.2);
        let run = OrderCounts::from_vec(vec![0, 1, 1, 1]);
        let g = compressed_width(&run, &s, Family::Gaussian);
        assert!((g - (0.16f64 + 0.09 + 0.04).sqrt()).abs() < 1e-15);
        let cls = OrderCounts::from_vec(vec![0, 1, 3, 3]);
        let c = compressed_width(&cls, &s, Family::Cauchy);
        assert!((c - (0.4 + 3.0 * 0.3 + 3.0 * 0.2)).abs() < 1e-15);
    }

    #[test]
    fn cauchy_density_at_origin() {
        assert!((log_stable_density(0.0, 1.0, Family::Cauchy).exp() - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn stable_index_validation() {
        assert_eq!(Family::from_stable_index(1).unwrap(), Family::Cauchy);
        assert_eq!(Family::from_stable_index(2).unwrap(), Family::Gaussian);
        assert!(Family::from_stable_index(3).is_err());
    }

    #[test]
    fn mode_rules() {
        let m = ModeRule::Rule("0.1/o".into()).modes(3).unwrap();
        assert_eq!(m, vec![0.1, 0.05, 0.1 / 3.0]);
        assert!(ModeRule::List(vec![1.0]).modes(2).is_err());
        assert!(ModeRule::Rule("0.1*o".into()).modes(2).is_err());
    }

    #[test]
    fn default_prior_starts_at_modes() {
        let p = PriorSpec::defaults(Family::Cauchy, 3);
        let s = p.initial_sigma();
        assert_eq!(s.get(0), 5.0);
        assert!((s.get(2) - 0.05).abs() < 1e-15);
        assert_eq!(PriorSpec::defaults(Family::Gaussian, 1).sigma0, 10.0);
    }
}
