use rand::Rng;

use crate::error::{Error, Result};

const MAX_SHRINK: usize = 10_000;

/// Univariate slice sampler with stepping out and shrinkage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceSampler {
    /// Initial interval width.
    pub width: f64,
    /// Total number of stepping-out expansions allowed.
    pub max_steps: usize,
}

impl SliceSampler {
    pub fn new(width: f64, max_steps: usize) -> Self {
        SliceSampler { width, max_steps }
    }

    /// One transition from `x0` that leaves the density `exp(log_density)`
    /// invariant.
    pub fn sample<F, R>(&self, mut log_density: F, x0: f64, rng: &mut R) -> Result<f64>
    where
        F: FnMut(f64) -> f64,
        R: Rng + ?Sized,
    {
        let f0 = log_density(x0);
        if f0 == f64::NEG_INFINITY || f0.is_nan() {
            return Err(Error::Numerical(format!("slice sampler started at x={x0} with zero density")));
        }
        let u: f64 = rng.random();
        let level = f0 + (1.0 - u).ln();

        let mut left = x0 - self.width * rng.random::<f64>();
        let mut right = left + self.width;
        let v: f64 = rng.random();
        let mut steps_left = (self.max_steps as f64 * v).floor() as usize;
        let mut steps_right = (self.max_steps - 1).saturating_sub(steps_left);
        while steps_left > 0 && level < log_density(left) {
            left -= self.width;
            steps_left -= 1;
        }
        while steps_right > 0 && level < log_density(right) {
            right += self.width;
            steps_right -= 1;
        }

        for _ in 0..MAX_SHRINK {
            let x1 = left + rng.random::<f64>() * (right - left);
            if level < log_density(x1) {
                return Ok(x1);
            }
            if x1 < x0 {
                left = x1;
            } else {
                right = x1;
            }
        }
        Err(Error::SliceExhausted(MAX_SHRINK))
    }
}
