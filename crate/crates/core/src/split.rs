//! Conditional splitting of a compressed parameter.
//!
//! Given `s = a + b` with `a ~ S(0, sigma1)` and `b ~ S(0, sigma2)`
//! independent symmetric stable variables, draw `a | s`. The Gaussian case is
//! a normal; the Cauchy case has density proportional to
//! `1 / ((sigma1^2 + a^2)(sigma2^2 + (a - s)^2))`, sampled by inverting its
//! closed-form CDF.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, StudentT};

use crate::error::{Error, Result};
use crate::prior::Family;

/// Below this relative distance from the point `s = 0, sigma1 = sigma2` the
/// split is treated as exactly the scaled t(3).
const DEGENERATE_TOL: f64 = 1e-24;
/// Below this relative distance the closed form loses too many digits and
/// the CDF is integrated numerically instead.
const NEAR_DEGENERATE_TOL: f64 = 1e-6;
const INVERSION_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 200;
const MAX_ILLINOIS_STEPS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitQuery {
    /// The compressed value being split.
    pub s: f64,
    /// Width of the part being drawn.
    pub sigma1: f64,
    /// Width of the remainder.
    pub sigma2: f64,
    pub family: Family,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CauchyRegime {
    StudentT3,
    Quadrature,
    ClosedForm,
}

impl SplitQuery {
    pub fn new(s: f64, sigma1: f64, sigma2: f64, family: Family) -> Result<Self> {
        if !s.is_finite() || !(sigma1 >= 0.0 && sigma1.is_finite()) || !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::Numerical(format!(
                "invalid split query s={s} sigma1={sigma1} sigma2={sigma2}"
            )));
        }
        Ok(SplitQuery { s, sigma1, sigma2, family })
    }

    fn regime(&self) -> CauchyRegime {
        let (s, a, b) = (self.s, self.sigma1, self.sigma2);
        let rel = (s * s + (a - b) * (a - b)) / ((a + b) * (a + b));
        if rel < DEGENERATE_TOL {
            CauchyRegime::StudentT3
        } else if rel < NEAR_DEGENERATE_TOL {
            CauchyRegime::Quadrature
        } else {
            CauchyRegime::ClosedForm
        }
    }

    /// Normalizing constant of the Cauchy split density.
    fn cauchy_norm(&self) -> f64 {
        let (s, a, b) = (self.s, self.sigma1, self.sigma2);
        PI * (a + b) / (a * b * (s * s + (a + b) * (a + b)))
    }
}

/// Draw of the matched part under a Gaussian prior.
pub fn split_gaussian<R: Rng + ?Sized>(q: &SplitQuery, rng: &mut R) -> f64 {
    let v1 = q.sigma1 * q.sigma1;
    let v2 = q.sigma2 * q.sigma2;
    let frac = v1 / (v1 + v2);
    let mean = q.s * frac;
    let sd = (v1 * v2 / (v1 + v2)).sqrt();
    if sd == 0.0 {
        return mean;
    }
    mean + sd * Normal::new(0.0, 1.0).expect("unit normal").sample(rng)
}

pub fn cauchy_split_pdf(x: f64, q: &SplitQuery) -> f64 {
    let (s, a, b) = (q.s, q.sigma1, q.sigma2);
    let d = x - s;
    1.0 / (q.cauchy_norm() * (a * a + x * x) * (b * b + d * d))
}

/// `atan(z) + pi/2` without cancellation for large negative `z`.
fn atan_shifted(z: f64) -> f64 {
    if z < 0.0 {
        (-1.0 / z).atan()
    } else {
        z.atan() + PI / 2.0
    }
}

fn t3_cdf(x: f64, scale: f64) -> f64 {
    let z = x / scale;
    if z < 0.0 {
        return 1.0 - t3_cdf(-x, scale);
    }
    0.5 + (z / (1.0 + z * z) + z.atan()) / PI
}

fn cdf_closed_form(x: f64, q: &SplitQuery) -> f64 {
    let (s, a, b) = (q.s, q.sigma1, q.sigma2);
    let dm = s * s + (a - b) * (a - b);
    let d = x - s;
    let tail = d * d + b * b;
    let log_ratio = ((2.0 * x * s - s * s + a * a - b * b) / tail).ln_1p();
    let t0 = atan_shifted(x / a);
    let ts = atan_shifted(d / b);
    let bracket = s * log_ratio + (s * s - a * a + b * b) / a * t0 + (s * s + a * a - b * b) / b * ts;
    let f = a * b / (PI * (a + b) * dm) * bracket;
    f.clamp(0.0, 1.0)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(lo);
    let fb = f(hi);
    let fm = f(0.5 * (lo + hi));
    let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, lo, hi, fa, fm, fb, whole, tol, 40)
}

/// Integrates the density on the angle scale `x = c tan(theta)`, where the
/// integrand is bounded, from whichever end is nearer.
fn cdf_quadrature(x: f64, q: &SplitQuery) -> f64 {
    let c = 0.5 * (q.sigma1 + q.sigma2);
    let g = |theta: f64| {
        let t = theta.tan();
        let v = c * t;
        if !v.is_finite() {
            return 0.0;
        }
        cauchy_split_pdf(v, q) * c * (1.0 + t * t)
    };
    let theta = (x / c).atan();
    let half = PI / 2.0;
    if theta <= 0.0 {
        adaptive_simpson(&g, -half, theta, 1e-14).clamp(0.0, 1.0)
    } else {
        (1.0 - adaptive_simpson(&g, theta, half, 1e-14)).clamp(0.0, 1.0)
    }
}

pub fn cauchy_split_cdf(x: f64, q: &SplitQuery) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    match q.regime() {
        CauchyRegime::StudentT3 => t3_cdf(x, q.sigma1),
        CauchyRegime::Quadrature => cdf_quadrature(x, q),
        CauchyRegime::ClosedForm => cdf_closed_form(x, q),
    }
}

/// Solves `cdf(x) = u` by the Illinois variant of regula falsi.
pub fn invert_cdf<F: Fn(f64) -> f64>(cdf: F, u: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = cdf(lo) - u;
    let mut doublings = 0;
    while flo > 0.0 {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::Numerical(format!("cannot bracket u={u} from below")));
        }
        lo -= hi - lo;
        flo = cdf(lo) - u;
        doublings += 1;
    }
    let mut fhi = cdf(hi) - u;
    while fhi < 0.0 {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::Numerical(format!("cannot bracket u={u} from above")));
        }
        hi += hi - lo;
        fhi = cdf(hi) - u;
        doublings += 1;
    }
    if flo.abs() <= INVERSION_TOL {
        return Ok(lo);
    }
    if fhi.abs() <= INVERSION_TOL {
        return Ok(hi);
    }
    // +1 when the last update moved `hi`, -1 when it moved `lo`
    let mut side = 0i8;
    for _ in 0..MAX_ILLINOIS_STEPS {
        let mut x = (lo * fhi - hi * flo) / (fhi - flo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = cdf(x) - u;
        if fx.abs() <= INVERSION_TOL {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        } else {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return Ok(if flo.abs() < fhi.abs() { lo } else { hi });
        }
    }
    Err(Error::Numerical(format!("inversion did not converge for u={u}")))
}

/// Draw of the matched part under a Cauchy prior.
pub fn cauchy_split_sample<R: Rng + ?Sized>(q: &SplitQuery, rng: &mut R) -> Result<f64> {
    if q.regime() == CauchyRegime::StudentT3 {
        let t = StudentT::new(3.0).expect("three degrees of freedom").sample(rng);
        return Ok(t * q.sigma1 / 3f64.sqrt());
    }
    let u: f64 = rng.random();
    let spread = 10.0 * (q.sigma1 + q.sigma2);
    let lo = q.s.min(0.0) - spread;
    let hi = q.s.max(0.0) + spread;
    invert_cdf(|x| cauchy_split_cdf(x, q), u, lo, hi)
}

/// Matched part of `q.s`. A side with zero width takes nothing or
/// everything without consuming randomness.
pub fn split_sample<R: Rng + ?Sized>(q: &SplitQuery, rng: &mut R) -> Result<f64> {
    if q.sigma1 == 0.0 {
        return Ok(0.0);
    }
    if q.sigma2 == 0.0 {
        return Ok(q.s);
    }
    match q.family {
        Family::Gaussian => Ok(split_gaussian(q, rng)),
        Family::Cauchy => cauchy_split_sample(q, rng),
    }
}
