//! Gibbs sampling of the compressed parameters and the width
//! hyperparameters.

mod chain_file;
mod slice;

pub use chain_file::{read_chain, write_chain_header, write_chain_record, ChainHeader};
pub use slice::SliceSampler;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::grouping::{Expression, Grouping};
use crate::math::{ln_add_exp, log_sum_exp};
use crate::prior::{compressed_width, log_stable_density, Family, HyperparameterVector, OrderCounts, PriorSpec};

/// For each training case, the groups whose patterns it expresses.
#[derive(Clone, Debug, PartialEq)]
pub struct IncidenceIndex {
    offsets: Vec<usize>,
    groups: Vec<usize>,
}

impl IncidenceIndex {
    pub fn from_expressions<'a, I>(n_cases: usize, expressions: I) -> Self
    where
        I: IntoIterator<Item = &'a Expression>,
    {
        let mut per_case: Vec<Vec<usize>> = vec![Vec::new(); n_cases];
        for (g, e) in expressions.into_iter().enumerate() {
            for &i in e.cases() {
                per_case[i].push(g);
            }
        }
        let mut offsets = Vec::with_capacity(n_cases + 1);
        offsets.push(0);
        let mut groups = Vec::new();
        for list in per_case {
            groups.extend(list);
            offsets.push(groups.len());
        }
        IncidenceIndex { offsets, groups }
    }

    pub fn n_cases(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn groups_of(&self, case: usize) -> &[usize] {
        &self.groups[self.offsets[case]..self.offsets[case + 1]]
    }
}

/// Compressed parameters `s[g][k]` and the widths `sigma[0..=O]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    n_classes: usize,
    s: Vec<f64>,
    pub sigma: HyperparameterVector,
}

impl ModelState {
    pub fn new(n_groups: usize, n_classes: usize, sigma: HyperparameterVector) -> Self {
        ModelState {
            n_classes,
            s: vec![0.0; n_groups * n_classes],
            sigma,
        }
    }

    pub fn from_parts(n_classes: usize, s: Vec<f64>, sigma: HyperparameterVector) -> Result<Self> {
        if n_classes == 0 || s.len() % n_classes != 0 {
            return Err(Error::ChainFormat(format!(
                "{} compressed values do not fill {n_classes} classes",
                s.len()
            )));
        }
        Ok(ModelState { n_classes, s, sigma })
    }

    pub fn n_groups(&self) -> usize {
        self.s.len() / self.n_classes
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// `class` is 0-based.
    pub fn s(&self, group: usize, class: usize) -> f64 {
        self.s[group * self.n_classes + class]
    }

    pub fn set_s(&mut self, group: usize, class: usize, value: f64) {
        self.s[group * self.n_classes + class] = value;
    }

    /// Row-major `(group, class)`.
    pub fn s_values(&self) -> &[f64] {
        &self.s
    }
}

/// Classes whose parameters are sampled; with two classes the first is
/// pinned at zero.
pub fn active_classes(n_classes: usize) -> std::ops::Range<usize> {
    if n_classes == 2 {
        1..2
    } else {
        0..n_classes
    }
}

/// Per-case linear scores `l[i][k]`, row-major.
pub fn linear_scores(state: &ModelState, incidence: &IncidenceIndex) -> Vec<f64> {
    let k = state.n_classes();
    let mut out = vec![0.0; incidence.n_cases() * k];
    for i in 0..incidence.n_cases() {
        let row = &mut out[i * k..(i + 1) * k];
        for &g in incidence.groups_of(i) {
            for (c, v) in row.iter_mut().enumerate() {
                *v += state.s(g, c);
            }
        }
    }
    out
}

/// Multinomial log-likelihood. `responses` are 1-based class labels.
pub fn log_likelihood(state: &ModelState, incidence: &IncidenceIndex, responses: &[u32]) -> f64 {
    let k = state.n_classes();
    let lin = linear_scores(state, incidence);
    responses
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let row = &lin[i * k..(i + 1) * k];
            row[r as usize - 1] - log_sum_exp(row)
        })
        .sum()
}

/// Everything about the training data the sampler needs.
#[derive(Clone, Debug)]
pub struct CompressedModel {
    pub family: Family,
    pub n_classes: usize,
    pub order: usize,
    pub counts: Vec<OrderCounts>,
    pub members: Vec<Vec<usize>>,
    pub incidence: IncidenceIndex,
    /// 1-based.
    pub responses: Vec<u32>,
    groups_with_order: Vec<Vec<usize>>,
}

impl CompressedModel {
    pub fn new(grouping: &Grouping, data: &Dataset, family: Family) -> Result<Self> {
        if grouping.order() != data.order() {
            return Err(Error::InvalidDataset(format!(
                "grouping order {} does not match data order {}",
                grouping.order(),
                data.order()
            )));
        }
        let g = grouping.n_groups();
        let expressions: Vec<&Expression> = (0..g).map(|i| grouping.expression(i)).collect();
        let incidence = IncidenceIndex::from_expressions(data.n_cases(), expressions.iter().copied());
        let counts: Vec<OrderCounts> = (0..g).map(|i| grouping.counts(i).clone()).collect();
        let order = grouping.order();
        let groups_with_order = (0..=order)
            .map(|o| (0..g).filter(|&i| counts[i].get(o) > 0).collect())
            .collect();
        Ok(CompressedModel {
            family,
            n_classes: data.n_classes() as usize,
            order,
            counts,
            members: expressions.iter().map(|e| e.cases().to_vec()).collect(),
            incidence,
            responses: data.responses().to_vec(),
            groups_with_order,
        })
    }

    pub fn n_groups(&self) -> usize {
        self.counts.len()
    }

    pub fn n_cases(&self) -> usize {
        self.responses.len()
    }

    pub fn groups_with_order(&self, order: usize) -> &[usize] {
        &self.groups_with_order[order]
    }

    /// Log conditional density of `s[group][class] = value`, up to a
    /// constant, evaluated from scratch.
    pub fn s_log_conditional(&self, state: &ModelState, group: usize, class: usize, value: f64) -> f64 {
        let mut st = state.clone();
        st.set_s(group, class, value);
        let width = compressed_width(&self.counts[group], &state.sigma, self.family);
        log_likelihood(&st, &self.incidence, &self.responses) + log_stable_density(value, width, self.family)
    }

    /// Log conditional density of `sigma[order]` given everything else,
    /// up to a constant, on the original scale.
    pub fn sigma_log_conditional(&self, prior: &PriorSpec, state: &ModelState, order: usize, value: f64) -> f64 {
        if !(value > 0.0 && value.is_finite()) {
            return f64::NEG_INFINITY;
        }
        let mut sigma = state.sigma.clone();
        sigma.set(order, value);
        let mut total = prior.hyper[order - 1].ln_pdf(value);
        for &g in self.groups_with_order(order) {
            let width = compressed_width(&self.counts[g], &sigma, self.family);
            for k in active_classes(self.n_classes) {
                total += log_stable_density(state.s(g, k), width, self.family);
            }
        }
        total
    }
}

/// MCMC schedule: per iteration one scan over all `s`, then
/// `sigma_sweeps` scans over `sigma[1..=O]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub sigma_sweeps: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            iterations: 2000,
            burn_in: 750,
            thin: 5,
            sigma_sweeps: 10,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn-in ({}) must be smaller than the number of iterations ({}); nothing would be retained",
                self.burn_in, self.iterations
            )));
        }
        Ok(())
    }

    /// Iterations are numbered from 1.
    pub fn retains(&self, iteration: usize) -> bool {
        iteration > self.burn_in && (iteration - self.burn_in) % self.thin == 0
    }

    pub fn n_retained(&self) -> usize {
        if self.thin == 0 || self.iterations <= self.burn_in {
            return 0;
        }
        (self.iterations - self.burn_in) / self.thin
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainSample {
    pub iteration: usize,
    pub state: ModelState,
}

pub struct GibbsSampler<'a> {
    model: &'a CompressedModel,
    prior: &'a PriorSpec,
    state: ModelState,
    linear: Vec<f64>,
    widths: Vec<f64>,
    rng: ChaCha8Rng,
    s_slice: SliceSampler,
    sigma_slice: SliceSampler,
    base: Vec<f64>,
    other: Vec<f64>,
}

impl<'a> GibbsSampler<'a> {
    /// Starts from `s = 0` and each `sigma[o]` at its prior mode.
    pub fn new(model: &'a CompressedModel, prior: &'a PriorSpec, seed: u64) -> Result<Self> {
        if prior.order() != model.order {
            return Err(Error::Config(format!(
                "prior covers order {} but the model has order {}",
                prior.order(),
                model.order
            )));
        }
        if prior.family != model.family {
            return Err(Error::Config("prior and model families differ".into()));
        }
        let state = ModelState::new(model.n_groups(), model.n_classes, prior.initial_sigma());
        Ok(Self::with_state(model, prior, state, seed))
    }

    pub fn with_state(model: &'a CompressedModel, prior: &'a PriorSpec, state: ModelState, seed: u64) -> Self {
        let mut sampler = GibbsSampler {
            model,
            prior,
            linear: Vec::new(),
            widths: Vec::new(),
            state,
            rng: ChaCha8Rng::seed_from_u64(seed),
            s_slice: SliceSampler::new(model.family.s_slice_width(), 50),
            sigma_slice: SliceSampler::new(1.0, 50),
            base: Vec::new(),
            other: Vec::new(),
        };
        sampler.refresh();
        sampler
    }

    pub fn state(&self) -> &ModelState {
        &self.state
    }

    fn refresh(&mut self) {
        self.linear = linear_scores(&self.state, &self.model.incidence);
        self.widths = self
            .model
            .counts
            .iter()
            .map(|c| compressed_width(c, &self.state.sigma, self.model.family))
            .collect();
    }

    /// Resamples `s[group][class]` from its full conditional.
    pub fn update_s(&mut self, group: usize, class: usize) -> Result<()> {
        let model = self.model;
        let k = model.n_classes;
        if k == 2 && class == 0 {
            return Ok(());
        }
        let current = self.state.s(group, class);
        let cases = &model.members[group];
        self.base.clear();
        self.other.clear();
        for &i in cases {
            let row = &self.linear[i * k..(i + 1) * k];
            self.base.push(row[class] - current);
            let mut rest = f64::NEG_INFINITY;
            for (c, &v) in row.iter().enumerate() {
                if c != class {
                    rest = ln_add_exp(rest, v);
                }
            }
            self.other.push(rest);
        }
        let width = self.widths[group];
        let family = model.family;
        let (base, other) = (&self.base, &self.other);
        let target = (class + 1) as u32;
        let log_density = |x: f64| {
            let mut total = log_stable_density(x, width, family);
            for (j, &i) in cases.iter().enumerate() {
                let l = base[j] + x;
                if model.responses[i] == target {
                    total += l;
                }
                total -= ln_add_exp(other[j], l);
            }
            total
        };
        let next = self.s_slice.sample(log_density, current, &mut self.rng)?;
        let delta = next - current;
        for &i in cases {
            self.linear[i * k + class] += delta;
        }
        self.state.set_s(group, class, next);
        Ok(())
    }

    /// Resamples `sigma[order]`, `order >= 1`, on the log scale.
    pub fn update_sigma(&mut self, order: usize) -> Result<()> {
        let model = self.model;
        let prior = self.prior;
        let state = &self.state;
        let current = state.sigma.get(order).ln();
        let log_density = |y: f64| y + model.sigma_log_conditional(prior, state, order, y.exp());
        let next = self.sigma_slice.sample(log_density, current, &mut self.rng)?.exp();
        self.state.sigma.set(order, next);
        for &g in model.groups_with_order(order) {
            self.widths[g] = compressed_width(&model.counts[g], &self.state.sigma, model.family);
        }
        Ok(())
    }

    /// One full iteration of the schedule.
    pub fn iterate(&mut self, sigma_sweeps: usize) -> Result<()> {
        self.refresh();
        for g in 0..self.model.n_groups() {
            for k in active_classes(self.model.n_classes) {
                self.update_s(g, k)?;
            }
        }
        for _ in 0..sigma_sweeps {
            for o in 1..=self.model.order {
                self.update_sigma(o)?;
            }
        }
        Ok(())
    }
}

/// Runs the chain and returns the retained samples, passing each to `sink`
/// as soon as it is drawn.
pub fn run_chain_with<F>(
    model: &CompressedModel,
    prior: &PriorSpec,
    schedule: &Schedule,
    seed: u64,
    mut sink: F,
) -> Result<Vec<ChainSample>>
where
    F: FnMut(&ChainSample) -> std::io::Result<()>,
{
    schedule.validate()?;
    let mut sampler = GibbsSampler::new(model, prior, seed)?;
    let mut out = Vec::with_capacity(schedule.n_retained());
    for iteration in 1..=schedule.iterations {
        sampler.iterate(schedule.sigma_sweeps)?;
        if schedule.retains(iteration) {
            let sample = ChainSample {
                iteration,
                state: sampler.state().clone(),
            };
            sink(&sample).map_err(|source| Error::ChainIo { iteration, source })?;
            out.push(sample);
        }
    }
    Ok(out)
}

pub fn run_chain(model: &CompressedModel, prior: &PriorSpec, schedule: &Schedule, seed: u64) -> Result<Vec<ChainSample>> {
    run_chain_with(model, prior, schedule, seed, |_| Ok(()))
}
