use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SequenceDataset;
use crate::error::{Error, Result};

/// Hidden Markov model over 8 hidden states emitting binary symbols.
///
/// Each hidden state moves to its dominant successor with probability
/// `dominant_prob` and to each of the other states with equal share of the
/// remainder. Even hidden states emit 1 with probability `emission_prob`,
/// odd ones emit 2 with that probability.
#[derive(Clone, Debug, PartialEq)]
pub struct HmmSpec {
    pub dominant_prob: f64,
    pub emission_prob: f64,
    /// `successor[h - 1]` is the dominant successor of hidden state `h`.
    pub successor: [usize; 8],
}

pub const N_HIDDEN: usize = 8;

impl Default for HmmSpec {
    fn default() -> Self {
        // cycle 1 -> 2 -> 3 -> 8 -> 7 -> 6 -> 5 -> 4 -> 1
        HmmSpec {
            dominant_prob: 0.95,
            emission_prob: 0.95,
            successor: [2, 3, 8, 1, 4, 5, 6, 7],
        }
    }
}

impl HmmSpec {
    fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.dominant_prob) || !unit.contains(&self.emission_prob) {
            return Err(Error::Config("HMM probabilities must lie in [0, 1]".into()));
        }
        let mut seen = [false; N_HIDDEN];
        for &s in &self.successor {
            if !(1..=N_HIDDEN).contains(&s) || seen[s - 1] {
                return Err(Error::Config(
                    "HMM successor map must be a permutation of 1..8".into(),
                ));
            }
            seen[s - 1] = true;
        }
        Ok(())
    }

    /// Row-stochastic transition matrix, rows and columns indexed by `h - 1`.
    pub fn transition_matrix(&self) -> [[f64; N_HIDDEN]; N_HIDDEN] {
        let rest = (1.0 - self.dominant_prob) / (N_HIDDEN - 1) as f64;
        let mut m = [[0.0; N_HIDDEN]; N_HIDDEN];
        for (h, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = if j + 1 == self.successor[h] {
                    self.dominant_prob
                } else {
                    rest
                };
            }
        }
        m
    }

    /// Next hidden state (1-based).
    pub fn step<R: Rng + ?Sized>(&self, hidden: usize, rng: &mut R) -> usize {
        let dominant = self.successor[hidden - 1];
        if rng.random::<f64>() < self.dominant_prob {
            return dominant;
        }
        // uniform over the 7 states other than the dominant successor
        let k = rng.random_range(0..N_HIDDEN - 1);
        let mut state = k + 1;
        if state >= dominant {
            state += 1;
        }
        state
    }

    pub fn emit<R: Rng + ?Sized>(&self, hidden: usize, rng: &mut R) -> u32 {
        let typical = if hidden % 2 == 0 { 1 } else { 2 };
        if rng.random::<f64>() < self.emission_prob {
            typical
        } else {
            3 - typical
        }
    }
}

/// Generates `n_seq` observable sequences of `length` symbols; the last
/// symbol of each is the response and the rest form the history.
pub fn hmm_generate(spec: &HmmSpec, n_seq: usize, length: usize, seed: u64) -> Result<SequenceDataset> {
    spec.validate()?;
    if length < 2 {
        return Err(Error::Config("sequence length must be at least 2".into()));
    }
    if n_seq == 0 {
        return Err(Error::Config("need at least one sequence".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(n_seq);
    for _ in 0..n_seq {
        let mut hidden = rng.random_range(1..=N_HIDDEN);
        let mut seq = Vec::with_capacity(length);
        for t in 0..length {
            if t > 0 {
                hidden = spec.step(hidden, &mut rng);
            }
            seq.push(spec.emit(hidden, &mut rng));
        }
        cases.push(seq);
    }
    SequenceDataset::new(vec![2; length - 1], 2, &cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cycle_contains_stated_transitions() {
        let spec = HmmSpec::default();
        assert_eq!(spec.successor[2 - 1], 3);
        assert_eq!(spec.successor[3 - 1], 8);
        spec.validate().unwrap();
    }

    #[test]
    fn transition_rows_sum_to_one() {
        let m = HmmSpec::default().transition_matrix();
        for row in &m {
            let total: f64 = row.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let big = row.iter().filter(|&&p| p == 0.95).count();
            assert_eq!(big, 1);
            assert!(row.iter().all(|&p| p == 0.95 || (p - 0.05 / 7.0).abs() < 1e-15));
        }
    }

    #[test]
    fn experiment_shape() {
        let d = hmm_generate(&HmmSpec::default(), 5500, 21, 1).unwrap();
        assert_eq!(d.n_cases(), 5500);
        assert_eq!(d.order(), 20);
    }

    #[test]
    fn same_seed_same_data() {
        let a = hmm_generate(&HmmSpec::default(), 50, 10, 7).unwrap();
        let b = hmm_generate(&HmmSpec::default(), 50, 10, 7).unwrap();
        let c = hmm_generate(&HmmSpec::default(), 50, 10, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_chain_is_a_function_of_the_start() {
        let spec = HmmSpec {
            dominant_prob: 1.0,
            emission_prob: 1.0,
            ..HmmSpec::default()
        };
        let d = hmm_generate(&spec, 400, 12, 3).unwrap();
        // every sequence must equal the emission trace of the cycle from one of 8 starts
        let traces: Vec<Vec<u32>> = (1..=N_HIDDEN)
            .map(|start| {
                let mut h = start;
                (0..12)
                    .map(|t| {
                        if t > 0 {
                            h = spec.successor[h - 1];
                        }
                        if h % 2 == 0 { 1 } else { 2 }
                    })
                    .collect()
            })
            .collect();
        for i in 0..d.n_cases() {
            let mut seq = d.history(i).to_vec();
            seq.push(d.response(i));
            assert!(traces.contains(&seq));
        }
    }

    #[test]
    fn dominant_transition_frequency() {
        let spec = HmmSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let steps = 100_000;
        let mut h = 1;
        let mut hits = 0;
        for _ in 0..steps {
            let next = spec.step(h, &mut rng);
            if next == spec.successor[h - 1] {
                hits += 1;
            }
            h = next;
        }
        let freq = hits as f64 / steps as f64;
        assert!((freq - 0.95).abs() < 0.01, "freq {freq}");
    }
}
