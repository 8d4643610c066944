//! Seeded sample paths.

use rand::Rng;

use crate::error::{Error, Result};
use crate::process::{Process, Symbol};
use crate::seed::{rng_from_seed, PathRng};

/// A materialized sample path together with the seed that regenerates it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub seed: u64,
    pub symbols: Vec<Symbol>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Unbounded stream of symbols; the first one is drawn from the stationary
/// vector.
pub struct SymbolStream<'a> {
    process: &'a Process,
    rng: PathRng,
    prev: Option<Symbol>,
}

impl<'a> SymbolStream<'a> {
    pub fn new(process: &'a Process, seed: u64) -> Self {
        Self {
            process,
            rng: rng_from_seed(seed),
            prev: None,
        }
    }
}

impl Iterator for SymbolStream<'_> {
    type Item = Symbol;

    #[inline]
    fn next(&mut self) -> Option<Symbol> {
        let u: f64 = self.rng.random();
        let s = match self.prev {
            None => self.process.draw(0, u),
            Some(p) => self.process.draw(self.process.transition_row(p), u),
        };
        self.prev = Some(s);
        Some(s)
    }
}

pub fn sample_trajectory(process: &Process, length: usize, seed: u64) -> Result<Trajectory> {
    if length == 0 {
        return Err(Error::InvalidLength(length));
    }
    Ok(Trajectory {
        seed,
        symbols: SymbolStream::new(process, seed).take(length).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{validate_spec, ProcessSpec};

    #[test]
    fn same_seed_same_symbols() {
        let p = validate_spec(&ProcessSpec::bernoulli(vec![0.5, 0.5]), Default::default()).unwrap();
        let a = sample_trajectory(&p, 8, 1234).unwrap();
        let b = sample_trajectory(&p, 8, 1234).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        let c = sample_trajectory(&p, 64, 1235).unwrap();
        assert_ne!(&a.symbols[..], &c.symbols[..8]);
    }

    #[test]
    fn zero_length_rejected() {
        let p = validate_spec(&ProcessSpec::bernoulli(vec![0.5, 0.5]), Default::default()).unwrap();
        assert_eq!(sample_trajectory(&p, 0, 1), Err(Error::InvalidLength(0)));
    }

    #[test]
    fn forbidden_transitions_never_sampled() {
        let p = validate_spec(
            &ProcessSpec::markov(None, vec![vec![0.5, 0.5], vec![1.0, 0.0]]),
            Default::default(),
        )
        .unwrap();
        let t = sample_trajectory(&p, 100_000, 9).unwrap();
        assert!(t.symbols.windows(2).all(|w| !(w[0] == 1 && w[1] == 1)));
    }
}
