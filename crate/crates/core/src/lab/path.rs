use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{Process, Symbol};
use crate::stats::entropy_rate;
use crate::trajectory::{SymbolStream, Trajectory};

/// Information `I_n = -log μ(A_n(x))` along one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    pub n_grid: Vec<usize>,
    pub info: Vec<f64>,
    pub recurrence: Option<Vec<u64>>,
    pub seed: u64,
}

pub(crate) fn check_grid(n_grid: &[usize], available: usize) -> Result<()> {
    if n_grid.first() == Some(&0) {
        return Err(Error::InvalidOrder(0));
    }
    if !n_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter("n_grid must be strictly increasing".into()));
    }
    if let Some(&needed) = n_grid.last() {
        if needed > available {
            return Err(Error::GridExceedsTrajectory { needed, available });
        }
    }
    Ok(())
}

/// Streams the log-measure of growing prefixes, summing left to right like
/// [`Process::cylinder_measure`], and records `I_n` at each grid point.
pub fn information_path(process: &Process, trajectory: &Trajectory, n_grid: &[usize]) -> Result<PathStats> {
    check_grid(n_grid, trajectory.len())?;
    let Some(&max_n) = n_grid.last() else {
        return Ok(PathStats {
            n_grid: vec![],
            info: vec![],
            recurrence: None,
            seed: trajectory.seed,
        });
    };
    let symbols = &trajectory.symbols[..max_n];
    process.check_symbols(symbols)?;
    let mut info = Vec::with_capacity(n_grid.len());
    let mut next = n_grid.iter().peekable();
    let mut acc = process.log_initial(symbols[0]);
    if next.peek() == Some(&&1) {
        info.push(-acc);
        next.next();
    }
    for (i, w) in symbols.windows(2).enumerate() {
        acc += process.log_step(w[0], w[1]);
        if next.peek() == Some(&&(i + 2)) {
            info.push(-acc);
            next.next();
        }
    }
    Ok(PathStats {
        n_grid: n_grid.to_vec(),
        info,
        recurrence: None,
        seed: trajectory.seed,
    })
}

/// `I_n` of the first `n` symbols of a stream, without storing them.
pub fn path_information<I: Iterator<Item = Symbol>>(process: &Process, mut symbols: I, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let first = symbols.next().ok_or(Error::GridExceedsTrajectory {
        needed: n,
        available: 0,
    })?;
    let mut acc = process.log_initial(first);
    let mut prev = first;
    for seen in 1..n {
        let s = symbols.next().ok_or(Error::GridExceedsTrajectory {
            needed: n,
            available: seen,
        })?;
        acc += process.log_step(prev, s);
        prev = s;
    }
    Ok(-acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmbReport {
    pub seed: u64,
    pub n: usize,
    /// `I_n / n`
    pub rate: f64,
    pub h: f64,
    pub deviation: f64,
}

/// One long path per seed; `|I_n/n − h|` for each.
pub fn smb_experiment(process: &Process, n: usize, seeds: &[u64]) -> Result<Vec<SmbReport>> {
    let h = entropy_rate(process);
    seeds
        .par_iter()
        .map(|&seed| {
            let info = path_information(process, SymbolStream::new(process, seed), n)?;
            let rate = info / n as f64;
            Ok(SmbReport {
                seed,
                n,
                rate,
                h,
                deviation: (rate - h).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{validate_spec, ProcessSpec, Word};
    use crate::trajectory::sample_trajectory;

    #[test]
    fn uniform_information_is_linear() {
        let p = validate_spec(&ProcessSpec::bernoulli(vec![0.5, 0.5]), Default::default()).unwrap();
        let t = sample_trajectory(&p, 50, 3).unwrap();
        let s = information_path(&p, &t, &[1, 7, 50]).unwrap();
        for (n, i) in s.n_grid.iter().zip(&s.info) {
            assert!((i - *n as f64 * 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_sum_prefix() {
        let p = validate_spec(&ProcessSpec::bernoulli(vec![0.25, 0.75]), Default::default()).unwrap();
        let t = Trajectory {
            seed: 0,
            symbols: vec![1, 1, 0],
        };
        let s = information_path(&p, &t, &[3]).unwrap();
        let expected = 2.0 * (4.0f64 / 3.0).ln() + 4f64.ln();
        assert!((s.info[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn streaming_equals_batch_bitwise() {
        let p = validate_spec(
            &ProcessSpec::markov(None, vec![vec![0.9, 0.1], vec![0.2, 0.8]]),
            Default::default(),
        )
        .unwrap();
        let t = sample_trajectory(&p, 300, 11).unwrap();
        let grid: Vec<usize> = (1..=300).collect();
        let s = information_path(&p, &t, &grid).unwrap();
        for (&n, &i) in grid.iter().zip(&s.info) {
            let w = Word::new(t.symbols[..n].to_vec()).unwrap();
            let batch = p.cylinder_measure(&w).unwrap().information();
            assert_eq!(i.to_bits(), batch.to_bits());
        }
        assert!(s.info.windows(2).all(|w| w[1] >= w[0]));
        let streamed = path_information(&p, t.symbols.iter().copied(), 300).unwrap();
        assert_eq!(streamed.to_bits(), s.info[299].to_bits());
    }

    #[test]
    fn grid_longer_than_path() {
        let p = validate_spec(&ProcessSpec::bernoulli(vec![0.5, 0.5]), Default::default()).unwrap();
        let t = sample_trajectory(&p, 5, 3).unwrap();
        assert_eq!(
            information_path(&p, &t, &[2, 6]),
            Err(Error::GridExceedsTrajectory {
                needed: 6,
                available: 5
            })
        );
    }
}
