use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{power_law_exponent, quantile_sorted, sort_floats};
use crate::process::{Process, Symbol};
use crate::seed::path_seed;
use crate::stats::join_entropy_closed;
use crate::trajectory::sample_trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// 1-based block index `j`.
    pub index: usize,
    /// Block length `n_j = ⌊√j⌋`.
    pub len: usize,
    /// Gap after the block, `Δ_j = ⌊n_j^α⌋`.
    pub gap: usize,
    /// Start `N_j`.
    pub start: usize,
}

impl Block {
    pub fn span(&self) -> usize {
        self.len + self.gap
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSchedule {
    pub alpha: f64,
    pub n_total: usize,
    pub q: usize,
    pub blocks: Vec<Block>,
    pub remainder: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

#[inline]
fn floor_pow(n: usize, alpha: f64) -> usize {
    if alpha == 0.5 {
        n.isqrt()
    } else {
        ((n as f64).powf(alpha) + 1e-12).floor() as usize
    }
}

/// Walks the infinite block sequence `(n_j, Δ_j, N_j)`, `j = 1, 2, …`.
#[derive(Debug, Clone)]
pub struct ScheduleCursor {
    alpha: f64,
    next: Block,
}

impl ScheduleCursor {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            next: Self::block(alpha, 1, 0),
        })
    }

    fn block(alpha: f64, index: usize, start: usize) -> Block {
        let len = index.isqrt();
        Block {
            index,
            len,
            gap: floor_pow(len, alpha),
            start,
        }
    }

    pub fn peek(&self) -> Block {
        self.next
    }

    /// Total length covered by the blocks already passed.
    pub fn covered(&self) -> usize {
        self.next.start
    }

    pub fn advance(&mut self) -> Block {
        let b = self.next;
        self.next = Self::block(self.alpha, b.index + 1, b.start + b.span());
        b
    }
}

/// Maximal number `Q` of complete block+gap pairs fitting in `n_total`,
/// with the leftover `r`.
pub fn block_schedule(n_total: usize, alpha: f64) -> Result<BlockSchedule> {
    let mut cursor = ScheduleCursor::new(alpha)?;
    if n_total < 4 {
        return Err(Error::InvalidLength(n_total));
    }
    let mut blocks = Vec::new();
    while cursor.covered() + cursor.peek().span() <= n_total {
        blocks.push(cursor.advance());
    }
    Ok(BlockSchedule {
        alpha,
        n_total,
        q: blocks.len(),
        remainder: n_total - cursor.covered(),
        blocks,
    })
}

/// Log-log slope of `Q_n` against `n`.
pub fn q_growth_exponent(ns: &[usize], alpha: f64) -> Result<Option<f64>> {
    let mut xs = Vec::with_capacity(ns.len());
    let mut ys = Vec::with_capacity(ns.len());
    for &n in ns {
        xs.push(n as f64);
        ys.push(block_schedule(n, alpha)?.q as f64);
    }
    Ok(power_law_exponent(&xs, &ys))
}

fn centered_information(process: &Process, symbols: &[Symbol]) -> f64 {
    -process.log_measure_unchecked(symbols) - join_entropy_closed(process, symbols.len())
}

/// `|J_n(x) − Σ_{j≤Q} J_{n_j}(T^{N_j} x)|` with `J_m = I_m − H(𝒜ᵐ)`.
pub fn block_decomposition_error(process: &Process, symbols: &[Symbol], n: usize, alpha: f64) -> Result<f64> {
    let schedule = block_schedule(n, alpha)?;
    if symbols.len() < n {
        return Err(Error::GridExceedsTrajectory {
            needed: n,
            available: symbols.len(),
        });
    }
    process.check_symbols(&symbols[..n])?;
    let whole = centered_information(process, &symbols[..n]);
    let parts: f64 = schedule
        .blocks
        .iter()
        .map(|b| centered_information(process, &symbols[b.start..b.start + b.len]))
        .sum();
    Ok((whole - parts).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockErrorReport {
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Sorted errors, one per path.
    pub errors: Vec<f64>,
    pub median: f64,
    pub p90: f64,
}

pub fn block_error_experiment(
    process: &Process,
    n: usize,
    alpha: f64,
    paths: usize,
    seed: u64,
) -> Result<BlockErrorReport> {
    if paths == 0 {
        return Err(Error::InvalidParameter("paths must be positive".into()));
    }
    check_alpha(alpha)?;
    let mut errors = (0..paths)
        .into_par_iter()
        .map(|i| {
            let t = sample_trajectory(process, n, path_seed(seed, i as u64))?;
            block_decomposition_error(process, &t.symbols, n, alpha)
        })
        .collect::<Result<Vec<f64>>>()?;
    sort_floats(&mut errors);
    Ok(BlockErrorReport {
        n,
        alpha,
        seed,
        median: quantile_sorted(&errors, 0.5),
        p90: quantile_sorted(&errors, 0.9),
        errors,
    })
}
