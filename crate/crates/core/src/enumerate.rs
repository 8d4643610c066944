//! Depth-first enumeration of positive-measure cylinders and cylinder pairs.
//!
//! Work is split over a fixed set of top-level prefixes and partial results
//! are merged in prefix order, so every reduction is bitwise independent of
//! the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::process::{GapFactors, Process, Symbol};

/// Default cap on the number of cylinders (or cylinder pairs) visited.
pub const DEFAULT_BUDGET: u128 = 1 << 24;

const MIN_SPLIT_PREFIXES: usize = 256;
const PAIR_CHUNK: usize = 512;

/// One positive-measure cylinder, identified by its boundary symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leaf {
    pub log_mu: f64,
    pub first: Symbol,
    pub last: Symbol,
}

impl Leaf {
    #[inline]
    pub fn mu(&self) -> f64 {
        self.log_mu.exp()
    }
}

pub trait Accumulator: Send {
    fn push(&mut self, leaf: &Leaf);
    /// Absorbs a partial result computed on a later part of the tree.
    fn merge(&mut self, other: Self);
}

impl Accumulator for Vec<Leaf> {
    fn push(&mut self, leaf: &Leaf) {
        Vec::push(self, *leaf);
    }

    fn merge(&mut self, mut other: Self) {
        self.append(&mut other);
    }
}

pub fn check_budget(process: &Process, n: usize, budget: u128) -> Result<u128> {
    if n == 0 {
        return Err(Error::InvalidOrder(n));
    }
    let required = process.support_count(n);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(required)
}

#[derive(Clone, Copy)]
struct Prefix {
    first: Symbol,
    last: Symbol,
    log_mu: f64,
    depth: usize,
}

fn grow<A: Accumulator>(process: &Process, node: Prefix, n: usize, acc: &mut A) {
    if node.depth == n {
        acc.push(&Leaf {
            log_mu: node.log_mu,
            first: node.first,
            last: node.last,
        });
        return;
    }
    for a in 0..process.size() as Symbol {
        let step = process.log_step(node.last, a);
        if step == f64::NEG_INFINITY {
            continue;
        }
        grow(
            process,
            Prefix {
                first: node.first,
                last: a,
                log_mu: node.log_mu + step,
                depth: node.depth + 1,
            },
            n,
            acc,
        );
    }
}

fn split_prefixes(process: &Process, n: usize) -> Vec<Prefix> {
    let mut level: Vec<Prefix> = (0..process.size() as Symbol)
        .filter_map(|a| {
            let l = process.log_initial(a);
            (l > f64::NEG_INFINITY).then_some(Prefix {
                first: a,
                last: a,
                log_mu: l,
                depth: 1,
            })
        })
        .collect();
    while level.len() < MIN_SPLIT_PREFIXES && level[0].depth < n {
        let mut next = Vec::with_capacity(level.len() * process.size());
        for p in &level {
            for a in 0..process.size() as Symbol {
                let step = process.log_step(p.last, a);
                if step > f64::NEG_INFINITY {
                    next.push(Prefix {
                        first: p.first,
                        last: a,
                        log_mu: p.log_mu + step,
                        depth: p.depth + 1,
                    });
                }
            }
        }
        level = next;
    }
    level
}

/// Folds every positive-measure n-cylinder into accumulators produced by
/// `make`, in lexicographic word order.
pub fn fold_cylinders<A, F>(process: &Process, n: usize, budget: u128, make: F) -> Result<A>
where
    A: Accumulator,
    F: Fn() -> A + Sync,
{
    check_budget(process, n, budget)?;
    let prefixes = split_prefixes(process, n);
    let partials: Vec<A> = prefixes
        .par_iter()
        .map(|&p| {
            let mut acc = make();
            grow(process, p, n, &mut acc);
            acc
        })
        .collect();
    let mut total = make();
    for part in partials {
        total.merge(part);
    }
    Ok(total)
}

pub fn collect_leaves(process: &Process, n: usize, budget: u128) -> Result<Vec<Leaf>> {
    fold_cylinders(process, n, budget, Vec::new)
}

/// A pair `(B, C)` with `B ∈ 𝒜ⁿ`, `C ∈ T^{-Δ-n}𝒜ᵐ`.
#[derive(Debug, Clone, Copy)]
pub struct PairTerm {
    pub log_b: f64,
    pub log_c: f64,
    pub mu_b: f64,
    pub mu_c: f64,
    /// `log μ(B ∩ C)`, `-inf` when the pair is incompatible.
    pub log_bc: f64,
    /// `log (μ(B ∩ C) / (μ(B) μ(C)))`.
    pub log_ratio: f64,
}

pub trait PairAccumulator: Send {
    fn push(&mut self, pair: &PairTerm);
    /// Called after all partners of one `B` atom were pushed.
    fn end_row(&mut self) {}
    fn merge(&mut self, other: Self);
}

pub fn check_pair_budget(process: &Process, n: usize, m: usize, budget: u128) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidOrder(n));
    }
    if m == 0 {
        return Err(Error::InvalidOrder(m));
    }
    let required = process.support_count(n).saturating_mul(process.support_count(m));
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(())
}

/// Folds every pair of positive-measure cylinders `B ∈ 𝒜ⁿ`, `C ∈ 𝒜ᵐ`
/// placed `gap` symbols apart.
pub fn fold_pairs<A, F>(process: &Process, n: usize, m: usize, gap: u64, budget: u128, make: F) -> Result<A>
where
    A: PairAccumulator,
    F: Fn() -> A + Sync,
{
    check_pair_budget(process, n, m, budget)?;
    let left = collect_leaves(process, n, u128::MAX)?;
    let right = collect_leaves(process, m, u128::MAX)?;
    let right_mu: Vec<f64> = right.iter().map(Leaf::mu).collect();
    let factors = process.gap_factors(gap);
    let partials: Vec<A> = left
        .par_chunks(PAIR_CHUNK)
        .map(|chunk| {
            let mut acc = make();
            for b in chunk {
                push_row(&mut acc, b, &right, &right_mu, &factors);
            }
            acc
        })
        .collect();
    let mut total = make();
    for part in partials {
        total.merge(part);
    }
    Ok(total)
}

#[inline]
fn push_row<A: PairAccumulator>(acc: &mut A, b: &Leaf, right: &[Leaf], right_mu: &[f64], factors: &GapFactors) {
    let mu_b = b.mu();
    for (c, &mu_c) in right.iter().zip(right_mu) {
        let log_ratio = factors.get(b.last, c.first);
        let log_bc = factors.join(b.log_mu, b.last, c.log_mu, c.first);
        acc.push(&PairTerm {
            log_b: b.log_mu,
            log_c: c.log_mu,
            mu_b,
            mu_c,
            log_bc,
            log_ratio,
        });
    }
    acc.end_row();
}
