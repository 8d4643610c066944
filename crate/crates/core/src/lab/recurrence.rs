use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{quantile_sorted, sort_floats};
use crate::process::{Process, Symbol};
use crate::seed::path_seed;
use crate::stats::entropy_rate;
use crate::trajectory::SymbolStream;

pub const DEFAULT_SCAN_LIMIT: u64 = 1 << 30;
/// Largest tolerated fraction of paths without a recurrence.
pub const MAX_NOT_FOUND_RATE: f64 = 0.01;

const MODULUS: u64 = (1 << 61) - 1;
const BASE: u64 = 0x1F3D_5B79_A2C4_E681 % MODULUS;

#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let r = (p as u64 & MODULUS) + (p >> 61) as u64;
    let r = if r >= MODULUS { r - MODULUS } else { r };
    if r >= MODULUS {
        r - MODULUS
    } else {
        r
    }
}

#[inline]
fn add_mod(a: u64, b: u64) -> u64 {
    let r = a + b;
    if r >= MODULUS {
        r - MODULUS
    } else {
        r
    }
}

/// Polynomial rolling hash over a sliding window of the last `n` symbols.
/// Hash hits are confirmed symbol by symbol against the stored prefix.
pub struct RollingMatcher {
    prefix: Vec<Symbol>,
    target: u64,
    ring: Vec<Symbol>,
    head: usize,
    hash: u64,
    /// `BASE^{n-1}`
    top: u64,
    offset: u64,
}

impl RollingMatcher {
    pub fn new(prefix: &[Symbol]) -> Result<Self> {
        if prefix.is_empty() {
            return Err(Error::InvalidOrder(0));
        }
        let mut hash = 0;
        let mut top = 1;
        for (i, &s) in prefix.iter().enumerate() {
            hash = add_mod(mul_mod(hash, BASE), s as u64 + 1);
            if i > 0 {
                top = mul_mod(top, BASE);
            }
        }
        Ok(Self {
            prefix: prefix.to_vec(),
            target: hash,
            ring: prefix.to_vec(),
            head: 0,
            hash,
            top,
            offset: 0,
        })
    }

    /// Slides the window by one symbol; returns the window offset `k` when
    /// the window equals the prefix.
    #[inline]
    pub fn push(&mut self, symbol: Symbol) -> Option<u64> {
        let n = self.ring.len();
        let out = self.ring[self.head];
        self.ring[self.head] = symbol;
        self.head += 1;
        if self.head == n {
            self.head = 0;
        }
        let drop = mul_mod(out as u64 + 1, self.top);
        let h = add_mod(self.hash, MODULUS - drop);
        self.hash = add_mod(mul_mod(h, BASE), symbol as u64 + 1);
        self.offset += 1;
        (self.hash == self.target && self.window_matches()).then_some(self.offset)
    }

    fn window_matches(&self) -> bool {
        let (tail, head) = self.ring.split_at(self.head);
        let n = head.len();
        head == &self.prefix[..n] && tail == &self.prefix[n..]
    }
}

fn check_inputs(symbols: &[Symbol], n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    if symbols.len() < n {
        return Err(Error::GridExceedsTrajectory {
            needed: n,
            available: symbols.len(),
        });
    }
    Ok(())
}

/// `R_n = min{k ≥ 1 : x_k … x_{k+n-1} = x_0 … x_{n-1}}`, searching offsets
/// up to `scan_limit` (and the end of the path).
pub fn recurrence_time(symbols: &[Symbol], n: usize, scan_limit: u64) -> Result<u64> {
    check_inputs(symbols, n)?;
    let mut matcher = RollingMatcher::new(&symbols[..n])?;
    let end = symbols.len().min(n.saturating_add(scan_limit as usize));
    for &s in &symbols[n..end] {
        if let Some(k) = matcher.push(s) {
            return Ok(k);
        }
    }
    Err(Error::NotFound(scan_limit as usize))
}

/// Direct rescan, `O(window · n)`.
pub fn naive_recurrence_time(symbols: &[Symbol], n: usize, scan_limit: u64) -> Result<u64> {
    check_inputs(symbols, n)?;
    let prefix = &symbols[..n];
    let mut k = 1usize;
    while k as u64 <= scan_limit && k + n <= symbols.len() {
        if &symbols[k..k + n] == prefix {
            return Ok(k as u64);
        }
        k += 1;
    }
    Err(Error::NotFound(scan_limit as usize))
}

/// Draws a path lazily until the first recurrence of its `n`-prefix.
/// Returns `(I_n, R_n)`.
fn stream_recurrence(process: &Process, seed: u64, n: usize, scan_limit: u64) -> (f64, Option<u64>) {
    let mut stream = SymbolStream::new(process, seed);
    let prefix: Vec<Symbol> = stream.by_ref().take(n).collect();
    let info = -process.log_measure_unchecked(&prefix);
    let mut matcher = RollingMatcher::new(&prefix).expect("n ≥ 1");
    for s in stream.take(scan_limit as usize) {
        if let Some(k) = matcher.push(s) {
            return (info, Some(k));
        }
    }
    (info, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceOptions {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub scan_limit: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecurrencePath {
    pub index: usize,
    pub recurrence: Option<u64>,
    pub info: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub options: RecurrenceOptions,
    pub h: f64,
    pub not_found: usize,
    pub not_found_rate: f64,
    /// Median of `log R_n / n` over paths with a recurrence.
    pub median_rate: f64,
    /// `|median_rate − h|`
    pub median_rate_error: f64,
    /// Median of `|log R_n / n − h|`.
    pub median_abs_deviation: f64,
    /// 90th percentile of `|log R_n − I_n|`.
    pub correction_p90: f64,
    pub paths: Vec<RecurrencePath>,
}

impl RecurrenceReport {
    pub fn rate_pass(&self, rel_tol: f64) -> bool {
        self.median_rate_error < rel_tol * self.h
    }

    pub fn correction_pass(&self, frac: f64) -> bool {
        self.correction_p90 < frac * self.options.n as f64 * self.h
    }
}

/// Recurrence times of the `n`-prefix across independent seeded paths.
///
/// Fails with [`Error::NotFoundRate`] when more than 1% of the paths do not
/// recur within `scan_limit`.
pub fn recurrence_experiment(process: &Process, opts: RecurrenceOptions) -> Result<RecurrenceReport> {
    if opts.n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    if opts.samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let h = entropy_rate(process);
    let paths: Vec<RecurrencePath> = (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let (info, recurrence) =
                stream_recurrence(process, path_seed(opts.seed, i as u64), opts.n, opts.scan_limit);
            RecurrencePath {
                index: i,
                recurrence,
                info,
            }
        })
        .collect();
    let not_found = paths.iter().filter(|p| p.recurrence.is_none()).count();
    let not_found_rate = not_found as f64 / opts.samples as f64;
    if not_found_rate > MAX_NOT_FOUND_RATE || not_found == opts.samples {
        return Err(Error::NotFoundRate {
            rate: not_found_rate,
            allowed: MAX_NOT_FOUND_RATE,
        });
    }
    let n = opts.n as f64;
    let mut rates = Vec::new();
    let mut deviations = Vec::new();
    let mut corrections = Vec::new();
    for p in &paths {
        if let Some(r) = p.recurrence {
            let log_r = (r as f64).ln();
            rates.push(log_r / n);
            deviations.push((log_r / n - h).abs());
            corrections.push((log_r - p.info).abs());
        }
    }
    sort_floats(&mut rates);
    sort_floats(&mut deviations);
    sort_floats(&mut corrections);
    let median_rate = quantile_sorted(&rates, 0.5);
    Ok(RecurrenceReport {
        options: opts,
        h,
        not_found,
        not_found_rate,
        median_rate,
        median_rate_error: (median_rate - h).abs(),
        median_abs_deviation: quantile_sorted(&deviations, 0.5),
        correction_p90: quantile_sorted(&corrections, 0.9),
        paths,
    })
}
