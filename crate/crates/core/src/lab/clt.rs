use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ks_distance_sorted, normal_cdf, sort_floats, summarize, CompensatedSum, Summary};
use crate::process::Process;
use crate::seed::path_seed;
use crate::stats::{entropy_rate, join_entropy_closed, limit_variance_formula, moment_row};
use crate::trajectory::SymbolStream;

use super::path::path_information;

pub const MIN_CLT_SAMPLES: usize = 100;
/// Limiting variances below this are treated as zero.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;

fn information_sample(process: &Process, n: usize, samples: usize, seed: u64) -> Result<Vec<f64>> {
    (0..samples)
        .into_par_iter()
        .map(|i| path_information(process, SymbolStream::new(process, path_seed(seed, i as u64)), n))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub standardized: Summary,
    pub ks_distance: f64,
    pub h_used: f64,
    pub sigma_used: f64,
    /// Sorted `(I_n − n h)/(σ √n)`.
    pub sample: Vec<f64>,
}

impl CltReport {
    /// `|mean| < 3/√N`
    pub fn mean_within_band(&self) -> bool {
        self.standardized.mean.abs() < 3.0 / (self.samples as f64).sqrt()
    }
}

/// Standardizes `I_n` over independent paths with the closed-form `h` and
/// `σ` and measures the Kolmogorov–Smirnov distance to `N(0, 1)`.
pub fn clt_experiment(process: &Process, n: usize, samples: usize, seed: u64) -> Result<CltReport> {
    if samples < MIN_CLT_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "samples={samples}; at least {MIN_CLT_SAMPLES} required"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let (sigma2, _) = limit_variance_formula(process)?;
    if sigma2 < DEGENERATE_VARIANCE {
        return Err(Error::DegenerateVariance);
    }
    let h = entropy_rate(process);
    let sigma = sigma2.sqrt();
    let scale = sigma * (n as f64).sqrt();
    let center = n as f64 * h;
    let mut sample: Vec<f64> = information_sample(process, n, samples, seed)?
        .into_iter()
        .map(|i| (i - center) / scale)
        .collect();
    let standardized = summarize(&sample);
    sort_floats(&mut sample);
    Ok(CltReport {
        n,
        samples,
        seed,
        standardized,
        ks_distance: ks_distance_sorted(&sample, normal_cdf),
        h_used: h,
        sigma_used: sigma,
        sample,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloVariance {
    pub n: usize,
    pub samples: usize,
    /// Sample variance of `I_n`, divided by `n`.
    pub var_over_n: f64,
    pub standard_error: f64,
}

/// Monte Carlo estimate of `σ²(𝒜ⁿ)/n` for `n` beyond enumeration reach.
pub fn variance_monte_carlo(process: &Process, n: usize, samples: usize, seed: u64) -> Result<MonteCarloVariance> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let xs = information_sample(process, n, samples, seed)?;
    let s = summarize(&xs);
    let m4 = xs
        .iter()
        .map(|x| (x - s.mean).powi(4))
        .collect::<CompensatedSum>()
        .value()
        / samples as f64;
    let var = s.variance * samples as f64 / (samples - 1) as f64;
    let se = ((m4 - s.variance * s.variance).max(0.0) / samples as f64).sqrt();
    Ok(MonteCarloVariance {
        n,
        samples,
        var_over_n: var / n as f64,
        standard_error: se / n as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentGrowthReport {
    pub q: f64,
    /// `(n, M_q(𝒜ⁿ), M_q(𝒜ⁿ)/n^{q/2})`
    pub rows: Vec<(usize, f64, f64)>,
    pub max_min_ratio: f64,
}

/// Exact `M_q(𝒜ⁿ)/n^{q/2}` over a grid of `n`.
pub fn moment_growth_experiment(
    process: &Process,
    q: f64,
    n_grid: &[usize],
    budget: u128,
) -> Result<MomentGrowthReport> {
    if n_grid.is_empty() {
        return Err(Error::InvalidParameter("empty n_grid".into()));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let row = moment_row(process, n, &[], &[q], budget)?;
        let m = row.m(q).expect("requested order present");
        rows.push((n, m, m / (n as f64).powf(q / 2.0)));
    }
    let max = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let max_min_ratio = if min > 0.0 {
        max / min
    } else if max == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(MomentGrowthReport { q, rows, max_min_ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LilReport {
    pub n_max: usize,
    pub seed: u64,
    /// `max_{3 ≤ n ≤ n_max} |J_n| / √(2 n log log n)`
    pub max_ratio: f64,
    pub argmax: usize,
    /// Limiting `σ`; the ratio should hover around it.
    pub sigma: f64,
}

/// Trend diagnostic along a single path; carries no pass/fail.
pub fn lil_diagnostic(process: &Process, n_max: usize, seed: u64) -> Result<LilReport> {
    if n_max < 3 {
        return Err(Error::InvalidOrder(n_max));
    }
    let (sigma2, _) = limit_variance_formula(process)?;
    let marginal = join_entropy_closed(process, 1);
    let h = entropy_rate(process);
    let mut stream = SymbolStream::new(process, seed);
    let first = stream.next().expect("infinite stream");
    let mut acc = process.log_initial(first);
    let mut prev = first;
    let mut best = (0.0f64, 0usize);
    for n in 2..=n_max {
        let s = stream.next().expect("infinite stream");
        acc += process.log_step(prev, s);
        prev = s;
        if n >= 3 {
            let nf = n as f64;
            let j = -acc - (marginal + (nf - 1.0) * h);
            let ratio = j.abs() / (2.0 * nf * nf.ln().ln()).sqrt();
            if ratio > best.0 {
                best = (ratio, n);
            }
        }
    }
    Ok(LilReport {
        n_max,
        seed,
        max_ratio: best.0,
        argmax: best.1,
        sigma: sigma2.sqrt(),
    })
}
