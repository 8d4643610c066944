//! β-mixing coefficients, atom-level ψ/φ, weak-Bernoulli thresholds and the
//! pair discrepancy functional.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{power_law_exponent, CompensatedSum};
use crate::pairs::PairStats;
use crate::process::Process;
use crate::stats::join_entropy;

/// Slack allowed when checking that a curve does not increase.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingCurve {
    pub gaps: Vec<u64>,
    pub beta: Vec<f64>,
    pub psi_atom: Option<Vec<f64>>,
    pub phi_atom: Option<Vec<f64>>,
    /// `p` in `β(Δ) ≈ c Δ^{-p}`, from a log-log fit over positive gaps.
    pub fitted_power: Option<f64>,
}

impl MixingCurve {
    pub fn new(gaps: Vec<u64>, beta: Vec<f64>, psi_atom: Option<Vec<f64>>, phi_atom: Option<Vec<f64>>) -> Self {
        let fitted_power = fit_power(&gaps, &beta);
        Self {
            gaps,
            beta,
            psi_atom,
            phi_atom,
            fitted_power,
        }
    }

    pub fn is_non_increasing(&self) -> bool {
        self.beta.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK)
    }

    pub fn check(&self) -> Result<()> {
        if self.gaps.len() != self.beta.len() {
            return Err(Error::Dimension("gaps and beta differ in length".into()));
        }
        if !self.gaps.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("gaps must be strictly increasing".into()));
        }
        if let Some(bad) = self
            .beta
            .iter()
            .find(|b| !(-MONOTONE_SLACK..=2.0 + MONOTONE_SLACK).contains(*b))
        {
            return Err(Error::InvalidParameter(format!("β value {bad} outside [0, 2]")));
        }
        if !self.is_non_increasing() {
            return Err(Error::InvalidParameter("β curve increases".into()));
        }
        Ok(())
    }
}

fn fit_power(gaps: &[u64], beta: &[f64]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = gaps
        .iter()
        .zip(beta)
        .filter(|(g, b)| **g > 0 && **b > 0.0)
        .map(|(g, b)| (*g as f64, *b))
        .unzip();
    power_law_exponent(&xs, &ys).map(|s| -s)
}

/// `{0, 1, 2, 4, …}` up to and including `max` when it is a power of two.
pub fn doubling_grid(max: u64) -> Vec<u64> {
    let mut grid = vec![0];
    let mut g = 1;
    while g <= max {
        grid.push(g);
        g *= 2;
    }
    grid
}

/// `Σ_{B,C} |μ(B∩C) − μ(B)μ(C)|` over `𝒜ⁿ × T^{-Δ-n}𝒜ᵐ`.
pub fn beta_bruteforce(process: &Process, n: usize, m: usize, gap: u64, budget: u128) -> Result<f64> {
    Ok(PairStats::compute(process, n, m, gap, &[], &[], budget)?.beta.value())
}

/// `β(Δ) = Σ_b p_b Σ_c |(P^{Δ+1})_{bc} − p_c|`; zero for Bernoulli.
pub fn beta_markov_closed(process: &Process, gap: u64) -> f64 {
    if process.is_bernoulli() {
        return 0.0;
    }
    let g = process.transition_power(gap + 1);
    let p = process.stationary();
    let mut acc = CompensatedSum::new();
    for b in 0..p.len() {
        let mut row = CompensatedSum::new();
        for c in 0..p.len() {
            row.add((g[(b, c)] - p[c]).abs());
        }
        acc.add(p[b] * row.value());
    }
    acc.value()
}

/// Atom-level coefficients for one `(n, m, Δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomCoefficients {
    pub beta: f64,
    /// `max |ρ(B, C)|`.
    pub alpha: f64,
    /// `max |μ(B∩C)/(μ(B)μ(C)) − 1|`, zero-measure atoms skipped.
    pub psi: f64,
    /// `max_B ½ Σ_C |μ(B∩C)/μ(B) − μ(C)|`.
    pub phi: f64,
}

pub fn atom_coefficients(process: &Process, n: usize, m: usize, gap: u64, budget: u128) -> Result<AtomCoefficients> {
    let s = PairStats::compute(process, n, m, gap, &[], &[], budget)?;
    Ok(AtomCoefficients {
        beta: s.beta.value(),
        alpha: s.alpha_atom,
        psi: s.psi_atom,
        phi: s.phi_atom,
    })
}

/// `(ψ_atom, φ_atom)` by enumeration.
pub fn atom_psi_phi(process: &Process, n: usize, m: usize, gap: u64, budget: u128) -> Result<(f64, f64)> {
    let c = atom_coefficients(process, n, m, gap, budget)?;
    Ok((c.psi, c.phi))
}

/// `(ψ_atom, φ_atom)` from `G = P^{Δ+1}`: `max_{bc} |G_bc/p_c − 1|` and
/// `max_b ½ Σ_c |G_bc − p_c|`. Both are independent of `n, m`.
pub fn psi_phi_markov_closed(process: &Process, gap: u64) -> (f64, f64) {
    if process.is_bernoulli() {
        return (0.0, 0.0);
    }
    let g = process.transition_power(gap + 1);
    let p = process.stationary();
    let mut psi = 0.0f64;
    let mut phi = 0.0f64;
    for b in 0..p.len() {
        let mut row = CompensatedSum::new();
        for c in 0..p.len() {
            psi = psi.max((g[(b, c)] / p[c] - 1.0).abs());
            row.add((g[(b, c)] - p[c]).abs());
        }
        phi = phi.max(0.5 * row.value());
    }
    (psi, phi)
}

/// Smallest tabulated gap with `β(Δ) ≤ ε`.
pub fn weak_bernoulli_threshold(curve: &MixingCurve, eps: f64) -> Result<u64> {
    curve
        .gaps
        .iter()
        .zip(&curve.beta)
        .find(|(_, b)| **b <= eps)
        .map(|(g, _)| *g)
        .ok_or(Error::NotReached(eps))
}

/// β, ψ_atom and φ_atom from the Markov closed forms.
pub fn mixing_curve_closed(process: &Process, gaps: &[u64]) -> MixingCurve {
    let beta = gaps.iter().map(|&g| beta_markov_closed(process, g)).collect();
    let (psi, phi) = gaps.iter().map(|&g| psi_phi_markov_closed(process, g)).unzip();
    MixingCurve::new(gaps.to_vec(), beta, Some(psi), Some(phi))
}

/// β, ψ_atom and φ_atom by pair enumeration at fixed `(n, m)`.
pub fn mixing_curve_bruteforce(
    process: &Process,
    n: usize,
    m: usize,
    gaps: &[u64],
    budget: u128,
) -> Result<MixingCurve> {
    let mut beta = Vec::with_capacity(gaps.len());
    let mut psi = Vec::with_capacity(gaps.len());
    let mut phi = Vec::with_capacity(gaps.len());
    for &g in gaps {
        let c = atom_coefficients(process, n, m, g, budget)?;
        beta.push(c.beta);
        psi.push(c.psi);
        phi.push(c.phi);
    }
    Ok(MixingCurve::new(gaps.to_vec(), beta, Some(psi), Some(phi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDiscrepancy {
    pub n: usize,
    pub m: usize,
    pub gap: u64,
    pub a: f64,
    pub value: f64,
}

/// `Σ μ(B∩C) |log(1 + ρ(B,C)/(μ(B)μ(C)))|^a`.
pub fn rho_discrepancy(
    process: &Process,
    n: usize,
    m: usize,
    gap: u64,
    a: f64,
    budget: u128,
) -> Result<PairDiscrepancy> {
    if !(a >= 1.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent a={a} must be ≥ 1")));
    }
    let s = PairStats::compute(process, n, m, gap, &[], &[a], budget)?;
    Ok(PairDiscrepancy {
        n,
        m,
        gap,
        a,
        value: s.discrepancy(a).expect("requested exponent present"),
    })
}

/// `|H(𝒜ⁿ ∨ T^{-Δ-n}𝒜ⁿ) − 2H(𝒜ⁿ)|`.
pub fn entropy_additivity_defect(process: &Process, n: usize, gap: u64, budget: u128) -> Result<f64> {
    let s = PairStats::compute(process, n, n, gap, &[], &[], budget)?;
    let h = join_entropy(process, n, budget)?;
    Ok((s.entropy_join.value() - 2.0 * h).abs())
}
