//! Exact entropy, moment scales `K_w`, centered moments `M_ℓ`, finite-n
//! variance and the closed-form limiting variance of the information
//! function.

use serde::{Deserialize, Serialize};

use crate::enumerate::{fold_cylinders, Accumulator, Leaf};
use crate::error::{Error, Result};
use crate::numeric::{linear_fit, CompensatedSum, LinearFit, WeightedMean};
use crate::pairs::{pow_abs, PairStats};
use crate::process::Process;

/// Series terms below this magnitude end the Markov covariance sum.
pub const SERIES_TOLERANCE: f64 = 1e-14;
pub const SERIES_CAP: usize = 10_000;
/// Number of largest orders used by the `a + b n^{-1/4}` extrapolation.
pub const EXTRAPOLATION_POINTS: usize = 8;

/// Closed-form entropy rate in nats.
pub fn entropy_rate(process: &Process) -> f64 {
    let k = process.size() as u32;
    let pi = process.stationary();
    let mut acc = CompensatedSum::new();
    if process.is_bernoulli() {
        for &p in pi {
            if p > 0.0 {
                acc.add(-p * p.ln());
            }
        }
    } else {
        for i in 0..k {
            for j in 0..k {
                let pij = process.transition(i, j);
                if pij > 0.0 {
                    acc.add(-pi[i as usize] * pij * pij.ln());
                }
            }
        }
    }
    acc.value()
}

/// Shannon entropy of the one-symbol marginal, `H(𝒜)`.
pub fn marginal_entropy(process: &Process) -> f64 {
    process
        .stationary()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .collect::<CompensatedSum>()
        .value()
}

/// `H(𝒜ⁿ) = H(𝒜) + (n - 1) h`, exact for Bernoulli and Markov shifts.
pub fn join_entropy_closed(process: &Process, n: usize) -> f64 {
    marginal_entropy(process) + (n as f64 - 1.0) * entropy_rate(process)
}

/// First pass: weighted mean of the information and raw moments `K_w`.
#[derive(Clone)]
struct RawMoments {
    ws: Vec<f64>,
    mean: WeightedMean,
    k: Vec<CompensatedSum>,
    max_mu: f64,
}

impl Accumulator for RawMoments {
    #[inline]
    fn push(&mut self, leaf: &Leaf) {
        let mu = leaf.mu();
        let info = -leaf.log_mu;
        self.mean.add(info, mu);
        self.max_mu = self.max_mu.max(mu);
        for (acc, &w) in self.k.iter_mut().zip(&self.ws) {
            acc.add(mu * pow_abs(info, w));
        }
    }

    fn merge(&mut self, other: Self) {
        self.mean.merge(&other.mean);
        self.max_mu = self.max_mu.max(other.max_mu);
        for (a, b) in self.k.iter_mut().zip(&other.k) {
            a.merge(b);
        }
    }
}

/// Second pass: absolute centered moments `M_ℓ`.
#[derive(Clone)]
struct CenteredMoments {
    center: f64,
    ells: Vec<f64>,
    m: Vec<CompensatedSum>,
}

impl Accumulator for CenteredMoments {
    #[inline]
    fn push(&mut self, leaf: &Leaf) {
        let mu = leaf.mu();
        let j = -leaf.log_mu - self.center;
        for (acc, &l) in self.m.iter_mut().zip(&self.ells) {
            acc.add(mu * pow_abs(j, l));
        }
    }

    fn merge(&mut self, other: Self) {
        for (a, b) in self.m.iter_mut().zip(&other.m) {
            a.merge(b);
        }
    }
}

/// Statistics of the join `𝒜ⁿ` for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: usize,
    /// `H(𝒜ⁿ)` in nats.
    pub entropy: f64,
    /// `(w, K_w(𝒜ⁿ))`; always contains `w = 1` equal to `entropy`.
    pub k: Vec<(f64, f64)>,
    /// `(ℓ, M_ℓ(𝒜ⁿ))`; always contains `ℓ = 2` equal to `var_n`.
    pub m: Vec<(f64, f64)>,
    /// `σ²(𝒜ⁿ)`.
    pub var_n: f64,
    /// Largest cylinder measure in `𝒜ⁿ`.
    pub max_measure: f64,
}

impl MomentRow {
    pub fn k(&self, w: f64) -> Option<f64> {
        self.k.iter().find(|(x, _)| *x == w).map(|(_, v)| *v)
    }

    pub fn m(&self, ell: f64) -> Option<f64> {
        self.m.iter().find(|(x, _)| *x == ell).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub rows: Vec<MomentRow>,
}

impl MomentTable {
    pub fn row(&self, n: usize) -> Option<&MomentRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// Enumerates `𝒜ⁿ` twice and returns entropy, `K_w` and `M_ℓ`.
pub fn moment_row(process: &Process, n: usize, ws: &[f64], ells: &[f64], budget: u128) -> Result<MomentRow> {
    let mut k_orders: Vec<f64> = vec![2.0];
    k_orders.extend(ws.iter().copied().filter(|&w| w != 1.0 && w != 2.0));
    for &w in &k_orders {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidParameter(format!("moment order w={w}")));
        }
    }
    let raw = fold_cylinders(process, n, budget, || RawMoments {
        ws: k_orders.clone(),
        mean: WeightedMean::default(),
        k: vec![CompensatedSum::new(); k_orders.len()],
        max_mu: 0.0,
    })?;
    let entropy = raw.mean.mean();

    let mut m_orders: Vec<f64> = vec![2.0];
    m_orders.extend(ells.iter().copied().filter(|&l| l != 2.0));
    for &l in &m_orders {
        if !(l >= 1.0 && l.is_finite()) {
            return Err(Error::InvalidParameter(format!("centered moment order ℓ={l}")));
        }
    }
    let centered = fold_cylinders(process, n, budget, || CenteredMoments {
        center: entropy,
        ells: m_orders.clone(),
        m: vec![CompensatedSum::new(); m_orders.len()],
    })?;
    let var_n = centered.m[0].value();

    let mut k = vec![(1.0, entropy)];
    k.extend(k_orders.iter().zip(&raw.k).map(|(&w, s)| (w, s.value())));
    let m = m_orders.iter().zip(&centered.m).map(|(&l, s)| (l, s.value())).collect();
    Ok(MomentRow {
        n,
        entropy,
        k,
        m,
        var_n,
        max_measure: raw.max_mu,
    })
}

pub fn moment_table(process: &Process, ns: &[usize], ws: &[f64], ells: &[f64], budget: u128) -> Result<MomentTable> {
    let rows = ns
        .iter()
        .map(|&n| moment_row(process, n, ws, ells, budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentTable { rows })
}

/// `H(𝒜ⁿ)` by pruned enumeration.
pub fn join_entropy(process: &Process, n: usize, budget: u128) -> Result<f64> {
    Ok(moment_row(process, n, &[], &[], budget)?.entropy)
}

/// `K_w(𝒜ⁿ)` by enumeration; `w` need not be an integer.
pub fn moment_k(process: &Process, n: usize, w: f64, budget: u128) -> Result<f64> {
    let row = moment_row(process, n, &[w], &[], budget)?;
    Ok(row.k(w).expect("requested order present"))
}

/// `M_ℓ(𝒜ⁿ) = Σ μ(B) |J(B)|^ℓ` with `J = -log μ - H(𝒜ⁿ)`.
pub fn centered_moment_m(process: &Process, n: usize, ell: f64, budget: u128) -> Result<f64> {
    let row = moment_row(process, n, &[], &[ell], budget)?;
    Ok(row.m(ell).expect("requested order present"))
}

/// `K_w(𝒞|𝓑)` for `𝓑 = 𝒜ⁿ`, `𝒞 = T^{-Δ-n}𝒜ᵐ`.
pub fn conditional_k(process: &Process, n: usize, m: usize, gap: u64, w: f64, budget: u128) -> Result<f64> {
    let stats = PairStats::compute(process, n, m, gap, &[w], &[], budget)?;
    Ok(stats.k_cond(w).expect("requested order present"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceMethod {
    Formula,
    Extrapolation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub sigma2_limit: f64,
    /// `(n, σ²(𝒜ⁿ)/n)` for every enumerable `n`.
    pub sigma2_by_n: Vec<(usize, f64)>,
    /// Exponent of the power-law fit to `|σ² - σ²(𝒜ⁿ)/n|` over `n ≥ 8`
    /// (all `n` when fewer are available); `None` when the deviations
    /// vanish to rounding.
    pub fitted_rate: Option<f64>,
    /// `(a, b)` of the least-squares fit `σ²(𝒜ⁿ)/n ≈ a + b n^{-1/4}` over
    /// the largest available orders.
    pub extrapolation: Option<(f64, f64)>,
    pub method: VarianceMethod,
    /// Number of covariance terms summed (Markov formula only).
    pub series_terms: usize,
    /// Tail mass of a truncated alphabet, to be added to error bars.
    pub tail_mass: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct VarianceOptions {
    /// Largest `n` for the finite-n sequence.
    pub max_n: usize,
    pub budget: u128,
}

impl Default for VarianceOptions {
    fn default() -> Self {
        Self {
            max_n: 20,
            budget: crate::enumerate::DEFAULT_BUDGET,
        }
    }
}

/// Limiting variance from the closed form:
///
/// * Bernoulli: `σ² = ½ Σ_{ij} p_i p_j log²(p_i/p_j)`.
/// * Markov: `σ² = Var(Y₁) + 2 Σ_{d≥1} Cov(Y₁, Y_{1+d})` with
///   `Y_t = -log P_{x_{t-1} x_t}`, i.e. the single-step variance
///   `½ Σ p_i P_ij p_k P_kl log²(P_ij/P_kl)` plus twice the sum over
///   words of length `k ≥ 3` of `μ(x)(log P_{x₁x₂} log P_{x_{k-1}x_k} - h²)`.
pub fn limit_variance_formula(process: &Process) -> Result<(f64, usize)> {
    let pi = process.stationary();
    let k = process.size();
    if process.is_bernoulli() {
        if k <= 2048 {
            let mut acc = CompensatedSum::new();
            for i in 0..k {
                for j in 0..k {
                    if pi[i] > 0.0 && pi[j] > 0.0 {
                        let r = (pi[i] / pi[j]).ln();
                        acc.add(pi[i] * pi[j] * r * r);
                    }
                }
            }
            return Ok((0.5 * acc.value(), 0));
        }
        let h = entropy_rate(process);
        let v = pi
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| {
                let d = -p.ln() - h;
                p * d * d
            })
            .collect::<CompensatedSum>()
            .value();
        return Ok((v, 0));
    }

    let h = entropy_rate(process);
    let info = |i: usize, j: usize| -process.transition(i as u32, j as u32).ln();
    // single-step variance, centered form of the pairwise double sum
    let mut single = CompensatedSum::new();
    // a_j = Σ_i p_i P_ij g_ij ; v_l = Σ_m P_lm g_lm
    let mut a = vec![0.0; k];
    let mut v = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            let pij = process.transition(i as u32, j as u32);
            if pij > 0.0 {
                let g = info(i, j);
                let d = g - h;
                single.add(pi[i] * pij * d * d);
                a[j] += pi[i] * pij * g;
                v[i] += pij * g;
            }
        }
    }
    let mut covariance = CompensatedSum::new();
    let mut u = v;
    let mut terms = 0;
    loop {
        let mut e = CompensatedSum::new();
        for j in 0..k {
            e.add(a[j] * u[j]);
        }
        let term = e.value() - h * h;
        covariance.add(term);
        terms += 1;
        if term.abs() < SERIES_TOLERANCE {
            break;
        }
        if terms >= SERIES_CAP {
            return Err(Error::SeriesNotConverged(SERIES_CAP));
        }
        let next: Vec<f64> = (0..k)
            .map(|l| (0..k).map(|m| process.transition(l as u32, m as u32) * u[m]).sum())
            .collect();
        u = next;
    }
    Ok((single.value() + 2.0 * covariance.value(), terms))
}

/// Finite-n sequence `σ²(𝒜ⁿ)/n` for `n = 1..=max_n` (stopping at the
/// enumeration budget).
pub fn finite_variances(process: &Process, max_n: usize, budget: u128) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        match moment_row(process, n, &[], &[], budget) {
            Ok(row) => out.push((n, row.var_n / n as f64)),
            Err(Error::BudgetExceeded { .. }) if n > 1 => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Least-squares `a + b n^{-1/4}` over the largest [`EXTRAPOLATION_POINTS`] orders.
pub fn extrapolate_quarter_power(seq: &[(usize, f64)]) -> Option<(f64, f64)> {
    let tail = &seq[seq.len().saturating_sub(EXTRAPOLATION_POINTS)..];
    let xs: Vec<f64> = tail.iter().map(|(n, _)| (*n as f64).powf(-0.25)).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, v)| *v).collect();
    linear_fit(&xs, &ys).map(|f| (f.intercept, f.slope))
}

/// Log-log least-squares fit of `|limit - v_n|` against `n` over `n ≥ 8`
/// (all `n` when fewer than two such orders exist), ignoring deviations
/// below `1e-12`.
pub fn deviation_fit(seq: &[(usize, f64)], limit: f64) -> Option<LinearFit> {
    let pick = |min_n: usize| -> (Vec<f64>, Vec<f64>) {
        seq.iter()
            .filter(|(n, v)| *n >= min_n && (limit - v).abs() > 1e-12)
            .map(|(n, v)| ((*n as f64).ln(), (limit - v).abs().ln()))
            .unzip()
    };
    let (mut xs, mut ys) = pick(8);
    if xs.len() < 2 {
        (xs, ys) = pick(1);
    }
    linear_fit(&xs, &ys)
}

/// Exponent of [`deviation_fit`].
pub fn deviation_rate(seq: &[(usize, f64)], limit: f64) -> Option<f64> {
    deviation_fit(seq, limit).map(|f| f.slope)
}

pub fn limit_variance(process: &Process, opts: VarianceOptions) -> Result<VarianceReport> {
    let (sigma2, terms) = limit_variance_formula(process)?;
    let seq = finite_variances(process, opts.max_n, opts.budget)?;
    Ok(VarianceReport {
        sigma2_limit: sigma2,
        fitted_rate: deviation_rate(&seq, sigma2),
        extrapolation: extrapolate_quarter_power(&seq),
        sigma2_by_n: seq,
        method: VarianceMethod::Formula,
        series_terms: terms,
        tail_mass: process.alphabet().tail_mass(),
    })
}

/// Variance estimate purely from the finite-n sequence, for use when the
/// closed form is unavailable.
pub fn extrapolate_variance(process: &Process, opts: VarianceOptions) -> Result<VarianceReport> {
    let seq = finite_variances(process, opts.max_n, opts.budget)?;
    let (a, b) = extrapolate_quarter_power(&seq)
        .ok_or_else(|| Error::InvalidParameter("need at least two orders to extrapolate".into()))?;
    Ok(VarianceReport {
        sigma2_limit: a.max(0.0),
        fitted_rate: deviation_rate(&seq, a),
        extrapolation: Some((a, b)),
        sigma2_by_n: seq,
        method: VarianceMethod::Extrapolation,
        series_terms: 0,
        tail_mass: process.alphabet().tail_mass(),
    })
}

/// Slacks of the three subadditivity inequalities for `𝓑 = 𝒜ⁿ`,
/// `𝒞 = T^{-Δ-n}𝒜ᵐ`; each is nonnegative when the inequality holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityReport {
    pub n: usize,
    pub m: usize,
    pub gap: u64,
    pub w: f64,
    pub k_b: f64,
    pub k_c: f64,
    pub k_cond: f64,
    pub k_join: f64,
    /// `K_w(𝒞) - K_w(𝒞|𝓑)`
    pub slack_conditional: f64,
    /// `K_w(𝒞|𝓑)^{1/w} + K_w(𝓑)^{1/w} - K_w(𝓑∨𝒞)^{1/w}`
    pub slack_chain: f64,
    /// `K_w(𝒞)^{1/w} + K_w(𝓑)^{1/w} - K_w(𝓑∨𝒞)^{1/w}`
    pub slack_join: f64,
    /// Whether every atom of `𝒞` has measure at most `e^{-w}`; the
    /// conditional inequality relies on it for `w > 1`.
    pub convention_holds: bool,
}

impl SubadditivityReport {
    pub fn min_slack(&self) -> f64 {
        self.slack_conditional.min(self.slack_chain).min(self.slack_join)
    }
}

pub fn subadditivity_check(
    process: &Process,
    n: usize,
    m: usize,
    gap: u64,
    w: f64,
    budget: u128,
) -> Result<SubadditivityReport> {
    Ok(subadditivity_reports(process, n, m, gap, &[w], budget)?.remove(0))
}

/// [`subadditivity_check`] for several `w` sharing one pair enumeration.
pub fn subadditivity_reports(
    process: &Process,
    n: usize,
    m: usize,
    gap: u64,
    ws: &[f64],
    budget: u128,
) -> Result<Vec<SubadditivityReport>> {
    if let Some(w) = ws.iter().find(|w| !(**w >= 1.0 && w.is_finite())) {
        return Err(Error::InvalidParameter(format!("w={w} must be ≥ 1")));
    }
    let row_b = moment_row(process, n, ws, &[], budget)?;
    let row_c = moment_row(process, m, ws, &[], budget)?;
    let pairs = PairStats::compute(process, n, m, gap, ws, &[], budget)?;
    Ok(ws
        .iter()
        .map(|&w| {
            let k_b = row_b.k(w).expect("present");
            let k_c = row_c.k(w).expect("present");
            let k_cond = pairs.k_cond(w).expect("present");
            let k_join = pairs.k_join(w).expect("present");
            let root = |x: f64| x.powf(1.0 / w);
            SubadditivityReport {
                n,
                m,
                gap,
                w,
                k_b,
                k_c,
                k_cond,
                k_join,
                slack_conditional: k_c - k_cond,
                slack_chain: root(k_cond) + root(k_b) - root(k_join),
                slack_join: root(k_c) + root(k_b) - root(k_join),
                convention_holds: row_c.max_measure <= (-w).exp(),
            }
        })
        .collect())
}

/// `‖f - f_n‖_{L¹}` where `f_n = log P(x₀ | x₋₁ … x₋ₙ)`.
///
/// Bernoulli processes have no memory, so the gap is 0 for every `n`;
/// Markov processes have one-step memory, so it is 0 for `n ≥ 1` and
/// `Σ p_i P_ij |log P_ij - log p_j|` for `n = 0`.
pub fn conditional_prob_gap(process: &Process, n: usize) -> f64 {
    if process.is_bernoulli() || n >= 1 {
        return 0.0;
    }
    let pi = process.stationary();
    let k = process.size();
    let mut acc = CompensatedSum::new();
    for i in 0..k {
        for j in 0..k {
            let pij = process.transition(i as u32, j as u32);
            if pij > 0.0 {
                acc.add(pi[i] * pij * (pij.ln() - pi[j].ln()).abs());
            }
        }
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_BUDGET;
    use crate::process::{validate_spec, ProcessSpec};

    fn bern(w: &[f64]) -> Process {
        validate_spec(&ProcessSpec::bernoulli(w.to_vec()), Default::default()).unwrap()
    }

    fn chain() -> Process {
        validate_spec(
            &ProcessSpec::markov(None, vec![vec![0.9, 0.1], vec![0.2, 0.8]]),
            Default::default(),
        )
        .unwrap()
    }

    #[test]
    fn entropy_rate_examples() {
        assert!((entropy_rate(&bern(&[0.5, 0.5])) - 2f64.ln()).abs() < 1e-15);
        // ¼ log 4 + ¾ log(4/3)
        let expected = 0.25 * 4f64.ln() + 0.75 * (4.0f64 / 3.0).ln();
        assert!((entropy_rate(&bern(&[0.25, 0.75])) - expected).abs() < 1e-15);
        assert!((expected - 0.562335).abs() < 1e-6);
        assert!((entropy_rate(&chain()) - 0.383523).abs() < 1e-6);
    }

    #[test]
    fn join_entropy_examples() {
        let h = join_entropy(&bern(&[0.5, 0.5]), 5, DEFAULT_BUDGET).unwrap();
        assert!((h - 5.0 * 2f64.ln()).abs() < 1e-13);
        let h3 = join_entropy(&chain(), 3, DEFAULT_BUDGET).unwrap();
        assert!((h3 - 1.403560).abs() < 1e-6);
        assert!((h3 - join_entropy_closed(&chain(), 3)).abs() < 1e-13);
        assert_eq!(join_entropy(&chain(), 0, DEFAULT_BUDGET), Err(Error::InvalidOrder(0)));
    }

    #[test]
    fn moment_k_examples() {
        let b = bern(&[0.5, 0.5]);
        let k = moment_k(&b, 4, 3.0, DEFAULT_BUDGET).unwrap();
        assert!((k - (4.0 * 2f64.ln()).powi(3)).abs() < 1e-12);
        assert!((moment_k(&chain(), 6, 0.0, DEFAULT_BUDGET).unwrap() - 1.0).abs() < 1e-14);

        // four-term hand sum Σ p_i P_ij (log p_i P_ij)²
        let p = [2.0 / 3.0, 1.0 / 3.0];
        let t = [[0.9, 0.1], [0.2, 0.8]];
        let mut oracle = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let m: f64 = p[i] * t[i][j];
                oracle += m * m.ln().powi(2);
            }
        }
        let k = moment_k(&chain(), 2, 2.0, DEFAULT_BUDGET).unwrap();
        assert!((k - oracle).abs() < 1e-14);
    }

    #[test]
    fn centered_moment_examples() {
        assert!(centered_moment_m(&bern(&[0.5, 0.5]), 7, 2.0, DEFAULT_BUDGET).unwrap() == 0.0);
        let m = centered_moment_m(&bern(&[0.25, 0.75]), 1, 2.0, DEFAULT_BUDGET).unwrap();
        assert!((m - 3.0 / 16.0 * 3f64.ln().powi(2)).abs() < 1e-15);
        assert!((m - 0.226303).abs() < 1e-6);
        let m1 = centered_moment_m(&chain(), 4, 1.0, DEFAULT_BUDGET).unwrap();
        assert!(m1 > 0.0);
        assert!(centered_moment_m(&chain(), 4, 0.5, DEFAULT_BUDGET).is_err());
    }

    #[test]
    fn moment_row_identities() {
        let row = moment_row(&chain(), 9, &[2.0, 3.5], &[2.0, 4.0], DEFAULT_BUDGET).unwrap();
        assert_eq!(row.k(1.0), Some(row.entropy));
        assert_eq!(row.m(2.0), Some(row.var_n));
        let k2 = row.k(2.0).unwrap();
        assert!((row.var_n - (k2 - row.entropy * row.entropy)).abs() < 1e-10);
    }

    #[test]
    fn conditional_k_examples() {
        let b = bern(&[0.25, 0.75]);
        let c = conditional_k(&b, 2, 3, 1, 2.0, DEFAULT_BUDGET).unwrap();
        let k = moment_k(&b, 3, 2.0, DEFAULT_BUDGET).unwrap();
        assert!((c - k).abs() < 1e-12);

        let c = conditional_k(&chain(), 1, 1, 0, 1.0, DEFAULT_BUDGET).unwrap();
        assert!((c - entropy_rate(&chain())).abs() < 1e-14);
        assert!((c - 0.383523).abs() < 1e-6);
    }

    #[test]
    fn limit_variance_examples() {
        let (s, _) = limit_variance_formula(&bern(&[0.25, 0.25, 0.25, 0.25])).unwrap();
        assert_eq!(s, 0.0);
        let (s, _) = limit_variance_formula(&bern(&[0.25, 0.75])).unwrap();
        assert!((s - 0.226303).abs() < 1e-6);

        let w = vec![0.2, 0.5, 0.3];
        let rows = vec![w.clone(), w.clone(), w.clone()];
        let mk = validate_spec(&ProcessSpec::markov(None, rows), Default::default()).unwrap();
        let (sm, _) = limit_variance_formula(&mk).unwrap();
        let (sb, _) = limit_variance_formula(&bern(&w)).unwrap();
        assert!((sm - sb).abs() < 1e-14, "{sm} vs {sb}");
    }

    #[test]
    fn markov_series_matches_fundamental_matrix() {
        // Σ_{d≥1} Cov(Y₁, Y_{1+d}) = a · Z (v - h1) with Z = (I - P + 1π)^{-1}
        let p = chain();
        let (sigma2, _) = limit_variance_formula(&p).unwrap();
        let h = entropy_rate(&p);
        let pi = p.stationary();
        let t = [[0.9, 0.1], [0.2, 0.8]];
        let g = |i: usize, j: usize| -f64::ln(t[i][j]);
        let v: Vec<f64> = (0..2).map(|i| (0..2).map(|j| t[i][j] * g(i, j)).sum()).collect();
        let a: Vec<f64> = (0..2)
            .map(|j| (0..2).map(|i| pi[i] * t[i][j] * g(i, j)).sum())
            .collect();
        let single: f64 = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| pi[i] * t[i][j] * (g(i, j) - h).powi(2))
            .sum();
        let m = nalgebra::Matrix2::new(
            1.0 - t[0][0] + pi[0],
            -t[0][1] + pi[1],
            -t[1][0] + pi[0],
            1.0 - t[1][1] + pi[1],
        );
        let z = m.try_inverse().unwrap();
        let centered = nalgebra::Vector2::new(v[0] - h, v[1] - h);
        let zc = z * centered;
        let cov = a[0] * zc[0] + a[1] * zc[1];
        assert!((sigma2 - (single + 2.0 * cov)).abs() < 1e-12);
    }

    #[test]
    fn subadditivity_example_chain() {
        let r = subadditivity_check(&chain(), 2, 2, 1, 2.0, DEFAULT_BUDGET).unwrap();
        assert!(r.slack_conditional >= 0.0);
        assert!(r.slack_chain >= 0.0);
        assert!(r.slack_join >= 0.0);
        let r1 = subadditivity_check(&chain(), 3, 2, 2, 1.0, DEFAULT_BUDGET).unwrap();
        // w = 1: chain rule H(𝓑∨𝒞) = H(𝒞|𝓑) + H(𝓑)
        assert!(r1.slack_chain.abs() < 1e-12);
    }

    #[test]
    fn conditional_prob_gap_structure() {
        assert_eq!(conditional_prob_gap(&bern(&[0.25, 0.75]), 3), 0.0);
        assert_eq!(conditional_prob_gap(&bern(&[0.25, 0.75]), 0), 0.0);
        assert_eq!(conditional_prob_gap(&chain(), 1), 0.0);
        assert_eq!(conditional_prob_gap(&chain(), 5), 0.0);
        assert!(conditional_prob_gap(&chain(), 0) > 0.0);
    }
}
