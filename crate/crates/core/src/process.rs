//! Stationary Bernoulli and Markov shifts over a finite (possibly truncated)
//! alphabet, with exact cylinder measures kept in natural-log space.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u32;

pub const WEIGHT_TOLERANCE: f64 = 1e-12;
pub const STATIONARITY_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_TRUNCATION_EPSILON: f64 = 1e-9;
const MAX_TRUNCATED_SIZE: usize = 1_000_000;

/// Symbols `0..size`. A countable alphabet cut down to `size` symbols keeps
/// the discarded probability in `tail_mass`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
    truncated: bool,
    tail_mass: f64,
}

impl Alphabet {
    pub fn finite(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::AlphabetTooSmall(size));
        }
        Ok(Self {
            size,
            truncated: false,
            tail_mass: 0.0,
        })
    }

    pub fn truncated(size: usize, tail_mass: f64) -> Result<Self> {
        if size < 2 {
            return Err(Error::AlphabetTooSmall(size));
        }
        if !(0.0..1.0).contains(&tail_mass) {
            return Err(Error::InvalidParameter(format!("tail mass {tail_mass}")));
        }
        Ok(Self {
            size,
            truncated: true,
            tail_mass,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn check(&self, symbol: Symbol) -> Result<()> {
        if (symbol as usize) < self.size {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange {
                symbol,
                size: self.size,
            })
        }
    }
}

/// Countable weight families that get truncated at validation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum WeightFamily {
    /// `p_j = (1 - ratio) ratio^j`, `j = 0, 1, ...`
    Geometric { ratio: f64 },
    /// `p_j = e^{-mean} mean^j / j!`
    Poisson { mean: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weights {
    Finite(Vec<f64>),
    Family(WeightFamily),
}

/// Unvalidated process description; this is also the spec-file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ProcessSpec {
    Bernoulli {
        weights: Weights,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncation_epsilon: Option<f64>,
    },
    Markov {
        /// Omitted means "solve for the stationary vector".
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<Vec<f64>>,
        #[serde(rename = "P")]
        transition: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncation_epsilon: Option<f64>,
    },
}

impl ProcessSpec {
    pub fn bernoulli(weights: Vec<f64>) -> Self {
        ProcessSpec::Bernoulli {
            weights: Weights::Finite(weights),
            truncation_epsilon: None,
        }
    }

    pub fn markov(p: Option<Vec<f64>>, transition: Vec<Vec<f64>>) -> Self {
        ProcessSpec::Markov {
            p,
            transition,
            truncation_epsilon: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::SpecFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ValidateOptions {
    /// Replace a supplied Markov initial vector by the solved stationary one.
    pub recompute_stationary: bool,
}

/// Log-scale probability of a cylinder. Zero measure is the `-inf`
/// sentinel, never an underflowed float.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogMeasure(f64);

impl LogMeasure {
    pub const ZERO: LogMeasure = LogMeasure(f64::NEG_INFINITY);
    pub const ONE: LogMeasure = LogMeasure(0.0);

    pub fn new(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        LogMeasure(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn probability(self) -> f64 {
        self.0.exp()
    }

    /// `-log μ`, the information content.
    pub fn information(self) -> f64 {
        -self.0
    }
}

impl fmt::Display for LogMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Address of an n-cylinder.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(Word(symbols))
    }

    /// Parses a string of decimal digits, e.g. `"0110"`.
    pub fn from_digits(s: &str) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .ok_or_else(|| Error::InvalidParameter(format!("non-digit symbol {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Symbol {
        self.0[0]
    }

    pub fn last(&self) -> Symbol {
        self.0[self.0.len() - 1]
    }
}

#[derive(Debug)]
enum Model {
    Bernoulli {
        weights: Vec<f64>,
        log_weights: Vec<f64>,
    },
    Markov {
        initial: Vec<f64>,
        transition: DMatrix<f64>,
        log_initial: Vec<f64>,
        /// Row-major `log P_ij`.
        log_transition: Vec<f64>,
    },
}

/// Per-(last, first) additive log factor joining two cylinders across a gap:
/// `log μ(B ∩ T^{-Δ-n} C) = (log μ(B) + log μ(C)) + factor[last(B)][first(C)]`.
#[derive(Debug, Clone)]
pub struct GapFactors {
    size: usize,
    /// `None` for independent (Bernoulli) processes, where the factor is 0.
    log_factor: Option<Vec<f64>>,
}

impl GapFactors {
    #[inline]
    pub fn get(&self, last: Symbol, first: Symbol) -> f64 {
        match &self.log_factor {
            None => 0.0,
            Some(f) => f[last as usize * self.size + first as usize],
        }
    }

    pub fn is_independent(&self) -> bool {
        self.log_factor.is_none()
    }

    #[inline]
    pub fn join(&self, log_left: f64, last: Symbol, log_right: f64, first: Symbol) -> f64 {
        match &self.log_factor {
            None => log_left + log_right,
            Some(f) => (log_left + log_right) + f[last as usize * self.size + first as usize],
        }
    }
}

/// A validated, immutable stationary process.
#[derive(Debug)]
pub struct Process {
    alphabet: Alphabet,
    model: Model,
    cumulative: Vec<Vec<f64>>,
    binary_powers: Vec<OnceLock<DMatrix<f64>>>,
}

/// Validates raw inputs and builds a [`Process`].
pub fn validate_spec(spec: &ProcessSpec, opts: ValidateOptions) -> Result<Process> {
    match spec {
        ProcessSpec::Bernoulli {
            weights,
            truncation_epsilon,
        } => {
            let eps = truncation_epsilon.unwrap_or(DEFAULT_TRUNCATION_EPSILON);
            let (weights, alphabet) = resolve_weights(weights, eps)?;
            Ok(Process::from_model(
                alphabet,
                Model::Bernoulli {
                    log_weights: weights.iter().map(|w| w.ln()).collect(),
                    weights,
                },
            ))
        }
        ProcessSpec::Markov { p, transition, .. } => {
            let k = transition.len();
            let alphabet = Alphabet::finite(k)?;
            let mut flat = Vec::with_capacity(k * k);
            for (i, row) in transition.iter().enumerate() {
                if row.len() != k {
                    return Err(Error::Dimension(format!(
                        "row {i} has {} entries, expected {k}",
                        row.len()
                    )));
                }
                check_entries(row)?;
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
                    return Err(Error::NonStochastic { row: i, sum });
                }
                flat.extend_from_slice(row);
            }
            let matrix = DMatrix::from_row_slice(k, k, &flat);
            check_irreducible_aperiodic(&matrix)?;

            let initial = match p {
                Some(p) if !opts.recompute_stationary => {
                    if p.len() != k {
                        return Err(Error::Dimension(format!(
                            "initial vector has {} entries, expected {k}",
                            p.len()
                        )));
                    }
                    check_probability_vector(p)?;
                    let deviation = stationarity_deviation(p, &matrix);
                    if deviation > STATIONARITY_TOLERANCE {
                        return Err(Error::NotStationary { deviation });
                    }
                    p.clone()
                }
                _ => stationary_vector(&matrix)?,
            };

            Ok(Process::from_model(
                alphabet,
                Model::Markov {
                    log_initial: initial.iter().map(|x| x.ln()).collect(),
                    log_transition: flat.iter().map(|x| x.ln()).collect(),
                    initial,
                    transition: matrix,
                },
            ))
        }
    }
}

fn check_entries(v: &[f64]) -> Result<()> {
    for &x in v {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::NotNormalized(format!("entry {x} is not a probability")));
        }
    }
    Ok(())
}

fn check_probability_vector(v: &[f64]) -> Result<()> {
    check_entries(v)?;
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(Error::NotNormalized(format!("entries sum to {sum}")));
    }
    Ok(())
}

fn resolve_weights(weights: &Weights, eps: f64) -> Result<(Vec<f64>, Alphabet)> {
    match weights {
        Weights::Finite(w) => {
            let alphabet = Alphabet::finite(w.len())?;
            check_probability_vector(w)?;
            Ok((w.clone(), alphabet))
        }
        Weights::Family(family) => {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::InvalidParameter(format!("truncation epsilon {eps}")));
            }
            let mut kept = Vec::new();
            let mut mass = crate::numeric::CompensatedSum::new();
            let mut term = match *family {
                WeightFamily::Geometric { ratio } => {
                    if !(ratio > 0.0 && ratio < 1.0) {
                        return Err(Error::InvalidParameter(format!("geometric ratio {ratio}")));
                    }
                    1.0 - ratio
                }
                WeightFamily::Poisson { mean } => {
                    if !(mean > 0.0 && mean.is_finite()) {
                        return Err(Error::InvalidParameter(format!("poisson mean {mean}")));
                    }
                    (-mean).exp()
                }
            };
            loop {
                kept.push(term);
                mass.add(term);
                let tail = (1.0 - mass.value()).max(0.0);
                if kept.len() >= 2 && tail < eps {
                    break;
                }
                if kept.len() >= MAX_TRUNCATED_SIZE {
                    return Err(Error::InvalidParameter(
                        "truncation needs more than 10^6 symbols".into(),
                    ));
                }
                let j = kept.len() as f64;
                term = match *family {
                    WeightFamily::Geometric { ratio } => term * ratio,
                    WeightFamily::Poisson { mean } => term * mean / j,
                };
            }
            let total = mass.value();
            let tail = (1.0 - total).max(0.0);
            let weights: Vec<f64> = kept.iter().map(|w| w / total).collect();
            Ok((weights, Alphabet::truncated(kept.len(), tail)?))
        }
    }
}

fn stationarity_deviation(p: &[f64], matrix: &DMatrix<f64>) -> f64 {
    let k = p.len();
    (0..k)
        .map(|j| {
            let pj: f64 = (0..k).map(|i| p[i] * matrix[(i, j)]).sum();
            (pj - p[j]).abs()
        })
        .fold(0.0, f64::max)
}

/// Solves `p (P - I) = 0`, `Σ p = 1` with a dense LU factorization.
pub fn stationary_vector(matrix: &DMatrix<f64>) -> Result<Vec<f64>> {
    let k = matrix.nrows();
    let mut a = matrix.transpose() - DMatrix::<f64>::identity(k, k);
    for j in 0..k {
        a[(k - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(k);
    b[k - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::InvalidParameter("singular stationary system".into()))?;
    let mut p: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
    Ok(p)
}

fn check_irreducible_aperiodic(matrix: &DMatrix<f64>) -> Result<()> {
    let k = matrix.nrows();
    let succ: Vec<Vec<usize>> = (0..k)
        .map(|i| (0..k).filter(|&j| matrix[(i, j)] > 0.0).collect())
        .collect();
    let reach = |adj: &dyn Fn(usize) -> Vec<usize>| {
        let mut seen = vec![false; k];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in adj(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    let forward = reach(&|u| succ[u].clone());
    let backward = reach(&|u| (0..k).filter(|&i| matrix[(i, u)] > 0.0).collect());
    if !(forward && backward) {
        return Err(Error::Reducible);
    }

    // Period = gcd over edges u→v of (level(u) + 1 - level(v)) for BFS levels.
    let mut level = vec![usize::MAX; k];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &v in &succ[u] {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut period = 0usize;
    for u in 0..k {
        for &v in &succ[u] {
            let d = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs() as usize;
            period = gcd(period, d);
        }
    }
    if period != 1 {
        return Err(Error::Periodic(period));
    }
    Ok(())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Process {
    fn from_model(alphabet: Alphabet, model: Model) -> Self {
        let k = alphabet.size();
        let cumulative_of = |row: &mut dyn Iterator<Item = f64>| {
            let mut acc = 0.0;
            row.map(|x| {
                acc += x;
                acc
            })
            .collect::<Vec<f64>>()
        };
        let cumulative = match &model {
            Model::Bernoulli { weights, .. } => vec![cumulative_of(&mut weights.iter().copied())],
            Model::Markov {
                initial, transition, ..
            } => {
                let mut rows = vec![cumulative_of(&mut initial.iter().copied())];
                for i in 0..k {
                    rows.push(cumulative_of(&mut (0..k).map(|j| transition[(i, j)])));
                }
                rows
            }
        };
        Process {
            alphabet,
            model,
            cumulative,
            binary_powers: (0..64).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.alphabet.size()
    }

    pub fn is_bernoulli(&self) -> bool {
        matches!(self.model, Model::Bernoulli { .. })
    }

    /// Stationary distribution of a single symbol.
    pub fn stationary(&self) -> &[f64] {
        match &self.model {
            Model::Bernoulli { weights, .. } => weights,
            Model::Markov { initial, .. } => initial,
        }
    }

    /// Probability of `next` following `prev`.
    #[inline]
    pub fn transition(&self, prev: Symbol, next: Symbol) -> f64 {
        match &self.model {
            Model::Bernoulli { weights, .. } => weights[next as usize],
            Model::Markov { transition, .. } => transition[(prev as usize, next as usize)],
        }
    }

    #[inline]
    pub fn log_initial(&self, a: Symbol) -> f64 {
        match &self.model {
            Model::Bernoulli { log_weights, .. } => log_weights[a as usize],
            Model::Markov { log_initial, .. } => log_initial[a as usize],
        }
    }

    #[inline]
    pub fn log_step(&self, prev: Symbol, next: Symbol) -> f64 {
        match &self.model {
            Model::Bernoulli { log_weights, .. } => log_weights[next as usize],
            Model::Markov { log_transition, .. } => {
                log_transition[prev as usize * self.alphabet.size() + next as usize]
            }
        }
    }

    /// The validated spec in canonical finite form (weights or `p`, `P`).
    pub fn normalized_spec(&self) -> ProcessSpec {
        match &self.model {
            Model::Bernoulli { weights, .. } => ProcessSpec::bernoulli(weights.clone()),
            Model::Markov {
                initial, transition, ..
            } => {
                let k = self.size();
                ProcessSpec::markov(
                    Some(initial.clone()),
                    (0..k).map(|i| (0..k).map(|j| transition[(i, j)]).collect()).collect(),
                )
            }
        }
    }

    /// Log-measure of a symbol slice, summed left to right. Symbols are
    /// assumed in range.
    #[inline]
    pub(crate) fn log_measure_unchecked(&self, symbols: &[Symbol]) -> f64 {
        let mut acc = self.log_initial(symbols[0]);
        for w in symbols.windows(2) {
            acc += self.log_step(w[0], w[1]);
        }
        acc
    }

    pub(crate) fn check_symbols(&self, symbols: &[Symbol]) -> Result<()> {
        symbols.iter().try_for_each(|&s| self.alphabet.check(s))
    }

    /// `log μ([word])`.
    pub fn cylinder_measure(&self, word: &Word) -> Result<LogMeasure> {
        self.check_symbols(word.symbols())?;
        Ok(LogMeasure(self.log_measure_unchecked(word.symbols())))
    }

    /// `P^d` via cached binary powers; for Bernoulli every row is the weight
    /// vector (for `d ≥ 1`).
    pub fn transition_power(&self, d: u64) -> DMatrix<f64> {
        let k = self.size();
        match &self.model {
            Model::Bernoulli { weights, .. } => {
                if d == 0 {
                    DMatrix::identity(k, k)
                } else {
                    DMatrix::from_fn(k, k, |_, j| weights[j])
                }
            }
            Model::Markov { transition, .. } => {
                let mut result: Option<DMatrix<f64>> = None;
                let mut bit = 0;
                let mut rest = d;
                while rest > 0 {
                    if rest & 1 == 1 {
                        let factor = self.binary_power(bit, transition);
                        result = Some(match result {
                            None => factor.clone(),
                            Some(r) => r * factor,
                        });
                    }
                    rest >>= 1;
                    bit += 1;
                }
                result.unwrap_or_else(|| DMatrix::identity(k, k))
            }
        }
    }

    fn binary_power(&self, bit: usize, base: &DMatrix<f64>) -> &DMatrix<f64> {
        self.binary_powers[bit].get_or_init(|| {
            if bit == 0 {
                base.clone()
            } else {
                let half = self.binary_power(bit - 1, base);
                half * half
            }
        })
    }

    /// Join factors for a left cylinder followed, after `gap` symbols, by a
    /// right cylinder: `log (P^{gap+1})_{bc} - log p_c`.
    pub fn gap_factors(&self, gap: u64) -> GapFactors {
        let k = self.size();
        match &self.model {
            Model::Bernoulli { .. } => GapFactors {
                size: k,
                log_factor: None,
            },
            Model::Markov { log_initial, .. } => {
                let power = self.transition_power(gap + 1);
                let mut f = Vec::with_capacity(k * k);
                for b in 0..k {
                    for c in 0..k {
                        let g = power[(b, c)];
                        f.push(if g > 0.0 {
                            g.ln() - log_initial[c]
                        } else {
                            f64::NEG_INFINITY
                        });
                    }
                }
                GapFactors {
                    size: k,
                    log_factor: Some(f),
                }
            }
        }
    }

    /// `log μ([left] ∩ T^{-gap-n}[right])` with `n = |left|`.
    pub fn shift_concat_measure(&self, left: &Word, gap: i64, right: &Word) -> Result<LogMeasure> {
        if gap < 0 {
            return Err(Error::InvalidGap(gap));
        }
        let l = self.cylinder_measure(left)?;
        let r = self.cylinder_measure(right)?;
        if l.is_zero() || r.is_zero() {
            return Ok(LogMeasure::ZERO);
        }
        let factors = self.gap_factors(gap as u64);
        let v = factors.join(l.value(), left.last(), r.value(), right.first());
        Ok(LogMeasure(if v.is_nan() { f64::NEG_INFINITY } else { v }))
    }

    /// Draws a symbol from row `row` of the cumulative tables (row 0 is the
    /// stationary vector, row `i + 1` the transitions out of `i`).
    #[inline]
    pub(crate) fn draw(&self, row: usize, u: f64) -> Symbol {
        let cum = &self.cumulative[row];
        let idx = if cum.len() <= 16 {
            cum.iter().position(|&c| u < c)
        } else {
            let i = cum.partition_point(|&c| c <= u);
            (i < cum.len()).then_some(i)
        };
        match idx {
            Some(i) => i as Symbol,
            // u landed in the rounding gap above the last cumulative value
            None => cum
                .iter()
                .enumerate()
                .rev()
                .find(|(i, &c)| *i == 0 || c > cum[*i - 1])
                .map(|(i, _)| i as Symbol)
                .unwrap_or(0),
        }
    }

    #[inline]
    pub(crate) fn transition_row(&self, prev: Symbol) -> usize {
        match self.model {
            Model::Bernoulli { .. } => 0,
            Model::Markov { .. } => prev as usize + 1,
        }
    }

    /// Positive-measure n-cylinder count, via path counting (saturating).
    pub fn support_count(&self, n: usize) -> u128 {
        let k = self.size();
        let pi = self.stationary();
        let mut counts: Vec<u128> = (0..k).map(|a| (pi[a] > 0.0) as u128).collect();
        for _ in 1..n {
            let mut next = vec![0u128; k];
            for (a, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for (b, slot) in next.iter_mut().enumerate() {
                    if self.transition(a as Symbol, b as Symbol) > 0.0 {
                        *slot = slot.saturating_add(c);
                    }
                }
            }
            counts = next;
        }
        counts.iter().fold(0u128, |acc, &c| acc.saturating_add(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_chain() -> Process {
        validate_spec(
            &ProcessSpec::markov(None, vec![vec![0.9, 0.1], vec![0.2, 0.8]]),
            ValidateOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn uniform_bernoulli_accepted_unchanged() {
        let p = validate_spec(&ProcessSpec::bernoulli(vec![0.5, 0.5]), Default::default()).unwrap();
        assert_eq!(p.stationary(), &[0.5, 0.5]);
        assert!(p.is_bernoulli());
        assert!(!p.alphabet().is_truncated());
        assert_eq!(p.alphabet().tail_mass(), 0.0);
    }

    #[test]
    fn two_state_stationary_vector() {
        let p = example_chain();
        let pi = p.stationary();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn identity_matrix_is_reducible() {
        let err = validate_spec(
            &ProcessSpec::markov(None, vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            Default::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::Reducible);
    }

    #[test]
    fn flip_chain_is_periodic() {
        let err = validate_spec(
            &ProcessSpec::markov(None, vec![vec![0.0, 1.0], vec![1.0, 0.0]]),
            Default::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::Periodic(2));
    }

    #[test]
    fn non_stochastic_row_rejected() {
        let err = validate_spec(
            &ProcessSpec::markov(None, vec![vec![0.9, 0.2], vec![0.2, 0.8]]),
            Default::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonStochastic { row: 0, .. }));
    }

    #[test]
    fn wrong_initial_vector_needs_recompute() {
        let spec = ProcessSpec::markov(Some(vec![0.5, 0.5]), vec![vec![0.9, 0.1], vec![0.2, 0.8]]);
        assert!(matches!(
            validate_spec(&spec, Default::default()),
            Err(Error::NotStationary { .. })
        ));
        let p = validate_spec(
            &spec,
            ValidateOptions {
                recompute_stationary: true,
            },
        )
        .unwrap();
        assert!((p.stationary()[0] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn bernoulli_weights_must_sum_to_one() {
        assert!(validate_spec(&ProcessSpec::bernoulli(vec![0.5, 0.6]), Default::default()).is_err());
        assert!(validate_spec(&ProcessSpec::bernoulli(vec![1.0]), Default::default()).is_err());
        assert!(validate_spec(&ProcessSpec::bernoulli(vec![-0.5, 1.5]), Default::default()).is_err());
    }

    #[test]
    fn geometric_family_truncates_below_epsilon() {
        let spec = ProcessSpec::Bernoulli {
            weights: Weights::Family(WeightFamily::Geometric { ratio: 0.5 }),
            truncation_epsilon: Some(1e-6),
        };
        let p = validate_spec(&spec, Default::default()).unwrap();
        // tail after k symbols is 2^-k; smallest k with 2^-k < 1e-6 is 20
        assert_eq!(p.size(), 20);
        assert!(p.alphabet().is_truncated());
        assert!((p.alphabet().tail_mass() - 0.5f64.powi(20)).abs() < 1e-15);
        let s: f64 = p.stationary().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_family_truncates() {
        let spec = ProcessSpec::Bernoulli {
            weights: Weights::Family(WeightFamily::Poisson { mean: 3.0 }),
            truncation_epsilon: None,
        };
        let p = validate_spec(&spec, Default::default()).unwrap();
        assert!(p.alphabet().tail_mass() < 1e-9);
        assert!(p.size() > 10 && p.size() < 30);
    }

    #[test]
    fn cylinder_measures_match_hand_values() {
        let b = validate_spec(&ProcessSpec::bernoulli(vec![0.5, 0.5]), Default::default()).unwrap();
        let m = b.cylinder_measure(&Word::from_digits("010").unwrap()).unwrap();
        assert!((m.value() + 3.0 * 2f64.ln()).abs() < 1e-15);

        let mk = example_chain();
        let m = mk.cylinder_measure(&Word::from_digits("00").unwrap()).unwrap();
        assert!((m.probability() - 0.6).abs() < 1e-15);

        let err = mk.cylinder_measure(&Word::from_digits("02").unwrap()).unwrap_err();
        assert_eq!(err, Error::SymbolOutOfRange { symbol: 2, size: 2 });
    }

    #[test]
    fn forbidden_transition_gives_zero_sentinel() {
        let p = validate_spec(
            &ProcessSpec::markov(
                None,
                vec![vec![0.5, 0.0, 0.5], vec![0.3, 0.3, 0.4], vec![0.5, 0.5, 0.0]],
            ),
            Default::default(),
        )
        .unwrap();
        let m = p.cylinder_measure(&Word::from_digits("2011").unwrap()).unwrap();
        assert!(m.is_zero());
        assert_eq!(m.to_string(), "-inf");
    }

    #[test]
    fn shift_concat_examples() {
        let b = validate_spec(&ProcessSpec::bernoulli(vec![0.5, 0.5]), Default::default()).unwrap();
        let zero = Word::from_digits("0").unwrap();
        let one = Word::from_digits("1").unwrap();
        let m = b.shift_concat_measure(&zero, 3, &one).unwrap();
        assert_eq!(m.value(), -2.0 * 2f64.ln());

        let mk = example_chain();
        // adjacent symbols: (2/3) * P_00
        let m = mk.shift_concat_measure(&zero, 0, &zero).unwrap();
        assert!((m.probability() - 2.0 / 3.0 * 0.9).abs() < 1e-14);
        // one symbol in between: (2/3) * (P^2)_00 with (P^2)_00 = 0.83
        let m = mk.shift_concat_measure(&zero, 1, &zero).unwrap();
        assert!((m.probability() - 2.0 / 3.0 * 0.83).abs() < 1e-14);

        assert_eq!(mk.shift_concat_measure(&zero, -1, &zero), Err(Error::InvalidGap(-1)));
    }

    #[test]
    fn matrix_powers_match_repeated_multiplication() {
        let mk = example_chain();
        let p = mk.transition_power(1);
        let mut acc = DMatrix::<f64>::identity(2, 2);
        for d in 0..40u64 {
            let fast = mk.transition_power(d);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((fast[(i, j)] - acc[(i, j)]).abs() < 1e-14, "d={d}");
                }
            }
            acc = &acc * &p;
        }
    }

    #[test]
    fn support_count_prunes_forbidden_words() {
        let p = validate_spec(
            &ProcessSpec::markov(None, vec![vec![0.5, 0.5], vec![1.0, 0.0]]),
            Default::default(),
        )
        .unwrap();
        // golden-mean shift: Fibonacci counts
        assert_eq!(p.support_count(1), 2);
        assert_eq!(p.support_count(2), 3);
        assert_eq!(p.support_count(5), 13);
    }

    #[test]
    fn spec_file_round_trip() {
        let text = r#"{"type":"markov","p":[0.6666666666666666,0.3333333333333333],"P":[[0.9,0.1],[0.2,0.8]]}"#;
        let spec = ProcessSpec::from_json(text).unwrap();
        assert!(matches!(spec, ProcessSpec::Markov { .. }));
        assert_eq!(ProcessSpec::from_json(&spec.to_json()).unwrap(), spec);

        let text = r#"{"type":"bernoulli","weights":{"family":"geometric","ratio":0.3},"truncation_epsilon":1e-9}"#;
        let spec = ProcessSpec::from_json(text).unwrap();
        assert!(validate_spec(&spec, Default::default())
            .unwrap()
            .alphabet()
            .is_truncated());
    }
}
