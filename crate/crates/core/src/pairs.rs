//! One-pass statistics over cylinder pairs `(B, C) ∈ 𝒜ⁿ × T^{-Δ-n}𝒜ᵐ`.

use crate::enumerate::{fold_pairs, PairAccumulator, PairTerm};
use crate::error::Result;
use crate::numeric::CompensatedSum;
use crate::process::Process;

/// `|x|^w` with exact integer powers where possible.
#[inline]
pub fn pow_abs(x: f64, w: f64) -> f64 {
    let x = x.abs();
    if w == 1.0 {
        x
    } else if w == 2.0 {
        x * x
    } else if w.fract() == 0.0 && (0.0..=32.0).contains(&w) {
        x.powi(w as i32)
    } else {
        x.powf(w)
    }
}

#[derive(Debug, Clone)]
pub struct PairStats {
    pub ws: Vec<f64>,
    pub discrepancy_exponents: Vec<f64>,
    /// `K_w(𝓑 ∨ 𝒞)` per `ws`.
    pub k_join: Vec<CompensatedSum>,
    /// `K_w(𝒞 | 𝓑)` per `ws`.
    pub k_cond: Vec<CompensatedSum>,
    /// `Σ μ(B∩C) |log(1 + ρ/(μ(B)μ(C)))|^a` per exponent.
    pub discrepancy: Vec<CompensatedSum>,
    pub entropy_join: CompensatedSum,
    pub entropy_cond: CompensatedSum,
    /// `Σ |ρ(B, C)|`.
    pub beta: CompensatedSum,
    /// `max |ρ(B, C)|`.
    pub alpha_atom: f64,
    /// `max |μ(B∩C)/(μ(B)μ(C)) - 1|`.
    pub psi_atom: f64,
    /// `max_B ½ Σ_C |μ(B∩C)/μ(B) - μ(C)|`.
    pub phi_atom: f64,
    row_phi: CompensatedSum,
}

impl PairStats {
    pub fn new(ws: &[f64], discrepancy_exponents: &[f64]) -> Self {
        Self {
            ws: ws.to_vec(),
            discrepancy_exponents: discrepancy_exponents.to_vec(),
            k_join: vec![CompensatedSum::new(); ws.len()],
            k_cond: vec![CompensatedSum::new(); ws.len()],
            discrepancy: vec![CompensatedSum::new(); discrepancy_exponents.len()],
            entropy_join: CompensatedSum::new(),
            entropy_cond: CompensatedSum::new(),
            beta: CompensatedSum::new(),
            alpha_atom: 0.0,
            psi_atom: 0.0,
            phi_atom: 0.0,
            row_phi: CompensatedSum::new(),
        }
    }

    /// Enumerates all pairs of `process` at the given orders and gap.
    pub fn compute(
        process: &Process,
        n: usize,
        m: usize,
        gap: u64,
        ws: &[f64],
        discrepancy_exponents: &[f64],
        budget: u128,
    ) -> Result<Self> {
        fold_pairs(process, n, m, gap, budget, || PairStats::new(ws, discrepancy_exponents))
    }

    pub fn k_join(&self, w: f64) -> Option<f64> {
        self.ws.iter().position(|&x| x == w).map(|i| self.k_join[i].value())
    }

    pub fn k_cond(&self, w: f64) -> Option<f64> {
        self.ws.iter().position(|&x| x == w).map(|i| self.k_cond[i].value())
    }

    pub fn discrepancy(&self, a: f64) -> Option<f64> {
        self.discrepancy_exponents
            .iter()
            .position(|&x| x == a)
            .map(|i| self.discrepancy[i].value())
    }
}

impl PairAccumulator for PairStats {
    #[inline]
    fn push(&mut self, t: &PairTerm) {
        let excess = t.log_ratio.exp_m1();
        let abs_rho = t.mu_b * t.mu_c * excess.abs();
        self.beta.add(abs_rho);
        self.alpha_atom = self.alpha_atom.max(abs_rho);
        self.psi_atom = self.psi_atom.max(excess.abs());
        self.row_phi.add(t.mu_c * excess.abs());

        if t.log_bc == f64::NEG_INFINITY {
            return;
        }
        let mu_bc = t.log_bc.exp();
        let info = -t.log_bc;
        let cond = (t.log_b - t.log_bc).abs();
        self.entropy_join.add(mu_bc * info);
        self.entropy_cond.add(mu_bc * cond);
        for (i, &w) in self.ws.iter().enumerate() {
            self.k_join[i].add(mu_bc * pow_abs(info, w));
            self.k_cond[i].add(mu_bc * pow_abs(cond, w));
        }
        for (i, &a) in self.discrepancy_exponents.iter().enumerate() {
            self.discrepancy[i].add(mu_bc * pow_abs(t.log_ratio, a));
        }
    }

    fn end_row(&mut self) {
        self.phi_atom = self.phi_atom.max(0.5 * self.row_phi.value());
        self.row_phi = CompensatedSum::new();
    }

    fn merge(&mut self, other: Self) {
        for (a, b) in self.k_join.iter_mut().zip(&other.k_join) {
            a.merge(b);
        }
        for (a, b) in self.k_cond.iter_mut().zip(&other.k_cond) {
            a.merge(b);
        }
        for (a, b) in self.discrepancy.iter_mut().zip(&other.discrepancy) {
            a.merge(b);
        }
        self.entropy_join.merge(&other.entropy_join);
        self.entropy_cond.merge(&other.entropy_cond);
        self.beta.merge(&other.beta);
        self.alpha_atom = self.alpha_atom.max(other.alpha_atom);
        self.psi_atom = self.psi_atom.max(other.psi_atom);
        self.phi_atom = self.phi_atom.max(other.phi_atom);
    }
}
