//! Dispatch from an [`ExperimentConfig`] to the core library.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use smb_core::lab::{
    block_error_experiment, block_schedule, clt_experiment, information_path, q_growth_exponent, recurrence_experiment,
    variance_monte_carlo, RecurrenceOptions, DEFAULT_SCAN_LIMIT,
};
use smb_core::mixing::{doubling_grid, mixing_curve_bruteforce, mixing_curve_closed, weak_bernoulli_threshold};
use smb_core::numeric::normal_cdf;
use smb_core::seed::path_seed;
use smb_core::stats::{
    deviation_fit, entropy_rate, join_entropy_closed, limit_variance, marginal_entropy, moment_row, VarianceOptions,
};
use smb_core::{sample_trajectory, validate_spec, Process, ProcessSpec, ValidateOptions};

use crate::config::{Command, ExperimentConfig, MixingMethod};
use crate::error::CliError;
use crate::report::{num, sha256_hex, Cell, ReportEnvelope, Summary, Table, TOOL_VERSION};

/// A loaded and validated spec file.
pub struct LoadedSpec {
    pub process: Process,
    pub hash: String,
}

pub fn load_spec(path: &Path) -> Result<LoadedSpec, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Spec(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::Spec(e.to_string()))?;
    let spec = ProcessSpec::from_json(&text).map_err(|e| CliError::Spec(e.to_string()))?;
    let process = validate_spec(&spec, ValidateOptions::default()).map_err(|e| CliError::Spec(e.to_string()))?;
    Ok(LoadedSpec {
        process,
        hash: sha256_hex(&bytes),
    })
}

/// Everything a command produces before it is wrapped in an envelope.
struct Outcome {
    table: Table,
    n: Option<usize>,
    samples: Option<usize>,
    statistic: Option<f64>,
    threshold: Option<f64>,
    flags: BTreeMap<String, bool>,
    metadata: BTreeMap<String, Value>,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Self {
            table,
            n: None,
            samples: None,
            statistic: None,
            threshold: None,
            flags: BTreeMap::new(),
            metadata: BTreeMap::new(),
        }
    }

    fn flag(&mut self, name: &str, pass: bool) {
        self.flags.insert(name.into(), pass);
    }

    fn meta(&mut self, name: &str, value: Value) {
        self.metadata.insert(name.into(), value);
    }
}

/// Runs one experiment. `base` is the directory relative spec paths resolve
/// against.
pub fn run(config: &ExperimentConfig, base: &Path) -> Result<ReportEnvelope, CliError> {
    let seed = config.seed()?;
    let spec_path = if config.spec_path.is_absolute() {
        config.spec_path.clone()
    } else {
        base.join(&config.spec_path)
    };
    let spec = load_spec(&spec_path)?;
    let p = &spec.process;
    let outcome = match config.command {
        Command::Entropy => entropy(config, p)?,
        Command::Variance => variance(config, p, seed)?,
        Command::Moments => moments(config, p)?,
        Command::Mixing => mixing(config, p)?,
        Command::Clt => clt(config, p, seed)?,
        Command::Recurrence => recurrence(config, p, seed)?,
        Command::SmbPath => smb_path(config, p, seed)?,
        Command::Blocks => blocks(config, p, seed)?,
    };
    let pass = outcome.flags.values().all(|&f| f);
    Ok(ReportEnvelope {
        tool_version: TOOL_VERSION.into(),
        spec_hash: spec.hash.clone(),
        config_echo: json!({
            "spec_path": config.spec_path,
            "command": config.command,
            "parameters": config.parameters,
        }),
        summary: Summary {
            experiment: config.command.name().into(),
            spec_hash: spec.hash,
            seed,
            n: outcome.n,
            samples: outcome.samples,
            statistic: outcome.statistic,
            threshold: outcome.threshold,
            pass,
        },
        pass_flags: outcome.flags,
        metadata: outcome.metadata,
        columns: outcome.table.columns,
        rows: outcome.table.rows,
    })
}

fn n_grid(config: &ExperimentConfig, default_max: usize) -> Vec<usize> {
    let prm = &config.parameters;
    match (&prm.n_grid, prm.n) {
        (Some(g), _) => g.clone(),
        (None, Some(n)) => (1..=n).collect(),
        (None, None) => (1..=default_max).collect(),
    }
}

fn label(prefix: &str, x: f64) -> String {
    format!("{prefix}{x}")
}

fn entropy(config: &ExperimentConfig, p: &Process) -> Result<Outcome, CliError> {
    let grid = n_grid(config, 8);
    let h = entropy_rate(p);
    let mut table = Table::new(&["n", "H_n", "H_closed", "H_n_over_n", "h"]);
    let mut worst: f64 = 0.0;
    for &n in &grid {
        let row = moment_row(p, n, &[], &[], config.budget())?;
        let closed = join_entropy_closed(p, n);
        worst = worst.max((row.entropy - closed).abs());
        table.push(vec![
            n.into(),
            row.entropy.into(),
            closed.into(),
            (row.entropy / n as f64).into(),
            h.into(),
        ])?;
    }
    let mut out = Outcome::new(table);
    out.n = grid.last().copied();
    out.statistic = Some(worst);
    out.threshold = Some(1e-10);
    out.flag("closed_form_agreement", worst <= 1e-10);
    out.meta("h", num(h));
    out.meta("marginal_entropy", num(marginal_entropy(p)));
    Ok(out)
}

fn variance(config: &ExperimentConfig, p: &Process, seed: u64) -> Result<Outcome, CliError> {
    let prm = &config.parameters;
    let max_n = prm.n.unwrap_or(20);
    let threshold = prm.threshold.unwrap_or(-0.2);
    let report = limit_variance(
        p,
        VarianceOptions {
            max_n,
            budget: config.budget(),
        },
    )?;
    let sigma2 = report.sigma2_limit;
    let mut table = Table::new(&["n", "source", "var_n_over_n", "abs_deviation", "standard_error"]);
    for &(n, v) in &report.sigma2_by_n {
        table.push(vec![
            n.into(),
            "exact".into(),
            v.into(),
            (v - sigma2).abs().into(),
            0.0.into(),
        ])?;
    }
    let mut out = Outcome::new(table);
    let fit = deviation_fit(&report.sigma2_by_n, sigma2);
    if let Some(mc_grid) = &prm.n_grid {
        let samples = prm.samples.unwrap_or(20_000);
        let mut within = true;
        for (i, &n) in mc_grid.iter().enumerate() {
            let mc = variance_monte_carlo(p, n, samples, path_seed(seed, i as u64))?;
            let dev = (mc.var_over_n - sigma2).abs();
            let envelope = fit.map_or(0.0, |f| (f.intercept + f.slope * (n as f64).ln()).exp());
            within &= dev <= envelope + 3.0 * mc.standard_error;
            out.table.push(vec![
                n.into(),
                "monte_carlo".into(),
                mc.var_over_n.into(),
                dev.into(),
                mc.standard_error.into(),
            ])?;
        }
        out.samples = Some(samples);
        out.flag("monte_carlo_within_envelope", within);
    }
    out.n = Some(max_n);
    out.statistic = report.fitted_rate;
    out.threshold = Some(threshold);
    out.flag("decay_rate", report.fitted_rate.is_none_or(|r| r <= threshold));
    out.meta("sigma2", num(sigma2));
    out.meta("method", json!(report.method));
    out.meta("series_terms", json!(report.series_terms));
    out.meta("tail_mass", num(report.tail_mass));
    out.meta("fitted_rate", report.fitted_rate.map_or(Value::Null, num));
    if let Some((a, b)) = report.extrapolation {
        out.meta("extrapolation_a", num(a));
        out.meta("extrapolation_b", num(b));
    }
    Ok(out)
}

fn moments(config: &ExperimentConfig, p: &Process) -> Result<Outcome, CliError> {
    let prm = &config.parameters;
    let grid = n_grid(config, 10);
    let ws = prm.w.as_ref().map_or(vec![2.0, 4.0], |w| w.to_vec());
    let mut ells = prm.ell.as_ref().map_or(vec![2.0, 4.0], |l| l.to_vec());
    if let Some(q) = prm.q {
        if !ells.contains(&q) {
            ells.push(q);
        }
    }
    let mut columns = vec!["n".to_string(), "H_n".to_string()];
    columns.extend(ws.iter().map(|&w| label("K", w)));
    columns.extend(ells.iter().map(|&l| label("M", l)));
    columns.push("var_n".into());
    let mut table = Table::with_columns(columns);
    let mut identity_gap: f64 = 0.0;
    let mut growth = Vec::new();
    for &n in &grid {
        let row = moment_row(p, n, &ws, &ells, config.budget())?;
        let k2 = moment_row(p, n, &[2.0], &[], config.budget())?.k(2.0).expect("present");
        identity_gap = identity_gap.max((row.var_n - (k2 - row.entropy * row.entropy)).abs() / k2.max(1.0));
        let mut cells: Vec<Cell> = vec![n.into(), row.entropy.into()];
        cells.extend(ws.iter().map(|&w| Cell::from(row.k(w).expect("present"))));
        cells.extend(ells.iter().map(|&l| Cell::from(row.m(l).expect("present"))));
        cells.push(row.var_n.into());
        table.push(cells)?;
        if let Some(q) = prm.q {
            growth.push(row.m(q).expect("present") / (n as f64).powf(q / 2.0));
        }
    }
    let mut out = Outcome::new(table);
    out.n = grid.last().copied();
    out.statistic = Some(identity_gap);
    out.threshold = Some(1e-10);
    out.flag("variance_identity", identity_gap <= 1e-10);
    if let Some(q) = prm.q {
        let max = growth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = growth.iter().copied().fold(f64::INFINITY, f64::min);
        let ratio = if min > 0.0 { max / min } else { 1.0 };
        let limit = prm.threshold.unwrap_or(3.0);
        out.meta("q", num(q));
        out.meta("growth_ratio", num(ratio));
        out.meta("growth_threshold", num(limit));
        out.flag("growth_ratio", ratio < limit);
    }
    Ok(out)
}

fn mixing(config: &ExperimentConfig, p: &Process) -> Result<Outcome, CliError> {
    let prm = &config.parameters;
    let gaps = prm.delta_grid.clone().unwrap_or_else(|| doubling_grid(64));
    let method = prm.method.unwrap_or(MixingMethod::Closed);
    let eps = prm.epsilon.unwrap_or(0.05);
    let curve = match method {
        MixingMethod::Closed => mixing_curve_closed(p, &gaps),
        MixingMethod::Bruteforce => {
            mixing_curve_bruteforce(p, prm.n.unwrap_or(3), prm.m.unwrap_or(3), &gaps, config.budget())?
        }
    };
    let mut table = Table::new(&["gap", "beta", "psi_atom", "phi_atom"]);
    let psi = curve.psi_atom.clone().expect("both curve builders fill psi");
    let phi = curve.phi_atom.clone().expect("both curve builders fill phi");
    for i in 0..curve.gaps.len() {
        table.push(vec![
            curve.gaps[i].into(),
            curve.beta[i].into(),
            psi[i].into(),
            phi[i].into(),
        ])?;
    }
    let mut out = Outcome::new(table);
    out.statistic = curve.beta.first().copied();
    out.flag("non_increasing", curve.is_non_increasing());
    out.flag(
        "beta_in_range",
        curve.beta.iter().all(|b| (-1e-12..=2.0 + 1e-12).contains(b)),
    );
    out.meta("method", json!(method));
    if method == MixingMethod::Bruteforce {
        out.n = Some(prm.n.unwrap_or(3));
        out.meta("m", json!(prm.m.unwrap_or(3)));
    }
    out.meta("fitted_power", curve.fitted_power.map_or(Value::Null, num));
    out.meta("epsilon", num(eps));
    out.meta(
        "weak_bernoulli_threshold",
        weak_bernoulli_threshold(&curve, eps).map_or(Value::Null, |g| json!(g)),
    );
    out.meta("zero_measure_atoms", json!("skipped in psi_atom"));
    Ok(out)
}

fn clt(config: &ExperimentConfig, p: &Process, seed: u64) -> Result<Outcome, CliError> {
    let prm = &config.parameters;
    let n = config.require(prm.n, "n")?;
    let samples = config.require(prm.samples, "samples")?;
    if samples < smb_core::lab::MIN_CLT_SAMPLES {
        return Err(CliError::Config(format!(
            "samples={samples}; clt needs at least {}",
            smb_core::lab::MIN_CLT_SAMPLES
        )));
    }
    let threshold = prm.threshold.unwrap_or(0.05);
    let r = clt_experiment(p, n, samples, seed)?;
    let mut table = Table::new(&["rank", "z", "ecdf", "normal_cdf"]);
    for (i, &z) in r.sample.iter().enumerate() {
        table.push(vec![
            (i + 1).into(),
            z.into(),
            ((i + 1) as f64 / samples as f64).into(),
            normal_cdf(z).into(),
        ])?;
    }
    let mut out = Outcome::new(table);
    out.n = Some(n);
    out.samples = Some(samples);
    out.statistic = Some(r.ks_distance);
    out.threshold = Some(threshold);
    out.flag("ks_distance", r.ks_distance < threshold);
    out.flag("mean_band", r.mean_within_band());
    out.meta("h", num(r.h_used));
    out.meta("sigma", num(r.sigma_used));
    out.meta("mean", num(r.standardized.mean));
    out.meta("variance", num(r.standardized.variance));
    out.meta("skewness", num(r.standardized.skewness));
    Ok(out)
}

fn recurrence(config: &ExperimentConfig, p: &Process, seed: u64) -> Result<Outcome, CliError> {
    let prm = &config.parameters;
    let opts = RecurrenceOptions {
        n: config.require(prm.n, "n")?,
        samples: config.require(prm.samples, "samples")?,
        seed,
        scan_limit: prm.scan_limit.unwrap_or(DEFAULT_SCAN_LIMIT),
    };
    let rel = prm.threshold.unwrap_or(0.15);
    let r = recurrence_experiment(p, opts)?;
    let nf = opts.n as f64;
    let mut table = Table::new(&["index", "R", "I_n", "log_R_over_n", "log_R_minus_I"]);
    for path in &r.paths {
        if let Some(k) = path.recurrence {
            let log_r = (k as f64).ln();
            table.push(vec![
                path.index.into(),
                k.into(),
                path.info.into(),
                (log_r / nf).into(),
                (log_r - path.info).into(),
            ])?;
        }
    }
    let mut out = Outcome::new(table);
    out.n = Some(opts.n);
    out.samples = Some(opts.samples);
    out.statistic = Some(r.median_rate_error);
    out.threshold = Some(rel * r.h);
    out.flag("median_rate", r.rate_pass(rel));
    out.flag("correction_p90", r.correction_pass(0.25));
    out.flag("not_found_rate", r.not_found_rate < smb_core::lab::MAX_NOT_FOUND_RATE);
    out.meta("h", num(r.h));
    out.meta("median_rate", num(r.median_rate));
    out.meta("median_abs_deviation", num(r.median_abs_deviation));
    out.meta("correction_p90", num(r.correction_p90));
    out.meta("correction_threshold", num(0.25 * nf * r.h));
    out.meta("not_found", json!(r.not_found));
    out.meta("not_found_rate", num(r.not_found_rate));
    out.meta("scan_limit", json!(opts.scan_limit));
    Ok(out)
}

fn smb_path(config: &ExperimentConfig, p: &Process, seed: u64) -> Result<Outcome, CliError> {
    let prm = &config.parameters;
    let n = config.require(prm.n, "n")?;
    let paths = prm.samples.unwrap_or(1);
    let threshold = prm.threshold.unwrap_or(0.01);
    let mut grid: Vec<usize> = prm.n_grid.clone().unwrap_or_else(|| {
        let mut g: Vec<usize> = std::iter::successors(Some(1usize), |x| Some(x * 2))
            .take_while(|&x| x < n)
            .collect();
        g.push(n);
        g
    });
    grid.retain(|&x| x <= n);
    if grid.last() != Some(&n) {
        grid.push(n);
    }
    let h = entropy_rate(p);
    let mut table = Table::new(&["path", "seed", "n", "I_n", "I_n_over_n"]);
    let mut worst: f64 = 0.0;
    for i in 0..paths {
        let s = path_seed(seed, i as u64);
        let t = sample_trajectory(p, n, s)?;
        let stats = information_path(p, &t, &grid)?;
        for (&m, &info) in stats.n_grid.iter().zip(&stats.info) {
            table.push(vec![
                i.into(),
                Cell::Text(s.to_string()),
                m.into(),
                info.into(),
                (info / m as f64).into(),
            ])?;
        }
        worst = worst.max((stats.info.last().expect("n in grid") / n as f64 - h).abs());
    }
    let mut out = Outcome::new(table);
    out.n = Some(n);
    out.samples = Some(paths);
    out.statistic = Some(worst);
    out.threshold = Some(threshold);
    out.flag("smb_deviation", worst < threshold);
    out.meta("h", num(h));
    Ok(out)
}

fn blocks(config: &ExperimentConfig, p: &Process, seed: u64) -> Result<Outcome, CliError> {
    let prm = &config.parameters;
    let alpha = prm.alpha.unwrap_or(0.5);
    let grid = prm.n_grid.clone().unwrap_or_else(|| vec![1_000, 10_000, 100_000]);
    let paths = prm.samples.unwrap_or(100);
    let mut table = Table::new(&[
        "n",
        "Q",
        "remainder",
        "median_error",
        "p90_error",
        "median_error_over_n",
    ]);
    let mut identity = true;
    let mut ratios = Vec::new();
    for (i, &n) in grid.iter().enumerate() {
        let s = block_schedule(n, alpha)?;
        let used: usize = s.blocks.iter().map(|b| b.span()).sum();
        identity &= used + s.remainder == n;
        let r = block_error_experiment(p, n, alpha, paths, path_seed(seed, i as u64))?;
        ratios.push(r.median / n as f64);
        table.push(vec![
            n.into(),
            s.q.into(),
            s.remainder.into(),
            r.median.into(),
            r.p90.into(),
            (r.median / n as f64).into(),
        ])?;
    }
    let mut out = Outcome::new(table);
    out.n = grid.last().copied();
    out.samples = Some(paths);
    out.flag("partition_identity", identity);
    out.flag("error_trend", ratios.windows(2).all(|w| w[1] <= w[0]));
    out.meta("alpha", num(alpha));
    if let Some(e) = q_growth_exponent(&grid, alpha)? {
        out.statistic = Some(e);
        out.meta("q_growth_exponent", num(e));
    }
    Ok(out)
}

/// Summary of a spec file for `smb-lab validate`.
pub fn describe_spec(path: &Path) -> Result<Value, CliError> {
    let spec = load_spec(path)?;
    let p = &spec.process;
    Ok(json!({
        "spec_hash": spec.hash,
        "alphabet_size": p.size(),
        "truncated": p.alphabet().is_truncated(),
        "tail_mass": num(p.alphabet().tail_mass()),
        "stationary": p.stationary(),
        "entropy_rate": num(entropy_rate(p)),
        "normalized_spec": p.normalized_spec(),
    }))
}
