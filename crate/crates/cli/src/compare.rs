//! Column-wise comparison of two reports.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::CliError;
use crate::report::ReportEnvelope;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub experiment: String,
    pub rows: usize,
    /// Largest absolute difference per numeric column.
    pub max_deviation: BTreeMap<String, f64>,
    /// Columns with any difference; empty when the reports agree exactly.
    pub differing_columns: Vec<String>,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

pub fn compare(a: &ReportEnvelope, b: &ReportEnvelope, tolerance: f64) -> Result<Comparison, CliError> {
    if a.summary.experiment != b.summary.experiment {
        return Err(CliError::SchemaMismatch(format!(
            "experiments differ: {} vs {}",
            a.summary.experiment, b.summary.experiment
        )));
    }
    if a.columns != b.columns {
        return Err(CliError::SchemaMismatch(format!(
            "columns differ: [{}] vs [{}]",
            a.columns.join(","),
            b.columns.join(",")
        )));
    }
    if a.rows.len() != b.rows.len() {
        return Err(CliError::SchemaMismatch(format!(
            "row counts differ: {} vs {}",
            a.rows.len(),
            b.rows.len()
        )));
    }
    let mut max_deviation = BTreeMap::new();
    let mut differing_columns = Vec::new();
    for (j, name) in a.columns.iter().enumerate() {
        let mut worst: f64 = 0.0;
        let mut numeric = true;
        let mut differs = false;
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            differs |= ra[j] != rb[j];
            match (ra[j].as_f64(), rb[j].as_f64()) {
                (Some(x), Some(y)) if x == y => {}
                (Some(x), Some(y)) => worst = worst.max((x - y).abs()),
                _ => numeric = false,
            }
        }
        if numeric {
            max_deviation.insert(name.clone(), worst);
        }
        if differs {
            differing_columns.push(name.clone());
        }
    }
    let within_tolerance = differing_columns
        .iter()
        .all(|c| max_deviation.get(c).is_some_and(|&d| d <= tolerance));
    Ok(Comparison {
        experiment: a.summary.experiment.clone(),
        rows: a.rows.len(),
        max_deviation,
        differing_columns,
        tolerance,
        within_tolerance,
    })
}
