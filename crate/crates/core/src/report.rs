//! Stable machine-readable result files: posterior tables, convergence
//! traces, evaluation metrics, enrichment tables, heatmap data, Newick
//! dendrograms and the run manifest.
//!
//! Emission is deterministic: fixed float formatting, no timestamps inside
//! data files (timestamps live only in the manifest), so identical inputs
//! produce byte-identical outputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fgn::{ConvergenceTrace, Marginals, TraceRow};
use crate::hmc::{PosteriorSummary, SummaryRow};
use crate::ingest::GeneId;
use crate::num::Real;
use crate::preprocess::EnrichmentResult;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("failed to write output: {0}")]
    WriteError(String),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("metric outside its domain")]
    BadMetric,
    #[error("malformed {what} at line {line}")]
    ParseError { what: &'static str, line: usize },
}

impl PartialEq for ReportError {
    fn eq(&self, other: &Self) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

/// One row of the posterior table. `gene` is empty for hyperparameter
/// rows; `rhat`/`ess` are optional so rows transcribed from published
/// tables round-trip unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorRow<T: Real> {
    pub variable: String,
    pub gene: String,
    pub median: T,
    pub mean: T,
    pub stddev: T,
    pub rhat: Option<T>,
    pub ess: Option<T>,
}

pub const POSTERIOR_HEADER: &str = "variable,gene,median,mean,stddev,rhat,ess";

fn fixed4<T: Real>(v: T) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        format!("{v:.4}")
    }
}

impl<T: Real> PosteriorRow<T> {
    /// `variable,gene,median,mean,stddev[,rhat,ess]` with 4-decimal floats.
    pub fn to_csv_line(&self) -> String {
        let mut line = format!(
            "{},{},{},{},{}",
            self.variable,
            self.gene,
            fixed4(self.median),
            fixed4(self.mean),
            fixed4(self.stddev)
        );
        if let (Some(rhat), Some(ess)) = (self.rhat, self.ess) {
            line.push_str(&format!(",{},{}", fixed4(rhat), format_ess(ess)));
        }
        line
    }

    pub fn parse_csv_line(line: &str, line_no: usize) -> Result<Self, ReportError> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 && fields.len() != 7 {
            return Err(ReportError::ParseError {
                what: "posterior row",
                line: line_no,
            });
        }
        let num = |s: &str| -> Result<T, ReportError> {
            if s == "NA" {
                return Ok(T::nan());
            }
            s.parse().map_err(|_| ReportError::ParseError {
                what: "posterior value",
                line: line_no,
            })
        };
        Ok(PosteriorRow {
            variable: fields[0].to_string(),
            gene: fields[1].to_string(),
            median: num(fields[2])?,
            mean: num(fields[3])?,
            stddev: num(fields[4])?,
            rhat: if fields.len() == 7 {
                Some(num(fields[5])?)
            } else {
                None
            },
            ess: if fields.len() == 7 {
                Some(num(fields[6])?)
            } else {
                None
            },
        })
    }
}

fn format_ess<T: Real>(ess: T) -> String {
    if ess.is_nan() {
        "NA".to_string()
    } else {
        format!("{ess:.1}")
    }
}

/// Attach gene names to summary rows: `alpha[i]`/`beta[i]` variables map to
/// the i-th gene (1-based), hyperparameters get an empty gene field.
pub fn posterior_rows<T: Real>(
    summary: &PosteriorSummary<T>,
    genes: &[GeneId],
) -> Vec<PosteriorRow<T>> {
    summary
        .rows
        .iter()
        .map(|row: &SummaryRow<T>| {
            let gene = gene_of_variable(&row.name, genes);
            PosteriorRow {
                variable: row.name.clone(),
                gene,
                median: row.median,
                mean: row.mean,
                stddev: row.stddev,
                rhat: Some(row.rhat),
                ess: Some(row.ess),
            }
        })
        .collect()
}

fn gene_of_variable(name: &str, genes: &[GeneId]) -> String {
    for prefix in ["alpha[", "beta["] {
        if let Some(rest) = name.strip_prefix(prefix) {
            if let Some(idx) = rest.strip_suffix(']').and_then(|s| s.parse::<usize>().ok()) {
                if idx >= 1 && idx <= genes.len() {
                    return genes[idx - 1].to_string();
                }
            }
        }
    }
    String::new()
}

/// Render the posterior table: header plus one row per parameter, in the
/// summary's row order (hyperparameters first, then the per-gene blocks).
pub fn render_posterior_table<T: Real>(rows: &[PosteriorRow<T>]) -> String {
    let mut out = String::from(POSTERIOR_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

/// Parse a posterior table produced by [`render_posterior_table`].
pub fn parse_posterior_table<T: Real>(text: &str) -> Result<Vec<PosteriorRow<T>>, ReportError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.is_empty() {
            continue;
        }
        rows.push(PosteriorRow::parse_csv_line(line, i + 1)?);
    }
    Ok(rows)
}

/// Render the LBP convergence trace as `iteration,max_delta,pearson_r`.
pub fn render_convergence_trace<T: Real>(
    trace: &ConvergenceTrace<T>,
) -> Result<String, ReportError> {
    if trace.rows.is_empty() {
        return Err(ReportError::EmptyTrace);
    }
    let mut out = String::from("iteration,max_delta,pearson_r\n");
    for row in &trace.rows {
        out.push_str(&format!(
            "{},{},{}\n",
            row.iteration, row.max_delta, row.pearson_r
        ));
    }
    Ok(out)
}

/// Parse a trace rendered by [`render_convergence_trace`]. The converged
/// flag is not part of the file and comes back as `true`.
pub fn parse_convergence_trace<T: Real>(text: &str) -> Result<ConvergenceTrace<T>, ReportError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let err = || ReportError::ParseError {
            what: "trace row",
            line: i + 1,
        };
        if fields.len() != 3 {
            return Err(err());
        }
        rows.push(TraceRow {
            iteration: fields[0].parse().map_err(|_| err())?,
            max_delta: fields[1].parse().map_err(|_| err())?,
            pearson_r: fields[2].parse().map_err(|_| err())?,
        });
    }
    if rows.is_empty() {
        return Err(ReportError::EmptyTrace);
    }
    Ok(ConvergenceTrace {
        rows,
        converged: true,
    })
}

/// Marginals as `gene,state,probability` rows, full precision.
pub fn render_marginals<T: Real>(marginals: &Marginals<T>, genes: &[GeneId]) -> String {
    let mut out = String::from("gene,state,probability\n");
    for (gene, probs) in genes.iter().zip(&marginals.per_variable) {
        for (state, p) in probs.iter().enumerate() {
            out.push_str(&format!("{gene},{state},{p}\n"));
        }
    }
    out
}

/// Evaluation metrics `{r, p, n}` serialized with full double precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

pub fn render_evaluation(eval: &Evaluation) -> Result<String, ReportError> {
    if !(eval.r.abs() <= 1.0) || !(0.0..=1.0).contains(&eval.p) {
        return Err(ReportError::BadMetric);
    }
    serde_json::to_string_pretty(eval).map_err(|e| ReportError::WriteError(e.to_string()))
}

pub fn parse_evaluation(text: &str) -> Result<Evaluation, ReportError> {
    serde_json::from_str(text).map_err(|_| ReportError::ParseError {
        what: "evaluation",
        line: 1,
    })
}

/// Enrichment results as CSV, p-values in exponential notation.
pub fn render_enrichment<T: Real>(results: &[EnrichmentResult<T>]) -> String {
    let mut out = String::from("pathway_id,description,overlap,size,p_value,adjusted_p\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{:e},{:e}\n",
            r.pathway_id, r.description, r.overlap_count, r.pathway_size, r.p_value, r.adjusted_p
        ));
    }
    out
}

/// Provenance record accompanying every pipeline invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: u64,
    /// resolved configuration snapshot
    pub config: BTreeMap<String, String>,
    /// sha256 digest of the exact bytes consumed, keyed by path
    pub input_digests: BTreeMap<String, String>,
    /// unix epoch seconds
    pub started_at: u64,
    pub finished_at: u64,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// Write bytes to `dest`, returning how many were written.
pub fn emit(dest: &std::path::Path, content: &str) -> Result<usize, ReportError> {
    std::fs::write(dest, content)
        .map_err(|e| ReportError::WriteError(format!("{}: {e}", dest.display())))?;
    Ok(content.len())
}

/// Write the posterior table for `summary` to `dest`.
pub fn emit_posterior_table<T: Real>(
    summary: &PosteriorSummary<T>,
    genes: &[GeneId],
    dest: &std::path::Path,
) -> Result<usize, ReportError> {
    emit(dest, &render_posterior_table(&posterior_rows(summary, genes)))
}

/// Write the LBP convergence trace to `dest`.
pub fn emit_convergence_trace<T: Real>(
    trace: &ConvergenceTrace<T>,
    dest: &std::path::Path,
) -> Result<usize, ReportError> {
    emit(dest, &render_convergence_trace(trace)?)
}

/// Write the `{r, p, n}` evaluation record to `dest`.
pub fn emit_evaluation(eval: &Evaluation, dest: &std::path::Path) -> Result<usize, ReportError> {
    emit(dest, &render_evaluation(eval)?)
}
