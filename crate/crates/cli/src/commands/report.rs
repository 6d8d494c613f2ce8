//! `report`: verify the run directory holds every declared artifact and
//! regenerate the manifest.

use super::{CliError, RunContext};

/// Artifacts a full pipeline run must leave behind.
const DECLARED: &[&str] = &[
    "merged.csv",
    "significant_genes.tsv",
    "dendrogram.nwk",
    "heatmap.csv",
    "enrichment.csv",
    "network.tsv",
    "marginals.csv",
    "trace.csv",
    "evaluation.json",
    "graph.json",
    "posterior.csv",
    "draws_chain0.csv",
    "manifest.json",
];

pub fn cmd_report(ctx: &mut RunContext) -> Result<(), CliError> {
    let mut missing = Vec::new();
    for name in DECLARED {
        let path = ctx.out_dir().join(name);
        let status = if path.is_file() { "present" } else { "MISSING" };
        println!("{status:>8}  {name}");
        if !path.is_file() {
            missing.push(*name);
        }
    }
    if !missing.is_empty() {
        return Err(CliError::Input(format!(
            "run directory {} is missing: {}",
            ctx.out_dir().display(),
            missing.join(", ")
        )));
    }
    ctx.write_manifest("report")
}
