//! `preprocess`: merge regulation tables, filter significant genes,
//! cluster them, run pathway enrichment.

use std::collections::BTreeSet;

use genepgm::ingest::{parse_gmt, parse_refseq_map};
use genepgm::preprocess::{enrich, hierarchical_cluster, significant_genes};
use genepgm::report::render_enrichment;

use super::{classify_ingest, CliError, RunContext};

pub fn cmd_preprocess(ctx: &mut RunContext) -> Result<(), CliError> {
    let matrix = ctx.load_merged_matrix()?;
    let transform = ctx.transform()?;
    ctx.write_output("merged.csv", &matrix.to_delimited(','))?;

    let cutoff = ctx.config.preprocess.cutoff;
    let significant =
        significant_genes(&matrix, cutoff).map_err(|e| CliError::Validation(e.to_string()))?;
    eprintln!(
        "preprocess: {} of {} genes pass |fold| >= {cutoff}",
        significant.len(),
        matrix.n_genes()
    );

    // optional RefSeq annotation joined onto the significant gene list
    let refseq = match ctx.config.inputs.refseq_map.clone() {
        Some(path) => {
            let text = ctx.read_input(&path)?;
            parse_refseq_map(&text).map_err(classify_ingest)?
        }
        None => Default::default(),
    };
    let mut gene_list = String::from("gene\trefseq_id\n");
    for g in &significant {
        gene_list.push_str(&format!(
            "{g}\t{}\n",
            refseq.get(g).map(String::as_str).unwrap_or("")
        ));
    }
    ctx.write_output("significant_genes.tsv", &gene_list)?;

    let dendrogram = hierarchical_cluster(&matrix, &significant, transform)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    ctx.write_output("dendrogram.nwk", &dendrogram.to_newick())?;
    // heatmap data: values in clustered row order
    let ordered = matrix.subset_genes(&dendrogram.leaf_order());
    ctx.write_output("heatmap.csv", &ordered.to_delimited(','))?;

    let gmt_path = ctx.require(&ctx.config.inputs.gene_sets.clone(), "gene_sets")?;
    let gmt_text = ctx.read_input(&gmt_path)?;
    let db = parse_gmt(&gmt_text).map_err(classify_ingest)?;
    let universe: BTreeSet<_> = matrix.genes().iter().cloned().collect();
    let query: BTreeSet<_> = significant.iter().cloned().collect();
    let results =
        enrich::<f64>(&query, &db, &universe).map_err(|e| CliError::Validation(e.to_string()))?;
    ctx.write_output("enrichment.csv", &render_enrichment(&results))?;

    ctx.write_manifest("preprocess")
}
