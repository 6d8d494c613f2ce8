//! `network`: build the co-expression network over the significant genes,
//! or ingest an externally curated edge list.

use genepgm::ingest::parse_edge_list;
use genepgm::preprocess::{build_coexpression_network, significant_genes, CoexpressionNetwork};

use super::{classify_ingest, CliError, RunContext};

pub fn cmd_network(ctx: &mut RunContext) -> Result<(), CliError> {
    let net = load_network(ctx)?;
    eprintln!(
        "network: {} nodes, {} edges, {} connected components",
        net.n_nodes(),
        net.edges.len(),
        net.connected_components()
    );
    let mut nodes = String::new();
    for n in &net.nodes {
        nodes.push_str(n.as_str());
        nodes.push('\n');
    }
    ctx.write_output("network.tsv", &net.edges.to_tsv())?;
    ctx.write_output("network_nodes.txt", &nodes)?;
    ctx.write_manifest("network")
}

/// Shared by `network` and `fgn`: an explicit edge-list input wins,
/// otherwise the network is built from pairwise correlations of the
/// significant genes.
pub fn load_network(ctx: &mut RunContext) -> Result<CoexpressionNetwork<f64>, CliError> {
    if let Some(path) = ctx.config.inputs.edges.clone() {
        let text = ctx.read_input(&path)?;
        let edges = parse_edge_list(&text).map_err(classify_ingest)?;
        return Ok(CoexpressionNetwork::from_edge_list(edges, &[]));
    }
    let matrix = ctx.load_merged_matrix()?;
    let significant = significant_genes(&matrix, ctx.config.preprocess.cutoff)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let threshold = ctx.config.preprocess.correlation_threshold;
    let (net, skipped) =
        build_coexpression_network(&matrix, &significant, threshold, ctx.transform()?)
            .map_err(|e| CliError::Validation(e.to_string()))?;
    if skipped > 0 {
        eprintln!("network: skipped {skipped} pairs with undefined correlation");
    }
    Ok(net)
}
