//! `fgn`: discretize expression with the Gaussian mixture, run loopy belief
//! propagation on the co-expression factor graph, write marginals, the
//! convergence trace and the evaluation metrics.

use genepgm::fgn::{
    build_factor_graph, discretize_and_infer, evaluate_marginals, EmConfig, GmmUpdate,
    InferConfig, LbpConfig,
};
use genepgm::preprocess::significant_genes;
use genepgm::report::{
    render_convergence_trace, render_evaluation, render_marginals, Evaluation,
};

use super::network::load_network;
use super::{CliError, RunContext};

pub fn cmd_fgn(ctx: &mut RunContext) -> Result<(), CliError> {
    let matrix = ctx.load_merged_matrix()?;
    let significant = significant_genes(&matrix, ctx.config.preprocess.cutoff)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let matrix = matrix.subset_genes(&significant);
    let net = load_network(ctx)?;

    let fgn_cfg = &ctx.config.fgn;
    let gmm_update = match fgn_cfg.gmm_update.as_str() {
        "beliefs" => GmmUpdate::Beliefs,
        "raw_data" => GmmUpdate::RawData,
        other => {
            return Err(CliError::Validation(format!(
                "unknown fgn.gmm_update `{other}`"
            )))
        }
    };
    let cfg = InferConfig {
        n_states: fgn_cfg.states,
        coupling: fgn_cfg.coupling,
        transform: ctx.transform()?,
        em: EmConfig {
            max_iter: fgn_cfg.gmm_max_iter,
            tol: fgn_cfg.gmm_tol,
            seed: ctx.config.seed.0,
            variance_floor: 1e-6,
        },
        lbp: LbpConfig {
            damping: fgn_cfg.damping,
            max_iter: fgn_cfg.max_iter,
            tol: fgn_cfg.tol,
        },
        gmm_update,
        outer_max_iter: fgn_cfg.outer_max_iter,
        outer_tol: fgn_cfg.outer_tol,
    };

    let result =
        discretize_and_infer(&matrix, &net, &cfg).map_err(|e| CliError::Validation(e.to_string()))?;

    if result.gmm.separation_score() < 1.0 {
        eprintln!(
            "fgn: warning: weak evidence separation between mixture states \
             (adjacent means {:.3} pooled sd apart); consider fewer states",
            result.gmm.separation_score()
        );
    }
    if !result.trace.converged {
        eprintln!(
            "fgn: warning: LBP did not converge within {} iterations",
            cfg.lbp.max_iter
        );
    } else {
        eprintln!(
            "fgn: LBP converged in {} iterations ({} outer rounds)",
            result.trace.iterations(),
            result.outer_iterations
        );
    }

    ctx.write_output("marginals.csv", &render_marginals(&result.marginals, &net.nodes))?;
    let trace_text =
        render_convergence_trace(&result.trace).map_err(|e| CliError::Validation(e.to_string()))?;
    ctx.write_output("trace.csv", &trace_text)?;

    // the factor graph itself, for downstream consumers
    let evidence_map = net
        .nodes
        .iter()
        .cloned()
        .zip(result.evidence.iter().cloned())
        .collect();
    let graph = build_factor_graph(&net, &evidence_map, cfg.coupling, cfg.n_states)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    ctx.write_output("graph.json", &graph.to_json())?;

    // predicted marginals against observed state proportions (the evidence)
    let (r, p, n) = evaluate_marginals(&result.marginals, &result.evidence)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    eprintln!("fgn: marginals vs observed proportions: r = {r:.4}, p = {p:.3e}, n = {n}");
    let eval = Evaluation { r, p, n };
    let eval_text =
        render_evaluation(&eval).map_err(|e| CliError::Validation(e.to_string()))?;
    ctx.write_output("evaluation.json", &eval_text)?;

    ctx.write_manifest("fgn")
}
