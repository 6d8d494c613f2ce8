//! `fit`: sample the hierarchical negative-binomial model with HMC, write
//! per-chain draws and the posterior summary table.

use genepgm::bayes::{
    fold_to_pseudocounts, CountData, ModelParams, NbModelNoncentered, PriorConfig,
};
use genepgm::hmc::{hmc_sample_par, summarize, ChainResult, HmcConfig};
use genepgm::ingest::{parse_count_metadata, parse_count_table, Delimiter};
use genepgm::report::{posterior_rows, render_posterior_table};

use super::{classify_ingest, CliError, RunContext};

pub fn cmd_fit(ctx: &mut RunContext) -> Result<(), CliError> {
    let data = load_counts(ctx)?;
    let genes = data.gene_ids().to_vec();
    eprintln!(
        "fit: {} genes x {} samples, {} chains x ({} warmup + {} samples)",
        data.n_genes(),
        data.n_samples(),
        ctx.config.hmc.chains,
        ctx.config.hmc.warmup,
        ctx.config.hmc.samples
    );

    let prior = PriorConfig {
        mu_alpha_sd: ctx.config.priors.mu_alpha_sd,
        sigma_alpha_scale: ctx.config.priors.sigma_alpha_scale,
        sigma_beta_scale: ctx.config.priors.sigma_beta_scale,
        dispersion_scale: ctx.config.priors.dispersion_scale,
        count_scale: ctx.config.priors.count_scale,
    };
    let target = NbModelNoncentered {
        data: &data,
        prior,
    };
    let hmc = &ctx.config.hmc;
    let cfg = HmcConfig {
        step_size: hmc.step_size,
        num_leapfrog: hmc.num_leapfrog,
        warmup: hmc.warmup,
        samples: hmc.samples,
        chains: hmc.chains,
        seed: ctx.config.seed.0,
        target_accept: hmc.target_accept,
        adapt: hmc.adapt,
        adapt_mass: hmc.adapt_mass,
    };
    let init = initial_point(&data, &ctx.config.priors.count_scale);
    let chains = hmc_sample_par(&target, &init, &cfg, ctx.config.threads.0)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let names = ModelParams::<f64>::names(data.n_genes());
    for (c, chain) in chains.iter().enumerate() {
        ctx.write_output(&format!("draws_chain{c}.csv"), &render_draws(chain, &names))?;
        eprintln!(
            "fit: chain {c}: accept {:.3}, {} divergences, step size {:.4}",
            chain.accept_rate, chain.divergence_count, chain.final_step_size
        );
    }

    let summary = summarize(&chains, &names).map_err(|e| CliError::Validation(e.to_string()))?;
    let rows = posterior_rows(&summary, &genes);
    ctx.write_output("posterior.csv", &render_posterior_table(&rows))?;
    ctx.write_manifest("fit")?;

    let worst = summary
        .rows
        .iter()
        .map(|r| r.rhat)
        .fold(f64::NEG_INFINITY, f64::max);
    let nonconverged: Vec<&str> = summary
        .rows
        .iter()
        .filter(|r| r.rhat.is_nan() || r.rhat > 1.1)
        .map(|r| r.name.as_str())
        .collect();
    if !nonconverged.is_empty() {
        let msg = format!(
            "{} of {} parameters have split R-hat above 1.1 (worst {:.3}): {}",
            nonconverged.len(),
            summary.rows.len(),
            worst,
            nonconverged.join(", ")
        );
        if ctx.config.allow_nonconverged {
            eprintln!("fit: warning: {msg}");
        } else {
            return Err(CliError::Convergence(msg));
        }
    } else {
        eprintln!("fit: all split R-hat <= 1.1 (worst {worst:.4})");
    }
    Ok(())
}

fn load_counts(ctx: &mut RunContext) -> Result<CountData, CliError> {
    match (
        ctx.config.inputs.counts.clone(),
        ctx.config.inputs.count_metadata.clone(),
    ) {
        (Some(counts_path), Some(meta_path)) => {
            let counts_text = ctx.read_input(&counts_path)?;
            let meta_text = ctx.read_input(&meta_path)?;
            let table = parse_count_table(
                &counts_text,
                Delimiter::from_path(&counts_path.display().to_string()),
            )
            .map_err(classify_ingest)?;
            let meta = parse_count_metadata(&meta_text).map_err(classify_ingest)?;
            CountData::assemble(&table, &meta).map_err(|e| CliError::Validation(e.to_string()))
        }
        (Some(_), None) | (None, Some(_)) => Err(CliError::Input(
            "counts and count_metadata must be configured together".to_string(),
        )),
        (None, None) => {
            // no raw counts: derive pseudo-counts from the fold changes
            let matrix = ctx.load_merged_matrix()?;
            eprintln!(
                "fit: no count inputs configured; deriving pseudo-counts (base {})",
                ctx.config.priors.pseudocount_scale
            );
            Ok(fold_to_pseudocounts(
                &matrix,
                ctx.config.priors.pseudocount_scale,
            ))
        }
    }
}

/// Data-informed start: per-gene log rates against the depth offset,
/// hyperparameters at their prior centers.
fn initial_point(data: &CountData, count_scale: &f64) -> Vec<f64> {
    let g = data.n_genes();
    let s = data.n_samples();
    let offset_total: f64 = (0..s)
        .map(|si| data.total(si) as f64 * count_scale)
        .sum();
    let alpha: Vec<f64> = (0..g)
        .map(|gi| {
            let total: f64 = (0..s).map(|si| data.count(gi, si) as f64).sum();
            ((total + 0.5) / offset_total).ln()
        })
        .collect();
    let mu_alpha = if g > 0 {
        alpha.iter().sum::<f64>() / g as f64
    } else {
        0.0
    };
    // non-centered coordinates: raw offsets of the per-gene levels
    let sigma_alpha0 = 0.5f64;
    let params = ModelParams {
        mu_alpha,
        log_sigma_alpha: sigma_alpha0.ln(),
        alpha: alpha.iter().map(|a| (a - mu_alpha) / sigma_alpha0).collect(),
        log_sigma_beta: (0.3f64).ln(),
        beta: vec![0.0; g],
        log_dispersion: (10.0f64).ln(),
    };
    params.to_unconstrained()
}

fn render_draws(chain: &ChainResult<f64>, names: &[String]) -> String {
    let mut out = names.join(",");
    out.push('\n');
    for draw in &chain.draws {
        let mut first = true;
        for v in draw {
            if !first {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
            first = false;
        }
        out.push('\n');
    }
    out
}
