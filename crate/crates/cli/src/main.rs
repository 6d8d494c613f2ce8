//! Command-line front end for the gene-expression PGM pipeline.
//!
//! Exit codes: 0 success, 2 input error, 3 validation error,
//! 4 convergence failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{cmd_fgn, cmd_fit, cmd_network, cmd_preprocess, cmd_report, RunContext};
use config::PipelineConfig;

#[derive(Parser)]
#[command(
    name = "genepgm",
    version,
    about = "Gene-expression disease modelling: co-expression factor graphs \
             with loopy belief propagation and a hierarchical count model \
             sampled by HMC"
)]
struct Cli {
    /// Pipeline config file (TOML)
    #[arg(long, global = true, default_value = "config.toml")]
    config: PathBuf,
    /// Master RNG seed for every stochastic stage
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for all artifacts
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for chain-level parallelism
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Keep exit status 0 even when split R-hat exceeds 1.1
    #[arg(long, global = true)]
    allow_nonconverged: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Merge regulation tables, filter significant genes, cluster and
    /// run pathway enrichment
    Preprocess(PreprocessArgs),
    /// Build the co-expression network (or ingest a curated edge list)
    Network(NetworkArgs),
    /// Factor-graph inference: GMM discretization plus loopy belief
    /// propagation
    Fgn(FgnArgs),
    /// Sample the hierarchical count model with HMC
    Fit(FitArgs),
    /// Verify run artifacts and refresh the manifest
    Report,
}

#[derive(Args, Default)]
struct PreprocessArgs {
    /// Up-regulated fold-change table
    #[arg(long)]
    up: Option<PathBuf>,
    /// Down-regulated fold-change table
    #[arg(long)]
    down: Option<PathBuf>,
    /// Sample metadata sidecar TSV
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// GMT gene-set file
    #[arg(long)]
    gene_sets: Option<PathBuf>,
    /// Symbol-to-RefSeq mapping TSV
    #[arg(long)]
    refseq_map: Option<PathBuf>,
    /// Absolute fold-change significance cutoff (must exceed 1)
    #[arg(long)]
    cutoff: Option<f64>,
    /// Profile transform: signed_log2 or raw
    #[arg(long)]
    transform: Option<String>,
}

#[derive(Args, Default)]
struct NetworkArgs {
    #[arg(long)]
    up: Option<PathBuf>,
    #[arg(long)]
    down: Option<PathBuf>,
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// Curated edge list; skips correlation-based construction
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    transform: Option<String>,
    /// |r| threshold for keeping an edge
    #[arg(long)]
    correlation_threshold: Option<f64>,
}

#[derive(Args, Default)]
struct FgnArgs {
    #[arg(long)]
    up: Option<PathBuf>,
    #[arg(long)]
    down: Option<PathBuf>,
    #[arg(long)]
    metadata: Option<PathBuf>,
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    transform: Option<String>,
    #[arg(long)]
    correlation_threshold: Option<f64>,
    /// Number of discretization states K
    #[arg(long)]
    states: Option<usize>,
    /// Spin-coupling strength multiplier on edge correlations
    #[arg(long)]
    coupling: Option<f64>,
    /// Message damping in [0, 1)
    #[arg(long)]
    damping: Option<f64>,
    /// Message-residual convergence tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Maximum LBP sweeps
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    gmm_max_iter: Option<usize>,
    #[arg(long)]
    gmm_tol: Option<f64>,
    /// Mixture re-estimation between LBP rounds: beliefs or raw_data
    #[arg(long)]
    gmm_update: Option<String>,
    #[arg(long)]
    outer_max_iter: Option<usize>,
    #[arg(long)]
    outer_tol: Option<f64>,
}

#[derive(Args, Default)]
struct FitArgs {
    /// Count table (gene rows, sample columns)
    #[arg(long)]
    counts: Option<PathBuf>,
    /// Count metadata sidecar (sample_id, total, stage_indicator)
    #[arg(long)]
    count_metadata: Option<PathBuf>,
    #[arg(long)]
    up: Option<PathBuf>,
    #[arg(long)]
    down: Option<PathBuf>,
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// Initial leapfrog step size
    #[arg(long)]
    step_size: Option<f64>,
    /// Leapfrog steps per proposal
    #[arg(long)]
    num_leapfrog: Option<usize>,
    /// Warmup iterations per chain (discarded)
    #[arg(long)]
    warmup: Option<usize>,
    /// Post-warmup draws per chain
    #[arg(long)]
    samples: Option<usize>,
    /// Number of chains
    #[arg(long)]
    chains: Option<usize>,
    /// Dual-averaging target acceptance rate
    #[arg(long)]
    target_accept: Option<f64>,
    /// Enable step-size adaptation during warmup
    #[arg(long)]
    adapt: Option<bool>,
    /// Estimate a diagonal mass matrix during warmup
    #[arg(long)]
    adapt_mass: Option<bool>,
    #[arg(long)]
    mu_alpha_sd: Option<f64>,
    #[arg(long)]
    sigma_alpha_scale: Option<f64>,
    #[arg(long)]
    sigma_beta_scale: Option<f64>,
    #[arg(long)]
    dispersion_scale: Option<f64>,
    /// Depth multiplier inside the model offset
    #[arg(long)]
    count_scale: Option<f64>,
    /// Base count when deriving pseudo-counts from fold changes
    #[arg(long)]
    pseudocount_scale: Option<f64>,
}

macro_rules! override_field {
    ($target:expr, $value:expr) => {
        if let Some(v) = $value {
            $target = v;
        }
    };
}

fn apply_overrides(cfg: &mut PipelineConfig, cli: &Cli) {
    override_field!(cfg.seed.0, cli.seed);
    override_field!(cfg.output.dir, cli.out_dir.clone());
    override_field!(cfg.threads.0, cli.threads);
    if cli.allow_nonconverged {
        cfg.allow_nonconverged = true;
    }
    match &cli.command {
        Command::Preprocess(a) => {
            override_field!(cfg.inputs.up, a.up.clone().map(Some));
            override_field!(cfg.inputs.down, a.down.clone().map(Some));
            override_field!(cfg.inputs.metadata, a.metadata.clone().map(Some));
            override_field!(cfg.inputs.gene_sets, a.gene_sets.clone().map(Some));
            override_field!(cfg.inputs.refseq_map, a.refseq_map.clone().map(Some));
            override_field!(cfg.preprocess.cutoff, a.cutoff);
            override_field!(cfg.preprocess.transform, a.transform.clone());
        }
        Command::Network(a) => {
            override_field!(cfg.inputs.up, a.up.clone().map(Some));
            override_field!(cfg.inputs.down, a.down.clone().map(Some));
            override_field!(cfg.inputs.metadata, a.metadata.clone().map(Some));
            override_field!(cfg.inputs.edges, a.edges.clone().map(Some));
            override_field!(cfg.preprocess.cutoff, a.cutoff);
            override_field!(cfg.preprocess.transform, a.transform.clone());
            override_field!(
                cfg.preprocess.correlation_threshold,
                a.correlation_threshold
            );
        }
        Command::Fgn(a) => {
            override_field!(cfg.inputs.up, a.up.clone().map(Some));
            override_field!(cfg.inputs.down, a.down.clone().map(Some));
            override_field!(cfg.inputs.metadata, a.metadata.clone().map(Some));
            override_field!(cfg.inputs.edges, a.edges.clone().map(Some));
            override_field!(cfg.preprocess.cutoff, a.cutoff);
            override_field!(cfg.preprocess.transform, a.transform.clone());
            override_field!(
                cfg.preprocess.correlation_threshold,
                a.correlation_threshold
            );
            override_field!(cfg.fgn.states, a.states);
            override_field!(cfg.fgn.coupling, a.coupling);
            override_field!(cfg.fgn.damping, a.damping);
            override_field!(cfg.fgn.tol, a.tol);
            override_field!(cfg.fgn.max_iter, a.max_iter);
            override_field!(cfg.fgn.gmm_max_iter, a.gmm_max_iter);
            override_field!(cfg.fgn.gmm_tol, a.gmm_tol);
            override_field!(cfg.fgn.gmm_update, a.gmm_update.clone());
            override_field!(cfg.fgn.outer_max_iter, a.outer_max_iter);
            override_field!(cfg.fgn.outer_tol, a.outer_tol);
        }
        Command::Fit(a) => {
            override_field!(cfg.inputs.counts, a.counts.clone().map(Some));
            override_field!(cfg.inputs.count_metadata, a.count_metadata.clone().map(Some));
            override_field!(cfg.inputs.up, a.up.clone().map(Some));
            override_field!(cfg.inputs.down, a.down.clone().map(Some));
            override_field!(cfg.inputs.metadata, a.metadata.clone().map(Some));
            override_field!(cfg.hmc.step_size, a.step_size);
            override_field!(cfg.hmc.num_leapfrog, a.num_leapfrog);
            override_field!(cfg.hmc.warmup, a.warmup);
            override_field!(cfg.hmc.samples, a.samples);
            override_field!(cfg.hmc.chains, a.chains);
            override_field!(cfg.hmc.target_accept, a.target_accept);
            override_field!(cfg.hmc.adapt, a.adapt);
            override_field!(cfg.hmc.adapt_mass, a.adapt_mass);
            override_field!(cfg.priors.mu_alpha_sd, a.mu_alpha_sd);
            override_field!(cfg.priors.sigma_alpha_scale, a.sigma_alpha_scale);
            override_field!(cfg.priors.sigma_beta_scale, a.sigma_beta_scale);
            override_field!(cfg.priors.dispersion_scale, a.dispersion_scale);
            override_field!(cfg.priors.count_scale, a.count_scale);
            override_field!(cfg.priors.pseudocount_scale, a.pseudocount_scale);
        }
        Command::Report => {}
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match PipelineConfig::load(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("genepgm: input error: {e}");
            return ExitCode::from(2);
        }
    };
    apply_overrides(&mut cfg, &cli);

    let mut ctx = RunContext::new(cfg);
    let result = match &cli.command {
        Command::Preprocess(_) => cmd_preprocess(&mut ctx),
        Command::Network(_) => cmd_network(&mut ctx),
        Command::Fgn(_) => cmd_fgn(&mut ctx),
        Command::Fit(_) => cmd_fit(&mut ctx),
        Command::Report => cmd_report(&mut ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("genepgm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
