//! Pipeline configuration: a TOML file with sections per stage, every
//! field overridable from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: Seed,
    #[serde(default)]
    pub threads: Threads,
    #[serde(default)]
    pub allow_nonconverged: bool,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default)]
    pub preprocess: Preprocess,
    #[serde(default)]
    pub fgn: Fgn,
    #[serde(default)]
    pub hmc: Hmc,
    #[serde(default)]
    pub priors: Priors,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Default for Seed {
    fn default() -> Self {
        Seed(42)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Threads(pub usize);

impl Default for Threads {
    fn default() -> Self {
        Threads(1)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    /// up-regulated fold-change table (CSV/TSV by extension)
    pub up: Option<PathBuf>,
    /// down-regulated fold-change table
    pub down: Option<PathBuf>,
    /// sample metadata sidecar (sample_id, stage, tissue, condition)
    pub metadata: Option<PathBuf>,
    /// GMT gene sets for enrichment
    pub gene_sets: Option<PathBuf>,
    /// optional externally curated edge list (3-column TSV)
    pub edges: Option<PathBuf>,
    /// optional count table for the hierarchical model
    pub counts: Option<PathBuf>,
    /// count metadata sidecar (sample_id, total, stage_indicator)
    pub count_metadata: Option<PathBuf>,
    /// optional symbol -> RefSeq id mapping (2-column TSV)
    pub refseq_map: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Preprocess {
    /// absolute fold-change significance cutoff
    pub cutoff: f64,
    /// profile transform: "signed_log2" or "raw"
    pub transform: String,
    /// |r| threshold for co-expression edges
    pub correlation_threshold: f64,
}

impl Default for Preprocess {
    fn default() -> Self {
        Preprocess {
            cutoff: 1.5,
            transform: "signed_log2".to_string(),
            correlation_threshold: 0.8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fgn {
    /// number of discretization states K
    pub states: usize,
    pub coupling: f64,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub gmm_max_iter: usize,
    pub gmm_tol: f64,
    /// outer mixture re-estimation: "beliefs" or "raw_data"
    pub gmm_update: String,
    pub outer_max_iter: usize,
    pub outer_tol: f64,
}

impl Default for Fgn {
    fn default() -> Self {
        Fgn {
            states: 2,
            coupling: 1.0,
            damping: 0.5,
            tol: 1e-6,
            max_iter: 200,
            gmm_max_iter: 500,
            gmm_tol: 1e-8,
            gmm_update: "beliefs".to_string(),
            outer_max_iter: 20,
            outer_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hmc {
    pub step_size: f64,
    pub num_leapfrog: usize,
    pub warmup: usize,
    pub samples: usize,
    pub chains: usize,
    pub target_accept: f64,
    pub adapt: bool,
    pub adapt_mass: bool,
}

impl Default for Hmc {
    fn default() -> Self {
        Hmc {
            step_size: 0.1,
            num_leapfrog: 32,
            warmup: 1000,
            samples: 1000,
            chains: 4,
            target_accept: 0.8,
            adapt: true,
            adapt_mass: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Priors {
    pub mu_alpha_sd: f64,
    pub sigma_alpha_scale: f64,
    pub sigma_beta_scale: f64,
    pub dispersion_scale: f64,
    /// multiplier on per-sample depth inside the model offset
    pub count_scale: f64,
    /// base count used when deriving pseudo-counts from fold changes
    pub pseudocount_scale: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Priors {
            mu_alpha_sd: 5.0,
            sigma_alpha_scale: 1.0,
            sigma_beta_scale: 1.0,
            dispersion_scale: 5.0,
            count_scale: 1.0,
            pseudocount_scale: 1000.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: PathBuf,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            dir: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    /// Load a TOML config; relative input paths are resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let mut cfg: PipelineConfig = toml::from_str(&text)
            .map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&path);
                }
            }
        };
        fix(&mut self.inputs.up);
        fix(&mut self.inputs.down);
        fix(&mut self.inputs.metadata);
        fix(&mut self.inputs.gene_sets);
        fix(&mut self.inputs.edges);
        fix(&mut self.inputs.counts);
        fix(&mut self.inputs.count_metadata);
        fix(&mut self.inputs.refseq_map);
        if self.output.dir.is_relative() {
            self.output.dir = base.join(&self.output.dir);
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
