//! Subcommand implementations.

mod fgn;
mod fit;
mod network;
mod preprocess;
mod report;

pub use fgn::cmd_fgn;
pub use fit::cmd_fit;
pub use network::cmd_network;
pub use preprocess::cmd_preprocess;
pub use report::cmd_report;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use genepgm::ingest::{
    merge_regulation_files, parse_expression_table, parse_sample_metadata, Delimiter,
    IngestError,
};
use genepgm::preprocess::ProfileTransform;
use genepgm::report::RunManifest;
use genepgm::ExpressionMatrix64;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;

/// Failure classes mapped onto the stable exit codes:
/// 2 input error, 3 validation error, 4 convergence failure.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Validation(String),
    Convergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Convergence(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Convergence(m) => write!(f, "convergence failure: {m}"),
        }
    }
}

/// Syntax-level parse failures are input errors (exit 2); violated data
/// invariants are validation errors (exit 3).
pub fn classify_ingest(err: IngestError) -> CliError {
    match err {
        IngestError::MalformedTable { .. }
        | IngestError::BadValue { .. }
        | IngestError::MalformedGmtLine(_)
        | IngestError::MalformedEdgeLine(_)
        | IngestError::EmptyTable
        | IngestError::BadMetadata { .. }
        | IngestError::MissingMetadata(_) => CliError::Input(err.to_string()),
        _ => CliError::Validation(err.to_string()),
    }
}

/// Tracks every input file read, so the manifest can record the digest of
/// the exact bytes consumed.
pub struct RunContext {
    pub config: PipelineConfig,
    pub digests: BTreeMap<String, String>,
    pub started_at: u64,
}

impl RunContext {
    pub fn new(config: PipelineConfig) -> Self {
        RunContext {
            config,
            digests: BTreeMap::new(),
            started_at: epoch_seconds(),
        }
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.output.dir
    }

    /// Read an input file, recording its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let digest = Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>();
        self.digests.insert(path.display().to_string(), digest);
        String::from_utf8(bytes)
            .map_err(|_| CliError::Input(format!("{} is not valid UTF-8", path.display())))
    }

    pub fn require(&self, field: &Option<PathBuf>, name: &str) -> Result<PathBuf, CliError> {
        field
            .clone()
            .ok_or_else(|| CliError::Input(format!("config is missing inputs.{name}")))
    }

    /// Parse the up/down tables, merge them into the signed matrix and join
    /// the sample metadata.
    pub fn load_merged_matrix(&mut self) -> Result<ExpressionMatrix64, CliError> {
        let up_path = self.require(&self.config.inputs.up.clone(), "up")?;
        let down_path = self.require(&self.config.inputs.down.clone(), "down")?;
        let meta_path = self.require(&self.config.inputs.metadata.clone(), "metadata")?;
        let up_text = self.read_input(&up_path)?;
        let down_text = self.read_input(&down_path)?;
        let meta_text = self.read_input(&meta_path)?;

        let up = parse_expression_table(&up_text, Delimiter::from_path(&up_path.display().to_string()))
            .map_err(classify_ingest)?;
        let down = parse_expression_table(
            &down_text,
            Delimiter::from_path(&down_path.display().to_string()),
        )
        .map_err(classify_ingest)?;
        let meta = parse_sample_metadata(&meta_text).map_err(classify_ingest)?;
        let merged = merge_regulation_files(&up, &down).map_err(classify_ingest)?;
        merged.with_metadata(&meta).map_err(classify_ingest)
    }

    pub fn transform(&self) -> Result<ProfileTransform, CliError> {
        ProfileTransform::parse(&self.config.preprocess.transform).ok_or_else(|| {
            CliError::Validation(format!(
                "unknown preprocess.transform `{}`",
                self.config.preprocess.transform
            ))
        })
    }

    pub fn write_output(&self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.out_dir().join(name);
        std::fs::create_dir_all(self.out_dir())
            .map_err(|e| CliError::Input(format!("cannot create output dir: {e}")))?;
        std::fs::write(&path, content)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok(())
    }

    /// Write the provenance manifest for this invocation. Input digests
    /// recorded by earlier stages in the same run directory are carried
    /// forward, so the final manifest covers the whole pipeline.
    pub fn write_manifest(&self, command: &str) -> Result<(), CliError> {
        let mut input_digests = self.digests.clone();
        if let Ok(text) = std::fs::read_to_string(self.out_dir().join("manifest.json")) {
            if let Ok(previous) = serde_json::from_str::<RunManifest>(&text) {
                for (path, digest) in previous.input_digests {
                    input_digests.entry(path).or_insert(digest);
                }
            }
        }
        let mut config = BTreeMap::new();
        config.insert("command".to_string(), command.to_string());
        config.insert("config_toml".to_string(), self.config.to_toml());
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.config.seed.0,
            config,
            input_digests,
            started_at: self.started_at,
            finished_at: epoch_seconds(),
        };
        self.write_output("manifest.json", &manifest.to_json())
    }
}

fn epoch_seconds() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
