//! Parsing and validation of the external data files: fold-change tables,
//! up/down regulation files, sample metadata, GMT gene sets, edge lists,
//! RefSeq mappings and count tables.
//!
//! Parsing is pure; every produced object is immutable after construction
//! and safe to share across threads.

mod merge;
mod parse;
mod types;

pub use merge::merge_regulation_files;
pub use parse::{
    parse_count_metadata, parse_count_table, parse_edge_list, parse_expression_table, parse_gmt,
    parse_refseq_map, parse_sample_metadata, CountSampleMeta, CountTable, Delimiter,
};
pub use types::{
    Condition, Edge, EdgeList, ExpressionMatrix, GeneId, PathwayDb, SampleMeta, Stage, Tissue,
};

use thiserror::Error;

/// Errors produced while ingesting external files.
#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("duplicate gene id `{0}`")]
    DuplicateGene(String),
    #[error("duplicate sample id `{0}`")]
    DuplicateSample(String),
    #[error("row {row}: found {found} value cells, expected {expected}")]
    MalformedTable {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("cell at row {row}, column {col} is not a valid signed fold change")]
    BadValue { row: usize, col: usize },
    #[error("gene `{gene}` carries both up- and down-regulation in sample `{sample}`")]
    ConflictingRegulation { gene: String, sample: String },
    #[error("GMT line {0} has fewer than 3 tab-separated fields")]
    MalformedGmtLine(usize),
    #[error("edge list line {0} is malformed")]
    MalformedEdgeLine(usize),
    #[error("edge weight {weight} on line {line} is outside [-1, 1]")]
    WeightOutOfRange { line: usize, weight: f64 },
    #[error("self-loop on gene `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),
    #[error("empty gene id")]
    EmptyGeneId,
    #[error("gene id `{0}` contains a tab or newline")]
    InvalidGeneId(String),
    #[error("up and down tables disagree on the sample set")]
    SampleMismatch,
    #[error("unknown {field} value `{value}`")]
    BadMetadata { field: &'static str, value: String },
    #[error("no metadata for sample `{0}`")]
    MissingMetadata(String),
    #[error("value grid does not match genes x samples")]
    DimensionMismatch,
    #[error("empty table")]
    EmptyTable,
}
