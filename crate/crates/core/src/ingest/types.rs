//! Core data model for expression data and prior-knowledge files.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::num::Real;

/// Gene symbol, matched exactly and case-sensitively.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeneId(String);

impl GeneId {
    pub fn new(symbol: impl Into<String>) -> Result<Self, IngestError> {
        let symbol = symbol.into();
        if symbol.is_empty() {
            return Err(IngestError::EmptyGeneId);
        }
        if symbol.contains('\t') || symbol.contains('\n') || symbol.contains('\r') {
            return Err(IngestError::InvalidGeneId(symbol));
        }
        Ok(GeneId(symbol))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for GeneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Larval development stage of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Stage2,
    Stage3,
}

impl Stage {
    pub fn parse(s: &str) -> Result<Self, IngestError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stage2" | "2" => Ok(Stage::Stage2),
            "stage3" | "3" => Ok(Stage::Stage3),
            _ => Err(IngestError::BadMetadata {
                field: "stage",
                value: s.to_string(),
            }),
        }
    }

    /// 0/1 indicator used as the stage covariate in the count model.
    pub fn indicator(self) -> u8 {
        match self {
            Stage::Stage2 => 0,
            Stage::Stage3 => 1,
        }
    }
}

/// Tissue the sample was extracted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tissue {
    WholeLarvae,
    Brain,
    Muscle,
}

impl Tissue {
    pub fn parse(s: &str) -> Result<Self, IngestError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "whole_larvae" | "wholelarvae" | "whole" => Ok(Tissue::WholeLarvae),
            "brain" => Ok(Tissue::Brain),
            "muscle" => Ok(Tissue::Muscle),
            _ => Err(IngestError::BadMetadata {
                field: "tissue",
                value: s.to_string(),
            }),
        }
    }
}

/// Experimental arm of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    Control,
    Mutant,
}

impl Condition {
    pub fn parse(s: &str) -> Result<Self, IngestError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "control" => Ok(Condition::Control),
            "mutant" => Ok(Condition::Mutant),
            _ => Err(IngestError::BadMetadata {
                field: "condition",
                value: s.to_string(),
            }),
        }
    }
}

/// Per-sample annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub sample_id: String,
    pub stage: Stage,
    pub tissue: Tissue,
    pub condition: Condition,
}

impl SampleMeta {
    /// Placeholder annotation for tables parsed without a metadata sidecar;
    /// replaced when the sidecar is joined.
    pub fn unannotated(sample_id: impl Into<String>) -> Self {
        SampleMeta {
            sample_id: sample_id.into(),
            stage: Stage::Stage2,
            tissue: Tissue::WholeLarvae,
            condition: Condition::Mutant,
        }
    }
}

/// Signed fold-change matrix: rows are genes, columns are samples.
///
/// Down-regulation is stored as a strictly negative fold change,
/// up-regulation as strictly positive; absent measurements are explicit
/// missing entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionMatrix<T: Real> {
    genes: Vec<GeneId>,
    samples: Vec<SampleMeta>,
    /// gene-major grid, `genes.len() * samples.len()` entries
    values: Vec<Option<T>>,
}

impl<T: Real> ExpressionMatrix<T> {
    pub fn new(
        genes: Vec<GeneId>,
        samples: Vec<SampleMeta>,
        values: Vec<Option<T>>,
    ) -> Result<Self, IngestError> {
        if values.len() != genes.len() * samples.len() {
            return Err(IngestError::DimensionMismatch);
        }
        let mut seen = HashSet::new();
        for g in &genes {
            if !seen.insert(g.clone()) {
                return Err(IngestError::DuplicateGene(g.to_string()));
            }
        }
        let mut seen = HashSet::new();
        for s in &samples {
            if !seen.insert(s.sample_id.clone()) {
                return Err(IngestError::DuplicateSample(s.sample_id.clone()));
            }
        }
        for (i, v) in values.iter().enumerate() {
            if let Some(v) = v {
                if !v.is_finite() || *v == T::zero() {
                    return Err(IngestError::BadValue {
                        row: i / samples.len() + 1,
                        col: i % samples.len() + 1,
                    });
                }
            }
        }
        Ok(ExpressionMatrix {
            genes,
            samples,
            values,
        })
    }

    pub fn n_genes(&self) -> usize {
        self.genes.len()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn genes(&self) -> &[GeneId] {
        &self.genes
    }

    pub fn samples(&self) -> &[SampleMeta] {
        &self.samples
    }

    pub fn value(&self, gene: usize, sample: usize) -> Option<T> {
        self.values[gene * self.samples.len() + sample]
    }

    ///`None`-padded expression profile of one gene across all samples.
    pub fn gene_profile(&self, gene: usize) -> &[Option<T>] {
        let n = self.samples.len();
        &self.values[gene * n..(gene + 1) * n]
    }

    pub fn gene_index(&self, gene: &GeneId) -> Option<usize> {
        self.genes.iter().position(|g| g == gene)
    }

    /// Restriction of the matrix to `keep`, in the order given.
    /// Genes absent from the matrix are ignored.
    pub fn subset_genes(&self, keep: &[GeneId]) -> Self {
        let n = self.samples.len();
        let mut genes = Vec::new();
        let mut values = Vec::new();
        for g in keep {
            if let Some(gi) = self.gene_index(g) {
                genes.push(g.clone());
                values.extend_from_slice(&self.values[gi * n..(gi + 1) * n]);
            }
        }
        ExpressionMatrix {
            genes,
            samples: self.samples.clone(),
            values,
        }
    }

    /// Replace placeholder sample annotations with sidecar metadata,
    /// joined on `sample_id`.
    pub fn with_metadata(mut self, meta: &[SampleMeta]) -> Result<Self, IngestError> {
        for s in &mut self.samples {
            let m = meta
                .iter()
                .find(|m| m.sample_id == s.sample_id)
                .ok_or_else(|| IngestError::MissingMetadata(s.sample_id.clone()))?;
            *s = m.clone();
        }
        Ok(self)
    }

    /// Serialize back to a delimited table with an `NA` missing marker.
    pub fn to_delimited(&self, delim: char) -> String {
        let mut out = String::from("gene");
        for s in &self.samples {
            out.push(delim);
            out.push_str(&s.sample_id);
        }
        out.push('\n');
        for (gi, g) in self.genes.iter().enumerate() {
            out.push_str(g.as_str());
            for si in 0..self.samples.len() {
                out.push(delim);
                match self.value(gi, si) {
                    Some(v) => out.push_str(&format!("{v}")),
                    None => out.push_str("NA"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Named gene sets keyed by pathway id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathwayDb {
    pub pathways: BTreeMap<String, (String, BTreeSet<GeneId>)>,
}

impl PathwayDb {
    pub fn len(&self) -> usize {
        self.pathways.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pathways.is_empty()
    }

    pub fn to_gmt(&self) -> String {
        let mut out = String::new();
        for (id, (desc, genes)) in &self.pathways {
            out.push_str(id);
            out.push('\t');
            out.push_str(desc);
            for g in genes {
                out.push('\t');
                out.push_str(g.as_str());
            }
            out.push('\n');
        }
        out
    }
}

/// Undirected weighted gene-gene edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T: Real> {
    pub a: GeneId,
    pub b: GeneId,
    pub weight: T,
}

/// Validated list of undirected edges: no self-loops, no duplicate
/// unordered pairs, weights within `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeList<T: Real> {
    edges: Vec<Edge<T>>,
}

impl<T: Real> EdgeList<T> {
    pub fn new(edges: Vec<Edge<T>>) -> Result<Self, IngestError> {
        let mut seen = HashSet::new();
        for e in &edges {
            if e.a == e.b {
                return Err(IngestError::SelfLoop(e.a.to_string()));
            }
            if !e.weight.is_finite() || e.weight.abs() > T::one() {
                return Err(IngestError::WeightOutOfRange {
                    line: 0,
                    weight: e.weight.to_f64().unwrap_or(f64::NAN),
                });
            }
            let key = if e.a <= e.b {
                (e.a.clone(), e.b.clone())
            } else {
                (e.b.clone(), e.a.clone())
            };
            if !seen.insert(key) {
                return Err(IngestError::DuplicateEdge(e.a.to_string(), e.b.to_string()));
            }
        }
        Ok(EdgeList { edges })
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            out.push_str(&format!("{}\t{}\t{}\n", e.a, e.b, e.weight));
        }
        out
    }
}
