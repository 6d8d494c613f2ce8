//! Text parsers for the supported file formats.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::types::{Edge, EdgeList, ExpressionMatrix, GeneId, PathwayDb, SampleMeta};
use super::IngestError;
use crate::ingest::{Condition, Stage, Tissue};
use crate::num::Real;

/// Field delimiter of a tabular file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Comma,
    Tab,
}

impl Delimiter {
    pub fn ch(self) -> char {
        match self {
            Delimiter::Comma => ',',
            Delimiter::Tab => '\t',
        }
    }

    /// Pick a delimiter from a file extension, defaulting to tab.
    pub fn from_path(path: &str) -> Self {
        if path.ends_with(".csv") {
            Delimiter::Comma
        } else {
            Delimiter::Tab
        }
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "NA"
}

/// Parse a fold-change table: header row of sample ids, first column gene
/// symbols, remaining cells signed fold changes with `NA`/empty missing
/// markers. Row and column order are preserved.
pub fn parse_expression_table<T: Real>(
    text: &str,
    fmt: Delimiter,
) -> Result<ExpressionMatrix<T>, IngestError> {
    let delim = fmt.ch();
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(IngestError::EmptyTable)?;
    let sample_ids: Vec<&str> = header.split(delim).skip(1).map(str::trim).collect();
    if sample_ids.is_empty() {
        return Err(IngestError::EmptyTable);
    }
    let mut seen_samples = HashSet::new();
    let mut samples = Vec::with_capacity(sample_ids.len());
    for id in &sample_ids {
        if !seen_samples.insert(id.to_string()) {
            return Err(IngestError::DuplicateSample(id.to_string()));
        }
        samples.push(SampleMeta::unannotated(*id));
    }

    let mut genes = Vec::new();
    let mut seen_genes = HashSet::new();
    let mut values = Vec::new();
    for (row, (_, line)) in lines.enumerate() {
        let mut cells = line.split(delim);
        let gene = GeneId::new(cells.next().unwrap_or("").trim())?;
        if !seen_genes.insert(gene.clone()) {
            return Err(IngestError::DuplicateGene(gene.to_string()));
        }
        let cells: Vec<&str> = cells.map(str::trim).collect();
        if cells.len() != sample_ids.len() {
            return Err(IngestError::MalformedTable {
                row: row + 1,
                expected: sample_ids.len(),
                found: cells.len(),
            });
        }
        for (col, cell) in cells.iter().enumerate() {
            if is_missing(cell) {
                values.push(None);
            } else {
                let v: T = cell.parse().map_err(|_| IngestError::BadValue {
                    row: row + 1,
                    col: col + 1,
                })?;
                if !v.is_finite() || v == T::zero() {
                    return Err(IngestError::BadValue {
                        row: row + 1,
                        col: col + 1,
                    });
                }
                values.push(Some(v));
            }
        }
        genes.push(gene);
    }
    ExpressionMatrix::new(genes, samples, values)
}

/// Parse the metadata sidecar: TSV with columns
/// `sample_id  stage  tissue  condition` and a header row.
pub fn parse_sample_metadata(text: &str) -> Result<Vec<SampleMeta>, IngestError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(IngestError::MalformedTable {
                row: i,
                expected: 4,
                found: fields.len(),
            });
        }
        if !seen.insert(fields[0].to_string()) {
            return Err(IngestError::DuplicateSample(fields[0].to_string()));
        }
        out.push(SampleMeta {
            sample_id: fields[0].to_string(),
            stage: Stage::parse(fields[1])?,
            tissue: Tissue::parse(fields[2])?,
            condition: Condition::parse(fields[3])?,
        });
    }
    Ok(out)
}

/// Parse a GMT gene-set file: one pathway per line,
/// `id<TAB>description<TAB>gene...`. Duplicate genes within a line are
/// deduplicated.
pub fn parse_gmt(text: &str) -> Result<PathwayDb, IngestError> {
    let mut pathways = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(IngestError::MalformedGmtLine(i + 1));
        }
        let mut genes = BTreeSet::new();
        for g in &fields[2..] {
            let g = g.trim();
            if !g.is_empty() {
                genes.insert(GeneId::new(g)?);
            }
        }
        if genes.is_empty() {
            return Err(IngestError::MalformedGmtLine(i + 1));
        }
        pathways.insert(
            fields[0].trim().to_string(),
            (fields[1].trim().to_string(), genes),
        );
    }
    Ok(PathwayDb { pathways })
}

/// Parse a 3-column edge list: `geneA<TAB>geneB<TAB>weight`.
pub fn parse_edge_list<T: Real>(text: &str) -> Result<EdgeList<T>, IngestError> {
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(IngestError::MalformedEdgeLine(i + 1));
        }
        let a = GeneId::new(fields[0])?;
        let b = GeneId::new(fields[1])?;
        if a == b {
            return Err(IngestError::SelfLoop(a.to_string()));
        }
        let weight: T = fields[2]
            .parse()
            .map_err(|_| IngestError::MalformedEdgeLine(i + 1))?;
        if !weight.is_finite() || weight.abs() > T::one() {
            return Err(IngestError::WeightOutOfRange {
                line: i + 1,
                weight: weight.to_f64().unwrap_or(f64::NAN),
            });
        }
        let key = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        if !seen.insert(key) {
            return Err(IngestError::DuplicateEdge(a.to_string(), b.to_string()));
        }
        edges.push(Edge { a, b, weight });
    }
    EdgeList::new(edges)
}

/// Parse a 2-column `symbol<TAB>refseq_id` mapping.
pub fn parse_refseq_map(text: &str) -> Result<BTreeMap<GeneId, String>, IngestError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(IngestError::MalformedTable {
                row: i + 1,
                expected: 2,
                found: fields.len(),
            });
        }
        let gene = GeneId::new(fields[0])?;
        if map.insert(gene.clone(), fields[1].to_string()).is_some() {
            return Err(IngestError::DuplicateGene(gene.to_string()));
        }
    }
    Ok(map)
}

/// Raw count table before joining with its metadata sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    pub genes: Vec<GeneId>,
    pub sample_ids: Vec<String>,
    /// gene-major grid of counts
    pub counts: Vec<u64>,
}

/// Per-sample sequencing depth and stage indicator for the count model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountSampleMeta {
    pub sample_id: String,
    pub total: u64,
    pub stage_indicator: u8,
}

/// Parse a count table: header row of sample ids, gene rows of nonnegative
/// integers.
pub fn parse_count_table(text: &str, fmt: Delimiter) -> Result<CountTable, IngestError> {
    let delim = fmt.ch();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or(IngestError::EmptyTable)?;
    let sample_ids: Vec<String> = header
        .split(delim)
        .skip(1)
        .map(|s| s.trim().to_string())
        .collect();
    if sample_ids.is_empty() {
        return Err(IngestError::EmptyTable);
    }
    let mut genes = Vec::new();
    let mut seen = HashSet::new();
    let mut counts = Vec::new();
    for (row, line) in lines.enumerate() {
        let mut cells = line.split(delim);
        let gene = GeneId::new(cells.next().unwrap_or("").trim())?;
        if !seen.insert(gene.clone()) {
            return Err(IngestError::DuplicateGene(gene.to_string()));
        }
        let cells: Vec<&str> = cells.map(str::trim).collect();
        if cells.len() != sample_ids.len() {
            return Err(IngestError::MalformedTable {
                row: row + 1,
                expected: sample_ids.len(),
                found: cells.len(),
            });
        }
        for (col, cell) in cells.iter().enumerate() {
            let k: u64 = cell.parse().map_err(|_| IngestError::BadValue {
                row: row + 1,
                col: col + 1,
            })?;
            counts.push(k);
        }
        genes.push(gene);
    }
    Ok(CountTable {
        genes,
        sample_ids,
        counts,
    })
}

/// Parse the count metadata sidecar: TSV with columns
/// `sample_id  total  stage_indicator` and a header row.
pub fn parse_count_metadata(text: &str) -> Result<Vec<CountSampleMeta>, IngestError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(IngestError::MalformedTable {
                row: i,
                expected: 3,
                found: fields.len(),
            });
        }
        if !seen.insert(fields[0].to_string()) {
            return Err(IngestError::DuplicateSample(fields[0].to_string()));
        }
        let total: u64 = fields[1].parse().map_err(|_| IngestError::BadValue {
            row: i,
            col: 2,
        })?;
        let stage_indicator: u8 = match fields[2] {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(IngestError::BadMetadata {
                    field: "stage_indicator",
                    value: other.to_string(),
                })
            }
        };
        out.push(CountSampleMeta {
            sample_id: fields[0].to_string(),
            total,
            stage_indicator,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn well_formed_table_round_trips() {
        let text = "gene,s1,s2\nA,2.0,-1.5\ncycle,NA,3.25\n";
        let m: ExpressionMatrix<f64> = parse_expression_table(text, Delimiter::Comma).unwrap();
        assert_eq!(m.n_genes(), 2);
        assert_eq!(m.n_samples(), 2);
        assert_eq!(m.value(0, 0), Some(2.0));
        assert_eq!(m.value(0, 1), Some(-1.5));
        assert_eq!(m.value(1, 0), None);
        let again: ExpressionMatrix<f64> =
            parse_expression_table(&m.to_delimited(','), Delimiter::Comma).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn duplicate_gene_rejected() {
        let text = "gene,s1\ncycle,1.0\ncycle,2.0\n";
        assert_eq!(
            parse_expression_table::<f64>(text, Delimiter::Comma).unwrap_err(),
            IngestError::DuplicateGene("cycle".into())
        );
    }

    #[test]
    fn comma_decimal_cell_is_bad_value() {
        // "1,5" in a TSV cell: a comma decimal cannot parse as a float
        let text = "gene\ts1\nA\t1,5\n";
        assert_eq!(
            parse_expression_table::<f64>(text, Delimiter::Tab).unwrap_err(),
            IngestError::BadValue { row: 1, col: 1 }
        );
    }

    #[test]
    fn ragged_row_rejected() {
        let text = "gene,s1,s2\nA,1.0\n";
        assert!(matches!(
            parse_expression_table::<f64>(text, Delimiter::Comma).unwrap_err(),
            IngestError::MalformedTable { row: 1, .. }
        ));
    }

    #[test]
    fn gmt_parses_and_dedups() {
        let db = parse_gmt("P1\tdesc\tA\tB\n").unwrap();
        assert_eq!(db.pathways["P1"].1.len(), 2);
        let db = parse_gmt("P1\tdesc\tA\tA\n").unwrap();
        assert_eq!(db.pathways["P1"].1.len(), 1);
        assert_eq!(
            parse_gmt("P1\tdesc\n").unwrap_err(),
            IngestError::MalformedGmtLine(1)
        );
    }

    #[test]
    fn gmt_round_trips() {
        let db = parse_gmt("P1\tfirst\tB\tA\nP2\tsecond\tC\n").unwrap();
        assert_eq!(parse_gmt(&db.to_gmt()).unwrap(), db);
    }

    #[test]
    fn edge_list_cases() {
        let el: EdgeList<f64> = parse_edge_list("A\tB\t0.9\n").unwrap();
        assert_eq!(el.len(), 1);
        assert_eq!(el.edges()[0].weight, 0.9);
        assert_eq!(
            parse_edge_list::<f64>("A\tA\t0.5\n").unwrap_err(),
            IngestError::SelfLoop("A".into())
        );
        assert_eq!(
            parse_edge_list::<f64>("A\tB\t1.2\n").unwrap_err(),
            IngestError::WeightOutOfRange {
                line: 1,
                weight: 1.2
            }
        );
        assert!(matches!(
            parse_edge_list::<f64>("A\tB\t0.5\nB\tA\t0.4\n").unwrap_err(),
            IngestError::DuplicateEdge(_, _)
        ));
    }

    #[test]
    fn edge_list_round_trips() {
        let el: EdgeList<f64> = parse_edge_list("A\tB\t0.9\nB\tC\t-0.25\n").unwrap();
        assert_eq!(parse_edge_list::<f64>(&el.to_tsv()).unwrap(), el);
    }

    #[test]
    fn metadata_parses() {
        let text = "sample_id\tstage\ttissue\tcondition\ns1\tstage2\tbrain\tmutant\n";
        let meta = parse_sample_metadata(text).unwrap();
        assert_eq!(meta.len(), 1);
        assert_eq!(meta[0].stage, Stage::Stage2);
        assert_eq!(meta[0].tissue, Tissue::Brain);
        assert_eq!(meta[0].condition, Condition::Mutant);
    }

    #[test]
    fn count_table_parses() {
        let t = parse_count_table("gene,s1,s2\nA,10,20\nB,0,5\n", Delimiter::Comma).unwrap();
        assert_eq!(t.counts, vec![10, 20, 0, 5]);
        let meta = parse_count_metadata("sample_id\ttotal\tstage_indicator\ns1\t1000\t0\n").unwrap();
        assert_eq!(meta[0].total, 1000);
        assert_eq!(meta[0].stage_indicator, 0);
    }

    proptest! {
        // Parsers must return a typed error or a valid object, never panic.
        #[test]
        fn expression_parser_never_panics(text in ".{0,400}") {
            let _ = parse_expression_table::<f64>(&text, Delimiter::Comma);
            let _ = parse_expression_table::<f64>(&text, Delimiter::Tab);
        }

        #[test]
        fn gmt_parser_never_panics(text in ".{0,400}") {
            let _ = parse_gmt(&text);
        }

        #[test]
        fn edge_parser_never_panics(text in ".{0,400}") {
            let _ = parse_edge_list::<f64>(&text);
        }

        #[test]
        fn expression_round_trip(
            vals in proptest::collection::vec(
                proptest::option::of((0.01f64..100.0).prop_map(|v| if v > 50.0 { -v } else { v })),
                6,
            )
        ) {
            let genes = vec![GeneId::new("g1").unwrap(), GeneId::new("g2").unwrap()];
            let samples = vec![
                SampleMeta::unannotated("s1"),
                SampleMeta::unannotated("s2"),
                SampleMeta::unannotated("s3"),
            ];
            let m = ExpressionMatrix::new(genes, samples, vals).unwrap();
            let parsed: ExpressionMatrix<f64> =
                parse_expression_table(&m.to_delimited('\t'), Delimiter::Tab).unwrap();
            prop_assert_eq!(parsed, m);
        }
    }
}
