//! Tabular gene-expression datasets: one labelled sample per row, one gene
//! per column, cells numeric or `NA`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Case,
    Control,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Case => "case",
            Label::Control => "control",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub label: Label,
    /// Aligned to the dataset's gene list; `None` marks a missing value.
    pub values: Vec<Option<f64>>,
}

/// One study: a samples × genes value matrix with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionDataset {
    pub id: String,
    pub gene_ids: Vec<String>,
    pub samples: Vec<Sample>,
}

impl ExpressionDataset {
    /// Column position of a gene id, if measured by this dataset.
    pub fn gene_index(&self, gene_id: &str) -> Option<usize> {
        self.gene_ids.iter().position(|g| g == gene_id)
    }

    /// Arithmetic mean of a gene's non-missing values.
    pub fn gene_mean(&self, gene_id: &str) -> Result<f64, ParseError> {
        let col = self
            .gene_index(gene_id)
            .ok_or_else(|| ParseError::new(0, format!("gene {gene_id:?} not in dataset {:?}", self.id)))?;
        let mut sum = 0.0;
        let mut count = 0usize;
        for sample in &self.samples {
            if let Some(v) = sample.values[col] {
                sum += v;
                count += 1;
            }
        }
        if count == 0 {
            return Err(ParseError::new(
                0,
                format!("gene {gene_id:?} has no non-missing values in dataset {:?}", self.id),
            ));
        }
        Ok(sum / count as f64)
    }

    /// Gene ids measured by both datasets.
    pub fn shared_genes(&self, other: &ExpressionDataset) -> BTreeSet<String> {
        let mine: HashSet<&String> = self.gene_ids.iter().collect();
        other
            .gene_ids
            .iter()
            .filter(|g| mine.contains(g))
            .cloned()
            .collect()
    }

    pub fn cases(&self) -> usize {
        self.samples.iter().filter(|s| s.label == Label::Case).count()
    }

    pub fn controls(&self) -> usize {
        self.samples.iter().filter(|s| s.label == Label::Control).count()
    }

    /// Write the TSV layout consumed by [`parse_expression_tsv`].
    pub fn write_tsv(&self, out: &mut impl Write) -> io::Result<()> {
        write!(out, "sample_id\tlabel")?;
        for gene in &self.gene_ids {
            write!(out, "\t{gene}")?;
        }
        writeln!(out)?;
        for sample in &self.samples {
            write!(out, "{}\t{}", sample.id, sample.label)?;
            for value in &sample.values {
                match value {
                    Some(v) => write!(out, "\t{v}")?,
                    None => write!(out, "\tNA")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Parse an expression TSV: header `sample_id`, `label`, then gene ids; one
/// sample per row with `case`/`control` labels and numeric or `NA` cells.
pub fn parse_expression_tsv(
    reader: impl BufRead,
    dataset_id: &str,
) -> Result<ExpressionDataset, ParseError> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, "empty file, expected a header row"))?;
    let header = header.map_err(|e| ParseError::new(1, e.to_string()))?;
    let cols: Vec<&str> = header.split('\t').collect();
    if cols.len() < 2 || cols[0] != "sample_id" || cols[1] != "label" {
        return Err(ParseError::new(1, "header must start with sample_id<TAB>label"));
    }
    let gene_ids: Vec<String> = cols[2..].iter().map(|s| s.to_string()).collect();
    let mut seen_genes = HashSet::new();
    for (i, gene) in gene_ids.iter().enumerate() {
        if gene.is_empty() {
            return Err(ParseError::new(1, format!("empty gene id in header column {}", i + 3)));
        }
        if !seen_genes.insert(gene) {
            return Err(ParseError::new(1, format!("duplicate gene id {gene:?} in header")));
        }
    }

    let mut samples = Vec::new();
    let mut seen_samples = HashSet::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| ParseError::new(lineno, e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != gene_ids.len() + 2 {
            return Err(ParseError::new(
                lineno,
                format!("row has {} cells, header defines {}", cells.len(), gene_ids.len() + 2),
            ));
        }
        let id = cells[0].to_string();
        if id.is_empty() {
            return Err(ParseError::new(lineno, "empty sample id"));
        }
        if !seen_samples.insert(id.clone()) {
            return Err(ParseError::new(lineno, format!("duplicate sample id {id:?}")));
        }
        let label = match cells[1] {
            "case" => Label::Case,
            "control" => Label::Control,
            other => {
                return Err(ParseError::new(
                    lineno,
                    format!("unknown label {other:?}, expected case or control"),
                ))
            }
        };
        let mut values = Vec::with_capacity(gene_ids.len());
        for (col, cell) in cells[2..].iter().enumerate() {
            if *cell == "NA" {
                values.push(None);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    ParseError::new(
                        lineno,
                        format!("column {} ({}): non-numeric cell {cell:?}", col + 3, gene_ids[col]),
                    )
                })?;
                values.push(Some(v));
            }
        }
        samples.push(Sample { id, label, values });
    }

    let dataset = ExpressionDataset { id: dataset_id.to_string(), gene_ids, samples };
    if dataset.cases() == 0 || dataset.controls() == 0 {
        return Err(ParseError::new(
            0,
            format!("dataset {dataset_id:?} needs at least one case and one control sample"),
        ));
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const SMALL: &str = "sample_id\tlabel\tg1\tg2\ns1\tcase\t1.5\t2\ns2\tcontrol\t0.5\tNA\n";

    #[test]
    fn two_by_two_table_parses() {
        let ds = parse_expression_tsv(SMALL.as_bytes(), "d").unwrap();
        assert_eq!(ds.samples.len(), 2);
        assert_eq!(ds.gene_ids, vec!["g1", "g2"]);
        assert_eq!(ds.samples[0].values, vec![Some(1.5), Some(2.0)]);
    }

    #[test]
    fn na_becomes_missing() {
        let ds = parse_expression_tsv(SMALL.as_bytes(), "d").unwrap();
        assert_eq!(ds.samples[1].values[1], None);
    }

    #[test]
    fn ragged_row_names_the_row() {
        let text = "sample_id\tlabel\tg1\tg2\ns1\tcase\t1.0\ns2\tcontrol\t1\t2\n";
        let err = parse_expression_tsv(text.as_bytes(), "d").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn duplicate_ids_and_bad_cells_error() {
        let dup_sample = "sample_id\tlabel\tg1\ns1\tcase\t1\ns1\tcontrol\t2\n";
        assert!(parse_expression_tsv(dup_sample.as_bytes(), "d").is_err());
        let dup_gene = "sample_id\tlabel\tg1\tg1\ns1\tcase\t1\t2\ns2\tcontrol\t1\t2\n";
        assert!(parse_expression_tsv(dup_gene.as_bytes(), "d").is_err());
        let bad_label = "sample_id\tlabel\tg1\ns1\tsick\t1\n";
        assert!(parse_expression_tsv(bad_label.as_bytes(), "d").is_err());
        let bad_cell = "sample_id\tlabel\tg1\ns1\tcase\tabc\ns2\tcontrol\t2\n";
        let err = parse_expression_tsv(bad_cell.as_bytes(), "d").unwrap_err();
        assert!(err.message.contains("g1"), "{}", err.message);
    }

    #[test]
    fn single_class_dataset_is_rejected() {
        let text = "sample_id\tlabel\tg1\ns1\tcase\t1\ns2\tcase\t2\n";
        assert!(parse_expression_tsv(text.as_bytes(), "d").is_err());
    }

    #[test]
    fn gene_mean_skips_missing() {
        let text = "sample_id\tlabel\tg1\tg2\ns1\tcase\t5.0\t1.0\ns2\tcontrol\tNA\t2.0\ns3\tcase\t5.0\t3.0\n";
        let ds = parse_expression_tsv(text.as_bytes(), "d").unwrap();
        assert_eq!(ds.gene_mean("g1").unwrap(), 5.0);
        assert_eq!(ds.gene_mean("g2").unwrap(), 2.0);
    }

    #[test]
    fn gene_mean_of_all_missing_is_an_error() {
        let text = "sample_id\tlabel\tg1\tg2\ns1\tcase\tNA\t1\ns2\tcontrol\tNA\t2\n";
        let ds = parse_expression_tsv(text.as_bytes(), "d").unwrap();
        assert!(ds.gene_mean("g1").is_err());
    }

    #[test]
    fn gene_mean_matches_summation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..20).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let mut text = String::from("sample_id\tlabel\tg1\n");
        for (i, v) in values.iter().enumerate() {
            let label = if i % 2 == 0 { "case" } else { "control" };
            text.push_str(&format!("s{i}\t{label}\t{v}\n"));
        }
        let ds = parse_expression_tsv(text.as_bytes(), "d").unwrap();
        let oracle = values.iter().sum::<f64>() / values.len() as f64;
        assert!((ds.gene_mean("g1").unwrap() - oracle).abs() < 1e-12);
        let (min, max) = values.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let mean = ds.gene_mean("g1").unwrap();
        assert!(mean >= min && mean <= max);
    }

    #[test]
    fn shared_genes_cases() {
        let a = parse_expression_tsv(
            "sample_id\tlabel\tg1\tg2\ns1\tcase\t1\t2\ns2\tcontrol\t1\t2\n".as_bytes(),
            "a",
        )
        .unwrap();
        let b = parse_expression_tsv(
            "sample_id\tlabel\tg2\tg3\ns1\tcase\t1\t2\ns2\tcontrol\t1\t2\n".as_bytes(),
            "b",
        )
        .unwrap();
        let c = parse_expression_tsv(
            "sample_id\tlabel\tg8\ns1\tcase\t1\ns2\tcontrol\t1\n".as_bytes(),
            "c",
        )
        .unwrap();
        assert_eq!(a.shared_genes(&b), BTreeSet::from(["g2".to_string()]));
        // Disjoint panels share nothing; identical panels share everything.
        assert!(a.shared_genes(&c).is_empty());
        assert_eq!(a.shared_genes(&a).len(), 2);
    }

    #[test]
    fn tsv_roundtrip_is_structural_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let gene_ids: Vec<String> = (0..6).map(|i| format!("g{i}")).collect();
        let samples: Vec<Sample> = (0..9)
            .map(|i| Sample {
                id: format!("s{i}"),
                label: if i < 4 { Label::Case } else { Label::Control },
                values: (0..6)
                    .map(|_| {
                        if rng.gen_bool(0.15) {
                            None
                        } else {
                            Some(rng.gen_range(-5.0..5.0))
                        }
                    })
                    .collect(),
            })
            .collect();
        let ds = ExpressionDataset { id: "rt".to_string(), gene_ids, samples };
        let mut buf = Vec::new();
        ds.write_tsv(&mut buf).unwrap();
        let reparsed = parse_expression_tsv(&buf[..], "rt").unwrap();
        assert_eq!(reparsed, ds);
    }
}
