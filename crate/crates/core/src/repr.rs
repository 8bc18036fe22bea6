//! Fixed-length patient vectors from a trained embedding model.
//!
//! Two strategies: look up the patient's own node embedding, or average the
//! embeddings of the genes the patient expresses, weighted by min-max
//! normalized expression values.

use std::io::{self, Write};

use thiserror::Error;

use crate::embed::EmbeddingModel;
use crate::ingest::{ExpressionDataset, Label};
use crate::ns::Namespaces;

/// Floor added to every min-max weight so no usable gene drops to zero and
/// single-gene patients stay well-defined.
const WEIGHT_EPSILON: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ReprError {
    #[error("patient token for sample {sample:?} of dataset {dataset:?} is not in the vocabulary")]
    MissingPatientToken { dataset: String, sample: String },
    #[error("sample {sample:?} of dataset {dataset:?} has no embeddable gene with a value")]
    NoUsableGene { dataset: String, sample: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatientRow {
    pub sample_id: String,
    pub dataset_id: String,
    pub label: Label,
    pub vector: Vec<f64>,
}

/// One vector per `(dataset, sample)`, all of equal dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PatientMatrix {
    pub rows: Vec<PatientRow>,
    pub dimension: usize,
}

impl PatientMatrix {
    pub fn append(&mut self, mut other: PatientMatrix) {
        if self.rows.is_empty() {
            self.dimension = other.dimension;
        }
        debug_assert_eq!(self.dimension, other.dimension);
        self.rows.append(&mut other.rows);
    }

    /// TSV export: `sample_id`, `dataset_id`, `label`, then coordinates.
    pub fn write_tsv(&self, out: &mut impl Write) -> io::Result<()> {
        write!(out, "sample_id\tdataset_id\tlabel")?;
        for j in 0..self.dimension {
            write!(out, "\tv{j}")?;
        }
        writeln!(out)?;
        for row in &self.rows {
            write!(out, "{}\t{}\t{}", row.sample_id, row.dataset_id, row.label)?;
            for v in &row.vector {
                write!(out, "\t{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Each patient's own node embedding, in dataset then sample order.
pub fn direct_representation(
    model: &EmbeddingModel,
    datasets: &[&ExpressionDataset],
    ns: &Namespaces,
) -> Result<PatientMatrix, ReprError> {
    let mut matrix = PatientMatrix { rows: Vec::new(), dimension: model.dimension() };
    for dataset in datasets {
        for sample in &dataset.samples {
            let token = ns.patient(&dataset.id, &sample.id);
            let vector = model.embedding(&token).map_err(|_| ReprError::MissingPatientToken {
                dataset: dataset.id.clone(),
                sample: sample.id.clone(),
            })?;
            matrix.rows.push(PatientRow {
                sample_id: sample.id.clone(),
                dataset_id: dataset.id.clone(),
                label: sample.label,
                vector: vector.to_vec(),
            });
        }
    }
    Ok(matrix)
}

/// Expression-weighted average of gene embeddings.
///
/// Weights are the patient's values min-max normalized per gene column over
/// the dataset's non-missing values, plus a small ε. Genes with a missing
/// value for the patient or no embedding are skipped.
pub fn weighted_average_representation(
    model: &EmbeddingModel,
    dataset: &ExpressionDataset,
    ns: &Namespaces,
) -> Result<PatientMatrix, ReprError> {
    let n_genes = dataset.gene_ids.len();

    // Per-gene column range and embedding, resolved once.
    let mut ranges: Vec<Option<(f64, f64)>> = vec![None; n_genes];
    for (col, range) in ranges.iter_mut().enumerate() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for sample in &dataset.samples {
            if let Some(v) = sample.values[col] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if lo.is_finite() {
            *range = Some((lo, hi));
        }
    }
    let embeddings: Vec<Option<&[f64]>> = dataset
        .gene_ids
        .iter()
        .map(|gene| model.embedding(&ns.gene(gene)).ok())
        .collect();

    let mut matrix = PatientMatrix { rows: Vec::new(), dimension: model.dimension() };
    for sample in &dataset.samples {
        let mut accum = vec![0.0; model.dimension()];
        let mut weight_sum = 0.0;
        for col in 0..n_genes {
            let (Some(value), Some((lo, hi)), Some(embedding)) =
                (sample.values[col], ranges[col], embeddings[col])
            else {
                continue;
            };
            // A constant column carries no ordering information; weight ε.
            let normalized = if hi > lo { (value - lo) / (hi - lo) } else { 0.0 };
            let weight = normalized + WEIGHT_EPSILON;
            for (a, &e) in accum.iter_mut().zip(embedding) {
                *a += weight * e;
            }
            weight_sum += weight;
        }
        if weight_sum == 0.0 {
            return Err(ReprError::NoUsableGene {
                dataset: dataset.id.clone(),
                sample: sample.id.clone(),
            });
        }
        for a in &mut accum {
            *a /= weight_sum;
        }
        matrix.rows.push(PatientRow {
            sample_id: sample.id.clone(),
            dataset_id: dataset.id.clone(),
            label: sample.label,
            vector: accum,
        });
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{train, EmbeddingModel, TrainConfig};
    use crate::ingest::parse_expression_tsv;
    use crate::walk::WalkCorpus;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn ns() -> Namespaces {
        Namespaces::default()
    }

    /// A model whose vocabulary is exactly the given (token, vector) pairs.
    fn fixed_model(entries: &[(String, Vec<f64>)]) -> EmbeddingModel {
        let dim = entries[0].1.len();
        let mut text = format!("{} {}\n", entries.len(), dim);
        for (token, vector) in entries {
            text.push_str(token);
            for v in vector {
                text.push_str(&format!(" {v}"));
            }
            text.push('\n');
        }
        EmbeddingModel::read_text(text.as_bytes()).unwrap()
    }

    #[test]
    fn direct_rows_are_exact_vocabulary_rows() {
        let ds = parse_expression_tsv(
            "sample_id\tlabel\tg1\ns1\tcase\t1\ns2\tcontrol\t2\ns3\tcase\t3\n".as_bytes(),
            "d",
        )
        .unwrap();
        let entries: Vec<(String, Vec<f64>)> = ds
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| (ns().patient("d", &s.id), vec![i as f64, 1.0]))
            .collect();
        let model = fixed_model(&entries);
        let matrix = direct_representation(&model, &[&ds], &ns()).unwrap();
        assert_eq!(matrix.rows.len(), 3);
        for (i, row) in matrix.rows.iter().enumerate() {
            assert_eq!(row.vector, vec![i as f64, 1.0]);
            assert_eq!(row.sample_id, format!("s{}", i + 1));
        }
    }

    #[test]
    fn direct_missing_patient_names_the_sample() {
        let ds = parse_expression_tsv(
            "sample_id\tlabel\tg1\ns1\tcase\t1\ns2\tcontrol\t2\n".as_bytes(),
            "d",
        )
        .unwrap();
        let model = fixed_model(&[(ns().patient("d", "s1"), vec![0.0, 0.0])]);
        match direct_representation(&model, &[&ds], &ns()) {
            Err(ReprError::MissingPatientToken { dataset, sample }) => {
                assert_eq!(dataset, "d");
                assert_eq!(sample, "s2");
            }
            other => panic!("expected missing-token error, got {other:?}"),
        }
    }

    #[test]
    fn direct_row_order_is_dataset_then_sample() {
        let a = parse_expression_tsv(
            "sample_id\tlabel\tg1\ns1\tcase\t1\ns2\tcontrol\t2\n".as_bytes(),
            "a",
        )
        .unwrap();
        let b = parse_expression_tsv(
            "sample_id\tlabel\tg1\ns1\tcase\t1\ns2\tcontrol\t2\n".as_bytes(),
            "b",
        )
        .unwrap();
        let mut entries = Vec::new();
        for ds in ["a", "b"] {
            for s in ["s1", "s2"] {
                entries.push((ns().patient(ds, s), vec![entries.len() as f64]));
            }
        }
        // Vocabulary order scrambled relative to dataset order.
        entries.reverse();
        let model = fixed_model(&entries);
        let matrix = direct_representation(&model, &[&a, &b], &ns()).unwrap();
        let ids: Vec<(String, String)> = matrix
            .rows
            .iter()
            .map(|r| (r.dataset_id.clone(), r.sample_id.clone()))
            .collect();
        assert_eq!(
            ids,
            [("a", "s1"), ("a", "s2"), ("b", "s1"), ("b", "s2")]
                .map(|(d, s)| (d.to_string(), s.to_string()))
        );
    }

    #[test]
    fn weighted_mean_arithmetic() {
        // Weights 1 and 3 on unit axes → (0.25, 0.75). Crafted so min-max
        // weights (with ε) reproduce the 1:3 ratio up to ε effects.
        let text = "sample_id\tlabel\tg1\tg2\n\
                    p\tcase\t0.25\t0.75\n\
                    lo\tcontrol\t0\t0\n\
                    hi\tcontrol\t1\t1\n";
        let ds = parse_expression_tsv(text.as_bytes(), "d").unwrap();
        let model = fixed_model(&[
            (ns().gene("g1"), vec![1.0, 0.0]),
            (ns().gene("g2"), vec![0.0, 1.0]),
        ]);
        let matrix = weighted_average_representation(&model, &ds, &ns()).unwrap();
        let p = &matrix.rows[0].vector;
        assert!((p[0] - 0.25).abs() < 1e-5);
        assert!((p[1] - 0.75).abs() < 1e-5);
    }

    #[test]
    fn single_gene_patient_gets_that_genes_embedding() {
        let text = "sample_id\tlabel\tg1\tg2\ns1\tcase\t0.3\tNA\ns2\tcontrol\t0.9\t1.0\n";
        let ds = parse_expression_tsv(text.as_bytes(), "d").unwrap();
        let model = fixed_model(&[
            (ns().gene("g1"), vec![0.5, -1.5]),
            (ns().gene("g2"), vec![9.0, 9.0]),
        ]);
        let matrix = weighted_average_representation(&model, &ds, &ns()).unwrap();
        assert_eq!(matrix.rows[0].vector, vec![0.5, -1.5]);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn weighted_average_matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let genes: Vec<String> = (0..4).map(|i| format!("g{i}")).collect();
        let mut text = format!("sample_id\tlabel\t{}\n", genes.join("\t"));
        let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
        for i in 0..5 {
            let label = if i < 3 { "case" } else { "control" };
            let row: Vec<Option<f64>> = (0..4)
                .map(|_| (!rng.gen_bool(0.2)).then(|| rng.gen_range(-4.0..4.0)))
                .collect();
            let printed: Vec<String> = row
                .iter()
                .map(|v| v.map_or("NA".to_string(), |x| x.to_string()))
                .collect();
            text.push_str(&format!("s{i}\t{label}\t{}\n", printed.join("\t")));
            cells.push(row);
        }
        let ds = parse_expression_tsv(text.as_bytes(), "d").unwrap();
        let gene_vectors: Vec<Vec<f64>> =
            (0..4).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let entries: Vec<(String, Vec<f64>)> = genes
            .iter()
            .zip(&gene_vectors)
            .map(|(g, v)| (ns().gene(g), v.clone()))
            .collect();
        let model = fixed_model(&entries);
        let matrix = weighted_average_representation(&model, &ds, &ns()).unwrap();

        // Independent accumulation oracle.
        for (i, row) in cells.iter().enumerate() {
            let mut expectation = [0.0; 3];
            let mut total = 0.0;
            for (col, value) in row.iter().enumerate() {
                let Some(v) = value else { continue };
                let column: Vec<f64> = cells.iter().filter_map(|r| r[col]).collect();
                let lo = column.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = column.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let norm = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
                let w = norm + 1e-6;
                for j in 0..3 {
                    expectation[j] += w * gene_vectors[col][j];
                }
                total += w;
            }
            for j in 0..3 {
                expectation[j] /= total;
                assert!(
                    (matrix.rows[i].vector[j] - expectation[j]).abs() < 1e-12,
                    "sample s{i} coordinate {j}"
                );
            }
        }

        // Convexity: every coordinate within the used genes' coordinate range.
        for (i, row) in cells.iter().enumerate() {
            for j in 0..3 {
                let coords: Vec<f64> = row
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.is_some())
                    .map(|(col, _)| gene_vectors[col][j])
                    .collect();
                let lo = coords.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let got = matrix.rows[i].vector[j];
                assert!(got >= lo - 1e-12 && got <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn positive_scaling_of_a_column_changes_nothing() {
        // 4 is a power of two, so the min-max arithmetic scales exactly and
        // the matrices must be bitwise identical.
        let base = "sample_id\tlabel\tg1\tg2\ns1\tcase\t1\t-2\ns2\tcontrol\t2\t5\ns3\tcase\t4\t0.5\n";
        let scaled = "sample_id\tlabel\tg1\tg2\ns1\tcase\t4\t-2\ns2\tcontrol\t8\t5\ns3\tcase\t16\t0.5\n";
        let a = parse_expression_tsv(base.as_bytes(), "d").unwrap();
        let b = parse_expression_tsv(scaled.as_bytes(), "d").unwrap();
        let model = fixed_model(&[
            (ns().gene("g1"), vec![1.0, 2.0, 3.0]),
            (ns().gene("g2"), vec![-1.0, 0.5, 0.0]),
        ]);
        let ma = weighted_average_representation(&model, &a, &ns()).unwrap();
        let mb = weighted_average_representation(&model, &b, &ns()).unwrap();
        assert_eq!(ma, mb);
    }

    #[test]
    fn patient_with_no_usable_gene_is_an_error() {
        let text = "sample_id\tlabel\tg1\tg2\ns1\tcase\tNA\t1\ns2\tcontrol\t1\t2\n";
        let ds = parse_expression_tsv(text.as_bytes(), "d").unwrap();
        // Only g1 has an embedding; s1 has no value for it.
        let model = fixed_model(&[(ns().gene("g1"), vec![1.0, 1.0])]);
        match weighted_average_representation(&model, &ds, &ns()) {
            Err(ReprError::NoUsableGene { sample, .. }) => assert_eq!(sample, "s1"),
            other => panic!("expected no-usable-gene error, got {other:?}"),
        }
    }

    #[test]
    fn tsv_export_has_one_row_per_sample() {
        let ds = parse_expression_tsv(
            "sample_id\tlabel\tg1\ns1\tcase\t1\ns2\tcontrol\t2\n".as_bytes(),
            "d",
        )
        .unwrap();
        let corpus = WalkCorpus {
            sentences: vec![vec![
                ns().patient("d", "s1"),
                "p".to_string(),
                ns().patient("d", "s2"),
            ]],
        };
        let config = TrainConfig { dimension: 4, epochs: 1, ..Default::default() };
        let (model, _) = train(&corpus, &config).unwrap();
        let matrix = direct_representation(&model, &[&ds], &ns()).unwrap();
        let mut buf = Vec::new();
        matrix.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("sample_id\tdataset_id\tlabel\tv0"));
        assert!(lines[1].starts_with("s1\td\tcase\t"));
    }
}
