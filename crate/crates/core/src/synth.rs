//! Deterministic generator of multi-study test fixtures.
//!
//! The generated suite reproduces the heterogeneity of real study
//! collections: gene panels that overlap partially or not at all, plus
//! domain files that bridge the studies at the protein level. A class
//! signal is planted as a mean shift on a few signal genes, and the signal
//! genes of every auxiliary panel are connected to the target's signal
//! genes through a shared ontology annotation and direct interaction edges,
//! so cross-study integration is informative by construction.

use std::fmt::Write as _;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::ingest::{ExpressionDataset, Label, Sample};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("synth config: {0}")]
    Config(String),
}

/// Shape of one generated dataset.
#[derive(Debug, Clone)]
pub struct DatasetShape {
    pub id: String,
    pub samples: usize,
    pub panel_size: usize,
    /// Fraction of this panel drawn from the target panel.
    pub overlap_with_target: f64,
    /// Fraction of this panel drawn from the previous auxiliary's own genes.
    pub overlap_with_prior_aux: f64,
}

impl DatasetShape {
    pub fn new(id: &str, samples: usize, panel_size: usize) -> Self {
        Self {
            id: id.to_string(),
            samples,
            panel_size,
            overlap_with_target: 0.0,
            overlap_with_prior_aux: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub target: DatasetShape,
    pub auxiliaries: Vec<DatasetShape>,
    pub n_signal_genes: usize,
    /// Mean shift of signal genes in case samples, in noise-σ units.
    pub effect_size: f64,
    pub ontology_terms: usize,
    /// Expected random annotations per protein.
    pub annotation_density: f64,
    /// Expected random interaction edges per protein.
    pub interaction_density: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        // Three studies: the target panel is disjoint from both auxiliary
        // panels, while the two auxiliaries share part of theirs — the
        // hardest integration shape, solvable only through domain links.
        let mut aux2 = DatasetShape::new("aux2", 60, 40);
        aux2.overlap_with_prior_aux = 0.4;
        Self {
            seed: 42,
            target: DatasetShape::new("target", 60, 24),
            auxiliaries: vec![DatasetShape::new("aux1", 60, 40), aux2],
            n_signal_genes: 5,
            effect_size: 2.0,
            ontology_terms: 60,
            annotation_density: 1.0,
            interaction_density: 1.0,
        }
    }
}

/// Everything the pipeline consumes, in its input formats.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSuite {
    /// Target first, then auxiliaries in config order.
    pub datasets: Vec<ExpressionDataset>,
    /// Signal genes per dataset, aligned with `datasets`.
    pub signal_genes: Vec<Vec<String>>,
    pub obo_text: String,
    pub gaf_text: String,
    pub string_links_text: String,
    pub mapping_text: String,
}

fn validate(config: &SynthConfig) -> Result<(), SynthError> {
    let err = |msg: String| Err(SynthError::Config(msg));
    if config.effect_size < 0.0 {
        return err("effect size must be non-negative".into());
    }
    if config.ontology_terms == 0 {
        return err("ontology needs at least one term".into());
    }
    if config.n_signal_genes == 0 {
        return err("at least one signal gene is required".into());
    }
    if config.auxiliaries.is_empty() || config.auxiliaries.len() > 2 {
        return err(format!(
            "the suite takes 1 or 2 auxiliary datasets, got {}",
            config.auxiliaries.len()
        ));
    }
    for shape in std::iter::once(&config.target).chain(&config.auxiliaries) {
        if shape.samples < 2 {
            return err(format!("dataset {:?} needs at least 2 samples", shape.id));
        }
        if shape.panel_size == 0 {
            return err(format!("dataset {:?} needs a non-empty panel", shape.id));
        }
        if config.n_signal_genes > shape.panel_size {
            return err(format!(
                "{} signal genes do not fit in the {}-gene panel of {:?}",
                config.n_signal_genes, shape.panel_size, shape.id
            ));
        }
        for fraction in [shape.overlap_with_target, shape.overlap_with_prior_aux] {
            if !(0.0..=1.0).contains(&fraction) {
                return err(format!("overlap fractions must be in [0, 1], got {fraction}"));
            }
        }
    }
    Ok(())
}

fn protein_of(gene: &str) -> String {
    format!("P_{gene}")
}

/// Generate the whole suite; identical configs produce byte-identical files.
pub fn generate_suite(config: &SynthConfig) -> Result<SyntheticSuite, SynthError> {
    validate(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // Gene panels. The target owns TGxxx; auxiliary panels mix genes shared
    // with the target, genes shared with the previous auxiliary, and fresh
    // A{j}Gxxx genes.
    let target_panel: Vec<String> =
        (0..config.target.panel_size).map(|i| format!("TG{i:03}")).collect();
    let mut panels: Vec<Vec<String>> = vec![target_panel.clone()];
    for (j, shape) in config.auxiliaries.iter().enumerate() {
        let from_target = (shape.overlap_with_target * shape.panel_size as f64).round() as usize;
        let from_prior = (shape.overlap_with_prior_aux * shape.panel_size as f64).round() as usize;
        if from_target > target_panel.len() {
            return Err(SynthError::Config(format!(
                "dataset {:?} wants {from_target} target genes, target only has {}",
                shape.id,
                target_panel.len()
            )));
        }
        let prior_pool: Vec<String> = if j == 0 {
            Vec::new()
        } else {
            // Only the previous auxiliary's own genes, not ones it borrowed.
            panels[j].iter().filter(|g| g.starts_with(&format!("A{j}G"))).cloned().collect()
        };
        if from_prior > prior_pool.len() {
            return Err(SynthError::Config(format!(
                "dataset {:?} wants {from_prior} genes from the prior auxiliary, which has {}",
                shape.id,
                prior_pool.len()
            )));
        }
        if from_target + from_prior > shape.panel_size {
            return Err(SynthError::Config(format!(
                "overlaps of dataset {:?} exceed its panel size",
                shape.id
            )));
        }
        let mut panel: Vec<String> = Vec::with_capacity(shape.panel_size);
        panel.extend(target_panel.choose_multiple(&mut rng, from_target).cloned());
        panel.extend(prior_pool.choose_multiple(&mut rng, from_prior).cloned());
        let fresh = shape.panel_size - panel.len();
        panel.extend((0..fresh).map(|i| format!("A{}G{i:03}", j + 1)));
        panel.shuffle(&mut rng);
        panels.push(panel);
    }

    // Signal genes per dataset.
    let shapes: Vec<&DatasetShape> =
        std::iter::once(&config.target).chain(&config.auxiliaries).collect();
    let signal_genes: Vec<Vec<String>> = panels
        .iter()
        .map(|panel| {
            let mut chosen: Vec<String> =
                panel.choose_multiple(&mut rng, config.n_signal_genes).cloned().collect();
            chosen.sort();
            chosen
        })
        .collect();

    // Expression tables: standard normal noise, case samples shifted on
    // their dataset's signal genes.
    let mut datasets = Vec::with_capacity(shapes.len());
    for ((shape, panel), signals) in shapes.iter().zip(&panels).zip(&signal_genes) {
        let is_signal: Vec<bool> = panel.iter().map(|g| signals.contains(g)).collect();
        let samples: Vec<Sample> = (0..shape.samples)
            .map(|i| {
                let label = if i % 2 == 0 { Label::Case } else { Label::Control };
                let values: Vec<Option<f64>> = (0..panel.len())
                    .map(|col| {
                        let noise: f64 = rng.sample(StandardNormal);
                        let shift = if label == Label::Case && is_signal[col] {
                            config.effect_size
                        } else {
                            0.0
                        };
                        Some(noise + shift)
                    })
                    .collect();
                Sample { id: format!("s{i:03}"), label, values }
            })
            .collect();
        datasets.push(ExpressionDataset {
            id: shape.id.clone(),
            gene_ids: panel.clone(),
            samples,
        });
    }

    // Ontology: a random tree under GO:0000001 with occasional part_of
    // links, plus one dedicated term that every signal protein annotates.
    let go_id = |i: usize| format!("GO:{:07}", i + 1);
    let mut obo_text = String::from("format-version: 1.2\nontology: synthgo\n");
    for i in 0..config.ontology_terms {
        let _ = write!(obo_text, "\n[Term]\nid: {}\nname: synthetic process {}\n", go_id(i), i + 1);
        if i > 0 {
            let parent = rng.gen_range(0..i);
            let _ = writeln!(obo_text, "is_a: {} ! synthetic process {}", go_id(parent), parent + 1);
        }
        if i > 0 && i % 7 == 0 {
            let other = rng.gen_range(0..i);
            let _ = writeln!(obo_text, "relationship: part_of {}", go_id(other));
        }
    }
    let signal_term = go_id(config.ontology_terms - 1);

    // Protein universe and gene→protein mapping, one protein per gene.
    let mut proteins: Vec<String> = Vec::new();
    let mut mapping_text = String::new();
    let mut seen = std::collections::HashSet::new();
    for panel in &panels {
        for gene in panel {
            if seen.insert(gene.clone()) {
                let protein = protein_of(gene);
                let _ = writeln!(mapping_text, "{gene}\t{protein}");
                proteins.push(protein);
            }
        }
    }

    // Annotations: every signal protein shares the signal term; the rest of
    // the annotation mass is random.
    let mut gaf_text = String::from("!gaf-version: 2.2\n!generated-by: synthkit\n");
    let annotate = |gaf_text: &mut String, protein: &str, term: &str| {
        let _ = writeln!(
            gaf_text,
            "SYNTH\t{protein}\t{protein}\tenables\t{term}\tSYNTH:0001\tIEA\t\tP"
        );
    };
    for signals in &signal_genes {
        for gene in signals {
            annotate(&mut gaf_text, &protein_of(gene), &signal_term);
        }
    }
    for protein in &proteins {
        let mut n = config.annotation_density.floor() as usize;
        if rng.gen_bool(config.annotation_density.fract()) {
            n += 1;
        }
        for _ in 0..n {
            let term = go_id(rng.gen_range(0..config.ontology_terms));
            annotate(&mut gaf_text, protein, &term);
        }
    }

    // Interactions: the signal proteins of all datasets form one clique, so
    // every auxiliary signal gene sits a single hop from the target's;
    // further random edges fill in the configured density, with a sprinkle
    // of below-threshold rows that a default build filters out.
    let mut string_links_text = String::from("protein1 protein2 combined_score\n");
    let mut clique: Vec<String> = Vec::new();
    for signals in &signal_genes {
        for gene in signals {
            let protein = protein_of(gene);
            if !clique.contains(&protein) {
                clique.push(protein);
            }
        }
    }
    for i in 0..clique.len() {
        for j in i + 1..clique.len() {
            let score = rng.gen_range(850..=999);
            let _ = writeln!(string_links_text, "{} {} {score}", clique[i], clique[j]);
        }
    }
    let n_random = (config.interaction_density * proteins.len() as f64).round() as usize;
    let mut random_edge = |string_links_text: &mut String, lo: u32, hi: u32| {
        let a = proteins.choose(&mut rng).expect("non-empty proteins");
        let b = loop {
            let b = proteins.choose(&mut rng).expect("non-empty proteins");
            if b != a {
                break b;
            }
        };
        let score = rng.gen_range(lo..=hi);
        let _ = writeln!(string_links_text, "{a} {b} {score}");
    };
    for _ in 0..n_random {
        random_edge(&mut string_links_text, 700, 999);
    }
    for _ in 0..n_random / 3 {
        random_edge(&mut string_links_text, 150, 699);
    }

    Ok(SyntheticSuite {
        datasets,
        signal_genes,
        obo_text,
        gaf_text,
        string_links_text,
        mapping_text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_gaf, parse_id_mapping, parse_obo, parse_string_links};

    #[test]
    fn suite_is_byte_deterministic() {
        let config = SynthConfig::default();
        let a = generate_suite(&config).unwrap();
        let b = generate_suite(&config).unwrap();
        assert_eq!(a, b);
        let other = SynthConfig { seed: 43, ..SynthConfig::default() };
        assert_ne!(generate_suite(&other).unwrap(), a);
    }

    #[test]
    fn configured_disjointness_is_respected() {
        let suite = generate_suite(&SynthConfig::default()).unwrap();
        let target = &suite.datasets[0];
        for aux in &suite.datasets[1..] {
            assert!(target.shared_genes(aux).is_empty());
        }
        // The two auxiliaries do share genes (0.4 of the second panel).
        let shared = suite.datasets[1].shared_genes(&suite.datasets[2]);
        assert_eq!(shared.len(), 16);
    }

    #[test]
    fn overlap_with_target_produces_shared_panels() {
        let mut config = SynthConfig::default();
        config.auxiliaries[0].overlap_with_target = 0.5;
        let suite = generate_suite(&config).unwrap();
        let shared = suite.datasets[0].shared_genes(&suite.datasets[1]);
        assert_eq!(shared.len(), 20); // 0.5 × 40-gene panel
    }

    #[test]
    fn generated_files_parse_cleanly_with_zero_warnings() {
        let suite = generate_suite(&SynthConfig::default()).unwrap();
        let onto = parse_obo(suite.obo_text.as_bytes()).unwrap();
        assert_eq!(onto.warnings(), 0);
        assert_eq!(onto.obsolete_skipped, 0);
        assert_eq!(onto.terms.len(), 60);
        let gaf = parse_gaf(suite.gaf_text.as_bytes()).unwrap();
        assert_eq!(gaf.negated_skipped, 0);
        assert!(!gaf.records.is_empty());
        let links = parse_string_links(suite.string_links_text.as_bytes(), 700).unwrap();
        assert_eq!(links.self_links_skipped, 0);
        assert!(!links.records.is_empty());
        assert!(links.below_threshold > 0);
        let mapping = parse_id_mapping(suite.mapping_text.as_bytes()).unwrap();
        // One protein per distinct gene across all panels.
        let distinct: std::collections::HashSet<&String> =
            suite.datasets.iter().flat_map(|d| d.gene_ids.iter()).collect();
        assert_eq!(mapping.len(), distinct.len());
    }

    #[test]
    fn expression_tables_roundtrip_through_the_parser() {
        let suite = generate_suite(&SynthConfig::default()).unwrap();
        for dataset in &suite.datasets {
            let mut buf = Vec::new();
            dataset.write_tsv(&mut buf).unwrap();
            let reparsed = crate::ingest::parse_expression_tsv(&buf[..], &dataset.id).unwrap();
            assert_eq!(&reparsed, dataset);
        }
    }

    #[test]
    fn zero_effect_size_plants_no_signal() {
        let config = SynthConfig { effect_size: 0.0, ..SynthConfig::default() };
        let suite = generate_suite(&config).unwrap();
        let target = &suite.datasets[0];
        // Pooled mean difference over signal genes should be noise-sized.
        let mut diffs = Vec::new();
        for gene in &suite.signal_genes[0] {
            let col = target.gene_index(gene).unwrap();
            let mean_of = |label: Label| {
                let values: Vec<f64> = target
                    .samples
                    .iter()
                    .filter(|s| s.label == label)
                    .filter_map(|s| s.values[col])
                    .collect();
                values.iter().sum::<f64>() / values.len() as f64
            };
            diffs.push(mean_of(Label::Case) - mean_of(Label::Control));
        }
        let pooled = diffs.iter().sum::<f64>() / diffs.len() as f64;
        assert!(pooled.abs() < 0.5, "unexpected signal: {pooled}");
    }

    #[test]
    fn planted_effect_size_is_measurable() {
        let suite = generate_suite(&SynthConfig::default()).unwrap();
        for (dataset, signals) in suite.datasets.iter().zip(&suite.signal_genes) {
            let mut diffs = Vec::new();
            for gene in signals {
                let col = dataset.gene_index(gene).unwrap();
                let mean_of = |label: Label| {
                    let values: Vec<f64> = dataset
                        .samples
                        .iter()
                        .filter(|s| s.label == label)
                        .filter_map(|s| s.values[col])
                        .collect();
                    values.iter().sum::<f64>() / values.len() as f64
                };
                diffs.push(mean_of(Label::Case) - mean_of(Label::Control));
            }
            // Per-gene sampling error scales with 1/√n: the 60-sample target
            // stays much closer to the planted 2.0 than the 30-sample
            // auxiliaries.
            let per_gene_bound = if dataset.id == "target" { 0.7 } else { 1.25 };
            for (gene, diff) in signals.iter().zip(&diffs) {
                assert!(
                    (diff - 2.0).abs() < per_gene_bound,
                    "{}: {gene} case-control difference {diff}",
                    dataset.id
                );
            }
            let pooled = diffs.iter().sum::<f64>() / diffs.len() as f64;
            assert!((pooled - 2.0).abs() < 0.5, "{}: pooled difference {pooled}", dataset.id);
        }
    }

    #[test]
    fn aux_signal_genes_are_bridged_to_target_signal_genes() {
        let suite = generate_suite(&SynthConfig::default()).unwrap();
        let gaf = parse_gaf(suite.gaf_text.as_bytes()).unwrap();
        let links = parse_string_links(suite.string_links_text.as_bytes(), 0).unwrap();
        let target_proteins: Vec<String> =
            suite.signal_genes[0].iter().map(|g| protein_of(g)).collect();
        for signals in &suite.signal_genes[1..] {
            for gene in signals {
                let protein = protein_of(gene);
                let go_shared = gaf.records.iter().any(|r| {
                    r.protein_id == protein
                        && gaf.records.iter().any(|t| {
                            target_proteins.contains(&t.protein_id) && t.go_id == r.go_id
                        })
                });
                let ppi_linked = links.records.iter().any(|l| {
                    (l.protein_a == protein && target_proteins.contains(&l.protein_b))
                        || (l.protein_b == protein && target_proteins.contains(&l.protein_a))
                });
                assert!(go_shared || ppi_linked, "{gene} is not bridged");
            }
        }
    }

    #[test]
    fn zero_effect_suite_gives_chance_level_prediction() {
        use crate::eval::{run_experiment, ExperimentConfig, ExperimentInputs, PipelineSettings, Variant};
        let config = SynthConfig { effect_size: 0.0, ..SynthConfig::default() };
        let suite = generate_suite(&config).unwrap();
        let inputs = ExperimentInputs {
            datasets: &suite.datasets,
            ontology: &crate::ingest::OntologySource::default(),
            annotations: &[],
            interactions: &[],
            mapping: &crate::ingest::IdMapping::default(),
            settings: PipelineSettings::default(),
        };
        let experiment = ExperimentConfig {
            target_dataset_id: "target".into(),
            auxiliary_dataset_ids: vec![],
            variant: Variant::BaselineSingle,
            include_domain_knowledge: false,
            k: 5,
            seed: 42,
        };
        let report = run_experiment(&experiment, &inputs).unwrap();
        let auc = report.variants[0].mean.auc;
        // No planted signal: the classifier hovers around chance.
        assert!((auc - 0.5).abs() < 0.25, "null-suite AUC {auc}");
    }

    #[test]
    fn bad_configs_are_rejected() {
        let config = SynthConfig { n_signal_genes: 100, ..SynthConfig::default() };
        assert!(matches!(generate_suite(&config), Err(SynthError::Config(_))));
        let mut config = SynthConfig::default();
        config.auxiliaries[0].overlap_with_target = 1.5;
        assert!(matches!(generate_suite(&config), Err(SynthError::Config(_))));
        let mut config = SynthConfig::default();
        config.target.samples = 1;
        assert!(matches!(generate_suite(&config), Err(SynthError::Config(_))));
        let config = SynthConfig { auxiliaries: vec![], ..SynthConfig::default() };
        assert!(matches!(generate_suite(&config), Err(SynthError::Config(_))));
    }
}
