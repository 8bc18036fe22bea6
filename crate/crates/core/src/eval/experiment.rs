//! Enrichment cross-validation: test folds come only from the target
//! dataset; every training split is enriched with all auxiliary samples
//! (except for the single-dataset baseline). KG-backed variants build the
//! graph, walks, and embeddings once from the full data; folds apply only
//! to the classifier.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::embed::train;
use crate::ingest::{
    AnnotationRecord, ExpressionDataset, IdMapping, InteractionRecord, Label, OntologySource,
    Sample,
};
use crate::kg::{assemble_kg, Encoder, KgBuildConfig};
use crate::ns::Namespaces;
use crate::repr::{direct_representation, weighted_average_representation, PatientMatrix};
use crate::store::Term;
use crate::walk::{generate_walks, WalkConfig};

use super::{compute_metrics, fit_tree, stratified_kfold, EvalError, Metrics, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Raw expression features of the target dataset only.
    BaselineSingle,
    /// Union feature space over all datasets, absent values as 0.
    BaselineMergedZeros,
    /// Direct patient embeddings from the binning-encoded graph.
    KgBinning,
    /// Direct patient embeddings from the links-encoded graph.
    KgLinks,
    /// Expression-weighted average of gene embeddings (links-encoded graph).
    KgWeightedAvg,
}

impl Variant {
    pub fn all() -> [Variant; 5] {
        [
            Variant::BaselineSingle,
            Variant::BaselineMergedZeros,
            Variant::KgBinning,
            Variant::KgLinks,
            Variant::KgWeightedAvg,
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            Variant::BaselineSingle => "baseline-single",
            Variant::BaselineMergedZeros => "baseline-merged-zeros",
            Variant::KgBinning => "kg-binning",
            Variant::KgLinks => "kg-links",
            Variant::KgWeightedAvg => "kg-weighted-avg",
        }
    }

    pub fn parse(text: &str) -> Option<Variant> {
        Variant::all().into_iter().find(|v| v.label() == text)
    }

    pub fn uses_kg(&self) -> bool {
        matches!(self, Variant::KgBinning | Variant::KgLinks | Variant::KgWeightedAvg)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub target_dataset_id: String,
    pub auxiliary_dataset_ids: Vec<String>,
    pub variant: Variant,
    pub include_domain_knowledge: bool,
    pub k: usize,
    pub seed: u64,
}

/// Knobs shared by every variant of one experiment run.
#[derive(Debug, Clone)]
pub struct PipelineSettings {
    pub binning_percentage: f64,
    pub namespaces: Namespaces,
    pub walk: WalkConfig,
    pub train: crate::embed::TrainConfig,
    pub tree: TreeParams,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            binning_percentage: 0.1,
            namespaces: Namespaces::default(),
            walk: WalkConfig::default(),
            train: crate::embed::TrainConfig::default(),
            tree: TreeParams::default(),
        }
    }
}

pub struct ExperimentInputs<'a> {
    pub datasets: &'a [ExpressionDataset],
    pub ontology: &'a OntologySource,
    pub annotations: &'a [AnnotationRecord],
    pub interactions: &'a [InteractionRecord],
    pub mapping: &'a IdMapping,
    pub settings: PipelineSettings,
}

/// Per-fold and averaged metrics of one variant.
#[derive(Debug, Clone)]
pub struct VariantReport {
    pub label: String,
    pub per_fold: Vec<Metrics>,
    pub mean: Metrics,
}

/// The pipeline's product: metric records for every variant, plus the fold
/// composition for protocol auditing.
#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub target_dataset_id: String,
    pub k: usize,
    pub seed: u64,
    /// `(dataset_id, sample_id)` of every test row, per fold.
    pub fold_test_sets: Vec<Vec<(String, String)>>,
    pub variants: Vec<VariantReport>,
}

impl EvaluationReport {
    /// Fold into this report the variants of another run over the same
    /// folds. Differing fold compositions are a protocol violation.
    pub fn merge(&mut self, other: EvaluationReport) -> Result<(), EvalError> {
        if other.fold_test_sets != self.fold_test_sets {
            return Err(EvalError::Config(
                "cannot merge reports with different fold compositions".into(),
            ));
        }
        self.variants.extend(other.variants);
        Ok(())
    }

    /// One row per (variant, fold) plus one mean row per variant.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,fold,acc,pr,re,f1,waf,auc\n");
        for variant in &self.variants {
            for (i, m) in variant.per_fold.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", variant.label, i + 1, csv_metrics(m));
            }
            let _ = writeln!(out, "{},mean,{}", variant.label, csv_metrics(&variant.mean));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "evaluation report");
        let _ = writeln!(
            out,
            "  target: {} ({} folds, seed {})",
            self.target_dataset_id, self.k, self.seed
        );
        for (i, fold) in self.fold_test_sets.iter().enumerate() {
            let _ = writeln!(out, "  fold {} test samples: {}", i + 1, fold.len());
        }
        for variant in &self.variants {
            let _ = writeln!(out, "\n{}", variant.label);
            let _ = writeln!(out, "  {:<6} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}", "fold", "acc", "pr", "re", "f1", "waf", "auc");
            for (i, m) in variant.per_fold.iter().enumerate() {
                let _ = writeln!(out, "  {:<6} {}", i + 1, text_metrics(m));
            }
            let _ = writeln!(out, "  {:<6} {}", "mean", text_metrics(&variant.mean));
            let degenerate = variant.per_fold.iter().filter(|m| m.degenerate).count();
            if degenerate > 0 {
                let _ = writeln!(
                    out,
                    "  note: {degenerate} fold(s) had a zero denominator; affected metrics reported as 0"
                );
            }
        }
        out
    }
}

fn csv_metrics(m: &Metrics) -> String {
    format!(
        "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
        m.accuracy, m.precision, m.recall, m.f1, m.waf, m.auc
    )
}

fn text_metrics(m: &Metrics) -> String {
    format!(
        "{:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}",
        m.accuracy, m.precision, m.recall, m.f1, m.waf, m.auc
    )
}

fn mean_metrics(per_fold: &[Metrics]) -> Metrics {
    let n = per_fold.len() as f64;
    let sum = |f: fn(&Metrics) -> f64| per_fold.iter().map(f).sum::<f64>() / n;
    Metrics {
        accuracy: sum(|m| m.accuracy),
        precision: sum(|m| m.precision),
        recall: sum(|m| m.recall),
        f1: sum(|m| m.f1),
        waf: sum(|m| m.waf),
        auc: sum(|m| m.auc),
        degenerate: per_fold.iter().any(|m| m.degenerate),
    }
}

/// Union feature space over several datasets: the target's genes first (in
/// target order), then unseen genes in dataset order.
pub struct MergedFeatureSpace {
    features: Vec<String>,
    index: HashMap<String, usize>,
}

pub fn merged_zero_features(
    target: &ExpressionDataset,
    auxiliaries: &[&ExpressionDataset],
) -> MergedFeatureSpace {
    let mut space = MergedFeatureSpace { features: Vec::new(), index: HashMap::new() };
    for dataset in std::iter::once(&target).chain(auxiliaries.iter()) {
        for gene in &dataset.gene_ids {
            if !space.index.contains_key(gene) {
                space.index.insert(gene.clone(), space.features.len());
                space.features.push(gene.clone());
            }
        }
    }
    space
}

impl MergedFeatureSpace {
    pub fn features(&self) -> &[String] {
        &self.features
    }

    /// A sample's feature row: measured values in place, 0.0 for genes the
    /// dataset does not cover and for missing values.
    pub fn row(&self, dataset: &ExpressionDataset, sample: &Sample) -> Vec<f64> {
        let mut row = vec![0.0; self.features.len()];
        for (gene, value) in dataset.gene_ids.iter().zip(&sample.values) {
            if let (Some(&idx), Some(v)) = (self.index.get(gene), value) {
                row[idx] = *v;
            }
        }
        row
    }
}

/// Raw expression row with missing values as 0.
fn expression_row(sample: &Sample) -> Vec<f64> {
    sample.values.iter().map(|v| v.unwrap_or(0.0)).collect()
}

struct FeatureSets {
    /// Aligned with the target dataset's sample order.
    target: Vec<Vec<f64>>,
    /// Auxiliary rows joined to every training split.
    auxiliary: Vec<(Vec<f64>, Label)>,
}

fn kg_feature_sets(
    config: &ExperimentConfig,
    inputs: &ExperimentInputs,
    ordered: &[&ExpressionDataset],
) -> Result<FeatureSets, EvalError> {
    let settings = &inputs.settings;
    let ns = &settings.namespaces;
    let kg_config = KgBuildConfig {
        encoder: match config.variant {
            Variant::KgBinning => Encoder::Binning,
            _ => Encoder::Links,
        },
        binning_percentage: settings.binning_percentage,
        include_domain_knowledge: config.include_domain_knowledge,
        namespaces: ns.clone(),
    };
    let (graph, _report) = assemble_kg(
        ordered,
        inputs.ontology,
        inputs.annotations,
        inputs.interactions,
        inputs.mapping,
        &kg_config,
    )?;

    let direct = matches!(config.variant, Variant::KgBinning | Variant::KgLinks);
    let mut entities: Vec<Term> = Vec::new();
    if direct {
        for dataset in ordered {
            for sample in &dataset.samples {
                entities.push(Term::iri(ns.patient(&dataset.id, &sample.id)));
            }
        }
    }
    let mut seen = HashSet::new();
    for dataset in ordered {
        for gene in &dataset.gene_ids {
            if seen.insert(gene.clone()) {
                entities.push(Term::iri(ns.gene(gene)));
            }
        }
    }

    let corpus = generate_walks(&graph, &entities, &settings.walk)?;
    let (model, _telemetry) = train(&corpus, &settings.train)?;

    let matrix: PatientMatrix = if direct {
        direct_representation(&model, ordered, ns)?
    } else {
        let mut matrix = PatientMatrix::default();
        for dataset in ordered {
            matrix.append(weighted_average_representation(&model, dataset, ns)?);
        }
        matrix
    };

    let n_target = ordered[0].samples.len();
    let target = matrix.rows[..n_target].iter().map(|r| r.vector.clone()).collect();
    let auxiliary = matrix.rows[n_target..]
        .iter()
        .map(|r| (r.vector.clone(), r.label))
        .collect();
    Ok(FeatureSets { target, auxiliary })
}

fn feature_sets(
    config: &ExperimentConfig,
    inputs: &ExperimentInputs,
    target: &ExpressionDataset,
    auxiliaries: &[&ExpressionDataset],
) -> Result<FeatureSets, EvalError> {
    match config.variant {
        Variant::BaselineSingle => Ok(FeatureSets {
            target: target.samples.iter().map(expression_row).collect(),
            auxiliary: Vec::new(),
        }),
        Variant::BaselineMergedZeros => {
            let space = merged_zero_features(target, auxiliaries);
            let mut auxiliary = Vec::new();
            for dataset in auxiliaries {
                for sample in &dataset.samples {
                    auxiliary.push((space.row(dataset, sample), sample.label));
                }
            }
            Ok(FeatureSets {
                target: target.samples.iter().map(|s| space.row(target, s)).collect(),
                auxiliary,
            })
        }
        _ => {
            let ordered: Vec<&ExpressionDataset> =
                std::iter::once(target).chain(auxiliaries.iter().copied()).collect();
            kg_feature_sets(config, inputs, &ordered)
        }
    }
}

fn resolve_datasets<'a>(
    config: &ExperimentConfig,
    inputs: &'a ExperimentInputs,
) -> Result<(&'a ExpressionDataset, Vec<&'a ExpressionDataset>), EvalError> {
    let mut ids = HashSet::new();
    for dataset in inputs.datasets {
        if !ids.insert(&dataset.id) {
            return Err(EvalError::Config(format!("duplicate dataset id {:?}", dataset.id)));
        }
    }
    let find = |id: &str| {
        inputs
            .datasets
            .iter()
            .find(|d| d.id == id)
            .ok_or_else(|| EvalError::Config(format!("dataset {id:?} not among the inputs")))
    };
    let target = find(&config.target_dataset_id)?;
    let mut auxiliaries = Vec::new();
    for id in &config.auxiliary_dataset_ids {
        if *id == config.target_dataset_id {
            return Err(EvalError::Config(format!(
                "target dataset {id:?} cannot also be auxiliary"
            )));
        }
        auxiliaries.push(find(id)?);
    }
    Ok((target, auxiliaries))
}

/// Run one experiment variant under the enrichment protocol and report
/// per-fold metrics plus their mean.
pub fn run_experiment(
    config: &ExperimentConfig,
    inputs: &ExperimentInputs,
) -> Result<EvaluationReport, EvalError> {
    let (target, auxiliaries) = resolve_datasets(config, inputs)?;
    let target_labels: Vec<Label> = target.samples.iter().map(|s| s.label).collect();
    let folds = stratified_kfold(&target_labels, config.k, config.seed)?;

    let features = feature_sets(config, inputs, target, &auxiliaries)?;

    let mut per_fold = Vec::with_capacity(config.k);
    let mut fold_test_sets = Vec::with_capacity(config.k);
    for fold in &folds {
        let mut in_test = vec![false; target.samples.len()];
        for &i in fold {
            in_test[i] = true;
        }

        let mut train_x: Vec<Vec<f64>> = Vec::new();
        let mut train_y: Vec<Label> = Vec::new();
        for (i, row) in features.target.iter().enumerate() {
            if !in_test[i] {
                train_x.push(row.clone());
                train_y.push(target_labels[i]);
            }
        }
        for (row, label) in &features.auxiliary {
            train_x.push(row.clone());
            train_y.push(*label);
        }

        let tree = fit_tree(&train_x, &train_y, &inputs.settings.tree)?;
        let mut test_labels = Vec::with_capacity(fold.len());
        let mut scores = Vec::with_capacity(fold.len());
        for &i in fold {
            test_labels.push(target_labels[i]);
            scores.push(tree.predict_proba(&features.target[i])?);
        }
        per_fold.push(compute_metrics(&test_labels, &scores)?);
        fold_test_sets
            .push(fold.iter().map(|&i| (target.id.clone(), target.samples[i].id.clone())).collect());
    }

    let label = if config.variant.uses_kg() && !config.include_domain_knowledge {
        format!("{}-nodk", config.variant.label())
    } else {
        config.variant.label().to_string()
    };
    let mean = mean_metrics(&per_fold);
    Ok(EvaluationReport {
        target_dataset_id: target.id.clone(),
        k: config.k,
        seed: config.seed,
        fold_test_sets,
        variants: vec![VariantReport { label, per_fold, mean }],
    })
}
