//! Knowledge-graph assembly from expression datasets and domain knowledge.
//!
//! Expression values enter the graph through one of two encoders:
//!
//! * **binning** — each non-missing `(patient, gene)` cell is reified as a
//!   fresh blank node linked to the patient, to the gene, and to a bin node
//!   discretizing the value. Bin nodes are IRIs, not literals, so walks can
//!   traverse them.
//! * **links** — a `(patient, overexpresses, gene)` edge is added whenever
//!   the patient's value is strictly greater than the gene's mean within the
//!   dataset.

use std::fmt;

use thiserror::Error;

use crate::ingest::{
    domain::domain_triples, AnnotationRecord, ExpressionDataset, IdMapping, InteractionRecord,
    OntologySource,
};
use crate::ns::{Namespaces, RDF_TYPE};
use crate::store::{Graph, StoreError, Term, Triple};

#[derive(Debug, Error)]
pub enum KgError {
    #[error("cannot bin an empty value list")]
    EmptyValues,
    #[error("binning percentage must be in (0, 1], got {0}")]
    BadPercentage(f64),
    #[error("at least one expression dataset is required")]
    NoDatasets,
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// How expression values are represented in the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoder {
    Binning,
    Links,
}

impl fmt::Display for Encoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Encoder::Binning => f.write_str("binning"),
            Encoder::Links => f.write_str("links"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KgBuildConfig {
    pub encoder: Encoder,
    /// Fraction of a gene's distinct values that becomes its bin count.
    pub binning_percentage: f64,
    pub include_domain_knowledge: bool,
    pub namespaces: Namespaces,
}

impl Default for KgBuildConfig {
    fn default() -> Self {
        Self {
            encoder: Encoder::Links,
            binning_percentage: 0.1,
            include_domain_knowledge: true,
            namespaces: Namespaces::default(),
        }
    }
}

/// Equal-width bin edges for one gene within one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSpec {
    pub edges: Vec<f64>,
}

impl BinSpec {
    pub fn n_bins(&self) -> usize {
        self.edges.len() - 1
    }
}

/// Build equal-width bin edges over `values`. The bin count is
/// `max(1, round(percentage × distinct-value-count))`; identical values
/// collapse to a single degenerate `[v, v]` bin.
pub fn make_bins(values: &[f64], percentage: f64) -> Result<BinSpec, KgError> {
    if values.is_empty() {
        return Err(KgError::EmptyValues);
    }
    if !(percentage > 0.0 && percentage <= 1.0) {
        return Err(KgError::BadPercentage(percentage));
    }
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    let min = distinct[0];
    let max = *distinct.last().expect("non-empty");
    if min == max {
        return Ok(BinSpec { edges: vec![min, max] });
    }
    let n_bins = ((percentage * distinct.len() as f64).round() as usize).max(1);
    let width = (max - min) / n_bins as f64;
    let mut edges: Vec<f64> = (0..n_bins).map(|i| min + i as f64 * width).collect();
    edges.push(max); // exact upper edge, immune to accumulated rounding
    Ok(BinSpec { edges })
}

/// 0-based bin index of a value; out-of-range values clamp to the first or
/// last bin and the maximum value lands in the last bin.
pub fn assign_bin(spec: &BinSpec, value: f64) -> usize {
    let last = spec.n_bins() - 1;
    if value <= spec.edges[0] {
        return 0;
    }
    if value >= spec.edges[spec.n_bins()] {
        return last;
    }
    // First edge strictly greater than value, minus one.
    match spec.edges[1..spec.n_bins()].iter().position(|e| value < *e) {
        Some(i) => i,
        None => last,
    }
}

/// Per-source counters for the build report.
#[derive(Debug, Clone, Default)]
pub struct BuildReport {
    pub encoder: String,
    pub per_dataset: Vec<(String, usize)>,
    pub domain_triples: usize,
    pub bridge_triples: usize,
    pub unmapped_genes: Vec<String>,
    pub total_triples: usize,
    pub relation_types: usize,
    pub nodes: usize,
}

impl fmt::Display for BuildReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "knowledge graph build report")?;
        writeln!(f, "  encoder: {}", self.encoder)?;
        for (id, count) in &self.per_dataset {
            writeln!(f, "  dataset {id}: {count} triples")?;
        }
        writeln!(f, "  domain knowledge: {} triples", self.domain_triples)?;
        writeln!(f, "  gene-protein bridge: {} triples", self.bridge_triples)?;
        writeln!(f, "  unmapped genes: {}", self.unmapped_genes.len())?;
        for gene in &self.unmapped_genes {
            writeln!(f, "    {gene}")?;
        }
        writeln!(f, "  total triples: {}", self.total_triples)?;
        writeln!(f, "  relation types: {}", self.relation_types)?;
        writeln!(f, "  nodes: {}", self.nodes)
    }
}

/// Encode one dataset with the binning strategy; returns triples added.
pub fn encode_binning(
    graph: &mut Graph,
    dataset: &ExpressionDataset,
    percentage: f64,
    ns: &Namespaces,
) -> Result<usize, KgError> {
    let mut added = insert_type_triples(graph, dataset, ns)?;
    let has_expression = ns.has_expression();
    let is_expression_of = ns.is_expression_of_gene();
    let has_value = ns.has_value();

    // Bin layout is fixed per (dataset, gene) before any cell is encoded.
    let mut specs: Vec<Option<BinSpec>> = Vec::with_capacity(dataset.gene_ids.len());
    for col in 0..dataset.gene_ids.len() {
        let values: Vec<f64> = dataset.samples.iter().filter_map(|s| s.values[col]).collect();
        specs.push(if values.is_empty() { None } else { Some(make_bins(&values, percentage)?) });
    }

    for sample in &dataset.samples {
        let patient = Term::iri(ns.patient(&dataset.id, &sample.id));
        for (col, gene_id) in dataset.gene_ids.iter().enumerate() {
            let Some(value) = sample.values[col] else { continue };
            let spec = specs[col].as_ref().expect("non-missing value implies a bin spec");
            let bin = assign_bin(spec, value);
            let node = graph.fresh_blank();
            added += graph.insert(Triple::new(
                patient.clone(),
                has_expression.clone(),
                node.clone(),
            ))? as usize;
            added += graph.insert(Triple::new(
                node.clone(),
                is_expression_of.clone(),
                Term::iri(ns.gene(gene_id)),
            ))? as usize;
            added += graph.insert(Triple::new(
                node,
                has_value.clone(),
                Term::iri(ns.bin(&dataset.id, gene_id, bin)),
            ))? as usize;
        }
    }
    Ok(added)
}

/// Encode one dataset with the over-expression links strategy; returns
/// triples added.
pub fn encode_links(
    graph: &mut Graph,
    dataset: &ExpressionDataset,
    ns: &Namespaces,
) -> Result<usize, KgError> {
    let mut added = insert_type_triples(graph, dataset, ns)?;
    let overexpresses = ns.overexpresses();

    let mut means: Vec<Option<f64>> = Vec::with_capacity(dataset.gene_ids.len());
    for col in 0..dataset.gene_ids.len() {
        let mut sum = 0.0;
        let mut count = 0usize;
        for sample in &dataset.samples {
            if let Some(v) = sample.values[col] {
                sum += v;
                count += 1;
            }
        }
        means.push((count > 0).then(|| sum / count as f64));
    }

    for sample in &dataset.samples {
        let patient = Term::iri(ns.patient(&dataset.id, &sample.id));
        for (col, gene_id) in dataset.gene_ids.iter().enumerate() {
            let (Some(value), Some(mean)) = (sample.values[col], means[col]) else { continue };
            if value > mean {
                added += graph.insert(Triple::new(
                    patient.clone(),
                    overexpresses.clone(),
                    Term::iri(ns.gene(gene_id)),
                ))? as usize;
            }
        }
    }
    Ok(added)
}

fn insert_type_triples(
    graph: &mut Graph,
    dataset: &ExpressionDataset,
    ns: &Namespaces,
) -> Result<usize, KgError> {
    let patient_class = Term::iri(ns.class_patient());
    let gene_class = Term::iri(ns.class_gene());
    let mut added = 0;
    for sample in &dataset.samples {
        let patient = Term::iri(ns.patient(&dataset.id, &sample.id));
        added += graph.insert(Triple::new(patient, RDF_TYPE, patient_class.clone()))? as usize;
    }
    for gene_id in &dataset.gene_ids {
        let gene = Term::iri(ns.gene(gene_id));
        added += graph.insert(Triple::new(gene, RDF_TYPE, gene_class.clone()))? as usize;
    }
    Ok(added)
}

/// Link every gene node of the graph to its mapped proteins. Returns the
/// number of triples added and the gene ids that had no mapping entry.
pub fn bridge_genes(
    graph: &mut Graph,
    mapping: &IdMapping,
    ns: &Namespaces,
) -> Result<(usize, Vec<String>), KgError> {
    let gene_class = Term::iri(ns.class_gene());
    let gene_nodes = graph.subjects_of(RDF_TYPE, &gene_class);
    let mapped_to = ns.mapped_to();

    let mut added = 0;
    let mut unmapped = Vec::new();
    for node in gene_nodes {
        let Term::Iri(iri) = &node else { continue };
        let Some(gene_id) = ns.gene_id_of(iri) else { continue };
        match mapping.proteins_for(&gene_id) {
            Some(proteins) => {
                for protein in proteins {
                    added += graph.insert(Triple::new(
                        node.clone(),
                        mapped_to.clone(),
                        Term::iri(ns.protein(protein)),
                    ))? as usize;
                }
            }
            None => unmapped.push(gene_id),
        }
    }
    Ok((added, unmapped))
}

/// Assemble the full graph: all datasets under the configured encoder, plus
/// domain knowledge and the gene→protein bridge when enabled.
pub fn assemble_kg(
    datasets: &[&ExpressionDataset],
    ontology: &OntologySource,
    annotations: &[AnnotationRecord],
    interactions: &[InteractionRecord],
    mapping: &IdMapping,
    config: &KgBuildConfig,
) -> Result<(Graph, BuildReport), KgError> {
    if datasets.is_empty() {
        return Err(KgError::NoDatasets);
    }
    let ns = &config.namespaces;
    let mut graph = Graph::new();
    let mut report = BuildReport { encoder: config.encoder.to_string(), ..Default::default() };

    for dataset in datasets {
        let added = match config.encoder {
            Encoder::Binning => encode_binning(&mut graph, dataset, config.binning_percentage, ns)?,
            Encoder::Links => encode_links(&mut graph, dataset, ns)?,
        };
        report.per_dataset.push((dataset.id.clone(), added));
    }

    if config.include_domain_knowledge {
        for triple in domain_triples(ontology, annotations, interactions, ns) {
            report.domain_triples += graph.insert(triple)? as usize;
        }
        let (bridged, unmapped) = bridge_genes(&mut graph, mapping, ns)?;
        report.bridge_triples = bridged;
        report.unmapped_genes = unmapped;
    }

    let stats = graph.stats();
    report.total_triples = stats.triples;
    report.relation_types = stats.predicates;
    report.nodes = stats.nodes;
    Ok((graph, report))
}
