//! Subcommand implementations. Every output file is written atomically:
//! to a `.tmp` sibling first, then renamed into place.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use genekg::embed::{train, EmbeddingModel};
use genekg::eval::{
    run_experiment, EvaluationReport, ExperimentConfig, ExperimentInputs, PipelineSettings,
    Variant,
};
use genekg::kg::assemble_kg;
use genekg::ns::RDF_TYPE;
use genekg::repr::{direct_representation, weighted_average_representation, PatientMatrix};
use genekg::store::{Graph, Term};
use genekg::synth::{generate_suite, SynthConfig};
use genekg::walk::generate_walks;

use crate::config::{open_buffered, DomainInputs, Pipeline};
use crate::{EmbedArgs, ExperimentArgs, KgArgs, RepresentArgs, SynthArgs};

pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("cannot create {}", parent.display()))?;
        }
    }
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    fs::write(&tmp, contents).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("cannot move {} into place", path.display()))?;
    Ok(())
}

fn note(quiet: bool, message: impl AsRef<str>) {
    if !quiet {
        eprintln!("{}", message.as_ref());
    }
}

pub fn cmd_synth(args: &SynthArgs, quiet: bool) -> Result<()> {
    let mut config = SynthConfig {
        seed: args.seed,
        effect_size: args.effect_size,
        n_signal_genes: args.signal_genes,
        ..SynthConfig::default()
    };
    config.target.samples = args.target_samples;
    for aux in &mut config.auxiliaries {
        aux.samples = args.aux_samples;
    }
    let suite = generate_suite(&config).map_err(|e| anyhow!(e))?;

    let dir = &args.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;

    let mut expression_entries = String::new();
    for dataset in &suite.datasets {
        let mut buf = Vec::new();
        dataset.write_tsv(&mut buf)?;
        let name = format!("expr_{}.tsv", dataset.id);
        atomic_write(&dir.join(&name), &buf)?;
        expression_entries
            .push_str(&format!("[[inputs.expression]]\nid = \"{}\"\npath = \"{name}\"\n\n", dataset.id));
    }
    atomic_write(&dir.join("go.obo"), suite.obo_text.as_bytes())?;
    atomic_write(&dir.join("annotations.gaf"), suite.gaf_text.as_bytes())?;
    atomic_write(&dir.join("string_links.txt"), suite.string_links_text.as_bytes())?;
    atomic_write(&dir.join("gene2protein.tsv"), suite.mapping_text.as_bytes())?;

    let mut signals = String::new();
    for (dataset, genes) in suite.datasets.iter().zip(&suite.signal_genes) {
        signals.push_str(&format!("{}\t{}\n", dataset.id, genes.join("\t")));
    }
    atomic_write(&dir.join("signal_genes.tsv"), signals.as_bytes())?;

    let target_id = &suite.datasets[0].id;
    let pipeline = format!(
        "# Generated pipeline configuration for the synthetic suite (seed {seed}).\n\
         \n{expression_entries}\
         [inputs]\nobo = \"go.obo\"\ngaf = \"annotations.gaf\"\n\
         string_links = \"string_links.txt\"\nmapping = \"gene2protein.tsv\"\nmin_score = 700\n\
         \n[output]\ndir = \"out\"\n\
         \n[kg]\nencoder = \"links\"\nbinning_percentage = 0.1\ninclude_domain_knowledge = true\n\
         \n[walk]\nwalks_per_entity = 50\nmax_depth = 4\nseed = {seed}\n\
         \n[train]\ndimension = 32\nwindow = 5\nnegatives = 5\nepochs = 20\n\
         learning_rate = 0.025\nmin_count = 0\nseed = {seed}\nworkers = 1\n\
         \n[tree]\nmax_depth = 2\nmin_samples_split = 2\n\
         \n[experiment]\ntarget = \"{target_id}\"\nk = 5\nseed = {seed}\n\
         variants = [\"baseline-single\", \"baseline-merged-zeros\", \"kg-binning\", \"kg-links\", \"kg-weighted-avg\"]\n\
         ablation = false\n",
        seed = args.seed,
    );
    atomic_write(&dir.join("pipeline.toml"), pipeline.as_bytes())?;

    note(quiet, format!("wrote synthetic suite ({} datasets) to {}", suite.datasets.len(), dir.display()));
    Ok(())
}

pub fn cmd_build_kg(pipeline: &Pipeline, args: &KgArgs, quiet: bool) -> Result<()> {
    let datasets = pipeline.load_expression()?;
    let mut kg_config = pipeline.kg_config();
    if let Some(encoder) = &args.encoder {
        kg_config.encoder = match encoder.as_str() {
            "links" => genekg::kg::Encoder::Links,
            "binning" => genekg::kg::Encoder::Binning,
            other => bail!("--encoder must be links or binning, got {other:?}"),
        };
    }
    if let Some(pct) = args.binning_percentage {
        if !(pct > 0.0 && pct <= 1.0) {
            bail!("--binning-percentage must be in (0, 1], got {pct}");
        }
        kg_config.binning_percentage = pct;
    }
    if args.no_domain_knowledge {
        kg_config.include_domain_knowledge = false;
    }
    let domain =
        if kg_config.include_domain_knowledge { pipeline.load_domain()? } else { DomainInputs::empty() };

    let refs: Vec<&genekg::ingest::ExpressionDataset> = datasets.iter().collect();
    let (graph, report) = assemble_kg(
        &refs,
        &domain.ontology,
        &domain.annotations,
        &domain.interactions,
        &domain.mapping,
        &kg_config,
    )?;

    let out_dir = pipeline.output_dir();
    let kg_path = args
        .out
        .clone()
        .map(|p| pipeline.resolve(&p))
        .unwrap_or_else(|| out_dir.join("kg.nt"));
    let report_path = args
        .report
        .clone()
        .map(|p| pipeline.resolve(&p))
        .unwrap_or_else(|| out_dir.join("kg_report.txt"));

    let mut buf = Vec::new();
    graph.write_triples(&mut buf)?;
    atomic_write(&kg_path, &buf)?;
    atomic_write(&report_path, report.to_string().as_bytes())?;
    note(quiet, format!("wrote {} triples to {}", report.total_triples, kg_path.display()));
    note(quiet, format!("wrote build report to {}", report_path.display()));
    Ok(())
}

fn load_graph(path: &Path) -> Result<Graph> {
    let reader = open_buffered(path)?;
    Graph::read_triples(reader).map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Walk start entities, taken from the graph's type triples in insertion
/// order so seeded runs are reproducible.
fn start_entities(graph: &Graph, pipeline: &Pipeline, entities: &str) -> Result<Vec<Term>> {
    let ns = pipeline.namespaces();
    let mut out = Vec::new();
    if entities == "patients-and-genes" {
        out.extend(graph.subjects_of(RDF_TYPE, &Term::iri(ns.class_patient())));
    }
    out.extend(graph.subjects_of(RDF_TYPE, &Term::iri(ns.class_gene())));
    if out.is_empty() {
        bail!("the graph contains no walk start entities; was it built with this namespace?");
    }
    Ok(out)
}

pub fn cmd_embed(pipeline: &Pipeline, args: &EmbedArgs, quiet: bool) -> Result<()> {
    let out_dir = pipeline.output_dir();
    let kg_path = args
        .kg
        .clone()
        .map(|p| pipeline.resolve(&p))
        .unwrap_or_else(|| out_dir.join("kg.nt"));
    if !kg_path.is_file() {
        bail!("kg path {} does not exist (run build-kg first)", kg_path.display());
    }
    let graph = load_graph(&kg_path)?;

    let mut walk_config = pipeline.walk_config();
    if let Some(walks) = args.walks {
        walk_config.walks_per_entity = walks;
    }
    if let Some(depth) = args.depth {
        walk_config.max_depth = depth;
    }
    if let Some(seed) = args.walk_seed {
        walk_config.seed = seed;
    }
    let entity_kind = args.walk_entities.clone().unwrap_or(pipeline.file.walk.entities.clone());
    if !matches!(entity_kind.as_str(), "patients-and-genes" | "genes") {
        bail!("--walk-entities must be patients-and-genes or genes, got {entity_kind:?}");
    }
    let entities = start_entities(&graph, pipeline, &entity_kind)?;
    note(quiet, format!("walking from {} entities", entities.len()));
    let corpus = generate_walks(&graph, &entities, &walk_config)?;

    let mut train_config = pipeline.train_config();
    if let Some(dimension) = args.dimension {
        train_config.dimension = dimension;
    }
    if let Some(epochs) = args.epochs {
        train_config.epochs = epochs;
    }
    if let Some(seed) = args.train_seed {
        train_config.seed = seed;
    }
    if let Some(workers) = args.workers {
        train_config.workers = workers;
    }
    let (model, telemetry) = train(&corpus, &train_config)?;
    note(
        quiet,
        format!(
            "trained {} tokens × {} dims; epoch losses {:?}",
            model.vocab().len(),
            model.dimension(),
            telemetry.epoch_mean_loss.iter().map(|l| (l * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );

    let corpus_path = args
        .corpus_out
        .clone()
        .map(|p| pipeline.resolve(&p))
        .unwrap_or_else(|| out_dir.join("corpus.txt"));
    let embeddings_path = args
        .embeddings_out
        .clone()
        .map(|p| pipeline.resolve(&p))
        .unwrap_or_else(|| out_dir.join("embeddings.txt"));
    let mut buf = Vec::new();
    corpus.write(&mut buf)?;
    atomic_write(&corpus_path, &buf)?;
    let mut buf = Vec::new();
    model.write_text(&mut buf)?;
    atomic_write(&embeddings_path, &buf)?;
    note(quiet, format!("wrote {} sentences to {}", corpus.sentences.len(), corpus_path.display()));
    note(quiet, format!("wrote embeddings to {}", embeddings_path.display()));
    Ok(())
}

pub fn cmd_represent(pipeline: &Pipeline, args: &RepresentArgs, quiet: bool) -> Result<()> {
    let out_dir = pipeline.output_dir();
    let embeddings_path = args
        .embeddings
        .clone()
        .map(|p| pipeline.resolve(&p))
        .unwrap_or_else(|| out_dir.join("embeddings.txt"));
    if !embeddings_path.is_file() {
        bail!("embeddings path {} does not exist (run embed first)", embeddings_path.display());
    }
    let model = EmbeddingModel::read_text(open_buffered(&embeddings_path)?)
        .map_err(|e| anyhow!("{}: {e}", embeddings_path.display()))?;
    let datasets = pipeline.load_expression()?;
    let ns = pipeline.namespaces();

    let matrix: PatientMatrix = match args.strategy.as_str() {
        "direct" => {
            let refs: Vec<&genekg::ingest::ExpressionDataset> = datasets.iter().collect();
            direct_representation(&model, &refs, &ns)?
        }
        "weighted-average" => {
            let mut matrix = PatientMatrix::default();
            for dataset in &datasets {
                matrix.append(weighted_average_representation(&model, dataset, &ns)?);
            }
            matrix
        }
        other => bail!("--strategy must be direct or weighted-average, got {other:?}"),
    };

    let out_path = args
        .out
        .clone()
        .map(|p| pipeline.resolve(&p))
        .unwrap_or_else(|| out_dir.join("patients.tsv"));
    let mut buf = Vec::new();
    matrix.write_tsv(&mut buf)?;
    atomic_write(&out_path, &buf)?;
    note(quiet, format!("wrote {} patient vectors to {}", matrix.rows.len(), out_path.display()));
    Ok(())
}

pub fn cmd_experiment(pipeline: &Pipeline, args: &ExperimentArgs, quiet: bool) -> Result<()> {
    let datasets = pipeline.load_expression()?;
    let target_id = pipeline.target_dataset_id();
    let auxiliary_ids: Vec<String> =
        datasets.iter().map(|d| d.id.clone()).filter(|id| *id != target_id).collect();

    let variant_names = match &args.variants {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => pipeline.file.experiment.variants.clone(),
    };
    let mut variants = Vec::new();
    for name in &variant_names {
        variants.push(
            Variant::parse(name).ok_or_else(|| anyhow!("unknown experiment variant {name:?}"))?,
        );
    }
    if variants.is_empty() {
        bail!("no experiment variants selected");
    }

    let include_domain =
        pipeline.file.kg.include_domain_knowledge && !args.no_domain_knowledge;
    let ablation = args.ablation || pipeline.file.experiment.ablation;
    let needs_domain = (include_domain || ablation) && variants.iter().any(Variant::uses_kg);
    let domain = if needs_domain { pipeline.load_domain()? } else { DomainInputs::empty() };

    let mut train_config = pipeline.train_config();
    if let Some(workers) = args.workers {
        train_config.workers = workers;
    }
    let settings = PipelineSettings {
        binning_percentage: pipeline.file.kg.binning_percentage,
        namespaces: pipeline.namespaces(),
        walk: pipeline.walk_config(),
        train: train_config,
        tree: pipeline.tree_params(),
    };
    let inputs = ExperimentInputs {
        datasets: &datasets,
        ontology: &domain.ontology,
        annotations: &domain.annotations,
        interactions: &domain.interactions,
        mapping: &domain.mapping,
        settings,
    };

    let k = args.k.unwrap_or(pipeline.file.experiment.k);
    let seed = args.seed.unwrap_or(pipeline.file.experiment.seed);

    // One run per (variant, domain setting), all over the same folds.
    let mut runs: Vec<(Variant, bool)> = Vec::new();
    for &variant in &variants {
        if variant.uses_kg() {
            if ablation {
                runs.push((variant, true));
                runs.push((variant, false));
            } else {
                runs.push((variant, include_domain));
            }
        } else {
            runs.push((variant, false));
        }
    }

    let mut merged: Option<EvaluationReport> = None;
    for (variant, domain_knowledge) in runs {
        let config = ExperimentConfig {
            target_dataset_id: target_id.clone(),
            auxiliary_dataset_ids: auxiliary_ids.clone(),
            variant,
            include_domain_knowledge: domain_knowledge,
            k,
            seed,
        };
        note(
            quiet,
            format!(
                "running {}{}",
                variant.label(),
                if variant.uses_kg() && !domain_knowledge { " (no domain knowledge)" } else { "" }
            ),
        );
        let report = run_experiment(&config, &inputs)?;
        match merged.as_mut() {
            Some(existing) => existing.merge(report)?,
            None => merged = Some(report),
        }
    }
    let report = merged.expect("at least one run");

    let out_dir = pipeline.output_dir();
    let csv_path = args
        .out_csv
        .clone()
        .map(|p| pipeline.resolve(&p))
        .unwrap_or_else(|| out_dir.join("report.csv"));
    let text_path = args
        .out_report
        .clone()
        .map(|p| pipeline.resolve(&p))
        .unwrap_or_else(|| out_dir.join("report.txt"));
    atomic_write(&csv_path, report.to_csv().as_bytes())?;
    atomic_write(&text_path, report.to_text().as_bytes())?;
    note(quiet, format!("wrote {}", csv_path.display()));
    note(quiet, format!("wrote {}", text_path.display()));
    if !quiet {
        eprint!("{}", report.to_text());
    }
    Ok(())
}
