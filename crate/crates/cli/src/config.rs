//! Pipeline configuration: a TOML file with one section per stage, every
//! field optional except the expression inputs. Relative paths resolve
//! against the config file's directory so a generated suite is portable.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use genekg::embed::TrainConfig;
use genekg::eval::TreeParams;
use genekg::ingest::{
    parse_expression_tsv, parse_gaf, parse_id_mapping, parse_obo, parse_string_links,
    AnnotationRecord, ExpressionDataset, IdMapping, InteractionRecord, OntologySource,
};
use genekg::kg::{Encoder, KgBuildConfig};
use genekg::ns::Namespaces;
use genekg::walk::WalkConfig;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub inputs: InputsSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub kg: KgSection,
    #[serde(default)]
    pub walk: WalkSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub tree: TreeSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsSection {
    pub expression: Vec<ExpressionEntry>,
    pub obo: Option<PathBuf>,
    pub gaf: Option<PathBuf>,
    pub string_links: Option<PathBuf>,
    pub mapping: Option<PathBuf>,
    #[serde(default = "default_min_score")]
    pub min_score: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpressionEntry {
    pub id: String,
    pub path: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KgSection {
    #[serde(default = "default_encoder")]
    pub encoder: String,
    #[serde(default = "default_binning_percentage")]
    pub binning_percentage: f64,
    #[serde(default = "default_true")]
    pub include_domain_knowledge: bool,
    #[serde(default = "default_namespace")]
    pub namespace: String,
}

impl Default for KgSection {
    fn default() -> Self {
        Self {
            encoder: default_encoder(),
            binning_percentage: default_binning_percentage(),
            include_domain_knowledge: true,
            namespace: default_namespace(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSection {
    #[serde(default = "default_walks")]
    pub walks_per_entity: usize,
    #[serde(default = "default_depth")]
    pub max_depth: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_entities")]
    pub entities: String,
}

impl Default for WalkSection {
    fn default() -> Self {
        Self {
            walks_per_entity: default_walks(),
            max_depth: default_depth(),
            seed: 0,
            entities: default_entities(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_negatives")]
    pub negatives: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default)]
    pub min_count: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            dimension: default_dimension(),
            window: default_window(),
            negatives: default_negatives(),
            epochs: default_epochs(),
            learning_rate: default_learning_rate(),
            min_count: 0,
            seed: 0,
            workers: default_workers(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSection {
    /// Unset means unlimited depth.
    pub max_depth: Option<usize>,
    #[serde(default = "default_min_samples_split")]
    pub min_samples_split: usize,
}

impl Default for TreeSection {
    fn default() -> Self {
        Self { max_depth: None, min_samples_split: default_min_samples_split() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Defaults to the first expression entry.
    pub target: Option<String>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_variants")]
    pub variants: Vec<String>,
    /// Run every KG variant with and without domain knowledge.
    #[serde(default)]
    pub ablation: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self { target: None, k: default_k(), seed: 0, variants: default_variants(), ablation: false }
    }
}

fn default_min_score() -> u32 {
    700
}
fn default_encoder() -> String {
    "links".to_string()
}
fn default_binning_percentage() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}
fn default_namespace() -> String {
    genekg::ns::DEFAULT_PREFIX.to_string()
}
fn default_walks() -> usize {
    100
}
fn default_depth() -> usize {
    4
}
fn default_entities() -> String {
    "patients-and-genes".to_string()
}
fn default_dimension() -> usize {
    100
}
fn default_window() -> usize {
    5
}
fn default_negatives() -> usize {
    5
}
fn default_epochs() -> usize {
    5
}
fn default_learning_rate() -> f64 {
    0.025
}
fn default_workers() -> usize {
    1
}
fn default_min_samples_split() -> usize {
    2
}
fn default_k() -> usize {
    5
}
fn default_variants() -> Vec<String> {
    genekg::eval::Variant::all().iter().map(|v| v.label().to_string()).collect()
}

/// A parsed config with paths resolved against the config file location.
pub struct Pipeline {
    pub file: FileConfig,
    pub base_dir: PathBuf,
}

impl Pipeline {
    pub fn load(config_path: &Path) -> Result<Self> {
        let text = fs::read_to_string(config_path)
            .with_context(|| format!("cannot read config {}", config_path.display()))?;
        let file: FileConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", config_path.display()))?;
        let base_dir = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let pipeline = Self { file, base_dir };
        pipeline.validate()?;
        Ok(pipeline)
    }

    fn validate(&self) -> Result<()> {
        if self.file.inputs.expression.is_empty() {
            bail!("config needs at least one [[inputs.expression]] entry");
        }
        let mut ids = std::collections::HashSet::new();
        for entry in &self.file.inputs.expression {
            if !ids.insert(&entry.id) {
                bail!("duplicate expression dataset id {:?}", entry.id);
            }
        }
        let kg = &self.file.kg;
        if parse_encoder(&kg.encoder).is_none() {
            bail!("kg.encoder must be \"links\" or \"binning\", got {:?}", kg.encoder);
        }
        if !(kg.binning_percentage > 0.0 && kg.binning_percentage <= 1.0) {
            bail!("kg.binning_percentage must be in (0, 1], got {}", kg.binning_percentage);
        }
        let walk = &self.file.walk;
        if walk.walks_per_entity == 0 || walk.max_depth == 0 {
            bail!("walk.walks_per_entity and walk.max_depth must be positive");
        }
        if !matches!(walk.entities.as_str(), "patients-and-genes" | "genes") {
            bail!("walk.entities must be \"patients-and-genes\" or \"genes\", got {:?}", walk.entities);
        }
        let train = &self.file.train;
        if train.dimension < 2 {
            bail!("train.dimension must be at least 2");
        }
        if train.window == 0 || train.workers == 0 {
            bail!("train.window and train.workers must be positive");
        }
        if train.learning_rate <= 0.0 {
            bail!("train.learning_rate must be positive");
        }
        if self.file.tree.min_samples_split < 2 {
            bail!("tree.min_samples_split must be at least 2");
        }
        if self.file.tree.max_depth == Some(0) {
            bail!("tree.max_depth must be positive when set");
        }
        if self.file.experiment.k < 2 {
            bail!("experiment.k must be at least 2");
        }
        for name in &self.file.experiment.variants {
            if genekg::eval::Variant::parse(name).is_none() {
                bail!("unknown experiment variant {:?}", name);
            }
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        match &self.file.output.dir {
            Some(dir) => self.resolve(dir),
            None => self.base_dir.clone(),
        }
    }

    pub fn namespaces(&self) -> Namespaces {
        Namespaces::new(self.file.kg.namespace.clone())
    }

    pub fn kg_config(&self) -> KgBuildConfig {
        KgBuildConfig {
            encoder: parse_encoder(&self.file.kg.encoder).expect("validated"),
            binning_percentage: self.file.kg.binning_percentage,
            include_domain_knowledge: self.file.kg.include_domain_knowledge,
            namespaces: self.namespaces(),
        }
    }

    pub fn walk_config(&self) -> WalkConfig {
        WalkConfig {
            walks_per_entity: self.file.walk.walks_per_entity,
            max_depth: self.file.walk.max_depth,
            seed: self.file.walk.seed,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.file.train;
        TrainConfig {
            dimension: t.dimension,
            window: t.window,
            negatives: t.negatives,
            epochs: t.epochs,
            learning_rate: t.learning_rate,
            min_count: t.min_count,
            seed: t.seed,
            workers: t.workers,
        }
    }

    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.file.tree.max_depth,
            min_samples_split: self.file.tree.min_samples_split,
            seed: 0,
        }
    }

    pub fn target_dataset_id(&self) -> String {
        self.file
            .experiment
            .target
            .clone()
            .unwrap_or_else(|| self.file.inputs.expression[0].id.clone())
    }

    /// Check that a referenced input path exists before any work starts.
    fn require(&self, label: &str, path: &Path) -> Result<PathBuf> {
        let resolved = self.resolve(path);
        if !resolved.is_file() {
            bail!("{label} path {} does not exist", resolved.display());
        }
        Ok(resolved)
    }

    pub fn load_expression(&self) -> Result<Vec<ExpressionDataset>> {
        let mut datasets = Vec::new();
        for entry in &self.file.inputs.expression {
            let path = self.require("expression", &entry.path)?;
            let reader = open_buffered(&path)?;
            let dataset = parse_expression_tsv(reader, &entry.id)
                .map_err(|e| anyhow!("{}: {e}", path.display()))?;
            datasets.push(dataset);
        }
        Ok(datasets)
    }

    /// Load ontology, annotations, interactions, and the id mapping.
    pub fn load_domain(&self) -> Result<DomainInputs> {
        let section = &self.file.inputs;
        let obo = section
            .obo
            .as_ref()
            .ok_or_else(|| anyhow!("config is missing inputs.obo (required with domain knowledge)"))?;
        let gaf = section
            .gaf
            .as_ref()
            .ok_or_else(|| anyhow!("config is missing inputs.gaf (required with domain knowledge)"))?;
        let links = section.string_links.as_ref().ok_or_else(|| {
            anyhow!("config is missing inputs.string_links (required with domain knowledge)")
        })?;
        let mapping = section.mapping.as_ref().ok_or_else(|| {
            anyhow!("config is missing inputs.mapping (required with domain knowledge)")
        })?;

        let obo_path = self.require("obo", obo)?;
        let gaf_path = self.require("gaf", gaf)?;
        let links_path = self.require("string_links", links)?;
        let mapping_path = self.require("mapping", mapping)?;

        let ontology = parse_obo(open_buffered(&obo_path)?)
            .map_err(|e| anyhow!("{}: {e}", obo_path.display()))?;
        let gaf_parse = parse_gaf(open_buffered(&gaf_path)?)
            .map_err(|e| anyhow!("{}: {e}", gaf_path.display()))?;
        let links_parse = parse_string_links(open_buffered(&links_path)?, section.min_score)
            .map_err(|e| anyhow!("{}: {e}", links_path.display()))?;
        let mapping = parse_id_mapping(open_buffered(&mapping_path)?)
            .map_err(|e| anyhow!("{}: {e}", mapping_path.display()))?;
        Ok(DomainInputs {
            ontology,
            annotations: gaf_parse.records,
            interactions: links_parse.records,
            mapping,
        })
    }
}

pub struct DomainInputs {
    pub ontology: OntologySource,
    pub annotations: Vec<AnnotationRecord>,
    pub interactions: Vec<InteractionRecord>,
    pub mapping: IdMapping,
}

impl DomainInputs {
    pub fn empty() -> Self {
        Self {
            ontology: OntologySource::default(),
            annotations: Vec::new(),
            interactions: Vec::new(),
            mapping: IdMapping::default(),
        }
    }
}

fn parse_encoder(text: &str) -> Option<Encoder> {
    match text {
        "links" => Some(Encoder::Links),
        "binning" => Some(Encoder::Binning),
        _ => None,
    }
}

pub fn open_buffered(path: &Path) -> Result<std::io::BufReader<fs::File>> {
    let file =
        fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(std::io::BufReader::new(file))
}
