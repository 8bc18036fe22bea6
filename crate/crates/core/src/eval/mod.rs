//! Classifier, metrics, and the enrichment cross-validation protocol.

mod experiment;
mod folds;
mod metrics;
mod tree;

pub use experiment::{
    merged_zero_features, run_experiment, EvaluationReport, ExperimentConfig, ExperimentInputs,
    MergedFeatureSpace, PipelineSettings, Variant, VariantReport,
};
pub use folds::stratified_kfold;
pub use metrics::{compute_metrics, Metrics};
pub use tree::{fit_tree, gini, DecisionTree, TreeParams};

use thiserror::Error;

use crate::embed::EmbedError;
use crate::kg::KgError;
use crate::repr::ReprError;
use crate::walk::WalkError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("input is empty")]
    EmptyInput,
    #[error("lengths differ: {left} labels vs {right} values")]
    LengthMismatch { left: usize, right: usize },
    #[error("class counts must not both be zero")]
    EmptyNode,
    #[error("both classes must be present, found only {0}")]
    SingleClass(&'static str),
    #[error("dimension mismatch: tree was fit on {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("fold configuration: {0}")]
    BadFolds(String),
    #[error("experiment configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Repr(#[from] ReprError),
}
