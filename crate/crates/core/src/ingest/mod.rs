//! Parsers for the flat-file inputs: ontology terms (OBO), function
//! annotations (GAF), scored protein interactions (STRING links), the
//! gene→protein id mapping, and tabular expression datasets.
//!
//! Every parser is a pure stream-to-value function and reports failures with
//! the 1-based line they occurred on.

mod expression;
mod gaf;
mod mapping;
mod obo;
mod string_links;

pub mod domain;

pub use expression::{parse_expression_tsv, ExpressionDataset, Label, Sample};
pub use gaf::{parse_gaf, AnnotationRecord, GafParse};
pub use mapping::{parse_id_mapping, IdMapping};
pub use obo::{parse_obo, OntologySource, OntologyTerm};
pub use string_links::{parse_string_links, InteractionRecord, StringLinksParse};

use thiserror::Error;

#[derive(Debug, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}
