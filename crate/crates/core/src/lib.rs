//! Gene-expression knowledge graphs for patient-level disease prediction.
//!
//! The pipeline has three stages:
//!
//! 1. **Build a knowledge graph** that merges any number of gene-expression
//!    studies (tabular samples × genes data) with biomedical domain knowledge:
//!    an ontology of protein functions, function annotations, and scored
//!    protein-protein interactions. Expression values enter the graph either
//!    through binned value nodes or through patient→gene over-expression
//!    links ([`kg`]).
//! 2. **Learn vector representations** by running direction- and type-aware
//!    random walks over the graph ([`walk`]) and training a skip-gram
//!    negative-sampling model over the walk corpus ([`embed`]). Patients are
//!    represented either by their own node embedding or by an
//!    expression-weighted average of gene embeddings ([`repr`]).
//! 3. **Evaluate a decision-tree classifier** under an enrichment
//!    cross-validation protocol where test folds come only from a target
//!    study while auxiliary studies enrich every training split ([`eval`]).
//!
//! [`synth`] generates deterministic multi-study test fixtures with a
//! plantable class signal; the `genekg` CLI wires the stages together.

pub mod embed;
pub mod eval;
pub mod ingest;
pub mod kg;
pub mod ns;
pub mod repr;
pub mod store;
pub mod synth;
pub mod walk;

pub use store::{Graph, Term, Triple};
