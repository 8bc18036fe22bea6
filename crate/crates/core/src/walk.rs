//! Random-walk corpus generation over the knowledge graph.
//!
//! Walks respect edge direction and carry edge labels: a sentence alternates
//! node and predicate tokens, `[n0, p0, n1, p1, n2, ...]`. Literal-object
//! edges are never traversed. Each start entity gets its own RNG stream
//! derived from `(seed, entity ordinal)`, so the corpus is identical no
//! matter how entities are scheduled across workers.

use std::io::{self, BufRead, Write};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ns::{decode_segment, encode_segment};
use crate::store::{Graph, Term};

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("start entity {0} is not a node of the graph")]
    UnknownEntity(String),
    #[error("walk config: {0}")]
    BadConfig(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy)]
pub struct WalkConfig {
    pub walks_per_entity: usize,
    /// Maximum number of edges followed per walk.
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self { walks_per_entity: 100, max_depth: 4, seed: 0 }
    }
}

impl WalkConfig {
    fn validate(&self) -> Result<(), WalkError> {
        if self.walks_per_entity == 0 {
            return Err(WalkError::BadConfig("walks_per_entity must be positive"));
        }
        if self.max_depth == 0 {
            return Err(WalkError::BadConfig("max_depth must be positive"));
        }
        Ok(())
    }
}

/// Sentences of alternating node and predicate tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WalkCorpus {
    pub sentences: Vec<Vec<String>>,
}

impl WalkCorpus {
    /// One sentence per line, tokens space-separated; stray whitespace
    /// inside a token is percent-encoded.
    pub fn write(&self, out: &mut impl Write) -> io::Result<()> {
        for sentence in &self.sentences {
            let mut first = true;
            for token in sentence {
                if !first {
                    out.write_all(b" ")?;
                }
                first = false;
                out.write_all(encode_segment(token).as_bytes())?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read(reader: impl BufRead) -> io::Result<Self> {
        let mut sentences = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            sentences.push(line.split(' ').map(decode_segment).collect());
        }
        Ok(Self { sentences })
    }
}

/// Generate `walks_per_entity` forward walks from every start entity.
///
/// A walk starts at its entity token and repeatedly samples uniformly among
/// the current node's outgoing non-literal-object edges, emitting the
/// predicate token and then the target token, until `max_depth` edges are
/// followed or a node has no eligible edge.
pub fn generate_walks(
    graph: &Graph,
    start_entities: &[Term],
    config: &WalkConfig,
) -> Result<WalkCorpus, WalkError> {
    config.validate()?;
    for entity in start_entities {
        if !graph.contains_node(entity) {
            return Err(WalkError::UnknownEntity(entity.to_string()));
        }
    }

    let mut corpus = WalkCorpus::default();
    for (ordinal, entity) in start_entities.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(ordinal as u64);
        for _ in 0..config.walks_per_entity {
            corpus.sentences.push(single_walk(graph, entity, config.max_depth, &mut rng));
        }
    }
    Ok(corpus)
}

fn single_walk(graph: &Graph, start: &Term, max_depth: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut sentence = vec![start.token()];
    let mut current = start.clone();
    for _ in 0..max_depth {
        let eligible: Vec<(&str, &Term)> = graph
            .outgoing(&current)
            .into_iter()
            .filter(|(_, object)| !object.is_literal())
            .collect();
        if eligible.is_empty() {
            break;
        }
        let (predicate, object) = eligible[rng.gen_range(0..eligible.len())];
        sentence.push(predicate.to_string());
        sentence.push(object.token());
        current = object.clone();
    }
    sentence
}

/// Test oracle: a sentence is valid iff it is well-formed (odd length,
/// alternating node/predicate tokens) and every consecutive
/// `(node, predicate, node)` window is a stored triple.
pub fn walk_is_valid(graph: &Graph, sentence: &[String]) -> bool {
    if sentence.is_empty() || sentence.len().is_multiple_of(2) {
        return false;
    }
    for window in sentence.windows(3).step_by(2) {
        let subject = resolve_node_token(&window[0]);
        let object = resolve_node_token(&window[2]);
        if !graph.contains(&subject, &window[1], &object) {
            return false;
        }
    }
    true
}

/// Node tokens are IRI text or `_:bN` blank labels.
fn resolve_node_token(token: &str) -> Term {
    if let Some(rest) = token.strip_prefix("_:b") {
        if let Ok(n) = rest.parse::<u64>() {
            return Term::Blank(n);
        }
    }
    Term::iri(token)
}
