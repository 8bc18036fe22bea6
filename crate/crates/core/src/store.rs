//! In-memory directed labeled multigraph of RDF-style triples.
//!
//! Terms are interned to integer ids; each subject keeps an
//! insertion-ordered adjacency list so seeded walks are reproducible. After
//! the build phase the graph is immutable and can be shared freely across
//! reader threads.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("literal {0:?} is not allowed in subject position")]
    LiteralSubject(String),
    #[error("IRI text must be non-empty")]
    EmptyIri,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A node or literal of the graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Blank(u64),
    Literal(String),
}

impl Term {
    pub fn iri(text: impl Into<String>) -> Self {
        Term::Iri(text.into())
    }

    pub fn literal(text: impl Into<String>) -> Self {
        Term::Literal(text.into())
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    /// Bare token text used in walk corpora: IRI text, `_:bN`, or the
    /// literal's lexical form.
    pub fn token(&self) -> String {
        match self {
            Term::Iri(t) => t.clone(),
            Term::Blank(n) => format!("_:b{n}"),
            Term::Literal(t) => t.clone(),
        }
    }

    /// Serialized form: angle-bracketed IRI, `_:bN`, or quoted literal.
    fn write_nt(&self, out: &mut impl Write) -> io::Result<()> {
        match self {
            Term::Iri(t) => write!(out, "<{t}>"),
            Term::Blank(n) => write!(out, "_:b{n}"),
            Term::Literal(t) => {
                out.write_all(b"\"")?;
                for ch in t.chars() {
                    match ch {
                        '\\' => out.write_all(b"\\\\")?,
                        '"' => out.write_all(b"\\\"")?,
                        '\n' => out.write_all(b"\\n")?,
                        '\r' => out.write_all(b"\\r")?,
                        '\t' => out.write_all(b"\\t")?,
                        _ => write!(out, "{ch}")?,
                    }
                }
                out.write_all(b"\"")
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(t) => write!(f, "<{t}>"),
            Term::Blank(n) => write!(f, "_:b{n}"),
            Term::Literal(t) => write!(f, "{t:?}"),
        }
    }
}

/// One directed labeled edge. The predicate is always an IRI.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: impl Into<String>, object: Term) -> Self {
        Self { subject, predicate: predicate.into(), object }
    }
}

type TermId = u32;

/// Interned triple store with an outgoing-edge index.
#[derive(Debug, Default)]
pub struct Graph {
    terms: Vec<Term>,
    term_ids: HashMap<Term, TermId>,
    /// Insertion-ordered triples, also the serialization order.
    triples: Vec<(TermId, TermId, TermId)>,
    triple_set: HashSet<(TermId, TermId, TermId)>,
    out: HashMap<TermId, Vec<(TermId, TermId)>>,
    predicates: HashSet<TermId>,
    nodes: HashSet<TermId>,
    next_blank: u64,
}

/// Size counters kept exactly in sync with the triple set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStats {
    pub triples: usize,
    pub predicates: usize,
    pub nodes: usize,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, term: Term) -> TermId {
        if let Some(&id) = self.term_ids.get(&term) {
            return id;
        }
        let id = self.terms.len() as TermId;
        self.terms.push(term.clone());
        self.term_ids.insert(term, id);
        id
    }

    fn id_of(&self, term: &Term) -> Option<TermId> {
        self.term_ids.get(term).copied()
    }

    /// Insert a triple; returns `true` iff it was not present before.
    pub fn insert(&mut self, triple: Triple) -> Result<bool, StoreError> {
        match &triple.subject {
            Term::Literal(text) => return Err(StoreError::LiteralSubject(text.clone())),
            Term::Iri(text) if text.is_empty() => return Err(StoreError::EmptyIri),
            _ => {}
        }
        if triple.predicate.is_empty() {
            return Err(StoreError::EmptyIri);
        }
        if let Term::Iri(text) = &triple.object {
            if text.is_empty() {
                return Err(StoreError::EmptyIri);
            }
        }

        let s = self.intern(triple.subject);
        let p = self.intern(Term::Iri(triple.predicate));
        let o = self.intern(triple.object);
        if !self.triple_set.insert((s, p, o)) {
            return Ok(false);
        }
        self.triples.push((s, p, o));
        self.out.entry(s).or_default().push((p, o));
        self.predicates.insert(p);
        self.nodes.insert(s);
        self.nodes.insert(o);
        Ok(true)
    }

    /// A blank node with a local id never handed out by this graph before.
    pub fn fresh_blank(&mut self) -> Term {
        let id = self.next_blank;
        self.next_blank += 1;
        Term::Blank(id)
    }

    /// Outgoing `(predicate, object)` pairs of a term, in insertion order.
    /// Unknown terms yield an empty list.
    pub fn outgoing(&self, term: &Term) -> Vec<(&str, &Term)> {
        let Some(id) = self.id_of(term) else { return Vec::new() };
        self.out
            .get(&id)
            .map(|edges| {
                edges
                    .iter()
                    .map(|&(p, o)| {
                        let Term::Iri(pred) = &self.terms[p as usize] else {
                            unreachable!("predicates are always interned as IRIs")
                        };
                        (pred.as_str(), &self.terms[o as usize])
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn contains(&self, subject: &Term, predicate: &str, object: &Term) -> bool {
        let (Some(s), Some(p), Some(o)) = (
            self.id_of(subject),
            self.id_of(&Term::Iri(predicate.to_string())),
            self.id_of(object),
        ) else {
            return false;
        };
        self.triple_set.contains(&(s, p, o))
    }

    pub fn contains_node(&self, term: &Term) -> bool {
        self.id_of(term).is_some_and(|id| self.nodes.contains(&id))
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            triples: self.triples.len(),
            predicates: self.predicates.len(),
            nodes: self.nodes.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// All triples in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.triples.iter().map(|&(s, p, o)| {
            let Term::Iri(pred) = &self.terms[p as usize] else {
                unreachable!("predicates are always interned as IRIs")
            };
            Triple {
                subject: self.terms[s as usize].clone(),
                predicate: pred.clone(),
                object: self.terms[o as usize].clone(),
            }
        })
    }

    /// Subjects of `(s, predicate, object)` triples, in insertion order.
    pub fn subjects_of(&self, predicate: &str, object: &Term) -> Vec<Term> {
        let (Some(p), Some(o)) = (self.id_of(&Term::Iri(predicate.to_string())), self.id_of(object))
        else {
            return Vec::new();
        };
        self.triples
            .iter()
            .filter(|&&(_, tp, to)| tp == p && to == o)
            .map(|&(s, _, _)| self.terms[s as usize].clone())
            .collect()
    }

    /// Write the line-based triple text format: one `<s> <p> <o> .` per line.
    pub fn write_triples(&self, out: &mut impl Write) -> io::Result<()> {
        for (s, p, o) in &self.triples {
            self.terms[*s as usize].write_nt(out)?;
            out.write_all(b" ")?;
            self.terms[*p as usize].write_nt(out)?;
            out.write_all(b" ")?;
            self.terms[*o as usize].write_nt(out)?;
            out.write_all(b" .\n")?;
        }
        Ok(())
    }

    /// Parse the line-based triple text format produced by [`write_triples`].
    ///
    /// Blank-node labels are preserved, and the blank counter resumes past
    /// the highest label so later `fresh_blank` calls stay unique.
    pub fn read_triples(reader: impl BufRead) -> Result<Self, StoreError> {
        let mut graph = Graph::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (subject, rest) = parse_term(trimmed, lineno)?;
            let (pred_term, rest) = parse_term(rest, lineno)?;
            let Term::Iri(predicate) = pred_term else {
                return Err(StoreError::Parse {
                    line: lineno,
                    message: "predicate must be an IRI".into(),
                });
            };
            let (object, rest) = parse_term(rest, lineno)?;
            if rest.trim() != "." {
                return Err(StoreError::Parse {
                    line: lineno,
                    message: format!("expected terminating '.', found {:?}", rest.trim()),
                });
            }
            if let Term::Blank(n) = subject {
                graph.next_blank = graph.next_blank.max(n + 1);
            }
            if let Term::Blank(n) = object {
                graph.next_blank = graph.next_blank.max(n + 1);
            }
            graph.insert(Triple::new(subject, predicate, object))?;
        }
        Ok(graph)
    }
}

/// Parse one term off the front of `input`, returning it and the remainder.
fn parse_term(input: &str, lineno: usize) -> Result<(Term, &str), StoreError> {
    let input = input.trim_start();
    let err = |message: String| StoreError::Parse { line: lineno, message };
    if let Some(rest) = input.strip_prefix('<') {
        let end = rest
            .find('>')
            .ok_or_else(|| err("unterminated IRI".into()))?;
        return Ok((Term::Iri(rest[..end].to_string()), &rest[end + 1..]));
    }
    if let Some(rest) = input.strip_prefix("_:b") {
        let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        let n: u64 = rest[..end]
            .parse()
            .map_err(|_| err("blank node label must be _:b<number>".into()))?;
        return Ok((Term::Blank(n), &rest[end..]));
    }
    if let Some(rest) = input.strip_prefix('"') {
        let mut value = String::new();
        let mut chars = rest.char_indices();
        while let Some((i, ch)) = chars.next() {
            match ch {
                '"' => return Ok((Term::Literal(value), &rest[i + 1..])),
                '\\' => match chars.next() {
                    Some((_, 'n')) => value.push('\n'),
                    Some((_, 'r')) => value.push('\r'),
                    Some((_, 't')) => value.push('\t'),
                    Some((_, c)) => value.push(c),
                    None => return Err(err("dangling escape in literal".into())),
                },
                _ => value.push(ch),
            }
        }
        return Err(err("unterminated literal".into()));
    }
    Err(err(format!("unrecognized term at {:?}", input.chars().take(20).collect::<String>())))
}
