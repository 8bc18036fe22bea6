//! OBO flat-file parsing, restricted to `[Term]` stanzas.

use std::collections::HashSet;
use std::io::BufRead;

use super::ParseError;

/// One non-obsolete ontology term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyTerm {
    pub id: String,
    pub name: String,
    /// `is_a` targets.
    pub parents: Vec<String>,
    /// `relationship: <rel> <target>` pairs, e.g. `("part_of", "GO:0000001")`.
    pub relations: Vec<(String, String)>,
}

/// Parsed ontology with skip/drop counters.
#[derive(Debug, Clone, Default)]
pub struct OntologySource {
    pub terms: Vec<OntologyTerm>,
    /// `is_obsolete: true` stanzas skipped.
    pub obsolete_skipped: usize,
    /// Parent or relationship targets that did not resolve within the file.
    pub dropped_references: usize,
}

impl OntologySource {
    pub fn warnings(&self) -> usize {
        self.dropped_references
    }
}

struct Stanza {
    start_line: usize,
    id: Option<String>,
    name: String,
    parents: Vec<String>,
    relations: Vec<(String, String)>,
    obsolete: bool,
}

impl Stanza {
    fn new(start_line: usize) -> Self {
        Self {
            start_line,
            id: None,
            name: String::new(),
            parents: Vec::new(),
            relations: Vec::new(),
            obsolete: false,
        }
    }
}

/// Parse an OBO stream. Only `[Term]` stanzas are interpreted; obsolete
/// terms are skipped and counted; parent and relationship references that
/// don't resolve within the file are dropped and counted.
pub fn parse_obo(reader: impl BufRead) -> Result<OntologySource, ParseError> {
    let mut raw_terms: Vec<Stanza> = Vec::new();
    let mut current: Option<Stanza> = None;
    let mut in_term_stanza = false;

    let finish =
        |stanza: Option<Stanza>, raw_terms: &mut Vec<Stanza>| -> Result<(), ParseError> {
            if let Some(stanza) = stanza {
                if stanza.id.is_none() {
                    return Err(ParseError::new(
                        stanza.start_line,
                        "[Term] stanza missing required id: line",
                    ));
                }
                raw_terms.push(stanza);
            }
            Ok(())
        };

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| ParseError::new(lineno, e.to_string()))?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            finish(current.take(), &mut raw_terms)?;
            in_term_stanza = line == "[Term]";
            if in_term_stanza {
                current = Some(Stanza::new(lineno));
            }
            continue;
        }
        if !in_term_stanza {
            continue; // header lines and foreign stanzas ([Typedef], ...)
        }
        let Some(stanza) = current.as_mut() else { continue };
        let Some((tag, value)) = line.split_once(':') else {
            return Err(ParseError::new(lineno, format!("expected tag: value, found {line:?}")));
        };
        // Trailing "! comment" text is not part of the value.
        let value = value.split(" ! ").next().unwrap_or(value).trim();
        match tag.trim() {
            "id" => stanza.id = Some(value.to_string()),
            "name" => stanza.name = value.to_string(),
            "is_a" => stanza.parents.push(value.to_string()),
            "is_obsolete" => stanza.obsolete = value == "true",
            "relationship" => {
                let mut parts = value.split_whitespace();
                match (parts.next(), parts.next()) {
                    (Some(rel), Some(target)) => {
                        stanza.relations.push((rel.to_string(), target.to_string()));
                    }
                    _ => {
                        return Err(ParseError::new(
                            lineno,
                            format!("relationship needs a type and a target, found {value:?}"),
                        ))
                    }
                }
            }
            _ => {} // def:, synonym:, xref:, ... are irrelevant here
        }
    }
    finish(current.take(), &mut raw_terms)?;

    let mut source = OntologySource::default();
    let mut seen: HashSet<String> = HashSet::new();
    let mut kept_ids: HashSet<String> = HashSet::new();
    for stanza in &raw_terms {
        let id = stanza.id.clone().expect("checked in finish");
        if !seen.insert(id.clone()) {
            return Err(ParseError::new(stanza.start_line, format!("duplicate term id {id:?}")));
        }
        if stanza.obsolete {
            source.obsolete_skipped += 1;
        } else {
            kept_ids.insert(id);
        }
    }

    for stanza in raw_terms {
        if stanza.obsolete {
            continue;
        }
        let mut term = OntologyTerm {
            id: stanza.id.expect("checked in finish"),
            name: stanza.name,
            parents: stanza.parents,
            relations: stanza.relations,
        };
        term.parents.retain(|p| {
            let ok = kept_ids.contains(p);
            if !ok {
                source.dropped_references += 1;
            }
            ok
        });
        term.relations.retain(|(_, t)| {
            let ok = kept_ids.contains(t);
            if !ok {
                source.dropped_references += 1;
            }
            ok
        });
        source.terms.push(term);
    }
    Ok(source)
}
