//! GAF 2.x annotation parsing: protein → ontology-class assignments.

use std::io::BufRead;

use super::ParseError;

/// One positive function annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub protein_id: String,
    pub go_id: String,
    pub qualifier: String,
}

#[derive(Debug, Clone, Default)]
pub struct GafParse {
    pub records: Vec<AnnotationRecord>,
    /// Rows excluded because their qualifier negates the annotation.
    pub negated_skipped: usize,
}

/// Parse tab-separated GAF rows: protein id in column 2, qualifier in
/// column 4, ontology id in column 5 (1-based). `!`-prefixed lines are
/// comments. Rows whose qualifier includes `NOT` are excluded and counted.
pub fn parse_gaf(reader: impl BufRead) -> Result<GafParse, ParseError> {
    let mut out = GafParse::default();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| ParseError::new(lineno, e.to_string()))?;
        if line.starts_with('!') || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 5 {
            return Err(ParseError::new(
                lineno,
                format!("expected at least 5 tab-separated columns, found {}", cols.len()),
            ));
        }
        let protein_id = cols[1].trim();
        let qualifier = cols[3].trim();
        let go_id = cols[4].trim();
        if protein_id.is_empty() {
            return Err(ParseError::new(lineno, "empty protein id in column 2"));
        }
        if go_id.is_empty() {
            return Err(ParseError::new(lineno, "empty ontology id in column 5"));
        }
        if qualifier.split('|').any(|part| part == "NOT") {
            out.negated_skipped += 1;
            continue;
        }
        out.records.push(AnnotationRecord {
            protein_id: protein_id.to_string(),
            go_id: go_id.to_string(),
            qualifier: qualifier.to_string(),
        });
    }
    Ok(out)
}
