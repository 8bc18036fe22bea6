//! Two-column gene→protein id mapping (the offline stand-in for an online
//! id-mapping service). A gene may map to several proteins.

use std::collections::HashMap;
use std::io::BufRead;

use super::ParseError;

/// Case-sensitive multimap from gene id to protein ids, in file order.
#[derive(Debug, Clone, Default)]
pub struct IdMapping {
    map: HashMap<String, Vec<String>>,
}

impl IdMapping {
    pub fn proteins_for(&self, gene_id: &str) -> Option<&[String]> {
        self.map.get(gene_id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Parse tab-separated `gene-id<TAB>protein-id` rows.
pub fn parse_id_mapping(reader: impl BufRead) -> Result<IdMapping, ParseError> {
    let mut mapping = IdMapping::default();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| ParseError::new(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 || cols[0].trim().is_empty() || cols[1].trim().is_empty() {
            return Err(ParseError::new(lineno, "expected exactly 2 non-empty tab-separated columns"));
        }
        mapping
            .map
            .entry(cols[0].trim().to_string())
            .or_default()
            .push(cols[1].trim().to_string());
    }
    Ok(mapping)
}
