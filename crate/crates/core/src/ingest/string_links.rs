//! STRING-style protein interaction links with a combined-score threshold.

use std::io::BufRead;

use super::ParseError;

/// One scored undirected interaction; `a != b` always holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionRecord {
    pub protein_a: String,
    pub protein_b: String,
    pub score: u32,
}

#[derive(Debug, Clone, Default)]
pub struct StringLinksParse {
    pub records: Vec<InteractionRecord>,
    pub below_threshold: usize,
    pub self_links_skipped: usize,
}

/// Parse whitespace-separated `protein1 protein2 combined_score` rows,
/// keeping records with `score >= min_score`. A header row is detected by a
/// non-numeric third field and skipped. Self-links are dropped and counted.
pub fn parse_string_links(
    reader: impl BufRead,
    min_score: u32,
) -> Result<StringLinksParse, ParseError> {
    let mut out = StringLinksParse::default();
    let mut first_data_row = true;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| ParseError::new(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(ParseError::new(
                lineno,
                format!("expected 3 whitespace-separated fields, found {}", fields.len()),
            ));
        }
        if first_data_row && fields[2].parse::<u32>().is_err() {
            first_data_row = false;
            continue; // header
        }
        first_data_row = false;
        let score: u32 = fields[2].parse().map_err(|_| {
            ParseError::new(lineno, format!("combined score must be an integer, found {:?}", fields[2]))
        })?;
        if score > 1000 {
            return Err(ParseError::new(lineno, format!("combined score {score} exceeds 1000")));
        }
        if fields[0] == fields[1] {
            out.self_links_skipped += 1;
            continue;
        }
        if score < min_score {
            out.below_threshold += 1;
            continue;
        }
        out.records.push(InteractionRecord {
            protein_a: fields[0].to_string(),
            protein_b: fields[1].to_string(),
            score,
        });
    }
    Ok(out)
}
