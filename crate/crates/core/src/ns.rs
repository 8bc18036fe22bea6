//! IRI construction for every entity and relation the pipeline emits.
//!
//! All graph vocabulary is derived from a single configurable prefix so that
//! builds against different namespaces never collide. Identifiers taken from
//! input files (gene ids, sample ids, ontology ids) are percent-encoded on
//! the way in, which keeps every IRI free of whitespace and angle brackets
//! and makes the triple and corpus text formats unambiguous.

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";

pub const DEFAULT_PREFIX: &str = "http://example.org/kg/";

/// Characters that must never appear raw inside an IRI or walk token.
const RESERVED: &[char] = &[' ', '\t', '\n', '\r', '<', '>', '"', '%'];

/// Percent-encode the reserved characters of an identifier segment.
pub fn encode_segment(raw: &str) -> String {
    if !raw.contains(RESERVED) {
        return raw.to_string();
    }
    let mut out = String::with_capacity(raw.len() + 8);
    for ch in raw.chars() {
        if RESERVED.contains(&ch) {
            let mut buf = [0u8; 4];
            for byte in ch.encode_utf8(&mut buf).bytes() {
                out.push('%');
                out.push_str(&format!("{byte:02X}"));
            }
        } else {
            out.push(ch);
        }
    }
    out
}

/// Inverse of [`encode_segment`]. Invalid escapes are kept verbatim.
pub fn decode_segment(encoded: &str) -> String {
    let bytes = encoded.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            if let Some(hex) = bytes.get(i + 1..i + 3).and_then(|h| std::str::from_utf8(h).ok()) {
                if let Ok(byte) = u8::from_str_radix(hex, 16) {
                    out.push(byte);
                    i += 3;
                    continue;
                }
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

/// Namespace under which all pipeline IRIs are minted.
#[derive(Debug, Clone)]
pub struct Namespaces {
    prefix: String,
}

impl Default for Namespaces {
    fn default() -> Self {
        Self::new(DEFAULT_PREFIX)
    }
}

impl Namespaces {
    pub fn new(prefix: impl Into<String>) -> Self {
        Self { prefix: prefix.into() }
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    // Class IRIs.
    pub fn class_patient(&self) -> String {
        format!("{}Patient", self.prefix)
    }
    pub fn class_gene(&self) -> String {
        format!("{}Gene", self.prefix)
    }
    pub fn class_protein(&self) -> String {
        format!("{}Protein", self.prefix)
    }
    pub fn class_go(&self) -> String {
        format!("{}GOClass", self.prefix)
    }

    // Relation IRIs.
    pub fn has_expression(&self) -> String {
        format!("{}hasExpression", self.prefix)
    }
    pub fn is_expression_of_gene(&self) -> String {
        format!("{}isExpressionOfGene", self.prefix)
    }
    pub fn has_value(&self) -> String {
        format!("{}hasValue", self.prefix)
    }
    pub fn overexpresses(&self) -> String {
        format!("{}overexpresses", self.prefix)
    }
    pub fn has_function(&self) -> String {
        format!("{}hasFunction", self.prefix)
    }
    pub fn interacts_with(&self) -> String {
        format!("{}interactsWith", self.prefix)
    }
    pub fn mapped_to(&self) -> String {
        format!("{}mappedTo", self.prefix)
    }

    /// Ontology relationship types other than subclassing (e.g. `part_of`).
    pub fn relation(&self, name: &str) -> String {
        format!("{}relation/{}", self.prefix, encode_segment(name))
    }

    // Entity IRIs.
    pub fn patient(&self, dataset_id: &str, sample_id: &str) -> String {
        format!(
            "{}patient/{}/{}",
            self.prefix,
            encode_segment(dataset_id),
            encode_segment(sample_id)
        )
    }
    pub fn gene(&self, gene_id: &str) -> String {
        format!("{}gene/{}", self.prefix, encode_segment(gene_id))
    }
    pub fn protein(&self, protein_id: &str) -> String {
        format!("{}protein/{}", self.prefix, encode_segment(protein_id))
    }
    pub fn go_class(&self, go_id: &str) -> String {
        format!("{}go/{}", self.prefix, encode_segment(go_id))
    }
    pub fn bin(&self, dataset_id: &str, gene_id: &str, index: usize) -> String {
        format!(
            "{}bin/{}/{}/{}",
            self.prefix,
            encode_segment(dataset_id),
            encode_segment(gene_id),
            index
        )
    }

    /// Recover a gene id from a gene IRI of this namespace, if it is one.
    pub fn gene_id_of(&self, iri: &str) -> Option<String> {
        let rest = iri.strip_prefix(&self.prefix)?.strip_prefix("gene/")?;
        Some(decode_segment(rest))
    }
}
