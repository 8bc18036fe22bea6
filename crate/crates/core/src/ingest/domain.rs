//! Turns parsed domain-knowledge sources into graph triples.

use crate::ns::{Namespaces, RDFS_SUBCLASS_OF, RDF_TYPE};
use crate::store::{Term, Triple};

use super::{AnnotationRecord, InteractionRecord, OntologySource};

/// Emit the domain-knowledge triples:
///
/// * every ontology term is typed as a GO class and linked to its parents
///   via `rdfs:subClassOf`, typed relationships become predicate IRIs;
/// * every annotation types its protein and links it to the class via
///   `hasFunction`;
/// * every interaction is emitted in both directions plus type triples for
///   both endpoints.
///
/// Duplicates in the output list are deliberate; the store deduplicates.
pub fn domain_triples(
    ontology: &OntologySource,
    annotations: &[AnnotationRecord],
    interactions: &[InteractionRecord],
    ns: &Namespaces,
) -> Vec<Triple> {
    let go_class = ns.class_go();
    let protein_class = ns.class_protein();
    let has_function = ns.has_function();
    let interacts_with = ns.interacts_with();

    let mut triples = Vec::new();
    for term in &ontology.terms {
        let subject = Term::iri(ns.go_class(&term.id));
        triples.push(Triple::new(subject.clone(), RDF_TYPE, Term::iri(&go_class)));
        for parent in &term.parents {
            triples.push(Triple::new(
                subject.clone(),
                RDFS_SUBCLASS_OF,
                Term::iri(ns.go_class(parent)),
            ));
        }
        for (rel, target) in &term.relations {
            triples.push(Triple::new(
                subject.clone(),
                ns.relation(rel),
                Term::iri(ns.go_class(target)),
            ));
        }
    }
    for ann in annotations {
        let protein = Term::iri(ns.protein(&ann.protein_id));
        triples.push(Triple::new(
            protein.clone(),
            has_function.clone(),
            Term::iri(ns.go_class(&ann.go_id)),
        ));
        triples.push(Triple::new(protein, RDF_TYPE, Term::iri(&protein_class)));
    }
    for link in interactions {
        let a = Term::iri(ns.protein(&link.protein_a));
        let b = Term::iri(ns.protein(&link.protein_b));
        triples.push(Triple::new(a.clone(), interacts_with.clone(), b.clone()));
        triples.push(Triple::new(b.clone(), interacts_with.clone(), a.clone()));
        triples.push(Triple::new(a, RDF_TYPE, Term::iri(&protein_class)));
        triples.push(Triple::new(b, RDF_TYPE, Term::iri(&protein_class)));
    }
    triples
}
