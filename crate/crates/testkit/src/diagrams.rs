//! Random diagrams.

use std::collections::BTreeMap;

use adfd_core::io::{AssetEntry, BoundaryEntry, ConnectorEntry, ElementEntry, ModelDocument};
use adfd_core::{Category, ContentSpecification, Diagram};
use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;

/// A bare directed multigraph: `nodes` elements `n1..`, up to `max_edges`
/// connectors `r1..` between random endpoints (self-loops and parallel
/// connectors included). Types are placeholders; no specification applies.
pub fn random_digraph(rng: &mut impl Rng, max_nodes: usize, max_edges: usize) -> Diagram {
    let nodes = rng.gen_range(1..=max_nodes);
    let edges = rng.gen_range(0..=max_edges);
    let mut doc = ModelDocument::default();
    for i in 1..=nodes {
        doc.elements.push(element(format!("n{i}"), "Node"));
    }
    for i in 1..=edges {
        doc.connectors.push(ConnectorEntry {
            id: format!("r{i}"),
            type_name: "Link".into(),
            source: format!("n{}", rng.gen_range(1..=nodes)),
            target: format!("n{}", rng.gen_range(1..=nodes)),
            properties: BTreeMap::new(),
        });
    }
    Diagram::from_document(&doc).expect("generated digraph loads")
}

fn element(id: String, type_name: &str) -> ElementEntry {
    ElementEntry {
        id,
        type_name: type_name.into(),
        parent: Vec::new(),
        boundary: Vec::new(),
        properties: BTreeMap::new(),
    }
}

/// Size limits for [`random_conforming`].
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub elements: usize,
    pub connectors: usize,
    pub assets: usize,
    pub boundaries: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            elements: 6,
            connectors: 8,
            assets: 3,
            boundaries: 2,
        }
    }
}

fn random_type(rng: &mut impl Rng, spec: &ContentSpecification, category: Category) -> String {
    spec.types(category)
        .choose(rng)
        .expect("specification declares types of every category")
        .to_owned()
}

fn random_properties(
    rng: &mut impl Rng,
    spec: &ContentSpecification,
    category: Category,
    type_name: &str,
) -> BTreeMap<String, String> {
    let keys = spec.effective_keys(category, type_name).expect("known type");
    let mut out = BTreeMap::new();
    for k in keys {
        if !rng.gen_bool(0.6) {
            continue;
        }
        if let Some(v) = spec.value_domain(k).and_then(|d| d.iter().choose(rng)) {
            out.insert(k.clone(), v.clone());
        }
    }
    out
}

/// A random diagram that conforms to `spec`.
///
/// Element nesting and boundary nesting are forests (parents always come
/// earlier in id order), so containment is acyclic by construction.
pub fn random_conforming(
    rng: &mut impl Rng,
    spec: &ContentSpecification,
    limits: Limits,
) -> Diagram {
    let mut doc = ModelDocument::default();
    let boundaries = rng.gen_range(0..=limits.boundaries);
    for i in 1..=boundaries {
        let parent = if i > 1 && rng.gen_bool(0.4) {
            vec![format!("a{}", rng.gen_range(1..i))]
        } else {
            Vec::new()
        };
        doc.boundaries.push(BoundaryEntry {
            id: format!("a{i}"),
            type_name: random_type(rng, spec, Category::Boundary),
            parent,
            properties: BTreeMap::new(),
        });
    }
    let elements = rng.gen_range(1..=limits.elements);
    for i in 1..=elements {
        let type_name = random_type(rng, spec, Category::Element);
        let mut e = element(format!("n{i}"), &type_name);
        e.properties = random_properties(rng, spec, Category::Element, &type_name);
        if i > 1 && rng.gen_bool(0.3) {
            e.parent = vec![format!("n{}", rng.gen_range(1..i))];
        }
        if boundaries > 0 && rng.gen_bool(0.6) {
            e.boundary = vec![format!("a{}", rng.gen_range(1..=boundaries))];
        }
        doc.elements.push(e);
    }
    let connectors = if elements >= 2 {
        rng.gen_range(0..=limits.connectors)
    } else {
        0
    };
    for i in 1..=connectors {
        let type_name = random_type(rng, spec, Category::Connector);
        doc.connectors.push(ConnectorEntry {
            id: format!("r{i}"),
            properties: random_properties(rng, spec, Category::Connector, &type_name),
            type_name,
            source: format!("n{}", rng.gen_range(1..=elements)),
            target: format!("n{}", rng.gen_range(1..=elements)),
        });
    }
    let holders: Vec<String> = doc
        .elements
        .iter()
        .map(|e| e.id.clone())
        .chain(doc.connectors.iter().map(|c| c.id.clone()))
        .collect();
    for i in 1..=rng.gen_range(0..=limits.assets) {
        let type_name = random_type(rng, spec, Category::Asset);
        let n = rng.gen_range(0..=holders.len().min(4));
        doc.assets.push(AssetEntry {
            id: format!("y{i}"),
            properties: random_properties(rng, spec, Category::Asset, &type_name),
            type_name,
            held_by: holders.choose_multiple(rng, n).cloned().collect(),
        });
    }
    let d = Diagram::from_document(&doc).expect("generated diagram loads");
    debug_assert!(adfd_core::validate_diagram(&d, spec).is_empty());
    d
}
