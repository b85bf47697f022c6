//! Checks that a diagram only uses what its specification allows.

use crate::model::{Category, ComponentRef, ContentSpecification, Diagram};
use crate::violation::{Code, Subject, Violation};

/// All conformance violations of `diagram` against `spec`, sorted.
///
/// An empty result means the diagram conforms. Warnings are not included,
/// see [`unheld_assets`].
pub fn validate_diagram(diagram: &Diagram, spec: &ContentSpecification) -> Vec<Violation> {
    let mut out = validate_cardinality(diagram);
    for category in Category::ALL {
        for id in diagram.ids(category) {
            check_component(diagram, spec, category, id, &mut out);
        }
    }
    out.sort();
    out
}

/// The three cardinality conditions only.
pub fn validate_cardinality(diagram: &Diagram) -> Vec<Violation> {
    let elements = diagram.count(Category::Element);
    let connectors = diagram.count(Category::Connector);
    let assets = diagram.count(Category::Asset);
    let mut out = Vec::new();
    if elements == 0 {
        out.push(Violation::error(
            Code::EmptyDiagram,
            Subject::Diagram,
            "non-empty",
            "the diagram contains no element".into(),
        ));
    }
    if connectors > 0 && elements < 2 {
        out.push(Violation::error(
            Code::ConnectorNeedsTwoElements,
            Subject::Diagram,
            "connector-cardinality",
            format!("{connectors} connector(s) but only {elements} element(s)"),
        ));
    }
    // Written as the condition reads; an asset always counts itself.
    if assets > 0 && !(elements >= 1 || assets >= 1) {
        out.push(Violation::error(
            Code::AssetNeedsHolder,
            Subject::Diagram,
            "asset-cardinality",
            "assets present but nothing can hold them".into(),
        ));
    }
    out
}

/// Assets that no element or connector holds. Reported as warnings: they do
/// not break conformance.
pub fn unheld_assets(diagram: &Diagram) -> Vec<Violation> {
    let held: std::collections::BTreeSet<&str> = diagram
        .asset_links()
        .iter()
        .map(|(_, asset)| asset.as_str())
        .collect();
    diagram
        .assets()
        .filter(|a| !held.contains(a))
        .map(|a| {
            Violation::warning(
                Code::UnheldAsset,
                Subject::Component(ComponentRef::Asset(a.to_owned())),
                "asset-held",
                format!("asset `{a}` is not held by any element or connector"),
            )
        })
        .collect()
}

fn check_component(
    diagram: &Diagram,
    spec: &ContentSpecification,
    category: Category,
    id: &str,
    out: &mut Vec<Violation>,
) {
    let subject = || Subject::Component(ComponentRef::of(category, id));
    let type_name = diagram.type_of(category, id).unwrap_or_default();
    if !spec.has_type(category, type_name) {
        out.push(Violation::error(
            Code::UnknownType,
            subject(),
            type_condition(category),
            format!("{category} `{id}` has type `{type_name}` which is not a {category} type"),
        ));
        return;
    }
    let allowed = spec.effective_keys(category, type_name).ok();
    for (key, value) in diagram.properties_of(id) {
        if !allowed.is_some_and(|keys| keys.contains(key)) {
            out.push(Violation::error(
                Code::KeyNotAllowed,
                subject(),
                key_condition(category),
                format!("key `{key}` is not allowed on {category} type `{type_name}`"),
            ));
        }
        if let Some(domain) = spec.value_domain(key) {
            if !domain.contains(value) {
                out.push(Violation::error(
                    Code::ValueNotInDomain,
                    subject(),
                    "property-values",
                    format!("value `{value}` is not allowed for key `{key}`"),
                ));
            }
        }
    }
}

fn type_condition(category: Category) -> &'static str {
    match category {
        Category::Element => "element-type",
        Category::Asset => "asset-type",
        Category::Boundary => "boundary-type",
        Category::Connector => "connector-type",
    }
}

fn key_condition(category: Category) -> &'static str {
    match category {
        Category::Element => "element-keys",
        Category::Asset => "asset-keys",
        Category::Boundary => "boundary-keys",
        Category::Connector => "connector-keys",
    }
}
