use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Category, ComponentRef, ModelError};
use crate::io::{AssetEntry, BoundaryEntry, ConnectorEntry, ElementEntry, ModelDocument};

/// The two containment relations of a diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Containment {
    /// Element nested in element.
    Element,
    /// Boundary enclosing a boundary or an element.
    Boundary,
}

impl fmt::Display for Containment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Containment::Element => "element",
            Containment::Boundary => "boundary",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Endpoints {
    source: String,
    target: String,
}

/// A loaded diagram.
///
/// Identifiers are unique across all four component categories. Containment
/// is stored as direct parent links together with the transitive closure of
/// each relation, keyed `(container, inner)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagram {
    types: [BTreeMap<String, String>; 4],
    kinds: BTreeMap<String, Category>,
    endpoints: BTreeMap<String, Endpoints>,
    properties: BTreeMap<String, BTreeMap<String, String>>,
    element_parent: BTreeMap<String, String>,
    boundary_parent: BTreeMap<String, String>,
    element_closure: BTreeSet<(String, String)>,
    boundary_closure: BTreeSet<(String, String)>,
    holds: BTreeSet<(String, String)>,
    outgoing: BTreeMap<String, Vec<String>>,
    incoming: BTreeMap<String, Vec<String>>,
}

impl Diagram {
    /// Builds a diagram from its parsed document.
    ///
    /// Only structure is checked here (identifiers, endpoints, containment
    /// shape). Types, keys and values are checked against a specification by
    /// [`crate::conformance::validate_diagram`].
    pub fn from_document(doc: &ModelDocument) -> Result<Self, ModelError> {
        let mut d = Diagram::default();

        let register = |d: &mut Diagram, category: Category, id: &str, ty: &str| {
            if id.is_empty() {
                return Err(ModelError::EmptyId);
            }
            if d.kinds.insert(id.to_owned(), category).is_some() {
                return Err(ModelError::DuplicateId { id: id.to_owned() });
            }
            d.types[category.index()].insert(id.to_owned(), ty.to_owned());
            Ok(())
        };

        for e in &doc.elements {
            register(&mut d, Category::Element, &e.id, &e.type_name)?;
            d.store_properties(&e.id, &e.properties);
        }
        for b in &doc.boundaries {
            register(&mut d, Category::Boundary, &b.id, &b.type_name)?;
            d.store_properties(&b.id, &b.properties);
        }
        for c in &doc.connectors {
            register(&mut d, Category::Connector, &c.id, &c.type_name)?;
            d.store_properties(&c.id, &c.properties);
        }
        for a in &doc.assets {
            register(&mut d, Category::Asset, &a.id, &a.type_name)?;
            d.store_properties(&a.id, &a.properties);
        }

        for c in &doc.connectors {
            for end in [&c.source, &c.target] {
                if d.kind_of(end) != Some(Category::Element) {
                    return Err(ModelError::DanglingEndpoint {
                        connector: c.id.clone(),
                        element: end.clone(),
                    });
                }
            }
            d.endpoints.insert(
                c.id.clone(),
                Endpoints {
                    source: c.source.clone(),
                    target: c.target.clone(),
                },
            );
            d.outgoing.entry(c.source.clone()).or_default().push(c.id.clone());
            d.incoming.entry(c.target.clone()).or_default().push(c.id.clone());
        }
        for list in d.outgoing.values_mut().chain(d.incoming.values_mut()) {
            list.sort();
        }

        for e in &doc.elements {
            if let Some(parent) = single_parent(&e.id, &e.parent, Containment::Element)? {
                d.expect_kind(&e.id, parent, Category::Element, "element")?;
                d.element_parent.insert(e.id.clone(), parent.clone());
            }
            if let Some(parent) = single_parent(&e.id, &e.boundary, Containment::Boundary)? {
                d.expect_kind(&e.id, parent, Category::Boundary, "boundary")?;
                d.boundary_parent.insert(e.id.clone(), parent.clone());
            }
        }
        for b in &doc.boundaries {
            if let Some(parent) = single_parent(&b.id, &b.parent, Containment::Boundary)? {
                d.expect_kind(&b.id, parent, Category::Boundary, "boundary")?;
                d.boundary_parent.insert(b.id.clone(), parent.clone());
            }
        }

        for a in &doc.assets {
            for holder in &a.held_by {
                match d.kind_of(holder) {
                    Some(Category::Element | Category::Connector) => {
                        d.holds.insert((holder.clone(), a.id.clone()));
                    }
                    _ => {
                        return Err(ModelError::UnknownReference {
                            id: a.id.clone(),
                            expected: "element or connector",
                            target: holder.clone(),
                        })
                    }
                }
            }
        }

        d.element_closure = closure(&d.element_parent, Containment::Element)?;
        d.boundary_closure = closure(&d.boundary_parent, Containment::Boundary)?;
        Ok(d)
    }

    /// Inverse of [`Diagram::from_document`], components sorted by id.
    pub fn to_document(&self) -> ModelDocument {
        let props = |id: &str| self.properties.get(id).cloned().unwrap_or_default();
        let parent_of = |map: &BTreeMap<String, String>, id: &str| {
            map.get(id).map(|p| vec![p.clone()]).unwrap_or_default()
        };
        ModelDocument {
            elements: self
                .ids(Category::Element)
                .map(|id| ElementEntry {
                    id: id.to_owned(),
                    type_name: self.types[Category::Element.index()][id].clone(),
                    parent: parent_of(&self.element_parent, id),
                    boundary: parent_of(&self.boundary_parent, id),
                    properties: props(id),
                })
                .collect(),
            boundaries: self
                .ids(Category::Boundary)
                .map(|id| BoundaryEntry {
                    id: id.to_owned(),
                    type_name: self.types[Category::Boundary.index()][id].clone(),
                    parent: parent_of(&self.boundary_parent, id),
                    properties: props(id),
                })
                .collect(),
            connectors: self
                .ids(Category::Connector)
                .map(|id| ConnectorEntry {
                    id: id.to_owned(),
                    type_name: self.types[Category::Connector.index()][id].clone(),
                    source: self.endpoints[id].source.clone(),
                    target: self.endpoints[id].target.clone(),
                    properties: props(id),
                })
                .collect(),
            assets: self
                .ids(Category::Asset)
                .map(|id| AssetEntry {
                    id: id.to_owned(),
                    type_name: self.types[Category::Asset.index()][id].clone(),
                    properties: props(id),
                    held_by: self
                        .holds
                        .iter()
                        .filter(|(_, asset)| asset == id)
                        .map(|(holder, _)| holder.clone())
                        .collect(),
                })
                .collect(),
        }
    }

    fn store_properties(&mut self, id: &str, props: &BTreeMap<String, String>) {
        if !props.is_empty() {
            self.properties.insert(id.to_owned(), props.clone());
        }
    }

    fn expect_kind(
        &self,
        id: &str,
        target: &str,
        category: Category,
        expected: &'static str,
    ) -> Result<(), ModelError> {
        if self.kind_of(target) == Some(category) {
            Ok(())
        } else {
            Err(ModelError::UnknownReference {
                id: id.to_owned(),
                expected,
                target: target.to_owned(),
            })
        }
    }

    /// Identifiers of one category in ascending order.
    pub fn ids(&self, category: Category) -> impl Iterator<Item = &str> + '_ {
        self.types[category.index()].keys().map(String::as_str)
    }

    pub fn elements(&self) -> impl Iterator<Item = &str> + '_ {
        self.ids(Category::Element)
    }

    pub fn assets(&self) -> impl Iterator<Item = &str> + '_ {
        self.ids(Category::Asset)
    }

    pub fn boundaries(&self) -> impl Iterator<Item = &str> + '_ {
        self.ids(Category::Boundary)
    }

    pub fn connectors(&self) -> impl Iterator<Item = &str> + '_ {
        self.ids(Category::Connector)
    }

    pub fn count(&self, category: Category) -> usize {
        self.types[category.index()].len()
    }

    pub fn kind_of(&self, id: &str) -> Option<Category> {
        self.kinds.get(id).copied()
    }

    pub fn component_ref(&self, id: &str) -> Option<ComponentRef> {
        self.kind_of(id).map(|c| ComponentRef::of(c, id))
    }

    /// The assigned type of a component of the given category.
    pub fn type_of(&self, category: Category, id: &str) -> Option<&str> {
        self.types[category.index()].get(id).map(String::as_str)
    }

    pub fn source(&self, connector: &str) -> Option<&str> {
        self.endpoints.get(connector).map(|e| e.source.as_str())
    }

    pub fn target(&self, connector: &str) -> Option<&str> {
        self.endpoints.get(connector).map(|e| e.target.as_str())
    }

    /// Connectors leaving `element`, sorted by id.
    pub fn outgoing(&self, element: &str) -> &[String] {
        self.outgoing.get(element).map_or(&[], Vec::as_slice)
    }

    /// Connectors entering `element`, sorted by id.
    pub fn incoming(&self, element: &str) -> &[String] {
        self.incoming.get(element).map_or(&[], Vec::as_slice)
    }

    /// The value assigned to `key` on a component, `Ok(None)` when unset.
    pub fn property_value(&self, id: &str, key: &str) -> Result<Option<&str>, ModelError> {
        match self.kind_of(id) {
            Some(Category::Element | Category::Asset | Category::Connector) => Ok(self
                .properties
                .get(id)
                .and_then(|p| p.get(key))
                .map(String::as_str)),
            _ => Err(ModelError::UnknownComponent { id: id.to_owned() }),
        }
    }

    /// Every property assigned to a component (boundaries included, so that
    /// conformance can flag them).
    pub fn properties_of(&self, id: &str) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.properties
            .get(id)
            .into_iter()
            .flatten()
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Membership in the transitive closure of a containment relation.
    pub fn contains(
        &self,
        relation: Containment,
        container: &str,
        inner: &str,
    ) -> Result<bool, ModelError> {
        let unknown = |id: &str| ModelError::UnknownComponent { id: id.to_owned() };
        match relation {
            Containment::Element => {
                if self.kind_of(container) != Some(Category::Element) {
                    return Err(unknown(container));
                }
                if self.kind_of(inner) != Some(Category::Element) {
                    return Err(unknown(inner));
                }
            }
            Containment::Boundary => {
                if self.kind_of(container) != Some(Category::Boundary) {
                    return Err(unknown(container));
                }
                if !matches!(
                    self.kind_of(inner),
                    Some(Category::Element | Category::Boundary)
                ) {
                    return Err(unknown(inner));
                }
            }
        }
        Ok(self.in_closure(relation, container, inner))
    }

    /// Unchecked closure lookup; unknown ids are simply not related.
    pub fn in_closure(&self, relation: Containment, container: &str, inner: &str) -> bool {
        let set = match relation {
            Containment::Element => &self.element_closure,
            Containment::Boundary => &self.boundary_closure,
        };
        set.contains(&(container.to_owned(), inner.to_owned()))
    }

    /// The closure pairs `(container, inner)` of a containment relation.
    pub fn closure(&self, relation: Containment) -> &BTreeSet<(String, String)> {
        match relation {
            Containment::Element => &self.element_closure,
            Containment::Boundary => &self.boundary_closure,
        }
    }

    /// The direct parent of `id` in a containment relation.
    pub fn direct_parent(&self, relation: Containment, id: &str) -> Option<&str> {
        let map = match relation {
            Containment::Element => &self.element_parent,
            Containment::Boundary => &self.boundary_parent,
        };
        map.get(id).map(String::as_str)
    }

    pub fn holds_asset(&self, holder: &str, asset: &str) -> Result<bool, ModelError> {
        if !matches!(
            self.kind_of(holder),
            Some(Category::Element | Category::Connector)
        ) {
            return Err(ModelError::UnknownComponent {
                id: holder.to_owned(),
            });
        }
        if self.kind_of(asset) != Some(Category::Asset) {
            return Err(ModelError::UnknownComponent {
                id: asset.to_owned(),
            });
        }
        Ok(self.holds.contains(&(holder.to_owned(), asset.to_owned())))
    }

    /// All `(holder, asset)` pairs.
    pub fn asset_links(&self) -> &BTreeSet<(String, String)> {
        &self.holds
    }
}

fn single_parent<'a>(
    id: &str,
    parents: &'a [String],
    relation: Containment,
) -> Result<Option<&'a String>, ModelError> {
    match parents {
        [] => Ok(None),
        [one] => Ok(Some(one)),
        _ => Err(ModelError::MultipleParents {
            id: id.to_owned(),
            relation,
        }),
    }
}

/// Transitive closure of a parent forest given as child -> parent links.
fn closure(
    parent: &BTreeMap<String, String>,
    relation: Containment,
) -> Result<BTreeSet<(String, String)>, ModelError> {
    let mut pairs = BTreeSet::new();
    for child in parent.keys() {
        let mut seen = BTreeSet::from([child.as_str()]);
        let mut cursor = parent.get(child);
        while let Some(ancestor) = cursor {
            if !seen.insert(ancestor.as_str()) {
                return Err(ModelError::CyclicContainment {
                    id: child.clone(),
                    relation,
                });
            }
            pairs.insert((ancestor.clone(), child.clone()));
            cursor = parent.get(ancestor);
        }
    }
    Ok(pairs)
}
