//! In-memory representation of a content-specification and of a diagram.
//!
//! Both structures are immutable once loaded. Loading computes every derived
//! relation (inherited property keys, containment closures, connector
//! adjacency) so that the conformance checker and the evaluator only read.

mod diagram;
mod spec;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::flows::Flow;

pub use diagram::{Containment, Diagram};
pub use spec::ContentSpecification;

/// One of the four typed component categories of a diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Element,
    Asset,
    Boundary,
    Connector,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Element,
        Category::Asset,
        Category::Boundary,
        Category::Connector,
    ];

    /// Whether components of this category may carry properties.
    pub fn has_properties(self) -> bool {
        !matches!(self, Category::Boundary)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Element => "element",
            Category::Asset => "asset",
            Category::Boundary => "boundary",
            Category::Connector => "connector",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A reference to a diagram component or to a flow through the diagram.
///
/// The derived ordering sorts by kind first (elements, assets, boundaries,
/// connectors, flows) and then by identifier or flow sequence, which is the
/// canonical order used in match sets and reports.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "RefRepr", try_from = "RefRepr")]
pub enum ComponentRef {
    Element(String),
    Asset(String),
    Boundary(String),
    Connector(String),
    Flow(Flow),
}

impl ComponentRef {
    pub fn of(category: Category, id: impl Into<String>) -> Self {
        let id = id.into();
        match category {
            Category::Element => ComponentRef::Element(id),
            Category::Asset => ComponentRef::Asset(id),
            Category::Boundary => ComponentRef::Boundary(id),
            Category::Connector => ComponentRef::Connector(id),
        }
    }

    /// The category of a plain component, `None` for flows.
    pub fn category(&self) -> Option<Category> {
        match self {
            ComponentRef::Element(_) => Some(Category::Element),
            ComponentRef::Asset(_) => Some(Category::Asset),
            ComponentRef::Boundary(_) => Some(Category::Boundary),
            ComponentRef::Connector(_) => Some(Category::Connector),
            ComponentRef::Flow(_) => None,
        }
    }

    /// The identifier of a plain component, `None` for flows.
    pub fn id(&self) -> Option<&str> {
        match self {
            ComponentRef::Element(id)
            | ComponentRef::Asset(id)
            | ComponentRef::Boundary(id)
            | ComponentRef::Connector(id) => Some(id),
            ComponentRef::Flow(_) => None,
        }
    }

    pub fn kind_str(&self) -> &'static str {
        match self.category() {
            Some(c) => c.as_str(),
            None => "flow",
        }
    }
}

impl fmt::Display for ComponentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentRef::Flow(flow) => write!(f, "{flow}"),
            other => f.write_str(other.id().unwrap_or_default()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RefRepr {
    Element { id: String },
    Asset { id: String },
    Boundary { id: String },
    Connector { id: String },
    Flow { sequence: Vec<String> },
}

impl From<ComponentRef> for RefRepr {
    fn from(r: ComponentRef) -> Self {
        match r {
            ComponentRef::Element(id) => RefRepr::Element { id },
            ComponentRef::Asset(id) => RefRepr::Asset { id },
            ComponentRef::Boundary(id) => RefRepr::Boundary { id },
            ComponentRef::Connector(id) => RefRepr::Connector { id },
            ComponentRef::Flow(flow) => RefRepr::Flow {
                sequence: flow.into_sequence(),
            },
        }
    }
}

impl TryFrom<RefRepr> for ComponentRef {
    type Error = String;

    fn try_from(r: RefRepr) -> Result<Self, Self::Error> {
        Ok(match r {
            RefRepr::Element { id } => ComponentRef::Element(id),
            RefRepr::Asset { id } => ComponentRef::Asset(id),
            RefRepr::Boundary { id } => ComponentRef::Boundary(id),
            RefRepr::Connector { id } => ComponentRef::Connector(id),
            RefRepr::Flow { sequence } => ComponentRef::Flow(Flow::from_sequence(sequence)?),
        })
    }
}

/// Errors raised while building a specification or a diagram, and by the
/// accessor operations when given identifiers they do not know.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("{category} type `{name}` is declared more than once")]
    DuplicateType { category: Category, name: String },
    #[error("{category} type `{name}` names unknown parent `{parent}`")]
    UnknownParentType {
        category: Category,
        name: String,
        parent: String,
    },
    #[error("{category} type `{name}` cannot have sub-types: its parent `{parent}` is itself a sub-type")]
    SubtypeWithChildren {
        category: Category,
        name: String,
        parent: String,
    },
    #[error("{category} type `{name}` references key `{key}` which is not a declared property key")]
    UnknownKeyInEta {
        category: Category,
        name: String,
        key: String,
    },
    #[error("key `{key}` allows value `{value}` which is not a declared property value")]
    UnknownValueInGamma { key: String, value: String },
    #[error("boundary type `{name}` declares property keys; boundaries carry no properties")]
    BoundaryTypeWithKeys { name: String },
    #[error("identifier must not be empty")]
    EmptyId,
    #[error("identifier `{id}` is used by more than one component")]
    DuplicateId { id: String },
    #[error("connector `{connector}` references missing element `{element}`")]
    DanglingEndpoint { connector: String, element: String },
    #[error("`{id}` references unknown {expected} `{target}`")]
    UnknownReference {
        id: String,
        expected: &'static str,
        target: String,
    },
    #[error("`{id}` lists more than one direct {relation} parent")]
    MultipleParents { id: String, relation: Containment },
    #[error("{relation} containment through `{id}` is cyclic")]
    CyclicContainment { id: String, relation: Containment },
    #[error("unknown {category} type `{name}`")]
    UnknownType { category: Category, name: String },
    #[error("{category} types carry no property keys")]
    NoProperties { category: Category },
    #[error("unknown component `{id}`")]
    UnknownComponent { id: String },
}

impl ModelError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::DuplicateType { .. } => "DUPLICATE_TYPE",
            ModelError::UnknownParentType { .. } => "UNKNOWN_PARENT_TYPE",
            ModelError::SubtypeWithChildren { .. } => "SUBTYPE_WITH_CHILDREN",
            ModelError::UnknownKeyInEta { .. } => "UNKNOWN_KEY_IN_ETA",
            ModelError::UnknownValueInGamma { .. } => "UNKNOWN_VALUE_IN_GAMMA",
            ModelError::BoundaryTypeWithKeys { .. } => "BOUNDARY_TYPE_WITH_KEYS",
            ModelError::EmptyId => "EMPTY_ID",
            ModelError::DuplicateId { .. } => "DUPLICATE_ID",
            ModelError::DanglingEndpoint { .. } => "DANGLING_ENDPOINT",
            ModelError::UnknownReference { .. } => "UNKNOWN_REFERENCE",
            ModelError::MultipleParents { .. } => "MULTIPLE_PARENTS",
            ModelError::CyclicContainment { .. } => "CYCLIC_CONTAINMENT",
            ModelError::UnknownType { .. } => "UNKNOWN_TYPE",
            ModelError::NoProperties { .. } => "NO_PROPERTIES",
            ModelError::UnknownComponent { .. } => "UNKNOWN_COMPONENT",
        }
    }
}
