//! JSON file formats for specifications, models and rule catalogs.
//!
//! The schemas for these documents live in `schemas/` at the repository root.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog::Rule;
use crate::model::{Category, ContentSpecification, Diagram, ModelError};

/// A parse or structural failure while loading one of the input documents.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("malformed document: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{}: {}", .0.code(), .0)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    #[serde(default)]
    pub element_types: Vec<TypeEntry>,
    #[serde(default)]
    pub asset_types: Vec<TypeEntry>,
    #[serde(default)]
    pub boundary_types: Vec<TypeEntry>,
    #[serde(default)]
    pub connector_types: Vec<TypeEntry>,
    /// Declared value universe; derived from `properties` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property_values: Option<Vec<String>>,
    /// Property key to its allowed values.
    #[serde(default)]
    pub properties: BTreeMap<String, Vec<String>>,
}

impl SpecDocument {
    pub fn entries(&self, category: Category) -> &[TypeEntry] {
        match category {
            Category::Element => &self.element_types,
            Category::Asset => &self.asset_types,
            Category::Boundary => &self.boundary_types,
            Category::Connector => &self.connector_types,
        }
    }

    pub fn entries_mut(&mut self, category: Category) -> &mut Vec<TypeEntry> {
        match category {
            Category::Element => &mut self.element_types,
            Category::Asset => &mut self.asset_types,
            Category::Boundary => &mut self.boundary_types,
            Category::Connector => &mut self.connector_types,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keys: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(default)]
    pub elements: Vec<ElementEntry>,
    #[serde(default)]
    pub boundaries: Vec<BoundaryEntry>,
    #[serde(default)]
    pub connectors: Vec<ConnectorEntry>,
    #[serde(default)]
    pub assets: Vec<AssetEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementEntry {
    pub id: String,
    #[serde(rename = "type")]
    pub type_name: String,
    /// Direct element parent. A list is accepted so that multiple parents
    /// can be reported rather than silently dropped.
    #[serde(default, skip_serializing_if = "Vec::is_empty", with = "one_or_many")]
    pub parent: Vec<String>,
    /// Direct enclosing boundary.
    #[serde(default, skip_serializing_if = "Vec::is_empty", with = "one_or_many")]
    pub boundary: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryEntry {
    pub id: String,
    #[serde(rename = "type")]
    pub type_name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty", with = "one_or_many")]
    pub parent: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectorEntry {
    pub id: String,
    #[serde(rename = "type")]
    pub type_name: String,
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetEntry {
    pub id: String,
    #[serde(rename = "type")]
    pub type_name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub held_by: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogDocument {
    pub rules: Vec<Rule>,
}

mod one_or_many {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        One(String),
        Many(Vec<String>),
    }

    pub fn serialize<S: Serializer>(v: &[String], s: S) -> Result<S::Ok, S::Error> {
        match v {
            [one] => s.serialize_str(one),
            many => many.serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::One(s) => vec![s],
            Repr::Many(v) => v,
        })
    }
}

pub fn parse_spec(text: &str) -> Result<ContentSpecification, LoadError> {
    let doc: SpecDocument = serde_json::from_str(text)?;
    Ok(ContentSpecification::from_document(&doc)?)
}

pub fn parse_model(text: &str) -> Result<Diagram, LoadError> {
    let doc: ModelDocument = serde_json::from_str(text)?;
    Ok(Diagram::from_document(&doc)?)
}

pub fn parse_catalog_document(text: &str) -> Result<CatalogDocument, serde_json::Error> {
    serde_json::from_str(text)
}

/// Pretty JSON with a trailing newline, the canonical on-disk form.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("document serialization");
    out.push('\n');
    out
}
