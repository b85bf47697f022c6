use std::collections::{BTreeMap, BTreeSet};

use super::{Category, ModelError};
use crate::io::{SpecDocument, TypeEntry};

static EMPTY: BTreeSet<String> = BTreeSet::new();

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct TypeInfo {
    parent: Option<String>,
    declared_keys: BTreeSet<String>,
    effective_keys: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct TypeTable {
    types: BTreeMap<String, TypeInfo>,
    /// Top-type to sub-types. Defined exactly for the top-level types.
    hierarchy: BTreeMap<String, BTreeSet<String>>,
}

/// The stencil universe a diagram and a rule are checked against.
///
/// Holds the four type sets with their two-level hierarchies, the property
/// keys assigned to each type, and the value domain of each key. Sub-types
/// carry the keys of their top-type in addition to their own.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContentSpecification {
    tables: [TypeTable; 4],
    keys: BTreeSet<String>,
    values: BTreeSet<String>,
    domains: BTreeMap<String, BTreeSet<String>>,
}

impl ContentSpecification {
    /// Builds a specification from its parsed document, enforcing the
    /// two-level hierarchy and the closure of keys and values.
    pub fn from_document(doc: &SpecDocument) -> Result<Self, ModelError> {
        let keys: BTreeSet<String> = doc.properties.keys().cloned().collect();
        let values: BTreeSet<String> = match &doc.property_values {
            Some(values) => values.iter().cloned().collect(),
            None => doc.properties.values().flatten().cloned().collect(),
        };
        let mut domains = BTreeMap::new();
        for (key, allowed) in &doc.properties {
            if let Some(value) = allowed.iter().find(|v| !values.contains(*v)) {
                return Err(ModelError::UnknownValueInGamma {
                    key: key.clone(),
                    value: value.clone(),
                });
            }
            domains.insert(key.clone(), allowed.iter().cloned().collect());
        }

        let mut spec = ContentSpecification {
            tables: Default::default(),
            keys,
            values,
            domains,
        };
        for category in Category::ALL {
            let entries = doc.entries(category);
            spec.tables[category.index()] = build_table(category, entries, &spec.keys)?;
        }
        Ok(spec)
    }

    /// Inverse of [`ContentSpecification::from_document`]; entries are
    /// listed top-types first, then sub-types, each group sorted by name.
    pub fn to_document(&self) -> SpecDocument {
        let mut doc = SpecDocument {
            property_values: Some(self.values.iter().cloned().collect()),
            properties: self
                .domains
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
                .collect(),
            ..SpecDocument::default()
        };
        for category in Category::ALL {
            let table = self.table(category);
            let mut entries: Vec<TypeEntry> = table
                .types
                .iter()
                .map(|(name, info)| TypeEntry {
                    name: name.clone(),
                    parent: info.parent.clone(),
                    keys: info.declared_keys.iter().cloned().collect(),
                })
                .collect();
            entries.sort_by_key(|e| e.parent.is_some());
            *doc.entries_mut(category) = entries;
        }
        doc
    }

    fn table(&self, category: Category) -> &TypeTable {
        &self.tables[category.index()]
    }

    fn info(&self, category: Category, name: &str) -> Result<&TypeInfo, ModelError> {
        self.table(category)
            .types
            .get(name)
            .ok_or_else(|| ModelError::UnknownType {
                category,
                name: name.to_owned(),
            })
    }

    pub fn types(&self, category: Category) -> impl Iterator<Item = &str> + '_ {
        self.table(category).types.keys().map(String::as_str)
    }

    pub fn has_type(&self, category: Category, name: &str) -> bool {
        self.table(category).types.contains_key(name)
    }

    /// The raw hierarchy function: `Some` for top-types (possibly empty),
    /// `None` for sub-types and unknown names.
    pub fn hierarchy(&self, category: Category, name: &str) -> Option<&BTreeSet<String>> {
        self.table(category).hierarchy.get(name)
    }

    /// Sub-types of `name`; empty for sub-types themselves.
    pub fn effective_subtypes(
        &self,
        category: Category,
        name: &str,
    ) -> Result<&BTreeSet<String>, ModelError> {
        self.info(category, name)?;
        Ok(self.hierarchy(category, name).unwrap_or(&EMPTY))
    }

    /// The top-type of a sub-type, `None` for top-types and unknown names.
    pub fn top_type(&self, category: Category, name: &str) -> Option<&str> {
        self.table(category)
            .types
            .get(name)
            .and_then(|info| info.parent.as_deref())
    }

    /// True when a component typed `actual` satisfies a type filter naming
    /// `wanted`: same type, or a sub-type of it.
    pub fn type_matches(&self, category: Category, actual: &str, wanted: &str) -> bool {
        actual == wanted
            || self
                .hierarchy(category, wanted)
                .is_some_and(|subs| subs.contains(actual))
    }

    /// Keys declared directly on the type, without inheritance.
    pub fn declared_keys(
        &self,
        category: Category,
        name: &str,
    ) -> Result<&BTreeSet<String>, ModelError> {
        if !category.has_properties() {
            return Err(ModelError::NoProperties { category });
        }
        Ok(&self.info(category, name)?.declared_keys)
    }

    /// Keys usable on a component of this type, inherited keys included.
    pub fn effective_keys(
        &self,
        category: Category,
        name: &str,
    ) -> Result<&BTreeSet<String>, ModelError> {
        if !category.has_properties() {
            return Err(ModelError::NoProperties { category });
        }
        Ok(&self.info(category, name)?.effective_keys)
    }

    pub fn keys(&self) -> &BTreeSet<String> {
        &self.keys
    }

    pub fn values(&self) -> &BTreeSet<String> {
        &self.values
    }

    pub fn has_key(&self, key: &str) -> bool {
        self.keys.contains(key)
    }

    /// Allowed values of `key`, `None` if the key is not declared.
    pub fn value_domain(&self, key: &str) -> Option<&BTreeSet<String>> {
        self.domains.get(key)
    }
}

fn build_table(
    category: Category,
    entries: &[TypeEntry],
    keys: &BTreeSet<String>,
) -> Result<TypeTable, ModelError> {
    let mut table = TypeTable::default();
    for entry in entries {
        if entry.name.is_empty() {
            return Err(ModelError::EmptyId);
        }
        if !category.has_properties() && !entry.keys.is_empty() {
            return Err(ModelError::BoundaryTypeWithKeys {
                name: entry.name.clone(),
            });
        }
        if let Some(key) = entry.keys.iter().find(|k| !keys.contains(*k)) {
            return Err(ModelError::UnknownKeyInEta {
                category,
                name: entry.name.clone(),
                key: key.clone(),
            });
        }
        let info = TypeInfo {
            parent: entry.parent.clone(),
            declared_keys: entry.keys.iter().cloned().collect(),
            effective_keys: BTreeSet::new(),
        };
        if table.types.insert(entry.name.clone(), info).is_some() {
            return Err(ModelError::DuplicateType {
                category,
                name: entry.name.clone(),
            });
        }
    }

    for (name, info) in &table.types {
        let Some(parent) = &info.parent else {
            table.hierarchy.entry(name.clone()).or_default();
            continue;
        };
        let Some(parent_info) = table.types.get(parent) else {
            return Err(ModelError::UnknownParentType {
                category,
                name: name.clone(),
                parent: parent.clone(),
            });
        };
        if parent_info.parent.is_some() || parent == name {
            return Err(ModelError::SubtypeWithChildren {
                category,
                name: name.clone(),
                parent: parent.clone(),
            });
        }
        table
            .hierarchy
            .entry(parent.clone())
            .or_default()
            .insert(name.clone());
    }

    let inherited: BTreeMap<String, BTreeSet<String>> = table
        .types
        .iter()
        .map(|(name, info)| {
            let mut eff = info.declared_keys.clone();
            if let Some(parent) = &info.parent {
                eff.extend(table.types[parent].declared_keys.iter().cloned());
            }
            (name.clone(), eff)
        })
        .collect();
    for (name, eff) in inherited {
        if let Some(info) = table.types.get_mut(&name) {
            info.effective_keys = eff;
        }
    }
    Ok(table)
}
