//! Flows: alternating element/connector sequences between two elements, and
//! their enumeration by depth-first search.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{Category, Diagram, ModelError};

/// A sequence `(n1, r1, n2, ..., r_{i-1}, n_i)` with at least one connector.
///
/// Ordering is lexicographic over the id sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Flow(Vec<String>);

impl Flow {
    /// Wraps a raw id sequence, checking only its shape (odd length >= 3).
    pub fn from_sequence(sequence: Vec<String>) -> Result<Self, String> {
        if sequence.len() < 3 || sequence.len() % 2 == 0 {
            return Err(format!(
                "a flow needs an odd number (>= 3) of ids, got {}",
                sequence.len()
            ));
        }
        Ok(Flow(sequence))
    }

    /// Wraps a sequence after checking it against `diagram`: alternation and
    /// connector endpoints.
    pub fn new(diagram: &Diagram, sequence: Vec<String>) -> Result<Self, String> {
        let flow = Flow::from_sequence(sequence)?;
        for (i, id) in flow.0.iter().enumerate() {
            let want = if i % 2 == 0 {
                Category::Element
            } else {
                Category::Connector
            };
            if diagram.kind_of(id) != Some(want) {
                return Err(format!("`{id}` at position {i} is not a {want}"));
            }
        }
        for hop in flow.0.windows(3).step_by(2) {
            let (from, via, to) = (&hop[0], &hop[1], &hop[2]);
            if diagram.source(via) != Some(from.as_str()) || diagram.target(via) != Some(to.as_str())
            {
                return Err(format!("connector `{via}` does not link `{from}` to `{to}`"));
            }
        }
        Ok(flow)
    }

    pub fn sequence(&self) -> &[String] {
        &self.0
    }

    pub fn into_sequence(self) -> Vec<String> {
        self.0
    }

    /// First element of the flow.
    pub fn p_source(&self) -> &str {
        &self.0[0]
    }

    /// Last element of the flow.
    pub fn p_target(&self) -> &str {
        &self.0[self.0.len() - 1]
    }

    /// Element ids in sequence order (may repeat in connector-unique mode).
    pub fn element_seq(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.iter().step_by(2).map(String::as_str)
    }

    /// Connector ids in sequence order.
    pub fn connector_seq(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.iter().skip(1).step_by(2).map(String::as_str)
    }

    pub fn elements(&self) -> BTreeSet<&str> {
        self.element_seq().collect()
    }

    pub fn connectors(&self) -> BTreeSet<&str> {
        self.connector_seq().collect()
    }
}

impl TryFrom<Vec<String>> for Flow {
    type Error = String;

    fn try_from(v: Vec<String>) -> Result<Self, Self::Error> {
        Flow::from_sequence(v)
    }
}

impl From<Flow> for Vec<String> {
    fn from(f: Flow) -> Self {
        f.0
    }
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.join(","))
    }
}

/// Which repetitions a flow may contain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Uniqueness {
    /// Every element appears at most once: simple paths.
    #[default]
    Elements,
    /// Every connector appears at most once; the walk ends at the first
    /// arrival at the target.
    Connectors,
}

impl Uniqueness {
    pub fn as_str(self) -> &'static str {
        match self {
            Uniqueness::Elements => "elements",
            Uniqueness::Connectors => "connectors",
        }
    }
}

impl fmt::Display for Uniqueness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Uniqueness {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "elements" => Ok(Uniqueness::Elements),
            "connectors" => Ok(Uniqueness::Connectors),
            other => Err(format!("unknown flow uniqueness `{other}`")),
        }
    }
}

/// All flows from `src` to `tgt`, sorted.
///
/// Iterative depth-first search over outgoing connectors in id order, so
/// long chains do not grow the call stack.
pub fn enumerate_flows(
    diagram: &Diagram,
    src: &str,
    tgt: &str,
    mode: Uniqueness,
) -> Result<Vec<Flow>, ModelError> {
    for id in [src, tgt] {
        if diagram.kind_of(id) != Some(Category::Element) {
            return Err(ModelError::UnknownComponent { id: id.to_owned() });
        }
    }
    Ok(match mode {
        Uniqueness::Elements => simple_paths(diagram, src, tgt),
        Uniqueness::Connectors => connector_trails(diagram, src, tgt),
    })
}

fn simple_paths(diagram: &Diagram, src: &str, tgt: &str) -> Vec<Flow> {
    let mut found = Vec::new();
    let mut path: Vec<&str> = vec![src];
    let mut on_path: BTreeSet<&str> = BTreeSet::from([src]);
    // One frame per element on the path: index of the next connector to try.
    let mut stack: Vec<usize> = vec![0];

    while let Some(next) = stack.last_mut() {
        let here = path[path.len() - 1];
        let out = diagram.outgoing(here);
        let Some(connector) = out.get(*next) else {
            stack.pop();
            on_path.remove(here);
            path.pop();
            path.pop();
            continue;
        };
        *next += 1;
        let to = diagram.target(connector).unwrap_or_default();
        if on_path.contains(to) {
            continue;
        }
        if to == tgt {
            let mut seq: Vec<String> = path.iter().map(|s| s.to_string()).collect();
            seq.push(connector.clone());
            seq.push(to.to_owned());
            found.push(Flow(seq));
            continue;
        }
        path.push(connector);
        path.push(to);
        on_path.insert(to);
        stack.push(0);
    }
    found.sort();
    found
}

fn connector_trails(diagram: &Diagram, src: &str, tgt: &str) -> Vec<Flow> {
    let mut found = Vec::new();
    let mut path: Vec<&str> = vec![src];
    let mut used: BTreeSet<&str> = BTreeSet::new();
    let mut stack: Vec<usize> = vec![0];

    while let Some(next) = stack.last_mut() {
        let here = path[path.len() - 1];
        let out = diagram.outgoing(here);
        let Some(connector) = out.get(*next) else {
            stack.pop();
            path.pop();
            if let Some(c) = path.pop() {
                used.remove(c);
            }
            continue;
        };
        *next += 1;
        if used.contains(connector.as_str()) {
            continue;
        }
        let to = diagram.target(connector).unwrap_or_default();
        if to == tgt {
            let mut seq: Vec<String> = path.iter().map(|s| s.to_string()).collect();
            seq.push(connector.clone());
            seq.push(to.to_owned());
            found.push(Flow(seq));
            continue;
        }
        used.insert(connector);
        path.push(connector);
        path.push(to);
        stack.push(0);
    }
    found.sort();
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn flow(ids: &[&str]) -> Flow {
        Flow::from_sequence(ids.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn accessors() {
        let p = flow(&["n4", "r2", "n5", "r3", "n6"]);
        assert_eq!(p.p_source(), "n4");
        assert_eq!(p.p_target(), "n6");
        assert_eq!(p.elements(), BTreeSet::from(["n4", "n5", "n6"]));
        assert_eq!(p.connectors(), BTreeSet::from(["r2", "r3"]));

        let q = flow(&["n6", "r4", "n5", "r5", "n3"]);
        assert_eq!(q.p_source(), "n6");
        assert_eq!(q.p_target(), "n3");

        let hop = flow(&["n2", "r1", "n3"]);
        assert_eq!(hop.elements(), BTreeSet::from(["n2", "n3"]));
        assert_eq!(hop.connectors(), BTreeSet::from(["r1"]));
    }

    #[test]
    fn shape_is_checked() {
        assert!(Flow::from_sequence(vec!["n1".into()]).is_err());
        assert!(Flow::from_sequence(vec!["n1".into(), "r1".into()]).is_err());
        let d = fixtures::mobile_diagram();
        assert!(Flow::new(&d, vec!["n4".into(), "r2".into(), "n5".into()]).is_ok());
        assert!(Flow::new(&d, vec!["n4".into(), "r3".into(), "n5".into()]).is_err());
        assert!(Flow::new(&d, vec!["n4".into(), "n5".into(), "n6".into()]).is_err());
    }

    #[test]
    fn fixture_flows() {
        let d = fixtures::mobile_diagram();
        let e = Uniqueness::Elements;
        assert_eq!(
            enumerate_flows(&d, "n4", "n6", e).unwrap(),
            vec![flow(&["n4", "r2", "n5", "r3", "n6"])]
        );
        assert_eq!(
            enumerate_flows(&d, "n6", "n3", e).unwrap(),
            vec![flow(&["n6", "r4", "n5", "r5", "n3"])]
        );
        assert!(enumerate_flows(&d, "n2", "n6", e).unwrap().is_empty());
        assert!(enumerate_flows(&d, "n1", "n6", e).unwrap().is_empty());
        assert!(enumerate_flows(&d, "n5", "n5", e).unwrap().is_empty());
        assert_eq!(
            enumerate_flows(&d, "x", "n6", e).unwrap_err().code(),
            "UNKNOWN_COMPONENT"
        );
    }

    #[test]
    fn connector_mode_allows_element_revisits() {
        let d = fixtures::mobile_diagram();
        let c = Uniqueness::Connectors;
        // n5 -> n6 -> n5 cycle can be walked once.
        assert_eq!(
            enumerate_flows(&d, "n5", "n5", c).unwrap(),
            vec![flow(&["n5", "r3", "n6", "r4", "n5"])]
        );
        assert_eq!(
            enumerate_flows(&d, "n4", "n3", c).unwrap(),
            vec![
                flow(&["n4", "r2", "n5", "r3", "n6", "r4", "n5", "r5", "n3"]),
                flow(&["n4", "r2", "n5", "r5", "n3"]),
            ]
        );
    }

    #[test]
    fn single_node_has_no_flows() {
        let d = Diagram::from_document(
            &serde_json::from_str(
                r#"{"elements": [{"id": "a", "type": "T"}],
                    "connectors": [{"id": "loop", "type": "C", "source": "a", "target": "a"}]}"#,
            )
            .unwrap(),
        )
        .unwrap();
        assert!(enumerate_flows(&d, "a", "a", Uniqueness::Elements)
            .unwrap()
            .is_empty());
        assert_eq!(
            enumerate_flows(&d, "a", "a", Uniqueness::Connectors).unwrap(),
            vec![flow(&["a", "loop", "a"])]
        );
    }

    #[test]
    fn long_chain_does_not_overflow() {
        let n = 20_000;
        let mut doc = crate::io::ModelDocument::default();
        for i in 0..=n {
            doc.elements.push(crate::io::ElementEntry {
                id: format!("e{i}"),
                type_name: "T".into(),
                parent: vec![],
                boundary: vec![],
                properties: Default::default(),
            });
        }
        for i in 0..n {
            doc.connectors.push(crate::io::ConnectorEntry {
                id: format!("c{i}"),
                type_name: "C".into(),
                source: format!("e{i}"),
                target: format!("e{}", i + 1),
                properties: Default::default(),
            });
        }
        let d = Diagram::from_document(&doc).unwrap();
        for mode in [Uniqueness::Elements, Uniqueness::Connectors] {
            let flows = enumerate_flows(&d, "e0", &format!("e{n}"), mode).unwrap();
            assert_eq!(flows.len(), 1);
            assert_eq!(flows[0].sequence().len(), 2 * n + 1);
        }
    }
}
