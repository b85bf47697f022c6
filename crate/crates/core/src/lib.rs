//! Threat analysis over advanced data-flow diagrams.
//!
//! A [`ContentSpecification`] fixes the vocabulary (types, sub-types, property
//! keys and values). A [`Diagram`] is a system model written in that
//! vocabulary. Rules are anti-patterns in a small query language; the
//! [`dsl`] module parses them, [`rule_check`] checks them against a
//! specification, and [`eval`] finds every place in a diagram where they
//! match. [`catalog`] ties the steps together into a threat report.

pub mod catalog;
pub mod conformance;
pub mod dsl;
pub mod eval;
pub mod fixtures;
pub mod flows;
pub mod io;
pub mod model;
pub mod rule_check;
pub mod violation;

pub use catalog::{analyze, load_catalog, AnalyzeError, AnalyzeOptions, Rule, ThreatReport};
pub use conformance::{validate_cardinality, validate_diagram};
pub use dsl::{parse_query, pretty_print, ParseError, Query};
pub use eval::{evaluate_query, MatchTuple};
pub use flows::{enumerate_flows, Flow, Uniqueness};
pub use model::{Category, ComponentRef, Containment, ContentSpecification, Diagram, ModelError};
pub use rule_check::{check_query, check_query_full};
pub use violation::{Code, Severity, Subject, Violation};

/// Version string recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
