//! Findings reported by the model validator and the rule checker.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dsl::Span;
use crate::model::ComponentRef;

/// Closed set of finding codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Code {
    // diagram against specification
    EmptyDiagram,
    ConnectorNeedsTwoElements,
    AssetNeedsHolder,
    UnknownType,
    KeyNotAllowed,
    ValueNotInDomain,
    UnheldAsset,
    // rule against specification
    UnknownKey,
    KeyNotInContext,
    NegatedTypeContext,
    // rule text
    UnterminatedString,
    IllegalCharacter,
    UnknownWord,
    UnexpectedToken,
    MisplacedFilter,
    NestingTooDeep,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::EmptyDiagram => "EMPTY_DIAGRAM",
            Code::ConnectorNeedsTwoElements => "CONNECTOR_NEEDS_TWO_ELEMENTS",
            Code::AssetNeedsHolder => "ASSET_NEEDS_HOLDER",
            Code::UnknownType => "UNKNOWN_TYPE",
            Code::KeyNotAllowed => "KEY_NOT_ALLOWED",
            Code::ValueNotInDomain => "VALUE_NOT_IN_DOMAIN",
            Code::UnheldAsset => "UNHELD_ASSET",
            Code::UnknownKey => "UNKNOWN_KEY",
            Code::KeyNotInContext => "KEY_NOT_IN_CONTEXT",
            Code::NegatedTypeContext => "NEGATED_TYPE_CONTEXT",
            Code::UnterminatedString => "UNTERMINATED_STRING",
            Code::IllegalCharacter => "ILLEGAL_CHARACTER",
            Code::UnknownWord => "UNKNOWN_WORD",
            Code::UnexpectedToken => "UNEXPECTED_TOKEN",
            Code::MisplacedFilter => "MISPLACED_FILTER",
            Code::NestingTooDeep => "NESTING_TOO_DEEP",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// What a finding is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    /// The diagram as a whole (cardinality findings).
    Diagram,
    Component(ComponentRef),
    /// A byte range of the rule text.
    Rule { start: usize, end: usize },
}

impl Subject {
    pub fn rule(span: Span) -> Self {
        Subject::Rule {
            start: span.start,
            end: span.end,
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Diagram => f.write_str("diagram"),
            Subject::Component(c) => write!(f, "{} {c}", c.kind_str()),
            Subject::Rule { start, end } => write!(f, "rule[{start}..{end}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub code: Code,
    pub severity: Severity,
    pub subject: Subject,
    /// Identifier of the conformance condition that failed.
    pub condition: String,
    pub message: String,
}

impl Violation {
    pub fn error(code: Code, subject: Subject, condition: &str, message: String) -> Self {
        Violation {
            code,
            severity: Severity::Error,
            subject,
            condition: condition.to_owned(),
            message,
        }
    }

    pub fn warning(code: Code, subject: Subject, condition: &str, message: String) -> Self {
        Violation {
            severity: Severity::Warning,
            ..Violation::error(code, subject, condition, message)
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {} [{}]: {}",
            self.code, self.subject, self.condition, self.message
        )
    }
}
