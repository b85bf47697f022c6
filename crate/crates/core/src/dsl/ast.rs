//! Syntax tree of an anti-pattern rule.
//!
//! The tree is shaped after the grammar: a filter kind can only appear
//! under the pattern kinds that admit it, so misplaced filters are
//! unrepresentable once parsed. `&` chains are flat: an `And` never holds
//! another `And` directly.

use std::fmt;
use std::hash::{Hash, Hasher};

/// A byte range in the rule source.
///
/// Spans never take part in equality or hashing, so trees parsed from
/// differently formatted text compare equal.
#[derive(Clone, Copy, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl Hash for Span {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Debug for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// Top level of a rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Query {
    And(Vec<Query>),
    Or(Vec<Query>),
    Pattern(Pattern),
}

/// A pattern standing on its own at query level.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Element(ElementPattern),
    Asset(AssetPattern),
    Boundary(BoundaryPattern),
    Connector(ConnectorPattern),
    Flow(FlowPattern),
}

/// A pattern in a nested position, where `( p | p )` alternatives are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternExpr<P> {
    Alt(Vec<PatternExpr<P>>),
    Single(Box<P>),
}

/// A filter expression attached to a pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FilterExpr<F> {
    And(Vec<FilterExpr<F>>),
    Or(Vec<FilterExpr<F>>),
    Leaf(F),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ElementPattern {
    pub type_filter: Option<TypeFilter>,
    pub filter: Option<FilterExpr<ElementFilter>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AssetPattern {
    pub type_filter: Option<TypeFilter>,
    pub filter: Option<FilterExpr<PropertyFilter>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundaryPattern {
    pub type_filter: Option<TypeFilter>,
    pub filter: Option<FilterExpr<BoundaryFilter>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConnectorPattern {
    pub type_filter: Option<TypeFilter>,
    pub source: PatternExpr<ElementPattern>,
    pub target: PatternExpr<ElementPattern>,
    pub filter: Option<FilterExpr<ConnectorFilter>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlowPattern {
    pub source: PatternExpr<ElementPattern>,
    pub target: PatternExpr<ElementPattern>,
    pub filter: Option<FilterExpr<FlowFilter>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetOp {
    Eq,
    Neq,
    In,
    NotIn,
}

impl SetOp {
    pub fn is_negated(self) -> bool {
        matches!(self, SetOp::Neq | SetOp::NotIn)
    }

    pub fn is_list(self) -> bool {
        matches!(self, SetOp::In | SetOp::NotIn)
    }
}

/// `: "q"`, `!= "q"`, `in [..]` or `not in [..]`.
///
/// `Eq`/`Neq` carry exactly one name, the list forms at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeFilter {
    pub op: SetOp,
    pub names: Vec<String>,
    pub span: Span,
}

/// `"k" = "v"`, `"k" != "v"`, `"k" in [..]` or `"k" not in [..]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PropertyFilter {
    pub key: String,
    pub op: SetOp,
    pub values: Vec<String>,
    pub span: Span,
}

/// Filters admitted inside an element pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ElementFilter {
    Property(PropertyFilter),
    Holds(PatternExpr<AssetPattern>),
    /// `Contains (no)? elPat`
    Contains {
        negated: bool,
        inner: PatternExpr<ElementPattern>,
    },
    /// `(Not)? Contained by (elPat | boundPat)`
    ContainedBy { negated: bool, inner: Container },
    Connector(HasConnector),
    Flow(HasFlow),
}

/// Filters admitted inside a boundary pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoundaryFilter {
    /// `Contains (no)? (elPat | boundPat)`
    Contains { negated: bool, inner: Container },
    /// `(Not)? Contained by boundPat`
    ContainedBy {
        negated: bool,
        inner: PatternExpr<BoundaryPattern>,
    },
}

/// Filters admitted inside a connector pattern or a `Has Connector` filter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConnectorFilter {
    Property(PropertyFilter),
    Holds(PatternExpr<AssetPattern>),
    Crosses(Container),
}

/// Filters admitted inside a flow pattern or a `Has Flow` filter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FlowFilter {
    Includes { mode: IncludesMode, inner: Member },
    Crosses(Container),
}

/// Something that can contain or be crossed: an element or a boundary.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Container {
    Element(PatternExpr<ElementPattern>),
    Boundary(PatternExpr<BoundaryPattern>),
}

/// Something a flow is made of: an element or a connector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Member {
    Element(PatternExpr<ElementPattern>),
    Connector(PatternExpr<ConnectorPattern>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IncludesMode {
    Some,
    No,
    Only,
}

/// The single endpoint constraint of a `Has Connector` or `Has Flow` filter.
///
/// `Source` constrains the other end of incoming connectors or flows,
/// `Target` the other end of outgoing ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Source(PatternExpr<ElementPattern>),
    Target(PatternExpr<ElementPattern>),
}

impl Endpoint {
    pub fn pattern(&self) -> &PatternExpr<ElementPattern> {
        match self {
            Endpoint::Source(p) | Endpoint::Target(p) => p,
        }
    }
}

/// `Has (No)? Connector typeFil? { (srcFil | tgtFil) (& conPatFil)? }`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HasConnector {
    pub negated: bool,
    pub type_filter: Option<TypeFilter>,
    pub endpoint: Endpoint,
    pub filter: Option<FilterExpr<ConnectorFilter>>,
}

/// `Has (No)? Flow { (srcFil | tgtFil) (& flowPatFil)? }`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HasFlow {
    pub negated: bool,
    pub endpoint: Endpoint,
    pub filter: Option<FilterExpr<FlowFilter>>,
}

impl<P> PatternExpr<P> {
    /// Every concrete pattern, left to right.
    pub fn leaves(&self) -> Vec<&P> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            match e {
                PatternExpr::Single(p) => out.push(&**p),
                PatternExpr::Alt(items) => stack.extend(items.iter().rev()),
            }
        }
        out
    }
}

impl<F> FilterExpr<F> {
    pub fn leaves(&self) -> Vec<&F> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            match e {
                FilterExpr::Leaf(f) => out.push(f),
                FilterExpr::And(items) | FilterExpr::Or(items) => stack.extend(items.iter().rev()),
            }
        }
        out
    }
}
