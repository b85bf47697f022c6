//! Static check of a parsed rule against a specification.
//!
//! Every type filter must name types of its category. Every property filter
//! must use a known key, values from the key's domain, and, when the
//! enclosing pattern has a type filter, a key that every named type carries.

use crate::dsl::*;
use crate::model::{Category, ContentSpecification};
use crate::violation::{Code, Subject, Violation};

/// Errors and warnings of one rule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Violations of `query` against `spec`, in source order. Empty iff the
/// rule conforms.
pub fn check_query(query: &Query, spec: &ContentSpecification) -> Vec<Violation> {
    check_query_full(query, spec).violations
}

/// Like [`check_query`], also returning warnings about negated type filters,
/// under which property keys are only checked against the key set.
pub fn check_query_full(query: &Query, spec: &ContentSpecification) -> CheckReport {
    let mut c = Checker {
        spec,
        report: CheckReport::default(),
    };
    c.query(query);
    c.report
}

/// Types a property filter must be valid for; `None` when unconstrained.
type Context<'a> = Option<(Category, &'a [String])>;

struct Checker<'s> {
    spec: &'s ContentSpecification,
    report: CheckReport,
}

impl<'s> Checker<'s> {
    fn query(&mut self, q: &Query) {
        let mut stack = vec![q];
        while let Some(q) = stack.pop() {
            match q {
                Query::And(items) | Query::Or(items) => stack.extend(items.iter().rev()),
                Query::Pattern(p) => self.pattern(p),
            }
        }
    }

    fn pattern(&mut self, p: &Pattern) {
        match p {
            Pattern::Element(p) => self.element(p),
            Pattern::Asset(p) => self.asset(p),
            Pattern::Boundary(p) => self.boundary(p),
            Pattern::Connector(p) => self.connector(p),
            Pattern::Flow(p) => self.flow(p),
        }
    }

    /// Checks a type filter and returns the context it sets up.
    fn type_filter<'a>(&mut self, category: Category, t: &'a Option<TypeFilter>) -> Context<'a> {
        let t = t.as_ref()?;
        let rule = if t.op.is_list() {
            "typeFil.list"
        } else {
            "typeFil.single"
        };
        for name in &t.names {
            if !self.spec.has_type(category, name) {
                self.report.violations.push(Violation::error(
                    Code::UnknownType,
                    Subject::rule(t.span),
                    rule,
                    format!("`{name}` is not a {category} type"),
                ));
            }
        }
        if t.op.is_negated() {
            self.report.warnings.push(Violation::warning(
                Code::NegatedTypeContext,
                Subject::rule(t.span),
                rule,
                "negated type filter: property keys below are checked against the key set only"
                    .into(),
            ));
            return None;
        }
        Some((category, &t.names))
    }

    fn property(&mut self, p: &PropertyFilter, ctx: Context<'_>) {
        let rule = if p.op.is_list() {
            "propFil.list"
        } else {
            "propFil.single"
        };
        let subject = || Subject::rule(p.span);
        if !self.spec.has_key(&p.key) {
            self.report.violations.push(Violation::error(
                Code::UnknownKey,
                subject(),
                rule,
                format!("`{}` is not a property key", p.key),
            ));
            return;
        }
        let domain = self.spec.value_domain(&p.key);
        for v in &p.values {
            if !domain.is_some_and(|d| d.contains(v)) {
                self.report.violations.push(Violation::error(
                    Code::ValueNotInDomain,
                    subject(),
                    rule,
                    format!("`{v}` is not an allowed value of `{}`", p.key),
                ));
            }
        }
        let Some((category, types)) = ctx else {
            return;
        };
        for t in types {
            // Unknown names were already reported by the type filter.
            let Ok(keys) = self.spec.effective_keys(category, t) else {
                continue;
            };
            if !keys.contains(&p.key) {
                self.report.violations.push(Violation::error(
                    Code::KeyNotInContext,
                    subject(),
                    rule,
                    format!("key `{}` is not defined for {category} type `{t}`", p.key),
                ));
            }
        }
    }

    fn filters<F>(&mut self, e: &Option<FilterExpr<F>>, mut leaf: impl FnMut(&mut Self, &F)) {
        if let Some(e) = e {
            for f in e.leaves() {
                leaf(self, f);
            }
        }
    }

    fn exprs<P>(&mut self, e: &PatternExpr<P>, single: fn(&mut Self, &P)) {
        for p in e.leaves() {
            single(self, p);
        }
    }

    fn element(&mut self, p: &ElementPattern) {
        let ctx = self.type_filter(Category::Element, &p.type_filter);
        self.filters(&p.filter, |c, f| c.element_filter(f, ctx));
    }

    fn asset(&mut self, p: &AssetPattern) {
        let ctx = self.type_filter(Category::Asset, &p.type_filter);
        self.filters(&p.filter, |c, f| c.property(f, ctx));
    }

    fn boundary(&mut self, p: &BoundaryPattern) {
        self.type_filter(Category::Boundary, &p.type_filter);
        self.filters(&p.filter, |c, f| match f {
            BoundaryFilter::Contains { inner, .. } => c.container(inner),
            BoundaryFilter::ContainedBy { inner, .. } => c.exprs(inner, Self::boundary),
        });
    }

    fn connector(&mut self, p: &ConnectorPattern) {
        let ctx = self.type_filter(Category::Connector, &p.type_filter);
        self.exprs(&p.source, Self::element);
        self.exprs(&p.target, Self::element);
        self.filters(&p.filter, |c, f| c.connector_filter(f, ctx));
    }

    fn flow(&mut self, p: &FlowPattern) {
        self.exprs(&p.source, Self::element);
        self.exprs(&p.target, Self::element);
        self.filters(&p.filter, Self::flow_filter);
    }

    fn container(&mut self, c: &Container) {
        match c {
            Container::Element(e) => self.exprs(e, Self::element),
            Container::Boundary(e) => self.exprs(e, Self::boundary),
        }
    }

    fn element_filter(&mut self, f: &ElementFilter, ctx: Context<'_>) {
        match f {
            ElementFilter::Property(p) => self.property(p, ctx),
            ElementFilter::Holds(a) => self.exprs(a, Self::asset),
            ElementFilter::Contains { inner, .. } => self.exprs(inner, Self::element),
            ElementFilter::ContainedBy { inner, .. } => self.container(inner),
            ElementFilter::Connector(h) => {
                let inner = self.type_filter(Category::Connector, &h.type_filter);
                self.exprs(h.endpoint.pattern(), Self::element);
                self.filters(&h.filter, |c, f| c.connector_filter(f, inner));
            }
            ElementFilter::Flow(h) => {
                self.exprs(h.endpoint.pattern(), Self::element);
                self.filters(&h.filter, Self::flow_filter);
            }
        }
    }

    fn connector_filter(&mut self, f: &ConnectorFilter, ctx: Context<'_>) {
        match f {
            ConnectorFilter::Property(p) => self.property(p, ctx),
            ConnectorFilter::Holds(a) => self.exprs(a, Self::asset),
            ConnectorFilter::Crosses(c) => self.container(c),
        }
    }

    fn flow_filter(&mut self, f: &FlowFilter) {
        match f {
            FlowFilter::Includes { inner, .. } => match inner {
                Member::Element(e) => self.exprs(e, Self::element),
                Member::Connector(e) => self.exprs(e, Self::connector),
            },
            FlowFilter::Crosses(c) => self.container(c),
        }
    }
}
