//! Random rule trees and grammar coverage.
//!
//! [`AstGen`] builds trees directly, not text, so that printing and parsing
//! them is a real round-trip check. With a specification it draws type
//! names, keys and values from it so most trees pass the rule checker;
//! without one it draws arbitrary names, escapes included.

use std::collections::BTreeMap;

use adfd_core::dsl::*;
use adfd_core::{Category, ContentSpecification};
use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;

/// Filter kinds a rule can use. `crosses` covers connectors and flows.
pub const FILTER_KINDS: [&str; 19] = [
    "type_filter",
    "property",
    "holds",
    "contains",
    "contains_no",
    "contained_by",
    "not_contained_by",
    "has_connector",
    "has_no_connector",
    "has_flow",
    "has_no_flow",
    "boundary_contains",
    "boundary_contains_no",
    "boundary_contained_by",
    "boundary_not_contained_by",
    "crosses",
    "includes",
    "includes_no",
    "includes_only",
];

/// Every grammar production the parser accepts, by name.
pub const PRODUCTIONS: [&str; 43] = [
    "query_and",
    "query_or",
    "pattern_element",
    "pattern_asset",
    "pattern_boundary",
    "pattern_connector",
    "pattern_flow",
    "pattern_alt",
    "filter_and",
    "filter_or",
    "type_eq",
    "type_neq",
    "type_in",
    "type_not_in",
    "prop_eq",
    "prop_neq",
    "prop_in",
    "prop_not_in",
    "holds",
    "contains",
    "contains_no",
    "contained_by",
    "not_contained_by",
    "contained_by_element",
    "contained_by_boundary",
    "has_connector",
    "has_no_connector",
    "has_connector_filters",
    "has_flow",
    "has_no_flow",
    "has_flow_filters",
    "endpoint_source",
    "endpoint_target",
    "boundary_contains",
    "boundary_contains_no",
    "boundary_contained_by",
    "boundary_not_contained_by",
    "crosses_element",
    "crosses_boundary",
    "includes",
    "includes_no",
    "includes_only",
    "member_connector",
];

/// Production and filter-kind counts of a tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Coverage {
    pub counts: BTreeMap<&'static str, usize>,
}

impl Coverage {
    pub fn of(q: &Query) -> Self {
        let mut c = Coverage::default();
        c.query(q);
        c
    }

    pub fn add(&mut self, other: &Coverage) {
        for (k, n) in &other.counts {
            *self.counts.entry(k).or_default() += n;
        }
    }

    pub fn get(&self, name: &str) -> usize {
        self.counts.get(name).copied().unwrap_or(0)
    }

    /// Names from `wanted` seen fewer than `min` times.
    pub fn missing(&self, wanted: &[&'static str], min: usize) -> Vec<(&'static str, usize)> {
        wanted
            .iter()
            .map(|w| (*w, self.get(w)))
            .filter(|(_, n)| *n < min)
            .collect()
    }

    fn hit(&mut self, name: &'static str) {
        *self.counts.entry(name).or_default() += 1;
    }

    fn query(&mut self, q: &Query) {
        match q {
            Query::And(items) => {
                self.hit("query_and");
                items.iter().for_each(|q| self.query(q));
            }
            Query::Or(items) => {
                self.hit("query_or");
                items.iter().for_each(|q| self.query(q));
            }
            Query::Pattern(p) => match p {
                Pattern::Element(p) => {
                    self.hit("pattern_element");
                    self.element(p);
                }
                Pattern::Asset(p) => {
                    self.hit("pattern_asset");
                    self.asset(p);
                }
                Pattern::Boundary(p) => {
                    self.hit("pattern_boundary");
                    self.boundary(p);
                }
                Pattern::Connector(p) => {
                    self.hit("pattern_connector");
                    self.connector(p);
                }
                Pattern::Flow(p) => {
                    self.hit("pattern_flow");
                    self.flow(p);
                }
            },
        }
    }

    fn exprs<P>(&mut self, e: &PatternExpr<P>, f: fn(&mut Self, &P)) {
        if let PatternExpr::Alt(items) = e {
            self.hit("pattern_alt");
            for i in items {
                self.exprs(i, f);
            }
            return;
        }
        for p in e.leaves() {
            f(self, p);
        }
    }

    fn filters<F>(&mut self, e: &Option<FilterExpr<F>>, f: fn(&mut Self, &F)) {
        fn walk<F>(c: &mut Coverage, e: &FilterExpr<F>, f: fn(&mut Coverage, &F)) {
            match e {
                FilterExpr::Leaf(l) => f(c, l),
                FilterExpr::And(items) => {
                    c.hit("filter_and");
                    items.iter().for_each(|i| walk(c, i, f));
                }
                FilterExpr::Or(items) => {
                    c.hit("filter_or");
                    items.iter().for_each(|i| walk(c, i, f));
                }
            }
        }
        if let Some(e) = e {
            walk(self, e, f);
        }
    }

    fn type_filter(&mut self, t: &Option<TypeFilter>) {
        if let Some(t) = t {
            self.hit("type_filter");
            self.hit(match t.op {
                SetOp::Eq => "type_eq",
                SetOp::Neq => "type_neq",
                SetOp::In => "type_in",
                SetOp::NotIn => "type_not_in",
            });
        }
    }

    fn property(&mut self, p: &PropertyFilter) {
        self.hit("property");
        self.hit(match p.op {
            SetOp::Eq => "prop_eq",
            SetOp::Neq => "prop_neq",
            SetOp::In => "prop_in",
            SetOp::NotIn => "prop_not_in",
        });
    }

    fn element(&mut self, p: &ElementPattern) {
        self.type_filter(&p.type_filter);
        self.filters(&p.filter, Self::element_filter);
    }

    fn asset(&mut self, p: &AssetPattern) {
        self.type_filter(&p.type_filter);
        self.filters(&p.filter, Self::property);
    }

    fn boundary(&mut self, p: &BoundaryPattern) {
        self.type_filter(&p.type_filter);
        self.filters(&p.filter, |c, f| match f {
            BoundaryFilter::Contains { negated, inner } => {
                c.hit(if *negated {
                    "boundary_contains_no"
                } else {
                    "boundary_contains"
                });
                c.container(inner, false);
            }
            BoundaryFilter::ContainedBy { negated, inner } => {
                c.hit(if *negated {
                    "boundary_not_contained_by"
                } else {
                    "boundary_contained_by"
                });
                c.exprs(inner, Self::boundary);
            }
        });
    }

    fn connector(&mut self, p: &ConnectorPattern) {
        self.type_filter(&p.type_filter);
        self.exprs(&p.source, Self::element);
        self.exprs(&p.target, Self::element);
        self.filters(&p.filter, Self::connector_filter);
    }

    fn flow(&mut self, p: &FlowPattern) {
        self.exprs(&p.source, Self::element);
        self.exprs(&p.target, Self::element);
        self.filters(&p.filter, Self::flow_filter);
    }

    fn container(&mut self, c: &Container, crossing: bool) {
        match c {
            Container::Element(e) => {
                if crossing {
                    self.hit("crosses_element");
                }
                self.exprs(e, Self::element);
            }
            Container::Boundary(e) => {
                if crossing {
                    self.hit("crosses_boundary");
                }
                self.exprs(e, Self::boundary);
            }
        }
    }

    fn endpoint(&mut self, e: &Endpoint) {
        self.hit(match e {
            Endpoint::Source(_) => "endpoint_source",
            Endpoint::Target(_) => "endpoint_target",
        });
        self.exprs(e.pattern(), Self::element);
    }

    fn element_filter(&mut self, f: &ElementFilter) {
        match f {
            ElementFilter::Property(p) => self.property(p),
            ElementFilter::Holds(a) => {
                self.hit("holds");
                self.exprs(a, Self::asset);
            }
            ElementFilter::Contains { negated, inner } => {
                self.hit(if *negated { "contains_no" } else { "contains" });
                self.exprs(inner, Self::element);
            }
            ElementFilter::ContainedBy { negated, inner } => {
                self.hit(if *negated {
                    "not_contained_by"
                } else {
                    "contained_by"
                });
                self.hit(match inner {
                    Container::Element(_) => "contained_by_element",
                    Container::Boundary(_) => "contained_by_boundary",
                });
                self.container(inner, false);
            }
            ElementFilter::Connector(h) => {
                self.hit(if h.negated {
                    "has_no_connector"
                } else {
                    "has_connector"
                });
                self.type_filter(&h.type_filter);
                self.endpoint(&h.endpoint);
                if h.filter.is_some() {
                    self.hit("has_connector_filters");
                }
                self.filters(&h.filter, Self::connector_filter);
            }
            ElementFilter::Flow(h) => {
                self.hit(if h.negated { "has_no_flow" } else { "has_flow" });
                self.endpoint(&h.endpoint);
                if h.filter.is_some() {
                    self.hit("has_flow_filters");
                }
                self.filters(&h.filter, Self::flow_filter);
            }
        }
    }

    fn connector_filter(&mut self, f: &ConnectorFilter) {
        match f {
            ConnectorFilter::Property(p) => self.property(p),
            ConnectorFilter::Holds(a) => {
                self.hit("holds");
                self.exprs(a, Self::asset);
            }
            ConnectorFilter::Crosses(c) => {
                self.hit("crosses");
                self.container(c, true);
            }
        }
    }

    fn flow_filter(&mut self, f: &FlowFilter) {
        match f {
            FlowFilter::Crosses(c) => {
                self.hit("crosses");
                self.container(c, true);
            }
            FlowFilter::Includes { mode, inner } => {
                self.hit(match mode {
                    IncludesMode::Some => "includes",
                    IncludesMode::No => "includes_no",
                    IncludesMode::Only => "includes_only",
                });
                match inner {
                    Member::Element(e) => self.exprs(e, Self::element),
                    Member::Connector(e) => {
                        self.hit("member_connector");
                        self.exprs(e, Self::connector);
                    }
                }
            }
        }
    }
}

/// Pattern nesting depth of a tree: a pattern with no inner patterns is 1.
pub fn depth(q: &Query) -> usize {
    // Printed text nests one brace level per inner pattern plus one per
    // filter group, so count pattern keywords along the deepest path instead.
    fn pexpr<P>(e: &PatternExpr<P>, f: fn(&P) -> usize) -> usize {
        e.leaves().into_iter().map(f).max().unwrap_or(0)
    }
    fn fexpr<F>(e: &Option<FilterExpr<F>>, f: fn(&F) -> usize) -> usize {
        e.as_ref()
            .map_or(0, |e| e.leaves().into_iter().map(f).max().unwrap_or(0))
    }
    fn container(c: &Container) -> usize {
        match c {
            Container::Element(e) => pexpr(e, element),
            Container::Boundary(e) => pexpr(e, boundary),
        }
    }
    fn element(p: &ElementPattern) -> usize {
        1 + fexpr(&p.filter, |f| match f {
            ElementFilter::Property(_) => 0,
            ElementFilter::Holds(a) => pexpr(a, asset),
            ElementFilter::Contains { inner, .. } => pexpr(inner, element),
            ElementFilter::ContainedBy { inner, .. } => container(inner),
            ElementFilter::Connector(h) => {
                pexpr(h.endpoint.pattern(), element).max(fexpr(&h.filter, connector_filter))
            }
            ElementFilter::Flow(h) => {
                pexpr(h.endpoint.pattern(), element).max(fexpr(&h.filter, flow_filter))
            }
        })
    }
    fn asset(_: &AssetPattern) -> usize {
        1
    }
    fn boundary(p: &BoundaryPattern) -> usize {
        1 + fexpr(&p.filter, |f| match f {
            BoundaryFilter::Contains { inner, .. } => container(inner),
            BoundaryFilter::ContainedBy { inner, .. } => pexpr(inner, boundary),
        })
    }
    fn connector_filter(f: &ConnectorFilter) -> usize {
        match f {
            ConnectorFilter::Property(_) => 0,
            ConnectorFilter::Holds(a) => pexpr(a, asset),
            ConnectorFilter::Crosses(c) => container(c),
        }
    }
    fn flow_filter(f: &FlowFilter) -> usize {
        match f {
            FlowFilter::Crosses(c) => container(c),
            FlowFilter::Includes { inner, .. } => match inner {
                Member::Element(e) => pexpr(e, element),
                Member::Connector(e) => pexpr(e, connector),
            },
        }
    }
    fn connector(p: &ConnectorPattern) -> usize {
        1 + pexpr(&p.source, element)
            .max(pexpr(&p.target, element))
            .max(fexpr(&p.filter, connector_filter))
    }
    fn flow(p: &FlowPattern) -> usize {
        1 + pexpr(&p.source, element)
            .max(pexpr(&p.target, element))
            .max(fexpr(&p.filter, flow_filter))
    }
    match q {
        Query::And(items) | Query::Or(items) => items.iter().map(depth).max().unwrap_or(0),
        Query::Pattern(p) => match p {
            Pattern::Element(p) => element(p),
            Pattern::Asset(p) => asset(p),
            Pattern::Boundary(p) => boundary(p),
            Pattern::Connector(p) => connector(p),
            Pattern::Flow(p) => flow(p),
        },
    }
}

/// Random rule trees.
pub struct AstGen<'s, R> {
    pub rng: R,
    spec: Option<&'s ContentSpecification>,
    /// Deepest pattern nesting produced, see [`depth`].
    pub max_depth: usize,
}

const NAME_POOL: [&str; 10] = [
    "Server",
    "a",
    "Wired Link",
    "quote\"inside",
    "back\\slash",
    "ünïcödé",
    "",
    "x y z",
    "Element",
    "&|(){}[],:=!",
];

/// Alphabet for freshly made names; quotes and backslashes exercise escapes.
const NAME_CHARS: &[char] = &['a', 'Z', '0', ' ', '"', '\\', '_', 'é', '{', ':'];

impl<'s, R: Rng> AstGen<'s, R> {
    /// Arbitrary names, for syntax tests.
    pub fn syntactic(rng: R, max_depth: usize) -> Self {
        AstGen {
            rng,
            spec: None,
            max_depth,
        }
    }

    /// Names drawn from `spec`, for semantic tests.
    pub fn for_spec(rng: R, spec: &'s ContentSpecification, max_depth: usize) -> Self {
        AstGen {
            rng,
            spec: Some(spec),
            max_depth,
        }
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn name(&mut self) -> String {
        if self.chance(0.5) {
            NAME_POOL.choose(&mut self.rng).unwrap().to_string()
        } else {
            let n = self.rng.gen_range(0..6);
            (0..n)
                .map(|_| *NAME_CHARS.choose(&mut self.rng).unwrap())
                .collect()
        }
    }

    fn type_name(&mut self, category: Category) -> String {
        match self.spec {
            Some(spec) => spec.types(category).choose(&mut self.rng).unwrap().to_owned(),
            None => self.name(),
        }
    }

    fn op(&mut self) -> SetOp {
        *[SetOp::Eq, SetOp::Neq, SetOp::In, SetOp::NotIn]
            .choose(&mut self.rng)
            .unwrap()
    }

    fn type_filter(&mut self, category: Category) -> TypeFilter {
        let op = self.op();
        let n = if op.is_list() {
            self.rng.gen_range(1..=3)
        } else {
            1
        };
        TypeFilter {
            op,
            names: (0..n).map(|_| self.type_name(category)).collect(),
            span: Span::default(),
        }
    }

    fn maybe_type_filter(&mut self, category: Category) -> Option<TypeFilter> {
        self.chance(0.5).then(|| self.type_filter(category))
    }

    /// Types a property filter under `t` must be valid for.
    fn context(t: &Option<TypeFilter>) -> Option<Vec<String>> {
        t.as_ref()
            .filter(|t| !t.op.is_negated())
            .map(|t| t.names.clone())
    }

    /// A property filter valid in `context`, if the specification allows
    /// one there.
    fn property(&mut self, category: Category, context: &Option<Vec<String>>) -> Option<PropertyFilter> {
        let op = self.op();
        let n = if op.is_list() {
            self.rng.gen_range(1..=3)
        } else {
            1
        };
        let Some(spec) = self.spec else {
            return Some(PropertyFilter {
                key: self.name(),
                op,
                values: (0..n).map(|_| self.name()).collect(),
                span: Span::default(),
            });
        };
        let keys: Vec<&String> = match context {
            Some(types) => spec
                .keys()
                .iter()
                .filter(|k| {
                    types.iter().all(|t| {
                        spec.effective_keys(category, t)
                            .is_ok_and(|keys| keys.contains(*k))
                    })
                })
                .collect(),
            None => spec
                .keys()
                .iter()
                .filter(|k| {
                    spec.types(category).any(|t| {
                        spec.effective_keys(category, t)
                            .is_ok_and(|keys| keys.contains(*k))
                    })
                })
                .collect(),
        };
        let key = (*keys.choose(&mut self.rng)?).clone();
        let domain = spec.value_domain(&key)?;
        let values = (0..n)
            .map(|_| domain.iter().choose(&mut self.rng).unwrap().clone())
            .collect();
        Some(PropertyFilter {
            key,
            op,
            values,
            span: Span::default(),
        })
    }

    fn pexpr<P>(&mut self, single: &mut dyn FnMut(&mut Self) -> P) -> PatternExpr<P> {
        self.pexpr_at(2, single)
    }

    fn pexpr_at<P>(&mut self, budget: u32, single: &mut dyn FnMut(&mut Self) -> P) -> PatternExpr<P> {
        if budget > 0 && self.chance(0.15) {
            let n = self.rng.gen_range(2..=3);
            PatternExpr::Alt((0..n).map(|_| self.pexpr_at(budget - 1, single)).collect())
        } else {
            PatternExpr::Single(Box::new(single(self)))
        }
    }

    /// A filter expression over leaves from `leaf`; `None` when `leaf`
    /// cannot produce anything here.
    fn fexpr<F>(&mut self, leaf: &mut dyn FnMut(&mut Self) -> Option<F>) -> Option<FilterExpr<F>> {
        self.fexpr_at(2, false, leaf)
    }

    fn fexpr_at<F>(
        &mut self,
        budget: u32,
        in_and: bool,
        leaf: &mut dyn FnMut(&mut Self) -> Option<F>,
    ) -> Option<FilterExpr<F>> {
        if budget == 0 || self.chance(0.6) {
            return leaf(self).map(FilterExpr::Leaf);
        }
        let n = self.rng.gen_range(2..=3);
        let and = !in_and && self.chance(0.5);
        let items: Vec<FilterExpr<F>> = (0..n)
            .filter_map(|_| self.fexpr_at(budget - 1, and, leaf))
            .collect();
        match items.len() {
            0 => None,
            1 => items.into_iter().next(),
            _ if and => Some(FilterExpr::And(items)),
            _ => Some(FilterExpr::Or(items)),
        }
    }

    // ---- patterns at nesting level `level` (1 = top)

    fn element_pattern(&mut self, level: usize) -> ElementPattern {
        let type_filter = self.maybe_type_filter(Category::Element);
        let ctx = Self::context(&type_filter);
        let filter = if self.chance(0.5) {
            self.fexpr(&mut |g| {
                let kind = g.element_kinds(level).choose(&mut g.rng).copied()?;
                g.element_leaf(kind, level, &ctx)
            })
        } else {
            None
        };
        ElementPattern {
            type_filter,
            filter,
        }
    }

    fn asset_pattern(&mut self) -> AssetPattern {
        let type_filter = self.maybe_type_filter(Category::Asset);
        let ctx = Self::context(&type_filter);
        let filter = if self.chance(0.5) {
            self.fexpr(&mut |g| g.property(Category::Asset, &ctx))
        } else {
            None
        };
        AssetPattern {
            type_filter,
            filter,
        }
    }

    fn boundary_pattern(&mut self, level: usize) -> BoundaryPattern {
        let type_filter = self.maybe_type_filter(Category::Boundary);
        let filter = if level < self.max_depth && self.chance(0.4) {
            self.fexpr(&mut |g| {
                let kind = *[
                    "boundary_contains",
                    "boundary_contains_no",
                    "boundary_contained_by",
                    "boundary_not_contained_by",
                ]
                .choose(&mut g.rng)
                .unwrap();
                Some(g.boundary_leaf(kind, level))
            })
        } else {
            None
        };
        BoundaryPattern {
            type_filter,
            filter,
        }
    }

    /// Connector patterns need their endpoints one level deeper.
    fn connector_pattern(&mut self, level: usize) -> ConnectorPattern {
        let type_filter = self.maybe_type_filter(Category::Connector);
        let ctx = Self::context(&type_filter);
        let source = self.pexpr(&mut |g| g.element_pattern(level + 1));
        let target = self.pexpr(&mut |g| g.element_pattern(level + 1));
        let filter = if self.chance(0.5) {
            self.fexpr(&mut |g| {
                let kind = g.connector_kinds(level).choose(&mut g.rng).copied()?;
                g.connector_leaf(kind, level, &ctx)
            })
        } else {
            None
        };
        ConnectorPattern {
            type_filter,
            source,
            target,
            filter,
        }
    }

    fn flow_pattern(&mut self, level: usize) -> FlowPattern {
        let source = self.pexpr(&mut |g| g.element_pattern(level + 1));
        let target = self.pexpr(&mut |g| g.element_pattern(level + 1));
        let filter = if self.chance(0.5) {
            self.fexpr(&mut |g| {
                let kind = g.flow_kinds(level).choose(&mut g.rng).copied()?;
                Some(g.flow_leaf(kind, level))
            })
        } else {
            None
        };
        FlowPattern {
            source,
            target,
            filter,
        }
    }

    // ---- filter leaves hosted by a pattern at `level`

    fn element_kinds(&self, level: usize) -> Vec<&'static str> {
        let mut kinds = vec!["property"];
        if level < self.max_depth {
            kinds.extend([
                "holds",
                "contains",
                "contains_no",
                "contained_by",
                "not_contained_by",
                "has_connector",
                "has_no_connector",
                "has_flow",
                "has_no_flow",
            ]);
        }
        kinds
    }

    fn connector_kinds(&self, level: usize) -> Vec<&'static str> {
        let mut kinds = vec!["property"];
        if level < self.max_depth {
            kinds.extend(["holds", "crosses"]);
        }
        kinds
    }

    fn flow_kinds(&self, level: usize) -> Vec<&'static str> {
        if level < self.max_depth {
            vec!["crosses", "includes", "includes_no", "includes_only"]
        } else {
            Vec::new()
        }
    }

    fn container(&mut self, level: usize) -> Container {
        if self.chance(0.5) {
            Container::Element(self.pexpr(&mut |g| g.element_pattern(level)))
        } else {
            Container::Boundary(self.pexpr(&mut |g| g.boundary_pattern(level)))
        }
    }

    fn endpoint(&mut self, level: usize) -> Endpoint {
        let p = self.pexpr(&mut |g| g.element_pattern(level));
        if self.chance(0.5) {
            Endpoint::Source(p)
        } else {
            Endpoint::Target(p)
        }
    }

    fn element_leaf(
        &mut self,
        kind: &str,
        level: usize,
        ctx: &Option<Vec<String>>,
    ) -> Option<ElementFilter> {
        let inner = level + 1;
        Some(match kind {
            "property" => ElementFilter::Property(self.property(Category::Element, ctx)?),
            "holds" => ElementFilter::Holds(self.pexpr(&mut |g| g.asset_pattern())),
            "contains" | "contains_no" => ElementFilter::Contains {
                negated: kind == "contains_no",
                inner: self.pexpr(&mut |g| g.element_pattern(inner)),
            },
            "contained_by" | "not_contained_by" => ElementFilter::ContainedBy {
                negated: kind == "not_contained_by",
                inner: self.container(inner),
            },
            "has_connector" | "has_no_connector" => {
                let type_filter = self.maybe_type_filter(Category::Connector);
                let ctx = Self::context(&type_filter);
                let endpoint = self.endpoint(inner);
                let filter = if self.chance(0.5) {
                    self.fexpr(&mut |g| {
                        let kind = g.connector_kinds(level).choose(&mut g.rng).copied()?;
                        g.connector_leaf(kind, level, &ctx)
                    })
                } else {
                    None
                };
                ElementFilter::Connector(HasConnector {
                    negated: kind == "has_no_connector",
                    type_filter,
                    endpoint,
                    filter,
                })
            }
            "has_flow" | "has_no_flow" => {
                let endpoint = self.endpoint(inner);
                let filter = if self.chance(0.5) {
                    self.fexpr(&mut |g| {
                        let kind = g.flow_kinds(level).choose(&mut g.rng).copied()?;
                        Some(g.flow_leaf(kind, level))
                    })
                } else {
                    None
                };
                ElementFilter::Flow(HasFlow {
                    negated: kind == "has_no_flow",
                    endpoint,
                    filter,
                })
            }
            other => panic!("not an element filter kind: {other}"),
        })
    }

    fn boundary_leaf(&mut self, kind: &str, level: usize) -> BoundaryFilter {
        let inner = level + 1;
        match kind {
            "boundary_contains" | "boundary_contains_no" => BoundaryFilter::Contains {
                negated: kind == "boundary_contains_no",
                inner: self.container(inner),
            },
            "boundary_contained_by" | "boundary_not_contained_by" => BoundaryFilter::ContainedBy {
                negated: kind == "boundary_not_contained_by",
                inner: self.pexpr(&mut |g| g.boundary_pattern(inner)),
            },
            other => panic!("not a boundary filter kind: {other}"),
        }
    }

    fn connector_leaf(
        &mut self,
        kind: &str,
        level: usize,
        ctx: &Option<Vec<String>>,
    ) -> Option<ConnectorFilter> {
        Some(match kind {
            "property" => ConnectorFilter::Property(self.property(Category::Connector, ctx)?),
            "holds" => ConnectorFilter::Holds(self.pexpr(&mut |g| g.asset_pattern())),
            "crosses" => ConnectorFilter::Crosses(self.container(level + 1)),
            other => panic!("not a connector filter kind: {other}"),
        })
    }

    fn flow_leaf(&mut self, kind: &str, level: usize) -> FlowFilter {
        let inner = level + 1;
        match kind {
            "crosses" => FlowFilter::Crosses(self.container(inner)),
            _ => {
                let mode = match kind {
                    "includes" => IncludesMode::Some,
                    "includes_no" => IncludesMode::No,
                    "includes_only" => IncludesMode::Only,
                    other => panic!("not a flow filter kind: {other}"),
                };
                // A connector member needs its own endpoints one level deeper.
                let member = if inner < self.max_depth && self.chance(0.5) {
                    Member::Connector(self.pexpr(&mut |g| g.connector_pattern(inner)))
                } else {
                    Member::Element(self.pexpr(&mut |g| g.element_pattern(inner)))
                };
                FlowFilter::Includes {
                    mode,
                    inner: member,
                }
            }
        }
    }

    /// A lone element filter of `kind`, hosted at the top level.
    pub fn element_filter(&mut self, kind: &str) -> Option<ElementFilter> {
        self.element_leaf(kind, 1, &None)
    }

    /// A lone boundary filter of `kind`, hosted at the top level.
    pub fn boundary_filter(&mut self, kind: &str) -> BoundaryFilter {
        self.boundary_leaf(kind, 1)
    }

    /// A lone flow filter of `kind`, hosted at the top level.
    pub fn flow_filter(&mut self, kind: &str) -> FlowFilter {
        self.flow_leaf(kind, 1)
    }

    // ---- whole rules

    /// A top-level pattern of any kind.
    pub fn pattern(&mut self) -> Pattern {
        let mut kinds = vec!["element", "asset", "boundary"];
        if self.max_depth > 1 {
            kinds.extend(["connector", "flow"]);
        }
        match *kinds.choose(&mut self.rng).unwrap() {
            "element" => Pattern::Element(self.element_pattern(1)),
            "asset" => Pattern::Asset(self.asset_pattern()),
            "boundary" => Pattern::Boundary(self.boundary_pattern(1)),
            "connector" => Pattern::Connector(self.connector_pattern(1)),
            _ => Pattern::Flow(self.flow_pattern(1)),
        }
    }

    /// A top-level pattern whose filter uses `kind` (one of
    /// [`FILTER_KINDS`]), or `None` if the specification gives no way to.
    pub fn pattern_using(&mut self, kind: &str) -> Option<Pattern> {
        let level = 1;
        if kind == "type_filter" {
            let mut p = self.element_pattern(level);
            p.type_filter = Some(self.type_filter(Category::Element));
            // Keep any property filters valid under the new context.
            p.filter = None;
            return Some(Pattern::Element(p));
        }
        if kind.starts_with("boundary_") {
            let mut p = self.boundary_pattern(level);
            let leaf = self.boundary_leaf(kind, level);
            p.filter = Some(self.with_forced(leaf, p.filter.take()));
            return Some(Pattern::Boundary(p));
        }
        if kind.starts_with("includes") || (kind == "crosses" && self.chance(0.5)) {
            let mut p = self.flow_pattern(level);
            let leaf = self.flow_leaf(kind, level);
            p.filter = Some(self.with_forced(leaf, p.filter.take()));
            return Some(Pattern::Flow(p));
        }
        let on_connector = kind == "crosses" || (matches!(kind, "property" | "holds") && self.chance(0.3));
        if on_connector {
            let mut p = self.connector_pattern(level);
            let ctx = Self::context(&p.type_filter);
            let leaf = self.connector_leaf(kind, level, &ctx)?;
            p.filter = Some(self.with_forced(leaf, p.filter.take()));
            return Some(Pattern::Connector(p));
        }
        if kind == "property" && self.chance(0.3) {
            let mut p = self.asset_pattern();
            let ctx = Self::context(&p.type_filter);
            let leaf = self.property(Category::Asset, &ctx)?;
            p.filter = Some(self.with_forced(leaf, p.filter.take()));
            return Some(Pattern::Asset(p));
        }
        let mut p = self.element_pattern(level);
        let ctx = Self::context(&p.type_filter);
        let leaf = self.element_leaf(kind, level, &ctx)?;
        p.filter = Some(self.with_forced(leaf, p.filter.take()));
        Some(Pattern::Element(p))
    }

    /// `leaf`, and-ed with `rest` when there is one.
    fn with_forced<F>(&mut self, leaf: F, rest: Option<FilterExpr<F>>) -> FilterExpr<F> {
        match rest {
            None => FilterExpr::Leaf(leaf),
            Some(FilterExpr::And(mut items)) => {
                let at = self.rng.gen_range(0..=items.len());
                items.insert(at, FilterExpr::Leaf(leaf));
                FilterExpr::And(items)
            }
            Some(other) => FilterExpr::And(vec![FilterExpr::Leaf(leaf), other]),
        }
    }

    /// A whole rule.
    pub fn query(&mut self) -> Query {
        self.query_at(2)
    }

    fn query_at(&mut self, budget: u32) -> Query {
        self.query_from(budget, false, &mut |g| Query::Pattern(g.pattern()))
    }

    fn query_from(
        &mut self,
        budget: u32,
        in_and: bool,
        leaf: &mut dyn FnMut(&mut Self) -> Query,
    ) -> Query {
        if budget == 0 || self.chance(0.6) {
            return leaf(self);
        }
        let n = self.rng.gen_range(2..=3);
        let and = !in_and && self.chance(0.5);
        let items = (0..n)
            .map(|_| self.query_from(budget - 1, and, leaf))
            .collect();
        if and {
            Query::And(items)
        } else {
            Query::Or(items)
        }
    }

    /// A rule that uses each of `kinds` at least once, combined with `&` or
    /// `|` at query level.
    pub fn query_using(&mut self, kinds: &[&str]) -> Option<Query> {
        let mut items = Vec::new();
        for kind in kinds {
            items.push(Query::Pattern(self.pattern_using(kind)?));
        }
        Some(match items.len() {
            0 => self.query(),
            1 => items.pop().unwrap(),
            _ if self.chance(0.5) => Query::And(items),
            _ => Query::Or(items),
        })
    }
}
