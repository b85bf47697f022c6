//! Evaluation of rules over a diagram.
//!
//! Every pattern evaluates to a set of match tuples `(x, M)`: the component
//! or flow `x` the pattern stands for, and the set `M` of everything the
//! match involves. Filters are evaluated under a context (the component or
//! flow being filtered) and yield the possible `M` sets for it; an empty
//! result means the context is rejected.
//!
//! Inner pattern results and flow enumerations are cached for the duration
//! of one public call. Nothing is shared between calls, so evaluating
//! several rules concurrently is safe and gives the sequential result.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::dsl::*;
use crate::flows::{enumerate_flows, Flow, Uniqueness};
use crate::model::{Category, ComponentRef, Containment, ContentSpecification, Diagram};

/// Components and flows involved in one match.
pub type Affected = BTreeSet<ComponentRef>;

/// One match: a focus and the affected set.
///
/// The focus is `None` for the results of `&` at query level, where the
/// combined match stands for no single component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MatchTuple {
    pub focus: Option<ComponentRef>,
    pub affected: Affected,
}

impl MatchTuple {
    pub fn new(focus: ComponentRef, affected: Affected) -> Self {
        MatchTuple {
            focus: Some(focus),
            affected,
        }
    }
}

/// Evaluates a whole rule.
pub fn evaluate_query(
    query: &Query,
    diagram: &Diagram,
    spec: &ContentSpecification,
    mode: Uniqueness,
) -> BTreeSet<MatchTuple> {
    Evaluator::new(diagram, spec, mode).query(query)
}

/// Evaluates a stand-alone pattern.
pub fn eval_pattern(
    pattern: &Pattern,
    diagram: &Diagram,
    spec: &ContentSpecification,
    mode: Uniqueness,
) -> BTreeSet<MatchTuple> {
    Evaluator::new(diagram, spec, mode).pattern(pattern)
}

/// Components of `category` accepted by a type filter, each with an empty
/// affected set.
pub fn eval_type_filter(
    filter: &TypeFilter,
    category: Category,
    diagram: &Diagram,
    spec: &ContentSpecification,
) -> BTreeSet<MatchTuple> {
    let ev = Evaluator::new(diagram, spec, Uniqueness::default());
    diagram
        .ids(category)
        .filter(|id| ev.type_accepts(filter, category, id))
        .map(|id| MatchTuple::new(ComponentRef::of(category, id), Affected::new()))
        .collect()
}

/// Filters of an element pattern, evaluated for element `context`.
pub fn eval_element_filter(
    filter: &FilterExpr<ElementFilter>,
    context: &str,
    diagram: &Diagram,
    spec: &ContentSpecification,
    mode: Uniqueness,
) -> BTreeSet<MatchTuple> {
    let ev = Evaluator::new(diagram, spec, mode);
    tuples(ComponentRef::Element(context.into()), ev.element_filter(filter, context))
}

/// Property filters of an asset pattern, evaluated for asset `context`.
pub fn eval_asset_filter(
    filter: &FilterExpr<PropertyFilter>,
    context: &str,
    diagram: &Diagram,
    spec: &ContentSpecification,
) -> BTreeSet<MatchTuple> {
    let ev = Evaluator::new(diagram, spec, Uniqueness::default());
    let r = ev.filter(filter, &mut |p| ev.property(p, context));
    tuples(ComponentRef::Asset(context.into()), r)
}

/// Filters of a boundary pattern, evaluated for boundary `context`.
pub fn eval_boundary_filter(
    filter: &FilterExpr<BoundaryFilter>,
    context: &str,
    diagram: &Diagram,
    spec: &ContentSpecification,
) -> BTreeSet<MatchTuple> {
    let ev = Evaluator::new(diagram, spec, Uniqueness::default());
    let r = ev.filter(filter, &mut |f| ev.boundary_leaf(f, context));
    tuples(ComponentRef::Boundary(context.into()), r)
}

/// Filters of a connector pattern, evaluated for connector `context`.
pub fn eval_connector_filter(
    filter: &FilterExpr<ConnectorFilter>,
    context: &str,
    diagram: &Diagram,
    spec: &ContentSpecification,
    mode: Uniqueness,
) -> BTreeSet<MatchTuple> {
    let ev = Evaluator::new(diagram, spec, mode);
    tuples(ComponentRef::Connector(context.into()), ev.connector_filter(filter, context))
}

/// Filters of a flow pattern, evaluated for `flow`.
pub fn eval_flow_filter(
    filter: &FilterExpr<FlowFilter>,
    flow: &Flow,
    diagram: &Diagram,
    spec: &ContentSpecification,
    mode: Uniqueness,
) -> BTreeSet<MatchTuple> {
    let ev = Evaluator::new(diagram, spec, mode);
    tuples(ComponentRef::Flow(flow.clone()), ev.flow_filter(filter, flow))
}

fn tuples(focus: ComponentRef, ms: Ms) -> BTreeSet<MatchTuple> {
    ms.into_iter()
        .map(|m| MatchTuple::new(focus.clone(), m))
        .collect()
}

/// The affected sets a filter yields for one context.
type Ms = BTreeSet<Affected>;

/// Pattern results keyed by the matched component or flow.
type Hits<K> = BTreeMap<K, Ms>;

fn unit() -> Ms {
    BTreeSet::from([Affected::new()])
}

fn just(r: ComponentRef) -> Ms {
    BTreeSet::from([Affected::from([r])])
}

/// Pairwise unions of two families of affected sets.
fn product(a: &Ms, b: &Ms) -> Ms {
    let mut out = Ms::new();
    for x in a {
        for y in b {
            out.insert(x.union(y).cloned().collect());
        }
    }
    out
}

fn merge<K: Ord + Clone>(into: &mut Hits<K>, from: &Hits<K>) {
    for (k, ms) in from {
        into.entry(k.clone()).or_default().extend(ms.iter().cloned());
    }
}

/// Adds `extra` to every affected set.
fn with(ms: Ms, extra: &[ComponentRef]) -> Ms {
    ms.into_iter()
        .map(|mut m| {
            m.extend(extra.iter().cloned());
            m
        })
        .collect()
}

fn negate(positive: Ms, context: ComponentRef) -> Ms {
    if positive.is_empty() {
        just(context)
    } else {
        Ms::new()
    }
}

type Cache<K> = RefCell<HashMap<usize, Rc<Hits<K>>>>;

struct Evaluator<'d> {
    diagram: &'d Diagram,
    spec: &'d ContentSpecification,
    mode: Uniqueness,
    // Keyed by node address; valid only while the evaluated tree is borrowed.
    elements: Cache<String>,
    assets: Cache<String>,
    boundaries: Cache<String>,
    connectors: Cache<String>,
    flows: RefCell<HashMap<(String, String), Rc<Vec<Flow>>>>,
}

impl<'d> Evaluator<'d> {
    fn new(diagram: &'d Diagram, spec: &'d ContentSpecification, mode: Uniqueness) -> Self {
        Evaluator {
            diagram,
            spec,
            mode,
            elements: Default::default(),
            assets: Default::default(),
            boundaries: Default::default(),
            connectors: Default::default(),
            flows: Default::default(),
        }
    }

    fn flows(&self, src: &str, tgt: &str) -> Rc<Vec<Flow>> {
        let key = (src.to_owned(), tgt.to_owned());
        if let Some(f) = self.flows.borrow().get(&key) {
            return f.clone();
        }
        let f = Rc::new(enumerate_flows(self.diagram, src, tgt, self.mode).unwrap_or_default());
        self.flows.borrow_mut().insert(key, f.clone());
        f
    }

    // ---- query level

    fn query(&self, q: &Query) -> BTreeSet<MatchTuple> {
        match q {
            Query::Pattern(p) => self.pattern(p),
            Query::Or(items) => items.iter().flat_map(|q| self.query(q)).collect(),
            Query::And(items) => {
                let mut acc = unit();
                for q in items {
                    let ms: Ms = self.query(q).into_iter().map(|t| t.affected).collect();
                    acc = product(&acc, &ms);
                    if acc.is_empty() {
                        break;
                    }
                }
                acc.into_iter()
                    .map(|affected| MatchTuple {
                        focus: None,
                        affected,
                    })
                    .collect()
            }
        }
    }

    fn pattern(&self, p: &Pattern) -> BTreeSet<MatchTuple> {
        fn out(
            hits: &Hits<String>,
            category: Category,
        ) -> impl Iterator<Item = MatchTuple> + '_ {
            hits.iter().flat_map(move |(id, ms)| {
                ms.iter()
                    .map(move |m| MatchTuple::new(ComponentRef::of(category, id.clone()), m.clone()))
            })
        }
        match p {
            Pattern::Element(p) => out(&self.element(p), Category::Element).collect(),
            Pattern::Asset(p) => out(&self.asset(p), Category::Asset).collect(),
            Pattern::Boundary(p) => out(&self.boundary(p), Category::Boundary).collect(),
            Pattern::Connector(p) => out(&self.connector(p), Category::Connector).collect(),
            Pattern::Flow(p) => self
                .flow(p)
                .into_iter()
                .flat_map(|(flow, ms)| {
                    ms.into_iter()
                        .map(move |m| MatchTuple::new(ComponentRef::Flow(flow.clone()), m))
                })
                .collect(),
        }
    }

    // ---- patterns

    fn cached<P>(
        &self,
        cache: &Cache<String>,
        p: &P,
        compute: impl FnOnce() -> Hits<String>,
    ) -> Rc<Hits<String>> {
        let key = p as *const P as usize;
        if let Some(h) = cache.borrow().get(&key) {
            return h.clone();
        }
        let h = Rc::new(compute());
        cache.borrow_mut().insert(key, h.clone());
        h
    }

    fn alt<P>(
        &self,
        e: &PatternExpr<P>,
        single: impl Fn(&P) -> Rc<Hits<String>>,
    ) -> Rc<Hits<String>> {
        match e {
            PatternExpr::Single(p) => single(p),
            PatternExpr::Alt(_) => {
                let mut out = Hits::new();
                for p in e.leaves() {
                    merge(&mut out, &single(p));
                }
                Rc::new(out)
            }
        }
    }

    fn type_accepts(&self, t: &TypeFilter, category: Category, id: &str) -> bool {
        let actual = self.diagram.type_of(category, id).unwrap_or_default();
        let any = t
            .names
            .iter()
            .any(|q| self.spec.type_matches(category, actual, q));
        any != t.op.is_negated()
    }

    /// Shared shape of element, asset and boundary patterns.
    fn simple<F>(
        &self,
        category: Category,
        type_filter: &Option<TypeFilter>,
        filter: &Option<FilterExpr<F>>,
        eval: impl Fn(&FilterExpr<F>, &str) -> Ms,
    ) -> Hits<String> {
        let mut hits = Hits::new();
        for id in self.diagram.ids(category) {
            if type_filter
                .as_ref()
                .is_some_and(|t| !self.type_accepts(t, category, id))
            {
                continue;
            }
            let ms = filter.as_ref().map_or_else(unit, |f| eval(f, id));
            if !ms.is_empty() {
                hits.insert(
                    id.to_owned(),
                    with(ms, &[ComponentRef::of(category, id)]),
                );
            }
        }
        hits
    }

    fn element(&self, p: &ElementPattern) -> Rc<Hits<String>> {
        self.cached(&self.elements, p, || {
            self.simple(Category::Element, &p.type_filter, &p.filter, |f, id| {
                self.element_filter(f, id)
            })
        })
    }

    fn asset(&self, p: &AssetPattern) -> Rc<Hits<String>> {
        self.cached(&self.assets, p, || {
            self.simple(Category::Asset, &p.type_filter, &p.filter, |f, id| {
                self.filter(f, &mut |prop| self.property(prop, id))
            })
        })
    }

    fn boundary(&self, p: &BoundaryPattern) -> Rc<Hits<String>> {
        self.cached(&self.boundaries, p, || {
            self.simple(Category::Boundary, &p.type_filter, &p.filter, |f, id| {
                self.filter(f, &mut |leaf| self.boundary_leaf(leaf, id))
            })
        })
    }

    fn elements(&self, e: &PatternExpr<ElementPattern>) -> Rc<Hits<String>> {
        self.alt(e, |p| self.element(p))
    }

    fn assets(&self, e: &PatternExpr<AssetPattern>) -> Rc<Hits<String>> {
        self.alt(e, |p| self.asset(p))
    }

    fn boundaries(&self, e: &PatternExpr<BoundaryPattern>) -> Rc<Hits<String>> {
        self.alt(e, |p| self.boundary(p))
    }

    fn connectors(&self, e: &PatternExpr<ConnectorPattern>) -> Rc<Hits<String>> {
        self.alt(e, |p| self.connector(p))
    }

    fn connector(&self, p: &ConnectorPattern) -> Rc<Hits<String>> {
        self.cached(&self.connectors, p, || {
            let sources = self.elements(&p.source);
            let targets = self.elements(&p.target);
            let mut hits = Hits::new();
            for r in self.diagram.connectors() {
                if p
                    .type_filter
                    .as_ref()
                    .is_some_and(|t| !self.type_accepts(t, Category::Connector, r))
                {
                    continue;
                }
                let (Some(m1), Some(m2)) = (
                    self.diagram.source(r).and_then(|s| sources.get(s)),
                    self.diagram.target(r).and_then(|t| targets.get(t)),
                ) else {
                    continue;
                };
                let m3 = p
                    .filter
                    .as_ref()
                    .map_or_else(unit, |f| self.connector_filter(f, r));
                let ms = product(&product(m1, m2), &m3);
                if !ms.is_empty() {
                    hits.insert(r.to_owned(), with(ms, &[ComponentRef::Connector(r.into())]));
                }
            }
            hits
        })
    }

    fn flow(&self, p: &FlowPattern) -> Hits<Flow> {
        let sources = self.elements(&p.source);
        let targets = self.elements(&p.target);
        let mut hits = Hits::new();
        for (n1, m1) in sources.iter() {
            for (n2, m2) in targets.iter() {
                for flow in self.flows(n1, n2).iter() {
                    let m3 = p
                        .filter
                        .as_ref()
                        .map_or_else(unit, |f| self.flow_filter(f, flow));
                    let ms = product(&product(m1, m2), &m3);
                    if !ms.is_empty() {
                        let own = [ComponentRef::Flow(flow.clone())];
                        hits.entry(flow.clone())
                            .or_insert_with(Ms::new)
                            .extend(with(ms, &own));
                    }
                }
            }
        }
        hits
    }

    // ---- filters

    fn filter<F>(&self, e: &FilterExpr<F>, leaf: &mut dyn FnMut(&F) -> Ms) -> Ms {
        match e {
            FilterExpr::Leaf(f) => leaf(f),
            FilterExpr::Or(items) => items.iter().flat_map(|e| self.filter(e, leaf)).collect(),
            FilterExpr::And(items) => {
                let mut acc = unit();
                for e in items {
                    acc = product(&acc, &self.filter(e, leaf));
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
        }
    }

    fn property(&self, p: &PropertyFilter, c: &str) -> Ms {
        let Ok(Some(value)) = self.diagram.property_value(c, &p.key) else {
            return Ms::new();
        };
        let listed = p.values.iter().any(|v| v == value);
        if listed != p.op.is_negated() {
            just(self.diagram.component_ref(c).expect("context is a component"))
        } else {
            Ms::new()
        }
    }

    fn holds(&self, e: &PatternExpr<AssetPattern>, c: &str) -> Ms {
        let assets = self.assets(e);
        self.diagram
            .asset_links()
            .iter()
            .filter(|(holder, _)| holder == c)
            .filter_map(|(_, y)| assets.get(y))
            .flatten()
            .cloned()
            .collect()
    }

    /// Affected sets of hits `w` with `related(w)`.
    fn related(&self, hits: &Hits<String>, related: impl Fn(&str) -> bool) -> Ms {
        hits.iter()
            .filter(|(w, _)| related(w))
            .flat_map(|(_, ms)| ms.iter().cloned())
            .collect()
    }

    fn element_filter(&self, e: &FilterExpr<ElementFilter>, c: &str) -> Ms {
        self.filter(e, &mut |f| self.element_leaf(f, c))
    }

    fn element_leaf(&self, f: &ElementFilter, c: &str) -> Ms {
        let d = self.diagram;
        let me = || ComponentRef::Element(c.to_owned());
        match f {
            ElementFilter::Property(p) => self.property(p, c),
            ElementFilter::Holds(a) => self.holds(a, c),
            ElementFilter::Contains { negated, inner } => {
                let hits = self.elements(inner);
                let ms = self.related(&hits, |n| d.in_closure(Containment::Element, c, n));
                if *negated {
                    negate(ms, me())
                } else {
                    ms
                }
            }
            ElementFilter::ContainedBy { negated, inner } => {
                let ms = match inner {
                    Container::Element(e) => self.related(&self.elements(e), |n| {
                        d.in_closure(Containment::Element, n, c)
                    }),
                    Container::Boundary(e) => self.related(&self.boundaries(e), |a| {
                        d.in_closure(Containment::Boundary, a, c)
                    }),
                };
                if *negated {
                    negate(ms, me())
                } else {
                    ms
                }
            }
            ElementFilter::Connector(h) => {
                let ms = self.has_connector(h, c);
                if h.negated {
                    negate(ms, me())
                } else {
                    ms
                }
            }
            ElementFilter::Flow(h) => {
                let ms = self.has_flow(h, c);
                if h.negated {
                    negate(ms, me())
                } else {
                    ms
                }
            }
        }
    }

    fn has_connector(&self, h: &HasConnector, c: &str) -> Ms {
        let d = self.diagram;
        let hits = self.elements(h.endpoint.pattern());
        let (candidates, incoming) = match h.endpoint {
            Endpoint::Source(_) => (d.incoming(c), true),
            Endpoint::Target(_) => (d.outgoing(c), false),
        };
        let mut out = Ms::new();
        for r in candidates {
            if h
                .type_filter
                .as_ref()
                .is_some_and(|t| !self.type_accepts(t, Category::Connector, r))
            {
                continue;
            }
            let other = if incoming { d.source(r) } else { d.target(r) };
            let Some(m1) = other.and_then(|n| hits.get(n)) else {
                continue;
            };
            let m2 = h
                .filter
                .as_ref()
                .map_or_else(unit, |f| self.connector_filter(f, r));
            out.extend(with(product(m1, &m2), &[ComponentRef::Connector(r.clone())]));
        }
        out
    }

    fn has_flow(&self, h: &HasFlow, c: &str) -> Ms {
        let hits = self.elements(h.endpoint.pattern());
        let mut out = Ms::new();
        for (n1, m1) in hits.iter() {
            let flows = match h.endpoint {
                Endpoint::Source(_) => self.flows(n1, c),
                Endpoint::Target(_) => self.flows(c, n1),
            };
            for flow in flows.iter() {
                let m2 = h
                    .filter
                    .as_ref()
                    .map_or_else(unit, |f| self.flow_filter(f, flow));
                out.extend(with(product(m1, &m2), &[ComponentRef::Flow(flow.clone())]));
            }
        }
        out
    }

    fn boundary_leaf(&self, f: &BoundaryFilter, c: &str) -> Ms {
        let d = self.diagram;
        let (negated, ms) = match f {
            BoundaryFilter::Contains { negated, inner } => {
                let hits = match inner {
                    Container::Element(e) => self.elements(e),
                    Container::Boundary(e) => self.boundaries(e),
                };
                (
                    *negated,
                    self.related(&hits, |w| d.in_closure(Containment::Boundary, c, w)),
                )
            }
            BoundaryFilter::ContainedBy { negated, inner } => (
                *negated,
                self.related(&self.boundaries(inner), |b| {
                    d.in_closure(Containment::Boundary, b, c)
                }),
            ),
        };
        if negated {
            negate(ms, ComponentRef::Boundary(c.to_owned()))
        } else {
            ms
        }
    }

    fn connector_filter(&self, e: &FilterExpr<ConnectorFilter>, r: &str) -> Ms {
        self.filter(e, &mut |f| match f {
            ConnectorFilter::Property(p) => self.property(p, r),
            ConnectorFilter::Holds(a) => self.holds(a, r),
            ConnectorFilter::Crosses(w) => self.crosses(w, &[r]),
        })
    }

    /// Affected sets of the containers crossed by any of `connectors`.
    fn crosses(&self, w: &Container, connectors: &[&str]) -> Ms {
        let d = self.diagram;
        let (hits, relation) = match w {
            Container::Element(e) => (self.elements(e), Containment::Element),
            Container::Boundary(e) => (self.boundaries(e), Containment::Boundary),
        };
        self.related(&hits, |w| {
            connectors.iter().any(|r| {
                let inside = |n: Option<&str>| n.is_some_and(|n| d.in_closure(relation, w, n));
                inside(d.source(r)) != inside(d.target(r))
            })
        })
    }

    fn flow_filter(&self, e: &FilterExpr<FlowFilter>, p: &Flow) -> Ms {
        self.filter(e, &mut |f| match f {
            FlowFilter::Crosses(w) => {
                let connectors: Vec<&str> = p.connector_seq().collect();
                self.crosses(w, &connectors)
            }
            FlowFilter::Includes { mode, inner } => {
                let (hits, members) = match inner {
                    Member::Element(e) => (self.elements(e), p.elements()),
                    Member::Connector(e) => (self.connectors(e), p.connectors()),
                };
                match mode {
                    IncludesMode::Some => self.related(&hits, |x| members.contains(x)),
                    IncludesMode::No => negate(
                        self.related(&hits, |x| members.contains(x)),
                        ComponentRef::Flow(p.clone()),
                    ),
                    IncludesMode::Only => {
                        let mut acc = unit();
                        for x in members {
                            let Some(ms) = hits.get(x) else {
                                return Ms::new();
                            };
                            acc = product(&acc, ms);
                        }
                        acc
                    }
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn el(id: &str) -> ComponentRef {
        ComponentRef::Element(id.into())
    }
    fn con(id: &str) -> ComponentRef {
        ComponentRef::Connector(id.into())
    }
    fn asset(id: &str) -> ComponentRef {
        ComponentRef::Asset(id.into())
    }
    fn bnd(id: &str) -> ComponentRef {
        ComponentRef::Boundary(id.into())
    }
    fn flow(seq: &[&str]) -> ComponentRef {
        ComponentRef::Flow(Flow::from_sequence(seq.iter().map(|s| s.to_string()).collect()).unwrap())
    }

    fn t(focus: ComponentRef, m: &[ComponentRef]) -> MatchTuple {
        MatchTuple::new(focus, m.iter().cloned().collect())
    }

    fn run(src: &str) -> BTreeSet<MatchTuple> {
        let q = parse_query(src).unwrap();
        evaluate_query(
            &q,
            &fixtures::mobile_diagram(),
            &fixtures::mobile_spec(),
            Uniqueness::Elements,
        )
    }

    fn set(v: Vec<MatchTuple>) -> BTreeSet<MatchTuple> {
        v.into_iter().collect()
    }

    fn element_pattern(src: &str) -> FilterExpr<ElementFilter> {
        let Query::Pattern(Pattern::Element(p)) = parse_query(&format!("Element {{ {src} }}")).unwrap()
        else {
            panic!()
        };
        p.filter.unwrap()
    }

    fn on_element(filter: &str, c: &str) -> BTreeSet<MatchTuple> {
        eval_element_filter(
            &element_pattern(filter),
            c,
            &fixtures::mobile_diagram(),
            &fixtures::mobile_spec(),
            Uniqueness::Elements,
        )
    }

    fn connector_filter(src: &str) -> FilterExpr<ConnectorFilter> {
        let Query::Pattern(Pattern::Connector(p)) = parse_query(&format!(
            "Connector {{ Source Element & Target Element & {src} }}"
        ))
        .unwrap() else {
            panic!()
        };
        p.filter.unwrap()
    }

    fn flow_filter(src: &str) -> FilterExpr<FlowFilter> {
        let Query::Pattern(Pattern::Flow(p)) = parse_query(&format!(
            "Flow {{ Source Element & Target Element & {src} }}"
        ))
        .unwrap() else {
            panic!()
        };
        p.filter.unwrap()
    }

    fn on_flow(filter: &str, seq: &[&str]) -> BTreeSet<MatchTuple> {
        let d = fixtures::mobile_diagram();
        let p = Flow::new(&d, seq.iter().map(|s| s.to_string()).collect()).unwrap();
        eval_flow_filter(
            &flow_filter(filter),
            &p,
            &d,
            &fixtures::mobile_spec(),
            Uniqueness::Elements,
        )
    }

    const P: [&str; 5] = ["n4", "r2", "n5", "r3", "n6"];
    const P2: [&str; 5] = ["n6", "r4", "n5", "r5", "n3"];

    #[test]
    fn bare_and_typed_patterns() {
        let all = run("Element");
        assert_eq!(all.len(), 6);
        assert!(all.contains(&t(el("n1"), &[el("n1")])));
        assert_eq!(run(r#"Element : "Software""#), set(vec![t(el("n2"), &[el("n2")])]));
        assert_eq!(
            run(r#"Element : "External Interactor""#),
            set(vec![t(el("n1"), &[el("n1")]), t(el("n3"), &[el("n3")])])
        );
        assert_eq!(
            run(r#"Asset { "Encrypted" = "No" }"#),
            set(vec![t(asset("y1"), &[asset("y1")])])
        );
        assert_eq!(
            run(r#"Asset { "Encrypted" = "Yes" }"#),
            set(vec![t(asset("y2"), &[asset("y2")])])
        );
    }

    #[test]
    fn type_filter_universes() {
        let d = fixtures::mobile_diagram();
        let s = fixtures::mobile_spec();
        let tf = |src: &str| {
            let Query::Pattern(Pattern::Element(p)) = parse_query(&format!("Element {src}")).unwrap()
            else {
                panic!()
            };
            p.type_filter.unwrap()
        };
        let ids = |r: BTreeSet<MatchTuple>| -> Vec<String> {
            assert!(r.iter().all(|t| t.affected.is_empty()));
            r.into_iter().map(|t| t.focus.unwrap().to_string()).collect()
        };
        assert_eq!(
            ids(eval_type_filter(&tf(r#": "External Interactor""#), Category::Element, &d, &s)),
            ["n1", "n3"]
        );
        assert_eq!(
            ids(eval_type_filter(&tf(r#"!= "Wireless""#), Category::Connector, &d, &s)),
            ["r2", "r3", "r4", "r5"]
        );
        assert_eq!(
            ids(eval_type_filter(&tf(r#"in ["Server", "Database"]"#), Category::Element, &d, &s)),
            ["n4", "n6"]
        );
    }

    #[test]
    fn connector_pattern() {
        assert_eq!(
            run(r#"Connector : "Wireless" { Source Element & Target Element & "Protocol" = "HTTP" }"#),
            set(vec![
                t(con("r1"), &[con("r1"), el("n2"), el("n3")]),
                t(con("r6"), &[con("r6"), el("n3"), el("n2")]),
            ])
        );
    }

    #[test]
    fn query_combinators() {
        assert_eq!(
            run(r#"Element : "Database" & Asset { "Encrypted" = "No" }"#),
            set(vec![MatchTuple {
                focus: None,
                affected: [el("n6"), asset("y1")].into(),
            }])
        );
        assert_eq!(
            run(r#"(Element : "Toaster" | Element : "Database")"#),
            set(vec![t(el("n6"), &[el("n6")])])
        );
        assert!(run(r#"Element : "Toaster" & Element"#).is_empty());
    }

    #[test]
    fn flow_patterns() {
        assert_eq!(
            run(r#"Flow { Source Element : "Server" & Target Element : "Database" }"#),
            set(vec![t(flow(&P), &[flow(&P), el("n4"), el("n6")])])
        );
        assert_eq!(
            run(r#"Flow { Source Element : "Server" & Target Element : "Database" & Includes Element : "REST Interface" }"#),
            set(vec![t(flow(&P), &[flow(&P), el("n4"), el("n5"), el("n6")])])
        );
        assert!(run(r#"Flow { Source Element : "Mobile Phone" & Target Element : "Database" }"#)
            .is_empty());
    }

    #[test]
    fn property_filters() {
        let d = fixtures::mobile_diagram();
        let s = fixtures::mobile_spec();
        let on_asset = |src: &str, c: &str| {
            let Query::Pattern(Pattern::Asset(p)) = parse_query(&format!("Asset {{ {src} }}")).unwrap()
            else {
                panic!()
            };
            eval_asset_filter(&p.filter.unwrap(), c, &d, &s)
        };
        assert_eq!(
            on_asset(r#""Encrypted" = "No""#, "y1"),
            set(vec![t(asset("y1"), &[asset("y1")])])
        );
        assert!(on_element(r#""OS" = "Android""#, "n2").is_empty());
        assert!(on_element(r#""OS" != "IOS""#, "n2").is_empty());
        assert!(on_element(r#""OS" not in ["IOS"]"#, "n2").is_empty());
        assert_eq!(on_element(r#""OS" != "IOS""#, "n1").len(), 1);
        let r3 = eval_connector_filter(
            &connector_filter(r#""Protocol" in ["HTTP", "HTTPS"]"#),
            "r3",
            &d,
            &s,
            Uniqueness::Elements,
        );
        assert_eq!(r3, set(vec![t(con("r3"), &[con("r3")])]));
    }

    #[test]
    fn holds() {
        let d = fixtures::mobile_diagram();
        let s = fixtures::mobile_spec();
        let r1 = eval_connector_filter(
            &connector_filter(r#"Holds Asset : "User Credentials""#),
            "r1",
            &d,
            &s,
            Uniqueness::Elements,
        );
        assert_eq!(r1, set(vec![t(con("r1"), &[asset("y1")])]));
        assert!(on_element("Holds Asset", "n1").is_empty());
        assert_eq!(
            on_element(r#"Holds Asset { "Encrypted" = "Yes" }"#, "n6"),
            set(vec![t(el("n6"), &[asset("y2")])])
        );
    }

    #[test]
    fn relations() {
        assert_eq!(
            on_element(r#"Contains Element : "Database""#, "n4"),
            set(vec![t(el("n4"), &[el("n6")])])
        );
        assert_eq!(
            on_element(r#"Contained by Boundary : "Untrusted Environment""#, "n2"),
            set(vec![t(el("n2"), &[bnd("a1")])])
        );
        assert_eq!(
            on_element("Contains no Element", "n3"),
            set(vec![t(el("n3"), &[el("n3")])])
        );
        assert_eq!(
            on_element("Contained by Element", "n2"),
            set(vec![t(el("n2"), &[el("n1")])])
        );
        let Query::Pattern(Pattern::Boundary(b)) =
            parse_query(r#"Boundary { Contains Element : "Server" }"#).unwrap()
        else {
            panic!()
        };
        assert_eq!(
            eval_boundary_filter(
                &b.filter.unwrap(),
                "a2",
                &fixtures::mobile_diagram(),
                &fixtures::mobile_spec()
            ),
            set(vec![t(bnd("a2"), &[el("n4")])])
        );
    }

    #[test]
    fn has_connector() {
        assert_eq!(
            on_element(r#"Has Connector { Source Element : "Application" }"#, "n3"),
            set(vec![t(el("n3"), &[con("r1"), el("n2")])])
        );
        assert_eq!(
            on_element(r#"Has No Connector { Source Element : "Mobile Phone" }"#, "n6"),
            set(vec![t(el("n6"), &[el("n6")])])
        );
        assert_eq!(
            on_element(r#"Has Connector : "Wireless" { Target Element : "Cell Tower" }"#, "n2"),
            set(vec![t(el("n2"), &[con("r1"), el("n3")])])
        );
    }

    #[test]
    fn has_flow() {
        assert_eq!(
            on_element(r#"Has Flow { Source Element : "Server" }"#, "n6"),
            set(vec![t(el("n6"), &[flow(&P), el("n4")])])
        );
        assert_eq!(
            on_element(r#"Has No Flow { Source Element : "Mobile Phone" }"#, "n6"),
            set(vec![t(el("n6"), &[el("n6")])])
        );
        assert_eq!(
            on_element(r#"Has Flow { Target Element : "Cell Tower" }"#, "n6"),
            set(vec![t(el("n6"), &[flow(&P2), el("n3")])])
        );
    }

    #[test]
    fn crosses() {
        let d = fixtures::mobile_diagram();
        let s = fixtures::mobile_spec();
        let on = |f: &str, r: &str| {
            eval_connector_filter(&connector_filter(f), r, &d, &s, Uniqueness::Elements)
        };
        assert_eq!(
            on(r#"Crosses Element : "Mobile Phone""#, "r1"),
            set(vec![t(con("r1"), &[el("n1")])])
        );
        assert!(on("Crosses Boundary", "r3").is_empty());
        assert_eq!(
            on_flow(r#"Crosses Boundary : "Trusted Environment""#, &P2),
            set(vec![t(flow(&P2), &[bnd("a2")])])
        );
    }

    #[test]
    fn includes() {
        assert_eq!(
            on_flow(r#"Includes Element : "REST Interface""#, &P),
            set(vec![t(flow(&P), &[el("n5")])])
        );
        assert_eq!(
            on_flow(
                r#"Includes no Connector : "Wireless" { Source Element & Target Element }"#,
                &P
            ),
            set(vec![t(flow(&P), &[flow(&P)])])
        );
        assert_eq!(
            on_flow(
                r#"Includes only Connector : "Wired" { Source Element & Target Element }"#,
                &P
            ),
            set(vec![t(
                flow(&P),
                &[con("r2"), con("r3"), el("n4"), el("n5"), el("n6")]
            )])
        );
        assert!(on_flow(r#"Includes only Element : "Server""#, &P).is_empty());
    }

    #[test]
    fn repeated_evaluation_is_stable() {
        let src = r#"Element { Has Flow { Source Element & Crosses Boundary } & (Holds Asset | Contains Element) }"#;
        assert_eq!(run(src), run(src));
    }
}
