//! Brute-force reference semantics.
//!
//! Nothing here is cached. Flows come from enumerating connector-distinct
//! walks and filtering; containment comes from walking parent links; every
//! filter is evaluated straight from its definition.

use std::collections::BTreeSet;

use adfd_core::dsl::*;
use adfd_core::eval::Affected;
use adfd_core::{
    Category, ComponentRef, Containment, ContentSpecification, Diagram, Flow, MatchTuple,
    Uniqueness,
};

/// Extends `walk` by every unused connector leaving its last element,
/// recursing while `keep` accepts the extended walk. Every accepted walk
/// is pushed to `out`. `keep` must be prefix-closed.
fn extend(d: &Diagram, walk: &mut Vec<String>, keep: &dyn Fn(&[String]) -> bool, out: &mut Vec<Vec<String>>) {
    let here = walk.last().unwrap().clone();
    for r in d.connectors() {
        if d.source(r) != Some(here.as_str()) || walk.iter().skip(1).step_by(2).any(|x| x == r) {
            continue;
        }
        walk.push(r.to_owned());
        walk.push(d.target(r).unwrap().to_owned());
        if keep(walk) {
            out.push(walk.clone());
            extend(d, walk, keep, out);
        }
        walk.truncate(walk.len() - 2);
    }
}

/// Flows from `src` to `tgt`, sorted: connector-distinct walks of at
/// least one connector ending at `tgt`.
///
/// Elements mode keeps walks with pairwise distinct elements. Connectors
/// mode keeps walks that do not visit `tgt` before the last position.
pub fn brute_flows(d: &Diagram, src: &str, tgt: &str, mode: Uniqueness) -> Vec<Vec<String>> {
    let elements_distinct = |w: &[String]| {
        let els: Vec<&String> = w.iter().step_by(2).collect();
        els.iter().collect::<BTreeSet<_>>().len() == els.len()
    };
    let tgt_only_last = |w: &[String]| {
        let els: Vec<&String> = w.iter().step_by(2).collect();
        els[1..els.len() - 1].iter().all(|e| *e != tgt)
    };
    let keep: &dyn Fn(&[String]) -> bool = match mode {
        Uniqueness::Elements => &elements_distinct,
        Uniqueness::Connectors => &tgt_only_last,
    };
    let mut all = Vec::new();
    extend(d, &mut vec![src.to_owned()], keep, &mut all);
    let mut out: Vec<Vec<String>> = all
        .into_iter()
        .filter(|w| w.last().map(String::as_str) == Some(tgt))
        .collect();
    out.sort();
    out
}

/// Strict ancestors of `id` along one containment relation.
fn ancestors(d: &Diagram, relation: Containment, id: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut at = id.to_owned();
    while let Some(p) = d.direct_parent(relation, &at) {
        if out.iter().any(|x| x == p) || p == id {
            break;
        }
        out.push(p.to_owned());
        at = p.to_owned();
    }
    out
}

fn inside(d: &Diagram, relation: Containment, container: &str, inner: &str) -> bool {
    ancestors(d, relation, inner).iter().any(|a| a == container)
}

type Tuples = BTreeSet<(ComponentRef, Affected)>;
type Ms = BTreeSet<Affected>;

fn cross(a: &Ms, b: &Ms) -> Ms {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x | y))
        .collect()
}

fn one() -> Ms {
    BTreeSet::from([Affected::new()])
}

/// The definitional evaluator.
pub struct Oracle<'a> {
    pub d: &'a Diagram,
    pub s: &'a ContentSpecification,
    pub mode: Uniqueness,
}

impl<'a> Oracle<'a> {
    pub fn new(d: &'a Diagram, s: &'a ContentSpecification, mode: Uniqueness) -> Self {
        Oracle { d, s, mode }
    }

    fn flows(&self, src: &str, tgt: &str) -> Vec<Flow> {
        brute_flows(self.d, src, tgt, self.mode)
            .into_iter()
            .map(|seq| Flow::from_sequence(seq).unwrap())
            .collect()
    }

    fn all_flows(&self) -> Vec<Flow> {
        let mut out = Vec::new();
        for a in self.d.elements() {
            for b in self.d.elements() {
                out.extend(self.flows(a, b));
            }
        }
        out
    }

    pub fn query(&self, q: &Query) -> BTreeSet<MatchTuple> {
        match q {
            Query::Pattern(p) => self
                .pattern(p)
                .into_iter()
                .map(|(x, m)| MatchTuple::new(x, m))
                .collect(),
            Query::Or(items) => items.iter().flat_map(|q| self.query(q)).collect(),
            Query::And(items) => {
                let mut acc = one();
                for q in items {
                    let ms: Ms = self.query(q).into_iter().map(|t| t.affected).collect();
                    acc = cross(&acc, &ms);
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

    pub fn pattern(&self, p: &Pattern) -> Tuples {
        match p {
            Pattern::Element(p) => self.element(p),
            Pattern::Asset(p) => self.asset(p),
            Pattern::Boundary(p) => self.boundary(p),
            Pattern::Connector(p) => self.connector(p),
            Pattern::Flow(p) => self.flow(p),
        }
    }

    fn type_ok(&self, t: &Option<TypeFilter>, category: Category, id: &str) -> bool {
        let Some(t) = t else { return true };
        let actual = self.d.type_of(category, id).unwrap();
        let hit = t.names.iter().any(|q| {
            actual == q
                || self
                    .s
                    .hierarchy(category, q)
                    .is_some_and(|subs| subs.iter().any(|s| s == actual))
        });
        match t.op {
            SetOp::Eq | SetOp::In => hit,
            SetOp::Neq | SetOp::NotIn => !hit,
        }
    }

    fn alt<P>(&self, e: &PatternExpr<P>, f: &dyn Fn(&P) -> Tuples) -> Tuples {
        match e {
            PatternExpr::Single(p) => f(p),
            PatternExpr::Alt(items) => items.iter().flat_map(|e| self.alt(e, f)).collect(),
        }
    }

    fn fexpr<F>(&self, e: &Option<FilterExpr<F>>, leaf: &dyn Fn(&F) -> Ms) -> Ms {
        fn go<F>(e: &FilterExpr<F>, leaf: &dyn Fn(&F) -> Ms) -> Ms {
            match e {
                FilterExpr::Leaf(f) => leaf(f),
                FilterExpr::Or(items) => items.iter().flat_map(|e| go(e, leaf)).collect(),
                FilterExpr::And(items) => items
                    .iter()
                    .fold(one(), |acc, e| cross(&acc, &go(e, leaf))),
            }
        }
        match e {
            None => one(),
            Some(e) => go(e, leaf),
        }
    }

    /// `(x, {x} ∪ M)` for every `x` of `category` passing the type filter and
    /// every `M` its filter yields.
    fn components<F>(
        &self,
        category: Category,
        t: &Option<TypeFilter>,
        filter: &Option<FilterExpr<F>>,
        leaf: &dyn Fn(&F, &str) -> Ms,
    ) -> Tuples {
        let mut out = Tuples::new();
        for id in self.d.ids(category) {
            if !self.type_ok(t, category, id) {
                continue;
            }
            let me = ComponentRef::of(category, id);
            for m in self.fexpr(filter, &|f| leaf(f, id)) {
                let mut m = m;
                m.insert(me.clone());
                out.insert((me.clone(), m));
            }
        }
        out
    }

    fn element(&self, p: &ElementPattern) -> Tuples {
        self.components(Category::Element, &p.type_filter, &p.filter, &|f, c| {
            self.element_leaf(f, c)
        })
    }

    fn asset(&self, p: &AssetPattern) -> Tuples {
        self.components(Category::Asset, &p.type_filter, &p.filter, &|f, c| {
            self.property(f, c)
        })
    }

    fn boundary(&self, p: &BoundaryPattern) -> Tuples {
        self.components(Category::Boundary, &p.type_filter, &p.filter, &|f, c| {
            self.boundary_leaf(f, c)
        })
    }

    fn elements(&self, e: &PatternExpr<ElementPattern>) -> Tuples {
        self.alt(e, &|p| self.element(p))
    }

    fn boundaries(&self, e: &PatternExpr<BoundaryPattern>) -> Tuples {
        self.alt(e, &|p| self.boundary(p))
    }

    /// Affected sets of tuples in `hits` whose component satisfies `pred`.
    fn ms_where(hits: &Tuples, pred: impl Fn(&str) -> bool) -> Ms {
        hits.iter()
            .filter(|(x, _)| pred(x.id().unwrap()))
            .map(|(_, m)| m.clone())
            .collect()
    }

    fn connector(&self, p: &ConnectorPattern) -> Tuples {
        let src = self.elements(&p.source);
        let tgt = self.elements(&p.target);
        let mut out = Tuples::new();
        for r in self.d.connectors() {
            if !self.type_ok(&p.type_filter, Category::Connector, r) {
                continue;
            }
            let m1 = Self::ms_where(&src, |n| Some(n) == self.d.source(r));
            let m2 = Self::ms_where(&tgt, |n| Some(n) == self.d.target(r));
            let m3 = self.fexpr(&p.filter, &|f| self.connector_leaf(f, r));
            let me = ComponentRef::Connector(r.to_owned());
            for mut m in cross(&cross(&m1, &m2), &m3) {
                m.insert(me.clone());
                out.insert((me.clone(), m));
            }
        }
        out
    }

    fn flow(&self, p: &FlowPattern) -> Tuples {
        let src = self.elements(&p.source);
        let tgt = self.elements(&p.target);
        let mut out = Tuples::new();
        for flow in self.all_flows() {
            let m1 = Self::ms_where(&src, |n| n == flow.p_source());
            let m2 = Self::ms_where(&tgt, |n| n == flow.p_target());
            let m3 = self.fexpr(&p.filter, &|f| self.flow_leaf(f, &flow));
            let me = ComponentRef::Flow(flow.clone());
            for mut m in cross(&cross(&m1, &m2), &m3) {
                m.insert(me.clone());
                out.insert((me.clone(), m));
            }
        }
        out
    }

    pub fn property(&self, p: &PropertyFilter, c: &str) -> Ms {
        let Ok(Some(v)) = self.d.property_value(c, &p.key) else {
            return Ms::new();
        };
        let listed = p.values.iter().any(|x| x == v);
        let pass = match p.op {
            SetOp::Eq | SetOp::In => listed,
            SetOp::Neq | SetOp::NotIn => !listed,
        };
        if pass {
            BTreeSet::from([Affected::from([self.d.component_ref(c).unwrap()])])
        } else {
            Ms::new()
        }
    }

    fn holds(&self, e: &PatternExpr<AssetPattern>, c: &str) -> Ms {
        let assets = self.alt(e, &|p| self.asset(p));
        Self::ms_where(&assets, |y| self.d.holds_asset(c, y).unwrap())
    }

    fn negated(&self, negated: bool, ms: Ms, c: ComponentRef) -> Ms {
        match (negated, ms.is_empty()) {
            (false, _) => ms,
            (true, true) => BTreeSet::from([Affected::from([c])]),
            (true, false) => Ms::new(),
        }
    }

    pub fn element_leaf(&self, f: &ElementFilter, c: &str) -> Ms {
        let me = ComponentRef::Element(c.to_owned());
        match f {
            ElementFilter::Property(p) => self.property(p, c),
            ElementFilter::Holds(e) => self.holds(e, c),
            ElementFilter::Contains { negated, inner } => {
                let ms = Self::ms_where(&self.elements(inner), |n| {
                    inside(self.d, Containment::Element, c, n)
                });
                self.negated(*negated, ms, me)
            }
            ElementFilter::ContainedBy { negated, inner } => {
                let ms = match inner {
                    Container::Element(e) => Self::ms_where(&self.elements(e), |n| {
                        inside(self.d, Containment::Element, n, c)
                    }),
                    Container::Boundary(e) => Self::ms_where(&self.boundaries(e), |a| {
                        inside(self.d, Containment::Boundary, a, c)
                    }),
                };
                self.negated(*negated, ms, me)
            }
            ElementFilter::Connector(h) => {
                let ends = self.elements(h.endpoint.pattern());
                let mut ms = Ms::new();
                for r in self.d.connectors() {
                    let (here, other) = match h.endpoint {
                        Endpoint::Source(_) => (self.d.target(r), self.d.source(r)),
                        Endpoint::Target(_) => (self.d.source(r), self.d.target(r)),
                    };
                    if here != Some(c) || !self.type_ok(&h.type_filter, Category::Connector, r) {
                        continue;
                    }
                    let m1 = Self::ms_where(&ends, |n| Some(n) == other);
                    let m2 = self.fexpr(&h.filter, &|f| self.connector_leaf(f, r));
                    for mut m in cross(&m1, &m2) {
                        m.insert(ComponentRef::Connector(r.to_owned()));
                        ms.insert(m);
                    }
                }
                self.negated(h.negated, ms, me)
            }
            ElementFilter::Flow(h) => {
                let ends = self.elements(h.endpoint.pattern());
                let mut ms = Ms::new();
                for flow in self.all_flows() {
                    let (here, other) = match h.endpoint {
                        Endpoint::Source(_) => (flow.p_target(), flow.p_source()),
                        Endpoint::Target(_) => (flow.p_source(), flow.p_target()),
                    };
                    if here != c {
                        continue;
                    }
                    let m1 = Self::ms_where(&ends, |n| n == other);
                    let m2 = self.fexpr(&h.filter, &|f| self.flow_leaf(f, &flow));
                    for mut m in cross(&m1, &m2) {
                        m.insert(ComponentRef::Flow(flow.clone()));
                        ms.insert(m);
                    }
                }
                self.negated(h.negated, ms, me)
            }
        }
    }

    pub fn boundary_leaf(&self, f: &BoundaryFilter, c: &str) -> Ms {
        let me = ComponentRef::Boundary(c.to_owned());
        match f {
            BoundaryFilter::Contains { negated, inner } => {
                let hits = match inner {
                    Container::Element(e) => self.elements(e),
                    Container::Boundary(e) => self.boundaries(e),
                };
                let ms = Self::ms_where(&hits, |w| inside(self.d, Containment::Boundary, c, w));
                self.negated(*negated, ms, me)
            }
            BoundaryFilter::ContainedBy { negated, inner } => {
                let ms = Self::ms_where(&self.boundaries(inner), |a| {
                    inside(self.d, Containment::Boundary, a, c)
                });
                self.negated(*negated, ms, me)
            }
        }
    }

    /// Whether connector `r` has exactly one endpoint inside `w`.
    fn crosses_one(&self, relation: Containment, w: &str, r: &str) -> bool {
        let s = self.d.source(r).unwrap();
        let t = self.d.target(r).unwrap();
        inside(self.d, relation, w, s) ^ inside(self.d, relation, w, t)
    }

    fn crosses(&self, w: &Container, connectors: &[&str]) -> Ms {
        let (hits, relation) = match w {
            Container::Element(e) => (self.elements(e), Containment::Element),
            Container::Boundary(e) => (self.boundaries(e), Containment::Boundary),
        };
        Self::ms_where(&hits, |w| {
            connectors.iter().any(|r| self.crosses_one(relation, w, r))
        })
    }

    pub fn connector_leaf(&self, f: &ConnectorFilter, r: &str) -> Ms {
        match f {
            ConnectorFilter::Property(p) => self.property(p, r),
            ConnectorFilter::Holds(e) => self.holds(e, r),
            ConnectorFilter::Crosses(w) => self.crosses(w, &[r]),
        }
    }

    pub fn flow_leaf(&self, f: &FlowFilter, p: &Flow) -> Ms {
        let seq = p.sequence();
        let elements: Vec<&str> = seq.iter().step_by(2).map(String::as_str).collect();
        let connectors: Vec<&str> = seq.iter().skip(1).step_by(2).map(String::as_str).collect();
        match f {
            FlowFilter::Crosses(w) => self.crosses(w, &connectors),
            FlowFilter::Includes { mode, inner } => {
                let (hits, members) = match inner {
                    Member::Element(e) => (self.elements(e), elements),
                    Member::Connector(e) => (self.alt(e, &|c| self.connector(c)), connectors),
                };
                let some = Self::ms_where(&hits, |x| members.contains(&x));
                match mode {
                    IncludesMode::Some => some,
                    IncludesMode::No => {
                        self.negated(true, some, ComponentRef::Flow(p.clone()))
                    }
                    IncludesMode::Only => {
                        let distinct: BTreeSet<&str> = members.iter().copied().collect();
                        distinct.iter().fold(one(), |acc, x| {
                            cross(&acc, &Self::ms_where(&hits, |h| h == *x))
                        })
                    }
                }
            }
        }
    }
}

/// [`Oracle::query`] in one call.
pub fn oracle_query(
    q: &Query,
    d: &Diagram,
    s: &ContentSpecification,
    mode: Uniqueness,
) -> BTreeSet<MatchTuple> {
    Oracle::new(d, s, mode).query(q)
}
