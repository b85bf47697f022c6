use std::collections::BTreeSet;

use adfd_core::dsl::*;
use adfd_core::eval::{
    eval_boundary_filter, eval_element_filter, eval_flow_filter, eval_type_filter,
};
use adfd_core::fixtures::mobile_spec;
use adfd_core::{
    check_query, enumerate_flows, evaluate_query, Category, ContentSpecification, Diagram,
    Uniqueness,
};
use adfd_testkit::ast::{AstGen, FILTER_KINDS};
use adfd_testkit::diagrams::{random_conforming, Limits};
use adfd_testkit::oracle::oracle_query;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::Rng;

const MODES: [Uniqueness; 2] = [Uniqueness::Elements, Uniqueness::Connectors];

/// A generated rule that passes the checker.
fn checked_rule(g: &mut AstGen<'_, StdRng>, spec: &ContentSpecification) -> Query {
    loop {
        let kind = FILTER_KINDS[g.rng.gen_range(0..FILTER_KINDS.len())];
        let q = if g.rng.gen_bool(0.5) {
            g.query_using(&[kind])
        } else {
            Some(g.query())
        };
        if let Some(q) = q.filter(|q| check_query(q, spec).is_empty()) {
            return q;
        }
    }
}

fn flows(d: &Diagram, mode: Uniqueness) -> Vec<adfd_core::Flow> {
    let mut out = Vec::new();
    for a in d.elements() {
        for b in d.elements() {
            out.extend(enumerate_flows(d, a, b, mode).unwrap());
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn agrees_with_oracle(seed in any::<u64>()) {
        let spec = mobile_spec();
        let mut rng = adfd_testkit::rng(seed);
        let d = random_conforming(&mut rng, &spec, Limits::default());
        let mut g = AstGen::for_spec(rng, &spec, 3);
        for _ in 0..4 {
            let q = checked_rule(&mut g, &spec);
            for mode in MODES {
                prop_assert_eq!(
                    evaluate_query(&q, &d, &spec, mode),
                    oracle_query(&q, &d, &spec, mode),
                    "{}", pretty_print(&q)
                );
            }
        }
    }

    #[test]
    fn negations_complement(seed in any::<u64>()) {
        let spec = mobile_spec();
        let mut rng = adfd_testkit::rng(seed);
        let d = random_conforming(&mut rng, &spec, Limits::default());
        let mut g = AstGen::for_spec(rng, &spec, 3);
        let mode = Uniqueness::Elements;

        for kind in ["has_connector", "has_flow", "contains", "contained_by"] {
            let pos = g.element_filter(kind).unwrap();
            let neg = flip_element(&pos);
            for n in d.elements() {
                let p = eval_element_filter(&FilterExpr::Leaf(pos.clone()), n, &d, &spec, mode);
                let q = eval_element_filter(&FilterExpr::Leaf(neg.clone()), n, &d, &spec, mode);
                prop_assert_eq!(p.is_empty(), !q.is_empty(), "{} at {}", kind, n);
            }
        }
        for kind in ["boundary_contains", "boundary_contained_by"] {
            let pos = g.boundary_filter(kind);
            let neg = match &pos {
                BoundaryFilter::Contains { negated, inner } => BoundaryFilter::Contains { negated: !negated, inner: inner.clone() },
                BoundaryFilter::ContainedBy { negated, inner } => BoundaryFilter::ContainedBy { negated: !negated, inner: inner.clone() },
            };
            for a in d.boundaries() {
                let p = eval_boundary_filter(&FilterExpr::Leaf(pos.clone()), a, &d, &spec);
                let q = eval_boundary_filter(&FilterExpr::Leaf(neg.clone()), a, &d, &spec);
                prop_assert_eq!(p.is_empty(), !q.is_empty());
            }
        }
        let pos = g.flow_filter("includes");
        let FlowFilter::Includes { inner, .. } = &pos else { unreachable!() };
        let neg = FlowFilter::Includes { mode: IncludesMode::No, inner: inner.clone() };
        for f in flows(&d, mode) {
            let p = eval_flow_filter(&FilterExpr::Leaf(pos.clone()), &f, &d, &spec, mode);
            let q = eval_flow_filter(&FilterExpr::Leaf(neg.clone()), &f, &d, &spec, mode);
            prop_assert_eq!(p.is_empty(), !q.is_empty());
        }
    }

    #[test]
    fn or_is_monotone_and_and_absorbs_empty(seed in any::<u64>()) {
        let spec = mobile_spec();
        let mut rng = adfd_testkit::rng(seed);
        let d = random_conforming(&mut rng, &spec, Limits::default());
        let mut g = AstGen::for_spec(rng, &spec, 2);
        let a = checked_rule(&mut g, &spec);
        let b = checked_rule(&mut g, &spec);
        let mode = Uniqueness::Elements;
        let ra = evaluate_query(&a, &d, &spec, mode);
        let rb = evaluate_query(&b, &d, &spec, mode);
        let or = evaluate_query(&Query::Or(vec![a.clone(), b.clone()]), &d, &spec, mode);
        prop_assert!(or.is_superset(&ra));
        prop_assert!(or.is_superset(&rb));
        let and = evaluate_query(&Query::And(vec![a, b]), &d, &spec, mode);
        if ra.is_empty() || rb.is_empty() {
            prop_assert!(and.is_empty());
        }
    }

    #[test]
    fn evaluation_is_repeatable(seed in any::<u64>()) {
        let spec = mobile_spec();
        let mut rng = adfd_testkit::rng(seed);
        let d = random_conforming(&mut rng, &spec, Limits::default());
        let before = d.clone();
        let mut g = AstGen::for_spec(rng, &spec, 3);
        let q = checked_rule(&mut g, &spec);
        let first = evaluate_query(&q, &d, &spec, Uniqueness::Connectors);
        prop_assert_eq!(&first, &evaluate_query(&q, &d, &spec, Uniqueness::Connectors));
        prop_assert_eq!(d, before);
    }
}

fn flip_element(f: &ElementFilter) -> ElementFilter {
    let mut f = f.clone();
    match &mut f {
        ElementFilter::Contains { negated, .. } | ElementFilter::ContainedBy { negated, .. } => {
            *negated = !*negated
        }
        ElementFilter::Connector(h) => h.negated = !h.negated,
        ElementFilter::Flow(h) => h.negated = !h.negated,
        _ => panic!("not negatable"),
    }
    f
}

#[test]
fn singleton_and_list_type_filters_agree() {
    let spec = mobile_spec();
    let mut rng = adfd_testkit::rng(11);
    for _ in 0..30 {
        let d = random_conforming(&mut rng, &spec, Limits::default());
        for category in Category::ALL {
            for q in spec.types(category) {
                let tf = |op| TypeFilter {
                    op,
                    names: vec![q.to_owned()],
                    span: Span::default(),
                };
                let eval = |op| eval_type_filter(&tf(op), category, &d, &spec);
                assert_eq!(eval(SetOp::Eq), eval(SetOp::In));
                assert_eq!(eval(SetOp::Neq), eval(SetOp::NotIn));
                let all: BTreeSet<_> = eval(SetOp::Eq).union(&eval(SetOp::Neq)).cloned().collect();
                assert_eq!(all.len(), d.count(category));
            }
        }
    }
}
