//! Canonical text form of a syntax tree.
//!
//! `parse_query(&pretty_print(q)) == q` for every tree the parser can build.

use super::ast::*;

/// Renders `q` in canonical form.
pub fn pretty_print(q: &Query) -> String {
    let mut out = String::new();
    query(q, &mut out);
    out
}

fn query(q: &Query, out: &mut String) {
    match q {
        Query::And(items) => join(items, " & ", out, query),
        Query::Or(items) => {
            out.push('(');
            join(items, " | ", out, query);
            out.push(')');
        }
        Query::Pattern(p) => pattern(p, out),
    }
}

fn join<T>(items: &[T], sep: &str, out: &mut String, f: fn(&T, &mut String)) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        f(item, out);
    }
}

fn string(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

fn string_list(items: &[String], out: &mut String) {
    out.push('[');
    for (i, s) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        string(s, out);
    }
    out.push(']');
}

fn op_values(op: SetOp, values: &[String], single: &str, out: &mut String) {
    match op {
        SetOp::Eq | SetOp::Neq => {
            out.push_str(if op == SetOp::Eq { single } else { " != " });
            string(&values[0], out);
        }
        SetOp::In | SetOp::NotIn => {
            out.push_str(if op == SetOp::In { " in " } else { " not in " });
            string_list(values, out);
        }
    }
}

fn type_filter(t: &Option<TypeFilter>, out: &mut String) {
    if let Some(t) = t {
        op_values(t.op, &t.names, " : ", out);
    }
}

fn property(p: &PropertyFilter, out: &mut String) {
    string(&p.key, out);
    op_values(p.op, &p.values, " = ", out);
}

fn pattern(p: &Pattern, out: &mut String) {
    match p {
        Pattern::Element(p) => element(p, out),
        Pattern::Asset(p) => asset(p, out),
        Pattern::Boundary(p) => boundary(p, out),
        Pattern::Connector(p) => connector(p, out),
        Pattern::Flow(p) => flow(p, out),
    }
}

fn expr<P>(e: &PatternExpr<P>, out: &mut String, f: fn(&P, &mut String)) {
    match e {
        PatternExpr::Single(p) => f(p, out),
        PatternExpr::Alt(items) => {
            out.push('(');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                expr(item, out, f);
            }
            out.push(')');
        }
    }
}

fn filters<F>(e: &FilterExpr<F>, out: &mut String, f: fn(&F, &mut String)) {
    match e {
        FilterExpr::Leaf(l) => f(l, out),
        FilterExpr::And(items) => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(" & ");
                }
                filters(item, out, f);
            }
        }
        FilterExpr::Or(items) => {
            out.push('(');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                filters(item, out, f);
            }
            out.push(')');
        }
    }
}

fn braced<F>(e: &Option<FilterExpr<F>>, out: &mut String, f: fn(&F, &mut String)) {
    if let Some(e) = e {
        out.push_str(" { ");
        filters(e, out, f);
        out.push_str(" }");
    }
}

fn trailing<F>(e: &Option<FilterExpr<F>>, out: &mut String, f: fn(&F, &mut String)) {
    if let Some(e) = e {
        out.push_str(" & ");
        filters(e, out, f);
    }
}

fn element(p: &ElementPattern, out: &mut String) {
    out.push_str("Element");
    type_filter(&p.type_filter, out);
    braced(&p.filter, out, element_filter);
}

fn asset(p: &AssetPattern, out: &mut String) {
    out.push_str("Asset");
    type_filter(&p.type_filter, out);
    braced(&p.filter, out, property);
}

fn boundary(p: &BoundaryPattern, out: &mut String) {
    out.push_str("Boundary");
    type_filter(&p.type_filter, out);
    braced(&p.filter, out, boundary_filter);
}

fn endpoints(
    source: &PatternExpr<ElementPattern>,
    target: &PatternExpr<ElementPattern>,
    out: &mut String,
) {
    out.push_str(" { Source ");
    expr(source, out, element);
    out.push_str(" & Target ");
    expr(target, out, element);
}

fn connector(p: &ConnectorPattern, out: &mut String) {
    out.push_str("Connector");
    type_filter(&p.type_filter, out);
    endpoints(&p.source, &p.target, out);
    trailing(&p.filter, out, connector_filter);
    out.push_str(" }");
}

fn flow(p: &FlowPattern, out: &mut String) {
    out.push_str("Flow");
    endpoints(&p.source, &p.target, out);
    trailing(&p.filter, out, flow_filter);
    out.push_str(" }");
}

fn container(c: &Container, out: &mut String) {
    match c {
        Container::Element(e) => expr(e, out, element),
        Container::Boundary(e) => expr(e, out, boundary),
    }
}

fn endpoint(e: &Endpoint, out: &mut String) {
    match e {
        Endpoint::Source(p) => {
            out.push_str("Source ");
            expr(p, out, element);
        }
        Endpoint::Target(p) => {
            out.push_str("Target ");
            expr(p, out, element);
        }
    }
}

fn element_filter(f: &ElementFilter, out: &mut String) {
    match f {
        ElementFilter::Property(p) => property(p, out),
        ElementFilter::Holds(a) => {
            out.push_str("Holds ");
            expr(a, out, asset);
        }
        ElementFilter::Contains { negated, inner } => {
            out.push_str(if *negated { "Contains no " } else { "Contains " });
            expr(inner, out, element);
        }
        ElementFilter::ContainedBy { negated, inner } => {
            out.push_str(if *negated { "Not Contained by " } else { "Contained by " });
            container(inner, out);
        }
        ElementFilter::Connector(h) => {
            out.push_str(if h.negated { "Has No Connector" } else { "Has Connector" });
            type_filter(&h.type_filter, out);
            out.push_str(" { ");
            endpoint(&h.endpoint, out);
            trailing(&h.filter, out, connector_filter);
            out.push_str(" }");
        }
        ElementFilter::Flow(h) => {
            out.push_str(if h.negated { "Has No Flow { " } else { "Has Flow { " });
            endpoint(&h.endpoint, out);
            trailing(&h.filter, out, flow_filter);
            out.push_str(" }");
        }
    }
}

fn boundary_filter(f: &BoundaryFilter, out: &mut String) {
    match f {
        BoundaryFilter::Contains { negated, inner } => {
            out.push_str(if *negated { "Contains no " } else { "Contains " });
            container(inner, out);
        }
        BoundaryFilter::ContainedBy { negated, inner } => {
            out.push_str(if *negated { "Not Contained by " } else { "Contained by " });
            expr(inner, out, boundary);
        }
    }
}

fn connector_filter(f: &ConnectorFilter, out: &mut String) {
    match f {
        ConnectorFilter::Property(p) => property(p, out),
        ConnectorFilter::Holds(a) => {
            out.push_str("Holds ");
            expr(a, out, asset);
        }
        ConnectorFilter::Crosses(c) => {
            out.push_str("Crosses ");
            container(c, out);
        }
    }
}

fn flow_filter(f: &FlowFilter, out: &mut String) {
    match f {
        FlowFilter::Includes { mode, inner } => {
            out.push_str(match mode {
                IncludesMode::Some => "Includes ",
                IncludesMode::No => "Includes no ",
                IncludesMode::Only => "Includes only ",
            });
            match inner {
                Member::Element(e) => expr(e, out, element),
                Member::Connector(e) => expr(e, out, connector),
            }
        }
        FlowFilter::Crosses(c) => {
            out.push_str("Crosses ");
            container(c, out);
        }
    }
}
