//! Recursive-descent parser for rule text.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::violation::Code;

/// Deepest nesting of parentheses, braces and nested patterns accepted.
pub const MAX_DEPTH: usize = 64;

/// Parses a complete rule.
pub fn parse_query(src: &str) -> Result<Query, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        src,
        toks,
        pos: 0,
        depth: 0,
    };
    let q = p.query_and()?;
    p.expect(Tok::Eof, &["`&`"])?;
    Ok(q)
}

const PATTERN_STARTS: [&str; 6] = ["`(`", "`Element`", "`Asset`", "`Boundary`", "`Connector`", "`Flow`"];

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
}

/// Which pattern a filter list belongs to; decides what is misplaced.
#[derive(Clone, Copy)]
enum Host {
    Element,
    Asset,
    Boundary,
    Connector,
    Flow,
}

impl Host {
    fn allowed(self) -> &'static [&'static str] {
        match self {
            Host::Element => &[
                "property filter",
                "`Holds`",
                "`Contains`",
                "`Contained by`",
                "`Not`",
                "`Has`",
                "`(`",
            ],
            Host::Asset => &["property filter", "`(`"],
            Host::Boundary => &["`Contains`", "`Contained by`", "`Not`", "`(`"],
            Host::Connector => &["property filter", "`Holds`", "`Crosses`", "`(`"],
            Host::Flow => &["`Includes`", "`Crosses`", "`(`"],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Host::Element => "element",
            Host::Asset => "asset",
            Host::Boundary => "boundary",
            Host::Connector => "connector",
            Host::Flow => "flow",
        }
    }
}

fn is_filter_start(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Str(_)
            | Tok::Holds
            | Tok::Contains
            | Tok::ContainedBy
            | Tok::Not
            | Tok::Has
            | Tok::Crosses
            | Tok::Includes
    )
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_token(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> Option<Token> {
        (self.peek() == tok).then(|| self.bump())
    }

    fn error(&self, code: Code, expected: &[&str]) -> ParseError {
        let t = self.peek_token();
        ParseError::at(
            self.src,
            code,
            t.span.start,
            expected.iter().map(|s| s.to_string()).collect(),
            t.tok.describe(),
        )
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        self.error(Code::UnexpectedToken, expected)
    }

    /// Consumes `tok`. `also` lists alternatives that were possible at this
    /// point, for the error message.
    fn expect(&mut self, tok: Tok, also: &[&str]) -> Result<Token, ParseError> {
        if let Some(t) = self.eat(&tok) {
            return Ok(t);
        }
        let want = tok.describe();
        let mut expected: Vec<&str> = also.to_vec();
        expected.push(&want);
        Err(self.unexpected(&expected))
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error(Code::NestingTooDeep, &[]));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn string(&mut self) -> Result<(String, Token), ParseError> {
        match self.peek().clone() {
            Tok::Str(s) => Ok((s, self.bump())),
            _ => Err(self.unexpected(&["string"])),
        }
    }

    /// `[ "a" (, "b")* ]`
    fn string_list(&mut self) -> Result<(Vec<String>, Span), ParseError> {
        let open = self.expect(Tok::LBracket, &[])?;
        let mut items = vec![self.string()?.0];
        while self.eat(&Tok::Comma).is_some() {
            items.push(self.string()?.0);
        }
        let close = self.expect(Tok::RBracket, &["`,`"])?;
        Ok((items, open.span.join(close.span)))
    }

    // ---- query level

    fn query_and(&mut self) -> Result<Query, ParseError> {
        let mut items = vec![self.query_primary()?];
        while self.eat(&Tok::Amp).is_some() {
            items.push(self.query_primary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Query::And(items)
        })
    }

    fn query_primary(&mut self) -> Result<Query, ParseError> {
        if self.eat(&Tok::LParen).is_some() {
            self.enter()?;
            let mut items = vec![self.query_and()?];
            while self.eat(&Tok::Pipe).is_some() {
                items.push(self.query_and()?);
            }
            if items.len() < 2 {
                return Err(self.unexpected(&["`&`", "`|`"]));
            }
            self.expect(Tok::RParen, &["`&`", "`|`"])?;
            self.leave();
            return Ok(Query::Or(items));
        }
        let pattern = match self.peek() {
            Tok::Element => Pattern::Element(self.element_pattern()?),
            Tok::Asset => Pattern::Asset(self.asset_pattern()?),
            Tok::Boundary => Pattern::Boundary(self.boundary_pattern()?),
            Tok::Connector => Pattern::Connector(self.connector_pattern()?),
            Tok::Flow => Pattern::Flow(self.flow_pattern()?),
            _ => return Err(self.unexpected(&PATTERN_STARTS)),
        };
        Ok(Query::Pattern(pattern))
    }

    // ---- patterns

    fn pattern_expr<P>(
        &mut self,
        single: fn(&mut Self) -> Result<P, ParseError>,
        keyword: &str,
    ) -> Result<PatternExpr<P>, ParseError> {
        if self.eat(&Tok::LParen).is_some() {
            self.enter()?;
            let mut items = vec![self.pattern_expr(single, keyword)?];
            while self.eat(&Tok::Pipe).is_some() {
                items.push(self.pattern_expr(single, keyword)?);
            }
            if items.len() < 2 {
                return Err(self.unexpected(&["`|`"]));
            }
            self.expect(Tok::RParen, &["`|`"])?;
            self.leave();
            return Ok(PatternExpr::Alt(items));
        }
        if !matches!(self.peek(), Tok::Element | Tok::Asset | Tok::Boundary | Tok::Connector)
            || self.peek().text() != keyword
        {
            return Err(self.unexpected(&["`(`", &format!("`{keyword}`")]));
        }
        Ok(PatternExpr::Single(Box::new(single(self)?)))
    }

    fn element_expr(&mut self) -> Result<PatternExpr<ElementPattern>, ParseError> {
        self.pattern_expr(Self::element_pattern, "Element")
    }

    fn asset_expr(&mut self) -> Result<PatternExpr<AssetPattern>, ParseError> {
        self.pattern_expr(Self::asset_pattern, "Asset")
    }

    fn boundary_expr(&mut self) -> Result<PatternExpr<BoundaryPattern>, ParseError> {
        self.pattern_expr(Self::boundary_pattern, "Boundary")
    }

    fn connector_expr(&mut self) -> Result<PatternExpr<ConnectorPattern>, ParseError> {
        self.pattern_expr(Self::connector_pattern, "Connector")
    }

    fn type_filter(&mut self) -> Result<Option<TypeFilter>, ParseError> {
        let start = self.peek_token().span;
        let (op, names, end) = match self.peek() {
            Tok::Colon | Tok::NotEq => {
                let op = if self.bump().tok == Tok::Colon {
                    SetOp::Eq
                } else {
                    SetOp::Neq
                };
                let (name, t) = self.string()?;
                (op, vec![name], t.span)
            }
            Tok::In | Tok::NotIn => {
                let op = if self.bump().tok == Tok::In {
                    SetOp::In
                } else {
                    SetOp::NotIn
                };
                let (names, span) = self.string_list()?;
                (op, names, span)
            }
            _ => return Ok(None),
        };
        Ok(Some(TypeFilter {
            op,
            names,
            span: start.join(end),
        }))
    }

    /// `{ filters }` after a pattern head, if present.
    fn braced_filters<F>(
        &mut self,
        host: Host,
        leaf: fn(&mut Self) -> Result<F, ParseError>,
    ) -> Result<Option<FilterExpr<F>>, ParseError> {
        if self.eat(&Tok::LBrace).is_none() {
            return Ok(None);
        }
        self.enter()?;
        let f = self.filter_and(host, leaf)?;
        self.expect(Tok::RBrace, &["`&`"])?;
        self.leave();
        Ok(Some(f))
    }

    fn element_pattern(&mut self) -> Result<ElementPattern, ParseError> {
        self.expect(Tok::Element, &[])?;
        Ok(ElementPattern {
            type_filter: self.type_filter()?,
            filter: self.braced_filters(Host::Element, Self::element_leaf)?,
        })
    }

    fn asset_pattern(&mut self) -> Result<AssetPattern, ParseError> {
        self.expect(Tok::Asset, &[])?;
        Ok(AssetPattern {
            type_filter: self.type_filter()?,
            filter: self.braced_filters(Host::Asset, Self::asset_leaf)?,
        })
    }

    fn boundary_pattern(&mut self) -> Result<BoundaryPattern, ParseError> {
        self.expect(Tok::Boundary, &[])?;
        Ok(BoundaryPattern {
            type_filter: self.type_filter()?,
            filter: self.braced_filters(Host::Boundary, Self::boundary_leaf)?,
        })
    }

    /// `Source elPat & Target elPat` inside braces.
    fn endpoints(
        &mut self,
    ) -> Result<(PatternExpr<ElementPattern>, PatternExpr<ElementPattern>), ParseError> {
        self.expect(Tok::Source, &[])?;
        let source = self.element_expr()?;
        self.expect(Tok::Amp, &[])?;
        self.expect(Tok::Target, &[])?;
        let target = self.element_expr()?;
        Ok((source, target))
    }

    fn connector_pattern(&mut self) -> Result<ConnectorPattern, ParseError> {
        self.expect(Tok::Connector, &[])?;
        let type_filter = self.type_filter()?;
        self.expect(Tok::LBrace, &["type filter"])?;
        self.enter()?;
        let (source, target) = self.endpoints()?;
        let filter = if self.eat(&Tok::Amp).is_some() {
            Some(self.filter_and(Host::Connector, Self::connector_leaf)?)
        } else {
            None
        };
        self.expect(Tok::RBrace, &["`&`"])?;
        self.leave();
        Ok(ConnectorPattern {
            type_filter,
            source,
            target,
            filter,
        })
    }

    fn flow_pattern(&mut self) -> Result<FlowPattern, ParseError> {
        self.expect(Tok::Flow, &[])?;
        self.expect(Tok::LBrace, &[])?;
        self.enter()?;
        let (source, target) = self.endpoints()?;
        let filter = if self.eat(&Tok::Amp).is_some() {
            Some(self.filter_and(Host::Flow, Self::flow_leaf)?)
        } else {
            None
        };
        self.expect(Tok::RBrace, &["`&`"])?;
        self.leave();
        Ok(FlowPattern {
            source,
            target,
            filter,
        })
    }

    // ---- filters

    fn filter_and<F>(
        &mut self,
        host: Host,
        leaf: fn(&mut Self) -> Result<F, ParseError>,
    ) -> Result<FilterExpr<F>, ParseError> {
        let mut items = vec![self.filter_primary(host, leaf)?];
        while self.eat(&Tok::Amp).is_some() {
            items.push(self.filter_primary(host, leaf)?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            FilterExpr::And(items)
        })
    }

    fn filter_primary<F>(
        &mut self,
        host: Host,
        leaf: fn(&mut Self) -> Result<F, ParseError>,
    ) -> Result<FilterExpr<F>, ParseError> {
        if self.eat(&Tok::LParen).is_some() {
            self.enter()?;
            let mut items = vec![self.filter_and(host, leaf)?];
            while self.eat(&Tok::Pipe).is_some() {
                items.push(self.filter_and(host, leaf)?);
            }
            if items.len() < 2 {
                return Err(self.unexpected(&["`&`", "`|`"]));
            }
            self.expect(Tok::RParen, &["`&`", "`|`"])?;
            self.leave();
            return Ok(FilterExpr::Or(items));
        }
        self.enter()?;
        let f = leaf(self)?;
        self.leave();
        Ok(FilterExpr::Leaf(f))
    }

    /// Error for a token that cannot start a filter in `host`.
    fn bad_filter(&self, host: Host) -> ParseError {
        if is_filter_start(self.peek()) {
            let mut e = self.error(Code::MisplacedFilter, host.allowed());
            e.found = format!("{} in {} pattern", e.found, host.name());
            e
        } else {
            self.unexpected(host.allowed())
        }
    }

    fn property_filter(&mut self) -> Result<PropertyFilter, ParseError> {
        let (key, key_tok) = self.string()?;
        let (op, values, end) = match self.peek() {
            Tok::Eq | Tok::NotEq => {
                let op = if self.bump().tok == Tok::Eq {
                    SetOp::Eq
                } else {
                    SetOp::Neq
                };
                let (v, t) = self.string()?;
                (op, vec![v], t.span)
            }
            Tok::In | Tok::NotIn => {
                let op = if self.bump().tok == Tok::In {
                    SetOp::In
                } else {
                    SetOp::NotIn
                };
                let (values, span) = self.string_list()?;
                (op, values, span)
            }
            _ => return Err(self.unexpected(&["`=`", "`!=`", "`in`", "`not in`"])),
        };
        Ok(PropertyFilter {
            key,
            op,
            values,
            span: key_tok.span.join(end),
        })
    }

    /// An element or boundary pattern, told apart by the first keyword
    /// after any opening parentheses.
    fn container(&mut self) -> Result<Container, ParseError> {
        match self.keyword_after_parens() {
            Tok::Element => Ok(Container::Element(self.element_expr()?)),
            Tok::Boundary => Ok(Container::Boundary(self.boundary_expr()?)),
            _ => Err(self.unexpected(&["`(`", "`Element`", "`Boundary`"])),
        }
    }

    fn member(&mut self) -> Result<Member, ParseError> {
        match self.keyword_after_parens() {
            Tok::Element => Ok(Member::Element(self.element_expr()?)),
            Tok::Connector => Ok(Member::Connector(self.connector_expr()?)),
            _ => Err(self.unexpected(&["`(`", "`Element`", "`Connector`"])),
        }
    }

    fn keyword_after_parens(&self) -> Tok {
        self.toks[self.pos..]
            .iter()
            .map(|t| &t.tok)
            .find(|t| **t != Tok::LParen)
            .cloned()
            .unwrap_or(Tok::Eof)
    }

    fn endpoint(&mut self) -> Result<Endpoint, ParseError> {
        match self.peek() {
            Tok::Source => {
                self.bump();
                Ok(Endpoint::Source(self.element_expr()?))
            }
            Tok::Target => {
                self.bump();
                Ok(Endpoint::Target(self.element_expr()?))
            }
            _ => Err(self.unexpected(&["`Source`", "`Target`"])),
        }
    }

    /// `Has (No)? Connector ...` or `Has (No)? Flow ...`
    fn has_filter(&mut self) -> Result<ElementFilter, ParseError> {
        self.expect(Tok::Has, &[])?;
        let negated = self.eat(&Tok::No).is_some();
        match self.peek() {
            Tok::Connector => {
                self.bump();
                let type_filter = self.type_filter()?;
                self.expect(Tok::LBrace, &["type filter"])?;
                let endpoint = self.endpoint()?;
                let filter = if self.eat(&Tok::Amp).is_some() {
                    Some(self.filter_and(Host::Connector, Self::connector_leaf)?)
                } else {
                    None
                };
                self.expect(Tok::RBrace, &["`&`"])?;
                Ok(ElementFilter::Connector(HasConnector {
                    negated,
                    type_filter,
                    endpoint,
                    filter,
                }))
            }
            Tok::Flow => {
                self.bump();
                self.expect(Tok::LBrace, &[])?;
                let endpoint = self.endpoint()?;
                let filter = if self.eat(&Tok::Amp).is_some() {
                    Some(self.filter_and(Host::Flow, Self::flow_leaf)?)
                } else {
                    None
                };
                self.expect(Tok::RBrace, &["`&`"])?;
                Ok(ElementFilter::Flow(HasFlow {
                    negated,
                    endpoint,
                    filter,
                }))
            }
            _ if negated => Err(self.unexpected(&["`Connector`", "`Flow`"])),
            _ => Err(self.unexpected(&["`No`", "`Connector`", "`Flow`"])),
        }
    }

    fn element_leaf(&mut self) -> Result<ElementFilter, ParseError> {
        match self.peek() {
            Tok::Str(_) => Ok(ElementFilter::Property(self.property_filter()?)),
            Tok::Holds => {
                self.bump();
                Ok(ElementFilter::Holds(self.asset_expr()?))
            }
            Tok::Contains => {
                self.bump();
                let negated = self.eat(&Tok::No).is_some();
                Ok(ElementFilter::Contains {
                    negated,
                    inner: self.element_expr()?,
                })
            }
            Tok::Not | Tok::ContainedBy => {
                let negated = self.eat(&Tok::Not).is_some();
                self.expect(Tok::ContainedBy, &[])?;
                Ok(ElementFilter::ContainedBy {
                    negated,
                    inner: self.container()?,
                })
            }
            Tok::Has => self.has_filter(),
            _ => Err(self.bad_filter(Host::Element)),
        }
    }

    fn asset_leaf(&mut self) -> Result<PropertyFilter, ParseError> {
        match self.peek() {
            Tok::Str(_) => self.property_filter(),
            _ => Err(self.bad_filter(Host::Asset)),
        }
    }

    fn boundary_leaf(&mut self) -> Result<BoundaryFilter, ParseError> {
        match self.peek() {
            Tok::Contains => {
                self.bump();
                let negated = self.eat(&Tok::No).is_some();
                Ok(BoundaryFilter::Contains {
                    negated,
                    inner: self.container()?,
                })
            }
            Tok::Not | Tok::ContainedBy => {
                let negated = self.eat(&Tok::Not).is_some();
                self.expect(Tok::ContainedBy, &[])?;
                Ok(BoundaryFilter::ContainedBy {
                    negated,
                    inner: self.boundary_expr()?,
                })
            }
            _ => Err(self.bad_filter(Host::Boundary)),
        }
    }

    fn connector_leaf(&mut self) -> Result<ConnectorFilter, ParseError> {
        match self.peek() {
            Tok::Str(_) => Ok(ConnectorFilter::Property(self.property_filter()?)),
            Tok::Holds => {
                self.bump();
                Ok(ConnectorFilter::Holds(self.asset_expr()?))
            }
            Tok::Crosses => {
                self.bump();
                Ok(ConnectorFilter::Crosses(self.container()?))
            }
            _ => Err(self.bad_filter(Host::Connector)),
        }
    }

    fn flow_leaf(&mut self) -> Result<FlowFilter, ParseError> {
        match self.peek() {
            Tok::Includes => {
                self.bump();
                let mode = if self.eat(&Tok::No).is_some() {
                    IncludesMode::No
                } else if self.eat(&Tok::Only).is_some() {
                    IncludesMode::Only
                } else {
                    IncludesMode::Some
                };
                Ok(FlowFilter::Includes {
                    mode,
                    inner: self.member()?,
                })
            }
            Tok::Crosses => {
                self.bump();
                Ok(FlowFilter::Crosses(self.container()?))
            }
            _ => Err(self.bad_filter(Host::Flow)),
        }
    }
}
