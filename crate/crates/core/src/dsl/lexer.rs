//! Tokenizer for rule text.

use std::fmt;

use super::ast::Span;
use super::ParseError;
use crate::violation::Code;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Element,
    Asset,
    Boundary,
    Connector,
    Flow,
    Source,
    Target,
    Holds,
    Contains,
    ContainedBy,
    Not,
    No,
    Only,
    Has,
    Crosses,
    Includes,
    In,
    NotIn,
    Amp,
    Pipe,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Eq,
    NotEq,
    Str(String),
    Eof,
}

impl Tok {
    /// How the token is written in expectation lists and error messages.
    pub fn describe(&self) -> String {
        match self {
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Eof => "end of input".to_owned(),
            other => format!("`{}`", other.text()),
        }
    }

    /// Canonical source text of a non-string token.
    pub fn text(&self) -> &'static str {
        match self {
            Tok::Element => "Element",
            Tok::Asset => "Asset",
            Tok::Boundary => "Boundary",
            Tok::Connector => "Connector",
            Tok::Flow => "Flow",
            Tok::Source => "Source",
            Tok::Target => "Target",
            Tok::Holds => "Holds",
            Tok::Contains => "Contains",
            Tok::ContainedBy => "Contained by",
            Tok::Not => "Not",
            Tok::No => "no",
            Tok::Only => "only",
            Tok::Has => "Has",
            Tok::Crosses => "Crosses",
            Tok::Includes => "Includes",
            Tok::In => "in",
            Tok::NotIn => "not in",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::NotEq => "!=",
            Tok::Str(_) => "string",
            Tok::Eof => "end of input",
        }
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word.to_ascii_lowercase().as_str() {
        "element" => Tok::Element,
        "asset" => Tok::Asset,
        "boundary" => Tok::Boundary,
        "connector" => Tok::Connector,
        "flow" => Tok::Flow,
        "source" => Tok::Source,
        "target" => Tok::Target,
        "holds" => Tok::Holds,
        "contains" => Tok::Contains,
        "not" => Tok::Not,
        "no" => Tok::No,
        "only" => Tok::Only,
        "has" => Tok::Has,
        "crosses" => Tok::Crosses,
        "includes" => Tok::Includes,
        "in" => Tok::In,
        _ => return None,
    })
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn word(&mut self) -> (&'a str, Span) {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if !(c.is_ascii_alphanumeric() || c == '_') {
                break;
            }
            self.pos += 1;
        }
        (&self.src[start..self.pos], Span::new(start, self.pos))
    }

    /// The next word after optional whitespace, consumed only if it equals
    /// `want` (ignoring case).
    fn eat_word(&mut self, want: &str) -> Option<usize> {
        let save = self.pos;
        self.skip_ws();
        if self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            let (w, span) = self.word();
            if w.eq_ignore_ascii_case(want) {
                return Some(span.end);
            }
        }
        self.pos = save;
        None
    }

    fn string(&mut self, start: usize) -> Result<Token, ParseError> {
        self.pos += 1;
        let mut value = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(ParseError::at(
                    self.src,
                    Code::UnterminatedString,
                    start,
                    vec!["`\"`".into()],
                    "end of input".into(),
                ));
            };
            self.pos += c.len_utf8();
            match c {
                '"' => break,
                '\\' => match self.peek() {
                    Some(e @ ('"' | '\\')) => {
                        value.push(e);
                        self.pos += 1;
                    }
                    _ => {
                        return Err(ParseError::at(
                            self.src,
                            Code::IllegalCharacter,
                            self.pos - 1,
                            vec!["`\\\"`".into(), "`\\\\`".into()],
                            "`\\`".into(),
                        ))
                    }
                },
                c => value.push(c),
            }
        }
        Ok(Token {
            tok: Tok::Str(value),
            span: Span::new(start, self.pos),
        })
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok(Token {
                tok: Tok::Eof,
                span: Span::new(start, start),
            });
        };
        let single = |tok| Ok(Token { tok, span: Span::new(start, start + 1) });
        match c {
            '&' => {
                self.pos += 1;
                single(Tok::Amp)
            }
            '|' => {
                self.pos += 1;
                single(Tok::Pipe)
            }
            '(' => {
                self.pos += 1;
                single(Tok::LParen)
            }
            ')' => {
                self.pos += 1;
                single(Tok::RParen)
            }
            '{' => {
                self.pos += 1;
                single(Tok::LBrace)
            }
            '}' => {
                self.pos += 1;
                single(Tok::RBrace)
            }
            '[' => {
                self.pos += 1;
                single(Tok::LBracket)
            }
            ']' => {
                self.pos += 1;
                single(Tok::RBracket)
            }
            ',' => {
                self.pos += 1;
                single(Tok::Comma)
            }
            ':' => {
                self.pos += 1;
                single(Tok::Colon)
            }
            '=' => {
                self.pos += 1;
                single(Tok::Eq)
            }
            '!' if self.src[start..].starts_with("!=") => {
                self.pos += 2;
                Ok(Token {
                    tok: Tok::NotEq,
                    span: Span::new(start, start + 2),
                })
            }
            '"' => self.string(start),
            c if c.is_ascii_alphabetic() => {
                let (word, span) = self.word();
                let unknown = || {
                    ParseError::at(
                        self.src,
                        Code::UnknownWord,
                        start,
                        vec!["keyword".into()],
                        format!("`{word}`"),
                    )
                };
                if word.eq_ignore_ascii_case("contained") {
                    return match self.eat_word("by") {
                        Some(end) => Ok(Token {
                            tok: Tok::ContainedBy,
                            span: Span::new(start, end),
                        }),
                        None => Err(unknown()),
                    };
                }
                match keyword(word) {
                    Some(Tok::Not) => match self.eat_word("in") {
                        Some(end) => Ok(Token {
                            tok: Tok::NotIn,
                            span: Span::new(start, end),
                        }),
                        None => Ok(Token { tok: Tok::Not, span }),
                    },
                    Some(tok) => Ok(Token { tok, span }),
                    None => Err(unknown()),
                }
            }
            other => Err(ParseError::at(
                self.src,
                Code::IllegalCharacter,
                start,
                Vec::new(),
                format!("`{other}`"),
            )),
        }
    }
}

/// Splits rule text into tokens. The result always ends with `Eof`.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut lexer = Lexer { src, pos: 0 };
    let mut out = Vec::new();
    loop {
        let t = lexer.next()?;
        let done = t.tok == Tok::Eof;
        out.push(t);
        if done {
            return Ok(out);
        }
    }
}
