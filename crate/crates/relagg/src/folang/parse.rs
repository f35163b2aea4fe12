//! Text syntax for formulas and queries.
//!
//! Grammar, loosest to tightest: `->` (right-associative), `or`, `and`,
//! `not`/quantifiers, atoms and comparisons. Quantifier bodies extend
//! maximally to the right. Identifiers starting lowercase are variables
//! unless declared in the constant set; quoted strings, `null`, and
//! identifiers starting with an uppercase letter or digit are constants.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::{Formula, Query, Term};
use crate::model::{Schema, Value};
use crate::{Error, Result};

/// Names the parser needs: the schema (for relation symbols and arities) and
/// the declared constant tokens.
#[derive(Debug, Clone)]
pub struct ParseCtx {
    pub schema: Arc<Schema>,
    pub consts: BTreeSet<String>,
}

impl ParseCtx {
    pub fn new(schema: Arc<Schema>) -> Self {
        ParseCtx {
            schema,
            consts: BTreeSet::new(),
        }
    }

    pub fn with_consts(schema: Arc<Schema>, consts: impl IntoIterator<Item = String>) -> Self {
        ParseCtx {
            schema,
            consts: consts.into_iter().collect(),
        }
    }
}

/// Parse a formula. The result is binder-normalized and every atom is
/// validated against the schema.
pub fn parse_formula(text: &str, ctx: &ParseCtx) -> Result<Formula> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        ctx,
        text,
    };
    let f = p.formula()?;
    p.expect_end()?;
    Ok(normalize(f, ctx))
}

/// Parse `ans(x1, ..., xl) :- body`. The head must list exactly the free
/// variables of the body.
pub fn parse_query(text: &str, ctx: &ParseCtx) -> Result<Query> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        ctx,
        text,
    };
    let head = p.query_head()?;
    let body = p.formula()?;
    p.expect_end()?;
    Query::new(head, normalize(body, ctx))
}

fn normalize(f: Formula, ctx: &ParseCtx) -> Formula {
    f.normalize_binders_avoiding(&ctx.consts)
}

impl Formula {
    /// Binder normalization that additionally keeps fresh names clear of a
    /// reserved set (the declared constants, so renamed variables never
    /// reparse as constants).
    pub fn normalize_binders_avoiding(self, reserved: &BTreeSet<String>) -> Formula {
        // Pre-seed the used-name set by temporarily treating reserved names
        // as variables of an enclosing scope.
        let mut padded = self;
        for r in reserved {
            padded = Formula::Forall(r.clone(), Box::new(padded));
        }
        let mut normalized = padded.normalize_binders();
        for _ in reserved {
            match normalized {
                Formula::Forall(_, body) => normalized = *body,
                _ => unreachable!("padding binders are outermost"),
            }
        }
        normalized
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Neq,
    Arrow,
    TurnStile, // :-
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '(' => {
                out.push(Spanned { tok: Tok::LParen, offset: i });
                i += 1;
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, offset: i });
                i += 1;
            }
            ',' => {
                out.push(Spanned { tok: Tok::Comma, offset: i });
                i += 1;
            }
            '.' => {
                out.push(Spanned { tok: Tok::Dot, offset: i });
                i += 1;
            }
            '=' => {
                out.push(Spanned { tok: Tok::Eq, offset: i });
                i += 1;
            }
            '!' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    out.push(Spanned { tok: Tok::Neq, offset: i });
                    i += 2;
                } else {
                    return Err(err_at(text, i, "expected `!=`"));
                }
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push(Spanned { tok: Tok::Arrow, offset: i });
                    i += 2;
                } else {
                    return Err(err_at(text, i, "expected `->`"));
                }
            }
            ':' => {
                if bytes.get(i + 1) == Some(&b'-') {
                    out.push(Spanned { tok: Tok::TurnStile, offset: i });
                    i += 2;
                } else {
                    return Err(err_at(text, i, "expected `:-`"));
                }
            }
            '\'' | '"' => {
                let quote = c;
                let start = i;
                i += 1;
                let mut s = String::new();
                loop {
                    match bytes.get(i).map(|&b| b as char) {
                        None => return Err(err_at(text, start, "unterminated string")),
                        Some('\\') => {
                            match bytes.get(i + 1).map(|&b| b as char) {
                                Some(esc @ ('\\' | '\'' | '"')) => {
                                    s.push(esc);
                                    i += 2;
                                }
                                _ => return Err(err_at(text, i, "bad escape")),
                            }
                        }
                        Some(ch) if ch == quote => {
                            i += 1;
                            break;
                        }
                        Some(ch) => {
                            s.push(ch);
                            i += ch.len_utf8();
                        }
                    }
                }
                out.push(Spanned { tok: Tok::Str(s), offset: start });
            }
            _ if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < bytes.len() {
                    let ch = bytes[i] as char;
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push(Spanned {
                    tok: Tok::Ident(text[start..i].to_string()),
                    offset: start,
                });
            }
            _ => return Err(err_at(text, i, &format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

fn err_at(text: &str, offset: usize, msg: &str) -> Error {
    let mut line = 1;
    let mut col = 1;
    for (i, c) in text.char_indices() {
        if i >= offset {
            break;
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    Error::Parse {
        line,
        col,
        msg: msg.to_string(),
    }
}

struct Parser<'a> {
    tokens: Vec<Spanned>,
    pos: usize,
    ctx: &'a ParseCtx,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.tokens.get(self.pos + 1).map(|s| &s.tok)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|s| s.offset)
            .unwrap_or(self.text.len())
    }

    fn fail(&self, msg: &str) -> Error {
        err_at(self.text, self.offset(), msg)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.fail(&format!("expected {what}")))
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(self.fail("expected end of input"))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        self.implies()
    }

    fn implies(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if matches!(self.peek(), Some(Tok::Arrow)) {
            self.pos += 1;
            let rhs = self.implies()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.eat_keyword("or") {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.eat_keyword("and") {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat_keyword("not") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_keyword("forall") || self.is_keyword("exists") {
            let universal = self.is_keyword("forall");
            self.pos += 1;
            let var = self.binder_var()?;
            self.expect(Tok::Dot, "`.` after the quantified variable")?;
            let body = self.formula()?;
            return Ok(if universal {
                Formula::forall(var, body)
            } else {
                Formula::exists(var, body)
            });
        }
        self.primary()
    }

    fn binder_var(&mut self) -> Result<String> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if RESERVED.contains(&name.as_str()) || name == "null" {
                    return Err(err_at(self.text, offset, "keyword cannot be a variable"));
                }
                if self.ctx.consts.contains(&name) {
                    return Err(err_at(
                        self.text,
                        offset,
                        &format!("`{name}` is a declared constant and cannot be bound"),
                    ));
                }
                if !name.chars().next().map(|c| c.is_ascii_lowercase()).unwrap_or(false) {
                    return Err(err_at(
                        self.text,
                        offset,
                        "quantified variables must start with a lowercase letter",
                    ));
                }
                Ok(name)
            }
            _ => Err(self.fail("expected a variable")),
        }
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(_)) if matches!(self.peek2(), Some(Tok::LParen)) => self.atom(),
            _ => {
                let lhs = self.term()?;
                match self.peek() {
                    Some(Tok::Eq) => {
                        self.pos += 1;
                        Ok(Formula::eq(lhs, self.term()?))
                    }
                    Some(Tok::Neq) => {
                        self.pos += 1;
                        Ok(Formula::neq(lhs, self.term()?))
                    }
                    _ => Err(self.fail("expected `=` or `!=`")),
                }
            }
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let (name, offset) = match self.next() {
            Some(Spanned { tok: Tok::Ident(name), offset }) => (name, offset),
            _ => unreachable!("caller checked"),
        };
        let arity = self
            .ctx
            .schema
            .arity(&name)
            .map_err(|_| err_at(self.text, offset, &format!("unknown relation symbol `{name}`")))?;
        self.expect(Tok::LParen, "`(`")?;
        let mut terms = Vec::new();
        if !matches!(self.peek(), Some(Tok::RParen)) {
            loop {
                terms.push(self.term()?);
                if matches!(self.peek(), Some(Tok::Comma)) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        if terms.len() != arity {
            return Err(err_at(
                self.text,
                offset,
                &format!("`{name}` expects {arity} arguments, got {}", terms.len()),
            ));
        }
        Ok(Formula::Atom(name, terms))
    }

    fn term(&mut self) -> Result<Term> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Term::Const(Value::c(s)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "null" {
                    return Ok(Term::null());
                }
                if RESERVED.contains(&name.as_str()) {
                    return Err(err_at(self.text, offset, &format!("`{name}` cannot be a term")));
                }
                if self.ctx.consts.contains(&name) {
                    return Ok(Term::Const(Value::c(name)));
                }
                let first = name.chars().next().unwrap_or('_');
                if first.is_ascii_lowercase() || first == '_' {
                    Ok(Term::Var(name))
                } else {
                    // Uppercase or digit-initial bare identifiers read as
                    // constant tokens.
                    Ok(Term::Const(Value::c(name)))
                }
            }
            _ => Err(self.fail("expected a term")),
        }
    }

    fn query_head(&mut self) -> Result<Vec<String>> {
        if !self.eat_keyword("ans") {
            return Err(self.fail("queries start with `ans(`"));
        }
        self.expect(Tok::LParen, "`(`")?;
        let mut head = Vec::new();
        if !matches!(self.peek(), Some(Tok::RParen)) {
            loop {
                head.push(self.binder_var()?);
                if matches!(self.peek(), Some(Tok::Comma)) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::TurnStile, "`:-`")?;
        Ok(head)
    }
}

const RESERVED: &[&str] = &["forall", "exists", "and", "or", "not"];
