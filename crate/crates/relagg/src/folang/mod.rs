//! The first-order language over a schema: equality, relational atoms,
//! negation, implication, and active-domain universal quantification.
//!
//! The AST carries only those five primitive forms; `and`, `or`, `exists`,
//! and `!=` are derived and desugar on construction:
//!
//! - `a and b`  = `not (a -> not b)`
//! - `a or b`   = `not a -> b`
//! - `exists x. f` = `not forall x. not f`
//! - `t != t'`  = `not t = t'`
//!
//! [`Formula::view`] resugars those encodings, which is what the printer and
//! the fragment classifier operate on.

mod classify;
mod eval;
mod parse;

pub use classify::{classify, FragmentFlags};
pub use eval::{answer, is_true, satisfies};
pub use parse::{parse_formula, parse_query, ParseCtx};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{Tuple, Value};
use crate::{Error, Result};

/// A term: a variable or a constant value (including `null`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(Value),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn val(token: impl Into<String>) -> Self {
        Term::Const(Value::c(token))
    }

    pub fn null() -> Self {
        Term::Const(Value::Null)
    }
}

/// A first-order formula in primitive form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Eq(Term, Term),
    Atom(String, Vec<Term>),
    Not(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn atom(symbol: impl Into<String>, terms: Vec<Term>) -> Self {
        Formula::Atom(symbol.into(), terms)
    }

    pub fn eq(a: Term, b: Term) -> Self {
        Formula::Eq(a, b)
    }

    pub fn neq(a: Term, b: Term) -> Self {
        Formula::Not(Box::new(Formula::Eq(a, b)))
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::implies(a, Formula::not(b)))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::implies(Formula::not(a), b)
    }

    pub fn forall(x: impl Into<String>, f: Formula) -> Self {
        Formula::Forall(x.into(), Box::new(f))
    }

    pub fn exists(x: impl Into<String>, f: Formula) -> Self {
        Formula::not(Formula::forall(x, Formula::not(f)))
    }

    /// Left fold of a non-empty conjunction.
    pub fn conj(mut parts: Vec<Formula>) -> Formula {
        assert!(!parts.is_empty(), "conj of zero formulas");
        let mut acc = parts.remove(0);
        for p in parts {
            acc = Formula::and(acc, p);
        }
        acc
    }

    /// Resugared reading of the outermost connective.
    pub fn view(&self) -> View<'_> {
        match self {
            Formula::Eq(a, b) => View::Eq(a, b),
            Formula::Atom(p, ts) => View::Atom(p, ts),
            Formula::Forall(x, body) => View::Forall(x, body),
            Formula::Implies(a, b) => match &**a {
                // `¬X -> b` is the `or` encoding, except when ¬X is itself
                // the `and` encoding ¬(p -> ¬q): an implication whose
                // antecedent is a conjunction reads better as written, and
                // both readings denote the same AST.
                Formula::Not(na) => match &**na {
                    Formula::Implies(_, r) if matches!(&**r, Formula::Not(_)) => {
                        View::Implies(a, b)
                    }
                    _ => View::Or(na, b),
                },
                _ => View::Implies(a, b),
            },
            Formula::Not(inner) => match &**inner {
                Formula::Eq(a, b) => View::Neq(a, b),
                Formula::Forall(x, body) => match &**body {
                    Formula::Not(f) => View::Exists(x, f),
                    _ => View::Not(inner),
                },
                Formula::Implies(a, c) => match &**c {
                    Formula::Not(b) => View::And(a, b),
                    _ => View::Not(inner),
                },
                _ => View::Not(inner),
            },
        }
    }

    /// Free variables, in name order.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn walk(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Eq(a, b) => {
                    for t in [a, b] {
                        if let Term::Var(v) = t {
                            if !bound.iter().any(|b| b == v) {
                                out.insert(v.clone());
                            }
                        }
                    }
                }
                Formula::Atom(_, ts) => {
                    for t in ts {
                        if let Term::Var(v) = t {
                            if !bound.iter().any(|b| b == v) {
                                out.insert(v.clone());
                            }
                        }
                    }
                }
                Formula::Not(g) => walk(g, bound, out),
                Formula::Implies(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                Formula::Forall(x, body) => {
                    bound.push(x.clone());
                    walk(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// All identifiers appearing as variables (free or bound).
    fn all_var_names(&self) -> BTreeSet<String> {
        fn walk(f: &Formula, out: &mut BTreeSet<String>) {
            match f {
                Formula::Eq(a, b) => {
                    for t in [a, b] {
                        if let Term::Var(v) = t {
                            out.insert(v.clone());
                        }
                    }
                }
                Formula::Atom(_, ts) => {
                    for t in ts {
                        if let Term::Var(v) = t {
                            out.insert(v.clone());
                        }
                    }
                }
                Formula::Not(g) => walk(g, out),
                Formula::Implies(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Formula::Forall(x, body) => {
                    out.insert(x.clone());
                    walk(body, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut out);
        out
    }

    /// Rename binders so that no variable is both free and bound and no
    /// binder shadows an enclosing one. The parser applies this to every
    /// formula it returns.
    pub fn normalize_binders(self) -> Formula {
        let free = self.free_vars();
        let mut used = self.all_var_names();

        fn fresh(base: &str, used: &mut BTreeSet<String>) -> String {
            let mut k = 2usize;
            loop {
                let cand = format!("{base}{k}");
                if !used.contains(&cand) {
                    used.insert(cand.clone());
                    return cand;
                }
                k += 1;
            }
        }

        fn walk(
            f: Formula,
            scope: &mut Vec<(String, String)>,
            free: &BTreeSet<String>,
            used: &mut BTreeSet<String>,
        ) -> Formula {
            let rename_term = |t: Term, scope: &Vec<(String, String)>| match t {
                Term::Var(v) => {
                    let name = scope
                        .iter()
                        .rev()
                        .find(|(orig, _)| *orig == v)
                        .map(|(_, cur)| cur.clone())
                        .unwrap_or(v);
                    Term::Var(name)
                }
                c => c,
            };
            match f {
                Formula::Eq(a, b) => Formula::Eq(rename_term(a, scope), rename_term(b, scope)),
                Formula::Atom(p, ts) => Formula::Atom(
                    p,
                    ts.into_iter().map(|t| rename_term(t, scope)).collect(),
                ),
                Formula::Not(g) => Formula::Not(Box::new(walk(*g, scope, free, used))),
                Formula::Implies(a, b) => Formula::Implies(
                    Box::new(walk(*a, scope, free, used)),
                    Box::new(walk(*b, scope, free, used)),
                ),
                Formula::Forall(x, body) => {
                    let shadows = scope.iter().any(|(orig, _)| *orig == x)
                        || scope.iter().any(|(_, cur)| *cur == x);
                    let needs = shadows || free.contains(&x);
                    let new_name = if needs { fresh(&x, used) } else { x.clone() };
                    scope.push((x, new_name.clone()));
                    let body = walk(*body, scope, free, used);
                    scope.pop();
                    Formula::Forall(new_name, Box::new(body))
                }
            }
        }

        walk(self, &mut Vec::new(), &free, &mut used)
    }

    /// Render with a set of declared constant names that may print bare.
    pub fn to_text(&self, consts: &BTreeSet<String>) -> String {
        let mut out = String::new();
        print_formula(self, 1, true, consts, &mut out);
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text(&BTreeSet::new()))
    }
}

/// Resugared view of a formula's outermost connective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View<'a> {
    Eq(&'a Term, &'a Term),
    Neq(&'a Term, &'a Term),
    Atom(&'a str, &'a [Term]),
    Not(&'a Formula),
    And(&'a Formula, &'a Formula),
    Or(&'a Formula, &'a Formula),
    Implies(&'a Formula, &'a Formula),
    Forall(&'a str, &'a Formula),
    Exists(&'a str, &'a Formula),
}

const KEYWORDS: &[&str] = &["forall", "exists", "and", "or", "not", "null", "ans"];

pub(crate) fn is_bare_ident(token: &str) -> bool {
    !token.is_empty()
        && token
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&token)
}

fn print_term(t: &Term, consts: &BTreeSet<String>, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(v),
        Term::Const(Value::Null) => out.push_str("null"),
        Term::Const(Value::Const(tok)) => {
            let bare = is_bare_ident(tok)
                && (consts.contains(tok)
                    || tok
                        .chars()
                        .next()
                        .map(|c| c.is_ascii_uppercase() || c.is_ascii_digit())
                        .unwrap_or(false));
            if bare {
                out.push_str(tok);
            } else {
                out.push('\'');
                for c in tok.chars() {
                    if c == '\'' || c == '\\' {
                        out.push('\\');
                    }
                    out.push(c);
                }
                out.push('\'');
            }
        }
    }
}

fn print_formula(
    f: &Formula,
    min_prec: u8,
    tail: bool,
    consts: &BTreeSet<String>,
    out: &mut String,
) {
    let view = f.view();
    let prec = match view {
        View::Implies(..) => 1,
        View::Or(..) => 2,
        View::And(..) => 3,
        View::Not(..) | View::Forall(..) | View::Exists(..) => 4,
        View::Eq(..) | View::Neq(..) | View::Atom(..) => 5,
    };
    let quantifier = matches!(view, View::Forall(..) | View::Exists(..));
    let needs_paren = prec < min_prec || (quantifier && !tail);
    if needs_paren {
        out.push('(');
    }
    let tail = tail || needs_paren;
    match view {
        View::Eq(a, b) => {
            print_term(a, consts, out);
            out.push_str(" = ");
            print_term(b, consts, out);
        }
        View::Neq(a, b) => {
            print_term(a, consts, out);
            out.push_str(" != ");
            print_term(b, consts, out);
        }
        View::Atom(p, ts) => {
            out.push_str(p);
            out.push('(');
            for (i, t) in ts.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_term(t, consts, out);
            }
            out.push(')');
        }
        View::Not(g) => {
            out.push_str("not ");
            print_formula(g, 4, tail, consts, out);
        }
        View::And(a, b) => {
            print_formula(a, 3, false, consts, out);
            out.push_str(" and ");
            print_formula(b, 4, tail, consts, out);
        }
        View::Or(a, b) => {
            print_formula(a, 2, false, consts, out);
            out.push_str(" or ");
            print_formula(b, 3, tail, consts, out);
        }
        View::Implies(a, b) => {
            print_formula(a, 2, false, consts, out);
            out.push_str(" -> ");
            print_formula(b, 1, tail, consts, out);
        }
        View::Forall(x, body) => {
            out.push_str("forall ");
            out.push_str(x);
            out.push_str(". ");
            print_quantifier_body(body, consts, out);
        }
        View::Exists(x, body) => {
            out.push_str("exists ");
            out.push_str(x);
            out.push_str(". ");
            print_quantifier_body(body, consts, out);
        }
    }
    if needs_paren {
        out.push(')');
    }
}

/// Quantifier bodies extend maximally right; wrap binary bodies in parens so
/// printed formulas stay readable.
fn print_quantifier_body(body: &Formula, consts: &BTreeSet<String>, out: &mut String) {
    let wrap = matches!(
        body.view(),
        View::And(..) | View::Or(..) | View::Implies(..)
    );
    if wrap {
        out.push('(');
        print_formula(body, 1, true, consts, out);
        out.push(')');
    } else {
        print_formula(body, 1, true, consts, out);
    }
}

/// A partial map from variable names to values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(pub BTreeMap<String, Value>);

impl Assignment {
    pub fn empty() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn bind(mut self, var: impl Into<String>, value: Value) -> Self {
        self.0.insert(var.into(), value);
        self
    }
}

/// An open formula with an explicit output order for its free variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Query {
    head: Vec<String>,
    body: Formula,
}

impl Query {
    /// `head` must list each free variable of `body` exactly once; the order
    /// fixes answer-tuple coordinates.
    pub fn new(head: Vec<String>, body: Formula) -> Result<Self> {
        let head_set: BTreeSet<&String> = head.iter().collect();
        if head_set.len() != head.len() {
            return Err(Error::HeadMismatch {
                head,
                free: Vec::new(),
            });
        }
        let free = body.free_vars();
        if head_set.iter().map(|s| s.as_str()).collect::<BTreeSet<_>>()
            != free.iter().map(|s| s.as_str()).collect::<BTreeSet<_>>()
        {
            return Err(Error::HeadMismatch {
                head,
                free: free.into_iter().collect(),
            });
        }
        Ok(Query { head, body })
    }

    pub fn head(&self) -> &[String] {
        &self.head
    }

    pub fn body(&self) -> &Formula {
        &self.body
    }

    pub fn width(&self) -> usize {
        self.head.len()
    }

    pub fn to_text(&self, consts: &BTreeSet<String>) -> String {
        format!("ans({}) :- {}", self.head.join(", "), self.body.to_text(consts))
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text(&BTreeSet::new()))
    }
}

/// A finite set of equal-width answer tuples; values are drawn from the
/// queried instance's active domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AnswerSet {
    width: usize,
    tuples: BTreeSet<Tuple>,
}

impl AnswerSet {
    pub fn new(width: usize, tuples: impl IntoIterator<Item = Tuple>) -> Result<Self> {
        let tuples: BTreeSet<Tuple> = tuples.into_iter().collect();
        if let Some(t) = tuples.iter().find(|t| t.arity() != width) {
            return Err(Error::WidthMismatch(width, t.arity()));
        }
        Ok(AnswerSet { width, tuples })
    }

    pub fn empty(width: usize) -> Self {
        AnswerSet {
            width,
            tuples: BTreeSet::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn tuples(&self) -> &BTreeSet<Tuple> {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn is_subset(&self, other: &AnswerSet) -> bool {
        self.width == other.width && self.tuples.is_subset(&other.tuples)
    }

    pub fn symmetric_distance(&self, other: &AnswerSet) -> Result<usize> {
        if self.width != other.width {
            return Err(Error::WidthMismatch(self.width, other.width));
        }
        Ok(crate::model::relation_distance(&self.tuples, &other.tuples))
    }
}

impl fmt::Display for AnswerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, t) in self.tuples.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_forms_desugar() {
        let p = Formula::atom("P", vec![Term::var("x")]);
        let q = Formula::atom("Q", vec![Term::var("x")]);
        assert_eq!(
            Formula::and(p.clone(), q.clone()),
            Formula::not(Formula::implies(p.clone(), Formula::not(q.clone())))
        );
        assert_eq!(
            Formula::or(p.clone(), q.clone()),
            Formula::implies(Formula::not(p.clone()), q.clone())
        );
        assert_eq!(
            Formula::exists("x", p.clone()),
            Formula::not(Formula::forall("x", Formula::not(p.clone())))
        );
        assert_eq!(
            Formula::neq(Term::var("x"), Term::var("y")),
            Formula::not(Formula::eq(Term::var("x"), Term::var("y")))
        );
    }

    #[test]
    fn view_resugars() {
        let p = Formula::atom("P", vec![Term::var("x")]);
        let q = Formula::atom("Q", vec![Term::var("x")]);
        assert!(matches!(Formula::and(p.clone(), q.clone()).view(), View::And(..)));
        assert!(matches!(Formula::or(p.clone(), q.clone()).view(), View::Or(..)));
        assert!(matches!(Formula::exists("x", p.clone()).view(), View::Exists(..)));
        assert!(matches!(
            Formula::neq(Term::var("x"), Term::var("y")).view(),
            View::Neq(..)
        ));
        assert!(matches!(Formula::not(p.clone()).view(), View::Not(..)));
        assert!(matches!(Formula::implies(p, q).view(), View::Implies(..)));
    }

    #[test]
    fn free_vars_respect_binders() {
        // exists y. P(x, y)
        let f = Formula::exists("y", Formula::atom("P", vec![Term::var("x"), Term::var("y")]));
        let fv: Vec<_> = f.free_vars().into_iter().collect();
        assert_eq!(fv, vec!["x".to_string()]);
    }

    #[test]
    fn binder_normalization_renames_shadowers() {
        // P(x) and forall x. Q(x)  — the bound x must move out of the way.
        let f = Formula::and(
            Formula::atom("P", vec![Term::var("x")]),
            Formula::forall("x", Formula::atom("Q", vec![Term::var("x")])),
        )
        .normalize_binders();
        let printed = f.to_text(&BTreeSet::new());
        assert_eq!(printed, "P(x) and forall x2. Q(x2)");

        // Nested shadowing.
        let g = Formula::forall(
            "x",
            Formula::and(
                Formula::atom("P", vec![Term::var("x")]),
                Formula::forall("x", Formula::atom("Q", vec![Term::var("x")])),
            ),
        )
        .normalize_binders();
        assert_eq!(g.to_text(&BTreeSet::new()), "forall x. (P(x) and forall x2. Q(x2))");
    }

    #[test]
    fn query_head_must_match_free_vars() {
        let body = Formula::atom("P", vec![Term::var("x"), Term::var("y")]);
        assert!(Query::new(vec!["x".into(), "y".into()], body.clone()).is_ok());
        assert!(Query::new(vec!["x".into()], body.clone()).is_err());
        assert!(Query::new(vec!["x".into(), "x".into()], body).is_err());
    }
}
