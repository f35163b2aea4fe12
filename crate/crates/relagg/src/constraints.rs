//! Structured integrity constraints, their direct checkers, and their
//! first-order translations.
//!
//! Three families: functional dependencies, value constraints, and
//! referential constraints. Each constraint checks directly against an
//! instance and also translates to an equivalent sentence evaluated under
//! active-domain semantics; the test suites assert the two routes agree.
//!
//! Positions are 1-based everywhere, matching the textual form
//! (`fd P: 1 -> 2 3`, `value P[2] in Pv`, `ref P1 -> P2 on 1`).

use std::collections::BTreeMap;
use std::fmt;

use crate::folang::{Formula, Term};
use crate::model::{Instance, Schema, Tuple};
use crate::{Error, Result};

/// Tuples agreeing on every key position must agree on every dependent
/// position. The textual form writes keys `1..k` and dependents `k+1..q`;
/// the engine accepts arbitrary disjoint position sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FunctionalDependency {
    pub symbol: String,
    pub key_positions: Vec<usize>,
    pub dependent_positions: Vec<usize>,
}

/// Values at one position of `symbol` must appear in the unary relation
/// `value_relation`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ValueConstraint {
    pub symbol: String,
    pub position: usize,
    pub value_relation: String,
}

/// The last `width` coordinates of each `source` tuple must prefix-match the
/// first `width` coordinates of some `target` tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ReferentialConstraint {
    pub source: String,
    pub target: String,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Constraint {
    Fd(FunctionalDependency),
    Value(ValueConstraint),
    Ref(ReferentialConstraint),
}

impl FunctionalDependency {
    pub fn new(
        symbol: impl Into<String>,
        key_positions: Vec<usize>,
        dependent_positions: Vec<usize>,
    ) -> Result<Self> {
        let symbol = symbol.into();
        if key_positions.is_empty() || dependent_positions.is_empty() {
            return Err(Error::BadConstraint(
                "functional dependency needs key and dependent positions".into(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &p in key_positions.iter().chain(&dependent_positions) {
            if p == 0 {
                return Err(Error::BadConstraint("positions are 1-based".into()));
            }
            if !seen.insert(p) {
                return Err(Error::BadConstraint(format!(
                    "position {p} appears on both sides"
                )));
            }
        }
        Ok(FunctionalDependency {
            symbol,
            key_positions,
            dependent_positions,
        })
    }

    /// Key dependency: a single key position.
    pub fn is_key_dependency(&self) -> bool {
        self.key_positions.len() == 1
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        let arity = schema.arity(&self.symbol)?;
        for &p in self.key_positions.iter().chain(&self.dependent_positions) {
            if p > arity {
                return Err(Error::BadConstraint(format!(
                    "position {p} exceeds arity {arity} of `{}`",
                    self.symbol
                )));
            }
        }
        Ok(())
    }
}

impl ValueConstraint {
    pub fn new(
        symbol: impl Into<String>,
        position: usize,
        value_relation: impl Into<String>,
    ) -> Result<Self> {
        if position == 0 {
            return Err(Error::BadConstraint("positions are 1-based".into()));
        }
        Ok(ValueConstraint {
            symbol: symbol.into(),
            position,
            value_relation: value_relation.into(),
        })
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        let arity = schema.arity(&self.symbol)?;
        if self.position > arity {
            return Err(Error::BadConstraint(format!(
                "position {} exceeds arity {arity} of `{}`",
                self.position, self.symbol
            )));
        }
        if schema.arity(&self.value_relation)? != 1 {
            return Err(Error::BadConstraint(format!(
                "`{}` must be unary to hold admissible values",
                self.value_relation
            )));
        }
        Ok(())
    }
}

impl ReferentialConstraint {
    pub fn new(
        source: impl Into<String>,
        target: impl Into<String>,
        width: usize,
    ) -> Result<Self> {
        if width == 0 {
            return Err(Error::BadConstraint("foreign-key width must be positive".into()));
        }
        Ok(ReferentialConstraint {
            source: source.into(),
            target: target.into(),
            width,
        })
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        let q1 = schema.arity(&self.source)?;
        let q2 = schema.arity(&self.target)?;
        if self.width > q1 || self.width > q2 {
            return Err(Error::BadConstraint(format!(
                "width {} exceeds arity of `{}` or `{}`",
                self.width, self.source, self.target
            )));
        }
        Ok(())
    }
}

impl Constraint {
    pub fn validate(&self, schema: &Schema) -> Result<()> {
        match self {
            Constraint::Fd(c) => c.validate(schema),
            Constraint::Value(c) => c.validate(schema),
            Constraint::Ref(c) => c.validate(schema),
        }
    }

    pub fn check(&self, d: &Instance) -> Result<bool> {
        match self {
            Constraint::Fd(c) => check_fd(d, c),
            Constraint::Value(c) => check_value(d, c),
            Constraint::Ref(c) => check_ref(d, c),
        }
    }

    pub fn to_formula(&self, schema: &Schema) -> Result<Formula> {
        match self {
            Constraint::Fd(c) => fd_formula(schema, c),
            Constraint::Value(c) => value_formula(schema, c),
            Constraint::Ref(c) => ref_formula(schema, c),
        }
    }

    /// Parse one line of the constraint language:
    /// `fd P: 1 -> 2 3`, `value P[2] in Pv`, or `ref P1 -> P2 on 1`.
    pub fn parse(line: &str, schema: &Schema) -> Result<Constraint> {
        let c = parse_line(line)?;
        c.validate(schema)?;
        Ok(c)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Fd(c) => {
                let keys: Vec<String> = c.key_positions.iter().map(|p| p.to_string()).collect();
                let deps: Vec<String> =
                    c.dependent_positions.iter().map(|p| p.to_string()).collect();
                write!(f, "fd {}: {} -> {}", c.symbol, keys.join(" "), deps.join(" "))
            }
            Constraint::Value(c) => {
                write!(f, "value {}[{}] in {}", c.symbol, c.position, c.value_relation)
            }
            Constraint::Ref(c) => write!(f, "ref {} -> {} on {}", c.source, c.target, c.width),
        }
    }
}

fn parse_line(line: &str) -> Result<Constraint> {
    let bad = |msg: &str| Error::BadConstraint(format!("{msg} in `{}`", line.trim()));
    let line = line.trim();
    if let Some(rest) = line.strip_prefix("fd ") {
        let (symbol, positions) = rest.split_once(':').ok_or_else(|| bad("missing `:`"))?;
        let (keys, deps) = positions.split_once("->").ok_or_else(|| bad("missing `->`"))?;
        let parse_positions = |s: &str| -> Result<Vec<usize>> {
            s.split_whitespace()
                .map(|tok| tok.parse::<usize>().map_err(|_| bad("bad position")))
                .collect()
        };
        let fd = FunctionalDependency::new(
            symbol.trim(),
            parse_positions(keys)?,
            parse_positions(deps)?,
        )?;
        Ok(Constraint::Fd(fd))
    } else if let Some(rest) = line.strip_prefix("value ") {
        let (lhs, value_rel) = rest.split_once(" in ").ok_or_else(|| bad("missing ` in `"))?;
        let lhs = lhs.trim();
        let open = lhs.find('[').ok_or_else(|| bad("missing `[`"))?;
        if !lhs.ends_with(']') {
            return Err(bad("missing `]`"));
        }
        let symbol = &lhs[..open];
        let position: usize = lhs[open + 1..lhs.len() - 1]
            .trim()
            .parse()
            .map_err(|_| bad("bad position"))?;
        Ok(Constraint::Value(ValueConstraint::new(
            symbol.trim(),
            position,
            value_rel.trim(),
        )?))
    } else if let Some(rest) = line.strip_prefix("ref ") {
        let (source, rhs) = rest.split_once("->").ok_or_else(|| bad("missing `->`"))?;
        let (target, width) = rhs.split_once(" on ").ok_or_else(|| bad("missing ` on `"))?;
        let width: usize = width.trim().parse().map_err(|_| bad("bad width"))?;
        Ok(Constraint::Ref(ReferentialConstraint::new(
            source.trim(),
            target.trim(),
            width,
        )?))
    } else {
        Err(bad("expected `fd`, `value`, or `ref`"))
    }
}

/// Parse a multi-line constraint document, one constraint per non-empty line.
/// Lines starting with `#` are comments.
pub fn parse_constraints(text: &str, schema: &Schema) -> Result<Vec<Constraint>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| Constraint::parse(l, schema))
        .collect()
}

/// No two tuples agree on every key position while differing on a dependent
/// position.
pub fn check_fd(d: &Instance, c: &FunctionalDependency) -> Result<bool> {
    c.validate(d.schema())?;
    let mut seen: BTreeMap<Vec<&crate::model::Value>, Vec<&crate::model::Value>> = BTreeMap::new();
    for t in d.relation(&c.symbol)? {
        let key: Vec<_> = c.key_positions.iter().map(|&p| &t.values()[p - 1]).collect();
        let dep: Vec<_> = c
            .dependent_positions
            .iter()
            .map(|&p| &t.values()[p - 1])
            .collect();
        match seen.get(&key) {
            Some(prev) if *prev != dep => return Ok(false),
            Some(_) => {}
            None => {
                seen.insert(key, dep);
            }
        }
    }
    Ok(true)
}

/// Every tuple's value at the constrained position appears in the value
/// relation.
pub fn check_value(d: &Instance, c: &ValueConstraint) -> Result<bool> {
    c.validate(d.schema())?;
    let admissible = d.relation(&c.value_relation)?;
    for t in d.relation(&c.symbol)? {
        let v = &t.values()[c.position - 1];
        if !admissible.contains(&Tuple(vec![v.clone()])) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every source tuple's last `width` coordinates match the first `width`
/// coordinates of some target tuple.
pub fn check_ref(d: &Instance, c: &ReferentialConstraint) -> Result<bool> {
    c.validate(d.schema())?;
    let q1 = d.schema().arity(&c.source)?;
    let targets = d.relation(&c.target)?;
    'next: for t in d.relation(&c.source)? {
        let suffix = &t.values()[q1 - c.width..];
        for u in targets {
            if &u.values()[..c.width] == suffix {
                continue 'next;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

fn vars(prefix: &str, n: usize) -> Vec<Term> {
    (1..=n).map(|i| Term::var(format!("{prefix}{i}"))).collect()
}

fn var_name(t: &Term) -> String {
    match t {
        Term::Var(v) => v.clone(),
        Term::Const(_) => unreachable!("translation uses variables only"),
    }
}

fn forall_all(vars: &[Term], body: Formula) -> Formula {
    vars.iter()
        .rev()
        .fold(body, |acc, v| Formula::forall(var_name(v), acc))
}

fn exists_all(vars: &[Term], body: Formula) -> Formula {
    vars.iter()
        .rev()
        .fold(body, |acc, v| Formula::exists(var_name(v), acc))
}

fn fd_formula(schema: &Schema, c: &FunctionalDependency) -> Result<Formula> {
    c.validate(schema)?;
    let q = schema.arity(&c.symbol)?;
    let xs = vars("x", q);
    let ys = vars("y", q);
    let mut antecedent = vec![
        Formula::atom(&c.symbol, xs.clone()),
        Formula::atom(&c.symbol, ys.clone()),
    ];
    for &p in &c.key_positions {
        antecedent.push(Formula::eq(xs[p - 1].clone(), ys[p - 1].clone()));
    }
    let consequent = Formula::conj(
        c.dependent_positions
            .iter()
            .map(|&p| Formula::eq(xs[p - 1].clone(), ys[p - 1].clone()))
            .collect(),
    );
    let body = Formula::implies(Formula::conj(antecedent), consequent);
    Ok(forall_all(&xs, forall_all(&ys, body)))
}

fn value_formula(schema: &Schema, c: &ValueConstraint) -> Result<Formula> {
    c.validate(schema)?;
    let q = schema.arity(&c.symbol)?;
    let xs = vars("x", q);
    let body = Formula::implies(
        Formula::atom(&c.symbol, xs.clone()),
        Formula::atom(&c.value_relation, vec![xs[c.position - 1].clone()]),
    );
    Ok(forall_all(&xs, body))
}

fn ref_formula(schema: &Schema, c: &ReferentialConstraint) -> Result<Formula> {
    c.validate(schema)?;
    let q1 = schema.arity(&c.source)?;
    let q2 = schema.arity(&c.target)?;
    let xs = vars("x", q1);
    let ys = vars("y", q2);
    let mut inner = vec![Formula::atom(&c.target, ys.clone())];
    for j in 1..=c.width {
        inner.push(Formula::eq(
            xs[q1 - c.width + j - 1].clone(),
            ys[j - 1].clone(),
        ));
    }
    let body = Formula::implies(
        Formula::atom(&c.source, xs.clone()),
        exists_all(&ys, Formula::conj(inner)),
    );
    Ok(forall_all(&xs, body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use std::sync::Arc;

    fn schema2() -> Arc<Schema> {
        Schema::new([("P", 2), ("Pv", 1)]).unwrap()
    }

    fn p_instance(rows: &[(&str, &str)], pv: &[&str]) -> Instance {
        Instance::new(
            schema2(),
            [
                (
                    "P",
                    rows.iter().map(|(a, b)| Tuple::of(&[a, b])).collect::<Vec<_>>(),
                ),
                ("Pv", pv.iter().map(|a| Tuple::of(&[a])).collect::<Vec<_>>()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn fd_detects_key_violations() {
        let fd = FunctionalDependency::new("P", vec![1], vec![2]).unwrap();
        assert!(check_fd(&p_instance(&[("a", "b"), ("c", "b")], &[]), &fd).unwrap());
        assert!(!check_fd(&p_instance(&[("a", "b"), ("a", "c")], &[]), &fd).unwrap());
        assert!(check_fd(&p_instance(&[], &[]), &fd).unwrap());
        assert!(fd.is_key_dependency());
    }

    #[test]
    fn value_checks_membership() {
        let vc = ValueConstraint::new("P", 2, "Pv").unwrap();
        assert!(check_value(&p_instance(&[("a", "b")], &["b"]), &vc).unwrap());
        assert!(!check_value(&p_instance(&[("a", "b")], &["c"]), &vc).unwrap());
        assert!(check_value(&p_instance(&[], &[]), &vc).unwrap());
    }

    #[test]
    fn referential_needs_a_witness() {
        let schema = Schema::new([("P1", 2), ("P2", 2)]).unwrap();
        let rc = ReferentialConstraint::new("P1", "P2", 1).unwrap();
        let make = |p1: &[(&str, &str)], p2: &[(&str, &str)]| {
            Instance::new(
                schema.clone(),
                [
                    ("P1", p1.iter().map(|(a, b)| Tuple::of(&[a, b])).collect::<Vec<_>>()),
                    ("P2", p2.iter().map(|(a, b)| Tuple::of(&[a, b])).collect::<Vec<_>>()),
                ],
            )
            .unwrap()
        };
        assert!(check_ref(&make(&[("x", "a")], &[("a", "y")]), &rc).unwrap());
        assert!(!check_ref(&make(&[("x", "a")], &[("b", "y")]), &rc).unwrap());
        assert!(check_ref(&make(&[], &[("b", "y")]), &rc).unwrap());
    }

    #[test]
    fn translations_print_the_expected_sentences() {
        let consts = BTreeSet::new();
        let schema = schema2();
        let fd = Constraint::Fd(FunctionalDependency::new("P", vec![1], vec![2]).unwrap());
        assert_eq!(
            fd.to_formula(&schema).unwrap().to_text(&consts),
            "forall x1. forall x2. forall y1. forall y2. \
             (P(x1, x2) and P(y1, y2) and x1 = y1 -> x2 = y2)"
        );

        let vc = Constraint::Value(ValueConstraint::new("P", 2, "Pv").unwrap());
        assert_eq!(
            vc.to_formula(&schema).unwrap().to_text(&consts),
            "forall x1. forall x2. (P(x1, x2) -> Pv(x2))"
        );

        let schema = Schema::new([("P1", 2), ("P2", 2)]).unwrap();
        let rc = Constraint::Ref(ReferentialConstraint::new("P1", "P2", 1).unwrap());
        assert_eq!(
            rc.to_formula(&schema).unwrap().to_text(&consts),
            "forall x1. forall x2. \
             (P1(x1, x2) -> exists y1. exists y2. (P2(y1, y2) and x2 = y1))"
        );
    }

    #[test]
    fn dsl_round_trips() {
        let schema = Schema::new([("P", 3), ("Pv", 1), ("P2", 2)]).unwrap();
        for line in ["fd P: 1 -> 2 3", "value P[2] in Pv", "ref P -> P2 on 1"] {
            let c = Constraint::parse(line, &schema).unwrap();
            assert_eq!(c.to_string(), line);
        }
        assert!(Constraint::parse("fd P: 1 -> 1", &schema).is_err());
        assert!(Constraint::parse("value P[9] in Pv", &schema).is_err());
        assert!(Constraint::parse("nonsense", &schema).is_err());
    }
}
