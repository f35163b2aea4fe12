//! Syntactic fragment membership.
//!
//! Membership is checked on the primitive AST by recognizing the derived
//! encodings directly. The encodings overlap — `or(a, b)` produces
//! `¬a -> b`, and when `a` is itself an `and` block the same AST also reads
//! as an implication with a conjunctive antecedent — so each check tries
//! every reading that could place the formula in the fragment.

use super::{Formula, Term};

/// Which query-language fragments a formula falls into.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FragmentFlags {
    /// Built from equalities, atoms, `or`, and `exists`.
    pub pos_existential: bool,
    /// Built from equalities, atoms, `and`, and `forall`.
    pub pos_universal: bool,
    /// Atom-conjunction blocks combined with `or` and `exists`.
    pub conjunctive_query: bool,
    /// A single ground atom.
    pub lit_pos: bool,
    /// A single negated ground atom.
    pub lit_neg: bool,
    /// No free variables.
    pub sentence: bool,
}

pub fn classify(phi: &Formula) -> FragmentFlags {
    FragmentFlags {
        pos_existential: pos_existential(phi),
        pos_universal: pos_universal(phi),
        conjunctive_query: conjunctive_query(phi),
        lit_pos: ground_atom(phi),
        lit_neg: match phi {
            Formula::Not(inner) => ground_atom(inner),
            _ => false,
        },
        sentence: phi.free_vars().is_empty(),
    }
}

/// `¬a -> b`, the `or` encoding.
fn as_or(f: &Formula) -> Option<(&Formula, &Formula)> {
    match f {
        Formula::Implies(lhs, rhs) => match &**lhs {
            Formula::Not(a) => Some((a, rhs)),
            _ => None,
        },
        _ => None,
    }
}

/// `¬(a -> ¬b)`, the `and` encoding.
fn as_and(f: &Formula) -> Option<(&Formula, &Formula)> {
    match f {
        Formula::Not(inner) => match &**inner {
            Formula::Implies(a, rhs) => match &**rhs {
                Formula::Not(b) => Some((a, b)),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

/// `¬∀x.¬g`, the `exists` encoding.
fn as_exists(f: &Formula) -> Option<&Formula> {
    match f {
        Formula::Not(inner) => match &**inner {
            Formula::Forall(_, body) => match &**body {
                Formula::Not(g) => Some(g),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

fn pos_existential(f: &Formula) -> bool {
    match f {
        Formula::Eq(..) | Formula::Atom(..) => true,
        _ => {
            if let Some((a, b)) = as_or(f) {
                if pos_existential(a) && pos_existential(b) {
                    return true;
                }
            }
            if let Some(g) = as_exists(f) {
                if pos_existential(g) {
                    return true;
                }
            }
            false
        }
    }
}

fn pos_universal(f: &Formula) -> bool {
    match f {
        Formula::Eq(..) | Formula::Atom(..) => true,
        Formula::Forall(_, body) => pos_universal(body),
        _ => match as_and(f) {
            Some((a, b)) => pos_universal(a) && pos_universal(b),
            None => false,
        },
    }
}

fn conjunctive_query(f: &Formula) -> bool {
    if atom_block(f) {
        return true;
    }
    if let Some((a, b)) = as_or(f) {
        if conjunctive_query(a) && conjunctive_query(b) {
            return true;
        }
    }
    if let Some(g) = as_exists(f) {
        if conjunctive_query(g) {
            return true;
        }
    }
    false
}

/// A conjunction (possibly trivial) whose leaves are all relational atoms.
fn atom_block(f: &Formula) -> bool {
    match f {
        Formula::Atom(..) => true,
        _ => match as_and(f) {
            Some((a, b)) => atom_block(a) && atom_block(b),
            None => false,
        },
    }
}

fn ground_atom(f: &Formula) -> bool {
    match f {
        Formula::Atom(_, terms) => terms.iter().all(|t| matches!(t, Term::Const(_))),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folang::{parse_formula, ParseCtx};
    use crate::model::Schema;

    fn parse(text: &str) -> Formula {
        let schema = Schema::new([("P", 2), ("R", 1)]).unwrap();
        parse_formula(text, &ParseCtx::new(schema)).unwrap()
    }

    #[test]
    fn existential_projection() {
        let flags = classify(&parse("exists y. P(x,y)"));
        assert!(flags.pos_existential);
        assert!(!flags.pos_universal);
        assert!(flags.conjunctive_query);
        assert!(!flags.sentence);
    }

    #[test]
    fn universal_projection() {
        let flags = classify(&parse("forall y. P(x,y)"));
        assert!(flags.pos_universal);
        assert!(!flags.pos_existential);
        assert!(!flags.conjunctive_query);
    }

    #[test]
    fn negated_ground_atom() {
        let flags = classify(&parse("not P(A, B)"));
        assert!(flags.lit_neg);
        assert!(!flags.lit_pos);
        assert!(flags.sentence);
        let flags = classify(&parse("P(A, B)"));
        assert!(flags.lit_pos);
        assert!(!flags.lit_neg);
    }

    #[test]
    fn equality_is_not_conjunctive() {
        let flags = classify(&parse("x = y and P(x,y)"));
        assert!(flags.pos_universal);
        assert!(!flags.conjunctive_query);
        let flags = classify(&parse("P(x,y) and P(y,x)"));
        assert!(flags.conjunctive_query);
        assert!(flags.pos_universal);
    }

    #[test]
    fn negation_leaves_positive_fragments() {
        let flags = classify(&parse("x != y"));
        assert!(!flags.pos_existential);
        assert!(!flags.pos_universal);
        let flags = classify(&parse("exists x. (R(x) or x = x)"));
        assert!(flags.pos_existential);
    }

    #[test]
    fn ambiguous_encodings_stay_in_fragment() {
        // or(or(R(x), R(y) and R(z)), R(w)) — the inner right disjunct is an
        // `and` block, which makes the outer encoding also parse as an
        // implication; the disjunctive reading must still be found.
        let f = parse("(R(x) or R(y) and R(z)) or R(w)");
        let flags = classify(&f);
        assert!(flags.conjunctive_query);
        // Conjunction is not part of the existential fragment, so the
        // formula stays outside it even under the disjunctive reading.
        assert!(!flags.pos_existential);
    }
}
