//! Small built-in scenarios shared by the examples, the CLI docs, and the
//! test suites.

use std::sync::Arc;

use crate::model::{Instance, Profile, Schema, Tuple};

/// Two ternary relations holding ID, name, and department rows.
pub fn directory_schema() -> Arc<Schema> {
    Schema::new([("Students", 3), ("Staff", 3)]).unwrap()
}

fn directory(students: &[(&str, &str, &str)], staff: &[(&str, &str, &str)]) -> Instance {
    Instance::new(
        directory_schema(),
        [
            (
                "Students",
                students
                    .iter()
                    .map(|(a, b, c)| Tuple::of(&[a, b, c]))
                    .collect::<Vec<_>>(),
            ),
            (
                "Staff",
                staff
                    .iter()
                    .map(|(a, b, c)| Tuple::of(&[a, b, c]))
                    .collect::<Vec<_>>(),
            ),
        ],
    )
    .unwrap()
}

/// The HR department's copy of the faculty directory.
pub fn hr_directory() -> Instance {
    directory(
        &[
            ("10", "Steve", "History"),
            ("11", "Carole", "CS"),
            ("12", "Derek", "Mech.Eng."),
        ],
        &[
            ("01", "Rose", "Mech.Eng."),
            ("02", "Audrey", "Mech.Eng."),
            ("03", "Karl", "History"),
        ],
    )
}

/// The registrar's copy: one student short, and staff `03 Karl` mistyped as
/// `04 Carl`.
pub fn registrar_directory() -> Instance {
    directory(
        &[("10", "Steve", "History"), ("11", "Carole", "CS")],
        &[
            ("01", "Rose", "Mech.Eng."),
            ("02", "Audrey", "Mech.Eng."),
            ("04", "Carl", "History"),
        ],
    )
}

/// The head office's copy: one extra student, and staff `02 Audrey` mistyped
/// as `02 Aubrey`.
pub fn head_office_directory() -> Instance {
    directory(
        &[
            ("10", "Steve", "History"),
            ("11", "Carole", "CS"),
            ("12", "Derek", "Mech.Eng."),
            ("13", "Marc", "History"),
        ],
        &[
            ("01", "Rose", "Mech.Eng."),
            ("02", "Aubrey", "Mech.Eng."),
            ("03", "Karl", "History"),
        ],
    )
}

/// Three conflicting copies of the same directory, owned by HR, the
/// registrar, and the head office.
pub fn directory_profile() -> Profile {
    Profile::new(vec![
        hr_directory(),
        registrar_directory(),
        head_office_directory(),
    ])
    .unwrap()
}

/// Schema `{P/1, Q/2}` for the totality-constraint paradox.
pub fn paradox_schema() -> Arc<Schema> {
    Schema::new([("P", 1), ("Q", 2)]).unwrap()
}

/// Two agents who each satisfy `forall x. (P(x) -> exists y. Q(x,y))` but
/// disagree on the witness; majority keeps `P(a)` and drops both witnesses.
pub fn paradox_profile() -> Profile {
    let schema = paradox_schema();
    let d1 = Instance::new(
        schema.clone(),
        [
            ("P", vec![Tuple::of(&["a"])]),
            ("Q", vec![Tuple::of(&["a", "b"])]),
        ],
    )
    .unwrap();
    let d2 = Instance::new(
        schema,
        [
            ("P", vec![Tuple::of(&["a"])]),
            ("Q", vec![Tuple::of(&["a", "c"])]),
        ],
    )
    .unwrap();
    Profile::new(vec![d1, d2]).unwrap()
}

/// Schema `{P/2, R/1}` for the query-commutation counterexamples.
pub fn divergence_schema() -> Arc<Schema> {
    Schema::new([("P", 2), ("R", 1)]).unwrap()
}

/// `P = {(a,b)}` vs `P = {(a,d)}`: intersecting instances first empties the
/// answer to `exists y. P(x,y)`, while intersecting per-agent answers keeps
/// `a`.
pub fn disjoint_pair_profile() -> Profile {
    let schema = divergence_schema();
    let d1 = Instance::new(schema.clone(), [("P", vec![Tuple::of(&["a", "b"])])]).unwrap();
    let d2 = Instance::new(schema, [("P", vec![Tuple::of(&["a", "d"])])]).unwrap();
    Profile::new(vec![d1, d2]).unwrap()
}

/// Both agents share `P = {(a,a),(a,b)}` but hold different `R` singletons.
/// The per-agent answers to `forall y. P(x,y)` are empty (each active domain
/// contains the foreign `R` value), yet the intersection instance answers
/// `{a}` because its active domain shrinks to `{a,b}`.
pub fn shared_pair_profile() -> Profile {
    let schema = divergence_schema();
    let d1 = Instance::new(
        schema.clone(),
        [
            ("P", vec![Tuple::of(&["a", "a"]), Tuple::of(&["a", "b"])]),
            ("R", vec![Tuple::of(&["c"])]),
        ],
    )
    .unwrap();
    let d2 = Instance::new(
        schema,
        [
            ("P", vec![Tuple::of(&["a", "a"]), Tuple::of(&["a", "b"])]),
            ("R", vec![Tuple::of(&["d"])]),
        ],
    )
    .unwrap();
    Profile::new(vec![d1, d2]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directory_sources_disagree_where_intended() {
        let p = directory_profile();
        assert_eq!(p.len(), 3);
        let audrey = Tuple::of(&["02", "Audrey", "Mech.Eng."]);
        let support = p.support("Staff", &audrey).unwrap();
        assert_eq!(support.len(), 2);
        assert!(support.contains(1) && support.contains(2));
        // Distance between the HR and registrar copies: one student, two
        // staff rows.
        assert_eq!(
            hr_directory()
                .symmetric_distance(&registrar_directory())
                .unwrap(),
            3
        );
    }
}
