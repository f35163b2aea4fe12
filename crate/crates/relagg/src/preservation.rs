//! Aggregate-then-query versus query-then-aggregate.
//!
//! Per-agent answer sets are finite relations, so the instance-level rules
//! apply to them directly: each answer set is wrapped as a single-relation
//! instance over a fresh symbol and the rule runs unchanged. A query
//! commutes with a rule on a profile when the two routes produce the same
//! set of answer sets.

use std::collections::BTreeSet;

use crate::aggregators::{AggContext, Aggregator};
use crate::folang::{answer, AnswerSet, Query};
use crate::model::{Instance, Profile, Schema, Tuple};
use crate::{Error, Result};

/// The per-agent answers to one query, all of one width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerProfile {
    answers: Vec<AnswerSet>,
}

impl AnswerProfile {
    pub fn new(answers: Vec<AnswerSet>) -> Result<Self> {
        let first = answers.first().ok_or(Error::EmptyProfile)?;
        let width = first.width();
        if let Some(bad) = answers.iter().find(|a| a.width() != width) {
            return Err(Error::WidthMismatch(width, bad.width()));
        }
        Ok(AnswerProfile { answers })
    }

    /// Query every member of a profile.
    pub fn from_profile(profile: &Profile, query: &Query) -> Result<Self> {
        let answers = profile
            .members()
            .iter()
            .map(|d| answer(d, query))
            .collect::<Result<Vec<_>>>()?;
        AnswerProfile::new(answers)
    }

    pub fn width(&self) -> usize {
        self.answers[0].width()
    }

    pub fn answers(&self) -> &[AnswerSet] {
        &self.answers
    }

    fn as_instance_profile(&self) -> Result<Profile> {
        let width = self.width();
        if width == 0 {
            return Err(Error::ZeroWidth);
        }
        let schema = Schema::new([(ANSWER_SYMBOL, width)])?;
        let members = self
            .answers
            .iter()
            .map(|a| {
                Instance::new(
                    schema.clone(),
                    [(ANSWER_SYMBOL, a.tuples().iter().cloned().collect::<Vec<_>>())],
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Profile::new(members)
    }
}

const ANSWER_SYMBOL: &str = "ans";

/// Run a rule on the answer relations themselves; winners unwrap back to
/// answer sets.
pub fn induced_aggregate(
    rule: &dyn Aggregator,
    answers: &AnswerProfile,
    ctx: &AggContext,
) -> Result<BTreeSet<AnswerSet>> {
    let wrapped = answers.as_instance_profile()?;
    let outcome = rule.apply(&wrapped, ctx)?;
    outcome
        .winners()
        .iter()
        .map(|w| {
            let tuples: Vec<Tuple> = w.relation(ANSWER_SYMBOL)?.iter().cloned().collect();
            AnswerSet::new(answers.width(), tuples)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommutationVerdict {
    Commutes,
    Diverges,
}

/// Both routes around the diagram, compared as sets of answer sets.
#[derive(Debug, Clone)]
pub struct CommutationReport {
    pub rule: String,
    pub query: String,
    /// Answer sets of the aggregated instance's winners.
    pub aggregate_then_query: BTreeSet<AnswerSet>,
    /// Winners of the rule applied to the per-agent answers.
    pub query_then_aggregate: BTreeSet<AnswerSet>,
}

impl CommutationReport {
    pub fn verdict(&self) -> CommutationVerdict {
        if self.aggregate_then_query == self.query_then_aggregate {
            CommutationVerdict::Commutes
        } else {
            CommutationVerdict::Diverges
        }
    }

    pub fn commutes(&self) -> bool {
        self.verdict() == CommutationVerdict::Commutes
    }

    /// Answer sets present on exactly one side.
    pub fn diff(&self) -> (Vec<&AnswerSet>, Vec<&AnswerSet>) {
        let left_only = self
            .aggregate_then_query
            .iter()
            .filter(|a| !self.query_then_aggregate.contains(*a))
            .collect();
        let right_only = self
            .query_then_aggregate
            .iter()
            .filter(|a| !self.aggregate_then_query.contains(*a))
            .collect();
        (left_only, right_only)
    }
}

/// Compare the two routes for one rule, query, and profile.
pub fn check_commutes(
    rule: &dyn Aggregator,
    query: &Query,
    profile: &Profile,
    ctx: &AggContext,
) -> Result<CommutationReport> {
    let outcome = rule.apply(profile, ctx)?;
    let aggregate_then_query: BTreeSet<AnswerSet> = outcome
        .winners()
        .iter()
        .map(|w| answer(w, query))
        .collect::<Result<_>>()?;
    let answers = AnswerProfile::from_profile(profile, query)?;
    let query_then_aggregate = induced_aggregate(rule, &answers, ctx)?;
    Ok(CommutationReport {
        rule: rule.label(),
        query: query.to_string(),
        aggregate_then_query,
        query_then_aggregate,
    })
}

/// For unanimous rules and universal-fragment queries: the intersection of
/// the per-agent answers must be contained in every winner's answer.
pub fn check_unanimity_containment(
    query: &Query,
    rule: &dyn Aggregator,
    profile: &Profile,
    ctx: &AggContext,
) -> Result<bool> {
    let answers = AnswerProfile::from_profile(profile, query)?;
    let mut intersection: BTreeSet<Tuple> = answers.answers()[0].tuples().clone();
    for a in &answers.answers()[1..] {
        intersection.retain(|t| a.tuples().contains(t));
    }
    let outcome = rule.apply(profile, ctx)?;
    for winner in outcome.winners() {
        let ans = answer(winner, query)?;
        if !intersection.iter().all(|t| ans.tuples().contains(t)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// For grounded rules and existential-fragment queries: every winner's
/// answer must be contained in the union of the per-agent answers.
pub fn check_groundedness_containment(
    query: &Query,
    rule: &dyn Aggregator,
    profile: &Profile,
    ctx: &AggContext,
) -> Result<bool> {
    let answers = AnswerProfile::from_profile(profile, query)?;
    let mut union: BTreeSet<Tuple> = BTreeSet::new();
    for a in answers.answers() {
        union.extend(a.tuples().iter().cloned());
    }
    let outcome = rule.apply(profile, ctx)?;
    for winner in outcome.winners() {
        let ans = answer(winner, query)?;
        if !ans.tuples().iter().all(|t| union.contains(t)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The most representative answer sets: the argmin, over the n answer sets,
/// of the summed symmetric distances to all others. Ties return the full
/// set, deduplicated.
pub fn ave_answers(answers: &AnswerProfile) -> Result<BTreeSet<AnswerSet>> {
    let mut best: Option<(usize, BTreeSet<AnswerSet>)> = None;
    let distinct: BTreeSet<&AnswerSet> = answers.answers().iter().collect();
    for candidate in distinct {
        let mut score = 0usize;
        for other in answers.answers() {
            score += candidate.symmetric_distance(other)?;
        }
        match &mut best {
            None => best = Some((score, [candidate.clone()].into_iter().collect())),
            Some((min, set)) => {
                if score < *min {
                    *min = score;
                    set.clear();
                    set.insert(candidate.clone());
                } else if score == *min {
                    set.insert(candidate.clone());
                }
            }
        }
    }
    Ok(best.expect("answer profile is non-empty").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregators::Rule;
    use crate::folang::{parse_query, ParseCtx};
    use crate::model::Value;
    use crate::samples;

    fn ctx() -> AggContext {
        AggContext::default()
    }

    fn divergence_ctx() -> ParseCtx {
        ParseCtx::new(samples::divergence_schema())
    }

    #[test]
    fn existential_query_under_intersection_diverges() {
        let profile = samples::disjoint_pair_profile();
        let q = parse_query("ans(x) :- exists y. P(x,y)", &divergence_ctx()).unwrap();
        let report = check_commutes(&Rule::Intersection, &q, &profile, &ctx()).unwrap();
        assert!(!report.commutes());
        // Aggregating first empties the answer; intersecting the per-agent
        // answers keeps {a}.
        let left: Vec<_> = report.aggregate_then_query.iter().collect();
        assert_eq!(left, vec![&AnswerSet::empty(1)]);
        let right: Vec<_> = report.query_then_aggregate.iter().collect();
        assert_eq!(
            right,
            vec![&AnswerSet::new(1, [Tuple::of(&["a"])]).unwrap()]
        );
    }

    #[test]
    fn universal_query_under_intersection_diverges_the_other_way() {
        let profile = samples::shared_pair_profile();
        let q = parse_query("ans(x) :- forall y. P(x,y)", &divergence_ctx()).unwrap();
        let report = check_commutes(&Rule::Intersection, &q, &profile, &ctx()).unwrap();
        assert!(!report.commutes());
        let left: Vec<_> = report.aggregate_then_query.iter().collect();
        assert_eq!(
            left,
            vec![&AnswerSet::new(1, [Tuple::of(&["a"])]).unwrap()]
        );
        let right: Vec<_> = report.query_then_aggregate.iter().collect();
        assert_eq!(right, vec![&AnswerSet::empty(1)]);
    }

    #[test]
    fn union_commutes_on_projection_queries() {
        for profile in [
            samples::disjoint_pair_profile(),
            samples::shared_pair_profile(),
        ] {
            let q = parse_query("ans(x) :- exists y. P(x,y)", &divergence_ctx()).unwrap();
            let report = check_commutes(&Rule::Union, &q, &profile, &ctx()).unwrap();
            assert!(report.commutes());
        }
    }

    #[test]
    fn union_diverges_on_disjoint_variable_disjunctions() {
        // Active-domain answers break the diagram once a disjunct ignores
        // one of the head variables: on the union, the ignored variable
        // ranges over values foreign to the agent that makes the other
        // disjunct true.
        let schema = samples::divergence_schema();
        let mk = |token: &str| {
            Instance::new(schema.clone(), [("R", vec![Tuple::of(&[token])])]).unwrap()
        };
        let profile = Profile::new(vec![mk("c"), mk("d")]).unwrap();
        let q = parse_query("ans(x, y) :- R(x) or R(y)", &divergence_ctx()).unwrap();
        let report = check_commutes(&Rule::Union, &q, &profile, &ctx()).unwrap();
        assert!(!report.commutes());
        // The union instance answers all four pairs over {c,d}; the union of
        // the per-agent answers has only the two diagonal pairs.
        let left: Vec<_> = report.aggregate_then_query.iter().collect();
        assert_eq!(left[0].len(), 4);
        let right: Vec<_> = report.query_then_aggregate.iter().collect();
        assert_eq!(right[0].len(), 2);
    }

    #[test]
    fn merge_diverges_on_projection_after_information_loss() {
        // Two sources share (a,c) and disagree at (b,b) vs (c,b); merging
        // first keeps the half-known row (null,b), whose projection has no
        // counterpart when the per-agent answers are merged instead.
        let schema = samples::divergence_schema();
        let mk = |rows: &[(&str, &str)]| {
            Instance::new(
                schema.clone(),
                [(
                    "P",
                    rows.iter().map(|(x, y)| Tuple::of(&[x, y])).collect::<Vec<_>>(),
                )],
            )
            .unwrap()
        };
        let profile = Profile::new(vec![
            mk(&[("b", "b"), ("a", "c")]),
            mk(&[("c", "b"), ("a", "c")]),
        ])
        .unwrap();
        let q = parse_query("ans(x) :- exists y. P(x,y)", &divergence_ctx()).unwrap();
        let report = check_commutes(&Rule::MergeIncomplete, &q, &profile, &ctx()).unwrap();
        assert!(!report.commutes());
        let left: Vec<_> = report.aggregate_then_query.iter().collect();
        let expect_left = AnswerSet::new(
            1,
            [Tuple::of(&["a"]), Tuple(vec![Value::Null])],
        )
        .unwrap();
        assert_eq!(left, vec![&expect_left]);
        let right: Vec<_> = report.query_then_aggregate.iter().collect();
        assert_eq!(
            right,
            vec![&AnswerSet::new(1, [Tuple::of(&["a"])]).unwrap()]
        );
    }

    #[test]
    fn merge_commutes_on_full_width_atoms() {
        let schema = samples::divergence_schema();
        let mk = |rows: &[(&str, &str)]| {
            Instance::new(
                schema.clone(),
                [(
                    "P",
                    rows.iter().map(|(x, y)| Tuple::of(&[x, y])).collect::<Vec<_>>(),
                )],
            )
            .unwrap()
        };
        let profile = Profile::new(vec![mk(&[("a", "b")]), mk(&[("a", "c")])]).unwrap();
        let q = parse_query("ans(x, y) :- P(x, y)", &divergence_ctx()).unwrap();
        let report = check_commutes(&Rule::MergeIncomplete, &q, &profile, &ctx()).unwrap();
        assert!(report.commutes());
        let left: Vec<_> = report.aggregate_then_query.iter().collect();
        let expect = AnswerSet::new(2, [Tuple(vec![Value::c("a"), Value::Null])]).unwrap();
        assert_eq!(left, vec![&expect]);
    }

    #[test]
    fn dictatorship_commutes_on_arbitrary_queries() {
        let profile = samples::shared_pair_profile();
        for text in [
            "ans(x) :- exists y. P(x,y)",
            "ans(x) :- forall y. P(x,y)",
            "ans(x) :- not R(x)",
            "ans(x, y) :- P(x, y) -> x = y",
        ] {
            let q = parse_query(text, &divergence_ctx()).unwrap();
            let report = check_commutes(&Rule::Dictatorship(2), &q, &profile, &ctx()).unwrap();
            assert!(report.commutes(), "query `{text}`");
        }
    }

    #[test]
    fn containments_hold_on_well_behaved_cases() {
        let profile = samples::shared_pair_profile();
        let forall_q = parse_query("ans(x) :- forall y. P(x,y)", &divergence_ctx()).unwrap();
        assert!(
            check_unanimity_containment(&forall_q, &Rule::Intersection, &profile, &ctx())
                .unwrap()
        );
        let exists_q = parse_query("ans(x) :- exists y. P(x,y)", &divergence_ctx()).unwrap();
        for rule in [Rule::Union, Rule::Majority, Rule::Intersection] {
            assert!(
                check_groundedness_containment(&exists_q, &rule, &profile, &ctx()).unwrap()
            );
        }
    }

    #[test]
    fn ave_picks_the_representative_answer() {
        let a = AnswerSet::new(1, [Tuple::of(&["a"])]).unwrap();
        let b = AnswerSet::new(1, [Tuple::of(&["b"])]).unwrap();
        let profile = AnswerProfile::new(vec![a.clone(), a.clone(), b]).unwrap();
        let ave = ave_answers(&profile).unwrap();
        assert_eq!(ave.into_iter().collect::<Vec<_>>(), vec![a.clone()]);

        let unanimous = AnswerProfile::new(vec![a.clone(), a.clone()]).unwrap();
        let ave = ave_answers(&unanimous).unwrap();
        assert_eq!(ave.into_iter().collect::<Vec<_>>(), vec![a]);
    }

    #[test]
    fn zero_width_answers_cannot_be_wrapped() {
        let profile = samples::disjoint_pair_profile();
        let q = parse_query("ans() :- exists x. exists y. P(x,y)", &divergence_ctx()).unwrap();
        let answers = AnswerProfile::from_profile(&profile, &q).unwrap();
        assert!(matches!(
            induced_aggregate(&Rule::Union, &answers, &ctx()),
            Err(Error::ZeroWidth)
        ));
    }
}
