//! Collective rationality: does a rule carry a constraint from the
//! individual instances to the aggregate?
//!
//! All verdicts are space-relative. A "lifted" verdict means: on every
//! profile of the space whose members all satisfy the target, every winner
//! satisfies it too (the strict reading; an exists-winner reading is
//! available behind a flag). A counterexample on a space remains one on any
//! superspace.

use std::fmt;

use crate::aggregators::{AggContext, Aggregator, Rule};
use crate::axioms::{check_groundedness, check_unanimity, AxiomReport};
use crate::constraints::{Constraint, FunctionalDependency, ReferentialConstraint, ValueConstraint};
use crate::folang::{classify, is_true, Formula};
use crate::model::{Instance, Profile};
use crate::oracle::ProfileSpace;
use crate::{Error, Result};

/// What gets lifted: a structured constraint (checked directly) or an
/// arbitrary sentence (checked by evaluation).
#[derive(Debug, Clone)]
pub enum LiftTarget {
    Constraint(Constraint),
    Sentence(Formula),
}

impl LiftTarget {
    pub fn sentence(phi: Formula) -> Result<LiftTarget> {
        let free = phi.free_vars();
        if !free.is_empty() {
            return Err(Error::NotASentence(free.into_iter().collect()));
        }
        Ok(LiftTarget::Sentence(phi))
    }

    pub fn satisfied_by(&self, d: &Instance) -> Result<bool> {
        match self {
            LiftTarget::Constraint(c) => c.check(d),
            LiftTarget::Sentence(phi) => is_true(d, phi),
        }
    }
}

impl fmt::Display for LiftTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiftTarget::Constraint(c) => write!(f, "{c}"),
            LiftTarget::Sentence(phi) => write!(f, "{phi}"),
        }
    }
}

/// How to read acceptance for non-resolute rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WinnerReading {
    /// Lifted only if every winner satisfies the target.
    #[default]
    EveryWinner,
    /// Lifted if some winner satisfies the target.
    SomeWinner,
}

#[derive(Debug, Clone)]
pub enum LiftVerdict {
    LiftedOnSpace,
    Counterexample {
        profile: Profile,
        winner: Instance,
    },
}

#[derive(Debug, Clone)]
pub struct LiftReport {
    pub rule: String,
    pub target: String,
    pub verdict: LiftVerdict,
}

impl LiftReport {
    pub fn lifted(&self) -> bool {
        matches!(self.verdict, LiftVerdict::LiftedOnSpace)
    }
}

/// Scan the space: profiles whose members all satisfy the target must
/// produce winners satisfying it.
pub fn check_lifting(
    rule: &dyn Aggregator,
    target: &LiftTarget,
    space: &ProfileSpace,
    ctx: &AggContext,
    reading: WinnerReading,
) -> Result<LiftReport> {
    for profile in space.iter() {
        let mut all_rational = true;
        for member in profile.members() {
            if !target.satisfied_by(member)? {
                all_rational = false;
                break;
            }
        }
        if !all_rational {
            continue;
        }
        let outcome = rule.apply(&profile, ctx)?;
        let mut bad_winner: Option<Instance> = None;
        let mut any_good = false;
        for winner in outcome.winners() {
            if target.satisfied_by(winner)? {
                any_good = true;
            } else if bad_winner.is_none() {
                bad_winner = Some(winner.clone());
            }
        }
        let violated = match reading {
            WinnerReading::EveryWinner => bad_winner.is_some(),
            WinnerReading::SomeWinner => !any_good,
        };
        if violated {
            return Ok(LiftReport {
                rule: rule.label(),
                target: target.to_string(),
                verdict: LiftVerdict::Counterexample {
                    winner: bad_winner.expect("violation implies a bad winner"),
                    profile,
                },
            });
        }
    }
    Ok(LiftReport {
        rule: rule.label(),
        target: target.to_string(),
        verdict: LiftVerdict::LiftedOnSpace,
    })
}

/// One row of a quota sweep: the uniform quota, the closed-form prediction,
/// and the observed space verdict.
#[derive(Debug)]
pub struct SweepRow {
    pub quota: u32,
    pub predicted_lifted: bool,
    pub report: LiftReport,
}

impl SweepRow {
    pub fn agrees(&self) -> bool {
        self.predicted_lifted == self.report.lifted()
    }
}

#[derive(Debug)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn disagreements(&self) -> usize {
        self.rows.iter().filter(|r| !r.agrees()).count()
    }
}

/// Sweep uniform quotas `1..=n` against a functional dependency: predicted
/// lifted exactly when `q > n/2`. The space should already be filtered to
/// dependency-satisfying members.
pub fn verify_fd_quota_sweep(
    fd: &FunctionalDependency,
    agents: usize,
    space: &ProfileSpace,
    ctx: &AggContext,
) -> Result<SweepReport> {
    let target = LiftTarget::Constraint(Constraint::Fd(fd.clone()));
    let mut rows = Vec::new();
    for q in 1..=agents as u32 {
        let rule = Rule::Quota(crate::aggregators::QuotaSpec::uniform(q));
        let report = check_lifting(&rule, &target, space, ctx, WinnerReading::EveryWinner)?;
        rows.push(SweepRow {
            quota: q,
            predicted_lifted: 2 * q as usize > agents,
            report,
        });
    }
    Ok(SweepReport { rows })
}

/// Grounded rules must lift value constraints; one-directional.
#[derive(Debug)]
pub struct GroundedLiftReport {
    pub groundedness: AxiomReport,
    pub lift: LiftReport,
}

impl GroundedLiftReport {
    /// The implication "grounded on the space → lifts on the space".
    pub fn holds(&self) -> bool {
        !self.groundedness.passed() || self.lift.lifted()
    }
}

pub fn verify_value_lifting(
    rule: &dyn Aggregator,
    vc: &ValueConstraint,
    space: &ProfileSpace,
    ctx: &AggContext,
) -> Result<GroundedLiftReport> {
    let groundedness = check_groundedness(rule, space, ctx)?;
    let target = LiftTarget::Constraint(Constraint::Value(vc.clone()));
    let lift = check_lifting(rule, &target, space, ctx, WinnerReading::EveryWinner)?;
    Ok(GroundedLiftReport { groundedness, lift })
}

/// Sweep the target-symbol quota `1..=n` against a referential constraint
/// with the source quota fixed: predicted lifted exactly when the target
/// quota is 1.
pub fn verify_ref_quota_sweep(
    rc: &ReferentialConstraint,
    agents: usize,
    source_quota: u32,
    space: &ProfileSpace,
    ctx: &AggContext,
) -> Result<SweepReport> {
    let target = LiftTarget::Constraint(Constraint::Ref(rc.clone()));
    let mut rows = Vec::new();
    for q in 1..=agents as u32 {
        let spec = crate::aggregators::QuotaSpec::per_symbol([
            (rc.source.clone(), source_quota),
            (rc.target.clone(), q),
        ]);
        let rule = Rule::Quota(spec);
        let report = check_lifting(&rule, &target, space, ctx, WinnerReading::EveryWinner)?;
        rows.push(SweepRow {
            quota: q,
            predicted_lifted: q == 1,
            report,
        });
    }
    Ok(SweepReport { rows })
}

/// Unanimous and grounded rules are collectively rational for ground
/// literals: positive ones survive by unanimity, negative ones by
/// groundedness.
#[derive(Debug)]
pub struct LitTheoremReport {
    pub unanimity: AxiomReport,
    pub groundedness: AxiomReport,
    pub lift: LiftReport,
}

impl LitTheoremReport {
    /// The forward implication of the theorem on this space.
    pub fn holds(&self) -> bool {
        !(self.unanimity.passed() && self.groundedness.passed()) || self.lift.lifted()
    }
}

pub fn check_lit_theorem(
    rule: &dyn Aggregator,
    literals: &[Formula],
    space: &ProfileSpace,
    ctx: &AggContext,
) -> Result<LitTheoremReport> {
    for lit in literals {
        let flags = classify(lit);
        if !(flags.lit_pos || flags.lit_neg) {
            return Err(Error::BadConstraint(format!(
                "`{lit}` is not a ground literal"
            )));
        }
    }
    let unanimity = check_unanimity(rule, space, ctx)?;
    let groundedness = check_groundedness(rule, space, ctx)?;
    let conj = Formula::conj(literals.to_vec());
    let target = LiftTarget::sentence(conj)?;
    let lift = check_lifting(rule, &target, space, ctx, WinnerReading::EveryWinner)?;
    Ok(LitTheoremReport {
        unanimity,
        groundedness,
        lift,
    })
}

/// Outcome of dictatorship detection on a space.
#[derive(Debug, Clone)]
pub enum GdVerdict {
    /// Every winner of every profile equals some agent's instance; the map
    /// records, per profile index, the agent matching the canonical winner.
    GeneralizedDictatorship { assignment: Vec<usize> },
    /// A profile where some winner matches no agent.
    Counterexample { profile: Profile, winner: Instance },
}

#[derive(Debug, Clone)]
pub struct GdReport {
    pub rule: String,
    pub verdict: GdVerdict,
}

impl GdReport {
    pub fn is_generalized_dictatorship(&self) -> bool {
        matches!(self.verdict, GdVerdict::GeneralizedDictatorship { .. })
    }
}

/// True when, for every profile in the space, every winner equals some
/// agent's instance.
pub fn is_generalized_dictatorship(
    rule: &dyn Aggregator,
    space: &ProfileSpace,
    ctx: &AggContext,
) -> Result<GdReport> {
    let mut assignment = Vec::with_capacity(space.len());
    for profile in space.iter() {
        let outcome = rule.apply(&profile, ctx)?;
        for winner in outcome.winners() {
            if !profile.members().iter().any(|d| d == winner) {
                return Ok(GdReport {
                    rule: rule.label(),
                    verdict: GdVerdict::Counterexample {
                        winner: winner.clone(),
                        profile,
                    },
                });
            }
        }
        let lex = outcome.lex_winner();
        let agent = profile
            .members()
            .iter()
            .position(|d| d == lex)
            .expect("checked above")
            + 1;
        assignment.push(agent);
    }
    Ok(GdReport {
        rule: rule.label(),
        verdict: GdVerdict::GeneralizedDictatorship { assignment },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregators::{PermutedDictatorship, QuotaSpec, TupleExtras};
    use crate::folang::{parse_formula, ParseCtx};
    use crate::model::{Permutation, Schema, Tuple, Value};
    use crate::oracle::{enum_profiles, SpaceSpec};
    use crate::samples;

    #[test]
    fn majority_fails_totality_constraint_on_paradox_profile() {
        let profile = samples::paradox_profile();
        let schema = profile.schema().clone();
        let phi = parse_formula(
            "forall x. (P(x) -> exists y. Q(x,y))",
            &ParseCtx::new(schema),
        )
        .unwrap();
        let target = LiftTarget::sentence(phi).unwrap();
        let space = ProfileSpace::explicit(vec![profile]);
        let report = check_lifting(
            &Rule::Majority,
            &target,
            &space,
            &AggContext::default(),
            WinnerReading::EveryWinner,
        )
        .unwrap();
        match &report.verdict {
            LiftVerdict::Counterexample { winner, .. } => {
                assert_eq!(winner.relation("P").unwrap().len(), 1);
                assert!(winner.relation("Q").unwrap().is_empty());
            }
            LiftVerdict::LiftedOnSpace => panic!("expected a counterexample"),
        }
    }

    #[test]
    fn union_breaks_key_dependencies_on_the_directory() {
        let space = ProfileSpace::explicit(vec![samples::directory_profile()]);
        let fd = FunctionalDependency::new("Staff", vec![1], vec![2, 3]).unwrap();
        let target = LiftTarget::Constraint(Constraint::Fd(fd));
        let report = check_lifting(
            &Rule::Union,
            &target,
            &space,
            &AggContext::default(),
            WinnerReading::EveryWinner,
        )
        .unwrap();
        assert!(!report.lifted());
    }

    #[test]
    fn dictatorship_lifts_everything() {
        let schema = Schema::new([("P", 2)]).unwrap();
        let spec = SpaceSpec::new(schema, vec![Value::c("a"), Value::c("b")], 2, 2);
        let space = enum_profiles(&spec).unwrap();
        let fd = FunctionalDependency::new("P", vec![1], vec![2]).unwrap();
        let target = LiftTarget::Constraint(Constraint::Fd(fd));
        let report = check_lifting(
            &Rule::Dictatorship(1),
            &target,
            &space,
            &AggContext::default(),
            WinnerReading::EveryWinner,
        )
        .unwrap();
        assert!(report.lifted());
    }

    #[test]
    fn fd_sweep_small() {
        let schema = Schema::new([("P", 2)]).unwrap();
        let fd = FunctionalDependency::new("P", vec![1], vec![2]).unwrap();
        let spec = SpaceSpec::new(schema, vec![Value::c("a"), Value::c("b")], 2, 2)
            .with_constraints(vec![Constraint::Fd(fd.clone())]);
        let space = enum_profiles(&spec).unwrap();
        let report =
            verify_fd_quota_sweep(&fd, 2, &space, &AggContext::default()).unwrap();
        assert_eq!(report.rows.len(), 2);
        // n = 2: union (q=1) must fail, intersection (q=2) must lift.
        assert!(!report.rows[0].predicted_lifted);
        assert!(report.rows[1].predicted_lifted);
        assert_eq!(report.disagreements(), 0);
    }

    #[test]
    fn value_constraint_lifting_tracks_groundedness() {
        let schema = Schema::new([("P", 2), ("Pv", 1)]).unwrap();
        let vc = ValueConstraint::new("P", 2, "Pv").unwrap();
        let spec = SpaceSpec::new(schema, vec![Value::c("a"), Value::c("b")], 1, 2)
            .with_constraints(vec![Constraint::Value(vc.clone())]);
        let space = enum_profiles(&spec).unwrap();
        let ctx = AggContext::default();
        for rule in [Rule::Union, Rule::Intersection, Rule::Majority] {
            let report = verify_value_lifting(&rule, &vc, &space, &ctx).unwrap();
            assert!(report.groundedness.passed());
            assert!(report.lift.lifted(), "{} should lift", rule.label());
        }
        // A zero-quota rule with an extra tuple outside Pv is neither
        // grounded nor collectively rational here.
        let mut extras = TupleExtras::new();
        extras.insert("P".into(), [Tuple::of(&["a", "z"])].into_iter().collect());
        let ctx = AggContext::with_universe(extras);
        let report =
            verify_value_lifting(&Rule::TrivialZero, &vc, &space, &ctx).unwrap();
        assert!(!report.groundedness.passed());
        assert!(!report.lift.lifted());
        assert!(report.holds());
    }

    #[test]
    fn ref_sweep_small() {
        let schema = Schema::new([("P1", 2), ("P2", 2)]).unwrap();
        let rc = ReferentialConstraint::new("P1", "P2", 1).unwrap();
        let spec = SpaceSpec::new(
            schema,
            vec![Value::c("a"), Value::c("b"), Value::c("c")],
            1,
            2,
        )
        .with_constraints(vec![Constraint::Ref(rc.clone())]);
        let space = enum_profiles(&spec).unwrap();
        let report =
            verify_ref_quota_sweep(&rc, 2, 1, &space, &AggContext::default()).unwrap();
        assert_eq!(report.disagreements(), 0);
        assert!(report.rows[0].report.lifted());
        assert!(!report.rows[1].report.lifted());
    }

    #[test]
    fn lit_theorem_on_majority_and_trivial_top() {
        let schema = Schema::new([("P", 2)]).unwrap();
        let spec = SpaceSpec::new(schema.clone(), vec![Value::c("a"), Value::c("b")], 2, 3);
        let space = enum_profiles(&spec).unwrap();
        let ctx = AggContext::default();
        let lits = vec![
            Formula::atom(
                "P",
                vec![
                    crate::folang::Term::val("a"),
                    crate::folang::Term::val("b"),
                ],
            ),
            Formula::not(Formula::atom(
                "P",
                vec![
                    crate::folang::Term::val("b"),
                    crate::folang::Term::val("b"),
                ],
            )),
        ];
        let report = check_lit_theorem(&Rule::Majority, &lits, &space, &ctx).unwrap();
        assert!(report.unanimity.passed());
        assert!(report.groundedness.passed());
        assert!(report.lift.lifted());
        assert!(report.holds());

        let report = check_lit_theorem(&Rule::TrivialTop, &lits, &space, &ctx).unwrap();
        assert!(!report.unanimity.passed());
        assert!(!report.lift.lifted());
        assert!(report.holds()); // implication is vacuous
    }

    #[test]
    fn average_voter_is_a_generalized_dictatorship_permuted_one_is_not() {
        let schema = Schema::new([("P", 1)]).unwrap();
        let spec = SpaceSpec::new(schema, vec![Value::c("a"), Value::c("b")], 2, 2);
        let space = enum_profiles(&spec).unwrap();
        let ctx = AggContext::default();

        let avg = is_generalized_dictatorship(&Rule::AverageVoter, &space, &ctx).unwrap();
        assert!(avg.is_generalized_dictatorship());

        let dict = is_generalized_dictatorship(&Rule::Dictatorship(1), &space, &ctx).unwrap();
        match dict.verdict {
            GdVerdict::GeneralizedDictatorship { assignment } => {
                assert!(assignment.iter().all(|&a| a == 1));
            }
            _ => panic!("dictatorship must be detected"),
        }

        let rho = Permutation::transposition(
            Value::c("a"),
            Value::c("b"),
            vec![Value::c("a"), Value::c("b")],
        )
        .unwrap();
        let permuted = PermutedDictatorship { agent: 1, rho };
        let report = is_generalized_dictatorship(&permuted, &space, &ctx).unwrap();
        assert!(!report.is_generalized_dictatorship());
    }
}
