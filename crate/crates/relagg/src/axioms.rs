//! Axiom checkers over finite profile spaces.
//!
//! Verdicts are space-relative: a pass means no counterexample was found in
//! the supplied space, never a universal claim. For non-resolute rules every
//! axiom is read against every winner (a tuple counts as accepted only when
//! all winners carry it). Counterexamples come with enough data to replay
//! the violated condition in isolation.

use std::collections::BTreeMap;
use std::fmt;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::aggregators::{AggContext, Aggregator, AggregationOutcome, QuotaSpec, Rule};
use crate::model::{Permutation, Profile, Tuple};
use crate::oracle::ProfileSpace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    Unanimity,
    Groundedness,
    Anonymity,
    Independence,
    PosNeutrality,
    NegNeutrality,
    PermNeutrality,
    Monotonicity,
}

impl Axiom {
    pub fn parse(s: &str) -> Result<Axiom> {
        Ok(match s {
            "U" => Axiom::Unanimity,
            "G" => Axiom::Groundedness,
            "A" => Axiom::Anonymity,
            "I" => Axiom::Independence,
            "N+" => Axiom::PosNeutrality,
            "N-" => Axiom::NegNeutrality,
            "NP" => Axiom::PermNeutrality,
            "M" => Axiom::Monotonicity,
            other => {
                return Err(Error::BadRule(
                    other.into(),
                    "expected one of U, G, A, I, N+, N-, NP, M".into(),
                ))
            }
        })
    }

    pub fn code(&self) -> &'static str {
        match self {
            Axiom::Unanimity => "U",
            Axiom::Groundedness => "G",
            Axiom::Anonymity => "A",
            Axiom::Independence => "I",
            Axiom::PosNeutrality => "N+",
            Axiom::NegNeutrality => "N-",
            Axiom::PermNeutrality => "NP",
            Axiom::Monotonicity => "M",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Data demonstrating a violation; replaying it re-checks the broken
/// condition directly.
#[derive(Debug, Clone)]
pub enum Witness {
    /// U: an intersection tuple missing from a winner, or G: a winner tuple
    /// outside the union.
    Inclusion {
        profile: Profile,
        symbol: String,
        tuple: Tuple,
    },
    /// A: reordering the agents changed the outcome.
    Agents { profile: Profile, order: Vec<usize> },
    /// I: equal support in two profiles, different acceptance.
    Pair {
        first: Profile,
        second: Profile,
        symbol: String,
        tuple: Tuple,
    },
    /// N+/N-: a tuple pair with matching/complementary supports treated
    /// wrongly.
    TuplePair {
        profile: Profile,
        symbol: String,
        tuple_a: Tuple,
        tuple_b: Tuple,
    },
    /// NP: a value permutation that does not commute with the rule.
    ValuePerm {
        profile: Profile,
        permutation: Permutation,
    },
    /// M: extra support for an accepted tuple removed it.
    Extension {
        base: Profile,
        extension: Profile,
        symbol: String,
        tuple: Tuple,
    },
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Pass,
    Counterexample(Witness),
}

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub rule: String,
    pub verdict: Verdict,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Pass)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.verdict {
            Verdict::Pass => None,
            Verdict::Counterexample(w) => Some(w),
        }
    }
}

/// Options for the quadratic checks (independence and monotonicity examine
/// profile pairs; when the pair count exceeds `max_pairs` a seeded sample of
/// pairs is checked instead).
#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub max_pairs: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            max_pairs: 10_000,
            seed: 0,
        }
    }
}

struct OutcomeCache<'a> {
    rule: &'a dyn Aggregator,
    ctx: &'a AggContext,
    map: BTreeMap<usize, AggregationOutcome>,
}

impl<'a> OutcomeCache<'a> {
    fn new(rule: &'a dyn Aggregator, ctx: &'a AggContext) -> Self {
        OutcomeCache {
            rule,
            ctx,
            map: BTreeMap::new(),
        }
    }

    fn get(&mut self, space: &ProfileSpace, idx: usize) -> Result<AggregationOutcome> {
        if let Some(out) = self.map.get(&idx) {
            return Ok(out.clone());
        }
        let out = self.rule.apply(&space.get(idx), self.ctx)?;
        self.map.insert(idx, out.clone());
        Ok(out)
    }
}

fn report(axiom: Axiom, rule: &dyn Aggregator, verdict: Verdict) -> AxiomReport {
    AxiomReport {
        axiom,
        rule: rule.label(),
        verdict,
    }
}

/// Every winner must include the per-symbol intersection of the profile.
pub fn check_unanimity(
    rule: &dyn Aggregator,
    space: &ProfileSpace,
    ctx: &AggContext,
) -> Result<AxiomReport> {
    for profile in space.iter() {
        let floor = profile.intersection_instance();
        let outcome = rule.apply(&profile, ctx)?;
        for (symbol, tuples) in floor.relations() {
            for t in tuples {
                if !outcome.accepts(symbol, t)? {
                    return Ok(report(
                        Axiom::Unanimity,
                        rule,
                        Verdict::Counterexample(Witness::Inclusion {
                            profile,
                            symbol: symbol.to_string(),
                            tuple: t.clone(),
                        }),
                    ));
                }
            }
        }
    }
    Ok(report(Axiom::Unanimity, rule, Verdict::Pass))
}

/// Every winner tuple must appear in the per-symbol union of the profile.
pub fn check_groundedness(
    rule: &dyn Aggregator,
    space: &ProfileSpace,
    ctx: &AggContext,
) -> Result<AxiomReport> {
    for profile in space.iter() {
        let ceiling = profile.union_instance();
        let outcome = rule.apply(&profile, ctx)?;
        for winner in outcome.winners() {
            for (symbol, tuples) in winner.relations() {
                let allowed = ceiling.relation(symbol)?;
                for t in tuples {
                    if !allowed.contains(t) {
                        return Ok(report(
                            Axiom::Groundedness,
                            rule,
                            Verdict::Counterexample(Witness::Inclusion {
                                profile,
                                symbol: symbol.to_string(),
                                tuple: t.clone(),
                            }),
                        ));
                    }
                }
            }
        }
    }
    Ok(report(Axiom::Groundedness, rule, Verdict::Pass))
}

fn permutations_of(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: &mut Vec<usize>, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(acc.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            acc.push(v);
            go(rest, acc, out);
            acc.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    go(&mut (1..=n).collect(), &mut Vec::new(), &mut out);
    out
}

/// The outcome must not depend on the order of agents.
pub fn check_anonymity(
    rule: &dyn Aggregator,
    space: &ProfileSpace,
    ctx: &AggContext,
) -> Result<AxiomReport> {
    for profile in space.iter() {
        let baseline = rule.apply(&profile, ctx)?;
        for order in permutations_of(profile.len()) {
            let permuted = profile.permute_agents(&order)?;
            if rule.apply(&permuted, ctx)? != baseline {
                return Ok(report(
                    Axiom::Anonymity,
                    rule,
                    Verdict::Counterexample(Witness::Agents { profile, order }),
                ));
            }
        }
    }
    Ok(report(Axiom::Anonymity, rule, Verdict::Pass))
}

fn pair_stream(total: usize, opts: &CheckOptions) -> Vec<(usize, usize)> {
    let full = total.saturating_mul(total);
    if full <= opts.max_pairs {
        (0..total)
            .flat_map(|i| (0..total).map(move |j| (i, j)))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        (0..opts.max_pairs)
            .map(|_| (rng.gen_range(0..total), rng.gen_range(0..total)))
            .collect()
    }
}

/// Tuples with the same support set in two profiles must be accepted in
/// both or rejected in both. The tuple pool is the union of both profiles'
/// relations.
pub fn check_independence(
    rule: &dyn Aggregator,
    space: &ProfileSpace,
    ctx: &AggContext,
    opts: &CheckOptions,
) -> Result<AxiomReport> {
    let mut cache = OutcomeCache::new(rule, ctx);
    for (i, j) in pair_stream(space.len(), opts) {
        let first = space.get(i);
        let second = space.get(j);
        let out_first = cache.get(space, i)?;
        let out_second = cache.get(space, j)?;
        for (symbol, _) in first.schema().clone().symbols() {
            let mut pool = first.union_instance().relation(symbol)?.clone();
            pool.extend(second.union_instance().relation(symbol)?.iter().cloned());
            for t in &pool {
                if first.support(symbol, t)? == second.support(symbol, t)?
                    && out_first.accepts(symbol, t)? != out_second.accepts(symbol, t)?
                {
                    return Ok(report(
                        Axiom::Independence,
                        rule,
                        Verdict::Counterexample(Witness::Pair {
                            first,
                            second,
                            symbol: symbol.to_string(),
                            tuple: t.clone(),
                        }),
                    ));
                }
            }
        }
    }
    Ok(report(Axiom::Independence, rule, Verdict::Pass))
}

fn neutrality_pool(profile: &Profile, symbol: &str, ctx: &AggContext) -> Result<Vec<Tuple>> {
    let mut pool = profile.union_instance().relation(symbol)?.clone();
    if let Some(extras) = &ctx.universe {
        if let Some(more) = extras.get(symbol) {
            pool.extend(more.iter().cloned());
        }
    }
    Ok(pool.into_iter().collect())
}

/// Tuples with equal support inside one profile must be treated alike.
pub fn check_pos_neutrality(
    rule: &dyn Aggregator,
    space: &ProfileSpace,
    ctx: &AggContext,
) -> Result<AxiomReport> {
    for profile in space.iter() {
        let outcome = rule.apply(&profile, ctx)?;
        for (symbol, _) in profile.schema().clone().symbols() {
            let pool = neutrality_pool(&profile, symbol, ctx)?;
            for (a, ta) in pool.iter().enumerate() {
                for tb in pool.iter().skip(a + 1) {
                    if profile.support(symbol, ta)? == profile.support(symbol, tb)?
                        && outcome.accepts(symbol, ta)? != outcome.accepts(symbol, tb)?
                    {
                        return Ok(report(
                            Axiom::PosNeutrality,
                            rule,
                            Verdict::Counterexample(Witness::TuplePair {
                                profile,
                                symbol: symbol.to_string(),
                                tuple_a: ta.clone(),
                                tuple_b: tb.clone(),
                            }),
                        ));
                    }
                }
            }
        }
    }
    Ok(report(Axiom::PosNeutrality, rule, Verdict::Pass))
}

/// Tuples with complementary supports inside one profile must be accepted
/// in exactly one of the two cases.
pub fn check_neg_neutrality(
    rule: &dyn Aggregator,
    space: &ProfileSpace,
    ctx: &AggContext,
) -> Result<AxiomReport> {
    for profile in space.iter() {
        let n = profile.len();
        let outcome = rule.apply(&profile, ctx)?;
        for (symbol, _) in profile.schema().clone().symbols() {
            let pool = neutrality_pool(&profile, symbol, ctx)?;
            for (a, ta) in pool.iter().enumerate() {
                for tb in pool.iter().skip(a) {
                    if profile.support(symbol, ta)? == profile.support(symbol, tb)?.complement(n)
                        && outcome.accepts(symbol, ta)? == outcome.accepts(symbol, tb)?
                    {
                        return Ok(report(
                            Axiom::NegNeutrality,
                            rule,
                            Verdict::Counterexample(Witness::TuplePair {
                                profile,
                                symbol: symbol.to_string(),
                                tuple_a: ta.clone(),
                                tuple_b: tb.clone(),
                            }),
                        ));
                    }
                }
            }
        }
    }
    Ok(report(Axiom::NegNeutrality, rule, Verdict::Pass))
}

/// Renaming domain values must commute with aggregation, for each supplied
/// permutation. Permutation carriers must cover the space's active domains.
pub fn check_perm_neutrality(
    rule: &dyn Aggregator,
    space: &ProfileSpace,
    permutations: &[Permutation],
    ctx: &AggContext,
) -> Result<AxiomReport> {
    for profile in space.iter() {
        let outcome = rule.apply(&profile, ctx)?;
        for rho in permutations {
            let permuted_profile = profile.permute_values(rho)?;
            let lhs = rule.apply(&permuted_profile, ctx)?;
            let rhs: Result<std::collections::BTreeSet<_>> = outcome
                .winners()
                .iter()
                .map(|w| w.permute(rho))
                .collect();
            if lhs.winners() != &rhs? {
                return Ok(report(
                    Axiom::PermNeutrality,
                    rule,
                    Verdict::Counterexample(Witness::ValuePerm {
                        profile,
                        permutation: rho.clone(),
                    }),
                ));
            }
        }
    }
    Ok(report(Axiom::PermNeutrality, rule, Verdict::Pass))
}

/// An accepted tuple must stay accepted when its support only grows and
/// everything else stays put.
pub fn check_monotonicity(
    rule: &dyn Aggregator,
    space: &ProfileSpace,
    ctx: &AggContext,
    opts: &CheckOptions,
) -> Result<AxiomReport> {
    let mut cache = OutcomeCache::new(rule, ctx);
    for (i, j) in pair_stream(space.len(), opts) {
        let base = space.get(i);
        let ext = space.get(j);
        let out_base = cache.get(space, i)?;
        let out_ext = cache.get(space, j)?;
        for (symbol, _) in base.schema().clone().symbols() {
            let accepted: Vec<Tuple> = {
                let mut acc = Vec::new();
                let pool = base.union_instance();
                for t in pool.relation(symbol)? {
                    if out_base.accepts(symbol, t)? {
                        acc.push(t.clone());
                    }
                }
                acc
            };
            for t in accepted {
                let grows = (1..=base.len()).all(|agent| {
                    let before = base.agent(agent).expect("in range").relation(symbol);
                    let after = ext.agent(agent).expect("in range").relation(symbol);
                    match (before, after) {
                        (Ok(b), Ok(a)) => b == a || (b.is_subset(a) && a.contains(&t)),
                        _ => false,
                    }
                });
                if grows && !out_ext.accepts(symbol, &t)? {
                    return Ok(report(
                        Axiom::Monotonicity,
                        rule,
                        Verdict::Counterexample(Witness::Extension {
                            base,
                            extension: ext,
                            symbol: symbol.to_string(),
                            tuple: t,
                        }),
                    ));
                }
            }
        }
    }
    Ok(report(Axiom::Monotonicity, rule, Verdict::Pass))
}

/// Dispatch by axiom code. Permutation-neutrality uses `permutations`.
#[allow(clippy::too_many_arguments)]
pub fn check_axiom(
    axiom: Axiom,
    rule: &dyn Aggregator,
    space: &ProfileSpace,
    permutations: &[Permutation],
    ctx: &AggContext,
    opts: &CheckOptions,
) -> Result<AxiomReport> {
    match axiom {
        Axiom::Unanimity => check_unanimity(rule, space, ctx),
        Axiom::Groundedness => check_groundedness(rule, space, ctx),
        Axiom::Anonymity => check_anonymity(rule, space, ctx),
        Axiom::Independence => check_independence(rule, space, ctx, opts),
        Axiom::PosNeutrality => check_pos_neutrality(rule, space, ctx),
        Axiom::NegNeutrality => check_neg_neutrality(rule, space, ctx),
        Axiom::PermNeutrality => check_perm_neutrality(rule, space, permutations, ctx),
        Axiom::Monotonicity => check_monotonicity(rule, space, ctx, opts),
    }
}

/// Re-run the violated condition on the witness alone. Returns true when
/// the violation reproduces.
pub fn replay(report: &AxiomReport, rule: &dyn Aggregator, ctx: &AggContext) -> Result<bool> {
    let witness = match report.witness() {
        Some(w) => w,
        None => return Ok(false),
    };
    match (report.axiom, witness) {
        (Axiom::Unanimity, Witness::Inclusion { profile, symbol, tuple }) => {
            let outcome = rule.apply(profile, ctx)?;
            let floor = profile.intersection_instance();
            Ok(floor.relation(symbol)?.contains(tuple) && !outcome.accepts(symbol, tuple)?)
        }
        (Axiom::Groundedness, Witness::Inclusion { profile, symbol, tuple }) => {
            let outcome = rule.apply(profile, ctx)?;
            let ceiling = profile.union_instance();
            let escaped = outcome
                .winners()
                .iter()
                .any(|w| w.relation(symbol).map(|r| r.contains(tuple)).unwrap_or(false));
            Ok(escaped && !ceiling.relation(symbol)?.contains(tuple))
        }
        (Axiom::Anonymity, Witness::Agents { profile, order }) => {
            let baseline = rule.apply(profile, ctx)?;
            let permuted = rule.apply(&profile.permute_agents(order)?, ctx)?;
            Ok(baseline != permuted)
        }
        (Axiom::Independence, Witness::Pair { first, second, symbol, tuple }) => {
            let same_support = first.support(symbol, tuple)? == second.support(symbol, tuple)?;
            let a = rule.apply(first, ctx)?.accepts(symbol, tuple)?;
            let b = rule.apply(second, ctx)?.accepts(symbol, tuple)?;
            Ok(same_support && a != b)
        }
        (Axiom::PosNeutrality, Witness::TuplePair { profile, symbol, tuple_a, tuple_b }) => {
            let outcome = rule.apply(profile, ctx)?;
            let same = profile.support(symbol, tuple_a)? == profile.support(symbol, tuple_b)?;
            Ok(same && outcome.accepts(symbol, tuple_a)? != outcome.accepts(symbol, tuple_b)?)
        }
        (Axiom::NegNeutrality, Witness::TuplePair { profile, symbol, tuple_a, tuple_b }) => {
            let outcome = rule.apply(profile, ctx)?;
            let complementary = profile.support(symbol, tuple_a)?
                == profile.support(symbol, tuple_b)?.complement(profile.len());
            Ok(complementary
                && outcome.accepts(symbol, tuple_a)? == outcome.accepts(symbol, tuple_b)?)
        }
        (Axiom::PermNeutrality, Witness::ValuePerm { profile, permutation }) => {
            let lhs = rule.apply(&profile.permute_values(permutation)?, ctx)?;
            let rhs: Result<std::collections::BTreeSet<_>> = rule
                .apply(profile, ctx)?
                .winners()
                .iter()
                .map(|w| w.permute(permutation))
                .collect();
            Ok(lhs.winners() != &rhs?)
        }
        (Axiom::Monotonicity, Witness::Extension { base, extension, symbol, tuple }) => {
            let out_base = rule.apply(base, ctx)?;
            let out_ext = rule.apply(extension, ctx)?;
            let grows = (1..=base.len()).all(|agent| {
                let b = base.agent(agent).unwrap().relation(symbol).unwrap();
                let a = extension.agent(agent).unwrap().relation(symbol).unwrap();
                b == a || (b.is_subset(a) && a.contains(tuple))
            });
            Ok(out_base.accepts(symbol, tuple)?
                && grows
                && !out_ext.accepts(symbol, tuple)?)
        }
        _ => Ok(false),
    }
}

/// The machine-checkable direction of the quota characterization: each
/// supplied quota family member must pass anonymity, independence, and
/// monotonicity on the space. The converse (only quota rules do) quantifies
/// over all aggregators and is not machine-checkable; the report says so.
pub struct QuotaLemmaReport {
    pub per_spec: Vec<(String, Vec<AxiomReport>)>,
    pub note: &'static str,
}

impl QuotaLemmaReport {
    pub fn all_passed(&self) -> bool {
        self.per_spec
            .iter()
            .all(|(_, reports)| reports.iter().all(|r| r.passed()))
    }
}

pub fn verify_quota_lemma(
    family: &[QuotaSpec],
    space: &ProfileSpace,
    ctx: &AggContext,
    opts: &CheckOptions,
) -> Result<QuotaLemmaReport> {
    let mut per_spec = Vec::new();
    for spec in family {
        let rule = Rule::Quota(spec.clone());
        let reports = vec![
            check_anonymity(&rule, space, ctx)?,
            check_independence(&rule, space, ctx, opts)?,
            check_monotonicity(&rule, space, ctx, opts)?,
        ];
        per_spec.push((rule.label(), reports));
    }
    Ok(QuotaLemmaReport {
        per_spec,
        note: "right-to-left direction only: the converse quantifies over all \
               aggregation procedures and is not machine-checkable",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregators::ConstantRule;
    use crate::model::{Instance, Schema, Value};
    use crate::oracle::{enum_profiles, SpaceSpec};

    fn unary_space(n: usize) -> ProfileSpace {
        let schema = Schema::new([("P", 1)]).unwrap();
        let spec = SpaceSpec::new(
            schema,
            vec![Value::c("a"), Value::c("b")],
            2,
            n,
        );
        enum_profiles(&spec).unwrap()
    }

    #[test]
    fn union_is_unanimous_and_grounded() {
        let space = unary_space(2);
        let ctx = AggContext::default();
        assert!(check_unanimity(&Rule::Union, &space, &ctx).unwrap().passed());
        assert!(check_groundedness(&Rule::Union, &space, &ctx)
            .unwrap()
            .passed());
        assert!(check_unanimity(&Rule::Intersection, &space, &ctx)
            .unwrap()
            .passed());
    }

    #[test]
    fn trivial_top_violates_unanimity() {
        let space = unary_space(2);
        let ctx = AggContext::default();
        let report = check_unanimity(&Rule::TrivialTop, &space, &ctx).unwrap();
        assert!(!report.passed());
        assert!(replay(&report, &Rule::TrivialTop, &ctx).unwrap());
    }

    #[test]
    fn zero_quota_with_extras_is_not_grounded() {
        let space = unary_space(2);
        let mut extras = crate::aggregators::TupleExtras::new();
        extras.insert(
            "P".into(),
            [Tuple::of(&["z"])].into_iter().collect(),
        );
        let ctx = AggContext::with_universe(extras);
        let report = check_groundedness(&Rule::TrivialZero, &space, &ctx).unwrap();
        assert!(!report.passed());
        assert!(replay(&report, &Rule::TrivialZero, &ctx).unwrap());
    }

    #[test]
    fn dictatorship_fails_anonymity_with_swap_witness() {
        let space = unary_space(2);
        let ctx = AggContext::default();
        let report = check_anonymity(&Rule::Dictatorship(1), &space, &ctx).unwrap();
        assert!(!report.passed());
        match report.witness().unwrap() {
            Witness::Agents { order, .. } => assert_eq!(order.len(), 2),
            other => panic!("unexpected witness {other:?}"),
        }
        assert!(replay(&report, &Rule::Dictatorship(1), &ctx).unwrap());
        // A single agent leaves only the identity permutation.
        let solo = unary_space(1);
        assert!(check_anonymity(&Rule::Dictatorship(1), &solo, &ctx)
            .unwrap()
            .passed());
    }

    #[test]
    fn quota_rules_are_independent_and_monotone() {
        let space = unary_space(2);
        let ctx = AggContext::default();
        let opts = CheckOptions::default();
        for rule in [Rule::Union, Rule::Intersection, Rule::Majority] {
            assert!(check_independence(&rule, &space, &ctx, &opts)
                .unwrap()
                .passed());
            assert!(check_monotonicity(&rule, &space, &ctx, &opts)
                .unwrap()
                .passed());
            assert!(check_pos_neutrality(&rule, &space, &ctx).unwrap().passed());
        }
    }

    #[test]
    fn union_fails_negative_neutrality_on_disjoint_singletons() {
        let space = unary_space(2);
        let ctx = AggContext::default();
        let report = check_neg_neutrality(&Rule::Union, &space, &ctx).unwrap();
        assert!(!report.passed());
        assert!(replay(&report, &Rule::Union, &ctx).unwrap());
    }

    #[test]
    fn majority_passes_negative_neutrality_for_odd_n() {
        let space = unary_space(3);
        let ctx = AggContext::default();
        assert!(check_neg_neutrality(&Rule::Majority, &space, &ctx)
            .unwrap()
            .passed());
    }

    #[test]
    fn permutation_neutrality_holds_for_catalog_fails_for_constant() {
        let space = unary_space(2);
        let ctx = AggContext::default();
        let carrier = vec![Value::c("a"), Value::c("b")];
        let rho = Permutation::transposition(
            Value::c("a"),
            Value::c("b"),
            carrier.clone(),
        )
        .unwrap();
        let id = Permutation::identity(carrier);
        let perms = vec![id, rho];
        for rule in [Rule::Union, Rule::Intersection, Rule::Majority, Rule::MergeIncomplete] {
            assert!(check_perm_neutrality(&rule, &space, &perms, &ctx)
                .unwrap()
                .passed());
        }
        let schema = Schema::new([("P", 1)]).unwrap();
        let fixed =
            Instance::new(schema, [("P", vec![Tuple::of(&["a"])])]).unwrap();
        let constant = ConstantRule(fixed);
        let report = check_perm_neutrality(&constant, &space, &perms, &ctx).unwrap();
        assert!(!report.passed());
        assert!(replay(&report, &constant, &ctx).unwrap());
        // The constant rule ignores support, so monotonicity holds.
        assert!(
            check_monotonicity(&constant, &space, &ctx, &CheckOptions::default())
                .unwrap()
                .passed()
        );
    }

    #[test]
    fn quota_lemma_family_passes() {
        let space = unary_space(3);
        let ctx = AggContext::default();
        let family = vec![
            QuotaSpec::uniform(1),
            QuotaSpec::uniform(2),
            QuotaSpec::uniform(3),
        ];
        let report =
            verify_quota_lemma(&family, &space, &ctx, &CheckOptions::default()).unwrap();
        assert!(report.all_passed());
        assert!(report.note.contains("not machine-checkable"));
    }
}
