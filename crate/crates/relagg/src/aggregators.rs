//! The aggregation rules, behind one `Aggregator` trait.
//!
//! Resolute rules produce a single winner; distance-based and
//! representative-voter rules may tie, in which case the outcome carries the
//! full argmin set in canonical order. Identical inputs always produce
//! identical outcomes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::constraints::Constraint;
use crate::model::{Instance, Permutation, Profile, Tuple};
use crate::{Error, Result};

/// Extra candidate tuples per relation symbol, on top of the profile union.
/// Needed by zero-quota rules (whose acceptance set would otherwise be
/// infinite) and by neutrality checks that probe tuples nobody proposed.
pub type TupleExtras = BTreeMap<String, BTreeSet<Tuple>>;

/// Budget caps for the enumerating rules.
#[derive(Debug, Clone)]
pub struct Limits {
    /// Maximum number of selections the merge rule may enumerate per symbol.
    pub merge_selections: u64,
    /// Maximum number of candidate instances a distance-based argmin may scan.
    pub distance_candidates: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            merge_selections: 1_000_000,
            distance_candidates: 1_000_000,
        }
    }
}

/// Evaluation context for rule application.
#[derive(Debug, Clone, Default)]
pub struct AggContext {
    /// When present, zero-quota rules accept every tuple of
    /// `union ∪ extras`; when absent, applying a rule with a zero default
    /// quota is an error.
    pub universe: Option<TupleExtras>,
    pub limits: Limits,
}

impl AggContext {
    pub fn with_universe(extras: TupleExtras) -> Self {
        AggContext {
            universe: Some(extras),
            limits: Limits::default(),
        }
    }
}

/// The canonical set of winning instances; non-empty, deduplicated, ordered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregationOutcome {
    winners: BTreeSet<Instance>,
}

impl AggregationOutcome {
    pub fn new(winners: BTreeSet<Instance>) -> Result<Self> {
        if winners.is_empty() {
            return Err(Error::EmptyCandidateSpace);
        }
        Ok(AggregationOutcome { winners })
    }

    pub fn single(instance: Instance) -> Self {
        AggregationOutcome {
            winners: [instance].into_iter().collect(),
        }
    }

    pub fn winners(&self) -> &BTreeSet<Instance> {
        &self.winners
    }

    pub fn is_resolute(&self) -> bool {
        self.winners.len() == 1
    }

    /// The canonically smallest winner (the `--tie=lex` selection).
    pub fn lex_winner(&self) -> &Instance {
        self.winners.iter().next().expect("outcome is non-empty")
    }

    /// Is `t` accepted for `symbol` by every winner? This is the reading the
    /// axiom and lifting checkers use for non-resolute rules.
    pub fn accepts(&self, symbol: &str, t: &Tuple) -> Result<bool> {
        for w in &self.winners {
            if !w.relation(symbol)?.contains(t) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Per-symbol, per-tuple quotas in `0..=n+1`.
///
/// Lookup order: an exception for `(symbol, tuple)`, then the symbol's
/// default, then the global default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotaSpec {
    pub default_quota: Option<u32>,
    pub per_symbol: BTreeMap<String, u32>,
    pub exceptions: BTreeMap<(String, Tuple), u32>,
}

impl QuotaSpec {
    pub fn uniform(q: u32) -> Self {
        QuotaSpec {
            default_quota: Some(q),
            per_symbol: BTreeMap::new(),
            exceptions: BTreeMap::new(),
        }
    }

    pub fn per_symbol(quotas: impl IntoIterator<Item = (String, u32)>) -> Self {
        QuotaSpec {
            default_quota: None,
            per_symbol: quotas.into_iter().collect(),
            exceptions: BTreeMap::new(),
        }
    }

    pub fn is_uniform(&self) -> bool {
        self.exceptions.is_empty()
            && match self.default_quota {
                Some(q) => self.per_symbol.values().all(|&v| v == q),
                None => {
                    let mut vals = self.per_symbol.values();
                    match vals.next() {
                        Some(first) => vals.all(|v| v == first),
                        None => true,
                    }
                }
            }
    }

    pub fn quota_for(&self, symbol: &str, t: &Tuple) -> Result<u32> {
        if let Some(&q) = self.exceptions.get(&(symbol.to_string(), t.clone())) {
            return Ok(q);
        }
        if let Some(&q) = self.per_symbol.get(symbol) {
            return Ok(q);
        }
        self.default_quota.ok_or_else(|| {
            Error::BadRule(
                format!("quota for `{symbol}`"),
                "no quota configured for this symbol".into(),
            )
        })
    }

    fn may_assign_zero(&self) -> bool {
        self.default_quota == Some(0) || self.per_symbol.values().any(|&q| q == 0)
    }

    fn validate(&self, n: usize) -> Result<()> {
        let top = n as u32 + 1;
        let all = self
            .default_quota
            .iter()
            .chain(self.per_symbol.values())
            .chain(self.exceptions.values());
        for &q in all {
            if q > top {
                return Err(Error::BadRule(
                    "quota".into(),
                    format!("quota {q} exceeds n+1 = {top}"),
                ));
            }
        }
        Ok(())
    }
}

/// Where a distance-based rule looks for minimizers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandidateSpace {
    /// Every instance whose relations are subsets of the profile union.
    /// Complete for the unconstrained rule: a tuple outside the union only
    /// ever increases the summed distance.
    SubsetsOfUnion,
    Explicit(Vec<Instance>),
}

/// The rule catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Union,
    Intersection,
    Majority,
    Quota(QuotaSpec),
    TrivialZero,
    TrivialTop,
    DistanceBased {
        space: CandidateSpace,
        constraints: Vec<Constraint>,
    },
    AverageVoter,
    RelationwiseAverageVoter,
    Dictatorship(usize),
    Oligarchy(BTreeSet<usize>),
    MergeIncomplete,
}

impl Rule {
    pub fn distance() -> Self {
        Rule::DistanceBased {
            space: CandidateSpace::SubsetsOfUnion,
            constraints: Vec::new(),
        }
    }

    /// Majority's uniform quota for `n` agents.
    pub fn majority_quota(n: usize) -> u32 {
        ((n + 2) / 2) as u32
    }

    /// Parse a rule descriptor: `union`, `intersection`, `majority`,
    /// `quota:<k>`, `quota:P=2,Q=1`, `distance`, `avg-voter`, `relwise-avg`,
    /// `dictator:<i>`, `oligarchy:1,3`, `merge`, `trivial-zero`,
    /// `trivial-top`.
    pub fn parse(desc: &str) -> Result<Rule> {
        let bad = |msg: &str| Error::BadRule(desc.to_string(), msg.to_string());
        match desc {
            "union" => return Ok(Rule::Union),
            "intersection" => return Ok(Rule::Intersection),
            "majority" => return Ok(Rule::Majority),
            "distance" => return Ok(Rule::distance()),
            "avg-voter" => return Ok(Rule::AverageVoter),
            "relwise-avg" => return Ok(Rule::RelationwiseAverageVoter),
            "merge" => return Ok(Rule::MergeIncomplete),
            "trivial-zero" => return Ok(Rule::TrivialZero),
            "trivial-top" => return Ok(Rule::TrivialTop),
            _ => {}
        }
        if let Some(rest) = desc.strip_prefix("quota:") {
            if let Ok(q) = rest.parse::<u32>() {
                return Ok(Rule::Quota(QuotaSpec::uniform(q)));
            }
            let mut per_symbol = BTreeMap::new();
            for part in rest.split(',') {
                let (symbol, q) = part
                    .split_once('=')
                    .ok_or_else(|| bad("expected `Symbol=quota` pairs"))?;
                let q: u32 = q.trim().parse().map_err(|_| bad("bad quota number"))?;
                per_symbol.insert(symbol.trim().to_string(), q);
            }
            if per_symbol.is_empty() {
                return Err(bad("empty quota list"));
            }
            return Ok(Rule::Quota(QuotaSpec {
                default_quota: None,
                per_symbol,
                exceptions: BTreeMap::new(),
            }));
        }
        if let Some(rest) = desc.strip_prefix("dictator:") {
            let i: usize = rest.parse().map_err(|_| bad("bad agent index"))?;
            return Ok(Rule::Dictatorship(i));
        }
        if let Some(rest) = desc.strip_prefix("oligarchy:") {
            if rest.trim().is_empty() {
                return Err(bad("empty coalition"));
            }
            let coalition = rest
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|_| bad("bad agent index")))
                .collect::<Result<BTreeSet<usize>>>()?;
            return Ok(Rule::Oligarchy(coalition));
        }
        Err(bad("unknown rule"))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Union => write!(f, "union"),
            Rule::Intersection => write!(f, "intersection"),
            Rule::Majority => write!(f, "majority"),
            Rule::Quota(spec) => {
                if let Some(q) = spec.default_quota {
                    if spec.per_symbol.is_empty() && spec.exceptions.is_empty() {
                        return write!(f, "quota:{q}");
                    }
                }
                let parts: Vec<String> = spec
                    .per_symbol
                    .iter()
                    .map(|(s, q)| format!("{s}={q}"))
                    .collect();
                write!(f, "quota:{}", parts.join(","))
            }
            Rule::TrivialZero => write!(f, "trivial-zero"),
            Rule::TrivialTop => write!(f, "trivial-top"),
            Rule::DistanceBased { .. } => write!(f, "distance"),
            Rule::AverageVoter => write!(f, "avg-voter"),
            Rule::RelationwiseAverageVoter => write!(f, "relwise-avg"),
            Rule::Dictatorship(i) => write!(f, "dictator:{i}"),
            Rule::Oligarchy(c) => {
                let parts: Vec<String> = c.iter().map(|i| i.to_string()).collect();
                write!(f, "oligarchy:{}", parts.join(","))
            }
            Rule::MergeIncomplete => write!(f, "merge"),
        }
    }
}

/// Anything that maps profiles to outcomes.
pub trait Aggregator {
    fn apply(&self, profile: &Profile, ctx: &AggContext) -> Result<AggregationOutcome>;

    fn label(&self) -> String;
}

/// Apply a rule under the default context.
pub fn aggregate(rule: &Rule, profile: &Profile) -> Result<AggregationOutcome> {
    rule.apply(profile, &AggContext::default())
}

impl Aggregator for Rule {
    fn label(&self) -> String {
        self.to_string()
    }

    fn apply(&self, profile: &Profile, ctx: &AggContext) -> Result<AggregationOutcome> {
        let n = profile.len();
        match self {
            Rule::Union => Ok(AggregationOutcome::single(profile.union_instance())),
            Rule::Intersection => Ok(AggregationOutcome::single(profile.intersection_instance())),
            Rule::Majority => {
                apply_quota(&QuotaSpec::uniform(Rule::majority_quota(n)), profile, ctx)
            }
            Rule::Quota(spec) => apply_quota(spec, profile, ctx),
            Rule::TrivialZero => apply_quota(&QuotaSpec::uniform(0), profile, ctx),
            Rule::TrivialTop => apply_quota(&QuotaSpec::uniform(n as u32 + 1), profile, ctx),
            Rule::DistanceBased { space, constraints } => {
                apply_distance(space, constraints, profile, ctx)
            }
            Rule::AverageVoter => apply_average_voter(profile),
            Rule::RelationwiseAverageVoter => apply_relationwise(profile),
            Rule::Dictatorship(i) => Ok(AggregationOutcome::single(profile.agent(*i)?.clone())),
            Rule::Oligarchy(coalition) => Ok(AggregationOutcome::single(
                profile.coalition_intersection(coalition.iter().copied())?,
            )),
            Rule::MergeIncomplete => apply_merge(profile, ctx),
        }
    }
}

fn apply_quota(
    spec: &QuotaSpec,
    profile: &Profile,
    ctx: &AggContext,
) -> Result<AggregationOutcome> {
    let n = profile.len();
    spec.validate(n)?;
    if spec.may_assign_zero() && ctx.universe.is_none() {
        return Err(Error::QuotaNeedsUniverse);
    }
    let empty = BTreeSet::new();
    let union = profile.union_instance();
    let mut out = Instance::empty(profile.schema().clone());
    for (symbol, _) in profile.schema().clone().symbols() {
        // Candidates: the union, any configured extras, and tuples that a
        // per-tuple exception gives quota zero (those are accepted outright).
        let mut candidates: BTreeSet<Tuple> =
            union.relation(symbol).expect("schema symbol").clone();
        if let Some(extras) = &ctx.universe {
            candidates.extend(extras.get(symbol).unwrap_or(&empty).iter().cloned());
        }
        for ((s, t), &q) in &spec.exceptions {
            if s == symbol && q == 0 {
                candidates.insert(t.clone());
            }
        }
        let mut accepted = BTreeSet::new();
        for t in candidates {
            let quota = spec.quota_for(symbol, &t)?;
            let support = profile.support(symbol, &t)?.len() as u32;
            if support >= quota {
                accepted.insert(t);
            }
        }
        out = out.with_relation(symbol, accepted);
    }
    Ok(AggregationOutcome::single(out))
}

fn apply_distance(
    space: &CandidateSpace,
    constraints: &[Constraint],
    profile: &Profile,
    ctx: &AggContext,
) -> Result<AggregationOutcome> {
    let mut best: Option<(usize, BTreeSet<Instance>)> = None;
    for candidate in distance_candidates(profile, space, ctx.limits.distance_candidates)? {
        let candidate = candidate?;
        let mut ok = true;
        for c in constraints {
            if !c.check(&candidate)? {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let mut score = 0usize;
        for member in profile.members() {
            score += member.symmetric_distance(&candidate)?;
        }
        match &mut best {
            None => best = Some((score, [candidate].into_iter().collect())),
            Some((min, set)) => {
                if score < *min {
                    *min = score;
                    set.clear();
                    set.insert(candidate);
                } else if score == *min {
                    set.insert(candidate);
                }
            }
        }
    }
    match best {
        Some((_, winners)) => AggregationOutcome::new(winners),
        None => Err(Error::EmptyCandidateSpace),
    }
}

/// Stream of candidate instances for the distance-based rule. The default
/// space enumerates every instance whose relations are subsets of the
/// profile union; the guard caps the product of `2^|union(P)|` over symbols.
pub fn distance_candidates<'a>(
    profile: &'a Profile,
    space: &'a CandidateSpace,
    cap: u64,
) -> Result<Box<dyn Iterator<Item = Result<Instance>> + 'a>> {
    match space {
        CandidateSpace::Explicit(list) => {
            let schema = profile.schema().clone();
            Ok(Box::new(list.iter().map(move |d| {
                if *d.schema() != schema {
                    Err(Error::SchemaMismatch)
                } else {
                    Ok(d.clone())
                }
            })))
        }
        CandidateSpace::SubsetsOfUnion => {
            let union = profile.union_instance();
            let symbols: Vec<String> = profile
                .schema()
                .symbols()
                .map(|(s, _)| s.to_string())
                .collect();
            let pools: Vec<Vec<Tuple>> = symbols
                .iter()
                .map(|s| {
                    union
                        .relation(s)
                        .expect("schema symbol")
                        .iter()
                        .cloned()
                        .collect()
                })
                .collect();
            let mut size: u128 = 1;
            for pool in &pools {
                if pool.len() >= 64 {
                    return Err(Error::CapExceeded {
                        what: "distance candidate space".into(),
                        size: u128::MAX,
                        cap,
                    });
                }
                size = size.saturating_mul(1u128 << pool.len());
            }
            if size > cap as u128 {
                return Err(Error::CapExceeded {
                    what: "distance candidate space".into(),
                    size,
                    cap,
                });
            }
            let schema = profile.schema().clone();
            let mut masks = vec![0u64; pools.len()];
            let mut done = false;
            Ok(Box::new(std::iter::from_fn(move || {
                if done {
                    return None;
                }
                let mut inst = Instance::empty(schema.clone());
                for (k, symbol) in symbols.iter().enumerate() {
                    let set: BTreeSet<Tuple> = pools[k]
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| masks[k] & (1 << i) != 0)
                        .map(|(_, t)| t.clone())
                        .collect();
                    inst = inst.with_relation(symbol, set);
                }
                // odometer over per-symbol subset masks
                let mut k = pools.len();
                loop {
                    if k == 0 {
                        done = true;
                        break;
                    }
                    k -= 1;
                    masks[k] += 1;
                    if masks[k] < (1u64 << pools[k].len()) {
                        break;
                    }
                    masks[k] = 0;
                }
                Some(Ok(inst))
            })))
        }
    }
}

fn apply_average_voter(profile: &Profile) -> Result<AggregationOutcome> {
    let distinct: BTreeSet<&Instance> = profile.members().iter().collect();
    let mut best: Option<(usize, BTreeSet<Instance>)> = None;
    for candidate in distinct {
        let mut score = 0usize;
        for member in profile.members() {
            score += member.symmetric_distance(candidate)?;
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
    AggregationOutcome::new(best.expect("profile is non-empty").1)
}

fn apply_relationwise(profile: &Profile) -> Result<AggregationOutcome> {
    let schema = profile.schema().clone();
    // Per symbol, the argmin set over the members' relations for that symbol.
    let mut choices: Vec<(String, Vec<BTreeSet<Tuple>>)> = Vec::new();
    for (symbol, _) in schema.symbols() {
        let relations: BTreeSet<&BTreeSet<Tuple>> = profile
            .members()
            .iter()
            .map(|d| d.relation(symbol).expect("schema symbol"))
            .collect();
        let mut best: Option<(usize, Vec<BTreeSet<Tuple>>)> = None;
        for rel in relations {
            let score: usize = profile
                .members()
                .iter()
                .map(|d| crate::model::relation_distance(d.relation(symbol).expect("schema"), rel))
                .sum();
            match &mut best {
                None => best = Some((score, vec![rel.clone()])),
                Some((min, list)) => {
                    if score < *min {
                        *min = score;
                        list.clear();
                        list.push(rel.clone());
                    } else if score == *min {
                        list.push(rel.clone());
                    }
                }
            }
        }
        choices.push((symbol.to_string(), best.expect("non-empty profile").1));
    }
    // Winners: every combination of per-symbol minimizers.
    let mut winners = BTreeSet::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let mut inst = Instance::empty(schema.clone());
        for (k, (symbol, options)) in choices.iter().enumerate() {
            inst = inst.with_relation(symbol, options[idx[k]].clone());
        }
        winners.insert(inst);
        let mut k = choices.len();
        loop {
            if k == 0 {
                return AggregationOutcome::new(winners);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < choices[k].1.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn apply_merge(profile: &Profile, ctx: &AggContext) -> Result<AggregationOutcome> {
    let mut out = Instance::empty(profile.schema().clone());
    for (symbol, _) in profile.schema().clone().symbols() {
        let merged = merge_relation(profile, symbol, ctx.limits.merge_selections)?;
        out = out.with_relation(symbol, merged);
    }
    Ok(AggregationOutcome::single(out))
}

/// The merge-with-incomplete-information rule for one symbol.
///
/// Stage one enumerates every selection of one tuple per agent and emits the
/// pointwise tuple that keeps a coordinate where all agents agree and puts
/// `null` where they do not. Stage two drops a candidate when some distinct
/// candidate refines it, i.e. agrees on every non-null coordinate and fills
/// in at least one null. If any agent's relation is empty there are no
/// selections and the result is empty.
pub fn merge_relation(
    profile: &Profile,
    symbol: &str,
    max_selections: u64,
) -> Result<BTreeSet<Tuple>> {
    let arity = profile.schema().arity(symbol)?;
    let relations: Vec<Vec<&Tuple>> = profile
        .members()
        .iter()
        .map(|d| d.relation(symbol).map(|set| set.iter().collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    if relations.iter().any(|r| r.is_empty()) {
        return Ok(BTreeSet::new());
    }
    let size: u128 = relations.iter().map(|r| r.len() as u128).product();
    if size > max_selections as u128 {
        return Err(Error::CapExceeded {
            what: format!("merge selections for `{symbol}`"),
            size,
            cap: max_selections,
        });
    }

    let mut candidates: BTreeSet<Tuple> = BTreeSet::new();
    let mut idx = vec![0usize; relations.len()];
    loop {
        let mut values = Vec::with_capacity(arity);
        for k in 0..arity {
            let first = &relations[0][idx[0]].values()[k];
            let agree = relations
                .iter()
                .zip(&idx)
                .all(|(rel, &i)| &rel[i].values()[k] == first);
            values.push(if agree {
                first.clone()
            } else {
                crate::model::Value::Null
            });
        }
        candidates.insert(Tuple(values));
        let mut k = relations.len();
        let mut rolled_over = false;
        loop {
            if k == 0 {
                rolled_over = true;
                break;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < relations[k].len() {
                break;
            }
            idx[k] = 0;
        }
        if rolled_over {
            break;
        }
    }

    let kept: BTreeSet<Tuple> = candidates
        .iter()
        .filter(|u| !candidates.iter().any(|v| v != *u && refines(v, u)))
        .cloned()
        .collect();
    Ok(kept)
}

/// `v` refines `u` when it matches every non-null coordinate of `u`.
fn refines(v: &Tuple, u: &Tuple) -> bool {
    v.values()
        .iter()
        .zip(u.values())
        .all(|(vv, uv)| uv.is_null() || vv == uv)
}

/// A dictatorship of one agent composed with a fixed value permutation.
/// Collectively rational for every sentence of the constant-free language
/// (permuting the domain preserves satisfaction), yet its output need not
/// equal any agent's instance — a useful probe for dictatorship detection.
#[derive(Debug, Clone)]
pub struct PermutedDictatorship {
    pub agent: usize,
    pub rho: Permutation,
}

impl Aggregator for PermutedDictatorship {
    fn label(&self) -> String {
        format!("permuted-dictator:{}", self.agent)
    }

    fn apply(&self, profile: &Profile, _ctx: &AggContext) -> Result<AggregationOutcome> {
        Ok(AggregationOutcome::single(
            profile.agent(self.agent)?.permute(&self.rho)?,
        ))
    }
}

/// Ignores the profile entirely. Violates permutation-neutrality whenever its
/// fixed output is not invariant under the permutation; passes monotonicity
/// vacuously.
#[derive(Debug, Clone)]
pub struct ConstantRule(pub Instance);

impl Aggregator for ConstantRule {
    fn label(&self) -> String {
        "constant".into()
    }

    fn apply(&self, profile: &Profile, _ctx: &AggContext) -> Result<AggregationOutcome> {
        if profile.schema() != self.0.schema() {
            return Err(Error::SchemaMismatch);
        }
        Ok(AggregationOutcome::single(self.0.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Schema, Value};
    use crate::samples;

    #[test]
    fn rule_descriptors_round_trip() {
        for desc in [
            "union",
            "intersection",
            "majority",
            "quota:2",
            "quota:P=2,Q=1",
            "distance",
            "avg-voter",
            "relwise-avg",
            "dictator:2",
            "oligarchy:1,3",
            "merge",
            "trivial-zero",
            "trivial-top",
        ] {
            let rule = Rule::parse(desc).unwrap();
            assert_eq!(rule.to_string(), desc, "descriptor `{desc}`");
        }
        assert!(Rule::parse("nonsense").is_err());
        assert!(Rule::parse("dictator:x").is_err());
        assert!(Rule::parse("oligarchy:").is_err());
    }

    #[test]
    fn dictator_index_is_validated() {
        let p = samples::directory_profile();
        assert!(aggregate(&Rule::Dictatorship(5), &p).is_err());
        let out = aggregate(&Rule::Dictatorship(1), &p).unwrap();
        assert_eq!(out.lex_winner(), &samples::hr_directory());
    }

    #[test]
    fn zero_quota_needs_a_universe() {
        let p = samples::directory_profile();
        assert!(matches!(
            aggregate(&Rule::TrivialZero, &p),
            Err(Error::QuotaNeedsUniverse)
        ));
        let out = Rule::TrivialZero
            .apply(&p, &AggContext::with_universe(TupleExtras::new()))
            .unwrap();
        // With no extras, quota zero accepts exactly the union.
        assert_eq!(out.lex_winner(), &p.union_instance());
    }

    #[test]
    fn trivial_top_accepts_nothing() {
        let p = samples::directory_profile();
        let out = aggregate(&Rule::TrivialTop, &p).unwrap();
        assert_eq!(out.lex_winner().tuple_count(), 0);
    }

    #[test]
    fn merge_on_unanimous_profile_is_identity() {
        let d = samples::hr_directory();
        let p = Profile::new(vec![d.clone(), d.clone(), d.clone()]).unwrap();
        let out = aggregate(&Rule::MergeIncomplete, &p).unwrap();
        assert_eq!(out.lex_winner(), &d);
    }

    #[test]
    fn merge_cap_is_enforced() {
        let p = samples::directory_profile();
        let err = merge_relation(&p, "Staff", 10).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }

    #[test]
    fn distance_candidate_counts() {
        let schema = Schema::new([("P", 1)]).unwrap();
        let mk = |rows: &[&str]| {
            Instance::new(
                schema.clone(),
                [("P", rows.iter().map(|r| Tuple::of(&[r])).collect::<Vec<_>>())],
            )
            .unwrap()
        };
        let p = Profile::new(vec![mk(&["a", "b"]), mk(&["c"])]).unwrap();
        // Union has three tuples: eight subset candidates.
        let candidates: Vec<_> = distance_candidates(&p, &CandidateSpace::SubsetsOfUnion, 1_000)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(candidates.len(), 8);

        let explicit = CandidateSpace::Explicit(vec![mk(&["a"]), mk(&["b"])]);
        let listed: Vec<_> = distance_candidates(&p, &explicit, 1_000)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(listed.len(), 2);

        assert!(matches!(
            distance_candidates(&p, &CandidateSpace::SubsetsOfUnion, 4),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn constrained_distance_filters_candidates() {
        let schema = Schema::new([("P", 2)]).unwrap();
        let mk = |rows: &[(&str, &str)]| {
            Instance::new(
                schema.clone(),
                [(
                    "P",
                    rows.iter().map(|(a, b)| Tuple::of(&[a, b])).collect::<Vec<_>>(),
                )],
            )
            .unwrap()
        };
        let p = Profile::new(vec![mk(&[("a", "b")]), mk(&[("a", "c")])]).unwrap();
        let fd = Constraint::parse("fd P: 1 -> 2", schema.as_ref()).unwrap();
        let rule = Rule::DistanceBased {
            space: CandidateSpace::SubsetsOfUnion,
            constraints: vec![fd],
        };
        let out = aggregate(&rule, &p).unwrap();
        // {(a,b),(a,c)} violates the dependency; the empty instance and the
        // two singletons all tie at total distance 2.
        assert_eq!(out.winners().len(), 3);
        for w in out.winners() {
            assert!(w.tuple_count() <= 1);
        }
    }

    #[test]
    fn merge_inserts_nulls_at_disagreements() {
        let schema = Schema::new([("P", 2)]).unwrap();
        let mk = |a: &str, b: &str| {
            Instance::new(schema.clone(), [("P", vec![Tuple::of(&[a, b])])]).unwrap()
        };
        let p = Profile::new(vec![mk("a", "b"), mk("a", "c")]).unwrap();
        let merged = merge_relation(&p, "P", 1_000).unwrap();
        let expected: BTreeSet<Tuple> =
            [Tuple(vec![Value::c("a"), Value::Null])].into_iter().collect();
        assert_eq!(merged, expected);
    }

    #[test]
    fn outcomes_are_deterministic() {
        let p = samples::directory_profile();
        for rule in [
            Rule::Union,
            Rule::Majority,
            Rule::AverageVoter,
            Rule::RelationwiseAverageVoter,
            Rule::MergeIncomplete,
        ] {
            let a = aggregate(&rule, &p).unwrap();
            let b = aggregate(&rule, &p).unwrap();
            assert_eq!(a, b);
        }
    }
}
