//! JSON documents: profiles on disk, space configurations for the check
//! commands, and replayable counterexample reports.
//!
//! A profile document looks like
//!
//! ```json
//! {"schema": {"P": 2}, "consts": ["a", "b"],
//!  "instances": [{"P": [["a", "b"]]}, {"P": []}]}
//! ```
//!
//! JSON `null` inside a tuple denotes the null value. Serialization is
//! canonical (sorted relations, sorted tuples), so parse ∘ serialize is the
//! identity on canonical profiles.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::aggregators::{AggContext, TupleExtras};
use crate::axioms::{self, Axiom, AxiomReport, Verdict, Witness};
use crate::constraints::Constraint;
use crate::folang::{parse_formula, parse_query, ParseCtx};
use crate::lifting::{LiftTarget, WinnerReading};
use crate::model::{Instance, Permutation, Profile, Schema, Tuple, Value};
use crate::oracle::SpaceSpec;
use crate::preservation::check_commutes;
use crate::{Error, Result};

/// One relation map: symbol → list of rows, `null` meaning the null value.
pub type InstanceDoc = BTreeMap<String, Vec<Vec<Option<String>>>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub schema: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consts: Option<Vec<String>>,
    pub instances: Vec<InstanceDoc>,
}

fn value_from_doc(v: &Option<String>) -> Value {
    match v {
        Some(token) => Value::c(token.clone()),
        None => Value::Null,
    }
}

fn value_to_doc(v: &Value) -> Option<String> {
    match v {
        Value::Const(token) => Some(token.clone()),
        Value::Null => None,
    }
}

pub fn tuple_from_doc(row: &[Option<String>]) -> Tuple {
    Tuple(row.iter().map(value_from_doc).collect())
}

pub fn tuple_to_doc(t: &Tuple) -> Vec<Option<String>> {
    t.values().iter().map(value_to_doc).collect()
}

pub fn instance_from_doc(schema: &Arc<Schema>, doc: &InstanceDoc) -> Result<Instance> {
    Instance::new(
        schema.clone(),
        doc.iter()
            .map(|(symbol, rows)| {
                (
                    symbol.clone(),
                    rows.iter().map(|r| tuple_from_doc(r)).collect::<Vec<_>>(),
                )
            })
            .collect::<Vec<_>>(),
    )
}

pub fn instance_to_doc(instance: &Instance) -> InstanceDoc {
    instance
        .relations()
        .map(|(symbol, tuples)| {
            (
                symbol.to_string(),
                tuples.iter().map(tuple_to_doc).collect(),
            )
        })
        .collect()
}

impl ProfileDocument {
    pub fn schema(&self) -> Result<Arc<Schema>> {
        Schema::new(self.schema.iter().map(|(s, a)| (s.clone(), *a)))
    }

    pub fn to_profile(&self) -> Result<Profile> {
        let schema = self.schema()?;
        let instances = self
            .instances
            .iter()
            .map(|doc| instance_from_doc(&schema, doc))
            .collect::<Result<Vec<_>>>()?;
        Profile::new(instances)
    }

    pub fn parse_ctx(&self) -> Result<ParseCtx> {
        Ok(ParseCtx::with_consts(
            self.schema()?,
            self.consts.clone().unwrap_or_default(),
        ))
    }

    pub fn from_profile(profile: &Profile, consts: Option<Vec<String>>) -> ProfileDocument {
        ProfileDocument {
            schema: profile
                .schema()
                .symbols()
                .map(|(s, a)| (s.to_string(), a))
                .collect(),
            consts,
            instances: profile.members().iter().map(instance_to_doc).collect(),
        }
    }

    /// Winners serialized in the same shape as an input profile.
    pub fn from_instances<'a>(
        schema: &Schema,
        consts: Option<Vec<String>>,
        instances: impl IntoIterator<Item = &'a Instance>,
    ) -> ProfileDocument {
        ProfileDocument {
            schema: schema.symbols().map(|(s, a)| (s.to_string(), a)).collect(),
            consts,
            instances: instances.into_iter().map(instance_to_doc).collect(),
        }
    }
}

/// Space configuration for the check commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub schema: BTreeMap<String, usize>,
    /// Domain tokens; `null` adds the null value to the domain.
    pub domain: Vec<Option<String>>,
    pub max_tuples: usize,
    pub agents: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extras: Option<BTreeMap<String, Vec<Vec<Option<String>>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consts: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeDoc {
    Exhaustive,
    Sampled { seed: u64, count: usize },
}

impl SpaceDoc {
    pub fn to_space_spec(&self) -> Result<SpaceSpec> {
        let schema = Schema::new(self.schema.iter().map(|(s, a)| (s.clone(), *a)))?;
        let domain: Vec<Value> = self.domain.iter().map(value_from_doc).collect();
        let constraints = self
            .constraints
            .iter()
            .map(|line| Constraint::parse(line, &schema))
            .collect::<Result<Vec<_>>>()?;
        let mut spec = SpaceSpec::new(schema, domain, self.max_tuples, self.agents)
            .with_constraints(constraints);
        if let Some(ModeDoc::Sampled { seed, count }) = &self.mode {
            spec = spec.sampled(*seed, *count);
        }
        if let Some(cap) = self.cap {
            spec.cap = cap;
        }
        Ok(spec)
    }

    pub fn extras(&self) -> TupleExtras {
        let mut out = TupleExtras::new();
        if let Some(extras) = &self.extras {
            for (symbol, rows) in extras {
                out.insert(
                    symbol.clone(),
                    rows.iter().map(|r| tuple_from_doc(r)).collect(),
                );
            }
        }
        out
    }

    pub fn parse_ctx(&self) -> Result<ParseCtx> {
        let schema = Schema::new(self.schema.iter().map(|(s, a)| (s.clone(), *a)))?;
        let mut consts: BTreeSet<String> = self
            .consts
            .clone()
            .unwrap_or_default()
            .into_iter()
            .collect();
        for v in self.domain.iter().flatten() {
            consts.insert(v.clone());
        }
        Ok(ParseCtx {
            schema,
            consts,
        })
    }
}

/// A failed check, with everything needed to re-run it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleDoc {
    /// "axiom", "lifting", or "commute".
    pub check: String,
    pub rule: String,
    pub schema: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consts: Option<Vec<String>>,
    /// The violating profile, plus a second one for pairwise axioms.
    pub profiles: Vec<Vec<InstanceDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axiom: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuples: Option<Vec<Vec<Option<String>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_permutation: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extras: Option<BTreeMap<String, Vec<Vec<Option<String>>>>>,
    /// For lifting failures: the winner violating the constraint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violating_winner: Option<InstanceDoc>,
    /// For commutation failures: both sides' answer sets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate_then_query: Option<Vec<Vec<Vec<Option<String>>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_then_aggregate: Option<Vec<Vec<Vec<Option<String>>>>>,
}

fn schema_doc(schema: &Schema) -> BTreeMap<String, usize> {
    schema.symbols().map(|(s, a)| (s.to_string(), a)).collect()
}

fn profile_doc(profile: &Profile) -> Vec<InstanceDoc> {
    profile.members().iter().map(instance_to_doc).collect()
}

fn extras_doc(ctx: &AggContext) -> Option<BTreeMap<String, Vec<Vec<Option<String>>>>> {
    ctx.universe.as_ref().map(|extras| {
        extras
            .iter()
            .map(|(symbol, tuples)| {
                (symbol.clone(), tuples.iter().map(tuple_to_doc).collect())
            })
            .collect()
    })
}

impl CounterexampleDoc {
    pub fn from_axiom_report(
        report: &AxiomReport,
        schema: &Schema,
        ctx: &AggContext,
    ) -> Option<CounterexampleDoc> {
        let witness = report.witness()?;
        let mut doc = CounterexampleDoc {
            check: "axiom".into(),
            rule: report.rule.clone(),
            schema: schema_doc(schema),
            consts: None,
            profiles: Vec::new(),
            axiom: Some(report.axiom.code().to_string()),
            constraint: None,
            formula: None,
            query: None,
            symbol: None,
            tuples: None,
            agent_order: None,
            value_permutation: None,
            extras: extras_doc(ctx),
            violating_winner: None,
            aggregate_then_query: None,
            query_then_aggregate: None,
        };
        match witness {
            Witness::Inclusion { profile, symbol, tuple } => {
                doc.profiles = vec![profile_doc(profile)];
                doc.symbol = Some(symbol.clone());
                doc.tuples = Some(vec![tuple_to_doc(tuple)]);
            }
            Witness::Agents { profile, order } => {
                doc.profiles = vec![profile_doc(profile)];
                doc.agent_order = Some(order.clone());
            }
            Witness::Pair { first, second, symbol, tuple } => {
                doc.profiles = vec![profile_doc(first), profile_doc(second)];
                doc.symbol = Some(symbol.clone());
                doc.tuples = Some(vec![tuple_to_doc(tuple)]);
            }
            Witness::TuplePair { profile, symbol, tuple_a, tuple_b } => {
                doc.profiles = vec![profile_doc(profile)];
                doc.symbol = Some(symbol.clone());
                doc.tuples = Some(vec![tuple_to_doc(tuple_a), tuple_to_doc(tuple_b)]);
            }
            Witness::ValuePerm { profile, permutation } => {
                doc.profiles = vec![profile_doc(profile)];
                let map = permutation
                    .entries()
                    .filter_map(|(k, v)| match (k, v) {
                        (Value::Const(k), Value::Const(v)) => Some((k.clone(), v.clone())),
                        _ => None,
                    })
                    .collect();
                doc.value_permutation = Some(map);
            }
            Witness::Extension { base, extension, symbol, tuple } => {
                doc.profiles = vec![profile_doc(base), profile_doc(extension)];
                doc.symbol = Some(symbol.clone());
                doc.tuples = Some(vec![tuple_to_doc(tuple)]);
            }
        }
        Some(doc)
    }

    pub fn from_lift_failure(
        rule: &str,
        target: &LiftTarget,
        profile: &Profile,
        winner: &Instance,
        ctx: &AggContext,
    ) -> CounterexampleDoc {
        let (constraint, formula) = match target {
            LiftTarget::Constraint(c) => (Some(c.to_string()), None),
            LiftTarget::Sentence(phi) => (None, Some(phi.to_string())),
        };
        CounterexampleDoc {
            check: "lifting".into(),
            rule: rule.to_string(),
            schema: schema_doc(profile.schema()),
            consts: None,
            profiles: vec![profile_doc(profile)],
            axiom: None,
            constraint,
            formula,
            query: None,
            symbol: None,
            tuples: None,
            agent_order: None,
            value_permutation: None,
            extras: extras_doc(ctx),
            violating_winner: Some(instance_to_doc(winner)),
            aggregate_then_query: None,
            query_then_aggregate: None,
        }
    }

    pub fn from_commute_failure(
        rule: &str,
        query: &str,
        profile: &Profile,
        left: &BTreeSet<crate::folang::AnswerSet>,
        right: &BTreeSet<crate::folang::AnswerSet>,
        ctx: &AggContext,
    ) -> CounterexampleDoc {
        let side = |s: &BTreeSet<crate::folang::AnswerSet>| {
            s.iter()
                .map(|a| a.tuples().iter().map(tuple_to_doc).collect())
                .collect()
        };
        CounterexampleDoc {
            check: "commute".into(),
            rule: rule.to_string(),
            schema: schema_doc(profile.schema()),
            consts: None,
            profiles: vec![profile_doc(profile)],
            axiom: None,
            constraint: None,
            formula: None,
            query: Some(query.to_string()),
            symbol: None,
            tuples: None,
            agent_order: None,
            value_permutation: None,
            extras: extras_doc(ctx),
            violating_winner: None,
            aggregate_then_query: Some(side(left)),
            query_then_aggregate: Some(side(right)),
        }
    }

    fn schema(&self) -> Result<Arc<Schema>> {
        Schema::new(self.schema.iter().map(|(s, a)| (s.clone(), *a)))
    }

    fn profile(&self, idx: usize) -> Result<Profile> {
        let schema = self.schema()?;
        let docs = self
            .profiles
            .get(idx)
            .ok_or_else(|| Error::BadDocument(format!("missing profile {idx}")))?;
        let instances = docs
            .iter()
            .map(|d| instance_from_doc(&schema, d))
            .collect::<Result<Vec<_>>>()?;
        Profile::new(instances)
    }

    fn agg_context(&self) -> AggContext {
        match &self.extras {
            None => AggContext::default(),
            Some(extras) => {
                let mut map = TupleExtras::new();
                for (symbol, rows) in extras {
                    map.insert(
                        symbol.clone(),
                        rows.iter().map(|r| tuple_from_doc(r)).collect(),
                    );
                }
                AggContext::with_universe(map)
            }
        }
    }

    /// Re-run the failed check on the stored witness. Returns true when the
    /// violation reproduces (the same verdict as the original run).
    pub fn replay(&self) -> Result<bool> {
        let rule = crate::aggregators::Rule::parse(&self.rule)?;
        let ctx = self.agg_context();
        match self.check.as_str() {
            "axiom" => {
                let axiom = Axiom::parse(
                    self.axiom
                        .as_deref()
                        .ok_or_else(|| Error::BadDocument("missing axiom".into()))?,
                )?;
                let witness = self.witness(axiom)?;
                let report = AxiomReport {
                    axiom,
                    rule: self.rule.clone(),
                    verdict: Verdict::Counterexample(witness),
                };
                axioms::replay(&report, &rule, &ctx)
            }
            "lifting" => {
                let profile = self.profile(0)?;
                let schema = self.schema()?;
                let target = self.lift_target(&schema)?;
                for member in profile.members() {
                    if !target.satisfied_by(member)? {
                        return Ok(false);
                    }
                }
                let space = crate::oracle::ProfileSpace::explicit(vec![profile]);
                let report = crate::lifting::check_lifting(
                    &rule,
                    &target,
                    &space,
                    &ctx,
                    WinnerReading::EveryWinner,
                )?;
                Ok(!report.lifted())
            }
            "commute" => {
                let profile = self.profile(0)?;
                let schema = self.schema()?;
                let consts = self.consts.clone().unwrap_or_default();
                let pctx = ParseCtx::with_consts(schema, consts);
                let query = parse_query(
                    self.query
                        .as_deref()
                        .ok_or_else(|| Error::BadDocument("missing query".into()))?,
                    &pctx,
                )?;
                let report = check_commutes(&rule, &query, &profile, &ctx)?;
                Ok(!report.commutes())
            }
            other => Err(Error::BadDocument(format!("unknown check kind `{other}`"))),
        }
    }

    fn lift_target(&self, schema: &Arc<Schema>) -> Result<LiftTarget> {
        if let Some(line) = &self.constraint {
            return Ok(LiftTarget::Constraint(Constraint::parse(line, schema)?));
        }
        if let Some(text) = &self.formula {
            let pctx = ParseCtx::with_consts(
                schema.clone(),
                self.consts.clone().unwrap_or_default(),
            );
            return LiftTarget::sentence(parse_formula(text, &pctx)?);
        }
        Err(Error::BadDocument(
            "lifting document needs a constraint or formula".into(),
        ))
    }

    fn witness(&self, axiom: Axiom) -> Result<Witness> {
        let missing = |what: &str| Error::BadDocument(format!("missing {what}"));
        let symbol = || {
            self.symbol
                .clone()
                .ok_or_else(|| missing("symbol"))
        };
        let tuple = |idx: usize| -> Result<Tuple> {
            let rows = self.tuples.as_ref().ok_or_else(|| missing("tuples"))?;
            let row = rows.get(idx).ok_or_else(|| missing("tuple"))?;
            Ok(tuple_from_doc(row))
        };
        Ok(match axiom {
            Axiom::Unanimity | Axiom::Groundedness => Witness::Inclusion {
                profile: self.profile(0)?,
                symbol: symbol()?,
                tuple: tuple(0)?,
            },
            Axiom::Anonymity => Witness::Agents {
                profile: self.profile(0)?,
                order: self
                    .agent_order
                    .clone()
                    .ok_or_else(|| missing("agent_order"))?,
            },
            Axiom::Independence => Witness::Pair {
                first: self.profile(0)?,
                second: self.profile(1)?,
                symbol: symbol()?,
                tuple: tuple(0)?,
            },
            Axiom::PosNeutrality | Axiom::NegNeutrality => Witness::TuplePair {
                profile: self.profile(0)?,
                symbol: symbol()?,
                tuple_a: tuple(0)?,
                tuple_b: tuple(1)?,
            },
            Axiom::PermNeutrality => {
                let raw = self
                    .value_permutation
                    .as_ref()
                    .ok_or_else(|| missing("value_permutation"))?;
                let map: BTreeMap<Value, Value> = raw
                    .iter()
                    .map(|(k, v)| (Value::c(k.clone()), Value::c(v.clone())))
                    .collect();
                Witness::ValuePerm {
                    profile: self.profile(0)?,
                    permutation: Permutation::new(map)?,
                }
            }
            Axiom::Monotonicity => Witness::Extension {
                base: self.profile(0)?,
                extension: self.profile(1)?,
                symbol: symbol()?,
                tuple: tuple(0)?,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregators::Rule;
    use crate::axioms::{check_neg_neutrality, check_unanimity};
    use crate::oracle::{enum_profiles, ProfileSpace};
    use crate::samples;

    #[test]
    fn profile_documents_round_trip() {
        let profile = samples::directory_profile();
        let doc = ProfileDocument::from_profile(&profile, None);
        let text = serde_json::to_string_pretty(&doc).unwrap();
        let parsed: ProfileDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.to_profile().unwrap(), profile);
    }

    #[test]
    fn null_round_trips_as_json_null() {
        let text = r#"{"schema": {"P": 2}, "instances": [{"P": [["a", null]]}]}"#;
        let doc: ProfileDocument = serde_json::from_str(text).unwrap();
        let profile = doc.to_profile().unwrap();
        let t = profile
            .agent(1)
            .unwrap()
            .relation("P")
            .unwrap()
            .iter()
            .next()
            .unwrap()
            .clone();
        assert_eq!(t, Tuple(vec![Value::c("a"), Value::Null]));
        let back = serde_json::to_value(ProfileDocument::from_profile(&profile, None)).unwrap();
        assert_eq!(back["instances"][0]["P"][0][1], serde_json::Value::Null);
    }

    #[test]
    fn non_string_tokens_are_rejected() {
        let text = r#"{"schema": {"P": 1}, "instances": [{"P": [[10]]}]}"#;
        assert!(serde_json::from_str::<ProfileDocument>(text).is_err());
    }

    #[test]
    fn space_doc_parses() {
        let text = r#"{
            "schema": {"P": 2},
            "domain": ["a", "b", null],
            "max_tuples": 2,
            "agents": 2,
            "constraints": ["fd P: 1 -> 2"],
            "mode": {"sampled": {"seed": 7, "count": 10}}
        }"#;
        let doc: SpaceDoc = serde_json::from_str(text).unwrap();
        let spec = doc.to_space_spec().unwrap();
        assert_eq!(spec.agents, 2);
        assert_eq!(spec.domain.len(), 3);
        assert!(spec.domain.contains(&Value::Null));
        assert_eq!(spec.constraints.len(), 1);
        assert!(matches!(spec.mode, Mode::Sampled { seed: 7, count: 10 }));
    }

    #[test]
    fn axiom_counterexample_documents_replay() {
        let schema = Schema::new([("P", 1)]).unwrap();
        let spec = SpaceSpec::new(
            schema.clone(),
            vec![Value::c("a"), Value::c("b")],
            2,
            2,
        );
        let space = enum_profiles(&spec).unwrap();
        let ctx = AggContext::default();
        let report = check_neg_neutrality(&Rule::Union, &space, &ctx).unwrap();
        let doc = CounterexampleDoc::from_axiom_report(&report, &schema, &ctx).unwrap();
        let text = serde_json::to_string(&doc).unwrap();
        let parsed: CounterexampleDoc = serde_json::from_str(&text).unwrap();
        assert!(parsed.replay().unwrap());

        let report = check_unanimity(&Rule::TrivialTop, &space, &ctx).unwrap();
        let doc = CounterexampleDoc::from_axiom_report(&report, &schema, &ctx).unwrap();
        assert!(doc.replay().unwrap());
    }

    #[test]
    fn lifting_counterexample_documents_replay() {
        let profile = samples::paradox_profile();
        let schema = profile.schema().clone();
        let pctx = ParseCtx::new(schema);
        let phi = parse_formula("forall x. (P(x) -> exists y. Q(x,y))", &pctx).unwrap();
        let target = LiftTarget::sentence(phi).unwrap();
        let ctx = AggContext::default();
        let space = ProfileSpace::explicit(vec![profile.clone()]);
        let report = crate::lifting::check_lifting(
            &Rule::Majority,
            &target,
            &space,
            &ctx,
            WinnerReading::EveryWinner,
        )
        .unwrap();
        let (cx_profile, winner) = match &report.verdict {
            crate::lifting::LiftVerdict::Counterexample { profile, winner } => (profile, winner),
            _ => panic!("expected failure"),
        };
        let doc = CounterexampleDoc::from_lift_failure(
            "majority",
            &target,
            cx_profile,
            winner,
            &ctx,
        );
        let text = serde_json::to_string(&doc).unwrap();
        let parsed: CounterexampleDoc = serde_json::from_str(&text).unwrap();
        assert!(parsed.replay().unwrap());
    }

    #[test]
    fn commute_counterexample_documents_replay() {
        let profile = samples::disjoint_pair_profile();
        let pctx = ParseCtx::new(samples::divergence_schema());
        let query = parse_query("ans(x) :- exists y. P(x,y)", &pctx).unwrap();
        let ctx = AggContext::default();
        let report = check_commutes(&Rule::Intersection, &query, &profile, &ctx).unwrap();
        assert!(!report.commutes());
        let doc = CounterexampleDoc::from_commute_failure(
            "intersection",
            &report.query,
            &profile,
            &report.aggregate_then_query,
            &report.query_then_aggregate,
            &ctx,
        );
        let text = serde_json::to_string(&doc).unwrap();
        let parsed: CounterexampleDoc = serde_json::from_str(&text).unwrap();
        assert!(parsed.replay().unwrap());
    }
}
