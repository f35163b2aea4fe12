//! Schemas, domain values, instances, and profiles.
//!
//! Instances are kept canonical at all times: relations are duplicate-free
//! `BTreeSet`s of tuples ordered by the canonical value order (`Null` sorts
//! last), so two instances are equal exactly when their canonical forms are
//! identical and iteration order is deterministic everywhere. All types here
//! are immutable after construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// A domain value: an opaque token, or the distinguished null `⊥`.
///
/// The countable domain of the formalism is never materialized; only values
/// mentioned in some tuple matter. `Null` is an ordinary value for equality
/// and satisfaction (`⊥ = ⊥` holds, `⊥ = a` does not) and orders after every
/// token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Const(String),
    Null,
}

impl Value {
    pub fn c(token: impl Into<String>) -> Self {
        Value::Const(token.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Const(t) => write!(f, "{t}"),
            Value::Null => write!(f, "null"),
        }
    }
}

/// An ordered list of values inhabiting one relation; its length must match
/// the relation's arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple(pub Vec<Value>);

impl Tuple {
    pub fn new(values: Vec<Value>) -> Self {
        Tuple(values)
    }

    /// Convenience constructor from string tokens.
    pub fn of(tokens: &[&str]) -> Self {
        Tuple(tokens.iter().map(|t| Value::c(*t)).collect())
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// A relational schema: a finite, non-empty map from relation names to
/// positive arities.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Schema {
    symbols: BTreeMap<String, usize>,
}

impl Schema {
    pub fn new<I, S>(symbols: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (name, arity) in symbols {
            let name = name.into();
            if arity == 0 {
                return Err(Error::BadSchema(format!("relation `{name}` has arity 0")));
            }
            if map.insert(name.clone(), arity).is_some() {
                return Err(Error::BadSchema(format!("duplicate relation `{name}`")));
            }
        }
        if map.is_empty() {
            return Err(Error::BadSchema("no relation symbols".into()));
        }
        Ok(Arc::new(Schema { symbols: map }))
    }

    pub fn arity(&self, symbol: &str) -> Result<usize> {
        self.symbols
            .get(symbol)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.symbols.contains_key(symbol)
    }

    /// Relation names in canonical (lexicographic) order.
    pub fn symbols(&self) -> impl Iterator<Item = (&str, usize)> {
        self.symbols.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// A finite relational instance over a schema.
///
/// Every schema symbol is present (possibly empty), every tuple is
/// arity-correct, and relations are canonical sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Instance {
    schema: Arc<Schema>,
    relations: BTreeMap<String, BTreeSet<Tuple>>,
}

impl Instance {
    /// An instance with every relation empty.
    pub fn empty(schema: Arc<Schema>) -> Self {
        let relations = schema
            .symbols()
            .map(|(name, _)| (name.to_string(), BTreeSet::new()))
            .collect();
        Instance { schema, relations }
    }

    /// Build an instance from per-symbol tuple lists. Duplicates collapse,
    /// order is irrelevant, and symbols missing from `relations` come out
    /// empty.
    pub fn new<I, S>(schema: Arc<Schema>, relations: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<Tuple>)>,
        S: Into<String>,
    {
        let mut inst = Instance::empty(schema);
        for (symbol, tuples) in relations {
            let symbol = symbol.into();
            let arity = inst.schema.arity(&symbol)?;
            let set = inst.relations.get_mut(&symbol).expect("symbol present");
            for t in tuples {
                if t.arity() != arity {
                    return Err(Error::ArityMismatch {
                        symbol,
                        expected: arity,
                        got: t.arity(),
                    });
                }
                set.insert(t);
            }
        }
        Ok(inst)
    }

    /// Replace one relation wholesale (used by rule evaluators; keeps the
    /// canonical representation by construction).
    pub(crate) fn with_relation(mut self, symbol: &str, tuples: BTreeSet<Tuple>) -> Self {
        debug_assert!(self.schema.contains(symbol));
        self.relations.insert(symbol.to_string(), tuples);
        self
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn relation(&self, symbol: &str) -> Result<&BTreeSet<Tuple>> {
        self.relations
            .get(symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &BTreeSet<Tuple>)> {
        self.relations.iter().map(|(n, s)| (n.as_str(), s))
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.values().map(|s| s.len()).sum()
    }

    /// The set of values occurring in some tuple of some relation. `Null` is
    /// included only when it appears in a tuple.
    pub fn active_domain(&self) -> BTreeSet<Value> {
        let mut dom = BTreeSet::new();
        for set in self.relations.values() {
            for t in set {
                for v in t.values() {
                    dom.insert(v.clone());
                }
            }
        }
        dom
    }

    /// Rewrite every value through a permutation. Fails if some active-domain
    /// value lies outside the permutation's carrier.
    pub fn permute(&self, rho: &Permutation) -> Result<Instance> {
        let mut relations = BTreeMap::new();
        for (symbol, set) in &self.relations {
            let mut mapped = BTreeSet::new();
            for t in set {
                let values = t
                    .values()
                    .iter()
                    .map(|v| rho.apply(v))
                    .collect::<Result<Vec<_>>>()?;
                mapped.insert(Tuple(values));
            }
            relations.insert(symbol.clone(), mapped);
        }
        Ok(Instance {
            schema: self.schema.clone(),
            relations,
        })
    }

    /// Sum over symbols of the symmetric-difference cardinalities.
    pub fn symmetric_distance(&self, other: &Instance) -> Result<usize> {
        if self.schema != other.schema {
            return Err(Error::SchemaMismatch);
        }
        let mut total = 0;
        for (symbol, mine) in &self.relations {
            let theirs = &other.relations[symbol];
            total += relation_distance(mine, theirs);
        }
        Ok(total)
    }

    /// True when every relation of `self` is included in the corresponding
    /// relation of `other`.
    pub fn included_in(&self, other: &Instance) -> bool {
        self.schema == other.schema
            && self
                .relations
                .iter()
                .all(|(symbol, set)| set.is_subset(&other.relations[symbol]))
    }
}

/// Symmetric-difference cardinality of two tuple sets.
pub fn relation_distance(a: &BTreeSet<Tuple>, b: &BTreeSet<Tuple>) -> usize {
    a.symmetric_difference(b).count()
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (symbol, set) in &self.relations {
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            write!(f, "{symbol}={{")?;
            for (i, t) in set.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{t}")?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

/// An ordered list of `n >= 1` instances over one schema. Agents are indexed
/// `1..=n` throughout.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Profile {
    instances: Vec<Instance>,
}

impl Profile {
    pub fn new(instances: Vec<Instance>) -> Result<Self> {
        let first = instances.first().ok_or(Error::EmptyProfile)?;
        let schema = first.schema().clone();
        if instances.iter().any(|d| *d.schema() != schema) {
            return Err(Error::SchemaMismatch);
        }
        Ok(Profile { instances })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn schema(&self) -> &Arc<Schema> {
        self.instances[0].schema()
    }

    /// The instance of agent `i` (1-based).
    pub fn agent(&self, i: usize) -> Result<&Instance> {
        if i == 0 || i > self.len() {
            return Err(Error::AgentOutOfRange(i, self.len()));
        }
        Ok(&self.instances[i - 1])
    }

    pub fn members(&self) -> &[Instance] {
        &self.instances
    }

    /// `{ i | t ∈ D_i(symbol) }`.
    pub fn support(&self, symbol: &str, t: &Tuple) -> Result<SupportSet> {
        let arity = self.schema().arity(symbol)?;
        if t.arity() != arity {
            return Err(Error::ArityMismatch {
                symbol: symbol.to_string(),
                expected: arity,
                got: t.arity(),
            });
        }
        let agents = self
            .instances
            .iter()
            .enumerate()
            .filter(|(_, d)| d.relation(symbol).expect("validated").contains(t))
            .map(|(idx, _)| idx + 1)
            .collect();
        Ok(SupportSet { agents })
    }

    /// Per-symbol union of all members.
    pub fn union_instance(&self) -> Instance {
        let mut out = Instance::empty(self.schema().clone());
        for (symbol, _) in self.schema().clone().symbols() {
            let mut set = BTreeSet::new();
            for d in &self.instances {
                set.extend(d.relation(symbol).expect("validated").iter().cloned());
            }
            out = out.with_relation(symbol, set);
        }
        out
    }

    /// Per-symbol intersection of all members.
    pub fn intersection_instance(&self) -> Instance {
        self.coalition_intersection(1..=self.len())
            .expect("full coalition is valid")
    }

    /// Per-symbol intersection over a coalition of agents (1-based indices).
    pub fn coalition_intersection(
        &self,
        coalition: impl IntoIterator<Item = usize>,
    ) -> Result<Instance> {
        let mut agents = Vec::new();
        for i in coalition {
            agents.push(self.agent(i)?);
        }
        if agents.is_empty() {
            return Err(Error::EmptyProfile);
        }
        let mut out = Instance::empty(self.schema().clone());
        for (symbol, _) in self.schema().clone().symbols() {
            let mut set: BTreeSet<Tuple> =
                agents[0].relation(symbol).expect("validated").clone();
            for d in &agents[1..] {
                let keep = d.relation(symbol).expect("validated");
                set.retain(|t| keep.contains(t));
            }
            out = out.with_relation(symbol, set);
        }
        Ok(out)
    }

    /// Reorder agents: entry `k` of `order` names the agent (1-based) that
    /// moves into position `k+1`.
    pub fn permute_agents(&self, order: &[usize]) -> Result<Profile> {
        if order.len() != self.len() {
            return Err(Error::AgentOutOfRange(order.len(), self.len()));
        }
        let mut seen = vec![false; self.len()];
        let mut instances = Vec::with_capacity(self.len());
        for &i in order {
            if i == 0 || i > self.len() || seen[i - 1] {
                return Err(Error::AgentOutOfRange(i, self.len()));
            }
            seen[i - 1] = true;
            instances.push(self.instances[i - 1].clone());
        }
        Ok(Profile { instances })
    }

    /// Apply a value permutation to every member.
    pub fn permute_values(&self, rho: &Permutation) -> Result<Profile> {
        let instances = self
            .instances
            .iter()
            .map(|d| d.permute(rho))
            .collect::<Result<Vec<_>>>()?;
        Ok(Profile { instances })
    }

    pub fn active_domain(&self) -> BTreeSet<Value> {
        let mut dom = BTreeSet::new();
        for d in &self.instances {
            dom.extend(d.active_domain());
        }
        dom
    }
}

/// The set of agents accepting a given tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SupportSet {
    agents: BTreeSet<usize>,
}

impl SupportSet {
    pub fn from_agents(agents: impl IntoIterator<Item = usize>) -> Self {
        SupportSet {
            agents: agents.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn contains(&self, agent: usize) -> bool {
        self.agents.contains(&agent)
    }

    pub fn agents(&self) -> impl Iterator<Item = usize> + '_ {
        self.agents.iter().copied()
    }

    /// Complement within `{1..=n}`.
    pub fn complement(&self, n: usize) -> SupportSet {
        SupportSet {
            agents: (1..=n).filter(|i| !self.agents.contains(i)).collect(),
        }
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.agents.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

/// A bijection on a finite carrier of values. `Null`, if present, must map to
/// itself; applying the permutation to a value outside the carrier (other
/// than `Null`) is an error, so callers must build carriers that cover the
/// active domains they rewrite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: BTreeMap<Value, Value>,
}

impl Permutation {
    pub fn new(map: BTreeMap<Value, Value>) -> Result<Self> {
        let domain: BTreeSet<&Value> = map.keys().collect();
        let image: BTreeSet<&Value> = map.values().collect();
        if image.len() != map.len() || domain != image {
            return Err(Error::NotAPermutation);
        }
        if let Some(img) = map.get(&Value::Null) {
            if !img.is_null() {
                return Err(Error::NotAPermutation);
            }
        }
        Ok(Permutation { map })
    }

    pub fn identity(carrier: impl IntoIterator<Item = Value>) -> Self {
        Permutation {
            map: carrier.into_iter().map(|v| (v.clone(), v)).collect(),
        }
    }

    /// Transpose `a` and `b`, fixing every other carrier value.
    pub fn transposition(
        a: Value,
        b: Value,
        carrier: impl IntoIterator<Item = Value>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Value, Value> =
            carrier.into_iter().map(|v| (v.clone(), v)).collect();
        map.insert(a.clone(), b.clone());
        map.insert(b, a);
        Permutation::new(map)
    }

    pub fn apply(&self, v: &Value) -> Result<Value> {
        if let Some(img) = self.map.get(v) {
            return Ok(img.clone());
        }
        if v.is_null() {
            return Ok(Value::Null);
        }
        Err(Error::PermutationNotTotal(v.to_string()))
    }

    pub fn carrier(&self) -> impl Iterator<Item = &Value> {
        self.map.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Value, &Value)> {
        self.map.iter().map(|(k, v)| (k, v))
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(k, v)| k == v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema_p2() -> Arc<Schema> {
        Schema::new([("P", 2)]).unwrap()
    }

    #[test]
    fn null_orders_last() {
        assert!(Value::c("z") < Value::Null);
        assert!(Value::c("a") < Value::c("b"));
        let mut tuples = BTreeSet::new();
        tuples.insert(Tuple(vec![Value::c("a"), Value::Null]));
        tuples.insert(Tuple::of(&["a", "b"]));
        let first = tuples.iter().next().unwrap();
        assert_eq!(first, &Tuple::of(&["a", "b"]));
    }

    #[test]
    fn construction_is_canonical() {
        let s = schema_p2();
        let d = Instance::new(
            s.clone(),
            [(
                "P",
                vec![
                    Tuple::of(&["b", "a"]),
                    Tuple::of(&["a", "b"]),
                    Tuple::of(&["a", "b"]),
                ],
            )],
        )
        .unwrap();
        let rows: Vec<_> = d.relation("P").unwrap().iter().cloned().collect();
        assert_eq!(rows, vec![Tuple::of(&["a", "b"]), Tuple::of(&["b", "a"])]);

        let d2 = Instance::new(
            s,
            [("P", vec![Tuple::of(&["a", "b"]), Tuple::of(&["b", "a"])])],
        )
        .unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn arity_is_checked() {
        let s = schema_p2();
        let err = Instance::new(s, [("P", vec![Tuple::of(&["a"])])]).unwrap_err();
        assert!(matches!(err, Error::ArityMismatch { .. }));
    }

    #[test]
    fn active_domain_reads_tuples() {
        let s = schema_p2();
        let d = Instance::new(s.clone(), [("P", vec![Tuple::of(&["a", "b"])])]).unwrap();
        let dom: Vec<_> = d.active_domain().into_iter().collect();
        assert_eq!(dom, vec![Value::c("a"), Value::c("b")]);
        assert!(Instance::empty(s).active_domain().is_empty());
    }

    #[test]
    fn support_counts_agents() {
        let s = schema_p2();
        let t = Tuple::of(&["a", "b"]);
        let d1 = Instance::new(s.clone(), [("P", vec![t.clone()])]).unwrap();
        let d2 = Instance::empty(s.clone());
        let p = Profile::new(vec![d1.clone(), d2, d1]).unwrap();
        let sup = p.support("P", &t).unwrap();
        assert_eq!(sup, SupportSet::from_agents([1, 3]));
        assert!(p.support("P", &Tuple::of(&["x", "y"])).unwrap().is_empty());
        assert!(p.support("Q", &t).is_err());
        assert!(p.support("P", &Tuple::of(&["a"])).is_err());
    }

    #[test]
    fn permutation_rewrites_values() {
        let s = schema_p2();
        let d = Instance::new(s, [("P", vec![Tuple::of(&["a", "b"])])]).unwrap();
        let rho = Permutation::transposition(
            Value::c("a"),
            Value::c("b"),
            [Value::c("a"), Value::c("b")],
        )
        .unwrap();
        let permuted = d.permute(&rho).unwrap();
        assert_eq!(
            permuted.relation("P").unwrap().iter().next().unwrap(),
            &Tuple::of(&["b", "a"])
        );
        // involution
        assert_eq!(permuted.permute(&rho).unwrap(), d);
        // identity
        let id = Permutation::identity([Value::c("a"), Value::c("b")]);
        assert_eq!(d.permute(&id).unwrap(), d);
        // not total on the active domain
        let small = Permutation::identity([Value::c("a")]);
        assert!(d.permute(&small).is_err());
    }

    #[test]
    fn permutation_must_be_bijective() {
        let mut map = BTreeMap::new();
        map.insert(Value::c("a"), Value::c("b"));
        assert!(Permutation::new(map).is_err());
        let mut map = BTreeMap::new();
        map.insert(Value::Null, Value::c("a"));
        map.insert(Value::c("a"), Value::Null);
        assert!(Permutation::new(map).is_err());
    }

    #[test]
    fn symmetric_distance_counts_differences() {
        let s = schema_p2();
        let d1 = Instance::new(s.clone(), [("P", vec![Tuple::of(&["a", "b"])])]).unwrap();
        let d2 = Instance::new(s.clone(), [("P", vec![Tuple::of(&["a", "d"])])]).unwrap();
        assert_eq!(d1.symmetric_distance(&d1).unwrap(), 0);
        assert_eq!(d1.symmetric_distance(&d2).unwrap(), 2);
        let other = Instance::empty(Schema::new([("Q", 1)]).unwrap());
        assert!(d1.symmetric_distance(&other).is_err());
    }

    #[test]
    fn agent_permutation_validates() {
        let s = schema_p2();
        let d1 = Instance::new(s.clone(), [("P", vec![Tuple::of(&["a", "b"])])]).unwrap();
        let d2 = Instance::empty(s);
        let p = Profile::new(vec![d1.clone(), d2.clone()]).unwrap();
        let swapped = p.permute_agents(&[2, 1]).unwrap();
        assert_eq!(swapped.agent(1).unwrap(), &d2);
        assert_eq!(swapped.agent(2).unwrap(), &d1);
        assert!(p.permute_agents(&[1, 1]).is_err());
        assert!(p.permute_agents(&[1]).is_err());
    }
}
