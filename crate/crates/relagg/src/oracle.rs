//! Exhaustive and seeded-sampled generation of instances, profiles, and
//! formulas: the brute-force ground truth behind every space-relative check.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::constraints::Constraint;
use crate::folang::{Formula, Query, Term};
use crate::model::{Instance, Profile, Schema, Tuple, Value};
use crate::{Error, Result};

/// Enumeration mode. Sampling is reproducible: the generator is ChaCha8
/// keyed directly by the seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sampled { seed: u64, count: usize },
}

/// A bounded universe of instances and profiles.
#[derive(Debug, Clone)]
pub struct SpaceSpec {
    pub schema: Arc<Schema>,
    pub domain: Vec<Value>,
    pub max_tuples: usize,
    pub agents: usize,
    /// Every member of every profile must satisfy these.
    pub constraints: Vec<Constraint>,
    pub mode: Mode,
    /// Exhaustive enumeration refuses to build more than this many
    /// instances (and more than this many profiles).
    pub cap: u64,
}

impl SpaceSpec {
    pub fn new(schema: Arc<Schema>, domain: Vec<Value>, max_tuples: usize, agents: usize) -> Self {
        SpaceSpec {
            schema,
            domain,
            max_tuples,
            agents,
            constraints: Vec::new(),
            mode: Mode::Exhaustive,
            cap: 5_000_000,
        }
    }

    pub fn with_constraints(mut self, constraints: Vec<Constraint>) -> Self {
        self.constraints = constraints;
        self
    }

    pub fn sampled(mut self, seed: u64, count: usize) -> Self {
        self.mode = Mode::Sampled { seed, count };
        self
    }

    fn validate(&self) -> Result<()> {
        if self.agents == 0 {
            return Err(Error::BadSpace("agents must be at least 1".into()));
        }
        if self.domain.is_empty() {
            return Err(Error::BadSpace("domain must be non-empty".into()));
        }
        let distinct: BTreeSet<&Value> = self.domain.iter().collect();
        if distinct.len() != self.domain.len() {
            return Err(Error::BadSpace("domain tokens must be distinct".into()));
        }
        for c in &self.constraints {
            c.validate(&self.schema)?;
        }
        Ok(())
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of relations with at most `max_tuples` tuples over a pool of
/// `pool` tuples.
fn relation_count(pool: u128, max_tuples: u128) -> u128 {
    (0..=max_tuples).map(|k| binomial(pool, k)).sum()
}

/// All tuples over `domain` with the given arity, in canonical order.
fn tuple_pool(domain: &[Value], arity: usize) -> Vec<Tuple> {
    let mut sorted: Vec<Value> = domain.to_vec();
    sorted.sort();
    let mut out = Vec::new();
    let mut idx = vec![0usize; arity];
    loop {
        out.push(Tuple(idx.iter().map(|&i| sorted[i].clone()).collect()));
        let mut k = arity;
        loop {
            if k == 0 {
                out.sort();
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < sorted.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// All subsets of `pool` with at most `max` elements, in canonical set order.
fn subsets_up_to(pool: &[Tuple], max: usize) -> Vec<BTreeSet<Tuple>> {
    let mut out: Vec<BTreeSet<Tuple>> = vec![BTreeSet::new()];
    let mut frontier: Vec<(usize, BTreeSet<Tuple>)> = vec![(0, BTreeSet::new())];
    for _ in 0..max {
        let mut next = Vec::new();
        for (start, set) in &frontier {
            for i in *start..pool.len() {
                let mut bigger = set.clone();
                bigger.insert(pool[i].clone());
                out.push(bigger.clone());
                next.push((i + 1, bigger));
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    out.sort();
    out
}

/// Enumerate every instance of the space exactly once, in canonical order
/// (exhaustive mode), or a reproducible sample (sampled mode). Instances
/// violating a space constraint are excluded.
pub fn enum_instances(spec: &SpaceSpec) -> Result<Vec<Instance>> {
    spec.validate()?;
    match &spec.mode {
        Mode::Exhaustive => {
            let mut expected: u128 = 1;
            for (_, arity) in spec.schema.symbols() {
                let pool = (spec.domain.len() as u128).pow(arity as u32);
                expected = expected.saturating_mul(relation_count(pool, spec.max_tuples as u128));
            }
            if expected > spec.cap as u128 {
                return Err(Error::CapExceeded {
                    what: "exhaustive instance space".into(),
                    size: expected,
                    cap: spec.cap,
                });
            }
            let symbols: Vec<String> = spec.schema.symbols().map(|(s, _)| s.to_string()).collect();
            let options: Vec<Vec<BTreeSet<Tuple>>> = spec
                .schema
                .symbols()
                .map(|(_, arity)| subsets_up_to(&tuple_pool(&spec.domain, arity), spec.max_tuples))
                .collect();
            let mut out = Vec::new();
            let mut idx = vec![0usize; symbols.len()];
            'outer: loop {
                let mut inst = Instance::empty(spec.schema.clone());
                for (k, symbol) in symbols.iter().enumerate() {
                    inst = inst.with_relation(symbol, options[k][idx[k]].clone());
                }
                if satisfies_all(&inst, &spec.constraints)? {
                    out.push(inst);
                }
                let mut k = symbols.len();
                loop {
                    if k == 0 {
                        break 'outer;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < options[k].len() {
                        break;
                    }
                    idx[k] = 0;
                }
            }
            Ok(out)
        }
        Mode::Sampled { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            sample_instances(spec, &mut rng, *count)
        }
    }
}

fn satisfies_all(inst: &Instance, constraints: &[Constraint]) -> Result<bool> {
    for c in constraints {
        if !c.check(inst)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn sample_instances(
    spec: &SpaceSpec,
    rng: &mut ChaCha8Rng,
    count: usize,
) -> Result<Vec<Instance>> {
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let budget = count.saturating_mul(1_000).max(1_000);
    while out.len() < count {
        attempts += 1;
        if attempts > budget {
            return Err(Error::BadSpace(
                "sampling budget exhausted; constraints may be unsatisfiable".into(),
            ));
        }
        let inst = sample_one(spec, rng);
        if satisfies_all(&inst, &spec.constraints)? {
            out.push(inst);
        }
    }
    Ok(out)
}

fn sample_one(spec: &SpaceSpec, rng: &mut ChaCha8Rng) -> Instance {
    let mut inst = Instance::empty(spec.schema.clone());
    let symbols: Vec<(String, usize)> = spec
        .schema
        .symbols()
        .map(|(s, a)| (s.to_string(), a))
        .collect();
    for (symbol, arity) in symbols {
        let pool_len = (spec.domain.len() as u128).pow(arity as u32);
        let take = rng.gen_range(0..=spec.max_tuples);
        let mut set = BTreeSet::new();
        let mut guard = 0;
        while set.len() < take && (set.len() as u128) < pool_len && guard < 10_000 {
            guard += 1;
            let values: Vec<Value> = (0..arity)
                .map(|_| spec.domain[rng.gen_range(0..spec.domain.len())].clone())
                .collect();
            set.insert(Tuple(values));
        }
        inst = inst.with_relation(&symbol, set);
    }
    inst
}

/// A finite iterable of profiles: either the full `n`-fold product of an
/// instance list or an explicit collection.
#[derive(Debug, Clone)]
pub enum ProfileSpace {
    Product {
        members: Arc<Vec<Instance>>,
        agents: usize,
    },
    Explicit(Vec<Profile>),
}

impl ProfileSpace {
    pub fn explicit(profiles: Vec<Profile>) -> Self {
        ProfileSpace::Explicit(profiles)
    }

    pub fn len(&self) -> usize {
        match self {
            ProfileSpace::Product { members, agents } => members.len().pow(*agents as u32),
            ProfileSpace::Explicit(list) => list.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The profile at canonical position `idx` (agent 1 most significant).
    pub fn get(&self, idx: usize) -> Profile {
        match self {
            ProfileSpace::Product { members, agents } => {
                let mut digits = vec![0usize; *agents];
                let mut rest = idx;
                for k in (0..*agents).rev() {
                    digits[k] = rest % members.len();
                    rest /= members.len();
                }
                Profile::new(digits.iter().map(|&d| members[d].clone()).collect())
                    .expect("members share a schema")
            }
            ProfileSpace::Explicit(list) => list[idx].clone(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Profile> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }
}

/// Build the profile space: the `agents`-fold product of the instance space
/// in exhaustive mode, or `count` independently sampled profiles.
pub fn enum_profiles(spec: &SpaceSpec) -> Result<ProfileSpace> {
    spec.validate()?;
    match &spec.mode {
        Mode::Exhaustive => {
            let members = enum_instances(spec)?;
            let total = (members.len() as u128).pow(spec.agents as u32);
            if total > spec.cap as u128 {
                return Err(Error::CapExceeded {
                    what: "exhaustive profile space".into(),
                    size: total,
                    cap: spec.cap,
                });
            }
            Ok(ProfileSpace::Product {
                members: Arc::new(members),
                agents: spec.agents,
            })
        }
        Mode::Sampled { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut profiles = Vec::with_capacity(*count);
            for _ in 0..*count {
                let members = sample_instances(spec, &mut rng, spec.agents)?;
                profiles.push(Profile::new(members).expect("same schema"));
            }
            Ok(ProfileSpace::Explicit(profiles))
        }
    }
}

/// Query-language fragments for formula generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fragment {
    /// Equalities, atoms, `or`, `exists`.
    PosExistential,
    /// Equalities, atoms, `and`, `forall`.
    PosUniversal,
    /// Atom-conjunction blocks under `or` and `exists`.
    ConjunctiveQuery,
    /// The whole language.
    FullFo,
}

const VAR_POOL: &[&str] = &["x", "y", "z"];

/// Grammar-directed generation of formulas inside a fragment, deduplicated
/// by AST and deterministic in the seed. Depth 1 yields atoms and
/// equalities only. May return fewer than `count` formulas when the
/// fragment is too small at the requested depth.
pub fn enum_formulas(
    schema: &Schema,
    fragment: Fragment,
    max_depth: usize,
    seed: u64,
    count: usize,
) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols: Vec<(String, usize)> =
        schema.symbols().map(|(s, a)| (s.to_string(), a)).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let budget = count.saturating_mul(200).max(200);
    for _ in 0..budget {
        if out.len() >= count {
            break;
        }
        let depth = rng.gen_range(1..=max_depth.max(1));
        let f = gen_formula(&mut rng, &symbols, fragment, depth).normalize_binders();
        if seen.insert(f.clone()) {
            out.push(f);
        }
    }
    out
}

fn gen_var(rng: &mut ChaCha8Rng) -> Term {
    Term::var(VAR_POOL[rng.gen_range(0..VAR_POOL.len())])
}

fn gen_var_name(rng: &mut ChaCha8Rng) -> String {
    VAR_POOL[rng.gen_range(0..VAR_POOL.len())].to_string()
}

fn gen_atom(rng: &mut ChaCha8Rng, symbols: &[(String, usize)]) -> Formula {
    let (name, arity) = &symbols[rng.gen_range(0..symbols.len())];
    Formula::atom(name, (0..*arity).map(|_| gen_var(rng)).collect())
}

fn gen_eq(rng: &mut ChaCha8Rng) -> Formula {
    Formula::eq(gen_var(rng), gen_var(rng))
}

fn gen_formula(
    rng: &mut ChaCha8Rng,
    symbols: &[(String, usize)],
    fragment: Fragment,
    depth: usize,
) -> Formula {
    match fragment {
        Fragment::PosExistential => {
            if depth <= 1 {
                if rng.gen_bool(0.3) {
                    gen_eq(rng)
                } else {
                    gen_atom(rng, symbols)
                }
            } else {
                match rng.gen_range(0..10) {
                    0 | 1 => gen_atom(rng, symbols),
                    2 => gen_eq(rng),
                    3..=5 => Formula::or(
                        gen_formula(rng, symbols, fragment, depth - 1),
                        gen_formula(rng, symbols, fragment, depth - 1),
                    ),
                    _ => Formula::exists(
                        gen_var_name(rng),
                        gen_formula(rng, symbols, fragment, depth - 1),
                    ),
                }
            }
        }
        Fragment::PosUniversal => {
            if depth <= 1 {
                if rng.gen_bool(0.3) {
                    gen_eq(rng)
                } else {
                    gen_atom(rng, symbols)
                }
            } else {
                match rng.gen_range(0..10) {
                    0 | 1 => gen_atom(rng, symbols),
                    2 => gen_eq(rng),
                    3..=5 => Formula::and(
                        gen_formula(rng, symbols, fragment, depth - 1),
                        gen_formula(rng, symbols, fragment, depth - 1),
                    ),
                    _ => Formula::forall(
                        gen_var_name(rng),
                        gen_formula(rng, symbols, fragment, depth - 1),
                    ),
                }
            }
        }
        Fragment::ConjunctiveQuery => {
            if depth <= 1 {
                gen_block(rng, symbols)
            } else {
                match rng.gen_range(0..10) {
                    0..=2 => gen_block(rng, symbols),
                    3..=5 => Formula::or(
                        gen_formula(rng, symbols, fragment, depth - 1),
                        gen_formula(rng, symbols, fragment, depth - 1),
                    ),
                    _ => Formula::exists(
                        gen_var_name(rng),
                        gen_formula(rng, symbols, fragment, depth - 1),
                    ),
                }
            }
        }
        Fragment::FullFo => {
            if depth <= 1 {
                if rng.gen_bool(0.25) {
                    gen_eq(rng)
                } else {
                    gen_atom(rng, symbols)
                }
            } else {
                match rng.gen_range(0..12) {
                    0 => gen_atom(rng, symbols),
                    1 => gen_eq(rng),
                    2 | 3 => Formula::not(gen_formula(rng, symbols, fragment, depth - 1)),
                    4 | 5 => Formula::implies(
                        gen_formula(rng, symbols, fragment, depth - 1),
                        gen_formula(rng, symbols, fragment, depth - 1),
                    ),
                    6 => Formula::and(
                        gen_formula(rng, symbols, fragment, depth - 1),
                        gen_formula(rng, symbols, fragment, depth - 1),
                    ),
                    7 => Formula::or(
                        gen_formula(rng, symbols, fragment, depth - 1),
                        gen_formula(rng, symbols, fragment, depth - 1),
                    ),
                    _ => {
                        let name = gen_var_name(rng);
                        let body = gen_formula(rng, symbols, fragment, depth - 1);
                        if rng.gen_bool(0.5) {
                            Formula::forall(name, body)
                        } else {
                            Formula::exists(name, body)
                        }
                    }
                }
            }
        }
    }
}

/// A conjunction of one to three atoms.
fn gen_block(rng: &mut ChaCha8Rng, symbols: &[(String, usize)]) -> Formula {
    let m = rng.gen_range(1..=3);
    Formula::conj((0..m).map(|_| gen_atom(rng, symbols)).collect())
}

/// Turn generated formulas into queries with at most `max_width` head
/// variables (head order: variable name order). Closed formulas are skipped.
pub fn queries_from(formulas: &[Formula], max_width: usize) -> Vec<Query> {
    formulas
        .iter()
        .filter_map(|f| {
            let free: Vec<String> = f.free_vars().into_iter().collect();
            if free.is_empty() || free.len() > max_width {
                None
            } else {
                Query::new(free, f.clone()).ok()
            }
        })
        .collect()
}

/// Generated sentences: full-language formulas with any remaining free
/// variables universally closed. Constant-free by construction.
pub fn enum_sentences(schema: &Schema, max_depth: usize, seed: u64, count: usize) -> Vec<Formula> {
    let raw = enum_formulas(schema, Fragment::FullFo, max_depth, seed, count * 2);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for f in raw {
        let mut closed = f;
        for v in closed.free_vars() {
            closed = Formula::forall(v, closed);
        }
        debug_assert!(closed.free_vars().is_empty());
        if seen.insert(closed.clone()) {
            out.push(closed);
            if out.len() >= count {
                break;
            }
        }
    }
    out
}

/// Ground literals (atoms over constants, half of them negated) for
/// literal-language checks.
pub fn enum_ground_literals(
    schema: &Schema,
    domain: &[Value],
    seed: u64,
    count: usize,
) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols: Vec<(String, usize)> =
        schema.symbols().map(|(s, a)| (s.to_string(), a)).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let budget = count.saturating_mul(100).max(100);
    for _ in 0..budget {
        if out.len() >= count {
            break;
        }
        let (name, arity) = &symbols[rng.gen_range(0..symbols.len())];
        let atom = Formula::atom(
            name,
            (0..*arity)
                .map(|_| Term::Const(domain[rng.gen_range(0..domain.len())].clone()))
                .collect(),
        );
        let lit = if rng.gen_bool(0.5) {
            Formula::not(atom)
        } else {
            atom
        };
        if seen.insert(lit.clone()) {
            out.push(lit);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::FunctionalDependency;
    use crate::folang::classify;

    fn values(tokens: &[&str]) -> Vec<Value> {
        tokens.iter().map(|t| Value::c(*t)).collect()
    }

    #[test]
    fn unary_space_counts() {
        let schema = Schema::new([("P", 1)]).unwrap();
        let spec = SpaceSpec::new(schema, values(&["a", "b"]), 2, 2);
        let instances = enum_instances(&spec).unwrap();
        assert_eq!(instances.len(), 4); // {}, {a}, {b}, {a,b}
        let profiles = enum_profiles(&spec).unwrap();
        assert_eq!(profiles.len(), 16);
    }

    #[test]
    fn binary_singleton_space_counts() {
        let schema = Schema::new([("P", 2)]).unwrap();
        let spec = SpaceSpec::new(schema, values(&["a", "b"]), 1, 1);
        let instances = enum_instances(&spec).unwrap();
        assert_eq!(instances.len(), 5); // empty + 4 singletons
    }

    #[test]
    fn constraint_filter_applies_per_member() {
        let schema = Schema::new([("P", 2)]).unwrap();
        let fd = Constraint::Fd(FunctionalDependency::new("P", vec![1], vec![2]).unwrap());
        let spec = SpaceSpec::new(schema.clone(), values(&["a", "b"]), 1, 2)
            .with_constraints(vec![fd.clone()]);
        // One tuple can never violate a dependency.
        assert_eq!(enum_instances(&spec).unwrap().len(), 5);

        let spec2 =
            SpaceSpec::new(schema, values(&["a", "b"]), 2, 2).with_constraints(vec![fd]);
        let all = enum_instances(&spec2).unwrap();
        // 11 subsets of a 4-tuple pool with <=2 elements; {(a,a),(a,b)} and
        // {(b,a),(b,b)} violate the dependency.
        assert_eq!(all.len(), 9);
        let filtered = enum_profiles(&spec2).unwrap();
        assert_eq!(filtered.len(), 81);
    }

    #[test]
    fn enumeration_is_canonical_and_duplicate_free() {
        let schema = Schema::new([("P", 1), ("Q", 1)]).unwrap();
        let spec = SpaceSpec::new(schema, values(&["a", "b"]), 1, 1);
        let instances = enum_instances(&spec).unwrap();
        let as_set: BTreeSet<_> = instances.iter().cloned().collect();
        assert_eq!(as_set.len(), instances.len());
        let sorted: Vec<_> = as_set.into_iter().collect();
        assert_eq!(sorted, instances);
    }

    #[test]
    fn cap_is_enforced() {
        let schema = Schema::new([("P", 2)]).unwrap();
        let mut spec = SpaceSpec::new(schema, values(&["a", "b", "c"]), 9, 2);
        spec.cap = 100;
        assert!(matches!(
            enum_instances(&spec),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn sampling_is_reproducible() {
        let schema = Schema::new([("P", 2)]).unwrap();
        let spec = SpaceSpec::new(schema, values(&["a", "b", "c"]), 2, 3).sampled(7, 50);
        let a = enum_profiles(&spec).unwrap();
        let b = enum_profiles(&spec).unwrap();
        let list_a: Vec<Profile> = a.iter().collect();
        let list_b: Vec<Profile> = b.iter().collect();
        assert_eq!(list_a, list_b);
        assert_eq!(list_a.len(), 50);
    }

    #[test]
    fn generated_formulas_match_their_fragment() {
        let schema = Schema::new([("P", 2), ("R", 1)]).unwrap();
        let cases: Vec<(Fragment, Box<dyn Fn(&Formula) -> bool>)> = vec![
            (
                Fragment::PosExistential,
                Box::new(|f| classify(f).pos_existential),
            ),
            (
                Fragment::PosUniversal,
                Box::new(|f| classify(f).pos_universal),
            ),
            (
                Fragment::ConjunctiveQuery,
                Box::new(|f| classify(f).conjunctive_query),
            ),
        ];
        for (fragment, check) in cases {
            let formulas = enum_formulas(&schema, fragment, 3, 11, 100);
            assert!(formulas.len() >= 50, "generator starved for {fragment:?}");
            for f in &formulas {
                assert!(check(f), "{f} escaped {fragment:?}");
            }
        }
    }

    #[test]
    fn depth_one_yields_atoms_and_equalities() {
        let schema = Schema::new([("P", 2)]).unwrap();
        for f in enum_formulas(&schema, Fragment::PosExistential, 1, 3, 30) {
            assert!(matches!(f, Formula::Atom(..) | Formula::Eq(..)));
        }
    }

    #[test]
    fn identical_seeds_identical_streams() {
        let schema = Schema::new([("P", 2), ("R", 1)]).unwrap();
        let a = enum_formulas(&schema, Fragment::FullFo, 3, 42, 60);
        let b = enum_formulas(&schema, Fragment::FullFo, 3, 42, 60);
        assert_eq!(a, b);
        let sentences = enum_sentences(&schema, 3, 42, 40);
        for s in &sentences {
            assert!(s.free_vars().is_empty());
        }
    }

    #[test]
    fn ground_literals_are_ground() {
        let schema = Schema::new([("P", 2)]).unwrap();
        let lits = enum_ground_literals(&schema, &values(&["a", "b"]), 5, 20);
        assert!(!lits.is_empty());
        for l in &lits {
            let flags = classify(l);
            assert!(flags.lit_pos || flags.lit_neg);
        }
    }
}
