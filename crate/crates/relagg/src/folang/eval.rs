//! Active-domain evaluation: universally quantified variables range over the
//! values occurring in the instance's tuples, and nothing else.

use std::collections::BTreeMap;

use super::{Assignment, AnswerSet, Formula, Query, Term};
use crate::model::{Instance, Tuple, Value};
use crate::{Error, Result};

/// Does `d` satisfy `phi` under `sigma`? `sigma` must cover the free
/// variables of `phi`.
pub fn satisfies(d: &Instance, sigma: &Assignment, phi: &Formula) -> Result<bool> {
    let adom: Vec<Value> = d.active_domain().into_iter().collect();
    let mut env = sigma.0.clone();
    eval(d, &adom, &mut env, phi)
}

fn term_value(env: &BTreeMap<String, Value>, t: &Term) -> Result<Value> {
    match t {
        Term::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| Error::UnboundVariable(v.clone())),
        Term::Const(v) => Ok(v.clone()),
    }
}

fn eval(
    d: &Instance,
    adom: &[Value],
    env: &mut BTreeMap<String, Value>,
    phi: &Formula,
) -> Result<bool> {
    match phi {
        Formula::Eq(a, b) => Ok(term_value(env, a)? == term_value(env, b)?),
        Formula::Atom(symbol, terms) => {
            let relation = d.relation(symbol)?;
            let arity = d.schema().arity(symbol)?;
            if terms.len() != arity {
                return Err(Error::ArityMismatch {
                    symbol: symbol.clone(),
                    expected: arity,
                    got: terms.len(),
                });
            }
            let values = terms
                .iter()
                .map(|t| term_value(env, t))
                .collect::<Result<Vec<_>>>()?;
            Ok(relation.contains(&Tuple(values)))
        }
        Formula::Not(f) => Ok(!eval(d, adom, env, f)?),
        Formula::Implies(a, b) => {
            if !eval(d, adom, env, a)? {
                Ok(true)
            } else {
                eval(d, adom, env, b)
            }
        }
        Formula::Forall(x, body) => {
            for u in adom {
                let saved = env.insert(x.clone(), u.clone());
                let ok = eval(d, adom, env, body)?;
                match saved {
                    Some(old) => {
                        env.insert(x.clone(), old);
                    }
                    None => {
                        env.remove(x);
                    }
                }
                if !ok {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Evaluate a query: all head-variable bindings into `adom(d)` whose induced
/// assignment satisfies the body, in head order.
pub fn answer(d: &Instance, q: &Query) -> Result<AnswerSet> {
    let adom: Vec<Value> = d.active_domain().into_iter().collect();
    let width = q.width();
    let mut out = AnswerSet::empty(width);

    if width == 0 {
        let mut env = BTreeMap::new();
        if eval(d, &adom, &mut env, q.body())? {
            out = AnswerSet::new(0, [Tuple(Vec::new())])?;
        }
        return Ok(out);
    }
    if adom.is_empty() {
        return Ok(out);
    }

    let mut idx = vec![0usize; width];
    let mut env: BTreeMap<String, Value> = BTreeMap::new();
    let mut tuples = Vec::new();
    loop {
        for (k, var) in q.head().iter().enumerate() {
            env.insert(var.clone(), adom[idx[k]].clone());
        }
        if eval(d, &adom, &mut env, q.body())? {
            tuples.push(Tuple(idx.iter().map(|&i| adom[i].clone()).collect()));
        }
        // odometer
        let mut k = width;
        loop {
            if k == 0 {
                return AnswerSet::new(width, tuples);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < adom.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Truth in an instance. Sentences evaluate under the empty assignment; open
/// formulas must hold under every assignment of free variables into the
/// active domain plus one fresh witness value outside it (atoms and
/// equalities cannot tell distinct non-active values apart, so one witness
/// suffices).
pub fn is_true(d: &Instance, phi: &Formula) -> Result<bool> {
    let free: Vec<String> = phi.free_vars().into_iter().collect();
    if free.is_empty() {
        return satisfies(d, &Assignment::empty(), phi);
    }
    let mut range: Vec<Value> = d.active_domain().into_iter().collect();
    range.push(fresh_value(&range));
    let adom: Vec<Value> = d.active_domain().into_iter().collect();

    let mut idx = vec![0usize; free.len()];
    let mut env: BTreeMap<String, Value> = BTreeMap::new();
    loop {
        for (k, var) in free.iter().enumerate() {
            env.insert(var.clone(), range[idx[k]].clone());
        }
        if !eval(d, &adom, &mut env, phi)? {
            return Ok(false);
        }
        let mut k = free.len();
        loop {
            if k == 0 {
                return Ok(true);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < range.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn fresh_value(taken: &[Value]) -> Value {
    let mut token = "_w".to_string();
    while taken.iter().any(|v| matches!(v, Value::Const(t) if *t == token)) {
        token.push('_');
    }
    Value::c(token)
}
