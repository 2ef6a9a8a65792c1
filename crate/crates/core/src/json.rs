//! JSON encoding of games, canonical forms, rewrite steps and derivation traces.
//!
//! Rationals are strings `"p/q"` (or `"p"` for integers). A game reads
//!
//! ```json
//! {
//!   "state": [{"index": "0", "weight": "1/2", "phase": "0"}, {"index": "1", "weight": "1/2"}],
//!   "observable": {"0": "0", "1": "1"},
//!   "payoff": {"0": {"label": "lose", "value": "0"}, "1": {"label": "win", "value": "1"}}
//! }
//! ```
//!
//! `phase` defaults to zero and `value` may be omitted for unvalued consequences.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::derivation::{AxiomUse, DerivationTrace, LinearClaim, Relation, Step};
use crate::equivalence::RewriteStep;
use crate::exact::{Amplitude, BasisIndex, State};
use crate::game::{CanonicalGame, Consequence, Game, Observable, Payoff};
use crate::probability::Measurement;
use crate::scalar::{parse_scalar, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JsonError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema violation at `{field}`: {reason}")]
    Schema { field: String, reason: String },
}

fn schema<T>(field: impl Into<String>, reason: impl Into<String>) -> Result<T, JsonError> {
    Err(JsonError::Schema { field: field.into(), reason: reason.into() })
}

pub fn parse_value(text: &str) -> Result<Value, JsonError> {
    serde_json::from_str(text).map_err(|e| JsonError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn object<'a>(v: &'a Value, field: &str) -> Result<&'a Map<String, Value>, JsonError> {
    v.as_object().map_or_else(|| schema(field, "expected an object"), Ok)
}

fn string<'a>(v: &'a Value, field: &str) -> Result<&'a str, JsonError> {
    v.as_str().map_or_else(|| schema(field, "expected a string"), Ok)
}

fn scalar<S: Scalar>(v: &Value, field: &str) -> Result<S, JsonError> {
    let s = string(v, field)?;
    parse_scalar(s).map_or_else(|| schema(field, format!("`{s}` is not a rational \"p/q\"")), Ok)
}

fn no_unknown_keys(obj: &Map<String, Value>, field: &str, allowed: &[&str]) -> Result<(), JsonError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => schema(format!("{field}{k}"), "unknown field"),
        None => Ok(()),
    }
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str, field: &str) -> Result<&'a Value, JsonError> {
    obj.get(key).map_or_else(|| schema(format!("{field}{key}"), "missing field"), Ok)
}

fn parse_state<S: Scalar>(v: &Value) -> Result<State<S>, JsonError> {
    let entries = v.as_array().map_or_else(|| schema("state", "expected a list"), Ok)?;
    if entries.is_empty() {
        return schema("state", "empty state");
    }
    let mut state = State::new();
    let mut seen = BTreeSet::new();
    for (k, e) in entries.iter().enumerate() {
        let field = format!("state[{k}]");
        let obj = object(e, &field)?;
        let prefix = format!("{field}.");
        no_unknown_keys(obj, &prefix, &["index", "weight", "phase"])?;
        let index = string(required(obj, "index", &prefix)?, &format!("{field}.index"))?;
        if !seen.insert(index.to_string()) {
            return schema(format!("{field}.index"), format!("duplicate index `{index}`"));
        }
        let weight: S = scalar(required(obj, "weight", &prefix)?, &format!("{field}.weight"))?;
        if weight.is_negative() {
            return schema(format!("{field}.weight"), "weight must be non-negative");
        }
        let phase: S = match obj.get("phase") {
            Some(p) => scalar(p, &format!("{field}.phase"))?,
            None => S::zero(),
        };
        let amp = Amplitude::new(weight, phase).expect("weight checked non-negative");
        state.insert(BasisIndex::new(index), amp);
    }
    let total = state.total_weight();
    if !total.is_one() {
        return schema("state", format!("weights sum to {total}, not 1"));
    }
    Ok(state)
}

fn parse_observable<S: Scalar>(v: &Value, state: &State<S>) -> Result<Observable<S>, JsonError> {
    let obj = object(v, "observable")?;
    let mut observable = Observable::new();
    for (k, x) in obj {
        observable.insert(BasisIndex::new(k.as_str()), scalar(x, &format!("observable.{k}"))?);
    }
    if let Some(i) = state.support().find(|i| observable.get(i).is_none()) {
        return schema(format!("observable.{i}"), "occurring index has no eigenvalue");
    }
    Ok(observable)
}

fn parse_payoff<S: Scalar>(v: &Value, occurring: &BTreeSet<S>) -> Result<Payoff<S>, JsonError> {
    let obj = object(v, "payoff")?;
    let mut payoff = Payoff::new();
    for (k, c) in obj {
        let field = format!("payoff.{k}");
        let x: S = parse_scalar(k).map_or_else(|| schema(&field, format!("`{k}` is not a rational eigenvalue")), Ok)?;
        let co = object(c, &field)?;
        let prefix = format!("{field}.");
        no_unknown_keys(co, &prefix, &["label", "value"])?;
        let label = string(required(co, "label", &prefix)?, &format!("{field}.label"))?;
        let value = match co.get("value") {
            Some(Value::Null) | None => None,
            Some(val) => Some(scalar(val, &format!("{field}.value"))?),
        };
        if payoff.insert(x.clone(), Consequence::new(label, value)).is_some() {
            return schema(field, format!("eigenvalue {x} appears twice"));
        }
    }
    if let Some(x) = occurring.iter().find(|x| !payoff.contains_key(*x)) {
        return schema(format!("payoff.{x}"), "occurring eigenvalue has no consequence");
    }
    Ok(payoff)
}

fn parse_parts<S: Scalar>(v: &Value, need_payoff: bool) -> Result<Game<S>, JsonError> {
    let obj = object(v, "$")?;
    no_unknown_keys(obj, "", &["state", "observable", "payoff"])?;
    let state = parse_state(required(obj, "state", "")?)?;
    let observable = parse_observable(required(obj, "observable", "")?, &state)?;
    let occurring: BTreeSet<S> = state.support().filter_map(|i| observable.get(i).cloned()).collect();
    let payoff = match obj.get("payoff") {
        Some(p) => parse_payoff(p, &occurring)?,
        None if need_payoff => return schema("payoff", "missing field"),
        None => Payoff::new(),
    };
    Ok(Game::new(state, observable, payoff))
}

pub fn game_from_value<S: Scalar>(v: &Value) -> Result<Game<S>, JsonError> {
    parse_parts(v, true)
}

pub fn parse_game<S: Scalar>(text: &str) -> Result<Game<S>, JsonError> {
    game_from_value(&parse_value(text)?)
}

/// A game file whose payoff, if present, is ignored.
pub fn parse_measurement<S: Scalar>(text: &str) -> Result<Measurement<S>, JsonError> {
    let g = parse_parts::<S>(&parse_value(text)?, false)?;
    Measurement::new(g.state, g.observable).map_or_else(|e| schema("$", e.to_string()), Ok)
}

fn s<S: Scalar>(v: &S) -> Value {
    Value::String(v.to_string())
}

fn consequence_json<S: Scalar>(c: &Consequence<S>) -> Value {
    let mut m = Map::new();
    m.insert("label".into(), Value::String(c.label.clone()));
    if let Some(v) = &c.value {
        m.insert("value".into(), s(v));
    }
    Value::Object(m)
}

pub fn game_to_json<S: Scalar>(g: &Game<S>) -> Value {
    let state: Vec<Value> = g
        .state
        .iter()
        .map(|(i, a)| json!({"index": i.as_str(), "weight": s(a.weight()), "phase": s(a.phase())}))
        .collect();
    let observable: Map<String, Value> = g.observable.iter().map(|(i, x)| (i.to_string(), s(x))).collect();
    let payoff: Map<String, Value> = g.payoff.iter().map(|(x, c)| (x.to_string(), consequence_json(c))).collect();
    json!({"state": state, "observable": observable, "payoff": payoff})
}

pub fn canonical_to_json<S: Scalar>(c: &CanonicalGame<S>) -> Value {
    let branches: Vec<Value> = c
        .branches()
        .iter()
        .map(|(con, w)| {
            let mut m = consequence_json(con);
            m.as_object_mut().expect("object").insert("weight".into(), s(w));
            m
        })
        .collect();
    json!({ "branches": branches })
}

fn canonical_or_error<S: Scalar>(g: &Game<S>) -> Value {
    match g.canonicalize() {
        Ok(c) => canonical_to_json(&c),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn rewrite_step_to_json<S: Scalar>(step: &RewriteStep<S>) -> Value {
    json!({
        "rule": step.rule().name(),
        "params": step.params.summary(),
        "before": canonical_or_error(&step.before),
        "after": canonical_or_error(&step.after),
    })
}

pub fn claim_to_json<S: Scalar>(c: &LinearClaim<S>) -> Value {
    let terms: Vec<Value> = c.terms.iter().map(|(k, g)| json!({"coeff": s(k), "game": g})).collect();
    let relation = match c.relation {
        Relation::Eq => "=",
        Relation::Ge => ">=",
    };
    json!({"terms": terms, "relation": relation, "rhs": s(&c.rhs), "text": c.to_string()})
}

fn axiom_to_json<S: Scalar>(a: &AxiomUse<S>) -> Value {
    let mut m = json!({"axiom": a.axiom().name(), "games": a.games()});
    let extra = m.as_object_mut().expect("object");
    match a {
        AxiomUse::AdditivityLemma { k, .. } => {
            extra.insert("shift".into(), s(k));
        }
        AxiomUse::Substitutivity { nested, .. } => {
            let map: Map<String, Value> = nested.iter().map(|(x, g)| (x.to_string(), json!(g))).collect();
            extra.insert("nested".into(), Value::Object(map));
        }
        _ => {}
    }
    m
}

pub fn trace_to_json<S: Scalar>(trace: &DerivationTrace<S>) -> Value {
    let games: Vec<Value> = trace.games.iter().map(game_to_json).collect();
    let entries: Vec<Value> = trace
        .entries
        .iter()
        .map(|e| {
            let mut v = match &e.step {
                Step::Rewrite { from, to, step } => {
                    let mut r = rewrite_step_to_json(step);
                    let m = r.as_object_mut().expect("object");
                    m.insert("kind".into(), json!("rewrite"));
                    m.insert("from".into(), json!(from));
                    m.insert("to".into(), json!(to));
                    r
                }
                Step::Axiom(a) => {
                    let mut r = axiom_to_json(a);
                    r.as_object_mut().expect("object").insert("kind".into(), json!("axiom"));
                    r
                }
            };
            let m = v.as_object_mut().expect("object");
            m.insert("claim".into(), claim_to_json(&e.claim));
            m.insert("justification".into(), json!(e.justification));
            v
        })
        .collect();
    let conclusion: Vec<Value> = trace.conclusion.iter().map(claim_to_json).collect();
    json!({"games": games, "entries": entries, "subject": trace.subject, "conclusion": conclusion})
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut out = serde_json::to_string_pretty(v).expect("values always serialize");
    out.push('\n');
    out
}

/// Map of rationals to rendered strings, for reports.
pub fn scalar_map<S: Scalar>(m: &BTreeMap<S, S>) -> Value {
    Value::Object(m.iter().map(|(k, v)| (k.to_string(), s(v))).collect())
}
