//! Qualitative probability over measurement events, a brute-force check that
//! the weight function is the only measure representing it, and a finite
//! checker for the von Neumann–Morgenstern axioms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::exact::State;
use crate::game::{Consequence, Game, GameError, Observable, Payoff};
use crate::scalar::{common_denominator, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProbabilityError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("event member {0} is not an occurring eigenvalue")]
    NotOccurring(String),
    #[error("{0} outcomes exceeds the limit of {1}")]
    TooLarge(usize, usize),
    #[error("event list is not the power set of one measurement's occurring spectrum")]
    NotPowerSet,
    #[error("bet must strictly prefer its winning consequence")]
    BetOrder,
    #[error("invalid candidate measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid gamble table: {0}")]
    InvalidTable(String),
}

/// Largest occurring spectrum [`check_measure`] will enumerate.
pub const CHECK_LIMIT: usize = 16;
/// Largest occurring spectrum [`uniqueness_search`] will enumerate.
pub const SEARCH_LIMIT: usize = 6;

/// A state with an observable measured on it; a game without payoff.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Measurement<S> {
    pub state: State<S>,
    pub observable: Observable<S>,
}

impl<S: Scalar> Measurement<S> {
    pub fn new(state: State<S>, observable: Observable<S>) -> Result<Self, ProbabilityError> {
        let m = Measurement { state, observable };
        m.as_game().validate()?;
        Ok(m)
    }

    pub fn of_game(g: &Game<S>) -> Result<Self, ProbabilityError> {
        Self::new(g.state.clone(), g.observable.clone())
    }

    /// Game paying each occurring eigenvalue its own value.
    fn as_game(&self) -> Game<S> {
        let payoff: Payoff<S> = self
            .state
            .support()
            .filter_map(|i| self.observable.get(i))
            .map(|x| (x.clone(), Consequence::numeric(x.clone())))
            .collect();
        Game::new(self.state.clone(), self.observable.clone(), payoff)
    }

    pub fn occurring_spectrum(&self) -> BTreeSet<S> {
        self.state.support().filter_map(|i| self.observable.get(i).cloned()).collect()
    }

    /// Weight of each occurring eigenvalue.
    pub fn weights(&self) -> BTreeMap<S, S> {
        let mut w = BTreeMap::new();
        for (i, a) in self.state.iter() {
            if let Some(x) = self.observable.get(i) {
                let e = w.entry(x.clone()).or_insert_with(S::zero);
                *e = e.clone() + a.weight().clone();
            }
        }
        w
    }

    /// Equal-weight measurement on eigenvalues `0..n`.
    pub fn uniform(n: usize) -> Self {
        let w = S::ratio(1, n as i64);
        let g = Game::from_weights((0..n).map(|i| (w.clone(), Consequence::numeric(S::from_int(i as i64)))))
            .expect("positive weights");
        Measurement { state: g.state, observable: g.observable }
    }

    /// Every event of this measurement, in order of increasing bitmask over the sorted spectrum.
    pub fn power_set(&self) -> Result<Vec<Event<S>>, ProbabilityError> {
        let spectrum: Vec<S> = self.occurring_spectrum().into_iter().collect();
        if spectrum.len() > CHECK_LIMIT {
            return Err(ProbabilityError::TooLarge(spectrum.len(), CHECK_LIMIT));
        }
        let events = (0u32..1 << spectrum.len())
            .map(|mask| {
                let members = spectrum.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, x)| x.clone());
                Event { measurement: self.clone(), members: members.collect() }
            })
            .collect();
        Ok(events)
    }
}

/// A set of occurring eigenvalues of one measurement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event<S> {
    measurement: Measurement<S>,
    members: BTreeSet<S>,
}

impl<S: Scalar> Event<S> {
    pub fn new(measurement: Measurement<S>, members: BTreeSet<S>) -> Result<Self, ProbabilityError> {
        let occurring = measurement.occurring_spectrum();
        if let Some(x) = members.iter().find(|x| !occurring.contains(*x)) {
            return Err(ProbabilityError::NotOccurring(x.to_string()));
        }
        Ok(Event { measurement, members })
    }

    pub fn full(measurement: Measurement<S>) -> Self {
        let members = measurement.occurring_spectrum();
        Event { measurement, members }
    }

    pub fn empty(measurement: Measurement<S>) -> Self {
        Event { measurement, members: BTreeSet::new() }
    }

    pub fn measurement(&self) -> &Measurement<S> {
        &self.measurement
    }

    pub fn members(&self) -> &BTreeSet<S> {
        &self.members
    }

    /// The occurring eigenvalues not in this event.
    pub fn complement(&self) -> Self {
        let members = self.measurement.occurring_spectrum().difference(&self.members).cloned().collect();
        Event { measurement: self.measurement.clone(), members }
    }

    /// Null events are identified with events of zero weight.
    pub fn is_null(&self) -> bool {
        event_weight(self).is_zero()
    }
}

/// Sum of the weights of all branches contributing to the event.
pub fn event_weight<S: Scalar>(e: &Event<S>) -> S {
    let w = e.measurement.weights();
    e.members.iter().fold(S::zero(), |acc, x| acc + w.get(x).cloned().unwrap_or_else(S::zero))
}

/// `Greater` when `e1` is strictly more probable. Events may come from different measurements.
pub fn more_probable<S: Scalar>(e1: &Event<S>, e2: &Event<S>) -> Ordering {
    event_weight(e1).cmp(&event_weight(e2))
}

/// A bet paying `win` on the event and `lose` elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bet<S> {
    pub event: Event<S>,
    pub win: Consequence<S>,
    pub lose: Consequence<S>,
}

impl<S: Scalar> Bet<S> {
    pub fn new(event: Event<S>, win: Consequence<S>, lose: Consequence<S>) -> Result<Self, ProbabilityError> {
        if win.require_value()? <= lose.require_value()? {
            return Err(ProbabilityError::BetOrder);
        }
        Ok(Bet { event, win, lose })
    }

    pub fn to_game(&self) -> Game<S> {
        let m = &self.event.measurement;
        let payoff = m
            .occurring_spectrum()
            .into_iter()
            .map(|x| {
                let c = if self.event.members.contains(&x) { &self.win } else { &self.lose };
                (x, c.clone())
            })
            .collect();
        Game::new(m.state.clone(), m.observable.clone(), payoff)
    }
}

/// Anything that assigns a number to events.
pub trait EventFunction<S> {
    fn probability(&self, event: &Event<S>) -> S;
}

/// Per-outcome assignment; the probability of an event is the sum over its members.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidateMeasure<S> {
    pub assignment: BTreeMap<S, S>,
}

impl<S: Scalar> CandidateMeasure<S> {
    pub fn new(assignment: BTreeMap<S, S>) -> Result<Self, ProbabilityError> {
        if let Some(v) = assignment.values().find(|v| v.is_negative() || **v > S::one()) {
            return Err(ProbabilityError::InvalidMeasure(format!("{v} is outside [0, 1]")));
        }
        Ok(CandidateMeasure { assignment })
    }

    /// The weight function of a measurement.
    pub fn weights_of(m: &Measurement<S>) -> Self {
        CandidateMeasure { assignment: m.weights() }
    }
}

impl<S: Scalar> EventFunction<S> for CandidateMeasure<S> {
    fn probability(&self, event: &Event<S>) -> S {
        event.members.iter().fold(S::zero(), |acc, x| acc + self.assignment.get(x).cloned().unwrap_or_else(S::zero))
    }
}

/// Explicit value for every event, keyed by member set; missing events count as zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventTable<S> {
    pub values: BTreeMap<BTreeSet<S>, S>,
}

impl<S: Scalar> EventFunction<S> for EventTable<S> {
    fn probability(&self, event: &Event<S>) -> S {
        self.values.get(&event.members).cloned().unwrap_or_else(S::zero)
    }
}

/// Outcome of one condition of the probability theorem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub holds: bool,
    pub counterexample: Option<String>,
}

impl Condition {
    fn pass() -> Self {
        Condition { holds: true, counterexample: None }
    }

    fn fail(why: String) -> Self {
        Condition { holds: false, counterexample: Some(why) }
    }
}

/// Which of the three conditions a candidate satisfies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureReport {
    /// Orders events exactly as their weights do.
    pub order: Condition,
    /// Additive over disjoint events.
    pub additive: Condition,
    /// The full event has probability one.
    pub normalized: Condition,
}

impl MeasureReport {
    pub fn all_hold(&self) -> bool {
        self.order.holds && self.additive.holds && self.normalized.holds
    }
}

fn render_set<S: Scalar>(members: &BTreeSet<S>) -> String {
    let parts: Vec<String> = members.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Order condition across any collection of events: probabilities must be
/// equal on equal weights and strictly increasing with weight.
fn order_condition<S: Scalar>(scored: &mut [(S, S, String)]) -> Condition {
    scored.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut k = 0;
    let mut prev_max: Option<&(S, S, String)> = None;
    while k < scored.len() {
        let mut end = k;
        while end + 1 < scored.len() && scored[end + 1].0 == scored[k].0 {
            end += 1;
        }
        let (lo, hi) = (&scored[k], &scored[end]);
        if lo.1 != hi.1 {
            return Condition::fail(format!(
                "events {} and {} have equal weight {} but probabilities {} and {}",
                lo.2, hi.2, lo.0, lo.1, hi.1
            ));
        }
        if let Some(p) = prev_max {
            if p.1 >= lo.1 {
                return Condition::fail(format!(
                    "event {} outweighs {} ({} > {}) but is not more probable ({} vs {})",
                    lo.2, p.2, lo.0, p.0, lo.1, p.1
                ));
            }
        }
        prev_max = Some(hi);
        k = end + 1;
    }
    Condition::pass()
}

fn same_measurement<S: Scalar>(events: &[Event<S>]) -> Result<&Measurement<S>, ProbabilityError> {
    let m = &events.first().ok_or(ProbabilityError::NotPowerSet)?.measurement;
    if events.iter().any(|e| &e.measurement != m) {
        return Err(ProbabilityError::NotPowerSet);
    }
    let k = m.occurring_spectrum().len();
    if k > CHECK_LIMIT {
        return Err(ProbabilityError::TooLarge(k, CHECK_LIMIT));
    }
    let distinct: BTreeSet<&BTreeSet<S>> = events.iter().map(|e| &e.members).collect();
    if distinct.len() != events.len() || events.len() != 1 << k {
        return Err(ProbabilityError::NotPowerSet);
    }
    Ok(m)
}

/// Checks a candidate against the order, additivity and normalization
/// conditions on the full event space of one measurement.
pub fn check_measure<S: Scalar>(
    events: &[Event<S>],
    m: &impl EventFunction<S>,
) -> Result<MeasureReport, ProbabilityError> {
    let measurement = same_measurement(events)?;
    let mut scored: Vec<(S, S, String)> =
        events.iter().map(|e| (event_weight(e), m.probability(e), render_set(&e.members))).collect();
    let order = order_condition(&mut scored);

    let singles: BTreeMap<&S, S> = events
        .iter()
        .filter(|e| e.members.len() == 1)
        .map(|e| (e.members.iter().next().expect("singleton"), m.probability(e)))
        .collect();
    let mut additive = Condition::pass();
    for e in events {
        let sum = e.members.iter().fold(S::zero(), |acc, x| acc + singles[x].clone());
        let p = m.probability(e);
        if p != sum {
            additive = Condition::fail(format!(
                "Pr({}) = {p} but its outcomes sum to {sum}",
                render_set(&e.members)
            ));
            break;
        }
    }

    let total = m.probability(&Event::full(measurement.clone()));
    let normalized =
        if total.is_one() { Condition::pass() } else { Condition::fail(format!("Pr of the full event is {total}")) };
    Ok(MeasureReport { order, additive, normalized })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Exactly the weight function survived.
    Unique,
    /// The surviving set differs from the weight function alone.
    Violation,
    /// The bound cannot settle the question.
    Inconclusive(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniquenessReport<S> {
    pub verdict: Verdict,
    /// Every candidate on the measurement that passed all conditions.
    pub candidates: Vec<CandidateMeasure<S>>,
    /// Size of the equal-weight reference measurement searched jointly.
    pub reference_outcomes: usize,
}

/// Fractions in `[0, 1]` with denominator at most `bound`, ascending.
fn farey<S: Scalar>(bound: u64) -> Vec<S> {
    let mut v: BTreeSet<S> = BTreeSet::new();
    for q in 1..=bound as i64 {
        for p in 0..=q {
            v.insert(S::ratio(p, q));
        }
    }
    v.into_iter().collect()
}

/// Exhaustively enumerates measures with per-outcome denominators at most
/// `bound` that satisfy every condition, jointly on `m` and on an
/// equal-weight reference measurement whose events can be compared with
/// `m`'s. The reference has as many outcomes as the common denominator of
/// `m`'s weights.
pub fn uniqueness_search<S: Scalar>(m: &Measurement<S>, bound: u64) -> Result<UniquenessReport<S>, ProbabilityError> {
    let weights = m.weights();
    let k = weights.len();
    if k > SEARCH_LIMIT {
        return Err(ProbabilityError::TooLarge(k, SEARCH_LIMIT));
    }
    let inconclusive = |why: String| UniquenessReport { verdict: Verdict::Inconclusive(why), candidates: vec![], reference_outcomes: 0 };
    let ws: Vec<S> = weights.values().cloned().collect();
    let n = match common_denominator(&ws) {
        Some(n) if n <= bound && n as usize <= CHECK_LIMIT => n as usize,
        Some(n) => return Ok(inconclusive(format!("common denominator {n} exceeds the bound or the reference limit"))),
        None => return Ok(inconclusive("common denominator does not fit".into())),
    };
    let reference = Measurement::uniform(n);

    // Outcomes of both measurements share one order condition on singletons.
    let mut outcome_weights: Vec<S> = ws.clone();
    outcome_weights.extend(reference.weights().into_values());
    let values = farey::<S>(bound);
    let mut found = Vec::new();
    let mut assigned = Vec::with_capacity(k + n);
    search(&outcome_weights, k, &values, &mut assigned, &mut found);

    let target_events = m.power_set()?;
    let reference_events = reference.power_set()?;
    let mut candidates = BTreeSet::new();
    for assignment in found {
        let target = CandidateMeasure { assignment: weights.keys().cloned().zip(assignment[..k].iter().cloned()).collect() };
        let refm = CandidateMeasure {
            assignment: reference.weights().into_keys().zip(assignment[k..].iter().cloned()).collect(),
        };
        if !check_measure(&target_events, &target)?.all_hold() || !check_measure(&reference_events, &refm)?.all_hold() {
            continue;
        }
        let mut scored: Vec<(S, S, String)> = target_events
            .iter()
            .map(|e| (event_weight(e), target.probability(e), format!("M{}", render_set(&e.members))))
            .chain(reference_events.iter().map(|e| (event_weight(e), refm.probability(e), String::new())))
            .collect();
        if order_condition(&mut scored).holds {
            candidates.insert(target);
        }
    }
    let candidates: Vec<_> = candidates.into_iter().collect();
    let weight_measure = CandidateMeasure::weights_of(m);
    let verdict = if candidates == [weight_measure] { Verdict::Unique } else { Verdict::Violation };
    Ok(UniquenessReport { verdict, candidates, reference_outcomes: n })
}

/// Depth-first assignment of values to outcomes. The first `split` outcomes
/// belong to the target measurement, the rest to the reference; each group
/// must sum to one, and singleton probabilities must be ordered like weights.
fn search<S: Scalar>(weights: &[S], split: usize, values: &[S], assigned: &mut Vec<S>, found: &mut Vec<Vec<S>>) {
    let i = assigned.len();
    if i == weights.len() {
        found.push(assigned.clone());
        return;
    }
    let (group_start, group_end) = if i < split { (0, split) } else { (split, weights.len()) };
    let used = assigned[group_start..].iter().fold(S::zero(), |acc, v| acc + v.clone());
    let last_in_group = i + 1 == group_end;
    for v in values {
        let partial = used.clone() + v.clone();
        if partial > S::one() {
            break;
        }
        if last_in_group && !partial.is_one() {
            continue;
        }
        let consistent = assigned.iter().zip(weights).all(|(p, w)| match w.cmp(&weights[i]) {
            Ordering::Less => p < v,
            Ordering::Equal => p == v,
            Ordering::Greater => p > v,
        });
        if !consistent {
            continue;
        }
        assigned.push(v.clone());
        search(weights, split, values, assigned, found);
        assigned.pop();
        if i + 1 == split && last_in_group {
            // Only one value can complete a group.
            break;
        }
    }
}

/// Finitely many gambles over a fixed list of valued consequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GambleTable<S> {
    pub consequences: Vec<Consequence<S>>,
    pub gambles: Vec<Vec<S>>,
}

impl<S: Scalar> GambleTable<S> {
    pub fn new(consequences: Vec<Consequence<S>>, gambles: Vec<Vec<S>>) -> Result<Self, ProbabilityError> {
        for c in &consequences {
            c.require_value()?;
        }
        for (k, g) in gambles.iter().enumerate() {
            if g.len() != consequences.len() {
                return Err(ProbabilityError::InvalidTable(format!("gamble {k} has {} entries", g.len())));
            }
            if g.iter().any(|p| p.is_negative()) {
                return Err(ProbabilityError::InvalidTable(format!("gamble {k} has a negative entry")));
            }
            let total = g.iter().fold(S::zero(), |acc, p| acc + p.clone());
            if !total.is_one() {
                return Err(ProbabilityError::InvalidTable(format!("gamble {k} sums to {total}")));
            }
        }
        Ok(GambleTable { consequences, gambles })
    }

    pub fn values(&self) -> Vec<S> {
        self.consequences.iter().map(|c| c.value.clone().expect("checked on construction")).collect()
    }

    /// Expected utility of a probability vector over this table's consequences.
    pub fn expected_utility(&self, gamble: &[S]) -> S {
        gamble.iter().zip(self.values()).fold(S::zero(), |acc, (p, v)| acc + p.clone() * v)
    }
}

/// A preference between gambles.
pub trait GamblePreference<S> {
    fn compare(&self, f: &[S], g: &[S]) -> Ordering;
}

/// The order induced by expected utility over a table's values.
pub struct EuPreference<S> {
    values: Vec<S>,
}

impl<S: Scalar> EuPreference<S> {
    pub fn new(table: &GambleTable<S>) -> Self {
        EuPreference { values: table.values() }
    }
}

impl<S: Scalar> GamblePreference<S> for EuPreference<S> {
    fn compare(&self, f: &[S], g: &[S]) -> Ordering {
        let eu = |h: &[S]| h.iter().zip(&self.values).fold(S::zero(), |acc, (p, v)| acc + p.clone() * v.clone());
        eu(f).cmp(&eu(g))
    }
}

impl<S, F: Fn(&[S], &[S]) -> Ordering> GamblePreference<S> for F {
    fn compare(&self, f: &[S], g: &[S]) -> Ordering {
        self(f, g)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VnmReport {
    pub well_formed: Condition,
    pub weak_order: Condition,
    pub independence: Condition,
    pub continuity: Condition,
}

impl VnmReport {
    pub fn all_hold(&self) -> bool {
        self.well_formed.holds && self.weak_order.holds && self.independence.holds && self.continuity.holds
    }
}

/// Dyadic depth of the continuity search.
pub const CONTINUITY_DEPTH: u32 = 10;

fn mix<S: Scalar>(lambda: &S, f: &[S], h: &[S]) -> Vec<S> {
    f.iter().zip(h).map(|(a, b)| lambda.clone() * a.clone() + (S::one() - lambda.clone()) * b.clone()).collect()
}

fn render_gamble<S: Scalar>(g: &[S]) -> String {
    let parts: Vec<String> = g.iter().map(|p| p.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Checks the table and preference against the VNM axioms on the table's gambles.
pub fn vnm_check<S: Scalar>(table: &GambleTable<S>, pref: &impl GamblePreference<S>) -> VnmReport {
    let well_formed = match GambleTable::new(table.consequences.clone(), table.gambles.clone()) {
        Ok(_) => Condition::pass(),
        Err(e) => Condition::fail(e.to_string()),
    };
    let gs = &table.gambles;

    let mut weak_order = Condition::pass();
    'outer: for f in gs {
        for g in gs {
            if pref.compare(f, g) != pref.compare(g, f).reverse() {
                weak_order = Condition::fail(format!("{} vs {} is not antisymmetric", render_gamble(f), render_gamble(g)));
                break 'outer;
            }
            for h in gs {
                if pref.compare(f, g).is_ge() && pref.compare(g, h).is_ge() && pref.compare(f, h).is_lt() {
                    weak_order = Condition::fail(format!(
                        "{} >= {} >= {} but {} < {}",
                        render_gamble(f),
                        render_gamble(g),
                        render_gamble(h),
                        render_gamble(f),
                        render_gamble(h)
                    ));
                    break 'outer;
                }
            }
        }
    }

    let mut mixers: Vec<Vec<S>> = gs.clone();
    for pair in gs.windows(2) {
        mixers.push(mix(&S::ratio(1, 2), &pair[0], &pair[1]));
    }
    let lambdas: Vec<S> = (1..=8).map(|k| S::ratio(k, 8)).collect();
    let mut independence = Condition::pass();
    'outer: for f in gs {
        for g in gs {
            let base = pref.compare(f, g);
            for h in &mixers {
                for l in &lambdas {
                    let (fm, gm) = (mix(l, f, h), mix(l, g, h));
                    if pref.compare(&fm, &gm) != base {
                        independence = Condition::fail(format!(
                            "{} vs {} is {:?}, but mixing both with {} at weight {l} gives {:?}",
                            render_gamble(f),
                            render_gamble(g),
                            base,
                            render_gamble(h),
                            pref.compare(&fm, &gm)
                        ));
                        break 'outer;
                    }
                }
            }
        }
    }

    let grid: Vec<S> = (1..1i64 << CONTINUITY_DEPTH).map(|k| S::ratio(k, 1 << CONTINUITY_DEPTH)).collect();
    let mut continuity = Condition::pass();
    'outer: for f in gs {
        for g in gs {
            if !pref.compare(f, g).is_gt() {
                continue;
            }
            for h in gs {
                if !pref.compare(g, h).is_gt() {
                    continue;
                }
                let above = grid.iter().rev().any(|a| pref.compare(&mix(a, f, h), g).is_gt());
                let below = grid.iter().any(|b| pref.compare(g, &mix(b, f, h)).is_gt());
                if !(above && below) {
                    continuity = Condition::fail(format!(
                        "mixing weights for {} > {} > {} not found at depth {CONTINUITY_DEPTH}",
                        render_gamble(f),
                        render_gamble(g),
                        render_gamble(h)
                    ));
                    break 'outer;
                }
            }
        }
    }
    VnmReport { well_formed, weak_order, independence, continuity }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{Amplitude, BasisIndex};
    use num_rational::Rational64;

    type R = Rational64;

    fn r(n: i64, d: i64) -> R {
        R::new(n, d)
    }

    fn measurement(weights: &[R]) -> Measurement<R> {
        let g = Game::from_weights(weights.iter().map(|w| (*w, Consequence::new("c", None)))).unwrap();
        Measurement::of_game(&g).unwrap()
    }

    fn event(m: &Measurement<R>, members: &[i64]) -> Event<R> {
        Event::new(m.clone(), members.iter().map(|x| R::from_integer(*x)).collect()).unwrap()
    }

    #[test]
    fn event_weights() {
        let m = measurement(&[r(1, 6), r(1, 3), r(1, 2)]);
        assert_eq!(event_weight(&Event::full(m.clone())), r(1, 1));
        assert_eq!(event_weight(&Event::empty(m.clone())), r(0, 1));
        assert_eq!(event_weight(&event(&m, &[0, 2])), r(2, 3));
        assert!(Event::new(m, [R::from_integer(7)].into_iter().collect()).is_err());
    }

    #[test]
    fn comparison_across_measurements() {
        let a = measurement(&[r(1, 6), r(1, 3), r(1, 2)]);
        let b = measurement(&[r(1, 2), r(1, 2)]);
        assert_eq!(more_probable(&event(&a, &[0, 2]), &event(&a, &[0, 2])), Ordering::Equal);
        assert_eq!(more_probable(&event(&a, &[0, 2]), &event(&b, &[1])), Ordering::Greater);
        assert_eq!(more_probable(&event(&a, &[2]), &event(&b, &[0])), Ordering::Equal);
    }

    #[test]
    fn weight_function_passes() {
        let m = measurement(&[r(1, 6), r(1, 3), r(1, 2)]);
        let report = check_measure(&m.power_set().unwrap(), &CandidateMeasure::weights_of(&m)).unwrap();
        assert!(report.all_hold());
    }

    #[test]
    fn uniform_fails_order() {
        let m = measurement(&[r(1, 6), r(1, 3), r(1, 2)]);
        let uniform = CandidateMeasure::new(m.weights().into_keys().map(|x| (x, r(1, 3))).collect()).unwrap();
        let report = check_measure(&m.power_set().unwrap(), &uniform).unwrap();
        assert!(!report.order.holds);
        assert!(report.additive.holds && report.normalized.holds);
    }

    #[test]
    fn doubled_weights_fail_normalization() {
        let m = measurement(&[r(1, 4), r(1, 4), r(1, 2)]);
        let doubled = CandidateMeasure { assignment: m.weights().into_iter().map(|(x, w)| (x, w * 2)).collect() };
        let report = check_measure(&m.power_set().unwrap(), &doubled).unwrap();
        assert!(!report.normalized.holds);
    }

    #[test]
    fn non_additive_table_fails() {
        let m = measurement(&[r(1, 2), r(1, 2)]);
        let mut t = EventTable::default();
        for e in m.power_set().unwrap() {
            let w = event_weight(&e);
            t.values.insert(e.members().clone(), w);
        }
        t.values.insert(BTreeSet::new(), r(0, 1));
        let full: BTreeSet<R> = m.occurring_spectrum();
        t.values.insert(full, r(1, 1));
        assert!(check_measure(&m.power_set().unwrap(), &t).unwrap().additive.holds);
        t.values.insert([R::from_integer(0)].into_iter().collect(), r(1, 3));
        let report = check_measure(&m.power_set().unwrap(), &t).unwrap();
        assert!(!report.additive.holds);
    }

    #[test]
    fn single_measurement_admits_impostors() {
        let m = measurement(&[r(1, 3), r(2, 3)]);
        let impostor = CandidateMeasure::new(m.weights().into_keys().zip([r(1, 4), r(3, 4)]).collect()).unwrap();
        assert!(check_measure(&m.power_set().unwrap(), &impostor).unwrap().all_hold());
    }

    #[test]
    fn uniqueness_examples() {
        for ws in [vec![r(1, 2), r(1, 2)], vec![r(1, 3), r(2, 3)], vec![r(1, 1)], vec![r(1, 12), r(5, 12), r(1, 2)]] {
            let m = measurement(&ws);
            let report = uniqueness_search(&m, 12).unwrap();
            assert_eq!(report.verdict, Verdict::Unique, "{ws:?}");
            assert_eq!(report.candidates, vec![CandidateMeasure::weights_of(&m)]);
        }
    }

    #[test]
    fn uniqueness_inconclusive_when_bound_too_small() {
        let m = measurement(&[r(1, 5), r(4, 5)]);
        assert!(matches!(uniqueness_search(&m, 4).unwrap().verdict, Verdict::Inconclusive(_)));
    }

    #[test]
    fn degenerate_eigenvalues_merge_into_one_outcome() {
        let mut g = Game::from_weights([(r(1, 4), Consequence::new("c", None)), (r(3, 4), Consequence::new("d", None))])
            .unwrap();
        g.state.insert(BasisIndex::new("0"), Amplitude::real(r(1, 4)).unwrap());
        g.state.insert(BasisIndex::new("1"), Amplitude::real(r(1, 4)).unwrap());
        g.state.insert(BasisIndex::new("2"), Amplitude::real(r(1, 2)).unwrap());
        g.observable.insert(BasisIndex::new("2"), R::from_integer(0));
        let m = Measurement::of_game(&g).unwrap();
        assert_eq!(m.weights()[&R::from_integer(0)], r(3, 4));
    }

    #[test]
    fn bet_game() {
        let m = measurement(&[r(1, 3), r(2, 3)]);
        let win = Consequence::numeric(R::from_integer(1));
        let lose = Consequence::numeric(R::from_integer(0));
        let bet = Bet::new(event(&m, &[1]), win.clone(), lose.clone()).unwrap();
        assert_eq!(bet.to_game().expected_utility().unwrap(), r(2, 3));
        assert!(Bet::new(event(&m, &[1]), lose, win).is_err());
    }

    fn table() -> GambleTable<R> {
        let cs = [0, 1, 3].iter().map(|v| Consequence::numeric(R::from_integer(*v))).collect();
        let gambles = vec![
            vec![r(1, 1), r(0, 1), r(0, 1)],
            vec![r(0, 1), r(1, 1), r(0, 1)],
            vec![r(0, 1), r(0, 1), r(1, 1)],
            vec![r(1, 2), r(0, 1), r(1, 2)],
            vec![r(1, 4), r(1, 2), r(1, 4)],
        ];
        GambleTable::new(cs, gambles).unwrap()
    }

    #[test]
    fn vnm_holds_for_eu() {
        let t = table();
        let report = vnm_check(&t, &EuPreference::new(&t));
        assert!(report.all_hold(), "{report:?}");
    }

    #[test]
    fn vnm_detects_squared_weights() {
        let t = table();
        let values = t.values();
        let squared = |f: &[R], g: &[R]| {
            let u = |h: &[R]| h.iter().zip(&values).fold(R::from_integer(0), |acc, (p, v)| acc + p * p * v);
            u(f).cmp(&u(g))
        };
        let report = vnm_check(&t, &squared);
        assert!(report.weak_order.holds);
        assert!(!report.independence.holds);
    }

    #[test]
    fn vnm_detects_intransitivity() {
        let t = table();
        let cyclic = |f: &[R], g: &[R]| {
            let rank = |h: &[R]| t.gambles.iter().position(|x| x == h).unwrap_or(0);
            let (a, b) = (rank(f), rank(g));
            if a == b {
                Ordering::Equal
            } else if (a + 1) % 3 == b % 3 {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        };
        assert!(!vnm_check(&t, &cyclic).weak_order.holds);
    }

    #[test]
    fn vnm_continuity_failure_is_reported_as_not_found() {
        let t = table();
        let lexical = |f: &[R], g: &[R]| f[2].cmp(&g[2]).then_with(|| g[0].cmp(&f[0]));
        let report = vnm_check(&t, &lexical);
        assert!(!report.continuity.holds);
        assert!(report.continuity.counterexample.unwrap().contains("not found at depth 10"));
    }
}
