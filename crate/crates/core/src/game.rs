//! Games, their canonical form, and composite-game flattening.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::exact::{Amplitude, BasisIndex, State};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("consequence `{0}` has no numeric value")]
    UnvaluedConsequence(String),
    #[error("empty game")]
    EmptyGame,
}

/// Eigenvalue assignment for the preferred basis. Degenerate eigenvalues are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Observable<S> {
    eigen: BTreeMap<BasisIndex, S>,
}

impl<S: Scalar> Default for Observable<S> {
    fn default() -> Self {
        Observable { eigen: BTreeMap::new() }
    }
}

impl<S: Scalar> Observable<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, index: BasisIndex, eigenvalue: S) -> Option<S> {
        self.eigen.insert(index, eigenvalue)
    }

    pub fn remove(&mut self, index: &BasisIndex) -> Option<S> {
        self.eigen.remove(index)
    }

    pub fn get(&self, index: &BasisIndex) -> Option<&S> {
        self.eigen.get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisIndex, &S)> {
        self.eigen.iter()
    }

    pub fn indices(&self) -> impl Iterator<Item = &BasisIndex> {
        self.eigen.keys()
    }

    pub fn len(&self) -> usize {
        self.eigen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigen.is_empty()
    }

    /// All eigenvalues, with or without support.
    pub fn spectrum(&self) -> BTreeSet<S> {
        self.eigen.values().cloned().collect()
    }

    /// Number of basis indices carrying each eigenvalue.
    pub fn multiplicities(&self) -> BTreeMap<S, usize> {
        let mut m = BTreeMap::new();
        for x in self.eigen.values() {
            *m.entry(x.clone()).or_insert(0) += 1;
        }
        m
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.spectrum().len() == self.eigen.len()
    }

    /// The index carrying `x`, when exactly one does.
    pub fn index_of(&self, x: &S) -> Option<&BasisIndex> {
        let mut it = self.eigen.iter().filter(|(_, v)| *v == x).map(|(i, _)| i);
        let first = it.next()?;
        it.next().is_none().then_some(first)
    }
}

impl<S: Scalar> FromIterator<(BasisIndex, S)> for Observable<S> {
    fn from_iter<I: IntoIterator<Item = (BasisIndex, S)>>(iter: I) -> Self {
        Observable { eigen: iter.into_iter().collect() }
    }
}

/// An outcome the agent receives, optionally carrying a numeric utility.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Consequence<S> {
    pub label: String,
    pub value: Option<S>,
}

impl<S: Scalar> Consequence<S> {
    pub fn new(label: impl Into<String>, value: Option<S>) -> Self {
        Consequence { label: label.into(), value }
    }

    /// Valued consequence labelled by the value's own decimal-free rendering (`"1/2"`, `"-3"`).
    pub fn numeric(value: S) -> Self {
        Consequence { label: value.to_string(), value: Some(value) }
    }

    pub fn is_numeric_label(&self) -> bool {
        self.value.as_ref().is_some_and(|v| v.to_string() == self.label)
    }

    pub fn require_value(&self) -> Result<&S, GameError> {
        self.value.as_ref().ok_or_else(|| GameError::UnvaluedConsequence(self.label.clone()))
    }
}

pub type Payoff<S> = BTreeMap<S, Consequence<S>>;

/// The triple ⟨state, observable, payoff⟩.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Game<S> {
    pub state: State<S>,
    pub observable: Observable<S>,
    pub payoff: Payoff<S>,
}

impl<S: Scalar> Game<S> {
    pub fn new(state: State<S>, observable: Observable<S>, payoff: Payoff<S>) -> Self {
        Game { state, observable, payoff }
    }

    /// Real-amplitude game on indices `"0"`, `"1"`, … with eigenvalue `i` on index `i`.
    pub fn from_weights(branches: impl IntoIterator<Item = (S, Consequence<S>)>) -> Result<Self, GameError> {
        let mut state = State::new();
        let mut observable = Observable::new();
        let mut payoff = Payoff::new();
        for (i, (w, c)) in branches.into_iter().enumerate() {
            let idx = BasisIndex(i.to_string());
            let amp = Amplitude::real(w).map_err(|e| GameError::InvalidGame(e.to_string()))?;
            state.insert(idx.clone(), amp);
            let x = S::from_int(i as i64);
            observable.insert(idx, x.clone());
            payoff.insert(x, c);
        }
        Ok(Game { state, observable, payoff })
    }

    /// Eigenvalue of a support index. Panics on an unvalidated game missing one.
    fn eigen_of(&self, i: &BasisIndex) -> &S {
        self.observable.get(i).expect("validated game assigns every support index an eigenvalue")
    }

    pub fn validate(&self) -> Result<(), GameError> {
        if self.state.is_empty() {
            return Err(GameError::EmptyGame);
        }
        let total = self.state.total_weight();
        if !total.is_one() {
            return Err(GameError::InvalidGame(format!("weights sum to {total}, not 1")));
        }
        for i in self.state.support() {
            let x = self
                .observable
                .get(i)
                .ok_or_else(|| GameError::InvalidGame(format!("index `{i}` has no eigenvalue")))?;
            if !self.payoff.contains_key(x) {
                return Err(GameError::InvalidGame(format!("no payoff for occurring eigenvalue {x}")));
            }
        }
        Ok(())
    }

    /// Eigenvalues realized with nonzero weight.
    pub fn occurring_spectrum(&self) -> BTreeSet<S> {
        self.state.support().filter_map(|i| self.observable.get(i).cloned()).collect()
    }

    /// Total weight on the `x`-eigensubspace.
    pub fn eigen_weight(&self, x: &S) -> S {
        self.state
            .iter()
            .filter(|(i, _)| self.observable.get(i) == Some(x))
            .fold(S::zero(), |acc, (_, a)| acc + a.weight().clone())
    }

    /// Payoff at an occurring eigenvalue.
    pub fn consequence_at(&self, x: &S) -> Result<&Consequence<S>, GameError> {
        self.payoff.get(x).ok_or_else(|| GameError::InvalidGame(format!("no payoff for eigenvalue {x}")))
    }

    /// Numeric payoff value at every occurring eigenvalue.
    pub fn occurring_values(&self) -> Result<BTreeMap<S, S>, GameError> {
        self.validate()?;
        self.occurring_spectrum()
            .into_iter()
            .map(|x| {
                let v = self.consequence_at(&x)?.require_value()?.clone();
                Ok((x, v))
            })
            .collect()
    }

    /// Same game with `f` applied to every payoff value. Labels become numeric.
    pub fn map_values(&self, f: impl Fn(&S) -> S) -> Result<Self, GameError> {
        let payoff = self
            .occurring_values()?
            .into_iter()
            .map(|(x, v)| (x, Consequence::numeric(f(&v))))
            .collect();
        Ok(Game { state: self.state.clone(), observable: self.observable.clone(), payoff })
    }

    pub fn canonicalize(&self) -> Result<CanonicalGame<S>, GameError> {
        canonicalize(self)
    }

    pub fn expected_utility(&self) -> Result<S, GameError> {
        expected_utility(self)
    }
}

/// The distinct consequences of a game with their total weights, sorted by label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalGame<S> {
    branches: Vec<(Consequence<S>, S)>,
}

impl<S: Scalar> CanonicalGame<S> {
    pub fn branches(&self) -> &[(Consequence<S>, S)] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn weight_of(&self, label: &str) -> S {
        self.branches
            .iter()
            .find(|(c, _)| c.label == label)
            .map(|(_, w)| w.clone())
            .unwrap_or_else(S::zero)
    }

    pub fn expected_utility(&self) -> Result<S, GameError> {
        self.branches.iter().try_fold(S::zero(), |acc, (c, w)| Ok(acc + w.clone() * c.require_value()?.clone()))
    }

    /// Re-embeds as a real-amplitude game with one non-degenerate branch per consequence.
    pub fn to_game(&self) -> Game<S> {
        Game::from_weights(self.branches.iter().map(|(c, w)| (w.clone(), c.clone())))
            .expect("canonical weights are positive")
    }
}

/// Sum of the weights of every branch whose payoff has `c`'s label.
pub fn consequence_weight<S: Scalar>(g: &Game<S>, c: &Consequence<S>) -> S {
    g.state
        .iter()
        .filter(|(i, _)| {
            g.observable.get(i).and_then(|x| g.payoff.get(x)).is_some_and(|p| p.label == c.label)
        })
        .fold(S::zero(), |acc, (_, a)| acc + a.weight().clone())
}

pub fn canonicalize<S: Scalar>(g: &Game<S>) -> Result<CanonicalGame<S>, GameError> {
    g.validate()?;
    let mut merged: BTreeMap<&str, (&Consequence<S>, S)> = BTreeMap::new();
    for (i, amp) in g.state.iter() {
        let c = g.consequence_at(g.eigen_of(i))?;
        match merged.get_mut(c.label.as_str()) {
            Some((prev, w)) => {
                if prev.value != c.value {
                    return Err(GameError::InvalidGame(format!(
                        "consequence `{}` carries two different values",
                        c.label
                    )));
                }
                *w = w.clone() + amp.weight().clone();
            }
            None => {
                merged.insert(c.label.as_str(), (c, amp.weight().clone()));
            }
        }
    }
    let branches = merged.into_values().map(|(c, w)| (c.clone(), w)).collect();
    Ok(CanonicalGame { branches })
}

pub fn expected_utility<S: Scalar>(g: &Game<S>) -> Result<S, GameError> {
    canonicalize(g)?.expected_utility()
}

/// What a composite game pays on one eigenvalue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompositePayoff<S> {
    Leaf(Consequence<S>),
    Nested(Box<CompositeGame<S>>),
}

/// A game some of whose consequences are themselves games.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeGame<S> {
    pub state: State<S>,
    pub observable: Observable<S>,
    pub payoff: BTreeMap<S, CompositePayoff<S>>,
}

impl<S: Scalar> CompositeGame<S> {
    /// Wraps a simple game; consequences stay leaves.
    pub fn from_game(g: &Game<S>) -> Self {
        CompositeGame {
            state: g.state.clone(),
            observable: g.observable.clone(),
            payoff: g.payoff.iter().map(|(x, c)| (x.clone(), CompositePayoff::Leaf(c.clone()))).collect(),
        }
    }

    /// Replaces the payoff at `x` with a nested game.
    pub fn nest(&mut self, x: S, inner: CompositeGame<S>) {
        self.payoff.insert(x, CompositePayoff::Nested(Box::new(inner)));
    }

    fn validate(&self) -> Result<(), GameError> {
        if self.state.is_empty() {
            return Err(GameError::EmptyGame);
        }
        if !self.state.total_weight().is_one() {
            return Err(GameError::InvalidGame("composite weights do not sum to 1".into()));
        }
        Ok(())
    }

    fn payoff_at(&self, i: &BasisIndex) -> Result<&CompositePayoff<S>, GameError> {
        let x = self
            .observable
            .get(i)
            .ok_or_else(|| GameError::InvalidGame(format!("index `{i}` has no eigenvalue")))?;
        self.payoff.get(x).ok_or_else(|| GameError::InvalidGame(format!("no payoff for occurring eigenvalue {x}")))
    }

    fn leaves(&self, out: &mut Vec<(Amplitude<S>, Consequence<S>)>, prefix: &Amplitude<S>) -> Result<(), GameError> {
        self.validate()?;
        for (i, amp) in self.state.iter() {
            let path = prefix * amp;
            match self.payoff_at(i)? {
                CompositePayoff::Leaf(c) => out.push((path, c.clone())),
                CompositePayoff::Nested(inner) => inner.leaves(out, &path)?,
            }
        }
        Ok(())
    }

    /// Expected utility computed recursively, nested games contributing their own EU.
    pub fn recursive_eu(&self) -> Result<S, GameError> {
        self.validate()?;
        let mut total = S::zero();
        for (i, amp) in self.state.iter() {
            let v = match self.payoff_at(i)? {
                CompositePayoff::Leaf(c) => c.require_value()?.clone(),
                CompositePayoff::Nested(inner) => inner.recursive_eu()?,
            };
            total = total + amp.weight().clone() * v;
        }
        Ok(total)
    }
}

/// One simple game with a branch per leaf path, indexed `"0"`, `"1"`, … in
/// path order with eigenvalue `k` on branch `k`. Amplitudes are path products.
pub fn flatten<S: Scalar>(cg: &CompositeGame<S>) -> Result<Game<S>, GameError> {
    let mut leaves = Vec::new();
    cg.leaves(&mut leaves, &Amplitude::one())?;
    let mut state = State::new();
    let mut observable = Observable::new();
    let mut payoff = Payoff::new();
    for (k, (amp, c)) in leaves.into_iter().enumerate() {
        let idx = BasisIndex(k.to_string());
        let x = S::from_int(k as i64);
        state.insert(idx.clone(), amp);
        observable.insert(idx, x.clone());
        payoff.insert(x, c);
    }
    Ok(Game { state, observable, payoff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    type R = Rational64;

    fn r(n: i64, d: i64) -> R {
        R::new(n, d)
    }

    fn label(s: &str) -> Consequence<R> {
        Consequence::new(s, None)
    }

    fn game(branches: &[(R, R, Consequence<R>)]) -> Game<R> {
        let mut state = State::new();
        let mut obs = Observable::new();
        let mut payoff = Payoff::new();
        for (k, (w, x, c)) in branches.iter().enumerate() {
            let idx = BasisIndex(format!("i{k}"));
            state.insert(idx.clone(), Amplitude::real(*w).unwrap());
            obs.insert(idx, *x);
            payoff.insert(*x, c.clone());
        }
        Game::new(state, obs, payoff)
    }

    #[test]
    fn single_branch_weight_is_one() {
        let g = game(&[(r(1, 1), r(3, 1), label("c"))]);
        assert_eq!(consequence_weight(&g, &label("c")), r(1, 1));
        assert_eq!(consequence_weight(&g, &label("z")), r(0, 1));
    }

    #[test]
    fn degenerate_payoff_merges() {
        let g = game(&[(r(1, 2), r(0, 1), label("c")), (r(1, 2), r(1, 1), label("c"))]);
        assert_eq!(consequence_weight(&g, &label("c")), r(1, 1));
    }

    #[test]
    fn weight_over_degenerate_eigenvalue() {
        let a = r(0, 1);
        let b = r(1, 1);
        let mut g = game(&[(r(1, 6), a, label("c")), (r(1, 3), b, label("d"))]);
        g.state.insert(BasisIndex::new("i2"), Amplitude::real(r(1, 2)).unwrap());
        g.observable.insert(BasisIndex::new("i2"), a);
        assert_eq!(consequence_weight(&g, &label("c")), r(2, 3));
    }

    #[test]
    fn stage_one_canonical_form() {
        let g = game(&[
            (r(1, 2), r(0, 1), Consequence::numeric(r(0, 1))),
            (r(1, 2), r(1, 1), Consequence::numeric(r(1, 1))),
        ]);
        let c = canonicalize(&g).unwrap();
        assert_eq!(
            c.branches(),
            &[(Consequence::numeric(r(0, 1)), r(1, 2)), (Consequence::numeric(r(1, 1)), r(1, 2))]
        );
        assert_eq!(expected_utility(&g).unwrap(), r(1, 2));
    }

    #[test]
    fn merge_equal_consequences() {
        let g = game(&[(r(1, 4), r(0, 1), label("c")), (r(1, 4), r(1, 1), label("c")), (r(1, 2), r(2, 1), label("d"))]);
        let c = canonicalize(&g).unwrap();
        assert_eq!(c.branches(), &[(label("c"), r(1, 2)), (label("d"), r(1, 2))]);
    }

    #[test]
    fn rejects_unnormalized() {
        let g = game(&[(r(1, 2), r(0, 1), label("c"))]);
        assert!(matches!(canonicalize(&g), Err(GameError::InvalidGame(_))));
    }

    #[test]
    fn rejects_conflicting_values() {
        let g = game(&[
            (r(1, 2), r(0, 1), Consequence::new("c", Some(r(1, 1)))),
            (r(1, 2), r(1, 1), Consequence::new("c", Some(r(2, 1)))),
        ]);
        assert!(canonicalize(&g).is_err());
    }

    #[test]
    fn zero_weight_payoff_is_irrelevant() {
        let mut g = game(&[(r(1, 1), r(0, 1), label("c"))]);
        g.observable.insert(BasisIndex::new("off"), r(5, 1));
        assert!(g.validate().is_ok());
        g.payoff.insert(r(5, 1), label("whatever"));
        assert_eq!(canonicalize(&g).unwrap().len(), 1);
    }

    #[test]
    fn expected_utility_direct_sum() {
        let g = game(&[
            (r(1, 6), r(0, 1), Consequence::numeric(r(6, 1))),
            (r(1, 3), r(1, 1), Consequence::numeric(r(3, 1))),
            (r(1, 2), r(2, 1), Consequence::numeric(r(2, 1))),
        ]);
        assert_eq!(expected_utility(&g).unwrap(), r(3, 1));
        let unvalued = game(&[(r(1, 1), r(0, 1), label("c"))]);
        assert!(matches!(expected_utility(&unvalued), Err(GameError::UnvaluedConsequence(_))));
    }

    #[test]
    fn canonical_reembedding_is_idempotent() {
        let g = game(&[(r(1, 4), r(0, 1), label("c")), (r(1, 4), r(1, 1), label("c")), (r(1, 2), r(2, 1), label("d"))]);
        let c = canonicalize(&g).unwrap();
        assert_eq!(canonicalize(&c.to_game()).unwrap(), c);
    }

    #[test]
    fn flatten_depth_one() {
        let g = game(&[(r(1, 3), r(0, 1), label("c")), (r(2, 3), r(1, 1), label("d"))]);
        let flat = flatten(&CompositeGame::from_game(&g)).unwrap();
        assert_eq!(canonicalize(&flat).unwrap(), canonicalize(&g).unwrap());
    }

    #[test]
    fn flatten_nested_equal_weight() {
        let outer = game(&[(r(1, 2), r(0, 1), label("outer c")), (r(1, 2), r(1, 1), label("unused"))]);
        let inner = game(&[(r(1, 2), r(0, 1), label("c")), (r(1, 2), r(1, 1), label("d"))]);
        let mut cg = CompositeGame::from_game(&outer);
        cg.nest(r(1, 1), CompositeGame::from_game(&inner));
        let c = canonicalize(&flatten(&cg).unwrap()).unwrap();
        assert_eq!(c.branches(), &[(label("c"), r(1, 4)), (label("d"), r(1, 4)), (label("outer c"), r(1, 2))]);
    }

    #[test]
    fn flatten_two_level_four_way() {
        let v = |n| Consequence::numeric(r(n, 1));
        let outer = game(&[(r(1, 2), r(0, 1), label("yA")), (r(1, 2), r(1, 1), label("yB"))]);
        let a = game(&[(r(1, 2), r(0, 1), v(1)), (r(1, 2), r(1, 1), v(2))]);
        let b = game(&[(r(1, 2), r(0, 1), v(3)), (r(1, 2), r(1, 1), v(4))]);
        let mut cg = CompositeGame::from_game(&outer);
        cg.nest(r(0, 1), CompositeGame::from_game(&a));
        cg.nest(r(1, 1), CompositeGame::from_game(&b));
        let flat = flatten(&cg).unwrap();
        let c = canonicalize(&flat).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.branches().iter().all(|(_, w)| *w == r(1, 4)));
        assert_eq!(expected_utility(&flat).unwrap(), r(10, 4));
        assert_eq!(cg.recursive_eu().unwrap(), r(10, 4));
    }
}
