//! Derivation traces: replayable arguments that pin down the value of a game.
//!
//! A trace holds a list of games and a list of entries. Each entry is either
//! a checked rewrite between two games or the use of a decision-theoretic
//! axiom, and licenses one linear claim about the unknown values `V(g)`.
//! [`DerivationTrace::verify`] re-checks every entry from scratch, feeds its
//! claim into a [`Facts`] system and confirms the trace's conclusion.

mod facts;
mod stages;

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use thiserror::Error;

pub use facts::{AffineForm, Facts};
pub use stages::{
    additivity_lemma, derive_dyadic, derive_equal_weight, derive_exact, derive_rational_weights, derive_stage1,
    derive_value, truncate_bounds, Precision, MAX_FAN_OUT,
};

use crate::equivalence::{equivalent, EquivalenceError, RewriteStep};
use crate::game::{flatten, CompositeGame, Game, GameError};
use crate::scalar::Scalar;

pub type GameId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DerivationError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Equivalence(#[from] EquivalenceError),
    #[error(transparent)]
    Exact(#[from] crate::exact::ExactError),
    #[error("{axiom} side condition failed: {reason}")]
    AxiomRejected { axiom: Axiom, reason: String },
    #[error("entry {entry}: recorded claim differs from the licensed one")]
    ClaimMismatch { entry: usize },
    #[error("entry {entry}: rewrite endpoints do not match the referenced games")]
    EndpointMismatch { entry: usize },
    #[error("entry {entry}: claim contradicts earlier facts")]
    Contradiction { entry: usize },
    #[error("conclusion `{0}` is not entailed")]
    NotEntailed(String),
    #[error("{rule} step did not land on the intended game")]
    LinkMismatch { rule: crate::equivalence::Rule },
    #[error("game id {0} is not in the trace")]
    UnknownGame(GameId),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("precision must be positive")]
    NonPositivePrecision,
    #[error("{0}")]
    TooLarge(String),
    #[error("bounds violated: {0}")]
    Bounds(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Ge,
}

/// `Σ cᵢ·V(gᵢ)  (= | ≥)  rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearClaim<S> {
    pub terms: Vec<(S, GameId)>,
    pub relation: Relation,
    pub rhs: S,
}

impl<S: Scalar> LinearClaim<S> {
    pub fn eq(terms: Vec<(S, GameId)>, rhs: S) -> Self {
        LinearClaim { terms, relation: Relation::Eq, rhs }
    }

    pub fn ge(terms: Vec<(S, GameId)>, rhs: S) -> Self {
        LinearClaim { terms, relation: Relation::Ge, rhs }
    }

    /// `V(a) = V(b)`.
    pub fn same_value(a: GameId, b: GameId) -> Self {
        Self::eq(vec![(S::one(), a), (-S::one(), b)], S::zero())
    }

    /// `V(g) = v`.
    pub fn value_of(g: GameId, v: S) -> Self {
        Self::eq(vec![(S::one(), g)], v)
    }
}

impl<S: Scalar> fmt::Display for LinearClaim<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs = self
            .terms
            .iter()
            .map(|(c, g)| if c.is_one() { format!("V(g{g})") } else { format!("({c})·V(g{g})") })
            .join(" + ");
        let rel = match self.relation {
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        write!(f, "{lhs} {rel} {}", self.rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    Additivity,
    ZeroSum,
    Dominance,
    Substitutivity,
    AdditivityLemma,
    PermutationAverage,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Additivity => "Additivity",
            Axiom::ZeroSum => "ZeroSum",
            Axiom::Dominance => "Dominance",
            Axiom::Substitutivity => "Substitutivity",
            Axiom::AdditivityLemma => "AdditivityLemma",
            Axiom::PermutationAverage => "PermutationAverage",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An axiom applied to specific games of the trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomUse<S> {
    /// Same state and observable; payoff values add pointwise on the occurring spectrum.
    Additivity { a: GameId, b: GameId, sum: GameId },
    /// Same state and observable; `negated` pays the negation of `game`'s values.
    ZeroSum { game: GameId, negated: GameId },
    /// Same state and observable; `shifted` pays `game`'s values plus `k`.
    AdditivityLemma { game: GameId, shifted: GameId, k: S },
    /// Same state and observable; `better` pays at least as much on every occurring eigenvalue.
    Dominance { better: GameId, worse: GameId },
    /// `flat` is the flattening of `outer` with the consequence at each key
    /// eigenvalue replaced by a game already known to have that value.
    Substitutivity { outer: GameId, nested: BTreeMap<S, GameId>, flat: GameId },
    /// Equal-weight game with distinct eigenvalues on its support: averaging
    /// over permuted payoffs gives `n·V = Σ values`.
    PermutationAverage { game: GameId },
}

impl<S: Scalar> AxiomUse<S> {
    pub fn axiom(&self) -> Axiom {
        match self {
            AxiomUse::Additivity { .. } => Axiom::Additivity,
            AxiomUse::ZeroSum { .. } => Axiom::ZeroSum,
            AxiomUse::AdditivityLemma { .. } => Axiom::AdditivityLemma,
            AxiomUse::Dominance { .. } => Axiom::Dominance,
            AxiomUse::Substitutivity { .. } => Axiom::Substitutivity,
            AxiomUse::PermutationAverage { .. } => Axiom::PermutationAverage,
        }
    }

    pub fn games(&self) -> Vec<GameId> {
        match self {
            AxiomUse::Additivity { a, b, sum } => vec![*a, *b, *sum],
            AxiomUse::ZeroSum { game, negated } => vec![*game, *negated],
            AxiomUse::AdditivityLemma { game, shifted, .. } => vec![*game, *shifted],
            AxiomUse::Dominance { better, worse } => vec![*better, *worse],
            AxiomUse::Substitutivity { outer, nested, flat } => {
                let mut v = vec![*outer];
                v.extend(nested.values().copied());
                v.push(*flat);
                v
            }
            AxiomUse::PermutationAverage { game } => vec![*game],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step<S> {
    Rewrite { from: GameId, to: GameId, step: RewriteStep<S> },
    Axiom(AxiomUse<S>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry<S> {
    pub step: Step<S>,
    pub claim: LinearClaim<S>,
    pub justification: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationTrace<S> {
    pub games: Vec<Game<S>>,
    pub entries: Vec<TraceEntry<S>>,
    /// The game whose value the trace determines.
    pub subject: GameId,
    pub conclusion: Vec<LinearClaim<S>>,
}

impl<S: Scalar> DerivationTrace<S> {
    /// Re-checks every entry and the conclusion; returns the resulting facts.
    pub fn verify(&self) -> Result<Facts<S>, DerivationError> {
        let mut facts = Facts::new();
        for (k, entry) in self.entries.iter().enumerate() {
            let licensed = license(&entry.step, &self.games, &facts, k)?;
            if licensed != entry.claim {
                return Err(DerivationError::ClaimMismatch { entry: k });
            }
            facts.add(&licensed).map_err(|_| DerivationError::Contradiction { entry: k })?;
        }
        self.game(self.subject)?;
        for c in &self.conclusion {
            if !facts.entails(c) {
                return Err(DerivationError::NotEntailed(c.to_string()));
            }
        }
        Ok(facts)
    }

    pub fn game(&self, id: GameId) -> Result<&Game<S>, DerivationError> {
        self.games.get(id).ok_or(DerivationError::UnknownGame(id))
    }

    pub fn rewrite_steps(&self) -> impl Iterator<Item = &RewriteStep<S>> {
        self.entries.iter().filter_map(|e| match &e.step {
            Step::Rewrite { step, .. } => Some(step),
            Step::Axiom(_) => None,
        })
    }

    pub fn axiom_uses(&self) -> impl Iterator<Item = &AxiomUse<S>> {
        self.entries.iter().filter_map(|e| match &e.step {
            Step::Axiom(a) => Some(a),
            Step::Rewrite { .. } => None,
        })
    }
}

fn lookup<S: Scalar>(games: &[Game<S>], id: GameId) -> Result<&Game<S>, DerivationError> {
    games.get(id).ok_or(DerivationError::UnknownGame(id))
}

fn reject(axiom: Axiom, reason: impl Into<String>) -> DerivationError {
    DerivationError::AxiomRejected { axiom, reason: reason.into() }
}

/// Occurring values of two or more games sharing one state and observable.
fn shared_realization<S: Scalar>(
    axiom: Axiom,
    games: &[&Game<S>],
) -> Result<Vec<BTreeMap<S, S>>, DerivationError> {
    let first = games[0];
    for g in &games[1..] {
        if g.state != first.state || g.observable != first.observable {
            return Err(reject(axiom, "games do not share a state and observable"));
        }
    }
    games.iter().map(|g| g.occurring_values().map_err(DerivationError::from)).collect()
}

/// Checks the step against the games and returns the claim it licenses.
pub(crate) fn license<S: Scalar>(
    step: &Step<S>,
    games: &[Game<S>],
    facts: &Facts<S>,
    entry: usize,
) -> Result<LinearClaim<S>, DerivationError> {
    match step {
        Step::Rewrite { from, to, step } => {
            if lookup(games, *from)? != &step.before || lookup(games, *to)? != &step.after {
                return Err(DerivationError::EndpointMismatch { entry });
            }
            step.replay()?;
            Ok(LinearClaim::same_value(*from, *to))
        }
        Step::Axiom(a) => license_axiom(a, games, facts),
    }
}

fn license_axiom<S: Scalar>(
    a: &AxiomUse<S>,
    games: &[Game<S>],
    facts: &Facts<S>,
) -> Result<LinearClaim<S>, DerivationError> {
    let axiom = a.axiom();
    let one = S::one;
    match a {
        AxiomUse::Additivity { a, b, sum } => {
            let v = shared_realization(axiom, &[lookup(games, *a)?, lookup(games, *b)?, lookup(games, *sum)?])?;
            for (x, va) in &v[0] {
                if va.clone() + v[1][x].clone() != v[2][x] {
                    return Err(reject(axiom, format!("values at eigenvalue {x} do not add up")));
                }
            }
            Ok(LinearClaim::eq(vec![(one(), *a), (one(), *b), (-one(), *sum)], S::zero()))
        }
        AxiomUse::ZeroSum { game, negated } => {
            let v = shared_realization(axiom, &[lookup(games, *game)?, lookup(games, *negated)?])?;
            if v[0].iter().any(|(x, val)| v[1][x] != -val.clone()) {
                return Err(reject(axiom, "payoff is not negated pointwise"));
            }
            Ok(LinearClaim::eq(vec![(one(), *game), (one(), *negated)], S::zero()))
        }
        AxiomUse::AdditivityLemma { game, shifted, k } => {
            let v = shared_realization(axiom, &[lookup(games, *game)?, lookup(games, *shifted)?])?;
            if v[0].iter().any(|(x, val)| v[1][x] != val.clone() + k.clone()) {
                return Err(reject(axiom, format!("payoff is not shifted by {k} pointwise")));
            }
            Ok(LinearClaim::eq(vec![(one(), *shifted), (-one(), *game)], k.clone()))
        }
        AxiomUse::Dominance { better, worse } => {
            let v = shared_realization(axiom, &[lookup(games, *better)?, lookup(games, *worse)?])?;
            let mut strict = false;
            for (x, vb) in &v[0] {
                let vw = &v[1][x];
                if vb < vw {
                    return Err(reject(axiom, format!("worse game pays more at eigenvalue {x}")));
                }
                strict |= vb > vw;
            }
            let terms = vec![(one(), *better), (-one(), *worse)];
            Ok(if strict { LinearClaim::ge(terms, S::zero()) } else { LinearClaim::eq(terms, S::zero()) })
        }
        AxiomUse::Substitutivity { outer, nested, flat } => {
            let og = lookup(games, *outer)?;
            let values = og.occurring_values()?;
            let mut composite = CompositeGame::from_game(og);
            for (x, h) in nested {
                let v = values.get(x).ok_or_else(|| reject(axiom, format!("{x} is not an occurring eigenvalue")))?;
                if !facts.entails(&LinearClaim::value_of(*h, v.clone())) {
                    return Err(reject(axiom, format!("value of nested game g{h} is not known to equal {v}")));
                }
                composite.nest(x.clone(), CompositeGame::from_game(lookup(games, *h)?));
            }
            if !equivalent(&flatten(&composite)?, lookup(games, *flat)?)? {
                return Err(reject(axiom, "flat game is not the flattened composite"));
            }
            Ok(LinearClaim::same_value(*flat, *outer))
        }
        AxiomUse::PermutationAverage { game } => {
            let g = lookup(games, *game)?;
            let (n, total) = check_permutation_average(g)?;
            Ok(LinearClaim::eq(vec![(S::from_int(n as i64), *game)], total))
        }
    }
}

/// Largest support on which the full symmetric group is enumerated; above it
/// the cyclic group is used, which already makes the permuted payoffs sum to
/// a constant.
pub const FULL_GROUP_LIMIT: usize = 6;

/// Checks the permutation-average side conditions; returns `(n, Σ values)`.
fn check_permutation_average<S: Scalar>(g: &Game<S>) -> Result<(usize, S), DerivationError> {
    let axiom = Axiom::PermutationAverage;
    let base = crate::game::canonicalize(g)?;
    let n = g.state.len();
    let w = S::ratio(1, n as i64);
    let mut eigen = Vec::with_capacity(n);
    for (i, amp) in g.state.iter() {
        if *amp.weight() != w {
            return Err(reject(axiom, format!("branch `{i}` has weight {} rather than {w}", amp.weight())));
        }
        eigen.push(g.observable.get(i).expect("validated").clone());
    }
    if eigen.iter().unique().count() != n {
        return Err(reject(axiom, "support eigenvalues are not distinct"));
    }
    let cons: Vec<_> = eigen.iter().map(|x| &g.payoff[x]).collect();
    let values: Vec<S> = cons.iter().map(|c| c.require_value().cloned()).collect::<Result<_, _>>()?;

    // Consequences by label id; a permuted-payoff game on equal weights has
    // canonical form "count(label) / n", so comparing counts compares forms.
    let labels: Vec<&str> = base.branches().iter().map(|(c, _)| c.label.as_str()).collect();
    let label_id: Vec<usize> =
        cons.iter().map(|c| labels.binary_search(&c.label.as_str()).expect("label from canonical form")).collect();
    let mut base_counts = vec![0usize; labels.len()];
    for &l in &label_id {
        base_counts[l] += 1;
    }
    for (l, (_, weight)) in base.branches().iter().enumerate() {
        if *weight != S::from_int(base_counts[l] as i64) * w.clone() {
            return Err(reject(axiom, "canonical weights are not label counts over n"));
        }
    }

    let group: Vec<Vec<usize>> = if n <= FULL_GROUP_LIMIT {
        (0..n).permutations(n).collect()
    } else {
        (0..n).map(|s| (0..n).map(|i| (i + s) % n).collect()).collect()
    };
    // hits[i][j] = number of group elements sending position i to position j.
    let mut hits = vec![vec![0usize; n]; n];
    for sigma in &group {
        let mut counts = vec![0usize; labels.len()];
        for (i, &j) in sigma.iter().enumerate() {
            counts[label_id[j]] += 1;
            hits[i][j] += 1;
        }
        if counts != base_counts {
            return Err(reject(axiom, "a permuted-payoff game has a different canonical form"));
        }
    }
    if hits.iter().any(|row| row != &hits[0]) {
        return Err(reject(axiom, "permuted payoffs do not sum to a constant"));
    }
    // Σ_σ 𝒫_σ = (|G|/n)·Σ values on every branch, and each of the |G| games is worth V(g).
    let per_position: usize = hits[0].iter().sum();
    if per_position != group.len() || hits[0].iter().any(|&h| h * n != group.len()) {
        return Err(reject(axiom, "group does not act transitively"));
    }
    let total = values.into_iter().fold(S::zero(), |acc, v| acc + v);
    Ok((n, total))
}
