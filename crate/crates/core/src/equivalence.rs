//! Checked equivalence rewrites.
//!
//! Every `apply_*` validates the rule's preconditions, builds the rewritten
//! game, and then confirms that the two canonical forms agree. A canonical
//! mismatch after a passed precondition is reported as
//! [`EquivalenceError::Unsound`] and indicates a bug in the rule itself.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::exact::{Amplitude, BasisIndex, ExactError, GeneralizedPermutation, State};
use crate::game::{canonicalize, Game, GameError, Observable, Payoff};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquivalenceError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("{rule} precondition failed: {reason}")]
    Precondition { rule: Rule, reason: String },
    #[error("MET dimension mismatch: eigenvalue {x} has multiplicity {dx} but its image {px} has {dpx}")]
    DimensionMismatch { x: String, dx: usize, px: String, dpx: usize },
    #[error("{rule} produced a game with a different canonical form")]
    Unsound { rule: Rule },
    #[error("replayed {rule} step does not reproduce its recorded result")]
    ReplayMismatch { rule: Rule },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Pet,
    Met,
    OpSymmetry,
    StateSymmetry,
    Oet,
    Set,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Pet => "PET",
            Rule::Met => "MET",
            Rule::OpSymmetry => "OpSymmetry",
            Rule::StateSymmetry => "StateSymmetry",
            Rule::Oet => "OET",
            Rule::Set => "SET",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where each support index of the source goes under SET, and which
/// zero-weight indices the target space adds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding<S> {
    /// Source index → list of (target index, fraction of the source weight).
    /// A plain relabeling is a single target with fraction 1.
    pub targets: BTreeMap<BasisIndex, Vec<(BasisIndex, S)>>,
    /// Zero-weight indices of the target space with their eigenvalues.
    pub extra: BTreeMap<BasisIndex, S>,
}

impl<S: Scalar> Embedding<S> {
    pub fn relabel(map: impl IntoIterator<Item = (BasisIndex, BasisIndex)>) -> Self {
        Embedding {
            targets: map.into_iter().map(|(a, b)| (a, vec![(b, S::one())])).collect(),
            extra: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleParams<S> {
    Pet { f: BTreeMap<S, S> },
    Met { u: GeneralizedPermutation<S>, pi: BTreeMap<S, S> },
    OpSymmetry { u: GeneralizedPermutation<S> },
    StateSymmetry { f: BTreeMap<S, S> },
    Oet { observable: Observable<S>, payoff: Payoff<S> },
    Set { embedding: Embedding<S> },
}

impl<S: Scalar> RuleParams<S> {
    pub fn rule(&self) -> Rule {
        match self {
            RuleParams::Pet { .. } => Rule::Pet,
            RuleParams::Met { .. } => Rule::Met,
            RuleParams::OpSymmetry { .. } => Rule::OpSymmetry,
            RuleParams::StateSymmetry { .. } => Rule::StateSymmetry,
            RuleParams::Oet { .. } => Rule::Oet,
            RuleParams::Set { .. } => Rule::Set,
        }
    }

    /// Short human-readable description of the parameters.
    pub fn summary(&self) -> String {
        fn map<S: Scalar>(f: &BTreeMap<S, S>) -> String {
            let parts: Vec<String> = f.iter().map(|(a, b)| format!("{a}->{b}")).collect();
            format!("{{{}}}", parts.join(", "))
        }
        match self {
            RuleParams::Pet { f } => format!("f = {}", map(f)),
            RuleParams::Met { u, pi } => {
                let moves: Vec<String> = u.targets().iter().map(|(a, b)| format!("{a}->{b}")).collect();
                format!("u = {{{}}} with {} phases, pi = {}", moves.join(", "), u.phases().len(), map(pi))
            }
            RuleParams::OpSymmetry { u } => {
                let moves: Vec<String> =
                    u.targets().iter().filter(|(a, b)| a != b).map(|(a, b)| format!("{a}->{b}")).collect();
                format!("u moves {{{}}} with {} phases", moves.join(", "), u.phases().len())
            }
            RuleParams::StateSymmetry { f } => format!("f = {}", map(f)),
            RuleParams::Oet { observable, payoff } => {
                format!("new observable on {} indices, payoff on {} eigenvalues", observable.len(), payoff.len())
            }
            RuleParams::Set { embedding } => {
                let fans = embedding.targets.values().map(Vec::len).sum::<usize>();
                format!(
                    "{} support indices onto {} targets, {} extra indices",
                    embedding.targets.len(),
                    fans,
                    embedding.extra.len()
                )
            }
        }
    }
}

/// A rewrite together with the games it relates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep<S> {
    pub params: RuleParams<S>,
    pub before: Game<S>,
    pub after: Game<S>,
}

impl<S: Scalar> RewriteStep<S> {
    pub fn rule(&self) -> Rule {
        self.params.rule()
    }

    /// Re-derives `after` from `before` and the parameters.
    pub fn replay(&self) -> Result<(), EquivalenceError> {
        let again = apply(&self.before, &self.params)?;
        if again.after != self.after {
            return Err(EquivalenceError::ReplayMismatch { rule: self.rule() });
        }
        Ok(())
    }
}

pub fn apply<S: Scalar>(g: &Game<S>, params: &RuleParams<S>) -> Result<RewriteStep<S>, EquivalenceError> {
    match params {
        RuleParams::Pet { f } => apply_pet(g, f),
        RuleParams::Met { u, pi } => apply_met(g, u, pi),
        RuleParams::OpSymmetry { u } => apply_op_symmetry(g, u),
        RuleParams::StateSymmetry { f } => apply_state_symmetry(g, f),
        RuleParams::Oet { observable, payoff } => apply_oet(g, observable.clone(), payoff.clone()),
        RuleParams::Set { embedding } => apply_set(g, embedding),
    }
}

fn precondition(rule: Rule, reason: impl Into<String>) -> EquivalenceError {
    EquivalenceError::Precondition { rule, reason: reason.into() }
}

fn finish<S: Scalar>(params: RuleParams<S>, before: &Game<S>, after: Game<S>) -> Result<RewriteStep<S>, EquivalenceError> {
    let rule = params.rule();
    after.validate()?;
    if canonicalize(before)? != canonicalize(&after)? {
        return Err(EquivalenceError::Unsound { rule });
    }
    Ok(RewriteStep { params, before: before.clone(), after })
}

/// A bijection of `domain` onto itself.
fn is_bijection_on<S: Scalar>(f: &BTreeMap<S, S>, domain: &BTreeSet<S>) -> bool {
    let keys: BTreeSet<&S> = f.keys().collect();
    let image: BTreeSet<&S> = f.values().collect();
    keys.len() == domain.len() && keys.iter().all(|k| domain.contains(*k)) && image == keys
}

/// Payoff Equivalence: measure `f(X)` and pay `𝒫∘f⁻¹`.
///
/// `f` must be defined on the occurring spectrum and may merge two occurring
/// eigenvalues only if their payoffs are equal. Zero-weight indices whose
/// eigenvalue `f` leaves undefined are dropped from the observable.
pub fn apply_pet<S: Scalar>(g: &Game<S>, f: &BTreeMap<S, S>) -> Result<RewriteStep<S>, EquivalenceError> {
    g.validate()?;
    let occurring = g.occurring_spectrum();
    let mut preimage: BTreeMap<&S, &S> = BTreeMap::new();
    for x in &occurring {
        let fx = f.get(x).ok_or_else(|| precondition(Rule::Pet, format!("f undefined on occurring eigenvalue {x}")))?;
        if let Some(prev) = preimage.get(fx) {
            if g.payoff[*prev] != g.payoff[x] {
                return Err(precondition(
                    Rule::Pet,
                    format!("f merges {prev} and {x} onto {fx} but their payoffs differ"),
                ));
            }
        } else {
            preimage.insert(fx, x);
        }
    }
    let observable: Observable<S> =
        g.observable.iter().filter_map(|(i, x)| f.get(x).map(|fx| (i.clone(), fx.clone()))).collect();
    let mut payoff = Payoff::new();
    for (y, x) in &preimage {
        payoff.insert((*y).clone(), g.payoff[*x].clone());
    }
    for (x, fx) in f {
        if !payoff.contains_key(fx) {
            if let Some(c) = g.payoff.get(x) {
                payoff.insert(fx.clone(), c.clone());
            }
        }
    }
    let after = Game::new(g.state.clone(), observable, payoff);
    finish(RuleParams::Pet { f: f.clone() }, g, after)
}

/// Measurement Equivalence: `⟨U|ψ⟩, UXU†, 𝒫⟩`.
///
/// `u` must be defined on every index of the observable and carry the
/// `x`-eigensubspace onto the `π(x)`-eigensubspace.
pub fn apply_met<S: Scalar>(
    g: &Game<S>,
    u: &GeneralizedPermutation<S>,
    pi: &BTreeMap<S, S>,
) -> Result<RewriteStep<S>, EquivalenceError> {
    g.validate()?;
    let spectrum = g.observable.spectrum();
    if !is_bijection_on(pi, &spectrum) {
        return Err(precondition(Rule::Met, "pi is not a permutation of the spectrum"));
    }
    let domain: BTreeSet<&BasisIndex> = u.domain().collect();
    let indices: BTreeSet<&BasisIndex> = g.observable.indices().collect();
    if domain != indices {
        return Err(precondition(Rule::Met, "u's domain differs from the observable's index set"));
    }
    let dims = g.observable.multiplicities();
    for (x, px) in pi {
        let (dx, dpx) = (dims[x], dims[px]);
        if dx != dpx {
            return Err(EquivalenceError::DimensionMismatch { x: x.to_string(), dx, px: px.to_string(), dpx });
        }
    }
    let mut observable = Observable::new();
    for (i, x) in g.observable.iter() {
        let j = u.image(i).expect("domain checked");
        if g.observable.get(j) != pi.get(x) {
            return Err(precondition(
                Rule::Met,
                format!("u sends `{i}` (eigenvalue {x}) outside the {}-eigensubspace", pi[x]),
            ));
        }
        observable.insert(j.clone(), x.clone());
    }
    let after = Game::new(u.apply(&g.state)?, observable, g.payoff.clone());
    finish(RuleParams::Met { u: u.clone(), pi: pi.clone() }, g, after)
}

/// Operator Symmetry: `⟨U|ψ⟩, X, 𝒫⟩` for `u` preserving every eigensubspace.
pub fn apply_op_symmetry<S: Scalar>(
    g: &Game<S>,
    u: &GeneralizedPermutation<S>,
) -> Result<RewriteStep<S>, EquivalenceError> {
    g.validate()?;
    for i in g.state.support() {
        if !u.contains(i) {
            return Err(ExactError::DomainMismatch(i.to_string()).into());
        }
    }
    for i in u.domain() {
        let x = g
            .observable
            .get(i)
            .ok_or_else(|| precondition(Rule::OpSymmetry, format!("`{i}` is not an index of the observable")))?;
        let j = u.image(i).expect("index in domain");
        if g.observable.get(j) != Some(x) {
            return Err(precondition(Rule::OpSymmetry, format!("u moves `{i}` out of the {x}-eigensubspace")));
        }
    }
    let after = Game::new(u.apply(&g.state)?, g.observable.clone(), g.payoff.clone());
    finish(RuleParams::OpSymmetry { u: u.clone() }, g, after)
}

/// State Symmetry: `⟨|ψ⟩, f(X), 𝒫⟩` when `|ψ⟩` is invariant under the induced `U_f`.
pub fn apply_state_symmetry<S: Scalar>(g: &Game<S>, f: &BTreeMap<S, S>) -> Result<RewriteStep<S>, EquivalenceError> {
    g.validate()?;
    if !g.observable.is_nondegenerate() {
        return Err(precondition(Rule::StateSymmetry, "observable is degenerate"));
    }
    if !is_bijection_on(f, &g.observable.spectrum()) {
        return Err(precondition(Rule::StateSymmetry, "f is not a permutation of the spectrum"));
    }
    let mut observable = Observable::new();
    for (a, x) in g.observable.iter() {
        let fx = &f[x];
        let b = g.observable.index_of(fx).expect("non-degenerate spectrum");
        if g.state.amplitude(a) != g.state.amplitude(b) {
            return Err(precondition(
                Rule::StateSymmetry,
                format!("state is not invariant: amplitudes at `{a}` and `{b}` differ"),
            ));
        }
        observable.insert(a.clone(), fx.clone());
    }
    let after = Game::new(g.state.clone(), observable, g.payoff.clone());
    finish(RuleParams::StateSymmetry { f: f.clone() }, g, after)
}

/// Operator Equivalence: replace the observable and payoff wherever the state has no weight.
pub fn apply_oet<S: Scalar>(
    g: &Game<S>,
    observable: Observable<S>,
    payoff: Payoff<S>,
) -> Result<RewriteStep<S>, EquivalenceError> {
    g.validate()?;
    for i in g.state.support() {
        if observable.get(i) != g.observable.get(i) {
            return Err(precondition(Rule::Oet, format!("new observable disagrees on support index `{i}`")));
        }
    }
    for x in g.occurring_spectrum() {
        if payoff.get(&x) != g.payoff.get(&x) {
            return Err(precondition(Rule::Oet, format!("new payoff disagrees on occurring eigenvalue {x}")));
        }
    }
    let after = Game::new(g.state.clone(), observable.clone(), payoff.clone());
    finish(RuleParams::Oet { observable, payoff }, g, after)
}

/// State Equivalence: move the game into another index space.
///
/// Each support index is sent to one or more fresh indices carrying the same
/// eigenvalue and phase, splitting its weight by the given fractions.
pub fn apply_set<S: Scalar>(g: &Game<S>, embedding: &Embedding<S>) -> Result<RewriteStep<S>, EquivalenceError> {
    g.validate()?;
    let support: BTreeSet<&BasisIndex> = g.state.support().collect();
    let sources: BTreeSet<&BasisIndex> = embedding.targets.keys().collect();
    if support != sources {
        return Err(precondition(Rule::Set, "embedding sources must be exactly the state's support"));
    }
    let mut state = State::new();
    let mut observable = Observable::new();
    let mut seen = BTreeSet::new();
    for (src, fans) in &embedding.targets {
        let amp = g.state.amplitude(src);
        let x = g.observable.get(src).expect("validated");
        let mut total = S::zero();
        for (dst, frac) in fans {
            if !frac.is_positive() {
                return Err(precondition(Rule::Set, format!("non-positive fraction for `{dst}`")));
            }
            if !seen.insert(dst) || embedding.extra.contains_key(dst) {
                return Err(precondition(Rule::Set, format!("embedding is not injective at `{dst}`")));
            }
            total = total + frac.clone();
            let piece = Amplitude::new(amp.weight().clone() * frac.clone(), amp.phase().clone())?;
            state.insert(dst.clone(), piece);
            observable.insert(dst.clone(), x.clone());
        }
        if !total.is_one() {
            return Err(precondition(Rule::Set, format!("fractions for `{src}` sum to {total}")));
        }
    }
    for (i, x) in &embedding.extra {
        observable.insert(i.clone(), x.clone());
    }
    let after = Game::new(state, observable, g.payoff.clone());
    finish(RuleParams::Set { embedding: embedding.clone() }, g, after)
}

/// True iff the two games have the same canonical form.
pub fn equivalent<S: Scalar>(g1: &Game<S>, g2: &Game<S>) -> Result<bool, GameError> {
    Ok(canonicalize(g1)? == canonicalize(g2)?)
}
