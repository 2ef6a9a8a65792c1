//! Amplitudes in weight/phase form and the generalized permutations that act on them.
//!
//! An amplitude is stored as `(|α|², arg α / 2π)`. Products and basis
//! permutations are closed in this representation; amplitude addition is not
//! offered at all, so two amplitudes can never be collapsed onto one basis
//! vector.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("negative weight {0}")]
    NegativeWeight(String),
    #[error("basis index `{0}` is outside the operator's domain")]
    DomainMismatch(String),
    #[error("not a bijection on its index set: {0}")]
    NotBijective(String),
    #[error("phase given for index `{0}` outside the permutation's domain")]
    StrayPhase(String),
}

/// Opaque label of a vector in the decoherence-preferred basis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(pub String);

impl BasisIndex {
    pub fn new(label: impl Into<String>) -> Self {
        BasisIndex(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for BasisIndex {
    fn from(s: &str) -> Self {
        BasisIndex(s.to_owned())
    }
}

impl From<String> for BasisIndex {
    fn from(s: String) -> Self {
        BasisIndex(s)
    }
}

/// A complex amplitude held as squared modulus and phase (fraction of a turn).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Amplitude<S> {
    weight: S,
    phase: S,
}

impl<S: Scalar> Amplitude<S> {
    /// Phase is reduced into `[0, 1)`; a zero weight forces a zero phase.
    pub fn new(weight: S, phase: S) -> Result<Self, ExactError> {
        if weight.is_negative() {
            return Err(ExactError::NegativeWeight(weight.to_string()));
        }
        let phase = if weight.is_zero() { S::zero() } else { phase.fract_turn() };
        Ok(Amplitude { weight, phase })
    }

    /// Real non-negative amplitude `√weight`.
    pub fn real(weight: S) -> Result<Self, ExactError> {
        Self::new(weight, S::zero())
    }

    pub fn zero() -> Self {
        Amplitude { weight: S::zero(), phase: S::zero() }
    }

    pub fn one() -> Self {
        Amplitude { weight: S::one(), phase: S::zero() }
    }

    pub fn weight(&self) -> &S {
        &self.weight
    }

    pub fn phase(&self) -> &S {
        &self.phase
    }

    pub fn is_zero(&self) -> bool {
        self.weight.is_zero()
    }

    pub fn rotate(&self, turns: &S) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Amplitude { weight: self.weight.clone(), phase: (self.phase.clone() + turns.clone()).fract_turn() }
    }
}

/// `amp_mul`: weights multiply, phases add modulo one turn.
impl<S: Scalar> std::ops::Mul for &Amplitude<S> {
    type Output = Amplitude<S>;

    fn mul(self, rhs: &Amplitude<S>) -> Amplitude<S> {
        let weight = self.weight.clone() * rhs.weight.clone();
        if weight.is_zero() {
            return Amplitude::zero();
        }
        Amplitude { weight, phase: (self.phase.clone() + rhs.phase.clone()).fract_turn() }
    }
}

impl<S: Scalar> std::ops::Mul for Amplitude<S> {
    type Output = Amplitude<S>;

    fn mul(self, rhs: Amplitude<S>) -> Amplitude<S> {
        &self * &rhs
    }
}

pub fn amp_mul<S: Scalar>(a: &Amplitude<S>, b: &Amplitude<S>) -> Amplitude<S> {
    a * b
}

/// A pure state expanded in the preferred basis. Only nonzero amplitudes are stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State<S> {
    amps: BTreeMap<BasisIndex, Amplitude<S>>,
}

impl<S: Scalar> Default for State<S> {
    fn default() -> Self {
        State { amps: BTreeMap::new() }
    }
}

impl<S: Scalar> State<S> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts, dropping zero amplitudes. Returns the amplitude previously stored at `index`.
    pub fn insert(&mut self, index: BasisIndex, amp: Amplitude<S>) -> Option<Amplitude<S>> {
        if amp.is_zero() {
            self.amps.remove(&index)
        } else {
            self.amps.insert(index, amp)
        }
    }

    pub fn get(&self, index: &BasisIndex) -> Option<&Amplitude<S>> {
        self.amps.get(index)
    }

    /// Amplitude at `index`, zero when absent.
    pub fn amplitude(&self, index: &BasisIndex) -> Amplitude<S> {
        self.amps.get(index).cloned().unwrap_or_else(Amplitude::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisIndex, &Amplitude<S>)> {
        self.amps.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &BasisIndex> {
        self.amps.keys()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn total_weight(&self) -> S {
        self.amps.values().fold(S::zero(), |acc, a| acc + a.weight().clone())
    }

    /// Sorted multiset of branch weights.
    pub fn weight_multiset(&self) -> Vec<S> {
        let mut w: Vec<S> = self.amps.values().map(|a| a.weight().clone()).collect();
        w.sort();
        w
    }
}

impl<S: Scalar> FromIterator<(BasisIndex, Amplitude<S>)> for State<S> {
    fn from_iter<I: IntoIterator<Item = (BasisIndex, Amplitude<S>)>>(iter: I) -> Self {
        let mut s = State::new();
        for (i, a) in iter {
            s.insert(i, a);
        }
        s
    }
}

/// A unitary of the form `|i⟩ ↦ e^{2πi θ_i} |σ(i)⟩`: a basis permutation
/// combined with a diagonal phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneralizedPermutation<S> {
    target: BTreeMap<BasisIndex, BasisIndex>,
    phases: BTreeMap<BasisIndex, S>,
}

impl<S: Scalar> GeneralizedPermutation<S> {
    /// `target` must be a bijection of its key set onto itself. Indices absent
    /// from `phases` get phase zero.
    pub fn new(
        target: BTreeMap<BasisIndex, BasisIndex>,
        phases: BTreeMap<BasisIndex, S>,
    ) -> Result<Self, ExactError> {
        let image: BTreeSet<&BasisIndex> = target.values().collect();
        if image.len() != target.len() {
            return Err(ExactError::NotBijective("two indices share an image".into()));
        }
        if let Some(stray) = image.iter().find(|i| !target.contains_key(**i)) {
            return Err(ExactError::NotBijective(format!("image `{stray}` is outside the domain")));
        }
        if let Some(stray) = phases.keys().find(|i| !target.contains_key(*i)) {
            return Err(ExactError::StrayPhase(stray.to_string()));
        }
        let phases = phases
            .into_iter()
            .map(|(i, p)| (i, p.fract_turn()))
            .filter(|(_, p)| !p.is_zero())
            .collect();
        Ok(GeneralizedPermutation { target, phases })
    }

    pub fn identity<'a>(domain: impl IntoIterator<Item = &'a BasisIndex>) -> Self {
        let target = domain.into_iter().map(|i| (i.clone(), i.clone())).collect();
        GeneralizedPermutation { target, phases: BTreeMap::new() }
    }

    /// Diagonal phase operator on `domain`.
    pub fn diagonal_phase<'a>(
        domain: impl IntoIterator<Item = &'a BasisIndex>,
        phases: BTreeMap<BasisIndex, S>,
    ) -> Result<Self, ExactError> {
        let target = domain.into_iter().map(|i| (i.clone(), i.clone())).collect();
        Self::new(target, phases)
    }

    /// Transposition of `a` and `b` on `domain`.
    pub fn swap<'a>(domain: impl IntoIterator<Item = &'a BasisIndex>, a: &BasisIndex, b: &BasisIndex) -> Self {
        let mut p = Self::identity(domain);
        p.target.insert(a.clone(), b.clone());
        p.target.insert(b.clone(), a.clone());
        p
    }

    pub fn domain(&self) -> impl Iterator<Item = &BasisIndex> {
        self.target.keys()
    }

    pub fn contains(&self, i: &BasisIndex) -> bool {
        self.target.contains_key(i)
    }

    pub fn image(&self, i: &BasisIndex) -> Option<&BasisIndex> {
        self.target.get(i)
    }

    pub fn phase(&self, i: &BasisIndex) -> S {
        self.phases.get(i).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_identity(&self) -> bool {
        self.phases.is_empty() && self.target.iter().all(|(a, b)| a == b)
    }

    pub fn targets(&self) -> &BTreeMap<BasisIndex, BasisIndex> {
        &self.target
    }

    pub fn phases(&self) -> &BTreeMap<BasisIndex, S> {
        &self.phases
    }

    /// `self ∘ inner`: apply `inner` first. Both must share one domain.
    pub fn compose(&self, inner: &Self) -> Result<Self, ExactError> {
        let mut target = BTreeMap::new();
        let mut phases = BTreeMap::new();
        for (i, mid) in &inner.target {
            let out = self.target.get(mid).ok_or_else(|| ExactError::DomainMismatch(mid.to_string()))?;
            target.insert(i.clone(), out.clone());
            phases.insert(i.clone(), inner.phase(i) + self.phase(mid));
        }
        if target.len() != self.target.len() {
            return Err(ExactError::DomainMismatch("composed permutations have different domains".into()));
        }
        Self::new(target, phases)
    }

    /// Applies the operator to `state`: the amplitude at `σ(i)` becomes the
    /// amplitude at `i` rotated by `θ_i`.
    pub fn apply(&self, state: &State<S>) -> Result<State<S>, ExactError> {
        let mut out = State::new();
        for (i, amp) in state.iter() {
            let dest = self.target.get(i).ok_or_else(|| ExactError::DomainMismatch(i.to_string()))?;
            out.insert(dest.clone(), amp.rotate(&self.phase(i)));
        }
        Ok(out)
    }
}

pub fn apply_gperm<S: Scalar>(u: &GeneralizedPermutation<S>, state: &State<S>) -> Result<State<S>, ExactError> {
    u.apply(state)
}
