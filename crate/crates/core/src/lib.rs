//! Exact calculus of quantum games.
//!
//! A quantum game is a state, an observable measured on it, and a payoff
//! assigning a consequence to each eigenvalue. This crate provides:
//!
//! * exact amplitudes and generalized permutations ([`exact`]),
//! * games, canonical forms and composite-game flattening ([`game`]),
//! * checked equivalence rewrites ([`equivalence`]),
//! * derivation traces that replay the decision-theoretic derivation of the
//!   weight-expectation rule on concrete games ([`derivation`]),
//! * qualitative probability over measurement events and a finite VNM
//!   checker ([`probability`]),
//! * additive value functions from preference oracles ([`value`]),
//! * the repeated-measurement betting computation ([`inference`]).
//!
//! Everything is generic over a [`Scalar`]; the aliases below fix it to
//! arbitrary-precision rationals.

pub mod derivation;
pub mod equivalence;
pub mod exact;
pub mod game;
pub mod inference;
pub mod json;
pub mod probability;
pub mod scalar;
pub mod value;

pub use exact::{BasisIndex, ExactError};
pub use game::GameError;
pub use scalar::{parse_scalar, Scalar};

/// Arbitrary-precision rational; the default scalar.
pub type Rational = num_rational::BigRational;

pub type Amplitude = exact::Amplitude<Rational>;
pub type State = exact::State<Rational>;
pub type GeneralizedPermutation = exact::GeneralizedPermutation<Rational>;
pub type Observable = game::Observable<Rational>;
pub type Consequence = game::Consequence<Rational>;
pub type Game = game::Game<Rational>;
pub type CanonicalGame = game::CanonicalGame<Rational>;
pub type CompositeGame = game::CompositeGame<Rational>;
pub type RewriteStep = equivalence::RewriteStep<Rational>;
pub type DerivationTrace = derivation::DerivationTrace<Rational>;
pub type RepeatedMeasurement = inference::RepeatedMeasurement<Rational>;
pub type Measurement = probability::Measurement<Rational>;
pub type ValueCut<E> = value::ValueCut<Rational, E>;

/// Shorthand for `Rational::ratio(n, d)`.
pub fn rat(numer: i64, denom: i64) -> Rational {
    <Rational as Scalar>::ratio(numer, denom)
}
