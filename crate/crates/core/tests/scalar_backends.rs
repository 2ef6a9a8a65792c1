//! The library runs over fixed-width rationals as well as the default big rationals.

use num_rational::{Ratio, Rational64};
use qgame_core::derivation::{derive_value, Precision};
use qgame_core::equivalence::apply_pet;
use qgame_core::game::{Consequence, Game};
use qgame_core::inference::{strategy_eu, RepeatedMeasurement};
use qgame_core::probability::{uniqueness_search, Measurement, Verdict};
use qgame_core::Scalar;

fn exercise<S: Scalar>() {
    let w = [S::ratio(1, 6), S::ratio(1, 3), S::ratio(1, 2)];
    let v = [S::ratio(-2, 1), S::ratio(3, 4), S::ratio(5, 1)];
    let g = Game::from_weights(w.iter().cloned().zip(v.iter().cloned().map(Consequence::numeric))).unwrap();
    let eu = g.expected_utility().unwrap();
    let ((lo, hi), trace) = derive_value(&g, &Precision::new(S::ratio(1, 100)).unwrap()).unwrap();
    assert_eq!((lo, hi), (eu.clone(), eu));
    trace.verify().unwrap();

    let f = [(S::ratio(0, 1), S::ratio(7, 1)), (S::ratio(1, 1), S::ratio(8, 1)), (S::ratio(2, 1), S::ratio(9, 1))];
    apply_pet(&g, &f.into_iter().collect()).unwrap();

    let m = Measurement::of_game(&g).unwrap();
    assert_eq!(uniqueness_search(&m, 6).unwrap().verdict, Verdict::Unique);

    let rm = RepeatedMeasurement::new(6, S::ratio(1, 2), S::one(), -S::one(), S::zero()).unwrap();
    assert_eq!(strategy_eu(&rm).unwrap(), S::zero());
}

#[test]
fn rational64() {
    exercise::<Rational64>();
}

#[test]
fn ratio_i128() {
    exercise::<Ratio<i128>>();
}

#[test]
fn big_rational() {
    exercise::<qgame_core::Rational>();
}
