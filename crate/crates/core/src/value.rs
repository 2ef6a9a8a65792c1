//! Additive value functions recovered from a qualitative preference over an
//! additive structure, and state probabilities recovered from act values.
//!
//! Values are Dedekind cuts of the rationals, located to a chosen dyadic
//! precision by asking the oracle whether `n·y ≻ m·x`.

use std::cmp::Ordering;
use std::fmt::Debug;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValueError {
    #[error("the unit must be strictly preferred to zero")]
    NotPositiveUnit,
    #[error("axiom violation: {0}")]
    AxiomViolation(String),
    #[error("oracle inconsistency: {0}")]
    OracleInconsistency(String),
    #[error("depth must be between 1 and {MAX_DEPTH}")]
    InvalidDepth,
}

/// Largest depth accepted by [`build_value`].
pub const MAX_DEPTH: u32 = 40;
/// Largest doubling of the unit tried before giving up on the Archimedean axiom.
const MAX_DOUBLINGS: u32 = 60;

/// A preference over consequences that can be added together.
pub trait PreferenceOracle {
    type Element: Clone + Debug;

    fn compare(&self, a: &Self::Element, b: &Self::Element) -> Ordering;
    fn add(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn zero(&self) -> Self::Element;
}

/// Integers under their usual order and addition.
#[derive(Debug, Clone, Copy, Default)]
pub struct IntegerOracle;

impl PreferenceOracle for IntegerOracle {
    type Element = i128;

    fn compare(&self, a: &i128, b: &i128) -> Ordering {
        a.cmp(b)
    }

    fn add(&self, a: &i128, b: &i128) -> i128 {
        a + b
    }

    fn zero(&self) -> i128 {
        0
    }
}

/// Exact amounts of money.
#[derive(Debug, Clone, Copy, Default)]
pub struct MoneyOracle<S>(std::marker::PhantomData<S>);

impl<S> MoneyOracle<S> {
    pub fn new() -> Self {
        MoneyOracle(std::marker::PhantomData)
    }
}

impl<S: Scalar + Debug> PreferenceOracle for MoneyOracle<S> {
    type Element = S;

    fn compare(&self, a: &S, b: &S) -> Ordering {
        a.cmp(b)
    }

    fn add(&self, a: &S, b: &S) -> S {
        a.clone() + b.clone()
    }

    fn zero(&self) -> S {
        S::zero()
    }
}

/// Rational bracket `[lower, upper]` around `V(y)/V(unit)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueCut<S, E> {
    pub lower: S,
    pub upper: S,
    pub unit: E,
}

impl<S: Scalar, E> ValueCut<S, E> {
    pub fn width(&self) -> S {
        self.upper.clone() - self.lower.clone()
    }

    pub fn contains(&self, v: &S) -> bool {
        self.lower <= *v && *v <= self.upper
    }

    pub fn midpoint(&self) -> S {
        (self.lower.clone() + self.upper.clone()) / S::from_int(2)
    }
}

/// `[e, 2e, 4e, …]` up to `2^k·e`.
fn doublings<O: PreferenceOracle>(oracle: &O, e: &O::Element, k: u32) -> Vec<O::Element> {
    let mut out = vec![e.clone()];
    for _ in 0..k {
        let last = out.last().expect("non-empty");
        out.push(oracle.add(last, last));
    }
    out
}

/// `m·e` from precomputed doublings of `e`.
fn multiple<O: PreferenceOracle>(oracle: &O, powers: &[O::Element], m: u64) -> O::Element {
    let mut acc = oracle.zero();
    for (bit, p) in powers.iter().enumerate() {
        if m >> bit & 1 == 1 {
            acc = oracle.add(&acc, p);
        }
    }
    acc
}

fn sym(o: Ordering) -> &'static str {
    match o {
        Ordering::Greater => "≻",
        Ordering::Less => "≺",
        Ordering::Equal => "≃",
    }
}

/// Falsification attempts of the weak-order and additive-structure axioms on `samples`.
fn spot_check<O: PreferenceOracle>(oracle: &O, samples: &[O::Element]) -> Result<(), ValueError> {
    let c = |a: &O::Element, b: &O::Element| oracle.compare(a, b);
    let violation = |s: String| Err(ValueError::AxiomViolation(s));
    for a in samples {
        for b in samples {
            if c(a, b) != c(b, a).reverse() {
                return violation(format!("A1: {a:?} {} {b:?} but {b:?} {} {a:?}", sym(c(a, b)), sym(c(b, a))));
            }
            for d in samples {
                if c(a, b).is_ge() && c(b, d).is_ge() && c(a, d).is_lt() {
                    return violation(format!("A1: {a:?} ≽ {b:?} ≽ {d:?} but {a:?} ≺ {d:?}"));
                }
            }
        }
    }
    let zero = oracle.zero();
    for a in samples {
        if !c(&oracle.add(a, &zero), a).is_eq() {
            return violation(format!("A4: {a:?} + 0 is not ≃ {a:?}"));
        }
    }
    let small = &samples[..samples.len().min(5)];
    for a in small {
        for b in small {
            if !c(&oracle.add(a, b), &oracle.add(b, a)).is_eq() {
                return violation(format!("A4: {a:?} + {b:?} is not ≃ {b:?} + {a:?}"));
            }
            for d in small {
                let left = oracle.add(&oracle.add(a, b), d);
                let right = oracle.add(a, &oracle.add(b, d));
                if !c(&left, &right).is_eq() {
                    return violation(format!("A4: ({a:?} + {b:?}) + {d:?} is not ≃ {a:?} + ({b:?} + {d:?})"));
                }
                let shifted = c(&oracle.add(a, d), &oracle.add(b, d));
                if shifted != c(a, b) {
                    return violation(format!(
                        "A2: {a:?} {} {b:?} but {a:?} + {d:?} {} {b:?} + {d:?}",
                        sym(c(a, b)),
                        sym(shifted)
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Largest `m` with `holds(m)`, given `holds(0)`. Exponential search over
/// doublings, then bisection.
fn largest_member(mut holds: impl FnMut(u64) -> bool) -> Option<u64> {
    let mut k = 0;
    while holds(1 << k) {
        k += 1;
        if k > MAX_DOUBLINGS {
            return None;
        }
    }
    let (mut lo, mut hi) = (if k == 0 { 0 } else { 1u64 << (k - 1) }, 1u64 << k);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Brackets `V(y)/V(unit)` in an interval of width `2^-depth`.
pub fn build_value<S: Scalar, O: PreferenceOracle>(
    oracle: &O,
    unit: &O::Element,
    y: &O::Element,
    depth: u32,
) -> Result<ValueCut<S, O::Element>, ValueError> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(ValueError::InvalidDepth);
    }
    let zero = oracle.zero();
    if !oracle.compare(unit, &zero).is_gt() {
        return Err(ValueError::NotPositiveUnit);
    }
    let n = 1i64 << depth;
    let ny = doublings(oracle, y, depth).pop().expect("non-empty");
    let units = doublings(oracle, unit, MAX_DOUBLINGS);

    let sign = oracle.compare(y, &zero);
    // Cut membership `m/n ∈ Val(y)`; for y ≺ 0 the cut locates −V(y).
    let member = |m: u64| -> bool {
        let mx = multiple(oracle, &units, m);
        match sign {
            Ordering::Less => oracle.compare(&zero, &oracle.add(&ny, &mx)).is_gt(),
            _ => oracle.compare(&ny, &mx).is_gt(),
        }
    };
    let m = match sign {
        Ordering::Equal => None,
        _ => Some(largest_member(member).ok_or_else(|| {
            ValueError::AxiomViolation(format!(
                "A3: no multiple of {unit:?} up to 2^{MAX_DOUBLINGS} passes {n}·{y:?}"
            ))
        })?),
    };

    let mut samples = vec![zero.clone(), unit.clone(), y.clone(), oracle.add(unit, y), units[1].clone(), ny.clone()];
    if let Some(m) = m {
        samples.push(multiple(oracle, &units, m));
        samples.push(multiple(oracle, &units, m + 1));
    }
    spot_check(oracle, &samples)?;

    let (lower, upper) = match (sign, m) {
        (Ordering::Greater, Some(m)) => (S::ratio(m as i64, n), S::ratio(m as i64 + 1, n)),
        (Ordering::Less, Some(m)) => (-S::ratio(m as i64 + 1, n), -S::ratio(m as i64, n)),
        _ => (S::zero(), S::zero()),
    };
    Ok(ValueCut { lower, upper, unit: unit.clone() })
}

/// Number of random acts used to validate [`derive_act_probabilities`].
pub const ACT_SAMPLES: usize = 32;

fn indicator<S: Scalar>(len: usize, i: usize, value: &S) -> Vec<S> {
    (0..len).map(|j| if i == j { value.clone() } else { S::zero() }).collect()
}

fn probabilities_for<S: Scalar>(
    states: usize,
    oracle: &impl Fn(&[S]) -> S,
    unit_value: &S,
) -> Result<Vec<S>, ValueError> {
    let mut ps = Vec::with_capacity(states);
    for i in 0..states {
        let v = oracle(&indicator(states, i, unit_value));
        if v.is_negative() {
            return Err(ValueError::OracleInconsistency(format!(
                "indicator act on state {i} has negative value {v}, against Dominance"
            )));
        }
        ps.push(v / unit_value.clone());
    }
    let total = ps.iter().fold(S::zero(), |acc, p| acc + p.clone());
    if !total.is_one() {
        return Err(ValueError::OracleInconsistency(format!("probabilities sum to {total}")));
    }
    Ok(ps)
}

/// Probability of each state, read off the values of indicator acts. The
/// result is validated on seeded random acts for the expected-utility form,
/// additivity, dominance, and independence from the unit.
pub fn derive_act_probabilities<S: Scalar>(
    states: &[String],
    oracle: impl Fn(&[S]) -> S,
    unit_value: &S,
) -> Result<Vec<S>, ValueError> {
    if !unit_value.is_positive() {
        return Err(ValueError::NotPositiveUnit);
    }
    let k = states.len();
    let ps = probabilities_for(k, &oracle, unit_value)?;
    let inconsistent = |s: String| Err(ValueError::OracleInconsistency(s));

    for factor in [2, 3] {
        let other = probabilities_for(k, &oracle, &(unit_value.clone() * S::from_int(factor)))?;
        if other != ps {
            return inconsistent(format!("probabilities change when the unit is scaled by {factor}"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let act = |rng: &mut ChaCha8Rng| -> Vec<S> {
        (0..k).map(|_| S::from_int(rng.gen_range(-6..=6)) * unit_value.clone()).collect()
    };
    let eu = |a: &[S]| a.iter().zip(&ps).fold(S::zero(), |acc, (c, p)| acc + c.clone() * p.clone());
    for _ in 0..ACT_SAMPLES {
        let (a, b) = (act(&mut rng), act(&mut rng));
        let va = oracle(&a);
        if va != eu(&a) {
            return inconsistent(format!("act {} has value {va}, not its expected utility {}", render(&a), eu(&a)));
        }
        let sum: Vec<S> = a.iter().zip(&b).map(|(x, y)| x.clone() + y.clone()).collect();
        if oracle(&sum) != va.clone() + oracle(&b) {
            return inconsistent(format!("acts {} and {} are not additive", render(&a), render(&b)));
        }
        if k > 0 {
            let mut worse = a.clone();
            let i = rng.gen_range(0..k);
            worse[i] = worse[i].clone() - unit_value.clone();
            if oracle(&worse) > va {
                return inconsistent(format!("act {} is dominated by {} yet valued higher", render(&worse), render(&a)));
            }
        }
    }
    Ok(ps)
}

fn render<S: Scalar>(act: &[S]) -> String {
    let parts: Vec<String> = act.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    type R = Rational64;

    fn r(n: i64, d: i64) -> R {
        R::new(n, d)
    }

    #[test]
    fn integer_cut_brackets_target() {
        let cut: ValueCut<R, i128> = build_value(&IntegerOracle, &1, &7, 10).unwrap();
        assert_eq!((cut.lower, cut.upper), (r(7, 1) - r(1, 1024), r(7, 1)));
        assert!(cut.width() <= r(1, 512));
    }

    #[test]
    fn unit_and_zero() {
        let cut: ValueCut<R, i128> = build_value(&IntegerOracle, &3, &3, 6).unwrap();
        assert!(cut.contains(&r(1, 1)));
        let cut: ValueCut<R, i128> = build_value(&IntegerOracle, &3, &0, 6).unwrap();
        assert_eq!((cut.lower, cut.upper), (r(0, 1), r(0, 1)));
    }

    #[test]
    fn negative_branch() {
        let cut: ValueCut<R, i128> = build_value(&IntegerOracle, &2, &-5, 8).unwrap();
        assert!(cut.contains(&r(-5, 2)));
        assert_eq!(cut.width(), r(1, 256));
        assert_eq!(cut.lower, r(-5, 2));
    }

    #[test]
    fn money_cut() {
        let cut: ValueCut<R, R> = build_value(&MoneyOracle::new(), &r(1, 3), &r(5, 7), 12).unwrap();
        assert!(cut.contains(&r(15, 7)));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(build_value::<R, _>(&IntegerOracle, &0, &1, 4), Err(ValueError::NotPositiveUnit));
        assert_eq!(build_value::<R, _>(&IntegerOracle, &1, &1, 0), Err(ValueError::InvalidDepth));
    }

    struct Lexical;

    impl PreferenceOracle for Lexical {
        type Element = (i64, i64);

        fn compare(&self, a: &(i64, i64), b: &(i64, i64)) -> Ordering {
            a.cmp(b)
        }

        fn add(&self, a: &(i64, i64), b: &(i64, i64)) -> (i64, i64) {
            (a.0 + b.0, a.1.saturating_add(b.1))
        }

        fn zero(&self) -> (i64, i64) {
            (0, 0)
        }
    }

    #[test]
    fn non_archimedean_oracle_is_rejected() {
        let err = build_value::<R, _>(&Lexical, &(0, 1), &(1, 0), 4).unwrap_err();
        assert!(matches!(err, ValueError::AxiomViolation(ref s) if s.starts_with("A3")), "{err}");
    }

    struct Lopsided;

    impl PreferenceOracle for Lopsided {
        type Element = i128;

        fn compare(&self, a: &i128, b: &i128) -> Ordering {
            a.cmp(b)
        }

        fn add(&self, a: &i128, b: &i128) -> i128 {
            2 * a + b
        }

        fn zero(&self) -> i128 {
            0
        }
    }

    #[test]
    fn non_additive_oracle_is_rejected() {
        let err = build_value::<R, _>(&Lopsided, &1, &3, 4).unwrap_err();
        assert!(matches!(err, ValueError::AxiomViolation(ref s) if s.starts_with("A4")), "{err}");
    }

    fn eu_oracle(weights: Vec<R>) -> impl Fn(&[R]) -> R {
        move |act: &[R]| act.iter().zip(&weights).map(|(c, w)| c * w).sum()
    }

    fn states(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("s{i}")).collect()
    }

    #[test]
    fn recovers_weights() {
        let w = vec![r(1, 2), r(1, 2)];
        assert_eq!(derive_act_probabilities(&states(2), eu_oracle(w.clone()), &r(1, 1)).unwrap(), w);
        let w = vec![r(1, 6), r(1, 3), r(1, 2)];
        assert_eq!(derive_act_probabilities(&states(3), eu_oracle(w.clone()), &r(5, 2)).unwrap(), w);
    }

    #[test]
    fn negative_indicator_is_inconsistent() {
        let oracle = eu_oracle(vec![r(-1, 2), r(3, 2)]);
        let err = derive_act_probabilities(&states(2), oracle, &r(1, 1)).unwrap_err();
        assert!(matches!(err, ValueError::OracleInconsistency(_)));
    }

    #[test]
    fn unnormalized_oracle_is_inconsistent() {
        let err = derive_act_probabilities(&states(2), eu_oracle(vec![r(1, 1), r(1, 1)]), &r(1, 1)).unwrap_err();
        assert!(matches!(err, ValueError::OracleInconsistency(ref s) if s.contains("sum")));
    }

    #[test]
    fn nonlinear_oracle_is_inconsistent() {
        let oracle = |act: &[R]| {
            let eu: R = act.iter().map(|c| c / 2).sum();
            if act.iter().all(|c| *c >= R::from_integer(0)) { eu } else { eu * 2 }
        };
        let err = derive_act_probabilities(&states(2), oracle, &r(1, 1)).unwrap_err();
        assert!(matches!(err, ValueError::OracleInconsistency(_)));
    }
}
