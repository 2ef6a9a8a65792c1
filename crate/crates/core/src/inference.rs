//! Betting on observed frequencies after many repetitions of one measurement.
//!
//! Outcome "0" has weight `p` and pays `x`; outcome "1" has weight `q = 1 − p`
//! and pays `y`. After `n` repetitions the agent accepts the bet when the
//! observed frequency of "0" reaches the break-even frequency `p₀`.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InferenceError {
    #[error("m = {m} exceeds n = {n}")]
    Domain { m: u32, n: u32 },
    #[error("p = {0} is outside [0, 1]")]
    InvalidWeight(String),
    #[error("x = y makes the break-even frequency undefined")]
    DegenerateBet,
    #[error("p must lie strictly between 0 and 1 for the approximation")]
    DegenerateWeight,
    #[error("n must be positive")]
    NoRepetitions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepeatedMeasurement<S> {
    pub n: u32,
    pub p: S,
    pub x: S,
    pub y: S,
    pub epsilon: S,
}

impl<S: Scalar> RepeatedMeasurement<S> {
    pub fn new(n: u32, p: S, x: S, y: S, epsilon: S) -> Result<Self, InferenceError> {
        if n == 0 {
            return Err(InferenceError::NoRepetitions);
        }
        if p.is_negative() || p > S::one() {
            return Err(InferenceError::InvalidWeight(p.to_string()));
        }
        Ok(RepeatedMeasurement { n, p, x, y, epsilon })
    }

    pub fn q(&self) -> S {
        S::one() - self.p.clone()
    }

    /// Expected payoff of a single measurement, `px + qy`.
    pub fn single_eu(&self) -> S {
        self.p.clone() * self.x.clone() + self.q() * self.y.clone()
    }

    /// Frequency `p₀` at which the bet breaks even against `epsilon`.
    pub fn threshold(&self) -> Result<S, InferenceError> {
        if self.x == self.y {
            return Err(InferenceError::DegenerateBet);
        }
        Ok((self.epsilon.clone() - self.y.clone()) / (self.x.clone() - self.y.clone()))
    }

    /// Whether `m` occurrences of "0" lead the agent to accept. Ties accept.
    pub fn accepts(&self, m: u32) -> Result<bool, InferenceError> {
        Ok(S::from_int(m as i64) >= self.threshold()? * S::from_int(self.n as i64))
    }
}

/// `C(n, m)` as a scalar.
pub fn binomial<S: Scalar>(n: u32, m: u32) -> S {
    let k = m.min(n - m);
    (0..k).fold(S::one(), |acc, i| acc * S::from_int((n - i) as i64) / S::from_int(i as i64 + 1))
}

/// Total weight of the branches with exactly `m` outcomes "0" in `n` repetitions.
pub fn branch_weight<S: Scalar>(n: u32, m: u32, p: &S) -> Result<S, InferenceError> {
    if m > n {
        return Err(InferenceError::Domain { m, n });
    }
    let q = S::one() - p.clone();
    Ok(binomial::<S>(n, m) * num_traits::pow(p.clone(), m as usize) * num_traits::pow(q, (n - m) as usize))
}

/// Total weight of the branches on which the bet is accepted.
pub fn acceptance_weight<S: Scalar>(rm: &RepeatedMeasurement<S>) -> Result<S, InferenceError> {
    let mut total = S::zero();
    for m in 0..=rm.n {
        if rm.accepts(m)? {
            total = total + branch_weight(rm.n, m, &rm.p)?;
        }
    }
    Ok(total)
}

/// Exact expected utility of the frequency-betting strategy.
pub fn strategy_eu<S: Scalar>(rm: &RepeatedMeasurement<S>) -> Result<S, InferenceError> {
    Ok(acceptance_weight(rm)? * rm.single_eu())
}

/// Rows `(m, branch weight)` for `m = 0..=n`.
pub fn weight_table<S: Scalar>(rm: &RepeatedMeasurement<S>) -> Result<Vec<(u32, S)>, InferenceError> {
    (0..=rm.n).map(|m| Ok((m, branch_weight(rm.n, m, &rm.p)?))).collect()
}

/// Gaussian-tail approximation of [`strategy_eu`].
pub fn gaussian_approx<S: Scalar>(rm: &RepeatedMeasurement<S>) -> Result<f64, InferenceError> {
    if !rm.p.is_positive() || rm.p >= S::one() {
        return Err(InferenceError::DegenerateWeight);
    }
    let p0 = to_float(&rm.threshold()?);
    let p = to_float(&rm.p);
    let q = 1.0 - p;
    let x0 = (rm.n as f64 / (2.0 * p * q)).sqrt() * (p0 - p);
    Ok(to_float(&rm.single_eu()) * 0.5 * libm::erfc(x0))
}

fn to_float<S: Scalar>(v: &S) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// One row of a convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<S> {
    pub n: u32,
    pub exact: S,
    pub approx: f64,
    pub deviation: f64,
}

/// Exact and approximate expected utility for each `n`, other parameters fixed.
pub fn sweep<S: Scalar>(base: &RepeatedMeasurement<S>, ns: &[u32]) -> Result<Vec<SweepRow<S>>, InferenceError> {
    ns.iter()
        .map(|&n| {
            let rm = RepeatedMeasurement::new(n, base.p.clone(), base.x.clone(), base.y.clone(), base.epsilon.clone())?;
            let exact = strategy_eu(&rm)?;
            let approx = gaussian_approx(&rm)?;
            let deviation = (to_float(&exact) - approx).abs();
            Ok(SweepRow { n, exact, approx, deviation })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;
    use num_traits::Signed;

    type R = Rational64;

    fn r(n: i64, d: i64) -> R {
        R::new(n, d)
    }

    #[test]
    fn branch_weight_examples() {
        assert_eq!(branch_weight(5, 5, &r(1, 1)).unwrap(), r(1, 1));
        assert_eq!(branch_weight(5, 3, &r(1, 1)).unwrap(), r(0, 1));
        assert_eq!(branch_weight(2, 1, &r(1, 2)).unwrap(), r(1, 2));
        assert_eq!(branch_weight(4, 2, &r(1, 3)).unwrap(), r(8, 27));
        assert_eq!(branch_weight(4, 5, &r(1, 3)), Err(InferenceError::Domain { m: 5, n: 4 }));
    }

    #[test]
    fn certain_outcome_pays_x() {
        let rm = RepeatedMeasurement::new(7, r(1, 1), r(3, 1), r(-2, 1), r(1, 1)).unwrap();
        assert_eq!(strategy_eu(&rm).unwrap(), r(3, 1));
    }

    #[test]
    fn ten_repetitions_tail() {
        let rm = RepeatedMeasurement::new(10, r(3, 5), r(1, 1), r(-1, 1), r(0, 1)).unwrap();
        assert_eq!(rm.threshold().unwrap(), r(1, 2));
        let tail: R = (5..=10).map(|m| branch_weight(10, m, &r(3, 5)).unwrap()).sum();
        assert_eq!(strategy_eu(&rm).unwrap(), tail * r(1, 5));
    }

    #[test]
    fn tie_is_accepted() {
        let rm = RepeatedMeasurement::new(4, r(1, 2), r(1, 1), r(-1, 1), r(0, 1)).unwrap();
        assert!(rm.accepts(2).unwrap());
        assert!(!rm.accepts(1).unwrap());
    }

    #[test]
    fn degenerate_inputs() {
        let rm = RepeatedMeasurement::new(4, r(1, 2), r(1, 1), r(1, 1), r(0, 1)).unwrap();
        assert_eq!(strategy_eu(&rm), Err(InferenceError::DegenerateBet));
        let rm = RepeatedMeasurement::new(4, r(0, 1), r(1, 1), r(-1, 1), r(0, 1)).unwrap();
        assert_eq!(gaussian_approx(&rm), Err(InferenceError::DegenerateWeight));
        assert!(RepeatedMeasurement::new(4, r(3, 2), r(1, 1), r(-1, 1), r(0, 1)).is_err());
    }

    #[test]
    fn half_tail_at_threshold() {
        // p₀ = p = 1/3 with x = 2, y = −1, ε = 0.
        let rm = RepeatedMeasurement::new(50, r(1, 3), r(2, 1), r(-1, 1), r(0, 1)).unwrap();
        let half = to_float(&rm.single_eu()) / 2.0;
        assert!((gaussian_approx(&rm).unwrap() - half).abs() < 1e-15);
    }

    #[test]
    fn unfavourable_bet_is_only_slightly_negative() {
        use crate::{rat, Rational};
        let rm = |n| RepeatedMeasurement::new(n, rat(2, 5), rat(1, 1), rat(-1, 1), rat(1, 10)).unwrap();
        let eu = strategy_eu(&rm(12)).unwrap();
        assert!(eu.is_negative());
        assert!(eu.abs() <= acceptance_weight(&rm(12)).unwrap() * rm(12).single_eu().abs());
        let weights: Vec<Rational> = [8, 16, 32].iter().map(|&n| acceptance_weight(&rm(n)).unwrap()).collect();
        assert!(weights[0] < rat(1, 1) && weights[1] < weights[0] && weights[2] < weights[1], "{weights:?}");
    }
}
