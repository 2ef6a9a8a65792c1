//! Linear facts about unknown game values.
//!
//! Equalities are kept in reduced row-echelon form over exact scalars, so
//! every affine form has a unique normal form modulo the equalities.
//! Inequalities are stored as given and normalized at query time.

use std::collections::BTreeMap;

use crate::scalar::Scalar;

use super::{GameId, LinearClaim, Relation};

/// `Σ coeffs[g]·V(g) + constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineForm<S> {
    pub coeffs: BTreeMap<GameId, S>,
    pub constant: S,
}

impl<S: Scalar> AffineForm<S> {
    pub fn var(g: GameId) -> Self {
        AffineForm { coeffs: [(g, S::one())].into_iter().collect(), constant: S::zero() }
    }

    /// `lhs − rhs` of a claim, so the claim reads `form (= | ≥) 0`.
    pub fn from_claim(claim: &LinearClaim<S>) -> Self {
        let mut coeffs: BTreeMap<GameId, S> = BTreeMap::new();
        for (c, g) in &claim.terms {
            let e = coeffs.entry(*g).or_insert_with(S::zero);
            *e = e.clone() + c.clone();
        }
        coeffs.retain(|_, c| !c.is_zero());
        AffineForm { coeffs, constant: -claim.rhs.clone() }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn sub_scaled(&mut self, k: &S, other: &AffineForm<S>) {
        for (g, c) in &other.coeffs {
            let e = self.coeffs.entry(*g).or_insert_with(S::zero);
            *e = e.clone() - k.clone() * c.clone();
            if e.is_zero() {
                self.coeffs.remove(g);
            }
        }
        self.constant = self.constant.clone() - k.clone() * other.constant.clone();
    }

    fn scale(&mut self, k: &S) {
        for c in self.coeffs.values_mut() {
            *c = c.clone() * k.clone();
        }
        self.constant = self.constant.clone() * k.clone();
    }

    /// `a` with `self.coeffs = a · other.coeffs`, if one exists.
    fn ratio_to(&self, other: &AffineForm<S>) -> Option<S> {
        if self.coeffs.len() != other.coeffs.len() || self.coeffs.is_empty() {
            return None;
        }
        let mut ratio: Option<S> = None;
        for ((g1, c1), (g2, c2)) in self.coeffs.iter().zip(&other.coeffs) {
            if g1 != g2 {
                return None;
            }
            let r = c1.clone() / c2.clone();
            match &ratio {
                Some(prev) if *prev != r => return None,
                Some(_) => {}
                None => ratio = Some(r),
            }
        }
        ratio
    }
}

/// The fact `form` was found inconsistent with what is already known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contradiction;

#[derive(Debug, Clone)]
pub struct Facts<S> {
    /// Each row reads `row = 0`; its pivot is its first key with coefficient one,
    /// and no other row mentions that pivot.
    rows: Vec<AffineForm<S>>,
    /// Each reads `form ≥ 0`.
    inequalities: Vec<AffineForm<S>>,
}

impl<S: Scalar> Default for Facts<S> {
    fn default() -> Self {
        Facts { rows: Vec::new(), inequalities: Vec::new() }
    }
}

impl<S: Scalar> Facts<S> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Normal form of `form` modulo the known equalities.
    pub fn reduce(&self, form: &AffineForm<S>) -> AffineForm<S> {
        let mut out = form.clone();
        for row in &self.rows {
            let pivot = *row.coeffs.keys().next().expect("rows are never constant");
            if let Some(c) = out.coeffs.get(&pivot).cloned() {
                out.sub_scaled(&c, row);
            }
        }
        out
    }

    pub fn add(&mut self, claim: &LinearClaim<S>) -> Result<(), Contradiction> {
        let form = AffineForm::from_claim(claim);
        match claim.relation {
            Relation::Eq => self.add_equality(form),
            Relation::Ge => self.add_inequality(form),
        }
    }

    fn add_equality(&mut self, form: AffineForm<S>) -> Result<(), Contradiction> {
        let mut row = self.reduce(&form);
        if row.is_constant() {
            return if row.constant.is_zero() { Ok(()) } else { Err(Contradiction) };
        }
        let (&pivot, lead) = row.coeffs.iter().next().expect("non-constant");
        let inv = S::one() / lead.clone();
        row.scale(&inv);
        for other in &mut self.rows {
            if let Some(c) = other.coeffs.get(&pivot).cloned() {
                other.sub_scaled(&c, &row);
            }
        }
        self.rows.push(row);
        self.check_inequalities()
    }

    fn add_inequality(&mut self, form: AffineForm<S>) -> Result<(), Contradiction> {
        self.inequalities.push(form);
        self.check_inequalities()
    }

    fn check_inequalities(&self) -> Result<(), Contradiction> {
        for ineq in &self.inequalities {
            let r = self.reduce(ineq);
            if r.is_constant() && r.constant.is_negative() {
                return Err(Contradiction);
            }
        }
        Ok(())
    }

    /// Whether `claim` follows from the stored facts. Inequalities are
    /// entailed only by a single stored inequality or by the equalities alone.
    pub fn entails(&self, claim: &LinearClaim<S>) -> bool {
        let form = self.reduce(&AffineForm::from_claim(claim));
        match claim.relation {
            Relation::Eq => form.is_constant() && form.constant.is_zero(),
            Relation::Ge => {
                if form.is_constant() {
                    return !form.constant.is_negative();
                }
                self.inequalities.iter().any(|ineq| {
                    let r = self.reduce(ineq);
                    match form.ratio_to(&r) {
                        Some(a) if a.is_positive() => {
                            !(form.constant.clone() - a * r.constant).is_negative()
                        }
                        _ => false,
                    }
                })
            }
        }
    }

    /// Exact value of `V(g)` when the equalities determine it.
    pub fn value(&self, g: GameId) -> Option<S> {
        let r = self.reduce(&AffineForm::var(g));
        r.is_constant().then_some(r.constant)
    }

    /// Best bounds on `V(g)` from the equalities and single inequalities.
    pub fn interval(&self, g: GameId) -> (Option<S>, Option<S>) {
        if let Some(v) = self.value(g) {
            return (Some(v.clone()), Some(v));
        }
        let vg = self.reduce(&AffineForm::var(g));
        let mut lower: Option<S> = None;
        let mut upper: Option<S> = None;
        for ineq in &self.inequalities {
            let r = self.reduce(ineq);
            let Some(a) = r.ratio_to(&vg) else { continue };
            // r = a·(V(g) − vg.constant) + r.constant ≥ 0
            let bound = vg.constant.clone() - r.constant.clone() / a.clone();
            if a.is_positive() {
                if lower.as_ref().is_none_or(|l| bound > *l) {
                    lower = Some(bound);
                }
            } else if upper.as_ref().is_none_or(|u| bound < *u) {
                upper = Some(bound);
            }
        }
        (lower, upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    type R = Rational64;

    fn r(n: i64) -> R {
        R::from_integer(n)
    }

    fn claim(terms: &[(i64, GameId)], relation: Relation, rhs: i64) -> LinearClaim<R> {
        LinearClaim { terms: terms.iter().map(|(c, g)| (r(*c), *g)).collect(), relation, rhs: r(rhs) }
    }

    #[test]
    fn solves_reflection_system() {
        let mut f = Facts::new();
        // V(A)+V(B)=0, V(C)−V(B)=k, V(C)=V(D), V(A)=V(D)
        f.add(&claim(&[(1, 0), (1, 1)], Relation::Eq, 0)).unwrap();
        f.add(&claim(&[(1, 2), (-1, 1)], Relation::Eq, 6)).unwrap();
        f.add(&claim(&[(1, 2), (-1, 3)], Relation::Eq, 0)).unwrap();
        assert_eq!(f.value(0), None);
        f.add(&claim(&[(1, 0), (-1, 3)], Relation::Eq, 0)).unwrap();
        assert_eq!(f.value(0), Some(r(3)));
        assert_eq!(f.value(1), Some(r(-3)));
        assert!(f.entails(&claim(&[(2, 2)], Relation::Eq, 6)));
    }

    #[test]
    fn detects_contradiction() {
        let mut f = Facts::new();
        f.add(&claim(&[(1, 0)], Relation::Eq, 1)).unwrap();
        assert_eq!(f.add(&claim(&[(1, 0)], Relation::Eq, 2)), Err(Contradiction));
        let mut f = Facts::new();
        f.add(&claim(&[(1, 0)], Relation::Ge, 3)).unwrap();
        assert_eq!(f.add(&claim(&[(1, 0)], Relation::Eq, 2)), Err(Contradiction));
    }

    #[test]
    fn sandwich_interval() {
        let mut f = Facts::new();
        // V(0) = V(1); V(1) ≥ V(2); V(3) ≥ V(1); V(2) = 1; V(3) = 4
        f.add(&claim(&[(1, 0), (-1, 1)], Relation::Eq, 0)).unwrap();
        f.add(&claim(&[(1, 1), (-1, 2)], Relation::Ge, 0)).unwrap();
        f.add(&claim(&[(1, 3), (-1, 1)], Relation::Ge, 0)).unwrap();
        f.add(&claim(&[(1, 2)], Relation::Eq, 1)).unwrap();
        f.add(&claim(&[(1, 3)], Relation::Eq, 4)).unwrap();
        assert_eq!(f.interval(0), (Some(r(1)), Some(r(4))));
        assert!(f.entails(&claim(&[(1, 0)], Relation::Ge, 0)));
        assert!(!f.entails(&claim(&[(1, 0)], Relation::Ge, 2)));
        f.add(&claim(&[(1, 1)], Relation::Eq, 2)).unwrap();
        assert_eq!(f.interval(0), (Some(r(2)), Some(r(2))));
    }
}
