#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use qgame_core::equivalence::{Embedding, RuleParams};
use qgame_core::game::Payoff;
use qgame_core::inference::RepeatedMeasurement;
use qgame_core::{rat, Amplitude, BasisIndex, Consequence, Game, GeneralizedPermutation, Observable, Rational, State};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `k` positive integers summing to `d`.
pub fn composition(rng: &mut impl Rng, k: usize, d: i64) -> Vec<i64> {
    assert!(k as i64 <= d);
    let mut cuts: BTreeSet<i64> = BTreeSet::new();
    while cuts.len() < k - 1 {
        cuts.insert(rng.gen_range(1..d));
    }
    let mut prev = 0;
    let mut parts = Vec::with_capacity(k);
    for c in cuts.into_iter().chain([d]) {
        parts.push(c - prev);
        prev = c;
    }
    parts
}

/// `k` positive weights with common denominator at most `max_d`.
pub fn weights(rng: &mut impl Rng, k: usize, max_d: i64) -> Vec<Rational> {
    let d = rng.gen_range(k as i64..=max_d);
    composition(rng, k, d).into_iter().map(|p| rat(p, d)).collect()
}

pub fn value(rng: &mut impl Rng) -> Rational {
    rat(rng.gen_range(-20..=20), rng.gen_range(1..=6))
}

fn fresh(rng: &mut impl Rng, tag: &str) -> BasisIndex {
    BasisIndex::new(format!("{tag}{:x}", rng.gen::<u64>()))
}

/// Distinct eigenvalues, not all integers.
fn spectrum(rng: &mut impl Rng, k: usize) -> Vec<Rational> {
    let mut xs = BTreeSet::new();
    while xs.len() < k {
        xs.insert(rat(rng.gen_range(-30..=30), rng.gen_range(1..=3)));
    }
    let mut xs: Vec<Rational> = xs.into_iter().collect();
    xs.shuffle(rng);
    xs
}

/// A valued game with up to `max_branches` occurring eigenvalues and weights
/// of common denominator at most `max_d`. Phases, degenerate eigenvalues,
/// shared and non-numeric labels and zero-weight indices all occur.
pub fn game(rng: &mut impl Rng, max_branches: usize, max_d: i64) -> Game {
    let k = rng.gen_range(1..=max_branches);
    let ws = weights(rng, k, max_d);
    let labels = labels();
    let extra = rng.gen_range(0..=2);
    let xs = spectrum(rng, k + extra);
    let mut state = State::new();
    let mut observable = Observable::new();
    let mut payoff = Payoff::new();
    for (x, w) in xs.iter().zip(&ws) {
        let pieces = if rng.gen_bool(0.3) { 2 } else { 1 };
        let split = if pieces == 2 { vec![w / rat(3, 1), w * rat(2, 3)] } else { vec![w.clone()] };
        for part in split {
            let i = fresh(rng, "i");
            let phase = if rng.gen_bool(0.4) { rat(rng.gen_range(0..8), 8) } else { rat(0, 1) };
            state.insert(i.clone(), Amplitude::new(part, phase).unwrap());
            observable.insert(i, x.clone());
        }
        payoff.insert(x.clone(), consequence(rng, &labels));
    }
    for x in &xs[k..] {
        observable.insert(fresh(rng, "z"), x.clone());
        if rng.gen_bool(0.5) {
            payoff.insert(x.clone(), consequence(rng, &labels));
        }
    }
    let g = Game::new(state, observable, payoff);
    g.validate().unwrap();
    g
}

/// Non-numeric labels, each tied to one value across all generated games.
fn labels() -> Vec<(String, Rational)> {
    [("c0", rat(-3, 2)), ("c1", rat(0, 1)), ("c2", rat(5, 3)), ("c3", rat(4, 1))]
        .into_iter()
        .map(|(l, v)| (l.to_string(), v))
        .collect()
}

fn consequence(rng: &mut impl Rng, labels: &[(String, Rational)]) -> Consequence {
    if rng.gen_bool(0.5) {
        Consequence::numeric(value(rng))
    } else {
        let (l, v) = labels.choose(rng).unwrap();
        Consequence::new(l.clone(), Some(v.clone()))
    }
}

/// Indices of the observable grouped by eigenvalue.
fn subspaces(g: &Game) -> BTreeMap<Rational, Vec<BasisIndex>> {
    let mut out: BTreeMap<Rational, Vec<BasisIndex>> = BTreeMap::new();
    for (i, x) in g.observable.iter() {
        out.entry(x.clone()).or_default().push(i.clone());
    }
    out
}

fn random_phases(rng: &mut impl Rng, indices: impl Iterator<Item = BasisIndex>) -> BTreeMap<BasisIndex, Rational> {
    let mut out = BTreeMap::new();
    for i in indices {
        if rng.gen_bool(0.5) {
            out.insert(i, rat(rng.gen_range(1..12), 12));
        }
    }
    out
}

fn gperm(targets: BTreeMap<BasisIndex, BasisIndex>, phases: BTreeMap<BasisIndex, Rational>) -> GeneralizedPermutation {
    GeneralizedPermutation::new(targets, phases).unwrap()
}

fn pet(rng: &mut impl Rng, g: &Game) -> RuleParams<Rational> {
    let spectrum: Vec<Rational> = g.observable.spectrum().into_iter().collect();
    let fresh_values = self::spectrum(rng, spectrum.len());
    let mut f: BTreeMap<Rational, Rational> = spectrum.iter().cloned().zip(fresh_values).collect();
    let occurring: Vec<Rational> = g.occurring_spectrum().into_iter().collect();
    // Merge two occurring eigenvalues when their payoffs agree.
    for a in &occurring {
        for b in &occurring {
            if a < b && g.payoff[a] == g.payoff[b] && rng.gen_bool(0.5) {
                let fa = f[a].clone();
                f.insert(b.clone(), fa);
                return RuleParams::Pet { f };
            }
        }
    }
    RuleParams::Pet { f }
}

fn met(rng: &mut impl Rng, g: &Game) -> RuleParams<Rational> {
    let groups = subspaces(g);
    let mut by_dim: BTreeMap<usize, Vec<Rational>> = BTreeMap::new();
    for (x, is) in &groups {
        by_dim.entry(is.len()).or_default().push(x.clone());
    }
    let mut pi = BTreeMap::new();
    for xs in by_dim.values() {
        let mut ys = xs.clone();
        ys.shuffle(rng);
        pi.extend(xs.iter().cloned().zip(ys));
    }
    let mut targets = BTreeMap::new();
    for (x, is) in &groups {
        let mut js = groups[&pi[x]].clone();
        js.shuffle(rng);
        targets.extend(is.iter().cloned().zip(js));
    }
    let phases = random_phases(rng, g.observable.indices().cloned());
    RuleParams::Met { u: gperm(targets, phases), pi }
}

fn op_symmetry(rng: &mut impl Rng, g: &Game) -> RuleParams<Rational> {
    let mut targets = BTreeMap::new();
    for is in subspaces(g).values() {
        let mut js = is.clone();
        js.shuffle(rng);
        targets.extend(is.iter().cloned().zip(js));
    }
    let phases = random_phases(rng, g.observable.indices().cloned());
    RuleParams::OpSymmetry { u: gperm(targets, phases) }
}

fn state_symmetry(rng: &mut impl Rng, g: &Game) -> Option<RuleParams<Rational>> {
    if !g.observable.is_nondegenerate() {
        return None;
    }
    let mut groups: BTreeMap<(Rational, Rational), Vec<Rational>> = BTreeMap::new();
    for (i, x) in g.observable.iter() {
        let a = g.state.amplitude(i);
        groups.entry((a.weight().clone(), a.phase().clone())).or_default().push(x.clone());
    }
    let mut f = BTreeMap::new();
    for xs in groups.values() {
        let mut ys = xs.clone();
        ys.shuffle(rng);
        f.extend(xs.iter().cloned().zip(ys));
    }
    Some(RuleParams::StateSymmetry { f })
}

fn oet(rng: &mut impl Rng, g: &Game) -> RuleParams<Rational> {
    let occurring = g.occurring_spectrum();
    let mut observable: Observable =
        g.observable.iter().filter(|(i, _)| g.state.get(i).is_some()).map(|(i, x)| (i.clone(), x.clone())).collect();
    let mut payoff: Payoff<Rational> =
        g.payoff.iter().filter(|(x, _)| occurring.contains(*x)).map(|(x, c)| (x.clone(), c.clone())).collect();
    for _ in 0..rng.gen_range(0..=2) {
        let x = rat(rng.gen_range(100..200), rng.gen_range(1..=4));
        observable.insert(fresh(rng, "o"), x.clone());
        if rng.gen_bool(0.5) {
            payoff.insert(x.clone(), Consequence::numeric(value(rng)));
        }
    }
    RuleParams::Oet { observable, payoff }
}

fn set(rng: &mut impl Rng, g: &Game) -> RuleParams<Rational> {
    let mut targets = BTreeMap::new();
    for i in g.state.support() {
        let fans = if rng.gen_bool(0.3) {
            let k = rng.gen_range(2..=3);
            composition(rng, k, 6).into_iter().map(|p| (fresh(rng, "s"), rat(p, 6))).collect()
        } else {
            vec![(fresh(rng, "s"), rat(1, 1))]
        };
        targets.insert(i.clone(), fans);
    }
    let extra = (0..rng.gen_range(0..=1)).map(|_| (fresh(rng, "e"), value(rng))).collect();
    RuleParams::Set { embedding: Embedding { targets, extra } }
}

/// Parameters of a randomly chosen rule that `g` admits.
pub fn admissible(rng: &mut impl Rng, g: &Game) -> RuleParams<Rational> {
    loop {
        let p = match rng.gen_range(0..6) {
            0 => pet(rng, g),
            1 => met(rng, g),
            2 => op_symmetry(rng, g),
            3 => match state_symmetry(rng, g) {
                Some(p) => p,
                None => continue,
            },
            4 => oet(rng, g),
            _ => set(rng, g),
        };
        return p;
    }
}

/// Parameters violating one precondition of the chosen rule, when `g` allows such a violation.
pub fn inadmissible(rng: &mut impl Rng, g: &Game, rule: usize) -> Option<RuleParams<Rational>> {
    let occurring: Vec<Rational> = g.occurring_spectrum().into_iter().collect();
    let support: Vec<BasisIndex> = g.state.support().cloned().collect();
    match rule {
        // PET merging two occurring eigenvalues with different payoffs.
        0 => {
            let (a, b) = occurring
                .iter()
                .flat_map(|a| occurring.iter().map(move |b| (a, b)))
                .find(|(a, b)| a < b && g.payoff[*a] != g.payoff[*b])?;
            let RuleParams::Pet { mut f } = pet(rng, g) else { unreachable!() };
            let fa = f[a].clone();
            f.insert(b.clone(), fa);
            Some(RuleParams::Pet { f })
        }
        // MET whose u leaves an eigensubspace while pi is the identity.
        1 => {
            let (i, j) = cross_pair(g, &support)?;
            let mut targets: BTreeMap<BasisIndex, BasisIndex> = g.observable.indices().map(|k| (k.clone(), k.clone())).collect();
            targets.insert(i.clone(), j.clone());
            targets.insert(j, i);
            let pi = g.observable.spectrum().into_iter().map(|x| (x.clone(), x)).collect();
            Some(RuleParams::Met { u: gperm(targets, BTreeMap::new()), pi })
        }
        // Operator symmetry swapping indices of different eigenvalues.
        2 => {
            let (i, j) = cross_pair(g, &support)?;
            let mut targets: BTreeMap<BasisIndex, BasisIndex> = g.observable.indices().map(|k| (k.clone(), k.clone())).collect();
            targets.insert(i.clone(), j.clone());
            targets.insert(j, i);
            Some(RuleParams::OpSymmetry { u: gperm(targets, BTreeMap::new()) })
        }
        // State symmetry swapping eigenvalues whose amplitudes differ.
        3 => {
            if !g.observable.is_nondegenerate() {
                return None;
            }
            let (i, j) = support
                .iter()
                .flat_map(|i| g.observable.indices().map(move |j| (i, j)))
                .find(|(i, j)| g.state.amplitude(i) != g.state.amplitude(j))?;
            let (xi, xj) = (g.observable.get(i)?.clone(), g.observable.get(j)?.clone());
            let mut f: BTreeMap<Rational, Rational> = g.observable.spectrum().into_iter().map(|x| (x.clone(), x)).collect();
            f.insert(xi.clone(), xj.clone());
            f.insert(xj, xi);
            Some(RuleParams::StateSymmetry { f })
        }
        // OET changing the eigenvalue of a support index.
        4 => {
            let RuleParams::Oet { mut observable, payoff } = oet(rng, g) else { unreachable!() };
            let i = support.choose(rng)?;
            let moved = g.observable.get(i)?.clone() + rat(1000, 1);
            observable.insert(i.clone(), moved);
            Some(RuleParams::Oet { observable, payoff })
        }
        // SET whose fractions do not sum to one.
        _ => {
            let RuleParams::Set { mut embedding } = set(rng, g) else { unreachable!() };
            let fans = embedding.targets.values_mut().next()?;
            fans[0].1 = fans[0].1.clone() / rat(2, 1);
            Some(RuleParams::Set { embedding })
        }
    }
}

/// A support index and another observable index with a different eigenvalue.
fn cross_pair(g: &Game, support: &[BasisIndex]) -> Option<(BasisIndex, BasisIndex)> {
    support.iter().find_map(|i| {
        let xi = g.observable.get(i)?;
        g.observable.iter().find(|(_, x)| *x != xi).map(|(j, _)| (i.clone(), j.clone()))
    })
}

/// Expected utility of the frequency bet by enumerating every sequence of `n` outcomes.
pub fn brute_force_eu(rm: &RepeatedMeasurement<Rational>) -> Rational {
    let q = rat(1, 1) - &rm.p;
    let mut total = rat(0, 1);
    for seq in 0u32..1 << rm.n {
        let zeros = rm.n - seq.count_ones();
        if rm.accepts(zeros).unwrap() {
            let w = num_traits::pow(rm.p.clone(), zeros as usize) * num_traits::pow(q.clone(), (rm.n - zeros) as usize);
            total += w * rm.single_eu();
        }
    }
    total
}
