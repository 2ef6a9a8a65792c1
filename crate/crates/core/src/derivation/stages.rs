//! Concrete derivations, built as traces.
//!
//! The additive route is primary: equal weights by permutation averaging,
//! rational weights by fanning each branch into equal sub-branches, and
//! arbitrary games by reducing them to a standard form first. The two-branch
//! reflection argument and the dyadic composite construction are provided as
//! separate operations.

use std::collections::{BTreeMap, HashMap};

use crate::equivalence::{apply, Embedding, RuleParams};
use crate::exact::{Amplitude, BasisIndex, GeneralizedPermutation, State};
use crate::game::{flatten, CompositeGame, Consequence, Game, GameError, Observable, Payoff};
use crate::scalar::{common_denominator, Scalar};

use super::{license, AxiomUse, DerivationError, DerivationTrace, Facts, GameId, LinearClaim, Step, TraceEntry};

/// Largest number of equal sub-branches a fan-out may create.
pub const MAX_FAN_OUT: u64 = 1 << 14;

/// Largest common denominator the dominance sandwich's bounding games may reach.
const SANDWICH_BUDGET: u64 = 256;

const MAX_DYADIC_LEVEL: u32 = 8;

/// Target width of a value interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Precision<S> {
    epsilon: S,
}

impl<S: Scalar> Precision<S> {
    pub fn new(epsilon: S) -> Result<Self, DerivationError> {
        if !epsilon.is_positive() {
            return Err(DerivationError::NonPositivePrecision);
        }
        Ok(Precision { epsilon })
    }

    pub fn epsilon(&self) -> &S {
        &self.epsilon
    }
}

struct Builder<S: Scalar> {
    games: Vec<Game<S>>,
    ids: HashMap<Game<S>, GameId>,
    entries: Vec<TraceEntry<S>>,
    facts: Facts<S>,
}

impl<S: Scalar> Builder<S> {
    fn new() -> Self {
        Builder { games: Vec::new(), ids: HashMap::new(), entries: Vec::new(), facts: Facts::new() }
    }

    fn intern(&mut self, g: Game<S>) -> GameId {
        if let Some(&id) = self.ids.get(&g) {
            return id;
        }
        let id = self.games.len();
        self.ids.insert(g.clone(), id);
        self.games.push(g);
        id
    }

    fn push(&mut self, step: Step<S>, justification: String) -> Result<(), DerivationError> {
        let entry = self.entries.len();
        let claim = license(&step, &self.games, &self.facts, entry)?;
        self.facts.add(&claim).map_err(|_| DerivationError::Contradiction { entry })?;
        self.entries.push(TraceEntry { step, claim, justification });
        Ok(())
    }

    /// Applies a rewrite to `from` and records it; returns the id of the result.
    fn rewrite(&mut self, from: GameId, params: RuleParams<S>, why: &str) -> Result<GameId, DerivationError> {
        let step = apply(&self.games[from], &params)?;
        if step.after == step.before {
            return Ok(from);
        }
        let to = self.intern(step.after.clone());
        let why = format!("{} ({}): {why}", step.rule(), params.summary());
        self.push(Step::Rewrite { from, to, step }, why)?;
        Ok(to)
    }

    /// Like [`Self::rewrite`] but the result must be the already-known game `to`.
    fn link(&mut self, from: GameId, params: RuleParams<S>, to: GameId, why: &str) -> Result<(), DerivationError> {
        let rule = params.rule();
        let got = self.rewrite(from, params, why)?;
        if got != to {
            return Err(DerivationError::LinkMismatch { rule });
        }
        Ok(())
    }

    fn axiom(&mut self, a: AxiomUse<S>, why: &str) -> Result<(), DerivationError> {
        let why = format!("{}: {why}", a.axiom());
        self.push(Step::Axiom(a), why)
    }

    fn value(&self, g: GameId) -> Option<S> {
        self.facts.value(g)
    }

    fn finish(self, subject: GameId, conclusion: Vec<LinearClaim<S>>) -> Result<DerivationTrace<S>, DerivationError> {
        for c in &conclusion {
            if !self.facts.entails(c) {
                return Err(DerivationError::NotEntailed(c.to_string()));
            }
        }
        Ok(DerivationTrace { games: self.games, entries: self.entries, subject, conclusion })
    }
}

fn idx(s: impl Into<String>) -> BasisIndex {
    BasisIndex::new(s)
}

fn real<S: Scalar>(w: S) -> Amplitude<S> {
    Amplitude::real(w).expect("non-negative weight")
}

fn numeric_payoff<S: Scalar>(pairs: impl IntoIterator<Item = (S, S)>) -> Payoff<S> {
    pairs.into_iter().map(|(x, v)| (x, Consequence::numeric(v))).collect()
}

/// Value-preserving payoff transform applied to every entry of the payoff,
/// including zero-weight eigenvalues.
fn map_all_values<S: Scalar>(g: &Game<S>, f: impl Fn(&S) -> S) -> Result<Game<S>, GameError> {
    let payoff = g
        .payoff
        .iter()
        .map(|(x, c)| Ok((x.clone(), Consequence::numeric(f(c.require_value()?)))))
        .collect::<Result<_, GameError>>()?;
    Ok(Game::new(g.state.clone(), g.observable.clone(), payoff))
}

/// The two-branch equal-weight game with identity payoff; returns its id and value.
fn stage1_into<S: Scalar>(b: &mut Builder<S>, x1: &S, x2: &S) -> Result<(GameId, S), DerivationError> {
    let half = S::ratio(1, 2);
    if x1 == x2 {
        let single = Game::new(
            [(idx("1"), Amplitude::one())].into_iter().collect(),
            [(idx("1"), x1.clone())].into_iter().collect(),
            numeric_payoff([(x1.clone(), x1.clone())]),
        );
        let one = b.intern(single);
        b.axiom(AxiomUse::PermutationAverage { game: one }, "a single sure branch is worth its consequence")?;
        let embedding = Embedding {
            targets: [(idx("1"), vec![(idx("1"), half.clone()), (idx("2"), half)])].into_iter().collect(),
            extra: BTreeMap::new(),
        };
        let g = b.rewrite(one, RuleParams::Set { embedding }, "split the sure branch into two equal branches")?;
        return Ok((g, x1.clone()));
    }

    let k = x1.clone() + x2.clone();
    let mid = k.clone() * half.clone();
    let off = x1.clone().max(x2.clone()) + S::one();
    let state: State<S> = [(idx("1"), real(half.clone())), (idx("2"), real(half))].into_iter().collect();
    let g0 = Game::new(
        state.clone(),
        [(idx("1"), x1.clone()), (idx("2"), x2.clone()), (idx("3"), off.clone())].into_iter().collect(),
        numeric_payoff([(x1.clone(), x1.clone()), (x2.clone(), x2.clone()), (off.clone(), off)]),
    );
    let g0 = b.intern(g0);

    // Make the spectrum closed under the reflection x ↦ k − x.
    let obs_a: Observable<S> =
        [(idx("1"), x1.clone()), (idx("2"), x2.clone()), (idx("3"), mid.clone())].into_iter().collect();
    let pay_a = numeric_payoff([(x1.clone(), x1.clone()), (x2.clone(), x2.clone()), (mid.clone(), mid)]);
    let a = b.rewrite(
        g0,
        RuleParams::Oet { observable: obs_a, payoff: pay_a },
        "move the zero-weight eigenvalue to the midpoint",
    )?;

    let game_a = b.games[a].clone();
    let neg = b.intern(map_all_values(&game_a, |v| -v.clone())?);
    b.axiom(AxiomUse::ZeroSum { game: a, negated: neg }, "negate the payoff")?;
    let shifted = b.intern(map_all_values(&game_a, |v| k.clone() - v.clone())?);
    b.axiom(AxiomUse::AdditivityLemma { game: neg, shifted, k: k.clone() }, "add the constant x1 + x2")?;

    let reflect: BTreeMap<S, S> = game_a.observable.spectrum().into_iter().map(|x| (x.clone(), k.clone() - x)).collect();
    let d = b.rewrite(shifted, RuleParams::Pet { f: reflect.clone() }, "relabel eigenvalues by the reflection")?;
    b.link(a, RuleParams::StateSymmetry { f: reflect }, d, "the state is symmetric under the reflection")?;
    let v = b.value(g0).expect("reflection argument determines the value");
    Ok((g0, v))
}

/// Value of the two-branch equal-weight game with identity payoff on `x1`, `x2`.
pub fn derive_stage1<S: Scalar>(x1: S, x2: S) -> Result<(S, DerivationTrace<S>), DerivationError> {
    let mut b = Builder::new();
    let (g, v) = stage1_into(&mut b, &x1, &x2)?;
    let trace = b.finish(g, vec![LinearClaim::value_of(g, v.clone())])?;
    Ok((v, trace))
}

/// Value of the `n`-branch equal-weight game paying `values`.
pub fn derive_equal_weight<S: Scalar>(n: usize, values: &[S]) -> Result<(S, DerivationTrace<S>), DerivationError> {
    if n == 0 {
        return Err(GameError::EmptyGame.into());
    }
    if values.len() != n {
        return Err(DerivationError::InvalidWeights(format!("{} values for {n} branches", values.len())));
    }
    let w = S::ratio(1, n as i64);
    let g = Game::from_weights(values.iter().map(|v| (w.clone(), Consequence::numeric(v.clone()))))?;
    let mut b = Builder::new();
    let id = b.intern(g);
    b.axiom(AxiomUse::PermutationAverage { game: id }, "average over permuted payoffs")?;
    let v = b.value(id).expect("permutation average fixes the value");
    let trace = b.finish(id, vec![LinearClaim::value_of(id, v.clone())])?;
    Ok((v, trace))
}

/// The standard game: branch `b{i}` with eigenvalue `i`, real weight `w_i`, paying `v_i`.
fn standard_game<S: Scalar>(weights: &[S], values: &[S]) -> Game<S> {
    let state = weights.iter().enumerate().map(|(i, w)| (idx(format!("b{i}")), real(w.clone()))).collect();
    let observable = (0..weights.len()).map(|i| (idx(format!("b{i}")), S::from_int(i as i64))).collect();
    let payoff = numeric_payoff(values.iter().enumerate().map(|(i, v)| (S::from_int(i as i64), v.clone())));
    Game::new(state, observable, payoff)
}

fn check_weights<S: Scalar>(weights: &[S], values: &[S]) -> Result<(), DerivationError> {
    if weights.is_empty() {
        return Err(GameError::EmptyGame.into());
    }
    if weights.len() != values.len() {
        return Err(DerivationError::InvalidWeights(format!(
            "{} weights but {} values",
            weights.len(),
            values.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
        return Err(DerivationError::InvalidWeights(format!("weight {w} is not positive")));
    }
    let total = weights.iter().fold(S::zero(), |acc, w| acc + w.clone());
    if !total.is_one() {
        return Err(GameError::InvalidGame(format!("weights sum to {total}, not 1")).into());
    }
    Ok(())
}

/// Derives the value of the standard game for `weights`/`values`; returns its id.
fn rational_into<S: Scalar>(b: &mut Builder<S>, weights: &[S], values: &[S]) -> Result<GameId, DerivationError> {
    check_weights(weights, values)?;
    let gr = b.intern(standard_game(weights, values));
    let n = common_denominator(weights)
        .filter(|n| *n <= MAX_FAN_OUT)
        .ok_or_else(|| DerivationError::TooLarge(format!("common denominator exceeds {MAX_FAN_OUT}")))?;
    let n_s = S::from_int(n as i64);
    let counts: Vec<u64> = weights
        .iter()
        .map(|w| (w.clone() * n_s.clone()).to_u64().expect("integer multiple of the common denominator"))
        .collect();
    if counts.iter().all(|&m| m == 1) {
        b.axiom(AxiomUse::PermutationAverage { game: gr }, "equal weights: average over permuted payoffs")?;
        return Ok(gr);
    }

    let mut targets = BTreeMap::new();
    let mut eq_state = State::new();
    let mut eq_obs = Observable::new();
    let mut eq_payoff = Payoff::new();
    let mut merge = BTreeMap::new();
    let mut k = 0i64;
    let unit = S::ratio(1, n as i64);
    for (i, &m) in counts.iter().enumerate() {
        let frac = S::ratio(1, m as i64);
        let mut fans = Vec::with_capacity(m as usize);
        for j in 0..m {
            let name = idx(format!("b{i}.{j}"));
            fans.push((name.clone(), frac.clone()));
            let x = S::from_int(k);
            eq_state.insert(name.clone(), real(unit.clone()));
            eq_obs.insert(name, x.clone());
            eq_payoff.insert(x.clone(), Consequence::numeric(values[i].clone()));
            merge.insert(x, S::from_int(i as i64));
            k += 1;
        }
        targets.insert(idx(format!("b{i}")), fans);
    }
    let fan = b.rewrite(
        gr,
        RuleParams::Set { embedding: Embedding { targets, extra: BTreeMap::new() } },
        &format!("fan each branch into equal sub-branches of weight 1/{n}"),
    )?;
    let eq = b.intern(Game::new(eq_state, eq_obs, eq_payoff));
    b.link(eq, RuleParams::Pet { f: merge }, fan, "merge sub-branches of one branch by a degenerate relabeling")?;
    b.axiom(AxiomUse::PermutationAverage { game: eq }, &format!("{n} equal branches: average over permuted payoffs"))?;
    Ok(gr)
}

/// Value of the game with real amplitudes `√w_i` paying `v_i` on distinct eigenvalues.
pub fn derive_rational_weights<S: Scalar>(
    weights: &[S],
    values: &[S],
) -> Result<(S, DerivationTrace<S>), DerivationError> {
    let mut b = Builder::new();
    let gr = rational_into(&mut b, weights, values)?;
    let v = b.value(gr).expect("rational-weight derivation fixes the value");
    let trace = b.finish(gr, vec![LinearClaim::value_of(gr, v.clone())])?;
    Ok((v, trace))
}

struct Standard<S> {
    id: GameId,
    weights: Vec<S>,
    values: Vec<S>,
}

/// Rewrites `g` into the standard game of its canonical form: numeric labels,
/// eigenvalues ranked by value, real amplitudes, then one SET step from the
/// standard game back onto the reduced game.
fn standardize_into<S: Scalar>(b: &mut Builder<S>, g: &Game<S>) -> Result<(GameId, Standard<S>), DerivationError> {
    let values = g.occurring_values()?;
    let start = b.intern(g.clone());
    let mut cur = start;

    let labelled = g.occurring_spectrum().iter().all(|x| g.payoff[x].is_numeric_label());
    if !labelled {
        let relabelled = Game::new(
            g.state.clone(),
            g.observable.clone(),
            numeric_payoff(values.iter().map(|(x, v)| (x.clone(), v.clone()))),
        );
        let next = b.intern(relabelled);
        b.axiom(
            AxiomUse::Dominance { better: cur, worse: next },
            "consequences with equal values are interchangeable",
        )?;
        cur = next;
    }

    let mut distinct: Vec<S> = values.values().cloned().collect();
    distinct.sort();
    distinct.dedup();
    let rank: BTreeMap<S, S> = values
        .iter()
        .map(|(x, v)| (x.clone(), S::from_int(distinct.binary_search(v).expect("value present") as i64)))
        .collect();
    cur = b.rewrite(cur, RuleParams::Pet { f: rank }, "relabel eigenvalues by the rank of their payoff")?;

    let game = b.games[cur].clone();
    let phases: BTreeMap<BasisIndex, S> = game
        .state
        .iter()
        .filter(|(_, a)| !a.phase().is_zero())
        .map(|(i, a)| (i.clone(), -a.phase().clone()))
        .collect();
    if !phases.is_empty() {
        let u = GeneralizedPermutation::diagonal_phase(game.observable.indices(), phases)?;
        cur = b.rewrite(cur, RuleParams::OpSymmetry { u }, "remove branch phases")?;
    }

    let game = b.games[cur].clone();
    let weights: Vec<S> = (0..distinct.len()).map(|r| game.eigen_weight(&S::from_int(r as i64))).collect();
    let gr = b.intern(standard_game(&weights, &distinct));
    let mut targets = BTreeMap::new();
    let mut extra = BTreeMap::new();
    for (i, x) in game.observable.iter() {
        match game.state.get(i) {
            Some(a) => {
                let r = x.to_usize().expect("rank eigenvalue");
                targets
                    .entry(idx(format!("b{r}")))
                    .or_insert_with(Vec::new)
                    .push((i.clone(), a.weight().clone() / weights[r].clone()));
            }
            None => {
                extra.insert(i.clone(), x.clone());
            }
        }
    }
    b.link(
        gr,
        RuleParams::Set { embedding: Embedding { targets, extra } },
        cur,
        "the reduced game is the standard game spread over the original basis",
    )?;
    Ok((start, Standard { id: gr, weights, values: distinct }))
}

/// Value of an arbitrary valued game by reduction to its canonical form.
pub fn derive_exact<S: Scalar>(g: &Game<S>) -> Result<(S, DerivationTrace<S>), DerivationError> {
    let mut b = Builder::new();
    let (start, std) = standardize_into(&mut b, g)?;
    rational_into(&mut b, &std.weights, &std.values)?;
    let v = b.value(start).expect("value determined");
    let trace = b.finish(start, vec![LinearClaim::value_of(start, v.clone())])?;
    Ok((v, trace))
}

fn exact_into<S: Scalar>(b: &mut Builder<S>, g: &Game<S>) -> Result<GameId, DerivationError> {
    let (start, std) = standardize_into(b, g)?;
    rational_into(b, &std.weights, &std.values)?;
    Ok(start)
}

fn lcm(a: u64, b: u64) -> Option<u64> {
    (a / crate::scalar::gcd(a, b)).checked_mul(b)
}

/// Interval for the value of `g` of width at most `prec`.
///
/// The trace first bounds the value between two dominating games whose
/// weights are dyadic truncations of the standard game's weights, then
/// closes the interval with the exact rational-weight derivation.
pub fn derive_value<S: Scalar>(
    g: &Game<S>,
    prec: &Precision<S>,
) -> Result<((S, S), DerivationTrace<S>), DerivationError> {
    let mut b = Builder::new();
    let (start, std) = standardize_into(&mut b, g)?;
    let r = std.weights.len();
    if r > 1 {
        sandwich_into(&mut b, &std, prec)?;
    }
    rational_into(&mut b, &std.weights, &std.values)?;
    let (lo, hi) = b.facts.interval(start);
    let (lo, hi) = lo.zip(hi).expect("exact derivation closes the interval");
    if hi.clone() - lo.clone() > prec.epsilon().clone() {
        return Err(DerivationError::Bounds(format!("interval [{lo}, {hi}] is wider than {}", prec.epsilon())));
    }
    let conclusion = vec![
        LinearClaim::ge(vec![(S::one(), start)], lo.clone()),
        LinearClaim::ge(vec![(-S::one(), start)], -hi.clone()),
    ];
    let trace = b.finish(start, conclusion)?;
    Ok(((lo, hi), trace))
}

fn sandwich_into<S: Scalar>(b: &mut Builder<S>, std: &Standard<S>, prec: &Precision<S>) -> Result<(), DerivationError> {
    let base = common_denominator(&std.weights).unwrap_or(u64::MAX);
    let v_min = std.values.first().expect("non-empty").clone();
    let v_max = std.values.last().expect("non-empty").clone();
    let spread = v_max.clone() - v_min.clone();
    let truncate = |level: u32| -> Vec<S> {
        let scale = S::from_int(1i64 << level);
        std.weights.iter().map(|w| (w.clone() * scale.clone()).floor() / scale.clone()).collect()
    };
    let width = |lows: &[S]| -> S {
        std.weights.iter().zip(lows).fold(S::zero(), |acc, (w, a)| acc + (w.clone() - a.clone()) * spread.clone())
    };
    let mut level = 1;
    while level < MAX_DYADIC_LEVEL
        && width(&truncate(level)) > *prec.epsilon()
        && lcm(1 << (level + 1), base).is_some_and(|n| n <= SANDWICH_BUDGET.max(base))
    {
        level += 1;
    }
    let lows = truncate(level);

    let mut state = State::new();
    let mut obs = Observable::new();
    let mut mid_payoff = Payoff::new();
    let mut low_payoff = Payoff::new();
    let mut high_payoff = Payoff::new();
    let mut merge = BTreeMap::new();
    let mut targets = BTreeMap::new();
    for (k, ((w, a), v)) in std.weights.iter().zip(&lows).zip(&std.values).enumerate() {
        let (xl, xh) = (S::from_int(2 * k as i64), S::from_int(2 * k as i64 + 1));
        let rest = w.clone() - a.clone();
        let mut fans = Vec::new();
        for (suffix, part, x, tail) in [("lo", a.clone(), xl, false), ("hi", rest, xh, true)] {
            if part.is_zero() {
                continue;
            }
            let name = idx(format!("b{k}.{suffix}"));
            fans.push((name.clone(), part.clone() / w.clone()));
            state.insert(name.clone(), real(part));
            obs.insert(name, x.clone());
            mid_payoff.insert(x.clone(), Consequence::numeric(v.clone()));
            let (lv, hv) = if tail { (v_min.clone(), v_max.clone()) } else { (v.clone(), v.clone()) };
            low_payoff.insert(x.clone(), Consequence::numeric(lv));
            high_payoff.insert(x.clone(), Consequence::numeric(hv));
            merge.insert(x, S::from_int(k as i64));
        }
        targets.insert(idx(format!("b{k}")), fans);
    }
    let split = b.rewrite(
        std.id,
        RuleParams::Set { embedding: Embedding { targets, extra: BTreeMap::new() } },
        &format!("split each weight into its 2^-{level} truncation and a remainder"),
    )?;
    let refined = b.intern(Game::new(state.clone(), obs.clone(), mid_payoff));
    b.link(refined, RuleParams::Pet { f: merge }, split, "merge truncation and remainder branches")?;
    let low = Game::new(state.clone(), obs.clone(), low_payoff);
    let high = Game::new(state, obs, high_payoff);
    let low_id = b.intern(low.clone());
    let high_id = b.intern(high.clone());
    b.axiom(AxiomUse::Dominance { better: refined, worse: low_id }, "remainder branches paid the least value")?;
    b.axiom(AxiomUse::Dominance { better: high_id, worse: refined }, "remainder branches paid the greatest value")?;
    exact_into(b, &low)?;
    exact_into(b, &high)?;
    Ok(())
}

/// Value of `g + k` from the value of `g`: additivity with the constant game
/// paying `k`, plus the eigenvalue shift by `k`.
pub fn additivity_lemma<S: Scalar>(g: &Game<S>, k: S) -> Result<DerivationTrace<S>, DerivationError> {
    let values = g.occurring_values()?;
    let mut b = Builder::new();
    let base = b.intern(g.clone());
    let constant = Game::new(
        g.state.clone(),
        g.observable.clone(),
        numeric_payoff(values.keys().map(|x| (x.clone(), k.clone()))),
    );
    let shifted = g.map_values(|v| v.clone() + k.clone())?;
    let c = b.intern(constant.clone());
    let s = b.intern(shifted);
    b.axiom(AxiomUse::Additivity { a: base, b: c, sum: s }, "add the constant payoff")?;
    exact_into(&mut b, &constant)?;
    if !k.is_zero() {
        let f = values.keys().map(|x| (x.clone(), x.clone() + k.clone())).collect();
        b.rewrite(s, RuleParams::Pet { f }, "shift the eigenvalues by k")?;
    }
    let conclusion = LinearClaim::eq(vec![(S::one(), s), (-S::one(), base)], k);
    b.finish(s, vec![conclusion])
}

/// Value of the equal-weight game on `2^m` values, built recursively from
/// two-branch games with nested games substituted for their consequences.
pub fn derive_dyadic<S: Scalar>(values: &[S]) -> Result<(S, DerivationTrace<S>), DerivationError> {
    if values.is_empty() {
        return Err(GameError::EmptyGame.into());
    }
    if !values.len().is_power_of_two() || values.len() < 2 {
        return Err(DerivationError::InvalidWeights(format!("{} values is not a power of two", values.len())));
    }
    let mut b = Builder::new();
    let (id, v) = dyadic_into(&mut b, values)?;
    let trace = b.finish(id, vec![LinearClaim::value_of(id, v.clone())])?;
    Ok((v, trace))
}

fn dyadic_into<S: Scalar>(b: &mut Builder<S>, values: &[S]) -> Result<(GameId, S), DerivationError> {
    if values.len() == 2 {
        return stage1_into(b, &values[0], &values[1]);
    }
    let (left, right) = values.split_at(values.len() / 2);
    let (ha, ya) = dyadic_into(b, left)?;
    let (hb, yb) = dyadic_into(b, right)?;
    let (outer, xa, xb) = if ya != yb {
        let (outer, _) = stage1_into(b, &ya, &yb)?;
        (outer, ya, yb)
    } else {
        let half = S::ratio(1, 2);
        let g = Game::from_weights([
            (half.clone(), Consequence::numeric(ya.clone())),
            (half, Consequence::numeric(yb.clone())),
        ])?;
        let id = b.intern(g);
        b.axiom(AxiomUse::PermutationAverage { game: id }, "two equal branches with equal payoffs")?;
        (id, S::zero(), S::one())
    };
    let mut composite = CompositeGame::from_game(&b.games[outer]);
    composite.nest(xa.clone(), CompositeGame::from_game(&b.games[ha]));
    composite.nest(xb.clone(), CompositeGame::from_game(&b.games[hb]));
    let flat = b.intern(flatten(&composite)?);
    let nested = [(xa, ha), (xb, hb)].into_iter().collect();
    b.axiom(AxiomUse::Substitutivity { outer, nested, flat }, "replace each consequence by a game of equal value")?;
    let v = b.value(flat).expect("substitution fixes the value");
    Ok((flat, v))
}

/// Expected-utility bounds when only the `n` heaviest branches are kept and
/// the remaining weight is paid `v_min` (lower) or `v_max` (upper).
pub fn truncate_bounds<S: Scalar>(g: &Game<S>, n: usize, v_min: &S, v_max: &S) -> Result<(S, S), DerivationError> {
    if n == 0 {
        return Err(DerivationError::Bounds("n must be positive".into()));
    }
    if v_min > v_max {
        return Err(DerivationError::Bounds(format!("v_min {v_min} exceeds v_max {v_max}")));
    }
    let canon = g.canonicalize()?;
    let mut branches: Vec<(S, &Consequence<S>)> = Vec::with_capacity(canon.len());
    for (c, w) in canon.branches() {
        let v = c.require_value()?;
        if v < v_min || v > v_max {
            return Err(DerivationError::Bounds(format!("value {v} of `{}` outside [{v_min}, {v_max}]", c.label)));
        }
        branches.push((w.clone(), c));
    }
    branches.sort_by(|(wa, ca), (wb, cb)| wb.cmp(wa).then_with(|| ca.label.cmp(&cb.label)));
    let mut head = S::zero();
    let mut kept = S::zero();
    for (w, c) in branches.iter().take(n) {
        head = head + w.clone() * c.value.clone().expect("checked");
        kept = kept + w.clone();
    }
    let tail = S::one() - kept;
    Ok((head.clone() + tail.clone() * v_min.clone(), head + tail * v_max.clone()))
}
